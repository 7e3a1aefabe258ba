//! Monte Carlo sweeps and the AEVMS analysis toolkit: diversity fits on
//! BER vs. 1/AEVMS (or Es/N0), coding-gain offsets and error-floor detection.

mod export;
mod fit;
mod sweep;

pub use export::{export_csv, export_multi, parse_curve, render_curve, render_multi, CURVE_HEADER};
pub use fit::{
    coding_gain, detect_floor, esn0_at_ber, fit_diversity, tail_slopes, Axis, FLOOR_SLOPE_THRESHOLD,
    FLOOR_TAIL_POINTS,
};
pub use sweep::{sweep, SweepConfig};

use crate::channel::draw_initial;
use crate::codebook::{select_beamformer, Codebook};
use crate::error::{Error, Result};
use crate::numerics::inner_unchecked;
use crate::transceiver::Stage;
use crate::numerics::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PointFlags {
    /// Stopped at `max_trials` before collecting `min_bit_errors`.
    pub max_trials: bool,
    /// No bit errors observed; excluded from fits and interpolation.
    pub zero_ber: bool,
}

impl PointFlags {
    pub fn render(&self) -> String {
        let mut f = Vec::new();
        if self.max_trials {
            f.push("max_trials");
        }
        if self.zero_ber {
            f.push("zero_ber");
        }
        f.join("|")
    }

    pub fn parse(s: &str) -> Option<Self> {
        let mut flags = PointFlags::default();
        for tok in s.split('|').filter(|t| !t.is_empty()) {
            match tok {
                "max_trials" => flags.max_trials = true,
                "zero_ber" => flags.zero_ber = true,
                _ => return None,
            }
        }
        Some(flags)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub esn0_db: f64,
    pub aevms: f64,
    pub aevms_db: f64,
    pub ber: f64,
    /// Normal-approximation 95% half-width of `ber`.
    pub ber_ci95: f64,
    pub trials: u64,
    pub symbols: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub flags: PointFlags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub digest: String,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
}

/// Average beamforming gain of a codebook relative to MRT,
/// `10 log10(E‖h‖² / E|hᴴw_sel|²)` in dB, with perfect CSI over `trials`
/// Rayleigh draws. The draws depend only on `(seed, trial)`, so different
/// codebooks evaluated with one seed see identical channels.
pub fn snr_loss_db(cb: &Codebook, trials: u64, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("snr_loss_db needs trials >= 1".into()));
    }
    let (mut bf, mut mrt) = (0.0, 0.0);
    for t in 0..trials {
        let h = draw_initial(cb.nt(), &mut RngStream::derive(seed, Stage::Channel as u64, t))?.h;
        let (_, w) = select_beamformer(&h, cb)?;
        bf += inner_unchecked(h.as_slice(), w.as_slice()).norm_sqr();
        mrt += h.norm_sqr();
    }
    Ok(10.0 * (mrt / bf).log10())
}
