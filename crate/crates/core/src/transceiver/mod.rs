//! Single-trial link simulation and the AEVMS/BER estimators.
//!
//! Signal convention: `y = sqrt(es) (hᴴw) s + n` with `E|s|² = 1` and
//! `n ~ CN(0, n0)`, so `es/n0` is the mean SISO receive SNR. The receiver
//! equalizes with one tap, `ŝ = y / (sqrt(es) ĝ)`, and the error vector is
//! taken on `ŝ` before the hard decision.

mod modulation;
mod trial;

pub use modulation::{demodulate_hard, demodulate_into, modulate, ModScheme};
pub use trial::{
    alamouti_encode, run_trial, run_trial_alamouti, run_trial_beamforming, run_trial_beamforming_traced,
    BeamformingTrace, Stage,
};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::channel::{DelayModel, TrainingModel};
use crate::codebook::Codebook;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// One antenna, no beamforming.
    Siso,
    /// Unquantized beamforming `w = ĥ/‖ĥ‖` (infinite feedback).
    Mrt,
    /// Codebook beamforming equalized with the pre-feedback estimate.
    Bf1R,
    /// Codebook beamforming with a fresh post-beamforming estimate of `hᴴw`.
    Bf1p5R,
    /// Two-antenna Alamouti code, no feedback.
    Alamouti,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Siso, Scheme::Mrt, Scheme::Bf1R, Scheme::Bf1p5R, Scheme::Alamouti];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Siso => "siso",
            Scheme::Mrt => "mrt",
            Scheme::Bf1R => "bf-1r",
            Scheme::Bf1p5R => "bf-1p5r",
            Scheme::Alamouti => "alamouti",
        }
    }

    pub fn uses_codebook(&self) -> bool {
        matches!(self, Scheme::Bf1R | Scheme::Bf1p5R)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme '{s}'")))
    }
}

/// Which estimate of the effective channel the equalizer uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Equalization {
    /// `ĝ = ĥᴴw` from the pre-feedback training round.
    #[default]
    OneRound,
    /// `ĝ` from dedicated pilots sent through the beamformer.
    OneAndHalfRound,
}

impl Equalization {
    pub fn name(&self) -> &'static str {
        match self {
            Equalization::OneRound => "1r",
            Equalization::OneAndHalfRound => "1p5r",
        }
    }
}

impl FromStr for Equalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1r" => Ok(Equalization::OneRound),
            "1p5r" => Ok(Equalization::OneAndHalfRound),
            _ => Err(Error::InvalidParameter(format!("unknown equalization mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Fading {
    /// i.i.d. CN(0, 1) per antenna, aged by the delay model.
    #[default]
    Rayleigh,
    /// Static unit-gain channel.
    Awgn,
}

impl Fading {
    pub fn name(&self) -> &'static str {
        match self {
            Fading::Rayleigh => "rayleigh",
            Fading::Awgn => "awgn",
        }
    }
}

impl FromStr for Fading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rayleigh" => Ok(Fading::Rayleigh),
            "awgn" => Ok(Fading::Awgn),
            _ => Err(Error::InvalidParameter(format!("unknown fading model '{s}'"))),
        }
    }
}

/// Everything one trial needs.
#[derive(Debug, Clone)]
pub struct LinkConfig {
    pub nt: usize,
    pub scheme: Scheme,
    pub codebook: Option<Arc<Codebook>>,
    pub modulation: ModScheme,
    pub es: f64,
    pub n0: f64,
    pub delay: DelayModel,
    pub training: TrainingModel,
    /// Pilots in the extra half round (1.5R equalization only).
    pub t_eff: u32,
    pub frame_symbols: usize,
    pub fading: Fading,
    /// Equalization used by `mrt` and `siso`; codebook schemes fix their own.
    pub mrt_equalization: Equalization,
}

impl LinkConfig {
    pub const DEFAULT_FRAME: usize = 120;

    /// Perfect-CSI, no-delay, noiseless link with default framing.
    pub fn new(scheme: Scheme, nt: usize, modulation: ModScheme) -> Self {
        Self {
            nt,
            scheme,
            codebook: None,
            modulation,
            es: 1.0,
            n0: 0.0,
            delay: DelayModel::none(),
            training: TrainingModel::perfect(),
            t_eff: 1,
            frame_symbols: Self::DEFAULT_FRAME,
            fading: Fading::Rayleigh,
            mrt_equalization: Equalization::OneRound,
        }
    }

    pub fn with_codebook(mut self, cb: Arc<Codebook>) -> Self {
        self.codebook = Some(cb);
        self
    }

    /// Sets `n0` from an Es/N0 in dB.
    pub fn at_esn0_db(mut self, esn0_db: f64) -> Self {
        self.n0 = self.es * 10f64.powf(-esn0_db / 10.0);
        self
    }

    /// Antennas actually driven by the scheme.
    pub fn antennas(&self) -> usize {
        match self.scheme {
            Scheme::Siso => 1,
            _ => self.nt,
        }
    }

    pub fn equalization(&self) -> Equalization {
        match self.scheme {
            Scheme::Bf1R => Equalization::OneRound,
            Scheme::Bf1p5R => Equalization::OneAndHalfRound,
            _ => self.mrt_equalization,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nt == 0 {
            return Err(Error::InvalidDimension("nt must be >= 1".into()));
        }
        if self.scheme.uses_codebook() {
            match &self.codebook {
                None => {
                    return Err(Error::InvalidParameter(format!("scheme {} needs a codebook", self.scheme)));
                }
                Some(cb) if cb.nt() != self.nt => {
                    return Err(Error::InvalidDimension(format!(
                        "codebook is for nt={}, link has nt={}",
                        cb.nt(),
                        self.nt
                    )));
                }
                _ => {}
            }
        }
        if self.scheme == Scheme::Alamouti {
            if self.nt != 2 {
                return Err(Error::InvalidParameter(format!("alamouti requires nt=2, got {}", self.nt)));
            }
            if !self.frame_symbols.is_multiple_of(2) {
                return Err(Error::InvalidParameter("alamouti requires an even frame length".into()));
            }
        }
        if !(self.es > 0.0) || !self.es.is_finite() {
            return Err(Error::InvalidParameter(format!("es must be > 0, got {}", self.es)));
        }
        if !(self.n0 >= 0.0) || !self.n0.is_finite() {
            return Err(Error::InvalidParameter(format!("n0 must be >= 0, got {}", self.n0)));
        }
        if self.frame_symbols == 0 {
            return Err(Error::InvalidParameter("frame length must be >= 1".into()));
        }
        if self.t_eff == 0 {
            return Err(Error::InvalidParameter("t_eff must be >= 1".into()));
        }
        self.training.validate()
    }
}

/// Raw per-trial counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialResult {
    pub sum_sq_error: f64,
    pub symbols: u64,
    pub bit_errors: u64,
    pub bits: u64,
}

impl TrialResult {
    pub fn merge(&mut self, other: &TrialResult) {
        self.sum_sq_error += other.sum_sq_error;
        self.symbols += other.symbols;
        self.bit_errors += other.bit_errors;
        self.bits += other.bits;
    }
}

fn pooled(results: &[TrialResult]) -> TrialResult {
    let mut acc = TrialResult::default();
    for r in results {
        acc.merge(r);
    }
    acc
}

/// Pooled AEVMS: total squared error over total symbols (reference
/// constellation energy is 1). Summed in slice order.
pub fn aevms(results: &[TrialResult]) -> Result<f64> {
    let acc = pooled(results);
    if acc.symbols == 0 {
        return Err(Error::InvalidInput("aevms over zero symbols".into()));
    }
    Ok(acc.sum_sq_error / acc.symbols as f64)
}

pub fn ber(results: &[TrialResult]) -> Result<f64> {
    let acc = pooled(results);
    if acc.bits == 0 {
        return Err(Error::InvalidInput("ber over zero bits".into()));
    }
    Ok(acc.bit_errors as f64 / acc.bits as f64)
}
