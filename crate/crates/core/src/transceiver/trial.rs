use crate::channel::{draw_initial, estimate_channel, estimate_effective, evolve, ChannelState};
use crate::codebook::select_beamformer;
use crate::error::{Error, Result};
use crate::numerics::{cgauss, inner_unchecked, normalize, Complex, ComplexVec, RngStream};

use super::{demodulate_into, modulate, Equalization, Fading, LinkConfig, Scheme, TrialResult};

/// Random sub-streams of a trial. Each stage draws from its own stream, so
/// schemes that skip a stage (1R never uses `Effective`) still see the same
/// channel, estimation error, aging and noise as schemes that don't.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    Channel = 1,
    Estimate = 2,
    Delay = 3,
    Effective = 4,
    Bits = 5,
    Noise = 6,
}

impl Stage {
    fn stream(self, master_seed: u64, trial_id: u64) -> RngStream {
        RngStream::derive(master_seed, self as u64, trial_id)
    }
}

/// Channel quantities of a beamforming trial, for inspection in tests and
/// examples.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingTrace {
    pub h_est_instant: ComplexVec,
    pub h_hat: ComplexVec,
    pub h_data_instant: ComplexVec,
    pub w: ComplexVec,
    pub codeword: Option<usize>,
    /// True effective channel `h₂ᴴw`.
    pub g: Complex,
    /// The equalizer's estimate of `g`.
    pub g_hat: Complex,
}

/// Dispatches to the beamforming or Alamouti trial.
pub fn run_trial(cfg: &LinkConfig, trial_id: u64, master_seed: u64) -> Result<TrialResult> {
    match cfg.scheme {
        Scheme::Alamouti => run_trial_alamouti(cfg, trial_id, master_seed),
        _ => run_trial_beamforming(cfg, trial_id, master_seed),
    }
}

pub fn run_trial_beamforming(cfg: &LinkConfig, trial_id: u64, master_seed: u64) -> Result<TrialResult> {
    run_trial_beamforming_traced(cfg, trial_id, master_seed).map(|(r, _)| r)
}

fn channel_pair(cfg: &LinkConfig, nt: usize, trial_id: u64, seed: u64) -> Result<(ChannelState, ComplexVec, ChannelState)> {
    let h1 = match cfg.fading {
        Fading::Rayleigh => draw_initial(nt, &mut Stage::Channel.stream(seed, trial_id))?,
        Fading::Awgn => ChannelState::unit(nt)?,
    };
    let est = estimate_channel(&h1, &cfg.training, cfg.es, cfg.n0, &mut Stage::Estimate.stream(seed, trial_id))?;
    let h2 = match cfg.fading {
        Fading::Rayleigh => evolve(&h1, &cfg.delay, &mut Stage::Delay.stream(seed, trial_id))?,
        Fading::Awgn => ChannelState {
            time_index: 1,
            ..h1.clone()
        },
    };
    Ok((h1, est.h_hat, h2))
}

fn data_symbols(cfg: &LinkConfig, trial_id: u64, seed: u64) -> Result<(Vec<u8>, Vec<Complex>)> {
    let nbits = cfg.frame_symbols * cfg.modulation.bits_per_symbol();
    let mut rng = Stage::Bits.stream(seed, trial_id);
    let mut bits = Vec::with_capacity(nbits);
    while bits.len() < nbits {
        let word = rng.next_u64();
        let take = (nbits - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    let symbols = modulate(&bits, cfg.modulation)?;
    Ok((bits, symbols))
}

/// Beamforming trial (`siso`, `mrt`, `bf-1r`, `bf-1p5r`):
///
/// 1. draw `h₁`, estimate `ĥ₁`;
/// 2. pick `w` (codebook search on `ĥ₁`, or `ĥ₁/‖ĥ₁‖` for MRT, `[1]` for SISO);
/// 3. age the channel to `h₂` and form `g = h₂ᴴw`;
/// 4. `ĝ = ĥ₁ᴴw` (one round) or a fresh pilot estimate of `g` (1.5 rounds);
/// 5. send `K` symbols through `y = sqrt(es) g s + n` and equalize by `ĝ`.
///
/// A zero `ĝ` erases the frame (`ŝ = 0` for every symbol).
pub fn run_trial_beamforming_traced(
    cfg: &LinkConfig,
    trial_id: u64,
    master_seed: u64,
) -> Result<(TrialResult, BeamformingTrace)> {
    if cfg.scheme == Scheme::Alamouti {
        return Err(Error::InvalidParameter("alamouti is not a beamforming scheme".into()));
    }
    let nt = cfg.antennas();
    let (h1, h_hat, h2) = channel_pair(cfg, nt, trial_id, master_seed)?;

    let (w, codeword) = match cfg.scheme {
        Scheme::Siso => (ComplexVec::from_reals(&[1.0])?, None),
        Scheme::Mrt => match normalize(&h_hat) {
            Ok(w) => (w, None),
            // zero estimate: any unit vector; the frame is erased below anyway
            Err(_) => {
                let mut e1 = vec![Complex::new(0.0, 0.0); nt];
                e1[0] = Complex::new(1.0, 0.0);
                (ComplexVec::new(e1)?, None)
            }
        },
        _ => {
            let cb = cfg
                .codebook
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter(format!("scheme {} needs a codebook", cfg.scheme)))?;
            let (i, w) = select_beamformer(&h_hat, cb)?;
            (w.clone(), Some(i))
        }
    };

    let g = inner_unchecked(h2.h.as_slice(), w.as_slice());
    let g_hat = match cfg.equalization() {
        Equalization::OneRound => inner_unchecked(h_hat.as_slice(), w.as_slice()),
        Equalization::OneAndHalfRound => {
            estimate_effective(g, cfg.t_eff, cfg.es, cfg.n0, &mut Stage::Effective.stream(master_seed, trial_id))?.0
        }
    };

    let (bits, symbols) = data_symbols(cfg, trial_id, master_seed)?;
    let mut noise = Stage::Noise.stream(master_seed, trial_id);
    let (sse, eq) = transmit_frame(g, g_hat, cfg.es, cfg.n0, &symbols, &mut noise);
    let result = finish(cfg, sse, &bits, &eq);
    let trace = BeamformingTrace {
        h_est_instant: h1.h,
        h_hat,
        h_data_instant: h2.h,
        w,
        codeword,
        g,
        g_hat,
    };
    Ok((result, trace))
}

/// Passes `symbols` through `y = sqrt(es) g s + n` and equalizes with `ĝ`.
/// Returns the summed squared error and the equalized symbols.
fn transmit_frame(
    g: Complex,
    g_hat: Complex,
    es: f64,
    n0: f64,
    symbols: &[Complex],
    noise: &mut RngStream,
) -> (f64, Vec<Complex>) {
    let sqrt_es = es.sqrt();
    let sqrt_n0 = n0.sqrt();
    let gain = g * sqrt_es;
    let equalizer = if g_hat == Complex::new(0.0, 0.0) {
        None
    } else {
        Some(1.0 / (g_hat * sqrt_es))
    };
    let mut sse = 0.0;
    let mut eq = Vec::with_capacity(symbols.len());
    for s in symbols {
        let y = gain * s + cgauss(noise) * sqrt_n0;
        let s_hat = equalizer.map_or(Complex::new(0.0, 0.0), |q| y * q);
        sse += (s_hat - s).norm_sqr();
        eq.push(s_hat);
    }
    (sse, eq)
}

fn finish(cfg: &LinkConfig, sse: f64, bits: &[u8], eq: &[Complex]) -> TrialResult {
    let mut decided = Vec::with_capacity(bits.len());
    demodulate_into(eq, cfg.modulation, &mut decided);
    let bit_errors = bits.iter().zip(&decided).filter(|(a, b)| a != b).count() as u64;
    TrialResult {
        sum_sq_error: sse,
        symbols: eq.len() as u64,
        bit_errors,
        bits: bits.len() as u64,
    }
}

/// Transmit matrix for one Alamouti pair: `[slot][antenna]`, each slot
/// carrying total energy `(|s₁|² + |s₂|²)/2`.
pub fn alamouti_encode(s1: Complex, s2: Complex) -> [[Complex; 2]; 2] {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    [[s1 * a, s2 * a], [-s2.conj() * a, s1.conj() * a]]
}

/// Alamouti trial with the same channel draw, estimate and aging as the
/// beamforming trial; combining uses the stale estimate `ĥ₁`.
pub fn run_trial_alamouti(cfg: &LinkConfig, trial_id: u64, master_seed: u64) -> Result<TrialResult> {
    if cfg.nt != 2 {
        return Err(Error::InvalidParameter(format!("alamouti requires nt=2, got {}", cfg.nt)));
    }
    if !cfg.frame_symbols.is_multiple_of(2) {
        return Err(Error::InvalidParameter("alamouti requires an even frame length".into()));
    }
    let (_, h_hat, h2) = channel_pair(cfg, 2, trial_id, master_seed)?;
    let (bits, symbols) = data_symbols(cfg, trial_id, master_seed)?;
    let mut noise = Stage::Noise.stream(master_seed, trial_id);
    let sqrt_es = cfg.es.sqrt();
    let sqrt_n0 = cfg.n0.sqrt();
    let (h1, h2v) = (h2.h[0], h2.h[1]);
    let (e1, e2) = (h_hat[0], h_hat[1]);
    let denom = (cfg.es / 2.0).sqrt() * h_hat.norm_sqr();
    let inv = if denom > 0.0 { Some(1.0 / denom) } else { None };

    let mut sse = 0.0;
    let mut eq = Vec::with_capacity(symbols.len());
    for pair in symbols.chunks_exact(2) {
        let (s1, s2) = (pair[0], pair[1]);
        let x = alamouti_encode(s1, s2);
        let ya = (h1 * x[0][0] + h2v * x[0][1]) * sqrt_es + cgauss(&mut noise) * sqrt_n0;
        let yb = (h1 * x[1][0] + h2v * x[1][1]) * sqrt_es + cgauss(&mut noise) * sqrt_n0;
        let (r1, r2) = match inv {
            Some(q) => (
                (e1.conj() * ya + e2 * yb.conj()) * q,
                (e2.conj() * ya - e1 * yb.conj()) * q,
            ),
            None => (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)),
        };
        sse += (r1 - s1).norm_sqr() + (r2 - s2).norm_sqr();
        eq.push(r1);
        eq.push(r2);
    }
    Ok(finish(cfg, sse, &bits, &eq))
}
