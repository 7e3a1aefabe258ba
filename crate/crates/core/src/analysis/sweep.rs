use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::codebook::render_codebook;
use crate::error::{Error, Result};
use crate::transceiver::{run_trial, LinkConfig, TrialResult};

use super::{Curve, CurvePoint, PointFlags};

/// Trials handed to the worker pool at a time. Early stopping is decided
/// trial by trial afterwards, so this only affects wasted work, never results.
const BATCH: u64 = 2048;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Template link; `n0` is overwritten at each grid point.
    pub link: LinkConfig,
    pub esn0_db_grid: Vec<f64>,
    pub min_trials: u64,
    /// Early-stop target per point.
    pub min_bit_errors: u64,
    pub max_trials: u64,
    pub master_seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

impl SweepConfig {
    pub const DEFAULT_MIN_ERRORS: u64 = 100;
    pub const DEFAULT_MIN_TRIALS: u64 = 100;
    pub const DEFAULT_MAX_TRIALS: u64 = 200_000;

    pub fn new(link: LinkConfig, esn0_db_grid: Vec<f64>, master_seed: u64) -> Self {
        Self {
            link,
            esn0_db_grid,
            min_trials: Self::DEFAULT_MIN_TRIALS,
            min_bit_errors: Self::DEFAULT_MIN_ERRORS,
            max_trials: Self::DEFAULT_MAX_TRIALS,
            master_seed,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.esn0_db_grid.is_empty() {
            return Err(Error::InvalidParameter("Es/N0 grid is empty".into()));
        }
        if self.esn0_db_grid.iter().any(|x| x.is_nan()) || self.esn0_db_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("Es/N0 grid must be strictly ascending".into()));
        }
        if self.min_trials < 100 {
            return Err(Error::InvalidParameter(format!("min_trials must be >= 100, got {}", self.min_trials)));
        }
        if self.max_trials < self.min_trials {
            return Err(Error::InvalidParameter("max_trials must be >= min_trials".into()));
        }
        self.link.validate()
    }

    /// Canonical text of everything that determines the sweep's output.
    pub fn describe(&self) -> String {
        let l = &self.link;
        let mut s = format!(
            "scheme={} nt={} mod={} es={:e} rho={:e} pilots={} pilot_ratio={:e} estimator={:?} \
             t_eff={} frame={} fading={} mrt_eq={}\n",
            l.scheme,
            l.nt,
            l.modulation,
            l.es,
            l.delay.rho(),
            l.training.pilots_per_antenna,
            l.training.pilot_energy_ratio,
            l.training.estimator,
            l.t_eff,
            l.frame_symbols,
            l.fading.name(),
            l.mrt_equalization.name(),
        );
        s += &format!(
            "grid={:?} min_trials={} min_errors={} max_trials={} seed={}\n",
            self.esn0_db_grid, self.min_trials, self.min_bit_errors, self.max_trials, self.master_seed
        );
        if let Some(cb) = &l.codebook {
            s += &render_codebook(cb);
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of [`describe`](Self::describe).
    pub fn digest(&self) -> String {
        Sha256::digest(self.describe().as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Runs the Monte Carlo sweep. Each grid point reuses trial ids `0, 1, ...`,
/// so all points (and all schemes run with the same seed) see the same
/// channel and noise realizations.
pub fn sweep(cfg: &SweepConfig) -> Result<Curve> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if cfg.workers > 0 {
        builder = builder.num_threads(cfg.workers);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;

    let mut points = Vec::with_capacity(cfg.esn0_db_grid.len());
    for &esn0_db in &cfg.esn0_db_grid {
        let link = cfg.link.clone().at_esn0_db(esn0_db);
        let (acc, trials, reached) = pool.install(|| run_point(cfg, &link))?;
        points.push(make_point(esn0_db, &acc, trials, !reached));
    }
    Ok(Curve {
        label: cfg.link.scheme.name().to_string(),
        digest: cfg.digest(),
        seed: cfg.master_seed,
        points,
    })
}

fn run_point(cfg: &SweepConfig, link: &LinkConfig) -> Result<(TrialResult, u64, bool)> {
    let mut acc = TrialResult::default();
    let mut trials = 0u64;
    while trials < cfg.max_trials {
        let end = (trials + BATCH).min(cfg.max_trials);
        let batch: Vec<TrialResult> = (trials..end)
            .into_par_iter()
            .map(|t| run_trial(link, t, cfg.master_seed))
            .collect::<Result<_>>()?;
        for r in &batch {
            acc.merge(r);
            trials += 1;
            if trials >= cfg.min_trials && acc.bit_errors >= cfg.min_bit_errors {
                return Ok((acc, trials, true));
            }
        }
    }
    Ok((acc, trials, false))
}

/// Aggregates of trials `0..trials` into a curve point.
pub(crate) fn make_point(esn0_db: f64, acc: &TrialResult, trials: u64, hit_max: bool) -> CurvePoint {
    let aevms = if acc.symbols > 0 {
        acc.sum_sq_error / acc.symbols as f64
    } else {
        0.0
    };
    let ber = if acc.bits > 0 {
        acc.bit_errors as f64 / acc.bits as f64
    } else {
        0.0
    };
    let ci = if acc.bits > 0 {
        1.96 * (ber * (1.0 - ber) / acc.bits as f64).sqrt()
    } else {
        0.0
    };
    CurvePoint {
        esn0_db,
        aevms,
        aevms_db: 10.0 * aevms.log10(),
        ber,
        ber_ci95: ci,
        trials,
        symbols: acc.symbols,
        bits: acc.bits,
        bit_errors: acc.bit_errors,
        flags: PointFlags {
            max_trials: hit_max,
            zero_ber: acc.bit_errors == 0,
        },
    }
}
