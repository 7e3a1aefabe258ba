//! Flat Rayleigh MISO channel, Gauss–Markov aging across the feedback delay,
//! and pilot-based channel estimation with a controllable error variance.

use crate::error::{Error, Result};
use crate::numerics::{bessel_j0, cgauss, cgauss_vec, Complex, ComplexVec, RngStream};

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub h: ComplexVec,
    pub time_index: u64,
}

impl ChannelState {
    /// Deterministic unit-gain channel (every antenna sees gain 1). Used for
    /// AWGN calibration runs.
    pub fn unit(nt: usize) -> Result<Self> {
        Ok(Self {
            h: ComplexVec::from_reals(&vec![1.0; nt])?,
            time_index: 0,
        })
    }

    pub fn nt(&self) -> usize {
        self.h.len()
    }
}

/// Temporal correlation between the estimation instant and the data instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayModel {
    rho: f64,
}

impl DelayModel {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.abs() <= 1.0) {
            return Err(Error::InvalidParameter(format!("|rho| must be <= 1, got {rho}")));
        }
        Ok(Self { rho })
    }

    /// No aging: the data sees exactly the estimated channel.
    pub fn none() -> Self {
        Self { rho: 1.0 }
    }

    /// Jakes correlation for Doppler `fd_hz` over delay `tau_s`.
    pub fn from_doppler(fd_hz: f64, tau_s: f64) -> Result<Self> {
        Self::new(jakes_rho(fd_hz, tau_s)?)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Least squares from known pilots: unbiased, additive white error.
    Ls,
    /// Genie estimate, no error regardless of noise level.
    Perfect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingModel {
    pub pilots_per_antenna: u32,
    pub pilot_energy_ratio: f64,
    pub estimator: Estimator,
}

impl Default for TrainingModel {
    fn default() -> Self {
        Self {
            pilots_per_antenna: 1,
            pilot_energy_ratio: 1.0,
            estimator: Estimator::Ls,
        }
    }
}

impl TrainingModel {
    pub fn perfect() -> Self {
        Self {
            estimator: Estimator::Perfect,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pilots_per_antenna == 0 {
            return Err(Error::InvalidParameter("pilots_per_antenna must be >= 1".into()));
        }
        if !(self.pilot_energy_ratio > 0.0) || !self.pilot_energy_ratio.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pilot_energy_ratio must be > 0, got {}",
                self.pilot_energy_ratio
            )));
        }
        Ok(())
    }

    /// Per-entry estimation error variance `n0 / (T * ratio * es)`.
    pub fn error_variance(&self, es: f64, n0: f64) -> f64 {
        match self.estimator {
            Estimator::Perfect => 0.0,
            Estimator::Ls => n0 / (self.pilots_per_antenna as f64 * self.pilot_energy_ratio * es),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub h_hat: ComplexVec,
    pub sigma_e2: f64,
}

/// Fresh i.i.d. Rayleigh channel, `h ~ CN(0, I)`.
pub fn draw_initial(nt: usize, rng: &mut RngStream) -> Result<ChannelState> {
    Ok(ChannelState {
        h: cgauss_vec(nt, rng)?,
        time_index: 0,
    })
}

/// One Gauss–Markov step `h' = rho h + sqrt(1 - rho²) g`, `g ~ CN(0, I)`.
///
/// Innovation draws are consumed even when `rho = 1` so the stream position
/// never depends on the delay setting.
pub fn evolve(state: &ChannelState, delay: &DelayModel, rng: &mut RngStream) -> Result<ChannelState> {
    let rho = delay.rho;
    if !(rho.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("|rho| must be <= 1, got {rho}")));
    }
    let innov = (1.0 - rho * rho).max(0.0).sqrt();
    let g = cgauss_vec(state.nt(), rng)?;
    let h = if rho == 1.0 {
        state.h.clone()
    } else {
        ComplexVec::new(
            state
                .h
                .iter()
                .zip(g.iter())
                .map(|(h, g)| h * rho + g * innov)
                .collect(),
        )?
    };
    Ok(ChannelState {
        h,
        time_index: state.time_index + 1,
    })
}

/// Jakes correlation `J0(2 pi fd tau)`, clamped to [-1, 1].
pub fn jakes_rho(fd_hz: f64, tau_s: f64) -> Result<f64> {
    if !(fd_hz >= 0.0) || !(tau_s >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "doppler and delay must be >= 0, got fd={fd_hz} tau={tau_s}"
        )));
    }
    Ok(bessel_j0(2.0 * PI * fd_hz * tau_s).clamp(-1.0, 1.0))
}

/// LS estimate `h_hat = h + e`, `e ~ CN(0, sigma_e2 I)`.
pub fn estimate_channel(
    state: &ChannelState,
    training: &TrainingModel,
    es: f64,
    n0: f64,
    rng: &mut RngStream,
) -> Result<ChannelEstimate> {
    check_energy(es, n0)?;
    training.validate()?;
    let sigma_e2 = training.error_variance(es, n0);
    let sd = sigma_e2.sqrt();
    let e = cgauss_vec(state.nt(), rng)?;
    let h_hat = if sigma_e2 == 0.0 {
        state.h.clone()
    } else {
        ComplexVec::new(state.h.iter().zip(e.iter()).map(|(h, e)| h + e * sd).collect())?
    };
    Ok(ChannelEstimate { h_hat, sigma_e2 })
}

/// Estimate of the beamformed scalar channel from `t_eff` dedicated pilots
/// sent through the beamformer (the extra half round of training).
pub fn estimate_effective(
    g_true: Complex,
    t_eff: u32,
    es: f64,
    n0: f64,
    rng: &mut RngStream,
) -> Result<(Complex, f64)> {
    check_energy(es, n0)?;
    if t_eff == 0 {
        return Err(Error::InvalidParameter("t_eff must be >= 1".into()));
    }
    let sigma2 = n0 / (t_eff as f64 * es);
    let e = cgauss(rng);
    let g_hat = if sigma2 == 0.0 { g_true } else { g_true + e * sigma2.sqrt() };
    Ok((g_hat, sigma2))
}

fn check_energy(es: f64, n0: f64) -> Result<()> {
    if !(es > 0.0) {
        return Err(Error::InvalidParameter(format!("es must be > 0, got {es}")));
    }
    if !(n0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("n0 must be >= 0, got {n0}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::inner;

    const TRIALS: u64 = 100_000;

    fn rng(stage: u64, t: u64) -> RngStream {
        RngStream::derive(2024, stage, t)
    }

    #[test]
    fn draw_initial_reproducible_and_power() {
        let a = draw_initial(2, &mut rng(0, 3)).unwrap();
        let b = draw_initial(2, &mut rng(0, 3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.time_index, 0);
        assert!(draw_initial(0, &mut rng(0, 0)).is_err());

        let mut pow = 0.0;
        let mut cross = Complex::new(0.0, 0.0);
        for t in 0..TRIALS {
            let s = draw_initial(2, &mut rng(0, t)).unwrap();
            pow += s.h.norm_sqr();
            cross += s.h[0] * s.h[1].conj();
        }
        assert!((pow / TRIALS as f64 - 2.0).abs() < 0.03);
        assert!((cross / TRIALS as f64).norm() < 0.02);
    }

    #[test]
    fn evolve_rho_one_is_identity() {
        let s = draw_initial(3, &mut rng(0, 1)).unwrap();
        let s2 = evolve(&s, &DelayModel::none(), &mut rng(1, 1)).unwrap();
        assert_eq!(s2.h, s.h);
        assert_eq!(s2.time_index, 1);
    }

    #[test]
    fn evolve_rejects_bad_rho() {
        assert!(DelayModel::new(1.5).is_err());
        let s = draw_initial(2, &mut rng(0, 1)).unwrap();
        let bad = DelayModel { rho: -1.01 };
        assert!(matches!(
            evolve(&s, &bad, &mut rng(1, 1)),
            Err(Error::InvalidParameter(_))
        ));
    }

    fn mean_corr(rho: f64) -> Complex {
        let delay = DelayModel::new(rho).unwrap();
        let mut acc = Complex::new(0.0, 0.0);
        for t in 0..TRIALS {
            let s = draw_initial(2, &mut rng(0, t)).unwrap();
            let s2 = evolve(&s, &delay, &mut rng(1, t)).unwrap();
            acc += inner(&s2.h, &s.h).unwrap();
        }
        acc / (2.0 * TRIALS as f64)
    }

    #[test]
    fn evolve_correlation() {
        let c = mean_corr(0.9);
        assert!((c.re - 0.9).abs() < 0.01, "{c}");
        let c0 = mean_corr(0.0);
        assert!(c0.norm() < 0.02, "{c0}");
    }

    #[test]
    fn stationarity_and_telescoping() {
        let rho = 0.9;
        let delay = DelayModel::new(rho).unwrap();
        let n = 20_000u64;
        let mut var = 0.0;
        let mut corr = [0.0f64; 6];
        for t in 0..n {
            let s0 = draw_initial(1, &mut rng(0, t)).unwrap();
            let mut s = s0.clone();
            let mut stepper = rng(1, t);
            for k in 1..=100 {
                s = evolve(&s, &delay, &mut stepper).unwrap();
                if k <= 5 {
                    corr[k] += (s.h[0] * s0.h[0].conj()).re;
                }
            }
            var += s.h[0].norm_sqr();
        }
        assert!((var / n as f64 - 1.0).abs() < 0.03);
        for (k, c) in corr.iter().enumerate().skip(1) {
            let expect = rho.powi(k as i32);
            // Var Re(h_k h_0*) = (1 + rho^2k)/2 <= 1, so 3 sigma < 0.022 at n = 2e4
            assert!((c / n as f64 - expect).abs() < 0.022, "k={k}");
        }
    }

    #[test]
    fn jakes_examples() {
        assert_eq!(jakes_rho(0.0, 0.3).unwrap(), 1.0);
        assert_eq!(jakes_rho(120.0, 0.0).unwrap(), 1.0);
        let tau = 2.404825557695773 / (2.0 * PI * 10.0);
        assert!(jakes_rho(10.0, tau).unwrap().abs() < 1e-8);
        // J0(0.1 pi) from the power series oracle
        assert!((jakes_rho(50.0, 1e-3).unwrap() - 0.975_480_4).abs() < 1e-5);
        assert!(jakes_rho(-1.0, 0.1).is_err());
        let d = DelayModel::from_doppler(50.0, 1e-3).unwrap();
        assert!(d.rho() < 1.0);
    }

    #[test]
    fn estimate_noiseless_and_formula() {
        let s = draw_initial(2, &mut rng(0, 7)).unwrap();
        let est = estimate_channel(&s, &TrainingModel::default(), 1.0, 0.0, &mut rng(2, 7)).unwrap();
        assert_eq!(est.h_hat, s.h);
        assert_eq!(est.sigma_e2, 0.0);
        let est = estimate_channel(&s, &TrainingModel::default(), 1.0, 0.1, &mut rng(2, 7)).unwrap();
        assert!((est.sigma_e2 - 0.1).abs() < 1e-15);
        assert!(estimate_channel(&s, &TrainingModel::default(), 0.0, 0.1, &mut rng(2, 7)).is_err());
        let perfect =
            estimate_channel(&s, &TrainingModel::perfect(), 1.0, 10.0, &mut rng(2, 7)).unwrap();
        assert_eq!(perfect.h_hat, s.h);
    }

    fn measured_error(pilots: u32) -> (f64, f64) {
        let training = TrainingModel {
            pilots_per_antenna: pilots,
            ..TrainingModel::default()
        };
        let mut err = 0.0;
        let mut cross = 0.0;
        for t in 0..TRIALS {
            let s = draw_initial(2, &mut rng(0, t)).unwrap();
            let est = estimate_channel(&s, &training, 1.0, 0.1, &mut rng(2, t)).unwrap();
            for k in 0..2 {
                let e = est.h_hat[k] - s.h[k];
                err += e.norm_sqr();
                cross += (e * s.h[k].conj()).re;
            }
        }
        let n = 2.0 * TRIALS as f64;
        (err / n, cross / n)
    }

    #[test]
    fn estimation_error_statistics() {
        let (e1, cross) = measured_error(1);
        assert!((e1 - 0.1).abs() < 0.003, "{e1}");
        // normalise by sqrt(E|e|^2 E|h|^2) = sqrt(0.1)
        assert!((cross / 0.1f64.sqrt()).abs() < 0.02);
        let (e2, _) = measured_error(2);
        assert!((e1 / e2 - 2.0).abs() < 0.1, "{}", e1 / e2);
    }

    #[test]
    fn effective_estimate() {
        let g = Complex::new(0.3, -1.2);
        let (gh, s2) = estimate_effective(g, 1, 1.0, 0.0, &mut rng(3, 0)).unwrap();
        assert_eq!(gh, g);
        assert_eq!(s2, 0.0);
        let (_, s2) = estimate_effective(g, 2, 1.0, 0.2, &mut rng(3, 0)).unwrap();
        assert!((s2 - 0.1).abs() < 1e-15);
        assert!(estimate_effective(g, 0, 1.0, 0.2, &mut rng(3, 0)).is_err());
        assert!(estimate_effective(g, 1, -1.0, 0.2, &mut rng(3, 0)).is_err());

        let mut acc = 0.0;
        for t in 0..TRIALS {
            let (gh, _) = estimate_effective(g, 1, 1.0, 0.05, &mut rng(3, t)).unwrap();
            acc += (gh - g).norm_sqr();
        }
        assert!((acc / TRIALS as f64 - 0.05).abs() < 0.002);
    }
}
