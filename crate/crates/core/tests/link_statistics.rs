//! Statistical checks of the link simulation against closed forms and
//! paired-seed orderings.

use std::sync::Arc;

use statrs::function::erf::erfc;

use misolink::analysis::{sweep, SweepConfig};
use misolink::channel::{DelayModel, TrainingModel};
use misolink::codebook::dft_codebook;
use misolink::numerics::inner;
use misolink::transceiver::{run_trial, run_trial_beamforming_traced, Fading, LinkConfig, ModScheme, Scheme, TrialResult};

fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn pooled(link: &LinkConfig, trials: u64, seed: u64) -> TrialResult {
    let mut acc = TrialResult::default();
    for t in 0..trials {
        acc.merge(&run_trial(link, t, seed).unwrap());
    }
    acc
}

fn mrc2_bpsk(gamma: f64) -> f64 {
    let p = (1.0 - (gamma / (1.0 + gamma)).sqrt()) / 2.0;
    p * p * (1.0 + 2.0 * (1.0 - p))
}

fn stale_link(scheme: Scheme) -> LinkConfig {
    let mut l = LinkConfig::new(scheme, 2, ModScheme::Qpsk).with_codebook(Arc::new(dft_codebook(2, 4).unwrap()));
    l.delay = DelayModel::new(0.9).unwrap();
    l.training = TrainingModel::default();
    l
}

#[test]
fn siso_rayleigh_qpsk_matches_closed_form() {
    // per-bit SNR gamma = Es/N0 / 2 on each quadrature rail
    for db in [0.0, 5.0, 10.0] {
        let link = LinkConfig::new(Scheme::Siso, 1, ModScheme::Qpsk).at_esn0_db(db);
        let acc = pooled(&link, 30_000, 1);
        let g = lin(db) / 2.0;
        let want = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
        let got = acc.bit_errors as f64 / acc.bits as f64;
        assert!((got - want).abs() / want < 0.05, "{db} dB: {got} vs {want}");
    }
}

#[test]
fn awgn_qpsk_matches_q_function() {
    let mut link = LinkConfig::new(Scheme::Siso, 1, ModScheme::Qpsk).at_esn0_db(4.0);
    link.fading = Fading::Awgn;
    let acc = pooled(&link, 4000, 2);
    let want = q(lin(4.0).sqrt());
    let got = acc.bit_errors as f64 / acc.bits as f64;
    let ci = 1.96 * (want * (1.0 - want) / acc.bits as f64).sqrt();
    assert!((got - want).abs() < 3.0 * ci, "{got} vs {want}");
}

#[test]
fn alamouti_bpsk_is_mrc_at_half_snr() {
    for db in [3.0, 8.0] {
        let link = LinkConfig::new(Scheme::Alamouti, 2, ModScheme::Bpsk).at_esn0_db(db);
        let acc = pooled(&link, 30_000, 3);
        let want = mrc2_bpsk(lin(db) / 2.0);
        let got = acc.bit_errors as f64 / acc.bits as f64;
        assert!((got - want).abs() / want < 0.08, "{db} dB: {got} vs {want}");
    }
}

#[test]
fn mrt_gain_dominates_every_codeword() {
    let mrt = LinkConfig::new(Scheme::Mrt, 2, ModScheme::Qpsk).at_esn0_db(10.0);
    let bf = LinkConfig::new(Scheme::Bf1R, 2, ModScheme::Qpsk)
        .with_codebook(Arc::new(dft_codebook(2, 8).unwrap()))
        .at_esn0_db(10.0);
    for t in 0..2000 {
        let (_, a) = run_trial_beamforming_traced(&mrt, t, 4).unwrap();
        let (_, b) = run_trial_beamforming_traced(&bf, t, 4).unwrap();
        assert_eq!(a.h_data_instant, b.h_data_instant);
        assert!((a.g.norm_sqr() - a.h_data_instant.norm_sqr()).abs() < 1e-12);
        assert!(b.g.norm_sqr() <= a.g.norm_sqr() + 1e-12);
        for w in bf.codebook.as_ref().unwrap().vectors() {
            assert!(inner(&b.h_data_instant, w).unwrap().norm_sqr() <= a.g.norm_sqr() + 1e-12);
        }
    }
}

#[test]
fn fresh_effective_channel_beats_stale_at_high_snr() {
    let (one, half) = (stale_link(Scheme::Bf1R).at_esn0_db(30.0), stale_link(Scheme::Bf1p5R).at_esn0_db(30.0));
    let (a, b) = (pooled(&one, 3000, 5), pooled(&half, 3000, 5));
    assert!(b.sum_sq_error < a.sum_sq_error / 10.0);
    assert!(b.bit_errors <= a.bit_errors);
}

#[test]
fn ber_falls_with_snr() {
    for scheme in [Scheme::Siso, Scheme::Mrt, Scheme::Alamouti, Scheme::Bf1p5R] {
        let mut cfg = SweepConfig::new(stale_link(scheme), vec![0.0, 5.0, 10.0, 15.0], 6);
        cfg.max_trials = 20_000;
        cfg.min_bit_errors = 200;
        let c = sweep(&cfg).unwrap();
        for w in c.points.windows(2) {
            assert!(w[1].ber < w[0].ber, "{scheme}: {:?}", c.points);
            assert!(w[1].aevms < w[0].aevms, "{scheme}");
        }
    }
}

#[test]
fn higher_order_qam_needs_more_snr() {
    let bers: Vec<f64> = [ModScheme::Bpsk, ModScheme::Qpsk, ModScheme::Qam16, ModScheme::Qam64]
        .into_iter()
        .map(|m| {
            let acc = pooled(&LinkConfig::new(Scheme::Mrt, 2, m).at_esn0_db(12.0), 5000, 7);
            acc.bit_errors as f64 / acc.bits as f64
        })
        .collect();
    assert!(bers.windows(2).all(|w| w[0] < w[1]), "{bers:?}");
}

#[test]
fn aevms_is_modulation_independent_with_perfect_csi() {
    // the error vector is n / (sqrt(es) g), whatever the constellation
    let sse: Vec<f64> = [ModScheme::Bpsk, ModScheme::Qam64]
        .into_iter()
        .map(|m| pooled(&LinkConfig::new(Scheme::Mrt, 2, m).at_esn0_db(7.0), 500, 8).sum_sq_error)
        .collect();
    assert!((sse[0] - sse[1]).abs() < 1e-9 * sse[0]);
}
