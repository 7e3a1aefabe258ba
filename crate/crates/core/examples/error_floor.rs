//! One round vs. one-and-a-half rounds of training with a stale channel
//! (rho = 0.9, 8-entry equal-gain codebook). The 1R AEVMS flattens into a
//! floor; the fresh effective-channel estimate of 1.5R keeps falling.
//!
//! cargo run --release --example error_floor

use std::sync::Arc;

use misolink::analysis::{detect_floor, sweep, tail_slopes, SweepConfig, FLOOR_SLOPE_THRESHOLD, FLOOR_TAIL_POINTS};
use misolink::channel::{DelayModel, TrainingModel};
use misolink::codebook::egb_search;
use misolink::numerics::RngStream;
use misolink::transceiver::{LinkConfig, ModScheme, Scheme};

fn main() -> misolink::Result<()> {
    let cb = Arc::new(egb_search(2, 8, 200, &mut RngStream::new(7, 0))?);
    let grid: Vec<f64> = (0..=8).map(|i| i as f64 * 5.0).collect();
    for scheme in [Scheme::Bf1R, Scheme::Bf1p5R] {
        let mut link = LinkConfig::new(scheme, 2, ModScheme::Qpsk).with_codebook(cb.clone());
        link.delay = DelayModel::new(0.9)?;
        link.training = TrainingModel::default();
        let mut cfg = SweepConfig::new(link, grid.clone(), 7);
        cfg.min_trials = 20_000;
        cfg.max_trials = 20_000;
        let c = sweep(&cfg)?;
        println!("{scheme}");
        for p in &c.points {
            println!("  {:5.1} dB  aevms {:8.3} dB  ber {:.3e}", p.esn0_db, p.aevms_db, p.ber);
        }
        let floor = detect_floor(&c, FLOOR_SLOPE_THRESHOLD, FLOOR_TAIL_POINTS)?;
        println!("  floor {:?}, last slope {:.3} dB/dB", floor, tail_slopes(&c, 1)?[0]);
    }
    Ok(())
}
