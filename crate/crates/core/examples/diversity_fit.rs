//! Diversity order from BER against Es/N0 and against 1/AEVMS, for SISO,
//! MRT and Alamouti over Rayleigh fading.
//!
//! cargo run --release --example diversity_fit

use misolink::analysis::{fit_diversity, sweep, Axis, SweepConfig};
use misolink::transceiver::{LinkConfig, ModScheme, Scheme};

fn main() -> misolink::Result<()> {
    let grid: Vec<f64> = (4..=11).map(|i| i as f64 * 2.0).collect();
    for (scheme, nt) in [(Scheme::Siso, 1), (Scheme::Mrt, 2), (Scheme::Alamouti, 2)] {
        let mut cfg = SweepConfig::new(LinkConfig::new(scheme, nt, ModScheme::Qpsk), grid.clone(), 9);
        cfg.min_trials = 50_000;
        cfg.max_trials = 50_000;
        cfg.min_bit_errors = 0;
        let c = sweep(&cfg)?;
        let d = fit_diversity(&c, Axis::EsN0, (10.0, 20.0))?;
        // the same points on the 1/AEVMS axis
        let inv: Vec<f64> = c.points.iter().filter(|p| (10.0..=20.0).contains(&p.esn0_db)).map(|p| -p.aevms_db).collect();
        let lo = inv.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = inv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let da = fit_diversity(&c, Axis::InvAevms, (lo, hi))?;
        println!("{:9} d(Es/N0) = {d:.3}   d(1/AEVMS) = {da:.3}", scheme.name());
    }
    Ok(())
}
