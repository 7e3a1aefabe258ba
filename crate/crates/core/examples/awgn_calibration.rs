//! SISO QPSK over AWGN: measured AEVMS against N0/Es and BER against Q(sqrt(Es/N0)).
//!
//! cargo run --release --example awgn_calibration

use misolink::analysis::{sweep, SweepConfig};
use misolink::transceiver::{Fading, LinkConfig, ModScheme, Scheme};

fn q(x: f64) -> f64 {
    // Q(x) by Simpson integration of the normal density from x to x + 12
    let (n, h) = (2000, 12.0 / 2000.0);
    let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = f(x) + f(x + 12.0);
    for i in 1..n {
        s += f(x + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn main() -> misolink::Result<()> {
    let mut link = LinkConfig::new(Scheme::Siso, 1, ModScheme::Qpsk);
    link.fading = Fading::Awgn;
    let mut cfg = SweepConfig::new(link, (0..=10).map(f64::from).collect(), 1);
    cfg.min_trials = 8334;
    cfg.max_trials = 8334;
    cfg.min_bit_errors = 0;
    let curve = sweep(&cfg)?;
    println!("esn0_db  aevms_db  expected  ber        Q(sqrt(g))");
    for p in &curve.points {
        let g = 10f64.powf(p.esn0_db / 10.0);
        println!(
            "{:6.1}  {:8.3}  {:8.3}  {:.3e}  {:.3e}",
            p.esn0_db,
            p.aevms_db,
            -p.esn0_db,
            p.ber,
            q(g.sqrt())
        );
    }
    Ok(())
}
