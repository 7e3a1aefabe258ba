//! Alamouti against MRT and a 4-entry codebook at nt = 2 with perfect CSI:
//! BER curves and the Es/N0 offset at BER 1e-3.
//!
//! cargo run --release --example alamouti_vs_beamforming

use std::sync::Arc;

use misolink::analysis::{coding_gain, sweep, Curve, SweepConfig};
use misolink::codebook::dft_codebook;
use misolink::transceiver::{LinkConfig, ModScheme, Scheme};

fn run(link: LinkConfig) -> misolink::Result<Curve> {
    let mut cfg = SweepConfig::new(link, (0..=20).map(f64::from).collect(), 5);
    cfg.min_bit_errors = 2000;
    cfg.max_trials = 100_000;
    sweep(&cfg)
}

fn main() -> misolink::Result<()> {
    let cb = Arc::new(dft_codebook(2, 4)?);
    let ala = run(LinkConfig::new(Scheme::Alamouti, 2, ModScheme::Qpsk))?;
    let mrt = run(LinkConfig::new(Scheme::Mrt, 2, ModScheme::Qpsk))?;
    let bf = run(LinkConfig::new(Scheme::Bf1R, 2, ModScheme::Qpsk).with_codebook(cb))?;
    println!("esn0_db  alamouti   mrt        bf(dft:4)");
    for i in 0..ala.points.len() {
        println!(
            "{:6.1}   {:.3e}  {:.3e}  {:.3e}",
            ala.points[i].esn0_db, ala.points[i].ber, mrt.points[i].ber, bf.points[i].ber
        );
    }
    println!("gain of mrt over alamouti at 1e-3: {:.2} dB", coding_gain(&ala, &mrt, 1e-3)?);
    println!("gain of dft:4 over alamouti at 1e-3: {:.2} dB", coding_gain(&ala, &bf, 1e-3)?);
    Ok(())
}
