//! Replaces DFT codewords by their nearest QPSK-alphabet vectors as the
//! tolerance eps grows, and reports storage against AEVMS loss.
//!
//! cargo run --release --example mixed_codebook

use std::sync::Arc;

use misolink::analysis::{sweep, SweepConfig};
use misolink::codebook::{dft_codebook, mixed_codebook, mixed_replacements, storage_cost, Codebook};
use misolink::transceiver::{LinkConfig, ModScheme, Scheme};

fn aevms(cb: &Codebook) -> misolink::Result<f64> {
    let link = LinkConfig::new(Scheme::Bf1R, 4, ModScheme::Qpsk).with_codebook(Arc::new(cb.clone()));
    let mut cfg = SweepConfig::new(link, vec![10.0], 3);
    cfg.min_trials = 20_000;
    cfg.max_trials = 20_000;
    Ok(sweep(&cfg)?.points[0].aevms)
}

fn main() -> misolink::Result<()> {
    let base = dft_codebook(4, 8)?;
    let a0 = aevms(&base)?;
    println!("eps   replaced  alphabet  storage  aevms_loss_dB");
    for i in 0..=10 {
        let eps = i as f64 * 0.1;
        let m = mixed_codebook(&base, eps)?;
        let replaced = mixed_replacements(&base, eps)?.iter().filter(|&&r| r).count();
        println!(
            "{eps:.1}   {replaced:8}  {:8}  {:7}  {:.3}",
            m.alphabet().to_string(),
            storage_cost(&m),
            10.0 * (aevms(&m)? / a0).log10()
        );
    }
    Ok(())
}
