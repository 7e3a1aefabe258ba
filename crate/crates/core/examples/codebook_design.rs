//! Designs DFT, equal-gain and Lloyd codebooks for nt = 2, compares their
//! minimum chordal distance, storage and SNR loss against MRT, and writes
//! one of them to disk in the codebook file format.
//!
//! cargo run --release --example codebook_design [OUT_FILE]

use misolink::analysis::snr_loss_db;
use misolink::codebook::{
    dft_codebook, egb_search, load_codebook, lloyd_grassmannian, min_chordal_distance, save_codebook, storage_cost,
};
use misolink::numerics::RngStream;

fn main() -> misolink::Result<()> {
    println!("kind    N  bits  d_min   storage  loss_dB");
    for n in [2, 4, 8, 16] {
        let mut rng = RngStream::new(11, 0);
        let books = [
            ("dft", dft_codebook(2, n)?),
            ("egb", egb_search(2, n, 200, &mut rng)?),
            ("lloyd", lloyd_grassmannian(2, n, 100 * n, 50, &mut rng)?),
        ];
        for (kind, cb) in &books {
            println!(
                "{kind:6} {n:2}  {:4}  {:.4}  {:7}  {:.3}",
                cb.feedback_bits(),
                min_chordal_distance(cb),
                storage_cost(cb),
                snr_loss_db(cb, 100_000, 11)?
            );
        }
    }
    let path = std::env::args().nth(1).unwrap_or_else(|| "egb8.cb".into());
    let cb = egb_search(2, 8, 200, &mut RngStream::new(11, 0))?;
    save_codebook(&cb, &path)?;
    let back = load_codebook(&path)?;
    println!("wrote {path} ({} entries, alphabet {})", back.len(), back.alphabet());
    Ok(())
}
