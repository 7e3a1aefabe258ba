//! Beamforming codebooks: construction, quantization, quality metrics and
//! storage accounting.
//!
//! A codebook is an ordered list of unit-norm beamformers; the index of the
//! selected entry is the feedback word. Equal-gain codebooks restrict every
//! entry to `e^{j 2 pi k / M} / sqrt(nt)`, which removes multiplications from
//! the beamformer and lets each entry be stored in `log2 M` bits.

mod io;
mod search;

pub use io::{load_codebook, parse_codebook, render_codebook, save_codebook};
pub use search::{egb_search, lloyd_grassmannian, lloyd_grassmannian_trace, LloydOptions};

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{chordal_distance, inner_unchecked, normalize, Complex, ComplexVec};

/// Tolerance on `| ||v|| - 1 |` for stored codewords.
pub const UNIT_TOL: f64 = 1e-10;

/// Entry alphabet of a codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    Generic,
    /// Entries `e^{j 2 pi k / 2^phase_bits} / sqrt(nt)`. `phase_bits = 2` is the
    /// QPSK alphabet `{+1, +j, -1, -j} / sqrt(nt)`.
    EqualGain { phase_bits: u32 },
}

impl Alphabet {
    pub const QPSK: Alphabet = Alphabet::EqualGain { phase_bits: 2 };

    pub fn token(&self) -> String {
        match self {
            Alphabet::Generic => "generic".into(),
            Alphabet::EqualGain { phase_bits: 2 } => "qpsk-eg".into(),
            Alphabet::EqualGain { phase_bits } => format!("psk{}-eg", 1u64 << phase_bits),
        }
    }

    pub fn from_token(tok: &str) -> Option<Alphabet> {
        match tok {
            "generic" => Some(Alphabet::Generic),
            "qpsk-eg" => Some(Alphabet::QPSK),
            _ => {
                let m: u64 = tok.strip_prefix("psk")?.strip_suffix("-eg")?.parse().ok()?;
                if m >= 2 && m.is_power_of_two() && m <= 256 {
                    Some(Alphabet::EqualGain {
                        phase_bits: m.trailing_zeros(),
                    })
                } else {
                    None
                }
            }
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    nt: usize,
    vectors: Vec<ComplexVec>,
    alphabet: Alphabet,
    label: String,
}

impl Codebook {
    /// Validates unit norm, common length and alphabet membership.
    pub fn new(vectors: Vec<ComplexVec>, alphabet: Alphabet, label: impl Into<String>) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::InvalidDimension("codebook must have at least one vector".into()))?;
        let nt = first.len();
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != nt {
                return Err(Error::InvalidDimension(format!(
                    "codeword {i} has length {}, expected {nt}",
                    v.len()
                )));
            }
            if (v.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidInput(format!(
                    "codeword {i} has norm {}, expected 1",
                    v.norm()
                )));
            }
            if let Alphabet::EqualGain { phase_bits } = alphabet {
                if !in_equal_gain_alphabet(v, phase_bits) {
                    return Err(Error::InvalidInput(format!(
                        "codeword {i} is not in the {alphabet} alphabet"
                    )));
                }
            }
        }
        let label: String = label.into();
        let label = if label.is_empty() {
            "unnamed".to_string()
        } else {
            label.split_whitespace().collect::<Vec<_>>().join("_")
        };
        Ok(Self {
            nt,
            vectors,
            alphabet,
            label,
        })
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[ComplexVec] {
        &self.vectors
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Feedback bits per selection, `ceil(log2 N)`.
    pub fn feedback_bits(&self) -> u32 {
        (self.len() as u64).next_power_of_two().trailing_zeros()
    }
}

fn in_equal_gain_alphabet(v: &ComplexVec, phase_bits: u32) -> bool {
    let mag = 1.0 / (v.len() as f64).sqrt();
    let m = (1u64 << phase_bits) as f64;
    v.iter().all(|z| {
        let k = (z.arg() * m / (2.0 * PI)).round();
        (z - Complex::from_polar(mag, 2.0 * PI * k / m)).norm() < 1e-9
    })
}

/// `e^{j 2 pi num / den}` with exact values on the quarter turns.
pub(crate) fn unit_phase(num: u64, den: u64) -> Complex {
    let num = num % den;
    if (4 * num).is_multiple_of(den) {
        match 4 * num / den {
            0 => Complex::new(1.0, 0.0),
            1 => Complex::new(0.0, 1.0),
            2 => Complex::new(-1.0, 0.0),
            _ => Complex::new(0.0, -1.0),
        }
    } else {
        Complex::from_polar(1.0, 2.0 * PI * num as f64 / den as f64)
    }
}

/// DFT codebook: entry `k` of vector `i` is `exp(j 2 pi i k / n) / sqrt(nt)`.
pub fn dft_codebook(nt: usize, n: usize) -> Result<Codebook> {
    if nt == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!("dft codebook needs nt, n >= 1 (got {nt}, {n})")));
    }
    let scale = 1.0 / (nt as f64).sqrt();
    let (nt64, n64) = (nt as u64, n as u64);
    let vectors = (0..n64)
        .map(|i| ComplexVec::new((0..nt64).map(|k| unit_phase(i * k, n64) * scale).collect()))
        .collect::<Result<Vec<_>>>()?;
    let quarter_turns = (0..n64).all(|i| (0..nt64).all(|k| (4 * ((i * k) % n64)) % n64 == 0));
    let alphabet = if quarter_turns { Alphabet::QPSK } else { Alphabet::Generic };
    Codebook::new(vectors, alphabet, format!("dft{n}"))
}

/// Rotates `v` so its first nonzero entry is real and positive.
pub fn canonical_phase(v: &ComplexVec) -> ComplexVec {
    match v.iter().find(|z| z.norm() > 0.0) {
        Some(z) if z.im != 0.0 || z.re < 0.0 => v.scale(z.conj() / z.norm()),
        _ => v.clone(),
    }
}

/// Nearest equal-gain vector with `2^phase_bits` phases: each entry of the
/// phase-canonical `v` is rounded to the closest alphabet phase. Ties go to the
/// lowest phase index (for QPSK: +1, then +j, then -1, then -j).
pub fn nearest_equal_gain(v: &ComplexVec, phase_bits: u32) -> Result<ComplexVec> {
    let v = canonical_phase(&normalize(v)?);
    let m = 1u64 << phase_bits;
    let scale = 1.0 / (v.len() as f64).sqrt();
    let step = 2.0 * PI / m as f64;
    let entries = v
        .iter()
        .map(|z| {
            let theta = z.arg();
            let mut best = 0u64;
            let mut best_d = f64::INFINITY;
            for k in 0..m {
                let d = angle_dist(theta, k as f64 * step);
                if d < best_d - 1e-9 {
                    best = k;
                    best_d = d;
                }
            }
            unit_phase(best, m) * scale
        })
        .collect();
    ComplexVec::new(entries)
}

/// QPSK equal-gain quantization of `v`.
pub fn nearest_fa_vector(v: &ComplexVec) -> Result<ComplexVec> {
    nearest_equal_gain(v, 2)
}

fn angle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn is_qpsk_exact(v: &ComplexVec, approx: &ComplexVec) -> bool {
    canonical_phase(v)
        .iter()
        .zip(approx.iter())
        .all(|(a, b)| (a - b).norm() <= 1e-10)
}

/// Which entries of `base` a mixed codebook with threshold `eps` replaces.
///
/// An entry is replaced when it already lies in the QPSK alphabet (up to a
/// global phase) or when its QPSK approximation is within chordal distance
/// `eps`.
pub fn mixed_replacements(base: &Codebook, eps: f64) -> Result<Vec<bool>> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be >= 0, got {eps}")));
    }
    base.vectors()
        .iter()
        .map(|v| {
            let approx = nearest_fa_vector(v)?;
            Ok(is_qpsk_exact(v, &approx) || chordal_distance(v, &approx)? <= eps)
        })
        .collect()
}

/// Mixed codebook: entries within `eps` of the QPSK equal-gain alphabet are
/// swapped for their approximations, the rest are kept.
pub fn mixed_codebook(base: &Codebook, eps: f64) -> Result<Codebook> {
    let mask = mixed_replacements(base, eps)?;
    let vectors = base
        .vectors()
        .iter()
        .zip(&mask)
        .map(|(v, &replace)| if replace { nearest_fa_vector(v) } else { Ok(v.clone()) })
        .collect::<Result<Vec<_>>>()?;
    let alphabet = if mask.iter().all(|&r| r) {
        Alphabet::QPSK
    } else {
        Alphabet::Generic
    };
    Codebook::new(vectors, alphabet, format!("{}+mixed", base.label()))
}

/// Receiver-side selection: the entry maximizing `|h_hatᴴ w|²`, lowest index
/// on ties.
pub fn select_beamformer<'a>(h_hat: &ComplexVec, cb: &'a Codebook) -> Result<(usize, &'a ComplexVec)> {
    if h_hat.len() != cb.nt() {
        return Err(Error::InvalidDimension(format!(
            "channel has {} antennas, codebook has {}",
            h_hat.len(),
            cb.nt()
        )));
    }
    let mut best = 0;
    let mut best_gain = f64::NEG_INFINITY;
    for (i, w) in cb.vectors().iter().enumerate() {
        let gain = inner_unchecked(h_hat.as_slice(), w.as_slice()).norm_sqr();
        if gain > best_gain {
            best = i;
            best_gain = gain;
        }
    }
    Ok((best, &cb.vectors()[best]))
}

/// Minimum pairwise chordal distance; 1 for codebooks with fewer than two
/// entries.
pub fn min_chordal_distance(cb: &Codebook) -> f64 {
    let v = cb.vectors();
    let mut min = 1.0f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            // lengths are equal by construction
            min = min.min(chordal_distance(&v[i], &v[j]).unwrap_or(0.0));
        }
    }
    min
}

/// Bits needed to store the codebook: `log2 M` per entry for equal-gain
/// alphabets, two 64-bit reals per entry otherwise.
pub fn storage_cost(cb: &Codebook) -> u64 {
    let per_entry = match cb.alphabet() {
        Alphabet::EqualGain { phase_bits } => phase_bits as u64,
        Alphabet::Generic => 128,
    };
    per_entry * cb.nt() as u64 * cb.len() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{cgauss_vec, inner, RngStream};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn dft_examples() {
        let r = 1.0 / 2f64.sqrt();
        let cb = dft_codebook(2, 2).unwrap();
        assert_eq!(cb.vectors()[0], ComplexVec::new(vec![c(r, 0.0), c(r, 0.0)]).unwrap());
        assert_eq!(cb.vectors()[1], ComplexVec::new(vec![c(r, 0.0), c(-r, 0.0)]).unwrap());
        assert_eq!(cb.alphabet(), Alphabet::QPSK);
        let cb4 = dft_codebook(2, 4).unwrap();
        assert_eq!(cb4.vectors()[1], ComplexVec::new(vec![c(r, 0.0), c(0.0, r)]).unwrap());
        let cb8 = dft_codebook(4, 8).unwrap();
        assert_eq!(cb8.alphabet(), Alphabet::Generic);
        for cb in [cb, cb4, cb8, dft_codebook(3, 7).unwrap()] {
            for v in cb.vectors() {
                assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
        assert!(dft_codebook(0, 3).is_err());
    }

    #[test]
    fn nearest_fa_examples() {
        let r = 1.0 / 2f64.sqrt();
        let v = ComplexVec::new(vec![c(r, 0.0), c(r, 0.0)]).unwrap();
        assert_eq!(nearest_fa_vector(&v).unwrap(), v);
        let v2 = ComplexVec::new(vec![c(r, 0.0), Complex::from_polar(r, 0.2)]).unwrap();
        assert_eq!(nearest_fa_vector(&v2).unwrap(), v);
        // pi/4 is equidistant from +1 and +j
        let tie = ComplexVec::new(vec![c(r, 0.0), Complex::from_polar(r, PI / 4.0)]).unwrap();
        assert_eq!(nearest_fa_vector(&tie).unwrap(), v);
        let zero = ComplexVec::from_reals(&[0.0, 0.0]).unwrap();
        assert!(matches!(nearest_fa_vector(&zero), Err(Error::DegenerateInput(_))));
    }

    /// All 16 QPSK equal-gain vectors for nt = 2.
    fn all_qpsk_2() -> Vec<ComplexVec> {
        let r = 0.5f64.sqrt();
        let mut out = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                out.push(ComplexVec::new(vec![unit_phase(a, 4) * r, unit_phase(b, 4) * r]).unwrap());
            }
        }
        out
    }

    #[test]
    fn nearest_fa_matches_exhaustive_nt2() {
        let all = all_qpsk_2();
        let mut rng = RngStream::new(77, 0);
        for _ in 0..10_000 {
            let v = normalize(&cgauss_vec(2, &mut rng).unwrap()).unwrap();
            let got = inner(&v, &nearest_fa_vector(&v).unwrap()).unwrap().norm();
            let best = all
                .iter()
                .map(|w| inner(&v, w).unwrap().norm())
                .fold(0.0f64, f64::max);
            assert!((got - best).abs() < 1e-12, "{got} vs {best}");
        }
    }

    #[test]
    fn mixed_codebook_rules() {
        // lloyd-style generic vectors with no alphabet entries
        let mut rng = RngStream::new(5, 0);
        let vecs: Vec<_> = (0..6)
            .map(|_| canonical_phase(&normalize(&cgauss_vec(3, &mut rng).unwrap()).unwrap()))
            .collect();
        let base = Codebook::new(vecs, Alphabet::Generic, "rand").unwrap();
        let m0 = mixed_codebook(&base, 0.0).unwrap();
        assert_eq!(m0.vectors(), base.vectors());
        assert_eq!(m0.alphabet(), Alphabet::Generic);

        let m1 = mixed_codebook(&base, 1.0).unwrap();
        assert_eq!(m1.alphabet(), Alphabet::QPSK);
        for (a, b) in m1.vectors().iter().zip(base.vectors()) {
            assert_eq!(*a, nearest_fa_vector(b).unwrap());
        }
        assert_eq!(storage_cost(&m1), 2 * 3 * 6);
        assert!(mixed_codebook(&base, -0.1).is_err());
    }

    #[test]
    fn mixed_eps_zero_touches_only_alphabet_entries() {
        let base = dft_codebook(4, 8).unwrap();
        let mask = mixed_replacements(&base, 0.0).unwrap();
        // even DFT rows are quarter-turn phases
        assert_eq!(mask, vec![true, false, true, false, true, false, true, false]);
        let m0 = mixed_codebook(&base, 0.0).unwrap();
        for (i, (a, b)) in m0.vectors().iter().zip(base.vectors()).enumerate() {
            if mask[i] {
                assert!(chordal_distance(a, b).unwrap() < 1e-12);
            } else {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn mixed_count_monotone_in_eps() {
        let base = dft_codebook(4, 8).unwrap();
        let mut prev = 0;
        for i in 0..=100 {
            let eps = i as f64 / 100.0;
            let count = mixed_replacements(&base, eps).unwrap().iter().filter(|&&r| r).count();
            assert!(count >= prev, "eps={eps}");
            prev = count;
        }
        assert_eq!(prev, 8);
    }

    #[test]
    fn select_examples() {
        let cb = dft_codebook(2, 2).unwrap();
        let h = ComplexVec::from_reals(&[1.0, 0.0]).unwrap();
        assert_eq!(select_beamformer(&h, &cb).unwrap().0, 0);
        let h = ComplexVec::from_reals(&[1.0, -1.0]).unwrap();
        assert_eq!(select_beamformer(&h, &cb).unwrap().0, 1);
        let h3 = ComplexVec::from_reals(&[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(select_beamformer(&h3, &cb), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn select_matches_scan_oracle() {
        let cb = dft_codebook(2, 8).unwrap();
        let mut rng = RngStream::new(3, 3);
        for _ in 0..10_000 {
            let h = cgauss_vec(2, &mut rng).unwrap();
            let gains: Vec<f64> = cb.vectors().iter().map(|w| inner(&h, w).unwrap().norm_sqr()).collect();
            let max = gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let oracle = gains.iter().position(|&g| g == max).unwrap();
            assert_eq!(select_beamformer(&h, &cb).unwrap().0, oracle);
        }
    }

    #[test]
    fn select_picks_matching_codeword() {
        let mut rng = RngStream::new(8, 8);
        let h = cgauss_vec(3, &mut rng).unwrap();
        let mut vecs = dft_codebook(3, 5).unwrap().vectors().to_vec();
        vecs.insert(2, normalize(&h).unwrap());
        let cb = Codebook::new(vecs, Alphabet::Generic, "x").unwrap();
        assert_eq!(select_beamformer(&h, &cb).unwrap().0, 2);
    }

    #[test]
    fn min_distance_examples() {
        assert!((min_chordal_distance(&dft_codebook(2, 2).unwrap()) - 1.0).abs() < 1e-15);
        let mut v = dft_codebook(2, 3).unwrap().vectors().to_vec();
        v.push(v[1].clone());
        let dup = Codebook::new(v, Alphabet::Generic, "dup").unwrap();
        assert!(min_chordal_distance(&dup) < 1e-15);
        assert_eq!(min_chordal_distance(&dft_codebook(2, 1).unwrap()), 1.0);
    }

    #[test]
    fn storage_examples() {
        let eg = Codebook::new(
            dft_codebook(2, 4).unwrap().vectors().iter().chain(dft_codebook(2, 4).unwrap().vectors()).cloned().collect(),
            Alphabet::QPSK,
            "eg",
        )
        .unwrap();
        assert_eq!(eg.len(), 8);
        assert_eq!(storage_cost(&eg), 32);
        assert_eq!(storage_cost(&dft_codebook(2, 8).unwrap()), 2048);
        assert_eq!(eg.feedback_bits(), 3);
    }

    #[test]
    fn codebook_validation() {
        let bad = ComplexVec::from_reals(&[0.9, 0.0]).unwrap();
        assert!(Codebook::new(vec![bad], Alphabet::Generic, "x").is_err());
        let r = 0.5f64.sqrt();
        let off = ComplexVec::new(vec![c(r, 0.0), Complex::from_polar(r, 0.3)]).unwrap();
        assert!(Codebook::new(vec![off.clone()], Alphabet::QPSK, "x").is_err());
        assert!(Codebook::new(vec![off], Alphabet::Generic, "x").is_ok());
        assert!(Codebook::new(vec![], Alphabet::Generic, "x").is_err());
    }

    #[test]
    fn alphabet_tokens() {
        for a in [Alphabet::Generic, Alphabet::QPSK, Alphabet::EqualGain { phase_bits: 3 }] {
            assert_eq!(Alphabet::from_token(&a.token()), Some(a));
        }
        assert_eq!(Alphabet::from_token("psk6-eg"), None);
    }

    proptest! {
        #[test]
        fn selection_invariant_to_phase_and_scale(
            re in proptest::collection::vec(-3.0f64..3.0, 8),
            theta in -3.0f64..3.0,
            scale in 0.01f64..100.0,
        ) {
            let h = ComplexVec::new((0..4).map(|k| c(re[2 * k], re[2 * k + 1])).collect()).unwrap();
            prop_assume!(h.norm() > 1e-3);
            let cb = dft_codebook(4, 16).unwrap();
            let i0 = select_beamformer(&h, &cb).unwrap().0;
            let h2 = h.scale(Complex::from_polar(scale, theta));
            prop_assert_eq!(select_beamformer(&h2, &cb).unwrap().0, i0);
        }
    }
}
