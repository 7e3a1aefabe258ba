//! Search-based codebook constructors.

use crate::error::{Error, Result};
use crate::numerics::{cgauss_vec, inner_unchecked, normalize, Complex, ComplexVec, RngStream};

use super::{canonical_phase, unit_phase, Alphabet, Codebook};

/// Largest phase alphabet `egb_search` will escalate to.
const MAX_PHASE_BITS: u32 = 8;
/// Candidate pool per restart in the randomized search.
const POOL: usize = 4096;

/// Equal-gain codebook maximizing the minimum pairwise chordal distance.
///
/// Candidates have first entry `+1/sqrt(nt)` (the global phase quotient) and
/// QPSK phases elsewhere. When `n` exceeds the `4^(nt-1)` QPSK candidates the
/// phase alphabet is doubled until enough distinct lines exist. Small problems
/// (`nt <= 3`, `n <= 16`) are solved exactly by enumerating subsets; larger
/// ones run `iters` randomized greedy restarts and keep the best.
pub fn egb_search(nt: usize, n: usize, iters: usize, rng: &mut RngStream) -> Result<Codebook> {
    if nt == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!("egb_search needs nt, n >= 1 (got {nt}, {n})")));
    }
    let phase_bits = (2..=MAX_PHASE_BITS)
        .find(|&b| candidate_count(nt, b).is_some_and(|c| c >= n as u128))
        .ok_or_else(|| {
            Error::InfeasibleSize(format!(
                "only {} distinct equal-gain lines exist for nt={nt}, requested {n}",
                candidate_count(nt, MAX_PHASE_BITS).map_or("many".into(), |c| c.to_string())
            ))
        })?;
    let count = candidate_count(nt, phase_bits).unwrap_or(u128::MAX);

    let chosen: Vec<u128> = if n == 1 {
        vec![0]
    } else if nt <= 3 && n <= 16 {
        let cands: Vec<ComplexVec> = (0..count).map(|c| candidate(nt, phase_bits, c)).collect();
        exhaustive_max_min(&cands, n).into_iter().map(|i| i as u128).collect()
    } else {
        random_max_min(nt, phase_bits, count, n, iters.max(1), rng)
    };

    let vectors = chosen.into_iter().map(|c| candidate(nt, phase_bits, c)).collect();
    Codebook::new(
        vectors,
        Alphabet::EqualGain { phase_bits },
        format!("egb{n}"),
    )
}

fn candidate_count(nt: usize, phase_bits: u32) -> Option<u128> {
    (1u128 << phase_bits).checked_pow((nt - 1) as u32)
}

/// Candidate `index`: entry k >= 1 has phase digit `(index / M^(k-1)) mod M`.
fn candidate(nt: usize, phase_bits: u32, index: u128) -> ComplexVec {
    let m = 1u128 << phase_bits;
    let scale = 1.0 / (nt as f64).sqrt();
    let mut rest = index;
    let mut entries = Vec::with_capacity(nt);
    entries.push(Complex::new(scale, 0.0));
    for _ in 1..nt {
        entries.push(unit_phase((rest % m) as u64, m as u64) * scale);
        rest /= m;
    }
    ComplexVec::new(entries).expect("nt >= 1")
}

fn chordal_sq(a: &ComplexVec, b: &ComplexVec) -> f64 {
    (1.0 - inner_unchecked(a.as_slice(), b.as_slice()).norm_sqr()).max(0.0)
}

/// Lexicographically first `n`-subset with the largest minimum distance.
fn exhaustive_max_min(cands: &[ComplexVec], n: usize) -> Vec<usize> {
    let m = cands.len();
    let dist: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| chordal_sq(&cands[i], &cands[j])).collect())
        .collect();

    struct Search<'a> {
        dist: &'a [Vec<f64>],
        n: usize,
        best: f64,
        best_set: Vec<usize>,
        cur: Vec<usize>,
    }

    impl Search<'_> {
        fn go(&mut self, start: usize, cur_min: f64) {
            if self.cur.len() == self.n {
                if cur_min > self.best + 1e-12 {
                    self.best = cur_min;
                    self.best_set = self.cur.clone();
                }
                return;
            }
            let m = self.dist.len();
            let need = self.n - self.cur.len();
            for c in start..=m - need {
                let d = self
                    .cur
                    .iter()
                    .map(|&p| self.dist[p][c])
                    .fold(cur_min, f64::min);
                // cannot beat the incumbent down this branch
                if d <= self.best + 1e-12 {
                    continue;
                }
                self.cur.push(c);
                self.go(c + 1, d);
                self.cur.pop();
            }
        }
    }

    let mut s = Search {
        dist: &dist,
        n,
        best: -1.0,
        best_set: (0..n).collect(),
        cur: Vec::with_capacity(n),
    };
    s.go(0, f64::INFINITY);
    s.best_set
}

fn random_max_min(
    nt: usize,
    phase_bits: u32,
    count: u128,
    n: usize,
    iters: usize,
    rng: &mut RngStream,
) -> Vec<u128> {
    let mut best = -1.0f64;
    let mut best_set = Vec::new();
    for _ in 0..iters {
        let pool: Vec<u128> = if count <= POOL as u128 {
            (0..count).collect()
        } else {
            (0..POOL.max(n))
                .map(|_| {
                    let hi = rng.next_u64() as u128;
                    let lo = rng.next_u64() as u128;
                    ((hi << 64) | lo) % count
                })
                .collect()
        };
        let vecs: Vec<ComplexVec> = pool.iter().map(|&c| candidate(nt, phase_bits, c)).collect();
        // greedy farthest-point insertion from a random start
        let start = rng.below(pool.len() as u64) as usize;
        let mut chosen = vec![start];
        let mut min_to_set: Vec<f64> = vecs.iter().map(|v| chordal_sq(v, &vecs[start])).collect();
        let mut set_min = f64::INFINITY;
        while chosen.len() < n {
            let (next, d) = min_to_set
                .iter()
                .enumerate()
                .filter(|(i, _)| !chosen.contains(i))
                .fold((usize::MAX, -1.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
            if next == usize::MAX {
                break;
            }
            set_min = set_min.min(d);
            chosen.push(next);
            for (i, v) in vecs.iter().enumerate() {
                min_to_set[i] = min_to_set[i].min(chordal_sq(v, &vecs[next]));
            }
        }
        if chosen.len() == n && set_min > best + 1e-12 {
            best = set_min;
            best_set = chosen.iter().map(|&i| pool[i]).collect();
        }
    }
    best_set
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LloydOptions {
    /// Training vectors; `0` means `100 * n`.
    pub samples: usize,
    pub iters: usize,
}

impl Default for LloydOptions {
    fn default() -> Self {
        Self {
            samples: 0,
            iters: 50,
        }
    }
}

/// Lloyd design on the Grassmannian; see [`lloyd_grassmannian_trace`].
pub fn lloyd_grassmannian(
    nt: usize,
    n: usize,
    samples: usize,
    iters: usize,
    rng: &mut RngStream,
) -> Result<Codebook> {
    lloyd_grassmannian_trace(nt, n, samples, iters, rng).map(|(cb, _)| cb)
}

/// Lloyd design on the Grassmannian of lines, returning the codebook and the
/// distortion `mean(1 - |sᴴw|²)` before the first and after every iteration.
///
/// Training vectors are normalized `CN(0, I)` draws. Each iteration assigns
/// samples to the nearest codeword, moves empty cells onto the worst-served
/// samples and recenters the rest at the principal eigenvector of their
/// cell's correlation matrix (power iteration warm-started from the old
/// codeword, which keeps the distortion non-increasing).
pub fn lloyd_grassmannian_trace(
    nt: usize,
    n: usize,
    samples: usize,
    iters: usize,
    rng: &mut RngStream,
) -> Result<(Codebook, Vec<f64>)> {
    if nt == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!("lloyd needs nt, n >= 1 (got {nt}, {n})")));
    }
    if samples < 10 * n {
        return Err(Error::InvalidParameter(format!(
            "lloyd needs at least 10 samples per codeword ({samples} < {})",
            10 * n
        )));
    }
    if iters == 0 {
        return Err(Error::InvalidParameter("lloyd needs iters >= 1".into()));
    }
    let data = (0..samples)
        .map(|_| loop {
            // a zero draw has probability zero; retrying keeps the guard honest
            if let Ok(v) = normalize(&cgauss_vec(nt, rng)?) {
                break Ok(v);
            }
        })
        .collect::<Result<Vec<ComplexVec>>>()?;

    let mut code: Vec<ComplexVec> = data[..n].to_vec();
    let mut trace = Vec::with_capacity(iters + 1);
    let mut assign = vec![0usize; samples];
    let mut fit = vec![0.0f64; samples];

    for _ in 0..iters {
        trace.push(assign_cells(&data, &code, &mut assign, &mut fit));

        let mut members = vec![0usize; n];
        for &a in &assign {
            members[a] += 1;
        }
        let mut taken = vec![false; samples];
        for j in 0..n {
            if members[j] > 0 {
                code[j] = principal_eigvec(&data, &assign, j, &code[j]);
            } else {
                // farthest sample, lowest index on ties
                let far = (0..samples)
                    .filter(|&i| !taken[i])
                    .fold(None::<(usize, f64)>, |acc, i| match acc {
                        Some((_, d)) if 1.0 - fit[i] <= d => acc,
                        _ => Some((i, 1.0 - fit[i])),
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                taken[far] = true;
                code[j] = data[far].clone();
            }
        }
    }
    trace.push(assign_cells(&data, &code, &mut assign, &mut fit));

    let vectors = code.iter().map(canonical_phase).collect();
    let cb = Codebook::new(vectors, Alphabet::Generic, format!("lloyd{n}"))?;
    Ok((cb, trace))
}

fn assign_cells(data: &[ComplexVec], code: &[ComplexVec], assign: &mut [usize], fit: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for (i, s) in data.iter().enumerate() {
        let mut best = 0;
        let mut best_g = -1.0;
        for (j, w) in code.iter().enumerate() {
            let g = inner_unchecked(s.as_slice(), w.as_slice()).norm_sqr();
            if g > best_g {
                best = j;
                best_g = g;
            }
        }
        assign[i] = best;
        fit[i] = best_g;
        total += 1.0 - best_g;
    }
    total / data.len() as f64
}

fn principal_eigvec(data: &[ComplexVec], assign: &[usize], cell: usize, start: &ComplexVec) -> ComplexVec {
    let nt = start.len();
    let mut r = vec![Complex::new(0.0, 0.0); nt * nt];
    for (s, _) in data.iter().zip(assign).filter(|(_, &a)| a == cell) {
        for a in 0..nt {
            for b in 0..nt {
                r[a * nt + b] += s[a] * s[b].conj();
            }
        }
    }
    let mut v = start.as_slice().to_vec();
    for _ in 0..2000 {
        let mut next: Vec<Complex> = (0..nt)
            .map(|a| (0..nt).map(|b| r[a * nt + b] * v[b]).sum())
            .collect();
        let norm = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        next.iter_mut().for_each(|z| *z /= norm);
        // compare up to phase: the iterate's phase can drift
        let overlap = inner_unchecked(&v, &next);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex::new(1.0, 0.0) };
        let delta: f64 = v.iter().zip(&next).map(|(a, b)| (a * phase - b).norm_sqr()).sum();
        v = next;
        if delta < 1e-28 {
            break;
        }
    }
    ComplexVec::new(v).expect("nt >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{min_chordal_distance, select_beamformer};
    use crate::numerics::{chordal_distance, inner};

    #[test]
    fn egb_nt2_n4_is_equidistant() {
        let cb = egb_search(2, 4, 10, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(cb.alphabet(), Alphabet::QPSK);
        // oracle: the four candidates [1, i^k]/sqrt2, all pairwise distances
        let r = 0.5f64.sqrt();
        let cands: Vec<ComplexVec> = (0..4)
            .map(|k| ComplexVec::new(vec![Complex::new(r, 0.0), unit_phase(k, 4) * r]).unwrap())
            .collect();
        let mut oracle = 1.0f64;
        for i in 0..4 {
            for j in i + 1..4 {
                oracle = oracle.min(chordal_distance(&cands[i], &cands[j]).unwrap());
            }
        }
        assert!((oracle - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((min_chordal_distance(&cb) - oracle).abs() < 1e-9);
    }

    #[test]
    fn egb_small_cases() {
        let one = egb_search(2, 1, 1, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(min_chordal_distance(&one), 1.0);
        let two = egb_search(2, 2, 1, &mut RngStream::new(0, 0)).unwrap();
        assert!((min_chordal_distance(&two) - 1.0).abs() < 1e-12);
        assert!(matches!(
            egb_search(1, 2, 1, &mut RngStream::new(0, 0)),
            Err(Error::InfeasibleSize(_))
        ));
    }

    #[test]
    fn egb_escalates_alphabet_past_qpsk_capacity() {
        let cb = egb_search(2, 8, 1, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(cb.alphabet(), Alphabet::EqualGain { phase_bits: 3 });
        // eight equally spaced phases on the second antenna
        assert!((min_chordal_distance(&cb) - (PI_8).sin()).abs() < 1e-12);
        let cb16 = egb_search(2, 16, 1, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(cb16.alphabet(), Alphabet::EqualGain { phase_bits: 4 });
    }

    const PI_8: f64 = std::f64::consts::PI / 8.0;

    #[test]
    fn egb_exhaustive_nt3_beats_any_subset_sample() {
        let cb = egb_search(3, 6, 1, &mut RngStream::new(0, 0)).unwrap();
        let best = min_chordal_distance(&cb);
        let cands: Vec<ComplexVec> = (0..16).map(|c| candidate(3, 2, c)).collect();
        let mut rng = RngStream::new(4, 4);
        for _ in 0..2000 {
            let mut idx: Vec<usize> = Vec::new();
            while idx.len() < 6 {
                let c = rng.below(16) as usize;
                if !idx.contains(&c) {
                    idx.push(c);
                }
            }
            let sub = Codebook::new(idx.iter().map(|&i| cands[i].clone()).collect(), Alphabet::QPSK, "s").unwrap();
            assert!(min_chordal_distance(&sub) <= best + 1e-12);
        }
    }

    #[test]
    fn egb_random_search_is_deterministic() {
        let a = egb_search(4, 8, 20, &mut RngStream::new(9, 1)).unwrap();
        let b = egb_search(4, 8, 20, &mut RngStream::new(9, 1)).unwrap();
        assert_eq!(a, b);
        assert!(min_chordal_distance(&a) > 0.0);
        assert_eq!(a.alphabet(), Alphabet::QPSK);
    }

    #[test]
    fn lloyd_rejects_bad_arguments() {
        assert!(lloyd_grassmannian(2, 4, 39, 5, &mut RngStream::new(0, 0)).is_err());
        assert!(lloyd_grassmannian(2, 4, 400, 0, &mut RngStream::new(0, 0)).is_err());
    }

    /// Principal eigenvector of a 2x2 Hermitian matrix [[a, b], [b*, d]] in
    /// closed form.
    fn eig2(a: f64, b: Complex, d: f64) -> (f64, ComplexVec) {
        let lam = 0.5 * (a + d) + (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
        let v = if b.norm() > 0.0 {
            ComplexVec::new(vec![b, Complex::new(lam - a, 0.0)]).unwrap()
        } else if a >= d {
            ComplexVec::from_reals(&[1.0, 0.0]).unwrap()
        } else {
            ComplexVec::from_reals(&[0.0, 1.0]).unwrap()
        };
        (lam, normalize(&v).unwrap())
    }

    #[test]
    fn lloyd_single_codeword_is_principal_eigvec() {
        let samples = 2000;
        let (cb, trace) = lloyd_grassmannian_trace(2, 1, samples, 3, &mut RngStream::new(12, 0)).unwrap();
        // regenerate the identical training set
        let mut rng = RngStream::new(12, 0);
        let data: Vec<ComplexVec> = (0..samples)
            .map(|_| normalize(&cgauss_vec(2, &mut rng).unwrap()).unwrap())
            .collect();
        let (mut a, mut b, mut d) = (0.0, Complex::new(0.0, 0.0), 0.0);
        for s in &data {
            a += s[0].norm_sqr();
            b += s[0] * s[1].conj();
            d += s[1].norm_sqr();
        }
        let (lam, v) = eig2(a, b, d);
        assert!(chordal_distance(&v, &cb.vectors()[0]).unwrap() < 1e-6);
        let final_d = *trace.last().unwrap();
        assert!((final_d - (1.0 - lam / samples as f64)).abs() < 1e-9);
        // i.i.d. directions: distortion close to 1 - 1/nt
        assert!((final_d - 0.5).abs() < 0.05);
    }

    #[test]
    fn lloyd_distortion_non_increasing() {
        for (nt, n) in [(2, 8), (3, 16), (4, 8)] {
            let (_, trace) = lloyd_grassmannian_trace(nt, n, 100 * n, 30, &mut RngStream::new(5, n as u64)).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "nt={nt} n={n}: {trace:?}");
            }
        }
    }

    #[test]
    fn lloyd_is_deterministic() {
        let a = lloyd_grassmannian(3, 4, 400, 10, &mut RngStream::new(3, 0)).unwrap();
        let b = lloyd_grassmannian(3, 4, 400, 10, &mut RngStream::new(3, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lloyd_64_close_to_mrt() {
        let cb = lloyd_grassmannian(2, 64, 6400, 50, &mut RngStream::new(21, 0)).unwrap();
        let mut rng = RngStream::new(99, 0);
        let (mut bf, mut mrt) = (0.0, 0.0);
        for _ in 0..50_000 {
            let h = cgauss_vec(2, &mut rng).unwrap();
            let (_, w) = select_beamformer(&h, &cb).unwrap();
            bf += inner(&h, w).unwrap().norm_sqr();
            mrt += h.norm_sqr();
        }
        let loss_db = 10.0 * (mrt / bf).log10();
        assert!(loss_db < 0.25, "{loss_db}");
    }
}
