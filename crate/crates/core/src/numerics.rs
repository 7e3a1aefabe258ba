//! Complex vectors, seeded random streams and the few special functions the
//! simulator needs.
//!
//! Every random draw in the crate goes through [`RngStream`]: a ChaCha8 keystream
//! addressed by `(seed, stream_id)`. Two streams with the same address produce
//! the same bits on every platform, and the per-trial address is derived from
//! the trial index, so results never depend on which worker ran a trial.

use std::f64::consts::PI;
use std::ops::Index;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Norms below this are treated as zero by [`normalize`].
pub const NORM_GUARD: f64 = 1e-150;

/// Fixed-length vector of complex baseband values (channels, beamformers).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec(Vec<Complex>);

impl ComplexVec {
    pub fn new(entries: Vec<Complex>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension("vector length must be >= 1".into()));
        }
        Ok(Self(entries))
    }

    pub fn from_reals(re: &[f64]) -> Result<Self> {
        Self::new(re.iter().map(|&r| Complex::new(r, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, a: Complex) -> ComplexVec {
        ComplexVec(self.0.iter().map(|z| z * a).collect())
    }

    pub fn into_inner(self) -> Vec<Complex> {
        self.0
    }
}

impl Index<usize> for ComplexVec {
    type Output = Complex;

    fn index(&self, i: usize) -> &Complex {
        &self.0[i]
    }
}

/// A reproducible random stream addressed by `(seed, stream_id)`.
///
/// The stream id selects an independent ChaCha keystream under the same key,
/// so streams with distinct ids never overlap.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    /// Stream for one `stage` of one trial under a master seed. Distinct
    /// stages get distinct keys; the trial index is the stream id.
    pub fn derive(master_seed: u64, stage: u64, trial_id: u64) -> Self {
        let key = splitmix64(master_seed ^ splitmix64(stage.wrapping_add(0x5851_f42d_4c95_7f2d)));
        Self::new(key, trial_id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1].
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        // Lemire multiply-shift; bias is below 2^-64 * n, irrelevant here.
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One CN(0, 1) draw: real and imaginary parts i.i.d. N(0, 1/2).
///
/// Box–Muller on exactly two uniforms, so every draw advances the stream by
/// the same amount.
pub fn cgauss(rng: &mut RngStream) -> Complex {
    let u1 = rng.uniform_open0();
    let u2 = rng.uniform();
    let r = (-u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    Complex::new(r * c, r * s)
}

pub fn cgauss_vec(n: usize, rng: &mut RngStream) -> Result<ComplexVec> {
    if n == 0 {
        return Err(Error::InvalidDimension("cgauss_vec needs n >= 1".into()));
    }
    ComplexVec::new((0..n).map(|_| cgauss(rng)).collect())
}

fn check_len(a: &ComplexVec, b: &ComplexVec) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidDimension(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Hermitian inner product `aᴴb`.
pub fn inner(a: &ComplexVec, b: &ComplexVec) -> Result<Complex> {
    check_len(a, b)?;
    Ok(inner_unchecked(a.as_slice(), b.as_slice()))
}

#[inline]
pub(crate) fn inner_unchecked(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn normalize(v: &ComplexVec) -> Result<ComplexVec> {
    let n = v.norm();
    if !(n >= NORM_GUARD) {
        return Err(Error::DegenerateInput(format!(
            "cannot normalize vector with norm {n:e}"
        )));
    }
    Ok(v.scale(Complex::new(1.0 / n, 0.0)))
}

/// Chordal distance `sqrt(1 - |w1ᴴw2|²)` between two unit vectors.
///
/// Evaluated as the norm of the residual of `w2` after projecting onto `w1`,
/// which equals the closed form for unit inputs but does not lose all
/// precision when the vectors nearly coincide.
pub fn chordal_distance(w1: &ComplexVec, w2: &ComplexVec) -> Result<f64> {
    let ip = inner(w1, w2)?;
    let resid: f64 = w1
        .iter()
        .zip(w2.iter())
        .map(|(a, b)| (b - ip * a).norm_sqr())
        .sum();
    Ok(resid.sqrt().min(1.0))
}

/// Bessel function of the first kind, order zero.
///
/// Power series below |x| = 12, Hankel asymptotic expansion (truncated at its
/// smallest term) above. Absolute error stays under 1e-12 up to |x| = 50.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 12.0 {
        j0_series(x)
    } else {
        j0_asymptotic(x)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..100 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && kf > q.sqrt() {
            break;
        }
    }
    sum
}

fn j0_asymptotic(x: f64) -> f64 {
    // a_k = prod_{i=1..k} -(2i-1)^2 / (8 i x); even k feed P, odd k feed Q.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0f64;
    for k in 1..60 {
        let next = a * -((2 * k - 1) as f64).powi(2) / (8.0 * k as f64 * x);
        if next.abs() >= a.abs() {
            break;
        }
        a = next;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
