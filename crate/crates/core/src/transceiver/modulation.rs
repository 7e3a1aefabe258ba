//! Gray-labeled square constellations with unit average energy.
//!
//! Bits map MSB-first: the first half of each symbol's bits select the
//! in-phase level, the second half the quadrature level. On each axis the
//! first bit is the sign (0 = positive) and the remaining bits Gray-code the
//! magnitude, innermost level first.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModScheme {
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
}

impl ModScheme {
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            ModScheme::Bpsk => 1,
            ModScheme::Qpsk => 2,
            ModScheme::Qam16 => 4,
            ModScheme::Qam64 => 6,
        }
    }

    /// Bits per axis; BPSK uses the in-phase axis only.
    fn axis_bits(&self) -> usize {
        match self {
            ModScheme::Bpsk => 1,
            m => m.bits_per_symbol() / 2,
        }
    }

    /// Spacing scale so the mean symbol energy is 1.
    fn scale(&self) -> f64 {
        match self {
            ModScheme::Bpsk => 1.0,
            ModScheme::Qpsk => 1.0 / 2f64.sqrt(),
            ModScheme::Qam16 => 1.0 / 10f64.sqrt(),
            ModScheme::Qam64 => 1.0 / 42f64.sqrt(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModScheme::Bpsk => "bpsk",
            ModScheme::Qpsk => "qpsk",
            ModScheme::Qam16 => "qam16",
            ModScheme::Qam64 => "qam64",
        }
    }

    /// Every constellation point, in label order.
    pub fn constellation(&self) -> Vec<Complex> {
        let b = self.bits_per_symbol();
        (0..1u32 << b)
            .map(|label| {
                let bits: Vec<u8> = (0..b).rev().map(|i| ((label >> i) & 1) as u8).collect();
                map_symbol(&bits, *self)
            })
            .collect()
    }
}

impl fmt::Display for ModScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bpsk" => Ok(ModScheme::Bpsk),
            "qpsk" => Ok(ModScheme::Qpsk),
            "qam16" => Ok(ModScheme::Qam16),
            "qam64" => Ok(ModScheme::Qam64),
            _ => Err(Error::InvalidParameter(format!("unknown modulation '{s}'"))),
        }
    }
}

/// Gray-coded axis bits -> odd integer level in {±1, ±3, ...}.
fn axis_level(bits: &[u8]) -> f64 {
    let sign = if bits[0] == 0 { 1.0 } else { -1.0 };
    // Gray -> binary on the magnitude bits
    let mut idx = 0u32;
    let mut acc = 0u8;
    for &g in &bits[1..] {
        acc ^= g;
        idx = (idx << 1) | acc as u32;
    }
    sign * (2 * idx + 1) as f64
}

/// Nearest odd level on an axis -> Gray-coded bits.
fn axis_bits(x: f64, nbits: usize, out: &mut Vec<u8>) {
    let max_idx = (1u32 << (nbits - 1)) - 1;
    out.push(if x >= 0.0 { 0 } else { 1 });
    let idx = ((x.abs() - 1.0) / 2.0).round().clamp(0.0, max_idx as f64) as u32;
    let gray = idx ^ (idx >> 1);
    for i in (0..nbits - 1).rev() {
        out.push(((gray >> i) & 1) as u8);
    }
}

fn map_symbol(bits: &[u8], m: ModScheme) -> Complex {
    let k = m.axis_bits();
    let s = m.scale();
    match m {
        ModScheme::Bpsk => Complex::new(axis_level(bits), 0.0),
        _ => Complex::new(axis_level(&bits[..k]) * s, axis_level(&bits[k..]) * s),
    }
}

/// Maps bits (0/1 values) to symbols.
pub fn modulate(bits: &[u8], m: ModScheme) -> Result<Vec<Complex>> {
    let b = m.bits_per_symbol();
    if !bits.len().is_multiple_of(b) {
        return Err(Error::InvalidLength(format!(
            "{} bits is not a multiple of {b} for {m}",
            bits.len()
        )));
    }
    Ok(bits.chunks(b).map(|c| map_symbol(c, m)).collect())
}

/// Minimum-distance hard decisions, appended to `out`.
pub fn demodulate_into(symbols: &[Complex], m: ModScheme, out: &mut Vec<u8>) {
    let k = m.axis_bits();
    let inv = 1.0 / m.scale();
    for z in symbols {
        axis_bits(z.re * inv, k, out);
        if m != ModScheme::Bpsk {
            axis_bits(z.im * inv, k, out);
        }
    }
}

pub fn demodulate_hard(symbols: &[Complex], m: ModScheme) -> Vec<u8> {
    let mut out = Vec::with_capacity(symbols.len() * m.bits_per_symbol());
    demodulate_into(symbols, m, &mut out);
    out
}
