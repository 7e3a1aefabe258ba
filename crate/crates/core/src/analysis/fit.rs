use crate::error::{Error, Result};

use super::Curve;

pub const FLOOR_SLOPE_THRESHOLD: f64 = 0.15;
pub const FLOOR_TAIL_POINTS: usize = 3;

/// Horizontal axis for diversity fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// 1/AEVMS (dB value is `-aevms_db`).
    InvAevms,
    EsN0,
}

/// Diversity order `d = -slope` of a least-squares fit of `log10(ber)`
/// against `log10(axis)`, over points whose axis value in dB lies in
/// `window_db`. Points with zero BER (or zero AEVMS on the 1/AEVMS axis) are
/// skipped.
pub fn fit_diversity(curve: &Curve, axis: Axis, window_db: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window_db;
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.ber > 0.0)
        .map(|p| {
            let x_db = match axis {
                Axis::EsN0 => p.esn0_db,
                Axis::InvAevms => -p.aevms_db,
            };
            (x_db, p.ber)
        })
        .filter(|(x, _)| x.is_finite() && *x >= lo && *x <= hi)
        .map(|(x, b)| (x / 10.0, b.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "diversity fit over [{lo}, {hi}] dB on '{}' has {} usable points",
            curve.label,
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all fit points share one abscissa".into()));
    }
    Ok(-(sxy / sxx))
}

/// Es/N0 (dB) where the curve first crosses `target_ber`, interpolating
/// `esn0_db` linearly in `log10(ber)`.
pub fn esn0_at_ber(curve: &Curve, target_ber: f64) -> Result<f64> {
    let no_cross = || Error::NoCrossing {
        curve: curve.label.clone(),
        target: target_ber,
    };
    if !(target_ber > 0.0) {
        return Err(no_cross());
    }
    let pts: Vec<_> = curve.points.iter().filter(|p| p.ber > 0.0).collect();
    let t = target_ber.log10();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (la, lb) = (a.ber.log10(), b.ber.log10());
        if (la - t) * (lb - t) <= 0.0 {
            if la == lb {
                return Ok(a.esn0_db);
            }
            return Ok(a.esn0_db + (t - la) * (b.esn0_db - a.esn0_db) / (lb - la));
        }
    }
    Err(no_cross())
}

/// `esn0(a) - esn0(b)` at `target_ber`; positive means `b` needs less
/// Es/N0.
pub fn coding_gain(curve_a: &Curve, curve_b: &Curve, target_ber: f64) -> Result<f64> {
    Ok(esn0_at_ber(curve_a, target_ber)? - esn0_at_ber(curve_b, target_ber)?)
}

/// Slopes d(aevms_db)/d(esn0_db) over the last `intervals` intervals.
pub fn tail_slopes(curve: &Curve, intervals: usize) -> Result<Vec<f64>> {
    let p = &curve.points;
    if intervals == 0 || p.len() < intervals + 1 {
        return Err(Error::InsufficientData(format!(
            "need {} points for {intervals} tail intervals, curve '{}' has {}",
            intervals + 1,
            curve.label,
            p.len()
        )));
    }
    Ok(p[p.len() - intervals - 1..]
        .windows(2)
        .map(|w| (w[1].aevms_db - w[0].aevms_db) / (w[1].esn0_db - w[0].esn0_db))
        .collect())
}

/// Error-floor test on the AEVMS curve. When every slope over the last
/// `tail_points` intervals is flatter than `-threshold` dB/dB, returns the
/// final AEVMS as the floor estimate.
pub fn detect_floor(curve: &Curve, threshold_db_per_db: f64, tail_points: usize) -> Result<Option<f64>> {
    let slopes = tail_slopes(curve, tail_points)?;
    // NaN slopes (0 -> 0 AEVMS) count as flat; -inf (drop to 0) as falling
    let flat = slopes.iter().all(|&s| s.is_nan() || s > -threshold_db_per_db);
    Ok(if flat {
        curve.points.last().map(|p| p.aevms)
    } else {
        None
    })
}
