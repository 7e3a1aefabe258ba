//! Curve files: `#` metadata lines, a CSV header, one row per point.

use std::path::Path;

use crate::error::{Error, Result};

use super::{Curve, CurvePoint, PointFlags};

pub const CURVE_HEADER: &str = "esn0_db,aevms,aevms_db,ber,ber_ci95,trials,symbols,bits,bit_errors,flags";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(p: &CurvePoint) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        real(p.esn0_db),
        real(p.aevms),
        real(p.aevms_db),
        real(p.ber),
        real(p.ber_ci95),
        p.trials,
        p.symbols,
        p.bits,
        p.bit_errors,
        p.flags.render()
    )
}

pub fn render_curve(curve: &Curve) -> String {
    let mut out = format!(
        "# scheme={}\n# seed={}\n# digest={}\n{CURVE_HEADER}\n",
        curve.label, curve.seed, curve.digest
    );
    for p in &curve.points {
        out += &row(p);
        out.push('\n');
    }
    out
}

/// Several curves in one long-format table, each row prefixed by the curve
/// label.
pub fn render_multi(curves: &[Curve]) -> String {
    let mut out = String::new();
    for c in curves {
        out += &format!("# curve={} seed={} digest={}\n", c.label, c.seed, c.digest);
    }
    out += &format!("scheme,{CURVE_HEADER}\n");
    for c in curves {
        for p in &c.points {
            out += &format!("{},{}\n", c.label, row(p));
        }
    }
    out
}

pub fn export_csv(curve: &Curve, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_curve(curve)).map_err(|e| Error::io(path, e))
}

pub fn export_multi(curves: &[Curve], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_multi(curves)).map_err(|e| Error::io(path, e))
}

fn parse_row(fields: &[&str], line: usize, origin: &str) -> Result<CurvePoint> {
    let err = |msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    if fields.len() != 10 {
        return Err(err(format!("expected 10 fields, found {}", fields.len())));
    }
    let f = |i: usize| -> Result<f64> { fields[i].parse().map_err(|_| err(format!("bad real '{}'", fields[i]))) };
    let u = |i: usize| -> Result<u64> { fields[i].parse().map_err(|_| err(format!("bad count '{}'", fields[i]))) };
    Ok(CurvePoint {
        esn0_db: f(0)?,
        aevms: f(1)?,
        aevms_db: f(2)?,
        ber: f(3)?,
        ber_ci95: f(4)?,
        trials: u(5)?,
        symbols: u(6)?,
        bits: u(7)?,
        bit_errors: u(8)?,
        flags: PointFlags::parse(fields[9]).ok_or_else(|| err(format!("bad flags '{}'", fields[9])))?,
    })
}

/// Parses a single-curve file written by [`export_csv`].
pub fn parse_curve(text: &str, origin: &str) -> Result<Curve> {
    let mut curve = Curve {
        label: String::new(),
        digest: String::new(),
        seed: 0,
        points: Vec::new(),
    };
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let lno = i + 1;
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                match k {
                    "scheme" => curve.label = v.to_string(),
                    "digest" => curve.digest = v.to_string(),
                    "seed" => {
                        curve.seed = v.parse().map_err(|_| Error::Parse {
                            path: origin.into(),
                            line: lno,
                            msg: format!("bad seed '{v}'"),
                        })?
                    }
                    _ => {}
                }
            }
            continue;
        }
        if !seen_header {
            if line != CURVE_HEADER {
                return Err(Error::Parse {
                    path: origin.into(),
                    line: lno,
                    msg: "missing column header".into(),
                });
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        curve.points.push(parse_row(&fields, lno, origin)?);
    }
    if !seen_header {
        return Err(Error::Parse {
            path: origin.into(),
            line: text.lines().count().max(1),
            msg: "missing column header".into(),
        });
    }
    Ok(curve)
}
