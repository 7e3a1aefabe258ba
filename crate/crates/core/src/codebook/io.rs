//! Plain-text codebook files.
//!
//! ```text
//! miso-codebook v1 nt=2 size=4 alphabet=qpsk-eg label=egb4
//! 7.0710678118654757e-1:0.0000000000000000e0 7.0710678118654757e-1:0.0000000000000000e0
//! ...
//! ```
//!
//! One codeword per line, `nt` fields `<re>:<im>` separated by single spaces.
//! Lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{normalize, Complex, ComplexVec};

use super::{Alphabet, Codebook};

const MAGIC: &str = "miso-codebook";
const VERSION: &str = "v1";

/// Accepted deviation of a stored codeword's norm from 1.
const LOAD_NORM_TOL: f64 = 1e-6;

pub fn render_codebook(cb: &Codebook) -> String {
    let mut out = format!(
        "{MAGIC} {VERSION} nt={} size={} alphabet={} label={}\n",
        cb.nt(),
        cb.len(),
        cb.alphabet().token(),
        cb.label()
    );
    for v in cb.vectors() {
        let fields: Vec<String> = v.iter().map(|z| format!("{:.16e}:{:.16e}", z.re, z.im)).collect();
        let _ = writeln!(out, "{}", fields.join(" "));
    }
    out
}

pub fn save_codebook(cb: &Codebook, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_codebook(cb)).map_err(|e| Error::io(path, e))
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_codebook(&text, &path.display().to_string())
}

/// Parses codebook text; `origin` names the source in error messages.
pub fn parse_codebook(text: &str, origin: &str) -> Result<Codebook> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty());

    let (hline, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some(MAGIC) {
        return Err(err(hline, format!("expected '{MAGIC}' header")));
    }
    if tok.next() != Some(VERSION) {
        return Err(err(hline, format!("unsupported version, expected {VERSION}")));
    }
    let (mut nt, mut size, mut alphabet, mut label) = (None, None, None, None);
    for kv in tok {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| err(hline, format!("malformed header field '{kv}'")))?;
        match k {
            "nt" => nt = v.parse::<usize>().ok().filter(|&n| n >= 1),
            "size" => size = v.parse::<usize>().ok().filter(|&n| n >= 1),
            "alphabet" => {
                alphabet = Some(Alphabet::from_token(v).ok_or_else(|| err(hline, format!("unknown alphabet '{v}'")))?)
            }
            "label" => label = Some(v.to_string()),
            _ => return Err(err(hline, format!("unknown header field '{k}'"))),
        }
    }
    let nt = nt.ok_or_else(|| err(hline, "missing or invalid nt".into()))?;
    let size = size.ok_or_else(|| err(hline, "missing or invalid size".into()))?;
    let alphabet = alphabet.ok_or_else(|| err(hline, "missing alphabet".into()))?;
    let label = label.ok_or_else(|| err(hline, "missing label".into()))?;

    let mut vectors = Vec::with_capacity(size);
    let mut last_line = hline;
    for (lno, line) in lines {
        last_line = lno;
        if vectors.len() == size {
            return Err(err(lno, format!("more than {size} codewords")));
        }
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != nt {
            return Err(err(lno, format!("expected {nt} entries, found {}", fields.len())));
        }
        let entries = fields
            .iter()
            .map(|f| {
                let (re, im) = f
                    .split_once(':')
                    .ok_or_else(|| err(lno, format!("entry '{f}' is not <re>:<im>")))?;
                let re: f64 = re.parse().map_err(|_| err(lno, format!("bad real part '{re}'")))?;
                let im: f64 = im.parse().map_err(|_| err(lno, format!("bad imaginary part '{im}'")))?;
                if !re.is_finite() || !im.is_finite() {
                    return Err(err(lno, "non-finite entry".into()));
                }
                Ok(Complex::new(re, im))
            })
            .collect::<Result<Vec<_>>>()?;
        let v = ComplexVec::new(entries).map_err(|e| err(lno, e.to_string()))?;
        let norm = v.norm();
        if (norm - 1.0).abs() > LOAD_NORM_TOL {
            return Err(err(lno, format!("codeword norm {norm} is not 1")));
        }
        // already unit within rounding: keep bits so round trips are exact
        let v = if (norm - 1.0).abs() <= super::UNIT_TOL {
            v
        } else {
            normalize(&v).map_err(|e| err(lno, e.to_string()))?
        };
        vectors.push(v);
    }
    if vectors.len() != size {
        return Err(err(last_line, format!("expected {size} codewords, found {}", vectors.len())));
    }
    Codebook::new(vectors, alphabet, label).map_err(|e| err(hline, e.to_string()))
}
