//! Command-line front end: flags and `key = value` config files resolve to a
//! [`RunSpec`], and [`run`] sweeps every requested scheme into `--out`.
//!
//! Config keys are the long flag names without dashes. Flags override file
//! values; `--scheme` on the command line replaces every `scheme` line of the
//! file. A direct `rho` takes precedence over `fd-hz`/`delay-s`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use clap::Parser;

use crate::analysis::{export_csv, sweep, SweepConfig};
use crate::channel::{jakes_rho, DelayModel, Estimator, TrainingModel};
use crate::codebook::{dft_codebook, egb_search, load_codebook, lloyd_grassmannian, save_codebook, Codebook};
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::transceiver::{Equalization, Fading, LinkConfig, ModScheme, Scheme};

/// Stream id for codebook design draws, kept apart from the trial stages.
const DESIGN_STREAM: u64 = 0xc0de;
const EGB_RESTARTS: usize = 200;
const LLOYD_ITERS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum CodebookSource {
    Dft(usize),
    Egb(usize),
    Lloyd(usize),
    File(PathBuf),
}

impl CodebookSource {
    /// Builds (or loads) the codebook. Designed codebooks draw from a
    /// dedicated stream of `seed`.
    pub fn build(&self, nt: usize, seed: u64) -> Result<Codebook> {
        let mut rng = RngStream::new(seed, DESIGN_STREAM);
        match self {
            CodebookSource::Dft(n) => dft_codebook(nt, *n),
            CodebookSource::Egb(n) => egb_search(nt, *n, EGB_RESTARTS, &mut rng),
            CodebookSource::Lloyd(n) => lloyd_grassmannian(nt, *n, 100 * n, LLOYD_ITERS, &mut rng),
            CodebookSource::File(p) => load_codebook(p),
        }
    }
}

impl std::fmt::Display for CodebookSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CodebookSource::Dft(n) => write!(f, "dft:{n}"),
            CodebookSource::Egb(n) => write!(f, "egb:{n}"),
            CodebookSource::Lloyd(n) => write!(f, "lloyd:{n}"),
            CodebookSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for CodebookSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("bad codebook '{s}' (want dft:N, egb:N, lloyd:N or file:PATH)"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        if kind == "file" {
            if arg.is_empty() {
                return Err(bad());
            }
            return Ok(CodebookSource::File(PathBuf::from(arg)));
        }
        let n: usize = arg.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        match kind {
            "dft" => Ok(CodebookSource::Dft(n)),
            "egb" => Ok(CodebookSource::Egb(n)),
            "lloyd" => Ok(CodebookSource::Lloyd(n)),
            _ => Err(bad()),
        }
    }
}

/// Inclusive `start:stop:step` Es/N0 grid in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrRange {
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl std::fmt::Display for SnrRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for SnrRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Usage(format!("bad --snr-db '{s}': {why}"));
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("want start:stop:step"))?;
        let [start, stop, step] = parts[..] else {
            return Err(bad("want start:stop:step"));
        };
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(bad("values must be finite"));
        }
        if step <= 0.0 || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        Ok(SnrRange { start, stop, step })
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub schemes: Vec<Scheme>,
    pub nt: usize,
    pub modulation: ModScheme,
    pub codebook: Option<CodebookSource>,
    pub rho: f64,
    pub pilots: u32,
    pub pilot_ratio: f64,
    pub eff_pilots: u32,
    pub estimator: Estimator,
    pub fading: Fading,
    pub mrt_eq: Equalization,
    pub snr: SnrRange,
    pub frame: usize,
    pub min_errors: u64,
    pub min_trials: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

#[derive(Parser, Debug, Default)]
#[command(name = "misolink", version, about = "Link-level MISO beamforming sweeps")]
struct Args {
    /// siso | mrt | bf-1r | bf-1p5r | alamouti (repeatable)
    #[arg(long)]
    scheme: Vec<String>,
    #[arg(long)]
    nt: Option<String>,
    /// bpsk | qpsk | qam16 | qam64
    #[arg(long = "mod")]
    modulation: Option<String>,
    /// dft:N | egb:N | lloyd:N | file:PATH
    #[arg(long)]
    codebook: Option<String>,
    /// Feedback-delay correlation; overrides --fd-hz/--delay-s
    #[arg(long)]
    rho: Option<String>,
    #[arg(long = "fd-hz")]
    fd_hz: Option<String>,
    #[arg(long = "delay-s")]
    delay_s: Option<String>,
    /// Pilots per antenna in the first round
    #[arg(long)]
    pilots: Option<String>,
    #[arg(long = "pilot-ratio")]
    pilot_ratio: Option<String>,
    /// Pilots in the extra half round (bf-1p5r)
    #[arg(long = "eff-pilots")]
    eff_pilots: Option<String>,
    /// ls | perfect
    #[arg(long)]
    csi: Option<String>,
    /// rayleigh | awgn
    #[arg(long)]
    fading: Option<String>,
    /// Equalizer for mrt/siso: 1r | 1p5r
    #[arg(long = "mrt-eq")]
    mrt_eq: Option<String>,
    /// start:stop:step in dB
    #[arg(long = "snr-db")]
    snr_db: Option<String>,
    #[arg(long)]
    frame: Option<String>,
    #[arg(long = "min-errors")]
    min_errors: Option<String>,
    #[arg(long = "min-trials")]
    min_trials: Option<String>,
    #[arg(long = "max-trials")]
    max_trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Args {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v: Vec<(&'static str, String)> = self.scheme.iter().map(|s| ("scheme", s.clone())).collect();
        let opts = [
            ("nt", &self.nt),
            ("mod", &self.modulation),
            ("codebook", &self.codebook),
            ("rho", &self.rho),
            ("fd-hz", &self.fd_hz),
            ("delay-s", &self.delay_s),
            ("pilots", &self.pilots),
            ("pilot-ratio", &self.pilot_ratio),
            ("eff-pilots", &self.eff_pilots),
            ("csi", &self.csi),
            ("fading", &self.fading),
            ("mrt-eq", &self.mrt_eq),
            ("snr-db", &self.snr_db),
            ("frame", &self.frame),
            ("min-errors", &self.min_errors),
            ("min-trials", &self.min_trials),
            ("max-trials", &self.max_trials),
            ("seed", &self.seed),
            ("workers", &self.workers),
        ];
        for (k, val) in opts {
            if let Some(s) = val {
                v.push((k, s.clone()));
            }
        }
        if let Some(p) = &self.out {
            v.push(("out", p.display().to_string()));
        }
        v
    }
}

#[derive(Default)]
struct Draft {
    schemes: Vec<Scheme>,
    nt: Option<usize>,
    modulation: Option<ModScheme>,
    codebook: Option<CodebookSource>,
    rho: Option<f64>,
    fd_hz: Option<f64>,
    delay_s: Option<f64>,
    pilots: Option<u32>,
    pilot_ratio: Option<f64>,
    eff_pilots: Option<u32>,
    estimator: Option<Estimator>,
    fading: Option<Fading>,
    mrt_eq: Option<Equalization>,
    snr: Option<SnrRange>,
    frame: Option<usize>,
    min_errors: Option<u64>,
    min_trials: Option<u64>,
    max_trials: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Usage(format!("bad value '{v}' for {key}")))
}

fn usage<T: FromStr<Err = Error>>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|e: Error| Error::Usage(format!("{key}: {e}")))
}

impl Draft {
    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "scheme" => self.schemes.push(usage(key, v)?),
            "nt" => self.nt = Some(num(key, v)?),
            "mod" => self.modulation = Some(usage(key, v)?),
            "codebook" => self.codebook = Some(v.parse()?),
            "rho" => self.rho = Some(num(key, v)?),
            "fd-hz" => self.fd_hz = Some(num(key, v)?),
            "delay-s" => self.delay_s = Some(num(key, v)?),
            "pilots" => self.pilots = Some(num(key, v)?),
            "pilot-ratio" => self.pilot_ratio = Some(num(key, v)?),
            "eff-pilots" => self.eff_pilots = Some(num(key, v)?),
            "csi" => {
                self.estimator = Some(match v {
                    "ls" => Estimator::Ls,
                    "perfect" => Estimator::Perfect,
                    _ => return Err(Error::Usage(format!("bad value '{v}' for csi (ls|perfect)"))),
                })
            }
            "fading" => self.fading = Some(usage(key, v)?),
            "mrt-eq" => self.mrt_eq = Some(usage(key, v)?),
            "snr-db" => self.snr = Some(v.parse()?),
            "frame" => self.frame = Some(num(key, v)?),
            "min-errors" => self.min_errors = Some(num(key, v)?),
            "min-trials" => self.min_trials = Some(num(key, v)?),
            "max-trials" => self.max_trials = Some(num(key, v)?),
            "seed" => self.seed = Some(num(key, v)?),
            "workers" => self.workers = Some(num(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            _ => return Err(Error::Usage(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    fn resolve(self) -> Result<RunSpec> {
        if self.schemes.is_empty() {
            return Err(Error::Usage("at least one --scheme is required".into()));
        }
        let out = self.out.ok_or_else(|| Error::Usage("--out is required".into()))?;
        let nt = self.nt.unwrap_or(2);
        if nt == 0 {
            return Err(Error::Usage("--nt must be >= 1".into()));
        }
        if self.schemes.contains(&Scheme::Alamouti) && nt != 2 {
            return Err(Error::Usage(format!("--nt {nt}: alamouti requires nt=2")));
        }
        if self.schemes.iter().any(|s| s.uses_codebook()) && self.codebook.is_none() {
            return Err(Error::Usage("bf-1r/bf-1p5r need --codebook".into()));
        }
        let rho = match (self.rho, self.fd_hz, self.delay_s) {
            (Some(r), _, _) => r,
            (None, Some(fd), Some(tau)) => jakes_rho(fd, tau).map_err(|e| Error::Usage(e.to_string()))?,
            (None, Some(_), None) => return Err(Error::Usage("--fd-hz needs --delay-s".into())),
            (None, None, Some(_)) => return Err(Error::Usage("--delay-s needs --fd-hz".into())),
            (None, None, None) => 1.0,
        };
        if !(rho.abs() <= 1.0) {
            return Err(Error::Usage(format!("--rho {rho}: need |rho| <= 1")));
        }
        let spec = RunSpec {
            schemes: self.schemes,
            nt,
            modulation: self.modulation.unwrap_or(ModScheme::Qpsk),
            codebook: self.codebook,
            rho,
            pilots: self.pilots.unwrap_or(1),
            pilot_ratio: self.pilot_ratio.unwrap_or(1.0),
            eff_pilots: self.eff_pilots.unwrap_or(1),
            estimator: self.estimator.unwrap_or(Estimator::Ls),
            fading: self.fading.unwrap_or(Fading::Rayleigh),
            mrt_eq: self.mrt_eq.unwrap_or(Equalization::OneRound),
            snr: self.snr.unwrap_or(SnrRange {
                start: 0.0,
                stop: 20.0,
                step: 2.0,
            }),
            frame: self.frame.unwrap_or(LinkConfig::DEFAULT_FRAME),
            min_errors: self.min_errors.unwrap_or(SweepConfig::DEFAULT_MIN_ERRORS),
            min_trials: self.min_trials.unwrap_or(SweepConfig::DEFAULT_MIN_TRIALS),
            max_trials: self.max_trials.unwrap_or(SweepConfig::DEFAULT_MAX_TRIALS),
            seed: self.seed.unwrap_or(0),
            workers: self.workers.unwrap_or(0),
            out,
        };
        // catch bad link/sweep settings here rather than after the first sweep
        for &s in &spec.schemes {
            validate_without_codebook(&spec.sweep_config(s, None))?;
        }
        Ok(spec)
    }
}

/// `key = value` lines; `#` starts a comment. Returns `(key, value, line)`.
fn parse_config(text: &str, origin: &Path) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: origin.display().to_string(),
                line: i + 1,
                msg: format!("expected key = value, got '{line}'"),
            });
        };
        out.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}

/// Parses `argv` (without the program name).
pub fn parse_args<S: AsRef<str>>(argv: &[S]) -> Result<RunSpec> {
    let args = Args::try_parse_from(std::iter::once("misolink").chain(argv.iter().map(|s| s.as_ref())))
        .map_err(|e| Error::Usage(e.render().to_string().trim_end().to_string()))?;
    spec_from_args(&args)
}

fn spec_from_args(args: &Args) -> Result<RunSpec> {
    let mut draft = Draft::default();
    let flags = args.pairs();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let flag_schemes = flags.iter().any(|(k, _)| *k == "scheme");
        for (k, v, line) in parse_config(&text, path)? {
            if k == "config" || (k == "scheme" && flag_schemes) {
                continue;
            }
            draft.set(&k, &v).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line,
                msg: e.to_string(),
            })?;
        }
    }
    for (k, v) in &flags {
        draft.set(k, v)?;
    }
    draft.resolve()
}

impl RunSpec {
    /// The config-file text that reproduces this spec.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for sc in &self.schemes {
            let _ = writeln!(s, "scheme = {sc}");
        }
        let _ = writeln!(s, "nt = {}", self.nt);
        let _ = writeln!(s, "mod = {}", self.modulation);
        if let Some(cb) = &self.codebook {
            let _ = writeln!(s, "codebook = {cb}");
        }
        let _ = writeln!(s, "rho = {}", self.rho);
        let _ = writeln!(s, "pilots = {}", self.pilots);
        let _ = writeln!(s, "pilot-ratio = {}", self.pilot_ratio);
        let _ = writeln!(s, "eff-pilots = {}", self.eff_pilots);
        let csi = match self.estimator {
            Estimator::Ls => "ls",
            Estimator::Perfect => "perfect",
        };
        let _ = writeln!(s, "csi = {csi}");
        let _ = writeln!(s, "fading = {}", self.fading.name());
        let _ = writeln!(s, "mrt-eq = {}", self.mrt_eq.name());
        let _ = writeln!(s, "snr-db = {}", self.snr);
        let _ = writeln!(s, "frame = {}", self.frame);
        let _ = writeln!(s, "min-errors = {}", self.min_errors);
        let _ = writeln!(s, "min-trials = {}", self.min_trials);
        let _ = writeln!(s, "max-trials = {}", self.max_trials);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }

    fn link(&self, scheme: Scheme, codebook: Option<Arc<Codebook>>) -> LinkConfig {
        let mut l = LinkConfig::new(scheme, self.nt, self.modulation);
        l.codebook = codebook;
        l.delay = DelayModel::new(self.rho).unwrap_or_else(|_| DelayModel::none());
        l.training = TrainingModel {
            pilots_per_antenna: self.pilots,
            pilot_energy_ratio: self.pilot_ratio,
            estimator: self.estimator,
        };
        l.t_eff = self.eff_pilots;
        l.frame_symbols = self.frame;
        l.fading = self.fading;
        l.mrt_equalization = self.mrt_eq;
        l
    }

    /// Sweep settings for one scheme.
    pub fn sweep_config(&self, scheme: Scheme, codebook: Option<Arc<Codebook>>) -> SweepConfig {
        let mut cfg = SweepConfig::new(self.link(scheme, codebook), self.snr.grid(), self.seed);
        cfg.min_bit_errors = self.min_errors;
        cfg.min_trials = self.min_trials;
        cfg.max_trials = self.max_trials;
        cfg.workers = self.workers;
        cfg
    }
}

fn validate_without_codebook(cfg: &SweepConfig) -> Result<()> {
    let mut probe = cfg.clone();
    if probe.link.scheme.uses_codebook() {
        // any codebook of the right size stands in until the real one is built
        probe.link.codebook = Some(Arc::new(dft_codebook(probe.link.nt, 1)?));
    }
    probe.validate().map_err(|e| Error::Usage(e.to_string()))
}

/// What [`run`] wrote.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub curve_files: Vec<PathBuf>,
    pub meta_file: PathBuf,
    pub codebook_file: Option<PathBuf>,
}

/// Builds the codebook, sweeps each scheme with the shared seed and writes
/// `<scheme>.csv` per scheme, `codebook.txt` (when used) and `run.meta`
/// into `spec.out`.
pub fn run(spec: &RunSpec) -> Result<RunReport> {
    let started = Instant::now();
    std::fs::create_dir_all(&spec.out).map_err(|e| Error::io(&spec.out, e))?;
    let needs_cb = spec.schemes.iter().any(|s| s.uses_codebook());
    let codebook = match (&spec.codebook, needs_cb) {
        (Some(src), true) => Some(Arc::new(src.build(spec.nt, spec.seed)?)),
        _ => None,
    };
    let codebook_file = match &codebook {
        Some(cb) => {
            let p = spec.out.join("codebook.txt");
            save_codebook(cb, &p)?;
            Some(p)
        }
        None => None,
    };
    let mut curve_files = Vec::new();
    for &scheme in &spec.schemes {
        let cb = if scheme.uses_codebook() { codebook.clone() } else { None };
        let curve = sweep(&spec.sweep_config(scheme, cb))?;
        let p = spec.out.join(format!("{}.csv", scheme.name()));
        export_csv(&curve, &p)?;
        curve_files.push(p);
    }
    let meta_file = spec.out.join("run.meta");
    let meta = format!(
        "# misolink {}\n# wall_time_s = {:.3}\n{}",
        env!("CARGO_PKG_VERSION"),
        started.elapsed().as_secs_f64(),
        spec.render()
    );
    std::fs::write(&meta_file, meta).map_err(|e| Error::io(&meta_file, e))?;
    Ok(RunReport {
        curve_files,
        meta_file,
        codebook_file,
    })
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<S: AsRef<str>>(argv: &[S]) -> i32 {
    let args = match Args::try_parse_from(std::iter::once("misolink").chain(argv.iter().map(|s| s.as_ref()))) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = spec_from_args(&args).and_then(|spec| run(&spec));
    match result {
        Ok(report) => {
            for p in &report.curve_files {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("misolink: {e}");
            if matches!(e, Error::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}
