//! Command-line front end: resolve a run configuration from defaults, an
//! optional flat config file, and command-line flags (in that precedence
//! order), run the requested pipeline, and emit CSV series plus a run
//! manifest.
//!
//! The CSV holds one row per scan. Columns:
//! `scan,pr_mass_kept,rmse_pos_x,rmse_vel_x,rmse_pos_y,rmse_vel_y`,
//! extended with `enum_rmse_*` columns in compare mode and with
//! `mc_rmse_*`, `mc_trace`, `mc_trace_se` columns in Monte Carlo mode.
//! Numbers are written with Rust's shortest-roundtrip float formatting, so
//! rerunning an identical configuration reproduces the file byte for byte.
//! The manifest (same path with a `.manifest.txt` extension) records the
//! fully resolved configuration, the tool version, the wall time, and the
//! probability mass dropped by pruning; wall time makes it the one output
//! that is not byte-stable.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bound::{enum_pcrlb_series, rfs_bound_series, BoundSeries};
use crate::mcval::{empirical_mse, McConfig, McSeries, DEFAULT_PARTICLES, DEFAULT_THRESHOLD};
use crate::scenarios::{bearings_default, linear_default, ScenarioKind, ScenarioSpec};
use crate::seqtree::MAX_SCANS;
use crate::{Error, Result};

/// Which pipeline a run drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    RfsBound,
    EnumPcrlb,
    Compare,
    MonteCarlo,
}

impl Mode {
    fn as_str(&self) -> &'static str {
        match self {
            Mode::RfsBound => "rfs",
            Mode::EnumPcrlb => "enum",
            Mode::Compare => "compare",
            Mode::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Upper limit for `prune_eps` at the command-line level, far below any
/// probability that could visibly move a bound.
pub const PRUNE_EPS_MAX: f64 = 1e-3;

/// Optional settings collected from a config file or from flags; `None`
/// means "leave the lower-precedence value alone".
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub scenario: Option<ScenarioKind>,
    pub pd: Option<f64>,
    pub r: Option<f64>,
    pub b: Option<f64>,
    pub scans: Option<usize>,
    pub e_scale: Option<f64>,
    pub prune_eps: Option<f64>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub particles: Option<usize>,
    pub threshold: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub spec: ScenarioSpec,
    /// Cardinality-mismatch error scale already applied to `spec`.
    pub e_scale: f64,
    pub seed: u64,
    pub runs: usize,
    pub particles: usize,
    pub threshold: f64,
    pub out: PathBuf,
    /// When set, emit the preset parameter grid of this figure instead of a
    /// single series.
    pub figure: Option<u8>,
}

impl RunConfig {
    /// Range checks narrower than the scenario's own validation.
    pub fn validate(&self) -> Result<()> {
        if self.spec.scans > MAX_SCANS {
            return Err(Error::Config(format!(
                "scans = {} exceeds the hard cap {MAX_SCANS}",
                self.spec.scans
            )));
        }
        if !(0.0..=PRUNE_EPS_MAX).contains(&self.spec.prune_eps) {
            return Err(Error::Config(format!(
                "prune_eps = {} outside [0, {PRUNE_EPS_MAX}]",
                self.spec.prune_eps
            )));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.particles == 0 {
            return Err(Error::Config("particles must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!(
                "threshold = {} outside [0, 1]",
                self.threshold
            )));
        }
        if let Some(f) = self.figure {
            if !matches!(f, 1 | 2 | 3 | 5 | 6) {
                return Err(Error::Config(format!(
                    "figure = {f} is not one of 1, 2, 3, 5, 6"
                )));
            }
        }
        self.spec.validate()
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| {
        Error::Config(format!("line {line}: key '{key}': cannot parse '{value}': {e}"))
    })
}

fn check_range(key: &str, v: f64, lo: f64, hi: f64, line: usize) -> Result<f64> {
    if (lo..=hi).contains(&v) {
        Ok(v)
    } else {
        Err(Error::Config(format!(
            "line {line}: key '{key}': value {v} outside [{lo}, {hi}]"
        )))
    }
}

/// Parse a flat `key = value` config file. `#` starts a comment, blank lines
/// are skipped, and a key given twice keeps its last value. Unknown keys and
/// out-of-range values are reported with their line number.
pub fn parse_config(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
    let mut o = Overrides::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let Some((key, value)) = stripped.split_once('=') else {
            return Err(Error::Config(format!(
                "line {line}: expected 'key = value', got '{stripped}'"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "scenario" => {
                o.scenario = Some(match value {
                    "linear" => ScenarioKind::LinearCv,
                    "bearings" => ScenarioKind::BearingsOnly,
                    other => {
                        return Err(Error::Config(format!(
                            "line {line}: key 'scenario': '{other}' is not 'linear' or 'bearings'"
                        )))
                    }
                })
            }
            "pd" => {
                let v: f64 = parse_value(key, value, line)?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::Config(format!(
                        "line {line}: key 'pd': value {v} must lie strictly inside (0, 1)"
                    )));
                }
                o.pd = Some(v);
            }
            "r" => o.r = Some(check_range(key, parse_value(key, value, line)?, 0.0, 1.0, line)?),
            "b" => o.b = Some(check_range(key, parse_value(key, value, line)?, 0.0, 1.0, line)?),
            "scans" => {
                let v: usize = parse_value(key, value, line)?;
                if v == 0 || v > MAX_SCANS {
                    return Err(Error::Config(format!(
                        "line {line}: key 'scans': value {v} outside [1, {MAX_SCANS}]"
                    )));
                }
                o.scans = Some(v);
            }
            "e_scale" => {
                let v: f64 = parse_value(key, value, line)?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Config(format!(
                        "line {line}: key 'e_scale': value {v} must be finite and nonnegative"
                    )));
                }
                o.e_scale = Some(v);
            }
            "prune_eps" => {
                o.prune_eps = Some(check_range(
                    key,
                    parse_value(key, value, line)?,
                    0.0,
                    PRUNE_EPS_MAX,
                    line,
                )?)
            }
            "seed" => o.seed = Some(parse_value(key, value, line)?),
            "runs" => {
                let v: usize = parse_value(key, value, line)?;
                if v == 0 {
                    return Err(Error::Config(format!(
                        "line {line}: key 'runs': must be at least 1"
                    )));
                }
                o.runs = Some(v);
            }
            "particles" => {
                let v: usize = parse_value(key, value, line)?;
                if v == 0 {
                    return Err(Error::Config(format!(
                        "line {line}: key 'particles': must be at least 1"
                    )));
                }
                o.particles = Some(v);
            }
            "threshold" => {
                o.threshold = Some(check_range(
                    key,
                    parse_value(key, value, line)?,
                    0.0,
                    1.0,
                    line,
                )?)
            }
            "out" => o.out = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Config(format!(
                    "line {line}: unknown key '{other}'"
                )))
            }
        }
    }
    Ok(o)
}

fn merge(base: &mut Overrides, over: &Overrides) {
    macro_rules! take {
        ($($f:ident),*) => {
            $(if over.$f.is_some() { base.$f = over.$f.clone(); })*
        };
    }
    take!(scenario, pd, r, b, scans, e_scale, prune_eps, seed, runs, particles, threshold, out);
}

/// Build the final configuration: scenario defaults, then config-file
/// values, then flag values.
pub fn resolve(mode: Mode, file: Overrides, flags: Overrides, figure: Option<u8>) -> Result<RunConfig> {
    let mut merged = file;
    merge(&mut merged, &flags);

    let kind = merged.scenario.unwrap_or(ScenarioKind::LinearCv);
    let mut spec = match kind {
        ScenarioKind::LinearCv => linear_default(),
        ScenarioKind::BearingsOnly => bearings_default(),
    };
    if let Some(pd) = merged.pd {
        spec.params.pd = pd;
    }
    if let Some(r) = merged.r {
        spec.params.r = r;
    }
    if let Some(b) = merged.b {
        spec.params.b = b;
    }
    if let Some(s) = merged.scans {
        spec.scans = s;
    }
    if let Some(p) = merged.prune_eps {
        spec.prune_eps = p;
    }
    let e_scale = merged.e_scale.unwrap_or(1.0);
    if e_scale != 1.0 {
        spec.apply_e_scale(e_scale)?;
    }

    let out = merged.out.unwrap_or_else(|| {
        PathBuf::from(match figure {
            Some(f) => format!("figure{f}.csv"),
            None => format!("{}_{}.csv", mode.as_str(), spec.name),
        })
    });

    let cfg = RunConfig {
        mode,
        spec,
        e_scale,
        seed: merged.seed.unwrap_or(0),
        runs: merged.runs.unwrap_or(100),
        particles: merged.particles.unwrap_or(DEFAULT_PARTICLES),
        threshold: merged.threshold.unwrap_or(DEFAULT_THRESHOLD),
        out,
        figure,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Apply the `RFS_BOUND_THREADS` cap to the global worker pool. Harmless if
/// the pool was already built.
fn init_threads() {
    if let Ok(v) = std::env::var("RFS_BOUND_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

struct SeriesBundle {
    rfs: BoundSeries,
    enum_ref: Option<BoundSeries>,
    mc: Option<McSeries>,
}

fn run_pipelines(cfg: &RunConfig) -> Result<SeriesBundle> {
    let (rfs, enum_ref) = match cfg.mode {
        Mode::RfsBound | Mode::MonteCarlo => (rfs_bound_series(&cfg.spec)?, None),
        Mode::EnumPcrlb => (enum_pcrlb_series(&cfg.spec)?, None),
        Mode::Compare => (
            rfs_bound_series(&cfg.spec)?,
            Some(enum_pcrlb_series(&cfg.spec)?),
        ),
    };
    let mc = if cfg.mode == Mode::MonteCarlo {
        init_threads();
        let mc_cfg = McConfig {
            runs: cfg.runs,
            particles: cfg.particles,
            threshold: cfg.threshold,
            seed: cfg.seed,
        };
        Some(empirical_mse(&cfg.spec, &mc_cfg)?)
    } else {
        None
    };
    Ok(SeriesBundle { rfs, enum_ref, mc })
}

fn render_csv(bundle: &SeriesBundle) -> String {
    let mut header = String::from("scan,pr_mass_kept,rmse_pos_x,rmse_vel_x,rmse_pos_y,rmse_vel_y");
    if bundle.enum_ref.is_some() {
        header.push_str(",enum_rmse_pos_x,enum_rmse_vel_x,enum_rmse_pos_y,enum_rmse_vel_y");
    }
    if bundle.mc.is_some() {
        header.push_str(",mc_rmse_pos_x,mc_rmse_vel_x,mc_rmse_pos_y,mc_rmse_vel_y,mc_trace,mc_trace_se");
    }
    let mut text = header;
    text.push('\n');
    for scan in &bundle.rfs.per_scan {
        let mut row = format!("{},{}", scan.k, scan.pr_mass_kept);
        for v in &scan.rmse {
            row.push_str(&format!(",{v}"));
        }
        if let Some(en) = &bundle.enum_ref {
            for v in &en.scan(scan.k).rmse {
                row.push_str(&format!(",{v}"));
            }
        }
        if let Some(mc) = &bundle.mc {
            let m = mc.scan(scan.k);
            for v in &m.rmse {
                row.push_str(&format!(",{v}"));
            }
            row.push_str(&format!(",{},{}", m.trace_mean, m.trace_se));
        }
        text.push_str(&row);
        text.push('\n');
    }
    text
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn render_manifest(cfg: &RunConfig, bundle: &SeriesBundle, wall_ms: f64) -> String {
    let spec = &cfg.spec;
    let last = bundle
        .rfs
        .per_scan
        .last()
        .expect("series has at least one scan");
    let mut m = String::new();
    m.push_str(&format!("tool: rfs-bound {}\n", env!("CARGO_PKG_VERSION")));
    m.push_str(&format!("mode: {}\n", cfg.mode));
    m.push_str(&format!("scenario: {}\n", spec.name));
    m.push_str(&format!("t_step: {}\n", spec.t_step));
    m.push_str(&format!("q_intensity: {}\n", spec.q_intensity));
    m.push_str(&format!("sensor_noise: {}\n", spec.sensor_noise));
    m.push_str(&format!(
        "prior_std: {},{}\n",
        spec.prior_std.0, spec.prior_std.1
    ));
    m.push_str(&format!("scans: {}\n", spec.scans));
    m.push_str(&format!("pd: {}\n", spec.params.pd));
    m.push_str(&format!("r: {}\n", spec.params.r));
    m.push_str(&format!("b: {}\n", spec.params.b));
    m.push_str(&format!("e_scale: {}\n", cfg.e_scale));
    m.push_str(&format!("prune_eps: {}\n", spec.prune_eps));
    m.push_str(&format!("node_cap: {}\n", spec.node_cap));
    m.push_str(&format!("seed: {}\n", cfg.seed));
    if cfg.mode == Mode::MonteCarlo {
        m.push_str(&format!("runs: {}\n", cfg.runs));
        m.push_str(&format!("particles: {}\n", cfg.particles));
        m.push_str(&format!("threshold: {}\n", cfg.threshold));
        if let Some(mc) = &bundle.mc {
            m.push_str(&format!("effective_runs: {}\n", mc.effective_runs));
            m.push_str(&format!("degenerate_runs: {}\n", mc.degenerate_runs.len()));
        }
    }
    m.push_str(&format!("dropped_mass: {}\n", last.dropped_mass));
    m.push_str(&format!("wall_ms: {wall_ms:.3}\n"));
    m
}

/// Run one resolved configuration: execute the pipelines, write the CSV and
/// its manifest, and return the CSV path.
fn run_single(cfg: &RunConfig) -> Result<PathBuf> {
    let start = Instant::now();
    let bundle = run_pipelines(cfg)?;
    let csv = render_csv(&bundle);
    write_file(&cfg.out, &csv)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let manifest_path = cfg.out.with_extension("manifest.txt");
    write_file(&manifest_path, &render_manifest(cfg, &bundle, wall_ms))?;
    Ok(cfg.out.clone())
}

/// Grid of (file suffix, configuration edits) for one figure preset. Every
/// preset runs in compare mode so the unity-existence reference series is
/// always alongside.
fn figure_grid(figure: u8, base: &RunConfig) -> Result<Vec<RunConfig>> {
    struct Point {
        kind: ScenarioKind,
        pd: f64,
        r: f64,
        b: f64,
        e_scale: f64,
        suffix: String,
    }
    let r_grid = [1.0, 0.9, 0.7];
    let mut points = Vec::new();
    match figure {
        1 | 3 => {
            let e_scale = if figure == 3 { 2.0 } else { 1.0 };
            for r in r_grid {
                points.push(Point {
                    kind: ScenarioKind::LinearCv,
                    pd: 0.8,
                    r,
                    b: 1.0,
                    e_scale,
                    suffix: format!("_r{r}"),
                });
            }
        }
        2 => {
            for pd in [0.7, 0.9] {
                points.push(Point {
                    kind: ScenarioKind::LinearCv,
                    pd,
                    r: 0.9,
                    b: 1.0,
                    e_scale: 1.0,
                    suffix: format!("_pd{pd}"),
                });
            }
        }
        5 | 6 => {
            let b = if figure == 6 { 0.1 } else { 1.0 };
            for r in r_grid {
                points.push(Point {
                    kind: ScenarioKind::BearingsOnly,
                    pd: 0.9,
                    r,
                    b,
                    e_scale: 1.0,
                    suffix: format!("_r{r}"),
                });
            }
        }
        other => {
            return Err(Error::Config(format!(
                "figure = {other} is not one of 1, 2, 3, 5, 6"
            )))
        }
    }

    let stem = base
        .out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("figure{figure}"));
    let dir = base.out.parent().map(Path::to_path_buf).unwrap_or_default();

    points
        .into_iter()
        .map(|p| {
            let mut spec = match p.kind {
                ScenarioKind::LinearCv => linear_default(),
                ScenarioKind::BearingsOnly => bearings_default(),
            };
            spec.params.pd = p.pd;
            spec.params.r = p.r;
            spec.params.b = p.b;
            spec.prune_eps = base.spec.prune_eps;
            if p.e_scale != 1.0 {
                spec.apply_e_scale(p.e_scale)?;
            }
            let cfg = RunConfig {
                mode: Mode::Compare,
                spec,
                e_scale: p.e_scale,
                seed: base.seed,
                runs: base.runs,
                particles: base.particles,
                threshold: base.threshold,
                out: dir.join(format!("{stem}{}.csv", p.suffix)),
                figure: None,
            };
            cfg.validate()?;
            Ok(cfg)
        })
        .collect()
}

/// Execute a resolved configuration: a single series, or a whole figure
/// grid when `figure` is set. Returns the CSV paths written.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    match cfg.figure {
        None => Ok(vec![run_single(cfg)?]),
        Some(f) => figure_grid(f, cfg)?.iter().map(run_single).collect(),
    }
}

const CONFIG_HELP: &str = "CONFIG FILE:
  Flat `key = value` lines; `#` starts a comment; a repeated key keeps its
  last value; command-line flags override file values. Keys:
    scenario   = linear | bearings
    pd         = detection probability, strictly inside (0, 1)
    r          = survival probability in [0, 1]
    b          = initial existence probability in [0, 1]
    scans      = number of scans, 1..=24
    e_scale    = scale applied to both cardinality-mismatch error vectors
    prune_eps  = per-history pruning threshold in [0, 1e-3]
    seed       = Monte Carlo seed (u64)
    runs       = Monte Carlo run count (>= 1)
    particles  = particle count per run (>= 1)
    threshold  = existence probability needed to report a state, in [0, 1]
    out        = output CSV path

ENVIRONMENT:
  RFS_BOUND_THREADS caps the Monte Carlo worker thread count.

OUTPUT:
  CSV columns: scan,pr_mass_kept,rmse_pos_x,rmse_vel_x,rmse_pos_y,rmse_vel_y
  plus enum_rmse_* in compare mode and mc_rmse_*/mc_trace/mc_trace_se in mc
  mode. A `<out>.manifest.txt` records the resolved configuration, version,
  wall time, and pruned probability mass.";

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct RunArgs {
    /// Scenario preset: linear | bearings.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Config file with `key = value` lines (flags take precedence).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Detection probability, strictly inside (0, 1).
    #[arg(long)]
    pub pd: Option<f64>,
    /// Survival probability in [0, 1].
    #[arg(long)]
    pub r: Option<f64>,
    /// Initial existence probability in [0, 1].
    #[arg(long)]
    pub b: Option<f64>,
    /// Number of scans (1..=24).
    #[arg(long)]
    pub scans: Option<usize>,
    /// Scale applied to both cardinality-mismatch error vectors.
    #[arg(long = "e-scale")]
    pub e_scale: Option<f64>,
    /// Per-history pruning threshold in [0, 1e-3].
    #[arg(long = "prune-eps")]
    pub prune_eps: Option<f64>,
    /// Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo run count.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Particle count per Monte Carlo run.
    #[arg(long)]
    pub particles: Option<usize>,
    /// Existence probability needed to report a state.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit a whole figure parameter grid (1, 2, 3, 5, or 6) instead of a
    /// single series; each grid point becomes its own compare-mode CSV.
    #[arg(long)]
    pub figure: Option<u8>,
}

impl RunArgs {
    fn to_overrides(&self) -> Result<Overrides> {
        let scenario = match self.scenario.as_deref() {
            None => None,
            Some("linear") => Some(ScenarioKind::LinearCv),
            Some("bearings") => Some(ScenarioKind::BearingsOnly),
            Some(other) => {
                return Err(Error::Config(format!(
                    "--scenario '{other}' is not 'linear' or 'bearings'"
                )))
            }
        };
        Ok(Overrides {
            scenario,
            pd: self.pd,
            r: self.r,
            b: self.b,
            scans: self.scans,
            e_scale: self.e_scale,
            prune_eps: self.prune_eps,
            seed: self.seed,
            runs: self.runs,
            particles: self.particles,
            threshold: self.threshold,
            out: self.out.clone(),
        })
    }
}

/// Recursive error-bound calculator for single-target tracking with
/// uncertain target existence and missed detections.
#[derive(Parser, Debug)]
#[command(name = "rfs-bound", version, after_long_help = CONFIG_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Existence-aware recursive bound series.
    Rfs(RunArgs),
    /// Unity-existence reference bound series.
    #[command(name = "enum")]
    Enum(RunArgs),
    /// Both series side by side.
    Compare(RunArgs),
    /// Bound series plus Monte Carlo mean squared error of a particle
    /// filter.
    Mc(RunArgs),
}

/// Resolve and execute a parsed command line. Returns the CSV paths
/// written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let (mode, args) = match &cli.command {
        Command::Rfs(a) => (Mode::RfsBound, a),
        Command::Enum(a) => (Mode::EnumPcrlb, a),
        Command::Compare(a) => (Mode::Compare, a),
        Command::Mc(a) => (Mode::MonteCarlo, a),
    };
    let file = match &args.config {
        Some(path) => parse_config(path)?,
        None => Overrides::default(),
    };
    let flags = args.to_overrides()?;
    let cfg = resolve(mode, file, flags, args.figure)?;
    run(&cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
        let path = dir.path().join("run.conf");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        path
    }

    #[test]
    fn empty_config_gives_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(&dir, "");
        let o = parse_config(&path).unwrap();
        let cfg = resolve(Mode::RfsBound, o, Overrides::default(), None).unwrap();
        assert_eq!(cfg.spec.name, "linear");
        assert_eq!(cfg.spec.scans, 10);
        assert_eq!(cfg.spec.params.pd, 0.8);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn config_rejects_pd_one_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(&dir, "# comment\npd = 1.0\n");
        let err = parse_config(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("pd"), "{msg}");
        assert_eq!(err.code(), "ConfigError");
    }

    #[test]
    fn config_rejects_unknown_key() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(&dir, "pd = 0.8\nbanana = 3\n");
        let err = parse_config(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("banana"), "{msg}");
    }

    #[test]
    fn config_later_key_wins_and_comments_are_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(&dir, "r = 0.5 # inline\nr = 0.7\n\n# r = 0.2\n");
        let o = parse_config(&path).unwrap();
        assert_eq!(o.r, Some(0.7));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(&dir, "pd = 0.6\nscans = 4\n");
        let file = parse_config(&path).unwrap();
        let flags = Overrides {
            pd: Some(0.9),
            ..Default::default()
        };
        let cfg = resolve(Mode::Compare, file, flags, None).unwrap();
        assert_eq!(cfg.spec.params.pd, 0.9);
        assert_eq!(cfg.spec.scans, 4);
    }

    #[test]
    fn e_scale_doubles_both_error_vectors() {
        let flags = Overrides {
            e_scale: Some(2.0),
            ..Default::default()
        };
        let cfg = resolve(Mode::RfsBound, Overrides::default(), flags, None).unwrap();
        assert_eq!(cfg.spec.params.e1.as_slice(), &[200.0, 10.0, 200.0, 10.0]);
        assert_eq!(cfg.spec.params.e0.as_slice(), &[200.0, 10.0, 200.0, 10.0]);
    }

    #[test]
    fn validate_rejects_out_of_range() {
        let mut cfg = resolve(
            Mode::RfsBound,
            Overrides::default(),
            Overrides::default(),
            None,
        )
        .unwrap();
        cfg.spec.prune_eps = 0.5;
        assert_eq!(cfg.validate().unwrap_err().code(), "ConfigError");
        cfg.spec.prune_eps = 0.0;
        cfg.runs = 0;
        assert_eq!(cfg.validate().unwrap_err().code(), "ConfigError");
    }

    #[test]
    fn rfs_run_writes_csv_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("series.csv");
        let flags = Overrides {
            scans: Some(4),
            out: Some(out.clone()),
            ..Default::default()
        };
        let cfg = resolve(Mode::RfsBound, Overrides::default(), flags, None).unwrap();
        let paths = run(&cfg).unwrap();
        assert_eq!(paths, vec![out.clone()]);
        let text = std::fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "scan,pr_mass_kept,rmse_pos_x,rmse_vel_x,rmse_pos_y,rmse_vel_y"
        );
        assert_eq!(lines.count(), 4);
        let manifest = std::fs::read_to_string(out.with_extension("manifest.txt")).unwrap();
        assert!(manifest.contains("mode: rfs"));
        assert!(manifest.contains("scenario: linear"));
        assert!(manifest.contains("wall_ms:"));
    }

    #[test]
    fn compare_run_appends_reference_columns() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("cmp.csv");
        let flags = Overrides {
            scans: Some(3),
            out: Some(out.clone()),
            ..Default::default()
        };
        let cfg = resolve(Mode::Compare, Overrides::default(), flags, None).unwrap();
        run(&cfg).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.ends_with(
            "enum_rmse_pos_x,enum_rmse_vel_x,enum_rmse_pos_y,enum_rmse_vel_y"
        ));
        for line in text.lines().skip(1) {
            assert_eq!(line.split(',').count(), 10);
        }
    }

    #[test]
    fn mc_run_is_byte_identical_across_reruns() {
        let dir = tempfile::tempdir().unwrap();
        let out1 = dir.path().join("a.csv");
        let out2 = dir.path().join("b.csv");
        for out in [&out1, &out2] {
            let flags = Overrides {
                scans: Some(3),
                runs: Some(5),
                particles: Some(40),
                seed: Some(7),
                out: Some((*out).clone()),
                ..Default::default()
            };
            let cfg = resolve(Mode::MonteCarlo, Overrides::default(), flags, None).unwrap();
            run(&cfg).unwrap();
        }
        let a = std::fs::read(&out1).unwrap();
        let b = std::fs::read(&out2).unwrap();
        assert_eq!(a, b);
        let header = String::from_utf8(a)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert!(header.ends_with("mc_trace,mc_trace_se"), "{header}");
    }

    #[test]
    fn figure_two_emits_one_csv_per_detection_probability() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("fig2.csv");
        let flags = Overrides {
            out: Some(out),
            ..Default::default()
        };
        let cfg = resolve(Mode::Compare, Overrides::default(), flags, Some(2)).unwrap();
        let paths = run(&cfg).unwrap();
        let names: Vec<String> = paths
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, vec!["fig2_pd0.7.csv", "fig2_pd0.9.csv"]);
        for p in &paths {
            assert!(p.exists());
            assert!(p.with_extension("manifest.txt").exists());
        }
    }

    #[test]
    fn unwritable_out_is_io_error() {
        let cfg = resolve(
            Mode::RfsBound,
            Overrides::default(),
            Overrides {
                scans: Some(2),
                out: Some(PathBuf::from("/nonexistent-dir/x.csv")),
                ..Default::default()
            },
            None,
        )
        .unwrap();
        assert_eq!(run(&cfg).unwrap_err().code(), "IoError");
    }

    #[test]
    fn cli_parse_and_execute_round_trip() {
        use clap::Parser;
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("cli.csv");
        let cli = Cli::try_parse_from([
            "rfs-bound",
            "rfs",
            "--scenario",
            "linear",
            "--scans",
            "3",
            "--r",
            "0.9",
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        let paths = execute(&cli).unwrap();
        assert_eq!(paths.len(), 1);
        assert!(out.exists());
    }

    #[test]
    fn cli_rejects_bad_scenario() {
        use clap::Parser;
        let cli =
            Cli::try_parse_from(["rfs-bound", "rfs", "--scenario", "quadratic"]).unwrap();
        assert_eq!(execute(&cli).unwrap_err().code(), "ConfigError");
    }
}
