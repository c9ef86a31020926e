//! The `zetagaps` command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analytic;
use crate::cache::{fetch_remote, CACHE_DIR_ENV, DATA_URL_ENV};
use crate::error::{Error, Result};
use crate::gaps::{self, check_resolution, moderate_threshold};
use crate::gue::{self, GueSampleConfig, SpacingCdfTable};
use crate::windows::{self, GapConvention, WindowConfig};
use crate::xi::{self, ZeroSumConfig};
use crate::zeros::{load_table, OrdinateTable, TextFormat};

#[derive(Debug, Parser)]
#[command(
    name = "zetagaps",
    version,
    about = "Gap statistics of zeta-zero ordinates"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Ordinate table (text, or a ZGC1 binary cache). Falls back to the URL in
    /// ZETAGAPS_DATA_URL.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Layout of a text table.
    #[arg(long, global = true, default_value = "plain")]
    pub data_format: TextFormat,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent. A manifest is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads. Affects speed only.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate c_r with f(c_r) = 1/r.
    CrTable {
        #[arg(long, default_value_t = 1000)]
        rmax: u32,
        /// Additional r values (up to rmax).
        #[arg(long, value_delimiter = ',')]
        extra: Vec<u32>,
    },
    /// Runs of r consecutive gaps of at least 2πc/log T.
    Runs {
        #[arg(short, long)]
        r: usize,
        #[arg(short, long)]
        c: f64,
        #[arg(short = 'T', long = "height")]
        height: f64,
        /// Also report the failure classes under the literal prefix convention.
        #[arg(long)]
        literal: bool,
    },
    /// Empirical pair correlation against f(c).
    Pc {
        #[arg(short, long, value_delimiter = ',', required = true)]
        c: Vec<f64>,
        #[arg(short = 'T', long = "height")]
        height: f64,
    },
    /// Neighbor spacing CDF against the sine-kernel prediction.
    Spacing {
        #[arg(long, default_value_t = 1)]
        ell: usize,
        #[arg(short, long, value_delimiter = ',', required = true)]
        c: Vec<f64>,
        #[arg(short = 'T', long = "height")]
        height: f64,
    },
    /// Half-integer binning of rescaled consecutive differences.
    Ah {
        #[arg(short = 'T', long = "height")]
        height: f64,
    },
    /// Window counts, variance integral and good-set fraction.
    Windows {
        #[arg(short = 'T', long = "height")]
        height: f64,
        #[arg(short, long)]
        m: u32,
        #[arg(short, long, default_value_t = 1)]
        r: u32,
        /// Grid step for the good-set scan; defaults to h/16.
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Sine-kernel spacing law and its Monte-Carlo GUE cross-check.
    Gue {
        #[arg(short, long, value_delimiter = ',', default_value = "0.5,1,1.5")]
        c: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        matrices: usize,
        #[arg(long, default_value_t = 0.8)]
        bulk_fraction: f64,
        #[arg(long, default_value_t = gue::DEFAULT_QUAD_ORDER)]
        quad_order: usize,
    },
    /// Critical points between consecutive ordinates and evaluation heights.
    Xistar {
        /// First index (1-based).
        #[arg(short, long, default_value_t = 1)]
        n: usize,
        /// Number of consecutive gaps.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Exponent of the evaluation-height offset (log γ_n)^(−C).
        #[arg(long = "C", default_value_t = 3.0)]
        c_exponent: f64,
        #[arg(long, default_value_t = 50.0)]
        delta: f64,
        #[arg(long)]
        conjugates: bool,
    },
    /// Download a remote table into the cache.
    Fetch {
        #[arg(long, env = DATA_URL_ENV)]
        url: String,
    },
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_)
        | Error::Argument(_)
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::EmptyInput
        | Error::Pole { .. }
        | Error::DegenerateInterval(_)
        | Error::Integrity(_) => 2,
        Error::Coverage(_) => 3,
        Error::Convergence(_) | Error::Numeric(_) => 4,
        Error::Fetch(_) | Error::Io(_) => 1,
    }
}

/// A value in an output table.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(v) => write!(f, "{v}"),
        }
    }
}

/// Column-labelled rows emitted by a command.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Output {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Output {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| csv_field(&c.to_string())).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<serde_json::Value> =
            self.rows
                .iter()
                .map(|row| {
                    let obj: serde_json::Map<String, serde_json::Value> =
                        self.columns
                            .iter()
                            .cloned()
                            .zip(row.iter().map(|c| {
                                serde_json::to_value(c).unwrap_or(serde_json::Value::Null)
                            }))
                            .collect();
                    serde_json::Value::Object(obj)
                })
                .collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        let mut s =
            serde_json::to_string_pretty(&doc).map_err(|e| Error::Numeric(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Record of one invocation, written as `<out>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub input_checksums: BTreeMap<String, String>,
    pub output_paths: Vec<String>,
    pub wall_time_seconds: f64,
    pub seed: Option<u64>,
}

impl RunManifest {
    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Numeric(e.to_string()))?;
        let mut s =
            serde_json::to_string_pretty(&value).map_err(|e| Error::Numeric(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

struct Inputs {
    table: OrdinateTable,
    checksums: BTreeMap<String, String>,
}

fn default_cache_dir() -> PathBuf {
    std::env::var_os("HOME")
        .map(|h| PathBuf::from(h).join(".cache").join("zetagaps"))
        .unwrap_or_else(|| std::env::temp_dir().join("zetagaps"))
}

fn load_inputs(global: &GlobalArgs) -> Result<Inputs> {
    let mut checksums = BTreeMap::new();
    if let Some(path) = &global.data {
        let table = load_table(path, global.data_format)?;
        checksums.insert(path.display().to_string(), sha256_file(path)?);
        return Ok(Inputs { table, checksums });
    }
    if let Ok(url) = std::env::var(DATA_URL_ENV) {
        let dir = global.cache_dir.clone().unwrap_or_else(default_cache_dir);
        let table = fetch_remote(&url, &dir, global.data_format)?;
        let cached = crate::cache::cache_path(&url, &dir);
        checksums.insert(url, sha256_file(&cached)?);
        return Ok(Inputs { table, checksums });
    }
    Err(Error::argument(format!(
        "no ordinate table: pass --data or set {DATA_URL_ENV}"
    )))
}

fn positive_tol(tol: Option<f64>, default: f64) -> Result<f64> {
    let tol = tol.unwrap_or(default);
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::argument(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    Ok(tol)
}

/// Parameters recorded in the manifest, as strings.
fn parameters(global: &GlobalArgs, command: &Command) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    p.insert(
        "format".into(),
        format!("{:?}", global.format).to_lowercase(),
    );
    p.insert(
        "data_format".into(),
        format!("{:?}", global.data_format).to_lowercase(),
    );
    if let Some(t) = global.tol {
        p.insert("tol".into(), t.to_string());
    }
    if let Some(d) = &global.data {
        p.insert("data".into(), d.display().to_string());
    }
    p.insert("arguments".into(), format!("{command:?}"));
    p
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::CrTable { .. } => "cr-table",
        Command::Runs { .. } => "runs",
        Command::Pc { .. } => "pc",
        Command::Spacing { .. } => "spacing",
        Command::Ah { .. } => "ah",
        Command::Windows { .. } => "windows",
        Command::Gue { .. } => "gue",
        Command::Xistar { .. } => "xistar",
        Command::Fetch { .. } => "fetch",
    }
}

/// Runs a parsed command and returns its output table plus input checksums.
pub fn execute(
    global: &GlobalArgs,
    command: &Command,
) -> Result<(Output, BTreeMap<String, String>)> {
    match command {
        Command::CrTable { rmax, extra } => {
            Ok((cr_table(*rmax, extra, global.tol)?, BTreeMap::new()))
        }
        Command::Gue {
            c,
            dim,
            matrices,
            bulk_fraction,
            quad_order,
        } => {
            let mut cfg = GueSampleConfig::new(*dim, *matrices, global.seed.unwrap_or(0))?;
            cfg.bulk_fraction = *bulk_fraction;
            cfg.validate()?;
            Ok((gue_table(c, &cfg, *quad_order)?, BTreeMap::new()))
        }
        Command::Fetch { url } => {
            let dir = global.cache_dir.clone().unwrap_or_else(default_cache_dir);
            let table = fetch_remote(url, &dir, global.data_format)?;
            let cached = crate::cache::cache_path(url, &dir);
            let mut out = Output::new(&["url", "cache_path", "count", "last_ordinate"]);
            out.push(vec![
                url.as_str().into(),
                cached.display().to_string().as_str().into(),
                table.len().into(),
                table.height_max().into(),
            ]);
            let mut sums = BTreeMap::new();
            sums.insert(url.clone(), sha256_file(&cached)?);
            Ok((out, sums))
        }
        _ => {
            let inputs = load_inputs(global)?;
            let out = table_command(&inputs.table, global, command)?;
            Ok((out, inputs.checksums))
        }
    }
}

fn table_command(table: &OrdinateTable, global: &GlobalArgs, command: &Command) -> Result<Output> {
    match command {
        Command::Runs {
            r,
            c,
            height,
            literal,
        } => {
            check_resolution(table, moderate_threshold(*height, *c)?)?;
            let report = gaps::count_runs(table, *r, *c, *height)?;
            let mut out = Output::new(&["class", "j", "count"]);
            out.push(vec!["n_total".into(), 0usize.into(), report.n_total.into()]);
            out.push(vec!["n_runs".into(), (*r).into(), report.n_runs.into()]);
            for (j, s) in report.s_sizes.iter().enumerate() {
                out.push(vec!["s_j".into(), (j + 1).into(), (*s).into()]);
            }
            out.push(vec![
                "partition_residual".into(),
                0usize.into(),
                Cell::Int(report.partition_residual),
            ]);
            if *literal {
                for (j, s) in gaps::partition_sj_literal(table, *r, *c, *height)?
                    .iter()
                    .enumerate()
                {
                    out.push(vec!["s_j_literal".into(), (j + 1).into(), (*s).into()]);
                }
            }
            Ok(out)
        }
        Command::Pc { c, height } => {
            let tol = positive_tol(global.tol, 1e-12)?;
            let mut out =
                Output::new(&["c_global_units", "threshold_abs", "pair_correlation", "f_c"]);
            for &ci in c {
                let thr = moderate_threshold(*height, ci)?;
                check_resolution(table, thr)?;
                let pc = gaps::empirical_pair_correlation(table, ci, *height)?;
                let f = analytic::f(ci, tol)?.value;
                out.push(vec![ci.into(), thr.into(), pc.into(), f.into()]);
            }
            Ok(out)
        }
        Command::Spacing { ell, c, height } => {
            let mut out = Output::new(&[
                "ell",
                "c_global_units",
                "threshold_abs",
                "spacing_cdf",
                "sine_kernel_nn_cdf",
            ]);
            for &ci in c {
                let thr = if ci == 0.0 {
                    0.0
                } else {
                    moderate_threshold(*height, ci)?
                };
                check_resolution(table, thr)?;
                let v = gaps::neighbor_spacing_cdf(table, *ell, ci, *height)?;
                let g = if *ell == 1 {
                    Cell::Float(gue::nn_cdf(ci)?)
                } else {
                    Cell::Text(String::new())
                };
                out.push(vec![(*ell).into(), ci.into(), thr.into(), v.into(), g]);
            }
            Ok(out)
        }
        Command::Ah { height } => {
            let h = gaps::ah_binning(table, *height)?;
            let mut out = Output::new(&["k", "half_integer_local_units", "count", "p"]);
            for (k, count) in &h.bin_counts {
                out.push(vec![
                    (*k).into(),
                    (*k as f64 / 2.0).into(),
                    (*count).into(),
                    h.p_values[k].into(),
                ]);
            }
            Ok(out)
        }
        Command::Windows {
            height,
            m,
            r,
            grid_step,
        } => {
            let cfg = WindowConfig::new(*height, *m, *r)?;
            let h = cfg.h();
            let step = grid_step.unwrap_or(h / 16.0);
            let variance = windows::variance_integral(table, *height, h, *m as f64)?;
            let scan = windows::good_sites(table, &cfg, step)?;
            let mut with_gap = 0usize;
            let mut min_slack = f64::INFINITY;
            for site in scan.good_sites() {
                let counts = windows::window_counts(table, site, &cfg)?;
                let gaps = windows::window_moderate_gap(
                    table,
                    site,
                    &cfg,
                    GapConvention::BoundaryInclusive,
                )?;
                if gaps.iter().all(|g| g.1) {
                    with_gap += 1;
                }
                for (c, g) in counts.iter().zip(&gaps) {
                    min_slack = min_slack.min(g.0 - h / (*c as f64 + 1.0));
                }
            }
            let n_good = scan.good.iter().filter(|&&g| g).count();
            let mut out = Output::new(&["quantity", "value"]);
            out.push(vec!["T".into(), (*height).into()]);
            out.push(vec!["m".into(), (*m).into()]);
            out.push(vec!["r".into(), (*r).into()]);
            out.push(vec!["h_abs".into(), h.into()]);
            out.push(vec!["gap_threshold_abs".into(), cfg.gap_threshold().into()]);
            out.push(vec!["variance_integral".into(), variance.into()]);
            out.push(vec![
                "variance_over_T_log_2m".into(),
                (variance / (*height * (2.0 * *m as f64).ln())).into(),
            ]);
            out.push(vec!["grid_step_abs".into(), step.into()]);
            out.push(vec!["grid_sites".into(), scan.sites.len().into()]);
            out.push(vec!["good_sites".into(), n_good.into()]);
            out.push(vec!["good_fraction".into(), scan.fraction().into()]);
            out.push(vec!["good_sites_with_moderate_gap".into(), with_gap.into()]);
            out.push(vec![
                "min_pigeonhole_slack_abs".into(),
                if n_good == 0 {
                    Cell::Text(String::new())
                } else {
                    min_slack.into()
                },
            ]);
            Ok(out)
        }
        Command::Xistar {
            n,
            count,
            c_exponent,
            delta,
            conjugates,
        } => {
            let tol = positive_tol(global.tol, 1e-9)?;
            let cfg = ZeroSumConfig::new(*delta, *conjugates)?;
            let mut out = Output::new(&[
                "n",
                "gamma_n",
                "gamma_n1",
                "gamma_star",
                "residual",
                "left_distance",
                "right_distance",
                "t_j",
                "t_j_below_next",
            ]);
            for k in *n..*n + *count {
                let cp = xi::find_gamma_star(table, k, &cfg, tol)?;
                let tj = xi::construct_tj(table, k, *c_exponent)?;
                out.push(vec![
                    k.into(),
                    cp.bracket.0.into(),
                    cp.bracket.1.into(),
                    cp.gamma_star.into(),
                    cp.residual.into(),
                    cp.left_distance.into(),
                    cp.right_distance.into(),
                    tj.t_j.into(),
                    tj.below_next.into(),
                ]);
            }
            Ok(out)
        }
        Command::CrTable { .. } | Command::Gue { .. } | Command::Fetch { .. } => unreachable!(),
    }
}

const CR_TABLE_R: [u32; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 100, 1000];

pub fn cr_table(rmax: u32, extra: &[u32], tol: Option<f64>) -> Result<Output> {
    if rmax < 1 {
        return Err(Error::argument("rmax must be at least 1"));
    }
    let tol = positive_tol(tol, 1e-12)?;
    let mut rs: Vec<u32> = CR_TABLE_R
        .iter()
        .chain(extra)
        .copied()
        .filter(|&r| r >= 1 && r <= rmax)
        .collect();
    rs.sort_unstable();
    rs.dedup();
    let mut out = Output::new(&["r", "c_r_mean_spacings", "f_c_r"]);
    for r in rs {
        let c = analytic::solve_cr(r, tol)?;
        let f = analytic::f(c, tol * 1e-2)?.value;
        out.push(vec![r.into(), c.into(), f.into()]);
    }
    Ok(out)
}

fn gue_table(c: &[f64], cfg: &GueSampleConfig, quad_order: usize) -> Result<Output> {
    let samples = gue::sample_gue(cfg)?;
    let spacings = gue::mc_spacings(&samples);
    let cdf = SpacingCdfTable::new(6.0, 0.01, quad_order, gue::DEFAULT_FD_STEP)?;
    let ks = cdf.ks_distance(&spacings);
    let mut out = Output::new(&[
        "c_mean_spacings",
        "nn_cdf",
        "mc_spacing_cdf",
        "mc_std_error",
        "ks_distance",
    ]);
    for &ci in c {
        let nn = gue::nn_cdf_with(ci, quad_order, gue::DEFAULT_FD_STEP)?;
        let mc = gue::mc_joint_from_samples(&samples, &[ci])?;
        out.push(vec![
            ci.into(),
            nn.into(),
            mc.value.into(),
            mc.std_error.into(),
            ks.into(),
        ]);
    }
    Ok(out)
}

/// Executes the command, writes its output and manifest, and returns the
/// process exit code.
pub fn run(cli: Cli) -> i32 {
    match run_inner(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("zetagaps: {e}");
            exit_code(&e)
        }
    }
}

fn run_inner(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let global = &cli.global;
    let (output, checksums) = match global.threads {
        Some(0) => return Err(Error::argument("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?
            .install(|| execute(global, &cli.command))?,
        None => execute(global, &cli.command)?,
    };
    let rendered = output.render(global.format)?;
    match &global.out {
        None => {
            std::io::stdout().write_all(rendered.as_bytes())?;
        }
        Some(path) => {
            std::fs::write(path, rendered.as_bytes())?;
            let manifest = RunManifest {
                command: command_name(&cli.command).to_string(),
                parameters: parameters(global, &cli.command),
                input_checksums: checksums,
                output_paths: vec![path.display().to_string()],
                wall_time_seconds: started.elapsed().as_secs_f64(),
                seed: global.seed,
            };
            std::fs::write(manifest_path(path), manifest.to_json()?)?;
        }
    }
    Ok(())
}
