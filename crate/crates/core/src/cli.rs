//! Command-line front end: config parsing, the five subcommands, and
//! CSV / JSON / SVG writers.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::dynamics::{
    analytic_frequencies, correlation_vector_2q, frequencies, generator, is_periodic, sector_lengths_3q,
    uniform_grid, ClosedForm, Propagator, MAX_DENOMINATOR, RATIO_TOL, SPECTRUM_TOL,
};
use crate::error::Error;
use crate::models::ModelSpec;
use crate::pauli::{CorrelationTensor, MultiIndex};
use crate::states::{bloch_vectors, rng_from_seed, StateKind, StateSpec, RNG_NAME};
use crate::stationary::{
    family_from_nullspace, gamel_check, nullspace, tetrahedron_vertices, DocumentedFamily, NULLSPACE_TOL,
};
use crate::verify::{self, VerifyOptions};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable overriding `state.seed`.
pub const SEED_ENV: &str = "CORRFLOW_SEED";

pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERIC: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "corrflow", version, about = "Correlation-tensor dynamics of two and three qubits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic frequencies and periodicity of the model.
    Frequencies(RunArgs),
    /// Trajectory of the reduced correlation coordinates.
    Evolve(RunArgs),
    /// Nullspace, stationary family and positivity region (two qubits).
    Stationary(RunArgs),
    /// Min/max of a metric over time for each value of a swept parameter.
    Sweep(RunArgs),
    /// Oracle-equivalence and reference-value self checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (stdout when omitted; overrides `output.path`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Append per-qubit Bloch vector columns to `evolve` output.
    #[arg(long)]
    pub bloch: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Accepted for symmetry with the other commands; unused.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override every check tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Fault injection: flip the sign of the εεε term in the 3-body probe.
    #[arg(long, hide = true)]
    pub flip_triple_epsilon: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_max: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Two column names to plot against each other in SVG output; the
    /// default plots every coordinate against t.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<[String; 2]>,
}

/// Either an explicit list or `{start, stop, steps}` (inclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, try_from = "Value")]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, steps: usize },
}

// Untagged enums buffer numbers in a way that breaks with arbitrary-precision
// JSON numbers, so go through `Value` explicitly.
impl TryFrom<Value> for Grid {
    type Error = String;

    fn try_from(v: Value) -> std::result::Result<Self, String> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Range {
            start: f64,
            stop: f64,
            steps: usize,
        }
        match v {
            Value::Array(_) => serde_json::from_value(v).map(Self::Values).map_err(|e| e.to_string()),
            Value::Object(_) => serde_json::from_value::<Range>(v)
                .map(|r| Self::Range { start: r.start, stop: r.stop, steps: r.steps })
                .map_err(|e| e.to_string()),
            other => Err(format!("grid must be a list or {{start, stop, steps}}, got {other}")),
        }
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Values(v) => v.clone(),
            Self::Range { start, stop, steps } => match *steps {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "T_AB2")]
    TabSquared,
    A2,
    A3,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Self::TabSquared => "T_AB2",
            Self::A2 => "A2",
            Self::A3 => "A3",
        }
    }

    fn qubits(self) -> usize {
        match self {
            Self::TabSquared => 2,
            Self::A2 | Self::A3 => 3,
        }
    }

    pub fn eval(self, t: &CorrelationTensor) -> crate::Result<f64> {
        Ok(match self {
            Self::TabSquared => correlation_vector_2q(t)?.tab_squared(),
            Self::A2 => sector_lengths_3q(t)?.a2,
            Self::A3 => sector_lengths_3q(t)?.a3,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted path into the model JSON, e.g. `field.2` or `params.D.0`.
    pub parameter: String,
    pub grid: Grid,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub state: StateSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => exit::CONFIG,
            Self::Numeric(_) => exit::NUMERIC,
            Self::VerifyFailed(_) => exit::VERIFY_FAILED,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Numeric(m) | Self::VerifyFailed(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Config(_)
            | Error::Json(_)
            | Error::Io(_)
            | Error::MalformedPair(_)
            | Error::InvalidWeights(_)
            | Error::InvalidIndex(_)
            | Error::UnsupportedSize(_)
            | Error::WrongSystemSize { .. }
            | Error::DimensionMismatch { .. }
            | Error::ParameterCount { .. }
            | Error::IdentityEntry(_)
            | Error::NonzeroIdentityCoupling(_)
            | Error::ThreeBodyTerm(_)
            | Error::NotPositive(_)
            | Error::OutOfDomain { .. } => Self::Config(msg),
            _ => Self::Numeric(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the file and applies the seed override from the environment.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Ok(s) = std::env::var(SEED_ENV) {
            cfg.state.seed = s
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV} must be an unsigned integer, got `{s}`")))?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.time.samples < 1 {
            return Err(CliError::Config("time.samples must be at least 1".into()));
        }
        if !(self.time.t_max > 0.0 && self.time.t_max.is_finite()) {
            return Err(CliError::Config("time.t_max must be positive".into()));
        }
        if let Some(s) = &self.sweep {
            if s.grid.values().is_empty() {
                return Err(CliError::Config("sweep grid is empty".into()));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of the resolved config.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn initial_state(&self) -> CliResult<CorrelationTensor> {
        Ok(self.state.build(self.model.qubits)?)
    }
}

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        // Collapse −0.
        "0.0000000000000000e0".into()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn json_num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::from_str(&fmt_num(x)).expect("formatted float is valid JSON")
    } else {
        Value::Null
    }
}

struct Header {
    command: &'static str,
    hash: String,
    rng: String,
}

impl Header {
    fn new(command: &'static str, cfg: &RunConfig) -> CliResult<Self> {
        let seed = match (cfg.state.kind, cfg.state.target_purity) {
            (StateKind::MixedRandom, Some(_)) => cfg.state.resolved_seed(cfg.model.qubits)?,
            _ => cfg.state.seed,
        };
        Ok(Self { command, hash: cfg.hash(), rng: format!("{RNG_NAME} seed={seed}") })
    }

    fn comment_lines(&self) -> Vec<String> {
        vec![
            format!("corrflow {VERSION} {}", self.command),
            format!("config-sha256 {}", self.hash),
            format!("rng {}", self.rng),
        ]
    }

    fn csv(&self) -> String {
        self.comment_lines().iter().map(|l| format!("# {l}\n")).collect()
    }

    fn json(&self) -> Value {
        serde_json::json!({
            "tool": "corrflow",
            "version": VERSION,
            "command": self.command,
            "config_sha256": self.hash,
            "rng": self.rng,
        })
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Config(e.to_string()))
        }
    }
}

fn resolve_out<'a>(args: &'a RunArgs, cfg: &'a RunConfig) -> Option<&'a Path> {
    args.out.as_deref().or(cfg.output.path.as_deref())
}

fn resolve_format(args: &RunArgs, cfg: &RunConfig) -> Format {
    args.format.or(cfg.output.format).unwrap_or(Format::Csv)
}

pub fn cmd_frequencies(args: &RunArgs) -> CliResult<()> {
    let cfg = RunConfig::load(&args.config)?;
    let text = frequencies_report(&cfg, resolve_format(args, &cfg))?;
    write_output(resolve_out(args, &cfg), &text)
}

pub fn frequencies_report(cfg: &RunConfig, format: Format) -> CliResult<String> {
    let j = cfg.model.coupling()?;
    let m = generator(&j)?;
    let spec = frequencies(&m, SPECTRUM_TOL)?;
    let per = is_periodic(&spec, MAX_DENOMINATOR, RATIO_TOL);
    let analytic = if j.qubits() == 2 { ClosedForm::detect(&j) } else { None };
    let ana_spec = analytic.map(|c| analytic_frequencies(&c, SPECTRUM_TOL));
    let deviation = ana_spec.as_ref().map(|a| spec.max_relative_deviation(a));
    let header = Header::new("frequencies", cfg)?;

    match format {
        Format::Json => {
            let list = |s: &crate::dynamics::FrequencySpectrum| -> Value {
                s.frequencies
                    .iter()
                    .map(|&(w, k)| serde_json::json!({ "omega": json_num(w), "multiplicity": k }))
                    .collect()
            };
            let mut v = serde_json::json!({
                "header": header.json(),
                "frequencies": list(&spec),
                "zero_count": spec.zero_count,
                "periodic": per.periodic,
                "period": per.period.map_or(Value::Null, json_num),
            });
            if let Some(a) = &ana_spec {
                v["analytic"] = list(a);
                v["max_relative_deviation"] = deviation.flatten().map_or(Value::Null, json_num);
            }
            Ok(serde_json::to_string_pretty(&v).expect("json") + "\n")
        }
        Format::Csv | Format::Svg => {
            let mut s = header.csv();
            let _ = writeln!(s, "# zero_count {}", spec.zero_count);
            let _ = writeln!(s, "# periodic {}", per.periodic);
            if let Some(p) = per.period {
                let _ = writeln!(s, "# period {}", fmt_num(p));
            }
            if let Some(dev) = deviation {
                match dev {
                    Some(d) => {
                        let _ = writeln!(s, "# analytic max_relative_deviation {}", fmt_num(d));
                    }
                    None => {
                        let _ = writeln!(s, "# analytic multiplicities differ");
                    }
                }
            }
            s.push_str("source,omega,multiplicity\n");
            for &(w, k) in &spec.frequencies {
                let _ = writeln!(s, "numeric,{},{k}", fmt_num(w));
            }
            if let Some(a) = &ana_spec {
                for &(w, k) in &a.frequencies {
                    let _ = writeln!(s, "analytic,{},{k}", fmt_num(w));
                }
            }
            Ok(s)
        }
    }
}

/// Column names and rows of a trajectory table.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn evolve_table(cfg: &RunConfig, bloch: bool) -> CliResult<Table> {
    let j = cfg.model.coupling()?;
    let prop = Propagator::new(&generator(&j)?)?;
    let t0 = cfg.initial_state()?;
    let n = j.qubits();
    let mut columns: Vec<String> = if n == 2 {
        ["t", "T_A", "T_B", "T_AB", "purity"].map(String::from).to_vec()
    } else {
        ["t", "A1", "A2", "A3", "purity"].map(String::from).to_vec()
    };
    if bloch {
        for q in 1..=n {
            for axis in ["x", "y", "z"] {
                columns.push(format!("b{q}_{axis}"));
            }
        }
    }
    let mut rows = Vec::with_capacity(cfg.time.samples);
    for t in uniform_grid(cfg.time.t_max, cfg.time.samples) {
        let tt = prop.propagate(&t0, t)?;
        let mut row = vec![t];
        if n == 2 {
            let v = correlation_vector_2q(&tt)?;
            row.extend([v.t_a, v.t_b, v.t_ab]);
        } else {
            let a = sector_lengths_3q(&tt)?;
            row.extend([a.a1, a.a2, a.a3]);
        }
        row.push(tt.purity());
        if bloch {
            for b in bloch_vectors(&tt) {
                row.extend(b);
            }
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

fn table_csv(header: &Header, table: &Table) -> String {
    header.csv() + &table_body_csv(table)
}

fn table_body_csv(table: &Table) -> String {
    let mut s = table.columns.join(",");
    s.push('\n');
    for r in &table.rows {
        s.push_str(&r.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

fn table_json(header: &Header, table: &Table) -> String {
    let rows: Vec<Value> = table.rows.iter().map(|r| r.iter().map(|&x| json_num(x)).collect()).collect();
    let v = serde_json::json!({ "header": header.json(), "columns": table.columns, "rows": rows });
    serde_json::to_string_pretty(&v).expect("json") + "\n"
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Polylines of (x, y_k) series with ticks on both axes.
pub fn svg_plot(header_lines: &[String], x_label: &str, x: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let (x0, x1) = bounds(x.iter().copied());
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.1.iter().copied()));
    let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (SVG_W - 2.0 * MARGIN);
    let py = |v: f64| SVG_H - MARGIN - (v - y0) / (y1 - y0) * (SVG_H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}">"#);
    for l in header_lines {
        let _ = writeln!(s, "<!-- {l} -->");
    }
    let (bx, by) = (MARGIN, SVG_H - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{bx} {top} L{bx} {by} L{right} {by}" fill="none" stroke="black"/>"#,
        top = MARGIN,
        right = SVG_W - MARGIN
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (tx, ty) = (px(xv), py(yv));
        let _ = writeln!(s, r#"<line x1="{tx:.2}" y1="{by}" x2="{tx:.2}" y2="{:.2}" stroke="black"/>"#, by + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{tx:.2}" y="{:.2}" font-size="10" text-anchor="middle">{xv:.3}</text>"#,
            by + 18.0
        );
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{ty:.2}" x2="{bx}" y2="{ty:.2}" stroke="black"/>"#, bx - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{yv:.3}</text>"#,
            bx - 8.0,
            ty + 3.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{x_label}</text>"#,
        SVG_W / 2.0,
        SVG_H - 8.0
    );
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = x.iter().zip(ys).map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{color}">{name}</text>"#,
            SVG_W - MARGIN + 4.0,
            MARGIN + 14.0 * k as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

fn table_svg(header: &Header, table: &Table, projection: Option<&[String; 2]>) -> CliResult<String> {
    let col = |name: &str| -> CliResult<Vec<f64>> {
        let i = table
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Config(format!("unknown projection column `{name}`")))?;
        Ok(table.rows.iter().map(|r| r[i]).collect())
    };
    match projection {
        Some([a, b]) => Ok(svg_plot(&header.comment_lines(), a, &col(a)?, &[(b.clone(), col(b)?)])),
        None => {
            let series = table.columns[1..4]
                .iter()
                .map(|c| Ok((c.clone(), col(c)?)))
                .collect::<CliResult<Vec<_>>>()?;
            Ok(svg_plot(&header.comment_lines(), "t", &col("t")?, &series))
        }
    }
}

pub fn cmd_evolve(args: &RunArgs) -> CliResult<()> {
    let cfg = RunConfig::load(&args.config)?;
    let text = evolve_report(&cfg, resolve_format(args, &cfg), args.bloch)?;
    write_output(resolve_out(args, &cfg), &text)
}

pub fn evolve_report(cfg: &RunConfig, format: Format, bloch: bool) -> CliResult<String> {
    let header = Header::new("evolve", cfg)?;
    let table = evolve_table(cfg, bloch)?;
    match format {
        Format::Csv => Ok(table_csv(&header, &table)),
        Format::Json => Ok(table_json(&header, &table)),
        Format::Svg => table_svg(&header, &table, cfg.output.projection.as_ref()),
    }
}

fn word_label(i: usize, qubits: usize) -> String {
    let digits: String = MultiIndex::from_flat(i, qubits).indices().iter().map(|p| p.value().to_string()).collect();
    format!("S{digits}")
}

/// Points sampled in the positivity-region summary.
pub const REGION_SAMPLES: usize = 2000;

pub fn cmd_stationary(args: &RunArgs) -> CliResult<()> {
    let cfg = RunConfig::load(&args.config)?;
    let text = stationary_report(&cfg, resolve_format(args, &cfg))?;
    write_output(resolve_out(args, &cfg), &text)
}

pub fn stationary_report(cfg: &RunConfig, format: Format) -> CliResult<String> {
    if cfg.model.qubits != 2 {
        return Err(CliError::Config("stationary analysis needs a 2-qubit model".into()));
    }
    let header = Header::new("stationary", cfg)?;
    let j = cfg.model.coupling()?;
    let m = generator(&j)?;
    let basis = nullspace(&m, NULLSPACE_TOL)?;
    let documented = DocumentedFamily::detect(&j, &m);
    let family = match documented {
        Some(d) => d.family(),
        None => family_from_nullspace(&basis, 2)?,
    };
    let vertices = match documented {
        Some(d) => Some(tetrahedron_vertices(d)?),
        None => None,
    };

    // Uniform samples in [−½, ½]^k; fraction passing the trace inequalities.
    let mut rng = rng_from_seed(cfg.state.seed);
    let k = family.parameter_count();
    let mut inside = 0usize;
    for _ in 0..REGION_SAMPLES {
        let p: Vec<f64> = (0..k).map(|_| rng.random_range(-0.5..0.5)).collect();
        if gamel_check(&family.member(&p)?)?.satisfied {
            inside += 1;
        }
    }
    let fraction = inside as f64 / REGION_SAMPLES as f64;
    let terms = family.terms();

    match format {
        Format::Json => {
            let v = serde_json::json!({
                "header": header.json(),
                "nullspace_dimension": basis.dim(),
                "nullspace": basis.vectors.iter()
                    .map(|v| v.iter().map(|&x| json_num(x)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                "documented_family": documented.map(|d| d.name()),
                "parameters": family.parameter_names,
                "terms": terms.iter().map(|&(w, p, c)| serde_json::json!({
                    "word": word_label(w, 2),
                    "parameter": family.parameter_names[p],
                    "coefficient": json_num(c),
                })).collect::<Vec<_>>(),
                "vertices": vertices.as_ref().map(|vs| vs.iter()
                    .map(|v| v.iter().map(|&x| json_num(x)).collect::<Vec<_>>())
                    .collect::<Vec<_>>()),
                "region_samples": REGION_SAMPLES,
                "region_fraction_inside": json_num(fraction),
            });
            Ok(serde_json::to_string_pretty(&v).expect("json") + "\n")
        }
        Format::Csv | Format::Svg => {
            let mut s = header.csv();
            let _ = writeln!(s, "# nullspace dimension {}", basis.dim());
            s.push_str("section,label,values\n");
            for (i, v) in basis.vectors.iter().enumerate() {
                let vals: Vec<String> = v.iter().map(|&x| fmt_num(x)).collect();
                let _ = writeln!(s, "nullspace,v{i},{}", vals.join(" "));
            }
            let fam_name = documented.map_or_else(|| "generic".to_string(), |d| d.name());
            let _ = writeln!(s, "family,name,{fam_name}");
            let _ = writeln!(s, "family,parameters,{}", family.parameter_names.join(" "));
            let _ = writeln!(s, "family,term,S00 1/4");
            for &(w, p, c) in &terms {
                let _ = writeln!(
                    s,
                    "family,term,{} {} {}",
                    word_label(w, 2),
                    family.parameter_names[p],
                    fmt_num(c)
                );
            }
            match &vertices {
                Some(vs) => {
                    for (i, v) in vs.iter().enumerate() {
                        let vals: Vec<String> = v.iter().map(|&x| fmt_num(x)).collect();
                        let _ = writeln!(s, "vertex,{i},{}", vals.join(" "));
                    }
                }
                None => s.push_str("vertex,none,\n"),
            }
            let _ = writeln!(s, "region,samples,{REGION_SAMPLES}");
            let _ = writeln!(s, "region,fraction_inside,{}", fmt_num(fraction));
            Ok(s)
        }
    }
}

/// Sets the value at a dotted path (`field.2`, `params.J`, ...) in a JSON
/// value. Array indices must exist; object keys are created.
pub fn set_path(root: &mut Value, path: &str, value: f64) -> CliResult<()> {
    let mut cur = root;
    for part in path.split('.') {
        cur = match cur {
            Value::Array(items) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| CliError::Config(format!("`{part}` in `{path}` is not an array index")))?;
                let len = items.len();
                items
                    .get_mut(i)
                    .ok_or_else(|| CliError::Config(format!("index {i} out of range ({len}) in `{path}`")))?
            }
            Value::Object(map) => map.entry(part.to_string()).or_insert(Value::Null),
            _ => return Err(CliError::Config(format!("cannot descend into `{part}` of `{path}`"))),
        };
    }
    *cur = json_num(value);
    Ok(())
}

/// (parameter value, min, max) per grid point, in grid order.
pub fn sweep_rows(cfg: &RunConfig) -> CliResult<Vec<[f64; 3]>> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("config has no `sweep` section".into()))?;
    if sweep.metric.qubits() != cfg.model.qubits {
        return Err(CliError::Config(format!(
            "metric {} needs a {}-qubit model",
            sweep.metric.label(),
            sweep.metric.qubits()
        )));
    }
    let t0 = cfg.initial_state()?;
    let times = uniform_grid(cfg.time.t_max, cfg.time.samples);
    let base = serde_json::to_value(&cfg.model).expect("model serializes");
    let grid = sweep.grid.values();
    grid.par_iter()
        .map(|&p| {
            let mut v = base.clone();
            set_path(&mut v, &sweep.parameter, p)?;
            let model: ModelSpec = serde_json::from_value(v)
                .map_err(|e| CliError::Config(format!("sweep parameter `{}`: {e}", sweep.parameter)))?;
            let prop = Propagator::new(&generator(&model.coupling()?)?)?;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &t in &times {
                let x = sweep.metric.eval(&prop.propagate(&t0, t)?)?;
                lo = lo.min(x);
                hi = hi.max(x);
            }
            Ok([p, lo, hi])
        })
        .collect()
}

pub fn cmd_sweep(args: &RunArgs) -> CliResult<()> {
    let cfg = RunConfig::load(&args.config)?;
    let text = sweep_report(&cfg, resolve_format(args, &cfg))?;
    write_output(resolve_out(args, &cfg), &text)
}

pub fn sweep_report(cfg: &RunConfig, format: Format) -> CliResult<String> {
    let header = Header::new("sweep", cfg)?;
    let rows = sweep_rows(cfg)?;
    let table = Table {
        columns: ["param", "min_metric", "max_metric"].map(String::from).to_vec(),
        rows: rows.iter().map(|r| r.to_vec()).collect(),
    };
    match format {
        Format::Csv => {
            let mut s = header.csv();
            let sw = cfg.sweep.as_ref().expect("checked in sweep_rows");
            let _ = writeln!(s, "# parameter {} metric {}", sw.parameter, sw.metric.label());
            s.push_str(&table_body_csv(&table));
            Ok(s)
        }
        Format::Json => Ok(table_json(&header, &table)),
        Format::Svg => {
            let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let series = vec![
                ("min".to_string(), rows.iter().map(|r| r[1]).collect()),
                ("max".to_string(), rows.iter().map(|r| r[2]).collect()),
            ];
            let label = cfg.sweep.as_ref().map_or("param", |s| s.parameter.as_str());
            Ok(svg_plot(&header.comment_lines(), label, &x, &series))
        }
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let opts = VerifyOptions { tolerance: args.tolerance, flip_triple_epsilon: args.flip_triple_epsilon };
    let results = verify::run(opts)?;
    let mut text = format!("# corrflow {VERSION} verify\n");
    for r in &results {
        text.push_str(&r.line());
        text.push('\n');
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    let _ = writeln!(text, "{} of {} checks passed", results.len() - failed.len(), results.len());
    match &args.out {
        Some(p) => write_output(Some(p), &text)?,
        None => print!("{text}"),
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(format!("failed: {}", failed.join("; "))))
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Frequencies(a) => cmd_frequencies(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Stationary(a) => cmd_stationary(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("corrflow: {}", e.message());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(model: &str, state: &str) -> RunConfig {
        RunConfig::from_json(&format!(
            r#"{{"model":{model},"state":{state},"time":{{"t_max":3.0,"samples":31}}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_num(-0.1), "-1.0000000000000001e-1");
        assert_eq!(json_num(0.1).to_string(), "1.0000000000000001e-1");
    }

    #[test]
    fn config_validation() {
        let bad = r#"{"model":{"qubits":2,"model":"xxx","params":{"J":1}},"state":{"kind":"basis_00"},"time":{"t_max":1.0,"samples":0}}"#;
        assert!(matches!(RunConfig::from_json(bad), Err(CliError::Config(_))));
        let bad = r#"{"model":{"qubits":2,"model":"xxx","params":{"J":1}},"state":{"kind":"basis_00"},"time":{"t_max":-1.0,"samples":3}}"#;
        assert!(matches!(RunConfig::from_json(bad), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::from_json("{"), Err(CliError::Config(_))));
    }

    #[test]
    fn grid_forms() {
        assert_eq!(Grid::Range { start: 0.0, stop: 1.0, steps: 3 }.values(), vec![0.0, 0.5, 1.0]);
        let g: Grid = serde_json::from_str("[1, 2.5]").unwrap();
        assert_eq!(g.values(), vec![1.0, 2.5]);
        let g: Grid = serde_json::from_str(r#"{"start":0,"stop":3,"steps":13}"#).unwrap();
        assert_eq!(g.values().len(), 13);
    }

    #[test]
    fn set_path_edits_model() {
        let mut v = serde_json::json!({"field": [0.0, 0.0, 0.0], "params": {"J": 1.0}});
        set_path(&mut v, "field.2", 2.5).unwrap();
        set_path(&mut v, "params.J", 0.5).unwrap();
        assert_eq!(v["field"][2].as_f64(), Some(2.5));
        assert_eq!(v["params"]["J"].as_f64(), Some(0.5));
        assert!(set_path(&mut v, "field.7", 1.0).is_err());
        assert!(set_path(&mut v, "params.J.0", 1.0).is_err());
    }

    #[test]
    fn evolve_columns() {
        let cfg = config(r#"{"qubits":2,"model":"dm","params":{"D":[1,1,1]}}"#, r#"{"kind":"basis_00"}"#);
        let t = evolve_table(&cfg, true).unwrap();
        assert_eq!(t.columns[..5], ["t", "T_A", "T_B", "T_AB", "purity"]);
        assert_eq!(t.columns.len(), 11);
        assert_eq!(t.rows.len(), 31);
        let cfg = config(r#"{"qubits":3,"model":"xxx","params":{"J":1}}"#, r#"{"kind":"basis_000"}"#);
        let t = evolve_table(&cfg, false).unwrap();
        assert_eq!(t.columns, ["t", "A1", "A2", "A3", "purity"]);
    }

    #[test]
    fn frequencies_report_lists_spectrum() {
        let cfg = config(r#"{"qubits":2,"model":"xxx","params":{"J":1},"field":[0,0,1]}"#, r#"{"kind":"basis_00"}"#);
        let s = frequencies_report(&cfg, Format::Csv).unwrap();
        assert!(s.contains("# zero_count 2"));
        assert!(s.contains("# periodic true"));
        let numeric: Vec<(f64, usize)> = s
            .lines()
            .filter_map(|l| l.strip_prefix("numeric,"))
            .map(|l| {
                let (w, k) = l.split_once(',').unwrap();
                (w.parse().unwrap(), k.parse().unwrap())
            })
            .collect();
        assert_eq!(numeric.len(), 3);
        for ((w, k), (w0, k0)) in numeric.iter().zip([(1.0, 3), (2.0, 2), (3.0, 1)]) {
            assert!((w - w0).abs() < 1e-12);
            assert_eq!(*k, k0);
        }
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::Config("x".into())).exit_code(), exit::CONFIG);
        assert_eq!(CliError::from(Error::Eigen("x".into())).exit_code(), exit::NUMERIC);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config(r#"{"qubits":2,"model":"xxx","params":{"J":1}}"#, r#"{"kind":"basis_00"}"#);
        let b = config(r#"{"qubits":2,"model":"xxx","params":{"J":2}}"#, r#"{"kind":"basis_00"}"#);
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
