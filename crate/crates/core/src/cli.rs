//! The `sandwich` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a verification fails, 2 on
//! usage or configuration errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bounds::{
    implicit_h_lower_bound, lambda_upper_from_h, sandwich, BoundReport, InputKind, MeasureRegime, TimePoint,
};
use crate::error::{Error, Result};
use crate::heat::{log_grid, VerificationRecord};
use crate::space::{Preset, SpaceSpec, PRESET_NAMES};
use crate::suite::{constants, oracle_records, sharpness, verify_space, SuiteOptions};

/// Environment variable naming the directory for output files.
pub const OUTPUT_DIR_ENV: &str = "SANDWICH_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sandwich", version, about = "Cheeger-Buser spectral bounds under curvature lower bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound table for given h or lambda values.
    Bounds(BoundsArgs),
    /// Invert the implicit bound: h -> largest lambda, or lambda -> smallest h.
    Invert(BoundsArgs),
    /// Run the verification suite on a model space.
    Verify(VerifyArgs),
    /// Equality case of the explicit bound on the Gaussian space.
    Sharpness(SharpnessArgs),
    /// Bound surfaces over (K, h) or (K, lambda) grids.
    Sweep(SweepArgs),
    /// Closed-form constants of the explicit bounds.
    Constants(OutputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Finite,
    Infinite,
}

impl From<RegimeArg> for MeasureRegime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Finite => MeasureRegime::FiniteNormalized,
            RegimeArg::Infinite => MeasureRegime::Infinite,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; relative paths resolve against $SANDWICH_OUTPUT_DIR when set.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// Curvature lower bound.
    #[arg(long = "K", short = 'K', allow_hyphen_values = true)]
    pub k: f64,
    /// Cheeger constant(s).
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "lambda", required_unless_present = "lambda")]
    pub h: Vec<f64>,
    /// Spectral value(s): lambda1, or lambda0 for infinite measure.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub lambda: Vec<f64>,
    /// Lower bound for K/lambda (needed by the K > 0 explicit bound).
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, value_enum, default_value = "finite")]
    pub regime: RegimeArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Preset name, or `all` for every preset plus the constants and oracles.
    #[arg(long)]
    pub space: String,
    #[arg(long, default_value_t = 2001)]
    pub n: usize,
    /// Truncation radius for line presets.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Preset parameters as name=value (L, a, b).
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long, default_value_t = 1e-2)]
    pub t_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 24)]
    pub t_points: usize,
    /// Skip the grid-doubling refinement checks.
    #[arg(long)]
    pub no_refine: bool,
    /// Random profiles for the co-area check.
    #[arg(long, default_value_t = 40)]
    pub coarea_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Tolerance of the sandwich records h²/4 ≤ λ ≤ explicit and h ≥ implicit.
    #[arg(long, default_value_t = crate::suite::SANDWICH_TOLERANCE)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SharpnessArgs {
    #[arg(long, default_value_t = 4001)]
    pub n: usize,
    #[arg(long, default_value_t = 8.0)]
    pub radius: f64,
    /// Override c (defaults to K/lambda1).
    #[arg(long)]
    pub c: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Curvature grid min:max:points.
    #[arg(long = "K", short = 'K', value_parser = parse_grid, allow_hyphen_values = true)]
    pub k: Grid,
    /// Cheeger-constant grid min:max:points.
    #[arg(long, value_parser = parse_grid, conflicts_with = "lambda", required_unless_present = "lambda")]
    pub h: Option<Grid>,
    /// Spectral-value grid min:max:points.
    #[arg(long, value_parser = parse_grid)]
    pub lambda: Option<Grid>,
    /// Log-spaced input grid instead of linear.
    #[arg(long)]
    pub log: bool,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, value_enum, default_value = "finite")]
    pub regime: RegimeArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// An inclusive grid `min:max:points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self, log: bool) -> Vec<f64> {
        if log {
            return log_grid(self.min, self.max, self.points);
        }
        match self.points {
            0 => Vec::new(),
            1 => vec![self.min],
            p => (0..p)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (p - 1) as f64)
                .collect(),
        }
    }
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, points] = parts[..] else {
        return Err(format!("expected min:max:points, got `{s}`"));
    };
    let min: f64 = min.trim().parse().map_err(|e| format!("bad grid minimum `{min}`: {e}"))?;
    let max: f64 = max.trim().parse().map_err(|e| format!("bad grid maximum `{max}`: {e}"))?;
    let points: usize = points.trim().parse().map_err(|e| format!("bad point count `{points}`: {e}"))?;
    if !(min.is_finite() && max.is_finite()) || max < min {
        return Err(format!("grid bounds must be finite with min <= max, got {min}:{max}"));
    }
    Ok(Grid { min, max, points })
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad value for {name}: {e}"))?;
    Ok((name.trim().to_string(), value))
}

/// A rectangular result table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn cell(v: &Value) -> String {
        match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Argument(format!("writing CSV: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Self::cell)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Argument(format!("writing CSV: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Argument(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .map(|c| c.to_string())
                        .zip(row.iter().cloned())
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).map_err(|e| Error::Argument(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
        }
    }
}

/// A float as JSON; non-finite values become strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub const BOUNDS_COLUMNS: [&str; 11] = [
    "regime",
    "K",
    "input_kind",
    "input",
    "cheeger_lower",
    "implicit",
    "argmax_t",
    "explicit",
    "explicit_regime",
    "c",
    "lambda_implicit",
];

pub const RECORD_COLUMNS: [&str; 8] = ["inequality_id", "worst_slack", "tolerance", "pass", "N", "dx", "dt", "notes"];

fn bounds_row(r: &BoundReport<f64>) -> Vec<Value> {
    let argmax = match r.implicit_argmax_t {
        TimePoint::Infinity => json!("inf"),
        TimePoint::Finite(t) => num(t),
    };
    vec![
        json!(r.regime.to_string()),
        num(r.k),
        json!(r.input_kind.to_string()),
        num(r.input_value),
        opt(r.cheeger_lower),
        num(r.implicit_value),
        argmax,
        num(r.explicit.value),
        json!(r.explicit.regime.to_string()),
        opt(r.explicit.c_used),
        opt(r.lambda_implicit),
    ]
}

fn record_row(r: &VerificationRecord) -> Vec<Value> {
    vec![
        json!(r.inequality_id),
        num(r.worst_slack),
        num(r.tolerance),
        json!(r.pass),
        json!(r.n),
        num(r.dx),
        num(r.dt),
        json!(r.notes),
    ]
}

fn inputs(args: &BoundsArgs) -> (InputKind, &[f64]) {
    if args.h.is_empty() {
        (InputKind::FromLambda, &args.lambda)
    } else {
        (InputKind::FromH, &args.h)
    }
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<Table> {
    let (kind, values) = inputs(args);
    let mut table = Table::new(&BOUNDS_COLUMNS);
    for &v in values {
        let report = sandwich(kind, v, args.k, args.regime.into(), args.c)?;
        table.rows.push(bounds_row(&report));
    }
    Ok(table)
}

pub fn cmd_invert(args: &BoundsArgs) -> Result<Table> {
    let (kind, values) = inputs(args);
    let regime: MeasureRegime = args.regime.into();
    let mut table = Table::new(&["regime", "K", "input_kind", "input", "output_kind", "output"]);
    for &v in values {
        let (out_kind, out) = match kind {
            InputKind::FromH => ("lambda_upper", lambda_upper_from_h(v, args.k, regime)?),
            InputKind::FromLambda => ("h_lower", implicit_h_lower_bound(v, args.k, regime)?),
        };
        table.rows.push(vec![
            json!(regime.to_string()),
            num(args.k),
            json!(kind.to_string()),
            num(v),
            json!(out_kind),
            num(out),
        ]);
    }
    Ok(table)
}

/// Default presets of `verify --space all`.
pub fn default_presets() -> Vec<Preset<f64>> {
    let none = BTreeMap::new();
    PRESET_NAMES
        .iter()
        .map(|name| Preset::from_name(name, &none).expect("known preset"))
        .collect()
}

/// Verification result: the record table plus one summary line per space.
pub struct VerifyOutcome {
    pub table: Table,
    pub summaries: Vec<String>,
    pub pass: bool,
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<VerifyOutcome> {
    if args.t_points == 0 || !(args.t_min > 0.0 && args.t_max >= args.t_min && args.t_max.is_finite()) {
        return Err(Error::Argument("the t-grid needs 0 < t_min <= t_max and at least one point".into()));
    }
    let opts = SuiteOptions {
        t_grid: log_grid(args.t_min, args.t_max, args.t_points),
        refine: !args.no_refine,
        coarea_samples: args.coarea_samples,
        seed: args.rng_seed,
        sandwich_tolerance: args.tol,
    };
    if !(args.tol >= 0.0 && args.tol.is_finite()) {
        return Err(Error::Argument(format!("--tol must be finite and >= 0, got {}", args.tol)));
    }
    let all = args.space == "all";
    let presets = if all {
        if !args.params.is_empty() {
            return Err(Error::Argument("--param cannot be combined with --space all".into()));
        }
        default_presets()
    } else {
        let params: BTreeMap<String, f64> = args.params.iter().cloned().collect();
        vec![Preset::from_name(&args.space, &params)?]
    };
    let mut table = Table::new(&RECORD_COLUMNS);
    let mut summaries = Vec::new();
    let mut pass = true;
    for preset in presets {
        let mut spec = SpaceSpec::new(preset, args.n);
        if let Some(r) = args.radius {
            spec = spec.with_radius(r);
        }
        let report = verify_space(&spec, &opts)?;
        let s = &report.summary;
        summaries.push(format!(
            "{}: N={} K={} {}={:.6} h={:.6} h^2/4={:.6} explicit={:.6} implicit_h={:.6} [{}]",
            s.space,
            s.n,
            s.k,
            s.spectral_kind,
            s.lambda,
            s.h,
            s.cheeger_lower,
            s.explicit_upper,
            s.implicit_h_lower,
            if report.all_pass() { "pass" } else { "FAIL" }
        ));
        pass &= report.all_pass();
        for mut r in report.records {
            r.notes = format!("{}: {}", s.space, r.notes);
            table.rows.push(record_row(&r));
        }
    }
    if all {
        let mut extra = true;
        let c = constants();
        for (name, ok) in c.checks() {
            let r = VerificationRecord {
                pass: ok,
                ..VerificationRecord::new("constants", 0.0, 0.0, (0, 0.0, 0.0), name)
            };
            extra &= ok;
            table.rows.push(record_row(&r));
        }
        for r in oracle_records(args.rng_seed)? {
            extra &= r.pass;
            table.rows.push(record_row(&r));
        }
        pass &= extra;
        summaries.push(format!("constants and oracles: [{}]", if extra { "pass" } else { "FAIL" }));
    }
    Ok(VerifyOutcome { table, summaries, pass })
}

pub fn cmd_sharpness(args: &SharpnessArgs) -> Result<Table> {
    let r = sharpness(args.n, args.radius, args.c)?;
    let mut table = Table::new(&["quantity", "value"]);
    let rows: [(&str, Value); 13] = [
        ("N", json!(r.n)),
        ("radius", num(r.radius)),
        ("K", num(r.k)),
        ("lambda1", num(r.lambda1)),
        ("h", num(r.h)),
        ("implicit", num(r.implicit)),
        ("c", num(r.c)),
        ("explicit", num(r.explicit)),
        ("sqrt_2_over_pi", num((2.0 / std::f64::consts::PI).sqrt())),
        ("h_gap", num(r.h_gap)),
        ("explicit_gap", num(r.explicit_gap)),
        ("h_gap_relative", num(r.h_gap_relative)),
        ("explicit_gap_relative", num(r.explicit_gap_relative)),
    ];
    for (k, v) in rows {
        table.rows.push(vec![json!(k), v]);
    }
    Ok(table)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Table> {
    let (kind, grid) = match (&args.h, &args.lambda) {
        (Some(g), None) => (InputKind::FromH, g),
        (None, Some(g)) => (InputKind::FromLambda, g),
        _ => return Err(Error::Argument("give exactly one of --h and --lambda".into())),
    };
    let mut columns = BOUNDS_COLUMNS.to_vec();
    columns.push("ratio");
    let mut table = Table::new(&columns);
    if args.log && grid.points > 0 && grid.min <= 0.0 {
        return Err(Error::Argument("a log grid needs a positive minimum".into()));
    }
    for k in args.k.values(false) {
        for v in grid.values(args.log) {
            let regime: MeasureRegime = args.regime.into();
            let report = match sandwich(kind, v, k, regime, args.c) {
                Ok(r) => r,
                Err(Error::Infeasible(_)) => {
                    let mut row = vec![Value::Null; BOUNDS_COLUMNS.len() + 1];
                    row[0] = json!(regime.to_string());
                    row[1] = num(k);
                    row[2] = json!(kind.to_string());
                    row[3] = num(v);
                    row[8] = json!("infeasible");
                    table.rows.push(row);
                    continue;
                }
                Err(e) => return Err(e),
            };
            // closed form over implicit bound, oriented so that >= 1 means weaker
            let ratio = match kind {
                InputKind::FromH => report.explicit.value / report.lambda_implicit.unwrap_or(f64::NAN),
                InputKind::FromLambda => report.implicit_value / report.explicit.value,
            };
            let mut row = bounds_row(&report);
            row.push(num(ratio));
            table.rows.push(row);
        }
    }
    Ok(table)
}

pub fn cmd_constants() -> (Table, bool) {
    let c = constants();
    let mut table = Table::new(&["quantity", "value"]);
    let rows = [
        ("M", c.m),
        ("T_star", c.t_star),
        ("two_over_pi", c.two_over_pi),
        ("four_over_pi_M2", c.flat_constant),
        ("pi", c.pi),
        ("kneg_linear", c.kneg_linear),
        ("kneg_linear_majorant", c.kneg_linear_majorant),
        ("kneg_quadratic", c.kneg_quadratic),
        ("kneg_quadratic_majorant", c.kneg_quadratic_majorant),
    ];
    for (k, v) in rows {
        table.rows.push(vec![json!(k), num(v)]);
    }
    let mut ok = true;
    for (name, pass) in c.checks() {
        table.rows.push(vec![json!(name), json!(pass)]);
        ok &= pass;
    }
    (table, ok)
}

fn emit(table: &Table, out: &OutputArgs, command: &str) -> Result<()> {
    let text = table.render(out.format)?;
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let ext = match out.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = match (&out.output, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(d)) => Some(d.join(format!("{command}.{ext}"))),
        (None, None) => None,
    };
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Error::Argument(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(&p, text).map_err(|e| Error::Argument(format!("{}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::Argument(format!("writing output: {e}")))
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Bounds(a) => emit(&cmd_bounds(a)?, &a.out, "bounds").map(|_| EXIT_OK),
        Command::Invert(a) => emit(&cmd_invert(a)?, &a.out, "invert").map(|_| EXIT_OK),
        Command::Sharpness(a) => emit(&cmd_sharpness(a)?, &a.out, "sharpness").map(|_| EXIT_OK),
        Command::Sweep(a) => emit(&cmd_sweep(a)?, &a.out, "sweep").map(|_| EXIT_OK),
        Command::Constants(out) => {
            let (table, ok) = cmd_constants();
            emit(&table, out, "constants")?;
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Verify(a) => {
            let outcome = cmd_verify(a)?;
            emit(&outcome.table, &a.out, "verify")?;
            for line in &outcome.summaries {
                eprintln!("{line}");
            }
            Ok(if outcome.pass { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

/// Parses arguments and runs the command; returns the process exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
