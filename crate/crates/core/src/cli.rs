//! `hpq` command-line front end.
//!
//! Exit codes: 0 success, 1 a checked residual exceeded the tolerance,
//! 2 invalid configuration, 3 numerical domain error.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bundle::{tension_field, vertical_energy, BundleMetricParams};
use crate::classification::{solve_classification_with, verify_sigma_identities_on, SolverConfig};
use crate::error::Error;
use crate::fields::{ConstantProfile, PowerProfile, QuadraticFormSpec, VectorFieldSpec};
use crate::geometry::{frame_raw, AmbientField, FrameStrategy, ManifoldModel, Point};
use crate::harmonicity::{residual_report, Equation};
use crate::oracle::{check_step, fd_cov_fn, FD_STEP};
use crate::sampling::{rng, sample_points, sphere_weights};

pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "hpq", version, about = "Residual checks for harmonic sections and maps into (TM, h_{p,q})")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a harmonicity residual on seeded sample points.
    Verify(CommonArgs),
    /// Check the σ_k identities for quadratic forms.
    Identities(CommonArgs),
    /// Run the quadratic-gradient classification solver.
    Classify(CommonArgs),
    /// Max/mean residual over a grid of (p, q, scale).
    Scan(CommonArgs),
    /// Tension field norms on sample points.
    Tension(CommonArgs),
    /// Monte Carlo vertical energy on a sphere.
    Energy(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Identities(_) => "identities",
            Command::Classify(_) => "classify",
            Command::Scan(_) => "scan",
            Command::Tension(_) => "tension",
            Command::Energy(_) => "energy",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Verify(a)
            | Command::Identities(a)
            | Command::Classify(a)
            | Command::Scan(a)
            | Command::Tension(a)
            | Command::Energy(a) => a,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// sphere:N, heisenberg, sl2 or s2xr
    #[arg(long)]
    pub model: Option<String>,
    /// hopf:K, rotation[:A,B,C], conformal:A,..., quadratic:D,...[@K],
    /// profiled:P, profiled-const:C, frame:I, zero; prefix "C*" scales
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, env = "HPQ_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum)]
    pub output: Option<OutputFormat>,
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// JSON file with any of the flags; explicit flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// section, killing, map, map-horizontal or map-vertical
    #[arg(long)]
    pub equation: Option<String>,
    /// Sphere dimension for identities / classify
    #[arg(long)]
    pub n: Option<usize>,
    /// Rows separated by ';', entries by ','
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    /// Number of random symmetric forms for identities
    #[arg(long)]
    pub forms: Option<usize>,
    /// Comma list or start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    pub p_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub q_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub scale_grid: Option<String>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub model: Option<String>,
    pub field: Option<String>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub output: Option<OutputFormat>,
    pub fd_step: Option<f64>,
    pub out: Option<PathBuf>,
    pub equation: Option<String>,
    pub n: Option<usize>,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub forms: Option<usize>,
    pub p_grid: Option<Vec<f64>>,
    pub q_grid: Option<Vec<f64>>,
    pub scale_grid: Option<Vec<f64>>,
}

/// Fully resolved configuration; echoed in JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub model: Option<String>,
    pub field: Option<String>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub output: OutputFormat,
    pub fd_step: f64,
    pub equation: Option<String>,
    pub n: Option<usize>,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub forms: usize,
    pub p_grid: Option<Vec<f64>>,
    pub q_grid: Option<Vec<f64>>,
    pub scale_grid: Option<Vec<f64>>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(e) => match e {
                Error::Domain { .. } | Error::VanishingField | Error::EmptySamples => 3,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(s) => write!(f, "invalid configuration: {s}"),
            CliError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(s: impl Into<String>) -> CliError {
    CliError::Config(s.into())
}

fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| config_err(format!("not a number: '{t}'")));
    let out = if parts.len() == 3 {
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2].trim().parse().map_err(|_| config_err(format!("bad grid count in '{s}'")))?;
        match count {
            0 => vec![],
            1 => vec![a],
            _ => (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect(),
        }
    } else if parts.len() == 1 {
        s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<CliResult<_>>()?
    } else {
        return Err(config_err(format!("cannot parse list '{s}'")));
    };
    if out.iter().any(|v: &f64| !v.is_finite()) {
        return Err(config_err(format!("non-finite entry in '{s}'")));
    }
    Ok(out)
}

fn parse_matrix(s: &str) -> CliResult<Vec<Vec<f64>>> {
    s.split(';').map(parse_list).collect()
}

/// Merges flags over the config file over defaults and validates.
pub fn resolve(command: &Command) -> CliResult<RunConfig> {
    let a = command.args();
    let file = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ConfigFile>(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    if let Some(c) = &file.command {
        if c != command.name() {
            return Err(config_err(format!("config file is for '{c}', not '{}'", command.name())));
        }
    }
    let grid = |flag: &Option<String>, fallback: &Option<Vec<f64>>| -> CliResult<Option<Vec<f64>>> {
        match flag {
            Some(s) => parse_list(s).map(Some),
            None => Ok(fallback.clone()),
        }
    };
    let cfg = RunConfig {
        command: command.name().into(),
        model: a.model.clone().or(file.model),
        field: a.field.clone().or(file.field),
        p: a.p.or(file.p),
        q: a.q.or(file.q),
        samples: a.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
        seed: a.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        tolerance: a.tolerance.or(file.tolerance).unwrap_or(DEFAULT_TOLERANCE),
        output: a.output.or(file.output).unwrap_or_default(),
        fd_step: a.fd_step.or(file.fd_step).unwrap_or(FD_STEP),
        equation: a.equation.clone().or(file.equation),
        n: a.n.or(file.n),
        matrix: match &a.matrix {
            Some(s) => Some(parse_matrix(s)?),
            None => file.matrix,
        },
        forms: a.forms.or(file.forms).unwrap_or(1),
        p_grid: grid(&a.p_grid, &file.p_grid)?,
        q_grid: grid(&a.q_grid, &file.q_grid)?,
        scale_grid: grid(&a.scale_grid, &file.scale_grid)?,
        out: a.out.clone().or(file.out),
    };
    if cfg.samples == 0 {
        return Err(config_err("samples must be at least 1"));
    }
    if !(cfg.tolerance > 0.0 && cfg.tolerance.is_finite()) {
        return Err(config_err(format!("tolerance must be positive, got {}", cfg.tolerance)));
    }
    if cfg.forms == 0 {
        return Err(config_err("forms must be at least 1"));
    }
    check_step(cfg.fd_step)?;
    for v in [cfg.p, cfg.q].into_iter().flatten() {
        if !v.is_finite() {
            return Err(config_err("p and q must be finite"));
        }
    }
    Ok(cfg)
}

pub fn parse_model(s: &str) -> CliResult<ManifoldModel> {
    match s {
        "heisenberg" | "h3" => Ok(ManifoldModel::Heisenberg3),
        "sl2" => Ok(ManifoldModel::Sl2Universal),
        "s2xr" => Ok(ManifoldModel::SphereCrossLine),
        _ => match s.strip_prefix("sphere:") {
            Some(n) => {
                let n: usize = n.parse().map_err(|_| config_err(format!("bad sphere dimension in '{s}'")))?;
                Ok(ManifoldModel::sphere(n)?)
            }
            None => Err(config_err(format!("unknown model '{s}'"))),
        },
    }
}

/// Parses a field descriptor for the given model.
pub fn parse_field(s: &str, model: ManifoldModel) -> CliResult<VectorFieldSpec> {
    if let Some((c, rest)) = s.split_once('*') {
        let c: f64 = c.trim().parse().map_err(|_| config_err(format!("bad scale factor in '{s}'")))?;
        return Ok(parse_field(rest, model)?.scaled(c));
    }
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (s, None),
    };
    let need = |what: &str| arg.ok_or_else(|| config_err(format!("field '{kind}' needs {what}")));
    let field = match kind {
        "zero" => VectorFieldSpec::Zero,
        "hopf" => VectorFieldSpec::hopf(arg.map(parse_list).transpose()?.and_then(|v| v.first().copied()).unwrap_or(1.0))?,
        "rotation" => match arg {
            Some(a) => VectorFieldSpec::rotation(&parse_list(a)?)?,
            None => VectorFieldSpec::rotation(&[0.0, 0.0, 1.0])?,
        },
        "conformal" => VectorFieldSpec::conformal(&parse_list(need("a vector")?)?),
        "quadratic" => {
            let a = need("diagonal entries")?;
            let (diag, power) = match a.split_once('@') {
                Some((d, k)) => (d, k.parse::<u32>().map_err(|_| config_err(format!("bad power in '{s}'")))?),
                None => (a, 1),
            };
            VectorFieldSpec::quadratic(QuadraticFormSpec::diagonal(&parse_list(diag)?)?, power)?
        }
        "profiled" => {
            let p = parse_list(need("p")?)?;
            let p = *p.first().ok_or_else(|| config_err("profiled needs p"))?;
            VectorFieldSpec::profiled(Arc::new(PowerProfile::inverse_sqrt_for(p)?), &[0.0, 0.0, 1.0])?
        }
        "profiled-const" => {
            let c = parse_list(need("a constant")?)?;
            let c = *c.first().ok_or_else(|| config_err("profiled-const needs a constant"))?;
            VectorFieldSpec::profiled(Arc::new(ConstantProfile(c)), &[0.0, 0.0, 1.0])?
        }
        "frame" => {
            let i: usize = need("an index")?.parse().map_err(|_| config_err(format!("bad frame index in '{s}'")))?;
            if i == 0 {
                return Err(config_err("frame indices start at 1"));
            }
            VectorFieldSpec::frame(model, i - 1)?
        }
        _ => return Err(config_err(format!("unknown field '{s}'"))),
    };
    field.check_model(model)?;
    Ok(field)
}

/// Output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub results: Value,
    pub details: Option<Value>,
    pub summary: Summary,
    pub csv_header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
    /// False only when a checked residual exceeded the tolerance.
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub max: f64,
    pub mean: f64,
    pub pass: bool,
}

fn summary_of(values: &[f64], pass: bool) -> Summary {
    let max = values.iter().copied().fold(0.0, f64::max);
    let mean = if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    Summary { max, mean, pass }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn model_and_field(cfg: &RunConfig) -> CliResult<(ManifoldModel, VectorFieldSpec)> {
    let model = parse_model(cfg.model.as_deref().ok_or_else(|| config_err("--model is required"))?)?;
    let field = parse_field(cfg.field.as_deref().ok_or_else(|| config_err("--field is required"))?, model)?;
    Ok((model, field))
}

fn params(cfg: &RunConfig) -> CliResult<BundleMetricParams> {
    let p = cfg.p.ok_or_else(|| config_err("--p is required"))?;
    let q = cfg.q.ok_or_else(|| config_err("--q is required"))?;
    Ok(BundleMetricParams::new(p, q)?)
}

fn equation(cfg: &RunConfig) -> CliResult<Equation> {
    Ok(Equation::parse(cfg.equation.as_deref().unwrap_or("section"))?)
}

fn oracle_deviation(model: ManifoldModel, field: &VectorFieldSpec, x: &Point, step: f64) -> f64 {
    let f = |y: &nalgebra::DVector<f64>| field.value(y);
    frame_raw(model, &x.coords, FrameStrategy::GramSchmidt)
        .iter()
        .map(|e| (model.cov(&x.coords, field, e) - fd_cov_fn(model, &f, &x.coords, e, step)).norm())
        .fold(0.0, f64::max)
}

fn coords_header(model: ManifoldModel) -> Vec<String> {
    (0..model.ambient_dim()).map(|i| format!("x{i}")).collect()
}

fn cmd_verify(cfg: &RunConfig) -> CliResult<Report> {
    let (model, field) = model_and_field(cfg)?;
    let params = params(cfg)?;
    let eq = equation(cfg)?;
    let points = sample_points(model, cfg.samples, cfg.seed)?;
    let report = residual_report(model, &field, &params, eq, &points, cfg.seed)?;
    let deviations: Vec<f64> = points.iter().map(|x| oracle_deviation(model, &field, x, cfg.fd_step)).collect();
    let residuals: Vec<f64> = report.per_point.iter().map(|r| r.residual).collect();
    let pass = report.max <= cfg.tolerance;
    let results = report
        .per_point
        .iter()
        .zip(&deviations)
        .map(|(r, d)| json!({"coords": r.coords, "residual": r.residual, "oracle_deviation": d}))
        .collect();
    let mut header = coords_header(model);
    header.extend(["residual".into(), "oracle_deviation".into()]);
    let rows = report
        .per_point
        .iter()
        .zip(&deviations)
        .map(|(r, d)| r.coords.iter().map(|c| num(*c)).chain([num(r.residual), num(*d)]).collect())
        .collect();
    Ok(Report {
        results: Value::Array(results),
        details: Some(json!({"equation": report.equation, "field": report.field, "params": params})),
        summary: summary_of(&residuals, pass),
        csv_header: header,
        csv_rows: rows,
        pass,
    })
}

fn random_symmetric(size: usize, r: &mut impl Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(size, size);
    for i in 0..size {
        for j in i..size {
            let v: f64 = r.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn cmd_identities(cfg: &RunConfig) -> CliResult<Report> {
    let n = cfg.n.ok_or_else(|| config_err("--n is required"))?;
    let model = ManifoldModel::sphere(n)?;
    let forms: Vec<QuadraticFormSpec> = match &cfg.matrix {
        Some(rows) => {
            let size = rows.len();
            if rows.iter().any(|r| r.len() != size) {
                return Err(config_err("matrix must be square"));
            }
            vec![QuadraticFormSpec::new(DMatrix::from_fn(size, size, |i, j| rows[i][j]))?]
        }
        None => {
            let mut r = rng(cfg.seed ^ 0x5eed);
            (0..cfg.forms)
                .map(|_| QuadraticFormSpec::new(random_symmetric(n + 1, &mut r)))
                .collect::<Result<_, _>>()?
        }
    };
    let points = sample_points(model, cfg.samples, cfg.seed)?;
    let mut merged = None;
    for form in &forms {
        let rep = verify_sigma_identities_on(form, n, &points)?;
        merged = Some(match merged {
            None => rep,
            Some(acc) => rep.merge(&acc),
        });
    }
    let rep = merged.expect("at least one form");
    let values: Vec<f64> = rep.identities.iter().map(|i| i.max_residual).collect();
    let pass = rep.max <= cfg.tolerance;
    Ok(Report {
        results: serde_json::to_value(&rep.identities).expect("serializable"),
        details: Some(json!({"n": n, "forms": forms})),
        summary: summary_of(&values, pass),
        csv_header: vec!["name".into(), "max_residual".into()],
        csv_rows: rep.identities.iter().map(|i| vec![i.name.to_string(), num(i.max_residual)]).collect(),
        pass,
    })
}

fn cmd_classify(cfg: &RunConfig) -> CliResult<Report> {
    let n = cfg.n.ok_or_else(|| config_err("--n is required"))?;
    let rep = solve_classification_with(
        n,
        &SolverConfig {
            samples: cfg.samples,
            seed: cfg.seed,
        },
    )?;
    let residuals: Vec<f64> = rep.candidates.iter().filter_map(|c| c.residual_max).collect();
    let any_valid = rep.candidates.iter().any(|c| c.validated);
    let header = ["source", "n", "p", "q", "k_mult", "mu_sq", "validated", "residual_max", "t2_consistency"];
    let rows = rep
        .candidates
        .iter()
        .map(|c| {
            vec![
                serde_json::to_value(c.source).expect("serializable").as_str().unwrap_or_default().to_string(),
                c.n.to_string(),
                num(c.p),
                num(c.q),
                c.k_mult.to_string(),
                num(c.mu_sq),
                c.validated.to_string(),
                c.residual_max.map(num).unwrap_or_default(),
                num(c.t2_consistency),
            ]
        })
        .collect();
    Ok(Report {
        results: serde_json::to_value(&rep.candidates).expect("serializable"),
        details: Some(json!({
            "n": rep.n,
            "p": rep.p,
            "k_mult": rep.k_mult,
            "printed_quadratic": rep.printed_quadratic,
            "printed_roots": rep.printed_roots,
            "printed_mu_sq": rep.printed_mu_sq,
            "oracle_roots": rep.oracle_roots,
            "discrepancies": rep.discrepancies,
            "notes": rep.notes,
        })),
        summary: summary_of(&residuals, any_valid),
        csv_header: header.iter().map(|s| s.to_string()).collect(),
        csv_rows: rows,
        pass: true,
    })
}

fn cmd_scan(cfg: &RunConfig) -> CliResult<Report> {
    let (model, field) = model_and_field(cfg)?;
    let eq = equation(cfg)?;
    let pg = cfg.p_grid.clone().or(cfg.p.map(|p| vec![p])).ok_or_else(|| config_err("--p-grid or --p is required"))?;
    let qg = cfg.q_grid.clone().or(cfg.q.map(|q| vec![q])).ok_or_else(|| config_err("--q-grid or --q is required"))?;
    let sg = cfg.scale_grid.clone().unwrap_or_else(|| vec![1.0]);
    if pg.is_empty() || qg.is_empty() || sg.is_empty() {
        return Err(config_err("empty grid"));
    }
    let points = sample_points(model, cfg.samples, cfg.seed)?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut maxima = Vec::new();
    for &p in &pg {
        for &q in &qg {
            for &scale in &sg {
                let params = BundleMetricParams::new(p, q)?;
                let cell = field.clone().scaled(scale);
                let r = residual_report(model, &cell, &params, eq, &points, cfg.seed)?;
                rows.push(vec![num(p), num(q), num(scale), num(r.max), num(r.mean)]);
                results.push(json!({"p": p, "q": q, "scale": scale, "max": r.max, "mean": r.mean}));
                maxima.push(r.max);
            }
        }
    }
    Ok(Report {
        results: Value::Array(results),
        details: Some(json!({"equation": eq, "field": field.describe()})),
        summary: summary_of(&maxima, true),
        csv_header: ["p", "q", "scale", "max", "mean"].iter().map(|s| s.to_string()).collect(),
        csv_rows: rows,
        pass: true,
    })
}

fn cmd_tension(cfg: &RunConfig) -> CliResult<Report> {
    let (model, field) = model_and_field(cfg)?;
    let params = params(cfg)?;
    let points = sample_points(model, cfg.samples, cfg.seed)?;
    let mut results = Vec::new();
    let mut rows = Vec::new();
    let mut norms = Vec::new();
    for x in &points {
        let t = tension_field(model, &field, &params, x)?;
        let (v, h) = (t.vertical.norm(), t.horizontal.norm());
        let coords: Vec<f64> = x.coords.iter().copied().collect();
        rows.push(coords.iter().map(|c| num(*c)).chain([num(v), num(h)]).collect());
        results.push(json!({"coords": coords, "vertical": v, "horizontal": h}));
        norms.push(v.max(h));
    }
    let pass = norms.iter().all(|v| *v <= cfg.tolerance);
    let mut header = coords_header(model);
    header.extend(["vertical".into(), "horizontal".into()]);
    Ok(Report {
        results: Value::Array(results),
        details: Some(json!({"field": field.describe(), "params": params})),
        summary: summary_of(&norms, pass),
        csv_header: header,
        csv_rows: rows,
        pass,
    })
}

fn cmd_energy(cfg: &RunConfig) -> CliResult<Report> {
    let (model, field) = model_and_field(cfg)?;
    let params = params(cfg)?;
    let ManifoldModel::Sphere { n } = model else {
        return Err(config_err("energy needs a sphere model (finite volume)"));
    };
    let points = sample_points(model, cfg.samples, cfg.seed)?;
    let e = vertical_energy(model, &field, &params, &points, &sphere_weights(n, cfg.samples))?;
    Ok(Report {
        results: json!([{"energy": e, "samples": cfg.samples}]),
        details: Some(json!({"field": field.describe(), "params": params})),
        summary: Summary {
            max: e,
            mean: e,
            pass: true,
        },
        csv_header: vec!["energy".into(), "samples".into()],
        csv_rows: vec![vec![num(e), cfg.samples.to_string()]],
        pass: true,
    })
}

pub fn execute(cfg: &RunConfig) -> CliResult<Report> {
    match cfg.command.as_str() {
        "verify" => cmd_verify(cfg),
        "identities" => cmd_identities(cfg),
        "classify" => cmd_classify(cfg),
        "scan" => cmd_scan(cfg),
        "tension" => cmd_tension(cfg),
        "energy" => cmd_energy(cfg),
        other => Err(config_err(format!("unknown command '{other}'"))),
    }
}

/// Pretty JSON with every float printed to 17 significant digits.
pub fn to_json_17(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().expect("f64");
            out.push_str(&format!("{f:.16e}"));
        }
        Value::Array(items) if !items.is_empty() => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(k).expect("string"));
                out.push_str(": ");
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        other => out.push_str(&serde_json::to_string(other).expect("serializable")),
    }
}

pub fn render(cfg: &RunConfig, report: &Report) -> CliResult<String> {
    match cfg.output {
        OutputFormat::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("command".into(), Value::String(cfg.command.clone()));
            doc.insert("config".into(), serde_json::to_value(cfg).expect("serializable"));
            doc.insert("results".into(), report.results.clone());
            doc.insert("summary".into(), serde_json::to_value(report.summary).expect("serializable"));
            if let Some(d) = &report.details {
                doc.insert("details".into(), d.clone());
            }
            Ok(to_json_17(&Value::Object(doc)))
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| config_err(format!("csv: {e}"));
            w.write_record(&report.csv_header).map_err(io)?;
            for row in &report.csv_rows {
                w.write_record(row).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| config_err(format!("csv: {e}")))?;
            Ok(String::from_utf8(bytes).expect("utf-8"))
        }
    }
}

/// Parses `args`, runs the command and writes the report; returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = resolve(&cli.command).and_then(|cfg| {
        let report = execute(&cfg)?;
        let text = render(&cfg, &report)?;
        Ok((cfg, report, text))
    });
    match outcome {
        Ok((cfg, report, text)) => {
            let written = match &cfg.out {
                Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: cannot write report: {e}");
                return 2;
            }
            if report.pass {
                0
            } else {
                let _ = writeln!(
                    stderr,
                    "residual check failed: max {:e} > tolerance {:e}",
                    report.summary.max, cfg.tolerance
                );
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
