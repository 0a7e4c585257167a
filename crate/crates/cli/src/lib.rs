//! Command-line front end: JSON scenario files in, CSV and JSON reports out.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use copula_order::copula::log_grid;
use copula_order::mc::{default_probe_levels, validate_closed_form};
use copula_order::ordering::{
    check_superadditive, default_superadditivity_grid, dominance_with, extremal_config,
    quantile_grid, schur_scan, BoxConstraint, DominanceOptions, DEFAULT_GRID_POINTS,
};
use copula_order::{
    BaselineSpec, EvalMode, Execution, GeneratorSpec, SystemSpec, TabulatedCdf, TransformSpec,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const SAFE_MODE_ENV: &str = "COPULA_ORDER_SAFE_MODE";
pub const DEFAULT_SAMPLES: usize = 200_000;
pub const DEFAULT_Z: f64 = 4.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Scenario {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: copula_order::Error,
    },

    #[error(transparent)]
    Core(#[from] copula_order::Error),

    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),

    #[error("cannot write output: {0}")]
    Csv(#[from] csv::Error),

    #[error("cannot encode output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for anything the caller can fix by changing the invocation or the
    /// input files, 1 for numerical and output failures.
    pub fn exit_code(&self) -> u8 {
        use copula_order::Error as E;
        match self {
            CliError::Usage(_) | CliError::Scenario { .. } | CliError::Input { .. } => 2,
            CliError::Core(e) => match e {
                E::Range { .. } | E::Usage(_) | E::Parse(_) | E::UnsupportedSampler(_) => 2,
                E::Domain(_) | E::Resource(_) | E::Io(_) | E::Csv(_) => 1,
            },
            CliError::Output(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

// ------------------------------------------------------------------ scenario

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub systems: Vec<SystemSpec>,
    #[serde(default)]
    pub grid: GridPolicy,
    #[serde(default)]
    pub options: ScenarioOptions,
}

/// Either `points` quantile-spaced abscissae or an explicit list `xs`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPolicy {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

impl Scenario {
    /// Reads a scenario file. Tabulated baselines may give `"path"` to an
    /// `x,F` CSV instead of inline `"points"`; relative paths are resolved
    /// against the scenario's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json_str(&text, base).map_err(|e| match e {
            CliError::Json(source) => CliError::Scenario {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    pub fn from_json_str(text: &str, base: &Path) -> CliResult<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        let mut inlined = false;
        if let Some(systems) = value.get_mut("systems").and_then(Value::as_array_mut) {
            for sys in systems {
                if let Some(b) = sys.get_mut("baseline") {
                    inlined |= inline_tabulated(b, base)?;
                }
            }
        }
        // parsing the original text keeps line/column positions in errors
        let scenario: Scenario = if inlined {
            serde_json::from_value(value)?
        } else {
            serde_json::from_str(text)?
        };
        if scenario.schema != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                scenario.schema
            )));
        }
        if scenario.systems.is_empty() || scenario.systems.len() > 2 {
            return Err(CliError::Usage(format!(
                "a scenario holds one or two systems, found {}",
                scenario.systems.len()
            )));
        }
        if scenario.grid.points.is_some() && scenario.grid.xs.is_some() {
            return Err(CliError::Usage("grid takes either `points` or `xs`, not both".into()));
        }
        Ok(scenario)
    }

    fn single(&self, command: &str) -> CliResult<&SystemSpec> {
        match self.systems.as_slice() {
            [s] => Ok(s),
            _ => Err(CliError::Usage(format!(
                "`{command}` needs exactly one system, found {}",
                self.systems.len()
            ))),
        }
    }

    fn pair(&self) -> CliResult<(&SystemSpec, &SystemSpec)> {
        match self.systems.as_slice() {
            [a, b] => Ok((a, b)),
            _ => Err(CliError::Usage(format!(
                "`compare` needs exactly two systems, found {}",
                self.systems.len()
            ))),
        }
    }

    /// The x-grid: explicit `xs`, else quantile-spaced with the flag taking
    /// precedence over the scenario's `points`.
    pub fn xgrid(&self, flag_points: Option<usize>) -> CliResult<Vec<f64>> {
        if let Some(xs) = &self.grid.xs {
            if flag_points.is_some() {
                return Err(CliError::Usage("--grid-points conflicts with an explicit `xs` grid".into()));
            }
            if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Usage("grid `xs` must be a nonempty list of finite numbers".into()));
            }
            return Ok(xs.clone());
        }
        let points = flag_points.or(self.grid.points).unwrap_or(DEFAULT_GRID_POINTS);
        let specs: Vec<&SystemSpec> = self.systems.iter().collect();
        Ok(quantile_grid(&specs, points)?)
    }
}

/// Replaces a tabulated baseline's `path` by the file's `points`; returns
/// whether anything was replaced.
fn inline_tabulated(baseline: &mut Value, base: &Path) -> CliResult<bool> {
    let Some(obj) = baseline.as_object_mut() else {
        return Ok(false);
    };
    if obj.get("family").and_then(Value::as_str) != Some("tabulated") {
        return Ok(false);
    }
    let Some(path) = obj.remove("path") else {
        return Ok(false);
    };
    let Some(rel) = path.as_str() else {
        return Err(CliError::Usage("tabulated `path` must be a string".into()));
    };
    if obj.contains_key("points") {
        return Err(CliError::Usage("tabulated baseline takes either `path` or `points`".into()));
    }
    let full = base.join(rel);
    let tab = TabulatedCdf::from_csv_path(&full).map_err(|source| CliError::Input { path: full, source })?;
    obj.insert("points".into(), serde_json::to_value(&tab)?);
    Ok(true)
}

// ------------------------------------------------------------------ CLI

#[derive(Debug, Parser)]
#[command(name = "copula-order", version, about = "Exact CDFs and stochastic dominance for Archimedean-dependent systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScenarioArg {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// System CDF on the grid, CSV `x,cdf`.
    Curve {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[command(flatten)]
        out: OutArg,
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Dominance verdict between the two systems of a scenario, JSON.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[command(flatten)]
        out: OutArg,
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Schur condition curves of the three-component Clayton example, CSV `x,D12,D13,D23`.
    Fig1 {
        #[command(flatten)]
        out: OutArg,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
    },
    /// Grid check that φ₂∘ψ₁ is super-additive, JSON.
    Superadd {
        /// `family` or `family:gamma`, e.g. `clayton:2`.
        #[arg(long)]
        gen1: GeneratorSpec,
        #[arg(long)]
        gen2: GeneratorSpec,
        #[arg(long)]
        grid_points: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Monte Carlo check of the closed-form CDF at quantile probes, JSON.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[command(flatten)]
        out: OutArg,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        z: Option<f64>,
    },
    /// Most and least dispersed members of {α ∈ [a, b]^n : Σα = c}, JSON.
    Extremal {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

/// Reads the clamping policy from `COPULA_ORDER_SAFE_MODE` (`1` by default).
pub fn eval_mode_from_env() -> CliResult<EvalMode> {
    match std::env::var(SAFE_MODE_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(EvalMode::Safe),
        Ok(v) if v.trim() == "1" => Ok(EvalMode::Safe),
        Ok(v) if v.trim() == "0" => Ok(EvalMode::Raw),
        Ok(v) => Err(CliError::Usage(format!("{SAFE_MODE_ENV} must be 0 or 1, got `{v}`"))),
        Err(e) => Err(CliError::Usage(format!("{SAFE_MODE_ENV}: {e}"))),
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let mode = eval_mode_from_env()?;
    let exec = Execution::default();
    match cli.command {
        Command::Curve { scenario, out, grid_points } => {
            let sc = Scenario::load(&scenario.scenario)?;
            let spec = sc.single("curve")?;
            let xs = sc.xgrid(grid_points)?;
            let fs = spec.curve(&xs, mode, exec)?;
            write_csv(out.out.as_deref(), &["x", "cdf"], xs.iter().zip(&fs).map(|(x, f)| vec![*x, *f]))
        }
        Command::Compare { scenario, out, grid_points } => {
            let sc = Scenario::load(&scenario.scenario)?;
            let (a, b) = sc.pair()?;
            let xs = sc.xgrid(grid_points)?;
            let verdict = dominance_with(a, b, &xs, DominanceOptions { mode, exec })?;
            write_json(out.out.as_deref(), &verdict)
        }
        Command::Fig1 { out, grid_points } => {
            let rows = fig1_rows(grid_points, mode, exec)?;
            write_csv(out.out.as_deref(), &["x", "D12", "D13", "D23"], rows.into_iter())
        }
        Command::Superadd { gen1, gen2, grid_points, out } => {
            let grid = match grid_points {
                Some(0) => return Err(CliError::Usage("--grid-points must be >= 1".into())),
                Some(p) => log_grid(1e-4, 50.0, p),
                None => default_superadditivity_grid(),
            };
            let report = check_superadditive(&gen1, &gen2, &grid)?;
            write_json(out.out.as_deref(), &report)
        }
        Command::Validate { scenario, out, samples, seed, z } => {
            let sc = Scenario::load(&scenario.scenario)?;
            let spec = sc.single("validate")?;
            let samples = samples.or(sc.options.samples).unwrap_or(DEFAULT_SAMPLES);
            let seed = seed.or(sc.options.seed).unwrap_or(0);
            let z = z.or(sc.options.z).unwrap_or(DEFAULT_Z);
            let report = validate_closed_form(spec, samples, seed, &default_probe_levels(), z)?;
            write_json(out.out.as_deref(), &report)
        }
        Command::Extremal { a, b, c, n, out } => {
            let cfg = extremal_config(&BoxConstraint::new(a, b, c, n)?)?;
            write_json(out.out.as_deref(), &cfg)
        }
    }
}

/// The three-component example: Clayton γ = 1, PHR, standard exponential,
/// α = (1, 2.5, 4), k = 1, sampled on `(0, 10]`.
pub fn fig1_spec() -> SystemSpec {
    SystemSpec::new(
        1,
        GeneratorSpec::clayton(1.0).expect("valid gamma"),
        TransformSpec::phr(),
        BaselineSpec::StdExponential,
        vec![1.0, 2.5, 4.0],
    )
    .expect("valid spec")
}

pub fn fig1_rows(points: usize, mode: EvalMode, exec: Execution) -> CliResult<Vec<Vec<f64>>> {
    if points == 0 {
        return Err(CliError::Usage("--grid-points must be >= 1".into()));
    }
    let spec = fig1_spec();
    let xs: Vec<f64> = (1..=points).map(|i| 10.0 * i as f64 / points as f64).collect();
    let curves = [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .map(|p| schur_scan(&spec, &xs, p, mode, exec))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| vec![x, curves[0].values[i], curves[1].values[i], curves[2].values[i]])
        .collect())
}

fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_csv(out: Option<&Path>, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
