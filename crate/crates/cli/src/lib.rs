//! Command-line front end: metric tables, g² traces, JSI grids, parameter
//! sweeps and the validation suite.
//!
//! Every command returns the files it would emit; `main` decides whether
//! they go to stdout or into `--out`.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use spdc_lab_core::jsa::{self, GridSpec, PumpSpectrum, DEFAULT_GRID_POINTS, MIN_GRID_POINTS};
use spdc_lab_core::nondegenerate::{self, Conditioning, SinglyFilteredRegime};
use spdc_lab_core::oracle::post_filter::post_cavity_filter_compare_with;
use spdc_lab_core::params::{derive, load_config, Hz, REFERENCE_CONFIG};
use spdc_lab_core::report::{self, Curve, Regime};
use spdc_lab_core::validation::{self, Mutation, ValidationOptions};
use spdc_lab_core::{ConfigError, Execution, SystemParams};

pub mod sweep;

pub use sweep::{SweepOutput, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => EXIT_VALIDATION,
            _ => EXIT_CONFIG,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn compute(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "spdc-lab", version, about = "Photon-pair source metrics for cavity SPDC with an intra-cavity slow-light filter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Parameter file (TOML, frequencies in Hz). Defaults to the built-in
    /// reference set.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the built-in reference configuration.
    Defaults(DefaultsArgs),
    /// Table of closed-form metrics for one regime.
    Metrics(MetricsArgs),
    /// Normalised cross-correlation traces.
    G2(G2Args),
    /// Joint spectral intensity grids, one file per pump bandwidth.
    Jsi(JsiArgs),
    /// One row of metrics per value of a swept parameter.
    Sweep(SweepArgs),
    /// Run every closed-form vs. oracle cross-check.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct DefaultsArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub common: Common,
    /// bare, degenerate-bare, degenerate-filtered, singly-filtered or all.
    #[arg(long, default_value = "singly-filtered")]
    pub regime: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditioningArg {
    AGivenB,
    BGivenA,
}

impl From<ConditioningArg> for Conditioning {
    fn from(c: ConditioningArg) -> Self {
        match c {
            ConditioningArg::AGivenB => Conditioning::AGivenB,
            ConditioningArg::BGivenA => Conditioning::BGivenA,
        }
    }
}

#[derive(Debug, Args)]
pub struct G2Args {
    #[command(flatten)]
    pub common: Common,
    /// Curves: comma list of bare, degenerate-filtered, singly-filtered, or all.
    #[arg(long, default_value = "all")]
    pub regime: String,
    /// Start of the τ axis, units of τ_c = n_g/κ.
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 801)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = ConditioningArg::AGivenB)]
    pub conditioning: ConditioningArg,
}

#[derive(Debug, Args)]
pub struct JsiArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pump bandwidths σ_p in Hz, comma separated. Defaults to the config's.
    #[arg(long, value_delimiter = ',')]
    pub pump_bw: Vec<f64>,
    /// Grid points, NxM (signal x idler).
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Parameter path, e.g. drive.bandwidth or filter.fwhm (values in Hz).
    #[arg(long)]
    pub param: String,
    /// Explicit values, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["log", "linear"])]
    pub values: Option<Vec<f64>>,
    /// START:STOP:N, logarithmically spaced.
    #[arg(long, conflicts_with = "linear")]
    pub log: Option<String>,
    /// START:STOP:N, linearly spaced.
    #[arg(long)]
    pub linear: Option<String>,
    /// Comma list of purity, heralding, autocorrelation, rate, bandwidth,
    /// post_purity, post_heralding, post_transmission.
    #[arg(long, value_delimiter = ',', default_value = "purity,heralding")]
    pub outputs: Vec<String>,
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Override a tolerance group: quadrature, fourier, fwhm, continuity, purity.
    #[arg(long = "tolerance", value_name = "NAME=VALUE")]
    pub tolerances: Vec<String>,
    /// Corrupt one closed-form constant: rate-prefactor, peak-excess, bandwidth.
    #[arg(long)]
    pub mutate: Option<String>,
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (n, m) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("expected NxM, got `{s}`"));
    let (n, m) = (parse(n)?, parse(m)?);
    if n < MIN_GRID_POINTS || m < MIN_GRID_POINTS {
        return Err(format!("grid needs at least {MIN_GRID_POINTS} points per axis"));
    }
    Ok((n, m))
}

/// A file produced by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub name: String,
    pub contents: String,
}

#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<Emitted>,
    pub status: i32,
}

impl Outcome {
    fn ok(files: Vec<Emitted>) -> Self {
        Self { files, status: EXIT_OK }
    }
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Defaults(a) => &a.common,
            Command::Metrics(a) => &a.common,
            Command::G2(a) => &a.common,
            Command::Jsi(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Validate(a) => &a.common,
        }
    }
}

pub fn load(common: &Common) -> Result<SystemParams, CliError> {
    match &common.config {
        None => Ok(SystemParams::reference()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
                path: path.clone(),
                source,
            })?;
            Ok(load_config(&text)?)
        }
    }
}

/// SHA-256 of the canonical re-emitted config, so formatting differences in
/// the input file do not change it.
pub fn config_hash(p: &SystemParams) -> String {
    Sha256::digest(p.emit().as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Comment-line header for CSV and TOML outputs.
pub struct Header {
    lines: Vec<(String, String)>,
}

impl Header {
    pub fn new(command: &str, p: &SystemParams) -> Self {
        Self {
            lines: vec![
                ("tool".into(), format!("spdc-lab {VERSION}")),
                ("command".into(), command.into()),
                ("config_sha256".into(), config_hash(p)),
            ],
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn warnings(mut self, warnings: &[String]) -> Self {
        for w in warnings {
            self.lines.push(("warning".into(), w.clone()));
        }
        self
    }

    pub fn render(&self) -> String {
        self.lines.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "# {k}: {v}");
            s
        })
    }

    pub fn json(&self) -> Value {
        let mut map = serde_json::Map::new();
        let mut warnings = Vec::new();
        for (k, v) in &self.lines {
            if k == "warning" {
                warnings.push(Value::String(v.clone()));
            } else {
                map.insert(k.clone(), Value::String(v.clone()));
            }
        }
        map.insert("warnings".into(), Value::Array(warnings));
        Value::Object(map)
    }
}

pub fn execute(cmd: &Command, exec: Execution) -> Result<Outcome, CliError> {
    let p = load(cmd.common())?;
    match cmd {
        Command::Defaults(_) => cmd_defaults(&p),
        Command::Metrics(a) => cmd_metrics(&p, a),
        Command::G2(a) => cmd_g2(&p, a),
        Command::Jsi(a) => cmd_jsi(&p, a, exec),
        Command::Sweep(a) => cmd_sweep(&p, a, exec),
        Command::Validate(a) => cmd_validate(&p, a, exec),
    }
}

fn cmd_defaults(p: &SystemParams) -> Result<Outcome, CliError> {
    let header = Header::new("defaults", p).render();
    Ok(Outcome::ok(vec![Emitted {
        name: "defaults.toml".into(),
        contents: format!("{header}{REFERENCE_CONFIG}"),
    }]))
}

fn parse_regimes(s: &str) -> Result<Vec<Regime>, CliError> {
    if s == "all" {
        return Ok(Regime::ALL.to_vec());
    }
    s.split(',')
        .map(|r| r.trim().parse::<Regime>().map_err(|e| usage(e.to_string())))
        .collect()
}

fn cmd_metrics(p: &SystemParams, a: &MetricsArgs) -> Result<Outcome, CliError> {
    let d = derive(p);
    let mut files = Vec::new();
    for regime in parse_regimes(&a.regime)? {
        let m = report::metrics_with(p, &d, regime).map_err(compute)?;
        let header = Header::new("metrics", p).with("regime", regime).warnings(&m.warnings);
        let (ext, contents) = match a.format {
            Format::Csv => ("csv", format!("{}{}", header.render(), m.to_csv())),
            Format::Json => {
                let doc = json!({ "metadata": header.json(), "report": m });
                ("json", serde_json::to_string_pretty(&doc).expect("serialises") + "\n")
            }
        };
        files.push(Emitted {
            name: format!("metrics_{regime}.{ext}"),
            contents,
        });
    }
    Ok(Outcome::ok(files))
}

fn parse_curves(s: &str) -> Result<Vec<Curve>, CliError> {
    if s == "all" {
        return Ok(Curve::ALL.to_vec());
    }
    s.split(',')
        .map(|c| match c.trim() {
            "bare" => Ok(Curve::Bare),
            "degenerate-filtered" | "doubly-filtered" => Ok(Curve::DoublyFiltered),
            "singly-filtered" => Ok(Curve::SinglyFiltered),
            other => Err(usage(format!(
                "unknown g2 curve `{other}` (expected bare, degenerate-filtered, singly-filtered or all)"
            ))),
        })
        .collect()
}

fn cmd_g2(p: &SystemParams, a: &G2Args) -> Result<Outcome, CliError> {
    let curves = parse_curves(&a.regime)?;
    let trace = report::correlation_trace(p, &curves, a.tau_min, a.tau_max, a.samples, a.conditioning.into())
        .map_err(|e| match e {
            report::TraceError::Report(r) => usage(r.to_string()),
            other => CliError::Config(ConfigError::Invalid {
                field: "detuning_hz".into(),
                reason: other.to_string(),
            }),
        })?;
    let d = derive(p);
    let header = Header::new("g2", p)
        .with("tau_unit", format!("tau_c = n_g/kappa_signal = {:.16e} s", trace.correlation_time))
        .with("normalisation", format!("norm = (g2 - 1)/(kappa/4g|beta|)^2, (kappa/4g|beta|)^2 = {:.16e}", trace.peak_scale))
        .with("round_trip_difference_s", format!("{:.16e}", d.round_trip_difference))
        .with("conditioning", format!("{:?}", trace.conditioning))
        .warnings(&d.warnings);
    Ok(Outcome::ok(vec![Emitted {
        name: "g2.csv".into(),
        contents: format!("{}{}", header.render(), trace.to_csv()),
    }]))
}

fn grid_for(r: &SinglyFilteredRegime, pump: &PumpSpectrum, points: Option<(usize, usize)>) -> GridSpec {
    let (n, m) = points.unwrap_or((DEFAULT_GRID_POINTS, DEFAULT_GRID_POINTS));
    GridSpec::default_for(r, pump).with_points(n, m)
}

fn cmd_jsi(p: &SystemParams, a: &JsiArgs, exec: Execution) -> Result<Outcome, CliError> {
    let d = derive(p);
    let r = SinglyFilteredRegime::from_params(p, &d);
    let bandwidths = if a.pump_bw.is_empty() {
        vec![p.drive.bandwidth.0]
    } else {
        a.pump_bw.clone()
    };
    let mut files = Vec::new();
    for (i, &bw) in bandwidths.iter().enumerate() {
        if !(bw.is_finite() && bw > 0.0) {
            return Err(usage(format!(
                "pump bandwidth must be > 0 Hz for a JSI grid (got {bw}); a CW pump has a delta-function ridge, use `metrics` instead"
            )));
        }
        let pump = PumpSpectrum::new(d.pump_amplitude, Hz(bw).angular());
        let grid = grid_for(&r, &pump, a.grid);
        let v = jsa::build_grid_with(&r, &pump, &grid, exec).map_err(compute)?;
        let purity = jsa::purity_with(&v, exec).map_err(compute)?;
        let export = jsa::export_jsi(&v);
        let marginal: Vec<f64> = v.signal_marginal();
        let fwhm = jsa::sampled_fwhm(&export.signal_hz, &marginal);
        let header = Header::new("jsi", p)
            .with("pump_bandwidth_hz", format!("{bw:e}"))
            .with("grid", format!("{}x{}", grid.n_signal, grid.n_idler))
            .with("purity", format!("{purity:.16e}"))
            .with(
                "signal_marginal_fwhm_hz",
                fwhm.map_or("unresolved".into(), |f| format!("{f:.16e}")),
            )
            .with("layout", "rows: signal_hz; columns: idler_hz = -omega'/2pi (mirrored); peak intensity 1")
            .warnings(&d.warnings)
            .warnings(v.warnings());
        let stem = format!("jsi_{i:02}_{bw:e}Hz");
        let mut meta = jsa::jsi_metadata(&v);
        meta["metadata"] = header.json();
        meta["purity"] = json!(purity);
        meta["signal_marginal_fwhm_hz"] = json!(fwhm);
        files.push(Emitted {
            name: format!("{stem}.csv"),
            contents: format!("{}{}", header.render(), export.to_csv()),
        });
        files.push(Emitted {
            name: format!("{stem}.json"),
            contents: serde_json::to_string_pretty(&meta).expect("serialises") + "\n",
        });
    }
    Ok(Outcome::ok(files))
}

fn cmd_sweep(p: &SystemParams, a: &SweepArgs, exec: Execution) -> Result<Outcome, CliError> {
    let spec = SweepSpec::from_args(a)?;
    let table = sweep::run(p, &spec, a.grid, exec)?;
    let header = Header::new("sweep", p)
        .with("parameter", &spec.path)
        .with("outputs", spec.outputs.iter().map(|o| o.as_str()).collect::<Vec<_>>().join(","))
        .warnings(&table.warnings);
    Ok(Outcome::ok(vec![Emitted {
        name: "sweep.csv".into(),
        contents: format!("{}{}", header.render(), table.to_csv()),
    }]))
}

fn cmd_validate(p: &SystemParams, a: &ValidateArgs, exec: Execution) -> Result<Outcome, CliError> {
    let mut opts = ValidationOptions {
        exec,
        ..ValidationOptions::default()
    };
    for t in &a.tolerances {
        opts.tolerances.apply(t).map_err(|e| usage(e.to_string()))?;
    }
    if let Some(m) = &a.mutate {
        opts.mutation = Some(m.parse::<Mutation>().map_err(usage)?);
    }
    if let Some(g) = a.grid {
        opts.grid_points = g;
    }
    let report = validation::run(p, &opts);
    let d = derive(p);
    let header = Header::new("validate", p).warnings(&d.warnings);
    let doc = json!({
        "metadata": header.json(),
        "all_passed": report.all_passed(),
        "report": report,
    });
    let status = if report.all_passed() { EXIT_OK } else { EXIT_VALIDATION };
    Ok(Outcome {
        files: vec![Emitted {
            name: "validation.json".into(),
            contents: serde_json::to_string_pretty(&doc).expect("serialises") + "\n",
        }],
        status,
    })
}

/// Closed-form heralding for a CW pump, where no grid exists.
pub(crate) fn cw_heralding(r: &SinglyFilteredRegime) -> f64 {
    nondegenerate::heralding_window(f64::INFINITY, r)
}

pub(crate) fn post_filter(
    r: &SinglyFilteredRegime,
    pump: &PumpSpectrum,
    points: usize,
    exec: Execution,
) -> Result<spdc_lab_core::oracle::PostFilterResult, CliError> {
    post_cavity_filter_compare_with(nondegenerate::bandwidth(r), r, pump, points, exec).map_err(compute)
}

/// `σ_p` in rad/s from a config in Hz.
pub(crate) fn pump_of(p: &SystemParams) -> (SinglyFilteredRegime, PumpSpectrum) {
    let d = derive(p);
    let r = SinglyFilteredRegime::from_params(p, &d);
    (r, PumpSpectrum::new(d.pump_amplitude, TAU * p.drive.bandwidth.0))
}
