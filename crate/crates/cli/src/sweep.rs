use std::fmt::Write as _;

use spdc_lab_core::jsa::{self, DEFAULT_GRID_POINTS};
use spdc_lab_core::nondegenerate;
use spdc_lab_core::params::Hz;
use spdc_lab_core::{Execution, SystemParams};

use crate::{compute, cw_heralding, grid_for, post_filter, pump_of, usage, CliError, SweepArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOutput {
    Purity,
    Heralding,
    Autocorrelation,
    Rate,
    Bandwidth,
    PostPurity,
    PostHeralding,
    PostTransmission,
}

impl SweepOutput {
    pub const ALL: [SweepOutput; 8] = [
        SweepOutput::Purity,
        SweepOutput::Heralding,
        SweepOutput::Autocorrelation,
        SweepOutput::Rate,
        SweepOutput::Bandwidth,
        SweepOutput::PostPurity,
        SweepOutput::PostHeralding,
        SweepOutput::PostTransmission,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepOutput::Purity => "purity",
            SweepOutput::Heralding => "heralding",
            SweepOutput::Autocorrelation => "autocorrelation",
            SweepOutput::Rate => "rate",
            SweepOutput::Bandwidth => "bandwidth",
            SweepOutput::PostPurity => "post_purity",
            SweepOutput::PostHeralding => "post_heralding",
            SweepOutput::PostTransmission => "post_transmission",
        }
    }

    fn column(self) -> &'static str {
        match self {
            SweepOutput::Rate => "rate_pairs_per_s",
            SweepOutput::Bandwidth => "bandwidth_hz",
            other => other.as_str(),
        }
    }

    fn needs_grid(self) -> bool {
        matches!(
            self,
            SweepOutput::Purity | SweepOutput::Heralding | SweepOutput::Autocorrelation
        )
    }

    fn needs_post_filter(self) -> bool {
        matches!(
            self,
            SweepOutput::PostPurity | SweepOutput::PostHeralding | SweepOutput::PostTransmission
        )
    }
}

impl std::str::FromStr for SweepOutput {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepOutput::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = SweepOutput::ALL.iter().map(|o| o.as_str()).collect();
                usage(format!("unknown sweep output `{s}` (expected one of {})", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub path: String,
    pub values: Vec<f64>,
    pub outputs: Vec<SweepOutput>,
}

fn parse_range(s: &str, log: bool) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || usage(format!("expected START:STOP:N, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(usage("sweep range needs N >= 1 values"));
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err(usage("logarithmic range needs positive bounds"));
    }
    if n == 1 {
        return Ok(vec![start]);
    }
    let t = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                stop
            } else if log {
                start * (stop / start).powf(t(i))
            } else {
                start + t(i) * (stop - start)
            }
        })
        .collect())
}

impl SweepSpec {
    pub fn from_args(a: &SweepArgs) -> Result<Self, CliError> {
        let values = match (&a.values, &a.log, &a.linear) {
            (Some(v), _, _) => v.clone(),
            (None, Some(r), _) => parse_range(r, true)?,
            (None, None, Some(r)) => parse_range(r, false)?,
            (None, None, None) => return Err(usage("sweep needs --values, --log or --linear")),
        };
        Self::new(&a.param, values, &a.outputs)
    }

    pub fn new(path: &str, values: Vec<f64>, outputs: &[String]) -> Result<Self, CliError> {
        if values.is_empty() {
            return Err(usage("sweep values list is empty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(usage(format!("sweep value {v} is not finite")));
        }
        let outputs = outputs
            .iter()
            .filter(|o| !o.is_empty())
            .map(|o| o.trim().parse())
            .collect::<Result<Vec<SweepOutput>, _>>()?;
        if outputs.is_empty() {
            return Err(usage("sweep needs at least one output"));
        }
        // Resolve the path once up front so typos fail before any work.
        set_param(&mut SystemParams::reference(), path, 1.0)?;
        Ok(Self {
            path: path.to_string(),
            values,
            outputs,
        })
    }
}

/// Sets the field named by `path` (config names, Hz) to `value`.
pub fn set_param(p: &mut SystemParams, path: &str, value: f64) -> Result<(), CliError> {
    let key = path.strip_suffix("_hz").unwrap_or(path);
    let (section, field) = key.split_once('.').unwrap_or(("", key));
    match (section, field) {
        ("", "nonlinear_coupling") => p.nonlinear_coupling = Hz(value),
        ("drive", "amplitude") => p.drive.amplitude = Hz(value),
        ("drive", "bandwidth") => p.drive.bandwidth = Hz(value),
        ("drive", "cavity_amplitude") => p.drive.cavity_amplitude = Some(value),
        ("filter", "fwhm") => p.filter.fwhm = Hz(value),
        ("filter", "far_detuned_loss") => p.filter.far_detuned_loss = Hz(value),
        ("geometry", "finesse") => p.geometry.finesse = Some(value),
        ("geometry", "length_m") => p.geometry.length_m = Some(value),
        ("geometry", "refractive_index") => p.geometry.refractive_index = Some(value),
        (s @ ("pump" | "signal" | "idler"), f @ ("detuning" | "linewidth" | "external")) => {
            let m = match s {
                "pump" => &mut p.pump_mode,
                "signal" => &mut p.signal_mode,
                _ => &mut p.idler_mode,
            };
            match f {
                "detuning" => m.detuning = Hz(value),
                "linewidth" => m.linewidth = Hz(value),
                _ => m.external = Hz(value),
            }
            m.internal = Hz(m.linewidth.0 - m.external.0);
        }
        _ => return Err(usage(format!("unknown sweep parameter `{path}`"))),
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub path: String,
    pub outputs: Vec<SweepOutput>,
    pub rows: Vec<(f64, Vec<f64>)>,
    pub warnings: Vec<String>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.path.clone();
        for o in &self.outputs {
            let _ = write!(out, ",{}", o.column());
        }
        out.push('\n');
        for (x, row) in &self.rows {
            let _ = write!(out, "{x:.16e}");
            for v in row {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn column(&self, o: SweepOutput) -> Option<Vec<f64>> {
        let k = self.outputs.iter().position(|&x| x == o)?;
        Some(self.rows.iter().map(|(_, r)| r[k]).collect())
    }
}

/// Rows are computed in parallel and collected in input order.
pub fn run(
    base: &SystemParams,
    spec: &SweepSpec,
    grid: Option<(usize, usize)>,
    exec: Execution,
) -> Result<SweepTable, CliError> {
    if spec.values.is_empty() {
        return Err(usage("sweep values list is empty"));
    }
    let rows = exec.map(spec.values.len(), |i| sweep_row(base, spec, spec.values[i], grid, exec));
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    // Warnings raised by every row are reported once, the rest per value.
    let common: Vec<String> = rows[0]
        .1
        .iter()
        .filter(|m| rows.iter().all(|(_, w)| w.contains(m)))
        .cloned()
        .collect();
    let mut warnings = Vec::new();
    for msg in &common {
        if !warnings.contains(msg) {
            warnings.push(msg.clone());
        }
    }
    let mut out = Vec::new();
    for (x, (values, w)) in spec.values.iter().zip(rows) {
        for msg in w.iter().filter(|m| !common.contains(m)) {
            let tagged = format!("{} = {x:e}: {msg}", spec.path);
            if !warnings.contains(&tagged) {
                warnings.push(tagged);
            }
        }
        out.push((*x, values));
    }
    Ok(SweepTable {
        path: spec.path.clone(),
        outputs: spec.outputs.clone(),
        rows: out,
        warnings,
    })
}

fn sweep_row(
    base: &SystemParams,
    spec: &SweepSpec,
    x: f64,
    grid: Option<(usize, usize)>,
    exec: Execution,
) -> Result<(Vec<f64>, Vec<String>), CliError> {
    let mut p = base.clone();
    set_param(&mut p, &spec.path, x)?;
    p.validate()?;
    let (r, pump) = pump_of(&p);
    let mut warnings = spdc_lab_core::params::derive(&p).warnings;
    let cw = pump.is_continuous_wave();
    let need_grid = spec.outputs.iter().any(|o| o.needs_grid()) && !cw;
    let matrix = if need_grid {
        let v = jsa::build_grid_with(&r, &pump, &grid_for(&r, &pump, grid), exec).map_err(compute)?;
        warnings.extend(v.warnings().iter().cloned());
        Some(v)
    } else {
        None
    };
    let purity = match &matrix {
        Some(v) if spec.outputs.iter().any(|o| matches!(o, SweepOutput::Purity | SweepOutput::Autocorrelation)) => {
            Some(jsa::purity_with(v, exec).map_err(compute)?)
        }
        _ => None,
    };
    let post = if spec.outputs.iter().any(|o| o.needs_post_filter()) && !cw {
        let n = grid.map_or(DEFAULT_GRID_POINTS, |g| g.0);
        Some(post_filter(&r, &pump, n, exec)?)
    } else {
        None
    };
    if cw && spec.outputs.iter().any(|o| o.needs_grid() || o.needs_post_filter()) {
        warnings.push("CW pump: purity columns are NaN, heralding uses the closed-form infinite-window value".into());
    }
    let rate = || nondegenerate::pair_rate_exact(&r).map_err(compute);
    let values = spec
        .outputs
        .iter()
        .map(|o| {
            Ok(match o {
                SweepOutput::Purity => purity.unwrap_or(f64::NAN),
                SweepOutput::Autocorrelation => purity.map_or(f64::NAN, |v| 1.0 + v),
                SweepOutput::Heralding => match &matrix {
                    Some(v) => jsa::heralding_broadband(v, &r),
                    None => cw_heralding(&r),
                },
                SweepOutput::Rate => rate()?,
                SweepOutput::Bandwidth => nondegenerate::bandwidth(&r) / std::f64::consts::TAU,
                SweepOutput::PostPurity => post.map_or(f64::NAN, |q| q.purity),
                SweepOutput::PostHeralding => post.map_or(f64::NAN, |q| q.heralding),
                SweepOutput::PostTransmission => post.map_or(f64::NAN, |q| q.transmission),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok((values, warnings))
}
