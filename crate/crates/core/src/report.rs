//! Metric tables and correlation traces in a form ready for export.

use std::f64::consts::TAU;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::degenerate::{self, DegenerateRegime};
use crate::nondegenerate::{self, Conditioning, G2Branch, SinglyFilteredRegime};
use crate::params::{derive, DerivedParams, SystemParams};

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("unknown regime `{0}` (expected bare, degenerate-bare, degenerate-filtered or singly-filtered)")]
    UnknownRegime(String),
    #[error("trace needs at least 2 samples and tau_max > tau_min (got {samples} samples over [{min}, {max}])")]
    TraceRange { min: f64, max: f64, samples: usize },
    #[error(transparent)]
    Nondegenerate(#[from] nondegenerate::NondegenerateError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Singly-resonant source without the filter.
    Bare,
    DegenerateBare,
    DegenerateFiltered,
    SinglyFiltered,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::Bare,
        Regime::DegenerateBare,
        Regime::DegenerateFiltered,
        Regime::SinglyFiltered,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Bare => "bare",
            Regime::DegenerateBare => "degenerate-bare",
            Regime::DegenerateFiltered => "degenerate-filtered",
            Regime::SinglyFiltered => "singly-filtered",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| ReportError::UnknownRegime(s.to_string()))
    }
}

/// One row of a metrics table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scalar {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
    /// Formula the value was evaluated from.
    pub provenance: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub regime: Regime,
    pub scalars: Vec<Scalar>,
    pub warnings: Vec<String>,
}

impl MetricsReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|s| s.name == name).map(|s| s.value)
    }

    /// `name,value,unit,provenance`, values with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,unit,provenance\n");
        for s in &self.scalars {
            let _ = writeln!(out, "{},{:.16e},{},\"{}\"", s.name, s.value, s.unit, s.provenance.replace('"', "\"\""));
        }
        out
    }
}

struct Rows(Vec<Scalar>);

impl Rows {
    fn push(&mut self, name: &'static str, value: f64, unit: &'static str, provenance: &'static str) {
        self.0.push(Scalar {
            name,
            value,
            unit,
            provenance,
        });
    }
}

pub fn metrics(p: &SystemParams, regime: Regime) -> Result<MetricsReport, ReportError> {
    let d = derive(p);
    metrics_with(p, &d, regime)
}

pub fn metrics_with(p: &SystemParams, d: &DerivedParams, regime: Regime) -> Result<MetricsReport, ReportError> {
    let mut warnings = d.warnings.clone();
    let scalars = match regime {
        Regime::Bare => singly_rows(&SinglyFilteredRegime::from_params(p, d).bare(), true)?,
        Regime::SinglyFiltered => singly_rows(&SinglyFilteredRegime::from_params(p, d), false)?,
        Regime::DegenerateBare => degenerate_rows(&DegenerateRegime::bare(p, d), true, &mut warnings),
        Regime::DegenerateFiltered => degenerate_rows(&DegenerateRegime::filtered(p, d), false, &mut warnings),
    };
    Ok(MetricsReport {
        regime,
        scalars,
        warnings,
    })
}

fn singly_rows(r: &SinglyFilteredRegime, bare: bool) -> Result<Vec<Scalar>, ReportError> {
    let mut rows = Rows(Vec::new());
    let bw = nondegenerate::bandwidth(r);
    let rate = nondegenerate::pair_rate_exact(r)?;
    rows.push("group_index", r.group_index, "1", if bare { "1 (filter removed)" } else { "(κ_a + κ_abs)/Δ" });
    rows.push(
        "round_trip_difference",
        r.round_trip_difference,
        "s",
        if bare { "0 (filter removed)" } else { "2π n_g/(κ_a F) or (nL/c)(n_g − 1)" },
    );
    rows.push("bandwidth", bw, "rad/s", "FWHM of |1/(κ_a/2n_g − iω)|²·|1/(κ_b/2 + iω)|²");
    rows.push("bandwidth_hz", bw / TAU, "Hz", "bandwidth/2π");
    rows.push(
        "pair_rate",
        rate,
        "pairs/s",
        "4g²|β|²κ_aκ_b/n_g² ∫dω/2π sinc²(ωτ_rt/2)/((a² + ω²)(b² + ω²)), a = κ_a/2n_g, b = κ_b/2",
    );
    rows.push(
        "pair_rate_unmatched",
        nondegenerate::pair_rate_unmatched(r),
        "pairs/s",
        "8g²|β|²/(n_g(a + b))",
    );
    rows.push("spectral_brightness", rate / bw, "pairs/s per rad/s", "pair_rate/bandwidth");
    rows.push("correlation_time", r.group_index / r.kappa_a, "s", "n_g/κ_a");
    rows.push(
        "g2_zero",
        nondegenerate::g2_conditioned(0.0, r, Conditioning::AGivenB)?,
        "1",
        "1 + κ_aκ_b/(16g²|β|²)·Ĵ(0)²",
    );
    // The plateau's slope vanishes where e^{−a(τ+τ_rt/2)} = e^{b(τ−τ_rt/2)}.
    let (a, b) = (r.a(), r.b());
    let tau_star = r.round_trip_difference / 2.0 * (b - a) / (a + b);
    rows.push(
        "g2_peak",
        nondegenerate::g2_conditioned(tau_star, r, Conditioning::AGivenB)?,
        "1",
        "g2 at τ* = (τ_rt/2)(b − a)/(a + b)",
    );
    rows.push(
        "heralding_infinite_window",
        nondegenerate::heralding_window(f64::INFINITY, r),
        "1",
        "(κ_a,ext/κ_a)(1 − κ_aτ_rt/(6n_g))",
    );
    rows.push("signal_escape_efficiency", r.signal_escape(), "1", "κ_a,ext/κ_a");
    rows.push("idler_escape_efficiency", r.idler_escape(), "1", "κ_b,ext/κ_b");
    rows.push("threshold_ratio", r.threshold_ratio(), "1", "4g|β|/√(κ_aκ_b)");
    Ok(rows.0)
}

fn degenerate_rows(r: &DegenerateRegime, bare: bool, warnings: &mut Vec<String>) -> Vec<Scalar> {
    let mut rows = Rows(Vec::new());
    let rate = degenerate::pair_rate(r);
    rows.push("group_index", r.group_index, "1", if bare { "1 (filter removed)" } else { "(κ + κ_abs)/Δ" });
    match degenerate::bandwidth(r) {
        Ok(bw) => {
            rows.push("bandwidth", bw, "rad/s", "0.6436·κ/n_g");
            rows.push("bandwidth_hz", bw / TAU, "Hz", "bandwidth/2π");
            rows.push("spectral_brightness", rate / bw, "pairs/s per rad/s", "pair_rate/bandwidth");
        }
        Err(e) => warnings.push(format!("bandwidth and spectral brightness omitted: {e}")),
    }
    rows.push("pair_rate", rate, "pairs/s", "g²|β|²κ/((δ² + (κ/2n_g)²) n_g³)");
    rows.push("correlation_time", r.correlation_time(), "s", "n_g/κ");
    match degenerate::g2(0.0, r) {
        Ok(g) => rows.push("g2_peak", g, "1", "1 + 1/(4Rτ_c)"),
        Err(e) => warnings.push(format!("g2 omitted: {e}")),
    }
    rows.push(
        "heralding_infinite_window",
        degenerate::heralding(f64::INFINITY, r),
        "1",
        "κ_ext/κ",
    );
    rows.push("escape_efficiency", r.escape_efficiency(), "1", "κ_ext/κ");
    rows.push("threshold_ratio", r.threshold_ratio(), "1", "4g|β|/κ");
    rows.0
}

/// Curves available in a [`CorrelationTrace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Curve {
    /// Singly-resonant bare cavity, `1 + κ_aκ_b/(16g²|β|²)·e^{−κ|τ|}`.
    Bare,
    DoublyFiltered,
    SinglyFiltered,
}

impl Curve {
    pub const ALL: [Curve; 3] = [Curve::Bare, Curve::DoublyFiltered, Curve::SinglyFiltered];

    pub fn as_str(self) -> &'static str {
        match self {
            Curve::Bare => "bare",
            Curve::DoublyFiltered => "doubly_filtered",
            Curve::SinglyFiltered => "singly_filtered",
        }
    }
}

/// g²(τ) samples on a shared τ axis in units of τ_c = n_g/κ_a of the
/// filtered signal mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationTrace {
    pub correlation_time: f64,
    /// `(κ_a/4g|β|)²`; the normalised columns are (g² − 1)/scale.
    pub peak_scale: f64,
    pub tau_over_tc: Vec<f64>,
    pub curves: Vec<(Curve, Vec<f64>)>,
    /// Branch of the singly-filtered piecewise form at each sample.
    pub branch: Vec<G2Branch>,
    pub conditioning: Conditioning,
}

impl CorrelationTrace {
    pub fn curve(&self, c: Curve) -> Option<&[f64]> {
        self.curves.iter().find(|(k, _)| *k == c).map(|(_, v)| v.as_slice())
    }

    /// Columns `tau_over_tc, tau_s`, then `g2_<curve>, norm_<curve>` per
    /// curve, then `branch`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau_over_tc,tau_s");
        for (c, _) in &self.curves {
            let _ = write!(out, ",g2_{0},norm_{0}", c.as_str());
        }
        out.push_str(",branch\n");
        for (i, &t) in self.tau_over_tc.iter().enumerate() {
            let _ = write!(out, "{t:.16e},{:.16e}", t * self.correlation_time);
            for (_, v) in &self.curves {
                let _ = write!(out, ",{:.16e},{:.16e}", v[i], (v[i] - 1.0) / self.peak_scale);
            }
            let _ = writeln!(out, ",{}", self.branch[i]);
        }
        out
    }
}

/// Samples `samples` points over `[tau_min, tau_max]` (units of τ_c). The
/// doubly-filtered curve needs zero signal detuning and is dropped with an
/// error otherwise; the singly-filtered curves need zero two-photon
/// detuning.
pub fn correlation_trace(
    p: &SystemParams,
    curves: &[Curve],
    tau_min: f64,
    tau_max: f64,
    samples: usize,
    conditioning: Conditioning,
) -> Result<CorrelationTrace, TraceError> {
    if samples < 2 || !(tau_max > tau_min) || !tau_min.is_finite() || !tau_max.is_finite() {
        return Err(ReportError::TraceRange {
            min: tau_min,
            max: tau_max,
            samples,
        }
        .into());
    }
    let d = derive(p);
    let singly = SinglyFilteredRegime::from_params(p, &d);
    let bare = singly.bare();
    let doubly = DegenerateRegime::filtered(p, &d);
    let tc = singly.group_index / singly.kappa_a;
    let step = (tau_max - tau_min) / (samples - 1) as f64;
    let axis: Vec<f64> = (0..samples).map(|i| tau_min + step * i as f64).collect();
    let mut out = Vec::new();
    for &c in curves {
        let values = axis
            .iter()
            .map(|&x| {
                let tau = x * tc;
                match c {
                    Curve::Bare => nondegenerate::g2_conditioned(tau, &bare, conditioning).map_err(TraceError::from),
                    Curve::SinglyFiltered => {
                        nondegenerate::g2_conditioned(tau, &singly, conditioning).map_err(TraceError::from)
                    }
                    Curve::DoublyFiltered => degenerate::g2(tau, &doubly).map_err(TraceError::from),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push((c, values));
    }
    let branch = axis
        .iter()
        .map(|&x| {
            let t = match conditioning {
                Conditioning::AGivenB => x * tc,
                Conditioning::BGivenA => -x * tc,
            };
            G2Branch::of(t, singly.round_trip_difference)
        })
        .collect();
    Ok(CorrelationTrace {
        correlation_time: tc,
        peak_scale: nondegenerate::peak_excess(&singly),
        tau_over_tc: axis,
        curves: out,
        branch,
        conditioning,
    })
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Degenerate(#[from] degenerate::DegenerateError),
    #[error(transparent)]
    Nondegenerate(#[from] nondegenerate::NondegenerateError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn singly_filtered_table_rows() {
        let p = SystemParams::reference();
        let m = metrics(&p, Regime::SinglyFiltered).unwrap();
        assert!((m.get("bandwidth_hz").unwrap() / 4.0e6 - 1.0).abs() < 0.01);
        assert!((m.get("heralding_infinite_window").unwrap() - 0.894).abs() < 1e-3);
        let g = TAU * 2e6;
        let kappa = TAU * 1e9;
        let table = 16.0 * g * g * 400.0 / (kappa * 250.0);
        assert!((m.get("pair_rate").unwrap() / table - 1.0).abs() < 0.02);
        for s in &m.scalars {
            assert!(!s.unit.is_empty() && !s.provenance.is_empty(), "{}", s.name);
        }
        let peak = m.get("g2_peak").unwrap();
        let r = SinglyFilteredRegime::from_params(&p, &derive(&p));
        let tr = r.round_trip_difference;
        for i in 0..=100 {
            let tau = -tr / 2.0 + tr * i as f64 / 100.0;
            assert!(nondegenerate::g2_conditioned(tau, &r, Conditioning::AGivenB).unwrap() <= peak * (1.0 + 1e-14));
        }
        assert!(peak > m.get("g2_zero").unwrap());
    }

    #[test]
    fn bare_rows_and_brightness_ratio() {
        let p = SystemParams::reference();
        let bare = metrics(&p, Regime::Bare).unwrap();
        let kappa = TAU * 1e9;
        let g2b2 = (TAU * 2e6f64).powi(2) * 400.0;
        assert_relative_eq!(bare.get("bandwidth").unwrap(), 0.643_594_252_905_582_6 * kappa, max_relative = 1e-12);
        assert_relative_eq!(bare.get("pair_rate").unwrap(), 8.0 * g2b2 / kappa, max_relative = 1e-12);
        let filtered = metrics(&p, Regime::SinglyFiltered).unwrap();
        let ratio = filtered.get("spectral_brightness").unwrap() / bare.get("spectral_brightness").unwrap();
        assert!((ratio - 16.0 / 12.5).abs() < 0.03, "{ratio}");
    }

    #[test]
    fn degenerate_detuned_report_omits_rows() {
        let mut p = SystemParams::reference();
        p.signal_mode.detuning = crate::params::Hz(1e5);
        let m = metrics(&p, Regime::DegenerateFiltered).unwrap();
        assert!(m.get("g2_peak").is_none());
        assert!(m.get("pair_rate").is_some());
        assert!(m.warnings.iter().any(|w| w.starts_with("g2 omitted")));
    }

    #[test]
    fn regime_names_round_trip() {
        for r in Regime::ALL {
            assert_eq!(r.as_str().parse::<Regime>().unwrap(), r);
        }
        assert!("filtered".parse::<Regime>().is_err());
    }

    #[test]
    fn trace_peak_normalisation() {
        let p = SystemParams::reference();
        let t = correlation_trace(&p, &Curve::ALL, -1.0, 5.0, 601, Conditioning::AGivenB).unwrap();
        for c in [Curve::Bare, Curve::DoublyFiltered] {
            let peak = t
                .curve(c)
                .unwrap()
                .iter()
                .map(|g| (g - 1.0) / t.peak_scale)
                .fold(f64::MIN, f64::max);
            assert_relative_eq!(peak, 1.0, max_relative = 1e-12);
        }
        let singly = t.curve(Curve::SinglyFiltered).unwrap();
        assert!(singly.iter().all(|g| (g - 1.0) / t.peak_scale <= 1.0));
        let csv = t.to_csv();
        assert!(csv.starts_with("tau_over_tc,tau_s,g2_bare,norm_bare,"));
        assert_eq!(csv.lines().count(), 602);
    }

    #[test]
    fn trace_rejects_bad_range() {
        let p = SystemParams::reference();
        assert!(correlation_trace(&p, &Curve::ALL, 1.0, 1.0, 10, Conditioning::AGivenB).is_err());
        assert!(correlation_trace(&p, &Curve::ALL, 0.0, 1.0, 1, Conditioning::AGivenB).is_err());
    }
}
