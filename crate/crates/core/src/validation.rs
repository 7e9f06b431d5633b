//! Cross-checks of every closed form against its numerical counterpart.
//!
//! [`run`] evaluates each pair at the given parameters and records expected
//! (closed form), obtained (oracle), tolerance and verdict. Tolerances are
//! grouped by the kind of comparison so they can be overridden together.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::degenerate::{self, DegenerateRegime};
use crate::exec::Execution;
use crate::jsa::{self, GridSpec, JsaMatrix, PumpSpectrum, DEFAULT_GRID_POINTS};
use crate::lineshape::{numeric_fwhm, phase_matching};
use crate::nondegenerate::{self, Conditioning, SinglyFilteredRegime};
use crate::oracle::exact::{projection_deviation, ExactFilterModel};
use crate::oracle::fourier::{fourier_transform, FourierSpec};
use crate::oracle::quad::{quad_1d, QuadratureSpec};
use crate::oracle::svd::svd_purity;
use crate::params::{derive, SystemParams};

/// Pump bandwidth used for the grid checks when the config is CW.
pub const REFERENCE_PUMP_BANDWIDTH_HZ: f64 = 600e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub quadrature: f64,
    pub fourier: f64,
    pub fwhm: f64,
    pub continuity: f64,
    pub purity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: 1e-6,
            fourier: 1e-4,
            fwhm: 1e-4,
            continuity: 1e-9,
            purity: 1e-10,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ToleranceError {
    #[error("unknown tolerance group `{0}` (expected one of quadrature, fourier, fwhm, continuity, purity)")]
    UnknownGroup(String),
    #[error("tolerance for `{0}` must be positive and finite")]
    BadValue(String),
    #[error("expected NAME=VALUE, got `{0}`")]
    Syntax(String),
}

impl Tolerances {
    pub const GROUPS: [&'static str; 5] = ["quadrature", "fourier", "fwhm", "continuity", "purity"];

    pub fn set(&mut self, group: &str, value: f64) -> Result<(), ToleranceError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(ToleranceError::BadValue(group.to_string()));
        }
        let slot = match group {
            "quadrature" => &mut self.quadrature,
            "fourier" => &mut self.fourier,
            "fwhm" => &mut self.fwhm,
            "continuity" => &mut self.continuity,
            "purity" => &mut self.purity,
            _ => return Err(ToleranceError::UnknownGroup(group.to_string())),
        };
        *slot = value;
        Ok(())
    }

    /// Applies a `NAME=VALUE` override.
    pub fn apply(&mut self, assignment: &str) -> Result<(), ToleranceError> {
        let (name, value) = assignment
            .split_once('=')
            .ok_or_else(|| ToleranceError::Syntax(assignment.to_string()))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| ToleranceError::Syntax(assignment.to_string()))?;
        self.set(name.trim(), value)
    }
}

/// Deliberate corruption of one closed-form constant, to confirm the suite
/// notices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Pair-rate prefactors scaled by 1.01.
    RatePrefactor,
    /// g² excess scaled by 1.01.
    PeakExcess,
    /// Product-Lorentzian FWHM scaled by 1.01.
    Bandwidth,
}

const MUTATION_FACTOR: f64 = 1.01;

impl Mutation {
    pub const ALL: [Mutation; 3] = [Mutation::RatePrefactor, Mutation::PeakExcess, Mutation::Bandwidth];

    pub fn as_str(self) -> &'static str {
        match self {
            Mutation::RatePrefactor => "rate-prefactor",
            Mutation::PeakExcess => "peak-excess",
            Mutation::Bandwidth => "bandwidth",
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mutation `{s}` (expected rate-prefactor, peak-excess or bandwidth)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|obtained − expected| ≤ tolerance·|expected|`.
    Relative,
    /// `|obtained − expected| ≤ tolerance`.
    Absolute,
    /// `obtained ≤ expected + tolerance`.
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub group: &'static str,
    pub comparison: Comparison,
    pub expected: f64,
    pub obtained: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn compare(
        name: impl Into<String>,
        group: &'static str,
        comparison: Comparison,
        expected: f64,
        obtained: f64,
        tolerance: f64,
    ) -> Self {
        let diff = obtained - expected;
        let pass = match comparison {
            Comparison::Relative => diff.abs() <= tolerance * expected.abs(),
            Comparison::Absolute => diff.abs() <= tolerance,
            Comparison::AtMost => obtained <= expected + tolerance,
        };
        Self {
            name: name.into(),
            group,
            comparison,
            expected,
            obtained: Some(obtained),
            tolerance,
            pass,
            error: None,
        }
    }

    fn failed(name: impl Into<String>, group: &'static str, expected: f64, tolerance: f64, error: String) -> Self {
        Self {
            name: name.into(),
            group,
            comparison: Comparison::Relative,
            expected,
            obtained: None,
            tolerance,
            pass: false,
            error: Some(error),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Skipped {
    pub name: &'static str,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tolerances: Tolerances,
    pub mutation: Option<Mutation>,
    pub checks: Vec<Check>,
    pub skipped: Vec<Skipped>,
    pub passed: usize,
    pub failed: usize,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationOptions {
    pub tolerances: Tolerances,
    pub mutation: Option<Mutation>,
    /// Points per axis of the JSA grid checks.
    pub grid_points: (usize, usize),
    pub exec: Execution,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            mutation: None,
            grid_points: (DEFAULT_GRID_POINTS, DEFAULT_GRID_POINTS),
            exec: Execution::default(),
        }
    }
}

struct Suite<'a> {
    opts: &'a ValidationOptions,
    checks: Vec<Check>,
    skipped: Vec<Skipped>,
}

impl Suite<'_> {
    fn mutated(&self, m: Mutation, value: f64) -> f64 {
        if self.opts.mutation == Some(m) {
            value * MUTATION_FACTOR
        } else {
            value
        }
    }

    fn skip(&mut self, name: &'static str, reason: impl fmt::Display) {
        self.skipped.push(Skipped {
            name,
            reason: reason.to_string(),
        });
    }

    fn relative<E: fmt::Display>(&mut self, name: &str, group: &'static str, expected: f64, obtained: Result<f64, E>) {
        let tol = self.tolerance(group);
        self.checks.push(match obtained {
            Ok(v) => Check::compare(name, group, Comparison::Relative, expected, v, tol),
            Err(e) => Check::failed(name, group, expected, tol, e.to_string()),
        });
    }

    fn tolerance(&self, group: &str) -> f64 {
        let t = &self.opts.tolerances;
        match group {
            "quadrature" => t.quadrature,
            "fourier" => t.fourier,
            "fwhm" => t.fwhm,
            "continuity" => t.continuity,
            "purity" => t.purity,
            _ => 0.0,
        }
    }
}

/// Breakpoints at ±scale·2^k out to `reach`, for integrands with features
/// spread over many decades.
fn graded_breakpoints(scale: f64, reach: f64) -> Vec<f64> {
    let mut points = vec![0.0];
    let mut x = scale;
    while x < reach {
        points.push(x);
        points.push(-x);
        x *= 2.0;
    }
    points
}

/// `½∫S(ω) dω/2π`: each degenerate pair puts two photons in the mode.
pub fn degenerate_rate_by_quadrature(r: &DegenerateRegime, rel_tol: f64) -> Result<f64, crate::oracle::QuadError> {
    let h = r.half_width();
    let mut points = graded_breakpoints(h, 1e3 * h);
    points.push(-2.0 * r.detuning);
    let spec = QuadratureSpec::whole_line(h)
        .with_rel_tol(rel_tol)
        .with_max_subdivisions(100_000)
        .with_breakpoints(points);
    Ok(quad_1d(|w| degenerate::spectral_density(w, r), &spec)?.value / TAU / 2.0)
}

/// `∫S_a(ω) dω/2π`.
pub fn nondegenerate_rate_by_quadrature(r: &SinglyFilteredRegime, rel_tol: f64) -> Result<f64, crate::oracle::QuadError> {
    let spec = QuadratureSpec::whole_line(r.b())
        .with_rel_tol(rel_tol)
        .with_max_subdivisions(200_000)
        .with_breakpoints(graded_breakpoints(r.a().min(r.b()), 1e3 * r.b()));
    Ok(quad_1d(|w| nondegenerate::spectral_density(w, r), &spec)?.value / TAU)
}

/// g²(τ) from the Fourier transform of `F(ω)/((a − iω)(b + iω))`, with the
/// same normalisation as [`nondegenerate::g2_conditioned`].
pub fn nondegenerate_g2_by_fourier(
    tau: f64,
    r: &SinglyFilteredRegime,
    conditioning: Conditioning,
    rel_tol: f64,
) -> Result<f64, crate::oracle::QuadError> {
    let (a, b) = (r.a(), r.b());
    let pm = r.phase_match();
    let t = match conditioning {
        Conditioning::AGivenB => tau,
        Conditioning::BGivenA => -tau,
    };
    let f = |w: f64| Complex64::from(phase_matching(w, pm)) / (Complex64::new(a, -w) * Complex64::new(b, w));
    // |F| ≤ min(1, 2/(|ω|τ_rt)) bounds the tail as 1/ω² or 1/|ω|³.
    let peak = 1.0 / (a + b);
    let tail = 1e-2 * rel_tol * peak;
    let spec = if r.round_trip_difference > 0.0 {
        FourierSpec::new(2.0 / r.round_trip_difference, 3.0, tail, a.min(b))
    } else {
        FourierSpec::new(1.0, 2.0, tail, a.min(b)).with_smooth_envelope()
    };
    let spec = FourierSpec {
        rel_tol: 1e-2 * rel_tol,
        ..spec
    };
    let j = fourier_transform(f, t, &spec)?.norm() * (a + b);
    Ok(1.0 + nondegenerate::peak_excess(r) * j * j)
}

/// Degenerate g²(τ) at zero detuning from the transform of
/// `1/((h − iω)(h + iω))`, anchored to the closed-form peak.
pub fn degenerate_g2_by_fourier(tau: f64, r: &DegenerateRegime, rel_tol: f64) -> Result<f64, ValidationError> {
    let h = r.half_width();
    let peak = degenerate::g2(0.0, r)? - 1.0;
    let f = |w: f64| (Complex64::new(h, -w) * Complex64::new(h, w)).inv();
    let spec = FourierSpec {
        rel_tol: 1e-2 * rel_tol,
        ..FourierSpec::new(1.0, 2.0, 1e-2 * rel_tol / (2.0 * h), h).with_smooth_envelope()
    };
    let j = fourier_transform(f, tau, &spec)?.norm() * 2.0 * h;
    Ok(1.0 + peak * j * j)
}

#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error(transparent)]
    Quadrature(#[from] crate::oracle::QuadError),
    #[error(transparent)]
    Degenerate(#[from] degenerate::DegenerateError),
}

pub fn run(p: &SystemParams, opts: &ValidationOptions) -> ValidationReport {
    let d = derive(p);
    let mut s = Suite {
        opts,
        checks: Vec::new(),
        skipped: Vec::new(),
    };
    let tol = opts.tolerances;

    // Degenerate closed forms.
    let deg = DegenerateRegime::filtered(p, &d);
    for (label, r) in [("degenerate", deg), ("degenerate.bare", DegenerateRegime::bare(p, &d))] {
        let expected = s.mutated(Mutation::RatePrefactor, degenerate::pair_rate(&r));
        let got = degenerate_rate_by_quadrature(&r, 1e-2 * tol.quadrature);
        s.relative(&format!("{label}.pair_rate.quadrature"), "quadrature", expected, got);
    }
    match degenerate::bandwidth(&deg) {
        Ok(bw) => {
            let w = deg.kappa / deg.group_index;
            let got = numeric_fwhm(|x| degenerate::spectral_density(x, &deg), 0.0, 10.0 * w);
            s.relative(
                "degenerate.bandwidth.numeric_fwhm",
                "fwhm",
                s.mutated(Mutation::Bandwidth, bw),
                got,
            );
            for k in [0.5, 1.0, 3.0] {
                let tau = k * deg.correlation_time();
                let expected = 1.0 + s.mutated(Mutation::PeakExcess, degenerate::g2(tau, &deg).unwrap_or(f64::NAN) - 1.0);
                let got = degenerate_g2_by_fourier(tau, &deg, tol.fourier);
                s.relative(&format!("degenerate.g2.fourier.tau_{k}tc"), "fourier", expected, got);
            }
        }
        Err(e) => {
            s.skip("degenerate.bandwidth.numeric_fwhm", &e);
            s.skip("degenerate.g2.fourier", &e);
        }
    }

    // Non-degenerate closed forms.
    let singly = SinglyFilteredRegime::from_params(p, &d);
    if let Err(e) = nondegenerate::pair_rate_exact(&singly) {
        for name in [
            "nondegenerate.pair_rate_exact.quadrature",
            "nondegenerate.g2.fourier",
            "nondegenerate.g2.continuity",
            "nondegenerate.g2.time_reversal",
            "jsa.purity.svd",
        ] {
            s.skip(name, &e);
        }
    } else {
        nondegenerate_checks(&mut s, &singly);
        jsa_checks(&mut s, p, &d, &singly);
    }

    // Projection validity of the narrowed model.
    let base = ExactFilterModel::from_params(p, &d);
    let mut devs = Vec::new();
    for ratio in [4.0, 16.0, 64.0] {
        let m = ExactFilterModel {
            kappa_abs: ratio * base.kappa,
            ..base
        };
        devs.push((ratio, projection_deviation(&m, m.kappa / (2.0 * m.group_index()), 101)));
    }
    for w in devs.windows(2) {
        let name = format!("exact.projection_deviation.decreases_{}_to_{}", w[0].0, w[1].0);
        s.checks.push(match (&w[0].1, &w[1].1) {
            (Ok(lo), Ok(hi)) => {
                let mut c = Check::compare(&name, "projection", Comparison::AtMost, *lo, *hi, 0.0);
                c.pass = hi < lo;
                c
            }
            (Err(e), _) | (_, Err(e)) => Check::failed(&name, "projection", f64::NAN, 0.0, e.to_string()),
        });
    }

    let failed = s.checks.iter().filter(|c| !c.pass).count();
    ValidationReport {
        tolerances: tol,
        mutation: opts.mutation,
        passed: s.checks.len() - failed,
        failed,
        checks: s.checks,
        skipped: s.skipped,
    }
}

fn nondegenerate_checks(s: &mut Suite<'_>, singly: &SinglyFilteredRegime) {
    let tol = s.opts.tolerances;
    for (label, r) in [("nondegenerate", *singly), ("nondegenerate.bare", singly.bare())] {
        let expected = s.mutated(
            Mutation::RatePrefactor,
            nondegenerate::pair_rate_exact(&r).expect("zero two-photon detuning checked"),
        );
        let got = nondegenerate_rate_by_quadrature(&r, 1e-2 * tol.quadrature);
        s.relative(&format!("{label}.pair_rate_exact.quadrature"), "quadrature", expected, got);

        let bw = s.mutated(Mutation::Bandwidth, nondegenerate::bandwidth(&r));
        let got = numeric_fwhm(|x| nondegenerate::spectral_density(x, &r), 0.0, 10.0 * r.a());
        s.relative(&format!("{label}.bandwidth.numeric_fwhm"), "fwhm", bw, got);
    }

    let r = *singly;
    let (a, b, tr) = (r.a(), r.b(), r.round_trip_difference);
    let closed = |s: &Suite<'_>, tau: f64| {
        let g = nondegenerate::g2_conditioned(tau, &r, Conditioning::AGivenB).expect("zero two-photon detuning checked");
        1.0 + s.mutated(Mutation::PeakExcess, g - 1.0)
    };
    let samples = [
        ("plateau.centre", 0.0),
        ("plateau.quarter", tr / 4.0),
        ("plateau.minus_quarter", -tr / 4.0),
        ("right_tail", tr / 2.0 + 1.0 / a),
        ("left_tail", -tr / 2.0 - 1.0 / b),
    ];
    for (label, tau) in samples {
        if tr == 0.0 && label.starts_with("plateau.") && tau != 0.0 {
            continue;
        }
        let expected = closed(s, tau);
        let got = nondegenerate_g2_by_fourier(tau, &r, Conditioning::AGivenB, tol.fourier);
        s.relative(&format!("nondegenerate.g2.fourier.{label}"), "fourier", expected, got);
    }

    if tr > 0.0 {
        for (label, edge, outside) in [
            ("right_edge", tr / 2.0, (tr / 2.0).next_up()),
            ("left_edge", -tr / 2.0, (-tr / 2.0).next_down()),
        ] {
            let inside = closed(s, edge);
            let beyond = closed(s, outside);
            s.checks.push(Check::compare(
                format!("nondegenerate.g2.continuity.{label}"),
                "continuity",
                Comparison::Relative,
                inside,
                beyond,
                tol.continuity,
            ));
        }
    } else {
        s.skip("nondegenerate.g2.continuity", "no phase mismatch (τ_rt = 0), single branch boundary at τ = 0");
    }

    let mut worst: f64 = 0.0;
    for i in 0..=200 {
        let tau = (i as f64 - 100.0) / 100.0 * (tr + 5.0 / a);
        let ab = nondegenerate::g2_conditioned(tau, &r, Conditioning::AGivenB).expect("checked");
        let ba = nondegenerate::g2_conditioned(-tau, &r, Conditioning::BGivenA).expect("checked");
        worst = worst.max((ab - ba).abs());
    }
    s.checks.push(Check::compare(
        "nondegenerate.g2.time_reversal",
        "identity",
        Comparison::Absolute,
        0.0,
        worst,
        0.0,
    ));

    if tr > 0.0 {
        let esc = r.signal_escape();
        let x = r.kappa_a * tr / r.group_index;
        let below = esc * x * (tr * tr + 3.0 * tr * tr) / (12.0 * tr * tr);
        let above = nondegenerate::heralding_window(tr, &r);
        s.checks.push(Check::compare(
            "nondegenerate.heralding_window.branch_mismatch",
            "series",
            Comparison::AtMost,
            x * x,
            (below - above).abs(),
            0.0,
        ));
    }
}

fn jsa_checks(s: &mut Suite<'_>, p: &SystemParams, d: &crate::params::DerivedParams, r: &SinglyFilteredRegime) {
    let tol = s.opts.tolerances;
    let mut pump = PumpSpectrum::from_params(p, d);
    if pump.is_continuous_wave() {
        pump.bandwidth = TAU * REFERENCE_PUMP_BANDWIDTH_HZ;
    }
    let (n, m) = s.opts.grid_points;
    let grid = GridSpec::default_for(r, &pump).with_points(n, m);
    let v = match jsa::build_grid_with(r, &pump, &grid, s.opts.exec) {
        Ok(v) => v,
        Err(e) => {
            s.checks.push(Check::failed("jsa.purity.svd", "purity", f64::NAN, tol.purity, e.to_string()));
            return;
        }
    };
    let trace = jsa::purity_with(&v, s.opts.exec);
    match trace {
        Ok(t) => {
            let svd = svd_purity(&v);
            s.checks.push(match svd {
                Ok(x) => Check::compare("jsa.purity.svd", "purity", Comparison::Absolute, t, x, tol.purity),
                Err(e) => Check::failed("jsa.purity.svd", "purity", t, tol.purity, e.to_string()),
            });
        }
        Err(e) => s.checks.push(Check::failed("jsa.purity.svd", "purity", f64::NAN, tol.purity, e.to_string())),
    }
    for (name, matrix, expected) in synthetic_matrices() {
        let t = jsa::purity_with(&matrix, s.opts.exec).map_err(|e| e.to_string());
        let x = svd_purity(&matrix).map_err(|e| e.to_string());
        match (t, x) {
            (Ok(t), Ok(x)) => {
                s.checks.push(Check::compare(format!("{name}.trace"), "purity", Comparison::Absolute, expected, t, tol.purity));
                s.checks.push(Check::compare(format!("{name}.svd"), "purity", Comparison::Absolute, expected, x, tol.purity));
            }
            (Err(e), _) | (_, Err(e)) => s.checks.push(Check::failed(name, "purity", expected, tol.purity, e)),
        }
    }
    let bound = (r.signal_escape() + r.idler_escape()) / 2.0;
    s.checks.push(Check::compare(
        "jsa.heralding.escape_bound",
        "bound",
        Comparison::AtMost,
        bound,
        jsa::heralding_broadband(&v, r),
        1e-12,
    ));
}

/// A rank-1 product and a matrix with two equal singular values.
fn synthetic_matrices() -> Vec<(&'static str, JsaMatrix, f64)> {
    let n = 32;
    let grid = GridSpec {
        n_signal: n,
        n_idler: n,
        signal_extent: 1.0,
        idler_extent: 1.0,
        signal_center: 0.0,
        idler_center: 0.0,
    };
    let x: Vec<f64> = (0..n).map(|i| (-(i as f64 - 12.0).powi(2) / 20.0).exp()).collect();
    let y: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar((-(j as f64 - 17.0).powi(2) / 30.0).exp(), 0.1 * j as f64))
        .collect();
    let rank_one = x.iter().flat_map(|&xi| y.iter().map(move |&yj| yj * xi)).collect();
    // Two orthonormal-by-construction columns of equal weight.
    let mut two_mode = vec![Complex64::default(); n * n];
    two_mode[3 * n + 5] = Complex64::new(1.0, 0.0);
    two_mode[20 * n + 9] = Complex64::new(0.0, 1.0);
    vec![
        ("jsa.purity.rank_one", JsaMatrix::from_values(rank_one, grid).expect("valid"), 1.0),
        ("jsa.purity.two_mode", JsaMatrix::from_values(two_mode, grid).expect("valid"), 0.5),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ValidationOptions {
        ValidationOptions {
            grid_points: (128, 128),
            ..ValidationOptions::default()
        }
    }

    #[test]
    fn reference_passes() {
        let report = run(&SystemParams::reference(), &quick());
        let failures: Vec<_> = report.failures().collect();
        assert!(failures.is_empty(), "{failures:#?}");
        assert!(report.checks.len() >= 20);
    }

    #[test]
    fn every_mutation_is_caught() {
        for m in Mutation::ALL {
            let opts = ValidationOptions {
                mutation: Some(m),
                ..quick()
            };
            let report = run(&SystemParams::reference(), &opts);
            assert!(!report.all_passed(), "{m} went unnoticed");
        }
    }

    #[test]
    fn unattainable_quadrature_tolerance_fails() {
        let mut opts = quick();
        opts.tolerances.apply("quadrature=1e-15").unwrap();
        let report = run(&SystemParams::reference(), &opts);
        assert!(report.failures().any(|c| c.group == "quadrature"));
        assert!(report.failures().all(|c| c.group == "quadrature"));
    }

    #[test]
    fn tolerance_parsing() {
        let mut t = Tolerances::default();
        t.apply("fourier=2e-3").unwrap();
        assert_eq!(t.fourier, 2e-3);
        assert!(matches!(t.apply("nope=1"), Err(ToleranceError::UnknownGroup(_))));
        assert!(matches!(t.apply("fwhm"), Err(ToleranceError::Syntax(_))));
        assert!(matches!(t.apply("fwhm=-1"), Err(ToleranceError::BadValue(_))));
    }

    #[test]
    fn report_serialises_names_and_verdicts() {
        let report = run(&SystemParams::reference(), &quick());
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let first = &json["checks"][0];
        for key in ["name", "expected", "obtained", "tolerance", "pass"] {
            assert!(!first[key].is_null(), "{key}");
        }
    }
}
