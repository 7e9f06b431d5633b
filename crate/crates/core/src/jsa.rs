//! Broadband pumping: joint spectral amplitude on a grid, Schmidt purity,
//! heralding efficiency and JSI export.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::lineshape::phase_matching;
use crate::nondegenerate::SinglyFilteredRegime;
use crate::params::{DerivedParams, SystemParams};

pub const DEFAULT_GRID_POINTS: usize = 512;
pub const MIN_GRID_POINTS: usize = 16;
/// Samples per narrowed FWHM below which a grid is flagged as coarse.
const MIN_POINTS_PER_FWHM: f64 = 8.0;

#[derive(Debug, Error, PartialEq)]
pub enum JsaError {
    #[error("continuous-wave pump has a delta-function JSA ridge; use the closed-form metrics instead")]
    ContinuousWave,
    #[error("grid needs at least {MIN_GRID_POINTS} points per axis (got {0}x{1})")]
    GridTooSmall(usize, usize),
    #[error("grid extents must be positive and finite")]
    BadExtent,
    #[error("JSA matrix is identically zero")]
    ZeroMatrix,
    #[error("JSA has a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("{len} values do not fill a {rows}x{cols} grid")]
    Shape { rows: usize, cols: usize, len: usize },
}

/// Gaussian pump amplitude `β(Ω) = β·exp(−Ω²/(2σ_p²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PumpSpectrum {
    pub peak: Complex64,
    pub bandwidth: f64,
}

impl PumpSpectrum {
    pub fn new(peak: Complex64, bandwidth: f64) -> Self {
        Self { peak, bandwidth }
    }

    pub fn from_params(p: &SystemParams, d: &DerivedParams) -> Self {
        Self::new(d.pump_amplitude, p.drive.bandwidth())
    }

    pub fn is_continuous_wave(&self) -> bool {
        self.bandwidth == 0.0
    }

    pub fn amplitude(&self, detuning: f64) -> Complex64 {
        let x = detuning / self.bandwidth;
        self.peak * (-0.5 * x * x).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub n_signal: usize,
    pub n_idler: usize,
    /// Half-width of the signal axis, rad/s.
    pub signal_extent: f64,
    pub idler_extent: f64,
    pub signal_center: f64,
    pub idler_center: f64,
}

impl GridSpec {
    /// 512×512, signal ±8·κ_a/(2n_g), idler ±4·max(κ_b/2, σ_p) centred on
    /// its resonance.
    ///
    /// A pump narrower than the idler line confines v to the ridge
    /// |ω − ω′| ≲ 4σ_p, so the idler axis then only spans the signal window
    /// plus 4σ_p around it. Otherwise the ridge falls between idler samples.
    pub fn default_for(r: &SinglyFilteredRegime, pump: &PumpSpectrum) -> Self {
        let signal_extent = 8.0 * r.a();
        let resonance = 4.0 * r.b().max(pump.bandwidth);
        let ridge = signal_extent + 4.0 * pump.bandwidth;
        let (idler_extent, idler_center) = if ridge < resonance {
            (ridge, 0.0)
        } else {
            (resonance, -r.two_photon_detuning())
        };
        Self {
            n_signal: DEFAULT_GRID_POINTS,
            n_idler: DEFAULT_GRID_POINTS,
            signal_extent,
            idler_extent,
            signal_center: 0.0,
            idler_center,
        }
    }

    pub fn with_points(self, n_signal: usize, n_idler: usize) -> Self {
        Self {
            n_signal,
            n_idler,
            ..self
        }
    }

    pub fn with_extent_scale(self, factor: f64) -> Self {
        Self {
            signal_extent: self.signal_extent * factor,
            idler_extent: self.idler_extent * factor,
            ..self
        }
    }

    fn check(&self) -> Result<(), JsaError> {
        if self.n_signal < MIN_GRID_POINTS || self.n_idler < MIN_GRID_POINTS {
            return Err(JsaError::GridTooSmall(self.n_signal, self.n_idler));
        }
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.signal_extent) || !ok(self.idler_extent) {
            return Err(JsaError::BadExtent);
        }
        if !self.signal_center.is_finite() || !self.idler_center.is_finite() {
            return Err(JsaError::BadExtent);
        }
        Ok(())
    }

    pub fn signal_axis(&self) -> Vec<f64> {
        linspace(self.signal_center, self.signal_extent, self.n_signal)
    }

    pub fn idler_axis(&self) -> Vec<f64> {
        linspace(self.idler_center, self.idler_extent, self.n_idler)
    }

    pub fn signal_step(&self) -> f64 {
        2.0 * self.signal_extent / (self.n_signal - 1) as f64
    }

    pub fn idler_step(&self) -> f64 {
        2.0 * self.idler_extent / (self.n_idler - 1) as f64
    }
}

fn linspace(center: f64, half: f64, n: usize) -> Vec<f64> {
    let step = 2.0 * half / (n - 1) as f64;
    (0..n).map(|i| center - half + step * i as f64).collect()
}

/// What a grid was built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JsaSource {
    pub regime: SinglyFilteredRegime,
    pub pump: PumpSpectrum,
}

/// Row-major `n_signal × n_idler` samples of v(ω_i, ω′_j).
#[derive(Clone, Debug, PartialEq)]
pub struct JsaMatrix {
    values: Vec<Complex64>,
    grid: GridSpec,
    source: Option<JsaSource>,
    warnings: Vec<String>,
}

impl JsaMatrix {
    /// Wraps precomputed samples laid out on `grid`.
    pub fn from_values(values: Vec<Complex64>, grid: GridSpec) -> Result<Self, JsaError> {
        let (rows, cols) = (grid.n_signal, grid.n_idler);
        if values.len() != rows * cols {
            return Err(JsaError::Shape {
                rows,
                cols,
                len: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|z| !z.is_finite()) {
            return Err(JsaError::NonFinite(k / cols, k % cols));
        }
        if values.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(JsaError::ZeroMatrix);
        }
        Ok(Self {
            values,
            grid,
            source: None,
            warnings: Vec::new(),
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.grid.n_signal
    }

    pub fn cols(&self) -> usize {
        self.grid.n_idler
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn source(&self) -> Option<&JsaSource> {
        self.source.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.cols() + j]
    }

    /// Σ_j |V_ij|² for each signal sample.
    pub fn signal_marginal(&self) -> Vec<f64> {
        self.values
            .chunks(self.cols())
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// Σ_i |V_ij|² for each idler sample.
    pub fn idler_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        for row in self.values.chunks(self.cols()) {
            for (o, z) in out.iter_mut().zip(row) {
                *o += z.norm_sqr();
            }
        }
        out
    }

    fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Numerator `(iω − Δ)/((κ_a + κ_abs)/2)` of the filtered amplitude; 1 for
/// the bare cavity.
fn filter_numerator(omega: f64, r: &SinglyFilteredRegime) -> Complex64 {
    match r.filter {
        Some(f) => Complex64::new(-f.fwhm, omega) / ((r.kappa_a + f.far_detuned_loss) / 2.0),
        None => Complex64::new(1.0, 0.0),
    }
}

/// Joint spectral amplitude v(ω, ω′).
pub fn jsa_value(omega: f64, omega_idler: f64, r: &SinglyFilteredRegime, pump: &PumpSpectrum) -> Complex64 {
    let front = Complex64::new(0.0, 2.0 * r.coupling * r.kappa_b.sqrt());
    let f = phase_matching(omega, r.phase_match());
    let signal = Complex64::new(r.a(), -omega);
    let idler = Complex64::new(r.b(), -(omega_idler + r.two_photon_detuning()));
    front * filter_numerator(omega, r) * f * pump.amplitude(omega - omega_idler) / (signal * idler)
}

pub fn build_grid(r: &SinglyFilteredRegime, pump: &PumpSpectrum, spec: &GridSpec) -> Result<JsaMatrix, JsaError> {
    build_grid_with(r, pump, spec, Execution::default())
}

pub fn build_grid_with(
    r: &SinglyFilteredRegime,
    pump: &PumpSpectrum,
    spec: &GridSpec,
    exec: Execution,
) -> Result<JsaMatrix, JsaError> {
    if pump.is_continuous_wave() {
        return Err(JsaError::ContinuousWave);
    }
    spec.check()?;
    let signal = spec.signal_axis();
    let idler = spec.idler_axis();
    let rows = exec.map(signal.len(), |i| {
        idler
            .iter()
            .map(|&w2| jsa_value(signal[i], w2, r, pump))
            .collect::<Vec<_>>()
    });
    let values: Vec<Complex64> = rows.into_iter().flatten().collect();
    let mut m = JsaMatrix::from_values(values, *spec)?;
    m.source = Some(JsaSource { regime: *r, pump: *pump });
    m.warnings = grid_warnings(r, pump, spec);
    Ok(m)
}

fn grid_warnings(r: &SinglyFilteredRegime, pump: &PumpSpectrum, spec: &GridSpec) -> Vec<String> {
    let mut w = Vec::new();
    let fwhm = 2.0 * r.a();
    let per_fwhm = fwhm / spec.signal_step();
    if per_fwhm < MIN_POINTS_PER_FWHM {
        w.push(format!(
            "signal axis resolves the narrowed linewidth with {per_fwhm:.2} points per FWHM (< {MIN_POINTS_PER_FWHM})"
        ));
    }
    if spec.signal_extent < 6.0 * r.a() {
        w.push(format!(
            "signal extent covers {:.2} narrowed half-widths (< 6)",
            spec.signal_extent / r.a()
        ));
    }
    let idler_scale = r.b().max(pump.bandwidth);
    let ridge_lo = spec.signal_center - spec.signal_extent - 3.0 * pump.bandwidth;
    let ridge_hi = spec.signal_center + spec.signal_extent + 3.0 * pump.bandwidth;
    let idler_lo = spec.idler_center - spec.idler_extent;
    let idler_hi = spec.idler_center + spec.idler_extent;
    let covers_ridge = idler_lo <= ridge_lo && idler_hi >= ridge_hi;
    if spec.idler_extent < 3.0 * idler_scale && !covers_ridge {
        w.push(format!(
            "idler extent covers {:.2} x max(κ_b/2, σ_p) (< 3) and misses part of the pump ridge",
            spec.idler_extent / idler_scale
        ));
    }
    let per_sigma = pump.bandwidth / spec.idler_step();
    if per_sigma < 1.0 {
        w.push(format!(
            "idler axis resolves the pump bandwidth with {per_sigma:.2} points per σ_p (< 1)"
        ));
    }
    w
}

/// Schmidt purity `Tr((V†V)²)/[Tr(V†V)]²`.
pub fn purity(v: &JsaMatrix) -> Result<f64, JsaError> {
    purity_with(v, Execution::default())
}

/// Rows of the Gram matrix on the smaller side are summed independently and
/// reduced in index order; the Gram matrix itself is never stored.
pub fn purity_with(v: &JsaMatrix, exec: Execution) -> Result<f64, JsaError> {
    let norm = v.norm_sqr();
    if norm == 0.0 {
        return Err(JsaError::ZeroMatrix);
    }
    let (rows, cols) = (v.rows(), v.cols());
    let vectors: Vec<Vec<Complex64>> = if cols <= rows {
        (0..cols).map(|j| (0..rows).map(|i| v.get(i, j)).collect()).collect()
    } else {
        v.values.chunks(cols).map(|r| r.to_vec()).collect()
    };
    let d = vectors.len();
    let partial = exec.map(d, |j| {
        let vj = &vectors[j];
        let mut s = 0.0;
        for (k, vk) in vectors.iter().enumerate().skip(j) {
            let g: Complex64 = vj.iter().zip(vk).map(|(x, y)| x.conj() * y).sum();
            s += if k == j { g.norm_sqr() } else { 2.0 * g.norm_sqr() };
        }
        s
    });
    let trace_sq: f64 = partial.iter().sum();
    Ok(trace_sq / (norm * norm))
}

/// `g̃²(0) = 1 + P`, the heralded-photon autocorrelation.
pub fn heralded_autocorrelation(v: &JsaMatrix) -> Result<f64, JsaError> {
    Ok(1.0 + purity(v)?)
}

/// Broadband heralding efficiency. The unit-modulus cavity phases weight the
/// joint intensity on each arm, so the result is the mean of the two escape
/// efficiencies up to the grid's rounding.
pub fn heralding_broadband(v: &JsaMatrix, r: &SinglyFilteredRegime) -> f64 {
    let a = r.a();
    let kb = r.kappa_b;
    let phase_a = |w: f64| Complex64::new(a, w) / Complex64::new(a, -w);
    let phase_b = |w: f64| Complex64::new(kb, w) / Complex64::new(kb, -w);
    let signal = v.grid.signal_axis();
    let idler = v.grid.idler_axis();
    let pb: Vec<Complex64> = idler.iter().map(|&w| phase_b(w)).collect();
    let (mut num_a, mut num_b, mut den) = (0.0, 0.0, 0.0);
    for (i, row) in v.values.chunks(v.cols()).enumerate() {
        let pa = phase_a(signal[i]);
        for (z, p) in row.iter().zip(&pb) {
            num_a += (pa * z).norm_sqr();
            num_b += (p * z).norm_sqr();
            den += z.norm_sqr();
        }
    }
    r.signal_escape() / 2.0 * num_a / den + r.idler_escape() / 2.0 * num_b / den
}

/// Normalised joint spectral intensity in the plotting convention: idler
/// axis mirrored (ω′ → −ω′) and re-sorted ascending, axes in Hz.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JsiExport {
    pub signal_hz: Vec<f64>,
    pub idler_hz: Vec<f64>,
    /// Row-major, rows along the signal axis.
    pub intensity: Vec<f64>,
}

pub fn export_jsi(v: &JsaMatrix) -> JsiExport {
    let cols = v.cols();
    let peak = v.values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let idler = v.grid.idler_axis();
    let idler_hz = (0..cols).map(|k| -idler[cols - 1 - k] / TAU).collect();
    let intensity = v
        .values
        .chunks(cols)
        .flat_map(|row| (0..cols).map(move |k| row[cols - 1 - k].norm_sqr() / peak))
        .collect();
    JsiExport {
        signal_hz: v.grid.signal_axis().iter().map(|w| w / TAU).collect(),
        idler_hz,
        intensity,
    }
}

impl JsiExport {
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.intensity[i * self.idler_hz.len() + k]
    }

    /// CSV: header row of idler frequencies, then one row per signal
    /// frequency. Numbers carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("signal_hz\\idler_hz");
        for x in &self.idler_hz {
            let _ = write!(out, ",{x:.16e}");
        }
        out.push('\n');
        for (i, s) in self.signal_hz.iter().enumerate() {
            let _ = write!(out, "{s:.16e}");
            for k in 0..self.idler_hz.len() {
                let _ = write!(out, ",{:.16e}", self.get(i, k));
            }
            out.push('\n');
        }
        out
    }
}

/// Companion metadata for an exported grid.
pub fn jsi_metadata(v: &JsaMatrix) -> serde_json::Value {
    serde_json::json!({
        "grid": v.grid,
        "source": v.source,
        "warnings": v.warnings,
        "idler_axis": "mirrored: exported column frequency is -ω′/2π",
        "normalisation": "peak intensity 1",
    })
}

/// FWHM of a sampled single-peaked curve, linearly interpolating the
/// half-maximum crossings outward from the largest sample.
pub fn sampled_fwhm(axis: &[f64], values: &[f64]) -> Option<f64> {
    let (peak_at, &peak) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = peak / 2.0;
    let cross = |i: usize, j: usize| {
        let t = (values[i] - half) / (values[i] - values[j]);
        axis[i] + t * (axis[j] - axis[i])
    };
    let right = (peak_at + 1..values.len()).find(|&j| values[j] < half)?;
    let left = (0..peak_at).rev().find(|&j| values[j] < half)?;
    Some(cross(right - 1, right) - cross(left + 1, left))
}
