//! Comparator: a bare cavity followed by a Lorentzian amplitude filter on
//! the signal arm, instead of a filter inside the resonator.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use super::quad::{quad_1d, QuadError, QuadratureSpec};
use crate::exec::Execution;
use crate::jsa::{jsa_value, purity_with, GridSpec, JsaError, JsaMatrix, PumpSpectrum, DEFAULT_GRID_POINTS};
use crate::nondegenerate::SinglyFilteredRegime;

#[derive(Debug, Error, PartialEq)]
pub enum PostFilterError {
    #[error("filter bandwidth must be positive (got {0:e} rad/s)")]
    Bandwidth(f64),
    #[error(transparent)]
    Grid(#[from] JsaError),
    #[error("transmission integral: {0}")]
    Quadrature(#[from] QuadError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PostFilterResult {
    /// Filter FWHM, rad/s.
    pub filter_bandwidth: f64,
    pub purity: f64,
    pub heralding: f64,
    /// Fraction of the signal-arm intensity the filter passes.
    pub transmission: f64,
}

/// Amplitude transmission `(Γ/2)/(Γ/2 − iω)`; `Γ = ∞` is transparent.
pub fn filter_amplitude(omega: f64, fwhm: f64) -> Complex64 {
    if fwhm.is_infinite() {
        return Complex64::new(1.0, 0.0);
    }
    let h = fwhm / 2.0;
    Complex64::new(h, 0.0) / Complex64::new(h, -omega)
}

fn filter_intensity(omega: f64, fwhm: f64) -> f64 {
    if fwhm.is_infinite() {
        return 1.0;
    }
    let h2 = (fwhm / 2.0).powi(2);
    h2 / (h2 + omega * omega)
}

pub fn post_cavity_filter_compare(
    filter_bw: f64,
    r: &SinglyFilteredRegime,
    pump: &PumpSpectrum,
) -> Result<PostFilterResult, PostFilterError> {
    post_cavity_filter_compare_with(filter_bw, r, pump, DEFAULT_GRID_POINTS, Execution::default())
}

pub fn post_cavity_filter_compare_with(
    filter_bw: f64,
    r: &SinglyFilteredRegime,
    pump: &PumpSpectrum,
    points: usize,
    exec: Execution,
) -> Result<PostFilterResult, PostFilterError> {
    if !(filter_bw > 0.0) {
        return Err(PostFilterError::Bandwidth(filter_bw));
    }
    let bare = r.bare();
    let transmission = signal_transmission(filter_bw, &bare, pump)?;
    let heralding = bare.signal_escape() / 2.0 * transmission + bare.idler_escape() / 2.0;

    let signal_half = 4.0 * filter_bw.min(bare.kappa_a);
    let grid = GridSpec {
        signal_extent: signal_half,
        ..GridSpec::default_for(&bare, pump).with_points(points, points)
    };
    if pump.is_continuous_wave() {
        return Err(JsaError::ContinuousWave.into());
    }
    let signal = grid.signal_axis();
    let idler = grid.idler_axis();
    let rows = exec.map(signal.len(), |i| {
        let t = filter_amplitude(signal[i], filter_bw);
        idler
            .iter()
            .map(|&w2| t * jsa_value(signal[i], w2, &bare, pump))
            .collect::<Vec<_>>()
    });
    let v = JsaMatrix::from_values(rows.into_iter().flatten().collect(), grid)?;
    let purity = purity_with(&v, exec)?;
    Ok(PostFilterResult {
        filter_bandwidth: filter_bw,
        purity,
        heralding,
        transmission,
    })
}

/// `∫|t|²M dω / ∫M dω` with M(ω) the bare signal marginal
/// `|L_a(ω)|² ∫ |β(ω − ω′)|²/(b² + (ω′ + δ)²) dω′`, by nested quadrature.
pub fn signal_transmission(filter_bw: f64, bare: &SinglyFilteredRegime, pump: &PumpSpectrum) -> Result<f64, QuadError> {
    if filter_bw.is_infinite() {
        return Ok(1.0);
    }
    let a = bare.a();
    let b = bare.b();
    let shift = bare.two_photon_detuning();
    let sigma = pump.bandwidth;
    let idler_scale = b.max(sigma);
    let marginal = |w: f64| -> Result<f64, QuadError> {
        let spec = QuadratureSpec::whole_line(idler_scale)
            .with_rel_tol(1e-10)
            .with_breakpoints([w, -shift]);
        let inner = quad_1d(
            |w2| {
                let x = (w - w2) / sigma;
                (-x * x).exp() / (b * b + (w2 + shift).powi(2))
            },
            &spec,
        )?;
        Ok(inner.value / (a * a + w * w))
    };
    // The inner integral cannot fail silently inside the outer closure, so
    // record the first error and surface it afterwards.
    let failure = std::cell::RefCell::new(None);
    let eval = |w: f64| match marginal(w) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let half = filter_bw / 2.0;
    let points = [0.0, half, -half, 10.0 * half, -10.0 * half];
    let outer = QuadratureSpec::whole_line(a.max(half))
        .with_rel_tol(1e-8)
        .with_breakpoints(points);
    let total = quad_1d(&eval, &outer)?;
    let passed = quad_1d(|w| filter_intensity(w, filter_bw) * eval(w), &outer)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(passed.value / total.value)
}
