//! Frequency-domain solution of the filtered cavity without the slow-light
//! projection.
//!
//! In the frame of the filtered resonance, the exact response kernel of a
//! cavity with total loss s = κ + κ_abs and a Lorentzian transparency window
//! of width Δ is
//!
//! `Z(ν) = −iν + s/2 − (κ_abs Δ/4)/(Δ/2 − iν)`,
//!
//! while the projected (narrowed) model keeps only `Zp(ν) = κ/2 − iν n_g`.
//! Down-conversion couples a(ν) to a†(ν′) with ν′ = −ν − 2δ_a.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::params::{DerivedParams, SystemParams};

/// Determinants below this fraction of |Z(ν)Z(ν′)| count as singular.
const SINGULAR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExactFilterModel {
    pub kappa: f64,
    pub kappa_abs: f64,
    pub fwhm: f64,
    pub detuning: f64,
    pub coupling: f64,
    pub beta: Complex64,
}

impl ExactFilterModel {
    pub fn from_params(p: &SystemParams, d: &DerivedParams) -> Self {
        Self {
            kappa: p.signal_mode.kappa(),
            kappa_abs: p.filter.far_detuned_loss(),
            fwhm: p.filter.fwhm(),
            detuning: p.signal_mode.detuning(),
            coupling: p.coupling(),
            beta: d.pump_amplitude,
        }
    }

    pub fn group_index(&self) -> f64 {
        (self.kappa + self.kappa_abs) / self.fwhm
    }

    /// Exact response kernel Z(ν).
    pub fn kernel(&self, nu: f64) -> Complex64 {
        let s = self.kappa + self.kappa_abs;
        let window = Complex64::new(self.fwhm / 2.0, -nu);
        Complex64::new(s / 2.0, -nu) - self.kappa_abs * self.fwhm / 4.0 / window
    }

    /// Projected kernel κ/2 − iν n_g.
    pub fn projected_kernel(&self, nu: f64) -> Complex64 {
        Complex64::new(self.kappa / 2.0, -nu * self.group_index())
    }
}

/// Output of the 2×2 solve: a(ν) = direct·a_in(ν) + conversion·a_in†(ν′).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransferCoefficients {
    pub direct: Complex64,
    pub conversion: Complex64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error("singular 2x2 system at ν = {0:e} rad/s (pump at or above threshold)")]
    Singular(f64),
}

fn solve(
    m: &ExactFilterModel,
    nu: f64,
    kernel: impl Fn(f64) -> Complex64,
) -> Result<TransferCoefficients, ExactError> {
    let z = kernel(nu);
    let z_partner = kernel(-nu - 2.0 * m.detuning).conj();
    let gb2 = m.coupling * m.coupling * m.beta.norm_sqr();
    let det = z * z_partner - 4.0 * gb2;
    if det.norm() <= SINGULAR * (z * z_partner).norm() {
        return Err(ExactError::Singular(nu));
    }
    let root = m.kappa.sqrt();
    Ok(TransferCoefficients {
        direct: root * z_partner / det,
        conversion: Complex64::new(0.0, -2.0 * m.coupling) * m.beta * root / det,
    })
}

pub fn exact_unprojected_spectrum(nu: f64, m: &ExactFilterModel) -> Result<TransferCoefficients, ExactError> {
    solve(m, nu, |x| m.kernel(x))
}

pub fn projected_spectrum(nu: f64, m: &ExactFilterModel) -> Result<TransferCoefficients, ExactError> {
    solve(m, nu, |x| m.projected_kernel(x))
}

/// Largest relative deviation of the conversion coefficient between the two
/// models over `|ν| ≤ half_width`, sampled at `samples` points.
pub fn projection_deviation(m: &ExactFilterModel, half_width: f64, samples: usize) -> Result<f64, ExactError> {
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let nu = -half_width + 2.0 * half_width * i as f64 / (samples - 1) as f64;
        let exact = exact_unprojected_spectrum(nu, m)?.conversion;
        let proj = projected_spectrum(nu, m)?.conversion;
        worst = worst.max((exact - proj).norm() / proj.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive;
    use approx::assert_relative_eq;

    fn reference() -> ExactFilterModel {
        let p = SystemParams::reference();
        ExactFilterModel::from_params(&p, &derive(&p))
    }

    #[test]
    fn kernels_agree_at_centre() {
        let m = reference();
        assert_relative_eq!(m.kernel(0.0).re, m.kappa / 2.0, max_relative = 1e-12);
        let e = exact_unprojected_spectrum(0.0, &m).unwrap();
        let p = projected_spectrum(0.0, &m).unwrap();
        assert_relative_eq!(e.conversion.norm(), p.conversion.norm(), max_relative = 1e-9);
        // Slope at the centre is 1 + κ_abs/Δ, the group index up to (κ − Δ)/Δ.
        let h = 1e-5 * m.fwhm;
        let slope = (m.kernel(h) - m.kernel(-h)).im / (2.0 * h);
        assert_relative_eq!(-slope, 1.0 + m.kappa_abs / m.fwhm, max_relative = 1e-6);
    }

    #[test]
    fn off_filter_sees_full_loss() {
        let m = reference();
        let centre = exact_unprojected_spectrum(0.0, &m).unwrap().direct.norm();
        let far = exact_unprojected_spectrum(10.0 * m.fwhm, &m).unwrap().direct.norm();
        let ratio = far / centre;
        let expected = m.kappa / (m.kappa + m.kappa_abs);
        assert!((ratio / expected - 1.0).abs() < 0.1, "{ratio} vs {expected}");
    }

    #[test]
    fn decoupled_system_is_scalar() {
        let m = ExactFilterModel { coupling: 0.0, ..reference() };
        for nu in [0.0, 1e7, -3e8, 5e9] {
            let t = exact_unprojected_spectrum(nu, &m).unwrap();
            assert_eq!(t.conversion, Complex64::default());
            let scalar = m.kappa.sqrt() / m.kernel(nu);
            assert_relative_eq!(t.direct.re, scalar.re, max_relative = 1e-12);
            assert_relative_eq!(t.direct.im, scalar.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn threshold_is_singular() {
        let m = reference();
        let gb = m.kappa / 4.0;
        let at = ExactFilterModel {
            beta: Complex64::new(gb / m.coupling, 0.0),
            ..m
        };
        assert_eq!(exact_unprojected_spectrum(0.0, &at), Err(ExactError::Singular(0.0)));
    }

    #[test]
    fn deviation_shrinks_with_absorption() {
        let base = reference();
        let mut last = f64::INFINITY;
        for ratio in [4.0, 16.0, 64.0] {
            let m = ExactFilterModel { kappa_abs: ratio * base.kappa, ..base };
            let dev = projection_deviation(&m, m.kappa / (2.0 * m.group_index()), 101).unwrap();
            assert!(dev < last, "{ratio}: {dev} !< {last}");
            last = dev;
        }
    }
}
