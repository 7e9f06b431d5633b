//! Numerical Fourier transforms of spectral amplitudes by dense adaptive
//! quadrature over a truncated frequency range.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::quad::{quad_1d_complex, QuadError, QuadratureSpec};
use crate::exec::Execution;

/// Truncation and accuracy settings for [`fourier_transform`].
///
/// The integrand must satisfy `|f(ω)| ≤ decay_bound/|ω|^decay_power` beyond
/// `scale`. The range is cut where the neglected tail of ∫dω/2π drops below
/// `tail`. With `smooth_envelope` the cut also uses the first
/// integration-by-parts term, `2·bound/(π|τ|Ω^p)`, which only holds when
/// `f` varies slowly on the scale 1/|τ|.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpec {
    pub decay_bound: f64,
    pub decay_power: f64,
    pub smooth_envelope: bool,
    pub tail: f64,
    /// Narrowest feature of the integrand; panels are graded outward from it.
    pub scale: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl FourierSpec {
    pub fn new(decay_bound: f64, decay_power: f64, tail: f64, scale: f64) -> Self {
        assert!(decay_power > 1.0, "integrand must decay faster than 1/|ω|");
        Self {
            decay_bound,
            decay_power,
            smooth_envelope: false,
            tail,
            scale,
            rel_tol: 1e-6,
            max_subdivisions: 4_000_000,
        }
    }

    pub fn with_smooth_envelope(mut self) -> Self {
        self.smooth_envelope = true;
        self
    }

    pub fn half_range(&self, tau: f64) -> f64 {
        let (c, p) = (self.decay_bound, self.decay_power);
        let mut cut = (c / (PI * (p - 1.0) * self.tail)).powf(1.0 / (p - 1.0));
        if self.smooth_envelope && tau != 0.0 {
            cut = cut.min((2.0 * c / (PI * tau.abs() * self.tail)).powf(1.0 / p));
        }
        cut.max(10.0 * self.scale)
    }

    fn quadrature(&self, tau: f64) -> QuadratureSpec {
        let half_range = self.half_range(tau);
        let mut points = vec![0.0];
        let mut x = self.scale;
        while x < half_range {
            points.push(x);
            points.push(-x);
            x *= 2.0;
        }
        QuadratureSpec::new(-half_range, half_range)
            .with_rel_tol(self.rel_tol)
            .with_abs_tol(self.tail * TAU)
            .with_max_subdivisions(self.max_subdivisions)
            .with_breakpoints(points)
    }
}

/// `∫ dω/2π · f(ω) e^{−iωτ}` over the truncated range.
pub fn fourier_transform(
    f: impl Fn(f64) -> Complex64,
    tau: f64,
    spec: &FourierSpec,
) -> Result<Complex64, QuadError> {
    let q = spec.quadrature(tau);
    let r = quad_1d_complex(|w| f(w) * Complex64::from_polar(1.0, -w * tau), &q)?;
    Ok(r.value / TAU)
}

/// `|∫ dω/2π · f(ω) e^{−iωτ}|²` at every τ sample.
pub fn fourier_g2(
    f: impl Fn(f64) -> Complex64 + Sync + Send,
    taus: &[f64],
    spec: &FourierSpec,
) -> Result<Vec<f64>, QuadError> {
    fourier_g2_with(f, taus, spec, Execution::default())
}

pub fn fourier_g2_with(
    f: impl Fn(f64) -> Complex64 + Sync + Send,
    taus: &[f64],
    spec: &FourierSpec,
    exec: Execution,
) -> Result<Vec<f64>, QuadError> {
    exec.map_slice(taus, |&t| fourier_transform(&f, t, spec).map(|z| z.norm_sqr()))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lorentzian_power_spectrum() {
        let k = 2.0;
        let f = |w: f64| Complex64::new(k / 2.0, -w).inv() * Complex64::new(k / 2.0, w).inv();
        let spec = FourierSpec::new(1.0, 2.0, 1e-9, k / 2.0).with_smooth_envelope();
        let taus = [0.0, 0.5, 1.5, -2.0];
        let got = fourier_g2(f, &taus, &spec).unwrap();
        for (t, g) in taus.iter().zip(got) {
            // Transforms to e^{−k|τ|/2}/k.
            let exact = ((-k * t.abs() / 2.0).exp() / k).powi(2);
            assert_relative_eq!(g, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn squared_lorentzian_without_envelope_cut() {
        let f = |w: f64| Complex64::from(1.0 / (1.0 + w * w).powi(2));
        let spec = FourierSpec::new(1.0, 4.0, 1e-12, 1.0);
        for t in [0.0, 0.7, -3.0] {
            let got = fourier_transform(f, t, &spec).unwrap();
            let exact = (1.0 + f64::abs(t)) * (-f64::abs(t)).exp() / 4.0;
            assert!((got - exact).norm() < 1e-6 * exact, "{t}: {got} vs {exact}");
        }
    }

    #[test]
    fn strategies_agree_bitwise() {
        let f = |w: f64| Complex64::new(1.0, -w).inv() * Complex64::new(3.0, w).inv();
        let spec = FourierSpec::new(1.0, 2.0, 1e-8, 1.0).with_smooth_envelope();
        let taus: Vec<f64> = (0..8).map(|i| i as f64 * 0.3 - 1.0).collect();
        let a = fourier_g2_with(f, &taus, &spec, Execution::Sequential).unwrap();
        let b = fourier_g2_with(f, &taus, &spec, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
