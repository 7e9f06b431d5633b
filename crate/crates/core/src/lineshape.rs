//! Lorentzian cavity responses, the sinc phase-matching function and FWHM
//! extraction.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianResponse {
    pub half_width: f64,
    pub center_detuning: f64,
}

impl LorentzianResponse {
    pub fn new(half_width: f64, center_detuning: f64) -> Self {
        debug_assert!(half_width > 0.0);
        Self {
            half_width,
            center_detuning,
        }
    }
}

/// `1 / (half_width - i(ω - center))`.
pub fn lorentzian(omega: f64, r: LorentzianResponse) -> Complex64 {
    Complex64::new(r.half_width, -(omega - r.center_detuning)).inv()
}

/// Squared modulus of [`lorentzian`], without the complex division.
pub fn lorentzian_sq(omega: f64, half_width: f64) -> f64 {
    1.0 / (half_width * half_width + omega * omega)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseMatch {
    pub round_trip_difference: f64,
}

const SINC_SERIES_BELOW: f64 = 1e-4;

pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_BELOW {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `sinc(ix) = sinh(x)/x`.
pub fn sinhc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_BELOW {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// `sinc(ω τ_rt / 2)`.
pub fn phase_matching(omega: f64, pm: PhaseMatch) -> f64 {
    sinc(omega.abs() * pm.round_trip_difference / 2.0)
}

/// FWHM of `|L(Γ1/2)|² · |L(Γ2/2)|²`, both centred at zero.
///
/// Uses `FWHM² = 2Γ1²Γ2² / (√(Γ1⁴ + 6Γ1²Γ2² + Γ2⁴) + Γ1² + Γ2²)`, the
/// conjugate of the textbook difference form, which cancels badly when the
/// widths differ by orders of magnitude.
pub fn product_lorentzian_fwhm(gamma1: f64, gamma2: f64) -> f64 {
    // Sort so the expression is symmetric bit-for-bit.
    let (lo, hi) = if gamma1 <= gamma2 {
        (gamma1, gamma2)
    } else {
        (gamma2, gamma1)
    };
    if hi.is_infinite() {
        return lo;
    }
    let a2 = lo * lo;
    let b2 = hi * hi;
    let ab = lo * hi;
    let q = (a2 * a2 + b2 * b2 + 6.0 * ab * ab).sqrt();
    (2.0 * ab * ab / (q + a2 + b2)).sqrt()
}

#[derive(Debug, Error, PartialEq)]
pub enum FwhmError {
    #[error("bracket [{lo:e}, {hi:e}] does not straddle the half maximum")]
    Bracket { lo: f64, hi: f64 },
    #[error("peak value {0:e} is not positive and finite")]
    Peak(f64),
}

/// Full width at half maximum of a single-peaked `f`, located by bisection
/// on either side of `peak`. `bracket` is the half-width of the search
/// interval around the peak.
pub fn numeric_fwhm(f: impl Fn(f64) -> f64, peak: f64, bracket: f64) -> Result<f64, FwhmError> {
    let top = f(peak);
    if !(top.is_finite() && top > 0.0) {
        return Err(FwhmError::Peak(top));
    }
    let half = top / 2.0;
    let lo = peak - bracket;
    let hi = peak + bracket;
    if f(lo) >= half || f(hi) >= half {
        return Err(FwhmError::Bracket { lo, hi });
    }
    // Keeps `inside` above the half maximum and `outside` below it. Bisects
    // to adjacent doubles, well inside a 1e-6-of-bracket tolerance and still
    // accurate when the line is far narrower than the bracket.
    let cross = |mut inside: f64, mut outside: f64| {
        for _ in 0..2100 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if f(mid) >= half {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    Ok(cross(peak, hi) - cross(peak, lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn lorentzian_on_resonance_is_real() {
        let r = LorentzianResponse::new(0.5, 3.0);
        let v = lorentzian(3.0, r);
        assert_eq!(v, Complex64::new(2.0, 0.0));
    }

    #[test]
    fn lorentzian_half_power_points() {
        let gamma = TAU * 1e9;
        let r = LorentzianResponse::new(gamma / 2.0, 0.0);
        let peak = lorentzian(0.0, r).norm_sqr();
        for w in [-gamma / 2.0, gamma / 2.0] {
            assert_relative_eq!(lorentzian(w, r).norm_sqr(), peak / 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn lorentzian_rationalised_value() {
        let h = TAU * 0.5e9;
        let v = lorentzian(h, LorentzianResponse::new(h, 0.0));
        let expected = Complex64::new(0.5, 0.5) / h;
        assert_relative_eq!(v.re, expected.re, max_relative = 1e-14);
        assert_relative_eq!(v.im, expected.im, max_relative = 1e-14);
    }

    #[test]
    fn phase_matching_values() {
        let tau = 1.6e-9;
        let pm = PhaseMatch { round_trip_difference: tau };
        assert_eq!(phase_matching(0.0, pm), 1.0);
        assert!(phase_matching(TAU / tau, pm).abs() < 1e-15);
        let bare = PhaseMatch { round_trip_difference: 0.0 };
        for w in [0.0, 1.0, 1e12, -5e9] {
            assert_eq!(phase_matching(w, bare), 1.0);
        }
    }

    #[test]
    fn sinc_series_matches_direct_form_at_switch() {
        let x = SINC_SERIES_BELOW * 0.999_999;
        assert_relative_eq!(sinc(x), x.sin() / x, max_relative = 1e-15);
        assert_relative_eq!(sinhc(x), x.sinh() / x, max_relative = 1e-15);
        assert_relative_eq!(sinhc(2.0), 2f64.sinh() / 2.0);
    }

    #[test]
    fn equal_width_product() {
        let g = 7.0;
        let expected = ((2f64).sqrt() - 1.0).sqrt() * g;
        assert_relative_eq!(product_lorentzian_fwhm(g, g), expected, max_relative = 1e-15);
        assert!((product_lorentzian_fwhm(1.0, 1.0) - 0.6436).abs() < 1e-4);
    }

    #[test]
    fn narrow_times_broad_product() {
        let narrow = TAU * 4e6;
        let broad = TAU * 1e9;
        let w = product_lorentzian_fwhm(narrow, broad);
        assert!((w / narrow - 1.0).abs() < 1e-4, "{}", w / narrow);
        assert_eq!(product_lorentzian_fwhm(narrow, f64::INFINITY), narrow);
        assert!(product_lorentzian_fwhm(1e-30, 1.0) < 1e-29);
    }

    #[test]
    fn direct_form_agrees_where_it_is_stable() {
        let (a, b) = (1.3f64, 2.1f64);
        let s = a * a + b * b;
        let direct = (((a.powi(4) + 6.0 * a * a * b * b + b.powi(4)).sqrt() - s) / 2.0).sqrt();
        assert_relative_eq!(product_lorentzian_fwhm(a, b), direct, max_relative = 1e-13);
    }

    #[test]
    fn monotone_on_log_grid() {
        let axis: Vec<f64> = (0..20).map(|i| 10f64.powf(-3.0 + 0.3 * i as f64)).collect();
        for &a in &axis {
            for w in axis.windows(2) {
                assert!(product_lorentzian_fwhm(a, w[1]) >= product_lorentzian_fwhm(a, w[0]));
                assert!(product_lorentzian_fwhm(w[1], a) >= product_lorentzian_fwhm(w[0], a));
            }
        }
    }

    #[test]
    fn numeric_fwhm_of_single_lorentzian() {
        let gamma = TAU * 1e9;
        let w = numeric_fwhm(|x| lorentzian_sq(x, gamma / 2.0), 0.0, 10.0 * gamma).unwrap();
        assert_relative_eq!(w, gamma, max_relative = 1e-6);
    }

    #[test]
    fn numeric_fwhm_of_products() {
        let product = |g1: f64, g2: f64| move |x: f64| lorentzian_sq(x, g1 / 2.0) * lorentzian_sq(x, g2 / 2.0);
        let g = 2.0 * PI;
        let w = numeric_fwhm(product(g, g), 0.0, 10.0 * g).unwrap();
        assert_relative_eq!(w, product_lorentzian_fwhm(g, g), max_relative = 1e-4);
        let (a, b) = (TAU * 4e6, TAU * 1e9);
        let w = numeric_fwhm(product(a, b), 0.0, 10.0 * b).unwrap();
        assert_relative_eq!(w, product_lorentzian_fwhm(a, b), max_relative = 1e-4);
    }

    #[test]
    fn numeric_fwhm_bracket_error() {
        let err = numeric_fwhm(|x| lorentzian_sq(x, 1.0), 0.0, 0.5).unwrap_err();
        assert!(matches!(err, FwhmError::Bracket { .. }));
        assert!(matches!(numeric_fwhm(|_| 0.0, 0.0, 1.0), Err(FwhmError::Peak(_))));
    }

    proptest! {
        #[test]
        fn product_fwhm_symmetric(a in 1e-6f64..1e12, b in 1e-6f64..1e12) {
            prop_assert_eq!(product_lorentzian_fwhm(a, b), product_lorentzian_fwhm(b, a));
            prop_assert!(product_lorentzian_fwhm(a, b) <= a.min(b) * (1.0 + 1e-12));
        }

        #[test]
        fn product_fwhm_matches_bisection(ratio in -4.0f64..0.0) {
            let g2 = 1.0;
            let g1 = 10f64.powf(ratio);
            let f = |x: f64| lorentzian_sq(x, g1 / 2.0) * lorentzian_sq(x, g2 / 2.0);
            let w = numeric_fwhm(f, 0.0, 10.0).unwrap();
            let closed = product_lorentzian_fwhm(g1, g2);
            prop_assert!((w / closed - 1.0).abs() < 1e-4, "{} vs {}", w, closed);
        }

        #[test]
        fn sinc_even(w in -1e12f64..1e12, tau in 0.0f64..1e-8) {
            let pm = PhaseMatch { round_trip_difference: tau };
            prop_assert_eq!(phase_matching(w, pm), phase_matching(-w, pm));
        }
    }
}
