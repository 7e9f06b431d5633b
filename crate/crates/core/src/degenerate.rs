//! Doubly-filtered degenerate down-conversion: signal and idler share the
//! narrowed mode of width κ/n_g.

use num_complex::Complex64;
use thiserror::Error;

use crate::lineshape::product_lorentzian_fwhm;
use crate::params::{DerivedParams, SystemParams};

#[derive(Debug, Error, PartialEq)]
pub enum DegenerateError {
    #[error("normalised g2 and bandwidth are defined at zero detuning only (δ_a = {0:e} rad/s)")]
    Detuned(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegenerateRegime {
    pub kappa: f64,
    pub kappa_ext: f64,
    pub group_index: f64,
    pub coupling: f64,
    pub beta: Complex64,
    pub detuning: f64,
}

impl DegenerateRegime {
    /// Filtered signal mode of `p`.
    pub fn filtered(p: &SystemParams, d: &DerivedParams) -> Self {
        Self {
            kappa: p.signal_mode.kappa(),
            kappa_ext: p.signal_mode.kappa_ext(),
            group_index: d.group_index,
            coupling: p.coupling(),
            beta: d.pump_amplitude,
            detuning: p.signal_mode.detuning(),
        }
    }

    /// The same cavity with the filter removed.
    pub fn bare(p: &SystemParams, d: &DerivedParams) -> Self {
        Self {
            group_index: 1.0,
            ..Self::filtered(p, d)
        }
    }

    /// The bare cavity with κ → κ/n_g and g → g/n_g and the escape
    /// efficiency held fixed; every metric of `self` equals that of the
    /// returned regime.
    pub fn as_rescaled_bare(&self) -> Self {
        let n = self.group_index;
        Self {
            kappa: self.kappa / n,
            kappa_ext: self.kappa_ext / n,
            group_index: 1.0,
            coupling: self.coupling / n,
            ..*self
        }
    }

    /// κ/(2n_g).
    pub fn half_width(&self) -> f64 {
        self.kappa / (2.0 * self.group_index)
    }

    /// τ_c = n_g/κ.
    pub fn correlation_time(&self) -> f64 {
        self.group_index / self.kappa
    }

    pub fn escape_efficiency(&self) -> f64 {
        self.kappa_ext / self.kappa
    }

    /// 2g|β| / (κ/2); below threshold when < 1.
    pub fn threshold_ratio(&self) -> f64 {
        4.0 * self.coupling * self.beta.norm() / self.kappa
    }

    fn zero_detuning(&self) -> Result<(), DegenerateError> {
        if self.detuning == 0.0 {
            Ok(())
        } else {
            Err(DegenerateError::Detuned(self.detuning))
        }
    }
}

/// Intracavity photon density S(ω), per unit dω/2π.
pub fn spectral_density(omega: f64, r: &DegenerateRegime) -> f64 {
    let h2 = r.half_width().powi(2);
    let shifted = omega + 2.0 * r.detuning;
    let n2 = r.group_index * r.group_index;
    r.kappa * r.kappa * 4.0 * r.coupling * r.coupling * r.beta.norm_sqr()
        / ((h2 + shifted * shifted) * (h2 + omega * omega))
        / (n2 * n2)
}

/// Density leaving through the external port, `(κ_ext/κ)·S`.
pub fn output_spectral_density(omega: f64, r: &DegenerateRegime) -> f64 {
    r.escape_efficiency() * spectral_density(omega, r)
}

/// Intrinsic pair generation rate, pairs/s.
pub fn pair_rate(r: &DegenerateRegime) -> f64 {
    let g2b2 = r.coupling * r.coupling * r.beta.norm_sqr();
    g2b2 * r.kappa / ((r.detuning * r.detuning + r.half_width().powi(2)) * r.group_index.powi(3))
}

/// FWHM of the spectral density, 0.6436·κ/n_g.
pub fn bandwidth(r: &DegenerateRegime) -> Result<f64, DegenerateError> {
    r.zero_detuning()?;
    let w = r.kappa / r.group_index;
    Ok(product_lorentzian_fwhm(w, w))
}

/// Pair rate per unit bandwidth, pairs/s per rad/s.
pub fn spectral_brightness(r: &DegenerateRegime) -> Result<f64, DegenerateError> {
    Ok(pair_rate(r) / bandwidth(r)?)
}

/// `1 + e^{-|τ|/τ_c}/(4Rτ_c)`.
pub fn g2(tau: f64, r: &DegenerateRegime) -> Result<f64, DegenerateError> {
    r.zero_detuning()?;
    let tc = r.correlation_time();
    Ok(1.0 + (-tau.abs() / tc).exp() / (4.0 * pair_rate(r) * tc))
}

/// Unnormalised output cross-correlation G²(τ) = N² + G²_c(τ), with
/// N = 2Rκ_ext/κ the output photon flux. Valid at any detuning.
pub fn cross_correlation(tau: f64, r: &DegenerateRegime) -> f64 {
    let flux = 2.0 * pair_rate(r) * r.escape_efficiency();
    flux * flux + correlated_part(tau, r)
}

/// The correlated part G²_c(τ), decaying as e^{-(κ/n_g)|τ|}.
pub fn correlated_part(tau: f64, r: &DegenerateRegime) -> f64 {
    let g2b2 = r.coupling * r.coupling * r.beta.norm_sqr();
    let n4 = r.group_index.powi(4);
    r.kappa_ext * r.kappa_ext * g2b2 / (n4 * (r.detuning * r.detuning + r.half_width().powi(2)))
        * (-tau.abs() / r.correlation_time()).exp()
}

/// Heralding efficiency for a detection window T.
pub fn heralding(window: f64, r: &DegenerateRegime) -> f64 {
    r.escape_efficiency() * -(-window / (2.0 * r.correlation_time())).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{LN_2, TAU};

    fn reference() -> DegenerateRegime {
        let p = SystemParams::reference();
        DegenerateRegime::filtered(&p, &derive(&p))
    }

    #[test]
    fn reference_rate_and_g2() {
        let r = reference();
        let rate = pair_rate(&r);
        assert_relative_eq!(rate, 4.0 * (TAU * 2e6f64).powi(2) * 400.0 / (250.0 * TAU * 1e9), max_relative = 1e-12);
        assert!((rate / 1.61e5 - 1.0).abs() < 0.01, "{rate}");
        assert_relative_eq!(r.correlation_time(), 250.0 / (TAU * 1e9), max_relative = 1e-14);
        let peak = g2(0.0, &r).unwrap();
        assert!((peak - 40.1).abs() < 0.1, "{peak}");
        assert!(r.threshold_ratio() < 1.0);
    }

    #[test]
    fn density_at_origin() {
        let r = reference();
        let g2b2 = r.coupling.powi(2) * r.beta.norm_sqr();
        assert_relative_eq!(spectral_density(0.0, &r), 64.0 * g2b2 / r.kappa.powi(2), max_relative = 1e-12);
        assert_relative_eq!(output_spectral_density(0.0, &r), 0.9 * spectral_density(0.0, &r), max_relative = 1e-15);
    }

    #[test]
    fn g2_shape() {
        let r = reference();
        let tc = r.correlation_time();
        let ratio = (g2(tc, &r).unwrap() - 1.0) / (g2(0.0, &r).unwrap() - 1.0);
        assert_relative_eq!(ratio, (-1.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(g2(1e3 * tc, &r).unwrap(), 1.0);
        let normalised = 1.0 + correlated_part(0.3 * tc, &r) / (cross_correlation(1e6, &r));
        assert_relative_eq!(normalised, g2(0.3 * tc, &r).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn detuned_rate_halves() {
        let mut r = reference();
        let r0 = pair_rate(&r);
        r.detuning = r.half_width();
        assert_relative_eq!(pair_rate(&r), r0 / 2.0, max_relative = 1e-14);
        assert_eq!(g2(0.0, &r), Err(DegenerateError::Detuned(r.detuning)));
        assert!(bandwidth(&r).is_err());
    }

    #[test]
    fn bare_and_filtered_bandwidths() {
        let r = reference();
        let bare = DegenerateRegime { group_index: 1.0, ..r };
        assert_relative_eq!(bandwidth(&bare).unwrap(), 0.643_594_252_905_582_6 * r.kappa, max_relative = 1e-14);
        assert_relative_eq!(bandwidth(&r).unwrap(), bandwidth(&bare).unwrap() / 250.0, max_relative = 1e-14);
        let g2b2 = r.coupling.powi(2) * r.beta.norm_sqr();
        assert_relative_eq!(pair_rate(&bare), 4.0 * g2b2 / r.kappa, max_relative = 1e-14);
    }

    #[test]
    fn heralding_values() {
        let r = reference();
        assert_eq!(heralding(0.0, &r), 0.0);
        assert_relative_eq!(heralding(f64::INFINITY, &r), 0.9, max_relative = 1e-12);
        let t = 2.0 * r.correlation_time() * LN_2;
        assert_relative_eq!(heralding(t, &r), 0.45, max_relative = 1e-14);
    }

    #[test]
    fn column_relations_and_rescaling() {
        let base = reference();
        for n in [1.0, 10.0, 250.0] {
            let filtered = DegenerateRegime { group_index: n, ..base };
            let bare = DegenerateRegime { group_index: 1.0, ..base };
            let scaled = filtered.as_rescaled_bare();
            let pairs = [
                (bandwidth(&filtered).unwrap(), bandwidth(&scaled).unwrap()),
                (pair_rate(&filtered), pair_rate(&scaled)),
                (filtered.correlation_time(), scaled.correlation_time()),
                (g2(0.0, &filtered).unwrap(), g2(0.0, &scaled).unwrap()),
                (heralding(3e-8, &filtered), heralding(3e-8, &scaled)),
            ];
            for (a, b) in pairs {
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
            assert_relative_eq!(scaled.escape_efficiency(), filtered.escape_efficiency(), max_relative = 1e-15);
            assert_relative_eq!(bandwidth(&filtered).unwrap() * n, bandwidth(&bare).unwrap(), max_relative = 1e-12);
            assert_relative_eq!(pair_rate(&filtered) * n, pair_rate(&bare), max_relative = 1e-12);
            assert_relative_eq!(
                spectral_brightness(&filtered).unwrap(),
                spectral_brightness(&bare).unwrap(),
                max_relative = 1e-12
            );
            // g² is unchanged because R and 1/τ_c both drop by n_g.
            assert_relative_eq!(g2(0.0, &filtered).unwrap(), g2(0.0, &bare).unwrap(), max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn density_is_positive_and_peaks_between_poles(
            w in -1e10f64..1e10,
            delta in -1e7f64..1e7,
        ) {
            let r = DegenerateRegime { detuning: delta, ..reference() };
            let s = spectral_density(w, &r);
            prop_assert!(s > 0.0);
            prop_assert!(s <= spectral_density(-delta, &r) * (1.0 + 1e-12));
        }

        #[test]
        fn heralding_bounded_by_escape(t in 0.0f64..1e-5) {
            let r = reference();
            let h = heralding(t, &r);
            prop_assert!((0.0..=r.escape_efficiency()).contains(&h));
        }
    }
}
