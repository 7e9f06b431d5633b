//! Singly-filtered non-degenerate down-conversion: the signal occupies the
//! narrowed a-mode, the idler the bare b-mode.
//!
//! With `a = κ_a/(2n_g)`, `b = κ_b/2` and phase matching
//! `F(ω) = sinc(ωτ_rt/2)`, all closed forms here come from the two-pole
//! amplitude `F(ω)/((a − iω)(b + iω))` at zero two-photon detuning.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::lineshape::{lorentzian_sq, phase_matching, product_lorentzian_fwhm, PhaseMatch};
use crate::params::{DerivedParams, SystemParams};

/// Relative pole separation below which the rate uses its analytic limit.
const COINCIDENT_POLES: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum NondegenerateError {
    #[error("closed forms need zero two-photon detuning (δ_a + δ_b = {0:e} rad/s)")]
    TwoPhotonDetuning(f64),
}

/// Filter parameters carried for the broadband amplitude's numerator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilterShape {
    pub fwhm: f64,
    pub far_detuned_loss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SinglyFilteredRegime {
    pub kappa_a: f64,
    pub kappa_a_ext: f64,
    pub kappa_b: f64,
    pub kappa_b_ext: f64,
    pub group_index: f64,
    pub coupling: f64,
    pub beta: Complex64,
    pub detuning_a: f64,
    pub detuning_b: f64,
    pub round_trip_difference: f64,
    pub filter: Option<FilterShape>,
}

impl SinglyFilteredRegime {
    pub fn from_params(p: &SystemParams, d: &DerivedParams) -> Self {
        Self {
            kappa_a: p.signal_mode.kappa(),
            kappa_a_ext: p.signal_mode.kappa_ext(),
            kappa_b: p.idler_mode.kappa(),
            kappa_b_ext: p.idler_mode.kappa_ext(),
            group_index: d.group_index,
            coupling: p.coupling(),
            beta: d.pump_amplitude,
            detuning_a: p.signal_mode.detuning(),
            detuning_b: p.idler_mode.detuning(),
            round_trip_difference: d.round_trip_difference,
            filter: Some(FilterShape {
                fwhm: p.filter.fwhm(),
                far_detuned_loss: p.filter.far_detuned_loss(),
            }),
        }
    }

    /// The same resonator without the filter: n_g = 1, τ_rt = 0.
    pub fn bare(&self) -> Self {
        Self {
            group_index: 1.0,
            round_trip_difference: 0.0,
            filter: None,
            ..*self
        }
    }

    /// Signal half-width a = κ_a/(2n_g).
    pub fn a(&self) -> f64 {
        self.kappa_a / (2.0 * self.group_index)
    }

    /// Idler half-width b = κ_b/2.
    pub fn b(&self) -> f64 {
        self.kappa_b / 2.0
    }

    pub fn two_photon_detuning(&self) -> f64 {
        self.detuning_a + self.detuning_b
    }

    pub fn phase_match(&self) -> PhaseMatch {
        PhaseMatch {
            round_trip_difference: self.round_trip_difference,
        }
    }

    pub fn signal_escape(&self) -> f64 {
        self.kappa_a_ext / self.kappa_a
    }

    pub fn idler_escape(&self) -> f64 {
        self.kappa_b_ext / self.kappa_b
    }

    /// 2g|β| / (√(κ_a κ_b)/2); below threshold when < 1.
    pub fn threshold_ratio(&self) -> f64 {
        4.0 * self.coupling * self.beta.norm() / (self.kappa_a * self.kappa_b).sqrt()
    }

    fn g2b2(&self) -> f64 {
        self.coupling * self.coupling * self.beta.norm_sqr()
    }

    fn require_zero_two_photon(&self) -> Result<(), NondegenerateError> {
        let d = self.two_photon_detuning();
        if d == 0.0 {
            Ok(())
        } else {
            Err(NondegenerateError::TwoPhotonDetuning(d))
        }
    }
}

/// Signal photon density S_a(ω), per unit dω/2π.
pub fn spectral_density(omega: f64, r: &SinglyFilteredRegime) -> f64 {
    let f = phase_matching(omega, r.phase_match());
    let idler = lorentzian_sq(omega + r.two_photon_detuning(), r.b());
    r.kappa_a * 4.0 * r.g2b2() * r.kappa_b * f * f * lorentzian_sq(omega, r.a()) * idler
        / (r.group_index * r.group_index)
}

/// `(u − 1 + e^{−u})/u³`.
fn psi(u: f64) -> f64 {
    if u < 0.1 {
        // Σ_{k≥2} (−1)^k u^{k−3}/k!
        let mut term = 1.0 / (2.0 * u);
        let mut sum = term;
        for k in 3..24 {
            term *= -u / k as f64;
            sum += term;
        }
        sum
    } else {
        (u + (-u).exp_m1()) / (u * u * u)
    }
}

/// dψ/du.
fn psi_prime(u: f64) -> f64 {
    if u < 0.1 {
        // Σ_{k≥2} (−1)^k (k−3) u^{k−4}/k!
        let mut power_over_fact = 1.0 / (2.0 * u * u);
        let mut sum = -power_over_fact;
        for k in 3..24 {
            power_over_fact *= -u / k as f64;
            sum += (k as f64 - 3.0) * power_over_fact;
        }
        sum
    } else {
        let e = (-u).exp_m1();
        -e / u.powi(3) - 3.0 * (u + e) / u.powi(4)
    }
}

/// `∫ dω/2π · sinc²(ωτ/2) / ((a² + ω²)(b² + ω²))`.
pub fn rate_integral(a: f64, b: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        return 1.0 / (2.0 * a * b * (a + b));
    }
    let (u, v) = (a * tau, b * tau);
    let t3 = tau * tau * tau;
    if (v - u).abs() <= COINCIDENT_POLES * u.max(v) {
        let m = 0.5 * (u + v);
        return -t3 * psi_prime(m) / (u + v);
    }
    t3 * (psi(u) - psi(v)) / ((v - u) * (v + u))
}

/// Exact pair generation rate including phase matching, pairs/s.
pub fn pair_rate_exact(r: &SinglyFilteredRegime) -> Result<f64, NondegenerateError> {
    r.require_zero_two_photon()?;
    let prefactor = 4.0 * r.g2b2() * r.kappa_a * r.kappa_b / (r.group_index * r.group_index);
    Ok(prefactor * rate_integral(r.a(), r.b(), r.round_trip_difference))
}

/// Rate without phase-matching loss, `8g²|β|²/(n_g(a + b))`. Equals
/// `16g²|β|²/(κ n_g)` for n_g ≫ 1 and `8g²|β|²/κ` for the bare cavity.
pub fn pair_rate_unmatched(r: &SinglyFilteredRegime) -> f64 {
    8.0 * r.g2b2() / (r.group_index * (r.a() + r.b()))
}

/// FWHM of the signal density, `product_fwhm(κ_a/n_g, κ_b)`.
pub fn bandwidth(r: &SinglyFilteredRegime) -> f64 {
    product_lorentzian_fwhm(r.kappa_a / r.group_index, r.kappa_b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum G2Branch {
    LeftTail,
    Plateau,
    RightTail,
}

impl G2Branch {
    pub fn of(tau: f64, round_trip_difference: f64) -> Self {
        let edge = round_trip_difference / 2.0;
        if tau < -edge {
            G2Branch::LeftTail
        } else if tau > edge {
            G2Branch::RightTail
        } else {
            G2Branch::Plateau
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            G2Branch::LeftTail => "left_tail",
            G2Branch::Plateau => "plateau",
            G2Branch::RightTail => "right_tail",
        }
    }
}

impl fmt::Display for G2Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which photon is detected first: `AGivenB` conditions the signal on an
/// idler detection at τ = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Conditioning {
    AGivenB,
    BGivenA,
}

/// `(1 − e^{−x})/x`.
fn shrink(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Correlation amplitude Ĵ(τ) for signal-given-idler, normalised to Ĵ = 1 at
/// τ = 0 when τ_rt = 0. Every exponent is non-positive, so no branch can
/// overflow however large κτ_rt gets.
pub fn correlation_amplitude(tau: f64, r: &SinglyFilteredRegime) -> (f64, G2Branch) {
    let (a, b, tr) = (r.a(), r.b(), r.round_trip_difference);
    let edge = tr / 2.0;
    let branch = G2Branch::of(tau, tr);
    let value = match branch {
        G2Branch::RightTail => (-a * (tau - edge)).exp() * shrink(a * tr),
        G2Branch::LeftTail => (b * (tau + edge)).exp() * shrink(b * tr),
        G2Branch::Plateau if tr == 0.0 => 1.0,
        G2Branch::Plateau => -((-a * (tau + edge)).exp_m1() / a + (b * (tau - edge)).exp_m1() / b) / tr,
    };
    (value, branch)
}

/// Normalised cross-correlation with the branch that produced it.
pub fn g2_conditioned_with_branch(
    tau: f64,
    r: &SinglyFilteredRegime,
    conditioning: Conditioning,
) -> Result<(f64, G2Branch), NondegenerateError> {
    r.require_zero_two_photon()?;
    let t = match conditioning {
        Conditioning::AGivenB => tau,
        Conditioning::BGivenA => -tau,
    };
    let (j, branch) = correlation_amplitude(t, r);
    Ok((1.0 + peak_excess(r) * j * j, branch))
}

pub fn g2_conditioned(tau: f64, r: &SinglyFilteredRegime, conditioning: Conditioning) -> Result<f64, NondegenerateError> {
    g2_conditioned_with_branch(tau, r, conditioning).map(|(v, _)| v)
}

/// `κ_a κ_b / (16 g²|β|²)`, the bare-cavity peak of g² − 1.
pub fn peak_excess(r: &SinglyFilteredRegime) -> f64 {
    r.kappa_a * r.kappa_b / (16.0 * r.g2b2())
}

/// Heralding efficiency of the signal for a box window T. Assumes F ≫ 1 and
/// n_g ≫ 1.
pub fn heralding_window(window: f64, r: &SinglyFilteredRegime) -> f64 {
    let esc = r.signal_escape();
    let narrowed = r.kappa_a / r.group_index;
    let tr = r.round_trip_difference;
    if window < tr {
        esc * narrowed * window * (window * window + 3.0 * tr * tr) / (12.0 * tr * tr)
    } else {
        esc * -(-narrowed * window / 2.0).exp_m1() - esc * narrowed * tr / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn reference() -> SinglyFilteredRegime {
        let p = SystemParams::reference();
        SinglyFilteredRegime::from_params(&p, &derive(&p))
    }

    fn with_ng_finesse(ng: f64, finesse: f64) -> SinglyFilteredRegime {
        let base = reference();
        SinglyFilteredRegime {
            group_index: ng,
            round_trip_difference: TAU * ng / (base.kappa_a * finesse),
            ..base
        }
    }

    /// The two-term contour expression exactly as it is usually written.
    fn contour_rate(r: &SinglyFilteredRegime) -> f64 {
        let (ka, kb, ng, t) = (r.kappa_a, r.kappa_b, r.group_index, r.round_trip_difference);
        let k = 4.0 * r.g2b2() * kb * ka;
        let (a, b) = (ka / (2.0 * ng), kb / 2.0);
        k / (t * (ka / 2.0).powi(2) * b * b)
            + k / (t * t * ng * ng * (b * b - a * a))
                * ((1.0 - (-b * t).exp()) / b.powi(3) - (1.0 - (-a * t).exp()) / a.powi(3))
    }

    #[test]
    fn psi_series_and_direct_forms_agree() {
        for u in [0.099_999f64, 0.1] {
            let direct = (u + (-u).exp_m1()) / u.powi(3);
            assert_relative_eq!(psi(u), direct, max_relative = 1e-12);
            let e = (-u).exp_m1();
            let direct_prime = -e / u.powi(3) - 3.0 * (u + e) / u.powi(4);
            assert_relative_eq!(psi_prime(u), direct_prime, max_relative = 1e-9);
        }
        for u in [0.01, 0.5, 3.0] {
            let h = 1e-4 * u;
            let fd = (psi(u + h) - psi(u - h)) / (2.0 * h);
            assert_relative_eq!(psi_prime(u), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn rate_matches_contour_expression() {
        let r = reference();
        assert_relative_eq!(pair_rate_exact(&r).unwrap(), contour_rate(&r), max_relative = 1e-9);
        for (ng, f) in [(10.0, 50.0), (100.0, 500.0), (250.0, 150.0)] {
            let r = with_ng_finesse(ng, f);
            assert_relative_eq!(pair_rate_exact(&r).unwrap(), contour_rate(&r), max_relative = 1e-8);
        }
    }

    #[test]
    fn rate_limits() {
        let (a, b) = (3.0, 5.0);
        assert_relative_eq!(rate_integral(a, b, 1e-12), rate_integral(a, b, 0.0), max_relative = 1e-9);
        // Coincident poles: continuous across the switch.
        let near = rate_integral(2.0, 2.0 * (1.0 + 2e-6), 0.7);
        let at = rate_integral(2.0, 2.0, 0.7);
        assert_relative_eq!(near, at, max_relative = 1e-5);
        assert!(at.is_finite() && at > 0.0);
        let r = reference();
        let g2b2 = r.g2b2();
        let table = 16.0 * g2b2 / (r.kappa_a * r.group_index);
        assert!((pair_rate_exact(&r).unwrap() / table - 1.0).abs() < 0.02);
        let bare = r.bare();
        assert_relative_eq!(pair_rate_exact(&bare).unwrap(), 8.0 * g2b2 / r.kappa_a, max_relative = 1e-12);
        assert_relative_eq!(pair_rate_unmatched(&bare), 8.0 * g2b2 / r.kappa_a, max_relative = 1e-14);
    }

    #[test]
    fn rate_needs_zero_two_photon_detuning() {
        let r = SinglyFilteredRegime { detuning_a: 1.0, ..reference() };
        assert_eq!(pair_rate_exact(&r), Err(NondegenerateError::TwoPhotonDetuning(1.0)));
        let ok = SinglyFilteredRegime { detuning_a: 1.0, detuning_b: -1.0, ..reference() };
        assert!(pair_rate_exact(&ok).is_ok());
    }

    #[test]
    fn density_examples() {
        let r = reference();
        assert!(spectral_density(TAU / r.round_trip_difference, &r) < 1e-30 * spectral_density(0.0, &r));
        let bw = bandwidth(&r);
        assert!((bw / (TAU * 4e6) - 1.0).abs() < 1e-3, "{}", bw / TAU);
        let bare = r.bare();
        assert_relative_eq!(bandwidth(&bare), 0.643_594_252_905_582_6 * r.kappa_a, max_relative = 1e-14);
        let flat = SinglyFilteredRegime { kappa_b: f64::INFINITY, ..r };
        assert_eq!(bandwidth(&flat), r.kappa_a / r.group_index);
    }

    #[test]
    fn branch_selection() {
        let t = 2.0;
        assert_eq!(G2Branch::of(-1.0001, t), G2Branch::LeftTail);
        assert_eq!(G2Branch::of(-1.0, t), G2Branch::Plateau);
        assert_eq!(G2Branch::of(1.0, t), G2Branch::Plateau);
        assert_eq!(G2Branch::of(1.0001, t), G2Branch::RightTail);
        assert_eq!(G2Branch::of(0.0, 0.0), G2Branch::Plateau);
    }

    #[test]
    fn reduces_to_textbook_branches() {
        for (ng, f) in [(10.0, 50.0), (250.0, 150.0), (100.0, 500.0)] {
            let r = with_ng_finesse(ng, f);
            let k = r.kappa_a;
            let tr = r.round_trip_difference;
            let pref = peak_excess(&r);
            let left = |t: f64| 1.0 + pref * (k * t).exp() * crate::lineshape::sinhc(k * tr / 4.0).powi(2);
            let right = |t: f64| {
                1.0 + pref * (-(k / ng) * t).exp() * crate::lineshape::sinhc(k * tr / (4.0 * ng)).powi(2)
            };
            let plateau = |t: f64| {
                let bracket = (k / 2.0 * (t - tr / 2.0)).exp() + ng * (-(k / (2.0 * ng)) * (t + tr / 2.0)).exp()
                    - 1.0
                    - ng;
                1.0 + pref * 4.0 / (k * k * tr * tr) * bracket * bracket
            };
            for s in [-3.0, -0.5001, -0.3, 0.0, 0.2, 0.4999, 0.6, 3.0, 40.0] {
                let t = s * tr;
                let expected = match G2Branch::of(t, tr) {
                    G2Branch::LeftTail => left(t),
                    G2Branch::Plateau => plateau(t),
                    G2Branch::RightTail => right(t),
                };
                let got = g2_conditioned(t, &r, Conditioning::AGivenB).unwrap();
                assert_relative_eq!(got, expected, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn continuity_at_both_edges() {
        for ng in [10.0, 100.0, 250.0] {
            for f in [50.0, 150.0, 500.0] {
                let r = with_ng_finesse(ng, f);
                let tr = r.round_trip_difference;
                let (inside, b1) = correlation_amplitude(tr / 2.0, &r);
                let (outside, b2) = correlation_amplitude(tr / 2.0 * (1.0 + 1e-15), &r);
                assert_eq!((b1, b2), (G2Branch::Plateau, G2Branch::RightTail));
                assert_relative_eq!(inside, outside, max_relative = 1e-9);
                let x = r.kappa_a * tr / (4.0 * ng);
                let expected = (1.0 - (-2.0 * x).exp()).powi(2) / (4.0 * x * x);
                assert_relative_eq!(inside * inside, expected, max_relative = 1e-9);
                let (inside, _) = correlation_amplitude(-tr / 2.0, &r);
                let (outside, b) = correlation_amplitude(-tr / 2.0 * (1.0 + 1e-15), &r);
                assert_eq!(b, G2Branch::LeftTail);
                assert_relative_eq!(inside, outside, max_relative = 1e-9);
                let y = r.kappa_b * tr / 4.0;
                assert_relative_eq!(inside * inside, (1.0 - (-2.0 * y).exp()).powi(2) / (4.0 * y * y), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn bare_limit_and_tails() {
        let r = reference().bare();
        let k = r.kappa_a;
        for t in [-3.0 / k, 0.0, 0.5 / k, 2.0 / k] {
            let expected = 1.0 + peak_excess(&r) * (-k * f64::abs(t)).exp();
            assert_relative_eq!(g2_conditioned(t, &r, Conditioning::AGivenB).unwrap(), expected, max_relative = 1e-12);
        }
        let r = reference();
        for t in [-1e-6, 1e-3] {
            assert_relative_eq!(g2_conditioned(t, &r, Conditioning::AGivenB).unwrap(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn large_round_trip_does_not_overflow() {
        let r = with_ng_finesse(250.0, 0.01);
        for s in [-10.0, -0.5, -0.1, 0.0, 0.3, 0.5, 2.0] {
            let v = g2_conditioned(s * r.round_trip_difference, &r, Conditioning::AGivenB).unwrap();
            assert!(v.is_finite() && v >= 1.0);
        }
    }

    #[test]
    fn heralding_values() {
        let r = reference();
        assert_eq!(heralding_window(0.0, &r), 0.0);
        let inf = heralding_window(f64::INFINITY, &r);
        assert_relative_eq!(inf, 0.9 * (1.0 - TAU / (6.0 * 150.0)), max_relative = 1e-12);
        assert!((inf - 0.8937).abs() < 1e-4);
        let tr = r.round_trip_difference;
        let below = heralding_window(tr * (1.0 - 1e-15), &r);
        let above = heralding_window(tr, &r);
        let x = r.kappa_a * tr / r.group_index;
        assert!((below - above).abs() <= x * x, "{} vs {}", (below - above).abs(), x * x);
        assert_relative_eq!(below - above, 0.9 * x * x / 8.0, max_relative = 0.05);
    }

    #[test]
    fn spectral_brightness_ratio() {
        let r = reference();
        let filtered = pair_rate_unmatched(&r) / bandwidth(&r);
        let bare = r.bare();
        let bare = pair_rate_unmatched(&bare) / bandwidth(&bare);
        assert!((filtered / bare - 16.0 / 12.5).abs() < 0.02, "{}", filtered / bare);
    }

    proptest! {
        #[test]
        fn time_reversal(s in -5.0f64..5.0) {
            let r = reference();
            let t = s * r.round_trip_difference;
            let ba = g2_conditioned(t, &r, Conditioning::BGivenA).unwrap();
            let ab = g2_conditioned(-t, &r, Conditioning::AGivenB).unwrap();
            prop_assert_eq!(ba, ab);
        }

        #[test]
        fn g2_above_one(s in -5.0f64..200.0, ng in 2.0f64..300.0, f in 5.0f64..800.0) {
            let r = with_ng_finesse(ng, f);
            let v = g2_conditioned(s * r.round_trip_difference, &r, Conditioning::AGivenB).unwrap();
            prop_assert!(v >= 1.0 && v.is_finite());
            prop_assert!(v <= 1.0 + peak_excess(&r) * (1.0 + 1e-12));
        }

        #[test]
        fn rate_integral_symmetric(a in 0.01f64..10.0, b in 0.01f64..10.0, t in 0.0f64..5.0) {
            let x = rate_integral(a, b, t);
            let y = rate_integral(b, a, t);
            prop_assert!((x / y - 1.0).abs() < 1e-9);
            prop_assert!(x <= rate_integral(a, b, 0.0) * (1.0 + 1e-12));
        }
    }
}
