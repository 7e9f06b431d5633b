//! Physical parameters: config parsing, validation and derived quantities.
//!
//! Documents are TOML with sections `[pump]`, `[signal]`, `[idler]`,
//! `[filter]`, `[drive]` and `[geometry]` plus a top-level
//! `nonlinear_coupling_hz`. Frequencies are given in Hz and stored as such in
//! [`Hz`], so emitting and re-loading a parameter set is bit-exact; every
//! physics routine reads them in rad/s through [`Hz::angular`].

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance for κ = κ_ext + κ_int.
const RATE_SUM_TOLERANCE: f64 = 1e-12;
/// Cross-check disagreement above which a warning is attached.
const ROUTE_MISMATCH: f64 = 0.05;

/// A frequency in Hz. The angular value is `2π · self.0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hz(pub f64);

impl Hz {
    pub fn angular(self) -> f64 {
        TAU * self.0
    }

    pub fn from_angular(omega: f64) -> Self {
        Hz(omega / TAU)
    }
}

impl fmt::Display for Hz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Hz", self.0)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeLabel {
    Pump,
    Signal,
    Idler,
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModeLabel::Pump => "pump",
            ModeLabel::Signal => "signal",
            ModeLabel::Idler => "idler",
        };
        f.write_str(s)
    }
}

/// One cavity resonance. Detunings are measured from ω_p/2 for signal and
/// idler and from ω_p for the pump mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CavityModeSpec {
    pub label: ModeLabel,
    pub detuning: Hz,
    pub linewidth: Hz,
    pub external: Hz,
    pub internal: Hz,
}

impl CavityModeSpec {
    pub fn new(label: ModeLabel, detuning: Hz, linewidth: Hz, external: Hz) -> Self {
        Self {
            label,
            detuning,
            linewidth,
            external,
            internal: Hz(linewidth.0 - external.0),
        }
    }

    pub fn detuning(&self) -> f64 {
        self.detuning.angular()
    }

    /// Total linewidth κ in rad/s.
    pub fn kappa(&self) -> f64 {
        self.linewidth.angular()
    }

    pub fn kappa_ext(&self) -> f64 {
        self.external.angular()
    }

    pub fn kappa_int(&self) -> f64 {
        self.internal.angular()
    }

    pub fn escape_efficiency(&self) -> f64 {
        self.external.0 / self.linewidth.0
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let section = self.label.to_string();
        let field = |k: &str| format!("{section}.{k}");
        for (name, v) in [
            ("detuning_hz", self.detuning.0),
            ("linewidth_hz", self.linewidth.0),
            ("external_hz", self.external.0),
            ("internal_hz", self.internal.0),
        ] {
            if !v.is_finite() {
                return Err(invalid(field(name), "must be finite"));
            }
        }
        if self.linewidth.0 <= 0.0 {
            return Err(invalid(field("linewidth_hz"), "total linewidth must be > 0"));
        }
        if self.external.0 < 0.0 {
            return Err(invalid(field("external_hz"), "rates must be >= 0"));
        }
        if self.internal.0 < -RATE_SUM_TOLERANCE * self.linewidth.0 {
            return Err(invalid(
                field("external_hz"),
                format!(
                    "external coupling {} exceeds total linewidth {} (κ = κ_ext + κ_int with κ_int >= 0)",
                    self.external, self.linewidth
                ),
            ));
        }
        let sum = self.external.0 + self.internal.0;
        if ((sum - self.linewidth.0) / self.linewidth.0).abs() > RATE_SUM_TOLERANCE {
            return Err(invalid(
                field("internal_hz"),
                format!("κ_ext + κ_int = {sum} Hz differs from κ = {}", self.linewidth),
            ));
        }
        Ok(())
    }
}

/// Lorentzian band-pass dissipative filter inside the resonator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FilterSpec {
    pub fwhm: Hz,
    pub far_detuned_loss: Hz,
    pub applied_to: Vec<ModeLabel>,
}

impl FilterSpec {
    /// Δ in rad/s.
    pub fn fwhm(&self) -> f64 {
        self.fwhm.angular()
    }

    /// κ_abs in rad/s.
    pub fn far_detuned_loss(&self) -> f64 {
        self.far_detuned_loss.angular()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PumpDrive {
    /// Effective drive rate ε_p.
    pub amplitude: Hz,
    /// Gaussian amplitude standard deviation σ_p; zero means continuous-wave.
    pub bandwidth: Hz,
    /// Steady-state pump-mode amplitude |β|, overriding the ε_p route.
    pub cavity_amplitude: Option<f64>,
    pub power_w: Option<f64>,
    pub carrier: Option<Hz>,
}

impl PumpDrive {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth.angular()
    }

    pub fn is_continuous_wave(&self) -> bool {
        self.bandwidth.0 == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Geometry {
    pub finesse: Option<f64>,
    pub length_m: Option<f64>,
    pub refractive_index: Option<f64>,
    /// Literature value of τ_rt, compared against the computed one.
    pub reported_round_trip_difference_s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemParams {
    pub pump_mode: CavityModeSpec,
    pub signal_mode: CavityModeSpec,
    pub idler_mode: CavityModeSpec,
    pub filter: FilterSpec,
    pub drive: PumpDrive,
    pub nonlinear_coupling: Hz,
    pub geometry: Geometry,
}

/// Parameter set used for the plots of the reference design (lithium niobate
/// microring with an erbium spectral hole).
pub const REFERENCE_CONFIG: &str = r#"# Reference parameter set: erbium-doped thin-film lithium niobate microring.
# Frequencies in Hz (internally 2*pi*value rad/s); times in seconds.
# All cavity detunings are zero.

nonlinear_coupling_hz = 2.0e6        # g

[pump]
detuning_hz = 0.0
linewidth_hz = 1.0e9                 # pump cavity width

[signal]
detuning_hz = 0.0
linewidth_hz = 1.0e9                 # bare cavity width, filtered mode
external_hz = 9.0e8

[idler]
detuning_hz = 0.0
linewidth_hz = 1.0e9                 # bare cavity width, unfiltered mode
external_hz = 9.0e8

[filter]
fwhm_hz = 6.8e7                      # spectral hole width
far_detuned_loss_hz = 1.6e10         # absorption loss rate
applied_to = ["signal"]

[drive]
amplitude_hz = 3.0e9                 # pumping rate
bandwidth_hz = 0.0                   # continuous-wave
cavity_amplitude = 20.0              # listed pump cavity amplitude |beta|

[geometry]
finesse = 150.0
reported_round_trip_difference_s = 2.8e-9
"#;

// ---- document layer -------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeSection {
    #[serde(default)]
    detuning_hz: f64,
    linewidth_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    external_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    internal_hz: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterSection {
    fwhm_hz: f64,
    far_detuned_loss_hz: f64,
    #[serde(default = "default_applied_to")]
    applied_to: Vec<ModeLabel>,
}

fn default_applied_to() -> Vec<ModeLabel> {
    vec![ModeLabel::Signal]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveSection {
    amplitude_hz: f64,
    #[serde(default)]
    bandwidth_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cavity_amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    carrier_hz: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometrySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    finesse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    length_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refractive_index: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reported_round_trip_difference_s: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    nonlinear_coupling_hz: f64,
    pump: ModeSection,
    signal: ModeSection,
    idler: ModeSection,
    filter: FilterSection,
    drive: DriveSection,
    #[serde(default)]
    geometry: GeometrySection,
}

fn mode_from_section(label: ModeLabel, s: &ModeSection) -> Result<CavityModeSpec, ConfigError> {
    let external = match (s.external_hz, label) {
        (Some(e), _) => e,
        // Pump coupling only enters through ε_p, which is given directly.
        (None, ModeLabel::Pump) => s.linewidth_hz,
        (None, _) => return Err(invalid(format!("{label}.external_hz"), "missing")),
    };
    let internal = s.internal_hz.unwrap_or(s.linewidth_hz - external);
    Ok(CavityModeSpec {
        label,
        detuning: Hz(s.detuning_hz),
        linewidth: Hz(s.linewidth_hz),
        external: Hz(external),
        internal: Hz(internal),
    })
}

fn section_from_mode(m: &CavityModeSpec) -> ModeSection {
    ModeSection {
        detuning_hz: m.detuning.0,
        linewidth_hz: m.linewidth.0,
        external_hz: Some(m.external.0),
        internal_hz: Some(m.internal.0),
    }
}

/// Parses and validates a config document.
pub fn load_config(text: &str) -> Result<SystemParams, ConfigError> {
    let doc: Document = toml::from_str(text)?;
    let params = SystemParams {
        pump_mode: mode_from_section(ModeLabel::Pump, &doc.pump)?,
        signal_mode: mode_from_section(ModeLabel::Signal, &doc.signal)?,
        idler_mode: mode_from_section(ModeLabel::Idler, &doc.idler)?,
        filter: FilterSpec {
            fwhm: Hz(doc.filter.fwhm_hz),
            far_detuned_loss: Hz(doc.filter.far_detuned_loss_hz),
            applied_to: doc.filter.applied_to,
        },
        drive: PumpDrive {
            amplitude: Hz(doc.drive.amplitude_hz),
            bandwidth: Hz(doc.drive.bandwidth_hz),
            cavity_amplitude: doc.drive.cavity_amplitude,
            power_w: doc.drive.power_w,
            carrier: doc.drive.carrier_hz.map(Hz),
        },
        nonlinear_coupling: Hz(doc.nonlinear_coupling_hz),
        geometry: Geometry {
            finesse: doc.geometry.finesse,
            length_m: doc.geometry.length_m,
            refractive_index: doc.geometry.refractive_index,
            reported_round_trip_difference_s: doc.geometry.reported_round_trip_difference_s,
        },
    };
    params.validate()?;
    Ok(params)
}

impl SystemParams {
    /// The reference parameter set ([`REFERENCE_CONFIG`]).
    pub fn reference() -> Self {
        load_config(REFERENCE_CONFIG).expect("built-in config is valid")
    }

    /// Serialises to a config document that [`load_config`] reads back
    /// bit-for-bit.
    pub fn emit(&self) -> String {
        let doc = Document {
            nonlinear_coupling_hz: self.nonlinear_coupling.0,
            pump: section_from_mode(&self.pump_mode),
            signal: section_from_mode(&self.signal_mode),
            idler: section_from_mode(&self.idler_mode),
            filter: FilterSection {
                fwhm_hz: self.filter.fwhm.0,
                far_detuned_loss_hz: self.filter.far_detuned_loss.0,
                applied_to: self.filter.applied_to.clone(),
            },
            drive: DriveSection {
                amplitude_hz: self.drive.amplitude.0,
                bandwidth_hz: self.drive.bandwidth.0,
                cavity_amplitude: self.drive.cavity_amplitude,
                power_w: self.drive.power_w,
                carrier_hz: self.drive.carrier.map(|c| c.0),
            },
            geometry: GeometrySection {
                finesse: self.geometry.finesse,
                length_m: self.geometry.length_m,
                refractive_index: self.geometry.refractive_index,
                reported_round_trip_difference_s: self.geometry.reported_round_trip_difference_s,
            },
        };
        toml::to_string(&doc).expect("parameter document serialises")
    }

    /// g in rad/s.
    pub fn coupling(&self) -> f64 {
        self.nonlinear_coupling.angular()
    }

    /// Group index n_g = (κ_signal + κ_abs)/Δ at the filter centre.
    pub fn group_index(&self) -> f64 {
        (self.signal_mode.linewidth.0 + self.filter.far_detuned_loss.0) / self.filter.fwhm.0
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.pump_mode.validate()?;
        self.signal_mode.validate()?;
        self.idler_mode.validate()?;

        let g = self.nonlinear_coupling.0;
        if !(g.is_finite() && g > 0.0) {
            return Err(invalid("nonlinear_coupling_hz", "must be > 0"));
        }

        let f = &self.filter;
        if !(f.fwhm.0.is_finite() && f.fwhm.0 > 0.0) {
            return Err(invalid("filter.fwhm_hz", "filter width must be > 0"));
        }
        if !(f.far_detuned_loss.0.is_finite() && f.far_detuned_loss.0 >= 0.0) {
            return Err(invalid("filter.far_detuned_loss_hz", "must be >= 0"));
        }
        if f.applied_to.is_empty() || f.applied_to.contains(&ModeLabel::Pump) {
            return Err(invalid(
                "filter.applied_to",
                "must be [\"signal\"] or [\"signal\", \"idler\"]",
            ));
        }
        let ng = self.group_index();
        if ng < 1.0 - 1e-12 {
            return Err(invalid(
                "filter.fwhm_hz",
                format!("group index (κ + κ_abs)/Δ = {ng} is below 1"),
            ));
        }

        let d = &self.drive;
        if !(d.amplitude.0.is_finite() && d.amplitude.0 >= 0.0) {
            return Err(invalid("drive.amplitude_hz", "must be >= 0"));
        }
        if !(d.bandwidth.0.is_finite() && d.bandwidth.0 >= 0.0) {
            return Err(invalid("drive.bandwidth_hz", "must be >= 0"));
        }
        if let Some(b) = d.cavity_amplitude {
            if !(b.is_finite() && b >= 0.0) {
                return Err(invalid("drive.cavity_amplitude", "must be >= 0"));
            }
        }

        let geo = &self.geometry;
        let positive = |v: Option<f64>, name: &str| match v {
            Some(x) if !(x.is_finite() && x > 0.0) => Err(invalid(format!("geometry.{name}"), "must be > 0")),
            _ => Ok(()),
        };
        positive(geo.finesse, "finesse")?;
        positive(geo.length_m, "length_m")?;
        positive(geo.refractive_index, "refractive_index")?;
        positive(geo.reported_round_trip_difference_s, "reported_round_trip_difference_s")?;
        let ring = geo.length_m.is_some() && geo.refractive_index.is_some();
        if geo.length_m.is_some() != geo.refractive_index.is_some() {
            return Err(invalid("geometry", "length_m and refractive_index must be given together"));
        }
        if geo.finesse.is_none() && !ring {
            return Err(invalid(
                "geometry",
                "need finesse or (length_m and refractive_index) for the round-trip time",
            ));
        }
        Ok(())
    }

    /// Above-threshold ratio 2g|β| / (√(κ_s κ_i)/2); the source is below the
    /// OPO threshold when it is < 1.
    pub fn threshold_ratio(&self, beta: Complex64) -> f64 {
        let clamp = (self.signal_mode.kappa() * self.idler_mode.kappa()).sqrt() / 2.0;
        2.0 * self.coupling() * beta.norm() / clamp
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EscapeEfficiencies {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedParams {
    pub group_index: f64,
    /// Steady-state pump-mode amplitude β.
    pub pump_amplitude: Complex64,
    /// Round-trip time difference between the filtered and bare modes, s.
    pub round_trip_difference: f64,
    /// τ_c = n_g/κ_signal, s.
    pub correlation_time: f64,
    pub escape_efficiency: EscapeEfficiencies,
    /// κ_signal/n_g, rad/s.
    pub narrowed_linewidth: f64,
    pub threshold_ratio: f64,
    pub below_threshold: bool,
    pub warnings: Vec<String>,
}

fn mismatch(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Computes all derived quantities. Deterministic and side-effect free.
pub fn derive(p: &SystemParams) -> DerivedParams {
    let mut warnings = Vec::new();
    let ng = p.group_index();
    let kappa_s = p.signal_mode.kappa();

    let from_drive = {
        let denom = Complex64::new(p.pump_mode.kappa() / 2.0, p.pump_mode.detuning());
        Complex64::new(p.drive.amplitude.angular(), 0.0) / denom
    };
    let beta = match p.drive.cavity_amplitude {
        Some(b) => {
            let listed = Complex64::new(b, 0.0);
            if b > 0.0 && mismatch(from_drive.norm(), b) > ROUTE_MISMATCH {
                warnings.push(format!(
                    "pump amplitude: ε_p/(κ_pump/2 + iδ_pump) gives |β| = {:.6}, listed cavity_amplitude = {b}; using the listed value",
                    from_drive.norm()
                ));
            }
            listed
        }
        None => from_drive,
    };

    let geo = &p.geometry;
    let by_finesse = geo.finesse.map(|f| TAU * ng / (kappa_s * f));
    let by_ring = match (geo.length_m, geo.refractive_index) {
        (Some(l), Some(n)) => Some(n * l / SPEED_OF_LIGHT * (ng - 1.0)),
        _ => None,
    };
    let tau_rt = match (by_finesse, by_ring) {
        (Some(f), Some(r)) => {
            if mismatch(r, f) > ROUTE_MISMATCH {
                warnings.push(format!(
                    "round-trip difference: finesse route gives {f:.6e} s, ring route (nL/c)(n_g-1) gives {r:.6e} s; using the finesse route"
                ));
            }
            f
        }
        (Some(f), None) => f,
        (None, Some(r)) => r,
        (None, None) => 0.0,
    };
    if let Some(reported) = geo.reported_round_trip_difference_s {
        if mismatch(tau_rt, reported) > ROUTE_MISMATCH {
            warnings.push(format!(
                "round-trip difference: computed {tau_rt:.6e} s disagrees with reported {reported:.6e} s by {:.1}%",
                100.0 * mismatch(tau_rt, reported)
            ));
        }
    }

    let threshold_ratio = p.threshold_ratio(beta);
    let below_threshold = threshold_ratio < 1.0;
    if !below_threshold {
        warnings.push(format!(
            "pump at {threshold_ratio:.3}x the OPO threshold; weak-pumping formulas do not apply"
        ));
    }

    DerivedParams {
        group_index: ng,
        pump_amplitude: beta,
        round_trip_difference: tau_rt,
        correlation_time: ng / kappa_s,
        escape_efficiency: EscapeEfficiencies {
            pump: p.pump_mode.escape_efficiency(),
            signal: p.signal_mode.escape_efficiency(),
            idler: p.idler_mode.escape_efficiency(),
        },
        narrowed_linewidth: kappa_s / ng,
        threshold_ratio,
        below_threshold,
        warnings,
    }
}

/// Finesse implied by a round-trip difference, inverse of the finesse route.
pub fn finesse_from_round_trip(tau_rt: f64, group_index: f64, kappa: f64) -> f64 {
    2.0 * PI * group_index / (kappa * tau_rt)
}
