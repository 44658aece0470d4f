//! Experiment configuration files and their validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::Scheme;
use crate::error::{Error, Result};
use crate::field::FhnParams;
use crate::geometry::{build_profile, Grid, ProfileSpec, RadiusProfile};
use crate::pulse::theoretical_fast_speed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    OperatorSelftest,
    PulseSpeed,
    Symmetrization,
    EffectiveComparison,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Self::OperatorSelftest => "operator_selftest",
            Self::PulseSpeed => "pulse_speed",
            Self::Symmetrization => "symmetrization",
            Self::EffectiveComparison => "effective_comparison",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSettings {
    /// Omit to use `min(0.1, 0.25/(α + max|h'(ū₀)|))` from the radial base state.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_max_iterations() -> usize {
    2000
}

impl Default for StepperSettings {
    fn default() -> Self {
        Self {
            dt: None,
            scheme: Scheme::default(),
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
        }
    }
}

/// `amplitude · cos(mode (θ − φ))` added to one component, `φ` drawn from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    #[serde(default = "one")]
    pub mode: usize,
    pub amplitude: f64,
    #[serde(default = "one_u8")]
    pub component: u8,
}

fn one() -> usize {
    1
}

fn one_u8() -> u8 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Relative pulse speed error.
    pub speed_rel: f64,
    /// Fitted decay rate must reach this multiple of `γε/2`.
    pub rate_factor: f64,
    pub envelope_c_max: f64,
    pub envelope_margin: f64,
    pub floor: f64,
    pub slope_target: f64,
    pub slope_tolerance: f64,
    pub perp_max: f64,
    pub operator_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            speed_rel: 0.05,
            rate_factor: 0.9,
            envelope_c_max: 10.0,
            envelope_margin: 0.1,
            floor: 1e-10,
            slope_target: 2.0,
            slope_tolerance: 0.4,
            perp_max: 1e-12,
            operator_tolerance: 1e-12,
        }
    }
}

/// Refractory strip `u₂ = level` on `[start_fraction·L, L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Guard {
    pub start_fraction: f64,
    pub level: f64,
}

/// Ignition of the radial base state, shared by every dynamic scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSettings {
    /// Level of the tracked front.
    pub level: f64,
    pub amplitude: f64,
    pub x_front_fraction: f64,
    pub guard: Option<Guard>,
    /// α values swept by `pulse_speed`; empty means `params.alpha` only.
    pub alphas: Vec<f64>,
}

impl Default for PulseSettings {
    fn default() -> Self {
        Self {
            level: 0.5,
            amplitude: 1.0,
            x_front_fraction: 0.05,
            guard: Some(Guard {
                start_fraction: 0.95,
                level: 0.3,
            }),
            alphas: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComparisonSettings {
    /// Perturbation amplitudes; empty means `δ, δ/2, δ/4` from `perturbation`.
    pub amplitudes: Vec<f64>,
    pub t_compare: f64,
}

impl Default for ComparisonSettings {
    fn default() -> Self {
        Self {
            amplitudes: Vec::new(),
            t_compare: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestSettings {
    pub profiles: usize,
    pub pairs: usize,
}

impl Default for SelftestSettings {
    fn default() -> Self {
        Self { profiles: 5, pairs: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Free-form note, ignored by the runner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub params: Option<FhnParams<f64>>,
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub stepper: StepperSettings,
    #[serde(default, rename = "t_final", alias = "T")]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub perturbation: Option<Perturbation>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "one")]
    pub probe_stride: usize,
    /// Write a binary snapshot every this many samples.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub pulse: PulseSettings,
    #[serde(default)]
    pub comparison: ComparisonSettings,
    #[serde(default)]
    pub selftest: SelftestSettings,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// A configuration with every optional field at its default.
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            description: None,
            params: None,
            profile: None,
            grid: None,
            stepper: StepperSettings::default(),
            t_final: None,
            perturbation: None,
            seed: 0,
            output_dir: default_output_dir(),
            probe_stride: 1,
            snapshot_every: None,
            thresholds: Thresholds::default(),
            pulse: PulseSettings::default(),
            comparison: ComparisonSettings::default(),
            selftest: SelftestSettings::default(),
        }
    }

    /// Parses JSON, reporting schema violations with the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config {
                path,
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Perturbation amplitudes of the comparison sweep.
    pub fn comparison_amplitudes(&self) -> Vec<f64> {
        if !self.comparison.amplitudes.is_empty() {
            return self.comparison.amplitudes.clone();
        }
        let d = self.perturbation.as_ref().map_or(0.0, |p| p.amplitude);
        vec![d, d / 2.0, d / 4.0]
    }

    /// α values of the pulse sweep.
    pub fn pulse_alphas(&self) -> Vec<f64> {
        if !self.pulse.alphas.is_empty() {
            self.pulse.alphas.clone()
        } else {
            self.params.iter().map(|p| p.alpha).collect()
        }
    }

    fn required<'a, T>(value: &'a Option<T>, path: &str) -> Result<&'a T> {
        value.as_ref().ok_or_else(|| Error::Config {
            path: path.into(),
            message: "required by this scenario".into(),
        })
    }

    pub fn require_params(&self) -> Result<FhnParams<f64>> {
        Self::required(&self.params, "params").copied()
    }

    pub fn require_grid(&self) -> Result<Grid> {
        Self::required(&self.grid, "grid").cloned()
    }

    pub fn require_t_final(&self) -> Result<f64> {
        Self::required(&self.t_final, "t_final").copied()
    }

    pub fn require_perturbation(&self) -> Result<&Perturbation> {
        Self::required(&self.perturbation, "perturbation")
    }

    /// The configured profile; `pulse_speed` defaults to a unit cylinder.
    pub fn profile_spec(&self) -> Result<ProfileSpec> {
        match (&self.profile, self.scenario) {
            (Some(p), _) => Ok(p.clone()),
            (None, Scenario::PulseSpeed) => Ok(ProfileSpec::constant(1.0)),
            (None, _) => Err(Error::Config {
                path: "profile".into(),
                message: "required by this scenario".into(),
            }),
        }
    }

    pub fn build_profile(&self) -> Result<RadiusProfile<f64>> {
        build_profile(&self.profile_spec()?, &self.require_grid()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Dotted path of the offending field.
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.path, self.message)
    }
}

struct Diagnostics(Vec<Diagnostic>);

impl Diagnostics {
    fn error(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Error,
            path: path.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Warning,
            path: path.into(),
            message: message.into(),
        });
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

/// Schema and cross-field checks. Never fails; problems are returned as diagnostics.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut d = Diagnostics(Vec::new());

    if cfg.scenario == Scenario::OperatorSelftest {
        if cfg.selftest.profiles == 0 || cfg.selftest.pairs == 0 {
            d.error("selftest", "profiles and pairs must be positive");
        }
        if !(cfg.thresholds.operator_tolerance > 0.0) {
            d.error("thresholds.operator_tolerance", "must be positive");
        }
        return d.0;
    }

    match &cfg.params {
        None => d.error("params", "required by this scenario"),
        Some(p) => {
            if let Err(e) = p.validate() {
                d.error("params", e.to_string());
            }
            for a in p.advisories() {
                d.warning("params", a);
            }
        }
    }

    let grid = match &cfg.grid {
        None => {
            d.error("grid", "required by this scenario");
            None
        }
        Some(g) => match g.validate() {
            Ok(()) => Some(*g),
            Err(e) => {
                d.error("grid", e.to_string());
                None
            }
        },
    };

    match cfg.profile_spec() {
        Err(e) => d.error("profile", e.to_string()),
        Ok(spec) => {
            if let Some(g) = &grid {
                if let Err(e) = build_profile::<f64>(&spec, g) {
                    d.error("profile", e.to_string());
                }
            }
        }
    }

    match cfg.t_final {
        None => d.error("t_final", "required by this scenario"),
        Some(t) if !(t > 0.0 && t.is_finite()) => d.error("t_final", "must be positive"),
        _ => {}
    }

    let s = &cfg.stepper;
    if let Some(dt) = s.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            d.error("stepper.dt", "must be positive");
        }
    }
    if !(s.tolerance > 0.0 && s.tolerance < 1e-4) {
        d.error("stepper.tolerance", "must lie in (0, 1e-4)");
    }
    if s.max_iterations == 0 {
        d.error("stepper.max_iterations", "must be positive");
    }
    if cfg.probe_stride == 0 {
        d.error("probe_stride", "must be positive");
    }
    if cfg.snapshot_every == Some(0) {
        d.error("snapshot_every", "must be positive when given");
    }

    validate_pulse(cfg, grid.as_ref(), &mut d);

    let needs_perturbation = matches!(cfg.scenario, Scenario::Symmetrization | Scenario::EffectiveComparison);
    match &cfg.perturbation {
        None if needs_perturbation => d.error("perturbation", "required by this scenario"),
        None => {}
        Some(p) => {
            if !(p.amplitude >= 0.0 && p.amplitude.is_finite()) {
                d.error(
                    "perturbation.amplitude",
                    format!("amplitude {} must be non-negative", p.amplitude),
                );
            } else if p.amplitude > 0.0 {
                if p.mode == 0 {
                    d.error("perturbation.mode", "non-radial perturbations need mode >= 1");
                } else if let Some(g) = &grid {
                    if 2 * p.mode >= g.ntheta {
                        d.warning(
                            "perturbation.mode",
                            format!("mode {} is not resolved by N_theta = {}", p.mode, g.ntheta),
                        );
                    }
                }
            }
            if p.component != 1 && p.component != 2 {
                d.error("perturbation.component", "must be 1 or 2");
            }
        }
    }

    if cfg.scenario == Scenario::EffectiveComparison {
        let amps = cfg.comparison_amplitudes();
        if amps.len() < 2 {
            d.error(
                "comparison.amplitudes",
                "at least two amplitudes are needed for a scaling fit",
            );
        }
        // a bad base amplitude has been reported already
        let derived = cfg.comparison.amplitudes.is_empty();
        let base_ok = cfg.perturbation.as_ref().is_some_and(|p| p.amplitude >= 0.0);
        if (!derived || base_ok) && amps.iter().any(|&a| !(a > 0.0)) {
            d.error("comparison.amplitudes", "amplitudes must be positive");
        }
        let tc = cfg.comparison.t_compare;
        if !(tc > 0.0) {
            d.error("comparison.t_compare", "must be positive");
        } else if cfg.t_final.is_some_and(|t| tc > t) {
            d.error("comparison.t_compare", "must not exceed t_final");
        }
    }

    let th = &cfg.thresholds;
    for (name, v) in [
        ("speed_rel", th.speed_rel),
        ("rate_factor", th.rate_factor),
        ("envelope_c_max", th.envelope_c_max),
        ("floor", th.floor),
        ("slope_tolerance", th.slope_tolerance),
        ("perp_max", th.perp_max),
    ] {
        if !(v > 0.0) {
            d.error(&format!("thresholds.{name}"), "must be positive");
        }
    }
    if !(th.envelope_margin >= 0.0) {
        d.error("thresholds.envelope_margin", "must be non-negative");
    }
    d.0
}

fn validate_pulse(cfg: &ExperimentConfig, grid: Option<&Grid>, d: &mut Diagnostics) {
    let p = &cfg.pulse;
    if !(p.amplitude >= 0.0) {
        d.error("pulse.amplitude", "must be non-negative");
    }
    if !(p.x_front_fraction > 0.0 && p.x_front_fraction < 1.0) {
        d.error("pulse.x_front_fraction", "must lie in (0, 1)");
    }
    if let Some(g) = &p.guard {
        if !(g.start_fraction > p.x_front_fraction && g.start_fraction < 1.0) {
            d.error("pulse.guard.start_fraction", "must lie between x_front_fraction and 1");
        }
    }
    if cfg.scenario != Scenario::PulseSpeed {
        return;
    }
    if !(p.level > 0.0 && p.level < p.amplitude) {
        d.error("pulse.level", "must lie strictly between 0 and the ignition amplitude");
    }
    for (k, &a) in p.alphas.iter().enumerate() {
        if !(a > 0.0 && a < 0.5) {
            d.error(&format!("pulse.alphas[{k}]"), "alpha must lie in (0, 1/2)");
        }
    }
    if p.guard.is_none() {
        d.warning(
            "pulse.guard",
            "without a refractory guard the ignition also launches a front into the periodic seam",
        );
    }
    // the tracked front must stay clear of the seam through the fit window
    let (Some(g), Some(t)) = (grid, cfg.t_final) else {
        return;
    };
    let fastest = cfg
        .pulse_alphas()
        .into_iter()
        .filter_map(|a| theoretical_fast_speed(a).ok())
        .fold(0.0, f64::max);
    let reach = p.x_front_fraction * g.length + fastest * crate::pulse::WINDOW_END * t;
    if reach > (1.0 - crate::pulse::SEAM_MARGIN) * g.length {
        d.warning(
            "grid.length",
            format!(
                "a front at speed {fastest:.4} reaches x = {reach:.1} within the fit window; L = {} is too short",
                g.length
            ),
        );
    }
    if g.dx() > 0.25 {
        d.warning("grid.nx", format!("dx = {:.3} under-resolves the front", g.dx()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetrization() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(Scenario::Symmetrization);
        c.params = Some(FhnParams::new(0.25, 0.01, 0.01).unwrap());
        c.profile = Some(ProfileSpec::sinusoidal_periods(0.2, 0.25, 2));
        c.grid = Some(Grid::new(128, 32, 40.0).unwrap());
        c.t_final = Some(10.0);
        c.perturbation = Some(Perturbation {
            mode: 1,
            amplitude: 0.05,
            component: 1,
        });
        c
    }

    #[test]
    fn valid_config_has_no_diagnostics() {
        assert!(validate(&symmetrization()).is_empty());
        assert!(validate(&ExperimentConfig::new(Scenario::OperatorSelftest)).is_empty());
    }

    #[test]
    fn negative_amplitude_is_one_error() {
        let mut c = symmetrization();
        c.perturbation.as_mut().unwrap().amplitude = -0.1;
        let d = validate(&c);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Error);
        assert_eq!(d[0].path, "perturbation.amplitude");
    }

    #[test]
    fn non_periodic_wavenumber_is_reported() {
        let mut c = symmetrization();
        c.profile = Some(ProfileSpec::sinusoidal(0.2, 0.25, 0.3));
        let d = validate(&c);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("periodically"), "{}", d[0].message);
    }

    #[test]
    fn missing_fields_are_errors() {
        let c = ExperimentConfig::new(Scenario::Symmetrization);
        let paths: Vec<String> = validate(&c).into_iter().map(|d| d.path).collect();
        for p in ["params", "grid", "profile", "t_final", "perturbation"] {
            assert!(paths.iter().any(|q| q == p), "{p} missing from {paths:?}");
        }
    }

    #[test]
    fn short_pulse_domain_warns() {
        let mut c = ExperimentConfig::new(Scenario::PulseSpeed);
        c.params = Some(FhnParams::new(0.25, 1e-3, 1e-3).unwrap());
        c.grid = Some(Grid::new(1024, 8, 100.0).unwrap());
        c.t_final = Some(600.0);
        let d = validate(&c);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
        assert_eq!(d[0].path, "grid.length");
    }

    #[test]
    fn schema_errors_carry_the_field_path() {
        let err = ExperimentConfig::from_json(r#"{"scenario": "symmetrization", "grid": {"nx": "many"}}"#).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "grid.nx"),
            other => panic!("unexpected {other:?}"),
        }
        let err = ExperimentConfig::from_json(r#"{"scenario": "bogus"}"#).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn json_round_trip() {
        let c = symmetrization();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
        let t = ExperimentConfig::from_json(r#"{"scenario": "pulse_speed", "T": 5.0}"#).unwrap();
        assert_eq!(t.t_final, Some(5.0));
    }
}
