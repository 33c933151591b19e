//! Run configuration: a single JSON document, validated eagerly with
//! field-path error messages. Amplitude lists are normalized once here, so
//! the runners only ever see unit-norm states; every normalization is
//! recorded as a warning and echoed into the output metadata.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use timebin_sim::hom::NoiseModel;
use timebin_sim::quantum::{convex_mixture, BasisLabel, DensityMatrix, PureState};
use timebin_sim::tomography::mub_states;

/// A configuration problem, pointing at the offending field.
#[derive(Debug, Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Tomography,
    Chsh,
    HomScan,
    QwalkSynth,
    Entangle,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Tomography => "tomography",
            Self::Chsh => "chsh",
            Self::HomScan => "hom-scan",
            Self::QwalkSynth => "qwalk-synth",
            Self::Entangle => "entangle",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default = "default_visibility")]
    pub visibility: f64,
    #[serde(default)]
    pub accidental_rate: f64,
    #[serde(default = "default_mean_counts")]
    pub mean_counts: f64,
}

fn default_visibility() -> f64 {
    0.985
}

fn default_mean_counts() -> f64 {
    1e4
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            visibility: default_visibility(),
            accidental_rate: 0.0,
            mean_counts: default_mean_counts(),
        }
    }
}

impl NoiseSection {
    pub fn to_model(&self) -> Result<NoiseModel, ConfigError> {
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(ConfigError::new(
                "noise.visibility",
                format!("must lie in [0, 1] (got {})", self.visibility),
            ));
        }
        if self.accidental_rate < 0.0 || !self.accidental_rate.is_finite() {
            return Err(ConfigError::new(
                "noise.accidental_rate",
                format!("must be a finite non-negative number (got {})", self.accidental_rate),
            ));
        }
        if self.mean_counts <= 0.0 || !self.mean_counts.is_finite() {
            return Err(ConfigError::new(
                "noise.mean_counts",
                format!("must be a finite positive number (got {})", self.mean_counts),
            ));
        }
        NoiseModel::new(self.visibility, self.accidental_rate, self.mean_counts)
            .map_err(|e| ConfigError::new("noise", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: PathBuf,
    pub format: OutputFormat,
}

/// A pure state or mixture given by name, amplitude list, or component list.
///
/// Complex amplitudes are two-element `[re, im]` arrays. Exactly one of the
/// three fields must be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub named: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixture: Option<Vec<MixtureComponent>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub state: Box<StateSpec>,
}

fn named_state(name: &str, path: &str) -> Result<PureState, ConfigError> {
    let mubs = mub_states();
    let index = match name {
        "t0" => 0,
        "t1" => 1,
        "plus" => 2,
        "minus" => 3,
        "plus_i" => 4,
        "minus_i" => 5,
        other => {
            return Err(ConfigError::new(
                path,
                format!(
                    "unknown state name {other:?} (expected one of t0, t1, plus, minus, plus_i, minus_i)"
                ),
            ))
        }
    };
    Ok(mubs[index].clone())
}

impl StateSpec {
    /// Resolves to a pure state, normalizing amplitude lists in place and
    /// recording a warning when a normalization happened.
    pub fn resolve_pure(
        &mut self,
        path: &str,
        warnings: &mut Vec<String>,
    ) -> Result<PureState, ConfigError> {
        match (&mut self.named, &mut self.amplitudes, &self.mixture) {
            (Some(name), None, None) => named_state(name, path),
            (None, Some(amplitudes), None) => {
                if amplitudes.is_empty() {
                    return Err(ConfigError::new(
                        format!("{path}.amplitudes"),
                        "amplitude list must not be empty",
                    ));
                }
                let norm_sq: f64 = amplitudes.iter().map(|[re, im]| re * re + im * im).sum();
                if !norm_sq.is_finite() || norm_sq < 1e-300 {
                    return Err(ConfigError::new(
                        format!("{path}.amplitudes"),
                        format!("not normalizable (squared norm {norm_sq})"),
                    ));
                }
                let norm = norm_sq.sqrt();
                if (norm - 1.0).abs() > 1e-12 {
                    for pair in amplitudes.iter_mut() {
                        pair[0] /= norm;
                        pair[1] /= norm;
                    }
                    warnings.push(format!(
                        "{path}.amplitudes: normalized input (norm was {norm})"
                    ));
                }
                let complex: Vec<Complex64> = amplitudes
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect();
                PureState::new(complex, BasisLabel::TimeBin)
                    .map_err(|e| ConfigError::new(format!("{path}.amplitudes"), e.to_string()))
            }
            (None, None, Some(_)) => Err(ConfigError::new(
                path,
                "a mixture is not allowed here; a pure state is required",
            )),
            _ => Err(ConfigError::new(
                path,
                "exactly one of `named`, `amplitudes`, or `mixture` must be given",
            )),
        }
    }

    /// Resolves to a density matrix; mixtures of pure components are allowed.
    pub fn resolve_density(
        &mut self,
        path: &str,
        warnings: &mut Vec<String>,
    ) -> Result<DensityMatrix, ConfigError> {
        if let Some(components) = &mut self.mixture {
            if components.is_empty() {
                return Err(ConfigError::new(
                    format!("{path}.mixture"),
                    "mixture must have at least one component",
                ));
            }
            let mut parts = Vec::with_capacity(components.len());
            for (k, component) in components.iter_mut().enumerate() {
                let component_path = format!("{path}.mixture[{k}]");
                if component.weight < 0.0 || !component.weight.is_finite() {
                    return Err(ConfigError::new(
                        format!("{component_path}.weight"),
                        format!("must be a finite non-negative number (got {})", component.weight),
                    ));
                }
                let pure = component
                    .state
                    .resolve_pure(&format!("{component_path}.state"), warnings)?;
                parts.push((pure.to_density(), component.weight));
            }
            let total: f64 = parts.iter().map(|(_, w)| w).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(ConfigError::new(
                    format!("{path}.mixture"),
                    format!("weights must sum to 1 (got {total})"),
                ));
            }
            convex_mixture(&parts).map_err(|e| ConfigError::new(path, e.to_string()))
        } else {
            Ok(self.resolve_pure(path, warnings)?.to_density())
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<TargetEntry>>,
    /// Named target collection; `"standard48"` runs the scripted 48-state set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub state: StateSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshParams {
    pub shots_per_setting: u64,
    #[serde(default = "default_unity")]
    pub white_noise_visibility: f64,
}

fn default_unity() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomScanParams {
    pub target: StateSpec,
    pub reference: StateSpec,
    pub delays: DelaysSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temporal_model: Option<TemporalSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DelaysSpec {
    Grid { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

impl DelaysSpec {
    pub fn expand(&self, path: &str) -> Result<Vec<f64>, ConfigError> {
        match self {
            Self::List(values) => {
                if values.is_empty() {
                    return Err(ConfigError::new(path, "delay list must not be empty"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(ConfigError::new(path, "delays must be finite"));
                }
                Ok(values.clone())
            }
            Self::Grid { start, stop, step } => {
                if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
                    return Err(ConfigError::new(path, "grid bounds must be finite"));
                }
                if *step <= 0.0 {
                    return Err(ConfigError::new(
                        format!("{path}.step"),
                        format!("must be positive (got {step})"),
                    ));
                }
                if stop < start {
                    return Err(ConfigError::new(
                        path,
                        format!("stop ({stop}) must not precede start ({start})"),
                    ));
                }
                let count = ((stop - start) / step).round() as usize + 1;
                if count > 1_000_000 {
                    return Err(ConfigError::new(path, "grid has more than 1e6 points"));
                }
                Ok((0..count).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalSpec {
    pub bin_spacing_ps: f64,
    pub coherence_time_ps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QwalkParams {
    pub target: StateSpec,
    pub n_steps: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_restarts() -> usize {
    32
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntangleParams {
    /// Pump amplitudes as `[re, im]` pairs.
    pub pump: Vec<[f64; 2]>,
    pub alice_refs: RefsSpec,
    pub bob_refs: RefsSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RefsSpec {
    /// The six qubit MUB references (two-bin pumps only).
    Named(String),
    List(Vec<StateSpec>),
}

/// Typed, validated parameters of one experiment.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Experiment {
    Tomography(TomographyParams),
    Chsh(ChshParams),
    HomScan(HomScanParams),
    QwalkSynth(QwalkParams),
    Entangle(EntangleParams),
}

/// A fully validated run configuration; amplitude lists inside `params` are
/// already unit-norm.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub noise: NoiseSection,
    pub params: Experiment,
    pub output: OutputSection,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    seed: u64,
    #[serde(default)]
    noise: NoiseSection,
    params: serde_json::Value,
    output: OutputSection,
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| ConfigError::new("<config>", e.to_string()))?;
    raw.noise.to_model()?;
    let mut warnings = Vec::new();
    let params = parse_params(raw.experiment, raw.params, &mut warnings)?;
    Ok(RunConfig {
        experiment: raw.experiment,
        seed: raw.seed,
        noise: raw.noise,
        params,
        output: raw.output,
        warnings,
    })
}

fn from_value<T: serde::de::DeserializeOwned>(
    value: serde_json::Value,
) -> Result<T, ConfigError> {
    serde_json::from_value(value).map_err(|e| ConfigError::new("params", e.to_string()))
}

fn parse_params(
    kind: ExperimentKind,
    value: serde_json::Value,
    warnings: &mut Vec<String>,
) -> Result<Experiment, ConfigError> {
    match kind {
        ExperimentKind::Tomography => {
            let mut params: TomographyParams = from_value(value)?;
            match (&mut params.targets, &params.suite) {
                (Some(targets), None) => {
                    if targets.is_empty() {
                        return Err(ConfigError::new(
                            "params.targets",
                            "target list must not be empty",
                        ));
                    }
                    for (k, entry) in targets.iter_mut().enumerate() {
                        entry
                            .state
                            .resolve_density(&format!("params.targets[{k}].state"), warnings)?;
                    }
                }
                (None, Some(suite)) => {
                    if suite != "standard48" {
                        return Err(ConfigError::new(
                            "params.suite",
                            format!("unknown suite {suite:?} (expected \"standard48\")"),
                        ));
                    }
                }
                _ => {
                    return Err(ConfigError::new(
                        "params",
                        "exactly one of `targets` or `suite` must be given",
                    ))
                }
            }
            Ok(Experiment::Tomography(params))
        }
        ExperimentKind::Chsh => {
            let params: ChshParams = from_value(value)?;
            if params.shots_per_setting == 0 {
                return Err(ConfigError::new(
                    "params.shots_per_setting",
                    "must be at least 1",
                ));
            }
            if !(0.0..=1.0).contains(&params.white_noise_visibility) {
                return Err(ConfigError::new(
                    "params.white_noise_visibility",
                    format!("must lie in [0, 1] (got {})", params.white_noise_visibility),
                ));
            }
            Ok(Experiment::Chsh(params))
        }
        ExperimentKind::HomScan => {
            let mut params: HomScanParams = from_value(value)?;
            let target = params.target.resolve_density("params.target", warnings)?;
            let reference = params.reference.resolve_pure("params.reference", warnings)?;
            if target.dim() != reference.dim() {
                return Err(ConfigError::new(
                    "params.reference",
                    format!(
                        "dimension {} does not match the target dimension {}",
                        reference.dim(),
                        target.dim()
                    ),
                ));
            }
            params.delays.expand("params.delays")?;
            if let Some(model) = &params.temporal_model {
                timebin_sim::hom::TemporalModeModel::new(
                    model.bin_spacing_ps,
                    model.coherence_time_ps,
                )
                .map_err(|e| ConfigError::new("params.temporal_model", e.to_string()))?;
            }
            Ok(Experiment::HomScan(params))
        }
        ExperimentKind::QwalkSynth => {
            let mut params: QwalkParams = from_value(value)?;
            let target = params.target.resolve_pure("params.target", warnings)?;
            if params.n_steps + 1 < target.dim() {
                return Err(ConfigError::new(
                    "params.n_steps",
                    format!(
                        "a dimension-{} target needs at least {} steps (got {})",
                        target.dim(),
                        target.dim() - 1,
                        params.n_steps
                    ),
                ));
            }
            if params.restarts == 0 {
                return Err(ConfigError::new("params.restarts", "must be at least 1"));
            }
            Ok(Experiment::QwalkSynth(params))
        }
        ExperimentKind::Entangle => {
            let mut params: EntangleParams = from_value(value)?;
            if params.pump.is_empty() {
                return Err(ConfigError::new("params.pump", "pump must not be empty"));
            }
            let norm_sq: f64 = params.pump.iter().map(|[re, im]| re * re + im * im).sum();
            if !norm_sq.is_finite() || norm_sq < 1e-300 {
                return Err(ConfigError::new(
                    "params.pump",
                    format!("not normalizable (squared norm {norm_sq})"),
                ));
            }
            let norm = norm_sq.sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                for pair in params.pump.iter_mut() {
                    pair[0] /= norm;
                    pair[1] /= norm;
                }
                warnings.push(format!("params.pump: normalized input (norm was {norm})"));
            }
            let n = params.pump.len();
            for (field, refs) in [
                ("params.alice_refs", &mut params.alice_refs),
                ("params.bob_refs", &mut params.bob_refs),
            ] {
                match refs {
                    RefsSpec::Named(name) => {
                        if name != "mub" {
                            return Err(ConfigError::new(
                                field,
                                format!("unknown reference set {name:?} (expected \"mub\")"),
                            ));
                        }
                        if n != 2 {
                            return Err(ConfigError::new(
                                field,
                                format!("the MUB reference set requires a 2-bin pump (got {n} bins)"),
                            ));
                        }
                    }
                    RefsSpec::List(specs) => {
                        if specs.is_empty() {
                            return Err(ConfigError::new(field, "reference list must not be empty"));
                        }
                        for (k, spec) in specs.iter_mut().enumerate() {
                            let state = spec.resolve_pure(&format!("{field}[{k}]"), warnings)?;
                            if state.dim() != n {
                                return Err(ConfigError::new(
                                    format!("{field}[{k}]"),
                                    format!(
                                        "dimension {} does not match the pump dimension {n}",
                                        state.dim()
                                    ),
                                ));
                            }
                        }
                    }
                }
            }
            Ok(Experiment::Entangle(params))
        }
    }
}

impl RunConfig {
    /// Applies command-line overrides for the seed and output path.
    pub fn apply_overrides(&mut self, seed: Option<u64>, out: Option<PathBuf>) {
        if let Some(seed) = seed {
            self.seed = seed;
        }
        if let Some(path) = out {
            self.output.path = path;
        }
    }
}
