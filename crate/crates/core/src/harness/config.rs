use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuits::CircuitEnsemble;
use crate::costs::Task;
use crate::error::{Error, Result};
use crate::landscape::{AdamConfig, Method, DEFAULT_GRID_RESOLUTION};
use crate::linalg::BipartitePartition;

pub const MIN_QUBITS: usize = 2;
pub const MAX_QUBITS: usize = 12;

/// Which side of the local gate is drawn from a random ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleConfig {
    V1Design,
    V2Design,
    Both,
    /// Both sides fixed to the identity.
    None,
}

impl EnsembleConfig {
    pub const DESIGNS: [EnsembleConfig; 3] = [EnsembleConfig::V1Design, EnsembleConfig::V2Design, EnsembleConfig::Both];

    pub fn name(self) -> &'static str {
        match self {
            EnsembleConfig::V1Design => "v1_design",
            EnsembleConfig::V2Design => "v2_design",
            EnsembleConfig::Both => "both",
            EnsembleConfig::None => "none",
        }
    }

    pub fn v1_random(self) -> bool {
        matches!(self, EnsembleConfig::V1Design | EnsembleConfig::Both)
    }

    pub fn v2_random(self) -> bool {
        matches!(self, EnsembleConfig::V2Design | EnsembleConfig::Both)
    }
}

impl std::str::FromStr for EnsembleConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v1_design" => Ok(EnsembleConfig::V1Design),
            "v2_design" => Ok(EnsembleConfig::V2Design),
            "both" => Ok(EnsembleConfig::Both),
            "none" => Ok(EnsembleConfig::None),
            other => Err(Error::config(
                "ensemble_config",
                format!("unknown value `{other}` (expected v1_design, v2_design, both or none)"),
            )),
        }
    }
}

impl std::fmt::Display for EnsembleConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Ensemble used for the random side(s).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    TwoDesign,
    OneDesign,
    Haar,
}

impl DesignKind {
    pub fn name(self) -> &'static str {
        match self {
            DesignKind::TwoDesign => "two_design",
            DesignKind::OneDesign => "one_design",
            DesignKind::Haar => "haar",
        }
    }

    /// Whether the ensemble reproduces Haar second moments, at least approximately.
    pub fn is_two_design(self) -> bool {
        !matches!(self, DesignKind::OneDesign)
    }
}

impl std::str::FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_design" => Ok(DesignKind::TwoDesign),
            "one_design" => Ok(DesignKind::OneDesign),
            "haar" => Ok(DesignKind::Haar),
            other => Err(Error::config(
                "design_kind",
                format!("unknown value `{other}` (expected two_design, one_design or haar)"),
            )),
        }
    }
}

impl std::fmt::Display for DesignKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the optimized subsystem `A` sits in the register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Qubits `0..m`.
    Leading,
    /// Qubits `n - m..n`.
    Trailing,
}

impl Placement {
    /// Default placement per task. The QAE discard register is the last
    /// qubit, and a gate disjoint from it commutes with the QAE observable
    /// whenever `V2` is the identity, so QAE places `A` on the trailing qubits.
    pub fn default_for(task: Task) -> Self {
        match task {
            Task::Qae => Placement::Trailing,
            Task::Vqe | Task::Qsl => Placement::Leading,
        }
    }

    pub fn partition(self, n: usize, m: usize) -> Result<BipartitePartition> {
        match self {
            Placement::Leading => BipartitePartition::leading(n, m),
            Placement::Trailing => BipartitePartition::new(n, (n - m.min(n)..n).collect()),
        }
    }
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leading" => Ok(Placement::Leading),
            "trailing" => Ok(Placement::Trailing),
            other => Err(Error::config(
                "a_placement",
                format!("unknown value `{other}` (expected leading or trailing)"),
            )),
        }
    }
}

/// One scaling experiment. Serialized as a flat JSON object; unknown keys
/// are rejected and missing keys take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub task: Task,
    pub n_min: usize,
    /// Inclusive upper end of the qubit range.
    pub n_max: usize,
    pub n_step: usize,
    /// Size of the optimized subsystem.
    pub m: usize,
    /// Placement of the optimized subsystem; the task default when unset.
    pub a_placement: Option<Placement>,
    pub ensemble_config: EnsembleConfig,
    pub design_kind: DesignKind,
    /// Repeated layers per qubit for `two_design`.
    pub layers_multiplier: usize,
    /// Absolute layer count; overrides `layers_multiplier` when set.
    pub layers: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub optimizer: Method,
    pub grid_resolution: usize,
    pub adam_iterations: usize,
    pub adam_restarts: usize,
    pub adam_learning_rate: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            task: Task::Vqe,
            n_min: 2,
            n_max: 8,
            n_step: 1,
            m: 1,
            a_placement: None,
            ensemble_config: EnsembleConfig::Both,
            design_kind: DesignKind::TwoDesign,
            layers_multiplier: 10,
            layers: None,
            samples: 20,
            seed: 0,
            optimizer: Method::Exact,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            adam_iterations: adam.max_iterations,
            adam_restarts: adam.restarts,
            adam_learning_rate: adam.learning_rate,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, msg: String| Err(Error::config(field, msg));
        for (field, n) in [("n_min", self.n_min), ("n_max", self.n_max)] {
            if !(MIN_QUBITS..=MAX_QUBITS).contains(&n) {
                return fail(field, format!("{n} is outside [{MIN_QUBITS}, {MAX_QUBITS}]"));
            }
        }
        if self.n_min > self.n_max {
            return fail("n_max", format!("{} is below n_min = {}", self.n_max, self.n_min));
        }
        if self.n_step == 0 {
            return fail("n_step", "must be at least 1".into());
        }
        if self.m == 0 || self.m >= self.n_min {
            return fail(
                "m",
                format!("{} must lie in [1, n_min - 1 = {}]", self.m, self.n_min - 1),
            );
        }
        match self.optimizer {
            Method::Exact | Method::Grid if self.m != 1 => {
                return fail("optimizer", format!("`{}` supports m = 1 only", self.optimizer));
            }
            Method::Adam if self.m > 2 => return fail("m", "adam supports m <= 2".into()),
            _ => {}
        }
        if self.samples < 2 {
            return fail("samples", format!("{} is below the minimum of 2", self.samples));
        }
        if self.grid_resolution < 4 {
            return fail("grid_resolution", "must be at least 4".into());
        }
        self.adam().validate()
    }

    pub fn qubit_counts(&self) -> Vec<usize> {
        (self.n_min..=self.n_max).step_by(self.n_step).collect()
    }

    pub fn placement(&self) -> Placement {
        self.a_placement.unwrap_or_else(|| Placement::default_for(self.task))
    }

    pub fn partition(&self, n: usize) -> Result<BipartitePartition> {
        self.placement().partition(n, self.m)
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.adam_learning_rate,
            max_iterations: self.adam_iterations,
            restarts: self.adam_restarts,
            ..AdamConfig::default()
        }
    }

    /// Ensemble for a random side at `n` qubits.
    pub fn design(&self, n: usize) -> CircuitEnsemble {
        match self.design_kind {
            DesignKind::TwoDesign => {
                CircuitEnsemble::hardware_efficient_with_layers(n, self.layers.unwrap_or(self.layers_multiplier * n))
            }
            DesignKind::OneDesign => CircuitEnsemble::one_design_layer(n),
            DesignKind::Haar => CircuitEnsemble::haar(n),
        }
    }

    /// Whether the bound of the main theorem applies to this configuration.
    pub fn has_two_design_side(&self) -> bool {
        self.ensemble_config != EnsembleConfig::None && self.design_kind.is_two_design()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.samples, 20);
        assert_eq!(cfg.qubit_counts(), (2..=8).collect::<Vec<_>>());
    }

    #[test]
    fn parses_flat_json() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"task": "qsl", "n_min": 4, "n_max": 10, "n_step": 2, "design_kind": "one_design",
                "ensemble_config": "v2_design", "seed": 9}"#,
        )
        .unwrap();
        assert_eq!(cfg.task, Task::Qsl);
        assert_eq!(cfg.qubit_counts(), vec![4, 6, 8, 10]);
        assert_eq!(cfg.ensemble_config, EnsembleConfig::V2Design);
        assert!(!cfg.has_two_design_side());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let err = ExperimentConfig::from_json_str(r#"{"tsk": "vqe"}"#).unwrap_err();
        assert!(err.to_string().contains("tsk"), "{err}");
        let cases = [
            (r#"{"n_min": 1}"#, "n_min"),
            (r#"{"n_max": 13}"#, "n_max"),
            (r#"{"n_min": 6, "n_max": 4}"#, "n_max"),
            (r#"{"samples": 1}"#, "samples"),
            (r#"{"m": 2, "n_min": 3}"#, "optimizer"),
            (r#"{"m": 0}"#, "m"),
            (r#"{"n_step": 0}"#, "n_step"),
        ];
        for (json, field) in cases {
            match ExperimentConfig::from_json_str(json) {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field, "{json}"),
                other => panic!("{json}: {other:?}"),
            }
        }
    }

    #[test]
    fn placement_defaults_follow_the_task() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(cfg.partition(4).unwrap().a_sites(), &[0]);
        cfg.task = Task::Qae;
        assert_eq!(cfg.partition(4).unwrap().a_sites(), &[3]);
        cfg.a_placement = Some(Placement::Leading);
        assert_eq!(cfg.partition(4).unwrap().a_sites(), &[0]);
        cfg.a_placement = Some(Placement::Trailing);
        cfg.m = 2;
        cfg.optimizer = Method::Adam;
        cfg.n_min = 3;
        assert_eq!(cfg.partition(5).unwrap().a_sites(), &[3, 4]);
    }

    #[test]
    fn layer_override() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(cfg.design(4), CircuitEnsemble::hardware_efficient(4));
        cfg.layers = Some(5);
        assert_eq!(cfg.design(4), CircuitEnsemble::hardware_efficient_with_layers(4, 5));
    }
}
