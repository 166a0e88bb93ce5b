//! Experiment configuration files.
//!
//! The grammar is TOML with four sections; see `docs/config.md` for the
//! full reference. Grids are always arrays, so a single value is written as
//! a one-element list.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Tpca,
    Atpca,
    Ngca,
    Cca,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Tpca => "tpca",
            Self::Atpca => "atpca",
            Self::Ngca => "ngca",
            Self::Cca => "cca",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Power,
    PartialTrace,
    Matricization,
    NgcaSpectral,
    CcaMatricization,
    BruteNgca,
    BruteCca,
    QuantizedPower,
    QuantizedPartialTrace,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Power => "power",
            Self::PartialTrace => "partial_trace",
            Self::Matricization => "matricization",
            Self::NgcaSpectral => "ngca_spectral",
            Self::CcaMatricization => "cca_matricization",
            Self::BruteNgca => "brute_ngca",
            Self::BruteCca => "brute_cca",
            Self::QuantizedPower => "quantized_power",
            Self::QuantizedPartialTrace => "quantized_partial_trace",
        }
    }

    /// Whether the estimator runs inside the memory-bounded harness.
    pub fn is_quantized(self) -> bool {
        matches!(self, Self::QuantizedPower | Self::QuantizedPartialTrace)
    }

    fn accepts(self, problem: ProblemKind) -> bool {
        use ProblemKind::*;
        match self {
            Self::Power | Self::PartialTrace | Self::QuantizedPower | Self::QuantizedPartialTrace => problem == Tpca,
            Self::Matricization => matches!(problem, Tpca | Atpca),
            Self::NgcaSpectral | Self::BruteNgca => problem == Ngca,
            Self::CcaMatricization | Self::BruteCca => problem == Cca,
        }
    }

    fn needs_even_order(self) -> bool {
        matches!(
            self,
            Self::PartialTrace | Self::Matricization | Self::NgcaSpectral | Self::CcaMatricization | Self::QuantizedPartialTrace
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureChoice {
    #[default]
    Mog,
    BoundedLlr,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub problem: ProblemKind,
    pub k: usize,
    pub d: Vec<usize>,
    #[serde(rename = "lambda")]
    pub snr: Vec<f64>,
    pub samples: Vec<usize>,
    pub seeds: Vec<u64>,
    pub estimator: EstimatorKind,
    #[serde(default)]
    pub measure: MeasureChoice,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub init_seed: u64,
    pub delta: Option<f64>,
    pub truncation: Option<f64>,
}

fn default_bits() -> Vec<u32> {
    vec![32]
}

fn default_range() -> f64 {
    64.0
}

fn default_passes() -> Vec<usize> {
    vec![10]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessSection {
    #[serde(default = "default_bits")]
    pub bits: Vec<u32>,
    #[serde(default = "default_range")]
    pub range: f64,
    #[serde(default = "default_passes")]
    pub passes: Vec<usize>,
}

impl Default for HarnessSection {
    fn default() -> Self {
        Self { bits: default_bits(), range: default_range(), passes: default_passes() }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributedSection {
    pub per_machine: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    pub harness: Option<HarnessSection>,
    pub distributed: Option<DistributedSection>,
    #[serde(default)]
    pub output: OutputSection,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Harness settings, with defaults filled in for quantized estimators.
    pub fn harness_or_default(&self) -> HarnessSection {
        self.harness.clone().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        for (name, empty) in [
            ("d", e.d.is_empty()),
            ("lambda", e.snr.is_empty()),
            ("samples", e.samples.is_empty()),
            ("seeds", e.seeds.is_empty()),
        ] {
            if empty {
                return Err(invalid(format!("experiment.{name} must list at least one value")));
            }
        }
        let mut seen = HashSet::new();
        if let Some(dup) = e.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(invalid(format!("seed {dup} appears twice")));
        }
        if e.d.contains(&0) || e.samples.contains(&0) {
            return Err(invalid("dimensions and sample sizes must be positive"));
        }
        if e.snr.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(invalid("lambda values must be finite and nonnegative"));
        }
        if !e.estimator.accepts(e.problem) {
            return Err(invalid(format!(
                "estimator {} does not apply to problem {}",
                e.estimator.name(),
                e.problem.name()
            )));
        }
        if e.estimator.needs_even_order() && e.k % 2 != 0 {
            return Err(invalid(format!("estimator {} needs even k", e.estimator.name())));
        }
        if let Some(t) = self.estimator.tol {
            if !(t > 0.0) {
                return Err(invalid("estimator.tol must be positive"));
            }
        }
        if self.estimator.max_iters == Some(0) {
            return Err(invalid("estimator.max_iters must be at least 1"));
        }
        if let Some(h) = &self.harness {
            if h.bits.is_empty() || h.passes.is_empty() {
                return Err(invalid("harness.bits and harness.passes must be non-empty"));
            }
            if h.bits.iter().any(|b| !(1..=63).contains(b)) || h.passes.contains(&0) {
                return Err(invalid("harness.bits must lie in 1..=63 and passes must be positive"));
            }
        }
        if let Some(dist) = self.distributed {
            if !e.estimator.is_quantized() {
                return Err(invalid("[distributed] needs a quantized estimator"));
            }
            if dist.per_machine == 0 || e.samples.iter().any(|n| n % dist.per_machine != 0) {
                return Err(invalid("distributed.per_machine must divide every sample size"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[experiment]
problem = "tpca"
k = 2
d = [4]
lambda = [1.0]
samples = [10]
seeds = [1, 2, 3]
estimator = "power"
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(cfg.experiment.seeds, vec![1, 2, 3]);
        assert!(cfg.harness.is_none());
    }

    #[test]
    fn empty_seed_list_is_rejected() {
        let text = BASE.replace("seeds = [1, 2, 3]", "seeds = []");
        assert!(matches!(ExperimentConfig::parse(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn duplicate_seeds_are_rejected() {
        let text = BASE.replace("seeds = [1, 2, 3]", "seeds = [1, 1]");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn unknown_keys_and_mismatched_estimators_are_rejected() {
        assert!(ExperimentConfig::parse(&format!("{BASE}\nbogus = 1\n")).is_err());
        let text = BASE.replace("\"power\"", "\"ngca_spectral\"");
        assert!(ExperimentConfig::parse(&text).is_err());
        let dist = format!("{BASE}\n[distributed]\nper_machine = 5\n");
        assert!(ExperimentConfig::parse(&dist).is_err());
    }
}
