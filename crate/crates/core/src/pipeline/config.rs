use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::encoder::{EncodeOptions, EncodingVariant};
use crate::sat::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase2Mode {
    Incremental,
    Monolithic,
    Both,
}

impl Phase2Mode {
    pub fn incremental(self) -> bool {
        matches!(self, Phase2Mode::Incremental | Phase2Mode::Both)
    }

    pub fn monolithic(self) -> bool {
        matches!(self, Phase2Mode::Monolithic | Phase2Mode::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stages {
    pub phase1: bool,
    pub phase2: bool,
    pub baseline: bool,
    pub witness45: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Stages { phase1: true, phase2: true, baseline: false, witness45: true }
    }
}

/// Limits; `None` means unlimited.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Per solve call in phase 2 incremental and the witness run.
    pub conflicts_per_solve: Option<u64>,
    pub monolithic_seconds: Option<u64>,
    pub baseline_seconds: Option<u64>,
}

/// Deliberate corruption of the refutation instance, for testing that
/// phase 2 surfaces counterexamples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultInjection {
    /// At-most-one clauses to remove, each given by its literals in DIMACS
    /// numbering (order irrelevant).
    pub drop_clauses: Vec<Vec<i32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Height of the refutation instance used by phase 2 and the baseline.
    pub rows: usize,
    pub variant: EncodingVariant,
    pub propagate_zeros: bool,
    /// When off, phase 1 keeps every completion as its own representative.
    pub symmetry: bool,
    pub phase2_mode: Phase2Mode,
    /// Worker threads for phase 2 incremental.
    pub jobs: usize,
    pub seed: u64,
    /// Re-enumerate without symmetry and compare against the orbits.
    pub cross_check: bool,
    pub stages: Stages,
    pub budgets: Budgets,
    pub output_dir: PathBuf,
    pub fault: Option<FaultInjection>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rows: 51,
            variant: EncodingVariant::default(),
            propagate_zeros: true,
            symmetry: true,
            phase2_mode: Phase2Mode::Both,
            jobs: 1,
            seed: 0,
            cross_check: true,
            stages: Stages::default(),
            budgets: Budgets::default(),
            output_dir: PathBuf::from("pp10-out"),
            fault: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<RunConfig, PipelineError> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if ![27, 45, 51].contains(&self.rows) {
            return bad(format!("rows must be 27, 45 or 51, not {}", self.rows));
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        if self.stages.phase2 && !self.stages.phase1 {
            return bad("phase 2 needs phase 1".into());
        }
        if let Some(f) = &self.fault {
            if f.drop_clauses.iter().any(|c| c.is_empty() || c.contains(&0)) {
                return bad("fault clauses must be non-empty and free of 0".into());
            }
        }
        if self.output_dir.as_os_str().is_empty() {
            return bad("output_dir is empty".into());
        }
        Ok(())
    }

    pub fn encode_options(&self, rows: usize) -> EncodeOptions {
        EncodeOptions { variant: self.variant, max_row: rows, propagate_zeros: self.propagate_zeros }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig { seed: self.seed, ..SolverConfig::default() }
    }

    pub(crate) fn solver_with(&self, conflicts: Option<u64>, seconds: Option<u64>) -> SolverConfig {
        SolverConfig { conflict_budget: conflicts, time_budget: seconds.map(Duration::from_secs), ..self.solver() }
    }

    /// Settings that determine the results; the output location does not.
    pub(crate) fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        serde_json::to_string(&c).expect("config serializes")
    }
}
