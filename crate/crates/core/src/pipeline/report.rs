use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stages::{Counterexample, SolveStatus};
use super::RunConfig;
use crate::encoder::EncodingStats;
use crate::matrix::Finding;
use crate::proof::CheckReport;
use crate::symmetry::Completion;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Success,
    Failed,
    ResourceLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupOrders {
    /// Automorphisms of the known 21x75 block.
    pub known_block: usize,
    /// Automorphisms of the 6x15 heavy-row block.
    pub heavy_block: usize,
    pub column1_stabilizer: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase1Report {
    pub representatives: usize,
    pub total_completions: usize,
    pub orbit_size_histogram: BTreeMap<usize, usize>,
    /// Completions other than the representatives; these become blocking
    /// clauses of the monolithic instance.
    pub blocking_clauses: usize,
    pub injected_clauses: usize,
    pub conflicts: u64,
    pub raw_enumeration: Option<usize>,
    pub completions_file: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncrementalReport {
    pub representatives: usize,
    pub unsat: usize,
    pub sat: usize,
    pub resource_limit: usize,
    /// No representatives at all: vacuously successful but suspicious.
    pub suspicious_empty: bool,
    /// One entry per representative, in representative order.
    pub outcomes: Vec<SolveStatus>,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefutationReport {
    pub instance_file: String,
    pub clauses: usize,
    pub blocking_clauses: usize,
    pub outcome: SolveStatus,
    pub conflicts: u64,
    pub proof_file: String,
    pub proof_lines: u64,
    pub proof_sha256: String,
    pub check: Option<CheckReport>,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub outcome: SolveStatus,
    pub witness_file: Option<String>,
    pub findings: Vec<Finding>,
    pub valid: bool,
    /// Canonical form of the witness's rows 22-27 completion.
    pub canonical_completion: Option<Completion>,
    /// Position of that canonical form among the phase-1 representatives.
    pub representative_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub generator: String,
    pub run_id: String,
    pub fixture_sha256: String,
    pub config: RunConfig,
    pub encodings: Vec<EncodingStats>,
    pub groups: Option<GroupOrders>,
    pub phase1: Option<Phase1Report>,
    pub phase2_incremental: Option<IncrementalReport>,
    pub phase2_monolithic: Option<RefutationReport>,
    pub baseline: Option<RefutationReport>,
    pub witness45: Option<WitnessReport>,
    pub status: RunStatus,
    pub failures: Vec<String>,
    /// Artifact name -> SHA-256, excluding the report itself.
    pub artifacts: BTreeMap<String, String>,
    /// Wall-clock seconds per stage; the only run-dependent field.
    pub timings: BTreeMap<String, f64>,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// The report with timings cleared, for reproducibility comparisons.
    pub fn without_timings(&self) -> PipelineReport {
        PipelineReport { timings: BTreeMap::new(), ..self.clone() }
    }
}
