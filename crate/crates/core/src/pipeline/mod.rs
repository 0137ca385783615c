//! End-to-end verification run: orbit enumeration of the six light rows,
//! refutation of every representative on the full instance (incrementally and
//! as one certified instance), the unbroken baseline and the 45-row witness.

mod artifacts;
mod config;
mod report;
mod stages;

use std::collections::BTreeMap;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

pub use artifacts::{sha256_file, sha256_hex, ArtifactStore};
pub use config::{Budgets, FaultInjection, Phase2Mode, RunConfig, Stages};
pub use report::{GroupOrders, IncrementalReport, Phase1Report, PipelineReport, RefutationReport, RunStatus, WitnessReport, SCHEMA_VERSION};
pub use stages::{
    assess_model, completion_of, drop_clauses, monolithic_instance, phase1, phase2_incremental, refute, verify_proof_file, witness45, Counterexample, Extension, Phase1Output, Refutation, SolveStatus,
};

use crate::encoder::{assemble, write_dimacs, Cnf, EncodeError, Encoding};
use crate::matrix::{load_fixture, validate_partial_plane, MatrixError, PartialMatrix, FIXTURE, KNOWN_ROWS};
use crate::proof::ProofParseError;
use crate::sat::{EnumerateError, SolveError, SolverConfig};
use crate::symmetry::{automorphisms, automorphisms_of_block, CompletionSpace, SymmetryError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Proof(#[from] ProofParseError),
    #[error("raw enumeration found {raw} completions, the orbits cover {orbit_union} ({only_raw} only raw, {only_orbits} only in orbits)")]
    CrossCheckMismatch { raw: usize, orbit_union: usize, only_raw: usize, only_orbits: usize },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl PipelineError {
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            PipelineError::Solve(SolveError::ResourceLimit { .. }) | PipelineError::Enumerate(EnumerateError::Solve(SolveError::ResourceLimit { .. }))
        )
    }
}

struct Runner {
    store: ArtifactStore,
    timings: BTreeMap<String, f64>,
    failures: Vec<String>,
    hit_limit: bool,
}

impl Runner {
    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T, PipelineError>) -> Result<T, PipelineError> {
        let t = Instant::now();
        let out = f(self);
        self.timings.insert(stage.to_string(), t.elapsed().as_secs_f64());
        out
    }

    fn write_cnf(&mut self, name: &str, cnf: &Cnf, comments: &[String]) -> Result<(), PipelineError> {
        let path = self.store.path(name);
        let f = self.store.create_file(name)?;
        let mut w = BufWriter::new(f);
        write_dimacs(cnf, comments, &mut w).and_then(|_| w.flush()).map_err(|source| PipelineError::Io { path, source })?;
        self.store.record(name)?;
        Ok(())
    }

    fn counterexample(&mut self, cnf: &Cnf, matrix: &PartialMatrix, model: &[bool], rep: Option<usize>, name: &str) -> Result<Counterexample, PipelineError> {
        let (filled, satisfies_instance, findings) = assess_model(cnf, matrix, model)?;
        self.store.write(name, filled.to_fixture_string().as_bytes())?;
        Ok(Counterexample { representative: rep, satisfies_instance, findings, matrix_file: name.to_string() })
    }

    fn certified(&mut self, label: &str, stem: &str, cnf: &Cnf, matrix: &PartialMatrix, blocking: usize, solver: &SolverConfig) -> Result<RefutationReport, PipelineError> {
        let instance_file = format!("{stem}.cnf");
        self.write_cnf(&instance_file, cnf, &[format!("{label} instance"), format!("blocking-clauses {blocking}")])?;
        let proof_file = format!("{stem}.drup");
        let out = refute(cnf, solver, &self.store.path(&proof_file))?;
        let proof_sha256 = self.store.record(&proof_file)?;
        let mut rep = RefutationReport {
            instance_file,
            clauses: cnf.len(),
            blocking_clauses: blocking,
            outcome: out.status,
            conflicts: out.stats.conflicts,
            proof_file: proof_file.clone(),
            proof_lines: out.proof_lines,
            proof_sha256,
            check: None,
            counterexample: None,
        };
        match out.status {
            SolveStatus::Unsat => {
                let check = verify_proof_file(cnf, &self.store.path(&proof_file))?;
                if !check.is_verified() {
                    self.failures.push(format!("{label}: proof rejected: {:?}", check.verdict));
                }
                rep.check = Some(check);
            }
            SolveStatus::Sat => {
                let model = out.model.expect("sat outcome carries a model");
                rep.counterexample = Some(self.counterexample(cnf, matrix, &model, None, &format!("{stem}-counterexample.txt"))?);
                self.failures.push(format!("{label}: instance is satisfiable"));
            }
            SolveStatus::ResourceLimit => self.hit_limit = true,
        }
        Ok(rep)
    }
}

fn encode(m: &PartialMatrix, cfg: &RunConfig, rows: usize) -> Result<Encoding, PipelineError> {
    Ok(assemble(m, &cfg.encode_options(rows))?)
}

/// Runs every enabled stage, writing artifacts under
/// `cfg.output_dir/run-<id>/`. Logical failures (counterexamples, rejected
/// proofs, an invalid witness) are recorded in the report; errors are
/// reserved for bad input, I/O and broken invariants.
pub fn run(cfg: &RunConfig) -> Result<PipelineReport, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let fixture = load_fixture(FIXTURE)?;
    let fixture_sha256 = fixture.content_hash();
    let store = ArtifactStore::create(&cfg.output_dir, &format!("{fixture_sha256}\n{}", cfg.fingerprint()))?;
    let mut r = Runner { store, timings: BTreeMap::new(), failures: Vec::new(), hit_limit: false };
    let solver = cfg.solver();

    let (enc27, main, main_cnf) = r.timed("encode", |r| {
        let enc27 = encode(&fixture, cfg, 27)?;
        let main = encode(&fixture, cfg, cfg.rows)?;
        let main_cnf = match &cfg.fault {
            Some(f) => drop_clauses(&main.cnf, &f.drop_clauses)?,
            None => main.cnf.clone(),
        };
        r.write_cnf("instance-27.cnf", &enc27.cnf, &enc27.dimacs_comments())?;
        if cfg.rows != 27 || cfg.fault.is_some() {
            let mut comments = main.dimacs_comments();
            if let Some(f) = &cfg.fault {
                comments.push(format!("fault-injected: {} clauses removed", f.drop_clauses.len()));
            }
            r.write_cnf(&format!("instance-{}.cnf", cfg.rows), &main_cnf, &comments)?;
        }
        Ok((enc27, main, main_cnf))
    })?;
    let mut encodings = vec![enc27.stats.clone()];
    if cfg.rows != 27 {
        encodings.push(main.stats.clone());
    }

    let (groups, stab) = if cfg.symmetry {
        let (orders, stab) = r.timed("symmetry", |_| {
            let block = enc27.matrix.restrict_rows(KNOWN_ROWS);
            let g = automorphisms(&block)?;
            let heavy = automorphisms_of_block(&block, 6, 15)?;
            let stab = g.stabilizer(1);
            Ok((GroupOrders { known_block: g.order(), heavy_block: heavy.order(), column1_stabilizer: stab.order() }, stab))
        })?;
        (Some(orders), Some(stab))
    } else {
        (None, None)
    };

    let space = CompletionSpace::new(&enc27.matrix);
    let p1 = if cfg.stages.phase1 {
        let out = r.timed("phase1", |_| phase1(&enc27, stab.as_ref(), cfg.cross_check, &solver))?;
        let json = serde_json::to_string(&out.records).expect("records serialize") + "\n";
        r.store.write("completions.json", json.as_bytes())?;
        Some(out)
    } else {
        None
    };
    let phase1_report = p1.as_ref().map(|out| {
        let mut hist = BTreeMap::new();
        for rec in &out.records {
            *hist.entry(rec.orbit_size).or_insert(0) += 1;
        }
        Phase1Report {
            representatives: out.records.len(),
            total_completions: out.total,
            orbit_size_histogram: hist,
            blocking_clauses: out.total - out.records.len(),
            injected_clauses: out.injected_clauses,
            conflicts: out.solver.conflicts,
            raw_enumeration: out.raw_count,
            completions_file: "completions.json".into(),
        }
    });

    let mut incremental = None;
    let mut monolithic = None;
    if let (true, Some(p1)) = (cfg.stages.phase2, &p1) {
        let reps = p1.representatives();
        if cfg.phase2_mode.incremental() {
            incremental = Some(r.timed("phase2_incremental", |r| {
                let per_solve = cfg.solver_with(cfg.budgets.conflicts_per_solve, None);
                let results = phase2_incremental(&main_cnf, &reps, cfg.jobs, &per_solve)?;
                let mut rep = IncrementalReport {
                    representatives: reps.len(),
                    unsat: 0,
                    sat: 0,
                    resource_limit: 0,
                    suspicious_empty: reps.is_empty(),
                    outcomes: Vec::with_capacity(results.len()),
                    counterexamples: Vec::new(),
                };
                for (i, res) in results.iter().enumerate() {
                    let status = match res {
                        Extension::Unsat => {
                            rep.unsat += 1;
                            SolveStatus::Unsat
                        }
                        Extension::ResourceLimit => {
                            rep.resource_limit += 1;
                            SolveStatus::ResourceLimit
                        }
                        Extension::Sat(model) => {
                            rep.sat += 1;
                            let name = format!("counterexample-rep{i}.txt");
                            rep.counterexamples.push(r.counterexample(&main_cnf, &main.matrix, model, Some(i), &name)?);
                            SolveStatus::Sat
                        }
                    };
                    rep.outcomes.push(status);
                }
                if rep.sat > 0 {
                    r.failures.push(format!("phase 2 incremental: {} representatives extend to {} rows", rep.sat, cfg.rows));
                }
                if rep.resource_limit > 0 {
                    r.hit_limit = true;
                }
                Ok(rep)
            })?);
        }
        if cfg.phase2_mode.monolithic() {
            monolithic = Some(r.timed("phase2_monolithic", |r| {
                let (cnf, blocking) = match &stab {
                    Some(g) => monolithic_instance(&main_cnf, &space, g, &p1.records)?,
                    None => (main_cnf.clone(), 0),
                };
                let expected = p1.total - p1.records.len();
                if blocking != expected {
                    r.failures.push(format!("phase 2 monolithic: {blocking} blocking clauses, expected {expected}"));
                }
                let solver = cfg.solver_with(None, cfg.budgets.monolithic_seconds);
                r.certified("phase 2 monolithic", &format!("monolithic-{}", cfg.rows), &cnf, &main.matrix, blocking, &solver)
            })?);
        }
    }

    let baseline = if cfg.stages.baseline {
        Some(r.timed("baseline", |r| {
            let solver = cfg.solver_with(None, cfg.budgets.baseline_seconds);
            r.certified("baseline", &format!("baseline-{}", cfg.rows), &main_cnf, &main.matrix, 0, &solver)
        })?)
    } else {
        None
    };

    let witness = if cfg.stages.witness45 {
        let enc45 = encode(&fixture, cfg, 45)?;
        if cfg.rows != 45 {
            encodings.push(enc45.stats.clone());
        }
        Some(r.timed("witness45", |r| {
            let (outcome, filled) = witness45(&enc45, &cfg.solver_with(cfg.budgets.conflicts_per_solve, None))?;
            let mut rep = WitnessReport { outcome, witness_file: None, findings: Vec::new(), valid: false, canonical_completion: None, representative_index: None };
            match filled {
                Some(m) => {
                    r.store.write("witness-45.txt", m.to_fixture_string().as_bytes())?;
                    rep.witness_file = Some("witness-45.txt".into());
                    rep.findings = validate_partial_plane(&m).findings;
                    rep.valid = rep.findings.is_empty();
                    if !rep.valid {
                        r.failures.push(format!("witness: {} structural findings", rep.findings.len()));
                    }
                    let c = completion_of(&space, &m);
                    let canonical = match &stab {
                        Some(g) => space.canonical(g, &c)?,
                        None => c,
                    };
                    if let Some(p1) = &p1 {
                        rep.representative_index = p1.records.binary_search_by(|rec| rec.representative.cmp(&canonical)).ok();
                        if rep.representative_index.is_none() {
                            r.failures.push("witness: completion is not among the phase-1 representatives".into());
                        }
                    }
                    rep.canonical_completion = Some(canonical);
                }
                None if outcome == SolveStatus::ResourceLimit => r.hit_limit = true,
                None => r.failures.push("witness: the 45-row instance is unsatisfiable".into()),
            }
            Ok(rep)
        })?)
    } else {
        None
    };

    r.timings.insert("total".into(), started.elapsed().as_secs_f64());
    r.store.finish()?;
    let status = if !r.failures.is_empty() {
        RunStatus::Failed
    } else if r.hit_limit {
        RunStatus::ResourceLimit
    } else {
        RunStatus::Success
    };
    let report = PipelineReport {
        schema_version: SCHEMA_VERSION,
        generator: format!("pp10 {}", env!("CARGO_PKG_VERSION")),
        run_id: r.store.id().to_string(),
        fixture_sha256,
        config: cfg.clone(),
        encodings,
        groups,
        phase1: phase1_report,
        phase2_incremental: incremental,
        phase2_monolithic: monolithic,
        baseline,
        witness45: witness,
        status,
        failures: r.failures,
        artifacts: r.store.hashes().clone(),
        timings: r.timings,
    };
    let path = r.store.path("report.json");
    std::fs::write(&path, report.to_json()).map_err(|source| PipelineError::Io { path, source })?;
    Ok(report)
}

/// Directory holding the artifacts of `report`.
pub fn run_dir(cfg: &RunConfig, report: &PipelineReport) -> PathBuf {
    cfg.output_dir.join(format!("run-{}", report.run_id))
}
