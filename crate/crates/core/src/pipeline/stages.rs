//! The individual stages, usable on their own or through [`super::run`].

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::encoder::{Clause, Cnf, Encoding, Provenance};
use crate::lit::{Lit, Var};
use crate::matrix::{validate_partial_plane, Finding, PartialMatrix};
use crate::proof::{check_drup_reader, CheckReport};
use crate::sat::{enumerate, Control, DrupWriter, EnumerationHook, SelfBlocking, SolveError, SolveOutcome, Solver, SolverConfig, SolverStats};
use crate::symmetry::{Completion, CompletionSpace, OrbitRecord, SymmetryError, SymmetryGroup};

/// Blocks the whole stabilizer orbit of every completion it is shown.
struct OrbitBlocking<'a> {
    space: &'a CompletionSpace,
    group: &'a SymmetryGroup,
    vars: Vec<Var>,
    records: Vec<OrbitRecord>,
    error: Option<SymmetryError>,
}

impl EnumerationHook for OrbitBlocking<'_> {
    fn projection(&self) -> &[Var] {
        &self.vars
    }

    fn on_model(&mut self, projected: &[Lit]) -> (Vec<Vec<Lit>>, Control) {
        let c = self.space.from_true_vars(projected.iter().filter(|l| l.is_positive()).map(|l| l.var()));
        let own = vec![c.blocking_clause().into_lits()];
        let rec = match self.space.validate(&c).and_then(|_| self.space.orbit(self.group, &c, true)) {
            Ok(rec) => rec,
            Err(e) => {
                self.error = Some(e);
                return (own, Control::Stop);
            }
        };
        let clauses = rec.members.iter().flatten().map(|m| m.blocking_clause().into_lits()).collect();
        self.records.push(OrbitRecord { members: None, ..rec });
        (clauses, Control::Continue)
    }
}

#[derive(Debug, Clone)]
pub struct Phase1Output {
    /// One record per orbit, sorted by representative.
    pub records: Vec<OrbitRecord>,
    pub total: usize,
    /// Clauses the callback injected (one per orbit member).
    pub injected_clauses: usize,
    pub solver: SolverStats,
    /// Completions found by the independent enumeration without symmetry.
    pub raw_count: Option<usize>,
}

impl Phase1Output {
    pub fn representatives(&self) -> Vec<Completion> {
        self.records.iter().map(|r| r.representative.clone()).collect()
    }
}

fn raw_completions(enc: &Encoding, space: &CompletionSpace, solver: &SolverConfig) -> Result<BTreeSet<Completion>, PipelineError> {
    let mut s = Solver::from_cnf(&enc.cnf, solver.clone());
    let out = enumerate(&mut s, &mut SelfBlocking::new(space.unknown_vars()), &[])?;
    let mut set = BTreeSet::new();
    for m in &out.models {
        let c = space.from_true_vars(m.iter().filter(|l| l.is_positive()).map(|l| l.var()));
        space.validate(&c)?;
        set.insert(c);
    }
    if set.len() != out.models.len() {
        return Err(PipelineError::Invariant(format!("{} models but {} distinct completions", out.models.len(), set.len())));
    }
    Ok(set)
}

/// Enumerates the completions of rows 22-27 on the 27-row instance. With a
/// group, each model's whole orbit is blocked and one record per orbit is
/// kept; `cross_check` then re-enumerates without symmetry and requires the
/// result to equal the union of the orbits. Without a group every completion
/// is its own representative.
pub fn phase1(enc: &Encoding, group: Option<&SymmetryGroup>, cross_check: bool, solver: &SolverConfig) -> Result<Phase1Output, PipelineError> {
    let space = CompletionSpace::new(&enc.matrix);
    let Some(group) = group else {
        let raw = raw_completions(enc, &space, solver)?;
        let records: Vec<OrbitRecord> = raw
            .into_iter()
            .map(|c| OrbitRecord { representative: c, orbit_size: 1, stabilizer_order: 1, members: None })
            .collect();
        let n = records.len();
        return Ok(Phase1Output { records, total: n, injected_clauses: n, solver: SolverStats::default(), raw_count: Some(n) });
    };

    let mut s = Solver::from_cnf(&enc.cnf, solver.clone());
    let mut hook = OrbitBlocking { space: &space, group, vars: space.unknown_vars(), records: Vec::new(), error: None };
    let summary = enumerate(&mut s, &mut hook, &[])?;
    if let Some(e) = hook.error {
        return Err(e.into());
    }
    let mut records = hook.records;
    records.sort_by(|a, b| a.representative.cmp(&b.representative));
    if records.windows(2).any(|w| w[0].representative == w[1].representative) {
        return Err(PipelineError::Invariant("an orbit was found twice".into()));
    }
    let total = records.iter().map(|r| r.orbit_size).sum();

    let raw_count = if cross_check {
        let raw = raw_completions(enc, &space, solver)?;
        let mut union = BTreeSet::new();
        for r in &records {
            union.extend(space.orbit(group, &r.representative, true)?.members.into_iter().flatten());
        }
        if raw != union {
            return Err(PipelineError::CrossCheckMismatch {
                raw: raw.len(),
                orbit_union: union.len(),
                only_raw: raw.difference(&union).count(),
                only_orbits: union.difference(&raw).count(),
            });
        }
        Some(raw.len())
    } else {
        None
    };

    Ok(Phase1Output { records, total, injected_clauses: summary.injected_clauses, solver: s.stats().clone(), raw_count })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extension {
    Unsat,
    /// A model of the refutation instance extending the representative.
    Sat(Vec<bool>),
    ResourceLimit,
}

fn extend_one(s: &mut Solver, c: &Completion) -> Result<Extension, PipelineError> {
    match s.solve(&c.literals()) {
        Ok(SolveOutcome::Sat(m)) => Ok(Extension::Sat(m)),
        Ok(SolveOutcome::Unsat | SolveOutcome::UnsatUnderAssumptions(_)) => Ok(Extension::Unsat),
        Err(SolveError::ResourceLimit { .. }) => Ok(Extension::ResourceLimit),
        Err(e) => Err(e.into()),
    }
}

/// Solves `cnf` under the positive literals of each representative. Work is
/// split into `jobs` contiguous chunks, each with its own incremental solver,
/// and the results are returned in input order.
pub fn phase2_incremental(cnf: &Cnf, reps: &[Completion], jobs: usize, solver: &SolverConfig) -> Result<Vec<Extension>, PipelineError> {
    if reps.is_empty() {
        return Ok(Vec::new());
    }
    let chunk = reps.len().div_ceil(jobs.max(1));
    let results: Vec<Result<Vec<Extension>, PipelineError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = reps
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    let mut s = Solver::from_cnf(cnf, solver.clone());
                    part.iter().map(|c| extend_one(&mut s, c)).collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("phase 2 worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(reps.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// The refutation instance plus one blocking clause for every orbit member
/// other than the representatives.
pub fn monolithic_instance(base: &Cnf, space: &CompletionSpace, group: &SymmetryGroup, records: &[OrbitRecord]) -> Result<(Cnf, usize), PipelineError> {
    let mut cnf = base.clone();
    let mut added = 0;
    for r in records {
        let rec = space.orbit(group, &r.representative, true)?;
        for m in rec.members.iter().flatten().filter(|m| **m != r.representative) {
            if cnf.push(m.blocking_clause(), Provenance::Blocking) {
                added += 1;
            }
        }
    }
    Ok((cnf, added))
}

/// Removes the given clauses; every one must be present.
pub fn drop_clauses(cnf: &Cnf, drop: &[Vec<i32>]) -> Result<Cnf, PipelineError> {
    let targets: Vec<Clause> = drop
        .iter()
        .map(|c| Clause::new(c.iter().map(|&l| Lit::from_dimacs(l)).collect()).ok_or_else(|| PipelineError::Config(format!("fault clause {c:?} is a tautology"))))
        .collect::<Result<_, _>>()?;
    let mut out = Cnf::new(cnf.num_vars());
    let mut hit = vec![false; targets.len()];
    for (c, p) in cnf.iter() {
        match targets.iter().position(|t| t == c) {
            Some(i) => hit[i] = true,
            None => {
                out.push(c.clone(), p);
            }
        }
    }
    if let Some(i) = hit.iter().position(|h| !h) {
        return Err(PipelineError::Config(format!("fault clause {:?} is not in the instance", drop[i])));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Sat,
    Unsat,
    ResourceLimit,
}

#[derive(Debug, Clone)]
pub struct Refutation {
    pub status: SolveStatus,
    pub model: Option<Vec<bool>>,
    pub stats: SolverStats,
    /// DRUP lines written.
    pub proof_lines: u64,
}

/// Solves `cnf` from scratch, streaming a DRUP proof to `proof_path`.
pub fn refute(cnf: &Cnf, solver: &SolverConfig, proof_path: &Path) -> Result<Refutation, PipelineError> {
    let file = File::create(proof_path).map_err(|source| PipelineError::Io { path: proof_path.to_path_buf(), source })?;
    let counter = LineCounter::default();
    let mut s = Solver::new(solver.clone());
    s.attach_proof(Box::new(CountingSink { inner: DrupWriter::new(file), counter: counter.clone() }));
    s.reserve_vars(cnf.num_vars());
    for c in cnf.clauses() {
        s.add_clause(c.lits());
    }
    let (status, model) = match s.solve(&[]) {
        Ok(SolveOutcome::Sat(m)) => (SolveStatus::Sat, Some(m)),
        Ok(_) => (SolveStatus::Unsat, None),
        Err(SolveError::ResourceLimit { .. }) => (SolveStatus::ResourceLimit, None),
        Err(e) => return Err(e.into()),
    };
    drop(s.detach_proof());
    Ok(Refutation { status, model, stats: s.stats().clone(), proof_lines: counter.get() })
}

#[derive(Clone, Default)]
struct LineCounter(std::sync::Arc<std::sync::atomic::AtomicU64>);

impl LineCounter {
    fn bump(&self) {
        self.0.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    }
    fn get(&self) -> u64 {
        self.0.load(std::sync::atomic::Ordering::Relaxed)
    }
}

struct CountingSink<W: std::io::Write + Send> {
    inner: DrupWriter<W>,
    counter: LineCounter,
}

impl<W: std::io::Write + Send> crate::sat::ProofSink for CountingSink<W> {
    fn add(&mut self, lits: &[Lit]) {
        self.counter.bump();
        self.inner.add(lits);
    }
    fn delete(&mut self, lits: &[Lit]) {
        self.counter.bump();
        self.inner.delete(lits);
    }
    fn finish(&mut self) -> std::io::Result<()> {
        self.inner.finish()
    }
}

/// Checks a DRUP file against `cnf` while streaming it.
pub fn verify_proof_file(cnf: &Cnf, path: &Path) -> Result<CheckReport, PipelineError> {
    let f = File::open(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
    Ok(check_drup_reader(cnf, BufReader::with_capacity(1 << 20, f))?)
}

/// A model of a refutation instance, re-checked independently of the solver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Index of the representative it extends, when found in phase 2 incremental.
    pub representative: Option<usize>,
    pub satisfies_instance: bool,
    /// Structural problems of the filled matrix (expected when the instance
    /// was deliberately corrupted).
    pub findings: Vec<Finding>,
    pub matrix_file: String,
}

/// Fills `matrix` from `model` and validates it.
pub fn assess_model(cnf: &Cnf, matrix: &PartialMatrix, model: &[bool]) -> Result<(PartialMatrix, bool, Vec<Finding>), PipelineError> {
    let filled = matrix.apply_model(|v| model.get(v.index()).copied())?;
    let findings = validate_partial_plane(&filled).findings;
    Ok((filled, cnf.is_satisfied_by(model), findings))
}

/// Solves the 45-row instance; `None` if it is unsatisfiable or the budget ran out.
pub fn witness45(enc: &Encoding, solver: &SolverConfig) -> Result<(SolveStatus, Option<PartialMatrix>), PipelineError> {
    let mut s = Solver::from_cnf(&enc.cnf, solver.clone());
    match s.solve(&[]) {
        Ok(SolveOutcome::Sat(m)) => Ok((SolveStatus::Sat, Some(enc.matrix.apply_model(|v| m.get(v.index()).copied())?))),
        Ok(_) => Ok((SolveStatus::Unsat, None)),
        Err(SolveError::ResourceLimit { .. }) => Ok((SolveStatus::ResourceLimit, None)),
        Err(e) => Err(e.into()),
    }
}

/// The rows 22-27 completion contained in a filled matrix.
pub fn completion_of(space: &CompletionSpace, filled: &PartialMatrix) -> Completion {
    let open = space.unknown_vars();
    space.from_true_vars(open.into_iter().filter(|v| {
        let (r, c) = v.to_cell();
        filled.is_one(r, c)
    }))
}
