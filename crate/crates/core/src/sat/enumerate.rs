//! All-solutions search driven by a model callback.
//!
//! After each model the callback supplies clauses excluding it (and possibly
//! more); they are added to the solver and search restarts from the top. The
//! restart keeps the loop trivially sound at the cost of some repeated work.

use thiserror::Error;

use super::config::SolverConfig;
use super::solver::{SolveError, SolveOutcome, Solver};
use crate::encoder::Cnf;
use crate::lit::{Lit, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

pub trait EnumerationHook {
    fn projection(&self) -> &[Var];

    /// Receives the model restricted to the projection (one literal per
    /// projection variable, in order) and returns clauses to add. At least
    /// one must be falsified by the current model so that it is excluded;
    /// the others may prune models not yet seen (for example symmetric ones).
    fn on_model(&mut self, projected: &[Lit]) -> (Vec<Vec<Lit>>, Control);
}

#[derive(Debug, Error)]
pub enum EnumerateError {
    #[error("callback returned no clauses for model {model}")]
    NoClauses { model: usize },
    #[error("no callback clause is falsified by model {model}")]
    CallbackContract { model: usize },
    #[error("projection variable {0} is outside the formula")]
    BadProjection(u32),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnumerationSummary {
    /// Projected models in discovery order.
    pub models: Vec<Vec<Lit>>,
    pub injected_clauses: usize,
    /// True when the search space was exhausted (rather than stopped early).
    pub exhausted: bool,
}

/// Blocks exactly the projected model each time.
pub struct SelfBlocking {
    vars: Vec<Var>,
}

impl SelfBlocking {
    pub fn new(vars: Vec<Var>) -> Self {
        SelfBlocking { vars }
    }
}

impl EnumerationHook for SelfBlocking {
    fn projection(&self) -> &[Var] {
        &self.vars
    }

    fn on_model(&mut self, projected: &[Lit]) -> (Vec<Vec<Lit>>, Control) {
        (vec![projected.iter().map(|&l| !l).collect()], Control::Continue)
    }
}

pub fn enumerate(solver: &mut Solver, hook: &mut dyn EnumerationHook, assumptions: &[Lit]) -> Result<EnumerationSummary, EnumerateError> {
    if let Some(v) = hook.projection().iter().find(|v| v.index() >= solver.num_vars()) {
        return Err(EnumerateError::BadProjection(v.to_dimacs()));
    }
    let mut summary = EnumerationSummary::default();
    loop {
        let model = match solver.solve(assumptions)? {
            SolveOutcome::Sat(m) => m,
            SolveOutcome::Unsat | SolveOutcome::UnsatUnderAssumptions(_) => {
                summary.exhausted = true;
                return Ok(summary);
            }
        };
        let projected: Vec<Lit> = hook.projection().iter().map(|v| v.lit(model[v.index()])).collect();
        let (clauses, control) = hook.on_model(&projected);
        let index = summary.models.len();
        if clauses.is_empty() {
            return Err(EnumerateError::NoClauses { model: index });
        }
        let falsified = |c: &Vec<Lit>| c.iter().all(|l| l.var().index() < model.len() && model[l.var().index()] != l.is_positive());
        if !clauses.iter().any(falsified) {
            return Err(EnumerateError::CallbackContract { model: index });
        }
        summary.models.push(projected);
        for c in &clauses {
            solver.add_injected_clause(c);
        }
        summary.injected_clauses += clauses.len();
        if control == Control::Stop {
            return Ok(summary);
        }
    }
}

/// Every model of `cnf` projected onto `vars`.
pub fn enumerate_projected(cnf: &Cnf, vars: &[Var], config: SolverConfig) -> Result<Vec<Vec<Lit>>, EnumerateError> {
    let mut solver = Solver::from_cnf(cnf, config);
    solver.reserve_vars(cnf.num_vars());
    let mut hook = SelfBlocking::new(vars.to_vec());
    Ok(enumerate(&mut solver, &mut hook, &[])?.models)
}
