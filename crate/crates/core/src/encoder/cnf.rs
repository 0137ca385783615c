use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::lit::{Lit, Var};

/// A sorted, duplicate-free, non-tautological disjunction of literals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause(Vec<Lit>);

impl Clause {
    /// Normalizes `lits`; returns `None` for a tautology.
    pub fn new(mut lits: Vec<Lit>) -> Option<Clause> {
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return None;
        }
        Some(Clause(lits))
    }

    pub fn unit(lit: Lit) -> Clause {
        Clause(vec![lit])
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_lits(self) -> Vec<Lit> {
        self.0
    }

    /// True if some literal is satisfied by `value`.
    pub fn is_satisfied_by(&self, value: impl Fn(Var) -> bool) -> bool {
        self.0.iter().any(|l| value(l.var()) == l.is_positive())
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Which clause family a clause came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Unit,
    AtMostOne,
    RowAtLeastOne,
    ColAtLeastOne,
    Blocking,
    /// Read from a file without provenance information.
    Input,
}

impl Provenance {
    pub const ALL: [Provenance; 6] = [
        Provenance::Unit,
        Provenance::AtMostOne,
        Provenance::RowAtLeastOne,
        Provenance::ColAtLeastOne,
        Provenance::Blocking,
        Provenance::Input,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Provenance::Unit => "unit",
            Provenance::AtMostOne => "amo",
            Provenance::RowAtLeastOne => "row_alo",
            Provenance::ColAtLeastOne => "col_alo",
            Provenance::Blocking => "blocking",
            Provenance::Input => "input",
        }
    }

    pub fn from_name(s: &str) -> Option<Provenance> {
        Provenance::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// A clause database over a fixed number of variables.
///
/// Clauses are globally deduplicated: pushing a clause that is already present
/// is a no-op and the first occurrence keeps its position and provenance.
#[derive(Clone, Default)]
pub struct Cnf {
    num_vars: usize,
    clauses: Vec<Clause>,
    provenance: Vec<Provenance>,
    /// Clause fingerprint -> indices of clauses with that fingerprint.
    seen: HashMap<u64, Vec<u32>>,
}

impl fmt::Debug for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cnf")
            .field("num_vars", &self.num_vars)
            .field("clauses", &self.clauses.len())
            .finish()
    }
}

impl PartialEq for Cnf {
    fn eq(&self, other: &Cnf) -> bool {
        self.num_vars == other.num_vars
            && self.clauses == other.clauses
            && self.provenance == other.provenance
    }
}

impl Cnf {
    pub fn new(num_vars: usize) -> Cnf {
        Cnf { num_vars, ..Default::default() }
    }

    /// Builds from raw DIMACS-style literal lists, skipping tautologies.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[Vec<i32>]) -> Cnf {
        let mut cnf = Cnf::new(num_vars);
        for c in clauses {
            if let Some(cl) = Clause::new(c.iter().map(|&l| Lit::from_dimacs(l)).collect()) {
                cnf.push(cl, Provenance::Input);
            }
        }
        cnf
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_num_vars(&mut self, n: usize) {
        self.num_vars = n;
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Clause, Provenance)> {
        self.clauses.iter().zip(self.provenance.iter().copied())
    }

    /// Adds a clause unless an identical one is present. Returns whether it was new.
    pub fn push(&mut self, clause: Clause, prov: Provenance) -> bool {
        if let Some(max) = clause.lits().iter().map(|l| l.var().index() + 1).max() {
            if max > self.num_vars {
                self.num_vars = max;
            }
        }
        let mut h = DefaultHasher::new();
        clause.hash(&mut h);
        let bucket = self.seen.entry(h.finish()).or_default();
        if bucket.iter().any(|&i| self.clauses[i as usize] == clause) {
            return false;
        }
        bucket.push(self.clauses.len() as u32);
        self.clauses.push(clause);
        self.provenance.push(prov);
        true
    }

    pub fn extend(&mut self, clauses: impl IntoIterator<Item = Clause>, prov: Provenance) {
        for c in clauses {
            self.push(c, prov);
        }
    }

    pub fn count(&self, prov: Provenance) -> usize {
        self.provenance.iter().filter(|&&p| p == prov).count()
    }

    /// Variables fixed by a unit clause.
    pub fn fixed_vars(&self) -> usize {
        let mut fixed = vec![false; self.num_vars];
        for c in self.clauses.iter().filter(|c| c.len() == 1) {
            fixed[c.lits()[0].var().index()] = true;
        }
        fixed.iter().filter(|&&f| f).count()
    }

    /// Evaluates every clause under a total assignment indexed by variable.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.is_satisfied_by(|v| model[v.index()]))
    }
}
