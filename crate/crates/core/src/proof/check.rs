//! Forward DRUP checking with its own propagation engine.
//!
//! The active set is the formula plus accepted additions minus deletions.
//! Units derived at the top level are never retracted, even when the clause
//! that implied them is later deleted: they remain consequences of the formula,
//! so keeping them is sound.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::convert::Infallible;
use std::hash::{Hash, Hasher};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{DrupReader, LineKind, ProofLine, ProofParseError};
use crate::encoder::Cnf;
use crate::lit::Lit;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Verified,
    /// `step` is the 1-based index of the offending proof line, or one past
    /// the end when the proof never derives the empty clause.
    Failed { step: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub steps_checked: usize,
    pub units_propagated: u64,
    pub additions: usize,
    pub deletions: usize,
    pub absent_deletions: usize,
}

impl CheckReport {
    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }
}

/// Proof lines whose additions the empty clause transitively depends on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreReport {
    pub report: CheckReport,
    /// 0-based indices of Add lines in the dependency cone of the empty clause.
    pub core_lines: Vec<usize>,
}

const TRUE: i8 = 1;
const FALSE: i8 = -1;
const UNDEF: i8 = 0;
const NONE: u32 = u32::MAX;

struct StoredClause {
    lits: Vec<Lit>,
    alive: bool,
    /// Proof line that added it; `NONE` for formula clauses.
    line: u32,
}

struct Checker {
    num_vars: usize,
    clauses: Vec<StoredClause>,
    index: HashMap<u64, Vec<u32>>,
    watches: Vec<Vec<u32>>,
    vals: Vec<i8>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    qhead: usize,
    /// Clause found conflicting at the top level, once the set is inconsistent.
    top_conflict: Option<u32>,
    units_propagated: u64,
    track_deps: bool,
    deps: Vec<Vec<u32>>,
    stamp: Vec<u32>,
    stamp_gen: u32,
}

fn key(lits: &[Lit]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    lits.hash(&mut h);
    h.finish()
}

fn normalize(lits: &[Lit]) -> Option<Vec<Lit>> {
    let mut v = lits.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.windows(2).any(|w| w[0] == !w[1]) {
        None
    } else {
        Some(v)
    }
}

enum Rup {
    Conflict(Option<u32>),
    NoConflict,
}

impl Checker {
    fn new(num_vars: usize, track_deps: bool) -> Self {
        Checker {
            num_vars,
            clauses: Vec::new(),
            index: HashMap::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            vals: vec![UNDEF; 2 * num_vars],
            reason: vec![NONE; num_vars],
            trail: Vec::new(),
            qhead: 0,
            top_conflict: None,
            units_propagated: 0,
            track_deps,
            deps: Vec::new(),
            stamp: vec![0; num_vars],
            stamp_gen: 0,
        }
    }

    #[inline]
    fn val(&self, l: Lit) -> i8 {
        self.vals[l.code()]
    }

    fn assign(&mut self, l: Lit, reason: u32) {
        self.vals[l.code()] = TRUE;
        self.vals[(!l).code()] = FALSE;
        self.reason[l.var().index()] = reason;
        self.trail.push(l);
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().expect("trail");
            self.vals[l.code()] = UNDEF;
            self.vals[(!l).code()] = UNDEF;
            self.reason[l.var().index()] = NONE;
        }
        self.qhead = self.qhead.min(len);
    }

    /// Propagates pending assignments; returns a conflicting clause id.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.units_propagated += 1;
            let neg = !p;
            let mut ws = std::mem::take(&mut self.watches[neg.code()]);
            let mut keep = 0;
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let cid = ws[i];
                i += 1;
                let c = &mut self.clauses[cid as usize];
                if !c.alive {
                    continue;
                }
                if c.lits[0] == neg {
                    c.lits.swap(0, 1);
                }
                let other = c.lits[0];
                if self.vals[other.code()] == TRUE {
                    ws[keep] = cid;
                    keep += 1;
                    continue;
                }
                let mut found = None;
                for k in 2..c.lits.len() {
                    if self.vals[c.lits[k].code()] != FALSE {
                        found = Some(k);
                        break;
                    }
                }
                if let Some(k) = found {
                    c.lits.swap(1, k);
                    let w = c.lits[1];
                    self.watches[w.code()].push(cid);
                    continue;
                }
                ws[keep] = cid;
                keep += 1;
                if self.vals[other.code()] == FALSE {
                    conflict = Some(cid);
                    while i < ws.len() {
                        ws[keep] = ws[i];
                        keep += 1;
                        i += 1;
                    }
                } else {
                    self.assign(other, cid);
                }
            }
            ws.truncate(keep);
            self.watches[neg.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// Clause ids in the implication cone of a conflict.
    fn cone(&mut self, conflict: Option<u32>, extra: &[Lit]) -> Vec<u32> {
        self.stamp_gen += 1;
        let gen = self.stamp_gen;
        let mut out = Vec::new();
        let mut stack: Vec<Lit> = extra.to_vec();
        if let Some(c) = conflict {
            out.push(c);
            stack.extend(self.clauses[c as usize].lits.iter().copied());
        }
        while let Some(l) = stack.pop() {
            let v = l.var().index();
            if self.stamp[v] == gen {
                continue;
            }
            self.stamp[v] = gen;
            let r = self.reason[v];
            if r != NONE {
                out.push(r);
                stack.extend(self.clauses[r as usize].lits.iter().copied());
            }
        }
        out
    }

    /// Reverse unit propagation of `lits` against the active set.
    fn rup(&mut self, lits: &[Lit]) -> Rup {
        if let Some(c) = self.top_conflict {
            return Rup::Conflict(Some(c));
        }
        let top = self.trail.len();
        let mut result = Rup::NoConflict;
        let mut satisfied = None;
        for &l in lits {
            match self.val(l) {
                TRUE => {
                    satisfied = Some(l);
                    break;
                }
                UNDEF => self.assign(!l, NONE),
                _ => {}
            }
        }
        if let Some(l) = satisfied {
            result = Rup::Conflict(None);
            if self.track_deps {
                let d = self.cone(None, &[l]);
                self.deps.push(d);
            }
        } else if let Some(c) = self.propagate() {
            result = Rup::Conflict(Some(c));
            if self.track_deps {
                let d = self.cone(Some(c), &[]);
                self.deps.push(d);
            }
        }
        self.undo_to(top);
        result
    }

    fn insert(&mut self, lits: Vec<Lit>, line: u32) {
        let id = self.clauses.len() as u32;
        self.index.entry(key(&lits)).or_default().push(id);
        self.clauses.push(StoredClause { lits, alive: true, line });
        if self.top_conflict.is_some() {
            return;
        }
        let c = &mut self.clauses[id as usize];
        // Move true literals, then unassigned ones, to the front.
        c.lits.sort_by_key(|l| -self.vals[l.code()]);
        let n = c.lits.len();
        match n {
            0 => self.top_conflict = Some(id),
            1 => {
                let l = c.lits[0];
                match self.vals[l.code()] {
                    UNDEF => {
                        self.assign(l, id);
                        if let Some(k) = self.propagate() {
                            self.top_conflict = Some(k);
                        }
                    }
                    FALSE => self.top_conflict = Some(id),
                    _ => {}
                }
            }
            _ => {
                let (a, b) = (c.lits[0], c.lits[1]);
                self.watches[a.code()].push(id);
                self.watches[b.code()].push(id);
                match (self.vals[a.code()], self.vals[b.code()]) {
                    (FALSE, _) => self.top_conflict = Some(id),
                    (UNDEF, FALSE) => {
                        self.assign(a, id);
                        if let Some(k) = self.propagate() {
                            self.top_conflict = Some(k);
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    fn remove(&mut self, lits: &[Lit]) -> bool {
        let k = key(lits);
        let Some(ids) = self.index.get_mut(&k) else { return false };
        let clauses = &self.clauses;
        let pos = ids.iter().rposition(|&id| {
            let c = &clauses[id as usize];
            c.alive && {
                let mut s = c.lits.clone();
                s.sort_unstable();
                s == lits
            }
        });
        let Some(pos) = pos else { return false };
        let id = ids.swap_remove(pos);
        if ids.is_empty() {
            self.index.remove(&k);
        }
        self.clauses[id as usize].alive = false;
        true
    }
}

fn run<L, E>(cnf: &Cnf, proof: impl Iterator<Item = Result<L, E>>, track_deps: bool) -> Result<(CheckReport, Vec<usize>), E>
where
    L: Borrow<ProofLine>,
{
    let mut ck = Checker::new(cnf.num_vars(), track_deps);
    for c in cnf.clauses() {
        if let Some(lits) = normalize(c.lits()) {
            ck.insert(lits, NONE);
        }
    }
    let mut report = CheckReport {
        verdict: Verdict::Failed { step: 0, reason: String::new() },
        steps_checked: 0,
        units_propagated: 0,
        additions: 0,
        deletions: 0,
        absent_deletions: 0,
    };
    // For each dependency record: the proof line it belongs to.
    let mut dep_lines: Vec<usize> = Vec::new();
    let mut empty_at = None;
    let mut seen = 0;
    for (i, line) in proof.enumerate() {
        let line = line?;
        let line = line.borrow();
        seen = i + 1;
        report.steps_checked = i + 1;
        let step = i + 1;
        if let Some(l) = line.lits.iter().find(|l| l.var().index() >= ck.num_vars) {
            report.verdict = Verdict::Failed { step, reason: format!("literal {l} outside the formula's {} variables", ck.num_vars) };
            break;
        }
        match line.kind {
            LineKind::Delete => {
                report.deletions += 1;
                let found = match normalize(&line.lits) {
                    Some(lits) => ck.remove(&lits),
                    None => false,
                };
                if !found {
                    report.absent_deletions += 1;
                }
            }
            LineKind::Add => {
                report.additions += 1;
                let before = ck.deps.len();
                match ck.rup(&line.lits) {
                    Rup::NoConflict => {
                        report.verdict = Verdict::Failed { step, reason: "clause is not implied by unit propagation".into() };
                        break;
                    }
                    Rup::Conflict(c) => {
                        if track_deps {
                            if ck.deps.len() == before {
                                // Inconsistent set: depend on the top-level conflict.
                                let d = ck.cone(c, &[]);
                                ck.deps.push(d);
                            }
                            dep_lines.push(i);
                        }
                    }
                }
                if line.lits.is_empty() {
                    report.verdict = Verdict::Verified;
                    empty_at = Some(dep_lines.len().wrapping_sub(1));
                    break;
                }
                if let Some(lits) = normalize(&line.lits) {
                    ck.insert(lits, i as u32);
                }
            }
        }
    }
    report.units_propagated = ck.units_propagated;
    // Step 0 marks "still undecided" when the input ran out.
    if matches!(report.verdict, Verdict::Failed { step: 0, .. }) {
        report.verdict = Verdict::Failed { step: seen + 1, reason: "proof does not derive the empty clause".into() };
    }

    let mut core = Vec::new();
    if let (true, Some(root)) = (track_deps, empty_at) {
        // Map each proof line to its dependency record, then walk backwards.
        let mut rec_of_line: HashMap<usize, usize> = HashMap::new();
        for (r, &line) in dep_lines.iter().enumerate() {
            rec_of_line.insert(line, r);
        }
        let mut marked = vec![false; seen];
        let mut stack = vec![root];
        marked[dep_lines[root]] = true;
        while let Some(r) = stack.pop() {
            for &cid in &ck.deps[r] {
                let line = ck.clauses[cid as usize].line;
                if line == NONE {
                    continue;
                }
                let line = line as usize;
                if !marked[line] {
                    marked[line] = true;
                    if let Some(&r2) = rec_of_line.get(&line) {
                        stack.push(r2);
                    }
                }
            }
        }
        core = marked.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect();
    }
    Ok((report, core))
}

/// Forward-checks `proof` against `cnf`.
pub fn check_drup(cnf: &Cnf, proof: &[ProofLine]) -> CheckReport {
    let Ok((report, _)) = run(cnf, proof.iter().map(Ok::<_, Infallible>), false);
    report
}

/// Forward-checks a plain-text proof while reading it, so that proofs larger
/// than memory can be checked.
pub fn check_drup_reader<R: BufRead>(cnf: &Cnf, input: R) -> Result<CheckReport, ProofParseError> {
    Ok(run(cnf, DrupReader::new(input), false)?.0)
}

/// Like [`check_drup`], additionally recording which additions the empty
/// clause depends on. Slower; meant for analysis of moderate proofs.
pub fn check_drup_with_core(cnf: &Cnf, proof: &[ProofLine]) -> CoreReport {
    let Ok((report, core_lines)) = run(cnf, proof.iter().map(Ok::<_, Infallible>), true);
    CoreReport { report, core_lines }
}
