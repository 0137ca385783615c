//! Conflict-driven clause-learning engine.
//!
//! Two watched literals with blockers, first-UIP learning with recursive
//! minimization, exponential VSIDS with phase saving, geometric restarts that
//! switch to LBD-average driven restarts, activity-based learnt-clause
//! reduction, assumptions as forced first decisions and optional DRUP logging.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::config::SolverConfig;
use super::sink::ProofSink;
use crate::encoder::Cnf;
use crate::lit::{Lit, Var};

type CRef = u32;
const NO_REASON: CRef = u32::MAX;

const TRUE: i8 = 1;
const FALSE: i8 = -1;
const UNDEF: i8 = 0;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("resource limit reached after {conflicts} conflicts")]
    ResourceLimit { conflicts: u64 },
    #[error("proof sink failed: {0}")]
    SinkFailure(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// A total assignment, indexed by variable.
    Sat(Vec<bool>),
    Unsat,
    /// The formula is unsatisfiable together with these assumptions.
    UnsatUnderAssumptions(Vec<Lit>),
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }

    pub fn model(&self) -> Option<&[bool]> {
        match self {
            SolveOutcome::Sat(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub reductions: u64,
    pub learnt_literals: u64,
    pub deleted_clauses: u64,
}

/// Clause arena. Each clause is a three-word header followed by its literals:
/// `[len, flags | lbd << 2, activity bits, lits..]`.
#[derive(Default)]
struct Arena {
    data: Vec<u32>,
    wasted: usize,
}

const HEADER: usize = 3;
const LEARNT: u32 = 1;
const DELETED: u32 = 2;

impl Arena {
    fn alloc(&mut self, lits: &[Lit], learnt: bool, lbd: u32) -> CRef {
        let cref = self.data.len() as CRef;
        self.data.push(lits.len() as u32);
        self.data.push((lbd << 2) | if learnt { LEARNT } else { 0 });
        self.data.push(0f32.to_bits());
        self.data.extend(lits.iter().map(|l| l.code() as u32));
        cref
    }

    #[inline]
    fn len(&self, c: CRef) -> usize {
        self.data[c as usize] as usize
    }

    #[inline]
    fn learnt(&self, c: CRef) -> bool {
        self.data[c as usize + 1] & LEARNT != 0
    }

    #[inline]
    fn deleted(&self, c: CRef) -> bool {
        self.data[c as usize + 1] & DELETED != 0
    }

    fn set_deleted(&mut self, c: CRef) {
        self.data[c as usize + 1] |= DELETED;
        self.wasted += HEADER + self.len(c);
    }

    #[inline]
    fn lbd(&self, c: CRef) -> u32 {
        self.data[c as usize + 1] >> 2
    }

    #[inline]
    fn activity(&self, c: CRef) -> f32 {
        f32::from_bits(self.data[c as usize + 2])
    }

    fn set_activity(&mut self, c: CRef, a: f32) {
        self.data[c as usize + 2] = a.to_bits();
    }

    #[inline]
    fn lit(&self, c: CRef, i: usize) -> Lit {
        Lit::from_code(self.data[c as usize + HEADER + i] as usize)
    }

    #[inline]
    fn lits_raw(&self, c: CRef) -> &[u32] {
        let s = c as usize + HEADER;
        &self.data[s..s + self.len(c)]
    }

    #[inline]
    fn lits_raw_mut(&mut self, c: CRef) -> &mut [u32] {
        let s = c as usize + HEADER;
        let n = self.len(c);
        &mut self.data[s..s + n]
    }

    fn lits(&self, c: CRef) -> Vec<Lit> {
        self.lits_raw(c).iter().map(|&x| Lit::from_code(x as usize)).collect()
    }
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: CRef,
    blocker: Lit,
}

/// Max-heap of variables ordered by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, -1);
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] >= 0
    }

    fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i] as usize] = i as i32;
            i = p;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] { r } else { l };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i as i32;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v as u32);
        let i = self.heap.len() - 1;
        self.pos[v] = i as i32;
        self.up(i, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.up(self.pos[v] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top as usize)
    }
}

pub struct Solver {
    config: SolverConfig,
    rng: ChaCha8Rng,
    num_vars: usize,

    arena: Arena,
    originals: Vec<CRef>,
    learnts: Vec<CRef>,
    watches: Vec<Vec<Watcher>>,

    /// Per-literal value: TRUE, FALSE or UNDEF.
    values: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<CRef>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,

    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f32,
    heap: VarHeap,
    phase: Vec<bool>,

    seen: Vec<u8>,
    analyze_stack: Vec<Lit>,
    analyze_clear: Vec<Lit>,
    level_stamp: Vec<u64>,
    stamp: u64,

    lbd_fast: f64,
    lbd_slow: f64,
    next_reduce: u64,
    reduce_interval: u64,
    simp_trail: usize,

    /// False once the clause database is unsatisfiable at level 0.
    ok: bool,
    proof: Option<Box<dyn ProofSink>>,
    /// The attached proof already ends in the empty clause.
    proof_refuted: bool,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SolverConfig::default())
    }
}

impl Solver {
    pub fn new(config: SolverConfig) -> Solver {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let next_reduce = config.reduce_first;
        Solver {
            rng,
            num_vars: 0,
            arena: Arena::default(),
            originals: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            values: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            seen: Vec::new(),
            analyze_stack: Vec::new(),
            analyze_clear: Vec::new(),
            level_stamp: Vec::new(),
            stamp: 0,
            lbd_fast: 0.0,
            lbd_slow: 0.0,
            next_reduce,
            reduce_interval: next_reduce,
            simp_trail: 0,
            ok: true,
            proof: None,
            proof_refuted: false,
            stats: SolverStats::default(),
            config,
        }
    }

    /// A solver loaded with every clause of `cnf`.
    pub fn from_cnf(cnf: &Cnf, config: SolverConfig) -> Solver {
        let mut s = Solver::new(config);
        s.reserve_vars(cnf.num_vars());
        for c in cnf.clauses() {
            s.add_clause(c.lits());
        }
        s
    }

    /// Attach before adding clauses so that level-0 simplifications are logged.
    pub fn attach_proof(&mut self, sink: Box<dyn ProofSink>) {
        self.proof = Some(sink);
        self.proof_refuted = false;
    }

    pub fn detach_proof(&mut self) -> Option<Box<dyn ProofSink>> {
        self.proof.take()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// False once the clause set is known unsatisfiable without assumptions.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn reserve_vars(&mut self, n: usize) {
        if n <= self.num_vars {
            return;
        }
        self.watches.resize_with(2 * n, Vec::new);
        self.values.resize(2 * n, UNDEF);
        self.level.resize(n, 0);
        self.reason.resize(n, NO_REASON);
        self.activity.resize(n, 0.0);
        self.phase.resize(n, false);
        self.seen.resize(n, 0);
        self.heap.grow(n);
        self.level_stamp.resize(n + 1, 0);
        for v in self.num_vars..n {
            self.heap.insert(v, &self.activity);
        }
        self.num_vars = n;
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        self.values[l.code()]
    }

    #[inline]
    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn log_add(&mut self, lits: &[Lit]) {
        if let Some(p) = self.proof.as_mut() {
            p.add(lits);
            self.proof_refuted |= lits.is_empty();
        }
    }

    fn log_delete(&mut self, lits: &[Lit]) {
        if let Some(p) = self.proof.as_mut() {
            p.delete(lits);
        }
    }

    /// Adds an input clause. Returns false if the database became unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        self.add_clause_inner(lits, false)
    }

    /// Adds a clause that is not implied by the formula (for example a
    /// blocking clause). It is logged as a proof addition so that a checker
    /// given the formula plus the injected clauses can follow the proof.
    pub fn add_injected_clause(&mut self, lits: &[Lit]) -> bool {
        self.add_clause_inner(lits, true)
    }

    fn add_clause_inner(&mut self, lits: &[Lit], log_original: bool) -> bool {
        if !self.ok {
            return false;
        }
        if self.decision_level() > 0 {
            self.cancel_until(0);
        }
        if let Some(max) = lits.iter().map(|l| l.var().index() + 1).max() {
            self.reserve_vars(max);
        }
        if log_original {
            self.log_add(lits);
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return true;
        }
        if c.iter().any(|&l| self.value(l) == TRUE) {
            return true;
        }
        let before = c.len();
        c.retain(|&l| self.value(l) != FALSE);
        if c.len() < before {
            self.log_add(&c);
        }
        match c.len() {
            0 => {
                if c.len() == before {
                    self.log_add(&[]);
                }
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate() != NO_REASON {
                    self.ok = false;
                    self.log_add(&[]);
                    return false;
                }
                true
            }
            _ => {
                let cref = self.arena.alloc(&c, false, 0);
                self.originals.push(cref);
                self.attach(cref);
                true
            }
        }
    }

    fn attach(&mut self, cref: CRef) {
        let (a, b) = (self.arena.lit(cref, 0), self.arena.lit(cref, 1));
        self.watches[a.code()].push(Watcher { cref, blocker: b });
        self.watches[b.code()].push(Watcher { cref, blocker: a });
    }

    #[inline]
    fn enqueue(&mut self, l: Lit, reason: CRef) {
        debug_assert_eq!(self.value(l), UNDEF);
        self.values[l.code()] = TRUE;
        self.values[(!l).code()] = FALSE;
        let v = l.var().index();
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns the conflicting clause or `NO_REASON`.
    fn propagate(&mut self) -> CRef {
        let mut confl = NO_REASON;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let fl = false_lit.code() as u32;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let n = ws.len();
            while i < n {
                let w = ws[i];
                i += 1;
                if self.values[w.blocker.code()] == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                let lits = self.arena.lits_raw_mut(cref);
                if lits[0] == fl {
                    lits.swap(0, 1);
                }
                let first = Lit::from_code(lits[0] as usize);
                let nw = Watcher { cref, blocker: first };
                if first != w.blocker && self.values[first.code()] == TRUE {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                let len = lits.len();
                for k in 2..len {
                    let lk = lits[k];
                    if self.values[lk as usize] != FALSE {
                        lits[1] = lk;
                        lits[k] = fl;
                        self.watches[lk as usize].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.values[first.code()] == FALSE {
                    confl = cref;
                    self.qhead = self.trail.len();
                    while i < n {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if confl != NO_REASON {
                break;
            }
        }
        confl
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for idx in (lim..self.trail.len()).rev() {
            let l = self.trail[idx];
            let v = l.var().index();
            self.values[l.code()] = UNDEF;
            self.values[(!l).code()] = UNDEF;
            self.reason[v] = NO_REASON;
            self.phase[v] = l.is_positive();
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, c: CRef) {
        let a = self.arena.activity(c) + self.cla_inc;
        self.arena.set_activity(c, a);
        if a > 1e20 {
            for &l in &self.learnts {
                let x = self.arena.activity(l) * 1e-20;
                self.arena.set_activity(l, x);
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn abstract_level(&self, v: usize) -> u32 {
        1 << (self.level[v] & 31)
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal first)
    /// and the backjump level.
    fn analyze(&mut self, mut confl: CRef) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit::from_code(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let dl = self.decision_level();

        loop {
            debug_assert_ne!(confl, NO_REASON);
            if self.arena.learnt(confl) {
                self.bump_clause(confl);
            }
            let start = usize::from(p.is_some());
            let len = self.arena.len(confl);
            for k in start..len {
                let q = self.arena.lit(confl, k);
                let v = q.var().index();
                if self.seen[v] == 0 && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = 1;
                    if self.level[v] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] != 0 {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            confl = self.reason[pl.var().index()];
            self.seen[pl.var().index()] = 0;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = !p.expect("uip");

        // Recursive minimization.
        self.analyze_clear.clear();
        self.analyze_clear.extend_from_slice(&learnt);
        let mut abs = 0u32;
        for &l in &learnt[1..] {
            abs |= self.abstract_level(l.var().index());
        }
        let mut j = 1;
        for i in 1..learnt.len() {
            let l = learnt[i];
            let v = l.var().index();
            if self.reason[v] == NO_REASON || !self.lit_redundant(l, abs) {
                learnt[j] = l;
                j += 1;
            }
        }
        learnt.truncate(j);
        self.stats.learnt_literals += learnt.len() as u64;

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()]
        };

        for k in 0..self.analyze_clear.len() {
            self.seen[self.analyze_clear[k].var().index()] = 0;
        }
        (learnt, bt)
    }

    fn lit_redundant(&mut self, p: Lit, abs: u32) -> bool {
        self.analyze_stack.clear();
        self.analyze_stack.push(p);
        let top = self.analyze_clear.len();
        while let Some(q) = self.analyze_stack.pop() {
            let c = self.reason[q.var().index()];
            debug_assert_ne!(c, NO_REASON);
            let len = self.arena.len(c);
            for k in 1..len {
                let l = self.arena.lit(c, k);
                let v = l.var().index();
                if self.seen[v] == 0 && self.level[v] > 0 {
                    if self.reason[v] != NO_REASON && (self.abstract_level(v) & abs) != 0 {
                        self.seen[v] = 1;
                        self.analyze_stack.push(l);
                        self.analyze_clear.push(l);
                    } else {
                        for k2 in top..self.analyze_clear.len() {
                            self.seen[self.analyze_clear[k2].var().index()] = 0;
                        }
                        self.analyze_clear.truncate(top);
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Assumptions responsible for `p` being false; `p` is the negation of
    /// a failed assumption.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        let mut core = vec![!p];
        if self.decision_level() == 0 {
            return core;
        }
        self.seen[p.var().index()] = 1;
        let lim = self.trail_lim[0];
        for idx in (lim..self.trail.len()).rev() {
            let x = self.trail[idx];
            let v = x.var().index();
            if self.seen[v] != 0 {
                let r = self.reason[v];
                if r == NO_REASON {
                    debug_assert!(self.level[v] > 0);
                    if x != !p {
                        core.push(x);
                    }
                } else {
                    for k in 1..self.arena.len(r) {
                        let q = self.arena.lit(r, k);
                        if self.level[q.var().index()] > 0 {
                            self.seen[q.var().index()] = 1;
                        }
                    }
                }
                self.seen[v] = 0;
            }
        }
        self.seen[p.var().index()] = 0;
        core
    }

    fn compute_lbd(&mut self, lits: &[Lit]) -> u32 {
        self.stamp += 1;
        let mut n = 0;
        for l in lits {
            let lv = self.level[l.var().index()] as usize;
            if self.level_stamp[lv] != self.stamp {
                self.level_stamp[lv] = self.stamp;
                n += 1;
            }
        }
        n
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        if self.config.random_var_freq > 0.0 && !self.heap.is_empty() && self.rng.gen::<f64>() < self.config.random_var_freq {
            let v = self.heap.heap[self.rng.gen_range(0..self.heap.heap.len())] as usize;
            if self.values[Var(v as u32).lit(true).code()] == UNDEF {
                return Some(Var(v as u32).lit(self.phase[v]));
            }
        }
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.values[Var(v as u32).lit(true).code()] == UNDEF {
                return Some(Var(v as u32).lit(self.phase[v]));
            }
        }
        None
    }

    fn reduce_db(&mut self) {
        self.stats.reductions += 1;
        let mut cands: Vec<CRef> = Vec::with_capacity(self.learnts.len());
        let mut keep: Vec<CRef> = Vec::with_capacity(self.learnts.len());
        for &c in &self.learnts {
            if self.arena.deleted(c) {
                continue;
            }
            if self.arena.len(c) <= 2 || self.arena.lbd(c) <= self.config.keep_lbd || self.locked(c) {
                keep.push(c);
            } else {
                cands.push(c);
            }
        }
        let arena = &self.arena;
        cands.sort_by(|&a, &b| {
            arena.activity(a).partial_cmp(&arena.activity(b)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        let cut = cands.len() / 2;
        for &c in &cands[..cut] {
            let lits = self.arena.lits(c);
            self.log_delete(&lits);
            self.arena.set_deleted(c);
            self.stats.deleted_clauses += 1;
        }
        keep.extend_from_slice(&cands[cut..]);
        keep.sort_unstable();
        self.learnts = keep;
        self.collect_garbage();
    }

    fn locked(&self, c: CRef) -> bool {
        let l0 = self.arena.lit(c, 0);
        self.value(l0) == TRUE && self.reason[l0.var().index()] == c
    }

    /// Removes clauses satisfied at level 0.
    fn simplify(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        if self.trail.len() == self.simp_trail {
            return;
        }
        self.simp_trail = self.trail.len();
        let originals = std::mem::take(&mut self.originals);
        self.originals = self.drop_satisfied(originals);
        let learnts = std::mem::take(&mut self.learnts);
        self.learnts = self.drop_satisfied(learnts);
        // Level-0 reasons are never inspected by analysis.
        for idx in 0..self.trail.len() {
            let v = self.trail[idx].var().index();
            self.reason[v] = NO_REASON;
        }
        self.collect_garbage();
    }

    fn drop_satisfied(&mut self, list: Vec<CRef>) -> Vec<CRef> {
        let mut kept = Vec::with_capacity(list.len());
        for c in list {
            if self.arena.deleted(c) {
                continue;
            }
            if self.arena.lits_raw(c).iter().any(|&x| self.values[x as usize] == TRUE) {
                let lits = self.arena.lits(c);
                self.log_delete(&lits);
                self.arena.set_deleted(c);
                self.stats.deleted_clauses += 1;
            } else {
                kept.push(c);
            }
        }
        kept
    }

    /// Compacts the arena when enough clauses are deleted, then rebuilds watches.
    fn collect_garbage(&mut self) {
        if self.arena.wasted * 5 < self.arena.data.len() {
            self.detach_deleted();
            return;
        }
        let mut fresh = Arena::default();
        fresh.data.reserve(self.arena.data.len() - self.arena.wasted);
        // The old activity slot records where each live clause moved to.
        let mut relocate = |list: &mut Vec<CRef>, old: &mut Arena| {
            list.retain(|&c| !old.deleted(c));
            for c in list.iter_mut() {
                let lits = old.lits(*c);
                let n = fresh.alloc(&lits, old.learnt(*c), old.lbd(*c));
                fresh.set_activity(n, old.activity(*c));
                old.data[*c as usize + 2] = n;
                *c = n;
            }
        };
        relocate(&mut self.originals, &mut self.arena);
        relocate(&mut self.learnts, &mut self.arena);
        for r in self.reason.iter_mut() {
            if *r != NO_REASON {
                *r = self.arena.data[*r as usize + 2];
            }
        }
        self.arena = fresh;
        for w in self.watches.iter_mut() {
            w.clear();
        }
        for i in 0..self.originals.len() {
            self.attach(self.originals[i]);
        }
        for i in 0..self.learnts.len() {
            self.attach(self.learnts[i]);
        }
    }

    fn detach_deleted(&mut self) {
        let arena = &self.arena;
        for w in self.watches.iter_mut() {
            w.retain(|x| !arena.deleted(x.cref));
        }
    }

    fn restart_due(&self, conflicts_since: u64, geometric_limit: f64) -> bool {
        if self.stats.conflicts < self.config.adaptive_after {
            conflicts_since as f64 >= geometric_limit
        } else {
            conflicts_since >= 50 && self.lbd_fast > self.config.adaptive_margin * self.lbd_slow
        }
    }

    fn budget_exhausted(&self, start_conflicts: u64, started: Instant) -> bool {
        if let Some(b) = self.config.conflict_budget {
            if self.stats.conflicts - start_conflicts >= b {
                return true;
            }
        }
        if let Some(t) = self.config.time_budget {
            if self.stats.conflicts % 256 == 0 && started.elapsed() >= t {
                return true;
            }
        }
        false
    }

    /// Decides satisfiability of the clause database under `assumptions`.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome, SolveError> {
        self.stats.solves += 1;
        if let Some(max) = assumptions.iter().map(|l| l.var().index() + 1).max() {
            self.reserve_vars(max);
        }
        let outcome = self.search(assumptions);
        self.cancel_until(0);
        if let Some(p) = self.proof.as_mut() {
            p.finish()?;
        }
        outcome
    }

    fn search(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome, SolveError> {
        if !self.ok {
            // The conflict may predate the proof; it is found by unit
            // propagation, so the empty clause alone is a valid step.
            if !self.proof_refuted {
                self.log_add(&[]);
            }
            return Ok(SolveOutcome::Unsat);
        }
        let started = Instant::now();
        let start_conflicts = self.stats.conflicts;
        let mut geometric_limit = self.config.restart_first as f64;
        let mut since_restart = 0u64;
        if self.propagate() != NO_REASON {
            self.ok = false;
            self.log_add(&[]);
            return Ok(SolveOutcome::Unsat);
        }
        self.simplify();

        loop {
            let confl = self.propagate();
            if confl != NO_REASON {
                self.stats.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    self.log_add(&[]);
                    return Ok(SolveOutcome::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                self.log_add(&learnt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let lbd = self.compute_lbd(&learnt);
                    let cref = self.arena.alloc(&learnt, true, lbd);
                    self.learnts.push(cref);
                    self.attach(cref);
                    self.bump_clause(cref);
                    self.enqueue(learnt[0], cref);
                    let lbd = lbd as f64;
                    self.lbd_fast += (lbd - self.lbd_fast) / 32.0;
                    self.lbd_slow += (lbd - self.lbd_slow) / 4096.0;
                }
                self.var_inc /= self.config.var_decay;
                self.cla_inc /= self.config.clause_decay as f32;
                if self.budget_exhausted(start_conflicts, started) {
                    return Err(SolveError::ResourceLimit { conflicts: self.stats.conflicts - start_conflicts });
                }
                continue;
            }

            if self.restart_due(since_restart, geometric_limit) {
                self.stats.restarts += 1;
                since_restart = 0;
                if self.stats.conflicts < self.config.adaptive_after {
                    geometric_limit *= self.config.restart_inc;
                }
                self.cancel_until(0);
                self.simplify();
                continue;
            }
            if self.stats.conflicts >= self.next_reduce {
                self.reduce_interval += self.config.reduce_inc;
                self.next_reduce = self.stats.conflicts + self.reduce_interval;
                self.reduce_db();
            }

            let mut next = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let a = assumptions[self.decision_level() as usize];
                match self.value(a) {
                    TRUE => self.trail_lim.push(self.trail.len()),
                    FALSE => {
                        let core = self.analyze_final(!a);
                        return Ok(SolveOutcome::UnsatUnderAssumptions(core));
                    }
                    _ => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let decision = match next {
                Some(a) => a,
                None => {
                    self.stats.decisions += 1;
                    match self.pick_branch() {
                        Some(l) => l,
                        None => {
                            let model = (0..self.num_vars)
                                .map(|v| self.values[Var(v as u32).lit(true).code()] == TRUE)
                                .collect();
                            return Ok(SolveOutcome::Sat(model));
                        }
                    }
                }
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(decision, NO_REASON);
        }
    }
}
