//! Brute-force oracles and random formula generators shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use pp10::encoder::Cnf;
use rand::seq::index::sample;
use rand::Rng;

/// Random CNF over `n` variables with `m` clauses whose widths are drawn from
/// `widths`; literals within a clause use distinct variables.
pub fn random_cnf<R: Rng>(rng: &mut R, n: usize, m: usize, widths: std::ops::RangeInclusive<usize>) -> Vec<Vec<i32>> {
    (0..m)
        .map(|_| {
            let w = rng.gen_range(widths.clone()).min(n);
            sample(rng, n, w).into_iter().map(|v| if rng.gen() { v as i32 + 1 } else { -(v as i32 + 1) }).collect()
        })
        .collect()
}

pub fn to_cnf(n: usize, clauses: &[Vec<i32>]) -> Cnf {
    let mut cnf = Cnf::from_dimacs_clauses(n, clauses);
    cnf.set_num_vars(n);
    cnf
}

/// Clauses as (positive mask, negative mask) over at most 32 variables.
pub struct TruthTable {
    n: usize,
    masks: Vec<(u32, u32)>,
}

impl TruthTable {
    pub fn new(n: usize, clauses: &[Vec<i32>]) -> Self {
        assert!(n <= 32);
        let masks = clauses
            .iter()
            .map(|c| {
                let (mut p, mut q) = (0u32, 0u32);
                for &l in c {
                    let bit = 1u32 << (l.unsigned_abs() - 1);
                    if l > 0 {
                        p |= bit
                    } else {
                        q |= bit
                    }
                }
                (p, q)
            })
            .collect();
        TruthTable { n, masks }
    }

    pub fn satisfies(&self, a: u32) -> bool {
        self.masks.iter().all(|&(p, q)| (a & p) != 0 || (!a & q) != 0)
    }

    pub fn first_model(&self) -> Option<u32> {
        (0..(1u64 << self.n)).map(|a| a as u32).find(|&a| self.satisfies(a))
    }

    pub fn models(&self) -> Vec<u32> {
        (0..(1u64 << self.n)).map(|a| a as u32).filter(|&a| self.satisfies(a)).collect()
    }
}

/// Evaluates a solver model independently of the solver and the `Cnf` type.
pub fn model_satisfies(clauses: &[Vec<i32>], model: &[bool]) -> bool {
    clauses.iter().all(|c| c.iter().any(|&l| model[l.unsigned_abs() as usize - 1] == (l > 0)))
}

/// Textbook RUP checking by repeated scans, for differential testing.
/// With `honour_deletions` false every deletion is ignored.
pub fn naive_rup_refutes(clauses: &[Vec<i32>], proof: &[(bool, Vec<i32>)], honour_deletions: bool) -> bool {
    let norm = |c: &Vec<i32>| {
        let mut c = c.clone();
        c.sort();
        c.dedup();
        c
    };
    let mut db: Vec<Vec<i32>> = clauses.iter().map(norm).collect();
    for (is_add, lemma) in proof {
        let lemma = norm(lemma);
        if !is_add {
            if honour_deletions {
                if let Some(i) = db.iter().position(|c| *c == lemma) {
                    db.swap_remove(i);
                }
            }
            continue;
        }
        if !propagates_to_conflict(&db, &lemma) {
            return false;
        }
        if lemma.is_empty() {
            return true;
        }
        db.push(lemma);
    }
    false
}

/// Does asserting the negation of `lemma` and propagating units falsify a clause?
fn propagates_to_conflict(db: &[Vec<i32>], lemma: &[i32]) -> bool {
    let mut assigned: std::collections::HashMap<u32, bool> = std::collections::HashMap::new();
    for &l in lemma {
        if assigned.insert(l.unsigned_abs(), l < 0) == Some(l > 0) {
            return true;
        }
    }
    loop {
        let mut changed = false;
        for c in db {
            let mut open = None;
            let mut n_open = 0;
            let mut sat = false;
            for &l in c {
                match assigned.get(&l.unsigned_abs()) {
                    Some(&v) if v == (l > 0) => {
                        sat = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        n_open += 1;
                        open = Some(l);
                    }
                }
            }
            if sat {
                continue;
            }
            match (n_open, open) {
                (0, _) => return true,
                (1, Some(l)) => {
                    assigned.insert(l.unsigned_abs(), l > 0);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return false;
        }
    }
}

/// Classifies a proof with the textbook checkers: `Some(true)` if it refutes
/// the formula even when deletions are honoured, `Some(false)` if it fails
/// even when they are ignored, `None` in between.
pub fn textbook_judge(clauses: &[Vec<i32>]) -> impl FnMut(&[pp10::proof::ProofLine]) -> Option<bool> + '_ {
    move |proof| {
        let ints: Vec<(bool, Vec<i32>)> =
            proof.iter().map(|l| (l.kind == pp10::proof::LineKind::Add, l.lits.iter().map(|x| x.to_dimacs()).collect())).collect();
        if naive_rup_refutes(clauses, &ints, true) {
            Some(true)
        } else if !naive_rup_refutes(clauses, &ints, false) {
            Some(false)
        } else {
            None
        }
    }
}
