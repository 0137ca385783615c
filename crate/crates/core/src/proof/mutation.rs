//! Single-mutation corruption harness: how often does the checker notice?

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::check::{check_drup, check_drup_with_core};
use super::{LineKind, ProofLine};
use crate::encoder::Cnf;
use crate::lit::Var;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    /// Flip the sign of one literal of a used addition.
    NegateLiteral,
    /// Replace one literal of a used addition by a literal over another variable.
    ReplaceLiteral,
    /// Remove an addition that the empty clause depends on.
    DropNecessaryLine,
}

impl MutationKind {
    pub const ALL: [MutationKind; 3] = [MutationKind::NegateLiteral, MutationKind::ReplaceLiteral, MutationKind::DropNecessaryLine];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mutation {
    pub kind: MutationKind,
    /// 0-based proof line that was changed.
    pub line: usize,
    pub rejected: bool,
    /// The judge's view: still a valid refutation, a real corruption, or undecided.
    pub still_valid: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutationSummary {
    pub samples: usize,
    pub rejected: usize,
    /// Mutations the judge considers still valid refutations.
    pub benign: usize,
    /// Mutations the judge considers invalid, and how many of those were rejected.
    pub corrupt: usize,
    pub corrupt_rejected: usize,
    pub undecided: usize,
    /// Benign mutations the checker nevertheless rejected.
    pub benign_rejected: usize,
    /// `corrupt_rejected / corrupt`.
    pub rejection_rate: f64,
    /// `benign / samples`.
    pub benign_fraction: f64,
    /// Per kind: (samples, rejected).
    pub by_kind: BTreeMap<MutationKind, (usize, usize)>,
    pub mutations: Vec<Mutation>,
}

fn mutate(proof: &[ProofLine], kind: MutationKind, num_vars: usize, lemmas: &[usize], core: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, Vec<ProofLine>)> {
    match kind {
        MutationKind::DropNecessaryLine => {
            let &line = core.choose(rng)?;
            let mut p = proof.to_vec();
            p.remove(line);
            Some((line, p))
        }
        MutationKind::NegateLiteral | MutationKind::ReplaceLiteral => {
            let &line = lemmas.choose(rng)?;
            let mut p = proof.to_vec();
            let lits = &mut p[line].lits;
            let k = rng.gen_range(0..lits.len());
            if kind == MutationKind::NegateLiteral {
                lits[k] = !lits[k];
            } else {
                if lits.len() >= num_vars {
                    return None;
                }
                let fresh = loop {
                    let v = Var(rng.gen_range(0..num_vars as u32));
                    if lits.iter().all(|l| l.var() != v) {
                        break v.lit(rng.gen());
                    }
                };
                lits[k] = fresh;
            }
            Some((line, p))
        }
    }
}

/// Applies `samples` random single mutations (kinds in rotation) to a proof
/// that verifies and re-checks each corrupted proof from scratch. A mutation
/// need not break a proof (a dropped lemma may be re-derivable), so `judge`
/// independently classifies every mutated proof: `Some(true)` if it is still
/// a valid refutation, `Some(false)` if not, `None` if it cannot tell. Returns
/// `None` if the original proof does not verify.
pub fn mutation_harness(
    cnf: &Cnf,
    proof: &[ProofLine],
    samples: usize,
    seed: u64,
    judge: &mut dyn FnMut(&[ProofLine]) -> Option<bool>,
) -> Option<MutationSummary> {
    let base = check_drup_with_core(cnf, proof);
    if !base.report.is_verified() {
        return None;
    }
    // Literal mutations target non-empty lemmas the refutation actually uses;
    // changing an unused lemma is almost always harmless.
    let lemmas: Vec<usize> = base.core_lines.iter().copied().filter(|&i| proof[i].kind == LineKind::Add && !proof[i].lits.is_empty()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mutations = Vec::with_capacity(samples);
    let mut by_kind: BTreeMap<MutationKind, (usize, usize)> = BTreeMap::new();
    let mut attempts = 0;
    while mutations.len() < samples && attempts < samples * 10 {
        let kind = MutationKind::ALL[attempts % MutationKind::ALL.len()];
        attempts += 1;
        let Some((line, corrupted)) = mutate(proof, kind, cnf.num_vars(), &lemmas, &base.core_lines, &mut rng) else { continue };
        let rejected = !check_drup(cnf, &corrupted).is_verified();
        let still_valid = judge(&corrupted);
        let e = by_kind.entry(kind).or_default();
        e.0 += 1;
        e.1 += usize::from(rejected);
        mutations.push(Mutation { kind, line, rejected, still_valid });
    }
    let n = mutations.len();
    let count = |f: &dyn Fn(&Mutation) -> bool| mutations.iter().filter(|m| f(m)).count();
    let rejected = count(&|m| m.rejected);
    let benign = count(&|m| m.still_valid == Some(true));
    let corrupt = count(&|m| m.still_valid == Some(false));
    let corrupt_rejected = count(&|m| m.still_valid == Some(false) && m.rejected);
    let benign_rejected = count(&|m| m.still_valid == Some(true) && m.rejected);
    let ratio = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
    Some(MutationSummary {
        samples: n,
        rejected,
        benign,
        corrupt,
        corrupt_rejected,
        undecided: n - benign - corrupt,
        benign_rejected,
        rejection_rate: ratio(corrupt_rejected, corrupt),
        benign_fraction: if n == 0 { 0.0 } else { benign as f64 / n as f64 },
        by_kind,
        mutations,
    })
}
