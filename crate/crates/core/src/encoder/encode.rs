use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::cnf::{Clause, Cnf, Provenance};
use crate::lit::{Lit, Var, COLS};
use crate::matrix::{
    self, propagate_forced_zeros, support_sets, Cell, MatrixError, PartialMatrix, SupportSets,
    A_COLS, ROWS,
};

/// How clauses are simplified against the known cells before being counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingVariant {
    /// Every clause of each family is kept verbatim.
    WindowOnly,
    /// Clauses satisfied by a known cell are dropped.
    DropSatisfied,
    /// As `DropSatisfied`, and literals falsified by known cells are removed.
    FullSimplify,
}

impl EncodingVariant {
    pub const ALL: [EncodingVariant; 3] =
        [EncodingVariant::WindowOnly, EncodingVariant::DropSatisfied, EncodingVariant::FullSimplify];

    pub fn name(self) -> &'static str {
        match self {
            EncodingVariant::WindowOnly => "window-only",
            EncodingVariant::DropSatisfied => "drop-satisfied",
            EncodingVariant::FullSimplify => "full-simplify",
        }
    }
}

impl Default for EncodingVariant {
    fn default() -> Self {
        EncodingVariant::DropSatisfied
    }
}

impl fmt::Display for EncodingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncodingVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EncodingVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown encoding variant {s:?}"))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("{family} clause became empty at {at}; the fixture contradicts the axioms")]
    EmptyClause { family: &'static str, at: String },
    #[error("row window {0} outside 27..=51")]
    BadWindow(usize),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeOptions {
    pub variant: EncodingVariant,
    /// Rows 1..=max_row are encoded.
    pub max_row: usize,
    /// Apply forced-zero propagation to the matrix before encoding.
    pub propagate_zeros: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions { variant: EncodingVariant::default(), max_row: ROWS, propagate_zeros: true }
    }
}

impl EncodeOptions {
    pub fn rows(max_row: usize) -> EncodeOptions {
        EncodeOptions { max_row, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingStats {
    pub variant: EncodingVariant,
    pub rows: usize,
    pub pre_propagated: bool,
    pub forced_zeros: usize,
    pub num_vars: usize,
    pub num_unknown: usize,
    pub units: usize,
    pub amo: usize,
    pub row_alo: usize,
    pub col_alo: usize,
    pub total_distinct: usize,
}

impl EncodingStats {
    pub fn of(cnf: &Cnf, variant: EncodingVariant, rows: usize, pre_propagated: bool, forced_zeros: usize) -> Self {
        EncodingStats {
            variant,
            rows,
            pre_propagated,
            forced_zeros,
            num_vars: cnf.num_vars(),
            num_unknown: cnf.num_vars() - cnf.fixed_vars(),
            units: cnf.count(Provenance::Unit),
            amo: cnf.count(Provenance::AtMostOne),
            row_alo: cnf.count(Provenance::RowAtLeastOne),
            col_alo: cnf.count(Provenance::ColAtLeastOne),
            total_distinct: cnf.len(),
        }
    }
}

/// An assembled instance together with the matrix it was derived from.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub matrix: PartialMatrix,
    pub options: EncodeOptions,
    pub cnf: Cnf,
    pub stats: EncodingStats,
    pub fixture_hash: String,
}

impl Encoding {
    /// Header comments recorded in DIMACS output.
    pub fn dimacs_comments(&self) -> Vec<String> {
        vec![
            format!("generator pp10 {}", env!("CARGO_PKG_VERSION")),
            format!("fixture-sha256 {}", self.fixture_hash),
            format!("variant {}", self.options.variant),
            format!("rows {}", self.options.max_row),
            format!("pre-propagated {}", self.options.propagate_zeros),
        ]
    }
}

/// Sign of a literal on a cell, before simplification.
type CellLit = ((usize, usize), bool);

fn lit_of(((r, c), positive): CellLit) -> Lit {
    Var::cell(r, c).lit(positive)
}

fn truth(m: &PartialMatrix, ((r, c), positive): CellLit) -> Option<bool> {
    match m.get(r, c) {
        Cell::Unknown => None,
        Cell::One => Some(positive),
        Cell::Zero => Some(!positive),
    }
}

/// Applies the variant's simplification to one candidate clause.
fn simplify(
    m: &PartialMatrix,
    lits: &[CellLit],
    variant: EncodingVariant,
    family: &'static str,
) -> Result<Option<Clause>, EncodeError> {
    if variant == EncodingVariant::WindowOnly {
        return Ok(Clause::new(lits.iter().copied().map(lit_of).collect()));
    }
    let mut kept = Vec::with_capacity(lits.len());
    let mut all_false = true;
    for &l in lits {
        match truth(m, l) {
            Some(true) => return Ok(None),
            Some(false) => {
                if variant == EncodingVariant::DropSatisfied {
                    kept.push(lit_of(l));
                }
            }
            None => {
                all_false = false;
                kept.push(lit_of(l));
            }
        }
    }
    if all_false {
        let at = format!("{:?}", lits.iter().map(|l| l.0).collect::<Vec<_>>());
        return Err(EncodeError::EmptyClause { family, at });
    }
    Ok(Clause::new(kept))
}

/// One unit clause per known cell, row-major.
pub fn encode_units(m: &PartialMatrix) -> Vec<Clause> {
    let mut out = Vec::new();
    for r in 1..=m.rows() {
        for c in 1..=COLS {
            match m.get(r, c) {
                Cell::One => out.push(Clause::unit(Var::cell(r, c).lit(true))),
                Cell::Zero => out.push(Clause::unit(Var::cell(r, c).lit(false))),
                Cell::Unknown => {}
            }
        }
    }
    out
}

/// At-most-one-intersection clauses over the given rows and columns (both
/// ascending), in lexicographic `(i, j, k, l)` order.
pub fn at_most_one_over(
    m: &PartialMatrix,
    rows: &[usize],
    cols: &[usize],
    variant: EncodingVariant,
) -> Result<Vec<Clause>, EncodeError> {
    let mut out = Vec::new();
    let mut usable = Vec::with_capacity(cols.len());
    for (a, &i) in rows.iter().enumerate() {
        for &j in &rows[a + 1..] {
            usable.clear();
            if variant == EncodingVariant::WindowOnly {
                usable.extend_from_slice(cols);
            } else {
                // A column where either row is known Zero satisfies every quad using it.
                usable.extend(
                    cols.iter().copied().filter(|&c| m.get(i, c) != Cell::Zero && m.get(j, c) != Cell::Zero),
                );
            }
            for (b, &k) in usable.iter().enumerate() {
                for &l in &usable[b + 1..] {
                    let quad = [((i, k), false), ((i, l), false), ((j, k), false), ((j, l), false)];
                    if let Some(c) = simplify(m, &quad, variant, "at-most-one")? {
                        out.push(c);
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn encode_at_most_one(m: &PartialMatrix, variant: EncodingVariant) -> Result<Vec<Clause>, EncodeError> {
    let rows: Vec<usize> = (1..=m.rows()).collect();
    let cols: Vec<usize> = (1..=COLS).collect();
    at_most_one_over(m, &rows, &cols, variant)
}

/// Every medium row meets every light row: one clause per `(i, j)` over row
/// `j` restricted to the support of row `i`.
pub fn encode_at_least_one_rows(
    m: &PartialMatrix,
    s: &SupportSets,
    variant: EncodingVariant,
) -> Result<Vec<Clause>, EncodeError> {
    let mut out = Vec::new();
    for support in s.rows.values() {
        for j in 22..=m.rows() {
            let lits: Vec<CellLit> = support.iter().map(|&k| ((j, k), true)).collect();
            if let Some(c) = simplify(m, &lits, variant, "row at-least-one")? {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Every selected A column meets every C column: one clause per `(k, l)`
/// over column `l` restricted to the rows of column `k` within the window.
/// Columns whose light support falls entirely outside the window are skipped.
pub fn encode_at_least_one_cols(
    m: &PartialMatrix,
    s: &SupportSets,
    variant: EncodingVariant,
) -> Result<Vec<Clause>, EncodeError> {
    let mut out = Vec::new();
    for (&k, light) in &s.cols {
        if light.is_empty() {
            continue;
        }
        let support = m.col_ones(k);
        for l in A_COLS + 1..=COLS {
            let lits: Vec<CellLit> = support.iter().map(|&i| ((i, l), true)).collect();
            if let Some(c) = simplify(m, &lits, variant, "column at-least-one")? {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Builds the instance for rows `1..=opts.max_row` in canonical clause order:
/// units, at-most-one, row at-least-one, column at-least-one.
pub fn assemble(m: &PartialMatrix, opts: &EncodeOptions) -> Result<Encoding, EncodeError> {
    if !(27..=ROWS).contains(&opts.max_row) || opts.max_row > m.rows() {
        return Err(EncodeError::BadWindow(opts.max_row));
    }
    let fixture_hash = m.content_hash();
    let window = m.restrict_rows(opts.max_row);
    let (window, forced) = if opts.propagate_zeros {
        propagate_forced_zeros(&window)?
    } else {
        (window, 0)
    };
    let s = support_sets(&window);

    let mut cnf = Cnf::new(opts.max_row * COLS);
    cnf.extend(encode_units(&window), Provenance::Unit);
    cnf.extend(encode_at_most_one(&window, opts.variant)?, Provenance::AtMostOne);
    cnf.extend(encode_at_least_one_rows(&window, &s, opts.variant)?, Provenance::RowAtLeastOne);
    cnf.extend(encode_at_least_one_cols(&window, &s, opts.variant)?, Provenance::ColAtLeastOne);

    let stats = EncodingStats::of(&cnf, opts.variant, opts.max_row, opts.propagate_zeros, forced);
    Ok(Encoding { matrix: window, options: *opts, cnf, stats, fixture_hash })
}

/// Convenience: the instance for the shipped fixture.
pub fn encode_fixture(opts: &EncodeOptions) -> Result<Encoding, EncodeError> {
    assemble(&matrix::PartialMatrix::fixture(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> PartialMatrix {
        PartialMatrix::fixture()
    }

    #[test]
    fn unit_counts() {
        let m = fixture();
        assert_eq!(encode_units(&m).len(), m.known_count());
        assert!(encode_units(&PartialMatrix::unknown(51)).is_empty());
        let (p, forced) = propagate_forced_zeros(&m).unwrap();
        assert_eq!(encode_units(&p).len(), m.known_count() + forced);
    }

    #[test]
    fn satisfied_quad_is_dropped() {
        let m = fixture();
        let q = at_most_one_over(&m, &[22, 23], &[16, 17], EncodingVariant::WindowOnly).unwrap();
        assert_eq!(q.len(), 1);
        // (22,17) and (23,16) are Unknown in the raw fixture but forced Zero after propagation.
        let (p, _) = propagate_forced_zeros(&m).unwrap();
        assert_eq!(p.get(22, 17), Cell::Zero);
        for v in [EncodingVariant::DropSatisfied, EncodingVariant::FullSimplify] {
            assert!(at_most_one_over(&p, &[22, 23], &[16, 17], v).unwrap().is_empty());
        }
    }

    #[test]
    fn unknown_quad_is_kept_whole() {
        let m = fixture();
        // Columns 46 and 47 are Unknown in rows 22 and 23.
        for v in EncodingVariant::ALL {
            let q = at_most_one_over(&m, &[22, 23], &[46, 47], v).unwrap();
            assert_eq!(q.len(), 1);
            assert_eq!(q[0].len(), 4);
        }
    }

    #[test]
    fn full_simplify_drops_known_one_literals() {
        let m = fixture();
        // Row 22 has its diagonal One at column 16; row 7 is fully known.
        let q = at_most_one_over(&m, &[10, 22], &[16, 17], EncodingVariant::FullSimplify).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].lits(), &[Var::cell(22, 17).lit(false)]);
    }

    #[test]
    fn empty_clause_detected() {
        // Rows 22 and 23 both One at columns 1 and 16.
        let m = fixture().with_cell(23, 16, Cell::One);
        let err = at_most_one_over(&m, &[22, 23], &[1, 16], EncodingVariant::FullSimplify).unwrap_err();
        assert!(matches!(err, EncodeError::EmptyClause { .. }));
    }

    #[test]
    fn row_alo_candidates_and_drop() {
        let m = fixture();
        let s = support_sets(&m);
        let all = encode_at_least_one_rows(&m, &s, EncodingVariant::WindowOnly).unwrap();
        assert_eq!(all.len(), 15 * 30);
        let dropped = encode_at_least_one_rows(&m, &s, EncodingVariant::DropSatisfied).unwrap();
        // (7, 22) is satisfied through column 1.
        let c722: Vec<Lit> = s.rows[&7].iter().map(|&k| Var::cell(22, k).lit(true)).collect();
        let c722 = Clause::new(c722).unwrap();
        assert!(all.contains(&c722));
        assert!(!dropped.contains(&c722));
    }

    #[test]
    fn col_alo_candidates() {
        let m = fixture();
        let s = support_sets(&m);
        let all = encode_at_least_one_cols(&m, &s, EncodingVariant::WindowOnly).unwrap();
        assert_eq!(all.len(), 5 * 60);
        let full = encode_at_least_one_cols(&m, &s, EncodingVariant::FullSimplify).unwrap();
        let c46: Vec<Lit> = (22..=27)
            .filter(|&r| m.get(r, 46) == Cell::Unknown)
            .map(|r| Var::cell(r, 46).lit(true))
            .collect();
        assert!(!c46.is_empty());
        assert!(full.contains(&Clause::new(c46).unwrap()));
        // (1, 16) is satisfied by the diagonal One at (22, 16).
        let c16: Vec<Lit> = m.col_ones(1).iter().map(|&r| Var::cell(r, 16).lit(true)).collect();
        assert!(all.contains(&Clause::new(c16.clone()).unwrap()));
        assert!(full.iter().all(|c| c.lits().iter().all(|l| l.var() != Var::cell(22, 16))));
    }

    #[test]
    fn variant_names_round_trip() {
        for v in EncodingVariant::ALL {
            assert_eq!(v.name().parse::<EncodingVariant>().unwrap(), v);
        }
        assert!("bogus".parse::<EncodingVariant>().is_err());
    }

    #[test]
    fn window_bounds() {
        let m = fixture();
        assert_eq!(assemble(&m, &EncodeOptions::rows(26)).unwrap_err(), EncodeError::BadWindow(26));
        assert_eq!(assemble(&m, &EncodeOptions::rows(52)).unwrap_err(), EncodeError::BadWindow(52));
        let e = assemble(&m, &EncodeOptions::rows(27)).unwrap();
        assert_eq!(e.cnf.num_vars(), 27 * 75);
    }
}
