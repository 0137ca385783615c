//! DRUP certificates: parsing, writing and independent forward checking.

mod check;
mod mutation;

use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lit::Lit;

pub use check::{check_drup, check_drup_reader, check_drup_with_core, CheckReport, CoreReport, Verdict};
pub use mutation::{mutation_harness, Mutation, MutationKind, MutationSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Add,
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProofLine {
    pub kind: LineKind,
    pub lits: Vec<Lit>,
}

impl ProofLine {
    pub fn add(lits: Vec<Lit>) -> Self {
        ProofLine { kind: LineKind::Add, lits }
    }

    pub fn delete(lits: Vec<Lit>) -> Self {
        ProofLine { kind: LineKind::Delete, lits }
    }
}

impl fmt::Display for ProofLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind == LineKind::Delete {
            f.write_str("d ")?;
        }
        for l in &self.lits {
            write!(f, "{l} ")?;
        }
        f.write_str("0")
    }
}

#[derive(Debug, Error)]
pub enum ProofParseError {
    #[error("proof line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Streaming parser for plain-text DRUP: one 0-terminated clause per line,
/// `d` marks a deletion, `c` lines are comments.
pub struct DrupReader<R> {
    lines: io::Lines<R>,
    lineno: usize,
}

impl<R: BufRead> DrupReader<R> {
    pub fn new(input: R) -> Self {
        DrupReader { lines: input.lines(), lineno: 0 }
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Option<ProofLine>, ProofParseError> {
    let err = |msg: String| ProofParseError::Syntax { line: lineno, msg };
    let mut t = line.trim();
    if t.is_empty() || t.starts_with('c') {
        return Ok(None);
    }
    let kind = match t.strip_prefix('d') {
        Some(rest) if rest.is_empty() || rest.starts_with(char::is_whitespace) => {
            t = rest;
            LineKind::Delete
        }
        _ => LineKind::Add,
    };
    let mut lits = Vec::new();
    let mut terminated = false;
    for tok in t.split_whitespace() {
        if terminated {
            return Err(err(format!("token {tok:?} after terminating 0")));
        }
        let n: i64 = tok.parse().map_err(|_| err(format!("bad literal {tok:?}")))?;
        if n == 0 {
            terminated = true;
        } else if n.unsigned_abs() > i32::MAX as u64 {
            return Err(err(format!("literal {n} out of range")));
        } else {
            lits.push(Lit::from_dimacs(n as i32));
        }
    }
    if !terminated {
        return Err(err("line is not terminated by 0".into()));
    }
    Ok(Some(ProofLine { kind, lits }))
}

impl<R: BufRead> Iterator for DrupReader<R> {
    type Item = Result<ProofLine, ProofParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.lineno += 1;
            match parse_line(&line, self.lineno) {
                Ok(None) => continue,
                Ok(Some(pl)) => return Some(Ok(pl)),
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

pub fn parse_drup<R: BufRead>(input: R) -> Result<Vec<ProofLine>, ProofParseError> {
    DrupReader::new(input).collect()
}

pub fn parse_drup_str(s: &str) -> Result<Vec<ProofLine>, ProofParseError> {
    parse_drup(s.as_bytes())
}

pub fn write_drup<W: Write>(lines: &[ProofLine], out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    for l in lines {
        writeln!(out, "{l}")?;
    }
    out.flush()
}
