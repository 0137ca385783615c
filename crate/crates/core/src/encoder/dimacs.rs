//! Plain-text DIMACS CNF reading and writing.
//!
//! Besides free-form comments, the writer records a `c sections` line holding
//! run lengths of clause provenance so that a round trip preserves statistics.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::cnf::{Clause, Cnf, Provenance};
use crate::lit::Lit;

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> DimacsError {
    DimacsError::Parse { line, msg: msg.into() }
}

fn section_runs(cnf: &Cnf) -> Vec<(Provenance, usize)> {
    let mut runs: Vec<(Provenance, usize)> = Vec::new();
    for &p in cnf.provenance() {
        match runs.last_mut() {
            Some((q, n)) if *q == p => *n += 1,
            _ => runs.push((p, 1)),
        }
    }
    runs
}

pub fn write_dimacs<W: Write>(cnf: &Cnf, comments: &[String], mut out: W) -> io::Result<()> {
    for c in comments {
        writeln!(out, "c {c}")?;
    }
    let runs = section_runs(cnf);
    if !runs.is_empty() {
        let body: Vec<String> = runs.iter().map(|(p, n)| format!("{}:{n}", p.name())).collect();
        writeln!(out, "c sections {}", body.join(" "))?;
    }
    writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.len())?;
    let mut line = String::new();
    for clause in cnf.clauses() {
        line.clear();
        for l in clause.lits() {
            line.push_str(&l.to_dimacs().to_string());
            line.push(' ');
        }
        line.push('0');
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn dimacs_string(cnf: &Cnf, comments: &[String]) -> String {
    let mut buf = Vec::new();
    write_dimacs(cnf, comments, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

/// A parsed DIMACS file: the formula plus its comment lines (without the `c `).
#[derive(Debug, Clone)]
pub struct DimacsFile {
    pub cnf: Cnf,
    pub comments: Vec<String>,
}

impl DimacsFile {
    /// Value of a `c <key> <value>` comment.
    pub fn comment_value(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| c.strip_prefix(key)?.strip_prefix(' '))
    }
}

pub fn read_dimacs<R: BufRead>(input: R) -> Result<DimacsFile, DimacsError> {
    let mut comments = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut raw: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut last_line = 0;

    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        last_line = lineno;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                comments.push(rest.trim_start().to_string());
                continue;
            }
        }
        if t.starts_with('%') {
            // Some generators terminate files with "%\n0".
            break;
        }
        if let Some(rest) = t.strip_prefix('p') {
            if header.is_some() {
                return Err(parse_err(lineno, "duplicate problem line"));
            }
            let f: Vec<&str> = rest.split_whitespace().collect();
            if f.len() != 3 || f[0] != "cnf" {
                return Err(parse_err(lineno, format!("malformed problem line {t:?}")));
            }
            let vars = f[1].parse().map_err(|_| parse_err(lineno, "bad variable count"))?;
            let clauses = f[2].parse().map_err(|_| parse_err(lineno, "bad clause count"))?;
            header = Some((vars, clauses));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(parse_err(lineno, "clause before problem line"));
        };
        for tok in t.split_whitespace() {
            let n: i64 = tok.parse().map_err(|_| parse_err(lineno, format!("bad literal {tok:?}")))?;
            if n == 0 {
                raw.push(std::mem::take(&mut current));
            } else {
                if n.unsigned_abs() as usize > vars {
                    return Err(parse_err(lineno, format!("literal {n} exceeds {vars} variables")));
                }
                current.push(Lit::from_dimacs(n as i32));
            }
        }
    }
    let Some((vars, count)) = header else {
        return Err(parse_err(last_line.max(1), "missing problem line"));
    };
    if !current.is_empty() {
        return Err(parse_err(last_line, "last clause is not terminated by 0"));
    }
    if raw.len() != count {
        return Err(parse_err(
            last_line,
            format!("header declares {count} clauses, found {}", raw.len()),
        ));
    }

    let provenance = comments
        .iter()
        .find_map(|c| c.strip_prefix("sections "))
        .and_then(|s| parse_sections(s, raw.len()));
    let mut cnf = Cnf::new(vars);
    let mut provs = provenance.into_iter().flatten();
    for lits in raw {
        let p = provs.next().unwrap_or(Provenance::Input);
        if let Some(c) = Clause::new(lits) {
            cnf.push(c, p);
        }
    }
    comments.retain(|c| !c.starts_with("sections "));
    Ok(DimacsFile { cnf, comments })
}

fn parse_sections(s: &str, total: usize) -> Option<Vec<Provenance>> {
    let mut out = Vec::with_capacity(total);
    for part in s.split_whitespace() {
        let (name, n) = part.split_once(':')?;
        let p = Provenance::from_name(name)?;
        let n: usize = n.parse().ok()?;
        out.extend(std::iter::repeat(p).take(n));
    }
    (out.len() == total).then_some(out)
}
