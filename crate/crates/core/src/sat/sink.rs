//! Destinations for the solver's DRUP stream.

use std::fmt::Write as _;
use std::io::{self, BufWriter, Write};
use std::sync::{Arc, Mutex};

use crate::lit::Lit;
use crate::proof::{LineKind, ProofLine};

pub trait ProofSink: Send {
    fn add(&mut self, lits: &[Lit]);
    fn delete(&mut self, lits: &[Lit]);
    /// Flushes buffered output and reports the first I/O error seen, if any.
    fn finish(&mut self) -> io::Result<()>;
}

/// Writes plain-text DRUP.
pub struct DrupWriter<W: Write + Send> {
    out: BufWriter<W>,
    error: Option<io::Error>,
    buf: String,
    lines: u64,
}

impl<W: Write + Send> DrupWriter<W> {
    pub fn new(out: W) -> Self {
        DrupWriter { out: BufWriter::with_capacity(1 << 16, out), error: None, buf: String::new(), lines: 0 }
    }

    pub fn lines(&self) -> u64 {
        self.lines
    }

    fn emit(&mut self, prefix: &str, lits: &[Lit]) {
        if self.error.is_some() {
            return;
        }
        self.buf.clear();
        self.buf.push_str(prefix);
        for l in lits {
            let _ = write!(self.buf, "{} ", l.to_dimacs());
        }
        self.buf.push_str("0\n");
        self.lines += 1;
        if let Err(e) = self.out.write_all(self.buf.as_bytes()) {
            self.error = Some(e);
        }
    }
}

impl<W: Write + Send> ProofSink for DrupWriter<W> {
    fn add(&mut self, lits: &[Lit]) {
        self.emit("", lits);
    }

    fn delete(&mut self, lits: &[Lit]) {
        self.emit("d ", lits);
    }

    fn finish(&mut self) -> io::Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()
    }
}

/// Collects proof lines in memory; clones share the same buffer.
#[derive(Clone, Default)]
pub struct MemoryProof {
    lines: Arc<Mutex<Vec<ProofLine>>>,
}

impl MemoryProof {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lines(&self) -> Vec<ProofLine> {
        self.lines.lock().expect("proof buffer poisoned").clone()
    }
}

impl ProofSink for MemoryProof {
    fn add(&mut self, lits: &[Lit]) {
        self.lines.lock().expect("proof buffer poisoned").push(ProofLine { kind: LineKind::Add, lits: lits.to_vec() });
    }

    fn delete(&mut self, lits: &[Lit]) {
        self.lines
            .lock()
            .expect("proof buffer poisoned")
            .push(ProofLine { kind: LineKind::Delete, lits: lits.to_vec() });
    }

    fn finish(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Fails every write; used to exercise error reporting.
pub struct FailingSink;

impl ProofSink for FailingSink {
    fn add(&mut self, _: &[Lit]) {}
    fn delete(&mut self, _: &[Lit]) {}
    fn finish(&mut self) -> io::Result<()> {
        Err(io::Error::new(io::ErrorKind::Other, "sink rejected write"))
    }
}
