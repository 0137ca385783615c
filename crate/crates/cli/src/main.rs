use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use pp10::encoder::{assemble, read_dimacs, write_dimacs, EncodeOptions, EncodingVariant};
use pp10::lit::{Lit, COLS};
use pp10::matrix::{validate_structure, PartialMatrix, FIXTURE};
use pp10::pipeline::{self, phase1, PipelineError, RunConfig, RunStatus};
use pp10::proof::check_drup_reader;
use pp10::sat::{DrupWriter, SolveError, SolveOutcome, Solver, SolverConfig};
use pp10::symmetry::automorphisms;

const OUTPUT_DIR_ENV: &str = "PP10_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "pp10", version, about = "Certified search for weight-15 codewords of a projective plane of order ten")]
struct Cli {
    /// Seed for every stochastic choice of the solver.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural invariants of a fixture file.
    FixtureValidate {
        /// Defaults to the built-in fixture.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write the CNF instance for rows 1..=N, plus its statistics as JSON.
    Encode {
        #[arg(long, default_value_t = 51)]
        rows: usize,
        #[arg(long, default_value_t = EncodingVariant::default())]
        variant: EncodingVariant,
        /// Skip forced-zero propagation before encoding.
        #[arg(long)]
        no_propagate: bool,
        #[arg(short, long)]
        output: PathBuf,
        /// Defaults to the output path with `.stats.json` appended.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Solve a DIMACS file with the embedded solver.
    Solve {
        cnf: PathBuf,
        /// File of DIMACS literals to assume.
        #[arg(long)]
        assume: Option<PathBuf>,
        /// Write a DRUP proof here.
        #[arg(long)]
        proof: Option<PathBuf>,
        /// Write the model (if any) as JSON here.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        conflicts: Option<u64>,
        #[arg(long, value_name = "SECONDS")]
        timeout: Option<u64>,
    },
    /// Enumerate the completions of rows 22-27.
    Enumerate {
        #[arg(long, default_value_t = 27)]
        rows: usize,
        /// Block whole orbits under the column-1 stabilizer and keep one record per orbit.
        #[arg(long)]
        block_symmetric: bool,
        /// Also enumerate without symmetry and compare (with --block-symmetric).
        #[arg(long, requires = "block_symmetric")]
        cross_check: bool,
        #[arg(short, long, default_value = "completions.json")]
        output: PathBuf,
    },
    /// Run the full verification flow.
    Pipeline {
        /// TOML run configuration.
        #[arg(long, conflicts_with = "reproduce")]
        config: Option<PathBuf>,
        /// 27-row enumeration, 45-row witness, 51-row incremental and certified monolithic runs.
        #[arg(long)]
        reproduce: bool,
        /// Overrides the configured directory (and the environment variable).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Verify a DRUP proof against a DIMACS formula.
    CheckProof {
        cnf: PathBuf,
        proof: PathBuf,
        /// Write the check report as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Render a model file as a fixture-format matrix.
    ShowWitness {
        model: PathBuf,
        /// Report structural findings on standard error.
        #[arg(long)]
        validate: bool,
    },
}

enum Failure {
    Logical(String),
    Usage(String),
    Limit(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Logical(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Limit(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Logical(m) | Failure::Usage(m) | Failure::Limit(m) => m,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_resource_limit() {
            Failure::Limit(e.to_string())
        } else if matches!(e, PipelineError::Config(_)) {
            Failure::Usage(e.to_string())
        } else {
            Failure::Logical(e.to_string())
        }
    }
}

type CmdResult = Result<(), Failure>;

fn io_fail(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Logical(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(io_fail(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    fs::write(path, text).map_err(io_fail(path))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::FixtureValidate { fixture, json } => fixture_validate(fixture, json),
        Command::Encode { rows, variant, no_propagate, output, stats } => encode(rows, variant, !no_propagate, &output, stats),
        Command::Solve { cnf, assume, proof, model, conflicts, timeout } => {
            let config = SolverConfig { seed: cli.seed, conflict_budget: conflicts, time_budget: timeout.map(Duration::from_secs), ..SolverConfig::default() };
            solve(&cnf, assume, proof, model, config)
        }
        Command::Enumerate { rows, block_symmetric, cross_check, output } => enumerate(rows, block_symmetric, cross_check, &output, cli.seed),
        Command::Pipeline { config, reproduce, output_dir, jobs } => run_pipeline(config, reproduce, output_dir, jobs, cli.seed),
        Command::CheckProof { cnf, proof, report } => check_proof(&cnf, &proof, report),
        Command::ShowWitness { model, validate } => show_witness(&model, validate),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pp10: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn fixture_validate(fixture: Option<PathBuf>, json: Option<PathBuf>) -> CmdResult {
    let text = match &fixture {
        Some(p) => read_text(p)?,
        None => FIXTURE.to_string(),
    };
    let m = PartialMatrix::parse_grid(&text).map_err(|e| Failure::Logical(e.to_string()))?;
    let report = validate_structure(&m);
    if let Some(p) = json {
        write_json(&p, &report)?;
    }
    print!("{}", report.to_text());
    println!("{} rows, {} known cells, {} unknown, {} findings", m.rows(), m.known_count(), m.unknown_count(), report.findings.len());
    if report.is_ok() {
        Ok(())
    } else {
        Err(Failure::Logical("fixture violates its invariants".into()))
    }
}

fn encode(rows: usize, variant: EncodingVariant, propagate_zeros: bool, output: &Path, stats: Option<PathBuf>) -> CmdResult {
    let opts = EncodeOptions { variant, max_row: rows, propagate_zeros };
    let enc = assemble(&PartialMatrix::fixture(), &opts).map_err(|e| Failure::Usage(e.to_string()))?;
    let f = File::create(output).map_err(io_fail(output))?;
    let mut w = BufWriter::new(f);
    write_dimacs(&enc.cnf, &enc.dimacs_comments(), &mut w).and_then(|_| w.flush()).map_err(io_fail(output))?;
    let stats_path = stats.unwrap_or_else(|| PathBuf::from(format!("{}.stats.json", output.display())));
    write_json(&stats_path, &enc.stats)?;
    let s = &enc.stats;
    println!(
        "{} rows, variant {}: {} variables ({} unknown), {} clauses = {} units + {} at-most-one + {} row at-least-one + {} column at-least-one",
        s.rows, s.variant, s.num_vars, s.num_unknown, s.total_distinct, s.units, s.amo, s.row_alo, s.col_alo
    );
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    satisfiable: bool,
    /// Signed DIMACS literals, one per variable.
    model: Vec<i32>,
}

fn solve(cnf_path: &Path, assume: Option<PathBuf>, proof: Option<PathBuf>, model_out: Option<PathBuf>, config: SolverConfig) -> CmdResult {
    let f = File::open(cnf_path).map_err(io_fail(cnf_path))?;
    let file = read_dimacs(BufReader::new(f)).map_err(|e| Failure::Logical(format!("{}: {e}", cnf_path.display())))?;
    let assumptions: Vec<Lit> = match &assume {
        Some(p) => {
            let mut lits = Vec::new();
            for tok in read_text(p)?.split_whitespace() {
                let n: i32 = tok.parse().map_err(|_| Failure::Usage(format!("{}: bad literal {tok:?}", p.display())))?;
                if n != 0 {
                    lits.push(Lit::from_dimacs(n));
                }
            }
            lits
        }
        None => Vec::new(),
    };
    let mut s = Solver::new(config);
    if let Some(p) = &proof {
        s.attach_proof(Box::new(DrupWriter::new(File::create(p).map_err(io_fail(p))?)));
    }
    s.reserve_vars(file.cnf.num_vars());
    for c in file.cnf.clauses() {
        s.add_clause(c.lits());
    }
    let outcome = match s.solve(&assumptions) {
        Ok(o) => o,
        Err(SolveError::ResourceLimit { conflicts }) => {
            println!("s UNKNOWN");
            return Err(Failure::Limit(format!("budget exhausted after {conflicts} conflicts")));
        }
        Err(e) => return Err(Failure::Logical(e.to_string())),
    };
    drop(s.detach_proof());
    let stats = s.stats();
    match &outcome {
        SolveOutcome::Sat(_) => println!("s SATISFIABLE"),
        SolveOutcome::Unsat => println!("s UNSATISFIABLE"),
        SolveOutcome::UnsatUnderAssumptions(core) => {
            println!("s UNSATISFIABLE under assumptions");
            println!("core {}", core.iter().map(|l| l.to_dimacs().to_string()).collect::<Vec<_>>().join(" "));
        }
    }
    println!("{} conflicts, {} decisions, {} propagations", stats.conflicts, stats.decisions, stats.propagations);
    if let Some(p) = model_out {
        let model = outcome.model().map(|m| m.iter().enumerate().map(|(i, &b)| if b { i as i32 + 1 } else { -(i as i32 + 1) }).collect()).unwrap_or_default();
        write_json(&p, &ModelFile { satisfiable: outcome.is_sat(), model })?;
    }
    Ok(())
}

fn enumerate(rows: usize, block_symmetric: bool, cross_check: bool, output: &Path, seed: u64) -> CmdResult {
    if rows != 27 {
        return Err(Failure::Usage(format!("completions are enumerated on the 27-row instance, not {rows}")));
    }
    let cfg = RunConfig { seed, ..RunConfig::default() };
    let enc = assemble(&PartialMatrix::fixture(), &cfg.encode_options(rows)).map_err(|e| Failure::Logical(e.to_string()))?;
    let group = if block_symmetric {
        let g = automorphisms(&enc.matrix.restrict_rows(21)).map_err(|e| Failure::Logical(e.to_string()))?;
        Some(g.stabilizer(1))
    } else {
        None
    };
    let out = phase1(&enc, group.as_ref(), cross_check, &cfg.solver())?;
    write_json(output, &out.records)?;
    println!("{} records covering {} completions", out.records.len(), out.total);
    if let Some(n) = out.raw_count.filter(|_| cross_check) {
        println!("cross-check: raw enumeration found {n} completions, equal to the union of the orbits");
    }
    Ok(())
}

fn run_pipeline(config: Option<PathBuf>, reproduce: bool, output_dir: Option<PathBuf>, jobs: Option<usize>, seed: u64) -> CmdResult {
    let mut cfg = match &config {
        Some(p) => RunConfig::from_toml_str(&read_text(p)?)?,
        None => RunConfig { seed, ..RunConfig::default() },
    };
    if reproduce {
        cfg.rows = 51;
        cfg.symmetry = true;
        cfg.phase2_mode = pipeline::Phase2Mode::Both;
        cfg.stages = pipeline::Stages { phase1: true, phase2: true, baseline: false, witness45: true };
    }
    if let Some(dir) = output_dir.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from)) {
        cfg.output_dir = dir;
    }
    if let Some(j) = jobs {
        cfg.jobs = j;
    }
    let report = pipeline::run(&cfg)?;
    let dir = pipeline::run_dir(&cfg, &report);
    print_summary(&report, &dir);
    match report.status {
        RunStatus::Success => Ok(()),
        RunStatus::Failed => Err(Failure::Logical(report.failures.join("; "))),
        RunStatus::ResourceLimit => Err(Failure::Limit("a stage ran out of budget".into())),
    }
}

fn print_summary(r: &pipeline::PipelineReport, dir: &Path) {
    println!("run {} -> {}", r.run_id, dir.display());
    for e in &r.encodings {
        println!("encoding {} rows: {} vars, {} unknown, {} units, {} clauses", e.rows, e.num_vars, e.num_unknown, e.units, e.total_distinct);
    }
    if let Some(g) = &r.groups {
        println!("groups: known block {}, heavy block {}, column-1 stabilizer {}", g.known_block, g.heavy_block, g.column1_stabilizer);
    }
    if let Some(p) = &r.phase1 {
        println!("phase 1: {} inequivalent of {} completions, orbit sizes {:?}", p.representatives, p.total_completions, p.orbit_size_histogram);
        if let Some(n) = p.raw_enumeration {
            println!("phase 1 cross-check: {n} raw completions");
        }
    }
    if let Some(p) = &r.phase2_incremental {
        println!("phase 2 incremental: {} unsat, {} sat, {} out of budget", p.unsat, p.sat, p.resource_limit);
    }
    for (label, rep) in [("phase 2 monolithic", &r.phase2_monolithic), ("baseline", &r.baseline)] {
        if let Some(rep) = rep {
            let verdict = rep.check.as_ref().map(|c| if c.is_verified() { "verified" } else { "REJECTED" }).unwrap_or("not checked");
            println!("{label}: {:?} after {} conflicts, {} blocking clauses, proof {} lines {verdict}", rep.outcome, rep.conflicts, rep.blocking_clauses, rep.proof_lines);
        }
    }
    if let Some(w) = &r.witness45 {
        println!("45-row witness: {:?}, valid {}, representative {:?}", w.outcome, w.valid, w.representative_index);
    }
    for (stage, secs) in &r.timings {
        println!("time {stage}: {secs:.2}s");
    }
    println!("status: {:?}", r.status);
    for f in &r.failures {
        println!("failure: {f}");
    }
}

fn check_proof(cnf_path: &Path, proof_path: &Path, report: Option<PathBuf>) -> CmdResult {
    let f = File::open(cnf_path).map_err(io_fail(cnf_path))?;
    let file = read_dimacs(BufReader::new(f)).map_err(|e| Failure::Logical(format!("{}: {e}", cnf_path.display())))?;
    let f = File::open(proof_path).map_err(io_fail(proof_path))?;
    let rep = check_drup_reader(&file.cnf, BufReader::new(f)).map_err(|e| Failure::Logical(format!("{}: {e}", proof_path.display())))?;
    if let Some(p) = report {
        write_json(&p, &rep)?;
    }
    println!(
        "{} steps checked ({} additions, {} deletions, {} absent deletions), {} units propagated",
        rep.steps_checked, rep.additions, rep.deletions, rep.absent_deletions, rep.units_propagated
    );
    match &rep.verdict {
        pp10::proof::Verdict::Verified => {
            println!("s VERIFIED");
            Ok(())
        }
        pp10::proof::Verdict::Failed { step, reason } => {
            println!("s NOT VERIFIED");
            Err(Failure::Logical(format!("step {step}: {reason}")))
        }
    }
}

fn show_witness(path: &Path, validate: bool) -> CmdResult {
    let file: ModelFile = serde_json::from_str(&read_text(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if !file.satisfiable {
        return Err(Failure::Logical("model file records an unsatisfiable result".into()));
    }
    let rows = file.model.len() / COLS;
    if file.model.len() % COLS != 0 || !(1..=51).contains(&rows) {
        return Err(Failure::Usage(format!("{} values do not describe whole rows of {COLS}", file.model.len())));
    }
    let mut value = vec![false; file.model.len()];
    for &l in &file.model {
        let i = l.unsigned_abs() as usize;
        if i == 0 || i > value.len() {
            return Err(Failure::Usage(format!("literal {l} out of range")));
        }
        value[i - 1] = l > 0;
    }
    let fixture = PartialMatrix::fixture().restrict_rows(rows);
    let m = fixture.apply_model(|v| value.get(v.index()).copied()).map_err(|e| Failure::Logical(e.to_string()))?;
    let contradictions = (1..=rows)
        .flat_map(|r| (1..=COLS).map(move |c| (r, c)))
        .filter(|&(r, c)| fixture.get(r, c).is_known() && fixture.is_one(r, c) != value[(r - 1) * COLS + c - 1])
        .count();
    print!("{}", m.to_fixture_string());
    if validate {
        let report = pp10::matrix::validate_partial_plane(&m);
        eprint!("{}", report.to_text());
        eprintln!("{} findings, {contradictions} cells contradict the fixture", report.findings.len());
        if !report.is_ok() || contradictions > 0 {
            return Err(Failure::Logical("witness is not a valid partial plane".into()));
        }
    }
    Ok(())
}
