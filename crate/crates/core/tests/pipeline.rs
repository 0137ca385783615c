use std::collections::BTreeSet;
use std::fs;
use std::sync::OnceLock;

use pp10::encoder::{encode_fixture, Cnf, EncodeOptions, Encoding, Provenance};
use pp10::matrix::{validate_partial_plane, Finding, MEDIUM_ROWS};
use pp10::pipeline::{
    self, assess_model, drop_clauses, monolithic_instance, phase1, phase2_incremental, refute, run, sha256_file, verify_proof_file, witness45, Extension, FaultInjection, Phase1Output, Phase2Mode, RunConfig, RunStatus,
    SolveStatus, Stages,
};
use pp10::sat::SolverConfig;
use pp10::symmetry::{automorphisms, Completion, CompletionSpace, SymmetryGroup};

fn enc(rows: usize) -> &'static Encoding {
    static E27: OnceLock<Encoding> = OnceLock::new();
    static E45: OnceLock<Encoding> = OnceLock::new();
    static E51: OnceLock<Encoding> = OnceLock::new();
    let cell = match rows {
        27 => &E27,
        45 => &E45,
        51 => &E51,
        _ => unreachable!(),
    };
    cell.get_or_init(|| encode_fixture(&EncodeOptions::rows(rows)).unwrap())
}

fn stab() -> &'static SymmetryGroup {
    static G: OnceLock<SymmetryGroup> = OnceLock::new();
    G.get_or_init(|| automorphisms(&enc(27).matrix.restrict_rows(21)).unwrap().stabilizer(1))
}

fn orbits() -> &'static Phase1Output {
    static P: OnceLock<Phase1Output> = OnceLock::new();
    P.get_or_init(|| phase1(enc(27), Some(stab()), false, &SolverConfig::default()).unwrap())
}

fn space() -> CompletionSpace {
    CompletionSpace::new(&enc(27).matrix)
}

#[test]
fn orbit_enumeration_matches_published_counts() {
    let p = orbits();
    assert_eq!(p.records.len(), 1021);
    assert_eq!(p.total, 42_496);
    assert_eq!(p.records.iter().map(|r| r.orbit_size).sum::<usize>(), p.total);
    // Each injected clause blocks one orbit member.
    assert_eq!(p.injected_clauses, p.total);
    let sp = space();
    for r in &p.records {
        assert_eq!(r.orbit_size * r.stabilizer_order, 48);
        assert_eq!(sp.canonical(stab(), &r.representative).unwrap(), r.representative);
    }
}

#[test]
fn enumeration_without_symmetry_covers_exactly_the_orbits() {
    let raw = phase1(enc(27), None, false, &SolverConfig::default()).unwrap();
    assert_eq!(raw.records.len(), 42_496);
    assert!(raw.records.iter().all(|r| r.orbit_size == 1));
    let raw: BTreeSet<Completion> = raw.records.into_iter().map(|r| r.representative).collect();
    let sp = space();
    let mut union = BTreeSet::new();
    for r in &orbits().records {
        union.extend(sp.orbit(stab(), &r.representative, true).unwrap().members.unwrap());
    }
    assert_eq!(raw, union);
}

#[test]
fn incremental_outcomes_do_not_depend_on_order_or_workers() {
    let reps: Vec<Completion> = orbits().representatives().into_iter().step_by(4).collect();
    let cfg = SolverConfig::default();
    let serial = phase2_incremental(&enc(51).cnf, &reps, 1, &cfg).unwrap();
    assert!(serial.iter().all(|e| *e == Extension::Unsat));
    let parallel = phase2_incremental(&enc(51).cnf, &reps, 3, &cfg).unwrap();
    assert_eq!(parallel, serial);
    let reversed: Vec<Completion> = reps.iter().rev().cloned().collect();
    let mut back = phase2_incremental(&enc(51).cnf, &reversed, 2, &cfg).unwrap();
    back.reverse();
    assert_eq!(back, serial);
}

#[test]
fn no_representatives_is_vacuous() {
    assert!(phase2_incremental(&enc(51).cnf, &[], 4, &SolverConfig::default()).unwrap().is_empty());
}

#[test]
fn monolithic_instance_has_one_blocking_clause_per_non_representative() {
    let p = orbits();
    let (cnf, added) = monolithic_instance(&enc(51).cnf, &space(), stab(), &p.records).unwrap();
    assert_eq!(added, 41_475);
    assert_eq!(added, p.total - p.records.len());
    assert_eq!(cnf.count(Provenance::Blocking), added);
    assert_eq!(cnf.len(), enc(51).cnf.len() + added);
    let (same, none) = monolithic_instance(&enc(51).cnf, &space(), stab(), &[]).unwrap();
    assert_eq!(none, 0);
    assert_eq!(same, enc(51).cnf);
}

#[test]
fn blocking_every_completion_gives_a_certified_refutation() {
    // The 27-row instance with all 42,496 completions blocked has no model.
    let sp = space();
    let mut cnf: Cnf = enc(27).cnf.clone();
    for r in &orbits().records {
        for m in sp.orbit(stab(), &r.representative, true).unwrap().members.unwrap() {
            cnf.push(m.blocking_clause(), Provenance::Blocking);
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let proof = dir.path().join("p.drup");
    let out = refute(&cnf, &SolverConfig::default(), &proof).unwrap();
    assert_eq!(out.status, SolveStatus::Unsat);
    assert!(out.proof_lines > 0);
    assert!(verify_proof_file(&cnf, &proof).unwrap().is_verified());
    // Without the blocking clauses the same proof must not check.
    assert!(!verify_proof_file(&enc(27).cnf, &proof).unwrap().is_verified());
}

#[test]
fn witness_is_a_partial_plane_in_a_known_orbit() {
    let (status, filled) = witness45(enc(45), &SolverConfig::default()).unwrap();
    assert_eq!(status, SolveStatus::Sat);
    let m = filled.unwrap();
    assert!(validate_partial_plane(&m).is_ok());
    for medium in MEDIUM_ROWS {
        for light in 22..=45 {
            assert_eq!(m.row_ones(medium).iter().filter(|&&c| m.is_one(light, c)).count(), 1);
        }
    }
    let sp = space();
    let c = pipeline::completion_of(&sp, &m);
    sp.validate(&c).unwrap();
    let canonical = sp.canonical(stab(), &c).unwrap();
    assert!(orbits().records.iter().any(|r| r.representative == canonical));
}

#[test]
fn dropping_an_absent_clause_is_a_config_error() {
    let err = drop_clauses(&enc(27).cnf, &[vec![1, 2, 3]]).unwrap_err();
    assert!(matches!(err, pipeline::PipelineError::Config(_)), "{err}");
    let amo = enc(27).cnf.iter().find(|(_, p)| *p == Provenance::AtMostOne).unwrap().0.clone();
    let lits: Vec<i32> = amo.lits().iter().rev().map(|l| l.to_dimacs()).collect();
    let out = drop_clauses(&enc(27).cnf, &[lits]).unwrap();
    assert_eq!(out.len() + 1, enc(27).cnf.len());
}

fn light_config(dir: &std::path::Path) -> RunConfig {
    RunConfig {
        phase2_mode: Phase2Mode::Incremental,
        cross_check: false,
        stages: Stages { phase1: true, phase2: true, baseline: false, witness45: false },
        output_dir: dir.to_path_buf(),
        ..RunConfig::default()
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = light_config(dir.path());
    let first = run(&cfg).unwrap();
    let run_dir = pipeline::run_dir(&cfg, &first);
    let keep = dir.path().join("first");
    fs::rename(&run_dir, &keep).unwrap();
    let second = run(&cfg).unwrap();
    assert_eq!(first.run_id, second.run_id);
    assert_eq!(first.without_timings().to_json(), second.without_timings().to_json());
    for name in ["instance-27.cnf", "instance-51.cnf", "completions.json", "manifest.json"] {
        assert_eq!(fs::read(keep.join(name)).unwrap(), fs::read(run_dir.join(name)).unwrap(), "{name}");
    }

    assert_eq!(second.status, RunStatus::Success);
    let p1 = second.phase1.as_ref().unwrap();
    assert_eq!(p1.orbit_size_histogram.iter().map(|(s, n)| s * n).sum::<usize>(), p1.total_completions);
    assert_eq!(p1.blocking_clauses, p1.total_completions - p1.representatives);
    let inc = second.phase2_incremental.as_ref().unwrap();
    assert_eq!(inc.outcomes.len(), 1021);
    assert!(inc.outcomes.iter().all(|o| *o == SolveStatus::Unsat));
    for (name, hash) in &second.artifacts {
        assert_eq!(&sha256_file(&run_dir.join(name)).unwrap(), hash, "{name}");
    }
    let stored: serde_json::Value = serde_json::from_str(&fs::read_to_string(run_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(stored["schema_version"], 1);
    assert_eq!(stored["phase1"]["representatives"], 1021);
}

#[test]
fn different_settings_get_different_run_directories() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = light_config(dir.path());
    a.stages = Stages { phase1: false, phase2: false, baseline: false, witness45: false };
    let b = RunConfig { seed: 1, ..a.clone() };
    let ra = run(&a).unwrap();
    let rb = run(&b).unwrap();
    assert_ne!(ra.run_id, rb.run_id);
    assert_eq!(ra.groups, rb.groups);
}

// Two at-most-one clauses whose removal lets representative 1020 extend:
// rows 35 and 48 then meet in columns 29 and 73, rows 39 and 51 in 33 and 34.
// Found by relaxing the clauses on rows 46-51 over every 45-row extension of
// every representative; no single clause sufficed there.
const FAULT: [[i32; 4]; 2] = [[-2579, -2623, -3554, -3598], [-2883, -2884, -3783, -3784]];
const FAULT_REP: usize = 1020;

fn fault() -> Vec<Vec<i32>> {
    FAULT.iter().map(|c| c.to_vec()).collect()
}

#[test]
fn dropped_clauses_surface_a_validated_counterexample() {
    let cnf = drop_clauses(&enc(51).cnf, &fault()).unwrap();
    assert_eq!(cnf.len() + 2, enc(51).cnf.len());
    let reps = orbits().representatives();
    let out = phase2_incremental(&cnf, &reps[FAULT_REP..=FAULT_REP], 1, &SolverConfig::default()).unwrap();
    let Extension::Sat(model) = &out[0] else { panic!("{out:?}") };
    assert!(!enc(51).cnf.is_satisfied_by(model));
    let (filled, satisfies, findings) = assess_model(&cnf, &enc(51).matrix, model).unwrap();
    assert!(satisfies);
    assert_eq!(filled.unknown_count(), 0);
    let expected = [
        Finding::RowsIntersectTwice { rows: (35, 48), cols: vec![29, 73] },
        Finding::RowsIntersectTwice { rows: (39, 51), cols: vec![33, 34] },
        Finding::ColsIntersectTwice { cols: (29, 73), rows: vec![35, 48] },
        Finding::ColsIntersectTwice { cols: (33, 34), rows: vec![39, 51] },
    ];
    let mut got = findings.clone();
    got.sort_by_key(|f| f.to_string());
    let mut want = expected.to_vec();
    want.sort_by_key(|f| f.to_string());
    assert_eq!(got, want);
}

#[test]
fn faulted_run_fails_with_counterexample_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { fault: Some(FaultInjection { drop_clauses: fault() }), ..light_config(dir.path()) };
    let report = run(&cfg).unwrap();
    assert_eq!(report.status, RunStatus::Failed);
    let inc = report.phase2_incremental.as_ref().unwrap();
    assert_eq!(inc.outcomes[FAULT_REP], SolveStatus::Sat);
    assert_eq!(inc.sat, inc.counterexamples.len());
    assert!(inc.sat >= 1 && inc.unsat + inc.sat == 1021);
    let run_dir = pipeline::run_dir(&cfg, &report);
    for c in &inc.counterexamples {
        assert!(c.satisfies_instance);
        assert!(!c.findings.is_empty());
        assert!(run_dir.join(&c.matrix_file).exists());
    }
    assert!(!report.failures.is_empty());
}
