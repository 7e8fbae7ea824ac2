//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Covers verdict reproduction for the four bundled message-passing and
//! reordering tests, the structure of the forbidding cycle, rule
//! ablations, the state-set contrast between fence- and annotation-based
//! synchronization, the SC-subset and monotonicity properties over
//! generated tests, enumeration counts, and byte-determinism of all
//! output.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use rvwmo_litmus::exec::{elaborate_events, EventId};
use rvwmo_litmus::litmus::{parse_litmus, LitmusTest, Reg};
use rvwmo_litmus::model::{compute_ppo, EdgeKind, PpoRules};
use rvwmo_litmus::oracle::sc_outcomes;
use rvwmo_litmus::report::{emit_dot, format_report};
use rvwmo_litmus::solver::{
    enumerate_candidates, graph_events, solve_test, FinalState, SolveLimits, StateKey, Status,
    Verdict,
};
use rvwmo_litmus::litmus::Value;

use common::{generate_test, mutate, read_listing, Mutation, Rng};

fn listing(n: usize) -> LitmusTest {
    parse_litmus(&read_listing(n)).unwrap_or_else(|e| panic!("listing{n} must parse: {e}"))
}

fn solve(test: &LitmusTest, rules: &PpoRules) -> Verdict {
    solve_test(test, rules, &SolveLimits::default()).unwrap()
}

fn state_set(verdict: &Verdict) -> BTreeSet<FinalState> {
    verdict.states.keys().cloned().collect()
}

#[test]
fn criterion_1_paper_verdicts() {
    let start = Instant::now();
    let expected = [Status::Allowed, Status::Forbidden, Status::Forbidden, Status::Allowed];
    for (n, want) in (1..=4).zip(expected) {
        let verdict = solve(&listing(n), &PpoRules::default());
        assert_eq!(verdict.status, want, "listing{n} verdict");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "verdicts took {elapsed:?}, budget is 1s");
    println!("criterion 1 (verdict reproduction, {elapsed:?}): PASS");
}

#[test]
fn criterion_2_forbidding_cycle_structure() {
    let test = listing(2);
    let verdict = solve(&test, &PpoRules::default());
    assert_eq!(verdict.status, Status::Forbidden);
    let (_, cycle) = verdict.forbidding_cycles.first().expect("a near-miss cycle is recorded");

    let mut kinds = cycle.edge_kinds();
    kinds.sort();
    assert_eq!(kinds, vec![EdgeKind::Ppo, EdgeKind::Ppo, EdgeKind::Rf, EdgeKind::Fr]);

    let on_cycle: BTreeSet<EventId> = cycle.events.iter().copied().collect();
    let expected: BTreeSet<EventId> = [
        EventId::Program { hart: 0, index: 0 }, // W x
        EventId::Program { hart: 0, index: 1 }, // W.rl y
        EventId::Program { hart: 1, index: 0 }, // R.aq y
        EventId::Program { hart: 1, index: 1 }, // R x
    ]
    .into_iter()
    .collect();
    assert_eq!(on_cycle, expected);
    println!("criterion 2 (cycle witness structure): PASS");
}

#[test]
fn criterion_3_rule_ablation() {
    let no_annotations = PpoRules { acquire: false, release: false, ..PpoRules::default() };
    let verdict = solve(&listing(2), &no_annotations);
    assert_eq!(verdict.status, Status::Allowed, "listing2 without acquire/release rules");

    let no_fence = PpoRules { fence: false, ..PpoRules::default() };
    let verdict = solve(&listing(3), &no_fence);
    assert_eq!(verdict.status, Status::Allowed, "listing3 without the fence rule");
    println!("criterion 3 (rule ablation): PASS");
}

#[test]
fn criterion_4_release_admits_the_reordered_state() {
    let fence_states = state_set(&solve(&listing(3), &PpoRules::default()));
    let release_states = state_set(&solve(&listing(4), &PpoRules::default()));

    assert!(fence_states.is_subset(&release_states));
    assert!(fence_states != release_states, "the contrast must be strict");

    let mut reordered = FinalState::new();
    reordered.insert(StateKey::Reg { hart: 2, reg: Reg::new(3).unwrap() }, Value::Int(0));
    reordered.insert(StateKey::Reg { hart: 2, reg: Reg::new(7).unwrap() }, Value::Int(1));
    assert!(release_states.contains(&reordered));
    assert!(!fence_states.contains(&reordered));

    let diff: Vec<_> = release_states.difference(&fence_states).collect();
    assert_eq!(diff, vec![&reordered]);
    println!("criterion 4 (fence vs release state contrast): PASS");
}

#[test]
fn criterion_5_sc_outcomes_are_axiomatic_subset() {
    let start = Instant::now();
    let mut checked = 0usize;

    let mut check = |test: &LitmusTest, label: &str| {
        let verdict = solve(test, &PpoRules::default());
        let sc = sc_outcomes(test, 5_000_000).unwrap();
        for state in &sc {
            assert!(
                verdict.states.contains_key(state),
                "{label}: SC state {state:?} missing from axiomatic states"
            );
        }
        checked += 1;
    };

    for n in 1..=4 {
        check(&listing(n), &format!("listing{n}"));
    }
    for seed in 0..50u64 {
        let generated = generate_test(seed);
        let test = parse_litmus(&generated.render())
            .unwrap_or_else(|e| panic!("seed {seed} must parse: {e}\n{}", generated.render()));
        check(&test, &generated.name);
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "suite took {elapsed:?}, budget is 60s");
    println!("criterion 5 (SC-subset, {checked} tests, {elapsed:?}): PASS");
}

#[test]
fn criterion_6_strengthening_never_adds_outcomes() {
    let mut rng = Rng::new(0xC0FFEE);
    let mut mutations = 0usize;
    let mut seed = 0u64;
    while mutations < 100 {
        let base = generate_test(seed);
        seed += 1;
        let base_test = parse_litmus(&base.render()).unwrap();
        let base_states = state_set(&solve(&base_test, &PpoRules::default()));

        for which in [Mutation::InsertFullFence, Mutation::UpgradeAccess] {
            let Some(mutated) = mutate(&base, which, &mut rng) else { continue };
            let mutated_test = parse_litmus(&mutated.render())
                .unwrap_or_else(|e| panic!("mutant of {} must parse: {e}\n{}", base.name, mutated.render()));
            let mutated_states = state_set(&solve(&mutated_test, &PpoRules::default()));
            assert!(
                mutated_states.is_subset(&base_states),
                "strengthening {} enlarged its state set:\nbase:\n{}\nmutant:\n{}",
                base.name,
                base.render(),
                mutated.render()
            );
            mutations += 1;
        }
    }
    println!("criterion 6 (monotonicity, {mutations} mutations): PASS");
}

#[test]
fn criterion_7_enumeration_counts() {
    for (n, want) in [(1usize, 4usize), (3, 16)] {
        let test = listing(n);
        let elab = elaborate_events(&test);
        let candidates = enumerate_candidates(&test, &elab, &SolveLimits::default()).unwrap();
        assert_eq!(candidates.len(), want, "listing{n} candidate count");
    }
    println!("criterion 7 (enumeration counts 4 and 16): PASS");
}

#[test]
fn criterion_8_runs_are_byte_identical() {
    let full_run = || -> String {
        let mut out = String::new();
        for n in 1..=4 {
            let test = listing(n);
            let verdict = solve(&test, &PpoRules::default());
            let elab = elaborate_events(&test);
            let events = graph_events(&test, &elab);
            let ppo = compute_ppo(&elab, &PpoRules::default());
            out.push_str(&format_report(&verdict, &events));
            for witness in &verdict.witnesses {
                out.push_str(&emit_dot(&test.name, &events, witness, &ppo, None));
            }
            for (candidate, cycle) in &verdict.forbidding_cycles {
                out.push_str(&emit_dot(&test.name, &events, candidate, &ppo, Some(cycle)));
            }
        }
        out
    };
    assert_eq!(full_run(), full_run());

    // The CLI must be byte-stable too, both stdout and the DOT files it
    // writes.
    let appendix = common::appendix_path("");
    let cli_run = |dot_dir: &std::path::Path| {
        Command::new(env!("CARGO_BIN_EXE_rvwmo-litmus"))
            .arg("test")
            .arg(&appendix)
            .arg("--dot")
            .arg(dot_dir)
            .output()
            .expect("binary runs")
    };
    let dir_a = std::env::temp_dir().join(format!("rvwmo-acc-a-{}", std::process::id()));
    let dir_b = std::env::temp_dir().join(format!("rvwmo-acc-b-{}", std::process::id()));
    for d in [&dir_a, &dir_b] {
        let _ = std::fs::remove_dir_all(d);
    }
    let (a, b) = (cli_run(&dir_a), cli_run(&dir_b));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let dot_files = |dir: &std::path::Path| -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let (files_a, files_b) = (dot_files(&dir_a), dot_files(&dir_b));
    assert!(!files_a.is_empty());
    assert_eq!(files_a, files_b);
    for d in [&dir_a, &dir_b] {
        let _ = std::fs::remove_dir_all(d);
    }
    println!("criterion 8 (byte-identical runs, {} DOT files): PASS", files_a.len());
}
