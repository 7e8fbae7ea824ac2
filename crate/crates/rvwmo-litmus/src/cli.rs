//! Command-line driver.
//!
//! Three subcommands: `check` solves one test and prints its report,
//! `test` walks a directory of `.litmus` files and compares verdicts with
//! their expectations, and `oracle` prints the sequentially consistent
//! outcomes next to the axiomatic state set. Exit codes are the machine
//! contract: 0 all expectations matched (or none present), 1 a mismatch
//! or property violation, 2 a parse/validation error, 3 a resource cap
//! was exceeded.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::exec::elaborate_events;
use crate::litmus::{parse_litmus, Expectation, LitmusTest};
use crate::model::{compute_ppo, PpoRules};
use crate::oracle::{sc_outcomes, OracleError};
use crate::report::{emit_dot, format_report};
use crate::solver::{
    check_expectation, format_state, graph_events, solve_test, ExpectationResult, SolveError,
    SolveLimits, Verdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "rvwmo-litmus", version, about = "RVWMO litmus-test checker with load-acquire/store-release support")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one litmus test and print its report.
    Check {
        /// Path to a .litmus file.
        file: PathBuf,
        #[command(flatten)]
        opts: CheckOpts,
    },
    /// Walk a directory of .litmus files and compare against expectations.
    Test {
        /// Directory containing .litmus files.
        dir: PathBuf,
        #[command(flatten)]
        opts: CheckOpts,
    },
    /// Print sequentially consistent outcomes and the SC-subset check.
    Oracle {
        /// Path to a .litmus file.
        file: PathBuf,
        /// Cap on visited interpreter states.
        #[arg(long, default_value_t = 1_000_000)]
        max_states: u64,
        /// Cap on enumerated candidate executions.
        #[arg(long, default_value_t = 1_000_000)]
        max_candidates: u64,
    },
}

#[derive(Args, Debug, Clone)]
struct CheckOpts {
    /// Disable the fence ordering rule.
    #[arg(long)]
    no_rule_fence: bool,
    /// Disable the acquire-annotation ordering rule.
    #[arg(long)]
    no_rule_acquire: bool,
    /// Disable the release-annotation ordering rule.
    #[arg(long)]
    no_rule_release: bool,
    /// Disable the same-location write-write ordering rule.
    #[arg(long)]
    no_rule_coherence_ww: bool,
    /// Disable the dependency ordering rule.
    #[arg(long)]
    no_rule_dep: bool,
    /// Cap on enumerated candidate executions.
    #[arg(long, default_value_t = 1_000_000)]
    max_candidates: u64,
    /// Cap on stored witness executions and recorded cycles.
    #[arg(long, default_value_t = 16)]
    max_witnesses: usize,
    /// Write DOT graphs of witnesses (or forbidding near-misses) into
    /// this directory.
    #[arg(long, value_name = "DIR")]
    dot: Option<PathBuf>,
    /// Override the test's expectation sidecar.
    #[arg(long, value_enum)]
    expect: Option<ExpectArg>,
    /// Print per-candidate details.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExpectArg {
    Allowed,
    Forbidden,
}

impl From<ExpectArg> for Expectation {
    fn from(e: ExpectArg) -> Expectation {
        match e {
            ExpectArg::Allowed => Expectation::Allowed,
            ExpectArg::Forbidden => Expectation::Forbidden,
        }
    }
}

/// Resolved run configuration, independent of clap.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: RunCommand,
}

#[derive(Clone, Debug)]
pub enum RunCommand {
    Check { file: PathBuf, options: CheckConfig },
    Test { dir: PathBuf, options: CheckConfig },
    Oracle { file: PathBuf, max_states: u64, max_candidates: u64 },
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub rules: PpoRules,
    pub limits: SolveLimits,
    pub dot_dir: Option<PathBuf>,
    pub expect_override: Option<Expectation>,
    pub verbose: bool,
}

impl CheckOpts {
    fn to_config(&self) -> CheckConfig {
        CheckConfig {
            rules: PpoRules {
                fence: !self.no_rule_fence,
                acquire: !self.no_rule_acquire,
                release: !self.no_rule_release,
                coherence_ww: !self.no_rule_coherence_ww,
                dep: !self.no_rule_dep,
            },
            limits: SolveLimits { max_candidates: self.max_candidates, max_witnesses: self.max_witnesses },
            dot_dir: self.dot.clone(),
            expect_override: self.expect.map(Into::into),
            verbose: self.verbose,
        }
    }
}

impl Cli {
    pub fn into_config(self) -> RunConfig {
        let command = match self.command {
            Command::Check { file, opts } => RunCommand::Check { file, options: opts.to_config() },
            Command::Test { dir, opts } => RunCommand::Test { dir, options: opts.to_config() },
            Command::Oracle { file, max_states, max_candidates } => {
                RunCommand::Oracle { file, max_states, max_candidates }
            }
        };
        RunConfig { command }
    }
}

/// Execute a run configuration; returns the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    match &config.command {
        RunCommand::Check { file, options } => run_check(file, options),
        RunCommand::Test { dir, options } => run_test(dir, options),
        RunCommand::Oracle { file, max_states, max_candidates } => {
            run_oracle(file, *max_states, *max_candidates)
        }
    }
}

fn load_test(path: &Path) -> Result<LitmusTest, (i32, String)> {
    let text = fs::read_to_string(path)
        .map_err(|e| (EXIT_INVALID, format!("{}: {e}", path.display())))?;
    parse_litmus(&text).map_err(|e| (EXIT_INVALID, format!("{}: {e}", path.display())))
}

fn solve_error_exit(err: &SolveError) -> i32 {
    match err {
        SolveError::Invalid(_) => EXIT_INVALID,
        SolveError::CandidateLimit { .. } => EXIT_RESOURCE,
    }
}

fn run_check(file: &Path, options: &CheckConfig) -> i32 {
    let mut test = match load_test(file) {
        Ok(t) => t,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    if let Some(e) = options.expect_override {
        test.expected = Some(e);
    }
    let verdict = match solve_test(&test, &options.rules, &options.limits) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return solve_error_exit(&e);
        }
    };

    let elab = elaborate_events(&test);
    let events = graph_events(&test, &elab);
    print!("{}", format_report(&verdict, &events));
    if options.verbose {
        println!("Candidates: {}", verdict.candidates_total);
        for (i, (_, cycle)) in verdict.forbidding_cycles.iter().enumerate() {
            let kinds: Vec<String> = cycle.edge_kinds().iter().map(|k| k.to_string()).collect();
            println!("Cycle {i}: {}", kinds.join(" "));
        }
    }

    if let Some(dir) = &options.dot_dir {
        if let Err(e) = write_dot_files(dir, &test, &verdict, &options.rules) {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    }

    match check_expectation(&verdict, &test) {
        ExpectationResult::Mismatch => EXIT_MISMATCH,
        _ => EXIT_OK,
    }
}

/// Write one DOT file per stored witness; for forbidden verdicts the
/// near-miss candidates are drawn instead, cycle highlighted. Files are
/// named `<test-name>.<witness-index>.dot`.
fn write_dot_files(
    dir: &Path,
    test: &LitmusTest,
    verdict: &Verdict,
    rules: &PpoRules,
) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let elab = elaborate_events(test);
    let events = graph_events(test, &elab);
    let ppo = compute_ppo(&elab, rules);
    let safe_name: String =
        test.name.chars().map(|c| if c == '/' || c == '\\' || c == '\0' { '_' } else { c }).collect();

    let write_one = |index: usize, dot: String| -> Result<(), String> {
        let path = dir.join(format!("{safe_name}.{index}.dot"));
        fs::write(&path, dot).map_err(|e| format!("{}: {e}", path.display()))
    };

    match verdict.status {
        crate::solver::Status::Allowed => {
            for (i, witness) in verdict.witnesses.iter().enumerate() {
                write_one(i, emit_dot(&test.name, &events, witness, &ppo, None))?;
            }
        }
        crate::solver::Status::Forbidden => {
            for (i, (candidate, cycle)) in verdict.forbidding_cycles.iter().enumerate() {
                write_one(i, emit_dot(&test.name, &events, candidate, &ppo, Some(cycle)))?;
            }
        }
    }
    Ok(())
}

fn run_test(dir: &Path, options: &CheckConfig) -> i32 {
    let mut paths: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|ext| ext == "litmus"))
            .collect(),
        Err(e) => {
            eprintln!("error: {}: {e}", dir.display());
            return EXIT_INVALID;
        }
    };
    paths.sort();
    if paths.is_empty() {
        eprintln!("error: {}: no .litmus files found", dir.display());
        return EXIT_INVALID;
    }

    let mut matched = 0usize;
    let mut mismatched = 0usize;
    let mut unchecked = 0usize;
    let mut worst = EXIT_OK;
    for path in &paths {
        let mut test = match load_test(path) {
            Ok(t) => t,
            Err((code, msg)) => {
                println!("{}: error ({msg})", path.display());
                worst = worst.max(code);
                continue;
            }
        };
        if let Some(e) = options.expect_override {
            test.expected = Some(e);
        }
        let verdict = match solve_test(&test, &options.rules, &options.limits) {
            Ok(v) => v,
            Err(e) => {
                println!("{}: error ({e})", path.display());
                worst = worst.max(solve_error_exit(&e));
                continue;
            }
        };
        if let Some(dot_dir) = &options.dot_dir {
            if let Err(e) = write_dot_files(dot_dir, &test, &verdict, &options.rules) {
                eprintln!("error: {e}");
                return EXIT_INVALID;
            }
        }
        let line = match check_expectation(&verdict, &test) {
            ExpectationResult::Match => {
                matched += 1;
                "Match"
            }
            ExpectationResult::Mismatch => {
                mismatched += 1;
                "Mismatch"
            }
            ExpectationResult::NoExpectation => {
                unchecked += 1;
                "NoExpectation"
            }
        };
        println!("{}: {line} ({})", path.display(), verdict.status);
    }
    println!(
        "Summary: {matched} matched, {mismatched} mismatched, {unchecked} without expectation, {} total",
        paths.len()
    );
    if mismatched > 0 {
        return worst.max(EXIT_MISMATCH);
    }
    worst
}

fn run_oracle(file: &Path, max_states: u64, max_candidates: u64) -> i32 {
    let test = match load_test(file) {
        Ok(t) => t,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let sc = match sc_outcomes(&test, max_states) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return match e {
                OracleError::Invalid(_) => EXIT_INVALID,
                OracleError::StateLimit { .. } => EXIT_RESOURCE,
            };
        }
    };
    let limits = SolveLimits { max_candidates, ..SolveLimits::default() };
    let verdict = match solve_test(&test, &PpoRules::default(), &limits) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return solve_error_exit(&e);
        }
    };

    println!("Test {}", test.name);
    println!("SC states: {}", sc.len());
    for state in &sc {
        println!("{}", format_state(state));
    }
    println!("Axiomatic states: {}", verdict.states.len());
    for state in verdict.states.keys() {
        println!("{}", format_state(state));
    }
    let missing: Vec<String> =
        sc.iter().filter(|s| !verdict.states.contains_key(*s)).map(format_state).collect();
    if missing.is_empty() {
        println!("SC-subset: ok");
        EXIT_OK
    } else {
        for state in missing {
            println!("SC-subset: VIOLATION state {state} unreachable axiomatically");
        }
        EXIT_MISMATCH
    }
}
