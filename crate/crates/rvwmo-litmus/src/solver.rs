//! Exhaustive candidate enumeration and verdicts.
//!
//! A candidate execution is one choice of reads-from source per read plus
//! one coherence order per location. Candidates are generated in a fixed
//! sorted order, values are resolved to a fixpoint, the model axioms
//! filter the survivors, and the results aggregate into a [`Verdict`].
//! No search heuristics: at litmus-test scale, enumerating everything is
//! the point.

use std::collections::BTreeMap;
use std::fmt;

use crate::exec::{elaborate_events, hart_eval, initial_writes, Elaboration, Event, EventId, EventKind};
use crate::litmus::{validate, Atom, Diagnostic, Expectation, LitmusTest, Reg, Value};
use crate::model::{
    self, coherence_check, compute_ppo, main_axiom_check, AxiomCheck, CycleWitness, PpoRules,
};
use crate::relation::{derive_fr, Relation};

/// One concrete execution: an rf assignment, per-location coherence
/// orders, the derived relations, and the resolved values.
#[derive(Clone, Debug)]
pub struct CandidateExecution {
    /// Source write for every read.
    pub rf: BTreeMap<EventId, EventId>,
    /// Per-location write order, initial write first.
    pub co: BTreeMap<String, Vec<EventId>>,
    /// rf as a (write, read) relation.
    pub rf_rel: Relation<EventId>,
    /// rf restricted to cross-hart pairs (initial writes count as
    /// external).
    pub rf_external: Relation<EventId>,
    /// co as a strict total order relation per location.
    pub co_rel: Relation<EventId>,
    pub fr: Relation<EventId>,
    /// Resolved value of every read and write, including initial writes.
    pub values: BTreeMap<EventId, Value>,
    /// Final register file per hart.
    pub regs: Vec<BTreeMap<Reg, Value>>,
    /// True once the value fixpoint converged.
    pub consistent: bool,
}

/// Key of one component of a projected final state.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum StateKey {
    Reg { hart: usize, reg: Reg },
    Loc { location: String },
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateKey::Reg { hart, reg } => write!(f, "{hart}:{reg}"),
            StateKey::Loc { location } => write!(f, "{location}"),
        }
    }
}

/// A final state projected onto the condition-relevant registers and
/// locations.
pub type FinalState = BTreeMap<StateKey, Value>;

/// Render a final state as `1:x3=1; 1:x4=0;`.
pub fn format_state(state: &FinalState) -> String {
    let mut out = String::new();
    for (key, value) in state {
        out.push_str(&format!("{key}={value}; "));
    }
    out.trim_end().to_string()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Allowed,
    Forbidden,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Allowed => write!(f, "Allowed"),
            Status::Forbidden => write!(f, "Forbidden"),
        }
    }
}

/// Aggregate result of solving one test.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub name: String,
    pub condition: crate::litmus::ExistsPredicate,
    pub status: Status,
    pub predicate_satisfiable: bool,
    /// Axiom-consistent candidates satisfying / not satisfying the
    /// predicate.
    pub positive: usize,
    pub negative: usize,
    /// Reachable final states with the number of witnessing executions.
    pub states: BTreeMap<FinalState, usize>,
    /// Up to the witness cap of predicate-satisfying consistent
    /// executions.
    pub witnesses: Vec<CandidateExecution>,
    /// Predicate-satisfying candidates rejected by an axiom, with their
    /// cycles.
    pub forbidding_cycles: Vec<(CandidateExecution, CycleWitness)>,
    /// Value-consistent candidates enumerated, before axiom filtering.
    pub candidates_total: usize,
    pub expected: Option<Expectation>,
}

/// Resource limits for enumeration.
#[derive(Clone, Copy, Debug)]
pub struct SolveLimits {
    pub max_candidates: u64,
    pub max_witnesses: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits { max_candidates: 1_000_000, max_witnesses: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveError {
    /// The test fails validation; solving needs a clean test.
    Invalid(Vec<Diagnostic>),
    /// The candidate space exceeds the configured cap. Never silently
    /// truncated.
    CandidateLimit { required: u128, cap: u64 },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Invalid(diags) => {
                write!(f, "test failed validation:")?;
                for d in diags {
                    write!(f, "\n  {d}")?;
                }
                Ok(())
            }
            SolveError::CandidateLimit { required, cap } => {
                write!(f, "candidate space has {required} executions, exceeding the cap of {cap}")
            }
        }
    }
}

impl std::error::Error for SolveError {}

/// Result of comparing a verdict with the test's expectation sidecar.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExpectationResult {
    Match,
    Mismatch,
    NoExpectation,
}

pub fn check_expectation(verdict: &Verdict, test: &LitmusTest) -> ExpectationResult {
    match test.expected {
        None => ExpectationResult::NoExpectation,
        Some(Expectation::Allowed) if verdict.status == Status::Allowed => ExpectationResult::Match,
        Some(Expectation::Forbidden) if verdict.status == Status::Forbidden => ExpectationResult::Match,
        Some(_) => ExpectationResult::Mismatch,
    }
}

/// Per-read rf choices and per-location write permutations, plus the
/// pieces shared by every candidate.
struct EnumerationSpace {
    reads: Vec<EventId>,
    sources: Vec<Vec<EventId>>,
    locations: Vec<String>,
    writes_by_loc: BTreeMap<String, Vec<EventId>>,
    init_by_loc: BTreeMap<String, EventId>,
}

fn enumeration_space(test: &LitmusTest, elab: &Elaboration) -> EnumerationSpace {
    let init = initial_writes(test);
    let init_by_loc: BTreeMap<String, EventId> =
        init.iter().map(|e| (e.location.clone().unwrap(), e.id)).collect();

    let mut writes_by_loc: BTreeMap<String, Vec<EventId>> =
        test.mem_init.keys().map(|l| (l.clone(), Vec::new())).collect();
    for event in &elab.events {
        if event.kind == EventKind::Write {
            writes_by_loc.get_mut(event.location.as_ref().unwrap()).unwrap().push(event.id);
        }
    }

    let reads: Vec<EventId> =
        elab.events.iter().filter(|e| e.kind == EventKind::Read).map(|e| e.id).collect();
    let sources: Vec<Vec<EventId>> = reads
        .iter()
        .map(|r| {
            let loc = elab.event(*r).unwrap().location.clone().unwrap();
            let mut srcs = vec![init_by_loc[&loc]];
            srcs.extend(writes_by_loc[&loc].iter().copied());
            srcs
        })
        .collect();

    let locations: Vec<String> = test.mem_init.keys().cloned().collect();
    EnumerationSpace { reads, sources, locations, writes_by_loc, init_by_loc }
}

/// Closed-form size of the candidate space: the product over reads of
/// their source counts times the product over locations of write
/// permutations.
fn space_size(space: &EnumerationSpace) -> u128 {
    let mut total: u128 = 1;
    for srcs in &space.sources {
        total = total.saturating_mul(srcs.len() as u128);
    }
    for loc in &space.locations {
        total = total.saturating_mul(factorial(space.writes_by_loc[loc].len()));
    }
    total
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product::<u128>().max(1)
}

/// All permutations of `items`, in lexicographic order of positions.
fn permutations<T: Copy>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &head) in items.iter().enumerate() {
        let mut rest: Vec<T> = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            let mut perm = vec![head];
            perm.append(&mut tail);
            out.push(perm);
        }
    }
    out
}

/// Enumerate every value-consistent candidate execution, in a fixed
/// deterministic order. Expects a validated test (every read's location
/// must be declared); `solve_test` checks this before calling.
pub fn enumerate_candidates(
    test: &LitmusTest,
    elab: &Elaboration,
    limits: &SolveLimits,
) -> Result<Vec<CandidateExecution>, SolveError> {
    let space = enumeration_space(test, elab);
    let required = space_size(&space);
    if required > limits.max_candidates as u128 {
        return Err(SolveError::CandidateLimit { required, cap: limits.max_candidates });
    }

    // Pre-compute the per-location co alternatives.
    let co_options: Vec<(String, Vec<Vec<EventId>>)> = space
        .locations
        .iter()
        .map(|loc| {
            let perms = permutations(&space.writes_by_loc[loc]);
            let with_init: Vec<Vec<EventId>> = perms
                .into_iter()
                .map(|perm| {
                    let mut order = vec![space.init_by_loc[loc]];
                    order.extend(perm);
                    order
                })
                .collect();
            (loc.clone(), with_init)
        })
        .collect();

    let mut out = Vec::new();
    // Odometer over rf choices, then over co permutations.
    let mut rf_idx = vec![0usize; space.reads.len()];
    loop {
        let rf: BTreeMap<EventId, EventId> = space
            .reads
            .iter()
            .enumerate()
            .map(|(k, r)| (*r, space.sources[k][rf_idx[k]]))
            .collect();

        let mut co_idx = vec![0usize; co_options.len()];
        loop {
            let co: BTreeMap<String, Vec<EventId>> = co_options
                .iter()
                .zip(&co_idx)
                .map(|((loc, opts), i)| (loc.clone(), opts[*i].clone()))
                .collect();

            if let Some(candidate) = build_candidate(test, elab, &rf, &co) {
                out.push(candidate);
            }

            if !advance(&mut co_idx, &co_options.iter().map(|(_, o)| o.len()).collect::<Vec<_>>()) {
                break;
            }
        }

        if !advance(&mut rf_idx, &space.sources.iter().map(Vec::len).collect::<Vec<_>>()) {
            break;
        }
    }
    Ok(out)
}

/// Advance a mixed-radix odometer; false when it wraps.
fn advance(digits: &mut [usize], radices: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radices[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Derive relations and resolve values for one (rf, co) choice. Returns
/// `None` when the value fixpoint does not converge.
fn build_candidate(
    test: &LitmusTest,
    elab: &Elaboration,
    rf: &BTreeMap<EventId, EventId>,
    co: &BTreeMap<String, Vec<EventId>>,
) -> Option<CandidateExecution> {
    let mut rf_rel = Relation::new();
    let mut rf_external = Relation::new();
    for (&read, &write) in rf {
        rf_rel.insert(write, read);
        if write.hart() != read.hart() {
            rf_external.insert(write, read);
        }
    }
    let mut co_rel = Relation::new();
    for order in co.values() {
        for i in 0..order.len() {
            co_rel.add_node(order[i]);
            for j in (i + 1)..order.len() {
                co_rel.insert(order[i], order[j]);
            }
        }
    }
    let fr = derive_fr(&rf_rel, &co_rel);

    // Value fixpoint: seed reads with zero (or the initial value when the
    // source is an initial write), evaluate every hart, update reads from
    // their sources, and iterate. Straight-line dataflow stabilizes
    // within one pass per event; exceeding the bound marks the candidate
    // value-inconsistent.
    let mut values: BTreeMap<EventId, Value> = BTreeMap::new();
    for (i, (_, &init_value)) in test.mem_init.iter().enumerate() {
        values.insert(EventId::Init(i), Value::Int(init_value));
    }
    let mut read_values: BTreeMap<EventId, Value> = rf
        .iter()
        .map(|(&r, &w)| {
            let seed = values.get(&w).cloned().unwrap_or(Value::Int(0));
            (r, seed)
        })
        .collect();

    let bound = elab.events.len() + 1;
    let mut regs: Vec<BTreeMap<Reg, Value>> = Vec::new();
    let mut converged = false;
    for _ in 0..=bound {
        let mut write_values: BTreeMap<EventId, Value> = BTreeMap::new();
        regs = Vec::with_capacity(test.hart_count());
        for (hart, program) in test.programs.iter().enumerate() {
            let eval = hart_eval(program, hart, &test.initial_regs(hart), &read_values);
            write_values.extend(eval.write_values);
            regs.push(eval.regs);
        }
        let mut changed = false;
        for (&read, &write) in rf {
            let new_value = match write {
                EventId::Init(_) => values[&write].clone(),
                _ => write_values.get(&write).cloned().unwrap_or(Value::Int(0)),
            };
            if read_values[&read] != new_value {
                read_values.insert(read, new_value);
                changed = true;
            }
        }
        if !changed {
            for (id, v) in write_values {
                values.insert(id, v);
            }
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    for (id, v) in read_values {
        values.insert(id, v);
    }

    Some(CandidateExecution {
        rf: rf.clone(),
        co: co.clone(),
        rf_rel,
        rf_external,
        co_rel,
        fr,
        values,
        regs,
        consistent: true,
    })
}

/// Evaluate the exists predicate against a candidate's final state.
pub fn evaluate_condition(candidate: &CandidateExecution, test: &LitmusTest) -> bool {
    test.condition.atoms.iter().all(|atom| match atom {
        Atom::Reg { hart, reg, value } => {
            let actual = candidate.regs.get(*hart).and_then(|r| r.get(reg)).cloned().unwrap_or(Value::Int(0));
            actual == Value::Int(*value)
        }
        Atom::Loc { location, value } => final_memory_value(candidate, location) == Value::Int(*value),
    })
}

/// Final value of a location: the value of its co-maximal write.
fn final_memory_value(candidate: &CandidateExecution, location: &str) -> Value {
    match candidate.co.get(location).and_then(|order| order.last()) {
        Some(last) => candidate.values.get(last).cloned().unwrap_or(Value::Int(0)),
        None => Value::Int(0),
    }
}

/// Project a candidate's final state onto the condition-relevant keys.
pub fn project_state(candidate: &CandidateExecution, test: &LitmusTest) -> FinalState {
    let mut state = FinalState::new();
    for atom in &test.condition.atoms {
        match atom {
            Atom::Reg { hart, reg, .. } => {
                let v = candidate.regs.get(*hart).and_then(|r| r.get(reg)).cloned().unwrap_or(Value::Int(0));
                state.insert(StateKey::Reg { hart: *hart, reg: *reg }, v);
            }
            Atom::Loc { location, .. } => {
                state.insert(
                    StateKey::Loc { location: location.clone() },
                    final_memory_value(candidate, location),
                );
            }
        }
    }
    state
}

/// Solve one test: elaborate, enumerate, filter by the axioms, aggregate.
pub fn solve_test(test: &LitmusTest, rules: &PpoRules, limits: &SolveLimits) -> Result<Verdict, SolveError> {
    let diags = validate(test);
    if !diags.is_empty() {
        return Err(SolveError::Invalid(diags));
    }
    // At least one witness is kept, so Allowed always has evidence.
    let limits = SolveLimits { max_witnesses: limits.max_witnesses.max(1), ..*limits };
    let limits = &limits;

    let elab = elaborate_events(test);
    let ppo = compute_ppo(&elab, rules);
    let po_loc = model::po_loc(&elab);
    let candidates = enumerate_candidates(test, &elab, limits)?;
    let candidates_total = candidates.len();

    let mut states: BTreeMap<FinalState, usize> = BTreeMap::new();
    let mut witnesses = Vec::new();
    let mut forbidding_cycles = Vec::new();
    let mut positive = 0usize;
    let mut negative = 0usize;

    for candidate in candidates {
        let satisfies = evaluate_condition(&candidate, test);
        let coherent = coherence_check(&po_loc, &candidate.rf_rel, &candidate.co_rel, &candidate.fr);
        let verdict = match coherent {
            AxiomCheck::Pass => {
                main_axiom_check(&ppo, &candidate.rf_external, &candidate.co_rel, &candidate.fr)
            }
            fail => fail,
        };
        match verdict {
            AxiomCheck::Pass => {
                *states.entry(project_state(&candidate, test)).or_insert(0) += 1;
                if satisfies {
                    positive += 1;
                    if witnesses.len() < limits.max_witnesses {
                        witnesses.push(candidate);
                    }
                } else {
                    negative += 1;
                }
            }
            AxiomCheck::Fail(cycle) => {
                if satisfies && forbidding_cycles.len() < limits.max_witnesses {
                    forbidding_cycles.push((candidate, cycle));
                }
            }
        }
    }

    let predicate_satisfiable = positive > 0;
    Ok(Verdict {
        name: test.name.clone(),
        condition: test.condition.clone(),
        status: if predicate_satisfiable { Status::Allowed } else { Status::Forbidden },
        predicate_satisfiable,
        positive,
        negative,
        states,
        witnesses,
        forbidding_cycles,
        candidates_total,
        expected: test.expected,
    })
}

/// The events a graph of this candidate should show: program memory
/// events plus the initial writes.
pub fn graph_events(test: &LitmusTest, elab: &Elaboration) -> Vec<Event> {
    let mut events: Vec<Event> = elab.events.iter().filter(|e| e.is_memory()).cloned().collect();
    events.extend(initial_writes(test));
    events.sort_by_key(|e| e.id);
    events
}
