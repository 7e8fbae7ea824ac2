//! Sequentially consistent brute-force oracle.
//!
//! Computes the exact set of final states reachable when hart steps are
//! interleaved one whole instruction at a time against a single shared
//! memory: no reordering, no store buffers, fences are no-ops. This is a
//! separate interpreter from the event semantics on purpose; it exists to
//! cross-check the axiomatic model, which must admit at least every SC
//! outcome.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::litmus::{validate, Atom, Diagnostic, Instruction, LitmusTest, Reg, Value};
use crate::solver::{FinalState, StateKey};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    Invalid(Vec<Diagnostic>),
    /// The interleaving search visited more states than the cap allows.
    StateLimit { cap: u64 },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Invalid(diags) => {
                write!(f, "test failed validation:")?;
                for d in diags {
                    write!(f, "\n  {d}")?;
                }
                Ok(())
            }
            OracleError::StateLimit { cap } => {
                write!(f, "interleaving search exceeded the cap of {cap} visited states")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Full interpreter state: per-hart program counters and register files,
/// plus the shared memory.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct ScState {
    pcs: Vec<usize>,
    regs: Vec<BTreeMap<Reg, Value>>,
    memory: BTreeMap<String, Value>,
}

impl ScState {
    fn initial(test: &LitmusTest) -> ScState {
        ScState {
            pcs: vec![0; test.hart_count()],
            regs: (0..test.hart_count()).map(|h| test.initial_regs(h)).collect(),
            memory: test.mem_init.iter().map(|(l, v)| (l.clone(), Value::Int(*v))).collect(),
        }
    }

    fn is_final(&self, test: &LitmusTest) -> bool {
        self.pcs.iter().zip(&test.programs).all(|(pc, p)| *pc >= p.len())
    }

    /// Execute the next instruction of `hart` atomically.
    fn step(&self, test: &LitmusTest, hart: usize) -> ScState {
        let mut next = self.clone();
        let instr = &test.programs[hart][self.pcs[hart]];
        next.pcs[hart] += 1;
        let read_reg = |regs: &BTreeMap<Reg, Value>, r: Reg| -> Value {
            if r.is_zero() {
                Value::Int(0)
            } else {
                regs.get(&r).cloned().unwrap_or(Value::Int(0))
            }
        };
        match instr {
            Instruction::AddImmediate { dst, src, imm } => {
                let v = match read_reg(&next.regs[hart], *src) {
                    Value::Int(n) => Value::Int(n.wrapping_add(*imm)),
                    addr @ Value::Addr(_) => addr,
                };
                if !dst.is_zero() {
                    next.regs[hart].insert(*dst, v);
                }
            }
            Instruction::Load { dst, addr, .. } => {
                let loc = match read_reg(&next.regs[hart], *addr) {
                    Value::Addr(l) => l,
                    Value::Int(_) => unreachable!("validated test: load address is a location"),
                };
                let v = next.memory.get(&loc).cloned().unwrap_or(Value::Int(0));
                if !dst.is_zero() {
                    next.regs[hart].insert(*dst, v);
                }
            }
            Instruction::Store { src, addr, .. } => {
                let loc = match read_reg(&next.regs[hart], *addr) {
                    Value::Addr(l) => l,
                    Value::Int(_) => unreachable!("validated test: store address is a location"),
                };
                let v = read_reg(&next.regs[hart], *src);
                next.memory.insert(loc, v);
            }
            Instruction::Fence { .. } => {}
        }
        next
    }

    fn project(&self, test: &LitmusTest) -> FinalState {
        let mut state = FinalState::new();
        for atom in &test.condition.atoms {
            match atom {
                Atom::Reg { hart, reg, .. } => {
                    let v = if reg.is_zero() {
                        Value::Int(0)
                    } else {
                        self.regs.get(*hart).and_then(|r| r.get(reg)).cloned().unwrap_or(Value::Int(0))
                    };
                    state.insert(StateKey::Reg { hart: *hart, reg: *reg }, v);
                }
                Atom::Loc { location, .. } => {
                    let v = self.memory.get(location).cloned().unwrap_or(Value::Int(0));
                    state.insert(StateKey::Loc { location: location.clone() }, v);
                }
            }
        }
        state
    }
}

/// Enumerate every interleaving of per-hart instruction steps and return
/// the distinct condition-relevant final states. Visited full states are
/// memoized, which prunes the tree without changing the result set.
pub fn sc_outcomes(test: &LitmusTest, max_states: u64) -> Result<BTreeSet<FinalState>, OracleError> {
    let diags = validate(test);
    if !diags.is_empty() {
        return Err(OracleError::Invalid(diags));
    }

    let mut outcomes = BTreeSet::new();
    let mut visited: BTreeSet<ScState> = BTreeSet::new();
    let mut stack = vec![ScState::initial(test)];
    while let Some(state) = stack.pop() {
        if !visited.insert(state.clone()) {
            continue;
        }
        if visited.len() as u64 > max_states {
            return Err(OracleError::StateLimit { cap: max_states });
        }
        if state.is_final(test) {
            outcomes.insert(state.project(test));
            continue;
        }
        for hart in 0..test.hart_count() {
            if state.pcs[hart] < test.programs[hart].len() {
                stack.push(state.step(test, hart));
            }
        }
    }
    Ok(outcomes)
}
