//! From instructions to memory events.
//!
//! Each hart's instruction list elaborates into a sequence of read, write,
//! and fence events with program order and syntactic dependency edges.
//! `addi` produces no event of its own; it participates in register
//! dataflow, folding into the address or data of the memory events it
//! feeds. Initial memory values are modeled as one implicit write event
//! per location, ordered coherence-first, which keeps the rf/fr
//! definitions uniform and makes "reads 0" explainable in graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::litmus::{AccessSet, Instruction, LitmusTest, Reg, Value};
use crate::relation::Relation;

/// Identity of an event. Initial writes sort before all program events;
/// program events are totally ordered within a hart by sequence index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EventId {
    /// Implicit initial write to the nth location (in sorted order).
    Init(usize),
    /// The `index`th memory/fence event of hart `hart`.
    Program { hart: usize, index: usize },
}

impl EventId {
    pub fn hart(self) -> Option<usize> {
        match self {
            EventId::Init(_) => None,
            EventId::Program { hart, .. } => Some(hart),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EventKind {
    Read,
    Write,
    Fence,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Annotation {
    None,
    Acquire,
    Release,
}

/// One memory-system action.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Event {
    pub id: EventId,
    pub kind: EventKind,
    /// Location accessed; `None` for fences.
    pub location: Option<String>,
    pub annotation: Annotation,
    /// Predecessor/successor access sets; fences only.
    pub fence: Option<(AccessSet, AccessSet)>,
    /// Earlier reads of the same hart whose value flows into this event's
    /// address register.
    pub addr_deps: BTreeSet<EventId>,
    /// Earlier reads whose value flows into this write's data register.
    pub data_deps: BTreeSet<EventId>,
}

impl Event {
    pub fn is_memory(&self) -> bool {
        matches!(self.kind, EventKind::Read | EventKind::Write)
    }

    /// Short descriptor like `0:Wx` or `1:Raqy`, used in reports.
    pub fn descriptor(&self) -> String {
        let kind = match self.kind {
            EventKind::Read => "R",
            EventKind::Write => "W",
            EventKind::Fence => "F",
        };
        let marker = match self.annotation {
            Annotation::None => "",
            Annotation::Acquire => "aq",
            Annotation::Release => "rl",
        };
        let loc = self.location.as_deref().unwrap_or("");
        match self.id {
            EventId::Init(_) => format!("init:{kind}{marker}{loc}"),
            EventId::Program { hart, .. } => format!("{hart}:{kind}{marker}{loc}"),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.descriptor())
    }
}

/// Elaborated form of a test: program events, program order, and the two
/// syntactic dependency relations.
#[derive(Clone, Debug)]
pub struct Elaboration {
    /// Program events only, sorted by id.
    pub events: Vec<Event>,
    pub po: Relation<EventId>,
    pub addr_dep: Relation<EventId>,
    pub data_dep: Relation<EventId>,
}

impl Elaboration {
    pub fn event(&self, id: EventId) -> Option<&Event> {
        self.events.iter().find(|e| e.id == id)
    }
}

/// Turn each hart's instruction list into events. Expects a validated
/// test; address registers must resolve statically.
pub fn elaborate_events(test: &LitmusTest) -> Elaboration {
    let mut events = Vec::new();
    let mut po = Relation::new();
    let mut addr_dep = Relation::new();
    let mut data_dep = Relation::new();

    for (hart, program) in test.programs.iter().enumerate() {
        let init_regs = test.initial_regs(hart);
        let resolved = crate::litmus::resolve_addresses(program, &init_regs);
        let (a_dep, d_dep) = syntactic_deps(program, hart);

        let mut index = 0usize;
        for (instr_idx, instr) in program.iter().enumerate() {
            let id = EventId::Program { hart, index };
            let event = match instr {
                Instruction::AddImmediate { .. } => continue,
                Instruction::Load { acquire, .. } => {
                    let location = resolved[instr_idx]
                        .as_ref()
                        .map(|(loc, _)| loc.clone())
                        .expect("validated test: load address resolves");
                    Event {
                        id,
                        kind: EventKind::Read,
                        location: Some(location),
                        annotation: if *acquire { Annotation::Acquire } else { Annotation::None },
                        fence: None,
                        addr_deps: dep_sources(&a_dep, id),
                        data_deps: BTreeSet::new(),
                    }
                }
                Instruction::Store { release, .. } => {
                    let location = resolved[instr_idx]
                        .as_ref()
                        .map(|(loc, _)| loc.clone())
                        .expect("validated test: store address resolves");
                    Event {
                        id,
                        kind: EventKind::Write,
                        location: Some(location),
                        annotation: if *release { Annotation::Release } else { Annotation::None },
                        fence: None,
                        addr_deps: dep_sources(&a_dep, id),
                        data_deps: dep_sources(&d_dep, id),
                    }
                }
                Instruction::Fence { pred, succ } => Event {
                    id,
                    kind: EventKind::Fence,
                    location: None,
                    annotation: Annotation::None,
                    fence: Some((*pred, *succ)),
                    addr_deps: BTreeSet::new(),
                    data_deps: BTreeSet::new(),
                },
            };
            events.push(event);
            index += 1;
        }

        // Program order: every event before every later event of the hart.
        for i in 0..index {
            po.add_node(EventId::Program { hart, index: i });
            for j in (i + 1)..index {
                po.insert(EventId::Program { hart, index: i }, EventId::Program { hart, index: j });
            }
        }

        addr_dep = addr_dep.union(&a_dep);
        data_dep = data_dep.union(&d_dep);
    }

    events.sort_by_key(|e| e.id);
    Elaboration { events, po, addr_dep, data_dep }
}

fn dep_sources(rel: &Relation<EventId>, target: EventId) -> BTreeSet<EventId> {
    rel.pairs().filter(|(_, b)| *b == target).map(|(a, _)| a).collect()
}

/// One implicit initial write per declared location, in sorted order.
pub fn initial_writes(test: &LitmusTest) -> Vec<Event> {
    test.mem_init
        .keys()
        .enumerate()
        .map(|(i, loc)| Event {
            id: EventId::Init(i),
            kind: EventKind::Write,
            location: Some(loc.clone()),
            annotation: Annotation::None,
            fence: None,
            addr_deps: BTreeSet::new(),
            data_deps: BTreeSet::new(),
        })
        .collect()
}

/// Syntactic address and data dependencies of one hart's program.
///
/// A dependency edge runs from an earlier read to a memory event whose
/// address (or, for writes, data) register receives the read's value
/// through a chain of `addi`s. Redefining a register cuts the chain.
pub fn syntactic_deps(program: &[Instruction], hart: usize) -> (Relation<EventId>, Relation<EventId>) {
    let mut addr_dep = Relation::new();
    let mut data_dep = Relation::new();
    // Which read event each register's current value traces back to.
    let mut taint: BTreeMap<Reg, Option<EventId>> = BTreeMap::new();

    let mut index = 0usize;
    for instr in program {
        match instr {
            Instruction::AddImmediate { dst, src, .. } => {
                let t = taint.get(src).copied().flatten();
                if !dst.is_zero() {
                    taint.insert(*dst, t);
                }
            }
            Instruction::Load { dst, addr, .. } => {
                let id = EventId::Program { hart, index };
                if let Some(source) = taint.get(addr).copied().flatten() {
                    addr_dep.insert(source, id);
                }
                if !dst.is_zero() {
                    taint.insert(*dst, Some(id));
                }
                index += 1;
            }
            Instruction::Store { src, addr, .. } => {
                let id = EventId::Program { hart, index };
                if let Some(source) = taint.get(addr).copied().flatten() {
                    addr_dep.insert(source, id);
                }
                if let Some(source) = taint.get(src).copied().flatten() {
                    data_dep.insert(source, id);
                }
                index += 1;
            }
            Instruction::Fence { .. } => {
                index += 1;
            }
        }
    }
    (addr_dep, data_dep)
}

/// Result of evaluating one hart's program under assumed read values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HartEval {
    /// Final register file.
    pub regs: BTreeMap<Reg, Value>,
    /// Value stored by each write event.
    pub write_values: BTreeMap<EventId, Value>,
}

/// Deterministic forward evaluation of one hart. `read_values` must cover
/// every read event of the hart; `x0` reads zero regardless of bindings.
pub fn hart_eval(
    program: &[Instruction],
    hart: usize,
    init_regs: &BTreeMap<Reg, Value>,
    read_values: &BTreeMap<EventId, Value>,
) -> HartEval {
    let mut regs = init_regs.clone();
    regs.insert(Reg::ZERO, Value::Int(0));
    let mut write_values = BTreeMap::new();

    let read_reg = |regs: &BTreeMap<Reg, Value>, r: Reg| -> Value {
        if r.is_zero() {
            Value::Int(0)
        } else {
            regs.get(&r).cloned().unwrap_or(Value::Int(0))
        }
    };

    let mut index = 0usize;
    for instr in program {
        match instr {
            Instruction::AddImmediate { dst, src, imm } => {
                let v = match read_reg(&regs, *src) {
                    Value::Int(n) => Value::Int(n.wrapping_add(*imm)),
                    // Addresses are opaque; validation rejects arithmetic
                    // on them, so the immediate is ignored here.
                    addr @ Value::Addr(_) => addr,
                };
                if !dst.is_zero() {
                    regs.insert(*dst, v);
                }
            }
            Instruction::Load { dst, .. } => {
                let id = EventId::Program { hart, index };
                let v = read_values.get(&id).cloned().unwrap_or(Value::Int(0));
                if !dst.is_zero() {
                    regs.insert(*dst, v);
                }
                index += 1;
            }
            Instruction::Store { src, .. } => {
                let id = EventId::Program { hart, index };
                write_values.insert(id, read_reg(&regs, *src));
                index += 1;
            }
            Instruction::Fence { .. } => {
                index += 1;
            }
        }
    }
    HartEval { regs, write_values }
}
