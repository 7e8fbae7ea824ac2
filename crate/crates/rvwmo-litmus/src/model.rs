//! The RVWMO axioms, extended with explicit load-acquire and
//! store-release orderings.
//!
//! Preserved program order (ppo) is the subset of program order the ISA
//! guarantees globally. The default rule set covers fences, acquire and
//! release annotations, same-location write-write coherence, and
//! syntactic dependencies; each rule can be toggled off for ablation
//! runs. An execution is accepted when per-location coherence holds and
//! the union ppo ∪ rf-external ∪ co ∪ fr is acyclic; a rejection carries
//! the witness cycle with its edges labeled by relation.

use std::fmt;

use crate::exec::{Annotation, Elaboration, Event, EventId, EventKind};
use crate::relation::{CycleCheck, Relation};

/// Which ppo rules are enabled. All rules are on by default.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PpoRules {
    /// Order across a fence whose predecessor set covers the earlier
    /// event and whose successor set covers the later one.
    pub fence: bool,
    /// An acquire read is ordered before every later memory event of its
    /// hart.
    pub acquire: bool,
    /// A release write is ordered after every earlier memory event of its
    /// hart.
    pub release: bool,
    /// Writes to the same location stay in program order.
    pub coherence_ww: bool,
    /// Syntactic address and data dependencies are preserved.
    pub dep: bool,
}

impl Default for PpoRules {
    fn default() -> Self {
        PpoRules { fence: true, acquire: true, release: true, coherence_ww: true, dep: true }
    }
}

impl PpoRules {
    pub fn none() -> Self {
        PpoRules { fence: false, acquire: false, release: false, coherence_ww: false, dep: false }
    }
}

/// Relation tag used to label cycle edges and graph output.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EdgeKind {
    PoLoc,
    Ppo,
    Rf,
    Co,
    Fr,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EdgeKind::PoLoc => "po-loc",
            EdgeKind::Ppo => "ppo",
            EdgeKind::Rf => "rf",
            EdgeKind::Co => "co",
            EdgeKind::Fr => "fr",
        };
        write!(f, "{name}")
    }
}

/// A directed cycle with each edge labeled by the relation it came from.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CycleWitness {
    /// Closed walk: first event repeated last.
    pub events: Vec<EventId>,
    /// `edges[i]` connects `events[i]` to `events[i + 1]`.
    pub edges: Vec<(EventId, EventId, EdgeKind)>,
}

impl CycleWitness {
    pub fn edge_kinds(&self) -> Vec<EdgeKind> {
        self.edges.iter().map(|(_, _, k)| *k).collect()
    }
}

/// Outcome of an axiom check.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AxiomCheck {
    Pass,
    Fail(CycleWitness),
}

impl AxiomCheck {
    pub fn passed(&self) -> bool {
        matches!(self, AxiomCheck::Pass)
    }
}

/// Compute preserved program order for an elaborated test. The result
/// relates memory events only; fences mediate orderings but are never
/// endpoints. ppo does not depend on the candidate's rf/co choice, so it
/// is computed once per test.
pub fn compute_ppo(elab: &Elaboration, rules: &PpoRules) -> Relation<EventId> {
    let mut ppo = Relation::new();
    let event = |id: EventId| -> &Event { elab.event(id).expect("po endpoints are elaborated events") };

    for (a_id, b_id) in elab.po.pairs() {
        let a = event(a_id);
        let b = event(b_id);
        if !a.is_memory() || !b.is_memory() {
            continue;
        }

        if rules.acquire && a.kind == EventKind::Read && a.annotation == Annotation::Acquire {
            ppo.insert(a_id, b_id);
        }
        if rules.release && b.kind == EventKind::Write && b.annotation == Annotation::Release {
            ppo.insert(a_id, b_id);
        }
        if rules.coherence_ww
            && a.kind == EventKind::Write
            && b.kind == EventKind::Write
            && a.location == b.location
        {
            ppo.insert(a_id, b_id);
        }
        if rules.dep && (elab.addr_dep.contains(a_id, b_id) || elab.data_dep.contains(a_id, b_id)) {
            ppo.insert(a_id, b_id);
        }
        if rules.fence {
            // A fence between a and b orders them when a's kind is in the
            // fence's predecessor set and b's kind is in its successor set.
            let mediated = elab.events.iter().any(|f| {
                f.kind == EventKind::Fence
                    && elab.po.contains(a_id, f.id)
                    && elab.po.contains(f.id, b_id)
                    && f.fence.is_some_and(|(pred, succ)| {
                        covers(pred, a.kind) && covers(succ, b.kind)
                    })
            });
            if mediated {
                ppo.insert(a_id, b_id);
            }
        }
    }
    ppo
}

fn covers(set: crate::litmus::AccessSet, kind: EventKind) -> bool {
    match kind {
        EventKind::Read => set.reads,
        EventKind::Write => set.writes,
        EventKind::Fence => false,
    }
}

/// Check acyclicity of a union of labeled relations. A cycle edge present
/// in several relations is labeled with the first matching tag in the
/// order given.
fn acyclic_or_labeled_cycle(parts: &[(EdgeKind, &Relation<EventId>)]) -> AxiomCheck {
    let mut union = Relation::new();
    for (_, rel) in parts {
        union = union.union(rel);
    }
    match union.acyclic_or_cycle() {
        CycleCheck::Acyclic => AxiomCheck::Pass,
        CycleCheck::Cycle(events) => {
            let edges = events
                .windows(2)
                .map(|w| {
                    let kind = parts
                        .iter()
                        .find(|(_, rel)| rel.contains(w[0], w[1]))
                        .map(|(k, _)| *k)
                        .expect("cycle edge comes from some part");
                    (w[0], w[1], kind)
                })
                .collect();
            AxiomCheck::Fail(CycleWitness { events, edges })
        }
    }
}

/// Per-location coherence: program order restricted to same-location
/// memory accesses, together with rf, co, and fr, must be acyclic.
pub fn coherence_check(
    po_loc: &Relation<EventId>,
    rf: &Relation<EventId>,
    co: &Relation<EventId>,
    fr: &Relation<EventId>,
) -> AxiomCheck {
    acyclic_or_labeled_cycle(&[
        (EdgeKind::PoLoc, po_loc),
        (EdgeKind::Rf, rf),
        (EdgeKind::Co, co),
        (EdgeKind::Fr, fr),
    ])
}

/// The main axiom: ppo ∪ rf-external ∪ co ∪ fr must be acyclic. Same-hart
/// rf pairs are excluded, modeling store-to-load forwarding; they still
/// participate in the coherence check.
pub fn main_axiom_check(
    ppo: &Relation<EventId>,
    rf_external: &Relation<EventId>,
    co: &Relation<EventId>,
    fr: &Relation<EventId>,
) -> AxiomCheck {
    acyclic_or_labeled_cycle(&[
        (EdgeKind::Ppo, ppo),
        (EdgeKind::Rf, rf_external),
        (EdgeKind::Co, co),
        (EdgeKind::Fr, fr),
    ])
}

/// Lamport-style happened-before over one execution: the transitive
/// closure of ppo together with cross-hart reads-from (message send and
/// receive). Used for reporting; verdicts come from the axiom checks.
pub fn happens_before(ppo: &Relation<EventId>, rf_external: &Relation<EventId>) -> Relation<EventId> {
    ppo.union(rf_external).transitive_closure()
}

/// Restrict program order to same-location memory event pairs.
pub fn po_loc(elab: &Elaboration) -> Relation<EventId> {
    elab.po.filter(|a, b| {
        match (elab.event(a), elab.event(b)) {
            (Some(ea), Some(eb)) => {
                ea.is_memory() && eb.is_memory() && ea.location == eb.location
            }
            _ => false,
        }
    })
}
