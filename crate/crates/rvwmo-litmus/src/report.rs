//! Text reports and DOT event graphs.
//!
//! Reports list the verdict, the positive/negative candidate counts, and
//! the sorted reachable states; graphs render one execution with its
//! relations, one subgraph cluster per hart, in the style of conventional
//! litmus diagrams. Both outputs are byte-deterministic: all iteration
//! is over sorted structures.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::exec::{Annotation, Event, EventId, EventKind};
use crate::model::CycleWitness;
use crate::relation::Relation;
use crate::solver::{format_state, CandidateExecution, Status, Verdict};
use crate::litmus::Value;

/// A render-ready graph: labeled nodes grouped by hart, labeled edges,
/// and an optional set of highlighted (cycle) edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSpec {
    /// (id, label, hart) per node; `hart == None` marks initial writes.
    pub nodes: Vec<(EventId, String, Option<usize>)>,
    /// (source, target, relation name).
    pub edges: Vec<(EventId, EventId, String)>,
    /// Edges drawn highlighted, as (source, target, relation name).
    pub highlight: Vec<(EventId, EventId, String)>,
}

/// Label for one event: `a: Wx=1`, `c: Raqy=1`, with acquire/release
/// markers between the access letter and the location.
fn node_label(letter: &str, event: &Event, values: &BTreeMap<EventId, Value>) -> String {
    let kind = match event.kind {
        EventKind::Read => "R",
        EventKind::Write => "W",
        EventKind::Fence => "F",
    };
    let marker = match event.annotation {
        Annotation::Acquire => "aq",
        Annotation::Release => "rl",
        Annotation::None => "",
    };
    let loc = event.location.as_deref().unwrap_or("");
    let value = values.get(&event.id).map(|v| format!("={v}")).unwrap_or_default();
    format!("{letter}: {kind}{marker}{loc}{value}")
}

fn letter(index: usize) -> String {
    let alphabet = b"abcdefghijklmnopqrstuvwxyz";
    let mut out = String::new();
    let mut i = index;
    loop {
        out.insert(0, alphabet[i % 26] as char);
        i /= 26;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    out
}

/// Build a graph for one execution. `events` should hold the memory
/// events to draw (program events plus initial writes); relations are
/// drawn in the order given.
pub fn build_graph(
    events: &[Event],
    values: &BTreeMap<EventId, Value>,
    relations: &[(&str, &Relation<EventId>)],
    highlight: Option<&CycleWitness>,
) -> GraphSpec {
    // Letters go to program events first, in id order, then to initial
    // writes, so `a` is the first event of hart 0.
    let mut program: Vec<&Event> = events.iter().filter(|e| e.id.hart().is_some()).collect();
    program.sort_by_key(|e| e.id);
    let mut init: Vec<&Event> = events.iter().filter(|e| e.id.hart().is_none()).collect();
    init.sort_by_key(|e| e.id);

    let mut nodes = Vec::new();
    for (i, event) in program.iter().chain(init.iter()).enumerate() {
        nodes.push((event.id, node_label(&letter(i), event, values), event.id.hart()));
    }
    nodes.sort_by_key(|(id, _, _)| *id);

    let node_ids: Vec<EventId> = nodes.iter().map(|(id, _, _)| *id).collect();
    let mut edges = Vec::new();
    for (name, rel) in relations {
        for (a, b) in rel.pairs() {
            if node_ids.contains(&a) && node_ids.contains(&b) {
                edges.push((a, b, name.to_string()));
            }
        }
    }

    let highlight = match highlight {
        None => Vec::new(),
        Some(cycle) => cycle.edges.iter().map(|(a, b, k)| (*a, *b, k.to_string())).collect(),
    };
    GraphSpec { nodes, edges, highlight }
}

fn edge_style(name: &str) -> &'static str {
    match name {
        "po" => "color=\"gray60\", style=dashed",
        "ppo" => "color=\"black\"",
        "rf" => "color=\"forestgreen\"",
        "co" => "color=\"blue3\"",
        "fr" => "color=\"orange3\"",
        "hb" => "color=\"purple\", style=dotted",
        _ => "color=\"gray30\"",
    }
}

/// Render a graph as DOT text.
pub fn render_dot(title: &str, spec: &GraphSpec) -> String {
    let mut out = String::new();
    let quoted = title.replace('"', "\\\"");
    writeln!(out, "digraph \"{quoted}\" {{").unwrap();
    writeln!(out, "  label=\"{quoted}\";").unwrap();
    writeln!(out, "  node [shape=box, fontname=\"Helvetica\"];").unwrap();
    writeln!(out, "  edge [fontname=\"Helvetica\", fontsize=10];").unwrap();

    let node_name = |id: EventId, ids: &[EventId]| -> String {
        format!("n{}", ids.iter().position(|x| *x == id).unwrap())
    };
    let ids: Vec<EventId> = spec.nodes.iter().map(|(id, _, _)| *id).collect();

    let init_nodes: Vec<_> = spec.nodes.iter().filter(|(_, _, hart)| hart.is_none()).collect();
    if !init_nodes.is_empty() {
        writeln!(out, "  subgraph cluster_init {{").unwrap();
        writeln!(out, "    label=\"init\";").unwrap();
        writeln!(out, "    style=dashed;").unwrap();
        for (id, label, _) in &init_nodes {
            writeln!(out, "    {} [label=\"{}\"];", node_name(*id, &ids), label).unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }

    let harts: Vec<usize> = {
        let mut hs: Vec<usize> = spec.nodes.iter().filter_map(|(_, _, h)| *h).collect();
        hs.sort_unstable();
        hs.dedup();
        hs
    };
    for hart in harts {
        writeln!(out, "  subgraph cluster_hart_{hart} {{").unwrap();
        writeln!(out, "    label=\"P{hart}\";").unwrap();
        for (id, label, h) in &spec.nodes {
            if *h == Some(hart) {
                writeln!(out, "    {} [label=\"{}\"];", node_name(*id, &ids), label).unwrap();
            }
        }
        writeln!(out, "  }}").unwrap();
    }

    let mut edges = spec.edges.clone();
    edges.sort();
    for (a, b, name) in &edges {
        let highlighted = spec.highlight.iter().any(|(ha, hb, hn)| ha == a && hb == b && hn == name);
        let style = if highlighted {
            "color=\"red\", penwidth=2.5, fontcolor=\"red\"".to_string()
        } else {
            edge_style(name).to_string()
        };
        writeln!(
            out,
            "  {} -> {} [label=\"{}\", {}];",
            node_name(*a, &ids),
            node_name(*b, &ids),
            name,
            style
        )
        .unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}

/// Graph one candidate execution with the standard relation set: adjacent
/// program order, ppo, rf, co, and fr.
pub fn emit_dot(
    title: &str,
    events: &[Event],
    candidate: &CandidateExecution,
    ppo: &Relation<EventId>,
    highlight: Option<&CycleWitness>,
) -> String {
    let po_adjacent = adjacent_po(events);
    let relations: Vec<(&str, &Relation<EventId>)> = vec![
        ("po", &po_adjacent),
        ("ppo", ppo),
        ("rf", &candidate.rf_rel),
        ("co", &candidate.co_rel),
        ("fr", &candidate.fr),
    ];
    let spec = build_graph(events, &candidate.values, &relations, highlight);
    render_dot(title, &spec)
}

/// Cover of program order over memory events: consecutive pairs only,
/// which keeps the drawn graph readable.
fn adjacent_po(events: &[Event]) -> Relation<EventId> {
    let mut by_hart: BTreeMap<usize, Vec<EventId>> = BTreeMap::new();
    for e in events {
        if let Some(h) = e.id.hart() {
            by_hart.entry(h).or_default().push(e.id);
        }
    }
    let mut rel = Relation::new();
    for ids in by_hart.values() {
        let mut sorted = ids.clone();
        sorted.sort();
        for w in sorted.windows(2) {
            rel.insert(w[0], w[1]);
        }
    }
    rel
}

fn format_cycle(cycle: &CycleWitness, events: &[Event]) -> String {
    let describe = |id: EventId| -> String {
        events.iter().find(|e| e.id == id).map(|e| e.descriptor()).unwrap_or_else(|| format!("{id:?}"))
    };
    let mut out = String::new();
    for (i, (a, b, kind)) in cycle.edges.iter().enumerate() {
        if i == 0 {
            out.push_str(&describe(*a));
        }
        let _ = write!(out, " ->{kind}-> {}", describe(*b));
    }
    out
}

/// Render a verdict as stable text: name, verdict, positive/negative
/// counts, the sorted state list with witness counts, one forbidding
/// cycle when present, and the expectation line when the test carries
/// one.
pub fn format_report(verdict: &Verdict, events: &[Event]) -> String {
    let mut out = String::new();
    writeln!(out, "Test {} {}", verdict.name, verdict.status).unwrap();
    writeln!(out, "States: {}", verdict.states.len()).unwrap();
    for (state, count) in &verdict.states {
        writeln!(out, "{count} *> {}", format_state(state)).unwrap();
    }
    writeln!(out, "Positive: {} Negative: {}", verdict.positive, verdict.negative).unwrap();
    writeln!(out, "Condition {}", verdict.condition).unwrap();
    if verdict.status == Status::Forbidden {
        if let Some((_, cycle)) = verdict.forbidding_cycles.first() {
            writeln!(out, "Forbidden by cycle: {}", format_cycle(cycle, events)).unwrap();
        }
    }
    if let Some(expected) = verdict.expected {
        let matches = matches!(
            (expected, verdict.status),
            (crate::litmus::Expectation::Allowed, Status::Allowed)
                | (crate::litmus::Expectation::Forbidden, Status::Forbidden)
        );
        writeln!(out, "Expectation: {} (expected {expected})", if matches { "match" } else { "MISMATCH" })
            .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::elaborate_events;
    use crate::litmus::parse_litmus;
    use crate::model::{compute_ppo, PpoRules};
    use crate::solver::{graph_events, solve_test, SolveLimits};

    const LISTING2: &str = "\
RISCV lw.aq sw.rl
{
0:x1=x; 0:x2=y;
1:x1=x; 1:x2=y;
x=0; y=0;
}
P0                 | P1              ;
addi x3, x0, 1     | lw.aq x3, 0(x2) ;
addi x4, x0, 1     | lw    x4, 0(x1) ;
sw    x3, 0(x1)    |                 ;
sw.rl x4, 0(x2)    |                 ;
exists (1:x3=1 /\\ 1:x4=0)
";

    /// Minimal grammar-level DOT check: brace balance, statement shape,
    /// and edge syntax. Catches malformed output without a graphviz
    /// dependency.
    fn assert_valid_dot(text: &str) {
        let mut lines = text.lines();
        let first = lines.next().expect("non-empty");
        assert!(first.starts_with("digraph \"") && first.ends_with('{'), "bad header: {first}");
        let mut depth = 1i32;
        for line in lines {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed.starts_with("subgraph ") {
                assert!(trimmed.ends_with('{'), "subgraph must open a block: {trimmed}");
                depth += 1;
                continue;
            }
            if trimmed == "}" {
                depth -= 1;
                continue;
            }
            assert!(trimmed.ends_with(';'), "statement must end with `;`: {trimmed}");
            if trimmed.contains("->") {
                let (src, rest) = trimmed.split_once("->").unwrap();
                assert!(!src.trim().is_empty());
                assert!(rest.trim().contains('['), "edge needs attributes: {trimmed}");
            }
        }
        assert_eq!(depth, 0, "unbalanced braces");
    }

    #[test]
    fn forbidden_candidate_graph_has_six_nodes_and_highlighted_cycle() {
        let test = parse_litmus(LISTING2).unwrap();
        let verdict = solve_test(&test, &PpoRules::default(), &SolveLimits::default()).unwrap();
        let elab = elaborate_events(&test);
        let events = graph_events(&test, &elab);
        let ppo = compute_ppo(&elab, &PpoRules::default());
        let (candidate, cycle) = &verdict.forbidding_cycles[0];
        let dot = emit_dot(&test.name, &events, candidate, &ppo, Some(cycle));
        assert_valid_dot(&dot);
        // 4 program memory events + 2 initial writes.
        let node_lines =
            dot.lines().filter(|l| l.contains("[label=\"") && !l.contains("->")).count();
        assert_eq!(node_lines, 6);
        assert_eq!(dot.matches("penwidth=2.5").count(), 4);
        assert!(dot.contains("Raqy"));
        assert!(dot.contains("Wrly"));
    }

    #[test]
    fn empty_execution_renders_valid_dot() {
        let spec = GraphSpec { nodes: vec![], edges: vec![], highlight: vec![] };
        let dot = render_dot("empty", &spec);
        assert_valid_dot(&dot);
    }

    #[test]
    fn report_for_allowed_test_lists_states() {
        let text = LISTING2.replace("lw.aq", "lw   ").replace("sw.rl", "sw   ");
        let test = parse_litmus(&text).unwrap();
        let verdict = solve_test(&test, &PpoRules::default(), &SolveLimits::default()).unwrap();
        let elab = elaborate_events(&test);
        let events = graph_events(&test, &elab);
        let report = format_report(&verdict, &events);
        assert!(report.contains("Allowed"));
        assert!(report.contains("States: 4"));
        assert!(report.contains("1 *> 1:x3=1; 1:x4=0;"));
        assert!(report.contains("Positive: 1 Negative: 3"));
    }

    #[test]
    fn report_for_forbidden_test_has_zero_positive_and_a_cycle() {
        let test = parse_litmus(LISTING2).unwrap();
        let verdict = solve_test(&test, &PpoRules::default(), &SolveLimits::default()).unwrap();
        let elab = elaborate_events(&test);
        let events = graph_events(&test, &elab);
        let report = format_report(&verdict, &events);
        assert!(report.contains("Forbidden"));
        assert!(report.contains("Positive: 0"));
        assert!(report.contains("Forbidden by cycle: 0:Wx ->ppo-> 0:Wrly ->rf-> 1:Raqy ->ppo-> 1:Rx ->fr-> 0:Wx"));
    }

    #[test]
    fn report_is_byte_stable() {
        let test = parse_litmus(LISTING2).unwrap();
        let elab = elaborate_events(&test);
        let events = graph_events(&test, &elab);
        let a = format_report(
            &solve_test(&test, &PpoRules::default(), &SolveLimits::default()).unwrap(),
            &events,
        );
        let b = format_report(
            &solve_test(&test, &PpoRules::default(), &SolveLimits::default()).unwrap(),
            &events,
        );
        assert_eq!(a, b);
    }
}
