//! Finite binary relations over event identifiers.
//!
//! A [`Relation`] is a set of ordered pairs over an explicit carrier set.
//! Everything the memory model needs reduces to a handful of operations on
//! these: union, composition, inverse, transitive closure, and acyclicity
//! with cycle extraction. All iteration is over `BTreeSet`s, so results and
//! witness cycles are deterministic for a given input.

use std::collections::{BTreeMap, BTreeSet};

/// A finite binary relation: a carrier set plus a set of ordered pairs
/// drawn from it. Inserting a pair extends the carrier as needed, so
/// `pairs ⊆ carrier × carrier` holds by construction.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Relation<T: Copy + Ord> {
    carrier: BTreeSet<T>,
    pairs: BTreeSet<(T, T)>,
}

/// Result of an acyclicity check: either no directed cycle exists, or one
/// witness cycle is returned as a closed walk (first element repeated last).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleCheck<T> {
    Acyclic,
    Cycle(Vec<T>),
}

impl<T: Copy + Ord> Relation<T> {
    pub fn new() -> Self {
        Relation { carrier: BTreeSet::new(), pairs: BTreeSet::new() }
    }

    /// An empty relation whose carrier is pre-populated, so isolated nodes
    /// still show up in graph output and cycle checks.
    pub fn with_carrier(nodes: impl IntoIterator<Item = T>) -> Self {
        Relation { carrier: nodes.into_iter().collect(), pairs: BTreeSet::new() }
    }

    pub fn insert(&mut self, a: T, b: T) {
        self.carrier.insert(a);
        self.carrier.insert(b);
        self.pairs.insert((a, b));
    }

    pub fn add_node(&mut self, a: T) {
        self.carrier.insert(a);
    }

    pub fn contains(&self, a: T, b: T) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn carrier(&self) -> impl Iterator<Item = T> + '_ {
        self.carrier.iter().copied()
    }

    pub fn union(&self, other: &Relation<T>) -> Relation<T> {
        let mut out = self.clone();
        out.carrier.extend(other.carrier.iter().copied());
        out.pairs.extend(other.pairs.iter().copied());
        out
    }

    /// Relational composition: `(a, c)` is included when `(a, b) ∈ self`
    /// and `(b, c) ∈ other` for some `b`.
    pub fn compose(&self, other: &Relation<T>) -> Relation<T> {
        let mut out = Relation::new();
        let mut by_src: BTreeMap<T, Vec<T>> = BTreeMap::new();
        for (b, c) in other.pairs() {
            by_src.entry(b).or_default().push(c);
        }
        for (a, b) in self.pairs() {
            if let Some(cs) = by_src.get(&b) {
                for &c in cs {
                    out.insert(a, c);
                }
            }
        }
        out
    }

    pub fn inverse(&self) -> Relation<T> {
        let mut out = Relation::with_carrier(self.carrier());
        for (a, b) in self.pairs() {
            out.insert(b, a);
        }
        out
    }

    /// Keep only the pairs satisfying `keep`; the carrier is unchanged.
    pub fn filter(&self, mut keep: impl FnMut(T, T) -> bool) -> Relation<T> {
        let mut out = Relation::with_carrier(self.carrier());
        for (a, b) in self.pairs() {
            if keep(a, b) {
                out.insert(a, b);
            }
        }
        out
    }

    /// Smallest transitive superset of the relation. Idempotent.
    pub fn transitive_closure(&self) -> Relation<T> {
        let mut out = Relation::with_carrier(self.carrier());
        let adj = self.adjacency();
        for &start in &self.carrier {
            // DFS collecting everything reachable in one or more steps.
            let mut reached: BTreeSet<T> = BTreeSet::new();
            let mut stack: Vec<T> = adj.get(&start).map(|s| s.iter().rev().copied().collect()).unwrap_or_default();
            while let Some(n) = stack.pop() {
                if reached.insert(n) {
                    if let Some(next) = adj.get(&n) {
                        stack.extend(next.iter().rev().copied());
                    }
                }
            }
            for n in reached {
                out.insert(start, n);
            }
        }
        out
    }

    /// Decide acyclicity; on failure return one directed cycle as a closed
    /// event sequence. Nodes and edges are explored in sorted order, and the
    /// returned cycle is rotated so its smallest element comes first, so the
    /// witness is deterministic.
    pub fn acyclic_or_cycle(&self) -> CycleCheck<T> {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let adj = self.adjacency();
        let mut color: BTreeMap<T, Color> = self.carrier.iter().map(|&n| (n, Color::White)).collect();
        let mut path: Vec<T> = Vec::new();

        // Iterative DFS; frames carry the node and its remaining successors.
        for &root in &self.carrier {
            if color[&root] != Color::White {
                continue;
            }
            let mut frames: Vec<(T, Vec<T>)> = Vec::new();
            color.insert(root, Color::Gray);
            path.push(root);
            frames.push((root, adj.get(&root).map(|s| s.iter().copied().collect()).unwrap_or_default()));
            while let Some((node, succs)) = frames.last_mut() {
                let node = *node;
                match succs.first().copied() {
                    None => {
                        frames.pop();
                        path.pop();
                        color.insert(node, Color::Black);
                    }
                    Some(next) => {
                        succs.remove(0);
                        match color[&next] {
                            Color::Gray => {
                                let pos = path.iter().position(|&n| n == next).expect("gray node on path");
                                let mut cycle: Vec<T> = path[pos..].to_vec();
                                rotate_to_min(&mut cycle);
                                cycle.push(cycle[0]);
                                return CycleCheck::Cycle(cycle);
                            }
                            Color::White => {
                                color.insert(next, Color::Gray);
                                path.push(next);
                                let next_succs =
                                    adj.get(&next).map(|s| s.iter().copied().collect()).unwrap_or_default();
                                frames.push((next, next_succs));
                            }
                            Color::Black => {}
                        }
                    }
                }
            }
        }
        CycleCheck::Acyclic
    }

    fn adjacency(&self) -> BTreeMap<T, BTreeSet<T>> {
        let mut adj: BTreeMap<T, BTreeSet<T>> = BTreeMap::new();
        for (a, b) in self.pairs() {
            adj.entry(a).or_default().insert(b);
        }
        adj
    }
}

fn rotate_to_min<T: Copy + Ord>(cycle: &mut [T]) {
    if let Some(min_pos) = cycle.iter().enumerate().min_by_key(|(_, n)| **n).map(|(i, _)| i) {
        cycle.rotate_left(min_pos);
    }
}

/// Derive the from-reads relation: `fr = rf⁻¹ ; co`.
///
/// `rf` holds (write, read) pairs; `co` is the per-location strict total
/// order on writes with the initial write first. Since both rf and co only
/// relate same-location events, the composition relates a read to exactly
/// the writes that coherence-overwrite the write it read from.
pub fn derive_fr<T: Copy + Ord>(rf: &Relation<T>, co: &Relation<T>) -> Relation<T> {
    rf.inverse().compose(co)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(pairs: &[(u32, u32)]) -> Relation<u32> {
        let mut r = Relation::new();
        for &(a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    #[test]
    fn closure_adds_rule_three_pair() {
        // {(a,b),(b,c)} gains (a,c)
        let tc = rel(&[(1, 2), (2, 3)]).transitive_closure();
        assert!(tc.contains(1, 2) && tc.contains(2, 3) && tc.contains(1, 3));
        assert_eq!(tc.len(), 3);
    }

    #[test]
    fn closure_of_empty_is_empty() {
        let tc = Relation::<u32>::new().transitive_closure();
        assert!(tc.is_empty());
    }

    #[test]
    fn closure_of_four_chain_has_six_pairs() {
        // A total order over 4 events is already transitive: 3+2+1 pairs.
        let mut r = Relation::new();
        for i in 0..4u32 {
            for j in (i + 1)..4 {
                r.insert(i, j);
            }
        }
        assert_eq!(r.len(), 6);
        let tc = r.transitive_closure();
        assert_eq!(tc, r);
    }

    #[test]
    fn two_cycle_is_detected() {
        match rel(&[(1, 2), (2, 1)]).acyclic_or_cycle() {
            CycleCheck::Cycle(c) => assert_eq!(c, vec![1, 2, 1]),
            CycleCheck::Acyclic => panic!("expected a cycle"),
        }
    }

    #[test]
    fn chain_is_acyclic() {
        assert_eq!(rel(&[(1, 2), (2, 3), (3, 4)]).acyclic_or_cycle(), CycleCheck::Acyclic);
    }

    #[test]
    fn cycle_witness_is_a_real_cycle() {
        let r = rel(&[(5, 1), (1, 3), (3, 5), (2, 4)]);
        match r.acyclic_or_cycle() {
            CycleCheck::Cycle(c) => {
                assert_eq!(c.first(), c.last());
                for w in c.windows(2) {
                    assert!(r.contains(w[0], w[1]), "edge {:?} not in relation", w);
                }
                // rotated so the smallest node leads
                assert_eq!(c[0], 1);
            }
            CycleCheck::Acyclic => panic!("expected a cycle"),
        }
    }

    #[test]
    fn fr_from_initial_write() {
        // write 0 is the initial write, write 1 the program write; the read
        // (event 10) reads the initial value, so fr relates it to write 1.
        let mut rf = Relation::new();
        rf.insert(0, 10);
        let mut co = Relation::new();
        co.insert(0, 1);
        let fr = derive_fr(&rf, &co);
        assert!(fr.contains(10, 1));
        assert_eq!(fr.len(), 1);
    }

    #[test]
    fn fr_empty_for_co_maximal_source() {
        let mut rf = Relation::new();
        rf.insert(1, 10); // reads from the co-maximal write
        let mut co = Relation::new();
        co.insert(0, 1);
        assert!(derive_fr(&rf, &co).is_empty());
    }

    #[test]
    fn fr_two_writes() {
        // w1 co-before w2, read from w1 -> fr = {(r, w2)}
        let mut rf = Relation::new();
        rf.insert(1, 10);
        let mut co = Relation::new();
        co.insert(0, 1);
        co.insert(0, 2);
        co.insert(1, 2);
        let fr = derive_fr(&rf, &co);
        assert_eq!(fr.len(), 1);
        assert!(fr.contains(10, 2));
    }

    #[test]
    fn compose_and_inverse() {
        let r = rel(&[(1, 2), (2, 3)]);
        let inv = r.inverse();
        assert!(inv.contains(2, 1) && inv.contains(3, 2));
        let c = r.compose(&r);
        assert_eq!(c.len(), 1);
        assert!(c.contains(1, 3));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_relation() -> impl Strategy<Value = Relation<u32>> {
            proptest::collection::vec((0u32..8, 0u32..8), 0..24).prop_map(|pairs| {
                let mut r = Relation::new();
                for (a, b) in pairs {
                    r.insert(a, b);
                }
                r
            })
        }

        proptest! {
            #[test]
            fn closure_is_idempotent(r in arb_relation()) {
                let tc = r.transitive_closure();
                prop_assert_eq!(tc.transitive_closure(), tc);
            }

            #[test]
            fn closure_is_transitive_superset(r in arb_relation()) {
                let tc = r.transitive_closure();
                for (a, b) in r.pairs() {
                    prop_assert!(tc.contains(a, b));
                }
                for (a, b) in tc.pairs() {
                    for (c, d) in tc.pairs() {
                        if b == c {
                            prop_assert!(tc.contains(a, d));
                        }
                    }
                }
            }

            #[test]
            fn acyclicity_agrees_with_closure(r in arb_relation()) {
                let direct = matches!(r.acyclic_or_cycle(), CycleCheck::Acyclic);
                let via_tc = matches!(r.transitive_closure().acyclic_or_cycle(), CycleCheck::Acyclic);
                prop_assert_eq!(direct, via_tc);
            }

            #[test]
            fn cycle_witnesses_walk_real_edges(r in arb_relation()) {
                if let CycleCheck::Cycle(c) = r.acyclic_or_cycle() {
                    prop_assert!(c.len() >= 2);
                    prop_assert_eq!(c.first(), c.last());
                    for w in c.windows(2) {
                        prop_assert!(r.contains(w[0], w[1]));
                    }
                }
            }

            #[test]
            fn fr_is_disjoint_from_rf_inverse(
                writes in proptest::collection::btree_set(0u32..5, 1..5),
                reads in proptest::collection::btree_set(10u32..15, 1..5),
            ) {
                // One location: co totally orders the writes; every read
                // picks a source write by round-robin.
                let writes: Vec<u32> = writes.into_iter().collect();
                let mut co = Relation::new();
                for i in 0..writes.len() {
                    for j in (i + 1)..writes.len() {
                        co.insert(writes[i], writes[j]);
                    }
                }
                let mut rf = Relation::new();
                for (k, &r) in reads.iter().enumerate() {
                    rf.insert(writes[k % writes.len()], r);
                }
                let fr = derive_fr(&rf, &co);
                let rf_inv = rf.inverse();
                for (a, b) in fr.pairs() {
                    prop_assert!(!rf_inv.contains(a, b));
                    // fr sources are reads, targets are writes
                    prop_assert!(reads.contains(&a));
                    prop_assert!(writes.contains(&b));
                }
            }
        }
    }
}
