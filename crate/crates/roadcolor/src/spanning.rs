//! Functional spanning subgraphs: cycle/tree decomposition, the hill-climb
//! and rewiring moves that shape them, and the coloring that paints the
//! chosen edges one color.
//!
//! A spanning subgraph here keeps exactly one out-edge per vertex, so it
//! always splits into disjoint cycles with trees hanging off them. The goal
//! of [`find_stable_friendly_spanning`] is a subgraph whose deepest tree
//! vertices all sit in one tree; coloring its edges with color 0 then forces
//! a stable merging pair in the resulting automaton.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{validate_agw, Coloring, Graph, VertexId};
use crate::{Error, Result};

/// One chosen out-slot per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningSubgraph {
    pub choice: Vec<usize>,
}

impl SpanningSubgraph {
    pub fn new(choice: Vec<usize>) -> Self {
        Self { choice }
    }
}

/// Cycle and tree structure of a spanning subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub on_cycle: Vec<bool>,
    /// Distance to the cycle along chosen edges; 0 exactly on cycles.
    pub level: Vec<usize>,
    /// The cycle vertex a tree vertex's path reaches; itself on a cycle.
    pub tree_root: Vec<VertexId>,
    /// Dense cycle ids ordered by smallest member; None off-cycle.
    pub cycle_id: Vec<Option<usize>>,
    /// Number of chosen edges lying on cycles, which equals the number of
    /// cycle vertices.
    pub cycle_edge_count: usize,
}

impl Decomposition {
    pub fn max_level(&self) -> usize {
        self.level.iter().copied().max().unwrap_or(0)
    }

    /// Vertices at maximal positive level; empty when there are no trees.
    pub fn max_level_vertices(&self) -> Vec<VertexId> {
        let max = self.max_level();
        if max == 0 {
            return Vec::new();
        }
        (0..self.level.len())
            .filter(|&v| self.level[v] == max)
            .collect()
    }

    /// Whether the maximal level is positive and attained inside one tree.
    pub fn max_level_in_single_tree(&self) -> bool {
        let tops = self.max_level_vertices();
        match tops.split_first() {
            None => false,
            Some((&first, rest)) => {
                let root = self.tree_root[first];
                rest.iter().all(|&v| self.tree_root[v] == root)
            }
        }
    }
}

pub(crate) fn decompose_choice(g: &Graph, choice: &[usize]) -> Decomposition {
    let n = g.n();
    debug_assert_eq!(choice.len(), n);
    let succ: Vec<VertexId> = (0..n).map(|v| g.target(v, choice[v])).collect();
    let mut indeg = vec![0usize; n];
    for &t in &succ {
        indeg[t] += 1;
    }
    // Peel tree vertices leaves-first; whatever survives lies on cycles.
    let mut peel_order = Vec::new();
    let mut queue: std::collections::VecDeque<VertexId> =
        (0..n).filter(|&v| indeg[v] == 0).collect();
    while let Some(v) = queue.pop_front() {
        peel_order.push(v);
        indeg[succ[v]] -= 1;
        if indeg[succ[v]] == 0 {
            queue.push_back(succ[v]);
        }
    }
    let mut on_cycle = vec![true; n];
    for &v in &peel_order {
        on_cycle[v] = false;
    }
    let mut level = vec![0usize; n];
    let mut tree_root: Vec<VertexId> = (0..n).collect();
    // Reverse peel order lists parents before children.
    for &v in peel_order.iter().rev() {
        level[v] = level[succ[v]] + 1;
        tree_root[v] = if on_cycle[succ[v]] {
            succ[v]
        } else {
            tree_root[succ[v]]
        };
    }
    let mut cycle_id = vec![None; n];
    let mut next_id = 0;
    for v in 0..n {
        if on_cycle[v] && cycle_id[v].is_none() {
            let mut u = v;
            while cycle_id[u].is_none() {
                cycle_id[u] = Some(next_id);
                u = succ[u];
            }
            next_id += 1;
        }
    }
    let cycle_edge_count = on_cycle.iter().filter(|&&c| c).count();
    Decomposition {
        on_cycle,
        level,
        tree_root,
        cycle_id,
        cycle_edge_count,
    }
}

/// Splits the functional graph of `s` into cycles and hanging trees.
pub fn decompose(g: &Graph, s: &SpanningSubgraph) -> Decomposition {
    decompose_choice(g, &s.choice)
}

/// First vertex receiving the complete out-edge sets of two distinct
/// vertices, as `(target, source1, source2)`.
pub fn has_vertex_with_two_incoming_bunches(g: &Graph) -> Option<(VertexId, VertexId, VertexId)> {
    let n = g.n();
    let mut bunch_sources = vec![Vec::new(); n];
    for v in 0..n {
        let t = g.target(v, 0);
        if g.out_slots(v).iter().all(|&u| u == t) {
            bunch_sources[t].push(v);
        }
    }
    bunch_sources
        .iter()
        .enumerate()
        .find(|(_, sources)| sources.len() >= 2)
        .map(|(t, sources)| (t, sources[0], sources[1]))
}

/// Turns an all-cycles spanning subgraph into one with a unique deepest
/// vertex by rerouting a single chosen edge.
///
/// Takes the smallest vertex owning an out-edge whose target differs from
/// its chosen one and swaps that slot in. The rerouted cycle unrolls into a
/// path hanging below the new target, so exactly one vertex ends up at the
/// maximal level. Fails with [`Error::NoBreakingEdge`] when every vertex's
/// out-edges form a bunch.
pub fn break_all_cycles(g: &Graph, s: &SpanningSubgraph) -> Result<SpanningSubgraph> {
    let dec = decompose(g, s);
    if dec.cycle_edge_count != g.n() {
        return Err(Error::PreconditionViolated(
            "cycle breaking needs an all-cycles spanning subgraph".into(),
        ));
    }
    for v in 0..g.n() {
        let chosen = g.target(v, s.choice[v]);
        if let Some(slot) = (0..g.k()).find(|&slot| g.target(v, slot) != chosen) {
            let mut choice = s.choice.clone();
            choice[v] = slot;
            let out = SpanningSubgraph::new(choice);
            debug_assert_eq!(decompose(g, &out).max_level_vertices().len(), 1);
            return Ok(out);
        }
    }
    Err(Error::NoBreakingEdge)
}

/// Counters from [`find_stable_friendly_spanning_with_stats`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpanningStats {
    /// Accepted hill-climb swaps; each strictly grows the cycle edge count,
    /// so this never exceeds n.
    pub cycle_growth_steps: usize,
    /// Rewiring candidates evaluated after hill-climb fixpoints.
    pub rewire_attempts: usize,
    /// Cycle edge count of the returned subgraph.
    pub cycle_edge_count: usize,
}

enum Verdict {
    Grow,
    Done,
    Reject,
}

fn judge(g: &Graph, choice: &[usize], base_count: usize) -> Verdict {
    let dec = decompose_choice(g, choice);
    if dec.max_level_in_single_tree() {
        Verdict::Done
    } else if dec.cycle_edge_count > base_count {
        Verdict::Grow
    } else {
        Verdict::Reject
    }
}

enum RewireOutcome {
    Improved,
    Finished,
}

/// One rewiring pass at a hill-climb fixpoint whose deepest vertices span
/// several trees. Tries the three proof moves; every candidate either grows
/// the cycle edge count (back to hill-climbing), reaches the single-tree
/// goal, or is reverted.
fn rewire_pass(
    g: &Graph,
    choice: &mut Vec<usize>,
    stats: &mut SpanningStats,
) -> Result<RewireOutcome> {
    let n = g.n();
    let k = g.k();
    let dec = decompose_choice(g, choice);
    let base = dec.cycle_edge_count;
    let attempt_cap = 4 * n * k;
    let mut attempts = 0usize;

    // p: smallest deepest vertex; r: root of its tree; b: last tree vertex
    // on p's path; c: cycle predecessor of r.
    let max_lv = dec.max_level();
    let p = (0..n)
        .find(|&v| dec.level[v] == max_lv)
        .expect("max level attained");
    let r = dec.tree_root[p];
    let mut b = p;
    while g.target(b, choice[b]) != r {
        b = g.target(b, choice[b]);
    }
    let c = (0..n)
        .find(|&v| dec.on_cycle[v] && g.target(v, choice[v]) == r)
        .expect("cycle vertex has a cycle predecessor");
    let (a_v, a_slot) = (0..n)
        .flat_map(|v| (0..k).map(move |s| (v, s)))
        .find(|&(v, s)| g.target(v, s) == p)
        .expect("strong connectivity gives p an incoming edge");

    let mut try_swap = |choice: &mut Vec<usize>,
                        swaps: &[(VertexId, usize)],
                        attempts: &mut usize|
     -> Result<Option<RewireOutcome>> {
        *attempts += 1;
        stats.rewire_attempts += 1;
        if *attempts > attempt_cap {
            return Err(Error::AlgorithmStuck(format!(
                "{attempts} rewiring attempts without progress"
            )));
        }
        let saved: Vec<usize> = swaps.iter().map(|&(v, _)| choice[v]).collect();
        for &(v, s) in swaps {
            choice[v] = s;
        }
        match judge(g, choice, base) {
            Verdict::Done => Ok(Some(RewireOutcome::Finished)),
            Verdict::Grow => Ok(Some(RewireOutcome::Improved)),
            Verdict::Reject => {
                for (&(v, _), old) in swaps.iter().zip(saved) {
                    choice[v] = old;
                }
                Ok(None)
            }
        }
    };

    // Move 1: reroute some edge into the deepest vertex p.
    if a_slot != choice[a_v] {
        if let Some(out) = try_swap(choice, &[(a_v, a_slot)], &mut attempts)? {
            return Ok(out);
        }
    }
    // Move 2: reroute b, the tree vertex feeding the root. A candidate that
    // lands on a cycle is retried in combination with Move 1: rerouting b
    // alone can merely shuffle roles between trees, but the combined swap
    // deepens p's tree past every rival.
    for s in 0..k {
        if s == choice[b] || g.target(b, s) == r {
            continue;
        }
        if let Some(out) = try_swap(choice, &[(b, s)], &mut attempts)? {
            return Ok(out);
        }
        if dec.on_cycle[g.target(b, s)] && (a_v, a_slot) != (b, s) {
            if let Some(out) = try_swap(choice, &[(b, s), (a_v, a_slot)], &mut attempts)? {
                return Ok(out);
            }
        }
    }
    // Move 3: reroute c, the cycle edge into the root, unrolling part of the
    // root cycle underneath the tree.
    for s in 0..k {
        if s == choice[c] || g.target(c, s) == r {
            continue;
        }
        if let Some(out) = try_swap(choice, &[(c, s)], &mut attempts)? {
            return Ok(out);
        }
    }
    Err(Error::AlgorithmStuck(
        "no rewiring move grew the cycles or reached a single tree".into(),
    ))
}

/// [`find_stable_friendly_spanning`] plus search counters.
pub fn find_stable_friendly_spanning_with_stats(
    g: &Graph,
) -> Result<(SpanningSubgraph, SpanningStats)> {
    if !validate_agw(g).is_agw {
        return Err(Error::PreconditionViolated("graph must be AGW".into()));
    }
    if g.n() < 2 {
        return Err(Error::PreconditionViolated(
            "need at least two vertices".into(),
        ));
    }
    if let Some(v) = (0..g.n()).find(|&v| g.has_loop_at(v)) {
        return Err(Error::PreconditionViolated(format!(
            "vertex {v} has a loop; loops take the direct path instead"
        )));
    }
    if let Some((t, q, r)) = has_vertex_with_two_incoming_bunches(g) {
        return Err(Error::PreconditionViolated(format!(
            "vertex {t} receives bunches from {q} and {r}; any coloring works there"
        )));
    }

    let n = g.n();
    let k = g.k();
    let mut choice = vec![0usize; n];
    let mut stats = SpanningStats::default();
    loop {
        // Hill-climb: accept the first single-slot swap that grows the cycle
        // edge count, restart the scan, stop at a fixpoint.
        'climb: loop {
            let base = decompose_choice(g, &choice).cycle_edge_count;
            for v in 0..n {
                for s in 0..k {
                    if s == choice[v] || g.target(v, s) == g.target(v, choice[v]) {
                        continue;
                    }
                    let old = choice[v];
                    choice[v] = s;
                    if decompose_choice(g, &choice).cycle_edge_count > base {
                        stats.cycle_growth_steps += 1;
                        continue 'climb;
                    }
                    choice[v] = old;
                }
            }
            break;
        }
        let dec = decompose_choice(g, &choice);
        if dec.cycle_edge_count == n {
            let out = break_all_cycles(g, &SpanningSubgraph::new(choice))?;
            stats.cycle_edge_count = decompose(g, &out).cycle_edge_count;
            return Ok((out, stats));
        }
        if dec.max_level_in_single_tree() {
            stats.cycle_edge_count = dec.cycle_edge_count;
            return Ok((SpanningSubgraph::new(choice), stats));
        }
        match rewire_pass(g, &mut choice, &mut stats)? {
            RewireOutcome::Improved => continue,
            RewireOutcome::Finished => {
                let dec = decompose_choice(g, &choice);
                stats.cycle_edge_count = dec.cycle_edge_count;
                return Ok((SpanningSubgraph::new(choice), stats));
            }
        }
    }
}

/// Spanning subgraph whose deepest vertices all lie in one tree.
///
/// Requires an AGW graph with n >= 2, no loops and no vertex with two
/// incoming bunches (those cases are handled by their own constructions).
/// Starts from slot 0 everywhere, hill-climbs the cycle edge count through
/// single-slot swaps, and applies rewiring moves at fixpoints. An all-cycles
/// fixpoint is resolved by [`break_all_cycles`].
pub fn find_stable_friendly_spanning(g: &Graph) -> Result<SpanningSubgraph> {
    find_stable_friendly_spanning_with_stats(g).map(|(s, _)| s)
}

/// Colors every chosen slot 0 and the remaining slots 1..k in seeded random
/// order.
pub fn alpha_coloring(g: &Graph, s: &SpanningSubgraph, seed: u64) -> Coloring {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..g.n())
        .map(|v| {
            let mut rest: Vec<usize> = (1..g.k()).collect();
            rest.shuffle(&mut rng);
            let mut row = vec![0usize; g.k()];
            let mut next = rest.into_iter();
            for (slot, color) in row.iter_mut().enumerate() {
                if slot != s.choice[v] {
                    *color = next.next().expect("k - 1 spare colors");
                }
            }
            row
        })
        .collect();
    Coloring::new(g.k(), rows).expect("rows are permutations by construction")
}
