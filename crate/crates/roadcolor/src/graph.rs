//! Multigraph data model, AGW validation, word application and random
//! instance generation.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Result};

/// Dense vertex index in `[0, n)`.
pub type VertexId = usize;

/// Directed multigraph with a constant number of ordered out-edge slots per
/// vertex.
///
/// Parallel edges and loops are allowed. Slot order is part of the graph's
/// identity: serialization round-trips it and every operation that picks an
/// edge names its slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    k: usize,
    adj: Vec<Vec<VertexId>>,
}

impl Graph {
    /// Builds a graph from per-vertex slot target lists. Every row must have
    /// length `k` and every target must lie in `[0, n)`.
    pub fn new(n: usize, k: usize, adj: Vec<Vec<VertexId>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams(
                "vertex count must be at least 1".into(),
            ));
        }
        if k == 0 {
            return Err(Error::InvalidParams("out-degree must be at least 1".into()));
        }
        if adj.len() != n {
            return Err(Error::InvalidParams(format!(
                "adjacency has {} rows, expected {n}",
                adj.len()
            )));
        }
        for (v, row) in adj.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidParams(format!(
                    "vertex {v} has {} out-slots, expected {k}",
                    row.len()
                )));
            }
            if let Some(&t) = row.iter().find(|&&t| t >= n) {
                return Err(Error::InvalidParams(format!(
                    "vertex {v} targets {t}, outside [0, {n})"
                )));
            }
        }
        Ok(Self { n, k, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Target of the out-edge in `slot` at `v`.
    pub fn target(&self, v: VertexId, slot: usize) -> VertexId {
        self.adj[v][slot]
    }

    /// All slot targets of `v`, in slot order.
    pub fn out_slots(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    /// Whether any slot of `v` targets `v` itself.
    pub fn has_loop_at(&self, v: VertexId) -> bool {
        self.adj[v].contains(&v)
    }

    pub fn adj(&self) -> &[Vec<VertexId>] {
        &self.adj
    }
}

/// Per-vertex bijection from out-edge slots to colors `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<Vec<usize>>,
}

impl Coloring {
    /// Validates that every row is a permutation of `0..k`.
    pub fn new(k: usize, colors: Vec<Vec<usize>>) -> Result<Self> {
        for (v, row) in colors.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidParams(format!(
                    "vertex {v} has {} colors, expected {k}",
                    row.len()
                )));
            }
            let mut seen = vec![false; k];
            for &c in row {
                if c >= k || seen[c] {
                    return Err(Error::InvalidParams(format!(
                        "vertex {v}: colors are not a permutation of 0..{k}"
                    )));
                }
                seen[c] = true;
            }
        }
        Ok(Self { colors })
    }

    /// Slot `s` of every vertex gets color `s`.
    pub fn identity(n: usize, k: usize) -> Self {
        Self {
            colors: vec![(0..k).collect(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn k(&self) -> usize {
        self.colors.first().map_or(0, Vec::len)
    }

    /// Color assigned to slot `s` at `v`.
    pub fn color_of(&self, v: VertexId, s: usize) -> usize {
        self.colors[v][s]
    }

    /// Slot carrying `color` at `v`.
    pub fn slot_of(&self, v: VertexId, color: usize) -> usize {
        self.colors[v]
            .iter()
            .position(|&c| c == color)
            .expect("rows are permutations")
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.colors
    }
}

/// A graph plus a coloring: the deterministic automaton whose letter `c`
/// moves each vertex along its color-`c` out-edge.
#[derive(Debug, Clone)]
pub struct Automaton {
    graph: Graph,
    coloring: Coloring,
    delta: Vec<Vec<VertexId>>,
}

impl Automaton {
    pub fn new(graph: Graph, coloring: Coloring) -> Result<Self> {
        if coloring.n() != graph.n() || coloring.k() != graph.k() {
            return Err(Error::ShapeMismatch(format!(
                "coloring is {}x{}, graph is {}x{}",
                coloring.n(),
                coloring.k(),
                graph.n(),
                graph.k()
            )));
        }
        let delta = (0..graph.n())
            .map(|v| {
                let mut row = vec![0; graph.k()];
                for s in 0..graph.k() {
                    row[coloring.color_of(v, s)] = graph.target(v, s);
                }
                row
            })
            .collect();
        Ok(Self {
            graph,
            coloring,
            delta,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn k(&self) -> usize {
        self.graph.k()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    /// State reached from `v` by letter `c`.
    pub fn step(&self, v: VertexId, c: usize) -> VertexId {
        self.delta[v][c]
    }
}

/// A sequence of color letters. Empty words are allowed; they act as the
/// identity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Word {
    /// Colors 0..26 render as `a`..`z`, larger ones as `<i>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.0 {
            if c < 26 {
                write!(f, "{}", (b'a' + c as u8) as char)?;
            } else {
                write!(f, "<{c}>")?;
            }
        }
        Ok(())
    }
}

/// Structural verdict on the three AGW conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgwReport {
    pub strongly_connected: bool,
    pub constant_outdegree: bool,
    /// 0 when the graph is not strongly connected, the graph period otherwise.
    pub cycle_gcd: u64,
    pub is_agw: bool,
}

impl AgwReport {
    /// Names the first failing condition, for error messages.
    pub fn failure(&self) -> &'static str {
        if !self.strongly_connected {
            "not strongly connected"
        } else if self.cycle_gcd != 1 {
            "cycle lengths share a common divisor"
        } else {
            "no failure"
        }
    }
}

fn bfs_reach_count(n: usize, adj: &[Vec<VertexId>]) -> usize {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &t in &adj[v] {
            if !seen[t] {
                seen[t] = true;
                count += 1;
                queue.push_back(t);
            }
        }
    }
    count
}

/// Whether every vertex is reachable from every other.
pub fn is_strongly_connected(g: &Graph) -> bool {
    let n = g.n();
    if bfs_reach_count(n, g.adj()) != n {
        return false;
    }
    let mut rev = vec![Vec::new(); n];
    for v in 0..n {
        for &t in g.out_slots(v) {
            rev[t].push(v);
        }
    }
    bfs_reach_count(n, &rev) == n
}

/// Greatest common divisor of all directed cycle lengths, also known as the
/// graph period.
///
/// Computed as the gcd of `|d(u) + 1 - d(v)|` over all edges `u -> v`, where
/// `d` is a BFS potential from vertex 0: every cycle length is an integer
/// combination of these differences and conversely.
pub fn cycle_gcd(g: &Graph) -> Result<u64> {
    if !is_strongly_connected(g) {
        return Err(Error::NotStronglyConnected);
    }
    let n = g.n();
    let mut d = vec![0i64; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &t in g.out_slots(v) {
            if !seen[t] {
                seen[t] = true;
                d[t] = d[v] + 1;
                queue.push_back(t);
            }
        }
    }
    let mut acc: u64 = 0;
    for v in 0..n {
        for &t in g.out_slots(v) {
            acc = num_integer::gcd(acc, (d[v] + 1 - d[t]).unsigned_abs());
        }
    }
    Ok(acc)
}

/// Checks strong connectivity and the cycle gcd. Constant out-degree holds by
/// construction of [`Graph`]; ragged inputs are rejected at parse time.
pub fn validate_agw(g: &Graph) -> AgwReport {
    let strongly_connected = is_strongly_connected(g);
    let period = if strongly_connected {
        cycle_gcd(g).expect("connectivity just checked")
    } else {
        0
    };
    AgwReport {
        strongly_connected,
        constant_outdegree: true,
        cycle_gcd: period,
        is_agw: strongly_connected && period == 1,
    }
}

/// Image of `start` under the letters of `w`, applied left to right.
pub fn apply_word(a: &Automaton, start: &BTreeSet<VertexId>, w: &Word) -> BTreeSet<VertexId> {
    let mut cur = start.clone();
    for &c in w.letters() {
        cur = cur.iter().map(|&v| a.step(v, c)).collect();
    }
    cur
}

/// Random generation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    /// Sample uniform slot targets and retry until the result validates.
    Rejection,
    /// Random Hamiltonian cycle in slot 0 plus one guaranteed loop, remaining
    /// slots uniform. Valid by construction.
    Backbone,
}

/// Attempts [`GenMode::Rejection`] makes before giving up.
pub const REJECTION_ATTEMPT_CAP: usize = 10_000;

/// Deterministic random AGW graph for `(n, k, seed, mode)`.
///
/// Requires `k >= 2`, except that `n = 1` admits any `k` (all slots loop).
pub fn random_agw(n: usize, k: usize, seed: u64, mode: GenMode) -> Result<Graph> {
    if n == 0 || k == 0 || (k == 1 && n != 1) {
        return Err(Error::InvalidParams(
            "need n >= 1 and k >= 2, or n = 1 with any k".into(),
        ));
    }
    if n == 1 {
        return Graph::new(1, k, vec![vec![0; k]]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        GenMode::Rejection => {
            for _ in 0..REJECTION_ATTEMPT_CAP {
                let adj: Vec<Vec<VertexId>> = (0..n)
                    .map(|_| (0..k).map(|_| rng.random_range(0..n)).collect())
                    .collect();
                let g = Graph::new(n, k, adj)?;
                if validate_agw(&g).is_agw {
                    return Ok(g);
                }
            }
            Err(Error::GenerationFailed {
                attempts: REJECTION_ATTEMPT_CAP,
            })
        }
        GenMode::Backbone => {
            let mut order: Vec<VertexId> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut adj: Vec<Vec<VertexId>> = (0..n).map(|_| vec![0; k]).collect();
            for i in 0..n {
                adj[order[i]][0] = order[(i + 1) % n];
            }
            // The n-cycle makes the graph strongly connected, the loop brings
            // the cycle gcd down to 1.
            let loop_v = rng.random_range(0..n);
            adj[loop_v][1] = loop_v;
            for (v, row) in adj.iter_mut().enumerate() {
                for (s, slot) in row.iter_mut().enumerate().skip(1) {
                    if v == loop_v && s == 1 {
                        continue;
                    }
                    *slot = rng.random_range(0..n);
                }
            }
            Graph::new(n, k, adj)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cerny_four() -> Graph {
        Graph::new(4, 2, vec![vec![1, 0], vec![2, 1], vec![3, 2], vec![0, 0]]).unwrap()
    }

    fn gcd_by_cycle_enumeration(g: &Graph) -> u64 {
        // Every simple cycle, found by DFS restricted to vertices >= the
        // cycle's smallest member. The gcd of simple cycle lengths equals the
        // gcd of all closed walk lengths.
        fn dfs(
            g: &Graph,
            base: usize,
            v: usize,
            depth: u64,
            on_path: &mut Vec<bool>,
            acc: &mut u64,
        ) {
            for &t in g.out_slots(v) {
                if t == base {
                    *acc = num_integer::gcd(*acc, depth + 1);
                } else if t > base && !on_path[t] {
                    on_path[t] = true;
                    dfs(g, base, t, depth + 1, on_path, acc);
                    on_path[t] = false;
                }
            }
        }
        let mut acc = 0;
        for base in 0..g.n() {
            let mut on_path = vec![false; g.n()];
            dfs(g, base, base, 0, &mut on_path, &mut acc);
        }
        acc
    }

    fn arb_graph(max_n: usize, max_k: usize) -> impl Strategy<Value = Graph> {
        (1..=max_n, 1..=max_k).prop_flat_map(|(n, k)| {
            proptest::collection::vec(proptest::collection::vec(0..n, k), n)
                .prop_map(move |adj| Graph::new(n, k, adj).unwrap())
        })
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(Graph::new(0, 2, vec![]).is_err());
        assert!(Graph::new(2, 0, vec![vec![], vec![]]).is_err());
        assert!(Graph::new(2, 2, vec![vec![0, 1]]).is_err());
        assert!(Graph::new(2, 2, vec![vec![0, 1], vec![0]]).is_err());
        assert!(Graph::new(2, 2, vec![vec![0, 2], vec![0, 1]]).is_err());
    }

    #[test]
    fn cycle_with_loops_is_agw() {
        let r = validate_agw(&cerny_four());
        assert!(r.strongly_connected);
        assert_eq!(r.cycle_gcd, 1);
        assert!(r.is_agw);
    }

    #[test]
    fn two_cycle_has_period_two() {
        let g = Graph::new(2, 1, vec![vec![1], vec![0]]).unwrap();
        let r = validate_agw(&g);
        assert!(r.strongly_connected);
        assert_eq!(r.cycle_gcd, 2);
        assert!(!r.is_agw);
    }

    #[test]
    fn unreachable_vertex_fails_validation() {
        let g = Graph::new(2, 2, vec![vec![1, 1], vec![1, 1]]).unwrap();
        let r = validate_agw(&g);
        assert!(!r.strongly_connected);
        assert_eq!(r.cycle_gcd, 0);
        assert!(!r.is_agw);
        assert!(matches!(cycle_gcd(&g), Err(Error::NotStronglyConnected)));
    }

    #[test]
    fn triangle_has_period_three() {
        let g = Graph::new(3, 1, vec![vec![1], vec![2], vec![0]]).unwrap();
        assert_eq!(cycle_gcd(&g).unwrap(), 3);
    }

    #[test]
    fn coloring_rows_must_be_permutations() {
        assert!(Coloring::new(2, vec![vec![0, 0]]).is_err());
        assert!(Coloring::new(2, vec![vec![0, 2]]).is_err());
        assert!(Coloring::new(2, vec![vec![0]]).is_err());
        assert!(Coloring::new(2, vec![vec![1, 0], vec![0, 1]]).is_ok());
    }

    #[test]
    fn delta_respects_colors() {
        let g = cerny_four();
        let c = Coloring::new(2, vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]]).unwrap();
        let a = Automaton::new(g.clone(), c.clone()).unwrap();
        for v in 0..4 {
            for s in 0..2 {
                assert_eq!(a.step(v, c.color_of(v, s)), g.target(v, s));
            }
        }
    }

    #[test]
    fn automaton_rejects_shape_mismatch() {
        let g = cerny_four();
        let c = Coloring::identity(3, 2);
        assert!(matches!(Automaton::new(g, c), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn identity_letter_permutes_full_set() {
        let a = Automaton::new(cerny_four(), Coloring::identity(4, 2)).unwrap();
        let all: BTreeSet<_> = (0..4).collect();
        assert_eq!(apply_word(&a, &all, &Word(vec![0])), all);
        assert_eq!(apply_word(&a, &all, &Word(vec![])), all);
    }

    #[test]
    fn word_renders_as_letters() {
        assert_eq!(Word(vec![0, 1, 2]).to_string(), "abc");
        assert_eq!(Word(vec![]).to_string(), "");
        assert_eq!(Word(vec![26]).to_string(), "<26>");
    }

    #[test]
    fn single_vertex_generation_is_forced() {
        for seed in [0, 7] {
            for mode in [GenMode::Rejection, GenMode::Backbone] {
                let g = random_agw(1, 2, seed, mode).unwrap();
                assert_eq!(g.adj(), &[vec![0, 0]]);
            }
        }
    }

    #[test]
    fn generation_rejects_bad_params() {
        assert!(matches!(
            random_agw(3, 1, 0, GenMode::Backbone),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            random_agw(0, 2, 0, GenMode::Backbone),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn backbone_generation_always_validates() {
        for (n, k, seed) in [(2, 2, 0), (8, 2, 42), (5, 3, 7), (33, 4, 9)] {
            let g = random_agw(n, k, seed, GenMode::Backbone).unwrap();
            assert!(validate_agw(&g).is_agw, "n={n} k={k} seed={seed}");
        }
    }

    #[test]
    fn rejection_generation_is_deterministic() {
        let g1 = random_agw(5, 3, 7, GenMode::Rejection).unwrap();
        let g2 = random_agw(5, 3, 7, GenMode::Rejection).unwrap();
        assert_eq!(g1, g2);
        assert!(validate_agw(&g1).is_agw);
    }

    proptest! {
        #[test]
        fn gcd_matches_cycle_enumeration(g in arb_graph(6, 3)) {
            prop_assume!(is_strongly_connected(&g));
            prop_assert_eq!(cycle_gcd(&g).unwrap(), gcd_by_cycle_enumeration(&g));
        }

        #[test]
        fn word_action_composes(g in arb_graph(6, 3), letters in proptest::collection::vec(0usize..3, 0..12), split in 0usize..13) {
            let k = g.k();
            let letters: Vec<usize> = letters.into_iter().map(|c| c % k).collect();
            let split = split.min(letters.len());
            let a = Automaton::new(g.clone(), Coloring::identity(g.n(), k)).unwrap();
            let all: BTreeSet<_> = (0..g.n()).collect();
            let whole = apply_word(&a, &all, &Word(letters.clone()));
            let first = apply_word(&a, &all, &Word(letters[..split].to_vec()));
            let second = apply_word(&a, &first, &Word(letters[split..].to_vec()));
            prop_assert_eq!(whole, second);
        }

        #[test]
        fn generated_graphs_validate(n in 1usize..20, k in 2usize..4, seed in 0u64..50) {
            let g = random_agw(n, k, seed, GenMode::Backbone).unwrap();
            prop_assert!(validate_agw(&g).is_agw);
        }
    }
}
