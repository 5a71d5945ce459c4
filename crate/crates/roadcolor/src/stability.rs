//! Pair analysis: which vertex pairs can be merged by some word, which can
//! never be separated, and the congruence the latter induce.

use crate::graph::{Automaton, Coloring, Graph, VertexId};
use crate::{Error, Result};

pub(crate) const INFINITE: u32 = u32::MAX;

/// Length of a shortest merging word per unordered vertex pair, `INFINITE`
/// when none exists. Backing store for both pair tables.
pub(crate) struct PairDistances {
    n: usize,
    dist: Vec<u32>,
}

#[inline]
pub(crate) fn pair_index(n: usize, p: VertexId, q: VertexId) -> usize {
    debug_assert!(p < q && q < n);
    p * n - p * (p + 1) / 2 + (q - p - 1)
}

impl PairDistances {
    /// Distance 0 on the diagonal, shortest merge length off it.
    pub(crate) fn get(&self, p: VertexId, q: VertexId) -> u32 {
        match p.cmp(&q) {
            std::cmp::Ordering::Less => self.dist[pair_index(self.n, p, q)],
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => self.dist[pair_index(self.n, q, p)],
        }
    }
}

/// Sources per `(color, target)`: `rev[c][t]` lists every `v` with an edge of
/// color `c` into `t`.
fn reverse_delta(a: &Automaton) -> Vec<Vec<Vec<VertexId>>> {
    let mut rev = vec![vec![Vec::new(); a.n()]; a.k()];
    for v in 0..a.n() {
        for c in 0..a.k() {
            rev[c][a.step(v, c)].push(v);
        }
    }
    rev
}

/// Backward BFS over unordered pairs, seeded at pairs that merge in one
/// letter.
pub(crate) fn pair_distances(a: &Automaton) -> PairDistances {
    let n = a.n();
    let rev = reverse_delta(a);
    let mut dist = vec![INFINITE; n * (n - 1) / 2];
    let mut queue = std::collections::VecDeque::new();
    for by_target in &rev {
        for sources in by_target {
            for (i, &p) in sources.iter().enumerate() {
                for &q in &sources[i + 1..] {
                    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
                    let idx = pair_index(n, lo, hi);
                    if dist[idx] == INFINITE {
                        dist[idx] = 1;
                        queue.push_back((lo, hi));
                    }
                }
            }
        }
    }
    while let Some((p, q)) = queue.pop_front() {
        let d = dist[pair_index(n, p, q)];
        for rev_c in &rev {
            for &sp in &rev_c[p] {
                for &sq in &rev_c[q] {
                    if sp == sq {
                        continue;
                    }
                    let (lo, hi) = if sp < sq { (sp, sq) } else { (sq, sp) };
                    let idx = pair_index(n, lo, hi);
                    if dist[idx] == INFINITE {
                        dist[idx] = d + 1;
                        queue.push_back((lo, hi));
                    }
                }
            }
        }
    }
    PairDistances { n, dist }
}

/// Per-pair verdicts for an automaton.
///
/// A pair is synchronizable when some word maps both vertices to one vertex,
/// and stable when additionally every word keeps it synchronizable. Diagonal
/// pairs are both, trivially.
#[derive(Debug, Clone)]
pub struct PairTable {
    n: usize,
    synchronizable: Vec<bool>,
    stable: Vec<bool>,
}

impl PairTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_synchronizable(&self, p: VertexId, q: VertexId) -> bool {
        if p == q {
            return true;
        }
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        self.synchronizable[pair_index(self.n, lo, hi)]
    }

    pub fn is_stable(&self, p: VertexId, q: VertexId) -> bool {
        if p == q {
            return true;
        }
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        self.stable[pair_index(self.n, lo, hi)]
    }

    /// Whether some off-diagonal pair is stable.
    pub fn has_nontrivial_stable_pair(&self) -> bool {
        self.stable.iter().any(|&s| s)
    }

    pub fn all_synchronizable(&self) -> bool {
        self.synchronizable.iter().all(|&s| s)
    }
}

/// Pair table with only the synchronizable side filled in.
pub fn synchronizable_pairs(a: &Automaton) -> PairTable {
    let pd = pair_distances(a);
    let synchronizable: Vec<bool> = pd.dist.iter().map(|&d| d != INFINITE).collect();
    let stable = vec![false; synchronizable.len()];
    PairTable {
        n: pd.n,
        synchronizable,
        stable,
    }
}

/// Full pair table: synchronizable and stable verdicts.
///
/// A synchronizable pair fails to be stable exactly when some word drives it
/// into a deadlocked (non-synchronizable) pair, so stability is the
/// complement of the backward closure of the deadlocked pairs.
pub fn stable_pairs(a: &Automaton) -> PairTable {
    let n = a.n();
    let pd = pair_distances(a);
    let synchronizable: Vec<bool> = pd.dist.iter().map(|&d| d != INFINITE).collect();
    let rev = reverse_delta(a);
    let mut can_deadlock = vec![false; synchronizable.len()];
    let mut queue = std::collections::VecDeque::new();
    for p in 0..n {
        for q in p + 1..n {
            let idx = pair_index(n, p, q);
            if !synchronizable[idx] {
                can_deadlock[idx] = true;
                queue.push_back((p, q));
            }
        }
    }
    while let Some((p, q)) = queue.pop_front() {
        for rev_c in &rev {
            for &sp in &rev_c[p] {
                for &sq in &rev_c[q] {
                    if sp == sq {
                        continue;
                    }
                    let (lo, hi) = if sp < sq { (sp, sq) } else { (sq, sp) };
                    let idx = pair_index(n, lo, hi);
                    if !can_deadlock[idx] {
                        can_deadlock[idx] = true;
                        queue.push_back((lo, hi));
                    }
                }
            }
        }
    }
    let stable = can_deadlock.iter().map(|&d| !d).collect();
    PairTable {
        n,
        synchronizable,
        stable,
    }
}

/// Partition of the vertices into stability classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityPartition {
    /// Class id per vertex. Ids are dense and ordered by each class's
    /// smallest member.
    pub class_of: Vec<usize>,
    pub class_count: usize,
}

impl StabilityPartition {
    /// Whether the partition is just singletons.
    pub fn is_discrete(&self) -> bool {
        self.class_count == self.class_of.len()
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Groups vertices by stability and checks that the grouping really is an
/// equivalence compatible with every letter.
///
/// Stability is symmetric and reflexive by definition; transitivity and
/// letter-compatibility are consequences that this function asserts rather
/// than assumes, returning [`Error::InvariantViolated`] if the input
/// automaton somehow breaks them.
pub fn stability_partition(a: &Automaton) -> Result<StabilityPartition> {
    let n = a.n();
    let table = stable_pairs(a);
    let mut uf = UnionFind::new(n);
    for p in 0..n {
        for q in p + 1..n {
            if table.is_stable(p, q) {
                uf.union(p, q);
            }
        }
    }
    let mut class_of = vec![usize::MAX; n];
    let mut class_count = 0;
    for v in 0..n {
        let root = uf.find(v);
        if class_of[root] == usize::MAX {
            class_of[root] = class_count;
            class_count += 1;
        }
        class_of[v] = class_of[root];
    }
    for p in 0..n {
        for q in p + 1..n {
            if (class_of[p] == class_of[q]) != table.is_stable(p, q) {
                return Err(Error::InvariantViolated(format!(
                    "stability is not transitive at pair ({p}, {q})"
                )));
            }
        }
    }
    for p in 0..n {
        for q in p + 1..n {
            if class_of[p] != class_of[q] {
                continue;
            }
            for c in 0..a.k() {
                let (ip, iq) = (a.step(p, c), a.step(q, c));
                if class_of[ip] != class_of[iq] {
                    return Err(Error::InvariantViolated(format!(
                        "letter {c} maps stable pair ({p}, {q}) across classes"
                    )));
                }
            }
        }
    }
    Ok(StabilityPartition {
        class_of,
        class_count,
    })
}

/// Collapses each stability class to one vertex.
///
/// The returned coloring on the quotient graph is the identity: class edges
/// inherit the letters of the original automaton, so slot `c` of a class
/// already carries color `c`.
pub fn quotient(a: &Automaton, partition: &StabilityPartition) -> Result<(Graph, Coloring)> {
    let n = a.n();
    let m = partition.class_count;
    let k = a.k();
    let mut rep = vec![usize::MAX; m];
    for v in (0..n).rev() {
        rep[partition.class_of[v]] = v;
    }
    let q_adj: Vec<Vec<usize>> = rep
        .iter()
        .map(|&r| (0..k).map(|c| partition.class_of[a.step(r, c)]).collect())
        .collect();
    for v in 0..n {
        let cl = partition.class_of[v];
        for (c, &expected) in q_adj[cl].iter().enumerate() {
            if partition.class_of[a.step(v, c)] != expected {
                return Err(Error::InvariantViolated(format!(
                    "class {cl} members disagree on letter {c}"
                )));
            }
        }
    }
    Ok((Graph::new(m, k, q_adj)?, Coloring::identity(m, k)))
}

/// Whether some word maps all vertices to a single vertex.
///
/// Decided through pair closure: on a strongly connected automaton, all pairs
/// synchronizable is equivalent to a global merging word. Inputs that are not
/// strongly connected are rejected rather than judged.
pub fn is_synchronizing(a: &Automaton) -> Result<bool> {
    if !crate::graph::is_strongly_connected(a.graph()) {
        return Err(Error::NotStronglyConnected);
    }
    Ok(synchronizable_pairs(a).all_synchronizable())
}
