//! End-to-end construction: color one level with a guaranteed stable pair,
//! collapse the stability classes, recurse on the smaller graph, lift the
//! result back, and finally extract a synchronizing word.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{apply_word, validate_agw, Automaton, Coloring, Graph, Word};
use crate::spanning::{
    alpha_coloring, decompose, find_stable_friendly_spanning_with_stats,
    has_vertex_with_two_incoming_bunches, SpanningSubgraph,
};
use crate::stability::{
    is_synchronizing, pair_distances, quotient, stability_partition, StabilityPartition, INFINITE,
};
use crate::{Error, Result};

/// Which construction produced a level's coloring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisPhase {
    /// A loop plus a shortest-path in-forest, synchronizing outright.
    LoopFastPath,
    /// Two incoming bunches make some pair stable under any coloring.
    TwoBunch,
    /// Alpha coloring of a spanning subgraph with the single-tree property.
    Spanning,
}

impl SynthesisPhase {
    pub fn name(self) -> &'static str {
        match self {
            SynthesisPhase::LoopFastPath => "loop-fast-path",
            SynthesisPhase::TwoBunch => "two-bunch",
            SynthesisPhase::Spanning => "spanning",
        }
    }
}

/// One recursion level of the construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelRecord {
    /// Vertex count at this level.
    pub n: usize,
    /// Stability classes of the level's coloring; always < n.
    pub class_count: usize,
    /// Cycle edge count of the spanning subgraph, when one was built.
    pub cycle_edge_count: Option<usize>,
    pub phase: SynthesisPhase,
}

/// Diagnostic record of the recursion.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SynthesisTrace {
    pub depth: usize,
    pub levels: Vec<LevelRecord>,
}

/// A verified synchronizing coloring and a witness word.
#[derive(Debug, Clone)]
pub struct SyncReport {
    pub coloring: Coloring,
    pub word: Word,
    /// True on every successful return: the word was applied and checked.
    pub verified: bool,
    pub word_length: usize,
}

/// Spanning subgraph of a loop at the smallest loop vertex plus, for every
/// other vertex, the smallest out-slot on a shortest path toward it.
fn loop_fast_path(g: &Graph) -> SpanningSubgraph {
    let n = g.n();
    let p = (0..n)
        .find(|&v| g.has_loop_at(v))
        .expect("caller checked for a loop");
    let mut dist = vec![usize::MAX; n];
    let mut rev = vec![Vec::new(); n];
    for v in 0..n {
        for &t in g.out_slots(v) {
            rev[t].push(v);
        }
    }
    let mut queue = VecDeque::from([p]);
    dist[p] = 0;
    while let Some(v) = queue.pop_front() {
        for &u in &rev[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let choice = (0..n)
        .map(|v| {
            if v == p {
                (0..g.k())
                    .find(|&s| g.target(v, s) == p)
                    .expect("p has a loop")
            } else {
                (0..g.k())
                    .find(|&s| dist[g.target(v, s)] == dist[v] - 1)
                    .expect("strong connectivity reaches p")
            }
        })
        .collect();
    SpanningSubgraph::new(choice)
}

fn random_coloring(g: &Graph, seed: u64) -> Coloring {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..g.n())
        .map(|_| {
            let mut row: Vec<usize> = (0..g.k()).collect();
            row.shuffle(&mut rng);
            row
        })
        .collect();
    Coloring::new(g.k(), rows).expect("shuffled rows are permutations")
}

fn colorize_level(
    g: &Graph,
    seed: u64,
) -> Result<(Coloring, StabilityPartition, SynthesisPhase, Option<usize>)> {
    if g.n() < 2 {
        return Err(Error::InvalidParams("need at least two vertices".into()));
    }
    let report = validate_agw(g);
    if !report.is_agw {
        return Err(Error::NotAgw(report.failure().into()));
    }
    let (coloring, phase, cycle_edges) = if (0..g.n()).any(|v| g.has_loop_at(v)) {
        let s = loop_fast_path(g);
        let cycle_edges = decompose(g, &s).cycle_edge_count;
        (
            alpha_coloring(g, &s, seed),
            SynthesisPhase::LoopFastPath,
            Some(cycle_edges),
        )
    } else if has_vertex_with_two_incoming_bunches(g).is_some() {
        (random_coloring(g, seed), SynthesisPhase::TwoBunch, None)
    } else {
        let (s, stats) = find_stable_friendly_spanning_with_stats(g)?;
        (
            alpha_coloring(g, &s, seed),
            SynthesisPhase::Spanning,
            Some(stats.cycle_edge_count),
        )
    };
    let automaton = Automaton::new(g.clone(), coloring.clone())?;
    let partition = stability_partition(&automaton)?;
    if partition.class_count >= g.n() {
        return Err(Error::NoStablePair);
    }
    Ok((coloring, partition, phase, cycle_edges))
}

/// Coloring of an AGW graph with at least one nontrivial stability class.
///
/// Dispatch: a loop admits a directly synchronizing coloring; a vertex with
/// two incoming bunches makes its two sources stable under any coloring; the
/// general case alpha-colors a single-tree spanning subgraph.
pub fn colorize_with_stable_pair(g: &Graph, seed: u64) -> Result<(Coloring, StabilityPartition)> {
    let (coloring, partition, _, _) = colorize_level(g, seed)?;
    Ok((coloring, partition))
}

/// Transports a coloring of the quotient graph back to the full graph.
///
/// The quotient's own slots carry the identity coloring, so `q_coloring`
/// acts as a color permutation per class; each vertex composes its base
/// colors with the permutation of its class.
pub fn lift_coloring(
    g: &Graph,
    base: &Coloring,
    part: &StabilityPartition,
    q_coloring: &Coloring,
) -> Result<Coloring> {
    let n = g.n();
    let k = g.k();
    if base.n() != n || base.k() != k {
        return Err(Error::ShapeMismatch(format!(
            "base coloring is {}x{}, graph is {n}x{k}",
            base.n(),
            base.k()
        )));
    }
    if part.class_of.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "partition covers {} vertices, graph has {n}",
            part.class_of.len()
        )));
    }
    if q_coloring.n() != part.class_count || q_coloring.k() != k {
        return Err(Error::ShapeMismatch(format!(
            "quotient coloring is {}x{}, expected {}x{k}",
            q_coloring.n(),
            q_coloring.k(),
            part.class_count
        )));
    }
    let rows = (0..n)
        .map(|v| {
            (0..k)
                .map(|s| q_coloring.color_of(part.class_of[v], base.color_of(v, s)))
                .collect()
        })
        .collect();
    Coloring::new(k, rows)
}

fn next_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15)
}

fn color_recursive(g: &Graph, seed: u64, levels: &mut Vec<LevelRecord>) -> Result<Coloring> {
    if g.n() == 1 {
        return Ok(Coloring::identity(1, g.k()));
    }
    let (coloring, partition, phase, cycle_edge_count) = colorize_level(g, seed)?;
    levels.push(LevelRecord {
        n: g.n(),
        class_count: partition.class_count,
        cycle_edge_count,
        phase,
    });
    let automaton = Automaton::new(g.clone(), coloring.clone())?;
    let (q_graph, _) = quotient(&automaton, &partition)?;
    if !validate_agw(&q_graph).is_agw {
        return Err(Error::InvariantViolated(
            "quotient of an AGW graph lost the AGW property".into(),
        ));
    }
    let q_coloring = color_recursive(&q_graph, next_seed(seed), levels)?;
    let lifted = lift_coloring(g, &coloring, &partition, &q_coloring)?;
    if !is_synchronizing(&Automaton::new(g.clone(), lifted.clone())?)? {
        return Err(Error::InvariantViolated(
            "lifted coloring is not synchronizing".into(),
        ));
    }
    Ok(lifted)
}

/// Builds and verifies a synchronizing coloring of an AGW graph.
///
/// Recurses through stability quotients, which strictly shrink, so the
/// recursion depth is at most n - 1. The result is re-verified from scratch:
/// pair closure, an explicit word, and the word-length bound. Verification
/// failures surface as [`Error::InvariantViolated`], never as silent
/// retries.
pub fn synchronizing_coloring(g: &Graph, seed: u64) -> Result<(SyncReport, SynthesisTrace)> {
    let report = validate_agw(g);
    if !report.is_agw {
        return Err(Error::NotAgw(report.failure().into()));
    }
    let mut levels = Vec::new();
    let coloring = color_recursive(g, seed, &mut levels)?;
    let automaton = Automaton::new(g.clone(), coloring.clone())?;
    if !is_synchronizing(&automaton)? {
        return Err(Error::InvariantViolated(
            "final coloring is not synchronizing".into(),
        ));
    }
    let word = synchronizing_word(&automaton)?;
    let all: BTreeSet<_> = (0..g.n()).collect();
    if apply_word(&automaton, &all, &word).len() != 1 {
        return Err(Error::InvariantViolated(
            "word does not merge all vertices".into(),
        ));
    }
    let n = g.n();
    let bound = (n - 1) * n * (n - 1) / 2;
    if word.len() > bound {
        return Err(Error::InvariantViolated(format!(
            "word length {} exceeds the bound {bound}",
            word.len()
        )));
    }
    let trace = SynthesisTrace {
        depth: levels.len(),
        levels,
    };
    let word_length = word.len();
    Ok((
        SyncReport {
            coloring,
            word,
            verified: true,
            word_length,
        },
        trace,
    ))
}

/// Greedy synchronizing word: repeatedly merge a closest pair of the current
/// image.
///
/// Each round picks the minimum pair distance within the image, then walks
/// that distance down letter by letter, always taking the smallest letter
/// that keeps some minimal pair descending. The appended segment is the
/// lexicographically smallest shortest word merging any image pair, so the
/// whole word is deterministic. Length is at most (n-1) merges of at most
/// n(n-1)/2 letters each.
pub fn synchronizing_word(a: &Automaton) -> Result<Word> {
    if !is_synchronizing(a)? {
        return Err(Error::NotSynchronizing);
    }
    let n = a.n();
    if n == 1 {
        return Ok(Word(Vec::new()));
    }
    let pd = pair_distances(a);
    let mut image: BTreeSet<usize> = (0..n).collect();
    let mut word = Vec::new();
    while image.len() > 1 {
        let verts: Vec<usize> = image.iter().copied().collect();
        // Letter 0 merging some pair is the best possible round; commit it
        // without scanning the rest.
        let mut front: Vec<(usize, usize)> = Vec::new();
        let mut d_min = INFINITE;
        'scan: for (i, &p) in verts.iter().enumerate() {
            for &q in &verts[i + 1..] {
                let d = pd.get(p, q);
                debug_assert_ne!(d, INFINITE);
                if d == 1 && a.step(p, 0) == a.step(q, 0) {
                    front = vec![(p, q)];
                    d_min = 1;
                    break 'scan;
                }
                match d.cmp(&d_min) {
                    std::cmp::Ordering::Less => {
                        d_min = d;
                        front = vec![(p, q)];
                    }
                    std::cmp::Ordering::Equal => front.push((p, q)),
                    std::cmp::Ordering::Greater => {}
                }
            }
        }
        let mut segment = Vec::new();
        let mut d = d_min;
        while d > 0 {
            let mut chosen = None;
            for c in 0..a.k() {
                let survivors: Vec<(usize, usize)> = front
                    .iter()
                    .filter_map(|&(p, q)| {
                        let (ip, iq) = (a.step(p, c), a.step(q, c));
                        if d == 1 {
                            (ip == iq).then_some((ip, iq))
                        } else {
                            let next = (ip.min(iq), ip.max(iq));
                            (ip != iq && pd.get(ip, iq) == d - 1).then_some(next)
                        }
                    })
                    .collect();
                if !survivors.is_empty() {
                    chosen = Some((c, survivors));
                    break;
                }
            }
            let (c, mut survivors) = chosen.expect("pair distances certify a descending letter");
            survivors.sort_unstable();
            survivors.dedup();
            front = survivors;
            segment.push(c);
            d -= 1;
        }
        for &c in &segment {
            image = image.iter().map(|&v| a.step(v, c)).collect();
        }
        word.extend(segment);
    }
    Ok(Word(word))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::stable_pairs;

    fn cerny_four() -> Graph {
        Graph::new(4, 2, vec![vec![1, 0], vec![2, 1], vec![3, 2], vec![0, 0]]).unwrap()
    }

    fn loop_pair() -> Graph {
        Graph::new(2, 2, vec![vec![0, 1], vec![0, 0]]).unwrap()
    }

    /// AGW, loop-free, with two bunches into vertex 0.
    fn two_bunch_square() -> Graph {
        Graph::new(4, 2, vec![vec![1, 3], vec![0, 0], vec![0, 0], vec![2, 2]]).unwrap()
    }

    #[test]
    fn fast_path_spanning_for_cerny() {
        let g = cerny_four();
        let s = loop_fast_path(&g);
        assert_eq!(s.choice, vec![1, 0, 0, 0]);
        let c = alpha_coloring(&g, &s, 0);
        assert_eq!(c.rows(), &[vec![1, 0], vec![0, 1], vec![0, 1], vec![0, 1]]);
        let a = Automaton::new(g, c).unwrap();
        let all: BTreeSet<_> = (0..4).collect();
        assert_eq!(apply_word(&a, &all, &Word(vec![0, 0, 0])).len(), 1);
    }

    #[test]
    fn colorize_loop_pair() {
        let g = loop_pair();
        let (c, p) = colorize_with_stable_pair(&g, 0).unwrap();
        assert_eq!(c.rows(), &[vec![0, 1], vec![0, 1]]);
        assert_eq!(p.class_count, 1);
    }

    #[test]
    fn colorize_two_bunch_graph() {
        let g = two_bunch_square();
        assert_eq!(has_vertex_with_two_incoming_bunches(&g), Some((0, 1, 2)));
        for seed in 0..6 {
            let (c, p) = colorize_with_stable_pair(&g, seed).unwrap();
            assert!(p.class_count < 4);
            let a = Automaton::new(g.clone(), c).unwrap();
            assert!(
                stable_pairs(&a).is_stable(1, 2),
                "sources of the bunches merge forever"
            );
        }
    }

    #[test]
    fn colorize_rejects_non_agw() {
        let g = Graph::new(2, 1, vec![vec![1], vec![0]]).unwrap();
        assert!(matches!(
            colorize_with_stable_pair(&g, 0),
            Err(Error::NotAgw(_))
        ));
        let single = Graph::new(1, 2, vec![vec![0, 0]]).unwrap();
        assert!(matches!(
            colorize_with_stable_pair(&single, 0),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn lift_identity_is_base() {
        let g = cerny_four();
        let (c, p) = colorize_with_stable_pair(&g, 0).unwrap();
        let q_identity = Coloring::identity(p.class_count, 2);
        let lifted = lift_coloring(&g, &c, &p, &q_identity).unwrap();
        assert_eq!(lifted, c);
    }

    #[test]
    fn lift_swaps_colors_per_class() {
        let g = loop_pair();
        let base = Coloring::new(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        let a = Automaton::new(g.clone(), base.clone()).unwrap();
        let part = stability_partition(&a).unwrap();
        assert_eq!(part.class_count, 1);
        let swapped = Coloring::new(2, vec![vec![1, 0]]).unwrap();
        let lifted = lift_coloring(&g, &base, &part, &swapped).unwrap();
        assert_eq!(lifted.rows(), &[vec![1, 0], vec![1, 0]]);
    }

    #[test]
    fn lift_transports_when_partition_is_discrete() {
        let g = Graph::new(2, 2, vec![vec![1, 1], vec![0, 0]]).unwrap();
        let base = Coloring::identity(2, 2);
        let a = Automaton::new(g.clone(), base.clone()).unwrap();
        let part = stability_partition(&a).unwrap();
        assert!(part.is_discrete());
        let q = Coloring::new(2, vec![vec![1, 0], vec![0, 1]]).unwrap();
        let lifted = lift_coloring(&g, &base, &part, &q).unwrap();
        assert_eq!(lifted.rows(), q.rows());
    }

    #[test]
    fn lift_checks_shapes() {
        let g = cerny_four();
        let (c, p) = colorize_with_stable_pair(&g, 0).unwrap();
        let wrong = Coloring::identity(p.class_count + 1, 2);
        assert!(matches!(
            lift_coloring(&g, &c, &p, &wrong),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn single_vertex_synthesis() {
        let g = Graph::new(1, 2, vec![vec![0, 0]]).unwrap();
        let (report, trace) = synchronizing_coloring(&g, 0).unwrap();
        assert_eq!(report.coloring.rows(), &[vec![0, 1]]);
        assert!(report.word.is_empty());
        assert!(report.verified);
        assert_eq!(trace.depth, 0);
    }

    #[test]
    fn cerny_synthesis_end_to_end() {
        let g = cerny_four();
        let (report, trace) = synchronizing_coloring(&g, 0).unwrap();
        assert!(report.verified);
        assert!(report.word_length <= 18);
        assert_eq!(trace.depth, 1);
        assert_eq!(trace.levels[0].phase, SynthesisPhase::LoopFastPath);
        assert_eq!(trace.levels[0].class_count, 1);
        let a = Automaton::new(g, report.coloring).unwrap();
        assert!(is_synchronizing(&a).unwrap());
    }

    #[test]
    fn two_bunch_synthesis_end_to_end() {
        let g = two_bunch_square();
        let (report, trace) = synchronizing_coloring(&g, 1).unwrap();
        assert!(report.verified);
        assert!(trace.depth <= 3);
        assert_eq!(trace.levels[0].phase, SynthesisPhase::TwoBunch);
    }

    #[test]
    fn spanning_synthesis_end_to_end() {
        // Loop-free, bunch-free: the general construction must run.
        let g = Graph::new(3, 2, vec![vec![1, 2], vec![2, 0], vec![0, 1]]).unwrap();
        let (report, trace) = synchronizing_coloring(&g, 0).unwrap();
        assert!(report.verified);
        assert_eq!(trace.levels[0].phase, SynthesisPhase::Spanning);
        assert!(trace.levels[0].cycle_edge_count.is_some());
    }

    #[test]
    fn synthesis_rejects_non_agw() {
        let g = Graph::new(2, 1, vec![vec![1], vec![0]]).unwrap();
        assert!(matches!(
            synchronizing_coloring(&g, 0),
            Err(Error::NotAgw(_))
        ));
    }

    #[test]
    fn synthesis_is_deterministic() {
        let g = cerny_four();
        let (r1, t1) = synchronizing_coloring(&g, 42).unwrap();
        let (r2, t2) = synchronizing_coloring(&g, 42).unwrap();
        assert_eq!(r1.coloring, r2.coloring);
        assert_eq!(r1.word, r2.word);
        assert_eq!(t1, t2);
    }

    #[test]
    fn greedy_word_on_direct_merge() {
        let g = loop_pair();
        let c = Coloring::new(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        let a = Automaton::new(g, c).unwrap();
        assert_eq!(synchronizing_word(&a).unwrap(), Word(vec![0]));
    }

    #[test]
    fn greedy_word_on_cerny() {
        let g = cerny_four();
        let a = Automaton::new(g, Coloring::identity(4, 2)).unwrap();
        let w = synchronizing_word(&a).unwrap();
        assert!(w.len() <= 18);
        let all: BTreeSet<_> = (0..4).collect();
        assert_eq!(apply_word(&a, &all, &w).len(), 1);
    }

    #[test]
    fn greedy_word_rejects_unsynchronizable() {
        let g = Graph::new(2, 2, vec![vec![1, 1], vec![0, 0]]).unwrap();
        let a = Automaton::new(g, Coloring::identity(2, 2)).unwrap();
        assert!(matches!(
            synchronizing_word(&a),
            Err(Error::NotSynchronizing)
        ));
    }
}
