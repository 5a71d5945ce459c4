//! Fixtures and corpus generators shared by the integration suites.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roadcolor::{
    has_vertex_with_two_incoming_bunches, random_agw, validate_agw, Coloring, GenMode, Graph,
};

pub fn single_vertex() -> Graph {
    Graph::new(1, 2, vec![vec![0, 0]]).unwrap()
}

/// Smallest graph with a loop and a merging edge.
pub fn loop_pair() -> Graph {
    Graph::new(2, 2, vec![vec![0, 1], vec![0, 0]]).unwrap()
}

/// Two mutual bunches; every cycle has even length.
pub fn mutual_bunches() -> Graph {
    Graph::new(2, 2, vec![vec![1, 1], vec![0, 0]]).unwrap()
}

/// The four-vertex graph whose identity coloring needs a 9-letter
/// synchronizing word.
pub fn cerny_four() -> Graph {
    Graph::new(4, 2, vec![vec![1, 0], vec![2, 1], vec![3, 2], vec![0, 0]]).unwrap()
}

pub fn chorded_triangle() -> Graph {
    Graph::new(3, 2, vec![vec![1, 1], vec![2, 0], vec![0, 0]]).unwrap()
}

/// In-degree equals out-degree at every vertex; loop-free and bunch-free.
pub fn eulerian_triangle() -> Graph {
    Graph::new(3, 2, vec![vec![1, 2], vec![2, 0], vec![0, 1]]).unwrap()
}

/// Two bunches (vertices 1 and 2) pointing at vertex 0, cycles of length 2
/// and 3.
pub fn two_bunch_square() -> Graph {
    Graph::new(4, 2, vec![vec![1, 3], vec![0, 0], vec![0, 0], vec![2, 2]]).unwrap()
}

/// Loop-free, double-bunch-free graph whose construction takes two collapse
/// levels: the first coloring merges only part of the vertex set, and the
/// quotient needs another round. Found by search over random instances.
pub fn two_level_witness() -> Graph {
    Graph::new(4, 2, vec![vec![3, 1], vec![2, 2], vec![1, 0], vec![1, 0]]).unwrap()
}

/// Like [`two_level_witness`], but both levels go through the spanning
/// construction.
pub fn two_level_spanning_witness() -> Graph {
    Graph::new(
        5,
        2,
        vec![vec![1, 3], vec![3, 0], vec![3, 0], vec![4, 4], vec![0, 2]],
    )
    .unwrap()
}

/// A uniformly random coloring, deterministic in `seed`.
pub fn random_coloring(g: &Graph, seed: u64) -> Coloring {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..g.n())
        .map(|_| {
            let mut row: Vec<usize> = (0..g.k()).collect();
            row.shuffle(&mut rng);
            row
        })
        .collect();
    Coloring::new(g.k(), rows).unwrap()
}

/// Random eligible graph with no loops and no vertex receiving two whole
/// bunches, or None if `seed` repeatedly fails to produce one.
///
/// Slots are shuffled so the generator's backbone cycle does not survive as
/// the slot-0 subgraph; consumers that start from slot 0 see a random
/// functional graph.
pub fn loop_free_two_bunch_free(n: usize, k: usize, seed: u64) -> Option<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for attempt in 0..40 {
        let g = random_agw(n, k, seed * 40 + attempt, GenMode::Backbone).unwrap();
        let mut adj = g.adj().to_vec();
        for (v, row) in adj.iter_mut().enumerate() {
            for t in row.iter_mut() {
                if *t == v {
                    *t = (v + 1) % n;
                }
            }
            row.shuffle(&mut rng);
        }
        let g = Graph::new(n, k, adj).unwrap();
        if validate_agw(&g).is_agw
            && has_vertex_with_two_incoming_bunches(&g).is_none()
            && (0..n).all(|v| !g.has_loop_at(v))
        {
            return Some(g);
        }
    }
    None
}
