//! Exact vertex weights, exhaustive oracles, and checks of the structural
//! facts about deadlock-image sets that the construction rests on.
//!
//! Everything here trades scale for certainty: subset searches are gated by
//! explicit limits and the eigenvector solve uses exact rationals.

use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::graph::{is_strongly_connected, Automaton, Coloring, Graph, VertexId, Word};
use crate::spanning::{decompose_choice, Decomposition};
use crate::stability::{stable_pairs, synchronizable_pairs};
use crate::{Error, Result};

/// Default vertex-count gate for subset searches.
pub const DEFAULT_SUBSET_LIMIT: usize = 16;
/// Default gate on the number of enumerated colorings.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1_000_000;

/// Positive integer vertex weights, coprime as a set, satisfying u·M = k·u
/// for the edge-count matrix M.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector {
    pub w: Vec<BigUint>,
    pub total: BigUint,
}

impl WeightVector {
    /// Sum of weights over the vertices of `mask`.
    fn mask_weight(&self, mask: u64) -> BigUint {
        let mut sum = BigUint::zero();
        for (v, w) in self.w.iter().enumerate() {
            if mask & (1 << v) != 0 {
                sum += w;
            }
        }
        sum
    }
}

/// Exact left Perron eigenvector of the edge-count matrix at eigenvalue k,
/// scaled to coprime positive integers.
///
/// Constant out-degree makes k the dominant eigenvalue with row sums k, and
/// strong connectivity makes its left eigenspace one-dimensional and
/// strictly positive, so the coprime positive representative is unique.
pub fn weight_vector(g: &Graph) -> Result<WeightVector> {
    if !is_strongly_connected(g) {
        return Err(Error::NotStronglyConnected);
    }
    let n = g.n();
    // Solve (Mᵀ − kI)x = 0 by full row reduction.
    let mut a = vec![vec![BigRational::zero(); n]; n];
    for (u, row) in g.adj().iter().enumerate() {
        for &t in row {
            a[t][u] += BigRational::one();
        }
    }
    let k = BigRational::from_integer(BigInt::from(g.k()));
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= k.clone();
    }
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(prow) = (rank..n).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, prow);
        let inv = a[rank][col].clone();
        for x in &mut a[rank] {
            *x /= inv.clone();
        }
        let pivot_row = a[rank].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= p.clone() * f.clone();
                }
            }
        }
        pivots.push((rank, col));
        rank += 1;
    }
    if rank != n - 1 {
        return Err(Error::InvariantViolated(format!(
            "eigenspace has corank {}, expected 1",
            n - rank
        )));
    }
    let pivot_cols: HashSet<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free = (0..n)
        .find(|c| !pivot_cols.contains(c))
        .expect("corank is 1");
    let mut x = vec![BigRational::zero(); n];
    x[free] = BigRational::one();
    for &(r, pc) in &pivots {
        x[pc] = -a[r][free].clone();
    }
    let common_den = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let mut ints: Vec<BigInt> = x
        .iter()
        .map(|v| v.numer() * &common_den / v.denom())
        .collect();
    if ints.iter().all(|i| i.is_negative()) {
        for i in &mut ints {
            *i = -&*i;
        }
    }
    if ints.iter().any(|i| !i.is_positive()) {
        return Err(Error::InvariantViolated(
            "eigenvector has a non-positive component".into(),
        ));
    }
    let common = ints.iter().fold(BigInt::zero(), |acc, i| acc.gcd(i));
    let w: Vec<BigUint> = ints
        .iter()
        .map(|i| {
            (i / &common)
                .to_biguint()
                .expect("positive after normalization")
        })
        .collect();
    let total = w.iter().fold(BigUint::zero(), |acc, x| acc + x);
    Ok(WeightVector { w, total })
}

fn gate_subsets(n: usize, limit_n: usize) -> Result<()> {
    if n > limit_n || n > 63 {
        return Err(Error::TooLarge(format!(
            "subset search over {n} vertices exceeds the limit of {}",
            limit_n.min(63)
        )));
    }
    Ok(())
}

fn mask_image(a: &Automaton, mask: u64, c: usize) -> u64 {
    let mut out = 0u64;
    for v in 0..a.n() {
        if mask & (1 << v) != 0 {
            out |= 1 << a.step(v, c);
        }
    }
    out
}

fn mask_vertices(mask: u64) -> Vec<VertexId> {
    (0..64).filter(|v| mask & (1 << v) != 0).collect()
}

/// Minimum-length synchronizing word by breadth-first search over vertex
/// subsets, or None when the automaton is not synchronizing.
///
/// Ties are resolved toward the lexicographically smallest word because
/// letters are expanded in ascending order.
pub fn shortest_sync_word(a: &Automaton, limit_n: usize) -> Result<Option<Word>> {
    gate_subsets(a.n(), limit_n)?;
    let n = a.n();
    if n == 1 {
        return Ok(Some(Word(Vec::new())));
    }
    let full: u64 = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    let mut parent: HashMap<u64, (u64, usize)> = HashMap::new();
    let mut queue = VecDeque::from([full]);
    parent.insert(full, (full, usize::MAX));
    while let Some(mask) = queue.pop_front() {
        for c in 0..a.k() {
            let next = mask_image(a, mask, c);
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next, (mask, c));
            if next.count_ones() == 1 {
                let mut letters = Vec::new();
                let mut cur = next;
                while cur != full {
                    let (prev, letter) = parent[&cur];
                    letters.push(letter);
                    cur = prev;
                }
                letters.reverse();
                return Ok(Some(Word(letters)));
            }
            queue.push_back(next);
        }
    }
    Ok(None)
}

/// All colorings of `g` in lexicographic row order.
pub struct ColoringEnumeration {
    k: usize,
    perms: Vec<Vec<usize>>,
    /// Odometer over permutation indices, one digit per vertex; None once
    /// exhausted.
    digits: Option<Vec<usize>>,
}

impl Iterator for ColoringEnumeration {
    type Item = Coloring;

    fn next(&mut self) -> Option<Coloring> {
        let digits = self.digits.as_mut()?;
        let rows: Vec<Vec<usize>> = digits.iter().map(|&d| self.perms[d].clone()).collect();
        // Advance the last digit first, carrying leftward.
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                self.digits = None;
                break;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < self.perms.len() {
                break;
            }
            digits[pos] = 0;
        }
        Some(Coloring::new(self.k, rows).expect("permutation rows"))
    }
}

fn permutations_lex(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut used = vec![false; k];
    fn rec(k: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in 0..k {
            if !used[c] {
                used[c] = true;
                cur.push(c);
                rec(k, cur, used, out);
                cur.pop();
                used[c] = false;
            }
        }
    }
    rec(k, &mut cur, &mut used, &mut out);
    out
}

/// Iterator over every coloring of `g`, gated by `limit` on the total count
/// (k!)^n.
pub fn enumerate_colorings(g: &Graph, limit: u64) -> Result<ColoringEnumeration> {
    let perms = permutations_lex(g.k());
    let count = u64::try_from(perms.len())
        .ok()
        .and_then(|p| p.checked_pow(u32::try_from(g.n()).ok()?));
    match count {
        Some(c) if c <= limit => {}
        _ => {
            return Err(Error::TooLarge(format!(
                "{}!^{} colorings exceed the limit of {limit}",
                g.k(),
                g.n()
            )))
        }
    }
    Ok(ColoringEnumeration {
        k: g.k(),
        perms,
        digits: Some(vec![0; g.n()]),
    })
}

/// Reachable images of the full vertex set, as masks.
fn reachable_images(a: &Automaton) -> Vec<u64> {
    let n = a.n();
    let full: u64 = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    let mut seen = HashSet::from([full]);
    let mut queue = VecDeque::from([full]);
    while let Some(mask) = queue.pop_front() {
        for c in 0..a.k() {
            let next = mask_image(a, mask, c);
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    let mut out: Vec<u64> = seen.into_iter().collect();
    out.sort_unstable();
    out
}

/// Images of the full vertex set in which every pair is a deadlock, sorted.
pub fn f_cliques(a: &Automaton, limit_n: usize) -> Result<Vec<Vec<VertexId>>> {
    Ok(f_clique_masks(a, limit_n)?
        .iter()
        .map(|&m| mask_vertices(m))
        .collect())
}

fn f_clique_masks(a: &Automaton, limit_n: usize) -> Result<Vec<u64>> {
    gate_subsets(a.n(), limit_n)?;
    let table = synchronizable_pairs(a);
    let pairwise_deadlock = |mask: u64| {
        let vs = mask_vertices(mask);
        vs.iter()
            .enumerate()
            .all(|(i, &p)| vs[i + 1..].iter().all(|&q| !table.is_synchronizable(p, q)))
    };
    Ok(reachable_images(a)
        .into_iter()
        .filter(|&m| pairwise_deadlock(m))
        .collect())
}

/// All maximal merge preimages: masks of the form "states mapped into q by
/// s", reachable by walking preimages backward from singletons.
fn preimage_masks(a: &Automaton) -> Vec<u64> {
    let n = a.n();
    let mut seen: HashSet<u64> = (0..n).map(|v| 1u64 << v).collect();
    let mut queue: VecDeque<u64> = seen.iter().copied().collect();
    while let Some(mask) = queue.pop_front() {
        for c in 0..a.k() {
            let mut pre = 0u64;
            for v in 0..n {
                if mask & (1 << a.step(v, c)) != 0 {
                    pre |= 1 << v;
                }
            }
            if seen.insert(pre) {
                queue.push_back(pre);
            }
        }
    }
    let mut out: Vec<u64> = seen.into_iter().collect();
    out.sort_unstable();
    out
}

fn max_merge_weight(a: &Automaton, weights: &WeightVector) -> (BigUint, Vec<u64>) {
    let masks = preimage_masks(a);
    let best = masks
        .iter()
        .map(|&m| weights.mask_weight(m))
        .max()
        .expect("singletons are always present");
    let candidates = masks
        .into_iter()
        .filter(|&m| weights.mask_weight(m) == best)
        .collect();
    (best, candidates)
}

fn exact_cover(candidates: &[u64], universe: u64, covered: u64, picked: &mut Vec<u64>) -> bool {
    if covered == universe {
        return true;
    }
    let lowest = (!covered & universe).trailing_zeros();
    for &c in candidates {
        if c & (1 << lowest) != 0 && c & covered == 0 {
            picked.push(c);
            if exact_cover(candidates, universe, covered | c, picked) {
                return true;
            }
            picked.pop();
        }
    }
    false
}

/// Partition of the vertices into maximal-weight mergeable sets, returned as
/// (block weight, blocks).
///
/// A set is mergeable when some word maps it onto one vertex; the candidates
/// of maximal weight are exactly the maximal merge preimages. A disjoint
/// cover by them always exists; failing to find one is reported as
/// [`Error::PartitionNotFound`] and means a bug.
pub fn f_maximal_partition(a: &Automaton, limit_n: usize) -> Result<(BigUint, Vec<Vec<VertexId>>)> {
    gate_subsets(a.n(), limit_n)?;
    let weights = weight_vector(a.graph())?;
    let (best, candidates) = max_merge_weight(a, &weights);
    let n = a.n();
    let universe: u64 = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    let mut picked = Vec::new();
    if !exact_cover(&candidates, universe, 0, &mut picked) {
        return Err(Error::PartitionNotFound);
    }
    Ok((best, picked.iter().map(|&m| mask_vertices(m)).collect()))
}

/// Verdicts on the deadlock-image structure of one automaton.
///
/// `None` entries mean the property's hypothesis does not apply: the overlap
/// bound assumes no off-diagonal stable pair, and the level cross-section
/// assumes a decomposition consistent with the color-0 subgraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FCliqueReport {
    /// All deadlock images share one size, total weight / maximal merge
    /// weight.
    pub size_uniform: bool,
    /// Deadlock images are closed under every letter and cover every vertex.
    pub closed_and_covering: bool,
    /// Distinct non-singleton deadlock images never differ in exactly one
    /// vertex.
    pub overlap_bound: Option<bool>,
    /// No deadlock image meets a single (tree, level) slice twice.
    pub level_cross_section: Option<bool>,
    pub pass: bool,
}

/// Checks the deadlock-image facts on one automaton, optionally against the
/// cycle/tree decomposition that its color-0 edges form.
pub fn check_f_cliques(
    a: &Automaton,
    dec: Option<&Decomposition>,
    limit_n: usize,
) -> Result<FCliqueReport> {
    let n = a.n();
    let cliques = f_clique_masks(a, limit_n)?;
    let weights = weight_vector(a.graph())?;
    let (best, _) = max_merge_weight(a, &weights);

    let expected_size = {
        let (q, r) = weights.total.div_rem(&best);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    };
    let size_uniform = match expected_size {
        Some(size) => cliques
            .iter()
            .all(|&m| BigUint::from(m.count_ones()) == size),
        None => false,
    };

    let clique_set: HashSet<u64> = cliques.iter().copied().collect();
    let closed = cliques
        .iter()
        .all(|&m| (0..a.k()).all(|c| clique_set.contains(&mask_image(a, m, c))));
    let union = cliques.iter().fold(0u64, |acc, &m| acc | m);
    let full: u64 = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    let closed_and_covering = closed && union == full;

    let overlap_bound = if stable_pairs(a).has_nontrivial_stable_pair() {
        None
    } else {
        Some(cliques.iter().all(|&m1| {
            cliques
                .iter()
                .all(|&m2| m1 == m2 || m1.count_ones() <= 1 || (m1 & !m2).count_ones() != 1)
        }))
    };

    let level_cross_section = dec.and_then(|dec| {
        let choice: Vec<usize> = (0..n).map(|v| a.coloring().slot_of(v, 0)).collect();
        if decompose_choice(a.graph(), &choice) != *dec {
            return None;
        }
        let mut slices: HashMap<(VertexId, usize), u64> = HashMap::new();
        for v in 0..n {
            if dec.level[v] > 0 {
                *slices.entry((dec.tree_root[v], dec.level[v])).or_default() |= 1 << v;
            }
        }
        Some(
            cliques
                .iter()
                .all(|&m| slices.values().all(|&slice| (m & slice).count_ones() <= 1)),
        )
    });

    let pass = size_uniform
        && closed_and_covering
        && overlap_bound.unwrap_or(true)
        && level_cross_section.unwrap_or(true);
    Ok(FCliqueReport {
        size_uniform,
        closed_and_covering,
        overlap_bound,
        level_cross_section,
        pass,
    })
}
