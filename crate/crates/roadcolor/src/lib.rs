//! Synchronizing edge-colorings of constant out-degree multigraphs.
//!
//! A finite directed multigraph whose vertices all carry exactly `k` outgoing
//! edge slots turns into a deterministic automaton once each vertex's slots
//! are labeled with the `k` distinct colors. A coloring is synchronizing when
//! some word over the colors maps every vertex to one common vertex; a graph
//! admits one exactly when it is strongly connected and its cycle lengths
//! have greatest common divisor 1 (an AGW graph, after Adler, Goodwyn and
//! Weiss). This crate decides the condition and constructs the coloring.
//!
//! Module map:
//! * [`graph`]: data model, validation, word application, random instances.
//! * [`stability`]: pair merging analysis, the stability congruence and its
//!   quotient automaton.
//! * [`spanning`]: functional spanning subgraphs, cycle and tree structure,
//!   rewiring moves.
//! * [`synthesis`]: the recursive construction of a synchronizing coloring
//!   and greedy word extraction.
//! * [`analysis`]: exact vertex weights, exhaustive oracles, deadlock-image
//!   structure checks.
//! * [`files`]: JSON file formats shared with the `roadcolor` binary.

pub mod analysis;
pub mod files;
pub mod graph;
pub mod spanning;
pub mod stability;
pub mod synthesis;

pub use analysis::{
    check_f_cliques, enumerate_colorings, f_cliques, f_maximal_partition, shortest_sync_word,
    weight_vector, FCliqueReport, WeightVector, DEFAULT_ENUMERATION_LIMIT, DEFAULT_SUBSET_LIMIT,
};
pub use files::{ColoringFile, GraphFile, WordFile};
pub use graph::{
    apply_word, cycle_gcd, is_strongly_connected, random_agw, validate_agw, AgwReport, Automaton,
    Coloring, GenMode, Graph, VertexId, Word,
};
pub use spanning::{
    alpha_coloring, break_all_cycles, decompose, find_stable_friendly_spanning,
    find_stable_friendly_spanning_with_stats, has_vertex_with_two_incoming_bunches, Decomposition,
    SpanningStats, SpanningSubgraph,
};
pub use stability::{
    is_synchronizing, quotient, stability_partition, stable_pairs, synchronizable_pairs, PairTable,
    StabilityPartition,
};
pub use synthesis::{
    colorize_with_stable_pair, lift_coloring, synchronizing_coloring, synchronizing_word,
    LevelRecord, SyncReport, SynthesisPhase, SynthesisTrace,
};

use thiserror::Error;

/// Failure modes across the crate.
///
/// Variants documented as internal signal broken invariants that the theory
/// rules out; reaching one is a bug in this crate, not a property of the
/// input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    /// One of the three AGW conditions fails; the message names it.
    #[error("graph is not AGW: {0}")]
    NotAgw(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no AGW graph found after {attempts} rejection attempts")]
    GenerationFailed { attempts: usize },
    /// Internal: every out-edge set was a bunch, so no cycle can be broken.
    #[error("no cycle-breaking edge exists")]
    NoBreakingEdge,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    /// Internal: the rewiring search ran out of moves.
    #[error("spanning subgraph search is stuck: {0}")]
    AlgorithmStuck(String),
    /// Internal: a certified property failed to hold.
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    /// Internal: a coloring left every vertex in its own stability class.
    #[error("coloring produced no nontrivial stable class")]
    NoStablePair,
    #[error("automaton is not synchronizing")]
    NotSynchronizing,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    /// Internal: no disjoint cover by maximal-weight mergeable sets exists.
    #[error("no partition into maximal-weight mergeable sets")]
    PartitionNotFound,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
