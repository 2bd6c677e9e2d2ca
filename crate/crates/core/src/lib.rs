//! Simulation and exact analysis of the network coloring game.
//!
//! Every vertex of a simple graph is a player choosing a color from `[k]`.
//! A player is *happy* when none of its neighbors shares its color; happy
//! players keep their color forever, unhappy players resample at the next
//! round. Two symmetric strategies are provided:
//!
//! * [`Strategy::Greedy`] resamples uniformly from the colors unused by any
//!   neighbor (needs `k >= Δ + 2` to guarantee convergence).
//! * [`Strategy::Frugal`] resamples uniformly from the player's own color plus
//!   the colors unused by any neighbor (converges for `k >= Δ + 1`).
//!
//! The crate is `no_std` (it needs `alloc`). File formats, campaigns and the
//! command line live in the `colorgame` companion crate.
//!
//! ```
//! use colorgame_core::{generate, run, GameConfig, GraphKind, Strategy};
//!
//! let g = generate(GraphKind::Cycle, 6, None, None).unwrap();
//! let cfg = GameConfig::new(3, Strategy::Frugal, 7);
//! let result = run(&g, &cfg).unwrap();
//! assert!(result.tau.is_some());
//! ```

#![no_std]
#![deny(unsafe_code)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod bounds;
pub mod chain;
pub mod engine;
pub mod graph;
pub mod oracle;
pub mod weight;

pub use bounds::{
    check_dominance, frugal_bounds, greedy_bound, greedy_constant, max_expectation_bound, mu,
    BoundError, BoundReport, DominancePoint, DominanceReport, MaxExpectationBound,
};
pub use engine::{
    available_set, happy_available_set, initial_state, is_happy, is_proper, neighbor_colors, run,
    run_observed, step, unhappy_vertices, Color, ColoringState, EngineError, Fault, GameConfig,
    InitialAssignment, Retention, RoundObserver, RoundRecord, Simulation, Strategy, TrialResult,
    DEFAULT_MAX_ROUNDS,
};
pub use graph::{generate, Graph, GraphError, GraphKind, VertexId};
pub use num_rational::BigRational;
pub use oracle::{
    available_size_distribution, exact_expected_tau, one_round_distribution, partition_neighbors,
    two_round_happiness_prob, AvailableSizeLaw, Distribution, ExpectedTau, NeighborPartition,
    OracleError, OutcomeKind, TwoRoundMode, DEFAULT_ENUMERATION_CAP, DEFAULT_STATE_CAP,
};
pub use weight::Weight;
