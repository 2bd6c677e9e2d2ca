//! Brute-force ground truth on tiny instances.
//!
//! Everything here enumerates the joint choices of the unhappy players
//! exhaustively, so results are exact (with [`BigRational`] weights) or
//! exact up to floating-point rounding (with `f64` weights).
//!
//! [`BigRational`]: num_rational::BigRational

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::chain::{AbsorbingChain, ChainError};
use crate::engine::{
    is_happy, is_proper, resampling_set, unhappy_vertices, Color, ColoringState, EngineError,
    GameConfig, InitialAssignment, Strategy,
};
use crate::graph::{Graph, VertexId};
use crate::weight::Weight;

/// Default bound on the number of joint outcomes one call may enumerate.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;
/// Default bound on `k^n` for [`exact_expected_tau`].
pub const DEFAULT_STATE_CAP: u64 = 100_000;
/// Joint supports up to this size are cheap enough for exact rationals.
pub const EXACT_SUPPORT_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("enumeration needs {needed} outcomes, cap is {cap}")]
    EnumerationCap { needed: u128, cap: u64 },
    #[error("state space k^n = {needed} exceeds cap {cap}")]
    StateCap { needed: u128, cap: u64 },
    #[error("vertex {0} is happy in the given state")]
    NotUnhappy(VertexId),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    /// Outcomes are next-round colorings.
    Coloring,
    /// Outcomes are sizes of an available set.
    AvailableSize,
}

/// Finite distribution with outcomes in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<T, W> {
    pub kind: OutcomeKind,
    pub support: Vec<(T, W)>,
}

impl<T: Ord + Clone, W: Weight> Distribution<T, W> {
    fn from_map(kind: OutcomeKind, map: BTreeMap<T, W>) -> Self {
        Distribution {
            kind,
            support: map.into_iter().collect(),
        }
    }

    pub fn point_mass(kind: OutcomeKind, outcome: T) -> Self {
        Distribution {
            kind,
            support: vec![(outcome, W::one())],
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total(&self) -> W {
        self.support
            .iter()
            .fold(W::zero(), |acc, (_, p)| acc.add(p))
    }

    pub fn probability(&self, outcome: &T) -> W {
        self.support
            .binary_search_by(|(o, _)| o.cmp(outcome))
            .map(|i| self.support[i].1.clone())
            .unwrap_or_else(|_| W::zero())
    }

    /// Probability mass of outcomes satisfying `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(&T) -> bool) -> W {
        self.support
            .iter()
            .filter(|(o, _)| pred(o))
            .fold(W::zero(), |acc, (_, p)| acc.add(p))
    }

    /// Non-negative weights summing to one within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        self.support.iter().all(|(_, p)| *p >= W::zero())
            && libm::fabs(self.total().to_f64() - 1.0) <= tol
    }
}

/// Neighbors of `v` split by their status in a state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborPartition {
    /// `H_t(v)`.
    pub happy: Vec<VertexId>,
    /// `F_t(v)`, the colors held by happy neighbors.
    pub frozen_colors: Vec<Color>,
    /// `f_t(v) = |F_t(v)|`.
    pub f: usize,
    /// Unhappy neighbors sharing `v`'s color.
    pub unhappy_same: Vec<VertexId>,
    /// Unhappy neighbors with a different color.
    pub unhappy_diff: Vec<VertexId>,
}

pub fn partition_neighbors(g: &Graph, s: &ColoringState, v: VertexId) -> NeighborPartition {
    let own = s.color(v);
    let mut p = NeighborPartition {
        happy: Vec::new(),
        frozen_colors: Vec::new(),
        f: 0,
        unhappy_same: Vec::new(),
        unhappy_diff: Vec::new(),
    };
    for &u in g.neighbors(v) {
        if is_happy(g, s, u) {
            p.happy.push(u);
            p.frozen_colors.push(s.color(u));
        } else if s.color(u) == own {
            p.unhappy_same.push(u);
        } else {
            p.unhappy_diff.push(u);
        }
    }
    p.frozen_colors.sort_unstable();
    p.frozen_colors.dedup();
    p.f = p.frozen_colors.len();
    p
}

/// Resampling sets of every unhappy vertex, in ascending vertex order.
fn choice_sets(
    g: &Graph,
    s: &ColoringState,
    strategy: Strategy,
    k: usize,
) -> Result<Vec<(VertexId, Vec<Color>)>, OracleError> {
    let mut sets = Vec::new();
    for v in unhappy_vertices(g, s) {
        let set = resampling_set(g, s, v, strategy == Strategy::Frugal, k);
        if set.is_empty() {
            return Err(EngineError::EmptyAvailableSet(v).into());
        }
        sets.push((v, set));
    }
    Ok(sets)
}

fn joint_size(sets: &[(VertexId, Vec<Color>)]) -> u128 {
    sets.iter()
        .fold(1u128, |acc, (_, set)| acc.saturating_mul(set.len() as u128))
}

/// Number of joint outcomes of one round from `s`.
pub fn one_round_support_size(
    g: &Graph,
    s: &ColoringState,
    strategy: Strategy,
    k: usize,
) -> Result<u128, OracleError> {
    Ok(joint_size(&choice_sets(g, s, strategy, k)?))
}

/// Calls `visit` with every joint outcome of one round (all equally likely)
/// and returns how many there were.
fn enumerate_round(
    s: &ColoringState,
    sets: &[(VertexId, Vec<Color>)],
    cap: u64,
    mut visit: impl FnMut(&[Color]),
) -> Result<u64, OracleError> {
    let needed = joint_size(sets);
    if needed > cap as u128 {
        return Err(OracleError::EnumerationCap { needed, cap });
    }
    let mut colors = s.colors.clone();
    let mut digits = vec![0usize; sets.len()];
    for (v, set) in sets {
        colors[v.index()] = set[0];
    }
    loop {
        visit(&colors);
        // mixed-radix increment, last vertex fastest
        let mut i = sets.len();
        loop {
            if i == 0 {
                return Ok(needed as u64);
            }
            i -= 1;
            let (v, set) = &sets[i];
            digits[i] += 1;
            if digits[i] < set.len() {
                colors[v.index()] = set[digits[i]];
                break;
            }
            digits[i] = 0;
            colors[v.index()] = set[0];
        }
    }
}

/// Exact law of the next state: every joint choice of the unhappy players
/// has probability `∏ 1/|A_t(v)|`; happy players are fixed.
pub fn one_round_distribution<W: Weight>(
    g: &Graph,
    s: &ColoringState,
    strategy: Strategy,
    k: usize,
    cap: u64,
) -> Result<Distribution<ColoringState, W>, OracleError> {
    let sets = choice_sets(g, s, strategy, k)?;
    let p = W::reciprocal(joint_size(&sets) as u64);
    let mut map = BTreeMap::new();
    enumerate_round(s, &sets, cap, |colors| {
        map.insert(ColoringState::new(colors.to_vec(), s.round + 1), p.clone());
    })?;
    Ok(Distribution::from_map(OutcomeKind::Coloring, map))
}

/// Law of the available-set size one round ahead, against the floor
/// `P(|A_{t+1}(v)| >= (k - f_t(v)) / 5) >= 1/16`.
#[derive(Clone, Debug, PartialEq)]
pub struct AvailableSizeLaw<W> {
    pub distribution: Distribution<usize, W>,
    /// `f_t(v)` in the starting state.
    pub f: usize,
    pub k: usize,
    /// `P(5 |A_{t+1}(v)| >= k - f)`.
    pub prob_at_least: W,
    /// `1/16`.
    pub floor: W,
}

impl<W: Weight> AvailableSizeLaw<W> {
    /// The threshold `(k - f) / 5`.
    pub fn threshold(&self) -> f64 {
        (self.k - self.f) as f64 / 5.0
    }

    pub fn holds(&self) -> bool {
        self.prob_at_least >= self.floor
    }
}

/// Exact law of `|A_{t+1}(v)|` for an unhappy `v`.
///
/// The size is that of the strategy's set formula at round `t + 1`
/// (`{c_{t+1}(v)} ∪ ([k] \ C_{t+1}(v))` for Frugal), whether or not `v`
/// became happy in between: it counts the colors left unblocked by the
/// neighbors' draws.
pub fn available_size_distribution<W: Weight>(
    g: &Graph,
    s: &ColoringState,
    v: VertexId,
    strategy: Strategy,
    k: usize,
    cap: u64,
) -> Result<AvailableSizeLaw<W>, OracleError> {
    if is_happy(g, s, v) {
        return Err(OracleError::NotUnhappy(v));
    }
    let f = partition_neighbors(g, s, v).f;
    let sets = choice_sets(g, s, strategy, k)?;
    let p = W::reciprocal(joint_size(&sets) as u64);
    let mut map: BTreeMap<usize, W> = BTreeMap::new();
    let mut next = ColoringState::new(s.colors.clone(), s.round + 1);
    enumerate_round(s, &sets, cap, |colors| {
        next.colors.copy_from_slice(colors);
        let size = resampling_set(g, &next, v, strategy == Strategy::Frugal, k).len();
        let e = map.entry(size).or_insert_with(W::zero);
        *e = e.add(&p);
    })?;
    let distribution = Distribution::from_map(OutcomeKind::AvailableSize, map);
    let prob_at_least = distribution.mass_where(|&size| 5 * size >= k - f);
    Ok(AvailableSizeLaw {
        distribution,
        f,
        k,
        prob_at_least,
        floor: W::from_ratio(1, 16),
    })
}

/// Whether round-two expansion may stop early once `v` is happy after one round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoRoundMode {
    /// A vertex happy at `t + 1` stays happy, so it contributes fully.
    Shortcut,
    /// Expand every intermediate state.
    Full,
}

/// Exact `P(v ∈ H_{t+2} | state s at round t)`.
///
/// For a happy `v` this is 1. Intermediate states are memoized, and the
/// combined number of enumerated outcomes over both rounds is bounded by `cap`.
pub fn two_round_happiness_prob<W: Weight>(
    g: &Graph,
    s: &ColoringState,
    v: VertexId,
    strategy: Strategy,
    k: usize,
    mode: TwoRoundMode,
    cap: u64,
) -> Result<W, OracleError> {
    if is_happy(g, s, v) {
        return Ok(W::one());
    }
    let first = one_round_distribution::<W>(g, s, strategy, k, cap)?;
    let mut budget = cap - first.len() as u64;
    let mut memo: BTreeMap<&[Color], W> = BTreeMap::new();
    let mut total = W::zero();
    for (mid, p) in &first.support {
        if mode == TwoRoundMode::Shortcut && is_happy(g, mid, v) {
            total = total.add(p);
            continue;
        }
        let happy_next = match memo.get(mid.colors.as_slice()) {
            Some(q) => q.clone(),
            None => {
                let sets = choice_sets(g, mid, strategy, k)?;
                let q_each = W::reciprocal(joint_size(&sets) as u64);
                let mut q = W::zero();
                let mut scratch = mid.clone();
                let used = enumerate_round(mid, &sets, budget, |colors| {
                    scratch.colors.copy_from_slice(colors);
                    if is_happy(g, &scratch, v) {
                        q = q.add(&q_each);
                    }
                })?;
                budget -= used;
                memo.insert(mid.colors.as_slice(), q.clone());
                q
            }
        };
        total = total.add(&p.mul(&happy_next));
    }
    Ok(total)
}

/// The two-round floor `1 / (2^6 e^5)`.
///
/// For exact weights this is the rational `10^6 / (64 · 148413159)`, which
/// lies strictly above the true floor because `e^5 > 148.413159`; a
/// probability at or above it is certified to clear the real constant.
pub fn two_round_floor<W: Weight>() -> W {
    if W::is_exact() {
        W::from_ratio(1_000_000, 64 * 148_413_159)
    } else {
        W::from_f64(1.0 / (64.0 * libm::exp(5.0)))
    }
}

/// Expected convergence time from the exact absorbing chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedTau {
    /// `E(τ)` counting the initial assignment as round 1; infinite when the
    /// initial support can reach a class that never becomes proper.
    pub expected: f64,
    pub reachable_states: usize,
    /// Reachable states from which no proper coloring is reachable.
    pub trapped_states: usize,
    pub residual: f64,
}

/// Builds the chain over colorings reachable from the initial distribution
/// (breadth-first), absorbs at proper colorings and solves for `E(τ)`.
pub fn exact_expected_tau(
    g: &Graph,
    cfg: &GameConfig,
    state_cap: u64,
) -> Result<ExpectedTau, OracleError> {
    cfg.validate(g)?;
    let needed = (cfg.k as u128)
        .checked_pow(g.n() as u32)
        .unwrap_or(u128::MAX);
    if needed > state_cap as u128 {
        return Err(OracleError::StateCap {
            needed,
            cap: state_cap,
        });
    }
    let initial: Vec<(Vec<Color>, f64)> = match &cfg.initial {
        InitialAssignment::Given(c) => vec![(c.clone(), 1.0)],
        InitialAssignment::UniformRandom => {
            let p = 1.0 / needed as f64;
            all_colorings(g.n(), cfg.k).map(|c| (c, p)).collect()
        }
    };

    let mut index: BTreeMap<Vec<Color>, usize> = BTreeMap::new();
    let mut chain = AbsorbingChain::new();
    let mut queue = VecDeque::new();
    let mut intern = |colors: &Vec<Color>,
                      chain: &mut AbsorbingChain,
                      queue: &mut VecDeque<(usize, Vec<Color>)>| {
        *index.entry(colors.clone()).or_insert_with(|| {
            let id = chain.add_state(is_proper(g, colors));
            queue.push_back((id, colors.clone()));
            id
        })
    };
    let starts: Vec<(usize, f64)> = initial
        .iter()
        .map(|(c, p)| (intern(c, &mut chain, &mut queue), *p))
        .collect();

    let include_own = cfg.strategy == Strategy::Frugal;
    let strategy = if include_own != cfg.fault.is_some() {
        Strategy::Frugal
    } else {
        Strategy::Greedy
    };
    while let Some((id, colors)) = queue.pop_front() {
        let s = ColoringState::new(colors, 1);
        if is_proper(g, &s.colors) {
            continue;
        }
        let dist = one_round_distribution::<f64>(g, &s, strategy, cfg.k, DEFAULT_ENUMERATION_CAP)?;
        let mut row = Vec::with_capacity(dist.len());
        for (next, p) in dist.support {
            row.push((intern(&next.colors, &mut chain, &mut queue), p));
        }
        chain.set_transitions(id, row);
    }

    let times = chain.expected_absorption_times()?;
    let expected = starts
        .iter()
        .map(|&(i, p)| p * (1.0 + times.steps[i]))
        .sum();
    Ok(ExpectedTau {
        expected,
        reachable_states: chain.len(),
        trapped_states: times.trapped.len(),
        residual: times.residual,
    })
}

/// All `k^n` colorings in lexicographic order.
fn all_colorings(n: usize, k: usize) -> impl Iterator<Item = Vec<Color>> {
    let total = (k as u128).pow(n as u32);
    (0..total).map(move |mut code| {
        let mut c = vec![Color(0); n];
        for slot in c.iter_mut().rev() {
            *slot = Color((code % k as u128) as u32);
            code /= k as u128;
        }
        c
    })
}
