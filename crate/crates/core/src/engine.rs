//! The round-synchronous coloring game and its run loop.
//!
//! Rounds are 1-based: the initial assignment is round 1, so `tau == 1`
//! means the initial coloring was already proper. Within a round, unhappy
//! vertices draw their next color in ascending vertex order from a single
//! ChaCha8 stream seeded by [`GameConfig::seed`]; happy vertices never
//! consume randomness.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, VertexId};

/// Cutoff used when a config does not set one.
pub const DEFAULT_MAX_ROUNDS: u64 = 1_000_000;

/// A color index in `[0, k)`. One-based only at I/O boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(transparent)]
pub struct Color(pub u32);

impl Color {
    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Resample from `[k] \ C_t(v)`.
    Greedy,
    /// Resample from `{c_t(v)} ∪ ([k] \ C_t(v))`.
    Frugal,
}

impl Strategy {
    /// Smallest palette for which the strategy is guaranteed to converge.
    pub fn min_colors(self, max_degree: usize) -> usize {
        match self {
            Strategy::Greedy => max_degree + 2,
            Strategy::Frugal => max_degree + 1,
        }
    }

    fn keeps_own_color(self) -> bool {
        matches!(self, Strategy::Frugal)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Greedy => "greedy",
            Strategy::Frugal => "frugal",
        })
    }
}

impl core::str::FromStr for Strategy {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "greedy" | "Greedy" => Ok(Strategy::Greedy),
            "frugal" | "Frugal" => Ok(Strategy::Frugal),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum InitialAssignment {
    /// i.i.d. uniform colors, drawn in vertex order.
    #[default]
    UniformRandom,
    Given(Vec<Color>),
}

/// How much per-round history a trial keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Retention {
    /// Unhappy sets for every round.
    Full,
    /// Unhappy counts only.
    #[default]
    Counts,
}

/// Deliberate defects for mutation testing of the verification suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fault {
    /// Flip whether the resampling set contains the player's own color:
    /// Greedy then includes it, Frugal excludes it.
    InvertOwnColorRule,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameConfig {
    pub k: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub max_rounds: u64,
    /// Reject `k` below [`Strategy::min_colors`]. Only disable it to study
    /// the non-convergent regime.
    pub enforce_k_bound: bool,
    pub initial: InitialAssignment,
    pub retention: Retention,
    pub fault: Option<Fault>,
}

impl GameConfig {
    pub fn new(k: usize, strategy: Strategy, seed: u64) -> Self {
        GameConfig {
            k,
            strategy,
            seed,
            max_rounds: DEFAULT_MAX_ROUNDS,
            enforce_k_bound: true,
            initial: InitialAssignment::UniformRandom,
            retention: Retention::Counts,
            fault: None,
        }
    }

    pub fn with_max_rounds(mut self, max_rounds: u64) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn with_initial(mut self, colors: &[u32]) -> Self {
        self.initial = InitialAssignment::Given(colors.iter().map(|&c| Color(c)).collect());
        self
    }

    pub fn with_retention(mut self, retention: Retention) -> Self {
        self.retention = retention;
        self
    }

    pub fn without_k_bound(mut self) -> Self {
        self.enforce_k_bound = false;
        self
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = Some(fault);
        self
    }

    pub fn validate(&self, g: &Graph) -> Result<(), EngineError> {
        if self.k == 0 || self.k > u32::MAX as usize {
            return Err(EngineError::InvalidPalette(self.k));
        }
        if self.max_rounds == 0 {
            return Err(EngineError::ZeroMaxRounds);
        }
        let required = self.strategy.min_colors(g.max_degree());
        if self.enforce_k_bound && self.k < required {
            return Err(EngineError::KBelowBound {
                strategy: self.strategy,
                k: self.k,
                required,
            });
        }
        if let InitialAssignment::Given(colors) = &self.initial {
            check_assignment(g, colors, self.k)?;
        }
        Ok(())
    }

    fn includes_own_color(&self) -> bool {
        self.strategy.keeps_own_color() != self.fault.is_some()
    }
}

fn check_assignment(g: &Graph, colors: &[Color], k: usize) -> Result<(), EngineError> {
    if colors.len() != g.n() {
        return Err(EngineError::AssignmentLength {
            expected: g.n(),
            got: colors.len(),
        });
    }
    if let Some((v, c)) = colors.iter().enumerate().find(|(_, c)| c.index() >= k) {
        return Err(EngineError::ColorOutOfRange {
            vertex: v,
            color: c.0,
            k,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("palette size k = {0} is not usable")]
    InvalidPalette(usize),
    #[error("max_rounds must be at least 1")]
    ZeroMaxRounds,
    #[error("{strategy} strategy needs k >= {required}, got k = {k}")]
    KBelowBound {
        strategy: Strategy,
        k: usize,
        required: usize,
    },
    #[error("initial assignment has {got} entries, graph has {expected} vertices")]
    AssignmentLength { expected: usize, got: usize },
    #[error("vertex {vertex} has color {color} outside [0, {k})")]
    ColorOutOfRange { vertex: usize, color: u32, k: usize },
    #[error("vertex {0} is happy; its available set is fixed to its own color")]
    HappyVertex(VertexId),
    #[error("vertex {0} has no color to choose from")]
    EmptyAvailableSet(VertexId),
}

/// Color of every vertex after `round`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColoringState {
    pub colors: Vec<Color>,
    pub round: u64,
}

impl ColoringState {
    pub fn new(colors: Vec<Color>, round: u64) -> Self {
        ColoringState { colors, round }
    }

    pub fn from_indices(colors: &[u32], round: u64) -> Self {
        ColoringState::new(colors.iter().map(|&c| Color(c)).collect(), round)
    }

    #[inline]
    pub fn color(&self, v: VertexId) -> Color {
        self.colors[v.index()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RoundRecord {
    pub round: u64,
    /// Vertices with a same-colored neighbor, ascending.
    pub unhappy: Vec<VertexId>,
    pub happy_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TrialResult {
    /// First round after which every player is happy; `None` on timeout.
    pub tau: Option<u64>,
    /// Per-round records; empty unless [`Retention::Full`].
    pub history: Vec<RoundRecord>,
    /// `|U_t|` for t = 1, 2, ... up to the last round run.
    pub unhappy_counts: Vec<usize>,
    pub final_state: ColoringState,
    pub seed: u64,
}

impl TrialResult {
    pub fn rounds_run(&self) -> u64 {
        self.final_state.round
    }

    pub fn timed_out(&self) -> bool {
        self.tau.is_none()
    }

    pub fn final_unhappy(&self) -> usize {
        self.unhappy_counts.last().copied().unwrap_or(0)
    }
}

/// True iff no neighbor of `v` shares its color.
pub fn is_happy(g: &Graph, s: &ColoringState, v: VertexId) -> bool {
    let c = s.color(v);
    g.neighbors(v).iter().all(|&u| s.color(u) != c)
}

pub fn is_proper(g: &Graph, colors: &[Color]) -> bool {
    g.edges()
        .all(|(u, v)| colors[u.index()] != colors[v.index()])
}

pub fn unhappy_vertices(g: &Graph, s: &ColoringState) -> Vec<VertexId> {
    g.vertices().filter(|&v| !is_happy(g, s, v)).collect()
}

/// `C_t(v)`: the distinct colors of `v`'s neighbors, ascending.
pub fn neighbor_colors(g: &Graph, s: &ColoringState, v: VertexId) -> Vec<Color> {
    let mut out: Vec<Color> = g.neighbors(v).iter().map(|&u| s.color(u)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// The set an unhappy vertex resamples from, ascending.
///
/// Errors with [`EngineError::HappyVertex`] for a happy vertex (see
/// [`happy_available_set`]) and with [`EngineError::EmptyAvailableSet`] when
/// Greedy is run below its palette bound and every color is blocked.
pub fn available_set(
    g: &Graph,
    s: &ColoringState,
    v: VertexId,
    strategy: Strategy,
    k: usize,
) -> Result<Vec<Color>, EngineError> {
    if is_happy(g, s, v) {
        return Err(EngineError::HappyVertex(v));
    }
    Ok(resampling_set(g, s, v, strategy.keeps_own_color(), k))
}

/// Convention for happy vertices: they stick, so their set is `{c_t(v)}`.
pub fn happy_available_set(s: &ColoringState, v: VertexId) -> Vec<Color> {
    vec![s.color(v)]
}

/// The strategy's set formula evaluated at `v` whether or not it is happy.
pub(crate) fn resampling_set(
    g: &Graph,
    s: &ColoringState,
    v: VertexId,
    include_own: bool,
    k: usize,
) -> Vec<Color> {
    let blocked = neighbor_colors(g, s, v);
    let own = s.color(v);
    (0..k as u32)
        .map(Color)
        .filter(|c| (include_own && *c == own) || blocked.binary_search(c).is_err())
        .collect()
}

/// Draws the round-1 coloring.
pub fn initial_state<R: RngCore>(
    g: &Graph,
    cfg: &GameConfig,
    rng: &mut R,
) -> Result<ColoringState, EngineError> {
    if cfg.k == 0 || cfg.k > u32::MAX as usize {
        return Err(EngineError::InvalidPalette(cfg.k));
    }
    let colors = match &cfg.initial {
        InitialAssignment::Given(colors) => {
            check_assignment(g, colors, cfg.k)?;
            colors.clone()
        }
        InitialAssignment::UniformRandom => {
            let k = cfg.k as u32;
            (0..g.n()).map(|_| Color(rng.gen_range(0..k))).collect()
        }
    };
    Ok(ColoringState::new(colors, 1))
}

/// One synchronous round from an arbitrary state.
///
/// Returns the next state and the record of that next state. Unhappy
/// vertices are recomputed from scratch; [`Simulation`] is the incremental
/// equivalent used by [`run`] and consumes `rng` identically.
pub fn step<R: RngCore>(
    g: &Graph,
    s: &ColoringState,
    cfg: &GameConfig,
    rng: &mut R,
) -> Result<(ColoringState, RoundRecord), EngineError> {
    let unhappy = unhappy_vertices(g, s);
    let mut scratch = Scratch::new(cfg.k);
    let mut next = s.clone();
    scratch.draw_round(
        g,
        s,
        &unhappy,
        cfg.k,
        cfg.includes_own_color(),
        rng,
        &mut next.colors,
    )?;
    next.round += 1;
    let unhappy = unhappy_vertices(g, &next);
    let record = RoundRecord {
        round: next.round,
        happy_count: g.n() - unhappy.len(),
        unhappy,
    };
    Ok((next, record))
}

struct Scratch {
    marks: Vec<u64>,
    stamp: u64,
    choices: Vec<Color>,
    draws: Vec<Color>,
}

impl Scratch {
    fn new(k: usize) -> Self {
        Scratch {
            marks: vec![0; k],
            stamp: 0,
            choices: Vec::with_capacity(k),
            draws: Vec::new(),
        }
    }

    /// Draws a color for every vertex in `unhappy` (ascending) against the
    /// colors of `s`, then writes all of them into `out` at once.
    #[allow(clippy::too_many_arguments)]
    fn draw_round<R: RngCore>(
        &mut self,
        g: &Graph,
        s: &ColoringState,
        unhappy: &[VertexId],
        k: usize,
        include_own: bool,
        rng: &mut R,
        out: &mut [Color],
    ) -> Result<(), EngineError> {
        self.draws.clear();
        for &v in unhappy {
            self.stamp += 1;
            for &u in g.neighbors(v) {
                self.marks[s.color(u).index()] = self.stamp;
            }
            let own = s.color(v);
            self.choices.clear();
            for c in 0..k {
                if self.marks[c] != self.stamp || (include_own && c == own.index()) {
                    self.choices.push(Color(c as u32));
                }
            }
            if self.choices.is_empty() {
                return Err(EngineError::EmptyAvailableSet(v));
            }
            let i = rng.gen_range(0..self.choices.len() as u32) as usize;
            self.draws.push(self.choices[i]);
        }
        for (&v, &c) in unhappy.iter().zip(&self.draws) {
            out[v.index()] = c;
        }
        Ok(())
    }
}

/// Called once per round with the state after that round (round 1 first).
pub trait RoundObserver {
    fn observe(&mut self, graph: &Graph, state: &ColoringState, unhappy: &[VertexId]);
}

impl RoundObserver for () {
    fn observe(&mut self, _: &Graph, _: &ColoringState, _: &[VertexId]) {}
}

impl<F: FnMut(&ColoringState, &[VertexId])> RoundObserver for F {
    fn observe(&mut self, _: &Graph, state: &ColoringState, unhappy: &[VertexId]) {
        self(state, unhappy)
    }
}

/// A single trial in progress.
///
/// Happy players never become unhappy again (no neighbor can pick a color
/// held by a happy player), so after each round only the previously unhappy
/// vertices are re-examined.
pub struct Simulation<'g> {
    graph: &'g Graph,
    k: usize,
    include_own: bool,
    rng: ChaCha8Rng,
    state: ColoringState,
    unhappy: Vec<VertexId>,
    next: Vec<Color>,
    scratch: Scratch,
}

impl fmt::Debug for Simulation<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Simulation")
            .field("round", &self.state.round)
            .field("unhappy", &self.unhappy.len())
            .finish_non_exhaustive()
    }
}

impl<'g> Simulation<'g> {
    pub fn new(graph: &'g Graph, cfg: &GameConfig) -> Result<Self, EngineError> {
        cfg.validate(graph)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let state = initial_state(graph, cfg, &mut rng)?;
        let unhappy = unhappy_vertices(graph, &state);
        Ok(Simulation {
            graph,
            k: cfg.k,
            include_own: cfg.includes_own_color(),
            rng,
            next: state.colors.clone(),
            state,
            unhappy,
            scratch: Scratch::new(cfg.k),
        })
    }

    pub fn state(&self) -> &ColoringState {
        &self.state
    }

    /// `U_t` for the current round, ascending.
    pub fn unhappy(&self) -> &[VertexId] {
        &self.unhappy
    }

    pub fn is_equilibrium(&self) -> bool {
        self.unhappy.is_empty()
    }

    pub fn advance(&mut self) -> Result<(), EngineError> {
        self.next.copy_from_slice(&self.state.colors);
        self.scratch.draw_round(
            self.graph,
            &self.state,
            &self.unhappy,
            self.k,
            self.include_own,
            &mut self.rng,
            &mut self.next,
        )?;
        core::mem::swap(&mut self.state.colors, &mut self.next);
        self.state.round += 1;
        let (g, s) = (self.graph, &self.state);
        self.unhappy.retain(|&v| !is_happy(g, s, v));
        Ok(())
    }
}

/// Plays the game to equilibrium or to `cfg.max_rounds`.
pub fn run(g: &Graph, cfg: &GameConfig) -> Result<TrialResult, EngineError> {
    run_observed(g, cfg, &mut ())
}

pub fn run_observed<O: RoundObserver + ?Sized>(
    g: &Graph,
    cfg: &GameConfig,
    observer: &mut O,
) -> Result<TrialResult, EngineError> {
    let mut sim = Simulation::new(g, cfg)?;
    let mut history = Vec::new();
    let mut unhappy_counts = Vec::new();
    loop {
        let round = sim.state().round;
        observer.observe(g, sim.state(), sim.unhappy());
        unhappy_counts.push(sim.unhappy().len());
        if cfg.retention == Retention::Full {
            history.push(RoundRecord {
                round,
                unhappy: sim.unhappy().to_vec(),
                happy_count: g.n() - sim.unhappy().len(),
            });
        }
        if sim.is_equilibrium() {
            return Ok(finish(sim, Some(round), history, unhappy_counts, cfg.seed));
        }
        if round >= cfg.max_rounds {
            return Ok(finish(sim, None, history, unhappy_counts, cfg.seed));
        }
        sim.advance()?;
    }
}

fn finish(
    sim: Simulation<'_>,
    tau: Option<u64>,
    history: Vec<RoundRecord>,
    unhappy_counts: Vec<usize>,
    seed: u64,
) -> TrialResult {
    TrialResult {
        tau,
        history,
        unhappy_counts,
        final_state: sim.state,
        seed,
    }
}
