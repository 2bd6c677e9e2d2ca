//! The verification suite: exhaustive exact checks of the one- and
//! two-round probability floors on a small corpus, a goodness-of-fit test
//! of the engine against the exact one-round law, and a stochastic
//! dominance check of simulated convergence times.

use std::collections::BTreeMap;

use colorgame_core::oracle::two_round_floor;
use colorgame_core::{
    available_size_distribution, check_dominance, frugal_bounds, generate, is_happy, mu,
    one_round_distribution, step, two_round_happiness_prob, BigRational, Color, ColoringState,
    Fault, GameConfig, Graph, GraphKind, Strategy, TwoRoundMode, VertexId, Weight,
    DEFAULT_ENUMERATION_CAP,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::campaign::{run_trials, tau_stats};
use crate::{Error, Result};

/// Significance level of the goodness-of-fit test.
pub const CHI_SQUARE_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    Fast,
    Full,
}

impl std::str::FromStr for VerifyLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fast" => Ok(VerifyLevel::Fast),
            "full" => Ok(VerifyLevel::Full),
            _ => Err(format!("unknown level `{s}` (fast or full)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusInstance {
    pub name: &'static str,
    pub graph: Graph,
    pub k: usize,
}

/// Frugal instances small enough to enumerate every coloring. `path-3`
/// at `k = 2` sits below the palette bound and is included on purpose.
pub fn corpus(level: VerifyLevel) -> Vec<CorpusInstance> {
    let g = |kind, n| generate(kind, n, None, None).expect("fixed corpus graph");
    let mut c = vec![
        CorpusInstance {
            name: "triangle",
            graph: g(GraphKind::Complete, 3),
            k: 3,
        },
        CorpusInstance {
            name: "path-3",
            graph: g(GraphKind::Path, 3),
            k: 2,
        },
        CorpusInstance {
            name: "path-3",
            graph: g(GraphKind::Path, 3),
            k: 3,
        },
        CorpusInstance {
            name: "cycle-4",
            graph: g(GraphKind::Cycle, 4),
            k: 3,
        },
        // a wide palette, so the size threshold (k - f) / 5 exceeds one
        CorpusInstance {
            name: "edge",
            graph: g(GraphKind::Path, 2),
            k: 11,
        },
    ];
    if level == VerifyLevel::Full {
        c.push(CorpusInstance {
            name: "star-4",
            graph: g(GraphKind::Star, 4),
            k: 4,
        });
        c.push(CorpusInstance {
            name: "path-3",
            graph: g(GraphKind::Path, 3),
            k: 8,
        });
    }
    c
}

fn all_colorings(n: usize, k: usize) -> impl Iterator<Item = ColoringState> {
    let total = (k as u64).pow(n as u32);
    (0..total).map(move |mut code| {
        let mut colors = vec![Color(0); n];
        for c in colors.iter_mut().rev() {
            *c = Color((code % k as u64) as u32);
            code /= k as u64;
        }
        ColoringState::new(colors, 1)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorSummary {
    pub instance: String,
    pub k: usize,
    pub states: usize,
    pub pairs: usize,
    pub violations: usize,
    /// Smallest probability found, as a reduced fraction and a double.
    pub min_prob: String,
    pub min_prob_f64: f64,
}

struct Tracker {
    pairs: usize,
    violations: usize,
    min: Option<BigRational>,
}

impl Tracker {
    fn new() -> Self {
        Tracker {
            pairs: 0,
            violations: 0,
            min: None,
        }
    }

    fn record(&mut self, p: BigRational, ok: bool) {
        self.pairs += 1;
        self.violations += usize::from(!ok);
        if self.min.as_ref().is_none_or(|m| p < *m) {
            self.min = Some(p);
        }
    }

    fn summary(self, inst: &CorpusInstance, states: usize) -> FloorSummary {
        let min = self.min.unwrap_or_else(BigRational::one);
        FloorSummary {
            instance: inst.name.to_string(),
            k: inst.k,
            states,
            pairs: self.pairs,
            violations: self.violations,
            min_prob: min.to_string(),
            min_prob_f64: min.to_f64(),
        }
    }
}

/// Exact floors over every conflicted coloring and every unhappy vertex:
/// `P(|A_{t+1}(v)| >= (k - f_t(v)) / 5) >= 1/16` and
/// `P(v happy at t + 2) >= 1 / (2^6 e^5)`.
///
/// Two-round probabilities reuse each state's one-round law, so the whole
/// state space costs one enumeration per coloring. When the space is tiny
/// every value is also recomputed with the oracle's own two-round routine.
pub fn exact_floors(inst: &CorpusInstance) -> Result<(FloorSummary, FloorSummary, usize)> {
    let (g, k) = (&inst.graph, inst.k);
    let floor2 = two_round_floor::<BigRational>();
    let states: Vec<ColoringState> = all_colorings(g.n(), k).collect();

    let mut one_round = BTreeMap::new();
    for s in &states {
        let d = one_round_distribution::<BigRational>(
            g,
            s,
            Strategy::Frugal,
            k,
            DEFAULT_ENUMERATION_CAP,
        )?;
        one_round.insert(s.colors.clone(), d);
    }
    // q(s, v) = P(v happy one round after s)
    let q = |colors: &[Color], v: VertexId| -> BigRational {
        one_round[colors].mass_where(|t| is_happy(g, t, v))
    };

    let (mut size_floor, mut two_round) = (Tracker::new(), Tracker::new());
    let mut cross_checked = 0;
    let mut conflicted = 0;
    for s in &states {
        let unhappy: Vec<VertexId> = g.vertices().filter(|&v| !is_happy(g, s, v)).collect();
        if unhappy.is_empty() {
            continue;
        }
        conflicted += 1;
        for &v in &unhappy {
            let law = available_size_distribution::<BigRational>(
                g,
                s,
                v,
                Strategy::Frugal,
                k,
                DEFAULT_ENUMERATION_CAP,
            )?;
            let ok = law.holds();
            size_floor.record(law.prob_at_least, ok);

            let p2 = one_round[&s.colors]
                .support
                .iter()
                .fold(BigRational::zero(), |acc, (mid, p)| {
                    acc.add(&p.mul(&q(&mid.colors, v)))
                });
            if states.len() <= 81 {
                let direct = two_round_happiness_prob::<BigRational>(
                    g,
                    s,
                    v,
                    Strategy::Frugal,
                    k,
                    TwoRoundMode::Full,
                    DEFAULT_ENUMERATION_CAP,
                )?;
                if direct != p2 {
                    return Err(Error::Config(format!(
                        "{}: two-round oracle disagrees at {:?} v{}",
                        inst.name, s.colors, v
                    )));
                }
                cross_checked += 1;
            }
            let ok = p2 >= floor2;
            two_round.record(p2, ok);
        }
    }
    Ok((
        size_floor.summary(inst, conflicted),
        two_round.summary(inst, conflicted),
        cross_checked,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetedFloor {
    pub instance: String,
    pub vertex: u32,
    pub k: usize,
    pub threshold: f64,
    pub prob: String,
    pub prob_f64: f64,
    pub holds: bool,
}

/// On the small corpus the threshold `(k - f) / 5` never exceeds one, so
/// the size floor holds trivially. These degree-5 states with every player
/// on color 0 make it bind: the player needs two or more open colors.
pub fn targeted_floors() -> Result<Vec<TargetedFloor>> {
    let mut out = Vec::new();
    for (name, kind) in [
        ("star-6", GraphKind::Star),
        ("complete-6", GraphKind::Complete),
    ] {
        let g = generate(kind, 6, None, None)?;
        let s = ColoringState::from_indices(&[0; 6], 1);
        for v in [VertexId(0), VertexId(1)] {
            let law = available_size_distribution::<BigRational>(
                &g,
                &s,
                v,
                Strategy::Frugal,
                6,
                DEFAULT_ENUMERATION_CAP,
            )?;
            out.push(TargetedFloor {
                instance: name.to_string(),
                vertex: v.0,
                k: 6,
                threshold: law.threshold(),
                prob: law.prob_at_least.to_string(),
                prob_f64: law.prob_at_least.to_f64(),
                holds: law.holds(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub instance: String,
    pub steps: u64,
    pub categories: usize,
    pub dof: usize,
    pub statistic: f64,
    pub critical: f64,
    pub p_value: f64,
    /// Engine outcomes that the exact law gives probability zero.
    pub outside_support: u64,
    pub passed: bool,
}

/// Pearson goodness-of-fit of `steps` independent engine rounds from `s`
/// against the exact one-round law.
pub fn chi_square_agreement(
    name: &str,
    g: &Graph,
    s: &ColoringState,
    cfg: &GameConfig,
    steps: u64,
) -> Result<ChiSquareResult> {
    let law = one_round_distribution::<f64>(g, s, cfg.strategy, cfg.k, DEFAULT_ENUMERATION_CAP)?;
    let mut counts: BTreeMap<Vec<Color>, u64> = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..steps {
        let (next, _) = step(g, s, cfg, &mut rng)?;
        *counts.entry(next.colors).or_default() += 1;
    }
    let mut statistic = 0.0;
    let mut inside = 0;
    for (state, p) in &law.support {
        let expected = p * steps as f64;
        let observed = counts.get(&state.colors).copied().unwrap_or(0);
        inside += observed;
        statistic += (observed as f64 - expected).powi(2) / expected;
    }
    let outside_support = steps - inside;
    let dof = law.len().saturating_sub(1).max(1);
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    let critical = dist.inverse_cdf(1.0 - CHI_SQUARE_ALPHA);
    let p_value = dist.sf(statistic);
    Ok(ChiSquareResult {
        instance: name.to_string(),
        steps,
        categories: law.len(),
        dof,
        statistic,
        critical,
        p_value,
        outside_support,
        passed: outside_support == 0 && statistic <= critical,
    })
}

/// The two goodness-of-fit instances, both starting from `(0, 0, 1)` on
/// the triangle: Frugal at `k = 3` and Greedy at `k = 4`. Each has four
/// equally likely outcomes.
pub fn chi_square_suite(
    steps: u64,
    seed: u64,
    fault: Option<Fault>,
) -> Result<Vec<ChiSquareResult>> {
    let g = generate(GraphKind::Complete, 3, None, None)?;
    let s = ColoringState::from_indices(&[0, 0, 1], 1);
    [
        ("triangle-frugal-k3", Strategy::Frugal, 3),
        ("triangle-greedy-k4", Strategy::Greedy, 4),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, (name, strategy, k))| {
        let mut cfg = GameConfig::new(k, strategy, seed.wrapping_add(i as u64));
        if let Some(f) = fault {
            cfg = cfg.with_fault(f);
        }
        chi_square_agreement(name, &g, &s, &cfg, steps)
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub level: String,
    pub fault_injected: bool,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub level: VerifyLevel,
    pub seed: u64,
    /// Run the engine-facing checks against a deliberately broken engine.
    pub fault: Option<Fault>,
    pub jobs: Option<usize>,
}

impl VerifyOptions {
    pub fn new(level: VerifyLevel) -> Self {
        VerifyOptions {
            level,
            seed: 1,
            fault: None,
            jobs: None,
        }
    }
}

pub fn verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();

    let mut size_floor = Vec::new();
    let mut two_round = Vec::new();
    let mut cross_checked = 0;
    for inst in corpus(opts.level) {
        let (a, b, c) = exact_floors(&inst)?;
        size_floor.push(a);
        two_round.push(b);
        cross_checked += c;
    }
    let targeted = targeted_floors()?;
    checks.push(CheckResult {
        name: "available_set_floor".into(),
        passed: size_floor.iter().all(|s| s.violations == 0) && targeted.iter().all(|t| t.holds),
        detail: json!({ "floor": "1/16", "instances": size_floor, "targeted": targeted }),
    });
    checks.push(CheckResult {
        name: "two_round_floor".into(),
        passed: two_round.iter().all(|s| s.violations == 0),
        detail: json!({
            "floor": two_round_floor::<BigRational>().to_string(),
            "cross_checked_pairs": cross_checked,
            "instances": two_round,
        }),
    });

    let triangle = generate(GraphKind::Complete, 3, None, None)?;
    let p = two_round_happiness_prob::<BigRational>(
        &triangle,
        &ColoringState::from_indices(&[0, 0, 1], 1),
        VertexId(0),
        Strategy::Frugal,
        3,
        TwoRoundMode::Full,
        DEFAULT_ENUMERATION_CAP,
    )?;
    checks.push(CheckResult {
        name: "triangle_two_round_value".into(),
        passed: p == BigRational::from_ratio(3, 4),
        detail: json!({ "expected": "3/4", "computed": p.to_string() }),
    });

    let steps = match opts.level {
        VerifyLevel::Fast => 100_000,
        VerifyLevel::Full => 1_000_000,
    };
    for r in chi_square_suite(steps, opts.seed, opts.fault)? {
        checks.push(CheckResult {
            name: format!("chi_square/{}", r.instance),
            passed: r.passed,
            detail: serde_json::to_value(&r).expect("serializable"),
        });
    }

    checks.push(dominance_check(opts)?);

    Ok(VerifyReport {
        level: format!("{:?}", opts.level).to_lowercase(),
        fault_injected: opts.fault.is_some(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// A fresh Frugal campaign on a sparse random graph: no timeouts, mean
/// below the expectation bound and no dominance violations.
fn dominance_check(opts: &VerifyOptions) -> Result<CheckResult> {
    let (n, trials) = match opts.level {
        VerifyLevel::Fast => (200, 2_000),
        VerifyLevel::Full => (1_000, 20_000),
    };
    let g = generate(
        GraphKind::ErdosRenyi,
        n,
        Some(8.0 / n as f64),
        Some(opts.seed),
    )?;
    let mut cfg =
        GameConfig::new(g.max_degree() + 1, Strategy::Frugal, opts.seed).with_max_rounds(2_000);
    if let Some(f) = opts.fault {
        cfg = cfg.with_fault(f);
    }
    let rows = run_trials(&g, &cfg, trials, opts.seed, opts.jobs)?;
    let st = tau_stats(&rows);
    let bound = frugal_bounds(n as u64)?.e_t_bound;
    let taus: Vec<u64> = rows.iter().filter_map(|r| r.tau).collect();
    let report = (!taus.is_empty())
        .then(|| check_dominance(&taus, mu()))
        .transpose()?;
    let violations = report.as_ref().map_or(0, |r| r.violations);
    let passed = st.timeouts == 0 && st.mean.is_some_and(|m| m <= bound) && violations == 0;
    Ok(CheckResult {
        name: "dominance".into(),
        passed,
        detail: json!({
            "n": n,
            "k": cfg.k,
            "trials": trials,
            "timeouts": st.timeouts,
            "mean_tau": st.mean,
            "e_t_bound": bound,
            "band": report.as_ref().map(|r| r.band),
            "violations": violations,
            "min_margin": report.as_ref().map(|r| r.min_margin),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colorings_are_enumerated_in_order() {
        let all: Vec<_> = all_colorings(2, 3).map(|s| s.colors).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[5], [Color(1), Color(2)]);
    }

    #[test]
    fn corpus_levels() {
        assert_eq!(corpus(VerifyLevel::Fast).len(), 5);
        assert_eq!(corpus(VerifyLevel::Full)[5].graph.max_degree(), 3);
    }

    #[test]
    fn triangle_floors() {
        let inst = &corpus(VerifyLevel::Fast)[0];
        let (a, b, checked) = exact_floors(inst).unwrap();
        // 27 colorings, 6 proper
        assert_eq!(a.states, 21);
        assert_eq!(a.violations + b.violations, 0);
        assert_eq!(checked, a.pairs);
    }

    #[test]
    fn critical_value_three_dof() {
        let c = ChiSquared::new(3.0)
            .unwrap()
            .inverse_cdf(1.0 - CHI_SQUARE_ALPHA);
        assert!((c - 16.266).abs() < 1e-3, "{c}");
    }
}
