//! Monte Carlo campaigns: many independent trials of one configuration.
//!
//! Trial `i` is seeded with `base_seed + i`, so results do not depend on
//! the number of worker threads or on scheduling.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use colorgame_core::{
    frugal_bounds, generate, greedy_bound, is_proper, run, GameConfig, Graph, GraphKind, Retention,
    Strategy, DEFAULT_MAX_ROUNDS,
};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::edgelist::{read_edge_list, write_edge_list};
use crate::stats;
use crate::{Error, Result};

/// Failure probability used for the Greedy bound column.
pub const GREEDY_DELTA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    Generated {
        kind: GraphKind,
        n: usize,
        p: Option<f64>,
        /// Seed for random families; defaults to the campaign seed.
        seed: Option<u64>,
    },
}

impl GraphSource {
    /// Loads or generates the graph, with vertex labels for files that use them.
    pub fn resolve(&self, default_seed: u64) -> Result<(Graph, Option<Vec<String>>)> {
        match self {
            GraphSource::File(path) => {
                let e = read_edge_list(path)?;
                Ok((e.graph, e.labels))
            }
            GraphSource::Generated { kind, n, p, seed } => Ok((
                generate(*kind, *n, *p, Some(seed.unwrap_or(default_seed)))?,
                None,
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KRule {
    DeltaPlus1,
    DeltaPlus2,
    Explicit(usize),
}

impl KRule {
    pub fn resolve(self, max_degree: usize) -> usize {
        match self {
            KRule::DeltaPlus1 => max_degree + 1,
            KRule::DeltaPlus2 => max_degree + 2,
            KRule::Explicit(k) => k,
        }
    }

    /// The smallest palette with a convergence guarantee for `strategy`.
    pub fn minimal(strategy: Strategy) -> Self {
        match strategy {
            Strategy::Greedy => KRule::DeltaPlus2,
            Strategy::Frugal => KRule::DeltaPlus1,
        }
    }
}

impl FromStr for KRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace(['_', ' '], "").as_str() {
            "delta+1" | "d+1" => Ok(KRule::DeltaPlus1),
            "delta+2" | "d+2" => Ok(KRule::DeltaPlus2),
            other => other
                .parse()
                .map(KRule::Explicit)
                .map_err(|_| format!("unknown k rule `{s}` (delta+1, delta+2 or a number)")),
        }
    }
}

impl std::fmt::Display for KRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KRule::DeltaPlus1 => f.write_str("delta+1"),
            KRule::DeltaPlus2 => f.write_str("delta+2"),
            KRule::Explicit(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub graph: GraphSource,
    pub k_rule: KRule,
    pub strategy: Strategy,
    pub trials: u64,
    pub base_seed: u64,
    pub max_rounds: u64,
    pub retention: Retention,
    /// Run below the strategy's palette bound instead of refusing.
    pub allow_illegal_k: bool,
    /// Directory for `trials.csv`, `summary.json` and `rounds.csv`.
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(graph: GraphSource, strategy: Strategy) -> Self {
        ExperimentSpec {
            graph,
            k_rule: KRule::minimal(strategy),
            strategy,
            trials: 100,
            base_seed: 0,
            max_rounds: DEFAULT_MAX_ROUNDS,
            retention: Retention::Counts,
            allow_illegal_k: false,
            out: None,
        }
    }

    /// Everything that determines the results, one `key=value` per line.
    /// The output location is left out.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        match &self.graph {
            GraphSource::File(p) => writeln!(s, "graph=file:{}", p.display()).unwrap(),
            GraphSource::Generated { kind, n, p, seed } => {
                writeln!(s, "family={kind}\nn={n}").unwrap();
                if let Some(p) = p {
                    writeln!(s, "p={p:?}").unwrap();
                }
                if *kind == GraphKind::ErdosRenyi {
                    writeln!(s, "graph_seed={}", seed.unwrap_or(self.base_seed)).unwrap();
                }
            }
        }
        let retention = match self.retention {
            Retention::Full => "full",
            Retention::Counts => "counts",
        };
        write!(
            s,
            "k_rule={}\nstrategy={}\ntrials={}\nseed={}\nmax_rounds={}\nretention={}\nallow_illegal_k={}\n",
            self.k_rule,
            self.strategy,
            self.trials,
            self.base_seed,
            self.max_rounds,
            retention,
            self.allow_illegal_k
        )
        .unwrap();
        s
    }

    /// The per-trial template; `seed` is overwritten for each trial.
    pub fn game_config(&self, g: &Graph) -> Result<GameConfig> {
        let k = self.k_rule.resolve(g.max_degree());
        let mut cfg = GameConfig::new(k, self.strategy, self.base_seed)
            .with_max_rounds(self.max_rounds)
            .with_retention(self.retention);
        if self.allow_illegal_k {
            cfg = cfg.without_k_bound();
        }
        cfg.validate(g)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRow {
    pub trial: u64,
    pub seed: u64,
    pub tau: Option<u64>,
    pub timeout: bool,
    pub rounds_run: u64,
    #[serde(skip)]
    pub final_unhappy: usize,
    #[serde(skip)]
    pub unhappy_counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub n: usize,
    pub edges: usize,
    pub delta: usize,
    pub k: usize,
    pub strategy: String,
    pub trials: u64,
    pub converged: u64,
    pub timeouts: u64,
    /// Statistics over converged trials only; `null` when none converged.
    pub mean_tau: Option<f64>,
    pub median_tau: Option<f64>,
    pub q95_tau: Option<u64>,
    pub max_tau: Option<u64>,
    pub mean_final_unhappy_on_timeout: Option<f64>,
    pub e_t_bound: f64,
    pub greedy_bound: f64,
    pub wall_time_s: f64,
    pub spec_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub summary: CampaignSummary,
    pub trials: Vec<TrialRow>,
}

/// Runs `trials` games of `template` with seeds `base_seed + i` on `jobs`
/// threads (all cores when `None`). Output order is trial order.
///
/// Every converged trial's final coloring is re-checked for properness.
pub fn run_trials(
    g: &Graph,
    template: &GameConfig,
    trials: u64,
    base_seed: u64,
    jobs: Option<usize>,
) -> Result<Vec<TrialRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let seed = base_seed.wrapping_add(trial);
                let mut cfg = template.clone();
                cfg.seed = seed;
                let r = run(g, &cfg)?;
                if r.tau.is_some() && !is_proper(g, &r.final_state.colors) {
                    return Err(Error::ImproperFinalColoring { trial });
                }
                Ok(TrialRow {
                    trial,
                    seed,
                    tau: r.tau,
                    timeout: r.timed_out(),
                    rounds_run: r.rounds_run(),
                    final_unhappy: r.final_unhappy(),
                    unhappy_counts: (cfg.retention == Retention::Full).then_some(r.unhappy_counts),
                })
            })
            .collect()
    })
}

pub(crate) struct TauStats {
    pub converged: u64,
    pub timeouts: u64,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub q95: Option<u64>,
    pub max: Option<u64>,
    pub mean_final_unhappy_on_timeout: Option<f64>,
}

pub(crate) fn tau_stats(rows: &[TrialRow]) -> TauStats {
    let mut taus: Vec<u64> = rows.iter().filter_map(|r| r.tau).collect();
    taus.sort_unstable();
    let stuck: Vec<u64> = rows
        .iter()
        .filter(|r| r.timeout)
        .map(|r| r.final_unhappy as u64)
        .collect();
    TauStats {
        converged: taus.len() as u64,
        timeouts: stuck.len() as u64,
        mean: stats::mean(&taus),
        median: stats::median(&taus),
        q95: stats::quantile(&taus, 0.95),
        max: taus.last().copied(),
        mean_final_unhappy_on_timeout: stats::mean(&stuck),
    }
}

pub fn run_campaign(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<Campaign> {
    if spec.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let (g, labels) = spec.graph.resolve(spec.base_seed)?;
    let cfg = spec.game_config(&g)?;

    let started = Instant::now();
    let trials = run_trials(&g, &cfg, spec.trials, spec.base_seed, jobs)?;
    let wall_time_s = started.elapsed().as_secs_f64();

    let mut hasher = Sha256::new();
    hasher.update(spec.canonical());
    hasher.update(write_edge_list(&g));
    let spec_hash = hex::encode(hasher.finalize());

    let st = tau_stats(&trials);
    let n = g.n() as u64;
    let summary = CampaignSummary {
        n: g.n(),
        edges: g.edge_count(),
        delta: g.max_degree(),
        k: cfg.k,
        strategy: spec.strategy.to_string(),
        trials: spec.trials,
        converged: st.converged,
        timeouts: st.timeouts,
        mean_tau: st.mean,
        median_tau: st.median,
        q95_tau: st.q95,
        max_tau: st.max,
        mean_final_unhappy_on_timeout: st.mean_final_unhappy_on_timeout,
        e_t_bound: frugal_bounds(n).expect("n > 0").e_t_bound,
        greedy_bound: greedy_bound(n, GREEDY_DELTA).expect("valid delta"),
        wall_time_s,
        spec_hash,
        vertex_labels: labels,
    };
    Ok(Campaign { summary, trials })
}

impl Campaign {
    /// Per-trial CSV: `trial,seed,tau,timeout,rounds_run`, `tau` empty on timeout.
    pub fn trials_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.trials {
            w.serialize(row)?;
        }
        crate::finish_csv(w)
    }

    /// Per-round unhappy counts `trial,round,unhappy`; `None` unless the
    /// campaign kept full history.
    pub fn rounds_csv(&self) -> Result<Option<Vec<u8>>> {
        if self.trials.iter().any(|t| t.unhappy_counts.is_none()) {
            return Ok(None);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "round", "unhappy"])?;
        for t in &self.trials {
            for (i, c) in t.unhappy_counts.iter().flatten().enumerate() {
                w.write_record([t.trial.to_string(), (i + 1).to_string(), c.to_string()])?;
            }
        }
        Ok(Some(crate::finish_csv(w)?))
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }

    /// Writes `trials.csv`, `summary.json` and, with full retention, `rounds.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, bytes: &[u8]| {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(path, e))
        };
        put("trials.csv", &self.trials_csv()?)?;
        put("summary.json", self.summary_json().as_bytes())?;
        if let Some(rounds) = self.rounds_csv()? {
            put("rounds.csv", &rounds)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: GraphKind, n: usize) -> ExperimentSpec {
        let mut s = ExperimentSpec::new(
            GraphSource::Generated {
                kind,
                n,
                p: None,
                seed: None,
            },
            Strategy::Frugal,
        );
        s.trials = 20;
        s.base_seed = 5;
        s
    }

    #[test]
    fn k_rules() {
        assert_eq!("delta+1".parse::<KRule>().unwrap(), KRule::DeltaPlus1);
        assert_eq!("Delta+2".parse::<KRule>().unwrap(), KRule::DeltaPlus2);
        assert_eq!("7".parse::<KRule>().unwrap(), KRule::Explicit(7));
        assert!("delta".parse::<KRule>().is_err());
        assert_eq!(KRule::DeltaPlus2.resolve(3), 5);
    }

    #[test]
    fn summary_counts() {
        let c = run_campaign(&spec(GraphKind::Cycle, 10), Some(2)).unwrap();
        assert_eq!(c.summary.k, 3);
        assert_eq!(c.summary.converged + c.summary.timeouts, 20);
        assert_eq!(c.trials[3].seed, 8);
        assert!(c.summary.mean_tau.unwrap() >= 1.0);
        assert_eq!(c.summary.spec_hash.len(), 64);
    }

    #[test]
    fn illegal_k_is_refused_unless_allowed() {
        let mut s = spec(GraphKind::Cycle, 6);
        s.k_rule = KRule::Explicit(2);
        assert!(matches!(run_campaign(&s, Some(1)), Err(Error::Engine(_))));
        s.allow_illegal_k = true;
        s.max_rounds = 50;
        let c = run_campaign(&s, Some(1)).unwrap();
        assert_eq!(c.summary.k, 2);
    }

    #[test]
    fn timeouts_report_residual_unhappiness() {
        let mut s = spec(GraphKind::Complete, 3);
        s.strategy = Strategy::Greedy;
        s.k_rule = KRule::Explicit(3);
        s.allow_illegal_k = true;
        s.max_rounds = 30;
        // seeds whose initial coloring is proper converge at once; others
        // fall into the two-cycle and never leave it
        let c = run_campaign(&s, Some(1)).unwrap();
        assert!(c.summary.timeouts > 0);
        assert!(c.summary.mean_final_unhappy_on_timeout.unwrap() >= 2.0);
        assert!(c
            .trials
            .iter()
            .filter(|t| t.timeout)
            .all(|t| t.rounds_run == 30));
    }

    #[test]
    fn canonical_form_changes_with_results_inputs_only() {
        let a = spec(GraphKind::Path, 4);
        let mut b = a.clone();
        b.out = Some("elsewhere".into());
        assert_eq!(a.canonical(), b.canonical());
        b.trials += 1;
        assert_ne!(a.canonical(), b.canonical());
    }
}
