//! Convergence time as a function of graph size, next to the bounds.

use colorgame_core::{frugal_bounds, generate, greedy_bound, GraphKind, Strategy};
use serde::Serialize;

use crate::campaign::{run_trials, tau_stats, KRule, GREEDY_DELTA};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub family: GraphKind,
    pub ns: Vec<usize>,
    /// Expected degree for Erdős–Rényi graphs, `p = avg_degree / n` capped at 1.
    pub avg_degree: f64,
    pub strategy: Strategy,
    pub k_rule: KRule,
    pub trials: u64,
    pub base_seed: u64,
    pub max_rounds: u64,
}

impl SweepSpec {
    pub fn new(ns: Vec<usize>) -> Self {
        SweepSpec {
            family: GraphKind::ErdosRenyi,
            ns,
            avg_degree: 8.0,
            strategy: Strategy::Frugal,
            k_rule: KRule::DeltaPlus1,
            trials: 100,
            base_seed: 0,
            max_rounds: colorgame_core::DEFAULT_MAX_ROUNDS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub edges: usize,
    pub delta: usize,
    pub k: usize,
    pub trials: u64,
    pub timeouts: u64,
    pub mean_tau: Option<f64>,
    pub median_tau: Option<f64>,
    pub q95_tau: Option<u64>,
    pub max_tau: Option<u64>,
    pub e_t_bound: f64,
    pub greedy_bound: f64,
}

/// One row per size; the graph for size `n` is seeded with `base_seed + n`
/// and its trials with `base_seed + i`.
pub fn scaling_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<Vec<SweepRow>> {
    if spec.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let mut rows = Vec::with_capacity(spec.ns.len());
    for &n in &spec.ns {
        let p =
            (spec.family == GraphKind::ErdosRenyi).then(|| (spec.avg_degree / n as f64).min(1.0));
        let g = generate(
            spec.family,
            n,
            p,
            Some(spec.base_seed.wrapping_add(n as u64)),
        )?;
        let k = spec.k_rule.resolve(g.max_degree());
        let cfg = colorgame_core::GameConfig::new(k, spec.strategy, spec.base_seed)
            .with_max_rounds(spec.max_rounds);
        cfg.validate(&g)?;
        let st = tau_stats(&run_trials(&g, &cfg, spec.trials, spec.base_seed, jobs)?);
        rows.push(SweepRow {
            n,
            edges: g.edge_count(),
            delta: g.max_degree(),
            k,
            trials: spec.trials,
            timeouts: st.timeouts,
            mean_tau: st.mean,
            median_tau: st.median,
            q95_tau: st.q95,
            max_tau: st.max,
            e_t_bound: frugal_bounds(n as u64)?.e_t_bound,
            greedy_bound: greedy_bound(n as u64, GREEDY_DELTA)?,
        });
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record([
        "n",
        "edges",
        "delta",
        "k",
        "trials",
        "timeouts",
        "mean_tau",
        "median_tau",
        "q95_tau",
        "max_tau",
        "e_t_bound",
        "greedy_bound",
    ])?;
    for r in rows {
        w.serialize(r)?;
    }
    crate::finish_csv(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_size_list_gives_header_only() {
        let rows = scaling_sweep(&SweepSpec::new(vec![]), Some(1)).unwrap();
        assert!(rows.is_empty());
        let csv = String::from_utf8(sweep_csv(&rows).unwrap()).unwrap();
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("n,edges,delta,k,"));
    }

    #[test]
    fn rows_follow_sizes() {
        let mut s = SweepSpec::new(vec![10, 40]);
        s.trials = 10;
        let rows = scaling_sweep(&s, Some(2)).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), [10, 40]);
        assert!(rows.iter().all(|r| r.k == r.delta + 1 && r.timeouts == 0));
        assert!(rows[0].e_t_bound < rows[1].e_t_bound);
    }
}
