use std::fs;

use colorgame::campaign::{ExperimentSpec, GraphSource, KRule};
use colorgame::run_campaign;
use colorgame::sweep::{scaling_sweep, SweepSpec};
use colorgame_core::{GraphKind, Retention, Strategy};

fn generated(kind: GraphKind, n: usize, p: Option<f64>) -> GraphSource {
    GraphSource::Generated {
        kind,
        n,
        p,
        seed: Some(17),
    }
}

fn spec(source: GraphSource, strategy: Strategy, trials: u64) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(source, strategy);
    s.trials = trials;
    s.base_seed = 1000;
    s.max_rounds = 10_000;
    s
}

#[test]
fn same_spec_gives_identical_csv_bytes() {
    let s = spec(
        generated(GraphKind::ErdosRenyi, 300, Some(0.03)),
        Strategy::Frugal,
        200,
    );
    let a = run_campaign(&s, Some(4)).unwrap();
    let b = run_campaign(&s, Some(4)).unwrap();
    assert_eq!(a.trials_csv().unwrap(), b.trials_csv().unwrap());
    assert_eq!(a.summary.spec_hash, b.summary.spec_hash);
}

#[test]
fn parallel_matches_sequential() {
    let mut s = spec(generated(GraphKind::Cycle, 50, None), Strategy::Greedy, 300);
    s.retention = Retention::Full;
    let seq = run_campaign(&s, Some(1)).unwrap();
    let par = run_campaign(&s, Some(8)).unwrap();
    assert_eq!(seq.trials, par.trials);
    assert_eq!(seq.rounds_csv().unwrap(), par.rounds_csv().unwrap());
    let mut a = seq.summary.clone();
    a.wall_time_s = par.summary.wall_time_s;
    assert_eq!(a, par.summary);
}

#[test]
fn edgeless_graph_converges_at_round_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edgeless.txt");
    fs::write(&path, "10 0\n").unwrap();
    for strategy in [Strategy::Greedy, Strategy::Frugal] {
        let c = run_campaign(&spec(GraphSource::File(path.clone()), strategy, 100), None).unwrap();
        assert_eq!(c.summary.mean_tau, Some(1.0));
        assert_eq!(c.summary.max_tau, Some(1));
        assert_eq!(c.summary.timeouts, 0);
    }
}

#[test]
fn triangle_at_delta_plus_one_never_times_out() {
    let c = run_campaign(
        &spec(
            generated(GraphKind::Complete, 3, None),
            Strategy::Frugal,
            10_000,
        ),
        None,
    )
    .unwrap();
    assert_eq!(c.summary.k, 3);
    assert_eq!(c.summary.timeouts, 0);
    assert_eq!(c.summary.converged, 10_000);
}

#[test]
fn outputs_are_written_with_stable_schema() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(generated(GraphKind::Path, 6, None), Strategy::Frugal, 5);
    s.retention = Retention::Full;
    let c = run_campaign(&s, Some(2)).unwrap();
    c.write_to(dir.path()).unwrap();

    let trials = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    let mut lines = trials.lines();
    assert_eq!(lines.next(), Some("trial,seed,tau,timeout,rounds_run"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[..2], ["0", "1000"]);
    assert_eq!(
        first[2], first[4],
        "tau equals rounds run for a converged trial"
    );

    let rounds = fs::read_to_string(dir.path().join("rounds.csv")).unwrap();
    assert!(rounds.starts_with("trial,round,unhappy\n"));
    let expected: u64 = c.trials.iter().map(|t| t.rounds_run).sum();
    assert_eq!(rounds.lines().count() as u64, expected + 1);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["trials"], 5);
    assert_eq!(summary["spec_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn timeouts_are_data_not_errors() {
    let mut s = spec(
        generated(GraphKind::Complete, 3, None),
        Strategy::Greedy,
        50,
    );
    s.k_rule = KRule::DeltaPlus1;
    s.allow_illegal_k = true;
    s.max_rounds = 100;
    let c = run_campaign(&s, Some(2)).unwrap();
    assert_eq!(c.summary.converged + c.summary.timeouts, 50);
    assert!(c.summary.timeouts > 0);
    let csv = String::from_utf8(c.trials_csv().unwrap()).unwrap();
    assert!(csv.lines().any(|l| l.ends_with(",,true,100")));
}

#[test]
fn labelled_edge_lists_report_their_labels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.txt");
    fs::write(&path, "# routers\n3 2\nr1 r2\nr2 r3\n").unwrap();
    let c = run_campaign(&spec(GraphSource::File(path), Strategy::Frugal, 10), None).unwrap();
    assert_eq!(
        c.summary.vertex_labels.as_deref().unwrap(),
        ["r1", "r2", "r3"]
    );
    assert_eq!(c.summary.delta, 2);
}

#[test]
fn sweep_means_grow_slowly_and_stay_under_the_bound() {
    let mut s = SweepSpec::new(vec![64, 256, 1024, 4096]);
    s.trials = 200;
    s.base_seed = 3;
    s.max_rounds = 10_000;
    let rows = scaling_sweep(&s, None).unwrap();
    let means: Vec<f64> = rows.iter().map(|r| r.mean_tau.unwrap()).collect();
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
    assert!(rows.iter().all(|r| r.mean_tau.unwrap() <= r.e_t_bound));
    assert!(rows.iter().all(|r| r.timeouts == 0 && r.k == r.delta + 1));
}

#[test]
fn two_vertex_sweep() {
    let mut s = SweepSpec::new(vec![2]);
    s.family = GraphKind::Complete;
    s.trials = 100;
    let rows = scaling_sweep(&s, Some(1)).unwrap();
    assert_eq!(rows[0].k, 2);
    assert!(rows[0].mean_tau.unwrap() >= 1.0);
}
