//! The exact oracle against a naive recursive enumerator written from the
//! game rules alone (no engine or oracle helpers).

use colorgame_core::oracle::{one_round_support_size, two_round_floor};
use colorgame_core::{
    available_size_distribution, one_round_distribution, two_round_happiness_prob, ColoringState,
    Graph, Strategy, TwoRoundMode, VertexId, Weight,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::strategy::Strategy as _;

type Q = BigRational;

const CAP: u64 = 1_000_000;

fn happy(adj: &[Vec<usize>], c: &[u32], v: usize) -> bool {
    adj[v].iter().all(|&u| c[u] != c[v])
}

fn choices(adj: &[Vec<usize>], c: &[u32], v: usize, frugal: bool, k: u32) -> Vec<u32> {
    if happy(adj, c, v) {
        return vec![c[v]];
    }
    (0..k)
        .filter(|&x| (frugal && x == c[v]) || adj[v].iter().all(|&u| c[u] != x))
        .collect()
}

/// All next colorings with their probabilities, built vertex by vertex.
fn naive_round(adj: &[Vec<usize>], c: &[u32], frugal: bool, k: u32) -> Vec<(Vec<u32>, Q)> {
    let mut out = vec![(Vec::new(), Q::from_integer(BigInt::from(1)))];
    for v in 0..c.len() {
        let opts = choices(adj, c, v, frugal, k);
        let p = Q::new(BigInt::from(1), BigInt::from(opts.len()));
        let mut grown = Vec::with_capacity(out.len() * opts.len());
        for (prefix, q) in &out {
            for &x in &opts {
                let mut next = prefix.clone();
                next.push(x);
                grown.push((next, q * &p));
            }
        }
        out = grown;
    }
    out
}

fn naive_two_round(adj: &[Vec<usize>], c: &[u32], v: usize, frugal: bool, k: u32) -> Q {
    let mut total = Q::from_integer(BigInt::from(0));
    for (mid, p) in naive_round(adj, c, frugal, k) {
        for (end, q) in naive_round(adj, &mid, frugal, k) {
            if happy(adj, &end, v) {
                total += &p * &q;
            }
        }
    }
    total
}

fn adjacency(g: &Graph) -> Vec<Vec<usize>> {
    g.vertices()
        .map(|v| g.neighbors(v).iter().map(|u| u.index()).collect())
        .collect()
}

/// Small graph with a legal palette and an arbitrary coloring.
fn arb_instance() -> impl proptest::strategy::Strategy<Value = (Graph, u32, Vec<u32>, bool)> {
    (2usize..5, any::<bool>(), 0u32..2).prop_flat_map(|(n, frugal, extra)| {
        proptest::collection::vec((0..n, 0..n), 1..(2 * n)).prop_flat_map(move |pairs| {
            let pairs: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
            let g = Graph::from_edge_list(&pairs, n).unwrap();
            let s = if frugal {
                Strategy::Frugal
            } else {
                Strategy::Greedy
            };
            let k = s.min_colors(g.max_degree()) as u32 + extra;
            proptest::collection::vec(0..k, n).prop_map(move |c| (g.clone(), k, c, frugal))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_round_matches_naive((g, k, c, frugal) in arb_instance()) {
        let strategy = if frugal { Strategy::Frugal } else { Strategy::Greedy };
        let s = ColoringState::from_indices(&c, 1);
        let d = one_round_distribution::<Q>(&g, &s, strategy, k as usize, CAP).unwrap();
        prop_assert_eq!(d.total(), Q::from_integer(BigInt::from(1)));
        let naive = naive_round(&adjacency(&g), &c, frugal, k);
        prop_assert_eq!(d.len(), naive.len());
        prop_assert_eq!(one_round_support_size(&g, &s, strategy, k as usize).unwrap(), naive.len() as u128);
        for (next, p) in naive {
            prop_assert_eq!(d.probability(&ColoringState::from_indices(&next, 2)), p);
        }
    }

    #[test]
    fn two_round_matches_naive_and_floor((g, k, c, frugal) in arb_instance()) {
        let strategy = if frugal { Strategy::Frugal } else { Strategy::Greedy };
        let s = ColoringState::from_indices(&c, 1);
        let adj = adjacency(&g);
        let floor: Q = two_round_floor();
        for v in 0..g.n() {
            let vid = VertexId(v as u32);
            let fast = two_round_happiness_prob::<Q>(&g, &s, vid, strategy, k as usize, TwoRoundMode::Shortcut, CAP).unwrap();
            let full = two_round_happiness_prob::<Q>(&g, &s, vid, strategy, k as usize, TwoRoundMode::Full, CAP).unwrap();
            prop_assert_eq!(&fast, &full);
            prop_assert_eq!(&fast, &naive_two_round(&adj, &c, v, frugal, k));
            if frugal {
                prop_assert!(fast >= floor);
            }
        }
    }

    #[test]
    fn available_size_floor_holds((g, k, c, frugal) in arb_instance()) {
        prop_assume!(frugal);
        let s = ColoringState::from_indices(&c, 1);
        for v in g.vertices() {
            if happy(&adjacency(&g), &c, v.index()) {
                continue;
            }
            let law = available_size_distribution::<Q>(&g, &s, v, Strategy::Frugal, k as usize, CAP).unwrap();
            prop_assert_eq!(law.distribution.total(), Q::from_integer(BigInt::from(1)));
            prop_assert!(law.holds());
            let f64_law = available_size_distribution::<f64>(&g, &s, v, Strategy::Frugal, k as usize, CAP).unwrap();
            prop_assert!(f64_law.distribution.is_normalized(1e-12));
            prop_assert!((f64_law.prob_at_least - law.prob_at_least.to_f64()).abs() < 1e-12);
        }
    }
}
