use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Duration;
use tempnet::bench::fattree::{self, Tier};
use tempnet::bench::random::random_closed_network;
use tempnet::io;
use tempnet::model::gen::{ExprGen, ValueGen};
use tempnet::model::{eval, sort_check, ValueEnv};
use tempnet::modular::nearest_rank;
use tempnet::sim::simulate;

fn family() -> impl Strategy<Value = usize> {
    0..ExprGen::families().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn values_conform_and_survive_json(seed in any::<u64>(), f in family()) {
        let (_, sort) = &ExprGen::families()[f];
        let gen = ValueGen::new(vec!["A".into(), "B".into(), "D".into()]);
        let v = gen.value(sort, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(v.conforms(sort));
        let back = io::parse_value(&io::value_to_json(&v), sort, "$").unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn generated_exprs_are_well_sorted_and_survive_json(seed in any::<u64>(), f in family()) {
        let (_, sort) = &ExprGen::families()[f];
        let gen = ExprGen::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = gen.expr(sort, 3, &mut rng);
        let inferred = sort_check(&e, &gen.sort_env()).unwrap();
        prop_assert_eq!(&inferred, sort);
        prop_assert_eq!(sort_check(&e, &gen.sort_env()).unwrap(), inferred);
        let env = gen.env(&mut rng);
        prop_assert!(eval(&e, &env).unwrap().conforms(sort));
        prop_assert_eq!(io::parse_expr(&io::expr_to_json(&e), "$").unwrap(), e);
    }

    #[test]
    fn traces_start_at_init_and_stay_converged(seed in any::<u64>()) {
        let n = random_closed_network(seed, 6);
        let trace = simulate(&n, 20).unwrap();
        let nodes = n.topology.nodes();
        for v in nodes {
            prop_assert_eq!(trace.state(v, 0), &eval(n.init_of(v), &ValueEnv::new()).unwrap());
            let mut preds = n.topology.preds(v).to_vec();
            preds.sort();
            prop_assert_eq!(n.topology.preds(v), &preds[..]);
        }
        let k = trace.converged_at.expect("hop-count networks converge");
        for v in nodes {
            for t in k..=trace.horizon {
                prop_assert_eq!(trace.state(v, t), trace.state(v, k));
            }
        }
    }

    #[test]
    fn nearest_rank_matches_sorted_index(
        ms in prop::collection::vec(0u64..1000, 1..50),
        pct in 1usize..=100,
    ) {
        let samples: Vec<Duration> = ms.iter().map(|&m| Duration::from_millis(m)).collect();
        let mut sorted = ms.clone();
        sorted.sort();
        let rank = (pct * sorted.len()).div_ceil(100).max(1);
        prop_assert_eq!(nearest_rank(&samples, pct), Duration::from_millis(sorted[rank - 1]));
    }

    #[test]
    fn fattree_shape(half in 1usize..=5) {
        let k = 2 * half;
        let layout = fattree::fattree(k).unwrap();
        prop_assert_eq!(layout.nodes().len() * 4, 5 * k * k);
        prop_assert_eq!(layout.edges().len(), k * k * k);
        let topo = layout.topology();
        for v in layout.nodes() {
            let tier = layout.tier(v).unwrap();
            let neighbors: Vec<Tier> = topo.preds(v).iter().map(|u| layout.tier(u).unwrap()).collect();
            prop_assert_eq!(topo.succs(v).count(), neighbors.len());
            match tier {
                Tier::Core => {
                    prop_assert_eq!(neighbors.len(), k);
                    let all_aggregation = neighbors.iter().all(|t| matches!(t, Tier::Aggregation { .. }));
                    prop_assert!(all_aggregation);
                }
                Tier::Aggregation { pod } => {
                    let cores = neighbors.iter().filter(|t| **t == Tier::Core).count();
                    let edges = neighbors.iter().filter(|t| **t == Tier::Edge { pod }).count();
                    prop_assert_eq!((cores, edges), (half, half));
                }
                Tier::Edge { pod } => {
                    prop_assert_eq!(neighbors.len(), half);
                    let same_pod = neighbors.iter().all(|t| *t == Tier::Aggregation { pod });
                    prop_assert!(same_pod);
                }
            }
        }
    }
}
