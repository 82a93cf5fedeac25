//! The concrete evaluator and the solver encoding must agree on every
//! well-sorted expression.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::thread;
use tempnet::model::gen::ExprGen;
use tempnet::model::{eval, sort_check};
use tempnet::smt::{evaluate_pinned, solver::SolverConfig};

const PAIRS_PER_FAMILY: usize = 1000;
const PER_SCRIPT: usize = 100;

#[test]
fn evaluator_and_encoding_agree() {
    let families = ExprGen::families();
    let handles: Vec<_> = families
        .into_iter()
        .enumerate()
        .map(|(fi, (name, sort))| {
            thread::spawn(move || {
                let gen = ExprGen::default();
                let senv = gen.sort_env();
                let mut rng = ChaCha8Rng::seed_from_u64(1000 + fi as u64);
                let cfg = SolverConfig::default();
                let mut checked = 0;
                for batch in 0..PAIRS_PER_FAMILY / PER_SCRIPT {
                    let items: Vec<_> = (0..PER_SCRIPT)
                        .map(|_| (gen.expr(&sort, 4, &mut rng), gen.env(&mut rng)))
                        .collect();
                    let solver = evaluate_pinned(&items, &cfg, &format!("{name}-{batch}"))
                        .unwrap_or_else(|e| panic!("{name}: {e}"));
                    for ((e, env), got) in items.iter().zip(solver) {
                        assert_eq!(sort_check(e, &senv).as_ref(), Ok(&sort));
                        let want = eval(e, env).unwrap();
                        assert_eq!(got, want, "{name}: {e} under {env:?}");
                        checked += 1;
                    }
                }
                checked
            })
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), PAIRS_PER_FAMILY);
    }
}
