//! Seeded random closed networks with hop-count-style policies, and candidate
//! interfaces derived from their simulations.

use super::{has_route, lexicographic, map_route, option_merge};
use crate::model::expr::{self, lit, var, Expr};
use crate::model::network::{NetworkInstance, Topology, TRANSFER_VAR};
use crate::model::{Sort, Value};
use crate::sim::SimulationTrace;
use crate::temporal::{and_op, finally, globally, or_op, until, Annotation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn record_sort() -> Sort {
    Sort::record([("lp", Sort::BitVec(8)), ("len", Sort::Int)])
}

/// `Option<⟨lp: bv8, len: Int⟩>`
pub fn route_sort() -> Sort {
    Sort::option(record_sort())
}

pub fn route(lp: u128, len: u64) -> Value {
    Value::some(Value::record([("lp", Value::bv(8, lp)), ("len", Value::int(len))]))
}

fn longer(r: Expr) -> Expr {
    let len = r.clone().get("len").add(expr::int(1));
    r.with("len", len)
}

/// One of: pass with one more hop, drop everything, or drop routes of at
/// least `limit` hops.
fn random_transfer(rng: &mut impl Rng) -> Expr {
    match rng.gen_range(0..6) {
        0 => expr::none(record_sort()),
        1 | 2 => {
            let limit = rng.gen_range(1..5);
            expr::case(
                var(TRANSFER_VAR),
                expr::none(record_sort()),
                "r",
                expr::ite(
                    var("r").get("len").lt(expr::int(limit)),
                    expr::some(longer(var("r"))),
                    expr::none(record_sort()),
                ),
            )
        }
        _ => map_route(longer),
    }
}

/// A closed network of 2 to `max_nodes` nodes. One or two origins announce a
/// route with local preference 100 or 200; the merge prefers higher local
/// preference, then fewer hops. Local preference is never rewritten, so every
/// run converges.
pub fn random_closed_network(seed: u64, max_nodes: usize) -> NetworkInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(2..=max_nodes.max(2));
    let nodes: Vec<String> = (0..count).map(|i| format!("n{i}")).collect();
    let density = rng.gen_range(0.3..0.8);
    let mut edges = Vec::new();
    for u in &nodes {
        for v in &nodes {
            if u != v && rng.gen_bool(density) {
                edges.push((u.clone(), v.clone()));
            }
        }
    }
    let origins = rng.gen_range(1..=2.min(count));
    let mut shuffled = nodes.clone();
    shuffled.shuffle(&mut rng);
    let mut init = BTreeMap::new();
    for v in &nodes {
        init.insert(v.clone(), lit(Value::none(record_sort())));
    }
    for v in shuffled.iter().take(origins) {
        let lp = if rng.gen_bool(0.5) { 100 } else { 200 };
        init.insert(v.clone(), lit(route(lp, 0)));
    }
    let transfer = edges
        .iter()
        .map(|e| (e.clone(), random_transfer(&mut rng)))
        .collect();
    let merge = option_merge(|y, x| {
        lexicographic(vec![
            (
                x.clone().get("lp").lt(y.clone().get("lp")),
                x.clone().get("lp").eq(y.clone().get("lp")),
            ),
            (
                y.clone().get("len").lt(x.clone().get("len")),
                y.get("len").eq(x.get("len")),
            ),
        ])
    });
    NetworkInstance {
        topology: Topology::new(nodes, edges),
        route_sort: route_sort(),
        init,
        transfer,
        merge,
        symbolics: vec![],
    }
}

/// The first time from which `v` keeps its final route.
pub fn settle_time(trace: &SimulationTrace, v: &str) -> u64 {
    let states = &trace.states[v];
    let last = states.last().expect("non-empty trace");
    let mut t = states.len() - 1;
    while t > 0 && &states[t - 1] == last {
        t -= 1;
    }
    t as u64
}

/// Interfaces that may or may not be inductive: per node, a random pick among
/// `G(⊤)`, the node's final route from its settle time (possibly padded), and
/// the presence of a route from that time.
pub fn candidate_interface(n: &NetworkInstance, trace: &SimulationTrace, seed: u64) -> Annotation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = trace.final_state();
    let mut a = Annotation::new();
    for v in n.topology.nodes() {
        let tau = settle_time(trace, v) + rng.gen_range(0..2);
        let exact = globally(var(TRANSFER_VAR).eq(lit(last[v].clone())));
        let op = match rng.gen_range(0..4) {
            0 => globally(expr::tt()),
            1 => finally(tau, exact),
            2 if !last[v].is_none() => until(expr::tt(), tau, globally(has_route())),
            _ => and_op(finally(tau, exact), globally(expr::tt())),
        };
        a.set(v.clone(), op);
    }
    a
}

/// A property implied by `a`: every other node's operator is widened with `F_τ G(⊤)`.
pub fn weaker_property(a: &Annotation) -> Annotation {
    let mut p = a.clone();
    for (i, (v, op)) in a.by_node.iter().enumerate() {
        if i % 2 == 1 {
            p.set(v.clone(), or_op(op.clone(), finally(op.max_tau(), globally(expr::tt()))));
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_merge_laws, validate_network};
    use crate::sim::simulate;

    #[test]
    fn networks_are_valid_and_converge() {
        for seed in 0..40 {
            let n = random_closed_network(seed, 6);
            assert_eq!(validate_network(&n), vec![]);
            assert!(n.topology.nodes().len() <= 6);
            let trace = simulate(&n, 20).unwrap();
            assert!(trace.converged_at.is_some(), "seed {seed}");
            let a = candidate_interface(&n, &trace, seed);
            assert_eq!(a.validate(&n), vec![]);
        }
        let n = random_closed_network(3, 6);
        assert_eq!(check_merge_laws(&n, 300, 1).unwrap().violation, None);
    }
}
