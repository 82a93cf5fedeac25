//! Concrete synchronous simulation: the ground truth for every verification result.

use crate::model::eval::{EvalError, ValueEnv};
use crate::model::expr::{lit, var};
use crate::model::network::{NetworkInstance, TRANSFER_VAR};
use crate::model::Value;
use crate::temporal::{globally, until, Annotation, TemporalOp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("network is not closed: {0}")]
    NotClosed(String),
    #[error("simulation did not converge within {0} steps")]
    NotConverged(u64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Per-node routes indexed by time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationTrace {
    pub nodes: Vec<String>,
    pub states: BTreeMap<String, Vec<Value>>,
    /// First time `k` from which the state never changes again.
    pub converged_at: Option<u64>,
    /// Last recorded time.
    pub horizon: u64,
}

impl SimulationTrace {
    pub fn state(&self, node: &str, t: u64) -> &Value {
        &self.states[node][t as usize]
    }

    /// Route of `node` at any time `t`, extrapolating past the horizon once converged.
    pub fn state_at(&self, node: &str, t: u64) -> Option<&Value> {
        let seq = &self.states[node];
        match self.converged_at {
            Some(k) if t > k => Some(&seq[k as usize]),
            _ => seq.get(t as usize),
        }
    }

    /// The final recorded state of every node.
    pub fn final_state(&self) -> BTreeMap<String, Value> {
        self.states
            .iter()
            .map(|(v, seq)| (v.clone(), seq.last().unwrap().clone()))
            .collect()
    }

    /// Time × node table of rendered routes.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<Vec<String>> = vec![std::iter::once("time".to_string())
            .chain(self.nodes.iter().cloned())
            .collect()];
        for t in 0..=self.horizon {
            let mut row = vec![t.to_string()];
            for v in &self.nodes {
                row.push(self.state(v, t).to_string());
            }
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    line.push_str("  ");
                }
                line.push_str(cell);
                let pad = widths[c] - cell.chars().count();
                line.extend(std::iter::repeat_n(' ', pad));
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        match self.converged_at {
            Some(k) => {
                let _ = writeln!(out, "converged at t={k}");
            }
            None => {
                let _ = writeln!(out, "not converged by t={}", self.horizon);
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Json<'a> {
            nodes: &'a [String],
            converged_at: Option<u64>,
            horizon: u64,
            rows: Vec<Vec<String>>,
        }
        let rows = (0..=self.horizon)
            .map(|t| self.nodes.iter().map(|v| self.state(v, t).to_string()).collect())
            .collect();
        serde_json::to_value(Json {
            nodes: &self.nodes,
            converged_at: self.converged_at,
            horizon: self.horizon,
            rows,
        })
        .expect("trace serializes")
    }
}

fn require_closed(n: &NetworkInstance) -> Result<(), SimError> {
    if let Some(s) = n.symbolics.first() {
        return Err(SimError::NotClosed(format!("symbolic variable `{}`", s.name)));
    }
    for (v, e) in &n.init {
        if let Some(x) = e.free_vars().into_iter().next() {
            return Err(SimError::NotClosed(format!("initial route of {v} mentions `{x}`")));
        }
    }
    Ok(())
}

/// Runs the synchronous semantics on a closed network for at most `max_steps`
/// steps. When the state at `k + 1` equals the state at `k`, the trace stops
/// after recording `k + 1`.
pub fn simulate(n: &NetworkInstance, max_steps: u64) -> Result<SimulationTrace, SimError> {
    require_closed(n)?;
    simulate_assigned(n, &ValueEnv::new(), max_steps)
}

/// Simulates an open network under a concrete assignment of its symbolic variables.
pub fn simulate_assigned(
    n: &NetworkInstance,
    symbolics: &ValueEnv,
    max_steps: u64,
) -> Result<SimulationTrace, SimError> {
    delayed_simulate_with(n, symbolics, 0, max_steps, |_, _, t| t)
}

/// Simulation where every edge may deliver any of the sender's routes from the
/// last `delay + 1` steps, chosen by a seeded schedule.
pub fn delayed_simulate(
    n: &NetworkInstance,
    delay: u64,
    seed: u64,
    max_steps: u64,
) -> Result<SimulationTrace, SimError> {
    require_closed(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    delayed_simulate_with(n, &ValueEnv::new(), delay, max_steps, |_, lo, hi| {
        rng.gen_range(lo..=hi)
    })
}

/// Delayed simulation with an explicit schedule: `choose((u, v), lo, hi)` picks
/// which of `u`'s states from times `lo..=hi` reaches `v` at step `hi + 1`.
///
/// Convergence at `k` requires `delay + 2` consecutive equal states starting at
/// `k`, after which no schedule can change any route.
pub fn delayed_simulate_with(
    n: &NetworkInstance,
    symbolics: &ValueEnv,
    delay: u64,
    max_steps: u64,
    mut choose: impl FnMut((&str, &str), u64, u64) -> u64,
) -> Result<SimulationTrace, SimError> {
    let nodes = n.topology.nodes().to_vec();
    let mut init = Vec::with_capacity(nodes.len());
    for v in &nodes {
        init.push(n.eval_init(v, symbolics)?);
    }
    let mut history: Vec<Vec<Value>> = vec![init.clone()];
    let mut run = 1u64;
    let mut converged_at = None;
    for t in 0..max_steps {
        let lo = t.saturating_sub(delay);
        let mut next = Vec::with_capacity(nodes.len());
        for (i, v) in nodes.iter().enumerate() {
            let mut acc = init[i].clone();
            for u in n.topology.preds(v) {
                let ui = n.topology.index_of(u).expect("validated edge");
                let when = choose((u, v), lo, t).clamp(lo, t);
                let sent = n.eval_transfer(u, v, &history[when as usize][ui], symbolics)?;
                acc = n.eval_merge(&acc, &sent, symbolics)?;
            }
            next.push(acc);
        }
        run = if next == history[t as usize] { run + 1 } else { 1 };
        history.push(next);
        if run >= delay + 2 {
            converged_at = Some(t + 1 - (delay + 1));
            break;
        }
    }
    let horizon = (history.len() - 1) as u64;
    let mut states = BTreeMap::new();
    for (i, v) in nodes.iter().enumerate() {
        states.insert(v.clone(), history.iter().map(|row| row[i].clone()).collect());
    }
    Ok(SimulationTrace {
        nodes,
        states,
        converged_at,
        horizon,
    })
}

/// The interface `A(v)(t) = {σ(v)(t)}` of a converged trace, with runs of equal
/// states collapsed into one `Until` segment each.
pub fn singleton_interface(trace: &SimulationTrace) -> Result<Annotation, SimError> {
    let k = trace
        .converged_at
        .ok_or(SimError::NotConverged(trace.horizon))?;
    let mut a = Annotation::new();
    for v in &trace.nodes {
        let seq = &trace.states[v][..=k as usize];
        a.set(v.clone(), singleton_op(seq));
    }
    Ok(a)
}

fn is(route: &Value) -> crate::model::Expr {
    var(TRANSFER_VAR).eq(lit(route.clone()))
}

fn singleton_op(seq: &[Value]) -> TemporalOp {
    let last = seq.last().expect("nonempty trace");
    let mut start = seq.len() - 1;
    while start > 0 && &seq[start - 1] == last {
        start -= 1;
    }
    let mut op = globally(is(last));
    let mut end = start;
    while end > 0 {
        let value = &seq[end - 1];
        let mut begin = end - 1;
        while begin > 0 && &seq[begin - 1] == value {
            begin -= 1;
        }
        op = until(is(value), end as u64, op);
        end = begin;
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::*;
    use crate::model::network::Topology;
    use crate::model::Sort;

    fn line3() -> NetworkInstance {
        let topo = Topology::new(["a", "b", "c"], [("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")]);
        let route = Sort::option(Sort::Int);
        let mut init = BTreeMap::new();
        init.insert("a".to_string(), some(int(0)));
        init.insert("b".to_string(), none(Sort::Int));
        init.insert("c".to_string(), none(Sort::Int));
        let hop = case(var("s"), none(Sort::Int), "x", some(var("x").add(int(1))));
        let transfer = topo
            .edges()
            .iter()
            .map(|e| (e.clone(), hop.clone()))
            .collect();
        let merge = case(
            var("s1"),
            var("s2"),
            "a",
            case(var("s2"), var("s1"), "b", ite(var("b").lt(var("a")), var("s2"), var("s1"))),
        );
        NetworkInstance {
            topology: topo,
            route_sort: route,
            init,
            transfer,
            merge,
            symbolics: vec![],
        }
    }

    #[test]
    fn line_reaches_distance_two_at_t2() {
        let tr = simulate(&line3(), 10).unwrap();
        assert!(tr.state("c", 1).is_none());
        assert_eq!(tr.state("c", 2), &Value::some(Value::int(2)));
        assert_eq!(tr.converged_at, Some(2));
        assert_eq!(tr.horizon, 3);
    }

    #[test]
    fn delay_zero_matches_simulate() {
        let n = line3();
        for seed in 0..5 {
            assert_eq!(delayed_simulate(&n, 0, seed, 10).unwrap(), simulate(&n, 10).unwrap());
        }
    }

    #[test]
    fn singleton_collapses_runs() {
        let r = Value::some(Value::int(3));
        let z = Value::none(Sort::Int);
        let op = singleton_op(&[z.clone(), z.clone(), z.clone(), r.clone()]);
        assert_eq!(op, until(is(&z), 3, globally(is(&r))));
        let op = singleton_op(std::slice::from_ref(&r));
        assert_eq!(op, globally(is(&r)));
    }

    #[test]
    fn open_networks_are_rejected() {
        let mut n = line3();
        n.init.insert("a".into(), var("x"));
        assert!(matches!(simulate(&n, 3), Err(SimError::NotClosed(_))));
    }
}
