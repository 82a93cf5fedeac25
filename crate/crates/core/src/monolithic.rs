//! Whole-network baseline: one formula over the stable states of every node,
//! checked against the time-erased property.

use crate::model::expr::{self, var, Expr};
use crate::model::network::{NetworkInstance, MERGE_LHS, MERGE_RHS, TRANSFER_VAR};
use crate::model::Value;
use crate::modular::{
    validate_inputs, CheckError, CheckReport, Condition, ConditionResult, Counterexample,
    NodeVerdict, Outcome, Procedure,
};
use crate::smt::solver::SolverConfig;
use crate::smt::{Query, Verdict};
use crate::temporal::Annotation;
use std::collections::BTreeMap;
use std::time::Instant;

/// Name of the single pseudo-node in monolithic reports.
pub const NETWORK_NODE: &str = "network";

pub fn stable_var(v: &str) -> String {
    format!("$r.{v}")
}

/// Fixed-point constraints `r_v = init_v ⊕ T_{u1 v}(r_u1) ⊕ …` for every node.
#[derive(Clone, Debug)]
pub struct StableEncoding {
    /// Node → route variable, one per node.
    pub route_vars: BTreeMap<String, String>,
    /// Declarations, intermediate definitions, assumptions and fixed-point
    /// equations; the goal is left as `true`.
    pub query: Query,
}

impl StableEncoding {
    /// Number of fixed-point equations (one per node).
    pub fn equations(&self) -> usize {
        self.route_vars.len()
    }

    /// Whether a concrete state (node → route) and symbolic assignment satisfy
    /// every fixed-point equation and assumption.
    pub fn satisfied_by(
        &self,
        state: &BTreeMap<String, Value>,
        symbolics: &BTreeMap<String, Value>,
    ) -> Result<bool, crate::model::EvalError> {
        let mut m = symbolics.clone();
        for (v, x) in &self.route_vars {
            if let Some(r) = state.get(v) {
                m.insert(x.clone(), r.clone());
            }
        }
        self.query.hypotheses_hold(&m)
    }
}

pub fn encode_stable(n: &NetworkInstance) -> StableEncoding {
    let mut q = Query::new(expr::tt());
    q.vars = n
        .symbolics
        .iter()
        .map(|s| (s.name.clone(), s.sort.clone()))
        .collect();
    q.alphabet = n.string_alphabet();
    q.hyps = n.assumptions();
    let mut route_vars = BTreeMap::new();
    for v in n.topology.nodes() {
        q.vars.push((stable_var(v), n.route_sort.clone()));
        route_vars.insert(v.clone(), stable_var(v));
    }
    for v in n.topology.nodes() {
        let acc = |i: usize| format!("$a.{v}.{i}");
        q.defs.push((acc(0), n.init_of(v).clone()));
        let preds = n.topology.preds(v);
        for (i, u) in preds.iter().enumerate() {
            let sent = format!("$x.{u}.{v}");
            q.defs.push((
                sent.clone(),
                n.transfer_of(u, v).rename_free(TRANSFER_VAR, &stable_var(u)),
            ));
            q.defs.push((
                acc(i + 1),
                n.merge.rename_many(&[(MERGE_LHS, &acc(i)), (MERGE_RHS, &sent)]),
            ));
        }
        q.hyps.push(var(stable_var(v)).eq(var(acc(preds.len()))));
    }
    StableEncoding { route_vars, query: q }
}

/// The conjunction of every node's erased property over the stable routes.
fn erased_goal(n: &NetworkInstance, p: &Annotation) -> Result<Expr, CheckError> {
    let mut parts = Vec::new();
    for v in n.topology.nodes() {
        let phi = p.at(v).erase_temporal()?;
        parts.push(phi.rename_free(TRANSFER_VAR, &stable_var(v)));
    }
    Ok(expr::and(parts))
}

/// Asks whether every stable state of `n` satisfies the erased property `p`.
/// The report has a single pseudo-node named [`NETWORK_NODE`].
pub fn check_monolithic(
    n: &NetworkInstance,
    p: &Annotation,
    solver: &SolverConfig,
) -> Result<CheckReport, CheckError> {
    validate_inputs(n, &[("property", p)])?;
    let start = Instant::now();
    let enc = encode_stable(n);
    let mut q = enc.query.clone();
    q.goal = erased_goal(n, p)?;
    let outcome = match q.check(solver, NETWORK_NODE) {
        Verdict::Valid => Outcome::Valid,
        Verdict::Unknown(reason) => Outcome::Unknown { reason },
        Verdict::Failure(detail) => Outcome::Failure { detail },
        Verdict::Counterexample(model) => match q.falsified_by(&model) {
            Ok(true) => Outcome::Counterexample(Counterexample {
                time: None,
                neighbor_time: None,
                routes: enc
                    .route_vars
                    .iter()
                    .map(|(v, x)| (v.clone(), model[x].clone()))
                    .collect(),
                symbolics: n
                    .symbolics
                    .iter()
                    .map(|s| (s.name.clone(), model[&s.name].clone()))
                    .collect(),
                result: None,
            }),
            Ok(false) => Outcome::Failure {
                detail: "solver model does not falsify the stable-state query".into(),
            },
            Err(e) => Outcome::Failure {
                detail: format!("solver model cannot be evaluated: {e}"),
            },
        },
    };
    let wall = start.elapsed();
    let verdict = NodeVerdict {
        node: NETWORK_NODE.to_string(),
        results: vec![ConditionResult {
            condition: Condition::Stable,
            outcome,
            wall,
        }],
    };
    Ok(CheckReport::new(Procedure::Monolithic, 0, vec![verdict], wall))
}
