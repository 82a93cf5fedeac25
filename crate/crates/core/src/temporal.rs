//! Temporal interfaces: per-node predicates over routes, indexed by logical time.

use crate::model::eval::{eval_bool, EvalError, ValueEnv};
use crate::model::expr::{self, Expr};
use crate::model::network::{NetworkInstance, TRANSFER_VAR};
use crate::model::typecheck::{expect_sort, TypeError};
use crate::model::{Sort, Value};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// A set of routes that may change over time. Predicates mention the route as
/// the variable `s`; witness times are absolute.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemporalOp {
    /// `G(φ)`: φ at every time.
    Globally(Expr),
    /// `φ U_τ Q`: φ before τ, then Q.
    Until {
        pred: Expr,
        tau: u64,
        then: Box<TemporalOp>,
    },
    /// `F_τ Q`: anything before τ, then Q.
    Finally { tau: u64, then: Box<TemporalOp> },
    And(Box<TemporalOp>, Box<TemporalOp>),
    Or(Box<TemporalOp>, Box<TemporalOp>),
    Not(Box<TemporalOp>),
}

pub fn globally(pred: Expr) -> TemporalOp {
    TemporalOp::Globally(pred)
}

pub fn until(pred: Expr, tau: u64, then: TemporalOp) -> TemporalOp {
    TemporalOp::Until {
        pred,
        tau,
        then: Box::new(then),
    }
}

pub fn finally(tau: u64, then: TemporalOp) -> TemporalOp {
    TemporalOp::Finally {
        tau,
        then: Box::new(then),
    }
}

pub fn and_op(a: TemporalOp, b: TemporalOp) -> TemporalOp {
    TemporalOp::And(Box::new(a), Box::new(b))
}

pub fn or_op(a: TemporalOp, b: TemporalOp) -> TemporalOp {
    TemporalOp::Or(Box::new(a), Box::new(b))
}

pub fn not_op(a: TemporalOp) -> TemporalOp {
    TemporalOp::Not(Box::new(a))
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TemporalError {
    #[error("operator shape `{0}` has no time-erased form")]
    UnsupportedShape(String),
    #[error("interface uses witness times; only G(...) shapes are time-free")]
    NonGloballyInterface,
    #[error("node {node}: {error}")]
    Sort { node: String, error: TypeError },
    #[error("no temporal operator for node {0}")]
    MissingNode(String),
    #[error("temporal operator for unknown node {0}")]
    UnknownNode(String),
}

impl TemporalOp {
    /// The predicate denoted at concrete time `t`.
    pub fn apply_at(&self, t: u64) -> Expr {
        match self {
            TemporalOp::Globally(p) => p.clone(),
            TemporalOp::Until { pred, tau, then } => {
                if t < *tau {
                    pred.clone()
                } else {
                    then.apply_at(t)
                }
            }
            TemporalOp::Finally { tau, then } => {
                if t < *tau {
                    expr::tt()
                } else {
                    then.apply_at(t)
                }
            }
            TemporalOp::And(a, b) => expr::and([a.apply_at(t), b.apply_at(t)]),
            TemporalOp::Or(a, b) => expr::or([a.apply_at(t), b.apply_at(t)]),
            TemporalOp::Not(a) => a.apply_at(t).not(),
        }
    }

    /// A case analysis over the time variable `time_var` (of sort `Int`) that
    /// agrees with [`apply_at`](Self::apply_at) at every concrete time.
    pub fn lower_symbolic(&self, time_var: &str) -> Expr {
        self.lower_at(&expr::var(time_var))
    }

    /// Like [`lower_symbolic`](Self::lower_symbolic) with an arbitrary `Int` time term.
    pub fn lower_at(&self, time: &Expr) -> Expr {
        let before = |tau: u64| time.clone().lt(expr::int(tau));
        match self {
            TemporalOp::Globally(p) => p.clone(),
            TemporalOp::Until { pred, tau, then } => {
                expr::ite(before(*tau), pred.clone(), then.lower_at(time))
            }
            TemporalOp::Finally { tau, then } => {
                expr::ite(before(*tau), expr::tt(), then.lower_at(time))
            }
            TemporalOp::And(a, b) => expr::and([a.lower_at(time), b.lower_at(time)]),
            TemporalOp::Or(a, b) => expr::or([a.lower_at(time), b.lower_at(time)]),
            TemporalOp::Not(a) => a.lower_at(time).not(),
        }
    }

    /// The eventual predicate, for properties with a single witness time.
    pub fn erase_temporal(&self) -> Result<Expr, TemporalError> {
        match self {
            TemporalOp::Globally(p) => Ok(p.clone()),
            TemporalOp::Until { then, .. } | TemporalOp::Finally { then, .. } => match &**then {
                TemporalOp::Globally(p) => Ok(p.clone()),
                _ => Err(TemporalError::UnsupportedShape(self.to_string())),
            },
            TemporalOp::And(a, b) => Ok(expr::and([a.erase_temporal()?, b.erase_temporal()?])),
            TemporalOp::Or(a, b) => Ok(expr::or([a.erase_temporal()?, b.erase_temporal()?])),
            TemporalOp::Not(_) => Err(TemporalError::UnsupportedShape(self.to_string())),
        }
    }

    /// The time-free predicate of an operator built only from `G` and lifted
    /// connectives.
    pub fn time_free(&self) -> Result<Expr, TemporalError> {
        match self {
            TemporalOp::Globally(p) => Ok(p.clone()),
            TemporalOp::And(a, b) => Ok(expr::and([a.time_free()?, b.time_free()?])),
            TemporalOp::Or(a, b) => Ok(expr::or([a.time_free()?, b.time_free()?])),
            TemporalOp::Not(a) => Ok(a.time_free()?.not()),
            _ => Err(TemporalError::NonGloballyInterface),
        }
    }

    /// Largest witness time, or 0 if there is none.
    pub fn max_tau(&self) -> u64 {
        match self {
            TemporalOp::Globally(_) => 0,
            TemporalOp::Until { tau, then, .. } | TemporalOp::Finally { tau, then } => {
                (*tau).max(then.max_tau())
            }
            TemporalOp::And(a, b) | TemporalOp::Or(a, b) => a.max_tau().max(b.max_tau()),
            TemporalOp::Not(a) => a.max_tau(),
        }
    }

    pub fn predicates(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.collect_preds(&mut out);
        out
    }

    fn collect_preds<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match self {
            TemporalOp::Globally(p) => out.push(p),
            TemporalOp::Until { pred, then, .. } => {
                out.push(pred);
                then.collect_preds(out);
            }
            TemporalOp::Finally { then, .. } => then.collect_preds(out),
            TemporalOp::And(a, b) | TemporalOp::Or(a, b) => {
                a.collect_preds(out);
                b.collect_preds(out);
            }
            TemporalOp::Not(a) => a.collect_preds(out),
        }
    }

    pub fn collect_strings(&self, out: &mut BTreeSet<String>) {
        for p in self.predicates() {
            p.collect_strings(out);
        }
    }

    /// Whether `route` belongs to the denoted set at time `t`.
    pub fn holds_at(&self, t: u64, route: &Value, symbolics: &ValueEnv) -> Result<bool, EvalError> {
        let mut env = symbolics.clone();
        env.insert(TRANSFER_VAR.to_string(), route.clone());
        eval_bool(&self.apply_at(t), &env)
    }

    /// Replaces symbolic variables by concrete values in every predicate.
    pub fn substitute_values(&self, values: &BTreeMap<String, Value>) -> TemporalOp {
        self.map_preds(&|p| p.substitute_values(values))
    }

    pub fn map_preds(&self, f: &dyn Fn(&Expr) -> Expr) -> TemporalOp {
        match self {
            TemporalOp::Globally(p) => TemporalOp::Globally(f(p)),
            TemporalOp::Until { pred, tau, then } => TemporalOp::Until {
                pred: f(pred),
                tau: *tau,
                then: Box::new(then.map_preds(f)),
            },
            TemporalOp::Finally { tau, then } => TemporalOp::Finally {
                tau: *tau,
                then: Box::new(then.map_preds(f)),
            },
            TemporalOp::And(a, b) => and_op(a.map_preds(f), b.map_preds(f)),
            TemporalOp::Or(a, b) => or_op(a.map_preds(f), b.map_preds(f)),
            TemporalOp::Not(a) => not_op(a.map_preds(f)),
        }
    }
}

impl fmt::Display for TemporalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemporalOp::Globally(p) => write!(f, "G{p}"),
            TemporalOp::Until { pred, tau, then } => write!(f, "({pred} U{tau} {then})"),
            TemporalOp::Finally { tau, then } => write!(f, "F{tau} {then}"),
            TemporalOp::And(a, b) => write!(f, "({a} ∩ {b})"),
            TemporalOp::Or(a, b) => write!(f, "({a} ∪ {b})"),
            TemporalOp::Not(a) => write!(f, "¬{a}"),
        }
    }
}

/// One temporal operator per node: used both for interfaces and properties.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub by_node: BTreeMap<String, TemporalOp>,
}

impl Annotation {
    pub fn new() -> Annotation {
        Annotation::default()
    }

    pub fn from_fn(n: &NetworkInstance, f: impl Fn(&str) -> TemporalOp) -> Annotation {
        Annotation {
            by_node: n
                .topology
                .nodes()
                .iter()
                .map(|v| (v.clone(), f(v)))
                .collect(),
        }
    }

    pub fn set(&mut self, node: impl Into<String>, op: TemporalOp) {
        self.by_node.insert(node.into(), op);
    }

    pub fn get(&self, node: &str) -> Option<&TemporalOp> {
        self.by_node.get(node)
    }

    pub fn at(&self, node: &str) -> &TemporalOp {
        &self.by_node[node]
    }

    pub fn max_tau(&self) -> u64 {
        self.by_node.values().map(TemporalOp::max_tau).max().unwrap_or(0)
    }

    pub fn collect_strings(&self, out: &mut BTreeSet<String>) {
        for op in self.by_node.values() {
            op.collect_strings(out);
        }
    }

    pub fn substitute_values(&self, values: &BTreeMap<String, Value>) -> Annotation {
        Annotation {
            by_node: self
                .by_node
                .iter()
                .map(|(v, op)| (v.clone(), op.substitute_values(values)))
                .collect(),
        }
    }

    /// Checks totality over the network's nodes and that every predicate is a
    /// boolean over `s` and the network's symbolic variables.
    pub fn validate(&self, n: &NetworkInstance) -> Vec<TemporalError> {
        let mut out = Vec::new();
        let mut env = n.symbolic_env();
        env.insert(TRANSFER_VAR.to_string(), n.route_sort.clone());
        for v in n.topology.nodes() {
            match self.by_node.get(v) {
                None => out.push(TemporalError::MissingNode(v.clone())),
                Some(op) => {
                    for p in op.predicates() {
                        if let Err(error) = expect_sort(p, &env, &Sort::Bool) {
                            out.push(TemporalError::Sort {
                                node: v.clone(),
                                error,
                            });
                        }
                    }
                }
            }
        }
        for v in self.by_node.keys() {
            if !n.topology.contains(v) {
                out.push(TemporalError::UnknownNode(v.clone()));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eval::eval;
    use crate::model::expr::*;
    use proptest::prelude::*;

    fn phi(i: u8) -> Expr {
        var("s").eq(int(i as u64))
    }

    #[test]
    fn apply_at_examples() {
        let reach = finally(3, globally(var("s").neq(none(Sort::Int))));
        assert_eq!(reach.apply_at(2), tt());
        let v = until(phi(0), 1, globally(phi(1)));
        assert_eq!(v.apply_at(0), phi(0));
        assert_eq!(v.apply_at(1), phi(1));
        let nested = finally(2, until(phi(1), 4, globally(phi(2))));
        assert_eq!(nested.apply_at(0), tt());
        assert_eq!(nested.apply_at(1), tt());
        assert_eq!(nested.apply_at(2), phi(1));
        assert_eq!(nested.apply_at(3), phi(1));
        assert_eq!(nested.apply_at(4), phi(2));
        assert_eq!(nested.apply_at(5), phi(2));
    }

    #[test]
    fn lower_symbolic_examples() {
        assert_eq!(globally(phi(0)).lower_symbolic("t"), phi(0));
        assert_eq!(
            until(phi(0), 1, globally(phi(1))).lower_symbolic("t"),
            ite(var("t").lt(int(1)), phi(0), phi(1))
        );
        let op = and_op(globally(phi(0)), finally(4, globally(phi(1))));
        assert_eq!(
            op.lower_symbolic("t"),
            and([phi(0), ite(var("t").lt(int(4)), tt(), phi(1))])
        );
    }

    #[test]
    fn erase() {
        let p = var("s").neq(none(Sort::Int));
        assert_eq!(globally(p.clone()).erase_temporal(), Ok(p.clone()));
        assert_eq!(finally(4, globally(p.clone())).erase_temporal(), Ok(p.clone()));
        assert!(matches!(
            not_op(globally(p.clone())).erase_temporal(),
            Err(TemporalError::UnsupportedShape(_))
        ));
        assert!(finally(1, until(p.clone(), 3, globally(p))).erase_temporal().is_err());
    }

    fn arb_op() -> impl Strategy<Value = TemporalOp> {
        let leaf = (0u8..4).prop_map(|i| globally(phi(i)));
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (0u8..4, 0u64..6, inner.clone()).prop_map(|(i, tau, q)| until(phi(i), tau, q)),
                (0u64..6, inner.clone()).prop_map(|(tau, q)| finally(tau, q)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| and_op(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| or_op(a, b)),
                inner.prop_map(not_op),
            ]
        })
    }

    fn truth(e: &Expr, route: u64, t: Option<u64>) -> bool {
        let mut env = ValueEnv::from([("s".to_string(), Value::int(route))]);
        if let Some(t) = t {
            env.insert("t".into(), Value::int(t));
        }
        eval(e, &env).unwrap().as_bool().unwrap()
    }

    proptest! {
        #[test]
        fn lowering_is_pointwise(op in arb_op(), route in 0u64..5) {
            for t in 0..=op.max_tau() + 2 {
                prop_assert_eq!(
                    truth(&op.lower_symbolic("t"), route, Some(t)),
                    truth(&op.apply_at(t), route, None)
                );
            }
        }

        #[test]
        fn finally_is_until_true(op in arb_op(), tau in 0u64..6, route in 0u64..5, t in 0u64..10) {
            let f = finally(tau, op.clone());
            let u = until(tt(), tau, op);
            prop_assert_eq!(truth(&f.apply_at(t), route, None), truth(&u.apply_at(t), route, None));
        }

        #[test]
        fn double_negation(op in arb_op(), route in 0u64..5, t in 0u64..10) {
            let nn = not_op(not_op(op.clone()));
            prop_assert_eq!(truth(&nn.apply_at(t), route, None), truth(&op.apply_at(t), route, None));
        }

        #[test]
        fn lifted_ops_are_pointwise(a in arb_op(), b in arb_op(), route in 0u64..5, t in 0u64..10) {
            let (x, y) = (truth(&a.apply_at(t), route, None), truth(&b.apply_at(t), route, None));
            prop_assert_eq!(truth(&and_op(a.clone(), b.clone()).apply_at(t), route, None), x && y);
            prop_assert_eq!(truth(&or_op(a, b).apply_at(t), route, None), x || y);
        }
    }
}
