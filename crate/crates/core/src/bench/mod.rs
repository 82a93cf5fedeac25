//! Benchmark networks with their interfaces and properties.

pub mod fattree;
pub mod random;
pub mod running;
pub mod wan;

use crate::model::expr::{self, case, var, Expr};
use crate::model::network::{NetworkInstance, TRANSFER_VAR};
use crate::temporal::Annotation;
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expected {
    Pass,
    Fail,
}

#[derive(Clone, Debug)]
pub struct BenchmarkFixture {
    pub name: String,
    pub network: NetworkInstance,
    pub interfaces: Annotation,
    pub properties: Annotation,
    /// Outcome of the modular check.
    pub expected: Expected,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("fattree size k={0} must be even and at least 2")]
    BadK(usize),
    #[error("destination {0} is not an edge node")]
    NotEdgeNode(String),
    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),
    #[error("unknown running-example fixture `{0}`")]
    UnknownFixture(String),
}

/// Binder used by route predicates for the record inside an option.
pub(crate) const ROUTE_BINDER: &str = "r";

/// A predicate on the optional route `s`: `on_none` for ∅, `f(r)` for a route `r`.
pub fn on_route(on_none: bool, f: impl FnOnce(Expr) -> Expr) -> Expr {
    let none_case = if on_none { expr::tt() } else { expr::ff() };
    case(var(TRANSFER_VAR), none_case, ROUTE_BINDER, f(var(ROUTE_BINDER)))
}

/// `s = ∅`
pub fn is_null() -> Expr {
    on_route(true, |_| expr::ff())
}

/// `s ≠ ∅`
pub fn has_route() -> Expr {
    on_route(false, |_| expr::tt())
}

/// Maps a route-to-route function over the optional route `s`, keeping ∅.
pub(crate) fn map_route(f: impl FnOnce(Expr) -> Expr) -> Expr {
    let inner = f(var(ROUTE_BINDER));
    case(var(TRANSFER_VAR), var(TRANSFER_VAR), ROUTE_BINDER, expr::some(inner))
}

/// Strict lexicographic preference from `(better, tied)` pairs of route comparisons.
pub(crate) fn lexicographic(keys: Vec<(Expr, Expr)>) -> Expr {
    keys.into_iter()
        .rev()
        .fold(expr::ff(), |rest, (better, tied)| {
            expr::or([better, expr::and([tied, rest])])
        })
}

/// Merge that prefers any route over ∅ and otherwise takes `s2` exactly when
/// `prefer(y, x)` holds for the routes `y` in `s2` and `x` in `s1`.
pub(crate) fn option_merge(prefer: impl FnOnce(Expr, Expr) -> Expr) -> Expr {
    use crate::model::network::{MERGE_LHS, MERGE_RHS};
    case(
        var(MERGE_LHS),
        var(MERGE_RHS),
        "x",
        case(
            var(MERGE_RHS),
            var(MERGE_LHS),
            "y",
            expr::ite(prefer(var("y"), var("x")), var(MERGE_RHS), var(MERGE_LHS)),
        ),
    )
}

/// Names accepted by [`by_name`].
pub const BENCHMARKS: &[&str] = &["reach", "length", "vf", "hijack", "wan-bte", "wan-bte-broken"];

/// Builds a named fattree or WAN benchmark. `all_prefix` makes the fattree
/// destination symbolic.
pub fn by_name(name: &str, k: usize, all_prefix: bool) -> Result<BenchmarkFixture, BenchError> {
    use fattree::{Dest, Policy};
    let policy = match name {
        "reach" => Policy::Reach,
        "length" => Policy::Length,
        "vf" => Policy::Vf,
        "hijack" => Policy::Hijack,
        "wan-bte" => return Ok(wan::build_wan_bte()),
        "wan-bte-broken" => return Ok(wan::build_wan_bte_broken()),
        other => return Err(BenchError::UnknownBenchmark(other.to_string())),
    };
    let layout = fattree::fattree(k)?;
    let dest = if all_prefix {
        Dest::Symbolic
    } else {
        Dest::Node(layout.default_dest().to_string())
    };
    fattree::build(policy, &layout, &dest)
}
