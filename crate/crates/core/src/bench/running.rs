//! The five-node running example: a WAN node `w` whose route must reach the
//! edge node `e` through `v` and `d`, with an external peer `n` whose routes
//! are filtered at `v`.

use super::{has_route, is_null, lexicographic, map_route, on_route, option_merge};
use super::{BenchError, BenchmarkFixture, Expected};
use crate::model::expr::{self, lit, var, Expr};
use crate::model::network::{NetworkInstance, SymbolicVar, Topology};
use crate::model::{Sort, Value};
use crate::temporal::{and_op, finally, globally, until, Annotation, TemporalOp};
use std::collections::BTreeMap;

pub const NODES: [&str; 5] = ["n", "w", "v", "d", "e"];
pub const EDGES: [(&str, &str); 5] = [("w", "v"), ("n", "v"), ("v", "d"), ("d", "v"), ("d", "e")];

/// Symbolic initial route of `n` in the open variants.
pub const PEER_ROUTE: &str = "n_route";

pub const FIXTURES: &[&str] = &[
    "base",
    "weak-tag",
    "reach",
    "strawperson",
    "bad-temporal",
    "patched",
    "ghost",
];

fn record_sort(ghost: bool) -> Sort {
    let mut fields = vec![
        ("lp", Sort::BitVec(32)),
        ("len", Sort::Int),
        ("tag", Sort::Bool),
    ];
    if ghost {
        fields.push(("fromw", Sort::Bool));
    }
    Sort::record(fields)
}

/// `Option<⟨lp, len, tag⟩>`, with a `fromw` field in the ghost variant.
pub fn route_sort(ghost: bool) -> Sort {
    Sort::option(record_sort(ghost))
}

/// The route `⟨lp, len, tag⟩`.
pub fn route(lp: u128, len: u64, tag: bool) -> Value {
    Value::some(Value::record([
        ("lp", Value::bv(32, lp)),
        ("len", Value::int(len)),
        ("tag", Value::Bool(tag)),
    ]))
}

pub fn ghost_route(lp: u128, len: u64, tag: bool, fromw: bool) -> Value {
    Value::some(Value::record([
        ("lp", Value::bv(32, lp)),
        ("len", Value::int(len)),
        ("tag", Value::Bool(tag)),
        ("fromw", Value::Bool(fromw)),
    ]))
}

pub fn null(ghost: bool) -> Value {
    Value::none(record_sort(ghost))
}

fn longer(r: Expr) -> Expr {
    let len = r.clone().get("len").add(expr::int(1));
    r.with("len", len)
}

fn build(ghost: bool, peer: Option<SymbolicVar>) -> NetworkInstance {
    let sort = route_sort(ghost);
    let none = expr::none(record_sort(ghost));
    let w_init = if ghost {
        ghost_route(100, 0, false, true)
    } else {
        route(100, 0, false)
    };
    let mut init = BTreeMap::new();
    for v in NODES {
        init.insert(v.to_string(), lit(null(ghost)));
    }
    init.insert("w".to_string(), lit(w_init));
    let mut symbolics = Vec::new();
    if let Some(p) = peer {
        init.insert("n".to_string(), var(&p.name));
        symbolics.push(p);
    }

    let mut transfer = BTreeMap::new();
    let plain = map_route(longer);
    transfer.insert(
        ("w".into(), "v".into()),
        map_route(|r| longer(r).with("tag", expr::tt())),
    );
    transfer.insert(("n".into(), "v".into()), none.clone());
    transfer.insert(("v".into(), "d".into()), plain.clone());
    transfer.insert(("d".into(), "v".into()), plain);
    transfer.insert(
        ("d".into(), "e".into()),
        expr::case(
            var("s"),
            none.clone(),
            "r",
            expr::ite(var("r").get("tag"), expr::some(longer(var("r"))), none),
        ),
    );

    // Local preference, then path length. The tag (and ghost) fields only
    // break ties, so that the merge is commutative and associative.
    let merge = option_merge(|y, x| {
        let mut keys = vec![
            (
                x.clone().get("lp").lt(y.clone().get("lp")),
                x.clone().get("lp").eq(y.clone().get("lp")),
            ),
            (
                y.clone().get("len").lt(x.clone().get("len")),
                y.clone().get("len").eq(x.clone().get("len")),
            ),
            (
                expr::and([y.clone().get("tag"), x.clone().get("tag").not()]),
                y.clone().get("tag").eq(x.clone().get("tag")),
            ),
        ];
        if ghost {
            keys.push((
                expr::and([y.clone().get("fromw"), x.clone().get("fromw").not()]),
                y.get("fromw").eq(x.get("fromw")),
            ));
        }
        lexicographic(keys)
    });

    NetworkInstance {
        topology: Topology::new(NODES, EDGES),
        route_sort: sort,
        init,
        transfer,
        merge,
        symbolics,
    }
}

/// The closed network: `w` starts with `⟨100,0,false⟩`, every other node with ∅.
pub fn network() -> NetworkInstance {
    build(false, None)
}

/// `n` starts with an arbitrary symbolic route.
pub fn open_network() -> NetworkInstance {
    build(false, Some(SymbolicVar::new(PEER_ROUTE, route_sort(false))))
}

/// Routes carry a `fromw` ghost field; `n` starts with any route not marked as from `w`.
pub fn ghost_network() -> NetworkInstance {
    let assumption = on_route(true, |r| r.get("fromw").not()).rename_free("s", PEER_ROUTE);
    build(
        true,
        Some(SymbolicVar::new(PEER_ROUTE, route_sort(true)).assuming(assumption)),
    )
}

fn lp_is(lp: u128) -> Expr {
    on_route(false, |r| r.get("lp").eq(expr::bv(32, lp)))
}

fn tagged() -> Expr {
    on_route(false, |r| r.get("tag"))
}

fn annotate(ops: [TemporalOp; 5]) -> Annotation {
    let mut a = Annotation::new();
    for (v, op) in NODES.iter().zip(ops) {
        a.set(*v, op);
    }
    a
}

fn anything() -> TemporalOp {
    globally(expr::tt())
}

/// `G(⊤)` everywhere.
pub fn trivial() -> Annotation {
    annotate(std::array::from_fn(|_| anything()))
}

/// If `e` has a route, it is tagged.
pub fn weak_tag() -> Annotation {
    let weak = || globally(expr::or([is_null(), tagged()]));
    annotate([anything(), globally(lp_is(100)), weak(), weak(), weak()])
}

/// `e` eventually reaches `w`.
pub fn reach() -> Annotation {
    annotate([
        anything(),
        globally(lp_is(100)),
        until(is_null(), 1, globally(tagged())),
        until(is_null(), 2, globally(tagged())),
        finally(3, globally(has_route())),
    ])
}

fn spurious() -> Expr {
    expr::and([lp_is(200), on_route(false, |r| r.get("tag").not())])
}

/// Time-free interfaces claiming `v` and `d` only ever hold an untagged
/// local-preference-200 route, so that `e` never receives one.
pub fn strawperson() -> Annotation {
    annotate([
        anything(),
        globally(lp_is(100)),
        globally(spurious()),
        globally(spurious()),
        globally(is_null()),
    ])
}

/// The strawperson interfaces with `G` made explicit; they exclude ∅ at time 0.
pub fn bad_temporal() -> Annotation {
    strawperson()
}

/// The bad temporal interfaces with ∅ admitted at `v` and `d`.
pub fn patched() -> Annotation {
    let mut a = bad_temporal();
    let patched = globally(expr::or([spurious(), is_null()]));
    a.set("v", patched.clone());
    a.set("d", patched);
    a
}

fn from_w() -> Expr {
    on_route(false, |r| r.get("fromw"))
}

/// Reachability from `w` proved with the `fromw` ghost field.
pub fn ghost() -> Annotation {
    let tagged_from_w = || globally(expr::and([tagged(), from_w()]));
    annotate([
        globally(on_route(true, |r| r.get("fromw").not())),
        globally(expr::and([lp_is(100), from_w()])),
        until(is_null(), 1, tagged_from_w()),
        until(is_null(), 2, tagged_from_w()),
        finally(3, globally(from_w())),
    ])
}

/// Reachability interfaces that tolerate one step of delay: each witness time
/// after the first hop gains one step per earlier hop, and routes may arrive
/// before their witness time.
pub fn reach_delay_padded() -> Annotation {
    annotate([
        anything(),
        globally(lp_is(100)),
        until(is_null(), 1, globally(tagged())),
        until(expr::or([is_null(), tagged()]), 3, globally(tagged())),
        finally(5, globally(has_route())),
    ])
}

fn fixture(name: &str, network: NetworkInstance, a: Annotation, expected: Expected) -> BenchmarkFixture {
    BenchmarkFixture {
        name: name.to_string(),
        network,
        properties: a.clone(),
        interfaces: a,
        expected,
    }
}

pub fn by_id(id: &str) -> Result<BenchmarkFixture, BenchError> {
    Ok(match id {
        "base" => fixture(id, network(), trivial(), Expected::Pass),
        "weak-tag" => fixture(id, network(), weak_tag(), Expected::Pass),
        "reach" => fixture(id, network(), reach(), Expected::Pass),
        "strawperson" => fixture(id, network(), strawperson(), Expected::Fail),
        "bad-temporal" => fixture(id, network(), bad_temporal(), Expected::Fail),
        "patched" => fixture(id, network(), patched(), Expected::Fail),
        "ghost" => fixture(id, ghost_network(), ghost(), Expected::Pass),
        other => return Err(BenchError::UnknownFixture(other.to_string())),
    })
}

pub fn fixtures() -> Vec<BenchmarkFixture> {
    FIXTURES.iter().map(|id| by_id(id).expect("listed fixture")).collect()
}

/// Conjunction of an interface with an extra operator at one node.
pub fn strengthen(a: &Annotation, v: &str, op: TemporalOp) -> Annotation {
    let mut out = a.clone();
    out.set(v, and_op(a.at(v).clone(), op));
    out
}
