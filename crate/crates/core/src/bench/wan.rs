//! A synthetic wide-area network: ten internal routers on a ring with chords
//! and twenty external peers. Routes imported from some peers are marked with
//! the block-to-external community `BTE` and must never be exported to a peer.

use super::{has_route, lexicographic, map_route, on_route, option_merge};
use super::{BenchmarkFixture, Expected};
use crate::model::expr::{self, var, Expr};
use crate::model::network::{NetworkInstance, SymbolicVar, Topology, TRANSFER_VAR};
use crate::model::Sort;
use crate::temporal::{globally, Annotation, TemporalOp};
use std::collections::BTreeMap;

pub const BTE: &str = "BTE";
pub const COMM: &str = "COMM";
pub const INTERNAL: usize = 10;
pub const EXTERNAL: usize = 20;
/// Peers `x0…x3` also connect to a second router.
pub const DUAL_HOMED: usize = 4;
/// The export missing its filter in the broken variant.
pub const BROKEN_EXPORT: (&str, &str) = ("i5", "x5");

fn internal(j: usize) -> String {
    format!("i{}", j % INTERNAL)
}

fn external(j: usize) -> String {
    format!("x{j}")
}

pub fn is_external(v: &str) -> bool {
    v.starts_with('x')
}

/// Symbolic initial route of node `v`.
pub fn announcement(v: &str) -> String {
    format!("route.{v}")
}

fn record_sort() -> Sort {
    Sort::record([
        ("lp", Sort::BitVec(32)),
        ("len", Sort::Int),
        ("comms", Sort::StringSet),
    ])
}

pub fn route_sort() -> Sort {
    Sort::option(record_sort())
}

pub fn topology() -> Topology {
    let mut nodes: Vec<String> = (0..INTERNAL).map(internal).collect();
    nodes.extend((0..EXTERNAL).map(external));
    let mut edges = Vec::new();
    let mut link = |a: String, b: String| {
        edges.push((a.clone(), b.clone()));
        edges.push((b, a));
    };
    for j in 0..INTERNAL {
        link(internal(j), internal(j + 1));
        if j < INTERNAL / 2 {
            link(internal(j), internal(j + INTERNAL / 2));
        }
    }
    for j in 0..EXTERNAL {
        link(external(j), internal(j));
        if j < DUAL_HOMED {
            link(external(j), internal(j + 3));
        }
    }
    Topology::new(nodes, edges)
}

fn carries(r: &Expr, c: &str) -> Expr {
    r.clone().get("comms").contains(c)
}

fn longer(r: Expr) -> Expr {
    let len = r.clone().get("len").add(expr::int(1));
    r.with("len", len)
}

/// Import from peer `x_j`: every third peer's routes get local preference 100
/// and `BTE`, the others 200 and `COMM`.
fn import(j: usize) -> Expr {
    let (lp, c) = if j.is_multiple_of(3) { (100, BTE) } else { (200, COMM) };
    map_route(|r| {
        let comms = r.clone().get("comms").insert(c);
        longer(r).with("lp", expr::bv(32, lp)).with("comms", comms)
    })
}

fn export(filtered: bool) -> Expr {
    if !filtered {
        return map_route(longer);
    }
    expr::case(
        var(TRANSFER_VAR),
        expr::none(record_sort()),
        "r",
        expr::ite(
            carries(&var("r"), BTE),
            expr::none(record_sort()),
            expr::some(longer(var("r"))),
        ),
    )
}

fn merge() -> Expr {
    option_merge(|y, x| {
        let f = |e: &Expr, name: &str| e.clone().get(name);
        let flag = |c: &str| {
            (
                expr::and([carries(&y, c).not(), carries(&x, c)]),
                carries(&y, c).eq(carries(&x, c)),
            )
        };
        lexicographic(vec![
            (f(&x, "lp").lt(f(&y, "lp")), f(&x, "lp").eq(f(&y, "lp"))),
            (f(&y, "len").lt(f(&x, "len")), f(&y, "len").eq(f(&x, "len"))),
            flag(BTE),
            flag(COMM),
        ])
    })
}

fn network(broken: bool) -> NetworkInstance {
    let topology = topology();
    let mut init = BTreeMap::new();
    let mut symbolics = Vec::new();
    for v in topology.nodes() {
        let name = announcement(v);
        let mut sym = SymbolicVar::new(&name, route_sort());
        if is_external(v) {
            sym = sym.assuming(bte_free().rename_free(TRANSFER_VAR, &name));
        }
        init.insert(v.clone(), var(&name));
        symbolics.push(sym);
    }
    let mut transfer = BTreeMap::new();
    for (u, v) in topology.edges() {
        let e = match (is_external(u), is_external(v)) {
            (true, _) => import(u[1..].parse().expect("peer index")),
            (false, true) => export(!(broken && (u.as_str(), v.as_str()) == BROKEN_EXPORT)),
            (false, false) => map_route(longer),
        };
        transfer.insert((u.clone(), v.clone()), e);
    }
    NetworkInstance {
        topology,
        route_sort: route_sort(),
        init,
        transfer,
        merge: merge(),
        symbolics,
    }
}

/// `s ≠ ∅ → BTE ∉ s.comms`
fn bte_free() -> Expr {
    on_route(true, |r| carries(&r, BTE).not())
}

fn property(v: &str) -> TemporalOp {
    if is_external(v) {
        globally(expr::or([has_route().not(), bte_free()]))
    } else {
        globally(expr::tt())
    }
}

fn fixture(broken: bool) -> BenchmarkFixture {
    let network = network(broken);
    let a = Annotation::from_fn(&network, property);
    BenchmarkFixture {
        name: if broken { "wan-bte-broken" } else { "wan-bte" }.to_string(),
        network,
        interfaces: a.clone(),
        properties: a,
        expected: if broken { Expected::Fail } else { Expected::Pass },
    }
}

pub fn build_wan_bte() -> BenchmarkFixture {
    fixture(false)
}

/// The WAN with the `BTE` filter missing on [`BROKEN_EXPORT`].
pub fn build_wan_bte_broken() -> BenchmarkFixture {
    fixture(true)
}
