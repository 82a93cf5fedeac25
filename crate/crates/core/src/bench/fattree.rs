//! Fattree data-center networks running an eBGP-like policy, with
//! reachability, path-length, valley-freedom and hijack-filtering benchmarks.
//!
//! Node ids number cores first (`c0…`), then each pod's aggregation nodes
//! followed by its edge nodes, with one running index (`a4, a5, e6, e7, …`
//! for k = 4).

use super::{has_route, lexicographic, map_route, on_route, option_merge};
use super::{BenchError, BenchmarkFixture, Expected};
use crate::model::expr::{self, lit, var, Expr};
use crate::model::network::{NetworkInstance, SymbolicVar, Topology, TRANSFER_VAR};
use crate::model::{Sort, Value};
use crate::temporal::{and_op, finally, globally, or_op, until, Annotation, TemporalOp};
use std::collections::BTreeMap;

/// Symbolic destination edge node of the all-prefix variants.
pub const DEST_VAR: &str = "dest";
/// Symbolic internal prefix of the hijack benchmark.
pub const PREFIX_VAR: &str = "p";
/// Symbolic announcement of the hijacker.
pub const HIJACK_ROUTE: &str = "hijack_route";
pub const HIJACKER: &str = "h";
/// Community added on down edges.
pub const DOWN: &str = "D";
/// Prefix announced by the destination when it is not symbolic (10.0.0.0).
pub const DEFAULT_PREFIX: u128 = 0x0a00_0000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    Core,
    Aggregation { pod: usize },
    Edge { pod: usize },
}

impl Tier {
    fn level(self) -> u8 {
        match self {
            Tier::Edge { .. } => 0,
            Tier::Aggregation { .. } => 1,
            Tier::Core => 2,
        }
    }

    pub fn pod(self) -> Option<usize> {
        match self {
            Tier::Core => None,
            Tier::Aggregation { pod } | Tier::Edge { pod } => Some(pod),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FattreeLayout {
    pub k: usize,
    nodes: Vec<String>,
    tiers: BTreeMap<String, Tier>,
    edges: Vec<(String, String)>,
}

/// The k-pod fattree: `k²/4` cores and `k` pods of `k/2` aggregation and
/// `k/2` edge nodes. Aggregation node `j` of every pod links to cores
/// `j, j + k/2, j + 2·k/2, …`; links are bidirectional.
pub fn fattree(k: usize) -> Result<FattreeLayout, BenchError> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(BenchError::BadK(k));
    }
    let half = k / 2;
    let cores = half * half;
    let mut nodes = Vec::new();
    let mut tiers = BTreeMap::new();
    let mut edges = Vec::new();
    let mut link = |a: &str, b: &str| {
        edges.push((a.to_string(), b.to_string()));
        edges.push((b.to_string(), a.to_string()));
    };
    for c in 0..cores {
        let id = format!("c{c}");
        tiers.insert(id.clone(), Tier::Core);
        nodes.push(id);
    }
    let mut index = cores;
    for pod in 0..k {
        let aggs: Vec<String> = (0..half).map(|j| format!("a{}", index + j)).collect();
        let tors: Vec<String> = (0..half).map(|j| format!("e{}", index + half + j)).collect();
        index += k;
        for (j, a) in aggs.iter().enumerate() {
            tiers.insert(a.clone(), Tier::Aggregation { pod });
            for m in 0..half {
                link(a, &format!("c{}", j + m * half));
            }
            for e in &tors {
                link(e, a);
            }
        }
        for e in &tors {
            tiers.insert(e.clone(), Tier::Edge { pod });
        }
        nodes.extend(aggs);
        nodes.extend(tors);
    }
    Ok(FattreeLayout {
        k,
        nodes,
        tiers,
        edges,
    })
}

impl FattreeLayout {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn tier(&self, v: &str) -> Option<Tier> {
        self.tiers.get(v).copied()
    }

    pub fn topology(&self) -> Topology {
        Topology::new(self.nodes.iter().cloned(), self.edges.iter().cloned())
    }

    pub fn edge_nodes(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|v| matches!(self.tiers[*v], Tier::Edge { .. }))
            .map(String::as_str)
            .collect()
    }

    /// The last edge node, the destination of the single-prefix benchmarks.
    pub fn default_dest(&self) -> &str {
        self.edge_nodes().last().copied().expect("k ≥ 2 has edge nodes")
    }

    fn edge_tier(&self, dest: &str) -> Result<usize, BenchError> {
        match self.tier(dest) {
            Some(Tier::Edge { pod }) => Ok(pod),
            _ => Err(BenchError::NotEdgeNode(dest.to_string())),
        }
    }

    /// Whether `v` forwards the destination's routes up towards the cores:
    /// the destination itself and the aggregation nodes of its pod.
    pub fn adjacent(&self, dest: &str, v: &str) -> Result<bool, BenchError> {
        let pod = self.edge_tier(dest)?;
        Ok(v == dest || self.tier(v) == Some(Tier::Aggregation { pod }))
    }
}

/// Hops from the edge node `dest` to `v`: 0 for `dest`, 1 for aggregation
/// nodes in its pod, 2 for cores and the pod's other edge nodes, 3 for
/// aggregation nodes elsewhere and 4 for edge nodes elsewhere.
pub fn distance(layout: &FattreeLayout, dest: &str, v: &str) -> Result<u64, BenchError> {
    let pod = layout.edge_tier(dest)?;
    let tier = layout.tier(v).ok_or_else(|| BenchError::NotEdgeNode(v.to_string()))?;
    Ok(match tier {
        _ if v == dest => 0,
        Tier::Aggregation { pod: p } if p == pod => 1,
        Tier::Core => 2,
        Tier::Edge { pod: p } if p == pod => 2,
        Tier::Aggregation { .. } => 3,
        Tier::Edge { .. } => 4,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dest {
    Node(String),
    /// Any edge node, chosen by the symbolic variable [`DEST_VAR`].
    Symbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    Reach,
    Length,
    Vf,
    Hijack,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Reach => "reach",
            Policy::Length => "length",
            Policy::Vf => "vf",
            Policy::Hijack => "hijack",
        }
    }
}

pub fn origin_sort() -> Sort {
    Sort::enumeration(["egp", "igp", "unknown"])
}

fn record_sort(policy: Policy) -> Sort {
    let mut fields = vec![
        ("prefix", Sort::BitVec(32)),
        ("ad", Sort::BitVec(32)),
        ("lp", Sort::BitVec(32)),
        ("med", Sort::BitVec(32)),
        ("origin", origin_sort()),
        ("len", Sort::Int),
        ("comms", Sort::StringSet),
    ];
    if policy == Policy::Hijack {
        fields.push(("tag", Sort::Bool));
    }
    Sort::record(fields)
}

pub fn route_sort(policy: Policy) -> Sort {
    Sort::option(record_sort(policy))
}

fn origin(label: &str) -> Expr {
    let labels = match origin_sort() {
        Sort::Enum(l) => l,
        _ => unreachable!(),
    };
    lit(Value::label(&labels, label).expect("origin label"))
}

fn dest_sort(layout: &FattreeLayout) -> Sort {
    Sort::enumeration(layout.edge_nodes())
}

fn dest_is(layout: &FattreeLayout, v: &str) -> Expr {
    let labels: Vec<String> = layout.edge_nodes().iter().map(|s| s.to_string()).collect();
    var(DEST_VAR).eq(lit(Value::label(&labels, v).expect("edge node")))
}

/// The destination's announcement.
fn origin_route(policy: Policy) -> Expr {
    let prefix = if policy == Policy::Hijack {
        var(PREFIX_VAR)
    } else {
        expr::bv(32, DEFAULT_PREFIX)
    };
    let mut fields = vec![
        ("prefix", prefix),
        ("ad", expr::bv(32, 20)),
        ("lp", expr::bv(32, 100)),
        ("med", expr::bv(32, 0)),
        ("origin", origin("igp")),
        ("len", expr::int(0)),
        ("comms", lit(Value::set(Vec::<String>::new()))),
    ];
    if policy == Policy::Hijack {
        fields.push(("tag", expr::ff()));
    }
    expr::some(expr::make_record(fields))
}

fn longer(r: Expr) -> Expr {
    let len = r.clone().get("len").add(expr::int(1));
    r.with("len", len)
}

fn tagged_down(r: &Expr) -> Expr {
    r.clone().get("comms").contains(DOWN)
}

/// Local preference, path length, administrative distance, MED, origin, the
/// down community, prefix and (for hijack) the ghost tag, in that order. The
/// hijack variant first prefers routes for the internal prefix, as a
/// per-prefix routing table would.
fn merge(policy: Policy) -> Expr {
    option_merge(|y, x| {
        let mut keys = Vec::new();
        let f = |e: &Expr, name: &str| e.clone().get(name);
        if policy == Policy::Hijack {
            let yp = f(&y, "prefix").eq(var(PREFIX_VAR));
            let xp = f(&x, "prefix").eq(var(PREFIX_VAR));
            keys.push((expr::and([yp.clone(), xp.clone().not()]), yp.eq(xp)));
        }
        let eq = |name: &str| f(&y, name).eq(f(&x, name));
        keys.push((f(&x, "lp").lt(f(&y, "lp")), eq("lp")));
        keys.push((f(&y, "len").lt(f(&x, "len")), eq("len")));
        keys.push((f(&y, "ad").lt(f(&x, "ad")), eq("ad")));
        keys.push((f(&y, "med").lt(f(&x, "med")), eq("med")));
        let yo = |l: &str| f(&y, "origin").eq(origin(l));
        let xo = |l: &str| f(&x, "origin").eq(origin(l));
        keys.push((
            expr::or([
                expr::and([yo("igp"), xo("igp").not()]),
                expr::and([yo("egp"), xo("unknown")]),
            ]),
            eq("origin"),
        ));
        keys.push((
            expr::and([tagged_down(&y).not(), tagged_down(&x)]),
            tagged_down(&y).eq(tagged_down(&x)),
        ));
        keys.push((f(&y, "prefix").lt(f(&x, "prefix")), eq("prefix")));
        if policy == Policy::Hijack {
            keys.push((
                expr::and([f(&y, "tag").not(), f(&x, "tag")]),
                eq("tag"),
            ));
        }
        lexicographic(keys)
    })
}

fn transfer(layout: &FattreeLayout, policy: Policy, u: &str, v: &str) -> Expr {
    let none = expr::none(record_sort(policy));
    if u == HIJACKER {
        return expr::case(
            var(TRANSFER_VAR),
            none.clone(),
            "r",
            expr::ite(
                var("r").get("prefix").eq(var(PREFIX_VAR)),
                none,
                expr::some(longer(var("r")).with("tag", expr::tt())),
            ),
        );
    }
    if policy != Policy::Vf || v == HIJACKER {
        return map_route(longer);
    }
    let up = layout.tier(u).map(Tier::level) < layout.tier(v).map(Tier::level);
    if up {
        expr::case(
            var(TRANSFER_VAR),
            none.clone(),
            "r",
            expr::ite(tagged_down(&var("r")), none, expr::some(longer(var("r")))),
        )
    } else {
        map_route(|r| {
            let comms = r.clone().get("comms").insert(DOWN);
            longer(r).with("comms", comms)
        })
    }
}

fn network(layout: &FattreeLayout, policy: Policy, dest: &Dest) -> Result<NetworkInstance, BenchError> {
    let sort = route_sort(policy);
    let none = expr::none(record_sort(policy));
    let mut nodes = layout.nodes().to_vec();
    let mut edges = layout.edges().to_vec();
    let mut symbolics = Vec::new();
    if let Dest::Node(d) = dest {
        layout.edge_tier(d)?;
    } else {
        symbolics.push(SymbolicVar::new(DEST_VAR, dest_sort(layout)));
    }
    if policy == Policy::Hijack {
        symbolics.push(SymbolicVar::new(PREFIX_VAR, Sort::BitVec(32)));
        symbolics.push(SymbolicVar::new(HIJACK_ROUTE, sort.clone()));
        for v in layout.nodes() {
            if layout.tier(v) == Some(Tier::Core) {
                edges.push((HIJACKER.to_string(), v.clone()));
                edges.push((v.clone(), HIJACKER.to_string()));
            }
        }
        nodes.push(HIJACKER.to_string());
    }
    let mut init = BTreeMap::new();
    for v in layout.nodes() {
        let e = match dest {
            Dest::Node(d) if d == v => origin_route(policy),
            Dest::Symbolic if matches!(layout.tier(v), Some(Tier::Edge { .. })) => {
                expr::ite(dest_is(layout, v), origin_route(policy), none.clone())
            }
            _ => none.clone(),
        };
        init.insert(v.clone(), e);
    }
    if policy == Policy::Hijack {
        init.insert(HIJACKER.to_string(), var(HIJACK_ROUTE));
    }
    let transfer = edges
        .iter()
        .map(|(u, v)| ((u.clone(), v.clone()), transfer(layout, policy, u, v)))
        .collect();
    Ok(NetworkInstance {
        topology: Topology::new(nodes, edges),
        route_sort: sort,
        init,
        transfer,
        merge: merge(policy),
        symbolics,
    })
}

/// An operator that depends on the distance from the destination to `v`. For
/// a symbolic destination this is a conjunction over the possible distances,
/// each guarded by the destinations at that distance.
pub fn by_distance(
    layout: &FattreeLayout,
    dest: &Dest,
    v: &str,
    f: impl Fn(u64) -> TemporalOp,
) -> Result<TemporalOp, BenchError> {
    let d = match dest {
        Dest::Node(d) => return Ok(f(distance(layout, d, v)?)),
        Dest::Symbolic => layout.edge_nodes(),
    };
    let mut groups: BTreeMap<u64, Vec<&str>> = BTreeMap::new();
    for dst in d {
        groups.entry(distance(layout, dst, v)?).or_default().push(dst);
    }
    if groups.len() == 1 {
        return Ok(f(*groups.keys().next().unwrap()));
    }
    let mut ops = groups.into_iter().map(|(delta, dsts)| {
        let elsewhere = expr::and(dsts.iter().map(|x| dest_is(layout, x).not()));
        or_op(globally(elsewhere), f(delta))
    });
    let first = ops.next().unwrap();
    Ok(ops.fold(first, and_op))
}

/// `adjacent(v)` as a predicate over the destination.
fn adjacent(layout: &FattreeLayout, dest: &Dest, v: &str) -> Result<Expr, BenchError> {
    match dest {
        Dest::Node(d) => Ok(if layout.adjacent(d, v)? { expr::tt() } else { expr::ff() }),
        Dest::Symbolic => {
            let dsts: Vec<&str> = layout
                .edge_nodes()
                .into_iter()
                .filter(|d| layout.adjacent(d, v).unwrap_or(false))
                .collect();
            Ok(expr::or(dsts.iter().map(|d| dest_is(layout, d))))
        }
    }
}

fn field_pred(on_none: bool, f: impl FnOnce(Expr) -> Expr) -> Expr {
    on_route(on_none, f)
}

/// The interface of node `v` (not the hijacker).
pub fn interface(layout: &FattreeLayout, policy: Policy, dest: &Dest, v: &str) -> Result<TemporalOp, BenchError> {
    Ok(match policy {
        Policy::Reach => by_distance(layout, dest, v, |d| finally(d, globally(has_route())))?,
        Policy::Length => and_op(
            globally(field_pred(true, |r| r.get("lp").eq(expr::bv(32, 100)))),
            by_distance(layout, dest, v, |d| {
                finally(d, globally(field_pred(false, |r| r.get("len").leq(expr::int(d)))))
            })?,
        ),
        Policy::Vf => {
            let adj = adjacent(layout, dest, v)?;
            by_distance(layout, dest, v, |d| {
                let adj = adj.clone();
                until(
                    super::is_null(),
                    d,
                    globally(field_pred(false, |r| {
                        expr::and([
                            r.clone().get("lp").eq(expr::bv(32, 100)),
                            r.clone().get("len").eq(expr::int(d)),
                            adj.implies(tagged_down(&r).not()),
                        ])
                    })),
                )
            })?
        }
        Policy::Hijack => and_op(
            by_distance(layout, dest, v, |d| finally(d, globally(internal_route())))?,
            globally(field_pred(true, |r| {
                r.clone().get("prefix").eq(var(PREFIX_VAR)).implies(r.get("tag").not())
            })),
        ),
    })
}

/// `s.prefix = p ∧ ¬s.tag`
fn internal_route() -> Expr {
    field_pred(false, |r| {
        expr::and([r.clone().get("prefix").eq(var(PREFIX_VAR)), r.get("tag").not()])
    })
}

pub fn property(policy: Policy) -> TemporalOp {
    match policy {
        Policy::Reach | Policy::Vf => finally(4, globally(has_route())),
        Policy::Length => finally(4, globally(field_pred(false, |r| r.get("len").leq(expr::int(4))))),
        Policy::Hijack => finally(4, globally(internal_route())),
    }
}

pub fn build(policy: Policy, layout: &FattreeLayout, dest: &Dest) -> Result<BenchmarkFixture, BenchError> {
    let network = network(layout, policy, dest)?;
    let mut interfaces = Annotation::new();
    let mut properties = Annotation::new();
    for v in layout.nodes() {
        interfaces.set(v.clone(), interface(layout, policy, dest, v)?);
        properties.set(v.clone(), property(policy));
    }
    if policy == Policy::Hijack {
        interfaces.set(HIJACKER, globally(expr::tt()));
        properties.set(HIJACKER, globally(expr::tt()));
    }
    let prefix = match dest {
        Dest::Node(_) => "sp",
        Dest::Symbolic => "all",
    };
    Ok(BenchmarkFixture {
        name: format!("{prefix}-{}-k{}", policy.name(), layout.k),
        network,
        interfaces,
        properties,
        expected: Expected::Pass,
    })
}

pub fn build_reach(layout: &FattreeLayout, dest: &Dest) -> Result<BenchmarkFixture, BenchError> {
    build(Policy::Reach, layout, dest)
}

pub fn build_length(layout: &FattreeLayout, dest: &Dest) -> Result<BenchmarkFixture, BenchError> {
    build(Policy::Length, layout, dest)
}

pub fn build_vf(layout: &FattreeLayout, dest: &Dest) -> Result<BenchmarkFixture, BenchError> {
    build(Policy::Vf, layout, dest)
}

pub fn build_hijack(layout: &FattreeLayout, dest: &Dest) -> Result<BenchmarkFixture, BenchError> {
    build(Policy::Hijack, layout, dest)
}

/// The hijack network with the cores' prefix filter removed: the hijacker's
/// announcements for `p` are tagged and forwarded like any other.
pub fn without_hijack_filter(f: &BenchmarkFixture) -> BenchmarkFixture {
    let mut out = f.clone();
    for ((u, _), e) in out.network.transfer.iter_mut() {
        if u == HIJACKER {
            *e = map_route(|r| longer(r).with("tag", expr::tt()));
        }
    }
    out.name = format!("{}-unfiltered", f.name);
    out.expected = Expected::Fail;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_merge_laws, validate_network};

    #[test]
    fn counts() {
        for k in [2usize, 4, 6, 8] {
            let l = fattree(k).unwrap();
            assert_eq!(l.nodes().len() * 4, 5 * k * k);
            assert_eq!(l.edges().len(), k * k * k);
        }
        assert_eq!(fattree(3).unwrap_err(), BenchError::BadK(3));
        assert_eq!(fattree(0).unwrap_err(), BenchError::BadK(0));
    }

    #[test]
    fn k4_ids_and_wiring() {
        let l = fattree(4).unwrap();
        let ids: Vec<&str> = l.nodes().iter().map(String::as_str).collect();
        assert_eq!(
            ids,
            [
                "c0", "c1", "c2", "c3", "a4", "a5", "e6", "e7", "a8", "a9", "e10", "e11", "a12",
                "a13", "e14", "e15", "a16", "a17", "e18", "e19"
            ]
        );
        let t = l.topology();
        assert_eq!(t.preds("a4"), ["c0", "c2", "e6", "e7"]);
        assert_eq!(t.preds("a17"), ["c1", "c3", "e18", "e19"]);
        assert_eq!(l.default_dest(), "e19");
        assert!(l.adjacent("e19", "a16").unwrap());
        assert!(!l.adjacent("e19", "e18").unwrap());
    }

    #[test]
    fn distances() {
        let l = fattree(4).unwrap();
        assert_eq!(distance(&l, "e19", "e19"), Ok(0));
        assert_eq!(distance(&l, "e19", "a17"), Ok(1));
        assert_eq!(distance(&l, "e19", "c0"), Ok(2));
        assert_eq!(distance(&l, "e19", "e18"), Ok(2));
        assert_eq!(distance(&l, "e19", "a4"), Ok(3));
        assert_eq!(distance(&l, "e19", "e6"), Ok(4));
        assert_eq!(distance(&l, "c0", "e6"), Err(BenchError::NotEdgeNode("c0".into())));
    }

    #[test]
    fn fixtures_are_well_formed() {
        let l = fattree(4).unwrap();
        for policy in [Policy::Reach, Policy::Length, Policy::Vf, Policy::Hijack] {
            for dest in [Dest::Node("e19".into()), Dest::Symbolic] {
                let f = build(policy, &l, &dest).unwrap();
                assert_eq!(validate_network(&f.network), vec![], "{}", f.name);
                assert_eq!(f.interfaces.validate(&f.network), vec![], "{}", f.name);
                assert_eq!(f.properties.validate(&f.network), vec![], "{}", f.name);
            }
        }
    }

    #[test]
    fn merges_are_lawful() {
        let l = fattree(2).unwrap();
        for policy in [Policy::Reach, Policy::Vf, Policy::Hijack] {
            let f = build(policy, &l, &Dest::Node("e4".into())).unwrap();
            assert_eq!(check_merge_laws(&f.network, 500, 3).unwrap().violation, None);
        }
    }
}
