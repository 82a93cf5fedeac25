use super::eval::{eval, EvalError, ValueEnv};
use super::expr::Expr;
use super::gen::ValueGen;
use super::sort::Sort;
use super::typecheck::{expect_sort, SortEnv, TypeError};
use super::value::Value;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// Variable bound to the incoming route in a transfer expression.
pub const TRANSFER_VAR: &str = "s";
/// Variables bound to the two candidates in the merge expression.
pub const MERGE_LHS: &str = "s1";
pub const MERGE_RHS: &str = "s2";
/// Prefix reserved for names introduced by the checkers.
pub const RESERVED_PREFIX: char = '$';

pub type Edge = (String, String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    nodes: Vec<String>,
    edges: BTreeSet<Edge>,
    index: HashMap<String, usize>,
    preds: Vec<Vec<String>>,
}

impl Topology {
    /// Builds a topology. Nodes keep their given order; invalid edges are kept
    /// so that [`validate_network`] can report them.
    pub fn new<N, E, S>(nodes: N, edges: E) -> Topology
    where
        N: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let edges: BTreeSet<Edge> = edges
            .into_iter()
            .map(|(u, v)| (u.into(), v.into()))
            .collect();
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            index.entry(n.clone()).or_insert(i);
        }
        let mut preds = vec![Vec::new(); nodes.len()];
        // BTreeSet iteration is sorted by (u, v), so each list comes out sorted by u.
        for (u, v) in &edges {
            if let Some(&i) = index.get(v) {
                preds[i].push(u.clone());
            }
        }
        Topology {
            nodes,
            edges,
            index,
            preds,
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn contains(&self, node: &str) -> bool {
        self.index.contains_key(node)
    }

    pub fn index_of(&self, node: &str) -> Option<usize> {
        self.index.get(node).copied()
    }

    /// In-neighbors of `v`, sorted by node id.
    pub fn preds(&self, v: &str) -> &[String] {
        match self.index.get(v) {
            Some(&i) => &self.preds[i],
            None => &[],
        }
    }

    pub fn succs<'a>(&'a self, u: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .range((u.to_string(), String::new())..)
            .take_while(move |(a, _)| a == u)
            .map(|(_, b)| b.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicVar {
    pub name: String,
    pub sort: Sort,
    /// Assumed, never checked.
    pub assumption: Option<Expr>,
}

impl SymbolicVar {
    pub fn new(name: impl Into<String>, sort: Sort) -> SymbolicVar {
        SymbolicVar {
            name: name.into(),
            sort,
            assumption: None,
        }
    }

    pub fn assuming(mut self, assumption: Expr) -> SymbolicVar {
        self.assumption = Some(assumption);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkInstance {
    pub topology: Topology,
    pub route_sort: Sort,
    pub init: BTreeMap<String, Expr>,
    pub transfer: BTreeMap<Edge, Expr>,
    pub merge: Expr,
    pub symbolics: Vec<SymbolicVar>,
}

impl NetworkInstance {
    pub fn symbolic_env(&self) -> SortEnv {
        self.symbolics
            .iter()
            .map(|s| (s.name.clone(), s.sort.clone()))
            .collect()
    }

    pub fn assumptions(&self) -> Vec<Expr> {
        self.symbolics
            .iter()
            .filter_map(|s| s.assumption.clone())
            .collect()
    }

    /// No symbolic variables and variable-free initial routes.
    pub fn is_closed(&self) -> bool {
        self.symbolics.is_empty() && self.init.values().all(|e| e.free_vars().is_empty())
    }

    pub fn init_of(&self, v: &str) -> &Expr {
        &self.init[v]
    }

    pub fn transfer_of(&self, u: &str, v: &str) -> &Expr {
        &self.transfer[&(u.to_string(), v.to_string())]
    }

    /// String literals appearing anywhere in the network definition.
    pub fn string_alphabet(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in self.init.values().chain(self.transfer.values()) {
            e.collect_strings(&mut out);
        }
        self.merge.collect_strings(&mut out);
        for s in &self.symbolics {
            if let Some(a) = &s.assumption {
                a.collect_strings(&mut out);
            }
        }
        out
    }

    pub fn eval_init(&self, v: &str, symbolics: &ValueEnv) -> Result<Value, EvalError> {
        eval(self.init_of(v), symbolics)
    }

    pub fn eval_transfer(
        &self,
        u: &str,
        v: &str,
        route: &Value,
        symbolics: &ValueEnv,
    ) -> Result<Value, EvalError> {
        let mut env = symbolics.clone();
        env.insert(TRANSFER_VAR.to_string(), route.clone());
        eval(self.transfer_of(u, v), &env)
    }

    pub fn eval_merge(
        &self,
        s1: &Value,
        s2: &Value,
        symbolics: &ValueEnv,
    ) -> Result<Value, EvalError> {
        let mut env = symbolics.clone();
        env.insert(MERGE_LHS.to_string(), s1.clone());
        env.insert(MERGE_RHS.to_string(), s2.clone());
        eval(&self.merge, &env)
    }

    /// `init_v ⊕ T_{u1 v}(r1) ⊕ … ⊕ T_{uk v}(rk)` folded over the sorted
    /// predecessors, with `incoming(u)` giving the route sent by `u`.
    pub fn step_node<'a>(
        &self,
        v: &str,
        init: Value,
        mut incoming: impl FnMut(&str) -> &'a Value,
        symbolics: &ValueEnv,
    ) -> Result<Value, EvalError> {
        let mut acc = init;
        for u in self.topology.preds(v) {
            let sent = self.eval_transfer(u, v, incoming(u), symbolics)?;
            acc = self.eval_merge(&acc, &sent, symbolics)?;
        }
        Ok(acc)
    }
}

/// Where in a network definition a diagnostic applies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Location {
    Node(String),
    Edge(String, String),
    Merge,
    Symbolic(String),
    RouteSort,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Node(n) => write!(f, "node {n}"),
            Location::Edge(u, v) => write!(f, "edge {u}->{v}"),
            Location::Merge => write!(f, "merge"),
            Location::Symbolic(s) => write!(f, "symbolic {s}"),
            Location::RouteSort => write!(f, "route sort"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    UnknownNode { name: String, at: Location },
    DuplicateNode(String),
    SelfLoop(String),
    MissingInit(String),
    MissingTransfer(String, String),
    TransferWithoutEdge(String, String),
    DuplicateSymbolic(String),
    ReservedName { name: String, at: Location },
    MalformedRouteSort(String),
    Sort { at: Location, error: TypeError },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnknownNode { name, at } => write!(f, "{at}: unknown node `{name}`"),
            Diagnostic::DuplicateNode(n) => write!(f, "node {n}: declared twice"),
            Diagnostic::SelfLoop(n) => write!(f, "edge {n}->{n}: self-loops are not allowed"),
            Diagnostic::MissingInit(n) => write!(f, "node {n}: no initial route"),
            Diagnostic::MissingTransfer(u, v) => {
                write!(f, "edge {u}->{v}: no transfer function")
            }
            Diagnostic::TransferWithoutEdge(u, v) => {
                write!(f, "edge {u}->{v}: transfer function for an undeclared edge")
            }
            Diagnostic::DuplicateSymbolic(s) => write!(f, "symbolic {s}: declared twice"),
            Diagnostic::ReservedName { name, at } => {
                write!(f, "{at}: name `{name}` is reserved")
            }
            Diagnostic::MalformedRouteSort(r) => write!(f, "route sort: {r}"),
            Diagnostic::Sort { at, error } => write!(f, "{at}: {error}"),
        }
    }
}

/// Checks every structural and sort invariant of a network; an empty result
/// means the network is valid.
pub fn validate_network(n: &NetworkInstance) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let topo = &n.topology;

    let mut seen = BTreeSet::new();
    for v in topo.nodes() {
        if !seen.insert(v) {
            out.push(Diagnostic::DuplicateNode(v.clone()));
        }
    }
    for (u, v) in topo.edges() {
        for end in [u, v] {
            if !topo.contains(end) {
                out.push(Diagnostic::UnknownNode {
                    name: end.clone(),
                    at: Location::Edge(u.clone(), v.clone()),
                });
            }
        }
        if u == v {
            out.push(Diagnostic::SelfLoop(u.clone()));
        }
    }

    if let Err(reason) = n.route_sort.well_formed() {
        out.push(Diagnostic::MalformedRouteSort(reason));
        return out;
    }

    let mut env = SortEnv::new();
    let reserved = [TRANSFER_VAR, MERGE_LHS, MERGE_RHS];
    for s in &n.symbolics {
        let at = Location::Symbolic(s.name.clone());
        if s.name.starts_with(RESERVED_PREFIX) || reserved.contains(&s.name.as_str()) {
            out.push(Diagnostic::ReservedName {
                name: s.name.clone(),
                at: at.clone(),
            });
        }
        if let Err(reason) = s.sort.well_formed() {
            out.push(Diagnostic::Sort {
                at: at.clone(),
                error: TypeError::MalformedSort {
                    path: "<root>".into(),
                    reason,
                },
            });
        }
        if env.insert(s.name.clone(), s.sort.clone()).is_some() {
            out.push(Diagnostic::DuplicateSymbolic(s.name.clone()));
        }
    }
    for s in &n.symbolics {
        if let Some(a) = &s.assumption {
            if let Err(error) = expect_sort(a, &env, &Sort::Bool) {
                out.push(Diagnostic::Sort {
                    at: Location::Symbolic(s.name.clone()),
                    error,
                });
            }
        }
    }

    for v in topo.nodes() {
        match n.init.get(v) {
            None => out.push(Diagnostic::MissingInit(v.clone())),
            Some(e) => {
                if let Err(error) = expect_sort(e, &env, &n.route_sort) {
                    out.push(Diagnostic::Sort {
                        at: Location::Node(v.clone()),
                        error,
                    });
                }
            }
        }
    }
    for v in n.init.keys() {
        if !topo.contains(v) {
            out.push(Diagnostic::UnknownNode {
                name: v.clone(),
                at: Location::Node(v.clone()),
            });
        }
    }

    let mut tenv = env.clone();
    tenv.insert(TRANSFER_VAR.to_string(), n.route_sort.clone());
    for (u, v) in topo.edges() {
        match n.transfer.get(&(u.clone(), v.clone())) {
            None => out.push(Diagnostic::MissingTransfer(u.clone(), v.clone())),
            Some(e) => {
                if let Err(error) = expect_sort(e, &tenv, &n.route_sort) {
                    out.push(Diagnostic::Sort {
                        at: Location::Edge(u.clone(), v.clone()),
                        error,
                    });
                }
            }
        }
    }
    for (u, v) in n.transfer.keys() {
        if !topo.edges().contains(&(u.clone(), v.clone())) {
            out.push(Diagnostic::TransferWithoutEdge(u.clone(), v.clone()));
        }
    }

    let mut menv = env;
    menv.insert(MERGE_LHS.to_string(), n.route_sort.clone());
    menv.insert(MERGE_RHS.to_string(), n.route_sort.clone());
    if let Err(error) = expect_sort(&n.merge, &menv, &n.route_sort) {
        out.push(Diagnostic::Sort {
            at: Location::Merge,
            error,
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum MergeLaw {
    Commutativity,
    Associativity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeLawViolation {
    pub law: MergeLaw,
    pub routes: Vec<Value>,
    pub lhs: Value,
    pub rhs: Value,
    pub symbolics: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeLawReport {
    pub samples: usize,
    pub violation: Option<MergeLawViolation>,
}

/// Randomized check of commutativity and associativity of the merge function
/// over `samples` seeded route triples. Advisory only.
pub fn check_merge_laws(
    n: &NetworkInstance,
    samples: usize,
    seed: u64,
) -> Result<MergeLawReport, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet: Vec<String> = n.string_alphabet().into_iter().collect();
    let gen = ValueGen::new(alphabet);
    let mut report = MergeLawReport {
        samples: 0,
        violation: None,
    };
    for _ in 0..samples {
        let sym = gen.symbolic_assignment(&n.symbolics, &mut rng)?;
        let a = gen.value(&n.route_sort, &mut rng);
        let b = gen.value(&n.route_sort, &mut rng);
        let c = gen.value(&n.route_sort, &mut rng);
        report.samples += 1;

        let ab = n.eval_merge(&a, &b, &sym)?;
        let ba = n.eval_merge(&b, &a, &sym)?;
        if ab != ba {
            report.violation = Some(MergeLawViolation {
                law: MergeLaw::Commutativity,
                routes: vec![a, b],
                lhs: ab,
                rhs: ba,
                symbolics: sym,
            });
            break;
        }
        let left = n.eval_merge(&ab, &c, &sym)?;
        let bc = n.eval_merge(&b, &c, &sym)?;
        let right = n.eval_merge(&a, &bc, &sym)?;
        if left != right {
            report.violation = Some(MergeLawViolation {
                law: MergeLaw::Associativity,
                routes: vec![a, b, c],
                lhs: left,
                rhs: right,
                symbolics: sym,
            });
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::*;

    fn hop_network(merge: Expr) -> NetworkInstance {
        let topo = Topology::new(["a", "b"], [("a", "b"), ("b", "a")]);
        let mut init = BTreeMap::new();
        init.insert("a".to_string(), int(0));
        init.insert("b".to_string(), int(9));
        let mut transfer = BTreeMap::new();
        for (u, v) in topo.edges() {
            transfer.insert((u.clone(), v.clone()), var("s").add(int(1)));
        }
        NetworkInstance {
            topology: topo,
            route_sort: Sort::Int,
            init,
            transfer,
            merge,
            symbolics: vec![],
        }
    }

    #[test]
    fn preds_are_sorted() {
        let t = Topology::new(["v", "c", "a", "b"], [("c", "v"), ("a", "v"), ("b", "v")]);
        assert_eq!(t.preds("v"), ["a", "b", "c"]);
        assert!(t.preds("a").is_empty());
        assert_eq!(t.succs("a").collect::<Vec<_>>(), ["v"]);
    }

    #[test]
    fn diagnostics() {
        let mut n = hop_network(var("s1").min(var("s2")));
        assert!(validate_network(&n).is_empty());
        n.transfer.insert(("a".into(), "b".into()), tt());
        let d = validate_network(&n);
        assert!(matches!(&d[..], [Diagnostic::Sort { at: Location::Edge(u, v), .. }] if u == "a" && v == "b"));

        let mut n = hop_network(var("s1").min(var("s2")));
        n.topology = Topology::new(["a", "b"], [("a", "b"), ("b", "a"), ("a", "z")]);
        n.transfer.insert(("a".into(), "z".into()), var("s"));
        let d = validate_network(&n);
        assert!(d.contains(&Diagnostic::UnknownNode {
            name: "z".into(),
            at: Location::Edge("a".into(), "z".into())
        }));
    }

    #[test]
    fn merge_laws() {
        let n = hop_network(var("s1").min(var("s2")));
        assert!(check_merge_laws(&n, 1000, 7).unwrap().violation.is_none());
        let n = hop_network(var("s1"));
        let r = check_merge_laws(&n, 100, 7).unwrap();
        assert_eq!(r.violation.unwrap().law, MergeLaw::Commutativity);
    }
}
