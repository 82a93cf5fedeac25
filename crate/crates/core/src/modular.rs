//! Per-node verification conditions and the parallel modular checker.
//!
//! Every node is checked on its own: the initial condition at time 0, the
//! inductive condition over a symbolic time `$t`, and the safety condition
//! `A(v)(t) ⊆ P(v)(t)`. Validity of each condition is decided by asking the
//! solver for a model of its negation.

use crate::model::eval::ValueEnv;
use crate::model::expr::{self, var, Expr};
use crate::model::network::{
    validate_network, Diagnostic, NetworkInstance, MERGE_LHS, MERGE_RHS, TRANSFER_VAR,
};
use crate::model::{Sort, Value};
use crate::sim::{simulate, SimulationTrace};
use crate::smt::solver::SolverConfig;
use crate::smt::{Query, Verdict};
use crate::temporal::{Annotation, TemporalError, TemporalOp};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Skolemized time of the inductive and safety conditions.
pub const TIME_VAR: &str = "$t";
/// The node's initial route in the initial condition.
pub const INIT_VAR: &str = "$init";

/// Route received from in-neighbor `u` (or the node's own route in the safety condition).
pub fn route_var(u: &str) -> String {
    format!("$s.{u}")
}

fn sent_var(u: &str) -> String {
    format!("$x.{u}")
}

fn acc_var(i: usize) -> String {
    format!("$a{i}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Initial,
    Inductive,
    Safety,
    /// The time-free check of the strawperson procedure.
    TimeFree,
    /// The whole-network stable-state check.
    Stable,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Initial => "initial",
            Condition::Inductive => "inductive",
            Condition::Safety => "safety",
            Condition::TimeFree => "time-free",
            Condition::Stable => "stable",
        })
    }
}

/// A concrete violation of one condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Time of the route that falls outside the interface or property.
    pub time: Option<u64>,
    /// Time of the neighbor routes, for inductive violations.
    pub neighbor_time: Option<u64>,
    /// Node routes: the in-neighbors for inductive and time-free violations,
    /// the node itself otherwise.
    pub routes: BTreeMap<String, Value>,
    pub symbolics: BTreeMap<String, Value>,
    /// The computed route that violates the condition, when there is one.
    pub result: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    Valid,
    Counterexample(Counterexample),
    Unknown { reason: String },
    Failure { detail: String },
    /// Not run because an earlier condition of the same node failed.
    Skipped,
}

impl Outcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, Outcome::Valid)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Outcome::Counterexample(c) => Some(c),
            _ => None,
        }
    }

    fn inconclusive(&self) -> bool {
        matches!(self, Outcome::Unknown { .. } | Outcome::Failure { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub outcome: Outcome,
    pub wall: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeVerdict {
    pub node: String,
    pub results: Vec<ConditionResult>,
}

impl NodeVerdict {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.outcome.is_valid())
    }

    pub fn result(&self, condition: Condition) -> Option<&ConditionResult> {
        self.results.iter().find(|r| r.condition == condition)
    }

    pub fn outcome(&self, condition: Condition) -> Option<&Outcome> {
        self.result(condition).map(|r| &r.outcome)
    }

    /// The first condition that did not hold, if any.
    pub fn first_failure(&self) -> Option<&ConditionResult> {
        self.results.iter().find(|r| !r.outcome.is_valid())
    }

    pub fn wall(&self) -> Duration {
        self.results.iter().map(|r| r.wall).sum()
    }

    pub fn valid_count(&self) -> usize {
        self.results.iter().filter(|r| r.outcome.is_valid()).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Procedure {
    Modular,
    /// The time-free check; unsound, kept to demonstrate why time matters.
    StrawpersonUnsound,
    Monolithic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    /// At least one counterexample.
    Fail,
    /// No counterexample, but some condition was not decided.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub procedure: Procedure,
    pub delay: u64,
    pub per_node: Vec<NodeVerdict>,
    /// True iff every condition of every node is valid.
    pub overall: bool,
    pub total_wall: Duration,
    pub median_node_time: Duration,
    pub p99_node_time: Duration,
}

/// Nearest-rank percentile: the value at 1-based rank `⌈pct·n/100⌉` of the sorted samples.
pub fn nearest_rank(samples: &[Duration], pct: usize) -> Duration {
    if samples.is_empty() {
        return Duration::ZERO;
    }
    let mut sorted = samples.to_vec();
    sorted.sort();
    let n = sorted.len();
    let rank = (pct * n).div_ceil(100).clamp(1, n);
    sorted[rank - 1]
}

impl CheckReport {
    pub fn new(procedure: Procedure, delay: u64, per_node: Vec<NodeVerdict>, total_wall: Duration) -> Self {
        let times: Vec<Duration> = per_node.iter().map(NodeVerdict::wall).collect();
        CheckReport {
            procedure,
            delay,
            overall: per_node.iter().all(NodeVerdict::passed),
            median_node_time: nearest_rank(&times, 50),
            p99_node_time: nearest_rank(&times, 99),
            per_node,
            total_wall,
        }
    }

    pub fn node(&self, v: &str) -> Option<&NodeVerdict> {
        self.per_node.iter().find(|n| n.node == v)
    }

    pub fn status(&self) -> Status {
        let outcomes = || self.per_node.iter().flat_map(|n| n.results.iter().map(|r| &r.outcome));
        if self.overall {
            Status::Pass
        } else if outcomes().any(|o| o.counterexample().is_some()) {
            Status::Fail
        } else if outcomes().any(Outcome::inconclusive) {
            Status::Inconclusive
        } else {
            Status::Fail
        }
    }

    /// Nodes with a counterexample, in report order.
    pub fn failing_nodes(&self) -> Vec<&str> {
        self.per_node
            .iter()
            .filter(|n| n.results.iter().any(|r| r.outcome.counterexample().is_some()))
            .map(|n| n.node.as_str())
            .collect()
    }

    /// Human-readable summary with every non-valid condition spelled out.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.procedure == Procedure::StrawpersonUnsound {
            out.push_str("WARNING: time-free check; UNSOUND, for demonstration only\n");
        }
        for nv in &self.per_node {
            let cells: Vec<String> = nv
                .results
                .iter()
                .map(|r| format!("{} {}", r.condition, short(&r.outcome)))
                .collect();
            let _ = writeln!(out, "{}: {}", nv.node, cells.join(", "));
            for r in &nv.results {
                match &r.outcome {
                    Outcome::Counterexample(c) => {
                        let _ = write!(out, "{}", render_counterexample(&nv.node, r.condition, c));
                    }
                    Outcome::Unknown { reason } => {
                        let _ = writeln!(out, "  {} condition unknown: {reason}", r.condition);
                    }
                    Outcome::Failure { detail } => {
                        let _ = writeln!(out, "  {} condition solver failure: {detail}", r.condition);
                    }
                    _ => {}
                }
            }
        }
        let verdict = match self.status() {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        };
        let _ = writeln!(out, "overall: {verdict}");
        let _ = writeln!(
            out,
            "total {:.3}s, median node {:.3}s, p99 node {:.3}s",
            self.total_wall.as_secs_f64(),
            self.median_node_time.as_secs_f64(),
            self.p99_node_time.as_secs_f64()
        );
        out
    }
}

fn short(o: &Outcome) -> &'static str {
    match o {
        Outcome::Valid => "ok",
        Outcome::Counterexample(_) => "FAILED",
        Outcome::Unknown { .. } => "unknown",
        Outcome::Failure { .. } => "error",
        Outcome::Skipped => "skipped",
    }
}

pub fn render_counterexample(node: &str, condition: Condition, c: &Counterexample) -> String {
    let mut out = String::new();
    match c.time {
        Some(t) => {
            let _ = writeln!(out, "  {condition} counterexample at {node}, t={t}");
        }
        None => {
            let _ = writeln!(out, "  {condition} counterexample at {node}");
        }
    }
    if let Some(t) = c.neighbor_time {
        let _ = writeln!(out, "    neighbor routes at t={t}:");
    }
    for (u, r) in &c.routes {
        let _ = writeln!(out, "    {u} = {r}");
    }
    if let Some(r) = &c.result {
        let _ = writeln!(out, "    result at {node} = {r}");
    }
    for (x, val) in &c.symbolics {
        let _ = writeln!(out, "    symbolic {x} = {val}");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("invalid network:\n{}", list(.0))]
    Network(Vec<Diagnostic>),
    #[error("invalid {which}:\n{}", list(.errors))]
    Annotation {
        which: &'static str,
        errors: Vec<TemporalError>,
    },
    #[error(transparent)]
    Temporal(#[from] TemporalError),
}

fn list<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

/// Rejects networks and annotations that are not well-formed.
pub fn validate_inputs(
    n: &NetworkInstance,
    annotations: &[(&'static str, &Annotation)],
) -> Result<(), CheckError> {
    let diags = validate_network(n);
    if !diags.is_empty() {
        return Err(CheckError::Network(diags));
    }
    for (which, a) in annotations {
        let errors = a.validate(n);
        if !errors.is_empty() {
            return Err(CheckError::Annotation { which, errors });
        }
    }
    Ok(())
}

fn base_query(n: &NetworkInstance, goal: Expr) -> Query {
    let mut q = Query::new(goal);
    q.vars = n
        .symbolics
        .iter()
        .map(|s| (s.name.clone(), s.sort.clone()))
        .collect();
    q.hyps = n.assumptions();
    q.alphabet = n.string_alphabet();
    q
}

/// Adds `$a0 = init_v`, `$x.u = T_uv($s.u)` and `$a<i> = $a<i-1> ⊕ $x.u_i` over
/// the sorted in-neighbors, returning the name of the merged route.
fn push_fold(n: &NetworkInstance, v: &str, q: &mut Query) -> String {
    q.defs.push((acc_var(0), n.init_of(v).clone()));
    for (i, u) in n.topology.preds(v).iter().enumerate() {
        let sent = sent_var(u);
        q.defs.push((
            sent.clone(),
            n.transfer_of(u, v).rename_free(TRANSFER_VAR, &route_var(u)),
        ));
        q.defs.push((
            acc_var(i + 1),
            n.merge.rename_many(&[(MERGE_LHS, &acc_var(i)), (MERGE_RHS, &sent)]),
        ));
    }
    acc_var(n.topology.preds(v).len())
}

/// `init_v ∈ A(v)(0)`, for every symbolic assignment satisfying the assumptions.
pub fn vc_initial(n: &NetworkInstance, a: &Annotation, v: &str) -> Query {
    let goal = a.at(v).apply_at(0).rename_free(TRANSFER_VAR, INIT_VAR);
    let mut q = base_query(n, goal);
    q.defs.push((INIT_VAR.to_string(), n.init_of(v).clone()));
    q
}

/// The routes a neighbor may deliver at step `$t + 1`: any route of its
/// interface from times `$t - delay ..= $t`, clipped at 0.
fn window(op: &TemporalOp, delay: u64) -> Expr {
    let t = var(TIME_VAR);
    if delay == 0 {
        return op.lower_at(&t);
    }
    expr::or((0..=delay).map(|k| {
        if k == 0 {
            op.lower_at(&t)
        } else {
            expr::and([expr::int(k).leq(t.clone()), op.lower_at(&t.clone().sub(expr::int(k)))])
        }
    }))
}

/// For every time `$t` and in-neighbor routes drawn from their interfaces,
/// the merged route lies in `A(v)($t + 1)`. With `delay > 0` each neighbor
/// route may come from any of the last `delay + 1` steps.
pub fn vc_inductive(n: &NetworkInstance, a: &Annotation, v: &str, delay: u64) -> Query {
    let mut q = base_query(n, expr::tt());
    q.vars.push((TIME_VAR.to_string(), Sort::Int));
    for u in n.topology.preds(v) {
        q.vars.push((route_var(u), n.route_sort.clone()));
        q.hyps
            .push(window(a.at(u), delay).rename_free(TRANSFER_VAR, &route_var(u)));
    }
    let merged = push_fold(n, v, &mut q);
    let next = var(TIME_VAR).add(expr::int(1));
    q.goal = a.at(v).lower_at(&next).rename_free(TRANSFER_VAR, &merged);
    q
}

/// `A(v)(t) ⊆ P(v)(t)` for every time.
pub fn vc_safety(n: &NetworkInstance, a: &Annotation, p: &Annotation, v: &str) -> Query {
    let s = route_var(v);
    let goal = p.at(v).lower_symbolic(TIME_VAR).rename_free(TRANSFER_VAR, &s);
    let mut q = base_query(n, goal);
    q.vars.push((TIME_VAR.to_string(), Sort::Int));
    q.vars.push((s.clone(), n.route_sort.clone()));
    q.hyps
        .push(a.at(v).lower_symbolic(TIME_VAR).rename_free(TRANSFER_VAR, &s));
    q
}

/// The time-free strawperson condition: neighbor routes drawn from their
/// (time-free) interfaces merge into a route in `A(v)`.
pub fn vc_time_free(n: &NetworkInstance, a: &Annotation, v: &str) -> Result<Query, TemporalError> {
    let mut q = base_query(n, expr::tt());
    for u in n.topology.preds(v) {
        q.vars.push((route_var(u), n.route_sort.clone()));
        q.hyps
            .push(a.at(u).time_free()?.rename_free(TRANSFER_VAR, &route_var(u)));
    }
    let merged = push_fold(n, v, &mut q);
    q.goal = a.at(v).time_free()?.rename_free(TRANSFER_VAR, &merged);
    Ok(q)
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub delay: u64,
    /// Worker threads; 0 is treated as 1.
    pub jobs: usize,
    pub solver: SolverConfig,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            delay: 0,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            solver: SolverConfig::default(),
        }
    }
}

/// Checks nodes of one network against an interface and a property.
pub struct Checker<'a> {
    n: &'a NetworkInstance,
    a: &'a Annotation,
    p: &'a Annotation,
    opts: &'a CheckOptions,
    /// For closed networks, the synchronous run used to report reachable
    /// counterexamples when one exists.
    trace: Option<SimulationTrace>,
}

impl<'a> Checker<'a> {
    pub fn new(
        n: &'a NetworkInstance,
        a: &'a Annotation,
        p: &'a Annotation,
        opts: &'a CheckOptions,
    ) -> Result<Checker<'a>, CheckError> {
        validate_inputs(n, &[("interface", a), ("property", p)])?;
        let trace = if n.is_closed() && opts.delay == 0 {
            let steps = 2 * n.topology.nodes().len() as u64 + a.max_tau() + 2;
            simulate(n, steps).ok()
        } else {
            None
        };
        Ok(Checker { n, a, p, opts, trace })
    }

    /// Initial, inductive and safety conditions in order, stopping at the first
    /// that does not hold.
    pub fn check_node(&self, v: &str) -> NodeVerdict {
        let conditions = [Condition::Initial, Condition::Inductive, Condition::Safety];
        let mut results = Vec::with_capacity(3);
        let mut stopped = false;
        for cond in conditions {
            if stopped {
                results.push(ConditionResult {
                    condition: cond,
                    outcome: Outcome::Skipped,
                    wall: Duration::ZERO,
                });
                continue;
            }
            let start = Instant::now();
            let q = match cond {
                Condition::Initial => vc_initial(self.n, self.a, v),
                Condition::Inductive => vc_inductive(self.n, self.a, v, self.opts.delay),
                _ => vc_safety(self.n, self.a, self.p, v),
            };
            let outcome = self.decide(cond, v, &q);
            stopped = !outcome.is_valid();
            results.push(ConditionResult {
                condition: cond,
                outcome,
                wall: start.elapsed(),
            });
        }
        NodeVerdict {
            node: v.to_string(),
            results,
        }
    }

    /// Checks every node on a pool of `jobs` workers.
    pub fn run(&self) -> CheckReport {
        let start = Instant::now();
        let per_node = parallel_nodes(self.n, self.opts.jobs, |v| self.check_node(v));
        CheckReport::new(Procedure::Modular, self.opts.delay, per_node, start.elapsed())
    }

    fn decide(&self, cond: Condition, v: &str, q: &Query) -> Outcome {
        let label = format!("{v}.{cond}");
        match q.check(&self.opts.solver, &label) {
            Verdict::Valid => Outcome::Valid,
            Verdict::Unknown(reason) => Outcome::Unknown { reason },
            Verdict::Failure(detail) => Outcome::Failure { detail },
            Verdict::Counterexample(model) => {
                if let Err(detail) = confirm(q, &model, cond) {
                    return Outcome::Failure { detail };
                }
                let model = self.sharpen(cond, v, q, model, &label);
                describe(self.n, cond, v, q, &model)
            }
        }
    }

    /// Replaces the solver's model with a simulated one when the violation is
    /// reachable, otherwise with the earliest violating time.
    fn sharpen(
        &self,
        cond: Condition,
        v: &str,
        q: &Query,
        model: BTreeMap<String, Value>,
        label: &str,
    ) -> BTreeMap<String, Value> {
        if !matches!(cond, Condition::Inductive | Condition::Safety) {
            return model;
        }
        if let Some(m) = self.simulated_witness(cond, v, q) {
            return m;
        }
        let bound = match cond {
            Condition::Inductive => {
                let preds = self.n.topology.preds(v).iter().map(|u| self.a.at(u).max_tau());
                preds.fold(self.a.at(v).max_tau(), u64::max) + self.opts.delay
            }
            _ => self.a.at(v).max_tau().max(self.p.at(v).max_tau()),
        };
        let found = time_of(&model).unwrap_or(0);
        for k in 0..found.min(bound + 1) {
            let mut pinned = q.clone();
            pinned.hyps.push(var(TIME_VAR).eq(expr::int(k)));
            match pinned.check(&self.opts.solver, &format!("{label}.t{k}")) {
                Verdict::Valid => continue,
                Verdict::Counterexample(m) if confirm(q, &m, cond).is_ok() => return m,
                _ => break,
            }
        }
        model
    }

    fn simulated_witness(&self, cond: Condition, v: &str, q: &Query) -> Option<BTreeMap<String, Value>> {
        let trace = self.trace.as_ref()?;
        let last = trace.horizon.max(self.a.max_tau().max(self.p.max_tau()) + 1);
        for t in 0..=last {
            let mut m = BTreeMap::new();
            m.insert(TIME_VAR.to_string(), Value::int(t));
            let senders: Vec<&String> = match cond {
                Condition::Inductive => self.n.topology.preds(v).iter().collect(),
                _ => vec![],
            };
            for u in senders {
                m.insert(route_var(u), trace.state_at(u, t)?.clone());
            }
            if cond == Condition::Safety {
                m.insert(route_var(v), trace.state_at(v, t)?.clone());
            }
            if q.falsified_by(&m) == Ok(true) {
                return Some(m);
            }
        }
        None
    }
}

/// Rejects models that do not falsify the query under the concrete evaluator.
fn confirm(q: &Query, model: &BTreeMap<String, Value>, cond: Condition) -> Result<(), String> {
    match q.falsified_by(model) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("solver model does not falsify the {cond} condition")),
        Err(e) => Err(format!("solver model cannot be evaluated: {e}")),
    }
}

fn time_of(model: &BTreeMap<String, Value>) -> Option<u64> {
    match model.get(TIME_VAR)? {
        Value::Int(n) => n.to_u64(),
        _ => None,
    }
}

fn describe(
    n: &NetworkInstance,
    cond: Condition,
    v: &str,
    q: &Query,
    model: &BTreeMap<String, Value>,
) -> Outcome {
    let env: ValueEnv = match q.bind_defs(model) {
        Ok(env) => env,
        Err(e) => {
            return Outcome::Failure {
                detail: format!("solver model cannot be evaluated: {e}"),
            }
        }
    };
    let symbolics = n
        .symbolics
        .iter()
        .filter_map(|s| Some((s.name.clone(), model.get(&s.name)?.clone())))
        .collect();
    let t = time_of(model);
    let preds = n.topology.preds(v);
    let neighbor_routes = || {
        preds
            .iter()
            .filter_map(|u| Some((u.clone(), env.get(&route_var(u))?.clone())))
            .collect()
    };
    let merged = env.get(&acc_var(preds.len())).cloned();
    let c = match cond {
        Condition::Initial => {
            let init = env.get(INIT_VAR).cloned();
            Counterexample {
                time: Some(0),
                neighbor_time: None,
                routes: init.iter().map(|r| (v.to_string(), r.clone())).collect(),
                symbolics,
                result: init,
            }
        }
        Condition::Inductive => Counterexample {
            time: t.map(|t| t + 1),
            neighbor_time: t,
            routes: neighbor_routes(),
            symbolics,
            result: merged,
        },
        Condition::TimeFree => Counterexample {
            time: None,
            neighbor_time: None,
            routes: neighbor_routes(),
            symbolics,
            result: merged,
        },
        Condition::Safety | Condition::Stable => Counterexample {
            time: t,
            neighbor_time: None,
            routes: env
                .get(&route_var(v))
                .map(|r| (v.to_string(), r.clone()))
                .into_iter()
                .collect(),
            symbolics,
            result: None,
        },
    };
    Outcome::Counterexample(c)
}

/// Runs `f` on every node with at most `jobs` threads, returning results in node order.
pub(crate) fn parallel_nodes<F>(n: &NetworkInstance, jobs: usize, f: F) -> Vec<NodeVerdict>
where
    F: Fn(&str) -> NodeVerdict + Sync,
{
    let nodes = n.topology.nodes();
    let slots: Mutex<Vec<Option<NodeVerdict>>> = Mutex::new(vec![None; nodes.len()]);
    let next = AtomicUsize::new(0);
    let workers = jobs.max(1).min(nodes.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(v) = nodes.get(i) else { break };
                let verdict = f(v);
                slots.lock().unwrap()[i] = Some(verdict);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|s| s.expect("every node checked"))
        .collect()
}

/// Checks every node of `n` against interface `a` and property `p`.
pub fn check_modular(
    n: &NetworkInstance,
    a: &Annotation,
    p: &Annotation,
    opts: &CheckOptions,
) -> Result<CheckReport, CheckError> {
    Ok(Checker::new(n, a, p, opts)?.run())
}

/// Checks a single node; see [`Checker::check_node`].
pub fn check_node(
    n: &NetworkInstance,
    a: &Annotation,
    p: &Annotation,
    v: &str,
    opts: &CheckOptions,
) -> Result<NodeVerdict, CheckError> {
    Ok(Checker::new(n, a, p, opts)?.check_node(v))
}

/// The time-free modular check. It accepts interfaces that exclude every
/// reachable state, so a pass proves nothing; it exists to show that failure.
pub fn check_strawperson(
    n: &NetworkInstance,
    a: &Annotation,
    opts: &CheckOptions,
) -> Result<CheckReport, CheckError> {
    validate_inputs(n, &[("interface", a)])?;
    for v in n.topology.nodes() {
        a.at(v).time_free()?;
    }
    let start = Instant::now();
    let per_node = parallel_nodes(n, opts.jobs, |v| {
        let began = Instant::now();
        let q = vc_time_free(n, a, v).expect("checked time-free above");
        let outcome = match q.check(&opts.solver, &format!("{v}.time-free")) {
            Verdict::Valid => Outcome::Valid,
            Verdict::Unknown(reason) => Outcome::Unknown { reason },
            Verdict::Failure(detail) => Outcome::Failure { detail },
            Verdict::Counterexample(model) => match confirm(&q, &model, Condition::TimeFree) {
                Ok(()) => describe(n, Condition::TimeFree, v, &q, &model),
                Err(detail) => Outcome::Failure { detail },
            },
        };
        NodeVerdict {
            node: v.to_string(),
            results: vec![ConditionResult {
                condition: Condition::TimeFree,
                outcome,
                wall: began.elapsed(),
            }],
        }
    });
    Ok(CheckReport::new(
        Procedure::StrawpersonUnsound,
        0,
        per_node,
        start.elapsed(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(v: &[u64]) -> Vec<Duration> {
        v.iter().map(|&x| Duration::from_millis(x)).collect()
    }

    #[test]
    fn nearest_rank_percentiles() {
        let xs = ms(&[5, 1, 4, 2, 3]);
        assert_eq!(nearest_rank(&xs, 50), Duration::from_millis(3));
        assert_eq!(nearest_rank(&xs, 99), Duration::from_millis(5));
        assert_eq!(nearest_rank(&ms(&[7]), 50), Duration::from_millis(7));
        assert_eq!(nearest_rank(&[], 50), Duration::ZERO);
        let hundred: Vec<u64> = (1..=100).collect();
        assert_eq!(nearest_rank(&ms(&hundred), 99), Duration::from_millis(99));
        assert_eq!(nearest_rank(&ms(&hundred), 50), Duration::from_millis(50));
    }

    #[test]
    fn window_at_delay_zero_is_plain_lowering() {
        let op = crate::temporal::until(var("s").eq(expr::int(0)), 2, crate::temporal::globally(expr::tt()));
        assert_eq!(window(&op, 0), op.lower_symbolic(TIME_VAR));
        match window(&op, 2) {
            Expr::Or(items) => assert_eq!(items.len(), 3),
            other => panic!("{other}"),
        }
    }
}
