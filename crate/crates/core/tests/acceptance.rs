//! Acceptance gate: every criterion runs in sequence (timings are part of
//! several of them) and prints one PASS/FAIL line. The test fails if any
//! criterion does.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};
use tempnet::bench::fattree::{self, Dest, Policy};
use tempnet::bench::random::{candidate_interface, random_closed_network, weaker_property};
use tempnet::bench::{by_name, running, wan};
use tempnet::model::expr::{self, case, var, Expr};
use tempnet::model::gen::ExprGen;
use tempnet::model::network::{MERGE_LHS, MERGE_RHS, TRANSFER_VAR};
use tempnet::model::{eval, sort_check, NetworkInstance, Sort, Value};
use tempnet::modular::{
    check_modular, check_strawperson, route_var, vc_inductive, vc_initial, vc_safety, CheckOptions,
    CheckReport, Condition, Outcome, Status, TIME_VAR,
};
use tempnet::monolithic::check_monolithic;
use tempnet::sim::{delayed_simulate, simulate, singleton_interface};
use tempnet::smt::solver::SolverConfig;
use tempnet::smt::{evaluate_pinned, Query, Verdict};
use tempnet::temporal::Annotation;

// Pinned tolerances.
const SIMULATE_BUDGET: Duration = Duration::from_secs(1);
const GOOD_INTERFACES_BUDGET: Duration = Duration::from_secs(30);
const NODE_BUDGET: Duration = Duration::from_secs(10);
const K8_SUITE_BUDGET: Duration = Duration::from_secs(600);
const MODULAR_GROWTH_LIMIT: f64 = 3.0;
const MONOLITHIC_GROWTH_MIN: f64 = 10.0;
const MONOLITHIC_BUDGET: Duration = Duration::from_secs(600);
const CORPUS_SIZE: u64 = 50;
const CORPUS_MAX_NODES: usize = 6;
const PAIRS_PER_FAMILY: usize = 1000;
const MIN_COUNTEREXAMPLES: usize = 20;
const DELAY_SCHEDULES: u64 = 25;
const WAN_BUDGET: Duration = Duration::from_secs(60);

type Check = Result<String, String>;

/// Binder the benchmark predicates use for the route inside an option.
const R: &str = "r";

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn opts(delay: u64) -> CheckOptions {
    CheckOptions {
        delay,
        ..CheckOptions::default()
    }
}

fn count_valid(r: &CheckReport) -> usize {
    r.per_node.iter().map(|n| n.valid_count()).sum()
}

const RUNNING_TABLE: &str = "\
time  n  w              v             d             e
0     ∅  ⟨100,0,false⟩  ∅             ∅             ∅
1     ∅  ⟨100,0,false⟩  ⟨100,1,true⟩  ∅             ∅
2     ∅  ⟨100,0,false⟩  ⟨100,1,true⟩  ⟨100,2,true⟩  ∅
3     ∅  ⟨100,0,false⟩  ⟨100,1,true⟩  ⟨100,2,true⟩  ⟨100,3,true⟩
4     ∅  ⟨100,0,false⟩  ⟨100,1,true⟩  ⟨100,2,true⟩  ⟨100,3,true⟩
converged at t=3
";

fn running_simulation() -> Check {
    let start = Instant::now();
    let trace = simulate(&running::network(), 100).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(trace.converged_at == Some(3), "converged at {:?}", trace.converged_at);
    let last = trace.final_state();
    ensure!(last["e"] == running::route(100, 3, true), "e = {}", last["e"]);
    ensure!(last["v"] == running::route(100, 1, true), "v = {}", last["v"]);
    ensure!(last["d"] == running::route(100, 2, true), "d = {}", last["d"]);
    let table = trace.to_table();
    ensure!(table == RUNNING_TABLE, "table differs:\n{table}");
    let again = simulate(&running::network(), 100).unwrap().to_table();
    ensure!(again == table, "table is not byte-stable");
    ensure!(elapsed < SIMULATE_BUDGET, "took {elapsed:?}");
    Ok(format!("converged at t=3, {elapsed:?}"))
}

fn good_interfaces() -> Check {
    let start = Instant::now();
    let mut notes = Vec::new();
    for id in ["weak-tag", "reach", "ghost"] {
        let f = running::by_id(id).unwrap();
        let r = check_modular(&f.network, &f.interfaces, &f.properties, &opts(0))
            .map_err(|e| e.to_string())?;
        ensure!(r.status() == Status::Pass, "{id}:\n{}", r.to_text());
        ensure!(count_valid(&r) == 15, "{id}: {} valid conditions", count_valid(&r));
        notes.push(format!("{id} 15/15"));
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < GOOD_INTERFACES_BUDGET, "took {elapsed:?}");
    Ok(format!("{}, {elapsed:?}", notes.join(", ")))
}

fn unsoundness_demonstration() -> Check {
    let n = running::network();
    let bad = running::strawperson();
    let r = check_strawperson(&n, &bad, &opts(0)).map_err(|e| e.to_string())?;
    ensure!(
        r.per_node.iter().all(|v| v.passed()) && r.per_node.len() == 5,
        "time-free check rejected:\n{}",
        r.to_text()
    );
    let trace = simulate(&n, 100).unwrap();
    let e = &trace.final_state()["e"];
    let holds = bad.at("e").holds_at(trace.horizon, e, &Default::default()).unwrap();
    ensure!(!holds, "converged e = {e} satisfies A(e)");

    let f = running::by_id("bad-temporal").unwrap();
    let r = check_modular(&f.network, &f.interfaces, &f.properties, &opts(0)).unwrap();
    ensure!(r.failing_nodes() == ["v", "d"], "failing: {:?}", r.failing_nodes());
    for v in ["v", "d"] {
        let c = r.node(v).unwrap().outcome(Condition::Initial).and_then(Outcome::counterexample);
        ensure!(c.map(|c| c.time) == Some(Some(0)), "{v}: {:?}", c);
    }

    let f = running::by_id("patched").unwrap();
    let r = check_modular(&f.network, &f.interfaces, &f.properties, &opts(0)).unwrap();
    let v = r.node("v").unwrap();
    let c = v.outcome(Condition::Inductive).and_then(Outcome::counterexample);
    let Some(c) = c else {
        return Err(format!("no inductive counterexample at v:\n{}", r.to_text()));
    };
    ensure!(c.time == Some(1), "time {:?}", c.time);
    ensure!(
        c.result == Some(running::route(100, 1, true)),
        "merged route {:?}",
        c.result.as_ref().map(ToString::to_string)
    );
    Ok("strawperson accepts, e converges outside A(e); t=0 at v,d; patched t=1 ⟨100,1,true⟩".into())
}

/// Hop distances from `src` by breadth-first search.
fn bfs(n: &NetworkInstance, src: &str) -> BTreeMap<String, u64> {
    let mut dist = BTreeMap::from([(src.to_string(), 0)]);
    let mut queue = VecDeque::from([src.to_string()]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        for w in n.topology.succs(&u) {
            if !dist.contains_key(w) {
                dist.insert(w.to_string(), d + 1);
                queue.push_back(w.to_string());
            }
        }
    }
    dist
}

fn fattree_structure() -> Check {
    for k in [2usize, 4, 8] {
        let l = fattree::fattree(k).unwrap();
        ensure!(4 * l.nodes().len() == 5 * k * k, "k={k}: {} nodes", l.nodes().len());
        ensure!(l.topology().edges().len() == k * k * k, "k={k}: {} edges", l.edges().len());
    }
    let l = fattree::fattree(4).unwrap();
    let f = fattree::build(Policy::Reach, &l, &Dest::Node(l.default_dest().into())).unwrap();
    let mut pairs = 0;
    for dest in l.edge_nodes() {
        let oracle = bfs(&f.network, dest);
        for v in l.nodes() {
            let d = fattree::distance(&l, dest, v).unwrap();
            ensure!(oracle[v] == d, "distance({dest}, {v}) = {d}, BFS {}", oracle[v]);
            pairs += 1;
        }
    }
    Ok(format!("k=2,4,8 counts; {pairs} distance pairs match BFS"))
}

fn run_suite(names: &[&str], k: usize, all: bool, slowest: &mut Duration) -> Result<Vec<String>, String> {
    let mut notes = Vec::new();
    for name in names {
        let f = by_name(name, k, all).unwrap();
        let r = check_modular(&f.network, &f.interfaces, &f.properties, &opts(0))
            .map_err(|e| e.to_string())?;
        ensure!(r.status() == Status::Pass, "{}:\n{}", f.name, r.to_text());
        let worst = r.per_node.iter().map(|n| n.wall()).max().unwrap_or_default();
        ensure!(worst < NODE_BUDGET, "{}: slowest node {worst:?}", f.name);
        *slowest = (*slowest).max(worst);
        notes.push(format!("{} {:.1}s", f.name, r.total_wall.as_secs_f64()));
    }
    Ok(notes)
}

fn desk_scale_benchmarks() -> Check {
    let suite = ["reach", "length", "vf", "hijack"];
    let mut slowest = Duration::ZERO;
    let mut notes = run_suite(&suite, 4, false, &mut slowest)?;
    notes.extend(run_suite(&["reach", "hijack"], 4, true, &mut slowest)?);
    let start = Instant::now();
    notes.extend(run_suite(&suite, 8, false, &mut slowest)?);
    let k8 = start.elapsed();
    ensure!(k8 < K8_SUITE_BUDGET, "k=8 suite took {k8:?}");
    Ok(format!("{}; slowest node {slowest:.2?}, k=8 suite {k8:.1?}", notes.join(", ")))
}

fn scaling_trend() -> Check {
    let median = |k: usize| -> Result<Duration, String> {
        let f = by_name("length", k, false).unwrap();
        let r = check_modular(&f.network, &f.interfaces, &f.properties, &opts(0))
            .map_err(|e| e.to_string())?;
        ensure!(r.status() == Status::Pass, "k={k}:\n{}", r.to_text());
        Ok(r.median_node_time)
    };
    let (m4, m12) = (median(4)?, median(12)?);
    let modular = m12.as_secs_f64() / m4.as_secs_f64();
    ensure!(modular < MODULAR_GROWTH_LIMIT, "modular median grew {modular:.2}× ({m4:?} → {m12:?})");

    let f4 = by_name("length", 4, false).unwrap();
    let r4 = check_monolithic(&f4.network, &f4.properties, &SolverConfig::default())
        .map_err(|e| e.to_string())?;
    ensure!(r4.status() == Status::Pass, "monolithic k=4:\n{}", r4.to_text());
    let t4 = r4.total_wall;
    // Anything slower than the growth bound already satisfies the criterion,
    // so the k=12 run is cut off there.
    let cutoff = t4.mul_f64(MONOLITHIC_GROWTH_MIN).min(MONOLITHIC_BUDGET);
    let f12 = by_name("length", 12, false).unwrap();
    let solver = SolverConfig {
        timeout: Some(cutoff),
        ..SolverConfig::default()
    };
    let r12 = check_monolithic(&f12.network, &f12.properties, &solver).map_err(|e| e.to_string())?;
    let t12 = r12.total_wall;
    let finished = r12.status() == Status::Pass;
    let mono = t12.as_secs_f64() / t4.as_secs_f64();
    ensure!(
        !finished || mono >= MONOLITHIC_GROWTH_MIN,
        "monolithic grew only {mono:.1}× ({t4:?} → {t12:?})"
    );
    ensure!(r12.status() != Status::Fail, "monolithic k=12 found a counterexample");
    let mono_note = if finished {
        format!("{mono:.1}×")
    } else {
        format!("> {MONOLITHIC_GROWTH_MIN}× (cut off after {t12:.1?})")
    };
    Ok(format!(
        "modular median {m4:.2?} → {m12:.2?} ({modular:.2}×); monolithic {t4:.2?} → {mono_note}"
    ))
}

/// Checks the random corpus; returns (networks, passing annotations, soundness
/// violations, completeness failures).
struct CorpusRun {
    networks: u64,
    passing: usize,
    states: usize,
    violations: Vec<String>,
    incomplete: Vec<String>,
}

fn corpus() -> CorpusRun {
    let mut run = CorpusRun {
        networks: 0,
        passing: 0,
        states: 0,
        violations: Vec::new(),
        incomplete: Vec::new(),
    };
    for seed in 0..CORPUS_SIZE {
        let n = random_closed_network(seed, CORPUS_MAX_NODES);
        let trace = simulate(&n, 50).unwrap();
        assert!(trace.converged_at.is_some(), "seed {seed} did not converge");
        run.networks += 1;
        let singleton = singleton_interface(&trace).unwrap();
        let mut candidates = vec![singleton.clone()];
        candidates.extend((0..3).map(|i| candidate_interface(&n, &trace, seed * 10 + i)));
        for (ci, a) in candidates.iter().enumerate() {
            let p = weaker_property(a);
            let r = check_modular(&n, a, &p, &opts(0)).unwrap();
            if ci == 0 {
                for v in &r.per_node {
                    for c in [Condition::Initial, Condition::Inductive] {
                        if !v.outcome(c).is_some_and(Outcome::is_valid) {
                            run.incomplete.push(format!("seed {seed} node {} {c}", v.node));
                        }
                    }
                }
            }
            if r.status() != Status::Pass {
                continue;
            }
            run.passing += 1;
            for v in n.topology.nodes() {
                for t in 0..=trace.horizon {
                    let s = trace.state(v, t);
                    run.states += 1;
                    for (which, ann) in [("A", a), ("P", &p)] {
                        if !ann.at(v).holds_at(t, s, &Default::default()).unwrap() {
                            run.violations.push(format!("seed {seed} candidate {ci}: {which}({v}) at t={t} rejects {s}"));
                        }
                    }
                }
            }
        }
    }
    run
}

fn soundness(run: &CorpusRun) -> Check {
    ensure!(run.networks >= CORPUS_SIZE, "{} networks", run.networks);
    ensure!(run.violations.is_empty(), "{} violations, first: {}", run.violations.len(), run.violations[0]);
    Ok(format!(
        "{} networks, {} passing annotations, {} states checked, 0 violations",
        run.networks, run.passing, run.states
    ))
}

fn completeness(run: &CorpusRun) -> Check {
    ensure!(run.incomplete.is_empty(), "{} failures, first: {}", run.incomplete.len(), run.incomplete[0]);
    Ok(format!("singleton interfaces pass on all {} networks", run.networks))
}

fn differential_backend() -> Check {
    let gen = ExprGen::default();
    let senv = gen.sort_env();
    let cfg = SolverConfig::default();
    let mut pairs = 0;
    for (fi, (name, sort)) in ExprGen::families().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(77 + fi as u64);
        for batch in 0..PAIRS_PER_FAMILY / 100 {
            let items: Vec<_> = (0..100).map(|_| (gen.expr(&sort, 4, &mut rng), gen.env(&mut rng))).collect();
            let got = evaluate_pinned(&items, &cfg, &format!("acc-{name}-{batch}"))?;
            for ((e, env), solver) in items.iter().zip(got) {
                ensure!(sort_check(e, &senv).as_ref() == Ok(&sort), "{name}: ill-sorted {e}");
                let want = eval(e, env).map_err(|err| err.to_string())?;
                ensure!(solver == want, "{name}: {e} gives {solver} in the solver, {want} concretely");
                pairs += 1;
            }
        }
    }

    // Counterexample round trip over failing candidate interfaces.
    let mut models = 0;
    let mut seed = 0;
    while models < MIN_COUNTEREXAMPLES && seed < 200 {
        let n = random_closed_network(seed, CORPUS_MAX_NODES);
        let trace = simulate(&n, 50).unwrap();
        let a = candidate_interface(&n, &trace, 5000 + seed);
        let p = Annotation::from_fn(&n, |v| running_like_property(v, &trace));
        for v in n.topology.nodes() {
            for q in [vc_initial(&n, &a, v), vc_inductive(&n, &a, v, 0), vc_safety(&n, &a, &p, v)] {
                if let Verdict::Counterexample(model) = q.check(&cfg, "acc-cex") {
                    let falsified = q.falsified_by(&model).map_err(|e| e.to_string())?;
                    ensure!(falsified, "seed {seed} node {v}: model does not falsify the VC");
                    models += 1;
                }
            }
        }
        seed += 1;
    }
    ensure!(models >= MIN_COUNTEREXAMPLES, "only {models} counterexample models");
    Ok(format!("{pairs} (expr, env) pairs agree; {models} counterexample models falsify their VCs"))
}

/// A property that is false late in the run: the node never holds its final route.
fn running_like_property(v: &str, trace: &tempnet::sim::SimulationTrace) -> tempnet::temporal::TemporalOp {
    let last = trace.final_state()[v].clone();
    tempnet::temporal::globally(var(TRANSFER_VAR).neq(expr::lit(last)))
}

fn is_null(x: &str) -> Expr {
    case(var(x), expr::tt(), R, expr::ff())
}

fn tagged(x: &str) -> Expr {
    case(var(x), expr::ff(), R, var(R).get("tag"))
}

/// The inductive condition at `v` for the reachability interfaces, written out by hand.
fn golden_inductive_v(n: &NetworkInstance) -> Query {
    let t = || var(TIME_VAR);
    let sort = running::route_sort(false);
    let mut q = Query::new(expr::tt());
    q.vars = vec![
        (TIME_VAR.to_string(), Sort::Int),
        ("$s.d".into(), sort.clone()),
        ("$s.n".into(), sort.clone()),
        ("$s.w".into(), sort),
    ];
    q.hyps = vec![
        expr::ite(t().lt(expr::int(2)), is_null("$s.d"), tagged("$s.d")),
        expr::tt(),
        case(var("$s.w"), expr::ff(), R, var(R).get("lp").eq(expr::bv(32, 100))),
    ];
    q.defs.push(("$a0".into(), expr::lit(running::null(false))));
    for (i, u) in ["d", "n", "w"].iter().enumerate() {
        let sent = format!("$x.{u}");
        q.defs.push((sent.clone(), n.transfer[&(u.to_string(), "v".to_string())].rename_free(TRANSFER_VAR, &format!("$s.{u}"))));
        let prev = format!("$a{i}");
        q.defs.push((format!("$a{}", i + 1), n.merge.rename_many(&[(MERGE_LHS, &prev), (MERGE_RHS, &sent)])));
    }
    let next = t().add(expr::int(1));
    q.goal = expr::ite(next.lt(expr::int(1)), is_null("$a3"), tagged("$a3"));
    q.alphabet = n.string_alphabet();
    q
}

fn delay_extension() -> Check {
    let n = running::network();
    let reach = running::reach();
    let q = vc_inductive(&n, &reach, "v", 0);
    let golden = golden_inductive_v(&n);
    ensure!(route_var("d") == "$s.d", "route variable naming changed");
    ensure!(q == golden, "delay-0 inductive condition differs from the hand-built one");
    let (a, b) = (q.render(None).unwrap().text, golden.render(None).unwrap().text);
    ensure!(a == b, "rendered scripts differ");

    let r = check_modular(&n, &reach, &reach, &opts(1)).map_err(|e| e.to_string())?;
    ensure!(r.status() == Status::Fail, "exact witnesses pass under delay 1:\n{}", r.to_text());
    let exact_failing = r.failing_nodes().join(",");
    let padded = running::reach_delay_padded();
    let r = check_modular(&n, &padded, &padded, &opts(1)).map_err(|e| e.to_string())?;
    ensure!(r.status() == Status::Pass, "padded interfaces fail under delay 1:\n{}", r.to_text());
    for seed in 0..DELAY_SCHEDULES {
        let trace = delayed_simulate(&n, 1, seed, 40).map_err(|e| e.to_string())?;
        for v in n.topology.nodes() {
            for t in 0..=trace.horizon {
                let s = trace.state(v, t);
                let ok = padded.at(v).holds_at(t, s, &Default::default()).unwrap();
                ensure!(ok, "schedule {seed}: {v} at t={t} holds {s}, outside the padded interface");
            }
        }
    }
    Ok(format!(
        "delay 0 matches hand-built encoding; delay 1: exact fails at {exact_failing}, padded passes and holds on {DELAY_SCHEDULES} delayed schedules"
    ))
}

fn wan_bte() -> Check {
    let start = Instant::now();
    let good = wan::build_wan_bte();
    let r = check_modular(&good.network, &good.interfaces, &good.properties, &opts(0)).unwrap();
    ensure!(r.status() == Status::Pass, "wan-bte:\n{}", r.to_text());
    let broken = wan::build_wan_bte_broken();
    let r = check_modular(&broken.network, &broken.interfaces, &broken.properties, &opts(0)).unwrap();
    let (from, to) = wan::BROKEN_EXPORT;
    ensure!(r.failing_nodes() == [to], "failing nodes {:?}", r.failing_nodes());
    let c = r.node(to).unwrap().first_failure().and_then(|f| f.outcome.counterexample()).unwrap();
    let leak = c.routes.get(from).and_then(|route| match route {
        Value::Option { value: Some(rec), .. } => rec.field("comms").cloned(),
        _ => None,
    });
    ensure!(
        matches!(&leak, Some(Value::StringSet(s)) if s.contains(wan::BTE)),
        "counterexample does not show a BTE route from {from}: {:?}",
        c.routes
    );
    let elapsed = start.elapsed();
    ensure!(elapsed < WAN_BUDGET, "took {elapsed:?}");
    Ok(format!("passes; broken export fails at {to} via {from}, {elapsed:.1?}"))
}

#[test]
fn acceptance() {
    let mut failures = Vec::new();
    let mut record = |id: u32, name: &str, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(&mut *f))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()))));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(note) => println!("criterion {id:>2} PASS  {name} [{secs:.1}s]: {note}"),
            Err(why) => {
                println!("criterion {id:>2} FAIL  {name} [{secs:.1}s]: {why}");
                failures.push(id);
            }
        }
    };
    record(1, "running-example simulation", &mut running_simulation);
    record(2, "good interfaces verify", &mut good_interfaces);
    record(3, "unsoundness demonstration", &mut unsoundness_demonstration);
    record(4, "fattree structure", &mut fattree_structure);
    record(5, "desk-scale benchmarks", &mut desk_scale_benchmarks);
    record(6, "scaling trend", &mut scaling_trend);
    let run = std::cell::OnceCell::new();
    record(7, "soundness corpus", &mut || soundness(run.get_or_init(corpus)));
    record(8, "completeness corpus", &mut || completeness(run.get_or_init(corpus)));
    record(9, "differential backend", &mut differential_backend);
    record(10, "delay extension", &mut delay_extension);
    record(11, "WAN BTE", &mut wan_bte);
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
