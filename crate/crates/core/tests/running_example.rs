use tempnet::bench::running::{self, reach, reach_delay_padded, strawperson};
use tempnet::bench::Expected;
use tempnet::modular::{
    check_modular, check_strawperson, CheckOptions, Condition, Outcome, Status,
};
use tempnet::monolithic::check_monolithic;
use tempnet::sim::simulate;
use tempnet::temporal::TemporalOp;

fn opts(delay: u64) -> CheckOptions {
    CheckOptions {
        delay,
        ..CheckOptions::default()
    }
}

#[test]
fn fixtures_meet_expectations() {
    for f in running::fixtures() {
        let r = check_modular(&f.network, &f.interfaces, &f.properties, &opts(0)).unwrap();
        let want = match f.expected {
            Expected::Pass => Status::Pass,
            Expected::Fail => Status::Fail,
        };
        assert_eq!(r.status(), want, "{}\n{}", f.name, r.to_text());
    }
}

#[test]
fn strawperson_is_accepted_by_the_time_free_check_only() {
    let n = running::network();
    let a = strawperson();
    let r = check_strawperson(&n, &a, &opts(0)).unwrap();
    assert_eq!(r.status(), Status::Pass, "{}", r.to_text());

    let trace = simulate(&n, 20).unwrap();
    let e = trace.final_state()["e"].clone();
    assert!(!e.is_none(), "e converges to a route");
    assert!(!a.at("e").holds_at(trace.horizon, &e, &Default::default()).unwrap());
}

#[test]
fn bad_temporal_fails_initially_at_v_and_d() {
    let f = running::by_id("bad-temporal").unwrap();
    let r = check_modular(&f.network, &f.interfaces, &f.properties, &opts(0)).unwrap();
    assert_eq!(r.failing_nodes(), ["v", "d"]);
    for v in ["v", "d"] {
        let o = r.node(v).unwrap().outcome(Condition::Initial).unwrap();
        let c = o.counterexample().expect("counterexample");
        assert_eq!(c.time, Some(0));
    }
}

#[test]
fn patched_fails_inductively_at_v_with_time_one() {
    let f = running::by_id("patched").unwrap();
    let r = check_modular(&f.network, &f.interfaces, &f.properties, &opts(0)).unwrap();
    let v = r.node("v").unwrap();
    assert!(v.outcome(Condition::Initial).unwrap().is_valid());
    let c = v
        .outcome(Condition::Inductive)
        .unwrap()
        .counterexample()
        .expect("inductive counterexample");
    assert_eq!(c.time, Some(1), "{}", r.to_text());
    assert_eq!(c.routes["w"], running::route(100, 0, false));
}

#[test]
fn reach_needs_padding_under_delay() {
    let n = running::network();
    let r = check_modular(&n, &reach(), &reach(), &opts(1)).unwrap();
    assert_eq!(r.status(), Status::Fail, "{}", r.to_text());
    assert!(r.failing_nodes().contains(&"d"));

    let padded = reach_delay_padded();
    for delay in [0, 1] {
        let r = check_modular(&n, &padded, &padded, &opts(delay)).unwrap();
        assert_eq!(r.status(), Status::Pass, "delay {delay}\n{}", r.to_text());
    }
}

#[test]
fn monolithic_agrees_on_the_closed_network() {
    let n = running::network();
    let r = check_monolithic(&n, &reach(), &Default::default()).unwrap();
    assert_eq!(r.status(), Status::Pass, "{}", r.to_text());

    let mut p = reach();
    p.set("e", TemporalOp::Globally(tempnet::bench::is_null()));
    let r = check_monolithic(&n, &p, &Default::default()).unwrap();
    assert_eq!(r.status(), Status::Fail);
    assert!(matches!(r.per_node[0].results[0].outcome, Outcome::Counterexample(_)));
}
