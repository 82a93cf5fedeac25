//! SMT-LIB backend: validity queries, script generation, and model decoding.

pub mod encode;
pub mod sexp;
pub mod solver;

use crate::model::eval::{eval, eval_bool, EvalError, ValueEnv};
use crate::model::expr::Expr;
use crate::model::network::RESERVED_PREFIX;
use crate::model::{Sort, Value};
use encode::{Binding, EncodeError, Encoder, MalformedModel};
use serde::{Deserialize, Serialize};
use sexp::{app, atom, list, parse_all, symbol, SExpr};
use solver::{SolverConfig, SolverError};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Duration;

/// A validity question: for all `vars`, with `defs` bound in order,
/// `hyps` imply `goal`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub vars: Vec<(String, Sort)>,
    pub defs: Vec<(String, Expr)>,
    pub hyps: Vec<Expr>,
    pub goal: Expr,
    /// Extra strings for the set alphabet beyond the literals in the query.
    pub alphabet: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Valid,
    /// A falsifying assignment of every declared variable.
    Counterexample(BTreeMap<String, Value>),
    Unknown(String),
    Failure(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// SMT name of a query variable. User names get a prefix so they cannot clash
/// with the solver's built-in function symbols.
fn var_symbol(name: &str) -> Result<String, EncodeError> {
    let raw = if name.starts_with(RESERVED_PREFIX) {
        name.to_string()
    } else {
        format!("u!{name}")
    };
    if sexp::quotable(&raw) {
        Ok(symbol(&raw))
    } else {
        Err(EncodeError::BadName(name.to_string()))
    }
}

/// A rendered script with what is needed to decode its model.
pub struct Script {
    pub text: String,
    encoder: Encoder,
    vars: Vec<(String, String, Sort)>,
}

impl Query {
    pub fn new(goal: Expr) -> Query {
        Query {
            vars: Vec::new(),
            defs: Vec::new(),
            hyps: Vec::new(),
            goal,
            alphabet: BTreeSet::new(),
        }
    }

    fn exprs(&self) -> impl Iterator<Item = &Expr> {
        self.defs
            .iter()
            .map(|(_, e)| e)
            .chain(self.hyps.iter())
            .chain(std::iter::once(&self.goal))
    }

    pub fn string_alphabet(&self) -> BTreeSet<String> {
        let mut out = self.alphabet.clone();
        for e in self.exprs() {
            e.collect_strings(&mut out);
        }
        out
    }

    /// Evaluates `hyps ∧ ¬goal` under a full assignment of `vars`: true exactly
    /// when the assignment is a genuine counterexample.
    pub fn falsified_by(&self, assignment: &BTreeMap<String, Value>) -> Result<bool, EvalError> {
        let env = self.bind_defs(assignment)?;
        if !self.hyps_hold_in(&env)? {
            return Ok(false);
        }
        Ok(!eval_bool(&self.goal, &env)?)
    }

    /// Evaluates only the hypotheses under a full assignment of `vars`.
    pub fn hypotheses_hold(&self, assignment: &BTreeMap<String, Value>) -> Result<bool, EvalError> {
        let env = self.bind_defs(assignment)?;
        self.hyps_hold_in(&env)
    }

    /// Extends `assignment` with the value of every definition.
    pub fn bind_defs(&self, assignment: &BTreeMap<String, Value>) -> Result<ValueEnv, EvalError> {
        let mut env: ValueEnv = assignment.clone();
        for (name, e) in &self.defs {
            let v = eval(e, &env)?;
            env.insert(name.clone(), v);
        }
        Ok(env)
    }

    fn hyps_hold_in(&self, env: &ValueEnv) -> Result<bool, EvalError> {
        for h in &self.hyps {
            if !eval_bool(h, env)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Renders the script that asserts the negated goal.
    pub fn render(&self, timeout: Option<Duration>) -> Result<Script, EncodeError> {
        let mut enc = Encoder::new(self.string_alphabet());
        let mut body = Vec::new();
        let mut binding = Binding::new();
        let mut vars = Vec::new();
        let mut side = Vec::new();
        for (name, sort) in &self.vars {
            let sym = var_symbol(name)?;
            let s = enc.encode_sort(sort)?;
            body.push(app("declare-const", [atom(&sym), s]));
            if let Some(c) = enc.nonneg(&atom(&sym), sort)? {
                side.push(c);
            }
            binding.insert(name.clone(), (atom(&sym), sort.clone()));
            vars.push((name.clone(), sym, sort.clone()));
        }
        for (name, e) in &self.defs {
            let sym = var_symbol(name)?;
            let (t, sort) = enc.encode_expr(e, &binding)?;
            let s = enc.encode_sort(&sort)?;
            body.push(app("define-fun", [atom(&sym), list([]), s, t]));
            binding.insert(name.clone(), (atom(&sym), sort));
        }
        for c in side {
            body.push(app("assert", [c]));
        }
        for h in &self.hyps {
            let (t, _) = enc.encode_expr(h, &binding)?;
            body.push(app("assert", [t]));
        }
        let (g, _) = enc.encode_expr(&self.goal, &binding)?;
        body.push(app("assert", [app("not", [g])]));

        let mut text = String::new();
        text.push_str("(set-option :produce-models true)\n");
        if let Some(t) = timeout {
            let _ = writeln!(text, "(set-option :timeout {})", t.as_millis());
        }
        text.push_str("(set-logic ALL)\n");
        for d in enc.declarations() {
            let _ = writeln!(text, "{d}");
        }
        for c in &body {
            let _ = writeln!(text, "{c}");
        }
        text.push_str("(check-sat)\n(get-info :reason-unknown)\n");
        if !vars.is_empty() {
            let names = vars.iter().map(|(_, s, _)| atom(s));
            let _ = writeln!(text, "{}", app("get-value", [list(names)]));
        }
        Ok(Script {
            text,
            encoder: enc,
            vars,
        })
    }

    /// Decides validity with a fresh solver process.
    pub fn check(&self, config: &SolverConfig, label: &str) -> Verdict {
        let script = match self.render(config.timeout) {
            Ok(s) => s,
            Err(e) => return Verdict::Failure(format!("encoding failed: {e}")),
        };
        let out = match config.run(&script.text, label) {
            Ok(o) => o,
            Err(SolverError::WallClock(_)) => return Verdict::Unknown("timeout".into()),
            Err(e) => return Verdict::Failure(e.to_string()),
        };
        let verdict = interpret(&out.stdout, &script);
        if let Verdict::Failure(detail) = &verdict {
            if !out.stderr.trim().is_empty() {
                return Verdict::Failure(format!("{detail}; stderr: {}", out.stderr.trim()));
            }
            if out.status.is_none() {
                return Verdict::Failure(format!("{detail}; solver killed by a signal"));
            }
        }
        verdict
    }
}

fn error_text(e: &SExpr) -> Option<String> {
    match e.as_list()? {
        [head, msg] if head.as_atom() == Some("error") => Some(msg.to_string()),
        _ => None,
    }
}

/// Reads the verdict out of the solver's response to a rendered script.
fn interpret(stdout: &str, script: &Script) -> Verdict {
    let items = match parse_all(stdout) {
        Ok(items) => items,
        Err(e) => return Verdict::Failure(format!("unparseable solver output: {e}")),
    };
    let mut iter = items.iter();
    let answer = loop {
        match iter.next() {
            None => return Verdict::Failure(format!("no check-sat answer in `{}`", stdout.trim())),
            Some(e) => {
                if let Some(msg) = error_text(e) {
                    return Verdict::Failure(format!("solver error {msg}"));
                }
                if let Some(a) = e.as_atom() {
                    break a;
                }
            }
        }
    };
    let rest: Vec<&SExpr> = iter.collect();
    match answer {
        "unsat" => Verdict::Valid,
        "unknown" => {
            let reason = rest
                .iter()
                .find_map(|e| match e.as_list()? {
                    [k, v] if k.as_atom() == Some(":reason-unknown") => {
                        Some(v.as_atom()?.trim_matches('"').to_string())
                    }
                    _ => None,
                })
                .filter(|r| !r.is_empty())
                .unwrap_or_else(|| "unknown".into());
            let reason = if reason.contains("timeout") || reason == "canceled" {
                "timeout".into()
            } else {
                reason
            };
            Verdict::Unknown(reason)
        }
        "sat" => {
            if let Some(msg) = rest.iter().find_map(|e| error_text(e)) {
                return Verdict::Failure(format!("solver error {msg}"));
            }
            if script.vars.is_empty() {
                return Verdict::Counterexample(BTreeMap::new());
            }
            let Some(model) = rest.last() else {
                return Verdict::Failure("sat without a model".into());
            };
            match parse_model(model, &script.encoder, &script.vars) {
                Ok(m) => Verdict::Counterexample(m),
                Err(e) => Verdict::Failure(e.to_string()),
            }
        }
        other => Verdict::Failure(format!("unexpected solver answer `{other}`")),
    }
}

/// Decodes a `get-value` response into values of the declared sorts.
pub fn parse_model(
    response: &SExpr,
    encoder: &Encoder,
    vars: &[(String, String, Sort)],
) -> Result<BTreeMap<String, Value>, MalformedModel> {
    let malformed = |sort: &Sort| MalformedModel {
        fragment: response.to_string(),
        sort: sort.clone(),
    };
    let pairs = response.as_list().ok_or_else(|| malformed(&Sort::Bool))?;
    let mut out = BTreeMap::new();
    for (name, sym, sort) in vars {
        let value = pairs
            .iter()
            .find_map(|p| match p.as_list()? {
                [k, v] if k.as_atom().map(sexp::unquote) == Some(sexp::unquote(sym)) => Some(v),
                _ => None,
            })
            .ok_or_else(|| malformed(sort))?;
        out.insert(name.clone(), encoder.decode_value(value, sort)?);
    }
    Ok(out)
}

/// Asks the solver for the value of each expression under its environment,
/// with every variable pinned by an equality. Used to cross-check the encoder
/// against the concrete evaluator.
pub fn evaluate_pinned(
    items: &[(Expr, ValueEnv)],
    config: &SolverConfig,
    label: &str,
) -> Result<Vec<Value>, String> {
    let mut alphabet = BTreeSet::new();
    for (e, env) in items {
        e.collect_strings(&mut alphabet);
        for v in env.values() {
            v.collect_strings(&mut alphabet);
        }
    }
    let mut enc = Encoder::new(alphabet);
    let mut body = Vec::new();
    let mut results = Vec::new();
    for (i, (e, env)) in items.iter().enumerate() {
        let mut binding = Binding::new();
        for (name, v) in env {
            let sym = symbol(&format!("$p{i}.{name}"));
            let sort = v.sort();
            let s = enc.encode_sort(&sort).map_err(|e| e.to_string())?;
            let lit = enc.encode_value(v).map_err(|e| e.to_string())?;
            body.push(app("declare-const", [atom(&sym), s]));
            body.push(app("assert", [app("=", [atom(&sym), lit])]));
            binding.insert(name.clone(), (atom(&sym), sort));
        }
        let (t, sort) = enc.encode_expr(e, &binding).map_err(|e| e.to_string())?;
        let r = format!("$r{i}");
        let s = enc.encode_sort(&sort).map_err(|e| e.to_string())?;
        body.push(app("declare-const", [atom(&r), s]));
        body.push(app("assert", [app("=", [atom(&r), t])]));
        results.push((r.clone(), r, sort));
    }
    let mut text = String::from("(set-option :produce-models true)\n(set-logic ALL)\n");
    for d in enc.declarations() {
        let _ = writeln!(text, "{d}");
    }
    for c in &body {
        let _ = writeln!(text, "{c}");
    }
    text.push_str("(check-sat)\n");
    let names = results.iter().map(|(_, s, _)| atom(s));
    let _ = writeln!(text, "{}", app("get-value", [list(names)]));

    let out = config.run(&text, label).map_err(|e| e.to_string())?;
    let parsed = parse_all(&out.stdout).map_err(|e| e.to_string())?;
    match parsed.first().and_then(SExpr::as_atom) {
        Some("sat") => {}
        _ => return Err(format!("pinned query not sat: {}", out.stdout.trim())),
    }
    let model = parsed.get(1).ok_or("missing model")?;
    let values = parse_model(model, &enc, &results).map_err(|e| e.to_string())?;
    Ok(results.iter().map(|(n, _, _)| values[n].clone()).collect())
}
