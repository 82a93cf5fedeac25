//! JSON reading and writing of networks, annotations and check problems.
//!
//! Sorts are `"bool"`, `"int"`, `"set"`, `{"bv": w}`, `{"enum": [labels]}`,
//! `{"option": sort}` and `{"record": {field: sort, …}}`. Expressions are
//! arrays headed by an operator name; a bare string is a variable, `true`,
//! `false` and non-negative integers are literals, and other literals are
//! written `["lit", sort, value]`. Temporal operators are objects:
//!
//! ```json
//! {"op": "G", "pred": e}
//! {"op": "U", "pred": e, "tau": 2, "then": op}
//! {"op": "F", "tau": 3, "then": op}
//! {"op": "and", "args": [op, op, …]}   // also "or"
//! {"op": "not", "arg": op}
//! ```
//!
//! A problem file holds `{"network": …, "interfaces": {node: op}, "properties": {node: op}}`;
//! either annotation may be omitted.

use crate::bench::{BenchmarkFixture, Expected};
use crate::model::expr::Expr;
use crate::model::network::{NetworkInstance, SymbolicVar, Topology};
use crate::model::{Sort, Value};
use crate::temporal::{Annotation, TemporalOp};
use num_bigint::BigUint;
use serde_json::{json, Map, Value as Json};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{path}: {message}")]
    At { path: String, message: String },
}

type Result<T> = std::result::Result<T, ParseError>;

fn err<T>(path: &str, message: impl Into<String>) -> Result<T> {
    Err(ParseError::At {
        path: path.to_string(),
        message: message.into(),
    })
}

fn child(path: &str, key: impl std::fmt::Display) -> String {
    format!("{path}.{key}")
}

fn index(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

fn as_str<'a>(j: &'a Json, path: &str) -> Result<&'a str> {
    j.as_str().map_or_else(|| err(path, "expected a string"), Ok)
}

fn as_array<'a>(j: &'a Json, path: &str) -> Result<&'a Vec<Json>> {
    j.as_array().map_or_else(|| err(path, "expected an array"), Ok)
}

fn as_object<'a>(j: &'a Json, path: &str) -> Result<&'a Map<String, Json>> {
    j.as_object().map_or_else(|| err(path, "expected an object"), Ok)
}

fn as_u64(j: &Json, path: &str) -> Result<u64> {
    j.as_u64().map_or_else(|| err(path, "expected a non-negative integer"), Ok)
}

/// Rejects keys outside `allowed` and returns the object.
fn fields<'a>(j: &'a Json, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Json>> {
    let obj = as_object(j, path)?;
    for k in obj.keys() {
        if !allowed.contains(&k.as_str()) {
            return err(path, format!("unexpected key `{k}`"));
        }
    }
    Ok(obj)
}

fn required<'a>(obj: &'a Map<String, Json>, key: &str, path: &str) -> Result<&'a Json> {
    obj.get(key)
        .map_or_else(|| err(path, format!("missing key `{key}`")), Ok)
}

fn parse_text(text: &str) -> Result<Json> {
    serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))
}

// Sorts

pub fn parse_sort(j: &Json, path: &str) -> Result<Sort> {
    if let Some(s) = j.as_str() {
        return match s {
            "bool" => Ok(Sort::Bool),
            "int" => Ok(Sort::Int),
            "set" => Ok(Sort::StringSet),
            other => err(path, format!("unknown sort `{other}`")),
        };
    }
    let obj = as_object(j, path)?;
    if obj.len() != 1 {
        return err(path, "a compound sort has exactly one key");
    }
    let (k, v) = obj.iter().next().unwrap();
    let p = child(path, k);
    let sort = match k.as_str() {
        "bv" => Sort::BitVec(
            u32::try_from(as_u64(v, &p)?).map_or_else(|_| err(&p, "width out of range"), Ok)?,
        ),
        "enum" => Sort::Enum(
            as_array(v, &p)?
                .iter()
                .enumerate()
                .map(|(i, l)| as_str(l, &index(&p, i)).map(String::from))
                .collect::<Result<_>>()?,
        ),
        "option" => Sort::option(parse_sort(v, &p)?),
        "record" => Sort::Record(
            as_object(v, &p)?
                .iter()
                .map(|(f, s)| Ok((f.clone(), parse_sort(s, &child(&p, f))?)))
                .collect::<Result<_>>()?,
        ),
        other => return err(path, format!("unknown sort `{other}`")),
    };
    sort.well_formed()
        .map_or_else(|e| err(path, e), |_| Ok(sort))
}

pub fn sort_to_json(s: &Sort) -> Json {
    match s {
        Sort::Bool => json!("bool"),
        Sort::Int => json!("int"),
        Sort::StringSet => json!("set"),
        Sort::BitVec(w) => json!({ "bv": w }),
        Sort::Enum(labels) => json!({ "enum": labels }),
        Sort::Option(inner) => json!({ "option": sort_to_json(inner) }),
        Sort::Record(fields) => {
            let m: Map<String, Json> = fields
                .iter()
                .map(|(f, s)| (f.clone(), sort_to_json(s)))
                .collect();
            json!({ "record": m })
        }
    }
}

// Values

fn parse_natural(j: &Json, path: &str) -> Result<BigUint> {
    if let Some(n) = j.as_u64() {
        return Ok(BigUint::from(n));
    }
    match j.as_str().and_then(|s| s.parse::<BigUint>().ok()) {
        Some(n) => Ok(n),
        None => err(path, "expected a natural number"),
    }
}

/// Reads a value of the given sort.
pub fn parse_value(j: &Json, sort: &Sort, path: &str) -> Result<Value> {
    match sort {
        Sort::Bool => j
            .as_bool()
            .map_or_else(|| err(path, "expected a boolean"), |b| Ok(Value::Bool(b))),
        Sort::Int => Ok(Value::Int(parse_natural(j, path)?)),
        Sort::BitVec(w) => {
            let bits = match (j.as_u64(), j.as_str()) {
                (Some(n), _) => u128::from(n),
                (None, Some(s)) if s.starts_with("0x") => u128::from_str_radix(&s[2..], 16)
                    .map_or_else(|_| err(path, "bad hexadecimal bit-vector"), Ok)?,
                _ => return err(path, "expected a bit-vector (integer or \"0x…\")"),
            };
            if *w < 128 && bits >> w != 0 {
                return err(path, format!("{bits} does not fit in {w} bits"));
            }
            Ok(Value::bv(*w, bits))
        }
        Sort::Enum(labels) => {
            let l = as_str(j, path)?;
            Value::label(labels, l).map_or_else(|| err(path, format!("unknown label `{l}`")), Ok)
        }
        Sort::StringSet => Ok(Value::StringSet(
            as_array(j, path)?
                .iter()
                .enumerate()
                .map(|(i, s)| as_str(s, &index(path, i)).map(String::from))
                .collect::<Result<_>>()?,
        )),
        Sort::Option(inner) => {
            if j.is_null() {
                Ok(Value::none((**inner).clone()))
            } else {
                let v = parse_value(j, inner, path)?;
                Ok(Value::Option {
                    inner: (**inner).clone(),
                    value: Some(Box::new(v)),
                })
            }
        }
        Sort::Record(fs) => {
            let names: Vec<&str> = fs.iter().map(|(f, _)| f.as_str()).collect();
            let obj = fields(j, path, &names)?;
            let mut out = Vec::new();
            for (f, s) in fs {
                let v = required(obj, f, path)?;
                out.push((f.clone(), parse_value(v, s, &child(path, f))?));
            }
            Ok(Value::Record(out))
        }
    }
}

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Bool(b) => json!(b),
        Value::Int(n) => match u64::try_from(n) {
            Ok(n) => json!(n),
            Err(_) => json!(n.to_string()),
        },
        Value::BitVec { bits, .. } => match u64::try_from(*bits) {
            Ok(n) => json!(n),
            Err(_) => json!(format!("0x{bits:x}")),
        },
        Value::Enum { labels, index } => json!(labels[*index]),
        Value::StringSet(s) => json!(s),
        Value::Option { value, .. } => value.as_ref().map_or(Json::Null, |v| value_to_json(v)),
        Value::Record(fs) => {
            let m: Map<String, Json> = fs
                .iter()
                .map(|(f, v)| (f.clone(), value_to_json(v)))
                .collect();
            Json::Object(m)
        }
    }
}

// Expressions

fn arity(items: &[Json], n: usize, op: &str, path: &str) -> Result<()> {
    if items.len() != n + 1 {
        return err(path, format!("`{op}` takes {n} argument(s), got {}", items.len() - 1));
    }
    Ok(())
}

pub fn parse_expr(j: &Json, path: &str) -> Result<Expr> {
    match j {
        Json::String(s) => return Ok(Expr::Var(s.clone())),
        Json::Bool(b) => return Ok(Expr::Lit(Value::Bool(*b))),
        Json::Number(_) => return Ok(Expr::Lit(Value::Int(parse_natural(j, path)?))),
        Json::Array(_) => {}
        _ => return err(path, "expected an expression"),
    }
    let items = as_array(j, path)?;
    let Some(head) = items.first() else {
        return err(path, "empty expression");
    };
    let op = as_str(head, &index(path, 0))?;
    let sub = |i: usize| parse_expr(&items[i], &index(path, i));
    let boxed = |i: usize| sub(i).map(Box::new);
    let name = |i: usize| as_str(&items[i], &index(path, i)).map(String::from);
    let binary = |f: fn(Box<Expr>, Box<Expr>) -> Expr| -> Result<Expr> {
        arity(items, 2, op, path)?;
        Ok(f(boxed(1)?, boxed(2)?))
    };
    Ok(match op {
        "lit" => {
            arity(items, 2, op, path)?;
            let sort = parse_sort(&items[1], &index(path, 1))?;
            Expr::Lit(parse_value(&items[2], &sort, &index(path, 2))?)
        }
        "get" => {
            arity(items, 2, op, path)?;
            Expr::Get(boxed(1)?, name(2)?)
        }
        "record" => {
            arity(items, 1, op, path)?;
            let p = index(path, 1);
            Expr::MakeRecord(
                as_object(&items[1], &p)?
                    .iter()
                    .map(|(f, e)| Ok((f.clone(), parse_expr(e, &child(&p, f))?)))
                    .collect::<Result<_>>()?,
            )
        }
        "with" => {
            arity(items, 3, op, path)?;
            Expr::With(boxed(1)?, name(2)?, boxed(3)?)
        }
        "if" => {
            arity(items, 3, op, path)?;
            Expr::If(boxed(1)?, boxed(2)?, boxed(3)?)
        }
        "and" | "or" => {
            let args = (1..items.len()).map(sub).collect::<Result<Vec<_>>>()?;
            if op == "and" {
                Expr::And(args)
            } else {
                Expr::Or(args)
            }
        }
        "not" => {
            arity(items, 1, op, path)?;
            Expr::Not(boxed(1)?)
        }
        "=" => binary(Expr::Eq)?,
        "!=" => binary(Expr::Neq)?,
        "<" => binary(Expr::Lt)?,
        "<=" => binary(Expr::Leq)?,
        "+" => binary(Expr::Add)?,
        "-" => binary(Expr::Sub)?,
        "min" => binary(Expr::Min)?,
        "max" => binary(Expr::Max)?,
        "contains" | "insert" => {
            arity(items, 2, op, path)?;
            let (e, s) = (boxed(1)?, name(2)?);
            if op == "contains" {
                Expr::SetContains(e, s)
            } else {
                Expr::SetInsert(e, s)
            }
        }
        "none" => {
            arity(items, 1, op, path)?;
            Expr::None(parse_sort(&items[1], &index(path, 1))?)
        }
        "some" => {
            arity(items, 1, op, path)?;
            Expr::Some(boxed(1)?)
        }
        "case" => {
            arity(items, 4, op, path)?;
            Expr::OptionCase {
                scrutinee: boxed(1)?,
                none: boxed(2)?,
                bind: name(3)?,
                some: boxed(4)?,
            }
        }
        other => return err(path, format!("unknown operator `{other}`")),
    })
}

pub fn expr_to_json(e: &Expr) -> Json {
    let b = |op: &str, a: &Expr, c: &Expr| json!([op, expr_to_json(a), expr_to_json(c)]);
    match e {
        Expr::Lit(Value::Bool(v)) => json!(v),
        Expr::Lit(v @ Value::Int(_)) => value_to_json(v),
        Expr::Lit(v) => json!(["lit", sort_to_json(&v.sort()), value_to_json(v)]),
        Expr::Var(x) => json!(x),
        Expr::Get(r, f) => json!(["get", expr_to_json(r), f]),
        Expr::MakeRecord(fs) => {
            let m: Map<String, Json> = fs.iter().map(|(f, e)| (f.clone(), expr_to_json(e))).collect();
            json!(["record", m])
        }
        Expr::With(r, f, v) => json!(["with", expr_to_json(r), f, expr_to_json(v)]),
        Expr::If(c, t, f) => json!(["if", expr_to_json(c), expr_to_json(t), expr_to_json(f)]),
        Expr::And(xs) | Expr::Or(xs) => {
            let op = if matches!(e, Expr::And(_)) { "and" } else { "or" };
            let mut out = vec![json!(op)];
            out.extend(xs.iter().map(expr_to_json));
            Json::Array(out)
        }
        Expr::Not(x) => json!(["not", expr_to_json(x)]),
        Expr::Eq(a, c) => b("=", a, c),
        Expr::Neq(a, c) => b("!=", a, c),
        Expr::Lt(a, c) => b("<", a, c),
        Expr::Leq(a, c) => b("<=", a, c),
        Expr::Add(a, c) => b("+", a, c),
        Expr::Sub(a, c) => b("-", a, c),
        Expr::Min(a, c) => b("min", a, c),
        Expr::Max(a, c) => b("max", a, c),
        Expr::SetContains(x, s) => json!(["contains", expr_to_json(x), s]),
        Expr::SetInsert(x, s) => json!(["insert", expr_to_json(x), s]),
        Expr::None(s) => json!(["none", sort_to_json(s)]),
        Expr::Some(x) => json!(["some", expr_to_json(x)]),
        Expr::OptionCase {
            scrutinee,
            none,
            bind,
            some,
        } => json!([
            "case",
            expr_to_json(scrutinee),
            expr_to_json(none),
            bind,
            expr_to_json(some)
        ]),
    }
}

// Temporal operators and annotations

pub fn parse_temporal(j: &Json, path: &str) -> Result<TemporalOp> {
    let obj = as_object(j, path)?;
    let op = as_str(required(obj, "op", path)?, &child(path, "op"))?;
    let tau = |obj: &Map<String, Json>| as_u64(required(obj, "tau", path)?, &child(path, "tau"));
    let then = |obj: &Map<String, Json>| {
        parse_temporal(required(obj, "then", path)?, &child(path, "then")).map(Box::new)
    };
    let pred = |obj: &Map<String, Json>| parse_expr(required(obj, "pred", path)?, &child(path, "pred"));
    Ok(match op {
        "G" => TemporalOp::Globally(pred(fields(j, path, &["op", "pred"])?)?),
        "U" | "until" => {
            let obj = fields(j, path, &["op", "pred", "tau", "then"])?;
            TemporalOp::Until {
                pred: pred(obj)?,
                tau: tau(obj)?,
                then: then(obj)?,
            }
        }
        "F" => {
            let obj = fields(j, path, &["op", "tau", "then"])?;
            TemporalOp::Finally {
                tau: tau(obj)?,
                then: then(obj)?,
            }
        }
        "and" | "or" => {
            let obj = fields(j, path, &["op", "args"])?;
            let p = child(path, "args");
            let args = as_array(required(obj, "args", path)?, &p)?;
            let mut ops = args
                .iter()
                .enumerate()
                .map(|(i, a)| parse_temporal(a, &index(&p, i)));
            let Some(first) = ops.next() else {
                return err(&p, format!("`{op}` needs at least one operand"));
            };
            let mut acc = first?;
            for next in ops {
                let next = Box::new(next?);
                acc = if op == "and" {
                    TemporalOp::And(Box::new(acc), next)
                } else {
                    TemporalOp::Or(Box::new(acc), next)
                };
            }
            acc
        }
        "not" => {
            let obj = fields(j, path, &["op", "arg"])?;
            TemporalOp::Not(Box::new(parse_temporal(
                required(obj, "arg", path)?,
                &child(path, "arg"),
            )?))
        }
        other => return err(path, format!("unknown temporal operator `{other}`")),
    })
}

pub fn temporal_to_json(op: &TemporalOp) -> Json {
    match op {
        TemporalOp::Globally(p) => json!({ "op": "G", "pred": expr_to_json(p) }),
        TemporalOp::Until { pred, tau, then } => json!({
            "op": "U", "pred": expr_to_json(pred), "tau": tau, "then": temporal_to_json(then)
        }),
        TemporalOp::Finally { tau, then } => {
            json!({ "op": "F", "tau": tau, "then": temporal_to_json(then) })
        }
        TemporalOp::And(a, b) => {
            json!({ "op": "and", "args": [temporal_to_json(a), temporal_to_json(b)] })
        }
        TemporalOp::Or(a, b) => {
            json!({ "op": "or", "args": [temporal_to_json(a), temporal_to_json(b)] })
        }
        TemporalOp::Not(a) => json!({ "op": "not", "arg": temporal_to_json(a) }),
    }
}

pub fn parse_annotation(j: &Json, path: &str) -> Result<Annotation> {
    let mut a = Annotation::new();
    for (v, op) in as_object(j, path)? {
        a.set(v.clone(), parse_temporal(op, &child(path, v))?);
    }
    Ok(a)
}

pub fn annotation_to_json(a: &Annotation) -> Json {
    Json::Object(
        a.by_node
            .iter()
            .map(|(v, op)| (v.clone(), temporal_to_json(op)))
            .collect(),
    )
}

// Networks

const NETWORK_KEYS: &[&str] = &["nodes", "edges", "route_sort", "symbolics", "init", "transfer", "merge"];

pub fn parse_network(j: &Json, path: &str) -> Result<NetworkInstance> {
    let obj = fields(j, path, NETWORK_KEYS)?;
    let get = |k: &str| required(obj, k, path);

    let p = child(path, "nodes");
    let nodes = as_array(get("nodes")?, &p)?
        .iter()
        .enumerate()
        .map(|(i, v)| as_str(v, &index(&p, i)).map(String::from))
        .collect::<Result<Vec<_>>>()?;

    let p = child(path, "edges");
    let mut edges = Vec::new();
    for (i, e) in as_array(get("edges")?, &p)?.iter().enumerate() {
        let pi = index(&p, i);
        match as_array(e, &pi)?.as_slice() {
            [u, v] => edges.push((
                as_str(u, &index(&pi, 0))?.to_string(),
                as_str(v, &index(&pi, 1))?.to_string(),
            )),
            _ => return err(&pi, "an edge is a pair [from, to]"),
        }
    }

    let route_sort = parse_sort(get("route_sort")?, &child(path, "route_sort"))?;

    let mut symbolics = Vec::new();
    if let Some(s) = obj.get("symbolics") {
        let p = child(path, "symbolics");
        for (i, sym) in as_array(s, &p)?.iter().enumerate() {
            let pi = index(&p, i);
            let o = fields(sym, &pi, &["name", "sort", "assume"])?;
            let name = as_str(required(o, "name", &pi)?, &child(&pi, "name"))?;
            let sort = parse_sort(required(o, "sort", &pi)?, &child(&pi, "sort"))?;
            let mut var = SymbolicVar::new(name, sort);
            if let Some(a) = o.get("assume") {
                var = var.assuming(parse_expr(a, &child(&pi, "assume"))?);
            }
            symbolics.push(var);
        }
    }

    let p = child(path, "init");
    let init = as_object(get("init")?, &p)?
        .iter()
        .map(|(v, e)| Ok((v.clone(), parse_expr(e, &child(&p, v))?)))
        .collect::<Result<BTreeMap<_, _>>>()?;

    let p = child(path, "transfer");
    let mut transfer = BTreeMap::new();
    for (i, t) in as_array(get("transfer")?, &p)?.iter().enumerate() {
        let pi = index(&p, i);
        let o = fields(t, &pi, &["from", "to", "fn"])?;
        let u = as_str(required(o, "from", &pi)?, &child(&pi, "from"))?;
        let v = as_str(required(o, "to", &pi)?, &child(&pi, "to"))?;
        let f = parse_expr(required(o, "fn", &pi)?, &child(&pi, "fn"))?;
        if transfer.insert((u.to_string(), v.to_string()), f).is_some() {
            return err(&pi, format!("duplicate transfer function for {u}→{v}"));
        }
    }

    let merge = parse_expr(get("merge")?, &child(path, "merge"))?;
    Ok(NetworkInstance {
        topology: Topology::new(nodes, edges),
        route_sort,
        init,
        transfer,
        merge,
        symbolics,
    })
}

pub fn network_to_json(n: &NetworkInstance) -> Json {
    let symbolics: Vec<Json> = n
        .symbolics
        .iter()
        .map(|s| {
            let mut o = json!({ "name": s.name, "sort": sort_to_json(&s.sort) });
            if let Some(a) = &s.assumption {
                o["assume"] = expr_to_json(a);
            }
            o
        })
        .collect();
    let init: Map<String, Json> = n
        .topology
        .nodes()
        .iter()
        .filter_map(|v| n.init.get(v).map(|e| (v.clone(), expr_to_json(e))))
        .collect();
    let transfer: Vec<Json> = n
        .transfer
        .iter()
        .map(|((u, v), e)| json!({ "from": u, "to": v, "fn": expr_to_json(e) }))
        .collect();
    json!({
        "nodes": n.topology.nodes(),
        "edges": n.topology.edges().iter().map(|(u, v)| json!([u, v])).collect::<Vec<_>>(),
        "route_sort": sort_to_json(&n.route_sort),
        "symbolics": symbolics,
        "init": init,
        "transfer": transfer,
        "merge": expr_to_json(&n.merge),
    })
}

/// A network with optional interfaces and properties.
#[derive(Clone, Debug)]
pub struct Problem {
    pub network: NetworkInstance,
    pub interfaces: Option<Annotation>,
    pub properties: Option<Annotation>,
}

pub fn parse_problem(j: &Json) -> Result<Problem> {
    let obj = fields(j, "$", &["network", "interfaces", "properties", "name", "expected"])?;
    let network = parse_network(required(obj, "network", "$")?, "$.network")?;
    let ann = |k: &str| {
        obj.get(k)
            .map(|a| parse_annotation(a, &child("$", k)))
            .transpose()
    };
    Ok(Problem {
        network,
        interfaces: ann("interfaces")?,
        properties: ann("properties")?,
    })
}

pub fn problem_from_str(text: &str) -> Result<Problem> {
    parse_problem(&parse_text(text)?)
}

pub fn network_from_str(text: &str) -> Result<NetworkInstance> {
    parse_network(&parse_text(text)?, "$")
}

pub fn annotation_from_str(text: &str) -> Result<Annotation> {
    parse_annotation(&parse_text(text)?, "$")
}

pub fn problem_to_json(p: &Problem) -> Json {
    let mut o = json!({ "network": network_to_json(&p.network) });
    if let Some(a) = &p.interfaces {
        o["interfaces"] = annotation_to_json(a);
    }
    if let Some(a) = &p.properties {
        o["properties"] = annotation_to_json(a);
    }
    o
}

/// A benchmark as a problem file, with its name and expected outcome.
pub fn fixture_to_json(f: &BenchmarkFixture) -> Json {
    let mut o = problem_to_json(&Problem {
        network: f.network.clone(),
        interfaces: Some(f.interfaces.clone()),
        properties: Some(f.properties.clone()),
    });
    o["name"] = json!(f.name);
    o["expected"] = json!(match f.expected {
        Expected::Pass => "pass",
        Expected::Fail => "fail",
    });
    o
}
