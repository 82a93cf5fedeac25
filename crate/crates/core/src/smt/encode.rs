//! Translation of sorts, values and expressions into SMT-LIB terms, and decoding
//! of model values back into [`Value`]s.

use super::sexp::{app, atom, list, quotable, symbol, unquote, SExpr};
use crate::model::expr::Expr;
use crate::model::value::mask;
use crate::model::{Sort, Value};
use num_bigint::BigUint;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("string sets need at least one string literal in scope")]
    EmptyAlphabet,
    #[error("string `{0}` is outside the string alphabet")]
    UnknownString(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("ill-sorted `{op}`: {detail}")]
    IllSorted { op: &'static str, detail: String },
    #[error("name `{0}` cannot be written as an SMT-LIB symbol")]
    BadName(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("malformed model value `{fragment}` for sort {sort}")]
pub struct MalformedModel {
    pub fragment: String,
    pub sort: Sort,
}

/// Terms bound to variable names, with their sorts.
pub type Binding = BTreeMap<String, (SExpr, Sort)>;

#[derive(Clone, Debug)]
enum Datatype {
    Record { name: String },
    Option { name: String },
    Enum { name: String },
}

/// Encoding context: the string alphabet, the datatypes declared so far (in
/// dependency order) and a counter for fresh `let` names.
#[derive(Clone, Debug)]
pub struct Encoder {
    alphabet: Vec<String>,
    datatypes: Vec<(Sort, Datatype)>,
    declarations: Vec<SExpr>,
    fresh: usize,
}

fn ill(op: &'static str, detail: impl Into<String>) -> EncodeError {
    EncodeError::IllSorted {
        op,
        detail: detail.into(),
    }
}

fn checked_symbol(name: &str) -> Result<String, EncodeError> {
    if quotable(name) {
        Ok(symbol(name))
    } else {
        Err(EncodeError::BadName(name.to_string()))
    }
}

impl Encoder {
    pub fn new(alphabet: BTreeSet<String>) -> Encoder {
        Encoder {
            alphabet: alphabet.into_iter().collect(),
            datatypes: Vec::new(),
            declarations: Vec::new(),
            fresh: 0,
        }
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// `declare-datatypes` commands for every datatype used so far.
    pub fn declarations(&self) -> &[SExpr] {
        &self.declarations
    }

    fn lookup(&self, sort: &Sort) -> Option<&Datatype> {
        self.datatypes
            .iter()
            .find(|(s, _)| s == sort)
            .map(|(_, d)| d)
    }

    fn dt_name(&mut self, sort: &Sort) -> Result<String, EncodeError> {
        if let Some(d) = self.lookup(sort) {
            return Ok(match d {
                Datatype::Record { name } | Datatype::Option { name } | Datatype::Enum { name } => {
                    name.clone()
                }
            });
        }
        // Component sorts are declared first so that declarations come out in
        // dependency order and indices are stable.
        let components: Vec<Sort> = match sort {
            Sort::Record(fields) => fields.iter().map(|(_, s)| s.clone()).collect(),
            Sort::Option(inner) => vec![(**inner).clone()],
            _ => vec![],
        };
        let mut encoded = Vec::with_capacity(components.len());
        for c in &components {
            encoded.push(self.encode_sort(c)?);
        }
        let i = self.datatypes.len();
        let (name, ctors) = match sort {
            Sort::Record(fields) => {
                let name = format!("Rec{i}");
                let mut ctor = vec![atom(checked_symbol(&format!("mk-{name}"))?)];
                for ((f, _), s) in fields.iter().zip(encoded) {
                    let sel = checked_symbol(&format!("{name}-{f}"))?;
                    ctor.push(list([atom(sel), s]));
                }
                (name, vec![SExpr::List(ctor)])
            }
            Sort::Option(_) => {
                let name = format!("Opt{i}");
                let inner = encoded.pop().expect("option payload");
                let ctors = vec![
                    list([atom(format!("none-{name}"))]),
                    list([
                        atom(format!("some-{name}")),
                        list([atom(format!("val-{name}")), inner]),
                    ]),
                ];
                (name, ctors)
            }
            Sort::Enum(labels) => {
                let name = format!("Enum{i}");
                let mut ctors = Vec::new();
                for l in labels {
                    ctors.push(list([atom(checked_symbol(&format!("{name}-{l}"))?)]));
                }
                (name, ctors)
            }
            _ => unreachable!("only records, options and enums are datatypes"),
        };
        let decl = app(
            "declare-datatypes",
            [
                list([list([atom(&name), atom("0")])]),
                list([SExpr::List(ctors)]),
            ],
        );
        self.declarations.push(decl);
        let dt = match sort {
            Sort::Record(_) => Datatype::Record { name: name.clone() },
            Sort::Option(_) => Datatype::Option { name: name.clone() },
            _ => Datatype::Enum { name: name.clone() },
        };
        self.datatypes.push((sort.clone(), dt));
        Ok(name)
    }

    pub fn encode_sort(&mut self, sort: &Sort) -> Result<SExpr, EncodeError> {
        Ok(match sort {
            Sort::Bool => atom("Bool"),
            Sort::Int => atom("Int"),
            Sort::BitVec(w) => bv_sort(*w),
            Sort::StringSet => {
                if self.alphabet.is_empty() {
                    return Err(EncodeError::EmptyAlphabet);
                }
                bv_sort(self.alphabet.len() as u32)
            }
            Sort::Record(_) | Sort::Option(_) | Sort::Enum(_) => atom(self.dt_name(sort)?),
        })
    }

    /// Bit position of a string literal in the one-hot set encoding: the first
    /// alphabet entry is the most significant bit.
    fn bit_of(&self, item: &str) -> Result<u32, EncodeError> {
        let i = self
            .alphabet
            .iter()
            .position(|a| a == item)
            .ok_or_else(|| EncodeError::UnknownString(item.to_string()))?;
        Ok((self.alphabet.len() - 1 - i) as u32)
    }

    pub fn encode_value(&mut self, v: &Value) -> Result<SExpr, EncodeError> {
        Ok(match v {
            Value::Bool(b) => atom(b.to_string()),
            Value::Int(n) => atom(n.to_string()),
            Value::BitVec { width, bits } => bv_lit(*width, *bits),
            Value::StringSet(items) => {
                if self.alphabet.is_empty() {
                    return Err(EncodeError::EmptyAlphabet);
                }
                let mut bits = 0u128;
                for s in items {
                    bits |= 1u128 << self.bit_of(s)?;
                }
                bv_lit(self.alphabet.len() as u32, bits)
            }
            Value::Enum { labels, index } => {
                let name = self.dt_name(&v.sort())?;
                atom(checked_symbol(&format!("{name}-{}", labels[*index]))?)
            }
            Value::Option { inner, value } => {
                let name = self.dt_name(&Sort::option(inner.clone()))?;
                match value {
                    None => atom(format!("none-{name}")),
                    Some(x) => app(&format!("some-{name}"), [self.encode_value(x)?]),
                }
            }
            Value::Record(fields) => {
                let name = self.dt_name(&v.sort())?;
                let mut args = Vec::with_capacity(fields.len());
                for (_, x) in fields {
                    args.push(self.encode_value(x)?);
                }
                make(&checked_symbol(&format!("mk-{name}"))?, args)
            }
        })
    }

    fn fresh_name(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    /// Binds `term` to a fresh name unless it is already an atom, returning the
    /// name to use and the `let` binding (if one was made).
    fn share(&mut self, term: SExpr) -> (SExpr, Option<(String, SExpr)>) {
        match term {
            SExpr::Atom(_) => (term, None),
            _ => {
                let n = self.fresh_name("$l");
                (atom(&n), Some((n, term)))
            }
        }
    }

    pub fn encode_expr(&mut self, e: &Expr, binding: &Binding) -> Result<(SExpr, Sort), EncodeError> {
        let mut locals = Vec::new();
        self.enc(e, binding, &mut locals)
    }

    fn enc(
        &mut self,
        e: &Expr,
        binding: &Binding,
        locals: &mut Vec<(String, SExpr, Sort)>,
    ) -> Result<(SExpr, Sort), EncodeError> {
        let op = e.op_name();
        match e {
            Expr::Lit(v) => Ok((self.encode_value(v)?, v.sort())),
            Expr::Var(name) => locals
                .iter()
                .rev()
                .find(|(n, _, _)| n == name)
                .map(|(_, t, s)| (t.clone(), s.clone()))
                .or_else(|| binding.get(name).cloned())
                .ok_or_else(|| EncodeError::Unbound(name.clone())),
            Expr::Get(r, field) => {
                let (t, s) = self.enc(r, binding, locals)?;
                let fs = s
                    .field(field)
                    .cloned()
                    .ok_or_else(|| ill(op, format!("no field `{field}` in {s}")))?;
                let name = self.dt_name(&s)?;
                Ok((app(&checked_symbol(&format!("{name}-{field}"))?, [t]), fs))
            }
            Expr::MakeRecord(fields) => {
                let mut args = Vec::new();
                let mut sorts = Vec::new();
                for (n, x) in fields {
                    let (t, s) = self.enc(x, binding, locals)?;
                    args.push(t);
                    sorts.push((n.clone(), s));
                }
                let sort = Sort::Record(sorts);
                let name = self.dt_name(&sort)?;
                Ok((make(&checked_symbol(&format!("mk-{name}"))?, args), sort))
            }
            Expr::With(base, field, value) => {
                let (bt, s) = self.enc(base, binding, locals)?;
                let (vt, _) = self.enc(value, binding, locals)?;
                let Sort::Record(fields) = &s else {
                    return Err(ill(op, format!("{s} is not a record")));
                };
                if s.field(field).is_none() {
                    return Err(ill(op, format!("no field `{field}` in {s}")));
                }
                let name = self.dt_name(&s)?;
                let (b, bind) = self.share(bt);
                let mut args = Vec::new();
                for (f, _) in fields {
                    if f == field {
                        args.push(vt.clone());
                    } else {
                        args.push(app(&checked_symbol(&format!("{name}-{f}"))?, [b.clone()]));
                    }
                }
                let body = make(&checked_symbol(&format!("mk-{name}"))?, args);
                Ok((wrap_let(bind, body), s))
            }
            Expr::If(c, t, f) => {
                let (ct, _) = self.enc(c, binding, locals)?;
                let (tt, s) = self.enc(t, binding, locals)?;
                let (ft, _) = self.enc(f, binding, locals)?;
                Ok((app("ite", [ct, tt, ft]), s))
            }
            Expr::And(items) | Expr::Or(items) => {
                let mut ts = Vec::new();
                for x in items {
                    ts.push(self.enc(x, binding, locals)?.0);
                }
                let is_and = matches!(e, Expr::And(_));
                let t = match ts.len() {
                    0 => atom(if is_and { "true" } else { "false" }),
                    1 => ts.pop().unwrap(),
                    _ => app(if is_and { "and" } else { "or" }, ts),
                };
                Ok((t, Sort::Bool))
            }
            Expr::Not(x) => Ok((app("not", [self.enc(x, binding, locals)?.0]), Sort::Bool)),
            Expr::Eq(a, b) | Expr::Neq(a, b) => {
                let (at, _) = self.enc(a, binding, locals)?;
                let (bt, _) = self.enc(b, binding, locals)?;
                let eq = app("=", [at, bt]);
                let t = if matches!(e, Expr::Eq(..)) {
                    eq
                } else {
                    app("not", [eq])
                };
                Ok((t, Sort::Bool))
            }
            Expr::Lt(a, b) | Expr::Leq(a, b) => {
                let (at, s) = self.enc(a, binding, locals)?;
                let (bt, _) = self.enc(b, binding, locals)?;
                let strict = matches!(e, Expr::Lt(..));
                let f = match (&s, strict) {
                    (Sort::Int, true) => "<",
                    (Sort::Int, false) => "<=",
                    (Sort::BitVec(_), true) => "bvult",
                    (Sort::BitVec(_), false) => "bvule",
                    _ => return Err(ill(op, s.to_string())),
                };
                Ok((app(f, [at, bt]), Sort::Bool))
            }
            Expr::Add(a, b) => {
                let (at, s) = self.enc(a, binding, locals)?;
                let (bt, _) = self.enc(b, binding, locals)?;
                let f = match &s {
                    Sort::Int => "+",
                    Sort::BitVec(_) => "bvadd",
                    _ => return Err(ill(op, s.to_string())),
                };
                Ok((app(f, [at, bt]), s))
            }
            Expr::Sub(a, b) | Expr::Min(a, b) | Expr::Max(a, b) => {
                let (at, s) = self.enc(a, binding, locals)?;
                let (bt, _) = self.enc(b, binding, locals)?;
                if let (Expr::Sub(..), Sort::BitVec(_)) = (e, &s) {
                    return Ok((app("bvsub", [at, bt]), s));
                }
                let (le, lt) = match &s {
                    Sort::Int => ("<=", "<"),
                    Sort::BitVec(_) => ("bvule", "bvult"),
                    _ => return Err(ill(op, s.to_string())),
                };
                let (x, bx) = self.share(at);
                let (y, by) = self.share(bt);
                let body = match e {
                    // Saturating: x - y is 0 when x < y.
                    Expr::Sub(..) => app(
                        "ite",
                        [app(lt, [x.clone(), y.clone()]), atom("0"), app("-", [x, y])],
                    ),
                    Expr::Min(..) => app("ite", [app(le, [x.clone(), y.clone()]), x, y]),
                    _ => app("ite", [app(le, [y.clone(), x.clone()]), x, y]),
                };
                Ok((wrap_let(bx, wrap_let(by, body)), s))
            }
            Expr::SetContains(x, item) => {
                let (t, _) = self.enc(x, binding, locals)?;
                let bit = self.bit_of(item)?;
                let extract = list([
                    list([atom("_"), atom("extract"), atom(bit.to_string()), atom(bit.to_string())]),
                    t,
                ]);
                Ok((app("=", [extract, atom("#b1")]), Sort::Bool))
            }
            Expr::SetInsert(x, item) => {
                let (t, s) = self.enc(x, binding, locals)?;
                let bit = self.bit_of(item)?;
                let width = self.alphabet.len() as u32;
                Ok((app("bvor", [t, bv_lit(width, 1u128 << bit)]), s))
            }
            Expr::None(inner) => {
                let name = self.dt_name(&Sort::option(inner.clone()))?;
                Ok((atom(format!("none-{name}")), Sort::option(inner.clone())))
            }
            Expr::Some(x) => {
                let (t, s) = self.enc(x, binding, locals)?;
                let sort = Sort::option(s);
                let name = self.dt_name(&sort)?;
                Ok((app(&format!("some-{name}"), [t]), sort))
            }
            Expr::OptionCase {
                scrutinee,
                none,
                bind,
                some,
            } => {
                let (st, s) = self.enc(scrutinee, binding, locals)?;
                let Sort::Option(inner) = &s else {
                    return Err(ill(op, format!("{s} is not an option")));
                };
                let name = self.dt_name(&s)?;
                let (x, bx) = self.share(st);
                let (nt, rs) = self.enc(none, binding, locals)?;
                let b = self.fresh_name("$b");
                locals.push((bind.clone(), atom(&b), (**inner).clone()));
                let r = self.enc(some, binding, locals);
                locals.pop();
                let (smt, _) = r?;
                let payload = app(&format!("val-{name}"), [x.clone()]);
                let on_some = wrap_let(Some((b, payload)), smt);
                let test = list([
                    list([atom("_"), atom("is"), atom(format!("none-{name}"))]),
                    x,
                ]);
                Ok((wrap_let(bx, app("ite", [test, nt, on_some])), rs))
            }
        }
    }

    /// Conjunction of `x ≥ 0` for every integer reachable inside `term`, or
    /// `None` when the sort contains no integers.
    pub fn nonneg(&mut self, term: &SExpr, sort: &Sort) -> Result<Option<SExpr>, EncodeError> {
        Ok(match sort {
            Sort::Int => Some(app(">=", [term.clone(), atom("0")])),
            Sort::Record(fields) => {
                let name = self.dt_name(sort)?;
                let mut parts = Vec::new();
                for (f, s) in fields {
                    let sel = app(&checked_symbol(&format!("{name}-{f}"))?, [term.clone()]);
                    if let Some(c) = self.nonneg(&sel, s)? {
                        parts.push(c);
                    }
                }
                match parts.len() {
                    0 => None,
                    1 => parts.pop(),
                    _ => Some(app("and", parts)),
                }
            }
            Sort::Option(inner) => {
                let name = self.dt_name(sort)?;
                let payload = app(&format!("val-{name}"), [term.clone()]);
                self.nonneg(&payload, inner)?.map(|c| {
                    let test = list([
                        list([atom("_"), atom("is"), atom(format!("some-{name}"))]),
                        term.clone(),
                    ]);
                    app("=>", [test, c])
                })
            }
            _ => None,
        })
    }

    /// Decodes a model value of sort `sort`.
    pub fn decode_value(&self, e: &SExpr, sort: &Sort) -> Result<Value, MalformedModel> {
        let bad = || MalformedModel {
            fragment: e.to_string(),
            sort: sort.clone(),
        };
        // `(as C S)` annotations carry no information we need.
        if let Some([head, inner, _]) = e.as_list() {
            if head.as_atom() == Some("as") {
                return self.decode_value(inner, sort);
            }
        }
        match sort {
            Sort::Bool => match e.as_atom() {
                Some("true") => Ok(Value::Bool(true)),
                Some("false") => Ok(Value::Bool(false)),
                _ => Err(bad()),
            },
            Sort::Int => e
                .as_atom()
                .and_then(|a| a.parse::<BigUint>().ok())
                .map(Value::Int)
                .ok_or_else(bad),
            Sort::BitVec(w) => {
                let bits = parse_bv(e).ok_or_else(bad)?;
                if bits & !mask(*w) != 0 {
                    return Err(bad());
                }
                Ok(Value::bv(*w, bits))
            }
            Sort::StringSet => {
                let bits = parse_bv(e).ok_or_else(bad)?;
                let n = self.alphabet.len();
                let mut items = BTreeSet::new();
                for (i, s) in self.alphabet.iter().enumerate() {
                    if bits >> (n - 1 - i) & 1 == 1 {
                        items.insert(s.clone());
                    }
                }
                Ok(Value::StringSet(items))
            }
            Sort::Enum(labels) => {
                let name = self.known(sort).ok_or_else(bad)?;
                let a = unquote(e.as_atom().ok_or_else(bad)?);
                let label = a.strip_prefix(&format!("{name}-")).ok_or_else(bad)?;
                Value::label(labels, label).ok_or_else(bad)
            }
            Sort::Option(inner) => {
                let name = self.known(sort).ok_or_else(bad)?;
                match e {
                    SExpr::Atom(a) if unquote(a) == format!("none-{name}") => {
                        Ok(Value::none((**inner).clone()))
                    }
                    SExpr::List(items)
                        if items.len() == 2
                            && items[0].as_atom().map(unquote) == Some(&format!("some-{name}")) =>
                    {
                        Ok(Value::some(self.decode_value(&items[1], inner)?))
                    }
                    _ => Err(bad()),
                }
            }
            Sort::Record(fields) => {
                let name = self.known(sort).ok_or_else(bad)?;
                let ctor = format!("mk-{name}");
                let args: Vec<&SExpr> = match e {
                    SExpr::Atom(a) if fields.is_empty() && unquote(a) == ctor => vec![],
                    SExpr::List(items)
                        if items.len() == fields.len() + 1
                            && items[0].as_atom().map(unquote) == Some(&ctor) =>
                    {
                        items[1..].iter().collect()
                    }
                    _ => return Err(bad()),
                };
                let mut out = Vec::with_capacity(fields.len());
                for ((f, s), a) in fields.iter().zip(args) {
                    out.push((f.clone(), self.decode_value(a, s)?));
                }
                Ok(Value::Record(out))
            }
        }
    }

    fn known(&self, sort: &Sort) -> Option<&str> {
        self.lookup(sort).map(|d| match d {
            Datatype::Record { name } | Datatype::Option { name } | Datatype::Enum { name } => {
                name.as_str()
            }
        })
    }
}

fn bv_sort(w: u32) -> SExpr {
    list([atom("_"), atom("BitVec"), atom(w.to_string())])
}

pub(crate) fn bv_lit(w: u32, bits: u128) -> SExpr {
    list([atom("_"), atom(format!("bv{bits}")), atom(w.to_string())])
}

/// Applies a constructor; nullary constructors are bare symbols.
fn make(ctor: &str, args: Vec<SExpr>) -> SExpr {
    if args.is_empty() {
        atom(ctor)
    } else {
        app(ctor, args)
    }
}

fn wrap_let(binding: Option<(String, SExpr)>, body: SExpr) -> SExpr {
    match binding {
        None => body,
        Some((n, t)) => app("let", [list([list([atom(n), t])]), body]),
    }
}

/// Parses `#b…`, `#x…` or `(_ bvN w)`.
fn parse_bv(e: &SExpr) -> Option<u128> {
    match e {
        SExpr::Atom(a) => {
            if let Some(b) = a.strip_prefix("#b") {
                u128::from_str_radix(b, 2).ok()
            } else if let Some(h) = a.strip_prefix("#x") {
                u128::from_str_radix(h, 16).ok()
            } else {
                None
            }
        }
        SExpr::List(items) => match items.as_slice() {
            [u, n, _] if u.as_atom() == Some("_") => n.as_atom()?.strip_prefix("bv")?.parse().ok(),
            _ => None,
        },
    }
}
