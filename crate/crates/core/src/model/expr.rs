//! The policy expression language.
//!
//! A single AST holds the bodies of initial routes, transfer functions, the merge
//! function and every interface/property predicate. The simulator interprets it
//! concretely ([`crate::model::eval`]) and the SMT backend translates it to solver
//! terms ([`crate::smt::encode`]); both sides must agree on every well-sorted input.

use super::sort::Sort;
use super::value::Value;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Lit(Value),
    Var(String),
    Get(Box<Expr>, String),
    MakeRecord(Vec<(String, Expr)>),
    /// Functional record update: `base` with `field` replaced.
    With(Box<Expr>, String, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    /// N-ary conjunction; the empty conjunction is `true`.
    And(Vec<Expr>),
    /// N-ary disjunction; the empty disjunction is `false`.
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Neq(Box<Expr>, Box<Expr>),
    Lt(Box<Expr>, Box<Expr>),
    Leq(Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    /// Saturates at zero on `Int`, wraps on bit-vectors.
    Sub(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    SetContains(Box<Expr>, String),
    SetInsert(Box<Expr>, String),
    None(Sort),
    Some(Box<Expr>),
    /// `match scrutinee { None => none, Some(bind) => some }`
    OptionCase {
        scrutinee: Box<Expr>,
        none: Box<Expr>,
        bind: String,
        some: Box<Expr>,
    },
}

pub fn var(name: impl Into<String>) -> Expr {
    Expr::Var(name.into())
}

pub fn lit(v: Value) -> Expr {
    Expr::Lit(v)
}

pub fn tt() -> Expr {
    Expr::Lit(Value::Bool(true))
}

pub fn ff() -> Expr {
    Expr::Lit(Value::Bool(false))
}

pub fn int(n: u64) -> Expr {
    Expr::Lit(Value::int(n))
}

pub fn bv(width: u32, bits: u128) -> Expr {
    Expr::Lit(Value::bv(width, bits))
}

pub fn and(items: impl IntoIterator<Item = Expr>) -> Expr {
    Expr::And(items.into_iter().collect())
}

pub fn or(items: impl IntoIterator<Item = Expr>) -> Expr {
    Expr::Or(items.into_iter().collect())
}

pub fn none(sort: Sort) -> Expr {
    Expr::None(sort)
}

pub fn some(e: Expr) -> Expr {
    Expr::Some(Box::new(e))
}

pub fn ite(c: Expr, t: Expr, e: Expr) -> Expr {
    Expr::If(Box::new(c), Box::new(t), Box::new(e))
}

pub fn make_record<I, S>(fields: I) -> Expr
where
    I: IntoIterator<Item = (S, Expr)>,
    S: Into<String>,
{
    Expr::MakeRecord(fields.into_iter().map(|(n, e)| (n.into(), e)).collect())
}

/// `match scrutinee { None => on_none, Some(bind) => on_some }`
pub fn case(scrutinee: Expr, on_none: Expr, bind: impl Into<String>, on_some: Expr) -> Expr {
    Expr::OptionCase {
        scrutinee: Box::new(scrutinee),
        none: Box::new(on_none),
        bind: bind.into(),
        some: Box::new(on_some),
    }
}

impl Expr {
    pub fn get(self, field: impl Into<String>) -> Expr {
        Expr::Get(Box::new(self), field.into())
    }

    pub fn with(self, field: impl Into<String>, value: Expr) -> Expr {
        Expr::With(Box::new(self), field.into(), Box::new(value))
    }

    pub fn eq(self, other: Expr) -> Expr {
        Expr::Eq(Box::new(self), Box::new(other))
    }

    pub fn neq(self, other: Expr) -> Expr {
        Expr::Neq(Box::new(self), Box::new(other))
    }

    pub fn lt(self, other: Expr) -> Expr {
        Expr::Lt(Box::new(self), Box::new(other))
    }

    pub fn leq(self, other: Expr) -> Expr {
        Expr::Leq(Box::new(self), Box::new(other))
    }

    pub fn add(self, other: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(other))
    }

    pub fn sub(self, other: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(other))
    }

    pub fn min(self, other: Expr) -> Expr {
        Expr::Min(Box::new(self), Box::new(other))
    }

    pub fn max(self, other: Expr) -> Expr {
        Expr::Max(Box::new(self), Box::new(other))
    }

    pub fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }

    pub fn implies(self, other: Expr) -> Expr {
        Expr::Or(vec![self.not(), other])
    }

    pub fn contains(self, item: impl Into<String>) -> Expr {
        Expr::SetContains(Box::new(self), item.into())
    }

    pub fn insert(self, item: impl Into<String>) -> Expr {
        Expr::SetInsert(Box::new(self), item.into())
    }

    pub fn is_true_literal(&self) -> bool {
        matches!(self, Expr::Lit(Value::Bool(true)))
    }

    /// Immediate subexpressions, paired with the binder (if any) they are under.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Lit(_) | Expr::Var(_) | Expr::None(_) => vec![],
            Expr::Get(e, _)
            | Expr::Not(e)
            | Expr::SetContains(e, _)
            | Expr::SetInsert(e, _)
            | Expr::Some(e) => vec![e],
            Expr::MakeRecord(fields) => fields.iter().map(|(_, e)| e).collect(),
            Expr::With(a, _, b)
            | Expr::Eq(a, b)
            | Expr::Neq(a, b)
            | Expr::Lt(a, b)
            | Expr::Leq(a, b)
            | Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => vec![a, b],
            Expr::If(c, t, e) => vec![c, t, e],
            Expr::And(items) | Expr::Or(items) => items.iter().collect(),
            Expr::OptionCase {
                scrutinee,
                none,
                some,
                ..
            } => vec![scrutinee, none, some],
        }
    }

    /// Free variables, in sorted order.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(name) => {
                if !bound.contains(&name.as_str()) {
                    out.insert(name.clone());
                }
            }
            Expr::OptionCase {
                scrutinee,
                none,
                bind,
                some,
            } => {
                scrutinee.collect_free(bound, out);
                none.collect_free(bound, out);
                bound.push(bind);
                some.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// String literals used by set operations and set-valued literals.
    pub fn collect_strings(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Lit(v) => v.collect_strings(out),
            Expr::SetContains(e, s) | Expr::SetInsert(e, s) => {
                out.insert(s.clone());
                e.collect_strings(out);
            }
            _ => {
                for c in self.children() {
                    c.collect_strings(out);
                }
            }
        }
    }

    /// Replaces free occurrences of variable `from` by variable `to`.
    ///
    /// `to` must not be bound by any `OptionCase` inside `self`; callers use
    /// reserved (`$`-prefixed) names, which user binders cannot take.
    pub fn rename_free(&self, from: &str, to: &str) -> Expr {
        self.rename_many(&[(from, to)])
    }

    /// Simultaneous renaming of several free variables.
    pub fn rename_many(&self, pairs: &[(&str, &str)]) -> Expr {
        match self {
            Expr::Var(name) => match pairs.iter().find(|(f, _)| f == name) {
                Some((_, to)) => Expr::Var((*to).to_string()),
                None => self.clone(),
            },
            Expr::OptionCase {
                scrutinee,
                none,
                bind,
                some,
            } => {
                let inner: Vec<(&str, &str)> =
                    pairs.iter().copied().filter(|(f, _)| f != bind).collect();
                Expr::OptionCase {
                    scrutinee: Box::new(scrutinee.rename_many(pairs)),
                    none: Box::new(none.rename_many(pairs)),
                    bind: bind.clone(),
                    some: Box::new(some.rename_many(&inner)),
                }
            }
            _ => self.map_children(|c| c.rename_many(pairs)),
        }
    }

    /// Replaces free variables by literal values.
    pub fn substitute_values(&self, values: &std::collections::BTreeMap<String, Value>) -> Expr {
        match self {
            Expr::Var(name) => match values.get(name) {
                Some(v) => Expr::Lit(v.clone()),
                None => self.clone(),
            },
            Expr::OptionCase {
                scrutinee,
                none,
                bind,
                some,
            } => {
                let mut inner = values.clone();
                inner.remove(bind);
                Expr::OptionCase {
                    scrutinee: Box::new(scrutinee.substitute_values(values)),
                    none: Box::new(none.substitute_values(values)),
                    bind: bind.clone(),
                    some: Box::new(some.substitute_values(&inner)),
                }
            }
            _ => self.map_children(|c| c.substitute_values(values)),
        }
    }

    fn map_children(&self, f: impl Fn(&Expr) -> Expr) -> Expr {
        let b = |e: &Expr| Box::new(f(e));
        match self {
            Expr::Lit(_) | Expr::Var(_) | Expr::None(_) => self.clone(),
            Expr::Get(e, n) => Expr::Get(b(e), n.clone()),
            Expr::MakeRecord(fields) => {
                Expr::MakeRecord(fields.iter().map(|(n, e)| (n.clone(), f(e))).collect())
            }
            Expr::With(a, n, v) => Expr::With(b(a), n.clone(), b(v)),
            Expr::If(c, t, e) => Expr::If(b(c), b(t), b(e)),
            Expr::And(items) => Expr::And(items.iter().map(&f).collect()),
            Expr::Or(items) => Expr::Or(items.iter().map(&f).collect()),
            Expr::Not(e) => Expr::Not(b(e)),
            Expr::Eq(x, y) => Expr::Eq(b(x), b(y)),
            Expr::Neq(x, y) => Expr::Neq(b(x), b(y)),
            Expr::Lt(x, y) => Expr::Lt(b(x), b(y)),
            Expr::Leq(x, y) => Expr::Leq(b(x), b(y)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Min(x, y) => Expr::Min(b(x), b(y)),
            Expr::Max(x, y) => Expr::Max(b(x), b(y)),
            Expr::SetContains(e, s) => Expr::SetContains(b(e), s.clone()),
            Expr::SetInsert(e, s) => Expr::SetInsert(b(e), s.clone()),
            Expr::Some(e) => Expr::Some(b(e)),
            Expr::OptionCase {
                scrutinee,
                none,
                bind,
                some,
            } => Expr::OptionCase {
                scrutinee: b(scrutinee),
                none: b(none),
                bind: bind.clone(),
                some: b(some),
            },
        }
    }

    pub fn op_name(&self) -> &'static str {
        match self {
            Expr::Lit(_) => "lit",
            Expr::Var(_) => "var",
            Expr::Get(..) => "get",
            Expr::MakeRecord(_) => "record",
            Expr::With(..) => "with",
            Expr::If(..) => "if",
            Expr::And(_) => "and",
            Expr::Or(_) => "or",
            Expr::Not(_) => "not",
            Expr::Eq(..) => "eq",
            Expr::Neq(..) => "neq",
            Expr::Lt(..) => "lt",
            Expr::Leq(..) => "leq",
            Expr::Add(..) => "add",
            Expr::Sub(..) => "sub",
            Expr::Min(..) => "min",
            Expr::Max(..) => "max",
            Expr::SetContains(..) => "contains",
            Expr::SetInsert(..) => "insert",
            Expr::None(_) => "none",
            Expr::Some(_) => "some",
            Expr::OptionCase { .. } => "case",
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(n) => write!(f, "{n}"),
            Expr::Get(e, n) => write!(f, "{e}.{n}"),
            Expr::MakeRecord(fields) => {
                write!(f, "{{")?;
                for (i, (n, e)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n} = {e}")?;
                }
                write!(f, "}}")
            }
            Expr::With(e, n, v) => write!(f, "({e} with {n} = {v})"),
            Expr::If(c, t, e) => write!(f, "(if {c} then {t} else {e})"),
            Expr::And(items) if items.is_empty() => write!(f, "true"),
            Expr::Or(items) if items.is_empty() => write!(f, "false"),
            Expr::And(items) | Expr::Or(items) => {
                let op = if matches!(self, Expr::And(_)) { " ∧ " } else { " ∨ " };
                write!(f, "(")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{op}")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            Expr::Not(e) => write!(f, "¬{e}"),
            Expr::Eq(a, b) => write!(f, "({a} = {b})"),
            Expr::Neq(a, b) => write!(f, "({a} ≠ {b})"),
            Expr::Lt(a, b) => write!(f, "({a} < {b})"),
            Expr::Leq(a, b) => write!(f, "({a} ≤ {b})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Min(a, b) => write!(f, "min({a}, {b})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
            Expr::SetContains(e, s) => write!(f, "({s} ∈ {e})"),
            Expr::SetInsert(e, s) => write!(f, "({e} ∪ {{{s}}})"),
            Expr::None(_) => write!(f, "∅"),
            Expr::Some(e) => write!(f, "some({e})"),
            Expr::OptionCase {
                scrutinee,
                none,
                bind,
                some,
            } => write!(f, "(case {scrutinee} of ∅ ⇒ {none} | {bind} ⇒ {some})"),
        }
    }
}
