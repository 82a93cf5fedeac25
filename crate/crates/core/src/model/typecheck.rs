use super::expr::Expr;
use super::sort::Sort;
use std::collections::BTreeMap;
use thiserror::Error;

pub type SortEnv = BTreeMap<String, Sort>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("sort error at {path}: expected {expected}, found {found}")]
    Sort {
        path: String,
        expected: String,
        found: Sort,
    },
    #[error("unbound variable `{name}` at {path}")]
    UnboundVar { path: String, name: String },
    #[error("malformed sort at {path}: {reason}")]
    MalformedSort { path: String, reason: String },
}

/// Infers the unique sort of `expr` under `env`.
///
/// Error paths name each step from the root, e.g. `if.else/get` for the field
/// projection in the else-branch of a top-level conditional.
pub fn sort_check(expr: &Expr, env: &SortEnv) -> Result<Sort, TypeError> {
    let mut scope = Scope {
        env,
        locals: Vec::new(),
    };
    infer(expr, &mut scope, &mut Vec::new())
}

/// Checks that `expr` has sort `want`.
pub fn expect_sort(expr: &Expr, env: &SortEnv, want: &Sort) -> Result<(), TypeError> {
    let found = sort_check(expr, env)?;
    if &found == want {
        Ok(())
    } else {
        Err(TypeError::Sort {
            path: expr.op_name().to_string(),
            expected: want.to_string(),
            found,
        })
    }
}

struct Scope<'a> {
    env: &'a SortEnv,
    locals: Vec<(String, Sort)>,
}

impl Scope<'_> {
    fn lookup(&self, name: &str) -> Option<&Sort> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .or_else(|| self.env.get(name))
    }
}

fn render(path: &[String]) -> String {
    if path.is_empty() {
        "<root>".to_string()
    } else {
        path.join("/")
    }
}

fn mismatch(path: &[String], expected: impl Into<String>, found: Sort) -> TypeError {
    TypeError::Sort {
        path: render(path),
        expected: expected.into(),
        found,
    }
}

fn infer(expr: &Expr, scope: &mut Scope<'_>, path: &mut Vec<String>) -> Result<Sort, TypeError> {
    let op = expr.op_name();
    // Sorts a child expression, recording `op.role` in the path while doing so.
    macro_rules! sub {
        ($e:expr, $role:expr) => {{
            path.push(format!("{op}.{}", $role));
            let r = infer($e, scope, path);
            path.pop();
            r?
        }};
    }
    macro_rules! want {
        ($e:expr, $role:expr, $sort:expr) => {{
            let found = sub!($e, $role);
            if found != $sort {
                path.push(format!("{op}.{}", $role));
                let err = mismatch(path, $sort.to_string(), found);
                path.pop();
                return Err(err);
            }
        }};
    }
    match expr {
        Expr::Lit(v) => {
            let s = v.sort();
            if !v.conforms(&s) {
                return Err(mismatch(path, "a well-formed literal", s));
            }
            Ok(s)
        }
        Expr::Var(name) => scope
            .lookup(name)
            .cloned()
            .ok_or_else(|| TypeError::UnboundVar {
                path: render(path),
                name: name.clone(),
            }),
        Expr::Get(e, field) => {
            let s = sub!(e, "record");
            match s.field(field) {
                Some(f) => Ok(f.clone()),
                None => Err(mismatch(path, format!("a record with field `{field}`"), s)),
            }
        }
        Expr::MakeRecord(fields) => {
            let mut out = Vec::with_capacity(fields.len());
            for (name, e) in fields {
                if out.iter().any(|(n, _): &(String, Sort)| n == name) {
                    return Err(TypeError::MalformedSort {
                        path: render(path),
                        reason: format!("duplicate record field `{name}`"),
                    });
                }
                out.push((name.clone(), sub!(e, name)));
            }
            Ok(Sort::Record(out))
        }
        Expr::With(base, field, value) => {
            let s = sub!(base, "record");
            let Some(fs) = s.field(field).cloned() else {
                return Err(mismatch(path, format!("a record with field `{field}`"), s));
            };
            want!(value, field, fs);
            Ok(s)
        }
        Expr::If(c, t, e) => {
            want!(c, "cond", Sort::Bool);
            let ts = sub!(t, "then");
            want!(e, "else", ts);
            Ok(ts)
        }
        Expr::And(items) | Expr::Or(items) => {
            for (i, e) in items.iter().enumerate() {
                want!(e, i, Sort::Bool);
            }
            Ok(Sort::Bool)
        }
        Expr::Not(e) => {
            want!(e, "arg", Sort::Bool);
            Ok(Sort::Bool)
        }
        Expr::Eq(a, b) | Expr::Neq(a, b) => {
            let s = sub!(a, "lhs");
            want!(b, "rhs", s);
            Ok(Sort::Bool)
        }
        Expr::Lt(a, b) | Expr::Leq(a, b) => {
            numeric_pair(a, b, scope, path, op)?;
            Ok(Sort::Bool)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Min(a, b) | Expr::Max(a, b) => {
            numeric_pair(a, b, scope, path, op)
        }
        Expr::SetContains(e, _) => {
            want!(e, "set", Sort::StringSet);
            Ok(Sort::Bool)
        }
        Expr::SetInsert(e, _) => {
            want!(e, "set", Sort::StringSet);
            Ok(Sort::StringSet)
        }
        Expr::None(s) => {
            s.well_formed().map_err(|reason| TypeError::MalformedSort {
                path: render(path),
                reason,
            })?;
            Ok(Sort::option(s.clone()))
        }
        Expr::Some(e) => Ok(Sort::option(sub!(e, "arg"))),
        Expr::OptionCase {
            scrutinee,
            none,
            bind,
            some,
        } => {
            let s = sub!(scrutinee, "scrutinee");
            let Sort::Option(inner) = s else {
                return Err(mismatch(path, "an option", s));
            };
            let ns = sub!(none, "none");
            scope.locals.push((bind.clone(), *inner));
            path.push(format!("{op}.some"));
            let r = infer(some, scope, path);
            path.pop();
            scope.locals.pop();
            let ss = r?;
            if ss != ns {
                path.push(format!("{op}.some"));
                let err = mismatch(path, ns.to_string(), ss);
                path.pop();
                return Err(err);
            }
            Ok(ns)
        }
    }
}

fn numeric_pair(
    a: &Expr,
    b: &Expr,
    scope: &mut Scope<'_>,
    path: &mut Vec<String>,
    op: &str,
) -> Result<Sort, TypeError> {
    path.push(format!("{op}.lhs"));
    let sa = infer(a, scope, path);
    path.pop();
    let sa = sa?;
    if !sa.is_numeric() {
        path.push(format!("{op}.lhs"));
        let err = mismatch(path, "int or bit-vector", sa);
        path.pop();
        return Err(err);
    }
    path.push(format!("{op}.rhs"));
    let sb = infer(b, scope, path);
    let r = match sb {
        Ok(sb) if sb == sa => Ok(sa),
        Ok(sb) => Err(mismatch(path, sa.to_string(), sb)),
        Err(e) => Err(e),
    };
    path.pop();
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::*;
    use crate::model::value::Value;

    fn route() -> Sort {
        Sort::record([
            ("lp", Sort::BitVec(32)),
            ("len", Sort::Int),
            ("tag", Sort::Bool),
        ])
    }

    #[test]
    fn field_projection() {
        let env = SortEnv::from([("s".to_string(), route())]);
        assert_eq!(sort_check(&var("s").get("lp"), &env), Ok(Sort::BitVec(32)));
    }

    #[test]
    fn branch_mismatch() {
        let env = SortEnv::from([("x".to_string(), Sort::Int)]);
        let e = ite(var("x").lt(int(3)), tt(), int(0));
        match sort_check(&e, &env) {
            Err(TypeError::Sort { path, expected, found }) => {
                assert_eq!(path, "if.else");
                assert_eq!(expected, "bool");
                assert_eq!(found, Sort::Int);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn case_elimination() {
        let e = case(none(route()), int(0), "r", var("r").get("len"));
        assert_eq!(sort_check(&e, &SortEnv::new()), Ok(Sort::Int));
    }

    #[test]
    fn unbound_and_scoping() {
        let e = case(none(route()), var("r").get("len"), "r", var("r").get("len"));
        assert!(matches!(
            sort_check(&e, &SortEnv::new()),
            Err(TypeError::UnboundVar { name, .. }) if name == "r"
        ));
    }

    #[test]
    fn numeric_ops_reject_mixed_sorts() {
        let e = int(1).add(bv(8, 1));
        assert!(sort_check(&e, &SortEnv::new()).is_err());
        let e = lit(Value::Bool(true)).lt(tt());
        assert!(sort_check(&e, &SortEnv::new()).is_err());
    }
}
