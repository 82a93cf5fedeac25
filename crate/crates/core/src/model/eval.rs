use super::expr::Expr;
use super::value::{mask, Value};
use num_bigint::BigUint;
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

pub type ValueEnv = BTreeMap<String, Value>;

/// Evaluation only fails when its precondition (well-sorted, closed under `env`)
/// is violated.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("ill-sorted operand for `{op}`: {value}")]
    IllSorted { op: &'static str, value: String },
}

pub fn eval(expr: &Expr, env: &ValueEnv) -> Result<Value, EvalError> {
    let mut locals = Vec::new();
    go(expr, env, &mut locals)
}

/// Evaluates a predicate to a boolean.
pub fn eval_bool(expr: &Expr, env: &ValueEnv) -> Result<bool, EvalError> {
    let v = eval(expr, env)?;
    v.as_bool().ok_or_else(|| EvalError::IllSorted {
        op: "predicate",
        value: v.to_string(),
    })
}

fn ill(op: &'static str, v: &Value) -> EvalError {
    EvalError::IllSorted {
        op,
        value: format!("{v:?}"),
    }
}

fn go(expr: &Expr, env: &ValueEnv, locals: &mut Vec<(String, Value)>) -> Result<Value, EvalError> {
    let op = expr.op_name();
    match expr {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Var(name) => locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .or_else(|| env.get(name))
            .cloned()
            .ok_or_else(|| EvalError::Unbound(name.clone())),
        Expr::Get(e, field) => {
            let r = go(e, env, locals)?;
            r.field(field).cloned().ok_or_else(|| ill(op, &r))
        }
        Expr::MakeRecord(fields) => {
            let mut out = Vec::with_capacity(fields.len());
            for (n, e) in fields {
                out.push((n.clone(), go(e, env, locals)?));
            }
            Ok(Value::Record(out))
        }
        Expr::With(base, field, value) => {
            let r = go(base, env, locals)?;
            let v = go(value, env, locals)?;
            match r {
                Value::Record(mut fields) => {
                    let slot = fields
                        .iter_mut()
                        .find(|(n, _)| n == field)
                        .ok_or_else(|| EvalError::IllSorted {
                            op,
                            value: format!("missing field {field}"),
                        })?;
                    slot.1 = v;
                    Ok(Value::Record(fields))
                }
                other => Err(ill(op, &other)),
            }
        }
        Expr::If(c, t, e) => {
            if boolean(go(c, env, locals)?, op)? {
                go(t, env, locals)
            } else {
                go(e, env, locals)
            }
        }
        Expr::And(items) => {
            for e in items {
                if !boolean(go(e, env, locals)?, op)? {
                    return Ok(Value::Bool(false));
                }
            }
            Ok(Value::Bool(true))
        }
        Expr::Or(items) => {
            for e in items {
                if boolean(go(e, env, locals)?, op)? {
                    return Ok(Value::Bool(true));
                }
            }
            Ok(Value::Bool(false))
        }
        Expr::Not(e) => Ok(Value::Bool(!boolean(go(e, env, locals)?, op)?)),
        Expr::Eq(a, b) => Ok(Value::Bool(go(a, env, locals)? == go(b, env, locals)?)),
        Expr::Neq(a, b) => Ok(Value::Bool(go(a, env, locals)? != go(b, env, locals)?)),
        Expr::Lt(a, b) | Expr::Leq(a, b) | Expr::Min(a, b) | Expr::Max(a, b) => {
            let x = go(a, env, locals)?;
            let y = go(b, env, locals)?;
            let ord = match (&x, &y) {
                (Value::Int(m), Value::Int(n)) => m.cmp(n),
                (Value::BitVec { bits: m, .. }, Value::BitVec { bits: n, .. }) => m.cmp(n),
                _ => return Err(ill(op, &x)),
            };
            Ok(match expr {
                Expr::Lt(..) => Value::Bool(ord.is_lt()),
                Expr::Leq(..) => Value::Bool(ord.is_le()),
                Expr::Min(..) => {
                    if ord.is_le() {
                        x
                    } else {
                        y
                    }
                }
                _ => {
                    if ord.is_ge() {
                        x
                    } else {
                        y
                    }
                }
            })
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let x = go(a, env, locals)?;
            let y = go(b, env, locals)?;
            let add = matches!(expr, Expr::Add(..));
            match (x, y) {
                (Value::Int(m), Value::Int(n)) => Ok(Value::Int(if add {
                    m + n
                } else if m < n {
                    BigUint::zero()
                } else {
                    m - n
                })),
                (Value::BitVec { width, bits: m }, Value::BitVec { bits: n, .. }) => {
                    let bits = if add {
                        m.wrapping_add(n)
                    } else {
                        m.wrapping_sub(n)
                    };
                    Ok(Value::BitVec {
                        width,
                        bits: bits & mask(width),
                    })
                }
                (x, _) => Err(ill(op, &x)),
            }
        }
        Expr::SetContains(e, item) => match go(e, env, locals)? {
            Value::StringSet(items) => Ok(Value::Bool(items.contains(item))),
            other => Err(ill(op, &other)),
        },
        Expr::SetInsert(e, item) => match go(e, env, locals)? {
            Value::StringSet(mut items) => {
                items.insert(item.clone());
                Ok(Value::StringSet(items))
            }
            other => Err(ill(op, &other)),
        },
        Expr::None(s) => Ok(Value::none(s.clone())),
        Expr::Some(e) => Ok(Value::some(go(e, env, locals)?)),
        Expr::OptionCase {
            scrutinee,
            none,
            bind,
            some,
        } => match go(scrutinee, env, locals)? {
            Value::Option { value: None, .. } => go(none, env, locals),
            Value::Option { value: Some(v), .. } => {
                locals.push((bind.clone(), *v));
                let r = go(some, env, locals);
                locals.pop();
                r
            }
            other => Err(ill(op, &other)),
        },
    }
}

fn boolean(v: Value, op: &'static str) -> Result<bool, EvalError> {
    v.as_bool().ok_or_else(|| ill(op, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::*;

    #[test]
    fn saturating_int_sub_and_wrapping_bv_sub() {
        let env = ValueEnv::new();
        assert_eq!(eval(&int(2).sub(int(5)), &env), Ok(Value::int(0)));
        assert_eq!(eval(&int(7).sub(int(5)), &env), Ok(Value::int(2)));
        assert_eq!(eval(&bv(8, 2).sub(bv(8, 5)), &env), Ok(Value::bv(8, 253)));
        assert_eq!(eval(&bv(8, 255).add(bv(8, 1)), &env), Ok(Value::bv(8, 0)));
    }

    #[test]
    fn case_binds_payload() {
        let env = ValueEnv::from([("x".to_string(), Value::some(Value::int(4)))]);
        let e = case(var("x"), int(0), "y", var("y").add(int(1)));
        assert_eq!(eval(&e, &env), Ok(Value::int(5)));
    }

    #[test]
    fn sets() {
        let env = ValueEnv::from([("c".to_string(), Value::set(["D"]))]);
        assert_eq!(eval(&var("c").contains("D"), &env), Ok(Value::Bool(true)));
        assert_eq!(
            eval(&var("c").insert("BTE"), &env),
            Ok(Value::set(["BTE", "D"]))
        );
    }
}
