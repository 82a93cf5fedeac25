//! Seeded random generation of values and well-sorted expressions, used by the
//! merge-law checker and by the randomized test suites.

use super::eval::{eval_bool, EvalError, ValueEnv};
use super::expr::{self, Expr};
use super::network::SymbolicVar;
use super::sort::Sort;
use super::value::{mask, Value};
use rand::seq::SliceRandom;
use rand::Rng;

/// Attempts to satisfy symbolic assumptions by rejection sampling before giving up.
const ASSUMPTION_ATTEMPTS: usize = 256;

#[derive(Clone, Debug)]
pub struct ValueGen {
    alphabet: Vec<String>,
}

impl ValueGen {
    pub fn new(alphabet: Vec<String>) -> ValueGen {
        ValueGen { alphabet }
    }

    /// Draws a value of `sort`. Numbers come from a small pool so that ties and
    /// equal routes occur often.
    pub fn value<R: Rng>(&self, sort: &Sort, rng: &mut R) -> Value {
        match sort {
            Sort::Bool => Value::Bool(rng.gen()),
            Sort::Int => Value::int(rng.gen_range(0..8)),
            Sort::BitVec(w) => {
                let bits = match rng.gen_range(0..6) {
                    0 => 0,
                    1 => 1,
                    2 => 100,
                    3 => 200,
                    4 => u128::MAX,
                    _ => rng.gen::<u128>(),
                };
                Value::bv(*w, bits & mask(*w))
            }
            Sort::Enum(labels) => Value::Enum {
                labels: labels.clone(),
                index: rng.gen_range(0..labels.len()),
            },
            Sort::StringSet => Value::set(
                self.alphabet
                    .iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .cloned()
                    .collect::<Vec<_>>(),
            ),
            Sort::Option(inner) => {
                if rng.gen_bool(0.25) {
                    Value::none((**inner).clone())
                } else {
                    Value::some(self.value(inner, rng))
                }
            }
            Sort::Record(fields) => Value::Record(
                fields
                    .iter()
                    .map(|(n, s)| (n.clone(), self.value(s, rng)))
                    .collect(),
            ),
        }
    }

    /// Draws values for symbolic variables, retrying until their assumptions hold.
    /// After [`ASSUMPTION_ATTEMPTS`] failures the last draw is returned as is.
    pub fn symbolic_assignment<R: Rng>(
        &self,
        symbolics: &[SymbolicVar],
        rng: &mut R,
    ) -> Result<ValueEnv, EvalError> {
        let mut env = ValueEnv::new();
        for _ in 0..ASSUMPTION_ATTEMPTS {
            env = symbolics
                .iter()
                .map(|s| (s.name.clone(), self.value(&s.sort, rng)))
                .collect();
            let mut ok = true;
            for s in symbolics {
                if let Some(a) = &s.assumption {
                    ok &= eval_bool(a, &env)?;
                }
            }
            if ok {
                break;
            }
        }
        Ok(env)
    }
}

/// Generator of random well-sorted expressions over a fixed set of variables,
/// one or two per sort family.
#[derive(Clone, Debug)]
pub struct ExprGen {
    vars: Vec<(String, Sort)>,
    values: ValueGen,
}

pub fn route_record_sort() -> Sort {
    Sort::record([
        ("lp", Sort::BitVec(8)),
        ("len", Sort::Int),
        ("tag", Sort::Bool),
        ("comms", Sort::StringSet),
    ])
}

fn color_sort() -> Sort {
    Sort::enumeration(["red", "green", "blue"])
}

impl Default for ExprGen {
    fn default() -> Self {
        let vars = vec![
            ("b0", Sort::Bool),
            ("b1", Sort::Bool),
            ("i0", Sort::Int),
            ("i1", Sort::Int),
            ("x0", Sort::BitVec(8)),
            ("x1", Sort::BitVec(8)),
            ("e0", color_sort()),
            ("c0", Sort::StringSet),
            ("o0", Sort::option(Sort::Int)),
            ("r0", route_record_sort()),
            ("q0", Sort::option(route_record_sort())),
        ];
        ExprGen {
            vars: vars.into_iter().map(|(n, s)| (n.to_string(), s)).collect(),
            values: ValueGen::new(vec!["A".into(), "B".into(), "D".into()]),
        }
    }
}

impl ExprGen {
    /// The sort families the differential suite covers, by name.
    pub fn families() -> Vec<(&'static str, Sort)> {
        vec![
            ("bool", Sort::Bool),
            ("int", Sort::Int),
            ("bitvec", Sort::BitVec(8)),
            ("enum", color_sort()),
            ("stringset", Sort::StringSet),
            ("option", Sort::option(Sort::Int)),
            ("record", route_record_sort()),
            ("option-record", Sort::option(route_record_sort())),
        ]
    }

    pub fn sort_env(&self) -> super::typecheck::SortEnv {
        self.vars.iter().cloned().collect()
    }

    pub fn env<R: Rng>(&self, rng: &mut R) -> ValueEnv {
        self.vars
            .iter()
            .map(|(n, s)| (n.clone(), self.values.value(s, rng)))
            .collect()
    }

    pub fn expr<R: Rng>(&self, sort: &Sort, depth: u32, rng: &mut R) -> Expr {
        let mut scope = self.vars.clone();
        self.gen(sort, depth, rng, &mut scope)
    }

    fn leaf<R: Rng>(&self, sort: &Sort, rng: &mut R, scope: &[(String, Sort)]) -> Expr {
        let candidates: Vec<&String> = scope
            .iter()
            .filter(|(_, s)| s == sort)
            .map(|(n, _)| n)
            .collect();
        if !candidates.is_empty() && rng.gen_bool(0.6) {
            expr::var(candidates.choose(rng).unwrap().as_str())
        } else {
            expr::lit(self.values.value(sort, rng))
        }
    }

    fn gen<R: Rng>(
        &self,
        sort: &Sort,
        depth: u32,
        rng: &mut R,
        scope: &mut Vec<(String, Sort)>,
    ) -> Expr {
        if depth == 0 || rng.gen_bool(0.2) {
            return self.leaf(sort, rng, scope);
        }
        let d = depth - 1;
        // Shared productions: conditionals and option elimination.
        match rng.gen_range(0..10) {
            0 => {
                let c = self.gen(&Sort::Bool, d, rng, scope);
                let t = self.gen(sort, d, rng, scope);
                let e = self.gen(sort, d, rng, scope);
                return expr::ite(c, t, e);
            }
            1 => {
                let inner = if rng.gen_bool(0.5) {
                    Sort::Int
                } else {
                    route_record_sort()
                };
                let scrutinee = self.gen(&Sort::option(inner.clone()), d, rng, scope);
                let on_none = self.gen(sort, d, rng, scope);
                let bind = format!("y{}", scope.len());
                scope.push((bind.clone(), inner));
                let on_some = self.gen(sort, d, rng, scope);
                scope.pop();
                return expr::case(scrutinee, on_none, bind, on_some);
            }
            _ => {}
        }
        match sort {
            Sort::Bool => match rng.gen_range(0..8) {
                0 => expr::and((0..rng.gen_range(0..3)).map(|_| self.gen(sort, d, rng, scope))),
                1 => expr::or((0..rng.gen_range(0..3)).map(|_| self.gen(sort, d, rng, scope))),
                2 => self.gen(sort, d, rng, scope).not(),
                3 | 4 => {
                    let families = Self::families();
                    let (_, s) = families.choose(rng).unwrap();
                    let a = self.gen(s, d, rng, scope);
                    let b = self.gen(s, d, rng, scope);
                    if rng.gen_bool(0.5) {
                        a.eq(b)
                    } else {
                        a.neq(b)
                    }
                }
                5 => {
                    let s = if rng.gen_bool(0.5) { Sort::Int } else { Sort::BitVec(8) };
                    let a = self.gen(&s, d, rng, scope);
                    let b = self.gen(&s, d, rng, scope);
                    if rng.gen_bool(0.5) {
                        a.lt(b)
                    } else {
                        a.leq(b)
                    }
                }
                6 => self
                    .gen(&Sort::StringSet, d, rng, scope)
                    .contains(self.letter(rng)),
                _ => self.gen(&route_record_sort(), d, rng, scope).get("tag"),
            },
            Sort::Int | Sort::BitVec(_) => {
                if matches!(sort, Sort::Int) && rng.gen_bool(0.15) {
                    return self.gen(&route_record_sort(), d, rng, scope).get("len");
                }
                if matches!(sort, Sort::BitVec(8)) && rng.gen_bool(0.15) {
                    return self.gen(&route_record_sort(), d, rng, scope).get("lp");
                }
                let a = self.gen(sort, d, rng, scope);
                let b = self.gen(sort, d, rng, scope);
                match rng.gen_range(0..4) {
                    0 => a.add(b),
                    1 => a.sub(b),
                    2 => a.min(b),
                    _ => a.max(b),
                }
            }
            Sort::StringSet => {
                if rng.gen_bool(0.3) {
                    self.gen(&route_record_sort(), d, rng, scope).get("comms")
                } else {
                    self.gen(sort, d, rng, scope).insert(self.letter(rng))
                }
            }
            Sort::Option(inner) => match rng.gen_range(0..3) {
                0 => expr::none((**inner).clone()),
                1 => expr::some(self.gen(inner, d, rng, scope)),
                _ => self.leaf(sort, rng, scope),
            },
            Sort::Record(fields) => {
                if rng.gen_bool(0.5) {
                    expr::make_record(
                        fields
                            .iter()
                            .map(|(n, s)| (n.clone(), self.gen(s, d, rng, scope)))
                            .collect::<Vec<_>>(),
                    )
                } else {
                    let (n, s) = fields.choose(rng).unwrap();
                    let base = self.gen(sort, d, rng, scope);
                    let v = self.gen(s, d, rng, scope);
                    base.with(n.clone(), v)
                }
            }
            Sort::Enum(_) => self.leaf(sort, rng, scope),
        }
    }

    fn letter<R: Rng>(&self, rng: &mut R) -> String {
        // Occasionally use a literal outside the variables' alphabet.
        ["A", "B", "D", "Z"].choose(rng).unwrap().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eval::eval;
    use crate::model::typecheck::sort_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_expressions_are_well_sorted_and_evaluate() {
        let g = ExprGen::default();
        let senv = g.sort_env();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (_, sort) in ExprGen::families() {
            for _ in 0..200 {
                let e = g.expr(&sort, 4, &mut rng);
                assert_eq!(sort_check(&e, &senv).as_ref(), Ok(&sort), "{e}");
                let env = g.env(&mut rng);
                let v = eval(&e, &env).unwrap();
                assert!(v.conforms(&sort), "{e} gave {v:?}");
            }
        }
    }
}
