use super::sort::Sort;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// A concrete inhabitant of a [`Sort`]. Values carry enough information to recover
/// their sort (`None` remembers its inner sort, enum values their label list).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Bool(bool),
    Int(BigUint),
    BitVec {
        width: u32,
        #[serde(with = "decimal")]
        bits: u128,
    },
    Enum { labels: Vec<String>, index: usize },
    StringSet(BTreeSet<String>),
    Option { inner: Sort, value: Option<Box<Value>> },
    Record(Vec<(String, Value)>),
}

/// `u128` as a decimal string, since serde's buffered formats reject 128-bit integers.
mod decimal {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(bits)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

pub(crate) fn mask(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

impl Value {
    pub fn int(n: u64) -> Value {
        Value::Int(BigUint::from(n))
    }

    pub fn bv(width: u32, bits: u128) -> Value {
        Value::BitVec {
            width,
            bits: bits & mask(width),
        }
    }

    pub fn none(inner: Sort) -> Value {
        Value::Option { inner, value: None }
    }

    pub fn some(v: Value) -> Value {
        Value::Option {
            inner: v.sort(),
            value: Some(Box::new(v)),
        }
    }

    pub fn label(labels: &[String], label: &str) -> Option<Value> {
        labels.iter().position(|l| l == label).map(|index| Value::Enum {
            labels: labels.to_vec(),
            index,
        })
    }

    pub fn set<I, S>(items: I) -> Value
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Value::StringSet(items.into_iter().map(Into::into).collect())
    }

    pub fn record<I, S>(fields: I) -> Value
    where
        I: IntoIterator<Item = (S, Value)>,
        S: Into<String>,
    {
        Value::Record(fields.into_iter().map(|(n, v)| (n.into(), v)).collect())
    }

    pub fn sort(&self) -> Sort {
        match self {
            Value::Bool(_) => Sort::Bool,
            Value::Int(_) => Sort::Int,
            Value::BitVec { width, .. } => Sort::BitVec(*width),
            Value::Enum { labels, .. } => Sort::Enum(labels.clone()),
            Value::StringSet(_) => Sort::StringSet,
            Value::Option { inner, .. } => Sort::Option(Box::new(inner.clone())),
            Value::Record(fields) => {
                Sort::Record(fields.iter().map(|(n, v)| (n.clone(), v.sort())).collect())
            }
        }
    }

    /// True if the value is an inhabitant of `sort`.
    pub fn conforms(&self, sort: &Sort) -> bool {
        match (self, sort) {
            (Value::Bool(_), Sort::Bool) | (Value::Int(_), Sort::Int) => true,
            (Value::StringSet(_), Sort::StringSet) => true,
            (Value::BitVec { width, bits }, Sort::BitVec(w)) => {
                width == w && *bits & !mask(*w) == 0
            }
            (Value::Enum { labels, index }, Sort::Enum(ls)) => labels == ls && *index < ls.len(),
            (Value::Option { inner, value }, Sort::Option(s)) => {
                **s == *inner && value.as_ref().is_none_or(|v| v.conforms(s))
            }
            (Value::Record(fields), Sort::Record(sorts)) => {
                fields.len() == sorts.len()
                    && fields
                        .iter()
                        .zip(sorts)
                        .all(|((n, v), (m, s))| n == m && v.conforms(s))
            }
            _ => false,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn field(&self, name: &str) -> Option<&Value> {
        match self {
            Value::Record(fields) => fields.iter().find(|(n, _)| n == name).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Value::Option { value: None, .. })
    }

    /// String literals mentioned inside the value (elements of string sets).
    pub fn collect_strings(&self, out: &mut BTreeSet<String>) {
        match self {
            Value::StringSet(items) => out.extend(items.iter().cloned()),
            Value::Option { value: Some(v), .. } => v.collect_strings(out),
            Value::Record(fields) => fields.iter().for_each(|(_, v)| v.collect_strings(out)),
            _ => {}
        }
    }
}

/// Compact rendering: records as `⟨f1,f2,…⟩`, the absent route as `∅`, `some(x)` as `x`.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::BitVec { bits, .. } => write!(f, "{bits}"),
            Value::Enum { labels, index } => write!(f, "{}", labels[*index]),
            Value::StringSet(items) => {
                write!(f, "{{")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, "}}")
            }
            Value::Option { value: None, .. } => write!(f, "∅"),
            Value::Option { value: Some(v), .. } => write!(f, "{v}"),
            Value::Record(fields) => {
                write!(f, "⟨")?;
                for (i, (_, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "⟩")
            }
        }
    }
}
