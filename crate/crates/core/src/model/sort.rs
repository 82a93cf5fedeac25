use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Largest supported bit-vector width. Concrete bit patterns are stored in a `u128`.
pub const MAX_BITVEC_WIDTH: u32 = 128;

/// The universe a value (and in particular a route) is drawn from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Bool,
    /// Unbounded natural numbers.
    Int,
    BitVec(u32),
    Enum(Vec<String>),
    /// Finite set of string literals, drawn from the network's string alphabet.
    StringSet,
    Option(Box<Sort>),
    Record(Vec<(String, Sort)>),
}

impl Sort {
    pub fn option(inner: Sort) -> Sort {
        Sort::Option(Box::new(inner))
    }

    pub fn record<I, S>(fields: I) -> Sort
    where
        I: IntoIterator<Item = (S, Sort)>,
        S: Into<String>,
    {
        Sort::Record(fields.into_iter().map(|(n, s)| (n.into(), s)).collect())
    }

    pub fn enumeration<I, S>(labels: I) -> Sort
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Sort::Enum(labels.into_iter().map(Into::into).collect())
    }

    /// Sort of a record field, if this is a record with that field.
    pub fn field(&self, name: &str) -> Option<&Sort> {
        match self {
            Sort::Record(fields) => fields.iter().find(|(n, _)| n == name).map(|(_, s)| s),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Sort::Int | Sort::BitVec(_))
    }

    /// Checks the structural invariants: unique record fields, unique nonempty enum
    /// labels, and bit-vector widths in `1..=128`.
    pub fn well_formed(&self) -> Result<(), String> {
        match self {
            Sort::Bool | Sort::Int | Sort::StringSet => Ok(()),
            Sort::BitVec(w) => {
                if *w == 0 || *w > MAX_BITVEC_WIDTH {
                    Err(format!("bit-vector width {w} outside 1..={MAX_BITVEC_WIDTH}"))
                } else {
                    Ok(())
                }
            }
            Sort::Enum(labels) => {
                if labels.is_empty() {
                    return Err("enumeration without labels".into());
                }
                let mut seen = BTreeSet::new();
                for l in labels {
                    if l.is_empty() {
                        return Err("empty enumeration label".into());
                    }
                    if !seen.insert(l) {
                        return Err(format!("duplicate enumeration label `{l}`"));
                    }
                }
                Ok(())
            }
            Sort::Option(inner) => inner.well_formed(),
            Sort::Record(fields) => {
                let mut seen = BTreeSet::new();
                for (name, sort) in fields {
                    if !seen.insert(name) {
                        return Err(format!("duplicate record field `{name}`"));
                    }
                    sort.well_formed()?;
                }
                Ok(())
            }
        }
    }

    /// True if the sort mentions `StringSet` anywhere.
    pub fn uses_string_sets(&self) -> bool {
        match self {
            Sort::StringSet => true,
            Sort::Option(inner) => inner.uses_string_sets(),
            Sort::Record(fields) => fields.iter().any(|(_, s)| s.uses_string_sets()),
            _ => false,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "bool"),
            Sort::Int => write!(f, "int"),
            Sort::BitVec(w) => write!(f, "bv{w}"),
            Sort::Enum(labels) => write!(f, "enum{{{}}}", labels.join(",")),
            Sort::StringSet => write!(f, "set<string>"),
            Sort::Option(inner) => write!(f, "option<{inner}>"),
            Sort::Record(fields) => {
                write!(f, "{{")?;
                for (i, (n, s)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n}: {s}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_fields_and_labels() {
        let rec = Sort::record([("a", Sort::Bool), ("a", Sort::Int)]);
        assert!(rec.well_formed().is_err());
        assert!(Sort::enumeration(["x", "x"]).well_formed().is_err());
        assert!(Sort::Enum(vec![]).well_formed().is_err());
        assert!(Sort::BitVec(0).well_formed().is_err());
        assert!(Sort::BitVec(129).well_formed().is_err());
    }

    #[test]
    fn nesting_is_allowed() {
        let s = Sort::option(Sort::option(Sort::record([(
            "inner",
            Sort::record([("x", Sort::BitVec(8))]),
        )])));
        assert!(s.well_formed().is_ok());
        assert_eq!(s.to_string(), "option<option<{inner: {x: bv8}}>>");
    }
}
