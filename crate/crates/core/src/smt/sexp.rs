//! S-expressions: the concrete syntax of SMT-LIB scripts and solver responses.

use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SExpr {
    /// Symbols, numerals, bit-vector literals and string literals, kept verbatim
    /// (including `|…|` quotes and `"…"` delimiters).
    Atom(String),
    List(Vec<SExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("malformed s-expression at byte {offset}: {reason}")]
pub struct ParseError {
    pub offset: usize,
    pub reason: String,
}

pub fn atom(s: impl Into<String>) -> SExpr {
    SExpr::Atom(s.into())
}

pub fn list(items: impl IntoIterator<Item = SExpr>) -> SExpr {
    SExpr::List(items.into_iter().collect())
}

/// `(head args…)`
pub fn app(head: &str, args: impl IntoIterator<Item = SExpr>) -> SExpr {
    let mut v = vec![atom(head)];
    v.extend(args);
    SExpr::List(v)
}

fn is_simple_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c)
}

/// Renders `name` as an SMT-LIB symbol, quoting it when it is not a simple symbol.
pub fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && name.chars().all(is_simple_char)
        && !name.starts_with(|c: char| c.is_ascii_digit());
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

/// A symbol can be quoted unless it contains `|` or `\`.
pub fn quotable(name: &str) -> bool {
    !name.contains('|') && !name.contains('\\')
}

/// Strips `|…|` quotes from a symbol.
pub fn unquote(s: &str) -> &str {
    s.strip_prefix('|')
        .and_then(|s| s.strip_suffix('|'))
        .unwrap_or(s)
}

impl SExpr {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a) => Some(a),
            SExpr::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items) => Some(items),
            SExpr::Atom(_) => None,
        }
    }

    /// Parses a single expression; trailing input other than whitespace and
    /// comments is an error.
    pub fn parse(input: &str) -> Result<SExpr, ParseError> {
        let mut all = parse_all(input)?;
        match all.len() {
            1 => Ok(all.pop().unwrap()),
            n => Err(ParseError {
                offset: 0,
                reason: format!("expected one expression, found {n}"),
            }),
        }
    }
}

/// Parses a sequence of expressions, e.g. a whole solver response.
pub fn parse_all(input: &str) -> Result<Vec<SExpr>, ParseError> {
    let bytes = input.as_bytes();
    let mut pos = 0;
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    let mut opened: Vec<usize> = Vec::new();
    while pos < bytes.len() {
        let c = bytes[pos];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => pos += 1,
            b';' => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            }
            b'(' => {
                stack.push(Vec::new());
                opened.push(pos);
                pos += 1;
            }
            b')' => {
                if stack.len() == 1 {
                    return Err(ParseError {
                        offset: pos,
                        reason: "unbalanced `)`".into(),
                    });
                }
                let items = stack.pop().unwrap();
                opened.pop();
                stack.last_mut().unwrap().push(SExpr::List(items));
                pos += 1;
            }
            b'|' => {
                let end = input[pos + 1..].find('|').ok_or(ParseError {
                    offset: pos,
                    reason: "unterminated quoted symbol".into(),
                })?;
                let stop = pos + 1 + end + 1;
                stack.last_mut().unwrap().push(atom(&input[pos..stop]));
                pos = stop;
            }
            b'"' => {
                let mut i = pos + 1;
                loop {
                    match bytes.get(i) {
                        None => {
                            return Err(ParseError {
                                offset: pos,
                                reason: "unterminated string literal".into(),
                            })
                        }
                        Some(b'"') if bytes.get(i + 1) == Some(&b'"') => i += 2,
                        Some(b'"') => break,
                        Some(_) => i += 1,
                    }
                }
                stack.last_mut().unwrap().push(atom(&input[pos..=i]));
                pos = i + 1;
            }
            _ => {
                let start = pos;
                while pos < bytes.len()
                    && !matches!(bytes[pos], b' ' | b'\t' | b'\n' | b'\r' | b'(' | b')' | b';' | b'"' | b'|')
                {
                    pos += 1;
                }
                stack.last_mut().unwrap().push(atom(&input[start..pos]));
            }
        }
    }
    if let Some(&at) = opened.last() {
        return Err(ParseError {
            offset: at,
            reason: "unbalanced `(`".into(),
        });
    }
    Ok(stack.pop().unwrap())
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a) => f.write_str(a),
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_solver_output() {
        let out = "sat\n(:reason-unknown \"\")\n((|u!a nd| 4)\n (o none-Opt0)\n (bv #b01))\n";
        let items = parse_all(out).unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[0], atom("sat"));
        assert_eq!(items[2].as_list().unwrap()[0].to_string(), "(|u!a nd| 4)");
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(parse_all("(a (b)").is_err());
        assert!(parse_all("a)").is_err());
        assert!(SExpr::parse("a b").is_err());
    }

    #[test]
    fn symbols() {
        assert_eq!(symbol("$s.v"), "$s.v");
        assert_eq!(symbol("a b"), "|a b|");
        assert_eq!(symbol("0x"), "|0x|");
        assert_eq!(unquote("|a b|"), "a b");
    }

    fn arb_sexpr() -> impl Strategy<Value = SExpr> {
        let leaf = prop_oneof![
            "[a-z$][a-z0-9.!-]{0,6}".prop_map(SExpr::Atom),
            "[0-9]{1,4}".prop_map(SExpr::Atom),
            "[a-z ]{0,5}".prop_map(|s| SExpr::Atom(format!("|{s}|"))),
            "[a-z\"]{0,5}".prop_map(|s| SExpr::Atom(format!("\"{}\"", s.replace('"', "\"\"")))),
        ];
        leaf.prop_recursive(4, 40, 5, |inner| {
            prop::collection::vec(inner, 0..5).prop_map(SExpr::List)
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(e in arb_sexpr()) {
            prop_assert_eq!(SExpr::parse(&e.to_string()).unwrap(), e);
        }
    }
}
