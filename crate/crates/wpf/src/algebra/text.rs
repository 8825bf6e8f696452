//! Plain-text table format for signatures and finite algebras.
//!
//! ```text
//! signature: mul/2, inv/1, one/0
//! carrier: 0 1 2
//! op mul:
//! 0 1 2
//! 1 2 0
//! 2 0 1
//! op inv:
//! 0 2 1
//! op one:
//! 0
//! ```
//!
//! A binary table has one row per left operand; unary and nullary tables
//! are a single row. `#` starts a comment; blank lines are ignored.

use std::fmt::Write as _;

use thiserror::Error;

use super::finite::FiniteAlgebra;
use super::signature::{Signature, SignatureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("{0}")]
    Algebra(String),
}

pub fn parse_signature(spec: &str) -> Result<Signature, TextError> {
    let mut symbols = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, arity) = part.split_once('/').ok_or_else(|| TextError::Syntax {
            line: 0,
            msg: format!("expected `name/arity`, got `{part}`"),
        })?;
        let arity: usize = arity.trim().parse().map_err(|_| TextError::Syntax {
            line: 0,
            msg: format!("bad arity in `{part}`"),
        })?;
        symbols.push((name.trim().to_string(), arity));
    }
    Ok(Signature::new(symbols)?)
}

pub fn parse_algebra(name: &str, input: &str) -> Result<FiniteAlgebra, TextError> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines.next().ok_or(TextError::Syntax {
        line: 0,
        msg: "empty input".into(),
    })?;
    let sig_spec = header.strip_prefix("signature:").ok_or_else(|| TextError::Syntax {
        line,
        msg: "expected `signature:` header".into(),
    })?;
    let signature = parse_signature(sig_spec)?;

    let (line, carrier_line) = lines.next().ok_or(TextError::Syntax {
        line: 0,
        msg: "missing `carrier:` line".into(),
    })?;
    let carrier_spec = carrier_line.strip_prefix("carrier:").ok_or_else(|| TextError::Syntax {
        line,
        msg: "expected `carrier:` line".into(),
    })?;
    let elems: Vec<String> = carrier_spec.split_whitespace().map(str::to_string).collect();
    let index_of = |tok: &str, line: usize| -> Result<u32, TextError> {
        elems
            .iter()
            .position(|e| e == tok)
            .map(|i| i as u32)
            .ok_or_else(|| TextError::Syntax {
                line,
                msg: format!("`{tok}` is not a carrier element"),
            })
    };

    let mut tables: Vec<Option<Vec<u32>>> = vec![None; signature.len()];
    let mut current: Option<(usize, Vec<u32>, usize)> = None; // (symbol idx, entries, expected)
    let finish = |current: &mut Option<(usize, Vec<u32>, usize)>,
                  tables: &mut Vec<Option<Vec<u32>>>,
                  signature: &Signature|
     -> Result<(), TextError> {
        if let Some((idx, entries, expected)) = current.take() {
            if entries.len() != expected {
                return Err(TextError::Algebra(format!(
                    "table for `{}` has {} entries, expected {}",
                    signature.name(super::signature::SymbolId(idx)),
                    entries.len(),
                    expected
                )));
            }
            tables[idx] = Some(entries);
        }
        Ok(())
    };

    for (line, text) in lines {
        if let Some(rest) = text.strip_prefix("op ") {
            finish(&mut current, &mut tables, &signature)?;
            let sym = rest.trim_end_matches(':').trim();
            let id = signature.id_of(sym).ok_or_else(|| TextError::Syntax {
                line,
                msg: format!("unknown symbol `{sym}`"),
            })?;
            let expected = elems.len().pow(signature.arity(id) as u32);
            current = Some((id.0, Vec::with_capacity(expected), expected));
        } else {
            let (_, entries, _) = current.as_mut().ok_or_else(|| TextError::Syntax {
                line,
                msg: "table row before any `op` header".into(),
            })?;
            for tok in text.split_whitespace() {
                entries.push(index_of(tok, line)?);
            }
        }
    }
    finish(&mut current, &mut tables, &signature)?;

    let mut out = Vec::with_capacity(signature.len());
    for (i, t) in tables.into_iter().enumerate() {
        match t {
            Some(t) => out.push(t),
            None => {
                return Err(TextError::Algebra(format!(
                    "missing table for `{}`",
                    signature.name(super::signature::SymbolId(i))
                )))
            }
        }
    }
    FiniteAlgebra::from_tables(name, signature, elems, out)
        .map_err(|e| TextError::Algebra(e.to_string()))
}

pub fn write_algebra(alg: &FiniteAlgebra) -> String {
    let mut out = String::new();
    writeln!(out, "signature: {}", alg.signature()).unwrap();
    writeln!(out, "carrier: {}", alg.element_names().join(" ")).unwrap();
    let n = alg.carrier_len();
    for (id, sym) in alg.signature().symbols() {
        writeln!(out, "op {}:", sym.name).unwrap();
        let table = alg.table(id);
        let row_len = if sym.arity <= 1 { table.len().max(1) } else { n.pow((sym.arity - 1) as u32) };
        if table.is_empty() {
            continue;
        }
        for row in table.chunks(row_len.max(1)) {
            let names: Vec<&str> = row.iter().map(|&i| alg.element_name(i as usize)).collect();
            writeln!(out, "{}", names.join(" ")).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::OmegaAlgebra;

    #[test]
    fn round_trip_z3() {
        let z3 = FiniteAlgebra::zn_add(3);
        let text = write_algebra(&z3);
        let back = parse_algebra("zn-add:3", &text).unwrap();
        assert_eq!(back, z3);
    }

    #[test]
    fn round_trip_ring() {
        let r = FiniteAlgebra::ring_zn(4);
        let back = parse_algebra("ring-zn:4", &write_algebra(&r)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn parse_with_comments() {
        let text = "\
# additive group of Z_2
signature: mul/2, inv/1, one/0
carrier: e x   # two elements
op mul:
e x
x e
op inv:
e x
op one:
e
";
        let alg = parse_algebra("z2", text).unwrap();
        assert_eq!(alg.carrier_len(), 2);
        let x = alg.index_of("x").unwrap();
        assert_eq!(alg.apply("mul", &[x, x]).unwrap(), alg.index_of("e").unwrap());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_algebra("bad", "carrier: 0"),
            Err(TextError::Syntax { .. })
        ));
        let short = "signature: one/0\ncarrier: a b\nop one:\n"; // missing entry
        assert!(parse_algebra("bad", short).is_err());
        let unknown = "signature: one/0\ncarrier: a\nop one:\nq\n";
        assert!(matches!(parse_algebra("bad", unknown), Err(TextError::Syntax { .. })));
    }
}
