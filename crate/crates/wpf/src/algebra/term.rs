//! Terms over a signature: syntax trees with variables `a1, a2, ...`.

use std::fmt;

use thiserror::Error;

use super::finite::FiniteAlgebra;
use super::signature::Signature;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// Variable with 1-based index.
    Var(usize),
    Apply { symbol: String, args: Vec<Term> },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("variable index must be >= 1")]
    ZeroVarIndex,
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` expects {expected} arguments, got {got}")]
    ArityMismatch { symbol: String, expected: usize, got: usize },
    #[error("assignment has {len} elements but the term uses variable a{index}")]
    VarOutOfRange { index: usize, len: usize },
    #[error("parse error at byte {at}: {msg}")]
    Parse { at: usize, msg: String },
    #[error("identity check needs {needed} assignments, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
}

impl Term {
    pub fn var(i: usize) -> Term {
        assert!(i >= 1, "variable indices are 1-based");
        Term::Var(i)
    }

    pub fn apply<S: Into<String>>(symbol: S, args: Vec<Term>) -> Term {
        Term::Apply { symbol: symbol.into(), args }
    }

    /// Largest variable index used, or 0 for a variable-free term.
    pub fn max_var(&self) -> usize {
        match self {
            Term::Var(i) => *i,
            Term::Apply { args, .. } => args.iter().map(Term::max_var).max().unwrap_or(0),
        }
    }

    /// Check that every symbol exists in `sig` with the right arity and
    /// variable indices are >= 1.
    pub fn well_formed(&self, sig: &Signature) -> Result<(), TermError> {
        match self {
            Term::Var(i) => {
                if *i == 0 {
                    return Err(TermError::ZeroVarIndex);
                }
                Ok(())
            }
            Term::Apply { symbol, args } => {
                let expected = sig
                    .arity_of(symbol)
                    .ok_or_else(|| TermError::UnknownSymbol(symbol.clone()))?;
                if args.len() != expected {
                    return Err(TermError::ArityMismatch {
                        symbol: symbol.clone(),
                        expected,
                        got: args.len(),
                    });
                }
                args.iter().try_for_each(|t| t.well_formed(sig))
            }
        }
    }

    /// Parse prefix notation, e.g. `mul(a1, inv(a2))`.
    pub fn parse(input: &str) -> Result<Term, TermError> {
        let bytes = input.as_bytes();
        let mut pos = 0usize;
        let term = parse_term(bytes, &mut pos)?;
        skip_ws(bytes, &mut pos);
        if pos != bytes.len() {
            return Err(TermError::Parse { at: pos, msg: "trailing input".into() });
        }
        Ok(term)
    }
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_token(bytes: &[u8], pos: &mut usize) -> Result<String, TermError> {
    skip_ws(bytes, pos);
    let start = *pos;
    while *pos < bytes.len() {
        let c = bytes[*pos];
        if c == b'(' || c == b')' || c == b',' || c.is_ascii_whitespace() {
            break;
        }
        *pos += 1;
    }
    if start == *pos {
        return Err(TermError::Parse { at: start, msg: "expected a token".into() });
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_term(bytes: &[u8], pos: &mut usize) -> Result<Term, TermError> {
    let tok_at = *pos;
    let tok = parse_token(bytes, pos)?;
    // Variables: a<i> or z<i>.
    if tok.len() >= 2 && (tok.starts_with('a') || tok.starts_with('z')) {
        if let Ok(i) = tok[1..].parse::<usize>() {
            if i == 0 {
                return Err(TermError::ZeroVarIndex);
            }
            return Ok(Term::Var(i));
        }
    }
    skip_ws(bytes, pos);
    if *pos < bytes.len() && bytes[*pos] == b'(' {
        *pos += 1;
        let mut args = Vec::new();
        skip_ws(bytes, pos);
        if *pos < bytes.len() && bytes[*pos] == b')' {
            *pos += 1;
            return Ok(Term::apply(tok, args));
        }
        loop {
            args.push(parse_term(bytes, pos)?);
            skip_ws(bytes, pos);
            match bytes.get(*pos) {
                Some(b',') => *pos += 1,
                Some(b')') => {
                    *pos += 1;
                    return Ok(Term::apply(tok, args));
                }
                _ => {
                    return Err(TermError::Parse { at: *pos, msg: "expected `,` or `)`".into() })
                }
            }
        }
    }
    // Bare token: a nullary application.
    let _ = tok_at;
    Ok(Term::apply(tok, Vec::new()))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "a{i}"),
            Term::Apply { symbol, args } => {
                write!(f, "{symbol}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Inductive evaluation of `t` in `alg` under `assignment` (element of the
/// carrier for each variable, 1-based).
pub fn eval_term(
    t: &Term,
    alg: &FiniteAlgebra,
    assignment: &[usize],
) -> Result<usize, TermError> {
    match t {
        Term::Var(i) => {
            if *i == 0 {
                return Err(TermError::ZeroVarIndex);
            }
            assignment
                .get(*i - 1)
                .copied()
                .ok_or(TermError::VarOutOfRange { index: *i, len: assignment.len() })
        }
        Term::Apply { symbol, args } => {
            let sig = alg.signature();
            let id = sig
                .id_of(symbol)
                .ok_or_else(|| TermError::UnknownSymbol(symbol.clone()))?;
            if args.len() != sig.arity(id) {
                return Err(TermError::ArityMismatch {
                    symbol: symbol.clone(),
                    expected: sig.arity(id),
                    got: args.len(),
                });
            }
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_term(a, alg, assignment)?);
            }
            Ok(alg.apply_idx(id, &vals))
        }
    }
}

pub const DEFAULT_IDENTITY_BUDGET: u128 = 1_000_000;

/// True iff `v = w` holds in `alg` under every assignment of carrier
/// elements to the variables (exhaustive check).
pub fn check_identity_in_algebra(
    v: &Term,
    w: &Term,
    alg: &FiniteAlgebra,
) -> Result<bool, TermError> {
    check_identity_with_budget(v, w, alg, DEFAULT_IDENTITY_BUDGET)
}

pub fn check_identity_with_budget(
    v: &Term,
    w: &Term,
    alg: &FiniteAlgebra,
    budget: u128,
) -> Result<bool, TermError> {
    v.well_formed(alg.signature())?;
    w.well_formed(alg.signature())?;
    let vars = v.max_var().max(w.max_var());
    let n = alg.carrier_len() as u128;
    let needed = n.checked_pow(vars as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(TermError::BudgetExceeded { needed, budget });
    }
    let mut assignment = vec![0usize; vars];
    loop {
        if eval_term(v, alg, &assignment)? != eval_term(w, alg, &assignment)? {
            return Ok(false);
        }
        // mixed-radix increment
        let mut pos = 0;
        loop {
            if pos == vars {
                return Ok(true);
            }
            assignment[pos] += 1;
            if assignment[pos] < alg.carrier_len() {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::finite::FiniteAlgebra;

    fn z6() -> FiniteAlgebra {
        FiniteAlgebra::zn_add(6)
    }

    #[test]
    fn parse_round_trip() {
        let t = Term::parse("mul(a1, inv(a2))").unwrap();
        assert_eq!(t, Term::apply("mul", vec![Term::var(1), Term::apply("inv", vec![Term::var(2)])]));
        assert_eq!(Term::parse(&t.to_string()).unwrap(), t);
        // nullary with and without parens
        assert_eq!(Term::parse("one()").unwrap(), Term::apply("one", vec![]));
        assert_eq!(Term::parse("one").unwrap(), Term::apply("one", vec![]));
    }

    #[test]
    fn eval_identity_case() {
        // eval(a1) under (h,) is h
        for h in 0..6 {
            assert_eq!(eval_term(&Term::var(1), &z6(), &[h]).unwrap(), h);
        }
    }

    #[test]
    fn eval_addition_mod_6() {
        // 2 + 3 = 5 in the additive group of Z_6
        let t = Term::apply("mul", vec![Term::var(1), Term::var(2)]);
        assert_eq!(eval_term(&t, &z6(), &[2, 3]).unwrap(), 5);
    }

    #[test]
    fn eval_nullary_constant() {
        let t = Term::apply("one", vec![]);
        assert_eq!(eval_term(&t, &z6(), &[]).unwrap(), 0);
    }

    #[test]
    fn eval_errors() {
        let t = Term::apply("mul", vec![Term::var(1), Term::var(3)]);
        assert_eq!(
            eval_term(&t, &z6(), &[0, 1]),
            Err(TermError::VarOutOfRange { index: 3, len: 2 })
        );
        let bad = Term::apply("mul", vec![Term::var(1)]);
        assert!(matches!(
            eval_term(&bad, &z6(), &[0]),
            Err(TermError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn identity_checks() {
        let commutes = (
            Term::apply("mul", vec![Term::var(1), Term::var(2)]),
            Term::apply("mul", vec![Term::var(2), Term::var(1)]),
        );
        assert!(check_identity_in_algebra(&commutes.0, &commutes.1, &z6()).unwrap());

        let square = Term::apply("mul", vec![Term::var(1), Term::var(1)]);
        let one = Term::apply("one", vec![]);
        // exponent 2 holds in Z_2^2 but 1+1 = 2 != 0 in Z_3
        let v22 = FiniteAlgebra::elem_abelian(2, 2).unwrap();
        assert!(check_identity_in_algebra(&square, &one, &v22).unwrap());
        let z3 = FiniteAlgebra::zn_add(3);
        assert!(!check_identity_in_algebra(&square, &one, &z3).unwrap());
    }

    #[test]
    fn identity_budget_guard() {
        let v = Term::apply("mul", vec![Term::var(1), Term::var(2)]);
        let w = Term::apply("mul", vec![Term::var(2), Term::var(1)]);
        assert!(matches!(
            check_identity_with_budget(&v, &w, &z6(), 10),
            Err(TermError::BudgetExceeded { .. })
        ));
    }
}
