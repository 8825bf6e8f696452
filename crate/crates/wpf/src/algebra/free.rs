//! Normal forms for elements of free algebras of the supported varieties.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::finite::FiniteAlgebra;
use super::signature::SymbolId;
use super::term::{eval_term, Term, TermError};
use super::variety::VarietySpec;

/// One letter of a freely reduced word: a generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Payload {
    /// Term algebra: the term itself is the normal form.
    Term(Term),
    /// Free group: freely reduced word (no adjacent cancelling pair).
    Word(Vec<Letter>),
    /// Free abelian group: sparse exponent vector, no zero entries.
    ExpVec(BTreeMap<usize, i64>),
    /// Free abelian group of exponent e: entries in 1..e.
    ExpVecMod { modulus: u64, vec: BTreeMap<usize, u64> },
}

/// An element of the free algebra of a supported variety, held in normal
/// form. Two elements are equal iff their normal forms are identical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeElement {
    variety: VarietySpec,
    payload: Payload,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeError {
    #[error("variety mismatch: `{left}` vs `{right}`")]
    VarietyMismatch { left: String, right: String },
    #[error("symbol `{0}` is not in the variety's signature")]
    ForeignSymbol(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("exponent arithmetic overflow")]
    Overflow,
}

impl FreeElement {
    pub fn variety(&self) -> &VarietySpec {
        &self.variety
    }

    /// The identity (for group varieties) or nothing useful for term
    /// algebras, where the caller should use `normalize` directly.
    pub fn identity(v: &VarietySpec) -> FreeElement {
        let payload = match v {
            VarietySpec::AllAlgebras(_) => Payload::Term(Term::apply("one", vec![])),
            VarietySpec::AllGroups => Payload::Word(Vec::new()),
            VarietySpec::AbelianGroups => Payload::ExpVec(BTreeMap::new()),
            VarietySpec::AbelianGroupsExp(e) => {
                Payload::ExpVecMod { modulus: *e, vec: BTreeMap::new() }
            }
            VarietySpec::ElementaryAbelian(p) => {
                Payload::ExpVecMod { modulus: *p, vec: BTreeMap::new() }
            }
        };
        FreeElement { variety: v.clone(), payload }
    }

    pub fn generator(v: &VarietySpec, i: usize) -> FreeElement {
        assert!(i >= 1, "generator indices are 1-based");
        let payload = match v {
            VarietySpec::AllAlgebras(_) => Payload::Term(Term::var(i)),
            VarietySpec::AllGroups => Payload::Word(vec![Letter { gen: i, inverse: false }]),
            VarietySpec::AbelianGroups => Payload::ExpVec(BTreeMap::from([(i, 1)])),
            VarietySpec::AbelianGroupsExp(e) => {
                let mut vec = BTreeMap::new();
                if *e > 1 {
                    vec.insert(i, 1);
                }
                Payload::ExpVecMod { modulus: *e, vec }
            }
            VarietySpec::ElementaryAbelian(p) => {
                Payload::ExpVecMod { modulus: *p, vec: BTreeMap::from([(i, 1)]) }
            }
        };
        FreeElement { variety: v.clone(), payload }
    }

    pub fn is_identity(&self) -> bool {
        match &self.payload {
            Payload::Term(t) => *t == Term::apply("one", vec![]),
            Payload::Word(w) => w.is_empty(),
            Payload::ExpVec(v) => v.is_empty(),
            Payload::ExpVecMod { vec, .. } => vec.is_empty(),
        }
    }

    /// Largest generator index appearing in the normal form (0 if none),
    /// i.e. the least m with this element in the m-generated free algebra.
    pub fn max_generator(&self) -> usize {
        match &self.payload {
            Payload::Term(t) => t.max_var(),
            Payload::Word(w) => w.iter().map(|l| l.gen).max().unwrap_or(0),
            Payload::ExpVec(v) => v.keys().max().copied().unwrap_or(0),
            Payload::ExpVecMod { vec, .. } => vec.keys().max().copied().unwrap_or(0),
        }
    }

    /// Group multiplication of normal forms. Panics if the varieties differ
    /// or are not group kinds (internal callers uphold this).
    pub(crate) fn mul(&self, rhs: &FreeElement) -> Result<FreeElement, FreeError> {
        debug_assert_eq!(self.variety, rhs.variety);
        let payload = match (&self.payload, &rhs.payload) {
            (Payload::Word(a), Payload::Word(b)) => {
                let mut out = a.clone();
                for &l in b {
                    push_reduced(&mut out, l);
                }
                Payload::Word(out)
            }
            (Payload::ExpVec(a), Payload::ExpVec(b)) => {
                let mut out = a.clone();
                for (&g, &e) in b {
                    add_exp(&mut out, g, e)?;
                }
                Payload::ExpVec(out)
            }
            (
                Payload::ExpVecMod { modulus, vec: a },
                Payload::ExpVecMod { vec: b, .. },
            ) => {
                let mut out = a.clone();
                for (&g, &e) in b {
                    add_exp_mod(&mut out, g, e, *modulus);
                }
                Payload::ExpVecMod { modulus: *modulus, vec: out }
            }
            _ => unreachable!("mul on non-group payloads"),
        };
        Ok(FreeElement { variety: self.variety.clone(), payload })
    }

    pub(crate) fn inv(&self) -> FreeElement {
        let payload = match &self.payload {
            Payload::Word(a) => Payload::Word(
                a.iter()
                    .rev()
                    .map(|l| Letter { gen: l.gen, inverse: !l.inverse })
                    .collect(),
            ),
            Payload::ExpVec(a) => Payload::ExpVec(a.iter().map(|(&g, &e)| (g, -e)).collect()),
            Payload::ExpVecMod { modulus, vec } => Payload::ExpVecMod {
                modulus: *modulus,
                vec: vec.iter().map(|(&g, &e)| (g, modulus - e)).collect(),
            },
            Payload::Term(_) => unreachable!("inv on term payload"),
        };
        FreeElement { variety: self.variety.clone(), payload }
    }

    /// A term that re-normalizes to this element (a canonical
    /// representative), used by tests and display.
    pub fn representative_term(&self) -> Term {
        let mul = |a: Term, b: Term| Term::apply("mul", vec![a, b]);
        let inv = |a: Term| Term::apply("inv", vec![a]);
        match &self.payload {
            Payload::Term(t) => t.clone(),
            Payload::Word(w) => {
                if w.is_empty() {
                    return Term::apply("one", vec![]);
                }
                let mut acc: Option<Term> = None;
                for l in w {
                    let atom = if l.inverse { inv(Term::var(l.gen)) } else { Term::var(l.gen) };
                    acc = Some(match acc {
                        None => atom,
                        Some(t) => mul(t, atom),
                    });
                }
                acc.unwrap()
            }
            Payload::ExpVec(v) => {
                if v.is_empty() {
                    return Term::apply("one", vec![]);
                }
                let mut acc: Option<Term> = None;
                for (&g, &e) in v {
                    let atom = Term::var(g);
                    let count = e.unsigned_abs();
                    for _ in 0..count {
                        let factor =
                            if e < 0 { inv(atom.clone()) } else { atom.clone() };
                        acc = Some(match acc {
                            None => factor,
                            Some(t) => mul(t, factor),
                        });
                    }
                }
                acc.unwrap()
            }
            Payload::ExpVecMod { vec, .. } => {
                if vec.is_empty() {
                    return Term::apply("one", vec![]);
                }
                let mut acc: Option<Term> = None;
                for (&g, &e) in vec {
                    for _ in 0..e {
                        acc = Some(match acc {
                            None => Term::var(g),
                            Some(t) => mul(t, Term::var(g)),
                        });
                    }
                }
                acc.unwrap()
            }
        }
    }

    /// Sparse exponent view for abelian payloads (testing convenience).
    pub fn exponents(&self) -> Option<BTreeMap<usize, i64>> {
        match &self.payload {
            Payload::ExpVec(v) => Some(v.clone()),
            Payload::ExpVecMod { vec, .. } => {
                Some(vec.iter().map(|(&g, &e)| (g, e as i64)).collect())
            }
            _ => None,
        }
    }

    /// Reduced-word view for the free-group payload.
    pub fn word(&self) -> Option<&[Letter]> {
        match &self.payload {
            Payload::Word(w) => Some(w),
            _ => None,
        }
    }
}

fn push_reduced(word: &mut Vec<Letter>, l: Letter) {
    match word.last() {
        Some(last) if last.gen == l.gen && last.inverse != l.inverse => {
            word.pop();
        }
        _ => word.push(l),
    }
}

fn add_exp(vec: &mut BTreeMap<usize, i64>, gen: usize, e: i64) -> Result<(), FreeError> {
    let entry = vec.entry(gen).or_insert(0);
    *entry = entry.checked_add(e).ok_or(FreeError::Overflow)?;
    if *entry == 0 {
        vec.remove(&gen);
    }
    Ok(())
}

fn add_exp_mod(vec: &mut BTreeMap<usize, u64>, gen: usize, e: u64, modulus: u64) {
    let entry = vec.entry(gen).or_insert(0);
    *entry = (*entry + e) % modulus;
    if *entry == 0 {
        vec.remove(&gen);
    }
}

/// Canonical normal form of the image of `t` in the free algebra of `v`.
pub fn normalize(v: &VarietySpec, t: &Term) -> Result<FreeElement, FreeError> {
    match v {
        VarietySpec::AllAlgebras(sig) => {
            t.well_formed(sig)?;
            Ok(FreeElement { variety: v.clone(), payload: Payload::Term(t.clone()) })
        }
        _ => normalize_group(v, t),
    }
}

fn normalize_group(v: &VarietySpec, t: &Term) -> Result<FreeElement, FreeError> {
    match t {
        Term::Var(i) => {
            if *i == 0 {
                return Err(TermError::ZeroVarIndex.into());
            }
            Ok(FreeElement::generator(v, *i))
        }
        Term::Apply { symbol, args } => match (symbol.as_str(), args.len()) {
            ("mul", 2) => {
                let a = normalize_group(v, &args[0])?;
                let b = normalize_group(v, &args[1])?;
                a.mul(&b)
            }
            ("inv", 1) => Ok(normalize_group(v, &args[0])?.inv()),
            ("one", 0) => Ok(FreeElement::identity(v)),
            ("mul", n) => Err(TermError::ArityMismatch {
                symbol: "mul".into(),
                expected: 2,
                got: n,
            }
            .into()),
            ("inv", n) => Err(TermError::ArityMismatch {
                symbol: "inv".into(),
                expected: 1,
                got: n,
            }
            .into()),
            ("one", n) => Err(TermError::ArityMismatch {
                symbol: "one".into(),
                expected: 0,
                got: n,
            }
            .into()),
            _ => Err(FreeError::ForeignSymbol(symbol.clone())),
        },
    }
}

/// Equality test in the free algebra; errors if the varieties differ.
pub fn free_equal(a: &FreeElement, b: &FreeElement) -> Result<bool, FreeError> {
    if a.variety != b.variety {
        return Err(FreeError::VarietyMismatch {
            left: a.variety.to_string(),
            right: b.variety.to_string(),
        });
    }
    Ok(a.payload == b.payload)
}

/// Evaluate the normal form at a tuple of carrier elements — the image of
/// the element under the homomorphism sending generator i to `g[i-1]`.
pub fn eval_free(
    f: &FreeElement,
    alg: &FiniteAlgebra,
    g: &[usize],
) -> Result<usize, TermError> {
    let need = f.max_generator();
    if need > g.len() {
        return Err(TermError::VarOutOfRange { index: need, len: g.len() });
    }
    let sig = alg.signature();
    match &f.payload {
        Payload::Term(t) => eval_term(t, alg, g),
        _ => {
            let mul = sig
                .id_of("mul")
                .ok_or_else(|| TermError::UnknownSymbol("mul".into()))?;
            let inv = sig
                .id_of("inv")
                .ok_or_else(|| TermError::UnknownSymbol("inv".into()))?;
            let one = sig
                .id_of("one")
                .ok_or_else(|| TermError::UnknownSymbol("one".into()))?;
            match &f.payload {
                Payload::Word(w) => {
                    let mut acc = alg.apply_idx(one, &[]);
                    for l in w {
                        let x = if l.inverse {
                            alg.apply_idx(inv, &[g[l.gen - 1]])
                        } else {
                            g[l.gen - 1]
                        };
                        acc = alg.apply_idx(mul, &[acc, x]);
                    }
                    Ok(acc)
                }
                Payload::ExpVec(v) => {
                    let mut acc = alg.apply_idx(one, &[]);
                    for (&gen, &e) in v {
                        let base = if e < 0 {
                            alg.apply_idx(inv, &[g[gen - 1]])
                        } else {
                            g[gen - 1]
                        };
                        let p = pow_idx(alg, mul, one, base, e.unsigned_abs());
                        acc = alg.apply_idx(mul, &[acc, p]);
                    }
                    Ok(acc)
                }
                Payload::ExpVecMod { vec, .. } => {
                    let mut acc = alg.apply_idx(one, &[]);
                    for (&gen, &e) in vec {
                        let p = pow_idx(alg, mul, one, g[gen - 1], e);
                        acc = alg.apply_idx(mul, &[acc, p]);
                    }
                    Ok(acc)
                }
                Payload::Term(_) => unreachable!(),
            }
        }
    }
}

/// Square-and-multiply over the table algebra.
fn pow_idx(alg: &FiniteAlgebra, mul: SymbolId, one: SymbolId, base: usize, e: u64) -> usize {
    let mut acc = alg.apply_idx(one, &[]);
    if e == 0 {
        return acc;
    }
    let mut base = base;
    let mut e = e;
    loop {
        if e & 1 == 1 {
            acc = alg.apply_idx(mul, &[acc, base]);
        }
        e >>= 1;
        if e == 0 {
            return acc;
        }
        base = alg.apply_idx(mul, &[base, base]);
    }
}

impl fmt::Display for FreeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.representative_term())
    }
}
