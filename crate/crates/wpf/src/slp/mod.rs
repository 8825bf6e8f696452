//! Straight-line programs: validation, evaluation in any algebra, mapping
//! to free-algebra normal forms, canonical builders, and shortest-program
//! search by breadth-first closure.

pub mod search;

use std::fmt;

use thiserror::Error;

use crate::algebra::free::{normalize, FreeElement, FreeError};
use crate::algebra::signature::Signature;
use crate::algebra::term::Term;
use crate::algebra::variety::VarietySpec;
use crate::algebra::{AlgebraError, OmegaAlgebra};

pub use search::{shortest_slp, SearchError, SearchOutcome};

/// One instruction: fetch an input or apply a symbol to earlier results.
/// Operand positions are 1-based, per the sequence semantics.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instr {
    Input(usize),
    Apply { symbol: String, operands: Vec<usize> },
}

/// A nonempty instruction sequence; the program's value is the value at the
/// last position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Slp {
    instrs: Vec<Instr>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlpError {
    #[error("a straight-line program must be nonempty")]
    Empty,
    #[error("position {position}: input index {index} exceeds input count {inputs}")]
    BadInputIndex { position: usize, index: usize, inputs: usize },
    #[error("position {position}: input index must be >= 1")]
    ZeroInputIndex { position: usize },
    #[error("position {position}: operand {operand} does not refer to an earlier position")]
    ForwardReference { position: usize, operand: usize },
    #[error("position {position}: unknown symbol `{symbol}`")]
    UnknownSymbol { position: usize, symbol: String },
    #[error("position {position}: symbol `{symbol}` expects {expected} operands, got {got}")]
    ArityMismatch { position: usize, symbol: String, expected: usize, got: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Free(#[from] FreeError),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Slp {
    pub fn new(instrs: Vec<Instr>) -> Result<Slp, SlpError> {
        if instrs.is_empty() {
            return Err(SlpError::Empty);
        }
        Ok(Slp { instrs })
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    /// Program length, counting input instructions.
    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor rejects empty programs
    }

    /// Largest input index referenced (0 if none).
    pub fn input_count(&self) -> usize {
        self.instrs
            .iter()
            .filter_map(|i| match i {
                Instr::Input(k) => Some(*k),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Check the program against `m` inputs and a signature: input indices
    /// in 1..=m, operands strictly earlier, arities matching.
    pub fn validate(&self, m: usize, sig: &Signature) -> Result<(), SlpError> {
        for (pos0, instr) in self.instrs.iter().enumerate() {
            let position = pos0 + 1;
            match instr {
                Instr::Input(i) => {
                    if *i == 0 {
                        return Err(SlpError::ZeroInputIndex { position });
                    }
                    if *i > m {
                        return Err(SlpError::BadInputIndex { position, index: *i, inputs: m });
                    }
                }
                Instr::Apply { symbol, operands } => {
                    let id = sig.id_of(symbol).ok_or_else(|| SlpError::UnknownSymbol {
                        position,
                        symbol: symbol.clone(),
                    })?;
                    let expected = sig.arity(id);
                    if operands.len() != expected {
                        return Err(SlpError::ArityMismatch {
                            position,
                            symbol: symbol.clone(),
                            expected,
                            got: operands.len(),
                        });
                    }
                    for &op in operands {
                        if op == 0 || op >= position {
                            return Err(SlpError::ForwardReference { position, operand: op });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Run the program in `alg` on the inputs, returning the last value.
    /// Each `Apply` instruction performs exactly one operation (one oracle
    /// query when `alg` is a black box).
    pub fn run<A: OmegaAlgebra>(&self, alg: &A, inputs: &[A::Elem]) -> Result<A::Elem, SlpError> {
        self.validate(inputs.len(), alg.signature())?;
        let mut values: Vec<A::Elem> = Vec::with_capacity(self.instrs.len());
        let mut args: Vec<A::Elem> = Vec::new();
        for instr in &self.instrs {
            let v = match instr {
                Instr::Input(i) => inputs[*i - 1].clone(),
                Instr::Apply { symbol, operands } => {
                    args.clear();
                    args.extend(operands.iter().map(|&op| values[op - 1].clone()));
                    alg.apply(symbol, &args)?
                }
            };
            values.push(v);
        }
        Ok(values.pop().expect("programs are nonempty"))
    }

    /// The element of the free algebra of `v` computed by this program from
    /// the generators; independent of any m bounding the input indices.
    pub fn to_free(&self, v: &VarietySpec) -> Result<FreeElement, SlpError> {
        let m = self.input_count();
        self.validate(m, &v.signature())?;
        let mut values: Vec<FreeElement> = Vec::with_capacity(self.instrs.len());
        for instr in &self.instrs {
            let val = match instr {
                Instr::Input(i) => FreeElement::generator(v, *i),
                Instr::Apply { symbol, operands } => {
                    // Build the one-step term over already-computed values.
                    match v {
                        VarietySpec::AllAlgebras(_) => {
                            let args: Vec<Term> = operands
                                .iter()
                                .map(|&op| values[op - 1].representative_term())
                                .collect();
                            normalize(v, &Term::apply(symbol.clone(), args))?
                        }
                        _ => match symbol.as_str() {
                            "mul" => values[operands[0] - 1].mul(&values[operands[1] - 1])?,
                            "inv" => values[operands[0] - 1].inv(),
                            "one" => FreeElement::identity(v),
                            other => return Err(FreeError::ForeignSymbol(other.into()).into()),
                        },
                    }
                }
            };
            values.push(val);
        }
        Ok(values.pop().expect("programs are nonempty"))
    }

    /// Parse the one-instruction-per-line text format:
    /// `in <i>` or `op <symbol> <j1> <j2> ...`, with `#` comments.
    pub fn parse(input: &str) -> Result<Slp, SlpError> {
        let mut instrs = Vec::new();
        for (line0, raw) in input.lines().enumerate() {
            let line = line0 + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let mut toks = text.split_whitespace();
            match toks.next() {
                Some("in") => {
                    let i: usize = toks
                        .next()
                        .ok_or_else(|| SlpError::Parse { line, msg: "missing input index".into() })?
                        .parse()
                        .map_err(|_| SlpError::Parse { line, msg: "bad input index".into() })?;
                    if toks.next().is_some() {
                        return Err(SlpError::Parse { line, msg: "trailing tokens".into() });
                    }
                    instrs.push(Instr::Input(i));
                }
                Some("op") => {
                    let symbol = toks
                        .next()
                        .ok_or_else(|| SlpError::Parse { line, msg: "missing symbol".into() })?
                        .to_string();
                    let mut operands = Vec::new();
                    for t in toks {
                        let j: usize = t
                            .parse()
                            .map_err(|_| SlpError::Parse { line, msg: "bad operand".into() })?;
                        operands.push(j);
                    }
                    instrs.push(Instr::Apply { symbol, operands });
                }
                Some(other) => {
                    return Err(SlpError::Parse {
                        line,
                        msg: format!("expected `in` or `op`, got `{other}`"),
                    })
                }
                None => unreachable!(),
            }
        }
        Slp::new(instrs)
    }
}

impl fmt::Display for Slp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for instr in &self.instrs {
            match instr {
                Instr::Input(i) => writeln!(f, "in {i}")?,
                Instr::Apply { symbol, operands } => {
                    write!(f, "op {symbol}")?;
                    for op in operands {
                        write!(f, " {op}")?;
                    }
                    writeln!(f)?;
                }
            }
        }
        Ok(())
    }
}

/// Canonical program computing `a_1^s` by binary exponentiation.
/// Length is at most `2*floor(log2 s) + 2`.
pub fn power_program(s: u64) -> Slp {
    assert!(s >= 1, "exponent must be positive");
    let mut instrs = vec![Instr::Input(1)];
    let bits = 63 - s.leading_zeros() as usize; // floor(log2 s)
    let mut cur = 1usize; // position holding the running power
    for b in (0..bits).rev() {
        instrs.push(Instr::Apply { symbol: "mul".into(), operands: vec![cur, cur] });
        cur = instrs.len();
        if s >> b & 1 == 1 {
            instrs.push(Instr::Apply { symbol: "mul".into(), operands: vec![cur, 1] });
            cur = instrs.len();
        }
    }
    Slp { instrs }
}

/// The one-instruction program computing the group identity.
pub fn identity_program() -> Slp {
    Slp { instrs: vec![Instr::Apply { symbol: "one".into(), operands: vec![] }] }
}

/// The one-instruction program returning input `i`.
pub fn input_program(i: usize) -> Slp {
    assert!(i >= 1);
    Slp { instrs: vec![Instr::Input(i)] }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::algebra::finite::FiniteAlgebra;

    fn gamma() -> Signature {
        Signature::group()
    }

    #[test]
    fn validate_examples() {
        let ok = Slp::new(vec![Instr::Input(1)]).unwrap();
        assert!(ok.validate(1, &gamma()).is_ok());

        let bad_input = Slp::new(vec![Instr::Input(2)]).unwrap();
        assert_eq!(
            bad_input.validate(1, &gamma()),
            Err(SlpError::BadInputIndex { position: 1, index: 2, inputs: 1 })
        );

        let fwd = Slp::new(vec![
            Instr::Input(1),
            Instr::Apply { symbol: "mul".into(), operands: vec![1, 2] },
        ])
        .unwrap();
        assert_eq!(
            fwd.validate(1, &gamma()),
            Err(SlpError::ForwardReference { position: 2, operand: 2 })
        );

        let arity = Slp::new(vec![
            Instr::Input(1),
            Instr::Apply { symbol: "mul".into(), operands: vec![1] },
        ])
        .unwrap();
        assert!(matches!(arity.validate(1, &gamma()), Err(SlpError::ArityMismatch { .. })));

        assert_eq!(Slp::new(vec![]).unwrap_err(), SlpError::Empty);
    }

    #[test]
    fn run_single_multiplication() {
        let z6 = FiniteAlgebra::zn_add(6);
        let u = Slp::new(vec![
            Instr::Input(1),
            Instr::Input(2),
            Instr::Apply { symbol: "mul".into(), operands: vec![1, 2] },
        ])
        .unwrap();
        assert_eq!(u.run(&z6, &[2, 3]).unwrap(), 5);
    }

    #[test]
    fn run_identity_program() {
        let z6 = FiniteAlgebra::zn_add(6);
        assert_eq!(identity_program().run(&z6, &[]).unwrap(), 0);
    }

    #[test]
    fn run_power_program() {
        // 2^4 = 16 = 1 mod 15 and mod 5
        let u15 = FiniteAlgebra::zn_units(15).unwrap();
        let two = u15.index_of("2").unwrap();
        let got = power_program(4).run(&u15, &[two]).unwrap();
        assert_eq!(u15.element_name(got), "1");

        let u5 = FiniteAlgebra::zn_units(5).unwrap();
        let two = u5.index_of("2").unwrap();
        let got = power_program(4).run(&u5, &[two]).unwrap();
        assert_eq!(u5.element_name(got), "1");
    }

    #[test]
    fn to_free_examples() {
        let v = VarietySpec::AbelianGroups;
        let single = Slp::new(vec![Instr::Input(3)]).unwrap();
        assert_eq!(
            single.to_free(&v).unwrap().exponents().unwrap(),
            BTreeMap::from([(3, 1)])
        );

        // a1 * a1^-1 reduces to the identity in the free group
        let cancel = Slp::new(vec![
            Instr::Input(1),
            Instr::Apply { symbol: "inv".into(), operands: vec![1] },
            Instr::Apply { symbol: "mul".into(), operands: vec![1, 2] },
        ])
        .unwrap();
        assert!(cancel.to_free(&VarietySpec::AllGroups).unwrap().is_identity());

        assert!(identity_program().to_free(&v).unwrap().is_identity());
        assert!(identity_program()
            .to_free(&VarietySpec::AllGroups)
            .unwrap()
            .is_identity());
    }

    #[test]
    fn power_program_matches_repeated_multiplication() {
        // oracle: chain of s multiplications
        let v = VarietySpec::AbelianGroups;
        for s in 1..=40u64 {
            let mut instrs = vec![Instr::Input(1)];
            for _ in 1..s {
                let last = instrs.len();
                instrs.push(Instr::Apply { symbol: "mul".into(), operands: vec![last, 1] });
            }
            let chain = Slp::new(instrs).unwrap();
            let expect = chain.to_free(&v).unwrap();
            let got = power_program(s).to_free(&v).unwrap();
            assert!(crate::algebra::free_equal(&expect, &got).unwrap(), "s = {s}");
        }
        assert_eq!(power_program(6).to_free(&v).unwrap().exponents().unwrap(), BTreeMap::from([(1, 6)]));
        assert_eq!(power_program(5).to_free(&v).unwrap().exponents().unwrap(), BTreeMap::from([(1, 5)]));
    }

    #[test]
    fn power_program_length_bound() {
        assert_eq!(power_program(1).instrs(), &[Instr::Input(1)]);
        for s in 1..=4096u64 {
            let bound = 2 * (63 - s.leading_zeros() as usize) + 2;
            assert!(power_program(s).len() <= bound, "s = {s}");
        }
        for s in [10_000u64, 65_535, 123_456, 1_000_000] {
            let bound = 2 * (63 - s.leading_zeros() as usize) + 2;
            assert!(power_program(s).len() <= bound, "s = {s}");
        }
    }

    #[test]
    fn text_format_round_trip() {
        let u = power_program(6);
        let text = u.to_string();
        assert_eq!(Slp::parse(&text).unwrap(), u);
        let annotated = format!("# a power program\n\n{text}# done\n");
        assert_eq!(Slp::parse(&annotated).unwrap(), u);
    }
}
