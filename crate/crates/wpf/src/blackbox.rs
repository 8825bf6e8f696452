//! Black-box Ω-algebras: carriers of fixed-width bit strings whose
//! structure is only reachable through a query-counted oracle, plus the
//! variable-length padding embedding, reducts, and the verifier for
//! encoded nontrivial relations.

use std::cell::Cell;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::algebra::free::free_equal;
use crate::algebra::signature::{Signature, SymbolId};
use crate::algebra::variety::VarietySpec;
use crate::algebra::{AlgebraError, FiniteAlgebra, OmegaAlgebra};
use crate::slp::{Slp, SlpError};

/// A fixed-width bit string, displayed most significant bit first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    width: u8,
    value: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitsError {
    #[error("width {0} exceeds the 63-bit limit")]
    WidthTooLarge(usize),
    #[error("value {value:#x} does not fit in {width} bits")]
    ValueTooWide { width: usize, value: u64 },
    #[error("`{0}` is not a string over {{0,1}}")]
    BadDigit(String),
    #[error("input of length {len} does not fit below width {width}")]
    PadTooLong { width: usize, len: usize },
    #[error("expected width {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("the all-zeros string has no preimage under the padding")]
    NoPreimage,
}

impl Bits {
    pub fn new(width: usize, value: u64) -> Result<Bits, BitsError> {
        if width > 63 {
            return Err(BitsError::WidthTooLarge(width));
        }
        if width < 64 && value >> width != 0 {
            return Err(BitsError::ValueTooWide { width, value });
        }
        Ok(Bits { width: width as u8, value })
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn parse(s: &str) -> Result<Bits, BitsError> {
        if s.len() > 63 {
            return Err(BitsError::WidthTooLarge(s.len()));
        }
        let mut value = 0u64;
        for c in s.chars() {
            value = (value << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(BitsError::BadDigit(s.to_string())),
                };
        }
        Ok(Bits { width: s.len() as u8, value })
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.width()).rev() {
            write!(f, "{}", (self.value >> i) & 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

/// Append a `1` marker then zero-fill: a bijection from strings of length
/// at most `n` onto the nonzero strings of length `n + 1`.
pub fn pad_marked(n: usize, u: Bits) -> Result<Bits, BitsError> {
    if u.width() > n {
        return Err(BitsError::PadTooLong { width: n, len: u.width() });
    }
    let tail_zeros = n - u.width();
    let value = (u.value << (tail_zeros + 1)) | (1 << tail_zeros);
    Bits::new(n + 1, value)
}

/// Inverse of [`pad_marked`]: strip trailing zeros and the final marker.
pub fn unpad_marked(n: usize, t: Bits) -> Result<Bits, BitsError> {
    if t.width() != n + 1 {
        return Err(BitsError::WidthMismatch { expected: n + 1, got: t.width() });
    }
    if t.value == 0 {
        return Err(BitsError::NoPreimage);
    }
    let tail_zeros = t.value.trailing_zeros() as usize;
    Bits::new(n - tail_zeros, t.value >> (tail_zeros + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    /// Malformed queries are protocol violations.
    Strict,
    /// Malformed queries get an arbitrary fixed answer (all zeros).
    Permissive,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlackBoxError {
    #[error("width {width} cannot encode a carrier of size {carrier}")]
    WidthTooSmall { width: usize, carrier: usize },
    #[error("width {0} exceeds the supported maximum of 24 bits")]
    WidthTooLarge(usize),
    #[error("protocol violation: query names symbol `{0}` outside the oracle's signature")]
    UnknownSymbol(String),
    #[error("protocol violation: symbol `{symbol}` takes {expected} operands, got {got}")]
    BadArity { symbol: String, expected: usize, got: usize },
    #[error("protocol violation: operand `{0}` is not a carrier element")]
    OffCarrier(Bits),
    #[error("protocol violation: operand width {got}, carrier width {expected}")]
    BadWidth { expected: usize, got: usize },
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error(transparent)]
    Signature(#[from] crate::algebra::SignatureError),
}

/// Reference form a black box serializes to: the hidden tables never leave
/// the instance.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct BlackBoxRef {
    pub width: usize,
    pub seed: Option<u64>,
    pub source: String,
}

/// An encoding width, a carrier of that many bits per element, and a
/// query-counted oracle wrapping a hidden finite algebra behind a seeded
/// relabeling.
#[derive(Debug, Clone)]
pub struct BlackBoxAlgebra {
    width: usize,
    signature: Signature,
    strictness: Strictness,
    seed: Option<u64>,
    source: FiniteAlgebra,
    /// View symbol -> source symbol (reducts restrict, renames relabel).
    sym_map: Vec<SymbolId>,
    encode_tbl: Vec<Bits>,
    decode_tbl: Vec<u32>,
    queries: Cell<u64>,
}

const NO_ELEM: u32 = u32::MAX;

impl BlackBoxAlgebra {
    /// Wrap a finite algebra behind a seeded pseudorandom injection of its
    /// carrier into `{0,1}^width`. Equal seeds give identical oracles.
    pub fn wrap(
        alg: &FiniteAlgebra,
        width: usize,
        seed: u64,
        strictness: Strictness,
    ) -> Result<BlackBoxAlgebra, BlackBoxError> {
        let space = check_width(alg, width)?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let labels: Vec<u64> = if space <= 1 << 16 {
            let mut all: Vec<u64> = (0..space as u64).collect();
            all.shuffle(&mut rng);
            all.truncate(alg.carrier_len());
            all
        } else {
            // Rejection sampling: the carrier is far smaller than the space.
            let mut picked = std::collections::HashSet::new();
            let mut out = Vec::with_capacity(alg.carrier_len());
            while out.len() < alg.carrier_len() {
                let v = rng.gen_range(0..space as u64);
                if picked.insert(v) {
                    out.push(v);
                }
            }
            out
        };
        Ok(Self::assemble(alg, width, Some(seed), strictness, &labels))
    }

    /// Wrap with the identity encoding: element i gets the bit pattern i.
    pub fn wrap_identity(
        alg: &FiniteAlgebra,
        width: usize,
        strictness: Strictness,
    ) -> Result<BlackBoxAlgebra, BlackBoxError> {
        check_width(alg, width)?;
        let labels: Vec<u64> = (0..alg.carrier_len() as u64).collect();
        Ok(Self::assemble(alg, width, None, strictness, &labels))
    }

    fn assemble(
        alg: &FiniteAlgebra,
        width: usize,
        seed: Option<u64>,
        strictness: Strictness,
        labels: &[u64],
    ) -> BlackBoxAlgebra {
        let mut encode_tbl = Vec::with_capacity(alg.carrier_len());
        let mut decode_tbl = vec![NO_ELEM; 1usize << width];
        for (i, &l) in labels.iter().enumerate() {
            encode_tbl.push(Bits::new(width, l).unwrap());
            decode_tbl[l as usize] = i as u32;
        }
        BlackBoxAlgebra {
            width,
            signature: alg.signature().clone(),
            strictness,
            seed,
            source: alg.clone(),
            sym_map: alg.signature().symbols().map(|(id, _)| id).collect(),
            encode_tbl,
            decode_tbl,
            queries: Cell::new(0),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn strictness(&self) -> Strictness {
        self.strictness
    }

    /// Number of oracle invocations so far (every invocation counts, also
    /// rejected ones).
    pub fn query_count(&self) -> u64 {
        self.queries.get()
    }

    pub fn carrier_len(&self) -> usize {
        self.encode_tbl.len()
    }

    /// Carrier strings in hidden-element order. The carrier itself is
    /// public in this model; only the operation structure is hidden.
    pub fn carrier(&self) -> &[Bits] {
        &self.encode_tbl
    }

    pub fn encode(&self, source_index: usize) -> Bits {
        self.encode_tbl[source_index]
    }

    /// Decode to the hidden element index; harness/test use only.
    pub fn decode(&self, b: Bits) -> Option<usize> {
        if b.width() != self.width {
            return None;
        }
        let x = self.decode_tbl[b.value as usize];
        (x != NO_ELEM).then_some(x as usize)
    }

    /// Answer a query. Operands inside the carrier get the operation value;
    /// anything else is a protocol violation (strict) or the all-zeros
    /// string (permissive). Every call bumps the counter.
    pub fn query(&self, symbol: &str, operands: &[Bits]) -> Result<Bits, BlackBoxError> {
        self.queries.set(self.queries.get() + 1);
        let id = match self.signature.id_of(symbol) {
            Some(id) => id,
            None => return self.misuse(BlackBoxError::UnknownSymbol(symbol.to_string())),
        };
        self.answer(id, operands)
    }

    fn query_id(&self, view_sym: SymbolId, operands: &[Bits]) -> Result<Bits, BlackBoxError> {
        self.queries.set(self.queries.get() + 1);
        self.answer(view_sym, operands)
    }

    fn answer(&self, view_sym: SymbolId, operands: &[Bits]) -> Result<Bits, BlackBoxError> {
        let expected = self.signature.arity(view_sym);
        if operands.len() != expected {
            return self.misuse(BlackBoxError::BadArity {
                symbol: self.signature.name(view_sym).to_string(),
                expected,
                got: operands.len(),
            });
        }
        let mut args = [0usize; 4];
        debug_assert!(expected <= 4);
        for (slot, &b) in args.iter_mut().zip(operands.iter()) {
            if b.width() != self.width {
                return self.misuse(BlackBoxError::BadWidth {
                    expected: self.width,
                    got: b.width(),
                });
            }
            match self.decode(b) {
                Some(i) => *slot = i,
                None => return self.misuse(BlackBoxError::OffCarrier(b)),
            }
        }
        let out = self.source.apply_idx(self.sym_map[view_sym.0], &args[..expected]);
        Ok(self.encode_tbl[out])
    }

    fn misuse(&self, err: BlackBoxError) -> Result<Bits, BlackBoxError> {
        match self.strictness {
            Strictness::Strict => Err(err),
            Strictness::Permissive => Ok(Bits::new(self.width, 0).unwrap()),
        }
    }

    /// Same carrier and encoding, oracle answering only the named symbols.
    /// The new instance has a fresh query counter.
    pub fn reduct(&self, symbols: &[&str]) -> Result<BlackBoxAlgebra, BlackBoxError> {
        let signature = self.signature.restrict(symbols)?;
        let sym_map = signature
            .symbols()
            .map(|(_, def)| {
                let view = self.signature.id_of(&def.name).unwrap();
                self.sym_map[view.0]
            })
            .collect();
        Ok(BlackBoxAlgebra {
            width: self.width,
            signature,
            strictness: self.strictness,
            seed: self.seed,
            source: self.source.clone(),
            sym_map,
            encode_tbl: self.encode_tbl.clone(),
            decode_tbl: self.decode_tbl.clone(),
            queries: Cell::new(0),
        })
    }

    /// Bijectively rename the oracle's symbols (e.g. a ring's additive
    /// symbols to the canonical group names). Same carrier, encoding, and
    /// hidden structure.
    pub fn renamed(&self, mapping: &[(&str, &str)]) -> Result<BlackBoxAlgebra, BlackBoxError> {
        let signature = self.signature.renamed(mapping)?;
        Ok(BlackBoxAlgebra {
            width: self.width,
            signature,
            strictness: self.strictness,
            seed: self.seed,
            source: self.source.clone(),
            sym_map: self.sym_map.clone(),
            encode_tbl: self.encode_tbl.clone(),
            decode_tbl: self.decode_tbl.clone(),
            queries: Cell::new(0),
        })
    }

    /// Serializable reference: `(width, seed, source name)`. The decoded
    /// tables are never serialized.
    pub fn reference(&self) -> BlackBoxRef {
        BlackBoxRef {
            width: self.width,
            seed: self.seed,
            source: self.source.name().to_string(),
        }
    }

    /// Uncounted structural access for the quantum-oracle constructors:
    /// realizing a permutation unitary reads the hidden structure once
    /// instead of spending classical queries.
    pub(crate) fn op_uncounted(&self, view_sym: SymbolId, args: &[usize]) -> usize {
        self.source.apply_idx(self.sym_map[view_sym.0], args)
    }

    pub(crate) fn decode_index(&self, label: u64) -> Option<usize> {
        let x = self.decode_tbl[label as usize];
        (x != NO_ELEM).then_some(x as usize)
    }
}

fn check_width(alg: &FiniteAlgebra, width: usize) -> Result<usize, BlackBoxError> {
    if width > 24 {
        return Err(BlackBoxError::WidthTooLarge(width));
    }
    let space = 1usize << width;
    if space < alg.carrier_len() {
        return Err(BlackBoxError::WidthTooSmall { width, carrier: alg.carrier_len() });
    }
    Ok(space)
}

impl OmegaAlgebra for BlackBoxAlgebra {
    type Elem = Bits;

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn label_space(&self) -> usize {
        1usize << self.width
    }

    fn label(&self, elem: &Bits) -> usize {
        elem.value as usize
    }

    fn apply(&self, symbol: &str, args: &[Bits]) -> Result<Bits, AlgebraError> {
        self.query(symbol, args)
            .map_err(|e| AlgebraError::UnknownSymbol(e.to_string()))
    }

    fn apply_id(&self, sym: SymbolId, args: &[Bits]) -> Result<Bits, AlgebraError> {
        self.query_id(sym, args)
            .map_err(|e| AlgebraError::UnknownSymbol(e.to_string()))
    }
}

/// A pair of programs offered as an encoded relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationPair {
    pub left: Slp,
    pub right: Slp,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("left program: {0}")]
    Left(SlpError),
    #[error("right program: {0}")]
    Right(SlpError),
    #[error(transparent)]
    Free(#[from] crate::algebra::FreeError),
}

/// Decide whether `pair` encodes a nontrivial relation among `g` in `alg`:
/// the two programs map to distinct elements of the m-generated free
/// algebra of `v` yet compute the same value at `g`.
pub fn is_nontrivial_relation<A: OmegaAlgebra>(
    v: &VarietySpec,
    m: usize,
    alg: &A,
    g: &[A::Elem],
    pair: &RelationPair,
) -> Result<bool, RelationError> {
    assert_eq!(g.len(), m, "g must be a tuple of m elements");
    let sig = v.signature();
    pair.left.validate(m, &sig).map_err(RelationError::Left)?;
    pair.right.validate(m, &sig).map_err(RelationError::Right)?;
    let lhs = pair.left.to_free(v).map_err(RelationError::Left)?;
    let rhs = pair.right.to_free(v).map_err(RelationError::Right)?;
    if free_equal(&lhs, &rhs)? {
        return Ok(false);
    }
    let lv = pair.left.run(alg, g).map_err(RelationError::Left)?;
    let rv = pair.right.run(alg, g).map_err(RelationError::Right)?;
    Ok(lv == rv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slp::{identity_program, power_program};

    #[test]
    fn bits_parse_display() {
        let b = Bits::parse("01100").unwrap();
        assert_eq!(b.width(), 5);
        assert_eq!(b.value(), 0b01100);
        assert_eq!(b.to_string(), "01100");
        assert_eq!(Bits::parse("").unwrap().width(), 0);
        assert!(Bits::parse("012").is_err());
    }

    #[test]
    fn padding_formula() {
        let u = Bits::parse("01").unwrap();
        assert_eq!(pad_marked(4, u).unwrap().to_string(), "01100");
        assert_eq!(pad_marked(0, Bits::parse("").unwrap()).unwrap().to_string(), "1");
        assert!(pad_marked(1, Bits::parse("01").unwrap()).is_err());
    }

    #[test]
    fn unpadding_inverse_and_excluded_point() {
        assert_eq!(
            unpad_marked(4, Bits::parse("01100").unwrap()).unwrap().to_string(),
            "01"
        );
        assert_eq!(
            unpad_marked(2, Bits::parse("000").unwrap()),
            Err(BitsError::NoPreimage)
        );
        assert_eq!(unpad_marked(0, Bits::parse("1").unwrap()).unwrap().to_string(), "");
    }

    fn wrapped_z6(seed: u64) -> BlackBoxAlgebra {
        let z6 = FiniteAlgebra::zn_add(6);
        BlackBoxAlgebra::wrap(&z6, 3, seed, Strictness::Strict).unwrap()
    }

    #[test]
    fn wrap_is_bijective_and_deterministic() {
        let bb = wrapped_z6(1);
        let mut seen = std::collections::HashSet::new();
        for &b in bb.carrier() {
            assert_eq!(b.width(), 3);
            assert!(seen.insert(b));
        }
        assert_eq!(seen.len(), 6);
        let again = wrapped_z6(1);
        assert_eq!(bb.carrier(), again.carrier());
        let other = wrapped_z6(2);
        assert_ne!(bb.carrier(), other.carrier()); // overwhelmingly likely
    }

    #[test]
    fn oracle_conjugates_through_encoding() {
        let z6 = FiniteAlgebra::zn_add(6);
        let bb = wrapped_z6(7);
        // oracle(mul, enc(2), enc(3)) = enc(5)
        let got = bb.query("mul", &[bb.encode(2), bb.encode(3)]).unwrap();
        assert_eq!(got, bb.encode(5));
        assert_eq!(bb.query_count(), 1);
        let one = bb.query("one", &[]).unwrap();
        assert_eq!(one, bb.encode(z6.index_of("0").unwrap()));
        assert_eq!(bb.query_count(), 2);
    }

    #[test]
    fn strict_rejects_and_counts_malformed_queries() {
        let bb = wrapped_z6(3);
        let outside = (0..8)
            .map(|v| Bits::new(3, v).unwrap())
            .find(|b| bb.decode(*b).is_none())
            .expect("6 of 8 labels are carrier, 2 are not");
        let err = bb.query("mul", &[outside, outside]).unwrap_err();
        assert!(matches!(err, BlackBoxError::OffCarrier(_)));
        assert_eq!(bb.query_count(), 1);
        assert!(matches!(
            bb.query("frobnicate", &[]).unwrap_err(),
            BlackBoxError::UnknownSymbol(_)
        ));
        assert_eq!(bb.query_count(), 2);
    }

    #[test]
    fn permissive_answers_all_zeros() {
        let z6 = FiniteAlgebra::zn_add(6);
        let bb = BlackBoxAlgebra::wrap(&z6, 3, 3, Strictness::Permissive).unwrap();
        let outside = (0..8)
            .map(|v| Bits::new(3, v).unwrap())
            .find(|b| bb.decode(*b).is_none())
            .unwrap();
        assert_eq!(
            bb.query("mul", &[outside, outside]).unwrap(),
            Bits::new(3, 0).unwrap()
        );
        assert_eq!(bb.query_count(), 1);
    }

    #[test]
    fn width_too_small() {
        let z6 = FiniteAlgebra::zn_add(6);
        assert!(matches!(
            BlackBoxAlgebra::wrap(&z6, 2, 1, Strictness::Strict),
            Err(BlackBoxError::WidthTooSmall { .. })
        ));
    }

    #[test]
    fn reduct_restricts_queries() {
        let r6 = FiniteAlgebra::ring_zn(6);
        let bb = BlackBoxAlgebra::wrap(&r6, 4, 11, Strictness::Strict).unwrap();
        let add = bb.reduct(&["add", "neg", "zero"]).unwrap();
        // behaves as the additive group
        let got = add.query("add", &[add.encode(2), add.encode(3)]).unwrap();
        assert_eq!(got, add.encode(5));
        // ring multiplication is gone
        assert!(matches!(
            add.query("mul", &[add.encode(2), add.encode(3)]),
            Err(BlackBoxError::UnknownSymbol(_))
        ));
        // full-signature reduct answers exactly as the original
        let full = bb.reduct(&["add", "neg", "zero", "mul"]).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(
                    full.query("mul", &[full.encode(a), full.encode(b)]).unwrap(),
                    bb.query("mul", &[bb.encode(a), bb.encode(b)]).unwrap()
                );
            }
        }
    }

    #[test]
    fn renamed_reduct_is_a_group_oracle() {
        let r6 = FiniteAlgebra::ring_zn(6);
        let bb = BlackBoxAlgebra::wrap(&r6, 4, 11, Strictness::Strict).unwrap();
        let grp = bb
            .reduct(&["add", "neg", "zero"])
            .unwrap()
            .renamed(&[("add", "mul"), ("neg", "inv"), ("zero", "one")])
            .unwrap();
        assert!(grp.signature().is_group());
        let got = grp.query("mul", &[grp.encode(4), grp.encode(5)]).unwrap();
        assert_eq!(got, grp.encode(3));
    }

    #[test]
    fn relation_verifier_examples() {
        // 3 * 2 = 0 mod 6 while a1^3 is free-nontrivial
        let z6 = FiniteAlgebra::zn_add(6);
        let v = VarietySpec::AbelianGroups;
        let pair = RelationPair { left: power_program(3), right: identity_program() };
        assert!(is_nontrivial_relation(&v, 1, &z6, &[2], &pair).unwrap());

        // (u, u) never is a relation
        let same = RelationPair { left: power_program(3), right: power_program(3) };
        assert!(!is_nontrivial_relation(&v, 1, &z6, &[2], &same).unwrap());

        // 3^2 = 2 != 1 mod 7
        let u7 = FiniteAlgebra::zn_units(7).unwrap();
        let three = u7.index_of("3").unwrap();
        let pair2 = RelationPair { left: power_program(2), right: identity_program() };
        assert!(!is_nontrivial_relation(&v, 1, &u7, &[three], &pair2).unwrap());
    }

    #[test]
    fn relation_verifier_is_isomorphism_invariant() {
        let z6 = FiniteAlgebra::zn_add(6);
        let v = VarietySpec::AbelianGroups;
        for g in 0..6usize {
            for s in 1..=6u64 {
                let pair = RelationPair { left: power_program(s), right: identity_program() };
                let plain = is_nontrivial_relation(&v, 1, &z6, &[g], &pair).unwrap();
                let bb = BlackBoxAlgebra::wrap(&z6, 3, 99 + s, Strictness::Strict).unwrap();
                let enc = is_nontrivial_relation(&v, 1, &bb, &[bb.encode(g)], &pair).unwrap();
                assert_eq!(plain, enc);
            }
        }
    }

    #[test]
    fn run_counts_one_query_per_apply() {
        let bb = wrapped_z6(5);
        let u = power_program(6); // in, and a few muls
        let applies = u
            .instrs()
            .iter()
            .filter(|i| matches!(i, crate::slp::Instr::Apply { .. }))
            .count() as u64;
        let before = bb.query_count();
        u.run(&bb, &[bb.encode(2)]).unwrap();
        assert_eq!(bb.query_count() - before, applies);
    }
}
