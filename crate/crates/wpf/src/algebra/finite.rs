//! Finite Ω-algebras given by total operation tables.

use std::collections::BTreeSet;

use thiserror::Error;

use super::signature::{Signature, SymbolId};
use super::OmegaAlgebra;

/// A finite Ω-algebra: a named carrier and one total table per symbol.
///
/// Carrier elements are opaque tokens; internally they are dense indices
/// `0..carrier_len()` so operation lookup is O(1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    name: String,
    signature: Signature,
    elems: Vec<String>,
    /// Per symbol, row-major table of length `elems.len()^arity`.
    tables: Vec<Vec<u32>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("table for `{symbol}` has {got} entries, expected {expected}")]
    TableSize { symbol: String, expected: usize, got: usize },
    #[error("table for `{symbol}` contains out-of-carrier index {index}")]
    TableEntry { symbol: String, index: usize },
    #[error("duplicate carrier element `{0}`")]
    DuplicateElement(String),
    #[error("empty carrier requires a signature without nullary symbols")]
    EmptyCarrierWithNullary,
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` expects {expected} operands, got {got}")]
    ArityMismatch { symbol: String, expected: usize, got: usize },
    #[error("operand index {index} outside carrier of size {len}")]
    OperandRange { index: usize, len: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus must be >= 1, got {0}")]
    BadModulus(u64),
    #[error("carrier of size {0} exceeds the construction budget")]
    TooLarge(u128),
}

impl FiniteAlgebra {
    pub fn from_tables(
        name: impl Into<String>,
        signature: Signature,
        elems: Vec<String>,
        tables: Vec<Vec<u32>>,
    ) -> Result<Self, AlgebraError> {
        for (i, e) in elems.iter().enumerate() {
            if elems[..i].contains(e) {
                return Err(AlgebraError::DuplicateElement(e.clone()));
            }
        }
        if elems.is_empty() && signature.has_nullary() {
            return Err(AlgebraError::EmptyCarrierWithNullary);
        }
        assert_eq!(tables.len(), signature.len(), "one table per symbol");
        for (id, sym) in signature.symbols() {
            let expected = elems.len().checked_pow(sym.arity as u32).unwrap_or(usize::MAX);
            let table = &tables[id.0];
            if table.len() != expected {
                return Err(AlgebraError::TableSize {
                    symbol: sym.name.clone(),
                    expected,
                    got: table.len(),
                });
            }
            if let Some(&bad) = table.iter().find(|&&v| v as usize >= elems.len()) {
                return Err(AlgebraError::TableEntry {
                    symbol: sym.name.clone(),
                    index: bad as usize,
                });
            }
        }
        Ok(FiniteAlgebra { name: name.into(), signature, elems, tables })
    }

    /// Build from closures over dense indices; used by the named constructors.
    pub fn from_ops(
        name: impl Into<String>,
        signature: Signature,
        elems: Vec<String>,
        mut op: impl FnMut(&str, &[usize]) -> usize,
    ) -> Result<Self, AlgebraError> {
        let n = elems.len();
        let mut tables = Vec::with_capacity(signature.len());
        for (_, sym) in signature.symbols() {
            let size = n.checked_pow(sym.arity as u32).unwrap_or(usize::MAX);
            let mut table = Vec::with_capacity(size);
            let mut args = vec![0usize; sym.arity];
            for flat in 0..size {
                let mut rest = flat;
                for a in (0..sym.arity).rev() {
                    args[a] = rest % n;
                    rest /= n;
                }
                table.push(op(&sym.name, &args) as u32);
            }
            tables.push(table);
        }
        FiniteAlgebra::from_tables(name, signature, elems, tables)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn carrier_len(&self) -> usize {
        self.elems.len()
    }

    pub fn element_name(&self, idx: usize) -> &str {
        &self.elems[idx]
    }

    pub fn element_names(&self) -> &[String] {
        &self.elems
    }

    pub fn index_of(&self, name: &str) -> Result<usize, AlgebraError> {
        self.elems
            .iter()
            .position(|e| e == name)
            .ok_or_else(|| AlgebraError::UnknownElement(name.to_string()))
    }

    /// O(1) table lookup over dense indices. Panics on bad input in debug
    /// builds; use [`OmegaAlgebra::apply`] for checked access.
    pub fn apply_idx(&self, sym: SymbolId, args: &[usize]) -> usize {
        let n = self.elems.len();
        let mut flat = 0usize;
        for &a in args {
            debug_assert!(a < n);
            flat = flat * n + a;
        }
        self.tables[sym.0][flat] as usize
    }

    pub(crate) fn table(&self, sym: SymbolId) -> &[u32] {
        &self.tables[sym.0]
    }

    // ---- named constructors -------------------------------------------

    /// The additive group of Z_n over the group signature.
    pub fn zn_add(n: u64) -> FiniteAlgebra {
        assert!(n >= 1);
        let elems = (0..n).map(|i| i.to_string()).collect();
        FiniteAlgebra::from_ops(format!("zn-add:{n}"), Signature::group(), elems, |sym, args| {
            let n = n as usize;
            match sym {
                "mul" => (args[0] + args[1]) % n,
                "inv" => (n - args[0]) % n,
                "one" => 0,
                _ => unreachable!(),
            }
        })
        .unwrap()
    }

    /// The multiplicative group of units modulo `n`.
    pub fn zn_units(n: u64) -> Result<FiniteAlgebra, AlgebraError> {
        if n < 2 {
            return Err(AlgebraError::BadModulus(n));
        }
        let units: Vec<u64> = (1..n).filter(|&a| gcd(a, n) == 1).collect();
        let pos = |v: u64| units.iter().position(|&u| u == v).unwrap();
        let elems = units.iter().map(|u| u.to_string()).collect();
        FiniteAlgebra::from_ops(format!("zn-star:{n}"), Signature::group(), elems, |sym, args| {
            match sym {
                "mul" => pos(units[args[0]] * units[args[1]] % n),
                "inv" => {
                    let a = units[args[0]];
                    let inv = units.iter().copied().find(|&b| a * b % n == 1).unwrap();
                    pos(inv)
                }
                "one" => pos(1),
                _ => unreachable!(),
            }
        })
    }

    /// The elementary abelian group Z_p^k (vectors over F_p, additive).
    pub fn elem_abelian(p: u64, k: u32) -> Result<FiniteAlgebra, AlgebraError> {
        if !is_prime(p) {
            return Err(AlgebraError::NotPrime(p));
        }
        let size = (p as u128).checked_pow(k).unwrap_or(u128::MAX);
        if size > 1 << 20 {
            return Err(AlgebraError::TooLarge(size));
        }
        let size = size as usize;
        let digits = |mut v: usize| -> Vec<u64> {
            let mut d = vec![0u64; k as usize];
            for slot in d.iter_mut().rev() {
                *slot = (v as u64) % p;
                v /= p as usize;
            }
            d
        };
        let pack = |d: &[u64]| -> usize {
            d.iter().fold(0usize, |acc, &x| acc * p as usize + x as usize)
        };
        let elems = (0..size)
            .map(|v| {
                let d: Vec<String> = digits(v).iter().map(u64::to_string).collect();
                d.join(",")
            })
            .collect();
        FiniteAlgebra::from_ops(
            format!("elem-abelian:{p},{k}"),
            Signature::group(),
            elems,
            |sym, args| match sym {
                "mul" => {
                    let (a, b) = (digits(args[0]), digits(args[1]));
                    let sum: Vec<u64> = a.iter().zip(&b).map(|(x, y)| (x + y) % p).collect();
                    pack(&sum)
                }
                "inv" => {
                    let a = digits(args[0]);
                    let neg: Vec<u64> = a.iter().map(|&x| (p - x) % p).collect();
                    pack(&neg)
                }
                "one" => 0,
                _ => unreachable!(),
            },
        )
    }

    /// The ring Z_n over the ring signature `add/neg/zero/mul`.
    pub fn ring_zn(n: u64) -> FiniteAlgebra {
        assert!(n >= 1);
        let elems = (0..n).map(|i| i.to_string()).collect();
        FiniteAlgebra::from_ops(format!("ring-zn:{n}"), Signature::ring(), elems, |sym, args| {
            let n = n as usize;
            match sym {
                "add" => (args[0] + args[1]) % n,
                "neg" => (n - args[0]) % n,
                "zero" => 0,
                "mul" => (args[0] * args[1]) % n,
                _ => unreachable!(),
            }
        })
        .unwrap()
    }

    /// Dihedral group of order 2n: rotations `r0..r(n-1)` and reflections
    /// `s0..s(n-1)`, with (r^i s^f)(r^j s^g) = r^(i + (-1)^f j) s^(f xor g).
    pub fn dihedral(n: u64) -> FiniteAlgebra {
        assert!(n >= 1);
        let n = n as usize;
        let mut elems: Vec<String> = (0..n).map(|i| format!("r{i}")).collect();
        elems.extend((0..n).map(|i| format!("s{i}")));
        let unpack = |v: usize| (v % n, v / n); // (rotation, flip)
        let pack = |rot: usize, flip: usize| flip * n + rot;
        FiniteAlgebra::from_ops(format!("dihedral:{n}"), Signature::group(), elems, |sym, args| {
            match sym {
                "mul" => {
                    let (i, f) = unpack(args[0]);
                    let (j, g) = unpack(args[1]);
                    let rot = if f == 0 { (i + j) % n } else { (i + n - j % n) % n };
                    pack(rot, f ^ g)
                }
                "inv" => {
                    let (i, f) = unpack(args[0]);
                    if f == 0 {
                        pack((n - i) % n, 0)
                    } else {
                        pack(i, 1)
                    }
                }
                "one" => 0,
                _ => unreachable!(),
            }
        })
        .unwrap()
    }

    /// Direct power `base^e` with componentwise operations.
    pub fn direct_power(base: &FiniteAlgebra, e: u32) -> Result<FiniteAlgebra, AlgebraError> {
        assert!(e >= 1);
        let b = base.carrier_len();
        let size = (b as u128).checked_pow(e).unwrap_or(u128::MAX);
        if size > 1 << 20 {
            return Err(AlgebraError::TooLarge(size));
        }
        let size = size as usize;
        let comps = |mut v: usize| -> Vec<usize> {
            let mut d = vec![0usize; e as usize];
            for slot in d.iter_mut().rev() {
                *slot = v % b;
                v /= b;
            }
            d
        };
        let pack = |d: &[usize]| d.iter().fold(0usize, |acc, &x| acc * b + x);
        let elems = (0..size)
            .map(|v| {
                let names: Vec<&str> = comps(v).iter().map(|&c| base.element_name(c)).collect();
                names.join("|")
            })
            .collect();
        let sig = base.signature().clone();
        let base = base.clone();
        FiniteAlgebra::from_ops(
            format!("{}^{e}", base.name()),
            sig.clone(),
            elems,
            |sym, args| {
                let id = sig.id_of(sym).unwrap();
                let parts: Vec<Vec<usize>> = args.iter().map(|&a| comps(a)).collect();
                let mut out = Vec::with_capacity(e as usize);
                for c in 0..e as usize {
                    let slot: Vec<usize> = parts.iter().map(|p| p[c]).collect();
                    out.push(base.apply_idx(id, &slot));
                }
                pack(&out)
            },
        )
    }
}

impl OmegaAlgebra for FiniteAlgebra {
    type Elem = usize;

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn label_space(&self) -> usize {
        self.elems.len()
    }

    fn label(&self, elem: &usize) -> usize {
        *elem
    }

    fn apply(&self, symbol: &str, args: &[usize]) -> Result<usize, AlgebraError> {
        let id = self
            .signature
            .id_of(symbol)
            .ok_or_else(|| AlgebraError::UnknownSymbol(symbol.to_string()))?;
        self.apply_id(id, args)
    }

    fn apply_id(&self, sym: SymbolId, args: &[usize]) -> Result<usize, AlgebraError> {
        let expected = self.signature.arity(sym);
        if args.len() != expected {
            return Err(AlgebraError::ArityMismatch {
                symbol: self.signature.name(sym).to_string(),
                expected,
                got: args.len(),
            });
        }
        for &a in args {
            if a >= self.elems.len() {
                return Err(AlgebraError::OperandRange { index: a, len: self.elems.len() });
            }
        }
        Ok(self.apply_idx(sym, args))
    }
}

/// The subalgebra generated by `seeds`: fixpoint closure under every
/// fundamental operation (nullary symbols always contribute).
pub fn subalgebra_closure(alg: &FiniteAlgebra, seeds: &[usize]) -> BTreeSet<usize> {
    let n = alg.carrier_len();
    let mut member = vec![false; n];
    let mut queue: Vec<usize> = Vec::new();
    for &s in seeds {
        assert!(s < n, "seed outside carrier");
        if !member[s] {
            member[s] = true;
            queue.push(s);
        }
    }
    for (id, sym) in alg.signature().symbols() {
        if sym.arity == 0 {
            let v = alg.apply_idx(id, &[]);
            if !member[v] {
                member[v] = true;
                queue.push(v);
            }
        }
    }
    // Grow layer by layer: new values must use at least one frontier element.
    let mut known: Vec<usize> = queue.clone();
    let mut frontier_start = 0usize;
    while frontier_start < known.len() {
        let snapshot = known.len();
        for (id, sym) in alg.signature().symbols() {
            if sym.arity == 0 {
                continue;
            }
            let mut args = vec![0usize; sym.arity];
            let mut idxs = vec![0usize; sym.arity];
            loop {
                if idxs.iter().any(|&i| i >= frontier_start) {
                    for (a, &i) in args.iter_mut().zip(idxs.iter()) {
                        *a = known[i];
                    }
                    let v = alg.apply_idx(id, &args);
                    if !member[v] {
                        member[v] = true;
                        known.push(v);
                    }
                }
                // mixed-radix increment over `snapshot` known values
                let mut pos = sym.arity;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idxs[pos] += 1;
                    if idxs[pos] < snapshot {
                        break;
                    }
                    idxs[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos == usize::MAX {
                    break;
                }
            }
        }
        frontier_start = snapshot;
    }
    known.into_iter().collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zn_add_tables() {
        let z6 = FiniteAlgebra::zn_add(6);
        let mul = z6.signature().id_of("mul").unwrap();
        assert_eq!(z6.apply_idx(mul, &[2, 3]), 5);
        assert_eq!(z6.apply_idx(mul, &[5, 5]), 4);
        let inv = z6.signature().id_of("inv").unwrap();
        assert_eq!(z6.apply_idx(inv, &[2]), 4);
        assert_eq!(z6.apply_idx(inv, &[0]), 0);
    }

    #[test]
    fn zn_units_structure() {
        let u15 = FiniteAlgebra::zn_units(15).unwrap();
        assert_eq!(u15.carrier_len(), 8); // phi(15) = 8
        let mul = u15.signature().id_of("mul").unwrap();
        let two = u15.index_of("2").unwrap();
        // 2^4 = 16 = 1 mod 15
        let mut cur = two;
        for _ in 0..3 {
            cur = u15.apply_idx(mul, &[cur, two]);
        }
        assert_eq!(u15.element_name(cur), "1");
    }

    #[test]
    fn closure_cyclic_subgroup() {
        let z6 = FiniteAlgebra::zn_add(6);
        let got = subalgebra_closure(&z6, &[2]);
        let names: Vec<&str> = got.iter().map(|&i| z6.element_name(i)).collect();
        assert_eq!(names, vec!["0", "2", "4"]);
    }

    #[test]
    fn closure_empty_seeds_gives_identity() {
        let z6 = FiniteAlgebra::zn_add(6);
        let got = subalgebra_closure(&z6, &[]);
        assert_eq!(got.len(), 1);
        assert_eq!(z6.element_name(*got.iter().next().unwrap()), "0");
    }

    #[test]
    fn closure_generator_of_units_mod_7() {
        let u7 = FiniteAlgebra::zn_units(7).unwrap();
        let three = u7.index_of("3").unwrap();
        assert_eq!(subalgebra_closure(&u7, &[three]).len(), 6);
        let two = u7.index_of("2").unwrap();
        assert_eq!(subalgebra_closure(&u7, &[two]).len(), 3); // {1,2,4}
    }

    #[test]
    fn dihedral_is_a_group_and_nonabelian() {
        let d4 = FiniteAlgebra::dihedral(4);
        assert_eq!(d4.carrier_len(), 8);
        let mul = d4.signature().id_of("mul").unwrap();
        let inv = d4.signature().id_of("inv").unwrap();
        let one = d4.signature().id_of("one").unwrap();
        let e = d4.apply_idx(one, &[]);
        let mut nonabelian = false;
        for a in 0..8 {
            assert_eq!(d4.apply_idx(mul, &[a, d4.apply_idx(inv, &[a])]), e);
            assert_eq!(d4.apply_idx(mul, &[d4.apply_idx(inv, &[a]), a]), e);
            for b in 0..8 {
                if d4.apply_idx(mul, &[a, b]) != d4.apply_idx(mul, &[b, a]) {
                    nonabelian = true;
                }
                for c in 0..8 {
                    let ab_c = d4.apply_idx(mul, &[d4.apply_idx(mul, &[a, b]), c]);
                    let a_bc = d4.apply_idx(mul, &[a, d4.apply_idx(mul, &[b, c])]);
                    assert_eq!(ab_c, a_bc);
                }
            }
        }
        assert!(nonabelian);
    }

    #[test]
    fn direct_power_componentwise() {
        let z3 = FiniteAlgebra::zn_add(3);
        let sq = FiniteAlgebra::direct_power(&z3, 2).unwrap();
        assert_eq!(sq.carrier_len(), 9);
        let mul = sq.signature().id_of("mul").unwrap();
        let a = sq.index_of("1|2").unwrap();
        let b = sq.index_of("2|2").unwrap();
        assert_eq!(sq.element_name(sq.apply_idx(mul, &[a, b])), "0|1");
    }

    #[test]
    fn empty_carrier_rules() {
        let sig = Signature::new(vec![("f", 1)]).unwrap();
        assert!(FiniteAlgebra::from_tables("empty", sig, vec![], vec![vec![]]).is_ok());
        let sig0 = Signature::new(vec![("c", 0)]).unwrap();
        assert_eq!(
            FiniteAlgebra::from_tables("empty", sig0, vec![], vec![vec![]]).unwrap_err(),
            AlgebraError::EmptyCarrierWithNullary
        );
    }
}
