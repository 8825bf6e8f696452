//! Quantum oracles as permutation unitaries over equal-width registers,
//! and the two conversion directions between an oracle family and a
//! multiply/divide pair for groups.

use thiserror::Error;

use crate::algebra::OmegaAlgebra;
use crate::blackbox::BlackBoxAlgebra;

use super::state::{StateError, StateVec};

/// A unitary acting on `registers` quantum registers of `width` qubits
/// each, given as a bijection on basis labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermUnitary {
    registers: usize,
    width: usize,
    perm: Vec<usize>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("not a bijection on basis labels")]
    NotBijective,
    #[error("register count mismatch: operator wants {expected}, got {got}")]
    RegisterMismatch { expected: usize, got: usize },
    #[error("register width mismatch: {expected} vs {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("register index {0} out of range")]
    RegisterRange(usize),
    #[error("oracle applied outside its specified subspace: stray mass {0:.3e}")]
    DomainViolation(f64),
    #[error("carrier is empty")]
    EmptyCarrier,
    #[error("the oracle's signature is not the group signature")]
    NotAGroup,
    #[error(transparent)]
    State(#[from] StateError),
}

impl PermUnitary {
    pub fn new(registers: usize, width: usize, perm: Vec<usize>) -> Result<Self, OracleError> {
        if perm.len() != 1usize << (registers * width) {
            return Err(OracleError::NotBijective);
        }
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(OracleError::NotBijective);
            }
            seen[p] = true;
        }
        Ok(PermUnitary { registers, width, perm })
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn map(&self, label: usize) -> usize {
        self.perm[label]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }
}

/// XOR of register a into register b: `(v, w) -> (v, v XOR w)`.
pub fn cnot_registers(width: usize) -> PermUnitary {
    let dim = 1usize << (2 * width);
    let mask = (1usize << width) - 1;
    let perm = (0..dim)
        .map(|label| {
            let v = label >> width;
            let w = label & mask;
            (v << width) | (v ^ w)
        })
        .collect();
    PermUnitary::new(2, width, perm).unwrap()
}

/// Build the oracle family for a black box: for each symbol, the
/// permutation XORs the result register by the operation value whenever
/// every operand register holds a carrier element, and acts as the
/// identity on all other basis labels.
pub fn build_quantum_oracle(
    bb: &BlackBoxAlgebra,
) -> Result<Vec<(String, PermUnitary)>, OracleError> {
    if bb.carrier_len() == 0 {
        return Err(OracleError::EmptyCarrier);
    }
    let width = bb.width();
    let mask = (1usize << width) - 1;
    let mut out = Vec::new();
    for (id, sym) in bb.signature().symbols() {
        let regs = sym.arity + 1;
        let dim = 1usize << (regs * width);
        let mut perm = Vec::with_capacity(dim);
        let mut args = vec![0usize; sym.arity];
        'labels: for label in 0..dim {
            for (slot, a) in args.iter_mut().enumerate() {
                let chunk = label >> ((regs - 1 - slot) * width) & mask;
                match bb.decode_index(chunk as u64) {
                    Some(idx) => *a = idx,
                    None => {
                        perm.push(label); // outside the specified subspace
                        continue 'labels;
                    }
                }
            }
            let result = bb.op_uncounted(id, &args);
            let enc = bb.encode(result).value() as usize;
            perm.push(label ^ enc);
        }
        out.push((sym.name.clone(), PermUnitary::new(regs, width, perm)?));
    }
    Ok(out)
}

/// A system of `registers` equal-width registers holding one statevector.
#[derive(Debug, Clone)]
pub struct RegisterMachine {
    registers: usize,
    width: usize,
    state: StateVec,
}

impl RegisterMachine {
    /// Start in the basis state with the given per-register labels.
    pub fn basis(width: usize, labels: &[usize]) -> Result<RegisterMachine, OracleError> {
        let registers = labels.len();
        let mut full = 0usize;
        for &l in labels {
            if l >> width != 0 {
                return Err(OracleError::WidthMismatch { expected: width, got: 64 });
            }
            full = (full << width) | l;
        }
        Ok(RegisterMachine {
            registers,
            width,
            state: StateVec::basis(registers * width, full)?,
        })
    }

    pub fn state(&self) -> &StateVec {
        &self.state
    }

    fn register_qubits(&self, regs: &[usize]) -> Result<Vec<usize>, OracleError> {
        let mut qubits = Vec::with_capacity(regs.len() * self.width);
        for &r in regs {
            if r >= self.registers {
                return Err(OracleError::RegisterRange(r));
            }
            qubits.extend(r * self.width..(r + 1) * self.width);
        }
        Ok(qubits)
    }

    /// Apply `w` to the named registers (in that order), identity elsewhere.
    pub fn apply(&mut self, w: &PermUnitary, regs: &[usize]) -> Result<(), OracleError> {
        if w.width != self.width {
            return Err(OracleError::WidthMismatch { expected: self.width, got: w.width });
        }
        if regs.len() != w.registers {
            return Err(OracleError::RegisterMismatch { expected: w.registers, got: regs.len() });
        }
        let qubits = self.register_qubits(regs)?;
        self.state.apply_perm(&w.perm, &qubits)?;
        Ok(())
    }

    /// Amplitude mass on basis states where any of the listed registers
    /// holds a label outside `allowed`.
    pub fn stray_mass(&self, regs: &[usize], allowed: &[bool]) -> Result<f64, OracleError> {
        let mut mass = 0.0;
        let n = self.registers * self.width;
        let mask = (1usize << self.width) - 1;
        for (label, amp) in self.state.amplitudes().iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            for &r in regs {
                let chunk = label >> (n - (r + 1) * self.width) & mask;
                if !allowed[chunk] {
                    mass += p;
                    break;
                }
            }
        }
        Ok(mass)
    }

    /// Enforce the black-box discipline before an oracle application: the
    /// operand registers must carry (up to 1e-9) only allowed labels.
    pub fn check_oracle_domain(
        &self,
        regs: &[usize],
        allowed: &[bool],
    ) -> Result<(), OracleError> {
        let mass = self.stray_mass(regs, allowed)?;
        if mass > 1e-9 {
            return Err(OracleError::DomainViolation(mass));
        }
        Ok(())
    }

    /// If the state is a single basis state, return its per-register labels.
    pub fn basis_labels(&self) -> Option<Vec<usize>> {
        let mut found = None;
        for (label, amp) in self.state.amplitudes().iter().enumerate() {
            let p = amp.norm_sqr();
            if p > 1e-18 {
                if found.is_some() || (p - 1.0).abs() > 1e-12 {
                    return None;
                }
                found = Some(label);
            }
        }
        let label = found?;
        let mask = (1usize << self.width) - 1;
        Some(
            (0..self.registers)
                .map(|r| label >> ((self.registers - 1 - r) * self.width) & mask)
                .collect(),
        )
    }
}

/// A gate list over registers plus the registers holding the result.
/// Remaining registers are tracked ancillas, not restored.
#[derive(Debug, Clone)]
pub struct StagedCircuit {
    pub registers: usize,
    pub width: usize,
    pub gates: Vec<(PermUnitary, Vec<usize>)>,
    pub outputs: Vec<usize>,
}

impl StagedCircuit {
    /// Run on a basis input (ancillas zero-initialized); returns the full
    /// final label per register.
    pub fn run_basis(&self, inputs: &[usize]) -> Result<Vec<usize>, OracleError> {
        assert!(inputs.len() <= self.registers);
        let mut labels = inputs.to_vec();
        labels.resize(self.registers, 0);
        let mut machine = RegisterMachine::basis(self.width, &labels)?;
        for (gate, regs) in &self.gates {
            machine.apply(gate, regs)?;
        }
        machine
            .basis_labels()
            .ok_or(OracleError::DomainViolation(1.0))
    }

    pub fn run_machine(&self, machine: &mut RegisterMachine) -> Result<(), OracleError> {
        for (gate, regs) in &self.gates {
            machine.apply(gate, regs)?;
        }
        Ok(())
    }
}

/// The multiply/divide pair derived from a group oracle:
/// `multiply` sends `|g>|h>|0>` to a state whose output registers read
/// `(g, gh)`; `divide` sends `|g>|h>|0>|0>` to `(g, g^-1 h)`.
#[derive(Debug, Clone)]
pub struct MultiplyPair {
    pub multiply: StagedCircuit,
    pub divide: StagedCircuit,
}

/// Compose a group oracle `(U_mul, U_inv)` into the multiply/divide pair.
pub fn derive_multiply_pair(
    u_mul: &PermUnitary,
    u_inv: &PermUnitary,
    width: usize,
) -> Result<MultiplyPair, OracleError> {
    if u_mul.width != width || u_inv.width != width {
        return Err(OracleError::WidthMismatch { expected: width, got: u_mul.width });
    }
    let multiply = StagedCircuit {
        registers: 3,
        width,
        gates: vec![(u_mul.clone(), vec![0, 1, 2])],
        outputs: vec![0, 2],
    };
    let divide = StagedCircuit {
        registers: 4,
        width,
        gates: vec![(u_inv.clone(), vec![0, 2]), (u_mul.clone(), vec![2, 1, 3])],
        outputs: vec![0, 3],
    };
    Ok(MultiplyPair { multiply, divide })
}

/// Extract two-register permutations realizing the pair's contract by
/// running the staged circuits on every carrier basis pair; labels outside
/// the carrier square extend by the identity.
pub fn pair_as_permutations(
    pair: &MultiplyPair,
    carrier: &[usize],
    width: usize,
) -> Result<(PermUnitary, PermUnitary), OracleError> {
    let dim = 1usize << (2 * width);
    let mut mul_perm: Vec<usize> = (0..dim).collect();
    let mut div_perm: Vec<usize> = (0..dim).collect();
    for &g in carrier {
        for &h in carrier {
            let label = (g << width) | h;
            let out = pair.multiply.run_basis(&[g, h])?;
            let (og, oh) = (out[pair.multiply.outputs[0]], out[pair.multiply.outputs[1]]);
            if og != g {
                return Err(OracleError::NotBijective);
            }
            mul_perm[label] = (og << width) | oh;
            let out = pair.divide.run_basis(&[g, h])?;
            let (og, oh) = (out[pair.divide.outputs[0]], out[pair.divide.outputs[1]]);
            if og != g {
                return Err(OracleError::NotBijective);
            }
            div_perm[label] = (og << width) | oh;
        }
    }
    Ok((
        PermUnitary::new(2, width, mul_perm)?,
        PermUnitary::new(2, width, div_perm)?,
    ))
}

/// The oracle family recovered from a multiply/divide pair.
#[derive(Debug, Clone)]
pub struct DerivedOracle {
    pub u_mul: StagedCircuit,
    pub u_inv: StagedCircuit,
    /// Needs one arbitrary carrier element in its first register.
    pub u_one: StagedCircuit,
}

/// Compose a multiply/divide pair back into oracle-style circuits with
/// XOR semantics on the result register.
pub fn oracle_from_multiply_pair(
    m: &PermUnitary,
    m_div: &PermUnitary,
    width: usize,
) -> Result<DerivedOracle, OracleError> {
    if m.width != width || m_div.width != width {
        return Err(OracleError::WidthMismatch { expected: width, got: m.width });
    }
    let cnot = cnot_registers(width);
    // |g>|h>|v>|0> -> outputs (g, h, v XOR gh), junk gh
    let u_mul = StagedCircuit {
        registers: 4,
        width,
        gates: vec![
            (cnot.clone(), vec![1, 3]),
            (m.clone(), vec![0, 3]),
            (cnot.clone(), vec![3, 2]),
        ],
        outputs: vec![0, 1, 2],
    };
    // |h>|v>|0> -> outputs (h, v XOR h^-1), junk h^-1
    let u_inv = StagedCircuit {
        registers: 3,
        width,
        gates: vec![
            (cnot.clone(), vec![0, 2]),
            (m_div.clone(), vec![0, 2]),
            (m_div.clone(), vec![0, 2]),
            (cnot.clone(), vec![2, 1]),
        ],
        outputs: vec![0, 1],
    };
    // |h>|v>|0> -> output v XOR 1 in register 1, junk identity
    let u_one = StagedCircuit {
        registers: 3,
        width,
        gates: vec![
            (cnot.clone(), vec![0, 2]),
            (m_div.clone(), vec![0, 2]),
            (cnot, vec![2, 1]),
        ],
        outputs: vec![1],
    };
    Ok(DerivedOracle { u_mul, u_inv, u_one })
}

/// Outcome of checking both conversion directions against the direct
/// oracle on every relevant basis state.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConversionReport {
    pub width: usize,
    pub carrier: usize,
    /// Carrier pairs checked against the multiply/divide contract.
    pub pair_states: usize,
    /// Basis states compared for the recovered U_mul / U_inv / U_one.
    pub mul_states: usize,
    pub inv_states: usize,
    pub one_states: usize,
    /// True when every comparison matched to 1e-12 per amplitude.
    pub exact: bool,
}

fn states_equal(a: &StateVec, b: &StateVec) -> bool {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .all(|(x, y)| (x - y).norm() <= 1e-12)
}

/// Full round trip for a black-box group: oracle -> multiply pair ->
/// oracle, comparing statevectors against the direct oracle on every
/// carrier basis state (all result-register values included).
pub fn conversion_round_trip(bb: &BlackBoxAlgebra) -> Result<ConversionReport, OracleError> {
    if !bb.signature().is_group() {
        return Err(OracleError::NotAGroup);
    }
    let width = bb.width();
    let oracle = build_quantum_oracle(bb)?;
    let find = |name: &str| oracle.iter().find(|(n, _)| n == name).unwrap().1.clone();
    let (u_mul, u_inv, u_one) = (find("mul"), find("inv"), find("one"));

    let carrier: Vec<usize> = bb.carrier().iter().map(|b| b.value() as usize).collect();
    let mul = bb.signature().id_of("mul").unwrap();
    let inv = bb.signature().id_of("inv").unwrap();
    let one = bb.signature().id_of("one").unwrap();
    let op2 = |a: usize, b: usize| {
        let (ia, ib) = (bb.decode_index(a as u64).unwrap(), bb.decode_index(b as u64).unwrap());
        bb.encode(bb.op_uncounted(mul, &[ia, ib])).value() as usize
    };
    let op_inv = |a: usize| {
        let ia = bb.decode_index(a as u64).unwrap();
        bb.encode(bb.op_uncounted(inv, &[ia])).value() as usize
    };
    let identity = bb.encode(bb.op_uncounted(one, &[])).value() as usize;

    let mut exact = true;
    let mut pair_states = 0usize;

    // Direction one: oracle family to multiply/divide pair.
    let pair = derive_multiply_pair(&u_mul, &u_inv, width)?;
    for &g in &carrier {
        for &h in &carrier {
            pair_states += 2;
            let mut machine = RegisterMachine::basis(width, &[g, h, 0])?;
            pair.multiply.run_machine(&mut machine)?;
            let expect = RegisterMachine::basis(width, &[g, h, op2(g, h)])?;
            exact &= states_equal(machine.state(), expect.state());

            let mut machine = RegisterMachine::basis(width, &[g, h, 0, 0])?;
            pair.divide.run_machine(&mut machine)?;
            let expect =
                RegisterMachine::basis(width, &[g, h, op_inv(g), op2(op_inv(g), h)])?;
            exact &= states_equal(machine.state(), expect.state());
        }
    }

    // Direction two: pair back to an oracle family, with the pair realized
    // by running the derived circuits (not read off the black box).
    let (m2, m2div) = pair_as_permutations(&pair, &carrier, width)?;
    let derived = oracle_from_multiply_pair(&m2, &m2div, width)?;
    let space = 1usize << width;
    let mut mul_states = 0usize;
    for &g in &carrier {
        for &h in &carrier {
            for v in 0..space {
                mul_states += 1;
                let mut machine = RegisterMachine::basis(width, &[g, h, v, 0])?;
                derived.u_mul.run_machine(&mut machine)?;
                let direct = u_mul.map((g << (2 * width)) | (h << width) | v);
                let direct_v = direct & (space - 1);
                let expect = RegisterMachine::basis(width, &[g, h, direct_v, op2(g, h)])?;
                exact &= states_equal(machine.state(), expect.state());
            }
        }
    }
    let mut inv_states = 0usize;
    let mut one_states = 0usize;
    for &h in &carrier {
        for v in 0..space {
            inv_states += 1;
            let mut machine = RegisterMachine::basis(width, &[h, v, 0])?;
            derived.u_inv.run_machine(&mut machine)?;
            let direct = u_inv.map((h << width) | v);
            let direct_v = direct & (space - 1);
            let expect = RegisterMachine::basis(width, &[h, direct_v, op_inv(h)])?;
            exact &= states_equal(machine.state(), expect.state());

            one_states += 1;
            let mut machine = RegisterMachine::basis(width, &[h, v, 0])?;
            derived.u_one.run_machine(&mut machine)?;
            let direct = u_one.map(v);
            let expect = RegisterMachine::basis(width, &[h, direct, identity])?;
            exact &= states_equal(machine.state(), expect.state());
        }
    }

    Ok(ConversionReport {
        width,
        carrier: carrier.len(),
        pair_states,
        mul_states,
        inv_states,
        one_states,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FiniteAlgebra;
    use crate::blackbox::Strictness;

    fn identity_wrapped_z4() -> BlackBoxAlgebra {
        let z4 = FiniteAlgebra::zn_add(4);
        BlackBoxAlgebra::wrap_identity(&z4, 3, Strictness::Strict).unwrap()
    }

    #[test]
    fn oracle_xors_result_register() {
        let bb = identity_wrapped_z4();
        let oracle = build_quantum_oracle(&bb).unwrap();
        let (_, u_mul) = oracle.iter().find(|(n, _)| n == "mul").unwrap();
        // |1>|2>|000> -> |1>|2>|enc(3)>
        let label = (1 << 6) | (2 << 3);
        assert_eq!(u_mul.map(label), (1 << 6) | (2 << 3) | 3);
        // XOR involution: applying twice restores the label
        for label in 0..1 << 9 {
            assert_eq!(u_mul.map(u_mul.map(label)), label);
        }
        let (_, u_one) = oracle.iter().find(|(n, _)| n == "one").unwrap();
        for v in 0..8usize {
            assert_eq!(u_one.map(v), v); // enc(0) = 0 under the identity encoding
        }
    }

    #[test]
    fn off_carrier_labels_act_as_identity() {
        let bb = identity_wrapped_z4();
        let oracle = build_quantum_oracle(&bb).unwrap();
        let (_, u_mul) = oracle.iter().find(|(n, _)| n == "mul").unwrap();
        // operand 7 is outside the carrier {0,1,2,3}
        let label = (7 << 6) | (2 << 3) | 5;
        assert_eq!(u_mul.map(label), label);
    }

    #[test]
    fn cnot_semantics() {
        let cnot = cnot_registers(3);
        let mut m = RegisterMachine::basis(3, &[0b101, 0b011]).unwrap();
        m.apply(&cnot, &[0, 1]).unwrap();
        assert_eq!(m.basis_labels().unwrap(), vec![0b101, 0b110]);
        // register-swapped application XORs the other way
        let mut m = RegisterMachine::basis(3, &[0b101, 0b011]).unwrap();
        m.apply(&cnot, &[1, 0]).unwrap();
        assert_eq!(m.basis_labels().unwrap(), vec![0b110, 0b011]);
    }

    #[test]
    fn multiply_pair_on_z5() {
        let z5 = FiniteAlgebra::zn_add(5);
        let bb = BlackBoxAlgebra::wrap_identity(&z5, 3, Strictness::Strict).unwrap();
        let oracle = build_quantum_oracle(&bb).unwrap();
        let u_mul = &oracle.iter().find(|(n, _)| n == "mul").unwrap().1;
        let u_inv = &oracle.iter().find(|(n, _)| n == "inv").unwrap().1;
        let pair = derive_multiply_pair(u_mul, u_inv, 3).unwrap();
        for g in 0..5usize {
            for h in 0..5usize {
                let out = pair.multiply.run_basis(&[g, h]).unwrap();
                assert_eq!((out[0], out[2]), (g, (g + h) % 5));
                let out = pair.divide.run_basis(&[g, h]).unwrap();
                assert_eq!((out[0], out[3]), (g, (h + 5 - g) % 5));
            }
        }
    }

    #[test]
    fn conversion_round_trip_is_exact_on_z5() {
        let z5 = FiniteAlgebra::zn_add(5);
        let bb = BlackBoxAlgebra::wrap(&z5, 3, 21, Strictness::Strict).unwrap();
        let report = conversion_round_trip(&bb).unwrap();
        assert!(report.exact);
        assert_eq!(report.pair_states, 50);
        assert_eq!(report.mul_states, 200);
    }

    #[test]
    fn stray_mass_detects_off_carrier_amplitude() {
        let bb = identity_wrapped_z4();
        let mut allowed = vec![false; 8];
        for &b in bb.carrier() {
            allowed[b.value() as usize] = true;
        }
        let m = RegisterMachine::basis(3, &[6, 2]).unwrap(); // 6 not in carrier
        assert!(m.stray_mass(&[0], &allowed).unwrap() > 0.99);
        assert!(m.check_oracle_domain(&[1], &allowed).is_ok());
        assert!(m.check_oracle_domain(&[0], &allowed).is_err());
    }
}
