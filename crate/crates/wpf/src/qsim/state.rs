//! Dense statevector over qubits. Qubit 0 is the most significant bit of a
//! basis label, so a label reads off the qubits left to right.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct StateVec {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("qubit index {index} out of range for {qubits} qubits")]
    QubitRange { index: usize, qubits: usize },
    #[error("qubit indices must be distinct")]
    OverlappingQubits,
    #[error("operator over {got} labels does not match {expected} target labels")]
    SizeMismatch { expected: usize, got: usize },
    #[error("state norm drifted to {0}")]
    NormDrift(f64),
    #[error("simulation budget exceeded: {0} qubits")]
    TooManyQubits(usize),
}

pub const MAX_QUBITS: usize = 22;

impl StateVec {
    pub fn basis(num_qubits: usize, label: usize) -> Result<StateVec, StateError> {
        if num_qubits > MAX_QUBITS {
            return Err(StateError::TooManyQubits(num_qubits));
        }
        let dim = 1usize << num_qubits;
        assert!(label < dim, "basis label out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[label] = Complex64::new(1.0, 0.0);
        Ok(StateVec { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_normalized(&self) -> Result<(), StateError> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(StateError::NormDrift(n));
        }
        Ok(())
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<(), StateError> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(StateError::QubitRange { index: q, qubits: self.num_qubits });
            }
            if qubits[..i].contains(&q) {
                return Err(StateError::OverlappingQubits);
            }
        }
        Ok(())
    }

    /// Extract the sub-label of `label` on the listed qubits, first listed
    /// qubit most significant.
    fn sub_label(&self, label: usize, qubits: &[usize]) -> usize {
        let mut sub = 0usize;
        for &q in qubits {
            let bit = label >> (self.num_qubits - 1 - q) & 1;
            sub = sub << 1 | bit;
        }
        sub
    }

    fn replace_sub_label(&self, label: usize, qubits: &[usize], sub: usize) -> usize {
        let mut out = label;
        for (k, &q) in qubits.iter().enumerate() {
            let bit = sub >> (qubits.len() - 1 - k) & 1;
            let pos = self.num_qubits - 1 - q;
            out = (out & !(1 << pos)) | (bit << pos);
        }
        out
    }

    /// Apply a basis permutation to the listed qubits: amplitudes move,
    /// norms are preserved exactly.
    pub fn apply_perm(&mut self, perm: &[usize], qubits: &[usize]) -> Result<(), StateError> {
        self.check_qubits(qubits)?;
        let w = qubits.len();
        if perm.len() != 1 << w {
            return Err(StateError::SizeMismatch { expected: 1 << w, got: perm.len() });
        }
        debug_assert!(is_permutation(perm));
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (label, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let sub = self.sub_label(label, qubits);
            let dest = self.replace_sub_label(label, qubits, perm[sub]);
            out[dest] = *amp;
        }
        self.amps = out;
        Ok(())
    }

    /// Apply a dense unitary (row-major, 2^w x 2^w) to the listed qubits.
    pub fn apply_dense(
        &mut self,
        matrix: &[Complex64],
        qubits: &[usize],
    ) -> Result<(), StateError> {
        self.check_qubits(qubits)?;
        let w = qubits.len();
        let dim = 1usize << w;
        if matrix.len() != dim * dim {
            return Err(StateError::SizeMismatch { expected: dim * dim, got: matrix.len() });
        }
        // Iterate cosets: all labels sharing the non-target bits.
        let rest_qubits: Vec<usize> =
            (0..self.num_qubits).filter(|q| !qubits.contains(q)).collect();
        let rest_dim = 1usize << rest_qubits.len();
        let mut gathered = vec![Complex64::new(0.0, 0.0); dim];
        for rest in 0..rest_dim {
            let mut base = 0usize;
            for (k, &q) in rest_qubits.iter().enumerate() {
                let bit = rest >> (rest_qubits.len() - 1 - k) & 1;
                base |= bit << (self.num_qubits - 1 - q);
            }
            let mut addrs = Vec::with_capacity(dim);
            for sub in 0..dim {
                let addr = self.replace_sub_label(base, qubits, sub);
                addrs.push(addr);
            }
            for (sub, &addr) in addrs.iter().enumerate() {
                gathered[sub] = self.amps[addr];
            }
            for (row, &addr) in addrs.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, &g) in gathered.iter().enumerate() {
                    acc += matrix[row * dim + col] * g;
                }
                self.amps[addr] = acc;
            }
        }
        Ok(())
    }

    /// Measurement distribution over the listed qubits (marginal).
    pub fn probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>, StateError> {
        self.check_qubits(qubits)?;
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (label, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            if p > 0.0 {
                probs[self.sub_label(label, qubits)] += p;
            }
        }
        Ok(probs)
    }

    /// Sample one measurement outcome of the listed qubits from the exact
    /// probability vector.
    pub fn sample<R: Rng>(&self, qubits: &[usize], rng: &mut R) -> Result<usize, StateError> {
        let probs = self.probabilities(qubits)?;
        let mut x: f64 = rng.gen();
        for (outcome, &p) in probs.iter().enumerate() {
            if x < p {
                return Ok(outcome);
            }
            x -= p;
        }
        Ok(probs.len() - 1)
    }
}

fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

/// The Hadamard gate.
pub fn hadamard() -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        Complex64::new(s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
    ]
}

/// Dense inverse Fourier transform on `w` qubits:
/// `F†[y][x] = exp(-2πi·xy/2^w)/sqrt(2^w)`.
pub fn inverse_qft(w: usize) -> Vec<Complex64> {
    let dim = 1usize << w;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut m = Vec::with_capacity(dim * dim);
    for y in 0..dim {
        for x in 0..dim {
            let theta = -2.0 * std::f64::consts::PI * (x as f64) * (y as f64) / dim as f64;
            m.push(Complex64::from_polar(scale, theta));
        }
    }
    m
}
