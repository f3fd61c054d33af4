//! Dense n-qubit state-vector reference.
//!
//! Qubit 1 is the most significant bit of the basis index, so basis index
//! `x` spells `x_1 … x_n` left to right. When a target register is present
//! it is the least significant qubit. Measurement is never sampled: outcome
//! probabilities come straight from the amplitudes.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::bits::{BitString, HiddenString, InputString};
use crate::error::{Error, Result};
use crate::jones::EXACT_TOL;

/// Largest register held densely.
pub const MAX_QUBITS: usize = 20;

/// Single-qubit operator, row-major.
pub type Gate = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const HADAMARD: Gate = [
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0)],
];

pub const PAULI_Z: Gate = [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]];

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        Err(Error::invalid(format!("register size {n} outside 1..={MAX_QUBITS}")))
    } else {
        Ok(())
    }
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_size(n)?;
        if index >> n != 0 {
            return Err(Error::invalid(format!("basis index {index} needs more than {n} qubits")));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Ok(StateVector { n, amps })
    }

    pub fn from_bits(bits: &BitString) -> Result<Self> {
        Self::basis(bits.len(), bits.to_index() as usize)
    }

    /// Normalized amplitudes for `n` qubits.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_size(n)?;
        if amps.len() != 1 << n {
            return Err(Error::invalid(format!(
                "{} amplitudes given for {n} qubits",
                amps.len()
            )));
        }
        let s = StateVector { n, amps };
        if (s.norm_sqr() - 1.0).abs() > EXACT_TOL {
            return Err(Error::invalid(format!("state has norm² {}", s.norm_sqr())));
        }
        Ok(s)
    }

    /// Tensor product of single-qubit states, qubit 1 first.
    pub fn product(qubits: &[[Complex64; 2]]) -> Result<Self> {
        check_size(qubits.len())?;
        let mut amps = vec![ONE];
        for q in qubits {
            amps = amps.iter().flat_map(|&a| [a * q[0], a * q[1]]).collect();
        }
        Self::from_amplitudes(qubits.len(), amps)
    }

    /// `|a⟩ ⊗ |b⟩`.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        check_size(self.n + other.n)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| other.amps.iter().map(move |&b| a * b))
            .collect();
        Ok(StateVector { n: self.n + other.n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n - 1 - qubit)
    }

    /// Apply `gate` to qubit `qubit` (0-based, qubit 0 most significant).
    pub fn apply_single_qubit(&self, qubit: usize, gate: &Gate) -> Result<Self> {
        if qubit >= self.n {
            return Err(Error::invalid(format!("qubit {qubit} out of range for {} qubits", self.n)));
        }
        let mask = self.mask(qubit);
        let mut amps = self.amps.clone();
        for i0 in (0..amps.len()).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            amps[i0] = gate[0][0] * a0 + gate[0][1] * a1;
            amps[i1] = gate[1][0] * a0 + gate[1][1] * a1;
        }
        Ok(StateVector { n: self.n, amps })
    }

    /// Max amplitude deviation after aligning global phase on the first
    /// non-negligible amplitude of `other`.
    pub fn phase_aligned_distance(&self, other: &StateVector) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        let phase = other
            .amps
            .iter()
            .zip(&self.amps)
            .find(|(b, _)| b.norm() > EXACT_TOL)
            .and_then(|(b, a)| {
                let ratio = b / a;
                (a.norm() > 0.0).then(|| ratio / ratio.norm())
            })
            .unwrap_or(ONE);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }

    /// Plain max amplitude deviation, no phase alignment.
    pub fn distance(&self, other: &StateVector) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Hadamard on every qubit.
pub fn hadamard_all(s: &StateVector) -> StateVector {
    (0..s.n).fold(s.clone(), |acc, q| {
        acc.apply_single_qubit(q, &HADAMARD).expect("qubit in range")
    })
}

/// `|x⟩|y⟩ ↦ |x⟩|y ⊕ f(x)⟩` on `n + 1` qubits, target last.
pub fn apply_standard_oracle(a: &HiddenString, s: &StateVector) -> Result<StateVector> {
    if s.n != a.len() + 1 {
        return Err(Error::invalid(format!(
            "standard oracle for n={} needs {} qubits, state has {}",
            a.len(),
            a.len() + 1,
            s.n
        )));
    }
    let a_mask = a.to_index() as usize;
    let amps = (0..s.amps.len())
        .map(|idx| {
            let flip = parity(a_mask & (idx >> 1)) as usize;
            s.amps[idx ^ flip]
        })
        .collect();
    Ok(StateVector { n: s.n, amps })
}

/// `|x⟩ ↦ (−1)^{a·x}|x⟩`.
pub fn apply_phase_oracle(a: &HiddenString, s: &StateVector) -> Result<StateVector> {
    if s.n != a.len() {
        return Err(Error::invalid(format!(
            "phase oracle for n={} applied to {} qubits",
            a.len(),
            s.n
        )));
    }
    let a_mask = a.to_index() as usize;
    let amps = s
        .amps
        .iter()
        .enumerate()
        .map(|(x, &amp)| if parity(a_mask & x) { -amp } else { amp })
        .collect();
    Ok(StateVector { n: s.n, amps })
}

/// `(σ_z)^{a_1} ⊗ … ⊗ (σ_z)^{a_n}`, one local gate per set bit.
pub fn apply_factored_oracle(a: &HiddenString, s: &StateVector) -> Result<StateVector> {
    if s.n != a.len() {
        return Err(Error::invalid(format!(
            "factored oracle for n={} applied to {} qubits",
            a.len(),
            s.n
        )));
    }
    a.bits()
        .iter()
        .enumerate()
        .filter(|(_, &bit)| bit)
        .try_fold(s.clone(), |acc, (j, _)| acc.apply_single_qubit(j, &PAULI_Z))
}

fn parity(v: usize) -> bool {
    v.count_ones() % 2 == 1
}

/// Run the standard oracle on `|x⟩|0⟩` and read the target register.
pub fn oracle_classical_mode(a: &HiddenString, x: &InputString) -> Result<bool> {
    if a.len() != x.len() {
        return Err(Error::invalid("hidden and input strings differ in length"));
    }
    let input = StateVector::basis(x.len() + 1, (x.to_index() as usize) << 1)?;
    let out = apply_standard_oracle(a, &input)?;
    let p_one: f64 = out
        .probabilities()
        .iter()
        .enumerate()
        .filter(|(idx, _)| idx & 1 == 1)
        .map(|(_, p)| p)
        .sum();
    Ok(p_one > 0.5)
}

#[derive(Debug, Clone)]
pub struct BvRun {
    /// Most probable outcome on the data register.
    pub outcome: BitString,
    pub probability: f64,
    /// States before and after each step, starting with the prepared input.
    pub stages: Vec<StateVector>,
}

impl BvRun {
    pub fn final_state(&self) -> &StateVector {
        self.stages.last().expect("at least one stage")
    }
}

/// Marginal distribution of the leading `n_data` qubits, argmax.
fn most_likely_prefix(s: &StateVector, n_data: usize) -> Result<(BitString, f64)> {
    let shift = s.n - n_data;
    let mut marginal = vec![0.0; 1 << n_data];
    for (idx, p) in s.probabilities().into_iter().enumerate() {
        marginal[idx >> shift] += p;
    }
    let (best, &p) = marginal
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("non-empty");
    Ok((BitString::from_index(best as u64, n_data)?, p))
}

/// `|0⟩^n|1⟩ → H^{⊗n+1} → U_a → H^{⊗n+1}`, measured on the data register.
pub fn quantum_bv(a: &HiddenString) -> Result<BvRun> {
    let n = a.len();
    let prepared = StateVector::basis(n + 1, 1)?;
    let spread = hadamard_all(&prepared);
    let queried = apply_standard_oracle(a, &spread)?;
    let folded = hadamard_all(&queried);
    let (outcome, probability) = most_likely_prefix(&folded, n)?;
    Ok(BvRun { outcome, probability, stages: vec![prepared, spread, queried, folded] })
}

/// `|0⟩^n → H^{⊗n} → phase oracle → H^{⊗n}`, no target register.
pub fn quantum_bv_phase_form(a: &HiddenString) -> Result<BvRun> {
    let n = a.len();
    let prepared = StateVector::basis(n, 0)?;
    let spread = hadamard_all(&prepared);
    let queried = apply_phase_oracle(a, &spread)?;
    let folded = hadamard_all(&queried);
    let (outcome, probability) = most_likely_prefix(&folded, n)?;
    Ok(BvRun { outcome, probability, stages: vec![prepared, spread, queried, folded] })
}

/// `2^{−n} Σ_x (−1)^{a·x} (−1)^{x·z}`, summed over integers then scaled.
pub fn orthogonality_sum(a: &BitString, z: &BitString) -> Result<f64> {
    if a.len() != z.len() {
        return Err(Error::invalid("strings differ in length"));
    }
    let n = a.len();
    if n > 30 {
        return Err(Error::invalid(format!("n={n} too large to enumerate")));
    }
    let (am, zm) = (a.to_index(), z.to_index());
    let total: i64 = (0..1u64 << n)
        .map(|x| if ((am & x) ^ (zm & x)).count_ones() % 2 == 0 { 1 } else { -1 })
        .sum();
    Ok(total as f64 / (1u64 << n) as f64)
}

/// `Tr(ρ_j²)` of each single-qubit reduced state.
pub fn purity_per_qubit(s: &StateVector) -> Vec<f64> {
    (0..s.n)
        .map(|q| {
            let mask = s.mask(q);
            let (mut p0, mut p1, mut coherence) = (0.0, 0.0, ZERO);
            for i0 in (0..s.amps.len()).filter(|i| i & mask == 0) {
                let (a0, a1) = (s.amps[i0], s.amps[i0 | mask]);
                p0 += a0.norm_sqr();
                p1 += a1.norm_sqr();
                coherence += a0 * a1.conj();
            }
            p0 * p0 + p1 * p1 + 2.0 * coherence.norm_sqr()
        })
        .collect()
}

/// `(|0⟩ − |1⟩)/√2`.
pub fn minus_state() -> StateVector {
    StateVector {
        n: 1,
        amps: vec![Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0)],
    }
}

/// Whether the standard oracle on `|x⟩|−⟩` equals `(−1)^{f(x)}|x⟩|−⟩`.
pub fn phase_kickback_check(a: &HiddenString, x: &InputString) -> Result<bool> {
    if a.len() != x.len() {
        return Err(Error::invalid("hidden and input strings differ in length"));
    }
    let data = StateVector::from_bits(x)?;
    let lhs = apply_standard_oracle(a, &data.tensor(&minus_state())?)?;
    let rhs = apply_phase_oracle(a, &data)?.tensor(&minus_state())?;
    Ok(lhs.distance(&rhs) <= EXACT_TOL)
}
