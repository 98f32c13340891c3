use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gates::{Mat2, C64};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Default upper bound on simulated register width.
pub const MAX_WIDTH: usize = 24;

/// Amplitude count above which gate kernels run on the rayon pool.
const PAR_THRESHOLD: usize = 1 << 16;

const NORM_TOL: f64 = 1e-10;
const ZERO_BRANCH: f64 = 1e-14;

/// Dense state over `n` qubits; qubit 0 is the most significant index bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut s = Self::zero(n_qubits);
        s.amps[0] = C64::new(0.0, 0.0);
        s.amps[index] = C64::new(1.0, 0.0);
        s
    }

    /// Wraps raw amplitudes; length must be a power of two and the vector
    /// normalized to 1e−10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        let s = Self { n_qubits, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NormViolation(norm));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    pub fn apply(&mut self, gate: &Gate) {
        let tmask = self.mask(gate.target);
        let cmask = gate.control.map_or(0, |c| self.mask(c));
        apply_kernel(&mut self.amps, tmask, cmask, &gate.matrix);
    }

    /// Single-qubit matrix on `qubit` without building a [`Gate`].
    pub fn apply_matrix(&mut self, qubit: usize, m: &Mat2) {
        let tmask = self.mask(qubit);
        apply_kernel(&mut self.amps, tmask, 0, m);
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) {
        for g in gates {
            self.apply(g);
        }
    }

    /// Born probabilities of the joint outcomes on `qubits`; the first listed
    /// qubit is the most significant bit of the outcome index.
    pub fn probabilities(&self, qubits: &[usize]) -> Vec<f64> {
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            out[outcome_index(i, &masks)] += p;
        }
        out
    }

    /// Probability of reading `bit` on `qubit`.
    pub fn branch_probability(&self, qubit: usize, bit: u8) -> f64 {
        let m = self.mask(qubit);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| ((i & m) != 0) == (bit == 1))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects `qubit` onto `bit`, renormalizes, and returns the branch
    /// probability.
    pub fn postselect(&self, qubit: usize, bit: u8) -> Result<(StateVector, f64)> {
        let p = self.branch_probability(qubit, bit);
        if p < ZERO_BRANCH {
            return Err(Error::ZeroBranch(p));
        }
        let m = self.mask(qubit);
        let scale = 1.0 / p.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if ((i & m) != 0) == (bit == 1) { a * scale } else { C64::new(0.0, 0.0) })
            .collect();
        Ok((StateVector { n_qubits: self.n_qubits, amps }, p))
    }

    /// Amplitudes of the single-qubit state of `qubit`, read off the
    /// dominant basis configuration of the other qubits. Exact when the
    /// register is a product of `qubit` with a basis state of the rest, as
    /// after post-selecting every other qubit.
    pub fn qubit_state(&self, qubit: usize) -> [C64; 2] {
        let m = self.mask(qubit);
        let (mut best, mut weight) = (0usize, -1.0);
        for i in (0..self.amps.len()).filter(|i| i & m == 0) {
            let w = self.amps[i].norm_sqr() + self.amps[i | m].norm_sqr();
            if w > weight {
                weight = w;
                best = i;
            }
        }
        let v = [self.amps[best], self.amps[best | m]];
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0] / norm, v[1] / norm]
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

fn outcome_index(i: usize, masks: &[usize]) -> usize {
    masks.iter().fold(0, |acc, &m| (acc << 1) | usize::from(i & m != 0))
}

fn apply_kernel(amps: &mut [C64], tmask: usize, cmask: usize, m: &Mat2) {
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let update = |base: usize, lo: &mut [C64], hi: &mut [C64]| {
        for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
            if cmask != 0 && (base + k) & cmask == 0 {
                continue;
            }
            let (x, y) = (*a, *b);
            *a = m00 * x + m01 * y;
            *b = m10 * x + m11 * y;
        }
    };
    let block = tmask << 1;
    if amps.len() >= PAR_THRESHOLD {
        amps.par_chunks_mut(block).enumerate().for_each(|(blk, chunk)| {
            let (lo, hi) = chunk.split_at_mut(tmask);
            if tmask >= 1 << 12 {
                // Few large blocks: split each half further.
                lo.par_chunks_mut(1 << 12)
                    .zip(hi.par_chunks_mut(1 << 12))
                    .enumerate()
                    .for_each(|(sub, (l, h))| update(blk * block + sub * (1 << 12), l, h));
            } else {
                update(blk * block, lo, hi);
            }
        });
    } else {
        for (blk, chunk) in amps.chunks_mut(block).enumerate() {
            let (lo, hi) = chunk.split_at_mut(tmask);
            update(blk * block, lo, hi);
        }
    }
}

/// State after all gates of `circuit` (including any basis-rotation suffix)
/// act on `|0…0⟩`.
pub fn simulate(circuit: &Circuit) -> Result<StateVector> {
    simulate_with_limit(circuit, MAX_WIDTH)
}

pub fn simulate_with_limit(circuit: &Circuit, max_width: usize) -> Result<StateVector> {
    let n = circuit.n_qubits();
    if n > max_width {
        return Err(Error::WidthExceeded { width: n, max: max_width });
    }
    let mut state = StateVector::zero(n);
    state.apply_all(circuit.all_gates());
    Ok(state)
}

/// Dense unitary of the gate list (without the basis-rotation suffix),
/// built column by column.
pub fn circuit_unitary(circuit: &Circuit) -> DMatrix<C64> {
    let dim = 1 << circuit.n_qubits();
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector::basis(circuit.n_qubits(), col);
        s.apply_all(circuit.gates());
        for (row, a) in s.amps.iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    u
}
