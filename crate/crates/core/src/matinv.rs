//! Matrix inversion by singular value transformation.
//!
//! Each instance is a Hermitian positive `A = V diag(σ1, σ2) V†` with two
//! distinct eigenvalues, block-encoded in the `|1⟩` block of a short circuit
//! `U`. A degree-3 odd polynomial matching `c/x` on both eigenvalues turns
//! `A` into `c·A⁻¹`; the column histograms of valid outcomes are then compared
//! to the ideal ones.

use crate::analysis::ScoreWithError;
use crate::backend::{Executor, Job};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gates::{self, Mat2, C64};
use crate::qsp::{self, PhaseSequence};
use crate::sim::{circuit_unitary, Measurement};
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Headroom kept below 1 when scaling the polynomial.
const BOUND_MARGIN: f64 = 1e-6;

/// Ideal largest valid-outcome probability per size `2^n`, `n = 1..=6`;
/// default instances are calibrated to reproduce these.
pub const IDEAL_MAX: [f64; 6] = [0.592, 0.868, 0.130, 0.210, 0.316, 0.261];

pub const SIZES: [usize; 6] = [2, 4, 8, 16, 32, 64];

/// Largest stored outcome fraction is drawn at this darkness.
pub const DARKNESS_AT_IDEAL_MAX: f64 = 0.9;

pub fn default_shots(size: usize) -> u64 {
    if size <= 16 {
        8192
    } else {
        1024
    }
}

/// Odd interpolant `P(x) = c(αx + βx³)` with `P(σ_i) = c/σ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionPolynomial {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
}

impl InversionPolynomial {
    /// Monomial coefficients of `P` including the scale `c`.
    pub fn coefficients(&self) -> Vec<f64> {
        vec![0.0, self.c * self.alpha, 0.0, self.c * self.beta]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c * (self.alpha * x + self.beta * x.powi(3))
    }
}

/// Largest `c` keeping `max_{[−1,1]} |P| ≤ 1 − 10⁻⁶`.
pub fn inversion_polynomial(sigma1: f64, sigma2: f64) -> Result<InversionPolynomial> {
    check_sigmas(sigma1, sigma2)?;
    // α σ + β σ³ = 1/σ for both σ.
    let (a1, a2) = (sigma1 * sigma1, sigma2 * sigma2);
    let beta = (1.0 / a1 - 1.0 / a2) / (a1 - a2);
    let alpha = 1.0 / a1 - beta * a1;
    let mut candidates = vec![1.0];
    if beta != 0.0 {
        let x2 = -alpha / (3.0 * beta);
        if x2 > 0.0 && x2 < 1.0 {
            candidates.push(x2.sqrt());
        }
    }
    let max = candidates.iter().map(|&x| (alpha * x + beta * x.powi(3)).abs()).fold(0.0, f64::max);
    Ok(InversionPolynomial { alpha, beta, c: (1.0 - BOUND_MARGIN) / max })
}

fn check_sigmas(sigma1: f64, sigma2: f64) -> Result<()> {
    if sigma1 - sigma2 < 1e-9 {
        return Err(Error::DegenerateSigmas(sigma1, sigma2));
    }
    if !(sigma2 > 0.0 && sigma1 <= 1.0) {
        return Err(Error::InvalidConfig(format!("singular values ({sigma1}, {sigma2}) outside (0, 1]")));
    }
    Ok(())
}

/// Hermitian reflection with `⟨1|G|1⟩ = σ`.
fn sigma_gate(sigma: f64) -> Mat2 {
    let s = (1.0 - sigma * sigma).max(0.0).sqrt();
    Mat2::new(C64::new(-sigma, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(sigma, 0.0))
}

fn random_su2(rng: &mut impl Rng) -> Mat2 {
    let (a, b, c): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    gates::rz(2.0 * PI * a) * gates::ry(2.0 * PI * b) * gates::rz(2.0 * PI * c)
}

/// Seeded eigenbasis circuit on `n` qubits: a layer of random single-qubit
/// gates, a brickwork of nearest-neighbour CNOTs, and a second random layer.
pub fn basis_circuit(n: usize, seed: u64) -> Circuit {
    let mut rng = crate::sim::stream_rng(seed, &format!("matinv-basis-{n}"));
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(Gate::one("U", q, random_su2(&mut rng)));
    }
    if n > 1 {
        for start in [0, 1] {
            for q in (start..n - 1).step_by(2) {
                c.push(Gate::cnot(q, q + 1));
            }
        }
        for q in 0..n {
            c.push(Gate::one("U", q, random_su2(&mut rng)));
        }
    }
    c
}

/// Block-encoding of `A = V diag(σ1 | σ2) V†` where the first system qubit
/// selects the eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncoding {
    pub n: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub basis_seed: u64,
    /// `U` on `n + 1` qubits: qubit 0 is the encoding ancilla.
    pub circuit: Circuit,
    basis: DMatrix<C64>,
}

pub fn make_block_encoding(n: usize, sigma1: f64, sigma2: f64, basis_seed: u64) -> Result<BlockEncoding> {
    if n == 0 {
        return Err(Error::InvalidConfig("matrix size must be at least 2".into()));
    }
    check_sigmas(sigma1, sigma2)?;
    let v = basis_circuit(n, basis_seed);
    let shift = |q: usize| q + 1;
    let mut u = Circuit::new(n + 1);
    u.extend(v.gates().iter().map(|g| g.remap(&shift)));
    let g1 = sigma_gate(sigma1);
    u.push(Gate::one("Gσ1", 0, g1));
    u.push(Gate::controlled("Gσ2·Gσ1†", 1, 0, sigma_gate(sigma2) * g1.adjoint()));
    u.extend(v.gates().iter().rev().map(|g| g.dagger().remap(&shift)));
    Ok(BlockEncoding { n, sigma1, sigma2, basis_seed, circuit: u, basis: circuit_unitary(&v).adjoint() })
}

impl BlockEncoding {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `V f(Λ) V†` for a function of the eigenvalue.
    fn spectral(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let dim = self.dim();
        let d = DMatrix::from_fn(dim, dim, |i, j| {
            if i != j {
                C64::new(0.0, 0.0)
            } else if i < dim / 2 {
                C64::new(f(self.sigma1), 0.0)
            } else {
                C64::new(f(self.sigma2), 0.0)
            }
        });
        &self.basis * d * self.basis.adjoint()
    }

    /// The encoded matrix.
    pub fn matrix(&self) -> DMatrix<C64> {
        self.spectral(|s| s)
    }

    pub fn unitary(&self) -> DMatrix<C64> {
        circuit_unitary(&self.circuit)
    }

    /// `c·A⁻¹` for the instance's inversion polynomial.
    pub fn scaled_inverse(&self) -> Result<DMatrix<C64>> {
        let p = inversion_polynomial(self.sigma1, self.sigma2)?;
        Ok(self.spectral(|s| p.c / s))
    }
}

/// `(⟨1| ⊗ I) U (|1⟩ ⊗ I)` with the ancilla as the most significant qubit.
pub fn extract_block(u: &DMatrix<C64>) -> DMatrix<C64> {
    let half = u.nrows() / 2;
    u.view((half, half), (half, half)).into_owned()
}

pub const QSP_ANCILLA: usize = 0;
pub const BLOCK_ANCILLA: usize = 1;

/// QSVT circuit on `n + 2` qubits (QSP ancilla, block ancilla, system):
/// `H`, then per phase one `U`/`U†` call and a CNOT-conjugated `e^{iφσz}` on
/// the QSP ancilla, then `H`. Inputs are prepared separately.
pub fn qsvt_circuit(be: &BlockEncoding, phases: &PhaseSequence) -> Circuit {
    let n = be.n;
    let shift = |q: usize| q + 1;
    let u: Vec<Gate> = be.circuit.gates().iter().map(|g| g.remap(&shift)).collect();
    let u_dag: Vec<Gate> = u.iter().rev().map(Gate::dagger).collect();
    let mut c = Circuit::new(n + 2);
    c.push(Gate::h(QSP_ANCILLA));
    for (k, &phi) in phases.phases.iter().enumerate() {
        c.extend(if k % 2 == 0 { u.clone() } else { u_dag.clone() });
        c.push(Gate::cnot(BLOCK_ANCILLA, QSP_ANCILLA));
        c.push(Gate::one("e^{iφσz}", QSP_ANCILLA, gates::exp_i_z(phi)));
        c.push(Gate::cnot(BLOCK_ANCILLA, QSP_ANCILLA));
    }
    c.push(Gate::h(QSP_ANCILLA));
    c
}

/// Valid block of the QSVT unitary: QSP ancilla 0 and block ancilla 1 on
/// both sides.
pub fn qsvt_block(circuit: &Circuit) -> DMatrix<C64> {
    let u = circuit_unitary(circuit);
    let dim = u.nrows() / 4;
    u.view((dim, dim), (dim, dim)).into_owned()
}

/// Column `j` run: block ancilla and system prepared in `|1⟩|j⟩`, valid
/// outcomes post-selected (without renormalization) on QSP 0 / block 1.
pub fn column_circuit(qsvt: &Circuit, n: usize, j: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n + 2);
    c.push(Gate::x(BLOCK_ANCILLA));
    for bit in 0..n {
        if (j >> (n - 1 - bit)) & 1 == 1 {
            c.push(Gate::x(bit + 2));
        }
    }
    let mut c = c.compose(qsvt)?;
    c.set_postselect(QSP_ANCILLA, 0)?;
    c.set_postselect(BLOCK_ANCILLA, 1)?;
    Ok(c)
}

/// Default instance of size `2^n`: `σ1 = 1`, `σ2` and the basis seed fixed by
/// calibration against [`IDEAL_MAX`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub basis_seed: u64,
    pub phases: Vec<f64>,
    pub ideal_max_prob: f64,
}

/// `max_ij |(c A⁻¹)_ij|²` for the given parameters.
pub fn ideal_max_probability(n: usize, sigma1: f64, sigma2: f64, seed: u64) -> Result<f64> {
    let be = make_block_encoding(n, sigma1, sigma2, seed)?;
    Ok(be.scaled_inverse()?.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max))
}

const CAL_GRID: usize = 64;
const CAL_LO: f64 = 0.05;
const CAL_HI: f64 = 0.98;
const CAL_SEEDS: u64 = 32;

/// Finds `(σ2, seed)` with `σ1 = 1` whose ideal maximum equals `target`,
/// scanning `σ2` downward from near 1 and bisecting the first crossing.
pub fn calibrate(n: usize, target: f64) -> Result<(f64, u64)> {
    for seed in 1..=CAL_SEEDS {
        let f = |s2: f64| ideal_max_probability(n, 1.0, s2, seed).map(|v| v - target);
        let grid: Vec<f64> =
            (0..CAL_GRID).map(|k| CAL_HI - (CAL_HI - CAL_LO) * k as f64 / (CAL_GRID - 1) as f64).collect();
        let mut prev = (grid[0], f(grid[0])?);
        for &s in &grid[1..] {
            let cur = (s, f(s)?);
            if prev.1.signum() != cur.1.signum() {
                let (mut hi, mut lo) = (prev, cur);
                for _ in 0..80 {
                    let mid = 0.5 * (hi.0 + lo.0);
                    let fm = f(mid)?;
                    if fm.signum() == hi.1.signum() {
                        hi = (mid, fm);
                    } else {
                        lo = (mid, fm);
                    }
                }
                return Ok((0.5 * (hi.0 + lo.0), seed));
            }
            prev = cur;
        }
    }
    Err(Error::NoConvergence(format!("no instance of size {} reaches {target}", 1usize << n)))
}

/// Calibrated default instance for `size ∈ {2, 4, …, 64}`.
pub fn default_instance(size: usize) -> Result<Instance> {
    let n = SIZES
        .iter()
        .position(|&s| s == size)
        .ok_or_else(|| Error::InvalidConfig(format!("unsupported matrix size {size}")))?
        + 1;
    let (sigma2, seed) = calibrate(n, IDEAL_MAX[n - 1])?;
    instance(n, 1.0, sigma2, seed)
}

pub fn instance(n: usize, sigma1: f64, sigma2: f64, basis_seed: u64) -> Result<Instance> {
    let poly = inversion_polynomial(sigma1, sigma2)?;
    let phases = qsp::qsp_phases(&poly.coefficients())?;
    Ok(Instance {
        n,
        sigma1,
        sigma2,
        basis_seed,
        phases: phases.phases,
        ideal_max_prob: ideal_max_probability(n, sigma1, sigma2, basis_seed)?,
    })
}

impl Instance {
    pub fn size(&self) -> usize {
        1 << self.n
    }

    pub fn block_encoding(&self) -> Result<BlockEncoding> {
        make_block_encoding(self.n, self.sigma1, self.sigma2, self.basis_seed)
    }

    pub fn phase_sequence(&self) -> Result<PhaseSequence> {
        let poly = inversion_polynomial(self.sigma1, self.sigma2)?;
        Ok(PhaseSequence { degree: self.phases.len(), phases: self.phases.clone(), coefficients: poly.coefficients() })
    }

    /// Ideal valid-outcome probabilities: `ideal[j][i] = |(cA⁻¹)_ij|²`.
    pub fn ideal_columns(&self) -> Result<Vec<Vec<f64>>> {
        let inv = self.block_encoding()?.scaled_inverse()?;
        let dim = self.size();
        Ok((0..dim).map(|j| (0..dim).map(|i| inv[(i, j)].norm_sqr()).collect()).collect())
    }

    pub fn qsvt_circuit(&self) -> Result<Circuit> {
        Ok(qsvt_circuit(&self.block_encoding()?, &self.phase_sequence()?))
    }
}

/// Subnormalized valid-outcome distributions, one per input column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnHistograms {
    pub size: usize,
    pub shots: u64,
    pub columns: Vec<Vec<f64>>,
}

impl ColumnHistograms {
    pub fn validate(&self) -> Result<()> {
        if self.columns.len() != self.size || self.columns.iter().any(|c| c.len() != self.size) {
            return Err(Error::ResolutionMismatch(self.size, self.columns.len()));
        }
        for c in &self.columns {
            if c.iter().any(|&v| v < 0.0) || c.iter().sum::<f64>() > 1.0 + 1e-9 {
                return Err(Error::InvalidConfig("column histogram is not subnormalized".into()));
            }
        }
        Ok(())
    }
}

pub fn column_job_id(size: usize, j: usize) -> String {
    format!("matinv-s{size}-c{j:03}")
}

/// Valid-outcome fractions of one column measurement.
pub fn column_from_measurement(m: &Measurement, n: usize) -> Result<Vec<f64>> {
    let f = m.frequencies(n + 2)?;
    let valid = 1usize << n;
    Ok((0..1usize << n).map(|i| f[valid | i]).collect())
}

pub fn column_jobs(inst: &Instance, shots: u64) -> Result<Vec<Job>> {
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be positive".into()));
    }
    let qsvt = inst.qsvt_circuit()?;
    let size = inst.size();
    (0..size)
        .map(|j| Ok(Job::new(column_job_id(size, j), column_circuit(&qsvt, inst.n, j)?, shots)))
        .collect()
}

/// Assembles column histograms from measurements in column order.
pub fn columns_from(inst: &Instance, shots: u64, ms: &[Measurement]) -> Result<ColumnHistograms> {
    if ms.len() != inst.size() {
        return Err(Error::ResolutionMismatch(inst.size(), ms.len()));
    }
    let columns = ms.iter().map(|m| column_from_measurement(m, inst.n)).collect::<Result<_>>()?;
    Ok(ColumnHistograms { size: inst.size(), shots, columns })
}

pub fn run_columns(inst: &Instance, shots: u64, exec: &Executor) -> Result<ColumnHistograms> {
    let ms = exec.run(&column_jobs(inst, shots)?)?;
    columns_from(inst, shots, &ms)
}

/// `‖v − ṽ‖₁ / (‖v‖₁ + ‖ṽ‖₁)` with binomial errors on every entry of `ṽ`
/// propagated to first order.
pub fn matinv_score(hist: &ColumnHistograms, ideal: &[Vec<f64>]) -> Result<ScoreWithError> {
    hist.validate()?;
    if ideal.len() != hist.size {
        return Err(Error::ResolutionMismatch(hist.size, ideal.len()));
    }
    let v: Vec<f64> = ideal.iter().flatten().cloned().collect();
    let w: Vec<f64> = hist.columns.iter().flatten().cloned().collect();
    let s: f64 = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum();
    let t: f64 = v.iter().sum::<f64>() + w.iter().sum::<f64>();
    if t == 0.0 {
        return Ok(ScoreWithError::new(0.0, 0.0));
    }
    let score = s / t;
    let n = hist.shots as f64;
    let var: f64 = v
        .iter()
        .zip(&w)
        .map(|(a, b)| {
            let grad = ((b - a).signum() * t - s) / (t * t);
            grad * grad * b * (1.0 - b) / n
        })
        .sum();
    Ok(ScoreWithError::new(score, var.sqrt()))
}

/// Mean of the size 2, 4 and 8 scores with quadrature errors.
pub fn overall_score(scores: &[ScoreWithError; 3]) -> ScoreWithError {
    ScoreWithError::mean_quadrature(scores)
}

/// Darkness per pixel `[row = outcome][col = input]`, `0.9·p/ideal_max`
/// clamped to 1.
pub fn render_histogram(hist: &ColumnHistograms, ideal_max: f64) -> Vec<Vec<f64>> {
    (0..hist.size)
        .map(|i| {
            (0..hist.size)
                .map(|j| (DARKNESS_AT_IDEAL_MAX * hist.columns[j][i] / ideal_max).clamp(0.0, 1.0))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Backend;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn polynomial_example() {
        let p = inversion_polynomial(1.0, 0.5).unwrap();
        assert!((p.alpha - 5.0).abs() < 1e-12 && (p.beta + 4.0).abs() < 1e-12);
        assert!((p.c - 0.464_75).abs() < 1e-5);
        for s in [1.0, 0.5] {
            assert!((p.eval(s) * s / p.c - 1.0).abs() < 1e-12);
        }
        assert!(matches!(inversion_polynomial(0.5, 0.5), Err(Error::DegenerateSigmas(..))));
        let grid_max = (0..=10_000).map(|k| p.eval(k as f64 / 10_000.0).abs()).fold(0.0, f64::max);
        assert!(grid_max <= 1.0 - BOUND_MARGIN + 1e-12);
    }

    #[test]
    fn block_encoding_extracts_a() {
        for n in 1..=3 {
            let be = make_block_encoding(n, 0.9, 0.3, 7).unwrap();
            let u = be.unitary();
            let dim = u.nrows();
            assert!(max_abs(&(u.adjoint() * &u - DMatrix::identity(dim, dim))) < 1e-10);
            let a = extract_block(&u);
            assert!(max_abs(&(&a - be.matrix())) < 1e-10);
            let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
            sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
            assert!((sv[0] - 0.9).abs() < 1e-10 && (sv[sv.len() - 1] - 0.3).abs() < 1e-10);
            assert!(sv.iter().all(|s| (s - 0.9).abs() < 1e-10 || (s - 0.3).abs() < 1e-10));
        }
    }

    #[test]
    fn qsvt_identity_polynomial_returns_a() {
        let be = make_block_encoding(2, 0.8, 0.4, 3).unwrap();
        let seq = qsp::qsp_phases(&[0.0, 1.0]).unwrap();
        let c = qsvt_circuit(&be, &seq);
        assert!(max_abs(&(qsvt_block(&c) - be.matrix())) < 1e-10);
    }

    #[test]
    fn qsvt_inverts() {
        for n in 1..=3 {
            let be = make_block_encoding(n, 1.0, 0.45, 11).unwrap();
            let p = inversion_polynomial(1.0, 0.45).unwrap();
            let seq = qsp::qsp_phases(&p.coefficients()).unwrap();
            let c = qsvt_circuit(&be, &seq);
            assert_eq!(c.two_qubit_count() - 3 * be.circuit.two_qubit_count(), 6);
            assert!(max_abs(&(qsvt_block(&c) - be.scaled_inverse().unwrap())) < 1e-8, "n={n}");
        }
    }

    #[test]
    fn qsvt_applies_random_polynomials() {
        let be = make_block_encoding(2, 0.7, 0.2, 5).unwrap();
        for coef in [vec![0.0, 0.3, 0.0, 0.5, 0.0, -0.2], vec![0.0, -0.4, 0.0, 0.2, 0.0, 0.1, 0.0, 0.3]] {
            let seq = qsp::qsp_phases(&coef).unwrap();
            let c = qsvt_circuit(&be, &seq);
            let want = be.spectral(|s| qsp::eval_poly(&coef, s));
            assert!(max_abs(&(qsvt_block(&c) - want)) < 1e-8);
        }
    }

    #[test]
    fn calibration_hits_constants() {
        for (k, &target) in IDEAL_MAX.iter().enumerate().take(4) {
            let inst = default_instance(SIZES[k]).unwrap();
            assert!((inst.ideal_max_prob - target).abs() < 1e-3, "size {}", SIZES[k]);
        }
    }

    #[test]
    fn exact_columns_match_ideal() {
        let inst = default_instance(4).unwrap();
        let exec = Executor::new(Backend::Exact, 1);
        let hist = run_columns(&inst, 1000, &exec).unwrap();
        let ideal = inst.ideal_columns().unwrap();
        for (h, i) in hist.columns.iter().zip(&ideal) {
            for (a, b) in h.iter().zip(i) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        assert!(matinv_score(&hist, &ideal).unwrap().value < 1e-10);
    }

    #[test]
    fn score_limits() {
        let ideal = vec![vec![0.5, 0.1], vec![0.2, 0.3]];
        let zero = ColumnHistograms { size: 2, shots: 100, columns: vec![vec![0.0; 2]; 2] };
        assert!((matinv_score(&zero, &ideal).unwrap().value - 1.0).abs() < 1e-15);
        let same = ColumnHistograms { size: 2, shots: 100, columns: ideal.clone() };
        assert_eq!(matinv_score(&same, &ideal).unwrap().value, 0.0);
        let mut prev = 1.0;
        for k in 1..=10 {
            let t = k as f64 / 10.0;
            let cols = ideal.iter().map(|c| c.iter().map(|v| t * v).collect()).collect();
            let s = matinv_score(&ColumnHistograms { size: 2, shots: 100, columns: cols }, &ideal).unwrap().value;
            assert!(s <= prev + 1e-15);
            prev = s;
        }
    }

    #[test]
    fn render_scale() {
        let hist = ColumnHistograms { size: 2, shots: 1, columns: vec![vec![0.5, 0.0], vec![0.9, 0.1]] };
        let img = render_histogram(&hist, 0.5);
        assert!((img[0][0] - 0.9).abs() < 1e-15);
        assert_eq!(img[0][1], 1.0);
        assert_eq!(img[1][0], 0.0);
    }
}
