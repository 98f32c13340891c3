//! Line Drawing benchmark.
//!
//! A closed curve of `2^n` points is stored through its Fourier coefficients
//! as the amplitudes of an `n`-qubit state. A QFT turns them back into the
//! points, which are then recovered by randomized Pauli tomography under a
//! purity assumption and compared to the original curve.

use crate::analysis::{mean_std, ScoreWithError};
use crate::backend::{Executor, Job};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gates::{self, Mat2, C64};
use crate::sim::Measurement;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;

pub const DEFAULT_BATCHES: usize = 25;
pub const DEFAULT_SHOTS: u64 = 4096;

const KITE: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 0.4), (-0.55, 0.0), (0.0, -1.0)];

/// Closed polygon through `2^n` points of the complex plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub points: Vec<C64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveJson {
    pub points: Vec<[f64; 2]>,
}

impl Curve {
    pub fn new(name: impl Into<String>, points: Vec<C64>) -> Result<Self> {
        if points.len() < 4 || !points.len().is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "curve needs a power-of-two number of points (at least 4), got {}",
                points.len()
            )));
        }
        if points.iter().all(|z| z.norm() == 0.0) {
            return Err(Error::NormViolation(0.0));
        }
        Ok(Self { name: name.into(), points })
    }

    pub fn kite() -> Self {
        let pts = KITE.iter().map(|&(x, y)| C64::new(x, y)).collect();
        Self { name: "kite".into(), points: pts }
    }

    /// `x = 16 sin³t`, `y = 13 cos t − 5 cos 2t − 2 cos 3t − cos 4t` at
    /// `t = 2πk/count`.
    pub fn heart(count: usize) -> Result<Self> {
        let pts = (0..count)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count as f64;
                let x = 16.0 * t.sin().powi(3);
                let y = 13.0 * t.cos() - 5.0 * (2.0 * t).cos() - 2.0 * (3.0 * t).cos() - (4.0 * t).cos();
                C64::new(x, y)
            })
            .collect();
        Self::new(format!("heart{count}"), pts)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "kite" => Ok(Self::kite()),
            "heart8" => Self::heart(8),
            "heart16" => Self::heart(16),
            _ => Err(Error::InvalidConfig(format!("unknown curve '{name}'"))),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json: CurveJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
        Self::new(name, json.points.iter().map(|p| C64::new(p[0], p[1])).collect())
    }

    pub fn to_json(&self) -> CurveJson {
        CurveJson { points: self.points.iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn n_qubits(&self) -> usize {
        self.points.len().trailing_zeros() as usize
    }

    /// Points scaled to unit ℓ² norm.
    pub fn normalized(&self) -> Vec<C64> {
        normalize(&self.points)
    }
}

/// Kite, 8-point heart and 16-point heart.
pub fn reference_curves() -> Vec<Curve> {
    vec![Curve::kite(), Curve::heart(8).unwrap(), Curve::heart(16).unwrap()]
}

fn normalize(v: &[C64]) -> Vec<C64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|z| z / n).collect()
}

/// Amplitudes `c_j` with `z_t ∝ Σ_j c_j e^{2πi jt/N}`, normalized.
pub fn fourier_coefficients(points: &[C64]) -> Result<Vec<C64>> {
    let n = points.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidConfig(format!("{n} points is not a power of two")));
    }
    let c: Vec<C64> = (0..n)
        .map(|j| {
            points
                .iter()
                .enumerate()
                .map(|(t, z)| z * C64::from_polar(1.0, -2.0 * PI * (j * t) as f64 / n as f64))
                .sum()
        })
        .collect();
    Ok(normalize(&c))
}

/// Unitary DFT matrix `F_{ty} = e^{2πi ty/N}/√N`.
pub fn dft_matrix(n_qubits: usize) -> DMatrix<C64> {
    let dim = 1usize << n_qubits;
    let s = 1.0 / (dim as f64).sqrt();
    DMatrix::from_fn(dim, dim, |t, y| C64::from_polar(s, 2.0 * PI * (t * y) as f64 / dim as f64))
}

pub fn bit_reverse(i: usize, n_qubits: usize) -> usize {
    if n_qubits == 0 {
        return 0;
    }
    i.reverse_bits() >> (usize::BITS as usize - n_qubits)
}

// ---------------------------------------------------------------------------
// State preparation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Elem {
    U(Mat2),
    Cz(usize),
}

fn diag(a: C64, b: C64) -> Mat2 {
    Mat2::new(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), b)
}

/// Splits `diag(a, b)` (control on the left) into
/// `diag(r†, r) · (I ⊗ u) · diag(D, D†) · (I ⊗ v)` with `D = diag(e^{iπ/4}, e^{−iπ/4})`.
fn demultiplex(a: &Mat2, b: &Mat2) -> ([C64; 2], Mat2, Mat2) {
    let x = a * b.adjoint();
    let det = x.determinant();
    let phi = det.arg();
    let th = (x[(0, 0)] / det.sqrt()).arg();
    let half = |t: f64| C64::from_polar(1.0, t / 2.0);
    let r = [half(PI / 2.0 - phi / 2.0 - th), half(PI / 2.0 - phi / 2.0 + th + PI)];
    let rm = diag(r[0], r[1]);
    let m = rm * x * rm;
    // Eigenvector of m for +i; the −i one is its orthogonal complement.
    let i = C64::new(0.0, 1.0);
    let c1 = [m[(0, 1)], i - m[(0, 0)]];
    let c2 = [i - m[(1, 1)], m[(1, 0)]];
    let norm = |v: &[C64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let e = if norm(&c1) >= norm(&c2) { c1 } else { c2 };
    let n = norm(&e);
    let (e0, e1) = (e[0] / n, e[1] / n);
    let u = Mat2::new(e0, -e1.conj(), e1, e0.conj());
    let d = diag(C64::from_polar(1.0, FRAC_PI_4), C64::from_polar(1.0, -FRAC_PI_4));
    let v = d * u.adjoint() * rm.adjoint() * b;
    (r, u, v)
}

/// Multiplexor `Σ_p |p⟩⟨p| ⊗ U_p` (first control most significant) as
/// `Δ · pattern`, where the pattern alternates single-qubit gates on the
/// target with CZs and `Δ` is diagonal over (controls, target).
fn multiplexor(us: &[Mat2], controls: &[usize]) -> (Vec<Elem>, Vec<C64>) {
    if controls.is_empty() {
        return (vec![Elem::U(us[0])], vec![C64::new(1.0, 0.0); 2]);
    }
    let half = us.len() / 2;
    let mut rs = Vec::with_capacity(half);
    let mut uu = Vec::with_capacity(half);
    let mut vv = Vec::with_capacity(half);
    for q in 0..half {
        let (r, u, v) = demultiplex(&us[q], &us[half + q]);
        rs.push(r);
        uu.push(u);
        vv.push(v);
    }
    let (gv, dv) = multiplexor(&vv, &controls[1..]);
    // Push the S† of the CZ core and v's diagonal into u.
    let u2: Vec<Mat2> = uu.iter().enumerate().map(|(q, u)| u * gates::sdg() * diag(dv[2 * q], dv[2 * q + 1])).collect();
    let (gu, du) = multiplexor(&u2, &controls[1..]);
    let mut elems = gv;
    elems.push(Elem::Cz(controls[0]));
    elems.extend(gu);
    let core = [C64::from_polar(1.0, FRAC_PI_4), C64::from_polar(1.0, -FRAC_PI_4)];
    let mut d = vec![C64::new(0.0, 0.0); 4 * half];
    for c1 in 0..2 {
        for q in 0..half {
            for t in 0..2 {
                let rr = if c1 == 0 { rs[q][t].conj() } else { rs[q][t] };
                d[(c1 * half + q) * 2 + t] = rr * core[c1] * du[2 * q + t];
            }
        }
    }
    (elems, d)
}

/// Preparation circuit for `amps` with `2^n − n − 1` CNOTs and `2^n − 1`
/// single-qubit gates, built by disentangling qubits from the last one
/// back and reversing.
pub fn state_prep_circuit(amps: &[C64]) -> Result<Circuit> {
    let dim = amps.len();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidConfig(format!("{dim} amplitudes is not a power of two ≥ 2")));
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NormViolation(norm));
    }
    let n = dim.trailing_zeros() as usize;
    let mut a = amps.to_vec();
    let mut blocks = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let pairs = a.len() / 2;
        let mut us = Vec::with_capacity(pairs);
        let mut norms = Vec::with_capacity(pairs);
        for p in 0..pairs {
            let (w0, w1) = (a[2 * p], a[2 * p + 1]);
            let nw = (w0.norm_sqr() + w1.norm_sqr()).sqrt();
            norms.push(nw);
            us.push(if nw < 1e-300 {
                Mat2::identity()
            } else {
                Mat2::new(w0.conj(), w1.conj(), -w1, w0) / C64::new(nw, 0.0)
            });
        }
        let controls: Vec<usize> = (0..k).collect();
        let (elems, d) = multiplexor(&us, &controls);
        a = (0..pairs).map(|p| d[2 * p].conj() * norms[p]).collect();
        blocks.push((k, elems));
    }
    let mut circuit = Circuit::new(n);
    for (target, elems) in blocks.into_iter().rev() {
        // Reverse and invert the disentangler, then write each CZ as H·CNOT·H
        // with the Hadamards merged into the neighbouring gates.
        let elems: Vec<Elem> = elems
            .into_iter()
            .rev()
            .map(|e| match e {
                Elem::U(m) => Elem::U(m.adjoint()),
                cz => cz,
            })
            .collect();
        let last = elems.len() - 1;
        for (i, e) in elems.into_iter().enumerate() {
            match e {
                Elem::U(m) => {
                    let mut g = m;
                    if i > 0 {
                        g *= gates::h();
                    }
                    if i < last {
                        g = gates::h() * g;
                    }
                    circuit.push(Gate::one("U", target, g));
                }
                Elem::Cz(c) => {
                    circuit.push(Gate::cnot(c, target));
                }
            }
        }
    }
    Ok(circuit)
}

/// QFT without the final swaps: output qubit order is reversed.
pub fn qft_circuit(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for j in 0..n {
        c.push(Gate::h(j));
        for k in 2..=(n - j) {
            c.push(Gate::controlled(format!("R{k}"), j + k - 1, j, gates::qft_phase(k as u32)));
        }
    }
    c
}

// ---------------------------------------------------------------------------
// Tomography
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Result<Self> {
        match ch {
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::InvalidConfig(format!("'{ch}' is not a Pauli label"))),
        }
    }

    pub fn as_char(&self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Rotation taking the eigenbasis to the computational basis.
    pub fn rotation(&self) -> Mat2 {
        match self {
            Pauli::X => gates::h(),
            Pauli::Y => gates::h() * gates::sdg(),
            Pauli::Z => gates::identity(),
        }
    }

    /// `3|e⟩⟨e| − I` for the eigenstate reported by outcome `bit`.
    fn estimator(&self, bit: usize) -> Mat2 {
        let back = self.rotation().adjoint();
        let e = [back[(0, bit)], back[(1, bit)]];
        let mut m = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = e[i] * e[j].conj() * 3.0;
            }
        }
        m - Mat2::identity()
    }
}

pub fn pauli_label(s: &[Pauli]) -> String {
    s.iter().map(Pauli::as_char).collect()
}

pub fn parse_pauli_string(s: &str) -> Result<Vec<Pauli>> {
    s.chars().map(Pauli::from_char).collect()
}

/// All `3^n` strings in lexicographic order.
pub fn pauli_strings(n: usize) -> Vec<Vec<Pauli>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                [Pauli::X, Pauli::Y, Pauli::Z].into_iter().map(move |p| {
                    let mut t = s.clone();
                    t.push(p);
                    t
                })
            })
            .collect();
    }
    out
}

/// Basis-change suffix for measuring `string` (H for X, S† then H for Y).
pub fn pauli_measure_gates(string: &[Pauli]) -> Vec<Gate> {
    let mut out = Vec::new();
    for (q, p) in string.iter().enumerate() {
        match p {
            Pauli::X => out.push(Gate::h(q)),
            Pauli::Y => {
                out.push(Gate::sdg(q));
                out.push(Gate::h(q));
            }
            Pauli::Z => {}
        }
    }
    out
}

/// Outcomes of every Pauli string on one state preparation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyBatch {
    pub n_qubits: usize,
    pub shots: u64,
    pub histograms: BTreeMap<String, Measurement>,
}

impl TomographyBatch {
    pub fn validate(&self) -> Result<()> {
        for s in pauli_strings(self.n_qubits) {
            let label = pauli_label(&s);
            let m = self
                .histograms
                .get(&label)
                .ok_or_else(|| Error::IncompleteBatch(format!("no outcomes for {label}")))?;
            if m.shots() != self.shots {
                return Err(Error::IncompleteBatch(format!("{label} has {} shots, expected {}", m.shots(), self.shots)));
            }
        }
        if self.histograms.len() != 3usize.pow(self.n_qubits as u32) {
            return Err(Error::IncompleteBatch("unexpected Pauli strings present".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub l: DMatrix<C64>,
    pub vector: Vec<C64>,
    pub eigenvalue: f64,
}

fn kron_all(factors: &[Mat2]) -> DMatrix<C64> {
    let mut acc = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for f in factors {
        let fm = DMatrix::from_fn(2, 2, |i, j| f[(i, j)]);
        acc = acc.kronecker(&fm);
    }
    acc
}

/// `L = (1/N) Σ ⊗_j (3|ψ_j⟩⟨ψ_j| − I)` in the circuit's qubit order.
pub fn estimator_matrix(batch: &TomographyBatch) -> Result<DMatrix<C64>> {
    batch.validate()?;
    let n = batch.n_qubits;
    let dim = 1usize << n;
    let strings = pauli_strings(n);
    let weight = 1.0 / strings.len() as f64;
    let mut l = DMatrix::zeros(dim, dim);
    for s in &strings {
        let freqs = batch.histograms[&pauli_label(s)].frequencies(n)?;
        let total: f64 = freqs.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyHistogram);
        }
        for (outcome, f) in freqs.iter().enumerate() {
            if *f == 0.0 {
                continue;
            }
            let factors: Vec<Mat2> =
                s.iter().enumerate().map(|(q, p)| p.estimator((outcome >> (n - 1 - q)) & 1)).collect();
            l += kron_all(&factors) * C64::new(weight * f / total, 0.0);
        }
    }
    Ok(l)
}

/// Top eigenpair of a Hermitian matrix; among (near-)degenerate top
/// eigenvectors the one with largest `|v_0|` wins. The phase is fixed so
/// the largest-magnitude component is real and positive.
pub fn top_eigenpair(l: &DMatrix<C64>) -> (f64, Vec<C64>) {
    let herm = (l + l.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(f64, Vec<C64>)> = None;
    for (k, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev < max - 1e-12 {
            continue;
        }
        let v: Vec<C64> = eig.eigenvectors.column(k).iter().cloned().collect();
        if best.as_ref().is_none_or(|(_, b)| v[0].norm() > b[0].norm() + 1e-12) {
            best = Some((ev, v));
        }
    }
    let (ev, mut v) = best.expect("matrix has eigenvalues");
    let pivot = v.iter().cloned().fold(C64::new(0.0, 0.0), |a, b| if b.norm() > a.norm() + 1e-12 { b } else { a });
    let phase = pivot.conj() / pivot.norm();
    for a in &mut v {
        *a *= phase;
    }
    (ev, v)
}

/// Pure-state estimate with the qubit order reversed back to point order.
pub fn estimate_state(batch: &TomographyBatch) -> Result<DensityEstimate> {
    let l = estimator_matrix(batch)?;
    let (ev, v) = top_eigenpair(&l);
    let n = batch.n_qubits;
    let vector = (0..v.len()).map(|t| v[bit_reverse(t, n)]).collect();
    Ok(DensityEstimate { l, vector, eigenvalue: ev })
}

/// `(1 − √p) + √p · min_φ ‖ψ − e^{iφ}ψ̃‖`; `p` is clamped to `[0, 1]`.
/// The optimal phase is `arg⟨ψ̃|ψ⟩`, which gives `√(2 − 2|⟨ψ|ψ̃⟩|)` for
/// unit vectors; the distance is evaluated on the rotated vector to avoid
/// cancellation near overlap 1. Also returns `ψ̃` rotated onto `ψ`.
pub fn align_and_score(target: &[C64], estimate: &[C64], p: f64) -> (f64, Vec<C64>) {
    let inner: C64 = target.iter().zip(estimate).map(|(a, b)| a.conj() * b).sum();
    let phase = if inner.norm() > 0.0 { inner.conj() / inner.norm() } else { C64::new(1.0, 0.0) };
    let aligned: Vec<C64> = estimate.iter().map(|z| z * phase).collect();
    let dist = target.iter().zip(&aligned).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let p = p.clamp(0.0, 1.0);
    ((1.0 - p.sqrt()) + p.sqrt() * dist, aligned)
}

// ---------------------------------------------------------------------------
// Benchmark run
// ---------------------------------------------------------------------------

/// Preparation + QFT circuit for `curve`, without measurement suffix.
pub fn drawing_circuit(curve: &Curve) -> Result<Circuit> {
    let n = curve.n_qubits();
    let prep = state_prep_circuit(&fourier_coefficients(&curve.points)?)?;
    prep.compose(&qft_circuit(n))
}

pub fn tomography_circuits(curve: &Curve) -> Result<Vec<(String, Circuit)>> {
    let base = drawing_circuit(curve)?;
    pauli_strings(curve.n_qubits())
        .into_iter()
        .map(|s| {
            let mut c = base.clone();
            for g in pauli_measure_gates(&s) {
                c.push_basis_rotation(g)?;
            }
            Ok((pauli_label(&s), c))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub score: f64,
    pub eigenvalue: f64,
    /// Estimated points rotated onto the target, unit norm.
    pub aligned: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRun {
    pub curve: String,
    pub shots: u64,
    pub target: Vec<[f64; 2]>,
    pub batches: Vec<BatchResult>,
    pub score: ScoreWithError,
}

pub fn job_id(curve: &str, batch: usize, pauli: &str) -> String {
    format!("line-{curve}-b{batch:02}-{pauli}")
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Scores one tomography batch against `curve`.
pub fn score_batch(curve: &Curve, batch: &TomographyBatch) -> Result<BatchResult> {
    let est = estimate_state(batch)?;
    let (score, aligned) = align_and_score(&curve.normalized(), &est.vector, est.eigenvalue);
    Ok(BatchResult { score, eigenvalue: est.eigenvalue, aligned: pairs(&aligned) })
}

/// Runs `batches` independent tomography passes with `shots` per Pauli
/// string; the score is the batch mean with the standard error of the mean.
pub fn run_linedraw(curve: &Curve, batches: usize, shots: u64, exec: &Executor) -> Result<LineRun> {
    if batches == 0 || shots == 0 {
        return Err(Error::InvalidConfig("batches and shots must be positive".into()));
    }
    let circuits = tomography_circuits(curve)?;
    let mut jobs = Vec::with_capacity(batches * circuits.len());
    for b in 0..batches {
        for (label, c) in &circuits {
            jobs.push(Job::new(job_id(&curve.name, b, label), c.clone(), shots));
        }
    }
    let ms = exec.run(&jobs)?;
    let n = curve.n_qubits();
    let mut results = Vec::with_capacity(batches);
    for (b, chunk) in ms.chunks(circuits.len()).enumerate() {
        let histograms = circuits.iter().map(|(l, _)| l.clone()).zip(chunk.iter().cloned()).collect();
        let batch = TomographyBatch { n_qubits: n, shots, histograms };
        results.push(score_batch(curve, &batch).map_err(|e| match e {
            Error::IncompleteBatch(m) => Error::IncompleteBatch(format!("batch {b}: {m}")),
            e => e,
        })?);
    }
    let scores: Vec<f64> = results.iter().map(|r| r.score).collect();
    let (mean, std) = mean_std(&scores);
    Ok(LineRun {
        curve: curve.name.clone(),
        shots,
        target: pairs(&curve.normalized()),
        batches: results,
        score: ScoreWithError::new(mean, std / (batches as f64).sqrt()),
    })
}

/// Mean of the 4- and 8-point scores, errors in quadrature.
pub fn overall_score(four: &ScoreWithError, eight: &ScoreWithError) -> ScoreWithError {
    ScoreWithError::mean_quadrature(&[*four, *eight])
}

/// State vector after `circuit` for plotting/debugging in point order.
pub fn ideal_points(curve: &Curve) -> Result<Vec<C64>> {
    let s = crate::sim::simulate(&drawing_circuit(curve)?)?;
    let n = curve.n_qubits();
    Ok((0..s.amplitudes().len()).map(|t| s.amplitudes()[bit_reverse(t, n)]).collect())
}
