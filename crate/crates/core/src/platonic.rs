//! Platonic fractals from iterated weak Pauli measurements.
//!
//! The system qubit starts in `|+⟩` and is weakly measured `d` times, each
//! time through a fresh ancilla, in one of the three Pauli bases. The system
//! is finally measured in Y or Z (disjoint shot pools), so every one of the
//! `6^d` (basis sequence, outcome) labels yields an estimated `(y, z)` point.

use crate::analysis::{mean_std, ScoreWithError};
use crate::backend::{Executor, Job};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gates::{self, Mat2};
use crate::linedraw::{pauli_label, pauli_strings, Pauli};
use crate::sim::Measurement;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

pub const DEFAULT_STRENGTH: f64 = 0.75;
pub const DEFAULT_SHOTS: u64 = 131_072;
pub const MAX_DEFAULT_DEPTH: usize = 3;
/// Labels with fewer surviving shots in either final basis are flagged.
pub const LOW_STATISTICS: f64 = 16.0;

pub const SYSTEM: usize = 0;

/// Measurement strength `s ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakMeasSpec {
    pub strength: f64,
}

impl WeakMeasSpec {
    pub fn new(strength: f64) -> Result<Self> {
        if !(strength > 0.0 && strength <= 1.0) {
            return Err(Error::InvalidConfig(format!("strength {strength} outside (0, 1]")));
        }
        Ok(Self { strength })
    }

    /// `θ = arccos √((1+s)/2)`.
    pub fn theta(&self) -> f64 {
        ((1.0 + self.strength) / 2.0).sqrt().min(1.0).acos()
    }

    /// Contraction parameter `k = (1 − √(1−s²))/s`.
    pub fn k(&self) -> f64 {
        let s = self.strength;
        (1.0 - (1.0 - s * s).max(0.0).sqrt()) / s
    }
}

/// Weak Z measurement of `system` through `ancilla`.
///
/// The anti-controlled `e^{iθσx}` followed by the controlled
/// `e^{i(π/2−θ)σx}` is written as an unconditional `e^{iθσx}` and a
/// controlled `e^{i(π/2−2θ)σx}`.
pub fn weak_z_gates(spec: &WeakMeasSpec, system: usize, ancilla: usize) -> [Gate; 2] {
    let theta = spec.theta();
    [
        Gate::one("e^{iθσx}", ancilla, gates::exp_i_x(theta)),
        Gate::controlled("e^{i(π/2−2θ)σx}", system, ancilla, gates::exp_i_x(FRAC_PI_2 - 2.0 * theta)),
    ]
}

/// Two-qubit weak measurement block in basis `b`; the basis change is
/// applied to `system` before and undone after.
pub fn weak_circuit(spec: &WeakMeasSpec, basis: Pauli, system: usize, ancilla: usize, n_qubits: usize) -> Circuit {
    let rot = basis.rotation();
    let mut c = Circuit::new(n_qubits);
    if basis != Pauli::Z {
        c.push(Gate::one("B", system, rot));
    }
    c.extend(weak_z_gates(spec, system, ancilla));
    if basis != Pauli::Z {
        c.push(Gate::one("B†", system, rot.adjoint()));
    }
    c
}

/// `e⃗_b`.
pub fn axis(b: Pauli) -> [f64; 3] {
    match b {
        Pauli::X => [1.0, 0.0, 0.0],
        Pauli::Y => [0.0, 1.0, 0.0],
        Pauli::Z => [0.0, 0.0, 1.0],
    }
}

/// Bloch vector after a weak measurement in `basis` with outcome `o`.
pub fn bloch_update(r: [f64; 3], basis: Pauli, outcome: u8, strength: f64) -> [f64; 3] {
    let k = WeakMeasSpec { strength }.k();
    let sign = if outcome == 0 { 1.0 } else { -1.0 };
    let n = axis(basis).map(|v| sign * v);
    let nr: f64 = (0..3).map(|i| n[i] * r[i]).sum();
    let den = 1.0 + k * k + 2.0 * k * nr;
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = ((1.0 - k * k) * r[i] + 2.0 * k * (1.0 + k * nr) * n[i]) / den;
    }
    out
}

/// All points along a labelled trajectory, starting at `e⃗_x`.
pub fn expected_trajectory(bases: &[Pauli], outcomes: &[u8], strength: f64) -> Vec<[f64; 3]> {
    let mut pts = vec![[1.0, 0.0, 0.0]];
    for (&b, &o) in bases.iter().zip(outcomes) {
        let last = *pts.last().unwrap();
        pts.push(bloch_update(last, b, o, strength));
    }
    pts
}

fn is_identity(m: &Mat2) -> bool {
    gates::phase_distance(m, &Mat2::identity()) < 1e-12
}

/// Full circuit on `d + 1` qubits for one basis sequence and final basis.
/// Runs of single-qubit gates on the system qubit are merged.
pub fn platonic_circuit(spec: &WeakMeasSpec, bases: &[Pauli], final_basis: Pauli) -> Result<Circuit> {
    if final_basis == Pauli::X {
        return Err(Error::InvalidConfig("final basis must be Y or Z".into()));
    }
    let d = bases.len();
    let mut c = Circuit::new(d + 1);
    let mut pending = gates::h();
    let flush = |c: &mut Circuit, m: &mut Mat2| {
        if !is_identity(m) {
            c.push(Gate::one("U", SYSTEM, *m));
        }
        *m = Mat2::identity();
    };
    for (j, &b) in bases.iter().enumerate() {
        let rot = b.rotation();
        pending = rot * pending;
        let [pre, ctrl] = weak_z_gates(spec, SYSTEM, j + 1);
        c.push(pre);
        flush(&mut c, &mut pending);
        c.push(ctrl);
        pending = rot.adjoint();
    }
    pending = final_basis.rotation() * pending;
    flush(&mut c, &mut pending);
    Ok(c)
}

/// `"XZ:01"`: basis sequence and weak outcomes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrajectoryLabel {
    pub bases: Vec<Pauli>,
    pub outcomes: Vec<u8>,
}

impl TrajectoryLabel {
    /// Outcome pattern as the ancilla register value (first ancilla is MSB).
    pub fn pattern(&self) -> usize {
        self.outcomes.iter().fold(0, |acc, &o| (acc << 1) | o as usize)
    }

    pub fn from_pattern(bases: Vec<Pauli>, pattern: usize) -> Self {
        let d = bases.len();
        let outcomes = (0..d).map(|j| ((pattern >> (d - 1 - j)) & 1) as u8).collect();
        Self { bases, outcomes }
    }
}

impl std::fmt::Display for TrajectoryLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let bits: String = self.outcomes.iter().map(|o| if *o == 0 { '0' } else { '1' }).collect();
        write!(f, "{}:{}", pauli_label(&self.bases), bits)
    }
}

/// All `6^d` labels, basis sequences in lexicographic order.
pub fn all_labels(d: usize) -> Vec<TrajectoryLabel> {
    pauli_strings(d)
        .into_iter()
        .flat_map(|b| (0..1usize << d).map(move |p| TrajectoryLabel::from_pattern(b.clone(), p)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatonicPoint {
    pub label: String,
    /// Every expected Bloch vector along the trajectory.
    pub expected: Vec<[f64; 3]>,
    /// Estimated `(y, z)` of the endpoint.
    pub measured: [f64; 2],
    /// Label frequency in the Z family.
    pub probability: f64,
    pub low_statistics: bool,
}

impl PlatonicPoint {
    pub fn expected_yz(&self) -> [f64; 2] {
        let e = self.expected.last().unwrap();
        [e[1], e[2]]
    }

    pub fn distance(&self) -> f64 {
        let e = self.expected_yz();
        ((self.measured[0] - e[0]).powi(2) + (self.measured[1] - e[1]).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatonicRun {
    pub depth: usize,
    pub strength: f64,
    pub shots: u64,
    pub points: Vec<PlatonicPoint>,
    pub score: ScoreWithError,
}

pub fn job_id(d: usize, bases: &[Pauli], final_basis: Pauli) -> String {
    format!("platonic-d{d}-{}-{}", pauli_label(bases), final_basis.as_char())
}

/// `⟨σ⟩ = 1 − 2P(1)` of the system per ancilla pattern, with the estimated
/// pattern probability and the number of shots behind it.
fn conditional_expectations(m: &Measurement, d: usize) -> Result<Vec<(f64, f64, f64)>> {
    let f = m.frequencies(d + 1)?;
    let shots = m.shots() as f64;
    let top = 1usize << d;
    Ok((0..top)
        .map(|p| {
            let (p0, p1) = (f[p], f[top | p]);
            let total = p0 + p1;
            let e = if total > 0.0 { (p0 - p1) / total } else { 0.0 };
            (e, total, total * shots)
        })
        .collect())
}

/// Jobs for all `3^d` basis sequences, each in final bases Y then Z.
pub fn platonic_jobs(d: usize, strength: f64, shots: u64) -> Result<Vec<Job>> {
    if d == 0 || shots == 0 {
        return Err(Error::InvalidConfig("depth and shots must be positive".into()));
    }
    let spec = WeakMeasSpec::new(strength)?;
    let mut jobs = Vec::new();
    for b in pauli_strings(d) {
        for fb in [Pauli::Y, Pauli::Z] {
            jobs.push(Job::new(job_id(d, &b, fb), platonic_circuit(&spec, &b, fb)?, shots));
        }
    }
    Ok(jobs)
}

/// Estimates every label from measurements ordered as [`platonic_jobs`].
pub fn platonic_from(d: usize, strength: f64, shots: u64, ms: &[Measurement]) -> Result<PlatonicRun> {
    let seqs = pauli_strings(d);
    if ms.len() != 2 * seqs.len() {
        return Err(Error::ResolutionMismatch(2 * seqs.len(), ms.len()));
    }
    let mut points = Vec::with_capacity(seqs.len() << d);
    for (b, pair) in seqs.iter().zip(ms.chunks(2)) {
        let ys = conditional_expectations(&pair[0], d)?;
        let zs = conditional_expectations(&pair[1], d)?;
        for p in 0..1usize << d {
            let label = TrajectoryLabel::from_pattern(b.clone(), p);
            let low = !pair[0].is_exact() && (ys[p].2 < LOW_STATISTICS || zs[p].2 < LOW_STATISTICS);
            points.push(PlatonicPoint {
                label: label.to_string(),
                expected: expected_trajectory(&label.bases, &label.outcomes, strength),
                measured: [ys[p].0, zs[p].0],
                probability: zs[p].1,
                low_statistics: low,
            });
        }
    }
    let score = platonic_score(&points)?;
    Ok(PlatonicRun { depth: d, strength, shots, points, score })
}

/// Runs all `3^d` basis sequences in both final bases with `shots` each.
pub fn run_platonic(d: usize, strength: f64, shots: u64, exec: &Executor) -> Result<PlatonicRun> {
    let ms = exec.run(&platonic_jobs(d, strength, shots)?)?;
    platonic_from(d, strength, shots, &ms)
}

/// Mean `(y, z)`-plane distance between measured and expected endpoints;
/// the error is the sample standard deviation of the distances.
pub fn platonic_score(points: &[PlatonicPoint]) -> Result<ScoreWithError> {
    if points.is_empty() {
        return Err(Error::IncompleteBatch("no trajectory points".into()));
    }
    let dist: Vec<f64> = points.iter().map(PlatonicPoint::distance).collect();
    let (mean, std) = mean_std(&dist);
    Ok(ScoreWithError::new(mean, std))
}

/// `(s₁+s₂+s₃)/3` with errors in quadrature.
pub fn overall_score(scores: &[ScoreWithError; 3]) -> ScoreWithError {
    ScoreWithError::mean_quadrature(scores)
}

/// Line segments `parent → child` in the `(y, z)` plane over all expected
/// trajectories of depth `d`, for the L-system plot.
pub fn expected_segments(d: usize, strength: f64) -> Vec<[[f64; 2]; 2]> {
    let mut out = Vec::new();
    let mut frontier = vec![[1.0, 0.0, 0.0]];
    for _ in 0..d {
        let mut next = Vec::with_capacity(frontier.len() * 6);
        for r in &frontier {
            for b in [Pauli::X, Pauli::Y, Pauli::Z] {
                for o in [0, 1] {
                    let c = bloch_update(*r, b, o, strength);
                    out.push([[r[1], r[2]], [c[1], c[2]]]);
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Backend;
    use crate::sim::{circuit_unitary, StateVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn bloch(s: &StateVector, q: usize) -> [f64; 3] {
        let [a, b] = s.qubit_state(q);
        let x = 2.0 * (a.conj() * b).re;
        let y = 2.0 * (a.conj() * b).im;
        [x, y, a.norm_sqr() - b.norm_sqr()]
    }

    #[test]
    fn theta_and_k() {
        let s = WeakMeasSpec::new(0.75).unwrap();
        assert!((s.theta() - 0.875f64.sqrt().acos()).abs() < 1e-15);
        assert!((s.theta() - 0.36136).abs() < 1e-5);
        assert_eq!(WeakMeasSpec::new(1.0).unwrap().theta(), 0.0);
        assert!(WeakMeasSpec::new(0.0).is_err());
    }

    #[test]
    fn block_matches_reference_matrix() {
        // Ancilla is qubit 0 (most significant) in the reference ordering.
        for s in [0.2, 0.75, 1.0] {
            let spec = WeakMeasSpec::new(s).unwrap();
            let t = spec.theta();
            let c = weak_circuit(&spec, Pauli::Z, 1, 0, 2);
            let u = circuit_unitary(&c);
            let (cs, sn) = (gates::c(t.cos(), 0.0), gates::c(t.sin(), 0.0));
            let (ics, isn) = (gates::c(0.0, t.cos()), gates::c(0.0, t.sin()));
            let z = gates::c(0.0, 0.0);
            let want = [[cs, z, isn, z], [z, sn, z, ics], [isn, z, cs, z], [z, ics, z, sn]];
            for i in 0..4 {
                for j in 0..4 {
                    assert!((u[(i, j)] - want[i][j]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn update_examples() {
        let r = bloch_update([1.0, 0.0, 0.0], Pauli::Z, 0, 0.75);
        assert!((r[0] - (1.0 - 0.75f64 * 0.75).sqrt()).abs() < 1e-12);
        assert!(r[1].abs() < 1e-15 && (r[2] - 0.75).abs() < 1e-12);
        let n = [0.0, -1.0, 0.0];
        let f = bloch_update(n, Pauli::Y, 1, 0.4);
        assert!((0..3).all(|i| (f[i] - n[i]).abs() < 1e-12));
        let p = bloch_update([0.3, 0.4, (0.75f64).sqrt()], Pauli::X, 1, 1.0);
        assert!((p[0] + 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
        assert_eq!(expected_trajectory(&[], &[], 0.5), vec![[1.0, 0.0, 0.0]]);
    }

    #[test]
    fn oracle_equivalence() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let s: f64 = rng.gen_range(0.05..1.0);
            let b = [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)];
            let o: u8 = rng.gen_range(0..2);
            let spec = WeakMeasSpec::new(s).unwrap();
            let prep = gates::rz(rng.gen_range(0.0..6.3)) * gates::ry(rng.gen_range(0.0..3.1));
            let mut st = StateVector::zero(2);
            st.apply(&Gate::one("P", 0, prep));
            let r0 = bloch(&st, 0);
            st.apply_all(weak_circuit(&spec, b, 0, 1, 2).gates());
            let (post, p) = st.postselect(1, o).unwrap();
            if p < 1e-12 {
                continue;
            }
            let got = bloch(&post, 0);
            let want = bloch_update(r0, b, o, s);
            for i in 0..3 {
                assert!((got[i] - want[i]).abs() < 1e-10, "s={s} b={b:?} o={o}");
            }
        }
    }

    #[test]
    fn resource_bounds() {
        let spec = WeakMeasSpec::new(0.75).unwrap();
        for d in 1..=4 {
            for b in pauli_strings(d) {
                for fb in [Pauli::Y, Pauli::Z] {
                    let c = platonic_circuit(&spec, &b, fb).unwrap();
                    assert!(c.gate_count(true) <= 2 + 8 * d);
                    assert!(c.depth() <= 2 + 5 * d);
                }
            }
        }
    }

    #[test]
    fn exact_run_matches_oracle() {
        let exec = Executor::new(Backend::Exact, 0);
        for d in 1..=3 {
            let run = run_platonic(d, 0.75, 1000, &exec).unwrap();
            assert_eq!(run.points.len(), 6usize.pow(d as u32));
            assert!(run.points.iter().all(|p| p.distance() < 1e-9));
            assert!(run.score.value < 1e-9);
            for chunk in run.points.chunks(1 << d) {
                let total: f64 = chunk.iter().map(|p| p.probability).sum();
                assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn projective_limit() {
        let exec = Executor::new(Backend::Exact, 0);
        let run = run_platonic(1, 1.0, 100, &exec).unwrap();
        let p = run.points.iter().find(|p| p.label == "Z:0").unwrap();
        assert!(p.measured[0].abs() < 1e-12 && (p.measured[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn score_examples() {
        let mk = |m: [f64; 2]| PlatonicPoint {
            label: String::new(),
            expected: vec![[0.0, 0.2, 0.3]],
            measured: m,
            probability: 0.0,
            low_statistics: false,
        };
        let same = platonic_score(&[mk([0.2, 0.3]), mk([0.2, 0.3])]).unwrap();
        assert_eq!((same.value, same.stderr), (0.0, 0.0));
        let off = platonic_score(&[mk([0.3, 0.3]), mk([0.3, 0.3])]).unwrap();
        assert!((off.value - 0.1).abs() < 1e-12 && off.stderr < 1e-12);
    }

    #[test]
    fn segments_count() {
        assert_eq!(expected_segments(2, 0.75).len(), 6 + 36);
    }

    proptest! {
        #[test]
        fn trajectories_stay_on_sphere(s in 0.01f64..1.0, seq in proptest::collection::vec((0usize..3, 0u8..2), 0..8)) {
            let bases: Vec<Pauli> = seq.iter().map(|(b, _)| [Pauli::X, Pauli::Y, Pauli::Z][*b]).collect();
            let outs: Vec<u8> = seq.iter().map(|(_, o)| *o).collect();
            for r in expected_trajectory(&bases, &outs, s) {
                let n: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!((n - 1.0).abs() < 1e-9);
            }
        }
    }
}
