//! Bell test between arbitrary qubit pairs of a device.
//!
//! A singlet is spread along a routed path by a CNOT ladder, both endpoints
//! are rotated about Z and measured in the X basis, and three angle settings
//! combine into `C_Bell = C(0,2π/3) − C(0,π/3) − C(π/3,2π/3)`, which is at
//! most 1 without entanglement and 3/2 for a perfect singlet.

use crate::analysis::ScoreWithError;
use crate::backend::{Executor, Job};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gates;
use crate::sim::Measurement;
use crate::topology::Topology;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const DEFAULT_SHOTS: u64 = 8192;

/// The three `(θ_A, θ_B)` settings, in the order used throughout.
pub const SETTINGS: [(f64, f64); 3] = [(0.0, PI / 3.0), (0.0, 2.0 * PI / 3.0), (PI / 3.0, 2.0 * PI / 3.0)];

/// Bell circuit on `n_qubits` along `path` (start = path[0], end = last).
/// Only the two endpoints are measured.
pub fn bell_circuit(n_qubits: usize, path: &[usize], theta_a: f64, theta_b: f64) -> Result<Circuit> {
    let mut c = singlet_circuit(n_qubits, path)?;
    let (a, b) = (path[0], *path.last().expect("length checked"));
    c.push(Gate::one("R_A", a, gates::z_pow(theta_a / PI)));
    c.push(Gate::one("R_B", b, gates::z_pow(theta_b / PI)));
    c.push(Gate::h(a)).push(Gate::h(b));
    c.set_measured(vec![a, b])?;
    Ok(c)
}

/// Prefix of the Bell circuit that leaves the endpoints in
/// `(|01⟩ − |10⟩)/√2` and all intermediate qubits in `|0⟩`.
pub fn singlet_circuit(n_qubits: usize, path: &[usize]) -> Result<Circuit> {
    if path.len() < 2 {
        return Err(Error::InvalidCircuit("Bell path needs at least two qubits".into()));
    }
    let mut seen = vec![false; n_qubits];
    for &q in path {
        if q >= n_qubits || seen[q] {
            return Err(Error::InvalidCircuit(format!("bad Bell path {path:?}")));
        }
        seen[q] = true;
    }
    let (a, b) = (path[0], path[path.len() - 1]);
    let mut c = Circuit::new(n_qubits);
    c.push(Gate::x(a)).push(Gate::x(b)).push(Gate::h(a));
    for w in path.windows(2) {
        c.push(Gate::cnot(w[0], w[1]));
    }
    for w in path[..path.len() - 1].windows(2).rev() {
        c.push(Gate::cnot(w[0], w[1]));
    }
    Ok(c)
}

/// `C = 2 p_eq − 1` with `ΔC = 2√(p_eq(1−p_eq)/n)`, from endpoint outcomes
/// `00, 01, 10, 11`.
pub fn correlation(m: &Measurement) -> Result<ScoreWithError> {
    let f = m.frequencies(2)?;
    let valid = m.valid_fraction();
    let n = match m {
        Measurement::Counts(h) => h.valid_shots() as f64,
        Measurement::Exact(d) => d.shots as f64,
    };
    if n == 0.0 || valid == 0.0 {
        return Err(Error::EmptyHistogram);
    }
    let p_eq = ((f[0] + f[3]) / valid).clamp(0.0, 1.0);
    let c = 2.0 * p_eq - 1.0;
    let dc = 2.0 * (p_eq * (1.0 - p_eq) / n).sqrt();
    Ok(ScoreWithError::new(c, dc))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellResult {
    pub pair: (usize, usize),
    pub path: Vec<usize>,
    /// `C(0,π/3), C(0,2π/3), C(π/3,2π/3)`.
    pub correlations: [ScoreWithError; 3],
    pub cbell: f64,
    pub stderr: f64,
}

/// Combines the three settings into `C_Bell` with the quadrature error.
/// `results` maps setting index (see [`SETTINGS`]) to its correlation.
pub fn cbell(pair: (usize, usize), path: Vec<usize>, results: &BTreeMap<usize, ScoreWithError>) -> Result<BellResult> {
    let get = |k: usize| {
        results
            .get(&k)
            .copied()
            .ok_or_else(|| Error::MissingSetting(format!("(θA,θB) = {:?}", SETTINGS[k])))
    };
    let correlations = [get(0)?, get(1)?, get(2)?];
    let value = correlations[1].value - correlations[0].value - correlations[2].value;
    let stderr = correlations.iter().map(|c| c.stderr * c.stderr).sum::<f64>().sqrt();
    Ok(BellResult { pair, path, correlations, cbell: value, stderr })
}

/// Device score: mean `C_Bell` over every directed nearest-neighbour pair,
/// with error `√((1/N) Σ ΔC_Bell²)`.
pub fn bell_score(results: &[BellResult], topology: &Topology) -> Result<ScoreWithError> {
    let by_pair: BTreeMap<(usize, usize), &BellResult> = results.iter().map(|r| (r.pair, r)).collect();
    let pairs = topology.directed_pairs();
    if pairs.is_empty() {
        return Err(Error::IncompleteCoverage("topology has no edges".into()));
    }
    let mut chosen = Vec::with_capacity(pairs.len());
    for p in &pairs {
        match by_pair.get(p) {
            Some(r) => chosen.push(*r),
            None => return Err(Error::IncompleteCoverage(format!("no result for pair {p:?}"))),
        }
    }
    let n = chosen.len() as f64;
    let value = chosen.iter().map(|r| r.cbell).sum::<f64>() / n;
    let var = chosen.iter().map(|r| r.stderr * r.stderr).sum::<f64>() / n;
    Ok(ScoreWithError::new(value, var.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairSelection {
    /// Directed nearest-neighbour pairs only.
    Adjacent,
    /// Every ordered pair of connected qubits.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellRun {
    pub results: Vec<BellResult>,
    pub score: ScoreWithError,
    pub shots: u64,
}

pub fn job_id(pair: (usize, usize), setting: usize) -> String {
    format!("bell-{}-{}-s{setting}", pair.0, pair.1)
}

/// Runs all three settings for every selected pair and scores the device.
pub fn run_bell(topology: &Topology, selection: PairSelection, shots: u64, exec: &Executor) -> Result<BellRun> {
    let pairs = match selection {
        PairSelection::Adjacent => topology.directed_pairs(),
        PairSelection::All => topology.all_connected_pairs(),
    };
    let mut jobs = Vec::with_capacity(3 * pairs.len());
    let mut paths = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        let path = topology.best_path(a, b)?;
        for (k, &(ta, tb)) in SETTINGS.iter().enumerate() {
            jobs.push(Job::new(job_id((a, b), k), bell_circuit(topology.n, &path, ta, tb)?, shots));
        }
        paths.push(path);
    }
    let measurements = exec.run(&jobs)?;
    let mut results = Vec::with_capacity(pairs.len());
    for (i, (&pair, path)) in pairs.iter().zip(paths).enumerate() {
        let per_setting: BTreeMap<usize, ScoreWithError> = (0..3)
            .map(|k| Ok((k, correlation(&measurements[3 * i + k])?)))
            .collect::<Result<_>>()?;
        results.push(cbell(pair, path, &per_setting)?);
    }
    let score = bell_score(&results, topology)?;
    Ok(BellRun { results, score, shots })
}

/// Asymmetric `n × n` matrix of `C_Bell` values (`None` where not measured).
pub fn heatmap(n: usize, results: &[BellResult]) -> Vec<Vec<Option<f64>>> {
    let mut m = vec![vec![None; n]; n];
    for r in results {
        m[r.pair.0][r.pair.1] = Some(r.cbell);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Backend;
    use crate::gates::C64;
    use crate::sim::{simulate, CountsHistogram};

    fn expected_phi2(k: usize) -> [C64; 4] {
        let s3 = 3f64.sqrt();
        let v = match k {
            0 => [(-1.0, s3), (-3.0, -s3), (3.0, s3), (1.0, -s3)],
            1 => [(-3.0, s3), (-1.0, -s3), (1.0, s3), (3.0, -s3)],
            _ => [(-2.0, 0.0), (0.0, -2.0 * s3), (0.0, 2.0 * s3), (2.0, 0.0)],
        };
        v.map(|(re, im)| C64::new(re, im) / (4.0 * 2f64.sqrt()))
    }

    /// Endpoint amplitudes of the final state, assuming the path interior
    /// has returned to |0⟩.
    fn endpoint_amplitudes(c: &Circuit, a: usize, b: usize) -> [C64; 4] {
        let s = simulate(c).unwrap();
        let n = c.n_qubits();
        let idx = |x: usize, y: usize| (x << (n - 1 - a)) | (y << (n - 1 - b));
        [idx(0, 0), idx(0, 1), idx(1, 0), idx(1, 1)].map(|i| s.amplitudes()[i])
    }

    #[test]
    fn prefix_is_singlet_on_endpoints() {
        let c = singlet_circuit(4, &[0, 1, 2, 3]).unwrap();
        let s = simulate(&c).unwrap();
        let amp = s.amplitudes();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // |0001⟩ = index 1, |1000⟩ = index 8.
        assert!((amp[1] - C64::new(h, 0.0)).norm() < 1e-12);
        assert!((amp[8] - C64::new(-h, 0.0)).norm() < 1e-12);
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert_eq!(c.depth(), 2 * 3 + 1);
        assert_eq!(c.two_qubit_count(), 2 * 3 - 1);
    }

    #[test]
    fn final_state_matches_closed_form() {
        for d in 1..=5 {
            let path: Vec<usize> = (0..=d).collect();
            for (k, &(ta, tb)) in SETTINGS.iter().enumerate() {
                let c = bell_circuit(d + 1, &path, ta, tb).unwrap();
                let got = endpoint_amplitudes(&c, 0, d);
                let want = expected_phi2(k);
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).norm() < 1e-10, "d={d} setting {k}");
                }
            }
        }
    }

    #[test]
    fn ideal_correlations() {
        let want = [-0.5, 0.5, -0.5];
        for (k, &(ta, tb)) in SETTINGS.iter().enumerate() {
            let c = bell_circuit(3, &[0, 1, 2], ta, tb).unwrap();
            let m = Backend::Exact.execute(&[Job::new("x", c, 8192)], 0).unwrap().remove(0);
            let corr = correlation(&m).unwrap();
            assert!((corr.value - want[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_edge_cases() {
        let all_zero = Measurement::Counts(CountsHistogram::from_dense(100, 2, &[100, 0, 0, 0]));
        let c = correlation(&all_zero).unwrap();
        assert_eq!((c.value, c.stderr), (1.0, 0.0));
        let empty = Measurement::Counts(CountsHistogram::new(0));
        assert!(matches!(correlation(&empty), Err(Error::EmptyHistogram)));
    }

    #[test]
    fn cbell_needs_all_settings() {
        let mut m = BTreeMap::new();
        m.insert(0, ScoreWithError::new(-0.5, 0.0));
        m.insert(1, ScoreWithError::new(0.5, 0.0));
        assert!(matches!(cbell((0, 1), vec![0, 1], &m), Err(Error::MissingSetting(_))));
        m.insert(2, ScoreWithError::new(-0.5, 0.0));
        assert!((cbell((0, 1), vec![0, 1], &m).unwrap().cbell - 1.5).abs() < 1e-15);
        // Decohered device.
        let zero: BTreeMap<_, _> = (0..3).map(|k| (k, ScoreWithError::new(0.0, 0.01))).collect();
        assert_eq!(cbell((0, 1), vec![0, 1], &zero).unwrap().cbell, 0.0);
    }

    #[test]
    fn score_averages_directed_pairs() {
        let topo = Topology::line(2);
        let mk = |pair, v| BellResult {
            pair,
            path: vec![pair.0, pair.1],
            correlations: [ScoreWithError::default(); 3],
            cbell: v,
            stderr: 0.1,
        };
        let s = bell_score(&[mk((0, 1), 1.0), mk((1, 0), 1.2)], &topo).unwrap();
        assert!((s.value - 1.1).abs() < 1e-12);
        assert!((s.stderr - 0.1).abs() < 1e-12);
        assert!(matches!(bell_score(&[mk((0, 1), 1.0)], &topo), Err(Error::IncompleteCoverage(_))));
    }

    #[test]
    fn orientations_agree_on_ideal_backend() {
        let topo = Topology::line(3);
        let run = run_bell(&topo, PairSelection::All, 1024, &Executor::new(Backend::Exact, 0)).unwrap();
        for r in &run.results {
            assert!((r.cbell - 1.5).abs() < 1e-9);
        }
        assert_eq!(run.results.len(), 6);
    }
}
