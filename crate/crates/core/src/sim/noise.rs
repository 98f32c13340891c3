use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gates::{self, Mat2};
use crate::sim::measure::{CountsHistogram, Readout};
use crate::sim::state::{StateVector, MAX_WIDTH};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

/// Upper bound on cached error-trajectory distributions per circuit.
const TRAJECTORY_CACHE: usize = 4096;

/// Stochastic Pauli noise attached to gates plus asymmetric readout flips.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Error probability per qubit after a single-qubit gate.
    pub p1: f64,
    /// Error probability per touched qubit after a two-qubit gate.
    pub p2: f64,
    /// Probability of reading 1 when the qubit is in 0.
    pub ro01: f64,
    /// Probability of reading 0 when the qubit is in 1.
    pub ro10: f64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p1", self.p1), ("p2", self.p2), ("ro01", self.ro01), ("ro10", self.ro10)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("noise parameter {name}={v} outside [0,1]")));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: NoiseModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        model.validate()?;
        Ok(model)
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.ro01 == 0.0 && self.ro10 == 0.0
    }
}

fn pauli(k: u8) -> Mat2 {
    match k {
        0 => gates::x(),
        1 => gates::y(),
        _ => gates::z(),
    }
}

/// (gate index, qubit, Pauli 0=X 1=Y 2=Z) inserted after that gate.
type ErrorEvent = (usize, usize, u8);

fn trajectory_distribution(
    gates: &[&Gate],
    n_qubits: usize,
    errors: &[ErrorEvent],
    readout: &Readout,
) -> Vec<f64> {
    let mut state = StateVector::zero(n_qubits);
    let mut next = errors.iter().peekable();
    for (gi, g) in gates.iter().enumerate() {
        state.apply(g);
        while let Some(&&(eg, q, k)) = next.peek() {
            if eg != gi {
                break;
            }
            state.apply_matrix(q, &pauli(k));
            next.next();
        }
    }
    state.probabilities(&readout.qubits)
}

/// Monte-Carlo trajectory sampling of `circuit` under `noise`. Each shot
/// draws its own Pauli error pattern; shots without errors reuse the ideal
/// outcome distribution.
pub fn sample_noisy(
    circuit: &Circuit,
    noise: &NoiseModel,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<CountsHistogram> {
    noise.validate()?;
    let n = circuit.n_qubits();
    if n > MAX_WIDTH {
        return Err(Error::WidthExceeded { width: n, max: MAX_WIDTH });
    }
    let readout = Readout::of(circuit);
    let width = readout.width();
    let gates: Vec<&Gate> = circuit.all_gates().collect();
    let ideal = trajectory_distribution(&gates, n, &[], &readout);
    let ideal_dist = WeightedIndex::new(&ideal).map_err(|e| Error::Backend(e.to_string()))?;
    let mut cache: HashMap<Vec<ErrorEvent>, WeightedIndex<f64>> = HashMap::new();

    let mut dense = vec![0u64; 1 << width];
    let mut errors: Vec<ErrorEvent> = Vec::new();
    for _ in 0..shots {
        errors.clear();
        for (gi, g) in gates.iter().enumerate() {
            let p = if g.is_two_qubit() { noise.p2 } else { noise.p1 };
            if p == 0.0 {
                continue;
            }
            for q in g.qubits() {
                if rng.gen::<f64>() < p {
                    errors.push((gi, q, rng.gen_range(0..3u8)));
                }
            }
        }
        let mut outcome = if errors.is_empty() {
            ideal_dist.sample(rng)
        } else if let Some(d) = cache.get(&errors) {
            d.sample(rng)
        } else {
            let probs = trajectory_distribution(&gates, n, &errors, &readout);
            let d = WeightedIndex::new(&probs).map_err(|e| Error::Backend(e.to_string()))?;
            let o = d.sample(rng);
            if cache.len() < TRAJECTORY_CACHE {
                cache.insert(errors.clone(), d);
            }
            o
        };
        if noise.ro01 > 0.0 || noise.ro10 > 0.0 {
            for bit in 0..width {
                let m = 1 << (width - 1 - bit);
                let flip = if outcome & m == 0 { noise.ro01 } else { noise.ro10 };
                if flip > 0.0 && rng.gen::<f64>() < flip {
                    outcome ^= m;
                }
            }
        }
        if readout.is_valid(outcome) {
            dense[outcome] += 1;
        }
    }
    Ok(CountsHistogram::from_dense(shots, width, &dense))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::measure::stream_rng;

    #[test]
    fn readout_flip_probability() {
        let mut c = Circuit::new(1);
        c.push(Gate::x(0));
        let noise = NoiseModel { ro10: 0.1, ..Default::default() };
        let shots = 100_000;
        let h = sample_noisy(&c, &noise, shots, &mut stream_rng(5, "ro")).unwrap();
        let p1 = *h.counts.get("1").unwrap() as f64 / shots as f64;
        assert!((p1 - 0.9).abs() < 5.0 * (0.09f64 / shots as f64).sqrt());
    }

    #[test]
    fn idle_qubits_are_not_disturbed() {
        let c = Circuit::new(1);
        let noise = NoiseModel { p1: 0.5, p2: 0.5, ..Default::default() };
        let h = sample_noisy(&c, &noise, 1000, &mut stream_rng(1, "idle")).unwrap();
        assert_eq!(h.counts.get("0"), Some(&1000));
    }

    #[test]
    fn depolarized_x_gate_flips_two_thirds_of_errors() {
        // X followed by a Pauli error with probability p: X,Y errors undo the
        // flip, Z does not, so P(0) = 2p/3.
        let mut c = Circuit::new(1);
        c.push(Gate::x(0));
        let p = 0.3;
        let noise = NoiseModel { p1: p, ..Default::default() };
        let shots = 100_000;
        let h = sample_noisy(&c, &noise, shots, &mut stream_rng(9, "dep")).unwrap();
        let p0 = *h.counts.get("0").unwrap() as f64 / shots as f64;
        let want = 2.0 * p / 3.0;
        assert!((p0 - want).abs() < 5.0 * (want * (1.0 - want) / shots as f64).sqrt());
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        let c = Circuit::new(1);
        let noise = NoiseModel { p2: 1.5, ..Default::default() };
        assert!(sample_noisy(&c, &noise, 1, &mut stream_rng(0, "x")).is_err());
    }
}
