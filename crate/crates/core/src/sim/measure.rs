use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::sim::state::StateVector;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Qubits read out at the end of a circuit and the post-selection pattern
/// expressed as positions within that readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    pub qubits: Vec<usize>,
    pub postselect: Vec<(usize, u8)>,
}

impl Readout {
    /// Measured qubits of `circuit`, with any post-selected qubit that is not
    /// already measured appended.
    pub fn of(circuit: &Circuit) -> Self {
        let mut qubits = circuit.measured();
        for &q in circuit.postselect().keys() {
            if !qubits.contains(&q) {
                qubits.push(q);
            }
        }
        let postselect = circuit
            .postselect()
            .iter()
            .map(|(&q, &b)| (qubits.iter().position(|&m| m == q).expect("appended above"), b))
            .collect();
        Self { qubits, postselect }
    }

    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_valid(&self, outcome: usize) -> bool {
        let m = self.width();
        self.postselect.iter().all(|&(pos, b)| ((outcome >> (m - 1 - pos)) & 1) as u8 == b)
    }

    /// Born distribution over readout outcomes with post-selection-violating
    /// outcomes zeroed (not renormalized).
    pub fn distribution(&self, state: &StateVector) -> Vec<f64> {
        let mut p = state.probabilities(&self.qubits);
        for (i, v) in p.iter_mut().enumerate() {
            if !self.is_valid(i) {
                *v = 0.0;
            }
        }
        p
    }
}

/// Bitstring of `index` over `width` bits, most significant first.
pub fn bitstring(index: usize, width: usize) -> String {
    (0..width).map(|k| if (index >> (width - 1 - k)) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bitstring(s: &str) -> Result<usize> {
    if s.is_empty() || s.len() > 63 || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::InvalidConfig(format!("bad bitstring {s:?}")));
    }
    Ok(usize::from_str_radix(s, 2).expect("validated binary digits"))
}

/// Sampled outcome counts. Shots that failed post-selection count towards
/// `shots` but have no entry in `counts`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsHistogram {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl CountsHistogram {
    pub fn new(shots: u64) -> Self {
        Self { shots, counts: BTreeMap::new() }
    }

    pub fn valid_shots(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn add(&mut self, outcome: usize, width: usize) {
        *self.counts.entry(bitstring(outcome, width)).or_insert(0) += 1;
    }

    pub fn from_dense(shots: u64, width: usize, dense: &[u64]) -> Self {
        let counts = dense
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| (bitstring(i, width), n))
            .collect();
        Self { shots, counts }
    }

    pub fn dense(&self, width: usize) -> Result<Vec<u64>> {
        let mut out = vec![0u64; 1 << width];
        for (k, &n) in &self.counts {
            if k.len() != width {
                return Err(Error::InvalidConfig(format!("bitstring {k} has width != {width}")));
            }
            out[parse_bitstring(k)?] += n;
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.valid_shots() > self.shots {
            return Err(Error::InvalidConfig(format!(
                "histogram holds {} counts for {} shots",
                self.valid_shots(),
                self.shots
            )));
        }
        for k in self.counts.keys() {
            parse_bitstring(k)?;
        }
        Ok(())
    }
}

/// Infinite-statistics stand-in for a histogram: exact outcome
/// probabilities plus the nominal shot count used by error formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub shots: u64,
    pub probabilities: BTreeMap<String, f64>,
}

/// What a backend returns for one circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Measurement {
    Counts(CountsHistogram),
    Exact(ExactDistribution),
}

impl Measurement {
    pub fn exact(shots: u64, width: usize, probs: &[f64]) -> Self {
        let probabilities = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (bitstring(i, width), p))
            .collect();
        Measurement::Exact(ExactDistribution { shots, probabilities })
    }

    pub fn shots(&self) -> u64 {
        match self {
            Measurement::Counts(h) => h.shots,
            Measurement::Exact(d) => d.shots,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Measurement::Exact(_))
    }

    /// Estimated probability of every readout outcome (relative to all shots,
    /// so post-selection losses are visible as missing mass).
    pub fn frequencies(&self, width: usize) -> Result<Vec<f64>> {
        match self {
            Measurement::Counts(h) => {
                if h.shots == 0 {
                    return Ok(vec![0.0; 1 << width]);
                }
                let n = h.shots as f64;
                Ok(h.dense(width)?.into_iter().map(|c| c as f64 / n).collect())
            }
            Measurement::Exact(d) => {
                let mut out = vec![0.0; 1 << width];
                for (k, &p) in &d.probabilities {
                    if k.len() != width {
                        return Err(Error::InvalidConfig(format!("bitstring {k} has width != {width}")));
                    }
                    out[parse_bitstring(k)?] += p;
                }
                Ok(out)
            }
        }
    }

    /// Fraction of shots that survived post-selection.
    pub fn valid_fraction(&self) -> f64 {
        match self {
            Measurement::Counts(h) if h.shots == 0 => 0.0,
            Measurement::Counts(h) => h.valid_shots() as f64 / h.shots as f64,
            Measurement::Exact(d) => d.probabilities.values().sum(),
        }
    }

    pub fn as_counts(&self) -> Option<&CountsHistogram> {
        match self {
            Measurement::Counts(h) => Some(h),
            Measurement::Exact(_) => None,
        }
    }
}

/// Deterministic generator for one work unit: the root seed selects the key,
/// a hash of `unit` selects the ChaCha stream.
pub fn stream_rng(seed: u64, unit: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(unit.as_bytes()));
    rng
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Draws `shots` outcomes from `probs` (indexed by readout outcome) and
/// drops the ones rejected by `readout`'s post-selection.
pub fn sample_outcomes(
    probs: &[f64],
    readout: &Readout,
    shots: u64,
    rng: &mut impl Rng,
) -> CountsHistogram {
    let width = readout.width();
    let mut dense = vec![0u64; probs.len()];
    if let Ok(dist) = WeightedIndex::new(probs) {
        for _ in 0..shots {
            dense[dist.sample(rng)] += 1;
        }
    }
    for (i, n) in dense.iter_mut().enumerate() {
        if !readout.is_valid(i) {
            *n = 0;
        }
    }
    CountsHistogram::from_dense(shots, width, &dense)
}

/// Samples `shots` readouts of `state` on all qubits with post-selection on
/// `postselect` (qubit → bit).
pub fn sample(
    state: &StateVector,
    shots: u64,
    postselect: &BTreeMap<usize, u8>,
    seed: u64,
) -> CountsHistogram {
    let readout = Readout {
        qubits: (0..state.n_qubits()).collect(),
        postselect: postselect.iter().map(|(&q, &b)| (q, b)).collect(),
    };
    let probs = state.probabilities(&readout.qubits);
    sample_outcomes(&probs, &readout, shots, &mut stream_rng(seed, "sample"))
}
