//! Dense statevector simulation, shot sampling and trajectory noise.

pub mod measure;
pub mod noise;
pub mod state;

pub use measure::{sample, stream_rng, CountsHistogram, ExactDistribution, Measurement, Readout};
pub use noise::{sample_noisy, NoiseModel};
pub use state::{circuit_unitary, simulate, simulate_with_limit, StateVector, MAX_WIDTH};

use crate::circuit::Circuit;
use crate::error::Result;

/// Marginal Born distribution of `state` over `qubits`.
pub fn probabilities(state: &StateVector, qubits: &[usize]) -> Vec<f64> {
    state.probabilities(qubits)
}

/// Projects `qubit` of `state` onto `bit`; returns the renormalized state
/// and the branch probability.
pub fn postselect_state(state: &StateVector, qubit: usize, bit: u8) -> Result<(StateVector, f64)> {
    state.postselect(qubit, bit)
}

/// Exact outcome probabilities of `circuit`'s readout with post-selection
/// failures removed.
pub fn exact_distribution(circuit: &Circuit) -> Result<(Readout, Vec<f64>)> {
    let readout = Readout::of(circuit);
    let state = simulate(circuit)?;
    let probs = readout.distribution(&state);
    Ok((readout, probs))
}
