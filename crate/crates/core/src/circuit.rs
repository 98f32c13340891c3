//! Gate-level circuit representation.
//!
//! A [`Circuit`] is an ordered list of one-qubit and singly-controlled
//! one-qubit gates over `n` qubits, plus measurement annotations: which
//! qubits are read out, which of them are post-selected on a fixed bit, and
//! an optional suffix of basis rotations applied just before readout.
//! Qubit 0 is the most significant bit of every bitstring.

use crate::error::{Error, Result};
use crate::gates::{self, Mat2, C64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub label: String,
    pub target: usize,
    pub control: Option<usize>,
    pub matrix: Mat2,
}

impl Gate {
    /// Single-qubit gate. Panics if `matrix` is not unitary; use
    /// [`Gate::try_new`] for untrusted input.
    pub fn one(label: impl Into<String>, target: usize, matrix: Mat2) -> Self {
        Self::try_new(label, target, None, matrix).expect("named gate must be unitary")
    }

    pub fn controlled(label: impl Into<String>, control: usize, target: usize, matrix: Mat2) -> Self {
        Self::try_new(label, target, Some(control), matrix).expect("named gate must be unitary")
    }

    pub fn try_new(
        label: impl Into<String>,
        target: usize,
        control: Option<usize>,
        matrix: Mat2,
    ) -> Result<Self> {
        let label = label.into();
        let err = gates::unitarity_error(&matrix);
        if err.is_nan() || err > UNITARITY_TOL {
            return Err(Error::InvalidGate(format!("{label}: ‖M†M − I‖ = {err:e}")));
        }
        if control == Some(target) {
            return Err(Error::InvalidGate(format!("{label}: control equals target {target}")));
        }
        Ok(Self { label, target, control, matrix })
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self.control {
            Some(c) => vec![c, self.target],
            None => vec![self.target],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.control.is_some()
    }

    pub fn dagger(&self) -> Self {
        let label = if let Some(stripped) = self.label.strip_suffix('†') {
            stripped.to_string()
        } else {
            format!("{}†", self.label)
        };
        Self { label, target: self.target, control: self.control, matrix: self.matrix.adjoint() }
    }

    /// Same gate acting on relabelled qubits.
    pub fn remap(&self, map: &impl Fn(usize) -> usize) -> Self {
        Self {
            label: self.label.clone(),
            target: map(self.target),
            control: self.control.map(map),
            matrix: self.matrix,
        }
    }

    pub fn x(q: usize) -> Self {
        Self::one("X", q, gates::x())
    }
    pub fn h(q: usize) -> Self {
        Self::one("H", q, gates::h())
    }
    pub fn s(q: usize) -> Self {
        Self::one("S", q, gates::s())
    }
    pub fn sdg(q: usize) -> Self {
        Self::one("S†", q, gates::sdg())
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::controlled("CNOT", control, target, gates::x())
    }
    pub fn cz(control: usize, target: usize) -> Self {
        Self::controlled("CZ", control, target, gates::z())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    postselect: BTreeMap<usize, u8>,
    measured: Vec<usize>,
    basis_rotations: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, ..Default::default() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn basis_rotations(&self) -> &[Gate] {
        &self.basis_rotations
    }

    pub fn postselect(&self) -> &BTreeMap<usize, u8> {
        &self.postselect
    }

    /// Measured qubits in readout order. Defaults to all qubits.
    pub fn measured(&self) -> Vec<usize> {
        if self.measured.is_empty() {
            (0..self.n_qubits).collect()
        } else {
            self.measured.clone()
        }
    }

    fn check_gate(&self, gate: &Gate) -> Result<()> {
        for q in gate.qubits() {
            if q >= self.n_qubits {
                return Err(Error::InvalidCircuit(format!(
                    "gate {} touches qubit {q} outside width {}",
                    gate.label, self.n_qubits
                )));
            }
        }
        Ok(())
    }

    pub fn try_push(&mut self, gate: Gate) -> Result<&mut Self> {
        self.check_gate(&gate)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends a gate. Panics on out-of-range qubits (builder use).
    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.try_push(gate).expect("gate within circuit width");
        self
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> &mut Self {
        for g in gates {
            self.push(g);
        }
        self
    }

    pub fn push_basis_rotation(&mut self, gate: Gate) -> Result<&mut Self> {
        if gate.is_two_qubit() {
            return Err(Error::InvalidCircuit("basis rotations must be single-qubit".into()));
        }
        self.check_gate(&gate)?;
        self.basis_rotations.push(gate);
        Ok(self)
    }

    pub fn set_postselect(&mut self, qubit: usize, bit: u8) -> Result<&mut Self> {
        if qubit >= self.n_qubits || bit > 1 {
            return Err(Error::InvalidCircuit(format!("post-selection {qubit}={bit} out of range")));
        }
        self.postselect.insert(qubit, bit);
        Ok(self)
    }

    pub fn set_measured(&mut self, qubits: Vec<usize>) -> Result<&mut Self> {
        let mut seen = vec![false; self.n_qubits];
        for &q in &qubits {
            if q >= self.n_qubits || seen[q] {
                return Err(Error::InvalidCircuit(format!("bad measured qubit {q}")));
            }
            seen[q] = true;
        }
        self.measured = qubits;
        Ok(self)
    }

    /// Gate list with the basis-rotation suffix appended.
    pub fn all_gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().chain(self.basis_rotations.iter())
    }

    /// Appends another circuit's gates (widths must match; annotations of
    /// `other` are ignored).
    pub fn compose(&self, other: &Circuit) -> Result<Circuit> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::InvalidCircuit("width mismatch in compose".into()));
        }
        let mut out = self.clone();
        out.gates.extend(other.gates.iter().cloned());
        Ok(out)
    }

    pub fn depth(&self) -> usize {
        depth_of(self.gates.iter(), self.n_qubits)
    }

    pub fn depth_with_rotations(&self) -> usize {
        depth_of(self.all_gates(), self.n_qubits)
    }

    pub fn gate_count(&self, include_rotations: bool) -> usize {
        self.gates.len() + if include_rotations { self.basis_rotations.len() } else { 0 }
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn to_json(&self) -> CircuitJson {
        CircuitJson {
            n_qubits: self.n_qubits,
            gates: self.all_gates().map(GateJson::from).collect(),
            postselect: self.postselect.iter().map(|(&q, &b)| (q.to_string(), b)).collect(),
            measured: self.measured(),
        }
    }

    pub fn from_json(json: &CircuitJson) -> Result<Self> {
        let mut circuit = Circuit::new(json.n_qubits);
        for g in &json.gates {
            circuit.try_push(g.to_gate()?)?;
        }
        for (q, &b) in &json.postselect {
            let q: usize = q
                .parse()
                .map_err(|_| Error::InvalidCircuit(format!("bad post-select key {q}")))?;
            circuit.set_postselect(q, b)?;
        }
        circuit.set_measured(json.measured.clone())?;
        Ok(circuit)
    }
}

/// Greedy ASAP layering: each gate goes one layer after the latest gate on
/// any of its qubits.
pub fn depth_of<'a>(gates: impl Iterator<Item = &'a Gate>, n_qubits: usize) -> usize {
    let mut level = vec![0usize; n_qubits];
    let mut depth = 0;
    for g in gates {
        let qs = g.qubits();
        let l = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for q in qs {
            level[q] = l;
        }
        depth = depth.max(l);
    }
    depth
}

/// Wire format for one gate: label, qubits (control first) and the row-major
/// 2×2 target matrix as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateJson {
    pub label: String,
    pub qubits: Vec<usize>,
    pub matrix: Vec<[f64; 2]>,
}

impl From<&Gate> for GateJson {
    fn from(g: &Gate) -> Self {
        let m = &g.matrix;
        let entries = [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]];
        Self {
            label: g.label.clone(),
            qubits: g.qubits(),
            matrix: entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl GateJson {
    pub fn to_gate(&self) -> Result<Gate> {
        if self.matrix.len() != 4 {
            return Err(Error::InvalidGate(format!("{}: matrix needs 4 entries", self.label)));
        }
        let e: Vec<C64> = self.matrix.iter().map(|p| C64::new(p[0], p[1])).collect();
        let m = Mat2::new(e[0], e[1], e[2], e[3]);
        match self.qubits.as_slice() {
            [t] => Gate::try_new(self.label.clone(), *t, None, m),
            [c, t] => Gate::try_new(self.label.clone(), *t, Some(*c), m),
            _ => Err(Error::InvalidGate(format!("{}: expected 1 or 2 qubits", self.label))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub n_qubits: usize,
    pub gates: Vec<GateJson>,
    #[serde(default)]
    pub postselect: BTreeMap<String, u8>,
    #[serde(default)]
    pub measured: Vec<usize>,
}
