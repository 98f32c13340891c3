//! Schrödinger's Microscope and Mandelbrot benchmarks.
//!
//! A point `z` of the extended complex plane is encoded as the qubit state
//! `|ψ_z⟩ = (z|0⟩ + |1⟩)/√(|z|²+1)`. Single-qubit gates then act as Möbius
//! maps, and a CNOT followed by post-selecting the target on 0 squares `z`.
//! Multiplexing such blocks in a binary tree over `2^n` qubits iterates a
//! rational map `n` times; the probability images over a grid of inputs are
//! the benchmark targets.

use crate::analysis::ScoreWithError;
use crate::backend::{Executor, Job};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gates::{self, Mat2, C64};
use crate::sim::Measurement;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(C64),
    Infinity,
}

impl ExtComplex {
    /// Non-finite inputs map to ∞.
    pub fn new(z: C64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            ExtComplex::Finite(z)
        } else {
            ExtComplex::Infinity
        }
    }

    pub fn finite(re: f64, im: f64) -> Self {
        Self::new(C64::new(re, im))
    }

    /// `|z|`, with ∞ for the point at infinity.
    pub fn abs(&self) -> f64 {
        match self {
            ExtComplex::Finite(z) => z.norm(),
            ExtComplex::Infinity => f64::INFINITY,
        }
    }

    /// `(az + b)/(cz + d)` with the usual conventions at ∞ and at poles.
    pub fn mobius(&self, [a, b, c, d]: [C64; 4]) -> ExtComplex {
        let (num, den) = match self {
            ExtComplex::Finite(z) => (a * z + b, c * z + d),
            ExtComplex::Infinity => (a, c),
        };
        ratio(num, den)
    }

    /// Phase-insensitive closeness on the sphere via the encoded states.
    pub fn state_distance(&self, other: &ExtComplex) -> f64 {
        let (u, v) = (psi(*self), psi(*other));
        let overlap = (u[0].conj() * v[0] + u[1].conj() * v[1]).norm();
        (1.0 - overlap.min(1.0)).max(0.0).sqrt()
    }
}

fn ratio(num: C64, den: C64) -> ExtComplex {
    if den.norm() <= f64::EPSILON * num.norm() || den == C64::new(0.0, 0.0) {
        ExtComplex::Infinity
    } else {
        ExtComplex::new(num / den)
    }
}

/// Amplitudes of `|ψ_z⟩`.
pub fn psi(z: ExtComplex) -> [C64; 2] {
    match z {
        ExtComplex::Infinity => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ExtComplex::Finite(z) => {
            let norm = (z.norm_sqr() + 1.0).sqrt();
            [z / norm, C64::new(1.0 / norm, 0.0)]
        }
    }
}

/// Point encoded by a single-qubit state (inverse of [`psi`] up to phase).
pub fn point_of_state(v: [C64; 2]) -> ExtComplex {
    ratio(v[0], v[1])
}

/// Exponents `(φ1, φ2)` with `Z^{φ2} Y^{φ1} |0⟩ ∝ |ψ_z⟩`.
pub fn prepare_psi(z: ExtComplex) -> (f64, f64) {
    match z {
        ExtComplex::Infinity => (0.0, 0.0),
        ExtComplex::Finite(z) => {
            let r = z.norm();
            let phi1 = 2.0 / PI * (r / (r * r + 1.0).sqrt()).acos();
            let phi2 = if r == 0.0 { 0.0 } else { -z.arg() / PI };
            (phi1, phi2)
        }
    }
}

fn prep_gates(q: usize, z: ExtComplex) -> [Gate; 2] {
    let (phi1, phi2) = prepare_psi(z);
    [Gate::one("Y^φ1", q, gates::y_pow(phi1)), Gate::one("Z^φ2", q, gates::z_pow(phi2))]
}

/// Möbius coefficients `(a, b, c, d)` induced by a single-qubit unitary.
pub fn mobius_of_unitary(u: &Mat2) -> [C64; 4] {
    [u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]]
}

/// `F(z) = (z² + i)/(iz² + 1)`.
pub fn f_map(z: ExtComplex) -> ExtComplex {
    let i = C64::new(0.0, 1.0);
    match z {
        ExtComplex::Infinity => ExtComplex::Finite(-i),
        ExtComplex::Finite(z) => {
            let z2 = z * z;
            ratio(z2 + i, i * z2 + 1.0)
        }
    }
}

/// `G_c(z) = z² + c`.
pub fn g_map(c: C64, z: ExtComplex) -> ExtComplex {
    match z {
        ExtComplex::Infinity => ExtComplex::Infinity,
        ExtComplex::Finite(z) => ExtComplex::new(z * z + c),
    }
}

/// Post-selection probability of one `F` block fed `|ψ_w⟩ ⊗ |ψ_w⟩`.
pub fn f_branch_probability(w: ExtComplex) -> f64 {
    match w {
        ExtComplex::Infinity => 1.0,
        ExtComplex::Finite(w) => {
            let a = w.norm_sqr();
            (a * a + 1.0) / (a + 1.0).powi(2)
        }
    }
}

/// Post-selection probability of one `G_c` block fed `|ψ_w⟩ ⊗ |ψ_w⟩`:
/// `(|w²+c|² + 1) / ((1 + r₂²)(|w|² + 1)²)`.
pub fn g_branch_probability(c: C64, w: ExtComplex) -> f64 {
    let kappa = 1.0 / (1.0 + gc_ratio(c).powi(2));
    match w {
        ExtComplex::Infinity => kappa,
        ExtComplex::Finite(w) => {
            let a = w.norm_sqr();
            kappa * ((w * w + c).norm_sqr() + 1.0) / (a + 1.0).powi(2)
        }
    }
}

/// `r₂ = |c| √(½(1 + √(1 + 4/|c|²)))`; zero for `c = 0`.
pub fn gc_ratio(c: C64) -> f64 {
    let a = c.norm();
    if a == 0.0 {
        return 0.0;
    }
    a * (0.5 * (1.0 + (1.0 + 4.0 / (a * a)).sqrt())).sqrt()
}

/// The squaring block followed by `S H S`: maps `|ψ_z⟩|ψ_z⟩` to
/// `|ψ_{F(z)}⟩` on `top` once `bottom` is post-selected on 0.
pub fn f_block(top: usize, bottom: usize) -> Vec<Gate> {
    vec![Gate::cnot(top, bottom), Gate::s(top), Gate::h(top), Gate::s(top)]
}

/// Controlled `R(r) = [[1, r], [r, −1]]/√(1+r²)` as `CZ` followed by a
/// controlled `R_y(2α)` with `tan α = r`, since `R(r) = R_y(2α)·Z`.
fn controlled_reflection(label: &str, control: usize, target: usize, r: f64) -> [Gate; 2] {
    let alpha = r.atan();
    [
        Gate::cz(control, target),
        Gate::controlled(format!("{label}·Z"), control, target, gates::ry(2.0 * alpha)),
    ]
}

/// Block implementing `z ↦ z² + c` on `top` after post-selecting `bottom`
/// on 0. For `c = 0` this is a single CNOT.
pub fn gc_block(c: C64, top: usize, bottom: usize) -> Vec<Gate> {
    if c.norm() == 0.0 {
        return vec![Gate::cnot(top, bottom)];
    }
    let r2 = gc_ratio(c);
    let r1 = 1.0 / r2;
    let phi = c.arg() / PI;
    let mut g = vec![Gate::cnot(top, bottom), Gate::controlled("H", bottom, top, gates::h())];
    g.extend(controlled_reflection("R1", top, bottom, r1));
    g.push(Gate::one("Z^φ", top, gates::z_pow(phi)));
    g.push(Gate::one("Z^-φ", bottom, gates::z_pow(-phi)));
    g.push(Gate::x(bottom));
    g.extend(controlled_reflection("R2", bottom, top, r2));
    // X on the target commutes with the CNOT; placing it first lets the
    // next tree level start right after this block.
    g.push(Gate::x(bottom));
    g.push(Gate::cnot(top, bottom));
    g
}

/// `(top, bottom)` block pairs of each tree level over `2^n` qubits.
pub fn tree_pairs(n: u32) -> Vec<Vec<(usize, usize)>> {
    let width = 1usize << n;
    (1..=n)
        .map(|level| {
            let stride = 1usize << (level - 1);
            (0..width).step_by(2 * stride).map(|a| (a, a + stride)).collect()
        })
        .collect()
}

fn postselect_all_but_top(c: &mut Circuit) -> Result<()> {
    for q in 1..c.n_qubits() {
        c.set_postselect(q, 0)?;
    }
    Ok(())
}

/// Level-`n` microscope: `2^n` copies of `|ψ_z⟩`, `2^n − 1` `F` blocks.
pub fn microscope_circuit(n: u32, z: ExtComplex) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidCircuit("level must be at least 1".into()));
    }
    let mut c = Circuit::new(1 << n);
    for q in 0..c.n_qubits() {
        c.extend(prep_gates(q, z));
    }
    for level in tree_pairs(n) {
        for (top, bottom) in level {
            c.extend(f_block(top, bottom));
        }
    }
    postselect_all_but_top(&mut c)?;
    Ok(c)
}

/// Level-`n` Mandelbrot circuit: `2^n` copies of `|ψ_0⟩ = |1⟩`, `2^n − 1`
/// `G_c` blocks.
pub fn mandelbrot_circuit(n: u32, c: C64) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidCircuit("level must be at least 1".into()));
    }
    let mut circ = Circuit::new(1 << n);
    for q in 0..circ.n_qubits() {
        circ.push(Gate::x(q));
    }
    for level in tree_pairs(n) {
        for (top, bottom) in level {
            circ.extend(gc_block(c, top, bottom));
        }
    }
    postselect_all_but_top(&mut circ)?;
    Ok(circ)
}

/// `(p_ps, p_1)` along an orbit `w_0, w_1, …, w_n` where level `j` runs
/// `2^{n−j}` blocks on `w_{j−1}`.
fn orbit_probabilities(orbit: &[ExtComplex], branch: impl Fn(ExtComplex) -> f64) -> (f64, f64) {
    let n = orbit.len() - 1;
    let mut p_ps = 1.0;
    for j in 1..=n {
        p_ps *= branch(orbit[j - 1]).powi(1 << (n - j));
    }
    let p_1 = match orbit[n] {
        ExtComplex::Infinity => 0.0,
        ExtComplex::Finite(w) => 1.0 / (w.norm_sqr() + 1.0),
    };
    (p_ps, p_1)
}

pub fn iterate(mut z: ExtComplex, n: u32, f: impl Fn(ExtComplex) -> ExtComplex) -> Vec<ExtComplex> {
    let mut orbit = vec![z];
    for _ in 0..n {
        z = f(z);
        orbit.push(z);
    }
    orbit
}

/// Closed-form `(p_ps^{(n)}(z), p_1^{(n)}(z))` of the microscope.
pub fn analytic_microscope(n: u32, z: ExtComplex) -> (f64, f64) {
    orbit_probabilities(&iterate(z, n, f_map), f_branch_probability)
}

/// `(p_ps^{(n)}(c), p_1^{(n)}(c))` of the Mandelbrot circuit from the orbit
/// of 0 under `G_c`.
pub fn analytic_mandelbrot(n: u32, c: C64) -> (f64, f64) {
    let orbit = iterate(ExtComplex::finite(0.0, 0.0), n, |w| g_map(c, w));
    orbit_probabilities(&orbit, |w| g_branch_probability(c, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Microscope,
    Mandelbrot,
}

impl Kind {
    pub fn id(&self) -> &'static str {
        match self {
            Kind::Microscope => "sm",
            Kind::Mandelbrot => "mandelbrot",
        }
    }

    pub fn circuit(&self, n: u32, z: C64) -> Result<Circuit> {
        match self {
            Kind::Microscope => microscope_circuit(n, ExtComplex::new(z)),
            Kind::Mandelbrot => mandelbrot_circuit(n, z),
        }
    }

    pub fn analytic(&self, n: u32, z: C64) -> (f64, f64) {
        match self {
            Kind::Microscope => analytic_microscope(n, ExtComplex::new(z)),
            Kind::Mandelbrot => analytic_mandelbrot(n, z),
        }
    }
}

/// Default shots per pixel: 4096 for levels 1–2, 8192 beyond.
pub fn default_shots(level: u32) -> u64 {
    if level <= 2 {
        4096
    } else {
        8192
    }
}

pub const DEFAULT_RESOLUTION: usize = 32;
/// Highest level run without an explicit override.
pub const MAX_DEFAULT_LEVEL: u32 = 3;

/// Square image over `[−2, 2]²`, row-major with row 0 at `Im = +2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelGrid {
    pub resolution: usize,
    pub values: Vec<f64>,
}

impl PixelGrid {
    pub fn new(resolution: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), resolution * resolution);
        Self { resolution, values }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.resolution + col]
    }
}

/// Complex coordinate of pixel `(row, col)`.
pub fn pixel_center(resolution: usize, row: usize, col: usize) -> C64 {
    let step = 4.0 / resolution as f64;
    C64::new(-2.0 + (col as f64 + 0.5) * step, 2.0 - (row as f64 + 0.5) * step)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRun {
    pub kind: Kind,
    pub level: u32,
    pub shots: u64,
    /// Joint post-selection frequency per pixel.
    pub ps_raw: PixelGrid,
    /// Geometric mean of the post-selection probabilities, `ps_raw^{1/(2^n−1)}`.
    pub grid_ps: PixelGrid,
    /// Frequency of reading 1 on the top qubit among post-selected shots.
    pub grid_1: PixelGrid,
}

pub fn pixel_job_id(kind: Kind, level: u32, resolution: usize, pixel: usize) -> String {
    format!("{}-l{level}-r{resolution}-p{pixel:05}", kind.id())
}

fn posts(level: u32) -> i32 {
    (1i32 << level) - 1
}

/// Turns one pixel measurement into `(post-selection frequency, success
/// frequency)`; success is 0 when nothing survived.
pub fn pixel_estimate(m: &Measurement, level: u32) -> Result<(f64, f64)> {
    let width = 1usize << level;
    let f = m.frequencies(width)?;
    let x: f64 = m.valid_fraction();
    let success = f[1 << (width - 1)];
    let q = if x > 0.0 { (success / x).clamp(0.0, 1.0) } else { 0.0 };
    Ok((x.clamp(0.0, 1.0), q))
}

/// One job per pixel in row-major order.
pub fn grid_jobs(kind: Kind, level: u32, resolution: usize, shots: u64) -> Result<Vec<Job>> {
    if resolution < 2 {
        return Err(Error::InvalidConfig("grid resolution must be at least 2".into()));
    }
    (0..resolution * resolution)
        .map(|p| {
            let z = pixel_center(resolution, p / resolution, p % resolution);
            Ok(Job::new(pixel_job_id(kind, level, resolution, p), kind.circuit(level, z)?, shots))
        })
        .collect()
}

/// Runs every pixel of a `resolution × resolution` grid.
pub fn run_grid(kind: Kind, level: u32, resolution: usize, shots: u64, exec: &Executor) -> Result<LevelRun> {
    let ms = exec.run(&grid_jobs(kind, level, resolution, shots)?)?;
    level_run_from(kind, level, resolution, shots, &ms)
}

/// Assembles a [`LevelRun`] from per-pixel measurements in row-major order.
pub fn level_run_from(kind: Kind, level: u32, resolution: usize, shots: u64, ms: &[Measurement]) -> Result<LevelRun> {
    if ms.len() != resolution * resolution {
        return Err(Error::ResolutionMismatch(resolution * resolution, ms.len()));
    }
    let m = f64::from(posts(level));
    let mut raw = Vec::with_capacity(ms.len());
    let mut ps = Vec::with_capacity(ms.len());
    let mut one = Vec::with_capacity(ms.len());
    for meas in ms {
        let (x, q) = pixel_estimate(meas, level)?;
        raw.push(x);
        ps.push(x.powf(1.0 / m));
        one.push(q);
    }
    Ok(LevelRun {
        kind,
        level,
        shots,
        ps_raw: PixelGrid::new(resolution, raw),
        grid_ps: PixelGrid::new(resolution, ps),
        grid_1: PixelGrid::new(resolution, one),
    })
}

/// Analytic `(geometric-mean post-selection, success)` images.
pub fn oracle_grids(kind: Kind, level: u32, resolution: usize) -> (PixelGrid, PixelGrid) {
    let m = f64::from(posts(level));
    let (mut ps, mut one) = (Vec::new(), Vec::new());
    for p in 0..resolution * resolution {
        let z = pixel_center(resolution, p / resolution, p % resolution);
        let (pps, p1) = kind.analytic(level, z);
        ps.push(pps.powf(1.0 / m));
        one.push(p1);
    }
    (PixelGrid::new(resolution, ps), PixelGrid::new(resolution, one))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridScores {
    pub score_ps: ScoreWithError,
    pub score_1: ScoreWithError,
}

/// RMS differences to the oracle images with propagated binomial errors.
pub fn score_grids(run: &LevelRun, oracle_ps: &PixelGrid, oracle_1: &PixelGrid) -> Result<GridScores> {
    let r = run.grid_ps.resolution;
    if oracle_ps.resolution != r || oracle_1.resolution != r {
        return Err(Error::ResolutionMismatch(r, oracle_ps.resolution.max(oracle_1.resolution)));
    }
    let shots = run.shots as f64;
    let m = f64::from(posts(run.level));
    let (mut dps, mut err_ps) = (Vec::new(), Vec::new());
    let (mut d1, mut err_1) = (Vec::new(), Vec::new());
    for k in 0..r * r {
        let x = run.ps_raw.values[k];
        let dx = crate::analysis::binomial_stderr(x, shots);
        let dp = if x > 0.0 { x.powf(1.0 / m - 1.0) * dx / m } else { 0.0 };
        dps.push(run.grid_ps.values[k] - oracle_ps.values[k]);
        err_ps.push(dp);
        let q = run.grid_1.values[k];
        let dq = if x > 0.0 { crate::analysis::binomial_stderr(q, x * shots) } else { 0.0 };
        d1.push(q - oracle_1.values[k]);
        err_1.push(dq);
    }
    Ok(GridScores { score_ps: rms_with_error(&dps, &err_ps), score_1: rms_with_error(&d1, &err_1) })
}

/// `√(Σd²/P)` with `Δ = √(Σ(d·Δd)²)/(P·rms)`.
fn rms_with_error(d: &[f64], err: &[f64]) -> ScoreWithError {
    let p = d.len() as f64;
    let rms = (d.iter().map(|x| x * x).sum::<f64>() / p).sqrt();
    if rms == 0.0 {
        return ScoreWithError::new(0.0, 0.0);
    }
    let prop = d.iter().zip(err).map(|(x, e)| (x * e).powi(2)).sum::<f64>().sqrt();
    ScoreWithError::new(rms, prop / (p * rms))
}

/// Mean of the four level-1 and level-2 scores, errors in quadrature.
pub fn overall_score(level1: &GridScores, level2: &GridScores) -> ScoreWithError {
    ScoreWithError::mean_quadrature(&[level1.score_ps, level1.score_1, level2.score_ps, level2.score_1])
}
