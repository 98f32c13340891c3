//! Quantum signal processing phases for real odd polynomials.
//!
//! Phases are found in the `W(x) = e^{i arccos(x) σx}` convention by
//! completing `P` to a unitary polynomial matrix and stripping one layer at a
//! time, then translated to the reflection convention used by the QSVT
//! circuit, where each block-encoding call acts as
//! `R(x) = [[x, √(1−x²)], [√(1−x²), −x]]` on the relevant 2-d subspace.
//! A few Gauss–Newton steps on the final phases recover the digits lost in
//! root finding.

use crate::error::{Error, Result};
use crate::gates::{Mat2, C64};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

const ROOT_POLISH_STEPS: usize = 8;
const REFINE_STEPS: usize = 30;
/// Largest accepted deviation of the realized polynomial from the target.
pub const PHASE_TOLERANCE: f64 = 1e-9;

/// Laurent polynomial in `w` with coefficients for powers `−deg..=deg`.
#[derive(Debug, Clone, PartialEq)]
struct Laurent {
    deg: i64,
    c: Vec<C64>,
}

impl Laurent {
    fn zero(deg: i64) -> Self {
        Self { deg, c: vec![C64::new(0.0, 0.0); (2 * deg + 1) as usize] }
    }

    fn get(&self, k: i64) -> C64 {
        if k.abs() > self.deg {
            C64::new(0.0, 0.0)
        } else {
            self.c[(k + self.deg) as usize]
        }
    }

    fn add(&mut self, k: i64, v: C64) {
        let idx = (k + self.deg) as usize;
        self.c[idx] += v;
    }

    fn mul(&self, other: &Laurent) -> Laurent {
        let mut out = Laurent::zero(self.deg + other.deg);
        for a in -self.deg..=self.deg {
            for b in -other.deg..=other.deg {
                out.add(a + b, self.get(a) * other.get(b));
            }
        }
        out
    }

    /// `x^m` expansions with `x = (w + w⁻¹)/2`, summed against monomial
    /// coefficients.
    fn from_monomials(coef: &[f64]) -> Laurent {
        let deg = coef.len().saturating_sub(1) as i64;
        let mut out = Laurent::zero(deg);
        let mut power = Laurent::zero(0);
        power.add(0, C64::new(1.0, 0.0));
        let half = Laurent { deg: 1, c: vec![C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0)] };
        for (m, &cm) in coef.iter().enumerate() {
            if m > 0 {
                power = power.mul(&half);
            }
            for k in -power.deg..=power.deg {
                out.add(k, power.get(k) * cm);
            }
        }
        out
    }
}

/// Evaluates `Σ coef[m] x^m`.
pub fn eval_poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn eval_cpoly(coef: &[C64], z: C64) -> C64 {
    coef.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Roots of `Σ coef[m] z^m` (real coefficients, nonzero leading term) from
/// the companion matrix, refined by Newton steps.
fn poly_roots(coef: &[f64]) -> Result<Vec<C64>> {
    let m = coef.len() - 1;
    let lead = coef[m];
    if lead == 0.0 {
        return Err(Error::NoConvergence("degenerate complementary polynomial".into()));
    }
    let mut comp = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..m {
        comp[(i, m - 1)] = -coef[i] / lead;
    }
    let roots = comp.complex_eigenvalues();
    let cc: Vec<C64> = coef.iter().map(|&v| C64::new(v, 0.0)).collect();
    let dc: Vec<C64> = (1..=m).map(|k| cc[k] * k as f64).collect();
    Ok(roots
        .iter()
        .map(|&r0| {
            let mut r = r0;
            for _ in 0..ROOT_POLISH_STEPS {
                let d = eval_cpoly(&dc, r);
                if d.norm() < 1e-300 {
                    break;
                }
                let step = eval_cpoly(&cc, r) / d;
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                r -= step;
            }
            r
        })
        .collect())
}

fn diag(a: C64, b: C64) -> Mat2 {
    Mat2::new(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), b)
}

fn ez(phi: f64) -> Mat2 {
    diag(C64::from_polar(1.0, phi), C64::from_polar(1.0, -phi))
}

/// `W(x) = [[x, i√(1−x²)], [i√(1−x²), x]]`.
pub fn signal_w(x: f64) -> Mat2 {
    let s = C64::new(0.0, (1.0 - x * x).max(0.0).sqrt());
    Mat2::new(C64::new(x, 0.0), s, s, C64::new(x, 0.0))
}

/// `R(x) = [[x, √(1−x²)], [√(1−x²), −x]]`.
pub fn signal_r(x: f64) -> Mat2 {
    let s = C64::new((1.0 - x * x).max(0.0).sqrt(), 0.0);
    Mat2::new(C64::new(x, 0.0), s, s, C64::new(-x, 0.0))
}

/// `e^{iψ₀Z} Π_j W(x) e^{iψ_jZ}` for `psi = [ψ₀, …, ψ_d]`.
pub fn w_product(psi: &[f64], x: f64) -> Mat2 {
    let w = signal_w(x);
    psi[1..].iter().fold(ez(psi[0]), |m, &p| m * w * ez(p))
}

/// `e^{iφ_dZ} R(x) ⋯ e^{iφ₁Z} R(x)`: one `R` followed by one phase per
/// circuit step, in time order.
pub fn r_product(phases: &[f64], x: f64) -> Mat2 {
    let r = signal_r(x);
    phases.iter().fold(Mat2::identity(), |m, &p| ez(p) * r * m)
}

/// Phase list for the QSVT circuit together with the polynomial it realizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSequence {
    pub degree: usize,
    /// `φ_1..φ_d` in circuit order.
    pub phases: Vec<f64>,
    /// Monomial coefficients of the target polynomial.
    pub coefficients: Vec<f64>,
}

impl PhaseSequence {
    /// `Re⟨0|e^{iφ_dZ}R ⋯ e^{iφ₁Z}R|0⟩`, the valid-block amplitude.
    pub fn value(&self, x: f64) -> f64 {
        r_product(&self.phases, x)[(0, 0)].re
    }

    /// Largest deviation from the target over `nodes` Chebyshev nodes.
    pub fn max_error(&self, nodes: usize) -> f64 {
        chebyshev_nodes(nodes)
            .into_iter()
            .map(|x| (self.value(x) - eval_poly(&self.coefficients, x)).abs())
            .fold(0.0, f64::max)
    }
}

pub fn chebyshev_nodes(k: usize) -> Vec<f64> {
    (0..k).map(|j| ((2 * j + 1) as f64 * PI / (2 * k) as f64).cos()).collect()
}

fn check_target(coef: &[f64]) -> Result<usize> {
    let d = coef.len().saturating_sub(1);
    if d == 0 || d.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("polynomial degree {d} is not odd")));
    }
    if coef.iter().step_by(2).any(|&c| c != 0.0) {
        return Err(Error::InvalidConfig("polynomial has even terms".into()));
    }
    if coef[d] == 0.0 {
        return Err(Error::InvalidConfig("leading coefficient is zero".into()));
    }
    let max = (0..=2000).map(|k| eval_poly(coef, -1.0 + k as f64 / 1000.0).abs()).fold(0.0, f64::max);
    if max > 1.0 + 1e-12 {
        return Err(Error::InvalidConfig(format!("polynomial exceeds 1 in magnitude ({max})")));
    }
    Ok(d)
}

/// `W`-convention phases `ψ₀..ψ_d` with `Re⟨0|e^{iψ₀Z} Π W(x)e^{iψ_jZ}|0⟩ = P(x)`.
pub fn w_phases(coef: &[f64]) -> Result<Vec<f64>> {
    let d = check_target(coef)? as i64;
    let p = Laurent::from_monomials(coef);
    // 1 − P² as a Laurent polynomial; only even powers of w occur, so it
    // is a polynomial of degree 2d in u = w² after multiplying by u^d.
    let p2 = p.mul(&p);
    let mut g = vec![0.0; (2 * d + 1) as usize];
    for k in (-2 * d..=2 * d).step_by(2) {
        let one = if k == 0 { 1.0 } else { 0.0 };
        g[(k / 2 + d) as usize] = one - p2.get(k).re;
    }
    let mut roots = poly_roots(&g)?;
    roots.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    roots.truncate(d as usize);
    // Monic polynomial with the inner roots: h(w) = K w^{−d} Π (w² − r).
    let mut h_u = vec![C64::new(1.0, 0.0)];
    for r in &roots {
        let mut next = vec![C64::new(0.0, 0.0); h_u.len() + 1];
        for (i, &a) in h_u.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * r;
        }
        h_u = next;
    }
    let theta: f64 = 0.7;
    let w = C64::from_polar(1.0, theta);
    let hw = eval_cpoly(&h_u, w * w) * w.powi(-(d as i32));
    let k = (1.0 - eval_poly(coef, theta.cos()).powi(2)).max(0.0).sqrt() / hw.norm();
    let mut h = Laurent::zero(d);
    for (j, a) in h_u.iter().enumerate() {
        h.add(2 * j as i64 - d, C64::new(a.re * k, 0.0));
    }
    // Coefficients of the unitary [[P + ia, i sinθ b], [i sinθ b, P − ia]].
    let i = C64::new(0.0, 1.0);
    let mut coeffs: Vec<Mat2> = (-d..=d)
        .map(|k| {
            let pk = p.get(k);
            let s = (h.get(k) + h.get(-k)) * 0.5;
            let t = (h.get(k) - h.get(-k)) / (2.0 * i);
            Mat2::new(pk + i * s, i * t, i * t, pk - i * s)
        })
        .collect();
    let plus = Mat2::new(C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0));
    let minus = Mat2::identity() - plus;
    let mut psi = Vec::with_capacity(d as usize + 1);
    let mut deg = d;
    while deg > 0 {
        let top = coeffs[(2 * deg) as usize];
        let row = if top[(0, 0)].norm() + top[(0, 1)].norm() >= top[(1, 0)].norm() + top[(1, 1)].norm() { 0 } else { 1 };
        if top[(row, 1)].norm() < 1e-14 {
            return Err(Error::NoConvergence(format!("layer {deg} cannot be stripped")));
        }
        let phi = (top[(row, 0)] / top[(row, 1)]).arg() / 2.0;
        let undo = ez(-phi);
        let mut next = vec![Mat2::zeros(); (2 * deg - 1) as usize];
        for (idx, m) in coeffs.iter().enumerate() {
            let k = idx as i64 - deg;
            let a = m * undo;
            let lo = k - 1 + (deg - 1);
            let hi = k + 1 + (deg - 1);
            if (0..2 * deg - 1).contains(&lo) {
                next[lo as usize] += a * plus;
            }
            if (0..2 * deg - 1).contains(&hi) {
                next[hi as usize] += a * minus;
            }
        }
        coeffs = next;
        psi.push(phi);
        deg -= 1;
    }
    psi.push(coeffs[0][(0, 0)].arg());
    psi.reverse();
    Ok(psi)
}

/// Circuit phases `φ_1..φ_d` realizing `P` in the valid block:
/// `φ_{d−j} = ψ_j + π/2` for `0 < j < d` and `φ_d = ψ₀ + ψ_d + (1−d)π/2`.
///
/// Reliable through degree 13. Beyond that a small fraction of targets end
/// in `NoConvergence` rather than phases outside [`PHASE_TOLERANCE`].
pub fn qsp_phases(coef: &[f64]) -> Result<PhaseSequence> {
    let d = check_target(coef)?;
    let phases = if d == 1 {
        vec![(coef[1]).clamp(-1.0, 1.0).acos()]
    } else {
        let psi = w_phases(coef)?;
        let mut phi = vec![0.0; d + 1];
        for j in 1..d {
            phi[d - j] = psi[j] + FRAC_PI_2;
        }
        phi[d] = psi[0] + psi[d] + (1.0 - d as f64) * FRAC_PI_2;
        refine(phi.into_iter().skip(1).collect(), coef)
    };
    let seq = PhaseSequence { degree: d, phases: phases.into_iter().map(wrap).collect(), coefficients: coef.to_vec() };
    let err = seq.max_error(4 * d + 8);
    if err > PHASE_TOLERANCE {
        return Err(Error::NoConvergence(format!("degree {d} phases miss the target by {err:e}")));
    }
    Ok(seq)
}

/// Gauss–Newton polish of the factorization phases. Root finding loses
/// digits quickly with degree, the residual against the target does not.
fn refine(mut phases: Vec<f64>, coef: &[f64]) -> Vec<f64> {
    let nodes = chebyshev_nodes(2 * phases.len() + 2);
    let residual = |ph: &[f64]| -> DVector<f64> {
        DVector::from_iterator(nodes.len(), nodes.iter().map(|&x| r_product(ph, x)[(0, 0)].re - eval_poly(coef, x)))
    };
    let mut r = residual(&phases);
    for _ in 0..REFINE_STEPS {
        if r.amax() < 1e-15 {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::<f64>::zeros(nodes.len(), phases.len());
        for j in 0..phases.len() {
            let mut up = phases.clone();
            let mut down = phases.clone();
            up[j] += h;
            down[j] -= h;
            jac.set_column(j, &((residual(&up) - residual(&down)) / (2.0 * h)));
        }
        let Ok(step) = jac.svd(true, true).solve(&r, 1e-10) else { break };
        let trial: Vec<f64> = phases.iter().zip(step.iter()).map(|(p, s)| p - s).collect();
        let rt = residual(&trial);
        if rt.amax() >= r.amax() {
            break;
        }
        phases = trial;
        r = rt;
    }
    phases
}

fn wrap(a: f64) -> f64 {
    let t = a.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn laurent_of_monomials() {
        // x³ = (w³ + 3w + 3w⁻¹ + w⁻³)/8
        let l = Laurent::from_monomials(&[0.0, 0.0, 0.0, 1.0]);
        assert!((l.get(3).re - 0.125).abs() < 1e-15 && (l.get(1).re - 0.375).abs() < 1e-15);
        assert_eq!(l.get(2), C64::new(0.0, 0.0));
    }

    #[test]
    fn roots_of_quadratic() {
        let mut r = poly_roots(&[2.0, -3.0, 1.0]).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0].re - 1.0).abs() < 1e-12 && (r[1].re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_polynomial() {
        let seq = qsp_phases(&[0.0, 1.0]).unwrap();
        assert_eq!(seq.phases, vec![0.0]);
        assert!(seq.max_error(50) < 1e-12);
    }

    #[test]
    fn inversion_polynomial_phases() {
        let c = 0.464_749_3;
        let coef = [0.0, 5.0 * c, 0.0, -4.0 * c];
        let seq = qsp_phases(&coef).unwrap();
        assert_eq!(seq.phases.len(), 3);
        assert!(seq.max_error(50) < 1e-9);
        let psi = w_phases(&coef).unwrap();
        for x in chebyshev_nodes(50) {
            assert!((w_product(&psi, x)[(0, 0)].re - eval_poly(&coef, x)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_targets() {
        assert!(qsp_phases(&[0.0, 0.5, 0.1]).is_err());
        assert!(qsp_phases(&[0.1, 0.5]).is_err());
        assert!(qsp_phases(&[0.0, 2.0]).is_err());
    }

    fn scaled(raw: Vec<f64>) -> Vec<f64> {
        let d = 2 * raw.len() - 1;
        let mut coef = vec![0.0; d + 1];
        for (k, v) in raw.into_iter().enumerate() {
            coef[2 * k + 1] = v;
        }
        let max = (0..=4000).map(|k| eval_poly(&coef, -1.0 + k as f64 / 2000.0).abs()).fold(0.0, f64::max);
        coef.iter().map(|v| v * 0.95 / max).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn random_odd_polynomials_round_trip(raw in prop::collection::vec(-1.0f64..1.0, 1..=4)) {
            prop_assume!(raw.last().unwrap().abs() > 0.05);
            let coef = scaled(raw);
            let seq = qsp_phases(&coef).unwrap();
            prop_assert!(seq.max_error(50) < 1e-9, "err {}", seq.max_error(50));
        }
    }
}
