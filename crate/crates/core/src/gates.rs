//! Named single-qubit matrices used by the benchmark circuits.
//!
//! All constructors return 2×2 unitaries in the computational basis
//! `(|0⟩, |1⟩)`. Power gates follow the convention `G^t = exp(iπt(I − G)/2)`,
//! so that `Z^t = diag(1, e^{iπt})` and `Y^t = e^{iπt/2} R_y(πt)`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub(crate) fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity() -> Mat2 {
    Mat2::identity()
}

pub fn x() -> Mat2 {
    Mat2::new(r(0.0), r(1.0), r(1.0), r(0.0))
}

pub fn y() -> Mat2 {
    Mat2::new(r(0.0), c(0.0, -1.0), c(0.0, 1.0), r(0.0))
}

pub fn z() -> Mat2 {
    Mat2::new(r(1.0), r(0.0), r(0.0), r(-1.0))
}

pub fn h() -> Mat2 {
    let s = r(FRAC_1_SQRT_2);
    Mat2::new(s, s, s, -s)
}

pub fn s() -> Mat2 {
    Mat2::new(r(1.0), r(0.0), r(0.0), c(0.0, 1.0))
}

pub fn sdg() -> Mat2 {
    Mat2::new(r(1.0), r(0.0), r(0.0), c(0.0, -1.0))
}

/// `Z^t = diag(1, e^{iπt})`.
pub fn z_pow(t: f64) -> Mat2 {
    Mat2::new(r(1.0), r(0.0), r(0.0), C64::from_polar(1.0, PI * t))
}

/// `Y^t = e^{iπt/2} R_y(πt)`.
pub fn y_pow(t: f64) -> Mat2 {
    let g = C64::from_polar(1.0, PI * t / 2.0);
    ry(PI * t) * g
}

/// `R_y(θ) = exp(−iθY/2)`.
pub fn ry(theta: f64) -> Mat2 {
    let (sn, cs) = (theta / 2.0).sin_cos();
    Mat2::new(r(cs), r(-sn), r(sn), r(cs))
}

/// `R_z(θ) = exp(−iθZ/2)`.
pub fn rz(theta: f64) -> Mat2 {
    Mat2::new(
        C64::from_polar(1.0, -theta / 2.0),
        r(0.0),
        r(0.0),
        C64::from_polar(1.0, theta / 2.0),
    )
}

/// `exp(iθσ_x)`.
pub fn exp_i_x(theta: f64) -> Mat2 {
    let (sn, cs) = theta.sin_cos();
    Mat2::new(r(cs), c(0.0, sn), c(0.0, sn), r(cs))
}

/// `exp(iφσ_z) = diag(e^{iφ}, e^{−iφ})`.
pub fn exp_i_z(phi: f64) -> Mat2 {
    Mat2::new(
        C64::from_polar(1.0, phi),
        r(0.0),
        r(0.0),
        C64::from_polar(1.0, -phi),
    )
}

/// QFT phase gate `R_k = diag(1, e^{2πi/2^k})`.
pub fn qft_phase(k: u32) -> Mat2 {
    let angle = 2.0 * PI / f64::from(2u32.pow(k));
    Mat2::new(r(1.0), r(0.0), r(0.0), C64::from_polar(1.0, angle))
}

/// Real reflection `[[1, r], [r, −1]] / √(1 + r²)` used by the `G_c` block.
pub fn reflection(ratio: f64) -> Mat2 {
    let norm = (1.0 + ratio * ratio).sqrt();
    Mat2::new(r(1.0 / norm), r(ratio / norm), r(ratio / norm), r(-1.0 / norm))
}

/// Max-norm distance of `M†M` from the identity.
pub fn unitarity_error(m: &Mat2) -> f64 {
    let p = m.adjoint() * m - Mat2::identity();
    p.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Max-norm distance between two matrices after removing the best global phase.
pub fn phase_distance(a: &Mat2, b: &Mat2) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        r(1.0)
    };
    (a * phase - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(m: &Mat2, v: [C64; 2]) -> [C64; 2] {
        [m[(0, 0)] * v[0] + m[(0, 1)] * v[1], m[(1, 0)] * v[0] + m[(1, 1)] * v[1]]
    }

    #[test]
    fn constructors_are_unitary() {
        let all = [
            identity(),
            x(),
            y(),
            z(),
            h(),
            s(),
            sdg(),
            z_pow(0.37),
            y_pow(-0.81),
            ry(1.3),
            rz(-2.2),
            exp_i_x(0.4),
            exp_i_z(0.9),
            qft_phase(3),
            reflection(1.27),
        ];
        for m in &all {
            assert!(unitarity_error(m) < 1e-12);
        }
    }

    #[test]
    fn textbook_actions_on_basis_states() {
        let zero = [r(1.0), r(0.0)];
        let one = [r(0.0), r(1.0)];
        assert_eq!(apply(&x(), zero), one);
        let plus = apply(&h(), zero);
        assert!((plus[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((plus[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(apply(&s(), one), [r(0.0), c(0.0, 1.0)]);
        assert_eq!(apply(&z(), one), [r(0.0), r(-1.0)]);
        // Z^1 = Z, Y^1 = Y
        assert!(phase_distance(&z_pow(1.0), &z()) < 1e-12);
        assert!((y_pow(1.0) - y()).norm() < 1e-12);
        assert!((y_pow(0.5) * y_pow(0.5) - y()).norm() < 1e-12);
        // R_2 = S
        assert!((qft_phase(2) - s()).norm() < 1e-15);
    }

    #[test]
    fn rotation_conventions() {
        let t = 0.731;
        assert!((exp_i_x(t) - (identity() * r(t.cos()) + x() * c(0.0, t.sin()))).norm() < 1e-14);
        assert!((exp_i_z(t) - (identity() * r(t.cos()) + z() * c(0.0, t.sin()))).norm() < 1e-14);
        assert!(phase_distance(&rz(t), &z_pow(t / PI)) < 1e-12);
    }
}
