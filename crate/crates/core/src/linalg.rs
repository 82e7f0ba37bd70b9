//! Small fixed-size complex linear algebra: 2-vectors and 2×2 blocks.
//!
//! Everything the structure analysis does per cell happens in `C²`, so the
//! singular values, kernels and Hermitian eigenpairs are computed in closed
//! form here instead of going through a dense decomposition.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// A vector in one cell `H_x = C²`.
pub type V2 = [C64; 2];

/// Threshold below which a vector component counts as zero for the
/// phase convention.
const PHASE_CONVENTION_TOL: f64 = 1e-12;

/// `⟨u, v⟩`, antilinear in the first slot.
pub fn dot(u: &V2, v: &V2) -> C64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

pub fn norm(v: &V2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

pub fn scale(v: &V2, s: C64) -> V2 {
    [v[0] * s, v[1] * s]
}

pub fn normalize(v: &V2) -> Option<V2> {
    let n = norm(v);
    if n > 0.0 && n.is_finite() {
        Some([v[0] / n, v[1] / n])
    } else {
        None
    }
}

/// The unit vector orthogonal to the unit vector `v`, before any phase fixing.
pub fn complement(v: &V2) -> V2 {
    [-v[1].conj(), v[0].conj()]
}

/// Rotate `v` by a unit phase so its first non-negligible component is real
/// and positive (component 1 preferred).
pub fn fix_phase(v: &V2) -> V2 {
    let pivot = if v[0].norm() > PHASE_CONVENTION_TOL {
        v[0]
    } else {
        v[1]
    };
    if pivot.norm() == 0.0 {
        return *v;
    }
    let ph = pivot.conj() / pivot.norm();
    [v[0] * ph, v[1] * ph]
}

/// Removes the `u` component from `v` and renormalizes.
pub fn orthonormalize_against(v: &V2, u: &V2) -> Option<V2> {
    let c = dot(u, v);
    normalize(&[v[0] - u[0] * c, v[1] - u[1] * c])
}

/// Distance on the circle between two angles.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_phase(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    // rounding can leave a value a hair below 2π
    if w >= 2.0 * PI - 1e-12 {
        0.0
    } else {
        w
    }
}

pub fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// A 2×2 complex block, row-major: `m[row][col]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Default for Mat2 {
    fn default() -> Self {
        Mat2::zero()
    }
}

impl Mat2 {
    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Mat2::new(m00.into(), m01.into(), m10.into(), m11.into())
    }

    pub fn diag(d0: C64, d1: C64) -> Self {
        Mat2([[d0, ZERO], [ZERO, d1]])
    }

    /// `|k⟩⟨v|`.
    pub fn outer(k: &V2, v: &V2) -> Self {
        Mat2([
            [k[0] * v[0].conj(), k[0] * v[1].conj()],
            [k[1] * v[0].conj(), k[1] * v[1].conj()],
        ])
    }

    /// The matrix whose columns are `c0`, `c1`.
    pub fn from_columns(c0: &V2, c1: &V2) -> Self {
        Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
    }

    pub fn column(&self, j: usize) -> V2 {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn row(&self, i: usize) -> V2 {
        self.0[i]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn apply(&self, v: &V2) -> V2 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|z| *z == ZERO)
    }

    /// Singular values `(σ_max, σ_min)`.
    pub fn singular_values(&self) -> (f64, f64) {
        let t = self.frobenius_sqr();
        let d = self.det().norm();
        let disc = (t * t - 4.0 * d * d).max(0.0).sqrt();
        let smax = ((t + disc) / 2.0).sqrt();
        let smin = if smax > 0.0 { d / smax } else { 0.0 };
        (smax, smin)
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        self.singular_values().0
    }

    /// Unit vector spanning the dominant left singular direction (the range
    /// of a rank-1 block).
    pub fn range_direction(&self) -> Option<V2> {
        let aat = *self * self.adjoint();
        hermitian_eigvec(&aat, true)
    }

    /// Unit vector spanning the weakest right singular direction (the kernel
    /// of a rank-1 block).
    pub fn kernel_direction(&self) -> Option<V2> {
        let ata = self.adjoint() * *self;
        hermitian_eigvec(&ata, false)
    }

    /// Eigenvalues and orthonormal eigenvectors of a normal 2×2 matrix.
    ///
    /// Degenerate eigenvalues (within `tol`) return the standard basis.
    pub fn normal_eigen(&self, tol: f64) -> ([C64; 2], [V2; 2]) {
        let tr = self.trace();
        let det = self.det();
        let disc = (tr * tr - det * 4.0).sqrt();
        let l0 = (tr + disc) / 2.0;
        let l1 = (tr - disc) / 2.0;
        if (l0 - l1).norm() <= tol {
            return ([l0, l1], [[ONE, ZERO], [ZERO, ONE]]);
        }
        // rows of (A - l0 I) annihilate the l0 eigenvector
        let shifted = *self - Mat2::identity().scale(l0);
        let v0 = shifted.kernel_direction().unwrap_or([ONE, ZERO]);
        let v0 = fix_phase(&v0);
        let v1 = fix_phase(&complement(&v0));
        ([l0, l1], [v0, v1])
    }

    /// `‖A*A − I‖` as a unitarity residual for a single block.
    pub fn unitarity_residual(&self) -> f64 {
        (self.adjoint() * *self - Mat2::identity()).norm()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut r = self;
        r += o;
        r
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        for i in 0..2 {
            for j in 0..2 {
                self.0[i][j] += o.0[i][j];
            }
        }
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        let mut r = [[ZERO; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }
}

/// Unit eigenvector of a Hermitian 2×2 matrix for its largest (`top`) or
/// smallest eigenvalue.
fn hermitian_eigvec(h: &Mat2, top: bool) -> Option<V2> {
    let a = h.0[0][0].re;
    let d = h.0[1][1].re;
    let b = h.0[0][1];
    let half = (a - d) / 2.0;
    let rad = (half * half + b.norm_sqr()).sqrt();
    let mean = (a + d) / 2.0;
    let lambda = if top { mean + rad } else { mean - rad };
    if !lambda.is_finite() {
        return None;
    }
    if b.norm() <= f64::EPSILON * rad.max(f64::MIN_POSITIVE) {
        // already diagonal
        let first = if top { a >= d } else { a <= d };
        return Some(if first { [ONE, ZERO] } else { [ZERO, ONE] });
    }
    // (H - λ) v = 0: two candidate kernels, take the better conditioned one
    let c0 = [b, C64::from(lambda - a)];
    let c1 = [C64::from(lambda - d), b.conj()];
    let v = if norm(&c0) >= norm(&c1) { c0 } else { c1 };
    normalize(&v)
}

/// Random-free deterministic helpers used in tests across modules.
#[cfg(test)]
pub(crate) fn approx_v2(u: &V2, v: &V2, tol: f64) -> bool {
    (u[0] - v[0]).norm() <= tol && (u[1] - v[1]).norm() <= tol
}
