//! Two-by-two real linear algebra: real Jordan forms, closed-form
//! exponentials, the spectral norm and Schur stability.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{DwellError, Result};

/// Default relative tolerance for the repeated-eigenvalue test.
pub const DEFAULT_DISC_TOL: f64 = 1e-9;

pub type Vec2 = [f64; 2];

/// A real 2x2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Matrix2 {
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Matrix2 { a11, a12, a21, a22 }
    }

    pub const fn from_row_major(v: [f64; 4]) -> Self {
        Matrix2::new(v[0], v[1], v[2], v[3])
    }

    pub fn from_cols(c1: Vec2, c2: Vec2) -> Self {
        Matrix2::new(c1[0], c2[0], c1[1], c2[1])
    }

    pub const fn identity() -> Self {
        Matrix2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn zero() -> Self {
        Matrix2::new(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn diag(x: f64, y: f64) -> Self {
        Matrix2::new(x, 0.0, 0.0, y)
    }

    pub fn to_row_major(&self) -> [f64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn col(&self, k: usize) -> Vec2 {
        match k {
            0 => [self.a11, self.a21],
            _ => [self.a12, self.a22],
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Squared Frobenius norm.
    pub fn frob_sq(&self) -> f64 {
        self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22
    }

    pub fn max_abs(&self) -> f64 {
        self.to_row_major()
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.to_row_major().iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Matrix2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn scale(&self, k: f64) -> Self {
        Matrix2::new(k * self.a11, k * self.a12, k * self.a21, k * self.a22)
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(DwellError::Singular);
        }
        Ok(Matrix2::new(
            self.a22 / d,
            -self.a12 / d,
            -self.a21 / d,
            self.a11 / d,
        ))
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Matrix2) -> Matrix2 {
        *self * *other - *other * *self
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(self)
    }

    /// Condition number in the spectral norm.
    pub fn cond(&self) -> Result<f64> {
        Ok(self.norm() * self.inverse()?.norm())
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        let tr = self.trace();
        let det = self.det();
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            let r = disc.sqrt();
            ((tr + r) / 2.0).abs().max(((tr - r) / 2.0).abs())
        } else {
            det.abs().sqrt()
        }
    }

    /// Largest real part among the eigenvalues.
    pub fn max_real_part(&self) -> f64 {
        let tr = self.trace();
        let disc = tr * tr - 4.0 * self.det();
        if disc >= 0.0 {
            (tr + disc.sqrt()) / 2.0
        } else {
            tr / 2.0
        }
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, b: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 * b.a11 + self.a12 * b.a21,
            self.a11 * b.a12 + self.a12 * b.a22,
            self.a21 * b.a11 + self.a22 * b.a21,
            self.a21 * b.a12 + self.a22 * b.a22,
        )
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, b: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 + b.a11,
            self.a12 + b.a12,
            self.a21 + b.a21,
            self.a22 + b.a22,
        )
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, b: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 - b.a11,
            self.a12 - b.a12,
            self.a21 - b.a21,
            self.a22 - b.a22,
        )
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self.scale(-1.0)
    }
}

impl fmt::Display for Matrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}, {}, {}]",
            self.a11, self.a12, self.a21, self.a22
        )
    }
}

pub fn vnorm(v: Vec2) -> f64 {
    v[0].hypot(v[1])
}

pub fn vdot(u: Vec2, v: Vec2) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

/// `det[u v]` for column vectors.
pub fn vcross(u: Vec2, v: Vec2) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

/// Real Jordan form of a planar Hurwitz matrix. Rates are positive, so the
/// eigenvalues are `-p`, `-q`, `-alpha +- i beta` or `-n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum JordanForm {
    RealDiagonal { p: f64, q: f64 },
    Complex { alpha: f64, beta: f64 },
    Defective { n: f64 },
    Scalar { p: f64 },
}

impl JordanForm {
    /// The canonical block `J`.
    pub fn matrix(&self) -> Matrix2 {
        match *self {
            JordanForm::RealDiagonal { p, q } => Matrix2::diag(-p, -q),
            JordanForm::Complex { alpha, beta } => Matrix2::new(-alpha, beta, -beta, -alpha),
            JordanForm::Defective { n } => Matrix2::new(-n, 1.0, 0.0, -n),
            JordanForm::Scalar { p } => Matrix2::diag(-p, -p),
        }
    }

    /// Decay rate of the eigenvalue closest to the imaginary axis.
    pub fn slowest_rate(&self) -> f64 {
        match *self {
            JordanForm::RealDiagonal { p, .. } => p,
            JordanForm::Complex { alpha, .. } => alpha,
            JordanForm::Defective { n } => n,
            JordanForm::Scalar { p } => p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            JordanForm::RealDiagonal { .. } => "real-diagonal",
            JordanForm::Complex { .. } => "complex",
            JordanForm::Defective { .. } => "defective",
            JordanForm::Scalar { .. } => "scalar",
        }
    }

    pub fn expm(&self, t: f64) -> Matrix2 {
        expm_jordan(self, t)
    }
}

/// `A = P J P^-1` with `|det P| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanDecomposition {
    pub form: JordanForm,
    pub basis: Matrix2,
    /// Sign of `det P`.
    pub basis_det: f64,
    /// Set when the discriminant sits within ten times the tolerance of the
    /// repeated-eigenvalue boundary.
    pub near_boundary: bool,
}

impl JordanDecomposition {
    pub fn reconstruct(&self) -> Matrix2 {
        let pinv = self.basis.inverse().expect("basis is unimodular");
        self.basis * self.form.matrix() * pinv
    }

    /// `e^{A t}` through the closed-form block exponential.
    pub fn expm(&self, t: f64) -> Matrix2 {
        let pinv = self.basis.inverse().expect("basis is unimodular");
        self.basis * expm_jordan(&self.form, t) * pinv
    }
}

fn null_vector(b: &Matrix2) -> Vec2 {
    let r1 = [b.a11, b.a12];
    let r2 = [b.a21, b.a22];
    let r = if vnorm(r1) >= vnorm(r2) { r1 } else { r2 };
    if r == [0.0, 0.0] {
        return [1.0, 0.0];
    }
    [-r[1], r[0]]
}

fn unimodular(c1: Vec2, c2: Vec2) -> Result<(Matrix2, f64)> {
    let p = Matrix2::from_cols(c1, c2);
    let d = p.det();
    if d == 0.0 || !d.is_finite() {
        return Err(DwellError::Singular);
    }
    Ok((p.scale(1.0 / d.abs().sqrt()), d.signum()))
}

/// Classify a Hurwitz matrix and build a unimodular real Jordan basis.
///
/// `tol` is relative: eigenvalue real parts must lie below `-tol ||A||`, and a
/// discriminant within `tol max(1, ||A||^2)` of zero counts as a repeated
/// eigenvalue.
pub fn classify_jordan(a: &Matrix2, tol: f64) -> Result<JordanDecomposition> {
    if !a.is_finite() {
        return Err(DwellError::InvalidInput("non-finite matrix entry".into()));
    }
    let norm = spectral_norm(a);
    let max_re = a.max_real_part();
    if !(max_re < -tol * norm) || norm == 0.0 {
        return Err(DwellError::NotHurwitz {
            max_real_part: max_re,
        });
    }
    let tr = a.trace();
    let det = a.det();
    let disc = tr * tr - 4.0 * det;
    let scale = norm.max(1.0).powi(2);
    let near_boundary = disc.abs() > tol * scale && disc.abs() <= 10.0 * tol * scale;

    if disc.abs() <= tol * scale {
        let n = -tr / 2.0;
        let nil = *a + Matrix2::diag(n, n);
        let nn = spectral_norm(&nil);
        if nn <= tol * norm {
            return Ok(JordanDecomposition {
                form: JordanForm::Scalar { p: n },
                basis: Matrix2::identity(),
                basis_det: 1.0,
                near_boundary: false,
            });
        }
        if nn <= tol.sqrt() * norm {
            return Err(DwellError::Degenerate {
                first: "defective",
                second: "scalar",
            });
        }
        let (j, x) = if vnorm(nil.col(0)) >= vnorm(nil.col(1)) {
            ([1.0, 0.0], nil.col(0))
        } else {
            ([0.0, 1.0], nil.col(1))
        };
        let (basis, basis_det) = unimodular(x, j)?;
        return Ok(JordanDecomposition {
            form: JordanForm::Defective { n },
            basis,
            basis_det,
            near_boundary: false,
        });
    }

    if disc > 0.0 {
        let r = disc.sqrt();
        // -q first, then -p = det / (-q) to dodge cancellation
        let lam_fast = (tr - r) / 2.0;
        let lam_slow = det / lam_fast;
        let v_slow = null_vector(&(*a - Matrix2::diag(lam_slow, lam_slow)));
        let v_fast = null_vector(&(*a - Matrix2::diag(lam_fast, lam_fast)));
        let (basis, basis_det) = unimodular(
            [v_slow[0] / vnorm(v_slow), v_slow[1] / vnorm(v_slow)],
            [v_fast[0] / vnorm(v_fast), v_fast[1] / vnorm(v_fast)],
        )?;
        return Ok(JordanDecomposition {
            form: JordanForm::RealDiagonal {
                p: -lam_slow,
                q: -lam_fast,
            },
            basis,
            basis_det,
            near_boundary,
        });
    }

    let alpha = -tr / 2.0;
    let beta = (-disc).sqrt() / 2.0;
    let (re, im) = if a.a12.abs() >= a.a21.abs() {
        ([-a.a12, a.a11 + alpha], [0.0, -beta])
    } else {
        ([a.a22 + alpha, -a.a21], [-beta, 0.0])
    };
    let (basis, basis_det) = unimodular(re, im)?;
    Ok(JordanDecomposition {
        form: JordanForm::Complex { alpha, beta },
        basis,
        basis_det,
        near_boundary,
    })
}

/// `e^{J t}` in closed form.
pub fn expm_jordan(j: &JordanForm, t: f64) -> Matrix2 {
    match *j {
        JordanForm::RealDiagonal { p, q } => Matrix2::diag((-p * t).exp(), (-q * t).exp()),
        JordanForm::Complex { alpha, beta } => {
            let e = (-alpha * t).exp();
            let (s, c) = (beta * t).sin_cos();
            Matrix2::new(e * c, e * s, -e * s, e * c)
        }
        JordanForm::Defective { n } => {
            let e = (-n * t).exp();
            Matrix2::new(e, e * t, 0.0, e)
        }
        JordanForm::Scalar { p } => {
            let e = (-p * t).exp();
            Matrix2::diag(e, e)
        }
    }
}

/// Largest singular value.
pub fn spectral_norm(k: &Matrix2) -> f64 {
    let s = k.frob_sq();
    let d = k.det().abs();
    let gap = ((s - 2.0 * d).max(0.0) * (s + 2.0 * d)).sqrt();
    ((s + gap) / 2.0).sqrt()
}

/// `|tr K| < 1 + det K` and `|det K| < 1`.
pub fn is_schur_stable(k: &Matrix2) -> bool {
    let det = k.det();
    k.trace().abs() < 1.0 + det && det.abs() < 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rel_err(a: &Matrix2, b: &Matrix2) -> f64 {
        spectral_norm(&(*a - *b)) / spectral_norm(b)
    }

    #[test]
    fn diag_classifies_real() {
        let a = Matrix2::diag(-0.2, -0.42);
        let d = classify_jordan(&a, DEFAULT_DISC_TOL).unwrap();
        match d.form {
            JordanForm::RealDiagonal { p, q } => {
                assert_relative_eq!(p, 0.2, epsilon = 1e-15);
                assert_relative_eq!(q, 0.42, epsilon = 1e-15);
            }
            f => panic!("{f:?}"),
        }
        assert!(rel_err(&d.reconstruct(), &a) < 1e-14);
    }

    #[test]
    fn x3_is_complex() {
        let a = Matrix2::new(0.0, 1.0, -2.0, -1.0);
        let d = classify_jordan(&a, DEFAULT_DISC_TOL).unwrap();
        match d.form {
            JordanForm::Complex { alpha, beta } => {
                assert_relative_eq!(alpha, 0.5, epsilon = 1e-15);
                assert_relative_eq!(beta, 7f64.sqrt() / 2.0, epsilon = 1e-15);
            }
            f => panic!("{f:?}"),
        }
        assert!(rel_err(&d.reconstruct(), &a) < 1e-14);
        assert_relative_eq!(d.basis.det().abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn x8_is_defective() {
        let a = Matrix2::new(-113.0, -25.0, 361.0, 77.0).scale(1.0 / 18.0);
        let d = classify_jordan(&a, DEFAULT_DISC_TOL).unwrap();
        assert!(matches!(d.form, JordanForm::Defective { n } if (n - 1.0).abs() < 1e-12));
        assert!(rel_err(&d.reconstruct(), &a) < 1e-10);
    }

    #[test]
    fn scalar_and_errors() {
        let a = Matrix2::diag(-3.0, -3.0);
        let d = classify_jordan(&a, DEFAULT_DISC_TOL).unwrap();
        assert_eq!(d.form, JordanForm::Scalar { p: 3.0 });
        assert!(matches!(
            classify_jordan(&Matrix2::diag(1.0, -1.0), DEFAULT_DISC_TOL),
            Err(DwellError::NotHurwitz { .. })
        ));
        assert!(classify_jordan(&Matrix2::zero(), DEFAULT_DISC_TOL).is_err());
    }

    #[test]
    fn expm_known_values() {
        for j in [
            JordanForm::RealDiagonal { p: 0.1, q: 0.2 },
            JordanForm::Complex { alpha: 0.3, beta: 2.0 },
            JordanForm::Defective { n: 1.0 },
            JordanForm::Scalar { p: 0.5 },
        ] {
            assert_eq!(expm_jordan(&j, 0.0), Matrix2::identity());
        }
        let e = expm_jordan(&JordanForm::Defective { n: 1.0 }, 2.0);
        let k = (-2f64).exp();
        assert_relative_eq!(e.a11, k);
        assert_relative_eq!(e.a12, 2.0 * k);
        assert_eq!(e.a21, 0.0);
    }

    #[test]
    fn expm_matches_taylor_series() {
        let j = JordanForm::RealDiagonal { p: 0.1, q: 0.2 };
        let jm = j.matrix();
        let mut term = Matrix2::identity();
        let mut sum = Matrix2::identity();
        for k in 1..30 {
            term = term * jm.scale(1.0 / k as f64);
            sum = sum + term;
        }
        let e = expm_jordan(&j, 1.0);
        assert!((e - sum).max_abs() < 1e-12);
    }

    #[test]
    fn norm_of_shear_is_theta() {
        let s: f64 = 1.0;
        let expected = (1.0 + 0.5 + 5f64.sqrt() / 2.0).sqrt();
        assert_relative_eq!(
            spectral_norm(&Matrix2::new(1.0, s, 0.0, 1.0)),
            expected,
            epsilon = 1e-15
        );
        assert_eq!(spectral_norm(&Matrix2::identity()), 1.0);
        assert_relative_eq!(spectral_norm(&Matrix2::new(1.0, 2.0, 2.0, 4.0)), 5.0);
    }

    #[test]
    fn schur_boundaries() {
        assert!(is_schur_stable(&Matrix2::zero()));
        assert!(!is_schur_stable(&Matrix2::identity()));
    }
}
