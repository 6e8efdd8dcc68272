//! Pairs with at least one defective (non-diagonalizable) subsystem: both
//! defective (NN), defective with complex (NC), defective with
//! real-diagonalizable (NR).
//!
//! The defective subsystem is always the first one here. Its growth factor is
//! `theta`, the norm of the unit shear, and `g(t) = n t - ln theta(t)`.

use serde::{Deserialize, Serialize};

use crate::cases_nondefective::{prefixed, zero_threshold, CaseResult, DirectionResult};
use crate::dwell_core::ScalingMatrix;
use crate::error::{DwellError, Result};
use crate::linalg2::{vcross, vnorm, JordanForm, Matrix2, Vec2};
use crate::rootfind::{
    cosh, expand_bracket_with_step, golden_section_min, separable_threshold, sinh,
    solve_bracketed, Bracket, Tolerances,
};

/// Norm of `[[1, s], [0, 1]]`.
pub fn theta(s: f64) -> f64 {
    (1.0 + s * s / 2.0 + s * (1.0 + s * s / 4.0).sqrt()).sqrt()
}

/// `ln theta(s)`, which is `asinh(s / 2)`.
pub fn ln_theta(s: f64) -> f64 {
    (s / 2.0).asinh()
}

/// `n s - ln theta(s)`.
pub fn g(n: f64, s: f64) -> f64 {
    n * s - ln_theta(s)
}

/// Shape data for `g` at a fixed rate `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GParams {
    pub n: f64,
    /// Minimizer of `g`; only present when `n < 1/2`.
    pub s0: Option<f64>,
    /// `-g(s0)`, zero when `g` is increasing.
    pub g_min: f64,
    /// Positive root of `g` beyond `s0`.
    pub s_tilde: Option<f64>,
    /// `g(s0)` written in closed form.
    pub big_l: Option<f64>,
}

impl GParams {
    pub fn new(n: f64, tol: &Tolerances) -> Result<GParams> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(DwellError::InvalidInput(format!("decay rate must be positive, got {n}")));
        }
        if n >= 0.5 {
            return Ok(GParams {
                n,
                s0: None,
                g_min: 0.0,
                s_tilde: None,
                big_l: None,
            });
        }
        let s0 = (1.0 / (n * n) - 4.0).sqrt();
        let r = (1.0 - 4.0 * n * n).sqrt();
        let big_l = r - (1.0 / (2.0 * n * n) - 1.0 + r / (2.0 * n * n)).sqrt().ln();
        let mut h = |s: f64| Ok(g(n, s));
        let br = expand_bracket_with_step(&mut h, s0, 1.0, s0.max(1.0))?;
        let s_tilde = solve_bracketed(&mut h, br, tol)?.root;
        Ok(GParams {
            n,
            s0: Some(s0),
            g_min: -g(n, s0),
            s_tilde: Some(s_tilde),
            big_l: Some(big_l),
        })
    }

    pub fn argmin(&self) -> f64 {
        self.s0.unwrap_or(0.0)
    }
}

pub fn g_eval(gp: &GParams, s: f64) -> f64 {
    g(gp.n, s)
}

/// Inverse of `g` on `[0, inf)`; defined only when `g` is increasing.
pub fn g_inverse(gp: &GParams, y: f64, tol: &Tolerances) -> Result<f64> {
    if gp.n < 0.5 {
        return Err(DwellError::WrongRegime { n: gp.n });
    }
    if !(y >= 0.0) {
        return Err(DwellError::InvalidInput(format!("g inverse needs y >= 0, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut h = |s: f64| Ok(g(gp.n, s) - y);
    // g(s) >= (n - 1/2) s and g(s) >= n s - ln(1 + s)
    let br = expand_bracket_with_step(&mut h, 0.0, 1.0, y / gp.n)?;
    Ok(solve_bracketed(&mut h, br, tol)?.root)
}

// ---------------------------------------------------------------------------
// Polynomials for the basis shift

/// Dense polynomial, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn linear(c0: f64, c1: f64) -> Poly {
        Poly(vec![c0, c1])
    }

    pub fn constant(c: f64) -> Poly {
        Poly(vec![c])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + o.0.len() - 1];
        for (i, &x) in self.0.iter().enumerate() {
            for (j, &y) in o.0.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        Poly(out)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&0.0) + o.0.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * k).collect())
    }

    pub fn square(&self) -> Poly {
        self.mul(self)
    }
}

/// Real roots of `c0 + c1 x + c2 x^2 + c3 x^3`, polished by Newton steps.
pub fn cubic_real_roots(c: [f64; 4]) -> Vec<f64> {
    let [d, cc, b, a] = c;
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return vec![];
    }
    let mut roots = if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            if cc == 0.0 {
                vec![]
            } else {
                vec![-d / cc]
            }
        } else {
            let disc = cc * cc - 4.0 * b * d;
            if disc < 0.0 {
                vec![]
            } else {
                let q = -0.5 * (cc + cc.signum() * disc.sqrt());
                let mut v = vec![];
                if q != 0.0 {
                    v.push(d / q);
                }
                v.push(q / b);
                v
            }
        }
    } else {
        let (b, cc, d) = (b / a, cc / a, d / a);
        // depressed cubic y^3 + p y + q with x = y - b/3
        let p = cc - b * b / 3.0;
        let q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
        let shift = -b / 3.0;
        let disc = q * q / 4.0 + p * p * p / 27.0;
        if disc > 0.0 {
            let sq = disc.sqrt();
            vec![(-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt() + shift]
        } else if p == 0.0 {
            vec![shift]
        } else {
            let r = (-p / 3.0).sqrt();
            let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            (0..3)
                .map(|k| 2.0 * r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
                .collect()
        }
    };
    let poly = Poly(c.to_vec());
    let dp = poly.derivative();
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let slope = dp.eval(*r);
            if slope == 0.0 {
                break;
            }
            let step = poly.eval(*r) / slope;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots
}

/// Global minimizer of a polynomial of degree at most four that is bounded
/// below.
pub fn minimize_quartic(q: &Poly) -> Result<(f64, f64)> {
    let mut c = q.0.clone();
    c.resize(5, 0.0);
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let degree = (0..5).rev().find(|&i| c[i].abs() > 1e-14 * scale).unwrap_or(0);
    if degree == 0 {
        return Ok((0.0, c[0]));
    }
    if degree % 2 == 1 || c[degree] < 0.0 {
        return Err(DwellError::InvalidInput("polynomial is unbounded below".into()));
    }
    c.truncate(degree + 1);
    c.resize(5, 0.0);
    let d = Poly(c.clone()).derivative();
    let roots = cubic_real_roots([d.0[0], d.0[1], d.0[2], d.0[3]]);
    let best = roots
        .iter()
        .filter(|r| r.is_finite())
        .map(|&r| (r, q.eval(r)))
        .min_by(|x, y| x.1.total_cmp(&y.1));
    match best {
        Some(b) => Ok(b),
        None => {
            // golden search inside the Cauchy bound
            let bound = 1.0 + c[..degree].iter().fold(0.0f64, |m, x| m.max(x.abs())) / c[degree];
            golden_section_min(|x| Ok(q.eval(x)), -bound, bound, 1e-12 * bound)
        }
    }
}

/// `M E(eps) = [[a, b + eps a], [c, d + eps c]]` as polynomials in `eps`.
fn shifted_entries(m: &Matrix2) -> (Poly, Poly, Poly, Poly) {
    (
        Poly::constant(m.a11),
        Poly::linear(m.a12, m.a11),
        Poly::constant(m.a21),
        Poly::linear(m.a22, m.a21),
    )
}

/// `4 K^2` of the NC case for `M E(eps)`.
pub fn nc_k_quartic(m: &Matrix2) -> Poly {
    let (a, b, c, d) = shifted_entries(m);
    let t1 = b.square().add(&c.square().scale(-1.0)).square();
    let t2 = a.square().add(&d.square().scale(-1.0)).square();
    let t3 = a.mul(&c).add(&b.mul(&d)).square().scale(2.0);
    let t4 = a.mul(&b).add(&c.mul(&d)).square().scale(2.0);
    t1.add(&t2).add(&t3).add(&t4)
}

/// `K(eps) = (a^2 + (b + eps a)^2)(c^2 + (d + eps c)^2)` of the NR case.
pub fn nr_k_quartic(m: &Matrix2) -> Poly {
    let (a, b, c, d) = shifted_entries(m);
    a.square().add(&b.square()).mul(&c.square().add(&d.square()))
}

/// The NC constant `K`: `asinh K` is the largest value of
/// `ln ||M^-1 R M||` over rotations `R`.
pub fn nc_k(m: &Matrix2) -> f64 {
    (nc_k_quartic(m).eval(0.0) / 4.0).max(0.0).sqrt()
}

/// Jordan basis `[x, j]` of a defective matrix with `(A + nI) j = x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectiveBasis {
    pub eigvec: Vec2,
    pub gen_eigvec: Vec2,
    pub epsilon: f64,
}

impl DefectiveBasis {
    pub fn matrix(&self) -> Matrix2 {
        Matrix2::from_cols(self.eigvec, self.gen_eigvec)
    }
}

/// Jordan basis of a defective `A`, shifted along the eigenvector so that
/// the transition constant against a second defective subsystem with
/// eigenvector `other_eigvec` is smallest.
pub fn optimal_defective_basis(a: &Matrix2, other_eigvec: Option<Vec2>) -> Result<DefectiveBasis> {
    let n = -a.trace() / 2.0;
    let nil = *a + Matrix2::identity().scale(n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    if nil.norm() <= 1e-9 * scale || (nil * nil).norm() > 1e-6 * scale * scale {
        return Err(DwellError::NotDefective);
    }
    let j: Vec2 = if vnorm(nil.col(0)) >= vnorm(nil.col(1)) {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let x = nil.apply(j);
    let det = vcross(x, j);
    let k = 1.0 / det.abs().sqrt();
    let (x, j) = ([x[0] * k, x[1] * k], [j[0] * k, j[1] * k]);
    let eps = match other_eigvec {
        Some(o) => {
            let den = vcross(x, o);
            if den.abs() <= 1e-9 * vnorm(x) * vnorm(o) {
                0.0
            } else {
                -vcross(j, o) / den
            }
        }
        None => 0.0,
    };
    Ok(DefectiveBasis {
        eigvec: x,
        gen_eigvec: [j[0] + eps * x[0], j[1] + eps * x[1]],
        epsilon: eps,
    })
}

fn defective_rate(j: &JordanForm) -> Result<f64> {
    match *j {
        JordanForm::Defective { n } => Ok(n),
        _ => Err(DwellError::NotDefective),
    }
}

/// `E(eps) = [[1, eps], [0, 1]]`.
pub fn shear(eps: f64) -> Matrix2 {
    Matrix2::new(1.0, eps, 0.0, 1.0)
}

/// Peak of `-n t + asinh(k t)`, at zero when the function never rises.
fn asinh_line_peak(n: f64, k: f64) -> f64 {
    if k > n {
        (1.0 / (n * n) - 1.0 / (k * k)).sqrt()
    } else {
        0.0
    }
}

fn branch_label(prefix: &str, r: &crate::rootfind::SeparableThreshold) -> String {
    if r.tau == 0.0 {
        format!("{prefix}: zero curve stays outside the positive quadrant; stable for all signals")
    } else if r.at_peak {
        format!("{prefix}: level of the zero-curve peak")
    } else {
        format!("{prefix}: diagonal root")
    }
}

// ---------------------------------------------------------------------------
// NN

/// `tau` for a separable bound `g(s) > -m t + asinh(k t)` where `g` has rate
/// `n_s` and the other side has rate `n_t`.
fn nn_direction(n_s: f64, n_t: f64, k: f64, tol: &Tolerances) -> Result<DirectionResult> {
    let gp = GParams::new(n_s, tol)?;
    let peak = asinh_line_peak(n_t, k);
    let r = separable_threshold(
        |s| Ok(g(n_s, s)),
        gp.argmin(),
        |t| Ok(-n_t * t + (k * t).asinh()),
        peak,
        tol,
    )?;
    let mut key_points = vec![("K".to_string(), k), ("t0".to_string(), peak)];
    if let Some(s0) = gp.s0 {
        key_points.push(("s0".into(), s0));
        key_points.push(("L".into(), gp.big_l.unwrap_or(f64::NAN)));
    }
    let sub_case = if k <= n_t && gp.s0.is_none() {
        "nn: K at most the decay rate; stable for all signals".to_string()
    } else {
        branch_label("nn", &r)
    };
    Ok(DirectionResult {
        tau: r.tau,
        sub_case,
        lambda: 1.0,
        key_points,
    })
}

/// Both subsystems defective. With `optimal_basis` the two Jordan bases are
/// shifted along their eigenvectors, which replaces `(a^2 + c^2)/2` and
/// `(c^2 + d^2)/2` by `c^2/2`.
pub fn tau_nn(
    j1: &JordanForm,
    j2: &JordanForm,
    m: &Matrix2,
    optimal_basis: bool,
    tol: &Tolerances,
) -> Result<CaseResult> {
    let n1 = defective_rate(j1)?;
    let n2 = defective_rate(j2)?;
    let (a, c, d) = (m.a11, m.a21, m.a22);

    if zero_threshold(c, m) {
        // common eigenvector: rescale each Jordan basis so that the shear
        // is slow enough and the constant small enough
        let xi_21 = 0.5 * (2.0 * n2).min(if a == 0.0 { f64::INFINITY } else { 2.0 * n1 / (a * a) });
        let xi_12 = 0.5 * (2.0 * n1).min(if d == 0.0 { f64::INFINITY } else { 2.0 * n2 / (d * d) });
        let label = "nn: common eigenvector, rescaled Jordan basis; stable for all signals";
        return Ok(CaseResult {
            tau_12: 0.0,
            tau_21: 0.0,
            sub_case_12: label.into(),
            sub_case_21: label.into(),
            scaling_12: (ScalingMatrix::new(1.0 / xi_12.sqrt()), ScalingMatrix::identity()),
            scaling_21: (ScalingMatrix::identity(), ScalingMatrix::new(1.0 / xi_21.sqrt())),
            epsilons: None,
            key_points: vec![("xi_12".into(), xi_12), ("xi_21".into(), xi_21)],
        });
    }

    let (eps1, eps2) = if optimal_basis { (-d / c, a / c) } else { (0.0, 0.0) };
    let a_s = a - eps2 * c;
    let d_s = d + eps1 * c;
    let k = (a_s * a_s + c * c) / 2.0;
    let r = (c * c + d_s * d_s) / 2.0;
    let r21 = nn_direction(n2, n1, k, tol).map_err(|e| e.in_case("NN (2,1)"))?;
    let r12 = nn_direction(n1, n2, r, tol).map_err(|e| e.in_case("NN (1,2)"))?;
    let mut key_points = prefixed("12", r12.key_points);
    key_points.extend(prefixed("21", r21.key_points));
    Ok(CaseResult {
        tau_12: r12.tau,
        tau_21: r21.tau,
        sub_case_12: r12.sub_case,
        sub_case_21: r21.sub_case,
        scaling_12: (ScalingMatrix::identity(), ScalingMatrix::identity()),
        scaling_21: (ScalingMatrix::identity(), ScalingMatrix::identity()),
        epsilons: Some((eps1, eps2)),
        key_points,
    })
}

// ---------------------------------------------------------------------------
// NC

/// Defective first, complex second.
pub fn tau_nc(
    j1: &JordanForm,
    j2: &JordanForm,
    m: &Matrix2,
    optimal_basis: bool,
    tol: &Tolerances,
) -> Result<CaseResult> {
    let n1 = defective_rate(j1)?;
    let alpha2 = match *j2 {
        JordanForm::Complex { alpha, .. } => alpha,
        _ => return Err(DwellError::InvalidInput("second subsystem must be complex".into())),
    };
    let quartic = nc_k_quartic(m);
    let (eps1, k4) = if optimal_basis {
        minimize_quartic(&quartic)?
    } else {
        (0.0, quartic.eval(0.0))
    };
    let k = (k4 / 4.0).max(0.0).sqrt();
    let gp = GParams::new(n1, tol)?;

    let r12 = separable_threshold(
        |t| Ok(g(n1, t)),
        gp.argmin(),
        |s| Ok(k.asinh() - alpha2 * s),
        0.0,
        tol,
    )
    .map_err(|e| e.in_case("NC (1,2)"))?;
    let sub_12 = if r12.tau == 0.0 {
        "nc: stable for all signals".to_string()
    } else if r12.at_trough {
        "nc: decay rate below one half, trough of g binds".to_string()
    } else {
        "nc: root of g against the line".to_string()
    };

    // R = (a^2 + c^2)/2 does not depend on the shift of the first basis
    let r = (m.a11 * m.a11 + m.a21 * m.a21) / 2.0;
    let peak = asinh_line_peak(n1, r);
    let r21 = separable_threshold(
        |s| Ok(alpha2 * s),
        0.0,
        |t| Ok(-n1 * t + (r * t).asinh()),
        peak,
        tol,
    )
    .map_err(|e| e.in_case("NC (2,1)"))?;
    let sub_21 = if r <= n1 {
        "nc: R at most the decay rate; stable for all signals".to_string()
    } else {
        branch_label("nc", &r21)
    };

    let mut key_points = vec![
        ("12.K".to_string(), k),
        ("12.K0".to_string(), nc_k(m)),
        ("21.R".to_string(), r),
        ("21.t0".to_string(), peak),
    ];
    if let Some(s0) = gp.s0 {
        key_points.push(("12.t0".into(), s0));
    }
    Ok(CaseResult {
        tau_12: r12.tau,
        tau_21: r21.tau,
        sub_case_12: sub_12,
        sub_case_21: sub_21,
        scaling_12: (ScalingMatrix::identity(), ScalingMatrix::identity()),
        scaling_21: (ScalingMatrix::identity(), ScalingMatrix::identity()),
        epsilons: Some((eps1, 0.0)),
        key_points,
    })
}

// ---------------------------------------------------------------------------
// NR

/// Peak of `-m s + asinh(sqrt(k) sinh(h s))`, zero when it never rises.
pub fn nr_line_peak(m2: f64, h2: f64, k: f64) -> f64 {
    if k <= (m2 / h2).powi(2) {
        return 0.0;
    }
    let tanh_sq = ((h2 / m2).powi(2) - 1.0 / k) / (1.0 - 1.0 / k);
    tanh_sq.sqrt().atanh() / h2
}

/// Zero curve for direction (2, 1): time `t` in the defective subsystem as
/// a function of the time `s` in the diagonal one, at scaling optimal for
/// `a c`.
pub fn nr_zero_curve_21(ac: f64, n1: f64, m2: f64, h2: f64, s: f64) -> Result<f64> {
    let x = (ac.abs() / n1) * cosh(h2 * s)?;
    Ok(-(m2 / n1) * s + x.max(1.0).acosh() / n1)
}

/// Stationarity condition whose root locates the binding point of the
/// direction (2, 1) zero curve.
pub fn nr_condition_21(ac: f64, n1: f64, m2: f64, h2: f64, t: f64, s: f64) -> Result<f64> {
    Ok(ac * t * cosh(h2 * s)? - sinh(h2 * s)? - ac.signum() * sinh(m2 * s + n1 * t)?)
}

fn nr_diagonal_21(ac: f64, n1: f64, m2: f64, h2: f64, t: f64) -> Result<f64> {
    Ok(ac * t * cosh(h2 * t)? - sinh(h2 * t)? - ac.signum() * sinh((m2 + n1) * t)?)
}

fn nr_direction_21(m: &Matrix2, n1: f64, p2: f64, q2: f64, tol: &Tolerances) -> Result<DirectionResult> {
    let (a, c) = (m.a11, m.a21);
    let ac = a * c;
    let h2 = (q2 - p2) / 2.0;
    let m2 = (q2 + p2) / 2.0;
    if zero_threshold(a, m) || zero_threshold(c, m) {
        return Ok(DirectionResult {
            tau: 0.0,
            sub_case: "nr: a c = 0; stable for all signals".into(),
            lambda: 1.0,
            key_points: vec![],
        });
    }
    let lam = |tau: f64| (a * a / (c * c)).powf(0.25) * (-(q2 - p2) * tau / 4.0).exp();
    if ac.abs() <= n1 {
        return Ok(DirectionResult {
            tau: 0.0,
            sub_case: "nr: |a c| at most the decay rate; stable for all signals".into(),
            lambda: lam(0.0),
            key_points: vec![("ac".into(), ac)],
        });
    }
    let curve = |s: f64| nr_zero_curve_21(ac, n1, m2, h2, s);
    // end of the curve in the positive quadrant
    let mut tc = |s: f64| curve(s);
    let br = expand_bracket_with_step(&mut tc, 0.0, 1.0, 1e-3 / m2)?;
    let s_end = solve_bracketed(&mut tc, br, tol)?.root;

    let mut cond = |s: f64| nr_condition_21(ac, n1, m2, h2, curve(s)?, s);
    let n_scan = 2000;
    let lo = 1e-9 * s_end;
    let mut prev = (lo, cond(lo)?);
    let mut binding = None;
    for i in 1..=n_scan {
        let s = lo + (s_end - lo) * i as f64 / n_scan as f64;
        let v = cond(s)?;
        if prev.1 * v <= 0.0 {
            let br = Bracket::new(&mut cond, prev.0, s)?;
            let root = solve_bracketed(&mut cond, br, tol)?.root;
            binding = Some((curve(root)?, root));
            break;
        }
        prev = (s, v);
    }
    let mut key_points = vec![("ac".to_string(), ac), ("s_end".to_string(), s_end)];
    let mut diag = |t: f64| nr_diagonal_21(ac, n1, m2, h2, t);
    let (tau, sub) = match binding {
        Some((t0, s_t0)) if s_t0 <= t0 => {
            key_points.push(("t0".into(), t0));
            key_points.push(("S(t0)".into(), s_t0));
            (s_t0, "nr: level of the zero-curve peak")
        }
        Some((t0, s_t0)) => {
            key_points.push(("t0".into(), t0));
            key_points.push(("S(t0)".into(), s_t0));
            let br = expand_bracket_with_step(&mut diag, t0, 1.0, t0.max(1e-3))?;
            (solve_bracketed(&mut diag, br, tol)?.root, "nr: diagonal root")
        }
        None => {
            let br = expand_bracket_with_step(&mut diag, 1e-9, 1.0, 1e-3 / m2)?;
            (solve_bracketed(&mut diag, br, tol)?.root, "nr: diagonal root")
        }
    };
    Ok(DirectionResult {
        tau,
        sub_case: sub.into(),
        lambda: lam(tau),
        key_points,
    })
}

/// Defective first, real-diagonalizable second. The transition matrix must
/// have determinant `+1`.
pub fn tau_nr(
    j1: &JordanForm,
    j2: &JordanForm,
    m: &Matrix2,
    optimal_basis: bool,
    tol: &Tolerances,
) -> Result<CaseResult> {
    let n1 = defective_rate(j1)?;
    let (p2, q2) = match *j2 {
        JordanForm::RealDiagonal { p, q } if p < q => (p, q),
        _ => return Err(DwellError::DegenerateSpectrum),
    };
    if (m.det() - 1.0).abs() > 1e-9 {
        return Err(DwellError::InvalidInput(format!(
            "transition matrix must have determinant +1, got {}",
            m.det()
        )));
    }
    let quartic = nr_k_quartic(m);
    let (eps1, k) = if optimal_basis {
        minimize_quartic(&quartic)?
    } else {
        (0.0, quartic.eval(0.0))
    };
    let h2 = (q2 - p2) / 2.0;
    let m2 = (q2 + p2) / 2.0;
    let gp = GParams::new(n1, tol)?;
    let peak = nr_line_peak(m2, h2, k);
    let r12 = separable_threshold(
        |t| Ok(g(n1, t)),
        gp.argmin(),
        |s| Ok(-m2 * s + (k.sqrt() * sinh(h2 * s)?).asinh()),
        peak,
        tol,
    )
    .map_err(|e| e.in_case("NR (1,2)"))?;
    let sub_12 = if k <= (m2 / h2).powi(2) && gp.s0.is_none() {
        "nr: K below the threshold; stable for all signals".to_string()
    } else {
        branch_label("nr", &r12)
    };

    let r21 = nr_direction_21(m, n1, p2, q2, tol).map_err(|e| e.in_case("NR (2,1)"))?;
    let mut key_points = vec![
        ("12.K".to_string(), k),
        ("12.K0".to_string(), quartic.eval(0.0)),
        ("12.s0".to_string(), peak),
    ];
    key_points.extend(prefixed("21", r21.key_points));
    Ok(CaseResult {
        tau_12: r12.tau,
        tau_21: r21.tau,
        sub_case_12: sub_12,
        sub_case_21: r21.sub_case,
        scaling_12: (ScalingMatrix::identity(), ScalingMatrix::identity()),
        scaling_21: (ScalingMatrix::identity(), ScalingMatrix::new(r21.lambda)),
        epsilons: Some((eps1, 0.0)),
        key_points,
    })
}
