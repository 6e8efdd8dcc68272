//! Pairs without defective blocks: both real-diagonalizable (RR), both
//! complex (CC), and real-diagonalizable with complex (RC).
//!
//! All routines take the Jordan forms and a transition matrix with
//! determinant `+1` for the RR and RC cases. Times `t` belong to the first
//! subsystem and `s` to the second.

use serde::{Deserialize, Serialize};

use crate::dwell_core::ScalingMatrix;
use crate::error::{DwellError, Result};
use crate::linalg2::{JordanForm, Matrix2};
use crate::rootfind::{
    cosh, exp, expand_bracket_with_step, fixed_point_decreasing, scan_then_golden,
    separable_threshold, sinh, solve_bracketed, solve_curve_intersection, Bracket, CurvePoint,
    Tolerances,
};

/// Outcome of one case analysis in the case's own labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub tau_12: f64,
    pub tau_21: f64,
    pub sub_case_12: String,
    pub sub_case_21: String,
    /// `(D1, D2)` certifying `tau_12`.
    pub scaling_12: (ScalingMatrix, ScalingMatrix),
    /// `(D1, D2)` certifying `tau_21`.
    pub scaling_21: (ScalingMatrix, ScalingMatrix),
    /// Shifts `P_i -> P_i [[1, eps_i], [0, 1]]` applied to defective bases.
    pub epsilons: Option<(f64, f64)>,
    pub key_points: Vec<(String, f64)>,
}

/// Threshold for one ordering of the pair.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DirectionResult {
    pub tau: f64,
    pub sub_case: String,
    pub lambda: f64,
    pub key_points: Vec<(String, f64)>,
}

pub(crate) fn zero_threshold(entry: f64, m: &Matrix2) -> bool {
    entry.abs() <= 1e-10 * m.max_abs()
}

fn check_unimodular(m: &Matrix2) -> Result<()> {
    if (m.det() - 1.0).abs() > 1e-9 {
        return Err(DwellError::InvalidInput(format!(
            "transition matrix must have determinant +1, got {}",
            m.det()
        )));
    }
    Ok(())
}

/// `asinh` of a non-negative combination, written so that the zero-set
/// formulas read like their closed forms.
fn asinh(x: f64) -> f64 {
    x.asinh()
}

// ---------------------------------------------------------------------------
// RR

/// Rates and transition entries for two real-diagonalizable subsystems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RRParams {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RRParams {
    pub fn new(j1: &JordanForm, j2: &JordanForm, m: &Matrix2) -> Result<RRParams> {
        let (p1, q1, p2, q2) = match (*j1, *j2) {
            (JordanForm::RealDiagonal { p: p1, q: q1 }, JordanForm::RealDiagonal { p: p2, q: q2 }) => {
                (p1, q1, p2, q2)
            }
            _ => return Err(DwellError::DegenerateSpectrum),
        };
        if !(p1 < q1 && p2 < q2) {
            return Err(DwellError::DegenerateSpectrum);
        }
        check_unimodular(m)?;
        Ok(RRParams {
            p1,
            q1,
            p2,
            q2,
            a: m.a11,
            b: m.a12,
            c: m.a21,
            d: m.a22,
        })
    }

    pub fn ad(&self) -> f64 {
        self.a * self.d
    }

    /// `[-p2/(q2-p2), q2/(q2-p2)]`.
    pub fn interval(&self) -> (f64, f64) {
        let w = self.q2 - self.p2;
        (-self.p2 / w, self.q2 / w)
    }

    /// Parameters for the reverse ordering: `M -> M^-1` and the rates swap.
    pub fn swapped(&self) -> RRParams {
        RRParams {
            p1: self.p2,
            q1: self.q2,
            p2: self.p1,
            q2: self.q1,
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn matrix(&self) -> Matrix2 {
        Matrix2::new(self.a, self.b, self.c, self.d)
    }

    fn has_zero_entry(&self) -> bool {
        let m = self.matrix();
        [self.a, self.b, self.c, self.d]
            .iter()
            .any(|&x| zero_threshold(x, &m))
    }

    /// The `lambda_1` that makes the Schur function equal to `k` at time `t`.
    pub fn optimal_lambda(&self, t: f64) -> f64 {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        ((b * b * d * d) / (a * a * c * c)).powf(0.125) * (-(self.q1 - self.p1) * t / 4.0).exp()
    }
}

/// Schur function of the scaled product for direction (1, 2) with
/// `D1 = diag(lambda1, 1/lambda1)`; negative exactly when the product norm
/// is below one.
pub fn rr_schur_f(p: &RRParams, lambda1: f64, t: f64, s: f64) -> Result<f64> {
    let RRParams {
        p1,
        q1,
        p2,
        q2,
        a,
        b,
        c,
        d,
    } = *p;
    let e = |x: f64| x.exp();
    let l4 = lambda1.powi(4);
    let t1 = a * d * e(-p1 * t - p2 * s) - b * c * e(-p1 * t - q2 * s);
    let t2 = e(-p2 * s - q1 * t) - e(-q1 * t - q2 * s);
    let t3 = e(-p1 * t - q2 * s) - e(-p1 * t - p2 * s);
    let t4 = a * d * e(-q1 * t - q2 * s) - b * c * e(-p2 * s - q1 * t);
    Ok(t1 * t1 + b * b * d * d / l4 * t2 * t2 + a * a * c * c * l4 * t3 * t3 + t4 * t4
        - 1.0
        - e(-2.0 * (p1 + q1) * t - 2.0 * (p2 + q2) * s))
}

/// The Schur function minimized over `lambda_1`, in its squared-difference
/// form.
pub fn rr_schur_k(p: &RRParams, t: f64, s: f64) -> Result<f64> {
    if p.has_zero_entry() {
        return Err(DwellError::ZeroEntry);
    }
    let RRParams {
        p1,
        q1,
        p2,
        q2,
        a,
        b,
        c,
        d,
    } = *p;
    let eps = (a * b * c * d).signum();
    let e = |x: f64| x.exp();
    let inner = a * d * (e(-p1 * t - p2 * s) - eps * e(-q1 * t - q2 * s))
        - b * c * (e(-p1 * t - q2 * s) - eps * e(-p2 * s - q1 * t));
    let tail = e(-(p1 + q1) * t - (p2 + q2) * s) - eps;
    Ok(inner * inner - tail * tail)
}

/// `l_-` (`minus = true`) or `l_+`; the zero set of `k` is `ad = l`.
pub fn rr_ell(p: &RRParams, t: f64, s: f64, minus: bool) -> f64 {
    let RRParams { p1, q1, p2, q2, .. } = *p;
    let x = p1 * t + q2 * s;
    let y = p2 * s + q1 * t;
    let den = ((-p1 * t).exp() + (-q1 * t).exp()) * (-q2 * s).exp() * ((q2 - p2) * s).exp_m1();
    let num = if minus {
        -(-x).exp_m1() * ((-y).exp() + 1.0)
    } else {
        (1.0 + (-x).exp()) * (-y).exp_m1()
    };
    num / den
}

/// `m(0, s)`, increasing from `4 p2 q2 / (q2 - p2)^2`.
pub fn rr_m0(p: &RRParams, s: f64) -> f64 {
    let RRParams { p2, q2, .. } = *p;
    if s == 0.0 {
        return 4.0 * p2 * q2 / ((q2 - p2) * (q2 - p2));
    }
    let num = (-2.0 * q2 * s).exp_m1() * (-2.0 * p2 * s).exp_m1();
    let den = (-p2 * s).exp() * (-(q2 - p2) * s).exp_m1();
    num / (den * den)
}

/// Left side minus right side of the stationarity condition that locates
/// the peak of the zero curve.
pub fn rr_outer_condition(p: &RRParams, t: f64, s: f64, minus: bool) -> Result<f64> {
    let RRParams { p1, q1, p2, q2, .. } = *p;
    let ratio = if minus {
        // (e^{p1 t} - e^{-q2 s})(e^{q1 t} + e^{-q2 s}) / ((e^{p1 t} - e^{-p2 s})(e^{q1 t} + e^{-p2 s})) e^{(q2-p2)s}
        let n1 = (p1 * t).exp_m1() - (-q2 * s).exp_m1();
        let n2 = exp(q1 * t)? + (-q2 * s).exp();
        let d1 = (p1 * t).exp_m1() - (-p2 * s).exp_m1();
        let d2 = exp(q1 * t)? + (-p2 * s).exp();
        n1 * n2 / (d1 * d2) * exp((q2 - p2) * s)?
    } else {
        let n1 = exp(q2 * s + p1 * t)? + 1.0;
        let n2 = (q2 * s + q1 * t).exp_m1();
        let d1 = exp(p2 * s + p1 * t)? + 1.0;
        let d2 = (p2 * s + q1 * t).exp_m1();
        n1 * n2 / (d1 * d2) * (-(q2 - p2) * s).exp()
    };
    Ok(ratio - q2 / p2)
}

/// Unique `s0 > 0` with `k(0, s0) = 0` (requires `ad` outside the interval).
pub fn rr_s0(p: &RRParams, tol: &Tolerances) -> Result<f64> {
    let ad = p.ad();
    let target = 4.0 * ad * (ad - 1.0);
    let mut h = |s: f64| Ok(target - rr_m0(p, s));
    let step = 1e-3 / p.q2;
    let br = expand_bracket_with_step(&mut h, 0.0, 1.0, step)?;
    Ok(solve_bracketed(&mut h, br, tol)?.root)
}

/// The zero curve `t = O(s)` for `s` in `[0, s0]`.
pub fn rr_zero_curve(p: &RRParams, s: f64, tol: &Tolerances) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    let ad = p.ad();
    let minus = ad > 0.0;
    let mut h = |t: f64| Ok(rr_ell(p, t, s, minus) - ad);
    let h0 = h(0.0)?;
    if h0 == 0.0 || (minus && h0 > 0.0) || (!minus && h0 < 0.0) {
        return Ok(0.0);
    }
    let step = 1e-3 / p.q1;
    let br = expand_bracket_with_step(&mut h, 0.0, 1.0, step)?;
    Ok(solve_bracketed(&mut h, br, tol)?.root)
}

/// Peak `(t_sol, s_sol)` of the zero curve: the stationarity condition is
/// solved first; a direct maximization of `O` backs it up when the
/// condition fails to bracket.
pub fn rr_curve_peak(p: &RRParams, s0: f64, tol: &Tolerances) -> Result<(CurvePoint, bool)> {
    let minus = p.ad() > 0.0;
    let solved = solve_curve_intersection(
        |s| rr_zero_curve(p, s, tol),
        |t, s| rr_outer_condition(p, t, s, minus),
        1e-6 * s0,
        s0 * (1.0 - 1e-9),
        tol,
    );
    if let Ok(pt) = solved {
        // the stationary point must be the maximum of O; compare with a scan
        let (_, neg_max) = scan_then_golden(|s| Ok(-rr_zero_curve(p, s, tol)?), 0.0, s0, 64, 1e-10 * s0)?;
        if pt.t >= -neg_max - 1e-9 * (1.0 + pt.t) {
            return Ok((pt, true));
        }
    }
    let (s, neg) = scan_then_golden(|s| Ok(-rr_zero_curve(p, s, tol)?), 0.0, s0, 256, tol.arg_tol.max(1e-13) * s0.max(1.0))?;
    Ok((
        CurvePoint {
            t: -neg,
            s,
            residual: f64::NAN,
        },
        false,
    ))
}

/// Scaling for the zero-entry case; the choice keeps the scaled Schur
/// function negative everywhere.
fn zero_entry_lambda(p: &RRParams) -> f64 {
    let m = p.matrix();
    let z = |x: f64| zero_threshold(x, &m);
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let w = p.q2 - p.p2;
    let floor = 4.0 * p.p2 * p.q2 / (w * w);
    if z(b) || z(d) {
        let ac = a * a * c * c;
        if ac == 0.0 || z(a) || z(c) {
            1.0
        } else {
            0.5 * (floor / ac).powf(0.25)
        }
    } else {
        let bd = b * b * d * d;
        2.0 * (bd / floor).powf(0.25)
    }
}

pub(crate) fn rr_direction(p: &RRParams, tol: &Tolerances) -> Result<DirectionResult> {
    if p.has_zero_entry() {
        return Ok(DirectionResult {
            tau: 0.0,
            sub_case: "rr: transition matrix has a zero entry; stable for all signals".into(),
            lambda: zero_entry_lambda(p),
            key_points: vec![],
        });
    }
    let ad = p.ad();
    let (lo, hi) = p.interval();
    if (lo..=hi).contains(&ad) {
        return Ok(DirectionResult {
            tau: 0.0,
            sub_case: "rr: ad inside the stability interval; stable for all signals".into(),
            lambda: p.optimal_lambda(0.0),
            key_points: vec![],
        });
    }
    let minus = ad > hi;
    let side = if minus { "above" } else { "below" };
    let s0 = rr_s0(p, tol)?;
    let (peak, by_condition) = rr_curve_peak(p, s0, tol)?;
    let mut key_points = vec![
        ("s0".to_string(), s0),
        ("t_sol".to_string(), peak.t),
        ("s_sol".to_string(), peak.s),
    ];
    let (tau, branch) = if peak.s >= peak.t {
        (peak.t, "peak of the zero curve")
    } else {
        let mut diag = |t: f64| rr_schur_k(p, t, t);
        let br = Bracket::new(&mut diag, peak.s, s0)?;
        let root = if br.f_lo > 0.0 && br.f_hi < 0.0 {
            solve_bracketed(&mut diag, br, tol)?.root
        } else {
            // fall back to the fixed point of O on its decreasing branch
            let mut g = |s: f64| Ok(rr_zero_curve(p, s, tol)? - s);
            let br = Bracket::new(&mut g, peak.s, s0)?;
            solve_bracketed(&mut g, br, tol)?.root
        };
        (root, "diagonal root")
    };
    if !by_condition {
        key_points.push(("peak_by_scan".to_string(), 1.0));
    }
    Ok(DirectionResult {
        tau,
        sub_case: format!("rr: ad {side} the stability interval, {branch}"),
        lambda: p.optimal_lambda(tau),
        key_points,
    })
}

/// Both subsystems real-diagonalizable.
pub fn tau_rr(j1: &JordanForm, j2: &JordanForm, m: &Matrix2, tol: &Tolerances) -> Result<CaseResult> {
    let p = RRParams::new(j1, j2, m)?;
    let r12 = rr_direction(&p, tol).map_err(|e| e.in_case("RR (1,2)"))?;
    let r21 = rr_direction(&p.swapped(), tol).map_err(|e| e.in_case("RR (2,1)"))?;
    let mut key_points = prefixed("12", r12.key_points);
    key_points.extend(prefixed("21", r21.key_points));
    Ok(CaseResult {
        tau_12: r12.tau,
        tau_21: r21.tau,
        sub_case_12: r12.sub_case,
        sub_case_21: r21.sub_case,
        scaling_12: (ScalingMatrix::new(r12.lambda), ScalingMatrix::identity()),
        scaling_21: (ScalingMatrix::identity(), ScalingMatrix::new(r21.lambda)),
        epsilons: None,
        key_points,
    })
}

pub(crate) fn prefixed(tag: &str, pts: Vec<(String, f64)>) -> Vec<(String, f64)> {
    pts.into_iter().map(|(k, v)| (format!("{tag}.{k}"), v)).collect()
}

// ---------------------------------------------------------------------------
// CC

fn complex_rates(j: &JordanForm) -> Result<(f64, f64)> {
    match *j {
        JordanForm::Complex { alpha, beta } => Ok((alpha, beta)),
        _ => Err(DwellError::InvalidInput(format!(
            "expected a complex subsystem, got {}",
            j.name()
        ))),
    }
}

/// `acosh((a^2+b^2+c^2+d^2)/2) / (alpha1 + alpha2)` for both orderings.
pub fn cc_tau(alpha1: f64, alpha2: f64, m: &Matrix2) -> f64 {
    let x = (m.frob_sq() / (2.0 * m.det().abs())).max(1.0);
    x.acosh() / (alpha1 + alpha2)
}

/// Zero set of the CC Schur function with identity scalings: the time `t`
/// in the first subsystem at which the product norm equals one, given `s`.
pub fn cc_zero_set_t(alpha1: f64, alpha2: f64, beta2: f64, m: &Matrix2, s: f64) -> Result<f64> {
    let rot = JordanForm::Complex {
        alpha: 0.0,
        beta: beta2,
    }
    .expm(s);
    let minv = m.inverse()?;
    let n = (minv * rot * *m).norm();
    Ok((n.ln() - alpha2 * s) / alpha1)
}

/// Both subsystems complex.
pub fn tau_cc(j1: &JordanForm, j2: &JordanForm, m: &Matrix2) -> Result<CaseResult> {
    let (a1, _) = complex_rates(j1)?;
    let (a2, _) = complex_rates(j2)?;
    let tau = cc_tau(a1, a2, m);
    let sub = if tau == 0.0 {
        "cc: transition matrix orthogonal; stable for all signals"
    } else {
        "cc: closed form"
    };
    Ok(CaseResult {
        tau_12: tau,
        tau_21: tau,
        sub_case_12: sub.into(),
        sub_case_21: sub.into(),
        scaling_12: (ScalingMatrix::identity(), ScalingMatrix::identity()),
        scaling_21: (ScalingMatrix::identity(), ScalingMatrix::identity()),
        epsilons: None,
        key_points: vec![],
    })
}

// ---------------------------------------------------------------------------
// RC

/// Data for a real-diagonalizable first subsystem and a complex second one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RCParams {
    pub p1: f64,
    pub q1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RCParams {
    pub fn new(j1: &JordanForm, j2: &JordanForm, m: &Matrix2) -> Result<RCParams> {
        let (p1, q1) = match *j1 {
            JordanForm::RealDiagonal { p, q } if p < q => (p, q),
            _ => return Err(DwellError::DegenerateSpectrum),
        };
        let (alpha2, beta2) = complex_rates(j2)?;
        check_unimodular(m)?;
        Ok(RCParams {
            p1,
            q1,
            alpha2,
            beta2,
            a: m.a11,
            b: m.a12,
            c: m.a21,
            d: m.a22,
        })
    }

    fn mh(&self) -> (f64, f64) {
        ((self.q1 + self.p1) / 2.0, (self.q1 - self.p1) / 2.0)
    }

    /// `(a^2 + c^2)(b^2 + d^2)`.
    pub fn k(&self) -> f64 {
        (self.a * self.a + self.c * self.c) * (self.b * self.b + self.d * self.d)
    }

    /// `ab + cd`.
    pub fn r(&self) -> f64 {
        self.a * self.b + self.c * self.d
    }
}

/// The map whose fixed point bounds direction (1, 2): the zero curve with
/// the scaling chosen optimally at each `t`.
pub fn rc_map_12(p: &RCParams, t: f64) -> Result<f64> {
    let (m1, h1) = p.mh();
    let arg = p.r().abs() * cosh(h1 * t)? + sinh(h1 * t)?;
    Ok(-(m1 / p.alpha2) * t + asinh(arg) / p.alpha2)
}

/// Zero curve for direction (2, 1): `s` as a function of `t`.
pub fn rc_zero_curve_21(p: &RCParams, t: f64) -> Result<f64> {
    let (m1, h1) = p.mh();
    Ok((-m1 * t + asinh(p.k().sqrt() * sinh(h1 * t)?)) / p.alpha2)
}

/// Peak location `t0` of [`rc_zero_curve_21`] and its height in closed form;
/// `None` when the curve never rises above zero.
pub fn rc_peak_21(p: &RCParams) -> Option<(f64, f64)> {
    let (m1, h1) = p.mh();
    let k = p.k();
    if k <= (m1 / h1).powi(2) {
        return None;
    }
    let tanh_sq = (k * (h1 / m1).powi(2) - 1.0) / (k - 1.0);
    let t0 = tanh_sq.sqrt().atanh() / h1;
    let (sum, dif) = (p.q1 + p.p1, p.q1 - p.p1);
    let inner = (k * dif * dif - sum * sum) / (sum * sum - dif * dif);
    let height = -(m1 / p.alpha2) * t0 + asinh(inner.sqrt()) / p.alpha2;
    Some((t0, height))
}

/// Real-diagonalizable first, complex second.
pub fn tau_rc(j1: &JordanForm, j2: &JordanForm, m: &Matrix2, tol: &Tolerances) -> Result<CaseResult> {
    let p = RCParams::new(j1, j2, m)?;
    let tau_12 = fixed_point_decreasing(|t| rc_map_12(&p, t), tol).map_err(|e| e.in_case("RC (1,2)"))?;
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let lambda_12 = ((b * b + d * d) / (a * a + c * c)).powf(0.25) * (-(p.q1 - p.p1) * tau_12 / 4.0).exp();

    let (m1, _) = p.mh();
    let mut key_points = vec![("12.tau".to_string(), tau_12)];
    let (tau_21, sub_21) = match rc_peak_21(&p) {
        None => (
            0.0,
            "rc: K below the threshold; stable for all signals".to_string(),
        ),
        Some((t0, height)) => {
            key_points.push(("21.t0".into(), t0));
            key_points.push(("21.S(t0)".into(), height));
            let r = separable_threshold(
                |s| Ok(p.alpha2 * s),
                0.0,
                |t| Ok(-m1 * t + asinh(p.k().sqrt() * sinh((p.q1 - p.p1) / 2.0 * t)?)),
                t0,
                tol,
            )
            .map_err(|e| e.in_case("RC (2,1)"))?;
            let branch = if r.at_peak {
                "rc: peak of the zero curve"
            } else {
                "rc: diagonal root"
            };
            (r.tau, branch.to_string())
        }
    };
    Ok(CaseResult {
        tau_12,
        tau_21,
        sub_case_12: "rc: fixed point of the optimally scaled zero curve".into(),
        sub_case_21: sub_21,
        scaling_12: (ScalingMatrix::new(lambda_12), ScalingMatrix::identity()),
        scaling_21: (ScalingMatrix::identity(), ScalingMatrix::identity()),
        epsilons: None,
        key_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example6() -> RRParams {
        RRParams {
            p1: 0.1,
            q1: 0.2,
            p2: 0.1,
            q2: 0.2,
            a: 1.0,
            b: 1.0,
            c: 1.1,
            d: 2.1,
        }
    }

    #[test]
    fn example6_curve_peak() {
        let p = example6();
        let tol = Tolerances::default();
        let s0 = rr_s0(&p, &tol).unwrap();
        let (pt, by_condition) = rr_curve_peak(&p, s0, &tol).unwrap();
        assert!(by_condition);
        assert!((pt.t - 0.155351).abs() < 1e-4, "{pt:?}");
        assert!((pt.s - 2.4064).abs() < 1e-4, "{pt:?}");
        assert!(rr_schur_k(&p, pt.t, pt.s).unwrap().abs() < 1e-10);
    }

    #[test]
    fn k_on_the_t_axis() {
        let p = example6();
        for i in 1..=10 {
            let t = 0.37 * i as f64;
            let expected = -(1.0 - (-2.0 * p.p1 * t).exp()) * (1.0 - (-2.0 * p.q1 * t).exp());
            assert_relative_eq!(rr_schur_k(&p, t, 0.0).unwrap(), expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn k_is_f_at_the_optimal_scaling() {
        let p = example6();
        for &(t, s) in &[(0.1, 0.2), (1.0, 3.0), (2.5, 0.7), (0.0, 1.3)] {
            let lam = p.optimal_lambda(t);
            assert_relative_eq!(
                rr_schur_f(&p, lam, t, s).unwrap(),
                rr_schur_k(&p, t, s).unwrap(),
                epsilon = 1e-13
            );
            for &l in &[0.3, 0.9, 1.7, 4.0] {
                assert!(rr_schur_k(&p, t, s).unwrap() <= rr_schur_f(&p, l, t, s).unwrap() + 1e-15);
            }
        }
    }

    #[test]
    fn f_sign_matches_norm() {
        let p = example6();
        let m = p.matrix();
        for &(lam, t, s) in &[(0.7, 0.1, 0.3), (1.3, 2.0, 0.5), (1.0, 0.05, 4.0), (2.0, 6.0, 6.0)] {
            let d1 = Matrix2::diag(lam, 1.0 / lam);
            let md = m * d1;
            let e1 = JordanForm::RealDiagonal { p: p.p1, q: p.q1 }.expm(t);
            let e2 = JordanForm::RealDiagonal { p: p.p2, q: p.q2 }.expm(s);
            let n = (md.inverse().unwrap() * e2 * md * e1).norm();
            let f = rr_schur_f(&p, lam, t, s).unwrap();
            assert_eq!(n < 1.0, f < 0.0, "lam {lam} t {t} s {s} n {n} f {f}");
        }
    }

    #[test]
    fn x5_x7_taus() {
        let j1 = JordanForm::RealDiagonal { p: 0.1, q: 0.2 };
        let j2 = JordanForm::RealDiagonal { p: 0.2, q: 0.42 };
        let m = Matrix2::new(1.0, 1.0, 1.1, 2.1);
        let r = tau_rr(&j1, &j2, &m, &Tolerances::default()).unwrap();
        assert!((r.tau_12 - 0.4120).abs() < 1e-3, "{r:?}");
        assert!((r.tau_21 - 0.0774).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn zero_entry_and_interval() {
        let j = JordanForm::RealDiagonal { p: 0.1, q: 0.2 };
        let tol = Tolerances::default();
        let r = tau_rr(&j, &j, &Matrix2::new(2.0, 0.0, 3.0, 0.5), &tol).unwrap();
        assert_eq!((r.tau_12, r.tau_21), (0.0, 0.0));
        // ad = 1.5 sits inside [-1, 2]
        let r = tau_rr(&j, &j, &Matrix2::new(1.5, 1.0, 0.5, 1.0), &tol).unwrap();
        assert_eq!(r.tau_12, 0.0);
    }

    #[test]
    fn cc_values() {
        let m = Matrix2::new(0.0, 1.0, -1.0, 0.0);
        assert_eq!(cc_tau(0.3, 0.4, &m), 0.0);
        let m = Matrix2::new(2.0, 1.0, 1.0, 1.0);
        let x: f64 = 7.0 / 2.0;
        assert_relative_eq!(cc_tau(0.25, 0.25, &m), x.acosh() / 0.5, epsilon = 1e-15);
    }

    #[test]
    fn cc_zero_set_shift() {
        let m = Matrix2::new(2.0, 1.0, 1.0, 1.0);
        let (a1, a2, b2) = (0.3, 0.7, 1.9);
        let per = std::f64::consts::PI / b2;
        for i in 0..10 {
            let s = 0.21 * i as f64;
            let d = cc_zero_set_t(a1, a2, b2, &m, s + per).unwrap() - cc_zero_set_t(a1, a2, b2, &m, s).unwrap();
            assert!((d + a2 / a1 * per).abs() < 1e-10);
        }
    }

    #[test]
    fn rc_peak_closed_form_matches_curve() {
        let p = RCParams {
            p1: 0.1,
            q1: 0.2,
            alpha2: 0.5,
            beta2: 1.3,
            a: 3.0,
            b: 1.0,
            c: 2.0,
            d: 1.0,
        };
        let (t0, h) = rc_peak_21(&p).unwrap();
        assert_relative_eq!(rc_zero_curve_21(&p, t0).unwrap(), h, epsilon = 1e-10);
        let dt = 1e-4;
        assert!(rc_zero_curve_21(&p, t0 - dt).unwrap() < h);
        assert!(rc_zero_curve_21(&p, t0 + dt).unwrap() < h);
    }
}
