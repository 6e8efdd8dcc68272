//! Older dwell-time bounds for side-by-side reports: the condition-number
//! bound `tau_Kar`, the Morse bound `tau_M`, the simple-loop bound and the
//! largest cycle length `tau_0` on the zero set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cases_defective::ln_theta;
use crate::cases_nondefective::{
    rc_map_12, rc_zero_curve_21, rr_s0, rr_zero_curve, RCParams, RRParams,
};
use crate::dwell_core::{transition_matrix, CaseId, DwellReport};
use crate::error::{DwellError, Result};
use crate::linalg2::{
    classify_jordan, spectral_norm, vdot, vnorm, JordanDecomposition, JordanForm, Matrix2,
};
use crate::rootfind::{expand_bracket_with_step, scan_then_golden, solve_bracketed, Tolerances};

/// How the comparison bases are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisPolicy {
    /// Unit-norm columns; a complex pair uses a unit complex eigenvector and
    /// a defective block uses equal-norm columns.
    #[default]
    UnitCols,
    /// The unimodular Jordan bases of the main analysis.
    Det1,
}

impl FromStr for BasisPolicy {
    type Err = DwellError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitcols" => Ok(BasisPolicy::UnitCols),
            "det1" => Ok(BasisPolicy::Det1),
            other => Err(DwellError::InvalidInput(format!(
                "unknown basis policy `{other}` (expected det1 or unitcols)"
            ))),
        }
    }
}

impl fmt::Display for BasisPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisPolicy::UnitCols => "unitcols",
            BasisPolicy::Det1 => "det1",
        })
    }
}

/// Decay data of a subsystem in a comparison basis.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Decay {
    /// `||e^{J t}|| = e^{-lambda t}`.
    Exact { lambda: f64 },
    /// `||e^{J t}|| = e^{-n t} theta(kappa t)`.
    Shear { n: f64, kappa: f64 },
}

fn comparison_basis(dec: &JordanDecomposition, policy: BasisPolicy) -> (Matrix2, Decay) {
    let p = dec.basis;
    match (dec.form, policy) {
        (JordanForm::Defective { n }, BasisPolicy::Det1) => (p, Decay::Shear { n, kappa: 1.0 }),
        (JordanForm::Defective { n }, BasisPolicy::UnitCols) => {
            let (x, j) = (p.col(0), p.col(1));
            let (xx, xj) = (vdot(x, x), vdot(x, j));
            let cross = x[0] * j[1] - x[1] * j[0];
            // |j + mu x| = |x| needs |x|^2 >= |det[x, j]|; otherwise take
            // the shortest generalized eigenvector
            let disc = xx * xx - cross * cross;
            let mu = if disc >= 0.0 {
                (-xj - disc.sqrt()) / xx
            } else {
                -xj / xx
            };
            let jm = [j[0] + mu * x[0], j[1] + mu * x[1]];
            let (nx, nj) = (vnorm(x), vnorm(jm));
            let basis = Matrix2::from_cols([x[0] / nx, x[1] / nx], [jm[0] / nj, jm[1] / nj]);
            (basis, Decay::Shear { n, kappa: nx / nj })
        }
        (JordanForm::Complex { alpha, .. }, BasisPolicy::UnitCols) => {
            // sqrt(2) [Re v, Im v] for a unit complex eigenvector v
            let k = (2.0 / p.frob_sq()).sqrt();
            (p.scale(k), Decay::Exact { lambda: alpha })
        }
        (JordanForm::RealDiagonal { p: slow, .. }, BasisPolicy::UnitCols) => {
            let (c0, c1) = (p.col(0), p.col(1));
            let basis = Matrix2::from_cols(
                [c0[0] / vnorm(c0), c0[1] / vnorm(c0)],
                [c1[0] / vnorm(c1), c1[1] / vnorm(c1)],
            );
            (basis, Decay::Exact { lambda: slow })
        }
        (form, _) => (p, Decay::Exact { lambda: form.slowest_rate() }),
    }
}

/// `ln sup_{t >= 0} e^{theta t} e^{-n t} theta(kappa t)`.
pub fn ln_c_theta(n: f64, kappa: f64, theta: f64) -> f64 {
    let d = n - theta;
    let h = kappa / 2.0;
    if h <= d {
        return 0.0;
    }
    let t = ((h * h) / (d * d) - 1.0).sqrt() / h;
    (h * t).asinh() - d * t
}

/// `tau_Kar` with the minimizing exponents of the defective subsystems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KarResult {
    pub tau: f64,
    pub theta_star: Option<Vec<f64>>,
}

/// Minimize `f` over `(0, hi)` on a log grid then by golden section.
fn log_scan_min<F>(mut f: F, hi: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (lo_u, hi_u) = ((hi * 1e-4).ln(), (hi * (1.0 - 1e-9)).ln());
    let (u, v) = scan_then_golden(|u: f64| f(u.exp()), lo_u, hi_u, 200, 1e-12)?;
    Ok((u.exp(), v))
}

pub fn tau_kar(a1: &Matrix2, a2: &Matrix2, policy: BasisPolicy, disc_tol: f64) -> Result<KarResult> {
    let d1 = classify_jordan(a1, disc_tol)?;
    let d2 = classify_jordan(a2, disc_tol)?;
    let (p1, k1) = comparison_basis(&d1, policy);
    let (p2, k2) = comparison_basis(&d2, policy);
    let ln_r = (spectral_norm(&(p1.inverse()? * p2)) * spectral_norm(&(p2.inverse()? * p1))).ln();
    match (k1, k2) {
        (Decay::Exact { lambda: l1 }, Decay::Exact { lambda: l2 }) => Ok(KarResult {
            tau: (ln_r / (l1 + l2)).max(0.0),
            theta_star: None,
        }),
        (Decay::Shear { n, kappa }, Decay::Exact { lambda })
        | (Decay::Exact { lambda }, Decay::Shear { n, kappa }) => {
            let (th, v) = log_scan_min(|th| Ok((ln_r + ln_c_theta(n, kappa, th)) / (th + lambda)), n)?;
            Ok(KarResult {
                tau: v.max(0.0),
                theta_star: Some(vec![th]),
            })
        }
        (Decay::Shear { n: n1, kappa: c1 }, Decay::Shear { n: n2, kappa: c2 }) => {
            let inner = |th1: f64| -> Result<(f64, f64)> {
                let base = ln_r + ln_c_theta(n1, c1, th1);
                log_scan_min(|th2| Ok((base + ln_c_theta(n2, c2, th2)) / (th1 + th2)), n2)
            };
            let (th1, v) = log_scan_min(|th1| Ok(inner(th1)?.1), n1)?;
            let (th2, _) = inner(th1)?;
            Ok(KarResult {
                tau: v.max(0.0),
                theta_star: Some(vec![th1, th2]),
            })
        }
    }
}

/// A Morse envelope `||e^{A t}|| <= e^{alpha - beta t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseFit {
    pub alpha: f64,
    pub beta: f64,
    pub ratio: f64,
}

/// `sup_{t >= 0} ln ||e^{A t}|| + beta t`, sampled until an analytic
/// envelope drops below the running maximum.
fn morse_alpha(dec: &JordanDecomposition, a_norm: f64, beta: f64) -> Result<f64> {
    let lam = dec.form.slowest_rate();
    let pinv = dec.basis.inverse()?;
    let ln_cond = (spectral_norm(&dec.basis) * spectral_norm(&pinv)).ln();
    let shear = matches!(dec.form, JordanForm::Defective { .. });
    let value = |t: f64| spectral_norm(&(dec.basis * dec.form.expm(t) * pinv)).ln() + beta * t;
    let envelope = |t: f64| ln_cond + (beta - lam) * t + if shear { ln_theta(t) } else { 0.0 };
    let h0 = 0.02 / a_norm.max(lam);
    let t_scale = 20.0 / lam;
    let (mut t, mut best, mut best_t, mut best_h) = (0.0, 0.0, 0.0, h0);
    let mut steps = 0usize;
    while envelope(t) > best && steps < 2_000_000 {
        let h = h0 * (t / t_scale).max(1.0);
        t += h;
        steps += 1;
        let v = value(t);
        if v > best {
            best = v;
            best_t = t;
            best_h = h;
        }
    }
    if best_t > 0.0 {
        let lo = (best_t - best_h).max(0.0);
        let (_, neg) = crate::rootfind::golden_section_min(|x| Ok(-value(x)), lo, best_t + best_h, 1e-12 * (1.0 + best_t))?;
        best = best.max(-neg);
    }
    Ok(best)
}

/// Smallest `alpha / beta` over all Morse envelopes of one subsystem.
pub fn morse_fit_infimum(a: &Matrix2, disc_tol: f64) -> Result<MorseFit> {
    let dec = classify_jordan(a, disc_tol)?;
    let lam = dec.form.slowest_rate();
    let a_norm = spectral_norm(a);
    let lo = (lam * 1e-3).ln();
    let hi = (lam * (1.0 - 1e-3)).ln();
    let (u, ratio) = scan_then_golden(
        |u: f64| Ok(morse_alpha(&dec, a_norm, u.exp())? / u.exp()),
        lo,
        hi,
        200,
        1e-10,
    )?;
    let beta = u.exp();
    Ok(MorseFit {
        alpha: ratio * beta,
        beta,
        ratio,
    })
}

/// Morse envelope as tabulated: `beta` is the slowest decay rate when the
/// subsystem is diagonalizable, and optimized when it is defective (where
/// `beta` must stay below the rate).
pub fn morse_fit(a: &Matrix2, disc_tol: f64) -> Result<MorseFit> {
    let dec = classify_jordan(a, disc_tol)?;
    let pinv = dec.basis.inverse()?;
    let p = dec.basis;
    let alpha = match dec.form {
        JordanForm::Defective { .. } => return morse_fit_infimum(a, disc_tol),
        JordanForm::Scalar { .. } => 0.0,
        JordanForm::Complex { beta: im, .. } => {
            // e^{re t} e^{A t} = P R(im t) P^-1 repeats with period pi / im
            let gain = |t: f64| {
                let r = JordanForm::Complex { alpha: 0.0, beta: im }.expm(t);
                spectral_norm(&(p * r * pinv)).ln()
            };
            let period = std::f64::consts::PI / im;
            let (_, neg) = scan_then_golden(|t| Ok(-gain(t)), 0.0, period, 400, 1e-12 * period)?;
            (-neg).max(0.0)
        }
        JordanForm::RealDiagonal { .. } => {
            // e^{p t} e^{A t} = P diag(1, u) P^-1 with u = e^{-(q - p) t} in (0, 1]
            let gain = |u: f64| spectral_norm(&(p * Matrix2::diag(1.0, u) * pinv)).ln();
            let (_, neg) = scan_then_golden(|u| Ok(-gain(u)), 0.0, 1.0, 400, 1e-13)?;
            (-neg).max(0.0)
        }
    };
    let beta = dec.form.slowest_rate();
    Ok(MorseFit {
        alpha,
        beta,
        ratio: alpha / beta,
    })
}

/// `max_i alpha_i / beta_i` with the envelopes of [`morse_fit`].
pub fn tau_morse(a1: &Matrix2, a2: &Matrix2, disc_tol: f64) -> Result<f64> {
    Ok(morse_fit(a1, disc_tol)?.ratio.max(morse_fit(a2, disc_tol)?.ratio))
}

/// Simple-loop bound on `t + s`; not defined for a defective subsystem.
pub fn tau_loop(a1: &Matrix2, a2: &Matrix2, policy: BasisPolicy, disc_tol: f64) -> Result<Option<f64>> {
    let d1 = classify_jordan(a1, disc_tol)?;
    let d2 = classify_jordan(a2, disc_tol)?;
    let (p1, k1) = comparison_basis(&d1, policy);
    let (p2, k2) = comparison_basis(&d2, policy);
    match (k1, k2) {
        (Decay::Exact { lambda: l1 }, Decay::Exact { lambda: l2 }) => {
            let ln_r = (spectral_norm(&(p1.inverse()? * p2)) * spectral_norm(&(p2.inverse()? * p1))).ln();
            Ok(Some((ln_r / l1.min(l2)).max(0.0)))
        }
        _ => Ok(None),
    }
}

/// Largest `t + s` on the zero set of the governing Schur function, taking
/// the smaller of the two directions. `None` for pairs with a defective
/// subsystem or without a case analysis.
pub fn tau_zero(report: &DwellReport, tol: &Tolerances) -> Result<Option<f64>> {
    let Some(case) = report.case_id else {
        return Ok(None);
    };
    let f = &report.frame;
    // back to the case's own ordering
    let (p1, p2, j1, j2) = if report.relabeled {
        (f.p2, f.p1, f.j2, f.j1)
    } else {
        (f.p1, f.p2, f.j1, f.j2)
    };
    let m = transition_matrix(&p1, &p2)?.m;
    let both = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    match case {
        CaseId::RR => {
            let p = RRParams::new(&j1, &j2, &m)?;
            let v12 = rr_zero_max(&p, tol)?;
            let v21 = rr_zero_max(&p.swapped(), tol)?;
            Ok(Some(both(v12, v21).unwrap_or(0.0)))
        }
        CaseId::CC => {
            let (JordanForm::Complex { alpha: a1, beta: b1 }, JordanForm::Complex { alpha: a2, beta: b2 }) = (j1, j2) else {
                unreachable!("case CC has complex blocks")
            };
            let minv = m.inverse()?;
            let v12 = curve_max(|s| Ok((rot_gain(&minv, &m, b2, s).ln() - a2 * s) / a1), b2, a2)?;
            let v21 = curve_max(|t| Ok((rot_gain(&m, &minv, b1, t).ln() - a1 * t) / a2), b1, a1)?;
            Ok(Some(both(v12, v21).unwrap_or(0.0)))
        }
        CaseId::RC => {
            let p = RCParams::new(&j1, &j2, &m)?;
            let v12 = positive_curve_max(|t| rc_map_12(&p, t), p.q1)?;
            let v21 = positive_curve_max(|t| rc_zero_curve_21(&p, t), p.q1)?;
            Ok(Some(both(v12, v21).unwrap_or(0.0)))
        }
        CaseId::NN | CaseId::NC | CaseId::NR => Ok(None),
    }
}

fn rot_gain(left: &Matrix2, right: &Matrix2, beta: f64, u: f64) -> f64 {
    let r = JordanForm::Complex { alpha: 0.0, beta }.expm(u);
    spectral_norm(&(*left * r * *right))
}

/// Max of `x + curve(x)` over `x >= 0` where `curve(x) >= 0`, for the CC
/// zero sets: the curve is periodic up to a linear decay.
fn curve_max<C>(mut curve: C, beta: f64, alpha: f64) -> Result<Option<f64>>
where
    C: FnMut(f64) -> Result<f64>,
{
    // past x_end = (max over one period of the log gain) / alpha the curve is negative
    let period = std::f64::consts::PI / beta;
    let mut peak_gain = f64::NEG_INFINITY;
    for i in 0..=400 {
        let x = period * i as f64 / 400.0;
        peak_gain = peak_gain.max(curve(x)? + alpha * x);
    }
    let x_end = peak_gain.max(0.0) + period;
    let n = ((x_end / period) * 400.0).ceil() as usize + 2;
    let objective = |x: f64, c: f64| if c >= 0.0 { x + c } else { f64::NEG_INFINITY };
    let h = x_end / n as f64;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=n {
        let x = h * i as f64;
        let v = objective(x, curve(x)?);
        if v.is_finite() && best.is_none_or(|b| v > b.1) {
            best = Some((x, v));
        }
    }
    let Some((x, v)) = best else { return Ok(None) };
    let (_, neg) = crate::rootfind::golden_section_min(
        |y| {
            let c = curve(y)?;
            Ok(if c >= 0.0 { -(y + c) } else { f64::INFINITY })
        },
        (x - h).max(0.0),
        x + h,
        1e-12 * (1.0 + x),
    )?;
    Ok(Some(v.max(-neg)))
}

/// Max of `x + curve(x)` on the interval where a unimodal or decreasing
/// curve stays non-negative.
fn positive_curve_max<C>(mut curve: C, rate: f64) -> Result<Option<f64>>
where
    C: FnMut(f64) -> Result<f64>,
{
    let tol = Tolerances::default();
    let step = 1e-3 / rate;
    // first positive x where the curve drops below zero after its rise
    let c0 = curve(step)?;
    if c0 < 0.0 && curve(0.0)? <= 0.0 {
        return Ok(None);
    }
    let mut g = |x: f64| curve(x);
    let br = expand_bracket_with_step(&mut g, step, 1.0, step)?;
    let x_end = solve_bracketed(&mut g, br, &tol)?.root;
    let (_, neg) = scan_then_golden(|x| Ok(-(x + curve(x)?.max(0.0))), 0.0, x_end, 400, 1e-12 * x_end)?;
    Ok(Some(-neg))
}

fn rr_zero_max(p: &RRParams, tol: &Tolerances) -> Result<Option<f64>> {
    let m = p.matrix();
    let zero = [p.a, p.b, p.c, p.d]
        .iter()
        .any(|&x| crate::cases_nondefective::zero_threshold(x, &m));
    let (lo, hi) = p.interval();
    if zero || (lo..=hi).contains(&p.ad()) {
        return Ok(None);
    }
    let s0 = rr_s0(p, tol)?;
    let (_, neg) = scan_then_golden(|s| Ok(-(s + rr_zero_curve(p, s, tol)?)), 0.0, s0, 400, 1e-12 * s0)?;
    Ok(Some(-neg))
}

/// Every comparison value for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub tau_kar: f64,
    pub theta_star: Option<Vec<f64>>,
    pub tau_m: f64,
    pub tau_loop: Option<f64>,
    pub tau_0: Option<f64>,
    pub policy: BasisPolicy,
    pub notes: Vec<String>,
}

pub const TAU_GC_NOTE: &str = "not computed (requires semidefinite programming)";

pub fn compare_pair(
    a1: &Matrix2,
    a2: &Matrix2,
    report: &DwellReport,
    policy: BasisPolicy,
    disc_tol: f64,
    tol: &Tolerances,
) -> Result<ComparisonReport> {
    let kar = tau_kar(a1, a2, policy, disc_tol)?;
    let mut notes = vec![
        format!("tau_GC: {TAU_GC_NOTE}"),
        "homogeneous-polynomial Lyapunov bound: absent".to_string(),
    ];
    let tau_loop = tau_loop(a1, a2, policy, disc_tol)?;
    if tau_loop.is_none() {
        notes.push("tau_loop: not defined for a defective subsystem".into());
    }
    let tau_0 = tau_zero(report, tol)?;
    Ok(ComparisonReport {
        tau_kar: kar.tau,
        theta_star: kar.theta_star,
        tau_m: tau_morse(a1, a2, disc_tol)?,
        tau_loop,
        tau_0,
        policy,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg2::DEFAULT_DISC_TOL;
    use approx::assert_relative_eq;

    #[test]
    fn c_theta_matches_dense_grid() {
        for &(n, kappa, th) in &[(1.0, 1.0, 0.8), (0.3, 2.0, 0.1), (0.9, 0.5, 0.2)] {
            let mut best = 0.0f64;
            for i in 0..200_000 {
                let t = i as f64 * 1e-3;
                best = best.max(-(n - th) * t + ln_theta(kappa * t));
            }
            assert!((best - ln_c_theta(n, kappa, th)).abs() < 1e-6);
        }
    }

    #[test]
    fn same_subsystem_loop_is_zero() {
        let a = Matrix2::new(0.01, -0.1, 0.231, -0.31);
        assert_eq!(tau_loop(&a, &a, BasisPolicy::UnitCols, DEFAULT_DISC_TOL).unwrap(), Some(0.0));
    }

    #[test]
    fn diagonal_morse_is_zero() {
        let fit = morse_fit(&Matrix2::diag(-0.3, -1.0), DEFAULT_DISC_TOL).unwrap();
        assert!(fit.ratio.abs() < 1e-12);
    }

    #[test]
    fn morse_envelope_holds() {
        let a = Matrix2::new(-0.2, -5.0, 1.0, -0.3);
        for fit in [
            morse_fit(&a, DEFAULT_DISC_TOL).unwrap(),
            morse_fit_infimum(&a, DEFAULT_DISC_TOL).unwrap(),
        ] {
        let dec = classify_jordan(&a, DEFAULT_DISC_TOL).unwrap();
        for i in 0..20_000 {
            let t = i as f64 * 5e-3;
            assert!(spectral_norm(&dec.expm(t)).ln() <= fit.alpha - fit.beta * t + 1e-9);
        }
        }
    }

    #[test]
    fn policy_round_trip() {
        for p in [BasisPolicy::Det1, BasisPolicy::UnitCols] {
            assert_eq!(p.to_string().parse::<BasisPolicy>().unwrap(), p);
        }
        assert!("x".parse::<BasisPolicy>().is_err());
    }

    #[test]
    fn unit_columns_are_unit() {
        let a = Matrix2::new(-113.0, -25.0, 361.0, 77.0).scale(1.0 / 18.0);
        let dec = classify_jordan(&a, DEFAULT_DISC_TOL).unwrap();
        let (p, decay) = comparison_basis(&dec, BasisPolicy::UnitCols);
        assert_relative_eq!(vnorm(p.col(0)), 1.0, epsilon = 1e-14);
        assert_relative_eq!(vnorm(p.col(1)), 1.0, epsilon = 1e-14);
        let j = p.inverse().unwrap() * a * p;
        let Decay::Shear { kappa, .. } = decay else { panic!() };
        assert_relative_eq!(j.a12, kappa, epsilon = 1e-10);
        assert!(j.a21.abs() < 1e-10);
    }
}
