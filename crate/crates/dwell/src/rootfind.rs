//! Bracketed scalar root finding, fixed points of decreasing maps, nested
//! curve intersections and golden-section minimization.
//!
//! Every objective returns `Result<f64>` so that the overflow guard on
//! hyperbolic functions propagates as an error instead of an infinity.

use serde::{Deserialize, Serialize};

use crate::error::{DwellError, Result};

/// Largest argument accepted by [`sinh`], [`cosh`] and [`exp`].
pub const HYPERBOLIC_CAP: f64 = 700.0;

/// Upper end of [`expand_bracket`].
pub const EXPAND_LIMIT: f64 = 1e6;

const MAX_BISECTIONS: usize = 200;

#[inline]
fn guard(x: f64) -> Result<f64> {
    if x.abs() > HYPERBOLIC_CAP || x.is_nan() {
        Err(DwellError::OverflowDomain { arg: x })
    } else {
        Ok(x)
    }
}

pub fn sinh(x: f64) -> Result<f64> {
    Ok(guard(x)?.sinh())
}

pub fn cosh(x: f64) -> Result<f64> {
    Ok(guard(x)?.cosh())
}

/// Only positive arguments are capped; `exp` of a large negative number is
/// a harmless zero.
pub fn exp(x: f64) -> Result<f64> {
    if x > HYPERBOLIC_CAP || x.is_nan() {
        Err(DwellError::OverflowDomain { arg: x })
    } else {
        Ok(x.exp())
    }
}

/// Solver tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute on `[0, 100]`, scaled by `|x|/100` beyond.
    pub arg_tol: f64,
    pub res_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            arg_tol: 1e-12,
            res_tol: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn arg_tol_at(&self, x: f64) -> f64 {
        self.arg_tol * (x.abs() / 100.0).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Evaluate `f` at both ends.
    pub fn new<F>(f: &mut F, lo: f64, hi: f64) -> Result<Bracket>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        Ok(Bracket {
            lo,
            hi,
            f_lo: f(lo)?,
            f_hi: f(hi)?,
        })
    }

    pub fn has_sign_change(&self) -> bool {
        self.f_lo * self.f_hi <= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootMethod {
    Bisection,
    SafeguardedSecant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
    pub method: RootMethod,
}

/// Bisection with secant steps that are accepted only when they land well
/// inside the current bracket and the previous step at least halved it.
pub fn solve_bracketed<F>(mut f: F, bracket: Bracket, tol: &Tolerances) -> Result<RootResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = bracket;
    if f_lo.is_nan() || f_hi.is_nan() {
        return Err(DwellError::NoSignChange { lo, hi });
    }
    if f_lo == 0.0 {
        return Ok(RootResult {
            root: lo,
            residual: 0.0,
            iterations: 0,
            method: RootMethod::Bisection,
        });
    }
    if f_hi == 0.0 {
        return Ok(RootResult {
            root: hi,
            residual: 0.0,
            iterations: 0,
            method: RootMethod::Bisection,
        });
    }
    if f_lo * f_hi > 0.0 {
        return Err(DwellError::NoSignChange { lo, hi });
    }

    let mut iterations = 0;
    let mut bisections = 0;
    let mut used_secant = false;
    let mut last_width = hi - lo;
    let mut best = if f_lo.abs() < f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    loop {
        let width = hi - lo;
        let mid = lo + 0.5 * width;
        if width <= tol.arg_tol_at(mid) || mid <= lo || mid >= hi {
            break;
        }
        if bisections >= MAX_BISECTIONS {
            return Err(DwellError::MaxIterations(MAX_BISECTIONS));
        }
        iterations += 1;

        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let margin = 0.05 * width;
        let try_secant = width <= 0.5 * last_width
            && secant.is_finite()
            && secant > lo + margin
            && secant < hi - margin;
        let x = if try_secant {
            used_secant = true;
            secant
        } else {
            bisections += 1;
            mid
        };
        last_width = width;

        let fx = f(x)?;
        if fx.is_nan() {
            return Err(DwellError::MaxIterations(bisections));
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 {
            best = (x, 0.0);
            break;
        }
        if (fx < 0.0) == (f_lo < 0.0) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }
    let method = if used_secant {
        RootMethod::SafeguardedSecant
    } else {
        RootMethod::Bisection
    };
    Ok(RootResult {
        root: best.0,
        residual: best.1,
        iterations,
        method,
    })
}

/// Step away from `start` with doubling steps, beginning at `step`, until
/// `f` changes sign or the argument passes [`EXPAND_LIMIT`].
pub fn expand_bracket_with_step<F>(
    mut f: F,
    start: f64,
    direction: f64,
    step: f64,
) -> Result<Bracket>
where
    F: FnMut(f64) -> Result<f64>,
{
    let dir = if direction < 0.0 { -1.0 } else { 1.0 };
    let mut prev = start;
    let mut f_prev = f(start)?;
    if !f_prev.is_finite() {
        return Err(DwellError::InvalidInput(format!(
            "objective is not finite at bracket start {start}"
        )));
    }
    let mut h = step.abs().max(f64::MIN_POSITIVE);
    loop {
        let x = start + dir * h;
        if (x - start).abs() > EXPAND_LIMIT {
            return Err(DwellError::NoRootInRange { limit: EXPAND_LIMIT });
        }
        let fx = f(x)?;
        if f_prev == 0.0 || f_prev * fx <= 0.0 {
            let (lo, hi, f_lo, f_hi) = if prev < x {
                (prev, x, f_prev, fx)
            } else {
                (x, prev, fx, f_prev)
            };
            return Ok(Bracket { lo, hi, f_lo, f_hi });
        }
        prev = x;
        f_prev = fx;
        h *= 2.0;
    }
}

/// [`expand_bracket_with_step`] with a first step of `1e-3`.
pub fn expand_bracket<F>(f: F, start: f64, direction: f64) -> Result<Bracket>
where
    F: FnMut(f64) -> Result<f64>,
{
    expand_bracket_with_step(f, start, direction, 1e-3)
}

/// Root of `f` on `(start, EXPAND_LIMIT]`, found by expansion then bisection.
pub fn first_root_after<F>(mut f: F, start: f64, step: f64, tol: &Tolerances) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let br = expand_bracket_with_step(&mut f, start, 1.0, step)?;
    Ok(solve_bracketed(&mut f, br, tol)?.root)
}

/// Fixed point of a decreasing map on `[0, inf)`. A map with `S(0) <= 0`
/// stays below the diagonal and yields zero.
pub fn fixed_point_decreasing<F>(mut s: F, tol: &Tolerances) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let s0 = s(0.0)?;
    if s0 <= 0.0 {
        return Ok(0.0);
    }
    let mut g = |t: f64| Ok(s(t)? - t);
    let br = expand_bracket_with_step(&mut g, 0.0, 1.0, s0.min(1.0) * 1e-3)?;
    let root = solve_bracketed(&mut g, br, tol)?.root;
    let delta = 1e-6 * root.max(1.0);
    let left = g(root - delta)? + (root - delta);
    let right = g(root + delta)? + (root + delta);
    if left < right - 1e-12 * left.abs().max(1.0) {
        return Err(DwellError::NotDecreasing { at: root });
    }
    Ok(root)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub s: f64,
    pub residual: f64,
}

/// Intersection of the curve `s -> (t(s), s)` with `condition(t, s) = 0`,
/// by bisection in `s` over `[s_lo, s_hi]`.
pub fn solve_curve_intersection<C, G>(
    mut zero_curve: C,
    mut condition: G,
    s_lo: f64,
    s_hi: f64,
    tol: &Tolerances,
) -> Result<CurvePoint>
where
    C: FnMut(f64) -> Result<f64>,
    G: FnMut(f64, f64) -> Result<f64>,
{
    let mut outer = |s: f64| -> Result<f64> {
        let t = zero_curve(s).map_err(|e| DwellError::InnerSolveFailed {
            s,
            source: Box::new(e),
        })?;
        condition(t, s)
    };
    let br = Bracket::new(&mut outer, s_lo, s_hi)?;
    let r = solve_bracketed(&mut outer, br, tol)?;
    let t = zero_curve(r.root).map_err(|e| DwellError::InnerSolveFailed {
        s: r.root,
        source: Box::new(e),
    })?;
    Ok(CurvePoint {
        t,
        s: r.root,
        residual: r.residual,
    })
}

/// Threshold for a separable region.
///
/// The bad set is `{(t, s) : phi(s) < big_f(t)}` where `phi` decreases up
/// to `phi_argmin` and increases after it, and `big_f` increases up to
/// `f_argmax` and decreases after it. The returned `tau` is the least value
/// with `phi(s) >= big_f(t)` for every `t, s > tau`; it is the root of the
/// nondecreasing function `phi(max(tau, phi_argmin)) - big_f(max(tau, f_argmax))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableThreshold {
    pub tau: f64,
    /// `tau < f_argmax`: the bound is the level of the peak of `big_f`.
    pub at_peak: bool,
    /// `tau < phi_argmin`: the bound is set by the trough of `phi`.
    pub at_trough: bool,
}

pub fn separable_threshold<P, F>(
    mut phi: P,
    phi_argmin: f64,
    mut big_f: F,
    f_argmax: f64,
    tol: &Tolerances,
) -> Result<SeparableThreshold>
where
    P: FnMut(f64) -> Result<f64>,
    F: FnMut(f64) -> Result<f64>,
{
    let mut gap = |tau: f64| -> Result<f64> {
        Ok(phi(tau.max(phi_argmin))? - big_f(tau.max(f_argmax))?)
    };
    if gap(0.0)? >= 0.0 {
        return Ok(SeparableThreshold {
            tau: 0.0,
            at_peak: f_argmax > 0.0,
            at_trough: phi_argmin > 0.0,
        });
    }
    let step = 1e-3 * phi_argmin.max(f_argmax).max(1.0);
    let br = expand_bracket_with_step(&mut gap, 0.0, 1.0, step)?;
    let tau = solve_bracketed(&mut gap, br, tol)?.root;
    Ok(SeparableThreshold {
        tau,
        at_peak: tau < f_argmax,
        at_trough: tau < phi_argmin,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization on `[lo, hi]`; returns `(x, f(x))`.
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut guard_iters = 0;
    while (b - a).abs() > x_tol && guard_iters < 300 {
        guard_iters += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x)?;
    let mut best = (x, fx);
    for (xx, ff) in [(c, fc), (d, fd)] {
        if ff < best.1 {
            best = (xx, ff);
        }
    }
    Ok(best)
}

/// Grid scan over `n` points then golden-section refinement around the best
/// grid cell. Guards against multimodal objectives that a bare golden
/// search would get wrong.
pub fn scan_then_golden<F>(mut f: F, lo: f64, hi: f64, n: usize, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = n.max(3);
    let h = (hi - lo) / (n - 1) as f64;
    let mut best = (lo, f(lo)?);
    let mut best_i = 0;
    for i in 1..n {
        let x = lo + h * i as f64;
        let fx = f(x)?;
        if fx < best.1 {
            best = (x, fx);
            best_i = i;
        }
    }
    let a = lo + h * best_i.saturating_sub(1) as f64;
    let b = (lo + h * (best_i + 1) as f64).min(hi);
    let refined = golden_section_min(&mut f, a, b, x_tol)?;
    Ok(if refined.1 <= best.1 { refined } else { best })
}
