//! Exact piecewise flow of the switched system, random dwell-constrained
//! signals, empirical verification of a report, and the flower-graph
//! extension where one center subsystem alternates with several petals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cases_defective::nr_line_peak;
use crate::dwell_core::{analyze_pair, grid_check, AnalysisOptions, Direction, DwellReport};
use crate::error::{DwellError, Result};
use crate::linalg2::{classify_jordan, spectral_norm, vnorm, JordanDecomposition, JordanForm, Matrix2, Vec2};
use crate::rootfind::{expand_bracket_with_step, scan_then_golden, solve_bracketed, Tolerances};

/// Piecewise-constant signal: `(subsystem index, duration)` segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingSignal {
    pub segments: Vec<(usize, f64)>,
}

impl SwitchingSignal {
    pub fn new(segments: Vec<(usize, f64)>) -> Result<SwitchingSignal> {
        if let Some(&(_, d)) = segments.iter().find(|(_, d)| !(*d > 0.0 && d.is_finite())) {
            return Err(DwellError::InvalidInput(format!("segment duration must be positive, got {d}")));
        }
        Ok(SwitchingSignal { segments })
    }

    /// Active subsystem at time zero.
    pub fn start(&self) -> Option<usize> {
        self.segments.first().map(|s| s.0)
    }

    /// Switching instants `d_1, d_2, ...` (end of every segment).
    pub fn switch_times(&self) -> Vec<f64> {
        self.segments
            .iter()
            .scan(0.0, |acc, &(_, d)| {
                *acc += d;
                Some(*acc)
            })
            .collect()
    }

    pub fn min_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub state: Vec2,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// `||e^{A_j s} e^{A_i t}||` for consecutive segment pairs from the start.
    pub cycle_factors: Vec<f64>,
}

/// Flow of `x' = A_sigma x` with closed-form exponentials; samples every
/// `sample_step` inside segments and at every switching instant.
pub fn flow(subsystems: &[Matrix2], signal: &SwitchingSignal, x0: Vec2, sample_step: f64) -> Result<Trajectory> {
    let decs = subsystems
        .iter()
        .map(|a| classify_jordan(a, crate::linalg2::DEFAULT_DISC_TOL))
        .collect::<Result<Vec<_>>>()?;
    flow_decomposed(&decs, signal, x0, sample_step)
}

fn flow_decomposed(
    decs: &[JordanDecomposition],
    signal: &SwitchingSignal,
    x0: Vec2,
    sample_step: f64,
) -> Result<Trajectory> {
    if vnorm(x0) == 0.0 {
        return Err(DwellError::InvalidInput("initial state must be nonzero".into()));
    }
    if !(sample_step > 0.0) {
        return Err(DwellError::InvalidInput("sample step must be positive".into()));
    }
    let mut samples = vec![Sample {
        time: 0.0,
        state: x0,
        norm: vnorm(x0),
    }];
    let mut x = x0;
    let mut time = 0.0;
    let mut seg_maps = Vec::with_capacity(signal.segments.len());
    for &(i, d) in &signal.segments {
        let dec = decs.get(i).ok_or(DwellError::IndexOutOfRange { index: i })?;
        let n_inner = (d / sample_step).ceil().max(1.0) as usize;
        for k in 1..n_inner {
            let u = d * k as f64 / n_inner as f64;
            let y = dec.expm(u).apply(x);
            samples.push(Sample {
                time: time + u,
                state: y,
                norm: vnorm(y),
            });
        }
        let e = dec.expm(d);
        x = e.apply(x);
        time += d;
        samples.push(Sample {
            time,
            state: x,
            norm: vnorm(x),
        });
        seg_maps.push(e);
    }
    let cycle_factors = seg_maps
        .chunks_exact(2)
        .map(|w| spectral_norm(&(w[1] * w[0])))
        .collect();
    Ok(Trajectory {
        samples,
        cycle_factors,
    })
}

/// Alternating `0, 1, 0, 1, ...` signal with `2 cycles` segments. Durations
/// are uniform on `[margin tau, 10 margin tau]`, or on `(0, 5]` when
/// `tau = 0`.
pub fn random_signal(tau: f64, margin: f64, cycles: usize, seed: u64) -> SwitchingSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_signal_with(&mut rng, tau, margin, cycles)
}

fn random_signal_with(rng: &mut ChaCha8Rng, tau: f64, margin: f64, cycles: usize) -> SwitchingSignal {
    let lo = margin * tau;
    let segments = (0..2 * cycles.max(1))
        .map(|k| {
            let d = if tau > 0.0 {
                rng.random_range(lo..=10.0 * lo)
            } else {
                5.0 * (1.0 - rng.random::<f64>())
            };
            (k % 2, d)
        })
        .collect();
    SwitchingSignal { segments }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub grid_pass: bool,
    pub grid_worst: f64,
    pub cycle_pass: bool,
    pub max_cycle_factor: f64,
    pub trajectory_pass: bool,
    /// Largest `||x(t)|| / ||x(0)||` seen.
    pub max_growth: f64,
    pub eta_xi_bound: f64,
    pub direction: Direction,
    pub trials: usize,
    pub seed: u64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.grid_pass && self.cycle_pass && self.trajectory_pass
    }
}

/// Settings for [`verify_dwell`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Durations are at least `margin tau`.
    pub margin: f64,
    pub cycles: usize,
    pub grid_points: usize,
    pub grid_span: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 20,
            seed: 0,
            margin: 1.05,
            cycles: 20,
            grid_points: 40,
            grid_span: 50.0,
        }
    }
}

/// Scaled cycle norms of a two-subsystem signal that starts in `A1`, grouped
/// as `direction` prescribes; in `(2, 1)` the first segment is outside every
/// cycle.
pub fn scaled_cycle_factors(
    report: &DwellReport,
    direction: Direction,
    signal: &SwitchingSignal,
) -> Result<Vec<f64>> {
    let skip = match direction {
        Direction::OneTwo => 0,
        Direction::TwoOne => 1,
    };
    signal.segments[skip.min(signal.segments.len())..]
        .chunks_exact(2)
        .map(|w| {
            let (t, s) = match direction {
                Direction::OneTwo => (w[0].1, w[1].1),
                Direction::TwoOne => (w[1].1, w[0].1),
            };
            report.cycle_norm(direction, t, s)
        })
        .collect()
}

/// Grid check of both directions plus seeded Monte Carlo signals in the
/// class with dwell times at least `margin tau`.
pub fn verify_dwell(a1: &Matrix2, a2: &Matrix2, report: &DwellReport, opts: &VerifyOptions) -> Result<VerificationReport> {
    let mut grid_worst = 0.0f64;
    for dir in [Direction::OneTwo, Direction::TwoOne] {
        grid_worst = grid_worst.max(grid_check(report, dir, opts.grid_points, opts.grid_span)?.max_norm);
    }
    let direction = report.governing_direction();
    let tau = report.tau;
    let bc = report.bound_constants(direction);
    let bound = bc.eta * bc.xi;
    let decs = [
        classify_jordan(a1, crate::linalg2::DEFAULT_DISC_TOL)?,
        classify_jordan(a2, crate::linalg2::DEFAULT_DISC_TOL)?,
    ];
    let mut max_cycle = 0.0f64;
    let mut max_growth = 0.0f64;
    for trial in 0..opts.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(trial as u64);
        let signal = random_signal_with(&mut rng, tau, opts.margin, opts.cycles);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let x0 = [angle.cos(), angle.sin()];
        for f in scaled_cycle_factors(report, direction, &signal)? {
            max_cycle = max_cycle.max(f);
        }
        let step = (signal.min_duration() / 8.0).max(1e-3);
        let traj = flow_decomposed(&decs, &signal, x0, step)?;
        for s in &traj.samples {
            max_growth = max_growth.max(s.norm);
        }
    }
    Ok(VerificationReport {
        grid_pass: grid_worst < 1.0,
        grid_worst,
        cycle_pass: max_cycle < 1.0,
        max_cycle_factor: max_cycle,
        trajectory_pass: max_growth <= bound * (1.0 + 1e-12),
        max_growth,
        eta_xi_bound: bound,
        direction,
        trials: opts.trials,
        seed: opts.seed,
    })
}

// ---------------------------------------------------------------------------
// Flower graph

/// Threshold of the multimodal system and each petal's contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowerResult {
    pub tau: f64,
    pub per_petal: Vec<f64>,
    /// Shared scaling of a real-diagonalizable center.
    pub lambda1: Option<f64>,
    /// False when the per-petal analyses chose different center scalings,
    /// so the maximum is not certified by a single basis.
    pub shared_center_basis: bool,
}

/// Least `tau >= 0` with `curve(s) <= tau` for every `s >= tau`, for a
/// curve that increases up to `peak` and decreases after it.
fn unimodal_threshold<C>(mut curve: C, peak: f64, tol: &Tolerances) -> Result<f64>
where
    C: FnMut(f64) -> Result<f64>,
{
    let top = curve(peak)?;
    if top <= 0.0 {
        return Ok(0.0);
    }
    if top <= peak {
        return Ok(top);
    }
    let mut g = |s: f64| Ok(curve(s)? - s);
    let br = expand_bracket_with_step(&mut g, peak, 1.0, top.max(1e-3))?;
    Ok(solve_bracketed(&mut g, br, tol)?.root)
}

/// One petal's threshold against a real-diagonalizable center with slow
/// rate `p1` and scaling `diag(lambda, 1/lambda)`; `m = P_j^-1 P_1` has
/// determinant one.
pub fn petal_tau(p1: f64, petal: &JordanForm, m: &Matrix2, lambda: f64, tol: &Tolerances) -> Result<f64> {
    let (a, b, c, d) = (m.a11 * lambda, m.a12 / lambda, m.a21 * lambda, m.a22 / lambda);
    match *petal {
        JordanForm::Complex { alpha, .. } => {
            let x = ((a * a + b * b + c * c + d * d) / 2.0).max(1.0);
            Ok(x.acosh() / (p1 + alpha))
        }
        JordanForm::Defective { n } => {
            let k = (c * c + d * d) / 2.0;
            let peak = if k > n { (1.0 / (n * n) - 1.0 / (k * k)).sqrt() } else { 0.0 };
            unimodal_threshold(|s| Ok((-n * s + (k * s).asinh()) / p1), peak, tol)
        }
        JordanForm::RealDiagonal { p, q } => {
            let r = (a * a + b * b) * (c * c + d * d);
            let (h, mm) = ((q - p) / 2.0, (q + p) / 2.0);
            let peak = nr_line_peak(mm, h, r);
            unimodal_threshold(
                |s| Ok((-mm * s + (r.sqrt() * crate::rootfind::sinh(h * s)?).asinh()) / p1),
                peak,
                tol,
            )
        }
        // M^-1 e^{J s} M = e^{-p s} I
        JordanForm::Scalar { .. } => Ok(0.0),
    }
}

/// Threshold for a center `A1` alternating with each petal.
pub fn flower_tau(center: &Matrix2, petals: &[Matrix2], opts: &AnalysisOptions) -> Result<FlowerResult> {
    if petals.is_empty() {
        return Err(DwellError::InvalidInput("flower needs at least one petal".into()));
    }
    let c = classify_jordan(center, opts.disc_tol)?;
    match c.form {
        JordanForm::RealDiagonal { p: p1, .. } => {
            let mut transitions = Vec::with_capacity(petals.len());
            for a in petals {
                let d = classify_jordan(a, opts.disc_tol)?;
                let mut m = d.basis.inverse()? * c.basis;
                // only the diagonal petal formula uses det = +1; the others are
                // blind to the sign
                if m.det() < 0.0 {
                    m = Matrix2::diag(1.0, -1.0) * m;
                }
                transitions.push((d.form, m));
            }
            let tol = opts.tol;
            let worst = |u: f64| -> Result<f64> {
                let lam = u.exp();
                let mut w = 0.0f64;
                for (form, m) in &transitions {
                    w = w.max(petal_tau(p1, form, m, lam, &tol)?);
                }
                Ok(w)
            };
            let (u, tau) = scan_then_golden(worst, -8.0, 8.0, 400, 1e-10)?;
            let lam = u.exp();
            let per_petal = transitions
                .iter()
                .map(|(form, m)| petal_tau(p1, form, m, lam, &tol))
                .collect::<Result<Vec<_>>>()?;
            Ok(FlowerResult {
                tau,
                per_petal,
                lambda1: Some(lam),
                shared_center_basis: true,
            })
        }
        _ => {
            // the center's basis must not move from petal to petal
            let first = center_petals(center, petals, opts)?;
            if first.shared_center_basis || !opts.optimal_basis {
                return Ok(first);
            }
            let fixed = AnalysisOptions {
                optimal_basis: false,
                ..*opts
            };
            center_petals(center, petals, &fixed)
        }
    }
}

fn center_petals(center: &Matrix2, petals: &[Matrix2], opts: &AnalysisOptions) -> Result<FlowerResult> {
    let mut per_petal = Vec::with_capacity(petals.len());
    let mut frames = Vec::with_capacity(petals.len());
    for a in petals {
        let r = analyze_pair(center, a, opts)?;
        per_petal.push(r.tau_12);
        frames.push((r.frame.p1, r.scaling_12.0));
    }
    let shared = frames.windows(2).all(|w| {
        (w[0].0 - w[1].0).max_abs() <= 1e-12 * w[0].0.max_abs() && w[0].1 == w[1].1
    });
    Ok(FlowerResult {
        tau: per_petal.iter().cloned().fold(0.0, f64::max),
        per_petal,
        lambda1: None,
        shared_center_basis: shared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_segment_decay() {
        let sig = SwitchingSignal::new(vec![(0, 1.0)]).unwrap();
        let tr = flow(&[Matrix2::diag(-1.0, -1.0)], &sig, [1.0, 0.0], 0.1).unwrap();
        let last = tr.samples.last().unwrap();
        assert_relative_eq!(last.state[0], (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(last.state[1], 0.0);
    }

    #[test]
    fn zero_duration_rejected() {
        assert!(SwitchingSignal::new(vec![(0, 1.0), (1, 0.0)]).is_err());
    }

    #[test]
    fn bad_index() {
        let sig = SwitchingSignal::new(vec![(3, 1.0)]).unwrap();
        assert!(matches!(
            flow(&[Matrix2::diag(-1.0, -1.0)], &sig, [1.0, 0.0], 0.1),
            Err(DwellError::IndexOutOfRange { index: 3 })
        ));
    }

    #[test]
    fn signals_are_deterministic_and_respect_margin() {
        let a = random_signal(2.0, 1.05, 30, 7);
        assert_eq!(a, random_signal(2.0, 1.05, 30, 7));
        assert!(a.min_duration() >= 2.1);
        let z = random_signal(0.0, 1.05, 30, 7);
        assert!(z.segments.iter().all(|s| s.1 > 0.0 && s.1 <= 5.0));
        assert_eq!(a.start(), Some(0));
    }

    #[test]
    fn semigroup() {
        let a = Matrix2::new(0.01, -0.1, 0.231, -0.31);
        let one = flow(&[a], &SwitchingSignal::new(vec![(0, 3.0)]).unwrap(), [0.3, 1.0], 10.0).unwrap();
        let two = flow(&[a], &SwitchingSignal::new(vec![(0, 1.2), (0, 1.8)]).unwrap(), [0.3, 1.0], 10.0).unwrap();
        let (x, y) = (one.samples.last().unwrap().state, two.samples.last().unwrap().state);
        assert!((x[0] - y[0]).abs() < 1e-12 && (x[1] - y[1]).abs() < 1e-12);
    }

    #[test]
    fn flower_identical_petals() {
        let center = Matrix2::new(-113.0, -25.0, 361.0, 77.0).scale(1.0 / 18.0);
        let petal = Matrix2::new(0.0, 1.0, -2.0, -1.0);
        let opts = AnalysisOptions::default();
        let one = flower_tau(&center, &[petal], &opts).unwrap();
        let two = flower_tau(&center, &[petal, petal], &opts).unwrap();
        assert_eq!(one.tau, two.tau);
        assert_eq!(one.tau, analyze_pair(&center, &petal, &opts).unwrap().tau_12);
    }

    #[test]
    fn flower_real_center_minimizes_over_lambda() {
        let center = Matrix2::new(-0.2, 0.0, 0.0, -0.42);
        let petals = [Matrix2::new(0.0, 1.0, -2.0, -1.0), Matrix2::new(-0.3, 2.0, -0.7, -0.5)];
        let opts = AnalysisOptions::default();
        let f = flower_tau(&center, &petals, &opts).unwrap();
        let lam = f.lambda1.unwrap();
        let c = classify_jordan(&center, opts.disc_tol).unwrap();
        let p1 = c.form.slowest_rate();
        let worst = |l: f64| {
            petals
                .iter()
                .map(|a| {
                    let d = classify_jordan(a, opts.disc_tol).unwrap();
                    let mut m = d.basis.inverse().unwrap() * c.basis;
                    if m.det() < 0.0 {
                        m = Matrix2::diag(1.0, -1.0) * m;
                    }
                    petal_tau(p1, &d.form, &m, l, &opts.tol).unwrap()
                })
                .fold(0.0, f64::max)
        };
        assert!((worst(lam) - f.tau).abs() <= 1e-10);
        for i in 0..100 {
            let l = (-4.0 + 8.0 * i as f64 / 99.0).exp();
            assert!(f.tau <= worst(l) + 1e-12, "{l}");
        }
        assert_eq!(f.per_petal.iter().cloned().fold(0.0, f64::max), f.tau);
    }

    #[test]
    fn one_cycle_matches_jordan_product() {
        let a1 = Matrix2::new(0.01, -0.1, 0.231, -0.31);
        let a2 = Matrix2::new(-0.2, 0.0, 0.0, -0.42);
        let r = analyze_pair(&a1, &a2, &AnalysisOptions::default()).unwrap();
        let (t, s) = (1.3, 0.7);
        let sig = SwitchingSignal::new(vec![(0, t), (1, s)]).unwrap();
        let x0 = [0.4, -1.1];
        let x = flow(&[a1, a2], &sig, x0, 10.0).unwrap().samples.last().unwrap().state;
        // P1 M^-1 e^{J2 s} M e^{J1 t} P1^-1 x0 with M = P2^-1 P1
        let f = &r.frame;
        let m = f.p2.inverse().unwrap() * f.p1;
        let k = f.p1 * m.inverse().unwrap() * f.j2.expm(s) * m * f.j1.expm(t) * f.p1.inverse().unwrap();
        let y = k.apply(x0);
        assert!((x[0] - y[0]).abs() < 1e-12 && (x[1] - y[1]).abs() < 1e-12);
    }

    #[test]
    fn zero_tau_is_falsified() {
        let a1 = Matrix2::new(-0.2, -5.0, 1.0, -0.3);
        let a2 = Matrix2::new(-0.4, -1.0, 5.0, -0.6);
        let mut r = analyze_pair(&a1, &a2, &AnalysisOptions::default()).unwrap();
        assert!(verify_dwell(&a1, &a2, &r, &VerifyOptions::default()).unwrap().passed());
        r.tau_12 = 0.0;
        r.tau_21 = 0.0;
        r.tau = 0.0;
        let v = verify_dwell(&a1, &a2, &r, &VerifyOptions::default()).unwrap();
        assert!(!v.grid_pass);
    }

    #[test]
    fn stable_pair_with_short_dwell() {
        // commuting pair: stable under arbitrary switching
        let a1 = Matrix2::new(-1.0, 0.5, 0.0, -2.0);
        let a2 = a1.scale(0.5);
        let r = analyze_pair(&a1, &a2, &AnalysisOptions::default()).unwrap();
        assert_eq!(r.tau, 0.0);
        let v = verify_dwell(&a1, &a2, &r, &VerifyOptions::default()).unwrap();
        assert!(v.passed(), "{v:?}");
    }
}
