//! Pair preparation, case dispatch and the final report.
//!
//! For a pair `(A1, A2)` with Jordan bases `P1`, `P2` the transition matrix is
//! `M = P2^-1 P1`. A scaling `D_i = diag(lambda, +-1/lambda)` changes the
//! basis to `Q_i = P_i D_i`; a direction's threshold `tau` certifies that
//! one full cycle contracts in those coordinates whenever both dwell times
//! exceed `tau`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cases_defective::{ln_theta, shear, tau_nc, tau_nn, tau_nr};
use crate::cases_nondefective::{tau_cc, tau_rc, tau_rr, CaseResult};
use crate::error::{DwellError, Result};
use crate::linalg2::{
    classify_jordan, spectral_norm, vcross, vnorm, JordanDecomposition, JordanForm, Matrix2,
    DEFAULT_DISC_TOL,
};
use crate::rootfind::Tolerances;

/// `M = P2^-1 P1` with the sign of its determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub m: Matrix2,
    pub det_sign: f64,
}

/// `M = P2^-1 P1` for unimodular `P1`, `P2`.
pub fn transition_matrix(p1: &Matrix2, p2: &Matrix2) -> Result<TransitionMatrix> {
    for p in [p1, p2] {
        let d = p.det();
        if d == 0.0 || !d.is_finite() {
            return Err(DwellError::Singular);
        }
        if (d.abs() - 1.0).abs() > 1e-12 {
            return Err(DwellError::InvalidInput(format!(
                "basis must have |det| = 1, got {d}"
            )));
        }
    }
    let m = p2.inverse()? * *p1;
    Ok(TransitionMatrix {
        m,
        det_sign: m.det().signum(),
    })
}

/// `D = diag(lambda, mu_sign / lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingMatrix {
    pub lambda: f64,
    pub mu_sign: f64,
}

impl ScalingMatrix {
    pub fn new(lambda: f64) -> ScalingMatrix {
        ScalingMatrix {
            lambda,
            mu_sign: 1.0,
        }
    }

    pub fn with_sign(lambda: f64, mu_sign: f64) -> ScalingMatrix {
        ScalingMatrix {
            lambda,
            mu_sign: mu_sign.signum(),
        }
    }

    pub fn identity() -> ScalingMatrix {
        ScalingMatrix::new(1.0)
    }

    pub fn mu(&self) -> f64 {
        self.mu_sign / self.lambda
    }

    pub fn matrix(&self) -> Matrix2 {
        Matrix2::diag(self.lambda, self.mu())
    }

    pub fn inverse_matrix(&self) -> Matrix2 {
        Matrix2::diag(1.0 / self.lambda, 1.0 / self.mu())
    }
}

/// `D2^-1 M D1`.
pub fn scaled_transition(m: &TransitionMatrix, d1: &ScalingMatrix, d2: &ScalingMatrix) -> Matrix2 {
    let (l1, m1, l2, m2) = (d1.lambda, d1.mu(), d2.lambda, d2.mu());
    let m = m.m;
    Matrix2::new(
        m.a11 * l1 / l2,
        m.a12 * m1 / l2,
        m.a21 * l1 / m2,
        m.a22 * m1 / m2,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    RR,
    CC,
    RC,
    NN,
    NC,
    NR,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    StableAllSignals,
    DwellConstrained,
}

/// `OneTwo` is a cycle that runs `A1` and then `A2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    OneTwo,
    TwoOne,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::OneTwo => "(1,2)",
            Direction::TwoOne => "(2,1)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub tol: Tolerances,
    /// Relative tolerance for the repeated-eigenvalue test.
    pub disc_tol: f64,
    /// Relative tolerance on `||A1 A2 - A2 A1||`.
    pub commute_tol: f64,
    /// Shift defective Jordan bases to their optimal position.
    pub optimal_basis: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            tol: Tolerances::default(),
            disc_tol: DEFAULT_DISC_TOL,
            commute_tol: 1e-10,
            optimal_basis: true,
        }
    }
}

/// The Jordan data the thresholds refer to, in the caller's labeling.
/// Basis shifts and sign flips are already folded into `p1`, `p2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFrame {
    pub p1: Matrix2,
    pub p2: Matrix2,
    pub j1: JordanForm,
    pub j2: JordanForm,
}

impl PairFrame {
    pub fn transition(&self) -> Result<TransitionMatrix> {
        transition_matrix(&self.p1, &self.p2)
    }

    /// Norm of one full cycle in the scaled coordinates of `direction`.
    pub fn cycle_norm(
        &self,
        d: &(ScalingMatrix, ScalingMatrix),
        direction: Direction,
        t: f64,
        s: f64,
    ) -> Result<f64> {
        Ok(spectral_norm(&self.cycle(d, direction, t, s)?))
    }

    /// One full cycle in the scaled coordinates of `direction`: `t` is spent
    /// in `A1` and `s` in `A2`.
    pub fn cycle(
        &self,
        d: &(ScalingMatrix, ScalingMatrix),
        direction: Direction,
        t: f64,
        s: f64,
    ) -> Result<Matrix2> {
        let md = scaled_transition(&self.transition()?, &d.0, &d.1);
        let mdi = md.inverse()?;
        let e1 = d.0.inverse_matrix() * self.j1.expm(t) * d.0.matrix();
        let e2 = d.1.inverse_matrix() * self.j2.expm(s) * d.1.matrix();
        Ok(match direction {
            Direction::OneTwo => mdi * e2 * md * e1,
            Direction::TwoOne => md * e1 * mdi * e2,
        })
    }
}

/// Constants of the bound `||x(t)|| <= eta xi ||x(0)||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub eta: f64,
    pub xi: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sub_case_12: String,
    pub sub_case_21: String,
    pub key_points: Vec<(String, f64)>,
    /// Reason when the pair is stable without a case analysis.
    pub shortcut: Option<String>,
    pub common_eigenvector: bool,
    pub near_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwellReport {
    pub tau_12: f64,
    pub tau_21: f64,
    pub tau: f64,
    pub verdict: Verdict,
    /// `None` when a scalar subsystem makes the case list irrelevant.
    pub case_id: Option<CaseId>,
    /// Whether the subsystems were swapped internally to reach the case's
    /// ordering; the reported values always use the caller's order.
    pub relabeled: bool,
    pub frame: PairFrame,
    pub scaling_12: (ScalingMatrix, ScalingMatrix),
    pub scaling_21: (ScalingMatrix, ScalingMatrix),
    pub basis_epsilons: Option<(f64, f64)>,
    pub eta_xi: [BoundConstants; 2],
    pub diagnostics: Diagnostics,
}

impl DwellReport {
    pub fn tau_for(&self, direction: Direction) -> f64 {
        match direction {
            Direction::OneTwo => self.tau_12,
            Direction::TwoOne => self.tau_21,
        }
    }

    pub fn scaling_for(&self, direction: Direction) -> (ScalingMatrix, ScalingMatrix) {
        match direction {
            Direction::OneTwo => self.scaling_12,
            Direction::TwoOne => self.scaling_21,
        }
    }

    /// The direction whose threshold is the reported `tau`.
    pub fn governing_direction(&self) -> Direction {
        if self.tau_12 <= self.tau_21 {
            Direction::OneTwo
        } else {
            Direction::TwoOne
        }
    }

    pub fn cycle_norm(&self, direction: Direction, t: f64, s: f64) -> Result<f64> {
        self.frame
            .cycle_norm(&self.scaling_for(direction), direction, t, s)
    }

    pub fn bound_constants(&self, direction: Direction) -> BoundConstants {
        match direction {
            Direction::OneTwo => self.eta_xi[0],
            Direction::TwoOne => self.eta_xi[1],
        }
    }
}

/// Largest cycle norm on a log-spaced grid over `(tau + 1e-6, tau + span]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub max_norm: f64,
    pub at: (f64, f64),
}

pub fn grid_check(report: &DwellReport, direction: Direction, n: usize, span: f64) -> Result<GridCheck> {
    grid_check_at(report, direction, report.tau_for(direction), n, span)
}

/// [`grid_check`] with the threshold replaced by `tau`.
pub fn grid_check_at(report: &DwellReport, direction: Direction, tau: f64, n: usize, span: f64) -> Result<GridCheck> {
    let offsets = log_grid(1e-6, span, n);
    let mut worst = GridCheck {
        max_norm: 0.0,
        at: (f64::NAN, f64::NAN),
    };
    for &dt in &offsets {
        for &ds in &offsets {
            let (t, s) = (tau + dt, tau + ds);
            let v = report.cycle_norm(direction, t, s)?;
            if v > worst.max_norm {
                worst = GridCheck { max_norm: v, at: (t, s) };
            }
        }
    }
    Ok(worst)
}

/// `n` points spaced evenly in `ln` from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn relabel_pair(r: CaseResult) -> CaseResult {
    CaseResult {
        tau_12: r.tau_21,
        tau_21: r.tau_12,
        sub_case_12: r.sub_case_21,
        sub_case_21: r.sub_case_12,
        scaling_12: (r.scaling_21.1, r.scaling_21.0),
        scaling_21: (r.scaling_12.1, r.scaling_12.0),
        epsilons: r.epsilons.map(|(a, b)| (b, a)),
        key_points: r.key_points,
    }
}

fn case_of(j1: &JordanForm, j2: &JordanForm) -> Option<(CaseId, bool)> {
    use JordanForm::*;
    Some(match (j1, j2) {
        (RealDiagonal { .. }, RealDiagonal { .. }) => (CaseId::RR, false),
        (Complex { .. }, Complex { .. }) => (CaseId::CC, false),
        (RealDiagonal { .. }, Complex { .. }) => (CaseId::RC, false),
        (Complex { .. }, RealDiagonal { .. }) => (CaseId::RC, true),
        (Defective { .. }, Defective { .. }) => (CaseId::NN, false),
        (Defective { .. }, Complex { .. }) => (CaseId::NC, false),
        (Complex { .. }, Defective { .. }) => (CaseId::NC, true),
        (Defective { .. }, RealDiagonal { .. }) => (CaseId::NR, false),
        (RealDiagonal { .. }, Defective { .. }) => (CaseId::NR, true),
        _ => return None,
    })
}

/// Real eigenvectors of a classified matrix (columns of its basis).
fn real_eigvecs(d: &JordanDecomposition) -> Vec<[f64; 2]> {
    match d.form {
        JordanForm::RealDiagonal { .. } => vec![d.basis.col(0), d.basis.col(1)],
        JordanForm::Defective { .. } => vec![d.basis.col(0)],
        _ => vec![],
    }
}

fn share_eigenvector(d1: &JordanDecomposition, d2: &JordanDecomposition) -> bool {
    for u in real_eigvecs(d1) {
        for v in real_eigvecs(d2) {
            let sin = vcross(u, v).abs() / (vnorm(u) * vnorm(v));
            if sin < 1e-9 {
                return true;
            }
        }
    }
    false
}

/// Classify both subsystems, pick the case, and compute both thresholds.
pub fn analyze_pair(a1: &Matrix2, a2: &Matrix2, opts: &AnalysisOptions) -> Result<DwellReport> {
    let d1 = classify_jordan(a1, opts.disc_tol)?;
    let d2 = classify_jordan(a2, opts.disc_tol)?;
    let mut diagnostics = Diagnostics {
        near_boundary: d1.near_boundary || d2.near_boundary,
        common_eigenvector: share_eigenvector(&d1, &d2),
        ..Diagnostics::default()
    };
    let commuting = a1.commutator(a2).norm() <= opts.commute_tol * a1.norm() * a2.norm();

    let Some((case, relabeled)) = case_of(&d1.form, &d2.form) else {
        return scalar_report(&d1, &d2, diagnostics);
    };

    // case ordering: (first, second) of the case's own labeling
    let (c1, c2) = if relabeled { (d2, d1) } else { (d1, d2) };
    let (mut p1, mut p2) = (c1.basis, c2.basis);
    let flip = Matrix2::diag(1.0, -1.0);
    if transition_matrix(&p1, &p2)?.det_sign < 0.0 {
        // a diagonal Jordan block leaves room to reverse one basis column
        if matches!(c2.form, JordanForm::RealDiagonal { .. }) {
            p2 = p2 * flip;
        } else if matches!(c1.form, JordanForm::RealDiagonal { .. }) {
            p1 = p1 * flip;
        }
    }
    let m = transition_matrix(&p1, &p2)?.m;
    let (j1, j2) = (c1.form, c2.form);
    let tol = &opts.tol;
    let result = match case {
        CaseId::RR => tau_rr(&j1, &j2, &m, tol),
        CaseId::CC => tau_cc(&j1, &j2, &m),
        CaseId::RC => tau_rc(&j1, &j2, &m, tol),
        CaseId::NN => tau_nn(&j1, &j2, &m, opts.optimal_basis, tol),
        CaseId::NC => tau_nc(&j1, &j2, &m, opts.optimal_basis, tol),
        CaseId::NR => tau_nr(&j1, &j2, &m, opts.optimal_basis, tol),
    };
    let shortcut = if commuting {
        Some("subsystems commute".to_string())
    } else if diagnostics.common_eigenvector {
        Some("subsystems share an eigenvector".to_string())
    } else {
        None
    };
    let mut r = match (result, &shortcut) {
        (Ok(r), _) => r,
        (Err(_), Some(why)) => CaseResult {
            tau_12: 0.0,
            tau_21: 0.0,
            sub_case_12: why.clone(),
            sub_case_21: why.clone(),
            scaling_12: (ScalingMatrix::identity(), ScalingMatrix::identity()),
            scaling_21: (ScalingMatrix::identity(), ScalingMatrix::identity()),
            epsilons: None,
            key_points: vec![],
        },
        (Err(e), None) => return Err(e),
    };
    if let Some((e1, e2)) = r.epsilons {
        p1 = p1 * shear(e1);
        p2 = p2 * shear(e2);
    }
    if shortcut.is_some() {
        r.tau_12 = 0.0;
        r.tau_21 = 0.0;
    }
    let mut frame = PairFrame { p1, p2, j1, j2 };
    if relabeled {
        r = relabel_pair(r);
        frame = PairFrame {
            p1: frame.p2,
            p2: frame.p1,
            j1: frame.j2,
            j2: frame.j1,
        };
    }
    diagnostics.sub_case_12 = r.sub_case_12;
    diagnostics.sub_case_21 = r.sub_case_21;
    diagnostics.key_points = r.key_points;
    diagnostics.shortcut = shortcut;
    finish(
        r.tau_12,
        r.tau_21,
        Some(case),
        relabeled,
        frame,
        r.scaling_12,
        r.scaling_21,
        r.epsilons,
        diagnostics,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    tau_12: f64,
    tau_21: f64,
    case_id: Option<CaseId>,
    relabeled: bool,
    frame: PairFrame,
    scaling_12: (ScalingMatrix, ScalingMatrix),
    scaling_21: (ScalingMatrix, ScalingMatrix),
    basis_epsilons: Option<(f64, f64)>,
    diagnostics: Diagnostics,
) -> Result<DwellReport> {
    for tau in [tau_12, tau_21] {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(DwellError::InvalidInput(format!("threshold {tau} is not a finite non-negative value")));
        }
    }
    let tau = tau_12.min(tau_21);
    let eta_xi = [
        bound_constants_frame(&frame, &scaling_12, tau_12, Direction::OneTwo)?,
        bound_constants_frame(&frame, &scaling_21, tau_21, Direction::TwoOne)?,
    ];
    Ok(DwellReport {
        tau_12,
        tau_21,
        tau,
        verdict: if tau == 0.0 {
            Verdict::StableAllSignals
        } else {
            Verdict::DwellConstrained
        },
        case_id,
        relabeled,
        frame,
        scaling_12,
        scaling_21,
        basis_epsilons,
        eta_xi,
        diagnostics,
    })
}

/// At least one scalar subsystem: both bases can be taken equal, and a
/// defective partner only needs a slow enough shear.
fn scalar_report(
    d1: &JordanDecomposition,
    d2: &JordanDecomposition,
    mut diagnostics: Diagnostics,
) -> Result<DwellReport> {
    let (other, other_is_first) = match (d1.form, d2.form) {
        (JordanForm::Scalar { .. }, JordanForm::Scalar { .. }) => (None, false),
        (JordanForm::Scalar { .. }, _) => (Some(d2), false),
        _ => (Some(d1), true),
    };
    let basis = other.map(|d| d.basis).unwrap_or_else(Matrix2::identity);
    let d_other = match other.map(|d| d.form) {
        // shear rate n keeps e^{-n u} theta(n u) below one
        Some(JordanForm::Defective { n }) => ScalingMatrix::new(1.0 / n.sqrt()),
        _ => ScalingMatrix::identity(),
    };
    let d = if other_is_first {
        (d_other, ScalingMatrix::identity())
    } else {
        (ScalingMatrix::identity(), d_other)
    };
    let frame = PairFrame {
        p1: basis,
        p2: basis,
        j1: d1.form,
        j2: d2.form,
    };
    let why = "scalar subsystem; stable for all signals".to_string();
    diagnostics.sub_case_12 = why.clone();
    diagnostics.sub_case_21 = why.clone();
    diagnostics.shortcut = Some(why);
    finish(0.0, 0.0, None, false, frame, d, d, None, diagnostics)
}

/// `sup_{u >= from} ||D^-1 e^{J u} D||` in closed form.
pub fn scaled_exp_sup(j: &JordanForm, d: &ScalingMatrix, from: f64) -> f64 {
    match *j {
        JordanForm::RealDiagonal { p, .. } => (-p * from).exp(),
        JordanForm::Scalar { p } => (-p * from).exp(),
        JordanForm::Complex { alpha, .. } => {
            // D^-1 R D has norm at most max(lambda^2, 1/lambda^2)
            let l2 = d.lambda * d.lambda;
            (-alpha * from).exp() * l2.max(1.0 / l2)
        }
        JordanForm::Defective { n } => {
            let kappa = (d.mu() / d.lambda).abs();
            let u = if kappa > 2.0 * n {
                (1.0 / (n * n) - 4.0 / (kappa * kappa)).sqrt().max(from)
            } else {
                from
            };
            (-n * u + ln_theta(kappa * u)).exp()
        }
    }
}

/// `eta` and `xi` for a direction with threshold `tau`.
pub fn bound_constants(
    dec1: &JordanDecomposition,
    dec2: &JordanDecomposition,
    d1: &ScalingMatrix,
    d2: &ScalingMatrix,
    tau: f64,
    direction: Direction,
) -> Result<BoundConstants> {
    let frame = PairFrame {
        p1: dec1.basis,
        p2: dec2.basis,
        j1: dec1.form,
        j2: dec2.form,
    };
    bound_constants_frame(&frame, &(*d1, *d2), tau, direction)
}

pub(crate) fn bound_constants_frame(
    frame: &PairFrame,
    d: &(ScalingMatrix, ScalingMatrix),
    tau: f64,
    direction: Direction,
) -> Result<BoundConstants> {
    let q1 = frame.p1 * d.0.matrix();
    let q2 = frame.p2 * d.1.matrix();
    let (q1i, q2i) = (q1.inverse()?, q2.inverse()?);
    let md = q2i * q1;
    let mdi = md.inverse()?;
    let n = spectral_norm;
    let e1 = scaled_exp_sup(&frame.j1, &d.0, 0.0);
    let e2 = scaled_exp_sup(&frame.j2, &d.1, 0.0);
    let e1t = scaled_exp_sup(&frame.j1, &d.0, tau);
    let e2t = scaled_exp_sup(&frame.j2, &d.1, tau);
    let (eta, xi) = match direction {
        Direction::OneTwo => (
            (n(&q1) * n(&q1i)).max(n(&q2) * n(&md) * n(&q1i)),
            e1.max(e2 * e1t),
        ),
        Direction::TwoOne => (
            (n(&q2) * n(&q2i)).max(n(&q1) * n(&mdi) * n(&q2i)),
            e1.max(e2.max(e1 * e2t) * n(&md) * n(&mdi) * e1t),
        ),
    };
    Ok(BoundConstants { eta, xi, direction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn x(name: &str) -> Matrix2 {
        match name {
            "X5" => Matrix2::new(0.01, -0.1, 0.231, -0.31),
            "X7" => Matrix2::new(-0.2, 0.0, 0.0, -0.42),
            "X6" => Matrix2::new(-18.0, 25.0, -1.0, -8.0).scale(1.0 / 13.0),
            "X8" => Matrix2::new(-113.0, -25.0, 361.0, 77.0).scale(1.0 / 18.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn transition_basics() {
        let p = Matrix2::new(1.0, 2.0, 0.0, 1.0);
        let t = transition_matrix(&p, &p).unwrap();
        assert_eq!(t.m, Matrix2::identity());
        assert_eq!(t.det_sign, 1.0);
        assert!(matches!(
            transition_matrix(&Matrix2::zero(), &p),
            Err(DwellError::Singular)
        ));
    }

    #[test]
    fn scaled_transition_hand_multiply() {
        let t = TransitionMatrix {
            m: Matrix2::new(1.0, 1.0, 1.1, 2.1),
            det_sign: 1.0,
        };
        let r = scaled_transition(&t, &ScalingMatrix::new(2.0), &ScalingMatrix::identity());
        let e = Matrix2::new(2.0, 0.5, 2.2, 1.05);
        assert!((r - e).max_abs() < 1e-15);
        let same = scaled_transition(&t, &ScalingMatrix::identity(), &ScalingMatrix::identity());
        assert_eq!(same, t.m);
    }

    #[test]
    fn identical_pair_is_stable() {
        let r = analyze_pair(&x("X5"), &x("X5"), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.tau, 0.0);
        assert_eq!(r.verdict, Verdict::StableAllSignals);
    }

    #[test]
    fn x5_x7_dispatch() {
        let r = analyze_pair(&x("X5"), &x("X7"), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.case_id, Some(CaseId::RR));
        assert!((r.tau_12 - 0.4120).abs() < 1e-3, "{r:?}");
        assert!((r.tau_21 - 0.0774).abs() < 1e-3, "{r:?}");
        assert_eq!(r.tau, r.tau_21);
    }

    #[test]
    fn x6_x8_dispatch() {
        let r = analyze_pair(&x("X6"), &x("X8"), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.case_id, Some(CaseId::NN));
        assert!((r.tau - 3.0348).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn trivial_bound_constants() {
        let dec = classify_jordan(&x("X7"), DEFAULT_DISC_TOL).unwrap();
        let id = ScalingMatrix::identity();
        let b = bound_constants(&dec, &dec, &id, &id, 0.0, Direction::OneTwo).unwrap();
        assert_relative_eq!(b.eta, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.xi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn defective_sup_matches_dense_grid() {
        let j = JordanForm::Defective { n: 0.2 };
        let d = ScalingMatrix::new(0.5);
        let closed = scaled_exp_sup(&j, &d, 0.0);
        let mut dense = 0.0f64;
        for i in 0..=400_000 {
            let u = i as f64 * 1e-4;
            let e = d.inverse_matrix() * j.expm(u) * d.matrix();
            dense = dense.max(spectral_norm(&e));
        }
        assert!((closed - dense).abs() < 1e-6, "{closed} {dense}");
    }
}
