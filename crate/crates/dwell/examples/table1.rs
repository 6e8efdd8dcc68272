//! Prints both thresholds and the grid-check maximum for the seven fixture pairs.

use planar_dwell::comparison::{compare_pair, BasisPolicy};
use planar_dwell::dwell_core::{grid_check, Direction};
use planar_dwell::{analyze_pair, AnalysisOptions, Matrix2};

fn main() {
    let x = |name: &str| match name {
        "X1" => Matrix2::new(-0.2, -5.0, 1.0, -0.3),
        "X2" => Matrix2::new(-0.4, -1.0, 5.0, -0.6),
        "X3" => Matrix2::new(0.0, 1.0, -2.0, -1.0),
        "X4" => Matrix2::new(0.0, 1.0, -9.0, -1.0),
        "X5" => Matrix2::new(0.01, -0.1, 0.231, -0.31),
        "X6" => Matrix2::new(-18.0, 25.0, -1.0, -8.0).scale(1.0 / 13.0),
        "X7" => Matrix2::new(-0.2, 0.0, 0.0, -0.42),
        "X8" => Matrix2::new(-113.0, -25.0, 361.0, 77.0).scale(1.0 / 18.0),
        "X9" => Matrix2::new(-0.08, -0.06, 0.04, -0.22),
        _ => unreachable!(),
    };
    let pairs = [
        ("X1", "X2"),
        ("X3", "X4"),
        ("X5", "X7"),
        ("X5", "X3"),
        ("X8", "X3"),
        ("X6", "X8"),
        ("X8", "X9"),
    ];
    let opts = AnalysisOptions::default();
    for (a, b) in pairs {
        let start = std::time::Instant::now();
        let r = analyze_pair(&x(a), &x(b), &opts).expect("fixture pair analyzes");
        let elapsed = start.elapsed();
        let g12 = grid_check(&r, Direction::OneTwo, 40, 50.0).unwrap();
        let g21 = grid_check(&r, Direction::TwoOne, 40, 50.0).unwrap();
        println!(
            "{a}{b} {:?} tau12 {:.6} tau21 {:.6} tau {:.6} grid {:.6} {:.6} ({elapsed:?})",
            r.case_id.unwrap(),
            r.tau_12,
            r.tau_21,
            r.tau,
            g12.max_norm,
            g21.max_norm
        );
        let c = compare_pair(&x(a), &x(b), &r, BasisPolicy::UnitCols, opts.disc_tol, &opts.tol).unwrap();
        println!(
            "    kar {:.6} theta {:?} tau_m {:.4} loop {:?} tau0 {:?}",
            c.tau_kar, c.theta_star, c.tau_m, c.tau_loop, c.tau_0
        );
    }
}
