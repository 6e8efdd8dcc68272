#![allow(dead_code)]

use planar_dwell::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    Complex,
    Defective,
}

pub const CASES: [(&str, Kind, Kind); 6] = [
    ("RR", Kind::Real, Kind::Real),
    ("CC", Kind::Complex, Kind::Complex),
    ("RC", Kind::Real, Kind::Complex),
    ("NN", Kind::Defective, Kind::Defective),
    ("NC", Kind::Defective, Kind::Complex),
    ("NR", Kind::Defective, Kind::Real),
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random basis with condition number at most 20.
pub fn basis(rng: &mut ChaCha8Rng) -> Matrix2 {
    loop {
        let p = Matrix2::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if p.det().abs() > 1e-3 && p.cond().map(|c| c < 20.0).unwrap_or(false) {
            return p;
        }
    }
}

pub fn jordan(rng: &mut ChaCha8Rng, kind: Kind) -> Matrix2 {
    match kind {
        Kind::Real => {
            let p = rng.random_range(0.05..2.0);
            let q = p + rng.random_range(0.05..2.0);
            Matrix2::diag(-p, -q)
        }
        Kind::Complex => {
            let a = rng.random_range(0.05..2.0);
            let b = rng.random_range(0.2..3.0);
            Matrix2::new(-a, b, -b, -a)
        }
        Kind::Defective => {
            let n = rng.random_range(0.05..2.0);
            Matrix2::new(-n, 1.0, 0.0, -n)
        }
    }
}

/// Hurwitz matrix of the given Jordan type in a random basis.
pub fn hurwitz(rng: &mut ChaCha8Rng, kind: Kind) -> Matrix2 {
    let p = basis(rng);
    p * jordan(rng, kind) * p.inverse().unwrap()
}

pub fn pair(rng: &mut ChaCha8Rng, k1: Kind, k2: Kind) -> (Matrix2, Matrix2) {
    (hurwitz(rng, k1), hurwitz(rng, k2))
}

pub fn fixtures() -> Vec<(&'static str, Matrix2, Matrix2)> {
    let x = table_matrices();
    vec![
        ("X1X2", x[0], x[1]),
        ("X3X4", x[2], x[3]),
        ("X5X7", x[4], x[6]),
        ("X5X3", x[4], x[2]),
        ("X8X3", x[7], x[2]),
        ("X6X8", x[5], x[7]),
        ("X8X9", x[7], x[8]),
    ]
}

pub fn table_matrices() -> [Matrix2; 9] {
    [
        Matrix2::new(-0.2, -5.0, 1.0, -0.3),
        Matrix2::new(-0.4, -1.0, 5.0, -0.6),
        Matrix2::new(0.0, 1.0, -2.0, -1.0),
        Matrix2::new(0.0, 1.0, -9.0, -1.0),
        Matrix2::new(0.01, -0.1, 0.231, -0.31),
        Matrix2::new(-18.0, 25.0, -1.0, -8.0).scale(1.0 / 13.0),
        Matrix2::new(-0.2, 0.0, 0.0, -0.42),
        Matrix2::new(-113.0, -25.0, 361.0, 77.0).scale(1.0 / 18.0),
        Matrix2::new(-0.08, -0.06, 0.04, -0.22),
    ]
}

/// Largest singular value by power iteration on `K^T K`.
pub fn power_norm(k: &Matrix2) -> f64 {
    let g = k.transpose() * *k;
    let mut v = [0.6, 0.8];
    let mut est = 0.0;
    for _ in 0..5000 {
        let w = g.apply(v);
        let n = (w[0] * w[0] + w[1] * w[1]).sqrt();
        if n == 0.0 {
            return 0.0;
        }
        v = [w[0] / n, w[1] / n];
        let gv = g.apply(v);
        est = v[0] * gv[0] + v[1] * gv[1];
    }
    est.sqrt()
}
