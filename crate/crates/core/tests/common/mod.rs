//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use densray_core::Matrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with entries uniform in `[-scale, scale]`.
pub fn random_symmetric(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let v = rng.random_range(-scale..=scale);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Normalized standard Gaussian draw: uniform on the unit sphere.
pub fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Random orthogonal matrix from Householder reflections of random vectors.
pub fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut q = Matrix::identity(d);
    for _ in 0..d {
        let v = random_unit(d, rng);
        let mut h = Matrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                h[(i, j)] -= 2.0 * v[i] * v[j];
            }
        }
        q = q.matmul(&h);
    }
    q
}

/// Ordered-pair enumeration of the weighted difference-vector matrix for two
/// classes: pairs across classes weigh `a_ne`, pairs within a class `−a_eq`.
pub fn naive_binary_a(pos: &[Vec<f64>], neg: &[Vec<f64>], a_ne: f64, a_eq: f64) -> Matrix {
    let d = pos[0].len();
    let words: Vec<(&Vec<f64>, bool)> = pos
        .iter()
        .map(|v| (v, true))
        .chain(neg.iter().map(|v| (v, false)))
        .collect();
    let mut a = Matrix::zeros(d, d);
    for (v, lv) in &words {
        for (w, lw) in &words {
            let weight = if lv == lw { -a_eq } else { a_ne };
            for i in 0..d {
                for j in 0..d {
                    a[(i, j)] += weight * (v[i] - w[i]) * (v[j] - w[j]);
                }
            }
        }
    }
    a
}

/// Ordered-pair enumeration with weight `−l_v l_w`.
pub fn naive_continuous_a(rows: &[Vec<f64>], scores: &[f64]) -> Matrix {
    let d = rows[0].len();
    let mut a = Matrix::zeros(d, d);
    for (v, lv) in rows.iter().zip(scores) {
        for (w, lw) in rows.iter().zip(scores) {
            for i in 0..d {
                for j in 0..d {
                    a[(i, j)] += -lv * lw * (v[i] - w[i]) * (v[j] - w[j]);
                }
            }
        }
    }
    a
}

/// Tau-b from explicit pair enumeration.
pub fn brute_tau(a: &[f64], b: &[f64]) -> Option<f64> {
    let (mut c, mut d, mut tie_a_only, mut tie_b_only) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            match (da == 0.0, db == 0.0) {
                (true, true) => {}
                (true, false) => tie_a_only += 1,
                (false, true) => tie_b_only += 1,
                (false, false) => {
                    if (da > 0.0) == (db > 0.0) {
                        c += 1
                    } else {
                        d += 1
                    }
                }
            }
        }
    }
    let untied_a = (c + d + tie_b_only) as u64;
    let untied_b = (c + d + tie_a_only) as u64;
    if untied_a == 0 || untied_b == 0 {
        return None;
    }
    Some((c - d) as f64 / ((untied_a as f64) * (untied_b as f64)).sqrt())
}

/// Eigenvalues (descending) of a symmetric matrix with `d ≤ 3` from its
/// characteristic polynomial.
pub fn char_poly_eigenvalues(m: &Matrix) -> Vec<f64> {
    let d = m.rows();
    let mut out = match d {
        0 => vec![],
        1 => vec![m[(0, 0)]],
        2 => {
            let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            let mean = 0.5 * (a + c);
            let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            vec![mean + r, mean - r]
        }
        3 => {
            // trigonometric solution of the depressed cubic
            let p1 = m[(0, 1)].powi(2) + m[(0, 2)].powi(2) + m[(1, 2)].powi(2);
            let q = (m[(0, 0)] + m[(1, 1)] + m[(2, 2)]) / 3.0;
            let p2 = (m[(0, 0)] - q).powi(2)
                + (m[(1, 1)] - q).powi(2)
                + (m[(2, 2)] - q).powi(2)
                + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            if p == 0.0 {
                vec![q, q, q]
            } else {
                let mut b = m.clone();
                for i in 0..3 {
                    b[(i, i)] -= q;
                }
                let b = {
                    let mut s = b.clone();
                    s.scale(1.0 / p);
                    s
                };
                let det = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
                    - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
                    + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
                let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
                let e1 = q + 2.0 * p * phi.cos();
                let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
                vec![e1, 3.0 * q - e1 - e3, e3]
            }
        }
        _ => panic!("closed form only for d ≤ 3"),
    };
    out.sort_by(|a, b| b.total_cmp(a));
    out
}
