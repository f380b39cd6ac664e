//! Dense symmetric eigendecomposition (cyclic Jacobi) and orthogonal basis
//! completion.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::seed;

/// Relative tolerance on `|a_ij - a_ji|` accepted as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
/// Jacobi stops once the off-diagonal Frobenius norm drops below this
/// fraction of the matrix Frobenius norm.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

const COMPLETION_MIN_NORM: f64 = 1e-8;
const COMPLETION_RETRIES: usize = 32;

/// A square real matrix checked to be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    /// Validates symmetry within `1e-9 · (1 + max|a_ij|)` and finiteness.
    /// The stored matrix is exactly symmetrized.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("symmetric matrix".into()));
        }
        let tol = SYMMETRY_TOLERANCE * (1.0 + m.max_abs());
        let d = m.rows();
        let mut s = m;
        for i in 0..d {
            for j in (i + 1)..d {
                let (a, b) = (s[(i, j)], s[(j, i)]);
                if (a - b).abs() > tol {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
                let avg = 0.5 * (a + b);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        Ok(SymmetricMatrix(s))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.0.mul_vec(x))
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenBasis {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }
}

/// Flips `v` so that its entry of largest magnitude is positive (first such
/// entry on ties).
pub fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in descending order; each eigenvector follows
/// the [`canonical_sign`] convention. The result depends only on the input.
pub fn eig_symmetric(a: &SymmetricMatrix) -> Result<EigenBasis> {
    let d = a.dim();
    let mut m = a.matrix().clone();
    let mut v = Matrix::identity(d);

    let scale = m.frobenius();
    let target = CONVERGENCE_THRESHOLD * scale;
    let mut converged = off_diagonal_norm(&m) <= target;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweep += 1;
        converged = off_diagonal_norm(&m) <= target;
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));

    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        let mut vec = v.column(src);
        canonical_sign(&mut vec);
        for (row, x) in vec.into_iter().enumerate() {
            vectors[(row, col)] = x;
        }
    }
    Ok(EigenBasis { values, vectors })
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let d = m.rows();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                sum += m[(i, j)] * m[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Applies the plane rotation that annihilates `m[p][q]`, accumulating it
/// into `v`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let d = m.rows();
    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..d {
        let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..d {
        let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;

    for k in 0..d {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Extends the unit vector `q` to a full orthogonal matrix whose first
/// column is exactly `q`.
///
/// The remaining columns are Gaussian draws from a seeded stream,
/// orthonormalized against all previous columns with modified Gram–Schmidt
/// (two passes). A draw whose residual norm falls below `1e-8` is replaced.
pub fn complete_orthogonal(q: &[f64], seed: u64) -> Result<Matrix> {
    let d = q.len();
    if d == 0 {
        return Err(Error::Empty("vector".into()));
    }
    if !q.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("completion vector".into()));
    }
    let n = norm(q);
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "basis completion needs a unit vector, got norm {n}"
        )));
    }

    let mut rng = seed::rng(seed);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d);
    columns.push(q.to_vec());
    while columns.len() < d {
        let mut accepted = None;
        for _ in 0..COMPLETION_RETRIES {
            let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            for _ in 0..2 {
                for c in &columns {
                    let proj = dot(&v, c);
                    v.iter_mut().zip(c).for_each(|(x, ci)| *x -= proj * ci);
                }
            }
            let vn = norm(&v);
            if vn >= COMPLETION_MIN_NORM {
                v.iter_mut().for_each(|x| *x /= vn);
                accepted = Some(v);
                break;
            }
        }
        columns.push(accepted.ok_or(Error::DegenerateDraw(COMPLETION_RETRIES))?);
    }
    Ok(Matrix::from_columns(&columns))
}
