//! Cyclic Jacobi eigensolver for small complex Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::cmp::Ordering;
use thiserror::Error;

/// Convergence threshold on the off-diagonal Frobenius norm.
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 100;
/// Eigenvalues closer than this are treated as degenerate when ordering.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |A - A†| = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("Jacobi iteration did not converge in {MAX_SWEEPS} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { off: f64 },
}

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in decreasing order.
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, matching `values`.
    pub vectors: DMatrix<Complex64>,
    pub sweeps: usize,
}

pub fn hermiticity_residual(a: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

fn off_diagonal_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Diagonalizes `a` (Hermitian within `herm_tol`) by cyclic Jacobi sweeps.
///
/// Eigenvectors are phase-fixed so that their first largest-modulus entry is
/// real and positive. Eigenvalues are sorted decreasing; within a degenerate
/// cluster the eigenvectors are ordered by decreasing lexicographic
/// comparison of their entries, so an already diagonal matrix keeps the
/// original order of equal diagonal entries.
pub fn eigh(a: &DMatrix<Complex64>, herm_tol: f64) -> Result<HermitianEigen, EigenError> {
    if !a.is_square() {
        return Err(EigenError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let residual = hermiticity_residual(a);
    if residual > herm_tol {
        return Err(EigenError::NotHermitian { residual });
    }
    let n = a.nrows();
    let mut m = (a + a.adjoint()).map(|z| z * 0.5);
    let mut v = DMatrix::<Complex64>::identity(n, n);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m);
        if off <= OFF_DIAGONAL_TOL {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(EigenError::NoConvergence { off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..n {
        fix_phase(&mut v, k);
    }
    let raw: Vec<f64> = (0..n).map(|k| m[(k, k)].re).collect();
    order.sort_by(|&x, &y| raw[y].total_cmp(&raw[x]));
    // Reorder degenerate clusters by eigenvector entries.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && raw[order[end - 1]] - raw[order[end]] <= DEGENERACY_TOL {
            end += 1;
        }
        order[start..end].sort_by(|&x, &y| lex_cmp(&v, y, x));
        start = end;
    }

    let values = order.iter().map(|&k| raw[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen {
        values,
        vectors,
        sweeps,
    })
}

/// One complex Jacobi rotation zeroing `m[(p, q)]`.
fn rotate(m: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag < f64::MIN_POSITIVE {
        return;
    }
    let phase = apq / mag;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = phase.conj() * -s;
    let jqq = phase.conj() * c;

    let n = m.nrows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * jpp + mkq * jqp;
        m[(k, q)] = mkp * jpq + mkq * jqq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = jpp.conj() * mpk + jqp.conj() * mqk;
        m[(q, k)] = jpq.conj() * mpk + jqq.conj() * mqk;
    }
    m[(p, q)] = Complex64::default();
    m[(q, p)] = Complex64::default();
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

fn fix_phase(v: &mut DMatrix<Complex64>, col: usize) {
    let n = v.nrows();
    let max = (0..n).map(|i| v[(i, col)].norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let lead = (0..n).find(|&i| v[(i, col)].norm() >= max - 1e-12).unwrap();
    let z = v[(lead, col)];
    let rot = z.conj() / z.norm();
    for i in 0..n {
        v[(i, col)] *= rot;
    }
    v[(lead, col)] = Complex64::new(v[(lead, col)].re, 0.0);
}

fn lex_cmp(v: &DMatrix<Complex64>, a: usize, b: usize) -> Ordering {
    const EPS: f64 = 1e-12;
    for i in 0..v.nrows() {
        let (x, y) = (v[(i, a)], v[(i, b)]);
        for (s, t) in [(x.re, y.re), (x.im, y.im)] {
            if (s - t).abs() > EPS {
                return s.total_cmp(&t);
            }
        }
    }
    Ordering::Equal
}
