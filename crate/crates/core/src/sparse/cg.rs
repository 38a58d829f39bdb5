use super::csr::{dot, SparseMatrix};
use crate::error::{Error, Result};

/// Unpreconditioned conjugate gradients for SPD systems, starting from zero.
/// Stops when `||b - Ax|| <= tol ||b||`.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    if a.n_rows() != n || a.n_cols() != n {
        return Err(Error::DimensionMismatch { expected: a.n_rows(), got: n });
    }
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for _ in 0..max_iter {
        a.mul_vec_into(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * b_norm {
            return Ok(x);
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::NotConverged { iterations: max_iter, residual: rr.sqrt() / b_norm })
}
