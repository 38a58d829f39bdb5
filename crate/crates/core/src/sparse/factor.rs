use super::csr::{norm_inf, SparseMatrix, TripletBuilder};
use super::ldl::LdlFactor;
use super::ordering::{invert, nested_dissection};
use crate::error::{Error, Result};

/// Absolute pivot threshold relative to `||A||_inf`.
const SINGULAR_REL: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone)]
enum Kind {
    /// Supernodal LU with partial pivoting on the original ordering.
    Lu(faer::sparse::linalg::solvers::Lu<usize, f64>),
    /// `L D L^T` on the nested-dissection ordering.
    Ldl(LdlFactor),
}

/// Reusable direct factorization of a square sparse matrix.
#[derive(Debug, Clone)]
pub struct Factorization {
    kind: Kind,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    a: SparseMatrix,
    a_norm: f64,
}

impl Factorization {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self.kind, Kind::Ldl(_))
    }

    /// Stored entries of the `L D L^T` factor; `None` for LU.
    pub fn factor_nnz(&self) -> Option<usize> {
        match &self.kind {
            Kind::Lu(_) => None,
            Kind::Ldl(f) => Some(f.nnz()),
        }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let x = self.solve_unchecked(b);
        if cfg!(debug_assertions) {
            let r = self.a.mul_vec(&x);
            let res = r.iter().zip(b).fold(0.0f64, |m, (ri, bi)| m.max((ri - bi).abs()));
            let bound = 1e-10 * (self.a_norm * norm_inf(&x) + norm_inf(b));
            assert!(res <= bound, "solve residual {res:e} exceeds {bound:e}");
        }
        Ok(x)
    }

    fn solve_unchecked(&self, b: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Lu(f) => {
                use faer::linalg::solvers::SolveCore;
                let mut x = b.to_vec();
                let n = x.len();
                f.solve_in_place_with_conj(faer::Conj::No, faer::MatMut::from_column_major_slice_mut(&mut x, n, 1));
                x
            }
            Kind::Ldl(f) => {
                let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
                f.solve_in_place(&mut y);
                let mut x = vec![0.0; b.len()];
                for (new, &old) in self.perm.iter().enumerate() {
                    x[old] = y[new];
                }
                x
            }
        }
    }

    /// Relative residual `||Ax - b|| / (||A|| ||x|| + ||b||)` in the infinity norm.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let r = self.a.mul_vec(x);
        let res = r.iter().zip(b).fold(0.0f64, |m, (ri, bi)| m.max((ri - bi).abs()));
        let scale = self.a_norm * norm_inf(x) + norm_inf(b);
        if scale == 0.0 {
            res
        } else {
            res / scale
        }
    }
}

/// Factors `a`. With `symmetric_hint` an `L D L^T` factorization is used,
/// which requires bit-exact symmetry; otherwise a supernodal LU with partial
/// pivoting. Singularity errors carry an original row/column index: the
/// failing pivot for `L D L^T`, and for LU the component of a probe solve
/// that went wrong.
pub fn factorize(a: &SparseMatrix, symmetric_hint: bool) -> Result<Factorization> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.n_rows(), cols: a.n_cols() });
    }
    if symmetric_hint && !a.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let a_norm = a.norm_inf();
    let f = if symmetric_hint { factor_ldl(a, a_norm)? } else { factor_lu(a, a_norm)? };
    log::debug!("factorized n={} nnz(A)={} symmetric={}", a.n_rows(), a.nnz(), symmetric_hint);
    Ok(f)
}

fn factor_ldl(a: &SparseMatrix, a_norm: f64) -> Result<Factorization> {
    let perm = nested_dissection(a);
    let inv = invert(&perm);
    let mut t = TripletBuilder::with_capacity(a.n_rows(), a.n_cols(), a.nnz());
    for (new_i, &old_i) in perm.iter().enumerate() {
        for (j, v) in a.row(old_i) {
            t.push(new_i, inv[j], v);
        }
    }
    let kind = match LdlFactor::factor(&t.build(), SINGULAR_REL * a_norm) {
        Ok(f) => Kind::Ldl(f),
        Err(Error::Singular { pivot }) => return Err(Error::Singular { pivot: perm[pivot] }),
        Err(e) => return Err(e),
    };
    Ok(Factorization { kind, perm, a: a.clone(), a_norm })
}

fn factor_lu(a: &SparseMatrix, a_norm: f64) -> Result<Factorization> {
    use faer::sparse::{linalg::LuError, SparseColMat, SymbolicSparseColMat};
    let n = a.n_rows();
    // CSR of `A` is CSC of `A^T`; transposing the view gives `A` by columns.
    let sym = SymbolicSparseColMat::new_checked(n, n, a.row_ptr().to_vec(), None, a.col_idx().to_vec());
    let at = SparseColMat::new(sym, a.values().to_vec());
    let lu = match at.as_ref().transpose().to_col_major() {
        Ok(m) => m.sp_lu(),
        Err(e) => return Err(Error::MalformedMatrix(format!("{e:?}"))),
    };
    let lu = match lu {
        Ok(lu) => lu,
        Err(LuError::SymbolicSingular { index }) => return Err(Error::Singular { pivot: index.min(n.saturating_sub(1)) }),
        Err(LuError::Generic(e)) => return Err(Error::MalformedMatrix(format!("{e:?}"))),
    };
    let f = Factorization { kind: Kind::Lu(lu), perm: (0..n).collect(), a: a.clone(), a_norm };
    // Zero or tiny pivots show up as a non-finite or inaccurate probe solve.
    let probe: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 / 7.0).collect();
    let b = a.mul_vec(&probe);
    let x = f.solve_unchecked(&b);
    let worst = x
        .iter()
        .zip(&probe)
        .enumerate()
        .map(|(i, (xi, pi))| (i, if xi.is_finite() { (xi - pi).abs() } else { f64::INFINITY }))
        .fold((0, 0.0f64), |m, c| if c.1 > m.1 { c } else { m });
    if !(f.residual(&x, &b) <= 1e-8) || !worst.1.is_finite() {
        return Err(Error::Singular { pivot: worst.0 });
    }
    Ok(f)
}
