//! Mass matrices, exterior-derivative matrices, L² projections and the weak
//! codifferentials built from them.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::gradient;
use crate::sparse::{factorize, Factorization, SparseMatrix, TripletBuilder};
use crate::whitney::{DeRhamComplex, DeRhamSpace, Field, ReferenceBasis};

/// Constant permittivity and permeability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub eps: f64,
    pub mu: f64,
}

impl MaterialParams {
    pub fn new(eps: f64, mu: f64) -> Result<Self> {
        if !(eps > 0.0 && mu > 0.0 && eps.is_finite() && mu.is_finite()) {
            return Err(Error::Config(format!("material parameters must be positive, got eps={eps}, mu={mu}")));
        }
        Ok(Self { eps, mu })
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self { eps: 1.0, mu: 1.0 }
    }
}

/// Thread pool for cell-local work, sized by `SOLVER_THREADS` when set.
pub fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("SOLVER_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
            b = b.num_threads(n.max(1));
        }
        b.build().expect("failed to build assembly thread pool")
    })
}

/// Snaps a table to the nearest integers; the DOF scalings make the exact
/// entries integral, so any larger deviation is a basis bug.
fn snap(table: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    table
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| {
                    let r = v.round();
                    assert!((v - r).abs() < 1e-9, "reference derivative entry {v} is not integral");
                    r
                })
                .collect()
        })
        .collect()
}

/// `table[i][j]` = k=1 DOF `i` of the gradient of k=0 basis `j` on the
/// reference element.
pub fn reference_gradient_table(r: usize) -> Result<Vec<Vec<f64>>> {
    let b0 = ReferenceBasis::new(0, r)?;
    let b1 = ReferenceBasis::new(1, r)?;
    let cols: Vec<Vec<f64>> =
        (0..b0.dim()).map(|j| b1.apply_dofs_vector(&gradient(b0.scalar_poly(j).unwrap()))).collect();
    Ok(snap(transpose(cols)))
}

/// `table[m][j]` = k=2 DOF `m` of the curl of k=1 basis `j`.
pub fn reference_curl_table(r: usize) -> Result<Vec<Vec<f64>>> {
    let b1 = ReferenceBasis::new(1, r)?;
    let b2 = ReferenceBasis::new(2, r)?;
    let cols: Vec<Vec<f64>> =
        (0..b1.dim()).map(|j| b2.apply_dofs_scalar(&b1.vector_poly(j).unwrap().curl())).collect();
    Ok(snap(transpose(cols)))
}

fn transpose(cols: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let rows = cols.first().map_or(0, Vec::len);
    (0..rows).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// Unweighted mass matrix of a space.
pub fn mass_matrix(space: &DeRhamSpace) -> SparseMatrix {
    let rb = &space.reference;
    let d = rb.dim();
    let mesh = &space.mesh;
    let locals: Vec<Vec<f64>> = pool().install(|| {
        (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let g = mesh.geometry(c);
                let mut m = vec![0.0; d * d];
                for (q, &w) in rb.quadrature.weights.iter().enumerate() {
                    let vals: Vec<[f64; 2]> = (0..d).map(|i| space.push_value(&g, 1.0, rb.value_at(q, i))).collect();
                    let wq = w * g.det;
                    for i in 0..d {
                        for j in 0..d {
                            m[i * d + j] += wq * (vals[i][0] * vals[j][0] + vals[i][1] * vals[j][1]);
                        }
                    }
                }
                m
            })
            .collect()
    });
    let mut t = TripletBuilder::with_capacity(space.n_dofs, space.n_dofs, mesh.n_cells() * d * d);
    for (c, m) in locals.iter().enumerate() {
        let dofs = space.cell_dofs(c);
        let signs = space.cell_signs(c);
        for i in 0..d {
            for j in 0..d {
                t.push(dofs[i], dofs[j], signs[i] * signs[j] * m[i * d + j]);
            }
        }
    }
    t.build()
}

fn same_mesh(a: &DeRhamSpace, b: &DeRhamSpace) -> bool {
    std::sync::Arc::ptr_eq(&a.mesh, &b.mesh) || *a.mesh == *b.mesh
}

/// Matrix of the exterior derivative `from -> to` (gradient for k=0, curl
/// for k=1), exact in the coefficient spaces.
pub fn derivative_matrix(from: &DeRhamSpace, to: &DeRhamSpace) -> Result<SparseMatrix> {
    if to.k != from.k + 1 || from.r != to.r || !same_mesh(from, to) {
        return Err(Error::IncompatibleSpaces(format!(
            "no derivative from k={} r={} to k={} r={}",
            from.k, from.r, to.k, to.r
        )));
    }
    let mesh = &from.mesh;
    let mut t = TripletBuilder::new(to.n_dofs, from.n_dofs);
    match from.k {
        0 => {
            let table = reference_gradient_table(from.r)?;
            let mut claimed = vec![false; to.n_dofs];
            for c in 0..mesh.n_cells() {
                let rows = to.cell_dofs(c);
                let signs = to.cell_signs(c);
                let cols = from.cell_dofs(c);
                for (i, &gi) in rows.iter().enumerate() {
                    if std::mem::replace(&mut claimed[gi], true) {
                        continue;
                    }
                    for (j, &gj) in cols.iter().enumerate() {
                        if table[i][j] != 0.0 {
                            t.push(gi, gj, signs[i] * table[i][j]);
                        }
                    }
                }
            }
        }
        1 => {
            let table = reference_curl_table(from.r)?;
            for c in 0..mesh.n_cells() {
                let det = mesh.geometry(c).det;
                let rows = to.cell_dofs(c);
                let cols = from.cell_dofs(c);
                let signs = from.cell_signs(c);
                for (m, &gm) in rows.iter().enumerate() {
                    for (j, &gj) in cols.iter().enumerate() {
                        if table[m][j] != 0.0 {
                            t.push(gm, gj, signs[j] * table[m][j] / det);
                        }
                    }
                }
            }
        }
        k => return Err(Error::UnsupportedSpace { k, r: from.r }),
    }
    Ok(t.build())
}

/// Load vector `(f, phi_i)` with the space's quadrature rule.
pub fn load_vector(space: &DeRhamSpace, f: Field<'_>) -> Result<Vec<f64>> {
    if f.is_vector() != space.is_vector() {
        return Err(Error::IncompatibleSpaces(format!("field kind does not match a {}-form space", space.k)));
    }
    let rb = &space.reference;
    let d = rb.dim();
    let mesh = &space.mesh;
    let locals: Vec<Vec<f64>> = pool().install(|| {
        (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let g = mesh.geometry(c);
                let mut l = vec![0.0; d];
                for (q, (&w, &xi)) in rb.quadrature.weights.iter().zip(&rb.quadrature.points).enumerate() {
                    let fx = f.eval(g.map(xi));
                    let wq = w * g.det;
                    for (i, li) in l.iter_mut().enumerate() {
                        let v = space.push_value(&g, 1.0, rb.value_at(q, i));
                        *li += wq * (v[0] * fx[0] + v[1] * fx[1]);
                    }
                }
                l
            })
            .collect()
    });
    let mut out = vec![0.0; space.n_dofs];
    for (c, l) in locals.iter().enumerate() {
        for ((&dof, &s), v) in space.cell_dofs(c).iter().zip(space.cell_signs(c)).zip(l) {
            out[dof] += s * v;
        }
    }
    Ok(out)
}

/// Discrete L² projection: solves `M c = load(f)`. The projection does not
/// depend on a scalar weight, so the unweighted mass factorization serves for
/// every weighted inner product.
pub fn l2_project(space: &DeRhamSpace, mass: &Factorization, f: Field<'_>) -> Result<Vec<f64>> {
    let b = load_vector(space, f)?;
    mass.solve(&b)
}

/// Mass matrix restricted to the DOFs off the essential boundary, for
/// solves in the homogeneous subspace.
#[derive(Debug, Clone)]
pub struct InteriorMass {
    pub interior: Vec<usize>,
    n: usize,
    fact: Factorization,
}

impl InteriorMass {
    pub fn new(mass: &SparseMatrix, boundary_mask: &[bool]) -> Result<Self> {
        let interior: Vec<usize> = (0..mass.n_rows()).filter(|&i| !boundary_mask[i]).collect();
        let fact = factorize(&mass.select(&interior, &interior), true)?;
        Ok(Self { interior, n: mass.n_rows(), fact })
    }

    /// Solves on the interior rows of `rhs`; boundary entries of the result
    /// are zero.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: rhs.len() });
        }
        let b: Vec<f64> = self.interior.iter().map(|&i| rhs[i]).collect();
        let x = self.fact.solve(&b)?;
        let mut out = vec![0.0; self.n];
        for (&i, v) in self.interior.iter().zip(x) {
            out[i] = v;
        }
        Ok(out)
    }
}

/// Assembled operators of one discrete de Rham complex.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub complex: DeRhamComplex,
    pub params: MaterialParams,
    pub m0: SparseMatrix,
    pub m1: SparseMatrix,
    pub m2: SparseMatrix,
    /// `U_h -> V_h`, coefficients of the gradient.
    pub g: SparseMatrix,
    /// `V_h -> W_h`, coefficients of the curl.
    pub k: SparseMatrix,
    pub m0_fact: Factorization,
    pub m1_fact: Factorization,
    pub m2_fact: Factorization,
    pub m0_int: InteriorMass,
    pub m1_int: InteriorMass,
}

/// Assembles masses, derivative matrices and their factorizations.
pub fn assemble_operators(complex: &DeRhamComplex, params: MaterialParams) -> Result<OperatorSet> {
    let (u, v, w) = (&complex.u, &complex.v, &complex.w);
    if (u.k, v.k, w.k) != (0, 1, 2) || u.r != v.r || v.r != w.r {
        return Err(Error::IncompatibleSpaces("spaces must be k = 0, 1, 2 of one order".into()));
    }
    if !same_mesh(u, v) || !same_mesh(v, w) {
        return Err(Error::IncompatibleSpaces("spaces live on different meshes".into()));
    }
    MaterialParams::new(params.eps, params.mu)?;
    let m0 = mass_matrix(u);
    let m1 = mass_matrix(v);
    let m2 = mass_matrix(w);
    let g = derivative_matrix(u, v)?;
    let k = derivative_matrix(v, w)?;
    Ok(OperatorSet {
        m0_fact: factorize(&m0, true)?,
        m1_fact: factorize(&m1, true)?,
        m2_fact: factorize(&m2, true)?,
        m0_int: InteriorMass::new(&m0, u.boundary_mask())?,
        m1_int: InteriorMass::new(&m1, v.boundary_mask())?,
        complex: complex.clone(),
        params,
        m0,
        m1,
        m2,
        g,
        k,
    })
}

fn check(len: usize, want: usize) -> Result<()> {
    if len != want {
        return Err(Error::DimensionMismatch { expected: want, got: len });
    }
    Ok(())
}

impl OperatorSet {
    pub fn space(&self, k: usize) -> &DeRhamSpace {
        match k {
            0 => &self.complex.u,
            1 => &self.complex.v,
            _ => &self.complex.w,
        }
    }

    pub fn mass(&self, k: usize) -> &SparseMatrix {
        match k {
            0 => &self.m0,
            1 => &self.m1,
            _ => &self.m2,
        }
    }

    fn mass_fact(&self, k: usize) -> &Factorization {
        match k {
            0 => &self.m0_fact,
            1 => &self.m1_fact,
            _ => &self.m2_fact,
        }
    }

    /// L² projection onto the full `k`-form space.
    pub fn project(&self, k: usize, f: Field<'_>) -> Result<Vec<f64>> {
        l2_project(self.space(k), self.mass_fact(k), f)
    }

    /// Projection with essential boundary DOFs fixed to the interpolated
    /// trace of `f`; interior DOFs solve the Galerkin condition against the
    /// homogeneous subspace. Falls back to `project` for k = 2.
    pub fn project_with_trace(&self, k: usize, f: Field<'_>) -> Result<Vec<f64>> {
        let interior = match k {
            0 => &self.m0_int,
            1 => &self.m1_int,
            _ => return self.project(k, f),
        };
        let space = self.space(k);
        let mut x0 = vec![0.0; space.n_dofs];
        for (i, v) in space.interpolate_boundary(f)? {
            x0[i] = v;
        }
        let load = load_vector(space, f)?;
        let mx0 = self.mass(k).mul_vec(&x0);
        let r: Vec<f64> = load.iter().zip(&mx0).map(|(a, b)| a - b).collect();
        let c = interior.solve(&r)?;
        Ok(x0.iter().zip(c).map(|(a, b)| a + b).collect())
    }

    /// L² projection onto the subspace with vanishing essential boundary
    /// DOFs. Same as `project` for k = 2.
    pub fn project_homogeneous(&self, k: usize, f: Field<'_>) -> Result<Vec<f64>> {
        let interior = match k {
            0 => &self.m0_int,
            1 => &self.m1_int,
            _ => return self.project(k, f),
        };
        interior.solve(&load_vector(self.space(k), f)?)
    }

    /// Weak divergence: `d` with `M0 d = -G^T M1 e`.
    pub fn weak_div(&self, e: &[f64]) -> Result<Vec<f64>> {
        check(e.len(), self.m1.n_rows())?;
        let rhs = self.g.mul_vec_transpose(&self.m1.mul_vec(e));
        self.m0_fact.solve(&rhs.iter().map(|v| -v).collect::<Vec<_>>())
    }

    /// Weak divergence with values in the homogeneous subspace of `U_h`.
    pub fn weak_div_interior(&self, e: &[f64]) -> Result<Vec<f64>> {
        check(e.len(), self.m1.n_rows())?;
        let rhs = self.g.mul_vec_transpose(&self.m1.mul_vec(e));
        self.m0_int.solve(&rhs.iter().map(|v| -v).collect::<Vec<_>>())
    }

    /// Weak curl adjoint: `c` with `M1 c = K^T M2 h`.
    pub fn weak_curl_adjoint(&self, h: &[f64]) -> Result<Vec<f64>> {
        check(h.len(), self.m2.n_rows())?;
        self.m1_fact.solve(&self.k.mul_vec_transpose(&self.m2.mul_vec(h)))
    }

    /// Weak curl adjoint with values in the homogeneous subspace of `V_h`.
    pub fn weak_curl_adjoint_interior(&self, h: &[f64]) -> Result<Vec<f64>> {
        check(h.len(), self.m2.n_rows())?;
        self.m1_int.solve(&self.k.mul_vec_transpose(&self.m2.mul_vec(h)))
    }

    /// `u^T M v` in the `k`-form space.
    pub fn inner(&self, k: usize, u: &[f64], v: &[f64]) -> f64 {
        crate::sparse::dot(u, &self.mass(k).mul_vec(v))
    }
}
