//! Trimmed polynomial de Rham spaces `P_r^- Λ^k` on a triangulation.
//!
//! The 2D complex is realized as `H^1 --grad--> H(curl) --curl--> L^2`:
//!
//! | k | r = 1            | r = 2                          |
//! |---|------------------|--------------------------------|
//! | 0 | P1 Lagrange      | P2 Lagrange                    |
//! | 1 | Whitney edges    | first-kind Nédélec, degree 2   |
//! | 2 | piecewise P0     | piecewise P1 (discontinuous)   |
//!
//! Reference bases are dual to their degrees of freedom and are mapped to
//! cells by the affine pullback (k = 0, 2) or the covariant Piola transform
//! (k = 1). DOF functionals are normalized so that the reference derivative
//! tables are integer-valued, which keeps `K G = 0` free of rounding.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::{CellGeometry, Point, TriMesh, LOCAL_EDGES};
use crate::poly::{gradient, Poly, VecPoly};
use crate::quadrature::TriangleRule;

const REF_VERTICES: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Scalar or vector field on `Ω`, evaluated at physical points.
#[derive(Clone, Copy)]
pub enum Field<'a> {
    Scalar(&'a (dyn Fn(Point) -> f64 + Sync)),
    Vector(&'a (dyn Fn(Point) -> [f64; 2] + Sync)),
}

impl Field<'_> {
    pub fn eval(&self, x: Point) -> [f64; 2] {
        match self {
            Field::Scalar(f) => [f(x), 0.0],
            Field::Vector(f) => f(x),
        }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self, Field::Vector(_))
    }
}

/// Degree of freedom attached to a reference-element entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalDof {
    Vertex(usize),
    /// Point value at the midpoint of a local edge.
    EdgeMidpoint(usize),
    /// Tangential moment against the `moment`-th Legendre polynomial.
    EdgeMoment { edge: usize, moment: usize },
    Interior(usize),
}

/// Weight of the tangential edge moment `moment` at parameter `s`.
pub fn edge_moment_weight(moment: usize, s: f64) -> f64 {
    match moment {
        0 => 1.0,
        _ => 3.0 * (2.0 * s - 1.0),
    }
}

/// Local basis on the reference triangle with tabulated values.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    pub k: usize,
    pub r: usize,
    pub dofs: Vec<LocalDof>,
    scalar: Vec<Poly>,
    vector: Vec<VecPoly>,
    /// 2-norm condition number of the DOF-evaluation matrix on the prime basis.
    pub dof_condition: f64,
    pub quadrature: TriangleRule,
    values: Vec<[f64; 2]>,
    derivatives: Vec<[f64; 2]>,
}

impl ReferenceBasis {
    pub fn new(k: usize, r: usize) -> Result<Self> {
        if k > 2 || !(1..=2).contains(&r) {
            return Err(Error::UnsupportedSpace { k, r });
        }
        let dofs = reference_dofs(k, r);
        let (scalar, vector, dof_condition) = match k {
            1 => {
                let prime = prime_vector(r);
                let (coeffs, cond) = dual_coefficients(prime.len(), |i, j| apply_vector_dof(dofs[i], &prime[j]))?;
                let basis = (0..prime.len())
                    .map(|j| {
                        (0..prime.len())
                            .fold(VecPoly::default(), |acc, m| acc + prime[m].scale(coeffs[(m, j)]))
                    })
                    .collect();
                (Vec::new(), basis, cond)
            }
            _ => {
                let prime = prime_scalar(k, r);
                let (coeffs, cond) =
                    dual_coefficients(prime.len(), |i, j| apply_scalar_dof(k, dofs[i], &prime[j]))?;
                let basis = (0..prime.len())
                    .map(|j| (0..prime.len()).fold(Poly::zero(), |acc, m| acc + prime[m].scale(coeffs[(m, j)])))
                    .collect();
                (basis, Vec::new(), cond)
            }
        };

        let quadrature = TriangleRule::with_degree(2 * r + 2);
        let mut basis = Self {
            k,
            r,
            dofs,
            scalar,
            vector,
            dof_condition,
            quadrature,
            values: Vec::new(),
            derivatives: Vec::new(),
        };
        let points = basis.quadrature.points.clone();
        for xi in &points {
            for i in 0..basis.dim() {
                basis.values.push(basis.eval(i, *xi));
                basis.derivatives.push(basis.eval_derivative(i, *xi));
            }
        }
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    /// Value of basis function `i` (scalar in component 0 for k = 0, 2).
    pub fn eval(&self, i: usize, xi: Point) -> [f64; 2] {
        match self.k {
            1 => self.vector[i].eval(xi),
            _ => [self.scalar[i].eval(xi), 0.0],
        }
    }

    /// Gradient (k = 0), scalar curl in component 0 (k = 1), zero (k = 2).
    pub fn eval_derivative(&self, i: usize, xi: Point) -> [f64; 2] {
        match self.k {
            0 => gradient(&self.scalar[i]).eval(xi),
            1 => [self.vector[i].curl().eval(xi), 0.0],
            _ => [0.0, 0.0],
        }
    }

    /// Tabulated value of basis `i` at quadrature node `q`.
    pub fn value_at(&self, q: usize, i: usize) -> [f64; 2] {
        self.values[q * self.dim() + i]
    }

    pub fn derivative_at(&self, q: usize, i: usize) -> [f64; 2] {
        self.derivatives[q * self.dim() + i]
    }

    pub fn scalar_poly(&self, i: usize) -> Option<&Poly> {
        self.scalar.get(i)
    }

    pub fn vector_poly(&self, i: usize) -> Option<&VecPoly> {
        self.vector.get(i)
    }

    /// Applies this element's DOF functionals to a reference scalar polynomial
    /// (k = 0, 2) or vector polynomial (k = 1).
    pub fn apply_dofs_scalar(&self, p: &Poly) -> Vec<f64> {
        self.dofs.iter().map(|&d| apply_scalar_dof(self.k, d, p)).collect()
    }

    pub fn apply_dofs_vector(&self, v: &VecPoly) -> Vec<f64> {
        self.dofs.iter().map(|&d| apply_vector_dof(d, v)).collect()
    }
}

fn reference_dofs(k: usize, r: usize) -> Vec<LocalDof> {
    match (k, r) {
        (0, 1) => (0..3).map(LocalDof::Vertex).collect(),
        (0, _) => (0..3).map(LocalDof::Vertex).chain((0..3).map(LocalDof::EdgeMidpoint)).collect(),
        (1, 1) => (0..3).map(|edge| LocalDof::EdgeMoment { edge, moment: 0 }).collect(),
        (1, _) => (0..3)
            .flat_map(|edge| (0..2).map(move |moment| LocalDof::EdgeMoment { edge, moment }))
            .chain((0..2).map(LocalDof::Interior))
            .collect(),
        (_, 1) => vec![LocalDof::Interior(0)],
        _ => (0..3).map(LocalDof::Interior).collect(),
    }
}

fn prime_scalar(k: usize, r: usize) -> Vec<Poly> {
    let degree = if k == 0 { r } else { r - 1 };
    let mut out = Vec::new();
    for total in 0..=degree {
        for b in 0..=total {
            out.push(Poly::monomial(total - b, b, 1.0));
        }
    }
    out
}

fn prime_vector(r: usize) -> Vec<VecPoly> {
    let (x, y, one, zero) = (Poly::x(), Poly::y(), Poly::constant(1.0), Poly::zero());
    let rot = |q: Poly| VecPoly::new(y.scale(-1.0) * q, x * q);
    match r {
        1 => vec![VecPoly::new(one, zero), VecPoly::new(zero, one), rot(one)],
        _ => vec![
            VecPoly::new(one, zero),
            VecPoly::new(x, zero),
            VecPoly::new(y, zero),
            VecPoly::new(zero, one),
            VecPoly::new(zero, x),
            VecPoly::new(zero, y),
            rot(x),
            rot(y),
        ],
    }
}

fn edge_endpoints(edge: usize) -> (Point, Point) {
    let (a, b) = LOCAL_EDGES[edge];
    (REF_VERTICES[a], REF_VERTICES[b])
}

fn apply_scalar_dof(k: usize, dof: LocalDof, p: &Poly) -> f64 {
    match dof {
        LocalDof::Vertex(v) => p.eval(REF_VERTICES[v]),
        LocalDof::EdgeMidpoint(e) => {
            let (a, b) = edge_endpoints(e);
            p.eval([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])
        }
        LocalDof::Interior(m) if k == 2 => {
            let (q, c) = match m {
                0 => (Poly::constant(1.0), 2.0),
                1 => (Poly::x(), 6.0),
                _ => (Poly::y(), 6.0),
            };
            c * (*p * q).integrate_reference()
        }
        _ => unreachable!("functional {dof:?} does not act on scalar {k}-forms"),
    }
}

fn apply_vector_dof(dof: LocalDof, v: &VecPoly) -> f64 {
    match dof {
        LocalDof::EdgeMoment { edge, moment } => {
            let (a, b) = edge_endpoints(edge);
            let tangential = v.dot_const([b[0] - a[0], b[1] - a[1]]);
            tangential.integrate_segment(a, b, |s| edge_moment_weight(moment, s))
        }
        LocalDof::Interior(m) => 6.0 * v.0[m].integrate_reference(),
        _ => unreachable!("functional {dof:?} does not act on 1-forms"),
    }
}

/// Inverts the DOF-evaluation matrix `D[i][j] = dof_i(prime_j)`; column `j`
/// of the result holds the prime-basis coefficients of basis function `j`.
fn dual_coefficients(n: usize, entry: impl Fn(usize, usize) -> f64) -> Result<(DMatrix<f64>, f64)> {
    let d = DMatrix::from_fn(n, n, entry);
    let sv = d.clone().singular_values();
    let (max, min) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let inv = d.try_inverse().ok_or(Error::Singular { pivot: 0 })?;
    Ok((inv, max / min))
}

/// Space of `k`-forms of order `r` on a mesh.
#[derive(Debug, Clone)]
pub struct DeRhamSpace {
    pub k: usize,
    pub r: usize,
    pub mesh: Arc<TriMesh>,
    pub reference: Arc<ReferenceBasis>,
    pub n_dofs: usize,
    cell_dofs: Vec<usize>,
    cell_signs: Vec<f64>,
    pub boundary_dofs: Vec<usize>,
    is_boundary: Vec<bool>,
}

impl DeRhamSpace {
    pub fn new(mesh: Arc<TriMesh>, k: usize, r: usize) -> Result<Self> {
        let reference = Arc::new(ReferenceBasis::new(k, r)?);
        let (nv, ne, nc) = (mesh.n_vertices(), mesh.n_edges(), mesh.n_cells());
        let dim = reference.dim();
        let n_dofs = match (k, r) {
            (0, 1) => nv,
            (0, _) => nv + ne,
            (1, 1) => ne,
            (1, _) => 2 * ne + 2 * nc,
            (_, 1) => nc,
            _ => 3 * nc,
        };

        let mut cell_dofs = Vec::with_capacity(nc * dim);
        let mut cell_signs = Vec::with_capacity(nc * dim);
        for c in 0..nc {
            let verts = mesh.cells[c];
            let edges = mesh.cell_edges[c];
            for &dof in &reference.dofs {
                let (index, sign) = match (k, dof) {
                    (0, LocalDof::Vertex(v)) => (verts[v], 1.0),
                    (0, LocalDof::EdgeMidpoint(e)) => (nv + edges[e].edge, 1.0),
                    (1, LocalDof::EdgeMoment { edge, moment }) => {
                        let ce = edges[edge];
                        let sign = if moment == 0 { f64::from(ce.sign) } else { 1.0 };
                        (r * ce.edge + moment, sign)
                    }
                    (1, LocalDof::Interior(m)) => (2 * ne + 2 * c + m, 1.0),
                    (2, LocalDof::Interior(m)) => (dim * c + m, 1.0),
                    _ => unreachable!(),
                };
                cell_dofs.push(index);
                cell_signs.push(sign);
            }
        }

        let mut is_boundary = vec![false; n_dofs];
        match k {
            0 => {
                for &v in &mesh.boundary_vertices {
                    is_boundary[v] = true;
                }
                if r == 2 {
                    for &e in &mesh.boundary_edges {
                        is_boundary[nv + e] = true;
                    }
                }
            }
            1 => {
                for &e in &mesh.boundary_edges {
                    for m in 0..r {
                        is_boundary[r * e + m] = true;
                    }
                }
            }
            _ => {}
        }
        let boundary_dofs = (0..n_dofs).filter(|&i| is_boundary[i]).collect();

        Ok(Self { k, r, mesh, reference, n_dofs, cell_dofs, cell_signs, boundary_dofs, is_boundary })
    }

    pub fn local_dim(&self) -> usize {
        self.reference.dim()
    }

    /// Global indices of the local DOFs of `cell`.
    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        let d = self.local_dim();
        &self.cell_dofs[cell * d..(cell + 1) * d]
    }

    /// Orientation signs relating local and global DOFs of `cell`.
    pub fn cell_signs(&self, cell: usize) -> &[f64] {
        let d = self.local_dim();
        &self.cell_signs[cell * d..(cell + 1) * d]
    }

    pub fn is_boundary_dof(&self, i: usize) -> bool {
        self.is_boundary[i]
    }

    /// Mask of essential-BC DOFs.
    pub fn boundary_mask(&self) -> &[bool] {
        &self.is_boundary
    }

    /// Whether fields are vector-valued.
    pub fn is_vector(&self) -> bool {
        self.k == 1
    }

    /// Physical value of local basis `i` of the cell with geometry `g`, given
    /// its reference value, including the orientation sign.
    pub fn push_value(&self, g: &CellGeometry, sign: f64, v: [f64; 2]) -> [f64; 2] {
        match self.k {
            1 => g.covariant(v).map(|c| sign * c),
            _ => [sign * v[0], 0.0],
        }
    }

    /// Physical exterior derivative of a local basis function from its
    /// reference derivative.
    pub fn push_derivative(&self, g: &CellGeometry, sign: f64, d: [f64; 2]) -> [f64; 2] {
        match self.k {
            0 => g.covariant(d).map(|c| sign * c),
            1 => [sign * d[0] / g.det, 0.0],
            _ => [0.0, 0.0],
        }
    }

    fn local_value(&self, cell: usize, coeffs: &[f64], xi: Point) -> [f64; 2] {
        let g = self.mesh.geometry(cell);
        let mut acc = [0.0; 2];
        for (i, (&dof, &s)) in self.cell_dofs(cell).iter().zip(self.cell_signs(cell)).enumerate() {
            let v = self.push_value(&g, s, self.reference.eval(i, xi));
            acc[0] += coeffs[dof] * v[0];
            acc[1] += coeffs[dof] * v[1];
        }
        acc
    }

    fn local_derivative(&self, cell: usize, coeffs: &[f64], xi: Point) -> [f64; 2] {
        let g = self.mesh.geometry(cell);
        let mut acc = [0.0; 2];
        for (i, (&dof, &s)) in self.cell_dofs(cell).iter().zip(self.cell_signs(cell)).enumerate() {
            let v = self.push_derivative(&g, s, self.reference.eval_derivative(i, xi));
            acc[0] += coeffs[dof] * v[0];
            acc[1] += coeffs[dof] * v[1];
        }
        acc
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.n_dofs {
            return Err(Error::DimensionMismatch { expected: self.n_dofs, got: coeffs.len() });
        }
        Ok(())
    }

    /// Pointwise value of the finite element function; scalars are returned
    /// in component 0.
    pub fn evaluate_field(&self, coeffs: &[f64], x: Point) -> Result<[f64; 2]> {
        self.check_len(coeffs)?;
        let (cell, bary) = self.mesh.locate_point(x)?;
        Ok(self.local_value(cell, coeffs, [bary[1], bary[2]]))
    }

    /// Value inside a known cell at reference coordinates `xi`.
    pub fn evaluate_in_cell(&self, coeffs: &[f64], cell: usize, xi: Point) -> [f64; 2] {
        self.local_value(cell, coeffs, xi)
    }

    /// Gradient (k = 0) or scalar curl (k = 1) inside a known cell.
    pub fn derivative_in_cell(&self, coeffs: &[f64], cell: usize, xi: Point) -> [f64; 2] {
        self.local_derivative(cell, coeffs, xi)
    }

    /// DOF values of the trace of `g` on the boundary: nodal values for
    /// k = 0, tangential edge moments for k = 1.
    pub fn interpolate_boundary(&self, g: Field<'_>) -> Result<Vec<(usize, f64)>> {
        let mesh = &self.mesh;
        match self.k {
            0 => {
                let mut out: Vec<(usize, f64)> =
                    mesh.boundary_vertices.iter().map(|&v| (v, g.eval(mesh.vertices[v])[0])).collect();
                if self.r == 2 {
                    for &e in &mesh.boundary_edges {
                        let [a, b] = mesh.edges[e].map(|v| mesh.vertices[v]);
                        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                        out.push((mesh.n_vertices() + e, g.eval(mid)[0]));
                    }
                }
                out.sort_by_key(|&(i, _)| i);
                Ok(out)
            }
            1 => {
                if !g.is_vector() {
                    return Err(Error::IncompatibleSpaces("tangential trace needs a vector field".into()));
                }
                let (nodes, weights) = crate::quadrature::gauss_legendre_unit();
                let mut out = Vec::new();
                for &e in &mesh.boundary_edges {
                    let [a, b] = mesh.edges[e].map(|v| mesh.vertices[v]);
                    let t = [b[0] - a[0], b[1] - a[1]];
                    for m in 0..self.r {
                        let moment: f64 = nodes
                            .iter()
                            .zip(&weights)
                            .map(|(&s, &w)| {
                                let v = g.eval([a[0] + s * t[0], a[1] + s * t[1]]);
                                w * edge_moment_weight(m, s) * (v[0] * t[0] + v[1] * t[1])
                            })
                            .sum();
                        out.push((self.r * e + m, moment));
                    }
                }
                out.sort_by_key(|&(i, _)| i);
                Ok(out)
            }
            k => Err(Error::UnsupportedSpace { k, r: self.r }),
        }
    }
}

/// The three spaces of the discrete complex, built on one mesh with one order.
#[derive(Debug, Clone)]
pub struct DeRhamComplex {
    pub u: DeRhamSpace,
    pub v: DeRhamSpace,
    pub w: DeRhamSpace,
}

impl DeRhamComplex {
    pub fn new(mesh: Arc<TriMesh>, r: usize) -> Result<Self> {
        Ok(Self {
            u: DeRhamSpace::new(mesh.clone(), 0, r)?,
            v: DeRhamSpace::new(mesh.clone(), 1, r)?,
            w: DeRhamSpace::new(mesh, 2, r)?,
        })
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.u.mesh
    }

    pub fn r(&self) -> usize {
        self.u.r
    }
}

/// Builds the `k`-form space of order `r`.
pub fn build_space(mesh: Arc<TriMesh>, k: usize, r: usize) -> Result<DeRhamSpace> {
    DeRhamSpace::new(mesh, k, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{unit_square_mesh, DiagonalPattern};

    fn mesh(n: usize) -> Arc<TriMesh> {
        Arc::new(unit_square_mesh(n, DiagonalPattern::Right).unwrap())
    }

    #[test]
    fn rejects_unsupported_pairs() {
        assert!(matches!(DeRhamSpace::new(mesh(1), 3, 1), Err(Error::UnsupportedSpace { .. })));
        assert!(matches!(DeRhamSpace::new(mesh(1), 1, 3), Err(Error::UnsupportedSpace { .. })));
        assert!(matches!(DeRhamSpace::new(mesh(1), 0, 0), Err(Error::UnsupportedSpace { .. })));
    }

    #[test]
    fn dimension_formulas() {
        for n in [1, 2, 3, 4] {
            let m = mesh(n);
            let (nv, ne, nc) = (m.n_vertices(), m.n_edges(), m.n_cells());
            let dims = |k, r| DeRhamSpace::new(m.clone(), k, r).unwrap().n_dofs;
            assert_eq!(dims(0, 1), nv);
            assert_eq!(dims(0, 2), nv + ne);
            assert_eq!(dims(1, 1), ne);
            assert_eq!(dims(1, 2), 2 * ne + 2 * nc);
            assert_eq!(dims(2, 1), nc);
            assert_eq!(dims(2, 2), 3 * nc);
        }
    }

    #[test]
    fn boundary_dof_examples() {
        let s = DeRhamSpace::new(mesh(1), 0, 1).unwrap();
        assert_eq!((s.n_dofs, s.boundary_dofs.len()), (4, 4));
        let s = DeRhamSpace::new(mesh(2), 1, 1).unwrap();
        assert_eq!((s.n_dofs, s.boundary_dofs.len()), (16, 8));
        let s = DeRhamSpace::new(mesh(2), 2, 1).unwrap();
        assert_eq!(s.n_dofs, 8);
        assert!(s.boundary_dofs.is_empty());
    }

    #[test]
    fn every_dof_is_referenced_with_consistent_signs() {
        for r in [1, 2] {
            for k in 0..3 {
                let s = DeRhamSpace::new(mesh(3), k, r).unwrap();
                let mut seen = vec![0usize; s.n_dofs];
                for c in 0..s.mesh.n_cells() {
                    for &d in s.cell_dofs(c) {
                        seen[d] += 1;
                    }
                }
                assert!(seen.iter().all(|&n| n > 0), "k={k} r={r}");
            }
        }
    }

    #[test]
    fn unisolvent_reference_elements() {
        for k in 0..3 {
            for r in [1, 2] {
                let b = ReferenceBasis::new(k, r).unwrap();
                assert!(b.dof_condition.is_finite() && b.dof_condition < 1e3, "k={k} r={r}: {}", b.dof_condition);
            }
        }
    }

    #[test]
    fn lagrange_partition_of_unity() {
        for r in [1, 2] {
            let b = ReferenceBasis::new(0, r).unwrap();
            for q in 0..b.quadrature.len() {
                let s: f64 = (0..b.dim()).map(|i| b.value_at(q, i)[0]).sum();
                assert!((s - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn whitney_edge_duality() {
        let b = ReferenceBasis::new(1, 1).unwrap();
        for i in 0..3 {
            let dofs = b.apply_dofs_vector(b.vector_poly(i).unwrap());
            for (j, d) in dofs.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((d - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn bases_are_dual_to_their_dofs() {
        for k in 0..3 {
            for r in [1, 2] {
                let b = ReferenceBasis::new(k, r).unwrap();
                for i in 0..b.dim() {
                    let dofs = match k {
                        1 => b.apply_dofs_vector(b.vector_poly(i).unwrap()),
                        _ => b.apply_dofs_scalar(b.scalar_poly(i).unwrap()),
                    };
                    for (j, d) in dofs.iter().enumerate() {
                        let expected = if i == j { 1.0 } else { 0.0 };
                        assert!((d - expected).abs() < 1e-12, "k={k} r={r} i={i} j={j}: {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn lagrange_reproduces_linear_function() {
        for r in [1, 2] {
            let s = DeRhamSpace::new(mesh(3), 0, r).unwrap();
            let m = &s.mesh;
            let mut coeffs = vec![0.0; s.n_dofs];
            for v in 0..m.n_vertices() {
                coeffs[v] = m.vertices[v][0];
            }
            if r == 2 {
                for (e, &[a, b]) in m.edges.iter().enumerate() {
                    coeffs[m.n_vertices() + e] = 0.5 * (m.vertices[a][0] + m.vertices[b][0]);
                }
            }
            for x in [[0.1, 0.2], [0.77, 0.31], [0.5, 0.5], [1.0, 0.0]] {
                let v = s.evaluate_field(&coeffs, x).unwrap();
                assert!((v[0] - x[0]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_edge_field_and_cell_constants() {
        let s = DeRhamSpace::new(mesh(2), 1, 2).unwrap();
        assert_eq!(s.evaluate_field(&vec![0.0; s.n_dofs], [0.3, 0.6]).unwrap(), [0.0, 0.0]);

        let s = DeRhamSpace::new(mesh(2), 2, 1).unwrap();
        let coeffs: Vec<f64> = (0..s.n_dofs).map(|c| c as f64 + 0.5).collect();
        for c in 0..s.mesh.n_cells() {
            let v = s.mesh.cell_vertices(c);
            let centroid = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
            assert_eq!(s.evaluate_field(&coeffs, centroid).unwrap()[0], c as f64 + 0.5);
        }
    }

    #[test]
    fn evaluate_field_errors() {
        let s = DeRhamSpace::new(mesh(2), 0, 1).unwrap();
        assert!(matches!(s.evaluate_field(&[0.0; 3], [0.5, 0.5]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(s.evaluate_field(&[0.0; 9], [1.5, 0.5]), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn tangential_continuity_across_edges() {
        // A random edge field must have matching tangential traces from both
        // sides of every interior edge.
        for r in [1, 2] {
            let s = DeRhamSpace::new(mesh(3), 1, r).unwrap();
            let coeffs: Vec<f64> = (0..s.n_dofs).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
            let m = &s.mesh;
            let mut owners: Vec<Vec<usize>> = vec![Vec::new(); m.n_edges()];
            for c in 0..m.n_cells() {
                for ce in m.cell_edges[c] {
                    owners[ce.edge].push(c);
                }
            }
            for (e, cells) in owners.iter().enumerate() {
                if cells.len() != 2 {
                    continue;
                }
                let [a, b] = m.edges[e].map(|v| m.vertices[v]);
                let t = [b[0] - a[0], b[1] - a[1]];
                for s_param in [0.2, 0.5, 0.9] {
                    let x = [a[0] + s_param * t[0], a[1] + s_param * t[1]];
                    let trace = |cell: usize| {
                        let g = m.geometry(cell);
                        let d = [x[0] - g.origin[0], x[1] - g.origin[1]];
                        let xi = [
                            g.jac_inv[0][0] * d[0] + g.jac_inv[0][1] * d[1],
                            g.jac_inv[1][0] * d[0] + g.jac_inv[1][1] * d[1],
                        ];
                        let v = s.evaluate_in_cell(&coeffs, cell, xi);
                        v[0] * t[0] + v[1] * t[1]
                    };
                    assert!((trace(cells[0]) - trace(cells[1])).abs() < 1e-12, "r={r} edge {e}");
                }
            }
        }
    }

    #[test]
    fn zero_trace_interpolates_to_zero() {
        for k in [0, 1] {
            let s = DeRhamSpace::new(mesh(2), k, 2).unwrap();
            let zs = |_: Point| 0.0;
            let zv = |_: Point| [0.0, 0.0];
            let g = if k == 0 { Field::Scalar(&zs) } else { Field::Vector(&zv) };
            let vals = s.interpolate_boundary(g).unwrap();
            assert_eq!(vals.len(), s.boundary_dofs.len());
            assert!(vals.iter().all(|&(_, v)| v == 0.0));
        }
        let s = DeRhamSpace::new(mesh(2), 2, 1).unwrap();
        let zs = |_: Point| 0.0;
        assert!(s.interpolate_boundary(Field::Scalar(&zs)).is_err());
    }
}
