//! Oriented triangulations of the unit square.
//!
//! Edges are stored once with the global orientation `lo -> hi` (increasing
//! vertex index). Cells are counterclockwise vertex triples; local edge `j`
//! of a cell joins its local vertices [`LOCAL_EDGES`]`[j]`, traversed from
//! the smaller to the larger local index.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Local vertex pairs of the three local edges. Edge `j` is opposite vertex `j`.
pub const LOCAL_EDGES: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];

/// Direction of the diagonal that splits each grid square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalPattern {
    /// Diagonal from lower-left to upper-right.
    #[default]
    Right,
    /// Diagonal from lower-right to upper-left.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellEdge {
    pub edge: usize,
    /// `+1` when local traversal agrees with the global edge orientation.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub edges: Vec<[usize; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub cell_edges: Vec<[CellEdge; 3]>,
    pub boundary_vertices: Vec<usize>,
    pub boundary_edges: Vec<usize>,
    pub h: f64,
    is_boundary_vertex: Vec<bool>,
    is_boundary_edge: Vec<bool>,
}

/// Affine map from the reference triangle `(0,0), (1,0), (0,1)` onto a cell.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub origin: Point,
    /// Columns are `v1 - v0` and `v2 - v0`.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    pub jac_inv: [[f64; 2]; 2],
}

impl CellGeometry {
    pub fn new(v: [Point; 3]) -> Self {
        let jac = [[v[1][0] - v[0][0], v[2][0] - v[0][0]], [v[1][1] - v[0][1], v[2][1] - v[0][1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jac_inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        Self { origin: v[0], jac, det, jac_inv }
    }

    pub fn map(&self, xi: Point) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    /// `J^{-T} v`, the covariant transform of reference gradients and 1-forms.
    pub fn covariant(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.jac_inv[0][0] * v[0] + self.jac_inv[1][0] * v[1],
            self.jac_inv[0][1] * v[0] + self.jac_inv[1][1] * v[1],
        ]
    }
}

impl TriMesh {
    /// Builds a mesh from raw vertex and cell lists, deriving the edge table
    /// and boundary tags.
    pub fn from_cells(vertices: Vec<Point>, cells: Vec<[usize; 3]>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidMesh("no cells".into()));
        }
        for (c, cell) in cells.iter().enumerate() {
            if cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {c} references a missing vertex")));
            }
            let g = CellGeometry::new(cell.map(|v| vertices[v]));
            if !(g.det > 0.0) {
                return Err(Error::InvalidMesh(format!("cell {c} is not counterclockwise")));
            }
        }

        let mut edge_ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for cell in &cells {
            for &(a, b) in &LOCAL_EDGES {
                let (u, v) = (cell[a], cell[b]);
                edge_ids.insert((u.min(v), u.max(v)), 0);
            }
        }
        let mut edges = Vec::with_capacity(edge_ids.len());
        for (i, (key, id)) in edge_ids.iter_mut().enumerate() {
            *id = i;
            edges.push([key.0, key.1]);
        }

        let mut incidence = vec![0usize; edges.len()];
        let cell_edges: Vec<[CellEdge; 3]> = cells
            .iter()
            .map(|cell| {
                LOCAL_EDGES.map(|(a, b)| {
                    let (u, v) = (cell[a], cell[b]);
                    let edge = edge_ids[&(u.min(v), u.max(v))];
                    incidence[edge] += 1;
                    CellEdge { edge, sign: if u < v { 1 } else { -1 } }
                })
            })
            .collect();

        if let Some(e) = incidence.iter().position(|&n| n > 2) {
            return Err(Error::InvalidMesh(format!("edge {e} is shared by more than two cells")));
        }

        let is_boundary_edge: Vec<bool> = incidence.iter().map(|&n| n == 1).collect();
        let mut is_boundary_vertex = vec![false; vertices.len()];
        for (e, edge) in edges.iter().enumerate() {
            if is_boundary_edge[e] {
                is_boundary_vertex[edge[0]] = true;
                is_boundary_vertex[edge[1]] = true;
            }
        }
        let boundary_edges = (0..edges.len()).filter(|&e| is_boundary_edge[e]).collect();
        let boundary_vertices = (0..vertices.len()).filter(|&v| is_boundary_vertex[v]).collect();

        let h = edges
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (vertices[a], vertices[b]);
                (p[0] - q[0]).hypot(p[1] - q[1])
            })
            .fold(0.0, f64::max);

        Ok(Self {
            vertices,
            edges,
            cells,
            cell_edges,
            boundary_vertices,
            boundary_edges,
            h,
            is_boundary_vertex,
            is_boundary_edge,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.is_boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.is_boundary_edge[e]
    }

    pub fn geometry(&self, cell: usize) -> CellGeometry {
        CellGeometry::new(self.cells[cell].map(|v| self.vertices[v]))
    }

    pub fn cell_vertices(&self, cell: usize) -> [Point; 3] {
        self.cells[cell].map(|v| self.vertices[v])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.geometry(c).area()).sum()
    }

    /// Returns the containing cell and the barycentric coordinates of `x`.
    /// Points on shared facets resolve to the lowest-indexed cell.
    pub fn locate_point(&self, x: Point) -> Result<(usize, [f64; 3])> {
        const TOL: f64 = 1e-12;
        let inside = |t: f64| (-TOL..=1.0 + TOL).contains(&t);
        if !(inside(x[0]) && inside(x[1])) {
            return Err(Error::OutsideDomain { x: x[0], y: x[1] });
        }
        for c in 0..self.n_cells() {
            let g = self.geometry(c);
            let d = [x[0] - g.origin[0], x[1] - g.origin[1]];
            let l1 = g.jac_inv[0][0] * d[0] + g.jac_inv[0][1] * d[1];
            let l2 = g.jac_inv[1][0] * d[0] + g.jac_inv[1][1] * d[1];
            let l0 = 1.0 - l1 - l2;
            if l0 >= -TOL && l1 >= -TOL && l2 >= -TOL {
                let mut bary = [l0, l1, l2].map(|t| t.clamp(0.0, 1.0));
                let sum: f64 = bary.iter().sum();
                bary.iter_mut().for_each(|t| *t /= sum);
                return Ok((c, bary));
            }
        }
        Err(Error::OutsideDomain { x: x[0], y: x[1] })
    }

    /// Writes the triangulation as a legacy ASCII VTK unstructured grid.
    pub fn write_vtk(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        self.write_vtk_geometry(&mut out);
        std::fs::File::create(path)?.write_all(out.as_bytes())?;
        Ok(())
    }

    pub(crate) fn write_vtk_geometry(&self, out: &mut String) {
        let _ = writeln!(out, "# vtk DataFile Version 3.0\ntriangulation\nASCII\nDATASET UNSTRUCTURED_GRID");
        let _ = writeln!(out, "POINTS {} double", self.n_vertices());
        for v in &self.vertices {
            let _ = writeln!(out, "{} {} 0", v[0], v[1]);
        }
        let _ = writeln!(out, "CELLS {} {}", self.n_cells(), 4 * self.n_cells());
        for c in &self.cells {
            let _ = writeln!(out, "3 {} {} {}", c[0], c[1], c[2]);
        }
        let _ = writeln!(out, "CELL_TYPES {}", self.n_cells());
        for _ in &self.cells {
            let _ = writeln!(out, "5");
        }
    }
}

/// Structured mesh of `[0,1]^2` with `n` squares per side, each split in two.
pub fn unit_square_mesh(n: usize, pattern: DiagonalPattern) -> Result<TriMesh> {
    if n == 0 {
        return Err(Error::InvalidMesh("n must be at least 1".into()));
    }
    let nf = n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / nf, j as f64 / nf]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            match pattern {
                DiagonalPattern::Right => {
                    cells.push([a, b, c]);
                    cells.push([a, c, d]);
                }
                DiagonalPattern::Left => {
                    cells.push([a, b, d]);
                    cells.push([b, c, d]);
                }
            }
        }
    }
    TriMesh::from_cells(vertices, cells)
}

/// Splits every cell into four through its edge midpoints.
pub fn refine_uniform(mesh: &TriMesh) -> Result<TriMesh> {
    let nv = mesh.n_vertices();
    let mut vertices = mesh.vertices.clone();
    for &[a, b] in &mesh.edges {
        let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
        vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
    }
    let mut cells = Vec::with_capacity(4 * mesh.n_cells());
    for (cell, ce) in mesh.cells.iter().zip(&mesh.cell_edges) {
        let m = ce.map(|e| nv + e.edge);
        let [v0, v1, v2] = *cell;
        cells.push([v0, m[2], m[1]]);
        cells.push([m[2], v1, m[0]]);
        cells.push([m[1], m[0], v2]);
        cells.push([m[0], m[1], m[2]]);
    }
    TriMesh::from_cells(vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler(m: &TriMesh) -> i64 {
        m.n_vertices() as i64 - m.n_edges() as i64 + m.n_cells() as i64
    }

    #[test]
    fn single_square() {
        let m = unit_square_mesh(1, DiagonalPattern::Right).unwrap();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_cells()), (4, 5, 2));
        assert_eq!(euler(&m), 1);
        assert_eq!(m.boundary_edges.len(), 4);
    }

    #[test]
    fn two_by_two_counts() {
        for pattern in [DiagonalPattern::Right, DiagonalPattern::Left] {
            let m = unit_square_mesh(2, pattern).unwrap();
            assert_eq!((m.n_vertices(), m.n_edges(), m.n_cells()), (9, 16, 8));
            assert_eq!(m.boundary_edges.len(), 8);
            assert_eq!(m.boundary_vertices.len(), 8);
        }
    }

    #[test]
    fn rejects_zero_subdivisions() {
        assert!(unit_square_mesh(0, DiagonalPattern::Right).is_err());
    }

    #[test]
    fn invariants_hold() {
        for n in [1, 2, 3, 5, 8] {
            for pattern in [DiagonalPattern::Right, DiagonalPattern::Left] {
                let m = unit_square_mesh(n, pattern).unwrap();
                assert_eq!(m.n_cells(), 2 * n * n);
                assert_eq!(euler(&m), 1);
                assert!((m.total_area() - 1.0).abs() < 1e-14);
                assert!((m.h - 2f64.sqrt() / n as f64).abs() < 1e-15);
                for c in 0..m.n_cells() {
                    assert!(m.geometry(c).det > 0.0);
                    let v = m.cell_vertices(c);
                    for (j, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
                        let CellEdge { edge, sign } = m.cell_edges[c][j];
                        let [lo, hi] = m.edges[edge];
                        let global = [m.vertices[hi][0] - m.vertices[lo][0], m.vertices[hi][1] - m.vertices[lo][1]];
                        let local = [v[b][0] - v[a][0], v[b][1] - v[a][1]];
                        let s = f64::from(sign);
                        assert_eq!([s * global[0], s * global[1]], local);
                    }
                }
                for e in 0..m.n_edges() {
                    let [a, b] = m.edges[e];
                    assert!(a < b);
                }
            }
        }
    }

    #[test]
    fn refinement_halves_h_and_keeps_area() {
        let m = unit_square_mesh(1, DiagonalPattern::Right).unwrap();
        let r = refine_uniform(&m).unwrap();
        assert_eq!(r.n_cells(), 8);
        assert_eq!(r.h, m.h / 2.0);
        assert!((r.total_area() - 1.0).abs() < 1e-15);
        assert_eq!(euler(&r), 1);
        let m3 = unit_square_mesh(3, DiagonalPattern::Left).unwrap();
        let r3 = refine_uniform(&m3).unwrap();
        assert!((r3.h - m3.h / 2.0).abs() < 1e-16);
        assert_eq!(r3.boundary_edges.len(), 4 * 6);
    }

    fn canonical(m: &TriMesh) -> (Vec<(u64, u64)>, Vec<[(u64, u64); 3]>) {
        let key = |p: Point| (p[0].to_bits(), p[1].to_bits());
        let mut verts: Vec<_> = m.vertices.iter().map(|&p| key(p)).collect();
        verts.sort();
        let mut cells: Vec<_> = m
            .cells
            .iter()
            .map(|c| {
                let mut t = c.map(|v| key(m.vertices[v]));
                t.sort();
                t
            })
            .collect();
        cells.sort();
        (verts, cells)
    }

    #[test]
    fn double_refinement_matches_finer_grid() {
        for n in [1, 2, 4] {
            for pattern in [DiagonalPattern::Right, DiagonalPattern::Left] {
                let coarse = unit_square_mesh(n, pattern).unwrap();
                let twice = refine_uniform(&refine_uniform(&coarse).unwrap()).unwrap();
                let fine = unit_square_mesh(4 * n, pattern).unwrap();
                assert_eq!(canonical(&twice), canonical(&fine));
            }
        }
    }

    #[test]
    fn locate_corner_centroid_and_outside() {
        let m = unit_square_mesh(4, DiagonalPattern::Right).unwrap();
        let (c, bary) = m.locate_point([0.0, 0.0]).unwrap();
        let corner = m.cells[c].iter().position(|&v| m.vertices[v] == [0.0, 0.0]).unwrap();
        assert_eq!(bary[corner], 1.0);

        let v = m.cell_vertices(5);
        let centroid = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
        let (c, bary) = m.locate_point(centroid).unwrap();
        assert_eq!(c, 5);
        for t in bary {
            assert!((t - 1.0 / 3.0).abs() < 1e-14);
        }

        assert!(matches!(m.locate_point([2.0, 2.0]), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn shared_facet_resolves_to_lowest_cell() {
        let m = unit_square_mesh(1, DiagonalPattern::Right).unwrap();
        let (c, bary) = m.locate_point([0.5, 0.5]).unwrap();
        assert_eq!(c, 0);
        assert!((bary.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
