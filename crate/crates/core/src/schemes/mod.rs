//! Fully discrete time steppers and their discrete energies.
//!
//! Both schemes assemble one constant block matrix per run, pin essential
//! boundary DOFs by replacing their rows with identities, and reuse a single
//! factorization for every step.

mod lf4;
mod ts4;

pub use lf4::{lf4_blocks, BootstrapVariant, Lf4, Lf4Coefficients, Lf4Options};
pub use ts4::{cross_energy, ts4_blocks, Level, Ts4};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::assembly::OperatorSet;
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::mms::{ExactSolution, FieldsAt, Manufactured};
use crate::sparse::{factorize, Factorization, SparseMatrix, TripletBuilder};
use crate::whitney::{DeRhamSpace, Field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Lf4,
    Ts4,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Lf4 => "lf4",
            SchemeKind::Ts4 => "ts4",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lf4" => Ok(SchemeKind::Lf4),
            "ts4" => Ok(SchemeKind::Ts4),
            other => Err(Error::Config(format!("unknown scheme '{other}' (expected lf4 or ts4)"))),
        }
    }
}

/// How essential boundary DOFs are fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryMode {
    /// `p = 0` and `n x E = 0`.
    Homogeneous,
    /// Interpolated traces of a manufactured solution.
    Exact(ExactSolution),
}

impl BoundaryMode {
    /// Initial coefficient vectors at time `t`: projections onto the
    /// homogeneous subspaces, or boundary-lifted projections carrying the
    /// exact traces.
    pub fn project(&self, ops: &OperatorSet, sol: &dyn Manufactured, t: f64) -> Result<[Vec<f64>; 3]> {
        let fp = |x: Point| sol.p(x, t);
        let fe = |x: Point| sol.e(x, t);
        let fh = |x: Point| sol.h(x, t);
        let (p, e, h) = (Field::Scalar(&fp), Field::Vector(&fe), Field::Scalar(&fh));
        Ok(match self {
            BoundaryMode::Homogeneous => {
                [ops.project_homogeneous(0, p)?, ops.project_homogeneous(1, e)?, ops.project(2, h)?]
            }
            BoundaryMode::Exact(_) => [ops.project_with_trace(0, p)?, ops.project_with_trace(1, e)?, ops.project(2, h)?],
        })
    }
}

/// Boundary trace values in the order of `space.boundary_dofs`.
pub(crate) fn trace_values(space: &DeRhamSpace, f: Field<'_>) -> Result<Vec<f64>> {
    let vals = space.interpolate_boundary(f)?;
    debug_assert!(vals.iter().map(|v| v.0).eq(space.boundary_dofs.iter().copied()));
    Ok(vals.into_iter().map(|(_, v)| v).collect())
}

/// A constant linear step `A x_new = B x_old` with some unknowns prescribed.
///
/// Prescribed rows of `A` become identity rows, and their columns move to the
/// right-hand side, so prescribed values of zero come out exactly zero.
#[derive(Debug, Clone)]
pub struct PinnedSystem {
    fact: Factorization,
    rhs: SparseMatrix,
    /// Entries of `A` in free rows and pinned columns.
    coupling: SparseMatrix,
    pinned: Vec<usize>,
}

impl PinnedSystem {
    pub fn new(a: &SparseMatrix, rhs: SparseMatrix, pinned: Vec<usize>) -> Result<Self> {
        let n = a.n_rows();
        if !a.is_square() {
            return Err(Error::NotSquare { rows: n, cols: a.n_cols() });
        }
        if rhs.n_rows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rhs.n_rows() });
        }
        let mut is_pinned = vec![false; n];
        for &i in &pinned {
            is_pinned[i] = true;
        }
        let mut m = TripletBuilder::with_capacity(n, n, a.nnz());
        let mut c = TripletBuilder::new(n, n);
        for i in 0..n {
            if is_pinned[i] {
                m.push(i, i, 1.0);
                continue;
            }
            for (j, v) in a.row(i) {
                if is_pinned[j] {
                    c.push(i, j, v);
                } else {
                    m.push(i, j, v);
                }
            }
        }
        let fact = factorize(&m.build(), false)?;
        Ok(Self { fact, rhs, coupling: c.build(), pinned })
    }

    pub fn n(&self) -> usize {
        self.fact.n()
    }

    pub fn pinned(&self) -> &[usize] {
        &self.pinned
    }

    pub fn factorization(&self) -> &Factorization {
        &self.fact
    }

    /// Solves for the new level; `values[i]` is prescribed at `pinned()[i]`.
    pub fn solve(&self, old: &[f64], values: &[f64]) -> Result<Vec<f64>> {
        if old.len() != self.rhs.n_cols() {
            return Err(Error::DimensionMismatch { expected: self.rhs.n_cols(), got: old.len() });
        }
        if values.len() != self.pinned.len() {
            return Err(Error::DimensionMismatch { expected: self.pinned.len(), got: values.len() });
        }
        let mut b = self.rhs.mul_vec(old);
        if values.iter().any(|&v| v != 0.0) {
            let mut full = vec![0.0; self.n()];
            for (&i, &v) in self.pinned.iter().zip(values) {
                full[i] = v;
            }
            for (bi, ci) in b.iter_mut().zip(self.coupling.mul_vec(&full)) {
                *bi -= ci;
            }
        }
        for (&i, &v) in self.pinned.iter().zip(values) {
            b[i] = v;
        }
        self.fact.solve(&b)
    }
}

/// One energy sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub n: usize,
    pub t: f64,
    pub energy: f64,
}

/// Energy history of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrace {
    pub scheme: SchemeKind,
    pub records: Vec<EnergyRecord>,
}

impl EnergyTrace {
    pub fn new(scheme: SchemeKind) -> Self {
        Self { scheme, records: Vec::new() }
    }

    pub fn push(&mut self, t: f64, energy: f64) {
        let n = self.records.len();
        self.records.push(EnergyRecord { n, t, energy });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `max_n |E^n - E^0| / |E^0|`.
    pub fn max_relative_drift(&self) -> f64 {
        let Some(first) = self.records.first() else { return 0.0 };
        let e0 = first.energy.abs();
        self.records.iter().map(|r| (r.energy - first.energy).abs()).fold(0.0, f64::max) / e0
    }

    /// `max_n |E^n - E^{n-1}| / |E^{n-1}|`.
    pub fn max_relative_step_change(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| (w[1].energy - w[0].energy).abs() / w[0].energy.abs())
            .fold(0.0, f64::max)
    }
}

/// Either stepper, for callers that pick the scheme at run time.
#[derive(Debug, Clone)]
pub enum SchemeState {
    Lf4(Lf4),
    Ts4(Ts4),
}

impl SchemeState {
    pub fn kind(&self) -> SchemeKind {
        match self {
            SchemeState::Lf4(_) => SchemeKind::Lf4,
            SchemeState::Ts4(_) => SchemeKind::Ts4,
        }
    }

    pub fn step(&mut self) -> Result<()> {
        match self {
            SchemeState::Lf4(s) => s.step(),
            SchemeState::Ts4(s) => s.step(),
        }
    }

    pub fn energy(&self) -> f64 {
        match self {
            SchemeState::Lf4(s) => s.energy(),
            SchemeState::Ts4(s) => s.energy(),
        }
    }

    /// Time label of the current energy sample.
    pub fn energy_time(&self) -> f64 {
        match self {
            SchemeState::Lf4(s) => s.time(),
            SchemeState::Ts4(s) => s.time() - s.dt(),
        }
    }

    /// The levels that final-time errors are measured on.
    pub fn error_fields(&self) -> FieldsAt<'_> {
        match self {
            SchemeState::Lf4(s) => s.fields(),
            SchemeState::Ts4(s) => s.previous_fields(),
        }
    }

    pub fn ops(&self) -> &Arc<OperatorSet> {
        match self {
            SchemeState::Lf4(s) => s.ops(),
            SchemeState::Ts4(s) => s.ops(),
        }
    }
}

/// `eps^-1 p^T M0 p + eps E^T M1 E + mu H^T M2 H`.
pub fn weighted_energy(ops: &OperatorSet, p: &[f64], e: &[f64], h: &[f64]) -> f64 {
    let prm = ops.params;
    ops.inner(0, p, p) / prm.eps + prm.eps * ops.inner(1, e, e) + prm.mu * ops.inner(2, h, h)
}

/// Products of mass and derivative matrices shared by the block systems.
#[derive(Debug, Clone)]
pub(crate) struct Products {
    /// `G^T M1`
    pub gt_m1: SparseMatrix,
    /// `M1 G`
    pub m1_g: SparseMatrix,
    /// `K^T M2`
    pub kt_m2: SparseMatrix,
    /// `M2 K`
    pub m2_k: SparseMatrix,
}

impl Products {
    pub fn new(ops: &OperatorSet) -> Result<Self> {
        let m1_g = ops.m1.matmul(&ops.g)?;
        let m2_k = ops.m2.matmul(&ops.k)?;
        Ok(Self { gt_m1: m1_g.transpose(), m1_g, kt_m2: m2_k.transpose(), m2_k })
    }
}
