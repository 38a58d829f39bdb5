//! Three-level fourth-order scheme with Simpson-weighted couplings.
//!
//! Rows, multiplied by `2 dt`:
//!
//! ```text
//! M0 (p+ - p-)/eps - (dt/3) G^T M1 (E+ + 4E + E-) = 0
//! (dt/3) M1 G (p+ + 4p + p-) + eps M1 (E+ - E-) - (dt/3) K^T M2 (H+ + 4H + H-) = 0
//! mu M2 (H+ - H-) + (dt/3) M2 K (E+ + 4E + E-) = 0
//! ```
//!
//! The `H` coupling of the `E` row is the weak form `<H, curl E~>`, since
//! only first-order operators appear and `H` has no tangential trace.

use std::sync::Arc;

use super::{trace_values, BoundaryMode, PinnedSystem, Products};
use crate::assembly::OperatorSet;
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::mms::{FieldsAt, Manufactured};
use crate::sparse::{assemble_block, Block, BlockLayout, BlockSystem};
use crate::whitney::Field;

/// Assembles `A` (3 x 3 blocks) and `B` (3 x 6 blocks acting on
/// `p, E, H` at the current level followed by the previous level).
pub fn ts4_blocks(ops: &OperatorSet, dt: f64) -> Result<(BlockSystem, BlockSystem)> {
    let pr = Products::new(ops)?;
    let (eps, mu) = (ops.params.eps, ops.params.mu);
    let a3 = dt / 3.0;
    let (nu, nv, nw) = (ops.m0.n_rows(), ops.m1.n_rows(), ops.m2.n_rows());
    let a = assemble_block(
        BlockLayout::square(vec![nu, nv, nw]),
        &[
            Block::new(0, 0, 1.0 / eps, &ops.m0),
            Block::new(0, 1, -a3, &pr.gt_m1),
            Block::new(1, 0, a3, &pr.m1_g),
            Block::new(1, 1, eps, &ops.m1),
            Block::new(1, 2, -a3, &pr.kt_m2),
            Block::new(2, 1, a3, &pr.m2_k),
            Block::new(2, 2, mu, &ops.m2),
        ],
    )?;
    let b = assemble_block(
        BlockLayout::new(vec![nu, nv, nw], vec![nu, nv, nw, nu, nv, nw]),
        &[
            Block::new(0, 1, 4.0 * a3, &pr.gt_m1),
            Block::new(0, 3, 1.0 / eps, &ops.m0),
            Block::new(0, 4, a3, &pr.gt_m1),
            Block::new(1, 0, -4.0 * a3, &pr.m1_g),
            Block::new(1, 2, 4.0 * a3, &pr.kt_m2),
            Block::new(1, 3, -a3, &pr.m1_g),
            Block::new(1, 4, eps, &ops.m1),
            Block::new(1, 5, a3, &pr.kt_m2),
            Block::new(2, 1, -4.0 * a3, &pr.m2_k),
            Block::new(2, 4, -a3, &pr.m2_k),
            Block::new(2, 5, mu, &ops.m2),
        ],
    )?;
    Ok((a, b))
}

/// A time level `(p, E, H)`.
pub type Level = [Vec<f64>; 3];

/// Stepper state holding levels `n - 1` and `n`.
#[derive(Debug, Clone)]
pub struct Ts4 {
    ops: Arc<OperatorSet>,
    bc: BoundaryMode,
    dt: f64,
    system: PinnedSystem,
    prev: Level,
    cur: Level,
    n: usize,
}

impl Ts4 {
    /// Factorizes the step matrix. Both start levels are required; the
    /// scheme has no one-step starter.
    pub fn build(ops: Arc<OperatorSet>, dt: f64, bc: BoundaryMode, level0: Level, level1: Option<Level>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let level1 = level1.ok_or_else(|| {
            Error::MissingStartLevel("the three-level scheme needs the solution at t = dt as a second start level".into())
        })?;
        let dims = [ops.m0.n_rows(), ops.m1.n_rows(), ops.m2.n_rows()];
        for lvl in [&level0, &level1] {
            for (v, &d) in lvl.iter().zip(&dims) {
                if v.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: v.len() });
                }
            }
        }
        let (a, b) = ts4_blocks(&ops, dt)?;
        let mut pinned: Vec<usize> = ops.space(0).boundary_dofs.clone();
        pinned.extend(ops.space(1).boundary_dofs.iter().map(|&i| dims[0] + i));
        let system = PinnedSystem::new(&a.matrix, b.matrix, pinned)?;
        Ok(Self { ops, bc, dt, system, prev: level0, cur: level1, n: 1 })
    }

    /// Start levels for a manufactured solution: projections at `t = 0` and
    /// `t = dt`.
    pub fn start_levels(ops: &OperatorSet, bc: &BoundaryMode, sol: &dyn Manufactured, dt: f64) -> Result<(Level, Level)> {
        Ok((bc.project(ops, sol, 0.0)?, bc.project(ops, sol, dt)?))
    }

    pub fn ops(&self) -> &Arc<OperatorSet> {
        &self.ops
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Index of the newest level.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Time of the newest level.
    pub fn time(&self) -> f64 {
        self.n as f64 * self.dt
    }

    pub fn current(&self) -> &Level {
        &self.cur
    }

    pub fn previous(&self) -> &Level {
        &self.prev
    }

    pub fn system(&self) -> &PinnedSystem {
        &self.system
    }

    /// Replaces both levels; `n` is the index of `cur`.
    pub fn set_levels(&mut self, prev: Level, cur: Level, n: usize) -> Result<()> {
        for (a, b) in prev.iter().chain(cur.iter()).zip(self.prev.iter().chain(self.cur.iter())) {
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch { expected: b.len(), got: a.len() });
            }
        }
        (self.prev, self.cur, self.n) = (prev, cur, n);
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        let t_new = (self.n + 1) as f64 * self.dt;
        let vals = match &self.bc {
            BoundaryMode::Homogeneous => vec![0.0; self.system.pinned().len()],
            BoundaryMode::Exact(sol) => {
                let p = |x: Point| sol.p(x, t_new);
                let e = |x: Point| sol.e(x, t_new);
                let mut v = trace_values(self.ops.space(0), Field::Scalar(&p))?;
                v.extend(trace_values(self.ops.space(1), Field::Vector(&e))?);
                v
            }
        };
        let old = BlockSystem::concat(&[&self.cur[0], &self.cur[1], &self.cur[2], &self.prev[0], &self.prev[1], &self.prev[2]]);
        let x = self.system.solve(&old, &vals)?;
        let (nu, nv) = (self.cur[0].len(), self.cur[1].len());
        let next = [x[..nu].to_vec(), x[nu..nu + nv].to_vec(), x[nu + nv..].to_vec()];
        self.prev = std::mem::replace(&mut self.cur, next);
        self.n += 1;
        Ok(())
    }

    /// `||u+ + u||² + 2 <u+, u>` summed over the fields with weights
    /// `1/eps, eps, mu`, for the newest level `u+` and the one before it.
    pub fn energy(&self) -> f64 {
        cross_energy(&self.ops, &self.cur, &self.prev)
    }

    pub fn fields(&self) -> FieldsAt<'_> {
        let t = self.time();
        FieldsAt { p: &self.cur[0], t_p: t, e: &self.cur[1], t_e: t, h: &self.cur[2], t_h: t }
    }

    /// The level before the newest one.
    pub fn previous_fields(&self) -> FieldsAt<'_> {
        let t = self.time() - self.dt;
        FieldsAt { p: &self.prev[0], t_p: t, e: &self.prev[1], t_e: t, h: &self.prev[2], t_h: t }
    }
}

/// Cross-term energy of two consecutive levels.
pub fn cross_energy(ops: &OperatorSet, next: &Level, cur: &Level) -> f64 {
    let prm = ops.params;
    let w = [1.0 / prm.eps, prm.eps, prm.mu];
    (0..3)
        .map(|k| {
            let sum: Vec<f64> = next[k].iter().zip(&cur[k]).map(|(a, b)| a + b).collect();
            w[k] * (ops.inner(k, &sum, &sum) + 2.0 * ops.inner(k, &next[k], &cur[k]))
        })
        .sum()
}
