//! Staggered fourth-order scheme with Δt²/12 corrections realised through
//! auxiliary unknowns.
//!
//! Unknown blocks, in order: `p, E, H` at the new level and the auxiliaries
//! `w ~ Σ div E`, `c ~ Σ rot H`, `s ~ -Σ Δp`, `g ~ Σ rot curl E`, each a sum
//! over the new and the old level. Every field update is centred at the old
//! level's time plus Δt/2, so the stored `p`, `E` and `H` all approximate the
//! same half-integer time `(n - 1/2) Δt` after `n` updates.

use std::sync::Arc;

use super::{trace_values, weighted_energy, BoundaryMode, PinnedSystem, Products};
use crate::assembly::OperatorSet;
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::mms::FieldsAt;
use crate::sparse::{assemble_block, Block, BlockLayout, BlockSystem};
use crate::whitney::Field;

const P: usize = 0;
const E: usize = 1;
const H: usize = 2;
const W: usize = 3;
const C: usize = 4;
const S: usize = 5;
const G: usize = 6;

/// Coefficients of one update in divided form:
///
/// ```text
/// M0 (p+ - p-)/dp - eps a_pe G^T M1 ΣE + eps c_pe G^T M1 G w = 0
/// a_ep M1 G Σp + c_ep M1 G s + eps M1 (E+ - E-)/de - a_eh K^T M2 ΣH
///     - c_eh/(mu eps) K^T M2 K c = 0
/// mu M2 (H+ - H-)/dh + a_he M2 K ΣE + c_he/(eps mu) M2 K g = 0
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lf4Coefficients {
    pub dp: f64,
    pub de: f64,
    pub dh: f64,
    pub a_pe: f64,
    pub a_ep: f64,
    pub a_eh: f64,
    pub a_he: f64,
    pub c_pe: f64,
    pub c_ep: f64,
    pub c_eh: f64,
    pub c_he: f64,
}

impl Lf4Coefficients {
    /// The regular step; `kappa = 0` drops the corrections.
    pub fn step(dt: f64, kappa: f64) -> Self {
        let c = kappa * dt * dt / 24.0;
        Self { dp: dt, de: dt, dh: dt, a_pe: 0.5, a_ep: 0.5, a_eh: 0.5, a_he: 0.5, c_pe: c, c_ep: c, c_eh: c, c_he: c }
    }

    /// The restricted first step: `p` and `E` divided by `dt/2` with quarter
    /// couplings, `H` divided by `dt`, half coupling for the `H` term of the
    /// `E` row. It is not energy-consistent; kept for comparison.
    pub fn restricted_bootstrap(dt: f64, kappa: f64) -> Self {
        let c = kappa * dt * dt / 24.0;
        Self {
            dp: dt / 2.0,
            de: dt / 2.0,
            dh: dt,
            a_pe: 0.25,
            a_ep: 0.25,
            a_eh: 0.5,
            a_he: 0.25,
            c_pe: c / 8.0,
            c_ep: c / 8.0,
            c_eh: c / 4.0,
            c_he: c / 8.0,
        }
    }
}

/// First-step formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BootstrapVariant {
    /// The regular update with step Δt/2: advances all fields to Δt/2 and
    /// conserves the discrete energy exactly.
    #[default]
    Consistent,
    /// The restricted system of [`Lf4Coefficients::restricted_bootstrap`].
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lf4Options {
    /// Multiplier of the Δt²/12 terms; 1 gives the fourth-order scheme.
    pub kappa: f64,
    pub bootstrap: BootstrapVariant,
}

impl Default for Lf4Options {
    fn default() -> Self {
        Self { kappa: 1.0, bootstrap: BootstrapVariant::Consistent }
    }
}

/// Assembles `A` (7 x 7 blocks) and `B` (7 x 3 blocks acting on the old
/// `p, E, H`) of one update.
pub fn lf4_blocks(ops: &OperatorSet, co: &Lf4Coefficients) -> Result<(BlockSystem, BlockSystem)> {
    let pr = Products::new(ops)?;
    lf4_blocks_with(ops, &pr, co)
}

fn lf4_blocks_with(ops: &OperatorSet, pr: &Products, co: &Lf4Coefficients) -> Result<(BlockSystem, BlockSystem)> {
    let (eps, mu) = (ops.params.eps, ops.params.mu);
    let gtm1g = pr.gt_m1.matmul(&ops.g)?;
    let ktm2k = pr.kt_m2.matmul(&ops.k)?;
    let (nu, nv, nw) = (ops.m0.n_rows(), ops.m1.n_rows(), ops.m2.n_rows());
    let rows = vec![nu, nv, nw, nu, nv, nu, nv];
    let a = assemble_block(
        BlockLayout::square(rows.clone()),
        &[
            Block::new(P, P, 1.0 / co.dp, &ops.m0),
            Block::new(P, E, -eps * co.a_pe, &pr.gt_m1),
            Block::new(P, W, eps * co.c_pe, &gtm1g),
            Block::new(E, P, co.a_ep, &pr.m1_g),
            Block::new(E, E, eps / co.de, &ops.m1),
            Block::new(E, H, -co.a_eh, &pr.kt_m2),
            Block::new(E, C, -co.c_eh / (mu * eps), &ktm2k),
            Block::new(E, S, co.c_ep, &pr.m1_g),
            Block::new(H, E, co.a_he, &pr.m2_k),
            Block::new(H, H, mu / co.dh, &ops.m2),
            Block::new(H, G, co.c_he / (eps * mu), &pr.m2_k),
            Block::new(W, E, 1.0, &pr.gt_m1),
            Block::new(W, W, 1.0, &ops.m0),
            Block::new(C, H, -1.0, &pr.kt_m2),
            Block::new(C, C, 1.0, &ops.m1),
            Block::new(S, P, -1.0, &gtm1g),
            Block::new(S, S, 1.0, &ops.m0),
            Block::new(G, E, -1.0, &ktm2k),
            Block::new(G, G, 1.0, &ops.m1),
        ],
    )?;
    let b = assemble_block(
        BlockLayout::new(rows, vec![nu, nv, nw]),
        &[
            Block::new(P, P, 1.0 / co.dp, &ops.m0),
            Block::new(P, E, eps * co.a_pe, &pr.gt_m1),
            Block::new(E, P, -co.a_ep, &pr.m1_g),
            Block::new(E, E, eps / co.de, &ops.m1),
            Block::new(E, H, co.a_eh, &pr.kt_m2),
            Block::new(H, E, -co.a_he, &pr.m2_k),
            Block::new(H, H, mu / co.dh, &ops.m2),
            Block::new(W, E, -1.0, &pr.gt_m1),
            Block::new(C, H, 1.0, &pr.kt_m2),
            Block::new(S, P, 1.0, &gtm1g),
            Block::new(G, E, 1.0, &ktm2k),
        ],
    )?;
    Ok((a, b))
}

/// Global indices of the essential boundary DOFs of `p, E, w, c, s, g`.
fn pinned_indices(ops: &OperatorSet) -> Vec<usize> {
    let (nu, nv, nw) = (ops.m0.n_rows(), ops.m1.n_rows(), ops.m2.n_rows());
    let offsets = [0, nu, nu + nv, nu + nv + nw, 2 * nu + nv + nw, 2 * nu + 2 * nv + nw, 3 * nu + 2 * nv + nw];
    let mut out = Vec::new();
    for (block, k) in [(P, 0), (E, 1), (W, 0), (C, 1), (S, 0), (G, 1)] {
        out.extend(ops.space(k).boundary_dofs.iter().map(|&i| offsets[block] + i));
    }
    out
}

/// Prescribed values for an update from time `t_old` to `t_new`.
fn pinned_values(ops: &OperatorSet, bc: &BoundaryMode, n_pinned: usize, t_new: f64, t_old: f64) -> Result<Vec<f64>> {
    let sol = match bc {
        BoundaryMode::Homogeneous => return Ok(vec![0.0; n_pinned]),
        BoundaryMode::Exact(sol) => sol,
    };
    use crate::mms::Manufactured;
    let (u, v) = (ops.space(0), ops.space(1));
    let sum2 = |f: &dyn Fn(Point, f64) -> [f64; 2], x: Point| {
        let (a, b) = (f(x, t_new), f(x, t_old));
        [a[0] + b[0], a[1] + b[1]]
    };
    let p = |x: Point| sol.p(x, t_new);
    let e = |x: Point| sol.e(x, t_new);
    let w = |x: Point| sol.div_e(x, t_new) + sol.div_e(x, t_old);
    let c = |x: Point| sum2(&|y, t| sol.rot_h(y, t), x);
    let s = |x: Point| -(sol.laplace_p(x, t_new) + sol.laplace_p(x, t_old));
    let g = |x: Point| sum2(&|y, t| sol.rot_curl_e(y, t), x);
    let mut out = Vec::with_capacity(n_pinned);
    out.extend(trace_values(u, Field::Scalar(&p))?);
    out.extend(trace_values(v, Field::Vector(&e))?);
    out.extend(trace_values(u, Field::Scalar(&w))?);
    out.extend(trace_values(v, Field::Vector(&c))?);
    out.extend(trace_values(u, Field::Scalar(&s))?);
    out.extend(trace_values(v, Field::Vector(&g))?);
    debug_assert_eq!(out.len(), n_pinned);
    Ok(out)
}

/// Stepper state: the current `p, E, H` and the two factorized systems.
#[derive(Debug, Clone)]
pub struct Lf4 {
    ops: Arc<OperatorSet>,
    bc: BoundaryMode,
    dt: f64,
    options: Lf4Options,
    step_system: PinnedSystem,
    bootstrap_system: PinnedSystem,
    pub p: Vec<f64>,
    pub e: Vec<f64>,
    pub h: Vec<f64>,
    n: usize,
}

impl Lf4 {
    /// Assembles and factorizes the step and bootstrap systems.
    pub fn build(ops: Arc<OperatorSet>, dt: f64, bc: BoundaryMode, options: Lf4Options) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        if dt >= 1.0 / 24.0 {
            log::warn!("dt = {dt} is not below 1/24; the error estimate assumes a smaller step");
        }
        let pr = Products::new(&ops)?;
        let pinned = pinned_indices(&ops);
        let (a, b) = lf4_blocks_with(&ops, &pr, &Lf4Coefficients::step(dt, options.kappa))?;
        let step_system = PinnedSystem::new(&a.matrix, b.matrix, pinned.clone())?;
        let co = match options.bootstrap {
            BootstrapVariant::Consistent => Lf4Coefficients::step(dt / 2.0, options.kappa),
            BootstrapVariant::Restricted => Lf4Coefficients::restricted_bootstrap(dt, options.kappa),
        };
        let (a, b) = lf4_blocks_with(&ops, &pr, &co)?;
        let bootstrap_system = PinnedSystem::new(&a.matrix, b.matrix, pinned)?;
        let (nu, nv, nw) = (ops.m0.n_rows(), ops.m1.n_rows(), ops.m2.n_rows());
        Ok(Self {
            ops,
            bc,
            dt,
            options,
            step_system,
            bootstrap_system,
            p: vec![0.0; nu],
            e: vec![0.0; nv],
            h: vec![0.0; nw],
            n: 0,
        })
    }

    pub fn ops(&self) -> &Arc<OperatorSet> {
        &self.ops
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn options(&self) -> Lf4Options {
        self.options
    }

    /// Number of completed updates (the bootstrap counts as one).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Time approximated by the stored fields.
    pub fn time(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.n as f64 - 0.5) * self.dt
        }
    }

    pub fn step_system(&self) -> &PinnedSystem {
        &self.step_system
    }

    pub fn bootstrap_system(&self) -> &PinnedSystem {
        &self.bootstrap_system
    }

    /// Replaces the current fields; `n` counts completed updates.
    pub fn set_state(&mut self, p: Vec<f64>, e: Vec<f64>, h: Vec<f64>, n: usize) -> Result<()> {
        for (got, want) in [(p.len(), self.p.len()), (e.len(), self.e.len()), (h.len(), self.h.len())] {
            if got != want {
                return Err(Error::DimensionMismatch { expected: want, got });
            }
        }
        (self.p, self.e, self.h, self.n) = (p, e, h, n);
        Ok(())
    }

    /// Loads the initial data at `t = 0`.
    pub fn init(&mut self, p0: Vec<f64>, e0: Vec<f64>, h0: Vec<f64>) -> Result<()> {
        self.set_state(p0, e0, h0, 0)
    }

    /// Advances the initial data to the first staggered level.
    pub fn bootstrap(&mut self) -> Result<()> {
        if self.n != 0 {
            return Err(Error::TimeLevel(format!("bootstrap after {} updates", self.n)));
        }
        let t_new = 0.5 * self.dt;
        self.advance(true, t_new, 0.0)
    }

    /// One regular update.
    pub fn step(&mut self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::TimeLevel("step before bootstrap".into()));
        }
        let t_old = self.time();
        self.advance(false, t_old + self.dt, t_old)
    }

    fn advance(&mut self, bootstrap: bool, t_new: f64, t_old: f64) -> Result<()> {
        let sys = if bootstrap { &self.bootstrap_system } else { &self.step_system };
        let vals = pinned_values(&self.ops, &self.bc, sys.pinned().len(), t_new, t_old)?;
        let old = BlockSystem::concat(&[&self.p, &self.e, &self.h]);
        let x = sys.solve(&old, &vals)?;
        let (nu, nv, nw) = (self.p.len(), self.e.len(), self.h.len());
        self.p.copy_from_slice(&x[..nu]);
        self.e.copy_from_slice(&x[nu..nu + nv]);
        self.h.copy_from_slice(&x[nu + nv..nu + nv + nw]);
        self.n += 1;
        Ok(())
    }

    /// `eps^-1 ||p||² + eps ||E||² + mu ||H||²` of the stored level.
    pub fn energy(&self) -> f64 {
        weighted_energy(&self.ops, &self.p, &self.e, &self.h)
    }

    pub fn fields(&self) -> FieldsAt<'_> {
        let t = self.time();
        FieldsAt { p: &self.p, t_p: t, e: &self.e, t_e: t, h: &self.h, t_h: t }
    }

    /// The unpinned block systems `(A, B)` of the regular step.
    pub fn step_blocks(&self) -> Result<(BlockSystem, BlockSystem)> {
        lf4_blocks(&self.ops, &Lf4Coefficients::step(self.dt, self.options.kappa))
    }
}
