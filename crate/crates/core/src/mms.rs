//! Manufactured solutions, weighted error norms, rate estimation and a
//! finite-difference residual oracle for the continuous system
//!
//! ```text
//! p_t + div(eps E) = 0,   grad p + eps E_t - rot H = 0,   mu H_t + curl E = 0
//! ```
//!
//! with `rot H = (dH/dy, -dH/dx)` and `curl E = dE_y/dx - dE_x/dy`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::assembly::{pool, MaterialParams};
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::whitney::DeRhamSpace;
use rayon::prelude::*;

/// A closed-form solution of the three-field system.
pub trait Manufactured: Sync {
    fn name(&self) -> &str;
    fn params(&self) -> MaterialParams;
    fn p(&self, x: Point, t: f64) -> f64;
    fn e(&self, x: Point, t: f64) -> [f64; 2];
    fn h(&self, x: Point, t: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Example {
    Example1,
    Example2,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::Example1 => "example1",
            Example::Example2 => "example2",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "example1" | "1" => Ok(Example::Example1),
            "example2" | "2" => Ok(Example::Example2),
            other => Err(Error::Config(format!("unknown example '{other}' (expected example1 or example2)"))),
        }
    }
}

/// The two unit-square test problems, with the derived quantities needed to
/// lift boundary data for the auxiliary unknowns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    pub example: Example,
    pub params: MaterialParams,
    pub t_min: f64,
    pub t_max: f64,
}

pub fn exact(id: &str) -> Result<ExactSolution> {
    Ok(ExactSolution::new(id.parse()?))
}

impl ExactSolution {
    pub fn new(example: Example) -> Self {
        Self { example, params: MaterialParams::default(), t_min: 0.0, t_max: 1.0 }
    }

    /// Whether `p` and the tangential trace of `E` vanish on the boundary.
    pub fn has_homogeneous_traces(&self) -> bool {
        self.example == Example::Example1
    }

    fn phase(x: Point, t: f64) -> f64 {
        PI * (SQRT_2 * t - x[0] - x[1])
    }

    pub fn p_t(&self, x: Point, t: f64) -> f64 {
        match self.example {
            Example::Example1 => 0.0,
            Example::Example2 => PI * ((PI * x[0]).cos() + (PI * x[1]).cos()) * (PI * t).cos(),
        }
    }

    pub fn e_t(&self, x: Point, t: f64) -> [f64; 2] {
        let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
        let st = (PI * t).sin();
        match self.example {
            Example::Example1 => [-PI * sy * st, -PI * sx * st],
            Example::Example2 => {
                let c = Self::phase(x, t).cos();
                [SQRT_2 * PI * c + PI * sx * st, -SQRT_2 * PI * c + PI * sy * st]
            }
        }
    }

    pub fn h_t(&self, x: Point, t: f64) -> f64 {
        match self.example {
            Example::Example1 => PI * ((PI * x[1]).cos() - (PI * x[0]).cos()) * (PI * t).cos(),
            Example::Example2 => -2.0 * PI * Self::phase(x, t).cos(),
        }
    }

    pub fn grad_p(&self, x: Point, t: f64) -> [f64; 2] {
        match self.example {
            Example::Example1 => [0.0, 0.0],
            Example::Example2 => {
                let st = (PI * t).sin();
                [-PI * (PI * x[0]).sin() * st, -PI * (PI * x[1]).sin() * st]
            }
        }
    }

    pub fn div_e(&self, x: Point, t: f64) -> f64 {
        match self.example {
            Example::Example1 => 0.0,
            Example::Example2 => -PI * ((PI * x[0]).cos() + (PI * x[1]).cos()) * (PI * t).cos(),
        }
    }

    pub fn laplace_p(&self, x: Point, t: f64) -> f64 {
        match self.example {
            Example::Example1 => 0.0,
            Example::Example2 => -PI * PI * ((PI * x[0]).cos() + (PI * x[1]).cos()) * (PI * t).sin(),
        }
    }

    /// `rot H = (dH/dy, -dH/dx)`.
    pub fn rot_h(&self, x: Point, t: f64) -> [f64; 2] {
        match self.example {
            Example::Example1 => {
                let st = (PI * t).sin();
                [-PI * (PI * x[1]).sin() * st, -PI * (PI * x[0]).sin() * st]
            }
            Example::Example2 => {
                let c = SQRT_2 * PI * Self::phase(x, t).cos();
                [c, -c]
            }
        }
    }

    pub fn curl_e(&self, x: Point, t: f64) -> f64 {
        match self.example {
            Example::Example1 => PI * ((PI * x[0]).cos() - (PI * x[1]).cos()) * (PI * t).cos(),
            Example::Example2 => 2.0 * PI * Self::phase(x, t).cos(),
        }
    }

    pub fn rot_curl_e(&self, x: Point, t: f64) -> [f64; 2] {
        match self.example {
            Example::Example1 => {
                let ct = (PI * t).cos();
                [PI * PI * (PI * x[1]).sin() * ct, PI * PI * (PI * x[0]).sin() * ct]
            }
            Example::Example2 => {
                let s = 2.0 * PI * PI * Self::phase(x, t).sin();
                [s, -s]
            }
        }
    }
}

impl Manufactured for ExactSolution {
    fn name(&self) -> &str {
        self.example.name()
    }

    fn params(&self) -> MaterialParams {
        self.params
    }

    fn p(&self, x: Point, t: f64) -> f64 {
        match self.example {
            Example::Example1 => 0.0,
            Example::Example2 => ((PI * x[0]).cos() + (PI * x[1]).cos()) * (PI * t).sin(),
        }
    }

    fn e(&self, x: Point, t: f64) -> [f64; 2] {
        let ct = (PI * t).cos();
        match self.example {
            Example::Example1 => [(PI * x[1]).sin() * ct, (PI * x[0]).sin() * ct],
            Example::Example2 => {
                let s = Self::phase(x, t).sin();
                [s - (PI * x[0]).sin() * ct, -s - (PI * x[1]).sin() * ct]
            }
        }
    }

    fn h(&self, x: Point, t: f64) -> f64 {
        match self.example {
            Example::Example1 => ((PI * x[1]).cos() - (PI * x[0]).cos()) * (PI * t).sin(),
            Example::Example2 => -SQRT_2 * Self::phase(x, t).sin(),
        }
    }
}

/// `sqrt(w * int |u_h - u|^2)` over the mesh, using the space's quadrature.
/// `exact` returns the target value (scalar in component 0).
pub fn weighted_l2_error(space: &DeRhamSpace, coeffs: &[f64], weight: f64, exact: impl Fn(Point) -> [f64; 2] + Sync) -> Result<f64> {
    if coeffs.len() != space.n_dofs {
        return Err(Error::DimensionMismatch { expected: space.n_dofs, got: coeffs.len() });
    }
    let rule = &space.reference.quadrature;
    let mesh = &space.mesh;
    let parts: Vec<f64> = pool().install(|| {
        (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let g = mesh.geometry(c);
                let mut acc = 0.0;
                for (&w, &xi) in rule.weights.iter().zip(&rule.points) {
                    let uh = space.evaluate_in_cell(coeffs, c, xi);
                    let u = exact(g.map(xi));
                    acc += w * g.det * ((uh[0] - u[0]).powi(2) + (uh[1] - u[1]).powi(2));
                }
                acc
            })
            .collect()
    });
    Ok((weight * parts.iter().sum::<f64>()).sqrt())
}

/// Field coefficients of all three unknowns with the times they approximate.
#[derive(Debug, Clone, Copy)]
pub struct FieldsAt<'a> {
    pub p: &'a [f64],
    pub t_p: f64,
    pub e: &'a [f64],
    pub t_e: f64,
    pub h: &'a [f64],
    pub t_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub h: f64,
    pub dt: f64,
    pub r: usize,
    pub scheme: String,
    pub e_p: f64,
    pub e_e: f64,
    pub e_h: f64,
    pub total: f64,
}

/// Weighted errors `||.||_{1/eps}`, `||.||_eps`, `||.||_mu` of `fields`
/// against `sol`, each at the time its coefficients approximate.
pub fn error_norms(
    fields: FieldsAt<'_>,
    sol: &dyn Manufactured,
    spaces: [&DeRhamSpace; 3],
) -> Result<(f64, f64, f64)> {
    let prm = sol.params();
    let e_p = weighted_l2_error(spaces[0], fields.p, 1.0 / prm.eps, |x| [sol.p(x, fields.t_p), 0.0])?;
    let e_e = weighted_l2_error(spaces[1], fields.e, prm.eps, |x| sol.e(x, fields.t_e))?;
    let e_h = weighted_l2_error(spaces[2], fields.h, prm.mu, |x| [sol.h(x, fields.t_h), 0.0])?;
    Ok((e_p, e_e, e_h))
}

/// Like [`error_norms`] but refuses fields that do not sit at time `t`.
pub fn error_norms_at(
    fields: FieldsAt<'_>,
    t: f64,
    sol: &dyn Manufactured,
    spaces: [&DeRhamSpace; 3],
) -> Result<(f64, f64, f64)> {
    for (name, ti) in [("p", fields.t_p), ("E", fields.t_e), ("H", fields.t_h)] {
        if (ti - t).abs() > 1e-12 {
            return Err(Error::TimeLevel(format!("{name} is held at t={ti}, norm requested at t={t}")));
        }
    }
    error_norms(fields, sol, spaces)
}

/// Observed orders between consecutive samples `(parameter, error)`:
/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`. Non-positive or non-finite
/// errors give `None`.
pub fn estimate_rate(samples: &[(f64, f64)]) -> Vec<Option<f64>> {
    samples
        .windows(2)
        .map(|w| {
            let ((h0, e0), (h1, e1)) = (w[0], w[1]);
            let ok = |e: f64| e > 0.0 && e.is_finite();
            if !ok(e0) || !ok(e1) || h0 <= 0.0 || h1 <= 0.0 || h0 == h1 {
                return None;
            }
            Some((e0 / e1).ln() / (h0 / h1).ln())
        })
        .collect()
}

/// Least-squares slope of `log e` against `log h`; `None` with fewer than two
/// usable samples.
pub fn fit_order(samples: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(h, e)| *h > 0.0 && *e > 0.0 && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Maximum absolute residual of each PDE equation on the sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub name: String,
    pub residuals: [f64; 3],
    /// `max |div(eps E_0) - p_0|`, the stated initial consistency condition.
    pub initial_condition: f64,
    pub tolerance: f64,
}

impl ResidualReport {
    /// Equations 2 and 3 within tolerance.
    pub fn field_equations_ok(&self) -> bool {
        self.residuals[1] <= self.tolerance && self.residuals[2] <= self.tolerance
    }

    pub fn all_ok(&self) -> bool {
        self.field_equations_ok() && self.residuals[0] <= self.tolerance
    }
}

pub const MMS_TOLERANCE: f64 = 1e-6;
const FD_STEP: f64 = 1e-4;

fn d4(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = FD_STEP;
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Evaluates the three residuals with fourth-order central differences on a
/// 20 x 20 x 10 cell-centred space-time grid over `[0,1]^2 x [0, t_max]`.
pub fn mms_check(sol: &dyn Manufactured, t_max: f64) -> ResidualReport {
    let prm = sol.params();
    let (eps, mu) = (prm.eps, prm.mu);
    let mut res = [0.0f64; 3];
    let mut init = 0.0f64;
    for i in 0..20 {
        for j in 0..20 {
            let x = [(i as f64 + 0.5) / 20.0, (j as f64 + 0.5) / 20.0];
            let dx = |f: &dyn Fn(Point) -> f64| d4(|s| f([s, x[1]]), x[0]);
            let dy = |f: &dyn Fn(Point) -> f64| d4(|s| f([x[0], s]), x[1]);
            let div0 = eps * (dx(&|y| sol.e(y, 0.0)[0]) + dy(&|y| sol.e(y, 0.0)[1]));
            init = init.max((div0 - sol.p(x, 0.0)).abs());
            for k in 0..10 {
                let t = (k as f64 + 0.5) * t_max / 10.0;
                let p_t = d4(|s| sol.p(x, s), t);
                let div = eps * (dx(&|y| sol.e(y, t)[0]) + dy(&|y| sol.e(y, t)[1]));
                res[0] = res[0].max((p_t + div).abs());

                let grad_p = [dx(&|y| sol.p(y, t)), dy(&|y| sol.p(y, t))];
                let e_t = [d4(|s| sol.e(x, s)[0], t), d4(|s| sol.e(x, s)[1], t)];
                let rot_h = [dy(&|y| sol.h(y, t)), -dx(&|y| sol.h(y, t))];
                for c in 0..2 {
                    res[1] = res[1].max((grad_p[c] + eps * e_t[c] - rot_h[c]).abs());
                }

                let h_t = d4(|s| sol.h(x, s), t);
                let curl = dx(&|y| sol.e(y, t)[1]) - dy(&|y| sol.e(y, t)[0]);
                res[2] = res[2].max((mu * h_t + curl).abs());
            }
        }
    }
    ResidualReport { name: sol.name().to_string(), residuals: res, initial_condition: init, tolerance: MMS_TOLERANCE }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Zero;
    impl Manufactured for Zero {
        fn name(&self) -> &str {
            "zero"
        }
        fn params(&self) -> MaterialParams {
            MaterialParams::default()
        }
        fn p(&self, _: Point, _: f64) -> f64 {
            0.0
        }
        fn e(&self, _: Point, _: f64) -> [f64; 2] {
            [0.0; 2]
        }
        fn h(&self, _: Point, _: f64) -> f64 {
            0.0
        }
    }

    #[test]
    fn example_values() {
        let e1 = exact("example1").unwrap();
        for x in [[0.2, 0.7], [0.5, 0.5], [1.0, 0.0]] {
            assert_eq!(e1.h(x, 0.0), 0.0);
        }
        assert_eq!(e1.e([0.5, 0.5], 0.0), [1.0, 1.0]);
        let e2 = exact("example2").unwrap();
        for x in [[0.2, 0.7], [0.5, 0.5]] {
            assert_eq!(e2.p(x, 0.0), 0.0);
        }
        assert!(matches!(exact("example3"), Err(Error::Config(_))));
    }

    #[test]
    fn residual_oracle() {
        for ex in [Example::Example1, Example::Example2] {
            let r = mms_check(&ExactSolution::new(ex), 1.0);
            assert!(r.all_ok(), "{ex}: {:?}", r.residuals);
        }
        let r = mms_check(&Zero, 1.0);
        assert_eq!(r.residuals, [0.0; 3]);
        let r2 = mms_check(&ExactSolution::new(Example::Example2), 1.0);
        assert!(r2.initial_condition > 1.0);
    }

    #[test]
    fn derived_quantities_match_finite_differences() {
        for ex in [Example::Example1, Example::Example2] {
            let s = ExactSolution::new(ex);
            for &(x, t) in &[([0.3, 0.6], 0.4), ([0.85, 0.15], 0.9), ([0.5, 0.5], 0.05)] {
                let dx = |f: &dyn Fn(Point) -> f64| d4(|v| f([v, x[1]]), x[0]);
                let dy = |f: &dyn Fn(Point) -> f64| d4(|v| f([x[0], v]), x[1]);
                let close = |a: f64, b: f64| assert!((a - b).abs() < 1e-8, "{ex}: {a} vs {b}");
                close(s.p_t(x, t), d4(|v| s.p(x, v), t));
                close(s.h_t(x, t), d4(|v| s.h(x, v), t));
                close(s.e_t(x, t)[0], d4(|v| s.e(x, v)[0], t));
                close(s.e_t(x, t)[1], d4(|v| s.e(x, v)[1], t));
                close(s.grad_p(x, t)[0], dx(&|y| s.p(y, t)));
                close(s.grad_p(x, t)[1], dy(&|y| s.p(y, t)));
                close(s.div_e(x, t), dx(&|y| s.e(y, t)[0]) + dy(&|y| s.e(y, t)[1]));
                close(s.laplace_p(x, t), dx(&|y| s.grad_p(y, t)[0]) + dy(&|y| s.grad_p(y, t)[1]));
                close(s.rot_h(x, t)[0], dy(&|y| s.h(y, t)));
                close(s.rot_h(x, t)[1], -dx(&|y| s.h(y, t)));
                close(s.curl_e(x, t), dx(&|y| s.e(y, t)[1]) - dy(&|y| s.e(y, t)[0]));
                close(s.rot_curl_e(x, t)[0], dy(&|y| s.curl_e(y, t)));
                close(s.rot_curl_e(x, t)[1], -dx(&|y| s.curl_e(y, t)));
            }
        }
    }

    #[test]
    fn rates() {
        let r = estimate_rate(&[(1.0, 1.0), (0.5, 1.0 / 16.0)]);
        assert!((r[0].unwrap() - 4.0).abs() < 1e-15);
        assert!((estimate_rate(&[(1.0, 1.0), (0.5, 0.5)])[0].unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(estimate_rate(&[(1.0, 1.0), (0.5, 0.0)]), vec![None]);
        assert_eq!(estimate_rate(&[(1.0, 0.3), (0.5, 0.3)]), vec![Some(0.0)]);
        let pts: Vec<(f64, f64)> = (0..5).map(|i| {
            let h = 0.1 / 2f64.powi(i);
            (h, 3.0 * h.powi(4))
        }).collect();
        assert!((fit_order(&pts).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(fit_order(&pts[..1]), None);
    }
}
