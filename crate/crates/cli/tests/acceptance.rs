//! Acceptance suite. Every criterion is one test that prints a single
//! `PASS` or `FAIL` line followed by indented detail, then asserts.
//! Heavy runs are serialized to bound memory on small machines.

use std::process::Command;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Instant;

use maxwell_feec::harness::{build_operators, run_on, RunConfig};
use maxwell_feec::mesh::Point;
use maxwell_feec::mms::{estimate_rate, fit_order, weighted_l2_error};
use maxwell_feec::{ExactSolution, Example, Field, Manufactured, OperatorSet, SchemeKind, SchemeState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static HEAVY: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(criterion: &str, ok: bool, details: &[String]) {
    let mut out = format!("{} {criterion}\n", if ok { "PASS" } else { "FAIL" });
    for d in details {
        out.push_str("    ");
        out.push_str(d);
        out.push('\n');
    }
    print!("{out}");
    assert!(ok, "{criterion} failed:\n{out}");
}

fn operators(example: Example, r: usize, n: usize) -> Arc<OperatorSet> {
    build_operators(r, n, ExactSolution::new(example).params).unwrap()
}

fn config(scheme: SchemeKind, example: Example, r: usize, n: usize, dt: f64) -> RunConfig {
    RunConfig { scheme, example, r, n, dt, ..RunConfig::default() }
}

const ENERGY_GRID: [(usize, usize, f64); 8] = [
    (1, 8, 1.0 / 20.0),
    (1, 8, 1.0 / 40.0),
    (1, 16, 1.0 / 20.0),
    (1, 16, 1.0 / 40.0),
    (2, 8, 1.0 / 20.0),
    (2, 8, 1.0 / 40.0),
    (2, 16, 1.0 / 20.0),
    (2, 16, 1.0 / 40.0),
];

fn p_norm(state: &SchemeState) -> f64 {
    let f = state.error_fields();
    state.ops().inner(0, f.p, f.p).sqrt()
}

#[test]
fn lf4_energy_conservation() {
    let _g = serial();
    let mut ok = true;
    let mut details = Vec::new();
    for (r, n, dt) in ENERGY_GRID {
        let t0 = Instant::now();
        let report = run_on(&config(SchemeKind::Lf4, Example::Example1, r, n, dt), operators(Example::Example1, r, n), &mut |_| {}).unwrap();
        let drift = report.energy.max_relative_drift();
        let secs = t0.elapsed().as_secs_f64();
        let pass = drift <= 1e-9 && secs <= 60.0 && report.energy.len() == report.config.steps() + 1;
        ok &= pass;
        details.push(format!("r={r} n={n} dt=1/{:.0}: max drift {drift:.2e}, {secs:.1}s", 1.0 / dt));
    }
    verdict("LF4 energy conservation (max relative drift <= 1e-9)", ok, &details);
}

#[test]
fn ts4_energy_identity() {
    let _g = serial();
    let mut ok = true;
    let mut details = Vec::new();
    for (r, n, dt) in ENERGY_GRID {
        let t0 = Instant::now();
        let res = run_on(&config(SchemeKind::Ts4, Example::Example1, r, n, dt), operators(Example::Example1, r, n), &mut |_| {});
        let secs = t0.elapsed().as_secs_f64();
        match res {
            Ok(report) => {
                let change = report.energy.max_relative_step_change();
                ok &= change <= 1e-9 && secs <= 60.0;
                details.push(format!("r={r} n={n} dt=1/{:.0}: max step change {change:.2e}, {secs:.1}s", 1.0 / dt));
            }
            Err(e) => {
                ok = false;
                details.push(format!("r={r} n={n} dt=1/{:.0}: {e}", 1.0 / dt));
            }
        }
    }
    verdict("TS4 energy identity (max relative step change <= 1e-9)", ok, &details);
}

const TEMPORAL_DTS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Final-time total errors over the temporal levels at `r = 2, n = 32`.
fn temporal_errors(ops: &Arc<OperatorSet>, scheme: SchemeKind, example: Example, kappa: f64) -> Vec<Option<f64>> {
    TEMPORAL_DTS
        .iter()
        .map(|&dt| {
            let c = RunConfig { kappa, ..config(scheme, example, 2, 32, dt) };
            run_on(&c, ops.clone(), &mut |_| {}).ok().and_then(|r| r.errors).map(|e| e.total).filter(|e| e.is_finite())
        })
        .collect()
}

/// Least-squares order over the levels whose error exceeds ten times the
/// error at the smallest step; needs at least two such levels.
fn floor_filtered_order(errors: &[Option<f64>]) -> (Option<f64>, usize) {
    let Some(floor) = errors.last().copied().flatten() else { return (None, 0) };
    let kept: Vec<(f64, f64)> = TEMPORAL_DTS
        .iter()
        .zip(errors)
        .filter_map(|(&dt, e)| e.filter(|e| *e > 10.0 * floor).map(|e| (dt, e)))
        .collect();
    let order = if kept.len() >= 2 { fit_order(&kept) } else { None };
    (order, kept.len())
}

fn fmt_errors(errors: &[Option<f64>]) -> String {
    errors.iter().map(|e| e.map_or("diverged".to_string(), |e| format!("{e:.3e}"))).collect::<Vec<_>>().join(", ")
}

fn order_criterion(name: &str, kappa: f64, schemes: &[SchemeKind], range: (f64, f64)) {
    let _g = serial();
    let mut ok = true;
    let mut details = Vec::new();
    for example in [Example::Example1, Example::Example2] {
        let ops = operators(example, 2, 32);
        for &scheme in schemes {
            let t0 = Instant::now();
            let errors = temporal_errors(&ops, scheme, example, kappa);
            let (order, kept) = floor_filtered_order(&errors);
            let pass = order.is_some_and(|q| (range.0..=range.1).contains(&q));
            ok &= pass;
            details.push(format!(
                "{scheme} {example}: e_total [{}]; {kept} level(s) above 10x floor; order {}; {:.0}s",
                fmt_errors(&errors),
                order.map_or("undefined".to_string(), |q| format!("{q:.2}")),
                t0.elapsed().as_secs_f64()
            ));
        }
    }
    verdict(name, ok, &details);
}

#[test]
fn temporal_order_four() {
    order_criterion(
        "Temporal order 4 (r=2, n=32, dt 1/10..1/80, order in [3.5, 4.5])",
        1.0,
        &[SchemeKind::Lf4, SchemeKind::Ts4],
        (3.5, 4.5),
    );
}

#[test]
fn degradation_without_corrections() {
    order_criterion("Degradation control (LF4 without corrections, order in [1.7, 2.5])", 0.0, &[SchemeKind::Lf4], (1.7, 2.5));
}

#[test]
fn spatial_order() {
    let _g = serial();
    let mut ok = true;
    let mut details = Vec::new();
    for (r, ns, min) in [(1, vec![4, 8, 16, 32], 0.8), (2, vec![4, 8, 16], 1.7)] {
        let t0 = Instant::now();
        let samples: Vec<(f64, f64)> = ns
            .iter()
            .map(|&n| {
                let c = config(SchemeKind::Lf4, Example::Example1, r, n, 1e-3);
                let e = run_on(&c, operators(Example::Example1, r, n), &mut |_| {}).unwrap().errors.unwrap();
                (e.h, e.total)
            })
            .collect();
        let order = fit_order(&samples).unwrap_or(f64::NAN);
        ok &= order >= min;
        let errs: Vec<String> = samples.iter().map(|s| format!("{:.3e}", s.1)).collect();
        details.push(format!(
            "r={r} n={ns:?}: e_total [{}]; fitted order {order:.2} (need >= {min}); {:.0}s",
            errs.join(", "),
            t0.elapsed().as_secs_f64()
        ));
    }
    verdict("Spatial order r (LF4, dt=1e-3)", ok, &details);
}

#[test]
fn projection_rates() {
    let sol = ExactSolution::new(Example::Example1);
    let mut ok = true;
    let mut details = Vec::new();
    for r in [1, 2] {
        // E at t = 0; p vanishes identically and H vanishes at t = 0, so H
        // is taken at t = 1/2 where it does not.
        let mut samples = [Vec::new(), Vec::new()];
        for n in [4, 8, 16, 32] {
            let o = operators(Example::Example1, r, n);
            let h_mesh = o.complex.mesh().h;
            let fe = |x: Point| sol.e(x, 0.0);
            let fh = |x: Point| sol.h(x, 0.5);
            let e = o.project(1, Field::Vector(&fe)).unwrap();
            let h = o.project(2, Field::Scalar(&fh)).unwrap();
            samples[0].push((h_mesh, weighted_l2_error(o.space(1), &e, 1.0, fe).unwrap()));
            samples[1].push((h_mesh, weighted_l2_error(o.space(2), &h, 1.0, |x| [fh(x), 0.0]).unwrap()));
        }
        for (name, s) in ["E(0)", "H(1/2)"].iter().zip(&samples) {
            let rates: Vec<f64> = estimate_rate(s).into_iter().map(|q| q.unwrap_or(f64::NAN)).collect();
            let pass = rates.iter().all(|q| (r as f64 - 0.2..=r as f64 + 0.5).contains(q));
            ok &= pass;
            let rs: Vec<String> = rates.iter().map(|q| format!("{q:.3}")).collect();
            details.push(format!("r={r} {name}: orders [{}]", rs.join(", ")));
        }
    }
    verdict("Projection rates (orders within [r-0.2, r+0.5])", ok, &details);
}

#[test]
fn structure_preservation() {
    let _g = serial();
    let mut ok = true;
    let mut details = Vec::new();
    let cases: Vec<(SchemeKind, usize, usize, f64)> = ENERGY_GRID
        .iter()
        .map(|&(r, n, dt)| (SchemeKind::Lf4, r, n, dt))
        .chain([(1, 8), (1, 16), (2, 8), (2, 16)].map(|(r, n)| (SchemeKind::Ts4, r, n, 1.0 / 160.0)))
        .collect();
    for (scheme, r, n, dt) in cases {
        let mut worst: f64 = 0.0;
        let mut steps = 0usize;
        run_on(&config(scheme, Example::Example1, r, n, dt), operators(Example::Example1, r, n), &mut |s| {
            worst = worst.max(p_norm(s));
            steps += 1;
        })
        .unwrap();
        ok &= worst <= 1e-7;
        details.push(format!("{scheme} r={r} n={n} dt=1/{:.0}: max ||p_h|| {worst:.2e} over {steps} levels", 1.0 / dt));
    }
    verdict("Structure preservation (||p_h|| <= 1e-7 at every step)", ok, &details);
}

#[test]
fn complex_and_adjointness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut ok = true;
    let mut details = Vec::new();
    for r in [1, 2] {
        for n in [4, 8] {
            let o = operators(Example::Example1, r, n);
            let kg = o.k.matmul(&o.g).unwrap().max_abs();
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let mut rand = |m: usize| -> Vec<f64> { (0..m).map(|_| rng.random_range(-1.0..1.0)).collect() };
                let (u, e, h) = (rand(o.m0.n_rows()), rand(o.m1.n_rows()), rand(o.m2.n_rows()));
                let d = o.weak_div(&e).unwrap();
                let (a, b) = (o.inner(0, &d, &u), -o.inner(1, &e, &o.g.mul_vec(&u)));
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
                let c = o.weak_curl_adjoint(&h).unwrap();
                let (a, b) = (o.inner(1, &c, &e), o.inner(2, &h, &o.k.mul_vec(&e)));
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            }
            ok &= kg <= 1e-13 && worst <= 1e-11;
            details.push(format!("r={r} n={n}: max|KG| {kg:.1e}, worst adjointness residual {worst:.1e}"));
        }
    }
    verdict("Complex and adjointness identities", ok, &details);
}

#[test]
fn mms_check() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    for (example, all) in [("example1", true), ("example2", false)] {
        let out = dir.path().join(example);
        let status = Command::new(env!("CARGO_BIN_EXE_maxwell-feec"))
            .args(["mms-check", "--example", example, "--out-dir", out.to_str().unwrap()])
            .output()
            .unwrap();
        let report = std::fs::read_to_string(out.join("mms_check.csv")).unwrap_or_default();
        let residual = |i: usize| -> f64 {
            report
                .lines()
                .find_map(|l| l.strip_prefix(&format!("residual_eq{i},")))
                .and_then(|v| v.parse().ok())
                .unwrap_or(f64::INFINITY)
        };
        let res = [residual(1), residual(2), residual(3)];
        let pass = status.status.code() == Some(0)
            && res[1] <= 1e-6
            && res[2] <= 1e-6
            && (!all || res[0] <= 1e-6)
            && res[0].is_finite();
        ok &= pass;
        details.push(format!(
            "{example}: exit {:?}, residuals eq1 {:.1e} (recorded), eq2 {:.1e}, eq3 {:.1e}",
            status.status.code(),
            res[0],
            res[1],
            res[2]
        ));
    }
    verdict("mms-check residuals", ok, &details);
}
