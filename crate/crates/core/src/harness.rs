//! Run orchestration behind the command-line front end: configuration,
//! single runs, convergence sweeps, the residual check, and CSV/VTK output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::assembly::{assemble_operators, MaterialParams, OperatorSet};
use crate::error::{Error, Result};
use crate::mesh::{unit_square_mesh, DiagonalPattern};
use crate::mms::{error_norms, estimate_rate, mms_check, ErrorReport, Example, ExactSolution, ResidualReport};
use crate::schemes::{BootstrapVariant, BoundaryMode, EnergyTrace, Lf4, Lf4Options, SchemeKind, SchemeState, Ts4};
use crate::whitney::DeRhamComplex;

pub const ENERGY_HEADER: [&str; 3] = ["n", "t", "energy"];
pub const ERRORS_HEADER: [&str; 8] = ["h", "dt", "r", "scheme", "e_p", "e_E", "e_H", "e_total"];
pub const RATES_HEADER: [&str; 11] =
    ["level", "h", "dt", "e_p", "e_E", "e_H", "e_total", "order_p", "order_E", "order_H", "order_total"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcChoice {
    /// Homogeneous for Example 1, exact traces for Example 2.
    Auto,
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Fixed mesh, halving `dt`.
    Temporal,
    /// Fixed `dt`, doubling `n`.
    Spatial,
}

impl std::str::FromStr for SweepMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "temporal" => Ok(SweepMode::Temporal),
            "spatial" => Ok(SweepMode::Spatial),
            other => Err(Error::Config(format!("unknown mode '{other}' (expected temporal or spatial)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub example: Example,
    pub r: usize,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub bc: BcChoice,
    pub out_dir: PathBuf,
    /// Times at which VTK snapshots are written; empty disables VTK.
    pub vtk_times: Vec<f64>,
    pub bootstrap: BootstrapVariant,
    /// Multiplier of the LF4 correction terms.
    pub kappa: f64,
    /// Treat the problem as given by initial data alone: no exact solution
    /// after `t = 0`, hence no TS4 start level and no error report.
    pub initial_data_only: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::Lf4,
            example: Example::Example1,
            r: 1,
            n: 8,
            dt: 0.05,
            t_end: 1.0,
            bc: BcChoice::Auto,
            out_dir: PathBuf::from("."),
            vtk_times: Vec::new(),
            bootstrap: BootstrapVariant::Consistent,
            kappa: 1.0,
            initial_data_only: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("invalid value '{value}' for '{key}'"))),
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// Sets one option by its configuration-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scheme" => self.scheme = value.parse()?,
            "example" => self.example = value.parse()?,
            "order" | "r" => self.r = parse_num(key, value)?,
            "n" => self.n = parse_num(key, value)?,
            "dt" => self.dt = parse_num(key, value)?,
            "T" | "t_end" => self.t_end = parse_num(key, value)?,
            "bc" => {
                self.bc = match value.trim() {
                    "auto" => BcChoice::Auto,
                    "homogeneous" => BcChoice::Homogeneous,
                    other => return Err(Error::Config(format!("unknown bc '{other}' (expected auto or homogeneous)"))),
                }
            }
            "out_dir" | "out-dir" => self.out_dir = PathBuf::from(value.trim()),
            "vtk_times" | "vtk-times" => {
                self.vtk_times = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_num(key, s))
                    .collect::<Result<_>>()?
            }
            "bootstrap" => {
                self.bootstrap = match value.trim() {
                    "consistent" => BootstrapVariant::Consistent,
                    "restricted" => BootstrapVariant::Restricted,
                    other => return Err(Error::Config(format!("unknown bootstrap '{other}'"))),
                }
            }
            "kappa" => self.kappa = parse_num(key, value)?,
            "initial_data_only" | "initial-data-only" => self.initial_data_only = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, entries: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in entries {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut c = Self::default();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        c.apply(&parse_key_values(&text)?)?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_end)));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(1..=2).contains(&self.r) {
            return Err(Error::Config(format!("order must be 1 or 2, got {}", self.r)));
        }
        if !self.kappa.is_finite() {
            return Err(Error::Config("kappa must be finite".into()));
        }
        if self.steps() == 0 {
            return Err(Error::Config(format!("T = {} is shorter than half a step", self.t_end)));
        }
        if self.initial_data_only {
            if self.scheme == SchemeKind::Ts4 {
                return Err(Error::MissingStartLevel(
                    "ts4 needs the solution at t = dt, which a problem given only by initial data does not provide".into(),
                ));
            }
            if matches!(self.boundary_mode(), BoundaryMode::Exact(_)) {
                return Err(Error::Config("nonhomogeneous boundary data needs the exact solution; use bc=homogeneous".into()));
            }
        }
        Ok(())
    }

    /// `N = round(T / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        let sol = ExactSolution::new(self.example);
        match self.bc {
            BcChoice::Homogeneous => BoundaryMode::Homogeneous,
            BcChoice::Auto if sol.has_homogeneous_traces() => BoundaryMode::Homogeneous,
            BcChoice::Auto => BoundaryMode::Exact(sol),
        }
    }
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub assembly: f64,
    pub factorization: f64,
    pub stepping: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: RunConfig,
    pub energy: EnergyTrace,
    pub errors: Option<ErrorReport>,
    pub timings: Timings,
}

pub fn build_operators(r: usize, n: usize, params: MaterialParams) -> Result<Arc<OperatorSet>> {
    let mesh = Arc::new(unit_square_mesh(n, DiagonalPattern::Right)?);
    Ok(Arc::new(assemble_operators(&DeRhamComplex::new(mesh, r)?, params)?))
}

fn check_finite(state: &SchemeState, step: usize) -> Result<f64> {
    let e = state.energy();
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::Diverged { step })
    }
}

/// Executes one run in memory. `observer` sees the state after every update,
/// including the start level(s).
pub fn run_observed(config: &RunConfig, observer: &mut dyn FnMut(&SchemeState)) -> Result<RunReport> {
    config.validate()?;
    let t0 = Instant::now();
    let ops = build_operators(config.r, config.n, ExactSolution::new(config.example).params)?;
    let assembly = t0.elapsed().as_secs_f64();
    let mut report = run_on(config, ops, observer)?;
    report.timings.assembly = assembly;
    Ok(report)
}

/// Like [`run_observed`], on operators assembled by the caller for the
/// configured order and mesh. Lets sweeps over `dt` share one assembly.
pub fn run_on(config: &RunConfig, ops: Arc<OperatorSet>, observer: &mut dyn FnMut(&SchemeState)) -> Result<RunReport> {
    config.validate()?;
    if ops.complex.r() != config.r || ops.complex.mesh().n_cells() != 2 * config.n * config.n {
        return Err(Error::Config(format!("operators do not match order {} on an {n} x {n} mesh", config.r, n = config.n)));
    }
    let n_steps = config.steps();
    if (n_steps as f64 * config.dt - config.t_end).abs() > 1e-12 {
        log::warn!("N dt = {} differs from T = {}", n_steps as f64 * config.dt, config.t_end);
    }
    let sol = ExactSolution::new(config.example);
    if ops.params != sol.params {
        return Err(Error::Config("operator material parameters differ from the example's".into()));
    }
    let bc = config.boundary_mode();

    let t0 = Instant::now();
    let mut state = match config.scheme {
        SchemeKind::Lf4 => {
            let opts = Lf4Options { kappa: config.kappa, bootstrap: config.bootstrap };
            SchemeState::Lf4(Lf4::build(ops.clone(), config.dt, bc, opts)?)
        }
        SchemeKind::Ts4 => {
            let (l0, l1) = Ts4::start_levels(&ops, &bc, &sol, config.dt)?;
            SchemeState::Ts4(Ts4::build(ops.clone(), config.dt, bc, l0, Some(l1))?)
        }
    };
    let factorization = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let mut trace = EnergyTrace::new(config.scheme);
    let mut vtk = VtkSampler::new(config);
    let mut record = |state: &SchemeState, trace: &mut EnergyTrace, step: usize| -> Result<()> {
        trace.push(state.energy_time(), check_finite(state, step)?);
        vtk.visit(state)?;
        Ok(())
    };
    match &mut state {
        SchemeState::Lf4(s) => {
            let [p, e, h] = bc.project(&ops, &sol, 0.0)?;
            s.init(p, e, h)?;
        }
        SchemeState::Ts4(_) => {}
    }
    observer(&state);
    record(&state, &mut trace, 0)?;
    let remaining = match &mut state {
        SchemeState::Lf4(s) => {
            s.bootstrap()?;
            observer(&state);
            record(&state, &mut trace, 1)?;
            n_steps - 1
        }
        SchemeState::Ts4(_) => n_steps - 1,
    };
    for k in 0..remaining {
        state.step()?;
        observer(&state);
        record(&state, &mut trace, k + 2)?;
    }
    let stepping = t0.elapsed().as_secs_f64();

    let errors = if config.initial_data_only {
        None
    } else {
        let (e_p, e_e, e_h) = error_norms(state.error_fields(), &sol, [ops.space(0), ops.space(1), ops.space(2)])?;
        Some(ErrorReport {
            h: ops.complex.mesh().h,
            dt: config.dt,
            r: config.r,
            scheme: config.scheme.to_string(),
            e_p,
            e_e,
            e_h,
            total: e_p + e_e + e_h,
        })
    };
    Ok(RunReport { config: config.clone(), energy: trace, errors, timings: Timings { assembly: 0.0, factorization, stepping } })
}

pub fn run(config: &RunConfig) -> Result<RunReport> {
    run_observed(config, &mut |_| {})
}

/// Runs and writes `energy.csv` and `errors.csv` into the output directory.
pub fn cmd_run(config: &RunConfig) -> Result<RunReport> {
    let report = run(config)?;
    fs::create_dir_all(&config.out_dir)?;
    write_energy_csv(&config.out_dir.join("energy.csv"), &report.energy)?;
    if let Some(e) = &report.errors {
        write_errors_csv(&config.out_dir.join("errors.csv"), std::slice::from_ref(e))?;
    }
    log::info!(
        "assembly {:.3}s, factorization {:.3}s, stepping {:.3}s",
        report.timings.assembly,
        report.timings.factorization,
        report.timings.stepping
    );
    Ok(report)
}

/// One row of a convergence table; orders are absent on the first level or
/// when an error vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub level: usize,
    pub h: f64,
    pub dt: f64,
    pub e_p: f64,
    pub e_e: f64,
    pub e_h: f64,
    pub e_total: f64,
    pub order_p: Option<f64>,
    pub order_e: Option<f64>,
    pub order_h: Option<f64>,
    pub order_total: Option<f64>,
}

/// Observed orders between consecutive reports, against `dt` (temporal) or
/// `h` (spatial).
pub fn rate_rows(reports: &[ErrorReport], mode: SweepMode) -> Vec<RateRow> {
    let param = |e: &ErrorReport| match mode {
        SweepMode::Temporal => e.dt,
        SweepMode::Spatial => e.h,
    };
    let orders = |f: fn(&ErrorReport) -> f64| {
        let s: Vec<(f64, f64)> = reports.iter().map(|e| (param(e), f(e))).collect();
        let mut o = vec![None];
        o.extend(estimate_rate(&s));
        o
    };
    let (op, oe, oh, ot) = (orders(|e| e.e_p), orders(|e| e.e_e), orders(|e| e.e_h), orders(|e| e.total));
    reports
        .iter()
        .enumerate()
        .map(|(i, e)| RateRow {
            level: i,
            h: e.h,
            dt: e.dt,
            e_p: e.e_p,
            e_e: e.e_e,
            e_h: e.e_h,
            e_total: e.total,
            order_p: op[i],
            order_e: oe[i],
            order_h: oh[i],
            order_total: ot[i],
        })
        .collect()
}

/// The configurations of a sweep: `dt / 2^i` on the template mesh, or
/// `n * 2^i` with the template `dt`.
pub fn sweep_configs(template: &RunConfig, mode: SweepMode, levels: usize) -> Result<Vec<RunConfig>> {
    if levels < 3 {
        return Err(Error::Config(format!("a convergence sweep needs at least 3 levels, got {levels}")));
    }
    Ok((0..levels)
        .map(|i| {
            let mut c = template.clone();
            match mode {
                SweepMode::Temporal => c.dt = template.dt / 2f64.powi(i as i32),
                SweepMode::Spatial => c.n = template.n << i,
            }
            c
        })
        .collect())
}

pub fn convergence(template: &RunConfig, mode: SweepMode, levels: usize) -> Result<Vec<ErrorReport>> {
    sweep_configs(template, mode, levels)?
        .iter()
        .map(|c| {
            let report = run(c)?;
            report.errors.ok_or_else(|| Error::Config("convergence sweeps need an exact solution".into()))
        })
        .collect()
}

/// Runs a sweep and writes `rates.csv` and `errors.csv`.
pub fn cmd_convergence(template: &RunConfig, mode: SweepMode, levels: usize) -> Result<Vec<RateRow>> {
    let reports = convergence(template, mode, levels)?;
    let rows = rate_rows(&reports, mode);
    fs::create_dir_all(&template.out_dir)?;
    write_errors_csv(&template.out_dir.join("errors.csv"), &reports)?;
    write_rates_csv(&template.out_dir.join("rates.csv"), &rows)?;
    Ok(rows)
}

/// Runs the residual oracle and writes `mms_check.csv`.
pub fn cmd_mms_check(example: &str, out_dir: &Path) -> Result<ResidualReport> {
    let sol = crate::mms::exact(example)?;
    let report = mms_check(&sol, sol.t_max);
    fs::create_dir_all(out_dir)?;
    let mut w = csv::Writer::from_path(out_dir.join("mms_check.csv"))?;
    w.write_record(["quantity", "value"])?;
    for (i, r) in report.residuals.iter().enumerate() {
        w.write_record([format!("residual_eq{}", i + 1), r.to_string()])?;
    }
    w.write_record(["initial_condition".to_string(), report.initial_condition.to_string()])?;
    w.flush()?;
    Ok(report)
}

pub fn write_energy_csv(path: &Path, trace: &EnergyTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ENERGY_HEADER)?;
    for r in &trace.records {
        w.write_record([r.n.to_string(), r.t.to_string(), r.energy.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_errors_csv(path: &Path, reports: &[ErrorReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ERRORS_HEADER)?;
    for e in reports {
        w.write_record([
            e.h.to_string(),
            e.dt.to_string(),
            e.r.to_string(),
            e.scheme.clone(),
            e.e_p.to_string(),
            e.e_e.to_string(),
            e.e_h.to_string(),
            e.total.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_rates_csv(path: &Path, rows: &[RateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RATES_HEADER)?;
    for r in rows {
        w.write_record([
            r.level.to_string(),
            r.h.to_string(),
            r.dt.to_string(),
            r.e_p.to_string(),
            r.e_e.to_string(),
            r.e_h.to_string(),
            r.e_total.to_string(),
            opt(r.order_p),
            opt(r.order_e),
            opt(r.order_h),
            opt(r.order_total),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn check_header(rdr: &mut csv::Reader<fs::File>, want: &[&str]) -> Result<()> {
    let got = rdr.headers()?;
    if !got.iter().eq(want.iter().copied()) {
        return Err(Error::Config(format!("unexpected CSV header {:?}", got.iter().collect::<Vec<_>>())));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let s = rec.get(i).unwrap_or("");
    s.parse().map_err(|_| Error::Config(format!("unparsable CSV field '{s}'")))
}

pub fn read_energy_csv(path: &Path) -> Result<Vec<(usize, f64, f64)>> {
    let mut rdr = csv::Reader::from_path(path)?;
    check_header(&mut rdr, &ENERGY_HEADER)?;
    rdr.records().map(|r| {
        let r = r?;
        Ok((field(&r, 0)?, field(&r, 1)?, field(&r, 2)?))
    }).collect()
}

pub fn read_errors_csv(path: &Path) -> Result<Vec<ErrorReport>> {
    let mut rdr = csv::Reader::from_path(path)?;
    check_header(&mut rdr, &ERRORS_HEADER)?;
    rdr.records()
        .map(|r| {
            let r = r?;
            Ok(ErrorReport {
                h: field(&r, 0)?,
                dt: field(&r, 1)?,
                r: field(&r, 2)?,
                scheme: field(&r, 3)?,
                e_p: field(&r, 4)?,
                e_e: field(&r, 5)?,
                e_h: field(&r, 6)?,
                total: field(&r, 7)?,
            })
        })
        .collect()
}

pub fn read_rates_csv(path: &Path) -> Result<Vec<RateRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    check_header(&mut rdr, &RATES_HEADER)?;
    let opt_field = |r: &csv::StringRecord, i: usize| -> Result<Option<f64>> {
        match r.get(i) {
            Some("") | None => Ok(None),
            Some(_) => field(r, i).map(Some),
        }
    };
    rdr.records()
        .map(|r| {
            let r = r?;
            Ok(RateRow {
                level: field(&r, 0)?,
                h: field(&r, 1)?,
                dt: field(&r, 2)?,
                e_p: field(&r, 3)?,
                e_e: field(&r, 4)?,
                e_h: field(&r, 5)?,
                e_total: field(&r, 6)?,
                order_p: opt_field(&r, 7)?,
                order_e: opt_field(&r, 8)?,
                order_h: opt_field(&r, 9)?,
                order_total: opt_field(&r, 10)?,
            })
        })
        .collect()
}

/// Writes a VTK snapshot the first time the run reaches each sample time.
struct VtkSampler {
    dir: PathBuf,
    times: Vec<f64>,
    written: Vec<bool>,
    dt: f64,
}

impl VtkSampler {
    fn new(config: &RunConfig) -> Self {
        Self { dir: config.out_dir.clone(), times: config.vtk_times.clone(), written: vec![false; config.vtk_times.len()], dt: config.dt }
    }

    fn visit(&mut self, state: &SchemeState) -> Result<()> {
        let f = state.error_fields();
        for i in 0..self.times.len() {
            if !self.written[i] && f.t_e + 0.5 * self.dt > self.times[i] {
                self.written[i] = true;
                fs::create_dir_all(&self.dir)?;
                write_fields_vtk(&self.dir.join(format!("fields_{i:03}.vtk")), state.ops(), f.p, f.e, f.h)?;
            }
        }
        Ok(())
    }
}

/// Legacy ASCII VTK: `p` and cell-averaged `E` at vertices, `H` at cell
/// barycenters.
pub fn write_fields_vtk(path: &Path, ops: &OperatorSet, p: &[f64], e: &[f64], h: &[f64]) -> Result<()> {
    let mesh = ops.complex.mesh();
    let nv = mesh.n_vertices();
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut pv = vec![0.0; nv];
    let mut ev = vec![[0.0; 2]; nv];
    let mut count = vec![0usize; nv];
    let mut hc = Vec::with_capacity(mesh.n_cells());
    for (c, cell) in mesh.cells.iter().enumerate() {
        for (local, &v) in cell.iter().enumerate() {
            let xi = corners[local];
            pv[v] = ops.space(0).evaluate_in_cell(p, c, xi)[0];
            let ec = ops.space(1).evaluate_in_cell(e, c, xi);
            ev[v][0] += ec[0];
            ev[v][1] += ec[1];
            count[v] += 1;
        }
        hc.push(ops.space(2).evaluate_in_cell(h, c, [1.0 / 3.0, 1.0 / 3.0])[0]);
    }
    let mut out = String::new();
    mesh.write_vtk_geometry(&mut out);
    let _ = writeln!(out, "POINT_DATA {nv}\nSCALARS p double 1\nLOOKUP_TABLE default");
    for v in &pv {
        let _ = writeln!(out, "{v}");
    }
    let _ = writeln!(out, "VECTORS E double");
    for (v, k) in ev.iter().zip(&count) {
        let k = (*k).max(1) as f64;
        let _ = writeln!(out, "{} {} 0", v[0] / k, v[1] / k);
    }
    let _ = writeln!(out, "CELL_DATA {}\nSCALARS H double 1\nLOOKUP_TABLE default", hc.len());
    for v in &hc {
        let _ = writeln!(out, "{v}");
    }
    fs::write(path, out)?;
    Ok(())
}
