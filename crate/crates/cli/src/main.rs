use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use maxwell_feec::harness::{self, RunConfig, SweepMode};
use maxwell_feec::{Error, Result};

#[derive(Parser)]
#[command(name = "maxwell-feec", version, about = "Energy-conserving FEEC solver for the 2D (p, E, H) Maxwell system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run: writes energy.csv and errors.csv.
    Run(RunArgs),
    /// Convergence sweep: writes rates.csv and errors.csv.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        /// temporal (halve dt) or spatial (double n)
        #[arg(long, default_value = "temporal")]
        mode: String,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Residual check of a manufactured solution against the PDE.
    MmsCheck {
        #[arg(long)]
        example: String,
        #[arg(long = "out-dir", default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key=value file; flags given on the command line override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    example: Option<String>,
    /// polynomial order r (1 or 2)
    #[arg(long)]
    order: Option<String>,
    /// mesh subdivisions per side
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    /// final time
    #[arg(long = "T")]
    t_end: Option<String>,
    #[arg(long = "out-dir")]
    out_dir: Option<String>,
    /// auto or homogeneous
    #[arg(long)]
    bc: Option<String>,
    /// consistent or restricted (lf4 only)
    #[arg(long)]
    bootstrap: Option<String>,
    /// weight of the lf4 correction terms
    #[arg(long)]
    kappa: Option<String>,
    /// comma-separated times for VTK snapshots
    #[arg(long = "vtk-times")]
    vtk_times: Option<String>,
    /// treat the problem as given by initial data only
    #[arg(long = "initial-data-only")]
    initial_data_only: bool,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let mut flags = BTreeMap::new();
        let pairs = [
            ("scheme", &self.scheme),
            ("example", &self.example),
            ("order", &self.order),
            ("n", &self.n),
            ("dt", &self.dt),
            ("T", &self.t_end),
            ("out_dir", &self.out_dir),
            ("bc", &self.bc),
            ("bootstrap", &self.bootstrap),
            ("kappa", &self.kappa),
            ("vtk_times", &self.vtk_times),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                flags.insert(k.to_string(), v.clone());
            }
        }
        if self.initial_data_only {
            flags.insert("initial_data_only".into(), "true".into());
        }
        c.apply(&flags)?;
        c.validate()?;
        Ok(c)
    }
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run(args) => {
            let report = harness::cmd_run(&args.config()?)?;
            if let Some(e) = &report.errors {
                println!("e_p={} e_E={} e_H={} e_total={}", e.e_p, e.e_e, e.e_h, e.total);
            }
            println!("energy drift {:e}", report.energy.max_relative_drift());
            Ok(0)
        }
        Command::Convergence { run, mode, levels } => {
            let mode: SweepMode = mode.parse()?;
            let rows = harness::cmd_convergence(&run.config()?, mode, levels)?;
            for r in rows {
                let o = r.order_total.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
                println!("level {} h={} dt={} e_total={:e} order={}", r.level, r.h, r.dt, r.e_total, o);
            }
            Ok(0)
        }
        Command::MmsCheck { example, out_dir } => {
            let report = harness::cmd_mms_check(&example, &out_dir)?;
            for (i, r) in report.residuals.iter().enumerate() {
                println!("equation {}: max residual {:e}", i + 1, r);
            }
            println!("initial condition: {:e}", report.initial_condition);
            Ok(if report.field_equations_ok() { 0 } else { 4 })
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
fn run_cli<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            Error::exit_code(&e) as u8
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    ExitCode::from(run_cli(std::env::args_os()))
}
