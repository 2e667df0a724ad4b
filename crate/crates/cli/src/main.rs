use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use kinetics_core::harness::{compare_paths, sweep_errors, SweepSpec};
use kinetics_core::integrate::StepperKind;
use kinetics_core::presets::{describe, preset, PRESET_NAMES};
use kinetics_core::runner::{output_dir, run};
use kinetics_core::{Error, Scenario};

#[derive(Parser)]
#[command(
    name = "kinetics",
    version,
    about = "Solve the 1D jump-repulsion-coalescence kinetic equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or preset and write snapshots, a time series and a manifest.
    Run {
        /// Scenario file or preset name.
        scenario: String,
        /// Output directory (default: the scenario's, else $KINETICS_OUT/<name>, else runs/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "KINETICS_OUT", hide_env_values = true)]
        out_root: Option<PathBuf>,
    },
    /// Tabulate the final-time error over a grid of mesh sizes and time steps.
    SweepErrors {
        scenario: String,
        /// Mesh sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        h: Vec<f64>,
        /// Time steps, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        dt: Vec<f64>,
        #[arg(long)]
        ref_h: f64,
        #[arg(long)]
        ref_dt: f64,
        /// Stepper of the reference run.
        #[arg(long, default_value = "rk4")]
        ref_stepper: StepperKind,
    },
    /// Compare the direct and spectral evaluations of a periodic scenario.
    ComparePaths { scenario: String },
    /// List the built-in presets.
    ListPresets,
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            out_root,
        } => {
            let s = Scenario::load(&scenario)?;
            let dir = output_dir(&s, out.as_deref(), out_root.as_deref());
            let sim = run(&s, &dir)?;
            println!(
                "{}: {} steps, {} snapshots, {} enlargements -> {}",
                s.name,
                sim.steps,
                sim.snapshots.len(),
                sim.enlargements.len(),
                dir.display()
            );
        }
        Command::SweepErrors {
            scenario,
            h,
            dt,
            ref_h,
            ref_dt,
            ref_stepper,
        } => {
            let s = Scenario::load(&scenario)?;
            let report = sweep_errors(
                &s,
                &SweepSpec {
                    hs: h,
                    dts: dt,
                    ref_h,
                    ref_dt,
                    ref_stepper,
                },
            )?;
            print!("{}", report.to_table());
        }
        Command::ComparePaths { scenario } => {
            let s = Scenario::load(&scenario)?;
            let c = compare_paths(&s)?;
            println!("rhs_max_diff\t{:.6e}", c.rhs_max_diff);
            for (t, d) in &c.trajectory {
                println!("t = {t}\t{d:.6e}");
            }
            println!("direct_seconds_per_eval\t{:.6e}", c.direct_seconds);
            println!("spectral_seconds_per_eval\t{:.6e}", c.spectral_seconds);
            println!("spectral_over_direct\t{:.4}", c.time_ratio());
        }
        Command::ListPresets => {
            for name in PRESET_NAMES {
                if let Some(s) = preset(name) {
                    println!("{name:<12} {}", describe(&s));
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
