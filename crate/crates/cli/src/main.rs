use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edgesync_cli::output::{output_dir, write_graph_check, write_run, write_sweep};
use edgesync_cli::{check_graph, load_scenario, run_scenario, sweep, CliResult, Overrides, Scenario};

/// Exit codes: 0 success, 2 usage, 3 invalid scenario, 4 disconnected graph,
/// 5 numerical failure, 6 diverged simulation, 7 I/O error.
#[derive(Parser)]
#[command(name = "edgesync", version, about = "Run synchronization scenarios over weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write trajectory.csv, report.txt and graph_check.txt.
    Run(Common),
    /// Only build the graph matrices and write graph_check.txt.
    Check(Common),
    /// Run once per multiple of the critical gain and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated multipliers of the critical gain.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        multipliers: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    scenario: PathBuf,
    /// Seed for the initial perturbation.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: scenario `[output] dir`, then $EDGESYNC_OUT_DIR).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Integration step.
    #[arg(long)]
    h: Option<f64>,
    /// Integration horizon.
    #[arg(long)]
    t_end: Option<f64>,
}

impl Common {
    fn load(&self) -> CliResult<Scenario> {
        let mut scenario = load_scenario(&self.scenario)?;
        Overrides {
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            h: self.h,
            t_end: self.t_end,
        }
        .apply(&mut scenario)?;
        Ok(scenario)
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(common) => {
            let scenario = common.load()?;
            let outcome = run_scenario(&scenario)?;
            let dir = output_dir(&scenario);
            write_run(&dir, &scenario, &outcome)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            let a = &outcome.analysis;
            println!(
                "{}: beta {:.6e} (beta* {:.6e}), sync error {:.3e} -> {:.3e}, output in {}",
                scenario.name,
                outcome.beta,
                outcome.beta_star,
                a.initial_sync_error,
                a.final_sync_error,
                dir.display()
            );
        }
        Command::Check(common) => {
            let scenario = common.load()?;
            let check = check_graph(&scenario)?;
            let path = write_graph_check(&output_dir(&scenario), &scenario, &check)?;
            println!(
                "{}: {} components, identity residual {:.3e}, pd margin {:.6e}, wrote {}",
                scenario.name,
                check.components,
                check.identity_residual,
                check.upsilon.pd_margin,
                path.display()
            );
        }
        Command::Sweep { common, multipliers } => {
            let scenario = common.load()?;
            let rows = sweep(&scenario, &multipliers)?;
            let path = write_sweep(&output_dir(&scenario), &rows)?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            println!("{}: {} runs, {failed} failed, wrote {}", scenario.name, rows.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
