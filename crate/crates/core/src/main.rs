use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use seepage::cli::{parse_config, run, scenario_mesh, Scenario, ScenarioKind};
use seepage::mesh::write_mesh;
use seepage::verify::Suite;

#[derive(Parser)]
#[command(name = "seepage", version, about = "Stokes flow over a porous layer, with an elastic wall in contact")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the convergence checks and print their tables.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Directory for the table CSV files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write the default mesh of a scenario as a SEEPMESH file.
    Mesh {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> seepage::Result<bool> {
    match cli.command {
        Command::Run { config, out } => {
            let scenario = parse_config(&config)?;
            let summary = run(&scenario, &out)?;
            for f in &summary.failures {
                eprintln!("FAILED {f}");
            }
            if let Some(csv) = &summary.csv {
                println!("{} steps, series in {}", summary.steps, csv.display());
            }
            Ok(summary.success())
        }
        Command::Verify { suite, out } => {
            let suite: Suite = suite.parse()?;
            let scenario = Scenario { suite, ..Scenario::defaults(ScenarioKind::Verify) };
            let summary = run(&scenario, &out)?;
            for f in &summary.failures {
                eprintln!("FAILED {f}");
            }
            Ok(summary.success())
        }
        Command::Mesh { scenario, out } => {
            let kind = ScenarioKind::parse(&scenario)
                .ok_or_else(|| seepage::Error::InvalidArgument(format!("unknown scenario '{scenario}'")))?;
            let mesh = scenario_mesh(kind)?;
            write_mesh(&mesh, &out)?;
            println!("{} vertices, {} triangles -> {}", mesh.n_vertices(), mesh.n_triangles(), out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
