use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use coin_routing::harness::{
    braess_report, run_scenario, steering_sweep, Scenario, TableFormat, BRAESS_TOLERANCE,
};
use coin_routing::lb::verdict;
use coin_routing::runner::Algorithm;
use coin_routing::{LoadToCost, Result};

#[derive(Parser)]
#[command(name = "coin-route", version, about = "Wave-based routing experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Ispa,
    Fk,
    Mb,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one algorithm over every load row and both variants.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        /// Probability of delegating an MB decision to FK.
        #[arg(long, default_value_t = 0.5)]
        steering: f64,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Measured waves per run.
        #[arg(long)]
        waves: Option<usize>,
        /// Table destination; `.md` writes markdown, anything else CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ISPA and MB(0.5) on both variants, flagged PARADOX/BENEFIT/NEUTRAL.
    Braess {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long, default_value_t = BRAESS_TOLERANCE)]
        tolerance: f64,
    },
    /// MB at each steering value, with FK for reference.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated steering values in [0, 1].
        #[arg(long, value_delimiter = ',', required = true)]
        steering: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
    },
    /// Load-balancing bounds for a two-link threshold router.
    LbBounds {
        /// Cost of link A, e.g. `power:1,2`.
        #[arg(long)]
        ca: String,
        /// Cost of link B, e.g. `affine:0,1`.
        #[arg(long)]
        cb: String,
        #[arg(long = "W")]
        window: usize,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run {
            scenario,
            algo,
            steering,
            seeds,
            waves,
            out,
        } => {
            let algorithm = match algo {
                Algo::Ispa => Algorithm::Ispa,
                Algo::Fk => Algorithm::FullKnowledge,
                Algo::Mb => Algorithm::MemoryBased { steering },
            };
            algorithm.validate()?;
            let mut s = Scenario::load(scenario)?
                .with_algorithms(vec![algorithm])
                .with_seeds(seeds);
            if let Some(w) = waves {
                s.measured_waves = w;
            }
            let table = run_scenario(&s)?;
            print!("{}", table.to_markdown());
            if let Some(path) = out {
                let format = match path.extension().and_then(|e| e.to_str()) {
                    Some("md") => TableFormat::Markdown,
                    _ => TableFormat::Csv,
                };
                table.write(&path, format)?;
            }
        }
        Cmd::Braess {
            scenario,
            seeds,
            tolerance,
        } => {
            let s = Scenario::load(scenario)?.with_seeds(seeds);
            let table = run_scenario(&s)?;
            print!("{}", table.to_markdown());
            println!();
            println!("load,algorithm,cost_a,cost_b,flag");
            for e in braess_report(&table, tolerance)? {
                println!(
                    "{},{},{:.4},{:.4},{}",
                    coin_routing::harness::format_load(&e.load),
                    e.algorithm,
                    e.cost_a,
                    e.cost_b,
                    e.flag
                );
            }
        }
        Cmd::Sweep {
            scenario,
            steering,
            seeds,
        } => {
            let s = Scenario::load(scenario)?.with_seeds(seeds);
            print!("{}", steering_sweep(&s, &steering)?.to_csv());
        }
        Cmd::LbBounds { ca, cb, window } => {
            let ca: LoadToCost = ca.parse()?;
            let cb: LoadToCost = cb.parse()?;
            let report = verdict(&ca, &cb, window)?;
            println!("{report}");
        }
    }
    Ok(())
}
