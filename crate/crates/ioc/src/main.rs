//! Command-line front end: `train`, `gradcheck`, `heatmap`, `branching`.
//! Exit codes: 0 success, 1 bad input or failed check, 2 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ioc::checkpoint::Checkpoint;
use ioc::env::{Environment, FourRooms, TMaze};
use ioc::gradcheck::{check_all, report_csv, DEFAULT_FD_STEP, DEFAULT_FD_TOLERANCE};
use ioc::harness::{
    branching_sweep, heat_values, heatmap_csv, run_experiment, write_branching, ExperimentConfig,
    HeatQuantity,
};

#[derive(Parser)]
#[command(name = "ioc", about = "Option-critic learners with learnable interest functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Environment: fourrooms or tmaze.
    #[arg(long)]
    env: Option<String>,
    /// Agent: ioc or oc.
    #[arg(long)]
    agent: Option<String>,
    /// Independent seeded runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Episodes per run.
    #[arg(long)]
    episodes: Option<usize>,
    /// Remove the most-visited goal just before this episode.
    #[arg(long)]
    transfer_at: Option<usize>,
    /// Interest threshold below which options are unavailable.
    #[arg(long)]
    threshold_k: Option<f64>,
    /// Output root; artifacts land in <out>/<config-hash>/.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> ioc::Result<ExperimentConfig> {
        let mut overrides: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                overrides.push((k.to_string(), v));
            }
        };
        push("env.kind", self.env.clone());
        push("agent", self.agent.clone());
        push("runs", self.runs.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("episodes", self.episodes.map(|v| v.to_string()));
        push("transfer_at", self.transfer_at.map(|v| v.to_string()));
        push("threshold_k", self.threshold_k.map(|v| v.to_string()));
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        ExperimentConfig::resolve(self.config.as_deref(), &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent over multiple seeds and write tables, figures, and a
    /// checkpoint.
    Train(ConfigArgs),
    /// Check every analytic gradient against central finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fuzzed instances per gradient family.
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        /// Worst tolerated relative error.
        #[arg(long, default_value_t = DEFAULT_FD_TOLERANCE)]
        tolerance: f64,
        /// Write the per-family report as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render one option's interest or termination over the state space.
    Heatmap {
        /// Checkpoint file written by `train`.
        #[arg(long)]
        snapshot: PathBuf,
        /// Option index.
        #[arg(long)]
        option: usize,
        /// interest or termination.
        #[arg(long, default_value = "interest")]
        quantity: String,
        /// Output CSV path (defaults next to the snapshot).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the interest threshold k and report availability and returns.
    Branching {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated thresholds, e.g. 0,0.25,0.5.
        #[arg(long, value_delimiter = ',')]
        k: Vec<f64>,
    },
}

fn run(cli: Cli) -> ioc::Result<bool> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.resolve()?;
            eprintln!(
                "training {} on {} ({} runs x {} episodes, seed {})",
                cfg.learner.agent.as_str(),
                cfg.env.kind.as_str(),
                cfg.runs,
                cfg.learner.episodes,
                cfg.base_seed
            );
            let res = run_experiment(&cfg)?;
            let last = res.aggregate.last().expect("at least one episode");
            eprintln!(
                "final episode: mean steps {:.1}, mean return {:.2}",
                last.mean_steps, last.mean_return
            );
            println!("{}", res.out_dir.display());
            Ok(true)
        }
        Command::Gradcheck { seed, instances, tolerance, out } => {
            let reports = check_all(seed, instances, tolerance, DEFAULT_FD_STEP);
            for r in &reports {
                println!("{}", r.one_line());
            }
            if let Some(path) = out {
                std::fs::write(&path, report_csv(&reports))?;
                eprintln!("wrote {}", path.display());
            }
            Ok(reports.iter().all(|r| r.pass))
        }
        Command::Heatmap { snapshot, option, quantity, out } => {
            let quantity = HeatQuantity::parse(&quantity)?;
            let ck = Checkpoint::load(&snapshot)?;
            if option >= ck.params.options.len() {
                return Err(ioc::Error::Config(format!(
                    "option {option} out of range; checkpoint has {}",
                    ck.params.options.len()
                )));
            }
            let env: Box<dyn Environment> = match (ck.env.grid_spec(), ck.env.maze_spec()) {
                (Some(spec), _) => Box::new(FourRooms::new(spec)),
                (_, Some(spec)) => Box::new(TMaze::new(spec, 10, 10)),
                _ => unreachable!("descriptor covers both environment kinds"),
            };
            let points = env.sample_states();
            let values = heat_values(&ck.params, &ck.map, &points, option, quantity);
            let csv = heatmap_csv(&points, &values);
            let path = out.unwrap_or_else(|| snapshot.with_extension(format!("opt{option}.csv")));
            std::fs::write(&path, csv)?;
            println!("{}", path.display());
            Ok(true)
        }
        Command::Branching { config, k } => {
            let cfg = config.resolve()?;
            let points = branching_sweep(&cfg, &k)?;
            for p in &points {
                println!(
                    "k={}: available options {:.2}, final steps {:.1}, final return {:.2}",
                    p.k, p.mean_available_options, p.mean_final_steps, p.mean_final_return
                );
            }
            let out_dir = cfg.out_dir();
            write_branching(&out_dir, &points)?;
            eprintln!("wrote {}", out_dir.join("branching.csv").display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
