//! Sweep the interest threshold k. With k = 0 every option is available
//! everywhere (soft reweighting only); as k rises, options whose interest
//! falls below it drop out of the initiation set and the branching factor
//! shrinks. The sweep reports end-of-training performance against the mean
//! number of available options so the trade-off is visible.
//!
//! Run with `cargo run --release --example branching_threshold`. Writes
//! `branching.csv` and `branching.svg` under the config's output directory.

use ioc::harness::{branching_sweep, write_branching, ExperimentConfig};
use ioc::learner::AgentKind;

fn main() -> ioc::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.runs = 10;
    cfg.base_seed = 42;
    cfg.learner.agent = AgentKind::Ioc;
    cfg.learner.termination_init = 0.5;
    cfg.learner.episodes = 250;

    let ks = [0.0, 0.25, 0.5, 0.75];
    eprintln!("sweeping threshold k over {ks:?} ({} runs each)...", cfg.runs);
    let points = branching_sweep(&cfg, &ks)?;
    println!("k      final steps   final return   options available");
    for p in &points {
        println!(
            "{:<6} {:<13.1} {:<14.2} {:.2}",
            p.k, p.mean_final_steps, p.mean_final_return, p.mean_available_options
        );
    }
    let out = cfg.out_dir();
    write_branching(&out, &points)?;
    eprintln!("sweep artifacts under {}", out.display());
    Ok(())
}
