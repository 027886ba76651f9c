//! Two-goal point-maze transfer: train with both goals live, then after 150
//! episodes remove whichever goal the agent has been visiting most and watch
//! how quickly it re-routes to the survivor.
//!
//! Run with `cargo run --release --example tmaze_transfer`. Learning curves
//! and interest maps land under `out/<config-hash>/`.

use ioc::harness::{run_experiment, window_mean, EnvKind, ExperimentConfig};

fn main() -> ioc::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.env.kind = EnvKind::TMaze;
    cfg.learner = ioc::learner::LearnerConfig::tmaze_preset();
    cfg.learner.transfer_at = Some(150);
    cfg.runs = 5;
    cfg.base_seed = 7;

    eprintln!("training ioc on the t-maze, goal switch at episode 150...");
    let result = run_experiment(&cfg)?;
    println!("artifacts: {}", result.out_dir.display());

    for run in &result.runs {
        let eps = &run.metrics.episodes;
        let switch = run.metrics.transfer.as_ref().expect("transfer was scheduled");
        let removed = switch.removed.expect("maze transfer removes a goal");
        let pre = window_mean(eps, 100, 150, |e| if e.reached_goal { 1.0 } else { 0.0 });
        let post = window_mean(eps, 150, 250, |e| if e.reached_goal { 1.0 } else { 0.0 });
        // First success against the surviving goal after the switch.
        let first = eps[150..]
            .iter()
            .find(|e| e.reached_goal)
            .map(|e| e.episode)
            .map_or("never".to_string(), |e| format!("episode {e}"));
        println!(
            "seed {}: removed goal {removed}, success rate {:.0}% -> {:.0}%, first post-switch success {first}",
            run.metrics.seed,
            100.0 * pre,
            100.0 * post,
        );
    }
    Ok(())
}
