//! Train one four-rooms run, round-trip the learned parameters through a
//! checkpoint file, and render each option's interest map from the reloaded
//! copy. The goal hallway sits at row 7, column 9; by the end of training
//! the four maps should carve the rooms up between them.
//!
//! Run with `cargo run --release --example interest_heatmap`. Writes
//! `heatmap_out/checkpoint.txt` and one SVG per option next to it.

use ioc::checkpoint::{Checkpoint, EnvDescriptor};
use ioc::env::{Environment, FourRooms, SamplePoint};
use ioc::harness::{heat_values, plot, HeatQuantity};
use ioc::learner::{train, AgentKind, LearnerConfig};
use std::path::Path;

fn main() -> ioc::Result<()> {
    let mut env = FourRooms::standard();
    let cfg = LearnerConfig {
        agent: AgentKind::Ioc,
        termination_init: 0.5,
        seed: 19,
        ..LearnerConfig::default()
    };
    eprintln!("training one ioc run ({} episodes)...", cfg.episodes);
    let result = train(&mut env, &cfg)?;

    let out = Path::new("heatmap_out");
    std::fs::create_dir_all(out)?;
    let ckpt = Checkpoint {
        env: EnvDescriptor::for_grid(&env.spec),
        map: env.feature_map().clone(),
        params: result.params,
        critic: result.critic,
        seed: cfg.seed,
        episode: cfg.episodes,
    };
    let path = out.join("checkpoint.txt");
    ckpt.save(&path)?;
    let reloaded = Checkpoint::load(&path)?;
    eprintln!("checkpoint round-tripped through {}", path.display());

    let points = env.sample_states();
    for w in 0..reloaded.params.options.len() {
        let values =
            heat_values(&reloaded.params, &reloaded.map, &points, w, HeatQuantity::Interest);
        let cells: Vec<(usize, usize, f64)> = points
            .iter()
            .zip(&values)
            .map(|((p, _), v)| {
                let SamplePoint::Cell { row, col } = p else { unreachable!() };
                (*row, *col, *v)
            })
            .collect();
        let svg = plot::grid_heatmap(&format!("interest, option {w}"), 13, 13, &cells, 0.0, 1.0);
        let file = out.join(format!("interest_opt{w}.svg"));
        std::fs::write(&file, svg)?;
        let (lo, hi) = values.iter().fold((1.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        println!("option {w}: interest spans {lo:.3}..{hi:.3} -> {}", file.display());
    }
    Ok(())
}
