//! Bring your own grid. Maps are plain text: `#` wall, `.` open floor, `G`
//! the single goal. Every open cell must be reachable from the goal, rows
//! must share one width, and there is exactly one `G`. This one is a spiral
//! corridor, which gives the options nothing to do but march; the point is
//! the format, not the learning problem.
//!
//! Run with `cargo run --release --example custom_map`.

use ioc::env::{FourRooms, GridSpec};
use ioc::learner::{train, AgentKind, LearnerConfig};

const SPIRAL: &str = "\
#########
#.......#
#.#####.#
#.#...#.#
#.#G#.#.#
#.###.#.#
#.....#.#
#######.#
#.......#
#########";

fn main() -> ioc::Result<()> {
    let spec = GridSpec::from_map_str(SPIRAL, 1.0 / 3.0, 50.0, 0.0)?;
    println!(
        "parsed {}x{} map: {} open cells, goal at {:?}",
        spec.height,
        spec.width,
        spec.open_cells().len(),
        spec.goal
    );

    let mut env = FourRooms::new(spec);
    let cfg = LearnerConfig {
        agent: AgentKind::Ioc,
        n_options: 2,
        episodes: 200,
        termination_init: 0.5,
        seed: 3,
        ..LearnerConfig::default()
    };
    let result = train(&mut env, &cfg)?;
    let eps = &result.metrics.episodes;
    let early: f64 = eps[..20].iter().map(|e| e.steps as f64).sum::<f64>() / 20.0;
    let late: f64 = eps[eps.len() - 20..].iter().map(|e| e.steps as f64).sum::<f64>() / 20.0;
    println!("mean steps, first 20 episodes: {early:.0}; last 20: {late:.0}");

    // Malformed maps are rejected with a line-level message, not a panic.
    for bad in ["..G\n..", "...\n...", "G.G"] {
        let err = GridSpec::from_map_str(bad, 0.0, 1.0, 0.0).unwrap_err();
        println!("rejected {:?}: {err}", bad.replace('\n', "/"));
    }
    Ok(())
}
