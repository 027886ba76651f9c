//! Experiment orchestration: multi-seed training, aggregation, and artifact
//! emission (CSV tables, SVG figures, checkpoints, heatmaps).
//!
//! Every run of the same configuration writes byte-identical artifacts into
//! a directory named by the config hash, so results are reproducible and
//! diffable by construction.

pub mod config;
pub mod plot;

pub use config::{EnvKind, EnvSettings, ExperimentConfig};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::checkpoint::{Checkpoint, EnvDescriptor};
use crate::env::{EnvState, GridSpec, SamplePoint};
use crate::error::{Error, Result};
use crate::funcapprox::FeatureMap;
use crate::learner::{train, AgentParams, EpisodeMetrics, LearnerConfig, TrainResult};
use crate::options::{available_options, interest_policy};
use plot::{Series, PALETTE};

/// Cross-run statistics for one episode index.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStat {
    pub episode: usize,
    pub mean_steps: f64,
    pub stderr_steps: f64,
    pub mean_return: f64,
    pub stderr_return: f64,
}

/// Which scalar head a heatmap probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatQuantity {
    Interest,
    Termination,
}

impl HeatQuantity {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "interest" => Ok(HeatQuantity::Interest),
            "termination" => Ok(HeatQuantity::Termination),
            other => Err(Error::Config(format!(
                "unknown quantity '{other}' (want interest|termination)"
            ))),
        }
    }
}

/// Train `cfg.runs` independent runs, seeds `base_seed..base_seed + runs`.
/// Runs execute in parallel; results come back in seed order.
pub fn train_runs(cfg: &ExperimentConfig) -> Result<Vec<TrainResult>> {
    (0..cfg.runs)
        .into_par_iter()
        .map(|i| {
            let mut env = cfg.env.build()?;
            let lcfg = LearnerConfig { seed: cfg.base_seed + i as u64, ..cfg.learner.clone() };
            train(env.as_mut(), &lcfg)
        })
        .collect()
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-episode mean and standard error of steps and return across runs.
pub fn aggregate(runs: &[TrainResult]) -> Vec<EpisodeStat> {
    let episodes = runs.iter().map(|r| r.metrics.episodes.len()).min().unwrap_or(0);
    (0..episodes)
        .map(|ep| {
            let steps: Vec<f64> =
                runs.iter().map(|r| r.metrics.episodes[ep].steps as f64).collect();
            let rets: Vec<f64> = runs.iter().map(|r| r.metrics.episodes[ep].ret).collect();
            let (mean_steps, stderr_steps) = mean_and_stderr(&steps);
            let (mean_return, stderr_return) = mean_and_stderr(&rets);
            EpisodeStat { episode: ep, mean_steps, stderr_steps, mean_return, stderr_return }
        })
        .collect()
}

/// Mean of `f` over an inclusive-exclusive episode window of one run.
pub fn window_mean(
    episodes: &[EpisodeMetrics],
    start: usize,
    end: usize,
    f: impl Fn(&EpisodeMetrics) -> f64,
) -> f64 {
    let slice = &episodes[start..end];
    slice.iter().map(&f).sum::<f64>() / slice.len() as f64
}

fn run_csv(r: &TrainResult) -> String {
    let n_options = r.params.options.len();
    let mut s = String::from("episode,steps,return,discounted_return,reached_goal,option_switches");
    for w in 0..n_options {
        let _ = write!(s, ",steps_opt{w}");
    }
    s.push('\n');
    for e in &r.metrics.episodes {
        let _ = write!(
            s,
            "{},{},{},{},{},{}",
            e.episode, e.steps, e.ret, e.discounted_return, e.reached_goal, e.option_switches
        );
        for c in &e.option_steps {
            let _ = write!(s, ",{c}");
        }
        s.push('\n');
    }
    s
}

fn aggregate_csv(stats: &[EpisodeStat]) -> String {
    let mut s = String::from("episode,mean_steps,stderr_steps,mean_return,stderr_return\n");
    for st in stats {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            st.episode, st.mean_steps, st.stderr_steps, st.mean_return, st.stderr_return
        );
    }
    s
}

/// Evaluate one option's interest or termination head over probe states.
pub fn heat_values(
    params: &AgentParams,
    map: &FeatureMap,
    points: &[(SamplePoint, EnvState)],
    option: usize,
    quantity: HeatQuantity,
) -> Vec<f64> {
    points
        .iter()
        .map(|(_, s)| {
            let phi = map.features(s);
            match quantity {
                HeatQuantity::Interest => params.options[option].interest.value(&phi),
                HeatQuantity::Termination => params.options[option].termination_prob(&phi),
            }
        })
        .collect()
}

/// CSV heatmap: `row,col,value` for cell probes, `x,y,value` for points.
pub fn heatmap_csv(points: &[(SamplePoint, EnvState)], values: &[f64]) -> String {
    assert_eq!(points.len(), values.len());
    let header = match points.first() {
        Some((SamplePoint::Cell { .. }, _)) | None => "row,col,value",
        Some((SamplePoint::Point { .. }, _)) => "x,y,value",
    };
    let mut s = String::from(header);
    s.push('\n');
    for ((p, _), v) in points.iter().zip(values) {
        match p {
            SamplePoint::Cell { row, col } => {
                let _ = writeln!(s, "{row},{col},{v}");
            }
            SamplePoint::Point { x, y } => {
                let _ = writeln!(s, "{x},{y},{v}");
            }
        }
    }
    s
}

fn learning_curve_svgs(stats: &[EpisodeStat], label: &str) -> (String, String) {
    let steps_points: Vec<(f64, f64)> =
        stats.iter().map(|s| (s.episode as f64, s.mean_steps)).collect();
    let steps_band: Vec<f64> = stats.iter().map(|s| s.stderr_steps).collect();
    let mut steps_series = Series::new(label, steps_points, PALETTE[0]);
    steps_series.band = Some(steps_band);
    let steps_svg = line_chart_with_smoothing("steps to goal", "episode", "steps", steps_series);

    let ret_points: Vec<(f64, f64)> =
        stats.iter().map(|s| (s.episode as f64, s.mean_return)).collect();
    let ret_band: Vec<f64> = stats.iter().map(|s| s.stderr_return).collect();
    let mut ret_series = Series::new(label, ret_points, PALETTE[1]);
    ret_series.band = Some(ret_band);
    let ret_svg = line_chart_with_smoothing("episode return", "episode", "return", ret_series);
    (steps_svg, ret_svg)
}

/// Overlay a 10-episode moving average on a raw mean curve.
fn line_chart_with_smoothing(title: &str, x: &str, y: &str, raw: Series) -> String {
    let smooth_pts = moving_average(&raw.points, 10);
    let mut series = vec![raw];
    if smooth_pts.len() > 1 {
        series.push(Series::new("10-ep mean", smooth_pts, PALETTE[2]));
    }
    plot::line_chart(title, x, y, &series)
}

pub fn moving_average(points: &[(f64, f64)], window: usize) -> Vec<(f64, f64)> {
    if points.len() < window || window == 0 {
        return Vec::new();
    }
    (0..=points.len() - window)
        .map(|i| {
            let slice = &points[i..i + window];
            let x = slice[slice.len() / 2].0;
            let y = slice.iter().map(|p| p.1).sum::<f64>() / window as f64;
            (x, y)
        })
        .collect()
}

/// Everything `run_experiment` produced, plus where it landed on disk.
#[derive(Debug)]
pub struct ExperimentResult {
    pub out_dir: PathBuf,
    pub runs: Vec<TrainResult>,
    pub aggregate: Vec<EpisodeStat>,
}

impl EnvSettings {
    /// Checkpoint descriptor for this environment.
    pub fn descriptor(&self) -> Result<EnvDescriptor> {
        match self.kind {
            EnvKind::FourRooms => {
                let spec = match &self.map_path {
                    Some(p) => {
                        let text = std::fs::read_to_string(p)?;
                        GridSpec::from_map_str(&text, self.slip_prob, self.goal_reward, self.step_reward)?
                    }
                    None => GridSpec::four_rooms(),
                };
                Ok(EnvDescriptor::for_grid(&spec))
            }
            EnvKind::TMaze => Ok(EnvDescriptor::TMaze),
        }
    }
}

/// Run the experiment and write all artifacts under `cfg.out_dir()`:
/// the canonical config, per-run and aggregate CSVs, learning-curve SVGs,
/// a checkpoint of the first run, and interest/termination heatmaps.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let mut cfg = cfg.clone();
    if cfg.learner.snapshot_every.is_none() {
        cfg.learner.snapshot_every = cfg.dump_interest_every;
    }
    let runs = train_runs(&cfg)?;
    let stats = aggregate(&runs);
    let out_dir = cfg.out_dir();
    std::fs::create_dir_all(&out_dir)?;

    std::fs::write(out_dir.join("config.txt"), cfg.canonical())?;
    for r in &runs {
        std::fs::write(out_dir.join(format!("run_{}.csv", r.metrics.seed)), run_csv(r))?;
    }
    std::fs::write(out_dir.join("aggregate.csv"), aggregate_csv(&stats))?;
    let label = format!("{} ({} runs)", cfg.learner.agent.as_str(), cfg.runs);
    let (steps_svg, ret_svg) = learning_curve_svgs(&stats, &label);
    std::fs::write(out_dir.join("steps.svg"), steps_svg)?;
    std::fs::write(out_dir.join("returns.svg"), ret_svg)?;

    // Checkpoint and heatmaps for the first run.
    let env = cfg.env.build()?;
    let map = env.feature_map().clone();
    let first = &runs[0];
    let ck = Checkpoint {
        env: cfg.env.descriptor()?,
        map: map.clone(),
        params: first.params.clone(),
        critic: first.critic.clone(),
        seed: first.metrics.seed,
        episode: cfg.learner.episodes,
    };
    ck.save(&out_dir.join("checkpoint.txt"))?;

    let points = env.sample_states();
    for w in 0..cfg.learner.n_options {
        for (q, name) in [(HeatQuantity::Interest, "interest"), (HeatQuantity::Termination, "termination")] {
            let values = heat_values(&first.params, &map, &points, w, q);
            std::fs::write(
                out_dir.join(format!("{name}_opt{w}.csv")),
                heatmap_csv(&points, &values),
            )?;
            if let Some(svg) = grid_heat_svg(&cfg, &points, &values, &format!("{name}, option {w}")) {
                std::fs::write(out_dir.join(format!("{name}_opt{w}.svg")), svg)?;
            }
        }
        if let Some(every) = cfg.dump_interest_every {
            if every > 0 {
                for snap in &first.snapshots {
                    let values = heat_values(&snap.params, &map, &points, w, HeatQuantity::Interest);
                    std::fs::write(
                        out_dir.join(format!("interest_opt{w}_ep{}.csv", snap.after_episode + 1)),
                        heatmap_csv(&points, &values),
                    )?;
                }
            }
        }
    }

    Ok(ExperimentResult { out_dir, runs, aggregate: stats })
}

fn grid_heat_svg(
    cfg: &ExperimentConfig,
    points: &[(SamplePoint, EnvState)],
    values: &[f64],
    title: &str,
) -> Option<String> {
    if cfg.env.kind != EnvKind::FourRooms {
        return None;
    }
    let cells: Vec<(usize, usize, f64)> = points
        .iter()
        .zip(values)
        .map(|((p, _), v)| {
            let SamplePoint::Cell { row, col } = p else { unreachable!("grid probes are cells") };
            (*row, *col, *v)
        })
        .collect();
    let height = cells.iter().map(|c| c.0).max()? + 2;
    let width = cells.iter().map(|c| c.1).max()? + 2;
    Some(plot::grid_heatmap(title, height, width, &cells, 0.0, 1.0))
}

/// One point of a threshold sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchingPoint {
    pub k: f64,
    /// Mean steps and return over the final quarter of episodes, across runs.
    pub mean_final_steps: f64,
    pub mean_final_return: f64,
    /// Mean size of the available-option set over probe states at the end.
    pub mean_available_options: f64,
}

/// Sweep the interest threshold `k` and measure how shrinking initiation
/// sets moves performance and option availability. Artifacts land in the
/// base config's output directory.
pub fn branching_sweep(base: &ExperimentConfig, ks: &[f64]) -> Result<Vec<BranchingPoint>> {
    if ks.is_empty() {
        return Err(Error::Config("threshold sweep needs at least one k".into()));
    }
    let mut points = Vec::with_capacity(ks.len());
    for &k in ks {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::Config(format!("threshold k {k} outside [0,1]")));
        }
        let mut cfg = base.clone();
        cfg.learner.threshold_k = k;
        let runs = train_runs(&cfg)?;
        let episodes = cfg.learner.episodes;
        let window = (episodes / 4).max(1);
        let start = episodes - window;
        let mut steps = Vec::new();
        let mut rets = Vec::new();
        for r in &runs {
            steps.push(window_mean(&r.metrics.episodes, start, episodes, |e| e.steps as f64));
            rets.push(window_mean(&r.metrics.episodes, start, episodes, |e| e.ret));
        }
        let env = cfg.env.build()?;
        let map = env.feature_map().clone();
        let probe = env.sample_states();
        let mut avail = Vec::new();
        for r in &runs {
            let mut total = 0.0;
            for (_, s) in &probe {
                let phi = map.features(s);
                let eval = interest_policy(&r.params.options, &r.params.pi_omega, &phi)?;
                total += available_options(&eval, k).len() as f64;
            }
            avail.push(total / probe.len() as f64);
        }
        points.push(BranchingPoint {
            k,
            mean_final_steps: mean_and_stderr(&steps).0,
            mean_final_return: mean_and_stderr(&rets).0,
            mean_available_options: mean_and_stderr(&avail).0,
        });
    }
    Ok(points)
}

pub fn branching_csv(points: &[BranchingPoint]) -> String {
    let mut s = String::from("k,mean_final_steps,mean_final_return,mean_available_options\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            p.k, p.mean_final_steps, p.mean_final_return, p.mean_available_options
        );
    }
    s
}

/// Write the sweep table and a small figure next to it.
pub fn write_branching(out_dir: &Path, points: &[BranchingPoint]) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("branching.csv"), branching_csv(points))?;
    let avail: Vec<(f64, f64)> = points.iter().map(|p| (p.k, p.mean_available_options)).collect();
    let rets: Vec<(f64, f64)> = points.iter().map(|p| (p.k, p.mean_final_return)).collect();
    let svg = plot::line_chart(
        "threshold sweep",
        "k",
        "value",
        &[
            Series::new("available options", avail, PALETTE[0]),
            Series::new("final return", rets, PALETTE[1]),
        ],
    );
    std::fs::write(out_dir.join("branching.svg"), svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(tag: &str) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::resolve(None, &[]).unwrap();
        cfg.runs = 3;
        cfg.learner.episodes = 12;
        cfg.learner.max_steps = 250;
        cfg.learner.n_options = 2;
        cfg.out_root = std::env::temp_dir().join(format!("ioc-harness-{tag}"));
        cfg
    }

    #[test]
    fn aggregate_mean_and_stderr() {
        let (m, se) = mean_and_stderr(&[2.0, 4.0, 6.0]);
        assert_eq!(m, 4.0);
        // Sample stddev 2, over sqrt(3).
        assert!((se - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        let (m1, se1) = mean_and_stderr(&[5.0]);
        assert_eq!((m1, se1), (5.0, 0.0));
    }

    #[test]
    fn moving_average_shrinks_and_centers() {
        let pts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, i as f64)).collect();
        let ma = moving_average(&pts, 10);
        assert_eq!(ma.len(), 11);
        assert!((ma[0].1 - 4.5).abs() < 1e-12);
        assert!(moving_average(&pts[..5], 10).is_empty());
    }

    #[test]
    fn experiment_writes_expected_artifacts() {
        let cfg = small_cfg("artifacts");
        let res = run_experiment(&cfg).unwrap();
        for name in [
            "config.txt",
            "aggregate.csv",
            "steps.svg",
            "returns.svg",
            "checkpoint.txt",
            "interest_opt0.csv",
            "interest_opt1.csv",
            "termination_opt0.csv",
            "interest_opt0.svg",
        ] {
            assert!(res.out_dir.join(name).exists(), "missing {name}");
        }
        for i in 0..3 {
            assert!(res.out_dir.join(format!("run_{i}.csv")).exists());
        }
        assert_eq!(res.runs.len(), 3);
        assert_eq!(res.aggregate.len(), 12);
        // Heatmap CSV carries the grid schema.
        let text = std::fs::read_to_string(res.out_dir.join("interest_opt0.csv")).unwrap();
        assert!(text.starts_with("row,col,value\n"));
        assert_eq!(text.lines().count(), 105);
    }

    #[test]
    fn rerun_is_byte_identical() {
        let cfg = small_cfg("rerun");
        let a = run_experiment(&cfg).unwrap();
        let first: Vec<(String, Vec<u8>)> = artifact_bytes(&a.out_dir);
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.out_dir, b.out_dir);
        let second = artifact_bytes(&b.out_dir);
        assert_eq!(first.len(), second.len());
        for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(&second) {
            assert_eq!(name_a, name_b);
            assert_eq!(bytes_a, bytes_b, "{name_a} changed between reruns");
        }
    }

    fn artifact_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        out.sort();
        out
    }

    #[test]
    fn runs_use_consecutive_seeds() {
        let mut cfg = small_cfg("seeds");
        cfg.base_seed = 40;
        let runs = train_runs(&cfg).unwrap();
        let seeds: Vec<u64> = runs.iter().map(|r| r.metrics.seed).collect();
        assert_eq!(seeds, vec![40, 41, 42]);
    }

    #[test]
    fn branching_sweep_reports_monotone_availability() {
        let mut cfg = small_cfg("branching");
        cfg.runs = 2;
        cfg.learner.episodes = 8;
        let pts = branching_sweep(&cfg, &[0.0, 0.6]).unwrap();
        assert_eq!(pts.len(), 2);
        // Raising k can only shrink available sets.
        assert!(pts[1].mean_available_options <= pts[0].mean_available_options + 1e-12);
        assert_eq!(pts[0].mean_available_options, 2.0, "k = 0 keeps every option");
        assert!(branching_sweep(&cfg, &[]).is_err());
        assert!(branching_sweep(&cfg, &[1.5]).is_err());
    }
}
