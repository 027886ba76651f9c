//! Experiment configuration: flat `key = value` files, command-line
//! overrides, a canonical echo of the effective settings, and a content hash
//! that names the output directory. Reruns of an identical config land in
//! the same directory and rewrite the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::env::{Environment, FourRooms, GridSpec, MazeSpec, TMaze};
use crate::error::{Error, Result};
use crate::learner::{AgentKind, LearnerConfig, PolicyKind, RestrictMax};

/// Which environment family to instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    FourRooms,
    TMaze,
}

impl EnvKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fourrooms" => Ok(EnvKind::FourRooms),
            "tmaze" => Ok(EnvKind::TMaze),
            other => Err(Error::Config(format!("unknown env '{other}' (want fourrooms|tmaze)"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EnvKind::FourRooms => "fourrooms",
            EnvKind::TMaze => "tmaze",
        }
    }
}

/// Environment construction settings.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSettings {
    pub kind: EnvKind,
    /// Path to a custom `#`/`.`/`G` map (grid only).
    pub map_path: Option<String>,
    pub slip_prob: f64,
    pub goal_reward: f64,
    pub step_reward: f64,
    pub action_scale: f64,
    pub max_force: f64,
    pub rbf_nx: usize,
    pub rbf_ny: usize,
}

impl EnvSettings {
    fn defaults(kind: EnvKind) -> Self {
        EnvSettings {
            kind,
            map_path: None,
            slip_prob: 1.0 / 3.0,
            goal_reward: 50.0,
            step_reward: 0.0,
            action_scale: 0.05,
            max_force: 1.0,
            rbf_nx: 10,
            rbf_ny: 10,
        }
    }

    /// Instantiate a fresh environment.
    pub fn build(&self) -> Result<Box<dyn Environment>> {
        match self.kind {
            EnvKind::FourRooms => {
                let spec = match &self.map_path {
                    Some(p) => {
                        let text = std::fs::read_to_string(p)?;
                        GridSpec::from_map_str(&text, self.slip_prob, self.goal_reward, self.step_reward)?
                    }
                    None => GridSpec::from_map_str(
                        crate::env::FOUR_ROOMS_MAP,
                        self.slip_prob,
                        self.goal_reward,
                        self.step_reward,
                    )?,
                };
                Ok(Box::new(FourRooms::new(spec)))
            }
            EnvKind::TMaze => {
                let mut spec = MazeSpec::tmaze();
                spec.action_scale = self.action_scale;
                spec.max_force = self.max_force;
                Ok(Box::new(TMaze::new(spec, self.rbf_nx, self.rbf_ny)))
            }
        }
    }
}

/// Everything one experiment needs: environment, learner, and orchestration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvSettings,
    pub learner: LearnerConfig,
    /// Independent seeded runs; run `i` uses seed `base_seed + i`.
    pub runs: usize,
    pub base_seed: u64,
    pub out_root: PathBuf,
    /// Also dump interest snapshots every this many episodes (first run).
    pub dump_interest_every: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: EnvSettings::defaults(EnvKind::FourRooms),
            learner: LearnerConfig::default(),
            runs: 30,
            base_seed: 0,
            out_root: PathBuf::from("out"),
            dump_interest_every: None,
        }
    }
}

fn parse_file(path: &Path) -> Result<Vec<(String, String, usize)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: format!("expected 'key = value', got '{line}'"),
            });
        };
        out.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Load a config file (optional) and apply `key=value` overrides on top.
    /// The environment kind is resolved first so its preset supplies the
    /// remaining defaults.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        if let Some(path) = file {
            for (k, v, _) in parse_file(path)? {
                pairs.push((k, v));
            }
        }
        pairs.extend(overrides.iter().cloned());

        let kind = pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "env.kind")
            .map(|(_, v)| EnvKind::parse(v))
            .transpose()?
            .unwrap_or(EnvKind::FourRooms);

        let mut cfg = ExperimentConfig {
            env: EnvSettings::defaults(kind),
            learner: match kind {
                EnvKind::FourRooms => LearnerConfig::default(),
                EnvKind::TMaze => LearnerConfig::tmaze_preset(),
            },
            ..ExperimentConfig::default()
        };
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.learner.validate()?;
        if cfg.runs == 0 {
            return Err(Error::Config("runs must be positive".into()));
        }
        Ok(cfg)
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str, e: String| Error::Config(format!("{key} = {value}: bad {what}: {e}"));
        let f = |what: &str| -> Result<f64> {
            value.parse().map_err(|e: std::num::ParseFloatError| bad(what, e.to_string()))
        };
        let n = |what: &str| -> Result<usize> {
            value.parse().map_err(|e: std::num::ParseIntError| bad(what, e.to_string()))
        };
        let b = |what: &str| -> Result<bool> {
            match value {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(bad(what, "want true|false".into())),
            }
        };
        match key {
            "env.kind" => self.env.kind = EnvKind::parse(value)?,
            "env.map" => self.env.map_path = Some(value.to_string()),
            "env.slip_prob" => self.env.slip_prob = f("probability")?,
            "env.goal_reward" => self.env.goal_reward = f("reward")?,
            "env.step_reward" => self.env.step_reward = f("reward")?,
            "env.action_scale" => self.env.action_scale = f("scale")?,
            "env.max_force" => self.env.max_force = f("force")?,
            "env.rbf_nx" => self.env.rbf_nx = n("count")?,
            "env.rbf_ny" => self.env.rbf_ny = n("count")?,
            "agent" => self.learner.agent = AgentKind::parse(value)?,
            "policy" => self.learner.policy = PolicyKind::parse(value)?,
            "options" => self.learner.n_options = n("count")?,
            "temperature" => self.learner.temperature = f("temperature")?,
            "gamma" => self.learner.gamma = f("discount")?,
            "alpha" => self.learner.alpha = f("rate")?,
            "alpha_theta" => self.learner.alpha_theta = f("rate")?,
            "alpha_nu" => self.learner.alpha_nu = f("rate")?,
            "alpha_z" => self.learner.alpha_z = f("rate")?,
            "alpha_omega" => self.learner.alpha_omega = f("rate")?,
            "episodes" => self.learner.episodes = n("count")?,
            "max_steps" => self.learner.max_steps = n("count")?,
            "threshold_k" => self.learner.threshold_k = f("threshold")?,
            "restrict_max" => self.learner.restrict_max = RestrictMax::parse(value)?,
            "baseline" => self.learner.baseline = b("flag")?,
            "termination_init" => self.learner.termination_init = f("probability")?,
            "gamma_t_weighting" => self.learner.gamma_t_weighting = b("flag")?,
            "transfer_at" => {
                self.learner.transfer_at = if value == "none" { None } else { Some(n("episode")?) }
            }
            "snapshot_every" => {
                self.learner.snapshot_every =
                    if value == "none" { None } else { Some(n("count")?) }
            }
            "runs" => self.runs = n("count")?,
            "seed" => {
                self.base_seed =
                    value.parse().map_err(|e: std::num::ParseIntError| bad("seed", e.to_string()))?
            }
            "out" => self.out_root = PathBuf::from(value),
            "dump_interest_every" => {
                self.dump_interest_every =
                    if value == "none" { None } else { Some(n("count")?) }
            }
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// The full effective configuration, one sorted `key = value` per line.
    /// This is what gets hashed and echoed into the output directory.
    pub fn canonical(&self) -> String {
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        kv.insert("env.kind", self.env.kind.as_str().into());
        kv.insert("env.map", self.env.map_path.clone().unwrap_or_else(|| "none".into()));
        kv.insert("env.slip_prob", self.env.slip_prob.to_string());
        kv.insert("env.goal_reward", self.env.goal_reward.to_string());
        kv.insert("env.step_reward", self.env.step_reward.to_string());
        kv.insert("env.action_scale", self.env.action_scale.to_string());
        kv.insert("env.max_force", self.env.max_force.to_string());
        kv.insert("env.rbf_nx", self.env.rbf_nx.to_string());
        kv.insert("env.rbf_ny", self.env.rbf_ny.to_string());
        kv.insert("agent", self.learner.agent.as_str().into());
        kv.insert("policy", self.learner.policy.as_str().into());
        kv.insert("options", self.learner.n_options.to_string());
        kv.insert("temperature", self.learner.temperature.to_string());
        kv.insert("gamma", self.learner.gamma.to_string());
        kv.insert("alpha", self.learner.alpha.to_string());
        kv.insert("alpha_theta", self.learner.alpha_theta.to_string());
        kv.insert("alpha_nu", self.learner.alpha_nu.to_string());
        kv.insert("alpha_z", self.learner.alpha_z.to_string());
        kv.insert("alpha_omega", self.learner.alpha_omega.to_string());
        kv.insert("episodes", self.learner.episodes.to_string());
        kv.insert("max_steps", self.learner.max_steps.to_string());
        kv.insert("threshold_k", self.learner.threshold_k.to_string());
        kv.insert("restrict_max", self.learner.restrict_max.as_str().into());
        kv.insert("baseline", self.learner.baseline.to_string());
        kv.insert("termination_init", self.learner.termination_init.to_string());
        kv.insert("gamma_t_weighting", self.learner.gamma_t_weighting.to_string());
        kv.insert(
            "transfer_at",
            self.learner.transfer_at.map_or("none".into(), |v| v.to_string()),
        );
        kv.insert(
            "snapshot_every",
            self.learner.snapshot_every.map_or("none".into(), |v| v.to_string()),
        );
        kv.insert("runs", self.runs.to_string());
        kv.insert("seed", self.base_seed.to_string());
        kv.insert(
            "dump_interest_every",
            self.dump_interest_every.map_or("none".into(), |v| v.to_string()),
        );
        let mut out = String::new();
        for (k, v) in kv {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// First 12 hex characters of the canonical form's SHA-256.
    pub fn hash12(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    /// Output directory for this config: `<out_root>/<hash12>`.
    pub fn out_dir(&self) -> PathBuf {
        self.out_root.join(self.hash12())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_env_kind() {
        let four = ExperimentConfig::resolve(None, &[]).unwrap();
        assert_eq!(four.env.kind, EnvKind::FourRooms);
        assert_eq!(four.learner.n_options, 4);
        assert_eq!(four.learner.alpha, 0.25);
        let maze = ExperimentConfig::resolve(
            None,
            &[("env.kind".to_string(), "tmaze".to_string())],
        )
        .unwrap();
        assert_eq!(maze.learner.n_options, 2);
        assert_eq!(maze.learner.policy, PolicyKind::LearnedSoftmax);
        assert!(maze.learner.alpha < 0.25);
    }

    #[test]
    fn overrides_beat_file_values() {
        let dir = std::env::temp_dir().join("ioc-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("exp.cfg");
        std::fs::write(&path, "episodes = 100\nseed = 4   # trailing comment\n\n# full comment\nalpha = 0.1\n").unwrap();
        let cfg = ExperimentConfig::resolve(
            Some(&path),
            &[("episodes".to_string(), "250".to_string())],
        )
        .unwrap();
        assert_eq!(cfg.learner.episodes, 250);
        assert_eq!(cfg.base_seed, 4);
        assert_eq!(cfg.learner.alpha, 0.1);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.set("no_such_key", "1").is_err());
        assert!(cfg.set("alpha", "fast").is_err());
        assert!(cfg.set("baseline", "yes").is_err());
        assert!(cfg.set("agent", "both").is_err());
        assert!(cfg.set("restrict_max", "sometimes").is_err());
    }

    #[test]
    fn resolve_validates_the_final_state() {
        let r = ExperimentConfig::resolve(None, &[("gamma".to_string(), "2.0".to_string())]);
        assert!(r.is_err());
        let r = ExperimentConfig::resolve(None, &[("runs".to_string(), "0".to_string())]);
        assert!(r.is_err());
    }

    #[test]
    fn canonical_is_stable_and_hash_tracks_content() {
        let a = ExperimentConfig::resolve(None, &[]).unwrap();
        let b = ExperimentConfig::resolve(None, &[]).unwrap();
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.hash12(), b.hash12());
        assert_eq!(a.hash12().len(), 12);
        let c = ExperimentConfig::resolve(None, &[("seed".to_string(), "9".to_string())]).unwrap();
        assert_ne!(a.hash12(), c.hash12());
        // out_root does not participate: same experiment, different disk home.
        let mut d = ExperimentConfig::resolve(None, &[]).unwrap();
        d.out_root = PathBuf::from("elsewhere");
        assert_eq!(a.hash12(), d.hash12());
    }

    #[test]
    fn env_kind_in_file_selects_preset_before_other_keys_apply() {
        let dir = std::env::temp_dir().join("ioc-config-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("maze.cfg");
        // alpha comes before env.kind in the file; the preset must not
        // clobber it afterwards.
        std::fs::write(&path, "alpha = 0.2\nenv.kind = tmaze\n").unwrap();
        let cfg = ExperimentConfig::resolve(Some(&path), &[]).unwrap();
        assert_eq!(cfg.env.kind, EnvKind::TMaze);
        assert_eq!(cfg.learner.alpha, 0.2);
        assert_eq!(cfg.learner.n_options, 2, "preset applied first");
    }

    #[test]
    fn build_constructs_matching_env() {
        let cfg = ExperimentConfig::resolve(None, &[]).unwrap();
        let env = cfg.env.build().unwrap();
        assert_eq!(env.name(), "fourrooms");
        assert_eq!(env.tabular_states(), Some(104));
        let maze = ExperimentConfig::resolve(
            None,
            &[("env.kind".to_string(), "tmaze".to_string())],
        )
        .unwrap();
        let env = maze.env.build().unwrap();
        assert_eq!(env.name(), "tmaze");
        assert_eq!(env.feature_map().dim(), 101);
    }
}
