//! Plain-text checkpoints: agent parameters, critic weights, and enough
//! environment geometry to render heatmaps later.
//!
//! The format is line-oriented. Floats are written with Rust's shortest
//! round-trip formatting, so save followed by load reproduces every weight
//! bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::critic::QUTable;
use crate::env::{GridSpec, MazeSpec};
use crate::error::{Error, Result};
use crate::funcapprox::{FeatureMap, SigmoidHead, SoftmaxHead};
use crate::learner::AgentParams;
use crate::options::{OptionParams, PolicyOverOptions};

const MAGIC: &str = "ioc-checkpoint v1";

/// Geometry the checkpoint remembers about its environment.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvDescriptor {
    /// Grid layout as map rows; `G` marks the goal.
    Grid { rows: Vec<String> },
    /// The builtin T-maze.
    TMaze,
}

impl EnvDescriptor {
    pub fn for_grid(spec: &GridSpec) -> Self {
        let mut rows = Vec::with_capacity(spec.height);
        for r in 0..spec.height {
            let mut row = String::with_capacity(spec.width);
            for c in 0..spec.width {
                row.push(if !spec.is_open((r, c)) {
                    '#'
                } else if (r, c) == spec.goal {
                    'G'
                } else {
                    '.'
                });
            }
            rows.push(row);
        }
        EnvDescriptor::Grid { rows }
    }

    /// Reconstruct the geometry. Grid dynamics fields (slip, rewards) are
    /// irrelevant for heatmaps and take defaults.
    pub fn grid_spec(&self) -> Option<GridSpec> {
        match self {
            EnvDescriptor::Grid { rows } => {
                Some(GridSpec::from_map_str(&rows.join("\n"), 0.0, 1.0, 0.0).expect("saved map was valid"))
            }
            EnvDescriptor::TMaze => None,
        }
    }

    pub fn maze_spec(&self) -> Option<MazeSpec> {
        match self {
            EnvDescriptor::Grid { .. } => None,
            EnvDescriptor::TMaze => Some(MazeSpec::tmaze()),
        }
    }
}

/// A full checkpoint: everything needed to inspect or resume an agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub env: EnvDescriptor,
    pub map: FeatureMap,
    pub params: AgentParams,
    pub critic: QUTable,
    pub seed: u64,
    pub episode: usize,
}

fn floats(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl Checkpoint {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "episode {}", self.episode);
        match &self.env {
            EnvDescriptor::Grid { rows } => {
                let _ = writeln!(s, "env grid {}", rows.len());
                for row in rows {
                    let _ = writeln!(s, "{row}");
                }
            }
            EnvDescriptor::TMaze => {
                let _ = writeln!(s, "env tmaze");
            }
        }
        match &self.map {
            FeatureMap::OneHot { dim } => {
                let _ = writeln!(s, "map one_hot {dim}");
            }
            FeatureMap::RbfGrid { nx, ny, bounds, .. } => {
                let _ = writeln!(
                    s,
                    "map rbf_grid {nx} {ny} {} {} {} {}",
                    bounds.min[0], bounds.min[1], bounds.max[0], bounds.max[1]
                );
            }
        }
        let n_options = self.params.options.len();
        let n_actions = self.params.options[0].intra.n_choices();
        let _ = writeln!(s, "options {n_options}");
        let _ = writeln!(s, "actions {n_actions}");
        let _ = writeln!(s, "temperature {}", self.params.options[0].intra.temperature);
        for (i, o) in self.params.options.iter().enumerate() {
            for (a, row) in o.intra.weights.iter().enumerate() {
                let _ = writeln!(s, "theta {i} {a} {}", floats(row));
            }
            let _ = writeln!(s, "nu {i} {}", floats(&o.termination.weights));
            let _ = writeln!(s, "z {i} {}", floats(&o.interest.weights));
        }
        match &self.params.pi_omega {
            PolicyOverOptions::FixedUniform => {
                let _ = writeln!(s, "policy uniform");
            }
            PolicyOverOptions::LearnedSoftmax(head) => {
                let _ = writeln!(s, "policy softmax");
                for (i, row) in head.weights.iter().enumerate() {
                    let _ = writeln!(s, "pi {i} {}", floats(row));
                }
            }
        }
        let _ = writeln!(s, "critic {}", self.critic.gamma);
        for w in 0..n_options {
            for a in 0..n_actions {
                let _ = writeln!(s, "qu {w} {a} {}", floats(self.critic.weights_row(w, a)));
            }
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let fail = |line: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line: line + 1,
            msg,
        };
        let mut next_line = |want: &str| -> Result<(usize, String)> {
            lines
                .next()
                .map(|(i, l)| (i, l.to_string()))
                .ok_or_else(|| Error::Parse {
                    path: origin.to_string(),
                    line: 0,
                    msg: format!("file ended while expecting {want}"),
                })
        };

        let (i, magic) = next_line("header")?;
        if magic.trim() != MAGIC {
            return Err(fail(i, format!("bad header '{magic}'")));
        }
        let parse_kv = |line: &(usize, String), key: &str| -> Result<String> {
            let (i, l) = line;
            l.strip_prefix(key)
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| fail(*i, format!("expected '{key} ...', got '{l}'")))
        };

        let l = next_line("seed")?;
        let seed: u64 = parse_kv(&l, "seed")?.parse().map_err(|e| fail(l.0, format!("seed: {e}")))?;
        let l = next_line("episode")?;
        let episode: usize =
            parse_kv(&l, "episode")?.parse().map_err(|e| fail(l.0, format!("episode: {e}")))?;

        let l = next_line("env")?;
        let env_parts = parse_kv(&l, "env")?;
        let env = match env_parts.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["grid", n] => {
                let n: usize = n.parse().map_err(|e| fail(l.0, format!("grid rows: {e}")))?;
                let mut rows = Vec::with_capacity(n);
                for _ in 0..n {
                    rows.push(next_line("map row")?.1);
                }
                EnvDescriptor::Grid { rows }
            }
            ["tmaze"] => EnvDescriptor::TMaze,
            other => return Err(fail(l.0, format!("unknown env descriptor {other:?}"))),
        };

        let l = next_line("map")?;
        let map_parts = parse_kv(&l, "map")?;
        let map = match map_parts.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["one_hot", dim] => {
                let dim: usize = dim.parse().map_err(|e| fail(l.0, format!("map dim: {e}")))?;
                FeatureMap::one_hot(dim)
            }
            ["rbf_grid", nx, ny, x0, y0, x1, y1] => {
                let p = |s: &str| -> Result<f64> {
                    s.parse().map_err(|e| fail(l.0, format!("map bounds: {e}")))
                };
                let nx: usize = nx.parse().map_err(|e| fail(l.0, format!("map nx: {e}")))?;
                let ny: usize = ny.parse().map_err(|e| fail(l.0, format!("map ny: {e}")))?;
                FeatureMap::rbf_grid(
                    crate::env::Rect::new([p(x0)?, p(y0)?], [p(x1)?, p(y1)?]),
                    nx,
                    ny,
                )
            }
            other => return Err(fail(l.0, format!("unknown feature map {other:?}"))),
        };
        let dim = map.dim();

        let l = next_line("options")?;
        let n_options: usize =
            parse_kv(&l, "options")?.parse().map_err(|e| fail(l.0, format!("options: {e}")))?;
        let l = next_line("actions")?;
        let n_actions: usize =
            parse_kv(&l, "actions")?.parse().map_err(|e| fail(l.0, format!("actions: {e}")))?;
        let l = next_line("temperature")?;
        let temperature: f64 = parse_kv(&l, "temperature")?
            .parse()
            .map_err(|e| fail(l.0, format!("temperature: {e}")))?;
        if n_options == 0 || n_actions == 0 {
            return Err(fail(l.0, "options and actions must be positive".into()));
        }

        let parse_row = |line: &(usize, String), key: &str, idx: &[usize], dim: usize| -> Result<Vec<f64>> {
            let (i, l) = line;
            let mut parts = l.split_whitespace();
            let head = parts.next().unwrap_or("");
            if head != key {
                return Err(fail(*i, format!("expected '{key}', got '{l}'")));
            }
            for want in idx {
                let got: usize = parts
                    .next()
                    .ok_or_else(|| fail(*i, "missing index".into()))?
                    .parse()
                    .map_err(|e| fail(*i, format!("index: {e}")))?;
                if got != *want {
                    return Err(fail(*i, format!("expected {key} index {want}, got {got}")));
                }
            }
            let row: Vec<f64> = parts
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| fail(*i, format!("weight: {e}")))?;
            if row.len() != dim {
                return Err(fail(*i, format!("{key} row has {} weights, map dim is {dim}", row.len())));
            }
            Ok(row)
        };

        let mut options = Vec::with_capacity(n_options);
        for w in 0..n_options {
            let mut intra = SoftmaxHead::zeros(n_actions, dim, temperature);
            for a in 0..n_actions {
                let l = next_line("theta row")?;
                intra.weights[a] = parse_row(&l, "theta", &[w, a], dim)?;
            }
            let l = next_line("nu row")?;
            let termination = SigmoidHead { weights: parse_row(&l, "nu", &[w], dim)? };
            let l = next_line("z row")?;
            let interest = SigmoidHead { weights: parse_row(&l, "z", &[w], dim)? };
            options.push(OptionParams { intra, termination, interest });
        }

        let l = next_line("policy")?;
        let pi_omega = match parse_kv(&l, "policy")?.as_str() {
            "uniform" => PolicyOverOptions::FixedUniform,
            "softmax" => {
                let mut head = SoftmaxHead::zeros(n_options, dim, temperature);
                for i in 0..n_options {
                    let l = next_line("pi row")?;
                    head.weights[i] = parse_row(&l, "pi", &[i], dim)?;
                }
                PolicyOverOptions::LearnedSoftmax(head)
            }
            other => return Err(fail(l.0, format!("unknown policy '{other}'"))),
        };

        let l = next_line("critic")?;
        let gamma: f64 =
            parse_kv(&l, "critic")?.parse().map_err(|e| fail(l.0, format!("gamma: {e}")))?;
        let mut critic = QUTable::new(dim, n_options, n_actions, gamma)
            .map_err(|e| fail(l.0, e.to_string()))?;
        for w in 0..n_options {
            for a in 0..n_actions {
                let l = next_line("qu row")?;
                *critic.weights_row_mut(w, a) = parse_row(&l, "qu", &[w, a], dim)?;
            }
        }

        Ok(Checkpoint {
            env,
            map,
            params: AgentParams { options, pi_omega },
            critic,
            seed,
            episode,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, FourRooms, TMaze};
    use crate::learner::{train, LearnerConfig, PolicyKind};

    fn roundtrip(ck: &Checkpoint) -> Checkpoint {
        let text = ck.render();
        Checkpoint::parse(&text, "memory").unwrap()
    }

    fn assert_bits_equal(a: &Checkpoint, b: &Checkpoint) {
        let wa = a.params.flat_weights();
        let wb = b.params.flat_weights();
        assert_eq!(wa.len(), wb.len());
        for (x, y) in wa.iter().zip(&wb) {
            assert_eq!(x.to_bits(), y.to_bits(), "{x} vs {y}");
        }
        assert_eq!(a.map, b.map);
        assert_eq!(a.env, b.env);
        assert_eq!(a.critic, b.critic);
    }

    #[test]
    fn grid_checkpoint_roundtrips_bit_exactly() {
        let mut env = FourRooms::standard();
        let cfg = LearnerConfig { episodes: 8, max_steps: 300, seed: 3, ..LearnerConfig::default() };
        let r = train(&mut env, &cfg).unwrap();
        let ck = Checkpoint {
            env: EnvDescriptor::for_grid(&env.spec),
            map: env.feature_map().clone(),
            params: r.params,
            critic: r.critic,
            seed: 3,
            episode: 8,
        };
        assert_bits_equal(&ck, &roundtrip(&ck));
    }

    #[test]
    fn maze_checkpoint_roundtrips_bit_exactly() {
        let mut env = TMaze::standard();
        let cfg = LearnerConfig {
            episodes: 4,
            max_steps: 120,
            policy: PolicyKind::LearnedSoftmax,
            seed: 9,
            ..LearnerConfig::tmaze_preset()
        };
        let r = train(&mut env, &cfg).unwrap();
        let ck = Checkpoint {
            env: EnvDescriptor::TMaze,
            map: env.feature_map().clone(),
            params: r.params,
            critic: r.critic,
            seed: 9,
            episode: 4,
        };
        assert_bits_equal(&ck, &roundtrip(&ck));
    }

    #[test]
    fn grid_descriptor_reconstructs_layout() {
        let env = FourRooms::standard();
        let d = EnvDescriptor::for_grid(&env.spec);
        let spec = d.grid_spec().unwrap();
        assert_eq!(spec.n_states(), 104);
        assert_eq!(spec.goal, (7, 9));
    }

    #[test]
    fn parser_reports_location_of_damage() {
        let mut env = FourRooms::standard();
        let cfg = LearnerConfig { episodes: 2, max_steps: 80, seed: 1, ..LearnerConfig::default() };
        let r = train(&mut env, &cfg).unwrap();
        let ck = Checkpoint {
            env: EnvDescriptor::for_grid(&env.spec),
            map: env.feature_map().clone(),
            params: r.params,
            critic: r.critic,
            seed: 1,
            episode: 2,
        };
        let good = ck.render();
        let damaged = good.replace("nu 0 ", "nu 7 ");
        let err = Checkpoint::parse(&damaged, "memory").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        assert!(Checkpoint::parse("not a checkpoint", "memory").is_err());
        assert!(Checkpoint::parse("", "memory").is_err());
    }
}
