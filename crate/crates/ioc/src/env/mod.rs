//! Environments: a slippery gridworld and a continuous point-mass maze
//! behind one discrete-action trait.

pub mod grid;
pub mod maze;

pub use grid::{grid_step, GridSpec, GridState, GridTransition, FOUR_ROOMS_MAP, GRID_ACTIONS, GRID_ACTION_NAMES};
pub use maze::{maze_step, remove_most_visited_goal, MazeGoal, MazeSpec, MazeState, MazeTransition, Rect};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::funcapprox::FeatureMap;

/// State of either environment family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvState {
    Grid(GridState),
    Maze(MazeState),
}

impl EnvState {
    /// Compact one-line rendering used by traces and checkpoints.
    pub fn describe(&self) -> String {
        match self {
            EnvState::Grid(g) => format!("cell {},{}", g.cell.0, g.cell.1),
            EnvState::Maze(m) => format!("pos {},{}", m.position[0], m.position[1]),
        }
    }
}

/// One step of interaction, in trait-level terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: EnvState,
    pub action: usize,
    pub reward: f64,
    pub next_state: EnvState,
    pub terminal: bool,
    /// Goal index when `terminal` came from reaching a goal.
    pub goal: Option<usize>,
}

/// A probe location for heatmap rendering, paired with the state to
/// evaluate there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplePoint {
    Cell { row: usize, col: usize },
    Point { x: f64, y: f64 },
}

/// What happened when a transfer switch was requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferOutcome {
    /// The goal with this index was deactivated.
    Removed(usize),
    /// The environment has no notion of removable goals.
    NotSupported,
}

/// Discrete-action environment interface shared by the learner and harness.
pub trait Environment {
    fn name(&self) -> &'static str;

    fn num_actions(&self) -> usize;

    /// The feature map agents should use on this environment.
    fn feature_map(&self) -> &FeatureMap;

    /// Number of tabular states, if the state space is finite.
    fn tabular_states(&self) -> Option<usize> {
        None
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> EnvState;

    fn step(&mut self, action: usize, rng: &mut ChaCha8Rng) -> Transition;

    fn num_goals(&self) -> usize {
        1
    }

    /// Remove the most-visited goal, if this environment supports transfer.
    fn apply_transfer(&mut self, visit_counts: &[u64]) -> Result<TransferOutcome> {
        let _ = visit_counts;
        Ok(TransferOutcome::NotSupported)
    }

    /// Probe states covering the environment, for heatmaps and diagnostics.
    fn sample_states(&self) -> Vec<(SamplePoint, EnvState)>;
}

// ---------------------------------------------------------------------------
// Gridworld wrapper

/// Episodic four-rooms style environment. Episodes start uniformly over open
/// non-goal cells.
pub struct FourRooms {
    pub spec: GridSpec,
    state: GridState,
    map: FeatureMap,
}

impl FourRooms {
    pub fn new(spec: GridSpec) -> Self {
        let map = FeatureMap::one_hot(spec.n_states());
        let state = spec.goal_state();
        FourRooms { spec, state, map }
    }

    pub fn standard() -> Self {
        FourRooms::new(GridSpec::four_rooms())
    }
}

impl Environment for FourRooms {
    fn name(&self) -> &'static str {
        "fourrooms"
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn feature_map(&self) -> &FeatureMap {
        &self.map
    }

    fn tabular_states(&self) -> Option<usize> {
        Some(self.spec.n_states())
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> EnvState {
        let goal = self.spec.goal_state().index;
        // Rejection keeps the draw uniform over the remaining cells.
        loop {
            let i = rng.gen_range(0..self.spec.n_states());
            if i != goal {
                let cell = self.spec.open_cells()[i];
                self.state = self.spec.state_at(cell).unwrap();
                return EnvState::Grid(self.state);
            }
        }
    }

    fn step(&mut self, action: usize, rng: &mut ChaCha8Rng) -> Transition {
        let before = self.state;
        let t = grid_step(&self.spec, before, action, rng);
        self.state = t.next;
        Transition {
            state: EnvState::Grid(before),
            action,
            reward: t.reward,
            next_state: EnvState::Grid(t.next),
            terminal: t.terminal,
            goal: t.terminal.then_some(0),
        }
    }

    fn sample_states(&self) -> Vec<(SamplePoint, EnvState)> {
        self.spec
            .open_cells()
            .iter()
            .map(|&cell| {
                let s = self.spec.state_at(cell).unwrap();
                (SamplePoint::Cell { row: cell.0, col: cell.1 }, EnvState::Grid(s))
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Maze wrapper

/// Default lattice resolution for maze heatmap probes.
const MAZE_PROBE_GRID: usize = 50;

/// Point-mass maze with four cardinal force actions. Episodes start at the
/// fixed start position.
pub struct TMaze {
    pub spec: MazeSpec,
    state: MazeState,
    map: FeatureMap,
    forces: Vec<[f64; 2]>,
}

impl TMaze {
    pub fn new(spec: MazeSpec, rbf_nx: usize, rbf_ny: usize) -> Self {
        let map = FeatureMap::rbf_grid(spec.bounds, rbf_nx, rbf_ny);
        let f = spec.max_force;
        let forces = vec![[0.0, f], [0.0, -f], [-f, 0.0], [f, 0.0]];
        let state = MazeState { position: spec.start };
        TMaze { spec, state, map, forces }
    }

    pub fn standard() -> Self {
        TMaze::new(MazeSpec::tmaze(), 10, 10)
    }

    /// The discrete action set: up, down, left, right forces.
    pub fn force_for(&self, action: usize) -> [f64; 2] {
        self.forces[action]
    }
}

impl Environment for TMaze {
    fn name(&self) -> &'static str {
        "tmaze"
    }

    fn num_actions(&self) -> usize {
        self.forces.len()
    }

    fn feature_map(&self) -> &FeatureMap {
        &self.map
    }

    fn reset(&mut self, _rng: &mut ChaCha8Rng) -> EnvState {
        self.state = MazeState { position: self.spec.start };
        EnvState::Maze(self.state)
    }

    fn step(&mut self, action: usize, _rng: &mut ChaCha8Rng) -> Transition {
        let before = self.state;
        let t = maze_step(&self.spec, before, self.forces[action]);
        self.state = t.next;
        Transition {
            state: EnvState::Maze(before),
            action,
            reward: t.reward,
            next_state: EnvState::Maze(t.next),
            terminal: t.terminal,
            goal: t.goal,
        }
    }

    fn num_goals(&self) -> usize {
        self.spec.goals.len()
    }

    fn apply_transfer(&mut self, visit_counts: &[u64]) -> Result<TransferOutcome> {
        if self.spec.active_goal_count() < 2 {
            return Err(Error::Transfer(
                "maze has fewer than two active goals; nothing to remove".into(),
            ));
        }
        let before: Vec<bool> = self.spec.goals.iter().map(|g| g.active).collect();
        self.spec = remove_most_visited_goal(&self.spec, visit_counts)?;
        let removed = self
            .spec
            .goals
            .iter()
            .zip(&before)
            .position(|(g, was)| *was && !g.active)
            .expect("one goal flipped inactive");
        Ok(TransferOutcome::Removed(removed))
    }

    fn sample_states(&self) -> Vec<(SamplePoint, EnvState)> {
        let b = self.spec.bounds;
        let n = MAZE_PROBE_GRID;
        let mut out = Vec::new();
        for iy in 0..n {
            for ix in 0..n {
                let x = b.min[0] + (ix as f64 + 0.5) / n as f64 * (b.max[0] - b.min[0]);
                let y = b.min[1] + (iy as f64 + 0.5) / n as f64 * (b.max[1] - b.min[1]);
                if self.spec.in_free_space([x, y]) {
                    out.push((
                        SamplePoint::Point { x, y },
                        EnvState::Maze(MazeState { position: [x, y] }),
                    ));
                }
            }
        }
        out
    }
}
