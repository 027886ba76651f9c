//! Four-rooms style gridworld with slip noise.
//!
//! Cells are addressed as (row, col) with row 0 at the top. A move into a
//! wall leaves the agent in place; with probability `slip_prob` the commanded
//! move is ignored and the agent instead jumps to a uniformly random open
//! neighbour (which may coincide with the intended one). Entering the goal
//! cell ends the episode and pays `goal_reward`.

use rand::Rng;

use crate::error::{Error, Result};

/// The four cardinal moves, indexed 0..4 in this order.
pub const GRID_ACTIONS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

pub const GRID_ACTION_NAMES: [&str; 4] = ["up", "down", "left", "right"];

/// Canonical 13x13 four-rooms layout. `G` marks the east hallway goal.
pub const FOUR_ROOMS_MAP: &str = "\
#############
#.....#.....#
#.....#.....#
#...........#
#.....#.....#
#.....#.....#
##.####.....#
#.....###G###
#.....#.....#
#.....#.....#
#...........#
#.....#.....#
#############";

/// A discrete state: the occupied cell plus its dense index among open cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridState {
    pub cell: (usize, usize),
    /// Row-major rank of `cell` among the open cells. Used as the tabular
    /// state index and the one-hot feature index.
    pub index: usize,
}

/// Static description of a grid task.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub height: usize,
    pub width: usize,
    wall: Vec<bool>,
    pub goal: (usize, usize),
    pub slip_prob: f64,
    pub goal_reward: f64,
    pub step_reward: f64,
    open: Vec<(usize, usize)>,
    index_of: Vec<Option<usize>>,
}

impl GridSpec {
    /// Build and validate a grid. Walls are given as a row-major mask.
    pub fn new(
        height: usize,
        width: usize,
        wall: Vec<bool>,
        goal: (usize, usize),
        slip_prob: f64,
        goal_reward: f64,
        step_reward: f64,
    ) -> Result<Self> {
        if height < 3 || width < 3 {
            return Err(Error::Env(format!("grid {height}x{width} is too small")));
        }
        if wall.len() != height * width {
            return Err(Error::Env(format!(
                "wall mask has {} entries for a {height}x{width} grid",
                wall.len()
            )));
        }
        if !(0.0..=1.0).contains(&slip_prob) {
            return Err(Error::Env(format!("slip_prob {slip_prob} outside [0,1]")));
        }
        let mut open = Vec::new();
        let mut index_of = vec![None; height * width];
        for r in 0..height {
            for c in 0..width {
                if !wall[r * width + c] {
                    index_of[r * width + c] = Some(open.len());
                    open.push((r, c));
                }
            }
        }
        if open.is_empty() {
            return Err(Error::Env("grid has no open cells".into()));
        }
        if index_of[goal.0 * width + goal.1].is_none() {
            return Err(Error::Env(format!("goal {goal:?} is a wall or out of range")));
        }
        let spec = GridSpec { height, width, wall, goal, slip_prob, goal_reward, step_reward, open, index_of };
        spec.check_connected()?;
        Ok(spec)
    }

    /// Parse the `#`/`.`/`G` map format. Exactly one `G` is required and
    /// every row must have the same width.
    pub fn from_map_str(map: &str, slip_prob: f64, goal_reward: f64, step_reward: f64) -> Result<Self> {
        let rows: Vec<&str> = map.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.is_empty() {
            return Err(Error::Env("empty map".into()));
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut wall = Vec::with_capacity(height * width);
        let mut goal = None;
        for (r, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::Env(format!("map row {r} has ragged width")));
            }
            for (c, ch) in row.chars().enumerate() {
                match ch {
                    '#' => wall.push(true),
                    '.' => wall.push(false),
                    'G' => {
                        if goal.replace((r, c)).is_some() {
                            return Err(Error::Env("map has more than one goal".into()));
                        }
                        wall.push(false);
                    }
                    other => return Err(Error::Env(format!("map row {r} col {c}: unexpected '{other}'"))),
                }
            }
        }
        let goal = goal.ok_or_else(|| Error::Env("map has no goal cell".into()))?;
        GridSpec::new(height, width, wall, goal, slip_prob, goal_reward, step_reward)
    }

    /// The standard four-rooms task: 1/3 slip, +50 at the east hallway.
    pub fn four_rooms() -> Self {
        GridSpec::from_map_str(FOUR_ROOMS_MAP, 1.0 / 3.0, 50.0, 0.0)
            .expect("builtin map is valid")
    }

    pub fn n_states(&self) -> usize {
        self.open.len()
    }

    pub fn is_open(&self, cell: (usize, usize)) -> bool {
        cell.0 < self.height && cell.1 < self.width && !self.wall[cell.0 * self.width + cell.1]
    }

    pub fn open_cells(&self) -> &[(usize, usize)] {
        &self.open
    }

    pub fn state_at(&self, cell: (usize, usize)) -> Option<GridState> {
        if cell.0 >= self.height || cell.1 >= self.width {
            return None;
        }
        self.index_of[cell.0 * self.width + cell.1].map(|index| GridState { cell, index })
    }

    pub fn goal_state(&self) -> GridState {
        self.state_at(self.goal).expect("goal validated open")
    }

    /// Open cells adjacent to `cell`, in the fixed up/down/left/right order.
    pub fn open_neighbours(&self, cell: (usize, usize)) -> Vec<(usize, usize)> {
        GRID_ACTIONS
            .iter()
            .filter_map(|&(dr, dc)| {
                let r = cell.0.checked_add_signed(dr)?;
                let c = cell.1.checked_add_signed(dc)?;
                self.is_open((r, c)).then_some((r, c))
            })
            .collect()
    }

    /// Every open cell must reach the goal; otherwise an episode can be
    /// unwinnable and the step cap becomes somebody else's bug to find.
    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.n_states()];
        let goal = self.goal_state().index;
        seen[goal] = true;
        let mut queue = vec![self.goal];
        while let Some(cell) = queue.pop() {
            for n in self.open_neighbours(cell) {
                let idx = self.state_at(n).unwrap().index;
                if !seen[idx] {
                    seen[idx] = true;
                    queue.push(n);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            None => Ok(()),
            Some(i) => Err(Error::Env(format!(
                "cell {:?} cannot reach the goal",
                self.open[i]
            ))),
        }
    }
}

/// Outcome of one emitted action: same shape for grid and maze.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridTransition {
    pub next: GridState,
    pub reward: f64,
    pub terminal: bool,
}

/// One environment step under slip noise. `action` indexes `GRID_ACTIONS`.
pub fn grid_step<R: Rng>(spec: &GridSpec, state: GridState, action: usize, rng: &mut R) -> GridTransition {
    assert!(action < 4, "grid action {action} out of range");
    let next_cell = if rng.gen::<f64>() < spec.slip_prob {
        let neighbours = spec.open_neighbours(state.cell);
        if neighbours.is_empty() {
            state.cell
        } else {
            neighbours[rng.gen_range(0..neighbours.len())]
        }
    } else {
        let (dr, dc) = GRID_ACTIONS[action];
        let target = (
            state.cell.0.checked_add_signed(dr),
            state.cell.1.checked_add_signed(dc),
        );
        match target {
            (Some(r), Some(c)) if spec.is_open((r, c)) => (r, c),
            _ => state.cell,
        }
    };
    let next = spec.state_at(next_cell).expect("moves stay on open cells");
    if next_cell == spec.goal {
        GridTransition { next, reward: spec.goal_reward, terminal: true }
    } else {
        GridTransition { next, reward: spec.step_reward, terminal: false }
    }
}
