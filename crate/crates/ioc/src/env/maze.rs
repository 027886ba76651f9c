//! Point-mass maze with axis-aligned rectangular walls.
//!
//! The agent is a point in a bounded box. An action is a 2d force, clamped
//! per component to `max_force` and scaled by `action_scale` into a
//! displacement. Blocked moves slide: the x displacement is applied if legal,
//! then the y displacement. Reaching within `radius` of an active goal ends
//! the episode and pays that goal's reward; all other steps pay zero.

use crate::error::{Error, Result};

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Rect { min, max }
    }

    /// Interior containment. Boundary points do not count, so positions may
    /// touch and slide along wall faces.
    pub fn contains_open(&self, p: [f64; 2]) -> bool {
        p[0] > self.min[0] && p[0] < self.max[0] && p[1] > self.min[1] && p[1] < self.max[1]
    }

    /// Closed containment, used for the outer bounds.
    pub fn contains_closed(&self, p: [f64; 2]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    /// True if the open segment (a, b) passes through the rectangle interior.
    /// Standard slab test against the open box.
    pub fn intersects_segment(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for axis in 0..2 {
            let d = b[axis] - a[axis];
            if d.abs() < 1e-15 {
                // Parallel to this slab: outside-or-on-face rejects.
                if a[axis] <= self.min[axis] || a[axis] >= self.max[axis] {
                    return false;
                }
            } else {
                let mut ta = (self.min[axis] - a[axis]) / d;
                let mut tb = (self.max[axis] - a[axis]) / d;
                if ta > tb {
                    std::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
                if t0 >= t1 {
                    return false;
                }
            }
        }
        true
    }
}

/// A terminal disc. Deactivated goals neither pay nor terminate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MazeGoal {
    pub center: [f64; 2],
    pub radius: f64,
    pub reward: f64,
    pub active: bool,
}

/// Continuous state: just the position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MazeState {
    pub position: [f64; 2],
}

/// Static description of a maze task.
#[derive(Debug, Clone, PartialEq)]
pub struct MazeSpec {
    pub bounds: Rect,
    pub walls: Vec<Rect>,
    pub start: [f64; 2],
    pub goals: Vec<MazeGoal>,
    pub action_scale: f64,
    pub max_force: f64,
}

impl MazeSpec {
    pub fn new(
        bounds: Rect,
        walls: Vec<Rect>,
        start: [f64; 2],
        goals: Vec<MazeGoal>,
        action_scale: f64,
        max_force: f64,
    ) -> Result<Self> {
        if action_scale <= 0.0 || max_force <= 0.0 {
            return Err(Error::Env("action_scale and max_force must be positive".into()));
        }
        let spec = MazeSpec { bounds, walls, start, goals, action_scale, max_force };
        if !spec.in_free_space(start) {
            return Err(Error::Env(format!("start {start:?} is not in free space")));
        }
        for (i, g) in spec.goals.iter().enumerate() {
            if g.radius <= 0.0 {
                return Err(Error::Env(format!("goal {i} has non-positive radius")));
            }
            if !spec.in_free_space(g.center) {
                return Err(Error::Env(format!("goal {i} center {:?} is inside a wall", g.center)));
            }
        }
        Ok(spec)
    }

    /// T-shaped maze: a vertical stem joining a horizontal top corridor, with
    /// terminal discs at both ends of the top corridor. Start is in the stem.
    pub fn tmaze() -> Self {
        let bounds = Rect::new([-0.4, -0.2], [0.4, 0.4]);
        let walls = vec![
            Rect::new([-0.4, -0.2], [-0.1, 0.2]),
            Rect::new([0.1, -0.2], [0.4, 0.2]),
        ];
        let goals = vec![
            MazeGoal { center: [-0.3, 0.3], radius: 0.1, reward: 1.0, active: true },
            MazeGoal { center: [0.3, 0.3], radius: 0.1, reward: 1.0, active: true },
        ];
        MazeSpec::new(bounds, walls, [0.0, -0.1], goals, 0.05, 1.0)
            .expect("builtin maze is valid")
    }

    pub fn in_free_space(&self, p: [f64; 2]) -> bool {
        self.bounds.contains_closed(p) && !self.walls.iter().any(|w| w.contains_open(p))
    }

    /// Index of the first active goal whose disc contains `p`.
    pub fn goal_at(&self, p: [f64; 2]) -> Option<usize> {
        self.goals.iter().position(|g| {
            g.active && {
                let dx = p[0] - g.center[0];
                let dy = p[1] - g.center[1];
                (dx * dx + dy * dy).sqrt() <= g.radius
            }
        })
    }

    pub fn active_goal_count(&self) -> usize {
        self.goals.iter().filter(|g| g.active).count()
    }
}

/// Outcome of one maze step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MazeTransition {
    pub next: MazeState,
    pub reward: f64,
    pub terminal: bool,
    /// Which goal terminated the episode, if any.
    pub goal: Option<usize>,
}

/// True when the straight move from `a` to `b` stays inside the bounds and
/// crosses no wall interior. The bounds are convex, so checking endpoints
/// suffices for containment.
fn move_legal(spec: &MazeSpec, a: [f64; 2], b: [f64; 2]) -> bool {
    spec.in_free_space(b) && !spec.walls.iter().any(|w| w.intersects_segment(a, b))
}

/// One environment step. `force` is clamped per component to
/// `[-max_force, max_force]` and scaled by `action_scale`.
pub fn maze_step(spec: &MazeSpec, state: MazeState, force: [f64; 2]) -> MazeTransition {
    let f = spec.max_force;
    let d = [
        force[0].clamp(-f, f) * spec.action_scale,
        force[1].clamp(-f, f) * spec.action_scale,
    ];
    let p = state.position;
    let candidate = [p[0] + d[0], p[1] + d[1]];
    let next = if move_legal(spec, p, candidate) {
        candidate
    } else {
        // Slide: each axis independently, x first.
        let mut q = p;
        let try_x = [p[0] + d[0], p[1]];
        if move_legal(spec, q, try_x) {
            q = try_x;
        }
        let try_y = [q[0], q[1] + d[1]];
        if move_legal(spec, q, try_y) {
            q = try_y;
        }
        q
    };
    let next = MazeState { position: next };
    match spec.goal_at(next.position) {
        Some(i) => MazeTransition { next, reward: spec.goals[i].reward, terminal: true, goal: Some(i) },
        None => MazeTransition { next, reward: 0.0, terminal: false, goal: None },
    }
}

/// Deactivate the goal with the highest visit count, breaking ties toward
/// the lowest index. Needs at least two active goals, otherwise nothing
/// would be left to pursue.
pub fn remove_most_visited_goal(spec: &MazeSpec, visit_counts: &[u64]) -> Result<MazeSpec> {
    if visit_counts.len() != spec.goals.len() {
        return Err(Error::Transfer(format!(
            "{} visit counts for {} goals",
            visit_counts.len(),
            spec.goals.len()
        )));
    }
    if spec.active_goal_count() < 2 {
        return Err(Error::Transfer("need at least two active goals to remove one".into()));
    }
    let target = spec
        .goals
        .iter()
        .enumerate()
        .filter(|(_, g)| g.active)
        .max_by(|(i, _), (j, _)| {
            visit_counts[*i]
                .cmp(&visit_counts[*j])
                .then(j.cmp(i)) // ties favour the lower index
        })
        .map(|(i, _)| i)
        .expect("at least two active goals");
    let mut out = spec.clone();
    out.goals[target].active = false;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmaze() -> MazeSpec {
        MazeSpec::tmaze()
    }

    #[test]
    fn tmaze_free_space_shape() {
        let m = tmaze();
        // Stem interior.
        assert!(m.in_free_space([0.0, -0.1]));
        assert!(m.in_free_space([0.05, 0.0]));
        // Top corridor, both arms.
        assert!(m.in_free_space([-0.35, 0.3]));
        assert!(m.in_free_space([0.35, 0.25]));
        // Inside the side blocks.
        assert!(!m.in_free_space([-0.2, 0.0]));
        assert!(!m.in_free_space([0.3, -0.1]));
        // Outside the bounds.
        assert!(!m.in_free_space([0.0, 0.5]));
        assert!(!m.in_free_space([-0.45, 0.3]));
    }

    #[test]
    fn free_move_applies_both_components() {
        let m = tmaze();
        let s = MazeState { position: [0.0, -0.1] };
        let t = maze_step(&m, s, [1.0, 1.0]);
        assert_eq!(t.next.position, [0.05, -0.05]);
        assert!(!t.terminal);
        assert_eq!(t.reward, 0.0);
    }

    #[test]
    fn forces_are_clamped() {
        let m = tmaze();
        let s = MazeState { position: [0.0, 0.0] };
        let big = maze_step(&m, s, [100.0, 0.0]);
        let unit = maze_step(&m, s, [1.0, 0.0]);
        assert_eq!(big.next.position, unit.next.position);
    }

    #[test]
    fn blocked_diagonal_slides_along_wall() {
        let m = tmaze();
        // Against the right stem wall at x = 0.1, pushing up-right: the x
        // component is blocked, the y component goes through.
        let s = MazeState { position: [0.1, 0.0] };
        let t = maze_step(&m, s, [1.0, 1.0]);
        assert_eq!(t.next.position, [0.1, 0.05]);
        // Pushing straight right does nothing at all.
        let t2 = maze_step(&m, s, [1.0, 0.0]);
        assert_eq!(t2.next.position, [0.1, 0.0]);
    }

    #[test]
    fn bounds_stop_movement() {
        let m = tmaze();
        let s = MazeState { position: [0.4, 0.3] };
        let t = maze_step(&m, s, [1.0, 0.0]);
        assert_eq!(t.next.position, [0.4, 0.3]);
    }

    #[test]
    fn corridor_walls_are_solid_under_fuzz() {
        use rand::{Rng, SeedableRng};
        let m = tmaze();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut s = MazeState { position: m.start };
        for step in 0..20_000 {
            let force = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let t = maze_step(&m, s, force);
            assert!(
                m.in_free_space(t.next.position),
                "step {step} escaped free space at {:?}",
                t.next.position
            );
            s = if t.terminal { MazeState { position: m.start } } else { t.next };
        }
    }

    #[test]
    fn goal_disc_terminates_with_reward() {
        let m = tmaze();
        let s = MazeState { position: [0.3, 0.25] };
        let t = maze_step(&m, s, [0.0, 1.0]);
        assert!(t.terminal);
        assert_eq!(t.reward, 1.0);
        assert_eq!(t.goal, Some(1));
    }

    #[test]
    fn inactive_goal_does_not_terminate() {
        let mut m = tmaze();
        m.goals[1].active = false;
        let s = MazeState { position: [0.3, 0.25] };
        let t = maze_step(&m, s, [0.0, 1.0]);
        assert!(!t.terminal);
        assert_eq!(t.reward, 0.0);
    }

    #[test]
    fn remove_most_visited_prefers_high_count_then_low_index() {
        let m = tmaze();
        let out = remove_most_visited_goal(&m, &[3, 9]).unwrap();
        assert!(out.goals[0].active && !out.goals[1].active);
        let tied = remove_most_visited_goal(&m, &[4, 4]).unwrap();
        assert!(!tied.goals[0].active && tied.goals[1].active);
        // Only one active goal left: refuse.
        assert!(remove_most_visited_goal(&out, &[0, 0]).is_err());
        // Count/goal length mismatch: refuse.
        assert!(remove_most_visited_goal(&m, &[1]).is_err());
    }

    #[test]
    fn segment_test_tangent_is_legal() {
        let w = Rect::new([0.1, -0.2], [0.4, 0.2]);
        // Sliding exactly along the wall face x = 0.1.
        assert!(!w.intersects_segment([0.1, -0.1], [0.1, 0.1]));
        // Crossing through the interior.
        assert!(w.intersects_segment([0.0, 0.0], [0.2, 0.0]));
        // Stopping short.
        assert!(!w.intersects_segment([0.0, 0.0], [0.09, 0.0]));
    }
}
