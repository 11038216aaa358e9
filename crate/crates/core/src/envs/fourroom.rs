use serde::{Deserialize, Serialize};

use super::{ActionSpace, Environment, Step};
use crate::error::{Error, Result};
use crate::nets::Action;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridObservation {
    /// `(row, col) / size`.
    #[default]
    Coordinates,
    /// One-hot over all `size²` cells.
    OneHot,
}

const MOVES: [(isize, isize); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];

/// Behavior after the goal is reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalMode {
    /// The episode terminates.
    #[default]
    Terminal,
    /// The agent is moved back to the start and the episode continues.
    Respawn,
    /// The agent stays; every further step on the goal pays again.
    Stay,
}

/// Four rooms separated by a cross of walls with two doorways per wall.
///
/// `size` is odd and at least 7; the outer border is wall. The agent starts in
/// the top-left room at `(1, 1)` and the goal sits in the bottom-right room at
/// `(size−2, size−2)`. Actions: 0 up, 1 right, 2 down, 3 left. Every step that
/// ends on the goal pays `goal_reward`; [`GoalMode`] decides what happens next.
/// `max_steps` truncates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourRoom {
    size: usize,
    walls: Vec<bool>,
    start: (usize, usize),
    goal: (usize, usize),
    goal_reward: f64,
    goal_mode: GoalMode,
    max_steps: usize,
    observation: GridObservation,
    pos: (usize, usize),
    steps: usize,
    done: bool,
}

impl FourRoom {
    pub fn new(size: usize, goal_reward: f64, max_steps: usize, observation: GridObservation) -> Result<Self> {
        if size < 7 || size.is_multiple_of(2) {
            return Err(Error::param(format!("four-room size must be odd and >= 7, got {size}")));
        }
        if max_steps == 0 {
            return Err(Error::param("max_steps must be >= 1"));
        }
        let mid = size / 2;
        let mut walls = vec![false; size * size];
        for i in 0..size {
            for j in 0..size {
                let border = i == 0 || j == 0 || i == size - 1 || j == size - 1;
                walls[i * size + j] = border || i == mid || j == mid;
            }
        }
        let upper_door = mid / 2;
        let lower_door = mid + (size - 1 - mid) / 2;
        for door in [upper_door, lower_door] {
            walls[door * size + mid] = false;
            walls[mid * size + door] = false;
        }
        let start = (1, 1);
        Ok(Self {
            size,
            walls,
            start,
            goal: (size - 2, size - 2),
            goal_reward,
            goal_mode: GoalMode::Terminal,
            max_steps,
            observation,
            pos: start,
            steps: 0,
            done: false,
        })
    }

    pub fn with_goal_mode(mut self, mode: GoalMode) -> Self {
        self.goal_mode = mode;
        self
    }

    pub fn goal_mode(&self) -> GoalMode {
        self.goal_mode
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn position(&self) -> (usize, usize) {
        self.pos
    }

    pub fn goal(&self) -> (usize, usize) {
        self.goal
    }

    pub fn start(&self) -> (usize, usize) {
        self.start
    }

    pub fn is_wall(&self, row: usize, col: usize) -> bool {
        self.walls[row * self.size + col]
    }

    /// Cell reached by taking `action` from `(row, col)`; walls block movement.
    pub fn neighbor(&self, (row, col): (usize, usize), action: usize) -> (usize, usize) {
        let (dr, dc) = MOVES[action];
        let r = row as isize + dr;
        let c = col as isize + dc;
        if r < 0 || c < 0 || r >= self.size as isize || c >= self.size as isize {
            return (row, col);
        }
        let (r, c) = (r as usize, c as usize);
        if self.is_wall(r, c) {
            (row, col)
        } else {
            (r, c)
        }
    }

    fn observe(&self) -> Vec<f64> {
        match self.observation {
            GridObservation::Coordinates => {
                vec![self.pos.0 as f64 / self.size as f64, self.pos.1 as f64 / self.size as f64]
            }
            GridObservation::OneHot => {
                let mut v = vec![0.0; self.size * self.size];
                v[self.pos.0 * self.size + self.pos.1] = 1.0;
                v
            }
        }
    }
}

impl Environment for FourRoom {
    fn observation_dim(&self) -> usize {
        match self.observation {
            GridObservation::Coordinates => 2,
            GridObservation::OneHot => self.size * self.size,
        }
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(4)
    }

    fn reset(&mut self) -> Vec<f64> {
        self.pos = self.start;
        self.steps = 0;
        self.done = false;
        self.observe()
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        let a = match action {
            Action::Discrete(a) if *a < 4 => *a,
            other => return Err(Error::InvalidAction(format!("four-room expects 0..4, got {other:?}"))),
        };
        self.pos = self.neighbor(self.pos, a);
        self.steps += 1;
        let success = self.pos == self.goal;
        let terminated = success && self.goal_mode == GoalMode::Terminal;
        let truncated = !terminated && self.steps >= self.max_steps;
        self.done = terminated || truncated;
        if success && self.goal_mode == GoalMode::Respawn {
            self.pos = self.start;
        }
        Ok(Step {
            observation: self.observe(),
            reward: if success { self.goal_reward } else { 0.0 },
            terminated,
            truncated,
            success,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    /// Breadth-first search returning an optimal action sequence start → goal.
    fn bfs_actions(env: &FourRoom) -> Vec<usize> {
        let n = env.size();
        let mut prev: Vec<Option<((usize, usize), usize)>> = vec![None; n * n];
        let mut seen = vec![false; n * n];
        let mut queue = VecDeque::from([env.start()]);
        seen[env.start().0 * n + env.start().1] = true;
        while let Some(cell) = queue.pop_front() {
            if cell == env.goal() {
                break;
            }
            for a in 0..4 {
                let next = env.neighbor(cell, a);
                let idx = next.0 * n + next.1;
                if !seen[idx] {
                    seen[idx] = true;
                    prev[idx] = Some((cell, a));
                    queue.push_back(next);
                }
            }
        }
        let mut actions = Vec::new();
        let mut cell = env.goal();
        while let Some((p, a)) = prev[cell.0 * n + cell.1] {
            actions.push(a);
            cell = p;
        }
        actions.reverse();
        actions
    }

    #[test]
    fn wall_bump_keeps_position() {
        let mut env = FourRoom::new(7, 1.0, 50, GridObservation::Coordinates).unwrap();
        env.reset();
        let s = env.step(&Action::Discrete(0)).unwrap();
        assert_eq!(env.position(), (1, 1));
        assert_eq!(s.reward, 0.0);
        assert!(!s.done());
    }

    #[test]
    fn scripted_optimal_path_pays_exactly_at_goal() {
        for size in [7, 9, 15] {
            let mut env = FourRoom::new(size, 1.0, 1000, GridObservation::Coordinates).unwrap();
            let plan = bfs_actions(&env);
            assert!(!plan.is_empty());
            env.reset();
            for (i, &a) in plan.iter().enumerate() {
                let s = env.step(&Action::Discrete(a)).unwrap();
                if i + 1 == plan.len() {
                    assert_eq!(s.reward, 1.0);
                    assert!(s.terminated && s.success);
                } else {
                    assert_eq!(s.reward, 0.0);
                    assert!(!s.done());
                }
            }
            assert!(matches!(env.step(&Action::Discrete(0)), Err(Error::EpisodeDone)));
        }
    }

    #[test]
    fn seven_by_seven_layout() {
        let env = FourRoom::new(7, 1.0, 10, GridObservation::Coordinates).unwrap();
        // doorways at (1,3), (4,3), (3,1), (3,4)
        for (r, c) in [(1, 3), (4, 3), (3, 1), (3, 4)] {
            assert!(!env.is_wall(r, c), "({r},{c})");
        }
        assert!(env.is_wall(3, 3));
        assert!(env.is_wall(2, 3));
        // shortest path: 8 moves (Manhattan distance, doorways lie on it)
        assert_eq!(bfs_actions(&env).len(), 8);
    }

    #[test]
    fn resets_are_identical_and_truncation_flags() {
        let mut env = FourRoom::new(9, 1.0, 3, GridObservation::OneHot).unwrap();
        let a = env.reset();
        env.step(&Action::Discrete(1)).unwrap();
        let b = env.reset();
        assert_eq!(a, b);
        assert_eq!(a.len(), 81);
        env.step(&Action::Discrete(0)).unwrap();
        env.step(&Action::Discrete(0)).unwrap();
        let last = env.step(&Action::Discrete(0)).unwrap();
        assert!(last.truncated && !last.terminated);
    }

    #[test]
    fn invalid_sizes_and_actions() {
        assert!(FourRoom::new(6, 1.0, 10, GridObservation::Coordinates).is_err());
        assert!(FourRoom::new(5, 1.0, 10, GridObservation::Coordinates).is_err());
        let mut env = FourRoom::new(7, 1.0, 10, GridObservation::Coordinates).unwrap();
        assert!(env.step(&Action::Discrete(4)).is_err());
        assert!(env.step(&Action::Continuous(vec![0.0])).is_err());
    }

    #[test]
    fn staying_on_goal_keeps_paying() {
        let mut env = FourRoom::new(7, 1.0, 20, GridObservation::Coordinates).unwrap().with_goal_mode(GoalMode::Stay);
        env.reset();
        let path = bfs_actions(&env);
        let mut last = None;
        for a in &path {
            last = Some(env.step(&Action::Discrete(*a)).unwrap());
        }
        let at_goal = last.unwrap();
        assert!(at_goal.success && !at_goal.terminated && at_goal.reward == 1.0);
        // pushing into the corner keeps the agent on the goal
        let again = env.step(&Action::Discrete(2)).unwrap();
        assert!(again.success && again.reward == 1.0 && !again.done());
    }

    #[test]
    fn respawn_returns_to_start() {
        let mut env = FourRoom::new(7, 1.0, 40, GridObservation::Coordinates).unwrap().with_goal_mode(GoalMode::Respawn);
        let start = env.reset();
        let path = bfs_actions(&env);
        for round in 0..2 {
            for (i, a) in path.iter().enumerate() {
                let s = env.step(&Action::Discrete(*a)).unwrap();
                let last = i + 1 == path.len();
                assert_eq!(s.success, last, "round {round}");
                assert!(!s.terminated);
                if last {
                    assert_eq!(s.observation, start);
                    assert_eq!(s.reward, 1.0);
                }
            }
        }
    }
}
