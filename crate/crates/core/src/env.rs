//! Gridworld mean-field games: move dynamics and the two benchmark rewards.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::{check_distribution, FeatureMap, MeanFieldEnv, MeanFieldGame, MU_FLOOR};
use crate::grid::{Cell, GridSpec};

/// The five grid moves, in their canonical index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
    Stay = 4,
}

pub const ACTIONS: [Action; 5] = [Action::Up, Action::Down, Action::Left, Action::Right, Action::Stay];
pub const NUM_ACTIONS: usize = 5;

impl Action {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Action> {
        ACTIONS.get(idx).copied()
    }

    /// Movement cost used by the congestion penalty: 0 for `Stay`, 1 otherwise.
    pub fn movement_norm(self) -> f64 {
        if self == Action::Stay {
            0.0
        } else {
            1.0
        }
    }

    /// Cell reached from `c` ignoring walls; `None` if the move leaves the board.
    fn offset(self, c: Cell, width: usize, height: usize) -> Option<Cell> {
        match self {
            Action::Up => (c.y > 0).then(|| Cell::new(c.x, c.y - 1)),
            Action::Down => (c.y + 1 < height).then(|| Cell::new(c.x, c.y + 1)),
            Action::Left => (c.x > 0).then(|| Cell::new(c.x - 1, c.y)),
            Action::Right => (c.x + 1 < width).then(|| Cell::new(c.x + 1, c.y)),
            Action::Stay => Some(c),
        }
    }

    fn perpendicular(self) -> Option<[Action; 2]> {
        match self {
            Action::Up | Action::Down => Some([Action::Left, Action::Right]),
            Action::Left | Action::Right => Some([Action::Up, Action::Down]),
            Action::Stay => None,
        }
    }
}

/// Which mean-field-coupled reward the task uses.
///
/// * `Exploration`: `-ln(max(mu(s), eps))` — crowded states pay less.
/// * `Navigation`: distance-to-target plus congestion and crowding penalties,
///   `-c_d * |s - target| / D - c_m * mu(s) * |a| - c_c * ln(max(mu(s), eps))`
///   with `D` the grid diagonal and `|a|` the movement norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RewardKind {
    Exploration,
    Navigation {
        distance_scale: f64,
        congestion_scale: f64,
        crowd_scale: f64,
    },
}

impl RewardKind {
    pub fn navigation() -> Self {
        RewardKind::Navigation {
            distance_scale: 1.0,
            congestion_scale: 1.0,
            crowd_scale: 1.0,
        }
    }
}

/// A finite-horizon MDP over a grid's free cells with mean-field-coupled
/// reward. The population couples only through the reward; dynamics are
/// mean-field independent.
#[derive(Debug, Clone)]
pub struct EnvironmentModel {
    grid: GridSpec,
    reward_kind: RewardKind,
    gamma: f64,
    slip: f64,
    rows: Vec<Vec<(usize, f64)>>,
    mu0: Vec<f64>,
    target_cell: Option<Cell>,
}

impl EnvironmentModel {
    /// Deterministic move dynamics (wall collisions stay in place), initial
    /// distribution a point mass on the grid's start cell.
    pub fn new(grid: GridSpec, reward_kind: RewardKind, gamma: f64) -> Result<Self> {
        EnvironmentModel::with_slip(grid, reward_kind, gamma, 0.0)
    }

    /// Like [`EnvironmentModel::new`] but each directional move slips to one
    /// of the two perpendicular directions with probability `slip` (split
    /// evenly). `Stay` never slips.
    pub fn with_slip(grid: GridSpec, reward_kind: RewardKind, gamma: f64, slip: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::config(format!("gamma {gamma} outside (0, 1)")));
        }
        if !(0.0..=1.0).contains(&slip) {
            return Err(Error::config(format!("slip {slip} outside [0, 1]")));
        }
        let target_cell = grid.target;
        if matches!(reward_kind, RewardKind::Navigation { .. }) && target_cell.is_none() {
            return Err(Error::config("navigation reward requires a target cell"));
        }
        let rows = build_kernel(&grid, slip)?;
        let mut mu0 = vec![0.0; grid.num_states()];
        mu0[grid.start_state()] = 1.0;
        Ok(EnvironmentModel {
            grid,
            reward_kind,
            gamma,
            slip,
            rows,
            mu0,
            target_cell,
        })
    }

    /// The benchmark board: four rooms joined by narrow corridors.
    pub fn build_four_rooms(
        width: usize,
        height: usize,
        horizon: usize,
        reward_kind: RewardKind,
        gamma: f64,
    ) -> Result<Self> {
        let grid = GridSpec::four_rooms(width, height, horizon)?;
        EnvironmentModel::new(grid, reward_kind, gamma)
    }

    /// Replaces the initial distribution. Must be a simplex vector over the
    /// free cells (which is exactly the state index space).
    pub fn set_initial_distribution(&mut self, mu0: Vec<f64>) -> Result<()> {
        if mu0.len() != self.grid.num_states() {
            return Err(Error::validation("mu0 length does not match state count"));
        }
        check_distribution("mu0", &mu0, 1e-12)?;
        self.mu0 = mu0;
        Ok(())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn reward_kind(&self) -> &RewardKind {
        &self.reward_kind
    }

    pub fn slip(&self) -> f64 {
        self.slip
    }

    /// Content hash over geometry, dynamics, reward and discount. Datasets
    /// record it so training can refuse mismatched environments.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(u64::to_le_bytes(self.grid.width as u64));
        h.update(u64::to_le_bytes(self.grid.height as u64));
        h.update(u64::to_le_bytes(self.grid.horizon as u64));
        for c in &self.grid.walls {
            h.update(u64::to_le_bytes(c.x as u64));
            h.update(u64::to_le_bytes(c.y as u64));
        }
        h.update(u64::to_le_bytes(self.grid.start.x as u64));
        h.update(u64::to_le_bytes(self.grid.start.y as u64));
        if let Some(t) = self.target_cell {
            h.update(u64::to_le_bytes(t.x as u64));
            h.update(u64::to_le_bytes(t.y as u64));
        }
        match &self.reward_kind {
            RewardKind::Exploration => h.update([0u8]),
            RewardKind::Navigation {
                distance_scale,
                congestion_scale,
                crowd_scale,
            } => {
                h.update([1u8]);
                h.update(distance_scale.to_le_bytes());
                h.update(congestion_scale.to_le_bytes());
                h.update(crowd_scale.to_le_bytes());
            }
        }
        h.update(self.gamma.to_le_bytes());
        h.update(self.slip.to_le_bytes());
        for p in &self.mu0 {
            h.update(p.to_le_bytes());
        }
        for row in &self.rows {
            for &(s2, p) in row {
                h.update(u64::to_le_bytes(s2 as u64));
                h.update(p.to_le_bytes());
            }
        }
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn build_kernel(grid: &GridSpec, slip: f64) -> Result<Vec<Vec<(usize, f64)>>> {
    let n = grid.num_states();
    let mut rows = Vec::with_capacity(n * NUM_ACTIONS);
    for s in 0..n {
        let cell = grid.cell_of_state(s);
        for action in ACTIONS {
            // (move, probability) outcomes after slip.
            let mut outcomes: Vec<(Action, f64)> = Vec::with_capacity(3);
            match action.perpendicular() {
                Some(perp) if slip > 0.0 => {
                    outcomes.push((action, 1.0 - slip));
                    outcomes.push((perp[0], slip / 2.0));
                    outcomes.push((perp[1], slip / 2.0));
                }
                _ => outcomes.push((action, 1.0)),
            }
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(3);
            for (mv, p) in outcomes {
                if p == 0.0 {
                    continue;
                }
                // Wall collision or leaving the board keeps the agent put.
                let dest = match mv.offset(cell, grid.width, grid.height) {
                    Some(c) if grid.is_free(c) => c,
                    _ => cell,
                };
                let s2 = grid.state_index(dest).expect("destination is free");
                match row.iter_mut().find(|e| e.0 == s2) {
                    Some(e) => e.1 += p,
                    None => row.push((s2, p)),
                }
            }
            row.sort_by_key(|e| e.0);
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::config(format!("transition row ({s}, {action:?}) sums to {sum}")));
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

impl MeanFieldEnv for EnvironmentModel {
    fn num_states(&self) -> usize {
        self.grid.num_states()
    }
    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }
    fn horizon(&self) -> usize {
        self.grid.horizon
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn reward(&self, state: usize, action: usize, mu_t: &[f64]) -> f64 {
        let crowd = mu_t[state].max(MU_FLOOR).ln();
        match &self.reward_kind {
            RewardKind::Exploration => -crowd,
            RewardKind::Navigation {
                distance_scale,
                congestion_scale,
                crowd_scale,
            } => {
                let cell = self.grid.cell_of_state(state);
                let target = self.target_cell.expect("validated at construction");
                let dist = cell.distance(&target) / self.grid.diagonal();
                let movement = Action::from_index(action).map_or(1.0, Action::movement_norm);
                -distance_scale * dist - congestion_scale * mu_t[state] * movement - crowd_scale * crowd
            }
        }
    }

    fn feature_map(&self) -> FeatureMap {
        FeatureMap::GridOneHot {
            width: self.grid.width,
            height: self.grid.height,
            cells: self.grid.free_cells().iter().map(|c| (c.x, c.y)).collect(),
        }
    }
}

impl MeanFieldGame for EnvironmentModel {
    fn transition_row(&self, state: usize, action: usize) -> &[(usize, f64)] {
        &self.rows[state * NUM_ACTIONS + action]
    }
    fn initial_distribution(&self) -> &[f64] {
        &self.mu0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_rooms_13() -> EnvironmentModel {
        EnvironmentModel::build_four_rooms(13, 13, 40, RewardKind::Exploration, 0.99).unwrap()
    }

    #[test]
    fn four_rooms_shape_and_rows() {
        let env = four_rooms_13();
        assert_eq!(env.horizon(), 40);
        assert_eq!(env.num_actions(), 5);
        for s in 0..env.num_states() {
            for a in 0..5 {
                let sum: f64 = env.transition_row(s, a).iter().map(|&(_, p)| p).sum();
                assert!((sum - 1.0).abs() <= 1e-12);
            }
        }
        let mu0 = env.initial_distribution();
        assert!((mu0.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert_eq!(mu0[env.grid().start_state()], 1.0);
    }

    #[test]
    fn moving_up_from_start_stays_in_place() {
        let env = four_rooms_13();
        let start = env.grid().start_state();
        let row = env.transition_row(start, Action::Up.index());
        assert_eq!(row, &[(start, 1.0)]);
    }

    #[test]
    fn smallest_four_rooms_is_valid() {
        let env = EnvironmentModel::build_four_rooms(5, 5, 1, RewardKind::Exploration, 0.9).unwrap();
        assert_eq!(env.horizon(), 1);
    }

    #[test]
    fn too_small_is_a_configuration_error() {
        let err = EnvironmentModel::build_four_rooms(3, 3, 10, RewardKind::Exploration, 0.9);
        assert!(matches!(err, Err(crate::error::Error::Config(_))));
    }

    #[test]
    fn exploration_reward_values() {
        let env = four_rooms_13();
        let n = env.num_states();
        let mut mu = vec![0.0; n];
        mu[3] = 1.0;
        // log 1 = 0
        assert_eq!(env.reward(3, 0, &mu), 0.0);
        // -log(e^-2) = 2
        mu[3] = (-2.0f64).exp();
        assert!((env.reward(3, 0, &mu) - 2.0).abs() < 1e-12);
        // floored at states with zero mass
        assert!(env.reward(5, 0, &mu) <= -MU_FLOOR.ln() + 1e-9);
        assert!(env.reward(5, 0, &mu).is_finite());
    }

    #[test]
    fn navigation_reward_at_target_with_stay_is_zero() {
        let env =
            EnvironmentModel::build_four_rooms(13, 13, 40, RewardKind::navigation(), 0.99).unwrap();
        let target = env.grid().target_state().unwrap();
        let mut mu = vec![0.0; env.num_states()];
        mu[target] = 1.0;
        assert_eq!(env.reward(target, Action::Stay.index(), &mu), 0.0);
        // A move at the target pays the congestion penalty.
        let r_move = env.reward(target, Action::Up.index(), &mu);
        assert!((r_move - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn slip_spreads_to_perpendicular_moves() {
        let grid = GridSpec::open(3, 3, 5).unwrap();
        let env = EnvironmentModel::with_slip(grid, RewardKind::Exploration, 0.9, 0.2).unwrap();
        let center = env.grid().state_index(Cell::new(1, 1)).unwrap();
        let row = env.transition_row(center, Action::Up.index());
        let up = env.grid().state_index(Cell::new(1, 0)).unwrap();
        let left = env.grid().state_index(Cell::new(0, 1)).unwrap();
        let right = env.grid().state_index(Cell::new(2, 1)).unwrap();
        let lookup = |s: usize| row.iter().find(|e| e.0 == s).map(|e| e.1).unwrap_or(0.0);
        assert!((lookup(up) - 0.8).abs() < 1e-12);
        assert!((lookup(left) - 0.1).abs() < 1e-12);
        assert!((lookup(right) - 0.1).abs() < 1e-12);
        // Stay never slips.
        let stay_row = env.transition_row(center, Action::Stay.index());
        assert_eq!(stay_row, &[(center, 1.0)]);
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = four_rooms_13();
        let b = four_rooms_13();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = EnvironmentModel::build_four_rooms(13, 13, 40, RewardKind::Exploration, 0.95).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
