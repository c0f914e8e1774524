//! Game abstractions.
//!
//! Two trait layers separate what offline training may touch from what only
//! simulators and exact solvers may touch:
//!
//! * [`MeanFieldEnv`] exposes shapes and the mean-field-coupled reward
//!   function. Offline training is written against this trait, so it cannot
//!   access transition dynamics by construction.
//! * [`MeanFieldGame`] adds the transition kernel and initial distribution,
//!   as needed by flow propagation, exact solvers and online rollouts.
//!
//! [`EnvironmentModel`](crate::env::EnvironmentModel) implements both for
//! gridworlds; [`TabularGame`] is a generic finite instance used for small
//! constructed games and randomized solver checks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability floor applied inside `log mu` reward terms. Estimated
/// mean-fields can be exactly zero on states without dataset coverage.
pub const MU_FLOOR: f64 = 1e-10;

/// Reward-side view of a finite-horizon mean-field game.
pub trait MeanFieldEnv {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    /// Number of decision steps per episode; rewards accrue at t = 0..H-1.
    fn horizon(&self) -> usize;
    fn gamma(&self) -> f64;
    /// Mean-field-coupled reward r(s, a, mu_t).
    fn reward(&self, state: usize, action: usize, mu_t: &[f64]) -> f64;
    /// State/time encoding used by function-approximation Q representations.
    fn feature_map(&self) -> FeatureMap {
        FeatureMap::OneHotState {
            num_states: self.num_states(),
        }
    }
}

/// Full game: reward access plus dynamics and initial distribution.
pub trait MeanFieldGame: MeanFieldEnv {
    /// Sparse transition row p(.|s, a) as (next_state, probability) pairs.
    /// Probabilities are nonnegative and sum to 1 within 1e-12.
    fn transition_row(&self, state: usize, action: usize) -> &[(usize, f64)];
    /// Distribution over states at t = 0.
    fn initial_distribution(&self) -> &[f64];
}

/// Input encoding for MLP Q-functions. Stored in checkpoints so a network
/// can be reloaded without the originating environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureMap {
    /// one-hot(state) concatenated with t/H.
    OneHotState { num_states: usize },
    /// one-hot(x) + one-hot(y) + t/H over a grid's free cells.
    GridOneHot {
        width: usize,
        height: usize,
        /// (x, y) of each free cell, indexed by state.
        cells: Vec<(usize, usize)>,
    },
}

impl FeatureMap {
    pub fn dim(&self) -> usize {
        match self {
            FeatureMap::OneHotState { num_states } => num_states + 1,
            FeatureMap::GridOneHot { width, height, .. } => width + height + 1,
        }
    }

    pub fn num_states(&self) -> usize {
        match self {
            FeatureMap::OneHotState { num_states } => *num_states,
            FeatureMap::GridOneHot { cells, .. } => cells.len(),
        }
    }

    /// Writes the encoding of (state, t) into `out`, which must have length
    /// `self.dim()`.
    pub fn encode(&self, state: usize, t: usize, horizon: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        out.fill(0.0);
        let time = t as f64 / horizon.max(1) as f64;
        match self {
            FeatureMap::OneHotState { num_states } => {
                out[state] = 1.0;
                out[*num_states] = time;
            }
            FeatureMap::GridOneHot { width, height, cells } => {
                let (x, y) = cells[state];
                out[x] = 1.0;
                out[width + y] = 1.0;
                out[width + height] = time;
            }
        }
    }
}

/// Checks that `v` is elementwise nonnegative and sums to 1 within `tol`.
pub(crate) fn check_distribution(name: &str, v: &[f64], tol: f64) -> Result<()> {
    let mut sum = 0.0;
    for &p in v {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::validation(format!("{name} has entry {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > tol {
        return Err(Error::validation(format!("{name} sums to {sum}, not 1")));
    }
    Ok(())
}

/// Generic finite mean-field game with an explicit kernel and a table reward
/// plus an optional crowd-aversion term `-crowd_weight * ln(max(mu(s), eps))`.
#[derive(Debug, Clone)]
pub struct TabularGame {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    gamma: f64,
    mu0: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    base_reward: Vec<f64>,
    crowd_weight: f64,
}

impl TabularGame {
    pub fn new(
        horizon: usize,
        gamma: f64,
        mu0: Vec<f64>,
        rows: Vec<Vec<(usize, f64)>>,
        base_reward: Vec<f64>,
        crowd_weight: f64,
    ) -> Result<Self> {
        let num_states = mu0.len();
        if num_states == 0 {
            return Err(Error::config("game needs at least one state"));
        }
        if horizon < 1 {
            return Err(Error::config("horizon must be at least 1"));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::config(format!("gamma {gamma} outside (0, 1)")));
        }
        if rows.len() % num_states != 0 || rows.is_empty() {
            return Err(Error::config("kernel rows do not tile the state space"));
        }
        let num_actions = rows.len() / num_states;
        if base_reward.len() != num_states * num_actions {
            return Err(Error::config("reward table shape mismatch"));
        }
        check_distribution("mu0", &mu0, 1e-12)?;
        for (i, row) in rows.iter().enumerate() {
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::config(format!("kernel row {i} sums to {sum}")));
            }
            for &(s2, p) in row {
                if s2 >= num_states || p < 0.0 {
                    return Err(Error::config(format!("kernel row {i} invalid entry")));
                }
            }
        }
        Ok(TabularGame {
            num_states,
            num_actions,
            horizon,
            gamma,
            mu0,
            rows,
            base_reward,
            crowd_weight,
        })
    }

    /// Random instance with row-stochastic dense kernel and rewards in
    /// [0, reward_scale). Used by randomized solver cross-checks.
    pub fn random(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        gamma: f64,
        crowd_weight: f64,
        reward_scale: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let mut rows = Vec::with_capacity(num_states * num_actions);
        for _ in 0..num_states * num_actions {
            let raw: Vec<f64> = (0..num_states).map(|_| rng.random::<f64>() + 1e-3).collect();
            let sum: f64 = raw.iter().sum();
            let mut row: Vec<(usize, f64)> =
                raw.iter().enumerate().map(|(s2, &w)| (s2, w / sum)).collect();
            // Re-normalize exactly so the row passes the 1e-12 gate.
            let norm: f64 = row.iter().map(|&(_, p)| p).sum();
            for e in &mut row {
                e.1 /= norm;
            }
            rows.push(row);
        }
        let base_reward = (0..num_states * num_actions)
            .map(|_| rng.random::<f64>() * reward_scale)
            .collect();
        let raw0: Vec<f64> = (0..num_states).map(|_| rng.random::<f64>() + 1e-3).collect();
        let sum0: f64 = raw0.iter().sum();
        let mut mu0: Vec<f64> = raw0.into_iter().map(|w| w / sum0).collect();
        let norm0: f64 = mu0.iter().sum();
        for m in &mut mu0 {
            *m /= norm0;
        }
        TabularGame::new(horizon, gamma, mu0, rows, base_reward, crowd_weight)
            .expect("randomly generated game is valid")
    }
}

impl MeanFieldEnv for TabularGame {
    fn num_states(&self) -> usize {
        self.num_states
    }
    fn num_actions(&self) -> usize {
        self.num_actions
    }
    fn horizon(&self) -> usize {
        self.horizon
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn reward(&self, state: usize, action: usize, mu_t: &[f64]) -> f64 {
        let base = self.base_reward[state * self.num_actions + action];
        if self.crowd_weight == 0.0 {
            base
        } else {
            base - self.crowd_weight * mu_t[state].max(MU_FLOOR).ln()
        }
    }
}

impl MeanFieldGame for TabularGame {
    fn transition_row(&self, state: usize, action: usize) -> &[(usize, f64)] {
        &self.rows[state * self.num_actions + action]
    }
    fn initial_distribution(&self) -> &[f64] {
        &self.mu0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_encodings() {
        let m = FeatureMap::OneHotState { num_states: 3 };
        let mut buf = vec![0.0; m.dim()];
        m.encode(2, 1, 4, &mut buf);
        assert_eq!(buf, vec![0.0, 0.0, 1.0, 0.25]);

        let g = FeatureMap::GridOneHot {
            width: 3,
            height: 2,
            cells: vec![(0, 0), (2, 1)],
        };
        let mut buf = vec![0.0; g.dim()];
        g.encode(1, 2, 4, &mut buf);
        assert_eq!(buf, vec![0.0, 0.0, 1.0, 0.0, 1.0, 0.5]);
    }

    #[test]
    fn tabular_game_validates_inputs() {
        let rows = vec![vec![(0usize, 1.0)]];
        assert!(TabularGame::new(1, 0.9, vec![1.0], rows.clone(), vec![0.0], 0.0).is_ok());
        assert!(TabularGame::new(0, 0.9, vec![1.0], rows.clone(), vec![0.0], 0.0).is_err());
        assert!(TabularGame::new(1, 1.0, vec![1.0], rows.clone(), vec![0.0], 0.0).is_err());
        assert!(TabularGame::new(1, 0.9, vec![0.5], rows, vec![0.0], 0.0).is_err());
        let bad_rows = vec![vec![(0usize, 0.5)]];
        assert!(TabularGame::new(1, 0.9, vec![1.0], bad_rows, vec![0.0], 0.0).is_err());
    }

    #[test]
    fn crowd_term_uses_floored_log() {
        let rows = vec![vec![(0usize, 1.0)]];
        let g = TabularGame::new(1, 0.9, vec![1.0], rows, vec![0.0], 1.0).unwrap();
        assert_eq!(g.reward(0, 0, &[1.0]), 0.0);
        let r = g.reward(0, 0, &[0.0]);
        assert!(r.is_finite());
        assert!((r - (-MU_FLOOR.ln())).abs() < 1e-12);
    }
}
