//! Time-indexed stochastic policies.

use crate::error::{Error, Result};

/// pi_t(a | s) for t = 0..H-1, stored as a dense stack of per-timestep
/// action distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedPolicy {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl TimedPolicy {
    pub fn uniform(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        let p = 1.0 / num_actions as f64;
        TimedPolicy {
            horizon,
            num_states,
            num_actions,
            probs: vec![p; horizon * num_states * num_actions],
        }
    }

    /// Builds from a flat [t][s][a] probability table and validates every row.
    pub fn from_probs(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        if probs.len() != horizon * num_states * num_actions {
            return Err(Error::validation("policy table has wrong length"));
        }
        let pi = TimedPolicy {
            horizon,
            num_states,
            num_actions,
            probs,
        };
        pi.validate()?;
        Ok(pi)
    }

    /// A deterministic policy from per-(t, s) action choices.
    pub fn deterministic(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        choice: impl Fn(usize, usize) -> usize,
    ) -> Self {
        let mut probs = vec![0.0; horizon * num_states * num_actions];
        for t in 0..horizon {
            for s in 0..num_states {
                let a = choice(t, s);
                debug_assert!(a < num_actions);
                probs[(t * num_states + s) * num_actions + a] = 1.0;
            }
        }
        TimedPolicy {
            horizon,
            num_states,
            num_actions,
            probs,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn row(&self, t: usize, s: usize) -> &[f64] {
        let base = (t * self.num_states + s) * self.num_actions;
        &self.probs[base..base + self.num_actions]
    }

    #[inline]
    pub fn prob(&self, t: usize, s: usize, a: usize) -> f64 {
        self.probs[(t * self.num_states + s) * self.num_actions + a]
    }

    pub(crate) fn row_mut(&mut self, t: usize, s: usize) -> &mut [f64] {
        let base = (t * self.num_states + s) * self.num_actions;
        &mut self.probs[base..base + self.num_actions]
    }

    /// Every row must be nonnegative and sum to 1 within 1e-9.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.horizon {
            for s in 0..self.num_states {
                let row = self.row(t, s);
                let mut sum = 0.0;
                for &p in row {
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::validation(format!(
                            "policy row (t={t}, s={s}) has entry {p}"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::validation(format!(
                        "policy row (t={t}, s={s}) sums to {sum}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest absolute probability difference over all rows; the policy-stack
    /// distance used by mirror-descent equivalence checks.
    pub fn max_deviation(&self, other: &TimedPolicy) -> f64 {
        assert_eq!(self.probs.len(), other.probs.len(), "policy shape mismatch");
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Writes softmax(values / tau) into `out` using max-subtraction.
pub fn softmax_into(values: &[f64], tau: f64, out: &mut [f64]) {
    debug_assert!(tau > 0.0);
    debug_assert_eq!(values.len(), out.len());
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(values) {
        let e = ((v - max) / tau).exp();
        *o = e;
        sum += e;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_rows_are_valid() {
        let pi = TimedPolicy::uniform(3, 4, 5);
        pi.validate().unwrap();
        assert_eq!(pi.prob(2, 3, 4), 0.2);
    }

    #[test]
    fn from_probs_rejects_bad_rows() {
        let mut probs = vec![0.5, 0.5, 0.0, 0.0, 0.0];
        probs.extend_from_slice(&[0.3, 0.3, 0.3, 0.0, 0.0]); // sums to 0.9
        assert!(TimedPolicy::from_probs(1, 2, 5, probs).is_err());
        assert!(TimedPolicy::from_probs(2, 2, 5, vec![0.2; 5]).is_err());
    }

    #[test]
    fn softmax_of_constants_is_uniform() {
        let mut out = vec![0.0; 5];
        softmax_into(&[3.0; 5], 2.0, &mut out);
        for &p in &out {
            assert!((p - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_closed_form_row() {
        // (tau ln 2, 0, 0, 0, 0) -> (2/6, 1/6, 1/6, 1/6, 1/6)
        let tau = 7.0;
        let mut out = vec![0.0; 5];
        softmax_into(&[tau * 2.0ف64.ln(), 0.0, 0.0, 0.0, 0.0], tau, &mut out);
        assert!((out[0] - 2.0 / 6.0).abs() < 1e-12);
        for &p in &out[1..] {
            assert!((p - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_shift_invariance() {
        let q = [1.0, -0.5, 2.5, 0.0, 0.3];
        let shifted: Vec<f64> = q.iter().map(|v| v + 123.456).collect();
        let mut a = vec![0.0; 5];
        let mut b = vec![0.0; 5];
        softmax_into(&q, 1.3, &mut a);
        softmax_into(&shifted, 1.3, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
