//! Option-value critic learned by intra-option Q-learning.
//!
//! The primitive table is `Q_U(s, w, a)`, the value of taking action `a`
//! while executing option `w`. Option values marginalize the intra-option
//! policy, `Q(s, w) = sum_a pi_w(a|s) Q_U(s, w, a)`, and the state value
//! marginalizes the option distribution in force at `s`.
//!
//! One container covers both the tabular case (one weight per state via
//! one-hot features) and the linear case (dense features); the arithmetic is
//! identical, only the feature vectors differ.

use crate::error::{Error, Result};
use crate::funcapprox::Features;
use crate::options::{InterestPolicyEval, OptionParams};

/// Per-(option, action) linear value functions over features.
#[derive(Debug, Clone, PartialEq)]
pub struct QUTable {
    /// Row layout: `weights[w * n_actions + a]`.
    weights: Vec<Vec<f64>>,
    n_options: usize,
    n_actions: usize,
    pub gamma: f64,
}

impl QUTable {
    pub fn new(dim: usize, n_options: usize, n_actions: usize, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("gamma {gamma} outside [0,1]")));
        }
        if dim == 0 || n_options == 0 || n_actions == 0 {
            return Err(Error::Config("QUTable dimensions must be positive".into()));
        }
        Ok(QUTable {
            weights: vec![vec![0.0; dim]; n_options * n_actions],
            n_options,
            n_actions,
            gamma,
        })
    }

    pub fn n_options(&self) -> usize {
        self.n_options
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weights_row(&self, option: usize, action: usize) -> &[f64] {
        &self.weights[option * self.n_actions + action]
    }

    pub fn weights_row_mut(&mut self, option: usize, action: usize) -> &mut Vec<f64> {
        &mut self.weights[option * self.n_actions + action]
    }

    pub fn q_u(&self, phi: &Features, option: usize, action: usize) -> f64 {
        phi.dot(&self.weights[option * self.n_actions + action])
    }

    /// `Q(s, w)`: intra-option policy expectation of `Q_U`.
    pub fn q_omega(&self, phi: &Features, option: usize, params: &OptionParams) -> f64 {
        let pi = params.action_probs(phi);
        debug_assert_eq!(pi.len(), self.n_actions);
        pi.iter()
            .enumerate()
            .map(|(a, p)| p * self.q_u(phi, option, a))
            .sum()
    }

    pub fn q_omega_all(&self, phi: &Features, options: &[OptionParams]) -> Vec<f64> {
        (0..self.n_options)
            .map(|w| self.q_omega(phi, w, &options[w]))
            .collect()
    }

    /// `V(s)`: expectation of `Q(s, w)` under the option distribution.
    pub fn v_omega(&self, phi: &Features, options: &[OptionParams], eval: &InterestPolicyEval) -> f64 {
        eval.probs
            .iter()
            .enumerate()
            .map(|(w, p)| p * self.q_omega(phi, w, &options[w]))
            .sum()
    }

    /// One-step temporal-difference error for `Q_U(s, w, a)`:
    ///
    /// ```text
    /// r + gamma (1 - term) [(1 - beta) Q(s', w) + beta max_w' Q(s', w')] - Q_U(s, w, a)
    /// ```
    ///
    /// where `beta` is option `w`'s termination probability at `s'`. When
    /// `restrict_to` is given, the max runs over that option subset only
    /// (the available set under an interest threshold); it must be nonempty.
    #[allow(clippy::too_many_arguments)]
    pub fn td_error(
        &self,
        options: &[OptionParams],
        phi: &Features,
        phi_next: &Features,
        option: usize,
        action: usize,
        reward: f64,
        terminal: bool,
        restrict_to: Option<&[usize]>,
    ) -> f64 {
        let q_sa = self.q_u(phi, option, action);
        if terminal {
            return reward - q_sa;
        }
        let beta = options[option].termination_prob(phi_next);
        let q_next = self.q_omega_all(phi_next, options);
        let continue_value = q_next[option];
        let switch_value = match restrict_to {
            Some(set) => {
                assert!(!set.is_empty(), "restricted max over an empty option set");
                set.iter().map(|&w| q_next[w]).fold(f64::NEG_INFINITY, f64::max)
            }
            None => q_next.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        };
        reward + self.gamma * ((1.0 - beta) * continue_value + beta * switch_value) - q_sa
    }

    /// Gradient step `w += alpha * delta * phi` on one (option, action) row.
    /// Rejects non-finite results so divergence surfaces as an error instead
    /// of NaN-poisoning the run.
    pub fn update(
        &mut self,
        phi: &Features,
        option: usize,
        action: usize,
        delta: f64,
        alpha: f64,
    ) -> Result<()> {
        assert!(alpha > 0.0, "critic step size must be positive");
        if !delta.is_finite() {
            return Err(Error::Diverged { stage: "critic update", quantity: "td error" });
        }
        let row = &mut self.weights[option * self.n_actions + action];
        phi.add_scaled(alpha * delta, row);
        match phi {
            Features::OneHot { index, .. } => {
                if !row[*index].is_finite() {
                    return Err(Error::Diverged { stage: "critic update", quantity: "value" });
                }
            }
            Features::Dense(_) => {
                if row.iter().any(|w| !w.is_finite()) {
                    return Err(Error::Diverged { stage: "critic update", quantity: "value" });
                }
            }
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().flatten().all(|w| w.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcapprox::SigmoidHead;

    fn hot(index: usize, dim: usize) -> Features {
        Features::OneHot { index, dim }
    }

    fn option_with_termination(n_actions: usize, dim: usize, beta_logit: f64) -> OptionParams {
        let mut o = OptionParams::init(n_actions, dim, 1.0, 0.5, false);
        o.termination = SigmoidHead::constant_fill(dim, beta_logit);
        o
    }

    #[test]
    fn q_omega_is_policy_expectation() {
        let mut q = QUTable::new(3, 2, 2, 0.9).unwrap();
        *q.weights_row_mut(1, 0) = vec![0.0, 4.0, 0.0];
        *q.weights_row_mut(1, 1) = vec![0.0, -2.0, 0.0];
        let o = OptionParams::init(2, 3, 1.0, 0.5, false); // uniform actions
        let phi = hot(1, 3);
        assert_eq!(q.q_u(&phi, 1, 0), 4.0);
        assert_eq!(q.q_omega(&phi, 1, &o), 1.0);
    }

    #[test]
    fn v_omega_weights_options_by_eval_probs() {
        let mut q = QUTable::new(2, 2, 1, 0.9).unwrap();
        *q.weights_row_mut(0, 0) = vec![10.0, 0.0];
        *q.weights_row_mut(1, 0) = vec![2.0, 0.0];
        let opts: Vec<OptionParams> =
            (0..2).map(|_| OptionParams::init(1, 2, 1.0, 0.5, false)).collect();
        let eval = InterestPolicyEval::from_parts(vec![0.9, 0.3], vec![0.5, 0.5]).unwrap();
        let phi = hot(0, 2);
        let want = eval.probs[0] * 10.0 + eval.probs[1] * 2.0;
        assert!((q.v_omega(&phi, &opts, &eval) - want).abs() < 1e-12);
    }

    #[test]
    fn td_error_hand_worked_example() {
        // Two states, one option, one action. Q_U(s0)=1, Q_U(s1)=2,
        // beta=0.25 everywhere, gamma=0.9, reward 3. Single option, so the
        // max equals the continue value and delta = 3 + 0.9*2 - 1.
        let mut q = QUTable::new(2, 1, 1, 0.9).unwrap();
        *q.weights_row_mut(0, 0) = vec![1.0, 2.0];
        let logit = (0.25f64 / 0.75).ln();
        let opts = vec![option_with_termination(1, 2, logit)];
        let d = q.td_error(&opts, &hot(0, 2), &hot(1, 2), 0, 0, 3.0, false, None);
        assert!((d - (3.0 + 0.9 * 2.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn td_error_blends_continue_and_switch() {
        // Two options with different next values; termination probability
        // mixes continuing option 0 with switching to the better option 1.
        let mut q = QUTable::new(2, 2, 1, 1.0).unwrap();
        *q.weights_row_mut(0, 0) = vec![0.0, 1.0];
        *q.weights_row_mut(1, 0) = vec![0.0, 5.0];
        let logit = (0.25f64 / 0.75).ln();
        let opts = vec![
            option_with_termination(1, 2, logit),
            option_with_termination(1, 2, logit),
        ];
        let d = q.td_error(&opts, &hot(0, 2), &hot(1, 2), 0, 0, 0.0, false, None);
        let want = 0.75 * 1.0 + 0.25 * 5.0;
        assert!((d - want).abs() < 1e-12, "delta {d} want {want}");
    }

    #[test]
    fn td_error_restricted_max_skips_excluded_options() {
        let mut q = QUTable::new(2, 3, 1, 1.0).unwrap();
        *q.weights_row_mut(0, 0) = vec![0.0, 1.0];
        *q.weights_row_mut(1, 0) = vec![0.0, 50.0];
        *q.weights_row_mut(2, 0) = vec![0.0, 2.0];
        let logit = 0.0; // beta = 0.5
        let opts: Vec<OptionParams> =
            (0..3).map(|_| option_with_termination(1, 2, logit)).collect();
        let unrestricted = q.td_error(&opts, &hot(0, 2), &hot(1, 2), 0, 0, 0.0, false, None);
        assert!((unrestricted - (0.5 * 1.0 + 0.5 * 50.0)).abs() < 1e-12);
        let restricted =
            q.td_error(&opts, &hot(0, 2), &hot(1, 2), 0, 0, 0.0, false, Some(&[0, 2]));
        assert!((restricted - (0.5 * 1.0 + 0.5 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn terminal_target_ignores_next_state_values() {
        let mut q = QUTable::new(2, 1, 1, 0.9).unwrap();
        *q.weights_row_mut(0, 0) = vec![1.5, 99.0];
        let opts = vec![option_with_termination(1, 2, 3.0)];
        let d = q.td_error(&opts, &hot(0, 2), &hot(1, 2), 0, 0, 50.0, true, None);
        assert!((d - (50.0 - 1.5)).abs() < 1e-12);
    }

    #[test]
    fn update_moves_value_toward_target() {
        let mut q = QUTable::new(2, 1, 1, 0.9).unwrap();
        let phi = hot(0, 2);
        q.update(&phi, 0, 0, 4.0, 0.25).unwrap();
        assert_eq!(q.q_u(&phi, 0, 0), 1.0);
        q.update(&phi, 0, 0, 4.0, 0.25).unwrap();
        assert_eq!(q.q_u(&phi, 0, 0), 2.0);
    }

    #[test]
    fn update_rejects_nonfinite() {
        let mut q = QUTable::new(2, 1, 1, 0.9).unwrap();
        let phi = hot(0, 2);
        assert!(q.update(&phi, 0, 0, f64::NAN, 0.1).is_err());
        assert!(q.update(&phi, 0, 0, f64::INFINITY, 0.1).is_err());
        // An overflowing write is caught after the fact too.
        let mut q2 = QUTable::new(1, 1, 1, 0.9).unwrap();
        *q2.weights_row_mut(0, 0) = vec![f64::MAX];
        assert!(q2.update(&Features::Dense(vec![f64::MAX]), 0, 0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gamma_validation() {
        assert!(QUTable::new(2, 1, 1, 1.5).is_err());
        assert!(QUTable::new(2, 1, 1, -0.1).is_err());
        assert!(QUTable::new(0, 1, 1, 0.9).is_err());
    }
}
