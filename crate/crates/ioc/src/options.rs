//! Options and the interest-weighted policy over them.
//!
//! An option bundles an intra-option action policy (softmax), a termination
//! probability (sigmoid), and an interest function (sigmoid). The policy over
//! options reweights a base distribution by per-option interest:
//!
//! ```text
//! pi_I(w | s) = I_w(s) pi_Omega(w | s) / sum_j I_j(s) pi_Omega(j | s)
//! ```
//!
//! so options keep themselves out of regions where their interest is low.
//! The gradients of `pi_I` with respect to interest weights and base-policy
//! weights are closed forms derived from that ratio; both are exercised
//! against finite differences in `gradcheck`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::funcapprox::{Features, SigmoidHead, SoftmaxHead};

/// Parameters of a single option.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionParams {
    /// Intra-option action policy, softmax over actions.
    pub intra: SoftmaxHead,
    /// Termination probability head.
    pub termination: SigmoidHead,
    /// Interest head; high output means the option wants to start here.
    pub interest: SigmoidHead,
}

impl OptionParams {
    /// Fresh option: uniform action policy, interest 1/2 everywhere, and the
    /// given constant initial termination probability.
    ///
    /// `bias_features` says whether the feature map carries a trailing
    /// constant component; constant heads are then realized through the bias
    /// weight instead of a uniform fill.
    pub fn init(
        n_actions: usize,
        dim: usize,
        temperature: f64,
        termination_init: f64,
        bias_features: bool,
    ) -> Self {
        assert!((0.0..1.0).contains(&termination_init) && termination_init > 0.0);
        // Invert the sigmoid to find the weight producing the target value.
        let logit = (termination_init / (1.0 - termination_init)).ln();
        let termination = if bias_features {
            SigmoidHead::bias_only(dim, logit)
        } else {
            SigmoidHead::constant_fill(dim, logit)
        };
        OptionParams {
            intra: SoftmaxHead::zeros(n_actions, dim, temperature),
            termination,
            interest: SigmoidHead::zeros(dim),
        }
    }

    pub fn termination_prob(&self, phi: &Features) -> f64 {
        self.termination.value(phi)
    }

    pub fn interest_value(&self, phi: &Features) -> f64 {
        self.interest.value(phi)
    }

    pub fn action_probs(&self, phi: &Features) -> Vec<f64> {
        self.intra.probs(phi)
    }
}

/// Distribution over options before interest reweighting.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyOverOptions {
    /// Uniform over all options; never updated.
    FixedUniform,
    /// Learned softmax over option identities.
    LearnedSoftmax(SoftmaxHead),
}

impl PolicyOverOptions {
    pub fn learned(n_options: usize, dim: usize, temperature: f64) -> Self {
        PolicyOverOptions::LearnedSoftmax(SoftmaxHead::zeros(n_options, dim, temperature))
    }

    pub fn probs(&self, n_options: usize, phi: &Features) -> Vec<f64> {
        match self {
            PolicyOverOptions::FixedUniform => vec![1.0 / n_options as f64; n_options],
            PolicyOverOptions::LearnedSoftmax(head) => {
                assert_eq!(head.n_choices(), n_options);
                head.probs(phi)
            }
        }
    }
}

/// The interest-weighted option distribution at one state, with the pieces
/// it was assembled from (both are reused by the gradient formulas).
#[derive(Debug, Clone, PartialEq)]
pub struct InterestPolicyEval {
    pub probs: Vec<f64>,
    pub interests: Vec<f64>,
    pub base_probs: Vec<f64>,
}

impl InterestPolicyEval {
    /// Normalize `interest * base` into a distribution.
    ///
    /// Fails if the total mass is zero or non-finite. When every interest is
    /// the same value the ratio cancels algebraically, so the base
    /// distribution is returned unchanged; this keeps constant-interest
    /// agents bit-identical to agents with no interest reweighting at all.
    pub fn from_parts(interests: Vec<f64>, base_probs: Vec<f64>) -> Result<Self> {
        assert_eq!(interests.len(), base_probs.len());
        assert!(!interests.is_empty());
        let constant = interests.iter().all(|&i| i.to_bits() == interests[0].to_bits());
        if constant && interests[0] > 0.0 {
            return Ok(InterestPolicyEval { probs: base_probs.clone(), interests, base_probs });
        }
        let weighted: Vec<f64> = interests.iter().zip(&base_probs).map(|(i, b)| i * b).collect();
        let z: f64 = weighted.iter().sum();
        if !z.is_finite() || z <= 0.0 {
            return Err(Error::NoInitiableOption);
        }
        let probs = weighted.into_iter().map(|w| w / z).collect();
        Ok(InterestPolicyEval { probs, interests, base_probs })
    }
}

/// Evaluate the interest-weighted policy over options at one state.
pub fn interest_policy(
    options: &[OptionParams],
    pi: &PolicyOverOptions,
    phi: &Features,
) -> Result<InterestPolicyEval> {
    let interests: Vec<f64> = options.iter().map(|o| o.interest.value(phi)).collect();
    let base = pi.probs(options.len(), phi);
    InterestPolicyEval::from_parts(interests, base)
}

/// Gradient of `pi_I(target | s)` with respect to each option's interest
/// weights. Row `j` of the result is
///
/// ```text
/// pi_I(target) (1[j = target] - pi_I(j)) (1 - I_j) phi
/// ```
///
/// The sigmoid chain factor `I_j (1 - I_j)` is folded in: the `I_j` part is
/// already inside `pi_I(j)` after normalization, leaving `(1 - I_j)`.
pub fn interest_policy_grad_z(
    eval: &InterestPolicyEval,
    phi: &Features,
    target: usize,
) -> Vec<Vec<f64>> {
    let n = eval.probs.len();
    assert!(target < n);
    let dim = phi.dim();
    let mut rows = vec![vec![0.0; dim]; n];
    for (j, row) in rows.iter_mut().enumerate() {
        let ind = if j == target { 1.0 } else { 0.0 };
        let scale = eval.probs[target] * (ind - eval.probs[j]) * (1.0 - eval.interests[j]);
        phi.add_scaled(scale, row);
    }
    rows
}

/// Gradient of `pi_I(target | s)` with respect to the learned base-policy
/// weight rows. Row `m` is
///
/// ```text
/// pi_I(target) (1[m = target] - pi_I(m)) phi / temperature
/// ```
///
/// which is the usual softmax score function with the reweighted
/// probabilities substituted for the base ones. Fails on a fixed-uniform
/// base policy, which has no weights.
pub fn policy_over_options_grad(
    pi: &PolicyOverOptions,
    eval: &InterestPolicyEval,
    phi: &Features,
    target: usize,
) -> Result<Vec<Vec<f64>>> {
    let head = match pi {
        PolicyOverOptions::FixedUniform => {
            return Err(Error::Config(
                "the fixed-uniform policy over options has no learnable weights".into(),
            ))
        }
        PolicyOverOptions::LearnedSoftmax(head) => head,
    };
    let n = eval.probs.len();
    assert!(target < n);
    let dim = phi.dim();
    let mut rows = vec![vec![0.0; dim]; n];
    for (m, row) in rows.iter_mut().enumerate() {
        let ind = if m == target { 1.0 } else { 0.0 };
        let scale = eval.probs[target] * (ind - eval.probs[m]) / head.temperature;
        phi.add_scaled(scale, row);
    }
    Ok(rows)
}

/// Options whose interest clears the threshold `k`. With `k = 0` every
/// option qualifies. An empty set falls back to the single argmax-interest
/// option so the agent always has something to execute.
pub fn available_options(eval: &InterestPolicyEval, k: f64) -> Vec<usize> {
    let mut out: Vec<usize> = (0..eval.interests.len())
        .filter(|&i| eval.interests[i] >= k)
        .collect();
    if out.is_empty() {
        let argmax = eval
            .interests
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap();
        out.push(argmax);
    }
    out
}

/// Draw an option from the interest-weighted distribution restricted to the
/// available set. With `k = 0` this is a plain draw from `eval.probs`.
pub fn sample_option<R: Rng>(eval: &InterestPolicyEval, k: f64, rng: &mut R) -> Result<usize> {
    let avail = available_options(eval, k);
    let mass: f64 = avail.iter().map(|&i| eval.probs[i]).sum();
    if mass > 0.0 && mass.is_finite() {
        let u = rng.gen::<f64>() * mass;
        let mut acc = 0.0;
        for &i in &avail {
            acc += eval.probs[i];
            if u < acc {
                return Ok(i);
            }
        }
        // Rounding pushed u past the last accumulated edge.
        return Ok(*avail.last().unwrap());
    }
    // The available set can carry zero probability mass when the threshold
    // fallback picked an option whose base probability vanished. Fall back
    // to uniform over the set rather than failing the run.
    Ok(avail[rng.gen_range(0..avail.len())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense(v: &[f64]) -> Features {
        Features::Dense(v.to_vec())
    }

    fn eval(interests: &[f64], base: &[f64]) -> InterestPolicyEval {
        InterestPolicyEval::from_parts(interests.to_vec(), base.to_vec()).unwrap()
    }

    #[test]
    fn interest_policy_normalizes() {
        let e = eval(&[0.9, 0.1, 0.5], &[0.2, 0.3, 0.5]);
        let z = 0.9 * 0.2 + 0.1 * 0.3 + 0.5 * 0.5;
        assert!((e.probs[0] - 0.18 / z).abs() < 1e-15);
        assert!((e.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_interest_returns_base_bits() {
        let base = vec![0.2, 0.3, 0.5];
        let e = eval(&[0.5, 0.5, 0.5], &base);
        for (a, b) in e.probs.iter().zip(&base) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn zero_interest_excludes_option() {
        let e = eval(&[0.0, 0.7, 0.7], &[1.0 / 3.0; 3]);
        assert_eq!(e.probs[0], 0.0);
        assert!((e.probs[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn all_zero_interest_is_an_error() {
        let r = InterestPolicyEval::from_parts(vec![0.0, 0.0], vec![0.5, 0.5]);
        assert!(matches!(r, Err(Error::NoInitiableOption)));
    }

    #[test]
    fn fresh_options_give_uniform_interest_policy() {
        let opts: Vec<OptionParams> =
            (0..4).map(|_| OptionParams::init(3, 7, 1.0, 0.01, false)).collect();
        let phi = dense(&[0.3, 0.1, 0.9, 0.2, 0.5, 0.7, 0.4]);
        let e = interest_policy(&opts, &PolicyOverOptions::FixedUniform, &phi).unwrap();
        for p in &e.probs {
            assert_eq!(*p, 0.25);
        }
        for i in &e.interests {
            assert_eq!(*i, 0.5);
        }
    }

    #[test]
    fn init_hits_requested_termination_probability() {
        let phi_hot = Features::OneHot { index: 2, dim: 5 };
        let o = OptionParams::init(4, 5, 1.0, 0.0099, false);
        assert!((o.termination_prob(&phi_hot) - 0.0099).abs() < 1e-12);
        // Bias-feature variant: constant regardless of the bump components.
        let o = OptionParams::init(4, 4, 1.0, 0.0099, true);
        let a = o.termination_prob(&dense(&[0.9, 0.1, 0.4, 1.0]));
        let b = o.termination_prob(&dense(&[0.2, 0.8, 0.05, 1.0]));
        assert!((a - 0.0099).abs() < 1e-12);
        assert_eq!(a, b);
    }

    #[test]
    fn available_options_threshold_and_fallback() {
        let e = eval(&[0.9, 0.3, 0.6], &[1.0 / 3.0; 3]);
        assert_eq!(available_options(&e, 0.0), vec![0, 1, 2]);
        assert_eq!(available_options(&e, 0.5), vec![0, 2]);
        assert_eq!(available_options(&e, 0.95), vec![0], "argmax fallback");
        // Fallback tie goes to the lowest index.
        let tied = eval(&[0.4, 0.4], &[0.5, 0.5]);
        assert_eq!(available_options(&tied, 0.9), vec![0]);
    }

    #[test]
    fn sampling_respects_threshold() {
        let e = eval(&[0.9, 0.05, 0.6], &[1.0 / 3.0; 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut counts = [0usize; 3];
        for _ in 0..20_000 {
            counts[sample_option(&e, 0.5, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[1], 0, "below-threshold option was sampled");
        // Conditional ratio should match probs[0] : probs[2].
        let ratio = counts[0] as f64 / counts[2] as f64;
        let want = e.probs[0] / e.probs[2];
        assert!((ratio - want).abs() / want < 0.1, "ratio {ratio} vs {want}");
    }

    #[test]
    fn sampling_matches_distribution_without_threshold() {
        let e = eval(&[0.8, 0.2, 0.5, 0.9], &[0.1, 0.2, 0.3, 0.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 50_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_option(&e, 0.0, &mut rng).unwrap()] += 1;
        }
        for i in 0..4 {
            let f = counts[i] as f64 / n as f64;
            assert!((f - e.probs[i]).abs() < 0.01, "option {i}: {f} vs {}", e.probs[i]);
        }
    }

    #[test]
    fn grad_z_rows_have_expected_signs() {
        let phi = dense(&[0.5, 0.25]);
        let e = eval(&[0.7, 0.4, 0.2], &[1.0 / 3.0; 3]);
        let rows = interest_policy_grad_z(&e, &phi, 0);
        // Raising your own interest raises your probability; raising a
        // rival's lowers it.
        assert!(rows[0][0] > 0.0);
        assert!(rows[1][0] < 0.0 && rows[2][0] < 0.0);
        // Feature scaling is linear.
        assert!((rows[0][1] - rows[0][0] * 0.5).abs() < 1e-15);
    }

    #[test]
    fn base_policy_grad_requires_learnable_policy() {
        let phi = dense(&[1.0]);
        let e = eval(&[0.5, 0.6], &[0.5, 0.5]);
        let r = policy_over_options_grad(&PolicyOverOptions::FixedUniform, &e, &phi, 0);
        assert!(r.is_err());
        let learned = PolicyOverOptions::learned(2, 1, 1.0);
        assert!(policy_over_options_grad(&learned, &e, &phi, 0).is_ok());
    }
}
