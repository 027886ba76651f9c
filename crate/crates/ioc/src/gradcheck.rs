//! Finite-difference verification of every analytic gradient in the crate.
//!
//! Each gradient family gets a fuzzed batch of instances. For each instance
//! the analytic gradient is compared componentwise against a central
//! difference, under the relative error
//!
//! ```text
//! |analytic - fd| / max(|fd|, 1e-8)
//! ```
//!
//! Inputs are drawn away from degenerate regions. A central difference at
//! step 1e-6 carries round-off near 1e-10, so a saturated sigmoid or a
//! vanishing softmax probability would make the probe measure noise instead
//! of the gradient. Each fuzzed head is therefore built with its logit
//! pinned to a bounded window: a random vector orthogonal to the feature
//! direction (free play for the weights) plus a controlled component along
//! it (the logit). Dense features stay in [0.2, 1]; one-hot features are
//! exercised too, their zero components being exact on both sides.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::funcapprox::{Features, SigmoidHead, SoftmaxHead};
use crate::options::{
    interest_policy, interest_policy_grad_z, policy_over_options_grad, OptionParams,
    PolicyOverOptions,
};

pub const DEFAULT_FD_STEP: f64 = 1e-6;
pub const DEFAULT_FD_TOLERANCE: f64 = 1e-5;

/// Central-difference gradient of `f` at `params`.
pub fn fd_gradient(
    f: &mut dyn FnMut(&[f64]) -> f64,
    params: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    assert!(step > 0.0, "finite difference step must be positive");
    let mut x = params.to_vec();
    let mut g = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = x[i];
        x[i] = orig + step;
        let hi = f(&x);
        x[i] = orig - step;
        let lo = f(&x);
        x[i] = orig;
        if !hi.is_finite() || !lo.is_finite() {
            return Err(Error::NonFiniteProbe { component: i });
        }
        g.push((hi - lo) / (2.0 * step));
    }
    Ok(g)
}

/// Outcome of one gradient family's fuzzed batch.
#[derive(Debug, Clone)]
pub struct FDReport {
    pub family: String,
    pub instances: usize,
    pub step: f64,
    pub tolerance: f64,
    pub max_rel_error: f64,
    /// Instance and component where the worst error occurred.
    pub worst: String,
    pub pass: bool,
}

impl FDReport {
    fn from_errors(family: &str, step: f64, tolerance: f64, errors: Vec<(f64, String)>) -> Self {
        let instances = errors.len();
        let (max_rel_error, worst) = errors
            .into_iter()
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap_or((0.0, "no instances".into()));
        FDReport {
            family: family.into(),
            instances,
            step,
            tolerance,
            max_rel_error,
            worst,
            pass: max_rel_error <= tolerance,
        }
    }

    pub fn one_line(&self) -> String {
        format!(
            "{} {}: {} instances, max rel err {:.3e} (tol {:.0e}, step {:.0e}) worst at {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.family,
            self.instances,
            self.max_rel_error,
            self.tolerance,
            self.step,
            self.worst
        )
    }
}

fn rel_err(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / fd.abs().max(1e-8)
}

/// Worst relative error between an analytic gradient and its probe.
fn max_rel_err(analytic: &[f64], fd: &[f64]) -> (f64, usize) {
    assert_eq!(analytic.len(), fd.len());
    analytic
        .iter()
        .zip(fd)
        .map(|(a, f)| rel_err(*a, *f))
        .enumerate()
        .map(|(i, e)| (e, i))
        .fold((0.0, 0), |acc, cur| if cur.0 > acc.0 { cur } else { acc })
}

fn random_features<R: Rng>(rng: &mut R, dim: usize) -> Features {
    // One-hot features show up occasionally so the sparse path is probed too.
    if rng.gen_bool(0.25) {
        Features::OneHot { index: rng.gen_range(0..dim), dim }
    } else {
        Features::Dense((0..dim).map(|_| rng.gen_range(0.2..1.0)).collect())
    }
}

/// Weight vector with `w . phi` pinned to `logit`: a random draw projected
/// orthogonal to `phi`, plus the controlled component along it.
fn weights_with_logit<R: Rng>(rng: &mut R, phi: &Features, logit: f64) -> Vec<f64> {
    let d = phi.to_dense();
    let norm_sq: f64 = d.iter().map(|x| x * x).sum();
    let v: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let proj = v.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / norm_sq;
    (0..d.len())
        .map(|i| v[i] + (logit / norm_sq - proj) * d[i])
        .collect()
}

// Logit windows per head kind. Sigmoids stay off their saturated tails and
// softmax probabilities keep a floor, so every nonzero gradient component
// dominates the probe's round-off by several orders of magnitude.
const SIGMOID_LOGIT: f64 = 2.5;
const SOFTMAX_LOGIT: f64 = 1.0;
const INTEREST_LOGIT: f64 = 1.2;
const BASE_POLICY_LOGIT: f64 = 0.8;

fn random_temperature<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(0.8..2.0)
}

fn random_options<R: Rng>(
    rng: &mut R,
    n: usize,
    n_actions: usize,
    dim: usize,
    phi: &Features,
) -> Vec<OptionParams> {
    (0..n)
        .map(|_| {
            let mut o = OptionParams::init(n_actions, dim, 1.0, 0.5, false);
            let zi = rng.gen_range(-INTEREST_LOGIT..INTEREST_LOGIT);
            o.interest = SigmoidHead { weights: weights_with_logit(rng, phi, zi) };
            let zt = rng.gen_range(-SIGMOID_LOGIT..SIGMOID_LOGIT);
            o.termination = SigmoidHead { weights: weights_with_logit(rng, phi, zt) };
            for row in &mut o.intra.weights {
                let za = rng.gen_range(-SOFTMAX_LOGIT..SOFTMAX_LOGIT);
                *row = weights_with_logit(rng, phi, za);
            }
            o
        })
        .collect()
}

fn check_sigmoid(rng: &mut ChaCha8Rng, instances: usize, step: f64) -> Vec<(f64, String)> {
    (0..instances)
        .map(|inst| {
            let dim = rng.gen_range(4..13);
            let phi = random_features(rng, dim);
            let logit = rng.gen_range(-SIGMOID_LOGIT..SIGMOID_LOGIT);
            let head = SigmoidHead { weights: weights_with_logit(rng, &phi, logit) };
            let analytic = head.grad(&phi);
            let fd = fd_gradient(
                &mut |w| SigmoidHead { weights: w.to_vec() }.value(&phi),
                &head.weights,
                step,
            )
            .expect("sigmoid is everywhere finite");
            let (e, c) = max_rel_err(&analytic, &fd);
            (e, format!("instance {inst} component {c}"))
        })
        .collect()
}

fn check_softmax_log(rng: &mut ChaCha8Rng, instances: usize, step: f64) -> Vec<(f64, String)> {
    (0..instances)
        .map(|inst| {
            let choices = rng.gen_range(2..6);
            let dim = rng.gen_range(4..13);
            let t = random_temperature(rng);
            let phi = random_features(rng, dim);
            let mut head = SoftmaxHead::zeros(choices, dim, t);
            for row in &mut head.weights {
                // Pre-temperature logit, so the post-division window is fixed.
                let z = rng.gen_range(-SOFTMAX_LOGIT..SOFTMAX_LOGIT) * t;
                *row = weights_with_logit(rng, &phi, z);
            }
            let choice = rng.gen_range(0..choices);
            let analytic: Vec<f64> = head.log_prob_grad(&phi, choice).concat();
            let flat: Vec<f64> = head.weights.concat();
            let fd = fd_gradient(
                &mut |w| {
                    let rows: Vec<Vec<f64>> =
                        w.chunks(dim).map(|c| c.to_vec()).collect();
                    SoftmaxHead { weights: rows, temperature: t }.probs(&phi)[choice].ln()
                },
                &flat,
                step,
            )
            .expect("softmax log prob stays finite on bounded weights");
            let (e, c) = max_rel_err(&analytic, &fd);
            (e, format!("instance {inst} component {c}"))
        })
        .collect()
}

fn check_termination(rng: &mut ChaCha8Rng, instances: usize, step: f64) -> Vec<(f64, String)> {
    // Same sigmoid math, but exercised through the option container exactly
    // as the learner uses it for the termination ascent direction.
    (0..instances)
        .map(|inst| {
            let dim = rng.gen_range(4..13);
            let n_actions = rng.gen_range(2..5);
            let phi = random_features(rng, dim);
            let mut opt = random_options(rng, 1, n_actions, dim, &phi).remove(0);
            let analytic = opt.termination.grad(&phi);
            let base = opt.termination.weights.clone();
            let fd = fd_gradient(
                &mut |w| {
                    opt.termination.weights = w.to_vec();
                    opt.termination_prob(&phi)
                },
                &base,
                step,
            )
            .expect("termination probability is finite");
            let (e, c) = max_rel_err(&analytic, &fd);
            (e, format!("instance {inst} component {c}"))
        })
        .collect()
}

fn random_base_policy<R: Rng>(rng: &mut R, n: usize, dim: usize, phi: &Features) -> PolicyOverOptions {
    if rng.gen_bool(0.5) {
        PolicyOverOptions::FixedUniform
    } else {
        let t = random_temperature(rng);
        let mut head = SoftmaxHead::zeros(n, dim, t);
        for row in &mut head.weights {
            let z = rng.gen_range(-BASE_POLICY_LOGIT..BASE_POLICY_LOGIT) * t;
            *row = weights_with_logit(rng, phi, z);
        }
        PolicyOverOptions::LearnedSoftmax(head)
    }
}

fn check_interest_grad(rng: &mut ChaCha8Rng, instances: usize, step: f64) -> Vec<(f64, String)> {
    (0..instances)
        .map(|inst| {
            let n = rng.gen_range(2..6);
            let dim = rng.gen_range(4..13);
            let phi = random_features(rng, dim);
            let mut options = random_options(rng, n, 2, dim, &phi);
            let pi = random_base_policy(rng, n, dim, &phi);
            let target = rng.gen_range(0..n);
            let eval = interest_policy(&options, &pi, &phi).expect("positive interests");
            let analytic: Vec<f64> = interest_policy_grad_z(&eval, &phi, target).concat();
            // Flatten all interest weights into one parameter vector.
            let flat: Vec<f64> = options.iter().flat_map(|o| o.interest.weights.clone()).collect();
            let fd = fd_gradient(
                &mut |w| {
                    for (j, opt) in options.iter_mut().enumerate() {
                        opt.interest.weights = w[j * dim..(j + 1) * dim].to_vec();
                    }
                    interest_policy(&options, &pi, &phi).unwrap().probs[target]
                },
                &flat,
                step,
            )
            .expect("interest policy is finite on bounded weights");
            let (e, c) = max_rel_err(&analytic, &fd);
            (e, format!("instance {inst} component {c}"))
        })
        .collect()
}

fn check_base_policy_grad(rng: &mut ChaCha8Rng, instances: usize, step: f64) -> Vec<(f64, String)> {
    (0..instances)
        .map(|inst| {
            let n = rng.gen_range(2..6);
            let dim = rng.gen_range(4..13);
            let phi = random_features(rng, dim);
            let options = random_options(rng, n, 2, dim, &phi);
            let t = random_temperature(rng);
            let mut head = SoftmaxHead::zeros(n, dim, t);
            for row in &mut head.weights {
                let z = rng.gen_range(-BASE_POLICY_LOGIT..BASE_POLICY_LOGIT) * t;
                *row = weights_with_logit(rng, &phi, z);
            }
            let target = rng.gen_range(0..n);
            let pi = PolicyOverOptions::LearnedSoftmax(head.clone());
            let eval = interest_policy(&options, &pi, &phi).expect("positive interests");
            let analytic: Vec<f64> =
                policy_over_options_grad(&pi, &eval, &phi, target).unwrap().concat();
            let flat: Vec<f64> = head.weights.concat();
            let fd = fd_gradient(
                &mut |w| {
                    let rows: Vec<Vec<f64>> = w.chunks(dim).map(|c| c.to_vec()).collect();
                    let pi = PolicyOverOptions::LearnedSoftmax(SoftmaxHead {
                        weights: rows,
                        temperature: t,
                    });
                    interest_policy(&options, &pi, &phi).unwrap().probs[target]
                },
                &flat,
                step,
            )
            .expect("reweighted policy is finite on bounded weights");
            let (e, c) = max_rel_err(&analytic, &fd);
            (e, format!("instance {inst} component {c}"))
        })
        .collect()
}

/// Run every gradient family. Deterministic in `seed`.
pub fn check_all(seed: u64, instances: usize, tolerance: f64, step: f64) -> Vec<FDReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let families: [(&str, fn(&mut ChaCha8Rng, usize, f64) -> Vec<(f64, String)>); 5] = [
        ("sigmoid_grad", check_sigmoid),
        ("softmax_log_prob_grad", check_softmax_log),
        ("termination_grad", check_termination),
        ("interest_policy_grad_z", check_interest_grad),
        ("policy_over_options_grad", check_base_policy_grad),
    ];
    families
        .iter()
        .map(|(name, f)| {
            let errors = f(&mut rng, instances, step);
            FDReport::from_errors(name, step, tolerance, errors)
        })
        .collect()
}

/// CSV rendering of a report batch: one row per family.
pub fn report_csv(reports: &[FDReport]) -> String {
    let mut out = String::from("family,instances,step,tolerance,max_rel_error,pass,worst\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.family, r.instances, r.step, r.tolerance, r.max_rel_error, r.pass, r.worst
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_gradient_quadratic_oracle() {
        // f(x) = sum i * x_i^2 has gradient 2 i x_i; central differences are
        // exact for quadratics up to round-off.
        let x = vec![0.5, -1.25, 2.0];
        let mut f = |v: &[f64]| v.iter().enumerate().map(|(i, x)| i as f64 * x * x).sum();
        let g = fd_gradient(&mut f, &x, 1e-6).unwrap();
        let want = [0.0, -2.5, 8.0];
        for i in 0..3 {
            assert!((g[i] - want[i]).abs() < 1e-7, "component {i}: {} vs {}", g[i], want[i]);
        }
    }

    #[test]
    fn fd_gradient_reports_nonfinite_probe() {
        // The low probe at 5e-7 - 1e-6 lands on a negative argument.
        let mut f = |v: &[f64]| v[0].ln();
        let r = fd_gradient(&mut f, &[5e-7], 1e-6);
        assert!(matches!(r, Err(Error::NonFiniteProbe { component: 0 })));
    }

    #[test]
    fn fd_gradient_restores_params_between_components() {
        let x = vec![1.0, 2.0];
        let mut calls = Vec::new();
        let mut f = |v: &[f64]| {
            calls.push(v.to_vec());
            v[0] * v[1]
        };
        let g = fd_gradient(&mut f, &x, 1e-6).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-6);
        assert!((g[1] - 1.0).abs() < 1e-6);
        // Component 1 probes must see component 0 back at its base value.
        assert_eq!(calls[2][0], 1.0);
        assert_eq!(calls[3][0], 1.0);
    }

    #[test]
    fn small_batch_passes_default_tolerance() {
        for r in check_all(42, 25, DEFAULT_FD_TOLERANCE, DEFAULT_FD_STEP) {
            assert!(r.pass, "{}", r.one_line());
        }
    }

    #[test]
    fn zero_tolerance_fails() {
        let reports = check_all(42, 5, 0.0, DEFAULT_FD_STEP);
        assert!(reports.iter().any(|r| !r.pass));
    }

    #[test]
    fn reports_are_deterministic_in_seed() {
        let a = check_all(7, 10, 1e-5, 1e-6);
        let b = check_all(7, 10, 1e-5, 1e-6);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.max_rel_error, y.max_rel_error);
            assert_eq!(x.worst, y.worst);
        }
    }
}
