//! The option-critic learner, with and without learnable interests.
//!
//! One step of the loop: the executing option picks an action, the
//! environment moves, the option decides whether to terminate at the new
//! state, and on termination a successor option is drawn from the
//! interest-weighted policy. The critic then takes one intra-option
//! Q-learning step, and the actors (intra-option policies, terminations,
//! interests, optionally the base policy over options) take one ascent step
//! each. All actor directions are computed from a snapshot taken right after
//! the critic update, then applied together.
//!
//! The plain option-critic baseline is the same loop with interests frozen at
//! their 1/2 initialization; the interest reweighting then cancels exactly
//! and the two agents follow bit-identical trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::critic::QUTable;
use crate::env::{EnvState, Environment, TransferOutcome};
use crate::error::{Error, Result};
use crate::funcapprox::{FeatureMap, Features};
use crate::options::{
    available_options, interest_policy, sample_option, InterestPolicyEval, OptionParams,
    PolicyOverOptions,
};

/// Which agent variant to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    /// Learnable interests.
    Ioc,
    /// Interests frozen at 1/2; the classic baseline.
    Oc,
}

impl AgentKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ioc" => Ok(AgentKind::Ioc),
            "oc" => Ok(AgentKind::Oc),
            other => Err(Error::Config(format!("unknown agent '{other}' (want ioc|oc)"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AgentKind::Ioc => "ioc",
            AgentKind::Oc => "oc",
        }
    }
}

/// Base policy over options.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    FixedUniform,
    LearnedSoftmax,
}

impl PolicyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(PolicyKind::FixedUniform),
            "softmax" => Ok(PolicyKind::LearnedSoftmax),
            other => Err(Error::Config(format!("unknown policy '{other}' (want uniform|softmax)"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::FixedUniform => "uniform",
            PolicyKind::LearnedSoftmax => "softmax",
        }
    }
}

/// When the critic's switch target maxes over the available set only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestrictMax {
    /// Restrict exactly when the interest threshold is positive.
    Auto,
    Always,
    Never,
}

impl RestrictMax {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(RestrictMax::Auto),
            "always" => Ok(RestrictMax::Always),
            "never" => Ok(RestrictMax::Never),
            other => Err(Error::Config(format!(
                "unknown restrict_max '{other}' (want auto|always|never)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RestrictMax::Auto => "auto",
            RestrictMax::Always => "always",
            RestrictMax::Never => "never",
        }
    }

    fn active(&self, threshold_k: f64) -> bool {
        match self {
            RestrictMax::Auto => threshold_k > 0.0,
            RestrictMax::Always => true,
            RestrictMax::Never => false,
        }
    }
}

/// Everything a training run needs besides the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub agent: AgentKind,
    pub policy: PolicyKind,
    pub n_options: usize,
    pub temperature: f64,
    pub gamma: f64,
    /// Critic step size.
    pub alpha: f64,
    /// Intra-option policy step size.
    pub alpha_theta: f64,
    /// Termination step size.
    pub alpha_nu: f64,
    /// Interest step size. Zero freezes interests without changing anything
    /// else, which is how the baseline-equivalence check is phrased.
    pub alpha_z: f64,
    /// Base policy-over-options step size (softmax policies only).
    pub alpha_omega: f64,
    pub episodes: usize,
    pub max_steps: usize,
    /// Interest threshold: options with interest below `k` are unavailable.
    pub threshold_k: f64,
    pub restrict_max: RestrictMax,
    /// Subtract `Q(s, w)` from the intra-option policy target.
    pub baseline: bool,
    /// Initial termination probability, constant over states.
    pub termination_init: f64,
    /// Weight actor updates by `gamma^t` within the episode.
    pub gamma_t_weighting: bool,
    pub seed: u64,
    /// Deactivate the most-visited goal just before this episode index.
    pub transfer_at: Option<usize>,
    /// Keep a parameter snapshot every this many episodes.
    pub snapshot_every: Option<usize>,
    /// Record the full (option, action, state) trajectory.
    pub record_trace: bool,
}

impl Default for LearnerConfig {
    /// Tabular defaults, sized for the four-rooms task.
    fn default() -> Self {
        LearnerConfig {
            agent: AgentKind::Ioc,
            policy: PolicyKind::FixedUniform,
            n_options: 4,
            temperature: 1.0,
            gamma: 0.9,
            alpha: 0.25,
            alpha_theta: 0.25,
            alpha_nu: 0.15,
            alpha_z: 0.05,
            alpha_omega: 0.05,
            episodes: 500,
            max_steps: 2000,
            threshold_k: 0.0,
            restrict_max: RestrictMax::Auto,
            baseline: false,
            termination_init: 0.0099,
            gamma_t_weighting: false,
            seed: 0,
            transfer_at: None,
            snapshot_every: None,
            record_trace: false,
        }
    }
}

impl LearnerConfig {
    /// Defaults for the point-mass maze: two options, a learned base policy,
    /// and step sizes scaled down for dense features (the RBF feature norm
    /// is near five, not one).
    pub fn tmaze_preset() -> Self {
        LearnerConfig {
            n_options: 2,
            policy: PolicyKind::LearnedSoftmax,
            gamma: 0.99,
            alpha: 0.05,
            alpha_theta: 0.05,
            alpha_nu: 0.03,
            alpha_z: 0.02,
            alpha_omega: 0.02,
            episodes: 300,
            max_steps: 500,
            ..LearnerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_options == 0 {
            return Err(Error::Config("need at least one option".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} outside [0,1]", self.gamma)));
        }
        if self.alpha <= 0.0 {
            return Err(Error::Config("critic step size must be positive".into()));
        }
        // Actor rates may be zero (frozen heads) but never negative.
        for (name, v) in [
            ("alpha_theta", self.alpha_theta),
            ("alpha_nu", self.alpha_nu),
            ("alpha_z", self.alpha_z),
            ("alpha_omega", self.alpha_omega),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite and nonnegative")));
            }
        }
        if self.temperature <= 0.0 {
            return Err(Error::Config("temperature must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold_k) {
            return Err(Error::Config(format!(
                "threshold_k {} outside [0,1]",
                self.threshold_k
            )));
        }
        if self.termination_init <= 0.0 || self.termination_init >= 1.0 {
            return Err(Error::Config("termination_init must lie strictly inside (0,1)".into()));
        }
        if self.episodes == 0 || self.max_steps == 0 {
            return Err(Error::Config("episodes and max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// The learnable half of an agent: its options and base policy over them.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentParams {
    pub options: Vec<OptionParams>,
    pub pi_omega: PolicyOverOptions,
}

impl AgentParams {
    pub fn init(cfg: &LearnerConfig, n_actions: usize, map: &FeatureMap) -> Self {
        let dim = map.dim();
        let bias = map.has_bias();
        let options = (0..cfg.n_options)
            .map(|_| OptionParams::init(n_actions, dim, cfg.temperature, cfg.termination_init, bias))
            .collect();
        let pi_omega = match cfg.policy {
            PolicyKind::FixedUniform => PolicyOverOptions::FixedUniform,
            PolicyKind::LearnedSoftmax => PolicyOverOptions::learned(cfg.n_options, dim, cfg.temperature),
        };
        AgentParams { options, pi_omega }
    }

    /// Every learnable weight, flattened in a stable order.
    pub fn flat_weights(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for o in &self.options {
            for row in &o.intra.weights {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(&o.termination.weights);
            out.extend_from_slice(&o.interest.weights);
        }
        if let PolicyOverOptions::LearnedSoftmax(head) = &self.pi_omega {
            for row in &head.weights {
                out.extend_from_slice(row);
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.flat_weights().iter().all(|w| w.is_finite())
    }

    /// Per-option interest at one state.
    pub fn interests(&self, phi: &Features) -> Vec<f64> {
        self.options.iter().map(|o| o.interest.value(phi)).collect()
    }
}

/// Snapshot quantities one improvement step needs.
pub struct StepCtx<'a> {
    pub phi: &'a Features,
    pub phi_next: &'a Features,
    pub option: usize,
    pub action: usize,
    /// Option in force after the (possible) termination at the next state.
    pub next_option: usize,
    pub next_eval: &'a InterestPolicyEval,
    /// `gamma^t` when time-weighting is on, else 1: scales the intra-option
    /// policy step, which concerns the current state.
    pub weight_now: f64,
    /// One discount later: scales termination, interest, and base-policy
    /// steps, which all concern the next state.
    pub weight_next: f64,
}

/// One ascent step for every actor. Directions are evaluated against the
/// current parameters first, then applied, so later updates in the list do
/// not see earlier ones.
pub fn improvement_step(
    params: &mut AgentParams,
    qu: &QUTable,
    ctx: &StepCtx,
    cfg: &LearnerConfig,
) -> Result<()> {
    let w = ctx.option;
    let div = |quantity| Error::Diverged { stage: "improvement step", quantity };

    // Intra-option policy: push log pi_w(a|s) along Q_U(s, w, a).
    let q_u_sa = qu.q_u(ctx.phi, w, ctx.action);
    let baseline = if cfg.baseline { qu.q_omega(ctx.phi, w, &params.options[w]) } else { 0.0 };
    let coef_theta = cfg.alpha_theta * ctx.weight_now * (q_u_sa - baseline);

    // Termination: grow beta where the option is worse than the state value.
    let q_next = qu.q_omega_all(ctx.phi_next, &params.options);
    let v_next = ctx
        .next_eval
        .probs
        .iter()
        .zip(&q_next)
        .map(|(p, q)| p * q)
        .sum::<f64>();
    let advantage = q_next[w] - v_next;
    let coef_nu = -cfg.alpha_nu * ctx.weight_next * advantage;

    // Interests and base policy: push pi_I(next_option | s') along its value,
    // weighted by the probability this step was an option boundary at all.
    let beta_next = params.options[w].termination_prob(ctx.phi_next);
    let boundary_value = beta_next * q_next[ctx.next_option];
    let coef_z = cfg.alpha_z * ctx.weight_next * boundary_value;
    let coef_pi = cfg.alpha_omega * ctx.weight_next * boundary_value;

    if !coef_theta.is_finite() {
        return Err(div("intra-option policy step"));
    }
    if !coef_nu.is_finite() {
        return Err(div("termination step"));
    }
    if !coef_z.is_finite() || !coef_pi.is_finite() {
        return Err(div("interest step"));
    }

    params.options[w].intra.step_log_prob(ctx.phi, ctx.action, coef_theta);
    params.options[w].termination.add_scaled_grad(ctx.phi_next, coef_nu);

    if cfg.agent == AgentKind::Ioc {
        let probs = &ctx.next_eval.probs;
        let interests = &ctx.next_eval.interests;
        let p_target = probs[ctx.next_option];
        for (j, opt) in params.options.iter_mut().enumerate() {
            let ind = if j == ctx.next_option { 1.0 } else { 0.0 };
            let scale = p_target * (ind - probs[j]) * (1.0 - interests[j]);
            opt.interest.add_scaled(ctx.phi_next, coef_z * scale);
        }
    }

    if let PolicyOverOptions::LearnedSoftmax(head) = &mut params.pi_omega {
        let probs = &ctx.next_eval.probs;
        let p_target = probs[ctx.next_option];
        let t = head.temperature;
        for (m, row) in head.weights.iter_mut().enumerate() {
            let ind = if m == ctx.next_option { 1.0 } else { 0.0 };
            let scale = p_target * (ind - probs[m]) / t;
            ctx.phi_next.add_scaled(coef_pi * scale, row);
        }
    }

    Ok(())
}

/// Draw from a categorical distribution by cumulative mass.
fn sample_categorical<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u = rng.gen::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// What one episode produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub steps: usize,
    pub ret: f64,
    pub discounted_return: f64,
    /// True if the episode ended at a goal rather than the step cap.
    pub reached_goal: bool,
    /// Option terminations sampled at non-terminal states.
    pub option_switches: usize,
    /// Steps executed under each option.
    pub option_steps: Vec<u64>,
}

/// One recorded step, for replay comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub episode: usize,
    pub option: usize,
    pub action: usize,
    pub next_state: EnvState,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

/// Play and learn one episode.
#[allow(clippy::too_many_arguments)]
pub fn run_episode(
    env: &mut dyn Environment,
    map: &FeatureMap,
    params: &mut AgentParams,
    qu: &mut QUTable,
    cfg: &LearnerConfig,
    episode: usize,
    rng: &mut ChaCha8Rng,
    goal_visits: &mut [u64],
    mut trace: Option<&mut Trace>,
) -> Result<EpisodeMetrics> {
    let s0 = env.reset(rng);
    let mut phi = map.features(&s0);
    let start_eval = interest_policy(&params.options, &params.pi_omega, &phi)?;
    let mut option = sample_option(&start_eval, cfg.threshold_k, rng)?;

    let mut metrics = EpisodeMetrics {
        episode,
        steps: 0,
        ret: 0.0,
        discounted_return: 0.0,
        reached_goal: false,
        option_switches: 0,
        option_steps: vec![0; cfg.n_options],
    };
    let mut discount = 1.0;
    let restrict_active = cfg.restrict_max.active(cfg.threshold_k);

    loop {
        let action_probs = params.options[option].action_probs(&phi);
        let action = sample_categorical(&action_probs, rng);
        let tr = env.step(action, rng);
        let phi_next = map.features(&tr.next_state);

        // Option boundary: does the executing option let go at s'?
        let beta = params.options[option].termination_prob(&phi_next);
        let terminated = rng.gen::<f64>() < beta;
        let next_eval = interest_policy(&params.options, &params.pi_omega, &phi_next)?;
        let next_option = if terminated {
            if !tr.terminal {
                metrics.option_switches += 1;
            }
            sample_option(&next_eval, cfg.threshold_k, rng)?
        } else {
            option
        };

        // Critic step.
        let restrict_set;
        let restrict = if restrict_active {
            restrict_set = available_options(&next_eval, cfg.threshold_k);
            Some(restrict_set.as_slice())
        } else {
            None
        };
        let delta = qu.td_error(
            &params.options,
            &phi,
            &phi_next,
            option,
            action,
            tr.reward,
            tr.terminal,
            restrict,
        );
        qu.update(&phi, option, action, delta, cfg.alpha)?;

        // Actor steps.
        let (weight_now, weight_next) = if cfg.gamma_t_weighting {
            (discount, discount * cfg.gamma)
        } else {
            (1.0, 1.0)
        };
        improvement_step(
            params,
            qu,
            &StepCtx {
                phi: &phi,
                phi_next: &phi_next,
                option,
                action,
                next_option,
                next_eval: &next_eval,
                weight_now,
                weight_next,
            },
            cfg,
        )?;

        metrics.steps += 1;
        metrics.ret += tr.reward;
        metrics.discounted_return += discount * tr.reward;
        metrics.option_steps[option] += 1;
        discount *= cfg.gamma;
        if let Some(t) = trace.as_deref_mut() {
            t.steps.push(TraceStep { episode, option, action, next_state: tr.next_state });
        }

        if tr.terminal {
            metrics.reached_goal = true;
            if let Some(g) = tr.goal {
                goal_visits[g] += 1;
            }
            break;
        }
        if metrics.steps >= cfg.max_steps {
            break;
        }
        phi = phi_next;
        option = next_option;
    }
    Ok(metrics)
}

/// Deactivate the most-visited goal. Environments without removable goals
/// warn and continue; a maze without two active goals is an error.
pub fn transfer_switch(
    env: &mut dyn Environment,
    goal_visits: &[u64],
) -> Result<Option<usize>> {
    match env.apply_transfer(goal_visits)? {
        TransferOutcome::Removed(i) => Ok(Some(i)),
        TransferOutcome::NotSupported => {
            eprintln!(
                "warning: transfer switch requested on '{}', which has no removable goals; continuing",
                env.name()
            );
            Ok(None)
        }
    }
}

/// Record of the transfer switch during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransferEvent {
    pub episode: usize,
    pub removed: Option<usize>,
}

/// Per-run rollup.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub seed: u64,
    pub episodes: Vec<EpisodeMetrics>,
    pub goal_visits: Vec<u64>,
    pub transfer: Option<TransferEvent>,
}

/// A mid-run parameter snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub after_episode: usize,
    pub params: AgentParams,
}

/// Everything `train` hands back.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub metrics: RunMetrics,
    pub params: AgentParams,
    pub critic: QUTable,
    pub snapshots: Vec<Snapshot>,
    pub trace: Option<Trace>,
}

/// Run a full training job on one environment with one seed.
pub fn train(env: &mut dyn Environment, cfg: &LearnerConfig) -> Result<TrainResult> {
    cfg.validate()?;
    let map = env.feature_map().clone();
    let n_actions = env.num_actions();
    if n_actions == 0 {
        return Err(Error::Config("environment exposes no actions".into()));
    }
    let mut params = AgentParams::init(cfg, n_actions, &map);
    let mut qu = QUTable::new(map.dim(), cfg.n_options, n_actions, cfg.gamma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut goal_visits = vec![0u64; env.num_goals()];
    let mut trace = cfg.record_trace.then(Trace::default);
    let mut episodes = Vec::with_capacity(cfg.episodes);
    let mut snapshots = Vec::new();
    let mut transfer = None;

    for ep in 0..cfg.episodes {
        if cfg.transfer_at == Some(ep) {
            let removed = transfer_switch(env, &goal_visits)?;
            transfer = Some(TransferEvent { episode: ep, removed });
        }
        let m = run_episode(env, &map, &mut params, &mut qu, cfg, ep, &mut rng, &mut goal_visits, trace.as_mut())?;
        episodes.push(m);
        if let Some(every) = cfg.snapshot_every {
            if every > 0 && (ep + 1) % every == 0 {
                snapshots.push(Snapshot { after_episode: ep, params: params.clone() });
            }
        }
        if !params.all_finite() {
            return Err(Error::Diverged { stage: "training", quantity: "agent parameters" });
        }
        if !qu.all_finite() {
            return Err(Error::Diverged { stage: "training", quantity: "critic weights" });
        }
    }

    Ok(TrainResult {
        metrics: RunMetrics { seed: cfg.seed, episodes, goal_visits, transfer },
        params,
        critic: qu,
        snapshots,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{FourRooms, GridSpec, TMaze};

    fn tiny_grid() -> FourRooms {
        let map = "#####\n#..G#\n#...#\n#####";
        FourRooms::new(GridSpec::from_map_str(map, 0.1, 1.0, 0.0).unwrap())
    }

    fn quick_cfg() -> LearnerConfig {
        LearnerConfig {
            episodes: 20,
            max_steps: 200,
            n_options: 2,
            seed: 5,
            ..LearnerConfig::default()
        }
    }

    #[test]
    fn config_validation_catches_bad_values() {
        let ok = LearnerConfig::default();
        assert!(ok.validate().is_ok());
        assert!(LearnerConfig { gamma: 1.2, ..ok.clone() }.validate().is_err());
        assert!(LearnerConfig { alpha: 0.0, ..ok.clone() }.validate().is_err());
        assert!(LearnerConfig { alpha_nu: -0.1, ..ok.clone() }.validate().is_err());
        assert!(LearnerConfig { n_options: 0, ..ok.clone() }.validate().is_err());
        assert!(LearnerConfig { threshold_k: 1.5, ..ok.clone() }.validate().is_err());
        assert!(LearnerConfig { termination_init: 0.0, ..ok.clone() }.validate().is_err());
        // Zero interest rate is explicitly allowed: it freezes interests.
        assert!(LearnerConfig { alpha_z: 0.0, ..ok }.validate().is_ok());
    }

    #[test]
    fn fresh_agent_params_are_exactly_neutral() {
        let map = FeatureMap::one_hot(12);
        let cfg = LearnerConfig { n_options: 3, ..LearnerConfig::default() };
        let params = AgentParams::init(&cfg, 4, &map);
        let phi = Features::OneHot { index: 7, dim: 12 };
        for o in &params.options {
            assert_eq!(o.interest.value(&phi), 0.5);
            assert!((o.termination_prob(&phi) - 0.0099).abs() < 1e-12);
            for p in o.action_probs(&phi) {
                assert_eq!(p, 0.25);
            }
        }
    }

    #[test]
    fn improvement_raises_probability_of_valuable_action() {
        let map = FeatureMap::one_hot(4);
        let cfg = LearnerConfig { n_options: 2, ..LearnerConfig::default() };
        let mut params = AgentParams::init(&cfg, 3, &map);
        let mut qu = QUTable::new(4, 2, 3, 0.9).unwrap();
        let phi = Features::OneHot { index: 1, dim: 4 };
        let phi_next = Features::OneHot { index: 2, dim: 4 };
        // Make action 2 of option 0 look great at state 1.
        qu.update(&phi, 0, 2, 8.0, 0.25).unwrap();
        let before = params.options[0].action_probs(&phi)[2];
        let next_eval =
            interest_policy(&params.options, &params.pi_omega, &phi_next).unwrap();
        improvement_step(
            &mut params,
            &qu,
            &StepCtx {
                phi: &phi,
                phi_next: &phi_next,
                option: 0,
                action: 2,
                next_option: 0,
                next_eval: &next_eval,
                weight_now: 1.0,
                weight_next: 1.0,
            },
            &cfg,
        )
        .unwrap();
        let after = params.options[0].action_probs(&phi)[2];
        assert!(after > before, "{after} <= {before}");
    }

    #[test]
    fn termination_rises_where_option_is_weak() {
        let map = FeatureMap::one_hot(4);
        let cfg = LearnerConfig { n_options: 2, termination_init: 0.5, ..LearnerConfig::default() };
        let mut params = AgentParams::init(&cfg, 2, &map);
        let mut qu = QUTable::new(4, 2, 2, 0.9).unwrap();
        let phi = Features::OneHot { index: 0, dim: 4 };
        let phi_next = Features::OneHot { index: 1, dim: 4 };
        // Option 1 is clearly better at the next state, so option 0 should
        // become more likely to terminate there.
        qu.update(&phi_next, 1, 0, 20.0, 0.25).unwrap();
        qu.update(&phi_next, 1, 1, 20.0, 0.25).unwrap();
        let before = params.options[0].termination_prob(&phi_next);
        let next_eval =
            interest_policy(&params.options, &params.pi_omega, &phi_next).unwrap();
        improvement_step(
            &mut params,
            &qu,
            &StepCtx {
                phi: &phi,
                phi_next: &phi_next,
                option: 0,
                action: 0,
                next_option: 1,
                next_eval: &next_eval,
                weight_now: 1.0,
                weight_next: 1.0,
            },
            &cfg,
        )
        .unwrap();
        let after = params.options[0].termination_prob(&phi_next);
        assert!(after > before, "{after} <= {before}");
    }

    #[test]
    fn interest_moves_toward_valuable_successor_option() {
        let map = FeatureMap::one_hot(4);
        let cfg = LearnerConfig { n_options: 2, termination_init: 0.5, ..LearnerConfig::default() };
        let mut params = AgentParams::init(&cfg, 2, &map);
        let mut qu = QUTable::new(4, 2, 2, 0.9).unwrap();
        let phi = Features::OneHot { index: 0, dim: 4 };
        let phi_next = Features::OneHot { index: 1, dim: 4 };
        // The successor option is valuable at s'.
        qu.update(&phi_next, 1, 0, 10.0, 0.25).unwrap();
        qu.update(&phi_next, 1, 1, 10.0, 0.25).unwrap();
        let before = params.options[1].interest.value(&phi_next);
        let rival_before = params.options[0].interest.value(&phi_next);
        let next_eval =
            interest_policy(&params.options, &params.pi_omega, &phi_next).unwrap();
        improvement_step(
            &mut params,
            &qu,
            &StepCtx {
                phi: &phi,
                phi_next: &phi_next,
                option: 0,
                action: 0,
                next_option: 1,
                next_eval: &next_eval,
                weight_now: 1.0,
                weight_next: 1.0,
            },
            &cfg,
        )
        .unwrap();
        assert!(params.options[1].interest.value(&phi_next) > before);
        assert!(params.options[0].interest.value(&phi_next) < rival_before);
    }

    #[test]
    fn oc_agent_never_moves_interests() {
        let mut env = tiny_grid();
        let cfg = LearnerConfig { agent: AgentKind::Oc, ..quick_cfg() };
        let result = train(&mut env, &cfg).unwrap();
        for o in &result.params.options {
            assert!(o.interest.weights.iter().all(|&w| w == 0.0));
        }
    }

    #[test]
    fn same_seed_reproduces_bitwise() {
        let cfg = quick_cfg();
        let a = train(&mut tiny_grid(), &cfg).unwrap();
        let b = train(&mut tiny_grid(), &cfg).unwrap();
        assert_eq!(a.metrics, b.metrics);
        let wa = a.params.flat_weights();
        let wb = b.params.flat_weights();
        for (x, y) in wa.iter().zip(&wb) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let a = train(&mut tiny_grid(), &quick_cfg()).unwrap();
        let b = train(&mut tiny_grid(), &LearnerConfig { seed: 6, ..quick_cfg() }).unwrap();
        assert_ne!(a.metrics, b.metrics);
    }

    #[test]
    fn trace_records_every_step() {
        let cfg = LearnerConfig { record_trace: true, ..quick_cfg() };
        let r = train(&mut tiny_grid(), &cfg).unwrap();
        let total: usize = r.metrics.episodes.iter().map(|e| e.steps).sum();
        assert_eq!(r.trace.unwrap().steps.len(), total);
    }

    #[test]
    fn episode_metrics_accounting() {
        let cfg = quick_cfg();
        let r = train(&mut tiny_grid(), &cfg).unwrap();
        for e in &r.metrics.episodes {
            assert!(e.steps >= 1 && e.steps <= cfg.max_steps);
            let used: u64 = e.option_steps.iter().sum();
            assert_eq!(used, e.steps as u64);
            if e.reached_goal {
                assert_eq!(e.ret, 1.0);
            }
        }
        let reached = r.metrics.episodes.iter().filter(|e| e.reached_goal).count() as u64;
        assert_eq!(r.metrics.goal_visits[0], reached);
    }

    #[test]
    fn snapshots_arrive_on_schedule() {
        let cfg = LearnerConfig { snapshot_every: Some(5), ..quick_cfg() };
        let r = train(&mut tiny_grid(), &cfg).unwrap();
        assert_eq!(r.snapshots.len(), 4);
        assert_eq!(r.snapshots[0].after_episode, 4);
    }

    #[test]
    fn transfer_on_grid_warns_and_continues() {
        let mut env = tiny_grid();
        let cfg = LearnerConfig { transfer_at: Some(3), ..quick_cfg() };
        let r = train(&mut env, &cfg).unwrap();
        let t = r.metrics.transfer.unwrap();
        assert_eq!(t.episode, 3);
        assert_eq!(t.removed, None);
    }

    #[test]
    fn transfer_on_maze_removes_most_visited() {
        let mut env = TMaze::standard();
        let cfg = LearnerConfig {
            transfer_at: Some(40),
            episodes: 60,
            max_steps: 300,
            seed: 2,
            ..LearnerConfig::tmaze_preset()
        };
        let r = train(&mut env, &cfg).unwrap();
        let t = r.metrics.transfer.unwrap();
        assert_eq!(t.episode, 40);
        assert!(t.removed.is_some());
        assert_eq!(env.spec.active_goal_count(), 1);
    }

    #[test]
    fn tabular_learning_makes_progress() {
        // On the tiny grid the mean episode length should drop sharply.
        let cfg = LearnerConfig {
            episodes: 120,
            max_steps: 400,
            n_options: 2,
            seed: 11,
            ..LearnerConfig::default()
        };
        let r = train(&mut tiny_grid(), &cfg).unwrap();
        let first: f64 =
            r.metrics.episodes[..20].iter().map(|e| e.steps as f64).sum::<f64>() / 20.0;
        let last: f64 =
            r.metrics.episodes[100..].iter().map(|e| e.steps as f64).sum::<f64>() / 20.0;
        assert!(last < first, "no progress: first {first}, last {last}");
    }
}
