//! The five trainers: linear-space PPO, log-space PPO, and sampled policy
//! gradient in single-epoch, multi-epoch, and prioritized variants, plus the
//! Monte-Carlo critic updates they share.
//!
//! Per finished episode the critic is updated first, then the actor; both
//! phases draw their minibatches according to the replay regime's epoch
//! schedule. All objectives are maximized by negating their ascent gradient
//! before the (descending) Adam step. Gradients are never clipped: a
//! non-finite actor gradient aborts the run as an observed failure mode
//! rather than being masked.

use rand::Rng;
use thiserror::Error;

use crate::env::OBS_DIM;
use crate::nn::{Activation, Gradients, Mlp, Workspace};
use crate::policy::{
    self, entropy, log_prob, log_prob_grad, policy_forward_into, raw_output_grad, ACTION_DIM,
    ACTOR_OUT,
};
use crate::replay::{epoch_schedule, sample_minibatch, MinibatchSource, Regime, SourceKind};
use crate::returns::{EpisodeTrace, Transition};
use crate::replay::ReplayBuffer;
use crate::scalar::Scalar;

/// Neurons in the actor's single hidden layer.
pub const ACTOR_HIDDEN: usize = 100;
/// Neurons in each of the critic's two hidden layers.
pub const CRITIC_HIDDEN: usize = 100;
/// Input width of a state-action critic: observation ⊕ action.
pub const Q_INPUT: usize = OBS_DIM + ACTION_DIM;

/// Whether the PPO probability ratio lives in linear or log space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicySpace {
    Linear,
    Log,
}

/// Which critic a trainer uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticKind {
    /// V(s): input is the observation.
    StateValue,
    /// Q(s,a): input is the observation concatenated with the action.
    StateActionValue,
}

impl CriticKind {
    pub fn input_dim(self) -> usize {
        match self {
            CriticKind::StateValue => OBS_DIM,
            CriticKind::StateActionValue => Q_INPUT,
        }
    }
}

/// An actor minibatch step produced a non-finite gradient; the run must be
/// aborted and recorded as such.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("exploding gradients: non-finite actor gradient")]
pub struct NonFiniteGradient;

/// Hyperparameters shared by both PPO variants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PpoConfig<F> {
    pub epsilon: F,
    /// Entropy bonus factor β.
    pub beta: F,
    pub actor_lr: F,
    pub critic_lr: F,
    pub value_epochs: usize,
    pub policy_epochs: usize,
    pub minibatch: usize,
    pub space: PolicySpace,
}

impl<F: Scalar> PpoConfig<F> {
    pub fn defaults(space: PolicySpace) -> Self {
        PpoConfig {
            epsilon: F::of(0.2),
            beta: F::of(0.02),
            actor_lr: F::of(0.001),
            critic_lr: F::of(0.0005),
            value_epochs: 50,
            policy_epochs: 10,
            minibatch: 200,
            space,
        }
    }

    fn validate(&self) {
        assert!(self.epsilon > F::zero() && self.epsilon < F::one(), "epsilon must be in (0,1)");
        assert!(self.value_epochs >= 1 && self.policy_epochs >= 1, "epochs must be >= 1");
        assert!(self.minibatch >= 1, "minibatch must be >= 1");
    }
}

/// Hyperparameters for the SPG variants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpgConfig<F> {
    /// Candidate actions sampled around the taken action, besides the taken
    /// action itself.
    pub n_samples: usize,
    /// Initial exploration temperature T (std of candidate noise).
    pub temperature: F,
    /// Per-episode multiplicative temperature decay γ_T.
    pub temp_decay: F,
    /// Weight targets by their Q improvement over the taken action.
    pub prioritized: bool,
    pub actor_lr: F,
    pub critic_lr: F,
    pub value_epochs: usize,
    pub policy_epochs: usize,
    pub minibatch: usize,
}

impl<F: Scalar> SpgConfig<F> {
    fn shared(prioritized: bool) -> Self {
        SpgConfig {
            n_samples: 5,
            temperature: F::of(1.0),
            temp_decay: F::of(0.01),
            prioritized,
            actor_lr: F::zero(),
            critic_lr: F::of(0.0005),
            value_epochs: 50,
            policy_epochs: 0,
            minibatch: 200,
        }
    }

    /// One policy epoch per episode at a high learning rate.
    pub fn single_epoch(prioritized: bool) -> Self {
        SpgConfig { actor_lr: F::of(0.01), policy_epochs: 1, ..Self::shared(prioritized) }
    }

    /// Multiple policy epochs per episode at PPO's learning rate.
    pub fn multi_epoch(prioritized: bool) -> Self {
        SpgConfig { actor_lr: F::of(0.001), policy_epochs: 10, ..Self::shared(prioritized) }
    }

    fn validate(&self) {
        assert!(self.temperature >= F::zero(), "temperature must be >= 0");
        assert!(
            self.temp_decay >= F::zero() && self.temp_decay <= F::one(),
            "temperature decay must be in [0,1]"
        );
        assert!(self.value_epochs >= 1 && self.policy_epochs >= 1, "epochs must be >= 1");
        assert!(self.minibatch >= 1, "minibatch must be >= 1");
    }
}

/// Paper-shaped actor: one hidden tanh layer, linear μ/σ head outputs.
///
/// The σ-head biases start at ln(e−1), placing the initial exploration
/// stddev at softplus(ln(e−1)) = 1 — the customary starting spread for a
/// Gaussian policy. With actions clamped to \[-1,1\], an untrained actor is
/// thus a genuinely wild driver, and training has to earn its keep by
/// narrowing σ around a good μ.
pub fn make_actor<F: Scalar>(seed: u64) -> Mlp<F> {
    let mut actor = Mlp::new(
        &[OBS_DIM, ACTOR_HIDDEN, ACTOR_OUT],
        &[Activation::Tanh, Activation::Identity],
        seed,
    )
    .expect("actor shape is valid");
    let raw = F::of((std::f64::consts::E - 1.0).ln());
    for head in ACTION_DIM..ACTOR_OUT {
        actor.set_output_bias(head, raw);
    }
    actor
}

/// Paper-shaped critic: two hidden tanh layers, one linear output.
pub fn make_critic<F: Scalar>(kind: CriticKind, seed: u64) -> Mlp<F> {
    Mlp::new(
        &[kind.input_dim(), CRITIC_HIDDEN, CRITIC_HIDDEN, 1],
        &[Activation::Tanh, Activation::Tanh, Activation::Identity],
        seed,
    )
    .expect("critic shape is valid")
}

/// State-action critic input; the action is clamped to the legal square so
/// Q is only ever trained and queried on executable actions.
pub fn q_input<F: Scalar>(obs: &[F; OBS_DIM], action: &[F; ACTION_DIM]) -> [F; Q_INPUT] {
    let one = F::one();
    let mut input = [F::zero(); Q_INPUT];
    input[..OBS_DIM].copy_from_slice(obs);
    for (slot, a) in input[OBS_DIM..].iter_mut().zip(action) {
        *slot = a.clamp(-one, one);
    }
    input
}

/// Mean squared-error loss ½(prediction − G)² over `batch` and its descent
/// gradient, accumulated into `grads` (zeroed first). Returns the loss.
pub fn critic_loss_into<F: Scalar>(
    critic: &Mlp<F>,
    batch: &[Transition<F>],
    kind: CriticKind,
    ws: &mut Workspace<F>,
    grads: &mut Gradients<F>,
) -> F {
    assert!(!batch.is_empty(), "empty critic batch");
    grads.zero();
    let mut loss = F::zero();
    let inv_n = F::one() / F::of(batch.len() as f64);
    for t in batch {
        let qin;
        let input: &[F] = match kind {
            CriticKind::StateValue => &t.obs,
            CriticKind::StateActionValue => {
                qin = q_input(&t.obs, &t.action);
                &qin
            }
        };
        critic.forward_into(input, ws);
        let err = ws.output()[0] - t.gain;
        loss += F::of(0.5) * err * err;
        critic.backward_into(input, &[err * inv_n], ws, grads);
    }
    loss * inv_n
}

/// Allocating wrapper around [`critic_loss_into`], for oracles and tests.
pub fn critic_loss_gradient<F: Scalar>(
    critic: &Mlp<F>,
    batch: &[Transition<F>],
    kind: CriticKind,
) -> (F, Gradients<F>) {
    let mut ws = Workspace::for_net(critic);
    let mut grads = Gradients::zeros_like(critic);
    let loss = critic_loss_into(critic, batch, kind, &mut ws, &mut grads);
    (loss, grads)
}

fn critic_update<F: Scalar, S: MinibatchSource<F> + ?Sized, R: Rng + ?Sized>(
    critic: &mut Mlp<F>,
    kind: CriticKind,
    source: &S,
    lr: F,
    epochs: usize,
    minibatch: usize,
    rng: &mut R,
) {
    let mut ws = Workspace::for_net(critic);
    let mut grads = Gradients::zeros_like(critic);
    for _ in 0..epochs {
        let batch = sample_minibatch(source, minibatch, rng);
        critic_loss_into(critic, &batch, kind, &mut ws, &mut grads);
        critic.adam_step(&grads, lr);
    }
}

/// Monte-Carlo regression of V(s) toward realized gains: per epoch, sample a
/// minibatch and take one Adam step down the mean squared error.
pub fn critic_update_v<F: Scalar, S: MinibatchSource<F> + ?Sized, R: Rng + ?Sized>(
    critic: &mut Mlp<F>,
    source: &S,
    lr: F,
    epochs: usize,
    minibatch: usize,
    rng: &mut R,
) {
    assert_eq!(critic.input_dim(), OBS_DIM, "state-value critic input mismatch");
    critic_update(critic, CriticKind::StateValue, source, lr, epochs, minibatch, rng);
}

/// As [`critic_update_v`] for Q(s,a), regressing on (observation ⊕ action).
pub fn critic_update_q<F: Scalar, S: MinibatchSource<F> + ?Sized, R: Rng + ?Sized>(
    critic: &mut Mlp<F>,
    source: &S,
    lr: F,
    epochs: usize,
    minibatch: usize,
    rng: &mut R,
) {
    assert_eq!(critic.input_dim(), Q_INPUT, "state-action critic input mismatch");
    critic_update(critic, CriticKind::StateActionValue, source, lr, epochs, minibatch, rng);
}

/// Probability ratio of the current policy against the sampling-time
/// log-probability: exp(new − old) in linear space, new − old in log space.
pub fn ppo_ratio<F: Scalar>(
    actor: &Mlp<F>,
    old_log_prob: F,
    obs: &[F; OBS_DIM],
    action: &[F; ACTION_DIM],
    space: PolicySpace,
) -> F {
    let new_lp = log_prob(&policy::policy_forward(actor, obs), action);
    match space {
        PolicySpace::Linear => (new_lp - old_log_prob).exp(),
        PolicySpace::Log => new_lp - old_log_prob,
    }
}

/// Clip bounds for the ratio in the given space: (1∓ε) or their logarithms.
fn clip_bounds<F: Scalar>(epsilon: F, space: PolicySpace) -> (F, F) {
    match space {
        PolicySpace::Linear => (F::one() - epsilon, F::one() + epsilon),
        PolicySpace::Log => ((F::one() - epsilon).ln(), (F::one() + epsilon).ln()),
    }
}

/// Clipped-surrogate objective for one sample:
/// min(ratio·Â, clip(ratio)·Â) + β·H.
pub fn ppo_objective<F: Scalar>(
    ratio: F,
    advantage: F,
    epsilon: F,
    entropy: F,
    beta: F,
    space: PolicySpace,
) -> F {
    let (lo, hi) = clip_bounds(epsilon, space);
    (ratio * advantage).min(ratio.clamp(lo, hi) * advantage) + beta * entropy
}

/// One actor training sample with everything frozen except the policy:
/// the advantage is precomputed against the critic, the old log-probability
/// is the sampling-time value stored in the transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PpoSample<F> {
    pub obs: [F; OBS_DIM],
    pub action: [F; ACTION_DIM],
    pub old_log_prob: F,
    pub advantage: F,
}

/// Mean clipped-surrogate objective over `batch` and its ascent gradient,
/// accumulated into `grads` (zeroed first). Returns the mean objective.
///
/// The subgradient at a clip tie takes the unclipped branch; on the clipped
/// branch the ratio term contributes no gradient.
pub fn ppo_batch_into<F: Scalar>(
    actor: &Mlp<F>,
    batch: &[PpoSample<F>],
    epsilon: F,
    beta: F,
    space: PolicySpace,
    ws: &mut Workspace<F>,
    grads: &mut Gradients<F>,
) -> F {
    assert!(!batch.is_empty(), "empty actor batch");
    grads.zero();
    let (lo, hi) = clip_bounds(epsilon, space);
    let mut objective = F::zero();
    let inv_n = F::one() / F::of(batch.len() as f64);
    for s in batch {
        let out = policy_forward_into(actor, &s.obs, ws);
        let new_lp = log_prob(&out, &s.action);
        let ratio = match space {
            PolicySpace::Linear => (new_lp - s.old_log_prob).exp(),
            PolicySpace::Log => new_lp - s.old_log_prob,
        };
        let surr_raw = ratio * s.advantage;
        let surr_clip = ratio.clamp(lo, hi) * s.advantage;
        // d(min term)/d new_lp: linear ratios rescale by p, log ratios pass
        // the advantage through; the clipped branch is constant in θ.
        let d_lp = if surr_raw <= surr_clip {
            objective += surr_raw;
            match space {
                PolicySpace::Linear => ratio * s.advantage,
                PolicySpace::Log => s.advantage,
            }
        } else {
            objective += surr_clip;
            F::zero()
        };
        objective += beta * entropy(&out);
        let (mut d_mu, mut d_sigma) = log_prob_grad(&out, &s.action);
        let d_entropy = policy::entropy_grad_sigma(&out);
        for i in 0..ACTION_DIM {
            d_mu[i] = d_mu[i] * d_lp * inv_n;
            d_sigma[i] = (d_sigma[i] * d_lp + beta * d_entropy[i]) * inv_n;
        }
        let raw = raw_output_grad(&out, &d_mu, &d_sigma);
        actor.backward_into(&s.obs, &raw, ws, grads);
    }
    objective * inv_n
}

/// Allocating wrapper around [`ppo_batch_into`], for oracles and tests.
pub fn ppo_batch_gradient<F: Scalar>(
    actor: &Mlp<F>,
    batch: &[PpoSample<F>],
    epsilon: F,
    beta: F,
    space: PolicySpace,
) -> (F, Gradients<F>) {
    let mut ws = Workspace::for_net(actor);
    let mut grads = Gradients::zeros_like(actor);
    let objective = ppo_batch_into(actor, batch, epsilon, beta, space, &mut ws, &mut grads);
    (objective, grads)
}

/// Run the scheduled policy epochs for PPO: per epoch, sample a minibatch,
/// compute advantages against the (already updated, now frozen) critic, and
/// ascend the mean clipped objective.
pub fn ppo_update<F: Scalar, R: Rng + ?Sized>(
    actor: &mut Mlp<F>,
    critic_v: &Mlp<F>,
    schedule: &[(&dyn MinibatchSource<F>, usize)],
    cfg: &PpoConfig<F>,
    rng: &mut R,
) -> Result<(), NonFiniteGradient> {
    let mut actor_ws = Workspace::for_net(actor);
    let mut critic_ws = Workspace::for_net(critic_v);
    let mut grads = Gradients::zeros_like(actor);
    let mut samples: Vec<PpoSample<F>> = Vec::with_capacity(cfg.minibatch);
    for &(source, epochs) in schedule {
        for _ in 0..epochs {
            let batch = sample_minibatch(source, cfg.minibatch, rng);
            samples.clear();
            for t in &batch {
                critic_v.forward_into(&t.obs, &mut critic_ws);
                samples.push(PpoSample {
                    obs: t.obs,
                    action: t.action,
                    old_log_prob: t.log_prob,
                    advantage: t.gain - critic_ws.output()[0],
                });
            }
            ppo_batch_into(actor, &samples, cfg.epsilon, cfg.beta, cfg.space, &mut actor_ws, &mut grads);
            if !grads.is_finite() {
                return Err(NonFiniteGradient);
            }
            grads.scale(-F::one());
            actor.adam_step(&grads, cfg.actor_lr);
        }
    }
    Ok(())
}

/// The argmax target of one SPG candidate search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpgTargets<F> {
    /// Highest-Q candidate (ties keep the earliest, i.e. the taken action).
    pub target: [F; ACTION_DIM],
    pub q_target: F,
    /// Q of the (clamped) taken action, always ≤ `q_target`.
    pub q_taken: F,
}

/// The candidate list a target search scans, in scan order: the clamped
/// taken action first, then `n_samples` clamped Gaussian perturbations of it
/// with std `temperature`. Draw order is candidate-major, dimension-minor.
pub fn spg_candidates<F: Scalar, R: Rng + ?Sized>(
    taken: &[F; ACTION_DIM],
    temperature: F,
    n_samples: usize,
    rng: &mut R,
) -> Vec<[F; ACTION_DIM]> {
    let one = F::one();
    let mut cands = Vec::with_capacity(n_samples + 1);
    cands.push([taken[0].clamp(-one, one), taken[1].clamp(-one, one)]);
    for _ in 0..n_samples {
        let mut c = [F::zero(); ACTION_DIM];
        for (slot, &base) in c.iter_mut().zip(taken) {
            *slot = (base + temperature * F::std_normal(rng)).clamp(-one, one);
        }
        cands.push(c);
    }
    cands
}

/// Find the best action candidate around `taken` according to the Q critic.
///
/// Scans the [`spg_candidates`] list, keeping the first strict maximum, so
/// the taken action wins ties and q_target ≥ q_taken holds exactly.
pub fn spg_sample_targets_into<F: Scalar, R: Rng + ?Sized>(
    critic_q: &Mlp<F>,
    obs: &[F; OBS_DIM],
    taken: &[F; ACTION_DIM],
    temperature: F,
    n_samples: usize,
    rng: &mut R,
    ws: &mut Workspace<F>,
) -> SpgTargets<F> {
    let one = F::one();
    let mut eval = |cand: &[F; ACTION_DIM]| -> F {
        critic_q.forward_into(&q_input(obs, cand), ws);
        ws.output()[0]
    };
    let mut target = [taken[0].clamp(-one, one), taken[1].clamp(-one, one)];
    let q_taken = eval(&target);
    let mut q_target = q_taken;
    for _ in 0..n_samples {
        let mut cand = [F::zero(); ACTION_DIM];
        for (slot, &base) in cand.iter_mut().zip(taken) {
            *slot = (base + temperature * F::std_normal(rng)).clamp(-one, one);
        }
        let q = eval(&cand);
        if q > q_target {
            q_target = q;
            target = cand;
        }
    }
    SpgTargets { target, q_target, q_taken }
}

/// Allocating wrapper around [`spg_sample_targets_into`].
pub fn spg_sample_targets<F: Scalar, R: Rng + ?Sized>(
    critic_q: &Mlp<F>,
    obs: &[F; OBS_DIM],
    taken: &[F; ACTION_DIM],
    temperature: F,
    n_samples: usize,
    rng: &mut R,
) -> SpgTargets<F> {
    let mut ws = Workspace::for_net(critic_q);
    spg_sample_targets_into(critic_q, obs, taken, temperature, n_samples, rng, &mut ws)
}

/// One weighted log-likelihood item: ascend weight · log π(action | obs).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedTarget<F> {
    pub obs: [F; OBS_DIM],
    pub action: [F; ACTION_DIM],
    pub weight: F,
}

/// Mean weighted log-likelihood over `items` and its ascent gradient,
/// accumulated into `grads` (zeroed first). Returns the mean objective.
///
/// With unit weights this is the plain sampled-policy-gradient objective;
/// with advantage weights it is the prioritized variant, and with the taken
/// actions as targets it is the vanilla policy gradient.
pub fn weighted_logp_into<F: Scalar>(
    actor: &Mlp<F>,
    items: &[WeightedTarget<F>],
    ws: &mut Workspace<F>,
    grads: &mut Gradients<F>,
) -> F {
    assert!(!items.is_empty(), "empty actor batch");
    grads.zero();
    let mut objective = F::zero();
    let inv_n = F::one() / F::of(items.len() as f64);
    for item in items {
        let out = policy_forward_into(actor, &item.obs, ws);
        objective += item.weight * log_prob(&out, &item.action);
        let (mut d_mu, mut d_sigma) = log_prob_grad(&out, &item.action);
        let w = item.weight * inv_n;
        for i in 0..ACTION_DIM {
            d_mu[i] *= w;
            d_sigma[i] *= w;
        }
        let raw = raw_output_grad(&out, &d_mu, &d_sigma);
        actor.backward_into(&item.obs, &raw, ws, grads);
    }
    objective * inv_n
}

/// Allocating wrapper around [`weighted_logp_into`], for oracles and tests.
pub fn weighted_logp_gradient<F: Scalar>(
    actor: &Mlp<F>,
    items: &[WeightedTarget<F>],
) -> (F, Gradients<F>) {
    let mut ws = Workspace::for_net(actor);
    let mut grads = Gradients::zeros_like(actor);
    let objective = weighted_logp_into(actor, items, &mut ws, &mut grads);
    (objective, grads)
}

/// Run the scheduled policy epochs for SPG: per epoch, sample a minibatch,
/// search targets around each taken action with the (frozen) Q critic, and
/// ascend the mean (optionally advantage-weighted) target log-likelihood.
pub fn spg_actor_update<F: Scalar, R: Rng + ?Sized>(
    actor: &mut Mlp<F>,
    critic_q: &Mlp<F>,
    schedule: &[(&dyn MinibatchSource<F>, usize)],
    cfg: &SpgConfig<F>,
    temperature: F,
    rng: &mut R,
) -> Result<(), NonFiniteGradient> {
    let mut actor_ws = Workspace::for_net(actor);
    let mut critic_ws = Workspace::for_net(critic_q);
    let mut grads = Gradients::zeros_like(actor);
    let mut items: Vec<WeightedTarget<F>> = Vec::with_capacity(cfg.minibatch);
    for &(source, epochs) in schedule {
        for _ in 0..epochs {
            let batch = sample_minibatch(source, cfg.minibatch, rng);
            items.clear();
            for t in &batch {
                let found = spg_sample_targets_into(
                    critic_q,
                    &t.obs,
                    &t.action,
                    temperature,
                    cfg.n_samples,
                    rng,
                    &mut critic_ws,
                );
                let weight = if cfg.prioritized {
                    found.q_target - found.q_taken
                } else {
                    F::one()
                };
                items.push(WeightedTarget { obs: t.obs, action: found.target, weight });
            }
            weighted_logp_into(actor, &items, &mut actor_ws, &mut grads);
            if !grads.is_finite() {
                return Err(NonFiniteGradient);
            }
            grads.scale(-F::one());
            actor.adam_step(&grads, cfg.actor_lr);
        }
    }
    Ok(())
}

/// Multiplicative per-episode temperature decay T ← T·(1 − γ_T).
pub fn decay_temperature<F: Scalar>(temperature: F, gamma_t: F) -> F {
    temperature * (F::one() - gamma_t)
}

/// A PPO trainer owning its actor, state-value critic, and optimizer state.
#[derive(Clone, Debug)]
pub struct PpoTrainer<F: Scalar> {
    actor: Mlp<F>,
    critic: Mlp<F>,
    cfg: PpoConfig<F>,
}

impl<F: Scalar> PpoTrainer<F> {
    pub fn new(cfg: PpoConfig<F>, actor_seed: u64, critic_seed: u64) -> Self {
        cfg.validate();
        PpoTrainer {
            actor: make_actor(actor_seed),
            critic: make_critic(CriticKind::StateValue, critic_seed),
            cfg,
        }
    }

    pub fn actor(&self) -> &Mlp<F> {
        &self.actor
    }

    pub fn critic(&self) -> &Mlp<F> {
        &self.critic
    }

    /// One post-episode update: critic first, then the actor, each following
    /// the regime's epoch schedule.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        recent: &EpisodeTrace<F>,
        buffer: &ReplayBuffer<F>,
        regime: Regime,
        rng: &mut R,
    ) -> Result<(), NonFiniteGradient> {
        for (kind, epochs) in epoch_schedule(regime, self.cfg.value_epochs) {
            let source = resolve_source(kind, recent, buffer);
            critic_update_v(&mut self.critic, source, self.cfg.critic_lr, epochs, self.cfg.minibatch, rng);
        }
        let plan: Vec<(&dyn MinibatchSource<F>, usize)> =
            epoch_schedule(regime, self.cfg.policy_epochs)
                .into_iter()
                .map(|(kind, epochs)| (resolve_source(kind, recent, buffer), epochs))
                .collect();
        ppo_update(&mut self.actor, &self.critic, &plan, &self.cfg, rng)
    }
}

/// An SPG trainer owning its actor, state-action critic, optimizer state,
/// and the decaying exploration temperature.
#[derive(Clone, Debug)]
pub struct SpgTrainer<F: Scalar> {
    actor: Mlp<F>,
    critic: Mlp<F>,
    cfg: SpgConfig<F>,
    temperature: F,
}

impl<F: Scalar> SpgTrainer<F> {
    pub fn new(cfg: SpgConfig<F>, actor_seed: u64, critic_seed: u64) -> Self {
        cfg.validate();
        SpgTrainer {
            actor: make_actor(actor_seed),
            critic: make_critic(CriticKind::StateActionValue, critic_seed),
            temperature: cfg.temperature,
            cfg,
        }
    }

    pub fn actor(&self) -> &Mlp<F> {
        &self.actor
    }

    pub fn critic(&self) -> &Mlp<F> {
        &self.critic
    }

    pub fn temperature(&self) -> F {
        self.temperature
    }

    /// One post-episode update: critic first, then the actor, then the
    /// temperature decay.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        recent: &EpisodeTrace<F>,
        buffer: &ReplayBuffer<F>,
        regime: Regime,
        rng: &mut R,
    ) -> Result<(), NonFiniteGradient> {
        for (kind, epochs) in epoch_schedule(regime, self.cfg.value_epochs) {
            let source = resolve_source(kind, recent, buffer);
            critic_update_q(&mut self.critic, source, self.cfg.critic_lr, epochs, self.cfg.minibatch, rng);
        }
        let plan: Vec<(&dyn MinibatchSource<F>, usize)> =
            epoch_schedule(regime, self.cfg.policy_epochs)
                .into_iter()
                .map(|(kind, epochs)| (resolve_source(kind, recent, buffer), epochs))
                .collect();
        spg_actor_update(&mut self.actor, &self.critic, &plan, &self.cfg, self.temperature, rng)?;
        self.temperature = decay_temperature(self.temperature, self.cfg.temp_decay);
        Ok(())
    }
}

fn resolve_source<'a, F: Scalar>(
    kind: SourceKind,
    recent: &'a EpisodeTrace<F>,
    buffer: &'a ReplayBuffer<F>,
) -> &'a dyn MinibatchSource<F> {
    match kind {
        SourceKind::Recent => recent,
        SourceKind::Buffer => buffer,
    }
}

/// Either trainer, for callers generic over the algorithm family.
#[derive(Clone, Debug)]
pub enum Trainer<F: Scalar> {
    Ppo(PpoTrainer<F>),
    Spg(SpgTrainer<F>),
}

impl<F: Scalar> Trainer<F> {
    pub fn actor(&self) -> &Mlp<F> {
        match self {
            Trainer::Ppo(t) => t.actor(),
            Trainer::Spg(t) => t.actor(),
        }
    }

    pub fn update<R: Rng + ?Sized>(
        &mut self,
        recent: &EpisodeTrace<F>,
        buffer: &ReplayBuffer<F>,
        regime: Regime,
        rng: &mut R,
    ) -> Result<(), NonFiniteGradient> {
        match self {
            Trainer::Ppo(t) => t.update(recent, buffer, regime, rng),
            Trainer::Spg(t) => t.update(recent, buffer, regime, rng),
        }
    }
}
