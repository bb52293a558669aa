//! Monte-Carlo gains and advantages over completed episodes.
//!
//! Episodes are treated as terminal at truncation: the gain of the last step
//! is its reward, with no bootstrapped tail. Advantages are plain `G - V`,
//! never rescaled.

use crate::env::OBS_DIM;
use crate::policy::ACTION_DIM;
use crate::scalar::Scalar;

/// One environment step as stored for training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition<F> {
    pub obs: [F; OBS_DIM],
    /// Raw (unclamped) action as sampled; likelihoods refer to this value.
    pub action: [F; ACTION_DIM],
    pub reward: F,
    /// Joint log-density of `action` under the policy that sampled it.
    pub log_prob: F,
    pub episode: usize,
    pub step: usize,
    /// Realized discounted gain from this step to episode end.
    pub gain: F,
}

/// The ordered transitions of one finished episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeTrace<F> {
    steps: Vec<Transition<F>>,
    gamma: F,
    episode: usize,
    finalized: bool,
}

impl<F: Scalar> EpisodeTrace<F> {
    pub fn new(episode: usize, gamma: F, capacity: usize) -> Self {
        EpisodeTrace { steps: Vec::with_capacity(capacity), gamma, episode, finalized: false }
    }

    /// Record one step; gains stay zero until [`EpisodeTrace::finalize`].
    pub fn push(&mut self, obs: [F; OBS_DIM], action: [F; ACTION_DIM], reward: F, log_prob: F) {
        assert!(!self.finalized, "cannot extend a finalized episode");
        self.steps.push(Transition {
            obs,
            action,
            reward,
            log_prob,
            episode: self.episode,
            step: self.steps.len(),
            gain: F::zero(),
        });
    }

    /// Fill in realized gains by the backward recursion.
    pub fn finalize(&mut self) {
        assert!(!self.steps.is_empty(), "an episode needs at least one step");
        let rewards: Vec<F> = self.steps.iter().map(|t| t.reward).collect();
        let gains = discounted_returns(&rewards, self.gamma);
        for (t, g) in self.steps.iter_mut().zip(gains) {
            t.gain = g;
        }
        self.finalized = true;
    }

    pub fn steps(&self) -> &[Transition<F>] {
        assert!(self.finalized, "gains not computed yet");
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_reward(&self) -> F {
        self.steps.iter().map(|t| t.reward).sum()
    }
}

/// Discounted gains G_t = Σ_k r_k γ^(k-t), computed backwards:
/// G_(T-1) = r_(T-1), G_t = r_t + γ G_(t+1).
pub fn discounted_returns<F: Scalar>(rewards: &[F], gamma: F) -> Vec<F> {
    assert!(!rewards.is_empty(), "need at least one reward");
    let mut gains = vec![F::zero(); rewards.len()];
    let mut acc = F::zero();
    for (g, &r) in gains.iter_mut().zip(rewards.iter()).rev() {
        acc = r + gamma * acc;
        *g = acc;
    }
    gains
}

/// Elementwise advantages Â_t = G_t - V(s_t).
pub fn advantages<F: Scalar>(gains: &[F], critic_values: &[F]) -> Vec<F> {
    assert_eq!(gains.len(), critic_values.len(), "gain/value length mismatch");
    gains.iter().zip(critic_values).map(|(&g, &v)| g - v).collect()
}
