//! Gaussian policy head over a shared actor trunk: maps observations to
//! per-dimension (μ, σ), samples actions, and scores log-likelihood and
//! entropy.
//!
//! The actor network ends in a linear layer of 4 outputs; this module owns
//! the head nonlinearities (tanh for μ, softplus for σ) and their gradient
//! chain, so trainers can backpropagate any objective expressed through
//! d/dμ and d/dσ.

use rand::Rng;

use crate::nn::{softplus, Mlp, Workspace};
use crate::scalar::Scalar;

/// Number of action dimensions (throttle, steering).
pub const ACTION_DIM: usize = 2;
/// Raw actor outputs: two μ heads then two σ heads.
pub const ACTOR_OUT: usize = 2 * ACTION_DIM;

/// Distribution parameters for one observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyOutput<F> {
    /// Means in (-1,1), tanh head.
    pub mu: [F; ACTION_DIM],
    /// Standard deviations > 0, softplus head.
    pub sigma: [F; ACTION_DIM],
}

/// A draw from the policy plus its joint log-density.
///
/// The action is stored unclamped; the environment clamps on use, and all
/// likelihoods refer to the raw sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionSample<F> {
    pub action: [F; ACTION_DIM],
    pub log_prob: F,
}

/// Run the actor and apply the head nonlinearities.
///
/// The actor's final layer must be linear; outputs 0..2 become μ via tanh
/// and outputs 2..4 become σ via softplus.
pub fn policy_forward<F: Scalar>(actor: &Mlp<F>, obs: &[F]) -> PolicyOutput<F> {
    assert_eq!(actor.output_dim(), ACTOR_OUT, "actor must end in {ACTOR_OUT} raw outputs");
    let raw = actor.forward(obs);
    heads_from_raw(&raw)
}

/// As [`policy_forward`], but reusing `ws` and keeping the trunk trace in it
/// for a later backward pass.
pub fn policy_forward_into<F: Scalar>(
    actor: &Mlp<F>,
    obs: &[F],
    ws: &mut Workspace<F>,
) -> PolicyOutput<F> {
    assert_eq!(actor.output_dim(), ACTOR_OUT, "actor must end in {ACTOR_OUT} raw outputs");
    actor.forward_into(obs, ws);
    heads_from_raw(ws.output())
}

fn heads_from_raw<F: Scalar>(raw: &[F]) -> PolicyOutput<F> {
    PolicyOutput {
        mu: [raw[0].tanh(), raw[1].tanh()],
        sigma: [softplus(raw[2]), softplus(raw[3])],
    }
}

/// Draw one action, scoring it with [`log_prob`] so sampling-time and
/// training-time densities share a single code path.
pub fn sample_action<F: Scalar, R: Rng + ?Sized>(
    out: &PolicyOutput<F>,
    rng: &mut R,
) -> ActionSample<F> {
    let mut action = [F::zero(); ACTION_DIM];
    for (a, (&mu, &sigma)) in action.iter_mut().zip(out.mu.iter().zip(&out.sigma)) {
        *a = mu + sigma * F::std_normal(rng);
    }
    ActionSample { action, log_prob: log_prob(out, &action) }
}

/// Joint log-density: Σᵢ [ -ln(σᵢ√(2π)) - (aᵢ-μᵢ)²/(2σᵢ²) ].
pub fn log_prob<F: Scalar>(out: &PolicyOutput<F>, action: &[F; ACTION_DIM]) -> F {
    let half = F::of(0.5);
    let ln_sqrt_2pi = F::of(0.5) * (F::of(2.0) * F::PI()).ln();
    let mut lp = F::zero();
    for ((&a, &mu), &sigma) in action.iter().zip(&out.mu).zip(&out.sigma) {
        let z = (a - mu) / sigma;
        lp += -sigma.ln() - ln_sqrt_2pi - half * z * z;
    }
    lp
}

/// Differential entropy: Σᵢ ½ ln(2πe σᵢ²).
pub fn entropy<F: Scalar>(out: &PolicyOutput<F>) -> F {
    let half = F::of(0.5);
    let two_pi_e = F::of(2.0) * F::PI() * F::E();
    out.sigma
        .iter()
        .map(|&s| half * (two_pi_e * s * s).ln())
        .sum()
}

/// Gradients of [`log_prob`] with respect to (μ, σ):
/// d/dμᵢ = (aᵢ-μᵢ)/σᵢ², d/dσᵢ = -1/σᵢ + (aᵢ-μᵢ)²/σᵢ³.
pub fn log_prob_grad<F: Scalar>(
    out: &PolicyOutput<F>,
    action: &[F; ACTION_DIM],
) -> ([F; ACTION_DIM], [F; ACTION_DIM]) {
    let mut d_mu = [F::zero(); ACTION_DIM];
    let mut d_sigma = [F::zero(); ACTION_DIM];
    for i in 0..ACTION_DIM {
        let s = out.sigma[i];
        let diff = action[i] - out.mu[i];
        d_mu[i] = diff / (s * s);
        d_sigma[i] = -F::one() / s + diff * diff / (s * s * s);
    }
    (d_mu, d_sigma)
}

/// Gradient of [`entropy`] with respect to σ: d/dσᵢ = 1/σᵢ.
pub fn entropy_grad_sigma<F: Scalar>(out: &PolicyOutput<F>) -> [F; ACTION_DIM] {
    [F::one() / out.sigma[0], F::one() / out.sigma[1]]
}

/// Chain (d/dμ, d/dσ) through the head nonlinearities into the gradient
/// with respect to the actor's raw linear outputs, ready for `backward`.
///
/// tanh' = 1-μ², softplus' expressed through its output = 1-exp(-σ).
pub fn raw_output_grad<F: Scalar>(
    out: &PolicyOutput<F>,
    d_mu: &[F; ACTION_DIM],
    d_sigma: &[F; ACTION_DIM],
) -> [F; ACTOR_OUT] {
    let mut g = [F::zero(); ACTOR_OUT];
    for i in 0..ACTION_DIM {
        g[i] = d_mu[i] * (F::one() - out.mu[i] * out.mu[i]);
        g[ACTION_DIM + i] = d_sigma[i] * (F::one() - (-out.sigma[i]).exp());
    }
    g
}
