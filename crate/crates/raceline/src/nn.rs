//! Minimal dense-network engine: MLP forward pass, exact reverse-mode
//! gradients, and an Adam optimizer.
//!
//! Parameters live in flat row-major matrices and everything is a pure
//! function of its inputs, so training runs are deterministic in their seeds.
//! The optimizer always descends; callers maximizing an objective negate the
//! gradient before stepping.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Scalar;

/// Default Adam decay for the first-moment estimate.
pub const ADAM_BETA1: f64 = 0.9;
/// Default Adam decay for the second-moment estimate.
pub const ADAM_BETA2: f64 = 0.999;
/// Default Adam denominator fuzz.
pub const ADAM_EPS: f64 = 1e-8;

/// Element-wise nonlinearity applied to a whole layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
    Softplus,
}

impl Activation {
    /// Apply the nonlinearity to one pre-activation.
    pub fn apply<F: Scalar>(self, z: F) -> F {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
            Activation::Softplus => softplus(z),
        }
    }

    /// Derivative expressed through the post-activation `y = apply(z)`.
    ///
    /// tanh' = 1 - y²; softplus' = sigmoid(z) = 1 - exp(-y).
    pub fn deriv_from_output<F: Scalar>(self, y: F) -> F {
        match self {
            Activation::Tanh => F::one() - y * y,
            Activation::Identity => F::one(),
            Activation::Softplus => F::one() - (-y).exp(),
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
            Activation::Softplus => "softplus",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            "softplus" => Some(Activation::Softplus),
            _ => None,
        }
    }
}

/// Numerically stable softplus: ln(1 + e^z) without overflow for large |z|.
pub fn softplus<F: Scalar>(z: F) -> F {
    z.max(F::zero()) + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NnError {
    #[error("expected {expected} activation tags for {layers} layer sizes, got {got}")]
    ActivationCount {
        layers: usize,
        expected: usize,
        got: usize,
    },
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
}

/// Feed-forward network with per-layer activation tags and embedded Adam
/// state.
///
/// Layer `l` maps `sizes[l]` inputs to `sizes[l+1]` outputs through a
/// row-major weight matrix (`out × in`) and a bias vector.
#[derive(Clone, Debug)]
pub struct Mlp<F: Scalar> {
    sizes: Vec<usize>,
    acts: Vec<Activation>,
    weights: Vec<Vec<F>>,
    biases: Vec<Vec<F>>,
    adam_mw: Vec<Vec<F>>,
    adam_vw: Vec<Vec<F>>,
    adam_mb: Vec<Vec<F>>,
    adam_vb: Vec<Vec<F>>,
    step: u64,
}

/// Per-parameter gradient accumulator, shape-matched to one [`Mlp`].
#[derive(Clone, Debug)]
pub struct Gradients<F: Scalar> {
    pub w: Vec<Vec<F>>,
    pub b: Vec<Vec<F>>,
}

impl<F: Scalar> Gradients<F> {
    pub fn zeros_like(net: &Mlp<F>) -> Self {
        Gradients {
            w: net.weights.iter().map(|w| vec![F::zero(); w.len()]).collect(),
            b: net.biases.iter().map(|b| vec![F::zero(); b.len()]).collect(),
        }
    }

    pub fn zero(&mut self) {
        for w in &mut self.w {
            w.fill(F::zero());
        }
        for b in &mut self.b {
            b.fill(F::zero());
        }
    }

    /// Multiply every component by `c`, e.g. 1/batch for a mean, -1 to turn
    /// an ascent direction into a descent one.
    pub fn scale(&mut self, c: F) {
        for w in &mut self.w {
            for g in w.iter_mut() {
                *g *= c;
            }
        }
        for b in &mut self.b {
            for g in b.iter_mut() {
                *g *= c;
            }
        }
    }

    /// True when every component is finite; trainers abort on violation.
    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(self.b.iter()).all(|v| v.iter().all(|g| g.is_finite()))
    }
}

/// Reusable forward/backward buffers, sized for one network.
#[derive(Clone, Debug)]
pub struct Workspace<F: Scalar> {
    post: Vec<Vec<F>>,
    delta: Vec<F>,
    delta_prev: Vec<F>,
}

impl<F: Scalar> Workspace<F> {
    pub fn for_net(net: &Mlp<F>) -> Self {
        let widest = net.sizes.iter().copied().max().unwrap_or(0);
        Workspace {
            post: net.sizes[1..].iter().map(|&n| vec![F::zero(); n]).collect(),
            delta: vec![F::zero(); widest],
            delta_prev: vec![F::zero(); widest],
        }
    }

    /// Post-activations of the final layer from the last `forward_into`.
    pub fn output(&self) -> &[F] {
        self.post.last().expect("workspace built for a network")
    }
}

impl<F: Scalar> Mlp<F> {
    /// Build a network with weights drawn uniformly from
    /// [-1/√fan_in, +1/√fan_in], zero biases, and fresh Adam state.
    pub fn new(sizes: &[usize], acts: &[Activation], seed: u64) -> Result<Self, NnError> {
        assert!(sizes.len() >= 2, "need at least an input and an output layer");
        if acts.len() != sizes.len() - 1 {
            return Err(NnError::ActivationCount {
                layers: sizes.len(),
                expected: sizes.len() - 1,
                got: acts.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(acts.len());
        let mut biases = Vec::with_capacity(acts.len());
        for l in 0..acts.len() {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = F::of(1.0) / F::of(fan_in as f64).sqrt();
            let w = (0..fan_in * fan_out)
                .map(|_| F::uniform(&mut rng, -bound, bound))
                .collect();
            weights.push(w);
            biases.push(vec![F::zero(); fan_out]);
        }
        let zeros = |src: &Vec<Vec<F>>| src.iter().map(|v| vec![F::zero(); v.len()]).collect();
        Ok(Mlp {
            adam_mw: zeros(&weights),
            adam_vw: zeros(&weights),
            adam_mb: zeros(&biases),
            adam_vb: zeros(&biases),
            sizes: sizes.to_vec(),
            acts: acts.to_vec(),
            weights,
            biases,
            step: 0,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two layer sizes")
    }

    pub fn num_layers(&self) -> usize {
        self.acts.len()
    }

    /// Adam step counter (number of optimizer updates applied so far).
    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Forward pass writing per-layer post-activations into `ws`.
    pub fn forward_into(&self, input: &[F], ws: &mut Workspace<F>) {
        assert_eq!(input.len(), self.input_dim(), "input dimension mismatch");
        for l in 0..self.acts.len() {
            let (done, rest) = ws.post.split_at_mut(l);
            let x: &[F] = if l == 0 { input } else { &done[l - 1] };
            let y = &mut rest[0];
            let n_in = self.sizes[l];
            let act = self.acts[l];
            for (o, rows) in self.weights[l].chunks_exact(n_in).enumerate() {
                let z = self.biases[l][o]
                    + rows.iter().zip(x.iter()).map(|(&w, &xi)| w * xi).sum::<F>();
                y[o] = act.apply(z);
            }
        }
    }

    /// Allocating forward pass; returns the final layer's post-activations.
    pub fn forward(&self, input: &[F]) -> Vec<F> {
        let mut ws = Workspace::for_net(self);
        self.forward_into(input, &mut ws);
        ws.output().to_vec()
    }

    /// Accumulate d⟨output, output_grad⟩/dθ into `grads`.
    ///
    /// `ws` must hold the trace of `forward_into(input, ws)` for this exact
    /// network and input; gradients add on top of whatever `grads` holds, so
    /// minibatch callers zero it once and scale by 1/batch afterwards.
    pub fn backward_into(
        &self,
        input: &[F],
        output_grad: &[F],
        ws: &mut Workspace<F>,
        grads: &mut Gradients<F>,
    ) {
        assert_eq!(output_grad.len(), self.output_dim(), "output gradient dimension mismatch");
        let last = self.acts.len() - 1;
        for (o, (&g, &y)) in output_grad.iter().zip(ws.post[last].iter()).enumerate() {
            ws.delta[o] = g * self.acts[last].deriv_from_output(y);
        }
        for l in (0..self.acts.len()).rev() {
            let n_in = self.sizes[l];
            let x: &[F] = if l == 0 { input } else { &ws.post[l - 1] };
            for (o, gw_row) in grads.w[l].chunks_exact_mut(n_in).enumerate() {
                let d = ws.delta[o];
                for (g, &xi) in gw_row.iter_mut().zip(x.iter()) {
                    *g += d * xi;
                }
                grads.b[l][o] += d;
            }
            if l == 0 {
                break;
            }
            ws.delta_prev[..n_in].fill(F::zero());
            for (o, w_row) in self.weights[l].chunks_exact(n_in).enumerate() {
                let d = ws.delta[o];
                for (p, &w) in ws.delta_prev[..n_in].iter_mut().zip(w_row.iter()) {
                    *p += d * w;
                }
            }
            let act = self.acts[l - 1];
            for (p, &y) in ws.delta_prev[..n_in].iter_mut().zip(x.iter()) {
                *p *= act.deriv_from_output(y);
            }
            std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
        }
    }

    /// Allocating one-shot gradient of ⟨forward(input), output_grad⟩.
    pub fn backward(&self, input: &[F], output_grad: &[F]) -> Gradients<F> {
        let mut ws = Workspace::for_net(self);
        let mut grads = Gradients::zeros_like(self);
        self.forward_into(input, &mut ws);
        self.backward_into(input, output_grad, &mut ws, &mut grads);
        grads
    }

    /// One Adam descent step with explicit constants.
    pub fn adam_step_with(&mut self, grads: &Gradients<F>, lr: F, beta1: F, beta2: F, eps: F) {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = F::one() - beta1.powi(t);
        let bc2 = F::one() - beta2.powi(t);
        for l in 0..self.acts.len() {
            adam_update(&mut self.weights[l], &grads.w[l], &mut self.adam_mw[l], &mut self.adam_vw[l], lr, beta1, beta2, eps, bc1, bc2);
            adam_update(&mut self.biases[l], &grads.b[l], &mut self.adam_mb[l], &mut self.adam_vb[l], lr, beta1, beta2, eps, bc1, bc2);
        }
    }

    /// One Adam descent step with the default constants.
    pub fn adam_step(&mut self, grads: &Gradients<F>, lr: F) {
        self.adam_step_with(grads, lr, F::of(ADAM_BETA1), F::of(ADAM_BETA2), F::of(ADAM_EPS));
    }

    /// Serialize sizes, activation tags, and parameters.
    ///
    /// Layout: `sizes <n0> <n1> ...` line, `acts <tag> ...` line, then per
    /// layer one `w` line with the row-major weight matrix and one `b` line
    /// with the bias vector. Adam state is not persisted; loading yields a
    /// fresh optimizer.
    pub fn to_checkpoint(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("sizes");
        for s in &self.sizes {
            let _ = write!(out, " {s}");
        }
        out.push_str("\nacts");
        for a in &self.acts {
            let _ = write!(out, " {}", a.tag());
        }
        out.push('\n');
        for l in 0..self.acts.len() {
            out.push('w');
            for v in &self.weights[l] {
                let _ = write!(out, " {:?}", v.as_f64());
            }
            out.push_str("\nb");
            for v in &self.biases[l] {
                let _ = write!(out, " {:?}", v.as_f64());
            }
            out.push('\n');
        }
        out
    }

    /// Parse the format produced by [`Mlp::to_checkpoint`].
    pub fn from_checkpoint(text: &str) -> Result<Self, NnError> {
        let bad = |msg: &str| NnError::Checkpoint(msg.to_string());
        let mut lines = text.lines();
        let sizes: Vec<usize> = lines
            .next()
            .and_then(|l| l.strip_prefix("sizes"))
            .ok_or_else(|| bad("missing sizes line"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad layer size")))
            .collect::<Result<_, _>>()?;
        if sizes.len() < 2 {
            return Err(bad("need at least two layer sizes"));
        }
        let acts: Vec<Activation> = lines
            .next()
            .and_then(|l| l.strip_prefix("acts"))
            .ok_or_else(|| bad("missing acts line"))?
            .split_whitespace()
            .map(|t| Activation::from_tag(t).ok_or_else(|| bad("unknown activation tag")))
            .collect::<Result<_, _>>()?;
        let mut net = Mlp::new(&sizes, &acts, 0)?;
        for l in 0..acts.len() {
            let w = parse_floats(lines.next(), "w", sizes[l] * sizes[l + 1])?;
            let b = parse_floats(lines.next(), "b", sizes[l + 1])?;
            net.weights[l] = w;
            net.biases[l] = b;
        }
        Ok(net)
    }

    /// Overwrite the bias feeding final-layer output `index`, for choosing
    /// where a head nonlinearity starts before any training.
    pub fn set_output_bias(&mut self, index: usize, value: F) {
        let last = self.biases.len() - 1;
        self.biases[last][index] = value;
    }

    /// Visit every parameter in layer order (weights then biases within each
    /// layer), the same order as [`Mlp::flat_params`].
    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(&mut F)) {
        for l in 0..self.acts.len() {
            for v in self.weights[l].iter_mut() {
                f(v);
            }
            for v in self.biases[l].iter_mut() {
                f(v);
            }
        }
    }

    /// Flat snapshot of all parameters in layer order (weights then biases
    /// within each layer), matching the gradient layout.
    pub fn flat_params(&self) -> Vec<F> {
        let mut out = Vec::new();
        for l in 0..self.acts.len() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
        out
    }
}

fn parse_floats<F: Scalar>(
    line: Option<&str>,
    prefix: &str,
    expect: usize,
) -> Result<Vec<F>, NnError> {
    let body = line
        .and_then(|l| l.strip_prefix(prefix))
        .ok_or_else(|| NnError::Checkpoint(format!("missing {prefix} line")))?;
    let vals: Vec<F> = body
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map(F::of)
                .map_err(|_| NnError::Checkpoint(format!("bad float {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    if vals.len() != expect {
        return Err(NnError::Checkpoint(format!(
            "{prefix} line has {} values, expected {expect}",
            vals.len()
        )));
    }
    Ok(vals)
}

#[allow(clippy::too_many_arguments)]
fn adam_update<F: Scalar>(
    params: &mut [F],
    grads: &[F],
    m: &mut [F],
    v: &mut [F],
    lr: F,
    beta1: F,
    beta2: F,
    eps: F,
    bc1: F,
    bc2: F,
) {
    debug_assert_eq!(params.len(), grads.len(), "gradient shape mismatch");
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (F::one() - beta1) * g;
        v[i] = beta2 * v[i] + (F::one() - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}
