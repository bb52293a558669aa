//! Actor-critic benchmark on a procedurally generated 2D racing task.
//!
//! The crate bundles everything the experiments need: the circuit simulator
//! (`env`), a small dense-network engine with Adam (`nn`), the Gaussian
//! policy head (`policy`), discounted-gain bookkeeping (`returns`), the
//! experience buffer and its sampling regimes (`replay`), the five trainers
//! (`algos`), and the experiment harness with its file formats (`harness`).
//!
//! All numeric code is generic over [`scalar::Scalar`]; the aliases below fix
//! the precision used by the binary and the tests.

pub mod algos;
pub mod env;
pub mod harness;
pub mod nn;
pub mod policy;
pub mod replay;
pub mod returns;
pub mod scalar;

/// Default scalar for training and evaluation.
pub type Real = f64;

/// Default-precision network.
pub type Mlp = nn::Mlp<Real>;

/// Default-precision racetrack.
pub type Track = env::Track<Real>;
