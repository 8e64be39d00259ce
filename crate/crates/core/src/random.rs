//! Seeded random number streams.
//!
//! Every consumer derives its generator from a `(seed, stream)` pair so that
//! independent jobs (k-means restarts, grid points) draw from disjoint streams
//! and produce the same values regardless of execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::tensor::{Dims, Tensor3};

pub type Rng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Tensor with i.i.d. standard normal entries.
pub fn normal_tensor(dims: Dims, rng: &mut Rng) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| StandardNormal.sample(rng))
}

/// Tensor with i.i.d. standard normal entries drawn from stream 0 of `seed`.
pub fn random_tensor(dims: Dims, seed: u64) -> Tensor3 {
    normal_tensor(dims, &mut rng_for(seed, 0))
}
