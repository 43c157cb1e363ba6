//! Concrete smooth functions, prox-friendly nonsmooth terms, and seeded
//! instance generators.

mod logistic;
mod nonsmooth;
mod quadratic;

pub use logistic::{make_logistic, LogisticSmooth};
pub use nonsmooth::{subgrad_dist_box, subgrad_dist_l1, StructuredNonsmooth};
pub use quadratic::{make_quadratic, QuadraticSmooth};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
