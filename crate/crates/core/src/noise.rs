//! Random number plumbing: Gaussian increments and seed derivation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Generator used for every run and trajectory.
pub type CboRng = ChaCha8Rng;

/// `n × d` row-major matrix of i.i.d. `N(0, dt)` draws.
pub fn gaussian_increments<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, dt: f64) -> Vec<f64> {
    let mut out = vec![0.0; n * d];
    fill_gaussian_increments(rng, &mut out, dt);
    out
}

/// In-place variant of [`gaussian_increments`].
pub fn fill_gaussian_increments<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64], dt: f64) {
    let scale = dt.sqrt();
    for x in out {
        let z: f64 = rng.sample(StandardNormal);
        *x = scale * z;
    }
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `stream`-th independent generator under `root_seed`.
///
/// Depends only on the pair, never on scheduling, so parallel batches are
/// reproducible for any worker count.
pub fn derive_seed(root_seed: u64, stream: u64) -> u64 {
    mix(mix(root_seed) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng_for(root_seed: u64, stream: u64) -> CboRng {
    CboRng::seed_from_u64(derive_seed(root_seed, stream))
}
