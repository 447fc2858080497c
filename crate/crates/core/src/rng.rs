//! Reproducible random-number streams.
//!
//! Every sampler in this crate draws from ChaCha12, a counter-based stream
//! cipher generator. A master `u64` seed keys the cipher; logically distinct
//! random inputs live on distinct 64-bit streams of the same key, so a scene
//! is reproducible no matter in which order its parts are generated.
//!
//! Stream allocation:
//! - [`SCENE_STREAM`]: scene-level draws (mixing intensity, parent count,
//!   parent positions, in index order).
//! - [`parent_stream`]`(k)`: everything local to parent `k` (cluster size,
//!   offsets, grain radii).
//! - [`JITTER_STREAM`]: the estimator's query-lattice jitter offset.
//! - [`MC_STREAM`], [`MC_INNER_STREAM`]: outer/inner loops of semi-analytic
//!   Monte Carlo evaluations.
//!
//! Replication `r` of a batch keyed by `seed` uses `seed ^ r` as its key.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub const SCENE_STREAM: u64 = 0;
pub const JITTER_STREAM: u64 = 1 << 40;
pub const MC_STREAM: u64 = (1 << 40) + 1;
pub const MC_INNER_STREAM: u64 = (1 << 40) + 2;

/// Generator for stream `stream` of key `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for draws local to parent point `k` of a scene.
pub fn parent_stream(k: usize) -> u64 {
    1 + k as u64
}

/// Key for replication `rep` of a batch keyed by `seed`.
pub fn replication_seed(seed: u64, rep: usize) -> u64 {
    seed ^ rep as u64
}
