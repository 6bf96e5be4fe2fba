//! Deterministic random streams for parallel Monte Carlo.
//!
//! A run is keyed by `SHA-256(seed ‖ tag)`; work unit `i` draws from ChaCha8
//! stream `i` under that key. Work is cut into fixed-size chunks, so results
//! do not depend on how many threads execute them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

/// Number of samples drawn from one stream by the batch helpers.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    key: [u8; 32],
}

impl StreamFactory {
    pub fn new(seed: u64, tag: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(tag.as_bytes());
        StreamFactory {
            key: hasher.finalize().into(),
        }
    }

    /// Independent key for a named sub-task.
    pub fn derive(&self, tag: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update(tag.as_bytes());
        StreamFactory {
            key: hasher.finalize().into(),
        }
    }

    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(id);
        rng
    }
}

/// Draws `n` values, chunk `k` from stream `k`, in parallel.
pub fn sample_batch<T, E, F>(factory: &StreamFactory, n: usize, draw: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T, E> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = factory.stream(k as u64);
            let len = CHUNK.min(n - k * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect::<Result<Vec<T>, E>>()
        })
        .collect::<Result<_, E>>()?;
    Ok(parts.into_iter().flatten().collect())
}
