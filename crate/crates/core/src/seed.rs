//! Deterministic, splittable seed streams.
//!
//! A [`SeedStream`] is a 64-bit key. Child streams are derived by mixing the
//! key with an identifier, so the random numbers used by a unit of work depend
//! only on the root seed and the path of identifiers leading to it, never on
//! which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Samples per independently seeded chunk in [`chunked_histogram`].
pub const CHUNK_SAMPLES: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    key: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream {
            key: splitmix64(seed),
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn child(&self, id: u64) -> Self {
        SeedStream {
            key: splitmix64(self.key ^ splitmix64(id.wrapping_add(0x632b_e59b_d9b4_e019))),
        }
    }

    /// Child stream named by a purpose tag.
    pub fn tagged(&self, tag: &str) -> Self {
        // FNV-1a over the tag bytes.
        let h = tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        });
        self.child(h)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }
}

/// Draws `samples` outcomes in `0..bins` and returns their counts.
///
/// Samples are split into chunks of [`CHUNK_SAMPLES`], chunk `c` drawing from
/// `stream.child(c)`. Chunks may run on any rayon worker; the result is the
/// same for every thread count.
pub fn chunked_histogram<F>(samples: u64, stream: SeedStream, bins: usize, draw: F) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng) -> usize + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SAMPLES);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.child(c).rng();
            let size = CHUNK_SAMPLES.min(samples - c * CHUNK_SAMPLES);
            let mut counts = vec![0u64; bins];
            for _ in 0..size {
                counts[draw(&mut rng)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}
