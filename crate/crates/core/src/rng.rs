//! Deterministic, splittable random streams.
//!
//! A [`Seed`] names one ChaCha8 keystream: the master seed keys the cipher and
//! the stream id selects one of its 2^64 independent streams. Children are
//! derived by hashing a label into a new stream id, so the stream a path uses
//! depends only on its label or index, never on which worker happens to run
//! it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream_id: u64,
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Seed {
            master,
            stream_id: 0,
        }
    }

    /// Child seed keyed by an integer, used for per-path and per-seed streams.
    pub fn child(self, index: u64) -> Self {
        self.mix(mix64(index ^ 0x94D0_49BB_1331_11EB))
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream_id);
        rng
    }

    fn mix(self, salt: u64) -> Self {
        Seed {
            master: self.master,
            stream_id: mix64(self.stream_id.rotate_left(17) ^ salt ^ 0xD134_2543_DE82_EF95),
        }
    }
}

/// Derives a child seed from a text label. Same `(seed, label)` gives the same
/// child on every call.
pub fn derive_stream(seed: Seed, label: &str) -> Seed {
    seed.mix(fnv1a64(label.as_bytes()))
}

/// One standard normal draw. All simulators sample Gaussians through here so
/// the method is fixed in one place.
#[inline]
pub fn standard_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
