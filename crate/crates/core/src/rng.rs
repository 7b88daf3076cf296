//! Deterministic random sub-streams.
//!
//! Every draw in a run comes from a stream keyed by
//! `(master seed, replication, purpose, client, step)`. Keys are mixed with
//! the SplitMix64 finalizer and seed a ChaCha8 generator, so adding clients or
//! steps never shifts the draws of existing ones, and replications can run on
//! any thread in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. The discriminant is part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Population = 1,
    InitialBelief = 2,
    Process = 3,
    Observation = 4,
    Network = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(acc: u64, word: u64) -> u64 {
    splitmix64(acc ^ splitmix64(word))
}

/// Stream factory for one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    master: u64,
}

impl Streams {
    pub fn new(master_seed: u64) -> Self {
        Self { master: master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master
    }

    pub fn replication(&self, replication: u64) -> ReplicationStreams {
        ReplicationStreams {
            key: mix(splitmix64(self.master), replication),
        }
    }
}

/// Streams owned by a single replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicationStreams {
    key: u64,
}

impl ReplicationStreams {
    pub fn stream(&self, purpose: Purpose, client: usize, step: usize) -> StreamRng {
        let k = mix(self.key, purpose as u64);
        let k = mix(k, client as u64);
        let k = mix(k, step as u64);
        ChaCha8Rng::seed_from_u64(k)
    }

    /// Stream that is not tied to a client (population draws).
    pub fn shared(&self, purpose: Purpose) -> StreamRng {
        self.stream(purpose, usize::MAX, usize::MAX)
    }
}
