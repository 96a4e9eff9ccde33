//! Deterministic derivation of per-replication random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Environment draws of learning policies are
/// keyed without the policy so that compared policies see coupled seeds; the
/// oracle reference run gets its own stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Environment,
    Policy(u64),
    Oracle,
}

impl Role {
    fn key(self) -> (u64, u64) {
        match self {
            Role::Environment => (1, 0),
            Role::Policy(id) => (2, id),
            Role::Oracle => (3, 0),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base_seed: u64, replication: u64, role: Role) -> u64 {
    let (tag, id) = role.key();
    [replication, tag, id]
        .into_iter()
        .fold(base_seed, |acc, x| splitmix64(splitmix64(acc) ^ x))
}

pub fn stream(base_seed: u64, replication: u64, role: Role) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base_seed, replication, role))
}
