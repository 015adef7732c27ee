//! Seed derivation: one master seed fans out into independent per-trial,
//! per-role streams, so changing one role's draw pattern never disturbs the
//! others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream tags. Values are arbitrary but frozen: changing them reshuffles
/// every derived stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Synth,
    Adversary,
    Defender,
    Attack,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::Synth => 0x5359_4e54,
            Role::Adversary => 0x4144_5645,
            Role::Defender => 0x4445_4645,
            Role::Attack => 0x4154_544b,
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive mix of two seeds.
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix(splitmix(a) ^ b.rotate_left(17))
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    mix(master, trial)
}

pub fn role_seed(trial_seed: u64, role: Role) -> u64 {
    mix(trial_seed, role.tag())
}

pub fn role_rng(trial_seed: u64, role: Role) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(role_seed(trial_seed, role))
}
