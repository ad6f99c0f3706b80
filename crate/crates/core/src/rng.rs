//! Seed handling. All randomness in the crate flows from explicit `u64` seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for one Monte Carlo trial. Depends only on
/// `(seed, trial)`, so trials can run in any order on any worker.
pub fn trial_stream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Mixes a master seed with a sequence of labels into a sub-seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut state = master;
    for &label in labels {
        state = mix(state ^ mix(label.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    state
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
