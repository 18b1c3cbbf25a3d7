//! Deterministic per-path random streams.
//!
//! Path `k` of a run with master seed `s` draws from a generator keyed by a
//! 128-bit hash of `(s, k)`, so results never depend on how paths are
//! scheduled across workers.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type PathRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 128-bit stream key for path `k`.
pub fn stream_key(seed: u64, k: u64) -> u128 {
    let mut a = seed ^ 0x6A09_E667_F3BC_C908;
    let mut b = k.wrapping_mul(GOLDEN) ^ 0xBB67_AE85_84CA_A73B;
    let lo = splitmix(&mut a) ^ splitmix(&mut b);
    let hi = splitmix(&mut b).rotate_left(17) ^ splitmix(&mut a);
    ((hi as u128) << 64) | lo as u128
}

pub fn path_rng(seed: u64, k: u64) -> PathRng {
    let key = stream_key(seed, k);
    let mut s0 = key as u64;
    let mut s1 = (key >> 64) as u64;
    let mut bytes = [0u8; 32];
    for (i, chunk) in bytes.chunks_mut(8).enumerate() {
        let w = if i % 2 == 0 {
            splitmix(&mut s0)
        } else {
            splitmix(&mut s1)
        };
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    // An all-zero state is a fixed point of xoshiro; `from_seed` remaps it.
    PathRng::from_seed(bytes)
}
