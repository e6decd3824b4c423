//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator whose key is built from the user seed
//! and a purpose tag, and whose stream id is the block or path index. Work
//! split across threads therefore draws the same numbers whatever the
//! thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples per block for block-parallel Monte Carlo.
pub const BLOCK: usize = 4096;

pub fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    key[16..24].copy_from_slice(b"levy-mp\0");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Block sizes covering `n` samples.
pub fn blocks(n: usize) -> Vec<usize> {
    let full = n / BLOCK;
    let mut v = vec![BLOCK; full];
    if !n.is_multiple_of(BLOCK) {
        v.push(n % BLOCK);
    }
    v
}
