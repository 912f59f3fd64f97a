//! Counter-based Gaussian streams.
//!
//! Every variate is addressed by `(key, stream, position)`: the key comes from
//! the master seed and a purpose tag, the stream is the sample index and the
//! position is the cell index. Cell `i` always consumes words `4i..4i+4` of its
//! ChaCha stream, so a value never depends on how many other cells or samples
//! were drawn, or in which order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Purpose tags keep unrelated random inputs on disjoint keys.
pub mod tag {
    pub const WHITE_NOISE: u64 = 0x5748_4954_454e_4f49;
    pub const SPECTRAL: u64 = 0x5350_4543_5452_414c;
    pub const PERTURBATION: u64 = 0x5045_5254_5552_4221;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a purpose tag.
pub fn derive_key(master_seed: u64, purpose: u64) -> u64 {
    splitmix(splitmix(master_seed) ^ purpose.rotate_left(17))
}

#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub fn new(key: u64, stream: u64) -> Self {
        let mut seed = [0u8; 32];
        for (k, chunk) in seed.chunks_mut(8).enumerate() {
            chunk.copy_from_slice(&splitmix(key ^ (k as u64).wrapping_mul(0xa076_1d64_78bd_642f)).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Positions the stream at cell `position`.
    pub fn seek(&mut self, position: u64) {
        self.rng.set_word_pos(4 * position as u128);
    }

    /// Standard normal for the current cell, advancing one cell.
    pub fn next_normal(&mut self) -> f64 {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        // (0, 1] avoids ln(0)
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn fill_normals(&mut self, out: &mut [f64], scale: f64) {
        for v in out.iter_mut() {
            *v = scale * self.next_normal();
        }
    }
}
