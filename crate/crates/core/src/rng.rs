//! Counter-based noise: every random value is a pure function of
//! `(seed, sample index, slot index)`.
//!
//! Each sample gets its own ChaCha8 stream; slot `i` owns the four 32-bit
//! words starting at word position `4i`. Drawing slots sequentially or by
//! seeking gives identical values, so samples can be generated in any order
//! and on any number of threads.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS_PER_SLOT: u128 = 4;
const INV_2_53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Noise source for one sample.
pub struct SampleNoise {
    rng: ChaCha8Rng,
}

impl SampleNoise {
    pub fn new(seed: u64, sample: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample);
        Self { rng }
    }

    fn seek(&mut self, slot: u64) {
        self.rng.set_word_pos(slot as u128 * WORDS_PER_SLOT);
    }

    fn next_pair(&mut self) -> (u64, u64) {
        (self.rng.next_u64(), self.rng.next_u64())
    }

    /// Uniform on `(0, 1)` from slot `slot`.
    pub fn uniform(&mut self, slot: u64) -> f64 {
        self.seek(slot);
        open_unit(self.next_pair().0)
    }

    /// Standard normal from slot `slot`.
    pub fn normal(&mut self, slot: u64) -> f64 {
        self.seek(slot);
        let (a, b) = self.next_pair();
        box_muller(a, b)
    }

    /// Standard normals for slots `first .. first + out.len()`.
    pub fn fill_normals(&mut self, first: u64, out: &mut [f64]) {
        self.seek(first);
        for o in out.iter_mut() {
            let (a, b) = self.next_pair();
            *o = box_muller(a, b);
        }
    }

    /// Uniforms for slots `first .. first + out.len()`.
    pub fn fill_uniforms(&mut self, first: u64, out: &mut [f64]) {
        self.seek(first);
        for o in out.iter_mut() {
            *o = open_unit(self.next_pair().0);
        }
    }
}

#[inline]
fn open_unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * INV_2_53
}

#[inline]
fn box_muller(a: u64, b: u64) -> f64 {
    let u1 = open_unit(a);
    let u2 = (b >> 11) as f64 * INV_2_53;
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
