//! Seed derivation for reproducible trials.
//!
//! Every random stream in the crate is keyed by a [`Provenance`]. The stream
//! seed is a 128-bit value obtained by folding the provenance fields through
//! the splitmix64 finalizer:
//!
//! ```text
//! s0 = splitmix64(master_seed ^ 0x243F6A8885A308D3)
//! s1 = splitmix64(s0 ^ degree)
//! s2 = splitmix64(s1 ^ trial)
//! hi = splitmix64(s2 ^ redraw)
//! lo = splitmix64(hi ^ 0x13198A2E03707344)
//! ```
//!
//! The 256-bit ChaCha key is `hi, lo, splitmix64(lo), splitmix64(splitmix64(lo))`
//! in little-endian order. The seed depends only on the provenance, never on
//! scheduling, so parallel and serial runs draw identical values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One step of the splitmix64 generator (increment then finalize).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one coefficient draw: which sweep, which degree, which trial,
/// and which redraw attempt within that trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub degree: usize,
    pub trial: u64,
    pub redraw: u32,
}

impl Provenance {
    pub fn new(master_seed: u64, degree: usize, trial: u64) -> Self {
        Self {
            master_seed,
            degree,
            trial,
            redraw: 0,
        }
    }

    pub fn with_redraw(self, redraw: u32) -> Self {
        Self { redraw, ..self }
    }

    /// The 128-bit mixed seed as `(hi, lo)`.
    pub fn mixed(&self) -> (u64, u64) {
        let s0 = splitmix64(self.master_seed ^ 0x243F_6A88_85A3_08D3);
        let s1 = splitmix64(s0 ^ self.degree as u64);
        let s2 = splitmix64(s1 ^ self.trial);
        let hi = splitmix64(s2 ^ u64::from(self.redraw));
        let lo = splitmix64(hi ^ 0x1319_8A2E_0370_7344);
        (hi, lo)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let (hi, lo) = self.mixed();
        rng_from_words(hi, lo)
    }
}

/// A generator keyed by a single 64-bit value (Monte Carlo moment estimates,
/// random sector sets).
pub fn stream_rng(seed: u64, domain: u64) -> ChaCha8Rng {
    let hi = splitmix64(seed ^ splitmix64(domain));
    let lo = splitmix64(hi ^ 0x1319_8A2E_0370_7344);
    rng_from_words(hi, lo)
}

fn rng_from_words(hi: u64, lo: u64) -> ChaCha8Rng {
    let w2 = splitmix64(lo);
    let w3 = splitmix64(w2);
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([hi, lo, w2, w3]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
