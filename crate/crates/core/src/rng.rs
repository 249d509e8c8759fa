//! Counter-based random substreams.
//!
//! Every random draw in an experiment comes from a stream keyed by
//! `(master seed, trial, user, purpose)`. Streams never overlap in use, so
//! changing one user's CSI error variance leaves all channel draws intact and
//! trials can run on any thread in any order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::numerics::ComplexMatrix;

pub type StreamRng = ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Channel = 1,
    CsiError = 2,
    Instance = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for one `(trial, user, purpose)` cell.
pub fn substream(seed: u64, trial: u64, user: u64, purpose: Purpose) -> StreamRng {
    let mut key = [0u8; 32];
    let words = [
        splitmix64(seed),
        splitmix64(trial ^ 0x5151_5151_0000_0000),
        splitmix64(user ^ 0x7a7a_0000_7a7a_0000),
        splitmix64(purpose as u64),
    ];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Circularly symmetric complex Gaussian with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows x cols` matrix of i.i.d. `CN(0, variance)` entries, drawn row by row.
pub fn complex_normal_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> ComplexMatrix {
    let scale = variance.sqrt();
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng) * scale;
        }
    }
    m
}
