// SPDX-License-Identifier: Apache-2.0

//! Seeded, stream-addressable random number generation.
//!
//! Every random draw in a simulation comes from an [`RngStream`] addressed by
//! `(seed, stream_id)`. Monte Carlo frames derive their stream ids from the
//! sweep point, the frame index and the purpose of the draw, so results do not
//! depend on how frames are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// What a frame-level stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    SmallScale = 0,
    Placement = 1,
    Bits = 2,
    Noise = 3,
    Deviation = 4,
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    /// Stream for one purpose of one Monte Carlo frame.
    pub fn for_frame(seed: u64, point: u64, frame: u64, purpose: Purpose) -> Self {
        RngStream::new(seed, frame_stream_id(point, frame, purpose))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn gaussian_vec(&mut self, n: usize, mean: f64, sigma: f64) -> Vec<f64> {
        draw_gaussian(self, n, mean, sigma)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.rng.random::<bool>() as u8).collect()
    }
}

/// Stream id layout: 20 bits of sweep point, 40 bits of frame, 4 bits of purpose.
pub fn frame_stream_id(point: u64, frame: u64, purpose: Purpose) -> u64 {
    debug_assert!(point < (1 << 20) && frame < (1 << 40));
    (point << 44) | (frame << 4) | purpose as u64
}

/// `n` i.i.d. draws from `N(mean, sigma²)`.
pub fn draw_gaussian(stream: &mut RngStream, n: usize, mean: f64, sigma: f64) -> Vec<f64> {
    debug_assert!(sigma >= 0.0);
    (0..n).map(|_| mean + sigma * stream.gaussian()).collect()
}
