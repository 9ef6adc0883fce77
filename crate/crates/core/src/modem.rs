// SPDX-License-Identifier: Apache-2.0

//! Gray-coded square QAM, AWGN and hard-decision bit error counting.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{stack, ScenarioParams};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Square QAM constellation with a binary-reflected Gray map on each axis.
///
/// Each symbol carries `bits_per_symbol` bits: the first half select the
/// in-phase level, the second half the quadrature level, most significant
/// bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_axis: usize,
    levels: usize,
    /// Distance from a level to its decision boundary.
    scale: f64,
    p_s: f64,
}

impl Constellation {
    /// `order` ∈ {4, 16, 64}; `p_s` is the average symbol energy.
    pub fn new(order: usize, p_s: f64) -> Result<Self> {
        let bits_per_axis = match order {
            4 => 1,
            16 => 2,
            64 => 3,
            _ => return Err(Error::Config(format!("unsupported QAM order {order}"))),
        };
        if !(p_s > 0.0) {
            return Err(Error::Config("symbol energy must be positive".into()));
        }
        let levels = 1 << bits_per_axis;
        // mean |point|² of the odd-integer grid is 2(M−1)/3 (42 for 64-QAM)
        let grid_energy = 2.0 * (order as f64 - 1.0) / 3.0;
        Ok(Constellation { order, bits_per_axis, levels, scale: (p_s / grid_energy).sqrt(), p_s })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    pub fn p_s(&self) -> f64 {
        self.p_s
    }

    /// Amplitude of the odd-integer grid unit.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn level(&self, index: usize) -> f64 {
        (2.0 * index as f64 - (self.levels as f64 - 1.0)) * self.scale
    }

    fn axis_bits_to_index(&self, bits: &[u8]) -> usize {
        let gray = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        // inverse Gray code
        let mut index = gray;
        let mut shift = gray >> 1;
        while shift != 0 {
            index ^= shift;
            shift >>= 1;
        }
        index
    }

    fn index_to_axis_bits(&self, index: usize, out: &mut Vec<u8>) {
        let gray = index ^ (index >> 1);
        for b in (0..self.bits_per_axis).rev() {
            out.push(((gray >> b) & 1) as u8);
        }
    }

    fn decide_index(&self, x: f64) -> usize {
        let i = ((x / self.scale + self.levels as f64 - 1.0) / 2.0).round();
        i.clamp(0.0, self.levels as f64 - 1.0) as usize
    }

    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let bps = self.bits_per_symbol();
        if !bits.len().is_multiple_of(bps) {
            return Err(Error::BadLength { len: bits.len(), bits_per_symbol: bps });
        }
        Ok(bits
            .chunks(bps)
            .map(|chunk| {
                let (i_bits, q_bits) = chunk.split_at(self.bits_per_axis);
                Complex64::new(
                    self.level(self.axis_bits_to_index(i_bits)),
                    self.level(self.axis_bits_to_index(q_bits)),
                )
            })
            .collect())
    }

    /// Nearest-point hard decision back to bits.
    pub fn demap(&self, symbol: Complex64) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.bits_per_symbol());
        self.index_to_axis_bits(self.decide_index(symbol.re), &mut out);
        self.index_to_axis_bits(self.decide_index(symbol.im), &mut out);
        out
    }

    pub fn points(&self) -> Vec<Complex64> {
        let all: Vec<u8> = (0..self.order)
            .flat_map(|p| (0..self.bits_per_symbol()).rev().map(move |b| ((p >> b) & 1) as u8))
            .collect();
        self.modulate(&all).expect("whole symbols")
    }
}

/// How a configured SNR maps to a noise variance when all λ_k = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrConvention {
    /// Received signal power over noise power, per receive antenna:
    /// `E‖Hs‖² / E‖n‖²`.
    PerAntenna,
    /// Per-user SNR after coherent combining over all antennas,
    /// `E‖h_k‖²·p_s / σn²`. A linear detector output then sits close to this
    /// value for R ≫ K.
    PerUserCombined,
}

/// Complex noise variance σn² per receive antenna for a configured SNR.
pub fn noise_variance(
    convention: SnrConvention,
    snr_db: f64,
    params: &ScenarioParams,
    p_s: f64,
) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    let per_link = 2.0 * params.sigma_g2() * p_s;
    match convention {
        SnrConvention::PerAntenna => params.users as f64 * per_link / snr,
        SnrConvention::PerUserCombined => params.antennas as f64 * per_link / snr,
    }
}

/// Transmitted and received signals of one channel use.
#[derive(Debug, Clone)]
pub struct Frame {
    pub bits: Vec<u8>,
    pub s_c: Vec<Complex64>,
    /// `[Re s; Im s]`
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    /// Complex noise variance σn² per antenna (σn²/2 per real dimension).
    pub sigma_n2: f64,
}

impl Frame {
    pub fn new(bits: Vec<u8>, s_c: Vec<Complex64>, y: Vec<f64>, sigma_n2: f64) -> Self {
        let s = stack(&s_c);
        Frame { bits, s_c, s, y, sigma_n2 }
    }
}

/// Adds complex AWGN of variance σn² (σn²/2 per real dimension).
pub fn apply_awgn(y_clean: &[f64], sigma_n2: f64, stream: &mut RngStream) -> Vec<f64> {
    debug_assert!(sigma_n2 >= 0.0);
    let sd = (sigma_n2 / 2.0).sqrt();
    y_clean.iter().map(|&v| v + sd * stream.gaussian()).collect()
}

/// Hard-decides `s_hat` (stacked real layout) and counts bit errors against
/// the frame's transmitted bits. Returns `(bit_errors, bit_total)`.
pub fn demap_and_count(s_hat: &[f64], frame: &Frame, constellation: &Constellation) -> (u64, u64) {
    let k = s_hat.len() / 2;
    let bps = constellation.bits_per_symbol();
    let mut errors = 0u64;
    for user in 0..k {
        let decided = constellation.demap(Complex64::new(s_hat[user], s_hat[k + user]));
        let sent = &frame.bits[user * bps..(user + 1) * bps];
        errors += decided.iter().zip(sent).filter(|(a, b)| a != b).count() as u64;
    }
    (errors, (k * bps) as u64)
}
