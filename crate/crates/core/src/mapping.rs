// SPDX-License-Identifier: Apache-2.0

//! Conductance mapping.
//!
//! A signed matrix `U` is realized as the difference of two conductance
//! arrays `A − B = α·U`. Entries of `A` sit at a range limit chosen by the
//! sign of `u`, and `B` carries the remainder. Values that fall outside the
//! physical window are clamped and counted as truncations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rng::RngStream;

// round-off allowance at the range edges before a value counts as truncated
const EDGE_TOL: f64 = 1e-9;

/// Programmable conductance window of a memristive device, in siemens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceRange {
    pub omega_min: f64,
    pub omega_max: f64,
}

impl Default for DeviceRange {
    fn default() -> Self {
        DeviceRange { omega_min: 0.1e-6, omega_max: 30e-6 }
    }
}

impl DeviceRange {
    pub fn new(omega_min: f64, omega_max: f64) -> Result<Self> {
        let r = DeviceRange { omega_min, omega_max };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_min < self.omega_max) {
            return Err(Error::Config(format!(
                "device range must satisfy 0 < min < max, got [{:e}, {:e}]",
                self.omega_min, self.omega_max
            )));
        }
        Ok(())
    }

    /// Usable span `ω = ω_max − ω_min`.
    pub fn omega(&self) -> f64 {
        self.omega_max - self.omega_min
    }

    pub fn clamp(&self, g: f64) -> f64 {
        g.clamp(self.omega_min, self.omega_max)
    }

    pub fn contains(&self, g: f64) -> bool {
        (self.omega_min..=self.omega_max).contains(&g)
    }
}

/// How the mapping factor α is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MappingScheme {
    /// Fixed factor `α = ω / (β σ_u)`; entries beyond `β σ_u` get truncated.
    Fmf { beta: f64 },
    /// Adjustable factor `α = ω / max|u|`; never truncates.
    #[default]
    Amf,
}

impl MappingScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MappingScheme::Fmf { beta } if !(beta > 0.0) => {
                Err(Error::Config(format!("FMF beta must be positive, got {beta}")))
            }
            _ => Ok(()),
        }
    }
}

/// Population standard deviation of all entries.
pub fn entry_std(u: &Mat) -> f64 {
    let n = u.as_slice().len() as f64;
    let mean = u.as_slice().iter().sum::<f64>() / n;
    (u.as_slice().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Mapping factor in siemens per matrix unit.
pub fn compute_alpha(u: &Mat, scheme: MappingScheme, range: &DeviceRange) -> Result<f64> {
    let max = u.max_abs();
    if !(max > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    match scheme {
        MappingScheme::Amf => Ok(range.omega() / max),
        MappingScheme::Fmf { beta } => {
            let sigma = entry_std(u);
            if !(sigma > 0.0) {
                return Err(Error::ZeroMatrix);
            }
            Ok(range.omega() / (beta * sigma))
        }
    }
}

/// Mapping factor for a feedback stage realizing `diag(d) + R` where the
/// diagonal part sits on the single-device array C and `R` on the D/E pair.
///
/// Both parts share one factor. The scheme is applied to the combined
/// matrix; under AMF the factor is further capped so every C device fits
/// below `ω_max`, which keeps AMF truncation-free.
pub fn feedback_alpha(
    diag: &[f64],
    rest: &Mat,
    scheme: MappingScheme,
    range: &DeviceRange,
) -> Result<f64> {
    let mut u = rest.clone();
    for (i, d) in diag.iter().enumerate() {
        u[(i, i)] += d;
    }
    let alpha = compute_alpha(&u, scheme, range)?;
    match scheme {
        MappingScheme::Amf => {
            let max_diag = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            let rest_max = rest.max_abs();
            let mut a = alpha;
            if max_diag > 0.0 {
                a = a.min(range.omega_max / max_diag);
            }
            if rest_max > 0.0 {
                a = a.min(range.omega() / rest_max);
            }
            Ok(a)
        }
        MappingScheme::Fmf { .. } => Ok(alpha),
    }
}

/// Two conductance arrays whose difference represents `α·U`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductancePair {
    pub a: Mat,
    pub b: Mat,
    pub alpha: f64,
    /// Entries whose target fell outside the device window.
    pub truncated_count: usize,
}

impl ConductancePair {
    pub fn difference(&self) -> Mat {
        self.a.sub(&self.b)
    }

    pub fn len(&self) -> usize {
        self.a.as_slice().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn map_matrix(u: &Mat, alpha: f64, range: &DeviceRange) -> ConductancePair {
    debug_assert!(alpha > 0.0);
    let mut truncated_count = 0;
    let mut a = Mat::zeros(u.rows(), u.cols());
    let mut b = Mat::zeros(u.rows(), u.cols());
    for (i, &x) in u.as_slice().iter().enumerate() {
        let ai = if x > 0.0 { range.omega_max } else { range.omega_min };
        let bi = ai - alpha * x;
        let bc = range.clamp(bi);
        if (bc - bi).abs() > EDGE_TOL * range.omega_max {
            truncated_count += 1;
        }
        a.as_mut_slice()[i] = ai;
        b.as_mut_slice()[i] = bc;
    }
    ConductancePair { a, b, alpha, truncated_count }
}

/// Diagonal C array for `α_fb·Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMapping {
    pub c: Vec<f64>,
    pub feasible: bool,
    pub truncated_count: usize,
}

/// Maps the diagonal `Q` onto C with the feedback factor. Off-diagonal
/// positions of C hold no device. Out-of-range targets are clamped, or
/// rejected in strict mode.
pub fn map_q_onto_c(
    q: &[f64],
    alpha_fb: f64,
    range: &DeviceRange,
    strict: bool,
) -> Result<DiagonalMapping> {
    let mut truncated_count = 0;
    let mut c = Vec::with_capacity(q.len());
    for &qi in q {
        let target = alpha_fb * qi;
        if (range.clamp(target) - target).abs() > EDGE_TOL * range.omega_max {
            if strict {
                return Err(Error::InfeasibleMapping { value: target });
            }
            truncated_count += 1;
        }
        c.push(range.clamp(target));
    }
    Ok(DiagonalMapping { c, feasible: truncated_count == 0, truncated_count })
}

/// Where the shared input device of the amplifier stage is programmed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaPlacement {
    /// `θ_0 = ω_max`: every amplifier device as large as its ratio allows.
    #[default]
    Max,
    /// `θ_0 = √(ω_min ω_max)`, raised only when the weakest user needs it.
    GeometricMid,
}

/// Amplifier devices realizing `Θ = Λ / √max(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMapping {
    pub theta_0: f64,
    /// 2K feedback devices: users then their imaginary halves.
    pub theta: Vec<f64>,
    /// `√max(λ)`
    pub lambda_norm: f64,
    pub truncated_count: usize,
}

pub fn map_lambda_onto_theta(
    lambda: &[f64],
    range: &DeviceRange,
    placement: ThetaPlacement,
) -> Result<ThetaMapping> {
    if let Some((index, &value)) = lambda.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(Error::NonPositiveLambda { index, value });
    }
    let lambda_max = lambda.iter().fold(0.0f64, |m, &l| m.max(l));
    let ratios: Vec<f64> = lambda.iter().map(|l| (l / lambda_max).sqrt()).collect();
    let r_min = ratios.iter().fold(1.0f64, |m, &r| m.min(r));
    if r_min * range.omega_max < range.omega_min {
        return Err(Error::DynamicRangeExceeded { ratio: r_min * r_min });
    }
    let theta_0 = match placement {
        ThetaPlacement::Max => range.omega_max,
        ThetaPlacement::GeometricMid => {
            let mid = (range.omega_min * range.omega_max).sqrt();
            if r_min * mid < range.omega_min {
                range.omega_max.min(range.omega_min / r_min)
            } else {
                mid
            }
        }
    };
    let mut truncated_count = 0;
    let mut half = Vec::with_capacity(lambda.len());
    for r in &ratios {
        let target = r * theta_0;
        let g = range.clamp(target);
        if (g - target).abs() > EDGE_TOL * range.omega_max {
            truncated_count += 1;
        }
        half.push(g);
    }
    let theta = half.iter().chain(&half).copied().collect();
    Ok(ThetaMapping { theta_0, theta, lambda_norm: lambda_max.sqrt(), truncated_count: 2 * truncated_count })
}

/// Adds independent `N(0, σ_m²)` deviations to every device and clamps the
/// result to the physical window.
pub fn deviate_devices(devices: &mut [f64], sigma_m: f64, range: &DeviceRange, stream: &mut RngStream) {
    if sigma_m == 0.0 {
        return;
    }
    for g in devices.iter_mut() {
        *g = range.clamp(*g + sigma_m * stream.gaussian());
    }
}

/// Every scalar introduced between the digital estimate and the analog
/// output voltages.
///
/// For an ideal circuit `v_out = (α_in · v_scale · lambda_norm / α_fb) · ŝ`,
/// so the estimate is recovered as `ŝ = out_gain · v_out`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleLedger {
    pub alpha_in: f64,
    pub alpha_fb: f64,
    pub lambda_norm: f64,
    pub v_scale: f64,
    pub out_gain: f64,
}

impl ScaleLedger {
    pub fn new(alpha_in: f64, alpha_fb: f64, lambda_norm: f64) -> Self {
        let mut l = ScaleLedger { alpha_in, alpha_fb, lambda_norm, v_scale: 1.0, out_gain: 0.0 };
        l.set_input_scale(1.0);
        l
    }

    pub fn set_input_scale(&mut self, v_scale: f64) {
        self.v_scale = v_scale;
        self.out_gain = self.alpha_fb / (self.alpha_in * self.lambda_norm * v_scale);
    }

    pub fn decode(&self, v_out: &[f64]) -> Vec<f64> {
        v_out.iter().map(|v| v * self.out_gain).collect()
    }
}
