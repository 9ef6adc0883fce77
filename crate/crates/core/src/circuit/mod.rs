// SPDX-License-Identifier: Apache-2.0

//! Crossbar detector circuits.
//!
//! Both topologies share an input stage `A − B` driven by `v_in` (B through
//! inverters) and a feedback stage `C + D − E` around 2K inverting OAs (C and
//! D through followers, E through inverters), so that
//! `v1 = −(C + D − E)⁻¹ (A − B) v_in`. The proposed circuit adds 2K inverting
//! amplifiers with gain `θ_0/θ_k` that undo the large-scale fading.

mod solve;
mod transient;

pub use solve::{solve_finite_gain, solve_ideal};
pub use transient::{solve_transient, TransientOptions};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::detector::DetectorKind;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::mapping::{
    compute_alpha, deviate_devices, feedback_alpha, map_lambda_onto_theta, map_matrix, map_q_onto_c,
    DeviceRange, MappingScheme, ScaleLedger, ThetaPlacement,
};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Gram-decomposition circuit with the LSFC amplifier stage.
    Proposed,
    /// Direct inversion of `HᵀH (+ρI)`.
    Conventional,
}

/// Operational amplifier model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OaModel {
    pub open_loop_gain_db: f64,
    pub gbp_hz: f64,
    pub ideal_inverters: bool,
    pub ideal_followers: bool,
}

impl Default for OaModel {
    fn default() -> Self {
        OaModel { open_loop_gain_db: 100.0, gbp_hz: 500e6, ideal_inverters: true, ideal_followers: true }
    }
}

impl OaModel {
    pub fn with_gain_db(db: f64) -> Self {
        OaModel { open_loop_gain_db: db, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.open_loop_gain_db.is_finite() || !(self.gbp_hz > 0.0) {
            return Err(Error::Config("OA gain must be finite and GBP positive".into()));
        }
        Ok(())
    }

    /// `A_OL` as a plain ratio.
    pub fn open_loop_gain(&self) -> f64 {
        10f64.powf(self.open_loop_gain_db / 20.0)
    }

    /// Dominant-pole time constant `A_OL / (2π·GBP)`.
    pub fn tau(&self) -> f64 {
        self.open_loop_gain() / (2.0 * std::f64::consts::PI * self.gbp_hz)
    }

    /// Voltage gain of a unity follower.
    pub fn follower_gain(&self) -> f64 {
        if self.ideal_followers {
            1.0
        } else {
            let a = self.open_loop_gain();
            a / (1.0 + a)
        }
    }

    /// Gain magnitude of a unity inverter built from two equal resistors.
    pub fn inverter_gain(&self) -> f64 {
        if self.ideal_inverters {
            1.0
        } else {
            1.0 / (1.0 + 2.0 / self.open_loop_gain())
        }
    }
}

/// How a detector is laid out on devices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    pub scheme: MappingScheme,
    pub range: DeviceRange,
    pub theta_placement: ThetaPlacement,
    /// Reject programs whose C targets leave the device window.
    pub strict: bool,
}

impl Default for MappingConfig {
    fn default() -> Self {
        MappingConfig {
            scheme: MappingScheme::Amf,
            range: DeviceRange::default(),
            theta_placement: ThetaPlacement::Max,
            strict: false,
        }
    }
}

/// Uniform DAC/ADC quantization. `None` means an ideal converter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Converters {
    pub dac_bits: Option<u32>,
    pub adc_bits: Option<u32>,
}

/// Rounds to a `bits`-bit uniform grid spanning `±full_scale`.
pub fn quantize(v: &[f64], bits: u32, full_scale: f64) -> Vec<f64> {
    let step = full_scale / 2f64.powi(bits as i32 - 1);
    v.iter().map(|x| ((x / step).round() * step).clamp(-full_scale, full_scale)).collect()
}

/// Every programmed conductance of one detector circuit, in siemens.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceProgram {
    pub topology: Topology,
    /// 2K×2R, driven by `+v_in`.
    pub a: Mat,
    /// 2K×2R, driven by `−v_in`.
    pub b: Mat,
    /// Diagonal feedback devices, driven by `+v1`.
    pub c: Vec<f64>,
    /// 2K×2K, driven by `+v1`.
    pub d: Mat,
    /// 2K×2K, driven by `−v1`.
    pub e: Mat,
    /// Amplifier input devices, one per output. Empty for the conventional circuit.
    pub theta_0: Vec<f64>,
    /// Amplifier feedback devices. Empty for the conventional circuit.
    pub theta: Vec<f64>,
    pub ledger: ScaleLedger,
    pub range: DeviceRange,
    pub truncated_count: usize,
    pub mapped_count: usize,
}

impl ConductanceProgram {
    pub fn outputs(&self) -> usize {
        self.c.len()
    }

    pub fn inputs(&self) -> usize {
        self.a.cols()
    }

    pub fn truncated_fraction(&self) -> f64 {
        if self.mapped_count == 0 {
            0.0
        } else {
            self.truncated_count as f64 / self.mapped_count as f64
        }
    }

    /// `C + D − E`
    pub fn feedback_matrix(&self) -> Mat {
        let mut m = self.d.sub(&self.e);
        for (i, c) in self.c.iter().enumerate() {
            m[(i, i)] += c;
        }
        m
    }

    /// `A − B`
    pub fn input_matrix(&self) -> Mat {
        self.a.sub(&self.b)
    }

    /// Total conductance attached to each inversion node.
    pub fn node_loading(&self) -> Vec<f64> {
        (0..self.outputs())
            .map(|j| {
                self.a.row(j).iter().sum::<f64>()
                    + self.b.row(j).iter().sum::<f64>()
                    + self.c[j]
                    + self.d.row(j).iter().sum::<f64>()
                    + self.e.row(j).iter().sum::<f64>()
            })
            .collect()
    }

    /// `θ_k / θ_0` per output; 1 without an amplifier stage.
    pub fn theta_ratio(&self) -> Vec<f64> {
        if self.theta.is_empty() {
            vec![1.0; self.outputs()]
        } else {
            self.theta.iter().zip(&self.theta_0).map(|(t, t0)| t / t0).collect()
        }
    }

    /// Adds an independent `N(0, σ_m²)` error to every device, then clamps.
    /// Amplifier devices are skipped when `include_theta` is false.
    pub fn inject_deviation(&mut self, sigma_m: f64, include_theta: bool, stream: &mut RngStream) {
        let r = self.range;
        deviate_devices(self.a.as_mut_slice(), sigma_m, &r, stream);
        deviate_devices(self.b.as_mut_slice(), sigma_m, &r, stream);
        deviate_devices(&mut self.c, sigma_m, &r, stream);
        deviate_devices(self.d.as_mut_slice(), sigma_m, &r, stream);
        deviate_devices(self.e.as_mut_slice(), sigma_m, &r, stream);
        if include_theta {
            deviate_devices(&mut self.theta_0, sigma_m, &r, stream);
            deviate_devices(&mut self.theta, sigma_m, &r, stream);
        }
    }

    /// Input voltages for a received vector, scaled to a 1 V peak, and the
    /// ledger that matches them.
    pub fn input_voltages(&self, y: &[f64], converters: &Converters) -> Result<(Vec<f64>, ScaleLedger)> {
        if y.len() != self.inputs() {
            return Err(Error::Dimension(format!("{} inputs for a {}-input program", y.len(), self.inputs())));
        }
        let peak = crate::linalg::norm_inf(y);
        let v_scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
        let mut ledger = self.ledger;
        ledger.set_input_scale(v_scale);
        let v_in: Vec<f64> = y.iter().map(|v| v * v_scale).collect();
        let v_in = match converters.dac_bits {
            Some(bits) => quantize(&v_in, bits, 1.0),
            None => v_in,
        };
        Ok((v_in, ledger))
    }

    /// Digital estimate from output voltages.
    pub fn read_out(&self, v_out: &[f64], ledger: &ScaleLedger, converters: &Converters) -> Vec<f64> {
        match converters.adc_bits {
            Some(bits) => {
                let fs = crate::linalg::norm_inf(v_out);
                if fs > 0.0 {
                    ledger.decode(&quantize(v_out, bits, fs))
                } else {
                    ledger.decode(v_out)
                }
            }
            None => ledger.decode(v_out),
        }
    }
}

/// Node voltages of a solved circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSolution {
    pub v_in: Vec<f64>,
    pub v1: Vec<f64>,
    pub v_out: Vec<f64>,
    /// Inverting-input voltages of the inversion OAs.
    pub u: Vec<f64>,
    /// Largest Kirchhoff current imbalance over all OA input nodes, in amperes.
    pub residual: f64,
    pub settle_time_s: Option<f64>,
}

/// The feedback loop of every inversion OA is negative only while its
/// diagonal C device is positive.
pub fn check_stability(prog: &ConductanceProgram) -> Result<()> {
    match prog.c.iter().enumerate().find(|(_, &c)| !(c > 0.0)) {
        Some((index, &value)) => Err(Error::StabilityViolation { index, value }),
        None => Ok(()),
    }
}

fn offdiag_split(m: &Mat) -> (Vec<f64>, Mat) {
    let diag = m.diagonal();
    let mut rest = m.clone();
    for i in 0..m.rows() {
        rest[(i, i)] = 0.0;
    }
    (diag, rest)
}

fn assemble(
    topology: Topology,
    input: &Mat,
    fb_diag: &[f64],
    fb_rest: &Mat,
    cfg: &MappingConfig,
) -> Result<(ConductanceProgram, f64, f64)> {
    let range = cfg.range;
    let alpha_in = compute_alpha(input, cfg.scheme, &range)?;
    let alpha_fb = feedback_alpha(fb_diag, fb_rest, cfg.scheme, &range)?;
    let ab = map_matrix(input, alpha_in, &range);
    let c = map_q_onto_c(fb_diag, alpha_fb, &range, cfg.strict)?;
    let de = map_matrix(fb_rest, alpha_fb, &range);
    let truncated_count = ab.truncated_count + c.truncated_count + de.truncated_count;
    let mapped_count = ab.len() + c.c.len() + de.len();
    let prog = ConductanceProgram {
        topology,
        a: ab.a,
        b: ab.b,
        c: c.c,
        d: de.a,
        e: de.b,
        theta_0: Vec::new(),
        theta: Vec::new(),
        ledger: ScaleLedger::new(alpha_in, alpha_fb, 1.0),
        range,
        truncated_count,
        mapped_count,
    };
    Ok((prog, alpha_in, alpha_fb))
}

/// Proposed circuit: `A − B ← α_in Gᵀ`, `C ← α_fb Q`, `D − E ← α_fb X`,
/// amplifiers `θ_k/θ_0 = √(λ_k / max λ)`.
pub fn build_proposed(
    chan: &ChannelRealization,
    kind: DetectorKind,
    cfg: &MappingConfig,
) -> Result<ConductanceProgram> {
    let theta = map_lambda_onto_theta(&chan.lambda, &cfg.range, cfg.theta_placement)?;
    let gt = chan.g.transpose();
    let (mut prog, alpha_in, alpha_fb) =
        assemble(Topology::Proposed, &gt, chan.q(kind.is_mmse()), &chan.gram.x, cfg)?;
    prog.theta_0 = vec![theta.theta_0; theta.theta.len()];
    prog.theta = theta.theta;
    prog.truncated_count += theta.truncated_count;
    prog.mapped_count += prog.theta.len();
    prog.ledger = ScaleLedger::new(alpha_in, alpha_fb, theta.lambda_norm);
    Ok(prog)
}

/// Conventional circuit: `A − B ← α_in Hᵀ`, `C ← α_fb diag(M)`,
/// `D − E ← α_fb offdiag(M)` with `M = HᵀH (+ρI)`.
pub fn build_conventional(
    chan: &ChannelRealization,
    kind: DetectorKind,
    cfg: &MappingConfig,
) -> Result<ConductanceProgram> {
    let mut m = chan.h.t_matmul(&chan.h);
    let loading = kind.loading(chan.rho);
    for i in 0..m.rows() {
        m[(i, i)] += loading;
    }
    let (diag, rest) = offdiag_split(&m);
    if let Some((index, &value)) = diag.iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
        return Err(Error::StabilityViolation { index, value });
    }
    let ht = chan.h.transpose();
    let (prog, _, _) = assemble(Topology::Conventional, &ht, &diag, &rest, cfg)?;
    Ok(prog)
}

pub fn build(
    topology: Topology,
    chan: &ChannelRealization,
    kind: DetectorKind,
    cfg: &MappingConfig,
) -> Result<ConductanceProgram> {
    match topology {
        Topology::Proposed => build_proposed(chan, kind, cfg),
        Topology::Conventional => build_conventional(chan, kind, cfg),
    }
}
