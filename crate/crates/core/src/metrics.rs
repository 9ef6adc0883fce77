// SPDX-License-Identifier: Apache-2.0

//! Detection quality and hardware cost.

use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitSolution, ConductanceProgram, Topology};
use crate::detector::FlopReport;
use crate::error::{Error, Result};

/// `Σ‖ŝ − s‖² / Σ‖s‖²` over a batch of equally shaped vectors.
pub fn nmse(s_hat: &[Vec<f64>], s: &[Vec<f64>]) -> Result<f64> {
    if s_hat.len() != s.len() {
        return Err(Error::Dimension(format!("{} estimates for {} signals", s_hat.len(), s.len())));
    }
    let mut acc = NmseAccumulator::default();
    for (a, b) in s_hat.iter().zip(s) {
        if a.len() != b.len() {
            return Err(Error::Dimension("estimate and signal lengths differ".into()));
        }
        acc.add(a, b);
    }
    acc.value()
}

/// Running sums behind an NMSE figure. Merging is plain addition.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NmseAccumulator {
    pub error_energy: f64,
    pub signal_energy: f64,
}

impl NmseAccumulator {
    pub fn add(&mut self, s_hat: &[f64], s: &[f64]) {
        for (a, b) in s_hat.iter().zip(s) {
            self.error_energy += (a - b).powi(2);
            self.signal_energy += b * b;
        }
    }

    pub fn merge(&mut self, other: &NmseAccumulator) {
        self.error_energy += other.error_energy;
        self.signal_energy += other.signal_energy;
    }

    pub fn value(&self) -> Result<f64> {
        if self.signal_energy > 0.0 {
            Ok(self.error_energy / self.signal_energy)
        } else {
            Err(Error::ZeroSignal)
        }
    }
}

/// Component power figures, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerParams {
    pub p_oa_w: f64,
    pub p_dac_w: f64,
    pub p_adc_w: f64,
    /// Add the ohmic dissipation of every device at the solved node voltages.
    pub include_array_static: bool,
}

impl Default for PowerParams {
    fn default() -> Self {
        PowerParams { p_oa_w: 1e-3, p_dac_w: 30e-3, p_adc_w: 50e-3, include_array_static: false }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        if [self.p_oa_w, self.p_dac_w, self.p_adc_w].iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::Config("component powers must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Number of active components in one detector circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentCounts {
    pub inversion_oas: usize,
    pub amplifier_oas: usize,
    /// `−v_in` for B plus `−v1` for E.
    pub inverter_oas: usize,
    pub follower_oas: usize,
    pub dacs: usize,
    pub adcs: usize,
}

impl ComponentCounts {
    pub fn new(topology: Topology, antennas: usize, users: usize) -> Self {
        let (n, m) = (2 * users, 2 * antennas);
        ComponentCounts {
            inversion_oas: n,
            amplifier_oas: if topology == Topology::Proposed { n } else { 0 },
            inverter_oas: m + n,
            follower_oas: n,
            dacs: m,
            adcs: n,
        }
    }

    pub fn oas(&self) -> usize {
        self.inversion_oas + self.amplifier_oas + self.inverter_oas + self.follower_oas
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBreakdown {
    pub counts: ComponentCounts,
    /// Every OA outside the amplifier stage.
    pub oa_core_w: f64,
    pub amplifier_oa_w: f64,
    pub dac_w: f64,
    pub adc_w: f64,
    /// Device dissipation in the five crossbars.
    pub array_w: f64,
    /// Device dissipation in the amplifier stage.
    pub amplifier_array_w: f64,
    pub total_w: f64,
}

impl PowerBreakdown {
    pub fn amplifier_w(&self) -> f64 {
        self.amplifier_oa_w + self.amplifier_array_w
    }

    /// Share of the total drawn by the amplifier stage.
    pub fn amplifier_share(&self) -> f64 {
        self.amplifier_w() / self.total_w
    }
}

/// Ohmic dissipation `Σ g·Δv²` of the crossbars and of the amplifier stage.
pub fn array_dissipation(prog: &ConductanceProgram, sol: &CircuitSolution) -> (f64, f64) {
    let n = prog.outputs();
    let mut crossbar = 0.0;
    for j in 0..n {
        let u = sol.u[j];
        for (k, &v) in sol.v_in.iter().enumerate() {
            crossbar += prog.a[(j, k)] * (v - u).powi(2) + prog.b[(j, k)] * (-v - u).powi(2);
        }
        crossbar += prog.c[j] * (sol.v1[j] - u).powi(2);
        for (k, &v) in sol.v1.iter().enumerate() {
            crossbar += prog.d[(j, k)] * (v - u).powi(2) + prog.e[(j, k)] * (-v - u).powi(2);
        }
    }
    let mut amp = 0.0;
    if prog.topology == Topology::Proposed {
        for j in 0..n {
            let (t0, t) = (prog.theta_0[j], prog.theta[j]);
            let w = (t0 * sol.v1[j] + t * sol.v_out[j]) / (t0 + t);
            amp += t0 * (sol.v1[j] - w).powi(2) + t * (sol.v_out[j] - w).powi(2);
        }
    }
    (crossbar, amp)
}

/// Quiescent power of all components, plus array dissipation when
/// requested (which then needs the solved voltages).
pub fn estimate_power(
    prog: &ConductanceProgram,
    sol: Option<&CircuitSolution>,
    params: &PowerParams,
) -> Result<PowerBreakdown> {
    let counts = ComponentCounts::new(prog.topology, prog.inputs() / 2, prog.outputs() / 2);
    let (array_w, amplifier_array_w) = if params.include_array_static {
        let sol = sol.ok_or_else(|| Error::Config("array dissipation needs a circuit solution".into()))?;
        array_dissipation(prog, sol)
    } else {
        (0.0, 0.0)
    };
    Ok(component_power(counts, params, array_w, amplifier_array_w))
}

/// Power from component counts alone.
pub fn component_power(counts: ComponentCounts, params: &PowerParams, array_w: f64, amplifier_array_w: f64) -> PowerBreakdown {
    let oa_core_w = (counts.oas() - counts.amplifier_oas) as f64 * params.p_oa_w;
    let amplifier_oa_w = counts.amplifier_oas as f64 * params.p_oa_w;
    let dac_w = counts.dacs as f64 * params.p_dac_w;
    let adc_w = counts.adcs as f64 * params.p_adc_w;
    let total_w = oa_core_w + amplifier_oa_w + dac_w + adc_w + array_w + amplifier_array_w;
    PowerBreakdown { counts, oa_core_w, amplifier_oa_w, dac_w, adc_w, array_w, amplifier_array_w, total_w }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyReport {
    pub power_w: f64,
    pub t_compute_s: f64,
    pub flops: u64,
    pub tops_per_watt: f64,
}

pub fn energy_efficiency(flops: &FlopReport, power_w: f64, t_compute_s: f64) -> Result<EfficiencyReport> {
    if !(power_w > 0.0 && t_compute_s > 0.0) {
        return Err(Error::Config("power and compute time must be positive".into()));
    }
    Ok(EfficiencyReport {
        power_w,
        t_compute_s,
        flops: flops.flops,
        tops_per_watt: flops.flops as f64 / (t_compute_s * power_w) / 1e12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_ssfc, ChannelRealization, ScenarioParams};
    use crate::circuit::{build, solve_finite_gain, solve_ideal, MappingConfig, OaModel};
    use crate::detector::{count_flops, DetectorKind};
    use crate::rng::RngStream;

    #[test]
    fn nmse_cases() {
        let s = vec![vec![1.0, -2.0], vec![0.5, 0.5]];
        assert_eq!(nmse(&s, &s).unwrap(), 0.0);
        let zero = vec![vec![0.0; 2]; 2];
        assert_eq!(nmse(&zero, &s).unwrap(), 1.0);
        let energy: f64 = s.iter().flatten().map(|x| x * x).sum();
        // error along the first coordinate carrying 1% of the energy
        let e = (0.01 * energy).sqrt();
        let mut noisy = s.clone();
        noisy[0][0] += e;
        assert!((nmse(&noisy, &s).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(nmse(&zero, &zero), Err(Error::ZeroSignal));
    }

    #[test]
    fn accumulator_merge_is_additive() {
        let mut a = NmseAccumulator::default();
        a.add(&[1.0], &[2.0]);
        let mut b = NmseAccumulator::default();
        b.add(&[0.0], &[1.0]);
        a.merge(&b);
        assert_eq!(a, NmseAccumulator { error_energy: 2.0, signal_energy: 5.0 });
    }

    fn program(topo: Topology, k: usize) -> (ConductanceProgram, ChannelRealization) {
        let p = ScenarioParams { users: k, ..Default::default() };
        let g = draw_ssfc(&p, &mut RngStream::new(k as u64, 0)).unwrap();
        let ch = ChannelRealization::new(&p, g, vec![1.0; k], 0.0).unwrap();
        (build(topo, &ch, DetectorKind::Zf, &MappingConfig::default()).unwrap(), ch)
    }

    #[test]
    fn zero_input_only_quiescent() {
        let (p, _) = program(Topology::Proposed, 4);
        let sol = solve_ideal(&p, &vec![0.0; 128]).unwrap();
        let params = PowerParams { include_array_static: true, ..Default::default() };
        let b = estimate_power(&p, Some(&sol), &params).unwrap();
        assert_eq!(b.array_w + b.amplifier_array_w, 0.0);
        let q = estimate_power(&p, None, &PowerParams::default()).unwrap();
        assert_eq!(b.total_w, q.total_w);
    }

    #[test]
    fn array_power_by_enumeration() {
        let (p, _) = program(Topology::Proposed, 2);
        let v_in = RngStream::new(1, 1).gaussian_vec(128, 0.0, 0.3);
        let sol = solve_finite_gain(&p, &v_in, &OaModel::with_gain_db(60.0)).unwrap();
        // every device as (conductance, voltage at one end, voltage at the other)
        let mut devices = Vec::new();
        for j in 0..4 {
            for k in 0..128 {
                devices.push((p.a[(j, k)], sol.v_in[k], sol.u[j]));
                devices.push((p.b[(j, k)], -sol.v_in[k], sol.u[j]));
            }
            devices.push((p.c[j], sol.v1[j], sol.u[j]));
            for k in 0..4 {
                devices.push((p.d[(j, k)], sol.v1[k], sol.u[j]));
                devices.push((p.e[(j, k)], -sol.v1[k], sol.u[j]));
            }
            let w = -sol.v_out[j] / OaModel::with_gain_db(60.0).open_loop_gain();
            devices.push((p.theta_0[j], sol.v1[j], w));
            devices.push((p.theta[j], sol.v_out[j], w));
        }
        let brute: f64 = devices.iter().map(|(g, a, b)| g * (a - b).powi(2)).sum();
        let (x, a) = array_dissipation(&p, &sol);
        assert!(((x + a) - brute).abs() <= 1e-12 * brute);
    }

    #[test]
    fn breakdown_sums_and_topology_difference() {
        let params = PowerParams::default();
        for k in [2, 4, 8, 16] {
            let prop = component_power(ComponentCounts::new(Topology::Proposed, 64, k), &params, 0.0, 0.0);
            let conv = component_power(ComponentCounts::new(Topology::Conventional, 64, k), &params, 0.0, 0.0);
            let parts = prop.oa_core_w + prop.amplifier_oa_w + prop.dac_w + prop.adc_w;
            assert!((parts - prop.total_w).abs() < 1e-15);
            assert!(((prop.total_w - conv.total_w) - prop.amplifier_w()).abs() < 1e-15);
            assert!(prop.amplifier_share() < 0.05);
        }
    }

    #[test]
    fn efficiency_arithmetic() {
        let f = count_flops(2, 1, DetectorKind::Zf);
        let r = energy_efficiency(&f, 1.0, 1.0).unwrap();
        assert_eq!(r.flops, 44);
        assert!((r.tops_per_watt - 44e-12).abs() < 1e-24);
        let half = energy_efficiency(&f, 2.0, 1.0).unwrap();
        assert!((half.tops_per_watt * 2.0 - r.tops_per_watt).abs() < 1e-24);
        assert!(energy_efficiency(&f, 0.0, 1.0).is_err());
    }

    #[test]
    fn efficiency_grows_with_users() {
        let params = PowerParams::default();
        for topo in [Topology::Proposed, Topology::Conventional] {
            let mut last = 0.0;
            for k in [2, 4, 8, 16] {
                let p = component_power(ComponentCounts::new(topo, 64, k), &params, 0.0, 0.0);
                let e = energy_efficiency(&count_flops(64, k, DetectorKind::Mmse), p.total_w, 110e-9).unwrap();
                assert!(e.tops_per_watt > last);
                last = e.tops_per_watt;
            }
        }
    }
}
