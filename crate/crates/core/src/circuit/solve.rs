// SPDX-License-Identifier: Apache-2.0

//! Static solvers.

use super::{check_stability, CircuitSolution, ConductanceProgram, OaModel, Topology};
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, solve_vec, Mat};

fn check_inputs(prog: &ConductanceProgram, v_in: &[f64]) -> Result<()> {
    if v_in.len() != prog.inputs() {
        return Err(Error::Dimension(format!("{} inputs for a {}-input program", v_in.len(), prog.inputs())));
    }
    check_stability(prog)
}

/// Virtual-ground solution: `v1 = −(C + D − E)⁻¹ (A − B) v_in`,
/// `v_out = −Θ⁻¹ v1`.
pub fn solve_ideal(prog: &ConductanceProgram, v_in: &[f64]) -> Result<CircuitSolution> {
    check_inputs(prog, v_in)?;
    let i1 = prog.input_matrix().matvec(v_in);
    let fb = prog.feedback_matrix();
    let v1: Vec<f64> = solve_vec(&fb, &i1)
        .map_err(|_| Error::SingularFeedback)?
        .into_iter()
        .map(|v| -v)
        .collect();
    let v_out = v1.iter().zip(prog.theta_ratio()).map(|(v, t)| -v / t).collect();
    let residual = norm_inf(
        &i1.iter().zip(fb.matvec(&v1)).map(|(a, b)| a + b).collect::<Vec<_>>(),
    );
    Ok(CircuitSolution {
        v_in: v_in.to_vec(),
        u: vec![0.0; v1.len()],
        v1,
        v_out,
        residual,
        settle_time_s: None,
    })
}

/// Effective feedback and input matrices seen by the inversion nodes once
/// follower and inverter gains are accounted for.
pub(super) struct Effective {
    pub m: Mat,
    pub i1: Vec<f64>,
    pub loading: Vec<f64>,
}

pub(super) fn effective(prog: &ConductanceProgram, v_in: &[f64], oa: &OaModel) -> Effective {
    let gf = oa.follower_gain();
    let gi = oa.inverter_gain();
    let mut m = prog.d.scale(gf).sub(&prog.e.scale(gi));
    for (j, c) in prog.c.iter().enumerate() {
        m[(j, j)] += gf * c;
    }
    let i1 = prog.a.sub(&prog.b.scale(gi)).matvec(v_in);
    Effective { m, i1, loading: prog.node_loading() }
}

/// Current imbalance at the inversion nodes `u` and amplifier nodes `w`.
pub(super) fn kcl_residual(
    prog: &ConductanceProgram,
    eff: &Effective,
    v1: &[f64],
    v_out: &[f64],
    u: &[f64],
    gain: f64,
) -> f64 {
    let mv = eff.m.matvec(v1);
    let mut worst = 0.0f64;
    for j in 0..v1.len() {
        worst = worst.max((eff.i1[j] + mv[j] - eff.loading[j] * u[j]).abs());
    }
    if prog.topology == Topology::Proposed {
        for j in 0..v1.len() {
            let w = -v_out[j] / gain;
            let imbalance = prog.theta_0[j] * (v1[j] - w) + prog.theta[j] * (v_out[j] - w);
            worst = worst.max(imbalance.abs());
        }
    }
    worst
}

/// Exact nodal solution with open-loop gain `A_OL`: every inversion node
/// sits at `u = −v1/A_OL` and is loaded by all devices attached to it.
pub fn solve_finite_gain(prog: &ConductanceProgram, v_in: &[f64], oa: &OaModel) -> Result<CircuitSolution> {
    check_inputs(prog, v_in)?;
    let gain = oa.open_loop_gain();
    if !(gain > 0.0) {
        return Err(Error::Config("open-loop gain must be positive".into()));
    }
    let eff = effective(prog, v_in, oa);
    let mut sys = eff.m.clone();
    for (j, l) in eff.loading.iter().enumerate() {
        sys[(j, j)] += l / gain;
    }
    let v1: Vec<f64> = solve_vec(&sys, &eff.i1)
        .map_err(|_| Error::SingularSystem)?
        .into_iter()
        .map(|v| -v)
        .collect();
    let u: Vec<f64> = v1.iter().map(|v| -v / gain).collect();
    let v_out: Vec<f64> = match prog.topology {
        Topology::Proposed => (0..v1.len())
            .map(|j| {
                let (t0, t) = (prog.theta_0[j], prog.theta[j]);
                -t0 * v1[j] / (t + (t0 + t) / gain)
            })
            .collect(),
        Topology::Conventional => v1.iter().map(|v| -v).collect(),
    };
    let residual = kcl_residual(prog, &eff, &v1, &v_out, &u, gain);
    Ok(CircuitSolution { v_in: v_in.to_vec(), v1, v_out, u, residual, settle_time_s: None })
}
