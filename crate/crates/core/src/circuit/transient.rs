// SPDX-License-Identifier: Apache-2.0

//! Settling behaviour with single-pole OAs.
//!
//! Each OA obeys `τ dv/dt = −v − A_OL·u` where `u` is its inverting-input
//! voltage, fixed at every instant by Kirchhoff's current law. The network
//! is linear and time-invariant, so `x(t) − x(∞)` is advanced exactly with
//! `exp(J·Δt)` on a uniform grid.

use serde::{Deserialize, Serialize};

use super::solve::{effective, kcl_residual};
use super::{check_stability, CircuitSolution, ConductanceProgram, OaModel, Topology};
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, solve_vec, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransientOptions {
    pub t_end_s: f64,
    pub dt_s: f64,
    /// Relative band around the final value, as a fraction of its peak.
    pub settle_tol: f64,
}

impl Default for TransientOptions {
    fn default() -> Self {
        TransientOptions { t_end_s: 2e-6, dt_s: 0.25e-9, settle_tol: 0.01 }
    }
}

impl TransientOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end_s > 0.0 && self.dt_s > 0.0 && self.dt_s <= self.t_end_s && self.settle_tol > 0.0) {
            return Err(Error::Config("transient needs 0 < dt ≤ t_end and a positive tolerance".into()));
        }
        Ok(())
    }
}

/// Integrates from all-zero OA outputs and reports the voltages at `t_end`
/// together with the time after which the outputs stay inside the
/// tolerance band.
pub fn solve_transient(
    prog: &ConductanceProgram,
    v_in: &[f64],
    oa: &OaModel,
    opts: &TransientOptions,
) -> Result<CircuitSolution> {
    opts.validate()?;
    oa.validate()?;
    if v_in.len() != prog.inputs() {
        return Err(Error::Dimension(format!("{} inputs for a {}-input program", v_in.len(), prog.inputs())));
    }
    check_stability(prog)?;
    let n = prog.outputs();
    let gain = oa.open_loop_gain();
    let tau = oa.tau();
    let eff = effective(prog, v_in, oa);
    let amp = prog.topology == Topology::Proposed;
    let dim = if amp { 2 * n } else { n };

    // dx/dt = J x + b
    let mut j = Mat::zeros(dim, dim);
    let mut b = vec![0.0; dim];
    for r in 0..n {
        let k = gain / (eff.loading[r] * tau);
        for c in 0..n {
            j[(r, c)] = -k * eff.m[(r, c)];
        }
        j[(r, r)] -= 1.0 / tau;
        b[r] = -k * eff.i1[r];
        if amp {
            let (t0, t) = (prog.theta_0[r], prog.theta[r]);
            j[(n + r, r)] = -gain * t0 / ((t0 + t) * tau);
            j[(n + r, n + r)] = -(1.0 + gain * t / (t0 + t)) / tau;
        }
    }
    let x_inf: Vec<f64> = solve_vec(&j, &b).map_err(|_| Error::SingularSystem)?.into_iter().map(|v| -v).collect();
    let out_of = |x: &[f64]| -> Vec<f64> {
        if amp {
            x[n..].to_vec()
        } else {
            x[..n].iter().map(|v| -v).collect()
        }
    };
    let target = out_of(&x_inf);
    let band = opts.settle_tol * norm_inf(&target);

    let phi = j.scale(opts.dt_s).expm();
    let steps = (opts.t_end_s / opts.dt_s).ceil() as usize;
    let mut err: Vec<f64> = x_inf.iter().map(|v| -v).collect();
    let mut last_outside: Option<usize> = None;
    let outside = |e: &[f64]| -> bool {
        let eo = out_of(e);
        !(norm_inf(&eo) <= band)
    };
    if outside(&err) {
        last_outside = Some(0);
    }
    for step in 1..=steps {
        err = phi.matvec(&err);
        if outside(&err) {
            last_outside = Some(step);
        }
    }
    if last_outside == Some(steps) {
        return Err(Error::NoConvergence { t_end: opts.t_end_s });
    }
    let settle = last_outside.map_or(0.0, |s| (s + 1) as f64 * opts.dt_s);

    let x: Vec<f64> = x_inf.iter().zip(&err).map(|(a, e)| a + e).collect();
    let v1 = x[..n].to_vec();
    let v_out = out_of(&x);
    let mv = eff.m.matvec(&v1);
    let u: Vec<f64> = (0..n).map(|r| (eff.i1[r] + mv[r]) / eff.loading[r]).collect();
    let residual = kcl_residual(prog, &eff, &v1, &v_out, &u, gain);
    Ok(CircuitSolution { v_in: v_in.to_vec(), v1, v_out, u, residual, settle_time_s: Some(settle) })
}
