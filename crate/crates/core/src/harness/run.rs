// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;

use super::config::{ChannelMode, ExperimentConfig, SolverKind};
use crate::channel::{draw_ssfc, place_uts, ChannelRealization, ScenarioParams};
use crate::circuit::{build, solve_finite_gain, solve_ideal, solve_transient};
use crate::detector::{count_flops, detect};
use crate::error::{Error, Result};
use crate::metrics::{energy_efficiency, estimate_power, NmseAccumulator};
use crate::modem::{apply_awgn, demap_and_count, noise_variance, Constellation, Frame};
use crate::rng::{Purpose, RngStream};

/// Aggregated results of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    /// Configured SNR; NaN in cell mode, where noise follows from the link budget.
    pub snr_db: f64,
    pub ber: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub nmse: f64,
    pub power_w: f64,
    pub tops_per_watt: f64,
    pub settle_time_s: f64,
    pub truncated_fraction: f64,
    pub seed: u64,
    /// Frames that produced an estimate.
    pub frames: u64,
    /// Frames dropped because a module reported an error.
    pub failed_frames: u64,
}

/// What one frame contributes to its row.
#[derive(Debug, Clone, Default)]
struct FrameOutcome {
    bit_errors: u64,
    bits: u64,
    nmse: NmseAccumulator,
    truncated_fraction: f64,
    power_w: f64,
    settle_time_s: f64,
}

fn draw_channel(cfg: &ExperimentConfig, frame: u64) -> Result<(ChannelRealization, f64, f64)> {
    let params: &ScenarioParams = &cfg.scenario;
    let g_c = draw_ssfc(params, &mut RngStream::for_frame(cfg.seed, 0, frame, Purpose::SmallScale))?;
    let (lambda, p_s, sigma_n2) = match cfg.mode {
        ChannelMode::Snr => {
            let sigma_n2 = noise_variance(cfg.snr_convention, cfg.snr_db, params, 1.0);
            (vec![1.0; params.users], 1.0, sigma_n2)
        }
        ChannelMode::Cell => {
            let drop = if cfg.redraw_lsfc { frame } else { 0 };
            let lambda = place_uts(params, &mut RngStream::for_frame(cfg.seed, 0, drop, Purpose::Placement))?;
            (lambda, params.tx_power_mw(), params.noise_power_mw())
        }
    };
    let rho = sigma_n2 / p_s;
    Ok((ChannelRealization::new(params, g_c, lambda, rho)?, p_s, sigma_n2))
}

fn run_frame(cfg: &ExperimentConfig, frame: u64) -> Result<FrameOutcome> {
    let (ch, p_s, sigma_n2) = draw_channel(cfg, frame)?;
    let constellation = Constellation::new(cfg.qam_order, p_s)?;
    let n_bits = ch.users() * constellation.bits_per_symbol();
    let bits = RngStream::for_frame(cfg.seed, 0, frame, Purpose::Bits).bits(n_bits);
    let s_c = constellation.modulate(&bits)?;
    let frame_data = Frame::new(bits, s_c, Vec::new(), sigma_n2);
    let y_clean = ch.h.matvec(&frame_data.s);
    let y = apply_awgn(&y_clean, sigma_n2, &mut RngStream::for_frame(cfg.seed, 0, frame, Purpose::Noise));

    let mut out = FrameOutcome::default();
    let s_hat = match cfg.topology.circuit() {
        None => detect(cfg.detector, &ch.h, &y, ch.rho)?,
        Some(topology) => {
            let mut prog = build(topology, &ch, cfg.detector, &cfg.mapping)?;
            let sigma_m = cfg.sigma_m_siemens();
            if sigma_m > 0.0 {
                let mut s = RngStream::for_frame(cfg.seed, 0, frame, Purpose::Deviation);
                prog.inject_deviation(sigma_m, cfg.deviate_theta, &mut s);
            }
            let (v_in, ledger) = prog.input_voltages(&y, &cfg.converters)?;
            let sol = match cfg.solver {
                SolverKind::Ideal => solve_ideal(&prog, &v_in)?,
                SolverKind::FiniteGain => solve_finite_gain(&prog, &v_in, &cfg.oa)?,
                SolverKind::Transient => solve_transient(&prog, &v_in, &cfg.oa, &cfg.transient)?,
            };
            out.truncated_fraction = prog.truncated_fraction();
            out.power_w = estimate_power(&prog, Some(&sol), &cfg.power)?.total_w;
            out.settle_time_s = sol.settle_time_s.unwrap_or(f64::NAN);
            prog.read_out(&sol.v_out, &ledger, &cfg.converters)
        }
    };
    let (errors, total) = demap_and_count(&s_hat, &frame_data, &constellation);
    out.bit_errors = errors;
    out.bits = total;
    // NMSE is taken on unit-energy symbols so cell-mode rows stay comparable
    let norm = 1.0 / p_s.sqrt();
    let scaled = |v: &[f64]| v.iter().map(|x| x * norm).collect::<Vec<_>>();
    out.nmse.add(&scaled(&s_hat), &scaled(&frame_data.s));
    Ok(out)
}

/// Runs one sweep point until the stop rule fires.
pub fn run_point(cfg: &ExperimentConfig, sweep_value: f64) -> Result<ResultRow> {
    let stop = cfg.stop;
    let mut frames_done = 0u64;
    let mut ok = 0u64;
    let mut failed = 0u64;
    let mut first_error: Option<Error> = None;
    let mut acc = FrameOutcome::default();
    let mut settle_sum = 0.0;
    let mut settle_n = 0u64;

    while frames_done < stop.max_frames && acc.bit_errors < stop.target_bit_errors {
        let end = (frames_done + stop.batch_frames).min(stop.max_frames);
        let batch: Vec<Result<FrameOutcome>> =
            (frames_done..end).into_par_iter().map(|f| run_frame(cfg, f)).collect();
        // serial merge in frame order keeps sums independent of scheduling
        for (f, outcome) in (frames_done..end).zip(batch) {
            match outcome {
                Ok(o) => {
                    ok += 1;
                    acc.bit_errors += o.bit_errors;
                    acc.bits += o.bits;
                    acc.nmse.merge(&o.nmse);
                    acc.truncated_fraction += o.truncated_fraction;
                    acc.power_w += o.power_w;
                    if o.settle_time_s.is_finite() {
                        settle_sum += o.settle_time_s;
                        settle_n += 1;
                    }
                }
                Err(e) => {
                    if let Error::Config(_) = e {
                        return Err(e);
                    }
                    log::warn!("frame {f} at sweep value {sweep_value}: {e}");
                    failed += 1;
                    first_error.get_or_insert(e);
                }
            }
        }
        frames_done = end;
    }
    if ok == 0 {
        return Err(first_error.unwrap_or(Error::ZeroSignal));
    }
    if failed > 0 {
        log::warn!("{failed} of {frames_done} frames failed at sweep value {sweep_value}");
    }

    let settle_time_s = if settle_n > 0 { settle_sum / settle_n as f64 } else { f64::NAN };
    let (power_w, tops_per_watt) = match cfg.topology.circuit() {
        None => (f64::NAN, f64::NAN),
        Some(_) => {
            let power_w = acc.power_w / ok as f64;
            let t = if settle_time_s > 0.0 { settle_time_s } else { cfg.timing.t_compute_s };
            let flops = count_flops(cfg.scenario.antennas, cfg.scenario.users, cfg.detector);
            (power_w, energy_efficiency(&flops, power_w, t)?.tops_per_watt)
        }
    };
    Ok(ResultRow {
        sweep_value,
        snr_db: match cfg.mode {
            ChannelMode::Snr => cfg.snr_db,
            ChannelMode::Cell => f64::NAN,
        },
        ber: acc.bit_errors as f64 / acc.bits as f64,
        bit_errors: acc.bit_errors,
        bits: acc.bits,
        nmse: acc.nmse.value()?,
        power_w,
        tops_per_watt,
        settle_time_s,
        truncated_fraction: acc.truncated_fraction / ok as f64,
        seed: cfg.seed,
        frames: ok,
        failed_frames: failed,
    })
}

/// One row per sweep value, in sweep order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    cfg.sweep
        .values
        .iter()
        .map(|&v| {
            let point = cfg.at(v)?;
            let row = run_point(&point, v)?;
            log::info!(
                "{:?}={v}: ber={:.3e} ({} errors / {} bits), nmse={:.3e}",
                cfg.sweep.axis,
                row.ber,
                row.bit_errors,
                row.bits,
                row.nmse
            );
            Ok(row)
        })
        .collect()
}
