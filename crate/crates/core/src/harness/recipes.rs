// SPDX-License-Identifier: Apache-2.0

//! Ready-made experiment sets, one per figure of the evaluation.

use std::path::{Path, PathBuf};

use super::config::{ChannelMode, ExperimentConfig, Realization, SolverKind, Sweep, SweepAxis};
use super::output::{emit_csv, emit_plot_script, PlotKind, PlotSeries};
use super::run::{run_experiment, ResultRow};
use crate::error::{Error, Result};
use crate::mapping::MappingScheme;

pub const RECIPES: [&str; 8] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "timing"];

/// FMF grid of the cell-mode robustness comparison.
pub const CELL_BETA_GRID: [f64; 5] = [2.0, 3.0, 4.0, 5.0, 6.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// Third-axis value for surface plots.
    pub level: Option<f64>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub name: String,
    pub title: String,
    pub plot: PlotKind,
    pub series: Vec<Series>,
}

fn snr_grid() -> Vec<f64> {
    (0..6).map(|i| 8.0 + 4.0 * i as f64).collect()
}

fn series(label: impl Into<String>, config: ExperimentConfig) -> Series {
    Series { label: label.into(), level: None, config }
}

fn fmf(beta: f64) -> MappingScheme {
    MappingScheme::Fmf { beta }
}

/// Builds a recipe on top of `base`, which supplies the seed, stop rule,
/// scenario, detector and component parameters.
pub fn recipe(name: &str, base: &ExperimentConfig) -> Result<Recipe> {
    let mut b = base.clone();
    b.sigma_m = 0.0;
    b.solver = SolverKind::Ideal;
    b.mode = ChannelMode::Snr;
    b.topology = Realization::Proposed;
    b.mapping.scheme = MappingScheme::Amf;
    let snr_sweep = Sweep { axis: SweepAxis::SnrDb, values: snr_grid() };
    let with = |f: &dyn Fn(&mut ExperimentConfig)| {
        let mut c = b.clone();
        f(&mut c);
        c
    };
    let digital = with(&|c| {
        c.topology = Realization::DigitalReference;
        c.sweep = snr_sweep.clone();
    });

    let (title, plot, list) = match name {
        "fig3" => {
            let mut list = vec![series("digital", digital.clone())];
            for db in [40.0, 60.0, 80.0, 100.0] {
                list.push(series(
                    format!("olg{db}"),
                    with(&|c| {
                        c.solver = SolverKind::FiniteGain;
                        c.oa.open_loop_gain_db = db;
                        c.sweep = snr_sweep.clone();
                    }),
                ));
            }
            ("BER versus SNR for several OA open-loop gains", PlotKind::BerVsSnr, list)
        }
        "fig4" | "fig5" => {
            let (sigma, betas): (f64, &[f64]) =
                if name == "fig4" { (0.0, &[1.0, 2.0, 3.0, 4.0]) } else { (0.01, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]) };
            let mut list = vec![
                series("digital", digital.clone()),
                series(
                    "amf",
                    with(&|c| {
                        c.sigma_m = sigma;
                        c.sweep = snr_sweep.clone();
                    }),
                ),
            ];
            for &beta in betas {
                list.push(series(
                    format!("fmf_beta{beta}"),
                    with(&|c| {
                        c.sigma_m = sigma;
                        c.mapping.scheme = fmf(beta);
                        c.sweep = snr_sweep.clone();
                    }),
                ));
            }
            let title = if name == "fig4" {
                "BER versus SNR under FMF without deviation"
            } else {
                "BER versus SNR under FMF with 1% conductance deviation"
            };
            (title, PlotKind::BerVsSnr, list)
        }
        "fig6" => {
            let betas: Vec<f64> = (0..11).map(|i| 1.0 + 0.5 * i as f64).collect();
            let mut list = Vec::new();
            for sigma in [0.0, 0.0025, 0.005, 0.0075, 0.01] {
                let mut s = series(
                    format!("sigma{sigma}"),
                    with(&|c| {
                        c.snr_db = 20.0;
                        c.sigma_m = sigma;
                        c.mapping.scheme = fmf(1.0);
                        c.sweep = Sweep { axis: SweepAxis::Beta, values: betas.clone() };
                        // NMSE only; run a fixed number of frames
                        c.stop.max_frames = c.stop.max_frames.min(4000);
                        c.stop.target_bit_errors = u64::MAX;
                    }),
                );
                s.level = Some(sigma);
                list.push(s);
            }
            ("NMSE over beta and conductance deviation", PlotKind::NmseSurface, list)
        }
        "fig7" => {
            let grid = Sweep { axis: SweepAxis::Beta, values: CELL_BETA_GRID.to_vec() };
            let mut list = Vec::new();
            for (label, topo) in [("proposed", Realization::Proposed), ("conventional", Realization::Conventional)] {
                for (suffix, scheme) in [("fmf", fmf(1.0)), ("amf", MappingScheme::Amf)] {
                    list.push(series(
                        format!("{label}_{suffix}"),
                        with(&|c| {
                            c.mode = ChannelMode::Cell;
                            c.topology = topo;
                            c.sigma_m = 0.005;
                            c.mapping.scheme = scheme;
                            c.sweep = grid.clone();
                        }),
                    ));
                }
            }
            ("BER in a cell with 0.5% conductance deviation", PlotKind::BerVsBeta, list)
        }
        "fig8" | "fig9" => {
            let mut list = Vec::new();
            for (label, topo) in [("proposed", Realization::Proposed), ("conventional", Realization::Conventional)] {
                list.push(series(
                    label,
                    with(&|c| {
                        c.topology = topo;
                        c.sweep = Sweep { axis: SweepAxis::KUsers, values: vec![2.0, 4.0, 8.0, 16.0] };
                        c.stop.max_frames = c.stop.max_frames.min(64);
                    }),
                ));
            }
            if name == "fig8" {
                ("Power versus number of users", PlotKind::PowerVsK, list)
            } else {
                ("Energy efficiency versus number of users", PlotKind::EfficiencyVsK, list)
            }
        }
        "timing" => {
            let list = vec![series(
                "proposed",
                with(&|c| {
                    c.solver = SolverKind::Transient;
                    c.sweep = Sweep { axis: SweepAxis::GbpHz, values: vec![250e6, 500e6, 1e9, 2e9] };
                    c.stop.max_frames = c.stop.max_frames.min(32);
                    // long enough for the slowest amplifier
                    c.transient.t_end_s = c.transient.t_end_s.max(4e-6);
                }),
            )];
            ("Settling time versus OA gain-bandwidth product", PlotKind::SettleVsGbp, list)
        }
        other => {
            return Err(Error::Config(format!("unknown recipe '{other}', expected one of {}", RECIPES.join(", "))))
        }
    };
    Ok(Recipe { name: name.into(), title: title.into(), plot, series: list })
}

/// Output of one recipe series.
#[derive(Debug, Clone)]
pub struct SeriesResult {
    pub label: String,
    pub csv_path: PathBuf,
    pub rows: Vec<ResultRow>,
}

/// File written for one series: `<stem>_<label>.csv` next to `out`.
pub fn series_path(out: &Path, label: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}_{label}.csv"))
}

/// Runs every series, writes one CSV per series and a plot script
/// `<stem>.gp` that draws them together.
pub fn run_recipe(recipe: &Recipe, out: &Path) -> Result<Vec<SeriesResult>> {
    let mut results = Vec::new();
    let mut plot = Vec::new();
    for s in &recipe.series {
        log::info!("{}: running series {}", recipe.name, s.label);
        let rows = run_experiment(&s.config)?;
        let csv_path = series_path(out, &s.label);
        emit_csv(&rows, &csv_path)?;
        plot.push(PlotSeries {
            label: s.label.clone(),
            csv: csv_path.file_name().unwrap().to_string_lossy().into_owned(),
            level: s.level,
        });
        results.push(SeriesResult { label: s.label.clone(), csv_path, rows });
    }
    emit_plot_script(&plot, recipe.plot, &recipe.title, &out.with_extension("gp"))?;
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_recipe_builds_valid_configs() {
        let base = ExperimentConfig::default();
        for name in RECIPES {
            let r = recipe(name, &base).unwrap();
            assert!(!r.series.is_empty());
            for s in &r.series {
                s.config.validate().unwrap();
                assert_eq!(s.config.seed, base.seed);
            }
        }
        assert!(matches!(recipe("fig1", &base), Err(Error::Config(_))));
    }

    #[test]
    fn fig3_gains() {
        let r = recipe("fig3", &ExperimentConfig::default()).unwrap();
        let gains: Vec<f64> = r.series[1..].iter().map(|s| s.config.oa.open_loop_gain_db).collect();
        assert_eq!(gains, vec![40.0, 60.0, 80.0, 100.0]);
        assert!(r.series[1..].iter().all(|s| s.config.solver == SolverKind::FiniteGain));
    }

    #[test]
    fn series_file_names() {
        assert_eq!(series_path(Path::new("out/fig3.csv"), "digital"), PathBuf::from("out/fig3_digital.csv"));
    }
}
