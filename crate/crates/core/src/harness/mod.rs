// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration, Monte Carlo execution and result files.

mod config;
mod output;
mod recipes;
mod run;

pub use config::{
    ChannelMode, ExperimentConfig, Realization, SigmaUnit, SolverKind, StopRule, Sweep, SweepAxis, Timing,
    DEFAULTS_TOML,
};
pub use output::{emit_csv, emit_plot_script, format_csv, format_plot_script, PlotKind, PlotSeries, CSV_HEADER};
pub use recipes::{recipe, run_recipe, series_path, Recipe, Series, SeriesResult, CELL_BETA_GRID, RECIPES};
pub use run::{run_experiment, run_point, ResultRow};
