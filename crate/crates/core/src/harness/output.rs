// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::ResultRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "sweep_value,snr_db,ber,bit_errors,bits,nmse,power_w,tops_per_watt,settle_time_s,truncated_fraction,seed";

pub fn format_csv(rows: &[ResultRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.sweep_value,
            r.snr_db,
            r.ber,
            r.bit_errors,
            r.bits,
            r.nmse,
            r.power_w,
            r.tops_per_watt,
            r.settle_time_s,
            r.truncated_fraction,
            r.seed
        )
        .expect("writing to a String");
    }
    s
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    std::fs::write(path, format_csv(rows))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    BerVsSnr,
    BerVsBeta,
    NmseSurface,
    PowerVsK,
    EfficiencyVsK,
    SettleVsGbp,
}

/// One curve of a plot: a CSV file and its legend entry. `level` places the
/// curve on the third axis of a surface plot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub csv: String,
    pub level: Option<f64>,
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Gnuplot script drawing every series from its CSV file.
pub fn format_plot_script(series: &[PlotSeries], kind: PlotKind, title: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Config("a plot needs at least one series".into()));
    }
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key autotitle columnhead\nset grid\n");
    writeln!(s, "set title {}", quote(title)).unwrap();
    let (x, y, cols, style) = match kind {
        PlotKind::BerVsSnr => ("SNR (dB)", "BER", "1:3", "linespoints"),
        PlotKind::BerVsBeta => ("beta", "BER", "1:3", "linespoints"),
        PlotKind::NmseSurface => ("beta", "sigma_m", "", "lines"),
        PlotKind::PowerVsK => ("K", "power (W)", "1:7", "histograms"),
        PlotKind::EfficiencyVsK => ("K", "TOPS/W", "1:8", "linespoints"),
        PlotKind::SettleVsGbp => ("GBP (Hz)", "settle time (s)", "1:9", "linespoints"),
    };
    writeln!(s, "set xlabel {}\nset ylabel {}", quote(x), quote(y)).unwrap();
    match kind {
        PlotKind::BerVsSnr | PlotKind::BerVsBeta => s.push_str("set logscale y\nset format y '10^{%L}'\n"),
        PlotKind::SettleVsGbp => s.push_str("set logscale x\n"),
        PlotKind::NmseSurface => s.push_str("set zlabel 'NMSE'\nset hidden3d\nset ticslevel 0\n"),
        PlotKind::PowerVsK => s.push_str("set style data histograms\nset style histogram cluster gap 1\nset style fill solid 0.8 border -1\n"),
        PlotKind::EfficiencyVsK => {}
    }
    let parts: Vec<String> = series
        .iter()
        .map(|p| match kind {
            PlotKind::NmseSurface => format!(
                "{} using 1:({}):6 with {style} title {}",
                quote(&p.csv),
                p.level.unwrap_or(0.0),
                quote(&p.label)
            ),
            PlotKind::PowerVsK => format!("{} using 7:xtic(1) title {}", quote(&p.csv), quote(&p.label)),
            _ => format!("{} using {cols} with {style} title {}", quote(&p.csv), quote(&p.label)),
        })
        .collect();
    let cmd = if kind == PlotKind::NmseSurface { "splot" } else { "plot" };
    writeln!(s, "{cmd} {}", parts.join(", \\\n     ")).unwrap();
    Ok(s)
}

pub fn emit_plot_script(series: &[PlotSeries], kind: PlotKind, title: &str, path: &Path) -> Result<()> {
    std::fs::write(path, format_plot_script(series, kind, title)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: f64) -> ResultRow {
        ResultRow {
            sweep_value: v,
            snr_db: 20.0,
            ber: 0.25,
            bit_errors: 6,
            bits: 24,
            nmse: 0.0125,
            power_w: 1.5,
            tops_per_watt: f64::NAN,
            settle_time_s: 3.2e-7,
            truncated_fraction: 0.0,
            seed: 7,
            frames: 1,
            failed_frames: 0,
        }
    }

    #[test]
    fn header_only_when_empty() {
        assert_eq!(format_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_line_per_row() {
        let text = format_csv(&[row(1.0), row(2.5)]);
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "");
        assert_eq!(lines[1], "1,20,0.25,6,24,0.0125,1.5,NaN,0.00000032,0,7");
        assert!(!text.contains('\r'));
        assert_eq!(lines[2].split(',').count(), 11);
    }

    #[test]
    fn writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        emit_csv(&[row(1.0)], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), format_csv(&[row(1.0)]));
        assert!(matches!(emit_csv(&[], &dir.path().join("missing/r.csv")), Err(Error::Io(_))));
    }

    fn series() -> Vec<PlotSeries> {
        vec![
            PlotSeries { label: "a".into(), csv: "a.csv".into(), level: Some(0.005) },
            PlotSeries { label: "b".into(), csv: "b.csv".into(), level: Some(0.01) },
        ]
    }

    #[test]
    fn ber_plot_is_semilog() {
        let s = format_plot_script(&series(), PlotKind::BerVsSnr, "t").unwrap();
        assert!(s.contains("set logscale y"));
        assert!(s.contains("'a.csv' using 1:3"));
        assert!(s.contains("'b.csv'"));
    }

    #[test]
    fn surface_and_bars() {
        let s = format_plot_script(&series(), PlotKind::NmseSurface, "t").unwrap();
        assert!(s.contains("splot 'a.csv' using 1:(0.005):6"));
        let b = format_plot_script(&series(), PlotKind::PowerVsK, "t").unwrap();
        assert!(b.contains("histogram"));
        assert!(format_plot_script(&[], PlotKind::PowerVsK, "t").is_err());
    }
}
