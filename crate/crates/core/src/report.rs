//! Output files: sweep and CDF tables as CSV, a JSON summary and SVG
//! figures.
//!
//! File names and CSV columns:
//!
//! * `sweep_<gen>.csv`: `distance_m,mean_pd_w_m2,stderr_pd,mean_sar_w_kg,stderr_sar`
//! * `cdf_<metric>_<policy>.csv`: `value,cdf`
//! * `summary.json`
//! * `fig_pd_vs_distance.svg`, `fig_sar_vs_distance.svg`,
//!   `fig_cdf_pd.svg`, `fig_cdf_sar.svg`, `fig_cdf_rate.svg`

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::profiles::{ExposureLimits, Generation};
use crate::simulation::{PolicyResults, RunResults, SweepTable};
use crate::stats::{EmpiricalDistribution, Metric};
use crate::{Error, Result};

pub const DEFAULT_CDF_POINTS: usize = 1000;

pub const QUANTILES: [f64; 5] = [0.01, 0.05, 0.5, 0.95, 0.99];

#[derive(Debug, Clone, Copy)]
pub struct EmitOptions {
    pub plots: bool,
    pub cdf_points: usize,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            plots: true,
            cdf_points: DEFAULT_CDF_POINTS,
        }
    }
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("distance_m,mean_pd_w_m2,stderr_pd,mean_sar_w_kg,stderr_sar\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?}",
            r.distance_m, r.pd.mean, r.pd.stderr, r.sar.mean, r.sar.stderr
        );
    }
    out
}

pub fn cdf_csv(dist: &EmpiricalDistribution, max_points: usize) -> String {
    let mut out = String::from("value,cdf\n");
    for (value, cdf) in dist.cdf_points(max_points) {
        let _ = writeln!(out, "{value:?},{cdf:?}");
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantileEntry {
    pub p: f64,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
}

fn quantiles(dist: &EmpiricalDistribution) -> Vec<QuantileEntry> {
    QUANTILES
        .iter()
        .map(|&p| QuantileEntry {
            p,
            value: dist.quantile(p),
            stderr: dist.quantile_stderr(p),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PolicySummary {
    pub policy: String,
    pub ues: usize,
    pub served: usize,
    pub outage_fraction: f64,
    pub mean_handovers: f64,
    /// Served UEs with PD strictly above the PD limit.
    pub pd_exceedance_fraction: f64,
    /// Served UEs with PD at or above γ.
    pub pd_at_or_above_gamma: usize,
    pub max_pd_w_m2: Option<f64>,
    pub sar_exceedance_fraction: f64,
    pub pd_quantiles_w_m2: Vec<QuantileEntry>,
    pub sar_quantiles_w_kg: Vec<QuantileEntry>,
    pub rate_quantiles_bps: Vec<QuantileEntry>,
    pub rate_range_bps: [Option<f64>; 2],
    /// Rate quantiles divided by the bandwidth.
    pub spectral_efficiency_bps_hz: Vec<QuantileEntry>,
}

impl PolicySummary {
    pub fn new(p: &PolicyResults, gamma: f64, limits: &ExposureLimits, bandwidth_hz: f64) -> Self {
        let spectral = quantiles(&p.rate)
            .into_iter()
            .map(|q| QuantileEntry {
                p: q.p,
                value: q.value.map(|v| v / bandwidth_hz),
                stderr: q.stderr.map(|v| v / bandwidth_hz),
            })
            .collect();
        let at_or_above = p.pd.len() - p.pd.values().partition_point(|v| *v < gamma);
        PolicySummary {
            policy: p.policy.tag().to_string(),
            ues: p.num_ues,
            served: p.served(),
            outage_fraction: p.outage_fraction(),
            mean_handovers: p.mean_handovers(),
            pd_exceedance_fraction: p.pd.fraction_above(limits.pd_limit),
            pd_at_or_above_gamma: at_or_above,
            max_pd_w_m2: p.pd.max(),
            sar_exceedance_fraction: p.sar.fraction_above(limits.sar_limit),
            pd_quantiles_w_m2: quantiles(&p.pd),
            sar_quantiles_w_kg: quantiles(&p.sar),
            rate_quantiles_bps: quantiles(&p.rate),
            rate_range_bps: [p.rate.min(), p.rate.max()],
            spectral_efficiency_bps_hz: spectral,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub generation: Generation,
    /// Where the mean PD first falls below the PD limit on the swept grid.
    pub crossing_distance_m: Option<f64>,
    pub pd_below_limit_at_all_distances: bool,
    pub max_mean_pd_w_m2: f64,
}

impl SweepSummary {
    pub fn new(table: &SweepTable, limits: &ExposureLimits) -> Self {
        SweepSummary {
            generation: table.generation,
            crossing_distance_m: table.crossing_distance(limits.pd_limit),
            pd_below_limit_at_all_distances: table.below_everywhere(limits.pd_limit),
            max_mean_pd_w_m2: table
                .rows
                .iter()
                .map(|r| r.pd.mean)
                .fold(f64::NAN, f64::max),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub generation: Option<Generation>,
    pub num_drops: Option<usize>,
    pub ues_per_sector: Option<usize>,
    pub seed: Option<u64>,
    pub gamma_w_m2: Option<f64>,
    pub center_only: Option<bool>,
    pub limits: ExposureLimits,
    pub policies: Vec<PolicySummary>,
    pub sweeps: Vec<SweepSummary>,
}

impl Summary {
    pub fn new(
        results: Option<&RunResults>,
        sweeps: &[SweepTable],
        limits: &ExposureLimits,
    ) -> Self {
        let config = results.map(|r| &r.config);
        Summary {
            generation: config.map(|c| c.profile.generation),
            num_drops: config.map(|c| c.num_drops),
            ues_per_sector: config.map(|c| c.ues_per_sector),
            seed: config.map(|c| c.seed),
            gamma_w_m2: config.map(|c| c.gamma),
            center_only: config.map(|c| c.center_only),
            limits: *limits,
            policies: results
                .map(|r| {
                    r.policies
                        .iter()
                        .map(|p| {
                            PolicySummary::new(
                                p,
                                r.config.gamma,
                                limits,
                                r.config.profile.bandwidth_hz,
                            )
                        })
                        .collect()
                })
                .unwrap_or_default(),
            sweeps: sweeps
                .iter()
                .map(|t| SweepSummary::new(t, limits))
                .collect(),
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(())
}

/// Writes all tables, the summary and (optionally) the figures into `dir`.
pub fn emit_outputs(
    results: Option<&RunResults>,
    sweeps: &[SweepTable],
    limits: &ExposureLimits,
    dir: &Path,
    options: &EmitOptions,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    for table in sweeps {
        write(
            dir,
            &format!("sweep_{}.csv", table.generation.tag()),
            &sweep_csv(table),
            &mut written,
        )?;
    }
    if let Some(results) = results {
        for p in &results.policies {
            for metric in Metric::ALL {
                write(
                    dir,
                    &format!("cdf_{}_{}.csv", metric.tag(), p.policy.tag()),
                    &cdf_csv(p.distribution(metric), options.cdf_points),
                    &mut written,
                )?;
            }
        }
    }
    let summary = Summary::new(results, sweeps, limits);
    write(
        dir,
        "summary.json",
        &(serde_json::to_string_pretty(&summary)? + "\n"),
        &mut written,
    )?;

    if options.plots {
        if !sweeps.is_empty() {
            let series = |f: fn(&crate::simulation::SweepRow) -> f64| -> Vec<svg::Series> {
                sweeps
                    .iter()
                    .map(|t| svg::Series {
                        label: t.generation.tag().to_uppercase(),
                        points: t.rows.iter().map(|r| (r.distance_m, f(r))).collect(),
                    })
                    .collect()
            };
            let pd = svg::Plot {
                title: "Mean PD versus BS-UE distance".into(),
                x_label: "distance (m)".into(),
                y_label: "PD (W/m²)".into(),
                log_y: true,
                series: series(|r| r.pd.mean),
                reference_y: Some(limits.pd_limit),
            };
            write(dir, "fig_pd_vs_distance.svg", &pd.render(), &mut written)?;
            let sar = svg::Plot {
                title: "Mean SAR versus BS-UE distance".into(),
                x_label: "distance (m)".into(),
                y_label: "SAR (W/kg)".into(),
                log_y: true,
                series: series(|r| r.sar.mean),
                reference_y: Some(limits.sar_limit),
            };
            write(dir, "fig_sar_vs_distance.svg", &sar.render(), &mut written)?;
        }
        if let Some(results) = results {
            let figures = [
                (
                    Metric::Pd,
                    "fig_cdf_pd.svg",
                    "PD (W/m²)",
                    1.0,
                    Some(limits.pd_limit),
                ),
                (
                    Metric::Sar,
                    "fig_cdf_sar.svg",
                    "SAR (W/kg)",
                    1.0,
                    Some(limits.sar_limit),
                ),
                (
                    Metric::Rate,
                    "fig_cdf_rate.svg",
                    "rate (Gbit/s)",
                    1e-9,
                    None,
                ),
            ];
            for (metric, name, label, scale, reference) in figures {
                let plot = svg::Plot {
                    title: format!("CDF of {}", metric.tag().to_uppercase()),
                    x_label: label.into(),
                    y_label: "CDF".into(),
                    log_y: false,
                    series: results
                        .policies
                        .iter()
                        .map(|p| svg::Series {
                            label: p.policy.tag().into(),
                            points: p
                                .distribution(metric)
                                .cdf_points(options.cdf_points)
                                .into_iter()
                                .map(|(v, c)| (v * scale, c))
                                .collect(),
                        })
                        .collect(),
                    reference_y: None,
                }
                .with_reference_x(reference);
                write(dir, name, &plot.render(), &mut written)?;
            }
        }
    }
    Ok(written)
}

/// Minimal SVG line-plot writer.
pub mod svg {
    use std::fmt::Write as _;

    const WIDTH: f64 = 640.0;
    const HEIGHT: f64 = 420.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 55.0;
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
    ];

    #[derive(Debug, Clone)]
    pub struct Series {
        pub label: String,
        pub points: Vec<(f64, f64)>,
    }

    #[derive(Debug, Clone)]
    pub struct Plot {
        pub title: String,
        pub x_label: String,
        pub y_label: String,
        pub log_y: bool,
        pub series: Vec<Series>,
        /// Horizontal dashed guide line.
        pub reference_y: Option<f64>,
    }

    fn escape(s: &str) -> String {
        s.replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;")
    }

    fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
        let span = hi - lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| span / s <= 6.0)
            .unwrap_or(10.0 * mag);
        let first = (lo / step).ceil() as i64;
        let last = (hi / step).floor() as i64;
        (first..=last).map(|i| i as f64 * step).collect()
    }

    fn fmt_tick(v: f64) -> String {
        if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
            format!("{v:.0e}")
        } else {
            let s = format!("{v:.4}");
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        }
    }

    impl Plot {
        /// Adds a vertical guide line, drawn as a two-point series.
        pub fn with_reference_x(mut self, x: Option<f64>) -> Self {
            if let Some(x) = x {
                self.series.push(Series {
                    label: format!("limit {}", fmt_tick(x)),
                    points: vec![(x, 0.0), (x, 1.0)],
                });
            }
            self
        }

        pub fn render(&self) -> String {
            let ty = |y: f64| if self.log_y { y.log10() } else { y };
            let finite: Vec<(f64, f64)> = self
                .series
                .iter()
                .flat_map(|s| s.points.iter().copied())
                .chain(self.reference_y.map(|y| (f64::NAN, y)))
                .filter(|(_, y)| !self.log_y || *y > 0.0)
                .collect();
            let (mut x0, mut x1, mut y0, mut y1) = (
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
            );
            for (x, y) in &finite {
                if x.is_finite() {
                    x0 = x0.min(*x);
                    x1 = x1.max(*x);
                }
                let y = ty(*y);
                if y.is_finite() {
                    y0 = y0.min(y);
                    y1 = y1.max(y);
                }
            }
            if !(x0.is_finite() && x1.is_finite()) {
                (x0, x1) = (0.0, 1.0);
            }
            if !(y0.is_finite() && y1.is_finite()) {
                (y0, y1) = (0.0, 1.0);
            }
            if self.log_y {
                y0 = y0.floor();
                y1 = y1.ceil();
            }
            if x1 - x0 <= 0.0 {
                x1 = x0 + 1.0;
            }
            if y1 - y0 <= 0.0 {
                y1 = y0 + 1.0;
            }
            let pw = WIDTH - LEFT - RIGHT;
            let ph = HEIGHT - TOP - BOTTOM;
            let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
            let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

            let mut out = String::new();
            let _ = writeln!(
                out,
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
            );
            let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
                WIDTH / 2.0,
                escape(&self.title)
            );
            let _ = writeln!(
                out,
                r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
            );
            for t in nice_ticks(x0, x1) {
                let x = sx(t);
                let _ = writeln!(
                    out,
                    r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                    TOP + ph,
                    TOP + ph + 16.0,
                    fmt_tick(t)
                );
            }
            let y_ticks: Vec<f64> = if self.log_y {
                (y0 as i64..=y1 as i64).map(|e| e as f64).collect()
            } else {
                nice_ticks(y0, y1)
            };
            for t in y_ticks {
                let y = sy(t);
                let label = if self.log_y {
                    fmt_tick(10f64.powf(t))
                } else {
                    fmt_tick(t)
                };
                let _ = writeln!(
                    out,
                    r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                    LEFT + pw,
                    LEFT - 6.0,
                    y + 4.0,
                    label
                );
            }
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                LEFT + pw / 2.0,
                HEIGHT - 12.0,
                escape(&self.x_label)
            );
            let _ = writeln!(
                out,
                r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
                TOP + ph / 2.0,
                escape(&self.y_label)
            );
            if let Some(r) = self.reference_y.filter(|r| !self.log_y || *r > 0.0) {
                let y = sy(ty(r));
                let _ = writeln!(
                    out,
                    r#"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
                    LEFT + pw
                );
            }
            for (i, s) in self.series.iter().enumerate() {
                let color = COLORS[i % COLORS.len()];
                let pts: Vec<String> = s
                    .points
                    .iter()
                    .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0))
                    .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(ty(*y))))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    pts.join(" ")
                );
                let ly = TOP + 14.0 + 16.0 * i as f64;
                let lx = LEFT + pw - 120.0;
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
                    ly - 4.0,
                    lx + 20.0,
                    ly - 4.0,
                    lx + 26.0,
                    escape(&s.label)
                );
            }
            out.push_str("</svg>\n");
            out
        }
    }

}
