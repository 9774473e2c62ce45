//! Static SVG energy plots: one mean-energy line per group with a shaded
//! +/- 1 std band when the group holds more than one run. No display server
//! or plotting library involved; the writer emits a standalone SVG document.

use std::path::Path;

use difflab_core::{aggregate_trajectories, EnergyTrajectory, StepStats};

use crate::error::{CliError, Result};
use crate::persist::RunArtifacts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Sampler,
    Scale,
    Schedule,
}

impl GroupBy {
    pub fn name(&self) -> &'static str {
        match self {
            GroupBy::Sampler => "sampler",
            GroupBy::Scale => "scale",
            GroupBy::Schedule => "schedule",
        }
    }

    fn key_of(&self, run: &RunArtifacts) -> String {
        let key = run.config.run_key();
        match self {
            GroupBy::Sampler => key.sampler_label().to_string(),
            GroupBy::Scale => key.scale_label(),
            GroupBy::Schedule => key.schedule_label().to_string(),
        }
    }
}

/// One plotted series: per-step mean/variance over the group's runs.
#[derive(Debug, Clone)]
pub struct PlotGroup {
    pub label: String,
    pub stats: Vec<StepStats>,
    pub runs: usize,
}

/// Groups runs by the requested key and aggregates their trajectories.
pub fn group_runs(runs: &[RunArtifacts], group_by: GroupBy) -> Result<Vec<PlotGroup>> {
    if runs.is_empty() {
        return Err(CliError::EmptySelection("no runs to plot".into()));
    }
    let mut grouped: std::collections::BTreeMap<String, Vec<EnergyTrajectory>> =
        std::collections::BTreeMap::new();
    for run in runs {
        let trajectory = EnergyTrajectory::new(run.entries.iter().map(|e| e.energy).collect())?;
        grouped
            .entry(group_by.key_of(run))
            .or_default()
            .push(trajectory);
    }
    grouped
        .into_iter()
        .map(|(label, trajectories)| {
            let runs = trajectories.len();
            let stats = aggregate_trajectories(&trajectories)?;
            Ok(PlotGroup { label, stats, runs })
        })
        .collect()
}

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 210.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 58.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#e377c2", "#8c564b",
    "#bcbd22", "#7f7f7f",
];

fn esc(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    let rounded = (v * 1e6).round() / 1e6;
    if rounded == rounded.trunc() && rounded.abs() < 1e9 {
        format!("{}", rounded as i64)
    } else {
        format!("{rounded}")
    }
}

/// Evenly spaced "nice" tick positions covering [lo, hi].
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw_step = span / target.max(1) as f64;
    let magnitude = 10f64.powf(raw_step.log10().floor());
    let normalized = raw_step / magnitude;
    let nice = if normalized <= 1.0 {
        1.0
    } else if normalized <= 2.0 {
        2.0
    } else if normalized <= 5.0 {
        5.0
    } else {
        10.0
    };
    let step = nice * magnitude;
    let first = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut v = first;
    while v <= hi + step * 1e-9 {
        ticks.push(v);
        v += step;
    }
    ticks
}

/// Renders the grouped energy curves to a standalone SVG document.
pub fn render_energy_plot(groups: &[PlotGroup], title: &str) -> Result<String> {
    if groups.is_empty() {
        return Err(CliError::EmptySelection("no groups to plot".into()));
    }
    let len = groups[0].stats.len();
    for g in groups {
        if g.stats.len() != len {
            return Err(CliError::Schema(format!(
                "group `{}` has {} steps, expected {len}",
                g.label,
                g.stats.len()
            )));
        }
    }

    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for g in groups {
        for s in &g.stats {
            let sd = s.variance.sqrt();
            y_min = y_min.min(s.mean - sd);
            y_max = y_max.max(s.mean + sd);
        }
    }
    let spread = y_max > y_min;
    if !spread {
        let pad = y_max.abs().max(0.5);
        y_min -= pad * 0.5;
        y_max += pad * 0.5;
    } else {
        let pad = (y_max - y_min) * 0.05;
        y_min -= pad;
        y_max += pad;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |step: usize| -> f64 {
        if len <= 1 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + plot_w * step as f64 / (len - 1) as f64
        }
    };
    let y_of = |v: f64| -> f64 { MARGIN_TOP + plot_h * (1.0 - (v - y_min) / (y_max - y_min)) };

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        esc(title)
    ));

    // Axes.
    svg.push_str("  <g class=\"axes\" stroke=\"#333\" stroke-width=\"1\">\n");
    svg.push_str(&format!(
        "    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP + plot_h),
        fmt_coord(MARGIN_LEFT + plot_w),
        fmt_coord(MARGIN_TOP + plot_h)
    ));
    svg.push_str(&format!(
        "    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP),
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP + plot_h)
    ));
    svg.push_str("  </g>\n");

    svg.push_str(
        "  <g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n",
    );
    for tick in nice_ticks(0.0, (len - 1) as f64, 8) {
        let x = x_of(tick.round() as usize);
        svg.push_str(&format!(
            "    <line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#333\"/>\n",
            fmt_coord(MARGIN_TOP + plot_h),
            fmt_coord(MARGIN_TOP + plot_h + 5.0)
        ));
        svg.push_str(&format!(
            "    <text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            fmt_coord(MARGIN_TOP + plot_h + 18.0),
            fmt_tick(tick)
        ));
    }
    for tick in nice_ticks(y_min, y_max, 6) {
        let y = y_of(tick);
        svg.push_str(&format!(
            "    <line x1=\"{}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#333\"/>\n",
            fmt_coord(MARGIN_LEFT - 5.0),
            fmt_coord(MARGIN_LEFT)
        ));
        svg.push_str(&format!(
            "    <text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            fmt_coord(MARGIN_LEFT - 9.0),
            y + 4.0,
            fmt_tick(tick)
        ));
    }
    svg.push_str("  </g>\n");

    // Axis labels.
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">step</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    ));
    svg.push_str(&format!(
        "  <text x=\"20\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">energy</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // Series: band first (under), then mean line.
    svg.push_str("  <g class=\"series\">\n");
    for (i, g) in groups.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if g.runs > 1 {
            let mut points = Vec::with_capacity(2 * len);
            for (step, s) in g.stats.iter().enumerate() {
                points.push(format!(
                    "{},{}",
                    fmt_coord(x_of(step)),
                    fmt_coord(y_of(s.mean + s.variance.sqrt()))
                ));
            }
            for (step, s) in g.stats.iter().enumerate().rev() {
                points.push(format!(
                    "{},{}",
                    fmt_coord(x_of(step)),
                    fmt_coord(y_of(s.mean - s.variance.sqrt()))
                ));
            }
            svg.push_str(&format!(
                "    <polygon class=\"band\" points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n",
                points.join(" ")
            ));
        }
        let line: Vec<String> = g
            .stats
            .iter()
            .enumerate()
            .map(|(step, s)| format!("{},{}", fmt_coord(x_of(step)), fmt_coord(y_of(s.mean))))
            .collect();
        svg.push_str(&format!(
            "    <polyline class=\"mean\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            line.join(" ")
        ));
    }
    svg.push_str("  </g>\n");

    // Legend.
    svg.push_str("  <g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n");
    let legend_x = MARGIN_LEFT + plot_w + 18.0;
    for (i, g) in groups.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 10.0 + i as f64 * 20.0;
        svg.push_str("    <g class=\"legend-entry\">\n");
        svg.push_str(&format!(
            "      <line x1=\"{}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            fmt_coord(legend_x),
            fmt_coord(legend_x + 24.0)
        ));
        svg.push_str(&format!(
            "      <text x=\"{}\" y=\"{:.2}\">{} (n={})</text>\n",
            fmt_coord(legend_x + 30.0),
            y + 4.0,
            esc(&g.label),
            g.runs
        ));
        svg.push_str("    </g>\n");
    }
    svg.push_str("  </g>\n");
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Groups, renders, and writes the plot; returns the written path.
pub fn emit_energy_plot(runs: &[RunArtifacts], group_by: GroupBy, out_path: &Path) -> Result<()> {
    let groups = group_runs(runs, group_by)?;
    let title = format!("mean energy per step, grouped by {}", group_by.name());
    let svg = render_energy_plot(&groups, &title)?;
    std::fs::write(out_path, svg)
        .map_err(|e| CliError::io(format!("writing {}", out_path.display()), e))?;
    Ok(())
}
