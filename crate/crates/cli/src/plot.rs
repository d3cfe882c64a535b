//! Minimal deterministic SVG line charts.
//!
//! Coordinates are written with fixed precision so identical input gives
//! identical bytes.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use metaswim_core::csvio::read_table;
use metaswim_core::kinematics::TRAJECTORY_HEADER;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 52.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw as a closed loop.
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Same scale on both axes.
    pub equal_aspect: bool,
    pub series: Vec<Series>,
}

/// Reads CSV files into a chart. `t,x,y` files become closed loops in the
/// x-y plane; any other file is plotted column by column against its first
/// column. The two kinds cannot be mixed.
pub fn load_chart(paths: &[PathBuf], title: Option<String>) -> Result<Chart> {
    let mut series = Vec::new();
    let mut kinds = Vec::new();
    let mut x_label = String::new();
    let mut y_names = Vec::new();
    for path in paths {
        let table = read_table(path, None)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let is_loop = table.header.iter().map(String::as_str).eq(TRAJECTORY_HEADER);
        kinds.push(is_loop);
        if is_loop {
            series.push(Series {
                label: stem,
                points: table.rows.iter().map(|r| (r[1], r[2])).collect(),
                closed: true,
            });
            continue;
        }
        if table.header.len() < 2 {
            bail!("{}: need at least two columns to plot", path.display());
        }
        if x_label.is_empty() {
            x_label = table.header[0].clone();
        }
        for (j, name) in table.header.iter().enumerate().skip(1) {
            y_names.push(name.clone());
            series.push(Series {
                label: if paths.len() > 1 { format!("{stem}: {name}") } else { name.clone() },
                points: table.rows.iter().map(|r| (r[0], r[j])).collect(),
                closed: false,
            });
        }
    }
    if kinds.iter().any(|&k| k) && kinds.iter().any(|&k| !k) {
        bail!("cannot overlay trajectory files with time-series files");
    }
    let loops = kinds.first().copied().unwrap_or(false);
    let (x_label, y_label) = if loops {
        ("x (m)".to_string(), "y (m)".to_string())
    } else {
        y_names.dedup();
        let y = if y_names.len() == 1 { y_names.remove(0) } else { "value".to_string() };
        (x_label, y)
    };
    let title = title.unwrap_or_else(|| {
        if loops {
            "Tip trajectory".to_string()
        } else {
            paths
                .iter()
                .filter_map(|p| p.file_name())
                .map(|s| s.to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join(", ")
        }
    });
    Ok(Chart {
        title,
        x_label,
        y_label,
        equal_aspect: loops,
        series,
    })
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        values.fold(None, |acc, v| match acc {
            None => Some(Range { lo: v, hi: v }),
            Some(r) => Some(Range {
                lo: r.lo.min(v),
                hi: r.hi.max(v),
            }),
        })
    }

    fn padded(self) -> Self {
        if self.hi > self.lo {
            let pad = 0.05 * (self.hi - self.lo);
            Range {
                lo: self.lo - pad,
                hi: self.hi + pad,
            }
        } else {
            let pad = if self.lo == 0.0 { 0.5 } else { 0.1 * self.lo.abs() };
            Range {
                lo: self.lo - pad,
                hi: self.hi + pad,
            }
        }
    }

    fn span(&self) -> f64 {
        self.hi - self.lo
    }

    /// Grows the range about its centre to `span`.
    fn with_span(self, span: f64) -> Self {
        let c = 0.5 * (self.lo + self.hi);
        Range {
            lo: c - 0.5 * span,
            hi: c + 0.5 * span,
        }
    }
}

/// Tick step of the form {1, 2, 5} x 10^k giving about `target` ticks.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(r: Range) -> (Vec<f64>, usize) {
    let step = tick_step(r.span(), 5.0);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (r.lo / step).ceil() as i64;
    let last = (r.hi / step).floor() as i64;
    ((first..=last).map(|i| i as f64 * step).collect(), decimals)
}

fn tick_label(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_svg(chart: &Chart, width: u32, height: u32) -> Result<String> {
    let (w, h) = (f64::from(width), f64::from(height));
    let plot_w = w - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = h - MARGIN_TOP - MARGIN_BOTTOM;
    if plot_w < 10.0 || plot_h < 10.0 {
        bail!("plot size {width}x{height} is too small");
    }

    let points = || chart.series.iter().flat_map(|s| s.points.iter());
    let mut xr = Range::of(points().map(|p| p.0))
        .map(Range::padded)
        .unwrap_or(Range { lo: 0.0, hi: 1.0 });
    let mut yr = Range::of(points().map(|p| p.1))
        .map(Range::padded)
        .unwrap_or(Range { lo: 0.0, hi: 1.0 });
    if chart.equal_aspect {
        let scale = (xr.span() / plot_w).max(yr.span() / plot_h);
        xr = xr.with_span(scale * plot_w);
        yr = yr.with_span(scale * plot_h);
    }
    let px = |x: f64| MARGIN_LEFT + (x - xr.lo) / xr.span() * plot_w;
    let py = |y: f64| MARGIN_TOP + plot_h - (y - yr.lo) / yr.span() * plot_h;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    )?;
    writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#)?;
    writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(&chart.title)
    )?;

    // Axes frame and grid.
    writeln!(s, r#"<g class="axes" stroke="black" fill="none">"#)?;
    writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT:.2}" y="{MARGIN_TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}"/>"#
    )?;
    let (xt, xd) = ticks(xr);
    let (yt, yd) = ticks(yr);
    let bottom = MARGIN_TOP + plot_h;
    for &x in &xt {
        writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#, px(x), bottom, bottom + 5.0)?;
    }
    for &y in &yt {
        writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}"/>"#,
            MARGIN_LEFT - 5.0,
            py(y),
            MARGIN_LEFT
        )?;
    }
    writeln!(s, "</g>")?;

    writeln!(s, r#"<g class="tick-labels" fill="black">"#)?;
    for &x in &xt {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(x),
            bottom + 18.0,
            tick_label(x, xd)
        )?;
    }
    for &y in &yt {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            py(y) + 4.0,
            tick_label(y, yd)
        )?;
    }
    writeln!(s, "</g>")?;

    writeln!(
        s,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        h - 12.0,
        escape(&chart.x_label)
    )?;
    let (ylx, yly) = (16.0, MARGIN_TOP + plot_h / 2.0);
    writeln!(
        s,
        r#"<text class="y-label" x="{ylx:.2}" y="{yly:.2}" text-anchor="middle" transform="rotate(-90 {ylx:.2} {yly:.2})">{}</text>"#,
        escape(&chart.y_label)
    )?;

    let drawn: Vec<(usize, &Series)> = chart.series.iter().filter(|s| !s.points.is_empty()).enumerate().collect();
    for &(i, series) in &drawn {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = series
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        if series.closed {
            writeln!(
                s,
                r#"<path class="series" d="M{} Z" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                coords.join(" L")
            )?;
        } else {
            writeln!(
                s,
                r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                coords.join(" ")
            )?;
        }
    }

    if !drawn.is_empty() {
        let x0 = MARGIN_LEFT + plot_w - 150.0;
        writeln!(s, r#"<g class="legend">"#)?;
        for &(i, series) in &drawn {
            let y = MARGIN_TOP + 14.0 + 16.0 * i as f64;
            let color = PALETTE[i % PALETTE.len()];
            writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
                x0,
                x0 + 18.0
            )?;
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                x0 + 24.0,
                y + 4.0,
                escape(&series.label)
            )?;
        }
        writeln!(s, "</g>")?;
    }
    writeln!(s, "</svg>")?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(series: Vec<Series>) -> Chart {
        Chart {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            equal_aspect: false,
            series,
        }
    }

    #[test]
    fn empty_chart_has_axes_only() {
        let svg = render_svg(&chart(vec![]), 400, 300).unwrap();
        assert!(svg.contains(r#"class="axes""#));
        assert!(!svg.contains("polyline") && !svg.contains("<path") && !svg.contains("legend"));
    }

    #[test]
    fn single_point_range_is_padded() {
        let s = Series {
            label: "p".into(),
            points: vec![(2.0, 3.0)],
            closed: false,
        };
        let svg = render_svg(&chart(vec![s]), 400, 300).unwrap();
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn tick_steps() {
        assert_eq!(tick_step(10.0, 5.0), 2.0);
        assert_eq!(tick_step(1.0, 5.0), 0.2);
        assert_eq!(tick_step(0.7, 5.0), 0.1);
        assert_eq!(tick_label(-0.0001, 2), "0.00");
        assert_eq!(tick_label(-1.5, 1), "-1.5");
    }

    #[test]
    fn labels_are_escaped() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
