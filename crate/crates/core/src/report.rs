//! Standalone SVG figures: score heatmap, score histogram, pair plot with
//! lagged-correlation stems, and alarm timelines.
//!
//! Output is deterministic text; coordinates are printed with fixed decimals
//! and nothing time- or platform-dependent is embedded.

use std::fmt::Write as _;

use crate::anomaly::{AlarmCluster, AlarmSeries};
use crate::error::{Error, Result};
use crate::numfmt::fixed;
use crate::scorematrix::{summary_stats, ScoreMatrix};
use crate::timeseries::TimeSeries;
use crate::xcorr::CorrelationVector;

pub const DEFAULT_BINS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorScheme {
    /// Brown (negative) through white (zero) to green (positive).
    #[default]
    GreenBrown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub width: u32,
    pub height: u32,
    pub x_label: String,
    pub y_label: String,
    pub scheme: ColorScheme,
}

impl PlotSpec {
    pub fn new(title: impl Into<String>, width: u32, height: u32) -> Result<Self> {
        if width < 100 || height < 100 {
            return Err(Error::Domain(format!(
                "plot size {width}x{height} below 100x100"
            )));
        }
        Ok(Self {
            title: title.into(),
            width,
            height,
            x_label: String::new(),
            y_label: String::new(),
            scheme: ColorScheme::default(),
        })
    }

    pub fn with_labels(mut self, x: impl Into<String>, y: impl Into<String>) -> Self {
        self.x_label = x.into();
        self.y_label = y.into();
        self
    }

    fn check(&self) -> Result<()> {
        if self.width < 100 || self.height < 100 {
            return Err(Error::Domain(format!(
                "plot size {}x{} below 100x100",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

const WHITE: Rgb = Rgb(255, 255, 255);
const GREEN: Rgb = Rgb(0, 104, 55);
const BROWN: Rgb = Rgb(140, 81, 10);
const SKIPPED_FILL: &str = "#9e9e9e";
const DIAGONAL_FILL: &str = "#e0e0e0";

/// Diverging color for `score` on a scale symmetric about zero.
pub fn diverging_color(score: f64, scale: f64) -> Rgb {
    let t = if scale > 0.0 {
        (score / scale).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    let end = if t >= 0.0 { GREEN } else { BROWN };
    let mix = |w: u8, e: u8| -> u8 {
        let v = w as f64 + t.abs() * (e as f64 - w as f64);
        v.round() as u8
    };
    Rgb(
        mix(WHITE.0, end.0),
        mix(WHITE.1, end.1),
        mix(WHITE.2, end.2),
    )
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn f2(v: f64) -> String {
    fixed(v, 2)
}

struct Svg {
    buf: String,
}

impl Svg {
    fn new(spec: &PlotSpec) -> Self {
        let mut buf = String::new();
        let _ = writeln!(
            buf,
            r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"##,
            w = spec.width,
            h = spec.height
        );
        let _ = writeln!(
            buf,
            r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##,
            spec.width, spec.height
        );
        let mut svg = Self { buf };
        if !spec.title.is_empty() {
            svg.text(
                spec.width as f64 / 2.0,
                20.0,
                14,
                "middle",
                &spec.title,
                "title",
            );
        }
        svg
    }

    fn raw(&mut self, s: &str) {
        self.buf.push_str(s);
        self.buf.push('\n');
    }

    #[allow(clippy::too_many_arguments)]
    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, class: &str, extra: &str) {
        let _ = writeln!(
            self.buf,
            r##"<rect class="{class}" x="{}" y="{}" width="{}" height="{}" fill="{fill}"{extra}/>"##,
            f2(x),
            f2(y),
            f2(w),
            f2(h)
        );
    }

    #[allow(clippy::too_many_arguments)]
    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, class: &str, extra: &str) {
        let _ = writeln!(
            self.buf,
            r##"<line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}"{extra}/>"##,
            f2(x1),
            f2(y1),
            f2(x2),
            f2(y2)
        );
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, class: &str) {
        let _ = writeln!(
            self.buf,
            r##"<circle class="{class}" cx="{}" cy="{}" r="{}" fill="{fill}"/>"##,
            f2(cx),
            f2(cy),
            f2(r)
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, class: &str) {
        let pts: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{},{}", f2(*x), f2(*y)))
            .collect();
        let _ = writeln!(
            self.buf,
            r##"<polyline class="{class}" points="{}" fill="none" stroke="{stroke}" stroke-width="1.2"/>"##,
            pts.join(" ")
        );
    }

    fn text(&mut self, x: f64, y: f64, size: u32, anchor: &str, text: &str, class: &str) {
        let _ = writeln!(
            self.buf,
            r##"<text class="{class}" x="{}" y="{}" font-size="{size}" text-anchor="{anchor}">{}</text>"##,
            f2(x),
            f2(y),
            escape(text)
        );
    }

    fn rotated_text(&mut self, x: f64, y: f64, text: &str) {
        let _ = writeln!(
            self.buf,
            r##"<text class="axis-label" x="{x}" y="{y}" font-size="11" text-anchor="middle" transform="rotate(-90 {x} {y})">{}</text>"##,
            escape(text),
            x = f2(x),
            y = f2(y)
        );
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// Index labels at 1 and at multiples of a round step, at most ~20 labels.
fn index_ticks(n: usize) -> Vec<usize> {
    let raw = n.div_ceil(20).max(1);
    let step = [1, 2, 5, 10, 20, 25, 50, 100, 200, 250, 500, 1000]
        .into_iter()
        .find(|&s| s >= raw)
        .unwrap_or(raw);
    let mut ticks = vec![1];
    ticks.extend((1..=n / step).map(|k| k * step).filter(|&t| t > 1));
    ticks
}

/// Evenly spaced round values covering `[lo, hi]`.
fn value_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mut mag = 1.0;
    while mag > raw {
        mag /= 10.0;
    }
    while mag * 10.0 <= raw {
        mag *= 10.0;
    }
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    crate::numfmt::sig(v, 4)
}

/// N × N score grid. Skipped pairs are gray; the diagonal is light gray.
pub fn render_heatmap(m: &ScoreMatrix, spec: &PlotSpec) -> Result<String> {
    spec.check()?;
    let n = m.n_regions();
    if n == 0 {
        return Err(Error::InsufficientData("empty score matrix".into()));
    }
    let scores = m.score_values();
    let scale = scores.iter().fold(0.0f64, |acc, s| acc.max(s.abs()));

    let (left, top, right, bottom) = (50.0, 40.0, 90.0, 45.0);
    let avail_w = spec.width as f64 - left - right;
    let avail_h = spec.height as f64 - top - bottom;
    let side = avail_w.min(avail_h).max(1.0);
    let cell = side / n as f64;

    let mut svg = Svg::new(spec);
    svg.raw(r##"<g class="grid" shape-rendering="crispEdges">"##);
    for r in 1..=n {
        for c in 1..=n {
            let x = left + (c - 1) as f64 * cell;
            let y = top + (r - 1) as f64 * cell;
            if r == c {
                svg.rect(x, y, cell, cell, DIAGONAL_FILL, "diag", "");
                continue;
            }
            match m.get(r, c)? {
                Some(s) => {
                    let fill = diverging_color(s, scale).hex();
                    svg.rect(x, y, cell, cell, &fill, "cell", "");
                }
                None => svg.rect(x, y, cell, cell, SKIPPED_FILL, "skipped", ""),
            }
        }
    }
    svg.raw("</g>");

    for t in index_ticks(n) {
        let centre = (t - 1) as f64 * cell + cell / 2.0;
        svg.text(
            left + centre,
            top + side + 14.0,
            9,
            "middle",
            &t.to_string(),
            "tick",
        );
        svg.text(
            left - 4.0,
            top + centre + 3.0,
            9,
            "end",
            &t.to_string(),
            "tick",
        );
    }
    let x_label = if spec.x_label.is_empty() {
        "Region index"
    } else {
        &spec.x_label
    };
    let y_label = if spec.y_label.is_empty() {
        "Region index"
    } else {
        &spec.y_label
    };
    svg.text(
        left + side / 2.0,
        top + side + 32.0,
        11,
        "middle",
        x_label,
        "axis-label",
    );
    svg.rotated_text(14.0, top + side / 2.0, y_label);

    // colour bar
    let bar_x = left + side + 20.0;
    let steps = 40;
    let bar_h = side / steps as f64;
    for s in 0..steps {
        let v = scale * (1.0 - 2.0 * (s as f64 + 0.5) / steps as f64);
        let fill = diverging_color(v, scale).hex();
        svg.rect(
            bar_x,
            top + s as f64 * bar_h,
            14.0,
            bar_h,
            &fill,
            "colorbar",
            "",
        );
    }
    svg.text(
        bar_x + 18.0,
        top + 8.0,
        9,
        "start",
        &tick_label(scale),
        "colorbar-label",
    );
    svg.text(
        bar_x + 18.0,
        top + side / 2.0 + 3.0,
        9,
        "start",
        "0",
        "colorbar-label",
    );
    svg.text(
        bar_x + 18.0,
        top + side,
        9,
        "start",
        &tick_label(-scale),
        "colorbar-label",
    );
    Ok(svg.finish())
}

/// Equal-width bins over `[min, max]`. A zero-width range is widened to one
/// unit around the value.
pub fn histogram_counts(scores: &[f64], bins: usize) -> Result<(f64, f64, Vec<usize>)> {
    if scores.is_empty() {
        return Err(Error::InsufficientData("no scores to bin".into()));
    }
    let bins = bins.max(1);
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if max > min {
        (min, max)
    } else {
        (min - 0.5, max + 0.5)
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in scores {
        let idx = (((s - lo) / width).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok((lo, hi, counts))
}

pub fn render_histogram(scores: &[f64], bins: usize, spec: &PlotSpec) -> Result<String> {
    spec.check()?;
    let stats = summary_stats(scores)?;
    let (lo, hi, counts) = histogram_counts(scores, bins)?;
    let peak = counts.iter().copied().max().unwrap_or(1).max(1);

    let (left, top, right, bottom) = (55.0, 40.0, 20.0, 45.0);
    let pw = spec.width as f64 - left - right;
    let ph = spec.height as f64 - top - bottom;
    let bw = pw / counts.len() as f64;
    let base = top + ph;

    let mut svg = Svg::new(spec);
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let h = ph * c as f64 / peak as f64;
        svg.rect(
            left + i as f64 * bw,
            base - h,
            bw,
            h,
            "#4f81bd",
            "bar",
            r##" stroke="#ffffff" stroke-width="0.5""##,
        );
    }
    svg.line(left, base, left + pw, base, "#000000", "axis", "");
    svg.line(left, top, left, base, "#000000", "axis", "");
    for v in value_ticks(lo, hi, 6) {
        let x = left + (v - lo) / (hi - lo) * pw;
        svg.line(x, base, x, base + 4.0, "#000000", "tick", "");
        svg.text(x, base + 15.0, 9, "middle", &tick_label(v), "tick");
    }
    for v in value_ticks(0.0, peak as f64, 5) {
        let y = base - v / peak as f64 * ph;
        svg.line(left - 4.0, y, left, y, "#000000", "tick", "");
        svg.text(left - 6.0, y + 3.0, 9, "end", &tick_label(v), "tick");
    }
    let x_label = if spec.x_label.is_empty() {
        "Correlation score"
    } else {
        &spec.x_label
    };
    let y_label = if spec.y_label.is_empty() {
        "Frequency"
    } else {
        &spec.y_label
    };
    svg.text(
        left + pw / 2.0,
        base + 32.0,
        11,
        "middle",
        x_label,
        "axis-label",
    );
    svg.rotated_text(14.0, top + ph / 2.0, y_label);

    let caption = stats.caption();
    let (first, second) = caption.split_once("; ").unwrap_or((&caption, ""));
    let box_w = 190.0f64.min(pw);
    let box_x = left + pw - box_w - 4.0;
    svg.rect(
        box_x,
        top + 4.0,
        box_w,
        34.0,
        "#ffffff",
        "annotation",
        r##" stroke="#000000" stroke-width="0.5""##,
    );
    svg.text(box_x + 6.0, top + 18.0, 9, "start", first, "annotation");
    svg.text(box_x + 6.0, top + 31.0, 9, "start", second, "annotation");
    Ok(svg.finish())
}

/// Two overlaid series above, lagged correlations as stems below with dashed
/// lines at `±threshold`.
pub fn render_pair_plot(
    x: &TimeSeries,
    y: &TimeSeries,
    cv: &CorrelationVector,
    threshold: f64,
    spec: &PlotSpec,
) -> Result<String> {
    spec.check()?;
    if x.len() != y.len() {
        return Err(Error::Pairing(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let (left, right) = (55.0, 20.0);
    let pw = spec.width as f64 - left - right;
    let usable = spec.height as f64 - 40.0 - 30.0;
    let upper_top = 40.0;
    let upper_h = usable * 0.55 - 20.0;
    let lower_top = upper_top + usable * 0.55 + 10.0;
    let lower_h = usable * 0.45 - 20.0;

    let mut svg = Svg::new(spec);

    // upper panel
    let vmax = x
        .values()
        .iter()
        .chain(y.values())
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let vmin = x
        .values()
        .iter()
        .chain(y.values())
        .copied()
        .fold(f64::INFINITY, f64::min)
        .min(0.0);
    let vmax = if vmax > vmin { vmax } else { vmin + 1.0 };
    let n = x.len();
    let px = |t: usize| left + t as f64 / (n - 1).max(1) as f64 * pw;
    let py = |v: f64| upper_top + upper_h - (v - vmin) / (vmax - vmin) * upper_h;
    let upper_base = upper_top + upper_h;
    svg.line(
        left,
        upper_base,
        left + pw,
        upper_base,
        "#000000",
        "axis",
        "",
    );
    svg.line(left, upper_top, left, upper_base, "#000000", "axis", "");
    for v in value_ticks(vmin, vmax, 4) {
        svg.text(left - 6.0, py(v) + 3.0, 9, "end", &tick_label(v), "tick");
    }
    for w in value_ticks(x.start_week as f64, x.last_week() as f64, 8) {
        let t = w - x.start_week as f64;
        let xx = left + t / (n - 1).max(1) as f64 * pw;
        svg.text(xx, upper_base + 13.0, 9, "middle", &tick_label(w), "tick");
    }
    let pts = |s: &TimeSeries| -> Vec<(f64, f64)> {
        s.values()
            .iter()
            .enumerate()
            .map(|(t, &v)| (px(t), py(v)))
            .collect()
    };
    svg.polyline(&pts(x), "#1f77b4", "series-a");
    svg.polyline(&pts(y), "#d62728", "series-b");
    svg.text(
        left + 6.0,
        upper_top + 10.0,
        10,
        "start",
        &format!("Region {}", x.region_index),
        "legend-a",
    );
    svg.text(
        left + 76.0,
        upper_top + 10.0,
        10,
        "start",
        &format!("Region {}", y.region_index),
        "legend-b",
    );
    let x_label = if spec.x_label.is_empty() {
        if x.is_differenced() {
            "Week (differenced)"
        } else {
            "Week"
        }
    } else {
        &spec.x_label
    };
    svg.text(
        left + pw / 2.0,
        upper_base + 26.0,
        10,
        "middle",
        x_label,
        "axis-label",
    );

    // lower panel: correlations in [-1, 1]
    let cy = |v: f64| lower_top + lower_h / 2.0 - v * lower_h / 2.0;
    let lags = 2 * cv.lag_max + 1;
    let slot = pw / lags as f64;
    let lx = |i: usize| left + (i as f64 + 0.5) * slot;
    svg.line(left, cy(0.0), left + pw, cy(0.0), "#000000", "axis", "");
    svg.line(
        left,
        lower_top,
        left,
        lower_top + lower_h,
        "#000000",
        "axis",
        "",
    );
    for v in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        svg.text(left - 6.0, cy(v) + 3.0, 9, "end", &tick_label(v), "tick");
    }
    for sign in [1.0, -1.0] {
        let yy = cy(sign * threshold);
        svg.line(
            left,
            yy,
            left + pw,
            yy,
            "#1f4fbf",
            "threshold",
            r##" stroke-dasharray="4 3""##,
        );
    }
    for (i, (lag, v)) in cv.lags().zip(cv.values()).enumerate() {
        svg.line(
            lx(i),
            cy(0.0),
            lx(i),
            cy(*v),
            "#000000",
            "stem",
            r##" stroke-width="1.5""##,
        );
        svg.circle(lx(i), cy(*v), 2.5, "#000000", "stem-head");
        svg.text(
            lx(i),
            lower_top + lower_h + 13.0,
            9,
            "middle",
            &lag.to_string(),
            "tick",
        );
    }
    svg.text(
        left + pw / 2.0,
        lower_top + lower_h + 26.0,
        10,
        "middle",
        "Lag (weeks)",
        "axis-label",
    );
    Ok(svg.finish())
}

/// Two stacked count panels with alarm markers and cluster bands.
pub fn render_alarm_timeline(
    a: &AlarmSeries,
    b: &AlarmSeries,
    clusters_a: &[AlarmCluster],
    clusters_b: &[AlarmCluster],
    spec: &PlotSpec,
) -> Result<String> {
    spec.check()?;
    let (first, last) = match (a.week_span(), b.week_span()) {
        (Some(sa), Some(sb)) if sa == sb => sa,
        (sa, sb) => {
            return Err(Error::Pairing(format!(
                "alarm series cover different weeks: {sa:?} vs {sb:?}"
            )))
        }
    };
    let (left, right) = (55.0, 20.0);
    let pw = spec.width as f64 - left - right;
    let panel_gap = 30.0;
    let panel_h = (spec.height as f64 - 40.0 - 40.0 - panel_gap) / 2.0;
    let span = (last - first + 1) as f64;
    let wx = |w: f64| left + (w - first as f64 + 0.5) / span * pw;

    let mut svg = Svg::new(spec);
    for (p, (series, clusters)) in [(a, clusters_a), (b, clusters_b)].into_iter().enumerate() {
        let top = 40.0 + p as f64 * (panel_h + panel_gap);
        let base = top + panel_h;
        let vmax = series
            .entries
            .iter()
            .map(|e| e.observed)
            .fold(0.0f64, f64::max)
            .max(1.0);
        let vy = |v: f64| base - v / vmax * panel_h;
        for c in clusters {
            let x0 = wx(c.start_week as f64 - 0.5);
            let x1 = wx(c.end_week as f64 + 0.5);
            svg.rect(
                x0,
                top,
                x1 - x0,
                panel_h,
                "#ffd700",
                "cluster",
                r##" fill-opacity="0.35""##,
            );
        }
        svg.line(left, base, left + pw, base, "#000000", "axis", "");
        svg.line(left, top, left, base, "#000000", "axis", "");
        for v in value_ticks(0.0, vmax, 3) {
            svg.text(left - 6.0, vy(v) + 3.0, 9, "end", &tick_label(v), "tick");
        }
        let pts: Vec<(f64, f64)> = series
            .entries
            .iter()
            .map(|e| (wx(e.week as f64), vy(e.observed)))
            .collect();
        svg.polyline(&pts, "#333333", "counts");
        for e in series.entries.iter().filter(|e| e.alarm) {
            svg.circle(wx(e.week as f64), vy(e.observed), 3.0, "#d62728", "alarm");
        }
        svg.text(
            left + 6.0,
            top + 10.0,
            10,
            "start",
            &format!("Region {}", series.region_index),
            "panel-label",
        );
    }
    let bottom = 40.0 + 2.0 * panel_h + panel_gap;
    for w in value_ticks(first as f64, last as f64, 8) {
        svg.text(wx(w), bottom + 13.0, 9, "middle", &tick_label(w), "tick");
    }
    let x_label = if spec.x_label.is_empty() {
        "Week"
    } else {
        &spec.x_label
    };
    svg.text(
        left + pw / 2.0,
        bottom + 28.0,
        10,
        "middle",
        x_label,
        "axis-label",
    );
    Ok(svg.finish())
}
