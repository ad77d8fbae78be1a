//! Standalone SVG line charts of CSV columns: one polyline per series, a
//! legend, axis labels and ticks, no external assets.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use super::{finish_svg, parse_flag, Report};
use crate::cli::SvgArgs;
use crate::config::{List, Settings};
use crate::error::{CliError, Result};
use crate::output::manifest_path;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub x: String,
    pub ys: Vec<String>,
    pub group_by: Option<String>,
    pub log_x: bool,
    pub log_y: bool,
    pub title: Option<String>,
    /// Path recorded in the chart as the provenance of its data.
    pub source_manifest: String,
    /// Seconds since the Unix epoch, embedded only when set.
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Reads the named columns into series. Rows with an empty x or y cell are
/// skipped for that series; any other unusable cell is an error naming its
/// row (the line number in the file, header = row 1).
pub fn load_series(csv_text: &[u8], chart: &Chart) -> Result<Vec<Series>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv_text);
    let header = reader.headers().map_err(|e| parse_error(&e, 1))?.clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("column `{name}` not found in header")))
    };
    let x_idx = column(&chart.x)?;
    let y_idx = chart.ys.iter().map(|y| column(y)).collect::<Result<Vec<_>>>()?;
    let group_idx = chart.group_by.as_deref().map(column).transpose()?;

    // (group, y column) -> series index, in order of first appearance.
    let mut keys: Vec<(String, usize)> = Vec::new();
    let mut series: Vec<Series> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_error(&e, i + 2))?;
        let row = record.position().map_or(i as u64 + 2, |p| p.line()) as usize;
        let cell = |idx: usize, name: &str, log: bool| -> Result<Option<f64>> {
            let raw = record.get(idx).unwrap_or("").trim();
            if raw.is_empty() {
                return Ok(None);
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| CliError::Usage(format!("row {row}: column `{name}` value `{raw}` is not a number")))?;
            if !v.is_finite() {
                return Err(CliError::Usage(format!("row {row}: column `{name}` value `{raw}` is not finite")));
            }
            if log && v <= 0.0 {
                return Err(CliError::Usage(format!(
                    "row {row}: column `{name}` value {raw} is not positive and cannot be drawn on a logarithmic axis"
                )));
            }
            Ok(Some(v))
        };
        let Some(x) = cell(x_idx, &chart.x, chart.log_x)? else { continue };
        let group = group_idx.map(|g| record.get(g).unwrap_or("").to_string()).unwrap_or_default();
        for (j, &yi) in y_idx.iter().enumerate() {
            let Some(y) = cell(yi, &chart.ys[j], chart.log_y)? else { continue };
            let key = (group.clone(), j);
            let pos = match keys.iter().position(|k| *k == key) {
                Some(p) => p,
                None => {
                    keys.push(key);
                    series.push(Series { label: series_label(&group, &chart.ys[j], chart), points: Vec::new() });
                    series.len() - 1
                }
            };
            series[pos].points.push((x, y));
        }
    }
    if series.is_empty() {
        return Err(CliError::Usage("no plottable rows in input".into()));
    }
    Ok(series)
}

fn series_label(group: &str, y: &str, chart: &Chart) -> String {
    match (&chart.group_by, chart.ys.len()) {
        (None, _) => y.to_string(),
        (Some(_), 1) => group.to_string(),
        (Some(_), _) => format!("{group} {y}"),
    }
}

fn parse_error(e: &csv::Error, fallback_row: usize) -> CliError {
    let row = e.position().map_or(fallback_row as u64, |p| p.line());
    CliError::Usage(format!("malformed CSV at row {row}: {e}"))
}

/// One axis: data range in plotting coordinates (log10 when `log`).
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values
            .map(|v| if log { v.log10() } else { v })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        Axis { lo, hi, log }
    }

    fn fraction(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions in data units with their labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let span = (self.hi - self.lo) as i64;
            let stride = (span / 8 + 1).max(1);
            (self.lo as i64..=self.hi as i64)
                .filter(|e| (e - self.lo as i64) % stride == 0)
                .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
                .collect()
        } else {
            let step = nice_step((self.hi - self.lo) / 5.0);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last)
                .map(|i| {
                    let v = i as f64 * step;
                    (v, trim_label(v, step))
                })
                .collect()
        }
    }
}

/// 1, 2 or 5 times a power of ten, at least `raw`.
fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn trim_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let v = if v.abs() < step * 1e-9 { 0.0 } else { v };
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the chart. Coordinates are printed with two decimals so output is
/// byte-stable for identical input.
pub fn render(series: &[Series], chart: &Chart) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let xa = Axis::new(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), chart.log_x);
    let ya = Axis::new(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), chart.log_y);
    let px = |x: f64| LEFT + xa.fraction(x) * plot_w;
    let py = |y: f64| TOP + (1.0 - ya.fraction(y)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<!-- data manifest: {} -->", chart.source_manifest.replace("--", "- -"));
    if let Some(t) = chart.timestamp {
        let _ = writeln!(s, "<!-- generated at unix time {t} -->");
    }
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if let Some(title) = &chart.title {
        let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, LEFT + plot_w / 2.0, escape(title));
    }

    // Frame, ticks and grid.
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#);
    for (v, label) in xa.ticks() {
        let x = px(v);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##, TOP + plot_h);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, TOP + plot_h + 16.0);
    }
    for (v, label) in ya.ticks() {
        let y = py(v);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, LEFT + plot_w);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let scale = |log: bool| if log { " (log scale)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0,
        escape(&chart.x),
        scale(chart.log_x)
    );
    let (yx, yy) = (22.0, TOP + plot_h / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{yx:.2}" y="{yy:.2}" text-anchor="middle" transform="rotate(-90 {yx:.2} {yy:.2})">{}{}</text>"#,
        escape(&chart.ys.join(", ")),
        scale(chart.log_y)
    );

    // Data.
    for (i, series) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
    }

    // Legend.
    let lx = LEFT + plot_w + 16.0;
    for (i, series) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/>"#, lx + 24.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&series.label));
    }
    s.push_str("</svg>\n");
    s
}

pub fn run(args: &SvgArgs, mut s: Settings) -> Result<Report> {
    let input: PathBuf = s
        .optional("in", args.input.as_ref().map(|p| p.display().to_string()))?
        .map(PathBuf::from)
        .ok_or_else(|| CliError::Usage("--in is required".into()))?;
    let x: String = s.optional("x", args.x.clone())?.ok_or_else(|| CliError::Usage("--x is required".into()))?;
    let ys: List<String> =
        s.optional("y", parse_flag("y", args.y.as_deref())?)?.ok_or_else(|| CliError::Usage("--y is required".into()))?;
    if ys.0.is_empty() {
        return Err(CliError::Usage("--y names no columns".into()));
    }
    let group_by = s.optional("group-by", args.group_by.clone())?;
    let log_x = s.switch("log-x", args.log_x)?;
    let log_y = s.switch("log-y", args.log_y)?;
    let title = s.optional("title", args.title.clone())?;
    let timestamp = s.switch("timestamp", args.timestamp)?;
    let out = s.out_path_with(args.out.clone(), input.with_extension("svg"))?;
    let chart = Chart {
        x,
        ys: ys.0,
        group_by,
        log_x,
        log_y,
        title,
        source_manifest: manifest_path(&input).display().to_string(),
        timestamp: timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())),
    };
    let bytes = std::fs::read(&input).map_err(|e| CliError::read(&input, e))?;
    let series = load_series(&bytes, &chart)?;
    let svg = render(&series, &chart);
    finish_svg(&s, &svg, &out)
}
