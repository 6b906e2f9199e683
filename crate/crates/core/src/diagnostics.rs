//! Plots and text summaries of a finished chain.
//!
//! The SVG is written by hand: the plots are simple (polylines, bars and
//! circles) and a plotting dependency would dwarf the rest of the crate.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::engine::{HyperRecord, HYPER_FIELDS};
use crate::io::{FormatError, SampleTable};
use crate::model::{BetaHyper, Block, BlockTruth};
use crate::simulate::TruthRecord;
use crate::stats::{pearson, Moments};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 40.0;
const MAX_TRACE_POINTS: usize = 4000;

const FIRST_HALF: &str = "#1f77b4";
const SECOND_HALF: &str = "#ff7f0e";
const TRUTH: &str = "#d62728";

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn spanning(values: impl IntoIterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.into_iter().filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            let pad = 0.5 * (1.0 + lo.abs());
            return Axis { lo: lo - pad, hi: hi + pad };
        }
        let pad = 0.04 * (hi - lo);
        Axis { lo: lo - pad, hi: hi + pad }
    }

    fn ticks(&self) -> Vec<f64> {
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + 1e-9 * step {
            out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
            t += step;
        }
        out
    }
}

struct Canvas {
    svg: String,
    x: Axis,
    y: Axis,
}

impl Canvas {
    fn new(title: &str, x: Axis, y: Axis, xlabel: &str, ylabel: &str) -> Canvas {
        let mut svg = String::new();
        writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        )
        .unwrap();
        writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title))
            .unwrap();
        let mut c = Canvas { svg, x, y };
        c.axes(xlabel, ylabel);
        c
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.lo) / (self.x.hi - self.x.lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.lo) / (self.y.hi - self.y.lo) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&mut self, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        writeln!(self.svg, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0)
            .unwrap();
        for t in self.x.ticks() {
            let p = self.px(t);
            writeln!(self.svg, r#"<line x1="{p:.1}" y1="{y1}" x2="{p:.1}" y2="{}" stroke="black"/>"#, y1 + 4.0).unwrap();
            writeln!(self.svg, r#"<text x="{p:.1}" y="{}" text-anchor="middle">{}</text>"#, y1 + 16.0, fmt_tick(t)).unwrap();
        }
        for t in self.y.ticks() {
            let p = self.py(t);
            writeln!(self.svg, r#"<line x1="{}" y1="{p:.1}" x2="{x0}" y2="{p:.1}" stroke="black"/>"#, x0 - 4.0).unwrap();
            writeln!(self.svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, p + 4.0, fmt_tick(t)).unwrap();
        }
        writeln!(self.svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 6.0, escape(xlabel))
            .unwrap();
        writeln!(
            self.svg,
            r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            escape(ylabel)
        )
        .unwrap();
    }

    fn polyline(&mut self, points: impl IntoIterator<Item = (f64, f64)>, colour: &str, dashed: bool) {
        let mut pts = String::new();
        for (x, y) in points {
            if x.is_finite() && y.is_finite() {
                write!(pts, "{:.1},{:.1} ", self.px(x), self.py(y)).unwrap();
            }
        }
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        writeln!(self.svg, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1"{dash}/>"#, pts.trim_end())
            .unwrap();
    }

    fn hline(&mut self, y: f64, colour: &str) {
        self.polyline([(self.x.lo, y), (self.x.hi, y)], colour, true);
    }

    fn vline(&mut self, x: f64, colour: &str) {
        self.polyline([(x, self.y.lo), (x, self.y.hi)], colour, true);
    }

    fn text(&mut self, x: f64, y: f64, s: &str) {
        writeln!(self.svg, r#"<text x="{x:.1}" y="{y:.1}">{}</text>"#, escape(s)).unwrap();
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Trace plot. The first half of the chain is drawn in blue and the second
/// in orange; a dashed red line marks the true value when known.
pub fn trace_svg(title: &str, iterations: &[u64], values: &[f64], truth: Option<f64>) -> String {
    let n = values.len().min(iterations.len());
    let x = Axis::spanning(iterations[..n].iter().map(|&i| i as f64));
    let y = Axis::spanning(values[..n].iter().copied().chain(truth));
    let mut c = Canvas::new(title, x, y, "iteration", "value");
    let stride = n.div_ceil(MAX_TRACE_POINTS).max(1);
    let half = n / 2;
    let pick = |range: std::ops::Range<usize>| {
        let end = range.end;
        range.step_by(stride).chain(std::iter::once(end.saturating_sub(1))).filter(move |&k| k < end)
    };
    let first: Vec<(f64, f64)> = pick(0..(half + 1).min(n)).map(|k| (iterations[k] as f64, values[k])).collect();
    let second: Vec<(f64, f64)> = pick(half..n).map(|k| (iterations[k] as f64, values[k])).collect();
    c.polyline(first, FIRST_HALF, false);
    c.polyline(second, SECOND_HALF, false);
    if let Some(t) = truth {
        c.hline(t, TRUTH);
    }
    c.finish()
}

/// Histogram scaled to a density, a Gaussian kernel estimate over it, and a
/// truth marker.
pub fn density_svg(title: &str, values: &[f64], truth: Option<f64>) -> String {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let x = Axis::spanning(finite.iter().copied().chain(truth));
    let bins = 30usize;
    let width = (x.hi - x.lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &finite {
        let k = (((v - x.lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = finite.len().max(1) as f64;
    let heights: Vec<f64> = counts.iter().map(|&c| c as f64 / (total * width)).collect();

    let kde = kernel_density(&finite, x, 200);
    let top = heights.iter().chain(kde.iter().map(|(_, d)| d)).fold(0.0f64, |m, &v| m.max(v));
    let y = Axis { lo: 0.0, hi: if top > 0.0 { top * 1.08 } else { 1.0 } };
    let mut c = Canvas::new(title, x, y, "value", "density");
    for (k, h) in heights.iter().enumerate() {
        if *h == 0.0 {
            continue;
        }
        let x0 = c.px(x.lo + k as f64 * width);
        let x1 = c.px(x.lo + (k + 1) as f64 * width);
        let y1 = c.py(*h);
        writeln!(
            c.svg,
            r##"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="#c6dbef" stroke="#6baed6"/>"##,
            x1 - x0,
            c.py(0.0) - y1
        )
        .unwrap();
    }
    c.polyline(kde, FIRST_HALF, false);
    if let Some(t) = truth {
        c.vline(t, TRUTH);
    }
    c.finish()
}

fn kernel_density(values: &[f64], axis: Axis, points: usize) -> Vec<(f64, f64)> {
    let Some(m) = Moments::of(values) else { return Vec::new() };
    let n = values.len() as f64;
    let h = 1.06 * m.sd * n.powf(-0.2);
    if !(h > 0.0) {
        return Vec::new();
    }
    // Bin the sample first so large chains stay cheap.
    let grid = 512usize;
    let step = (axis.hi - axis.lo) / grid as f64;
    let mut weights = vec![0.0; grid];
    for &v in values {
        let k = (((v - axis.lo) / step) as usize).min(grid - 1);
        weights[k] += 1.0;
    }
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    (0..points)
        .map(|j| {
            let x = axis.lo + (axis.hi - axis.lo) * j as f64 / (points - 1) as f64;
            let d: f64 = weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(k, w)| {
                    let u = (x - (axis.lo + (k as f64 + 0.5) * step)) / h;
                    w * (-0.5 * u * u).exp()
                })
                .sum();
            (x, d * norm)
        })
        .collect()
}

/// Truth against posterior mean, with the identity line and the Pearson
/// correlation printed in the corner.
pub fn scatter_svg(title: &str, truth: &[f64], estimate: &[f64]) -> String {
    let axis = Axis::spanning(truth.iter().chain(estimate).copied());
    let mut c = Canvas::new(title, axis, axis, "true value", "posterior mean");
    c.polyline([(axis.lo, axis.lo), (axis.hi, axis.hi)], "#999999", true);
    for (t, e) in truth.iter().zip(estimate) {
        writeln!(c.svg, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{FIRST_HALF}" fill-opacity="0.7"/>"#, c.px(*t), c.py(*e))
            .unwrap();
    }
    let label = match pearson(truth, estimate) {
        Some(r) => format!("r = {r:.3}"),
        None => "r undefined".into(),
    };
    c.text(LEFT + 8.0, TOP + 16.0, &label);
    c.finish()
}

/// True values of the stored hyper fields, derived from a generating Beta.
pub fn hyper_truth(generating: &BlockTruth, block: Block) -> Option<[f64; 4]> {
    let (a, b) = generating.get(block);
    let h = BetaHyper::from_ab(a, b).ok()?;
    Some(HyperRecord::from_hyper(&h).values())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDiagnostics {
    pub block: Block,
    pub field: &'static str,
    pub moments: Moments,
    pub quantiles: [f64; 2],
    pub first_half: f64,
    pub second_half: f64,
    /// Fraction of consecutive stored draws that differ.
    pub move_rate: f64,
    pub truth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub draws: usize,
    pub fields: Vec<FieldDiagnostics>,
    pub correlations: Option<[Option<f64>; 3]>,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn render(&self) -> String {
        let mut s = format!("draws: {}\n\n", self.draws);
        writeln!(
            s,
            "{:<5} {:<11} {:>11} {:>10} {:>11} {:>11} {:>11} {:>11} {:>7} {:>10}",
            "block", "field", "mean", "sd", "q2.5", "q97.5", "1st half", "2nd half", "moves", "truth"
        )
        .unwrap();
        for f in &self.fields {
            let truth = f.truth.map(|t| format!("{t:.4}")).unwrap_or_else(|| "-".into());
            writeln!(
                s,
                "{:<5} {:<11} {:>11.4} {:>10.4} {:>11.4} {:>11.4} {:>11.4} {:>11.4} {:>7.3} {:>10}",
                f.block.name(),
                f.field,
                f.moments.mean,
                f.moments.sd,
                f.quantiles[0],
                f.quantiles[1],
                f.first_half,
                f.second_half,
                f.move_rate,
                truth
            )
            .unwrap();
        }
        if let Some(corr) = self.correlations {
            s.push_str("\ncorrelation of posterior means with truth\n");
            for block in Block::ALL {
                let r = corr[block.index()].map(|r| format!("{r:.4}")).unwrap_or_else(|| "undefined".into());
                writeln!(s, "  {:<5} {r}", block.name()).unwrap();
            }
        }
        s
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() { f64::NAN } else { xs.iter().sum::<f64>() / xs.len() as f64 }
}

/// Writes trace and density plots for every hyper field, a scatter per block
/// when truth and stored θ draws are both available, and `summary.txt`.
///
/// `generating` supplies the hyper-parameter truth lines; without it only
/// the individual-level truth in `truth` is used.
pub fn write_diagnostics(
    table: &SampleTable,
    truth: Option<&TruthRecord>,
    generating: Option<&BlockTruth>,
    out: &Path,
) -> Result<Report, FormatError> {
    if table.samples.is_empty() {
        return Err(FormatError::Invalid("no samples to diagnose".into()));
    }
    fs::create_dir_all(out)?;
    let generating = generating.or_else(|| truth.and_then(|t| t.generating.as_ref()));
    let iterations: Vec<u64> = table.samples.iter().map(|s| s.iteration).collect();
    let mut files = Vec::new();
    let mut fields = Vec::new();

    for block in Block::ALL {
        let truths = generating.and_then(|g| hyper_truth(g, block));
        for (j, field) in HYPER_FIELDS.iter().enumerate() {
            let values: Vec<f64> = table.samples.iter().map(|s| s.hypers[block.index()].values()[j]).collect();
            let t = truths.map(|v| v[j]);
            let stem = format!("{}_{}", block.name(), field);

            let path = out.join(format!("trace_{stem}.svg"));
            fs::write(&path, trace_svg(&format!("{block} {field}"), &iterations, &values, t))?;
            files.push(path);
            let path = out.join(format!("density_{stem}.svg"));
            fs::write(&path, density_svg(&format!("{block} {field}"), &values, t))?;
            files.push(path);

            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            let half = values.len() / 2;
            let moves = values.windows(2).filter(|w| w[0] != w[1]).count();
            fields.push(FieldDiagnostics {
                block,
                field,
                moments: Moments::of(&values).unwrap_or_default(),
                quantiles: [quantile(&sorted, 0.025), quantile(&sorted, 0.975)],
                first_half: mean(&values[..half]),
                second_half: mean(&values[half..]),
                move_rate: moves as f64 / values.len().saturating_sub(1).max(1) as f64,
                truth: t,
            });
        }
    }

    let mut correlations = None;
    if let Some(truth) = truth {
        let stored: Vec<_> = table.samples.iter().filter_map(|s| s.thetas.as_ref()).collect();
        if !stored.is_empty() {
            // Align truth rows to sample columns by id.
            let rows: Vec<Option<usize>> = table.ids.iter().map(|id| truth.ids.iter().position(|t| t == id)).collect();
            let mut corr = [None; 3];
            for block in Block::ALL {
                let (mut tv, mut ev) = (Vec::new(), Vec::new());
                for (i, row) in rows.iter().enumerate() {
                    if let Some(r) = row {
                        tv.push(truth.params[*r].get(block));
                        ev.push(mean(&stored.iter().map(|t| t[i].get(block)).collect::<Vec<_>>()));
                    }
                }
                if tv.is_empty() {
                    continue;
                }
                corr[block.index()] = pearson(&tv, &ev);
                let path = out.join(format!("scatter_{}.svg", block.name()));
                fs::write(&path, scatter_svg(&format!("{block}: truth vs posterior mean"), &tv, &ev))?;
                files.push(path);
            }
            correlations = Some(corr);
        }
    }

    let report = Report { draws: table.samples.len(), fields, correlations, files: Vec::new() };
    let path = out.join("summary.txt");
    fs::write(&path, report.render())?;
    files.push(path);
    Ok(Report { files, ..report })
}
