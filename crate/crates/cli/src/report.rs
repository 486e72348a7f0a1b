//! Check records, suite reports and the four output formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use collarlab::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::error::CliError;

/// How a check decides pass/fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Rule {
    /// `rel_err ≤ tolerance`.
    Relative { tolerance: f64 },
    /// `measured ≥ target − margin` (exponent lower bounds).
    AtLeast { margin: f64 },
    /// `lo ≤ measured ≤ hi`, with `rel_err` the distance outside the band.
    Band { lo: f64, hi: f64 },
    /// Never affects the suite status.
    ReportOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub check_id: String,
    pub u: Option<f64>,
    pub t_abs: Option<f64>,
    pub measured: Complex64,
    pub target: Complex64,
    pub rel_err: f64,
    pub pass: bool,
    pub rule: Rule,
}

impl CheckRecord {
    pub fn new(suite: &str, check_id: &str, u: Option<f64>, measured: Complex64, target: Complex64, rule: Rule) -> Self {
        let rel_err = match rule {
            Rule::Band { lo, hi } => {
                let m = measured.re;
                if m < lo {
                    (lo - m) / lo.abs().max(f64::MIN_POSITIVE)
                } else if m > hi {
                    (m - hi) / hi.abs().max(f64::MIN_POSITIVE)
                } else {
                    0.0
                }
            }
            Rule::AtLeast { .. } => (measured - target).norm(),
            _ => {
                let scale = target.norm();
                if scale == 0.0 {
                    measured.norm()
                } else {
                    (measured - target).norm() / scale
                }
            }
        };
        let pass = match rule {
            Rule::Relative { tolerance } => rel_err <= tolerance,
            Rule::AtLeast { margin } => measured.re >= target.re - margin,
            Rule::Band { lo, hi } => measured.re >= lo && measured.re <= hi,
            Rule::ReportOnly => true,
        } && measured.re.is_finite()
            && measured.im.is_finite();
        let t_abs = u.map(|u| (-std::f64::consts::PI / u).exp());
        Self { suite: suite.into(), check_id: check_id.into(), u, t_abs, measured, target, rel_err: if rel_err.is_finite() { rel_err } else { f64::MAX }, pass, rule }
    }

    pub fn real(suite: &str, check_id: &str, u: Option<f64>, measured: f64, target: f64, rule: Rule) -> Self {
        Self::new(suite, check_id, u, Complex64::new(measured, 0.0), Complex64::new(target, 0.0), rule)
    }

    pub fn counts(&self) -> bool {
        !matches!(self.rule, Rule::ReportOnly)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub records: Vec<CheckRecord>,
    pub pass: bool,
    /// Core errors that aborted part of the suite; any entry fails it.
    #[serde(default)]
    pub errors: Vec<String>,
    /// Seconds; kept out of JSON so outputs are reproducible.
    #[serde(skip)]
    pub wall_clock: f64,
}

impl SuiteReport {
    pub fn new(suite: &str, records: Vec<CheckRecord>, errors: Vec<String>, wall_clock: f64) -> Self {
        let pass = errors.is_empty() && records.iter().filter(|r| r.counts()).all(|r| r.pass);
        Self { suite: suite.into(), records, pass, errors, wall_clock }
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.counts() && !r.pass)
    }

    pub fn find(&self, check_id: &str) -> impl Iterator<Item = &CheckRecord> {
        let id = check_id.to_string();
        self.records.iter().filter(move |r| r.check_id == id)
    }
}

pub const CSV_HEADER: [&str; 10] = ["suite", "check_id", "u", "t_abs", "measured_re", "measured_im", "target_re", "target_im", "rel_err", "pass"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn to_csv(reports: &[SuiteReport]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in reports.iter().flat_map(|s| &s.records) {
        w.write_record([
            r.suite.clone(),
            r.check_id.clone(),
            opt(r.u),
            opt(r.t_abs),
            format!("{:e}", r.measured.re),
            format!("{:e}", r.measured.im),
            format!("{:e}", r.target.re),
            format!("{:e}", r.target.im),
            format!("{:e}", r.rel_err),
            r.pass.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output { path: "csv buffer".into(), source: e.into_error() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json(reports: &[SuiteReport]) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(reports)?)
}

pub fn from_json(text: &str) -> Result<Vec<SuiteReport>, CliError> {
    Ok(serde_json::from_str(text)?)
}

pub fn to_markdown(reports: &[SuiteReport]) -> String {
    let mut out = String::from("# collarlab report\n\n| suite | checks | failing | status | seconds |\n|---|---|---|---|---|\n");
    for s in reports {
        let counted = s.records.iter().filter(|r| r.counts()).count();
        let failing = s.failing().count();
        let _ = writeln!(out, "| {} | {} | {} | {} | {:.2} |", s.suite, counted, failing, if s.pass { "pass" } else { "FAIL" }, s.wall_clock);
    }
    for s in reports.iter().filter(|s| !s.pass) {
        let _ = writeln!(out, "\n## {} failures\n", s.suite);
        for e in &s.errors {
            let _ = writeln!(out, "- error: {e}");
        }
        for r in s.failing() {
            let _ = writeln!(out, "- `{}` at u = {}: measured {:.6e}, target {:.6e}, rel_err {:.3e}", r.check_id, opt(r.u), r.measured.re, r.target.re, r.rel_err);
        }
    }
    out
}

fn file_stem(check_id: &str) -> String {
    check_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// One SVG per distinct check id: `log10 rel_err` against `log10 u`.
pub fn to_svg_lines(reports: &[SuiteReport]) -> BTreeMap<String, String> {
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in reports.iter().flat_map(|s| &s.records) {
        let pts = groups.entry(r.check_id.clone()).or_default();
        if let Some(u) = r.u {
            if r.rel_err > 0.0 && r.rel_err < f64::MAX {
                pts.push((u.log10(), r.rel_err.log10()));
            }
        }
    }
    groups.into_iter().map(|(id, mut pts)| {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        (id.clone(), svg_chart(&id, &pts))
    }).collect()
}

fn svg_chart(title: &str, pts: &[(f64, f64)]) -> String {
    let (w, h, pad) = (480.0, 320.0, 48.0);
    let mut out = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n");
    let _ = writeln!(out, "<text x=\"{pad}\" y=\"20\" font-family=\"monospace\" font-size=\"12\">{title}: log10 rel_err vs log10 u</text>");
    let _ = writeln!(out, "<rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>", w - 2.0 * pad, h - 2.0 * pad);
    if pts.is_empty() {
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">no data</text>", w / 2.0 - 24.0, h / 2.0);
    } else {
        let span = |f: fn(&(f64, f64)) -> f64| {
            let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) }
        };
        let (x0, x1) = span(|p| p.0);
        let (y0, y1) = span(|p| p.1);
        let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
        let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
        let line: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"{}\"/>", line.join(" "));
        for &(x, y) in pts {
            let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1f77b4\"/>", px(x), py(y));
        }
        let _ = writeln!(out, "<text x=\"{pad}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\">u: {:.3}..{:.3}  rel_err: {:.1e}..{:.1e}</text>", h - 16.0, 10f64.powf(x0), 10f64.powf(x1), 10f64.powf(y0), 10f64.powf(y1));
    }
    out.push_str("</svg>\n");
    out
}

/// Writes via a temporary file and a rename so readers never see partial output.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let err = |source| CliError::Output { path: path.display().to_string(), source };
    let tmp = path.with_extension("partial");
    let mut f = fs::File::create(&tmp).map_err(err)?;
    f.write_all(contents.as_bytes()).map_err(err)?;
    f.sync_all().map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

/// Writes `reports` in `format` under `dir`; returns the files written.
pub fn emit_report(reports: &[SuiteReport], format: Format, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.display().to_string(), source })?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), CliError> {
        let path = dir.join(name);
        write_atomic(&path, &body)?;
        written.push(path);
        Ok(())
    };
    match format {
        Format::Csv => put("report.csv".into(), to_csv(reports)?)?,
        Format::Json => put("report.json".into(), to_json(reports)?)?,
        Format::Markdown => put("report.md".into(), to_markdown(reports))?,
        Format::SvgLines => {
            for (id, svg) in to_svg_lines(reports) {
                put(format!("{}.svg", file_stem(&id)), svg)?;
            }
        }
    }
    Ok(written)
}
