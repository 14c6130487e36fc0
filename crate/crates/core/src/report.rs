//! Report structure and rendering.
//!
//! A [`SummaryReport`] holds every computed paragraph; hidden paragraphs
//! stay in the structure (and in JSON, marked) but are skipped by the
//! text renderer. Text output rounds to significant digits; JSON keeps
//! full precision and per-fold detail. Both renderers are pure functions
//! of the report, so identical reports give identical bytes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::importance::ImportanceTable;
use crate::residuals::FiveNum;

/// Minimum text report width.
pub const MIN_WIDTH: usize = 40;
/// Default text report width.
pub const DEFAULT_WIDTH: usize = 100;

/// A paragraph plus its visibility; hidden sections are omitted from
/// text but serialized in JSON for machine consumers.
#[derive(Clone, Debug, Serialize)]
pub struct Section<T> {
    pub hidden: bool,
    pub body: T,
}

impl<T> Section<T> {
    pub fn new(hidden: bool, body: T) -> Section<T> {
        Section { hidden, body }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NameValue {
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralParagraph {
    pub target: String,
    pub task_type: String,
    pub positive_class: Option<String>,
    pub n: usize,
    pub p: usize,
    pub numeric_features: usize,
    pub categorical_features: usize,
    pub learner: String,
    /// Hyperparameters that differ from their defaults.
    pub hyperparameters: Vec<NameValue>,
    pub resampling: String,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfusionJson {
    pub levels: Vec<String>,
    /// Rows are true classes, columns predicted ones.
    pub counts: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualsParagraph {
    /// `response`, `probability`, or `confusion`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantiles: Option<FiveNum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerformanceEntry {
    pub id: String,
    pub mode: String,
    pub direction: String,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub per_fold: Vec<Option<f64>>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerformanceParagraph {
    pub entries: Vec<PerformanceEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AggregateEntry {
    pub mean: f64,
    pub sd: f64,
    pub per_fold: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexityParagraph {
    pub measures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<AggregateEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction_strength: Option<AggregateEntry>,
    pub single_fold: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FairnessEntry {
    pub id: String,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub per_fold: Vec<Option<f64>>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FairnessParagraph {
    pub protected_attribute: String,
    pub groups: Vec<String>,
    pub entries: Vec<FairnessEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ImportanceParagraph {
    pub table: ImportanceTable,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridJson {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoldCurve {
    pub fold: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EffectEntry {
    pub feature: String,
    pub method: String,
    pub class: String,
    pub grid: GridJson,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub per_fold: Vec<FoldCurve>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EffectsParagraph {
    pub methods: Vec<String>,
    pub classes: Vec<String>,
    /// Entries for the displayed features only, in importance order.
    pub entries: Vec<EffectEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SummaryReport {
    pub general: GeneralParagraph,
    pub residuals: Section<ResidualsParagraph>,
    pub performance: Section<PerformanceParagraph>,
    pub complexity: Section<ComplexityParagraph>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fairness: Option<Section<FairnessParagraph>>,
    pub importance: Section<ImportanceParagraph>,
    pub effects: Section<EffectsParagraph>,
    /// Significant digits used by the text renderer.
    pub digits: usize,
}

/// Format a value to `digits` significant digits, R-style: round, print
/// plainly, drop trailing fractional zeros.
pub fn signif(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "NaN".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    // Decimal exponent from the exact shortest representation.
    let sci = format!("{v:e}");
    let exp: i32 = sci[sci.find('e').expect("exponent marker") + 1..]
        .parse()
        .expect("decimal exponent");
    if !(-10..=15).contains(&exp) {
        return format!("{:.*e}", digits.saturating_sub(1), v);
    }
    let decimals = digits as i32 - 1 - exp;
    if decimals >= 0 {
        let text = format!("{:.*}", decimals as usize, v);
        trim_fraction(text)
    } else {
        let scale = 10f64.powi(-decimals);
        format!("{:.0}", (v / scale).round() * scale)
    }
}

fn trim_fraction(text: String) -> String {
    if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    }
}

/// `mean [sd]` with missing values shown as NA and missing sd omitted.
fn mean_sd(mean: Option<f64>, sd: Option<f64>, digits: usize) -> String {
    match (mean, sd) {
        (None, _) => "NA".to_string(),
        (Some(m), None) => signif(m, digits),
        (Some(m), Some(s)) => format!("{} [{}]", signif(m, digits), signif(s, digits)),
    }
}

const STRIP_GLYPHS: [char; 8] = ['\u{2581}', '\u{2582}', '\u{2583}', '\u{2584}', '\u{2585}', '\u{2586}', '\u{2587}', '\u{2588}'];

/// Eight-level glyph strip of a numeric curve, quantized over its own
/// range; flat or degenerate curves show the middle glyph.
pub fn glyph_strip(values: &[f64]) -> String {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = finite.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    values
        .iter()
        .map(|&v| {
            if !v.is_finite() || hi <= lo {
                STRIP_GLYPHS[3]
            } else {
                let idx = (((v - lo) / (hi - lo)) * 8.0).floor() as usize;
                STRIP_GLYPHS[idx.min(7)]
            }
        })
        .collect()
}

/// Signed bars for categorical effects: per level, `+` or `-` repeated
/// round(4 |v| / max|v|) times; near-zero levels show a dot.
pub fn signed_bars(values: &[f64]) -> String {
    let maxabs = values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    values
        .iter()
        .map(|&v| {
            if maxabs == 0.0 || !v.is_finite() {
                return "\u{b7}".to_string();
            }
            let k = ((4.0 * v.abs() / maxabs).round()) as usize;
            if k == 0 {
                "\u{b7}".to_string()
            } else if v > 0.0 {
                "+".repeat(k)
            } else {
                "-".repeat(k)
            }
        })
        .collect::<Vec<String>>()
        .join(" ")
}

fn heading(out: &mut String, name: &str, width: usize) {
    let fill = width.saturating_sub(name.len() + 4);
    out.push_str(&format!("== {name} {}\n", "=".repeat(fill)));
}

fn note_lines(out: &mut String, notes: &[String]) {
    for n in notes {
        out.push_str(&format!("    note: {n}\n"));
    }
}

/// Render the report as aligned text. Width must be at least
/// [`MIN_WIDTH`]; pass [`DEFAULT_WIDTH`] for the standard layout.
pub fn render_text(report: &SummaryReport, width: usize) -> Result<String> {
    if width < MIN_WIDTH {
        return Err(Error::WidthTooSmall(width));
    }
    let digits = report.digits;
    let mut out = String::new();

    heading(&mut out, "general", width);
    let g = &report.general;
    let task_desc = match &g.positive_class {
        Some(pos) => format!("{} ({}, positive class {})", g.target, g.task_type, pos),
        None => format!("{} ({})", g.target, g.task_type),
    };
    out.push_str(&format!("  target:       {task_desc}\n"));
    out.push_str(&format!("  observations: {}\n", g.n));
    out.push_str(&format!(
        "  features:     {} ({} numeric, {} categorical)\n",
        g.p, g.numeric_features, g.categorical_features
    ));
    let params = if g.hyperparameters.is_empty() {
        String::new()
    } else {
        let inner: Vec<String> = g
            .hyperparameters
            .iter()
            .map(|nv| format!("{}={}", nv.name, nv.value))
            .collect();
        format!(" ({})", inner.join(", "))
    };
    out.push_str(&format!("  learner:      {}{params}\n", g.learner));
    out.push_str(&format!(
        "  resampling:   {} ({} iterations, seed {})\n",
        g.resampling, g.iterations, g.seed
    ));

    if !report.residuals.hidden {
        out.push('\n');
        heading(&mut out, "residuals", width);
        let r = &report.residuals.body;
        out.push_str(&format!("  kind: {}\n", r.kind));
        if let Some(q) = &r.quantiles {
            let cells = [
                ("min", q.min),
                ("q25", q.q25),
                ("median", q.median),
                ("q75", q.q75),
                ("max", q.max),
            ];
            let mut head = String::from(" ");
            let mut vals = String::from(" ");
            for (name, value) in cells {
                let text = signif(value, digits);
                let w = name.len().max(text.len()) + 2;
                head.push_str(&format!(" {name:>w$}"));
                vals.push_str(&format!(" {text:>w$}"));
            }
            out.push_str(&head);
            out.push('\n');
            out.push_str(&vals);
            out.push('\n');
        }
        if let Some(c) = &r.confusion {
            out.push_str("  confusion matrix (rows: truth, columns: predicted)\n");
            let label_w = c.levels.iter().map(|l| l.len()).max().unwrap_or(0);
            let cell_w = c
                .counts
                .iter()
                .flatten()
                .map(|v| v.to_string().len())
                .chain(c.levels.iter().map(|l| l.len()))
                .max()
                .unwrap_or(1);
            let mut head = format!("  {:label_w$}", "");
            for l in &c.levels {
                head.push_str(&format!("  {l:>cell_w$}"));
            }
            out.push_str(&head);
            out.push('\n');
            for (i, l) in c.levels.iter().enumerate() {
                let mut line = format!("  {l:<label_w$}");
                for v in &c.counts[i] {
                    line.push_str(&format!("  {v:>cell_w$}"));
                }
                out.push_str(&line);
                out.push('\n');
            }
        }
    }

    if !report.performance.hidden {
        out.push('\n');
        heading(&mut out, "performance", width);
        for e in &report.performance.body.entries {
            let arrow = if e.direction == "minimize" { "\u{2193}" } else { "\u{2191}" };
            out.push_str(&format!(
                "  {} ({}) {arrow}  {}\n",
                e.id,
                e.mode,
                mean_sd(e.mean, e.sd, digits)
            ));
            note_lines(&mut out, &e.notes);
        }
    }

    if !report.complexity.hidden {
        out.push('\n');
        heading(&mut out, "complexity", width);
        let c = &report.complexity.body;
        let label_w = c.measures.iter().map(|m| m.len()).max().unwrap_or(8);
        if let Some(s) = &c.sparsity {
            out.push_str(&format!(
                "  {:<label_w$}  {}\n",
                "sparsity",
                mean_sd(Some(s.mean), Some(s.sd), digits)
            ));
        }
        if let Some(s) = &c.interaction_strength {
            out.push_str(&format!(
                "  {:<label_w$}  {}\n",
                "interaction_strength",
                mean_sd(Some(s.mean), Some(s.sd), digits)
            ));
        }
        if c.single_fold {
            out.push_str("    note: single resampling iteration; sd is 0 by convention\n");
        }
        note_lines(&mut out, &c.warnings);
    }

    if let Some(section) = &report.fairness {
        if !section.hidden {
            out.push('\n');
            heading(&mut out, "fairness", width);
            let f = &section.body;
            out.push_str(&format!(
                "  protected: {} (groups: {})\n",
                f.protected_attribute,
                f.groups.join(", ")
            ));
            let label_w = f.entries.iter().map(|e| e.id.len()).max().unwrap_or(2);
            for e in &f.entries {
                out.push_str(&format!(
                    "  {:<label_w$} \u{2193}  {}\n",
                    e.id,
                    mean_sd(e.mean, e.sd, digits)
                ));
                note_lines(&mut out, &e.notes);
            }
        }
    }

    if !report.importance.hidden {
        out.push('\n');
        heading(&mut out, "importance", width);
        let t = &report.importance.body.table;
        let mut cells: Vec<Vec<String>> = Vec::new();
        for row in &t.rows {
            let mut line = vec![row.feature.clone()];
            for cell in &row.cells {
                line.push(mean_sd(Some(cell.mean), cell.sd, digits));
            }
            cells.push(line);
        }
        let mut widths: Vec<usize> = Vec::new();
        let header: Vec<String> = std::iter::once("feature".to_string())
            .chain(t.measures.iter().cloned())
            .collect();
        for (i, h) in header.iter().enumerate() {
            let w = cells
                .iter()
                .map(|row| row[i].len())
                .chain(std::iter::once(h.len()))
                .max()
                .unwrap_or(0);
            widths.push(w);
        }
        let mut head = String::from(" ");
        for (h, w) in header.iter().zip(&widths) {
            head.push_str(&format!(" {h:<w$}"));
        }
        out.push_str(head.trim_end());
        out.push('\n');
        for row in &cells {
            let mut line = String::from(" ");
            for (v, w) in row.iter().zip(&widths) {
                line.push_str(&format!(" {v:<w$}"));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        if t.omitted > 0 {
            out.push_str(&format!("  ({} features omitted)\n", t.omitted));
        }
    }

    if !report.effects.hidden {
        out.push('\n');
        heading(&mut out, "effects", width);
        let e = &report.effects.body;
        out.push_str(&format!(
            "  methods: {}; classes: {}\n",
            e.methods.join(", "),
            e.classes.join(", ")
        ));
        // One line per feature and class with one strip per method,
        // strips right-aligned as a block.
        let mut lines: Vec<(String, String)> = Vec::new();
        let mut seen: Vec<(String, String)> = Vec::new();
        for entry in &e.entries {
            let key = (entry.feature.clone(), entry.class.clone());
            if !seen.contains(&key) {
                seen.push(key);
            }
        }
        for (feature, class) in &seen {
            let label = if e.classes.len() > 1 {
                format!("{feature}[{class}]")
            } else {
                feature.clone()
            };
            let mut parts = Vec::new();
            for method in &e.methods {
                if let Some(entry) = e
                    .entries
                    .iter()
                    .find(|x| &x.feature == feature && &x.class == class && &x.method == method)
                {
                    let strip = if entry.grid.kind == "levels" {
                        signed_bars(&entry.mean)
                    } else {
                        glyph_strip(&entry.mean)
                    };
                    parts.push(format!("{method} {strip}"));
                }
            }
            lines.push((label, parts.join("  ")));
        }
        let label_w = lines.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
        for (label, block) in &lines {
            let used = 2 + label_w + block.chars().count();
            let pad = width.saturating_sub(used).max(2);
            out.push_str(&format!(
                "  {label:<label_w$}{}{block}\n",
                " ".repeat(pad)
            ));
        }
        let mut notes: Vec<String> = Vec::new();
        for entry in &e.entries {
            for n in &entry.notes {
                let text = format!("{} {} [{}]: {n}", entry.feature, entry.method, entry.class);
                if !notes.contains(&text) {
                    notes.push(text);
                }
            }
        }
        note_lines(&mut out, &notes);
    }

    Ok(out)
}

/// Canonical JSON: fixed key order from the struct definitions, full
/// float precision, two-space indentation.
pub fn render_json(report: &SummaryReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}
