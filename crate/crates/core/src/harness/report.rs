use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::analysis::{accuracy_vectors, ConfigKey};
use super::{
    baseline_comparisons, compare_to_baseline, dimension_sweep, utility_scores, BaselineComparison, BestReport,
    ExperimentPlan, HarnessError, ResultTable, SweepReport, UtilityProfile,
};
use crate::scalers::ScalerMethod;
use crate::stats::{mean, std_dev};
use crate::tensor::SliceScheme;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(HarnessError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    /// Best configuration against the baseline, per dataset.
    Best,
    /// Dimension sweep for one method, or for every method with all four dimensions.
    DimSweep(Option<ScalerMethod>),
    Utility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSection {
    pub plan: ExperimentPlan,
    pub best: BestReport,
    pub comparisons: Vec<BaselineComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "analysis", rename_all = "kebab-case")]
pub enum ReportBody {
    Best { datasets: Vec<BestSection> },
    DimSweep { sweeps: Vec<SweepReport> },
    Utility { profile: UtilityProfile },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    #[serde(flatten)]
    pub body: ReportBody,
}

impl Report {
    pub fn to_json(&self) -> Result<String, HarnessError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let report: Report = serde_json::from_str(text)?;
        if report.version != REPORT_VERSION {
            return Err(HarnessError::Version(report.version));
        }
        Ok(report)
    }
}

fn sweep_methods(table: &ResultTable) -> Vec<ScalerMethod> {
    let vectors = accuracy_vectors(table);
    table
        .plan
        .methods
        .iter()
        .copied()
        .filter(|&m| SliceScheme::ALL.iter().all(|&s| vectors.contains_key(&ConfigKey::new(m, s))))
        .collect()
}

/// Runs the analysis over every table.
pub fn build_report(tables: &[ResultTable], analysis: Analysis) -> Result<Report, HarnessError> {
    if tables.is_empty() {
        return Err(HarnessError::EmptyInput);
    }
    let body = match analysis {
        Analysis::Best => ReportBody::Best {
            datasets: tables
                .iter()
                .map(|t| {
                    Ok(BestSection { plan: t.plan.clone(), best: compare_to_baseline(t)?, comparisons: baseline_comparisons(t)? })
                })
                .collect::<Result<_, HarnessError>>()?,
        },
        Analysis::DimSweep(fixed) => {
            let mut sweeps = Vec::new();
            for t in tables {
                let methods = match fixed {
                    Some(m) => vec![m],
                    None => sweep_methods(t),
                };
                for m in methods {
                    sweeps.push(dimension_sweep(t, m)?);
                }
            }
            ReportBody::DimSweep { sweeps }
        }
        Analysis::Utility => ReportBody::Utility { profile: utility_scores(tables)? },
    };
    Ok(Report { version: REPORT_VERSION, body })
}

/// Renders an analysis of the tables. Output is byte-deterministic.
pub fn emit_report(tables: &[ResultTable], analysis: Analysis, format: ReportFormat) -> Result<String, HarnessError> {
    let report = build_report(tables, analysis)?;
    match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => render_csv(tables, &report),
        ReportFormat::Markdown => Ok(render_markdown(&report)),
    }
}

fn pct(accuracy: f64) -> String {
    format!("{:.2}", 100.0 * accuracy)
}

fn render_csv(tables: &[ResultTable], report: &Report) -> Result<String, HarnessError> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| HarnessError::Csv(e.to_string());
    match &report.body {
        ReportBody::Best { datasets } => {
            out.write_record(["dataset", "method", "scheme", "mean", "std", "p_value", "p_holm", "diff_pp"]).map_err(io)?;
            for (table, section) in tables.iter().zip(datasets) {
                let vectors = accuracy_vectors(table);
                if let Some(base) = vectors.get(&ConfigKey::baseline()) {
                    let row = [&table.dataset.name, "none", "", &mean(base).to_string(), &std_dev(base).to_string(), "", "", ""];
                    out.write_record(row).map_err(io)?;
                }
                for c in &section.comparisons {
                    let scheme = c.config.scheme.map_or(String::new(), |s| s.to_string());
                    out.write_record([
                        table.dataset.name.as_str(),
                        c.config.method.tag(),
                        &scheme,
                        &c.mean.to_string(),
                        &c.std.to_string(),
                        &c.p_value.to_string(),
                        &c.p_holm.to_string(),
                        &c.diff_pp.to_string(),
                    ])
                    .map_err(io)?;
                }
            }
        }
        ReportBody::DimSweep { sweeps } => {
            out.write_record(["dataset", "method", "scheme_a", "scheme_b", "statistic", "p_value", "p_holm", "significant"])
                .map_err(io)?;
            for s in sweeps {
                for p in &s.pairs {
                    out.write_record([
                        s.dataset.as_str(),
                        s.method.tag(),
                        p.a.tag(),
                        p.b.tag(),
                        &p.statistic.to_string(),
                        &p.p_value.to_string(),
                        &p.p_holm.to_string(),
                        &p.significant.to_string(),
                    ])
                    .map_err(io)?;
                }
            }
        }
        ReportBody::Utility { profile } => {
            out.write_record(["dataset", "facet", "name", "score"]).map_err(io)?;
            let sections = profile
                .datasets
                .iter()
                .map(|d| (d.dataset.as_str(), &d.dimension_scores, &d.method_scores))
                .chain(std::iter::once(("total", &profile.dimension_scores, &profile.method_scores)));
            for (name, dims, methods) in sections {
                for (k, v) in dims {
                    out.write_record([name, "dimension", k.tag(), &v.to_string()]).map_err(io)?;
                }
                for (k, v) in methods {
                    out.write_record([name, "method", k.tag(), &v.to_string()]).map_err(io)?;
                }
            }
        }
    }
    let bytes = out.into_inner().map_err(|e| HarnessError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn score_table<K: Ord + Copy + ToString>(
    out: &mut String,
    title: &str,
    rows: &[(&str, &BTreeMap<K, f64>)],
) {
    let mut keys: Vec<K> = rows.iter().flat_map(|(_, m)| m.keys().copied()).collect();
    keys.sort();
    keys.dedup();
    let _ = write!(out, "| {title} |");
    for k in &keys {
        let _ = write!(out, " {} |", k.to_string());
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(keys.len()));
    out.push('\n');
    for (name, scores) in rows {
        let _ = write!(out, "| {name} |");
        for k in &keys {
            let _ = write!(out, " {:.4} |", scores.get(k).copied().unwrap_or(0.0));
        }
        out.push('\n');
    }
}

fn render_markdown(report: &Report) -> String {
    let mut out = String::new();
    match &report.body {
        ReportBody::Best { datasets } => {
            out.push_str("| Dataset | Resamples | Mode | Baseline | Best configuration | Best | Difference |\n");
            out.push_str("|---|---|---|---|---|---|---|\n");
            for s in datasets {
                let b = &s.best;
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} ± {} | {} | {} ± {} | {} |",
                    b.dataset,
                    s.plan.resamples,
                    b.resample_mode,
                    pct(b.baseline_mean),
                    pct(b.baseline_std),
                    b.top,
                    pct(b.top_mean),
                    pct(b.top_std),
                    b.diff_label()
                );
            }
        }
        ReportBody::DimSweep { sweeps } => {
            out.push_str("| Dataset | Method |");
            for s in SliceScheme::ALL {
                let _ = write!(out, " {s} |");
            }
            out.push_str(" Best | Worst | Difference |\n|---|---|");
            out.push_str(&"---|".repeat(SliceScheme::ALL.len() + 3));
            out.push('\n');
            for s in sweeps {
                let _ = write!(out, "| {} | {} |", s.dataset, s.method);
                for (_, m) in &s.means {
                    let _ = write!(out, " {} |", pct(*m));
                }
                let name = |x: Option<SliceScheme>| x.map_or("-".to_string(), |v| v.to_string());
                let _ = writeln!(out, " {} | {} | {} |", name(s.best), name(s.worst), s.diff_label());
            }
            for s in sweeps {
                let _ = writeln!(out, "\n{} / {}: pairwise Holm-adjusted p-values\n", s.dataset, s.method);
                out.push_str("| Pair | W | p | p (Holm) |\n|---|---|---|---|\n");
                for p in &s.pairs {
                    let mark = if p.significant { " *" } else { "" };
                    let _ = writeln!(out, "| {} vs {} | {} | {:.4} | {:.4}{} |", p.a, p.b, p.statistic, p.p_value, p.p_holm, mark);
                }
            }
        }
        ReportBody::Utility { profile } => {
            let mut dims: Vec<(&str, &BTreeMap<SliceScheme, f64>)> =
                profile.datasets.iter().map(|d| (d.dataset.as_str(), &d.dimension_scores)).collect();
            dims.push(("total", &profile.dimension_scores));
            score_table(&mut out, "Dimension utility", &dims);
            out.push('\n');
            let mut methods: Vec<(&str, &BTreeMap<ScalerMethod, f64>)> =
                profile.datasets.iter().map(|d| (d.dataset.as_str(), &d.method_scores)).collect();
            methods.push(("total", &profile.method_scores));
            score_table(&mut out, "Method utility", &methods);
            out.push_str("\n| Dataset | Top group |\n|---|---|\n");
            for d in &profile.datasets {
                let names: Vec<String> = d.group.iter().map(|k| k.to_string()).collect();
                let _ = writeln!(out, "| {} | {} |", d.dataset, names.join(", "));
            }
        }
    }
    out
}
