use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{HarnessError, ResampleMode, ResultTable};
use crate::scalers::ScalerMethod;
use crate::stats::{holm_adjust, mean, rank_configs, std_dev, wilcoxon, ConfigSummary, ALPHA};
use crate::tensor::SliceScheme;

/// Width of the utility top group below the best mean accuracy: one percentage point.
pub const TOP_GROUP_WIDTH: f64 = 0.01;
const GROUP_EPS: f64 = 1e-12;

/// A (method, scheme) configuration. The baseline has no scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfigKey {
    pub method: ScalerMethod,
    pub scheme: Option<SliceScheme>,
}

impl ConfigKey {
    pub fn baseline() -> Self {
        ConfigKey { method: ScalerMethod::None, scheme: None }
    }

    pub fn new(method: ScalerMethod, scheme: SliceScheme) -> Self {
        ConfigKey { method, scheme: Some(scheme) }
    }

    pub fn is_baseline(&self) -> bool {
        self.method == ScalerMethod::None
    }
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scheme {
            Some(s) => write!(f, "{}_{}", self.method, s),
            None => write!(f, "{}", self.method),
        }
    }
}

impl FromStr for ConfigKey {
    type Err = String;

    /// `method_scheme`, e.g. `minmax_both`, or `none`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.rsplit_once('_') {
            Some((m, d)) => Ok(ConfigKey::new(m.parse()?, d.parse()?)),
            None => {
                let method: ScalerMethod = s.parse()?;
                if method == ScalerMethod::None {
                    Ok(ConfigKey::baseline())
                } else {
                    Err(format!("configuration `{s}` needs a dimension"))
                }
            }
        }
    }
}

/// Accuracy vectors per configuration, ordered by resample index.
pub(crate) fn accuracy_vectors(table: &ResultTable) -> BTreeMap<ConfigKey, Vec<f64>> {
    let mut grouped: BTreeMap<ConfigKey, Vec<(usize, f64)>> = BTreeMap::new();
    for r in &table.records {
        grouped.entry(r.config()).or_default().push((r.resample, r.accuracy));
    }
    grouped
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by_key(|&(i, _)| i);
            (k, v.into_iter().map(|(_, a)| a).collect())
        })
        .collect()
}

fn baseline_vector(vectors: &BTreeMap<ConfigKey, Vec<f64>>) -> Result<&Vec<f64>, HarnessError> {
    vectors.get(&ConfigKey::baseline()).ok_or(HarnessError::MissingBaseline)
}

fn summaries(vectors: &BTreeMap<ConfigKey, Vec<f64>>) -> Vec<ConfigSummary<ConfigKey>> {
    vectors
        .iter()
        .filter(|(k, _)| !k.is_baseline())
        .map(|(k, v)| ConfigSummary { config: *k, mean: mean(v), std: std_dev(v) })
        .collect()
}

fn paired_len(a: &[f64], b: &[f64], label: &ConfigKey) -> Result<(), HarnessError> {
    if a.len() != b.len() {
        return Err(HarnessError::MissingConfig(format!("{label}: resample counts differ from the baseline")));
    }
    if a.len() < 2 {
        return Err(HarnessError::TooFewResamples(a.len()));
    }
    Ok(())
}

fn to_pp(accuracy_gap: f64) -> f64 {
    100.0 * accuracy_gap
}

/// Best configuration against the unscaled baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestReport {
    pub dataset: String,
    pub resample_mode: ResampleMode,
    pub top: ConfigKey,
    pub top_mean: f64,
    pub top_std: f64,
    pub baseline_mean: f64,
    pub baseline_std: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub significant: bool,
    /// Mean difference in percentage points, only when significant.
    pub diff_pp: Option<f64>,
}

impl BestReport {
    /// `+26.67` style difference, or `(-)` when not significant.
    pub fn diff_label(&self) -> String {
        match self.diff_pp {
            Some(d) => format!("{d:+.2}"),
            None => "(-)".to_string(),
        }
    }
}

pub fn compare_to_baseline(table: &ResultTable) -> Result<BestReport, HarnessError> {
    let vectors = accuracy_vectors(table);
    let baseline = baseline_vector(&vectors)?;
    let ranked = rank_configs(&summaries(&vectors));
    let top = ranked.first().ok_or_else(|| HarnessError::MissingConfig("any scaled configuration".into()))?;
    let top_acc = &vectors[&top.config];
    paired_len(top_acc, baseline, &top.config)?;
    let test = wilcoxon(top_acc, baseline)?;
    let significant = test.p_value < ALPHA;
    let baseline_mean = mean(baseline);
    Ok(BestReport {
        dataset: table.dataset.name.clone(),
        resample_mode: table.plan.resample_mode,
        top: top.config,
        top_mean: top.mean,
        top_std: top.std,
        baseline_mean,
        baseline_std: std_dev(baseline),
        statistic: test.statistic,
        p_value: test.p_value,
        significant,
        diff_pp: significant.then(|| to_pp(top.mean - baseline_mean)),
    })
}

/// One scaled configuration tested against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub config: ConfigKey,
    pub mean: f64,
    pub std: f64,
    pub diff_pp: f64,
    pub p_value: f64,
    /// Holm-adjusted over every configuration in the table.
    pub p_holm: f64,
    pub significant: bool,
}

/// Every scaled configuration against the baseline, Holm-corrected as one family.
pub fn baseline_comparisons(table: &ResultTable) -> Result<Vec<BaselineComparison>, HarnessError> {
    let vectors = accuracy_vectors(table);
    let baseline = baseline_vector(&vectors)?;
    let base_mean = mean(baseline);
    let mut rows = Vec::new();
    let mut p_values = Vec::new();
    for s in summaries(&vectors) {
        let acc = &vectors[&s.config];
        paired_len(acc, baseline, &s.config)?;
        let p = wilcoxon(acc, baseline)?.p_value;
        p_values.push(p);
        rows.push(BaselineComparison {
            config: s.config,
            mean: s.mean,
            std: s.std,
            diff_pp: to_pp(s.mean - base_mean),
            p_value: p,
            p_holm: p,
            significant: false,
        });
    }
    for (row, adj) in rows.iter_mut().zip(holm_adjust(&p_values)?) {
        row.p_holm = adj;
        row.significant = adj < ALPHA;
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub a: SliceScheme,
    pub b: SliceScheme,
    pub statistic: f64,
    pub p_value: f64,
    pub p_holm: f64,
    pub significant: bool,
}

/// Dimensions compared for one fixed scaling method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub dataset: String,
    pub method: ScalerMethod,
    /// Mean accuracy per scheme, canonical scheme order.
    pub means: Vec<(SliceScheme, f64)>,
    pub pairs: Vec<PairTest>,
    pub best: Option<SliceScheme>,
    pub worst: Option<SliceScheme>,
    /// Best minus worst mean in percentage points, over dimensions in a significant pair.
    pub diff_pp: Option<f64>,
}

impl SweepReport {
    pub fn diff_label(&self) -> String {
        match self.diff_pp {
            Some(d) => format!("{d:.2}"),
            None => "-".to_string(),
        }
    }
}

pub fn dimension_sweep(table: &ResultTable, method: ScalerMethod) -> Result<SweepReport, HarnessError> {
    let vectors = accuracy_vectors(table);
    let mut per_scheme = Vec::with_capacity(SliceScheme::ALL.len());
    for scheme in SliceScheme::ALL {
        let key = ConfigKey::new(method, scheme);
        let v = vectors.get(&key).ok_or_else(|| HarnessError::MissingConfig(key.to_string()))?;
        per_scheme.push((scheme, v));
    }
    let mut pairs = Vec::new();
    for i in 0..per_scheme.len() {
        for j in i + 1..per_scheme.len() {
            let (a, va) = per_scheme[i];
            let (b, vb) = per_scheme[j];
            paired_len(va, vb, &ConfigKey::new(method, b))?;
            let t = wilcoxon(va, vb)?;
            pairs.push(PairTest { a, b, statistic: t.statistic, p_value: t.p_value, p_holm: t.p_value, significant: false });
        }
    }
    let adjusted = holm_adjust(&pairs.iter().map(|p| p.p_value).collect::<Vec<_>>())?;
    for (pair, adj) in pairs.iter_mut().zip(adjusted) {
        pair.p_holm = adj;
        pair.significant = adj < ALPHA;
    }

    let means: Vec<(SliceScheme, f64)> = per_scheme.iter().map(|(s, v)| (*s, mean(v))).collect();
    let involved: Vec<(SliceScheme, f64)> = means
        .iter()
        .filter(|(s, _)| pairs.iter().any(|p| p.significant && (p.a == *s || p.b == *s)))
        .copied()
        .collect();
    let best = involved.iter().copied().reduce(|x, y| if y.1 > x.1 { y } else { x });
    let worst = involved.iter().copied().reduce(|x, y| if y.1 < x.1 { y } else { x });
    let diff_pp = best.zip(worst).map(|(b, w)| to_pp(b.1 - w.1));
    Ok(SweepReport {
        dataset: table.dataset.name.clone(),
        method,
        means,
        pairs,
        best: best.map(|b| b.0),
        worst: worst.map(|w| w.0),
        diff_pp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetUtility {
    pub dataset: String,
    /// Scaled configurations within one point of the best mean accuracy.
    pub group: Vec<ConfigKey>,
    pub dimension_scores: BTreeMap<SliceScheme, f64>,
    pub method_scores: BTreeMap<ScalerMethod, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityProfile {
    pub datasets: Vec<DatasetUtility>,
    /// Per-dataset scores summed over datasets.
    pub dimension_scores: BTreeMap<SliceScheme, f64>,
    pub method_scores: BTreeMap<ScalerMethod, f64>,
}

/// Occurrences of each dimension and method in the group, divided by the
/// group size.
pub fn group_scores(group: &[ConfigKey]) -> (BTreeMap<SliceScheme, f64>, BTreeMap<ScalerMethod, f64>) {
    let mut dims: BTreeMap<SliceScheme, usize> = BTreeMap::new();
    let mut methods: BTreeMap<ScalerMethod, usize> = BTreeMap::new();
    for key in group {
        if let Some(s) = key.scheme {
            *dims.entry(s).or_default() += 1;
        }
        *methods.entry(key.method).or_default() += 1;
    }
    let size = group.len() as f64;
    (
        dims.into_iter().map(|(k, n)| (k, n as f64 / size)).collect(),
        methods.into_iter().map(|(k, n)| (k, n as f64 / size)).collect(),
    )
}

fn dataset_utility(table: &ResultTable) -> Result<DatasetUtility, HarnessError> {
    let ranked = rank_configs(&summaries(&accuracy_vectors(table)));
    let top = ranked.first().ok_or_else(|| HarnessError::MissingConfig("any scaled configuration".into()))?.mean;
    let group: Vec<ConfigKey> = ranked
        .iter()
        .filter(|s| s.mean >= top - TOP_GROUP_WIDTH - GROUP_EPS)
        .map(|s| s.config)
        .collect();
    let (mut dimension_scores, mut method_scores) = group_scores(&group);
    for &s in &table.plan.schemes {
        dimension_scores.entry(s).or_insert(0.0);
    }
    for &m in &table.plan.methods {
        method_scores.entry(m).or_insert(0.0);
    }
    Ok(DatasetUtility { dataset: table.dataset.name.clone(), group, dimension_scores, method_scores })
}

pub fn utility_scores(tables: &[ResultTable]) -> Result<UtilityProfile, HarnessError> {
    if tables.is_empty() {
        return Err(HarnessError::EmptyInput);
    }
    let datasets = tables.iter().map(dataset_utility).collect::<Result<Vec<_>, _>>()?;
    let mut dimension_scores = BTreeMap::new();
    let mut method_scores = BTreeMap::new();
    for d in &datasets {
        for (k, v) in &d.dimension_scores {
            *dimension_scores.entry(*k).or_insert(0.0) += v;
        }
        for (k, v) in &d.method_scores {
            *method_scores.entry(*k).or_insert(0.0) += v;
        }
    }
    Ok(UtilityProfile { datasets, dimension_scores, method_scores })
}
