//! Human- and machine-readable outputs: the per-strategy summary table,
//! critical-difference diagrams, box-plot quartiles and CSV exports.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comparison::{
    self, all_pairs, friedman_test, Alternative, ComparisonError, Correction, PairwiseMatrix,
    PairwiseTest,
};
use crate::datastore::{Collection, DataError, Dataset, PredictionRecord, SplitSpec};
use crate::estimation::{self, EstimationError, Scenario};
use crate::matrix::Matrix;
use crate::metrics::{
    self, LossKind, LossTensor, MetricError, PairKey, PointwiseLoss,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no prediction records found; run the benchmark first")]
    NothingToReport,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Comparison(#[from] ComparisonError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Everything loaded from a collection that evaluation needs.
pub struct EvalContext {
    pub strategy_ids: Vec<String>,
    pub datasets: BTreeMap<String, Dataset>,
    pub splits: BTreeMap<String, SplitSpec>,
    pub records: BTreeMap<PairKey, PredictionRecord>,
    /// Pairs quarantined as failed by the orchestrator; legitimately absent
    /// from `records`.
    pub failed_pairs: Vec<PairKey>,
}

impl EvalContext {
    pub fn load(collection: &Collection, strategy_ids: &[String]) -> Result<Self, ReportError> {
        let mut datasets = BTreeMap::new();
        let mut splits = BTreeMap::new();
        for id in collection.dataset_ids()? {
            datasets.insert(id.clone(), collection.load_dataset(&id)?);
            splits.insert(id.clone(), collection.load_split(&id)?);
        }
        let records = collection.load_predictions(strategy_ids)?;
        let failed_pairs = match fs::read(collection.checkpoint_path()) {
            Ok(bytes) => serde_json::from_slice::<crate::datastore::RunState>(&bytes)
                .map(|s| {
                    s.failed
                        .into_iter()
                        .map(|f| (f.dataset_id, f.strategy_id))
                        .collect()
                })
                .unwrap_or_default(),
            Err(_) => Vec::new(),
        };
        Ok(EvalContext {
            strategy_ids: strategy_ids.to_vec(),
            datasets,
            splits,
            records,
            failed_pairs,
        })
    }

    /// Builds the loss tensor, tolerating only quarantined-failed pairs.
    /// Any other absent pair is an error naming the missing pairs.
    pub fn tensor(&self, kind: LossKind) -> Result<LossTensor, ReportError> {
        let missing: Vec<PairKey> = self
            .datasets
            .keys()
            .flat_map(|d| {
                self.strategy_ids
                    .iter()
                    .map(move |s| (d.clone(), s.clone()))
            })
            .filter(|pair| {
                !self.records.contains_key(pair) && !self.failed_pairs.contains(pair)
            })
            .collect();
        if !missing.is_empty() {
            return Err(MetricError::MissingPair(missing).into());
        }
        Ok(metrics::build_loss_tensor_partial(
            &self.records,
            &self.splits,
            &self.datasets,
            &self.strategy_ids,
            kind,
        )?)
    }

    /// Per-dataset accuracy (1 - mean misclassification) for every present
    /// pair.
    pub fn accuracy(&self) -> Result<BTreeMap<PairKey, f64>, ReportError> {
        let mmce = self.tensor(LossKind::Average(PointwiseLoss::Mmce))?;
        Ok(mmce
            .aggregate
            .iter()
            .map(|(k, v)| (k.clone(), 1.0 - v))
            .collect())
    }
}

/// One row of the per-strategy summary (ordered by average rank).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy_id: String,
    pub avg_rank: f64,
    /// Mean per-dataset accuracy (unseen-source scenario).
    pub avg_score: f64,
    /// Between-dataset standard error of the average score.
    pub std_error: f64,
    pub avg_training_time: f64,
}

/// Builds the summary table: ranks from the given tensor (its direction),
/// scores as mean per-dataset accuracy, the unseen-source standard error,
/// and mean training time. Rows sorted by average rank ascending.
pub fn summary_table(
    tensor: &LossTensor,
    accuracy: &BTreeMap<PairKey, f64>,
    records: &BTreeMap<PairKey, PredictionRecord>,
) -> Result<Vec<SummaryRow>, ReportError> {
    let complete = tensor.complete_datasets();
    if complete.is_empty() {
        return Err(ReportError::NothingToReport);
    }
    let k = tensor.strategy_ids.len();
    let mut perf = Matrix::zeros(complete.len(), k);
    for (i, d) in complete.iter().enumerate() {
        for (j, s) in tensor.strategy_ids.iter().enumerate() {
            perf.set(i, j, tensor.value(d, s).unwrap());
        }
    }
    let ranks = estimation::rank_matrix(&perf, tensor.kind.direction())?;
    let mut rows = Vec::with_capacity(k);
    for (j, s) in tensor.strategy_ids.iter().enumerate() {
        let rank_col = ranks.rank_matrix.column(j);
        let avg_rank = rank_col.iter().sum::<f64>() / rank_col.len() as f64;
        let scores: Vec<f64> = complete
            .iter()
            .filter_map(|d| accuracy.get(&(d.clone(), s.clone())).copied())
            .collect();
        let avg_score = scores.iter().sum::<f64>() / scores.len() as f64;
        let std_error = if scores.len() >= 2 {
            estimation::epsilon_star(&scores, 0.95)?.std_error
        } else {
            f64::NAN
        };
        let times: Vec<f64> = complete
            .iter()
            .filter_map(|d| records.get(&(d.clone(), s.clone())))
            .map(|r| r.training_time)
            .collect();
        let avg_training_time = if times.is_empty() {
            f64::NAN
        } else {
            times.iter().sum::<f64>() / times.len() as f64
        };
        rows.push(SummaryRow {
            strategy_id: s.clone(),
            avg_rank,
            avg_score,
            std_error,
            avg_training_time,
        });
    }
    rows.sort_by(|a, b| {
        a.avg_rank
            .partial_cmp(&b.avg_rank)
            .unwrap()
            .then_with(|| a.strategy_id.cmp(&b.strategy_id))
    });
    Ok(rows)
}

/// Renders the summary as a Markdown table.
pub fn summary_markdown(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "| strategy | avg_rank | avg_score | std_error | avg training time (in sec) |\n\
         |---|---|---|---|---|\n",
    );
    for r in rows {
        out.push_str(&format!(
            "| {} | {:.1} | {:.3} | {:.3} | {:.3} |\n",
            r.strategy_id, r.avg_rank, r.avg_score, r.std_error, r.avg_training_time
        ));
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct CdMetadata {
    avg_ranks: Vec<f64>,
    cd: f64,
    labels: Vec<String>,
    /// Bars as groups of indices into `labels`, each group a maximal set of
    /// strategies whose pairwise average-rank differences are all below cd.
    bars: Vec<Vec<usize>>,
}

/// Maximal groups (size >= 2) of strategies whose average ranks span less
/// than `cd`. Ranks compared strictly: a gap of exactly `cd` disconnects.
fn cd_cliques(avg_ranks: &[f64], cd: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..avg_ranks.len()).collect();
    order.sort_by(|&a, &b| avg_ranks[a].partial_cmp(&avg_ranks[b]).unwrap().then(a.cmp(&b)));
    let mut bars: Vec<Vec<usize>> = Vec::new();
    let mut furthest = 0usize; // rightmost end emitted so far (exclusive)
    for s in 0..order.len() {
        let mut e = s;
        while e + 1 < order.len() && avg_ranks[order[e + 1]] - avg_ranks[order[s]] < cd {
            e += 1;
        }
        if e > s && e + 1 > furthest {
            bars.push(order[s..=e].to_vec());
            furthest = e + 1;
        }
    }
    bars
}

/// Renders a critical-difference diagram as an SVG document.
///
/// The axis spans ranks [1, K], lower (better) ranks to the left. Each
/// strategy sits at its average rank; groups of strategies whose pairwise
/// rank differences all fall below `cd` are joined by a horizontal bar.
/// The drawing inputs are embedded as JSON in a `<metadata>` element so
/// the clique structure can be checked mechanically. Output bytes are a
/// pure function of the inputs.
pub fn cd_diagram(avg_ranks: &[f64], cd: f64, labels: &[String]) -> String {
    assert!(avg_ranks.len() >= 2, "need at least two strategies");
    assert!(cd > 0.0, "critical difference must be positive");
    assert_eq!(avg_ranks.len(), labels.len());
    let k = avg_ranks.len();
    let bars = cd_cliques(avg_ranks, cd);
    let meta = CdMetadata {
        avg_ranks: avg_ranks.to_vec(),
        cd,
        labels: labels.to_vec(),
        bars: bars.clone(),
    };

    let width = 800.0;
    let axis_left = 180.0;
    let axis_right = width - 180.0;
    let axis_y = 70.0;
    let x_of = |rank: f64| axis_left + (rank - 1.0) / (k as f64 - 1.0) * (axis_right - axis_left);

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| avg_ranks[a].partial_cmp(&avg_ranks[b]).unwrap().then(a.cmp(&b)));
    let bar_y0 = axis_y + 18.0;
    let bar_step = 12.0;
    let label_y0 = bar_y0 + bars.len() as f64 * bar_step + 16.0;
    let label_step = 18.0;
    let left_count = k.div_ceil(2);
    let height = label_y0 + left_count as f64 * label_step + 20.0;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str("<metadata id=\"cd-meta\">");
    svg.push_str(&serde_json::to_string(&meta).unwrap());
    svg.push_str("</metadata>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"20\">CD = {:.4}</text>\n",
        axis_left, cd
    ));
    // CD scale bar.
    let cd_px = cd / (k as f64 - 1.0) * (axis_right - axis_left);
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"28\" x2=\"{}\" y2=\"28\" stroke=\"black\" stroke-width=\"2\"/>\n",
        axis_left,
        axis_left + cd_px.min(axis_right - axis_left)
    ));
    // Axis with integer ticks.
    svg.push_str(&format!(
        "<line x1=\"{axis_left}\" y1=\"{axis_y}\" x2=\"{axis_right}\" y2=\"{axis_y}\" stroke=\"black\"/>\n"
    ));
    for tick in 1..=k {
        let x = x_of(tick as f64);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{axis_y}\" stroke=\"black\"/>\n",
            axis_y - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{tick}</text>\n",
            axis_y - 10.0
        ));
    }
    // Bars under the axis.
    for (b, group) in bars.iter().enumerate() {
        let lo = group
            .iter()
            .map(|&i| avg_ranks[i])
            .fold(f64::INFINITY, f64::min);
        let hi = group
            .iter()
            .map(|&i| avg_ranks[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let y = bar_y0 + b as f64 * bar_step;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"black\" stroke-width=\"3\"/>\n",
            x_of(lo),
            x_of(hi)
        ));
    }
    // Strategy markers and labels, best half to the left.
    for (pos, &i) in order.iter().enumerate() {
        let x = x_of(avg_ranks[i]);
        let on_left = pos < left_count;
        let row = if on_left { pos } else { pos - left_count };
        let label_y = label_y0 + row as f64 * label_step;
        let label_x = if on_left { axis_left - 170.0 } else { axis_right + 10.0 };
        let anchor_x = if on_left { axis_left - 10.0 } else { axis_right + 8.0 };
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{axis_y}\" x2=\"{x}\" y2=\"{label_y}\" stroke=\"gray\" stroke-width=\"0.5\"/>\n"
        ));
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{label_y}\" x2=\"{anchor_x}\" y2=\"{label_y}\" stroke=\"gray\" stroke-width=\"0.5\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{label_x}\" y=\"{}\">{} ({:.3})</text>\n",
            label_y - 3.0,
            xml_escape(&labels[i]),
            avg_ranks[i]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Parses the metadata element back out of a rendered diagram.
pub fn parse_cd_metadata(svg: &str) -> Option<(Vec<f64>, f64, Vec<Vec<usize>>)> {
    let start = svg.find("<metadata id=\"cd-meta\">")? + "<metadata id=\"cd-meta\">".len();
    let end = svg[start..].find("</metadata>")? + start;
    let meta: CdMetadata = serde_json::from_str(&svg[start..end]).ok()?;
    Some((meta.avg_ranks, meta.cd, meta.bars))
}

/// Linear-interpolation quartiles (min, q1, median, q3, max).
pub fn quartiles(values: &[f64]) -> (f64, f64, f64, f64, f64) {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| {
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let frac = h - lo as f64;
        if lo + 1 < sorted.len() {
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        } else {
            sorted[lo]
        }
    };
    (sorted[0], q(0.25), q(0.5), q(0.75), sorted[sorted.len() - 1])
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

/// Options controlling [`export_all`].
#[derive(Debug, Clone)]
pub struct ExportOptions {
    pub kind: LossKind,
    pub confidence: f64,
    pub alternative: Alternative,
    pub correction: Correction,
    pub alpha: f64,
    /// Restrict the CD diagram to the N best-ranked strategies.
    pub top: Option<usize>,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            kind: LossKind::Average(PointwiseLoss::Mmce),
            confidence: 0.95,
            alternative: Alternative::TwoSided,
            correction: Correction::Holm,
            alpha: 0.05,
            top: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub files: Vec<ManifestEntry>,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
}

/// Scenario-level estimate rows for every strategy (averaged-seen and
/// unseen-source scenarios; the per-dataset scenario goes in a separate
/// file).
pub fn estimates_csv(tensor: &LossTensor, confidence: f64) -> Result<String, ReportError> {
    let mut out =
        String::from("strategy_id,scenario,point,std_error,ci_lower,ci_upper,confidence\n");
    for s in &tensor.strategy_ids {
        if let LossKind::Average(_) = tensor.kind {
            let mut per_dataset = Vec::new();
            for d in &tensor.dataset_ids {
                if let Some(pts) = tensor.per_point.get(&(d.clone(), s.clone())) {
                    let e = estimation::eta_hat_per_dataset(pts, confidence)?;
                    let mean = e.point;
                    let m = pts.len();
                    let v = pts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
                    per_dataset.push(estimation::PerDatasetEstimate {
                        eta_hat: mean,
                        v_hat: v,
                        m,
                    });
                }
            }
            if !per_dataset.is_empty() {
                let e = estimation::eta_hat_pooled(&per_dataset, confidence)?;
                out.push_str(&estimate_row(s, &e));
            }
        }
        let values: Vec<f64> = tensor.strategy_column(s).iter().map(|(_, v)| *v).collect();
        if values.len() >= 2 {
            let e = estimation::epsilon_star(&values, confidence)?;
            out.push_str(&estimate_row(s, &e));
        }
    }
    Ok(out)
}

fn estimate_row(strategy: &str, e: &estimation::EstimateWithCi) -> String {
    format!(
        "{},{},{},{},{},{},{}\n",
        strategy,
        e.scenario.label(),
        fmt(e.point),
        fmt(e.std_error),
        fmt(e.ci_lower),
        fmt(e.ci_upper),
        e.confidence
    )
}

/// Per-dataset estimate rows (seen-source scenario), average kinds only.
pub fn estimates_per_dataset_csv(
    tensor: &LossTensor,
    confidence: f64,
) -> Result<String, ReportError> {
    let mut out = String::from(
        "dataset_id,strategy_id,scenario,point,std_error,ci_lower,ci_upper,confidence\n",
    );
    for ((d, s), pts) in &tensor.per_point {
        if pts.len() < 2 {
            continue;
        }
        let e = estimation::eta_hat_per_dataset(pts, confidence)?;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            d,
            s,
            Scenario::A1ReusedSeen.label(),
            fmt(e.point),
            fmt(e.std_error),
            fmt(e.ci_lower),
            fmt(e.ci_upper),
            e.confidence
        ));
    }
    Ok(out)
}

/// Wide-format pairwise matrix CSV: one row per strategy, two sub-columns
/// (statistic, p value) per strategy.
pub fn pairwise_wide_csv(matrix: &PairwiseMatrix) -> String {
    let mut out = String::from("strategy");
    for s in &matrix.strategy_ids {
        out.push_str(&format!(",{s} stat,{s} p_val"));
    }
    out.push('\n');
    for (i, s) in matrix.strategy_ids.iter().enumerate() {
        out.push_str(s);
        for j in 0..matrix.strategy_ids.len() {
            match &matrix.cells[i][j] {
                Some(c) => out.push_str(&format!(",{},{}", fmt(c.statistic), fmt(c.p_value))),
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}

/// Long-format pairwise CSV.
pub fn pairwise_long_csv(matrix: &PairwiseMatrix) -> String {
    let mut out = String::from("strategy_k,strategy_k_prime,statistic,p_value,n_used\n");
    for (i, a) in matrix.strategy_ids.iter().enumerate() {
        for (j, b) in matrix.strategy_ids.iter().enumerate() {
            if i == j {
                continue;
            }
            if let Some(c) = &matrix.cells[i][j] {
                out.push_str(&format!(
                    "{a},{b},{},{},{}\n",
                    fmt(c.statistic),
                    fmt(c.p_value),
                    c.n_used
                ));
            } else {
                out.push_str(&format!("{a},{b},,,\n"));
            }
        }
    }
    out
}

/// Writes the full report set and a manifest with digests. Returns the
/// manifest.
pub fn export_all(
    context: &EvalContext,
    options: &ExportOptions,
    out_dir: &Path,
) -> Result<Manifest, ReportError> {
    if context.records.is_empty() {
        return Err(ReportError::NothingToReport);
    }
    fs::create_dir_all(out_dir)?;
    let mut files: Vec<(String, String)> = Vec::new();
    let mut notes = Vec::new();

    let tensor = context.tensor(options.kind)?;
    let accuracy = context.accuracy()?;

    files.push((
        "losses_long.csv".into(),
        metrics::loss_tensor_long_csv(&tensor),
    ));
    files.push((
        "estimates.csv".into(),
        estimates_csv(&tensor, options.confidence)?,
    ));
    if let LossKind::Average(_) = options.kind {
        files.push((
            "estimates_per_dataset.csv".into(),
            estimates_per_dataset_csv(&tensor, options.confidence)?,
        ));
    }

    let rows = summary_table(&tensor, &accuracy, &context.records)?;
    files.push(("summary.md".into(), summary_markdown(&rows)));

    // Box-plot quartiles of per-dataset accuracy.
    let mut boxplot = String::from("strategy_id,min,q1,median,q3,max\n");
    for s in &context.strategy_ids {
        let values: Vec<f64> = context
            .datasets
            .keys()
            .filter_map(|d| accuracy.get(&(d.clone(), s.clone())).copied())
            .collect();
        if values.is_empty() {
            continue;
        }
        let (min, q1, med, q3, max) = quartiles(&values);
        boxplot.push_str(&format!(
            "{s},{},{},{},{},{}\n",
            fmt(min),
            fmt(q1),
            fmt(med),
            fmt(q3),
            fmt(max)
        ));
    }
    files.push(("boxplot.csv".into(), boxplot));

    let k = context.strategy_ids.len();
    if k >= 2 {
        for (test, name) in [
            (PairwiseTest::PairedT, "t"),
            (PairwiseTest::WilcoxonSignedRank, "wilcoxon"),
            (PairwiseTest::SignTest, "sign"),
        ] {
            let matrix = all_pairs(&tensor, test, options.alternative, options.correction)?;
            files.push((format!("pairwise_{name}.csv"), pairwise_wide_csv(&matrix)));
            files.push((
                format!("pairwise_{name}_long.csv"),
                pairwise_long_csv(&matrix),
            ));
        }

        let complete = tensor.complete_datasets();
        if complete.len() >= 2 {
            let mut perf = Matrix::zeros(complete.len(), k);
            for (i, d) in complete.iter().enumerate() {
                for (j, s) in tensor.strategy_ids.iter().enumerate() {
                    perf.set(i, j, tensor.value(d, s).unwrap());
                }
            }
            let ranks = estimation::rank_matrix(&perf, tensor.kind.direction())?;
            let summary = estimation::average_ranks(&ranks)?;
            let friedman = friedman_test(&ranks.rank_matrix)?;
            let mut fr = String::from(
                "statistic,p_value,effect_raw,effect_normalized,n_datasets,n_strategies\n",
            );
            fr.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt(friedman.statistic),
                fmt(friedman.p_value),
                fmt(friedman.effect_raw),
                fmt(friedman.effect_normalized),
                complete.len(),
                k
            ));
            files.push(("friedman.csv".into(), fr));

            let mut ranks_csv = String::from("strategy_id,avg_rank,std_error\n");
            for (j, s) in tensor.strategy_ids.iter().enumerate() {
                ranks_csv.push_str(&format!(
                    "{s},{},{}\n",
                    fmt(summary.avg_ranks[j]),
                    fmt(summary.avg_rank_se[j])
                ));
            }
            files.push(("avg_ranks.csv".into(), ranks_csv));

            if (2..=20).contains(&k) && complete.len() >= 2 {
                let cd = estimation::nemenyi_cd(k, complete.len(), options.alpha)?;
                let (ranks_for_plot, labels_for_plot) =
                    top_n(&summary.avg_ranks, &tensor.strategy_ids, options.top);
                if ranks_for_plot.len() >= 2 {
                    files.push((
                        "cd_diagram.svg".into(),
                        cd_diagram(&ranks_for_plot, cd, &labels_for_plot),
                    ));
                }
            } else {
                notes.push(format!(
                    "cd_diagram.svg omitted: critical-difference table covers 2..=20 strategies, have {k}"
                ));
            }
        } else {
            notes.push("rank outputs omitted: fewer than 2 complete datasets".into());
        }
    } else {
        notes.push("pairwise and rank outputs omitted: single strategy".into());
    }

    for (name, contents) in &files {
        fs::write(out_dir.join(name), contents)?;
    }
    let manifest = Manifest {
        format_version: crate::datastore::FORMAT_VERSION,
        files: files
            .iter()
            .map(|(name, contents)| ManifestEntry {
                name: name.clone(),
                sha256: crate::datastore::sha256_hex(contents.as_bytes()),
            })
            .collect(),
        notes,
    };
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_vec_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// Keeps the n best-ranked strategies (all when `top` is None).
fn top_n(avg_ranks: &[f64], labels: &[String], top: Option<usize>) -> (Vec<f64>, Vec<String>) {
    match top {
        None => (avg_ranks.to_vec(), labels.to_vec()),
        Some(n) => {
            let mut order: Vec<usize> = (0..avg_ranks.len()).collect();
            order.sort_by(|&a, &b| {
                avg_ranks[a]
                    .partial_cmp(&avg_ranks[b])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            order.truncate(n.max(2));
            order.sort_unstable(); // keep original relative order
            (
                order.iter().map(|&i| avg_ranks[i]).collect(),
                order.iter().map(|&i| labels[i].clone()).collect(),
            )
        }
    }
}

/// Friedman test over the complete-dataset rank matrix of a tensor;
/// convenience for the CLI and bindings.
pub fn friedman_from_tensor(tensor: &LossTensor) -> Result<comparison::TestResult, ReportError> {
    let complete = tensor.complete_datasets();
    let k = tensor.strategy_ids.len();
    let mut perf = Matrix::zeros(complete.len(), k);
    for (i, d) in complete.iter().enumerate() {
        for (j, s) in tensor.strategy_ids.iter().enumerate() {
            perf.set(i, j, tensor.value(d, s).unwrap());
        }
    }
    let ranks = estimation::rank_matrix(&perf, tensor.kind.direction())?;
    Ok(friedman_test(&ranks.rank_matrix)?)
}
