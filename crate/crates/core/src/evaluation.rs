//! Distance-matrix evaluation protocol.
//!
//! Each source unit is scored against its aligned target (the gold cell) and
//! against `m - 1` targets drawn uniformly with replacement from the corpus.
//! A cell is retrieved when its score is at least the threshold; the
//! threshold maximizing F1 is found exactly by scanning the distinct scores.
//!
//! A sampled column that happens to hit the row's own target is relevant too,
//! so a row may hold more than one relevant cell.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{AlignedPairCorpus, Granularity};
use crate::error::{Error, Result};
use crate::methods::{MethodId, Resources, Scorer};

/// Folds with index below this are reserved for tuning.
pub const TUNING_FOLDS: usize = 2;

/// Which target every cell compares against. Method independent, so all
/// methods evaluated with one seed see the same columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnLayout {
    rows: usize,
    cols: usize,
    targets: Vec<usize>,
    seed: u64,
}

impl ColumnLayout {
    /// Column 0 of row `i` is target `i`; the other `m - 1` columns are drawn
    /// uniformly with replacement from `0..n_pairs`, row by row.
    pub fn sample(n_pairs: usize, m: usize, seed: u64) -> Result<Self> {
        if n_pairs == 0 {
            return Err(Error::InvalidArgument("cannot build a matrix over an empty corpus".into()));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut targets = Vec::with_capacity(n_pairs * m);
        for row in 0..n_pairs {
            targets.push(row);
            targets.extend((1..m).map(|_| rng.random_range(0..n_pairs)));
        }
        Ok(ColumnLayout {
            rows: n_pairs,
            cols: m,
            targets,
            seed,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn target(&self, row: usize, col: usize) -> usize {
        self.targets[row * self.cols + col]
    }

    /// Fills a matrix with `score(source_row, target_index)`, rows in parallel.
    pub fn fill<F>(&self, label: impl Into<String>, score: F) -> Result<DistanceMatrix>
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let mut scores = vec![0.0; self.rows * self.cols];
        scores
            .par_chunks_mut(self.cols)
            .enumerate()
            .for_each(|(row, out)| {
                for (col, cell) in out.iter_mut().enumerate() {
                    *cell = score(row, self.target(row, col));
                }
            });
        if let Some(bad) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite score at row {}, column {}",
                bad / self.cols,
                bad % self.cols
            )));
        }
        let relevant = (0..self.rows * self.cols)
            .map(|cell| self.targets[cell] == cell / self.cols)
            .collect();
        Ok(DistanceMatrix {
            rows: self.rows,
            cols: self.cols,
            scores,
            relevant,
            gold_col: vec![0; self.rows],
            seed: self.seed,
            label: label.into(),
        })
    }
}

/// An `N × M` grid of similarity scores with its relevance mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    scores: Vec<f64>,
    relevant: Vec<bool>,
    gold_col: Vec<usize>,
    seed: u64,
    label: String,
}

impl DistanceMatrix {
    /// A matrix from explicit rows where only `gold_col[i]` is relevant in row `i`.
    pub fn new(rows: Vec<Vec<f64>>, gold_col: Vec<usize>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || gold_col.len() != n {
            return Err(Error::InvalidArgument(
                "need at least one row and one gold column per row".into(),
            ));
        }
        let m = rows[0].len();
        if m == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidArgument("rows must be nonempty and of equal length".into()));
        }
        if gold_col.iter().any(|&g| g >= m) {
            return Err(Error::InvalidArgument("gold column out of range".into()));
        }
        let scores: Vec<f64> = rows.into_iter().flatten().collect();
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("scores must be finite".into()));
        }
        let relevant = (0..n * m).map(|cell| gold_col[cell / m] == cell % m).collect();
        Ok(DistanceMatrix {
            rows: n,
            cols: m,
            scores,
            relevant,
            gold_col,
            seed: 0,
            label: String::new(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn score(&self, row: usize, col: usize) -> f64 {
        self.scores[row * self.cols + col]
    }

    /// Row-major scores.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn is_relevant(&self, row: usize, col: usize) -> bool {
        self.relevant[row * self.cols + col]
    }

    pub fn relevant_mask(&self) -> &[bool] {
        &self.relevant
    }

    pub fn relevant_count(&self) -> usize {
        self.relevant.iter().filter(|&&r| r).count()
    }

    pub fn gold_col(&self, row: usize) -> usize {
        self.gold_col[row]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Combines same-layout matrices cell by cell: `combine` receives the
    /// scores of one cell, in the order of `parts`.
    pub fn combine<F>(parts: &[&DistanceMatrix], label: impl Into<String>, combine: F) -> Result<DistanceMatrix>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let first = *parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to combine".into()))?;
        for p in parts {
            if p.rows != first.rows || p.cols != first.cols || p.relevant != first.relevant || p.seed != first.seed {
                return Err(Error::InvalidArgument(
                    "combined matrices must share one column layout".into(),
                ));
            }
        }
        let scores: Vec<f64> = (0..first.scores.len())
            .into_par_iter()
            .map_init(
                || Vec::with_capacity(parts.len()),
                |buf, cell| {
                    buf.clear();
                    buf.extend(parts.iter().map(|p| p.scores[cell]));
                    combine(buf)
                },
            )
            .collect();
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("combined score is not finite".into()));
        }
        Ok(DistanceMatrix {
            scores,
            label: label.into(),
            ..first.clone()
        })
    }
}

/// Builds the protocol matrix for one method.
pub fn build_matrix(
    method: MethodId,
    resources: &Resources,
    corpus: &AlignedPairCorpus,
    m: usize,
    seed: u64,
) -> Result<DistanceMatrix> {
    let scorer = Scorer::new(method, resources)?;
    build_matrix_with(&scorer, corpus, m, seed)
}

/// Like [`build_matrix`] with an already bound scorer (its caches are reused).
pub fn build_matrix_with(scorer: &Scorer<'_>, corpus: &AlignedPairCorpus, m: usize, seed: u64) -> Result<DistanceMatrix> {
    let layout = ColumnLayout::sample(corpus.len(), m, seed)?;
    build_on_layout(scorer, corpus, &layout)
}

pub fn build_on_layout(scorer: &Scorer<'_>, corpus: &AlignedPairCorpus, layout: &ColumnLayout) -> Result<DistanceMatrix> {
    if layout.rows() != corpus.len() {
        return Err(Error::InvalidArgument("layout does not match the corpus size".into()));
    }
    let sources: Vec<_> = corpus.pairs.par_iter().map(|p| scorer.prepare(&p.source)).collect();
    let targets: Vec<_> = corpus.pairs.par_iter().map(|p| scorer.prepare(&p.target)).collect();
    layout.fill(scorer.method().name(), |row, target| {
        scorer.score(&sources[row], &targets[target])
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_counts(hits: usize, retrieved: usize, relevant: usize) -> Prf {
        let precision = if retrieved == 0 { 0.0 } else { hits as f64 / retrieved as f64 };
        let recall = if relevant == 0 { 0.0 } else { hits as f64 / relevant as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }
}

/// Precision, recall and F1 when every cell scoring `>= threshold` is retrieved.
pub fn prf(matrix: &DistanceMatrix, threshold: f64) -> Prf {
    let mut retrieved = 0;
    let mut hits = 0;
    for (s, &rel) in matrix.scores.iter().zip(&matrix.relevant) {
        if *s >= threshold {
            retrieved += 1;
            hits += rel as usize;
        }
    }
    Prf::from_counts(hits, retrieved, matrix.relevant_count())
}

/// The F1-maximizing threshold and its F1.
///
/// F1 only changes at observed scores, so the distinct scores (and `-inf`)
/// are the complete candidate set. Ties go to the larger threshold.
pub fn sweep_threshold(matrix: &DistanceMatrix) -> (f64, f64) {
    let relevant = matrix.relevant_count();
    let mut cells: Vec<(f64, bool)> = matrix
        .scores
        .iter()
        .copied()
        .zip(matrix.relevant.iter().copied())
        .collect();
    cells.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));

    // -inf retrieves everything, exactly like the smallest observed score,
    // so under the larger-threshold tie rule it never wins.
    let mut best: Option<(f64, f64)> = None;
    let (mut retrieved, mut hits) = (0, 0);
    let mut i = 0;
    while i < cells.len() {
        let threshold = cells[i].0;
        while i < cells.len() && cells[i].0 == threshold {
            retrieved += 1;
            hits += cells[i].1 as usize;
            i += 1;
        }
        let f1 = Prf::from_counts(hits, retrieved, relevant).f1;
        if best.is_none_or(|(_, b)| f1 > b) {
            best = Some((threshold, f1));
        }
    }
    best.expect("a distance matrix has at least one cell")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldRole {
    Tuning,
    Evaluation,
}

impl FoldRole {
    pub fn of(fold: usize) -> FoldRole {
        if fold < TUNING_FOLDS {
            FoldRole::Tuning
        } else {
            FoldRole::Evaluation
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FoldRole::Tuning => "tuning",
            FoldRole::Evaluation => "evaluation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub role: FoldRole,
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl FoldResult {
    /// Sweeps `matrix` and records precision/recall at the chosen threshold.
    pub fn from_matrix(fold: usize, matrix: &DistanceMatrix) -> FoldResult {
        let (threshold, _) = sweep_threshold(matrix);
        let p = prf(matrix, threshold);
        FoldResult {
            fold,
            role: FoldRole::of(fold),
            threshold,
            precision: p.precision,
            recall: p.recall,
            f1: p.f1,
        }
    }
}

/// Seed of fold `k`.
pub fn fold_seed(base_seed: u64, fold: usize) -> u64 {
    base_seed.wrapping_add(fold as u64)
}

/// Runs `folds` independent protocol instances; fold `k` uses seed
/// `base_seed + k`.
pub fn run_folds(
    scorer: &Scorer<'_>,
    corpus: &AlignedPairCorpus,
    folds: usize,
    m: usize,
    base_seed: u64,
) -> Result<Vec<FoldResult>> {
    if folds == 0 {
        return Err(Error::InvalidArgument("folds must be at least 1".into()));
    }
    (0..folds)
        .map(|k| {
            let matrix = build_matrix_with(scorer, corpus, m, fold_seed(base_seed, k))?;
            Ok(FoldResult::from_matrix(k, &matrix))
        })
        .collect()
}

/// Mean and 95% normal-approximation half-width `1.96 · s / sqrt(n)`.
pub fn confidence_interval(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewValues(n));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, 1.96 * var.sqrt() / (n as f64).sqrt()))
}

/// Score distributions of relevant (positive) and non-relevant (negative) cells.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramPair {
    pub bin_edges: Vec<f64>,
    pub positives: Vec<usize>,
    pub negatives: Vec<usize>,
}

impl HistogramPair {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("bin_lo\tbin_hi\tpositives\tnegatives\n");
        for b in 0..self.positives.len() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                self.bin_edges[b],
                self.bin_edges[b + 1],
                self.positives[b],
                self.negatives[b]
            );
        }
        out
    }
}

pub const DEFAULT_HISTOGRAM_SAMPLE: usize = 1000;

/// Histogram of up to 1000 positives and as many negatives, sampled with a
/// seed derived from the matrix seed.
pub fn histogram(matrix: &DistanceMatrix, bins: usize) -> Result<HistogramPair> {
    histogram_with(matrix, bins, DEFAULT_HISTOGRAM_SAMPLE, matrix.seed ^ 0x9e37_79b9_7f4a_7c15)
}

/// Positives are all relevant cells, or `sample` of them drawn without
/// replacement; negatives are an equal-sized sample of non-relevant cells.
/// Bins are equal-width over the range of the counted scores.
pub fn histogram_with(matrix: &DistanceMatrix, bins: usize, sample: usize, seed: u64) -> Result<HistogramPair> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..matrix.scores.len()).partition(|&c| matrix.relevant[c]);
    let mut draw = |cells: &[usize], size: usize| -> Vec<f64> {
        if cells.len() <= size {
            cells.iter().map(|&c| matrix.scores[c]).collect()
        } else {
            let mut picked = index::sample(&mut rng, cells.len(), size).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| matrix.scores[cells[i]]).collect()
        }
    };
    let positives = draw(&pos, sample);
    let negatives = draw(&neg, positives.len());

    let all = positives.iter().chain(&negatives);
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let width = (hi - lo) / bins as f64;
    let bin_edges = (0..=bins)
        .map(|b| if b == bins { hi } else { lo + width * b as f64 })
        .collect();
    let bin_of = |s: f64| -> usize {
        if width == 0.0 {
            0
        } else {
            (((s - lo) / width) as usize).min(bins - 1)
        }
    };
    let mut hist = HistogramPair {
        bin_edges,
        positives: vec![0; bins],
        negatives: vec![0; bins],
    };
    for s in positives {
        hist.positives[bin_of(s)] += 1;
    }
    for s in negatives {
        hist.negatives[bin_of(s)] += 1;
    }
    Ok(hist)
}

/// One line of a report: a method (or fusion) on one sub-corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub corpus: String,
    pub granularity: Granularity,
    pub mean_f1: f64,
    pub ci_half_width: f64,
    pub folds: usize,
}

impl ReportRow {
    /// Aggregates the evaluation folds, or every fold when the run is too
    /// short to have evaluation folds. A single fold gets a zero half-width.
    pub fn from_folds(
        method: impl Into<String>,
        corpus: impl Into<String>,
        granularity: Granularity,
        folds: &[FoldResult],
    ) -> Result<Self> {
        let mut f1s: Vec<f64> = folds
            .iter()
            .filter(|f| f.role == FoldRole::Evaluation)
            .map(|f| f.f1)
            .collect();
        if f1s.is_empty() {
            f1s = folds.iter().map(|f| f.f1).collect();
        }
        let (mean_f1, ci_half_width) = match f1s.len() {
            0 => return Err(Error::TooFewValues(0)),
            1 => (f1s[0], 0.0),
            _ => confidence_interval(&f1s)?,
        };
        Ok(ReportRow {
            method: method.into(),
            corpus: corpus.into(),
            granularity,
            mean_f1,
            ci_half_width,
            folds: f1s.len(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    /// `method, corpus, granularity, mean_f1, ci_half_width, folds` TSV.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("method\tcorpus\tgranularity\tmean_f1\tci_half_width\tfolds\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{}",
                r.method, r.corpus, r.granularity, r.mean_f1, r.ci_half_width, r.folds
            );
        }
        out
    }

    /// Methods down, sub-corpora across, one block per granularity; cells are
    /// `F1% ± half-width`.
    pub fn to_table(&self) -> String {
        let mut by_gran: BTreeMap<Granularity, Vec<&ReportRow>> = BTreeMap::new();
        for r in &self.rows {
            by_gran.entry(r.granularity).or_default().push(r);
        }
        let mut out = String::new();
        for (gran, rows) in by_gran {
            let mut methods: Vec<&str> = Vec::new();
            let mut corpora: Vec<&str> = Vec::new();
            for r in &rows {
                if !methods.contains(&r.method.as_str()) {
                    methods.push(&r.method);
                }
                if !corpora.contains(&r.corpus.as_str()) {
                    corpora.push(&r.corpus);
                }
            }
            let _ = writeln!(out, "{} level", capitalize(gran.as_str()));
            let mut header = format!("{:<16}", "Methods");
            for c in &corpora {
                let _ = write!(header, " | {:>18}", format!("{c} (%)"));
            }
            let _ = writeln!(out, "{header}");
            let _ = writeln!(out, "{}", "-".repeat(header.len()));
            for m in &methods {
                let _ = write!(out, "{m:<16}");
                for c in &corpora {
                    let cell = rows
                        .iter()
                        .find(|r| r.method == *m && r.corpus == *c)
                        .map(|r| format!("{:.2} ± {:.3}", r.mean_f1 * 100.0, r.ci_half_width * 100.0))
                        .unwrap_or_else(|| "-".into());
                    let _ = write!(out, " | {cell:>18}");
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Per-fold details, one line per `(label, corpus, granularity, fold)`.
pub fn fold_details_tsv(records: &[(String, String, Granularity, Vec<FoldResult>)]) -> String {
    let mut out = String::from("method\tcorpus\tgranularity\tfold\trole\tthreshold\tprecision\trecall\tf1\n");
    for (method, corpus, gran, folds) in records {
        for f in folds {
            let _ = writeln!(
                out,
                "{method}\t{corpus}\t{gran}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
                f.fold,
                f.role.as_str(),
                f.threshold,
                f.precision,
                f.recall,
                f.f1
            );
        }
    }
    out
}
