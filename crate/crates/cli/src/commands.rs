use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, Context, Result};
use log::info;
use xlsim::corpus::{AlignedPairCorpus, CorpusReader, Granularity, TagMapping};
use xlsim::embeddings::{load_embeddings, top_k_neighbors, EmbeddingSpace};
use xlsim::evaluation::{
    build_matrix_with, fold_details_tsv, fold_seed, histogram, run_folds, DistanceMatrix, FoldResult, Report, ReportRow,
    TUNING_FOLDS,
};
use xlsim::fusion::{
    root_attributes, train_c45, training_rows, tree_fused_matrix, weighted_fused_matrix, C45Params, FusionWeights,
};
use xlsim::methods::{BilingualDictionary, MethodId, PosWeights, Resources, Scorer};
use xlsim::optimizer::{tune_fusion_weights, tune_pos_weights, TuneOptions};

use crate::config::{RunConfig, OVERALL};
use crate::output::{slug, Staging};

/// Mixed into fold seeds when sampling negative training rows.
const TRAINING_SAMPLE_SALT: u64 = 0x5eed_7a11;

type FoldRecord = (String, String, Granularity, Vec<FoldResult>);

fn needs_space(m: MethodId) -> bool {
    matches!(m, MethodId::ClCtsWe | MethodId::ClWes | MethodId::ClWess)
}

/// Loaded resources and corpora for one run.
pub struct Workspace {
    pub config: RunConfig,
    base: Resources,
    corpora: Vec<AlignedPairCorpus>,
    tuned_pos: HashMap<(String, Granularity), PosWeights>,
}

impl Workspace {
    pub fn load(config: RunConfig, always_space: bool) -> Result<Self> {
        let mut base = Resources::default();
        if always_space || config.methods.iter().any(|m| needs_space(*m)) {
            let path = config.embeddings.as_ref().with_context(|| {
                let user = config.methods.iter().find(|m| needs_space(**m)).map_or("this command", |m| m.name());
                format!("{user} needs `embeddings` in the config")
            })?;
            info!("loading embeddings from {}", path.display());
            let space = load_embeddings(path)?.with_lowercase_fallback(config.lowercase_fallback);
            base = base.with_space(space);
        }
        if config.methods.contains(&MethodId::ClAsa) {
            let path = config
                .dictionary
                .as_ref()
                .context("CL-ASA needs `dictionary` in the config")?;
            base = base.with_dictionary(BilingualDictionary::load(path)?);
        }
        if let Some(path) = &config.pos_weights {
            base = base.with_pos_weights(PosWeights::load(path)?);
        }
        let mapping = config.tag_mapping.as_ref().map(TagMapping::load).transpose()?;
        let mut corpora = Vec::new();
        for spec in &config.corpora {
            if config.granularity.is_some_and(|g| g != spec.granularity) {
                continue;
            }
            let mut reader = CorpusReader::new(spec.granularity);
            if let Some(m) = &mapping {
                reader = reader.with_mapping(m);
            }
            let text = fs::read_to_string(&spec.path).with_context(|| format!("cannot read {}", spec.path.display()))?;
            let corpus = reader.parse_str(spec.name.as_str(), &text, &spec.path.display().to_string())?;
            info!("corpus {} ({}): {} pairs", corpus.name, corpus.granularity, corpus.len());
            corpora.push(corpus);
        }
        Ok(Workspace {
            config,
            base,
            corpora,
            tuned_pos: HashMap::new(),
        })
    }

    pub fn space(&self) -> Option<&EmbeddingSpace> {
        self.base.space.as_deref()
    }

    fn require_corpora(&self) -> Result<()> {
        if self.corpora.is_empty() {
            bail!("no corpus selected; add [[corpus]] entries or change --granularity");
        }
        Ok(())
    }

    /// Sub-corpora of one granularity, then their merge when there are several.
    pub fn units(&self, gran: Granularity) -> Result<Vec<AlignedPairCorpus>> {
        let parts: Vec<&AlignedPairCorpus> = self.corpora.iter().filter(|c| c.granularity == gran).collect();
        let mut units: Vec<AlignedPairCorpus> = parts.iter().map(|c| (*c).clone()).collect();
        if parts.len() > 1 {
            units.push(AlignedPairCorpus::merged(OVERALL, &parts)?);
        }
        Ok(units)
    }

    fn tune_options(&self) -> TuneOptions {
        TuneOptions {
            budget: self.config.tune_budget,
            restarts: self.config.tune_restarts,
            seed: self.config.seed,
        }
    }

    /// Resources for `method` on `corpus`. CL-WESS without a weights file
    /// gets weights tuned on this corpus's tuning folds.
    fn resources_for(&mut self, method: MethodId, corpus: &AlignedPairCorpus, staging: &mut Staging) -> Result<Resources> {
        if method != MethodId::ClWess || self.base.pos_weights.is_some() {
            return Ok(self.base.clone());
        }
        let key = (corpus.name.clone(), corpus.granularity);
        if let Some(w) = self.tuned_pos.get(&key) {
            return Ok(self.base.clone().with_pos_weights(*w));
        }
        info!("tuning CL-WESS weights on {} ({})", corpus.name, corpus.granularity);
        let tuned = tune_pos_weights(&self.base, corpus, self.config.m, self.config.seed, &self.tune_options())?;
        let stem = format!("pos_weights/{}.{}", slug(&corpus.name), corpus.granularity);
        staging.write(format!("{stem}.tsv"), &tuned.weights.to_tsv())?;
        staging.write(format!("{stem}.trace.tsv"), &tuned.result.trace_tsv())?;
        self.tuned_pos.insert(key, tuned.weights);
        Ok(self.base.clone().with_pos_weights(tuned.weights))
    }
}

fn write_reports(staging: &mut Staging, report: &Report, details: &[FoldRecord]) -> Result<()> {
    staging.write("report.tsv", &report.to_tsv())?;
    staging.write("table.txt", &report.to_table())?;
    staging.write("folds.tsv", &fold_details_tsv(details))?;
    Ok(())
}

pub fn evaluate(ws: &mut Workspace) -> Result<Staging> {
    ws.require_corpora()?;
    let mut staging = Staging::new(&ws.config.out)?;
    let mut report = Report::default();
    let mut details = Vec::new();
    let methods = ws.config.methods.clone();
    for gran in ws.config.granularities() {
        let units = ws.units(gran)?;
        for &method in &methods {
            for corpus in &units {
                let resources = ws.resources_for(method, corpus, &mut staging)?;
                let scorer = Scorer::new(method, &resources)?;
                info!("evaluating {method} on {} ({gran})", corpus.name);
                let folds = run_folds(&scorer, corpus, ws.config.folds, ws.config.m, ws.config.seed)?;
                report.rows.push(ReportRow::from_folds(method.name(), &corpus.name, gran, &folds)?);
                details.push((method.name().to_string(), corpus.name.clone(), gran, folds));
            }
        }
    }
    write_reports(&mut staging, &report, &details)?;
    Ok(staging)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TuneTarget {
    PosWeights,
    FusionWeights,
}

/// The single corpus a tuning run works on: the named one, or the merge of
/// every selected corpus.
fn tuning_corpus(ws: &Workspace, corpus: Option<&str>) -> Result<AlignedPairCorpus> {
    ws.require_corpora()?;
    let grans = ws.config.granularities();
    if grans.len() > 1 {
        bail!("the selected corpora span both granularities; pass --granularity");
    }
    let units = ws.units(grans[0])?;
    match corpus {
        Some(name) => units
            .into_iter()
            .find(|c| c.name == name)
            .with_context(|| format!("no corpus named `{name}`")),
        None => Ok(units.into_iter().last().expect("at least one corpus")),
    }
}

pub fn tune(ws: &mut Workspace, target: TuneTarget, corpus: Option<&str>) -> Result<Staging> {
    let corpus = tuning_corpus(ws, corpus)?;
    let mut staging = Staging::new(&ws.config.out)?;
    let options = ws.tune_options();
    let (m, seed) = (ws.config.m, ws.config.seed);
    let summary = match target {
        TuneTarget::PosWeights => {
            let tuned = tune_pos_weights(&ws.base, &corpus, m, seed, &options)?;
            staging.write("pos_weights.tsv", &tuned.weights.to_tsv())?;
            staging.write("trace.tsv", &tuned.result.trace_tsv())?;
            format!("tuned CL-WESS weights on {}: tuning-fold F1 {:.6}", corpus.name, tuned.objective)
        }
        TuneTarget::FusionWeights => {
            let methods = ws.config.methods.clone();
            let mut folds = Vec::new();
            for k in 0..TUNING_FOLDS {
                let mut parts = Vec::new();
                for &method in &methods {
                    let resources = ws.resources_for(method, &corpus, &mut staging)?;
                    let scorer = Scorer::new(method, &resources)?;
                    parts.push((method, build_matrix_with(&scorer, &corpus, m, fold_seed(seed, k))?));
                }
                folds.push(parts);
            }
            let tuned = tune_fusion_weights(&folds, &options)?;
            staging.write("fusion_weights.tsv", &tuned.weights.to_tsv())?;
            staging.write("trace.tsv", &tuned.result.trace_tsv())?;
            format!("tuned fusion weights on {}: tuning-fold F1 {:.6}", corpus.name, tuned.objective)
        }
    };
    println!("{summary}");
    Ok(staging)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FuseMode {
    Average,
    Weighted,
    Tree,
}

impl FuseMode {
    fn label(self) -> &'static str {
        match self {
            FuseMode::Average => "Average fusion",
            FuseMode::Weighted => "Weighted fusion",
            FuseMode::Tree => "Decision tree",
        }
    }
}

fn member_matrices(scorers: &[(MethodId, Scorer<'_>)], corpus: &AlignedPairCorpus, m: usize, seed: u64) -> Result<Vec<(MethodId, DistanceMatrix)>> {
    scorers
        .iter()
        .map(|(method, scorer)| Ok((*method, build_matrix_with(scorer, corpus, m, seed)?)))
        .collect()
}

fn borrowed(parts: &[(MethodId, DistanceMatrix)]) -> Vec<(MethodId, &DistanceMatrix)> {
    parts.iter().map(|(m, d)| (*m, d)).collect()
}

pub fn fuse(ws: &mut Workspace, mode: FuseMode, weights_path: Option<&std::path::Path>) -> Result<Staging> {
    ws.require_corpora()?;
    let weights = match mode {
        FuseMode::Weighted => {
            let path = weights_path
                .or(ws.config.fusion_weights.as_deref())
                .context("weighted fusion needs a fusion weights file (--weights or `fusion_weights` in the config)")?;
            Some(FusionWeights::load(path)?)
        }
        _ => None,
    };
    if mode == FuseMode::Tree && ws.config.folds <= TUNING_FOLDS {
        bail!("tree fusion trains on folds 0-1 and needs at least {} folds", TUNING_FOLDS + 1);
    }
    let (m, seed, n_folds) = (ws.config.m, ws.config.seed, ws.config.folds);
    let methods = ws.config.methods.clone();
    let mut staging = Staging::new(&ws.config.out)?;
    let mut report = Report::default();
    let mut details = Vec::new();
    let mut roots = String::from("corpus\tgranularity\troot_attributes\n");
    for gran in ws.config.granularities() {
        for corpus in ws.units(gran)? {
            let resources: Vec<Resources> = methods
                .iter()
                .map(|&method| ws.resources_for(method, &corpus, &mut staging))
                .collect::<Result<_>>()?;
            let scorers: Vec<(MethodId, Scorer<'_>)> = methods
                .iter()
                .zip(&resources)
                .map(|(&method, res)| Ok((method, Scorer::new(method, res)?)))
                .collect::<Result<_>>()?;
            info!("{} on {} ({gran})", mode.label(), corpus.name);
            let mut folds = Vec::new();
            match mode {
                FuseMode::Average | FuseMode::Weighted => {
                    let w = match &weights {
                        Some(w) => w.clone(),
                        None => FusionWeights::uniform(&methods)?,
                    };
                    for k in 0..n_folds {
                        let parts = member_matrices(&scorers, &corpus, m, fold_seed(seed, k))?;
                        let fused = weighted_fused_matrix(&borrowed(&parts), &w, mode.label())?;
                        folds.push(FoldResult::from_matrix(k, &fused));
                    }
                }
                FuseMode::Tree => {
                    let mut rows = Vec::new();
                    for k in 0..TUNING_FOLDS {
                        let fold = fold_seed(seed, k);
                        let parts = member_matrices(&scorers, &corpus, m, fold)?;
                        rows.extend(training_rows(&borrowed(&parts), 1.0, fold ^ TRAINING_SAMPLE_SALT)?);
                    }
                    let tree = train_c45(&rows, &C45Params::default())
                        .with_context(|| format!("training the decision tree on {}", corpus.name))?;
                    staging.write(format!("trees/{}.{gran}.txt", slug(&corpus.name)), &tree.to_text())?;
                    let attrs: Vec<&str> = root_attributes(&tree, 2).iter().map(|a| a.name()).collect();
                    let _ = writeln!(roots, "{}\t{gran}\t{}", corpus.name, attrs.join(","));
                    for k in TUNING_FOLDS..n_folds {
                        let parts = member_matrices(&scorers, &corpus, m, fold_seed(seed, k))?;
                        let fused = tree_fused_matrix(&tree, &borrowed(&parts), mode.label())?;
                        folds.push(FoldResult::from_matrix(k, &fused));
                    }
                }
            }
            report.rows.push(ReportRow::from_folds(mode.label(), &corpus.name, gran, &folds)?);
            details.push((mode.label().to_string(), corpus.name.clone(), gran, folds));
        }
    }
    write_reports(&mut staging, &report, &details)?;
    if mode == FuseMode::Tree {
        staging.write("root_attributes.tsv", &roots)?;
    }
    Ok(staging)
}

pub fn histograms(ws: &mut Workspace, method: MethodId, corpus: Option<&str>, bins: usize) -> Result<Staging> {
    ws.require_corpora()?;
    let mut staging = Staging::new(&ws.config.out)?;
    let mut found = false;
    for gran in ws.config.granularities() {
        for unit in ws.units(gran)? {
            if corpus.is_some_and(|name| name != unit.name) {
                continue;
            }
            found = true;
            let resources = ws.resources_for(method, &unit, &mut staging)?;
            let scorer = Scorer::new(method, &resources)?;
            let matrix = build_matrix_with(&scorer, &unit, ws.config.m, fold_seed(ws.config.seed, 0))?;
            let hist = histogram(&matrix, bins)?;
            staging.write(
                format!("histogram.{}.{}.{gran}.tsv", method.name(), slug(&unit.name)),
                &hist.to_tsv(),
            )?;
        }
    }
    if !found {
        bail!("no corpus named `{}`", corpus.unwrap_or_default());
    }
    Ok(staging)
}

pub fn neighbors(ws: &Workspace, word: &str, k: usize, lang: Option<&str>) -> Result<String> {
    let space = ws.space().context("neighbors needs `embeddings` in the config")?;
    let (wl, ws_) = word
        .split_once(':')
        .with_context(|| format!("expected `lang:word`, got `{word}`"))?;
    let query = space
        .vector(wl, ws_)
        .with_context(|| format!("`{word}` is not in the embedding space"))?;
    let mut out = String::new();
    for (rank, n) in top_k_neighbors(space, query, k, lang, Some((wl, ws_)))?.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}:{}\t{:.6}", rank + 1, n.lang, n.surface, n.cosine);
    }
    Ok(out)
}
