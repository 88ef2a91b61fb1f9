//! Run configuration: one TOML file plus command-line overrides.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use xlsim::corpus::Granularity;
use xlsim::methods::MethodId;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    embeddings: Option<PathBuf>,
    dictionary: Option<PathBuf>,
    tag_mapping: Option<PathBuf>,
    pos_weights: Option<PathBuf>,
    fusion_weights: Option<PathBuf>,
    #[serde(default)]
    lowercase_fallback: bool,
    methods: Option<Vec<String>>,
    m: Option<usize>,
    folds: Option<usize>,
    seed: Option<u64>,
    granularity: Option<String>,
    out: Option<PathBuf>,
    tune_budget: Option<usize>,
    tune_restarts: Option<usize>,
    #[serde(default)]
    corpus: Vec<CorpusEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusEntry {
    name: String,
    path: PathBuf,
    granularity: String,
}

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub name: String,
    pub path: PathBuf,
    pub granularity: Granularity,
}

/// Flag values that take precedence over the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub methods: Option<Vec<String>>,
    pub m: Option<usize>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub granularity: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub embeddings: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub tag_mapping: Option<PathBuf>,
    pub pos_weights: Option<PathBuf>,
    pub fusion_weights: Option<PathBuf>,
    pub lowercase_fallback: bool,
    pub methods: Vec<MethodId>,
    pub m: usize,
    pub folds: usize,
    pub seed: u64,
    pub granularity: Option<Granularity>,
    pub out: PathBuf,
    pub tune_budget: usize,
    pub tune_restarts: usize,
    pub corpora: Vec<CorpusSpec>,
}

/// Name of the merged sub-corpus column.
pub const OVERALL: &str = "Overall";

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn existing(base: &Path, p: Option<PathBuf>, what: &str) -> Result<Option<PathBuf>> {
    match p {
        None => Ok(None),
        Some(p) => {
            let p = resolve(base, p);
            if !p.is_file() {
                bail!("{what} file {} does not exist", p.display());
            }
            Ok(Some(p))
        }
    }
}

pub fn parse_methods(names: &[String]) -> Result<Vec<MethodId>> {
    let mut methods = Vec::new();
    for name in names {
        let m: MethodId = name.parse().with_context(|| format!("invalid method list entry `{name}`"))?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        bail!("the method list is empty");
    }
    Ok(methods)
}

impl RunConfig {
    pub fn load(path: &Path, overrides: Overrides) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let file: FileConfig = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));

        let methods = match overrides.methods.or(file.methods) {
            Some(names) => parse_methods(&names)?,
            None => MethodId::ALL.to_vec(),
        };
        let m = overrides.m.or(file.m).unwrap_or(1000);
        let folds = overrides.folds.or(file.folds).unwrap_or(10);
        if m == 0 {
            bail!("m must be at least 1");
        }
        if folds == 0 {
            bail!("folds must be at least 1");
        }
        let granularity = overrides
            .granularity
            .or(file.granularity)
            .map(|g| g.parse::<Granularity>())
            .transpose()?;

        let mut corpora = Vec::new();
        let mut seen = HashSet::new();
        for entry in file.corpus {
            let gran: Granularity = entry
                .granularity
                .parse()
                .with_context(|| format!("corpus `{}`", entry.name))?;
            if entry.name == OVERALL {
                bail!("corpus name `{OVERALL}` is reserved for the merged column");
            }
            if entry.name.is_empty() || entry.name.contains(['\t', '\n', '/']) {
                bail!("corpus name `{}` must be nonempty without tabs, newlines or slashes", entry.name);
            }
            if !seen.insert((entry.name.clone(), gran)) {
                bail!("corpus `{}` is listed twice at {gran} level", entry.name);
            }
            let path = existing(base, Some(entry.path), "corpus")?.expect("present");
            corpora.push(CorpusSpec {
                name: entry.name,
                path,
                granularity: gran,
            });
        }

        Ok(RunConfig {
            embeddings: existing(base, file.embeddings, "embeddings")?,
            dictionary: existing(base, file.dictionary, "dictionary")?,
            tag_mapping: existing(base, file.tag_mapping, "tag mapping")?,
            pos_weights: existing(base, file.pos_weights, "POS weights")?,
            fusion_weights: existing(base, file.fusion_weights, "fusion weights")?,
            lowercase_fallback: file.lowercase_fallback,
            methods,
            m,
            folds,
            seed: overrides.seed.or(file.seed).unwrap_or(0),
            granularity,
            out: overrides
                .out
                .or(file.out.map(|o| resolve(base, o)))
                .unwrap_or_else(|| PathBuf::from("xlsim-out")),
            tune_budget: file.tune_budget.unwrap_or(400),
            tune_restarts: file.tune_restarts.unwrap_or(3),
            corpora,
        })
    }

    /// Granularities to run, in table order.
    pub fn granularities(&self) -> Vec<Granularity> {
        [Granularity::Chunk, Granularity::Sentence]
            .into_iter()
            .filter(|g| self.granularity.is_none_or(|only| only == *g))
            .filter(|g| self.corpora.iter().any(|c| c.granularity == *g))
            .collect()
    }
}
