//! On-disk fixtures and a runner for the `xlsim` binary.
#![allow(dead_code)]

#[path = "../../../core/tests/common/mod.rs"]
pub mod synth;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::Rng;
use xlsim::corpus::{AlignedPairCorpus, Granularity, UniversalTag};
use xlsim::embeddings::EmbeddingSpace;

pub use synth::*;

pub fn xlsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xlsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run xlsim")
}

pub fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "xlsim failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
}

impl Fixture {
    pub fn new() -> Self {
        Fixture {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn write(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path().join(name);
        fs::write(&p, contents).unwrap();
        p
    }

    pub fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.path().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
    }

    pub fn run(&self, args: &[&str]) -> Output {
        xlsim(self.path(), args)
    }
}

/// Config text referencing the given files (relative to the fixture dir).
pub fn config(embeddings: Option<&str>, dictionary: Option<&str>, corpora: &[(&str, &str, Granularity)], extra: &str) -> String {
    let mut s = String::new();
    if let Some(e) = embeddings {
        let _ = writeln!(s, "embeddings = \"{e}\"");
    }
    if let Some(d) = dictionary {
        let _ = writeln!(s, "dictionary = \"{d}\"");
    }
    s.push_str(extra);
    s.push('\n');
    for (name, path, gran) in corpora {
        let _ = writeln!(s, "[[corpus]]\nname = \"{name}\"\npath = \"{path}\"\ngranularity = \"{gran}\"\n");
    }
    s
}

/// `e{i} -> f{i}` with probability 0.9 for every English word in the corpora.
pub fn twin_dictionary(corpora: &[&AlignedPairCorpus]) -> String {
    let mut words: Vec<String> = corpora
        .iter()
        .flat_map(|c| c.pairs.iter().flat_map(|p| p.source.tokens.iter().map(|t| t.surface.clone())))
        .collect();
    words.sort();
    words.dedup();
    words
        .iter()
        .map(|w| format!("{w}\t{}\t0.9\n", w.replacen('e', "f", 1)))
        .collect()
}

/// French surface of translation word `i`, with digits unrelated to `e{i}`.
fn scrambled(i: usize) -> String {
    format!("f{}", (i * 7919 + 13) % 10007)
}

/// A space and corpus where half the pairs are cognates (identical surfaces,
/// unrelated vectors) and half are translations with twin vectors but
/// unrelated surfaces. Character trigrams see the first half, embeddings the
/// second.
pub fn complementary_corpus(rng: &mut impl Rng, pairs: usize, dim: usize) -> (EmbeddingSpace, AlignedPairCorpus) {
    let vocab = 600;
    let mut entries = Vec::new();
    for i in 0..vocab {
        let v = gaussian(rng, dim);
        let twin = perturbed(rng, &v, 0.05);
        entries.push(("en".to_string(), format!("e{i}"), v));
        entries.push(("fr".to_string(), scrambled(i), twin));
        entries.push(("en".to_string(), format!("cog{i}x"), gaussian(rng, dim)));
        entries.push(("fr".to_string(), format!("cog{i}x"), gaussian(rng, dim)));
    }
    let space = EmbeddingSpace::from_entries(dim, entries).unwrap();
    let gran = Granularity::Sentence;
    let units = (0..pairs)
        .map(|k| {
            let len = rng.random_range(5..9);
            let words: Vec<usize> = (0..len).map(|_| rng.random_range(0..vocab)).collect();
            let (en, fr): (Vec<_>, Vec<_>) = if k % 2 == 0 {
                words
                    .iter()
                    .map(|w| ((format!("cog{w}x"), UniversalTag::Noun), (format!("cog{w}x"), UniversalTag::Noun)))
                    .unzip()
            } else {
                words
                    .iter()
                    .map(|w| ((format!("e{w}"), UniversalTag::Noun), (scrambled(*w), UniversalTag::Noun)))
                    .unzip()
            };
            let id = format!("p{k}");
            pair(id.clone(), unit(&id, "en", gran, &en), unit(&id, "fr", gran, &fr))
        })
        .collect();
    (space, AlignedPairCorpus::new("complementary", gran, units).unwrap())
}

/// Report rows as `(method, corpus, granularity) -> (mean_f1, half_width, folds)`.
pub fn report_rows(tsv: &str) -> Vec<(String, String, String, f64, f64, usize)> {
    tsv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (
                f[0].to_string(),
                f[1].to_string(),
                f[2].to_string(),
                f[3].parse().unwrap(),
                f[4].parse().unwrap(),
                f[5].parse().unwrap(),
            )
        })
        .collect()
}

/// Several sub-corpora at both granularities over one shared space, with
/// surfaces `e{i}` / `f{i}` so a twin dictionary applies.
pub fn table_dataset(rng: &mut impl Rng, names: &[&str], pairs_per: usize) -> (EmbeddingSpace, Vec<AlignedPairCorpus>) {
    let total = names.len() * pairs_per;
    let (space, all) = parallel_corpus(
        rng,
        &Parallel {
            pairs: total,
            vocab: 1500,
            dim: 24,
            noise: 0.6,
            min_len: 6,
            max_len: 14,
            ..Default::default()
        },
    );
    let mut out = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let slice = &all.pairs[i * pairs_per..(i + 1) * pairs_per];
        out.push(AlignedPairCorpus::new(*name, Granularity::Sentence, slice.to_vec()).unwrap());
        let chunks = slice
            .iter()
            .map(|p| {
                let n = (p.source.tokens.len() / 2).max(2);
                let mut s = p.source.clone();
                let mut t = p.target.clone();
                s.tokens.truncate(n);
                t.tokens.truncate(n);
                s.granularity = Granularity::Chunk;
                t.granularity = Granularity::Chunk;
                pair(p.id.clone(), s, t)
            })
            .collect();
        out.push(AlignedPairCorpus::new(*name, Granularity::Chunk, chunks).unwrap());
    }
    (space, out)
}
