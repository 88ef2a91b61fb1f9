//! Synthetic corpora and embedding spaces for integration tests.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use xlsim::corpus::{AlignedPair, AlignedPairCorpus, Granularity, TaggedToken, TextualUnit, UniversalTag};
use xlsim::embeddings::EmbeddingSpace;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// `v` plus isotropic noise whose per-coordinate deviation is
/// `relative * |v| / sqrt(dim)`.
pub fn perturbed(rng: &mut impl Rng, v: &[f64], relative: f64) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sd = relative * norm / (v.len() as f64).sqrt();
    v.iter()
        .map(|x| x + sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect()
}

pub fn random_tag(rng: &mut impl Rng) -> UniversalTag {
    *UniversalTag::ALL.choose(rng).unwrap()
}

pub fn unit(id: &str, lang: &str, gran: Granularity, tokens: &[(String, UniversalTag)]) -> TextualUnit {
    let tokens = tokens
        .iter()
        .map(|(s, t)| TaggedToken::new(s.clone(), *t).unwrap())
        .collect();
    TextualUnit::new(id, lang, gran, tokens).unwrap()
}

pub fn pair(id: String, src: TextualUnit, tgt: TextualUnit) -> AlignedPair {
    AlignedPair {
        id,
        source: src,
        target: tgt,
    }
}

/// Random `en`/`fr` space of `per_lang` words each, surfaces `w0, w1, ...`.
pub fn random_space(rng: &mut impl Rng, per_lang: usize, dim: usize) -> EmbeddingSpace {
    let mut entries = Vec::new();
    for lang in ["en", "fr"] {
        for i in 0..per_lang {
            entries.push((lang.to_string(), format!("w{i}"), gaussian(rng, dim)));
        }
    }
    EmbeddingSpace::from_entries(dim, entries).unwrap()
}

/// Random unit of `len` tokens drawn from `w0..w{vocab}` (some may be out of
/// vocabulary when `vocab` exceeds the space), with random tags.
pub fn random_unit(rng: &mut impl Rng, id: &str, lang: &str, vocab: usize, len: usize) -> TextualUnit {
    let tokens: Vec<(String, UniversalTag)> = (0..len)
        .map(|_| (format!("w{}", rng.random_range(0..vocab)), random_tag(rng)))
        .collect();
    unit(id, lang, Granularity::Sentence, &tokens)
}

/// Parameters of [`parallel_corpus`].
#[derive(Debug, Clone)]
pub struct Parallel {
    pub pairs: usize,
    pub vocab: usize,
    pub dim: usize,
    /// Relative noise between an English word vector and its French twin.
    pub noise: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub granularity: Granularity,
    pub name: String,
}

impl Default for Parallel {
    fn default() -> Self {
        Parallel {
            pairs: 100,
            vocab: 2000,
            dim: 32,
            noise: 0.05,
            min_len: 5,
            max_len: 12,
            granularity: Granularity::Sentence,
            name: "synthetic".into(),
        }
    }
}

/// English words `e{i}` with random vectors and tags; French twins `f{i}`
/// whose vectors are the English ones plus relative Gaussian noise. Each
/// French unit translates its English unit word by word.
pub fn parallel_corpus(rng: &mut impl Rng, p: &Parallel) -> (EmbeddingSpace, AlignedPairCorpus) {
    let mut entries = Vec::new();
    let mut tags = Vec::new();
    for i in 0..p.vocab {
        let v = gaussian(rng, p.dim);
        let fr = perturbed(rng, &v, p.noise);
        entries.push(("en".to_string(), format!("e{i}"), v));
        entries.push(("fr".to_string(), format!("f{i}"), fr));
        tags.push(random_tag(rng));
    }
    let space = EmbeddingSpace::from_entries(p.dim, entries).unwrap();
    let pairs = (0..p.pairs)
        .map(|k| {
            let len = rng.random_range(p.min_len..=p.max_len);
            let words: Vec<usize> = (0..len).map(|_| rng.random_range(0..p.vocab)).collect();
            let en: Vec<_> = words.iter().map(|&w| (format!("e{w}"), tags[w])).collect();
            let fr: Vec<_> = words.iter().map(|&w| (format!("f{w}"), tags[w])).collect();
            let id = format!("p{k}");
            pair(id.clone(), unit(&id, "en", p.granularity, &en), unit(&id, "fr", p.granularity, &fr))
        })
        .collect();
    (space, AlignedPairCorpus::new(p.name.clone(), p.granularity, pairs).unwrap())
}

/// Only nouns carry cross-language signal: a noun and its translation share
/// a vector up to `noun_noise`, while every other tag's words have
/// unrelated random vectors in each language. All 12 tags occur.
pub fn noun_signal_corpus(rng: &mut impl Rng, pairs: usize, dim: usize, noun_noise: f64) -> (EmbeddingSpace, AlignedPairCorpus) {
    let nouns = 400;
    let others = 400;
    let mut entries = Vec::new();
    for i in 0..nouns {
        let v = gaussian(rng, dim);
        let fr = perturbed(rng, &v, noun_noise);
        entries.push(("en".to_string(), format!("n{i}"), v));
        entries.push(("fr".to_string(), format!("n{i}"), fr));
    }
    for i in 0..others {
        entries.push(("en".to_string(), format!("x{i}"), gaussian(rng, dim)));
        entries.push(("fr".to_string(), format!("x{i}"), gaussian(rng, dim)));
    }
    let space = EmbeddingSpace::from_entries(dim, entries).unwrap();
    let non_noun: Vec<UniversalTag> = UniversalTag::ALL.into_iter().filter(|t| *t != UniversalTag::Noun).collect();
    let mut units = Vec::new();
    for k in 0..pairs {
        let mut en = Vec::new();
        let mut fr = Vec::new();
        for _ in 0..3 {
            let w = format!("n{}", rng.random_range(0..nouns));
            en.push((w.clone(), UniversalTag::Noun));
            fr.push((w, UniversalTag::Noun));
        }
        for j in 0..non_noun.len() {
            let tag = non_noun[(k + j) % non_noun.len()];
            en.push((format!("x{}", rng.random_range(0..others)), tag));
            fr.push((format!("x{}", rng.random_range(0..others)), tag));
        }
        let id = format!("p{k}");
        units.push(pair(
            id.clone(),
            unit(&id, "en", Granularity::Sentence, &en),
            unit(&id, "fr", Granularity::Sentence, &fr),
        ));
    }
    (space, AlignedPairCorpus::new("noun-signal", Granularity::Sentence, units).unwrap())
}
