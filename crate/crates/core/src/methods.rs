//! Cross-language similarity scorers.
//!
//! Every scorer maps a pair of textual units to a real score, higher meaning
//! more similar. For bulk scoring (distance matrices) use [`Scorer`], which
//! turns each unit into a [`Prepared`] representation once and then scores
//! prepared pairs cheaply. The free functions (`cl_c3g`, `cl_wes`, …) go
//! through the same code path and return bitwise identical scores.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use crate::corpus::{TextualUnit, UniversalTag};
use crate::embeddings::{
    cosine_with_squared_norms, ranked_neighbors, squared_norm, unit_vector, weighted_unit_vector, EmbeddingSpace,
};
use crate::error::{Error, Result};

/// One nonnegative weight per universal POS tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosWeights([f64; UniversalTag::COUNT]);

impl PosWeights {
    pub fn new(weights: [f64; UniversalTag::COUNT]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!("POS weight {w} is not a finite nonnegative number")));
        }
        Ok(PosWeights(weights))
    }

    pub fn ones() -> Self {
        PosWeights([1.0; UniversalTag::COUNT])
    }

    pub fn zeros() -> Self {
        PosWeights([0.0; UniversalTag::COUNT])
    }

    pub fn get(&self, tag: UniversalTag) -> f64 {
        self.0[tag.index()]
    }

    pub fn set(&mut self, tag: UniversalTag, weight: f64) -> Result<()> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidWeights(format!("POS weight {weight} for {tag}")));
        }
        self.0[tag.index()] = weight;
        Ok(())
    }

    /// Weights indexed by [`UniversalTag::index`].
    pub fn as_array(&self) -> &[f64; UniversalTag::COUNT] {
        &self.0
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        PosWeights::new(self.0.map(|w| w * factor))
    }

    /// Parses `tag <TAB> weight` lines; all 12 tags must appear exactly once.
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut weights = [None; UniversalTag::COUNT];
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (tag, weight) = line
                .split_once('\t')
                .ok_or_else(|| Error::malformed(context, i + 1, "expected `tag<TAB>weight`"))?;
            let tag: UniversalTag = tag
                .trim()
                .parse()
                .map_err(|e: Error| Error::malformed(context, i + 1, e.to_string()))?;
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|e| Error::malformed(context, i + 1, format!("bad weight: {e}")))?;
            if weights[tag.index()].replace(weight).is_some() {
                return Err(Error::malformed(context, i + 1, format!("tag {tag} listed twice")));
            }
        }
        let mut out = [0.0; UniversalTag::COUNT];
        for tag in UniversalTag::ALL {
            out[tag.index()] = weights[tag.index()]
                .ok_or_else(|| Error::InvalidWeights(format!("{context}: no weight for tag {tag}")))?;
        }
        PosWeights::new(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_tsv(&self) -> String {
        UniversalTag::ALL
            .iter()
            .map(|t| format!("{}\t{}\n", t, self.get(*t)))
            .collect()
    }
}

impl Default for PosWeights {
    fn default() -> Self {
        PosWeights::ones()
    }
}

/// Translation probabilities `p(tgt | src)` for single words.
#[derive(Debug, Clone, Default)]
pub struct BilingualDictionary {
    entries: HashMap<String, HashMap<String, f64>>,
    len: usize,
}

impl BilingualDictionary {
    /// Builds a dictionary, checking that probabilities lie in `(0, 1]` and
    /// that each source word's probabilities sum to at most 1.
    pub fn from_entries<I, S, T>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T, f64)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut dict = BilingualDictionary::default();
        for (src, tgt, p) in entries {
            dict.insert(src.into(), tgt.into(), p)?;
        }
        dict.check_mass()?;
        Ok(dict)
    }

    fn insert(&mut self, src: String, tgt: String, p: f64) -> Result<()> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidDictionary(format!("p({tgt}|{src}) = {p} is outside (0, 1]")));
        }
        let row = self.entries.entry(src.clone()).or_default();
        if row.insert(tgt.clone(), p).is_some() {
            return Err(Error::InvalidDictionary(format!("duplicate entry ({src}, {tgt})")));
        }
        self.len += 1;
        Ok(())
    }

    fn check_mass(&self) -> Result<()> {
        for (src, row) in &self.entries {
            let mass: f64 = row.values().sum();
            if mass > 1.0 + 1e-6 {
                return Err(Error::InvalidDictionary(format!(
                    "probabilities for `{src}` sum to {mass}"
                )));
            }
        }
        Ok(())
    }

    /// Parses `src <TAB> tgt <TAB> probability` lines.
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut dict = BilingualDictionary::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [src, tgt, p] = fields.as_slice() else {
                return Err(Error::malformed(context, i + 1, "expected `src<TAB>tgt<TAB>probability`"));
            };
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|e| Error::malformed(context, i + 1, format!("bad probability: {e}")))?;
            dict.insert(src.to_string(), tgt.to_string(), p)
                .map_err(|e| Error::malformed(context, i + 1, e.to_string()))?;
        }
        dict.check_mass()?;
        Ok(dict)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn probability(&self, src: &str, tgt: &str) -> f64 {
        self.entries
            .get(src)
            .and_then(|row| row.get(tgt))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn translations(&self, src: &str) -> Option<&HashMap<String, f64>> {
        self.entries.get(src)
    }

    /// Number of `(src, tgt)` entries.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// The similarity methods implemented here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    ClC3g,
    ClCtsWe,
    ClWes,
    ClWess,
    ClAsa,
}

impl MethodId {
    pub const ALL: [MethodId; 5] = [
        MethodId::ClC3g,
        MethodId::ClCtsWe,
        MethodId::ClWes,
        MethodId::ClWess,
        MethodId::ClAsa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::ClC3g => "CL-C3G",
            MethodId::ClCtsWe => "CL-CTS-WE",
            MethodId::ClWes => "CL-WES",
            MethodId::ClWess => "CL-WESS",
            MethodId::ClAsa => "CL-ASA",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    /// Case-insensitive; `_` and `-` are interchangeable.
    fn from_str(s: &str) -> Result<Self> {
        let canon = s.trim().to_ascii_uppercase().replace('_', "-");
        MethodId::ALL
            .into_iter()
            .find(|m| m.name() == canon)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// How two concept bags are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BagOverlap {
    /// `|A ∩ B| / max(|A|, |B|)`
    #[default]
    Max,
    /// `|A ∩ B| / |A ∪ B|`
    Jaccard,
}

/// Which languages may supply neighbors when expanding a word into its concept bag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborScope {
    #[default]
    AllLanguages,
    SameLanguage,
    OtherLanguages,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtsParams {
    pub k: usize,
    pub overlap: BagOverlap,
    pub scope: NeighborScope,
}

impl Default for CtsParams {
    fn default() -> Self {
        CtsParams {
            k: 10,
            overlap: BagOverlap::Max,
            scope: NeighborScope::AllLanguages,
        }
    }
}

/// Gaussian length model over `|uy| / |ux|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsaParams {
    pub mu: f64,
    pub sigma: f64,
}

impl Default for AsaParams {
    fn default() -> Self {
        AsaParams { mu: 1.0, sigma: 0.3 }
    }
}

/// Everything the scorers may need. Methods only require their own resources.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub space: Option<Arc<EmbeddingSpace>>,
    pub dictionary: Option<Arc<BilingualDictionary>>,
    pub pos_weights: Option<PosWeights>,
    pub cts: CtsParams,
    pub asa: AsaParams,
}

impl Resources {
    pub fn with_space(mut self, space: EmbeddingSpace) -> Self {
        self.space = Some(Arc::new(space));
        self
    }

    pub fn with_dictionary(mut self, dictionary: BilingualDictionary) -> Self {
        self.dictionary = Some(Arc::new(dictionary));
        self
    }

    pub fn with_pos_weights(mut self, weights: PosWeights) -> Self {
        self.pos_weights = Some(weights);
        self
    }
}

/// A unit turned into whatever representation its method compares.
#[derive(Debug, Clone, PartialEq)]
pub enum Prepared {
    /// Sorted character-trigram counts and their squared norm.
    Trigrams { grams: Vec<([char; 3], u64)>, squared_norm: u64 },
    /// Sorted interned surfaces of a concept bag.
    Bag(Vec<u32>),
    Vector { values: Vec<f64>, squared_norm: f64 },
    Tokens(Vec<String>),
}

/// Lowercases, keeps letters and digits, and joins the surviving tokens with
/// single spaces.
pub fn trigram_text(unit: &TextualUnit) -> String {
    let mut out = String::new();
    for token in &unit.tokens {
        let cleaned: String = token
            .surface
            .chars()
            .flat_map(char::to_lowercase)
            .filter(|c| c.is_alphanumeric())
            .collect();
        if cleaned.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&cleaned);
    }
    out
}

fn prepare_trigrams(unit: &TextualUnit) -> Prepared {
    let chars: Vec<char> = trigram_text(unit).chars().collect();
    let mut counts: HashMap<[char; 3], u64> = HashMap::new();
    for w in chars.windows(3) {
        *counts.entry([w[0], w[1], w[2]]).or_default() += 1;
    }
    let mut grams: Vec<_> = counts.into_iter().collect();
    grams.sort_unstable();
    let squared_norm = grams.iter().map(|(_, c)| c * c).sum();
    Prepared::Trigrams { grams, squared_norm }
}

fn trigram_cosine(a: &[([char; 3], u64)], na2: u64, b: &[([char; 3], u64)], nb2: u64) -> f64 {
    if na2 == 0 || nb2 == 0 {
        return 0.0;
    }
    let (mut i, mut j, mut dot) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    (dot as f64 / ((na2 as f64) * (nb2 as f64)).sqrt()).min(1.0)
}

fn vector_prepared(values: Vec<f64>) -> Prepared {
    let squared_norm = squared_norm(&values);
    Prepared::Vector { values, squared_norm }
}

fn bag_overlap(a: &[u32], b: &[u32], overlap: BagOverlap) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let denom = match overlap {
        BagOverlap::Max => a.len().max(b.len()),
        BagOverlap::Jaccard => a.len() + b.len() - common,
    };
    common as f64 / denom as f64
}

fn asa_score(dict: &BilingualDictionary, params: &AsaParams, x: &[String], y: &[String]) -> f64 {
    if x.is_empty() || y.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for src in x {
        if let Some(row) = dict.translations(src) {
            for tgt in y {
                if let Some(p) = row.get(tgt) {
                    total += p;
                }
            }
        }
    }
    let t = total / (x.len() as f64 * y.len() as f64);
    let ratio = y.len() as f64 / x.len() as f64;
    let z = (ratio - params.mu) / params.sigma;
    t * (-0.5 * z * z).exp()
}

#[derive(Debug, Default)]
struct BagCache {
    interner: HashMap<String, u32>,
    /// entry index -> interned bag (the word plus its neighbors)
    bags: HashMap<usize, Arc<[u32]>>,
}

impl BagCache {
    fn intern(&mut self, surface: &str) -> u32 {
        if let Some(&id) = self.interner.get(surface) {
            return id;
        }
        let id = self.interner.len() as u32;
        self.interner.insert(surface.to_string(), id);
        id
    }
}

/// A method bound to its resources, able to prepare units and score
/// prepared pairs. Safe to share across threads.
#[derive(Debug)]
pub struct Scorer<'a> {
    method: MethodId,
    space: Option<&'a EmbeddingSpace>,
    dictionary: Option<&'a BilingualDictionary>,
    weights: Option<PosWeights>,
    cts: CtsParams,
    asa: AsaParams,
    cache: Mutex<BagCache>,
}

impl<'a> Scorer<'a> {
    /// Binds `method` to `resources`, failing if a required resource is absent.
    pub fn new(method: MethodId, resources: &'a Resources) -> Result<Self> {
        let need_space = || {
            resources.space.as_deref().ok_or(Error::MissingResource {
                method: method.name(),
                resource: "an embedding space",
            })
        };
        let mut scorer = Scorer {
            method,
            space: None,
            dictionary: None,
            weights: None,
            cts: resources.cts.clone(),
            asa: resources.asa.clone(),
            cache: Mutex::new(BagCache::default()),
        };
        match method {
            MethodId::ClC3g => {}
            MethodId::ClCtsWe => {
                if resources.cts.k == 0 {
                    return Err(Error::InvalidArgument("CL-CTS-WE needs k >= 1".into()));
                }
                scorer.space = Some(need_space()?);
            }
            MethodId::ClWes => scorer.space = Some(need_space()?),
            MethodId::ClWess => {
                scorer.space = Some(need_space()?);
                scorer.weights = Some(resources.pos_weights.ok_or(Error::MissingResource {
                    method: method.name(),
                    resource: "POS weights",
                })?);
            }
            MethodId::ClAsa => {
                let dict = resources.dictionary.as_deref().ok_or(Error::MissingResource {
                    method: method.name(),
                    resource: "a bilingual dictionary",
                })?;
                if dict.is_empty() {
                    return Err(Error::InvalidDictionary("CL-ASA needs a nonempty dictionary".into()));
                }
                if resources.asa.sigma.is_nan() || resources.asa.sigma <= 0.0 {
                    return Err(Error::InvalidArgument("CL-ASA sigma must be positive".into()));
                }
                scorer.dictionary = Some(dict);
            }
        }
        Ok(scorer)
    }

    pub fn method(&self) -> MethodId {
        self.method
    }

    pub fn prepare(&self, unit: &TextualUnit) -> Prepared {
        match self.method {
            MethodId::ClC3g => prepare_trigrams(unit),
            MethodId::ClCtsWe => Prepared::Bag(self.concept_bag(unit)),
            MethodId::ClWes => vector_prepared(unit_vector(self.space(), unit).values),
            MethodId::ClWess => {
                let weights = self.weights.as_ref().expect("checked in Scorer::new");
                vector_prepared(weighted_unit_vector(self.space(), unit, weights).values)
            }
            MethodId::ClAsa => Prepared::Tokens(unit.tokens.iter().map(|t| t.surface.clone()).collect()),
        }
    }

    /// Scores a prepared source (`x`) against a prepared target (`y`).
    ///
    /// # Panics
    /// If either representation was prepared by a different method.
    pub fn score(&self, x: &Prepared, y: &Prepared) -> f64 {
        match (x, y) {
            (
                Prepared::Trigrams { grams: a, squared_norm: na },
                Prepared::Trigrams { grams: b, squared_norm: nb },
            ) => trigram_cosine(a, *na, b, *nb),
            (Prepared::Bag(a), Prepared::Bag(b)) => bag_overlap(a, b, self.cts.overlap),
            (
                Prepared::Vector { values: a, squared_norm: na },
                Prepared::Vector { values: b, squared_norm: nb },
            ) => cosine_with_squared_norms(a, b, *na, *nb),
            (Prepared::Tokens(a), Prepared::Tokens(b)) => {
                asa_score(self.dictionary.expect("checked in Scorer::new"), &self.asa, a, b)
            }
            _ => panic!("{}: mismatched prepared representations", self.method),
        }
    }

    pub fn score_units(&self, ux: &TextualUnit, uy: &TextualUnit) -> f64 {
        self.score(&self.prepare(ux), &self.prepare(uy))
    }

    fn space(&self) -> &EmbeddingSpace {
        self.space.expect("checked in Scorer::new")
    }

    /// Union over in-vocabulary tokens of `{token} ∪ top-k neighbors`, as
    /// language-stripped surfaces.
    fn concept_bag(&self, unit: &TextualUnit) -> Vec<u32> {
        let space = self.space();
        let mut bag = Vec::new();
        for token in &unit.tokens {
            let Some(entry) = space.lookup(&unit.lang, &token.surface) else {
                continue;
            };
            let cached = self.cache.lock().unwrap().bags.get(&entry).cloned();
            let word_bag = match cached {
                Some(b) => b,
                None => {
                    let computed = self.word_bag(entry);
                    self.cache.lock().unwrap().bags.entry(entry).or_insert(computed).clone()
                }
            };
            bag.extend_from_slice(&word_bag);
        }
        bag.sort_unstable();
        bag.dedup();
        bag
    }

    fn word_bag(&self, entry: usize) -> Arc<[u32]> {
        let space = self.space();
        let (lang, _) = space.key(entry);
        let neighbors = ranked_neighbors(space, space.row(entry), self.cts.k, |i| {
            i != entry
                && match self.cts.scope {
                    NeighborScope::AllLanguages => true,
                    NeighborScope::SameLanguage => space.key(i).0 == lang,
                    NeighborScope::OtherLanguages => space.key(i).0 != lang,
                }
        });
        let mut cache = self.cache.lock().unwrap();
        let mut ids: Vec<u32> = std::iter::once(entry)
            .chain(neighbors.into_iter().map(|(_, i)| i))
            .map(|i| cache.intern(space.key(i).1))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into()
    }
}

/// Cosine of character-trigram count vectors of the normalized unit texts.
pub fn cl_c3g(ux: &TextualUnit, uy: &TextualUnit) -> f64 {
    match (prepare_trigrams(ux), prepare_trigrams(uy)) {
        (Prepared::Trigrams { grams: a, squared_norm: na }, Prepared::Trigrams { grams: b, squared_norm: nb }) => {
            trigram_cosine(&a, na, &b, nb)
        }
        _ => unreachable!(),
    }
}

/// Concept-bag overlap where each word expands to itself plus its `k`
/// nearest embedding neighbors.
pub fn cl_cts_we(space: &EmbeddingSpace, ux: &TextualUnit, uy: &TextualUnit, params: &CtsParams) -> f64 {
    let scorer = Scorer {
        method: MethodId::ClCtsWe,
        space: Some(space),
        dictionary: None,
        weights: None,
        cts: params.clone(),
        asa: AsaParams::default(),
        cache: Mutex::new(BagCache::default()),
    };
    scorer.score_units(ux, uy)
}

/// Cosine between the summed word vectors of the two units.
pub fn cl_wes(space: &EmbeddingSpace, ux: &TextualUnit, uy: &TextualUnit) -> f64 {
    let a = unit_vector(space, ux).values;
    let b = unit_vector(space, uy).values;
    cosine_with_squared_norms(&a, &b, squared_norm(&a), squared_norm(&b))
}

/// Cosine between POS-weighted sums of word vectors.
pub fn cl_wess(space: &EmbeddingSpace, ux: &TextualUnit, uy: &TextualUnit, weights: &PosWeights) -> f64 {
    let a = weighted_unit_vector(space, ux, weights).values;
    let b = weighted_unit_vector(space, uy, weights).values;
    cosine_with_squared_norms(&a, &b, squared_norm(&a), squared_norm(&b))
}

/// Dictionary translation score of `uy` given `ux`, normalized by
/// `|ux|·|uy|` and multiplied by a Gaussian length factor.
pub fn cl_asa(dict: &BilingualDictionary, ux: &TextualUnit, uy: &TextualUnit, params: &AsaParams) -> Result<f64> {
    if dict.is_empty() {
        return Err(Error::InvalidDictionary("CL-ASA needs a nonempty dictionary".into()));
    }
    let x: Vec<String> = ux.tokens.iter().map(|t| t.surface.clone()).collect();
    let y: Vec<String> = uy.tokens.iter().map(|t| t.surface.clone()).collect();
    Ok(asa_score(dict, params, &x, &y))
}

/// Uniform dispatch over all methods.
pub fn score_pair(method: MethodId, resources: &Resources, ux: &TextualUnit, uy: &TextualUnit) -> Result<f64> {
    Ok(Scorer::new(method, resources)?.score_units(ux, uy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Granularity;

    fn unit(lang: &str, text: &str) -> TextualUnit {
        TextualUnit::from_tagged("u", lang, Granularity::Sentence, text).unwrap()
    }

    fn space(entries: &[(&str, &str, &[f64])]) -> EmbeddingSpace {
        let dim = entries[0].2.len();
        EmbeddingSpace::from_entries(dim, entries.iter().map(|(l, s, v)| (*l, *s, v.to_vec()))).unwrap()
    }

    #[test]
    fn c3g_examples() {
        let a = unit("en", "abcd/X");
        let b = unit("fr", "bcde/X");
        assert_eq!(cl_c3g(&a, &b), 0.5);
        assert_eq!(cl_c3g(&unit("en", "aaaa/X"), &unit("fr", "bbbb/X")), 0.0);
        let s = unit("en", "The/DET cat/NOUN sat/VERB ./.");
        assert_eq!(cl_c3g(&s, &s), 1.0);
        // too short to form a trigram
        assert_eq!(cl_c3g(&unit("en", "ab/X"), &unit("fr", "ab/X")), 0.0);
    }

    #[test]
    fn trigram_text_normalizes() {
        let u = unit("en", "The/DET l'homme/NOUN ,/. 42/NUM");
        assert_eq!(trigram_text(&u), "the lhomme 42");
    }

    #[test]
    fn wes_examples() {
        let s = space(&[
            ("en", "a", &[1.0, 0.0]),
            ("en", "b", &[0.0, 1.0]),
            ("fr", "c", &[1.0, 0.0]),
        ]);
        let ux = unit("en", "a/NOUN b/NOUN");
        let uy = unit("fr", "c/NOUN");
        let c = cl_wes(&s, &ux, &uy);
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4, "{c}");
        assert_eq!(cl_wes(&s, &ux, &ux), 1.0);
        assert_eq!(cl_wes(&s, &ux, &unit("fr", "zzz/NOUN")), 0.0);
    }

    #[test]
    fn wess_examples() {
        // en:the=(1,0) en:cat=(0,1); fr:le=(1,0) fr:chat=(0.2,1)
        let s = space(&[
            ("en", "the", &[1.0, 0.0]),
            ("en", "cat", &[0.0, 1.0]),
            ("fr", "le", &[1.0, 0.0]),
            ("fr", "chat", &[0.2, 1.0]),
        ]);
        let ux = unit("en", "the/DET cat/NOUN");
        let uy = unit("fr", "le/DET chat/NOUN");
        assert_eq!(cl_wess(&s, &ux, &uy, &PosWeights::ones()), cl_wes(&s, &ux, &uy));

        // Hand computation. Ones: V_x=(1,1), V_y=(1.2,1): cos = 2.2/(sqrt2*sqrt2.44).
        let ones = 2.2 / (2.0f64.sqrt() * 2.44f64.sqrt());
        assert!((cl_wes(&s, &ux, &uy) - ones).abs() < 1e-12);
        // DET weight 0.5: V_x=(0.5,1), V_y=(0.7,1): cos = 1.35/(sqrt1.25*sqrt1.49).
        let mut w = PosWeights::ones();
        w.set(UniversalTag::Det, 0.5).unwrap();
        let half = 1.35 / (1.25f64.sqrt() * 1.49f64.sqrt());
        assert!((cl_wess(&s, &ux, &uy, &w) - half).abs() < 1e-12);
        assert!(half != ones);

        let mut w = PosWeights::ones();
        w.set(UniversalTag::Det, 0.0).unwrap();
        w.set(UniversalTag::Noun, 0.0).unwrap();
        assert_eq!(cl_wess(&s, &ux, &uy, &w), 0.0);
    }

    #[test]
    fn asa_examples() {
        let dict = BilingualDictionary::from_entries([("a", "b", 1.0), ("c", "b", 0.25), ("z", "q", 0.5)]).unwrap();
        let p = AsaParams::default();
        assert_eq!(cl_asa(&dict, &unit("en", "a/X"), &unit("fr", "b/X"), &p).unwrap(), 1.0);
        assert_eq!(cl_asa(&dict, &unit("en", "a/X"), &unit("fr", "q/X"), &p).unwrap(), 0.0);

        let dict = BilingualDictionary::from_entries([("a", "b", 0.5), ("c", "b", 0.25)]).unwrap();
        let got = cl_asa(&dict, &unit("en", "a/X c/X"), &unit("fr", "b/X"), &p).unwrap();
        // t = 0.75 / 2 = 0.375; ratio 0.5, z = -0.5/0.3
        let expected = 0.375 * (-0.5f64 * (0.5f64 / 0.3).powi(2)).exp();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.0935071).abs() < 1e-6, "{got}");

        let empty = BilingualDictionary::default();
        assert!(cl_asa(&empty, &unit("en", "a/X"), &unit("fr", "b/X"), &p).is_err());
    }

    #[test]
    fn dictionary_validation() {
        assert!(BilingualDictionary::from_entries([("a", "b", 0.0)]).is_err());
        assert!(BilingualDictionary::from_entries([("a", "b", 1.5)]).is_err());
        assert!(BilingualDictionary::from_entries([("a", "b", 0.7), ("a", "c", 0.7)]).is_err());
        let d = BilingualDictionary::parse("a\tb\t0.5\na\tc\t0.5\n", "t").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.probability("a", "c"), 0.5);
        assert!(BilingualDictionary::parse("a\tb\n", "t").is_err());
    }

    #[test]
    fn cts_identical_and_oov() {
        let s = space(&[
            ("en", "cat", &[1.0, 0.1]),
            ("en", "dog", &[0.1, 1.0]),
            ("fr", "chat", &[1.0, 0.0]),
            ("fr", "chien", &[0.0, 1.0]),
        ]);
        let p = CtsParams::default();
        let u = unit("en", "cat/NOUN dog/NOUN");
        assert_eq!(cl_cts_we(&s, &u, &u, &p), 1.0);
        let oov = unit("en", "zzz/NOUN");
        assert_eq!(cl_cts_we(&s, &oov, &unit("fr", "yyy/NOUN"), &p), 0.0);
    }

    #[test]
    fn pos_weights_file() {
        let w = PosWeights::ones().scaled(0.5).unwrap();
        let back = PosWeights::parse(&w.to_tsv(), "t").unwrap();
        assert_eq!(back, w);
        assert!(PosWeights::parse("NOUN\t1\n", "t").is_err());
        assert!(PosWeights::new([-1.0; 12]).is_err());
    }

    #[test]
    fn dispatch() {
        let resources = Resources::default();
        let a = unit("en", "hello/X world/NOUN");
        let b = unit("fr", "bonjour/X monde/NOUN");
        assert_eq!(
            score_pair(MethodId::ClC3g, &resources, &a, &b).unwrap().to_bits(),
            cl_c3g(&a, &b).to_bits()
        );
        let err = score_pair(MethodId::ClAsa, &resources, &a, &b).unwrap_err();
        assert!(matches!(err, Error::MissingResource { method: "CL-ASA", .. }));
        assert!(score_pair(MethodId::ClWes, &resources, &a, &b).is_err());

        let s = space(&[("en", "hello", &[1.0, 2.0]), ("fr", "monde", &[2.0, 1.0])]);
        let r = Resources::default().with_space(s);
        assert_eq!(score_pair(MethodId::ClWes, &r, &a, &a).unwrap(), 1.0);
        assert!(matches!(
            score_pair(MethodId::ClWess, &r, &a, &a),
            Err(Error::MissingResource { resource: "POS weights", .. })
        ));
    }

    #[test]
    fn method_names() {
        for m in MethodId::ALL {
            assert_eq!(m.name().parse::<MethodId>().unwrap(), m);
        }
        assert_eq!("cl_wess".parse::<MethodId>().unwrap(), MethodId::ClWess);
        assert!("CL-ESA".parse::<MethodId>().is_err());
    }
}
