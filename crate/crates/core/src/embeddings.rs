//! Bilingual word-embedding space, cosine similarity, nearest-neighbor
//! queries, and sentence vectors built by (optionally POS-weighted) summation.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::corpus::TextualUnit;
use crate::error::{Error, Result};
use crate::methods::PosWeights;

/// Word vectors for several languages living in one shared space.
///
/// Entries are keyed by `(lang, surface)`. The space is immutable once built.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    dim: usize,
    keys: Vec<(String, String)>,
    data: Vec<f64>,
    squared_norms: Vec<f64>,
    index: HashMap<String, HashMap<String, usize>>,
    duplicates: usize,
    lowercase_fallback: bool,
}

impl EmbeddingSpace {
    /// Builds a space from `(lang, surface, vector)` triples. A repeated key
    /// overwrites the earlier vector and increments [`duplicates`](Self::duplicates).
    pub fn from_entries<I, L, S>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (L, S, Vec<f64>)>,
        L: Into<String>,
        S: Into<String>,
    {
        let mut builder = SpaceBuilder::new(dim)?;
        for (lang, surface, values) in entries {
            builder.push(lang.into(), surface.into(), &values)?;
        }
        builder.finish()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Number of rows that repeated an earlier key while loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn languages(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.keys.iter().map(|(l, _)| l.as_str()).collect();
        set.into_iter().collect()
    }

    /// When enabled, a lookup that misses on the exact surface retries with
    /// the lowercased surface.
    pub fn with_lowercase_fallback(mut self, enabled: bool) -> Self {
        self.lowercase_fallback = enabled;
        self
    }

    pub fn lowercase_fallback(&self) -> bool {
        self.lowercase_fallback
    }

    /// Index of the entry for `(lang, surface)`, honoring the lowercase fallback.
    pub fn lookup(&self, lang: &str, surface: &str) -> Option<usize> {
        let by_surface = self.index.get(lang)?;
        if let Some(&i) = by_surface.get(surface) {
            return Some(i);
        }
        if self.lowercase_fallback {
            let lower = surface.to_lowercase();
            if lower != surface {
                return by_surface.get(&lower).copied();
            }
        }
        None
    }

    pub fn vector(&self, lang: &str, surface: &str) -> Option<&[f64]> {
        self.lookup(lang, surface).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `(lang, surface)` of entry `i`.
    pub fn key(&self, i: usize) -> (&str, &str) {
        let (l, s) = &self.keys[i];
        (l, s)
    }

    /// Writes the space in word-vector text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (i, (lang, surface)) in self.keys.iter().enumerate() {
            out.push_str(lang);
            out.push(':');
            out.push_str(surface);
            for v in self.row(i) {
                out.push(' ');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

struct SpaceBuilder {
    dim: usize,
    keys: Vec<(String, String)>,
    data: Vec<f64>,
    index: HashMap<String, HashMap<String, usize>>,
    duplicates: usize,
}

impl SpaceBuilder {
    fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be positive".into()));
        }
        Ok(SpaceBuilder {
            dim,
            keys: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
            duplicates: 0,
        })
    }

    fn push(&mut self, lang: String, surface: String, values: &[f64]) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::InvalidSpace(format!(
                "{lang}:{surface} has {} components, expected {}",
                values.len(),
                self.dim
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSpace(format!("{lang}:{surface} has non-finite value {v}")));
        }
        if lang.is_empty() {
            return Err(Error::InvalidSpace(format!("`{surface}` has an empty language prefix")));
        }
        let by_surface = self.index.entry(lang.clone()).or_default();
        match by_surface.get(&surface) {
            Some(&i) => {
                self.duplicates += 1;
                self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(values);
            }
            None => {
                by_surface.insert(surface.clone(), self.keys.len());
                self.keys.push((lang, surface));
                self.data.extend_from_slice(values);
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<EmbeddingSpace> {
        if self.index.len() < 2 {
            return Err(Error::InvalidSpace(format!(
                "a bilingual space needs at least two languages, found {}",
                self.index.len()
            )));
        }
        let squared_norms = self.data.chunks(self.dim).map(squared_norm).collect();
        if self.duplicates > 0 {
            log::warn!("{} duplicate embedding rows; last occurrence kept", self.duplicates);
        }
        Ok(EmbeddingSpace {
            dim: self.dim,
            keys: self.keys,
            data: self.data,
            squared_norms,
            index: self.index,
            duplicates: self.duplicates,
            lowercase_fallback: false,
        })
    }
}

/// Loads a word-vector text file whose tokens carry a `lang:` prefix.
///
/// The first line is `vocab_count dim`; each following line is
/// `lang:token v1 … v_dim`.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text, &path.display().to_string())
}

pub fn parse_embeddings(text: &str, context: &str) -> Result<EmbeddingSpace> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::malformed(context, 1, "missing `vocab_count dim` header"))?;
    let header: Vec<&str> = header.split_whitespace().collect();
    let parse_usize = |s: &str| s.parse::<usize>().ok();
    let (count, dim) = match header.as_slice() {
        [c, d] => match (parse_usize(c), parse_usize(d)) {
            (Some(c), Some(d)) => (c, d),
            _ => return Err(Error::malformed(context, 1, "header must be two integers")),
        },
        _ => return Err(Error::malformed(context, 1, "header must be `vocab_count dim`")),
    };
    let mut builder = SpaceBuilder::new(dim).map_err(|e| Error::malformed(context, 1, e.to_string()))?;
    let mut rows = 0;
    for (i, line) in lines {
        let lineno = i + 1;
        let mut parts = line.split_whitespace();
        let token = parts.next().unwrap_or_default();
        let (lang, surface) = token
            .split_once(':')
            .filter(|(l, s)| !l.is_empty() && !s.is_empty())
            .ok_or_else(|| Error::malformed(context, lineno, format!("token `{token}` lacks a `lang:` prefix")))?;
        let values = parts
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::malformed(context, lineno, format!("bad number: {e}")))?;
        if values.len() != dim {
            return Err(Error::malformed(
                context,
                lineno,
                format!("dimension mismatch: {} values, header says {dim}", values.len()),
            ));
        }
        builder
            .push(lang.to_string(), surface.to_string(), &values)
            .map_err(|e| Error::malformed(context, lineno, e.to_string()))?;
        rows += 1;
    }
    if rows != count {
        return Err(Error::malformed(
            context,
            1,
            format!("header declares {count} rows, file has {rows}"),
        ));
    }
    builder.finish()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn squared_norm(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Cosine from precomputed squared norms. `sqrt(x * x) == x` exactly in
/// binary floating point, so identical vectors score exactly 1.
pub(crate) fn cosine_with_squared_norms(a: &[f64], b: &[f64], na2: f64, nb2: f64) -> f64 {
    if na2 == 0.0 || nb2 == 0.0 {
        return 0.0;
    }
    let product = na2 * nb2;
    let denom = if product == 0.0 || product.is_infinite() {
        na2.sqrt() * nb2.sqrt()
    } else {
        product.sqrt()
    };
    (dot(a, b) / denom).clamp(-1.0, 1.0)
}

/// Cosine similarity, clamped to `[-1, 1]`. Zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(cosine_with_squared_norms(a, b, squared_norm(a), squared_norm(b)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub lang: String,
    pub surface: String,
    pub cosine: f64,
}

/// The `k` entries most cosine-similar to `query`, best first.
///
/// `lang_filter` restricts candidates to one language; `exclude` drops one
/// exact `(lang, surface)` key, typically the query word itself. Equal
/// cosines are ordered by `(lang, surface)`.
pub fn top_k_neighbors(
    space: &EmbeddingSpace,
    query: &[f64],
    k: usize,
    lang_filter: Option<&str>,
    exclude: Option<(&str, &str)>,
) -> Result<Vec<Neighbor>> {
    if space.is_empty() {
        return Err(Error::InvalidSpace("empty space".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if query.len() != space.dim {
        return Err(Error::LengthMismatch {
            left: query.len(),
            right: space.dim,
        });
    }
    let excluded = exclude.and_then(|(l, s)| space.index.get(l).and_then(|m| m.get(s)).copied());
    Ok(ranked_neighbors(space, query, k, |i| {
        Some(i) != excluded && lang_filter.is_none_or(|l| space.keys[i].0 == l)
    })
    .into_iter()
    .map(|(cosine, i)| Neighbor {
        lang: space.keys[i].0.clone(),
        surface: space.keys[i].1.clone(),
        cosine,
    })
    .collect())
}

/// `(cosine, entry index)` of the best `k` entries accepted by `keep`.
pub(crate) fn ranked_neighbors(
    space: &EmbeddingSpace,
    query: &[f64],
    k: usize,
    keep: impl Fn(usize) -> bool,
) -> Vec<(f64, usize)> {
    let qn2 = squared_norm(query);
    let mut scored: Vec<(f64, usize)> = (0..space.len())
        .filter(|&i| keep(i))
        .map(|i| (cosine_with_squared_norms(query, space.row(i), qn2, space.squared_norms[i]), i))
        .collect();

    let order = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
        b.0.total_cmp(&a.0)
            .then_with(|| space.keys[a.1].cmp(&space.keys[b.1]))
    };
    if k == 0 {
        return Vec::new();
    }
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, order);
        scored.truncate(k);
    }
    scored.sort_by(order);
    scored
}

/// A textual unit's aggregated vector and how many of its tokens were found.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    pub values: Vec<f64>,
    pub n_known: usize,
}

impl UnitVector {
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Sum of the vectors of the unit's in-vocabulary tokens. Unknown tokens
/// contribute nothing.
pub fn unit_vector(space: &EmbeddingSpace, unit: &TextualUnit) -> UnitVector {
    let mut values = vec![0.0; space.dim];
    let mut n_known = 0;
    for token in &unit.tokens {
        if let Some(v) = space.vector(&unit.lang, &token.surface) {
            for (acc, x) in values.iter_mut().zip(v) {
                *acc += x;
            }
            n_known += 1;
        }
    }
    UnitVector { values, n_known }
}

/// Sum of `weight(pos(token)) · vector(token)` over in-vocabulary tokens.
///
/// With every weight equal to 1 this is bitwise identical to [`unit_vector`].
pub fn weighted_unit_vector(space: &EmbeddingSpace, unit: &TextualUnit, weights: &PosWeights) -> UnitVector {
    let mut values = vec![0.0; space.dim];
    let mut n_known = 0;
    for token in &unit.tokens {
        if let Some(v) = space.vector(&unit.lang, &token.surface) {
            let w = weights.get(token.upos);
            for (acc, x) in values.iter_mut().zip(v) {
                *acc += w * x;
            }
            n_known += 1;
        }
    }
    UnitVector { values, n_known }
}
