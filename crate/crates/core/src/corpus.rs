//! Aligned cross-language corpora of pre-tokenized, POS-tagged textual units.
//!
//! The on-disk format is one aligned pair per line, five tab-separated fields:
//!
//! ```text
//! id <TAB> src_lang <TAB> src_tokens <TAB> tgt_lang <TAB> tgt_tokens
//! ```
//!
//! Tokens are space-separated `surface/TAG` items. The last `/` of an item
//! separates the tag, so `1/2/NUM` has surface `1/2`. Lines starting with `#`
//! are comments.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The 12 categories of the Universal Tagset.
///
/// `Punct` is written `.` in files, following the published tagset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UniversalTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Num,
    Conj,
    Prt,
    Punct,
    X,
}

impl UniversalTag {
    pub const COUNT: usize = 12;

    /// All tags in declaration order. `ALL[t.index()] == t`.
    pub const ALL: [UniversalTag; 12] = [
        UniversalTag::Noun,
        UniversalTag::Verb,
        UniversalTag::Adj,
        UniversalTag::Adv,
        UniversalTag::Pron,
        UniversalTag::Det,
        UniversalTag::Adp,
        UniversalTag::Num,
        UniversalTag::Conj,
        UniversalTag::Prt,
        UniversalTag::Punct,
        UniversalTag::X,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UniversalTag::Noun => "NOUN",
            UniversalTag::Verb => "VERB",
            UniversalTag::Adj => "ADJ",
            UniversalTag::Adv => "ADV",
            UniversalTag::Pron => "PRON",
            UniversalTag::Det => "DET",
            UniversalTag::Adp => "ADP",
            UniversalTag::Num => "NUM",
            UniversalTag::Conj => "CONJ",
            UniversalTag::Prt => "PRT",
            UniversalTag::Punct => ".",
            UniversalTag::X => "X",
        }
    }
}

impl fmt::Display for UniversalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UniversalTag {
    type Err = Error;

    /// Accepts the canonical spellings plus `PUNCT` as an alias for `.`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "NOUN" => UniversalTag::Noun,
            "VERB" => UniversalTag::Verb,
            "ADJ" => UniversalTag::Adj,
            "ADV" => UniversalTag::Adv,
            "PRON" => UniversalTag::Pron,
            "DET" => UniversalTag::Det,
            "ADP" => UniversalTag::Adp,
            "NUM" => UniversalTag::Num,
            "CONJ" => UniversalTag::Conj,
            "PRT" => UniversalTag::Prt,
            "." | "PUNCT" => UniversalTag::Punct,
            "X" => UniversalTag::X,
            other => return Err(Error::UnknownTag(other.to_string())),
        })
    }
}

/// Textual unit granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Granularity {
    Chunk,
    Sentence,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Chunk => "chunk",
            Granularity::Sentence => "sentence",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chunk" | "chunks" => Ok(Granularity::Chunk),
            "sentence" | "sentences" => Ok(Granularity::Sentence),
            other => Err(Error::InvalidArgument(format!("unknown granularity `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaggedToken {
    pub surface: String,
    pub upos: UniversalTag,
}

impl TaggedToken {
    pub fn new(surface: impl Into<String>, upos: UniversalTag) -> Result<Self> {
        let surface = surface.into();
        validate_surface(&surface)?;
        Ok(TaggedToken { surface, upos })
    }
}

impl fmt::Display for TaggedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.surface, self.upos)
    }
}

fn validate_surface(surface: &str) -> Result<()> {
    if surface.is_empty() {
        return Err(Error::InvalidCorpus("empty token surface".into()));
    }
    if surface.chars().any(char::is_whitespace) {
        return Err(Error::InvalidCorpus(format!(
            "token surface {surface:?} contains whitespace"
        )));
    }
    Ok(())
}

/// A chunk or sentence: an ordered, nonempty list of tagged tokens in one language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextualUnit {
    pub id: String,
    pub lang: String,
    pub granularity: Granularity,
    pub tokens: Vec<TaggedToken>,
}

impl TextualUnit {
    pub fn new(
        id: impl Into<String>,
        lang: impl Into<String>,
        granularity: Granularity,
        tokens: Vec<TaggedToken>,
    ) -> Result<Self> {
        let unit = TextualUnit {
            id: id.into(),
            lang: lang.into(),
            granularity,
            tokens,
        };
        if unit.tokens.is_empty() {
            return Err(Error::InvalidCorpus(format!("unit `{}` has no tokens", unit.id)));
        }
        validate_lang(&unit.lang)?;
        Ok(unit)
    }

    /// Builds a unit from `surface/TAG` items separated by spaces.
    pub fn from_tagged(
        id: impl Into<String>,
        lang: impl Into<String>,
        granularity: Granularity,
        text: &str,
    ) -> Result<Self> {
        let tokens = parse_tokens(text, None)?;
        TextualUnit::new(id, lang, granularity, tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn tokens_field(&self) -> String {
        let items: Vec<String> = self.tokens.iter().map(ToString::to_string).collect();
        items.join(" ")
    }
}

fn validate_lang(lang: &str) -> Result<()> {
    if lang.is_empty() || !lang.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(Error::InvalidCorpus(format!("invalid language code {lang:?}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedPair {
    pub id: String,
    pub source: TextualUnit,
    pub target: TextualUnit,
}

/// A named sub-corpus of aligned cross-language unit pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedPairCorpus {
    pub name: String,
    pub granularity: Granularity,
    pub pairs: Vec<AlignedPair>,
}

impl AlignedPairCorpus {
    /// Validates pair-level invariants: distinct languages within a pair, one
    /// language combination for the whole corpus, and unique ids.
    pub fn new(name: impl Into<String>, granularity: Granularity, pairs: Vec<AlignedPair>) -> Result<Self> {
        let corpus = AlignedPairCorpus {
            name: name.into(),
            granularity,
            pairs,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let mut langs: Option<(&str, &str)> = None;
        for pair in &self.pairs {
            if !seen.insert(pair.id.as_str()) {
                return Err(Error::InvalidCorpus(format!("duplicate pair id `{}`", pair.id)));
            }
            let combo = (pair.source.lang.as_str(), pair.target.lang.as_str());
            if combo.0 == combo.1 {
                return Err(Error::InvalidCorpus(format!(
                    "pair `{}` has the same language `{}` on both sides",
                    pair.id, combo.0
                )));
            }
            match langs {
                None => langs = Some(combo),
                Some(expected) if expected != combo => {
                    return Err(Error::InvalidCorpus(format!(
                        "pair `{}` is {}-{}, corpus is {}-{}",
                        pair.id, combo.0, combo.1, expected.0, expected.1
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(source_lang, target_lang)`, or `None` for an empty corpus.
    pub fn languages(&self) -> Option<(&str, &str)> {
        self.pairs
            .first()
            .map(|p| (p.source.lang.as_str(), p.target.lang.as_str()))
    }

    /// Concatenates several corpora into one. Pair ids are prefixed with the
    /// originating corpus name to keep them unique.
    pub fn merged(name: impl Into<String>, parts: &[&AlignedPairCorpus]) -> Result<Self> {
        let granularity = parts
            .first()
            .map(|c| c.granularity)
            .ok_or_else(|| Error::InvalidArgument("no corpora to merge".into()))?;
        let mut pairs = Vec::new();
        for part in parts {
            if part.granularity != granularity {
                return Err(Error::InvalidArgument(
                    "cannot merge corpora of different granularities".into(),
                ));
            }
            for pair in &part.pairs {
                let id = format!("{}/{}", part.name, pair.id);
                let mut source = pair.source.clone();
                let mut target = pair.target.clone();
                source.id = id.clone();
                target.id = id.clone();
                pairs.push(AlignedPair { id, source, target });
            }
        }
        AlignedPairCorpus::new(name, granularity, pairs)
    }

    /// Renders the corpus in the aligned-pairs file format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for pair in &self.pairs {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                pair.id,
                pair.source.lang,
                pair.source.tokens_field(),
                pair.target.lang,
                pair.target.tokens_field()
            ));
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }
}

/// Maps a raw tagset (e.g. Penn Treebank or TreeTagger tags) onto the
/// Universal Tagset.
#[derive(Debug, Clone, Default)]
pub struct TagMapping {
    map: HashMap<String, UniversalTag>,
}

impl TagMapping {
    /// Reads `raw_tag <TAB> universal_tag` lines. Blank lines are skipped;
    /// there is no comment syntax because `#` is itself a common raw tag.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (raw, universal) = line
                .split_once('\t')
                .ok_or_else(|| Error::malformed(context, i + 1, "expected `raw_tag<TAB>universal_tag`"))?;
            let tag = universal
                .trim()
                .parse::<UniversalTag>()
                .map_err(|e| Error::malformed(context, i + 1, e.to_string()))?;
            map.insert(raw.trim().to_string(), tag);
        }
        Ok(TagMapping { map })
    }

    pub fn get(&self, raw: &str) -> Option<UniversalTag> {
        self.map.get(raw).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl FromIterator<(String, UniversalTag)> for TagMapping {
    fn from_iter<I: IntoIterator<Item = (String, UniversalTag)>>(iter: I) -> Self {
        TagMapping {
            map: iter.into_iter().collect(),
        }
    }
}

/// Looks a raw tag up in `mapping`. Tags absent from the mapping are an error
/// rather than being folded into `X`.
pub fn normalize_tag(raw: &str, mapping: &TagMapping) -> Result<UniversalTag> {
    mapping
        .get(raw)
        .ok_or_else(|| Error::UnknownTag(raw.to_string()))
}

fn parse_tokens(field: &str, mapping: Option<&TagMapping>) -> Result<Vec<TaggedToken>> {
    field
        .split(' ')
        .filter(|item| !item.is_empty())
        .map(|item| {
            let (surface, raw_tag) = item
                .rsplit_once('/')
                .ok_or_else(|| Error::InvalidCorpus(format!("token `{item}` lacks a `/TAG` suffix")))?;
            let upos = match mapping {
                Some(m) => normalize_tag(raw_tag, m)?,
                None => raw_tag.parse()?,
            };
            TaggedToken::new(surface, upos)
        })
        .collect()
}

/// Parses an aligned-pairs file; the corpus is named after the file stem.
pub fn parse_corpus(path: impl AsRef<Path>, granularity: Granularity) -> Result<AlignedPairCorpus> {
    CorpusReader::new(granularity).read(path)
}

/// Corpus parser with an optional raw-tag mapping.
///
/// Without a mapping, tags must already be Universal Tagset names.
#[derive(Debug, Clone)]
pub struct CorpusReader<'a> {
    granularity: Granularity,
    mapping: Option<&'a TagMapping>,
}

impl<'a> CorpusReader<'a> {
    pub fn new(granularity: Granularity) -> Self {
        CorpusReader {
            granularity,
            mapping: None,
        }
    }

    pub fn with_mapping(mut self, mapping: &'a TagMapping) -> Self {
        self.mapping = Some(mapping);
        self
    }

    pub fn read(&self, path: impl AsRef<Path>) -> Result<AlignedPairCorpus> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.parse_str(name, &text, &path.display().to_string())
    }

    pub fn parse_str(&self, name: impl Into<String>, text: &str, context: &str) -> Result<AlignedPairCorpus> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let pair = self
                .parse_line(line)
                .map_err(|e| Error::malformed(context, lineno, e.to_string()))?;
            pairs.push(pair);
        }
        AlignedPairCorpus::new(name, self.granularity, pairs)
    }

    fn parse_line(&self, line: &str) -> Result<AlignedPair> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::InvalidCorpus(format!(
                "expected 5 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(Error::InvalidCorpus("empty pair id".into()));
        }
        let unit = |lang: &str, toks: &str, side: &str| -> Result<TextualUnit> {
            let tokens = parse_tokens(toks, self.mapping)?;
            if tokens.is_empty() {
                return Err(Error::InvalidCorpus(format!("empty {side} unit")));
            }
            TextualUnit::new(id, lang.trim(), self.granularity, tokens)
        };
        let source = unit(fields[1], fields[2], "source")?;
        let target = unit(fields[3], fields[4], "target")?;
        Ok(AlignedPair {
            id: id.to_string(),
            source,
            target,
        })
    }
}
