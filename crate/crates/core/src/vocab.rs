//! Vocabularies, coverage and type-count compression.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::encode::{encode_factors, Scheme};
use crate::morph::AnalyzedSentence;
use crate::token::{TagMap, Token};

/// Unknown-word token and end-of-sentence marker.
pub const DEFAULT_RESERVED: usize = 2;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("vocabulary size {size_limit} leaves no room beside {reserved} reserved symbols")]
    LimitTooSmall { size_limit: usize, reserved: usize },
    #[error("vocabulary line {line}: {reason}")]
    BadRow { line: usize, reason: String },
    #[error("cannot access vocabulary {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Token frequencies of a corpus, remembering which types are special tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenCounts {
    pub counts: BTreeMap<String, u64>,
    pub special: BTreeSet<String>,
}

impl TokenCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &str, special: bool) {
        *self.counts.entry(token.to_owned()).or_default() += 1;
        if special && !self.special.contains(token) {
            self.special.insert(token.to_owned());
        }
    }

    pub fn add_tokens(&mut self, tokens: &[Token], map: &TagMap) {
        for t in tokens {
            self.add(&map.render(t), t.is_special());
        }
    }

    /// Counts whitespace-separated words of an already rendered line.
    pub fn add_line(&mut self, line: &str) {
        for w in line.split_whitespace() {
            self.add(w, false);
        }
    }

    /// Counts the tokens `scheme` produces for `s`. The factor scheme
    /// contributes its lemma factor.
    pub fn add_sentence(&mut self, s: &AnalyzedSentence, scheme: Scheme, map: &TagMap) {
        match scheme.encode(s) {
            Some(tokens) => self.add_tokens(&tokens, map),
            None => {
                for f in encode_factors(s) {
                    self.add(&f.lemma, false);
                }
            }
        }
    }

    pub fn from_corpus<'a>(
        corpus: impl IntoIterator<Item = &'a AnalyzedSentence>,
        scheme: Scheme,
        map: &TagMap,
    ) -> Self {
        let mut c = TokenCounts::new();
        for s in corpus {
            c.add_sentence(s, scheme, map);
        }
        c
    }

    pub fn merge(&mut self, other: TokenCounts) {
        for (t, n) in other.counts {
            *self.counts.entry(t).or_default() += n;
        }
        self.special.extend(other.special);
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn running(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Top-k tokens by count, ties by token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    size_limit: usize,
    reserved: usize,
    members: HashSet<String>,
}

fn vocab_order(a: &(String, u64), b: &(String, u64)) -> std::cmp::Ordering {
    b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

impl Vocabulary {
    fn from_entries(mut entries: Vec<(String, u64)>, size_limit: usize, reserved: usize) -> Self {
        entries.sort_by(vocab_order);
        entries.truncate(size_limit.saturating_sub(reserved));
        let members = entries.iter().map(|(t, _)| t.clone()).collect();
        Vocabulary {
            entries,
            size_limit,
            reserved,
            members,
        }
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn size_limit(&self) -> usize {
        self.size_limit
    }

    pub fn reserved(&self) -> usize {
        self.reserved
    }

    pub fn contains(&self, token: &str) -> bool {
        self.members.contains(token)
    }

    /// `token<TAB>count` lines, most frequent first.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (t, n) in &self.entries {
            writeln!(out, "{t}\t{n}").expect("writing to a String cannot fail");
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), VocabError> {
        fs::write(path, self.to_tsv()).map_err(|source| VocabError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Reads a vocabulary file; its size limit is the entry count plus
    /// `reserved`.
    pub fn parse(text: &str, reserved: usize) -> Result<Self, VocabError> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.strip_suffix('\r').unwrap_or(raw);
            if row.is_empty() {
                continue;
            }
            let bad = |reason: String| VocabError::BadRow { line, reason };
            let Some((token, count)) = row.rsplit_once('\t') else {
                return Err(bad("expected token<TAB>count".into()));
            };
            let count: u64 = count
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| bad(format!("invalid count {count:?}")))?;
            if token.is_empty() || !seen.insert(token.to_owned()) {
                return Err(bad(format!("empty or duplicate token {token:?}")));
            }
            entries.push((token.to_owned(), count));
        }
        let limit = entries.len() + reserved;
        Ok(Self::from_entries(entries, limit, reserved))
    }

    pub fn load(path: &Path, reserved: usize) -> Result<Self, VocabError> {
        let text = fs::read_to_string(path).map_err(|source| VocabError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, reserved)
    }
}

/// Keeps the `size_limit - reserved` most frequent tokens.
pub fn build_vocab(
    counts: &TokenCounts,
    size_limit: usize,
    reserved: usize,
) -> Result<Vocabulary, VocabError> {
    if size_limit <= reserved {
        return Err(VocabError::LimitTooSmall {
            size_limit,
            reserved,
        });
    }
    if counts.counts.is_empty() {
        return Err(VocabError::EmptyCorpus);
    }
    let entries = counts
        .counts
        .iter()
        .map(|(t, &n)| (t.clone(), n))
        .collect();
    Ok(Vocabulary::from_entries(entries, size_limit, reserved))
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub scheme: Scheme,
    pub type_coverage: f64,
    pub token_coverage: f64,
    pub distinct_types: usize,
    pub oov_types: usize,
    pub running_tokens: u64,
    pub oov_tokens: u64,
    pub special_token_count: usize,
}

impl CoverageReport {
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let s = self.scheme;
        writeln!(out, "{s}.type_coverage={:.6}", self.type_coverage).ok();
        writeln!(out, "{s}.token_coverage={:.6}", self.token_coverage).ok();
        writeln!(out, "{s}.distinct_types={}", self.distinct_types).ok();
        writeln!(out, "{s}.oov_types={}", self.oov_types).ok();
        writeln!(out, "{s}.running_tokens={}", self.running_tokens).ok();
        writeln!(out, "{s}.oov_tokens={}", self.oov_tokens).ok();
        writeln!(out, "{s}.special_types={}", self.special_token_count).ok();
        out
    }
}

/// In-vocabulary rates of `corpus` by type and by running token.
pub fn coverage(v: &Vocabulary, corpus: &TokenCounts, scheme: Scheme) -> CoverageReport {
    let mut covered_types = 0u64;
    let mut covered_tokens = 0u64;
    for (t, &n) in &corpus.counts {
        if v.contains(t) {
            covered_types += 1;
            covered_tokens += n;
        }
    }
    let distinct = corpus.distinct();
    let running = corpus.running();
    CoverageReport {
        scheme,
        type_coverage: ratio(covered_types, distinct as u64),
        token_coverage: ratio(covered_tokens, running),
        distinct_types: distinct,
        oov_types: distinct - covered_types as usize,
        running_tokens: running,
        oov_tokens: running - covered_tokens,
        special_token_count: corpus.special.len(),
    }
}

/// Type count of an encoded corpus against its baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub baseline_types: usize,
    pub encoded_types: usize,
}

impl RatioReport {
    pub fn new(baseline_types: usize, encoded_types: usize) -> Self {
        RatioReport {
            baseline_types,
            encoded_types,
        }
    }

    /// encoded / baseline.
    pub fn retained(&self) -> f64 {
        ratio(self.encoded_types as u64, self.baseline_types as u64)
    }

    /// 1 - encoded / baseline.
    pub fn reduction(&self) -> f64 {
        if self.baseline_types == 0 {
            0.0
        } else {
            1.0 - self.retained()
        }
    }
}

pub fn compression_ratio(baseline: &TokenCounts, encoded: &TokenCounts) -> RatioReport {
    RatioReport::new(baseline.distinct(), encoded.distinct())
}

/// Whole-vocabulary and predicate-only compression of one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionReport {
    pub scheme: Scheme,
    pub all: RatioReport,
    /// Distinct predicate surfaces against distinct predicate lemmas.
    pub predicates: RatioReport,
    pub special_types: usize,
}

impl CompressionReport {
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let s = self.scheme;
        for (name, r) in [("all", &self.all), ("predicate", &self.predicates)] {
            writeln!(out, "{s}.{name}.baseline_types={}", r.baseline_types).ok();
            writeln!(out, "{s}.{name}.encoded_types={}", r.encoded_types).ok();
            writeln!(out, "{s}.{name}.reduced_by={:.6}", r.reduction()).ok();
            writeln!(out, "{s}.{name}.retained={:.6}", r.retained()).ok();
        }
        writeln!(out, "{s}.special_types={}", self.special_types).ok();
        out
    }
}

/// Token counts under every scheme plus predicate surface and lemma sets,
/// accumulated in one pass.
#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    pub by_scheme: BTreeMap<&'static str, TokenCounts>,
    predicate_surfaces: BTreeSet<String>,
    predicate_lemmas: BTreeSet<String>,
}

impl CorpusStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, s: &AnalyzedSentence, map: &TagMap) {
        for scheme in Scheme::ALL {
            self.by_scheme
                .entry(scheme.name())
                .or_default()
                .add_sentence(s, scheme, map);
        }
        for m in s.morphemes.iter().filter(|m| m.is_predicate()) {
            if !self.predicate_surfaces.contains(&m.surface) {
                self.predicate_surfaces.insert(m.surface.clone());
            }
            if !self.predicate_lemmas.contains(&m.lemma) {
                self.predicate_lemmas.insert(m.lemma.clone());
            }
        }
    }

    pub fn merge(&mut self, other: CorpusStats) {
        for (name, counts) in other.by_scheme {
            self.by_scheme.entry(name).or_default().merge(counts);
        }
        self.predicate_surfaces.extend(other.predicate_surfaces);
        self.predicate_lemmas.extend(other.predicate_lemmas);
    }

    pub fn counts(&self, scheme: Scheme) -> TokenCounts {
        self.by_scheme.get(scheme.name()).cloned().unwrap_or_default()
    }

    pub fn compression(&self, scheme: Scheme) -> CompressionReport {
        let empty = TokenCounts::new();
        let baseline = self.by_scheme.get(Scheme::Baseline.name()).unwrap_or(&empty);
        let encoded = self.by_scheme.get(scheme.name()).unwrap_or(&empty);
        let predicate_types = if scheme == Scheme::Baseline {
            self.predicate_surfaces.len()
        } else {
            self.predicate_lemmas.len()
        };
        CompressionReport {
            scheme,
            all: compression_ratio(baseline, encoded),
            predicates: RatioReport::new(self.predicate_surfaces.len(), predicate_types),
            special_types: encoded.special.len(),
        }
    }
}

pub fn compression_report(
    corpus: &[AnalyzedSentence],
    scheme: Scheme,
    map: &TagMap,
) -> CompressionReport {
    let mut stats = CorpusStats::new();
    for s in corpus {
        stats.add(s, map);
    }
    stats.compression(scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morph::Morpheme;

    fn counts(pairs: &[(&str, u64)]) -> TokenCounts {
        let mut c = TokenCounts::new();
        for &(t, n) in pairs {
            for _ in 0..n {
                c.add(t, false);
            }
        }
        c
    }

    #[test]
    fn top_k_by_count() {
        let c = counts(&[("a", 3), ("b", 2), ("c", 1)]);
        let v = build_vocab(&c, 2 + DEFAULT_RESERVED, DEFAULT_RESERVED).unwrap();
        assert_eq!(v.entries(), [("a".to_owned(), 3), ("b".to_owned(), 2)]);
    }

    #[test]
    fn tie_at_cutoff_keeps_smaller_token() {
        let c = counts(&[("z", 2), ("y", 1), ("x", 1)]);
        let v = build_vocab(&c, 2 + DEFAULT_RESERVED, DEFAULT_RESERVED).unwrap();
        assert!(v.contains("x") && !v.contains("y"));
    }

    #[test]
    fn vocab_errors() {
        let c = counts(&[("a", 1)]);
        assert!(matches!(build_vocab(&c, 2, 2), Err(VocabError::LimitTooSmall { .. })));
        assert!(matches!(
            build_vocab(&TokenCounts::new(), 5, 2),
            Err(VocabError::EmptyCorpus)
        ));
    }

    #[test]
    fn coverage_extremes() {
        let c = counts(&[("a", 3), ("b", 2)]);
        let full = build_vocab(&c, 10, 2).unwrap();
        let r = coverage(&full, &c, Scheme::Baseline);
        assert_eq!((r.type_coverage, r.token_coverage), (1.0, 1.0));
        let empty = Vocabulary::parse("", 2).unwrap();
        let r = coverage(&empty, &c, Scheme::Baseline);
        assert_eq!(r.type_coverage, 0.0);
        assert_eq!(r.oov_types, 2);
    }

    #[test]
    fn half_of_ten_types() {
        let pairs: Vec<(String, u64)> = (0..10).map(|i| (format!("w{i}"), 10 - i)).collect();
        let refs: Vec<(&str, u64)> = pairs.iter().map(|(t, n)| (t.as_str(), *n)).collect();
        let c = counts(&refs);
        let v = build_vocab(&c, 5 + 2, 2).unwrap();
        let r = coverage(&v, &c, Scheme::Baseline);
        assert_eq!(r.type_coverage, 0.5);
        // Covered w0..w4 contribute 10+9+8+7+6 of 55 running tokens.
        assert_eq!(r.token_coverage, 40.0 / 55.0);
    }

    #[test]
    fn vocab_file_roundtrip() {
        let c = counts(&[("a", 3), ("b", 2), ("c", 1)]);
        let v = build_vocab(&c, 10, 2).unwrap();
        let back = Vocabulary::parse(&v.to_tsv(), 2).unwrap();
        assert_eq!(back.entries(), v.entries());
        assert!(Vocabulary::parse("a\t0\n", 2).is_err());
        assert!(Vocabulary::parse("a\t1\na\t2\n", 2).is_err());
    }

    #[test]
    fn no_predicates_no_reduction() {
        let s = AnalyzedSentence::new(vec![
            Morpheme::word("私", "名詞", "代名詞"),
            Morpheme::word("。", "記号", "句点"),
        ]);
        let r = compression_report(&[s], Scheme::ConjToken, &TagMap::default());
        assert_eq!(r.all.reduction(), 0.0);
        assert_eq!(r.special_types, 0);
    }

    #[test]
    fn one_verb_six_forms() {
        let forms = [
            ("走ら", "未然形"),
            ("走り", "連用形"),
            ("走っ", "連用タ接続"),
            ("走る", "基本形"),
            ("走れ", "仮定形"),
            ("走ろ", "未然ウ接続"),
        ];
        let s = AnalyzedSentence::new(
            forms
                .iter()
                .map(|(surface, form)| {
                    Morpheme::conjugated(surface, "動詞", "自立", "五段・ラ行", form, "走る")
                })
                .collect(),
        );
        let r = compression_report(&[s], Scheme::ConjToken, &TagMap::default());
        assert_eq!(r.predicates, RatioReport::new(6, 1));
        assert_eq!(r.predicates.reduction(), 5.0 / 6.0);
        assert_eq!(r.all, RatioReport::new(6, 7));
        assert_eq!(r.special_types, 6);
    }
}
