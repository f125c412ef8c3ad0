//! Restoring surface text from encoded token streams.
//!
//! Conjugation tokens carry POS and form but not the conjugation type, so a
//! [`LemmaLexicon`] built from the training corpus supplies the type. Decoding
//! never fails: malformed streams are repaired and the repairs are counted in
//! a [`DecodeReport`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::encode::{Placement, Scheme};
use crate::inflect::ConjugationTable;
use crate::morph::AnalyzedSentence;
use crate::token::Token;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {reason}")]
    BadRow { line: usize, reason: String },
    #[error("lexicon line {line}: conjugation type {conj_type} is not in the table")]
    UnknownType { line: usize, conj_type: String },
    #[error("cannot access lexicon {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub pos: String,
    pub conj_type: String,
    pub count: u64,
}

/// Conjugation types observed for each lemma, most frequent first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaLexicon {
    entries: BTreeMap<String, Vec<LexiconEntry>>,
}

impl LemmaLexicon {
    /// Counts (lemma, POS, type) over the predicates of `corpus`. Types absent
    /// from `table` are skipped.
    pub fn build<'a>(
        corpus: impl IntoIterator<Item = &'a AnalyzedSentence>,
        table: &ConjugationTable,
    ) -> Self {
        let mut lex = LemmaLexicon::default();
        lex.add_corpus(corpus, table);
        lex
    }

    /// Adds the predicates of `corpus` to the counts.
    pub fn add_corpus<'a>(
        &mut self,
        corpus: impl IntoIterator<Item = &'a AnalyzedSentence>,
        table: &ConjugationTable,
    ) {
        for s in corpus {
            for m in &s.morphemes {
                if !m.is_predicate() {
                    continue;
                }
                let Some((conj_type, _)) = m.conjugation() else {
                    continue;
                };
                if !table.has_type(conj_type) {
                    log::debug!("lexicon: skipping unknown type {conj_type} of {}", m.lemma);
                    continue;
                }
                let list = self.entries.entry(m.lemma.clone()).or_default();
                match list
                    .iter_mut()
                    .find(|e| e.pos == m.pos_coarse && e.conj_type == conj_type)
                {
                    Some(e) => e.count += 1,
                    None => list.push(LexiconEntry {
                        pos: m.pos_coarse.clone(),
                        conj_type: conj_type.to_owned(),
                        count: 1,
                    }),
                }
            }
        }
        self.sort();
    }

    fn push(&mut self, lemma: &str, pos: &str, conj_type: &str, count: u64) {
        self.entries
            .entry(lemma.to_owned())
            .or_default()
            .push(LexiconEntry {
                pos: pos.to_owned(),
                conj_type: conj_type.to_owned(),
                count,
            });
    }

    fn sort(&mut self) {
        for list in self.entries.values_mut() {
            list.sort_by(|a, b| {
                b.count
                    .cmp(&a.count)
                    .then_with(|| a.conj_type.cmp(&b.conj_type))
                    .then_with(|| a.pos.cmp(&b.pos))
            });
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self, lemma: &str) -> &[LexiconEntry] {
        self.entries.get(lemma).map_or(&[], Vec::as_slice)
    }

    /// `(conj_type, count)` pairs for a lemma.
    pub fn types(&self, lemma: &str) -> Vec<(&str, u64)> {
        self.entries(lemma)
            .iter()
            .map(|e| (e.conj_type.as_str(), e.count))
            .collect()
    }

    /// Candidate types for a lemma under a POS, in preference order.
    pub fn candidates<'a>(&'a self, lemma: &str, pos: &'a str) -> impl Iterator<Item = &'a str> {
        self.entries(lemma)
            .iter()
            .filter(move |e| e.pos == pos)
            .map(|e| e.conj_type.as_str())
    }

    /// TSV: `lemma<TAB>pos<TAB>conj_type<TAB>count`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# lemma\tpos\tconj_type\tcount\n");
        for (lemma, list) in &self.entries {
            for e in list {
                writeln!(out, "{lemma}\t{}\t{}\t{}", e.pos, e.conj_type, e.count)
                    .expect("writing to a String cannot fail");
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), LexiconError> {
        fs::write(path, self.to_tsv()).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn parse(text: &str, table: &ConjugationTable) -> Result<Self, LexiconError> {
        let mut lex = LemmaLexicon::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.strip_suffix('\r').unwrap_or(raw);
            if row.starts_with('#') || row.is_empty() {
                continue;
            }
            let bad = |reason: String| LexiconError::BadRow { line, reason };
            let cols: Vec<&str> = row.split('\t').collect();
            let [lemma, pos, conj_type, count] = cols[..] else {
                return Err(bad(format!("expected 4 columns, found {}", cols.len())));
            };
            if lemma.is_empty() || pos.is_empty() {
                return Err(bad("empty lemma or POS".into()));
            }
            let count: u64 = count
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| bad(format!("invalid count {count:?}")))?;
            if !table.has_type(conj_type) {
                return Err(LexiconError::UnknownType {
                    line,
                    conj_type: conj_type.to_owned(),
                });
            }
            if lex
                .entries(lemma)
                .iter()
                .any(|e| e.pos == pos && e.conj_type == conj_type)
            {
                return Err(bad(format!("duplicate entry {lemma} {pos} {conj_type}")));
            }
            lex.push(lemma, pos, conj_type, count);
        }
        lex.sort();
        Ok(lex)
    }

    pub fn load(path: &Path, table: &ConjugationTable) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, table)
    }
}

/// Counts of each decoding path taken.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecodeReport {
    pub sentences: u64,
    pub words: u64,
    pub inflected: u64,
    pub bare_words: u64,
    pub unknown_lemma: u64,
    pub inflect_failed: u64,
    pub orphan_conj: u64,
    pub extra_conj: u64,
    pub pos_stripped: u64,
    pub pos_misplaced: u64,
    pub per_form: BTreeMap<String, u64>,
}

impl DecodeReport {
    pub fn merge(&mut self, other: &DecodeReport) {
        self.sentences += other.sentences;
        self.words += other.words;
        self.inflected += other.inflected;
        self.bare_words += other.bare_words;
        self.unknown_lemma += other.unknown_lemma;
        self.inflect_failed += other.inflect_failed;
        self.orphan_conj += other.orphan_conj;
        self.extra_conj += other.extra_conj;
        self.pos_stripped += other.pos_stripped;
        self.pos_misplaced += other.pos_misplaced;
        for (form, n) in &other.per_form {
            *self.per_form.entry(form.clone()).or_default() += n;
        }
    }

    /// Number of repairs made to the stream.
    pub fn fallbacks(&self) -> u64 {
        self.unknown_lemma
            + self.inflect_failed
            + self.orphan_conj
            + self.extra_conj
            + self.pos_misplaced
    }

    /// One `key=value` line per counter.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (key, value) in [
            ("sentences", self.sentences),
            ("words", self.words),
            ("inflected", self.inflected),
            ("bare_words", self.bare_words),
            ("unknown_lemma", self.unknown_lemma),
            ("inflect_failed", self.inflect_failed),
            ("orphan_conj", self.orphan_conj),
            ("extra_conj", self.extra_conj),
            ("pos_stripped", self.pos_stripped),
            ("pos_misplaced", self.pos_misplaced),
            ("fallbacks", self.fallbacks()),
        ] {
            writeln!(out, "{key}={value}").expect("writing to a String cannot fail");
        }
        for (form, n) in &self.per_form {
            writeln!(out, "form.{form}={n}").expect("writing to a String cannot fail");
        }
        out
    }
}

/// Decodes token streams against a conjugation table and lemma lexicon.
#[derive(Debug, Clone, Copy)]
pub struct Decoder<'a> {
    table: &'a ConjugationTable,
    lexicon: &'a LemmaLexicon,
}

impl<'a> Decoder<'a> {
    pub fn new(table: &'a ConjugationTable, lexicon: &'a LemmaLexicon) -> Self {
        Decoder { table, lexicon }
    }

    /// Decodes a stream produced by `scheme`. The factor scheme is not a
    /// token stream and is treated like the conjugation-token scheme.
    pub fn decode(&self, tokens: &[Token], scheme: Scheme) -> (Vec<String>, DecodeReport) {
        match scheme.placement() {
            Some(p) => self.decode_pos_tokens(tokens, p),
            None => self.decode_conj_token(tokens),
        }
    }

    pub fn decode_conj_token(&self, tokens: &[Token]) -> (Vec<String>, DecodeReport) {
        let mut report = DecodeReport {
            sentences: 1,
            ..DecodeReport::default()
        };
        let mut kept = Vec::with_capacity(tokens.len());
        for t in tokens {
            if let Token::Pos(_) = t {
                report.pos_misplaced += 1;
            } else {
                kept.push(t);
            }
        }
        let words = self.restore(&kept, false, &mut report);
        (words, report)
    }

    pub fn decode_pos_tokens(
        &self,
        tokens: &[Token],
        placement: Placement,
    ) -> (Vec<String>, DecodeReport) {
        let mut report = DecodeReport {
            sentences: 1,
            ..DecodeReport::default()
        };
        for (i, t) in tokens.iter().enumerate() {
            if let Token::Pos(_) = t {
                report.pos_stripped += 1;
                if !pos_well_placed(tokens, i, placement) {
                    report.pos_misplaced += 1;
                }
            }
        }
        let kept: Vec<&Token> = tokens.iter().filter(|t| !matches!(t, Token::Pos(_))).collect();
        let words = self.restore(&kept, placement == Placement::Prefix, &mut report);
        (words, report)
    }

    /// Pairs words with their conjugation tokens: the run of conjugation
    /// tokens after a word, or before it when `conj_first`.
    fn restore(&self, tokens: &[&Token], conj_first: bool, report: &mut DecodeReport) -> Vec<String> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let run_start = i;
            while i < tokens.len() && matches!(tokens[i], Token::Conj { .. }) {
                i += 1;
            }
            let leading = &tokens[run_start..i];
            let Some(Token::Word(word)) = tokens.get(i).copied() else {
                report.orphan_conj += leading.len() as u64;
                break;
            };
            i += 1;
            let conj = if conj_first {
                leading
            } else {
                report.orphan_conj += leading.len() as u64;
                let start = i;
                while i < tokens.len() && matches!(tokens[i], Token::Conj { .. }) {
                    i += 1;
                }
                &tokens[start..i]
            };
            out.push(self.restore_word(word, conj, report));
        }
        report.words += out.len() as u64;
        out
    }

    fn restore_word(&self, word: &str, conj: &[&Token], report: &mut DecodeReport) -> String {
        let Some(Token::Conj { pos, form }) = conj.first().copied() else {
            report.bare_words += 1;
            return word.to_owned();
        };
        report.extra_conj += conj.len() as u64 - 1;
        let mut any_candidate = false;
        for conj_type in self.lexicon.candidates(word, pos) {
            any_candidate = true;
            if let Ok(surface) = self.table.inflect(word, conj_type, form) {
                report.inflected += 1;
                *report.per_form.entry(form.clone()).or_default() += 1;
                return surface;
            }
        }
        if any_candidate {
            log::debug!("decode: no type of {word} ({pos}) inflects to {form}");
            report.inflect_failed += 1;
        } else {
            log::debug!("decode: {word} ({pos}) is not in the lexicon");
            report.unknown_lemma += 1;
        }
        word.to_owned()
    }
}

/// Whether the POS token at `i` sits where `placement` puts it.
fn pos_well_placed(tokens: &[Token], i: usize, placement: Placement) -> bool {
    let is_word = |j: usize| matches!(tokens.get(j), Some(Token::Word(_)));
    let is_conj = |j: usize| matches!(tokens.get(j), Some(Token::Conj { .. }));
    match placement {
        Placement::Suffix => {
            i >= 1 && (is_word(i - 1) || (is_conj(i - 1) && i >= 2 && is_word(i - 2)))
        }
        Placement::Prefix => is_word(i + 1) || (is_conj(i + 1) && is_word(i + 2)),
        Placement::Circumfix => is_word(i + 1),
    }
}
