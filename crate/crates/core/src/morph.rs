//! Reading MeCab/IPADic analyzer output.
//!
//! A MeCab line holds the surface, a tab, and the comma-separated IPADic
//! features, e.g. `走れ` then `動詞,自立,*,*,五段・ラ行,命令ｅ,走る,ハシレ,ハシレ`.
//! Only the first seven features are consulted; reading and pronunciation
//! (columns 8 and 9) are ignored whether present or not. Sentences end with
//! an `EOS` line.

use std::io::BufRead;

use thiserror::Error;

/// IPADic placeholder for an empty feature slot.
pub const PLACEHOLDER: &str = "*";

/// MeCab sentence terminator line.
pub const EOS: &str = "EOS";

/// Coarse POS names that can carry conjugation data.
pub const PREDICATE_POS: [&str; 3] = ["動詞", "形容詞", "助動詞"];

#[derive(Debug, Error)]
pub enum MorphError {
    #[error("line {line}: malformed analyzer line: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("input ended inside a sentence ({pending} morphemes without EOS)")]
    MissingEos { pending: usize },
    #[error("line {line}: input is not valid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

/// One analyzed word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Morpheme {
    pub surface: String,
    pub pos_coarse: String,
    pub pos_fine: String,
    pub conj_type: Option<String>,
    pub conj_form: Option<String>,
    pub lemma: String,
}

impl Morpheme {
    /// Morpheme without conjugation data whose lemma is its surface.
    pub fn word(surface: &str, pos_coarse: &str, pos_fine: &str) -> Self {
        Morpheme {
            surface: surface.to_owned(),
            pos_coarse: pos_coarse.to_owned(),
            pos_fine: pos_fine.to_owned(),
            conj_type: None,
            conj_form: None,
            lemma: surface.to_owned(),
        }
    }

    /// Morpheme carrying conjugation type and form.
    pub fn conjugated(
        surface: &str,
        pos_coarse: &str,
        pos_fine: &str,
        conj_type: &str,
        conj_form: &str,
        lemma: &str,
    ) -> Self {
        Morpheme {
            surface: surface.to_owned(),
            pos_coarse: pos_coarse.to_owned(),
            pos_fine: pos_fine.to_owned(),
            conj_type: Some(conj_type.to_owned()),
            conj_form: Some(conj_form.to_owned()),
            lemma: lemma.to_owned(),
        }
    }

    /// Conjugation type and form, when the analyzer supplied both.
    pub fn conjugation(&self) -> Option<(&str, &str)> {
        match (&self.conj_type, &self.conj_form) {
            (Some(t), Some(f)) => Some((t.as_str(), f.as_str())),
            _ => None,
        }
    }

    /// Verb, adjective or auxiliary verb with conjugation data.
    pub fn is_predicate(&self) -> bool {
        PREDICATE_POS.contains(&self.pos_coarse.as_str()) && self.conjugation().is_some()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalyzedSentence {
    pub morphemes: Vec<Morpheme>,
}

impl AnalyzedSentence {
    pub fn new(morphemes: Vec<Morpheme>) -> Self {
        AnalyzedSentence { morphemes }
    }

    pub fn len(&self) -> usize {
        self.morphemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.morphemes.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.morphemes.iter().map(|m| m.surface.as_str())
    }

    /// Surfaces concatenated without separators (the original text).
    pub fn text(&self) -> String {
        self.surfaces().collect()
    }

    pub fn predicate_count(&self) -> usize {
        self.morphemes.iter().filter(|m| m.is_predicate()).count()
    }

    /// Renders the sentence back into MeCab lines, followed by `EOS`.
    ///
    /// Features that were not kept (fine POS levels 2-3, readings) are
    /// written as placeholders.
    pub fn to_mecab(&self) -> String {
        let mut out = String::new();
        for m in &self.morphemes {
            out.push_str(&m.surface);
            out.push('\t');
            let fields = [
                m.pos_coarse.as_str(),
                m.pos_fine.as_str(),
                PLACEHOLDER,
                PLACEHOLDER,
                m.conj_type.as_deref().unwrap_or(PLACEHOLDER),
                m.conj_form.as_deref().unwrap_or(PLACEHOLDER),
                m.lemma.as_str(),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out.push_str(EOS);
        out.push('\n');
        out
    }
}

fn slot(value: &str) -> Option<String> {
    (value != PLACEHOLDER).then(|| value.to_owned())
}

/// Parses one analyzer line; `line_no` is only used for error reporting.
pub fn parse_mecab_line(line: &str, line_no: usize) -> Result<Morpheme, MorphError> {
    let malformed = |reason: &str| MorphError::MalformedLine {
        line: line_no,
        reason: reason.to_owned(),
    };
    let line = line.strip_suffix('\r').unwrap_or(line);
    let (surface, features) = line.split_once('\t').ok_or_else(|| malformed("no tab"))?;
    if surface.is_empty() {
        return Err(malformed("empty surface"));
    }
    if surface.contains(' ') {
        return Err(malformed("surface contains a space"));
    }
    if features.contains('\t') {
        return Err(malformed("more than one tab"));
    }
    let f: Vec<&str> = features.splitn(8, ',').collect();
    if f.len() < 7 {
        return Err(malformed(&format!(
            "expected at least 7 features, found {}",
            f.len()
        )));
    }
    let mut conj_type = slot(f[4]);
    let mut conj_form = slot(f[5]);
    if conj_type.is_none() || conj_form.is_none() {
        conj_type = None;
        conj_form = None;
    }
    let lemma = match f[6] {
        PLACEHOLDER | "" => surface.to_owned(),
        l => l.to_owned(),
    };
    Ok(Morpheme {
        surface: surface.to_owned(),
        pos_coarse: f[0].to_owned(),
        pos_fine: f[1].to_owned(),
        conj_type,
        conj_form,
        lemma,
    })
}

/// Streaming reader over a MeCab-format corpus, one sentence per `EOS`.
pub struct MecabReader<R> {
    input: R,
    line_no: usize,
    buf: Vec<u8>,
    done: bool,
}

impl<R: BufRead> MecabReader<R> {
    pub fn new(input: R) -> Self {
        MecabReader {
            input,
            line_no: 0,
            buf: Vec::new(),
            done: false,
        }
    }

    fn next_line(&mut self) -> Result<Option<String>, MorphError> {
        self.buf.clear();
        if self.input.read_until(b'\n', &mut self.buf)? == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        if self.buf.last() == Some(&b'\n') {
            self.buf.pop();
        }
        let text = std::str::from_utf8(&self.buf)
            .map_err(|_| MorphError::InvalidUtf8 { line: self.line_no })?;
        Ok(Some(text.to_owned()))
    }

    fn read_sentence(&mut self) -> Result<Option<AnalyzedSentence>, MorphError> {
        let mut morphemes = Vec::new();
        loop {
            let Some(line) = self.next_line()? else {
                return if morphemes.is_empty() {
                    Ok(None)
                } else {
                    Err(MorphError::MissingEos {
                        pending: morphemes.len(),
                    })
                };
            };
            let trimmed = line.strip_suffix('\r').unwrap_or(&line);
            if trimmed == EOS {
                return Ok(Some(AnalyzedSentence::new(morphemes)));
            }
            morphemes.push(parse_mecab_line(trimmed, self.line_no)?);
        }
    }
}

impl<R: BufRead> Iterator for MecabReader<R> {
    type Item = Result<AnalyzedSentence, MorphError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.read_sentence().transpose();
        if !matches!(item, Some(Ok(_))) {
            self.done = true;
        }
        item
    }
}

/// Parses a whole MeCab corpus held in memory.
pub fn parse_corpus(text: &str) -> Result<Vec<AnalyzedSentence>, MorphError> {
    MecabReader::new(text.as_bytes()).collect()
}

/// Parses one line of the plain pre-tokenized format (space-separated
/// surfaces). Words carry no morphology and are never predicates.
pub fn parse_plain_line(line: &str) -> AnalyzedSentence {
    let line = line.strip_suffix('\r').unwrap_or(line);
    AnalyzedSentence::new(
        line.split(' ')
            .filter(|w| !w.is_empty())
            .map(|w| Morpheme::word(w, PLACEHOLDER, PLACEHOLDER))
            .collect(),
    )
}
