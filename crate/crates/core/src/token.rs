//! Tokens of an encoded stream and their text form.
//!
//! Special tokens are written in angle brackets: `<動詞・命令ｅ>` for a
//! conjugation token and `<名詞>` for a POS token. With a [`TagMap`] the
//! same tokens render as `<verb-imperative-e>` and `<noun>`. Corpus words
//! that begin with `<` or `\` are escaped with a leading `\`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

const ESCAPE: char = '\\';
const RAW_SEPARATOR: char = '・';
const MAPPED_SEPARATOR: char = '-';

const BUILTIN_TAG_MAP: &str = include_str!("../data/tag_map.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Word(String),
    Conj { pos: String, form: String },
    Pos(String),
}

impl Token {
    pub fn word(text: impl Into<String>) -> Self {
        Token::Word(text.into())
    }

    pub fn conj(pos: impl Into<String>, form: impl Into<String>) -> Self {
        Token::Conj {
            pos: pos.into(),
            form: form.into(),
        }
    }

    pub fn pos(tag: impl Into<String>) -> Self {
        Token::Pos(tag.into())
    }

    pub fn is_special(&self) -> bool {
        !matches!(self, Token::Word(_))
    }
}

#[derive(Debug, Error)]
pub enum TagMapError {
    #[error("tag map line {line}: {reason}")]
    BadRow { line: usize, reason: String },
    #[error("cannot read tag map {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default)]
struct Bijection {
    forward: BTreeMap<String, String>,
    backward: BTreeMap<String, String>,
}

impl Bijection {
    fn insert(&mut self, from: &str, to: &str) -> Result<(), String> {
        if self.forward.contains_key(from) {
            return Err(format!("{from} mapped twice"));
        }
        if self.backward.contains_key(to) {
            return Err(format!("display name {to} used twice"));
        }
        self.forward.insert(from.to_owned(), to.to_owned());
        self.backward.insert(to.to_owned(), from.to_owned());
        Ok(())
    }
}

/// Display names for POS tags and conjugation forms. The empty map renders
/// analyzer names verbatim.
#[derive(Debug, Clone, Default)]
pub struct TagMap {
    pos: Bijection,
    form: Bijection,
}

impl TagMap {
    /// The shipped IPADic -> ASCII mapping (`名詞` -> `noun`, `基本形` -> `plain`).
    pub fn ascii() -> Self {
        Self::parse(BUILTIN_TAG_MAP).expect("shipped tag map is valid")
    }

    pub fn load(path: &Path) -> Result<Self, TagMapError> {
        let text = fs::read_to_string(path).map_err(|source| TagMapError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses `kind<TAB>ipadic<TAB>display` rows, kind being `pos` or `form`.
    pub fn parse(text: &str) -> Result<Self, TagMapError> {
        let mut map = TagMap::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.strip_suffix('\r').unwrap_or(raw);
            if row.starts_with('#') || row.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| TagMapError::BadRow { line, reason };
            let cols: Vec<&str> = row.split('\t').collect();
            let [kind, name, display] = cols[..] else {
                return Err(bad(format!("expected 3 columns, found {}", cols.len())));
            };
            if display.is_empty()
                || display.contains([' ', '<', '>', RAW_SEPARATOR])
                || display.starts_with(ESCAPE)
            {
                return Err(bad(format!("invalid display name {display:?}")));
            }
            match kind {
                "pos" if display.contains(MAPPED_SEPARATOR) => {
                    return Err(bad(format!("POS display name {display} contains '-'")))
                }
                "pos" => map.pos.insert(name, display).map_err(bad)?,
                "form" => map.form.insert(name, display).map_err(bad)?,
                other => return Err(bad(format!("unknown kind {other}"))),
            }
        }
        Ok(map)
    }

    pub fn is_empty(&self) -> bool {
        self.pos.forward.is_empty() && self.form.forward.is_empty()
    }

    pub fn pos_display<'a>(&'a self, pos: &'a str) -> &'a str {
        self.pos.forward.get(pos).map_or(pos, String::as_str)
    }

    pub fn form_display<'a>(&'a self, form: &'a str) -> &'a str {
        self.form.forward.get(form).map_or(form, String::as_str)
    }

    /// Writes one token in stream form.
    pub fn render_into(&self, token: &Token, out: &mut String) {
        match token {
            Token::Word(w) => {
                if w.starts_with(['<', ESCAPE]) {
                    out.push(ESCAPE);
                }
                out.push_str(w);
            }
            Token::Conj { pos, form } => {
                match (self.pos.forward.get(pos), self.form.forward.get(form)) {
                    (Some(p), Some(f)) => write!(out, "<{p}{MAPPED_SEPARATOR}{f}>"),
                    _ => write!(out, "<{pos}{RAW_SEPARATOR}{form}>"),
                }
                .expect("writing to a String cannot fail");
            }
            Token::Pos(tag) => {
                out.push('<');
                out.push_str(self.pos_display(tag));
                out.push('>');
            }
        }
    }

    pub fn render(&self, token: &Token) -> String {
        let mut s = String::new();
        self.render_into(token, &mut s);
        s
    }

    /// Renders a sentence: tokens separated by single spaces.
    pub fn render_line(&self, tokens: &[Token]) -> String {
        let mut s = String::new();
        for (i, t) in tokens.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            self.render_into(t, &mut s);
        }
        s
    }

    /// Reads one token. Total: any non-empty string yields a token.
    pub fn parse_token(&self, text: &str) -> Token {
        if let Some(rest) = text.strip_prefix(ESCAPE) {
            return Token::Word(rest.to_owned());
        }
        let Some(body) = text
            .strip_prefix('<')
            .and_then(|t| t.strip_suffix('>'))
            .filter(|b| !b.is_empty())
        else {
            return Token::Word(text.to_owned());
        };
        if let Some((pos, form)) = body.split_once(RAW_SEPARATOR) {
            return Token::conj(pos, form);
        }
        if let Some((p, f)) = body.split_once(MAPPED_SEPARATOR) {
            if let (Some(pos), Some(form)) = (self.pos.backward.get(p), self.form.backward.get(f)) {
                return Token::conj(pos.as_str(), form.as_str());
            }
        }
        Token::Pos(self.pos.backward.get(body).map_or(body, String::as_str).to_owned())
    }

    pub fn parse_line(&self, line: &str) -> Vec<Token> {
        let line = line.strip_suffix('\r').unwrap_or(line);
        line.split(' ')
            .filter(|t| !t.is_empty())
            .map(|t| self.parse_token(t))
            .collect()
    }
}
