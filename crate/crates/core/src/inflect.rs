//! Rule-driven inflection of Japanese predicates.
//!
//! Every IPADic conjugation type has a required lemma ending (る for
//! 五段・ラ行, する for サ変・スル, ...). A rule rewrites that ending of a
//! lemma into the surface for one analyzer form key:
//!
//! ```text
//! 五段・ラ行  命令ｅ  る  れ  0      走る -> 走れ
//! サ変・スル  命令ｒｏ  する  しろ  0  する -> しろ
//! ```
//!
//! The rule data lives in TSV files shipped under `data/` and compiled into
//! the crate (see [`ConjugationTable::builtin`]); a table on disk can
//! replace it at runtime.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::morph::{AnalyzedSentence, Morpheme};

/// Analyzer key of the plain (dictionary) form.
pub const PLAIN_FORM: &str = "基本形";

pub const RULES_FILE: &str = "conj_rules.tsv";
pub const ENDINGS_FILE: &str = "lemma_endings.tsv";
pub const CELLS_FILE: &str = "paradigm_cells.tsv";

const BUILTIN_RULES: &str = include_str!("../data/conj_rules.tsv");
const BUILTIN_ENDINGS: &str = include_str!("../data/lemma_endings.tsv");
const BUILTIN_CELLS: &str = include_str!("../data/paradigm_cells.tsv");

const WILDCARD: &str = "*";

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{file} line {line}: {reason}")]
    BadRuleRow {
        file: &'static str,
        line: usize,
        reason: String,
    },
    #[error("duplicate rule ({conj_type}, {conj_form}, rank {rank}) at line {line}")]
    DuplicateRule {
        conj_type: String,
        conj_form: String,
        rank: u8,
        line: usize,
    },
    #[error("conjugation type {0} has no identity rule for {PLAIN_FORM}")]
    MissingPlainForm(String),
    #[error("({conj_type}, {conj_form}) has alternatives but no rank 0 rule")]
    MissingCanonical { conj_type: String, conj_form: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InflectError {
    #[error("no rule for ({conj_type}, {conj_form})")]
    UnknownConjugation { conj_type: String, conj_form: String },
    #[error("lemma {lemma} does not end with {expected} required by {conj_type}")]
    LemmaMismatch {
        lemma: String,
        conj_type: String,
        expected: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugationRule {
    pub conj_type: String,
    pub conj_form: String,
    pub strip: String,
    pub append: String,
    pub variant_rank: u8,
}

impl ConjugationRule {
    fn apply(&self, lemma: &str) -> Option<String> {
        lemma
            .strip_suffix(self.strip.as_str())
            .map(|stem| format!("{stem}{}", self.append))
    }
}

/// The six classical paradigm columns (活用形).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParadigmCell {
    Irrealis,
    Continuative,
    Terminal,
    Attributive,
    Hypothetical,
    Imperative,
}

impl ParadigmCell {
    pub const ALL: [ParadigmCell; 6] = [
        ParadigmCell::Irrealis,
        ParadigmCell::Continuative,
        ParadigmCell::Terminal,
        ParadigmCell::Attributive,
        ParadigmCell::Hypothetical,
        ParadigmCell::Imperative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParadigmCell::Irrealis => "未然形",
            ParadigmCell::Continuative => "連用形",
            ParadigmCell::Terminal => "終止形",
            ParadigmCell::Attributive => "連体形",
            ParadigmCell::Hypothetical => "仮定形",
            ParadigmCell::Imperative => "命令形",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for ParadigmCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Either an exact analyzer form key or a paradigm column.
#[derive(Debug, Clone, Copy)]
pub enum FormSelector<'a> {
    Key(&'a str),
    Cell(ParadigmCell),
}

impl<'a> From<&'a str> for FormSelector<'a> {
    fn from(key: &'a str) -> Self {
        FormSelector::Key(key)
    }
}

impl From<ParadigmCell> for FormSelector<'_> {
    fn from(cell: ParadigmCell) -> Self {
        FormSelector::Cell(cell)
    }
}

#[derive(Debug, Clone)]
struct CellRow {
    conj_type: String,
    cell: ParadigmCell,
    conj_form: String,
}

/// Validated, immutable rule set.
#[derive(Debug, Clone)]
pub struct ConjugationTable {
    // Rules per (type, form), sorted by variant rank.
    rules: BTreeMap<(String, String), Vec<ConjugationRule>>,
    lemma_endings: BTreeMap<String, String>,
    cells: Vec<CellRow>,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
}

impl ConjugationTable {
    /// The table compiled into the crate.
    pub fn builtin() -> Self {
        Self::from_sources(BUILTIN_RULES, BUILTIN_ENDINGS, Some(BUILTIN_CELLS))
            .expect("shipped conjugation table is valid")
    }

    /// Loads `conj_rules.tsv`, `lemma_endings.tsv` and, if present,
    /// `paradigm_cells.tsv`. `path` is either the directory holding them or
    /// the rules file itself (companions are looked up next to it).
    pub fn load(path: &Path) -> Result<Self, TableError> {
        let (rules_path, dir) = if path.is_dir() {
            (path.join(RULES_FILE), path.to_path_buf())
        } else {
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (path.to_path_buf(), dir)
        };
        let read = |p: &Path| {
            fs::read_to_string(p).map_err(|source| TableError::Io {
                path: p.to_path_buf(),
                source,
            })
        };
        let rules = read(&rules_path)?;
        let endings = read(&dir.join(ENDINGS_FILE))?;
        let cells_path = dir.join(CELLS_FILE);
        let cells = if cells_path.exists() {
            Some(read(&cells_path)?)
        } else {
            None
        };
        Self::from_sources(&rules, &endings, cells.as_deref())
    }

    pub fn from_sources(
        rules_tsv: &str,
        endings_tsv: &str,
        cells_tsv: Option<&str>,
    ) -> Result<Self, TableError> {
        let lemma_endings = parse_endings(endings_tsv)?;
        let mut rules: BTreeMap<(String, String), Vec<ConjugationRule>> = BTreeMap::new();
        for (line, row) in data_lines(rules_tsv) {
            let bad = |reason: String| TableError::BadRuleRow {
                file: RULES_FILE,
                line,
                reason,
            };
            let cols: Vec<&str> = row.split('\t').collect();
            let [conj_type, conj_form, strip, append, rank] = cols[..] else {
                return Err(bad(format!("expected 5 columns, found {}", cols.len())));
            };
            if conj_type.is_empty() || conj_form.is_empty() {
                return Err(bad("empty conjugation type or form".into()));
            }
            let variant_rank: u8 = rank
                .trim()
                .parse()
                .map_err(|_| bad(format!("variant rank {rank:?} is not a small integer")))?;
            let ending = lemma_endings
                .get(conj_type)
                .ok_or_else(|| bad(format!("{conj_type} has no declared lemma ending")))?;
            if !ending.ends_with(strip) {
                return Err(bad(format!(
                    "strip {strip:?} is not a suffix of the lemma ending {ending:?}"
                )));
            }
            let variants = rules
                .entry((conj_type.to_owned(), conj_form.to_owned()))
                .or_default();
            if variants.iter().any(|r| r.variant_rank == variant_rank) {
                return Err(TableError::DuplicateRule {
                    conj_type: conj_type.to_owned(),
                    conj_form: conj_form.to_owned(),
                    rank: variant_rank,
                    line,
                });
            }
            variants.push(ConjugationRule {
                conj_type: conj_type.to_owned(),
                conj_form: conj_form.to_owned(),
                strip: strip.to_owned(),
                append: append.to_owned(),
                variant_rank,
            });
        }
        for variants in rules.values_mut() {
            variants.sort_by_key(|r| r.variant_rank);
        }
        for ((conj_type, conj_form), variants) in &rules {
            if variants[0].variant_rank != 0 {
                return Err(TableError::MissingCanonical {
                    conj_type: conj_type.clone(),
                    conj_form: conj_form.clone(),
                });
            }
        }
        let types: BTreeSet<&String> = rules.keys().map(|(t, _)| t).collect();
        for conj_type in types.iter().copied().chain(lemma_endings.keys()) {
            let plain = rules
                .get(&(conj_type.clone(), PLAIN_FORM.to_owned()))
                .map(|v| &v[0]);
            match plain {
                Some(rule) if rule.strip == rule.append => {}
                _ => return Err(TableError::MissingPlainForm(conj_type.clone())),
            }
        }
        let cells = match cells_tsv {
            Some(text) => parse_cells(text)?,
            None => Vec::new(),
        };
        Ok(ConjugationTable {
            rules,
            lemma_endings,
            cells,
        })
    }

    pub fn contains(&self, conj_type: &str, conj_form: &str) -> bool {
        self.rules
            .contains_key(&(conj_type.to_owned(), conj_form.to_owned()))
    }

    pub fn has_type(&self, conj_type: &str) -> bool {
        self.lemma_endings.contains_key(conj_type)
    }

    pub fn lemma_ending(&self, conj_type: &str) -> Option<&str> {
        self.lemma_endings.get(conj_type).map(String::as_str)
    }

    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.lemma_endings.keys().map(String::as_str)
    }

    /// Form keys defined for `conj_type`, in key order.
    pub fn forms<'a>(&'a self, conj_type: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.rules
            .keys()
            .filter(move |(t, _)| t == conj_type)
            .map(|(_, f)| f.as_str())
    }

    pub fn rules(&self) -> impl Iterator<Item = &ConjugationRule> {
        self.rules.values().flatten()
    }

    /// Rules for one cell, rank 0 first.
    pub fn variants(&self, conj_type: &str, conj_form: &str) -> Option<&[ConjugationRule]> {
        self.rules
            .get(&(conj_type.to_owned(), conj_form.to_owned()))
            .map(Vec::as_slice)
    }

    fn check_lemma(&self, lemma: &str, conj_type: &str) -> Result<(), InflectError> {
        let ending = self.lemma_ending(conj_type).unwrap_or("");
        if lemma.ends_with(ending) {
            Ok(())
        } else {
            Err(InflectError::LemmaMismatch {
                lemma: lemma.to_owned(),
                conj_type: conj_type.to_owned(),
                expected: ending.to_owned(),
            })
        }
    }

    fn apply_rule(&self, lemma: &str, rule: &ConjugationRule) -> Result<String, InflectError> {
        rule.apply(lemma).ok_or_else(|| InflectError::LemmaMismatch {
            lemma: lemma.to_owned(),
            conj_type: rule.conj_type.clone(),
            expected: rule.strip.clone(),
        })
    }

    fn lookup(&self, conj_type: &str, conj_form: &str) -> Result<&[ConjugationRule], InflectError> {
        self.variants(conj_type, conj_form)
            .ok_or_else(|| InflectError::UnknownConjugation {
                conj_type: conj_type.to_owned(),
                conj_form: conj_form.to_owned(),
            })
    }

    /// Canonical surface of `lemma` in the given form.
    pub fn inflect(
        &self,
        lemma: &str,
        conj_type: &str,
        conj_form: &str,
    ) -> Result<String, InflectError> {
        let rules = self.lookup(conj_type, conj_form)?;
        self.check_lemma(lemma, conj_type)?;
        self.apply_rule(lemma, &rules[0])
    }

    /// All surfaces for an analyzer key (by rank) or for a paradigm column
    /// (keys in column order, each key's variants by rank, duplicates
    /// removed).
    pub fn inflect_variants<'a>(
        &self,
        lemma: &str,
        conj_type: &str,
        form: impl Into<FormSelector<'a>>,
    ) -> Result<Vec<String>, InflectError> {
        let keys = match form.into() {
            FormSelector::Key(key) => vec![key],
            FormSelector::Cell(cell) => self.cell_keys(conj_type, cell),
        };
        if keys.is_empty() {
            return Err(InflectError::UnknownConjugation {
                conj_type: conj_type.to_owned(),
                conj_form: "(no forms in paradigm column)".to_owned(),
            });
        }
        self.check_lemma(lemma, conj_type)?;
        let mut out: Vec<String> = Vec::new();
        for key in keys {
            for rule in self.lookup(conj_type, key)? {
                let surface = self.apply_rule(lemma, rule)?;
                if !out.contains(&surface) {
                    out.push(surface);
                }
            }
        }
        Ok(out)
    }

    /// Form keys of `conj_type` grouped under a paradigm column.
    pub fn cell_keys(&self, conj_type: &str, cell: ParadigmCell) -> Vec<&str> {
        let specific: Vec<&str> = self
            .cells
            .iter()
            .filter(|r| r.cell == cell && r.conj_type == conj_type)
            .map(|r| r.conj_form.as_str())
            .collect();
        let keys = if specific.is_empty() {
            self.cells
                .iter()
                .filter(|r| r.cell == cell && r.conj_type == WILDCARD)
                .map(|r| r.conj_form.as_str())
                .collect()
        } else {
            specific
        };
        keys.into_iter()
            .filter(|k| self.contains(conj_type, k))
            .collect()
    }

    /// Whether the canonical inflection of the morpheme's lemma reproduces
    /// its surface.
    pub fn check_roundtrip(&self, m: &Morpheme) -> bool {
        let Some((conj_type, conj_form)) = m.conjugation() else {
            return false;
        };
        match self.inflect(&m.lemma, conj_type, conj_form) {
            Ok(surface) => surface == m.surface,
            Err(e) => {
                log::debug!("{}: {e}", m.surface);
                false
            }
        }
    }
}

fn parse_endings(text: &str) -> Result<BTreeMap<String, String>, TableError> {
    let mut endings = BTreeMap::new();
    for (line, row) in data_lines(text) {
        let bad = |reason: String| TableError::BadRuleRow {
            file: ENDINGS_FILE,
            line,
            reason,
        };
        let cols: Vec<&str> = row.split('\t').collect();
        let [conj_type, ending] = cols[..] else {
            return Err(bad(format!("expected 2 columns, found {}", cols.len())));
        };
        if endings
            .insert(conj_type.to_owned(), ending.to_owned())
            .is_some()
        {
            return Err(bad(format!("{conj_type} declared twice")));
        }
    }
    Ok(endings)
}

fn parse_cells(text: &str) -> Result<Vec<CellRow>, TableError> {
    data_lines(text)
        .map(|(line, row)| {
            let bad = |reason: String| TableError::BadRuleRow {
                file: CELLS_FILE,
                line,
                reason,
            };
            let cols: Vec<&str> = row.split('\t').collect();
            let [conj_type, cell, conj_form] = cols[..] else {
                return Err(bad(format!("expected 3 columns, found {}", cols.len())));
            };
            let cell = ParadigmCell::from_name(cell)
                .ok_or_else(|| bad(format!("unknown paradigm column {cell}")))?;
            Ok(CellRow {
                conj_type: conj_type.to_owned(),
                cell,
                conj_form: conj_form.to_owned(),
            })
        })
        .collect()
}

/// Per-type restoration statistics over an analyzed corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeStats {
    pub checked: usize,
    pub restored: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RoundtripAudit {
    pub by_type: BTreeMap<String, TypeStats>,
    /// (type, form) pairs seen in the corpus but absent from the table.
    pub missing: BTreeMap<(String, String), usize>,
    /// Morphemes covered by the table whose canonical surface differs.
    pub mismatches: Vec<Morpheme>,
}

impl RoundtripAudit {
    pub fn run<'a>(
        table: &ConjugationTable,
        corpus: impl IntoIterator<Item = &'a AnalyzedSentence>,
    ) -> Self {
        let mut audit = RoundtripAudit::default();
        for m in corpus
            .into_iter()
            .flat_map(|s| &s.morphemes)
            .filter(|m| m.is_predicate())
        {
            audit.record(table, m);
        }
        audit
    }

    pub fn record(&mut self, table: &ConjugationTable, m: &Morpheme) {
        let Some((conj_type, conj_form)) = m.conjugation() else {
            return;
        };
        let stats = self.by_type.entry(conj_type.to_owned()).or_default();
        stats.checked += 1;
        if !table.contains(conj_type, conj_form) {
            *self
                .missing
                .entry((conj_type.to_owned(), conj_form.to_owned()))
                .or_default() += 1;
        } else if table.check_roundtrip(m) {
            stats.restored += 1;
        } else if self.mismatches.len() < 100 {
            self.mismatches.push(m.clone());
        }
    }

    pub fn merge(&mut self, other: RoundtripAudit) {
        for (t, s) in other.by_type {
            let mine = self.by_type.entry(t).or_default();
            mine.checked += s.checked;
            mine.restored += s.restored;
        }
        for (k, n) in other.missing {
            *self.missing.entry(k).or_default() += n;
        }
        let room = 100usize.saturating_sub(self.mismatches.len());
        self.mismatches
            .extend(other.mismatches.into_iter().take(room));
    }

    pub fn checked(&self) -> usize {
        self.by_type.values().map(|s| s.checked).sum()
    }

    pub fn restored(&self) -> usize {
        self.by_type.values().map(|s| s.restored).sum()
    }

    /// Fraction restored; 1.0 when nothing was checked.
    pub fn rate(&self) -> f64 {
        match self.checked() {
            0 => 1.0,
            n => self.restored() as f64 / n as f64,
        }
    }
}
