//! Encoding schemes: conjugation tokens, POS tokens and conjugation factors.
//!
//! For `走れ` (lemma 走る, 動詞, 命令ｅ):
//!
//! | scheme        | output                       |
//! |---------------|------------------------------|
//! | baseline      | `走れ`                        |
//! | conj-token    | `走る <動詞・命令ｅ>`           |
//! | suffix        | `走る <動詞・命令ｅ> <動詞>`     |
//! | prefix        | `<動詞> <動詞・命令ｅ> 走る`     |
//! | circumfix     | `<動詞> 走る <動詞・命令ｅ>`     |
//! | conj-feature  | `走る|動詞|自立|命令ｅ`          |

use std::fmt;
use std::str::FromStr;

use crate::morph::{AnalyzedSentence, Morpheme, PLACEHOLDER};
use crate::token::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placement {
    Suffix,
    Prefix,
    Circumfix,
}

impl Placement {
    pub const ALL: [Placement; 3] = [Placement::Suffix, Placement::Prefix, Placement::Circumfix];

    pub fn name(self) -> &'static str {
        match self {
            Placement::Suffix => "suffix",
            Placement::Prefix => "prefix",
            Placement::Circumfix => "circumfix",
        }
    }
}

impl FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown placement {s:?} (suffix, prefix, circumfix)"))
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Baseline,
    ConjToken,
    ConjFeature,
    PosSuffix,
    PosPrefix,
    PosCircumfix,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Baseline,
        Scheme::ConjToken,
        Scheme::ConjFeature,
        Scheme::PosSuffix,
        Scheme::PosPrefix,
        Scheme::PosCircumfix,
    ];

    /// Schemes whose output is a token stream that can be decoded.
    pub const DECODABLE: [Scheme; 4] = [
        Scheme::ConjToken,
        Scheme::PosSuffix,
        Scheme::PosPrefix,
        Scheme::PosCircumfix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::ConjToken => "conj-token",
            Scheme::ConjFeature => "conj-feature",
            Scheme::PosSuffix => "suffix",
            Scheme::PosPrefix => "prefix",
            Scheme::PosCircumfix => "circumfix",
        }
    }

    pub fn placement(self) -> Option<Placement> {
        match self {
            Scheme::PosSuffix => Some(Placement::Suffix),
            Scheme::PosPrefix => Some(Placement::Prefix),
            Scheme::PosCircumfix => Some(Placement::Circumfix),
            _ => None,
        }
    }

    pub fn with_placement(placement: Placement) -> Self {
        match placement {
            Placement::Suffix => Scheme::PosSuffix,
            Placement::Prefix => Scheme::PosPrefix,
            Placement::Circumfix => Scheme::PosCircumfix,
        }
    }

    /// Token stream for the sentence; `None` for the factor scheme, which
    /// produces [`FactorBundle`]s instead.
    pub fn encode(self, s: &AnalyzedSentence) -> Option<Vec<Token>> {
        match self {
            Scheme::Baseline => Some(encode_baseline(s)),
            Scheme::ConjToken => Some(encode_conj_token(s)),
            Scheme::ConjFeature => None,
            pos => Some(encode_pos_tokens(s, pos.placement()?)),
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|x| x.name()).collect();
                format!("unknown scheme {s:?} ({})", names.join(", "))
            })
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn is_predicate(m: &Morpheme) -> bool {
    m.is_predicate()
}

pub fn encode_baseline(s: &AnalyzedSentence) -> Vec<Token> {
    s.morphemes.iter().map(|m| Token::word(&m.surface)).collect()
}

fn conj_token(m: &Morpheme) -> Option<Token> {
    if !m.is_predicate() {
        return None;
    }
    let (_, form) = m.conjugation()?;
    Some(Token::conj(&m.pos_coarse, form))
}

/// Predicates become lemma + conjugation token; other words stay as written.
pub fn encode_conj_token(s: &AnalyzedSentence) -> Vec<Token> {
    let mut out = Vec::with_capacity(s.len() + s.predicate_count());
    for m in &s.morphemes {
        match conj_token(m) {
            Some(ct) => {
                out.push(Token::word(&m.lemma));
                out.push(ct);
            }
            None => out.push(Token::word(&m.surface)),
        }
    }
    out
}

/// Every word gets a POS token; predicates additionally carry lemma
/// substitution and a conjugation token.
pub fn encode_pos_tokens(s: &AnalyzedSentence, placement: Placement) -> Vec<Token> {
    let mut out = Vec::with_capacity(2 * s.len() + s.predicate_count());
    for m in &s.morphemes {
        let pos = Token::pos(&m.pos_coarse);
        let ct = conj_token(m);
        let word = Token::word(if ct.is_some() { &m.lemma } else { &m.surface });
        match placement {
            Placement::Suffix => {
                out.push(word);
                out.extend(ct);
                out.push(pos);
            }
            Placement::Prefix => {
                out.push(pos);
                out.extend(ct);
                out.push(word);
            }
            Placement::Circumfix => {
                out.push(pos);
                out.push(word);
                out.extend(ct);
            }
        }
    }
    out
}

/// Embedding width reserved for each factor; they sum to 512.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorBudget {
    pub pos_coarse: usize,
    pub pos_fine: usize,
    pub conj_form: usize,
    pub lemma: usize,
}

pub const FACTOR_BUDGET: FactorBudget = FactorBudget {
    pos_coarse: 4,
    pos_fine: 8,
    conj_form: 8,
    lemma: 492,
};

impl FactorBudget {
    pub fn total(&self) -> usize {
        self.pos_coarse + self.pos_fine + self.conj_form + self.lemma
    }
}

pub const FACTOR_SEPARATOR: char = '|';
// Stand-in for a literal separator inside a factor value.
const FACTOR_SEPARATOR_SUBSTITUTE: char = '｜';

/// Header line of a factor file.
pub fn factor_header() -> String {
    let b = FACTOR_BUDGET;
    format!(
        "# factors=lemma|pos|pos_fine|form dims=pos:{} pos_fine:{} form:{} lemma:{} total:{}",
        b.pos_coarse,
        b.pos_fine,
        b.conj_form,
        b.lemma,
        b.total()
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorBundle {
    pub lemma: String,
    pub pos_coarse: String,
    pub pos_fine: String,
    pub conj_form: String,
}

impl FactorBundle {
    pub fn factors(&self) -> [&str; 4] {
        [&self.lemma, &self.pos_coarse, &self.pos_fine, &self.conj_form]
    }
}

impl fmt::Display for FactorBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors().into_iter().enumerate() {
            if i > 0 {
                write!(f, "{FACTOR_SEPARATOR}")?;
            }
            f.write_str(factor)?;
        }
        Ok(())
    }
}

fn clean_factor(s: &str) -> String {
    s.replace(FACTOR_SEPARATOR, &FACTOR_SEPARATOR_SUBSTITUTE.to_string())
}

/// One bundle per morpheme; predicates contribute their lemma.
pub fn encode_factors(s: &AnalyzedSentence) -> Vec<FactorBundle> {
    s.morphemes
        .iter()
        .map(|m| {
            let predicate = m.is_predicate();
            FactorBundle {
                lemma: clean_factor(if predicate { &m.lemma } else { &m.surface }),
                pos_coarse: clean_factor(&m.pos_coarse),
                pos_fine: clean_factor(&m.pos_fine),
                conj_form: match m.conjugation() {
                    Some((_, form)) if predicate => clean_factor(form),
                    _ => PLACEHOLDER.to_owned(),
                },
            }
        })
        .collect()
}

pub fn render_factor_line(bundles: &[FactorBundle]) -> String {
    bundles
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}
