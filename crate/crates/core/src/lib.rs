//! Lossless conjugation-token and POS-token encodings of MeCab/IPADic
//! analyzed Japanese, with a BPE baseline and vocabulary analytics.
//!
//! ```
//! use conjtok::{morph::parse_corpus, encode::encode_conj_token, TagMap};
//!
//! let corpus = parse_corpus("走れ\t動詞,自立,*,*,五段・ラ行,命令ｅ,走る,ハシレ,ハシレ\nEOS\n").unwrap();
//! let tokens = encode_conj_token(&corpus[0]);
//! assert_eq!(TagMap::default().render_line(&tokens), "走る <動詞・命令ｅ>");
//! ```

pub mod bpe;
pub mod decode;
pub mod encode;
pub mod inflect;
pub mod morph;
pub mod token;
pub mod vocab;

pub use bpe::{apply_bpe, bpe_decode, learn_bpe, BpeError, MergeTable};
pub use decode::{DecodeReport, Decoder, LemmaLexicon, LexiconError};
pub use encode::{encode_baseline, encode_conj_token, encode_factors, encode_pos_tokens, Placement, Scheme};
pub use inflect::{ConjugationTable, InflectError, ParadigmCell, TableError};
pub use morph::{AnalyzedSentence, MecabReader, MorphError, Morpheme};
pub use token::{TagMap, TagMapError, Token};
pub use vocab::{build_vocab, coverage, CoverageReport, TokenCounts, Vocabulary, VocabError};
