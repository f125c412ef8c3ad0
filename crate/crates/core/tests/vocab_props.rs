use conjtok::encode::Scheme;
use conjtok::inflect::ConjugationTable;
use conjtok::morph::{AnalyzedSentence, Morpheme};
use conjtok::token::TagMap;
use conjtok::vocab::{build_vocab, compression_report, coverage, TokenCounts};
use proptest::prelude::*;

const FORMS: [&str; 6] = ["基本形", "未然形", "連用形", "連用タ接続", "未然ウ接続", "仮定形"];

/// Sentences of godan r-row verbs, each lemma used in the given forms.
fn verb_corpus(lemma_forms: &[Vec<usize>]) -> Vec<AnalyzedSentence> {
    let table = ConjugationTable::builtin();
    lemma_forms
        .iter()
        .enumerate()
        .map(|(i, forms)| {
            let lemma = format!("{}る", char::from_u32(0x4E00 + i as u32).unwrap());
            AnalyzedSentence::new(
                forms
                    .iter()
                    .map(|&f| {
                        let surface = table.inflect(&lemma, "五段・ラ行", FORMS[f]).unwrap();
                        Morpheme::conjugated(&surface, "動詞", "自立", "五段・ラ行", FORMS[f], &lemma)
                    })
                    .collect(),
            )
        })
        .collect()
}

proptest! {
    #[test]
    fn coverage_is_monotone_in_size(
        words in proptest::collection::vec("[a-f]{1,2}", 1..80),
        a in 3usize..40,
        b in 3usize..40,
    ) {
        let mut counts = TokenCounts::new();
        counts.add_line(&words.join(" "));
        let (small, large) = (a.min(b), a.max(b));
        let rs = coverage(&build_vocab(&counts, small, 2).unwrap(), &counts, Scheme::Baseline);
        let rl = coverage(&build_vocab(&counts, large, 2).unwrap(), &counts, Scheme::Baseline);
        prop_assert!(rl.type_coverage >= rs.type_coverage);
        prop_assert!(rl.token_coverage >= rs.token_coverage);
        prop_assert!(rs.oov_types <= rs.distinct_types);
    }

    #[test]
    fn conj_tokens_shrink_predicate_types(
        forms in proptest::collection::vec(
            proptest::collection::btree_set(0usize..6, 2..6).prop_map(|s| s.into_iter().collect::<Vec<_>>()),
            1..40,
        )
    ) {
        // Every lemma appears in at least two forms with distinct surfaces.
        let corpus = verb_corpus(&forms);
        let map = TagMap::default();
        let r = compression_report(&corpus, Scheme::ConjToken, &map);
        prop_assert!(r.predicates.encoded_types <= r.predicates.baseline_types);
        let conj = TokenCounts::from_corpus(&corpus, Scheme::ConjToken, &map);
        let base = TokenCounts::from_corpus(&corpus, Scheme::Baseline, &map);
        prop_assert!(conj.distinct() <= base.distinct() + FORMS.len());
        prop_assert!(conj.special.len() <= 55);
    }
}
