use std::collections::{BTreeMap, BTreeSet};

use conjtok::bpe::{apply_bpe, bpe_decode, initial_symbols, learn_bpe, MergeTable};
use proptest::prelude::*;

/// Textbook greedy BPE: recount every pair after each merge.
fn naive_learn(freq: &BTreeMap<String, u64>, n: usize) -> Vec<(String, String)> {
    let mut words: Vec<(Vec<String>, u64)> =
        freq.iter().map(|(w, &c)| (initial_symbols(w), c)).collect();
    let mut merges = vec![];
    while merges.len() < n {
        let mut stats: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (w, c) in &words {
            for p in w.windows(2) {
                *stats.entry((p[0].clone(), p[1].clone())).or_default() += c;
            }
        }
        // BTreeMap iterates pairs in ascending order, so the first maximum wins ties.
        let Some((pair, count)) = stats
            .into_iter()
            .fold(None, |best: Option<((String, String), u64)>, (p, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((p, c)),
            })
        else {
            break;
        };
        if count < 2 {
            break;
        }
        for (w, _) in &mut words {
            let mut out = vec![];
            let mut i = 0;
            while i < w.len() {
                if i + 1 < w.len() && w[i] == pair.0 && w[i + 1] == pair.1 {
                    out.push(format!("{}{}", pair.0, pair.1));
                    i += 2;
                } else {
                    out.push(w[i].clone());
                    i += 1;
                }
            }
            *w = out;
        }
        merges.push(pair);
    }
    merges
}

fn corpus_strategy() -> impl Strategy<Value = BTreeMap<String, u64>> {
    proptest::collection::btree_map("[abcあい]{1,7}", 1u64..6, 1..25)
}

proptest! {
    #[test]
    fn learner_matches_naive_oracle(freq in corpus_strategy(), n in 1usize..40) {
        let fast = learn_bpe(freq.iter().map(|(w, &c)| (w.as_str(), c)), n).unwrap();
        let naive = naive_learn(&freq, n);
        prop_assert_eq!(fast.merges(), naive.as_slice());
    }

    #[test]
    fn fewer_merges_give_a_prefix(freq in corpus_strategy(), n in 1usize..30) {
        let big = learn_bpe(freq.iter().map(|(w, &c)| (w.as_str(), c)), n + 1).unwrap();
        let small = learn_bpe(freq.iter().map(|(w, &c)| (w.as_str(), c)), n).unwrap();
        prop_assert_eq!(small.merges(), &big.merges()[..small.len()]);
    }

    #[test]
    fn each_merge_adds_one_symbol(freq in corpus_strategy(), n in 1usize..30) {
        let table = learn_bpe(freq.iter().map(|(w, &c)| (w.as_str(), c)), n).unwrap();
        let initial: BTreeSet<String> = freq.keys().flat_map(|w| initial_symbols(w)).collect();
        let initial: Vec<&str> = initial.iter().map(String::as_str).collect();
        for k in 0..table.len() {
            let before = table.truncated(k).symbol_inventory(initial.iter().copied()).len();
            let after = table.truncated(k + 1).symbol_inventory(initial.iter().copied()).len();
            prop_assert_eq!(after, before + 1);
        }
    }

    #[test]
    fn unseen_characters_stay_single(word in "[xyz]{1,6}", freq in corpus_strategy()) {
        let table = learn_bpe(freq.iter().map(|(w, &c)| (w.as_str(), c)), 20).unwrap();
        let seg = apply_bpe(&word, &table);
        prop_assert_eq!(seg.len(), word.chars().count());
        prop_assert_eq!(bpe_decode(&seg), vec![word]);
    }

    #[test]
    fn merge_file_roundtrip(freq in corpus_strategy(), n in 1usize..30) {
        let table = learn_bpe(freq.iter().map(|(w, &c)| (w.as_str(), c)), n).unwrap();
        prop_assert_eq!(MergeTable::parse(&table.to_text()).unwrap(), table);
    }
}
