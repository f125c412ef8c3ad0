//! Byte pair encoding in the subword-nmt style.
//!
//! Words are split into characters with an end-of-word marker attached to
//! the last one, and the most frequent adjacent pair is merged until the
//! requested number of merges is reached or no pair occurs twice. Equal
//! counts go to the lexicographically smallest `(left, right)` pair.
//!
//! Segmented words mark every non-final subword with `@@`:
//! `lower` -> `lo@@ wer`. A final subword that itself ends in `@@` (optionally
//! followed by U+2060) gets one extra U+2060 so that decoding stays exact.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

pub const END_OF_WORD: &str = "</w>";
pub const CONTINUATION: &str = "@@";
pub const MERGES_VERSION: &str = "#version: 0.2";
const ESCAPE: char = '\u{2060}';
const MIN_PAIR_COUNT: u64 = 2;

#[derive(Debug, Error)]
pub enum BpeError {
    #[error("corpus has no words")]
    EmptyCorpus,
    #[error("corpus contains an empty word")]
    EmptyWord,
    #[error("number of merges must be at least 1")]
    ZeroMerges,
    #[error("merge file line {line}: {reason}")]
    BadMerge { line: usize, reason: String },
    #[error("cannot access merge file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Ordered merge operations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeTable {
    merges: Vec<(String, String)>,
    ranks: HashMap<String, HashMap<String, usize>>,
}

impl MergeTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a merge; returns false if the pair is already present.
    pub fn push(&mut self, left: &str, right: &str) -> bool {
        if self.rank(left, right).is_some() {
            return false;
        }
        self.ranks
            .entry(left.to_owned())
            .or_default()
            .insert(right.to_owned(), self.merges.len());
        self.merges.push((left.to_owned(), right.to_owned()));
        true
    }

    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn rank(&self, left: &str, right: &str) -> Option<usize> {
        self.ranks.get(left)?.get(right).copied()
    }

    pub fn marker(&self) -> &'static str {
        CONTINUATION
    }

    /// The first `n` merges.
    pub fn truncated(&self, n: usize) -> Self {
        let mut t = MergeTable::new();
        for (l, r) in self.merges.iter().take(n) {
            t.push(l, r);
        }
        t
    }

    /// Symbols available after all merges: the initial symbols plus one per
    /// merge result.
    pub fn symbol_inventory<'a>(
        &self,
        initial: impl IntoIterator<Item = &'a str>,
    ) -> HashSet<String> {
        let mut set: HashSet<String> = initial.into_iter().map(str::to_owned).collect();
        for (l, r) in &self.merges {
            set.insert(format!("{l}{r}"));
        }
        set
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MERGES_VERSION}\n");
        for (l, r) in &self.merges {
            writeln!(out, "{l} {r}").expect("writing to a String cannot fail");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, BpeError> {
        let mut table = MergeTable::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.strip_suffix('\r').unwrap_or(raw);
            if i == 0 && row.starts_with("#version") {
                continue;
            }
            let bad = |reason: String| BpeError::BadMerge { line, reason };
            let fields: Vec<&str> = row.split(' ').collect();
            let [l, r] = fields[..] else {
                return Err(bad(format!("expected `left right`, found {row:?}")));
            };
            if l.is_empty() || r.is_empty() {
                return Err(bad("empty symbol".into()));
            }
            if !table.push(l, r) {
                return Err(bad(format!("duplicate merge {l} {r}")));
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, BpeError> {
        let text = fs::read_to_string(path).map_err(|source| BpeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), BpeError> {
        fs::write(path, self.to_text()).map_err(|source| BpeError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Initial symbols of a word: its characters, the last carrying the
/// end-of-word marker.
pub fn initial_symbols(word: &str) -> Vec<String> {
    let mut chars: Vec<String> = word.chars().map(String::from).collect();
    if let Some(last) = chars.last_mut() {
        last.push_str(END_OF_WORD);
    }
    chars
}

/// Whitespace-separated word counts.
pub fn word_frequencies<'a>(lines: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, u64> {
    let mut freq = BTreeMap::new();
    for line in lines {
        for w in line.split_whitespace() {
            *freq.entry(w.to_owned()).or_default() += 1;
        }
    }
    freq
}

struct Interner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    fn id(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s.to_owned());
        self.ids.insert(s.to_owned(), id);
        id
    }
}

type Pair = (u32, u32);
type HeapEntry = (i64, Reverse<(String, String)>, Pair);

fn push(heap: &mut BinaryHeap<HeapEntry>, sym: &Interner, p: Pair, c: i64) {
    let key = (sym.names[p.0 as usize].clone(), sym.names[p.1 as usize].clone());
    heap.push((c, Reverse(key), p));
}

fn add_pairs(word: &[u32], freq: i64, stats: &mut HashMap<Pair, i64>, changed: &mut HashSet<Pair>) {
    for w in word.windows(2) {
        let p = (w[0], w[1]);
        *stats.entry(p).or_default() += freq;
        changed.insert(p);
    }
}

fn merge_word(word: &[u32], pair: Pair, merged: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(word.len());
    let mut i = 0;
    while i < word.len() {
        if i + 1 < word.len() && (word[i], word[i + 1]) == pair {
            out.push(merged);
            i += 2;
        } else {
            out.push(word[i]);
            i += 1;
        }
    }
    out
}

/// Learns up to `num_merges` merges from word counts.
pub fn learn_bpe<S: AsRef<str>>(
    corpus: impl IntoIterator<Item = (S, u64)>,
    num_merges: usize,
) -> Result<MergeTable, BpeError> {
    if num_merges == 0 {
        return Err(BpeError::ZeroMerges);
    }
    let mut freq: BTreeMap<String, u64> = BTreeMap::new();
    for (w, n) in corpus {
        let w = w.as_ref();
        if w.is_empty() {
            return Err(BpeError::EmptyWord);
        }
        if n > 0 {
            *freq.entry(w.to_owned()).or_default() += n;
        }
    }
    if freq.is_empty() {
        return Err(BpeError::EmptyCorpus);
    }

    let mut sym = Interner {
        names: Vec::new(),
        ids: HashMap::new(),
    };
    let mut words: Vec<(Vec<u32>, i64)> = freq
        .iter()
        .map(|(w, &n)| {
            let ids = initial_symbols(w).iter().map(|s| sym.id(s)).collect();
            (ids, n as i64)
        })
        .collect();

    let mut stats: HashMap<Pair, i64> = HashMap::new();
    let mut index: HashMap<Pair, HashSet<usize>> = HashMap::new();
    let mut changed = HashSet::new();
    for (i, (w, n)) in words.iter().enumerate() {
        add_pairs(w, *n, &mut stats, &mut changed);
        for p in w.windows(2) {
            index.entry((p[0], p[1])).or_default().insert(i);
        }
    }

    // Max-heap on count, then smallest pair; stale entries are skipped.
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    for (&p, &c) in &stats {
        push(&mut heap, &sym, p, c);
    }

    let mut table = MergeTable::new();
    while table.len() < num_merges {
        let Some((count, Reverse((left, right)), pair)) = heap.pop() else {
            break;
        };
        if stats.get(&pair).copied().unwrap_or(0) != count {
            continue;
        }
        if (count as u64) < MIN_PAIR_COUNT {
            log::debug!("bpe: stopping after {} merges, best pair occurs once", table.len());
            break;
        }
        table.push(&left, &right);
        let merged = sym.id(&format!("{left}{right}"));

        let mut changed = HashSet::new();
        let mut affected: Vec<usize> = index.remove(&pair).unwrap_or_default().into_iter().collect();
        affected.sort_unstable();
        for wi in affected {
            let (old, n) = &words[wi];
            let n = *n;
            let new = merge_word(old, pair, merged);
            if new.len() == old.len() {
                continue;
            }
            add_pairs(old, -n, &mut stats, &mut changed);
            add_pairs(&new, n, &mut stats, &mut changed);
            for p in new.windows(2) {
                index.entry((p[0], p[1])).or_default().insert(wi);
            }
            words[wi].0 = new;
        }
        stats.remove(&pair);
        changed.remove(&pair);
        for p in changed {
            match stats.get(&p).copied() {
                Some(c) if c > 0 => push(&mut heap, &sym, p, c),
                _ => {
                    stats.remove(&p);
                }
            }
        }
    }
    Ok(table)
}

fn graft_escape(last: &mut String) {
    if last.trim_end_matches(ESCAPE).ends_with(CONTINUATION) {
        last.push(ESCAPE);
    }
}

/// Segments a word into subwords, non-final ones carrying the continuation
/// marker.
pub fn apply_bpe(word: &str, merges: &MergeTable) -> Vec<String> {
    let mut symbols = initial_symbols(word);
    if symbols.is_empty() {
        return symbols;
    }
    loop {
        let best = symbols
            .windows(2)
            .filter_map(|w| merges.rank(&w[0], &w[1]).map(|r| (r, w[0].clone(), w[1].clone())))
            .min_by_key(|(r, _, _)| *r);
        let Some((_, left, right)) = best else {
            break;
        };
        let mut out = Vec::with_capacity(symbols.len());
        let mut i = 0;
        while i < symbols.len() {
            if i + 1 < symbols.len() && symbols[i] == left && symbols[i + 1] == right {
                out.push(format!("{left}{right}"));
                i += 2;
            } else {
                out.push(std::mem::take(&mut symbols[i]));
                i += 1;
            }
        }
        symbols = out;
    }
    let last = symbols.last_mut().expect("non-empty word");
    last.truncate(last.len() - END_OF_WORD.len());
    if last.is_empty() {
        symbols.pop();
    }
    let n = symbols.len();
    for (i, s) in symbols.iter_mut().enumerate() {
        if i + 1 < n {
            s.push_str(CONTINUATION);
        } else {
            graft_escape(s);
        }
    }
    symbols
}

/// Segments every whitespace-separated word of a line.
pub fn apply_bpe_line(line: &str, merges: &MergeTable) -> String {
    line.split_whitespace()
        .flat_map(|w| apply_bpe(w, merges))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Whether the last subword still expects a continuation.
pub fn dangling_marker<S: AsRef<str>>(subwords: &[S]) -> bool {
    subwords
        .last()
        .is_some_and(|s| s.as_ref().ends_with(CONTINUATION))
}

/// Joins subwords back into words. A trailing continuation marker is
/// dropped and the pending pieces are emitted as one word.
pub fn bpe_decode<S: AsRef<str>>(subwords: &[S]) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    for s in subwords {
        let s = s.as_ref();
        if let Some(piece) = s.strip_suffix(CONTINUATION) {
            current.push_str(piece);
            continue;
        }
        if s.trim_end_matches(ESCAPE).ends_with(CONTINUATION) {
            current.push_str(&s[..s.len() - ESCAPE.len_utf8()]);
        } else {
            current.push_str(s);
        }
        words.push(std::mem::take(&mut current));
    }
    if dangling_marker(subwords) {
        log::warn!("bpe: sentence ends with a continuation marker");
        words.push(current);
    }
    words
}

pub fn bpe_decode_line(line: &str) -> String {
    let subwords: Vec<&str> = line.split_whitespace().collect();
    bpe_decode(&subwords).join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_merge_by_hand() {
        let t = learn_bpe([("aaab", 1)], 2).unwrap();
        assert_eq!(t.merges()[0], ("a".to_owned(), "a".to_owned()));
    }

    #[test]
    fn early_stop() {
        let t = learn_bpe([("ab", 1)], 10).unwrap();
        assert!(t.is_empty());
        let t = learn_bpe([("abc", 5)], 10).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            learn_bpe(Vec::<(&str, u64)>::new(), 3),
            Err(BpeError::EmptyCorpus)
        ));
        assert!(matches!(learn_bpe([("", 1)], 3), Err(BpeError::EmptyWord)));
        assert!(matches!(learn_bpe([("a", 1)], 0), Err(BpeError::ZeroMerges)));
    }

    #[test]
    fn tie_goes_to_smallest_pair() {
        let t = learn_bpe([("ab", 2), ("cd", 2)], 1).unwrap();
        assert_eq!(t.merges()[0], ("a".to_owned(), "b</w>".to_owned()));
    }

    #[test]
    fn trained_word_is_one_subword() {
        let t = learn_bpe([("lower", 3), ("low", 2)], 10).unwrap();
        assert_eq!(apply_bpe("lower", &t), ["lower"]);
        assert_eq!(apply_bpe("xyz", &t), ["x@@", "y@@", "z"]);
    }

    #[test]
    fn merge_file_roundtrip() {
        let t = learn_bpe([("lower", 3), ("lowest", 2)], 10).unwrap();
        let text = t.to_text();
        assert!(text.starts_with("#version: 0.2\n"));
        assert_eq!(MergeTable::parse(&text).unwrap(), t);
        assert!(MergeTable::parse("#version: 0.2\na b\na b\n").is_err());
        assert!(MergeTable::parse("a b c\n").is_err());
    }

    #[test]
    fn marker_like_words_survive() {
        let t = MergeTable::new();
        for w in ["@@", "a@@", "a@@\u{2060}", "@", "\u{2060}"] {
            let seg = apply_bpe(w, &t);
            assert_eq!(bpe_decode(&seg), [w], "{seg:?}");
        }
    }

    #[test]
    fn dangling_marker_is_joined() {
        assert_eq!(bpe_decode(&["ab@@", "c@@"]), ["abc"]);
        assert!(dangling_marker(&["ab@@"]));
        assert_eq!(bpe_decode(&["a", "b"]), ["a", "b"]);
    }

    proptest! {
        #[test]
        fn learned_table_is_lossless_on_training_words(
            words in proptest::collection::vec("[abc]{1,6}", 1..20), n in 1usize..30
        ) {
            let freq = word_frequencies(words.iter().map(String::as_str));
            let t = learn_bpe(freq.iter().map(|(w, &c)| (w.as_str(), c)), n).unwrap();
            for w in freq.keys() {
                prop_assert_eq!(bpe_decode(&apply_bpe(w, &t)), [w.clone()]);
            }
        }
    }
}
