//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any gating criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use conjtok::bpe::{apply_bpe, apply_bpe_line, bpe_decode_line, learn_bpe, word_frequencies, MergeTable};
use conjtok::decode::{Decoder, LemmaLexicon};
use conjtok::encode::{encode_conj_token, encode_pos_tokens, Placement, Scheme};
use conjtok::inflect::{ConjugationTable, ParadigmCell};
use conjtok::morph::{parse_corpus, AnalyzedSentence, Morpheme, PREDICATE_POS};
use conjtok::token::{TagMap, Token};
use conjtok::vocab::{build_vocab, compression_report, coverage, TokenCounts, DEFAULT_RESERVED};
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn load_corpus(name: &str) -> Vec<AnalyzedSentence> {
    parse_corpus(&read_fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

type Paradigm = [(ParadigmCell, &'static [&'static str]); 6];

fn paradigm_surfaces() -> Outcome {
    use ParadigmCell::*;
    let start = Instant::now();
    let table = ConjugationTable::builtin();
    let expected: [(&str, &str, Paradigm); 3] = [
        (
            "走る",
            "五段・ラ行",
            [
                (Irrealis, &["走ら", "走ろ"]),
                (Continuative, &["走り"]),
                (Terminal, &["走る"]),
                (Attributive, &["走る"]),
                (Hypothetical, &["走れ"]),
                (Imperative, &["走れ"]),
            ],
        ),
        (
            "歩く",
            "五段・カ行イ音便",
            [
                (Irrealis, &["歩か", "歩こ"]),
                (Continuative, &["歩き"]),
                (Terminal, &["歩く"]),
                (Attributive, &["歩く"]),
                (Hypothetical, &["歩け"]),
                (Imperative, &["歩け"]),
            ],
        ),
        (
            "する",
            "サ変・スル",
            [
                (Irrealis, &["せ", "し"]),
                (Continuative, &["し"]),
                (Terminal, &["する"]),
                (Attributive, &["する"]),
                (Hypothetical, &["すれ"]),
                (Imperative, &["しろ", "せよ"]),
            ],
        ),
    ];
    let mut surfaces = 0;
    for (lemma, conj_type, cells) in expected {
        for (cell, want) in cells {
            let got = table
                .inflect_variants(lemma, conj_type, cell)
                .map_err(|e| format!("{lemma} {cell}: {e}"))?;
            ensure(got == want, || format!("{lemma} {cell}: got {got:?}, want {want:?}"))?;
            surfaces += want.len();
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("{surfaces} surfaces in 18 cells, {elapsed:?}"))
}

fn conj_token_goldens() -> Outcome {
    let cases = [
        ("走る\t動詞,自立,*,*,五段・ラ行,基本形,走る,ハシル,ハシル", "走る <動詞・基本形>"),
        ("走れ\t動詞,自立,*,*,五段・ラ行,命令ｅ,走る,ハシレ,ハシレ", "走る <動詞・命令ｅ>"),
        ("な\t助動詞,*,*,*,特殊・ダ,体言接続,だ,ナ,ナ", "だ <助動詞・体言接続>"),
    ];
    let map = TagMap::default();
    for (line, want) in cases {
        let s = parse_corpus(&format!("{line}\nEOS\n")).map_err(|e| e.to_string())?;
        let got = map.render_line(&encode_conj_token(&s[0]));
        ensure(got == want, || format!("{line}: got {got}, want {want}"))?;
    }
    Ok("3/3 exact".into())
}

fn pos_token_goldens() -> Outcome {
    let corpus = load_corpus("small.mecab");
    let s = &corpus[0];
    ensure(s.text() == "私は走る。", || format!("first fixture sentence is {}", s.text()))?;
    let map = TagMap::ascii();
    let cases = [
        (Placement::Suffix, "私 <noun> は <particle> 走る <verb-plain> <verb> 。 <symbol>"),
        (Placement::Prefix, "<noun> 私 <particle> は <verb> <verb-plain> 走る <symbol> 。"),
        (Placement::Circumfix, "<noun> 私 <particle> は <verb> 走る <verb-plain> <symbol> 。"),
    ];
    for (placement, want) in cases {
        let got = map.render_line(&encode_pos_tokens(s, placement));
        ensure(got == want, || format!("{placement}: got {got}, want {want}"))?;
    }
    Ok("suffix, prefix, circumfix exact".into())
}

fn morpheme_surfaces(s: &AnalyzedSentence) -> Vec<&str> {
    s.surfaces().collect()
}

fn roundtrip_identity() -> Outcome {
    let corpus = load_corpus("analyzed.mecab");
    let table = ConjugationTable::builtin();
    ensure(corpus.len() >= 500, || format!("only {} sentences", corpus.len()))?;
    let observed: BTreeSet<&str> = corpus
        .iter()
        .flat_map(|s| &s.morphemes)
        .filter(|m| m.is_predicate())
        .filter_map(|m| m.conjugation().map(|(t, _)| t))
        .collect();
    let missing: Vec<&str> = table.types().filter(|t| !observed.contains(t)).collect();
    ensure(missing.is_empty(), || format!("types absent from fixture: {missing:?}"))?;

    let start = Instant::now();
    let lex = LemmaLexicon::build(&corpus, &table);
    let decoder = Decoder::new(&table, &lex);
    let maps = [TagMap::default(), TagMap::ascii()];
    let mut checked = 0;
    for scheme in Scheme::DECODABLE {
        for map in &maps {
            for s in &corpus {
                let line = map.render_line(&scheme.encode(s).expect("token scheme"));
                let tokens = map.parse_line(&line);
                let (words, report) = decoder.decode(&tokens, scheme);
                let want = morpheme_surfaces(s);
                ensure(words == want, || {
                    format!("{scheme}: {line} decoded to {words:?}, want {want:?}")
                })?;
                ensure(report.fallbacks() == 0, || format!("{scheme}: fallbacks on {line}"))?;
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!(
        "{} sentences x 4 schemes x 2 tag maps = {checked} exact, {} types covered, {elapsed:?}",
        corpus.len(),
        observed.len()
    ))
}

fn special_token_bound() -> Outcome {
    let corpus = load_corpus("analyzed.mecab");
    let mut tokens: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for s in &corpus {
        for t in encode_conj_token(s) {
            if let Token::Conj { pos, form } = t {
                let pos = PREDICATE_POS
                    .into_iter()
                    .find(|p| *p == pos)
                    .ok_or_else(|| format!("non-predicate conj token {pos}"))?;
                tokens.entry(pos).or_default().insert(form);
            }
        }
    }
    let n = |p: &str| tokens.get(p).map_or(0, BTreeSet::len);
    let (verb, adj, aux) = (n("動詞"), n("形容詞"), n("助動詞"));
    let total = verb + adj + aux;
    ensure(verb <= 19 && adj <= 14 && aux <= 22 && total <= 55, || {
        format!("verb {verb}, adjective {adj}, auxiliary {aux}, total {total}")
    })?;
    Ok(format!("verb {verb}/19, adjective {adj}/14, auxiliary {aux}/22, total {total}/55"))
}

fn bpe_oracle() -> Outcome {
    let start = Instant::now();
    let corpus = read_fixture("bpe/toy_corpus.txt");
    let reference = MergeTable::parse(&read_fixture("bpe/toy_merges.txt")).map_err(|e| e.to_string())?;
    let freq = word_frequencies(corpus.lines());
    ensure(freq.len() == 100, || format!("toy corpus has {} words", freq.len()))?;
    let learned = learn_bpe(freq.iter().map(|(w, &n)| (w.as_str(), n)), 50).map_err(|e| e.to_string())?;
    ensure(learned.merges() == reference.merges(), || {
        let at = learned
            .merges()
            .iter()
            .zip(reference.merges())
            .position(|(a, b)| a != b)
            .unwrap_or(learned.len().min(reference.len()));
        format!("merges differ at {at} (learned {}, reference {})", learned.len(), reference.len())
    })?;
    let mut agree = 0;
    let segmented = read_fixture("bpe/toy_segmented.tsv");
    for row in segmented.lines() {
        let (word, want) = row.split_once('\t').ok_or("bad oracle row")?;
        let got = apply_bpe(word, &learned).join(" ");
        ensure(got == want, || format!("{word}: got {got}, reference {want}"))?;
        agree += 1;
    }
    ensure(agree == 100, || format!("{agree} oracle rows"))?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("50/50 merges, {agree}/100 segmentations, {elapsed:?}"))
}

fn bpe_losslessness() -> Outcome {
    let toy = read_fixture("bpe/toy_corpus.txt");
    let toy_freq = word_frequencies(toy.lines());
    let toy_merges = learn_bpe(toy_freq.iter().map(|(w, &n)| (w.as_str(), n)), 50).map_err(|e| e.to_string())?;
    let cases = 1000;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = proptest::collection::vec("\\S{1,8}", 1..12);
    runner
        .run(&strategy, |words| {
            let sentence = words.join(" ");
            let own_freq = word_frequencies([sentence.as_str()]);
            let own = learn_bpe(own_freq.iter().map(|(w, &n)| (w.as_str(), n)), 20).expect("non-empty");
            for merges in [&toy_merges, &own, &MergeTable::new()] {
                let back = bpe_decode_line(&apply_bpe_line(&sentence, merges));
                proptest::prop_assert_eq!(&back, &sentence);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{cases} random sentences x 3 merge tables, 100% identity"))
}

/// Independent recount straight from MeCab lines.
fn brute_force_tokens(text: &str, conj: bool) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for line in text.lines().filter(|l| *l != "EOS") {
        let (surface, feats) = line.split_once('\t').unwrap();
        let f: Vec<&str> = feats.split(',').collect();
        let predicate = ["動詞", "形容詞", "助動詞"].contains(&f[0]) && f[4] != "*" && f[5] != "*";
        if conj && predicate {
            *counts.entry(f[6].to_owned()).or_insert(0) += 1;
            *counts.entry(format!("<{}・{}>", f[0], f[5])).or_insert(0) += 1;
        } else {
            *counts.entry(surface.to_owned()).or_insert(0) += 1;
        }
    }
    counts
}

fn brute_force_coverage(counts: &BTreeMap<String, u64>, keep: usize) -> (f64, f64) {
    let mut sorted: Vec<(&String, &u64)> = counts.iter().collect();
    sorted.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    let kept: BTreeSet<&String> = sorted.iter().take(keep).map(|(t, _)| *t).collect();
    let types = kept.len() as f64 / counts.len() as f64;
    let total: u64 = counts.values().sum();
    let covered: u64 = counts.iter().filter(|(t, _)| kept.contains(t)).map(|(_, n)| n).sum();
    (types, covered as f64 / total as f64)
}

fn vocab_analytics() -> Outcome {
    let text = read_fixture("small.mecab");
    let corpus = parse_corpus(&text).map_err(|e| e.to_string())?;
    ensure(corpus.len() == 20, || format!("{} sentences", corpus.len()))?;
    let map = TagMap::default();
    let mut lines = Vec::new();
    for (scheme, conj) in [(Scheme::Baseline, false), (Scheme::ConjToken, true)] {
        let counts = TokenCounts::from_corpus(&corpus, scheme, &map);
        let oracle = brute_force_tokens(&text, conj);
        ensure(counts.counts == oracle, || format!("{scheme}: token counts differ"))?;
        for keep in [10, 40, 80, 1000] {
            let v = build_vocab(&counts, keep + DEFAULT_RESERVED, DEFAULT_RESERVED).map_err(|e| e.to_string())?;
            let r = coverage(&v, &counts, scheme);
            let (types, tokens) = brute_force_coverage(&oracle, keep);
            ensure(r.type_coverage == types && r.token_coverage == tokens, || {
                format!(
                    "{scheme} @{keep}: ({}, {}) vs oracle ({types}, {tokens})",
                    r.type_coverage, r.token_coverage
                )
            })?;
        }
        lines.push(format!("{scheme} {} types", oracle.len()));
    }
    let base = brute_force_tokens(&text, false);
    let enc = brute_force_tokens(&text, true);
    let r = compression_report(&corpus, Scheme::ConjToken, &map);
    ensure(r.all.baseline_types == base.len() && r.all.encoded_types == enc.len(), || {
        format!("all-type counts {:?} vs oracle ({}, {})", r.all, base.len(), enc.len())
    })?;
    ensure(r.all.reduction() == 1.0 - enc.len() as f64 / base.len() as f64, || "reduction".into())?;
    let mut surfaces = BTreeSet::new();
    let mut lemmas = BTreeSet::new();
    for line in text.lines().filter(|l| *l != "EOS") {
        let (surface, feats) = line.split_once('\t').unwrap();
        let f: Vec<&str> = feats.split(',').collect();
        if ["動詞", "形容詞", "助動詞"].contains(&f[0]) && f[4] != "*" {
            surfaces.insert(surface);
            lemmas.insert(f[6]);
        }
    }
    ensure(
        r.predicates.baseline_types == surfaces.len() && r.predicates.encoded_types == lemmas.len(),
        || format!("predicate counts {:?} vs oracle ({}, {})", r.predicates, surfaces.len(), lemmas.len()),
    )?;
    Ok(format!(
        "{}; predicates {} surfaces -> {} lemmas; coverage at 4 sizes exact",
        lines.join(", "),
        surfaces.len(),
        lemmas.len()
    ))
}

fn synthetic_verbs(table: &ConjugationTable) -> Vec<AnalyzedSentence> {
    let stems: Vec<char> = ('亜'..).take(200).collect();
    let forms = ["基本形", "未然形", "連用形", "連用タ接続", "未然ウ接続"];
    let mut corpus = Vec::new();
    for (i, stem) in stems.iter().enumerate() {
        let lemma = format!("{stem}る");
        for (j, form) in forms.iter().enumerate() {
            let surface = table.inflect(&lemma, "五段・ラ行", form).expect("godan rule");
            for _ in 0..(1 + (i + j) % 3) {
                corpus.push(AnalyzedSentence::new(vec![
                    Morpheme::word("彼", "名詞", "代名詞"),
                    Morpheme::word("が", "助詞", "格助詞"),
                    Morpheme::conjugated(&surface, "動詞", "自立", "五段・ラ行", form, &lemma),
                    Morpheme::word("。", "記号", "句点"),
                ]));
            }
        }
    }
    corpus
}

fn coverage_direction() -> Outcome {
    let table = ConjugationTable::builtin();
    let corpus = synthetic_verbs(&table);
    let map = TagMap::default();
    let limit = 300;
    let mut reports = Vec::new();
    for scheme in [Scheme::Baseline, Scheme::ConjToken] {
        let counts = TokenCounts::from_corpus(&corpus, scheme, &map);
        let v = build_vocab(&counts, limit, DEFAULT_RESERVED).map_err(|e| e.to_string())?;
        reports.push(coverage(&v, &counts, scheme));
    }
    let (base, conj) = (&reports[0], &reports[1]);
    ensure(
        conj.type_coverage > base.type_coverage && conj.token_coverage > base.token_coverage,
        || format!("baseline {base:?} vs conj-token {conj:?}"),
    )?;
    Ok(format!(
        "vocab {limit}: type {:.4} -> {:.4}, token {:.4} -> {:.4}",
        base.type_coverage, conj.type_coverage, base.token_coverage, conj.token_coverage
    ))
}

const TANAKA_ENV: &str = "CONJTOK_TANAKA_MECAB";
const TANAKA_TARGET: f64 = 0.861;

/// Informational only: compares the reported reduction on a user-supplied
/// analyzed corpus with the published figure.
fn tanaka_reduction() -> Option<Outcome> {
    let path = std::env::var_os(TANAKA_ENV)?;
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => return Some(Err(format!("{}: {e}", PathBuf::from(path).display()))),
    };
    let corpus = match parse_corpus(&text) {
        Ok(c) => c,
        Err(e) => return Some(Err(e.to_string())),
    };
    let r = compression_report(&corpus, Scheme::ConjToken, &TagMap::default());
    let candidates = [
        ("all.reduced_by", r.all.reduction()),
        ("all.retained", r.all.retained()),
        ("predicate.reduced_by", r.predicates.reduction()),
        ("predicate.retained", r.predicates.retained()),
    ];
    let detail = candidates
        .iter()
        .map(|(k, v)| format!("{k}={v:.4}"))
        .collect::<Vec<_>>()
        .join(" ");
    let hit = candidates
        .iter()
        .any(|(_, v)| (v - TANAKA_TARGET).abs() <= 0.03);
    Some(if hit {
        Ok(format!("{} sentences: {detail}", corpus.len()))
    } else {
        Err(format!("{} sentences: {detail}, none within 0.03 of {TANAKA_TARGET}", corpus.len()))
    })
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("paradigm surfaces", paradigm_surfaces),
        ("conjugation-token goldens", conj_token_goldens),
        ("POS-token goldens", pos_token_goldens),
        ("round-trip identity", roundtrip_identity),
        ("special-token bound", special_token_bound),
        ("BPE reference agreement", bpe_oracle),
        ("BPE losslessness", bpe_losslessness),
        ("vocabulary analytics", vocab_analytics),
        ("coverage direction", coverage_direction),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    match tanaka_reduction() {
        None => println!("SKIP [10] Tanaka vocabulary reduction: set {TANAKA_ENV} to an analyzed corpus"),
        Some(Ok(detail)) => println!("PASS [10] Tanaka vocabulary reduction (informational): {detail}"),
        Some(Err(detail)) => println!("DIAG [10] Tanaka vocabulary reduction (informational): {detail}"),
    }
    println!("{} of {} gating criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
