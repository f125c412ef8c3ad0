//! Subcommand implementations.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::Context;
use conjtok::bpe::{self, apply_bpe_line, bpe_decode_line, learn_bpe, MergeTable};
use conjtok::encode::{encode_factors, factor_header, render_factor_line};
use conjtok::inflect::{ConjugationTable, RoundtripAudit};
use conjtok::morph::{parse_plain_line, AnalyzedSentence};
use conjtok::vocab::{build_vocab, coverage, CorpusStats, TokenCounts};
use conjtok::{DecodeReport, Decoder, LemmaLexicon, Scheme, TagMap};
use rayon::prelude::*;

use crate::config::{InputFormat, PipelineConfig};
use crate::pipeline::{lines, open_input, open_output, par_map, sentences, write_line, write_report, CHUNK};
use crate::Failure;

fn load_table(cfg: &PipelineConfig) -> Result<ConjugationTable, Failure> {
    match &cfg.table {
        Some(p) => Ok(ConjugationTable::load(p).context("cannot load conjugation table")?),
        None => Ok(ConjugationTable::builtin()),
    }
}

fn load_tag_map(cfg: &PipelineConfig) -> Result<TagMap, Failure> {
    match cfg.tag_map.as_deref() {
        None => Ok(TagMap::default()),
        Some("ascii") => Ok(TagMap::ascii()),
        Some(p) => Ok(TagMap::load(p.as_ref()).context("cannot load tag map")?),
    }
}

fn load_lexicon(cfg: &PipelineConfig, table: &ConjugationTable) -> Result<LemmaLexicon, Failure> {
    let path = cfg.require("lexicon", &cfg.lexicon)?;
    if !path.exists() {
        return Err(Failure::Config(format!("lexicon {} does not exist", path.display())));
    }
    Ok(LemmaLexicon::load(path, table).context("cannot load lexicon")?)
}

fn load_merges(cfg: &PipelineConfig) -> Result<MergeTable, Failure> {
    let path = cfg.require("merges", &cfg.merges)?;
    if !path.exists() {
        return Err(Failure::Config(format!("merge file {} does not exist", path.display())));
    }
    Ok(MergeTable::load(path).context("cannot load merges")?)
}

fn format_or(cfg: &PipelineConfig, default: InputFormat) -> InputFormat {
    cfg.format.unwrap_or(default)
}

/// Sentences from MeCab or plain input.
fn analyzed_input(
    cfg: &PipelineConfig,
) -> Result<Box<dyn Iterator<Item = Result<AnalyzedSentence, Failure>>>, Failure> {
    let input = open_input(cfg.input.as_deref())?;
    match format_or(cfg, InputFormat::Mecab) {
        InputFormat::Mecab => Ok(Box::new(sentences(input))),
        InputFormat::Plain => Ok(Box::new(lines(input).map(|l| l.map(|l| parse_plain_line(&l))))),
        InputFormat::Tokens => Err(Failure::Config("this command needs mecab or plain input".into())),
    }
}

fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(out, "{key}={value}").expect("writing to a String cannot fail");
}

pub fn encode(cfg: &PipelineConfig) -> Result<(), Failure> {
    let format = format_or(cfg, InputFormat::Mecab);
    if format == InputFormat::Plain && cfg.scheme != Scheme::Baseline {
        return Err(Failure::Config(format!(
            "scheme {} needs analyzed (mecab) input",
            cfg.scheme
        )));
    }
    let map = load_tag_map(cfg)?;
    let scheme = cfg.scheme;
    let mut out = open_output(cfg.output.as_deref())?;
    if scheme == Scheme::ConjFeature {
        write_line(&mut out, &factor_header())?;
    }
    let (mut sentences, mut predicates) = (0u64, 0u64);
    par_map(
        analyzed_input(cfg)?,
        |s| {
            let line = match scheme {
                Scheme::ConjFeature => render_factor_line(&encode_factors(&s)),
                Scheme::Baseline => s.surfaces().collect::<Vec<_>>().join(" "),
                _ => map.render_line(&scheme.encode(&s).expect("token scheme")),
            };
            (line, s.predicate_count())
        },
        |(line, p)| {
            sentences += 1;
            predicates += p as u64;
            write_line(&mut out, &line)
        },
    )?;
    out.flush().context("cannot write output")?;
    log::info!("encoded {sentences} sentences ({predicates} predicates) with {scheme}");
    let mut report = String::new();
    kv(&mut report, "scheme", scheme);
    kv(&mut report, "sentences", sentences);
    kv(&mut report, "predicates", predicates);
    write_report(cfg.report.as_deref(), &report)
}

pub fn decode(cfg: &PipelineConfig) -> Result<(), Failure> {
    if cfg.scheme == Scheme::ConjFeature {
        return Err(Failure::Config("factor files are source-side only and cannot be decoded".into()));
    }
    let table = load_table(cfg)?;
    let map = load_tag_map(cfg)?;
    let lexicon = match cfg.scheme {
        Scheme::Baseline if cfg.lexicon.is_none() => LemmaLexicon::default(),
        _ => load_lexicon(cfg, &table)?,
    };
    let decoder = Decoder::new(&table, &lexicon);
    let scheme = cfg.scheme;
    let mut out = open_output(cfg.output.as_deref())?;
    let mut total = DecodeReport::default();
    par_map(
        lines(open_input(cfg.input.as_deref())?),
        |line| {
            let (words, report) = decoder.decode(&map.parse_line(&line), scheme);
            (words.join(" "), report)
        },
        |(line, report)| {
            total.merge(&report);
            write_line(&mut out, &line)
        },
    )?;
    out.flush().context("cannot write output")?;
    log::info!(
        "decoded {} sentences: {} inflected, {} fallbacks",
        total.sentences,
        total.inflected,
        total.fallbacks()
    );
    if total.fallbacks() > 0 {
        log::warn!(
            "fallbacks: unknown_lemma={} inflect_failed={} orphan_conj={} extra_conj={} pos_misplaced={}",
            total.unknown_lemma,
            total.inflect_failed,
            total.orphan_conj,
            total.extra_conj,
            total.pos_misplaced
        );
    }
    write_report(cfg.report.as_deref(), &total.to_key_values())
}

pub fn lexicon(cfg: &PipelineConfig) -> Result<(), Failure> {
    let table = load_table(cfg)?;
    let mut lex = LemmaLexicon::default();
    let mut chunk = Vec::with_capacity(CHUNK);
    for s in analyzed_input(cfg)? {
        chunk.push(s?);
        if chunk.len() == CHUNK {
            lex.add_corpus(&chunk, &table);
            chunk.clear();
        }
    }
    lex.add_corpus(&chunk, &table);
    let mut out = open_output(cfg.output.as_deref())?;
    out.write_all(lex.to_tsv().as_bytes())
        .and_then(|_| out.flush())
        .context("cannot write lexicon")?;
    log::info!("lexicon: {} lemmas", lex.len());
    let mut report = String::new();
    kv(&mut report, "lemmas", lex.len());
    write_report(cfg.report.as_deref(), &report)
}

/// Splits a line into tab-separated columns and applies `f` to the ones
/// `side` selects.
fn map_columns(line: &str, cfg: &PipelineConfig, f: impl Fn(&str) -> String) -> String {
    let cols: Vec<&str> = line.split('\t').collect();
    let n = cols.len();
    cols.iter()
        .enumerate()
        .map(|(i, c)| if cfg.side.selects(i, n) { f(c) } else { (*c).to_owned() })
        .collect::<Vec<_>>()
        .join("\t")
}

fn text_lines(
    cfg: &PipelineConfig,
) -> Result<Box<dyn Iterator<Item = Result<String, Failure>>>, Failure> {
    let input = open_input(cfg.input.as_deref())?;
    match format_or(cfg, InputFormat::Plain) {
        InputFormat::Mecab => Ok(Box::new(sentences(input).map(|s| {
            s.map(|s| s.surfaces().collect::<Vec<_>>().join(" "))
        }))),
        _ => Ok(Box::new(lines(input))),
    }
}

pub fn bpe_learn(cfg: &PipelineConfig) -> Result<(), Failure> {
    let mut freq = std::collections::BTreeMap::<String, u64>::new();
    for line in text_lines(cfg)? {
        let line = line?;
        let cols: Vec<&str> = line.split('\t').collect();
        let n = cols.len();
        for (i, c) in cols.iter().enumerate() {
            if cfg.side.selects(i, n) {
                for w in c.split_whitespace() {
                    *freq.entry(w.to_owned()).or_default() += 1;
                }
            }
        }
    }
    let words = freq.len();
    let table = learn_bpe(freq, cfg.num_merges).context("cannot learn BPE")?;
    log::info!("learned {} of {} merges from {words} word types", table.len(), cfg.num_merges);
    match (&cfg.merges, &cfg.output) {
        (Some(path), _) | (None, Some(path)) => table.save(path).context("cannot write merges")?,
        (None, None) => {
            let mut out = open_output(None)?;
            out.write_all(table.to_text().as_bytes())
                .and_then(|_| out.flush())
                .context("cannot write merges")?;
        }
    }
    let mut report = String::new();
    kv(&mut report, "word_types", words);
    kv(&mut report, "merges", table.len());
    kv(&mut report, "requested_merges", cfg.num_merges);
    write_report(cfg.report.as_deref(), &report)
}

pub fn bpe_apply(cfg: &PipelineConfig, reverse: bool) -> Result<(), Failure> {
    let merges = if reverse { MergeTable::new() } else { load_merges(cfg)? };
    let mut out = open_output(cfg.output.as_deref())?;
    let mut dangling = 0u64;
    par_map(
        text_lines(cfg)?,
        |line| {
            if reverse {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                let d = bpe::dangling_marker(&tokens);
                (map_columns(&line, cfg, bpe_decode_line), d)
            } else {
                (map_columns(&line, cfg, |c| apply_bpe_line(c, &merges)), false)
            }
        },
        |(line, d)| {
            dangling += d as u64;
            write_line(&mut out, &line)
        },
    )?;
    out.flush().context("cannot write output")?;
    if dangling > 0 {
        log::warn!("{dangling} lines ended with a continuation marker");
    }
    let mut report = String::new();
    kv(&mut report, "dangling_markers", dangling);
    write_report(cfg.report.as_deref(), &report)
}

/// Token counts of the input under the configured scheme.
fn count_tokens(cfg: &PipelineConfig, default: InputFormat) -> Result<TokenCounts, Failure> {
    let map = load_tag_map(cfg)?;
    let scheme = cfg.scheme;
    let mut total = TokenCounts::new();
    match format_or(cfg, default) {
        InputFormat::Tokens | InputFormat::Plain => {
            for line in lines(open_input(cfg.input.as_deref())?) {
                total.add_tokens(&map.parse_line(&line?), &map);
            }
        }
        InputFormat::Mecab => {
            par_map(
                analyzed_input(cfg)?,
                |s| {
                    let mut c = TokenCounts::new();
                    c.add_sentence(&s, scheme, &map);
                    c
                },
                |c| {
                    total.merge(c);
                    Ok(())
                },
            )?;
        }
    }
    Ok(total)
}

pub fn vocab(cfg: &PipelineConfig) -> Result<(), Failure> {
    let counts = count_tokens(cfg, InputFormat::Tokens)?;
    let v = build_vocab(&counts, cfg.vocab_size, cfg.reserved).context("cannot build vocabulary")?;
    let mut out = open_output(cfg.output.as_deref())?;
    out.write_all(v.to_tsv().as_bytes())
        .and_then(|_| out.flush())
        .context("cannot write vocabulary")?;
    log::info!("vocabulary: kept {} of {} types", v.len(), counts.distinct());
    let mut report = String::new();
    kv(&mut report, "distinct_types", counts.distinct());
    kv(&mut report, "running_tokens", counts.running());
    kv(&mut report, "kept", v.len());
    kv(&mut report, "reserved", v.reserved());
    write_report(cfg.report.as_deref(), &report)
}

pub fn coverage_cmd(cfg: &PipelineConfig) -> Result<(), Failure> {
    let counts = count_tokens(cfg, InputFormat::Mecab)?;
    let v = build_vocab(&counts, cfg.vocab_size, cfg.reserved).context("cannot build vocabulary")?;
    let r = coverage(&v, &counts, cfg.scheme);
    let mut out = open_output(cfg.output.as_deref())?;
    let text = format!(
        "scheme\tvocab\ttypes\toov_types\ttype_coverage\ttoken_coverage\tspecial\n\
         {}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{}\n",
        r.scheme,
        v.len(),
        r.distinct_types,
        r.oov_types,
        r.type_coverage,
        r.token_coverage,
        r.special_token_count
    );
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .context("cannot write output")?;
    write_report(cfg.report.as_deref(), &r.to_key_values())
}

fn corpus_stats(cfg: &PipelineConfig, map: &TagMap) -> Result<CorpusStats, Failure> {
    let mut total = CorpusStats::new();
    let mut items = analyzed_input(cfg)?.peekable();
    while items.peek().is_some() {
        let chunk: Vec<AnalyzedSentence> = items.by_ref().take(CHUNK).collect::<Result<_, _>>()?;
        let stats = chunk
            .par_iter()
            .fold(CorpusStats::new, |mut acc, s| {
                acc.add(s, map);
                acc
            })
            .reduce(CorpusStats::new, |mut a, b| {
                a.merge(b);
                a
            });
        total.merge(stats);
    }
    Ok(total)
}

pub fn compare(cfg: &PipelineConfig) -> Result<(), Failure> {
    if format_or(cfg, InputFormat::Mecab) != InputFormat::Mecab {
        return Err(Failure::Config("compare needs mecab input".into()));
    }
    let map = load_tag_map(cfg)?;
    let stats = corpus_stats(cfg, &map)?;
    let mut table = String::from(
        "scheme\ttypes\tvocab\ttype_coverage\ttoken_coverage\treduced_by\tretained\tpredicate_reduced_by\tspecial\n",
    );
    let mut report = String::new();
    kv(&mut report, "vocab_size", cfg.vocab_size);
    for scheme in Scheme::ALL {
        let counts = stats.counts(scheme);
        if counts.distinct() == 0 {
            return Err(Failure::Data(anyhow::anyhow!("input has no tokens")));
        }
        let v = build_vocab(&counts, cfg.vocab_size, cfg.reserved).context("cannot build vocabulary")?;
        let cov = coverage(&v, &counts, scheme);
        let comp = stats.compression(scheme);
        writeln!(
            table,
            "{scheme}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}",
            counts.distinct(),
            v.len(),
            cov.type_coverage,
            cov.token_coverage,
            comp.all.reduction(),
            comp.all.retained(),
            comp.predicates.reduction(),
            comp.special_types
        )
        .expect("writing to a String cannot fail");
        report.push_str(&cov.to_key_values());
        report.push_str(&comp.to_key_values());
    }
    let mut out = open_output(cfg.output.as_deref())?;
    out.write_all(table.as_bytes())
        .and_then(|_| out.flush())
        .context("cannot write output")?;
    write_report(cfg.report.as_deref(), &report)
}

#[derive(Default)]
struct RoundtripTally {
    audit: RoundtripAudit,
    exact: [u64; 4],
    sentences: u64,
    decode: DecodeReport,
}

pub fn roundtrip(cfg: &PipelineConfig) -> Result<(), Failure> {
    if format_or(cfg, InputFormat::Mecab) != InputFormat::Mecab {
        return Err(Failure::Config("roundtrip needs mecab input".into()));
    }
    let table = load_table(cfg)?;
    let map = load_tag_map(cfg)?;
    // Without a lexicon the input is read twice, or buffered when it is stdin.
    let mut buffered: Option<Vec<AnalyzedSentence>> = None;
    let lexicon = if cfg.lexicon.is_some() {
        load_lexicon(cfg, &table)?
    } else if cfg.input.is_some() {
        let mut lex = LemmaLexicon::default();
        let mut chunk = Vec::with_capacity(CHUNK);
        for s in analyzed_input(cfg)? {
            chunk.push(s?);
            if chunk.len() == CHUNK {
                lex.add_corpus(&chunk, &table);
                chunk.clear();
            }
        }
        lex.add_corpus(&chunk, &table);
        lex
    } else {
        let all: Vec<AnalyzedSentence> = analyzed_input(cfg)?.collect::<Result<_, _>>()?;
        let lex = LemmaLexicon::build(&all, &table);
        buffered = Some(all);
        lex
    };
    let decoder = Decoder::new(&table, &lexicon);
    let items: Box<dyn Iterator<Item = Result<AnalyzedSentence, Failure>>> = match buffered {
        Some(all) => Box::new(all.into_iter().map(Ok)),
        None => analyzed_input(cfg)?,
    };
    let mut tally = RoundtripTally::default();
    par_map(
        items,
        |s| {
            let audit = RoundtripAudit::run(&table, [&s]);
            let want: Vec<&str> = s.surfaces().collect();
            let mut exact = [false; 4];
            let mut decode = DecodeReport::default();
            for (i, scheme) in Scheme::DECODABLE.into_iter().enumerate() {
                let line = map.render_line(&scheme.encode(&s).expect("token scheme"));
                let (words, report) = decoder.decode(&map.parse_line(&line), scheme);
                exact[i] = words == want;
                decode.merge(&report);
            }
            (audit, exact, decode)
        },
        |(audit, exact, decode)| {
            tally.audit.merge(audit);
            for (n, ok) in tally.exact.iter_mut().zip(exact) {
                *n += ok as u64;
            }
            tally.sentences += 1;
            tally.decode.merge(&decode);
            Ok(())
        },
    )?;

    let mut text = String::new();
    let mut report = String::new();
    let mut failing = Vec::new();
    let audit_rate = tally.audit.rate();
    writeln!(
        text,
        "check_roundtrip\t{}/{}\t{:.4}",
        tally.audit.restored(),
        tally.audit.checked(),
        audit_rate
    )
    .expect("writing to a String cannot fail");
    kv(&mut report, "predicates_checked", tally.audit.checked());
    kv(&mut report, "predicates_restored", tally.audit.restored());
    kv(&mut report, "check_roundtrip_rate", format!("{audit_rate:.6}"));
    if audit_rate < cfg.threshold {
        failing.push(format!("check_roundtrip {audit_rate:.4}"));
    }
    for ((conj_type, conj_form), n) in &tally.audit.missing {
        log::warn!("table has no rule for ({conj_type}, {conj_form}), seen {n} times");
        kv(&mut report, &format!("missing.{conj_type}.{conj_form}"), n);
    }
    for m in &tally.audit.mismatches {
        log::warn!("not restored: {} ({})", m.surface, m.lemma);
    }
    kv(&mut report, "sentences", tally.sentences);
    for (scheme, exact) in Scheme::DECODABLE.into_iter().zip(tally.exact) {
        let rate = if tally.sentences == 0 {
            1.0
        } else {
            exact as f64 / tally.sentences as f64
        };
        writeln!(text, "{scheme}\t{exact}/{}\t{rate:.4}", tally.sentences)
            .expect("writing to a String cannot fail");
        kv(&mut report, &format!("{scheme}.exact"), exact);
        kv(&mut report, &format!("{scheme}.rate"), format!("{rate:.6}"));
        if rate < cfg.threshold {
            failing.push(format!("{scheme} {rate:.4}"));
        }
    }
    kv(&mut report, "decode_fallbacks", tally.decode.fallbacks());
    let mut out = open_output(cfg.output.as_deref())?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .context("cannot write output")?;
    write_report(cfg.report.as_deref(), &report)?;
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Threshold(format!(
            "below {}: {}",
            cfg.threshold,
            failing.join(", ")
        )))
    }
}
