//! Streaming input/output and order-preserving parallel mapping.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use conjtok::morph::{AnalyzedSentence, MecabReader};
use rayon::prelude::*;

use crate::Failure;

/// Sentences handed to the worker pool at a time.
pub const CHUNK: usize = 4096;

pub fn open_input(path: Option<&Path>) -> Result<Box<dyn BufRead>, Failure> {
    match path {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            Ok(Box::new(BufReader::new(f)))
        }
        None => Ok(Box::new(BufReader::new(io::stdin()))),
    }
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn write_report(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    if let Some(p) = path {
        std::fs::write(p, text).with_context(|| format!("cannot write report {}", p.display()))?;
    }
    Ok(())
}

/// Lines of a UTF-8 stream; invalid UTF-8 is a data error.
pub fn lines(input: Box<dyn BufRead>) -> impl Iterator<Item = Result<String, Failure>> {
    input.lines().enumerate().map(|(i, l)| {
        l.map(|l| l.strip_suffix('\r').map(str::to_owned).unwrap_or(l))
            .with_context(|| format!("input line {}", i + 1))
            .map_err(Failure::Data)
    })
}

pub fn sentences(input: Box<dyn BufRead>) -> impl Iterator<Item = Result<AnalyzedSentence, Failure>> {
    MecabReader::new(input).map(|r| r.context("malformed MeCab input").map_err(Failure::Data))
}

/// Applies `f` to every item on the worker pool, chunk by chunk, and hands
/// the results to `sink` in input order.
pub fn par_map<T, U, F, S>(
    items: impl Iterator<Item = Result<T, Failure>>,
    f: F,
    mut sink: S,
) -> Result<(), Failure>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync,
    S: FnMut(U) -> Result<(), Failure>,
{
    let mut items = items.peekable();
    while items.peek().is_some() {
        let chunk: Vec<T> = items.by_ref().take(CHUNK).collect::<Result<_, _>>()?;
        let out: Vec<U> = chunk.into_par_iter().map(&f).collect();
        for u in out {
            sink(u)?;
        }
    }
    Ok(())
}

pub fn write_line(out: &mut dyn Write, line: &str) -> Result<(), Failure> {
    out.write_all(line.as_bytes())
        .and_then(|_| out.write_all(b"\n"))
        .context("cannot write output")
        .map_err(Failure::Data)
}
