//! Pipeline configuration: command-line flags over a TOML file over defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use conjtok::{Placement, Scheme};
use serde::Deserialize;

use crate::Failure;

pub const DEFAULT_NUM_MERGES: usize = 16_000;
pub const DEFAULT_VOCAB_SIZE: usize = 30_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// MeCab output, one morpheme per line, `EOS` after each sentence.
    Mecab,
    /// One sentence per line, words separated by spaces.
    Plain,
    /// Encoded token streams, one sentence per line.
    Tokens,
}

/// Column of a tab-separated bitext; lines without a tab are one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Ja,
    En,
    Both,
}

impl Side {
    pub fn selects(self, column: usize, columns: usize) -> bool {
        columns == 1
            || match self {
                Side::Ja => column == 0,
                Side::En => column == 1,
                Side::Both => true,
            }
    }
}

macro_rules! display_value_enum {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let v = self.to_possible_value().expect("no skipped variants");
                f.write_str(v.get_name())
            }
        }
    };
}
display_value_enum!(InputFormat);
display_value_enum!(Side);

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with defaults for any of these options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// baseline, conj-token, conj-feature, suffix, prefix, circumfix, or pos
    /// (POS tokens with --placement).
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// POS tag placement for `--scheme pos`: suffix, prefix or circumfix.
    #[arg(long, global = true)]
    pub placement: Option<String>,
    /// Conjugation table directory or rules file (default: built-in table).
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    /// Lemma lexicon TSV used for decoding.
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// BPE merge file.
    #[arg(long, global = true)]
    pub merges: Option<PathBuf>,
    #[arg(long, global = true)]
    pub num_merges: Option<usize>,
    #[arg(long, global = true)]
    pub vocab_size: Option<usize>,
    /// Reserved vocabulary entries (unknown word, end of sentence).
    #[arg(long, global = true)]
    pub reserved: Option<usize>,
    /// Tag display map: a TSV path, or `ascii` for the built-in map.
    #[arg(long, global = true)]
    pub tag_map: Option<String>,
    /// Worker threads (0 = available processors).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write a key=value report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[arg(long, short, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<InputFormat>,
    #[arg(long, global = true, value_enum)]
    pub side: Option<Side>,
    /// Minimum round-trip rate for `roundtrip` to succeed.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    scheme: Option<String>,
    placement: Option<String>,
    table: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    merges: Option<PathBuf>,
    num_merges: Option<usize>,
    vocab_size: Option<usize>,
    reserved: Option<usize>,
    tag_map: Option<String>,
    threads: Option<usize>,
    report: Option<PathBuf>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    format: Option<InputFormat>,
    side: Option<Side>,
    threshold: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub scheme: Scheme,
    pub placement: Placement,
    pub table: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub merges: Option<PathBuf>,
    pub num_merges: usize,
    pub vocab_size: usize,
    pub reserved: usize,
    pub tag_map: Option<String>,
    pub threads: usize,
    pub report: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<InputFormat>,
    pub side: Side,
    pub threshold: f64,
}

fn resolve_scheme(scheme: Option<&str>, placement: Option<&str>) -> Result<(Scheme, Placement), Failure> {
    let placement_given = placement.is_some();
    let placement = match placement {
        Some(p) => Placement::from_str(p).map_err(Failure::Config)?,
        None => Placement::Suffix,
    };
    let scheme = match scheme {
        None => Scheme::ConjToken,
        Some("pos") => Scheme::with_placement(placement),
        Some(s) => Scheme::from_str(s).map_err(Failure::Config)?,
    };
    match scheme.placement() {
        Some(p) if placement_given && p != placement => Err(Failure::Config(format!(
            "--scheme {scheme} conflicts with --placement {placement}"
        ))),
        Some(p) => Ok((scheme, p)),
        None => Ok((scheme, placement)),
    }
}

fn check_readable(what: &str, path: &Option<PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) if !p.exists() => Err(Failure::Config(format!("{what} {} does not exist", p.display()))),
        _ => Ok(()),
    }
}

impl PipelineConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, Failure> {
        let file = match &flags.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        macro_rules! pick {
            ($field:ident) => {
                flags.$field.clone().or(file.$field.clone())
            };
        }
        let scheme_name = pick!(scheme);
        let placement_name = pick!(placement);
        let (scheme, placement) = resolve_scheme(scheme_name.as_deref(), placement_name.as_deref())?;
        let config = PipelineConfig {
            scheme,
            placement,
            table: pick!(table),
            lexicon: pick!(lexicon),
            merges: pick!(merges),
            num_merges: pick!(num_merges).unwrap_or(DEFAULT_NUM_MERGES),
            vocab_size: pick!(vocab_size).unwrap_or(DEFAULT_VOCAB_SIZE),
            reserved: pick!(reserved).unwrap_or(conjtok::vocab::DEFAULT_RESERVED),
            tag_map: pick!(tag_map),
            threads: pick!(threads).unwrap_or(0),
            report: pick!(report),
            input: pick!(input),
            output: pick!(output),
            format: pick!(format),
            side: pick!(side).unwrap_or(Side::Both),
            threshold: pick!(threshold).unwrap_or(1.0),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), Failure> {
        check_readable("table", &self.table)?;
        check_readable("input", &self.input)?;
        match &self.tag_map {
            Some(m) if m != "ascii" => check_readable("tag map", &Some(PathBuf::from(m)))?,
            _ => {}
        }
        if self.num_merges == 0 {
            return Err(Failure::Config("--num-merges must be at least 1".into()));
        }
        if self.vocab_size <= self.reserved {
            return Err(Failure::Config(format!(
                "--vocab-size {} must exceed the {} reserved symbols",
                self.vocab_size, self.reserved
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Failure::Config("--threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// One `key = value` line per setting.
    pub fn describe(&self) -> String {
        fn path(p: &Option<PathBuf>) -> String {
            p.as_ref().map_or_else(|| "-".to_owned(), |p| p.display().to_string())
        }
        let format = self.format.map_or_else(|| "auto".to_owned(), |f| f.to_string());
        [
            format!("scheme = {}", self.scheme),
            format!("placement = {}", self.placement),
            format!("table = {}", self.table.as_ref().map_or("builtin".into(), |p| p.display().to_string())),
            format!("lexicon = {}", path(&self.lexicon)),
            format!("merges = {}", path(&self.merges)),
            format!("num-merges = {}", self.num_merges),
            format!("vocab-size = {}", self.vocab_size),
            format!("reserved = {}", self.reserved),
            format!("tag-map = {}", self.tag_map.as_deref().unwrap_or("-")),
            format!("threads = {}", self.threads),
            format!("report = {}", path(&self.report)),
            format!("input = {}", path(&self.input)),
            format!("output = {}", path(&self.output)),
            format!("format = {format}"),
            format!("side = {}", self.side),
            format!("threshold = {}", self.threshold),
        ]
        .join("\n")
    }

    pub fn require<'a>(&self, what: &str, value: &'a Option<PathBuf>) -> Result<&'a Path, Failure> {
        value
            .as_deref()
            .ok_or_else(|| Failure::Config(format!("--{what} is required for this command")))
    }
}

fn load_file(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Config(format!("config {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pos_scheme_takes_placement() {
        assert_eq!(
            resolve_scheme(Some("pos"), Some("prefix")).unwrap(),
            (Scheme::PosPrefix, Placement::Prefix)
        );
        assert_eq!(
            resolve_scheme(Some("circumfix"), None).unwrap(),
            (Scheme::PosCircumfix, Placement::Circumfix)
        );
        assert!(resolve_scheme(Some("suffix"), Some("prefix")).is_err());
        assert!(resolve_scheme(Some("nope"), None).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "scheme = \"baseline\"\nvocab-size = 500\nnum-merges = 7\n").unwrap();
        let flags = Flags {
            config: Some(path),
            vocab_size: Some(900),
            ..Flags::default()
        };
        let c = PipelineConfig::resolve(&flags).unwrap();
        assert_eq!(c.scheme, Scheme::Baseline);
        assert_eq!(c.vocab_size, 900);
        assert_eq!(c.num_merges, 7);
        assert_eq!(c.reserved, 2);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "schema = \"baseline\"\n").unwrap();
        let flags = Flags {
            config: Some(path),
            ..Flags::default()
        };
        assert!(matches!(PipelineConfig::resolve(&flags), Err(Failure::Config(_))));
    }

    #[test]
    fn missing_paths_are_config_errors() {
        let flags = Flags {
            table: Some("/nonexistent/table".into()),
            ..Flags::default()
        };
        assert!(matches!(PipelineConfig::resolve(&flags), Err(Failure::Config(_))));
    }
}
