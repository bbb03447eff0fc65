//! News corpus ingestion.
//!
//! Documents arrive as JSON-Lines records with `id`, `outlet`, `date`, `text`
//! and an optional `dateline`. Reading is lazy; malformed records are counted
//! and skipped rather than aborting the stream.

mod dateline;
mod gazetteer;
mod tokenize;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use dateline::{normalize_place, parse_dateline};
pub use gazetteer::Gazetteer;
pub use tokenize::{for_each_token, tokenize};

use crate::error::{Error, Result};
use crate::month::YearMonth;

/// Number of leading text characters searched for a dateline when the record
/// carries no dedicated dateline field.
pub const TEXT_DATELINE_CHARS: usize = 60;

/// One news article.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub outlet: String,
    pub date: NaiveDate,
    pub dateline: Option<String>,
    pub text: String,
    tokens: Vec<String>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        outlet: impl Into<String>,
        date: NaiveDate,
        dateline: Option<String>,
        text: impl Into<String>,
    ) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Self {
            id: id.into(),
            outlet: outlet.into(),
            date,
            dateline,
            text,
            tokens,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn month(&self) -> YearMonth {
        YearMonth::of(self.date)
    }

    /// Parsed dateline place name, from the dateline field when present and
    /// otherwise from the opening characters of the text.
    pub fn place(&self) -> Option<String> {
        match &self.dateline {
            Some(d) => parse_dateline(d),
            None => {
                let head: String = self.text.chars().take(TEXT_DATELINE_CHARS).collect();
                parse_dateline(&head)
            }
        }
    }
}

/// Outcome of the US-only filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDecision {
    Keep,
    Discard,
}

/// Discard a document only when its dateline names a known non-US city.
pub fn us_filter(doc: &Document, gaz: &Gazetteer) -> FilterDecision {
    match doc.place() {
        Some(place) if gaz.is_non_us(&place) => FilterDecision::Discard,
        _ => FilterDecision::Keep,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    id: Option<String>,
    outlet: Option<String>,
    date: Option<String>,
    text: Option<String>,
    #[serde(default)]
    dateline: Option<String>,
}

/// Serialize a document back to its JSON-Lines record.
pub fn to_jsonl(doc: &Document) -> String {
    let rec = RawRecord {
        id: Some(doc.id.clone()),
        outlet: Some(doc.outlet.clone()),
        date: Some(doc.date.format("%Y-%m-%d").to_string()),
        text: Some(doc.text.clone()),
        dateline: doc.dateline.clone(),
    };
    serde_json::to_string(&rec).expect("record serializes")
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

/// Record counts of a finished or in-progress read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    /// Non-blank lines seen.
    pub records: usize,
    /// Records yielded as documents.
    pub loaded: usize,
    /// Records rejected as malformed or duplicate.
    pub skipped: usize,
}

/// Lazy JSON-Lines document stream.
///
/// Yields `Err` only for I/O failures, which end the stream; malformed
/// records are logged, counted in [`LoadStats::skipped`] and passed over.
pub struct CorpusReader<R> {
    lines: std::io::Lines<R>,
    source: PathBuf,
    line_no: usize,
    seen: HashSet<String>,
    stats: LoadStats,
    failed: bool,
}

/// Open a JSON-Lines corpus file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<CorpusReader<BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(CorpusReader::new(BufReader::new(file), path))
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, source: impl Into<PathBuf>) -> Self {
        Self {
            lines: reader.lines(),
            source: source.into(),
            line_no: 0,
            seen: HashSet::new(),
            stats: LoadStats::default(),
            failed: false,
        }
    }

    pub fn stats(&self) -> LoadStats {
        self.stats
    }

    fn parse_record(&mut self, line: &str) -> std::result::Result<Document, String> {
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let id = raw.id.filter(|s| !s.is_empty()).ok_or("missing id")?;
        let outlet = raw.outlet.ok_or("missing outlet")?;
        let date_str = raw.date.ok_or("missing date")?;
        let date = parse_date(&date_str).ok_or_else(|| format!("invalid date {date_str:?}"))?;
        let text = raw.text.ok_or("missing text")?;
        if !self.seen.insert(id.clone()) {
            return Err(format!("duplicate id {id:?}"));
        }
        Ok(Document::new(id, outlet, date, raw.dateline, text))
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(Error::io(&self.source, e)));
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            self.stats.records += 1;
            match self.parse_record(&line) {
                Ok(doc) => {
                    self.stats.loaded += 1;
                    return Some(Ok(doc));
                }
                Err(msg) => {
                    self.stats.skipped += 1;
                    log::warn!(
                        "{}:{}: skipping record: {msg}",
                        self.source.display(),
                        self.line_no
                    );
                }
            }
        }
    }
}
