//! Keyword banks and lexicon-based document labels.
//!
//! A measurement is a conjunction of banks: a document is positive iff every
//! bank has at least one phrase occurring in it as a contiguous token run.

mod embedding;
mod matcher;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

pub use embedding::{expand_bank, nearest_neighbors, EmbeddingTable};
pub use matcher::KeywordMatcher;

use crate::corpus::{tokenize, Document};
use crate::error::{Error, Result};

/// A phrase: one or more lowercase tokens that must appear consecutively.
pub type Phrase = Vec<String>;

/// A named set of keyword phrases, stored pre-tokenized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordBank {
    name: String,
    phrases: BTreeSet<Phrase>,
}

impl KeywordBank {
    /// Build a bank from raw phrase strings, tokenizing each one.
    pub fn new<S: AsRef<str>>(
        name: impl Into<String>,
        phrases: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let mut set = BTreeSet::new();
        for p in phrases {
            let toks = tokenize(p.as_ref());
            if toks.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "bank {name:?}: phrase {:?} has no tokens",
                    p.as_ref()
                )));
            }
            set.insert(toks);
        }
        Self::from_phrases(name, set)
    }

    pub fn from_phrases(name: impl Into<String>, phrases: BTreeSet<Phrase>) -> Result<Self> {
        let name = name.into();
        if phrases.is_empty() {
            return Err(Error::InvalidInput(format!("bank {name:?} has no phrases")));
        }
        if let Some(bad) = phrases
            .iter()
            .find(|p| p.is_empty() || tokenize(&p.join(" ")) != **p)
        {
            return Err(Error::InvalidInput(format!(
                "bank {name:?}: phrase {bad:?} is not in tokenized form"
            )));
        }
        Ok(Self { name, phrases })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn phrases(&self) -> &BTreeSet<Phrase> {
        &self.phrases
    }

    /// Phrases joined back into display strings, in sorted order.
    pub fn phrase_strings(&self) -> Vec<String> {
        self.phrases.iter().map(|p| p.join(" ")).collect()
    }
}

/// True iff some phrase of `bank` occurs as a contiguous run of `tokens`.
///
/// This is the plain O(tokens x phrases) scan; [`KeywordMatcher`] computes the
/// same answer in one pass for all banks of a measurement.
pub fn bank_matches<S: AsRef<str>>(tokens: &[S], bank: &KeywordBank) -> bool {
    bank.phrases.iter().any(|phrase| {
        tokens.len() >= phrase.len()
            && tokens
                .windows(phrase.len())
                .any(|w| w.iter().zip(phrase).all(|(t, p)| t.as_ref() == p.as_str()))
    })
}

/// A keyword measurement function: a labelled conjunction of banks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementConfig {
    label: String,
    banks: Vec<KeywordBank>,
}

impl MeasurementConfig {
    pub fn new(label: impl Into<String>, banks: Vec<KeywordBank>) -> Result<Self> {
        let label = label.into();
        if banks.is_empty() {
            return Err(Error::InvalidInput(format!(
                "measurement {label:?} has no banks"
            )));
        }
        let mut names = BTreeSet::new();
        for b in &banks {
            if !names.insert(b.name()) {
                return Err(Error::InvalidInput(format!(
                    "measurement {label:?} lists bank {:?} twice",
                    b.name()
                )));
            }
        }
        Ok(Self { label, banks })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn banks(&self) -> &[KeywordBank] {
        &self.banks
    }

    pub fn compile(&self) -> Result<KeywordMatcher> {
        KeywordMatcher::new(&self.banks)
    }
}

/// Reference keyword label: 1 iff every bank of `config` matches the document.
pub fn classify_keyword(doc: &Document, config: &MeasurementConfig) -> bool {
    config.banks.iter().all(|b| bank_matches(doc.tokens(), b))
}

/// Settings for deriving the embedding-expanded measurement.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ExpansionSpec {
    /// Measurement whose banks are the starting point.
    pub base: String,
    /// Banks to expand; the others are copied unchanged.
    pub banks: Vec<String>,
    pub k: usize,
    /// Per-bank words removed after expansion.
    #[serde(default)]
    pub remove: BTreeMap<String, Vec<String>>,
}

/// Parsed keyword configuration file.
///
/// ```toml
/// [banks]
/// economy = ["economic", "economy"]
///
/// [measurements]
/// KeyEU = ["economy", "uncertainty"]
///
/// [expansion]
/// base = "KeyOrg"
/// banks = ["economy", "uncertainty"]
/// k = 5
/// remove = { economy = ["policy"] }
/// ```
#[derive(Debug, Clone)]
pub struct KeywordConfig {
    banks: BTreeMap<String, KeywordBank>,
    measurements: BTreeMap<String, Vec<String>>,
    expansion: Option<ExpansionSpec>,
}

/// Name of the measurement produced by embedding expansion.
pub const EXPANDED_MEASUREMENT: &str = "KeyExp";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KeywordFile {
    banks: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    measurements: BTreeMap<String, Vec<String>>,
    expansion: Option<ExpansionSpec>,
}

impl KeywordConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: KeywordFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut banks = BTreeMap::new();
        for (name, phrases) in file.banks {
            let bank = KeywordBank::new(name.clone(), phrases)
                .map_err(|e| Error::Config(e.to_string()))?;
            banks.insert(name, bank);
        }
        if file.measurements.contains_key(EXPANDED_MEASUREMENT) {
            return Err(Error::Config(format!(
                "{EXPANDED_MEASUREMENT} is derived from [expansion] and cannot be listed under [measurements]"
            )));
        }
        for (label, names) in &file.measurements {
            for n in names {
                if !banks.contains_key(n) {
                    return Err(Error::Config(format!(
                        "measurement {label:?} references unknown bank {n:?}"
                    )));
                }
            }
        }
        if let Some(exp) = &file.expansion {
            if !file.measurements.contains_key(&exp.base) {
                return Err(Error::Config(format!(
                    "expansion base {:?} is not a measurement",
                    exp.base
                )));
            }
            let base = &file.measurements[&exp.base];
            for b in exp.banks.iter().chain(exp.remove.keys()) {
                if !base.contains(b) {
                    return Err(Error::Config(format!(
                        "expansion bank {b:?} is not part of {:?}",
                        exp.base
                    )));
                }
            }
        }
        Ok(Self {
            banks,
            measurements: file.measurements,
            expansion: file.expansion,
        })
    }

    pub fn bank(&self, name: &str) -> Option<&KeywordBank> {
        self.banks.get(name)
    }

    pub fn expansion(&self) -> Option<&ExpansionSpec> {
        self.expansion.as_ref()
    }

    /// Names of statically defined measurements.
    pub fn measurement_names(&self) -> impl Iterator<Item = &str> {
        self.measurements.keys().map(String::as_str)
    }

    pub fn has_measurement(&self, label: &str) -> bool {
        self.measurements.contains_key(label)
            || (label == EXPANDED_MEASUREMENT && self.expansion.is_some())
    }

    /// A statically defined measurement by label.
    pub fn measurement(&self, label: &str) -> Result<MeasurementConfig> {
        let names = self
            .measurements
            .get(label)
            .ok_or_else(|| Error::Config(format!("unknown keyword measurement {label:?}")))?;
        let banks = names.iter().map(|n| self.banks[n].clone()).collect();
        MeasurementConfig::new(label, banks)
    }

    /// The embedding-expanded measurement described by `[expansion]`.
    pub fn expanded_measurement(&self, table: &EmbeddingTable) -> Result<MeasurementConfig> {
        let exp = self.expansion.as_ref().ok_or_else(|| {
            Error::Config(format!(
                "{EXPANDED_MEASUREMENT} requires an [expansion] section"
            ))
        })?;
        let base = self.measurement(&exp.base)?;
        let banks = base
            .banks()
            .iter()
            .map(|bank| {
                if exp.banks.iter().any(|b| b == bank.name()) {
                    let removal: BTreeSet<String> = exp
                        .remove
                        .get(bank.name())
                        .into_iter()
                        .flatten()
                        .cloned()
                        .collect();
                    expand_bank(bank, table, exp.k, &removal)
                } else {
                    Ok(bank.clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurementConfig::new(EXPANDED_MEASUREMENT, banks)
    }
}
