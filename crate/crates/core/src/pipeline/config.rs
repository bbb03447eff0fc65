use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::learner::DEFAULT_INVERSE_GRID;
use crate::lexicon::EXPANDED_MEASUREMENT;
use crate::month::YearMonth;
use crate::prevalence::Method;

/// A measurement function the pipeline can run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Measurement {
    /// A keyword conjunction from the keyword config (`KeyOrg`, `KeyEU`).
    Keyword(String),
    /// The embedding-expanded keyword measurement.
    Expanded,
    /// The trained classifier aggregated with the given method.
    LogReg(Method),
}

impl Measurement {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "KeyOrg" | "KeyEU" => Measurement::Keyword(name.to_owned()),
            EXPANDED_MEASUREMENT => Measurement::Expanded,
            "CC-LogReg" => Measurement::LogReg(Method::Cc),
            "PCC-LogReg" => Measurement::LogReg(Method::Pcc),
            "ImpLik-LogReg" => Measurement::LogReg(Method::ImpLik),
            other => {
                return Err(Error::Config(format!(
                    "unknown measurement {other:?}; expected one of KeyOrg, KeyEU, KeyExp, \
                     CC-LogReg, PCC-LogReg, ImpLik-LogReg"
                )))
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            Measurement::Keyword(n) => n.clone(),
            Measurement::Expanded => EXPANDED_MEASUREMENT.to_owned(),
            Measurement::LogReg(m) => format!("{m}-LogReg"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledConfig {
    pub labels: Vec<PathBuf>,
    /// Corpus holding the labeled documents; defaults to the main corpus.
    pub corpus: Vec<PathBuf>,
    /// Documents dated before this go to training, the rest to testing.
    pub split_date: NaiveDate,
    pub min_df: usize,
    pub folds: usize,
    /// Inverse penalty strengths searched by cross-validation.
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgreeConfig {
    pub rounds: Vec<PathBuf>,
    pub doc_sets: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelateConfig {
    pub start: Option<YearMonth>,
    pub end: Option<YearMonth>,
    /// Extra monthly or daily series files.
    pub series: Vec<PathBuf>,
}

/// A fully resolved run configuration. Relative paths in the file are taken
/// relative to the file's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub corpus: Vec<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub filter_us: bool,
    pub keywords: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    /// Where `train` writes and `measure` reads the classifier.
    pub model: PathBuf,
    pub measurements: Vec<Measurement>,
    pub external: Vec<PathBuf>,
    pub labeled: Option<LabeledConfig>,
    pub agree: AgreeConfig,
    pub correlate: CorrelateConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    #[serde(default)]
    corpus: Vec<PathBuf>,
    gazetteer: Option<PathBuf>,
    #[serde(default)]
    filter_us: bool,
    keywords: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    model: Option<PathBuf>,
    #[serde(default)]
    measurements: Vec<String>,
    #[serde(default)]
    external: Vec<PathBuf>,
    labeled: Option<RawLabeled>,
    #[serde(default)]
    agree: RawAgree,
    #[serde(default)]
    correlate: RawCorrelate,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLabeled {
    labels: Vec<PathBuf>,
    #[serde(default)]
    corpus: Vec<PathBuf>,
    split_date: String,
    min_df: Option<usize>,
    folds: Option<usize>,
    grid: Option<Vec<f64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAgree {
    #[serde(default)]
    rounds: Vec<PathBuf>,
    #[serde(default)]
    doc_sets: Vec<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCorrelate {
    start: Option<String>,
    end: Option<String>,
    #[serde(default)]
    series: Vec<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip(e))))
    }

    /// Parse config text, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let seed = raw
            .seed
            .ok_or_else(|| Error::Config("missing master `seed`".into()))?;
        let abs = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let abs_all = |v: Vec<PathBuf>| v.into_iter().map(abs).collect::<Vec<_>>();

        let mut measurements = Vec::new();
        for name in &raw.measurements {
            let m = Measurement::parse(name)?;
            if measurements.contains(&m) {
                return Err(Error::Config(format!("measurement {name:?} listed twice")));
            }
            measurements.push(m);
        }

        let labeled = raw
            .labeled
            .map(|l| -> Result<LabeledConfig> {
                let split_date = crate::corpus::parse_date(&l.split_date).ok_or_else(|| {
                    Error::Config(format!("invalid split_date {:?}", l.split_date))
                })?;
                Ok(LabeledConfig {
                    labels: abs_all(l.labels),
                    corpus: abs_all(l.corpus),
                    split_date,
                    min_df: l.min_df.unwrap_or(5),
                    folds: l.folds.unwrap_or(5),
                    grid: l.grid.unwrap_or_else(|| DEFAULT_INVERSE_GRID.to_vec()),
                })
            })
            .transpose()?;
        if let Some(l) = &labeled {
            if l.min_df == 0 {
                return Err(Error::Config("labeled.min_df must be at least 1".into()));
            }
            if l.folds < 2 {
                return Err(Error::Config("labeled.folds must be at least 2".into()));
            }
            if l.grid.is_empty() || l.grid.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
                return Err(Error::Config(
                    "labeled.grid must hold positive values".into(),
                ));
            }
        }

        let month = |s: Option<String>| -> Result<Option<YearMonth>> {
            s.map(|s| {
                s.parse()
                    .map_err(|_| Error::Config(format!("invalid month {s:?}")))
            })
            .transpose()
        };
        let correlate = CorrelateConfig {
            start: month(raw.correlate.start)?,
            end: month(raw.correlate.end)?,
            series: abs_all(raw.correlate.series),
        };

        let out = abs(raw.out.unwrap_or_else(|| PathBuf::from("out")));
        let model = raw.model.map(abs).unwrap_or_else(|| out.join("model.tsv"));
        Ok(Self {
            seed,
            out,
            corpus: abs_all(raw.corpus),
            gazetteer: raw.gazetteer.map(abs),
            filter_us: raw.filter_us,
            keywords: raw.keywords.map(abs),
            embeddings: raw.embeddings.map(abs),
            model,
            measurements,
            external: abs_all(raw.external),
            labeled,
            agree: AgreeConfig {
                rounds: abs_all(raw.agree.rounds),
                doc_sets: abs_all(raw.agree.doc_sets),
            },
            correlate,
        })
    }

    /// Replace the output directory, moving a default model path along.
    pub fn set_out(&mut self, out: PathBuf) {
        if self.model == self.out.join("model.tsv") {
            self.model = out.join("model.tsv");
        }
        self.out = out;
    }

    /// Corpus files holding the labeled documents.
    pub fn labeled_corpus(&self) -> &[PathBuf] {
        match &self.labeled {
            Some(l) if !l.corpus.is_empty() => &l.corpus,
            _ => &self.corpus,
        }
    }

    /// Check that every configured measurement has the resources it needs.
    pub fn check_measurements(&self) -> Result<()> {
        if self.filter_us && self.gazetteer.is_none() {
            return Err(Error::Config("filter_us requires a gazetteer".into()));
        }
        if !self.measurements.is_empty() && self.corpus.is_empty() {
            return Err(Error::Config(
                "measurements require at least one corpus file".into(),
            ));
        }
        for m in &self.measurements {
            let missing = |what: &str| {
                Err(Error::Config(format!(
                    "measurement {} requires {what}",
                    m.name()
                )))
            };
            match m {
                Measurement::Keyword(_) if self.keywords.is_none() => return missing("`keywords`"),
                Measurement::Expanded if self.keywords.is_none() => return missing("`keywords`"),
                Measurement::Expanded if self.embeddings.is_none() => {
                    return missing("`embeddings`")
                }
                Measurement::LogReg(_) if !self.model.exists() => {
                    return missing(&format!(
                        "a trained model at {} (run `train` first)",
                        self.model.display()
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}
