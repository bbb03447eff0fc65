//! Annotation reliability metrics.
//!
//! An [`AnnotationRound`] holds binary labels from named annotators per
//! document. Within a round we report pairwise agreement and nominal
//! Krippendorff's alpha; across two rounds, pairwise cross-agreement (PXA)
//! pools every (round A annotation, round B annotation) pair on each shared
//! document.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub annotator: String,
    pub label: bool,
    /// Self-reported confidence on a 1-5 scale, when collected.
    pub confidence: Option<u8>,
}

/// Labels from one annotation effort, keyed by document id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationRound {
    pub name: String,
    docs: BTreeMap<String, Vec<Annotation>>,
}

/// Row counts from reading an annotation file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RoundLoadStats {
    pub rows: usize,
    pub skipped: usize,
}

impl AnnotationRound {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            docs: BTreeMap::new(),
        }
    }

    /// Convenience constructor from per-document label lists; annotators are
    /// named by position.
    pub fn from_labels<'a>(
        name: &str,
        docs: impl IntoIterator<Item = (&'a str, &'a [bool])>,
    ) -> Self {
        let mut r = Self::new(name);
        for (doc, labels) in docs {
            for (i, &l) in labels.iter().enumerate() {
                r.add(doc, &format!("a{i}"), l, None)
                    .expect("positional annotators are distinct");
            }
        }
        r
    }

    /// Add one annotation; a repeated (document, annotator) pair is an error.
    pub fn add(
        &mut self,
        doc_id: &str,
        annotator: &str,
        label: bool,
        confidence: Option<u8>,
    ) -> Result<()> {
        if let Some(c) = confidence {
            if !(1..=5).contains(&c) {
                return Err(Error::InvalidInput(format!("confidence {c} outside 1..=5")));
            }
        }
        let anns = self.docs.entry(doc_id.to_owned()).or_default();
        if anns.iter().any(|a| a.annotator == annotator) {
            return Err(Error::InvalidInput(format!(
                "annotator {annotator:?} labels document {doc_id:?} twice"
            )));
        }
        anns.push(Annotation {
            annotator: annotator.to_owned(),
            label,
            confidence,
        });
        Ok(())
    }

    /// Read `doc_id,annotator_id,label[,confidence]` CSV (with header).
    /// The round is named after the file stem. Malformed rows are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, RoundLoadStats)> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(&name, file)
    }

    pub fn from_reader(name: &str, reader: impl Read) -> Result<(Self, RoundLoadStats)> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut round = Self::new(name);
        let mut stats = RoundLoadStats::default();
        for (i, rec) in rdr.records().enumerate() {
            stats.rows += 1;
            let parsed = rec.map_err(|e| e.to_string()).and_then(|r| {
                let field = |k: usize| r.get(k).filter(|s| !s.is_empty());
                let doc = field(0).ok_or("missing doc_id")?;
                let ann = field(1).ok_or("missing annotator_id")?;
                let label = match field(2) {
                    Some("1") => true,
                    Some("0") => false,
                    other => return Err(format!("label must be 0 or 1, got {other:?}")),
                };
                let conf = match field(3) {
                    None => None,
                    Some(c) => Some(
                        c.parse::<u8>()
                            .map_err(|_| format!("bad confidence {c:?}"))?,
                    ),
                };
                if r.len() > 4 {
                    return Err("too many fields".into());
                }
                round.add(doc, ann, label, conf).map_err(|e| e.to_string())
            });
            if let Err(msg) = parsed {
                stats.skipped += 1;
                log::warn!("{name}: row {}: skipped: {msg}", i + 2);
            }
        }
        Ok((round, stats))
    }

    pub fn get(&self, doc_id: &str) -> Option<&[Annotation]> {
        self.docs.get(doc_id).map(Vec::as_slice)
    }

    pub fn docs(&self) -> impl Iterator<Item = (&str, &[Annotation])> {
        self.docs.iter().map(|(d, a)| (d.as_str(), a.as_slice()))
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn num_annotations(&self) -> usize {
        self.docs.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// The documents with at least two annotations.
    pub fn multi_annotated(&self) -> Self {
        self.filter_docs(|_, a| a.len() >= 2)
    }

    /// The documents in `ids`.
    pub fn restrict_to(&self, ids: &BTreeSet<String>) -> Self {
        self.filter_docs(|d, _| ids.contains(d))
    }

    fn filter_docs(&self, keep: impl Fn(&str, &[Annotation]) -> bool) -> Self {
        Self {
            name: self.name.clone(),
            docs: self
                .docs
                .iter()
                .filter(|(d, a)| keep(d, a))
                .map(|(d, a)| (d.clone(), a.clone()))
                .collect(),
        }
    }

    fn label_counts(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.docs.values().map(|anns| {
            let ones = anns.iter().filter(|a| a.label).count();
            (anns.len() - ones, ones)
        })
    }
}

fn pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Fraction of agreeing label pairs over all within-document annotation
/// pairs. Documents with a single annotation contribute nothing.
pub fn pairwise_agreement(round: &AnnotationRound) -> Result<f64> {
    let (mut agree, mut total) = (0usize, 0usize);
    for (zeros, ones) in round.label_counts() {
        agree += pairs(zeros) + pairs(ones);
        total += pairs(zeros + ones);
    }
    if total == 0 {
        return Err(Error::Insufficient(format!(
            "round {:?} has no document with two or more annotations",
            round.name
        )));
    }
    Ok(agree as f64 / total as f64)
}

/// Mean over documents with two or more annotations of each document's own
/// agreeing-pair fraction. Unlike [`pairwise_agreement`], every document
/// weighs the same regardless of how many annotators it has.
pub fn pairwise_agreement_by_document(round: &AnnotationRound) -> Result<f64> {
    let (mut sum, mut docs) = (0.0, 0usize);
    for (zeros, ones) in round.label_counts().filter(|(z, o)| z + o >= 2) {
        sum += (pairs(zeros) + pairs(ones)) as f64 / pairs(zeros + ones) as f64;
        docs += 1;
    }
    if docs == 0 {
        return Err(Error::Insufficient(format!(
            "round {:?} has no document with two or more annotations",
            round.name
        )));
    }
    Ok(sum / docs as f64)
}

/// Nominal Krippendorff's alpha over units with at least two annotations.
///
/// Uses the coincidence-matrix form `alpha = 1 - (n - 1) * sum_{c != k} o_ck /
/// sum_{c != k} n_c n_k`, where `n` counts pairable values. When all
/// pairable values are identical the expected disagreement is zero and
/// alpha is reported as 1.
pub fn krippendorff_alpha(round: &AnnotationRound) -> Result<f64> {
    let mut off_diag = 0.0;
    let (mut n0, mut n1) = (0usize, 0usize);
    for (zeros, ones) in round.label_counts() {
        let m = zeros + ones;
        if m < 2 {
            continue;
        }
        // o_01 + o_10 for this unit.
        off_diag += 2.0 * (zeros * ones) as f64 / (m - 1) as f64;
        n0 += zeros;
        n1 += ones;
    }
    let n = n0 + n1;
    if n < 2 {
        return Err(Error::Insufficient(format!(
            "round {:?} has no pairable annotations",
            round.name
        )));
    }
    if n0 == 0 || n1 == 0 {
        log::warn!(
            "round {:?}: every pairable value is identical; alpha reported as 1",
            round.name
        );
        return Ok(1.0);
    }
    let expected = 2.0 * (n0 as f64) * (n1 as f64);
    Ok(1.0 - (n - 1) as f64 * off_diag / expected)
}

/// Pairwise cross-agreement between two rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pxa {
    pub value: f64,
    pub agreeing_pairs: usize,
    pub total_pairs: usize,
}

/// PXA over `docs`: agreeing cross-round pairs divided by all cross-round
/// pairs, where each document contributes |A_d| x |B_d| pairs.
pub fn pxa(
    round_a: &AnnotationRound,
    round_b: &AnnotationRound,
    docs: &BTreeSet<String>,
) -> Result<Pxa> {
    let (mut agree, mut total) = (0usize, 0usize);
    for d in docs {
        let counts = |r: &AnnotationRound| {
            r.get(d)
                .filter(|a| !a.is_empty())
                .map(|a| {
                    let ones = a.iter().filter(|x| x.label).count();
                    (a.len() - ones, ones)
                })
                .ok_or_else(|| Error::MissingDocument {
                    doc_id: d.clone(),
                    round: r.name.clone(),
                })
        };
        let (a0, a1) = counts(round_a)?;
        let (b0, b1) = counts(round_b)?;
        agree += a0 * b0 + a1 * b1;
        total += (a0 + a1) * (b0 + b1);
    }
    if total == 0 {
        return Err(Error::Insufficient("empty document set for PXA".into()));
    }
    Ok(Pxa {
        value: agree as f64 / total as f64,
        agreeing_pairs: agree,
        total_pairs: total,
    })
}

/// Strict-majority label; an exact tie is settled by a coin seeded with `seed`.
pub fn majority_label(labels: &[bool], seed: u64) -> Result<bool> {
    if labels.is_empty() {
        return Err(Error::Insufficient("majority of zero labels".into()));
    }
    let ones = labels.iter().filter(|&&l| l).count();
    let zeros = labels.len() - ones;
    Ok(match ones.cmp(&zeros) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => seed::rng(seed).random_bool(0.5),
    })
}

/// Per-annotator positive rate and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatorStats {
    pub annotator: String,
    pub mean_positive: f64,
    /// Sample (n - 1) standard deviation; `None` for a single annotation.
    pub std: Option<f64>,
    pub n: usize,
    pub mean_confidence: Option<f64>,
}

pub fn per_annotator_stats(round: &AnnotationRound) -> Vec<AnnotatorStats> {
    let mut by: BTreeMap<&str, (usize, usize, usize, usize)> = BTreeMap::new();
    for anns in round.docs.values() {
        for a in anns {
            let e = by.entry(&a.annotator).or_default();
            e.0 += 1;
            e.1 += usize::from(a.label);
            if let Some(c) = a.confidence {
                e.2 += usize::from(c);
                e.3 += 1;
            }
        }
    }
    by.into_iter()
        .map(|(name, (n, pos, conf_sum, conf_n))| {
            let mean = pos as f64 / n as f64;
            // Sum of squared deviations of 0/1 values around the mean.
            let ss = pos as f64 * (1.0 - mean).powi(2) + (n - pos) as f64 * mean * mean;
            AnnotatorStats {
                annotator: name.to_owned(),
                mean_positive: mean,
                std: (n >= 2).then(|| (ss / (n - 1) as f64).sqrt()),
                n,
                mean_confidence: (conf_n > 0).then(|| conf_sum as f64 / conf_n as f64),
            }
        })
        .collect()
}

/// Number of documents by number of annotations received.
pub fn annotations_per_doc(round: &AnnotationRound) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for anns in round.docs.values() {
        *h.entry(anns.len()).or_default() += 1;
    }
    h
}

/// Descriptive reliability statistics for one round (or subset).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub round: String,
    pub subset: String,
    pub num_docs: usize,
    pub num_annotations: usize,
    pub prop_positive: f64,
    /// Over documents with two or more annotations.
    pub prop_docs_unanimous: Option<f64>,
    pub pairwise_agreement: Option<f64>,
    /// Document-weighted variant, see [`pairwise_agreement_by_document`].
    pub pairwise_agreement_by_document: Option<f64>,
    pub krippendorff_alpha: Option<f64>,
    pub mean_confidence: Option<f64>,
}

pub fn agreement_report(round: &AnnotationRound, subset: &str) -> Result<AgreementReport> {
    let n_ann = round.num_annotations();
    if n_ann == 0 {
        return Err(Error::Insufficient(format!(
            "round {:?} is empty",
            round.name
        )));
    }
    let positives: usize = round.label_counts().map(|(_, o)| o).sum();
    let multi: Vec<(usize, usize)> = round.label_counts().filter(|(z, o)| z + o >= 2).collect();
    let unanimous = multi.iter().filter(|(z, o)| *z == 0 || *o == 0).count();
    let (conf_sum, conf_n) = round
        .docs
        .values()
        .flatten()
        .filter_map(|a| a.confidence)
        .fold((0usize, 0usize), |(s, n), c| (s + usize::from(c), n + 1));
    Ok(AgreementReport {
        round: round.name.clone(),
        subset: subset.to_owned(),
        num_docs: round.num_docs(),
        num_annotations: n_ann,
        prop_positive: positives as f64 / n_ann as f64,
        prop_docs_unanimous: (!multi.is_empty()).then(|| unanimous as f64 / multi.len() as f64),
        pairwise_agreement: pairwise_agreement(round).ok(),
        pairwise_agreement_by_document: pairwise_agreement_by_document(round).ok(),
        krippendorff_alpha: krippendorff_alpha(round).ok(),
        mean_confidence: (conf_n > 0).then(|| conf_sum as f64 / conf_n as f64),
    })
}
