//! End-to-end stages driven by a [`PipelineConfig`].
//!
//! Every stage reads its inputs from disk and writes CSV/JSON under the
//! configured output directory, so stages can be rerun independently.

mod config;

pub use config::{AgreeConfig, CorrelateConfig, LabeledConfig, Measurement, PipelineConfig};

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::agreement::{agreement_report, majority_label, pxa, AgreementReport, AnnotationRound};
use crate::corpus::{load_corpus, us_filter, Document, FilterDecision, Gazetteer, LoadStats};
use crate::error::{Error, Result};
use crate::index::{correlation_matrix, CorrelationMatrix, ExternalSeries, MonthlySeries};
use crate::learner::{
    build_vocab, evaluate, featurize, l2_from_inverse, select_l2, EvalReport, FitOptions,
    SparseMatrix, TrainedClassifier,
};
use crate::lexicon::{EmbeddingTable, KeywordConfig, KeywordMatcher};
use crate::prevalence::{
    aggregate_monthly, write_scored_csv, Estimator, Method, MonthlyTotals, PrevalenceSeries,
    ScoredDocument, DEFAULT_GRID_STEP,
};
use crate::seed;

/// Manifest fields excluded from byte-for-byte reproducibility.
pub const NONDETERMINISTIC_FIELDS: [&str; 1] = ["created_at"];

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))
    })
}

/// Hex SHA-256 of a file's contents.
pub fn file_sha256(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

/// Paths inside the output directory are recorded relative to it, so that
/// reports do not depend on where the output lives.
fn display_in(out: &Path, path: &Path) -> String {
    path.strip_prefix(out).unwrap_or(path).display().to_string()
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Stream every corpus file once, skipping ids already seen in earlier files.
fn for_each_document(
    files: &[PathBuf],
    mut f: impl FnMut(Document) -> Result<()>,
) -> Result<BTreeMap<String, LoadStats>> {
    let mut seen = HashSet::new();
    let mut stats = BTreeMap::new();
    for path in files {
        let mut reader = load_corpus(path)?;
        for doc in reader.by_ref() {
            let doc = doc?;
            if !seen.insert(doc.id.clone()) {
                log::warn!(
                    "{}: id {:?} already loaded from another file",
                    path.display(),
                    doc.id
                );
                continue;
            }
            f(doc)?;
        }
        stats.insert(display(path), reader.stats());
    }
    Ok(stats)
}

#[derive(Debug, Serialize)]
pub struct IngestReport {
    pub files: BTreeMap<String, LoadStats>,
    pub documents: usize,
    /// Set when the US filter is enabled.
    pub us_kept: Option<usize>,
    pub months: usize,
    pub outlets: Vec<String>,
}

/// Load the corpus, write `totals.csv` (documents per month and outlet) and
/// `ingest.json`.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<IngestReport> {
    if cfg.corpus.is_empty() {
        return Err(Error::Config("no corpus files configured".into()));
    }
    let gaz = load_filter(cfg)?;
    let mut totals = MonthlyTotals::new();
    let (mut documents, mut kept) = (0, 0);
    let files = for_each_document(&cfg.corpus, |doc| {
        documents += 1;
        totals.add(doc.month(), &doc.outlet, 1);
        if gaz
            .as_ref()
            .is_some_and(|g| us_filter(&doc, g) == FilterDecision::Keep)
        {
            kept += 1;
        }
        Ok(())
    })?;
    let months: BTreeSet<_> = totals.iter().map(|(m, _, _)| m).collect();
    let outlets: BTreeSet<_> = totals.iter().map(|(_, o, _)| o.to_owned()).collect();
    let report = IngestReport {
        files,
        documents,
        us_kept: gaz.is_some().then_some(kept),
        months: months.len(),
        outlets: outlets.into_iter().collect(),
    };
    write_with(&cfg.out.join("totals.csv"), |w| totals.write_csv(w))?;
    write_json(&cfg.out.join("ingest.json"), &report)?;
    log::info!("ingested {documents} documents");
    Ok(report)
}

fn load_filter(cfg: &PipelineConfig) -> Result<Option<Gazetteer>> {
    if !cfg.filter_us {
        return Ok(None);
    }
    let path = cfg
        .gazetteer
        .as_ref()
        .ok_or_else(|| Error::Config("filter_us requires a gazetteer".into()))?;
    Gazetteer::load(path).map(Some)
}

enum Scorer {
    Keyword(KeywordMatcher),
    Model,
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub method: Method,
    pub series: String,
    pub scores: String,
    pub months: usize,
    /// Banks used by keyword measurements, as phrases.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub banks: Option<BTreeMap<String, Vec<String>>>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub created_at: String,
    pub seed: u64,
    pub filter_us: bool,
    pub resources: BTreeMap<String, String>,
    pub files: BTreeMap<String, LoadStats>,
    pub documents: usize,
    pub scored: usize,
    pub measurements: Vec<ManifestEntry>,
}

/// Outcome of [`cmd_measure`].
#[derive(Debug)]
pub struct MeasureOutput {
    pub series: Vec<(String, PrevalenceSeries)>,
    pub manifest: Option<Manifest>,
}

/// Score the corpus under each configured measurement and write
/// `scores/<m>.csv`, `series/<m>.csv` and `manifest.json`.
///
/// Monthly denominators count every loaded document, so documents removed by
/// the US filter contribute zero to CC and PCC.
pub fn cmd_measure(cfg: &PipelineConfig) -> Result<MeasureOutput> {
    if cfg.measurements.is_empty() {
        log::warn!("no measurements configured; nothing to do");
        return Ok(MeasureOutput {
            series: Vec::new(),
            manifest: None,
        });
    }
    cfg.check_measurements()?;

    let mut resources = BTreeMap::new();
    let mut hash = |p: &Path| -> Result<()> {
        resources.insert(display_in(&cfg.out, p), file_sha256(p)?);
        Ok(())
    };
    for p in &cfg.corpus {
        hash(p)?;
    }
    let gaz = load_filter(cfg)?;
    if let (true, Some(p)) = (cfg.filter_us, &cfg.gazetteer) {
        hash(p)?;
    }

    let keywords = match &cfg.keywords {
        Some(p)
            if cfg
                .measurements
                .iter()
                .any(|m| !matches!(m, Measurement::LogReg(_))) =>
        {
            hash(p)?;
            Some(KeywordConfig::load(p)?)
        }
        _ => None,
    };
    let needs_model = cfg
        .measurements
        .iter()
        .any(|m| matches!(m, Measurement::LogReg(_)));
    let model = if needs_model {
        hash(&cfg.model)?;
        Some(TrainedClassifier::load(&cfg.model)?)
    } else {
        None
    };

    let mut scorers = Vec::new();
    let mut entries = Vec::new();
    for m in &cfg.measurements {
        let name = m.name();
        let (scorer, method, banks) = match m {
            Measurement::Keyword(label) => {
                let kw = keywords.as_ref().expect("checked above");
                if !kw.has_measurement(label) {
                    return Err(Error::Config(format!(
                        "measurement {label} is not defined in the keyword config"
                    )));
                }
                let mc = kw.measurement(label)?;
                let banks = bank_listing(&mc);
                (
                    Scorer::Keyword(mc.compile()?),
                    Method::KeywordCc,
                    Some(banks),
                )
            }
            Measurement::Expanded => {
                let kw = keywords.as_ref().expect("checked above");
                let path = cfg.embeddings.as_ref().expect("checked above");
                hash(path)?;
                let table = EmbeddingTable::load(path)?;
                let mc = kw.expanded_measurement(&table).map_err(|e| match e {
                    Error::Config(msg) => Error::Config(format!("measurement {name}: {msg}")),
                    other => other,
                })?;
                let banks = bank_listing(&mc);
                (
                    Scorer::Keyword(mc.compile()?),
                    Method::KeywordCc,
                    Some(banks),
                )
            }
            Measurement::LogReg(method) => (Scorer::Model, *method, None),
        };
        scorers.push(scorer);
        entries.push(ManifestEntry {
            name: name.clone(),
            method,
            series: format!("series/{name}.csv"),
            scores: format!("scores/{name}.csv"),
            months: 0,
            banks,
        });
    }

    let mut totals = MonthlyTotals::new();
    let mut scored: Vec<Vec<ScoredDocument>> = vec![Vec::new(); scorers.len()];
    let (mut documents, mut kept) = (0usize, 0usize);
    let files = for_each_document(&cfg.corpus, |doc| {
        documents += 1;
        totals.add(doc.month(), &doc.outlet, 1);
        if gaz
            .as_ref()
            .is_some_and(|g| us_filter(&doc, g) == FilterDecision::Discard)
        {
            return Ok(());
        }
        kept += 1;
        let mut proba = None;
        for (scorer, out) in scorers.iter().zip(scored.iter_mut()) {
            let score = match scorer {
                Scorer::Keyword(k) => f64::from(u8::from(k.classify(doc.tokens()))),
                Scorer::Model => *proba.get_or_insert_with(|| {
                    model
                        .as_ref()
                        .expect("loaded above")
                        .predict_proba(doc.tokens())
                }),
            };
            out.push(ScoredDocument {
                doc_id: doc.id.clone(),
                date: doc.date,
                outlet: doc.outlet.clone(),
                score,
            });
        }
        Ok(())
    })?;

    let mut series = Vec::new();
    for ((m, docs), entry) in cfg.measurements.iter().zip(scored).zip(entries.iter_mut()) {
        let estimator = match m {
            Measurement::LogReg(Method::Pcc) => Estimator::Pcc,
            Measurement::LogReg(Method::ImpLik) => Estimator::ImpLik {
                train_prior: model.as_ref().expect("loaded above").model.train_prevalence,
                grid_step: DEFAULT_GRID_STEP,
            },
            _ => Estimator::Cc,
        };
        write_with(&cfg.out.join(&entry.scores), |w| write_scored_csv(&docs, w))?;
        let mut s = aggregate_monthly(docs, &totals, &estimator)?;
        s.method = entry.method;
        write_with(&cfg.out.join(&entry.series), |w| s.write_csv(w))?;
        entry.months = s.points.len();
        series.push((entry.name.clone(), s));
    }

    let manifest = Manifest {
        created_at: chrono::Utc::now().to_rfc3339(),
        seed: cfg.seed,
        filter_us: cfg.filter_us,
        resources,
        files,
        documents,
        scored: kept,
        measurements: entries,
    };
    write_json(&cfg.out.join("manifest.json"), &manifest)?;
    Ok(MeasureOutput {
        series,
        manifest: Some(manifest),
    })
}

fn bank_listing(mc: &crate::lexicon::MeasurementConfig) -> BTreeMap<String, Vec<String>> {
    mc.banks()
        .iter()
        .map(|b| (b.name().to_owned(), b.phrase_strings()))
        .collect()
}

/// Read `doc_id,label` rows; a document may carry several labels (one per
/// annotator). Rows with other label values are skipped with a warning.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, Vec<bool>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidInput(format!("{}: missing column {name:?}", path.display()))
        })
    };
    let (id_col, label_col) = (col("doc_id")?, col("label")?);
    let mut out: BTreeMap<String, Vec<bool>> = BTreeMap::new();
    let mut skipped = 0usize;
    for rec in rdr.records() {
        let rec = rec?;
        let label = match rec.get(label_col) {
            Some("1") => true,
            Some("0") => false,
            _ => {
                skipped += 1;
                continue;
            }
        };
        match rec.get(id_col).filter(|s| !s.is_empty()) {
            Some(id) => out.entry(id.to_owned()).or_default().push(label),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("{}: skipped {skipped} malformed label rows", path.display());
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub seed: u64,
    pub labeled_documents: usize,
    pub missing_documents: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub train_prevalence: f64,
    pub vocab_size: usize,
    pub min_df: usize,
    /// Inverse penalty strength picked by cross-validation.
    pub selected_inverse_penalty: f64,
    pub l2: f64,
    /// Grid value and mean held-out accuracy (null when not scored).
    pub cv_scores: Vec<(f64, Option<f64>)>,
    pub iterations: usize,
    pub converged: bool,
    pub test: EvalReport,
    pub model: String,
}

/// Fit the classifier on the temporal training split, evaluate on the test
/// split and write the model plus `train_report.json`.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<TrainReport> {
    let lab = cfg
        .labeled
        .as_ref()
        .ok_or_else(|| Error::Config("train requires a [labeled] section".into()))?;
    if cfg.labeled_corpus().is_empty() {
        return Err(Error::Config("train requires a corpus".into()));
    }
    let mut labels: BTreeMap<String, Vec<bool>> = BTreeMap::new();
    for p in &lab.labels {
        for (id, ls) in read_labels(p)? {
            labels.entry(id).or_default().extend(ls);
        }
    }
    let mut gold = HashMap::with_capacity(labels.len());
    for (id, ls) in &labels {
        let s = seed::derive(cfg.seed, &format!("gold/{id}"));
        gold.insert(id.clone(), majority_label(ls, s)?);
    }

    let mut train: Vec<(Document, bool)> = Vec::new();
    let mut test: Vec<(Document, bool)> = Vec::new();
    for_each_document(cfg.labeled_corpus(), |doc| {
        if let Some(&y) = gold.get(&doc.id) {
            if doc.date < lab.split_date {
                train.push((doc, y));
            } else {
                test.push((doc, y));
            }
        }
        Ok(())
    })?;
    let missing = labels.len() - train.len() - test.len();
    if missing > 0 {
        log::warn!("{missing} labeled documents were not found in the corpus");
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Insufficient(format!(
            "split at {} leaves {} training and {} test documents",
            lab.split_date,
            train.len(),
            test.len()
        )));
    }
    let y: Vec<bool> = train.iter().map(|(_, y)| *y).collect();
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::SingleClass);
    }

    let vocab = build_vocab(train.iter().map(|(d, _)| d.tokens()), lab.min_df)?;
    let x = SparseMatrix::from_rows(
        vocab.len(),
        train.iter().map(|(d, _)| featurize(d.tokens(), &vocab)),
    );
    let opts = FitOptions::default();
    let folds = lab.folds.min(y.len());
    let cv = select_l2(
        &x,
        &y,
        &lab.grid,
        folds,
        seed::derive(cfg.seed, "cv"),
        &opts,
    )?;
    let l2 = l2_from_inverse(cv.best, y.len());
    let clf = TrainedClassifier {
        model: crate::learner::fit_logreg(&x, &y, l2, &opts)?,
        vocab,
    };
    if !clf.model.converged {
        log::warn!(
            "optimizer stopped after {} iterations",
            clf.model.iterations
        );
    }

    let pred: Vec<bool> = test.iter().map(|(d, _)| clf.predict(d.tokens())).collect();
    let gold_test: Vec<bool> = test.iter().map(|(_, y)| *y).collect();
    let eval = evaluate(&pred, &gold_test)?;

    write_with(&cfg.model, |w| {
        w.write_all(clf.to_model_string().as_bytes())
            .map_err(|e| Error::io(&cfg.model, e))
    })?;
    let report = TrainReport {
        seed: cfg.seed,
        labeled_documents: labels.len(),
        missing_documents: missing,
        n_train: train.len(),
        n_test: test.len(),
        train_prevalence: clf.model.train_prevalence,
        vocab_size: clf.vocab.len(),
        min_df: lab.min_df,
        selected_inverse_penalty: cv.best,
        l2,
        cv_scores: cv.scores,
        iterations: clf.model.iterations,
        converged: clf.model.converged,
        test: eval,
        model: display_in(&cfg.out, &cfg.model),
    };
    write_json(&cfg.out.join("train_report.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct PxaRow {
    pub doc_set: String,
    pub round_a: String,
    pub round_b: String,
    pub num_docs: usize,
    pub pxa: f64,
    pub agreeing_pairs: usize,
    pub total_pairs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgreeOutput {
    pub reports: Vec<AgreementReport>,
    /// Malformed rows skipped per round file.
    pub skipped_rows: BTreeMap<String, usize>,
    pub pxa: Vec<PxaRow>,
}

/// Read a doc-set file: one document id per line, blank lines ignored.
pub fn read_doc_set(path: &Path) -> Result<BTreeSet<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let id = line.trim();
        if !id.is_empty() {
            out.insert(id.to_owned());
        }
    }
    Ok(out)
}

/// Reliability report for every round ("all" and "2+" subsets) and, given
/// two rounds, cross-round agreement for each doc set. Writes
/// `agreement.csv`, `agreement.json` and, when computed, `pxa.csv`.
pub fn cmd_agree(cfg: &PipelineConfig) -> Result<AgreeOutput> {
    if cfg.agree.rounds.is_empty() {
        return Err(Error::Config(
            "agree requires at least one round file".into(),
        ));
    }
    let mut rounds = Vec::new();
    let mut skipped_rows = BTreeMap::new();
    let mut reports = Vec::new();
    for p in &cfg.agree.rounds {
        let (round, stats) = AnnotationRound::load(p)?;
        if stats.skipped > 0 {
            log::warn!("{}: skipped {} malformed rows", p.display(), stats.skipped);
        }
        skipped_rows.insert(round.name.clone(), stats.skipped);
        reports.push(agreement_report(&round, "all")?);
        let multi = round.multi_annotated();
        if !multi.is_empty() {
            reports.push(agreement_report(&multi, "2+")?);
        }
        rounds.push(round);
    }

    let mut pxa_rows = Vec::new();
    if !cfg.agree.doc_sets.is_empty() {
        if rounds.len() != 2 {
            return Err(Error::Config(format!(
                "cross-round agreement needs exactly two rounds, got {}",
                rounds.len()
            )));
        }
        for p in &cfg.agree.doc_sets {
            let docs = read_doc_set(p)?;
            let r = pxa(&rounds[0], &rounds[1], &docs)?;
            pxa_rows.push(PxaRow {
                doc_set: p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                round_a: rounds[0].name.clone(),
                round_b: rounds[1].name.clone(),
                num_docs: docs.len(),
                pxa: r.value,
                agreeing_pairs: r.agreeing_pairs,
                total_pairs: r.total_pairs,
            });
        }
    }

    write_with(&cfg.out.join("agreement.csv"), |w| {
        let mut wtr = csv::Writer::from_writer(w);
        for r in &reports {
            wtr.serialize(r)?;
        }
        wtr.flush().map_err(|e| Error::io("agreement.csv", e))
    })?;
    if !pxa_rows.is_empty() {
        write_with(&cfg.out.join("pxa.csv"), |w| {
            let mut wtr = csv::Writer::from_writer(w);
            for r in &pxa_rows {
                wtr.serialize(r)?;
            }
            wtr.flush().map_err(|e| Error::io("pxa.csv", e))
        })?;
    }
    let out = AgreeOutput {
        reports,
        skipped_rows,
        pxa: pxa_rows,
    };
    write_json(&cfg.out.join("agreement.json"), &out)?;
    Ok(out)
}

/// Correlate the configured measurement series (read back from the output
/// directory), external series and extra series files. Daily series are
/// averaged per month first. Writes `correlation.csv`.
pub fn cmd_correlate(cfg: &PipelineConfig) -> Result<CorrelationMatrix> {
    let mut series = Vec::new();
    for m in &cfg.measurements {
        let name = m.name();
        let path = cfg.out.join("series").join(format!("{name}.csv"));
        if !path.exists() {
            return Err(Error::Config(format!(
                "series for measurement {name} not found at {} (run `measure` first)",
                path.display()
            )));
        }
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let points = crate::prevalence::read_month_csv(file)?;
        series.push(MonthlySeries::new(name, points));
    }
    for p in cfg.external.iter().chain(&cfg.correlate.series) {
        series.push(ExternalSeries::load(p)?.to_monthly());
    }
    if series.len() < 2 {
        return Err(Error::Config(format!(
            "correlate needs at least two series, got {}",
            series.len()
        )));
    }
    let mut names = HashSet::new();
    for s in &series {
        if !names.insert(s.name.clone()) {
            return Err(Error::Config(format!("duplicate series name {:?}", s.name)));
        }
    }
    let clipped: Vec<_> = series
        .iter()
        .map(|s| s.clip(cfg.correlate.start, cfg.correlate.end))
        .collect();
    let matrix = correlation_matrix(&clipped)?;
    write_with(&cfg.out.join("correlation.csv"), |w| matrix.write_csv(w))?;
    Ok(matrix)
}
