//! Prevalence estimation: turning per-document scores into monthly series.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::month::YearMonth;

/// Default grid resolution for [`implicit_likelihood`].
pub const DEFAULT_GRID_STEP: f64 = 0.001;

/// Classify and count: the fraction of positive labels.
pub fn cc(labels: &[bool]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Insufficient("cc of an empty label set".into()));
    }
    Ok(labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64)
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Insufficient("no scores to aggregate".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidInput(format!("score {p} outside [0, 1]")));
    }
    Ok(())
}

/// Probabilistic classify and count: the mean predicted probability.
pub fn pcc(probs: &[f64]) -> Result<f64> {
    check_probs(probs)?;
    Ok(probs.iter().sum::<f64>() / probs.len() as f64)
}

/// Implicit-likelihood prevalence estimate.
///
/// Scores from a classifier trained at prevalence `train_prior` are read
/// generatively: `p / q` and `(1 - p) / (1 - q)` act as the class-conditional
/// likelihoods of each item up to a shared factor. The estimate maximizes
/// `sum_i log(pi * p_i / q + (1 - pi) * (1 - p_i) / (1 - q))` over the grid
/// `{0, step, 2 step, ..., 1}`. A grid point where any term is zero is
/// infeasible. When the likelihood is flat the prior is returned.
pub fn implicit_likelihood(probs: &[f64], train_prior: f64, grid_step: f64) -> Result<f64> {
    check_probs(probs)?;
    if !(train_prior > 0.0 && train_prior < 1.0) {
        return Err(Error::InvalidInput(format!(
            "training prior {train_prior} must lie strictly between 0 and 1"
        )));
    }
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "grid step {grid_step} must lie in (0, 0.5]"
        )));
    }
    let q = train_prior;
    let ratios: Vec<(f64, f64)> = probs
        .iter()
        .map(|&p| (p / q, (1.0 - p) / (1.0 - q)))
        .collect();

    let mut best: Option<(f64, f64)> = None;
    let mut lowest = f64::INFINITY;
    for pi in grid(grid_step) {
        let mut ll = 0.0;
        for &(a, b) in &ratios {
            let term = pi * a + (1.0 - pi) * b;
            if term <= 0.0 {
                ll = f64::NEG_INFINITY;
                break;
            }
            ll += term.ln();
        }
        if ll == f64::NEG_INFINITY {
            continue;
        }
        lowest = lowest.min(ll);
        if best.is_none_or(|(_, b)| ll > b) {
            best = Some((pi, ll));
        }
    }
    let (pi, top) = best.ok_or_else(|| {
        Error::Insufficient("every prevalence grid point has zero likelihood".into())
    })?;
    if top - lowest <= 1e-9 * top.abs().max(1.0) {
        return Ok(q);
    }
    Ok(pi)
}

fn grid(step: f64) -> impl Iterator<Item = f64> {
    let ratio = 1.0 / step;
    let n = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as usize
    } else {
        ratio.floor() as usize
    };
    let exact = n as f64 * step >= 1.0 - 1e-12;
    (0..=n)
        .map(move |i| {
            if i == n && exact {
                1.0
            } else {
                (i as f64 * step).min(1.0)
            }
        })
        .chain((!exact).then_some(1.0))
}

/// How a series was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "CC")]
    Cc,
    #[serde(rename = "PCC")]
    Pcc,
    ImpLik,
    #[serde(rename = "KeywordCC")]
    KeywordCc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cc => "CC",
            Method::Pcc => "PCC",
            Method::ImpLik => "ImpLik",
            Method::KeywordCc => "KeywordCC",
        })
    }
}

/// Aggregation rule applied within each (month, outlet) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// Scores above 0.5 count as positive; unscored documents as negative.
    Cc,
    /// Mean score, unscored documents contributing 0.
    Pcc,
    /// Implicit likelihood over the scored documents of the cell only.
    ImpLik { train_prior: f64, grid_step: f64 },
}

impl Estimator {
    pub fn method(&self) -> Method {
        match self {
            Estimator::Cc => Method::Cc,
            Estimator::Pcc => Method::Pcc,
            Estimator::ImpLik { .. } => Method::ImpLik,
        }
    }
}

/// A document-level score ready for aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDocument {
    pub doc_id: String,
    pub date: NaiveDate,
    pub outlet: String,
    pub score: f64,
}

/// Monthly prevalence estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct PrevalenceSeries {
    pub method: Method,
    /// Set when the series covers a single outlet.
    pub outlet: Option<String>,
    pub points: BTreeMap<YearMonth, f64>,
}

impl PrevalenceSeries {
    /// Write as `month,value` CSV.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        write_month_csv(&self.points, w)
    }
}

pub fn write_month_csv(points: &BTreeMap<YearMonth, f64>, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["month", "value"])?;
    for (m, v) in points {
        wtr.write_record([m.to_string(), v.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Read `month,value` CSV; months must be strictly increasing.
pub fn read_month_csv(r: impl Read) -> Result<BTreeMap<YearMonth, f64>> {
    #[derive(Deserialize)]
    struct Row {
        month: String,
        value: f64,
    }
    let mut out = BTreeMap::new();
    let mut last: Option<YearMonth> = None;
    for row in csv::Reader::from_reader(r).deserialize() {
        let row: Row = row?;
        let m: YearMonth = row.month.parse()?;
        if last.is_some_and(|l| m <= l) {
            return Err(Error::InvalidInput(format!("month {m} out of order")));
        }
        last = Some(m);
        out.insert(m, row.value);
    }
    Ok(out)
}

/// Documents published per (month, outlet), the normalizing denominators.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonthlyTotals(BTreeMap<(YearMonth, String), usize>);

impl MonthlyTotals {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, month: YearMonth, outlet: &str, n: usize) {
        *self.0.entry((month, outlet.to_owned())).or_default() += n;
    }

    pub fn set(&mut self, month: YearMonth, outlet: &str, n: usize) {
        self.0.insert((month, outlet.to_owned()), n);
    }

    pub fn get(&self, month: YearMonth, outlet: &str) -> Option<usize> {
        self.0.get(&(month, outlet.to_owned())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (YearMonth, &str, usize)> {
        self.0.iter().map(|((m, o), &n)| (*m, o.as_str(), n))
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["month", "outlet", "count"])?;
        for (m, o, n) in self.iter() {
            wtr.write_record([m.to_string(), o.to_owned(), n.to_string()])?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            month: String,
            outlet: String,
            count: usize,
        }
        let mut t = Self::new();
        for row in csv::Reader::from_reader(r).deserialize() {
            let row: Row = row?;
            t.add(row.month.parse()?, &row.outlet, row.count);
        }
        Ok(t)
    }
}

/// Aggregate scores into a monthly series normalized by published totals.
///
/// Every scored document's (month, outlet) cell must have a total at least
/// as large as the number of scored documents in it. Per cell, CC and PCC
/// divide by the total (unscored documents count as 0); ImpLik uses only the
/// scored documents. Cells with a zero total, and ImpLik cells without
/// scores, are skipped with a warning. A month's value is the unweighted mean
/// over its remaining outlets; months left with none are omitted.
pub fn aggregate_monthly(
    scored: impl IntoIterator<Item = ScoredDocument>,
    totals: &MonthlyTotals,
    estimator: &Estimator,
) -> Result<PrevalenceSeries> {
    let mut cells: BTreeMap<(YearMonth, String), Vec<f64>> = BTreeMap::new();
    for d in scored {
        if !(0.0..=1.0).contains(&d.score) {
            return Err(Error::InvalidInput(format!(
                "document {:?} has score {} outside [0, 1]",
                d.doc_id, d.score
            )));
        }
        cells
            .entry((YearMonth::of(d.date), d.outlet))
            .or_default()
            .push(d.score);
    }
    for ((m, o), scores) in &cells {
        match totals.get(*m, o) {
            None => {
                return Err(Error::MissingTotal {
                    month: m.to_string(),
                    outlet: o.clone(),
                })
            }
            Some(n) if n < scores.len() => {
                return Err(Error::InvalidInput(format!(
                    "{m} / {o:?}: {} scored documents exceed the total of {n}",
                    scores.len()
                )))
            }
            _ => {}
        }
    }

    let outlets: BTreeSet<&str> = totals.iter().map(|(_, o, _)| o).collect();
    let mut by_month: BTreeMap<YearMonth, Vec<f64>> = BTreeMap::new();
    for (m, o, n) in totals.iter() {
        let entry = by_month.entry(m).or_default();
        if n == 0 {
            log::warn!("{m} / {o:?}: zero published documents; cell skipped");
            continue;
        }
        let scores = cells
            .get(&(m, o.to_owned()))
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        let value = match *estimator {
            Estimator::Cc => scores.iter().filter(|&&s| s > 0.5).count() as f64 / n as f64,
            Estimator::Pcc => scores.iter().sum::<f64>() / n as f64,
            Estimator::ImpLik {
                train_prior,
                grid_step,
            } => {
                if scores.is_empty() {
                    log::warn!("{m} / {o:?}: no scored documents for ImpLik; cell skipped");
                    continue;
                }
                implicit_likelihood(scores, train_prior, grid_step)?
            }
        };
        entry.push(value);
    }

    let mut points = BTreeMap::new();
    for (m, values) in by_month {
        if values.is_empty() {
            log::warn!("{m}: no outlet with usable documents; month omitted");
            continue;
        }
        points.insert(m, values.iter().sum::<f64>() / values.len() as f64);
    }
    Ok(PrevalenceSeries {
        method: estimator.method(),
        outlet: (outlets.len() == 1).then(|| outlets.first().unwrap().to_string()),
        points,
    })
}

/// Write scored documents as `doc_id,date,outlet,score` CSV.
pub fn write_scored_csv<'a>(
    docs: impl IntoIterator<Item = &'a ScoredDocument>,
    w: impl Write,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["doc_id", "date", "outlet", "score"])?;
    for d in docs {
        wtr.write_record([
            d.doc_id.clone(),
            d.date.format("%Y-%m-%d").to_string(),
            d.outlet.clone(),
            d.score.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_scored_csv(r: impl Read) -> Result<Vec<ScoredDocument>> {
    let rows = csv::Reader::from_reader(r)
        .deserialize()
        .collect::<std::result::Result<Vec<ScoredDocument>, _>>()?;
    Ok(rows)
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "CC" => Ok(Method::Cc),
            "PCC" => Ok(Method::Pcc),
            "ImpLik" => Ok(Method::ImpLik),
            "KeywordCC" => Ok(Method::KeywordCc),
            other => Err(Error::InvalidInput(format!("unknown method {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    fn sd(id: &str, date: &str, outlet: &str, score: f64) -> ScoredDocument {
        ScoredDocument {
            doc_id: id.into(),
            date: NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
            outlet: outlet.into(),
            score,
        }
    }

    #[test]
    fn cc_values() {
        assert_eq!(cc(&[true, true, true]).unwrap(), 1.0);
        assert_eq!(cc(&[true, false, true, false]).unwrap(), 0.5);
        assert_eq!(cc(&[true, false, false, false, false]).unwrap(), 0.2);
        assert!(cc(&[]).is_err());
    }

    #[test]
    fn pcc_values() {
        assert_eq!(pcc(&[0.9, 0.1]).unwrap(), 0.5);
        assert!((pcc(&[0.42; 7]).unwrap() - 0.42).abs() < 1e-15);
        assert!((pcc(&[0.2, 0.3, 0.7]).unwrap() - 0.4).abs() < 1e-15);
        assert!(pcc(&[0.5, 1.5]).is_err());
        assert!(pcc(&[]).is_err());
    }

    #[test]
    fn implicit_likelihood_edge_cases() {
        assert_eq!(implicit_likelihood(&[1.0], 0.3, 0.001).unwrap(), 1.0);
        assert_eq!(implicit_likelihood(&[0.0], 0.3, 0.001).unwrap(), 0.0);
        assert_eq!(implicit_likelihood(&[0.48; 20], 0.48, 0.001).unwrap(), 0.48);
        assert!(implicit_likelihood(&[0.5], 0.0, 0.01).is_err());
        assert!(implicit_likelihood(&[0.5], 0.5, 0.0).is_err());
        assert!(implicit_likelihood(&[0.5], 0.5, 0.6).is_err());
        assert!(implicit_likelihood(&[], 0.5, 0.1).is_err());
    }

    #[test]
    fn grid_includes_both_ends() {
        let g: Vec<f64> = grid(0.25).collect();
        assert_eq!(g, [0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: Vec<f64> = grid(0.3).collect();
        assert_eq!(g.first(), Some(&0.0));
        assert_eq!(g.last(), Some(&1.0));
        assert_eq!(grid(0.001).count(), 1001);
    }

    #[test]
    fn aggregate_cc_single_cell() {
        let mut t = MonthlyTotals::new();
        t.set(ym("1990-01"), "nyt", 2);
        let s = aggregate_monthly(
            [
                sd("a", "1990-01-03", "nyt", 1.0),
                sd("b", "1990-01-09", "nyt", 0.0),
            ],
            &t,
            &Estimator::Cc,
        )
        .unwrap();
        assert_eq!(s.points[&ym("1990-01")], 0.5);
        assert_eq!(s.outlet.as_deref(), Some("nyt"));
    }

    #[test]
    fn unscored_documents_count_as_negative() {
        let mut t = MonthlyTotals::new();
        t.set(ym("1990-01"), "nyt", 4);
        let s = aggregate_monthly([sd("a", "1990-01-03", "nyt", 1.0)], &t, &Estimator::Cc).unwrap();
        assert_eq!(s.points[&ym("1990-01")], 0.25);
    }

    #[test]
    fn outlets_are_averaged_unweighted() {
        let mut t = MonthlyTotals::new();
        t.set(ym("1990-01"), "a", 5);
        t.set(ym("1990-01"), "b", 10);
        let mut docs = vec![sd("a1", "1990-01-01", "a", 1.0)];
        docs.extend((0..4).map(|i| sd(&format!("b{i}"), "1990-01-02", "b", 1.0)));
        let s = aggregate_monthly(docs, &t, &Estimator::Cc).unwrap();
        assert!((s.points[&ym("1990-01")] - 0.3).abs() < 1e-15);
        assert_eq!(s.outlet, None);
    }

    #[test]
    fn aggregation_errors_and_omissions() {
        let mut t = MonthlyTotals::new();
        t.set(ym("1990-01"), "nyt", 1);
        t.set(ym("1990-02"), "nyt", 0);
        let missing = aggregate_monthly([sd("a", "1990-03-01", "nyt", 1.0)], &t, &Estimator::Cc);
        assert!(matches!(missing, Err(Error::MissingTotal { .. })));
        let over = aggregate_monthly(
            [
                sd("a", "1990-01-01", "nyt", 1.0),
                sd("b", "1990-01-02", "nyt", 1.0),
            ],
            &t,
            &Estimator::Cc,
        );
        assert!(over.is_err());
        let s =
            aggregate_monthly([sd("a", "1990-01-01", "nyt", 0.7)], &t, &Estimator::Pcc).unwrap();
        assert_eq!(s.points.len(), 1);
        assert!(!s.points.contains_key(&ym("1990-02")));
        let bad = aggregate_monthly([sd("a", "1990-01-01", "nyt", 1.2)], &t, &Estimator::Pcc);
        assert!(bad.is_err());
    }

    #[test]
    fn implik_uses_scored_documents_only() {
        let mut t = MonthlyTotals::new();
        t.set(ym("1990-01"), "nyt", 100);
        t.set(ym("1990-02"), "nyt", 3);
        let est = Estimator::ImpLik {
            train_prior: 0.5,
            grid_step: 0.001,
        };
        let s = aggregate_monthly([sd("a", "1990-01-01", "nyt", 1.0)], &t, &est).unwrap();
        assert_eq!(s.points[&ym("1990-01")], 1.0);
        assert!(!s.points.contains_key(&ym("1990-02")));
    }

    #[test]
    fn csv_round_trips() {
        let mut points = BTreeMap::new();
        points.insert(ym("1990-01"), 0.1 + 0.2);
        points.insert(ym("1990-03"), 1.0 / 3.0);
        let mut buf = Vec::new();
        write_month_csv(&points, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("month,value\n1990-01,"));
        assert_eq!(read_month_csv(buf.as_slice()).unwrap(), points);

        let docs = vec![sd("x,1", "1991-02-03", "wsj", 0.123456789)];
        let mut buf = Vec::new();
        write_scored_csv(&docs, &mut buf).unwrap();
        assert_eq!(read_scored_csv(buf.as_slice()).unwrap(), docs);

        let mut t = MonthlyTotals::new();
        t.set(ym("1990-01"), "nyt", 12);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(MonthlyTotals::read_csv(buf.as_slice()).unwrap(), t);
    }

    proptest! {
        #[test]
        fn pcc_between_min_and_max(probs in prop::collection::vec(0.0f64..=1.0, 1..40)) {
            let m = pcc(&probs).unwrap();
            let lo = probs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= m && m <= hi + 1e-12);
        }

        #[test]
        fn implik_symmetric_scores_give_half(half in prop::collection::vec(0.01f64..0.99, 1..20)) {
            let mut probs = half.clone();
            probs.extend(half.iter().map(|p| 1.0 - p));
            let est = implicit_likelihood(&probs, 0.5, 0.001).unwrap();
            prop_assert!((est - 0.5).abs() < 1e-9, "{}", est);
        }

        #[test]
        fn implik_permutation_invariant(probs in prop::collection::vec(0.0f64..=1.0, 1..30), q in 0.05f64..0.95) {
            let a = implicit_likelihood(&probs, q, 0.01).unwrap();
            let mut rev = probs.clone();
            rev.reverse();
            rev.rotate_left(probs.len() / 2);
            prop_assert_eq!(a, implicit_likelihood(&rev, q, 0.01).unwrap());
        }

        #[test]
        fn implik_matches_cc_on_hard_labels(labels in prop::collection::vec(any::<bool>(), 1..60)) {
            let probs: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
            let step = 0.001;
            let est = implicit_likelihood(&probs, 0.5, step).unwrap();
            prop_assert!((est - cc(&labels).unwrap()).abs() <= step);
        }
    }
}
