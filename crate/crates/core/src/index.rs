//! Index assembly and validation against external series.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::corpus::parse_date;
use crate::error::{Error, Result};
use crate::month::YearMonth;

/// Minimum number of overlapping months for a correlation.
pub const MIN_OVERLAP: usize = 3;

/// A named external series at daily or monthly resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum ExternalSeries {
    Daily {
        name: String,
        points: BTreeMap<NaiveDate, f64>,
    },
    Monthly(MonthlySeries),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySeries {
    pub name: String,
    pub points: BTreeMap<YearMonth, f64>,
}

impl MonthlySeries {
    pub fn new(name: impl Into<String>, points: BTreeMap<YearMonth, f64>) -> Self {
        Self {
            name: name.into(),
            points,
        }
    }

    /// Keep months within `[start, end]` (either bound optional).
    pub fn clip(&self, start: Option<YearMonth>, end: Option<YearMonth>) -> Self {
        Self {
            name: self.name.clone(),
            points: self
                .points
                .iter()
                .filter(|(m, _)| start.is_none_or(|s| **m >= s) && end.is_none_or(|e| **m <= e))
                .map(|(m, v)| (*m, *v))
                .collect(),
        }
    }
}

impl ExternalSeries {
    pub fn name(&self) -> &str {
        match self {
            ExternalSeries::Daily { name, .. } => name,
            ExternalSeries::Monthly(m) => &m.name,
        }
    }

    /// Monthly view: daily series are averaged per month.
    pub fn to_monthly(&self) -> MonthlySeries {
        match self {
            ExternalSeries::Daily { .. } => monthly_mean(self),
            ExternalSeries::Monthly(m) => m.clone(),
        }
    }

    /// Read `date,value` CSV. Dates are either all `YYYY-MM-DD` (daily) or
    /// all `YYYY-MM` (monthly); they must be strictly increasing and values
    /// finite. The series is named after the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(&name, file)
    }

    pub fn from_reader(name: &str, r: impl Read) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            #[serde(alias = "month")]
            date: String,
            value: f64,
        }
        let rows = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(r)
            .deserialize()
            .collect::<std::result::Result<Vec<Row>, _>>()?;
        if let Some(r) = rows.iter().find(|r| !r.value.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{name}: non-finite value at {}",
                r.date
            )));
        }
        let daily = rows.first().is_none_or(|r| r.date.trim().len() > 7);
        let out_of_order = |d: &str| Error::InvalidInput(format!("{name}: date {d} out of order"));
        if daily {
            let mut points = BTreeMap::new();
            for r in &rows {
                let d = parse_date(&r.date)
                    .ok_or_else(|| Error::InvalidInput(format!("{name}: bad date {:?}", r.date)))?;
                if points.last_key_value().is_some_and(|(l, _)| d <= *l) {
                    return Err(out_of_order(&r.date));
                }
                points.insert(d, r.value);
            }
            Ok(ExternalSeries::Daily {
                name: name.to_owned(),
                points,
            })
        } else {
            let mut points = BTreeMap::new();
            for r in &rows {
                let m: YearMonth = r.date.parse()?;
                if points.last_key_value().is_some_and(|(l, _)| m <= *l) {
                    return Err(out_of_order(&r.date));
                }
                points.insert(m, r.value);
            }
            Ok(ExternalSeries::Monthly(MonthlySeries::new(name, points)))
        }
    }
}

/// Calendar-month means of a daily series. Monthly input passes through.
pub fn monthly_mean(series: &ExternalSeries) -> MonthlySeries {
    match series {
        ExternalSeries::Monthly(m) => m.clone(),
        ExternalSeries::Daily { name, points } => {
            let mut acc: BTreeMap<YearMonth, (f64, usize)> = BTreeMap::new();
            for (d, v) in points {
                let e = acc.entry(YearMonth::of(*d)).or_default();
                e.0 += v;
                e.1 += 1;
            }
            MonthlySeries::new(
                name.clone(),
                acc.into_iter()
                    .map(|(m, (s, n))| (m, s / n as f64))
                    .collect(),
            )
        }
    }
}

/// Two series restricted to their common months.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub months: Vec<YearMonth>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Aligned {
    pub fn first(&self) -> YearMonth {
        self.months[0]
    }

    pub fn last(&self) -> YearMonth {
        *self.months.last().expect("aligned series are non-empty")
    }
}

/// Inner join on month; fails when fewer than [`MIN_OVERLAP`] months overlap.
pub fn align(a: &MonthlySeries, b: &MonthlySeries) -> Result<Aligned> {
    let mut out = Aligned {
        months: Vec::new(),
        a: Vec::new(),
        b: Vec::new(),
    };
    for (m, va) in &a.points {
        if let Some(vb) = b.points.get(m) {
            out.months.push(*m);
            out.a.push(*va);
            out.b.push(*vb);
        }
    }
    if out.months.len() < MIN_OVERLAP {
        return Err(Error::Insufficient(format!(
            "{:?} and {:?} overlap in {} months; need at least {MIN_OVERLAP}",
            a.name,
            b.name,
            out.months.len()
        )));
    }
    Ok(out)
}

/// Sample Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "series lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < MIN_OVERLAP {
        return Err(Error::Insufficient(format!(
            "correlation needs at least {MIN_OVERLAP} points"
        )));
    }
    let constant = |s: &[f64]| s.iter().all(|&v| v == s[0]);
    if constant(a) || constant(b) {
        return Err(Error::InvalidInput(
            "correlation of a constant series".into(),
        ));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Pairwise Pearson correlations. Cells whose pair cannot be aligned or
/// correlated are `None`, with the reason recorded in `diagnostics`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    pub diagnostics: Vec<String>,
}

pub fn correlation_matrix(series: &[MonthlySeries]) -> Result<CorrelationMatrix> {
    if series.len() < 2 {
        return Err(Error::Insufficient(
            "a correlation matrix needs two or more series".into(),
        ));
    }
    let k = series.len();
    let mut values = vec![vec![None; k]; k];
    let mut diagnostics = Vec::new();
    for i in 0..k {
        values[i][i] = Some(1.0);
        for j in i + 1..k {
            let r = align(&series[i], &series[j]).and_then(|al| pearson(&al.a, &al.b));
            match r {
                Ok(r) => {
                    values[i][j] = Some(r);
                    values[j][i] = Some(r);
                }
                Err(e) => {
                    let msg = format!("{} vs {}: {e}", series[i].name, series[j].name);
                    log::warn!("{msg}");
                    diagnostics.push(msg);
                }
            }
        }
    }
    Ok(CorrelationMatrix {
        labels: series.iter().map(|s| s.name.clone()).collect(),
        values,
        diagnostics,
    })
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        self.values[i][j]
    }

    /// CSV with a header row and a leading label column; missing cells are
    /// empty.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        wtr.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.values) {
            let mut rec = vec![label.clone()];
            rec.extend(
                row.iter()
                    .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
            );
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut records = rdr.records();
        let header = records
            .next()
            .ok_or_else(|| Error::InvalidInput("empty matrix file".into()))??;
        let labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut values = Vec::with_capacity(labels.len());
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            if rec.get(0) != labels.get(i).map(String::as_str) || rec.len() != labels.len() + 1 {
                return Err(Error::InvalidInput(format!(
                    "matrix row {} is malformed",
                    i + 1
                )));
            }
            let row = rec
                .iter()
                .skip(1)
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>()
                            .map(Some)
                            .map_err(|_| Error::InvalidInput(format!("bad matrix cell {c:?}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            values.push(row);
        }
        if values.len() != labels.len() {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        Ok(Self {
            labels,
            values,
            diagnostics: Vec::new(),
        })
    }
}
