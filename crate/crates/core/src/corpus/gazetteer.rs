use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::dateline::normalize_place;
use crate::error::{Error, Result};

/// City names split into US and non-US sets.
///
/// A name listed under both the US and another country is kept only as a US
/// city, so ambiguous names never cause a document to be discarded.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    us_cities: HashSet<String>,
    non_us_cities: HashSet<String>,
}

#[derive(Deserialize)]
struct Row {
    name: String,
    country_code: String,
}

impl Gazetteer {
    /// Build from `(name, country_code)` pairs; `"US"` (any case) marks US cities.
    pub fn from_entries<'a>(entries: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut us = HashSet::new();
        let mut other = HashSet::new();
        for (name, cc) in entries {
            let name = normalize_place(name);
            if name.is_empty() {
                continue;
            }
            if cc.trim().eq_ignore_ascii_case("us") {
                us.insert(name);
            } else {
                other.insert(name);
            }
        }
        other.retain(|n| !us.contains(n));
        Self {
            us_cities: us,
            non_us_cities: other,
        }
    }

    /// Load a `name,country_code` CSV with a header row.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let rows: Vec<Row> = rdr.deserialize().collect::<Result<_, _>>()?;
        Ok(Self::from_entries(
            rows.iter()
                .map(|r| (r.name.as_str(), r.country_code.as_str())),
        ))
    }

    pub fn is_us(&self, name: &str) -> bool {
        self.us_cities.contains(name)
    }

    pub fn is_non_us(&self, name: &str) -> bool {
        self.non_us_cities.contains(name)
    }

    pub fn us_cities(&self) -> &HashSet<String> {
        &self.us_cities
    }

    pub fn non_us_cities(&self) -> &HashSet<String> {
        &self.non_us_cities
    }
}
