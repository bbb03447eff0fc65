use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{KeywordBank, Phrase};
use crate::corpus::tokenize;
use crate::error::{Error, Result};

/// Word vectors loaded from a whitespace-separated text file
/// (`word v1 ... vD` per line, optionally preceded by a `count dim` header).
///
/// Vectors are kept as read; norms are precomputed in f64 and zero-norm
/// vectors are dropped at load.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
    norms: Vec<f64>,
}

impl EmbeddingTable {
    pub fn from_vectors<S: Into<String>>(
        dim: usize,
        entries: impl IntoIterator<Item = (S, Vec<f32>)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "embedding dimension must be positive".into(),
            ));
        }
        let mut t = Self {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            norms: Vec::new(),
        };
        for (w, v) in entries {
            let w = w.into();
            if v.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "vector for {w:?} has dimension {}, expected {dim}",
                    v.len()
                )));
            }
            t.push(w, &v);
        }
        Ok(t)
    }

    fn push(&mut self, word: String, v: &[f32]) {
        let norm = v
            .iter()
            .map(|&x| f64::from(x) * f64::from(x))
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 || !norm.is_finite() {
            log::debug!("dropping zero-norm or non-finite vector for {word:?}");
            return;
        }
        if self.index.contains_key(&word) {
            log::warn!("duplicate embedding for {word:?}; keeping the first");
            return;
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(v);
        self.norms.push(norm);
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file), path)
    }

    pub fn from_reader(reader: impl BufRead, source: &Path) -> Result<Self> {
        let mut table: Option<Self> = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            let parse_err = |message: String| Error::Parse {
                path: source.to_path_buf(),
                line: i + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values = fields
                .map(|f| f.parse::<f32>())
                .collect::<std::result::Result<Vec<_>, _>>();
            if i == 0 {
                // word2vec-style "count dim" header
                if let (Ok(_), Ok(v)) = (word.parse::<u64>(), &values) {
                    if v.len() == 1 && v[0].fract() == 0.0 && v[0] > 0.0 {
                        table = Some(Self::from_vectors::<String>(v[0] as usize, [])?);
                        continue;
                    }
                }
            }
            let values = values.map_err(|e| parse_err(format!("bad float: {e}")))?;
            let t = match &mut table {
                Some(t) => t,
                None => table.insert(
                    Self::from_vectors::<String>(values.len(), [])
                        .map_err(|e| parse_err(e.to_string()))?,
                ),
            };
            if values.len() != t.dim {
                return Err(parse_err(format!(
                    "expected {} values, found {}",
                    t.dim,
                    values.len()
                )));
            }
            t.push(word.to_owned(), &values);
        }
        table.ok_or_else(|| Error::InvalidInput(format!("{}: no vectors", source.display())))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine similarity between two stored words.
    pub fn cosine(&self, a: &str, b: &str) -> Result<f64> {
        let ia = self.lookup(a)?;
        let ib = self.lookup(b)?;
        Ok(self.cosine_idx(ia, ib))
    }

    fn lookup(&self, w: &str) -> Result<usize> {
        self.index
            .get(w)
            .copied()
            .ok_or_else(|| Error::WordNotFound(w.to_owned()))
    }

    fn cosine_idx(&self, a: usize, b: usize) -> f64 {
        let dot: f64 = self
            .row(a)
            .iter()
            .zip(self.row(b))
            .map(|(&x, &y)| f64::from(x) * f64::from(y))
            .sum();
        dot / (self.norms[a] * self.norms[b])
    }
}

/// The `k` words closest to `word` by cosine distance, nearest first.
///
/// The query itself is excluded; equal distances are ordered
/// lexicographically.
pub fn nearest_neighbors(word: &str, table: &EmbeddingTable, k: usize) -> Result<Vec<String>> {
    let q = table.lookup(word)?;
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if k > table.len() - 1 {
        return Err(Error::InvalidInput(format!(
            "requested {k} neighbors but the table holds only {} other words",
            table.len() - 1
        )));
    }
    let mut scored: Vec<(f64, usize)> = (0..table.len())
        .filter(|&i| i != q)
        .map(|i| (1.0 - table.cosine_idx(q, i), i))
        .collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.total_cmp(&b.0)
            .then_with(|| table.words[a.1].cmp(&table.words[b.1]))
    };
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(order);
    Ok(scored
        .into_iter()
        .map(|(_, i)| table.words[i].clone())
        .collect())
}

/// Grow a bank with the `k` nearest neighbors of each single-token phrase,
/// then drop every phrase whose text is in `removal`.
///
/// Multi-token phrases are kept but not used as seeds.
pub fn expand_bank(
    bank: &KeywordBank,
    table: &EmbeddingTable,
    k: usize,
    removal: &BTreeSet<String>,
) -> Result<KeywordBank> {
    let mut phrases: BTreeSet<Phrase> = bank.phrases().clone();
    if k > 0 {
        for seed in bank.phrases().iter().filter(|p| p.len() == 1) {
            let seed = &seed[0];
            if !table.contains(seed) {
                return Err(Error::WordNotFound(seed.clone()));
            }
            for n in nearest_neighbors(seed, table, k)? {
                let toks = tokenize(&n);
                if !toks.is_empty() {
                    phrases.insert(toks);
                }
            }
        }
    }
    let removal: BTreeSet<Phrase> = removal.iter().map(|w| tokenize(w)).collect();
    phrases.retain(|p| !removal.contains(p));
    KeywordBank::from_phrases(bank.name(), phrases)
}
