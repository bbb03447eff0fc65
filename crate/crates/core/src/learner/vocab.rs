use std::collections::{BTreeMap, HashMap, HashSet};

use super::sparse::SparseVec;
use crate::error::{Error, Result};

/// Token-to-column map over tokens with a minimum document frequency.
///
/// Columns are assigned in lexicographic token order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    min_df: usize,
}

impl Vocabulary {
    /// Build from tokens that must already be sorted and distinct.
    pub fn from_sorted_tokens(tokens: Vec<String>, min_df: usize) -> Result<Self> {
        if tokens.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "vocabulary tokens must be sorted and distinct".into(),
            ));
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Self {
            tokens,
            index,
            min_df,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }
}

/// Vocabulary of tokens appearing in at least `min_df` documents.
///
/// An empty result is allowed; fitting on it then fails for lack of
/// features only if labels are degenerate.
pub fn build_vocab<'a>(
    docs: impl IntoIterator<Item = &'a [String]>,
    min_df: usize,
) -> Result<Vocabulary> {
    if min_df == 0 {
        return Err(Error::InvalidInput("min_df must be at least 1".into()));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    let mut n_docs = 0usize;
    for doc in docs {
        n_docs += 1;
        let distinct: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    if n_docs == 0 {
        return Err(Error::Insufficient(
            "cannot build a vocabulary from zero documents".into(),
        ));
    }
    let tokens = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df)
        .map(|(t, _)| t.to_owned())
        .collect();
    Vocabulary::from_sorted_tokens(tokens, min_df)
}

/// Raw in-vocabulary token counts; unknown tokens are dropped.
pub fn featurize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> SparseVec {
    let mut counts: HashMap<u32, f64> = HashMap::new();
    for t in tokens {
        if let Some(i) = vocab.index_of(t.as_ref()) {
            *counts.entry(i).or_default() += 1.0;
        }
    }
    SparseVec::from_pairs(counts.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn docs(texts: &[&str]) -> Vec<Vec<String>> {
        texts.iter().map(|t| tokenize(t)).collect()
    }

    #[test]
    fn document_frequency_threshold() {
        let d = docs(&["a b", "a c", "a"]);
        let v = build_vocab(d.iter().map(Vec::as_slice), 2).unwrap();
        assert_eq!(v.tokens(), ["a"]);
        let v = build_vocab(d.iter().map(Vec::as_slice), 1).unwrap();
        assert_eq!(v.tokens(), ["a", "b", "c"]);
        assert_eq!(v.index_of("c"), Some(2));
        let v = build_vocab(d.iter().map(Vec::as_slice), 4).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn repeated_token_counts_once_per_document() {
        let d = docs(&["a a a", "b"]);
        let v = build_vocab(d.iter().map(Vec::as_slice), 2).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn empty_corpus_and_bad_min_df() {
        assert!(build_vocab(std::iter::empty(), 1).is_err());
        let d = docs(&["a"]);
        assert!(build_vocab(d.iter().map(Vec::as_slice), 0).is_err());
    }

    #[test]
    fn featurize_counts() {
        let v = Vocabulary::from_sorted_tokens(vec!["a".into(), "b".into()], 1).unwrap();
        assert_eq!(
            featurize(&tokenize("a a b"), &v).entries(),
            &[(0, 2.0), (1, 1.0)]
        );
        assert!(featurize(&tokenize("z z"), &v).is_empty());
        assert!(featurize::<String>(&[], &v).is_empty());
    }
}
