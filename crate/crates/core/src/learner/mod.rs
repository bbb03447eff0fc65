//! Bag-of-words logistic regression document classifier.

mod cv;
mod eval;
mod logreg;
mod persist;
mod sparse;
mod vocab;

pub use cv::{l2_from_inverse, select_l2, CvOutcome, DEFAULT_INVERSE_GRID};
pub use eval::{evaluate, EvalReport};
pub use logreg::{fit_logreg, logistic_objective, sigmoid, FitOptions, LogisticModel};
pub use persist::MODEL_FORMAT_VERSION;
pub use sparse::{SparseMatrix, SparseVec};
pub use vocab::{build_vocab, featurize, Vocabulary};

use crate::error::Result;

/// A fitted classifier together with the vocabulary it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub vocab: Vocabulary,
    pub model: LogisticModel,
}

impl TrainedClassifier {
    /// Featurize `docs` with `vocab` and fit at penalty `l2`.
    pub fn train<'a>(
        vocab: Vocabulary,
        docs: impl IntoIterator<Item = &'a [String]>,
        labels: &[bool],
        l2: f64,
        opts: &FitOptions,
    ) -> Result<Self> {
        let x =
            SparseMatrix::from_rows(vocab.len(), docs.into_iter().map(|d| featurize(d, &vocab)));
        let model = fit_logreg(&x, labels, l2, opts)?;
        Ok(Self { vocab, model })
    }

    /// Probability that a tokenized document is positive.
    pub fn predict_proba<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        self.model.predict_proba(&featurize(tokens, &self.vocab))
    }

    pub fn predict<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        self.predict_proba(tokens) > 0.5
    }
}
