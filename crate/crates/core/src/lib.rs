//! Economic policy uncertainty (EPU) index construction from news text.
//!
//! The crate turns a news corpus into monthly prevalence series under several
//! interchangeable measurement functions and audits the human annotations that
//! back them:
//!
//! * [`corpus`]: JSON-Lines ingestion, tokenization, dateline parsing and the
//!   gazetteer-based US-only filter.
//! * [`lexicon`]: keyword banks, conjunctive bank matching (KeyOrg, KeyEU) and
//!   embedding nearest-neighbor expansion (KeyExp).
//! * [`learner`]: bag-of-words logistic regression with cross-validated L2
//!   penalty selection and classification metrics.
//! * [`prevalence`]: classify-and-count, probabilistic classify-and-count and
//!   implicit-likelihood aggregation into monthly series.
//! * [`agreement`]: pairwise agreement, Krippendorff's alpha, pairwise
//!   cross-agreement between annotation rounds, majority labels.
//! * [`index`]: external series, month alignment and Pearson correlation
//!   matrices.
//! * [`pipeline`]: config-driven orchestration behind the `epu` CLI.

pub mod agreement;
pub mod corpus;
pub mod error;
pub mod index;
pub mod learner;
pub mod lexicon;
pub mod month;
pub mod pipeline;
pub mod prevalence;
pub mod seed;

pub use error::{Error, Result};
pub use month::YearMonth;
