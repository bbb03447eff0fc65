//! Flat-file model format.
//!
//! ```text
//! epu-logreg 1
//! vocab_size <n>
//! min_df <k>
//! l2 <value>
//! train_prevalence <value>
//! <token> <weight>        (n lines, column order)
//! bias <value>
//! ```
//!
//! Fields are tab-separated. Floats use Rust's shortest round-trip
//! formatting, so a written model reads back bit-identical.

use std::fmt::Write as _;
use std::path::Path;

use super::logreg::LogisticModel;
use super::vocab::Vocabulary;
use super::TrainedClassifier;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "epu-logreg";

impl TrainedClassifier {
    pub fn to_model_string(&self) -> String {
        let m = &self.model;
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}\t{MODEL_FORMAT_VERSION}");
        let _ = writeln!(out, "vocab_size\t{}", self.vocab.len());
        let _ = writeln!(out, "min_df\t{}", self.vocab.min_df());
        let _ = writeln!(out, "l2\t{}", m.l2);
        let _ = writeln!(out, "train_prevalence\t{}", m.train_prevalence);
        for (tok, w) in self.vocab.tokens().iter().zip(&m.weights) {
            let _ = writeln!(out, "{tok}\t{w}");
        }
        let _ = writeln!(out, "bias\t{}", m.bias);
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_model_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_model(&text, path)
    }

    pub fn parse_model(text: &str, source: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, String, String)> {
            let (i, line) = lines.next().ok_or_else(|| Error::Parse {
                path: source.into(),
                line: 0,
                message: format!("unexpected end of file, expected {expect}"),
            })?;
            let (k, v) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: source.into(),
                line: i + 1,
                message: format!("expected {expect}"),
            })?;
            Ok((i + 1, k.to_owned(), v.to_owned()))
        };
        let err = |line: usize, message: String| Error::Parse {
            path: source.into(),
            line,
            message,
        };
        fn field<T: std::str::FromStr>(
            (line, k, v): (usize, String, String),
            key: &str,
            err: &dyn Fn(usize, String) -> Error,
        ) -> Result<T> {
            if k != key {
                return Err(err(line, format!("expected {key}, found {k}")));
            }
            v.parse()
                .map_err(|_| err(line, format!("bad value for {key}: {v:?}")))
        }

        let version: u32 = field(next(MAGIC)?, MAGIC, &err)?;
        if version != MODEL_FORMAT_VERSION {
            return Err(err(1, format!("unsupported model version {version}")));
        }
        let n: usize = field(next("vocab_size")?, "vocab_size", &err)?;
        let min_df: usize = field(next("min_df")?, "min_df", &err)?;
        let l2: f64 = field(next("l2")?, "l2", &err)?;
        let train_prevalence: f64 = field(next("train_prevalence")?, "train_prevalence", &err)?;
        let mut tokens = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, tok, w) = next("token weight")?;
            weights.push(
                w.parse()
                    .map_err(|_| err(line, format!("bad weight {w:?}")))?,
            );
            tokens.push(tok);
        }
        let bias: f64 = field(next("bias")?, "bias", &err)?;
        let vocab = Vocabulary::from_sorted_tokens(tokens, min_df)?;
        Ok(Self {
            vocab,
            model: LogisticModel {
                weights,
                bias,
                l2,
                train_prevalence,
                iterations: 0,
                grad_norm: f64::NAN,
                converged: true,
            },
        })
    }
}
