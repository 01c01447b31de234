//! Parallel Spanish↔LSE corpus.
//!
//! The on-disk format is UTF-8 text with one pair per line:
//! `source<TAB>gloss gloss ...`. Blank lines and lines starting with `#` are
//! ignored. A trailing ellipsis on the source side (`…` or `...`) is stripped
//! at load time since it carries no gloss content.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// The 39 training pairs shipped with the crate.
pub const DEFAULT_CORPUS: &str = include_str!("../../../data/lse_corpus.tsv");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("empty corpus")]
    Empty,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("duplicate pair {0}")]
    Duplicate(String),
    #[error("invalid pair: {0}")]
    InvalidPair(String),
    #[error("split needs at least 2 pairs, corpus has {0}")]
    TooSmall(usize),
    #[error("validation fraction {0} must lie in [0, 1)")]
    BadFraction(f64),
    #[error("validation fraction {fraction} leaves no training pairs out of {total}")]
    EmptyTrain { fraction: f64, total: usize },
}

/// One sentence and its gloss sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CorpusPair {
    source: String,
    target: Vec<String>,
}

impl CorpusPair {
    pub fn new<S: Into<String>>(source: S, target: Vec<String>) -> Result<Self, CorpusError> {
        let source = source.into().trim().to_string();
        if source.is_empty() {
            return Err(CorpusError::InvalidPair("empty source".into()));
        }
        if target.is_empty() {
            return Err(CorpusError::InvalidPair(format!("empty target for {source:?}")));
        }
        if let Some(bad) = target
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(CorpusError::InvalidPair(format!("bad gloss token {bad:?}")));
        }
        Ok(Self { source, target })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn target(&self) -> &[String] {
        &self.target
    }
}

impl fmt::Display for CorpusPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.source, self.target.join(" "))
    }
}

/// Ordered list of unique pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<CorpusPair>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<CorpusPair>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for p in &pairs {
            if !seen.insert(p) {
                return Err(CorpusError::Duplicate(p.to_string()));
            }
        }
        Ok(Self { pairs })
    }

    /// The Appendix-style default corpus compiled into the crate.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_CORPUS).expect("shipped corpus is valid")
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (src, tgt) = line.split_once('\t').ok_or_else(|| CorpusError::Malformed {
                line: line_no,
                reason: "missing tab separator".into(),
            })?;
            let src = strip_ellipsis(src.trim());
            if src.is_empty() {
                return Err(CorpusError::Malformed {
                    line: line_no,
                    reason: "empty source side".into(),
                });
            }
            let target: Vec<String> = tgt.split_whitespace().map(str::to_string).collect();
            if target.is_empty() {
                return Err(CorpusError::Malformed {
                    line: line_no,
                    reason: "empty target side".into(),
                });
            }
            pairs.push(CorpusPair::new(src, target).map_err(|e| CorpusError::Malformed {
                line: line_no,
                reason: e.to_string(),
            })?);
        }
        if pairs.is_empty() {
            return Err(CorpusError::Empty);
        }
        Self::new(pairs)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Serializes back into the TSV layout accepted by [`ParallelCorpus::parse`].
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }

    pub fn pairs(&self) -> &[CorpusPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CorpusPair> {
        self.pairs.iter()
    }

    /// Splits into `(train, validation)`.
    ///
    /// Pair indices are permuted with a ChaCha8 generator seeded by `seed`; the
    /// first `round(val_fraction * n)` permuted indices form the validation
    /// set. Both halves keep the original file order.
    pub fn split_train_val(
        &self,
        val_fraction: f64,
        seed: u64,
    ) -> Result<(ParallelCorpus, ParallelCorpus), CorpusError> {
        let n = self.pairs.len();
        if n < 2 {
            return Err(CorpusError::TooSmall(n));
        }
        if !(0.0..1.0).contains(&val_fraction) {
            return Err(CorpusError::BadFraction(val_fraction));
        }
        let n_val = (val_fraction * n as f64).round() as usize;
        if n_val >= n {
            return Err(CorpusError::EmptyTrain {
                fraction: val_fraction,
                total: n,
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut is_val = vec![false; n];
        for &i in &order[..n_val] {
            is_val[i] = true;
        }
        let (mut train, mut val) = (Vec::new(), Vec::new());
        for (p, v) in self.pairs.iter().zip(is_val) {
            if v {
                val.push(p.clone());
            } else {
                train.push(p.clone());
            }
        }
        Ok((ParallelCorpus { pairs: train }, ParallelCorpus { pairs: val }))
    }
}

impl<'a> IntoIterator for &'a ParallelCorpus {
    type Item = &'a CorpusPair;
    type IntoIter = std::slice::Iter<'a, CorpusPair>;

    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter()
    }
}

fn strip_ellipsis(s: &str) -> &str {
    s.trim_end_matches(['…', '.']).trim_end()
}
