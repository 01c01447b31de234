//! Word-level tokenization and vocabularies.
//!
//! Source sentences are lowercased and split on anything that is not a letter
//! or digit. The Spanish marks `¿ ? ¡ !` become tokens of their own; commas,
//! periods, ellipses and other punctuation are dropped. Gloss tokens on the
//! target side are used as written.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::corpus::ParallelCorpus;

#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("token index {index} out of range for vocabulary of size {size}")]
    OutOfRange { index: usize, size: usize },
    #[error("vocabulary file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reserved tokens, in index order.
pub const SPECIALS: [&str; 8] = ["<pad>", "<sos>", "<eos>", "<unk>", "¿", "?", "¡", "!"];

pub const PAD: usize = 0;
pub const SOS: usize = 1;
pub const EOS: usize = 2;
pub const UNK: usize = 3;
pub const OPEN_QUESTION: usize = 4;
pub const CLOSE_QUESTION: usize = 5;
pub const OPEN_EXCLAMATION: usize = 6;
pub const CLOSE_EXCLAMATION: usize = 7;

const MARKS: [char; 4] = ['¿', '?', '¡', '!'];

/// Which side of the corpus a vocabulary is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Splits a sentence into lowercase word tokens plus standalone `¿ ? ¡ !`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            word.extend(ch.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if MARKS.contains(&ch) {
            out.push(ch.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// Sequence of vocabulary indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSequence(pub Vec<usize>);

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// One-hot vectors, one per token.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotSequence {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl OneHotSequence {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Index of the hot entry of every vector.
    pub fn hot_indices(&self) -> TokenSequence {
        TokenSequence(
            self.vectors
                .iter()
                .map(|v| v.iter().position(|&x| x == 1.0).expect("one-hot vector"))
                .collect(),
        )
    }
}

/// Bidirectional token ↔ index map. Indices are dense and the reserved
/// [`SPECIALS`] occupy `0..8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    index_to_token: Vec<String>,
    token_to_index: HashMap<String, usize>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::from_tokens(std::iter::empty::<String>())
    }
}

impl Vocabulary {
    /// Specials followed by `tokens` in first-occurrence order.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Vocabulary {
            index_to_token: Vec::new(),
            token_to_index: HashMap::new(),
        };
        for s in SPECIALS {
            v.push(s.to_string());
        }
        for t in tokens {
            v.push(t.into());
        }
        v
    }

    fn push(&mut self, token: String) {
        if !self.token_to_index.contains_key(&token) {
            self.token_to_index.insert(token.clone(), self.index_to_token.len());
            self.index_to_token.push(token);
        }
    }

    pub fn build(corpus: &ParallelCorpus, side: Side) -> Self {
        match side {
            Side::Source => Self::from_tokens(corpus.iter().flat_map(|p| tokenize(p.source()))),
            Side::Target => Self::from_tokens(corpus.iter().flat_map(|p| p.target().iter().cloned())),
        }
    }

    pub fn len(&self) -> usize {
        self.index_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_to_token.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.token_to_index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.index_to_token.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.index_to_token
    }

    /// Maps tokens to indices; unknown tokens become [`UNK`].
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> TokenSequence {
        TokenSequence(
            tokens
                .iter()
                .map(|t| self.index_of(t.as_ref()).unwrap_or(UNK))
                .collect(),
        )
    }

    /// Lowercases and tokenizes `text`, then encodes it.
    pub fn encode_text(&self, text: &str) -> TokenSequence {
        self.encode(&tokenize(text))
    }

    pub fn encode_one_hot(&self, tokens: &TokenSequence) -> OneHotSequence {
        let dim = self.len();
        let vectors = tokens
            .0
            .iter()
            .map(|&i| {
                let mut v = vec![0.0; dim];
                v[if i < dim { i } else { UNK }] = 1.0;
                v
            })
            .collect();
        OneHotSequence { dim, vectors }
    }

    /// Inverse lookup. Framing specials and `<unk>` are omitted; the four
    /// punctuation tokens are kept.
    pub fn decode(&self, indices: &TokenSequence) -> Result<Vec<String>, TokenizerError> {
        let mut out = Vec::new();
        for &i in &indices.0 {
            let tok = self.token(i).ok_or(TokenizerError::OutOfRange {
                index: i,
                size: self.len(),
            })?;
            if i > UNK {
                out.push(tok.to_string());
            }
        }
        Ok(out)
    }

    /// One token per line; the line number is the index.
    pub fn to_text(&self) -> String {
        let mut s = self.index_to_token.join("\n");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self, TokenizerError> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() < SPECIALS.len() || lines[..SPECIALS.len()] != SPECIALS {
            return Err(TokenizerError::Format(
                "reserved tokens missing from the first lines".into(),
            ));
        }
        let v = Self::from_tokens(lines[SPECIALS.len()..].iter().copied());
        if v.len() != lines.len() {
            return Err(TokenizerError::Format("duplicate token".into()));
        }
        Ok(v)
    }

    pub fn save(&self, path: &Path) -> Result<(), TokenizerError> {
        crate::fsutil::write_atomic(path, self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TokenizerError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn question_marks_are_tokens() {
        assert_eq!(toks("¿Qué tal?"), ["¿", "qué", "tal", "?"]);
    }

    #[test]
    fn empty_text() {
        assert!(toks("").is_empty());
        assert!(toks(" ,. …").is_empty());
    }

    #[test]
    fn commas_are_dropped() {
        assert_eq!(
            toks("Venga, levántate, que tienes que ir al colegio"),
            ["venga", "levántate", "que", "tienes", "que", "ir", "al", "colegio"]
        );
    }

    #[test]
    fn exclamations_and_ellipsis() {
        assert_eq!(
            toks("¡Cuidado! Eso puede romperse!"),
            ["¡", "cuidado", "!", "eso", "puede", "romperse", "!"]
        );
        assert_eq!(toks("Me llamo…"), ["me", "llamo"]);
        assert_eq!(toks("Yo tengo X años."), ["yo", "tengo", "x", "años"]);
    }

    #[test]
    fn vocab_from_single_pair() {
        let c = ParallelCorpus::parse("a\tb").unwrap();
        let v = Vocabulary::build(&c, Side::Source);
        assert_eq!(v.len(), SPECIALS.len() + 1);
        assert_eq!(v.index_of("a"), Some(SPECIALS.len()));
        let t = Vocabulary::build(&c, Side::Target);
        assert_eq!(t.index_of("b"), Some(SPECIALS.len()));
    }

    #[test]
    fn builtin_vocab_sizes() {
        // Counted by enumerating data/lse_corpus.tsv with the rules above:
        // 77 distinct source words, 48 distinct glosses.
        let c = ParallelCorpus::builtin();
        assert_eq!(Vocabulary::build(&c, Side::Source).len(), 8 + 77);
        assert_eq!(Vocabulary::build(&c, Side::Target).len(), 8 + 48);
    }

    #[test]
    fn vocab_is_deterministic() {
        let c = ParallelCorpus::builtin();
        assert_eq!(Vocabulary::build(&c, Side::Source), Vocabulary::build(&c, Side::Source));
    }

    #[test]
    fn one_hot_definition() {
        let v = Vocabulary::from_tokens(Vec::<String>::new());
        let oh = v.encode_one_hot(&TokenSequence(vec![2]));
        let mut expect = vec![0.0; v.len()];
        expect[2] = 1.0;
        assert_eq!(oh.vectors(), [expect]);
        assert!(v.encode_one_hot(&TokenSequence(vec![])).is_empty());
    }

    #[test]
    fn unknown_word_is_unk() {
        let v = Vocabulary::build(&ParallelCorpus::builtin(), Side::Source);
        let seq = v.encode_text("ornitorrinco");
        assert_eq!(seq.0, [UNK]);
        assert_eq!(v.encode_one_hot(&seq).hot_indices().0, [UNK]);
    }

    #[test]
    fn decode_skips_framing() {
        let v = Vocabulary::from_tokens(["Tú"]);
        assert!(v.decode(&TokenSequence(vec![EOS])).unwrap().is_empty());
        assert_eq!(
            v.decode(&TokenSequence(vec![SOS, 8, CLOSE_QUESTION, EOS])).unwrap(),
            ["Tú", "?"]
        );
        let err = v.decode(&TokenSequence(vec![v.len() + 1])).unwrap_err();
        assert!(matches!(err, TokenizerError::OutOfRange { .. }));
    }

    #[test]
    fn target_round_trip_on_builtin() {
        let c = ParallelCorpus::builtin();
        let v = Vocabulary::build(&c, Side::Target);
        for p in &c {
            let seq = v.encode(p.target());
            let oh = v.encode_one_hot(&seq);
            assert_eq!(v.decode(&oh.hot_indices()).unwrap(), p.target());
        }
    }

    #[test]
    fn text_file_round_trip() {
        let v = Vocabulary::build(&ParallelCorpus::builtin(), Side::Target);
        assert_eq!(Vocabulary::from_text(&v.to_text()).unwrap(), v);
        assert!(Vocabulary::from_text("a\nb\n").is_err());
    }
}
