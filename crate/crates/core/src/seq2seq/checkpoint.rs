//! Plain-text model checkpoints.
//!
//! ```text
//! signbot-seq2seq
//! version 1
//! n_hidden 256
//! output_activation identity|tanh
//! reverse_source 0|1
//! max_decode_len 12
//! vocab source <count>
//! <one token per line>
//! vocab target <count>
//! <one token per line>
//! tensor <name> <rows> <cols>
//! <rows lines of space-separated values>
//! ...
//! end
//! ```
//!
//! Tensors appear in the order `encoder.*`, `decoder.*`, `head.*`, each LSTM
//! as `w_c w_u w_f w_o b_c b_u b_f b_o` (biases as `n × 1`). Values use the
//! shortest decimal form that parses back to the same `f64`, so a
//! save/load round trip is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::Seq2SeqModel;
use crate::rnn::{LstmParams, Matrix, OutputActivation, SoftmaxHead};
use crate::tokenizer::Vocabulary;

pub const CHECKPOINT_MAGIC: &str = "signbot-seq2seq";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("checkpoint line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("inconsistent checkpoint: {0}")]
    Invalid(String),
}

const LSTM_TENSORS: [&str; 8] = ["w_c", "w_u", "w_f", "w_o", "b_c", "b_u", "b_f", "b_o"];

fn write_tensor(out: &mut String, name: &str, rows: usize, cols: usize, data: &[f64]) {
    let _ = writeln!(out, "tensor {name} {rows} {cols}");
    for r in 0..rows {
        let row: Vec<String> = data[r * cols..(r + 1) * cols].iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

fn write_lstm(out: &mut String, prefix: &str, p: &LstmParams) {
    let (rows, cols) = p.w_c.shape();
    for (name, t) in LSTM_TENSORS.iter().zip(p.tensors()) {
        let c = if name.starts_with('w') { cols } else { 1 };
        write_tensor(out, &format!("{prefix}.{name}"), rows, c, t);
    }
}

fn write_vocab(out: &mut String, side: &str, v: &Vocabulary) {
    let _ = writeln!(out, "vocab {side} {}", v.len());
    for t in v.tokens() {
        out.push_str(t);
        out.push('\n');
    }
}

impl Seq2SeqModel {
    pub fn to_checkpoint(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{CHECKPOINT_MAGIC}");
        let _ = writeln!(out, "version {CHECKPOINT_VERSION}");
        let _ = writeln!(out, "n_hidden {}", self.n_hidden());
        let act = match self.encoder.output {
            OutputActivation::Identity => "identity",
            OutputActivation::Tanh => "tanh",
        };
        let _ = writeln!(out, "output_activation {act}");
        let _ = writeln!(out, "reverse_source {}", u8::from(self.reverse_source));
        let _ = writeln!(out, "max_decode_len {}", self.max_decode_len);
        write_vocab(&mut out, "source", &self.source_vocab);
        write_vocab(&mut out, "target", &self.target_vocab);
        write_lstm(&mut out, "encoder", &self.encoder);
        write_lstm(&mut out, "decoder", &self.decoder);
        let (r, c) = self.head.w_y.shape();
        write_tensor(&mut out, "head.w_y", r, c, self.head.w_y.as_slice());
        write_tensor(&mut out, "head.b_y", r, 1, &self.head.b_y);
        out.push_str("end\n");
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        crate::fsutil::write_atomic(path, self.to_checkpoint().as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Self::from_checkpoint(&std::fs::read_to_string(path)?)
    }

    pub fn from_checkpoint(text: &str) -> Result<Self, CheckpointError> {
        let mut r = Reader {
            lines: text.lines().enumerate(),
            line: 0,
        };
        if r.next()? != CHECKPOINT_MAGIC {
            return Err(r.err("not a signbot checkpoint"));
        }
        let version: u32 = r.field("version")?;
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(version));
        }
        let n_hidden: usize = r.field("n_hidden")?;
        let output = match r.field::<String>("output_activation")?.as_str() {
            "identity" => OutputActivation::Identity,
            "tanh" => OutputActivation::Tanh,
            other => return Err(r.err(&format!("unknown output activation {other}"))),
        };
        let reverse_source = r.field::<u8>("reverse_source")? != 0;
        let max_decode_len: usize = r.field("max_decode_len")?;
        let source_vocab = r.vocab("source")?;
        let target_vocab = r.vocab("target")?;
        let mut encoder = r.lstm("encoder", n_hidden, source_vocab.len())?;
        let mut decoder = r.lstm("decoder", n_hidden, target_vocab.len())?;
        encoder.output = output;
        decoder.output = output;
        let w_y = r.tensor("head.w_y", target_vocab.len(), n_hidden)?;
        let b_y = r.tensor("head.b_y", target_vocab.len(), 1)?;
        if r.next()? != "end" {
            return Err(r.err("expected end marker"));
        }
        let model = Seq2SeqModel {
            encoder,
            decoder,
            head: SoftmaxHead {
                w_y: Matrix::from_vec(target_vocab.len(), n_hidden, w_y),
                b_y,
            },
            source_vocab,
            target_vocab,
            reverse_source,
            max_decode_len,
        };
        model.validate().map_err(|e| CheckpointError::Invalid(e.to_string()))?;
        Ok(model)
    }
}

struct Reader<'a, I: Iterator<Item = (usize, &'a str)>> {
    lines: I,
    line: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Reader<'a, I> {
    fn err(&self, reason: &str) -> CheckpointError {
        CheckpointError::Parse {
            line: self.line,
            reason: reason.to_string(),
        }
    }

    fn next(&mut self) -> Result<&'a str, CheckpointError> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CheckpointError> {
        let line = self.next()?;
        let mut it = line.split_whitespace();
        if it.next() != Some(key) {
            return Err(self.err(&format!("expected `{key}`")));
        }
        it.next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| self.err(&format!("bad value for `{key}`")))
    }

    fn vocab(&mut self, side: &str) -> Result<Vocabulary, CheckpointError> {
        let header = self.next()?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let count = match parts.as_slice() {
            ["vocab", s, n] if *s == side => n.parse::<usize>().map_err(|_| self.err("bad vocab size"))?,
            _ => return Err(self.err(&format!("expected `vocab {side}`"))),
        };
        let mut text = String::new();
        for _ in 0..count {
            text.push_str(self.next()?);
            text.push('\n');
        }
        Vocabulary::from_text(&text).map_err(|e| self.err(&e.to_string()))
    }

    fn tensor(&mut self, name: &str, rows: usize, cols: usize) -> Result<Vec<f64>, CheckpointError> {
        let header = self.next()?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let expected = [rows.to_string(), cols.to_string()];
        match parts.as_slice() {
            ["tensor", n, r, c] if *n == name && *r == expected[0] && *c == expected[1] => {}
            _ => return Err(self.err(&format!("expected `tensor {name} {rows} {cols}`"))),
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = self.next()?;
            let before = data.len();
            for tok in line.split_whitespace() {
                data.push(tok.parse::<f64>().map_err(|_| self.err("bad number"))?);
            }
            if data.len() - before != cols {
                return Err(self.err(&format!("row of {name} has wrong length")));
            }
        }
        Ok(data)
    }

    fn lstm(&mut self, prefix: &str, n_hidden: usize, n_input: usize) -> Result<LstmParams, CheckpointError> {
        let mut p = LstmParams::zeros(n_input, n_hidden);
        let cols = n_hidden + n_input;
        for (i, name) in LSTM_TENSORS.iter().enumerate() {
            let c = if name.starts_with('w') { cols } else { 1 };
            let data = self.tensor(&format!("{prefix}.{name}"), n_hidden, c)?;
            p.tensors_mut()[i].copy_from_slice(&data);
        }
        Ok(p)
    }
}
