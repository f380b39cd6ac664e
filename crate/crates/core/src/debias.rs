//! Removing a learned bias dimension and reporting word bias before and after.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::densray::{complement, densray, project, BinarySignal, Rotation, WeightMode};
use crate::embedding::{cosine, Embeddings};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Debiased {
    pub rotation: Rotation,
    /// `E′ = E·Q`.
    pub rotated: Embeddings,
    /// `E′` without its first `k_drop` columns; rows are not renormalized.
    pub complement: Embeddings,
}

/// Rotates `emb` with DensRay on `signal` and drops the first `k_drop`
/// columns. `k_drop = 0` leaves the rotated space intact.
pub fn debias(
    emb: &Embeddings,
    signal: &BinarySignal,
    k_drop: usize,
    weights: WeightMode,
) -> Result<Debiased> {
    if k_drop >= emb.dim() {
        return Err(Error::InvalidArgument(format!(
            "cannot drop {k_drop} of {} dimensions",
            emb.dim()
        )));
    }
    let rotation = densray(emb, &signal.clone().into(), weights)?;
    let rotated = project(emb, &rotation)?;
    let complement = complement(&rotated, k_drop)?;
    Ok(Debiased {
        rotation,
        rotated,
        complement,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasRow {
    pub token: String,
    pub sim_a: f64,
    pub sim_b: f64,
    /// `sim_a − sim_b`.
    pub bias: f64,
}

/// Bias of every scored word in one space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceBias {
    pub space: String,
    /// In word-list order.
    pub rows: Vec<BiasRow>,
}

impl SpaceBias {
    fn sorted(&self) -> Vec<&BiasRow> {
        let mut rows: Vec<&BiasRow> = self.rows.iter().collect();
        // stable: equal biases keep word-list order
        rows.sort_by(|a, b| b.bias.total_cmp(&a.bias));
        rows
    }

    /// The `k` largest biases, descending.
    pub fn top(&self, k: usize) -> Vec<&BiasRow> {
        self.sorted().into_iter().take(k).collect()
    }

    /// The `k` smallest biases, listed in descending order.
    pub fn bottom(&self, k: usize) -> Vec<&BiasRow> {
        let sorted = self.sorted();
        let start = sorted.len().saturating_sub(k);
        sorted[start..].to_vec()
    }

    pub fn mean_abs_bias(&self) -> f64 {
        self.rows.iter().map(|r| r.bias.abs()).sum::<f64>() / self.rows.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub probes: (String, String),
    pub k: usize,
    pub original: SpaceBias,
    pub complement: SpaceBias,
    /// Word-list tokens missing from the vocabulary.
    pub skipped: Vec<String>,
}

fn space_bias(
    emb: &Embeddings,
    name: &str,
    probes: (&str, &str),
    tokens: &[&str],
) -> Result<SpaceBias> {
    let a = emb
        .vector(probes.0)
        .ok_or_else(|| Error::UnknownToken(probes.0.to_string()))?;
    let b = emb
        .vector(probes.1)
        .ok_or_else(|| Error::UnknownToken(probes.1.to_string()))?;
    let rows = tokens
        .iter()
        .map(|t| {
            let e = emb.vector(t).expect("filtered to vocabulary");
            let sim_a = cosine(e, a)?;
            let sim_b = cosine(e, b)?;
            Ok(BiasRow {
                token: t.to_string(),
                sim_a,
                sim_b,
                bias: sim_a - sim_b,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SpaceBias {
        space: name.to_string(),
        rows,
    })
}

/// Cosine of each word-list token to the two probes in both spaces.
pub fn bias_report(
    original: &Embeddings,
    complement: &Embeddings,
    probes: (&str, &str),
    wordlist: &[String],
    k: usize,
) -> Result<BiasReport> {
    if original.vocab().words() != complement.vocab().words() {
        return Err(Error::InvalidArgument(
            "original and complement spaces must share a vocabulary".into(),
        ));
    }
    let (found, skipped): (Vec<&String>, Vec<&String>) =
        wordlist.iter().partition(|t| original.vocab().contains(t));
    if found.len() < k.max(1) {
        return Err(Error::Empty(format!(
            "word list within the vocabulary ({} found, {} required)",
            found.len(),
            k.max(1)
        )));
    }
    let tokens: Vec<&str> = found.iter().map(|s| s.as_str()).collect();
    Ok(BiasReport {
        probes: (probes.0.to_string(), probes.1.to_string()),
        k,
        original: space_bias(original, "original", probes, &tokens)?,
        complement: space_bias(complement, "complement", probes, &tokens)?,
        skipped: skipped.into_iter().cloned().collect(),
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl BiasReport {
    /// `token,space,sim_A,sim_B,bias` for every word in both spaces.
    pub fn write_scatter_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "token,space,sim_A,sim_B,bias")?;
        for space in [&self.original, &self.complement] {
            for r in &space.rows {
                writeln!(
                    out,
                    "{},{},{:.6},{:.6},{:.6}",
                    csv_field(&r.token),
                    space.space,
                    r.sim_a,
                    r.sim_b,
                    r.bias
                )?;
            }
        }
        out.flush()
    }

    /// Top-k and bottom-k slices per space, then the mean absolute bias.
    pub fn write_summary_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "space\tslice\trank\ttoken\tsim_{}\tsim_{}\tbias",
            self.probes.0, self.probes.1
        )?;
        for space in [&self.original, &self.complement] {
            for (slice, rows) in [("top", space.top(self.k)), ("bottom", space.bottom(self.k))] {
                for (i, r) in rows.iter().enumerate() {
                    writeln!(
                        out,
                        "{}\t{slice}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}",
                        space.space,
                        i + 1,
                        r.token,
                        r.sim_a,
                        r.sim_b,
                        r.bias
                    )?;
                }
            }
        }
        for space in [&self.original, &self.complement] {
            writeln!(
                out,
                "{}\tmean-abs\t-\t-\t-\t-\t{:.4}",
                space.space,
                space.mean_abs_bias()
            )?;
        }
        out.flush()
    }
}

/// Parses a JSON word list: an array of strings, or of arrays whose first
/// element is a string. Order is kept and duplicates dropped.
pub fn parse_wordlist_json(text: &str) -> Result<Vec<String>> {
    let value: Value = serde_json::from_str(text)?;
    let items = value
        .as_array()
        .ok_or_else(|| Error::InvalidArgument("word list must be a JSON array".into()))?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let token = match item {
            Value::String(s) => Some(s.as_str()),
            Value::Array(a) => a.first().and_then(Value::as_str),
            _ => None,
        }
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "word list element {i} is neither a string nor an array starting with one"
            ))
        })?;
        if seen.insert(token.to_string()) {
            out.push(token.to_string());
        }
    }
    if out.is_empty() {
        return Err(Error::Empty("word list".into()));
    }
    Ok(out)
}

pub fn load_wordlist_json(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_wordlist_json(&text)
}
