//! Word-embedding storage, word2vec text I/O, cosine similarity and
//! nearest-neighbour search.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};

/// Ordered list of unique tokens with a reverse index.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(words: Vec<String>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Empty("vocabulary".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::DuplicateToken(w.clone()));
            }
        }
        Ok(Vocabulary { words, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// An `n × d` matrix of finite reals, one row per word.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    data: Matrix,
    normalized: bool,
}

impl EmbeddingMatrix {
    pub fn new(data: Matrix) -> Result<Self> {
        if !data.is_finite() {
            return Err(Error::NonFinite("embedding matrix".into()));
        }
        Ok(EmbeddingMatrix {
            data,
            normalized: false,
        })
    }

    /// Wraps a matrix whose rows are known to be unit length.
    pub(crate) fn new_normalized(data: Matrix) -> Self {
        EmbeddingMatrix {
            data,
            normalized: true,
        }
    }

    pub fn rows(&self) -> usize {
        self.data.rows()
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

/// A vocabulary paired with its embedding matrix.
///
/// The vocabulary is shared so that rotated or truncated copies of a space
/// do not duplicate the token table.
#[derive(Debug, Clone)]
pub struct Embeddings {
    vocab: Arc<Vocabulary>,
    matrix: EmbeddingMatrix,
}

impl Embeddings {
    pub fn new(vocab: Vocabulary, matrix: EmbeddingMatrix) -> Result<Self> {
        Self::with_shared_vocab(Arc::new(vocab), matrix)
    }

    pub fn with_shared_vocab(vocab: Arc<Vocabulary>, matrix: EmbeddingMatrix) -> Result<Self> {
        if vocab.len() != matrix.rows() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                got: matrix.rows(),
            });
        }
        Ok(Embeddings { vocab, matrix })
    }

    /// Convenience constructor from `(token, vector)` rows.
    pub fn from_pairs<S: AsRef<str>, V: AsRef<[f64]>>(rows: &[(S, V)]) -> Result<Self> {
        let words = rows.iter().map(|(w, _)| w.as_ref().to_string()).collect();
        let vecs: Vec<&[f64]> = rows.iter().map(|(_, v)| v.as_ref()).collect();
        if let Some(first) = vecs.first() {
            for v in &vecs {
                if v.len() != first.len() {
                    return Err(Error::DimensionMismatch {
                        expected: first.len(),
                        got: v.len(),
                    });
                }
            }
        }
        let vocab = Vocabulary::new(words)?;
        let matrix = EmbeddingMatrix::new(Matrix::from_rows(&vecs))?;
        Embeddings::new(vocab, matrix)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn shared_vocab(&self) -> Arc<Vocabulary> {
        Arc::clone(&self.vocab)
    }

    pub fn matrix(&self) -> &EmbeddingMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn index(&self, token: &str) -> Result<usize> {
        self.vocab
            .get(token)
            .ok_or_else(|| Error::UnknownToken(token.to_string()))
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab.get(token).map(|i| self.matrix.row(i))
    }

    /// Same vocabulary, different matrix (rows must line up).
    pub fn with_matrix(&self, matrix: EmbeddingMatrix) -> Result<Self> {
        Self::with_shared_vocab(self.shared_vocab(), matrix)
    }

    /// Rows scaled to unit length; see [`normalize_rows`].
    pub fn normalized(self) -> Result<Self> {
        let matrix = normalize_rows(self.matrix)?;
        Ok(Embeddings {
            vocab: self.vocab,
            matrix,
        })
    }
}

/// Reads the word2vec text format from `reader`.
///
/// The first line is `<n> <d>`; every following line is a token and `d`
/// values separated by single spaces. A trailing space and `\r` are
/// tolerated. When `max_rows` is given, reading stops after that many rows.
pub fn read_word2vec_text<R: BufRead>(reader: R, max_rows: Option<usize>) -> Result<Embeddings> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io("<input>", e))?,
        None => return Err(Error::parse(1, "missing header line")),
    };
    let header = strip_line_end(&header);
    let mut fields = header.split(' ');
    let n: usize = parse_header_field(fields.next())?;
    let d: usize = parse_header_field(fields.next())?;
    if fields.next().is_some() {
        return Err(Error::parse(1, "header must be `<n> <d>`"));
    }
    if n == 0 || d == 0 {
        return Err(Error::parse(1, "header declares an empty matrix"));
    }

    let wanted = max_rows.map_or(n, |m| m.min(n));
    let mut words = Vec::with_capacity(wanted);
    let mut data = Vec::with_capacity(wanted * d);
    let mut seen = HashSet::with_capacity(wanted);

    for (offset, line) in lines.enumerate() {
        if words.len() == wanted {
            break;
        }
        let line_no = offset + 2;
        let line = line.map_err(|e| Error::io("<input>", e))?;
        let line = strip_line_end(&line);
        let mut parts = line.split(' ');
        let token = parts.next().unwrap_or_default();
        if token.is_empty() {
            return Err(Error::parse(line_no, "missing token"));
        }
        let start = data.len();
        for field in parts {
            let value: f64 = field
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid number `{field}`")))?;
            if !value.is_finite() {
                return Err(Error::NonFinite(format!("row `{token}` (line {line_no})")));
            }
            data.push(value);
        }
        let got = data.len() - start;
        if got != d {
            return Err(Error::parse(
                line_no,
                format!(
                    "expected {d} values after token `{token}`, found {got} \
                     (tokens may not contain spaces)"
                ),
            ));
        }
        if data[start..].iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroRow(words.len()));
        }
        if !seen.insert(token.to_string()) {
            return Err(Error::DuplicateToken(token.to_string()));
        }
        words.push(token.to_string());
    }

    if words.len() < wanted {
        return Err(Error::parse(
            words.len() + 2,
            format!("header promises {n} rows, file ends after {}", words.len()),
        ));
    }

    let vocab = Vocabulary::new(words)?;
    let matrix = EmbeddingMatrix::new(Matrix::from_vec(wanted, d, data))?;
    Embeddings::new(vocab, matrix)
}

fn strip_line_end(line: &str) -> &str {
    let line = line.strip_suffix('\r').unwrap_or(line);
    line.strip_suffix(' ').unwrap_or(line)
}

fn parse_header_field(field: Option<&str>) -> Result<usize> {
    field
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::parse(1, "header must be `<n> <d>`"))
}

/// Loads a word2vec text file; see [`read_word2vec_text`].
pub fn load_word2vec_text(path: impl AsRef<Path>, max_rows: Option<usize>) -> Result<Embeddings> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_word2vec_text(BufReader::new(file), max_rows)
}

/// Writes the word2vec text format. Values use the shortest representation
/// that round-trips exactly.
pub fn write_word2vec_text<W: Write>(mut out: W, emb: &Embeddings) -> std::io::Result<()> {
    writeln!(out, "{} {}", emb.len(), emb.dim())?;
    for (i, word) in emb.vocab().words().iter().enumerate() {
        out.write_all(word.as_bytes())?;
        for v in emb.matrix().row(i) {
            write!(out, " {v}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_word2vec_text(path: impl AsRef<Path>, emb: &Embeddings) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_word2vec_text(BufWriter::new(file), emb).map_err(|e| Error::io(path, e))
}

/// Scales every row to unit Euclidean length.
pub fn normalize_rows(matrix: EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    let mut data = matrix.into_matrix();
    for i in 0..data.rows() {
        let row = data.row_mut(i);
        let n = norm(row);
        if n == 0.0 {
            return Err(Error::ZeroRow(i));
        }
        if n != 1.0 {
            row.iter_mut().for_each(|v| *v /= n);
        }
    }
    Ok(EmbeddingMatrix::new_normalized(data))
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// The `k` rows most similar to `query`, most similar first.
///
/// Ties are broken by ascending vocabulary index. Tokens in `exclude` are
/// never returned.
pub fn nearest(
    emb: &Embeddings,
    query: &[f64],
    exclude: &[&str],
    k: usize,
) -> Result<Vec<(String, f64)>> {
    if !emb.matrix().is_normalized() {
        return Err(Error::InvalidArgument(
            "nearest requires row-normalized embeddings".into(),
        ));
    }
    if query.len() != emb.dim() {
        return Err(Error::DimensionMismatch {
            expected: emb.dim(),
            got: query.len(),
        });
    }
    let excluded: HashSet<usize> = exclude.iter().filter_map(|t| emb.vocab().get(t)).collect();
    let available = emb.len() - excluded.len();
    if k > available {
        return Err(Error::InvalidArgument(format!(
            "requested {k} neighbours but only {available} candidates remain"
        )));
    }
    let mut scored = Vec::with_capacity(available);
    for i in 0..emb.len() {
        if excluded.contains(&i) {
            continue;
        }
        scored.push((i, cosine(query, emb.matrix().row(i))?));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored
        .into_iter()
        .take(k)
        .map(|(i, s)| (emb.vocab().word(i).to_string(), s))
        .collect())
}
