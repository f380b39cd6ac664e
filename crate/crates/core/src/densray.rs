//! DensRay: closed-form interpretable rotations.
//!
//! Given words labelled by a linguistic signal, DensRay collects the
//! difference vectors `d_vw = e_v - e_w` of all ordered word pairs and forms
//!
//! ```text
//! A = α≠ Σ_{l(v)≠l(w)} d_vw d_vwᵀ  −  α= Σ_{l(v)=l(w)} d_vw d_vwᵀ
//! ```
//!
//! The unit `q` maximizing `qᵀAq` is the top eigenvector of `A`; the full
//! eigenbasis, ordered by eigenvalue, is an orthogonal rotation whose first
//! column is the interpretable direction. Continuous scores use the weights
//! `−l(v)l(w)` in place of the two class sums.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::eigen::{canonical_sign, eig_symmetric, SymmetricMatrix};
use crate::embedding::{EmbeddingMatrix, Embeddings};
use crate::error::{Error, Result};
use crate::linalg::{orthogonality_error, Matrix};

/// Orthogonality tolerance for [`Rotation`] matrices.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-8;

/// Two disjoint, non-empty classes of tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySignal {
    pub name: String,
    positives: Vec<String>,
    negatives: Vec<String>,
}

impl BinarySignal {
    /// Repeated tokens within a class are collapsed, first occurrence kept.
    pub fn new(
        name: impl Into<String>,
        positives: impl IntoIterator<Item = impl Into<String>>,
        negatives: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self> {
        let positives = dedup_tokens(positives);
        let negatives = dedup_tokens(negatives);
        if positives.is_empty() {
            return Err(Error::Empty("positive class".into()));
        }
        if negatives.is_empty() {
            return Err(Error::Empty("negative class".into()));
        }
        if let Some(t) = positives.iter().find(|t| negatives.contains(t)) {
            return Err(Error::InvalidArgument(format!(
                "token `{t}` is in both classes"
            )));
        }
        Ok(BinarySignal {
            name: name.into(),
            positives,
            negatives,
        })
    }

    pub fn positives(&self) -> &[String] {
        &self.positives
    }

    pub fn negatives(&self) -> &[String] {
        &self.negatives
    }
}

fn dedup_tokens(tokens: impl IntoIterator<Item = impl Into<String>>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    tokens
        .into_iter()
        .map(Into::into)
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

/// Real-valued scores for a set of tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSignal {
    pub name: String,
    scores: Vec<(String, f64)>,
}

impl ContinuousSignal {
    pub fn new(name: impl Into<String>, scores: Vec<(String, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (t, s) in &scores {
            if !s.is_finite() {
                return Err(Error::NonFinite(format!("score of `{t}`")));
            }
            if !seen.insert(t.as_str()) {
                return Err(Error::DuplicateToken(t.clone()));
            }
        }
        if scores.len() < 2 {
            return Err(Error::InvalidArgument(
                "a continuous signal needs at least 2 labelled words".into(),
            ));
        }
        Ok(ContinuousSignal {
            name: name.into(),
            scores,
        })
    }

    pub fn scores(&self) -> &[(String, f64)] {
        &self.scores
    }

    fn distinct_values(&self) -> usize {
        let mut v: Vec<f64> = self.scores.iter().map(|(_, s)| *s).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Binary(BinarySignal),
    Continuous(ContinuousSignal),
}

impl Signal {
    pub fn name(&self) -> &str {
        match self {
            Signal::Binary(s) => &s.name,
            Signal::Continuous(s) => &s.name,
        }
    }
}

impl From<BinarySignal> for Signal {
    fn from(s: BinarySignal) -> Self {
        Signal::Binary(s)
    }
}

impl From<ContinuousSignal> for Signal {
    fn from(s: ContinuousSignal) -> Self {
        Signal::Continuous(s)
    }
}

/// Weights of the between-class (`α≠`) and within-class (`α=`) sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    Fixed {
        unequal: f64,
        equal: f64,
    },
    /// `α≠ = 1/n≠`, `α= = 1/n=`, counting ordered pairs (self-pairs
    /// included in `n=`).
    Averaged,
}

impl WeightMode {
    pub fn fixed(unequal: f64, equal: f64) -> Result<Self> {
        for w in [unequal, equal] {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidArgument(format!(
                    "class weights must lie in [0, 1], got {w}"
                )));
            }
        }
        Ok(WeightMode::Fixed { unequal, equal })
    }

    fn resolve(self, n_pos: usize, n_neg: usize) -> (f64, f64) {
        match self {
            WeightMode::Fixed { unequal, equal } => (unequal, equal),
            WeightMode::Averaged => {
                let n_unequal = 2 * n_pos * n_neg;
                let n_equal = n_pos * n_pos + n_neg * n_neg;
                (1.0 / n_unequal as f64, 1.0 / n_equal as f64)
            }
        }
    }
}

impl Default for WeightMode {
    fn default() -> Self {
        WeightMode::Fixed {
            unequal: 0.5,
            equal: 0.5,
        }
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    /// `averaged` or `<α≠>,<α=>`.
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("averaged") {
            return Ok(WeightMode::Averaged);
        }
        let parsed: Option<(f64, f64)> = s
            .split_once(',')
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
        match parsed {
            Some((a, b)) => WeightMode::fixed(a, b),
            None => Err(Error::InvalidArgument(format!(
                "weights must be `averaged` or `<a>,<b>`, got `{s}`"
            ))),
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightMode::Fixed { unequal, equal } => write!(f, "{unequal},{equal}"),
            WeightMode::Averaged => f.write_str("averaged"),
        }
    }
}

/// How a rotation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    DensRay,
    Svm,
    Svr,
    LogReg,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::DensRay => "densray",
            Method::Svm => "svm",
            Method::Svr => "svr",
            Method::LogReg => "logreg",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "densray" => Ok(Method::DensRay),
            "svm" => Ok(Method::Svm),
            "svr" => Ok(Method::Svr),
            "logreg" => Ok(Method::LogReg),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// An orthogonal `d × d` matrix whose first column is the interpretable
/// direction.
#[derive(Debug, Clone)]
pub struct Rotation {
    q: Matrix,
    eigenvalues: Option<Vec<f64>>,
    pub method: Method,
    pub signal_name: String,
}

impl Rotation {
    pub fn new(
        q: Matrix,
        eigenvalues: Option<Vec<f64>>,
        method: Method,
        signal_name: impl Into<String>,
    ) -> Result<Self> {
        if q.rows() != q.cols() {
            return Err(Error::DimensionMismatch {
                expected: q.rows(),
                got: q.cols(),
            });
        }
        if !q.is_finite() {
            return Err(Error::NonFinite("rotation".into()));
        }
        let err = orthogonality_error(&q);
        if err > ORTHOGONALITY_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "rotation is not orthogonal (max |QᵀQ - I| = {err:e})"
            )));
        }
        if let Some(ev) = &eigenvalues {
            if method != Method::DensRay {
                return Err(Error::InvalidArgument(
                    "eigenvalues are only defined for densray rotations".into(),
                ));
            }
            if ev.len() != q.rows() {
                return Err(Error::DimensionMismatch {
                    expected: q.rows(),
                    got: ev.len(),
                });
            }
        }
        Ok(Rotation {
            q,
            eigenvalues,
            method,
            signal_name: signal_name.into(),
        })
    }

    pub fn identity(d: usize) -> Self {
        Rotation {
            q: Matrix::identity(d),
            eigenvalues: None,
            method: Method::DensRay,
            signal_name: "identity".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.q
    }

    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.eigenvalues.as_deref()
    }

    /// Column `i` of `Q`.
    pub fn direction(&self, i: usize) -> Vec<f64> {
        self.q.column(i)
    }

    /// Writes the rotation text format:
    ///
    /// ```text
    /// densray <d> <method> <signal_name>
    /// <eigenvalues separated by spaces, or ->
    /// <d rows of Q, d values each>
    /// ```
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "densray {} {} {}",
            self.dim(),
            self.method,
            header_token(&self.signal_name)
        )?;
        match &self.eigenvalues {
            Some(ev) => writeln!(out, "{}", join_floats(ev))?,
            None => writeln!(out, "-")?,
        }
        for row in self.q.row_iter() {
            writeln!(out, "{}", join_floats(row))?;
        }
        out.flush()
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let lines: Vec<String> = reader
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io("<rotation>", e))?;
        let mut lines = lines.iter().map(|l| l.trim_end_matches('\r'));
        let header = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 4 || fields[0] != "densray" {
            return Err(Error::parse(
                1,
                "header must be `densray <d> <method> <signal_name>`",
            ));
        }
        let d: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(1, "invalid dimension"))?;
        let method: Method = fields[2]
            .parse()
            .map_err(|_| Error::parse(1, "invalid method"))?;
        let signal_name = fields[3].to_string();

        let ev_line = lines
            .next()
            .ok_or_else(|| Error::parse(2, "missing eigenvalue line"))?;
        let eigenvalues = if ev_line.trim() == "-" {
            None
        } else {
            let ev = parse_floats(ev_line, 2)?;
            if ev.len() != d {
                return Err(Error::parse(2, format!("expected {d} eigenvalues")));
            }
            Some(ev)
        };

        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            let line = lines
                .next()
                .ok_or_else(|| Error::parse(i + 3, "missing matrix row"))?;
            let row = parse_floats(line, i + 3)?;
            if row.len() != d {
                return Err(Error::parse(i + 3, format!("expected {d} values")));
            }
            data.extend(row);
        }
        Rotation::new(
            Matrix::from_vec(d, d, data),
            eigenvalues,
            method,
            signal_name,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}

pub(crate) fn header_token(name: &str) -> String {
    if name.is_empty() {
        return "-".into();
    }
    name.split_whitespace().collect::<Vec<_>>().join("_")
}

pub(crate) fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn parse_floats(line: &str, line_no: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line_no, format!("invalid number `{f}`")))
        })
        .collect()
}

fn require_normalized(emb: &Embeddings) -> Result<()> {
    if emb.matrix().is_normalized() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "embeddings must be row-normalized".into(),
        ))
    }
}

fn resolve_rows<'a>(emb: &'a Embeddings, tokens: &[String]) -> Result<Vec<&'a [f64]>> {
    tokens
        .iter()
        .map(|t| emb.index(t).map(|i| emb.matrix().row(i)))
        .collect()
}

/// `Σ e eᵀ` and `Σ e` over `rows`.
fn scatter_and_sum(rows: &[&[f64]], d: usize) -> (Matrix, Vec<f64>) {
    let mut s = Matrix::zeros(d, d);
    let mut m = vec![0.0; d];
    for r in rows {
        s.add_outer(1.0, r, r);
        m.iter_mut().zip(r.iter()).for_each(|(a, b)| *a += b);
    }
    (s, m)
}

/// `Σ_{x∈X, y∈Y} (e_x − e_y)(e_x − e_y)ᵀ = |Y| S_X + |X| S_Y − M_X M_Yᵀ − M_Y M_Xᵀ`.
fn pair_scatter(
    (s_x, m_x, n_x): (&Matrix, &[f64], usize),
    (s_y, m_y, n_y): (&Matrix, &[f64], usize),
) -> Matrix {
    let mut out = s_x.clone();
    out.scale(n_y as f64);
    out.add_scaled(n_x as f64, s_y);
    out.add_outer(-1.0, m_x, m_y);
    out.add_outer(-1.0, m_y, m_x);
    out
}

fn binary_matrix(
    pos: &[&[f64]],
    neg: &[&[f64]],
    d: usize,
    weights: WeightMode,
    fast: bool,
) -> Matrix {
    let (a_ne, a_eq) = weights.resolve(pos.len(), neg.len());
    if fast {
        let (s_p, m_p) = scatter_and_sum(pos, d);
        let (s_n, m_n) = scatter_and_sum(neg, d);
        let p = (&s_p, m_p.as_slice(), pos.len());
        let n = (&s_n, m_n.as_slice(), neg.len());
        let mut a = pair_scatter(p, n);
        a.scale(2.0 * a_ne);
        a.add_scaled(-a_eq, &pair_scatter(p, p));
        a.add_scaled(-a_eq, &pair_scatter(n, n));
        a
    } else {
        let labelled: Vec<(&[f64], bool)> = pos
            .iter()
            .map(|r| (*r, true))
            .chain(neg.iter().map(|r| (*r, false)))
            .collect();
        let mut a = Matrix::zeros(d, d);
        let mut diff = vec![0.0; d];
        for (i, (v, lv)) in labelled.iter().enumerate() {
            for (j, (w, lw)) in labelled.iter().enumerate() {
                if i == j {
                    continue;
                }
                let weight = if lv == lw { -a_eq } else { a_ne };
                diff.iter_mut()
                    .zip(v.iter().zip(w.iter()))
                    .for_each(|(o, (x, y))| *o = x - y);
                a.add_outer(weight, &diff, &diff);
            }
        }
        a
    }
}

fn continuous_matrix(rows: &[&[f64]], scores: &[f64], d: usize, fast: bool) -> Matrix {
    if fast {
        // Σ_{v,w} −l_v l_w d_vw d_vwᵀ = 2 (m mᵀ − L·T) with
        // L = Σ l_v, m = Σ l_v e_v, T = Σ l_v e_v e_vᵀ.
        let total: f64 = scores.iter().sum();
        let mut t = Matrix::zeros(d, d);
        let mut m = vec![0.0; d];
        for (r, &l) in rows.iter().zip(scores) {
            t.add_outer(l, r, r);
            m.iter_mut().zip(r.iter()).for_each(|(a, b)| *a += l * b);
        }
        let mut a = Matrix::zeros(d, d);
        a.add_outer(2.0, &m, &m);
        a.add_scaled(-2.0 * total, &t);
        a
    } else {
        let mut a = Matrix::zeros(d, d);
        let mut diff = vec![0.0; d];
        for (i, v) in rows.iter().enumerate() {
            for (j, w) in rows.iter().enumerate() {
                if i == j {
                    continue;
                }
                diff.iter_mut()
                    .zip(v.iter().zip(w.iter()))
                    .for_each(|(o, (x, y))| *o = x - y);
                a.add_outer(-scores[i] * scores[j], &diff, &diff);
            }
        }
        a
    }
}

/// The DensRay matrix for a binary signal.
///
/// With `fast = false` every ordered pair is enumerated (`O(n²d²)`); with
/// `fast = true` the pair sums are expanded into per-class scatter matrices
/// and sums (`O(nd²)`).
pub fn build_a_binary(
    emb: &Embeddings,
    signal: &BinarySignal,
    weights: WeightMode,
    fast: bool,
) -> Result<SymmetricMatrix> {
    require_normalized(emb)?;
    let pos = resolve_rows(emb, signal.positives())?;
    let neg = resolve_rows(emb, signal.negatives())?;
    SymmetricMatrix::new(binary_matrix(&pos, &neg, emb.dim(), weights, fast))
}

/// The DensRay matrix for real-valued scores, weighting each ordered pair
/// by `−l(v)l(w)`.
pub fn build_a_continuous(
    emb: &Embeddings,
    signal: &ContinuousSignal,
    fast: bool,
) -> Result<SymmetricMatrix> {
    require_normalized(emb)?;
    let (tokens, scores): (Vec<String>, Vec<f64>) = signal.scores().iter().cloned().unzip();
    let rows = resolve_rows(emb, &tokens)?;
    SymmetricMatrix::new(continuous_matrix(&rows, &scores, emb.dim(), fast))
}

fn signal_matrix(
    rows_of: impl Fn(&[String]) -> Result<Vec<Vec<f64>>>,
    signal: &Signal,
    weights: WeightMode,
    d: usize,
) -> Result<SymmetricMatrix> {
    let m = match signal {
        Signal::Binary(s) => {
            let pos = rows_of(s.positives())?;
            let neg = rows_of(s.negatives())?;
            let pos: Vec<&[f64]> = pos.iter().map(Vec::as_slice).collect();
            let neg: Vec<&[f64]> = neg.iter().map(Vec::as_slice).collect();
            binary_matrix(&pos, &neg, d, weights, true)
        }
        Signal::Continuous(s) => {
            if s.distinct_values() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "signal `{}` needs at least 2 distinct scores",
                    s.name
                )));
            }
            let (tokens, scores): (Vec<String>, Vec<f64>) = s.scores().iter().cloned().unzip();
            let rows = rows_of(&tokens)?;
            let rows: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
            continuous_matrix(&rows, &scores, d, true)
        }
    };
    SymmetricMatrix::new(m)
}

/// The DensRay rotation for one signal. `weights` is ignored for
/// continuous signals.
pub fn densray(emb: &Embeddings, signal: &Signal, weights: WeightMode) -> Result<Rotation> {
    require_normalized(emb)?;
    let rows_of = |tokens: &[String]| -> Result<Vec<Vec<f64>>> {
        Ok(resolve_rows(emb, tokens)?
            .into_iter()
            .map(<[f64]>::to_vec)
            .collect())
    };
    let a = signal_matrix(rows_of, signal, weights, emb.dim())?;
    let eb = eig_symmetric(&a)?;
    Rotation::new(eb.vectors, Some(eb.values), Method::DensRay, signal.name())
}

/// Eigenvalues (descending) of the DensRay matrix built from the rows as
/// stored, without requiring unit rows. Measures how strongly a signal is
/// still expressed in a reduced space such as a complement.
pub fn signal_spectrum(emb: &Embeddings, signal: &Signal, weights: WeightMode) -> Result<Vec<f64>> {
    let rows_of = |tokens: &[String]| -> Result<Vec<Vec<f64>>> {
        Ok(resolve_rows(emb, tokens)?
            .into_iter()
            .map(<[f64]>::to_vec)
            .collect())
    };
    let a = signal_matrix(rows_of, signal, weights, emb.dim())?;
    Ok(eig_symmetric(&a)?.values)
}

/// Encodes several signals in one rotation by repeated application.
///
/// Signal `i` is solved inside the orthogonal complement of the directions
/// already fixed by signals `0..i`, and contributes its top `k_i` directions.
/// The remaining columns are the leftover eigenvectors of the last signal.
/// Eigenvalues are stored block by block, so they descend within each
/// signal's block only.
pub fn iterate_signals(
    emb: &Embeddings,
    signals: &[(Signal, usize)],
    weights: WeightMode,
) -> Result<Rotation> {
    require_normalized(emb)?;
    let d = emb.dim();
    if signals.is_empty() {
        return Err(Error::Empty("signal list".into()));
    }
    let budget: usize = signals.iter().map(|(_, k)| k).sum();
    if budget > d {
        return Err(Error::InvalidArgument(format!(
            "requested {budget} directions but the space has only {d} dimensions"
        )));
    }

    let mut fixed: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut values: Vec<f64> = Vec::with_capacity(d);
    // columns span the residual subspace, in ambient coordinates
    let mut basis = Matrix::identity(d);
    let mut names = Vec::with_capacity(signals.len());

    for (idx, (signal, k)) in signals.iter().enumerate() {
        names.push(signal.name().to_string());
        let r = basis.cols();
        let rows_of = |tokens: &[String]| -> Result<Vec<Vec<f64>>> {
            resolve_rows(emb, tokens).map(|rows| {
                rows.into_iter()
                    .map(|row| {
                        (0..r)
                            .map(|j| project_onto_column(row, &basis, j))
                            .collect()
                    })
                    .collect()
            })
        };
        let a = signal_matrix(rows_of, signal, weights, r)?;
        let eb = eig_symmetric(&a)?;
        let lifted = basis.matmul(&eb.vectors);
        let last = idx + 1 == signals.len();
        let take = if last { r } else { *k };
        for j in 0..take {
            let mut col = lifted.column(j);
            canonical_sign(&mut col);
            fixed.push(col);
            values.push(eb.values[j]);
        }
        if !last {
            basis = lifted.column_range(*k, r);
        }
    }

    let q = Matrix::from_columns(&fixed);
    Rotation::new(q, Some(values), Method::DensRay, names.join("+"))
}

fn project_onto_column(row: &[f64], basis: &Matrix, j: usize) -> f64 {
    row.iter().enumerate().map(|(i, x)| x * basis[(i, j)]).sum()
}

/// `E' = E·Q`. Row norms are preserved by orthogonality, so the normalized
/// flag carries over.
pub fn project(emb: &Embeddings, rot: &Rotation) -> Result<Embeddings> {
    if emb.dim() != rot.dim() {
        return Err(Error::DimensionMismatch {
            expected: emb.dim(),
            got: rot.dim(),
        });
    }
    let data = emb.matrix().matrix().matmul(rot.matrix());
    let matrix = if emb.matrix().is_normalized() {
        EmbeddingMatrix::new_normalized(data)
    } else {
        EmbeddingMatrix::new(data)?
    };
    emb.with_matrix(matrix)
}

/// Drops the first `drop` columns. Rows are not renormalized.
pub fn complement(emb: &Embeddings, drop: usize) -> Result<Embeddings> {
    let d = emb.dim();
    if drop >= d {
        return Err(Error::InvalidArgument(format!(
            "cannot drop {drop} of {d} dimensions"
        )));
    }
    if drop == 0 {
        return Ok(emb.clone());
    }
    let data = emb.matrix().matrix().column_range(drop, d);
    emb.with_matrix(EmbeddingMatrix::new(data)?)
}
