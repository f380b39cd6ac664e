//! Lexicon ingestion and cleaning, score induction along an interpretable
//! direction, and Kendall-τ evaluation.
//!
//! Cleaning runs in a fixed order for every method:
//! deduplication → neutral removal → median binarization → removal of
//! train/test overlap.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use crate::densray::{densray, BinarySignal, ContinuousSignal, Method, Rotation, WeightMode};
use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::kendall::kendall_tau;
use crate::linear::{train_logreg, train_svm, train_svr, Hyperparams, LinearModel};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconKind {
    /// Scores in `{−1, 0, +1}`; `0` marks a neutral word.
    Binary,
    Continuous,
}

impl FromStr for LexiconKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(LexiconKind::Binary),
            "continuous" => Ok(LexiconKind::Continuous),
            _ => Err(Error::InvalidArgument(format!(
                "unknown lexicon kind `{s}`"
            ))),
        }
    }
}

impl fmt::Display for LexiconKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LexiconKind::Binary => "binary",
            LexiconKind::Continuous => "continuous",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub name: String,
    pub kind: LexiconKind,
    entries: Vec<(String, f64)>,
}

impl Lexicon {
    pub fn new(
        name: impl Into<String>,
        kind: LexiconKind,
        entries: Vec<(String, f64)>,
    ) -> Result<Self> {
        for (t, s) in &entries {
            if !s.is_finite() {
                return Err(Error::NonFinite(format!("score of `{t}`")));
            }
            if kind == LexiconKind::Binary && ![-1.0, 0.0, 1.0].contains(s) {
                return Err(Error::InvalidArgument(format!(
                    "binary lexicon score for `{t}` must be -1, 0 or 1, got {s}"
                )));
            }
        }
        Ok(Lexicon {
            name: name.into(),
            kind,
            entries,
        })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    fn with_entries(&self, entries: Vec<(String, f64)>) -> Lexicon {
        Lexicon {
            name: self.name.clone(),
            kind: self.kind,
            entries,
        }
    }

    /// Entries whose token is in the vocabulary.
    pub fn restrict_to(&self, emb: &Embeddings) -> Lexicon {
        self.with_entries(
            self.entries
                .iter()
                .filter(|(t, _)| emb.vocab().contains(t))
                .cloned()
                .collect(),
        )
    }

    /// Maps each token through `f` (e.g. lowercasing); later duplicates are
    /// left for [`dedup`].
    pub fn map_tokens(&self, f: impl Fn(&str) -> String) -> Lexicon {
        self.with_entries(self.entries.iter().map(|(t, s)| (f(t), *s)).collect())
    }

    /// Positive scores form the positive class, negative scores the negative.
    pub fn binary_signal(&self) -> Result<BinarySignal> {
        let pos = self
            .entries
            .iter()
            .filter(|(_, s)| *s > 0.0)
            .map(|(t, _)| t.clone());
        let neg = self
            .entries
            .iter()
            .filter(|(_, s)| *s < 0.0)
            .map(|(t, _)| t.clone());
        BinarySignal::new(self.name.clone(), pos, neg)
    }

    pub fn continuous_signal(&self) -> Result<ContinuousSignal> {
        ContinuousSignal::new(self.name.clone(), self.entries.clone())
    }
}

/// Parses `token<TAB>score` lines; `#` comment lines and blank lines are
/// skipped.
pub fn parse_lexicon<R: BufRead>(reader: R, name: &str, kind: LexiconKind) -> Result<Lexicon> {
    let mut entries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(name, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (token, score) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(line_no, "expected `token<TAB>score`"))?;
        if token.is_empty() {
            return Err(Error::parse(line_no, "empty token"));
        }
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid score `{score}`")))?;
        if !score.is_finite() {
            return Err(Error::parse(line_no, "score must be finite"));
        }
        entries.push((token.to_string(), score));
    }
    Lexicon::new(name, kind, entries)
}

/// Loads a lexicon, naming it after the file stem.
pub fn load_lexicon(path: impl AsRef<Path>, kind: LexiconKind) -> Result<Lexicon> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "lexicon".into());
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(BufReader::new(file), &name, kind)
}

/// Keeps the first occurrence of each token.
pub fn dedup(lex: &Lexicon) -> Lexicon {
    let mut seen = HashSet::new();
    lex.with_entries(
        lex.entries
            .iter()
            .filter(|(t, _)| seen.insert(t.as_str()))
            .cloned()
            .collect(),
    )
}

/// Lower-middle median of a non-empty list.
fn lower_median(scores: &[f64]) -> f64 {
    let mut v = scores.to_vec();
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

/// `+1` above the median, `−1` below; entries equal to the median are
/// dropped. For even counts the lower middle value is the median.
pub fn binarize_median(lex: &Lexicon) -> Result<Lexicon> {
    let scores: Vec<f64> = lex.entries.iter().map(|(_, s)| *s).collect();
    if scores.is_empty() {
        return Err(Error::Empty(format!("lexicon `{}`", lex.name)));
    }
    if scores.iter().all(|s| *s == scores[0]) {
        return Err(Error::InvalidArgument(format!(
            "lexicon `{}` has a single distinct score and cannot be binarized",
            lex.name
        )));
    }
    let median = lower_median(&scores);
    let entries = lex
        .entries
        .iter()
        .filter(|(_, s)| *s != median)
        .map(|(t, s)| (t.clone(), if *s > median { 1.0 } else { -1.0 }))
        .collect();
    Ok(Lexicon {
        name: lex.name.clone(),
        kind: LexiconKind::Binary,
        entries,
    })
}

/// Removes entries scored exactly `0`.
pub fn remove_neutral(lex: &Lexicon) -> Result<Lexicon> {
    let out = lex.with_entries(
        lex.entries
            .iter()
            .filter(|(_, s)| *s != 0.0)
            .cloned()
            .collect(),
    );
    if out.is_empty() {
        return Err(Error::Empty(format!(
            "lexicon `{}` after removing neutral words",
            lex.name
        )));
    }
    Ok(out)
}

/// Removes from `train` every token that also occurs in `test`.
pub fn split_disjoint(train: &Lexicon, test: &Lexicon) -> Result<(Lexicon, Lexicon)> {
    let test_tokens: HashSet<&str> = test.tokens().collect();
    let kept = train.with_entries(
        train
            .entries
            .iter()
            .filter(|(t, _)| !test_tokens.contains(t.as_str()))
            .cloned()
            .collect(),
    );
    if kept.is_empty() {
        return Err(Error::Empty(format!(
            "training lexicon `{}` after removing test overlap",
            train.name
        )));
    }
    Ok((kept, test.clone()))
}

/// Something that scores a word vector along an interpretable direction.
#[derive(Debug, Clone, Copy)]
pub enum Predictor<'a> {
    /// First coordinate of `e·Q`.
    Rotation(&'a Rotation),
    /// `w·e + b`.
    Model(&'a LinearModel),
}

impl Predictor<'_> {
    pub fn score(&self, e: &[f64]) -> f64 {
        match self {
            Predictor::Rotation(r) => {
                let q = r.matrix();
                e.iter().enumerate().map(|(i, x)| x * q[(i, 0)]).sum()
            }
            Predictor::Model(m) => m.decision(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InductionResult {
    /// Predicted scores for the test tokens found in the vocabulary, in
    /// test-lexicon order.
    pub predicted: Vec<(String, f64)>,
    pub tau: f64,
    pub n_test: usize,
    pub n_skipped: usize,
}

/// Predicts scores for the test words and correlates them with the gold
/// scores.
///
/// The direction is oriented so that predictions covary positively with
/// the training scores (for a binary lexicon: mean positive prediction above
/// mean negative prediction). Test tokens missing from the vocabulary are
/// skipped and counted.
pub fn induce(
    emb: &Embeddings,
    predictor: Predictor<'_>,
    train: &Lexicon,
    test: &Lexicon,
) -> Result<InductionResult> {
    let train_pairs: Vec<(f64, f64)> = train
        .entries
        .iter()
        .filter_map(|(t, s)| emb.vector(t).map(|e| (*s, predictor.score(e))))
        .collect();
    if train_pairs.is_empty() {
        return Err(Error::Empty("training words in the vocabulary".into()));
    }
    let n = train_pairs.len() as f64;
    let mean_s = train_pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let covariance: f64 = train_pairs.iter().map(|(s, p)| (s - mean_s) * p).sum();
    let sign = if covariance < 0.0 { -1.0 } else { 1.0 };

    let mut predicted = Vec::new();
    let mut gold = Vec::new();
    let mut n_skipped = 0;
    for (token, score) in &test.entries {
        match emb.vector(token) {
            Some(e) => {
                predicted.push((token.clone(), sign * predictor.score(e)));
                gold.push(*score);
            }
            None => n_skipped += 1,
        }
    }
    if predicted.is_empty() {
        return Err(Error::Empty(format!(
            "test lexicon `{}` within the vocabulary",
            test.name
        )));
    }
    let scores: Vec<f64> = predicted.iter().map(|p| p.1).collect();
    let tau = kendall_tau(&gold, &scores)?;
    Ok(InductionResult {
        n_test: predicted.len(),
        predicted,
        tau,
        n_skipped,
    })
}

/// Train and test lexicons after the shared cleaning steps.
#[derive(Debug, Clone)]
pub struct PreparedTask {
    pub name: String,
    /// Binary training labels (binarized at the median if the source was
    /// continuous).
    pub train_binary: Lexicon,
    /// Training scores for regression: the continuous scores, or the binary
    /// labels.
    pub train_scores: Lexicon,
    pub test: Lexicon,
}

impl PreparedTask {
    pub fn new(name: impl Into<String>, train: &Lexicon, test: &Lexicon) -> Result<Self> {
        let train = dedup(train);
        let test = dedup(test);
        let (train_scores, train_binary) = match train.kind {
            LexiconKind::Binary => {
                let t = remove_neutral(&train)?;
                (t.clone(), t)
            }
            LexiconKind::Continuous => {
                let b = binarize_median(&train)?;
                (train, b)
            }
        };
        let test = match test.kind {
            LexiconKind::Binary => remove_neutral(&test)?,
            LexiconKind::Continuous => test,
        };
        if test.is_empty() {
            return Err(Error::Empty(format!("test lexicon `{}`", test.name)));
        }
        let (train_binary, _) = split_disjoint(&train_binary, &test)?;
        let (train_scores, _) = split_disjoint(&train_scores, &test)?;
        Ok(PreparedTask {
            name: name.into(),
            train_binary,
            train_scores,
            test,
        })
    }

    /// The same task with the training lexicons reduced to `tokens`.
    pub fn with_train_subset(&self, tokens: &HashSet<&str>) -> PreparedTask {
        let keep = |lex: &Lexicon| {
            lex.with_entries(
                lex.entries
                    .iter()
                    .filter(|(t, _)| tokens.contains(t.as_str()))
                    .cloned()
                    .collect(),
            )
        };
        PreparedTask {
            name: self.name.clone(),
            train_binary: keep(&self.train_binary),
            train_scores: keep(&self.train_scores),
            test: self.test.clone(),
        }
    }
}

/// Settings shared by every induction method.
#[derive(Debug, Clone, Copy, Default)]
pub struct InductionConfig {
    pub weights: WeightMode,
    pub hyperparams: Hyperparams,
    pub seed: u64,
}

/// One line of the induction report.
#[derive(Debug, Clone, PartialEq)]
pub struct InductionRow {
    pub name: String,
    pub method: Method,
    pub n_train: usize,
    pub n_test: usize,
    pub skipped: usize,
    pub tau: f64,
}

/// Fits `method` on the task's training lexicon and evaluates on its test
/// lexicon. DensRay, SVM and logistic regression use the binary labels; SVR
/// uses the scores.
pub fn run_induction(
    emb: &Embeddings,
    task: &PreparedTask,
    method: Method,
    config: &InductionConfig,
) -> Result<(InductionRow, InductionResult)> {
    let hp = Hyperparams {
        seed: seed::derive(config.seed, &[seed::stream::TRAINING]),
        ..config.hyperparams
    };
    let (train, result) = match method {
        Method::DensRay => {
            let train = task.train_binary.restrict_to(emb);
            let rot = densray(emb, &train.binary_signal()?.into(), config.weights)?;
            let res = induce(emb, Predictor::Rotation(&rot), &train, &task.test)?;
            (train, res)
        }
        Method::Svm | Method::LogReg => {
            let train = task.train_binary.restrict_to(emb);
            let signal = train.binary_signal()?;
            let model = if method == Method::Svm {
                train_svm(emb, &signal, &hp)?
            } else {
                train_logreg(emb, &signal, &hp)?
            };
            let res = induce(emb, Predictor::Model(&model), &train, &task.test)?;
            (train, res)
        }
        Method::Svr => {
            let train = task.train_scores.restrict_to(emb);
            let model = train_svr(emb, &train.continuous_signal()?, &hp)?;
            let res = induce(emb, Predictor::Model(&model), &train, &task.test)?;
            (train, res)
        }
    };
    let row = InductionRow {
        name: task.name.clone(),
        method,
        n_train: train.len(),
        n_test: result.n_test,
        skipped: result.n_skipped,
        tau: result.tau,
    };
    Ok((row, result))
}

/// Writes the induction TSV: one row per (lexicon, method) followed by one
/// `macro-mean` row per method (mean τ over lexicons).
pub fn write_induction_report<W: Write>(mut out: W, rows: &[InductionRow]) -> std::io::Result<()> {
    writeln!(out, "name\tmethod\tn_train\tn_test\tskipped\ttau")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:.4}",
            r.name, r.method, r.n_train, r.n_test, r.skipped, r.tau
        )?;
    }
    let mut methods: Vec<Method> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    for m in methods {
        let taus: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == m)
            .map(|r| r.tau)
            .collect();
        let mean = taus.iter().sum::<f64>() / taus.len() as f64;
        writeln!(out, "macro-mean\t{m}\t-\t-\t-\t{mean:.4}")?;
    }
    out.flush()
}

/// Mean and spread of τ over random subsamples of the training lexicon.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub name: String,
    pub method: Method,
    pub size: usize,
    pub samples: usize,
    pub mean_tau: f64,
    /// Population standard deviation.
    pub std_tau: f64,
}

impl PreparedTask {
    /// Keeps `size` training words drawn uniformly without replacement from
    /// the in-vocabulary training words, in lexicon order.
    pub fn subsample(&self, emb: &Embeddings, size: usize, seed: u64) -> Result<PreparedTask> {
        let pool: Vec<&str> = self
            .train_scores
            .tokens()
            .filter(|t| emb.vocab().contains(t))
            .collect();
        if size == 0 || size > pool.len() {
            return Err(Error::InvalidArgument(format!(
                "subsample size {size} must be between 1 and the {} usable training words of `{}`",
                pool.len(),
                self.name
            )));
        }
        let mut picked =
            rand::seq::index::sample(&mut seed::rng(seed), pool.len(), size).into_vec();
        picked.sort_unstable();
        let tokens: HashSet<&str> = picked.into_iter().map(|i| pool[i]).collect();
        Ok(self.with_train_subset(&tokens))
    }
}

/// For every size, draws `samples` seeded subsamples of the training lexicon
/// and runs each method on each.
pub fn stability(
    emb: &Embeddings,
    task: &PreparedTask,
    methods: &[Method],
    sizes: &[usize],
    samples: usize,
    config: &InductionConfig,
) -> Result<Vec<StabilityRow>> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "at least one subsample is required".into(),
        ));
    }
    let mut rows = Vec::new();
    for &size in sizes {
        let mut taus = vec![Vec::with_capacity(samples); methods.len()];
        for k in 0..samples {
            let sample_seed = seed::derive(
                config.seed,
                &[seed::stream::SUBSAMPLE, size as u64, k as u64],
            );
            let sub = task.subsample(emb, size, sample_seed)?;
            let cfg = InductionConfig {
                seed: sample_seed,
                ..*config
            };
            for (m, method) in methods.iter().enumerate() {
                taus[m].push(run_induction(emb, &sub, *method, &cfg)?.0.tau);
            }
        }
        for (method, t) in methods.iter().zip(taus) {
            let n = t.len() as f64;
            let mean = t.iter().sum::<f64>() / n;
            let var = t.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            rows.push(StabilityRow {
                name: task.name.clone(),
                method: *method,
                size,
                samples,
                mean_tau: mean,
                std_tau: var.sqrt(),
            });
        }
    }
    Ok(rows)
}

pub fn write_stability_report<W: Write>(mut out: W, rows: &[StabilityRow]) -> std::io::Result<()> {
    writeln!(out, "name\tmethod\tsize\tsamples\tmean_tau\tstd_tau")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.4}\t{:.4}",
            r.name, r.method, r.size, r.samples, r.mean_tau, r.std_tau
        )?;
    }
    out.flush()
}
