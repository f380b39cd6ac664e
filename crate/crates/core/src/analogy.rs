//! Set-based word analogy: dataset parsers, the leave-one-pair-out protocol,
//! IntCos and LRCos scoring, and per-category reports.
//!
//! A category is a list of pairs `(a, {a′, …})`. For each test pair the
//! remaining pairs that share no word with it train a classifier separating
//! left words from right words, and the prediction for `a` is the vocabulary
//! word maximizing a class score times the cosine to `a`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::densray::{densray, BinarySignal, Method, WeightMode};
use crate::embedding::{cosine, Embeddings};
use crate::error::{Error, Result};
use crate::linalg::{dot, normalized};
use crate::linear::{train_logreg, train_svm, Hyperparams};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AnalogyGroup {
    Inflectional,
    Derivational,
    Encyclopedia,
    Lexicography,
    /// A Google Analogy category.
    Google,
}

impl AnalogyGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            AnalogyGroup::Inflectional => "Inflectional",
            AnalogyGroup::Derivational => "Derivational",
            AnalogyGroup::Encyclopedia => "Encyclopedia",
            AnalogyGroup::Lexicography => "Lexicography",
            AnalogyGroup::Google => "GA",
        }
    }

    fn from_bats_prefix(c: char) -> Option<Self> {
        match c {
            'I' => Some(AnalogyGroup::Inflectional),
            'D' => Some(AnalogyGroup::Derivational),
            'E' => Some(AnalogyGroup::Encyclopedia),
            'L' => Some(AnalogyGroup::Lexicography),
            _ => None,
        }
    }
}

impl fmt::Display for AnalogyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyPair {
    pub left: String,
    /// Accepted answers; the first is the canonical one.
    pub right: Vec<String>,
}

impl AnalogyPair {
    pub fn new(left: impl Into<String>, right: Vec<String>) -> Result<Self> {
        let left = left.into();
        if left.is_empty() || right.is_empty() || right.iter().any(String::is_empty) {
            return Err(Error::InvalidArgument(format!(
                "analogy pair `{left}` needs a left word and at least one right word"
            )));
        }
        Ok(AnalogyPair { left, right })
    }

    fn words(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.left.as_str()).chain(self.right.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyCategory {
    pub name: String,
    pub group: AnalogyGroup,
    pub pairs: Vec<AnalogyPair>,
}

impl AnalogyCategory {
    /// At least two pairs are required.
    pub fn new(
        name: impl Into<String>,
        group: AnalogyGroup,
        pairs: Vec<AnalogyPair>,
    ) -> Result<Self> {
        let name = name.into();
        if pairs.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "analogy category `{name}` has {} pair(s); at least 2 are required",
                pairs.len()
            )));
        }
        Ok(AnalogyCategory { name, group, pairs })
    }

    /// Applies `f` to every word, e.g. lowercasing. Pairs that become
    /// identical are merged.
    pub fn map_tokens(&self, f: impl Fn(&str) -> String) -> AnalogyCategory {
        let mut pairs: Vec<AnalogyPair> = Vec::new();
        for p in &self.pairs {
            let mut right: Vec<String> = Vec::new();
            for r in &p.right {
                let r = f(r);
                if !right.contains(&r) {
                    right.push(r);
                }
            }
            let pair = AnalogyPair {
                left: f(&p.left),
                right,
            };
            if !pairs.contains(&pair) {
                pairs.push(pair);
            }
        }
        AnalogyCategory {
            name: self.name.clone(),
            group: self.group,
            pairs,
        }
    }
}

/// Parses the Google Analogy question format: `: name` headers followed by
/// four-word lines `a a′ b b′`. The distinct pairs of each category are kept
/// in order of first appearance.
pub fn parse_google_analogy_reader<R: BufRead>(
    reader: R,
    source: &str,
) -> Result<Vec<AnalogyCategory>> {
    let mut raw: Vec<(String, Vec<AnalogyPair>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix(':') {
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::parse(line_no, "empty category name"));
            }
            raw.push((name.to_string(), Vec::new()));
            continue;
        }
        let (_, pairs) = raw.last_mut().ok_or_else(|| {
            Error::parse(line_no, "question before the first `: category` header")
        })?;
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 4 {
            return Err(Error::parse(
                line_no,
                format!("expected 4 words, found {}", words.len()),
            ));
        }
        for pair in [(words[0], words[1]), (words[2], words[3])] {
            let pair = AnalogyPair::new(pair.0, vec![pair.1.to_string()])?;
            if !pairs.contains(&pair) {
                pairs.push(pair);
            }
        }
    }
    raw.into_iter()
        .map(|(name, pairs)| AnalogyCategory::new(name, AnalogyGroup::Google, pairs))
        .collect()
}

pub fn parse_google_analogy(path: impl AsRef<Path>) -> Result<Vec<AnalogyCategory>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let source = path.display().to_string();
    parse_google_analogy_reader(BufReader::new(file), &source)
}

/// Parses one BATS file body: `left<TAB>right1/right2/…` per line.
pub fn parse_bats_category<R: BufRead>(reader: R, name: &str) -> Result<AnalogyCategory> {
    let group = name
        .chars()
        .next()
        .and_then(AnalogyGroup::from_bats_prefix)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "cannot infer the group of `{name}`: names must start with I, D, E or L"
            ))
        })?;
    let mut pairs: Vec<AnalogyPair> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(name, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (left, rights) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(line_no, "expected `left<TAB>right1/right2/...`"))?;
        let left = left.trim();
        let mut right: Vec<String> = Vec::new();
        for r in rights.split('/').map(str::trim).filter(|r| !r.is_empty()) {
            if !right.iter().any(|x| x == r) {
                right.push(r.to_string());
            }
        }
        if left.is_empty() || right.is_empty() {
            return Err(Error::parse(line_no, "missing left or right word"));
        }
        let pair = AnalogyPair::new(left, right)?;
        if !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    if pairs.is_empty() {
        return Err(Error::Empty(format!("BATS file `{name}`")));
    }
    AnalogyCategory::new(name, group, pairs)
}

fn collect_txt_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_txt_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "txt") {
            out.push(path);
        }
    }
    Ok(())
}

/// One category per `*.txt` file found under `dir` (recursively), ordered by
/// category name. The category name is the file stem.
pub fn parse_bats(dir: impl AsRef<Path>) -> Result<Vec<AnalogyCategory>> {
    let dir = dir.as_ref();
    let mut files = Vec::new();
    collect_txt_files(dir, &mut files)?;
    if files.is_empty() {
        return Err(Error::Empty(format!("BATS directory {}", dir.display())));
    }
    let mut cats = files
        .iter()
        .map(|path| {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            parse_bats_category(BufReader::new(file), &name)
        })
        .collect::<Result<Vec<_>>>()?;
    cats.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(cats)
}

/// A Google Analogy file or a BATS directory, chosen by path type.
pub fn load_analogy_dataset(path: impl AsRef<Path>) -> Result<Vec<AnalogyCategory>> {
    let path = path.as_ref();
    if path.is_dir() {
        parse_bats(path)
    } else {
        parse_google_analogy(path)
    }
}

/// Training pairs and the held-out test pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<AnalogyPair>,
    pub test: AnalogyPair,
}

impl Fold {
    /// Every word appearing in a training pair.
    pub fn train_words(&self) -> BTreeSet<&str> {
        self.train.iter().flat_map(AnalogyPair::words).collect()
    }
}

/// Holds out pair `test_index`; training keeps only pairs sharing no word
/// with it. `None` when fewer than two training pairs remain.
pub fn loo_protocol(cat: &AnalogyCategory, test_index: usize) -> Result<Option<Fold>> {
    let test = cat.pairs.get(test_index).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "test index {test_index} out of range for `{}` with {} pairs",
            cat.name,
            cat.pairs.len()
        ))
    })?;
    let held: HashSet<&str> = test.words().collect();
    let train: Vec<AnalogyPair> = cat
        .pairs
        .iter()
        .enumerate()
        .filter(|(j, p)| *j != test_index && p.words().all(|w| !held.contains(w)))
        .map(|(_, p)| p.clone())
        .collect();
    if train.len() < 2 {
        return Ok(None);
    }
    Ok(Some(Fold {
        train,
        test: test.clone(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Original,
    /// The rotated space without its interpretable first column.
    Complement,
}

impl Space {
    pub fn as_str(self) -> &'static str {
        match self {
            Space::Original => "original",
            Space::Complement => "complement",
        }
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Space::Original),
            "complement" => Ok(Space::Complement),
            _ => Err(Error::InvalidArgument(format!("unknown space `{s}`"))),
        }
    }
}

/// One method column of the analogy report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scorer {
    /// `method` is [`Method::DensRay`] or [`Method::Svm`].
    IntCos {
        method: Method,
        space: Space,
    },
    LrCos,
}

impl Scorer {
    /// IntCos-DensRay and IntCos-SVM in both spaces, then LRCos.
    pub fn all() -> Vec<Scorer> {
        let mut v = Vec::new();
        for method in [Method::DensRay, Method::Svm] {
            for space in [Space::Original, Space::Complement] {
                v.push(Scorer::IntCos { method, space });
            }
        }
        v.push(Scorer::LrCos);
        v
    }

    /// Crosses method names (`intcos-densray`, `intcos-svm`, `lrcos`) with
    /// spaces; LRCos ignores the space.
    pub fn parse_list(methods: &str, spaces: &str) -> Result<Vec<Scorer>> {
        let spaces = spaces
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<Space>>>()?;
        let mut out = Vec::new();
        for m in methods.split(',').map(str::trim) {
            let method = match m {
                "intcos-densray" => Method::DensRay,
                "intcos-svm" => Method::Svm,
                "lrcos" => {
                    if !out.contains(&Scorer::LrCos) {
                        out.push(Scorer::LrCos);
                    }
                    continue;
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown analogy method `{m}`"
                    )))
                }
            };
            for &space in &spaces {
                let s = Scorer::IntCos { method, space };
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("no analogy methods given".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Scorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scorer::IntCos { method, space } => write!(f, "intcos-{method}-{}", space.as_str()),
            Scorer::LrCos => f.write_str("lrcos"),
        }
    }
}

/// Settings shared by all folds.
#[derive(Debug, Clone)]
pub struct AnalogyOptions {
    pub scorers: Vec<Scorer>,
    pub weights: WeightMode,
    pub hyperparams: Hyperparams,
    pub exclude_query: bool,
    pub exclude_train_words: bool,
    pub seed: u64,
}

impl Default for AnalogyOptions {
    fn default() -> Self {
        AnalogyOptions {
            scorers: Scorer::all(),
            weights: WeightMode::default(),
            hyperparams: Hyperparams::default(),
            exclude_query: true,
            exclude_train_words: true,
            seed: 0,
        }
    }
}

fn require_normalized(emb: &Embeddings) -> Result<()> {
    if emb.matrix().is_normalized() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "analogy scoring requires unit-normalized embeddings".into(),
        ))
    }
}

/// Left and right classes of a fold. Words landing in both classes are
/// dropped from both.
fn fold_signal(fold: &Fold, emb: &Embeddings) -> Result<BinarySignal> {
    let left: Vec<&str> = fold.train.iter().map(|p| p.left.as_str()).collect();
    let right: Vec<&str> = fold
        .train
        .iter()
        .flat_map(|p| p.right.iter().map(String::as_str))
        .collect();
    let left_set: HashSet<&str> = left.iter().copied().collect();
    let right_set: HashSet<&str> = right.iter().copied().collect();
    let keep = |w: &&str, other: &HashSet<&str>| !other.contains(w) && emb.vocab().contains(w);
    let pos: Vec<&str> = right
        .iter()
        .copied()
        .filter(|w| keep(w, &left_set))
        .collect();
    let neg: Vec<&str> = left
        .iter()
        .copied()
        .filter(|w| keep(w, &right_set))
        .collect();
    BinarySignal::new("analogy", pos, neg)
}

/// Indices excluded from the argmax.
fn excluded(emb: &Embeddings, fold: &Fold, query: usize, opts: &AnalogyOptions) -> HashSet<usize> {
    let mut out = HashSet::new();
    if opts.exclude_query {
        out.insert(query);
    }
    if opts.exclude_train_words {
        out.extend(
            fold.train_words()
                .into_iter()
                .filter_map(|w| emb.vocab().get(w)),
        );
    }
    out
}

/// First maximum over the non-excluded indices.
fn argmax(scores: &[f64], excluded: &HashSet<usize>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if excluded.contains(&i) {
            continue;
        }
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// The unit interpretable direction for a fold, oriented so that right-class
/// words score higher on average. `None` if the classifier normal vanished.
fn interpretable_direction(
    emb: &Embeddings,
    signal: &BinarySignal,
    method: Method,
    opts: &AnalogyOptions,
    fold_seed: u64,
) -> Result<Option<Vec<f64>>> {
    let q = match method {
        Method::DensRay => densray(emb, &signal.clone().into(), opts.weights)?.direction(0),
        Method::Svm => {
            let hp = Hyperparams {
                seed: fold_seed,
                ..opts.hyperparams
            };
            match normalized(&train_svm(emb, signal, &hp)?.weights) {
                Some(q) => q,
                None => return Ok(None),
            }
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "IntCos supports densray and svm, not {other}"
            )))
        }
    };
    let mean = |words: &[String]| {
        words
            .iter()
            .map(|w| dot(emb.vector(w).expect("signal words are in vocabulary"), &q))
            .sum::<f64>()
            / words.len() as f64
    };
    let flip = mean(signal.positives()) < mean(signal.negatives());
    Ok(Some(if flip {
        q.iter().map(|x| -x).collect()
    } else {
        q
    }))
}

/// Min-max scales `values` to `[0, 1]`; a constant list maps to `0.5`.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // also catches an empty or NaN-containing list
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return vec![0.5; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

/// Cosine of `e_a` with every vocabulary row after removing the component
/// along unit `q`: `(e_a·e_v − p_a p_v) / (√(1 − p_a²) √(1 − p_v²))`, with
/// `p = e·q` and unit rows. Rows lying on `q` get similarity `0`.
pub fn complement_similarities(emb: &Embeddings, query: usize, q: &[f64]) -> Vec<f64> {
    let m = emb.matrix();
    let e_a = m.row(query);
    let p_a = dot(e_a, q);
    let n_a = (1.0 - p_a * p_a).max(0.0).sqrt();
    (0..emb.len())
        .map(|v| {
            let e_v = m.row(v);
            let p_v = dot(e_v, q);
            let n_v = (1.0 - p_v * p_v).max(0.0).sqrt();
            let denom = n_a * n_v;
            if denom <= 1e-12 {
                0.0
            } else {
                ((dot(e_a, e_v) - p_a * p_v) / denom).clamp(-1.0, 1.0)
            }
        })
        .collect()
}

fn original_similarities(emb: &Embeddings, query: usize) -> Vec<f64> {
    let m = emb.matrix();
    let e_a = m.row(query);
    (0..emb.len()).map(|v| dot(e_a, m.row(v))).collect()
}

/// IntCos scores `norm(E′_{v,0}) · sim(a, v)` for every vocabulary word.
///
/// `q` is the oriented interpretable direction; `None` stands for a
/// constant interpretable column (every normalized value is `0.5`).
pub fn intcos_scores(emb: &Embeddings, query: usize, q: Option<&[f64]>, space: Space) -> Vec<f64> {
    let Some(q) = q else {
        return original_similarities(emb, query)
            .iter()
            .map(|s| 0.5 * s)
            .collect();
    };
    let m = emb.matrix();
    let coord: Vec<f64> = (0..emb.len()).map(|v| dot(m.row(v), q)).collect();
    let norm = min_max(&coord);
    let sims = match space {
        Space::Original => original_similarities(emb, query),
        Space::Complement => complement_similarities(emb, query, q),
    };
    norm.iter().zip(&sims).map(|(n, s)| n * s).collect()
}

fn query_index(emb: &Embeddings, a: &str) -> Result<usize> {
    emb.index(a)
}

fn pick(emb: &Embeddings, scores: &[f64], excluded: &HashSet<usize>) -> Result<String> {
    argmax(scores, excluded)
        .map(|i| emb.vocab().word(i).to_string())
        .ok_or_else(|| Error::Empty("candidate vocabulary after exclusions".into()))
}

/// IntCos prediction for the left word `a` given training pairs.
pub fn intcos_predict(
    emb: &Embeddings,
    fold: &Fold,
    a: &str,
    method: Method,
    space: Space,
    opts: &AnalogyOptions,
    fold_seed: u64,
) -> Result<String> {
    require_normalized(emb)?;
    let query = query_index(emb, a)?;
    let signal = fold_signal(fold, emb)?;
    let q = interpretable_direction(emb, &signal, method, opts, fold_seed)?;
    let scores = intcos_scores(emb, query, q.as_deref(), space);
    pick(emb, &scores, &excluded(emb, fold, query, opts))
}

/// LRCos scores `P(right | v) · cos(a, v)`.
fn lrcos_scores(emb: &Embeddings, query: usize, model: &crate::linear::LinearModel) -> Vec<f64> {
    let m = emb.matrix();
    original_similarities(emb, query)
        .iter()
        .enumerate()
        .map(|(v, s)| model.predict_proba(m.row(v)) * s)
        .collect()
}

/// LRCos prediction: logistic regression with the right class positive.
pub fn lrcos_predict(
    emb: &Embeddings,
    fold: &Fold,
    a: &str,
    opts: &AnalogyOptions,
    fold_seed: u64,
) -> Result<String> {
    require_normalized(emb)?;
    let query = query_index(emb, a)?;
    let signal = fold_signal(fold, emb)?;
    let hp = Hyperparams {
        seed: fold_seed,
        ..opts.hyperparams
    };
    let model = train_logreg(emb, &signal, &hp)?;
    pick(
        emb,
        &lrcos_scores(emb, query, &model),
        &excluded(emb, fold, query, opts),
    )
}

/// Mean cosine similarities of a category.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CosineStats {
    /// Left word vs. first right variant, averaged over pairs.
    pub inter: Option<f64>,
    /// Over unordered pairs of distinct left words.
    pub intra_left: Option<f64>,
    /// Over unordered pairs of distinct right words (all variants).
    pub intra_right: Option<f64>,
}

fn mean_pairwise(words: &[&str], emb: &Embeddings) -> Result<Option<f64>> {
    let mut seen = HashSet::new();
    let vecs: Vec<&[f64]> = words
        .iter()
        .filter(|w| seen.insert(**w))
        .filter_map(|w| emb.vector(w))
        .collect();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..vecs.len() {
        for j in (i + 1)..vecs.len() {
            sum += cosine(vecs[i], vecs[j])?;
            count += 1;
        }
    }
    Ok((count > 0).then(|| sum / count as f64))
}

/// Words missing from the vocabulary are skipped.
pub fn cosine_stats(cat: &AnalogyCategory, emb: &Embeddings) -> Result<CosineStats> {
    let mut inter = 0.0;
    let mut n_inter = 0usize;
    for p in &cat.pairs {
        if let (Some(l), Some(r)) = (emb.vector(&p.left), emb.vector(&p.right[0])) {
            inter += cosine(l, r)?;
            n_inter += 1;
        }
    }
    let lefts: Vec<&str> = cat.pairs.iter().map(|p| p.left.as_str()).collect();
    let rights: Vec<&str> = cat
        .pairs
        .iter()
        .flat_map(|p| p.right.iter().map(String::as_str))
        .collect();
    Ok(CosineStats {
        inter: (n_inter > 0).then(|| inter / n_inter as f64),
        intra_left: mean_pairwise(&lefts, emb)?,
        intra_right: mean_pairwise(&rights, emb)?,
    })
}

/// Outcome of one evaluated test pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldRecord {
    pub category: usize,
    pub test: AnalogyPair,
    pub train_words: Vec<String>,
    /// One prediction per scorer, in scorer order.
    pub predictions: Vec<String>,
}

impl FoldRecord {
    /// No prediction is a training word and no test word was trained on.
    pub fn is_leak_free(&self) -> bool {
        let train: HashSet<&str> = self.train_words.iter().map(String::as_str).collect();
        self.predictions.iter().all(|p| !train.contains(p.as_str()))
            && self.test.words().all(|w| !train.contains(w))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryResult {
    pub name: String,
    pub group: AnalogyGroup,
    pub n_pairs: usize,
    pub n_evaluated: usize,
    /// Pairs with out-of-vocabulary words plus folds left with too little
    /// training data.
    pub n_skipped: usize,
    /// Correct predictions per scorer.
    pub correct: Vec<usize>,
    pub stats: CosineStats,
}

impl CategoryResult {
    pub fn precision(&self, scorer: usize) -> Option<f64> {
        (self.n_evaluated > 0).then(|| self.correct[scorer] as f64 / self.n_evaluated as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyReport {
    pub scorers: Vec<Scorer>,
    pub categories: Vec<CategoryResult>,
    pub folds: Vec<FoldRecord>,
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

impl AnalogyReport {
    /// Correct over evaluated test pairs, pooled across categories.
    pub fn micro_mean(&self, scorer: usize) -> Option<f64> {
        let eval: usize = self.categories.iter().map(|c| c.n_evaluated).sum();
        let correct: usize = self.categories.iter().map(|c| c.correct[scorer]).sum();
        (eval > 0).then(|| correct as f64 / eval as f64)
    }

    fn category_precisions(&self, scorer: usize, group: Option<AnalogyGroup>) -> Vec<f64> {
        self.categories
            .iter()
            .filter(|c| group.is_none_or(|g| c.group == g))
            .filter_map(|c| c.precision(scorer))
            .collect()
    }

    /// Mean of per-category precisions (categories with no evaluated pair
    /// are left out).
    pub fn macro_mean(&self, scorer: usize) -> Option<f64> {
        mean_std(&self.category_precisions(scorer, None)).map(|m| m.0)
    }

    /// Population standard deviation of per-category precisions.
    pub fn macro_std(&self, scorer: usize) -> Option<f64> {
        mean_std(&self.category_precisions(scorer, None)).map(|m| m.1)
    }

    pub fn group_macro_mean(&self, scorer: usize, group: AnalogyGroup) -> Option<f64> {
        mean_std(&self.category_precisions(scorer, Some(group))).map(|m| m.0)
    }

    /// Per-category rows, then micro mean, macro mean, macro std and (for
    /// BATS) one macro-mean row per group.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        write!(
            out,
            "category\tgroup\tpairs\tevaluated\tskipped\tinter\tintra_left\tintra_right"
        )?;
        for s in &self.scorers {
            write!(out, "\t{s}")?;
        }
        writeln!(out)?;
        for c in &self.categories {
            write!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.name,
                c.group,
                c.n_pairs,
                c.n_evaluated,
                c.n_skipped,
                fmt(c.stats.inter),
                fmt(c.stats.intra_left),
                fmt(c.stats.intra_right)
            )?;
            for i in 0..self.scorers.len() {
                write!(out, "\t{}", fmt(c.precision(i)))?;
            }
            writeln!(out)?;
        }
        let pairs: usize = self.categories.iter().map(|c| c.n_pairs).sum();
        let eval: usize = self.categories.iter().map(|c| c.n_evaluated).sum();
        let skipped: usize = self.categories.iter().map(|c| c.n_skipped).sum();
        let mut aggregate =
            |label: &str, f: &dyn Fn(usize) -> Option<f64>| -> std::io::Result<()> {
                write!(out, "{label}\t-\t{pairs}\t{eval}\t{skipped}\t-\t-\t-")?;
                for i in 0..self.scorers.len() {
                    write!(out, "\t{}", fmt(f(i)))?;
                }
                writeln!(out)
            };
        aggregate("micro-mean", &|i| self.micro_mean(i))?;
        aggregate("macro-mean", &|i| self.macro_mean(i))?;
        aggregate("macro-std", &|i| self.macro_std(i))?;
        let groups: BTreeSet<AnalogyGroup> = self
            .categories
            .iter()
            .map(|c| c.group)
            .filter(|g| *g != AnalogyGroup::Google)
            .collect();
        for g in groups {
            aggregate(&format!("macro-mean:{g}"), &|i| self.group_macro_mean(i, g))?;
        }
        out.flush()
    }
}

/// Restricts a category to in-vocabulary words: right variants missing from
/// the vocabulary are dropped, and pairs without an in-vocabulary left word
/// or right variant are removed. Returns the kept pairs.
fn in_vocabulary(cat: &AnalogyCategory, emb: &Embeddings) -> Vec<AnalogyPair> {
    cat.pairs
        .iter()
        .filter(|p| emb.vocab().contains(&p.left))
        .filter_map(|p| {
            let right: Vec<String> = p
                .right
                .iter()
                .filter(|r| emb.vocab().contains(r))
                .cloned()
                .collect();
            (!right.is_empty()).then(|| AnalogyPair {
                left: p.left.clone(),
                right,
            })
        })
        .collect()
}

enum FoldOutcome {
    Skipped,
    Done(FoldRecord, Vec<bool>),
}

fn run_fold(
    emb: &Embeddings,
    cat_index: usize,
    pairs: &[AnalogyPair],
    name: &str,
    test_index: usize,
    opts: &AnalogyOptions,
) -> Result<FoldOutcome> {
    let cat = AnalogyCategory {
        name: name.to_string(),
        group: AnalogyGroup::Google,
        pairs: pairs.to_vec(),
    };
    let Some(fold) = loo_protocol(&cat, test_index)? else {
        return Ok(FoldOutcome::Skipped);
    };
    let signal = match fold_signal(&fold, emb) {
        Ok(s) => s,
        Err(Error::Empty(_)) => return Ok(FoldOutcome::Skipped),
        Err(e) => return Err(e),
    };
    let query = emb.index(&fold.test.left)?;
    let excl = excluded(emb, &fold, query, opts);
    let fold_seed = seed::derive(
        opts.seed,
        &[seed::stream::ANALOGY, cat_index as u64, test_index as u64],
    );

    let mut directions: Vec<(Method, Option<Vec<f64>>)> = Vec::new();
    let mut predictions = Vec::with_capacity(opts.scorers.len());
    for scorer in &opts.scorers {
        let scores = match *scorer {
            Scorer::IntCos { method, space } => {
                if !directions.iter().any(|(m, _)| *m == method) {
                    let q = interpretable_direction(emb, &signal, method, opts, fold_seed)?;
                    directions.push((method, q));
                }
                let q = &directions
                    .iter()
                    .find(|(m, _)| *m == method)
                    .expect("cached")
                    .1;
                intcos_scores(emb, query, q.as_deref(), space)
            }
            Scorer::LrCos => {
                let hp = Hyperparams {
                    seed: fold_seed,
                    ..opts.hyperparams
                };
                lrcos_scores(emb, query, &train_logreg(emb, &signal, &hp)?)
            }
        };
        predictions.push(pick(emb, &scores, &excl)?);
    }
    let hits = predictions
        .iter()
        .map(|p| fold.test.right.contains(p))
        .collect();
    let record = FoldRecord {
        category: cat_index,
        train_words: fold.train_words().into_iter().map(str::to_string).collect(),
        test: fold.test,
        predictions,
    };
    Ok(FoldOutcome::Done(record, hits))
}

/// Runs every scorer on every leave-one-out fold of every category.
///
/// Folds run in parallel; each fold's seed depends only on the global seed,
/// the category index and the fold index, so results do not depend on
/// scheduling.
pub fn evaluate(
    categories: &[AnalogyCategory],
    emb: &Embeddings,
    opts: &AnalogyOptions,
) -> Result<AnalogyReport> {
    require_normalized(emb)?;
    if opts.scorers.is_empty() {
        return Err(Error::InvalidArgument("no analogy methods given".into()));
    }
    let filtered: Vec<Vec<AnalogyPair>> =
        categories.iter().map(|c| in_vocabulary(c, emb)).collect();
    let jobs: Vec<(usize, usize)> = filtered
        .iter()
        .enumerate()
        .flat_map(|(c, pairs)| (0..pairs.len()).map(move |i| (c, i)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(c, i)| run_fold(emb, c, &filtered[c], &categories[c].name, i, opts))
        .collect::<Result<Vec<_>>>()?;

    let mut results: Vec<CategoryResult> = categories
        .iter()
        .zip(&filtered)
        .map(|(c, kept)| {
            Ok(CategoryResult {
                name: c.name.clone(),
                group: c.group,
                n_pairs: c.pairs.len(),
                n_evaluated: 0,
                n_skipped: c.pairs.len() - kept.len(),
                correct: vec![0; opts.scorers.len()],
                stats: cosine_stats(c, emb)?,
            })
        })
        .collect::<Result<_>>()?;
    let mut folds = Vec::new();
    for (&(c, _), outcome) in jobs.iter().zip(outcomes) {
        let r = &mut results[c];
        match outcome {
            FoldOutcome::Skipped => r.n_skipped += 1,
            FoldOutcome::Done(record, hits) => {
                r.n_evaluated += 1;
                for (k, hit) in hits.into_iter().enumerate() {
                    r.correct[k] += usize::from(hit);
                }
                folds.push(record);
            }
        }
    }
    Ok(AnalogyReport {
        scorers: opts.scorers.clone(),
        categories: results,
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densray::Rotation;
    use crate::densray::{complement, project};
    use crate::eigen::complete_orthogonal;
    use crate::synthetic::planted_analogy;

    fn pair(l: &str, r: &[&str]) -> AnalogyPair {
        AnalogyPair::new(l, r.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn google_pairs_from_questions() {
        let cats = parse_google_analogy_reader(
            ": family\nboy girl brother sister\nbrother sister boy girl\nhe she boy girl\n: other\na b c d\n"
                .as_bytes(),
            "ga",
        )
        .unwrap();
        assert_eq!(cats.len(), 2);
        assert_eq!(cats[0].name, "family");
        assert_eq!(
            cats[0].pairs,
            vec![
                pair("boy", &["girl"]),
                pair("brother", &["sister"]),
                pair("he", &["she"])
            ]
        );
        assert_eq!(cats[1].group, AnalogyGroup::Google);
    }

    #[test]
    fn google_errors() {
        assert!(matches!(
            parse_google_analogy_reader("a b c d\n".as_bytes(), "ga"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_google_analogy_reader(": x\na b c\n".as_bytes(), "ga"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn bats_lines() {
        let cat = parse_bats_category(
            "animal\tcub/pup\r\ncat\tkitten\r\n".as_bytes(),
            "E04 [animal - young]",
        )
        .unwrap();
        assert_eq!(cat.group, AnalogyGroup::Encyclopedia);
        assert_eq!(
            cat.pairs,
            vec![pair("animal", &["cub", "pup"]), pair("cat", &["kitten"])]
        );
        let unix = parse_bats_category(
            "animal\tcub/pup\ncat\tkitten\n".as_bytes(),
            "E04 [animal - young]",
        )
        .unwrap();
        assert_eq!(cat, unix);
    }

    #[test]
    fn bats_errors() {
        assert!(matches!(
            parse_bats_category("".as_bytes(), "I01"),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            parse_bats_category("a b\n".as_bytes(), "I01"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_bats_category("a\tb\nc\td\n".as_bytes(), "X01").is_err());
    }

    #[test]
    fn bats_directory_walk() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("1_Inflectional");
        fs::create_dir(&sub).unwrap();
        fs::write(sub.join("I02 [b].txt"), "a\tb\nc\td\n").unwrap();
        fs::write(dir.path().join("D01 [a].txt"), "e\tf\ng\th\n").unwrap();
        fs::write(dir.path().join("notes.md"), "ignored").unwrap();
        let cats = load_analogy_dataset(dir.path()).unwrap();
        let names: Vec<&str> = cats.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["D01 [a]", "I02 [b]"]);
        assert_eq!(cats[1].group, AnalogyGroup::Inflectional);
    }

    fn category(pairs: Vec<AnalogyPair>) -> AnalogyCategory {
        AnalogyCategory::new("c", AnalogyGroup::Google, pairs).unwrap()
    }

    #[test]
    fn loo_disjoint_pairs() {
        let cat = category(
            (0..5)
                .map(|i| pair(&format!("l{i}"), &[&format!("r{i}")]))
                .collect(),
        );
        for i in 0..5 {
            let fold = loo_protocol(&cat, i).unwrap().unwrap();
            assert_eq!(fold.train.len(), 4);
            assert!(!fold.train.contains(&cat.pairs[i]));
        }
    }

    #[test]
    fn loo_word_level_exclusion() {
        let cat = category(vec![
            pair("a", &["b"]),
            pair("b", &["c"]),
            pair("x", &["y"]),
            pair("u", &["v"]),
        ]);
        let fold = loo_protocol(&cat, 0).unwrap().unwrap();
        assert_eq!(fold.train, vec![pair("x", &["y"]), pair("u", &["v"])]);
        let fold = loo_protocol(&cat, 2).unwrap().unwrap();
        assert_eq!(fold.train.len(), 3);
    }

    #[test]
    fn loo_degenerate_skip() {
        let cat = category(vec![
            pair("a", &["b"]),
            pair("b", &["a"]),
            pair("x", &["y"]),
        ]);
        assert_eq!(loo_protocol(&cat, 0).unwrap(), None);
        assert!(loo_protocol(&cat, 9).is_err());
    }

    #[test]
    fn scorer_names() {
        let all = Scorer::all();
        let names: Vec<String> = all.iter().map(|s| s.to_string()).collect();
        assert_eq!(
            names,
            [
                "intcos-densray-original",
                "intcos-densray-complement",
                "intcos-svm-original",
                "intcos-svm-complement",
                "lrcos"
            ]
        );
        assert_eq!(
            Scorer::parse_list("intcos-densray,intcos-svm,lrcos", "original,complement").unwrap(),
            all
        );
        assert!(Scorer::parse_list("3cosadd", "original").is_err());
        assert!(Scorer::parse_list("lrcos", "sideways").is_err());
    }

    #[test]
    fn min_max_constant_is_half() {
        assert_eq!(min_max(&[2.0, 2.0]), vec![0.5, 0.5]);
        assert_eq!(min_max(&[1.0, 3.0, 2.0]), vec![0.0, 1.0, 0.5]);
    }

    fn planted() -> (Embeddings, AnalogyCategory) {
        let p = planted_analogy(20, 50, 12, 0.02, 5);
        let pairs = p.pairs.iter().map(|(l, r)| pair(l, &[r])).collect();
        (
            p.embeddings,
            AnalogyCategory::new("planted", AnalogyGroup::Google, pairs).unwrap(),
        )
    }

    #[test]
    fn similarities_match_explicit_rotation() {
        let (emb, cat) = planted();
        let fold = loo_protocol(&cat, 0).unwrap().unwrap();
        let signal = fold_signal(&fold, &emb).unwrap();
        let opts = AnalogyOptions::default();
        let q = interpretable_direction(&emb, &signal, Method::Svm, &opts, 3)
            .unwrap()
            .unwrap();
        let rot =
            Rotation::new(complete_orthogonal(&q, 11).unwrap(), None, Method::Svm, "x").unwrap();
        let rotated = project(&emb, &rot).unwrap();
        let comp = complement(&rotated, 1).unwrap();
        let query = emb.index(&fold.test.left).unwrap();

        let orig = original_similarities(&emb, query);
        let comp_fast = complement_similarities(&emb, query, &q);
        for v in 0..emb.len() {
            let explicit = cosine(rotated.matrix().row(query), rotated.matrix().row(v)).unwrap();
            assert!((orig[v] - explicit).abs() < 1e-8);
            let explicit = cosine(comp.matrix().row(query), comp.matrix().row(v)).unwrap();
            assert!((comp_fast[v] - explicit).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_column_reduces_to_nearest_neighbour() {
        let (emb, _) = planted();
        let scores = intcos_scores(&emb, 0, None, Space::Original);
        let excl: HashSet<usize> = [0].into_iter().collect();
        let best = argmax(&scores, &excl).unwrap();
        let nn = crate::embedding::nearest(&emb, emb.matrix().row(0), &[emb.vocab().word(0)], 1)
            .unwrap();
        assert_eq!(emb.vocab().word(best), nn[0].0);
    }

    #[test]
    fn planted_world_is_solved() {
        let (emb, cat) = planted();
        let report =
            evaluate(std::slice::from_ref(&cat), &emb, &AnalogyOptions::default()).unwrap();
        let c = &report.categories[0];
        assert_eq!(c.n_evaluated, 20);
        for i in 0..report.scorers.len() {
            assert_eq!(c.precision(i), Some(1.0), "{}", report.scorers[i]);
        }
        assert!(report.folds.iter().all(FoldRecord::is_leak_free));
    }

    #[test]
    fn single_predictions_agree_with_evaluate() {
        let (emb, cat) = planted();
        let opts = AnalogyOptions::default();
        let fold = loo_protocol(&cat, 3).unwrap().unwrap();
        let a = fold.test.left.clone();
        let p = intcos_predict(
            &emb,
            &fold,
            &a,
            Method::DensRay,
            Space::Complement,
            &opts,
            0,
        )
        .unwrap();
        assert_eq!(p, fold.test.right[0]);
        let p = lrcos_predict(&emb, &fold, &a, &opts, 0).unwrap();
        assert_eq!(p, fold.test.right[0]);
        assert!(lrcos_predict(&emb, &fold, "nope", &opts, 0).is_err());
    }

    #[test]
    fn micro_and_macro_differ_with_unequal_sizes() {
        let cat = |n_eval: usize, correct: usize| CategoryResult {
            name: "c".into(),
            group: AnalogyGroup::Google,
            n_pairs: n_eval,
            n_evaluated: n_eval,
            n_skipped: 0,
            correct: vec![correct],
            stats: CosineStats::default(),
        };
        let report = AnalogyReport {
            scorers: vec![Scorer::LrCos],
            categories: vec![cat(10, 10), cat(40, 10)],
            folds: vec![],
        };
        assert!((report.micro_mean(0).unwrap() - 20.0 / 50.0).abs() < 1e-15);
        assert!((report.macro_mean(0).unwrap() - 0.625).abs() < 1e-15);
        assert!((report.macro_std(0).unwrap() - 0.375).abs() < 1e-15);
        let same = AnalogyReport {
            categories: vec![cat(10, 5), cat(40, 20)],
            ..report
        };
        assert_eq!(same.macro_mean(0), Some(0.5));
    }

    #[test]
    fn cosine_stats_match_enumeration() {
        let emb = Embeddings::from_pairs(&[
            ("a", vec![1.0, 0.0, 0.0]),
            ("b", vec![0.0, 1.0, 0.0]),
            ("c", vec![1.0, 1.0, 0.0]),
            ("d", vec![0.0, 0.0, 2.0]),
            ("x", vec![1.0, 0.0, 1.0]),
            ("y", vec![0.0, 3.0, 4.0]),
            ("z", vec![1.0, 2.0, 2.0]),
            ("w", vec![-1.0, 0.0, 0.0]),
        ])
        .unwrap();
        let cat = category(vec![
            pair("a", &["x", "w"]),
            pair("b", &["y"]),
            pair("c", &["z"]),
            pair("d", &["missing"]),
        ]);
        let stats = cosine_stats(&cat, &emb).unwrap();
        let cos =
            |u: &str, v: &str| cosine(emb.vector(u).unwrap(), emb.vector(v).unwrap()).unwrap();
        let inter = (cos("a", "x") + cos("b", "y") + cos("c", "z")) / 3.0;
        let lefts = ["a", "b", "c", "d"];
        let rights = ["x", "w", "y", "z"];
        let brute = |ws: &[&str]| {
            let mut s = Vec::new();
            for i in 0..ws.len() {
                for j in 0..i {
                    s.push(cos(ws[i], ws[j]));
                }
            }
            s.iter().sum::<f64>() / s.len() as f64
        };
        assert!((stats.inter.unwrap() - inter).abs() < 1e-12);
        assert!((stats.intra_left.unwrap() - brute(&lefts)).abs() < 1e-12);
        assert!((stats.intra_right.unwrap() - brute(&rights)).abs() < 1e-12);
    }

    #[test]
    fn identical_lefts_and_orthogonal_pairs() {
        let emb = Embeddings::from_pairs(&[
            ("a", vec![1.0, 0.0]),
            ("b", vec![2.0, 0.0]),
            ("x", vec![0.0, 1.0]),
            ("y", vec![0.0, 5.0]),
        ])
        .unwrap();
        let stats =
            cosine_stats(&category(vec![pair("a", &["x"]), pair("b", &["y"])]), &emb).unwrap();
        assert_eq!(stats.inter, Some(0.0));
        assert_eq!(stats.intra_left, Some(1.0));
    }

    #[test]
    fn report_is_deterministic_and_has_aggregates() {
        let (emb, cat) = planted();
        let opts = AnalogyOptions {
            seed: 7,
            ..AnalogyOptions::default()
        };
        let render = || {
            let mut buf = Vec::new();
            evaluate(std::slice::from_ref(&cat), &emb, &opts)
                .unwrap()
                .write_tsv(&mut buf)
                .unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a, render());
        let lines: Vec<&str> = a.lines().collect();
        assert!(lines[0].starts_with("category\tgroup\tpairs"));
        assert!(lines[1].starts_with("planted\tGA\t20\t20\t0\t"));
        assert!(lines[2].starts_with("micro-mean"));
        assert!(lines[3].starts_with("macro-mean"));
        assert!(lines[4].starts_with("macro-std"));
    }
}
