//! Kendall's tau-b in `O(n log n)` (Knight's merge-sort algorithm).

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Integer pair statistics from which tau-b is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TauCounts {
    /// Concordant minus discordant pairs.
    pub score: i64,
    /// Pairs not tied in the first list.
    pub untied_a: u64,
    /// Pairs not tied in the second list.
    pub untied_b: u64,
}

impl TauCounts {
    /// `(C − D) / √((C + D + T_b)(C + D + T_a))`; `None` when either list is
    /// entirely tied.
    pub fn tau_b(&self) -> Option<f64> {
        if self.untied_a == 0 || self.untied_b == 0 {
            return None;
        }
        Some(self.score as f64 / ((self.untied_a as f64) * (self.untied_b as f64)).sqrt())
    }
}

fn tied_pairs(run: u64) -> u64 {
    run * run.saturating_sub(1) / 2
}

/// Sum of `t(t−1)/2` over runs of equal consecutive values.
fn count_ties<T>(items: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for w in items.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += tied_pairs(run);
            run = 1;
        }
    }
    total + tied_pairs(run)
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_sort_swaps(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_sort_swaps(&mut v[..mid], buf) + merge_sort_swaps(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Pair counts for tau-b.
pub fn tau_counts(a: &[f64], b: &[f64]) -> Result<TauCounts> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument(
            "Kendall's tau needs at least 2 observations".into(),
        ));
    }
    if !a.iter().chain(b).all(|v| v.is_finite()) {
        return Err(Error::NonFinite("rank correlation input".into()));
    }
    let n = a.len() as u64;
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let ties_a = count_ties(&pairs, |x, y| x.0 == y.0);
    let ties_joint = count_ties(&pairs, |x, y| x.0 == y.0 && x.1 == y.1);

    let mut sorted_b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(sorted_b.len());
    let swaps = merge_sort_swaps(&mut sorted_b, &mut buf);
    let ties_b = count_ties(&sorted_b, |x, y| x.partial_cmp(y) == Some(Ordering::Equal));

    let total = n * (n - 1) / 2;
    let score = total as i64 - ties_a as i64 - ties_b as i64 + ties_joint as i64 - 2 * swaps as i64;
    Ok(TauCounts {
        score,
        untied_a: total - ties_a,
        untied_b: total - ties_b,
    })
}

/// Kendall's tau-b rank correlation.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    tau_counts(a, b)?.tau_b().ok_or_else(|| {
        Error::InvalidArgument("Kendall's tau is undefined for an all-tied list".into())
    })
}
