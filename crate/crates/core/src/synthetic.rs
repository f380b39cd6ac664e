//! Seeded synthetic word spaces with planted, known structure.
//!
//! Each generator returns the embeddings together with the ground truth it
//! planted, so tests can check that a method recovers it.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::densray::{BinarySignal, ContinuousSignal};
use crate::embedding::Embeddings;
use crate::linalg::{dot, normalized};
use crate::seed;

pub fn gaussian(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

/// Uniform draw from the unit sphere.
pub fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        if let Some(v) = normalized(&gaussian(d, rng)) {
            return v;
        }
    }
}

/// A unit vector orthogonal to `u`.
fn orthogonal_unit(u: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut v = gaussian(u.len(), rng);
        let p = dot(&v, u);
        v.iter_mut().zip(u).for_each(|(x, ui)| *x -= p * ui);
        if let Some(v) = normalized(&v) {
            return v;
        }
    }
}

fn add_scaled(acc: &mut [f64], scale: f64, v: &[f64]) {
    acc.iter_mut().zip(v).for_each(|(a, b)| *a += scale * b);
}

fn noisy(base: Vec<f64>, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = base;
    if sigma > 0.0 {
        let z = gaussian(v.len(), rng);
        add_scaled(&mut v, sigma, &z);
    }
    v
}

fn build(rows: Vec<(String, Vec<f64>)>) -> Embeddings {
    Embeddings::from_pairs(&rows)
        .and_then(Embeddings::normalized)
        .expect("generator produced an invalid space")
}

/// Two classes separated along a hidden unit direction.
#[derive(Debug, Clone)]
pub struct PlantedDirection {
    pub embeddings: Embeddings,
    pub direction: Vec<f64>,
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
}

impl PlantedDirection {
    pub fn binary_signal(&self) -> BinarySignal {
        BinarySignal::new("planted", self.positives.clone(), self.negatives.clone())
            .expect("planted classes are valid")
    }

    /// Scores `uᵀe_v`, an exactly linear function of the embeddings.
    pub fn continuous_signal(&self) -> ContinuousSignal {
        let scores = self
            .positives
            .iter()
            .chain(&self.negatives)
            .map(|w| {
                let e = self.embeddings.vector(w).expect("generated word");
                (w.clone(), dot(e, &self.direction))
            })
            .collect();
        ContinuousSignal::new("planted", scores).expect("planted scores are valid")
    }
}

/// `n_words` words `normalize(y·u + σ·z)` with labels `y` alternating
/// `+1, −1` and `z` standard normal.
pub fn planted_direction(n_words: usize, d: usize, sigma: f64, seed: u64) -> PlantedDirection {
    let mut rng = seed::rng(seed);
    let u = random_unit(d, &mut rng);
    let mut rows = Vec::with_capacity(n_words);
    let (mut positives, mut negatives) = (Vec::new(), Vec::new());
    for i in 0..n_words {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        let word = format!("w{i}");
        let v = noisy(u.iter().map(|x| y * x).collect(), sigma, &mut rng);
        if y > 0.0 {
            positives.push(word.clone());
        } else {
            negatives.push(word.clone());
        }
        rows.push((word, v));
    }
    PlantedDirection {
        embeddings: build(rows),
        direction: u,
        positives,
        negatives,
    }
}

/// Two binary signals planted along orthogonal directions `u1 ⊥ u2`, each
/// labelling its own disjoint group of words.
#[derive(Debug, Clone)]
pub struct PlantedPair {
    pub embeddings: Embeddings,
    pub first: (Vec<f64>, BinarySignal),
    pub second: (Vec<f64>, BinarySignal),
}

pub fn planted_orthogonal_pair(
    words_per_signal: usize,
    d: usize,
    sigma: f64,
    seed: u64,
) -> PlantedPair {
    let mut rng = seed::rng(seed);
    let u1 = random_unit(d, &mut rng);
    let u2 = orthogonal_unit(&u1, &mut rng);
    let mut rows = Vec::new();
    let mut make = |prefix: &str, u: &[f64], rng: &mut ChaCha8Rng| {
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for i in 0..words_per_signal {
            let y = if i % 2 == 0 { 1.0 } else { -1.0 };
            let word = format!("{prefix}{i}");
            // shared random content so each signal's classes are not trivially tight
            let mut v = gaussian(d, rng);
            v.iter_mut().for_each(|x| *x *= 0.15);
            add_scaled(&mut v, y, u);
            rows.push((word.clone(), noisy(v, sigma, rng)));
            if y > 0.0 {
                pos.push(word)
            } else {
                neg.push(word)
            }
        }
        BinarySignal::new(prefix, pos, neg).expect("planted classes are valid")
    };
    let s1 = make("a", &u1, &mut rng);
    let s2 = make("b", &u2, &mut rng);
    PlantedPair {
        embeddings: build(rows),
        first: (u1, s1),
        second: (u2, s2),
    }
}

/// A continuous lexicon whose scores are carried by one hidden direction.
#[derive(Debug, Clone)]
pub struct PlantedLexicon {
    pub embeddings: Embeddings,
    pub direction: Vec<f64>,
    pub train: Vec<(String, f64)>,
    pub test: Vec<(String, f64)>,
}

/// Words `normalize(s·u + c + σ·z)` with latent scores `s ~ U(−1, 1)` and a
/// fixed offset `c ⊥ u` shared by all words. With `σ = 0` every word lies in
/// the plane spanned by `u` and `c`, and the coordinate along `u` is a
/// strictly increasing function of `s`.
pub fn planted_lexicon(
    n_train: usize,
    n_test: usize,
    d: usize,
    sigma: f64,
    seed: u64,
) -> PlantedLexicon {
    let mut rng = seed::rng(seed);
    let u = random_unit(d, &mut rng);
    let offset = orthogonal_unit(&u, &mut rng);
    let mut rows = Vec::with_capacity(n_train + n_test);
    let mut entries = Vec::with_capacity(n_train + n_test);
    for i in 0..(n_train + n_test) {
        let s: f64 = rng.random_range(-1.0..1.0);
        let mut v = offset.clone();
        add_scaled(&mut v, s, &u);
        let word = format!("w{i}");
        rows.push((word.clone(), noisy(v, sigma, &mut rng)));
        entries.push((word, s));
    }
    let test = entries.split_off(n_train);
    PlantedLexicon {
        embeddings: build(rows),
        direction: u,
        train: entries,
        test,
    }
}

/// Analogy pairs `(l_i, r_i)` where every right word is its left word
/// shifted by a common offset, plus unrelated distractor words.
#[derive(Debug, Clone)]
pub struct PlantedAnalogy {
    pub embeddings: Embeddings,
    pub offset: Vec<f64>,
    pub pairs: Vec<(String, String)>,
}

/// `l_i = normalize(b_i + σ z)`, `r_i = normalize(b_i + 0.8·u + σ z')` with
/// random unit `b_i`; `n_distractors` further random unit words.
pub fn planted_analogy(
    n_pairs: usize,
    n_distractors: usize,
    d: usize,
    sigma: f64,
    seed: u64,
) -> PlantedAnalogy {
    let mut rng = seed::rng(seed);
    let u = random_unit(d, &mut rng);
    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..n_pairs {
        let base = random_unit(d, &mut rng);
        let left = noisy(base.clone(), sigma, &mut rng);
        let mut right = base;
        add_scaled(&mut right, 0.8, &u);
        let right = noisy(right, sigma, &mut rng);
        let (l, r) = (format!("left{i}"), format!("right{i}"));
        rows.push((l.clone(), left));
        rows.push((r.clone(), right));
        pairs.push((l, r));
    }
    for i in 0..n_distractors {
        rows.push((format!("other{i}"), random_unit(d, &mut rng)));
    }
    PlantedAnalogy {
        embeddings: build(rows),
        offset: u,
        pairs,
    }
}

/// A gender direction shared by word pairs, and occupations carrying a
/// random amount of it.
#[derive(Debug, Clone)]
pub struct PlantedGender {
    pub embeddings: Embeddings,
    pub direction: Vec<f64>,
    pub signal: BinarySignal,
    pub probes: (String, String),
    pub occupations: Vec<String>,
}

/// Pairs `normalize(b_i ± 0.5·u + σz)`; the first pair is (`man`, `woman`).
/// Occupations are `normalize(c_j + β_j·u + 0.3·b_man)` with `β_j ~ U(−0.5, 0.5)`
/// so they are related to the probes beyond gender.
pub fn planted_gender(
    n_pairs: usize,
    n_occupations: usize,
    d: usize,
    sigma: f64,
    seed: u64,
) -> PlantedGender {
    let mut rng = seed::rng(seed);
    let u = random_unit(d, &mut rng);
    let mut rows = Vec::new();
    let (mut male, mut female) = (Vec::new(), Vec::new());
    let mut probe_base = Vec::new();
    for i in 0..n_pairs {
        let base = random_unit(d, &mut rng);
        let (m, f) = if i == 0 {
            probe_base = base.clone();
            ("man".to_string(), "woman".to_string())
        } else {
            (format!("male{i}"), format!("female{i}"))
        };
        let mut vm = base.clone();
        add_scaled(&mut vm, 0.5, &u);
        let mut vf = base;
        add_scaled(&mut vf, -0.5, &u);
        rows.push((m.clone(), noisy(vm, sigma, &mut rng)));
        rows.push((f.clone(), noisy(vf, sigma, &mut rng)));
        male.push(m);
        female.push(f);
    }
    let mut occupations = Vec::with_capacity(n_occupations);
    for j in 0..n_occupations {
        let beta: f64 = rng.random_range(-0.5..0.5);
        let mut v = random_unit(d, &mut rng);
        add_scaled(&mut v, beta, &u);
        add_scaled(&mut v, 0.3, &probe_base);
        let word = format!("job{j}");
        rows.push((word.clone(), noisy(v, sigma, &mut rng)));
        occupations.push(word);
    }
    PlantedGender {
        embeddings: build(rows),
        direction: u,
        signal: BinarySignal::new("gender", male, female).expect("planted classes are valid"),
        probes: ("man".into(), "woman".into()),
        occupations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = planted_direction(10, 4, 0.05, 3);
        let b = planted_direction(10, 4, 0.05, 3);
        assert_eq!(
            a.embeddings.matrix().matrix(),
            b.embeddings.matrix().matrix()
        );
        assert_eq!(a.direction, b.direction);
    }

    #[test]
    fn rows_are_unit_length() {
        let g = planted_gender(5, 10, 8, 0.02, 1);
        for i in 0..g.embeddings.len() {
            let r = g.embeddings.matrix().row(i);
            assert!((dot(r, r) - 1.0).abs() < 1e-12);
        }
        assert_eq!(g.embeddings.len(), 20);
    }

    #[test]
    fn zero_noise_lexicon_is_monotone_along_direction() {
        let p = planted_lexicon(20, 20, 6, 0.0, 9);
        let mut pts: Vec<(f64, f64)> = p
            .train
            .iter()
            .map(|(w, s)| (*s, dot(p.embeddings.vector(w).unwrap(), &p.direction)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pts.windows(2).all(|w| w[0].1 < w[1].1));
    }
}
