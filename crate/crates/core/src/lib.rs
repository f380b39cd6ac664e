//! Interpretable orthogonal rotations of word-embedding spaces.
//!
//! The crate computes rotations `Q` such that the first coordinate of `E·Q`
//! tracks a linguistic signal (sentiment, concreteness, gender, an analogy
//! relation), either in closed form ([`densray`]) or from the normal of a
//! linear classifier ([`linear`]), and evaluates them on lexicon induction
//! ([`lexicon`]), debiasing ([`debias`]) and set-based word analogy
//! ([`analogy`]).

pub mod analogy;
pub mod debias;
pub mod densray;
pub mod eigen;
pub mod embedding;
pub mod error;
pub mod kendall;
pub mod lexicon;
pub mod linalg;
pub mod linear;
pub mod seed;
pub mod synthetic;

pub use analogy::{
    cosine_stats, evaluate, intcos_predict, load_analogy_dataset, loo_protocol, lrcos_predict,
    parse_bats, parse_google_analogy, AnalogyCategory, AnalogyGroup, AnalogyOptions, AnalogyPair,
    AnalogyReport, Fold, Scorer, Space,
};
pub use debias::{bias_report, debias, load_wordlist_json, BiasReport, Debiased};
pub use densray::{
    build_a_binary, build_a_continuous, complement, densray, iterate_signals, project,
    signal_spectrum, BinarySignal, ContinuousSignal, Method, Rotation, Signal, WeightMode,
};
pub use eigen::{complete_orthogonal, eig_symmetric, EigenBasis, SymmetricMatrix};
pub use embedding::{
    cosine, load_word2vec_text, nearest, normalize_rows, read_word2vec_text, save_word2vec_text,
    write_word2vec_text, EmbeddingMatrix, Embeddings, Vocabulary,
};
pub use error::{Error, ErrorCategory, Result};
pub use kendall::{kendall_tau, tau_counts, TauCounts};
pub use lexicon::{
    binarize_median, dedup, induce, load_lexicon, parse_lexicon, remove_neutral, run_induction,
    split_disjoint, stability, write_induction_report, write_stability_report, InductionConfig,
    InductionResult, InductionRow, Lexicon, LexiconKind, Predictor, PreparedTask, StabilityRow,
};
pub use linalg::Matrix;
pub use linear::{model_to_rotation, train_logreg, train_svm, train_svr, Hyperparams, LinearModel};
