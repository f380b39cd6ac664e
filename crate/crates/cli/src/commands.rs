//! Subcommand implementations. Each reads its inputs, resolves settings
//! against the optional config file and writes its report.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use densray_core::lexicon::binarize_median;
use densray_core::linear::Schedule;
use densray_core::seed::{self, stream};
use densray_core::{
    bias_report, debias, dedup, densray, evaluate, load_analogy_dataset, load_lexicon,
    load_word2vec_text, load_wordlist_json, model_to_rotation, remove_neutral, run_induction,
    stability, train_logreg, train_svm, train_svr, write_induction_report, write_stability_report,
    AnalogyOptions, BinarySignal, Embeddings, Error, Hyperparams, InductionConfig, Lexicon,
    LexiconKind, Method, PreparedTask, Scorer, Signal, WeightMode,
};

use crate::config::{Config, Resolver};
use crate::{
    AnalogyArgs, CliError, Command, Common, DebiasArgs, InduceArgs, StabilityArgs, TrainArgs,
    TrainerArgs,
};

type Result<T> = std::result::Result<T, CliError>;

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Induce(a) => induce(a),
        Command::Analogy(a) => analogy(a),
        Command::Debias(a) => debias_cmd(a),
        Command::Stability(a) => stability_cmd(a),
    }
}

struct Setup {
    emb: Embeddings,
    seed: u64,
    lowercase: bool,
}

fn resolver(common: &Common) -> Result<Resolver> {
    let config = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    Ok(Resolver::new(config))
}

fn setup(r: &Resolver, common: Common) -> Result<Setup> {
    let path: PathBuf = r.req(common.emb, "emb")?;
    let max_vocab: Option<usize> = r.opt(common.max_vocab, "max-vocab")?;
    let seed = r.or(common.seed, "seed", 0)?;
    let lowercase = r.switch(common.lowercase, "lowercase")?;
    let emb = load_word2vec_text(&path, max_vocab)?.normalized()?;
    Ok(Setup {
        emb,
        seed,
        lowercase,
    })
}

fn hyperparams(r: &Resolver, t: &TrainerArgs) -> Result<Hyperparams> {
    let d = Hyperparams::default();
    Ok(Hyperparams {
        c: r.or(t.c, "c", d.c)?,
        epsilon: r.or(t.epsilon, "epsilon", d.epsilon)?,
        epochs: r.or(t.epochs, "epochs", d.epochs)?,
        schedule: parse_core::<Schedule>(r.opt(t.schedule.clone(), "schedule")?)?
            .unwrap_or(d.schedule),
        seed: d.seed,
        balanced: r.switch(t.balanced, "balanced")?,
    })
}

fn weights(r: &Resolver, flag: Option<String>) -> Result<WeightMode> {
    Ok(parse_core::<WeightMode>(r.opt(flag, "weights")?)?.unwrap_or_default())
}

/// Parses with the type's own `FromStr`, keeping its core error category.
fn parse_core<T>(value: Option<String>) -> Result<Option<T>>
where
    T: std::str::FromStr<Err = Error>,
{
    Ok(value.map(|v| v.parse::<T>()).transpose()?)
}

fn kind(r: &Resolver, flag: Option<String>) -> Result<LexiconKind> {
    Ok(parse_core::<LexiconKind>(r.opt(flag, "kind")?)?.unwrap_or(LexiconKind::Binary))
}

fn methods(list: &str) -> Result<Vec<Method>> {
    let methods = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<std::result::Result<Vec<Method>, Error>>()?;
    if methods.is_empty() {
        return Err(CliError::Usage("no methods given".into()));
    }
    Ok(methods)
}

fn lexicon(path: &Path, kind: LexiconKind, lowercase: bool) -> Result<Lexicon> {
    let lex = load_lexicon(path, kind)?;
    Ok(if lowercase {
        lex.map_tokens(str::to_lowercase)
    } else {
        lex
    })
}

/// Writes the report to `out`, or to stdout.
fn emit(out: Option<&Path>, body: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    body(&mut buf).expect("writing to memory cannot fail");
    match out {
        Some(path) => fs::write(path, &buf).map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(&buf)
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Output {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn train(a: TrainArgs) -> Result<()> {
    let r = resolver(&a.common)?;
    let s = setup(&r, a.common)?;
    let path: PathBuf = r.req(a.lexicon, "lexicon")?;
    let kind = kind(&r, a.kind)?;
    let method: Method = parse_core(Some(r.req(a.method, "method")?))?.expect("value given");
    let weights = weights(&r, a.trainer.weights.clone())?;
    let mut hp = hyperparams(&r, &a.trainer)?;
    hp.seed = seed::derive(s.seed, &[stream::TRAINING]);
    let as_rotation = r.switch(a.rotation, "rotation")?;
    let out: PathBuf = r.req(a.out, "out")?;
    r.finish()?;

    let lex = dedup(&lexicon(&path, kind, s.lowercase)?).restrict_to(&s.emb);
    let (scores, binary) = match kind {
        LexiconKind::Binary => {
            let b = remove_neutral(&lex)?;
            (b.clone(), b)
        }
        LexiconKind::Continuous => {
            let b = binarize_median(&lex)?;
            (lex, b)
        }
    };
    let emb = &s.emb;
    let write_model = |model: densray_core::LinearModel| -> Result<()> {
        if as_rotation {
            let seed = seed::derive(s.seed, &[stream::COMPLETION]);
            model_to_rotation(&model, emb.dim(), seed)?.save(&out)?;
        } else {
            model.save(&out)?;
        }
        Ok(())
    };
    match method {
        Method::DensRay => {
            let signal: Signal = match kind {
                LexiconKind::Binary => binary.binary_signal()?.into(),
                LexiconKind::Continuous => scores.continuous_signal()?.into(),
            };
            densray(emb, &signal, weights)?.save(&out)?;
        }
        Method::Svm => write_model(train_svm(emb, &binary.binary_signal()?, &hp)?)?,
        Method::LogReg => write_model(train_logreg(emb, &binary.binary_signal()?, &hp)?)?,
        Method::Svr => write_model(train_svr(emb, &scores.continuous_signal()?, &hp)?)?,
    }
    Ok(())
}

fn induce(a: InduceArgs) -> Result<()> {
    let r = resolver(&a.common)?;
    let s = setup(&r, a.common)?;
    let train = r.list(a.train, "train")?;
    let test = r.list(a.test, "test")?;
    if train.is_empty() || train.len() != test.len() {
        return Err(CliError::Usage(format!(
            "need matching --train/--test lists, got {} and {}",
            train.len(),
            test.len()
        )));
    }
    let kind = kind(&r, a.kind)?;
    let methods = methods(&r.or(a.methods, "methods", "densray,svm,svr".to_string())?)?;
    let config = InductionConfig {
        weights: weights(&r, a.trainer.weights.clone())?,
        hyperparams: hyperparams(&r, &a.trainer)?,
        seed: s.seed,
    };
    let out: Option<PathBuf> = r.opt(a.out, "out")?;
    r.finish()?;

    let mut rows = Vec::new();
    for (train_path, test_path) in train.iter().zip(&test) {
        let train_lex = lexicon(Path::new(train_path), kind, s.lowercase)?;
        let test_lex = lexicon(Path::new(test_path), kind, s.lowercase)?;
        let task = PreparedTask::new(train_lex.name.clone(), &train_lex, &test_lex)?;
        for &m in &methods {
            rows.push(run_induction(&s.emb, &task, m, &config)?.0);
        }
    }
    emit(out.as_deref(), |w| write_induction_report(w, &rows))
}

fn analogy(a: AnalogyArgs) -> Result<()> {
    let r = resolver(&a.common)?;
    let s = setup(&r, a.common)?;
    let dataset: PathBuf = r.req(a.dataset, "dataset")?;
    let methods = r.or(
        a.methods,
        "methods",
        "intcos-densray,intcos-svm,lrcos".to_string(),
    )?;
    let spaces = r.or(a.space, "space", "original,complement".to_string())?;
    let include_train = r.switch(a.include_train_words, "include-train-words")?;
    let mut hp = hyperparams(&r, &a.trainer)?;
    hp.seed = s.seed;
    let opts = AnalogyOptions {
        scorers: Scorer::parse_list(&methods, &spaces)?,
        weights: weights(&r, a.trainer.weights.clone())?,
        hyperparams: hp,
        exclude_query: true,
        exclude_train_words: !include_train,
        seed: s.seed,
    };
    let out: Option<PathBuf> = r.opt(a.out, "out")?;
    r.finish()?;

    let mut categories = load_analogy_dataset(&dataset)?;
    if s.lowercase {
        categories = categories
            .iter()
            .map(|c| c.map_tokens(str::to_lowercase))
            .collect();
    }
    let report = evaluate(&categories, &s.emb, &opts)?;
    emit(out.as_deref(), |w| report.write_tsv(w))
}

/// Reads `a<TAB>b` lines into a two-class signal; `#` starts a comment.
fn read_pairs(path: &Path, lowercase: bool, emb: &Embeddings) -> Result<BinarySignal> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (x, y) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected `word<TAB>word`".into(),
        })?;
        let (x, y) = if lowercase {
            (x.trim().to_lowercase(), y.trim().to_lowercase())
        } else {
            (x.trim().to_string(), y.trim().to_string())
        };
        if emb.vocab().contains(&x) && emb.vocab().contains(&y) {
            a.push(x);
            b.push(y);
        }
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "pairs".into());
    Ok(BinarySignal::new(name, a, b)?)
}

fn debias_cmd(a: DebiasArgs) -> Result<()> {
    let r = resolver(&a.common)?;
    let s = setup(&r, a.common)?;
    let pairs: PathBuf = r.req(a.pairs, "pairs")?;
    let wordlist: PathBuf = r.req(a.wordlist, "wordlist")?;
    let probes = r.or(a.probes, "probes", "man,woman".to_string())?;
    let drop = r.or(a.drop, "drop", 1)?;
    let top = r.or(a.top, "top", 5)?;
    let renormalize = r.switch(a.renormalize, "renormalize")?;
    let weights = weights(&r, a.weights)?;
    let out: PathBuf = r.req(a.out, "out")?;
    r.finish()?;

    let norm = |t: &str| {
        if s.lowercase {
            t.trim().to_lowercase()
        } else {
            t.trim().to_string()
        }
    };
    let (pa, pb) = probes
        .split_once(',')
        .map(|(x, y)| (norm(x), norm(y)))
        .ok_or_else(|| CliError::Usage(format!("--probes must be `A,B`, got `{probes}`")))?;
    let signal = read_pairs(&pairs, s.lowercase, &s.emb)?;
    let mut words = load_wordlist_json(&wordlist)?;
    if s.lowercase {
        let mut seen = HashSet::new();
        words = words
            .iter()
            .map(|w| w.to_lowercase())
            .filter(|w| seen.insert(w.clone()))
            .collect();
    }

    let result = debias(&s.emb, &signal, drop, weights)?;
    let complement = if renormalize {
        result.complement.normalized()?
    } else {
        result.complement
    };
    let report = bias_report(&s.emb, &complement, (&pa, &pb), &words, top)?;

    fs::create_dir_all(&out).map_err(|source| CliError::Output {
        path: out.clone(),
        source,
    })?;
    emit(Some(&out.join("bias_scatter.csv")), |w| {
        report.write_scatter_csv(w)
    })?;
    emit(Some(&out.join("bias_top.tsv")), |w| {
        report.write_summary_tsv(w)
    })
}

fn stability_cmd(a: StabilityArgs) -> Result<()> {
    let r = resolver(&a.common)?;
    let s = setup(&r, a.common)?;
    let train: PathBuf = r.req(a.train, "train")?;
    let test: PathBuf = r.req(a.test, "test")?;
    let kind = kind(&r, a.kind)?;
    let methods = methods(&r.or(a.methods, "methods", "densray,svm,svr".to_string())?)?;
    let sizes: String = r.req(a.sizes, "sizes")?;
    let sizes = sizes
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Usage(format!("--sizes: `{}`: {e}", v.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    let samples = r.or(a.samples, "samples", 40)?;
    let config = InductionConfig {
        weights: weights(&r, a.trainer.weights.clone())?,
        hyperparams: hyperparams(&r, &a.trainer)?,
        seed: s.seed,
    };
    let out: Option<PathBuf> = r.opt(a.out, "out")?;
    r.finish()?;

    let train_lex = lexicon(&train, kind, s.lowercase)?;
    let test_lex = lexicon(&test, kind, s.lowercase)?;
    let task = PreparedTask::new(train_lex.name.clone(), &train_lex, &test_lex)?;
    let rows = stability(&s.emb, &task, &methods, &sizes, samples, &config)?;
    emit(out.as_deref(), |w| write_stability_report(w, &rows))
}
