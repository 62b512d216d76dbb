//! Subcommand implementations behind the `regender` binary.
//!
//! Every command resolves and checks all of its inputs before it computes
//! anything, and writes its outputs only once the computation succeeded.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use log::{info, warn};

use regender::config::RunConfig;
use regender::eval::{
    bias_report, build_queries, naive_swap_baseline, read_queries_file, score_sentence, tokenize,
    train_ngram, BiasQuery, BiasReport, FixtureScorer, IntrinsicScore, NGramLM, PrefixScorer,
};
use regender::model::{load_params_file, save_params_file, ModelParams};
use regender::pipeline::{to_plain_text, InflectionLexicon, Pipeline, VariantReport};
use regender::training::{format_history, train, Parameterization, TagSpace};
use regender::treebank::{read_conllu_file, serialize_conllu, DepSentence};
use regender::{Error, Result};

/// Comment key recording the 1-based intervened position in CoNLL-U output.
pub const INTERVENED_COMMENT: &str = "intervened";

/// Loads and validates the configuration (defaults when no file is given)
/// and applies a seed override.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}

/// The flag value, else the configured path, else a configuration error.
fn input(flag: Option<&Path>, configured: Option<&PathBuf>, what: &str) -> Result<PathBuf> {
    let p = flag
        .map(Path::to_path_buf)
        .or_else(|| configured.cloned())
        .ok_or_else(|| Error::Config(format!("no {} given (flag or config)", what)))?;
    if !p.is_file() {
        return Err(Error::Data(format!("{} {} does not exist", what, p.display())));
    }
    Ok(p)
}

fn read_treebank(path: &Path) -> Result<Vec<DepSentence>> {
    let parsed = read_conllu_file(path)?;
    if !parsed.rejected.is_empty() {
        warn!("{}: skipped {} invalid trees", path.display(), parsed.rejected.len());
    }
    Ok(parsed.sentences)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

/// The configured lexicon file if any, else one built from `corpus`; the
/// configured supplement is applied on top.
pub fn load_lexicon(cfg: &RunConfig, corpus: &[DepSentence]) -> Result<InflectionLexicon> {
    let mut lex = match &cfg.data.lexicon {
        Some(p) => {
            let mut lex = InflectionLexicon::new();
            lex.supplement_file(p)?;
            lex
        }
        None => InflectionLexicon::from_corpus(corpus),
    };
    if let Some(p) = &cfg.data.lexicon_supplement {
        lex.supplement_file(p)?;
    }
    Ok(lex)
}

/// Assembles the transformation pipeline for a model.
pub fn pipeline(cfg: &RunConfig, params: ModelParams, lexicon: InflectionLexicon) -> Result<Pipeline> {
    Ok(Pipeline {
        params,
        gender: cfg.gender(),
        log_alpha: cfg.intervention.log_alpha,
        policy: cfg.intervention.unknown_subtags,
        gazetteer: cfg.gazetteer()?,
        lexicon,
        rules: cfg.suffix_rules(),
        include_propn: cfg.intervention.include_propn,
    })
}

pub struct TrainArgs {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub parameterization: Option<Parameterization>,
    pub model_out: PathBuf,
    /// Defaults to the model path with a `.history.tsv` suffix.
    pub history_out: Option<PathBuf>,
}

pub struct TrainSummary {
    pub epochs: usize,
    pub final_dev_bits: f64,
    /// Mean dev NLL of the uniform model, for comparison.
    pub uniform_dev_bits: f64,
}

pub fn cmd_train(cfg: &RunConfig, args: &TrainArgs) -> Result<TrainSummary> {
    let train_path = input(args.train.as_deref(), cfg.data.train.as_ref(), "training treebank")?;
    let dev_path = match args.dev.as_deref().or(cfg.data.dev.as_deref()) {
        Some(p) => Some(input(Some(p), None, "dev treebank")?),
        None => None,
    };
    let choice = args.parameterization.unwrap_or(cfg.parameterization);

    let train_set = read_treebank(&train_path)?;
    let dev_set = match &dev_path {
        Some(p) => read_treebank(p)?,
        None => Vec::new(),
    };
    let outcome = train(&train_set, &dev_set, &cfg.train, choice)?;
    let dev_ref = if dev_set.is_empty() { &train_set } else { &dev_set };
    let space: &TagSpace = &outcome.space;
    let uniform_dev_bits =
        dev_ref.iter().map(|s| space.uniform_bits(s.len())).sum::<f64>() / dev_ref.len() as f64;
    let final_dev_bits = outcome
        .history
        .last()
        .map(|r| r.dev_bits)
        .unwrap_or(uniform_dev_bits);

    let history_out = args
        .history_out
        .clone()
        .unwrap_or_else(|| args.model_out.with_extension("history.tsv"));
    if let Some(dir) = args.model_out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    save_params_file(&outcome.params, &args.model_out)?;
    write(&history_out, format_history(&outcome.history))?;
    Ok(TrainSummary {
        epochs: outcome.history.len(),
        final_dev_bits,
        uniform_dev_bits,
    })
}

pub struct InterveneArgs {
    pub model: PathBuf,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub report: Option<PathBuf>,
    /// Only sentences with this id.
    pub sentence: Option<String>,
    /// Only this 1-based token position.
    pub position: Option<usize>,
}

/// One output sentence per (selected sentence, animate noun), with id
/// `{id}-n{position}` and an `intervened = {position}` comment.
pub fn cmd_intervene(cfg: &RunConfig, args: &InterveneArgs) -> Result<usize> {
    let input_path = input(args.input.as_deref(), cfg.data.test.as_ref(), "input treebank")?;
    let model_path = input(Some(&args.model), None, "model")?;
    let corpus = read_treebank(&input_path)?;
    let params = load_params_file(&model_path)?;
    let lexicon = match &cfg.data.train {
        Some(t) => load_lexicon(cfg, &read_treebank(t)?)?,
        None => load_lexicon(cfg, &corpus)?,
    };
    let p = pipeline(cfg, params, lexicon)?;

    let mut out = Vec::new();
    let mut report = String::new();
    for s in &corpus {
        if args.sentence.as_deref().is_some_and(|id| id != s.id()) {
            continue;
        }
        let nouns: Vec<usize> = p
            .animate_nouns(s)
            .into_iter()
            .filter(|&i| args.position.is_none_or(|q| q == i + 1))
            .collect();
        if nouns.is_empty() {
            warn!("sentence {}: no animate noun to intervene on", s.id());
            continue;
        }
        for pos in nouns {
            let (t, r) = p.intervene(s, pos)?;
            let mut comments = t.comments().to_vec();
            comments.push(format!("{} = {}", INTERVENED_COMMENT, pos + 1));
            let id = format!("{}-n{}", s.id(), pos + 1);
            out.push(DepSentence::with_comments(id, t.tokens().to_vec(), comments)?);
            report.push_str(&r.to_string());
        }
    }
    write(&args.output, serialize_conllu(&out))?;
    if let Some(path) = &args.report {
        write(path, report)?;
    }
    Ok(out.len())
}

pub struct AugmentArgs {
    /// Required unless `swap` is set.
    pub model: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    /// Naive swapping instead of the model.
    pub swap: bool,
    /// Plain-text copy of the output, one sentence per line.
    pub text: Option<PathBuf>,
    /// TSV listing every generated variant.
    pub report: Option<PathBuf>,
}

pub struct AugmentSummary {
    pub input: usize,
    pub output: usize,
    pub failures: usize,
}

fn variants_tsv(variants: &[VariantReport]) -> String {
    let mut out = String::from("source\tvariant\tswapped\tchanged_tags\tflagged\n");
    for v in variants {
        let swapped: Vec<String> = v.swapped.iter().map(|i| i.to_string()).collect();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            v.source_id,
            v.variant_id,
            swapped.join(","),
            v.changed_tags,
            v.flagged
        ));
    }
    out
}

pub fn cmd_augment(cfg: &RunConfig, args: &AugmentArgs) -> Result<AugmentSummary> {
    let input_path = input(args.input.as_deref(), cfg.data.train.as_ref(), "input treebank")?;
    let model_path = if args.swap {
        None
    } else {
        let m = args
            .model
            .as_deref()
            .ok_or_else(|| Error::Config("augment needs --model unless --swap is given".into()))?;
        Some(input(Some(m), None, "model")?)
    };
    let corpus = read_treebank(&input_path)?;
    let lexicon = load_lexicon(cfg, &corpus)?;
    let gazetteer = cfg.gazetteer()?;

    let (sentences, variants, failures) = match &model_path {
        None => {
            let out =
                naive_swap_baseline(&corpus, &gazetteer, &lexicon, &cfg.suffix_rules(), &cfg.gender())?;
            (out, Vec::new(), 0)
        }
        Some(m) => {
            let p = pipeline(cfg, load_params_file(m)?, lexicon)?;
            let aug = p.augment_corpus(&corpus, cfg.intervention.max_variants);
            (aug.sentences, aug.variants, aug.failures.len())
        }
    };
    info!("{} sentences in, {} out", corpus.len(), sentences.len());
    write(&args.output, serialize_conllu(&sentences))?;
    if let Some(path) = &args.text {
        write(path, to_plain_text(&sentences))?;
    }
    if let Some(path) = &args.report {
        write(path, variants_tsv(&variants))?;
    }
    Ok(AugmentSummary {
        input: corpus.len(),
        output: sentences.len(),
        failures,
    })
}

pub struct IntrinsicArgs {
    pub source: PathBuf,
    pub gold: PathBuf,
    /// Trained models, scored after the rule baseline.
    pub models: Vec<PathBuf>,
    pub output: Option<PathBuf>,
}

/// The intervened position (0-based) of a gold sentence: its
/// `intervened = N` comment, else the first animate noun whose tag differs
/// from the source.
fn intervened_position(p: &Pipeline, source: &DepSentence, gold: &DepSentence) -> Result<usize> {
    for c in gold.comments() {
        if let Some((k, v)) = c.split_once('=') {
            if k.trim() == INTERVENED_COMMENT {
                let n: usize = v.trim().parse().map_err(|_| Error::Validation {
                    sentence_id: gold.id().to_string(),
                    message: format!("bad intervened comment '{}'", c),
                })?;
                if n == 0 || n > source.len() {
                    return Err(Error::Validation {
                        sentence_id: gold.id().to_string(),
                        message: format!("intervened position {} out of range", n),
                    });
                }
                return Ok(n - 1);
            }
        }
    }
    p.animate_nouns(source)
        .into_iter()
        .find(|&i| source.tokens()[i].tag != gold.tokens()[i].tag)
        .ok_or_else(|| Error::Validation {
            sentence_id: gold.id().to_string(),
            message: "no intervened noun found".into(),
        })
}

fn system_name(params: &ModelParams, path: Option<&Path>, taken: &[String]) -> String {
    let kind = params.kind().to_string();
    if taken.contains(&kind) {
        path.map(|p| p.display().to_string()).unwrap_or(kind)
    } else {
        kind
    }
}

/// Scores the rule baseline and every model on aligned source/gold pairs.
/// Returns the TSV table, one row per system.
pub fn cmd_eval_intrinsic(cfg: &RunConfig, args: &IntrinsicArgs) -> Result<String> {
    let source_path = input(Some(&args.source), None, "source treebank")?;
    let gold_path = input(Some(&args.gold), None, "gold treebank")?;
    let model_paths = args
        .models
        .iter()
        .map(|m| input(Some(m), None, "model"))
        .collect::<Result<Vec<_>>>()?;
    let sources = read_treebank(&source_path)?;
    let golds = read_treebank(&gold_path)?;
    if sources.len() != golds.len() {
        return Err(Error::Data(format!(
            "{} source sentences but {} gold sentences",
            sources.len(),
            golds.len()
        )));
    }
    let lexicon = match &cfg.data.train {
        Some(t) => load_lexicon(cfg, &read_treebank(t)?)?,
        None => load_lexicon(cfg, &sources)?,
    };

    let mut systems: Vec<(String, ModelParams)> =
        vec![("baseline".to_string(), ModelParams::Baseline(cfg.baseline_rules()))];
    for path in &model_paths {
        let params = load_params_file(path)?;
        let taken: Vec<String> = systems.iter().map(|(n, _)| n.clone()).collect();
        systems.push((system_name(&params, Some(path), &taken), params));
    }

    let mut table = format!("{}\n", IntrinsicScore::TSV_HEADER);
    for (name, params) in systems {
        let p = pipeline(cfg, params, lexicon.clone())?;
        let mut total = IntrinsicScore::default();
        for (src, gold) in sources.iter().zip(&golds) {
            let pos = intervened_position(&p, src, gold)?;
            let (pred, _) = p.intervene(src, pos)?;
            total += score_sentence(gold, &pred, src, pos)?;
        }
        table.push_str(&total.tsv_row(&name));
        table.push('\n');
    }
    if let Some(path) = &args.output {
        write(path, &table)?;
    }
    Ok(table)
}

pub struct BiasArgs {
    pub original: Option<PathBuf>,
    pub swap: Option<PathBuf>,
    pub mrf: Option<PathBuf>,
    /// Injected log-probabilities in place of trained language models.
    pub fixture: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub output: PathBuf,
    /// Long-format data file (language, condition, metric, value).
    pub plot: Option<PathBuf>,
}

/// Tokenized sentences from CoNLL-U (`.conllu`) or plain text, one
/// sentence per line.
pub fn read_lm_corpus(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = if path.extension().is_some_and(|e| e == "conllu") {
        to_plain_text(&read_treebank(path)?)
    } else {
        fs::read_to_string(path)?
    };
    Ok(text.lines().map(tokenize).filter(|l| !l.is_empty()).collect())
}

fn queries(cfg: &RunConfig, path: Option<&Path>) -> Result<Vec<BiasQuery>> {
    if let Some(p) = path {
        return read_queries_file(input(Some(p), None, "queries file")?);
    }
    let profile = cfg
        .profile
        .as_ref()
        .ok_or_else(|| Error::Config("no queries file and no language profile".into()))?;
    let (dm, df) = &profile.determiners;
    build_queries(&cfg.gazetteer()?, &profile.adjectives, (dm, df))
}

pub fn cmd_eval_bias(cfg: &RunConfig, args: &BiasArgs) -> Result<BiasReport> {
    let queries = queries(cfg, args.queries.as_deref())?;
    let report = match &args.fixture {
        Some(f) => {
            let f = input(Some(f), None, "fixture")?;
            let conditions = FixtureScorer::read_conditions(BufReader::new(fs::File::open(&f)?))?;
            let refs: Vec<(&str, &dyn PrefixScorer)> = conditions
                .iter()
                .map(|(n, s)| (n.as_str(), s as &dyn PrefixScorer))
                .collect();
            bias_report(&refs, &queries)
        }
        None => {
            let named = [("original", &args.original), ("swap", &args.swap), ("mrf", &args.mrf)];
            let mut paths = Vec::new();
            for (name, p) in named {
                if let Some(p) = p {
                    paths.push((name, input(Some(p), None, &format!("{} corpus", name))?));
                }
            }
            if paths.is_empty() {
                return Err(Error::Config("eval-bias needs corpora or a fixture".into()));
            }
            let mut lms: Vec<(&str, NGramLM)> = Vec::new();
            for (name, p) in paths {
                let corpus = read_lm_corpus(&p)?;
                lms.push((name, train_ngram(&corpus, cfg.ngram.order, cfg.ngram.delta)?));
            }
            let refs: Vec<(&str, &dyn PrefixScorer)> =
                lms.iter().map(|(n, lm)| (*n, lm as &dyn PrefixScorer)).collect();
            bias_report(&refs, &queries)
        }
    };
    write(&args.output, report.to_tsv())?;
    if let Some(p) = &args.plot {
        write(p, report.to_long_format(cfg.language()))?;
    }
    Ok(report)
}

pub struct LexiconArgs {
    pub treebank: Option<PathBuf>,
    pub supplement: Option<PathBuf>,
    pub output: PathBuf,
}

pub fn cmd_build_lexicon(cfg: &RunConfig, args: &LexiconArgs) -> Result<usize> {
    let tb = input(args.treebank.as_deref(), cfg.data.train.as_ref(), "treebank")?;
    let supplement = match args.supplement.as_deref().or(cfg.data.lexicon_supplement.as_deref()) {
        Some(p) => Some(input(Some(p), None, "lexicon supplement")?),
        None => None,
    };
    let mut lex = InflectionLexicon::from_corpus(&read_treebank(&tb)?);
    if let Some(p) = supplement {
        lex.supplement_file(p)?;
    }
    write(&args.output, lex.to_tsv())?;
    Ok(lex.len())
}
