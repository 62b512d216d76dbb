//! Acceptance criteria, one verdict line each.
//!
//! Runs without the libtest harness so the verdicts always reach stdout.
//! The process fails when any criterion fails, except criteria listed as
//! known discrepancies of the published numbers, which print `FAIL` but do
//! not fail the run.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{all_tags, gradient_check, random_corpus, random_params, random_tree};
use regender::config::LanguageProfile;
use regender::eval::{
    bias_report, naive_swap_baseline, score_sentence, tokenize, train_ngram, BiasQuery,
    FixtureScorer, IntrinsicScore, NGramLM, PrefixScorer,
};
use regender::inference::{brute_force, max_product, sum_product};
use regender::model::{LinearParams, ModelParams};
use regender::pipeline::{intervene, to_plain_text, InflectionLexicon, Pipeline, SuffixRules};
use regender::synthetic::{self, generate_corpus, intervention_cases};
use regender::training::{initial_params, nll, train, Parameterization, TrainConfig};
use regender::treebank::{
    read_conllu_file, serialize_conllu, DepSentence, GenderConfig, SubtagVocab,
    UnknownSubtagPolicy,
};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Criterion {
    name: &'static str,
    /// Set when the published numbers themselves cannot meet the criterion.
    known_discrepancy: bool,
    run: fn() -> Verdict,
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn inference_oracle() -> Verdict {
    let start = Instant::now();
    let (mut z, mut node, mut edge) = (0.0f64, 0.0f64, 0.0f64);
    let mut argmax_mismatch = 0;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_tree(&mut rng, 7, 4);
        let (bp, bf) = match (sum_product(&g), brute_force(&g)) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => return Verdict::Fail(format!("seed {}: {:?} / {:?}", seed, a.err(), b.err())),
        };
        z = z.max((bp.log_z - bf.log_z).exp_m1().abs());
        for (a, b) in bp.node_marginals.iter().flatten().zip(bf.node_marginals.iter().flatten()) {
            node = node.max((a - b).abs());
        }
        for (a, b) in bp.edge_marginals.iter().flatten().zip(bf.edge_marginals.iter().flatten()) {
            edge = edge.max((a - b).abs());
        }
        if max_product(&g).ok() != bf.argmax {
            argmax_mismatch += 1;
        }
    }
    let t = start.elapsed();
    verdict(
        z <= 1e-9 && node <= 1e-9 && edge <= 1e-9 && argmax_mismatch == 0 && within(t, 30),
        format!(
            "1000 trees: max Z rel err {:.1e}, node {:.1e}, edge {:.1e}, argmax mismatches {}, {:.1?}",
            z, node, edge, argmax_mismatch, t
        ),
    )
}

fn gradients() -> Verdict {
    let start = Instant::now();
    let space = all_tags();
    let mut worst = [0.0f64; 2];
    for (k, choice) in [Parameterization::Linear, Parameterization::Neural].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        for _ in 0..50 {
            let batch = random_corpus(&mut rng, 1, 5);
            let params = random_params(&mut rng, &batch, choice, 0.5);
            worst[k] = worst[k].max(gradient_check(&batch, &params, &space, 1e-4, 1e-5, 1e-4));
        }
    }
    let t = start.elapsed();
    verdict(
        worst[0] <= 1e-4 && worst[1] <= 1e-3 && within(t, 120),
        format!(
            "50 pairs each: linear worst rel err {:.1e} (tol 1e-4), neural {:.1e} (tol 1e-3), {:.1?}",
            worst[0], worst[1], t
        ),
    )
}

fn uniform_closed_form() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let corpus = random_corpus(&mut rng, 100, 7);
    let space = all_tags();
    let params = ModelParams::Linear(LinearParams::zeros(
        SubtagVocab::from_tags(space.tags()),
        regender::model::edge_keys(&corpus),
    ));
    let mut worst = 0.0f64;
    for s in &corpus {
        match nll(s, &params, &space) {
            Ok(bits) => worst = worst.max((bits - s.len() as f64 * (space.len() as f64).log2()).abs()),
            Err(e) => return Verdict::Fail(format!("{}: {}", s.id(), e)),
        }
    }
    verdict(worst <= 1e-9, format!("100 sentences, |M| = {}: max |nll - n log2 |M|| = {:.1e} bits", space.len(), worst))
}

fn alpha_limit() -> Verdict {
    let gender = GenderConfig::default();
    let mut sentences: Vec<DepSentence> =
        intervention_cases(200, 31).unwrap().into_iter().map(|c| c.source).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    sentences.extend(random_corpus(&mut rng, 200, 7));
    let params = initial_params(&sentences, Parameterization::Linear, &TrainConfig::default());
    let (mut runs, mut violations) = (0, 0);
    for s in &sentences {
        for (p, t) in s.tokens().iter().enumerate() {
            if !gender.is_gendered(&t.tag) {
                continue;
            }
            let tags = match intervene(s, p, &params, &gender, 50.0, UnknownSubtagPolicy::Error) {
                Ok(t) => t,
                Err(e) => return Verdict::Fail(format!("{}: {}", s.id(), e)),
            };
            runs += 1;
            let changed: Vec<usize> =
                (0..s.len()).filter(|&i| tags[i] != s.tokens()[i].tag).collect();
            if changed != [p] {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0 && runs > 0,
        format!("log alpha = 50, uniform psi: {} interventions, {} changed more than the clamp", runs, violations),
    )
}

fn lm(sentences: &[DepSentence]) -> NGramLM {
    let lines: Vec<Vec<String>> = to_plain_text(sentences).lines().map(tokenize).collect();
    train_ngram(&lines, 3, 0.1).expect("non-empty corpus")
}

fn synthetic_experiment() -> Verdict {
    let start = Instant::now();
    let train_set = generate_corpus(2000, 1, "train").unwrap();
    let dev = generate_corpus(200, 2, "dev").unwrap();
    let outcome = match train(&train_set, &dev, &TrainConfig::default(), Parameterization::Linear) {
        Ok(o) => o,
        Err(e) => return Verdict::Fail(format!("training: {}", e)),
    };
    let p = Pipeline {
        params: outcome.params,
        gender: GenderConfig::default(),
        log_alpha: 1.0,
        policy: UnknownSubtagPolicy::Drop,
        gazetteer: synthetic::gazetteer(),
        lexicon: InflectionLexicon::from_corpus(&train_set),
        rules: SuffixRules::spanish(),
        include_propn: false,
    };

    let mut score = IntrinsicScore::default();
    for c in intervention_cases(200, 3).unwrap() {
        match p.intervene(&c.source, c.position) {
            Ok((pred, _)) => score += score_sentence(&c.gold, &pred, &c.source, c.position).unwrap(),
            Err(e) => return Verdict::Fail(format!("{}: {}", c.source.id(), e)),
        }
    }

    let augmented = p.augment_corpus(&train_set, 8);
    let swap = naive_swap_baseline(&train_set, &p.gazetteer, &p.lexicon, &p.rules, &p.gender).unwrap();
    let (orig_lm, mrf_lm, swap_lm) = (lm(&train_set), lm(&augmented.sentences), lm(&swap));
    let report = bias_report(
        &[("original", &orig_lm), ("swap", &swap_lm), ("mrf", &mrf_lm)],
        &synthetic::bias_queries().unwrap(),
    );
    let agg = |c: &str| report.aggregate(c).expect("condition present").clone();
    let (orig, sw, mrf) = (agg("original"), agg("swap"), agg("mrf"));
    let t = start.elapsed();
    let ok = score.f1() >= 0.95
        && score.form_accuracy() >= 0.95
        && mrf.mean_abs_stereotype * 2.0 <= orig.mean_abs_stereotype
        && mrf.mean_grammaticality >= sw.mean_grammaticality
        && within(t, 600);
    verdict(
        ok,
        format!(
            "F1 {:.4}, form acc {:.4} on 200 pairs; |stereotype| original {:.3} -> MRF {:.3}; \
             grammaticality MRF {:.3} vs swap {:.3}; {} epochs, {:.1?}",
            score.f1(),
            score.form_accuracy(),
            orig.mean_abs_stereotype,
            mrf.mean_abs_stereotype,
            mrf.mean_grammaticality,
            sw.mean_grammaticality,
            outcome.history.len(),
            t
        ),
    )
}

fn published_scores() -> Verdict {
    let q = BiasQuery::new(("el", "la"), ("ingeniero", "ingeniera"), ("bueno", "buena")).unwrap();
    let lm = FixtureScorer::new([
        ("el ingeniero bueno", -27.63),
        ("la ingeniera buena", -31.34),
        ("el ingeniera bueno", -32.22),
        ("la ingeniero buena", -33.22),
    ]);
    let report = bias_report(&[("original", &lm as &dyn PrefixScorer)], &[q]);
    let a = report.aggregate("original").unwrap();
    let (s, g) = (a.mean_abs_stereotype, a.mean_grammaticality);
    // "to two decimals": the rounded value must equal the published one
    let two = |x: f64| (x * 100.0).round() / 100.0;
    verdict(
        two(s) == 3.70 && two(g) == 3.25,
        format!(
            "unrounded log-probs give stereotyping {:.4} (published 3.7), grammaticality {:.4} (published 3.25)",
            s, g
        ),
    )
}

/// Gold for an intervention on a real sentence: the noun and every `det`
/// or `amod` dependent of it carrying gender swap gender.
fn rule_gold(s: &DepSentence, noun: usize, gender: &GenderConfig) -> DepSentence {
    let mut tags = s.tags();
    tags[noun] = gender.swap(&tags[noun]).expect("gendered noun");
    for (i, t) in s.tokens().iter().enumerate() {
        let label = t.deplabel.split(':').next().unwrap_or("");
        if t.head == Some(noun + 1) && (label == "det" || label == "amod") && gender.is_gendered(&t.tag) {
            tags[i] = gender.swap(&t.tag).expect("gendered");
        }
    }
    let forms: Vec<String> = s.tokens().iter().map(|t| t.form.clone()).collect();
    s.rewrite(s.id(), &tags, &forms)
}

fn find_file(dir: &Path, part: &str) -> Option<PathBuf> {
    fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .find(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".conllu") && name.contains(part)
        })
}

fn real_data() -> Verdict {
    let Some(dir) = std::env::var_os("REGENDER_UD_DIR").map(PathBuf::from) else {
        return Verdict::Skip("set REGENDER_UD_DIR to a UD_Spanish-AnCora checkout to run".into());
    };
    let (Some(train_path), Some(dev_path)) = (find_file(&dir, "train"), find_file(&dir, "dev")) else {
        return Verdict::Skip(format!("no train/dev .conllu files in {}", dir.display()));
    };
    let start = Instant::now();
    let load = |p: &Path| read_conllu_file(p).map(|r| r.sentences);
    let (train_set, dev) = match (load(&train_path), load(&dev_path)) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => return Verdict::Fail(format!("reading treebank: {:?} {:?}", a.err(), b.err())),
    };
    let outcome = match train(&train_set, &dev, &TrainConfig::default(), Parameterization::Linear) {
        Ok(o) => o,
        Err(e) => return Verdict::Fail(format!("training: {}", e)),
    };
    let profile = match LanguageProfile::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../profiles/es")) {
        Ok(p) => p,
        Err(e) => return Verdict::Fail(format!("profile: {}", e)),
    };
    let p = Pipeline {
        params: outcome.params,
        gender: profile.gender.clone(),
        log_alpha: 1.0,
        policy: UnknownSubtagPolicy::Drop,
        gazetteer: profile.gazetteer.clone().unwrap_or_default(),
        lexicon: InflectionLexicon::from_corpus(&train_set),
        rules: profile.suffix_rules.clone(),
        include_propn: false,
    };
    let mut score = IntrinsicScore::default();
    let mut cases = 0;
    'outer: for s in &dev {
        for noun in p.animate_nouns(s) {
            let gold = rule_gold(s, noun, &p.gender);
            let Ok((pred, _)) = p.intervene(s, noun) else { continue };
            score += score_sentence(&gold, &pred, s, noun).unwrap();
            cases += 1;
            if cases == 50 {
                break 'outer;
            }
        }
    }
    if cases < 50 {
        return Verdict::Skip(format!("only {} intervention cases found in the dev set", cases));
    }
    verdict(
        score.f1() >= 0.75,
        format!("50 cases: tag F1 {:.4} (floor 0.75), {:.1?}", score.f1(), start.elapsed()),
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_regender"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n).display().to_string();
    fs::write(path("train.conllu"), serialize_conllu(&generate_corpus(200, 5, "t").unwrap())).unwrap();
    fs::write(path("dev.conllu"), serialize_conllu(&generate_corpus(40, 6, "d").unwrap())).unwrap();
    let profile = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../profiles/es");
    fs::write(
        path("run.toml"),
        format!(
            "seed = 11\nprofile = {:?}\n[data]\ntrain = \"train.conllu\"\ndev = \"dev.conllu\"\n\
             [model]\nparameterization = \"neural\"\n[train]\nmax_epochs = 3\n",
            profile.display().to_string()
        ),
    )
    .unwrap();
    let cfg = path("run.toml");
    let mut compared = Vec::new();
    for k in 0..2 {
        let (model, aug) = (path(&format!("m{}.json", k)), path(&format!("a{}.conllu", k)));
        let steps = [
            vec!["train", "--config", &cfg, "--out", &model],
            vec!["augment", "--config", &cfg, "--model", &model, "--out", &aug],
        ];
        for args in &steps {
            if let Err(e) = run_cli(args) {
                return Verdict::Fail(format!("{:?}: {}", args, e));
            }
        }
    }
    for (a, b) in [("m0.json", "m1.json"), ("m0.history.tsv", "m1.history.tsv"), ("a0.conllu", "a1.conllu")] {
        let (x, y) = (fs::read(path(a)).unwrap(), fs::read(path(b)).unwrap());
        compared.push((a, x.len(), x == y));
    }
    let all = compared.iter().all(|c| c.2);
    let detail: Vec<String> = compared
        .iter()
        .map(|(n, len, same)| format!("{} ({} bytes) {}", n, len, if *same { "identical" } else { "DIFFERS" }))
        .collect();
    verdict(all, format!("train and augment run twice: {}", detail.join(", ")))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "inference oracle equivalence", known_discrepancy: false, run: inference_oracle },
        Criterion { name: "gradient correctness", known_discrepancy: false, run: gradients },
        Criterion { name: "uniform-model closed form", known_discrepancy: false, run: uniform_closed_form },
        Criterion { name: "alpha limit", known_discrepancy: false, run: alpha_limit },
        Criterion { name: "synthetic end-to-end", known_discrepancy: false, run: synthetic_experiment },
        Criterion { name: "published bias scores", known_discrepancy: true, run: published_scores },
        Criterion { name: "real treebank check", known_discrepancy: false, run: real_data },
        Criterion { name: "determinism", known_discrepancy: false, run: determinism },
    ];
    let mut unexpected = 0;
    println!("acceptance: {} criteria", criteria.len());
    for (i, c) in criteria.iter().enumerate() {
        let v = std::panic::catch_unwind(c.run)
            .unwrap_or_else(|_| Verdict::Fail("panicked".into()));
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Skip(d) => ("SKIP", d),
            Verdict::Fail(d) if c.known_discrepancy => ("FAIL", format!("{} [known discrepancy in the published numbers]", d)),
            Verdict::Fail(d) => {
                unexpected += 1;
                ("FAIL", d)
            }
        };
        println!("{} [{}/{}] {}: {}", tag, i + 1, criteria.len(), c.name, detail);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} unexpected failures", unexpected);
        ExitCode::FAILURE
    }
}
