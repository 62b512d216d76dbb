use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

use regender::config::{LanguageProfile, RunConfig};
use regender::fixtures::LOS_INGENIEROS;
use regender::synthetic::{self, generate_corpus, SentenceSpec};
use regender::treebank::{parse_conllu, serialize_conllu, DepSentence, Token};

fn profiles() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../profiles")
}

fn regender(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regender"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = regender(args);
    assert!(
        out.status.success(),
        "{:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    /// Synthetic train/dev treebanks and a Spanish config training for
    /// `epochs` epochs.
    fn new(epochs: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let w = Workspace { dir };
        w.put("train.conllu", &serialize_conllu(&generate_corpus(300, 1, "train").unwrap()));
        w.put("dev.conllu", &serialize_conllu(&generate_corpus(60, 2, "dev").unwrap()));
        w.put(
            "run.toml",
            &format!(
                "seed = 3\nprofile = {:?}\n\n[data]\ntrain = \"train.conllu\"\ndev = \"dev.conllu\"\n\n\
                 [train]\nmax_epochs = {}\nlearning_rate = 0.05\n",
                profiles().join("es").display().to_string(),
                epochs
            ),
        );
        w
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }

    fn put(&self, name: &str, text: &str) {
        fs::write(self.dir.path().join(name), text).unwrap();
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.dir.path().join(name)).unwrap()
    }

    fn config(&self) -> String {
        self.path("run.toml")
    }

    fn train(&self, model: &str, extra: &[&str]) -> String {
        let (cfg, out) = (self.config(), self.path(model));
        let mut args = vec!["train", "--config", &cfg, "--out", &out];
        args.extend_from_slice(extra);
        ok(&args)
    }
}

/// `(final dev bits, uniform bits)` from the train command's summary line.
fn losses(stdout: &str) -> (f64, f64) {
    let words: Vec<&str> = stdout.split_whitespace().collect();
    let dev: f64 = words[3].parse().unwrap();
    let uniform: f64 = words.last().unwrap().trim_end_matches(')').parse().unwrap();
    (dev, uniform)
}

#[test]
fn every_profile_loads() {
    for lang in ["es", "fr", "it", "he"] {
        let p = LanguageProfile::load(profiles().join(lang)).unwrap();
        assert_eq!(p.name, lang);
        assert_eq!(p.adjectives.len(), 4);
        assert_eq!(p.baseline.weight, 2.0);
        assert!(p.gazetteer.is_some_and(|g| g.len() >= 10));
    }
}

#[test]
fn train_writes_model_and_history() {
    let w = Workspace::new(2);
    let stdout = w.train("m.json", &[]);
    assert_eq!(w.read("m.history.tsv").lines().count(), 2);
    let (dev, uniform) = losses(&stdout);
    assert!(dev < uniform, "{}", stdout);
}

#[test]
fn training_is_byte_reproducible() {
    let w = Workspace::new(2);
    w.train("a.json", &["--parameterization", "neural"]);
    w.train("b.json", &["--parameterization", "neural"]);
    assert_eq!(w.read("a.json"), w.read("b.json"));
    assert_eq!(w.read("a.history.tsv"), w.read("b.history.tsv"));
    w.train("c.json", &["--parameterization", "neural", "--seed", "4"]);
    assert_ne!(w.read("a.json"), w.read("c.json"));
}

#[test]
fn both_parameterizations_beat_uniform() {
    let w = Workspace::new(3);
    let lin = losses(&w.train("lin.json", &["--parameterization", "linear"]));
    let neu = losses(&w.train("neu.json", &["--parameterization", "neural"]));
    assert_ne!(w.read("lin.json"), w.read("neu.json"));
    assert!(lin.0 < lin.1 && neu.0 < neu.1, "{:?} {:?}", lin, neu);
}

fn feats(s: &DepSentence) -> Vec<String> {
    s.tokens().iter().map(|t| t.tag.to_string()).collect()
}

#[test]
fn intervene_on_plural_copula() {
    let w = Workspace::new(10);
    w.train("m.json", &[]);
    w.put("los_ingenieros.conllu", LOS_INGENIEROS);
    let (cfg, model, input) = (w.config(), w.path("m.json"), w.path("los_ingenieros.conllu"));
    let (out, report) = (w.path("out.conllu"), w.path("report.txt"));
    ok(&[
        "intervene", "--config", &cfg, "--model", &model, "--input", &input, "--out", &out,
        "--report", &report,
    ]);
    let result = parse_conllu(&w.read("out.conllu")).unwrap().sentences;
    assert_eq!(result.len(), 1);
    assert_eq!(result[0].text(), "Las ingenieras son expertas");

    // the report lists exactly the positions whose FEATS column changed
    let source = parse_conllu(LOS_INGENIEROS).unwrap().sentences.remove(0);
    let diff: Vec<usize> = feats(&source)
        .iter()
        .zip(feats(&result[0]))
        .enumerate()
        .filter(|(_, (a, b))| *a != b)
        .map(|(i, _)| i + 1)
        .collect();
    let reported: Vec<usize> = w
        .read("report.txt")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(reported, diff);
    assert_eq!(diff, vec![1, 2, 4]);
}

/// The synthetic sentence with its noun replaced by one outside the
/// gazetteer.
fn inanimate(spec: &SentenceSpec, id: &str) -> DepSentence {
    let s = spec.render(id).unwrap();
    let tokens: Vec<Token> = s
        .tokens()
        .iter()
        .map(|t| match t.pos.as_str() {
            "NOUN" => Token {
                form: "libro".into(),
                lemma: "libro".into(),
                ..t.clone()
            },
            _ => t.clone(),
        })
        .collect();
    DepSentence::new(id, tokens).unwrap()
}

#[test]
fn sentence_without_animate_noun_gives_no_rows() {
    let w = Workspace::new(1);
    w.train("m.json", &[]);
    let spec = synthetic::sample_specs(1, 9)[0];
    w.put("in.conllu", &serialize_conllu(&[inanimate(&spec, "x")]));
    let (cfg, model, input, out) = (w.config(), w.path("m.json"), w.path("in.conllu"), w.path("o.conllu"));
    ok(&["intervene", "--config", &cfg, "--model", &model, "--input", &input, "--out", &out]);
    assert_eq!(w.read("o.conllu"), "");
}

#[test]
fn augment_counts_swap_mode_and_determinism() {
    let w = Workspace::new(8);
    w.train("m.json", &[]);
    let specs = synthetic::sample_specs(10, 12);
    let corpus: Vec<DepSentence> = specs
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let id = format!("s{}", k + 1);
            if k < 4 {
                s.render(&id).unwrap()
            } else {
                inanimate(s, &id)
            }
        })
        .collect();
    w.put("corpus.conllu", &serialize_conllu(&corpus));
    let (cfg, model, input) = (w.config(), w.path("m.json"), w.path("corpus.conllu"));
    let run = |out: &str, extra: &[&str]| {
        let out = w.path(out);
        let mut args = vec!["augment", "--config", &cfg, "--input", &input, "--out", &out];
        args.extend_from_slice(extra);
        ok(&args);
    };
    run("mrf1.conllu", &["--model", &model]);
    run("mrf2.conllu", &["--model", &model]);
    run("swap.conllu", &["--swap"]);
    assert_eq!(w.read("mrf1.conllu"), w.read("mrf2.conllu"));

    let mrf = parse_conllu(&w.read("mrf1.conllu")).unwrap().sentences;
    let swap = parse_conllu(&w.read("swap.conllu")).unwrap().sentences;
    assert_eq!(mrf.len(), 14);
    assert_eq!(swap.len(), 14);
    let mut differing = 0;
    for (m, s) in mrf.iter().zip(&swap) {
        for (a, b) in m.tokens().iter().zip(s.tokens()) {
            if a.pos == "NOUN" {
                assert_eq!((&a.form, &a.tag), (&b.form, &b.tag), "{}", m.id());
            } else if (&a.form, &a.tag) != (&b.form, &b.tag) {
                differing += 1;
            }
        }
    }
    assert!(differing > 0);
}

#[test]
fn eval_intrinsic_rows_and_baseline_pattern() {
    let w = Workspace::new(10);
    w.train("m.json", &[]);
    let cases = synthetic::intervention_cases(60, 21).unwrap();
    let sources: Vec<DepSentence> = cases.iter().map(|c| c.source.clone()).collect();
    let golds: Vec<DepSentence> = cases
        .iter()
        .map(|c| {
            let comments = vec![format!("intervened = {}", c.position + 1)];
            DepSentence::with_comments(c.gold.id(), c.gold.tokens().to_vec(), comments).unwrap()
        })
        .collect();
    w.put("src.conllu", &serialize_conllu(&sources));
    w.put("gold.conllu", &serialize_conllu(&golds));
    let (cfg, model, src, gold) = (w.config(), w.path("m.json"), w.path("src.conllu"), w.path("gold.conllu"));
    let table = ok(&["eval-intrinsic", "--config", &cfg, "--source", &src, "--gold", &gold, "--model", &model]);
    let rows: Vec<Vec<&str>> = table.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.len() == 6));
    let num = |r: usize, c: usize| -> f64 { rows[r][c].parse().unwrap() };
    assert_eq!((rows[1][0], rows[2][0]), ("baseline", "linear"));
    // the rule baseline is precise but misses predicate adjectives
    assert!(num(1, 1) >= num(2, 1), "{}", table);
    assert!(num(1, 2) < num(2, 2), "{}", table);

    // a system's own predictions used as gold give a perfect row
    let (out, own) = (w.path("pred.conllu"), w.path("own.conllu"));
    ok(&["intervene", "--config", &cfg, "--model", &model, "--input", &src, "--out", &out]);
    let preds = parse_conllu(&w.read("pred.conllu")).unwrap().sentences;
    assert_eq!(preds.len(), sources.len());
    w.put("own.conllu", &serialize_conllu(&preds));
    let table = ok(&["eval-intrinsic", "--config", &cfg, "--source", &src, "--gold", &own, "--model", &model]);
    let linear: Vec<&str> = table.lines().nth(2).unwrap().split('\t').collect();
    assert_eq!(&linear[1..], ["100.00"; 5]);
}

#[test]
fn eval_bias_fixture_and_identical_corpora() {
    let w = Workspace::new(1);
    w.put(
        "fixture.tsv",
        "original\tel ingeniero bueno\t-27.6\noriginal\tla ingeniera buena\t-31.3\n\
         original\tel ingeniera bueno\t-32.2\noriginal\tla ingeniero buena\t-33.2\n\
         mrf\tel ingeniero bueno\t-28.5\nmrf\tla ingeniera buena\t-30.5\n\
         mrf\tel ingeniera bueno\t-33.5\nmrf\tla ingeniero buena\t-33.6\n",
    );
    w.put("q.tsv", "el\tla\tingeniero\tingeniera\tbueno\tbuena\n");
    let (cfg, fx, q, out) = (w.config(), w.path("fixture.tsv"), w.path("q.tsv"), w.path("bias.tsv"));
    let stdout = ok(&["eval-bias", "--config", &cfg, "--fixture", &fx, "--queries", &q, "--out", &out]);
    assert!(stdout.contains("original\t3.7000\t3.2500"), "{}", stdout);
    assert!(stdout.contains("mrf\t2.0000\t4.0500"), "{}", stdout);

    let text = w.path("train.conllu");
    let plot = w.path("plot.tsv");
    let stdout = ok(&[
        "eval-bias", "--config", &cfg, "--original", &text, "--swap", &text, "--mrf", &text,
        "--out", &out, "--plot", &plot,
    ]);
    let cols: Vec<Vec<&str>> = stdout.lines().skip(1).map(|l| l.split('\t').skip(1).collect()).collect();
    assert_eq!(cols.len(), 3);
    assert!(cols.windows(2).all(|p| p[0] == p[1]), "{}", stdout);
    assert!(w.read("plot.tsv").lines().skip(1).all(|l| l.starts_with("es\t")));
}

#[test]
fn build_lexicon_writes_tsv() {
    let w = Workspace::new(1);
    let (cfg, out) = (w.config(), w.path("lex.tsv"));
    let stdout = ok(&["build-lexicon", "--config", &cfg, "--out", &out]);
    let n: usize = stdout.split_whitespace().next().unwrap().parse().unwrap();
    assert_eq!(w.read("lex.tsv").lines().count(), n);
    assert!(w.read("lex.tsv").contains("ingeniera\tGender=Fem|Number=Plur\tingenieras"));
}

#[test]
fn exit_codes_and_no_partial_writes() {
    let w = Workspace::new(1);
    let out = w.path("m.json");
    w.put("bad.toml", "[intervention]\nlog_alpha = -1.0\n");
    let bad = w.path("bad.toml");
    let r = regender(&["train", "--config", &bad, "--out", &out]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!Path::new(&out).exists());

    w.put("missing.toml", "[data]\ntrain = \"nope.conllu\"\n");
    let missing = w.path("missing.toml");
    let r = regender(&["train", "--config", &missing, "--out", &out]);
    assert_eq!(r.status.code(), Some(2));

    let cfg = w.config();
    let nope = w.path("nope.conllu");
    let r = regender(&["train", "--config", &cfg, "--train", &nope, "--out", &out]);
    assert_eq!(r.status.code(), Some(1));
    assert!(!Path::new(&out).exists());

    w.put("broken.conllu", "1\tx\n");
    let broken = w.path("broken.conllu");
    let r = regender(&["train", "--config", &cfg, "--train", &broken, "--out", &out]);
    assert_eq!(r.status.code(), Some(1));
    assert!(!Path::new(&out).exists());
}

#[test]
fn config_resolves_relative_paths() {
    let w = Workspace::new(1);
    let cfg = RunConfig::load(w.config()).unwrap();
    assert_eq!(cfg.data.train.as_deref(), Some(w.dir.path().join("train.conllu").as_path()));
    assert_eq!(cfg.train.max_epochs, 1);
    assert_eq!(cfg.language(), "es");
}
