#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use regender::inference::{BinaryFactor, FactorGraph};
use regender::model::{LinearParams, ModelParams, NeuralParams};
use regender::training::{
    initial_params, loss_and_gradient, nll, Parameterization, TagSpace, TrainConfig,
};
use regender::treebank::{parse_conllu, DepSentence, SubtagVocab};

/// Random tree-shaped factor graph: up to `max_n` variables with domains of
/// size 1..=`max_d`, random positive factors and occasional clamps.
pub fn random_tree<R: Rng>(rng: &mut R, max_n: usize, max_d: usize) -> FactorGraph {
    let n = rng.gen_range(1..=max_n);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=max_d)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let unary = sizes
        .iter()
        .map(|&d| {
            let roll: f64 = rng.gen();
            if roll < 0.15 {
                // clamp
                let keep = rng.gen_range(0..d);
                (0..d)
                    .map(|x| if x == keep { 0.0 } else { f64::NEG_INFINITY })
                    .collect()
            } else if roll < 0.5 {
                (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()
            } else {
                vec![0.0; d]
            }
        })
        .collect();

    let factors = (1..n)
        .map(|k| {
            let dependent = order[k];
            let head = order[rng.gen_range(0..k)];
            let table: Vec<f64> = (0..sizes[dependent] * sizes[head])
                .map(|_| rng.gen_range(-3.0..3.0))
                .collect();
            BinaryFactor {
                dependent,
                head,
                table: table.into(),
            }
        })
        .collect();
    FactorGraph::new(unary, factors).expect("random tree is valid")
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

const POS: [&str; 4] = ["DET", "NOUN", "ADJ", "VERB"];
const LABELS: [&str; 3] = ["det", "amod", "nsubj"];
const TAGS: [&str; 6] = [
    "Gender=Masc|Number=Sing",
    "Gender=Fem|Number=Sing",
    "Gender=Masc|Number=Plur",
    "Gender=Fem|Number=Plur",
    "Number=Sing",
    "_",
];

/// Random dependency tree of 1..=`max_n` tokens over a small POS, label and
/// tag inventory.
pub fn random_sentence<R: Rng>(rng: &mut R, id: usize, max_n: usize) -> DepSentence {
    let n = rng.gen_range(1..=max_n);
    let root = rng.gen_range(1..=n);
    let mut order: Vec<usize> = (1..=n).filter(|&i| i != root).collect();
    order.shuffle(rng);
    let mut placed = vec![root];
    let mut heads = vec![0; n + 1];
    for &i in &order {
        heads[i] = *placed.choose(rng).unwrap();
        placed.push(i);
    }
    let mut text = format!("# sent_id = r{}\n", id);
    for i in 1..=n {
        let label = if i == root {
            "root"
        } else {
            LABELS.choose(rng).unwrap()
        };
        text.push_str(&format!(
            "{i}\tw{i}\tw{i}\t{}\t_\t{}\t{}\t{}\t_\t_\n",
            POS.choose(rng).unwrap(),
            TAGS.choose(rng).unwrap(),
            heads[i],
            label
        ));
    }
    parse_conllu(&text).unwrap().sentences.remove(0)
}

pub fn random_corpus<R: Rng>(rng: &mut R, count: usize, max_n: usize) -> Vec<DepSentence> {
    (0..count).map(|i| random_sentence(rng, i, max_n)).collect()
}

/// The full tag inventory used by [`random_sentence`].
pub fn all_tags() -> TagSpace {
    TagSpace::new(TAGS.iter().map(|t| t.parse().unwrap()).collect()).unwrap()
}

/// Random parameters of either kind with entries in (-scale, scale), with
/// vocabularies covering every tag of [`all_tags`].
pub fn random_params<R: Rng>(
    rng: &mut R,
    corpus: &[DepSentence],
    choice: Parameterization,
    scale: f64,
) -> ModelParams {
    let space = all_tags();
    let mut p = initial_params(corpus, choice, &TrainConfig::default());
    let vocab = SubtagVocab::from_tags(space.tags());
    match &mut p {
        ModelParams::Linear(l) => {
            *l = LinearParams::zeros(vocab, l.keys().cloned().collect::<Vec<_>>());
        }
        ModelParams::Neural(n) => {
            let pos: Vec<String> = n.pos_embed.keys().cloned().collect();
            let labels: Vec<String> = n.label_embed.keys().cloned().collect();
            *n = NeuralParams::zeros(vocab, pos, labels, n.n1, n.n2);
        }
        ModelParams::Baseline(_) => unreachable!(),
    }
    let values: Vec<f64> = p.flat().iter().map(|_| rng.gen_range(-scale..scale)).collect();
    p.set_flat(&values).unwrap();
    p
}

/// Worst per-coordinate disagreement between the analytic gradient of
/// `sum nll (nats) + wd/2 |theta|^2` and central differences with step `h`,
/// relative to `max(|analytic|, |numeric|, floor)`.
pub fn gradient_check(
    batch: &[DepSentence],
    params: &ModelParams,
    space: &TagSpace,
    weight_decay: f64,
    h: f64,
    floor: f64,
) -> f64 {
    let (_, grad) = loss_and_gradient(batch, params, space, weight_decay).unwrap();
    let analytic = grad.flat();
    let theta = params.flat();
    let objective = |values: &[f64]| -> f64 {
        let mut p = params.clone();
        p.set_flat(values).unwrap();
        let nats: f64 = batch
            .iter()
            .map(|s| nll(s, &p, space).unwrap() * std::f64::consts::LN_2)
            .sum();
        nats + 0.5 * weight_decay * values.iter().map(|x| x * x).sum::<f64>()
    };
    let mut worst = 0.0f64;
    let mut shifted = theta.clone();
    for i in 0..theta.len() {
        shifted[i] = theta[i] + h;
        let up = objective(&shifted);
        shifted[i] = theta[i] - h;
        let down = objective(&shifted);
        shifted[i] = theta[i];
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(floor);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    worst
}
