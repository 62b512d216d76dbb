//! Negative log-likelihood of observed tag sequences and its gradient.
//!
//! The gradient of `-log Pr(m | T, p)` with respect to a linear weight
//! `W(k)[a, b]` is the expected minus the observed count of the subtag pair
//! `(a, b)` over edges with key `k`. Expectations come from the edge
//! marginals of sum-product. The neural gradient pushes the same per-key
//! statistics back through `exp`, the `U` contraction, `tanh`, `V` and the
//! embeddings.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::LN_2;
use std::sync::Arc;

use rayon::prelude::*;

use super::TagSpace;
use crate::error::Result;
use crate::inference::{sum_product, BinaryFactor, FactorGraph};
use crate::model::{EdgeKey, LinearParams, ModelParams, NeuralParams};
use crate::treebank::{DepSentence, UnknownSubtagPolicy};

type Tables = HashMap<EdgeKey, Arc<[f64]>>;

fn key_of(sentence: &DepSentence, child: usize, head: usize, label: &str) -> EdgeKey {
    let t = sentence.tokens();
    EdgeKey::new(&t[child].pos, &t[head].pos, label)
}

fn tables_for(params: &ModelParams, batch: &[DepSentence], space: &TagSpace) -> Result<Tables> {
    let keys: BTreeSet<EdgeKey> = batch
        .iter()
        .flat_map(|s| s.edges().map(move |e| key_of(s, e.child, e.head, e.label)))
        .collect();
    let keys: Vec<EdgeKey> = keys.into_iter().collect();
    let tables = keys
        .par_iter()
        .map(|k| {
            params
                .log_psi_table(k, space.tags(), space.tags(), UnknownSubtagPolicy::Error)
                .map(Arc::<[f64]>::from)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(keys.into_iter().zip(tables).collect())
}

fn graph_for(sentence: &DepSentence, tables: &Tables, space: &TagSpace) -> Result<FactorGraph> {
    let d = space.len();
    let factors = sentence
        .edges()
        .map(|e| BinaryFactor {
            dependent: e.child,
            head: e.head,
            table: tables[&key_of(sentence, e.child, e.head, e.label)].clone(),
        })
        .collect();
    FactorGraph::new(vec![vec![0.0; d]; sentence.len()], factors)
}

/// Negative log-likelihood of the sentence's observed tags, in bits, with
/// every position ranging over the full tag space and no unary factors.
pub fn nll(sentence: &DepSentence, params: &ModelParams, space: &TagSpace) -> Result<f64> {
    let observed = space.observed(sentence)?;
    let tables = tables_for(params, std::slice::from_ref(sentence), space)?;
    let graph = graph_for(sentence, &tables, space)?;
    let r = sum_product(&graph)?;
    Ok((r.log_z - graph.log_score(&observed)) / LN_2)
}

/// Mean per-sentence NLL in bits.
pub fn mean_nll(sentences: &[DepSentence], params: &ModelParams, space: &TagSpace) -> Result<f64> {
    if sentences.is_empty() {
        return Ok(0.0);
    }
    let tables = tables_for(params, sentences, space)?;
    let losses = sentences
        .par_iter()
        .map(|s| {
            let observed = space.observed(s)?;
            let g = graph_for(s, &tables, space)?;
            let r = sum_product(&g)?;
            Ok(r.log_z - g.log_score(&observed))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(losses.iter().sum::<f64>() / sentences.len() as f64 / LN_2)
}

/// Summed NLL in nats and, per edge key, `c x c` expected-minus-observed
/// subtag-pair counts.
pub(crate) fn edge_statistics(
    batch: &[DepSentence],
    params: &ModelParams,
    space: &TagSpace,
    c: usize,
) -> Result<(f64, BTreeMap<EdgeKey, Vec<f64>>)> {
    let tables = tables_for(params, batch, space)?;
    let active = space.active_subtags(params)?;
    let per_sentence = batch
        .par_iter()
        .map(|s| sentence_statistics(s, &tables, space, &active, c))
        .collect::<Result<Vec<_>>>()?;

    let mut loss = 0.0;
    let mut stats: BTreeMap<EdgeKey, Vec<f64>> = BTreeMap::new();
    for (l, contrib) in per_sentence {
        loss += l;
        for (k, g) in contrib {
            match stats.get_mut(&k) {
                Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b),
                None => {
                    stats.insert(k, g);
                }
            }
        }
    }
    Ok((loss, stats))
}

fn sentence_statistics(
    sentence: &DepSentence,
    tables: &Tables,
    space: &TagSpace,
    active: &[Vec<usize>],
    c: usize,
) -> Result<(f64, BTreeMap<EdgeKey, Vec<f64>>)> {
    let observed = space.observed(sentence)?;
    let graph = graph_for(sentence, tables, space)?;
    let r = sum_product(&graph)?;
    let loss = r.log_z - graph.log_score(&observed);
    let d = space.len();

    let mut out: BTreeMap<EdgeKey, Vec<f64>> = BTreeMap::new();
    for (f, e) in sentence.edges().enumerate() {
        let key = key_of(sentence, e.child, e.head, e.label);
        let g = out.entry(key).or_insert_with(|| vec![0.0; c * c]);
        let joint = &r.edge_marginals[f];
        // reduced[xd][b] = sum over head values with subtag b
        let mut reduced = vec![0.0; d * c];
        for xd in 0..d {
            for xh in 0..d {
                let p = joint[xd * d + xh];
                if p != 0.0 {
                    for &b in &active[xh] {
                        reduced[xd * c + b] += p;
                    }
                }
            }
        }
        for xd in 0..d {
            for &a in &active[xd] {
                let row = &mut g[a * c..(a + 1) * c];
                for (cell, x) in row.iter_mut().zip(&reduced[xd * c..(xd + 1) * c]) {
                    *cell += x;
                }
            }
        }
        for &a in &active[observed[e.child]] {
            for &b in &active[observed[e.head]] {
                g[a * c + b] -= 1.0;
            }
        }
    }
    Ok((loss, out))
}

/// Gradient of the summed batch NLL (nats) plus `weight_decay * W`.
pub fn grad_linear(
    batch: &[DepSentence],
    params: &LinearParams,
    space: &TagSpace,
    weight_decay: f64,
) -> Result<LinearParams> {
    let wrapped = ModelParams::Linear(params.clone());
    let (_, stats) = edge_statistics(batch, &wrapped, space, params.dim())?;
    Ok(linear_from_stats(params, &stats, weight_decay))
}

pub(crate) fn linear_from_stats(
    params: &LinearParams,
    stats: &BTreeMap<EdgeKey, Vec<f64>>,
    weight_decay: f64,
) -> LinearParams {
    let mut grad = params.clone();
    for (key, g) in grad.matrices_mut() {
        let w = params.weight(key).expect("same keys");
        for (i, cell) in g.iter_mut().enumerate() {
            *cell = weight_decay * w[i];
        }
        // keys seen in the batch but absent from the model score uniformly
        if let Some(s) = stats.get(key) {
            g.iter_mut().zip(s).for_each(|(a, b)| *a += b);
        }
    }
    grad
}

/// Gradient of the summed batch NLL (nats) with respect to every neural
/// parameter, plus `weight_decay` times the parameter.
pub fn grad_neural(
    batch: &[DepSentence],
    params: &NeuralParams,
    space: &TagSpace,
    weight_decay: f64,
) -> Result<NeuralParams> {
    let wrapped = ModelParams::Neural(params.clone());
    let (_, stats) = edge_statistics(batch, &wrapped, space, params.dim())?;
    Ok(neural_from_stats(params, &stats, weight_decay))
}

pub(crate) fn neural_from_stats(
    params: &NeuralParams,
    stats: &BTreeMap<EdgeKey, Vec<f64>>,
    weight_decay: f64,
) -> NeuralParams {
    let (n1, n2) = (params.n1, params.n2);
    let mut grad = params.clone();
    let decayed: Vec<f64> = params.flat().iter().map(|x| weight_decay * x).collect();
    grad.set_flat(&decayed).expect("same shape");

    for (key, g) in stats {
        let x = params.input(key);
        let h = params.hidden(&x);
        let z = params.contract(&h);
        let mut dh = vec![0.0; n1];
        for (ab, (&gab, &zab)) in g.iter().zip(&z).enumerate() {
            let dz = gab * zab.exp();
            if dz == 0.0 {
                continue;
            }
            let cell = ab * n1;
            for k in 0..n1 {
                grad.u[cell + k] += dz * h[k];
                dh[k] += dz * params.u[cell + k];
            }
        }
        let width = 3 * n2;
        let mut dx = vec![0.0; width];
        for k in 0..n1 {
            let dpre = dh[k] * (1.0 - h[k] * h[k]);
            for j in 0..width {
                grad.v[k * width + j] += dpre * x[j];
                dx[j] += dpre * params.v[k * width + j];
            }
        }
        let dep = params.pos_row(&key.dependent_pos).to_owned();
        let head = params.pos_row(&key.head_pos).to_owned();
        let label = params.label_row(&key.label).to_owned();
        let add = |row: &mut Vec<f64>, part: &[f64]| {
            row.iter_mut().zip(part).for_each(|(a, b)| *a += b);
        };
        add(grad.pos_embed.get_mut(&dep).unwrap(), &dx[..n2]);
        add(grad.pos_embed.get_mut(&head).unwrap(), &dx[n2..2 * n2]);
        add(grad.label_embed.get_mut(&label).unwrap(), &dx[2 * n2..]);
    }
    grad
}

/// Summed NLL (nats) and gradient for either trainable parameterization.
pub fn loss_and_gradient(
    batch: &[DepSentence],
    params: &ModelParams,
    space: &TagSpace,
    weight_decay: f64,
) -> Result<(f64, ModelParams)> {
    match params {
        ModelParams::Linear(p) => {
            let (loss, stats) = edge_statistics(batch, params, space, p.dim())?;
            Ok((loss, ModelParams::Linear(linear_from_stats(p, &stats, weight_decay))))
        }
        ModelParams::Neural(p) => {
            let (loss, stats) = edge_statistics(batch, params, space, p.dim())?;
            Ok((loss, ModelParams::Neural(neural_from_stats(p, &stats, weight_decay))))
        }
        ModelParams::Baseline(_) => Err(crate::Error::Config(
            "baseline rules are not trainable".into(),
        )),
    }
}
