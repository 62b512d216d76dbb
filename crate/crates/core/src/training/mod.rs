//! Maximum-likelihood training of the edge potentials with Adam.

mod adam;
mod objective;

pub use adam::{Adam, TrainState};
pub use objective::{grad_linear, grad_neural, loss_and_gradient, mean_nll, nll};

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{edge_keys, LinearParams, ModelParams, NeuralParams, DEFAULT_EMBEDDING, DEFAULT_HIDDEN};
use crate::treebank::{tag_inventory, DepSentence, MorphTag, SubtagVocab, UnknownSubtagPolicy};

/// The candidate tag set `M` shared by every position during training.
#[derive(Clone, Debug)]
pub struct TagSpace {
    tags: Vec<MorphTag>,
    index: HashMap<MorphTag, usize>,
}

impl TagSpace {
    pub fn new(tags: Vec<MorphTag>) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::Data("empty tag set".into()));
        }
        let index: HashMap<MorphTag, usize> =
            tags.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        if index.len() != tags.len() {
            return Err(Error::Data("duplicate tags in tag set".into()));
        }
        Ok(TagSpace { tags, index })
    }

    /// Distinct tags of the corpus, sorted.
    pub fn from_corpus<'a, I>(sentences: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a DepSentence>,
    {
        Self::new(tag_inventory(sentences))
    }

    pub fn tags(&self) -> &[MorphTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn index_of(&self, tag: &MorphTag) -> Option<usize> {
        self.index.get(tag).copied()
    }

    /// Indices of the sentence's observed tags.
    pub fn observed(&self, sentence: &DepSentence) -> Result<Vec<usize>> {
        sentence
            .tokens()
            .iter()
            .map(|t| {
                self.index_of(&t.tag).ok_or_else(|| Error::Validation {
                    sentence_id: sentence.id().to_string(),
                    message: format!("tag {} at position {} is not in the tag set", t.tag, t.index),
                })
            })
            .collect()
    }

    /// Uniform-model loss of an `n`-token sentence: `n log2 |M|`.
    pub fn uniform_bits(&self, n: usize) -> f64 {
        n as f64 * (self.len() as f64).ln() / LN_2
    }

    pub(crate) fn active_subtags(&self, params: &ModelParams) -> Result<Vec<Vec<usize>>> {
        let vocab = match params {
            ModelParams::Linear(p) => &p.vocab,
            ModelParams::Neural(p) => &p.vocab,
            ModelParams::Baseline(_) => {
                return Err(Error::Config("baseline rules are not trainable".into()))
            }
        };
        self.tags
            .iter()
            .map(|t| vocab.active(t, UnknownSubtagPolicy::Error))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameterization {
    #[default]
    Linear,
    Neural,
}

impl FromStr for Parameterization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Parameterization::Linear),
            "neural" => Ok(Parameterization::Neural),
            other => Err(Error::Config(format!("unknown parameterization {:?}", other))),
        }
    }
}

impl fmt::Display for Parameterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parameterization::Linear => "linear",
            Parameterization::Neural => "neural",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub adam_betas: (f64, f64),
    pub adam_epsilon: f64,
    pub stop_delta_bits: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Neural hidden width.
    pub hidden: usize,
    /// Neural embedding width.
    pub embedding: usize,
    /// Half-width of the uniform neural initialization.
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.005,
            weight_decay: 1e-4,
            adam_betas: (0.9, 0.999),
            adam_epsilon: 1e-8,
            stop_delta_bits: 1e-5,
            max_epochs: 100,
            batch_size: 32,
            seed: 0,
            hidden: DEFAULT_HIDDEN,
            embedding: DEFAULT_EMBEDDING,
            init_scale: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("adam_epsilon", self.adam_epsilon),
            ("stop_delta_bits", self.stop_delta_bits),
            ("init_scale", self.init_scale),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Config(format!("{} must be positive, got {}", name, x)));
            }
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!(
                "weight_decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        let (b1, b2) = self.adam_betas;
        if !(0.0..1.0).contains(&b1) || !(0.0..1.0).contains(&b2) {
            return Err(Error::Config(format!("adam_betas must lie in [0, 1), got ({}, {})", b1, b2)));
        }
        if self.batch_size == 0 || self.hidden == 0 || self.embedding == 0 {
            return Err(Error::Config(
                "batch_size, hidden and embedding must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Losses after one epoch, as mean per-sentence NLL in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean over the epoch's mini-batches, each measured before its update.
    pub train_bits: f64,
    pub dev_bits: f64,
}

/// One line per epoch: `epoch<TAB>train_bits<TAB>dev_bits`.
pub fn format_history(history: &[EpochRecord]) -> String {
    history
        .iter()
        .map(|r| format!("{}\t{:.9}\t{:.9}\n", r.epoch, r.train_bits, r.dev_bits))
        .collect()
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: Vec<EpochRecord>,
    pub space: TagSpace,
}

/// Initial parameters: zero linear weights, or seeded uniform neural tensors.
/// Vocabularies and edge keys are drawn from every given sentence.
pub fn initial_params(
    sentences: &[DepSentence],
    choice: Parameterization,
    config: &TrainConfig,
) -> ModelParams {
    let vocab = SubtagVocab::build(sentences);
    match choice {
        Parameterization::Linear => {
            ModelParams::Linear(LinearParams::zeros(vocab, edge_keys(sentences)))
        }
        Parameterization::Neural => {
            let pos: Vec<String> = sentences
                .iter()
                .flat_map(|s| s.tokens().iter().map(|t| t.pos.clone()))
                .collect();
            let labels: Vec<String> = sentences
                .iter()
                .flat_map(|s| s.edges().map(|e| e.label.to_string()).collect::<Vec<_>>())
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            ModelParams::Neural(NeuralParams::random(
                vocab,
                pos,
                labels,
                config.hidden,
                config.embedding,
                config.init_scale,
                &mut rng,
            ))
        }
    }
}

/// Mini-batch Adam on the summed batch NLL. After every epoch the mean dev
/// NLL is measured; training stops once it moves by less than
/// `stop_delta_bits`, or after `max_epochs`. An empty dev set falls back to
/// the training set.
pub fn train(
    train_set: &[DepSentence],
    dev_set: &[DepSentence],
    config: &TrainConfig,
    choice: Parameterization,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    let dev = if dev_set.is_empty() {
        log::warn!("no dev sentences; measuring the stopping rule on the training set");
        train_set
    } else {
        dev_set
    };
    let all: Vec<DepSentence> = train_set.iter().chain(dev_set).cloned().collect();
    let space = TagSpace::from_corpus(&all)?;
    let params = initial_params(&all, choice, config);
    info!(
        "training {} model: {} sentences, {} tags, {} parameters",
        choice,
        train_set.len(),
        space.len(),
        params.flat().len()
    );

    let mut state = TrainState::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut previous_dev: Option<f64> = None;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut train_nats = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<DepSentence> = chunk.iter().map(|&i| train_set[i].clone()).collect();
            let (loss, grad) = loss_and_gradient(&batch, &state.params, &space, config.weight_decay)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("training loss {} in epoch {}", loss, epoch)));
            }
            train_nats += loss;
            state.adam_step(&grad, config)?;
        }
        let dev_bits = mean_nll(dev, &state.params, &space)?;
        if !dev_bits.is_finite() {
            return Err(Error::NonFinite(format!("dev loss {} in epoch {}", dev_bits, epoch)));
        }
        let record = EpochRecord {
            epoch,
            train_bits: train_nats / train_set.len() as f64 / LN_2,
            dev_bits,
        };
        info!(
            "epoch {}: train {:.6} bits, dev {:.6} bits",
            epoch, record.train_bits, record.dev_bits
        );
        state.record(record);
        if let Some(prev) = previous_dev {
            if (prev - dev_bits).abs() < config.stop_delta_bits {
                break;
            }
        }
        previous_dev = Some(dev_bits);
    }

    Ok(TrainOutcome {
        params: state.params,
        history: state.history,
        space,
    })
}
