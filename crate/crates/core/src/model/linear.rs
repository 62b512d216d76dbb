use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EdgeKey;
use crate::error::{Error, Result};
use crate::treebank::{MorphTag, SubtagVocab, UnknownSubtagPolicy};

/// One `c x c` weight matrix per edge key. Matrices are row-major with rows
/// indexed by the dependent's subtags and columns by the head's.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub vocab: SubtagVocab,
    #[serde(with = "super::entries")]
    weights: BTreeMap<EdgeKey, Vec<f64>>,
}

impl LinearParams {
    /// Zero matrices for every key, i.e. the uniform model.
    pub fn zeros<I>(vocab: SubtagVocab, keys: I) -> Self
    where
        I: IntoIterator<Item = EdgeKey>,
    {
        let c = vocab.len();
        let weights = keys.into_iter().map(|k| (k, vec![0.0; c * c])).collect();
        LinearParams { vocab, weights }
    }

    pub fn from_weights(vocab: SubtagVocab, weights: BTreeMap<EdgeKey, Vec<f64>>) -> Result<Self> {
        let p = LinearParams { vocab, weights };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let cc = self.dim() * self.dim();
        for (k, w) in &self.weights {
            if w.len() != cc {
                return Err(Error::Config(format!(
                    "matrix for {} has {} entries, expected {}",
                    k,
                    w.len(),
                    cc
                )));
            }
        }
        Ok(())
    }

    /// The subtag count `c`.
    pub fn dim(&self) -> usize {
        self.vocab.len()
    }

    pub fn keys(&self) -> impl Iterator<Item = &EdgeKey> {
        self.weights.keys()
    }

    pub fn weight(&self, key: &EdgeKey) -> Option<&[f64]> {
        self.weights.get(key).map(Vec::as_slice)
    }

    pub fn weight_mut(&mut self, key: &EdgeKey) -> Option<&mut [f64]> {
        self.weights.get_mut(key).map(Vec::as_mut_slice)
    }

    pub fn matrices(&self) -> impl Iterator<Item = (&EdgeKey, &[f64])> {
        self.weights.iter().map(|(k, w)| (k, w.as_slice()))
    }

    pub fn matrices_mut(&mut self) -> impl Iterator<Item = (&EdgeKey, &mut Vec<f64>)> {
        self.weights.iter_mut()
    }

    pub fn num_parameters(&self) -> usize {
        self.weights.len() * self.dim() * self.dim()
    }

    pub fn flat(&self) -> Vec<f64> {
        self.weights.values().flatten().copied().collect()
    }

    pub fn set_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_parameters() {
            return Err(Error::Config(format!(
                "expected {} parameters, got {}",
                self.num_parameters(),
                values.len()
            )));
        }
        let cc = self.dim() * self.dim();
        for (w, chunk) in self.weights.values_mut().zip(values.chunks(cc.max(1))) {
            w.copy_from_slice(chunk);
        }
        Ok(())
    }
}

/// `sum_{a in rows, b in cols} W[a, b]`, the bilinear form of two multi-hot
/// vectors given by their active coordinates.
pub fn bilinear(rows: &[usize], cols: &[usize], w: &[f64], c: usize) -> f64 {
    let mut acc = 0.0;
    for &a in rows {
        let row = &w[a * c..(a + 1) * c];
        for &b in cols {
            acc += row[b];
        }
    }
    acc
}

/// `log psi` under the linear parameterization. Unseen keys score 0.
pub fn log_psi_linear(
    dependent: &MorphTag,
    head: &MorphTag,
    key: &EdgeKey,
    params: &LinearParams,
) -> Result<f64> {
    let w = match params.weight(key) {
        Some(w) => w,
        None => return Ok(0.0),
    };
    let rows = params.vocab.active(dependent, UnknownSubtagPolicy::Error)?;
    let cols = params.vocab.active(head, UnknownSubtagPolicy::Error)?;
    Ok(bilinear(&rows, &cols, w, params.dim()))
}

/// `psi = exp(m_i^T W m_j)`.
pub fn psi_linear(
    dependent: &MorphTag,
    head: &MorphTag,
    key: &EdgeKey,
    params: &LinearParams,
) -> Result<f64> {
    log_psi_linear(dependent, head, key, params).map(f64::exp)
}
