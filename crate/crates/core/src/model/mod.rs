//! Factors of the agreement MRF.
//!
//! Binary factors score a dependent's tag against its head's tag given the
//! edge key; three parameterizations are provided (linear, neural and a
//! hand-written baseline). Unary factors are only used at intervention time.

mod baseline;
mod io;
mod linear;
mod neural;
mod unary;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use baseline::{psi_baseline, BaselineRules, Pattern};
pub use io::{load_params, load_params_file, save_params, save_params_file, FORMAT, VERSION};
pub use linear::{bilinear, log_psi_linear, psi_linear, LinearParams};
pub use neural::{
    log_psi_neural, neural_w, psi_neural, NeuralParams, DEFAULT_EMBEDDING, DEFAULT_HIDDEN, UNK,
};
pub use unary::{phi, UnaryConstraint};

use crate::error::{Error, Result};
use crate::treebank::{MorphTag, UnknownSubtagPolicy};

/// `(p_i, p_j, l)`: dependent POS, head POS and dependency label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    pub dependent_pos: String,
    pub head_pos: String,
    pub label: String,
}

impl EdgeKey {
    pub fn new(
        dependent_pos: impl Into<String>,
        head_pos: impl Into<String>,
        label: impl Into<String>,
    ) -> Self {
        EdgeKey {
            dependent_pos: dependent_pos.into(),
            head_pos: head_pos.into(),
            label: label.into(),
        }
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "({}, {}, {})", self.dependent_pos, self.head_pos, self.label)
    }
}

/// Any of the supported binary-factor parameterizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Linear(LinearParams),
    Neural(NeuralParams),
    Baseline(BaselineRules),
}

impl ModelParams {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelParams::Linear(_) => "linear",
            ModelParams::Neural(_) => "neural",
            ModelParams::Baseline(_) => "baseline",
        }
    }

    /// `log psi` over the cross product of two domains, row-major with rows
    /// indexed by the dependent's domain.
    pub fn log_psi_table(
        &self,
        key: &EdgeKey,
        dependent: &[MorphTag],
        head: &[MorphTag],
        policy: UnknownSubtagPolicy,
    ) -> Result<Vec<f64>> {
        let table = match self {
            ModelParams::Baseline(rules) => dependent
                .iter()
                .flat_map(|a| head.iter().map(move |b| rules.log_psi(a, b, key)))
                .collect(),
            ModelParams::Linear(p) => match p.weight(key) {
                None => vec![0.0; dependent.len() * head.len()],
                Some(w) => bilinear_table(&p.vocab, w, dependent, head, policy)?,
            },
            ModelParams::Neural(p) => {
                let w = neural_w(key, p)?;
                bilinear_table(&p.vocab, &w, dependent, head, policy)?
            }
        };
        if let Some(x) = table.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "log psi = {} on edge {}; factor overflow",
                x, key
            )));
        }
        Ok(table)
    }

    pub fn flat(&self) -> Vec<f64> {
        match self {
            ModelParams::Linear(p) => p.flat(),
            ModelParams::Neural(p) => p.flat(),
            ModelParams::Baseline(_) => Vec::new(),
        }
    }

    pub fn set_flat(&mut self, values: &[f64]) -> Result<()> {
        match self {
            ModelParams::Linear(p) => p.set_flat(values),
            ModelParams::Neural(p) => p.set_flat(values),
            ModelParams::Baseline(_) if values.is_empty() => Ok(()),
            ModelParams::Baseline(_) => Err(Error::Config(
                "baseline rules have no trainable parameters".into(),
            )),
        }
    }
}

fn bilinear_table(
    vocab: &crate::treebank::SubtagVocab,
    w: &[f64],
    dependent: &[MorphTag],
    head: &[MorphTag],
    policy: UnknownSubtagPolicy,
) -> Result<Vec<f64>> {
    let c = vocab.len();
    let rows = dependent
        .iter()
        .map(|t| vocab.active(t, policy))
        .collect::<Result<Vec<_>>>()?;
    let cols = head
        .iter()
        .map(|t| vocab.active(t, policy))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for r in &rows {
        for col in &cols {
            out.push(bilinear(r, col, w, c));
        }
    }
    Ok(out)
}

/// Serializes a map with structured keys as a list of `[key, value]` pairs.
pub(crate) mod entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<K, V, S>(map: &BTreeMap<K, V>, s: S) -> Result<S::Ok, S::Error>
    where
        K: Serialize,
        V: Serialize,
        S: Serializer,
    {
        s.collect_seq(map.iter())
    }

    pub fn deserialize<'de, K, V, D>(d: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        V: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        Vec::<(K, V)>::deserialize(d).map(|v| v.into_iter().collect())
    }
}

/// Edge keys observed in a corpus.
pub fn edge_keys<'a, I>(sentences: I) -> Vec<EdgeKey>
where
    I: IntoIterator<Item = &'a crate::treebank::DepSentence>,
{
    let mut keys = BTreeMap::new();
    for s in sentences {
        for e in s.edges() {
            let t = s.tokens();
            keys.insert(
                EdgeKey::new(&t[e.child].pos, &t[e.head].pos, e.label),
                (),
            );
        }
    }
    keys.into_keys().collect()
}
