//! Neural parameterization: `W(key) = exp(U tanh(V [e(p_i); e(p_j); e(l)]))`.
//!
//! `U` has shape `c x c x n1` and is stored with the `n1` axis innermost,
//! `V` has shape `n1 x 3n2`, row-major. POS tags share one embedding table
//! (used for both the dependent and the head), labels have their own. Each
//! table carries an [`UNK`] row for identifiers unseen in training.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linear::bilinear;
use super::EdgeKey;
use crate::error::{Error, Result};
use crate::treebank::{MorphTag, SubtagVocab, UnknownSubtagPolicy};

pub const UNK: &str = "<unk>";
pub const DEFAULT_HIDDEN: usize = 9;
pub const DEFAULT_EMBEDDING: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuralParams {
    pub vocab: SubtagVocab,
    pub n1: usize,
    pub n2: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pos_embed: BTreeMap<String, Vec<f64>>,
    pub label_embed: BTreeMap<String, Vec<f64>>,
}

impl NeuralParams {
    /// Zero tensors with embedding rows for the given identifiers plus UNK.
    pub fn zeros<P, L>(vocab: SubtagVocab, pos: P, labels: L, n1: usize, n2: usize) -> Self
    where
        P: IntoIterator<Item = String>,
        L: IntoIterator<Item = String>,
    {
        let c = vocab.len();
        let table = |ids: Vec<String>| -> BTreeMap<String, Vec<f64>> {
            ids.into_iter()
                .chain(std::iter::once(UNK.to_owned()))
                .map(|id| (id, vec![0.0; n2]))
                .collect()
        };
        NeuralParams {
            vocab,
            n1,
            n2,
            u: vec![0.0; c * c * n1],
            v: vec![0.0; n1 * 3 * n2],
            pos_embed: table(pos.into_iter().collect()),
            label_embed: table(labels.into_iter().collect()),
        }
    }

    /// Every parameter drawn from uniform(-scale, scale).
    pub fn random<P, L, R>(
        vocab: SubtagVocab,
        pos: P,
        labels: L,
        n1: usize,
        n2: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self
    where
        P: IntoIterator<Item = String>,
        L: IntoIterator<Item = String>,
        R: Rng,
    {
        let mut p = Self::zeros(vocab, pos, labels, n1, n2);
        let mut values = p.flat();
        for x in values.iter_mut() {
            *x = rng.gen_range(-scale..scale);
        }
        p.set_flat(&values).expect("same shape");
        p
    }

    pub fn dim(&self) -> usize {
        self.vocab.len()
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.dim();
        if self.u.len() != c * c * self.n1 {
            return Err(Error::Config(format!(
                "U has {} entries, expected {}x{}x{}",
                self.u.len(),
                c,
                c,
                self.n1
            )));
        }
        if self.v.len() != self.n1 * 3 * self.n2 {
            return Err(Error::Config(format!(
                "V has {} entries, expected {}x{}",
                self.v.len(),
                self.n1,
                3 * self.n2
            )));
        }
        for (name, table) in [("POS", &self.pos_embed), ("label", &self.label_embed)] {
            if !table.contains_key(UNK) {
                return Err(Error::Config(format!("{} embeddings lack an UNK row", name)));
            }
            if let Some((id, e)) = table.iter().find(|(_, e)| e.len() != self.n2) {
                return Err(Error::Config(format!(
                    "{} embedding '{}' has length {}, expected {}",
                    name,
                    id,
                    e.len(),
                    self.n2
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn pos_row(&self, pos: &str) -> &str {
        if self.pos_embed.contains_key(pos) {
            self.pos_embed.get_key_value(pos).unwrap().0
        } else {
            UNK
        }
    }

    pub(crate) fn label_row(&self, label: &str) -> &str {
        if self.label_embed.contains_key(label) {
            self.label_embed.get_key_value(label).unwrap().0
        } else {
            UNK
        }
    }

    /// The concatenated input `[e(p_i); e(p_j); e(l)]`.
    pub fn input(&self, key: &EdgeKey) -> Vec<f64> {
        let mut x = Vec::with_capacity(3 * self.n2);
        x.extend_from_slice(&self.pos_embed[self.pos_row(&key.dependent_pos)]);
        x.extend_from_slice(&self.pos_embed[self.pos_row(&key.head_pos)]);
        x.extend_from_slice(&self.label_embed[self.label_row(&key.label)]);
        x
    }

    /// `tanh(V x)`.
    pub fn hidden(&self, x: &[f64]) -> Vec<f64> {
        let width = 3 * self.n2;
        (0..self.n1)
            .map(|k| {
                let row = &self.v[k * width..(k + 1) * width];
                row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().tanh()
            })
            .collect()
    }

    /// Pre-exponential scores `U h`, shape `c x c`.
    pub fn contract(&self, h: &[f64]) -> Vec<f64> {
        self.u
            .chunks(self.n1)
            .map(|cell| cell.iter().zip(h).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.u.len()
            + self.v.len()
            + (self.pos_embed.len() + self.label_embed.len()) * self.n2
    }

    /// Parameters in a fixed order: U, V, POS rows, label rows.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        out.extend_from_slice(&self.u);
        out.extend_from_slice(&self.v);
        for e in self.pos_embed.values().chain(self.label_embed.values()) {
            out.extend_from_slice(e);
        }
        out
    }

    pub fn set_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_parameters() {
            return Err(Error::Config(format!(
                "expected {} parameters, got {}",
                self.num_parameters(),
                values.len()
            )));
        }
        let (u, rest) = values.split_at(self.u.len());
        let (v, mut rest) = rest.split_at(self.v.len());
        self.u.copy_from_slice(u);
        self.v.copy_from_slice(v);
        for e in self
            .pos_embed
            .values_mut()
            .chain(self.label_embed.values_mut())
        {
            let (head, tail) = rest.split_at(e.len());
            e.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }
}

/// The `c x c` matrix `exp(U tanh(V [e(p_i); e(p_j); e(l)]))`.
pub fn neural_w(key: &EdgeKey, params: &NeuralParams) -> Result<Vec<f64>> {
    params.validate()?;
    let h = params.hidden(&params.input(key));
    Ok(params.contract(&h).into_iter().map(f64::exp).collect())
}

pub fn log_psi_neural(
    dependent: &MorphTag,
    head: &MorphTag,
    key: &EdgeKey,
    params: &NeuralParams,
) -> Result<f64> {
    let w = neural_w(key, params)?;
    let rows = params.vocab.active(dependent, UnknownSubtagPolicy::Error)?;
    let cols = params.vocab.active(head, UnknownSubtagPolicy::Error)?;
    Ok(bilinear(&rows, &cols, &w, params.dim()))
}

/// `psi = exp(m_i^T W(key) m_j)` with the neural `W`.
pub fn psi_neural(
    dependent: &MorphTag,
    head: &MorphTag,
    key: &EdgeKey,
    params: &NeuralParams,
) -> Result<f64> {
    log_psi_neural(dependent, head, key, params).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linear::{psi_linear, LinearParams};
    use crate::treebank::Subtag;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vocab() -> SubtagVocab {
        vec![
            Subtag::new("Gender", "Fem").unwrap(),
            Subtag::new("Gender", "Masc").unwrap(),
            Subtag::new("Number", "Plur").unwrap(),
            Subtag::new("Number", "Sing").unwrap(),
        ]
        .into()
    }

    fn ids(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn random_params(seed: u64) -> NeuralParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        NeuralParams::random(
            vocab(),
            ids(&["ADJ", "DET", "NOUN"]),
            ids(&["amod", "det"]),
            DEFAULT_HIDDEN,
            DEFAULT_EMBEDDING,
            1.0,
            &mut rng,
        )
    }

    #[test]
    fn zero_u_gives_all_ones() {
        let mut p = random_params(1);
        p.u.iter_mut().for_each(|x| *x = 0.0);
        let w = neural_w(&EdgeKey::new("ADJ", "NOUN", "amod"), &p).unwrap();
        assert!(w.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn zero_v_gives_all_ones() {
        let mut p = random_params(2);
        p.v.iter_mut().for_each(|x| *x = 0.0);
        let w = neural_w(&EdgeKey::new("DET", "NOUN", "det"), &p).unwrap();
        assert!(w.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn matches_triple_loop() {
        let p = random_params(3);
        let c = p.dim();
        for key in [
            EdgeKey::new("ADJ", "NOUN", "amod"),
            EdgeKey::new("VERB", "PRON", "nsubj"), // all UNK
        ] {
            let w = neural_w(&key, &p).unwrap();
            let lookup = |t: &BTreeMap<String, Vec<f64>>, id: &str| {
                t.get(id).unwrap_or_else(|| &t[UNK]).clone()
            };
            let mut x = lookup(&p.pos_embed, &key.dependent_pos);
            x.extend(lookup(&p.pos_embed, &key.head_pos));
            x.extend(lookup(&p.label_embed, &key.label));
            let mut h = vec![0.0; p.n1];
            for k in 0..p.n1 {
                for j in 0..3 * p.n2 {
                    h[k] += p.v[k * 3 * p.n2 + j] * x[j];
                }
                h[k] = h[k].tanh();
            }
            for a in 0..c {
                for b in 0..c {
                    let mut z = 0.0;
                    for k in 0..p.n1 {
                        z += p.u[(a * c + b) * p.n1 + k] * h[k];
                    }
                    assert_relative_eq!(w[a * c + b], z.exp(), max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn psi_with_zero_u_counts_subtag_pairs() {
        let mut p = random_params(4);
        p.u.iter_mut().for_each(|x| *x = 0.0);
        let key = EdgeKey::new("DET", "NOUN", "det");
        let a: MorphTag = "Gender=Fem|Number=Plur".parse().unwrap();
        let b: MorphTag = "Number=Sing".parse().unwrap();
        assert_relative_eq!(
            psi_neural(&a, &b, &key, &p).unwrap(),
            2f64.exp(),
            max_relative = 1e-15
        );
        assert_eq!(psi_neural(&MorphTag::empty(), &a, &key, &p).unwrap(), 1.0);
    }

    #[test]
    fn composes_with_linear_formula() {
        let p = random_params(5);
        let key = EdgeKey::new("ADJ", "NOUN", "amod");
        let w = neural_w(&key, &p).unwrap();
        let mut weights = BTreeMap::new();
        weights.insert(key.clone(), w);
        let lin = LinearParams::from_weights(p.vocab.clone(), weights).unwrap();
        let a: MorphTag = "Gender=Masc|Number=Sing".parse().unwrap();
        let b: MorphTag = "Gender=Fem|Number=Sing".parse().unwrap();
        assert_relative_eq!(
            psi_neural(&a, &b, &key, &p).unwrap(),
            psi_linear(&a, &b, &key, &lin).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let mut p = random_params(6);
        p.v.pop();
        assert!(matches!(
            neural_w(&EdgeKey::new("ADJ", "NOUN", "amod"), &p),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn flat_round_trip() {
        let p = random_params(7);
        let mut q = NeuralParams::zeros(
            vocab(),
            ids(&["ADJ", "DET", "NOUN"]),
            ids(&["amod", "det"]),
            DEFAULT_HIDDEN,
            DEFAULT_EMBEDDING,
        );
        q.set_flat(&p.flat()).unwrap();
        assert_eq!(p, q);
    }
}
