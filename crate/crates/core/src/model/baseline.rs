//! Hand-written agreement factors.
//!
//! A rules file lists activated `(dependent POS, head POS, label)` patterns,
//! one per line, with `*` as a label wildcard. `weight <x>` sets the log
//! score per agreeing coordinate and `features <F1> <F2> ...` the features
//! that count toward agreement. `#` starts a comment.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EdgeKey;
use crate::error::{Error, Result};
use crate::treebank::MorphTag;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub dependent_pos: String,
    pub head_pos: String,
    /// `None` matches any label.
    pub label: Option<String>,
}

impl Pattern {
    pub fn matches(&self, key: &EdgeKey) -> bool {
        self.dependent_pos == key.dependent_pos
            && self.head_pos == key.head_pos
            && self.label.as_ref().is_none_or(|l| *l == key.label)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineRules {
    pub patterns: Vec<Pattern>,
    pub weight: f64,
    pub features: Vec<String>,
}

impl Default for BaselineRules {
    fn default() -> Self {
        BaselineRules {
            patterns: Vec::new(),
            weight: 1.0,
            features: vec!["Gender".to_owned(), "Number".to_owned()],
        }
    }
}

impl BaselineRules {
    /// Determiners and adjectives agreeing with their nouns.
    pub fn spanish() -> Self {
        BaselineRules {
            patterns: vec![
                Pattern {
                    dependent_pos: "DET".into(),
                    head_pos: "NOUN".into(),
                    label: None,
                },
                Pattern {
                    dependent_pos: "ADJ".into(),
                    head_pos: "NOUN".into(),
                    label: None,
                },
            ],
            ..Default::default()
        }
    }

    pub fn is_active(&self, key: &EdgeKey) -> bool {
        self.patterns.iter().any(|p| p.matches(key))
    }

    /// Number of agreement features on which both tags carry the same value.
    pub fn agreeing(&self, a: &MorphTag, b: &MorphTag) -> usize {
        self.features
            .iter()
            .filter(|f| matches!((a.get(f), b.get(f)), (Some(x), Some(y)) if x == y))
            .count()
    }

    pub fn log_psi(&self, dependent: &MorphTag, head: &MorphTag, key: &EdgeKey) -> f64 {
        if self.is_active(key) {
            self.weight * self.agreeing(dependent, head) as f64
        } else {
            0.0
        }
    }
}

impl FromStr for BaselineRules {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut rules = BaselineRules::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_owned(),
            };
            match fields.as_slice() {
                ["weight", w] => {
                    rules.weight = w
                        .parse()
                        .ok()
                        .filter(|w: &f64| w.is_finite() && *w > 0.0)
                        .ok_or_else(|| bad("weight must be a positive number"))?;
                }
                ["features", rest @ ..] if !rest.is_empty() => {
                    rules.features = rest.iter().map(|s| s.to_string()).collect();
                }
                [dep, head, label] => rules.patterns.push(Pattern {
                    dependent_pos: dep.to_string(),
                    head_pos: head.to_string(),
                    label: (*label != "*").then(|| label.to_string()),
                }),
                _ => return Err(bad("expected '<dependent POS> <head POS> <label|*>'")),
            }
        }
        Ok(rules)
    }
}

/// `psi` of the hard-coded baseline: `exp(weight * #agreeing coordinates)`
/// on activated edges, 1 elsewhere.
pub fn psi_baseline(
    dependent: &MorphTag,
    head: &MorphTag,
    key: &EdgeKey,
    rules: &BaselineRules,
) -> f64 {
    rules.log_psi(dependent, head, key).exp()
}
