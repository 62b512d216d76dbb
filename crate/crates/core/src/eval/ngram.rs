use std::collections::HashMap;

use crate::error::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

/// Lowercased whitespace tokens.
pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_lowercase).collect()
}

/// Anything that assigns a log-probability to a phrase prefix.
pub trait PrefixScorer {
    /// Natural-log probability that a sentence starts with `phrase`.
    fn prefix_logprob(&self, phrase: &[&str]) -> f64;
}

/// Word n-gram model with additive smoothing.
///
/// The vocabulary holds every training type plus `UNK` and `EOS`; `BOS`
/// only pads contexts. `P(w | h) = (c(h, w) + delta) / (c(h) + delta |V|)`.
#[derive(Clone, Debug)]
pub struct NGramLM {
    order: usize,
    delta: f64,
    ids: HashMap<String, u32>,
    words: Vec<String>,
    counts: HashMap<Vec<u32>, (u64, HashMap<u32, u64>)>,
}

impl NGramLM {
    /// Counts every k-gram of the BOS-padded, EOS-terminated, lowercased
    /// corpus.
    pub fn train<S: AsRef<str>>(corpus: &[Vec<S>], order: usize, delta: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("n-gram order must be at least 1".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Config(format!("smoothing constant must be positive, got {}", delta)));
        }
        if corpus.iter().all(|s| s.is_empty()) {
            return Err(Error::Data("language model corpus is empty".into()));
        }
        let mut lm = NGramLM {
            order,
            delta,
            ids: HashMap::new(),
            words: Vec::new(),
            counts: HashMap::new(),
        };
        for w in [BOS, EOS, UNK] {
            lm.intern(w);
        }
        for sentence in corpus.iter().filter(|s| !s.is_empty()) {
            let mut seq = vec![0u32; order - 1];
            for w in sentence {
                let id = lm.intern(&w.as_ref().to_lowercase());
                seq.push(id);
            }
            seq.push(1);
            for i in order - 1..seq.len() {
                let context = seq[i + 1 - order..i].to_vec();
                let entry = lm.counts.entry(context).or_default();
                entry.0 += 1;
                *entry.1.entry(seq[i]).or_default() += 1;
            }
        }
        Ok(lm)
    }

    fn intern(&mut self, w: &str) -> u32 {
        if let Some(&id) = self.ids.get(w) {
            return id;
        }
        let id = self.words.len() as u32;
        self.ids.insert(w.to_owned(), id);
        self.words.push(w.to_owned());
        id
    }

    fn id(&self, w: &str) -> u32 {
        match self.ids.get(&w.to_lowercase()) {
            Some(&0) | None => 2,
            Some(&id) => id,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `|V|`: training types plus `UNK` and `EOS`.
    pub fn vocab_size(&self) -> usize {
        self.words.len() - 1
    }

    /// Every predictable word: the training types, `UNK` and `EOS`.
    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.words[1..].iter().map(String::as_str)
    }

    fn logprob_ids(&self, context: &[u32], w: u32) -> f64 {
        let v = self.vocab_size() as f64;
        let (c_h, c_hw) = match self.counts.get(context) {
            Some((total, next)) => (*total as f64, *next.get(&w).unwrap_or(&0) as f64),
            None => (0.0, 0.0),
        };
        ((c_hw + self.delta) / (c_h + self.delta * v)).ln()
    }

    fn padded(&self, words: &[&str]) -> Vec<u32> {
        let mut seq = vec![0u32; self.order - 1];
        seq.extend(words.iter().map(|w| self.id(w)));
        seq
    }

    /// `log P(word | context)`, where `context` holds the preceding words
    /// (only the last `order - 1` matter; missing ones are BOS).
    pub fn logprob(&self, context: &[&str], word: &str) -> f64 {
        let mut seq = self.padded(context);
        let w = if word == EOS { 1 } else { self.id(word) };
        seq.push(w);
        let i = seq.len() - 1;
        self.logprob_ids(&seq[i + 1 - self.order..i], w)
    }

    /// Log-probability of the whole sentence including the EOS event.
    pub fn sentence_logprob(&self, sentence: &[&str]) -> f64 {
        let mut seq = self.padded(sentence);
        seq.push(1);
        (self.order - 1..seq.len())
            .map(|i| self.logprob_ids(&seq[i + 1 - self.order..i], seq[i]))
            .sum()
    }

    /// Per-token perplexity (EOS events counted) over a tokenized corpus.
    pub fn perplexity<S: AsRef<str>>(&self, corpus: &[Vec<S>]) -> f64 {
        let mut lp = 0.0;
        let mut n = 0usize;
        for s in corpus {
            let words: Vec<&str> = s.iter().map(AsRef::as_ref).collect();
            lp += self.sentence_logprob(&words);
            n += words.len() + 1;
        }
        (-lp / n.max(1) as f64).exp()
    }
}

impl PrefixScorer for NGramLM {
    fn prefix_logprob(&self, phrase: &[&str]) -> f64 {
        let seq = self.padded(phrase);
        (self.order - 1..seq.len())
            .map(|i| self.logprob_ids(&seq[i + 1 - self.order..i], seq[i]))
            .sum()
    }
}

/// Trains an n-gram model on a tokenized corpus.
pub fn train_ngram<S: AsRef<str>>(corpus: &[Vec<S>], order: usize, delta: f64) -> Result<NGramLM> {
    NGramLM::train(corpus, order, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(lines: &[&str]) -> Vec<Vec<String>> {
        lines.iter().map(|l| tokenize(l)).collect()
    }

    #[test]
    fn hand_count_bigram() {
        let lm = train_ngram(&corpus(&["a b"]), 2, 1.0).unwrap();
        assert_eq!(lm.vocab_size(), 4);
        assert!((lm.logprob(&["a"], "b") - (2.0f64 / 5.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn unseen_context_is_uniform() {
        let lm = train_ngram(&corpus(&["a b c"]), 3, 0.1).unwrap();
        let p = lm.logprob(&["c", "c"], "a").exp();
        assert!((p - 1.0 / lm.vocab_size() as f64).abs() < 1e-15);
    }

    #[test]
    fn unknown_words_map_to_unk() {
        let lm = train_ngram(&corpus(&["a b"]), 1, 1.0).unwrap();
        assert_eq!(lm.logprob(&[], "zzz"), lm.logprob(&[], UNK));
        assert_eq!(lm.logprob(&[], "A"), lm.logprob(&[], "a"));
    }

    #[test]
    fn uniform_unigram_prefix() {
        // 8 types + UNK + EOS; every type seen once would not be uniform,
        // so use delta so large that counts vanish in comparison
        let lm = train_ngram(&corpus(&["a b c d e f g h"]), 1, 1e12).unwrap();
        assert_eq!(lm.vocab_size(), 10);
        let lp = lm.prefix_logprob(&["a", "b", "c"]);
        assert!((lp - 3.0 * (0.1f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(train_ngram(&corpus(&["a"]), 0, 1.0).is_err());
        assert!(train_ngram(&corpus(&["a"]), 2, 0.0).is_err());
        assert!(train_ngram::<String>(&[], 2, 1.0).is_err());
        assert!(train_ngram(&corpus(&[""]), 2, 1.0).is_err());
    }
}
