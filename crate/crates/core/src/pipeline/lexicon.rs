use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::treebank::{DepSentence, MorphTag};

/// Surface forms indexed by lemma and tag, with lemmas and forms lowercased.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InflectionLexicon {
    forms: BTreeMap<(String, String), String>,
}

impl InflectionLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// One pass over the corpus. When a (lemma, tag) pair was seen with
    /// several forms, the most frequent wins, ties going to the
    /// alphabetically first.
    pub fn from_corpus<'a, I>(sentences: I) -> Self
    where
        I: IntoIterator<Item = &'a DepSentence>,
    {
        let mut counts: HashMap<(String, String), BTreeMap<String, usize>> = HashMap::new();
        for s in sentences {
            for t in s.tokens() {
                if t.lemma.is_empty() || t.lemma == "_" {
                    continue;
                }
                *counts
                    .entry((t.lemma.to_lowercase(), t.tag.to_string()))
                    .or_default()
                    .entry(t.form.to_lowercase())
                    .or_default() += 1;
            }
        }
        let forms = counts
            .into_iter()
            .map(|(key, seen)| {
                let mut best: Option<(&String, usize)> = None;
                for (form, &n) in &seen {
                    if best.is_none_or(|(_, b)| n > b) {
                        best = Some((form, n));
                    }
                }
                (key, best.expect("at least one form").0.clone())
            })
            .collect();
        InflectionLexicon { forms }
    }

    /// Adds or overrides one entry.
    pub fn insert(&mut self, lemma: &str, tag: &MorphTag, form: &str) {
        self.forms
            .insert((lemma.to_lowercase(), tag.to_string()), form.to_lowercase());
    }

    /// Applies a three-column TSV supplement (lemma, canonical tag, form)
    /// whose entries override corpus entries.
    pub fn supplement<R: BufRead>(&mut self, reader: R) -> Result<()> {
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 || cols.iter().any(|c| c.trim().is_empty()) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "expected 3 non-empty tab-separated columns (lemma, tag, form)".into(),
                });
            }
            let tag: MorphTag = cols[1].trim().parse().map_err(|e: Error| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            self.insert(cols[0].trim(), &tag, cols[2].trim());
        }
        Ok(())
    }

    pub fn supplement_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        self.supplement(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// Lowercased form for the lemma and tag.
    pub fn lookup(&self, lemma: &str, tag: &MorphTag) -> Option<&str> {
        self.forms
            .get(&(lemma.to_lowercase(), tag.to_string()))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Entries as (lemma, tag, form) in sorted order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.forms
            .iter()
            .map(|((l, t), f)| (l.as_str(), t.as_str(), f.as_str()))
    }

    /// Three-column TSV readable by [`supplement`](Self::supplement).
    pub fn to_tsv(&self) -> String {
        self.entries()
            .map(|(l, t, f)| format!("{}\t{}\t{}\n", l, t, f))
            .collect()
    }
}

/// Builds a lexicon from a treebank plus an optional supplement.
pub fn build_lexicon<R: BufRead>(
    treebank: &[DepSentence],
    supplement: Option<R>,
) -> Result<InflectionLexicon> {
    let mut lex = InflectionLexicon::from_corpus(treebank);
    if let Some(r) = supplement {
        lex.supplement(r)?;
    }
    Ok(lex)
}
