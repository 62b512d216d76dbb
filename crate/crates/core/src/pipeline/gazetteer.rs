use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::treebank::Gender;

/// Pairs of masculine and feminine lemmas of animate nouns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnimacyGazetteer {
    masculine: BTreeMap<String, String>,
    feminine: BTreeMap<String, String>,
}

impl AnimacyGazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a pair. A lemma may belong to only one pair; re-adding an
    /// identical pair is a no-op.
    pub fn insert(&mut self, masc: &str, fem: &str) -> Result<()> {
        if masc.is_empty() || fem.is_empty() {
            return Err(Error::Data("gazetteer lemmas must be non-empty".into()));
        }
        let (masc, fem) = (masc.to_lowercase(), fem.to_lowercase());
        if self.masculine.get(&masc) == Some(&fem) {
            return Ok(());
        }
        for lemma in [&masc, &fem] {
            if self.masculine.contains_key(lemma) || self.feminine.contains_key(lemma) {
                return Err(Error::Data(format!(
                    "gazetteer lemma {:?} already belongs to another pair",
                    lemma
                )));
            }
        }
        if masc == fem {
            return Err(Error::Data(format!(
                "gazetteer pair {:?} has the same lemma on both sides",
                masc
            )));
        }
        self.masculine.insert(masc.clone(), fem.clone());
        self.feminine.insert(fem, masc);
        Ok(())
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut g = Self::new();
        for (m, f) in pairs {
            g.insert(m, f)?;
        }
        Ok(g)
    }

    /// Reads a two-column TSV (masculine lemma, feminine lemma). Blank lines
    /// and `#` comments are ignored.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut g = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 2 tab-separated columns, found {}", cols.len()),
                });
            }
            g.insert(cols[0].trim(), cols[1].trim()).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(g)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn to_tsv(&self) -> String {
        self.pairs().map(|(m, f)| format!("{}\t{}\n", m, f)).collect()
    }

    /// The opposite-gender lemma and the gender of `lemma`.
    pub fn lookup(&self, lemma: &str) -> Option<(&str, Gender)> {
        let key = lemma.to_lowercase();
        if let Some(f) = self.masculine.get(&key) {
            return Some((f, Gender::Masculine));
        }
        self.feminine.get(&key).map(|m| (m.as_str(), Gender::Feminine))
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.lookup(lemma).is_some()
    }

    /// Pairs as (masculine, feminine), sorted by the masculine lemma.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.masculine.iter().map(|(m, f)| (m.as_str(), f.as_str()))
    }

    pub fn len(&self) -> usize {
        self.masculine.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masculine.is_empty()
    }
}
