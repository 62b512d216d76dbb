use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One atomic `feature=value` pair from a FEATS column.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subtag {
    pub feature: String,
    pub value: String,
}

impl Subtag {
    pub fn new(feature: impl Into<String>, value: impl Into<String>) -> Result<Self> {
        let feature = feature.into();
        let value = value.into();
        if feature.is_empty() || value.is_empty() {
            return Err(Error::Data(format!(
                "subtag needs a non-empty feature and value, got '{}={}'",
                feature, value
            )));
        }
        Ok(Subtag { feature, value })
    }
}

impl fmt::Display for Subtag {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}={}", self.feature, self.value)
    }
}

/// A morpho-syntactic tag: a set of subtags with at most one value per
/// feature. The empty tag is written `_`.
///
/// Features are kept in a sorted map, so the textual form is canonical
/// (alphabetical feature order).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MorphTag(BTreeMap<String, String>);

impl MorphTag {
    pub fn empty() -> Self {
        MorphTag(BTreeMap::new())
    }

    pub fn from_subtags<I>(subtags: I) -> Result<Self>
    where
        I: IntoIterator<Item = Subtag>,
    {
        let mut map = BTreeMap::new();
        for s in subtags {
            if let Some(prev) = map.insert(s.feature.clone(), s.value.clone()) {
                return Err(Error::Data(format!(
                    "feature {} given twice ({} and {})",
                    s.feature, prev, s.value
                )));
            }
        }
        Ok(MorphTag(map))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, feature: &str) -> Option<&str> {
        self.0.get(feature).map(String::as_str)
    }

    /// Returns a copy with `feature` set to `value`.
    pub fn with(&self, feature: &str, value: &str) -> Self {
        let mut map = self.0.clone();
        map.insert(feature.to_owned(), value.to_owned());
        MorphTag(map)
    }

    /// Returns a copy with `feature` removed.
    pub fn without(&self, feature: &str) -> Self {
        let mut map = self.0.clone();
        map.remove(feature);
        MorphTag(map)
    }

    pub fn subtags(&self) -> impl Iterator<Item = Subtag> + '_ {
        self.0.iter().map(|(f, v)| Subtag {
            feature: f.clone(),
            value: v.clone(),
        })
    }

    pub fn features(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(f, v)| (f.as_str(), v.as_str()))
    }
}

impl fmt::Display for MorphTag {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("_");
        }
        for (i, (feat, val)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{}={}", feat, val)?;
        }
        Ok(())
    }
}

impl FromStr for MorphTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "_" {
            return Ok(MorphTag::empty());
        }
        let subtags = s
            .split('|')
            .map(|part| {
                let (feat, val) = part
                    .split_once('=')
                    .ok_or_else(|| Error::Data(format!("malformed feature '{}'", part)))?;
                Subtag::new(feat, val)
            })
            .collect::<Result<Vec<_>>>()?;
        MorphTag::from_subtags(subtags)
    }
}

/// Names the gender feature and its two values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderConfig {
    pub feature: String,
    pub masculine: String,
    pub feminine: String,
}

impl Default for GenderConfig {
    fn default() -> Self {
        GenderConfig {
            feature: "Gender".to_owned(),
            masculine: "Masc".to_owned(),
            feminine: "Fem".to_owned(),
        }
    }
}

/// Grammatical gender, restricted to the two configured values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Masculine,
    Feminine,
}

impl Gender {
    pub fn opposite(self) -> Gender {
        match self {
            Gender::Masculine => Gender::Feminine,
            Gender::Feminine => Gender::Masculine,
        }
    }
}

impl GenderConfig {
    pub fn value(&self, gender: Gender) -> &str {
        match gender {
            Gender::Masculine => &self.masculine,
            Gender::Feminine => &self.feminine,
        }
    }

    /// The gender carried by `tag`, if it has one of the two configured values.
    pub fn gender_of(&self, tag: &MorphTag) -> Option<Gender> {
        match tag.get(&self.feature) {
            Some(v) if v == self.masculine => Some(Gender::Masculine),
            Some(v) if v == self.feminine => Some(Gender::Feminine),
            _ => None,
        }
    }

    pub fn is_gendered(&self, tag: &MorphTag) -> bool {
        self.gender_of(tag).is_some()
    }

    /// Toggles the gender subtag, leaving every other subtag alone.
    pub fn swap(&self, tag: &MorphTag) -> Result<MorphTag> {
        let gender = self
            .gender_of(tag)
            .ok_or_else(|| Error::NoGender(tag.to_string()))?;
        Ok(self.set(tag, gender.opposite()))
    }

    pub fn set(&self, tag: &MorphTag, gender: Gender) -> MorphTag {
        tag.with(&self.feature, self.value(gender))
    }
}
