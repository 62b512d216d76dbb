use std::collections::{BTreeSet, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::conllu::DepSentence;
use super::tag::{MorphTag, Subtag};
use crate::error::{Error, Result};

/// What to do with a subtag that was not seen when the vocabulary was built.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownSubtagPolicy {
    #[default]
    Error,
    Drop,
}

impl FromStr for UnknownSubtagPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(UnknownSubtagPolicy::Error),
            "drop" => Ok(UnknownSubtagPolicy::Drop),
            other => Err(Error::Config(format!(
                "unknown subtag policy '{}' (expected error or drop)",
                other
            ))),
        }
    }
}

/// The ordered subtag inventory. Indices are the coordinates of the
/// multi-hot encoding and never change once built.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Subtag>", into = "Vec<Subtag>")]
pub struct SubtagVocab {
    subtags: Vec<Subtag>,
    index: HashMap<Subtag, usize>,
}

impl From<Vec<Subtag>> for SubtagVocab {
    fn from(subtags: Vec<Subtag>) -> Self {
        let index = subtags
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        SubtagVocab { subtags, index }
    }
}

impl From<SubtagVocab> for Vec<Subtag> {
    fn from(v: SubtagVocab) -> Self {
        v.subtags
    }
}

impl SubtagVocab {
    /// Collects the distinct subtags of a corpus, sorted by feature then value.
    pub fn build<'a, I>(sentences: I) -> Self
    where
        I: IntoIterator<Item = &'a DepSentence>,
    {
        let set: BTreeSet<Subtag> = sentences
            .into_iter()
            .flat_map(|s| s.tokens().iter())
            .flat_map(|t| t.tag.subtags())
            .collect();
        set.into_iter().collect::<Vec<_>>().into()
    }

    pub fn from_tags<'a, I>(tags: I) -> Self
    where
        I: IntoIterator<Item = &'a MorphTag>,
    {
        let set: BTreeSet<Subtag> = tags.into_iter().flat_map(|t| t.subtags()).collect();
        set.into_iter().collect::<Vec<_>>().into()
    }

    /// Number of subtags, the dimension of the multi-hot space.
    pub fn len(&self) -> usize {
        self.subtags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subtags.is_empty()
    }

    pub fn subtags(&self) -> &[Subtag] {
        &self.subtags
    }

    pub fn index_of(&self, subtag: &Subtag) -> Option<usize> {
        self.index.get(subtag).copied()
    }

    /// Indices of the active coordinates of `tag`, in ascending order.
    pub fn active(&self, tag: &MorphTag, policy: UnknownSubtagPolicy) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(tag.len());
        for s in tag.subtags() {
            match self.index_of(&s) {
                Some(i) => out.push(i),
                None => match policy {
                    UnknownSubtagPolicy::Error => return Err(Error::UnknownSubtag(s.to_string())),
                    UnknownSubtagPolicy::Drop => {}
                },
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Multi-hot encoding of `tag` as a 0/1 vector of length `len()`.
    pub fn multi_hot(&self, tag: &MorphTag, policy: UnknownSubtagPolicy) -> Result<Vec<u8>> {
        let mut v = vec![0u8; self.len()];
        for i in self.active(tag, policy)? {
            v[i] = 1;
        }
        Ok(v)
    }

    /// Inverse of [`multi_hot`](Self::multi_hot) on well-formed encodings.
    pub fn decode(&self, encoding: &[u8]) -> Result<MorphTag> {
        if encoding.len() != self.len() {
            return Err(Error::Data(format!(
                "encoding has length {}, vocabulary has {}",
                encoding.len(),
                self.len()
            )));
        }
        MorphTag::from_subtags(
            encoding
                .iter()
                .zip(&self.subtags)
                .filter(|(b, _)| **b != 0)
                .map(|(_, s)| s.clone()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::conllu::parse_conllu;
    use crate::fixtures::EL_INGENIERO;

    fn vocab3() -> SubtagVocab {
        // msc, fem, sg in that coordinate order
        vec![
            Subtag::new("Gender", "Masc").unwrap(),
            Subtag::new("Gender", "Fem").unwrap(),
            Subtag::new("Number", "Sing").unwrap(),
        ]
        .into()
    }

    #[test]
    fn msc_sg_encoding() {
        let v = vocab3();
        let t: MorphTag = "Gender=Masc|Number=Sing".parse().unwrap();
        assert_eq!(v.multi_hot(&t, UnknownSubtagPolicy::Error).unwrap(), vec![1, 0, 1]);
        assert_eq!(
            v.multi_hot(&MorphTag::empty(), UnknownSubtagPolicy::Error).unwrap(),
            vec![0, 0, 0]
        );
    }

    #[test]
    fn unknown_subtag_policy() {
        let v = vocab3();
        let t: MorphTag = "Gender=Masc|Person=3".parse().unwrap();
        match v.multi_hot(&t, UnknownSubtagPolicy::Error) {
            Err(Error::UnknownSubtag(s)) => assert_eq!(s, "Person=3"),
            other => panic!("unexpected {:?}", other),
        }
        assert_eq!(v.multi_hot(&t, UnknownSubtagPolicy::Drop).unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn two_tag_corpus_has_three_subtags() {
        let text = "1\ta\ta\tDET\t_\tGender=Masc|Number=Sing\t2\tdet\t_\t_
2\tb\tb\tNOUN\t_\tGender=Fem|Number=Sing\t0\troot\t_\t_
";
        let parsed = parse_conllu(text).unwrap();
        let v = SubtagVocab::build(&parsed.sentences);
        assert_eq!(v.len(), 3);
        let names: Vec<String> = v.subtags().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, vec!["Gender=Fem", "Gender=Masc", "Number=Sing"]);
        assert_eq!(SubtagVocab::build(&[]).len(), 0);
    }

    #[test]
    fn decode_inverts_encode_on_observed_tags() {
        let parsed = parse_conllu(EL_INGENIERO).unwrap();
        let v = SubtagVocab::build(&parsed.sentences);
        for t in parsed.sentences[0].tags() {
            let e = v.multi_hot(&t, UnknownSubtagPolicy::Error).unwrap();
            assert_eq!(v.decode(&e).unwrap(), t);
        }
    }

    #[test]
    fn serde_keeps_index() {
        let v = vocab3();
        let json = serde_json::to_string(&v).unwrap();
        let back: SubtagVocab = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.index_of(&Subtag::new("Number", "Sing").unwrap()), Some(2));
    }
}
