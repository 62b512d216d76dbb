use super::conllu::DepSentence;
use super::tag::{GenderConfig, MorphTag};
use crate::error::{Error, Result};

/// Candidate tags per position. The first entry of each list is the
/// position's observed tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagDomainTable {
    domains: Vec<Vec<MorphTag>>,
}

impl TagDomainTable {
    pub fn new(domains: Vec<Vec<MorphTag>>) -> Result<Self> {
        if let Some(p) = domains.iter().position(Vec::is_empty) {
            return Err(Error::Data(format!("empty tag domain at position {}", p + 1)));
        }
        Ok(TagDomainTable { domains })
    }

    /// Every position ranges over the same tag set.
    pub fn uniform(len: usize, tags: &[MorphTag]) -> Result<Self> {
        Self::new(vec![tags.to_vec(); len])
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn domain(&self, position: usize) -> &[MorphTag] {
        &self.domains[position]
    }

    pub fn domains(&self) -> &[Vec<MorphTag>] {
        &self.domains
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.domains.iter().map(Vec::len).collect()
    }

    /// Size of the joint assignment space.
    pub fn space_size(&self) -> u128 {
        self.domains
            .iter()
            .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
    }

    pub fn index_of(&self, position: usize, tag: &MorphTag) -> Option<usize> {
        self.domains[position].iter().position(|t| t == tag)
    }
}

/// Gendered positions may keep their tag or take the gender-swapped one;
/// every other subtag stays fixed. Ungendered positions are singletons.
pub fn gender_tag_domains(sentence: &DepSentence, gender: &GenderConfig) -> TagDomainTable {
    let domains = sentence
        .tokens()
        .iter()
        .map(|t| match gender.swap(&t.tag) {
            Ok(swapped) => vec![t.tag.clone(), swapped],
            Err(_) => vec![t.tag.clone()],
        })
        .collect();
    TagDomainTable { domains }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::EL_INGENIERO;
    use crate::treebank::conllu::parse_conllu;

    #[test]
    fn el_ingeniero_domains() {
        let s = &parse_conllu(EL_INGENIERO).unwrap().sentences[0];
        let d = gender_tag_domains(s, &GenderConfig::default());
        assert_eq!(d.sizes(), vec![2, 2, 2, 1, 1, 2]);
        assert_eq!(d.space_size(), 16);
        assert_eq!(d.domain(1)[1].to_string(), "Gender=Fem|Number=Sing");
        for p in 0..d.len() {
            assert_eq!(d.index_of(p, &s.tokens()[p].tag), Some(0));
        }
    }

    #[test]
    fn ungendered_sentence_is_all_singletons() {
        let text = "1\tcorre\tcorrer\tVERB\t_\tNumber=Sing\t0\troot\t_\t_\n2\trápido\trápido\tADV\t_\t_\t1\tadvmod\t_\t_\n";
        let s = &parse_conllu(text).unwrap().sentences[0];
        let d = gender_tag_domains(s, &GenderConfig::default());
        assert_eq!(d.sizes(), vec![1, 1]);
        assert_eq!(d.space_size(), 1);
    }

    #[test]
    fn empty_domain_rejected() {
        assert!(TagDomainTable::new(vec![vec![MorphTag::empty()], vec![]]).is_err());
    }
}
