//! Dependency treebanks: CoNLL-U I/O, morpho-syntactic tags and the subtag
//! vocabulary.

mod conllu;
mod domains;
mod tag;
mod vocab;

pub use conllu::{
    parse_conllu, read_conllu, read_conllu_file, serialize_conllu, DepSentence, Edge, Parsed,
    Token,
};
pub use domains::{gender_tag_domains, TagDomainTable};
pub use tag::{Gender, GenderConfig, MorphTag, Subtag};
pub use vocab::{SubtagVocab, UnknownSubtagPolicy};

use std::collections::BTreeSet;

/// Distinct tags observed in a corpus, in sorted order.
pub fn tag_inventory<'a, I>(sentences: I) -> Vec<MorphTag>
where
    I: IntoIterator<Item = &'a DepSentence>,
{
    let set: BTreeSet<MorphTag> = sentences
        .into_iter()
        .flat_map(|s| s.tokens().iter().map(|t| t.tag.clone()))
        .collect();
    set.into_iter().collect()
}
