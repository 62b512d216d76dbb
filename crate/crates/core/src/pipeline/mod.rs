//! Analyze, intervene, infer and reinflect, for single sentences and for
//! counterfactual augmentation of whole corpora.

mod gazetteer;
mod lexicon;
mod reinflect;

pub use gazetteer::AnimacyGazetteer;
pub use lexicon::{build_lexicon, InflectionLexicon};
pub use reinflect::{restore_case, reinflect, ReinflectStatus, RuleKind, SuffixRule, SuffixRules};

use std::fmt;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{build_instance, max_product};
use crate::model::{ModelParams, UnaryConstraint};
use crate::treebank::{
    gender_tag_domains, DepSentence, GenderConfig, MorphTag, UnknownSubtagPolicy,
};

/// Default cap on variants generated per sentence.
pub const DEFAULT_MAX_VARIANTS: usize = 8;

/// 0-based positions of animate nouns: tokens tagged NOUN (or PROPN when
/// `include_propn`) whose lemma is in the gazetteer and whose tag carries a
/// gender.
pub fn find_animate_nouns(
    sentence: &DepSentence,
    gazetteer: &AnimacyGazetteer,
    gender: &GenderConfig,
    include_propn: bool,
) -> Vec<usize> {
    sentence
        .tokens()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.pos == "NOUN" || (include_propn && t.pos == "PROPN"))
        .filter(|(_, t)| gazetteer.contains(&t.lemma) && gender.is_gendered(&t.tag))
        .map(|(i, _)| i)
        .collect()
}

/// Toggles the gender subtag of `tag`.
pub fn swap_gender(tag: &MorphTag, gender: &GenderConfig) -> Result<MorphTag> {
    gender.swap(tag)
}

/// Most probable tags after fixing the tags at `clamps`. Every other gendered
/// position may keep or swap its gender, and keeping it is preferred by
/// `log_alpha`.
pub fn infer_tags(
    sentence: &DepSentence,
    clamps: &[(usize, MorphTag)],
    params: &ModelParams,
    gender: &GenderConfig,
    log_alpha: f64,
    policy: UnknownSubtagPolicy,
) -> Result<Vec<MorphTag>> {
    let domains = gender_tag_domains(sentence, gender);
    let mut constraints = sentence
        .tokens()
        .iter()
        .map(|t| UnaryConstraint::prefer(t.tag.clone(), log_alpha))
        .collect::<Result<Vec<_>>>()?;
    for (position, tag) in clamps {
        let slot = constraints.get_mut(*position).ok_or_else(|| Error::Constraint {
            position: position + 1,
            message: format!("sentence {} has {} tokens", sentence.id(), sentence.len()),
        })?;
        *slot = UnaryConstraint::Clamp(tag.clone());
    }
    let graph = build_instance(sentence, &domains, params, &constraints, policy)?;
    let assignment = max_product(&graph)?;
    Ok(assignment
        .iter()
        .enumerate()
        .map(|(i, &x)| domains.domain(i)[x].clone())
        .collect())
}

/// Swaps the gender of the noun at `position` and infers the remaining tags.
pub fn intervene(
    sentence: &DepSentence,
    position: usize,
    params: &ModelParams,
    gender: &GenderConfig,
    log_alpha: f64,
    policy: UnknownSubtagPolicy,
) -> Result<Vec<MorphTag>> {
    let token = sentence.tokens().get(position).ok_or_else(|| Error::Constraint {
        position: position + 1,
        message: format!("sentence {} has {} tokens", sentence.id(), sentence.len()),
    })?;
    let swapped = gender.swap(&token.tag)?;
    infer_tags(sentence, &[(position, swapped)], params, gender, log_alpha, policy)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TokenChange {
    /// 1-based token index.
    pub index: usize,
    pub original_form: String,
    pub new_form: String,
    pub original_tag: String,
    pub new_tag: String,
    pub status: ReinflectStatus,
}

/// Outcome of one intervention on one sentence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterventionReport {
    pub sentence_id: String,
    /// 1-based index of the intervened noun.
    pub intervened: usize,
    pub tokens: Vec<TokenChange>,
}

impl InterventionReport {
    /// 1-based indices whose tag changed.
    pub fn changed_tags(&self) -> Vec<usize> {
        self.tokens
            .iter()
            .filter(|t| t.original_tag != t.new_tag)
            .map(|t| t.index)
            .collect()
    }

    pub fn flagged(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| t.status == ReinflectStatus::UnchangedFlagged)
            .count()
    }
}

impl fmt::Display for InterventionReport {
    /// A human-readable diff listing only the tokens whose tag changed.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {} intervened at {}", self.sentence_id, self.intervened)?;
        for t in self.tokens.iter().filter(|t| t.original_tag != t.new_tag) {
            writeln!(
                f,
                "{}\t{} -> {}\t{} -> {}\t{}",
                t.index, t.original_form, t.new_form, t.original_tag, t.new_tag, t.status
            )?;
        }
        Ok(())
    }
}

/// Everything needed to transform sentences of one language.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub params: ModelParams,
    pub gender: GenderConfig,
    pub log_alpha: f64,
    pub policy: UnknownSubtagPolicy,
    pub gazetteer: AnimacyGazetteer,
    pub lexicon: InflectionLexicon,
    pub rules: SuffixRules,
    pub include_propn: bool,
}

/// A counterfactual copy of a sentence produced during augmentation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantReport {
    pub source_id: String,
    pub variant_id: String,
    /// 1-based indices of the nouns whose gender was swapped.
    pub swapped: Vec<usize>,
    pub changed_tags: usize,
    pub flagged: usize,
}

#[derive(Debug, Default)]
pub struct Augmented {
    /// Originals in input order, each followed by its variants.
    pub sentences: Vec<DepSentence>,
    pub variants: Vec<VariantReport>,
    /// Sentences whose variants could not be produced, with the reason.
    pub failures: Vec<(String, Error)>,
}

impl Pipeline {
    pub fn animate_nouns(&self, sentence: &DepSentence) -> Vec<usize> {
        find_animate_nouns(sentence, &self.gazetteer, &self.gender, self.include_propn)
    }

    /// Realizes a tag assignment as a new sentence. Nouns in `swapped` look
    /// up their gazetteer partner lemma before their own lemma.
    pub fn realize(
        &self,
        sentence: &DepSentence,
        id: &str,
        tags: &[MorphTag],
        swapped: &[usize],
    ) -> (DepSentence, Vec<TokenChange>) {
        let mut forms = Vec::with_capacity(tags.len());
        let mut changes = Vec::with_capacity(tags.len());
        for (i, (tok, new_tag)) in sentence.tokens().iter().zip(tags).enumerate() {
            let partner = swapped
                .contains(&i)
                .then(|| self.gazetteer.lookup(&tok.lemma).map(|(p, _)| p))
                .flatten();
            let lemmas: Vec<&str> = partner.into_iter().chain([tok.lemma.as_str()]).collect();
            let (form, status) = reinflect(
                &lemmas,
                &tok.tag,
                new_tag,
                &tok.form,
                &self.lexicon,
                &self.rules,
                &self.gender,
            );
            changes.push(TokenChange {
                index: i + 1,
                original_form: tok.form.clone(),
                new_form: form.clone(),
                original_tag: tok.tag.to_string(),
                new_tag: new_tag.to_string(),
                status,
            });
            forms.push(form);
        }
        (sentence.rewrite(id, tags, &forms), changes)
    }

    /// Swaps the gender of the noun at 0-based `position`, infers the other
    /// tags and reinflects.
    pub fn intervene(
        &self,
        sentence: &DepSentence,
        position: usize,
    ) -> Result<(DepSentence, InterventionReport)> {
        let tags = intervene(
            sentence,
            position,
            &self.params,
            &self.gender,
            self.log_alpha,
            self.policy,
        )?;
        let (out, tokens) = self.realize(sentence, sentence.id(), &tags, &[position]);
        let report = InterventionReport {
            sentence_id: sentence.id().to_string(),
            intervened: position + 1,
            tokens,
        };
        Ok((out, report))
    }

    /// Variants of one sentence: for each non-empty subset of its animate
    /// nouns, in increasing bitmask order, the nouns in the subset are
    /// clamped to the opposite gender and the others to their own, and all
    /// other tags are inferred in one pass.
    pub fn variants(
        &self,
        sentence: &DepSentence,
        max_variants: usize,
    ) -> Result<Vec<(DepSentence, VariantReport)>> {
        let nouns = self.animate_nouns(sentence);
        let k = nouns.len();
        let total = if k >= 64 { u64::MAX } else { (1u64 << k) - 1 };
        let count = total.min(max_variants as u64);
        let mut out = Vec::with_capacity(count as usize);
        for mask in 1..=count {
            let mut clamps = Vec::with_capacity(k);
            let mut swapped = Vec::new();
            for (bit, &p) in nouns.iter().enumerate() {
                let tag = &sentence.tokens()[p].tag;
                if bit < 64 && mask >> bit & 1 == 1 {
                    clamps.push((p, self.gender.swap(tag)?));
                    swapped.push(p);
                } else {
                    clamps.push((p, tag.clone()));
                }
            }
            let tags = infer_tags(
                sentence,
                &clamps,
                &self.params,
                &self.gender,
                self.log_alpha,
                self.policy,
            )?;
            let id = format!("{}-cda{}", sentence.id(), mask);
            let (variant, changes) = self.realize(sentence, &id, &tags, &swapped);
            let report = VariantReport {
                source_id: sentence.id().to_string(),
                variant_id: id,
                swapped: swapped.iter().map(|p| p + 1).collect(),
                changed_tags: changes.iter().filter(|c| c.original_tag != c.new_tag).count(),
                flagged: changes
                    .iter()
                    .filter(|c| c.status == ReinflectStatus::UnchangedFlagged)
                    .count(),
            };
            out.push((variant, report));
        }
        Ok(out)
    }

    /// Counterfactual data augmentation. Sentences are processed in
    /// parallel; the output keeps input order with each sentence's variants
    /// directly after it. A sentence that fails is kept without variants.
    pub fn augment_corpus(&self, corpus: &[DepSentence], max_variants: usize) -> Augmented {
        let results: Vec<Result<Vec<(DepSentence, VariantReport)>>> = corpus
            .par_iter()
            .map(|s| self.variants(s, max_variants))
            .collect();
        let mut out = Augmented::default();
        for (s, r) in corpus.iter().zip(results) {
            out.sentences.push(s.clone());
            match r {
                Ok(vs) => {
                    for (v, rep) in vs {
                        out.sentences.push(v);
                        out.variants.push(rep);
                    }
                }
                Err(e) => {
                    warn!("sentence {}: no variants ({})", s.id(), e);
                    out.failures.push((s.id().to_string(), e));
                }
            }
        }
        out
    }
}

/// One line per sentence with tokens separated by single spaces.
pub fn to_plain_text(sentences: &[DepSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        let forms: Vec<&str> = s.tokens().iter().map(|t| t.form.as_str()).collect();
        out.push_str(&forms.join(" "));
        out.push('\n');
    }
    out
}
