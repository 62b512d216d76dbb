use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::InflectionLexicon;
use crate::error::{Error, Result};
use crate::treebank::{Gender, GenderConfig, MorphTag};

/// How a token's output form was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReinflectStatus {
    LexiconHit,
    SuffixRule,
    UnchangedFlagged,
}

impl fmt::Display for ReinflectStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReinflectStatus::LexiconHit => "lexicon",
            ReinflectStatus::SuffixRule => "suffix-rule",
            ReinflectStatus::UnchangedFlagged => "unchanged",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// The whole word must match.
    Word,
    /// The word must end with the pattern.
    Suffix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuffixRule {
    pub target: Gender,
    pub kind: RuleKind,
    pub from: String,
    pub to: String,
}

impl SuffixRule {
    fn apply(&self, word: &str) -> Option<String> {
        match self.kind {
            RuleKind::Word if word == self.from => Some(self.to.clone()),
            RuleKind::Suffix if word.len() > self.from.len() && word.ends_with(&self.from) => {
                Some(format!("{}{}", &word[..word.len() - self.from.len()], self.to))
            }
            _ => None,
        }
    }
}

/// Ordered fallback rules per target gender; the first matching rule wins.
///
/// File format, one rule per line: `<fem|masc> <word|suffix> <from> <to>`,
/// with `#` comments. `fem` rules apply when the new tag is feminine. A
/// `-` in the `from` or `to` column stands for the empty string, so
/// `fem suffix - h` appends `h`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuffixRules {
    rules: Vec<SuffixRule>,
}

impl SuffixRules {
    pub fn new(rules: Vec<SuffixRule>) -> Self {
        SuffixRules { rules }
    }

    pub fn rules(&self) -> &[SuffixRule] {
        &self.rules
    }

    /// Defaults for Spanish: articles, then `-or`/`-ora` and `-o`/`-a` with
    /// any plural `-s` kept.
    pub fn spanish() -> Self {
        include_str!("spanish_rules.txt")
            .parse()
            .expect("built-in rules parse")
    }

    pub fn read<R: BufRead>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        text.parse()
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// Rewrites a lowercased word toward `target`.
    pub fn apply(&self, word: &str, target: Gender) -> Option<String> {
        self.rules
            .iter()
            .filter(|r| r.target == target)
            .find_map(|r| r.apply(word))
    }
}

impl FromStr for SuffixRules {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", cols.len())));
            }
            let target = match cols[0] {
                "fem" => Gender::Feminine,
                "masc" => Gender::Masculine,
                other => return Err(err(format!("unknown target gender {:?}", other))),
            };
            let kind = match cols[1] {
                "word" => RuleKind::Word,
                "suffix" => RuleKind::Suffix,
                other => return Err(err(format!("unknown rule kind {:?}", other))),
            };
            let text = |c: &str| if c == "-" { String::new() } else { c.to_lowercase() };
            if kind == RuleKind::Word && cols[2] == "-" {
                return Err(err("a word rule needs a non-empty pattern".into()));
            }
            rules.push(SuffixRule {
                target,
                kind,
                from: text(cols[2]),
                to: text(cols[3]),
            });
        }
        Ok(SuffixRules { rules })
    }
}

/// Copies the capitalization pattern of `original` onto `form`.
pub fn restore_case(form: &str, original: &str) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return form.to_uppercase();
    }
    match original.chars().next() {
        Some(c) if c.is_uppercase() => {
            let mut chars = form.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        }
        _ => form.to_owned(),
    }
}

/// Surface form for `lemma` under `new_tag`.
///
/// Identical tags keep the original form. Otherwise each lemma in `lemmas`
/// is tried against the lexicon in turn, then the suffix rules for the new
/// tag's gender are applied to the original form. When nothing applies the
/// original form is returned and flagged.
pub fn reinflect(
    lemmas: &[&str],
    original_tag: &MorphTag,
    new_tag: &MorphTag,
    original_form: &str,
    lexicon: &InflectionLexicon,
    rules: &SuffixRules,
    gender: &GenderConfig,
) -> (String, ReinflectStatus) {
    if new_tag == original_tag {
        return (original_form.to_owned(), ReinflectStatus::LexiconHit);
    }
    for lemma in lemmas {
        if let Some(form) = lexicon.lookup(lemma, new_tag) {
            return (restore_case(form, original_form), ReinflectStatus::LexiconHit);
        }
    }
    if let Some(target) = gender.gender_of(new_tag) {
        if let Some(form) = rules.apply(&original_form.to_lowercase(), target) {
            return (restore_case(&form, original_form), ReinflectStatus::SuffixRule);
        }
    }
    (original_form.to_owned(), ReinflectStatus::UnchangedFlagged)
}
