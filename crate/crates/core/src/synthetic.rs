//! A miniature Spanish-like agreement language for end-to-end experiments.
//!
//! Sentences follow three templates over one animate noun:
//! `DET NOUN ADJ`, `DET NOUN ADJ AUX ADJ` and `DET NOUN AUX ADJ`. Determiners
//! and gendered adjectives agree with the noun in gender and number, and the
//! copula agrees in number. Occupation nouns are drawn masculine nine times
//! out of ten; kinship and age nouns are balanced.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::eval::BiasQuery;
use crate::pipeline::{AnimacyGazetteer, InflectionLexicon};
use crate::treebank::{DepSentence, Gender, MorphTag, Token};

/// A masculine/feminine noun lemma pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NounPair {
    pub masculine: &'static str,
    pub feminine: &'static str,
    pub occupation: bool,
}

const fn pair(masculine: &'static str, feminine: &'static str, occupation: bool) -> NounPair {
    NounPair {
        masculine,
        feminine,
        occupation,
    }
}

pub const NOUN_PAIRS: [NounPair; 20] = [
    pair("ingeniero", "ingeniera", true),
    pair("doctor", "doctora", true),
    pair("profesor", "profesora", true),
    pair("abogado", "abogada", true),
    pair("arquitecto", "arquitecta", true),
    pair("científico", "científica", true),
    pair("director", "directora", true),
    pair("programador", "programadora", true),
    pair("político", "política", true),
    pair("cocinero", "cocinera", true),
    pair("hermano", "hermana", false),
    pair("niño", "niña", false),
    pair("hijo", "hija", false),
    pair("amigo", "amiga", false),
    pair("vecino", "vecina", false),
    pair("abuelo", "abuela", false),
    pair("primo", "prima", false),
    pair("tío", "tía", false),
    pair("chico", "chica", false),
    pair("novio", "novia", false),
];

/// Adjective lemmas inflecting for gender (masculine singular citation form).
pub const GENDERED_ADJECTIVES: [&str; 10] = [
    "bueno", "malo", "hermoso", "alto", "bajo", "rico", "experto", "simpático", "famoso", "nuevo",
];

/// Adjectives inflecting only for number.
pub const INVARIANT_ADJECTIVES: [&str; 3] = ["inteligente", "amable", "fuerte"];

/// Share of masculine occurrences for occupation nouns.
pub const OCCUPATION_MASC_SHARE: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Template {
    /// DET NOUN ADJ, rooted at the noun.
    NounPhrase,
    /// DET NOUN ADJ AUX ADJ, rooted at the predicate adjective.
    Predicate,
    /// DET NOUN AUX ADJ, rooted at the predicate adjective.
    BarePredicate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Number {
    Singular,
    Plural,
}

/// Everything needed to render one sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SentenceSpec {
    pub template: Template,
    /// Index into [`NOUN_PAIRS`].
    pub noun: usize,
    pub gender: Gender,
    pub number: Number,
    pub definite: bool,
    /// Attributive adjective lemma (unused by [`Template::BarePredicate`]).
    pub attributive: &'static str,
    /// Predicate adjective lemma (unused by [`Template::NounPhrase`]).
    pub predicate: &'static str,
}

impl SentenceSpec {
    pub fn with_gender(self, gender: Gender) -> Self {
        SentenceSpec { gender, ..self }
    }

    /// 0-based position of the noun.
    pub fn noun_position(&self) -> usize {
        1
    }

    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let template = *[Template::NounPhrase, Template::Predicate, Template::BarePredicate]
            .choose(rng)
            .expect("non-empty");
        let noun = rng.gen_range(0..NOUN_PAIRS.len());
        let masc_share = if NOUN_PAIRS[noun].occupation {
            OCCUPATION_MASC_SHARE
        } else {
            0.5
        };
        let gender = if rng.gen_bool(masc_share) {
            Gender::Masculine
        } else {
            Gender::Feminine
        };
        let number = if rng.gen_bool(0.5) {
            Number::Singular
        } else {
            Number::Plural
        };
        let definite = rng.gen_bool(0.5);
        let adjective = |rng: &mut R| {
            let k = rng.gen_range(0..GENDERED_ADJECTIVES.len() + INVARIANT_ADJECTIVES.len());
            GENDERED_ADJECTIVES
                .get(k)
                .copied()
                .unwrap_or_else(|| INVARIANT_ADJECTIVES[k - GENDERED_ADJECTIVES.len()])
        };
        let attributive = adjective(rng);
        let predicate = adjective(rng);
        SentenceSpec {
            template,
            noun,
            gender,
            number,
            definite,
            attributive,
            predicate,
        }
    }

    /// The sentence as a dependency tree; the first form is capitalized.
    pub fn render(&self, id: &str) -> Result<DepSentence> {
        let det = determiner(self.definite, self.gender, self.number);
        let noun = noun(&NOUN_PAIRS[self.noun], self.gender, self.number);
        let adj = |lemma: &'static str| adjective(lemma, self.gender, self.number);
        let cop = copula(self.number);
        let rows: Vec<Row> = match self.template {
            Template::NounPhrase => vec![
                (det, 2, "det"),
                (noun, 0, "root"),
                (adj(self.attributive), 2, "amod"),
            ],
            Template::Predicate => vec![
                (det, 2, "det"),
                (noun, 5, "nsubj"),
                (adj(self.attributive), 2, "amod"),
                (cop, 5, "cop"),
                (adj(self.predicate), 0, "root"),
            ],
            Template::BarePredicate => vec![
                (det, 2, "det"),
                (noun, 4, "nsubj"),
                (cop, 4, "cop"),
                (adj(self.predicate), 0, "root"),
            ],
        };
        let mut tokens = Vec::with_capacity(rows.len());
        for (i, (word, head, label)) in rows.into_iter().enumerate() {
            let form = if i == 0 { capitalize(&word.form) } else { word.form };
            tokens.push(Token {
                index: i + 1,
                form,
                lemma: word.lemma.to_owned(),
                pos: word.pos.to_owned(),
                xpos: "_".to_owned(),
                tag: word.tag.parse()?,
                head: (head > 0).then_some(head),
                deplabel: label.to_owned(),
                misc: "_".to_owned(),
            });
        }
        DepSentence::new(id, tokens)
    }
}

struct Word {
    form: String,
    lemma: &'static str,
    pos: &'static str,
    tag: String,
}

type Row = (Word, usize, &'static str);

fn gender_value(g: Gender) -> &'static str {
    match g {
        Gender::Masculine => "Masc",
        Gender::Feminine => "Fem",
    }
}

fn number_value(n: Number) -> &'static str {
    match n {
        Number::Singular => "Sing",
        Number::Plural => "Plur",
    }
}

fn determiner(definite: bool, g: Gender, n: Number) -> Word {
    use Gender::*;
    use Number::*;
    let form = match (definite, g, n) {
        (true, Masculine, Singular) => "el",
        (true, Feminine, Singular) => "la",
        (true, Masculine, Plural) => "los",
        (true, Feminine, Plural) => "las",
        (false, Masculine, Singular) => "un",
        (false, Feminine, Singular) => "una",
        (false, Masculine, Plural) => "unos",
        (false, Feminine, Plural) => "unas",
    };
    Word {
        form: form.to_owned(),
        lemma: if definite { "el" } else { "uno" },
        pos: "DET",
        tag: format!(
            "Definite={}|Gender={}|Number={}|PronType=Art",
            if definite { "Def" } else { "Ind" },
            gender_value(g),
            number_value(n)
        ),
    }
}

fn pluralize(word: &str) -> String {
    if word.ends_with(['a', 'e', 'i', 'o', 'u', 'á', 'é', 'í', 'ó', 'ú']) {
        format!("{}s", word)
    } else {
        format!("{}es", word)
    }
}

fn noun(p: &NounPair, g: Gender, n: Number) -> Word {
    let lemma = match g {
        Gender::Masculine => p.masculine,
        Gender::Feminine => p.feminine,
    };
    let form = match n {
        Number::Singular => lemma.to_owned(),
        Number::Plural => pluralize(lemma),
    };
    Word {
        form,
        lemma,
        pos: "NOUN",
        tag: format!("Gender={}|Number={}", gender_value(g), number_value(n)),
    }
}

/// Feminine singular of a gendered adjective lemma ending in `o`.
fn feminine_adjective(lemma: &str) -> String {
    format!("{}a", lemma.strip_suffix('o').unwrap_or(lemma))
}

fn is_gendered_adjective(lemma: &str) -> bool {
    GENDERED_ADJECTIVES.contains(&lemma)
}

fn adjective(lemma: &'static str, g: Gender, n: Number) -> Word {
    if is_gendered_adjective(lemma) {
        let sing = match g {
            Gender::Masculine => lemma.to_owned(),
            Gender::Feminine => feminine_adjective(lemma),
        };
        Word {
            form: if n == Number::Plural { pluralize(&sing) } else { sing },
            lemma,
            pos: "ADJ",
            tag: format!("Gender={}|Number={}", gender_value(g), number_value(n)),
        }
    } else {
        Word {
            form: if n == Number::Plural {
                pluralize(lemma)
            } else {
                lemma.to_owned()
            },
            lemma,
            pos: "ADJ",
            tag: format!("Number={}", number_value(n)),
        }
    }
}

fn copula(n: Number) -> Word {
    Word {
        form: if n == Number::Plural { "son" } else { "es" }.to_owned(),
        lemma: "ser",
        pos: "AUX",
        tag: format!(
            "Mood=Ind|Number={}|Person=3|Tense=Pres|VerbForm=Fin",
            number_value(n)
        ),
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// `n` sampled specs from a seeded generator.
pub fn sample_specs(n: usize, seed: u64) -> Vec<SentenceSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| SentenceSpec::sample(&mut rng)).collect()
}

/// `n` sentences with ids `{prefix}-{k}`, `k` starting at 1.
pub fn generate_corpus(n: usize, seed: u64, prefix: &str) -> Result<Vec<DepSentence>> {
    sample_specs(n, seed)
        .iter()
        .enumerate()
        .map(|(k, s)| s.render(&format!("{}-{}", prefix, k + 1)))
        .collect()
}

/// A source sentence, its gold counterfactual after swapping the noun's
/// gender, and the 0-based noun position.
#[derive(Clone, Debug)]
pub struct InterventionCase {
    pub source: DepSentence,
    pub gold: DepSentence,
    pub position: usize,
}

/// Gold pairs from the agreement rules: the noun, the determiner and every
/// gendered adjective take the opposite gender.
pub fn intervention_cases(n: usize, seed: u64) -> Result<Vec<InterventionCase>> {
    sample_specs(n, seed)
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let id = format!("case-{}", k + 1);
            Ok(InterventionCase {
                source: s.render(&id)?,
                gold: s.with_gender(s.gender.opposite()).render(&id)?,
                position: s.noun_position(),
            })
        })
        .collect()
}

/// The twenty noun pairs.
pub fn gazetteer() -> AnimacyGazetteer {
    AnimacyGazetteer::from_pairs(NOUN_PAIRS.iter().map(|p| (p.masculine, p.feminine)))
        .expect("noun pairs are disjoint")
}

/// Masculine and feminine singular forms of every gendered adjective.
pub fn adjective_pairs() -> Vec<(String, String)> {
    GENDERED_ADJECTIVES
        .iter()
        .map(|a| (a.to_string(), feminine_adjective(a)))
        .collect()
}

/// One query per noun pair and gendered adjective, with definite articles.
pub fn bias_queries() -> Result<Vec<BiasQuery>> {
    let mut out = Vec::new();
    for p in &NOUN_PAIRS {
        for (am, af) in adjective_pairs() {
            out.push(BiasQuery::new(("el", "la"), (p.masculine, p.feminine), (&am, &af))?);
        }
    }
    Ok(out)
}

/// Every inflected form of the language, keyed by lemma and tag.
pub fn full_lexicon() -> Result<InflectionLexicon> {
    let mut lex = InflectionLexicon::new();
    let mut add = |w: Word| -> Result<()> {
        let tag: MorphTag = w.tag.parse()?;
        lex.insert(w.lemma, &tag, &w.form);
        Ok(())
    };
    for g in [Gender::Masculine, Gender::Feminine] {
        for n in [Number::Singular, Number::Plural] {
            for def in [true, false] {
                add(determiner(def, g, n))?;
            }
            for p in &NOUN_PAIRS {
                add(noun(p, g, n))?;
            }
            for a in GENDERED_ADJECTIVES.iter().chain(&INVARIANT_ADJECTIVES) {
                add(adjective(a, g, n))?;
            }
            add(copula(n))?;
        }
    }
    Ok(lex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::serialize_conllu;

    #[test]
    fn renders_agreeing_tree() {
        let spec = SentenceSpec {
            template: Template::Predicate,
            noun: 0,
            gender: Gender::Feminine,
            number: Number::Plural,
            definite: true,
            attributive: "alto",
            predicate: "experto",
        };
        let s = spec.render("x").unwrap();
        assert_eq!(s.text(), "Las ingenieras altas son expertas");
        assert_eq!(s.root(), 4);
        assert_eq!(s.tokens()[1].deplabel, "nsubj");
        let m = spec.with_gender(Gender::Masculine).render("x").unwrap();
        assert_eq!(m.text(), "Los ingenieros altos son expertos");
    }

    #[test]
    fn plural_of_consonant_stems() {
        let spec = SentenceSpec {
            template: Template::NounPhrase,
            noun: 1,
            gender: Gender::Masculine,
            number: Number::Plural,
            definite: false,
            attributive: "inteligente",
            predicate: "bueno",
        };
        let s = spec.render("x").unwrap();
        assert_eq!(s.text(), "Unos doctores inteligentes");
        assert_eq!(s.tokens()[2].tag.to_string(), "Number=Plur");
    }

    #[test]
    fn occupations_skew_masculine() {
        let specs = sample_specs(4000, 3);
        let occ: Vec<_> = specs.iter().filter(|s| NOUN_PAIRS[s.noun].occupation).collect();
        let masc = occ.iter().filter(|s| s.gender == Gender::Masculine).count();
        let share = masc as f64 / occ.len() as f64;
        assert!((share - 0.9).abs() < 0.03, "{}", share);
    }

    #[test]
    fn generation_is_seeded() {
        let a = serialize_conllu(&generate_corpus(50, 9, "s").unwrap());
        let b = serialize_conllu(&generate_corpus(50, 9, "s").unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn queries_cover_pairs_and_adjectives() {
        let q = bias_queries().unwrap();
        assert_eq!(q.len(), 200);
        assert_eq!(q[0].phrases()[1], ["la", "ingeniera", "buena"]);
        assert_eq!(gazetteer().len(), 20);
    }
}
