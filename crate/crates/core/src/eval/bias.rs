use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::Path;

use serde::Serialize;

use super::ngram::PrefixScorer;
use crate::error::{Error, Result};
use crate::pipeline::{find_animate_nouns, reinflect, AnimacyGazetteer, InflectionLexicon, SuffixRules};
use crate::treebank::{DepSentence, Gender, GenderConfig};

/// A determiner, noun and adjective, each in masculine and feminine form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BiasQuery {
    pub det_m: String,
    pub det_f: String,
    pub noun_m: String,
    pub noun_f: String,
    pub adj_m: String,
    pub adj_f: String,
}

impl BiasQuery {
    pub fn new(det: (&str, &str), noun: (&str, &str), adj: (&str, &str)) -> Result<Self> {
        let q = BiasQuery {
            det_m: det.0.to_owned(),
            det_f: det.1.to_owned(),
            noun_m: noun.0.to_owned(),
            noun_f: noun.1.to_owned(),
            adj_m: adj.0.to_owned(),
            adj_f: adj.1.to_owned(),
        };
        if q.fields().iter().any(|f| f.trim().is_empty()) {
            return Err(Error::Data("bias query fields must be non-empty".into()));
        }
        Ok(q)
    }

    fn fields(&self) -> [&str; 6] {
        [
            &self.det_m,
            &self.det_f,
            &self.noun_m,
            &self.noun_f,
            &self.adj_m,
            &self.adj_f,
        ]
    }

    /// The four phrases: masculine and feminine grammatical, then the two
    /// mismatched ones (masculine determiner and adjective around the
    /// feminine noun, and the reverse).
    pub fn phrases(&self) -> [[&str; 3]; 4] {
        [
            [&self.det_m, &self.noun_m, &self.adj_m],
            [&self.det_f, &self.noun_f, &self.adj_f],
            [&self.det_m, &self.noun_f, &self.adj_m],
            [&self.det_f, &self.noun_m, &self.adj_f],
        ]
    }

    pub fn to_tsv_line(&self) -> String {
        self.fields().join("\t")
    }
}

/// Reads a six-column TSV (det_m, det_f, noun_m, noun_f, adj_m, adj_f).
pub fn read_queries<R: BufRead>(reader: R) -> Result<Vec<BiasQuery>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let c: Vec<&str> = line.split('\t').map(str::trim).collect();
        if c.len() != 6 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 6 tab-separated columns, found {}", c.len()),
            });
        }
        out.push(BiasQuery::new((c[0], c[1]), (c[2], c[3]), (c[4], c[5])).map_err(|e| {
            Error::Parse {
                line: i + 1,
                message: e.to_string(),
            }
        })?);
    }
    Ok(out)
}

pub fn read_queries_file(path: impl AsRef<Path>) -> Result<Vec<BiasQuery>> {
    read_queries(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// One query per (noun pair, adjective pair), nouns in gazetteer order.
pub fn build_queries(
    gazetteer: &AnimacyGazetteer,
    adjectives: &[(String, String)],
    determiners: (&str, &str),
) -> Result<Vec<BiasQuery>> {
    let mut out = Vec::new();
    for (m, f) in gazetteer.pairs() {
        for (am, af) in adjectives {
            out.push(BiasQuery::new(determiners, (m, f), (am, af))?);
        }
    }
    Ok(out)
}

fn lp(lm: &dyn PrefixScorer, phrase: [&str; 3]) -> f64 {
    lm.prefix_logprob(&phrase)
}

/// `log P(masculine phrase) - log P(feminine phrase)`; positive values mean
/// a masculine skew.
pub fn stereotype_score(lm: &dyn PrefixScorer, q: &BiasQuery) -> f64 {
    let [p1, p2, _, _] = q.phrases();
    lp(lm, p1) - lp(lm, p2)
}

/// Mean margin of each grammatical phrase over its mismatched counterpart.
pub fn grammaticality_score(lm: &dyn PrefixScorer, q: &BiasQuery) -> f64 {
    let [p1, p2, p3, p4] = q.phrases();
    ((lp(lm, p1) - lp(lm, p3)) + (lp(lm, p2) - lp(lm, p4))) / 2.0
}

/// Phrase log-probabilities given directly, keyed by condition and the
/// lowercased phrase with single spaces.
#[derive(Clone, Debug, Default)]
pub struct FixtureScorer {
    values: HashMap<String, f64>,
}

impl FixtureScorer {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        FixtureScorer {
            values: entries
                .into_iter()
                .map(|(p, v)| (Self::key(p.as_ref()), v))
                .collect(),
        }
    }

    fn key(phrase: &str) -> String {
        phrase.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
    }

    /// Reads `condition<TAB>phrase<TAB>logprob` lines into one scorer per
    /// condition, in order of first appearance.
    pub fn read_conditions<R: BufRead>(reader: R) -> Result<Vec<(String, FixtureScorer)>> {
        let mut out: Vec<(String, FixtureScorer)> = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let c: Vec<&str> = line.split('\t').collect();
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            if c.len() != 3 {
                return Err(parse_err(format!("expected 3 tab-separated columns, found {}", c.len())));
            }
            let v: f64 = c[2]
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("bad log-probability {:?}: {}", c[2], e)))?;
            let key = Self::key(c[1]);
            match out.iter_mut().find(|(name, _)| name == c[0]) {
                Some((_, s)) => {
                    s.values.insert(key, v);
                }
                None => {
                    let mut s = FixtureScorer::default();
                    s.values.insert(key, v);
                    out.push((c[0].to_owned(), s));
                }
            }
        }
        Ok(out)
    }
}

impl PrefixScorer for FixtureScorer {
    /// Unknown phrases score negative infinity.
    fn prefix_logprob(&self, phrase: &[&str]) -> f64 {
        *self
            .values
            .get(&Self::key(&phrase.join(" ")))
            .unwrap_or(&f64::NEG_INFINITY)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasRow {
    pub condition: String,
    pub noun: String,
    pub adjective: String,
    pub stereotype: f64,
    pub grammaticality: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasAggregate {
    pub condition: String,
    /// Mean over queries of the absolute stereotype score.
    pub mean_abs_stereotype: f64,
    pub mean_grammaticality: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BiasReport {
    pub rows: Vec<BiasRow>,
    pub aggregates: Vec<BiasAggregate>,
}

/// Scores every query under every named condition.
pub fn bias_report(conditions: &[(&str, &dyn PrefixScorer)], queries: &[BiasQuery]) -> BiasReport {
    let mut report = BiasReport::default();
    for (name, lm) in conditions {
        let mut abs_sum = 0.0;
        let mut gram_sum = 0.0;
        for q in queries {
            let s = stereotype_score(*lm, q);
            let g = grammaticality_score(*lm, q);
            abs_sum += s.abs();
            gram_sum += g;
            report.rows.push(BiasRow {
                condition: name.to_string(),
                noun: q.noun_m.clone(),
                adjective: q.adj_m.clone(),
                stereotype: s,
                grammaticality: g,
            });
        }
        let n = queries.len().max(1) as f64;
        report.aggregates.push(BiasAggregate {
            condition: name.to_string(),
            mean_abs_stereotype: abs_sum / n,
            mean_grammaticality: gram_sum / n,
        });
    }
    report
}

impl BiasReport {
    pub fn aggregate(&self, condition: &str) -> Option<&BiasAggregate> {
        self.aggregates.iter().find(|a| a.condition == condition)
    }

    /// Per-query scores followed by a blank line and the aggregates.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("condition\tnoun\tadjective\tstereotype\tgrammaticality\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.4}\t{:.4}\n",
                r.condition, r.noun, r.adjective, r.stereotype, r.grammaticality
            ));
        }
        out.push_str("\ncondition\tmean_abs_stereotype\tmean_grammaticality\n");
        for a in &self.aggregates {
            out.push_str(&format!(
                "{}\t{:.4}\t{:.4}\n",
                a.condition, a.mean_abs_stereotype, a.mean_grammaticality
            ));
        }
        out
    }

    /// Plot-ready rows: `language, condition, metric, value`.
    pub fn to_long_format(&self, language: &str) -> String {
        let mut out = String::from("language\tcondition\tmetric\tvalue\n");
        for a in &self.aggregates {
            out.push_str(&format!(
                "{}\t{}\tmean_abs_stereotype\t{:.6}\n",
                language, a.condition, a.mean_abs_stereotype
            ));
            out.push_str(&format!(
                "{}\t{}\tmean_grammaticality\t{:.6}\n",
                language, a.condition, a.mean_grammaticality
            ));
        }
        out
    }

    /// Signed mean stereotype score per noun under one condition.
    pub fn noun_means(&self, condition: &str) -> BTreeMap<String, f64> {
        let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.condition == condition) {
            let e = acc.entry(r.noun.clone()).or_default();
            e.0 += r.stereotype;
            e.1 += 1;
        }
        acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
    }
}

/// Occurrence counts of one gazetteer pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCount {
    pub masculine: String,
    pub feminine: String,
    pub masc_count: usize,
    pub fem_count: usize,
}

impl PairCount {
    pub fn masc_share(&self) -> f64 {
        self.masc_count as f64 / (self.masc_count + self.fem_count) as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StereotypedWords {
    pub masculine: Vec<PairCount>,
    pub feminine: Vec<PairCount>,
}

/// Counts the gendered occurrences of each gazetteer pair (by noun tag) and
/// assigns a pair to a gender when that gender's share reaches `threshold`.
/// Pairs never seen are left out.
pub fn stereotyped_words(
    corpus: &[DepSentence],
    gazetteer: &AnimacyGazetteer,
    gender: &GenderConfig,
    threshold: f64,
) -> Result<StereotypedWords> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(Error::Config(format!("threshold must lie in (0.5, 1], got {}", threshold)));
    }
    let mut counts: BTreeMap<(String, String), (usize, usize)> = BTreeMap::new();
    for s in corpus {
        for p in find_animate_nouns(s, gazetteer, gender, false) {
            let tok = &s.tokens()[p];
            let (other, lemma_gender) = gazetteer.lookup(&tok.lemma).expect("found by lookup");
            let lemma = tok.lemma.to_lowercase();
            let key = match lemma_gender {
                Gender::Masculine => (lemma, other.to_owned()),
                Gender::Feminine => (other.to_owned(), lemma),
            };
            let e = counts.entry(key).or_default();
            match gender.gender_of(&tok.tag) {
                Some(Gender::Masculine) => e.0 += 1,
                Some(Gender::Feminine) => e.1 += 1,
                None => {}
            }
        }
    }
    let mut out = StereotypedWords::default();
    for ((m, f), (mc, fc)) in counts {
        let pc = PairCount {
            masculine: m,
            feminine: f,
            masc_count: mc,
            fem_count: fc,
        };
        if pc.masc_share() >= threshold {
            out.masculine.push(pc);
        } else if 1.0 - pc.masc_share() >= threshold {
            out.feminine.push(pc);
        }
    }
    Ok(out)
}

/// Naive swapping: each sentence with animate nouns is followed by one copy
/// in which only those nouns change gender (tag and form); nothing else is
/// touched.
pub fn naive_swap_baseline(
    corpus: &[DepSentence],
    gazetteer: &AnimacyGazetteer,
    lexicon: &InflectionLexicon,
    rules: &SuffixRules,
    gender: &GenderConfig,
) -> Result<Vec<DepSentence>> {
    let mut out = Vec::with_capacity(corpus.len() * 2);
    for s in corpus {
        out.push(s.clone());
        let nouns = find_animate_nouns(s, gazetteer, gender, false);
        if nouns.is_empty() {
            continue;
        }
        let mut tags = s.tags();
        let mut forms: Vec<String> = s.tokens().iter().map(|t| t.form.clone()).collect();
        for &p in &nouns {
            let tok = &s.tokens()[p];
            let new_tag = gender.swap(&tok.tag)?;
            let partner = gazetteer.lookup(&tok.lemma).map(|(l, _)| l).expect("animate noun");
            let (form, _) = reinflect(
                &[partner, &tok.lemma],
                &tok.tag,
                &new_tag,
                &tok.form,
                lexicon,
                rules,
                gender,
            );
            tags[p] = new_tag;
            forms[p] = form;
        }
        out.push(s.rewrite(format!("{}-swap", s.id()), &tags, &forms));
    }
    Ok(out)
}
