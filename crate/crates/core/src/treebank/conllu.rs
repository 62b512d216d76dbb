//! CoNLL-U reading and writing.
//!
//! Only the basic dependency layer is modeled. Multiword-token ranges
//! (`3-4`) and empty nodes (`3.1`) are skipped on input, and DEPS is always
//! written as `_`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tag::MorphTag;
use crate::error::{Error, Result};

/// A syntactic word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub pos: String,
    pub xpos: String,
    pub tag: MorphTag,
    /// 1-based head position, `None` for the root.
    pub head: Option<usize>,
    pub deplabel: String,
    pub misc: String,
}

/// A labeled dependency edge over 0-based positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge<'a> {
    pub child: usize,
    pub head: usize,
    pub label: &'a str,
}

/// A validated dependency tree with its tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepSentence {
    id: String,
    tokens: Vec<Token>,
    comments: Vec<String>,
}

impl DepSentence {
    /// Builds a sentence, checking that positions are contiguous, that there
    /// is exactly one root and that the head relation is acyclic.
    pub fn new(id: impl Into<String>, tokens: Vec<Token>) -> Result<Self> {
        Self::with_comments(id, tokens, Vec::new())
    }

    pub fn with_comments(
        id: impl Into<String>,
        tokens: Vec<Token>,
        comments: Vec<String>,
    ) -> Result<Self> {
        let sentence = DepSentence {
            id: id.into(),
            tokens,
            comments,
        };
        sentence.validate()?;
        Ok(sentence)
    }

    fn invalid(&self, message: String) -> Error {
        Error::Validation {
            sentence_id: self.id.clone(),
            message,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(self.invalid("sentence has no tokens".into()));
        }
        let mut roots = 0;
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.index != i + 1 {
                return Err(self.invalid(format!(
                    "token {} found at position {}",
                    tok.index,
                    i + 1
                )));
            }
            match tok.head {
                None => roots += 1,
                Some(h) if h == tok.index => {
                    return Err(self.invalid(format!("token {} is its own head", h)))
                }
                Some(h) if h == 0 || h > n => {
                    return Err(self.invalid(format!(
                        "token {} has head {} outside the sentence",
                        tok.index, h
                    )))
                }
                Some(_) => {}
            }
        }
        if roots != 1 {
            return Err(self.invalid(format!("expected one root, found {}", roots)));
        }

        // 0 = unvisited, 1 = on current path, 2 = reaches root
        let mut state = vec![0u8; n];
        for start in 0..n {
            let mut path = Vec::new();
            let mut cur = start;
            loop {
                match state[cur] {
                    2 => break,
                    1 => {
                        return Err(self.invalid(format!(
                            "cycle through token {}",
                            cur + 1
                        )))
                    }
                    _ => {}
                }
                state[cur] = 1;
                path.push(cur);
                match self.tokens[cur].head {
                    None => break,
                    Some(h) => cur = h - 1,
                }
            }
            for p in path {
                state[p] = 2;
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    /// 0-based position of the root token.
    pub fn root(&self) -> usize {
        self.tokens
            .iter()
            .position(|t| t.head.is_none())
            .expect("validated sentence has a root")
    }

    /// Non-root edges, child to head, with 0-based positions.
    pub fn edges(&self) -> impl Iterator<Item = Edge<'_>> {
        self.tokens.iter().enumerate().filter_map(|(i, t)| {
            t.head.map(|h| Edge {
                child: i,
                head: h - 1,
                label: &t.deplabel,
            })
        })
    }

    /// All `(dependent, head, label)` triples with 1-based positions; the
    /// root's head is 0.
    pub fn triples(&self) -> Vec<(usize, usize, String)> {
        self.tokens
            .iter()
            .map(|t| (t.index, t.head.unwrap_or(0), t.deplabel.clone()))
            .collect()
    }

    pub fn tags(&self) -> Vec<MorphTag> {
        self.tokens.iter().map(|t| t.tag.clone()).collect()
    }

    /// Copy with new id, tags and forms; the tree, POS and lemmas are kept.
    pub fn rewrite(&self, id: impl Into<String>, tags: &[MorphTag], forms: &[String]) -> Self {
        assert_eq!(tags.len(), self.tokens.len());
        assert_eq!(forms.len(), self.tokens.len());
        let tokens = self
            .tokens
            .iter()
            .zip(tags.iter().zip(forms))
            .map(|(t, (tag, form))| Token {
                tag: tag.clone(),
                form: form.clone(),
                ..t.clone()
            })
            .collect();
        DepSentence {
            id: id.into(),
            tokens,
            comments: self.comments.clone(),
        }
    }

    /// Surface text, honoring `SpaceAfter=No`.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            out.push_str(&t.form);
            let no_space = t.misc.split('|').any(|m| m == "SpaceAfter=No");
            if i + 1 < self.tokens.len() && !no_space {
                out.push(' ');
            }
        }
        out
    }
}

/// Result of reading a treebank: the valid sentences plus the ones that
/// failed tree validation.
#[derive(Debug, Default)]
pub struct Parsed {
    pub sentences: Vec<DepSentence>,
    pub rejected: Vec<Error>,
}

/// Parses CoNLL-U text. Malformed lines abort; invalid trees are collected
/// in [`Parsed::rejected`] and logged.
pub fn parse_conllu(text: &str) -> Result<Parsed> {
    read_conllu(text.as_bytes())
}

pub fn read_conllu_file(path: impl AsRef<Path>) -> Result<Parsed> {
    let file = File::open(path.as_ref())?;
    read_conllu(BufReader::new(file))
}

pub fn read_conllu<R: BufRead>(reader: R) -> Result<Parsed> {
    let mut parsed = Parsed::default();
    let mut block = Block::default();
    let mut ordinal = 0;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !block.is_empty() {
                ordinal += 1;
                block.finish(ordinal, &mut parsed);
                block = Block::default();
            }
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(id) = comment.strip_prefix("sent_id") {
                let id = id.trim_start().trim_start_matches('=').trim();
                block.id = Some(id.to_owned());
            } else if comment.starts_with("text ") || comment.starts_with("text=") {
                // regenerated on output
            } else {
                block.comments.push(comment.to_owned());
            }
            continue;
        }
        if let Some(token) = parse_token_line(line, lineno)? {
            block.tokens.push(token);
        } else {
            block.saw_line = true;
        }
    }
    if !block.is_empty() {
        ordinal += 1;
        block.finish(ordinal, &mut parsed);
    }
    Ok(parsed)
}

#[derive(Default)]
struct Block {
    id: Option<String>,
    tokens: Vec<Token>,
    comments: Vec<String>,
    saw_line: bool,
}

impl Block {
    fn is_empty(&self) -> bool {
        self.tokens.is_empty() && !self.saw_line && self.id.is_none()
    }

    fn finish(self, ordinal: usize, parsed: &mut Parsed) {
        let id = self.id.unwrap_or_else(|| format!("s{}", ordinal));
        match DepSentence::with_comments(id, self.tokens, self.comments) {
            Ok(s) => parsed.sentences.push(s),
            Err(e) => {
                log::warn!("skipping invalid sentence: {}", e);
                parsed.rejected.push(e);
            }
        }
    }
}

fn parse_token_line(line: &str, lineno: usize) -> Result<Option<Token>> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(Error::Parse {
            line: lineno,
            message: format!("expected 10 tab-separated columns, found {}", cols.len()),
        });
    }
    if cols[0].contains('-') || cols[0].contains('.') {
        return Ok(None);
    }
    let bad = |what: &str, value: &str| Error::Parse {
        line: lineno,
        message: format!("invalid {} '{}'", what, value),
    };
    let index: usize = cols[0].parse().map_err(|_| bad("ID", cols[0]))?;
    if index == 0 {
        return Err(bad("ID", cols[0]));
    }
    let head = match cols[6] {
        "0" => None,
        h => Some(h.parse::<usize>().map_err(|_| bad("HEAD", h))?),
    };
    let tag = cols[5].parse::<MorphTag>().map_err(|e| Error::Parse {
        line: lineno,
        message: e.to_string(),
    })?;
    Ok(Some(Token {
        index,
        form: cols[1].to_owned(),
        lemma: cols[2].to_owned(),
        pos: cols[3].to_owned(),
        xpos: cols[4].to_owned(),
        tag,
        head,
        deplabel: cols[7].to_owned(),
        misc: cols[9].to_owned(),
    }))
}

/// Writes sentences as CoNLL-U, one block per sentence, FEATS in
/// alphabetical feature order.
pub fn serialize_conllu(sentences: &[DepSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        write_sentence(&mut out, s);
    }
    out
}

fn write_sentence(out: &mut String, s: &DepSentence) {
    let _ = writeln!(out, "# sent_id = {}", s.id);
    let _ = writeln!(out, "# text = {}", s.text());
    for c in &s.comments {
        let _ = writeln!(out, "# {}", c);
    }
    for t in &s.tokens {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t_\t{}",
            t.index,
            t.form,
            t.lemma,
            t.pos,
            t.xpos,
            t.tag,
            t.head.unwrap_or(0),
            t.deplabel,
            t.misc
        );
    }
    out.push('\n');
}
