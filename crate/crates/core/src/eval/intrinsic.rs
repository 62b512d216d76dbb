use std::ops::AddAssign;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::treebank::{DepSentence, MorphTag};

/// Counts behind tag precision, recall and F1 (positive class: the tag
/// differs from the source sentence) and tag and form accuracy. The
/// intervened position is never counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IntrinsicScore {
    /// Positions changed both in the prediction and in the gold.
    pub true_positive: usize,
    pub predicted_changed: usize,
    pub gold_changed: usize,
    pub tag_correct: usize,
    pub form_correct: usize,
    pub total: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

impl IntrinsicScore {
    /// 1 when nothing was predicted to change.
    pub fn precision(&self) -> f64 {
        ratio(self.true_positive, self.predicted_changed)
    }

    /// 1 when nothing should have changed.
    pub fn recall(&self) -> f64 {
        ratio(self.true_positive, self.gold_changed)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn tag_accuracy(&self) -> f64 {
        ratio(self.tag_correct, self.total)
    }

    pub fn form_accuracy(&self) -> f64 {
        ratio(self.form_correct, self.total)
    }

    pub const TSV_HEADER: &'static str = "system\tprecision\trecall\tf1\ttag_accuracy\tform_accuracy";

    /// A row under [`TSV_HEADER`](Self::TSV_HEADER), in percent.
    pub fn tsv_row(&self, system: &str) -> String {
        format!(
            "{}\t{:.2}\t{:.2}\t{:.2}\t{:.2}\t{:.2}",
            system,
            100.0 * self.precision(),
            100.0 * self.recall(),
            100.0 * self.f1(),
            100.0 * self.tag_accuracy(),
            100.0 * self.form_accuracy()
        )
    }
}

impl AddAssign for IntrinsicScore {
    fn add_assign(&mut self, o: Self) {
        self.true_positive += o.true_positive;
        self.predicted_changed += o.predicted_changed;
        self.gold_changed += o.gold_changed;
        self.tag_correct += o.tag_correct;
        self.form_correct += o.form_correct;
        self.total += o.total;
    }
}

impl std::iter::Sum for IntrinsicScore {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut acc = Self::default();
        for s in iter {
            acc += s;
        }
        acc
    }
}

/// Scores one predicted transformation of `source` against `gold`. Forms are
/// compared exactly; `intervened` is 0-based.
pub fn intrinsic_score(
    gold: &DepSentence,
    predicted_tags: &[MorphTag],
    predicted_forms: &[String],
    source: &DepSentence,
    intervened: usize,
) -> Result<IntrinsicScore> {
    let n = source.len();
    if gold.len() != n || predicted_tags.len() != n || predicted_forms.len() != n {
        return Err(Error::Validation {
            sentence_id: source.id().to_string(),
            message: format!(
                "misaligned lengths: source {}, gold {}, predicted {} tags and {} forms",
                n,
                gold.len(),
                predicted_tags.len(),
                predicted_forms.len()
            ),
        });
    }
    let mut s = IntrinsicScore::default();
    for i in (0..n).filter(|&i| i != intervened) {
        let src = &source.tokens()[i];
        let gold_tok = &gold.tokens()[i];
        let pred_changed = predicted_tags[i] != src.tag;
        let gold_changed = gold_tok.tag != src.tag;
        s.predicted_changed += pred_changed as usize;
        s.gold_changed += gold_changed as usize;
        s.true_positive += (pred_changed && gold_changed) as usize;
        s.tag_correct += (predicted_tags[i] == gold_tok.tag) as usize;
        s.form_correct += (predicted_forms[i] == gold_tok.form) as usize;
        s.total += 1;
    }
    Ok(s)
}

/// Scores a predicted sentence (tags and forms taken from its tokens).
pub fn score_sentence(
    gold: &DepSentence,
    predicted: &DepSentence,
    source: &DepSentence,
    intervened: usize,
) -> Result<IntrinsicScore> {
    let forms: Vec<String> = predicted.tokens().iter().map(|t| t.form.clone()).collect();
    intrinsic_score(gold, &predicted.tags(), &forms, source, intervened)
}
