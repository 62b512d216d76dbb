//! Intrinsic agreement metrics and language-model bias measurements.

mod bias;
mod intrinsic;
mod ngram;

pub use bias::{
    bias_report, build_queries, grammaticality_score, naive_swap_baseline, read_queries,
    read_queries_file, stereotype_score, stereotyped_words, BiasAggregate, BiasQuery, BiasReport,
    BiasRow, FixtureScorer, PairCount, StereotypedWords,
};
pub use intrinsic::{intrinsic_score, score_sentence, IntrinsicScore};
pub use ngram::{tokenize, train_ngram, NGramLM, PrefixScorer, BOS, EOS, UNK};

/// Default n-gram order.
pub const DEFAULT_ORDER: usize = 3;
/// Default additive smoothing constant.
pub const DEFAULT_DELTA: f64 = 0.1;
/// Default share above which a noun pair counts as stereotyped.
pub const DEFAULT_STEREOTYPE_THRESHOLD: f64 = 0.75;
