//! Syntactic complexity of dialogue utterances and tests for whether the
//! two speakers' complexity converges over an interaction.
//!
//! The pipeline: CoNLL-U parses ([`deptree`]) are measured ([`treemetrics`])
//! and scored ([`complexity`]) per utterance, grouped into two-party
//! dialogues with initiator and follower roles ([`dialogue`]), and the
//! per-role series are regressed on utterance position ([`stats`]).
//! [`mstdecode`] covers head-selection probabilities and maximum spanning
//! arborescence decoding over a score matrix.

pub mod complexity;
pub mod deptree;
pub mod dialogue;
pub mod fixtures;
pub mod mstdecode;
pub mod report;
pub mod stats;
pub mod synth;
pub mod treemetrics;

pub use complexity::{
    isc_score, syntactic_complexity, ComplexityConfig, ComplexityRecord, IscWeights, Role,
};
pub use deptree::{parse_conllu, serialize_conllu, validate_tree, DepTree, Token};
pub use dialogue::{assign_roles, complexity_series, load_corpus, Corpus, Dialogue};
pub use mstdecode::{head_probabilities, mst_decode, ScoreMatrix};
pub use stats::{
    bootstrap_bands, classify_convergence, fit_lmm, fit_ols, BootstrapBand, ConvergenceLabel,
    RegressionResult,
};
pub use treemetrics::{MetricsOptions, TreeMetrics};
