//! Scalar complexity scores for a single utterance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deptree::DepTree;
use crate::treemetrics::TreeMetrics;

/// Weights of the four indicator counts of the Index of Syntactic Complexity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IscWeights {
    pub sconj: f64,
    pub wh: f64,
    pub nonfinite: f64,
    pub nominal: f64,
}

impl IscWeights {
    pub const UNIT: IscWeights = IscWeights {
        sconj: 1.0,
        wh: 1.0,
        nonfinite: 1.0,
        nominal: 1.0,
    };

    /// Subordinators and WH-words counted double.
    pub const CLASSIC: IscWeights = IscWeights {
        sconj: 2.0,
        wh: 2.0,
        nonfinite: 1.0,
        nominal: 1.0,
    };

    fn as_array(&self) -> [f64; 4] {
        [self.sconj, self.wh, self.nonfinite, self.nominal]
    }
}

impl Default for IscWeights {
    fn default() -> Self {
        IscWeights::UNIT
    }
}

/// `unit`, `classic`, or four comma-separated numbers in the order
/// sconj, wh, nonfinite, nominal.
impl FromStr for IscWeights {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit" => return Ok(IscWeights::UNIT),
            "classic" => return Ok(IscWeights::CLASSIC),
            _ => {}
        }
        let values: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("invalid ISC weights {s:?}"))?;
        match values[..] {
            [sconj, wh, nonfinite, nominal] => Ok(IscWeights {
                sconj,
                wh,
                nonfinite,
                nominal,
            }),
            _ => Err(format!("expected 4 ISC weights, got {}", values.len())),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("lambda must lie in [0, 1], got {0}")]
    Lambda(f64),
    #[error("ISC weights must be non-negative and finite")]
    Weights,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityConfig {
    lambda: f64,
    isc_weights: IscWeights,
}

impl ComplexityConfig {
    pub const DEFAULT_LAMBDA: f64 = 0.5;

    pub fn new(lambda: f64, isc_weights: IscWeights) -> Result<Self, ConfigError> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(ConfigError::Lambda(lambda));
        }
        if isc_weights
            .as_array()
            .iter()
            .any(|w| !w.is_finite() || *w < 0.0)
        {
            return Err(ConfigError::Weights);
        }
        Ok(ComplexityConfig {
            lambda,
            isc_weights,
        })
    }

    pub fn with_lambda(lambda: f64) -> Result<Self, ConfigError> {
        Self::new(lambda, IscWeights::default())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn isc_weights(&self) -> IscWeights {
        self.isc_weights
    }
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        ComplexityConfig {
            lambda: Self::DEFAULT_LAMBDA,
            isc_weights: IscWeights::default(),
        }
    }
}

/// `λ·L/α + (1 − λ)·β`, or `(1 − λ)·β` when there are no heads.
pub fn syntactic_complexity(metrics: &TreeMetrics, config: &ComplexityConfig) -> f64 {
    let lambda = config.lambda;
    let depth = metrics.depth as f64;
    if metrics.head_count > 0 {
        lambda * (metrics.length as f64 / metrics.head_count as f64) + (1.0 - lambda) * depth
    } else {
        (1.0 - lambda) * depth
    }
}

/// Raw indicator counts behind [`isc_score`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IscCounts {
    pub sconj: usize,
    pub wh: usize,
    pub nonfinite: usize,
    pub nominal: usize,
}

impl IscCounts {
    pub fn of(tree: &DepTree) -> Self {
        let mut counts = IscCounts::default();
        for t in &tree.tokens {
            if t.upos == "SCONJ" {
                counts.sconj += 1;
            }
            if matches!(
                t.feats.get("PronType").map(String::as_str),
                Some("Int") | Some("Rel")
            ) {
                counts.wh += 1;
            }
            if matches!(t.upos.as_str(), "VERB" | "AUX")
                && t.feats.get("VerbForm").is_some_and(|v| v != "Fin")
            {
                counts.nonfinite += 1;
            }
            if matches!(t.upos.as_str(), "NOUN" | "PROPN" | "PRON") {
                counts.nominal += 1;
            }
        }
        counts
    }

    pub fn weighted(&self, w: &IscWeights) -> f64 {
        w.sconj * self.sconj as f64
            + w.wh * self.wh as f64
            + w.nonfinite * self.nonfinite as f64
            + w.nominal * self.nominal as f64
    }
}

/// Weighted count of subordinators, WH-words, non-finite verbs and
/// nominals (a stand-in for noun phrases).
pub fn isc_score(tree: &DepTree, config: &ComplexityConfig) -> f64 {
    IscCounts::of(tree).weighted(&config.isc_weights)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Initiator,
    Follower,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::Initiator, Role::Follower];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Initiator => "initiator",
            Role::Follower => "follower",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "initiator" => Ok(Role::Initiator),
            "follower" => Ok(Role::Follower),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

/// Complexity of one utterance placed in its dialogue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRecord {
    pub dialogue_id: String,
    pub speaker: String,
    pub role: Role,
    /// 1-based index within this speaker's utterances.
    pub position: usize,
    /// `position / n` for a speaker with `n` utterances, in (0, 1].
    pub normalized_position: f64,
    pub sc: f64,
    /// Absent for records that did not come from a tree (synthetic data).
    pub components: Option<TreeMetrics>,
    /// Weighted ISC count under the scoring configuration.
    pub isc: Option<f64>,
}

impl ComplexityRecord {
    /// Whether `sc` is exactly what the stored components give under `config`.
    pub fn is_consistent(&self, config: &ComplexityConfig) -> bool {
        match &self.components {
            Some(m) => syntactic_complexity(m, config).to_bits() == self.sc.to_bits(),
            None => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_from_str() {
        assert_eq!(
            "classic".parse::<IscWeights>().unwrap(),
            IscWeights::CLASSIC
        );
        assert_eq!("unit".parse::<IscWeights>().unwrap(), IscWeights::UNIT);
        let w: IscWeights = "3, 2,1,0.5".parse().unwrap();
        assert_eq!((w.sconj, w.nominal), (3.0, 0.5));
        assert!("1,2".parse::<IscWeights>().is_err());
        assert!("x".parse::<IscWeights>().is_err());
    }
    use crate::deptree::Token;

    fn metrics(length: usize, head_count: usize, depth: usize) -> TreeMetrics {
        TreeMetrics {
            length,
            head_count,
            depth,
            branching_factor: 0.0,
            node_count: length,
        }
    }

    #[test]
    fn worked_examples() {
        let cfg = ComplexityConfig::default();
        let sc = syntactic_complexity(&metrics(4, 3, 3), &cfg);
        assert!((sc - 2.1667).abs() < 1e-4);
        assert_eq!(syntactic_complexity(&metrics(8, 4, 4), &cfg), 3.0);
        assert_eq!(syntactic_complexity(&metrics(1, 1, 1), &cfg), 1.0);
        assert_eq!(syntactic_complexity(&metrics(0, 0, 0), &cfg), 0.0);
        let cfg = ComplexityConfig::with_lambda(0.9).unwrap();
        assert_eq!(syntactic_complexity(&metrics(0, 0, 0), &cfg), 0.0);
    }

    #[test]
    fn lambda_extremes() {
        let m = metrics(7, 3, 5);
        let one = ComplexityConfig::with_lambda(1.0).unwrap();
        let zero = ComplexityConfig::with_lambda(0.0).unwrap();
        assert_eq!(syntactic_complexity(&m, &one), 7.0 / 3.0);
        assert_eq!(syntactic_complexity(&m, &zero), 5.0);
    }

    #[test]
    fn rejects_bad_config() {
        assert_eq!(
            ComplexityConfig::with_lambda(1.5),
            Err(ConfigError::Lambda(1.5))
        );
        let w = IscWeights {
            sconj: -1.0,
            ..IscWeights::UNIT
        };
        assert_eq!(ComplexityConfig::new(0.5, w), Err(ConfigError::Weights));
    }

    /// weil(SCONJ) wir(PRON) spielen(VERB, Fin) um(ADP) zu(PART)
    /// gewinnen(VERB, Inf) Runde(NOUN) Karten(NOUN)
    fn isc_fixture() -> DepTree {
        let tokens = vec![
            Token::new(1, "weil", "SCONJ", 3),
            Token::new(2, "wir", "PRON", 3).with_feat("PronType", "Prs"),
            Token::new(3, "spielen", "VERB", 0).with_feat("VerbForm", "Fin"),
            Token::new(4, "um", "ADP", 6),
            Token::new(5, "zu", "PART", 6),
            Token::new(6, "gewinnen", "VERB", 3).with_feat("VerbForm", "Inf"),
            Token::new(7, "Runde", "NOUN", 6),
            Token::new(8, "Karten", "NOUN", 7),
        ];
        DepTree::new(tokens, Default::default())
    }

    #[test]
    fn isc_counts() {
        let tree = isc_fixture();
        let counts = IscCounts::of(&tree);
        // The pronoun is personal, not interrogative/relative, but nominal.
        assert_eq!(
            counts,
            IscCounts {
                sconj: 1,
                wh: 0,
                nonfinite: 1,
                nominal: 3,
            }
        );
    }

    #[test]
    fn isc_examples() {
        // Drop the pronoun to get 1 SCONJ, 1 infinitive, 2 NOUN.
        let mut tree = isc_fixture();
        tree.tokens[1].upos = "DET".into();
        let unit = ComplexityConfig::default();
        assert_eq!(isc_score(&tree, &unit), 4.0);
        let classic = ComplexityConfig::new(0.5, IscWeights::CLASSIC).unwrap();
        assert_eq!(isc_score(&tree, &classic), 5.0);

        let plain = DepTree::from_heads(&[0, 1]);
        assert_eq!(isc_score(&plain, &unit), 0.0);
    }

    #[test]
    fn wh_pronouns() {
        let tokens = vec![
            Token::new(1, "was", "PRON", 2).with_feat("PronType", "Int"),
            Token::new(2, "machst", "VERB", 0),
            Token::new(3, "der", "PRON", 2).with_feat("PronType", "Rel"),
        ];
        let tree = DepTree::new(tokens, Default::default());
        let counts = IscCounts::of(&tree);
        assert_eq!(counts.wh, 2);
        // A verb without VerbForm is not counted as non-finite.
        assert_eq!(counts.nonfinite, 0);
    }

    #[test]
    fn role_round_trip() {
        for role in Role::ALL {
            assert_eq!(role.as_str().parse::<Role>(), Ok(role));
        }
    }
}
