//! Synthetic complexity series with known per-role trends.
//!
//! For dialogue `d` and role `r`, utterance `p` gets
//! `intercept_r + slope_r·p + u_dr + e` with `u_dr ~ N(0, σu²)` drawn once
//! per dialogue and role and `e ~ N(0, σe²)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity::{ComplexityRecord, Role};
use crate::dialogue::finalize_records;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoleTrend {
    pub intercept: f64,
    pub slope: f64,
    pub utterances: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub dialogues: usize,
    pub sigma_u: f64,
    pub sigma_e: f64,
    pub initiator: RoleTrend,
    pub follower: RoleTrend,
    pub seed: u64,
}

impl SynthConfig {
    /// Initiator falling, follower rising.
    pub fn convergent() -> Self {
        SynthConfig {
            dialogues: 200,
            sigma_u: 0.3,
            sigma_e: 0.5,
            initiator: RoleTrend {
                intercept: 3.0,
                slope: -0.02,
                utterances: 30,
            },
            follower: RoleTrend {
                intercept: 3.0,
                slope: 0.005,
                utterances: 30,
            },
            seed: 1,
        }
    }

    fn trend(&self, role: Role) -> RoleTrend {
        match role {
            Role::Initiator => self.initiator,
            Role::Follower => self.follower,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic corpus parameter: {0}")]
    Parameter(String),
    #[error("dialogue {dialogue_id}: generated negative complexity {value}; raise the intercept")]
    Negative { dialogue_id: String, value: f64 },
}

/// Generates records sorted by `(dialogue_id, role, position)`, with
/// speakers `A` (initiator) and `B` (follower).
pub fn generate(config: &SynthConfig) -> Result<Vec<ComplexityRecord>, SynthError> {
    if config.dialogues == 0 {
        return Err(SynthError::Parameter("dialogues must be at least 1".into()));
    }
    if config.initiator.utterances == 0 || config.follower.utterances == 0 {
        return Err(SynthError::Parameter(
            "utterances must be at least 1".into(),
        ));
    }
    let dist = |sd: f64, name: &str| {
        Normal::new(0.0, sd).map_err(|_| SynthError::Parameter(format!("{name} = {sd}")))
    };
    let u = dist(config.sigma_u, "sigma_u")?;
    let e = dist(config.sigma_e, "sigma_e")?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let width = config.dialogues.to_string().len().max(4);
    let mut records = Vec::new();
    for d in 1..=config.dialogues {
        let dialogue_id = format!("synth{d:0width$}");
        for role in Role::ALL {
            let trend = config.trend(role);
            let offset = u.sample(&mut rng);
            for p in 1..=trend.utterances {
                let sc = trend.intercept + trend.slope * p as f64 + offset + e.sample(&mut rng);
                if sc < 0.0 {
                    return Err(SynthError::Negative {
                        dialogue_id,
                        value: sc,
                    });
                }
                records.push(ComplexityRecord {
                    dialogue_id: dialogue_id.clone(),
                    speaker: match role {
                        Role::Initiator => "A".into(),
                        Role::Follower => "B".into(),
                    },
                    role,
                    position: p,
                    normalized_position: 0.0,
                    sc,
                    components: None,
                    isc: None,
                });
            }
        }
    }
    finalize_records(&mut records);
    Ok(records)
}
