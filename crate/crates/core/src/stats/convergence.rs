use serde::{Deserialize, Serialize};

use super::RegressionResult;

/// How the two speakers' complexity trends relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergencePattern {
    /// Initiator significantly falling, follower significantly rising.
    Convergent,
    /// Initiator significantly rising, follower significantly falling.
    Divergent,
    ParallelIncrease,
    ParallelDecrease,
    /// Both rising, the follower more than ten times as steeply.
    FollowerRising,
    Inconclusive,
}

impl ConvergencePattern {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConvergencePattern::Convergent => "convergent",
            ConvergencePattern::Divergent => "divergent",
            ConvergencePattern::ParallelIncrease => "parallel_increase",
            ConvergencePattern::ParallelDecrease => "parallel_decrease",
            ConvergencePattern::FollowerRising => "follower_rising",
            ConvergencePattern::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLabel {
    pub label: ConvergencePattern,
    pub initiator: RegressionResult,
    pub follower: RegressionResult,
    pub alpha: f64,
}

const FOLLOWER_RISING_RATIO: f64 = 10.0;

fn pattern(
    initiator: &RegressionResult,
    follower: &RegressionResult,
    alpha: f64,
) -> ConvergencePattern {
    use ConvergencePattern::*;

    if initiator.is_degenerate() || follower.is_degenerate() {
        return Inconclusive;
    }
    if !(initiator.p_value < alpha && follower.p_value < alpha) {
        return Inconclusive;
    }
    let (a, b) = (initiator.slope, follower.slope);
    if a < 0.0 && b > 0.0 {
        Convergent
    } else if a > 0.0 && b < 0.0 {
        Divergent
    } else if a > 0.0 && b > 0.0 {
        if b > FOLLOWER_RISING_RATIO * a {
            FollowerRising
        } else {
            ParallelIncrease
        }
    } else if a < 0.0 && b < 0.0 {
        ParallelDecrease
    } else {
        Inconclusive
    }
}

/// Labels a pair of per-role fits; depends only on slope signs, their ratio
/// and the p-values against `alpha`.
pub fn classify_convergence(
    initiator: &RegressionResult,
    follower: &RegressionResult,
    alpha: f64,
) -> ConvergenceLabel {
    ConvergenceLabel {
        label: pattern(initiator, follower, alpha),
        initiator: initiator.clone(),
        follower: follower.clone(),
        alpha,
    }
}
