//! Regression of complexity on utterance position, convergence labels and
//! bootstrap bands.

mod bootstrap;
mod convergence;
mod lmm;
mod ols;

pub use bootstrap::{bootstrap_bands, percentile, BootstrapBand, BootstrapConfig};
pub use convergence::{classify_convergence, ConvergenceLabel, ConvergencePattern};
pub use lmm::{fit_lmm, fit_lmm_fixed_theta, reml_objective};
pub use ols::fit_ols;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

use crate::complexity::ComplexityRecord;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("utterance position is constant; slope is not identifiable")]
    DegenerateDesign,
    #[error("need at least {needed} observations, got {found}")]
    TooFewObservations { needed: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lmm,
    Ols,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Lmm => "lmm",
            Method::Ols => "ols",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    /// Response is constant: slope is exactly 0, variances are 0.
    ConstantResponse,
    /// No residual variation left once dialogue intercepts are removed.
    ZeroResidualVariance,
    /// Only one dialogue; ordinary least squares was used instead.
    OlsFallback,
}

/// Which regressor enters the model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionScale {
    /// Per-role utterance index.
    #[default]
    Raw,
    /// Index divided by the speaker's utterance count.
    Normalized,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FitOptions {
    pub position: PositionScale,
    /// Add a position² term (least squares only).
    pub quadratic: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub estimate: f64,
    pub se: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub method: Method,
    pub status: FitStatus,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub p_value: f64,
    pub sigma_u2: f64,
    pub sigma_e2: f64,
    pub n_obs: usize,
    pub n_groups: usize,
    /// Position² coefficient when the quadratic term was requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub quadratic: Option<Coefficient>,
}

impl RegressionResult {
    /// Residual degrees of freedom of the t-test used for least squares.
    pub fn residual_df(&self) -> f64 {
        let k = if self.quadratic.is_some() { 3 } else { 2 };
        self.n_obs.saturating_sub(k) as f64
    }

    /// The p-value implied by `slope` and `slope_se` under this fit's test.
    pub fn recompute_p_value(&self) -> f64 {
        match self.method {
            Method::Lmm => wald_p_value(self.slope, self.slope_se),
            Method::Ols => t_p_value(self.slope, self.slope_se, self.residual_df()),
        }
    }

    /// `σu²/σe²`, 0 when there is no residual variance.
    pub fn variance_ratio(&self) -> f64 {
        if self.sigma_e2 > 0.0 {
            self.sigma_u2 / self.sigma_e2
        } else {
            0.0
        }
    }

    pub fn stars(&self) -> &'static str {
        significance_stars(self.p_value)
    }

    pub fn is_degenerate(&self) -> bool {
        self.status == FitStatus::ConstantResponse
    }
}

/// `*` p < 0.05, `**` p < 0.01, `***` p < 0.001.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Handles a zero standard error: an exact zero estimate has p = 1, any
/// other estimate p = 0.
fn degenerate_p(estimate: f64) -> f64 {
    if estimate == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Two-sided normal-approximation p-value.
pub fn wald_p_value(estimate: f64, se: f64) -> f64 {
    if se.is_nan() || se <= 0.0 {
        return degenerate_p(estimate);
    }
    let z = (estimate / se).abs();
    let normal = Normal::standard();
    (2.0 * normal.sf(z)).clamp(0.0, 1.0)
}

/// Two-sided Student-t p-value.
pub fn t_p_value(estimate: f64, se: f64, df: f64) -> f64 {
    if se.is_nan() || se <= 0.0 {
        return degenerate_p(estimate);
    }
    if df.is_nan() || df <= 0.0 {
        return 1.0;
    }
    let t = (estimate / se).abs();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t)).clamp(0.0, 1.0)
}

/// Model inputs pulled from records: regressor, response and dense group
/// index per observation.
#[derive(Clone, Debug)]
pub(crate) struct Observations {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub group: Vec<usize>,
    pub n_groups: usize,
}

impl Observations {
    pub fn from_records(records: &[ComplexityRecord], scale: PositionScale) -> Self {
        let mut ids: Vec<&str> = records.iter().map(|r| r.dialogue_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        let group = records
            .iter()
            .map(|r| ids.binary_search(&r.dialogue_id.as_str()).unwrap())
            .collect();
        let x = records
            .iter()
            .map(|r| match scale {
                PositionScale::Raw => r.position as f64,
                PositionScale::Normalized => r.normalized_position,
            })
            .collect();
        Observations {
            x,
            y: records.iter().map(|r| r.sc).collect(),
            group,
            n_groups: ids.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn check_design(&self) -> Result<(), StatsError> {
        if self.len() < 3 {
            return Err(StatsError::TooFewObservations {
                needed: 3,
                found: self.len(),
            });
        }
        let first = self.x[0];
        if self.x.iter().all(|&v| v == first) {
            return Err(StatsError::DegenerateDesign);
        }
        Ok(())
    }

    pub fn constant_response(&self) -> Option<f64> {
        let first = self.y[0];
        self.y.iter().all(|&v| v == first).then_some(first)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
