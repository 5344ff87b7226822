use nalgebra::{DMatrix, DVector};

use super::{
    mean, t_p_value, Coefficient, FitOptions, FitStatus, Method, Observations, RegressionResult,
    StatsError,
};
use crate::complexity::ComplexityRecord;

/// Ordinary least squares of complexity on position with a t-test on the
/// slope. Dialogue membership is ignored except for `n_groups`.
pub fn fit_ols(
    records: &[ComplexityRecord],
    options: FitOptions,
) -> Result<RegressionResult, StatsError> {
    let obs = Observations::from_records(records, options.position);
    obs.check_design()?;
    if options.quadratic {
        fit_quadratic(&obs)
    } else {
        Ok(fit_linear(&obs))
    }
}

pub(crate) fn fit_linear(obs: &Observations) -> RegressionResult {
    let n = obs.len();
    let x_mean = mean(&obs.x);
    let y_mean = mean(&obs.y);

    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in obs.x.iter().zip(&obs.y) {
        let dx = x - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }

    if let Some(c) = obs.constant_response() {
        return RegressionResult {
            method: Method::Ols,
            status: FitStatus::ConstantResponse,
            slope: 0.0,
            intercept: c,
            slope_se: 0.0,
            p_value: 1.0,
            sigma_u2: 0.0,
            sigma_e2: 0.0,
            n_obs: n,
            n_groups: obs.n_groups,
            quadratic: None,
        };
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = obs
        .x
        .iter()
        .zip(&obs.y)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let df = (n - 2) as f64;
    let sigma_e2 = if df > 0.0 { ssr / df } else { 0.0 };
    let slope_se = (sigma_e2 / sxx).sqrt();

    RegressionResult {
        method: Method::Ols,
        status: FitStatus::Ok,
        slope,
        intercept,
        slope_se,
        p_value: t_p_value(slope, slope_se, df),
        sigma_u2: 0.0,
        sigma_e2,
        n_obs: n,
        n_groups: obs.n_groups,
        quadratic: None,
    }
}

fn fit_quadratic(obs: &Observations) -> Result<RegressionResult, StatsError> {
    let n = obs.len();
    if n < 4 {
        return Err(StatsError::TooFewObservations {
            needed: 4,
            found: n,
        });
    }
    // Centre the regressor so the position² column is not collinear with it
    // in floating point; coefficients are mapped back afterwards.
    let c = mean(&obs.x);
    let design = DMatrix::from_fn(n, 3, |i, j| (obs.x[i] - c).powi(j as i32));
    let y = DVector::from_column_slice(&obs.y);

    let xtx = design.transpose() * &design;
    let xty = design.transpose() * &y;
    let chol = xtx.cholesky().ok_or(StatsError::DegenerateDesign)?;
    let beta = chol.solve(&xty);
    let cov_unscaled = chol.inverse();

    let resid = &y - &design * &beta;
    let df = (n - 3) as f64;
    let sigma_e2 = resid.norm_squared() / df;

    // y = b0 + b1 (x - c) + b2 (x - c)^2
    //   = (b0 - b1 c + b2 c^2) + (b1 - 2 b2 c) x + b2 x^2
    let (b0, b1, b2) = (beta[0], beta[1], beta[2]);
    let slope = b1 - 2.0 * b2 * c;
    let intercept = b0 - b1 * c + b2 * c * c;
    let var_slope = sigma_e2
        * (cov_unscaled[(1, 1)] - 4.0 * c * cov_unscaled[(1, 2)]
            + 4.0 * c * c * cov_unscaled[(2, 2)]);
    let slope_se = var_slope.max(0.0).sqrt();
    let quad_se = (sigma_e2 * cov_unscaled[(2, 2)]).max(0.0).sqrt();

    let constant = obs.constant_response().is_some();
    let (slope, intercept, b2) = if constant {
        (0.0, obs.y[0], 0.0)
    } else {
        (slope, intercept, b2)
    };

    Ok(RegressionResult {
        method: Method::Ols,
        status: if constant {
            FitStatus::ConstantResponse
        } else {
            FitStatus::Ok
        },
        slope,
        intercept,
        slope_se,
        p_value: t_p_value(slope, slope_se, df),
        sigma_u2: 0.0,
        sigma_e2,
        n_obs: n,
        n_groups: obs.n_groups,
        quadratic: Some(Coefficient {
            estimate: b2,
            se: quad_se,
            p_value: t_p_value(b2, quad_se, df),
        }),
    })
}
