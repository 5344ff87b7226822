//! Random-intercept linear mixed model fitted by REML.
//!
//! Model: `sc = b0 + b1·position + u_d + e` with `u_d ~ N(0, σu²)` per
//! dialogue and `e ~ N(0, σe²)`. With `θ = σu²/σe²` the covariance of
//! dialogue `d` is `σe²·(I + θ·11ᵀ)`, whose inverse and determinant have
//! closed forms, so each REML evaluation is a single pass over the data.
//! `σe²` is profiled out and `θ` is found by a log-scale grid scan refined
//! with golden-section search.

use std::f64::consts::PI;

use super::ols::fit_linear;
use super::{
    mean, wald_p_value, FitOptions, FitStatus, Method, Observations, RegressionResult, StatsError,
};
use crate::complexity::ComplexityRecord;

const LOG_THETA_MIN: f64 = -18.420_680_743_952_367; // ln 1e-8
const LOG_THETA_MAX: f64 = 18.420_680_743_952_367; // ln 1e8
const GRID_POINTS: usize = 65;
const GOLDEN_ITERS: usize = 200;
const N_FIXED: usize = 2;

/// Per-dialogue sufficient statistics on centred data.
#[derive(Clone, Copy, Default)]
struct GroupSums {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
}

struct Centred {
    x: Vec<f64>,
    y: Vec<f64>,
    group: Vec<usize>,
    groups: Vec<GroupSums>,
    x_mean: f64,
    y_mean: f64,
}

impl Centred {
    fn new(obs: &Observations) -> Self {
        let x_mean = mean(&obs.x);
        let y_mean = mean(&obs.y);
        let x: Vec<f64> = obs.x.iter().map(|v| v - x_mean).collect();
        let y: Vec<f64> = obs.y.iter().map(|v| v - y_mean).collect();
        let mut groups = vec![GroupSums::default(); obs.n_groups];
        for i in 0..x.len() {
            let g = &mut groups[obs.group[i]];
            g.n += 1.0;
            g.sx += x[i];
            g.sy += y[i];
            g.sxx += x[i] * x[i];
            g.sxy += x[i] * y[i];
        }
        Centred {
            x,
            y,
            group: obs.group.clone(),
            groups,
            x_mean,
            y_mean,
        }
    }

    fn n(&self) -> f64 {
        self.x.len() as f64
    }

    /// Generalised least squares at a fixed variance ratio.
    fn gls(&self, theta: f64) -> Gls {
        let shrink: Vec<f64> = self
            .groups
            .iter()
            .map(|g| theta / (1.0 + g.n * theta))
            .collect();

        let (mut a00, mut a01, mut a11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut log_det_h = 0.0;
        for (g, &c) in self.groups.iter().zip(&shrink) {
            a00 += g.n - c * g.n * g.n;
            a01 += g.sx - c * g.n * g.sx;
            a11 += g.sxx - c * g.sx * g.sx;
            b0 += g.sy - c * g.n * g.sy;
            b1 += g.sxy - c * g.sx * g.sy;
            log_det_h += (1.0 + g.n * theta).ln();
        }
        let det = a00 * a11 - a01 * a01;
        let beta = [(a11 * b0 - a01 * b1) / det, (a00 * b1 - a01 * b0) / det];

        let mut resid_sum = vec![0.0; self.groups.len()];
        let mut resid_sq = 0.0;
        for i in 0..self.x.len() {
            let r = self.y[i] - beta[0] - beta[1] * self.x[i];
            resid_sum[self.group[i]] += r;
            resid_sq += r * r;
        }
        let q = resid_sq
            - resid_sum
                .iter()
                .zip(&shrink)
                .map(|(s, c)| c * s * s)
                .sum::<f64>();

        Gls {
            beta,
            inv_a11: a00 / det,
            log_det_a: det.ln(),
            log_det_h,
            q: q.max(0.0),
        }
    }

    /// Profiled restricted log-likelihood.
    fn reml(&self, theta: f64) -> f64 {
        let dof = self.n() - N_FIXED as f64;
        let fit = self.gls(theta);
        let sigma_e2 = fit.q / dof;
        -0.5 * (dof * (2.0 * PI * sigma_e2).ln() + fit.log_det_h + fit.log_det_a + dof)
    }

    fn within_group_fit(&self) -> Option<(f64, f64)> {
        let (mut wxx, mut wxy, mut wyy) = (0.0, 0.0, 0.0);
        for g in &self.groups {
            wxx += g.sxx - g.sx * g.sx / g.n;
            wxy += g.sxy - g.sx * g.sy / g.n;
        }
        let y_means: Vec<f64> = self.groups.iter().map(|g| g.sy / g.n).collect();
        for i in 0..self.x.len() {
            wyy += (self.y[i] - y_means[self.group[i]]).powi(2);
        }
        if wxx <= 0.0 {
            return None;
        }
        let slope = wxy / wxx;
        Some((slope, (wyy - slope * wxy).max(0.0)))
    }

    fn result(&self, theta: f64, n_groups: usize) -> RegressionResult {
        let dof = self.n() - N_FIXED as f64;
        let fit = self.gls(theta);
        let sigma_e2 = fit.q / dof;
        let slope = fit.beta[1];
        let slope_se = (sigma_e2 * fit.inv_a11).sqrt();
        RegressionResult {
            method: Method::Lmm,
            status: FitStatus::Ok,
            slope,
            intercept: self.y_mean + fit.beta[0] - slope * self.x_mean,
            slope_se,
            p_value: wald_p_value(slope, slope_se),
            sigma_u2: theta * sigma_e2,
            sigma_e2,
            n_obs: self.x.len(),
            n_groups,
            quadratic: None,
        }
    }
}

struct Gls {
    beta: [f64; 2],
    inv_a11: f64,
    log_det_a: f64,
    log_det_h: f64,
    q: f64,
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

fn optimise_theta(data: &Centred) -> f64 {
    let step = (LOG_THETA_MAX - LOG_THETA_MIN) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| LOG_THETA_MIN + step * i as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| data.reml(t.exp())).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best });

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(GRID_POINTS - 1)];
    let log_theta = golden_max(|t| data.reml(t.exp()), lo, hi);
    let theta = log_theta.exp();

    // The boundary θ = 0 is outside the log-scale search.
    if data.reml(0.0) >= data.reml(theta) {
        0.0
    } else {
        theta
    }
}

fn constant_result(obs: &Observations, value: f64) -> RegressionResult {
    RegressionResult {
        method: Method::Lmm,
        status: FitStatus::ConstantResponse,
        slope: 0.0,
        intercept: value,
        slope_se: 0.0,
        p_value: 1.0,
        sigma_u2: 0.0,
        sigma_e2: 0.0,
        n_obs: obs.len(),
        n_groups: obs.n_groups,
        quadratic: None,
    }
}

/// Every dialogue is flat around its own line: all variance sits in the
/// intercepts. The slope comes from within-dialogue variation and the
/// intercept variance from the dialogue-level residuals.
fn zero_residual_result(data: &Centred, within_slope: f64, n_groups: usize) -> RegressionResult {
    let levels: Vec<f64> = data
        .groups
        .iter()
        .map(|g| (g.sy - within_slope * g.sx) / g.n)
        .collect();
    let level_mean = mean(&levels);
    let sigma_u2 =
        levels.iter().map(|m| (m - level_mean).powi(2)).sum::<f64>() / (levels.len() - 1) as f64;
    RegressionResult {
        method: Method::Lmm,
        status: FitStatus::ZeroResidualVariance,
        slope: within_slope,
        intercept: data.y_mean + level_mean - within_slope * data.x_mean,
        slope_se: 0.0,
        p_value: wald_p_value(within_slope, 0.0),
        sigma_u2,
        sigma_e2: 0.0,
        n_obs: data.x.len(),
        n_groups,
        quadratic: None,
    }
}

/// Fits the random-intercept model to the records of one role.
///
/// A single dialogue falls back to least squares (status
/// [`FitStatus::OlsFallback`]); a constant response gives slope 0 with
/// status [`FitStatus::ConstantResponse`].
pub fn fit_lmm(
    records: &[ComplexityRecord],
    options: FitOptions,
) -> Result<RegressionResult, StatsError> {
    let obs = Observations::from_records(records, options.position);
    obs.check_design()?;
    if let Some(c) = obs.constant_response() {
        return Ok(constant_result(&obs, c));
    }
    if obs.n_groups < 2 {
        let mut result = fit_linear(&obs);
        result.status = FitStatus::OlsFallback;
        return Ok(result);
    }

    let data = Centred::new(&obs);
    if let Some((slope, within_ss)) = data.within_group_fit() {
        let total_ss: f64 = data.y.iter().map(|v| v * v).sum();
        if within_ss <= 1e-12 * total_ss {
            return Ok(zero_residual_result(&data, slope, obs.n_groups));
        }
    }

    let theta = optimise_theta(&data);
    Ok(data.result(theta, obs.n_groups))
}

/// The mixed model evaluated at a given variance ratio `θ = σu²/σe²`;
/// `θ = 0` is plain least squares with a normal-approximation test.
pub fn fit_lmm_fixed_theta(
    records: &[ComplexityRecord],
    theta: f64,
    options: FitOptions,
) -> Result<RegressionResult, StatsError> {
    if !theta.is_finite() || theta < 0.0 {
        return Err(StatsError::InvalidParameter(format!("theta = {theta}")));
    }
    let obs = Observations::from_records(records, options.position);
    obs.check_design()?;
    if let Some(c) = obs.constant_response() {
        return Ok(constant_result(&obs, c));
    }
    Ok(Centred::new(&obs).result(theta, obs.n_groups))
}

/// Profiled restricted log-likelihood at variance ratio `θ`.
pub fn reml_objective(
    records: &[ComplexityRecord],
    theta: f64,
    options: FitOptions,
) -> Result<f64, StatsError> {
    let obs = Observations::from_records(records, options.position);
    obs.check_design()?;
    Ok(Centred::new(&obs).reml(theta))
}
