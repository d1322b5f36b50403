//! Ordinary least squares with coefficient inference.
//!
//! The solve goes through a Householder QR of the column-equilibrated design.
//! Rank is checked first from the singular values of the same matrix.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::descriptive::population_sd;
use super::special::t_pvalue;
use crate::error::{Error, Result};

/// Designs whose smallest/largest singular value ratio falls below this are
/// rejected as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientStats {
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub intercept: Option<CoefficientStats>,
    /// One entry per design column, in input order.
    pub coefficients: Vec<CoefficientStats>,
    /// Coefficients rescaled by sd(predictor) / sd(response).
    pub standardized: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub n: usize,
    pub p: usize,
    pub df_resid: usize,
    pub sse: f64,
    #[serde(skip)]
    pub fitted: Vec<f64>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl OlsFit {
    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.p_value).collect()
    }

    pub fn intercept_estimate(&self) -> f64 {
        self.intercept.as_ref().map_or(0.0, |c| c.estimate)
    }
}

/// `1 - (1 - R²)(n - 1)/(n - p - 1)` for a model with intercept and `p` predictors.
pub fn adjusted_r_squared(r_squared: f64, n: usize, p: usize) -> Result<f64> {
    if n <= p + 1 {
        return Err(Error::InsufficientObservations { needed: p + 1, got: n });
    }
    Ok(1.0 - (1.0 - r_squared) * (n - 1) as f64 / (n - p - 1) as f64)
}

fn coefficient_stats(estimate: f64, std_error: f64, df: usize) -> Result<CoefficientStats> {
    let t_value = if std_error > 0.0 {
        estimate / std_error
    } else if estimate == 0.0 {
        0.0
    } else {
        estimate.signum() * f64::INFINITY
    };
    Ok(CoefficientStats {
        estimate,
        std_error,
        t_value,
        p_value: t_pvalue(t_value, df)?,
    })
}

/// Fits `response ~ columns` (plus an intercept when requested).
pub fn ols_fit(columns: &[&[f64]], response: &[f64], intercept: bool) -> Result<OlsFit> {
    let n = response.len();
    let p = columns.len();
    let m = p + usize::from(intercept);
    if m == 0 {
        return Err(Error::InvalidInput("model has no terms".into()));
    }
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::InvalidInput(format!(
            "column length {} does not match response length {n}",
            c.len()
        )));
    }
    if n <= m {
        return Err(Error::InsufficientObservations { needed: m, got: n });
    }
    if response.iter().chain(columns.iter().flat_map(|c| c.iter())).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in regression data".into()));
    }

    let design = DMatrix::from_fn(n, m, |i, j| match (intercept, j) {
        (true, 0) => 1.0,
        (true, j) => columns[j - 1][i],
        (false, j) => columns[j][i],
    });
    let scales: Vec<f64> = design.column_iter().map(|c| c.norm()).collect();
    if scales.contains(&0.0) {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let mut scaled = design.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col /= scales[j];
    }

    let sv = scaled.clone().singular_values();
    let (smin, smax) = sv
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let ratio = smin / smax;
    if !(ratio >= RANK_TOLERANCE) {
        return Err(Error::RankDeficient { ratio });
    }

    let y = DVector::from_column_slice(response);
    let qr = scaled.qr();
    let q = qr.q();
    let r = qr.r();
    let qty = q.transpose() * &y;
    let beta_scaled = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { ratio })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(m, m))
        .ok_or(Error::RankDeficient { ratio })?;
    let beta: Vec<f64> = beta_scaled.iter().zip(&scales).map(|(b, s)| b / s).collect();

    let fitted_v = &design * DVector::from_column_slice(&beta);
    let fitted: Vec<f64> = fitted_v.iter().copied().collect();
    let residuals: Vec<f64> = response.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let df_resid = n - m;
    let sigma2 = sse / df_resid as f64;

    let sst = if intercept {
        let ybar = response.iter().sum::<f64>() / n as f64;
        response.iter().map(|v| (v - ybar).powi(2)).sum::<f64>()
    } else {
        response.iter().map(|v| v * v).sum::<f64>()
    };
    if sst == 0.0 {
        return Err(Error::ZeroVariance("response".into()));
    }
    let r_squared = (1.0 - sse / sst).clamp(0.0, 1.0);
    let adj_r_squared = if intercept {
        adjusted_r_squared(r_squared, n, p)?
    } else {
        1.0 - (1.0 - r_squared) * n as f64 / (n - p) as f64
    };

    let mut stats = Vec::with_capacity(m);
    for j in 0..m {
        let var_scaled: f64 = r_inv.row(j).iter().map(|v| v * v).sum::<f64>() * sigma2;
        let se = var_scaled.sqrt() / scales[j];
        stats.push(coefficient_stats(beta[j], se, df_resid)?);
    }
    let intercept_stats = if intercept { Some(stats.remove(0)) } else { None };

    let sd_y = population_sd(response);
    let standardized = columns
        .iter()
        .zip(&stats)
        .map(|(c, s)| s.estimate * population_sd(c) / sd_y)
        .collect();

    Ok(OlsFit {
        intercept: intercept_stats,
        coefficients: stats,
        standardized,
        r_squared,
        adj_r_squared,
        n,
        p,
        df_resid,
        sse,
        fitted,
        residuals,
    })
}
