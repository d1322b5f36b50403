//! Categorical regression with optimal scaling, fitted by alternating least
//! squares.
//!
//! The response and numeric predictors are standardized once. Each
//! categorical predictor carries a vector of category quantifications which
//! is re-estimated in turn from the partial residual of the current model:
//! category means of the residual, restricted to the monotone cone for
//! ordinal variables, then recentered and rescaled to mean 0 and unit mean
//! square. A final OLS on the quantified columns supplies coefficients and
//! p-values, so the fit is reproducible by plain substitution.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pava::{pava, Direction};
use crate::data::{Dataset, Quantification, QuantificationMap, ScalingLevel};
use crate::error::{Error, Result};
use crate::stats::{ols_fit, standardize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatregConfig {
    /// Stop once a sweep improves R² by less than this.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Seed for the random restarts.
    pub seed: u64,
    /// Extra fits from random starting quantifications; 0 disables.
    pub restarts: usize,
}

impl Default for CatregConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iterations: 200,
            seed: 42,
            restarts: 0,
        }
    }
}

impl CatregConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("catreg epsilon must be positive".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig(
                "catreg max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatregFit {
    pub predictors: Vec<String>,
    /// Quantifications for every predictor plus the response standardization.
    pub quantifications: QuantificationMap,
    /// Standardized coefficients in predictor order; 0 for degenerate predictors.
    pub coefficients: Vec<f64>,
    /// Coefficient p-values from the substitution OLS; `None` when degenerate.
    pub p_values: Vec<Option<f64>>,
    pub r_squared: f64,
    /// Adjusted with `df_model` free quantification parameters.
    pub adj_r_squared: f64,
    pub df_model: usize,
    pub iterations: usize,
    pub converged: bool,
    /// R² after initialization and after every sweep.
    pub r_squared_trace: Vec<f64>,
    /// Predictors whose quantification collapsed to a constant.
    pub degenerate: Vec<String>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone)]
enum Term {
    Numeric {
        column: Vec<f64>,
    },
    Categorical {
        /// Row to observed-category index.
        codes: Vec<usize>,
        /// Observed category labels, declared order.
        labels: Vec<String>,
        counts: Vec<f64>,
        ordinal: bool,
        quant: Vec<f64>,
    },
}

impl Term {
    fn column(&self) -> Vec<f64> {
        match self {
            Term::Numeric { column } => column.clone(),
            Term::Categorical { codes, quant, .. } => codes.iter().map(|&c| quant[c]).collect(),
        }
    }

    fn free_parameters(&self) -> usize {
        match self {
            Term::Numeric { .. } => 1,
            Term::Categorical { labels, .. } => labels.len() - 1,
        }
    }
}

/// Centers `q` (weighted by `counts`) and rescales to mean square 1 over `n`
/// rows. Returns `None` if nothing is left after centering.
fn normalize_quantification(q: &[f64], counts: &[f64], n: f64, reference: f64) -> Option<Vec<f64>> {
    let wmean = q.iter().zip(counts).map(|(v, w)| v * w).sum::<f64>() / n;
    let centered: Vec<f64> = q.iter().map(|v| v - wmean).collect();
    let ss: f64 = centered.iter().zip(counts).map(|(v, w)| w * v * v).sum();
    if !(ss > 1e-24 * reference.max(f64::MIN_POSITIVE)) {
        return None;
    }
    let scale = (n / ss).sqrt();
    Some(centered.iter().map(|v| v * scale).collect())
}

struct AlsState {
    terms: Vec<Term>,
    degenerate: Vec<bool>,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
}

impl AlsState {
    fn final_r_squared(&self) -> f64 {
        *self.trace.last().expect("trace starts non-empty")
    }
}

fn r_squared_from_residual(residual: &[f64]) -> f64 {
    let n = residual.len() as f64;
    1.0 - residual.iter().map(|e| e * e).sum::<f64>() / n
}

fn run_als(mut terms: Vec<Term>, z: &[f64], config: &CatregConfig) -> AlsState {
    let n = z.len();
    let nf = n as f64;
    let mut columns: Vec<Vec<f64>> = terms.iter().map(Term::column).collect();

    let mut betas = {
        let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
        match ols_fit(&refs, z, true) {
            Ok(fit) => fit.estimates(),
            Err(_) => vec![0.0; terms.len()],
        }
    };
    let mut residual: Vec<f64> = z.to_vec();
    for (b, col) in betas.iter().zip(&columns) {
        for (r, x) in residual.iter_mut().zip(col) {
            *r -= b * x;
        }
    }
    let mut degenerate = vec![false; terms.len()];
    let mut trace = vec![r_squared_from_residual(&residual)];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        iterations += 1;
        for j in 0..terms.len() {
            // partial residual u = z - Σ_{k≠j} β_k x_k
            let beta_old = betas[j];
            let u: Vec<f64> = residual
                .iter()
                .zip(&columns[j])
                .map(|(r, x)| r + beta_old * x)
                .collect();
            let uu: f64 = u.iter().map(|v| v * v).sum();

            match &mut terms[j] {
                Term::Numeric { column } => {
                    betas[j] = column.iter().zip(&u).map(|(x, v)| x * v).sum::<f64>() / nf;
                }
                Term::Categorical {
                    codes,
                    counts,
                    ordinal,
                    quant,
                    ..
                } => {
                    let mut sums = vec![0.0; counts.len()];
                    for (&c, v) in codes.iter().zip(&u) {
                        sums[c] += v;
                    }
                    let means: Vec<f64> = sums.iter().zip(counts.iter()).map(|(s, w)| s / w).collect();

                    let (target, flip) = if *ordinal {
                        let inc = pava(&means, counts, Direction::Increasing)
                            .expect("category counts are positive");
                        let dec = pava(&means, counts, Direction::Decreasing)
                            .expect("category counts are positive");
                        let sse = |fit: &[f64]| -> f64 {
                            means
                                .iter()
                                .zip(fit)
                                .zip(counts.iter())
                                .map(|((m, f), w)| w * (m - f).powi(2))
                                .sum()
                        };
                        if sse(&dec) < sse(&inc) {
                            (dec, true)
                        } else {
                            (inc, false)
                        }
                    } else {
                        (means.clone(), false)
                    };

                    match normalize_quantification(&target, counts, nf, uu) {
                        Some(mut q) => {
                            if flip {
                                q.iter_mut().for_each(|v| *v = -*v);
                            }
                            if !*ordinal {
                                // first nonzero category anchors the sign
                                if q.iter().find(|v| **v != 0.0).is_some_and(|v| *v > 0.0) {
                                    q.iter_mut().for_each(|v| *v = -*v);
                                }
                            }
                            *quant = q;
                            degenerate[j] = false;
                            columns[j] = codes.iter().map(|&c| quant[c]).collect();
                            betas[j] = columns[j].iter().zip(&u).map(|(x, v)| x * v).sum::<f64>() / nf;
                        }
                        None => {
                            degenerate[j] = true;
                            betas[j] = 0.0;
                        }
                    }
                }
            }
            for ((r, v), x) in residual.iter_mut().zip(&u).zip(&columns[j]) {
                *r = v - betas[j] * x;
            }
        }
        let r2 = r_squared_from_residual(&residual);
        let improvement = r2 - trace.last().expect("non-empty");
        trace.push(r2);
        if improvement < config.epsilon {
            converged = true;
            break;
        }
    }

    AlsState {
        terms,
        degenerate,
        trace,
        iterations,
        converged,
    }
}

fn randomize_start(terms: &[Term], rng: &mut ChaCha8Rng, n: f64) -> Vec<Term> {
    terms
        .iter()
        .map(|t| match t {
            Term::Categorical {
                codes,
                labels,
                counts,
                ordinal,
                ..
            } => {
                let mut q: Vec<f64> = (0..labels.len()).map(|_| rng.gen::<f64>() - 0.5).collect();
                if *ordinal {
                    q.sort_by(f64::total_cmp);
                }
                let quant = normalize_quantification(&q, counts, n, 1.0)
                    .unwrap_or_else(|| initial_quantification(counts, n));
                Term::Categorical {
                    codes: codes.clone(),
                    labels: labels.clone(),
                    counts: counts.clone(),
                    ordinal: *ordinal,
                    quant,
                }
            }
            other => other.clone(),
        })
        .collect()
}

/// Standardized category indices 0, 1, 2, … (weighted by counts).
fn initial_quantification(counts: &[f64], n: f64) -> Vec<f64> {
    let idx: Vec<f64> = (0..counts.len()).map(|i| i as f64).collect();
    normalize_quantification(&idx, counts, n, 1.0).expect("at least two observed categories")
}

/// Fits a categorical regression of the dataset's (numeric) dependent
/// variable on `predictors`.
pub fn catreg_fit(dataset: &Dataset, predictors: &[String], config: &CatregConfig) -> Result<CatregFit> {
    config.validate()?;
    if predictors.is_empty() {
        return Err(Error::InvalidInput("catreg needs at least one predictor".into()));
    }
    let dependent = dataset.dependent();
    if dependent.is_categorical() {
        return Err(Error::InvalidInput(format!(
            "dependent variable `{}` must be numeric",
            dependent.name
        )));
    }
    let y = dataset.response()?;
    let n = dataset.n();
    let nf = n as f64;
    let z = standardize(&y).ok_or_else(|| Error::ZeroVariance(dependent.name.clone()))?;

    let mut quantifications = QuantificationMap::new();
    let mut terms = Vec::with_capacity(predictors.len());
    for name in predictors {
        let var = dataset.variable(name)?;
        if name == &dependent.name {
            return Err(Error::InvalidInput(format!("`{name}` is the dependent variable")));
        }
        match var.level {
            ScalingLevel::Numeric => {
                let raw = dataset.numeric_column(name)?;
                let q = Quantification::standardizing(&raw)
                    .ok_or_else(|| Error::ZeroVariance(name.clone()))?;
                quantifications.insert(name.clone(), q);
                terms.push(Term::Numeric {
                    column: standardize(&raw).expect("nonzero variance checked"),
                });
            }
            level => {
                let declared = dataset.category_codes(name)?;
                let mut declared_counts = vec![0usize; var.categories.len()];
                for &c in &declared {
                    declared_counts[c] += 1;
                }
                let mut remap = vec![usize::MAX; var.categories.len()];
                let mut labels = Vec::new();
                let mut counts = Vec::new();
                for (i, &cnt) in declared_counts.iter().enumerate() {
                    if cnt > 0 {
                        remap[i] = labels.len();
                        labels.push(var.categories[i].clone());
                        counts.push(cnt as f64);
                    }
                }
                if labels.len() < 2 {
                    return Err(Error::InvalidInput(format!(
                        "predictor `{name}` has fewer than two observed categories"
                    )));
                }
                let quant = initial_quantification(&counts, nf);
                terms.push(Term::Categorical {
                    codes: declared.iter().map(|&c| remap[c]).collect(),
                    labels,
                    counts,
                    ordinal: level == ScalingLevel::Ordinal,
                    quant,
                });
            }
        }
    }

    let max_df: usize = terms.iter().map(Term::free_parameters).sum();
    if n <= max_df + 1 {
        return Err(Error::InsufficientObservations {
            needed: max_df + 1,
            got: n,
        });
    }

    let mut best = run_als(terms.clone(), &z, config);
    if config.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for _ in 0..config.restarts {
            let start = randomize_start(&terms, &mut rng, nf);
            let candidate = run_als(start, &z, config);
            if candidate.final_r_squared() > best.final_r_squared() + 1e-12 {
                best = candidate;
            }
        }
    }

    let mut diagnostics = Vec::new();
    if !best.converged {
        diagnostics.push(format!(
            "alternating least squares stopped at {} iterations without reaching epsilon {}",
            best.iterations, config.epsilon
        ));
    }
    let mut degenerate = Vec::new();
    for (j, name) in predictors.iter().enumerate() {
        if best.degenerate[j] {
            degenerate.push(name.clone());
            diagnostics.push(format!(
                "predictor `{name}` has a constant quantification; coefficient set to 0 and dropped from the final OLS"
            ));
        }
    }

    for (name, term) in predictors.iter().zip(&best.terms) {
        if let Term::Categorical { labels, quant, .. } = term {
            let values: IndexMap<String, f64> =
                labels.iter().cloned().zip(quant.iter().copied()).collect();
            quantifications.insert(name.clone(), Quantification::Categorical(values));
        }
    }
    quantifications.insert(
        dependent.name.clone(),
        Quantification::standardizing(&y).expect("nonzero variance checked"),
    );

    let active: Vec<usize> = (0..predictors.len()).filter(|&j| !best.degenerate[j]).collect();
    let active_columns: Vec<Vec<f64>> = active.iter().map(|&j| best.terms[j].column()).collect();
    let refs: Vec<&[f64]> = active_columns.iter().map(Vec::as_slice).collect();
    let ols = ols_fit(&refs, &z, true)?;

    let mut coefficients = vec![0.0; predictors.len()];
    let mut p_values = vec![None; predictors.len()];
    for (k, &j) in active.iter().enumerate() {
        coefficients[j] = ols.standardized[k];
        p_values[j] = Some(ols.coefficients[k].p_value);
    }

    let df_model: usize = active
        .iter()
        .map(|&j| match &best.terms[j] {
            Term::Numeric { .. } => 1,
            Term::Categorical {
                labels, ordinal, quant, ..
            } => {
                if *ordinal {
                    let mut distinct = quant.clone();
                    distinct.sort_by(f64::total_cmp);
                    distinct.dedup();
                    distinct.len() - 1
                } else {
                    labels.len() - 1
                }
            }
        })
        .sum();
    let adj_r_squared =
        1.0 - (1.0 - ols.r_squared) * (n - 1) as f64 / (n - df_model - 1) as f64;

    Ok(CatregFit {
        predictors: predictors.to_vec(),
        quantifications,
        coefficients,
        p_values,
        r_squared: ols.r_squared,
        adj_r_squared,
        df_model,
        iterations: best.iterations,
        converged: best.converged,
        r_squared_trace: best.trace,
        degenerate,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Observation, Role, Variable};

    fn grouped(level: ScalingLevel, data: &[(&str, f64)], cats: &[&str]) -> Dataset {
        let vars = vec![
            Variable::categorical("G", level, cats.iter().copied()),
            Variable::numeric("y", Role::Dependent),
        ];
        let rows = data
            .iter()
            .map(|&(g, y)| Observation::new(vec![g.into(), y.into()]))
            .collect();
        Dataset::new(vars, rows).unwrap()
    }

    #[test]
    fn binary_predictor_matches_group_means() {
        // group means 1.5 / 3.5: SSB = 4, SST = 5
        let ds = grouped(
            ScalingLevel::Nominal,
            &[("A", 1.0), ("A", 2.0), ("B", 3.0), ("B", 4.0)],
            &["A", "B"],
        );
        let fit = catreg_fit(&ds, &["G".into()], &CatregConfig::default()).unwrap();
        assert!((fit.r_squared - 0.8).abs() < 1e-10);
    }

    #[test]
    fn ordinal_equals_nominal_when_means_are_monotone() {
        let data = [
            ("A", 1.0),
            ("A", 1.5),
            ("B", 2.0),
            ("B", 3.5),
            ("C", 3.0),
            ("C", 5.0),
            ("C", 4.5),
        ];
        let cats = ["A", "B", "C"];
        let nominal = catreg_fit(&grouped(ScalingLevel::Nominal, &data, &cats), &["G".into()], &CatregConfig::default()).unwrap();
        let ordinal = catreg_fit(&grouped(ScalingLevel::Ordinal, &data, &cats), &["G".into()], &CatregConfig::default()).unwrap();
        assert!((nominal.r_squared - ordinal.r_squared).abs() < 1e-10);
    }

    #[test]
    fn negative_ordinal_relation_gives_negative_coefficient() {
        let data = [("A", 5.0), ("A", 4.0), ("B", 3.0), ("B", 3.5), ("C", 1.0), ("C", 2.0)];
        let fit = catreg_fit(
            &grouped(ScalingLevel::Ordinal, &data, &["A", "B", "C"]),
            &["G".into()],
            &CatregConfig::default(),
        )
        .unwrap();
        assert!(fit.coefficients[0] < 0.0);
        let Some(Quantification::Categorical(q)) = fit.quantifications.get("G") else {
            panic!("missing quantification");
        };
        let values: Vec<f64> = q.values().copied().collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn degenerate_ordinal_is_dropped() {
        // every category has the same mean response and the same mean x, so
        // the residual category means are all zero
        let vars = vec![
            Variable::categorical("G", ScalingLevel::Ordinal, ["A", "B", "C"]),
            Variable::numeric("x", Role::Predictor),
            Variable::numeric("y", Role::Dependent),
        ];
        let raw = [
            ("A", 1.0, 1.0),
            ("A", 2.0, 3.0),
            ("A", 3.0, 2.0),
            ("B", 1.0, 2.0),
            ("B", 2.0, 1.0),
            ("B", 3.0, 3.0),
            ("C", 1.0, 3.0),
            ("C", 2.0, 2.0),
            ("C", 3.0, 1.0),
        ];
        let rows = raw
            .iter()
            .map(|&(g, x, y)| Observation::new(vec![g.into(), x.into(), y.into()]))
            .collect();
        let ds = Dataset::new(vars, rows).unwrap();
        let fit = catreg_fit(&ds, &["G".into(), "x".into()], &CatregConfig::default()).unwrap();
        assert_eq!(fit.degenerate, vec!["G".to_string()]);
        assert_eq!(fit.coefficients[0], 0.0);
        assert!(fit.p_values[0].is_none());
    }

    #[test]
    fn single_observed_category_is_rejected() {
        let ds = grouped(ScalingLevel::Nominal, &[("A", 1.0), ("A", 2.0), ("A", 3.0)], &["A", "B"]);
        assert!(catreg_fit(&ds, &["G".into()], &CatregConfig::default()).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = CatregConfig {
            epsilon: 0.0,
            ..CatregConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = CatregConfig {
            max_iterations: 0,
            ..CatregConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
