//! Forward-entry / backward-removal stepwise regression gated by coefficient
//! p-values.
//!
//! Each step tries every excluded column in the current model and enters the
//! one with the smallest coefficient p-value if it is below `alpha_enter`.
//! Included columns whose p-value exceeds `alpha_remove` are then dropped one
//! at a time, largest first. Entry and removal each count as one step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{ols_fit, OlsFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepwiseConfig {
    pub alpha_enter: f64,
    pub alpha_remove: f64,
    /// Defaults to twice the number of candidate columns when unset.
    pub max_steps: Option<usize>,
}

impl Default for StepwiseConfig {
    fn default() -> Self {
        Self {
            alpha_enter: 0.05,
            alpha_remove: 0.10,
            max_steps: None,
        }
    }
}

impl StepwiseConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.alpha_enter
            && self.alpha_enter <= self.alpha_remove
            && self.alpha_remove < 1.0;
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "need 0 < alpha_enter ({}) <= alpha_remove ({}) < 1",
                self.alpha_enter, self.alpha_remove
            )));
        }
        if self.max_steps == Some(0) {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// A named numeric predictor column.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedColumn {
    pub name: String,
    pub values: Vec<f64>,
}

impl NamedColumn {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepAction {
    Entered,
    Removed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepEvent {
    pub step: usize,
    pub variable: String,
    pub action: StepAction,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepwiseTrace {
    pub events: Vec<StepEvent>,
    /// Selected columns in order of entry.
    pub selected: Vec<String>,
    /// OLS on the selected columns (intercept only when nothing was selected).
    pub final_model: OlsFit,
    pub diagnostics: Vec<String>,
    /// True when `max_steps` cut the search short.
    pub hit_step_limit: bool,
}

fn fit_subset(columns: &[NamedColumn], subset: &[usize], response: &[f64]) -> Result<OlsFit> {
    let refs: Vec<&[f64]> = subset.iter().map(|&i| columns[i].values.as_slice()).collect();
    ols_fit(&refs, response, true)
}

/// Runs stepwise selection of `columns` for `response`.
pub fn stepwise_fit(
    columns: &[NamedColumn],
    response: &[f64],
    config: &StepwiseConfig,
) -> Result<StepwiseTrace> {
    config.validate()?;
    if columns.is_empty() {
        return Err(Error::InvalidInput("stepwise needs at least one candidate".into()));
    }
    if let Some(c) = columns.iter().find(|c| c.values.len() != response.len()) {
        return Err(Error::InvalidInput(format!(
            "column `{}` has length {}, response has {}",
            c.name,
            c.values.len(),
            response.len()
        )));
    }
    let n = response.len();
    let max_steps = config.max_steps.unwrap_or(2 * columns.len());

    let mut included: Vec<usize> = Vec::new();
    let mut events = Vec::new();
    let mut diagnostics = Vec::new();
    let mut step = 0;
    let mut hit_step_limit = false;

    'search: loop {
        // forward
        let mut best: Option<(usize, f64)> = None;
        if n > included.len() + 2 {
            for cand in 0..columns.len() {
                if included.contains(&cand) {
                    continue;
                }
                let mut trial = included.clone();
                trial.push(cand);
                match fit_subset(columns, &trial, response) {
                    Ok(fit) => {
                        let p = fit.coefficients.last().expect("candidate present").p_value;
                        if best.is_none_or(|(_, bp)| p < bp) {
                            best = Some((cand, p));
                        }
                    }
                    Err(e @ (Error::RankDeficient { .. } | Error::InsufficientObservations { .. })) => {
                        diagnostics.push(format!(
                            "step {}: skipped `{}` ({e})",
                            step + 1,
                            columns[cand].name
                        ));
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        let Some((cand, p)) = best.filter(|&(_, p)| p < config.alpha_enter) else {
            break;
        };
        if step >= max_steps {
            hit_step_limit = true;
            break;
        }
        step += 1;
        included.push(cand);
        events.push(StepEvent {
            step,
            variable: columns[cand].name.clone(),
            action: StepAction::Entered,
            p_value: p,
        });

        // backward
        loop {
            let fit = fit_subset(columns, &included, response)?;
            let worst = fit
                .coefficients
                .iter()
                .enumerate()
                .fold(None::<(usize, f64)>, |acc, (k, c)| match acc {
                    Some((_, wp)) if c.p_value <= wp => acc,
                    _ => Some((k, c.p_value)),
                });
            let Some((k, p)) = worst.filter(|&(_, p)| p > config.alpha_remove) else {
                break;
            };
            if step >= max_steps {
                hit_step_limit = true;
                break 'search;
            }
            step += 1;
            let removed = included.remove(k);
            events.push(StepEvent {
                step,
                variable: columns[removed].name.clone(),
                action: StepAction::Removed,
                p_value: p,
            });
        }
    }

    let final_model = fit_subset(columns, &included, response)?;
    Ok(StepwiseTrace {
        events,
        selected: included.iter().map(|&i| columns[i].name.clone()).collect(),
        final_model,
        diagnostics,
        hit_step_limit,
    })
}
