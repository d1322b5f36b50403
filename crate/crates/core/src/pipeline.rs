//! The two-step modeling loop and the resulting model.
//!
//! Each round fits a categorical regression on the current predictor set,
//! substitutes the quantifications, and runs stepwise selection on the
//! substituted columns. Rounds repeat until two consecutive rounds select the
//! same set. The final model keeps the quantifications of its round and the
//! unstandardized stepwise coefficients on the ln scale.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::data::{column_as_quantified, Cell, Dataset, Observation, Quantification, ScalingLevel};
use crate::error::{Error, Result};
use crate::eval::{crossval_with_plan, EvaluationReport, FoldPlan, Method, MreScale};
use crate::scaling::{catreg_fit, CatregConfig};
use crate::stats::OlsFit;
use crate::stepwise::{stepwise_fit, NamedColumn, StepwiseConfig, StepwiseTrace};

pub const MODEL_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub catreg: CatregConfig,
    pub stepwise: StepwiseConfig,
    pub max_rounds: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            catreg: CatregConfig::default(),
            stepwise: StepwiseConfig::default(),
            max_rounds: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatregSummary {
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub iterations: usize,
    pub converged: bool,
    pub coefficients: IndexMap<String, f64>,
    pub p_values: IndexMap<String, Option<f64>>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub candidates: Vec<String>,
    pub catreg: CatregSummary,
    pub stepwise: StepwiseTrace,
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineResult {
    pub rounds: Vec<RoundRecord>,
    pub final_model: SerializedModel,
    /// Stepwise fit behind the final model.
    pub final_fit: OlsFit,
    pub converged: bool,
    /// Stepwise kept no predictor; the model is intercept-only.
    pub empty_model: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelVariable {
    pub name: String,
    pub level: ScalingLevel,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
    /// Raw input whose natural log this variable is, e.g. `FP` for `Ln(FP)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ln_of: Option<String>,
}

/// A fitted (or reference) model in its on-disk form.
///
/// Categorical quantification values may be `null` in hand-written
/// reference models whose quantifications are not known; such variables can
/// only be predicted from an already-quantified numeric input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SerializedModel {
    pub schema_version: String,
    pub dependent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependent_ln_of: Option<String>,
    pub variables: Vec<ModelVariable>,
    pub quantifications: IndexMap<String, IndexMap<String, Option<f64>>>,
    pub coefficients: IndexMap<String, f64>,
    pub intercept: f64,
}

/// A value supplied to [`SerializedModel::predict`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PredictInput {
    Number(f64),
    Label(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub ln_estimate: f64,
    pub defect_estimate: f64,
}

fn ln_source(name: &str) -> Option<String> {
    name.strip_prefix("Ln(")
        .and_then(|s| s.strip_suffix(')'))
        .map(str::to_string)
}

impl SerializedModel {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::SchemaVersion(self.schema_version.clone()));
        }
        for name in self.coefficients.keys() {
            if !self.variables.iter().any(|v| &v.name == name) {
                return Err(Error::InvalidInput(format!(
                    "coefficient for `{name}` has no variable entry"
                )));
            }
        }
        for var in &self.variables {
            if !self.coefficients.contains_key(&var.name) {
                return Err(Error::InvalidInput(format!(
                    "variable `{}` has no coefficient",
                    var.name
                )));
            }
            if var.level.is_categorical() {
                let q = self.quantifications.get(&var.name).ok_or_else(|| {
                    Error::InvalidInput(format!("variable `{}` has no quantification", var.name))
                })?;
                if q.is_empty() {
                    return Err(Error::InvalidInput(format!(
                        "variable `{}` has an empty quantification",
                        var.name
                    )));
                }
                if let Some(bad) = q.keys().find(|k| !var.categories.contains(k)) {
                    return Err(Error::UnknownCategory {
                        variable: var.name.clone(),
                        category: bad.clone(),
                    });
                }
            } else if var.ln_of.is_some() && !var.categories.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "numeric variable `{}` declares categories",
                    var.name
                )));
            }
        }
        for name in self.quantifications.keys() {
            if !self
                .variables
                .iter()
                .any(|v| &v.name == name && v.level.is_categorical())
            {
                return Err(Error::InvalidInput(format!(
                    "quantification for `{name}` does not match a categorical variable"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    fn category_value(&self, var: &ModelVariable, label: &str) -> Result<f64> {
        if !var.categories.iter().any(|c| c == label) {
            return Err(Error::UnknownCategory {
                variable: var.name.clone(),
                category: label.to_string(),
            });
        }
        match self.quantifications.get(&var.name).and_then(|q| q.get(label)) {
            Some(Some(v)) => Ok(*v),
            Some(None) => Err(Error::InvalidInput(format!(
                "quantification of `{}` = `{label}` is a placeholder; supply the quantified value as a number",
                var.name
            ))),
            None => Err(Error::UnseenCategory {
                variable: var.name.clone(),
                category: label.to_string(),
            }),
        }
    }

    fn term_value(&self, var: &ModelVariable, inputs: &IndexMap<String, PredictInput>) -> Result<f64> {
        if var.level.is_categorical() {
            return match inputs.get(&var.name) {
                Some(PredictInput::Label(label)) => self.category_value(var, label),
                Some(PredictInput::Number(q)) => Ok(*q),
                None => Err(Error::InvalidInput(format!("no value for `{}`", var.name))),
            };
        }
        if let Some(raw_name) = &var.ln_of {
            if let Some(input) = inputs.get(raw_name) {
                let PredictInput::Number(x) = input else {
                    return Err(Error::InvalidInput(format!("`{raw_name}` must be a number")));
                };
                if !(*x > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "`{raw_name}` must be positive, got {x}"
                    )));
                }
                return Ok(x.ln());
            }
        }
        match inputs.get(&var.name) {
            Some(PredictInput::Number(x)) => Ok(*x),
            Some(PredictInput::Label(_)) => {
                Err(Error::InvalidInput(format!("`{}` must be a number", var.name)))
            }
            None => Err(Error::InvalidInput(format!(
                "no value for `{}`{}",
                var.name,
                var.ln_of
                    .as_ref()
                    .map(|r| format!(" (or raw `{r}`)"))
                    .unwrap_or_default()
            ))),
        }
    }

    /// Evaluates the model. Categorical variables take a category label or an
    /// already-quantified number; ln-transformed variables take the raw
    /// positive value under their source name (e.g. `FP`) or the logged value
    /// under their own name (e.g. `Ln(FP)`).
    pub fn predict(&self, inputs: &IndexMap<String, PredictInput>) -> Result<Prediction> {
        let mut ln_estimate = self.intercept;
        for var in &self.variables {
            ln_estimate += self.coefficients[&var.name] * self.term_value(var, inputs)?;
        }
        Ok(Prediction {
            ln_estimate,
            defect_estimate: ln_estimate.exp(),
        })
    }

    /// Ln-scale prediction for a row of a dataset whose variables carry the
    /// model's names (numeric values already on the ln scale).
    pub fn predict_observation(&self, dataset: &Dataset, row: &Observation) -> Result<f64> {
        let mut ln_estimate = self.intercept;
        for var in &self.variables {
            let idx = dataset.variable_index(&var.name)?;
            let value = match (&row.values[idx], var.level.is_categorical()) {
                (Cell::Category(label), true) => self.category_value(var, label)?,
                (Cell::Number(x), false) => *x,
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "dataset cell for `{}` does not match the model",
                        var.name
                    )))
                }
            };
            ln_estimate += self.coefficients[&var.name] * value;
        }
        Ok(ln_estimate)
    }
}

fn substituted_columns(
    dataset: &Dataset,
    predictors: &[String],
    quantifications: &crate::data::QuantificationMap,
) -> Result<Vec<NamedColumn>> {
    predictors
        .iter()
        .map(|name| {
            let var = dataset.variable(name)?;
            let values = if var.is_categorical() {
                column_as_quantified(dataset, name, quantifications)?
            } else {
                dataset.numeric_column(name)?
            };
            Ok(NamedColumn::new(name.clone(), values))
        })
        .collect()
}

fn build_model(
    dataset: &Dataset,
    selected: &[String],
    quantifications: &crate::data::QuantificationMap,
    fit: &OlsFit,
) -> Result<SerializedModel> {
    let dependent = dataset.dependent();
    let mut variables = Vec::with_capacity(selected.len());
    let mut model_quant = IndexMap::new();
    let mut coefficients = IndexMap::new();
    for (name, coef) in selected.iter().zip(&fit.coefficients) {
        let var = dataset.variable(name)?;
        let ln_of = if var.is_categorical() { None } else { ln_source(name) };
        if var.is_categorical() {
            let Some(Quantification::Categorical(values)) = quantifications.get(name) else {
                return Err(Error::UnknownVariable(name.clone()));
            };
            model_quant.insert(
                name.clone(),
                values.iter().map(|(k, v)| (k.clone(), Some(*v))).collect(),
            );
        }
        variables.push(ModelVariable {
            name: name.clone(),
            level: var.level,
            categories: var.categories.clone(),
            ln_of,
        });
        coefficients.insert(name.clone(), coef.estimate);
    }
    let model = SerializedModel {
        schema_version: MODEL_SCHEMA_VERSION.to_string(),
        dependent: dependent.name.clone(),
        dependent_ln_of: ln_source(&dependent.name),
        variables,
        quantifications: model_quant,
        coefficients,
        intercept: fit.intercept_estimate(),
    };
    model.validate()?;
    Ok(model)
}

/// Runs categorical regression and stepwise selection in rounds.
///
/// `predictors` defaults to every predictor of the dataset.
pub fn run_pipeline(
    dataset: &Dataset,
    predictors: Option<&[String]>,
    config: &ModelConfig,
) -> Result<PipelineResult> {
    if config.max_rounds < 1 {
        return Err(Error::InvalidConfig("max_rounds must be at least 1".into()));
    }
    config.catreg.validate()?;
    config.stepwise.validate()?;
    let declared = dataset.predictor_names();
    let mut candidates: Vec<String> = match predictors {
        Some(p) => p.to_vec(),
        None => declared.clone(),
    };
    let response = dataset.response()?;

    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut converged = false;
    let mut empty_model = false;
    let mut last: Option<(crate::data::QuantificationMap, StepwiseTrace)> = None;

    for round in 1..=config.max_rounds {
        let fit = catreg_fit(dataset, &candidates, &config.catreg)?;
        let columns = substituted_columns(dataset, &candidates, &fit.quantifications)?;
        let trace = stepwise_fit(&columns, &response, &config.stepwise)?;
        let selected = trace.selected.clone();

        rounds.push(RoundRecord {
            round,
            candidates: candidates.clone(),
            catreg: CatregSummary {
                r_squared: fit.r_squared,
                adj_r_squared: fit.adj_r_squared,
                iterations: fit.iterations,
                converged: fit.converged,
                coefficients: candidates.iter().cloned().zip(fit.coefficients.iter().copied()).collect(),
                p_values: candidates.iter().cloned().zip(fit.p_values.iter().copied()).collect(),
                diagnostics: fit.diagnostics.clone(),
            },
            stepwise: trace.clone(),
            selected: selected.clone(),
        });
        last = Some((fit.quantifications, trace));

        if selected.is_empty() {
            empty_model = true;
            break;
        }
        let current: BTreeSet<&String> = selected.iter().collect();
        if round >= 2 {
            let previous: BTreeSet<&String> = rounds[round - 2].selected.iter().collect();
            if previous == current {
                converged = true;
                break;
            }
        }
        if round == config.max_rounds {
            // a set equal to its own candidates would be reproduced by another round
            let input: BTreeSet<&String> = candidates.iter().collect();
            converged = input == current;
            break;
        }
        candidates = declared
            .iter()
            .filter(|name| current.contains(name))
            .cloned()
            .collect();
    }

    let (quantifications, trace) = last.expect("at least one round ran");
    let final_model = build_model(dataset, &trace.selected, &quantifications, &trace.final_model)?;
    Ok(PipelineResult {
        rounds,
        final_model,
        final_fit: trace.final_model,
        converged,
        empty_model,
    })
}

/// Cross-validates the dummy-coded baseline and the two-step method on one
/// shared fold plan.
pub fn compare_baseline(
    dataset: &Dataset,
    k: usize,
    seed: u64,
    config: &ModelConfig,
    scale: MreScale,
) -> Result<EvaluationReport> {
    let plan = FoldPlan::new(dataset.n(), k, seed)?;
    let baseline = crossval_with_plan(dataset, &plan, Method::DummyOls, config, scale)?;
    let method = crossval_with_plan(dataset, &plan, Method::CatregStepwise, config, scale)?;
    EvaluationReport::from_reports(&plan, baseline, method)
}
