//! Dummy-coded OLS baseline, MRE/MMRE, and seeded k-fold cross-validation.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Cell, Dataset, Observation, Quantification};
use crate::error::{Error, Result};
use crate::pipeline::{run_pipeline, ModelConfig};
use crate::stats::ols_fit;
use crate::stepwise::NamedColumn;

/// Magnitude of relative error `|actual - predicted| / actual`.
pub fn mre(actual: f64, predicted: f64) -> Result<f64> {
    if !(actual > 0.0) {
        return Err(Error::InvalidInput(format!(
            "MRE needs a positive actual value, got {actual}"
        )));
    }
    Ok((actual - predicted).abs() / actual)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub row_id: String,
    pub actual: f64,
    pub predicted: f64,
}

/// Mean MRE over `records`.
pub fn mmre(records: &[EvaluationRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InvalidInput("MMRE of an empty record list".into()));
    }
    let total = records
        .iter()
        .map(|r| mre(r.actual, r.predicted))
        .sum::<Result<f64>>()?;
    Ok(total / records.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
enum DummyTerm {
    Indicators {
        variable: String,
        /// Observed categories, declared order; the first is the reference.
        observed: Vec<String>,
    },
    Numeric {
        variable: String,
        mean: f64,
        scale: f64,
    },
}

/// Encodes rows of a dataset with the columns fixed by [`dummy_design`].
#[derive(Debug, Clone, PartialEq)]
pub struct DummyEncoder {
    terms: Vec<DummyTerm>,
}

impl DummyEncoder {
    pub fn encode(&self, dataset: &Dataset, row: &Observation) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for term in &self.terms {
            match term {
                DummyTerm::Indicators { variable, observed } => {
                    let idx = dataset.variable_index(variable)?;
                    let Cell::Category(label) = &row.values[idx] else {
                        return Err(Error::InvalidInput(format!("`{variable}` is not categorical")));
                    };
                    let pos = observed.iter().position(|c| c == label).ok_or_else(|| {
                        Error::UnseenCategory {
                            variable: variable.clone(),
                            category: label.clone(),
                        }
                    })?;
                    out.extend((1..observed.len()).map(|k| if k == pos { 1.0 } else { 0.0 }));
                }
                DummyTerm::Numeric {
                    variable,
                    mean,
                    scale,
                } => {
                    let idx = dataset.variable_index(variable)?;
                    let Cell::Number(x) = row.values[idx] else {
                        return Err(Error::InvalidInput(format!("`{variable}` is not numeric")));
                    };
                    out.push((x - mean) / scale);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DummyDesign {
    pub columns: Vec<NamedColumn>,
    pub encoder: DummyEncoder,
}

/// Expands each categorical predictor with `c` observed categories into
/// `c - 1` indicators against its first observed category; numeric
/// predictors pass through standardized.
pub fn dummy_design(dataset: &Dataset, predictors: &[String]) -> Result<DummyDesign> {
    let mut terms = Vec::with_capacity(predictors.len());
    for name in predictors {
        let var = dataset.variable(name)?;
        if var.is_categorical() {
            let codes = dataset.category_codes(name)?;
            let mut seen = vec![false; var.categories.len()];
            codes.iter().for_each(|&c| seen[c] = true);
            let observed: Vec<String> = var
                .categories
                .iter()
                .zip(&seen)
                .filter(|(_, s)| **s)
                .map(|(c, _)| c.clone())
                .collect();
            if observed.len() < 2 {
                return Err(Error::InvalidInput(format!(
                    "predictor `{name}` has fewer than two observed categories"
                )));
            }
            terms.push(DummyTerm::Indicators {
                variable: name.clone(),
                observed,
            });
        } else {
            let raw = dataset.numeric_column(name)?;
            let Some(Quantification::Numeric { mean, scale }) = Quantification::standardizing(&raw)
            else {
                return Err(Error::ZeroVariance(name.clone()));
            };
            terms.push(DummyTerm::Numeric {
                variable: name.clone(),
                mean,
                scale,
            });
        }
    }
    let encoder = DummyEncoder { terms };

    let mut names = Vec::new();
    for term in &encoder.terms {
        match term {
            DummyTerm::Indicators { variable, observed } => {
                names.extend(observed[1..].iter().map(|c| format!("{variable}={c}")))
            }
            DummyTerm::Numeric { variable, .. } => names.push(variable.clone()),
        }
    }
    let mut values = vec![Vec::with_capacity(dataset.n()); names.len()];
    for row in dataset.rows() {
        for (col, v) in values.iter_mut().zip(encoder.encode(dataset, row)?) {
            col.push(v);
        }
    }
    let columns = names
        .into_iter()
        .zip(values)
        .map(|(name, values)| NamedColumn { name, values })
        .collect();
    Ok(DummyDesign { columns, encoder })
}

/// Seeded assignment of rows to `k` folds: shuffle, then deal round-robin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidConfig("k must be at least 2".into()));
        }
        if k > n {
            return Err(Error::InvalidConfig(format!("k = {k} exceeds {n} rows")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut assignment = vec![0; n];
        for (pos, &row) in order.iter().enumerate() {
            assignment[row] = pos % k;
        }
        Ok(Self {
            k,
            seed,
            assignment,
        })
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        self.assignment.iter().for_each(|&f| sizes[f] += 1);
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DummyOls,
    CatregStepwise,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::DummyOls => "Regression (Dummy variables)",
            Method::CatregStepwise => "CATREG + Stepwise",
        }
    }
}

/// Scale on which relative errors are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MreScale {
    /// Defect counts: ln-scale predictions are exponentiated first.
    #[default]
    Count,
    /// The ln scale itself.
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Test rows holding a category unseen in training.
    pub unpredictable: Vec<String>,
    /// Test rows with a nonpositive actual on the chosen scale.
    pub undefined_mre: Vec<String>,
    pub mmre: f64,
    pub records: Vec<EvaluationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub method: Method,
    pub k: usize,
    pub seed: u64,
    pub mre_scale: MreScale,
    pub folds: Vec<FoldResult>,
    pub average_mmre: f64,
}

impl MethodReport {
    pub fn unpredictable_count(&self) -> usize {
        self.folds.iter().map(|f| f.unpredictable.len()).sum()
    }
}

/// Fitted model able to produce ln-scale predictions for dataset rows.
enum FoldModel {
    Dummy {
        encoder: DummyEncoder,
        intercept: f64,
        coefficients: Vec<f64>,
    },
    Catreg(crate::pipeline::SerializedModel),
}

impl FoldModel {
    fn fit(train: &Dataset, method: Method, config: &ModelConfig) -> Result<Self> {
        match method {
            Method::DummyOls => {
                let design = dummy_design(train, &train.predictor_names())?;
                let refs: Vec<&[f64]> = design.columns.iter().map(|c| c.values.as_slice()).collect();
                let fit = ols_fit(&refs, &train.response()?, true)?;
                Ok(FoldModel::Dummy {
                    encoder: design.encoder,
                    intercept: fit.intercept_estimate(),
                    coefficients: fit.estimates(),
                })
            }
            Method::CatregStepwise => {
                let result = run_pipeline(train, None, config)?;
                Ok(FoldModel::Catreg(result.final_model))
            }
        }
    }

    fn predict_ln(&self, dataset: &Dataset, row: &Observation) -> Result<f64> {
        match self {
            FoldModel::Dummy {
                encoder,
                intercept,
                coefficients,
            } => {
                let x = encoder.encode(dataset, row)?;
                Ok(intercept + x.iter().zip(coefficients).map(|(a, b)| a * b).sum::<f64>())
            }
            FoldModel::Catreg(model) => model.predict_observation(dataset, row),
        }
    }
}

/// Cross-validates `method` on a given fold plan.
pub fn crossval_with_plan(
    dataset: &Dataset,
    plan: &FoldPlan,
    method: Method,
    config: &ModelConfig,
    scale: MreScale,
) -> Result<MethodReport> {
    if plan.assignment.len() != dataset.n() {
        return Err(Error::InvalidInput(format!(
            "fold plan covers {} rows, dataset has {}",
            plan.assignment.len(),
            dataset.n()
        )));
    }
    let response = dataset.response()?;
    let mut folds = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let train_rows = plan.train_rows(fold);
        let test_rows = plan.test_rows(fold);
        let train = dataset.subset(&train_rows)?;
        let model = FoldModel::fit(&train, method, config)?;

        let mut records = Vec::new();
        let mut unpredictable = Vec::new();
        let mut undefined_mre = Vec::new();
        for &i in &test_rows {
            let row_id = dataset.row_id(i);
            let ln_pred = match model.predict_ln(dataset, &dataset.rows()[i]) {
                Ok(v) => v,
                Err(Error::UnseenCategory { .. }) => {
                    unpredictable.push(row_id);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let (actual, predicted) = match scale {
                MreScale::Count => (response[i].exp(), ln_pred.exp()),
                MreScale::Log => (response[i], ln_pred),
            };
            if !(actual > 0.0) {
                undefined_mre.push(row_id);
                continue;
            }
            records.push(EvaluationRecord {
                row_id,
                actual,
                predicted,
            });
        }
        if records.is_empty() {
            return Err(Error::InvalidInput(format!(
                "fold {} has no predictable test rows",
                fold + 1
            )));
        }
        folds.push(FoldResult {
            fold: fold + 1,
            n_train: train_rows.len(),
            n_test: test_rows.len(),
            unpredictable,
            undefined_mre,
            mmre: mmre(&records)?,
            records,
        });
    }
    let average_mmre = folds.iter().map(|f| f.mmre).sum::<f64>() / folds.len() as f64;
    Ok(MethodReport {
        method,
        k: plan.k,
        seed: plan.seed,
        mre_scale: scale,
        folds,
        average_mmre,
    })
}

/// Cross-validates `method` with a fresh `FoldPlan(k, seed)`.
pub fn crossval(
    dataset: &Dataset,
    k: usize,
    seed: u64,
    method: Method,
    config: &ModelConfig,
    scale: MreScale,
) -> Result<MethodReport> {
    let plan = FoldPlan::new(dataset.n(), k, seed)?;
    crossval_with_plan(dataset, &plan, method, config, scale)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub baseline: f64,
    pub method: f64,
    pub improvement: f64,
}

/// Per-fold MMREs of the baseline and the method side by side, with an
/// average row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmreComparison {
    pub folds: Vec<ComparisonRow>,
    pub average: ComparisonRow,
}

impl MmreComparison {
    pub fn from_folds(baseline: &[f64], method: &[f64]) -> Result<Self> {
        if baseline.is_empty() || baseline.len() != method.len() {
            return Err(Error::InvalidInput(format!(
                "need matching nonempty fold lists, got {} and {}",
                baseline.len(),
                method.len()
            )));
        }
        let folds: Vec<ComparisonRow> = baseline
            .iter()
            .zip(method)
            .enumerate()
            .map(|(i, (&b, &m))| ComparisonRow {
                label: format!("Experiment {}", i + 1),
                baseline: b,
                method: m,
                improvement: b - m,
            })
            .collect();
        let k = folds.len() as f64;
        let average = ComparisonRow {
            label: "Average".into(),
            baseline: folds.iter().map(|f| f.baseline).sum::<f64>() / k,
            method: folds.iter().map(|f| f.method).sum::<f64>() / k,
            improvement: folds.iter().map(|f| f.improvement).sum::<f64>() / k,
        };
        Ok(Self { folds, average })
    }

    pub fn render_table(&self) -> String {
        let headers = [
            "MMRE",
            Method::DummyOls.label(),
            Method::CatregStepwise.label(),
            "Improvement",
        ];
        let mut rows: Vec<[String; 4]> = Vec::new();
        for r in self.folds.iter().chain(std::iter::once(&self.average)) {
            rows.push([
                r.label.clone(),
                format!("{:.4}", r.baseline),
                format!("{:.4}", r.method),
                format!("{:.4}", r.improvement),
            ]);
        }
        let widths: Vec<usize> = (0..4)
            .map(|c| rows.iter().map(|r| r[c].len()).chain([headers[c].len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let line = |cells: [&str; 4], out: &mut String| {
            let _ = write!(out, "{:<w$}", cells[0], w = widths[0]);
            for c in 1..4 {
                let _ = write!(out, "  {:>w$}", cells[c], w = widths[c]);
            }
            out.push('\n');
        };
        line(headers, &mut out);
        for r in &rows {
            line([&r[0], &r[1], &r[2], &r[3]], &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub k: usize,
    pub seed: u64,
    pub mre_scale: MreScale,
    pub note: String,
    pub fold_assignment: Vec<usize>,
    pub comparison: MmreComparison,
    pub baseline_unpredictable: usize,
    pub method_unpredictable: usize,
    pub baseline: MethodReport,
    pub method: MethodReport,
}

impl EvaluationReport {
    pub fn from_reports(plan: &FoldPlan, baseline: MethodReport, method: MethodReport) -> Result<Self> {
        let b: Vec<f64> = baseline.folds.iter().map(|f| f.mmre).collect();
        let m: Vec<f64> = method.folds.iter().map(|f| f.mmre).collect();
        let scale = baseline.mre_scale;
        let note = match scale {
            MreScale::Count => "MRE on defect counts (ln-scale predictions exponentiated)",
            MreScale::Log => "MRE on the ln(defect) scale",
        };
        Ok(Self {
            k: plan.k,
            seed: plan.seed,
            mre_scale: scale,
            note: note.to_string(),
            fold_assignment: plan.assignment.clone(),
            comparison: MmreComparison::from_folds(&b, &m)?,
            baseline_unpredictable: baseline.unpredictable_count(),
            method_unpredictable: method.unpredictable_count(),
            baseline,
            method,
        })
    }

    pub fn render_table(&self) -> String {
        let mut out = format!(
            "# {}-fold cross-validation, seed {}; {}\n",
            self.k, self.seed, self.note
        );
        if self.baseline_unpredictable + self.method_unpredictable > 0 {
            let _ = writeln!(
                out,
                "# rows excluded for unseen categories: baseline {}, method {}",
                self.baseline_unpredictable, self.method_unpredictable
            );
        }
        out.push_str(&self.comparison.render_table());
        out
    }
}
