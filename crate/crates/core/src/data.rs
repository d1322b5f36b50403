//! In-memory datasets: variables with measurement levels, observations, and
//! the category quantifications produced by optimal scaling.
//!
//! Standardization throughout the crate uses the population convention
//! (divide by `n`), so a standardized column has sum of squares `n`.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::descriptive::{mean, population_sd};

/// Version tag written into every dataset file.
pub const DATASET_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingLevel {
    Nominal,
    Ordinal,
    Numeric,
}

impl ScalingLevel {
    pub fn is_categorical(self) -> bool {
        !matches!(self, ScalingLevel::Numeric)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Predictor,
    Dependent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variable {
    pub name: String,
    pub level: ScalingLevel,
    /// Declared category labels in order. Empty for numeric variables.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
    pub role: Role,
}

impl Variable {
    pub fn numeric(name: impl Into<String>, role: Role) -> Self {
        Self {
            name: name.into(),
            level: ScalingLevel::Numeric,
            categories: Vec::new(),
            role,
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        level: ScalingLevel,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            name: name.into(),
            level,
            categories: categories.into_iter().map(Into::into).collect(),
            role: Role::Predictor,
        }
    }

    pub fn is_categorical(&self) -> bool {
        self.level.is_categorical()
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == label)
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::InvalidDataset("variable with empty name".into()));
        }
        match (self.level, self.categories.is_empty()) {
            (ScalingLevel::Numeric, false) => Err(Error::InvalidDataset(format!(
                "numeric variable `{}` declares categories",
                self.name
            ))),
            (ScalingLevel::Nominal | ScalingLevel::Ordinal, true) => Err(Error::InvalidDataset(
                format!("categorical variable `{}` declares no categories", self.name),
            )),
            _ => {
                let mut seen = HashSet::new();
                for c in &self.categories {
                    if !seen.insert(c.as_str()) {
                        return Err(Error::InvalidDataset(format!(
                            "variable `{}` repeats category `{c}`",
                            self.name
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// One cell of an observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Category(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Number(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Category(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub values: Vec<Cell>,
}

impl Observation {
    pub fn new(values: Vec<Cell>) -> Self {
        Self { id: None, values }
    }

    pub fn with_id(id: impl Into<String>, values: Vec<Cell>) -> Self {
        Self {
            id: Some(id.into()),
            values,
        }
    }
}

/// Validated table of observations. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    variables: Vec<Variable>,
    rows: Vec<Observation>,
    dependent: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    schema_version: String,
    variables: Vec<Variable>,
    rows: Vec<Observation>,
}

impl Dataset {
    pub fn new(variables: Vec<Variable>, rows: Vec<Observation>) -> Result<Self> {
        let mut names = HashSet::new();
        for v in &variables {
            v.validate()?;
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate variable `{}`",
                    v.name
                )));
            }
        }
        let dependents: Vec<usize> = variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.role == Role::Dependent)
            .map(|(i, _)| i)
            .collect();
        if dependents.len() != 1 {
            return Err(Error::InvalidDataset(format!(
                "expected exactly one dependent variable, found {}",
                dependents.len()
            )));
        }
        if rows.len() < 2 {
            return Err(Error::InsufficientObservations {
                needed: 1,
                got: rows.len(),
            });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.values.len() != variables.len() {
                return Err(Error::InvalidDataset(format!(
                    "row {r} has {} cells, expected {}",
                    row.values.len(),
                    variables.len()
                )));
            }
            for (var, cell) in variables.iter().zip(&row.values) {
                match (var.is_categorical(), cell) {
                    (true, Cell::Category(c)) => {
                        if var.category_index(c).is_none() {
                            return Err(Error::UnknownCategory {
                                variable: var.name.clone(),
                                category: c.clone(),
                            });
                        }
                    }
                    (false, Cell::Number(x)) => {
                        if !x.is_finite() {
                            return Err(Error::InvalidCell {
                                row: r,
                                column: var.name.clone(),
                                message: "value is not finite".into(),
                            });
                        }
                    }
                    (true, Cell::Number(_)) => {
                        return Err(Error::InvalidCell {
                            row: r,
                            column: var.name.clone(),
                            message: "expected a category label".into(),
                        })
                    }
                    (false, Cell::Category(_)) => {
                        return Err(Error::InvalidCell {
                            row: r,
                            column: var.name.clone(),
                            message: "expected a number".into(),
                        })
                    }
                }
            }
        }
        Ok(Self {
            variables,
            rows,
            dependent: dependents[0],
        })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn dependent(&self) -> &Variable {
        &self.variables[self.dependent]
    }

    /// Names of all predictor variables in declared order.
    pub fn predictor_names(&self) -> Vec<String> {
        self.variables
            .iter()
            .filter(|v| v.role == Role::Predictor)
            .map(|v| v.name.clone())
            .collect()
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        Ok(&self.variables[self.variable_index(name)?])
    }

    /// Row identifier, defaulting to the 0-based row index.
    pub fn row_id(&self, row: usize) -> String {
        self.rows[row]
            .id
            .clone()
            .unwrap_or_else(|| row.to_string())
    }

    /// Raw values of a numeric variable.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.variable_index(name)?;
        if self.variables[idx].is_categorical() {
            return Err(Error::InvalidInput(format!("variable `{name}` is categorical")));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| match &r.values[idx] {
                Cell::Number(x) => *x,
                Cell::Category(_) => unreachable!("validated at construction"),
            })
            .collect())
    }

    /// Declared-category indices of a categorical variable, one per row.
    pub fn category_codes(&self, name: &str) -> Result<Vec<usize>> {
        let idx = self.variable_index(name)?;
        let var = &self.variables[idx];
        if !var.is_categorical() {
            return Err(Error::InvalidInput(format!("variable `{name}` is numeric")));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| match &r.values[idx] {
                Cell::Category(c) => var.category_index(c).expect("validated at construction"),
                Cell::Number(_) => unreachable!("validated at construction"),
            })
            .collect())
    }

    /// Values of the dependent variable, which must be numeric.
    pub fn response(&self) -> Result<Vec<f64>> {
        self.numeric_column(&self.dependent().name)
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        let picked = rows.iter().map(|&i| self.rows[i].clone()).collect();
        Dataset::new(self.variables.clone(), picked)
    }

    /// Same rows with only `predictors` (plus the dependent) kept.
    pub fn select(&self, predictors: &[String]) -> Result<Dataset> {
        let mut keep = Vec::with_capacity(predictors.len() + 1);
        for p in predictors {
            let idx = self.variable_index(p)?;
            if idx == self.dependent {
                return Err(Error::InvalidInput(format!("`{p}` is the dependent variable")));
            }
            keep.push(idx);
        }
        keep.push(self.dependent);
        let variables = keep.iter().map(|&i| self.variables[i].clone()).collect();
        let rows = self
            .rows
            .iter()
            .map(|r| Observation {
                id: r.id.clone(),
                values: keep.iter().map(|&i| r.values[i].clone()).collect(),
            })
            .collect();
        Dataset::new(variables, rows)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = DatasetFile {
            schema_version: DATASET_SCHEMA_VERSION.to_string(),
            variables: self.variables.clone(),
            rows: self.rows.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(text)?;
        if file.schema_version != DATASET_SCHEMA_VERSION {
            return Err(Error::SchemaVersion(file.schema_version));
        }
        Dataset::new(file.variables, file.rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// How one variable is turned into a numeric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Quantification {
    /// Category label to quantified value.
    Categorical(IndexMap<String, f64>),
    /// Affine standardization `(x - mean) / scale`.
    Numeric { mean: f64, scale: f64 },
}

impl Quantification {
    /// Standardization fitted to `values`, or `None` when they are constant.
    pub fn standardizing(values: &[f64]) -> Option<Self> {
        let scale = population_sd(values);
        (scale > 0.0).then(|| Quantification::Numeric {
            mean: mean(values),
            scale,
        })
    }
}

/// Per-variable quantifications, keyed by variable name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuantificationMap(IndexMap<String, Quantification>);

impl QuantificationMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, variable: impl Into<String>, q: Quantification) {
        self.0.insert(variable.into(), q);
    }

    pub fn get(&self, variable: &str) -> Option<&Quantification> {
        self.0.get(variable)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Quantification)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Quantified value of one category of a categorical variable.
    pub fn category_value(&self, variable: &str, category: &str) -> Result<f64> {
        match self.0.get(variable) {
            Some(Quantification::Categorical(values)) => {
                values
                    .get(category)
                    .copied()
                    .ok_or_else(|| Error::MissingQuantification {
                        variable: variable.to_string(),
                        category: category.to_string(),
                    })
            }
            Some(Quantification::Numeric { .. }) => Err(Error::InvalidInput(format!(
                "variable `{variable}` is quantified as numeric"
            ))),
            None => Err(Error::UnknownVariable(variable.to_string())),
        }
    }
}

/// The numeric column obtained by substituting category quantifications
/// (categorical variables) or applying the stored standardization (numeric).
pub fn column_as_quantified(
    dataset: &Dataset,
    variable: &str,
    map: &QuantificationMap,
) -> Result<Vec<f64>> {
    let var = dataset.variable(variable)?;
    let q = map
        .get(variable)
        .ok_or_else(|| Error::UnknownVariable(variable.to_string()))?;
    match (var.is_categorical(), q) {
        (true, Quantification::Categorical(values)) => {
            let codes = dataset.category_codes(variable)?;
            codes
                .into_iter()
                .map(|c| {
                    let label = &var.categories[c];
                    values
                        .get(label)
                        .copied()
                        .ok_or_else(|| Error::MissingQuantification {
                            variable: variable.to_string(),
                            category: label.clone(),
                        })
                })
                .collect()
        }
        (false, Quantification::Numeric { mean, scale }) => {
            if !(*scale > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "variable `{variable}` has nonpositive scale"
                )));
            }
            Ok(dataset
                .numeric_column(variable)?
                .into_iter()
                .map(|x| (x - mean) / scale)
                .collect())
        }
        _ => Err(Error::InvalidInput(format!(
            "quantification kind does not match the level of `{variable}`"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_dataset() -> Dataset {
        let vars = vec![
            Variable::categorical("G", ScalingLevel::Nominal, ["A", "B"]),
            Variable::numeric("x", Role::Predictor),
            Variable::numeric("y", Role::Dependent),
        ];
        let rows = [("A", 1.0, 1.0), ("A", 2.0, 2.0), ("B", 3.0, 3.0), ("B", 4.0, 4.0)]
            .iter()
            .map(|&(g, x, y)| Observation::new(vec![g.into(), x.into(), y.into()]))
            .collect();
        Dataset::new(vars, rows).unwrap()
    }

    #[test]
    fn standardized_binary_indicator_is_plus_minus_one() {
        let ds = binary_dataset();
        // hand standardization of a balanced 0/1 indicator: mean 1/2, sd 1/2
        let mut map = QuantificationMap::new();
        map.insert(
            "G",
            Quantification::Categorical(IndexMap::from([("A".into(), -1.0), ("B".into(), 1.0)])),
        );
        let col = column_as_quantified(&ds, "G", &map).unwrap();
        assert_eq!(col, vec![-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn numeric_population_standardization() {
        let vars = vec![
            Variable::numeric("x", Role::Predictor),
            Variable::numeric("y", Role::Dependent),
        ];
        let rows = [1.0, 2.0, 3.0]
            .iter()
            .map(|&x| Observation::new(vec![x.into(), 0.0.into()]))
            .collect();
        let ds = Dataset::new(vars, rows).unwrap();
        let mut map = QuantificationMap::new();
        map.insert("x", Quantification::standardizing(&[1.0, 2.0, 3.0]).unwrap());
        let col = column_as_quantified(&ds, "x", &map).unwrap();
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in col.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_standardization_leaves_column_unchanged() {
        let ds = binary_dataset();
        let mut map = QuantificationMap::new();
        map.insert("x", Quantification::Numeric { mean: 0.0, scale: 1.0 });
        assert_eq!(
            column_as_quantified(&ds, "x", &map).unwrap(),
            ds.numeric_column("x").unwrap()
        );
    }

    #[test]
    fn unknown_variable_and_missing_category() {
        let ds = binary_dataset();
        let mut map = QuantificationMap::new();
        assert!(matches!(
            column_as_quantified(&ds, "nope", &map),
            Err(Error::UnknownVariable(_))
        ));
        map.insert(
            "G",
            Quantification::Categorical(IndexMap::from([("A".into(), 0.0)])),
        );
        assert!(matches!(
            column_as_quantified(&ds, "G", &map),
            Err(Error::MissingQuantification { .. })
        ));
    }

    #[test]
    fn dataset_invariants_are_enforced() {
        let y = Variable::numeric("y", Role::Dependent);
        let one_row = vec![Observation::new(vec![1.0.into()])];
        assert!(Dataset::new(vec![y.clone()], one_row).is_err());

        let bad_cat = vec![
            Observation::new(vec!["C".into(), 1.0.into()]),
            Observation::new(vec!["A".into(), 2.0.into()]),
        ];
        let g = Variable::categorical("G", ScalingLevel::Ordinal, ["A", "B"]);
        assert!(matches!(
            Dataset::new(vec![g.clone(), y.clone()], bad_cat),
            Err(Error::UnknownCategory { .. })
        ));

        let dup = Variable::categorical("G", ScalingLevel::Ordinal, ["A", "A"]);
        let rows = vec![
            Observation::new(vec!["A".into(), 1.0.into()]),
            Observation::new(vec!["A".into(), 2.0.into()]),
        ];
        assert!(Dataset::new(vec![dup, y.clone()], rows.clone()).is_err());

        let no_dep = Variable::numeric("z", Role::Predictor);
        assert!(Dataset::new(vec![g, no_dep], rows).is_err());
    }

    #[test]
    fn row_ids_default_to_index() {
        let ds = binary_dataset();
        assert_eq!(ds.row_id(2), "2");
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let ds = binary_dataset();
        let text = ds.to_json().unwrap();
        assert_eq!(Dataset::from_json(&text).unwrap(), ds);
        let bumped = text.replace("\"schema_version\": \"1\"", "\"schema_version\": \"2\"");
        assert!(matches!(
            Dataset::from_json(&bumped),
            Err(Error::SchemaVersion(_))
        ));
    }
}
