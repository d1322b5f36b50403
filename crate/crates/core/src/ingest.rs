//! Survey and project-metric ingestion.
//!
//! Input is one CSV row per project: a column per questionnaire item holding
//! the choice letter, `sloc_<language>` columns (or a direct `fp` column),
//! and the `duration`, `developers` and `defects` metrics. An optional `id`
//! column names the rows. Size is converted to function points by
//! backfiring, the four metrics are log-transformed, and incomplete rows are
//! dropped with a per-row removal report.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::data::{Cell, Dataset, Observation, Role, ScalingLevel, Variable};
use crate::error::{Error, Result};

pub const SLOC_PREFIX: &str = "sloc_";

/// Metric fields in the order they become variables.
pub const METRIC_FIELDS: [&str; 4] = ["FP", "Developer", "Duration", "Defect"];
pub const DEPENDENT_FIELD: &str = "Defect";

fn default_level() -> ScalingLevel {
    ScalingLevel::Ordinal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionItem {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub topic: String,
    /// Choice labels, weakest first.
    pub choices: Vec<String>,
    #[serde(default = "default_level")]
    pub level: ScalingLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionnaireSchema {
    pub items: Vec<QuestionItem>,
}

const SURVEY_ITEMS: [(&str, usize); 22] = [
    ("project schedule", 3),
    ("release frequency", 6),
    ("developer experience", 4),
    ("personnel turnover", 5),
    ("similar projects", 3),
    ("reliability requirement", 3),
    ("response time constraint", 3),
    ("modularity", 4),
    ("data management complexity", 5),
    ("computational complexity", 5),
    ("control flow complexity", 5),
    ("user interface", 3),
    ("test plan", 3),
    ("test tooling", 2),
    ("test coverage", 5),
    ("coverage source", 2),
    ("bug tracking accuracy", 2),
    ("users involved", 5),
    ("user-reported defects", 5),
    ("testing effort", 5),
    ("onboarding documentation", 3),
    ("user documentation", 4),
];

impl QuestionnaireSchema {
    /// The 22-item OSS quality survey, every item ordinal with choices `A..`.
    pub fn oss_survey() -> Self {
        let items = SURVEY_ITEMS
            .iter()
            .enumerate()
            .map(|(i, &(topic, count))| QuestionItem {
                id: format!("Q{}", i + 1),
                topic: topic.to_string(),
                choices: (b'A'..b'A' + count as u8).map(|c| (c as char).to_string()).collect(),
                level: ScalingLevel::Ordinal,
            })
            .collect();
        Self { items }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for item in &self.items {
            if !seen.insert(item.id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate item `{}`", item.id)));
            }
            if !item.level.is_categorical() {
                return Err(Error::InvalidConfig(format!(
                    "item `{}` must be nominal or ordinal",
                    item.id
                )));
            }
            if item.choices.is_empty() {
                return Err(Error::InvalidConfig(format!("item `{}` has no choices", item.id)));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let schema: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn item(&self, id: &str) -> Option<&QuestionItem> {
        self.items.iter().find(|i| i.id == id)
    }
}

impl Default for QuestionnaireSchema {
    fn default() -> Self {
        Self::oss_survey()
    }
}

/// Source lines of code per function point, by language.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GearingTable(BTreeMap<String, f64>);

impl GearingTable {
    pub fn new(factors: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let table = Self(factors.into_iter().collect());
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        match self.0.iter().find(|(_, f)| !(f.is_finite() && **f > 0.0)) {
            Some((lang, f)) => Err(Error::InvalidConfig(format!(
                "gearing factor for `{lang}` must be positive, got {f}"
            ))),
            None => Ok(()),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let table: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        table.validate()?;
        Ok(table)
    }

    pub fn factor(&self, language: &str) -> Option<f64> {
        self.0.get(language).copied()
    }
}

/// Function points from per-language logical SLOC: `Σ sloc / gearing`.
pub fn backfire(sloc_by_language: &BTreeMap<String, f64>, gearing: &GearingTable) -> Result<f64> {
    let mut total_sloc = 0.0;
    let mut fp = 0.0;
    for (lang, &sloc) in sloc_by_language {
        let factor = gearing
            .factor(lang)
            .ok_or_else(|| Error::UnknownLanguage(lang.clone()))?;
        if !(sloc.is_finite() && sloc >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "SLOC for `{lang}` must be a nonnegative number, got {sloc}"
            )));
        }
        total_sloc += sloc;
        fp += sloc / factor;
    }
    if total_sloc == 0.0 {
        return Err(Error::InvalidInput("total SLOC is zero".into()));
    }
    Ok(fp)
}

/// One parsed CSV row, before metric derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub id: String,
    /// One entry per schema item; `None` for an empty cell.
    pub answers: Vec<Option<String>>,
    pub sloc: BTreeMap<String, f64>,
    pub fp: Option<f64>,
    pub duration: Option<f64>,
    pub developers: Option<f64>,
    pub defects: Option<f64>,
    /// Reasons this row cannot be used.
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub rows: Vec<RawRow>,
}

enum Column {
    Id,
    Question(usize),
    Sloc(String),
    Fp,
    Duration,
    Developers,
    Defects,
}

fn parse_number(text: &str, row: usize, column: &str) -> Result<Option<f64>> {
    if text.is_empty() {
        return Ok(None);
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::InvalidCell {
            row,
            column: column.to_string(),
            message: format!("`{text}` is not a number"),
        }),
    }
}

/// Parses survey responses from CSV text.
pub fn parse_responses(text: &str, schema: &QuestionnaireSchema) -> Result<RawTable> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();

    let mut columns = Vec::with_capacity(headers.len());
    for h in headers.iter() {
        let col = if h == "id" {
            Column::Id
        } else if let Some(pos) = schema.items.iter().position(|i| i.id == h) {
            Column::Question(pos)
        } else if let Some(lang) = h.strip_prefix(SLOC_PREFIX) {
            Column::Sloc(lang.to_string())
        } else {
            match h {
                "fp" => Column::Fp,
                "duration" => Column::Duration,
                "developers" => Column::Developers,
                "defects" => Column::Defects,
                other => {
                    return Err(Error::InvalidInput(format!("unknown CSV column `{other}`")))
                }
            }
        };
        columns.push(col);
    }
    for item in &schema.items {
        if !headers.iter().any(|h| h == item.id) {
            return Err(Error::InvalidInput(format!("CSV lacks column `{}`", item.id)));
        }
    }
    for required in ["duration", "developers", "defects"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::InvalidInput(format!("CSV lacks column `{required}`")));
        }
    }
    if !headers.iter().any(|h| h == "fp" || h.starts_with(SLOC_PREFIX)) {
        return Err(Error::InvalidInput(
            "CSV needs an `fp` column or at least one `sloc_<language>` column".into(),
        ));
    }

    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let line = r + 1;
        let mut row = RawRow {
            id: r.to_string(),
            answers: vec![None; schema.items.len()],
            sloc: BTreeMap::new(),
            fp: None,
            duration: None,
            developers: None,
            defects: None,
            flags: Vec::new(),
        };
        for (col, (cell, header)) in columns.iter().zip(record.iter().zip(headers.iter())) {
            match col {
                Column::Id => {
                    if !cell.is_empty() {
                        row.id = cell.to_string();
                    }
                }
                Column::Question(q) => {
                    if cell.is_empty() {
                        continue;
                    }
                    let item = &schema.items[*q];
                    if !item.choices.iter().any(|c| c == cell) {
                        return Err(Error::InvalidCell {
                            row: line,
                            column: header.to_string(),
                            message: format!(
                                "`{cell}` is not one of {}",
                                item.choices.join(", ")
                            ),
                        });
                    }
                    row.answers[*q] = Some(cell.to_string());
                }
                Column::Sloc(lang) => {
                    if let Some(v) = parse_number(cell, line, header)? {
                        if v < 0.0 {
                            return Err(Error::InvalidCell {
                                row: line,
                                column: header.to_string(),
                                message: "SLOC cannot be negative".into(),
                            });
                        }
                        row.sloc.insert(lang.clone(), v);
                    }
                }
                Column::Fp => row.fp = parse_number(cell, line, header)?,
                Column::Duration => row.duration = parse_number(cell, line, header)?,
                Column::Developers => row.developers = parse_number(cell, line, header)?,
                Column::Defects => row.defects = parse_number(cell, line, header)?,
            }
        }
        for (item, answer) in schema.items.iter().zip(&row.answers) {
            if answer.is_none() {
                row.flags.push(format!("missing answer to {}", item.id));
            }
        }
        for (name, value) in [
            ("duration", row.duration),
            ("developers", row.developers),
            ("defects", row.defects),
        ] {
            if value.is_none() {
                row.flags.push(format!("missing {name}"));
            }
        }
        rows.push(row);
    }
    Ok(RawTable { rows })
}

/// Reads survey responses from a CSV file.
pub fn load_responses(path: impl AsRef<Path>, schema: &QuestionnaireSchema) -> Result<RawTable> {
    parse_responses(&fs::read_to_string(path)?, schema)
}

/// A row with its metric fields resolved, keyed by field name
/// (`FP`, `Duration`, … or `Ln(FP)`, … after [`log_transform`]).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub id: String,
    pub answers: Vec<Option<String>>,
    pub values: IndexMap<String, Option<f64>>,
    pub flags: Vec<String>,
}

/// Resolves function points (direct `fp` or backfired SLOC) and collects the
/// metric fields.
pub fn derive_metrics(table: &RawTable, gearing: &GearingTable) -> Result<Vec<MetricRow>> {
    table
        .rows
        .iter()
        .map(|row| {
            let mut flags = row.flags.clone();
            let fp = match row.fp {
                Some(fp) => Some(fp),
                None if row.sloc.values().all(|&v| v == 0.0) => {
                    flags.push("missing size (no fp and no SLOC)".into());
                    None
                }
                None => Some(backfire(&row.sloc, gearing)?),
            };
            let values = IndexMap::from([
                ("FP".to_string(), fp),
                ("Developer".to_string(), row.developers),
                ("Duration".to_string(), row.duration),
                ("Defect".to_string(), row.defects),
            ]);
            Ok(MetricRow {
                id: row.id.clone(),
                answers: row.answers.clone(),
                values,
                flags,
            })
        })
        .collect()
}

pub fn ln_name(field: &str) -> String {
    format!("Ln({field})")
}

/// Replaces each named field by its natural log, renamed `Ln(<field>)`.
/// Nonpositive values flag the row.
pub fn log_transform(rows: Vec<MetricRow>, fields: &[&str]) -> Vec<MetricRow> {
    rows.into_iter()
        .map(|mut row| {
            let mut values = IndexMap::with_capacity(row.values.len());
            for (key, value) in row.values {
                if fields.contains(&key.as_str()) {
                    let logged = match value {
                        Some(x) if x > 0.0 => Some(x.ln()),
                        Some(x) => {
                            row.flags.push(format!(
                                "row {}: {key} = {x} is not positive, cannot take the log",
                                row.id
                            ));
                            None
                        }
                        None => None,
                    };
                    values.insert(ln_name(&key), logged);
                } else {
                    values.insert(key, value);
                }
            }
            row.values = values;
            row
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Removal {
    pub row_id: String,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovalReport {
    pub kept: usize,
    pub removed: Vec<Removal>,
}

/// Drops flagged rows and, when `outlier_zmax` is set, rows lying more than
/// `outlier_zmax` standard deviations from the other rows on any
/// log-transformed variable, then assembles the dataset.
///
/// The outlier z-score of a row uses the mean and sample standard deviation
/// of the remaining candidate rows, so a single extreme value is not masked
/// by its own contribution.
pub fn filter_rows(
    rows: &[MetricRow],
    schema: &QuestionnaireSchema,
    outlier_zmax: Option<f64>,
) -> Result<(Dataset, RemovalReport)> {
    if let Some(z) = outlier_zmax {
        if !(z > 0.0) {
            return Err(Error::InvalidConfig("outlier_zmax must be positive".into()));
        }
    }
    let Some(first) = rows.first() else {
        return Err(Error::InsufficientObservations { needed: 1, got: 0 });
    };
    let numeric_keys: Vec<String> = first.values.keys().cloned().collect();
    let dependent_key = ln_name(DEPENDENT_FIELD);
    if !numeric_keys.contains(&dependent_key) {
        return Err(Error::InvalidInput(format!("rows lack `{dependent_key}`")));
    }

    let mut reasons: Vec<Vec<String>> = rows.iter().map(|r| r.flags.clone()).collect();
    for (row, why) in rows.iter().zip(reasons.iter_mut()) {
        if row.values.keys().ne(numeric_keys.iter()) {
            why.push("inconsistent metric fields".into());
        }
    }

    if let Some(zmax) = outlier_zmax {
        let candidates: Vec<usize> = (0..rows.len()).filter(|&i| reasons[i].is_empty()).collect();
        let mut outliers: HashMap<usize, Vec<String>> = HashMap::new();
        for key in numeric_keys.iter().filter(|k| k.starts_with("Ln(")) {
            let values: Vec<f64> = candidates
                .iter()
                .map(|&i| rows[i].values[key].expect("unflagged rows are complete"))
                .collect();
            let m = values.len();
            if m < 3 {
                break;
            }
            let sum: f64 = values.iter().sum();
            let sumsq: f64 = values.iter().map(|v| v * v).sum();
            for (pos, &i) in candidates.iter().enumerate() {
                let x = values[pos];
                let others = (m - 1) as f64;
                let mean = (sum - x) / others;
                let var = ((sumsq - x * x) - others * mean * mean).max(0.0) / (others - 1.0);
                let sd = var.sqrt();
                let dev = (x - mean).abs();
                let z = if sd > 0.0 {
                    dev / sd
                } else if dev > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                if z > zmax {
                    outliers
                        .entry(i)
                        .or_default()
                        .push(format!("outlier on {key} (|z| = {z:.3} > {zmax})"));
                }
            }
        }
        for (i, why) in outliers {
            reasons[i].extend(why);
        }
    }

    let mut variables: Vec<Variable> = schema
        .items
        .iter()
        .map(|item| Variable::categorical(item.id.clone(), item.level, item.choices.iter().cloned()))
        .collect();
    for key in &numeric_keys {
        let role = if *key == dependent_key {
            Role::Dependent
        } else {
            Role::Predictor
        };
        variables.push(Variable::numeric(key.clone(), role));
    }

    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for (row, why) in rows.iter().zip(reasons) {
        if !why.is_empty() {
            removed.push(Removal {
                row_id: row.id.clone(),
                reasons: why,
            });
            continue;
        }
        let mut cells: Vec<Cell> = row
            .answers
            .iter()
            .map(|a| Cell::Category(a.clone().expect("unflagged rows are complete")))
            .collect();
        cells.extend(
            numeric_keys
                .iter()
                .map(|k| Cell::Number(row.values[k].expect("unflagged rows are complete"))),
        );
        kept.push(Observation::with_id(row.id.clone(), cells));
    }
    if kept.len() < 2 {
        return Err(Error::InsufficientObservations {
            needed: 1,
            got: kept.len(),
        });
    }
    let report = RemovalReport {
        kept: kept.len(),
        removed,
    };
    Ok((Dataset::new(variables, kept)?, report))
}

/// Ingestion settings, usually read from the `ingest` section of the
/// tool configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// Questionnaire schema; the built-in 22-item survey when absent.
    pub schema: Option<QuestionnaireSchema>,
    pub gearing: GearingTable,
    /// Outlier threshold in standard deviations; off when absent.
    pub outlier_zmax: Option<f64>,
}

/// Full ingestion path: parse, derive metrics, log-transform, filter.
pub fn ingest_csv(text: &str, config: &IngestConfig) -> Result<(Dataset, RemovalReport)> {
    let schema = config.schema.clone().unwrap_or_default();
    config.gearing.validate()?;
    let table = parse_responses(text, &schema)?;
    let metrics = derive_metrics(&table, &config.gearing)?;
    let logged = log_transform(metrics, &METRIC_FIELDS);
    filter_rows(&logged, &schema, config.outlier_zmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_schema() -> QuestionnaireSchema {
        QuestionnaireSchema {
            items: vec![QuestionItem {
                id: "Q6".into(),
                topic: String::new(),
                choices: vec!["A".into(), "B".into(), "C".into()],
                level: ScalingLevel::Ordinal,
            }],
        }
    }

    fn gearing() -> GearingTable {
        GearingTable::new([("L".to_string(), 53.0), ("M".to_string(), 100.0)]).unwrap()
    }

    #[test]
    fn survey_choice_counts() {
        let schema = QuestionnaireSchema::oss_survey();
        assert_eq!(schema.items.len(), 22);
        assert_eq!(schema.item("Q2").unwrap().choices.len(), 6);
        assert_eq!(schema.item("Q6").unwrap().choices, vec!["A", "B", "C"]);
        assert_eq!(schema.item("Q14").unwrap().choices.len(), 2);
        assert_eq!(schema.item("Q22").unwrap().choices.len(), 4);
        assert!(schema.items.iter().all(|i| i.level == ScalingLevel::Ordinal));
    }

    #[test]
    fn backfire_examples() {
        let g = gearing();
        let one = BTreeMap::from([("L".to_string(), 5300.0)]);
        assert_eq!(backfire(&one, &g).unwrap(), 100.0);
        let g2 = GearingTable::new([("L1".to_string(), 50.0), ("L2".to_string(), 100.0)]).unwrap();
        let two = BTreeMap::from([("L1".to_string(), 100.0), ("L2".to_string(), 200.0)]);
        assert_eq!(backfire(&two, &g2).unwrap(), 4.0);
        let unknown = BTreeMap::from([("Z".to_string(), 100.0)]);
        assert!(matches!(backfire(&unknown, &g), Err(Error::UnknownLanguage(_))));
        let zero = BTreeMap::from([("L".to_string(), 0.0)]);
        assert!(backfire(&zero, &g).is_err());
    }

    #[test]
    fn gearing_must_be_positive() {
        assert!(GearingTable::new([("L".to_string(), 0.0)]).is_err());
    }

    #[test]
    fn choice_validation() {
        let schema = small_schema();
        let ok = "Q6,fp,duration,developers,defects\nC,10,2,3,4\n";
        let table = parse_responses(ok, &schema).unwrap();
        assert_eq!(table.rows[0].answers[0].as_deref(), Some("C"));
        let bad = "Q6,fp,duration,developers,defects\nF,10,2,3,4\n";
        assert!(matches!(
            parse_responses(bad, &schema),
            Err(Error::InvalidCell { .. })
        ));
        let text = "Q6,fp,duration,developers,defects\nA,ten,2,3,4\n";
        assert!(matches!(
            parse_responses(text, &schema),
            Err(Error::InvalidCell { .. })
        ));
    }

    #[test]
    fn empty_defects_flags_row() {
        let schema = small_schema();
        let text = "Q6,fp,duration,developers,defects\nA,10,2,3,\n";
        let table = parse_responses(text, &schema).unwrap();
        assert!(table.rows[0].flags.iter().any(|f| f.contains("defects")));
    }

    #[test]
    fn log_transform_examples() {
        let row = MetricRow {
            id: "r".into(),
            answers: vec![],
            values: IndexMap::from([
                ("FP".to_string(), Some(1.0)),
                ("Duration".to_string(), Some(0.0)),
                ("Defect".to_string(), Some(2f64.exp())),
            ]),
            flags: vec![],
        };
        let out = log_transform(vec![row], &["FP", "Duration", "Defect"]);
        assert_eq!(out[0].values["Ln(FP)"], Some(0.0));
        assert!((out[0].values["Ln(Defect)"].unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(out[0].values["Ln(Duration)"], None);
        assert!(out[0].flags.iter().any(|f| f.contains("row r") && f.contains("Duration")));
    }

    fn metric_row(id: &str, answer: Option<&str>, fp: f64, defect: f64) -> MetricRow {
        MetricRow {
            id: id.into(),
            answers: vec![answer.map(str::to_string)],
            values: IndexMap::from([
                ("Ln(FP)".to_string(), Some(fp)),
                ("Ln(Defect)".to_string(), Some(defect)),
            ]),
            flags: if answer.is_none() {
                vec!["missing answer to Q6".into()]
            } else {
                vec![]
            },
        }
    }

    #[test]
    fn filter_drops_flagged_rows() {
        let rows = vec![
            metric_row("a", Some("A"), 1.0, 1.0),
            metric_row("b", Some("B"), 2.0, 1.5),
            metric_row("c", None, 3.0, 2.0),
            metric_row("d", Some("C"), 4.0, 2.5),
            metric_row("e", Some("A"), 5.0, 3.0),
        ];
        let (ds, report) = filter_rows(&rows, &small_schema(), None).unwrap();
        assert_eq!(ds.n(), 4);
        assert_eq!(report.removed.len(), 1);
        assert_eq!(report.removed[0].row_id, "c");
        // surviving values are untouched
        assert_eq!(ds.numeric_column("Ln(FP)").unwrap(), vec![1.0, 2.0, 4.0, 5.0]);
    }

    #[test]
    fn filter_needs_two_rows() {
        let rows = vec![metric_row("a", Some("A"), 1.0, 1.0), metric_row("b", None, 2.0, 1.0)];
        assert!(filter_rows(&rows, &small_schema(), None).is_err());
    }

    #[test]
    fn outlier_removal_by_leave_one_out_z() {
        // nine rows alternate 0 / 1 on Ln(FP): mean 4/9, sample sd 0.527;
        // the tenth at 3 sits |3 - 0.444| / 0.527 = 4.85 sds away
        let mut rows: Vec<MetricRow> = (0..9)
            .map(|i| metric_row(&format!("r{i}"), Some("A"), (i % 2) as f64, 1.0 + 0.1 * i as f64))
            .collect();
        rows.push(metric_row("far", Some("B"), 3.0, 1.0));
        let (ds, report) = filter_rows(&rows, &small_schema(), Some(3.0)).unwrap();
        assert_eq!(ds.n(), 9);
        assert_eq!(report.removed.len(), 1);
        assert_eq!(report.removed[0].row_id, "far");
        let (ds, report) = filter_rows(&rows, &small_schema(), None).unwrap();
        assert_eq!(ds.n(), 10);
        assert!(report.removed.is_empty());
    }
}
