#![allow(dead_code)]

use catreg_core::data::{column_as_quantified, Cell, Dataset, Observation, Quantification, Role, ScalingLevel, Variable};
use catreg_core::scaling::CatregFit;
use catreg_core::stepwise::NamedColumn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub const PLANTED: [&str; 3] = ["x1", "x2", "x3"];

/// n = 200: three strong columns and five pure-noise columns.
pub fn planted_columns(seed: u64) -> (Vec<NamedColumn>, Vec<f64>) {
    let mut r = rng(seed);
    let n = 200;
    let names = ["x1", "x2", "x3", "n1", "n2", "n3", "n4", "n5"];
    let cols: Vec<Vec<f64>> = names.iter().map(|_| (0..n).map(|_| normal(&mut r)).collect()).collect();
    let y = (0..n)
        .map(|i| 1.0 * cols[0][i] + 0.8 * cols[1][i] - 0.7 * cols[2][i] + normal(&mut r))
        .collect();
    let columns = names
        .iter()
        .zip(cols)
        .map(|(name, values)| NamedColumn::new(*name, values))
        .collect();
    (columns, y)
}

fn labels(k: usize) -> Vec<String> {
    (0..k).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

/// All-numeric dataset with random coefficients.
pub fn numeric_dataset(seed: u64, n: usize, p: usize) -> Dataset {
    let mut r = rng(seed);
    let beta: Vec<f64> = (0..p).map(|_| r.gen_range(-2.0..2.0)).collect();
    let mut variables: Vec<Variable> = (0..p)
        .map(|j| Variable::numeric(format!("x{j}"), Role::Predictor))
        .collect();
    variables.push(Variable::numeric("y", Role::Dependent));
    let rows = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..p).map(|_| normal(&mut r)).collect();
            let y = x.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + normal(&mut r);
            let mut values: Vec<Cell> = x.into_iter().map(Cell::Number).collect();
            values.push(Cell::Number(y));
            Observation::new(values)
        })
        .collect();
    Dataset::new(variables, rows).unwrap()
}

/// One categorical predictor with 2..=4 categories, every category observed.
pub fn single_categorical_dataset(seed: u64, level: ScalingLevel) -> Dataset {
    let mut r = rng(seed);
    let k = r.gen_range(2..=4);
    let n = r.gen_range(12..60);
    let effects: Vec<f64> = (0..k).map(|_| r.gen_range(-2.0..2.0)).collect();
    let cats = labels(k);
    let rows = (0..n)
        .map(|i| {
            let c = if i < k { i } else { r.gen_range(0..k) };
            let y = effects[c] + normal(&mut r);
            Observation::new(vec![Cell::Category(cats[c].clone()), Cell::Number(y)])
        })
        .collect();
    Dataset::new(
        vec![
            Variable::categorical("G", level, cats.clone()),
            Variable::numeric("y", Role::Dependent),
        ],
        rows,
    )
    .unwrap()
}

/// Mixed dataset shaped like the survey data: planted ordinal, nominal and
/// ln-size effects, plus one irrelevant variable of each kind.
pub fn planted_dataset(seed: u64, n: usize) -> Dataset {
    let mut r = rng(seed);
    let specs: [(&str, ScalingLevel, usize); 4] = [
        ("Q1", ScalingLevel::Ordinal, 4),
        ("Q2", ScalingLevel::Nominal, 3),
        ("Q3", ScalingLevel::Ordinal, 4),
        ("Q4", ScalingLevel::Nominal, 3),
    ];
    let mut variables: Vec<Variable> = specs
        .iter()
        .map(|(name, level, k)| Variable::categorical(*name, *level, labels(*k)))
        .collect();
    variables.push(Variable::numeric("Ln(FP)", Role::Predictor));
    variables.push(Variable::numeric("Ln(Developer)", Role::Predictor));
    variables.push(Variable::numeric("Ln(Defect)", Role::Dependent));
    let q1_effect = [-0.9, -0.3, 0.2, 1.0];
    let q2_effect = [0.6, -0.8, 0.2];
    let rows = (0..n)
        .map(|i| {
            let codes: Vec<usize> = specs
                .iter()
                .map(|(_, _, k)| if i < *k { i } else { r.gen_range(0..*k) })
                .collect();
            let fp = 4.0 + normal(&mut r);
            let dev = 1.5 + 0.5 * normal(&mut r);
            let y = -1.0 + q1_effect[codes[0]] + q2_effect[codes[1]] + 0.5 * fp + 0.5 * normal(&mut r);
            let mut values: Vec<Cell> = codes
                .iter()
                .zip(&specs)
                .map(|(&c, (_, _, k))| Cell::Category(labels(*k)[c].clone()))
                .collect();
            values.extend([Cell::Number(fp), Cell::Number(dev), Cell::Number(y)]);
            Observation::with_id(format!("R{i}"), values)
        })
        .collect();
    Dataset::new(variables, rows).unwrap()
}

/// Weighted isotonic (nondecreasing) regression by exhaustive search over
/// every way of cutting the sequence into contiguous pooled blocks.
pub fn pava_brute_force(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (n - 1)) {
        let mut fitted = Vec::with_capacity(n);
        let mut start = 0;
        for end in 1..=n {
            let cut = end == n || mask & (1 << (end - 1)) != 0;
            if cut {
                let w: f64 = weights[start..end].iter().sum();
                let m = values[start..end]
                    .iter()
                    .zip(&weights[start..end])
                    .map(|(v, w)| v * w)
                    .sum::<f64>()
                    / w;
                fitted.extend(std::iter::repeat_n(m, end - start));
                start = end;
            }
        }
        if fitted.windows(2).any(|p| p[0] > p[1] + 1e-15) {
            continue;
        }
        let sse: f64 = fitted
            .iter()
            .zip(values)
            .zip(weights)
            .map(|((f, v), w)| w * (f - v) * (f - v))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| sse < *b) {
            best = Some((sse, fitted));
        }
    }
    best.expect("the all-pooled pattern is always feasible").1
}

/// Checks the ALS invariants of a fit: nondecreasing R² trace, normalized
/// quantified columns, and ordinal quantifications nondecreasing in
/// category order.
pub fn check_als_invariants(dataset: &Dataset, fit: &CatregFit) -> Result<(), String> {
    for w in fit.r_squared_trace.windows(2) {
        if w[1] < w[0] - 1e-12 {
            return Err(format!("R² trace decreased {} -> {}", w[0], w[1]));
        }
    }
    let n = dataset.n() as f64;
    for name in &fit.predictors {
        if fit.degenerate.contains(name) {
            continue;
        }
        let column = column_as_quantified(dataset, name, &fit.quantifications).map_err(|e| e.to_string())?;
        let mean = column.iter().sum::<f64>() / n;
        let ms = column.iter().map(|v| v * v).sum::<f64>() / n;
        if mean.abs() > 1e-9 || (ms - 1.0).abs() > 1e-9 {
            return Err(format!("`{name}` quantified column has mean {mean}, mean square {ms}"));
        }
        let var = dataset.variable(name).map_err(|e| e.to_string())?;
        if var.level == ScalingLevel::Ordinal {
            let Some(Quantification::Categorical(q)) = fit.quantifications.get(name) else {
                return Err(format!("`{name}` has no categorical quantification"));
            };
            let ordered: Vec<f64> = var.categories.iter().filter_map(|c| q.get(c).copied()).collect();
            if ordered.windows(2).any(|p| p[0] > p[1]) {
                return Err(format!("`{name}` ordinal quantification not monotone: {ordered:?}"));
            }
        }
    }
    Ok(())
}
