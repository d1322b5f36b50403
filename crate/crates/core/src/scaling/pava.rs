//! Weighted pool-adjacent-violators: least-squares projection onto the
//! monotone cone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

struct Block {
    weighted_sum: f64,
    weight: f64,
    len: usize,
}

impl Block {
    fn mean(&self) -> f64 {
        self.weighted_sum / self.weight
    }
}

/// Minimizes `Σ w_i (v_i - f_i)²` over monotone `f`.
///
/// Pooled blocks carry the weighted mean of their members.
pub fn pava(values: &[f64], weights: &[f64], direction: Direction) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("pava needs at least one value".into()));
    }
    if values.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "pava: {} values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidInput(format!("pava: weight {w} is not positive")));
    }
    let sign = match direction {
        Direction::Increasing => 1.0,
        Direction::Decreasing => -1.0,
    };

    let mut blocks: Vec<Block> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push(Block {
            weighted_sum: sign * v * w,
            weight: w,
            len: 1,
        });
        while blocks.len() > 1 {
            let last = &blocks[blocks.len() - 1];
            let prev = &blocks[blocks.len() - 2];
            if prev.mean() <= last.mean() {
                break;
            }
            let last = blocks.pop().expect("len > 1");
            let prev = blocks.last_mut().expect("len > 1");
            prev.weighted_sum += last.weighted_sum;
            prev.weight += last.weight;
            prev.len += last.len;
        }
    }

    let mut out = Vec::with_capacity(values.len());
    for b in &blocks {
        let m = sign * b.mean();
        out.extend(std::iter::repeat_n(m, b.len));
    }
    Ok(out)
}
