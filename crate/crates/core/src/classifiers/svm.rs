//! Linear soft-margin SVM trained by deterministic epoch-based
//! subgradient descent on the regularized hinge objective
//! lambda/2 * |w|^2 + mean hinge loss.
//!
//! Continuous features are standardized with training means and
//! (floored) deviations; categorical features are one-hot encoded over
//! the training vocabulary, with unseen tokens mapping to an all-zero
//! block. Labels are encoded Benign -> -1, Malicious -> +1. The step
//! size at update t is 1/(lambda * t); row order within each epoch is
//! a seed-derived shuffle, so training is a pure function of
//! (data, spec).
//!
//! The returned model is the epoch-end iterate with the lowest full
//! objective, not the last iterate: single-sample subgradient steps
//! can raise the objective late in a run, and keeping the best
//! evaluated iterate makes the per-epoch objective of the retained
//! model non-increasing by construction without touching the step
//! schedule.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::columnar::{ColumnValues, ColumnarView};
use super::SvmParams;
use crate::data::{FeatureValue, Label};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncoderBlock<F> {
    /// One slot: (x - mean) / std.
    Continuous { column: usize, mean: F, std: F },
    /// `tokens.len()` slots, one-hot; tokens sorted. Unseen tokens
    /// encode as all zeros.
    Categorical { column: usize, tokens: Vec<String> },
}

impl<F> EncoderBlock<F> {
    fn width(&self) -> usize {
        match self {
            EncoderBlock::Continuous { .. } => 1,
            EncoderBlock::Categorical { tokens, .. } => tokens.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel<F> {
    /// One weight per encoded slot, blocks in schema column order.
    pub weights: Vec<F>,
    pub bias: F,
    pub blocks: Vec<EncoderBlock<F>>,
}

impl<F: Scalar> SvmModel<F> {
    /// Raw decision value w.x + b for one row, computed blockwise so
    /// no encoded vector is materialized.
    pub fn margin(&self, values: &[FeatureValue<F>]) -> Result<F> {
        let mut margin = self.bias;
        let mut slot = 0usize;
        for block in &self.blocks {
            match block {
                EncoderBlock::Continuous { column, mean, std } => {
                    let x = match values.get(*column) {
                        Some(FeatureValue::Number(x)) => *x,
                        Some(FeatureValue::Category(_)) => {
                            return Err(Error::Contract(format!(
                                "column {column} holds a category but the model expects a number"
                            )))
                        }
                        None => {
                            return Err(Error::Contract(format!(
                                "row too short: no column {column}"
                            )))
                        }
                    };
                    margin = margin + self.weights[slot] * ((x - *mean) / *std);
                    slot += 1;
                }
                EncoderBlock::Categorical { column, tokens } => {
                    let token = match values.get(*column) {
                        Some(FeatureValue::Category(t)) => t,
                        Some(FeatureValue::Number(_)) => {
                            return Err(Error::Contract(format!(
                                "column {column} holds a number but the model expects a category"
                            )))
                        }
                        None => {
                            return Err(Error::Contract(format!(
                                "row too short: no column {column}"
                            )))
                        }
                    };
                    if let Ok(pos) = tokens.binary_search(token) {
                        margin = margin + self.weights[slot + pos];
                    }
                    slot += tokens.len();
                }
            }
        }
        Ok(margin)
    }

    pub fn predict_row(&self, values: &[FeatureValue<F>]) -> Result<(Label, F)> {
        let margin = self.margin(values)?;
        let label = if margin >= F::zero() {
            Label::Malicious
        } else {
            Label::Benign
        };
        let score = F::one() / (F::one() + (-margin).exp());
        Ok((label, score))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let dim: usize = self.blocks.iter().map(EncoderBlock::width).sum();
        if self.weights.len() != dim {
            return Err(Error::Integrity(format!(
                "{} weights for an encoded dimensionality of {dim}",
                self.weights.len()
            )));
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Integrity("non-finite svm parameters".into()));
        }
        for block in &self.blocks {
            match block {
                EncoderBlock::Continuous { std, .. } => {
                    let std = std.to_f64().unwrap_or(f64::NAN);
                    if std.is_nan() || std <= 0.0 {
                        return Err(Error::Integrity("non-positive standard deviation".into()));
                    }
                }
                EncoderBlock::Categorical { tokens, .. } => {
                    if tokens.is_empty() || !tokens.windows(2).all(|w| w[0] < w[1]) {
                        return Err(Error::Integrity("svm token block empty or unsorted".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn fit<F: Scalar>(
    view: &ColumnarView<F>,
    params: &SvmParams,
    seed: u64,
) -> Result<SvmModel<F>> {
    fit_traced(view, params, seed).map(|(model, _)| model)
}

/// Training plus the objective of the retained model recorded after
/// every epoch, used by the monotonicity tests. The retained model is
/// the best epoch-end iterate seen so far, so the trace never rises.
pub(crate) fn fit_traced<F: Scalar>(
    view: &ColumnarView<F>,
    params: &SvmParams,
    seed: u64,
) -> Result<(SvmModel<F>, Vec<F>)> {
    let n = view.n_rows;
    let n_malicious = view.labels.iter().filter(|&&m| m).count();
    if n_malicious == 0 || n_malicious == n {
        return Err(Error::Training(
            "svm training needs both classes present".into(),
        ));
    }

    let floor = F::from_f64_lossy(params.std_floor);
    let mut blocks = Vec::with_capacity(view.n_columns());
    for (column, values) in view.columns.iter().enumerate() {
        match values {
            ColumnValues::Continuous(xs) => {
                let count = F::from_count(n);
                let mut sum = F::zero();
                for &x in xs {
                    sum = sum + x;
                }
                let mean = sum / count;
                let mut ss = F::zero();
                for &x in xs {
                    let d = x - mean;
                    ss = ss + d * d;
                }
                let std = (ss / count).sqrt().max(floor);
                blocks.push(EncoderBlock::Continuous { column, mean, std });
            }
            ColumnValues::Categorical { vocab, .. } => {
                blocks.push(EncoderBlock::Categorical {
                    column,
                    tokens: vocab.clone(),
                });
            }
        }
    }

    let dim: usize = blocks.iter().map(EncoderBlock::width).sum();
    // Dense encoded matrix, row-major.
    let mut matrix = vec![F::zero(); n * dim];
    {
        let mut slot = 0usize;
        for block in &blocks {
            match block {
                EncoderBlock::Continuous { column, mean, std } => {
                    let ColumnValues::Continuous(xs) = &view.columns[*column] else {
                        unreachable!()
                    };
                    for (i, &x) in xs.iter().enumerate() {
                        matrix[i * dim + slot] = (x - *mean) / *std;
                    }
                    slot += 1;
                }
                EncoderBlock::Categorical { column, tokens } => {
                    let ColumnValues::Categorical { codes, .. } = &view.columns[*column] else {
                        unreachable!()
                    };
                    for (i, &code) in codes.iter().enumerate() {
                        matrix[i * dim + slot + code as usize] = F::one();
                    }
                    slot += tokens.len();
                }
            }
        }
    }
    let y: Vec<F> = view
        .labels
        .iter()
        .map(|&m| if m { F::one() } else { -F::one() })
        .collect();

    let lambda = F::from_f64_lossy(params.lambda);
    let mut w = vec![F::zero(); dim];
    let mut bias = F::zero();
    let mut t = 0u64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut objectives = Vec::with_capacity(params.epochs);
    let mut best: Option<(Vec<F>, F, F)> = None;

    for epoch in 0..params.epochs {
        order.shuffle(&mut stream(seed, Purpose::EpochOrder, epoch as u64));
        for &i in &order {
            t += 1;
            let eta = F::one() / (lambda * F::from_f64_lossy(t as f64));
            let row = &matrix[i * dim..(i + 1) * dim];
            let mut dot = bias;
            for (wj, xj) in w.iter().zip(row) {
                dot = dot + *wj * *xj;
            }
            let violated = y[i] * dot < F::one();
            let shrink = F::one() - eta * lambda;
            if violated {
                let step = eta * y[i];
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj = shrink * *wj + step * *xj;
                }
                bias = bias + step;
            } else {
                for wj in w.iter_mut() {
                    *wj = shrink * *wj;
                }
            }
        }
        let current = objective(&w, bias, &matrix, &y, dim, lambda);
        let improved = match &best {
            None => true,
            Some((_, _, obj)) => current < *obj,
        };
        if improved {
            best = Some((w.clone(), bias, current));
        }
        objectives.push(best.as_ref().map(|(_, _, obj)| *obj).unwrap());
    }

    let (weights, bias, _) = best.expect("epochs is validated to be at least one");
    Ok((
        SvmModel {
            weights,
            bias,
            blocks,
        },
        objectives,
    ))
}

fn objective<F: Scalar>(w: &[F], bias: F, matrix: &[F], y: &[F], dim: usize, lambda: F) -> F {
    let half = F::from_f64_lossy(0.5);
    let mut norm = F::zero();
    for &wj in w {
        norm = norm + wj * wj;
    }
    let mut hinge = F::zero();
    for (i, &yi) in y.iter().enumerate() {
        let row = &matrix[i * dim..(i + 1) * dim];
        let mut dot = bias;
        for (wj, xj) in w.iter().zip(row) {
            dot = dot + *wj * *xj;
        }
        hinge = hinge + (F::one() - yi * dot).max(F::zero());
    }
    lambda * half * norm + hinge / F::from_count(y.len())
}
