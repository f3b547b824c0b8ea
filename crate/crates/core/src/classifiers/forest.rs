//! Random forest: bagged decision trees over bootstrap samples, each
//! split drawn from a random column subset, combined by majority vote.
//!
//! Every tree gets two private RNG streams derived from (seed, tree
//! index), one for its bootstrap sample and one for its per-node
//! column subsets, so the forest is identical no matter how many
//! worker threads train it.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::columnar::ColumnarView;
use super::tree::{fit_rows, ScaledEntropy, TreeModel};
use super::ForestParams;
use crate::data::{FeatureValue, Label};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel<F> {
    pub trees: Vec<TreeModel<F>>,
    pub tree_count: usize,
    /// Columns considered at each split during training.
    pub feature_subsample: usize,
}

impl<F: Scalar> ForestModel<F> {
    pub fn predict_row(&self, values: &[FeatureValue<F>]) -> Result<(Label, F)> {
        let mut malicious_votes = 0usize;
        for tree in &self.trees {
            if tree.predict_row(values)?.0.is_malicious() {
                malicious_votes += 1;
            }
        }
        let total = self.trees.len();
        let label = if 2 * malicious_votes >= total {
            Label::Malicious
        } else {
            Label::Benign
        };
        let score = F::from_count(malicious_votes) / F::from_count(total);
        Ok((label, score))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::Integrity("forest has no trees".into()));
        }
        if self.tree_count != self.trees.len() {
            return Err(Error::Integrity(format!(
                "forest says tree_count {} but holds {} trees",
                self.tree_count,
                self.trees.len()
            )));
        }
        for tree in &self.trees {
            tree.validate()?;
        }
        Ok(())
    }
}

/// ceil(sqrt(columns)), the default split-candidate count.
pub fn default_feature_subsample(n_columns: usize) -> usize {
    ((n_columns as f64).sqrt().ceil() as usize).clamp(1, n_columns.max(1))
}

pub(crate) fn fit<F: Scalar>(
    view: &ColumnarView<F>,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel<F>> {
    let n = view.n_rows;
    let n_cols = view.n_columns();
    let subsample = params
        .feature_subsample
        .unwrap_or_else(|| default_feature_subsample(n_cols))
        .min(n_cols);
    let table = ScaledEntropy::new(n);

    let trees: Result<Vec<TreeModel<F>>> = (0..params.tree_count)
        .into_par_iter()
        .map(|i| {
            let rows: Vec<usize> = if params.bootstrap {
                let mut rng = stream(seed, Purpose::BootstrapTree, i as u64);
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let sampling = if subsample < n_cols {
                Some((stream(seed, Purpose::FeatureSubsets, i as u64), subsample))
            } else {
                None
            };
            fit_rows(view, &params.tree, &table, rows, sampling)
        })
        .collect();

    Ok(ForestModel {
        trees: trees?,
        tree_count: params.tree_count,
        feature_subsample: subsample,
    })
}
