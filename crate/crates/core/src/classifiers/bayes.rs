//! Naive Bayes with mixed feature types: Gaussian likelihoods for
//! continuous columns, Laplace-smoothed token frequencies for
//! categorical ones. All products run as log-sums; classification is
//! the posterior argmax with ties toward Malicious.

use serde::{Deserialize, Serialize};

use super::columnar::{ColumnValues, ColumnarView};
use super::BayesParams;
use crate::data::{FeatureValue, Label};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gaussian log-density terms are clamped at this many squared
/// standard deviations so that a wildly out-of-range value saturates
/// instead of overflowing the log-space sums.
const MAX_SQUARED_Z: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianStats<F> {
    pub mean: F,
    /// Population variance, floored to the configured minimum.
    pub variance: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousLikelihood<F> {
    pub column: usize,
    pub benign: GaussianStats<F>,
    pub malicious: GaussianStats<F>,
}

/// Per-class Laplace-smoothed probabilities over the observed tokens
/// of one column plus one shared unseen bucket. Probabilities are
/// stored raw (not logged) so the distribution invariant (each class
/// sums to 1 over tokens + unseen) is visible in the serialized file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenTable<F> {
    pub column: usize,
    /// Sorted; aligned with the probability vectors.
    pub tokens: Vec<String>,
    pub benign: Vec<F>,
    pub malicious: Vec<F>,
    pub benign_unseen: F,
    pub malicious_unseen: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesModel<F> {
    /// (benign, malicious); class frequencies, or add-one smoothed
    /// frequencies when a class is absent from training.
    pub priors: [F; 2],
    pub continuous: Vec<ContinuousLikelihood<F>>,
    pub categorical: Vec<TokenTable<F>>,
}

impl<F: Scalar> BayesModel<F> {
    pub fn predict_row(&self, values: &[FeatureValue<F>]) -> Result<(Label, F)> {
        let [log_benign, log_malicious] = self.log_scores(values)?;
        let label = if log_malicious >= log_benign {
            Label::Malicious
        } else {
            Label::Benign
        };
        let score = logistic(log_malicious - log_benign);
        Ok((label, score))
    }

    /// Normalized posteriors (benign, malicious), each computed from
    /// its own side of the log-odds so their sum is a genuine check.
    pub fn posteriors(&self, values: &[FeatureValue<F>]) -> Result<[F; 2]> {
        let [log_benign, log_malicious] = self.log_scores(values)?;
        Ok([
            logistic(log_benign - log_malicious),
            logistic(log_malicious - log_benign),
        ])
    }

    fn log_scores(&self, values: &[FeatureValue<F>]) -> Result<[F; 2]> {
        let mut log_benign = self.priors[0].ln();
        let mut log_malicious = self.priors[1].ln();
        for feature in &self.continuous {
            let x = match values.get(feature.column) {
                Some(FeatureValue::Number(x)) => *x,
                Some(FeatureValue::Category(_)) => {
                    return Err(Error::Contract(format!(
                        "column {} holds a category but the model expects a number",
                        feature.column
                    )))
                }
                None => {
                    return Err(Error::Contract(format!(
                        "row too short: no column {}",
                        feature.column
                    )))
                }
            };
            log_benign = log_benign + gaussian_log_density(x, &feature.benign);
            log_malicious = log_malicious + gaussian_log_density(x, &feature.malicious);
        }
        for table in &self.categorical {
            let token = match values.get(table.column) {
                Some(FeatureValue::Category(t)) => t,
                Some(FeatureValue::Number(_)) => {
                    return Err(Error::Contract(format!(
                        "column {} holds a number but the model expects a category",
                        table.column
                    )))
                }
                None => {
                    return Err(Error::Contract(format!(
                        "row too short: no column {}",
                        table.column
                    )))
                }
            };
            let (p_benign, p_malicious) = match table.tokens.binary_search(token) {
                Ok(pos) => (table.benign[pos], table.malicious[pos]),
                Err(_) => (table.benign_unseen, table.malicious_unseen),
            };
            log_benign = log_benign + p_benign.ln();
            log_malicious = log_malicious + p_malicious.ln();
        }
        Ok([log_benign, log_malicious])
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let one = 1.0;
        let prior_sum = self.priors[0].to_f64().unwrap_or(f64::NAN)
            + self.priors[1].to_f64().unwrap_or(f64::NAN);
        if (prior_sum - one).abs() >= 1e-9 || prior_sum.is_nan() {
            return Err(Error::Integrity(format!("priors sum to {prior_sum}, not 1")));
        }
        for feature in &self.continuous {
            let v = feature.benign.variance.to_f64().unwrap_or(0.0);
            let w = feature.malicious.variance.to_f64().unwrap_or(0.0);
            if !(v > 0.0 && w > 0.0) {
                return Err(Error::Integrity(format!(
                    "column {} has a non-positive variance",
                    feature.column
                )));
            }
        }
        for table in &self.categorical {
            if table.benign.len() != table.tokens.len() || table.malicious.len() != table.tokens.len() {
                return Err(Error::Integrity(format!(
                    "column {} token/probability lengths disagree",
                    table.column
                )));
            }
            if !table.tokens.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Integrity(format!(
                    "column {} tokens not strictly sorted",
                    table.column
                )));
            }
            for (probs, unseen) in [
                (&table.benign, table.benign_unseen),
                (&table.malicious, table.malicious_unseen),
            ] {
                let mut sum = unseen.to_f64().unwrap_or(f64::NAN);
                for p in probs {
                    let p = p.to_f64().unwrap_or(f64::NAN);
                    if !(p > 0.0 && p <= 1.0) {
                        return Err(Error::Integrity(format!(
                            "column {} has a probability outside (0,1]",
                            table.column
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() >= 1e-9 || sum.is_nan() {
                    return Err(Error::Integrity(format!(
                        "column {} probabilities sum to {sum}, not 1",
                        table.column
                    )));
                }
            }
        }
        Ok(())
    }
}

fn gaussian_log_density<F: Scalar>(x: F, stats: &GaussianStats<F>) -> F {
    let tau = F::from_f64_lossy(std::f64::consts::TAU);
    let diff = x - stats.mean;
    let z2 = (diff * diff / stats.variance).min(F::from_f64_lossy(MAX_SQUARED_Z));
    let half = F::from_f64_lossy(0.5);
    -half * (tau * stats.variance).ln() - half * z2
}

/// 1 / (1 + e^-t), evaluated so overflow saturates to 0 or 1.
fn logistic<F: Scalar>(t: F) -> F {
    F::one() / (F::one() + (-t).exp())
}

pub(crate) fn fit<F: Scalar>(view: &ColumnarView<F>, params: &BayesParams) -> Result<BayesModel<F>> {
    let n = view.n_rows;
    let n_malicious = view.labels.iter().filter(|&&m| m).count();
    let n_benign = n - n_malicious;

    let priors = if n_benign == 0 || n_malicious == 0 {
        // Add-one smoothing keeps the absent class's prior positive.
        let denom = F::from_count(n + 2);
        [
            F::from_count(n_benign + 1) / denom,
            F::from_count(n_malicious + 1) / denom,
        ]
    } else {
        let denom = F::from_count(n);
        [
            F::from_count(n_benign) / denom,
            F::from_count(n_malicious) / denom,
        ]
    };

    let floor = F::from_f64_lossy(params.variance_floor);
    let alpha = F::from_f64_lossy(params.alpha);
    let mut continuous = Vec::new();
    let mut categorical = Vec::new();

    for (column, values) in view.columns.iter().enumerate() {
        match values {
            ColumnValues::Continuous(xs) => {
                let benign = gaussian_fit(xs, &view.labels, false, floor);
                let malicious = gaussian_fit(xs, &view.labels, true, floor);
                continuous.push(ContinuousLikelihood { column, benign, malicious });
            }
            ColumnValues::Categorical { codes, vocab } => {
                let mut benign_counts = vec![0usize; vocab.len()];
                let mut malicious_counts = vec![0usize; vocab.len()];
                for (i, &code) in codes.iter().enumerate() {
                    if view.labels[i] {
                        malicious_counts[code as usize] += 1;
                    } else {
                        benign_counts[code as usize] += 1;
                    }
                }
                let smooth = |counts: &[usize], class_n: usize| -> (Vec<F>, F) {
                    // Vocabulary size includes the unseen bucket.
                    let denom = F::from_count(class_n)
                        + alpha * F::from_count(vocab.len() + 1);
                    let probs = counts
                        .iter()
                        .map(|&c| (F::from_count(c) + alpha) / denom)
                        .collect();
                    (probs, alpha / denom)
                };
                let (benign, benign_unseen) = smooth(&benign_counts, n_benign);
                let (malicious, malicious_unseen) = smooth(&malicious_counts, n_malicious);
                categorical.push(TokenTable {
                    column,
                    tokens: vocab.clone(),
                    benign,
                    malicious,
                    benign_unseen,
                    malicious_unseen,
                });
            }
        }
    }

    Ok(BayesModel { priors, continuous, categorical })
}

/// Two-pass mean and population variance over one class's rows. An
/// absent class gets mean 0 and the floor variance.
fn gaussian_fit<F: Scalar>(xs: &[F], labels: &[bool], malicious: bool, floor: F) -> GaussianStats<F> {
    let mut count = 0usize;
    let mut sum = F::zero();
    for (i, &x) in xs.iter().enumerate() {
        if labels[i] == malicious {
            count += 1;
            sum = sum + x;
        }
    }
    if count == 0 {
        return GaussianStats { mean: F::zero(), variance: floor };
    }
    let mean = sum / F::from_count(count);
    let mut ss = F::zero();
    for (i, &x) in xs.iter().enumerate() {
        if labels[i] == malicious {
            let d = x - mean;
            ss = ss + d * d;
        }
    }
    let variance = (ss / F::from_count(count)).max(floor);
    GaussianStats { mean, variance }
}
