//! Confusion-matrix metrics, ROC/AUC, and k-fold cross-validation.
//!
//! A rate whose denominator is zero (no malicious rows in the test
//! set, say) is reported as `None` rather than 0.0, and excluded from
//! cross-validation means with a logged warning. AUC follows the same
//! rule when the test rows are single-class, since the rank statistic
//! divides by `malicious * benign`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierSpec, TrainedModel};
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// The five headline rates. Accuracy is always defined for a non-empty
/// matrix; the class-conditional rates are `None` when their
/// denominator class is absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet<F> {
    pub acc: F,
    pub tpr: Option<F>,
    pub fpr: Option<F>,
    pub tnr: Option<F>,
    pub fnr: Option<F>,
}

/// Tally one model's predictions against the labels of `test`.
/// Malicious is the positive class: tp counts malicious rows predicted
/// malicious, fp counts benign rows predicted malicious.
pub fn confusion<F: Scalar>(
    model: &TrainedModel<F>,
    test: &Dataset<F>,
) -> Result<ConfusionMatrix> {
    if !test.labeled() {
        return Err(Error::State(
            "confusion counts need a labeled test set".into(),
        ));
    }
    if test.is_empty() {
        return Err(Error::Contract("confusion counts need at least one row".into()));
    }
    let predicted = model.predict_dataset(test)?;
    let mut c = ConfusionMatrix { tp: 0, tn: 0, fp: 0, fn_: 0 };
    for (row, &guess) in test.rows().iter().zip(&predicted) {
        match (row.label.expect("dataset checked labeled"), guess) {
            (Label::Malicious, Label::Malicious) => c.tp += 1,
            (Label::Benign, Label::Benign) => c.tn += 1,
            (Label::Benign, Label::Malicious) => c.fp += 1,
            (Label::Malicious, Label::Benign) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// acc = (tp+tn)/total, tpr = tp/(tp+fn), fpr = fp/(fp+tn),
/// tnr = tn/(tn+fp), fnr = fn/(fn+tp).
pub fn metrics<F: Scalar>(c: &ConfusionMatrix) -> Result<MetricSet<F>> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Contract("metrics of an empty confusion matrix".into()));
    }
    let rate = |num: usize, den: usize| -> Option<F> {
        (den > 0).then(|| F::from_count(num) / F::from_count(den))
    };
    Ok(MetricSet {
        acc: F::from_count(c.tp + c.tn) / F::from_count(total),
        tpr: rate(c.tp, c.tp + c.fn_),
        fpr: rate(c.fp, c.fp + c.tn),
        tnr: rate(c.tn, c.tn + c.fp),
        fnr: rate(c.fn_, c.fn_ + c.tp),
    })
}

/// AUC as the Mann-Whitney rank statistic: the probability that a
/// uniformly random malicious row outscores a uniformly random benign
/// row, ties counted half. Also returns the ROC curve swept at every
/// distinct score, from (0,0) to (1,1); the trapezoidal area under
/// those points equals the rank statistic.
pub fn roc_auc<F: Scalar>(scored: &[(F, Label)]) -> Result<(F, Vec<(F, F)>)> {
    let n = scored.len();
    let malicious = scored.iter().filter(|(_, l)| *l == Label::Malicious).count();
    let benign = n - malicious;
    if malicious == 0 || benign == 0 {
        return Err(Error::Contract(
            "roc needs at least one row of each class".into(),
        ));
    }
    if scored.iter().any(|(s, _)| !s.is_finite()) {
        return Err(Error::Contract("roc scores must be finite".into()));
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| {
        scored[a].0.partial_cmp(&scored[b].0).expect("scores checked finite")
    });

    // Rank sums can exceed f32's exact-integer range, so accumulate in
    // f64 regardless of F.
    let mut rank_sum = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && scored[idx[j]].0 == scored[idx[i]].0 {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &r in &idx[i..j] {
            if scored[r].1 == Label::Malicious {
                rank_sum += midrank;
            }
        }
        i = j;
    }
    let m = malicious as f64;
    let u = rank_sum - m * (m + 1.0) / 2.0;
    let auc = u / (m * benign as f64);

    let mut points = Vec::with_capacity(n + 1);
    points.push((F::zero(), F::zero()));
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut hi = n;
    while hi > 0 {
        let mut lo = hi - 1;
        while lo > 0 && scored[idx[lo - 1]].0 == scored[idx[hi - 1]].0 {
            lo -= 1;
        }
        for &r in &idx[lo..hi] {
            if scored[r].1 == Label::Malicious {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push((
            F::from_count(fp) / F::from_count(benign),
            F::from_count(tp) / F::from_count(malicious),
        ));
        hi = lo;
    }
    Ok((F::from_f64_lossy(auc), points))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport<F> {
    pub confusion: ConfusionMatrix,
    pub acc: F,
    pub tpr: Option<F>,
    pub fpr: Option<F>,
    pub tnr: Option<F>,
    pub fnr: Option<F>,
    /// `None` when the test rows are single-class; `roc_points` is
    /// empty in that case.
    pub auc: Option<F>,
    pub roc_points: Vec<(F, F)>,
}

/// Full scorecard of one model on one labeled test set.
pub fn evaluate<F: Scalar>(
    model: &TrainedModel<F>,
    test: &Dataset<F>,
) -> Result<EvaluationReport<F>> {
    let c = confusion(model, test)?;
    let m = metrics::<F>(&c)?;
    let (benign, malicious) = test.class_counts();
    let (auc, roc_points) = if benign > 0 && malicious > 0 {
        let scores = model.score_dataset(test)?;
        let scored: Vec<(F, Label)> = scores
            .into_iter()
            .zip(test.rows())
            .map(|(s, row)| (s, row.label.expect("dataset checked labeled")))
            .collect();
        let (auc, points) = roc_auc(&scored)?;
        (Some(auc), points)
    } else {
        (None, Vec::new())
    };
    Ok(EvaluationReport {
        confusion: c,
        acc: m.acc,
        tpr: m.tpr,
        fpr: m.fpr,
        tnr: m.tnr,
        fnr: m.fnr,
        auc,
        roc_points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    /// Deal folds per class so every fold mirrors the overall class
    /// balance. `false` restores plain shuffled k-fold.
    pub stratified: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { k: 10, seed: 0, stratified: true }
    }
}

/// Per-metric arithmetic means across folds. A `None` means the metric
/// was undefined in every fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricMeans<F> {
    pub acc: F,
    pub tpr: Option<F>,
    pub fpr: Option<F>,
    pub tnr: Option<F>,
    pub fnr: Option<F>,
    pub auc: Option<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult<F> {
    pub per_fold: Vec<EvaluationReport<F>>,
    pub mean: MetricMeans<F>,
}

/// Test-fold row indices, each fold sorted ascending. Rows are dealt
/// from a single shuffled order (class-grouped when stratified) with
/// position j going to fold j mod k, so fold sizes differ by at most
/// one, both overall and within each class.
pub(crate) fn assign_folds(
    malicious: &[bool],
    k: usize,
    seed: u64,
    stratified: bool,
) -> Vec<Vec<usize>> {
    let n = malicious.len();
    let order: Vec<usize> = if stratified {
        let mut benign_pool: Vec<usize> = (0..n).filter(|&i| !malicious[i]).collect();
        let mut malicious_pool: Vec<usize> = (0..n).filter(|&i| malicious[i]).collect();
        benign_pool.shuffle(&mut stream(seed, Purpose::FoldAssignment, 1));
        malicious_pool.shuffle(&mut stream(seed, Purpose::FoldAssignment, 2));
        benign_pool.into_iter().chain(malicious_pool).collect()
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut stream(seed, Purpose::FoldAssignment, 0));
        all
    };
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (j, row) in order.into_iter().enumerate() {
        folds[j % k].push(row);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    folds
}

fn fold_error(fold: usize, e: Error) -> Error {
    match e {
        Error::Training(m) => Error::Training(format!("fold {fold}: {m}")),
        other => Error::Training(format!("fold {fold}: {other}")),
    }
}

fn option_mean<F: Scalar>(values: &[Option<F>], metric: &str, k: usize) -> Option<F> {
    let defined: Vec<F> = values.iter().copied().flatten().collect();
    if defined.is_empty() {
        log::warn!("{metric} undefined in every one of {k} folds; mean reported undefined");
        return None;
    }
    if defined.len() < k {
        log::warn!(
            "{metric} undefined in {} of {k} folds; mean taken over defined folds only",
            k - defined.len()
        );
    }
    let sum = defined.iter().fold(F::zero(), |a, &b| a + b);
    Some(sum / F::from_count(defined.len()))
}

/// Train and score `spec` k times, each fold serving once as the test
/// set. Fold assignment is a pure function of (labels, cfg); folds run
/// in order, and a failing fold reports its index.
pub fn cross_validate<F: Scalar>(
    data: &Dataset<F>,
    spec: &ClassifierSpec,
    cfg: &CvConfig,
) -> Result<CvResult<F>> {
    if !data.labeled() {
        return Err(Error::State("cross-validation needs a labeled dataset".into()));
    }
    if cfg.k < 2 {
        return Err(Error::Config("cross-validation needs k >= 2".into()));
    }
    if cfg.k > data.len() {
        return Err(Error::Config(format!(
            "k = {} exceeds the {} available rows",
            cfg.k,
            data.len()
        )));
    }
    spec.validate()?;

    let malicious: Vec<bool> = data
        .rows()
        .iter()
        .map(|r| r.label == Some(Label::Malicious))
        .collect();
    let folds = assign_folds(&malicious, cfg.k, cfg.seed, cfg.stratified);

    let n = data.len();
    let mut per_fold = Vec::with_capacity(cfg.k);
    let mut in_test = vec![false; n];
    for (i, test_idx) in folds.iter().enumerate() {
        in_test.iter_mut().for_each(|b| *b = false);
        for &r in test_idx {
            in_test[r] = true;
        }
        let train_idx: Vec<usize> = (0..n).filter(|&r| !in_test[r]).collect();
        let train_ds = data.select(&train_idx);
        let test_ds = data.select(test_idx);
        let model = train(&train_ds, spec).map_err(|e| fold_error(i, e))?;
        let report = evaluate(&model, &test_ds).map_err(|e| fold_error(i, e))?;
        per_fold.push(report);
    }

    let k = cfg.k;
    let acc_sum = per_fold.iter().fold(F::zero(), |a, r| a + r.acc);
    let collect = |f: fn(&EvaluationReport<F>) -> Option<F>| -> Vec<Option<F>> {
        per_fold.iter().map(f).collect()
    };
    let mean = MetricMeans {
        acc: acc_sum / F::from_count(k),
        tpr: option_mean(&collect(|r| r.tpr), "tpr", k),
        fpr: option_mean(&collect(|r| r.fpr), "fpr", k),
        tnr: option_mean(&collect(|r| r.tnr), "tnr", k),
        fnr: option_mean(&collect(|r| r.fnr), "fnr", k),
        auc: option_mean(&collect(|r| r.auc), "auc", k),
    };
    Ok(CvResult { per_fold, mean })
}

/// Index of the winning row among (mean accuracy, mean AUC) pairs:
/// highest accuracy, ties broken by higher AUC (any defined AUC beats
/// an undefined one), remaining ties by earliest position.
pub(crate) fn pick_winner<F: Scalar>(rows: &[(F, Option<F>)]) -> usize {
    let auc_beats = |a: &Option<F>, b: &Option<F>| match (a, b) {
        (Some(x), Some(y)) => x > y,
        (Some(_), None) => true,
        _ => false,
    };
    let mut best = 0;
    for (i, row) in rows.iter().enumerate().skip(1) {
        if row.0 > rows[best].0 || (row.0 == rows[best].0 && auc_beats(&row.1, &rows[best].1)) {
            best = i;
        }
    }
    best
}

/// Cross-validate every roster entry and pick the winner by mean
/// accuracy. The full per-spec table comes back for reporting.
#[allow(clippy::type_complexity)]
pub fn select_best<F: Scalar>(
    roster: &[ClassifierSpec],
    data: &Dataset<F>,
    cfg: &CvConfig,
) -> Result<(ClassifierSpec, Vec<(ClassifierSpec, CvResult<F>)>)> {
    if roster.is_empty() {
        return Err(Error::Config("classifier roster is empty".into()));
    }
    let mut table = Vec::with_capacity(roster.len());
    for spec in roster {
        let result = cross_validate(data, spec, cfg).map_err(|e| Error::Selection {
            spec: format!("{} (seed {})", spec.family(), spec.seed),
            source: Box::new(e),
        })?;
        table.push((spec.clone(), result));
    }
    let rows: Vec<(F, Option<F>)> = table
        .iter()
        .map(|(_, r)| (r.mean.acc, r.mean.auc))
        .collect();
    let winner = table[pick_winner(&rows)].0.clone();
    Ok((winner, table))
}
