//! The four classifier families behind one train/predict/score
//! interface: decision tree (information gain), random forest (bagging
//! plus majority vote), naive Bayes (log-space posterior
//! maximization), and a linear soft-margin SVM.
//!
//! Every `train_*` function is a pure function of `(data, spec)`; the
//! seed lives inside [`ClassifierSpec`], so repeated runs produce
//! byte-identical models after serialization. Ties everywhere resolve
//! toward `Malicious`: an intrusion detector should fail toward
//! detection.

pub mod bayes;
mod columnar;
pub mod forest;
pub mod svm;
pub mod tree;

pub(crate) use columnar::ColumnarView;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::data::{Dataset, FeatureVector, Label, Schema};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use bayes::BayesModel;
pub use forest::ForestModel;
pub use svm::SvmModel;
pub use tree::TreeModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    DecisionTree,
    RandomForest,
    NaiveBayes,
    LinearSvm,
}

impl Family {
    /// Short token used on the command line and in report tables.
    pub fn short_name(self) -> &'static str {
        match self {
            Family::DecisionTree => "dt",
            Family::RandomForest => "rf",
            Family::NaiveBayes => "nb",
            Family::LinearSvm => "svm",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dt" => Ok(Family::DecisionTree),
            "rf" => Ok(Family::RandomForest),
            "nb" => Ok(Family::NaiveBayes),
            "svm" => Ok(Family::LinearSvm),
            other => Err(Error::Config(format!(
                "unknown classifier family `{other}` (expected dt|rf|nb|svm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// A split must improve information gain by more than this to be taken.
    pub ig_epsilon: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 30,
            min_samples_split: 2,
            min_samples_leaf: 1,
            ig_epsilon: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub tree_count: usize,
    pub tree: TreeParams,
    /// Columns considered per split. `None` means ceil(sqrt(feature count)).
    pub feature_subsample: Option<usize>,
    /// Debug switch: `false` trains every tree on the full dataset.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            tree_count: 100,
            tree: TreeParams::default(),
            feature_subsample: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BayesParams {
    /// Laplace smoothing strength for categorical likelihoods.
    pub alpha: f64,
    pub variance_floor: f64,
}

impl Default for BayesParams {
    fn default() -> Self {
        BayesParams {
            alpha: 1.0,
            variance_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// L2 regularization strength.
    pub lambda: f64,
    pub epochs: usize,
    /// Standard deviations below this are clamped before standardizing.
    pub std_floor: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-4,
            epochs: 50,
            std_floor: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum FamilyParams {
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    NaiveBayes(BayesParams),
    LinearSvm(SvmParams),
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::DecisionTree(_) => Family::DecisionTree,
            FamilyParams::RandomForest(_) => Family::RandomForest,
            FamilyParams::NaiveBayes(_) => Family::NaiveBayes,
            FamilyParams::LinearSvm(_) => Family::LinearSvm,
        }
    }
}

/// Which classifier to train, how, and with what seed. Hyperparameters
/// are plain `f64`/`usize` regardless of the model's scalar type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    #[serde(flatten)]
    pub params: FamilyParams,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn default_for(family: Family, seed: u64) -> Self {
        let params = match family {
            Family::DecisionTree => FamilyParams::DecisionTree(TreeParams::default()),
            Family::RandomForest => FamilyParams::RandomForest(ForestParams::default()),
            Family::NaiveBayes => FamilyParams::NaiveBayes(BayesParams::default()),
            Family::LinearSvm => FamilyParams::LinearSvm(SvmParams::default()),
        };
        ClassifierSpec { params, seed }
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match &self.params {
            FamilyParams::DecisionTree(p) => validate_tree(p),
            FamilyParams::RandomForest(p) => {
                if p.tree_count < 1 {
                    return bad("random forest needs tree_count >= 1".into());
                }
                if p.feature_subsample == Some(0) {
                    return bad("feature_subsample must be >= 1".into());
                }
                validate_tree(&p.tree)
            }
            FamilyParams::NaiveBayes(p) => {
                if p.alpha.is_nan() || p.alpha <= 0.0 {
                    return bad("naive Bayes needs alpha > 0".into());
                }
                if p.variance_floor.is_nan() || p.variance_floor <= 0.0 {
                    return bad("naive Bayes needs variance_floor > 0".into());
                }
                Ok(())
            }
            FamilyParams::LinearSvm(p) => {
                if p.lambda.is_nan() || p.lambda <= 0.0 {
                    return bad("svm needs lambda > 0".into());
                }
                if p.epochs < 1 {
                    return bad("svm needs epochs >= 1".into());
                }
                if p.std_floor.is_nan() || p.std_floor <= 0.0 {
                    return bad("svm needs std_floor > 0".into());
                }
                Ok(())
            }
        }
    }
}

fn validate_tree(p: &TreeParams) -> Result<()> {
    if p.max_depth < 1 {
        return Err(Error::Config("tree needs max_depth >= 1".into()));
    }
    if p.min_samples_split < 2 {
        return Err(Error::Config("tree needs min_samples_split >= 2".into()));
    }
    if p.min_samples_leaf < 1 {
        return Err(Error::Config("tree needs min_samples_leaf >= 1".into()));
    }
    if p.ig_epsilon < 0.0 {
        return Err(Error::Config("tree needs ig_epsilon >= 0".into()));
    }
    Ok(())
}

/// The default four-family roster, in the comparison-table order used
/// throughout: dt, rf, svm, nb.
pub fn default_roster(seed: u64) -> Vec<ClassifierSpec> {
    [
        Family::DecisionTree,
        Family::RandomForest,
        Family::LinearSvm,
        Family::NaiveBayes,
    ]
    .into_iter()
    .map(|f| ClassifierSpec::default_for(f, seed))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelRole {
    Teacher,
    Student,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub family: Family,
    pub spec: ClassifierSpec,
    /// SHA-256 of the training schema's canonical text; prediction
    /// refuses datasets with a different fingerprint.
    pub schema_fingerprint: String,
    pub training_rows: usize,
    pub role: Option<ModelRole>,
    /// RFC 3339 stamp, set by the command-line layer; `train_*` leaves
    /// it empty so training stays a pure function of (data, spec).
    pub created_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelBody<F> {
    DecisionTree(TreeModel<F>),
    RandomForest(ForestModel<F>),
    NaiveBayes(BayesModel<F>),
    LinearSvm(SvmModel<F>),
}

impl<F: Scalar> ModelBody<F> {
    pub(crate) fn family(&self) -> Family {
        match self {
            ModelBody::DecisionTree(_) => Family::DecisionTree,
            ModelBody::RandomForest(_) => Family::RandomForest,
            ModelBody::NaiveBayes(_) => Family::NaiveBayes,
            ModelBody::LinearSvm(_) => Family::LinearSvm,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            ModelBody::DecisionTree(m) => m.validate(),
            ModelBody::RandomForest(m) => m.validate(),
            ModelBody::NaiveBayes(m) => m.validate(),
            ModelBody::LinearSvm(m) => m.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel<F> {
    pub metadata: ModelMetadata,
    pub body: ModelBody<F>,
}

impl<F: Scalar> TrainedModel<F> {
    /// Hard label for one row. Kind or arity mismatches surface as
    /// contract errors; whole-dataset calls also check the schema
    /// fingerprint.
    pub fn predict(&self, row: &FeatureVector<F>) -> Result<Label> {
        match &self.body {
            ModelBody::DecisionTree(m) => Ok(m.predict_row(&row.values)?.0),
            ModelBody::RandomForest(m) => Ok(m.predict_row(&row.values)?.0),
            ModelBody::NaiveBayes(m) => Ok(m.predict_row(&row.values)?.0),
            ModelBody::LinearSvm(m) => Ok(m.predict_row(&row.values)?.0),
        }
    }

    /// Malicious score in [0, 1]. Decision trees report the leaf's
    /// malicious fraction, forests the malicious vote fraction, naive
    /// Bayes the posterior P(Malicious|x), and the SVM a logistic
    /// squashing of its margin. For trees and forests `score >= 0.5`
    /// coincides with a Malicious prediction; naive Bayes and the SVM
    /// satisfy the same by construction.
    pub fn score(&self, row: &FeatureVector<F>) -> Result<F> {
        match &self.body {
            ModelBody::DecisionTree(m) => Ok(m.predict_row(&row.values)?.1),
            ModelBody::RandomForest(m) => Ok(m.predict_row(&row.values)?.1),
            ModelBody::NaiveBayes(m) => Ok(m.predict_row(&row.values)?.1),
            ModelBody::LinearSvm(m) => Ok(m.predict_row(&row.values)?.1),
        }
    }

    pub fn check_schema(&self, schema: &Schema) -> Result<()> {
        let found = schema.fingerprint();
        if found != self.metadata.schema_fingerprint {
            return Err(Error::Contract(format!(
                "schema fingerprint mismatch: model was trained against {}, data has {found}",
                self.metadata.schema_fingerprint
            )));
        }
        Ok(())
    }

    pub fn predict_dataset(&self, ds: &Dataset<F>) -> Result<Vec<Label>> {
        self.check_schema(ds.schema())?;
        self.map_rows(ds, |m, row| m.predict(row))
    }

    pub fn score_dataset(&self, ds: &Dataset<F>) -> Result<Vec<F>> {
        self.check_schema(ds.schema())?;
        self.map_rows(ds, |m, row| m.score(row))
    }

    fn map_rows<T: Send>(
        &self,
        ds: &Dataset<F>,
        f: impl Fn(&Self, &FeatureVector<F>) -> Result<T> + Sync,
    ) -> Result<Vec<T>> {
        use rayon::prelude::*;
        if ds.len() >= 4096 {
            ds.rows().par_iter().map(|row| f(self, row)).collect()
        } else {
            ds.rows().iter().map(|row| f(self, row)).collect()
        }
    }
}

/// Train whatever family the spec names. The concrete `train_*`
/// functions below are the same thing with a fixed family.
pub fn train<F: Scalar>(data: &Dataset<F>, spec: &ClassifierSpec) -> Result<TrainedModel<F>> {
    spec.validate()?;
    if !data.labeled() {
        return Err(Error::Training("training requires a labeled dataset".into()));
    }
    if data.is_empty() {
        return Err(Error::Training("training requires a non-empty dataset".into()));
    }
    let view = ColumnarView::from_dataset(data);
    let body = match &spec.params {
        FamilyParams::DecisionTree(p) => ModelBody::DecisionTree(tree::fit(&view, p)?),
        FamilyParams::RandomForest(p) => ModelBody::RandomForest(forest::fit(&view, p, spec.seed)?),
        FamilyParams::NaiveBayes(p) => ModelBody::NaiveBayes(bayes::fit(&view, p)?),
        FamilyParams::LinearSvm(p) => ModelBody::LinearSvm(svm::fit(&view, p, spec.seed)?),
    };
    Ok(TrainedModel {
        metadata: ModelMetadata {
            family: spec.family(),
            spec: spec.clone(),
            schema_fingerprint: data.schema().fingerprint(),
            training_rows: data.len(),
            role: None,
            created_at: None,
        },
        body,
    })
}

fn train_family<F: Scalar>(
    data: &Dataset<F>,
    spec: &ClassifierSpec,
    family: Family,
) -> Result<TrainedModel<F>> {
    if spec.family() != family {
        return Err(Error::Config(format!(
            "spec names family {} but {} training was requested",
            spec.family(),
            family
        )));
    }
    train(data, spec)
}

pub fn train_decision_tree<F: Scalar>(
    data: &Dataset<F>,
    spec: &ClassifierSpec,
) -> Result<TrainedModel<F>> {
    train_family(data, spec, Family::DecisionTree)
}

pub fn train_random_forest<F: Scalar>(
    data: &Dataset<F>,
    spec: &ClassifierSpec,
) -> Result<TrainedModel<F>> {
    train_family(data, spec, Family::RandomForest)
}

pub fn train_naive_bayes<F: Scalar>(
    data: &Dataset<F>,
    spec: &ClassifierSpec,
) -> Result<TrainedModel<F>> {
    train_family(data, spec, Family::NaiveBayes)
}

pub fn train_svm<F: Scalar>(data: &Dataset<F>, spec: &ClassifierSpec) -> Result<TrainedModel<F>> {
    train_family(data, spec, Family::LinearSvm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_tokens_round_trip() {
        for family in [
            Family::DecisionTree,
            Family::RandomForest,
            Family::NaiveBayes,
            Family::LinearSvm,
        ] {
            let parsed: Family = family.short_name().parse().unwrap();
            assert_eq!(parsed, family);
        }
        assert!("boosted".parse::<Family>().is_err());
    }

    #[test]
    fn default_roster_order_is_the_table_order() {
        let roster = default_roster(7);
        let families: Vec<_> = roster.iter().map(|s| s.family()).collect();
        assert_eq!(
            families,
            vec![
                Family::DecisionTree,
                Family::RandomForest,
                Family::LinearSvm,
                Family::NaiveBayes
            ]
        );
        assert!(roster.iter().all(|s| s.seed == 7));
    }

    #[test]
    fn spec_validation_rejects_bad_hyperparams() {
        let mut spec = ClassifierSpec::default_for(Family::RandomForest, 0);
        if let FamilyParams::RandomForest(p) = &mut spec.params {
            p.tree_count = 0;
        }
        assert!(spec.validate().is_err());

        let mut spec = ClassifierSpec::default_for(Family::LinearSvm, 0);
        if let FamilyParams::LinearSvm(p) = &mut spec.params {
            p.lambda = 0.0;
        }
        assert!(spec.validate().is_err());

        let mut spec = ClassifierSpec::default_for(Family::NaiveBayes, 0);
        if let FamilyParams::NaiveBayes(p) = &mut spec.params {
            p.alpha = -1.0;
        }
        assert!(spec.validate().is_err());

        let mut spec = ClassifierSpec::default_for(Family::DecisionTree, 0);
        if let FamilyParams::DecisionTree(p) = &mut spec.params {
            p.min_samples_split = 1;
        }
        assert!(spec.validate().is_err());
    }

    #[test]
    fn spec_json_shape_is_tagged_by_family() {
        let spec = ClassifierSpec::default_for(Family::DecisionTree, 3);
        let json = serde_json::to_value(&spec).unwrap();
        assert_eq!(json["family"], "decision_tree");
        assert_eq!(json["seed"], 3);
        assert_eq!(json["params"]["max_depth"], 30);
        let back: ClassifierSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);
    }
}
