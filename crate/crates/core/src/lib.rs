//! Teacher/student mimic-learning pipeline for network flow
//! classification.
//!
//! A teacher model is trained on a sensitive labeled dataset, used to
//! annotate a public unlabeled dataset, and a student model trained on
//! those annotations is released only if it scores close enough to the
//! teacher on held-out test data. The crate provides the dataset
//! handling, four classifier families (decision tree, random forest,
//! naive Bayes, linear SVM), evaluation and cross-validation, model
//! serialization, and the end-to-end pipeline.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`);
//! concrete aliases like [`Dataset64`] pick the precision at the crate
//! root.

pub mod classifiers;
pub mod data;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod store;
pub mod synth;

pub use classifiers::{
    default_roster, train, train_decision_tree, train_naive_bayes, train_random_forest, train_svm,
    ClassifierSpec, Family, FamilyParams, ModelBody, ModelMetadata, ModelRole, TrainedModel,
};
pub use classifiers::tree::{entropy, information_gain};
pub use eval::{
    confusion, cross_validate, evaluate, metrics, roc_auc, select_best, ConfusionMatrix, CvConfig,
    CvResult, EvaluationReport, MetricMeans, MetricSet,
};
pub use data::{
    class_balance, load_dataset, load_labeled, load_unlabeled, normalize_label, split_dataset,
    write_dataset, Column, ColumnKind, CsvReadOptions, Dataset, FeatureValue, FeatureVector, Label,
    LabelMode, Schema, SplitSpec,
};
pub use error::{Error, Result, Stage};
pub use pipeline::{
    annotate, evaluate_models, run_pipeline, student_model_generation, teacher_model_generation,
    AnnotationSummary, PipelineConfig, PipelineReport,
};
pub use scalar::Scalar;
pub use store::{load_model, load_report, save_model, save_report, FORMAT_VERSION};

pub type Dataset32 = Dataset<f32>;
pub type Dataset64 = Dataset<f64>;
pub type FeatureVector32 = FeatureVector<f32>;
pub type FeatureVector64 = FeatureVector<f64>;
