//! The end-to-end teacher/student flow: pick and train a teacher on
//! the sensitive labeled partition, have it annotate the public
//! unlabeled partition, pick and train a student on those annotations,
//! then decide whether the student may be released.
//!
//! The release gate is the relative accuracy gap
//! `|acc_teacher - acc_student| / acc_teacher`, compared strictly
//! against the threshold: a gap equal to the threshold blocks release.

use serde::{Deserialize, Serialize};

use crate::classifiers::{default_roster, train, ClassifierSpec, ModelRole, TrainedModel};
use crate::data::Dataset;
use crate::error::{Error, Result, Stage};
use crate::eval::{evaluate, select_best, CvConfig, CvResult, EvaluationReport};
use crate::scalar::Scalar;

/// What to train, how to cross-validate, and how close the student
/// must stay to the teacher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub teacher_roster: Vec<ClassifierSpec>,
    pub student_roster: Vec<ClassifierSpec>,
    pub cv: CvConfig,
    /// Strict upper bound on the relative accuracy gap.
    pub release_threshold: f64,
    /// Master seed this config was derived from; recorded in reports.
    pub seed: u64,
}

impl PipelineConfig {
    /// Default rosters (dt, rf, svm, nb) and 10-fold stratified CV,
    /// with every component seeded from `seed`.
    pub fn for_seed(seed: u64) -> Self {
        PipelineConfig {
            teacher_roster: default_roster(seed),
            student_roster: default_roster(seed),
            cv: CvConfig { seed, ..CvConfig::default() },
            release_threshold: 0.01,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.teacher_roster.is_empty() {
            return Err(Error::Config("teacher roster is empty".into()));
        }
        if self.student_roster.is_empty() {
            return Err(Error::Config("student roster is empty".into()));
        }
        for spec in self.teacher_roster.iter().chain(&self.student_roster) {
            spec.validate()?;
        }
        if !self.release_threshold.is_finite() || !(0.0..=1.0).contains(&self.release_threshold) {
            return Err(Error::Config(format!(
                "release_threshold must lie in [0, 1], got {}",
                self.release_threshold
            )));
        }
        if self.cv.k < 2 {
            return Err(Error::Config("cross-validation needs k >= 2".into()));
        }
        Ok(())
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::for_seed(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSummary<F> {
    pub rows: usize,
    pub malicious_fraction: F,
}

/// Everything one run produces, selection tables included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct PipelineReport<F> {
    pub teacher_selection: Vec<(ClassifierSpec, CvResult<F>)>,
    pub teacher: TrainedModel<F>,
    pub annotation_summary: AnnotationSummary<F>,
    pub student_selection: Vec<(ClassifierSpec, CvResult<F>)>,
    pub student: TrainedModel<F>,
    pub teacher_eval: EvaluationReport<F>,
    pub student_eval: EvaluationReport<F>,
    pub relative_score_difference: F,
    pub release_threshold: f64,
    pub released: bool,
}

type Selection<F> = (TrainedModel<F>, Vec<(ClassifierSpec, CvResult<F>)>);

fn generate_model<F: Scalar>(
    data: &Dataset<F>,
    roster: &[ClassifierSpec],
    cv: &CvConfig,
    role: ModelRole,
) -> Result<Selection<F>> {
    let (winner, table) = select_best(roster, data, cv)?;
    // Cross-validation picked the family; the shipped model retrains
    // on every available row.
    let mut model = train(data, &winner)?;
    model.metadata.role = Some(role);
    Ok((model, table))
}

/// Cross-validate the teacher roster on the sensitive data, then
/// retrain the winner on all of it.
pub fn teacher_model_generation<F: Scalar>(
    sensitive: &Dataset<F>,
    cfg: &PipelineConfig,
) -> Result<Selection<F>> {
    cfg.validate()?;
    generate_model(sensitive, &cfg.teacher_roster, &cfg.cv, ModelRole::Teacher)
}

/// Label every row of `unlabeled` with the teacher's prediction,
/// preserving row order.
pub fn annotate<F: Scalar>(
    teacher: &TrainedModel<F>,
    unlabeled: &Dataset<F>,
) -> Result<Dataset<F>> {
    if unlabeled.labeled() {
        return Err(Error::State(
            "annotation input already carries labels".into(),
        ));
    }
    let labels = teacher.predict_dataset(unlabeled)?;
    unlabeled.with_labels(&labels)
}

/// Cross-validate the student roster on the annotated data, then
/// retrain the winner on all of it.
pub fn student_model_generation<F: Scalar>(
    annotated: &Dataset<F>,
    cfg: &PipelineConfig,
) -> Result<Selection<F>> {
    cfg.validate()?;
    generate_model(annotated, &cfg.student_roster, &cfg.cv, ModelRole::Student)
}

/// Score teacher and student on the same test rows and compute the
/// relative accuracy gap `|acc_t - acc_s| / acc_t`.
#[allow(clippy::type_complexity)]
pub fn evaluate_models<F: Scalar>(
    teacher: &TrainedModel<F>,
    student: &TrainedModel<F>,
    test: &Dataset<F>,
) -> Result<(EvaluationReport<F>, EvaluationReport<F>, F)> {
    let teacher_eval = evaluate(teacher, test)?;
    let student_eval = evaluate(student, test)?;
    if teacher_eval.acc == F::zero() {
        return Err(Error::Contract(
            "teacher accuracy on the test set is zero; the relative gap is undefined".into(),
        ));
    }
    let gap = (teacher_eval.acc - student_eval.acc).abs() / teacher_eval.acc;
    Ok((teacher_eval, student_eval, gap))
}

/// The whole flow. Each stage's first failure aborts the run with a
/// stage-tagged error.
pub fn run_pipeline<F: Scalar>(
    sensitive: &Dataset<F>,
    unlabeled: &Dataset<F>,
    test: &Dataset<F>,
    cfg: &PipelineConfig,
) -> Result<PipelineReport<F>> {
    cfg.validate()?;

    let (teacher, teacher_selection) = teacher_model_generation(sensitive, cfg)
        .map_err(|e| e.at_stage(Stage::TeacherGeneration))?;

    let annotated = annotate(&teacher, unlabeled).map_err(|e| e.at_stage(Stage::Annotation))?;
    let (_, malicious) = annotated.class_counts();
    let annotation_summary = AnnotationSummary {
        rows: annotated.len(),
        malicious_fraction: if annotated.is_empty() {
            F::zero()
        } else {
            F::from_count(malicious) / F::from_count(annotated.len())
        },
    };

    let (student, student_selection) = student_model_generation(&annotated, cfg)
        .map_err(|e| e.at_stage(Stage::StudentGeneration))?;

    let (teacher_eval, student_eval, relative_score_difference) =
        evaluate_models(&teacher, &student, test)
            .map_err(|e| e.at_stage(Stage::Evaluation))?;

    let released = relative_score_difference
        .to_f64()
        .is_some_and(|gap| gap < cfg.release_threshold);

    Ok(PipelineReport {
        teacher_selection,
        teacher,
        annotation_summary,
        student_selection,
        student,
        teacher_eval,
        student_eval,
        relative_score_difference,
        release_threshold: cfg.release_threshold,
        released,
    })
}
