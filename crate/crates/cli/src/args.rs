//! Command-line argument surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "flowmimic",
    version,
    about = "Train, distill and evaluate network-flow classifiers",
    propagate_version = true
)]
pub struct Cli {
    /// Timestamp (seconds since the Unix epoch) recorded in outputs;
    /// defaults to $SOURCE_DATE_EPOCH, then the current time
    #[arg(long, global = true, value_name = "UNIX_SECONDS")]
    pub timestamp: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shuffle a labeled CSV into sensitive, unlabeled and test parts
    Split(SplitArgs),
    /// Cross-validate a roster on labeled data; save the winner as the teacher
    TrainTeacher(TrainArgs),
    /// Cross-validate a roster on annotated data; save the winner as the student
    TrainStudent(TrainArgs),
    /// Label an unlabeled CSV with a trained model's predictions
    Annotate(AnnotateArgs),
    /// Score one model on a test set, or compare a teacher and a student
    Evaluate(EvaluateArgs),
    /// Run the whole flow: teacher, annotation, student, release gate
    Pipeline(PipelineArgs),
    /// Write a synthetic labeled flow dataset for exercising the tool
    GenData(GenDataArgs),
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Labeled source CSV
    #[arg(long)]
    pub input: PathBuf,

    /// Schema file describing the columns
    #[arg(long)]
    pub schema: PathBuf,

    /// Rows for the sensitive (teacher-training) part
    #[arg(long)]
    pub labeled_n: usize,

    /// Rows for the public part; labels are stripped
    #[arg(long)]
    pub unlabeled_n: usize,

    /// Rows for the held-out test part
    #[arg(long)]
    pub test_n: usize,

    /// Shuffle seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Deal each part proportionally per class instead of one plain shuffle
    #[arg(long)]
    pub stratified: bool,

    /// Input CSV carries no header row
    #[arg(long)]
    pub no_header: bool,

    /// Directory for sensitive.csv, unlabeled.csv, test.csv and manifest.json
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled training CSV
    #[arg(long)]
    pub data: PathBuf,

    /// Schema file describing the columns
    #[arg(long)]
    pub schema: PathBuf,

    /// Comma list of classifier families to cross-validate
    #[arg(long, default_value = "dt,rf,svm,nb")]
    pub roster: String,

    /// Cross-validation fold count (at least 2)
    #[arg(long, default_value_t = 10)]
    pub cv_k: usize,

    /// Seed for fold assignment and seeded classifiers
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Input CSV carries no header row
    #[arg(long)]
    pub no_header: bool,

    /// Where to write the winning model
    #[arg(long)]
    pub out_model: PathBuf,

    /// Where to write the per-classifier selection report (JSON)
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Trained model file
    #[arg(long)]
    pub model: PathBuf,

    /// Unlabeled CSV to annotate
    #[arg(long)]
    pub data: PathBuf,

    /// Schema file describing the columns
    #[arg(long)]
    pub schema: PathBuf,

    /// Input CSV carries no header row
    #[arg(long)]
    pub no_header: bool,

    /// Where to write the labeled CSV (input order preserved)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Teacher model file (or the only model, without --student)
    #[arg(long)]
    pub teacher: PathBuf,

    /// Student model file; enables the side-by-side comparison
    #[arg(long)]
    pub student: Option<PathBuf>,

    /// Labeled test CSV
    #[arg(long)]
    pub test: PathBuf,

    /// Schema file describing the columns
    #[arg(long)]
    pub schema: PathBuf,

    /// Where to write the evaluation report (JSON)
    #[arg(long)]
    pub report: PathBuf,

    /// Strict upper bound on the relative accuracy gap for release
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,

    /// Also write ROC points as a two-column table; with --student the
    /// teacher and student curves get `.teacher`/`.student` suffixes
    #[arg(long, value_name = "PATH")]
    pub roc_out: Option<PathBuf>,

    /// Input CSV carries no header row
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Labeled sensitive CSV (teacher training data)
    #[arg(long)]
    pub sensitive: PathBuf,

    /// Unlabeled public CSV (annotated by the teacher)
    #[arg(long)]
    pub unlabeled: PathBuf,

    /// Labeled test CSV (release gate)
    #[arg(long)]
    pub test: PathBuf,

    /// Schema file describing the columns
    #[arg(long)]
    pub schema: PathBuf,

    /// Config file overriding the defaults (key:value lines)
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Input CSVs carry no header row
    #[arg(long)]
    pub no_header: bool,

    /// Directory for models, annotated data, report and manifest
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Number of rows to generate
    #[arg(long)]
    pub rows: usize,

    /// Generator seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Where to write the labeled CSV
    #[arg(long)]
    pub out: PathBuf,

    /// Also write the matching schema file here
    #[arg(long, value_name = "PATH")]
    pub schema_out: Option<PathBuf>,
}
