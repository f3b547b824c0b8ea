//! Command implementations. Each returns the process exit code for a
//! completed run (0, or 1 when a release gate or comparison says no);
//! hard failures come back as `CliError`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use flowmimic::{
    annotate as annotate_dataset, evaluate as evaluate_model, evaluate_models, load_model,
    load_labeled, load_unlabeled, run_pipeline, save_model, save_report, select_best,
    ClassifierSpec, CvConfig, CvResult, Dataset, Error, EvaluationReport, ModelRole,
    PipelineConfig, Schema, SplitSpec, TrainedModel,
};

use crate::args::{
    AnnotateArgs, EvaluateArgs, GenDataArgs, PipelineArgs, SplitArgs, TrainArgs,
};
use crate::clock;
use crate::config;
use crate::exit::{CliError, Context, EXIT_GATE_FAILED};
use crate::manifest::{sibling_path, RunManifest};
use crate::render;

/// Per-classifier cross-validation table behind a train command's
/// model choice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub role: ModelRole,
    pub cv: CvConfig,
    pub training_rows: usize,
    pub winner: ClassifierSpec,
    pub table: Vec<(ClassifierSpec, CvResult<f64>)>,
}

/// Teacher and student scored on the same test set, side by side,
/// plus the release-gate outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub teacher: EvaluationReport<f64>,
    pub student: EvaluationReport<f64>,
    pub relative_score_difference: f64,
    pub threshold: f64,
    pub released: bool,
}

pub fn split(args: &SplitArgs, timestamp: u64) -> Result<i32, CliError> {
    let started = Instant::now();
    let schema = read_schema(&args.schema)?;
    let source = load_labeled::<f64>(&args.input, &schema, !args.no_header)
        .ctx(format!("loading --input {}", args.input.display()))?;

    let spec = SplitSpec {
        labeled_count: args.labeled_n,
        unlabeled_count: args.unlabeled_n,
        test_count: args.test_n,
        seed: args.seed,
        stratified: args.stratified,
    };
    let (sensitive, unlabeled, test) = flowmimic::split_dataset(&source, &spec)?;

    fs::create_dir_all(&args.out_dir)
        .ctx(format!("creating --out-dir {}", args.out_dir.display()))?;
    let parts = [
        ("sensitive", &sensitive, args.out_dir.join("sensitive.csv")),
        ("unlabeled", &unlabeled, args.out_dir.join("unlabeled.csv")),
        ("test", &test, args.out_dir.join("test.csv")),
    ];

    let mut manifest = RunManifest::new(
        "split",
        timestamp,
        Some(args.seed),
        json!({
            "spec": spec,
            "has_header": !args.no_header,
            "schema_fingerprint": schema.fingerprint(),
        }),
    );
    manifest.add_input("input", &args.input)?;
    manifest.add_input("schema", &args.schema)?;
    for (role, part, path) in &parts {
        flowmimic::write_dataset(part, path, true).ctx(format!("writing {}", path.display()))?;
        manifest.add_output(role, path)?;
        println!("wrote {} ({} rows)", path.display(), part.len());
    }
    manifest.add_timing("total", started.elapsed());
    manifest.write(&args.out_dir.join("manifest.json"))?;
    Ok(0)
}

pub fn train(args: &TrainArgs, role: ModelRole, timestamp: u64) -> Result<i32, CliError> {
    if args.cv_k < 2 {
        return Err(CliError::Usage(format!(
            "--cv-k must be at least 2, got {}",
            args.cv_k
        )));
    }
    let started = Instant::now();
    let schema = read_schema(&args.schema)?;
    let data = load_labeled::<f64>(&args.data, &schema, !args.no_header)
        .ctx(format!("loading --data {}", args.data.display()))?;
    let roster = config::parse_roster(&args.roster, args.seed)?;
    let cv = CvConfig { k: args.cv_k, seed: args.seed, stratified: true };

    let selection_started = Instant::now();
    let (winner, table) = select_best(&roster, &data, &cv)?;
    let selection_elapsed = selection_started.elapsed();
    log::debug!("cross-validation took {selection_elapsed:?}");

    let retrain_started = Instant::now();
    let mut model = flowmimic::train(&data, &winner)?;
    model.metadata.role = Some(role);
    model.metadata.created_at = Some(clock::format_utc(timestamp));
    let retrain_elapsed = retrain_started.elapsed();

    save_model(&model, &args.out_model)
        .ctx(format!("writing --out-model {}", args.out_model.display()))?;
    let report = SelectionReport {
        role,
        cv,
        training_rows: data.len(),
        winner: winner.clone(),
        table: table.clone(),
    };
    save_report(&report, &args.report)
        .ctx(format!("writing --report {}", args.report.display()))?;

    let role_word = role_word(role);
    print!(
        "{}",
        render::selection_table(
            &format!("{role_word} selection ({}-fold stratified cross-validation)", cv.k),
            &table,
            &winner
        )
    );
    println!(
        "winner {} retrained on {} rows, saved to {}",
        winner.family(),
        data.len(),
        args.out_model.display()
    );

    let command = match role {
        ModelRole::Teacher => "train-teacher",
        ModelRole::Student => "train-student",
    };
    let mut manifest = RunManifest::new(
        command,
        timestamp,
        Some(args.seed),
        json!({
            "roster": roster,
            "cv": cv,
            "has_header": !args.no_header,
            "schema_fingerprint": schema.fingerprint(),
        }),
    );
    manifest.add_input("data", &args.data)?;
    manifest.add_input("schema", &args.schema)?;
    manifest.add_output("model", &args.out_model)?;
    manifest.add_output("report", &args.report)?;
    manifest.add_timing("cross_validation", selection_elapsed);
    manifest.add_timing("final_training", retrain_elapsed);
    manifest.add_timing("total", started.elapsed());
    manifest.write(&sibling_path(&args.out_model))?;
    Ok(0)
}

pub fn annotate(args: &AnnotateArgs, timestamp: u64) -> Result<i32, CliError> {
    let started = Instant::now();
    let schema = read_schema(&args.schema)?;
    let model: TrainedModel<f64> =
        load_model(&args.model).ctx(format!("loading --model {}", args.model.display()))?;
    let data = load_for_annotation(&args.data, &schema, !args.no_header)?;

    let annotated = annotate_dataset(&model, &data)?;
    flowmimic::write_dataset(&annotated, &args.out, true)
        .ctx(format!("writing --out {}", args.out.display()))?;

    let (benign, malicious) = annotated.class_counts();
    println!(
        "annotated {} rows ({malicious} malicious, {benign} benign), saved to {}",
        annotated.len(),
        args.out.display()
    );

    let mut manifest = RunManifest::new(
        "annotate",
        timestamp,
        None,
        json!({
            "has_header": !args.no_header,
            "schema_fingerprint": schema.fingerprint(),
            "model": model.metadata,
        }),
    );
    manifest.add_input("model", &args.model)?;
    manifest.add_input("data", &args.data)?;
    manifest.add_input("schema", &args.schema)?;
    manifest.add_output("annotated", &args.out)?;
    manifest.add_timing("total", started.elapsed());
    manifest.write(&sibling_path(&args.out))?;
    Ok(0)
}

/// Load the file to annotate, turning the two wrong-kind-of-file cases
/// (already labeled, no rows at all) into usage errors rather than
/// data errors.
fn load_for_annotation(
    path: &Path,
    schema: &Schema,
    has_header: bool,
) -> Result<Dataset<f64>, CliError> {
    match load_unlabeled::<f64>(path, schema, has_header) {
        Ok(ds) => Ok(ds),
        Err(Error::Parse { message, .. }) if message == "no rows" => Err(CliError::Usage(
            format!("unlabeled input {} has no rows", path.display()),
        )),
        Err(err) => {
            if load_labeled::<f64>(path, schema, has_header).is_ok() {
                return Err(CliError::Usage(format!(
                    "{} already carries labels; annotate expects an unlabeled file",
                    path.display()
                )));
            }
            Err(err).ctx(format!("loading --data {}", path.display()))
        }
    }
}

pub fn evaluate(args: &EvaluateArgs, timestamp: u64) -> Result<i32, CliError> {
    if !args.threshold.is_finite() || !(0.0..=1.0).contains(&args.threshold) {
        return Err(CliError::Usage(format!(
            "--threshold must lie in [0, 1], got {}",
            args.threshold
        )));
    }
    let started = Instant::now();
    let schema = read_schema(&args.schema)?;
    let test = load_labeled::<f64>(&args.test, &schema, !args.no_header)
        .ctx(format!("loading --test {}", args.test.display()))?;
    let teacher: TrainedModel<f64> =
        load_model(&args.teacher).ctx(format!("loading --teacher {}", args.teacher.display()))?;

    let mut manifest = RunManifest::new(
        "evaluate",
        timestamp,
        None,
        json!({
            "threshold": args.threshold,
            "has_header": !args.no_header,
            "schema_fingerprint": schema.fingerprint(),
        }),
    );
    manifest.add_input("teacher", &args.teacher)?;
    manifest.add_input("test", &args.test)?;
    manifest.add_input("schema", &args.schema)?;

    let exit = match &args.student {
        None => {
            let report = evaluate_model(&teacher, &test)?;
            print!(
                "{}",
                render::evaluation_block(
                    &format!("evaluation of {}", args.teacher.display()),
                    &report
                )
            );
            save_report(&report, &args.report)
                .ctx(format!("writing --report {}", args.report.display()))?;
            if let Some(roc) = &args.roc_out {
                render::write_roc(roc, &report.roc_points)?;
                manifest.add_output("roc", roc)?;
            }
            0
        }
        Some(student_path) => {
            let student: TrainedModel<f64> = load_model(student_path)
                .ctx(format!("loading --student {}", student_path.display()))?;
            manifest.add_input("student", student_path)?;

            let (teacher_eval, student_eval, gap) = evaluate_models(&teacher, &student, &test)?;
            let released = gap < args.threshold;
            print!("{}", render::comparison_table(&teacher_eval, &student_eval));
            println!(
                "relative score difference: {:.4}% of teacher accuracy (threshold {:.4}%)",
                gap * 100.0,
                args.threshold * 100.0
            );
            println!("release gate: {}", if released { "pass" } else { "fail" });

            let report = ComparisonReport {
                teacher: teacher_eval,
                student: student_eval,
                relative_score_difference: gap,
                threshold: args.threshold,
                released,
            };
            save_report(&report, &args.report)
                .ctx(format!("writing --report {}", args.report.display()))?;
            if let Some(roc) = &args.roc_out {
                let teacher_roc = tagged_path(roc, "teacher");
                let student_roc = tagged_path(roc, "student");
                render::write_roc(&teacher_roc, &report.teacher.roc_points)?;
                render::write_roc(&student_roc, &report.student.roc_points)?;
                manifest.add_output("roc_teacher", &teacher_roc)?;
                manifest.add_output("roc_student", &student_roc)?;
            }
            if released {
                0
            } else {
                EXIT_GATE_FAILED
            }
        }
    };

    manifest.add_output("report", &args.report)?;
    manifest.add_timing("total", started.elapsed());
    manifest.write(&sibling_path(&args.report))?;
    Ok(exit)
}

pub fn pipeline(args: &PipelineArgs, timestamp: u64) -> Result<i32, CliError> {
    let started = Instant::now();
    let cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .ctx(format!("reading --config {}", path.display()))?;
            config::parse_pipeline_config(&text)?
        }
        None => PipelineConfig::default(),
    };
    let schema = read_schema(&args.schema)?;
    let sensitive = load_labeled::<f64>(&args.sensitive, &schema, !args.no_header)
        .ctx(format!("loading --sensitive {}", args.sensitive.display()))?;
    let unlabeled = load_unlabeled::<f64>(&args.unlabeled, &schema, !args.no_header)
        .ctx(format!("loading --unlabeled {}", args.unlabeled.display()))?;
    let test = load_labeled::<f64>(&args.test, &schema, !args.no_header)
        .ctx(format!("loading --test {}", args.test.display()))?;

    fs::create_dir_all(&args.out_dir)
        .ctx(format!("creating --out-dir {}", args.out_dir.display()))?;

    let run_started = Instant::now();
    let mut report = run_pipeline(&sensitive, &unlabeled, &test, &cfg)?;
    let run_elapsed = run_started.elapsed();
    log::debug!("pipeline stages took {run_elapsed:?}");

    let stamp = clock::format_utc(timestamp);
    report.teacher.metadata.created_at = Some(stamp.clone());
    report.student.metadata.created_at = Some(stamp);

    // The library returns the report; the annotated rows are
    // regenerated here (same teacher, same input, same order) to ship
    // as a file.
    let annotated = annotate_dataset(&report.teacher, &unlabeled)?;

    let teacher_path = args.out_dir.join("teacher.model.json");
    let student_path = args.out_dir.join("student.model.json");
    let annotated_path = args.out_dir.join("annotated.csv");
    let report_path = args.out_dir.join("report.json");
    let teacher_roc = args.out_dir.join("teacher.roc.tsv");
    let student_roc = args.out_dir.join("student.roc.tsv");

    save_model(&report.teacher, &teacher_path)
        .ctx(format!("writing {}", teacher_path.display()))?;
    save_model(&report.student, &student_path)
        .ctx(format!("writing {}", student_path.display()))?;
    flowmimic::write_dataset(&annotated, &annotated_path, true)
        .ctx(format!("writing {}", annotated_path.display()))?;
    save_report(&report, &report_path).ctx(format!("writing {}", report_path.display()))?;
    render::write_roc(&teacher_roc, &report.teacher_eval.roc_points)?;
    render::write_roc(&student_roc, &report.student_eval.roc_points)?;

    print!(
        "{}",
        render::selection_table(
            &format!(
                "teacher selection ({}-fold{} cross-validation)",
                cfg.cv.k,
                if cfg.cv.stratified { " stratified" } else { "" }
            ),
            &report.teacher_selection,
            &report.teacher.metadata.spec
        )
    );
    println!(
        "teacher {} annotated {} rows ({} malicious)",
        report.teacher.metadata.family,
        report.annotation_summary.rows,
        render::pct(Some(report.annotation_summary.malicious_fraction)) + "%"
    );
    print!(
        "{}",
        render::selection_table(
            &format!(
                "student selection ({}-fold{} cross-validation)",
                cfg.cv.k,
                if cfg.cv.stratified { " stratified" } else { "" }
            ),
            &report.student_selection,
            &report.student.metadata.spec
        )
    );
    print!(
        "{}",
        render::comparison_table(&report.teacher_eval, &report.student_eval)
    );
    println!(
        "relative score difference: {:.4}% of teacher accuracy (threshold {:.4}%)",
        report.relative_score_difference * 100.0,
        report.release_threshold * 100.0
    );
    println!(
        "release gate: {}",
        if report.released { "pass" } else { "fail" }
    );

    let mut manifest = RunManifest::new(
        "pipeline",
        timestamp,
        Some(cfg.seed),
        serde_json::to_value(&cfg)
            .map_err(|e| CliError::Internal(format!("config serialization: {e}")))?,
    );
    manifest.add_input("sensitive", &args.sensitive)?;
    manifest.add_input("unlabeled", &args.unlabeled)?;
    manifest.add_input("test", &args.test)?;
    manifest.add_input("schema", &args.schema)?;
    if let Some(path) = &args.config {
        manifest.add_input("config", path)?;
    }
    manifest.add_output("teacher_model", &teacher_path)?;
    manifest.add_output("student_model", &student_path)?;
    manifest.add_output("annotated", &annotated_path)?;
    manifest.add_output("report", &report_path)?;
    manifest.add_output("roc_teacher", &teacher_roc)?;
    manifest.add_output("roc_student", &student_roc)?;
    manifest.add_timing("stages", run_elapsed);
    manifest.add_timing("total", started.elapsed());
    manifest.write(&args.out_dir.join("manifest.json"))?;

    Ok(if report.released { 0 } else { EXIT_GATE_FAILED })
}

pub fn gen_data(args: &GenDataArgs, timestamp: u64) -> Result<i32, CliError> {
    if args.rows == 0 {
        return Err(CliError::Usage("--rows must be positive".into()));
    }
    let started = Instant::now();
    flowmimic::synth::write_csv(&args.out, args.rows, args.seed)
        .ctx(format!("writing --out {}", args.out.display()))?;

    let mut manifest = RunManifest::new(
        "gen-data",
        timestamp,
        Some(args.seed),
        json!({ "rows": args.rows, "seed": args.seed }),
    );
    manifest.add_output("data", &args.out)?;
    println!("wrote {} synthetic rows to {}", args.rows, args.out.display());

    if let Some(schema_path) = &args.schema_out {
        flowmimic::synth::schema()
            .to_file(schema_path)
            .ctx(format!("writing --schema-out {}", schema_path.display()))?;
        manifest.add_output("schema", schema_path)?;
        println!("wrote schema to {}", schema_path.display());
    }
    manifest.add_timing("total", started.elapsed());
    manifest.write(&sibling_path(&args.out))?;
    Ok(0)
}

fn read_schema(path: &Path) -> Result<Schema, CliError> {
    Schema::from_file(path).ctx(format!("loading --schema {}", path.display()))
}

fn role_word(role: ModelRole) -> &'static str {
    match role {
        ModelRole::Teacher => "teacher",
        ModelRole::Student => "student",
    }
}

/// `roc.tsv` + `teacher` gives `roc.teacher.tsv`.
fn tagged_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "roc".into());
    match path.extension() {
        Some(ext) => path.with_file_name(format!("{stem}.{tag}.{}", ext.to_string_lossy())),
        None => path.with_file_name(format!("{stem}.{tag}")),
    }
}
