//! Release acceptance gate. One test per criterion, so the harness
//! output reads as a pass/fail checklist:
//!
//! 1. metric computations match brute-force recomputation exactly
//! 2. entropy and information gain match brute-force evaluation
//! 3. rank-statistic AUC equals the trapezoidal ROC area
//! 4. classifier sanity ladder on hand-built fixtures
//! 5. benchmark-scale selection, accuracy and classifier ordering
//! 6. release gate and student AUC on the benchmark artifacts
//! 7. rerun determinism and model save/load round-trips
//! 8. annotated labels equal teacher predictions exhaustively
//!
//! Criteria 5, 6 and 8 share one benchmark run (41 features, 136k
//! synthetic rows, 57,900/57,900/20,173 splits, default rosters,
//! 10-fold CV) built once per test binary.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use flowmimic::{
    annotate, entropy, evaluate_models, information_gain, metrics, roc_auc, split_dataset,
    student_model_generation, teacher_model_generation, train, ClassifierSpec, ColumnKind,
    Column, ConfusionMatrix, CvResult, Dataset, Family, FamilyParams, FeatureValue,
    FeatureVector, Label, ModelBody, PipelineConfig, Schema, SplitSpec, TrainedModel,
};

const BENCH_SEED: u64 = 20_260_817;
const BENCH_ROWS: usize = 136_000;

// ---------------------------------------------------------------- 1

#[test]
fn criterion_1_metrics_match_brute_force_recomputation() {
    let mut rng = StdRng::seed_from_u64(101);
    let started = Instant::now();

    for round in 0..150 {
        let n = rng.gen_range(1..=400);
        let pairs: Vec<(Label, Label)> = (0..n)
            .map(|_| (random_label(&mut rng), random_label(&mut rng)))
            .collect();

        // First tally: the confusion matrix under test.
        let mut c = ConfusionMatrix { tp: 0, tn: 0, fp: 0, fn_: 0 };
        for &(actual, predicted) in &pairs {
            match (actual, predicted) {
                (Label::Malicious, Label::Malicious) => c.tp += 1,
                (Label::Benign, Label::Benign) => c.tn += 1,
                (Label::Benign, Label::Malicious) => c.fp += 1,
                (Label::Malicious, Label::Benign) => c.fn_ += 1,
            }
        }
        let m = metrics::<f64>(&c).unwrap();

        // Second, independent tally straight off the prediction list.
        let count = |f: &dyn Fn(Label, Label) -> bool| {
            pairs.iter().filter(|&&(a, p)| f(a, p)).count()
        };
        let malicious = count(&|a, _| a == Label::Malicious);
        let benign = n - malicious;
        let hits = count(&|a, p| a == p);
        assert_eq!(m.acc, hits as f64 / n as f64, "acc, round {round}");

        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        assert_eq!(m.tpr, ratio(count(&|a, p| a == Label::Malicious && p == Label::Malicious), malicious));
        assert_eq!(m.fnr, ratio(count(&|a, p| a == Label::Malicious && p == Label::Benign), malicious));
        assert_eq!(m.tnr, ratio(count(&|a, p| a == Label::Benign && p == Label::Benign), benign));
        assert_eq!(m.fpr, ratio(count(&|a, p| a == Label::Benign && p == Label::Malicious), benign));

        if let (Some(tpr), Some(fnr)) = (m.tpr, m.fnr) {
            assert!((tpr + fnr - 1.0).abs() <= 1e-12, "tpr+fnr, round {round}");
        }
        if let (Some(tnr), Some(fpr)) = (m.tnr, m.fpr) {
            assert!((tnr + fpr - 1.0).abs() <= 1e-12, "tnr+fpr, round {round}");
        }
    }

    assert_budget(started.elapsed(), Duration::from_secs(1), "metric oracle");
}

fn random_label(rng: &mut StdRng) -> Label {
    if rng.gen_bool(0.5) { Label::Malicious } else { Label::Benign }
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_2_entropy_and_information_gain_match_brute_force() {
    let started = Instant::now();

    assert_eq!(entropy::<f64>(5, 5), 1.0, "even split is exactly one bit");

    // The classic 14-row split: parent 5/9, three children.
    let children = [(3, 2), (0, 4), (2, 3)];
    let gain: f64 = information_gain((5, 9), &children).unwrap();
    assert!((gain - 0.246_750).abs() <= 1e-6, "14-row fixture gain {gain}");

    let mut rng = StdRng::seed_from_u64(202);
    for round in 0..1_000 {
        let parts: Vec<(usize, usize)> = (0..rng.gen_range(1..=4))
            .map(|_| (rng.gen_range(0..=15), rng.gen_range(0..=15)))
            .collect();
        let parent = parts.iter().fold((0, 0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        if parent.0 + parent.1 == 0 {
            continue;
        }

        for &(b, m) in parts.iter().chain(Some(&parent)) {
            let h: f64 = entropy(b, m);
            assert!(
                (h - brute_entropy(b, m)).abs() <= 1e-9,
                "entropy({b},{m}), round {round}"
            );
        }

        let gain: f64 = information_gain(parent, &parts).unwrap();
        let total = (parent.0 + parent.1) as f64;
        let weighted: f64 = parts
            .iter()
            .map(|&(b, m)| (b + m) as f64 / total * brute_entropy(b, m))
            .sum();
        let expected = brute_entropy(parent.0, parent.1) - weighted;
        assert!((gain - expected).abs() <= 1e-9, "gain, round {round}");
    }

    assert_budget(started.elapsed(), Duration::from_secs(1), "entropy oracle");
}

fn brute_entropy(benign: usize, malicious: usize) -> f64 {
    let total = (benign + malicious) as f64;
    [benign, malicious]
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

// ---------------------------------------------------------------- 3

#[test]
fn criterion_3_rank_auc_equals_trapezoidal_area() {
    let mut rng = StdRng::seed_from_u64(303);

    for round in 0..200 {
        let malicious = rng.gen_range(1..=60);
        let benign = rng.gen_range(1..=60);
        // A coarse score grid forces plenty of ties.
        let mut scored: Vec<(f64, Label)> = Vec::with_capacity(malicious + benign);
        for _ in 0..malicious {
            scored.push((rng.gen_range(0..=8) as f64 / 8.0, Label::Malicious));
        }
        for _ in 0..benign {
            scored.push((rng.gen_range(0..=8) as f64 / 8.0, Label::Benign));
        }

        let (auc, points): (f64, _) = roc_auc(&scored).unwrap();
        let trapezoid: f64 = points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum();
        assert!(
            (auc - trapezoid).abs() <= 1e-9,
            "auc {auc} vs trapezoid {trapezoid}, round {round}"
        );
    }

    let perfect = [
        (0.1, Label::Benign),
        (0.2, Label::Benign),
        (0.8, Label::Malicious),
        (0.9, Label::Malicious),
    ];
    let (auc, _): (f64, _) = roc_auc(&perfect).unwrap();
    assert_eq!(auc, 1.0, "perfectly ordered scores");

    let tied = [
        (0.5, Label::Benign),
        (0.5, Label::Malicious),
        (0.5, Label::Benign),
        (0.5, Label::Malicious),
    ];
    let (auc, _): (f64, _) = roc_auc(&tied).unwrap();
    assert_eq!(auc, 0.5, "all-tied scores");
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_4_classifier_sanity_ladder() {
    let started = Instant::now();
    let separable = separable_fixture();

    let dt_spec = ClassifierSpec::default_for(Family::DecisionTree, 3);
    let dt = train(&separable, &dt_spec).unwrap();
    assert_eq!(training_accuracy(&dt, &separable), 1.0, "decision tree");

    let rf = train(&separable, &ClassifierSpec::default_for(Family::RandomForest, 3)).unwrap();
    assert_eq!(training_accuracy(&rf, &separable), 1.0, "random forest");

    // One unbootstrapped tree over every feature is the same learner
    // as a plain decision tree.
    let mut degenerate = ClassifierSpec::default_for(Family::RandomForest, 3);
    if let FamilyParams::RandomForest(p) = &mut degenerate.params {
        p.tree_count = 1;
        p.bootstrap = false;
        p.feature_subsample = Some(separable.schema().feature_count());
    }
    let one_tree = train(&separable, &degenerate).unwrap();
    assert_eq!(
        one_tree.predict_dataset(&separable).unwrap(),
        dt.predict_dataset(&separable).unwrap(),
        "degenerate forest differs from the tree"
    );

    let nb = train(&separable, &ClassifierSpec::default_for(Family::NaiveBayes, 3)).unwrap();
    let ModelBody::NaiveBayes(bayes) = &nb.body else {
        panic!("trained family changed under a fixed spec");
    };
    for (i, row) in separable.rows().iter().enumerate() {
        let [p_benign, p_malicious] = bayes.posteriors(&row.values).unwrap();
        assert!(
            (p_benign + p_malicious - 1.0).abs() <= 1e-9,
            "posteriors sum {} on row {i}",
            p_benign + p_malicious
        );
    }

    let svm_spec = ClassifierSpec::default_for(Family::LinearSvm, 3);
    let svm = train(&clusters_fixture(), &svm_spec).unwrap();
    assert_eq!(training_accuracy(&svm, &clusters_fixture()), 1.0, "svm on clusters");

    let xor = xor_fixture();
    let svm = train(&xor, &svm_spec).unwrap();
    let acc = training_accuracy(&svm, &xor);
    assert!(acc <= 0.75, "a linear rule fit balanced XOR at {acc}");

    assert_budget(started.elapsed(), Duration::from_secs(10), "sanity ladder");
}

fn xy_schema() -> Schema {
    Schema::new(
        vec![
            Column { name: "x".into(), kind: ColumnKind::Continuous },
            Column { name: "y".into(), kind: ColumnKind::Continuous },
        ],
        "class",
        "normal",
        "malicious",
    )
    .unwrap()
}

fn xy_dataset(rows: impl IntoIterator<Item = (f64, f64, Label)>) -> Dataset<f64> {
    let rows: Vec<FeatureVector<f64>> = rows
        .into_iter()
        .map(|(x, y, label)| {
            FeatureVector::new(
                vec![FeatureValue::Number(x), FeatureValue::Number(y)],
                Some(label),
            )
        })
        .collect();
    Dataset::new(xy_schema(), rows, true).unwrap()
}

/// Sixty rows split by the sign of `x` with a wide margin; `y` is an
/// uninformative counter.
fn separable_fixture() -> Dataset<f64> {
    xy_dataset((0..60).map(|i| {
        let jitter = (i % 10) as f64 / 20.0;
        if i % 2 == 0 {
            (1.0 + jitter, i as f64, Label::Malicious)
        } else {
            (-1.0 - jitter, i as f64, Label::Benign)
        }
    }))
}

/// Two tight clusters far apart on a line: trivially separable.
fn clusters_fixture() -> Dataset<f64> {
    let schema = Schema::new(
        vec![Column { name: "score".into(), kind: ColumnKind::Continuous }],
        "class",
        "normal",
        "malicious",
    )
    .unwrap();
    let rows: Vec<FeatureVector<f64>> = (0..100)
        .map(|i| {
            let malicious = i % 2 == 0;
            let center = if malicious { 3.0 } else { -3.0 };
            let jitter = ((i % 5) as f64 - 2.0) * 0.1;
            FeatureVector::new(
                vec![FeatureValue::Number(center + jitter)],
                Some(if malicious { Label::Malicious } else { Label::Benign }),
            )
        })
        .collect();
    Dataset::new(schema, rows, true).unwrap()
}

/// Four balanced cells with XOR labels: no linear rule beats 3 of 4.
fn xor_fixture() -> Dataset<f64> {
    let mut rows = Vec::new();
    for &(cx, cy) in &[(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
        let label = if (cx > 0.0) ^ (cy > 0.0) { Label::Malicious } else { Label::Benign };
        for i in 0..25 {
            let jitter = i as f64 / 250.0;
            rows.push((cx + jitter, cy - jitter, label));
        }
    }
    xy_dataset(rows)
}

fn training_accuracy(model: &TrainedModel<f64>, ds: &Dataset<f64>) -> f64 {
    let predicted = model.predict_dataset(ds).unwrap();
    let hits = predicted
        .iter()
        .zip(ds.rows())
        .filter(|(p, row)| Some(**p) == row.label)
        .count();
    hits as f64 / ds.len() as f64
}

// ------------------------------------------------------------ 5/6/8

/// The benchmark run shared by criteria 5, 6 and 8.
struct Bench {
    teacher: TrainedModel<f64>,
    teacher_table: Vec<(ClassifierSpec, CvResult<f64>)>,
    student_family: Family,
    teacher_test_accuracy: f64,
    student_test_auc: Option<f64>,
    relative_score_difference: f64,
    unlabeled: Dataset<f64>,
    annotated: Dataset<f64>,
    build_time: Duration,
}

fn bench() -> &'static Bench {
    static BENCH: OnceLock<Bench> = OnceLock::new();
    BENCH.get_or_init(|| {
        let started = Instant::now();
        let source = flowmimic::synth::dataset::<f64>(BENCH_ROWS, BENCH_SEED);
        let split = SplitSpec::new(57_900, 57_900, 20_173, BENCH_SEED);
        let (sensitive, unlabeled, test) = split_dataset(&source, &split).unwrap();
        drop(source);

        let cfg = PipelineConfig::for_seed(BENCH_SEED);
        let (teacher, teacher_table) = teacher_model_generation(&sensitive, &cfg).unwrap();
        let annotated = annotate(&teacher, &unlabeled).unwrap();
        let (student, _student_table) = student_model_generation(&annotated, &cfg).unwrap();
        let (teacher_eval, student_eval, gap) =
            evaluate_models(&teacher, &student, &test).unwrap();

        Bench {
            teacher,
            teacher_table,
            student_family: student.metadata.family,
            teacher_test_accuracy: teacher_eval.acc,
            student_test_auc: student_eval.auc,
            relative_score_difference: gap,
            unlabeled,
            annotated,
            build_time: started.elapsed(),
        }
    })
}

fn cv_accuracy(table: &[(ClassifierSpec, CvResult<f64>)], family: Family) -> f64 {
    table
        .iter()
        .find(|(spec, _)| spec.family() == family)
        .unwrap_or_else(|| panic!("{family} missing from the selection table"))
        .1
        .mean
        .acc
}

#[test]
fn criterion_5_benchmark_selection_accuracy_and_ordering() {
    let b = bench();

    assert_eq!(b.teacher.metadata.family, Family::RandomForest, "teacher winner");
    assert_eq!(b.student_family, Family::RandomForest, "student winner");

    assert!(
        b.teacher_test_accuracy >= 0.99,
        "teacher test accuracy {:.4}",
        b.teacher_test_accuracy
    );

    let rf = cv_accuracy(&b.teacher_table, Family::RandomForest);
    let dt = cv_accuracy(&b.teacher_table, Family::DecisionTree);
    let svm = cv_accuracy(&b.teacher_table, Family::LinearSvm);
    let nb = cv_accuracy(&b.teacher_table, Family::NaiveBayes);
    assert!(rf >= dt, "rf {rf:.4} vs dt {dt:.4}");
    assert!(dt > svm, "dt {dt:.4} vs svm {svm:.4}");
    assert!(svm > nb, "svm {svm:.4} vs nb {nb:.4}");
    assert!(
        dt.min(rf) - svm.max(nb) >= 0.01,
        "tree family within 1 pp of svm/nb: dt {dt:.4} rf {rf:.4} svm {svm:.4} nb {nb:.4}"
    );

    assert_budget(b.build_time, Duration::from_secs(900), "benchmark run");
}

#[test]
fn criterion_6_release_gate_holds_on_the_benchmark() {
    let b = bench();
    assert!(
        b.relative_score_difference < 0.01,
        "relative score difference {:.6}",
        b.relative_score_difference
    );
    let auc = b.student_test_auc.expect("two-class test set has an AUC");
    assert!(auc >= 0.98, "student AUC {auc:.4}");
}

#[test]
fn criterion_8_annotation_equals_teacher_predictions_exhaustively() {
    let b = bench();
    let predicted = b.teacher.predict_dataset(&b.unlabeled).unwrap();
    assert_eq!(predicted.len(), 57_900);
    assert_eq!(b.annotated.len(), 57_900);
    for (i, (row, label)) in b.annotated.rows().iter().zip(&predicted).enumerate() {
        assert_eq!(row.label, Some(*label), "annotation differs at row {i}");
    }
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_7_reruns_are_checksum_identical_and_models_round_trip() {
    // Part one: the same pipeline invocation twice, byte-for-byte.
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    run_cli(root, &["gen-data", "--rows", "4000", "--seed", "11", "--out", "flows.csv",
                    "--schema-out", "flows.schema", "--timestamp", "1755475200"]);
    run_cli(root, &["split", "--input", "flows.csv", "--schema", "flows.schema",
                    "--labeled-n", "1600", "--unlabeled-n", "1600", "--test-n", "800",
                    "--seed", "11", "--out-dir", "parts", "--timestamp", "1755475200"]);
    fs::write(
        root.join("run.cfg"),
        "pipeline.seed:11\npipeline.teacher_roster:dt,rf\npipeline.student_roster:dt,rf\ncv.k:3\n",
    )
    .unwrap();
    // The gate verdict is allowed to go either way at this scale; the
    // claim under test is that reruns are bit-identical, verdict included.
    let verdicts: Vec<i32> = ["first", "second"]
        .iter()
        .map(|out_dir| {
            run_verdict(root, &["pipeline", "--sensitive", "parts/sensitive.csv",
                                "--unlabeled", "parts/unlabeled.csv", "--test", "parts/test.csv",
                                "--schema", "flows.schema", "--config", "run.cfg",
                                "--out-dir", out_dir, "--timestamp", "1755475200"])
        })
        .collect();
    assert_eq!(verdicts[0], verdicts[1], "gate verdict differs between reruns");
    for name in ["teacher.model.json", "student.model.json", "annotated.csv",
                 "report.json", "teacher.roc.tsv", "student.roc.tsv"] {
        let first = fs::read(root.join("first").join(name)).unwrap();
        let second = fs::read(root.join("second").join(name)).unwrap();
        assert_eq!(first, second, "{name} differs between identical reruns");
    }

    // Part two: every family survives a save/load round trip with
    // exact prediction equality on 1,000 fresh rows.
    let train_data = flowmimic::synth::dataset::<f64>(3_000, 99);
    let probe = flowmimic::synth::dataset::<f64>(1_000, 123);
    for family in [Family::DecisionTree, Family::RandomForest, Family::LinearSvm, Family::NaiveBayes] {
        let spec = ClassifierSpec::default_for(family, 7);
        let model = train(&train_data, &spec).unwrap();
        let path = root.join(format!("{family}.model.json"));
        flowmimic::save_model(&model, &path).unwrap();
        let loaded: TrainedModel<f64> = flowmimic::load_model(&path).unwrap();

        assert_eq!(
            model.predict_dataset(&probe).unwrap(),
            loaded.predict_dataset(&probe).unwrap(),
            "{family} predictions changed across save/load"
        );
        let original_scores = model.score_dataset(&probe).unwrap();
        let loaded_scores = loaded.score_dataset(&probe).unwrap();
        assert_eq!(original_scores, loaded_scores, "{family} scores changed across save/load");
    }
}

fn run_cli(dir: &Path, args: &[&str]) {
    let code = run_verdict(dir, args);
    assert_eq!(code, 0, "flowmimic {args:?} exited with {code}");
}

/// Runs the binary and returns its exit code, accepting only the two
/// run-completed outcomes (released / gate failed).
fn run_verdict(dir: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_flowmimic"))
        .current_dir(dir)
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .env_remove("FLOWMIMIC_THREADS")
        .output()
        .expect("flowmimic binary should spawn");
    let code = out.status.code().expect("no exit code");
    assert!(
        code == 0 || code == 1,
        "flowmimic {:?} exited with {code}:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    code
}

// ------------------------------------------------------------ shared

fn assert_budget(elapsed: Duration, budget: Duration, what: &str) {
    assert!(
        elapsed <= budget,
        "{what} took {elapsed:?}, budget {budget:?}"
    );
}
