//! Pipeline configuration files.
//!
//! Same line grammar as schema files: one `key:value` entry per line,
//! `#` starts a comment line, blank lines are ignored. Keys carry a
//! subsystem namespace:
//!
//! ```text
//! pipeline.seed:42
//! pipeline.release_threshold:0.01
//! pipeline.teacher_roster:dt,rf,svm,nb
//! pipeline.student_roster:dt,rf
//! cv.k:10
//! cv.seed:7
//! cv.stratified:true
//! ```
//!
//! `pipeline.seed` reseeds everything derived from the master seed
//! (roster entries and the fold shuffle) no matter where it appears in
//! the file; the `cv.*` keys then adjust the cross-validation side
//! alone. Unknown or repeated keys are rejected.

use std::fmt::Display;
use std::str::FromStr;

use flowmimic::{ClassifierSpec, Family, PipelineConfig};

use crate::exit::CliError;

/// Comma list of family short names into specs seeded with `seed`.
pub fn parse_roster(raw: &str, seed: u64) -> Result<Vec<ClassifierSpec>, CliError> {
    let mut roster = Vec::new();
    for token in raw.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err(CliError::Usage(format!(
                "roster `{raw}` has an empty entry; expected a comma list of dt, rf, svm, nb"
            )));
        }
        let family: Family = token.parse()?;
        roster.push(ClassifierSpec::default_for(family, seed));
    }
    Ok(roster)
}

pub fn parse_pipeline_config(text: &str) -> Result<PipelineConfig, CliError> {
    let entries = entries(text)?;

    let mut seed = PipelineConfig::default().seed;
    for entry in &entries {
        if entry.key == "pipeline.seed" {
            seed = entry.parse_value()?;
        }
    }

    let mut cfg = PipelineConfig::for_seed(seed);
    for entry in &entries {
        match entry.key.as_str() {
            "pipeline.seed" => {}
            "pipeline.release_threshold" => cfg.release_threshold = entry.parse_value()?,
            "pipeline.teacher_roster" => cfg.teacher_roster = parse_roster(&entry.value, seed)?,
            "pipeline.student_roster" => cfg.student_roster = parse_roster(&entry.value, seed)?,
            "cv.k" => cfg.cv.k = entry.parse_value()?,
            "cv.seed" => cfg.cv.seed = entry.parse_value()?,
            "cv.stratified" => cfg.cv.stratified = entry.parse_bool()?,
            other => {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key `{other}`",
                    entry.line
                )))
            }
        }
    }
    Ok(cfg)
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

impl Entry {
    fn parse_value<T: FromStr>(&self) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.value.parse().map_err(|e| {
            CliError::Usage(format!(
                "config line {}: bad value `{}` for `{}`: {e}",
                self.line, self.value, self.key
            ))
        })
    }

    fn parse_bool(&self) -> Result<bool, CliError> {
        match self.value.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(CliError::Usage(format!(
                "config line {}: `{}` expects true or false, got `{other}`",
                self.line, self.key
            ))),
        }
    }
}

fn entries(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut out: Vec<Entry> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let (key, value) = line.split_once(':').ok_or_else(|| {
            CliError::Usage(format!("config line {lineno}: expected `key:value`, got `{line}`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(previous) = out.iter().find(|e| e.key == key) {
            return Err(CliError::Usage(format!(
                "config line {lineno}: `{key}` already set on line {}",
                previous.line
            )));
        }
        out.push(Entry { line: lineno, key: key.into(), value: value.into() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use flowmimic::Family;

    fn families(roster: &[ClassifierSpec]) -> Vec<Family> {
        roster.iter().map(|s| s.family()).collect()
    }

    #[test]
    fn full_example_parses() {
        let cfg = parse_pipeline_config(
            "# run profile\n\
             pipeline.seed:42\n\
             pipeline.release_threshold:0.02\n\
             \n\
             pipeline.teacher_roster:dt,rf,svm,nb\n\
             pipeline.student_roster:dt,rf\n\
             cv.k:5\n\
             cv.seed:7\n\
             cv.stratified:false\n",
        )
        .unwrap();

        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.release_threshold, 0.02);
        assert_eq!(
            families(&cfg.teacher_roster),
            vec![Family::DecisionTree, Family::RandomForest, Family::LinearSvm, Family::NaiveBayes]
        );
        assert_eq!(families(&cfg.student_roster), vec![Family::DecisionTree, Family::RandomForest]);
        assert_eq!(cfg.cv.k, 5);
        assert_eq!(cfg.cv.seed, 7);
        assert!(!cfg.cv.stratified);
    }

    #[test]
    fn empty_file_gives_the_defaults() {
        let cfg = parse_pipeline_config("# nothing but comments\n\n").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
    }

    #[test]
    fn master_seed_reseeds_rosters_and_cv_wherever_it_appears() {
        let cfg = parse_pipeline_config("pipeline.teacher_roster:dt\npipeline.seed:9\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.cv.seed, 9);
        assert_eq!(cfg.teacher_roster[0].seed, 9);
        assert_eq!(cfg.student_roster[0].seed, 9);
    }

    #[test]
    fn cv_seed_override_beats_the_master_seed() {
        let cfg = parse_pipeline_config("pipeline.seed:9\ncv.seed:3\n").unwrap();
        assert_eq!(cfg.cv.seed, 3);
        assert_eq!(cfg.teacher_roster[0].seed, 9);
    }

    #[test]
    fn unknown_repeated_and_malformed_keys_are_rejected() {
        let unknown = parse_pipeline_config("pipeline.shards:4\n").unwrap_err();
        assert!(unknown.to_string().contains("unknown key `pipeline.shards`"));

        let repeated = parse_pipeline_config("cv.k:5\ncv.k:6\n").unwrap_err();
        assert!(repeated.to_string().contains("already set on line 1"));

        let bare = parse_pipeline_config("just some words\n").unwrap_err();
        assert!(bare.to_string().contains("expected `key:value`"));

        let bad_number = parse_pipeline_config("cv.k:many\n").unwrap_err();
        assert!(bad_number.to_string().contains("bad value `many`"));

        let bad_bool = parse_pipeline_config("cv.stratified:yes\n").unwrap_err();
        assert!(bad_bool.to_string().contains("expects true or false"));

        for err in [unknown, repeated, bare, bad_number, bad_bool] {
            assert_eq!(err.exit_code(), crate::exit::EXIT_USAGE);
        }
    }

    #[test]
    fn rosters_reject_unknown_families_and_empty_entries() {
        let unknown = parse_roster("dt,boost", 0).unwrap_err();
        assert!(unknown.to_string().contains("unknown classifier family `boost`"));
        assert_eq!(unknown.exit_code(), crate::exit::EXIT_USAGE);

        let empty = parse_roster("dt,,rf", 0).unwrap_err();
        assert!(empty.to_string().contains("empty entry"));
    }
}
