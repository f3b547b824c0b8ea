//! Dataset schema, CSV ingestion, label normalization, and the
//! sensitive/public/test three-way split.
//!
//! The on-disk formats are deliberately plain: comma-separated records
//! with no quoting (a quoted field is rejected), and a line-oriented
//! schema file (`name:kind` per feature column, then `label:`,
//! `negative:`, and optionally `positive:`). See the repository README
//! for the exact grammar.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::scalar::Scalar;

/// Names with directive meaning in the schema file; feature columns
/// may not use them.
const RESERVED_NAMES: [&str; 3] = ["label", "negative", "positive"];
const DEFAULT_POSITIVE_LABEL: &str = "malicious";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnKind::Continuous => f.write_str("continuous"),
            ColumnKind::Categorical => f.write_str("categorical"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// Column layout plus the label vocabulary: which token means benign
/// and which token to emit for malicious rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<Column>,
    label_column: String,
    negative_label: String,
    positive_label: String,
}

impl Schema {
    pub fn new(
        columns: Vec<Column>,
        label_column: impl Into<String>,
        negative_label: impl Into<String>,
        positive_label: impl Into<String>,
    ) -> Result<Self> {
        let schema = Schema {
            columns,
            label_column: label_column.into(),
            negative_label: negative_label.into(),
            positive_label: positive_label.into(),
        };
        schema.validate()?;
        Ok(schema)
    }

    fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::Config("schema needs at least one feature column".into()));
        }
        let mut seen = BTreeSet::new();
        for col in &self.columns {
            check_token(&col.name, "column name")?;
            if RESERVED_NAMES.contains(&col.name.as_str()) {
                return Err(Error::Config(format!(
                    "column name `{}` is reserved by the schema grammar",
                    col.name
                )));
            }
            if !seen.insert(col.name.as_str()) {
                return Err(Error::Config(format!("duplicate column name `{}`", col.name)));
            }
            if col.name == self.label_column {
                return Err(Error::Config(format!(
                    "label column `{}` must not appear among feature columns",
                    col.name
                )));
            }
        }
        check_token(&self.label_column, "label column name")?;
        check_token(&self.negative_label, "negative label token")?;
        check_token(&self.positive_label, "positive label token")?;
        if self.negative_label == self.positive_label {
            return Err(Error::Config("negative and positive label tokens must differ".into()));
        }
        Ok(())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn feature_count(&self) -> usize {
        self.columns.len()
    }

    pub fn label_column(&self) -> &str {
        &self.label_column
    }

    pub fn negative_label(&self) -> &str {
        &self.negative_label
    }

    pub fn positive_label(&self) -> &str {
        &self.positive_label
    }

    /// Indices of continuous columns, in schema order.
    pub fn continuous_indices(&self) -> Vec<usize> {
        self.indices_of(ColumnKind::Continuous)
    }

    /// Indices of categorical columns, in schema order.
    pub fn categorical_indices(&self) -> Vec<usize> {
        self.indices_of(ColumnKind::Categorical)
    }

    fn indices_of(&self, kind: ColumnKind) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }

    /// Canonical text form; also the schema-file serialization.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for col in &self.columns {
            out.push_str(&col.name);
            out.push(':');
            out.push_str(&col.kind.to_string());
            out.push('\n');
        }
        out.push_str(&format!("label:{}\n", self.label_column));
        out.push_str(&format!("negative:{}\n", self.negative_label));
        out.push_str(&format!("positive:{}\n", self.positive_label));
        out
    }

    /// Hex SHA-256 of the canonical text form. Models carry this and
    /// refuse data from a different schema.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        hex_string(&digest)
    }

    /// Parse the line-oriented schema grammar. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        let mut label_column: Option<String> = None;
        let mut negative: Option<String> = None;
        let mut positive: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected `name:kind` or a directive, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "label" => set_once(&mut label_column, value, "label", lineno)?,
                "negative" => set_once(&mut negative, value, "negative", lineno)?,
                "positive" => set_once(&mut positive, value, "positive", lineno)?,
                name => {
                    if label_column.is_some() || negative.is_some() || positive.is_some() {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!(
                                "feature column `{name}` after directives; directives must come last"
                            ),
                        });
                    }
                    let kind = match value {
                        "continuous" => ColumnKind::Continuous,
                        "categorical" => ColumnKind::Categorical,
                        other => {
                            return Err(Error::Parse {
                                line: lineno,
                                message: format!(
                                    "unknown column kind `{other}` (expected continuous|categorical)"
                                ),
                            })
                        }
                    };
                    columns.push(Column { name: name.to_string(), kind });
                }
            }
        }
        let label_column = label_column
            .ok_or_else(|| Error::Config("schema file missing `label:` directive".into()))?;
        let negative = negative
            .ok_or_else(|| Error::Config("schema file missing `negative:` directive".into()))?;
        let positive = positive.unwrap_or_else(|| DEFAULT_POSITIVE_LABEL.to_string());
        Schema::new(columns, label_column, negative, positive)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Schema::parse(&text)
    }

    pub fn to_file(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.canonical_text())?;
        Ok(())
    }
}

fn set_once(slot: &mut Option<String>, value: &str, key: &str, line: usize) -> Result<()> {
    if slot.is_some() {
        return Err(Error::Parse {
            line,
            message: format!("duplicate `{key}:` directive"),
        });
    }
    *slot = Some(value.to_string());
    Ok(())
}

fn check_token(token: &str, what: &str) -> Result<()> {
    if token.is_empty() {
        return Err(Error::Config(format!("{what} must be non-empty")));
    }
    if token.contains([',', ':', '"', '\n', '\r']) {
        return Err(Error::Config(format!(
            "{what} `{token}` contains a character reserved by the CSV/schema grammar"
        )));
    }
    Ok(())
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Binary class label. `Malicious` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Benign,
    Malicious,
}

impl Label {
    pub fn is_malicious(self) -> bool {
        matches!(self, Label::Malicious)
    }
}

/// One cell of a record: a finite number or a verbatim category token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureValue<F> {
    Number(F),
    Category(String),
}

impl<F: Scalar> FeatureValue<F> {
    pub fn kind(&self) -> ColumnKind {
        match self {
            FeatureValue::Number(_) => ColumnKind::Continuous,
            FeatureValue::Category(_) => ColumnKind::Categorical,
        }
    }
}

/// One flow record: 41 feature values for the packaged profile, plus an
/// optional label when the record belongs to a labeled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<F> {
    pub values: Vec<FeatureValue<F>>,
    pub label: Option<Label>,
}

impl<F: Scalar> FeatureVector<F> {
    pub fn new(values: Vec<FeatureValue<F>>, label: Option<Label>) -> Self {
        FeatureVector { values, label }
    }

    /// Structural conformance against a schema: arity and per-column kind.
    pub fn conforms_to(&self, schema: &Schema) -> Result<()> {
        if self.values.len() != schema.feature_count() {
            return Err(Error::Contract(format!(
                "row has {} values, schema expects {}",
                self.values.len(),
                schema.feature_count()
            )));
        }
        for (value, column) in self.values.iter().zip(schema.columns()) {
            if value.kind() != column.kind {
                return Err(Error::Contract(format!(
                    "column `{}` expects a {} value",
                    column.name, column.kind
                )));
            }
            if let FeatureValue::Number(x) = value {
                if !x.is_finite() {
                    return Err(Error::Contract(format!(
                        "column `{}` holds a non-finite number",
                        column.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Ordered collection of feature vectors sharing one schema.
///
/// Immutable after construction; `labeled` is all-or-nothing across rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<F> {
    schema: Schema,
    rows: Vec<FeatureVector<F>>,
    labeled: bool,
}

impl<F: Scalar> Dataset<F> {
    pub fn new(schema: Schema, rows: Vec<FeatureVector<F>>, labeled: bool) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            row.conforms_to(&schema)
                .map_err(|e| Error::Contract(format!("row {}: {e}", i + 1)))?;
            if labeled && row.label.is_none() {
                return Err(Error::State(format!("row {} of a labeled dataset has no label", i + 1)));
            }
            if !labeled && row.label.is_some() {
                return Err(Error::State(format!(
                    "row {} of an unlabeled dataset carries a label",
                    i + 1
                )));
            }
        }
        Ok(Dataset { schema, rows, labeled })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[FeatureVector<F>] {
        &self.rows
    }

    pub fn labeled(&self) -> bool {
        self.labeled
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (benign, malicious) row counts. Zero for unlabeled rows.
    pub fn class_counts(&self) -> (usize, usize) {
        let malicious = self
            .rows
            .iter()
            .filter(|r| r.label == Some(Label::Malicious))
            .count();
        let benign = self
            .rows
            .iter()
            .filter(|r| r.label == Some(Label::Benign))
            .count();
        (benign, malicious)
    }

    /// Copy of this dataset with all labels removed.
    pub fn strip_labels(&self) -> Dataset<F> {
        let rows = self
            .rows
            .iter()
            .map(|r| FeatureVector::new(r.values.clone(), None))
            .collect();
        Dataset {
            schema: self.schema.clone(),
            rows,
            labeled: false,
        }
    }

    /// Copy of this dataset carrying the given labels, in row order.
    pub fn with_labels(&self, labels: &[Label]) -> Result<Dataset<F>> {
        if labels.len() != self.rows.len() {
            return Err(Error::Contract(format!(
                "{} labels for {} rows",
                labels.len(),
                self.rows.len()
            )));
        }
        let rows = self
            .rows
            .iter()
            .zip(labels)
            .map(|(r, &label)| FeatureVector::new(r.values.clone(), Some(label)))
            .collect();
        Ok(Dataset {
            schema: self.schema.clone(),
            rows,
            labeled: true,
        })
    }

    /// Row subset by index, preserving the given order.
    pub(crate) fn select(&self, indices: &[usize]) -> Dataset<F> {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        Dataset {
            schema: self.schema.clone(),
            rows,
            labeled: self.labeled,
        }
    }
}

/// Collapse a raw label token to the binary vocabulary: the schema's
/// negative token means benign, anything else means malicious.
pub fn normalize_label(raw: &str, schema: &Schema) -> Label {
    if raw == schema.negative_label() {
        Label::Benign
    } else {
        Label::Malicious
    }
}

/// Whether the loader should expect a trailing label column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelMode {
    /// Decide from the first record's arity.
    #[default]
    Auto,
    /// Records must carry a label column.
    Required,
    /// Records must not carry a label column.
    Absent,
}

/// Loader options beyond the schema itself.
#[derive(Debug, Clone, Default)]
pub struct CsvReadOptions {
    pub has_header: bool,
    pub labels: LabelMode,
    /// When set, any label token outside this set is rejected.
    pub closed_label_vocabulary: Option<BTreeSet<String>>,
}

/// Load a CSV file against a schema. Tokens are trimmed of surrounding
/// whitespace before parsing; quoting is not supported and any field
/// starting with `"` is a parse error.
pub fn load_dataset<F: Scalar>(
    path: impl AsRef<Path>,
    schema: &Schema,
    opts: &CsvReadOptions,
) -> Result<Dataset<F>> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text, schema, opts)
}

/// Convenience wrapper: load a file that must carry labels.
pub fn load_labeled<F: Scalar>(
    path: impl AsRef<Path>,
    schema: &Schema,
    has_header: bool,
) -> Result<Dataset<F>> {
    load_dataset(
        path,
        schema,
        &CsvReadOptions {
            has_header,
            labels: LabelMode::Required,
            ..CsvReadOptions::default()
        },
    )
}

/// Convenience wrapper: load a file that must not carry labels.
pub fn load_unlabeled<F: Scalar>(
    path: impl AsRef<Path>,
    schema: &Schema,
    has_header: bool,
) -> Result<Dataset<F>> {
    load_dataset(
        path,
        schema,
        &CsvReadOptions {
            has_header,
            labels: LabelMode::Absent,
            ..CsvReadOptions::default()
        },
    )
}

pub(crate) fn parse_csv<F: Scalar>(
    text: &str,
    schema: &Schema,
    opts: &CsvReadOptions,
) -> Result<Dataset<F>> {
    let feature_count = schema.feature_count();
    let mut lines = text.lines().enumerate();
    if opts.has_header {
        // Header contents are not validated; files in the wild disagree
        // on label-column naming.
        lines.next();
    }

    let mut rows: Vec<FeatureVector<F>> = Vec::new();
    let mut labeled: Option<bool> = match opts.labels {
        LabelMode::Auto => None,
        LabelMode::Required => Some(true),
        LabelMode::Absent => Some(false),
    };

    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let labeled = *labeled.get_or_insert_with(|| fields.len() == feature_count + 1);
        let expected = if labeled { feature_count + 1 } else { feature_count };
        if fields.len() != expected {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let mut values = Vec::with_capacity(feature_count);
        for (field, column) in fields[..feature_count].iter().zip(schema.columns()) {
            if field.starts_with('"') {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("quoted field in column `{}`; quoting is not supported", column.name),
                });
            }
            match column.kind {
                ColumnKind::Continuous => {
                    let number: F = field.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("column `{}`: `{field}` is not a number", column.name),
                    })?;
                    if !number.is_finite() {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("column `{}`: `{field}` is not finite", column.name),
                        });
                    }
                    values.push(FeatureValue::Number(number));
                }
                ColumnKind::Categorical => {
                    if field.is_empty() {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("column `{}`: empty category token", column.name),
                        });
                    }
                    values.push(FeatureValue::Category((*field).to_string()));
                }
            }
        }
        let label = if labeled {
            let raw = fields[feature_count];
            if raw.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    message: "empty label token".into(),
                });
            }
            if raw.starts_with('"') {
                return Err(Error::Parse {
                    line: lineno,
                    message: "quoted label token; quoting is not supported".into(),
                });
            }
            if let Some(vocab) = &opts.closed_label_vocabulary {
                if !vocab.contains(raw) {
                    return Err(Error::Label(format!(
                        "unknown label token `{raw}` at line {lineno}"
                    )));
                }
            }
            Some(normalize_label(raw, schema))
        } else {
            None
        };
        rows.push(FeatureVector::new(values, label));
    }

    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no rows".into(),
        });
    }
    let labeled = labeled.unwrap_or(false);
    Dataset::new(schema.clone(), rows, labeled)
}

/// Write a dataset as CSV. Labeled rows get the schema's negative or
/// positive token in a trailing label column. Numbers are rendered in
/// shortest round-trip decimal form, so `load` of the output reproduces
/// the dataset exactly.
pub fn write_dataset<F: Scalar>(
    ds: &Dataset<F>,
    path: impl AsRef<Path>,
    write_header: bool,
) -> Result<()> {
    let mut out = String::new();
    if write_header {
        let mut names: Vec<&str> = ds.schema().columns().iter().map(|c| c.name.as_str()).collect();
        if ds.labeled() {
            names.push(ds.schema().label_column());
        }
        out.push_str(&names.join(","));
        out.push('\n');
    }
    for row in ds.rows() {
        let mut first = true;
        for value in &row.values {
            if !first {
                out.push(',');
            }
            first = false;
            match value {
                FeatureValue::Number(n) => out.push_str(&n.to_string()),
                FeatureValue::Category(token) => {
                    check_token(token, "category token")
                        .map_err(|_| Error::Contract(format!("unwritable category token `{token}`")))?;
                    out.push_str(token);
                }
            }
        }
        if let Some(label) = row.label {
            out.push(',');
            out.push_str(match label {
                Label::Benign => ds.schema().negative_label(),
                Label::Malicious => ds.schema().positive_label(),
            });
        }
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Counts and seed for the sensitive/public/test partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub labeled_count: usize,
    pub unlabeled_count: usize,
    pub test_count: usize,
    pub seed: u64,
    /// Off by default; the reference procedure is a plain shuffle.
    #[serde(default)]
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(labeled_count: usize, unlabeled_count: usize, test_count: usize, seed: u64) -> Self {
        SplitSpec {
            labeled_count,
            unlabeled_count,
            test_count,
            seed,
            stratified: false,
        }
    }

    pub fn total(&self) -> usize {
        self.labeled_count + self.unlabeled_count + self.test_count
    }
}

/// Shuffle the source with a seed-derived RNG, then cut the first
/// `labeled_count + unlabeled_count + test_count` rows into the three
/// parts. The public part has its labels deleted.
pub fn split_dataset<F: Scalar>(
    source: &Dataset<F>,
    spec: &SplitSpec,
) -> Result<(Dataset<F>, Dataset<F>, Dataset<F>)> {
    if !source.labeled() {
        return Err(Error::State("split requires a labeled source dataset".into()));
    }
    if spec.total() > source.len() {
        return Err(Error::Size(format!(
            "requested {} rows from a source of {}",
            spec.total(),
            source.len()
        )));
    }

    let (sensitive_idx, public_idx, test_idx) = if spec.stratified {
        stratified_partition(source, spec)
    } else {
        let mut indices: Vec<usize> = (0..source.len()).collect();
        indices.shuffle(&mut rng::stream(spec.seed, Purpose::DatasetShuffle, 0));
        let sensitive = indices[..spec.labeled_count].to_vec();
        let public = indices[spec.labeled_count..spec.labeled_count + spec.unlabeled_count].to_vec();
        let test = indices[spec.labeled_count + spec.unlabeled_count..spec.total()].to_vec();
        (sensitive, public, test)
    };

    let sensitive = source.select(&sensitive_idx);
    let public = source.select(&public_idx).strip_labels();
    let test = source.select(&test_idx);
    Ok((sensitive, public, test))
}

/// Per-class proportional allocation (largest remainder), then a
/// per-part shuffle so output rows are not class-sorted.
fn stratified_partition<F: Scalar>(
    source: &Dataset<F>,
    spec: &SplitSpec,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, row) in source.rows().iter().enumerate() {
        match row.label {
            Some(Label::Benign) => by_class[0].push(i),
            Some(Label::Malicious) => by_class[1].push(i),
            None => unreachable!("split source is labeled"),
        }
    }
    for (c, pool) in by_class.iter_mut().enumerate() {
        pool.shuffle(&mut rng::stream(spec.seed, Purpose::DatasetShuffle, 1 + c as u64));
    }

    let n = source.len() as f64;
    let counts = [spec.labeled_count, spec.unlabeled_count, spec.test_count];
    let mut parts: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut cursor = [0usize; 2];
    for (p, &want) in counts.iter().enumerate() {
        // Largest-remainder split of `want` across the two class pools.
        let ideal0 = want as f64 * by_class[0].len() as f64 / n;
        let mut take0 = ideal0.floor() as usize;
        let mut take1 = want - take0;
        if (ideal0 - take0 as f64) >= 0.5 && take0 < by_class[0].len() - cursor[0].min(by_class[0].len()) {
            take0 += 1;
            take1 = want - take0;
        }
        // Clamp to what remains in each pool.
        let avail0 = by_class[0].len() - cursor[0];
        let avail1 = by_class[1].len() - cursor[1];
        if take0 > avail0 {
            take0 = avail0;
            take1 = want - take0;
        }
        if take1 > avail1 {
            take1 = avail1;
            take0 = want - take1;
        }
        let mut rows: Vec<usize> = Vec::with_capacity(want);
        rows.extend_from_slice(&by_class[0][cursor[0]..cursor[0] + take0]);
        rows.extend_from_slice(&by_class[1][cursor[1]..cursor[1] + take1]);
        cursor[0] += take0;
        cursor[1] += take1;
        rows.shuffle(&mut rng::stream(spec.seed, Purpose::DatasetShuffle, 4 + p as u64));
        parts[p] = rows;
    }
    let [a, b, c] = parts;
    (a, b, c)
}

/// Fractions of benign and malicious rows; they sum to one.
pub fn class_balance<F: Scalar>(ds: &Dataset<F>) -> Result<(F, F)> {
    if !ds.labeled() {
        return Err(Error::State("class balance needs a labeled dataset".into()));
    }
    if ds.is_empty() {
        return Err(Error::State("class balance needs a non-empty dataset".into()));
    }
    let (benign, malicious) = ds.class_counts();
    let total = F::from_count(ds.len());
    Ok((
        F::from_count(benign) / total,
        F::from_count(malicious) / total,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use tempfile::NamedTempFile;

    pub(crate) fn kdd_like_schema() -> Schema {
        Schema::new(
            vec![
                Column { name: "duration".into(), kind: ColumnKind::Continuous },
                Column { name: "protocol".into(), kind: ColumnKind::Categorical },
                Column { name: "src_bytes".into(), kind: ColumnKind::Continuous },
            ],
            "class",
            "normal",
            "malicious",
        )
        .unwrap()
    }

    fn write_temp(content: &str) -> NamedTempFile {
        let mut f = NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_labeled_rows_and_collapses_attack_names() {
        let schema = kdd_like_schema();
        let f = write_temp("0,tcp,181,normal\n2,udp,239,smurf\n0,tcp,235,normal\n");
        let ds = load_labeled::<f64>(f.path(), &schema, false).unwrap();
        assert!(ds.labeled());
        assert_eq!(ds.len(), 3);
        let labels: Vec<_> = ds.rows().iter().map(|r| r.label.unwrap()).collect();
        assert_eq!(labels, vec![Label::Benign, Label::Malicious, Label::Benign]);
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        let schema = kdd_like_schema();
        let f = write_temp("");
        let err = load_labeled::<f64>(f.path(), &schema, false).unwrap_err();
        match err {
            Error::Parse { message, .. } => assert_eq!(message, "no rows"),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn text_in_continuous_column_reports_line() {
        let schema = kdd_like_schema();
        let f = write_temp("0,tcp,181,normal\nbad,tcp,3,normal\n");
        let err = load_labeled::<f64>(f.path(), &schema, false).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn header_shifts_line_numbers() {
        let schema = kdd_like_schema();
        let f = write_temp("duration,protocol,src_bytes,class\n0,tcp,x,normal\n");
        let err = load_labeled::<f64>(f.path(), &schema, true).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn quoted_field_is_rejected() {
        let schema = kdd_like_schema();
        let f = write_temp("0,\"tcp\",181,normal\n");
        let err = load_labeled::<f64>(f.path(), &schema, false).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "got {err}");
    }

    #[test]
    fn nonfinite_numbers_are_rejected() {
        let schema = kdd_like_schema();
        let f = write_temp("inf,tcp,181,normal\n");
        let err = load_labeled::<f64>(f.path(), &schema, false).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "got {err}");
    }

    #[test]
    fn closed_vocabulary_rejects_unknown_tokens() {
        let schema = kdd_like_schema();
        let f = write_temp("0,tcp,181,normal\n1,tcp,2,weird\n");
        let vocab: BTreeSet<String> = ["normal", "smurf"].iter().map(|s| s.to_string()).collect();
        let opts = CsvReadOptions {
            has_header: false,
            labels: LabelMode::Required,
            closed_label_vocabulary: Some(vocab),
        };
        let err = load_dataset::<f64>(f.path(), &schema, &opts).unwrap_err();
        assert!(matches!(err, Error::Label(_)), "got {err}");
    }

    #[test]
    fn auto_mode_detects_unlabeled_arity() {
        let schema = kdd_like_schema();
        let f = write_temp("0,tcp,181\n2,udp,239\n");
        let ds = load_dataset::<f64>(f.path(), &schema, &CsvReadOptions::default()).unwrap();
        assert!(!ds.labeled());
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn whitespace_is_trimmed_before_parsing() {
        let schema = kdd_like_schema();
        let f = write_temp(" 0 , tcp , 181 , normal \n");
        let ds = load_labeled::<f64>(f.path(), &schema, false).unwrap();
        assert_eq!(ds.rows()[0].label, Some(Label::Benign));
        assert_eq!(
            ds.rows()[0].values[1],
            FeatureValue::Category("tcp".to_string())
        );
    }

    #[test]
    fn normalize_label_matches_contract() {
        let schema = kdd_like_schema();
        assert_eq!(normalize_label("normal", &schema), Label::Benign);
        assert_eq!(normalize_label("neptune", &schema), Label::Malicious);
        // Idempotence over the output vocabulary.
        assert_eq!(normalize_label(schema.negative_label(), &schema), Label::Benign);
        assert_eq!(normalize_label(schema.positive_label(), &schema), Label::Malicious);
    }

    #[test]
    fn roundtrip_write_load_preserves_everything() {
        let schema = kdd_like_schema();
        let f = write_temp("0.5,tcp,181,normal\n2,udp,0.1,teardrop\n7,icmp,1032,normal\n");
        let ds = load_labeled::<f64>(f.path(), &schema, false).unwrap();
        let out = NamedTempFile::new().unwrap();
        write_dataset(&ds, out.path(), true).unwrap();
        let back = load_labeled::<f64>(out.path(), &schema, true).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn split_produces_requested_sizes_and_strips_public_labels() {
        let schema = kdd_like_schema();
        let rows: Vec<FeatureVector<f64>> = (0..100)
            .map(|i| {
                FeatureVector::new(
                    vec![
                        FeatureValue::Number(i as f64),
                        FeatureValue::Category("tcp".into()),
                        FeatureValue::Number(0.0),
                    ],
                    Some(if i % 3 == 0 { Label::Malicious } else { Label::Benign }),
                )
            })
            .collect();
        let ds = Dataset::new(schema, rows, true).unwrap();
        let spec = SplitSpec::new(50, 30, 20, 9);
        let (sens, public, test) = split_dataset(&ds, &spec).unwrap();
        assert_eq!((sens.len(), public.len(), test.len()), (50, 30, 20));
        assert!(sens.labeled() && test.labeled());
        assert!(!public.labeled());
        assert!(public.rows().iter().all(|r| r.label.is_none()));

        // Disjoint parts: identify rows by their unique first value.
        let mut seen: BTreeSet<u64> = BTreeSet::new();
        for part in [&sens, &public, &test] {
            for row in part.rows() {
                let FeatureValue::Number(v) = row.values[0] else { panic!() };
                assert!(seen.insert(v as u64), "row duplicated across parts");
            }
        }

        // Same seed, same partition.
        let (sens2, public2, test2) = split_dataset(&ds, &spec).unwrap();
        assert_eq!(sens, sens2);
        assert_eq!(public, public2);
        assert_eq!(test, test2);
    }

    #[test]
    fn split_rejects_oversized_requests() {
        let schema = kdd_like_schema();
        let rows: Vec<FeatureVector<f64>> = (0..10)
            .map(|_| {
                FeatureVector::new(
                    vec![
                        FeatureValue::Number(1.0),
                        FeatureValue::Category("tcp".into()),
                        FeatureValue::Number(0.0),
                    ],
                    Some(Label::Benign),
                )
            })
            .collect();
        let ds = Dataset::new(schema, rows, true).unwrap();
        let err = split_dataset(&ds, &SplitSpec::new(8, 2, 1, 0)).unwrap_err();
        assert!(matches!(err, Error::Size(_)), "got {err}");
    }

    #[test]
    fn degenerate_split_keeps_everything_in_first_part() {
        let schema = kdd_like_schema();
        let rows: Vec<FeatureVector<f64>> = (0..10)
            .map(|i| {
                FeatureVector::new(
                    vec![
                        FeatureValue::Number(i as f64),
                        FeatureValue::Category("tcp".into()),
                        FeatureValue::Number(0.0),
                    ],
                    Some(Label::Benign),
                )
            })
            .collect();
        let ds = Dataset::new(schema, rows, true).unwrap();
        let (sens, public, test) = split_dataset(&ds, &SplitSpec::new(10, 0, 0, 1)).unwrap();
        assert_eq!(sens.len(), 10);
        assert!(public.is_empty() && test.is_empty());
    }

    #[test]
    fn class_balance_counts_by_hand() {
        let schema = kdd_like_schema();
        let mk = |label| {
            FeatureVector::<f64>::new(
                vec![
                    FeatureValue::Number(0.0),
                    FeatureValue::Category("tcp".into()),
                    FeatureValue::Number(0.0),
                ],
                Some(label),
            )
        };
        let mut rows = vec![mk(Label::Malicious), mk(Label::Malicious), mk(Label::Malicious)];
        rows.extend((0..7).map(|_| mk(Label::Benign)));
        let ds = Dataset::new(schema, rows, true).unwrap();
        let (b, m) = class_balance(&ds).unwrap();
        assert!((b - 0.7).abs() < 1e-12);
        assert!((m - 0.3).abs() < 1e-12);
        assert!((b + m - 1.0).abs() < 1e-12);

        let err = class_balance(&ds.strip_labels()).unwrap_err();
        assert!(matches!(err, Error::State(_)));
    }

    #[test]
    fn schema_file_roundtrip_and_fingerprint() {
        let schema = kdd_like_schema();
        let text = schema.canonical_text();
        let parsed = Schema::parse(&text).unwrap();
        assert_eq!(schema, parsed);
        assert_eq!(schema.fingerprint(), parsed.fingerprint());
        assert_eq!(schema.fingerprint().len(), 64);
    }

    #[test]
    fn schema_grammar_errors() {
        assert!(Schema::parse("a:continuous\n").is_err()); // missing directives
        assert!(Schema::parse("a:continuous\nlabel:class\nnegative:normal\nb:continuous\n").is_err());
        assert!(Schema::parse("a:weird\nlabel:c\nnegative:n\n").is_err());
        assert!(Schema::parse("a:continuous\na:continuous\nlabel:c\nnegative:n\n").is_err());
        // positive defaults when omitted
        let s = Schema::parse("a:continuous\nlabel:c\nnegative:n\n").unwrap();
        assert_eq!(s.positive_label(), "malicious");
    }

    #[test]
    fn dataset_rejects_mixed_labeling() {
        let schema = kdd_like_schema();
        let values = vec![
            FeatureValue::Number(0.0),
            FeatureValue::Category("tcp".into()),
            FeatureValue::Number(0.0),
        ];
        let rows = vec![
            FeatureVector::<f64>::new(values.clone(), Some(Label::Benign)),
            FeatureVector::new(values, None),
        ];
        assert!(Dataset::new(schema, rows, true).is_err());
    }
}
