//! Column-major training view. Row-major `Dataset`s are convenient at
//! the edges, but every trainer wants per-column access and integer
//! category codes, so training starts by building one of these.

use crate::data::{ColumnKind, Dataset, FeatureValue, Label};
use crate::scalar::Scalar;

pub(crate) enum ColumnValues<F> {
    Continuous(Vec<F>),
    /// `codes[i]` indexes into `vocab`, which is sorted, so code order
    /// is token order.
    Categorical { codes: Vec<u32>, vocab: Vec<String> },
}

pub(crate) struct ColumnarView<F> {
    pub columns: Vec<ColumnValues<F>>,
    /// One flag per row; `true` means malicious.
    pub labels: Vec<bool>,
    pub n_rows: usize,
}

impl<F: Scalar> ColumnarView<F> {
    pub fn from_dataset(ds: &Dataset<F>) -> Self {
        let n_rows = ds.len();
        let mut columns = Vec::with_capacity(ds.schema().feature_count());
        for (c, column) in ds.schema().columns().iter().enumerate() {
            match column.kind {
                ColumnKind::Continuous => {
                    let mut values = Vec::with_capacity(n_rows);
                    for row in ds.rows() {
                        match &row.values[c] {
                            FeatureValue::Number(v) => values.push(*v),
                            FeatureValue::Category(_) => unreachable!("dataset validated on construction"),
                        }
                    }
                    columns.push(ColumnValues::Continuous(values));
                }
                ColumnKind::Categorical => {
                    let mut vocab: Vec<String> = ds
                        .rows()
                        .iter()
                        .map(|row| match &row.values[c] {
                            FeatureValue::Category(t) => t.clone(),
                            FeatureValue::Number(_) => unreachable!("dataset validated on construction"),
                        })
                        .collect();
                    vocab.sort_unstable();
                    vocab.dedup();
                    let codes = ds
                        .rows()
                        .iter()
                        .map(|row| match &row.values[c] {
                            FeatureValue::Category(t) => {
                                vocab.binary_search(t).expect("token came from this column") as u32
                            }
                            FeatureValue::Number(_) => unreachable!(),
                        })
                        .collect();
                    columns.push(ColumnValues::Categorical { codes, vocab });
                }
            }
        }
        let labels = ds
            .rows()
            .iter()
            .map(|row| row.label == Some(Label::Malicious))
            .collect();
        ColumnarView { columns, labels, n_rows }
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// (benign, malicious) counts over the given row indices.
    pub fn count_classes(&self, rows: &[usize]) -> (usize, usize) {
        let malicious = rows.iter().filter(|&&i| self.labels[i]).count();
        (rows.len() - malicious, malicious)
    }
}
