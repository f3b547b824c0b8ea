//! Decision tree induction: greedy recursive partitioning that picks,
//! at each node, the rule with the highest information gain.
//!
//! Categorical columns split multiway over their observed tokens (with
//! a fallback branch for tokens first seen at prediction time);
//! continuous columns split binary at candidate thresholds placed at
//! midpoints between consecutive distinct sorted values.

use rand::seq::index::sample;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::columnar::{ColumnValues, ColumnarView};
use super::TreeParams;
use crate::data::{FeatureValue, Label};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Two-class Shannon entropy in bits from raw counts. The empty set
/// has entropy 0 by convention.
pub fn entropy<F: Scalar>(benign: usize, malicious: usize) -> F {
    let total = benign + malicious;
    if total == 0 {
        return F::zero();
    }
    let total_f = F::from_count(total);
    let mut h = F::zero();
    for count in [benign, malicious] {
        if count > 0 {
            let p = F::from_count(count) / total_f;
            h = h - p * p.log2();
        }
    }
    h
}

/// Information gain of a partition: parent entropy minus the
/// count-weighted mean of child entropies. The children must partition
/// the parent's class counts exactly. Tiny negative results from
/// rounding are clamped to zero.
pub fn information_gain<F: Scalar>(
    parent: (usize, usize),
    children: &[(usize, usize)],
) -> Result<F> {
    let (benign, malicious) = parent;
    let total = benign + malicious;
    if total == 0 {
        return Err(Error::Contract("information gain of an empty node".into()));
    }
    let sum: (usize, usize) = children
        .iter()
        .fold((0, 0), |acc, &(b, m)| (acc.0 + b, acc.1 + m));
    if sum != parent {
        return Err(Error::Contract(format!(
            "children counts {sum:?} do not partition parent {parent:?}"
        )));
    }
    let total_f = F::from_count(total);
    let mut weighted = F::zero();
    for &(b, m) in children {
        let n = b + m;
        if n > 0 {
            weighted = weighted + F::from_count(n) / total_f * entropy::<F>(b, m);
        }
    }
    let gain = entropy::<F>(benign, malicious) - weighted;
    Ok(gain.max(F::zero()))
}

/// Precomputed `k * log2(k)` for counts 0..=n. A node's scaled entropy
/// `n * H` is `table[n] - table[benign] - table[malicious]`, which
/// turns per-candidate gain evaluation into table lookups.
pub(crate) struct ScaledEntropy<F> {
    table: Vec<F>,
}

impl<F: Scalar> ScaledEntropy<F> {
    pub fn new(max_count: usize) -> Self {
        let mut table = Vec::with_capacity(max_count + 1);
        table.push(F::zero());
        for k in 1..=max_count {
            let k = k as f64;
            table.push(F::from_f64_lossy(k * k.log2()));
        }
        ScaledEntropy { table }
    }

    /// `n * H(benign, malicious)` where `n = benign + malicious`.
    #[inline]
    fn node_term(&self, benign: usize, malicious: usize) -> F {
        self.table[benign + malicious] - self.table[benign] - self.table[malicious]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode<F> {
    Leaf {
        label: Label,
        malicious_fraction: F,
        samples: usize,
    },
    NumberSplit {
        column: usize,
        threshold: F,
        le: usize,
        gt: usize,
    },
    CategorySplit {
        column: usize,
        /// (token, child index), sorted by token.
        branches: Vec<(String, usize)>,
        /// Child taken for tokens not seen in training: the branch
        /// that held the most training rows (ties toward the first).
        fallback: usize,
    },
}

/// Nodes in pre-order; index 0 is the root, children always come after
/// their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel<F> {
    pub nodes: Vec<TreeNode<F>>,
}

impl<F: Scalar> TreeModel<F> {
    pub fn predict_row(&self, values: &[FeatureValue<F>]) -> Result<(Label, F)> {
        let mut idx = 0;
        loop {
            let node = self
                .nodes
                .get(idx)
                .ok_or_else(|| Error::Integrity(format!("tree node index {idx} out of range")))?;
            match node {
                TreeNode::Leaf {
                    label,
                    malicious_fraction,
                    ..
                } => return Ok((*label, *malicious_fraction)),
                TreeNode::NumberSplit {
                    column,
                    threshold,
                    le,
                    gt,
                } => match values.get(*column) {
                    Some(FeatureValue::Number(x)) => {
                        idx = if *x <= *threshold { *le } else { *gt };
                    }
                    Some(FeatureValue::Category(_)) => {
                        return Err(Error::Contract(format!(
                            "column {column} holds a category but the model expects a number"
                        )))
                    }
                    None => {
                        return Err(Error::Contract(format!(
                            "row too short: no column {column}"
                        )))
                    }
                },
                TreeNode::CategorySplit {
                    column,
                    branches,
                    fallback,
                } => match values.get(*column) {
                    Some(FeatureValue::Category(token)) => {
                        idx = match branches.binary_search_by(|(t, _)| t.as_str().cmp(token)) {
                            Ok(pos) => branches[pos].1,
                            Err(_) => *fallback,
                        };
                    }
                    Some(FeatureValue::Number(_)) => {
                        return Err(Error::Contract(format!(
                            "column {column} holds a number but the model expects a category"
                        )))
                    }
                    None => {
                        return Err(Error::Contract(format!(
                            "row too short: no column {column}"
                        )))
                    }
                },
            }
        }
    }

    /// Longest root-to-leaf path measured in splits.
    pub fn depth(&self) -> usize {
        fn walk<F>(nodes: &[TreeNode<F>], idx: usize) -> usize {
            match &nodes[idx] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::NumberSplit { le, gt, .. } => 1 + walk(nodes, *le).max(walk(nodes, *gt)),
                TreeNode::CategorySplit { branches, .. } => {
                    1 + branches.iter().map(|(_, c)| walk(nodes, *c)).max().unwrap_or(0)
                }
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (&Label, &F, usize)> {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Leaf {
                label,
                malicious_fraction,
                samples,
            } => Some((label, malicious_fraction, *samples)),
            _ => None,
        })
    }

    /// Structural checks used after deserialization: child indices in
    /// range and strictly increasing past their parent (pre-order, so
    /// no cycles), branch lists non-empty and token-sorted, fallback
    /// pointing at a branch child, fractions within [0, 1].
    pub(crate) fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Integrity("tree has no nodes".into()));
        }
        let bad = |msg: String| Err(Error::Integrity(msg));
        for (idx, node) in self.nodes.iter().enumerate() {
            match node {
                TreeNode::Leaf {
                    malicious_fraction,
                    samples,
                    ..
                } => {
                    let f = malicious_fraction.to_f64().unwrap_or(f64::NAN);
                    if !(0.0..=1.0).contains(&f) {
                        return bad(format!("leaf {idx} malicious_fraction {f} outside [0,1]"));
                    }
                    if *samples == 0 {
                        return bad(format!("leaf {idx} has zero samples"));
                    }
                }
                TreeNode::NumberSplit { threshold, le, gt, .. } => {
                    if !threshold.is_finite() {
                        return bad(format!("split {idx} has a non-finite threshold"));
                    }
                    for child in [*le, *gt] {
                        if child <= idx || child >= self.nodes.len() {
                            return bad(format!("split {idx} points at invalid child {child}"));
                        }
                    }
                }
                TreeNode::CategorySplit {
                    branches, fallback, ..
                } => {
                    if branches.is_empty() {
                        return bad(format!("split {idx} has no branches"));
                    }
                    if !branches.windows(2).all(|w| w[0].0 < w[1].0) {
                        return bad(format!("split {idx} branches not strictly token-sorted"));
                    }
                    for (_, child) in branches {
                        if *child <= idx || *child >= self.nodes.len() {
                            return bad(format!("split {idx} points at invalid child {child}"));
                        }
                    }
                    if !branches.iter().any(|(_, c)| c == fallback) {
                        return bad(format!("split {idx} fallback is not one of its branches"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Train on every row of the view.
pub(crate) fn fit<F: Scalar>(view: &ColumnarView<F>, params: &TreeParams) -> Result<TreeModel<F>> {
    let table = ScaledEntropy::new(view.n_rows);
    let rows: Vec<usize> = (0..view.n_rows).collect();
    fit_rows(view, params, &table, rows, None)
}

/// Train on an explicit multiset of row indices, optionally sampling
/// `k` candidate columns per node (the random forest path). The
/// entropy table must cover `rows.len()`.
pub(crate) fn fit_rows<F: Scalar>(
    view: &ColumnarView<F>,
    params: &TreeParams,
    table: &ScaledEntropy<F>,
    mut rows: Vec<usize>,
    feature_sampling: Option<(ChaCha12Rng, usize)>,
) -> Result<TreeModel<F>> {
    if rows.is_empty() {
        return Err(Error::Training("decision tree needs at least one row".into()));
    }
    let subsample = match &feature_sampling {
        Some((_, k)) => (*k).min(view.n_columns()),
        None => view.n_columns(),
    };
    let mut trainer = Trainer {
        view,
        params,
        table,
        feature_rng: feature_sampling.map(|(rng, _)| rng),
        subsample,
        nodes: Vec::new(),
        num_scratch: Vec::new(),
        part_scratch: Vec::new(),
    };
    trainer.build(&mut rows, 0);
    Ok(TreeModel { nodes: trainer.nodes })
}

struct Trainer<'a, F: Scalar> {
    view: &'a ColumnarView<F>,
    params: &'a TreeParams,
    table: &'a ScaledEntropy<F>,
    feature_rng: Option<ChaCha12Rng>,
    subsample: usize,
    nodes: Vec<TreeNode<F>>,
    num_scratch: Vec<(F, bool)>,
    part_scratch: Vec<usize>,
}

enum Rule<F> {
    Number { threshold: F },
    Category,
}

struct Best<F> {
    scaled_gain: F,
    column: usize,
    rule: Rule<F>,
}

impl<'a, F: Scalar> Trainer<'a, F> {
    fn build(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let (benign, malicious) = self.view.count_classes(rows);
        let n = rows.len();
        if benign == 0
            || malicious == 0
            || depth >= self.params.max_depth
            || n < self.params.min_samples_split
        {
            return self.push_leaf(benign, malicious);
        }
        let best = self.best_split(rows, benign, malicious);
        let Some(best) = best else {
            return self.push_leaf(benign, malicious);
        };
        // Stop unless the gain strictly exceeds the epsilon. Gains are
        // compared in n-scaled form to keep the hot path in lookups.
        let eps_scaled = F::from_f64_lossy(self.params.ig_epsilon) * F::from_count(n);
        if best.scaled_gain <= eps_scaled {
            return self.push_leaf(benign, malicious);
        }

        let idx = self.nodes.len();
        // Placeholder patched after the children exist; keeps the
        // arena in pre-order.
        self.nodes.push(TreeNode::Leaf {
            label: Label::Malicious,
            malicious_fraction: F::zero(),
            samples: n,
        });

        match best.rule {
            Rule::Number { threshold } => {
                let le_len = self.partition_number(rows, best.column, threshold);
                let (le_rows, gt_rows) = rows.split_at_mut(le_len);
                let le = self.build(le_rows, depth + 1);
                let gt = self.build(gt_rows, depth + 1);
                self.nodes[idx] = TreeNode::NumberSplit {
                    column: best.column,
                    threshold,
                    le,
                    gt,
                };
            }
            Rule::Category => {
                let groups = self.partition_category(rows, best.column);
                let ColumnValues::Categorical { vocab, .. } = &self.view.columns[best.column]
                else {
                    unreachable!("categorical rule on categorical column")
                };
                let mut branches = Vec::with_capacity(groups.len());
                let mut fallback = 0usize;
                let mut fallback_samples = 0usize;
                let mut offset = 0usize;
                for (code, len) in groups {
                    let child_rows = &mut rows[offset..offset + len];
                    offset += len;
                    let child = self.build(child_rows, depth + 1);
                    branches.push((vocab[code as usize].clone(), child));
                    if len > fallback_samples {
                        fallback_samples = len;
                        fallback = child;
                    }
                }
                self.nodes[idx] = TreeNode::CategorySplit {
                    column: best.column,
                    branches,
                    fallback,
                };
            }
        }
        idx
    }

    fn push_leaf(&mut self, benign: usize, malicious: usize) -> usize {
        let n = benign + malicious;
        let label = if 2 * malicious >= n {
            Label::Malicious
        } else {
            Label::Benign
        };
        self.nodes.push(TreeNode::Leaf {
            label,
            malicious_fraction: F::from_count(malicious) / F::from_count(n),
            samples: n,
        });
        self.nodes.len() - 1
    }

    /// Candidate columns for this node, ascending so that equal gains
    /// resolve to the lowest column index.
    fn candidate_columns(&mut self) -> Vec<usize> {
        let n_cols = self.view.n_columns();
        if self.subsample >= n_cols {
            return (0..n_cols).collect();
        }
        let rng = self.feature_rng.as_mut().expect("subsampling implies an rng");
        let mut cols = sample(rng, n_cols, self.subsample).into_vec();
        cols.sort_unstable();
        cols
    }

    fn best_split(&mut self, rows: &[usize], benign: usize, malicious: usize) -> Option<Best<F>> {
        let parent_term = self.table.node_term(benign, malicious);
        let mut best: Option<Best<F>> = None;
        for column in self.candidate_columns() {
            let candidate = match &self.view.columns[column] {
                ColumnValues::Continuous(values) => {
                    self.best_number_split(rows, values, malicious, parent_term)
                }
                ColumnValues::Categorical { codes, vocab } => {
                    self.best_category_split(rows, codes, vocab.len(), parent_term)
                }
            };
            if let Some((scaled_gain, rule)) = candidate {
                let better = match &best {
                    None => true,
                    Some(b) => scaled_gain > b.scaled_gain,
                };
                if better {
                    best = Some(Best {
                        scaled_gain,
                        column,
                        rule,
                    });
                }
            }
        }
        best
    }

    fn best_number_split(
        &mut self,
        rows: &[usize],
        values: &[F],
        node_malicious: usize,
        parent_term: F,
    ) -> Option<(F, Rule<F>)> {
        let n = rows.len();
        let msl = self.params.min_samples_leaf;
        self.num_scratch.clear();
        self.num_scratch
            .extend(rows.iter().map(|&r| (values[r], self.view.labels[r])));
        self.num_scratch
            .sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("feature values are finite"));

        let two = F::from_count(2);
        let mut best: Option<(F, F)> = None; // (scaled_gain, threshold)
        let mut left_malicious = 0usize;
        for i in 0..n - 1 {
            let (v, is_malicious) = self.num_scratch[i];
            if is_malicious {
                left_malicious += 1;
            }
            let next = self.num_scratch[i + 1].0;
            if v >= next {
                continue;
            }
            let left = i + 1;
            let right = n - left;
            if left < msl || right < msl {
                continue;
            }
            let threshold = (v + next) / two;
            // Guard against the midpoint rounding onto either
            // neighbor, which would make the realized partition
            // disagree with the prefix counts.
            if !(threshold >= v && threshold < next) {
                continue;
            }
            let left_term = self.table.node_term(left - left_malicious, left_malicious);
            let right_malicious = node_malicious - left_malicious;
            let right_term = self.table.node_term(right - right_malicious, right_malicious);
            let scaled_gain = parent_term - left_term - right_term;
            let better = match best {
                None => true,
                Some((g, _)) => scaled_gain > g,
            };
            if better {
                best = Some((scaled_gain, threshold));
            }
        }
        best.map(|(g, threshold)| (g, Rule::Number { threshold }))
    }

    fn best_category_split(
        &self,
        rows: &[usize],
        codes: &[u32],
        vocab_len: usize,
        parent_term: F,
    ) -> Option<(F, Rule<F>)> {
        let msl = self.params.min_samples_leaf;
        let mut counts = vec![(0usize, 0usize); vocab_len];
        for &r in rows {
            let slot = &mut counts[codes[r] as usize];
            slot.0 += 1;
            if self.view.labels[r] {
                slot.1 += 1;
            }
        }
        let mut children_term = F::zero();
        let mut observed = 0usize;
        for &(n, m) in &counts {
            if n == 0 {
                continue;
            }
            if n < msl {
                return None;
            }
            observed += 1;
            children_term = children_term + self.table.node_term(n - m, m);
        }
        if observed < 2 {
            return None;
        }
        Some((parent_term - children_term, Rule::Category))
    }

    /// Stable in-place partition; returns the size of the `<=` side.
    fn partition_number(&mut self, rows: &mut [usize], column: usize, threshold: F) -> usize {
        let ColumnValues::Continuous(values) = &self.view.columns[column] else {
            unreachable!("number rule on continuous column")
        };
        self.part_scratch.clear();
        let mut le_end = 0usize;
        for i in 0..rows.len() {
            let r = rows[i];
            if values[r] <= threshold {
                rows[le_end] = r;
                le_end += 1;
            } else {
                self.part_scratch.push(r);
            }
        }
        rows[le_end..].copy_from_slice(&self.part_scratch);
        le_end
    }

    /// Stable in-place grouping by code; returns (code, group length)
    /// in ascending code order, which is ascending token order.
    fn partition_category(&mut self, rows: &mut [usize], column: usize) -> Vec<(u32, usize)> {
        let ColumnValues::Categorical { codes, vocab } = &self.view.columns[column] else {
            unreachable!("category rule on categorical column")
        };
        let mut counts = vec![0usize; vocab.len()];
        for &r in rows.iter() {
            counts[codes[r] as usize] += 1;
        }
        let mut groups = Vec::new();
        let mut cursors = vec![0usize; vocab.len()];
        let mut offset = 0usize;
        for (code, &count) in counts.iter().enumerate() {
            if count > 0 {
                groups.push((code as u32, count));
                cursors[code] = offset;
                offset += count;
            }
        }
        self.part_scratch.clear();
        self.part_scratch.resize(rows.len(), 0);
        for &r in rows.iter() {
            let code = codes[r] as usize;
            self.part_scratch[cursors[code]] = r;
            cursors[code] += 1;
        }
        rows.copy_from_slice(&self.part_scratch);
        groups
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{train_decision_tree, ClassifierSpec, Family, FamilyParams};
    use crate::data::{Column, ColumnKind, Dataset, FeatureVector, Schema};

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn entropy_hand_cases() {
        approx(entropy::<f64>(5, 5), 1.0, 1e-12);
        approx(entropy::<f64>(8, 0), 0.0, 1e-12);
        approx(entropy::<f64>(9, 5), 0.940286, 1e-6);
        approx(entropy::<f64>(0, 0), 0.0, 1e-12);
    }

    #[test]
    fn information_gain_hand_cases() {
        // Pure children recover the full parent entropy.
        let parent = (6, 4);
        let ig: f64 = information_gain(parent, &[(6, 0), (0, 4)]).unwrap();
        approx(ig, entropy::<f64>(6, 4), 1e-12);

        // A single child identical to the parent gains nothing.
        let ig: f64 = information_gain(parent, &[parent]).unwrap();
        approx(ig, 0.0, 1e-12);

        // Weather-style fixture: 14 rows, three observed branches.
        let ig: f64 = information_gain((9, 5), &[(2, 3), (4, 0), (3, 2)]).unwrap();
        approx(ig, 0.246750, 1e-6);
    }

    #[test]
    fn information_gain_rejects_nonpartitions() {
        assert!(information_gain::<f64>((3, 3), &[(3, 0), (1, 3)]).is_err());
        assert!(information_gain::<f64>((0, 0), &[]).is_err());
    }

    #[test]
    fn scaled_entropy_table_agrees_with_direct_formula() {
        let table = ScaledEntropy::<f64>::new(50);
        for b in 0..20 {
            for m in 0..20 {
                if b + m == 0 {
                    continue;
                }
                let direct = (b + m) as f64 * entropy::<f64>(b, m);
                approx(table.node_term(b, m), direct, 1e-9);
            }
        }
    }

    /// 14 rows over one informative categorical column (the fixture
    /// with IG 0.246750), one constant column, and one weak continuous
    /// column. The root must split on column 0.
    fn weather_fixture() -> Dataset<f64> {
        let schema = Schema::new(
            vec![
                Column { name: "outlook".into(), kind: ColumnKind::Categorical },
                Column { name: "noise".into(), kind: ColumnKind::Categorical },
                Column { name: "humidity".into(), kind: ColumnKind::Continuous },
            ],
            "class",
            "normal",
            "malicious",
        )
        .unwrap();
        // outlook groups: a -> (2 benign, 3 malicious), b -> (4, 0), c -> (3, 2)
        let spec: [(&str, bool); 14] = [
            ("a", false), ("a", false), ("a", true), ("a", true), ("a", true),
            ("b", false), ("b", false), ("b", false), ("b", false),
            ("c", false), ("c", false), ("c", false), ("c", true), ("c", true),
        ];
        let rows = spec
            .iter()
            .enumerate()
            .map(|(i, (token, malicious))| {
                FeatureVector::new(
                    vec![
                        FeatureValue::Category((*token).into()),
                        FeatureValue::Category("same".into()),
                        // Alternating values: the best binary cut is weak.
                        FeatureValue::Number((i % 2) as f64),
                    ],
                    Some(if *malicious { Label::Malicious } else { Label::Benign }),
                )
            })
            .collect();
        Dataset::new(schema, rows, true).unwrap()
    }

    #[test]
    fn weather_fixture_root_splits_on_the_highest_gain_column() {
        let ds = weather_fixture();
        let ig_outlook: f64 = information_gain((9, 5), &[(2, 3), (4, 0), (3, 2)]).unwrap();
        // The continuous column's only cut: humidity <= 0.5 gives
        // (benign, malicious) of (5, 2) / (4, 3).
        let ig_humidity: f64 = information_gain((9, 5), &[(5, 2), (4, 3)]).unwrap();
        assert!(ig_outlook > ig_humidity + 1e-3);

        let spec = ClassifierSpec::default_for(Family::DecisionTree, 0);
        let model = train_decision_tree(&ds, &spec).unwrap();
        let crate::classifiers::ModelBody::DecisionTree(tree) = &model.body else {
            panic!("expected a tree body")
        };
        match &tree.nodes[0] {
            TreeNode::CategorySplit { column, branches, .. } => {
                assert_eq!(*column, 0);
                let tokens: Vec<_> = branches.iter().map(|(t, _)| t.as_str()).collect();
                assert_eq!(tokens, vec!["a", "b", "c"]);
            }
            other => panic!("root should split on outlook, got {other:?}"),
        }
    }

    #[test]
    fn perfectly_predictive_column_yields_depth_one_tree() {
        let schema = Schema::new(
            vec![
                Column { name: "proto".into(), kind: ColumnKind::Categorical },
                Column { name: "bytes".into(), kind: ColumnKind::Continuous },
            ],
            "class",
            "normal",
            "malicious",
        )
        .unwrap();
        let rows: Vec<FeatureVector<f64>> = (0..20)
            .map(|i| {
                let malicious = i % 2 == 0;
                FeatureVector::new(
                    vec![
                        FeatureValue::Category(if malicious { "bad" } else { "good" }.into()),
                        FeatureValue::Number((i % 5) as f64),
                    ],
                    Some(if malicious { Label::Malicious } else { Label::Benign }),
                )
            })
            .collect();
        let ds = Dataset::new(schema, rows, true).unwrap();
        let model = train_decision_tree(&ds, &ClassifierSpec::default_for(Family::DecisionTree, 0)).unwrap();
        let crate::classifiers::ModelBody::DecisionTree(tree) = &model.body else {
            panic!()
        };
        assert_eq!(tree.depth(), 1);
        let labels = model.predict_dataset(&ds).unwrap();
        let correct = labels
            .iter()
            .zip(ds.rows())
            .filter(|(p, r)| Some(**p) == r.label)
            .count();
        assert_eq!(correct, ds.len());
    }

    #[test]
    fn pure_dataset_yields_single_leaf() {
        let schema = Schema::new(
            vec![Column { name: "x".into(), kind: ColumnKind::Continuous }],
            "class",
            "normal",
            "malicious",
        )
        .unwrap();
        let rows: Vec<FeatureVector<f64>> = (0..6)
            .map(|i| {
                FeatureVector::new(vec![FeatureValue::Number(i as f64)], Some(Label::Malicious))
            })
            .collect();
        let ds = Dataset::new(schema, rows, true).unwrap();
        let model = train_decision_tree(&ds, &ClassifierSpec::default_for(Family::DecisionTree, 0)).unwrap();
        let crate::classifiers::ModelBody::DecisionTree(tree) = &model.body else {
            panic!()
        };
        assert_eq!(tree.nodes.len(), 1);
        assert!(matches!(
            tree.nodes[0],
            TreeNode::Leaf { label: Label::Malicious, .. }
        ));
    }

    #[test]
    fn unseen_token_takes_the_majority_fallback_branch() {
        let ds = weather_fixture();
        let model = train_decision_tree(&ds, &ClassifierSpec::default_for(Family::DecisionTree, 0)).unwrap();
        // Branch `b` holds 4 benign rows; branches a and c hold 5 each,
        // so the fallback is branch `a` (5 rows, first of the ties).
        let row = FeatureVector::new(
            vec![
                FeatureValue::Category("unheard-of".into()),
                FeatureValue::Category("same".into()),
                FeatureValue::Number(0.0),
            ],
            None,
        );
        let via_fallback = model.predict(&row).unwrap();
        let row_a = FeatureVector::new(
            vec![
                FeatureValue::Category("a".into()),
                FeatureValue::Category("same".into()),
                FeatureValue::Number(0.0),
            ],
            None,
        );
        assert_eq!(via_fallback, model.predict(&row_a).unwrap());
    }

    #[test]
    fn depth_limit_is_respected() {
        let schema = Schema::new(
            vec![Column { name: "x".into(), kind: ColumnKind::Continuous }],
            "class",
            "normal",
            "malicious",
        )
        .unwrap();
        // Alternating labels along x force deep chains when unlimited.
        let rows: Vec<FeatureVector<f64>> = (0..64)
            .map(|i| {
                FeatureVector::new(
                    vec![FeatureValue::Number(i as f64)],
                    Some(if i % 2 == 0 { Label::Benign } else { Label::Malicious }),
                )
            })
            .collect();
        let ds = Dataset::new(schema, rows, true).unwrap();
        let mut spec = ClassifierSpec::default_for(Family::DecisionTree, 0);
        if let FamilyParams::DecisionTree(p) = &mut spec.params {
            p.max_depth = 3;
        }
        let model = train_decision_tree(&ds, &spec).unwrap();
        let crate::classifiers::ModelBody::DecisionTree(tree) = &model.body else {
            panic!()
        };
        assert!(tree.depth() <= 3);
        for (_, fraction, samples) in tree.leaves() {
            assert!(samples >= 1);
            assert!((0.0..=1.0).contains(fraction));
        }
    }

    #[test]
    fn training_is_deterministic() {
        let ds = weather_fixture();
        let spec = ClassifierSpec::default_for(Family::DecisionTree, 0);
        let a = train_decision_tree(&ds, &spec).unwrap();
        let b = train_decision_tree(&ds, &spec).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn consistent_separable_data_reaches_full_training_accuracy() {
        // Label depends on a threshold of one column plus a token of
        // another; greedy gain finds both steps.
        let schema = Schema::new(
            vec![
                Column { name: "rate".into(), kind: ColumnKind::Continuous },
                Column { name: "proto".into(), kind: ColumnKind::Categorical },
            ],
            "class",
            "normal",
            "malicious",
        )
        .unwrap();
        let rows: Vec<FeatureVector<f64>> = (0..60)
            .map(|i| {
                let rate = (i % 10) as f64;
                let proto = ["tcp", "udp", "icmp"][i % 3];
                let malicious = rate > 6.0 && proto != "udp";
                FeatureVector::new(
                    vec![
                        FeatureValue::Number(rate),
                        FeatureValue::Category(proto.into()),
                    ],
                    Some(if malicious { Label::Malicious } else { Label::Benign }),
                )
            })
            .collect();
        let ds = Dataset::new(schema, rows, true).unwrap();
        let model = train_decision_tree(&ds, &ClassifierSpec::default_for(Family::DecisionTree, 0)).unwrap();
        let labels = model.predict_dataset(&ds).unwrap();
        assert!(labels.iter().zip(ds.rows()).all(|(p, r)| Some(*p) == r.label));
    }
}
