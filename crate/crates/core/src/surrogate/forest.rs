//! CART regression trees on binary features and their bagged ensemble.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_length, LabeledDataset, Surrogate, SurrogateError};
use crate::encoding::StructureCode;
use crate::rng::{mix_seed, seeded, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    pub tree_count: usize,
    /// `None` grows until leaves are pure or too small to split.
    #[serde(default)]
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Fraction of features considered at each split.
    pub feature_subsample: f64,
    pub bootstrap: bool,
    pub rng_seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            tree_count: 100,
            max_depth: None,
            min_samples_leaf: 1,
            feature_subsample: 1.0 / 3.0,
            bootstrap: true,
            rng_seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<(), SurrogateError> {
        if self.tree_count == 0 {
            return Err(SurrogateError::InvalidConfig("tree_count must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(SurrogateError::InvalidConfig("min_samples_leaf must be at least 1".into()));
        }
        if !(self.feature_subsample > 0.0 && self.feature_subsample <= 1.0) {
            return Err(SurrogateError::InvalidConfig(format!(
                "feature_subsample must be in (0, 1], got {}",
                self.feature_subsample
            )));
        }
        Ok(())
    }

    /// Features tried per split for `feature_count` inputs.
    pub fn features_per_split(&self, feature_count: usize) -> usize {
        ((self.feature_subsample * feature_count as f64).floor() as usize).clamp(1, feature_count.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64 },
    /// Bit 0 goes left, bit 1 goes right.
    Split { feature: usize, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    code_length: usize,
    /// Root at index 0.
    nodes: Vec<Node>,
}

struct Grow<'a, R> {
    bits: Vec<&'a [u8]>,
    labels: &'a [f64],
    mtry: usize,
    max_depth: Option<usize>,
    min_leaf: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> Grow<'_, R> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let mean = rows.iter().map(|&r| self.labels[r]).sum::<f64>() / rows.len() as f64;
        self.nodes.push(Node::Leaf { value: mean });
        let pure = rows.iter().all(|&r| self.labels[r] == self.labels[rows[0]]);
        if pure || rows.len() < 2 * self.min_leaf || self.max_depth.is_some_and(|d| depth >= d) {
            return id;
        }
        let code_length = self.bits[rows[0]].len();
        let varying: Vec<usize> = (0..code_length)
            .filter(|&f| rows.iter().any(|&r| self.bits[r][f] != self.bits[rows[0]][f]))
            .collect();
        if varying.is_empty() {
            return id;
        }
        let take = self.mtry.min(varying.len());
        let mut candidates: Vec<usize> = sample(self.rng, varying.len(), take).into_iter().map(|i| varying[i]).collect();
        candidates.sort_unstable();

        let total: f64 = rows.iter().map(|&r| self.labels[r]).sum();
        let n = rows.len() as f64;
        let mut best: Option<(usize, f64)> = None;
        for &f in &candidates {
            let (mut n1, mut s1) = (0usize, 0.0);
            for &r in &rows {
                if self.bits[r][f] == 1 {
                    n1 += 1;
                    s1 += self.labels[r];
                }
            }
            let n0 = rows.len() - n1;
            if n0 < self.min_leaf || n1 < self.min_leaf {
                continue;
            }
            let (m0, m1) = ((total - s1) / n0 as f64, s1 / n1 as f64);
            // Reduction in summed squared error.
            let gain = n0 as f64 * n1 as f64 / n * (m0 - m1).powi(2);
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((f, gain));
            }
        }
        let Some((feature, _)) = best else {
            return id;
        };
        let (right_rows, left_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| self.bits[r][feature] == 1);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split { feature, left, right };
        id
    }
}

impl RegressionTree {
    /// Grows one tree on `rows` (indices into `data`, repeats allowed).
    pub fn fit<R: Rng>(
        data: &LabeledDataset,
        rows: Vec<usize>,
        config: &ForestConfig,
        rng: &mut R,
    ) -> Result<Self, SurrogateError> {
        let code_length = data
            .code_length()
            .ok_or_else(|| SurrogateError::InvalidData("cannot fit a tree on an empty dataset".into()))?;
        if rows.is_empty() {
            return Err(SurrogateError::InvalidData("cannot fit a tree on zero rows".into()));
        }
        let mut grow = Grow {
            bits: data.codes().iter().map(StructureCode::bits).collect(),
            labels: data.foms(),
            mtry: config.features_per_split(code_length),
            max_depth: config.max_depth,
            min_leaf: config.min_samples_leaf,
            rng,
            nodes: Vec::new(),
        };
        grow.grow(rows, 0);
        Ok(Self {
            code_length,
            nodes: grow.nodes,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn predict_bits(&self, bits: &[u8]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { value } => return value,
                Node::Split { feature, left, right } => id = if bits[feature] == 1 { right } else { left },
            }
        }
    }

    fn validate(&self) -> Result<(), SurrogateError> {
        let bad = |m: String| Err(SurrogateError::Model(m));
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Leaf { value } if !value.is_finite() => return bad(format!("leaf {i} is not finite")),
                // Children after their parent rules out cycles.
                Node::Split { feature, left, right } => {
                    if feature >= self.code_length {
                        return bad(format!("node {i} splits on feature {feature} of {}", self.code_length));
                    }
                    if left <= i || right <= i || left >= self.nodes.len() || right >= self.nodes.len() {
                        return bad(format!("node {i} has invalid children"));
                    }
                }
                Node::Leaf { .. } => {}
            }
        }
        Ok(())
    }
}

impl Surrogate for RegressionTree {
    fn code_length(&self) -> usize {
        self.code_length
    }

    fn predict(&self, code: &StructureCode) -> Result<f64, SurrogateError> {
        check_length(self.code_length, code)?;
        Ok(self.predict_bits(code.bits()))
    }
}

/// Mean of the member trees' predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    code_length: usize,
    trees: Vec<RegressionTree>,
}

impl RandomForest {
    /// Tree `t` draws from a generator seeded with `mix_seed(rng_seed, t)`,
    /// so the ensemble is the same however the trees are scheduled.
    pub fn train(data: &LabeledDataset, config: &ForestConfig) -> Result<Self, SurrogateError> {
        config.validate()?;
        if data.len() < 2 {
            return Err(SurrogateError::InvalidData(format!("need at least 2 rows, got {}", data.len())));
        }
        let n = data.len();
        let trees = (0..config.tree_count)
            .into_par_iter()
            .map(|t| {
                let mut rng = seeded(mix_seed(config.rng_seed, t as u64), stream::SURROGATE);
                let rows = if config.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                RegressionTree::fit(data, rows, config, &mut rng)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_trees(trees)
    }

    pub fn from_trees(trees: Vec<RegressionTree>) -> Result<Self, SurrogateError> {
        let Some(first) = trees.first() else {
            return Err(SurrogateError::Model("a forest needs at least one tree".into()));
        };
        let code_length = first.code_length;
        for tree in &trees {
            if tree.code_length != code_length {
                return Err(SurrogateError::Model("trees disagree on code length".into()));
            }
            tree.validate()?;
        }
        Ok(Self { code_length, trees })
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub(crate) fn validate(&self) -> Result<(), SurrogateError> {
        Self::from_trees(self.trees.clone()).map(|_| ())
    }
}

impl Surrogate for RandomForest {
    fn code_length(&self) -> usize {
        self.code_length
    }

    fn predict(&self, code: &StructureCode) -> Result<f64, SurrogateError> {
        check_length(self.code_length, code)?;
        let bits = code.bits();
        Ok(self.trees.iter().map(|t| t.predict_bits(bits)).sum::<f64>() / self.trees.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn random_dataset(rows: usize, len: usize, seed: u64, label: impl Fn(&StructureCode) -> f64) -> LabeledDataset {
        let mut rng = seeded(seed, 0);
        let mut data = LabeledDataset::new();
        while data.len() < rows {
            let code = StructureCode::from_index(rng.random_range(0..1u64 << len), len);
            if !data.contains(&code) {
                let y = label(&code);
                data.insert(code, y).unwrap();
            }
        }
        data
    }

    fn memorizing() -> ForestConfig {
        ForestConfig {
            tree_count: 1,
            bootstrap: false,
            ..ForestConfig::default()
        }
    }

    #[test]
    fn single_unbagged_tree_memorizes() {
        let data = random_dataset(60, 10, 1, |c| (c.to_index() as f64 * 0.37).sin());
        let forest = RandomForest::train(&data, &memorizing()).unwrap();
        for (code, y) in data.rows() {
            assert_eq!(forest.predict(code).unwrap(), y);
        }
    }

    #[test]
    fn constant_labels_predict_constant() {
        let data = random_dataset(20, 8, 2, |_| 2.5);
        let forest = RandomForest::train(&data, &ForestConfig::default()).unwrap();
        for i in 0..256 {
            assert_eq!(forest.predict(&StructureCode::from_index(i, 8)).unwrap(), 2.5);
        }
    }

    #[test]
    fn predictions_stay_within_label_range() {
        let data = random_dataset(50, 12, 3, |c| c.count_ones() as f64 + 0.1 * c.bits()[0] as f64);
        let (lo, hi) = data.foms().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &y| (l.min(y), h.max(y)));
        let forest = RandomForest::train(&data, &ForestConfig { rng_seed: 9, ..ForestConfig::default() }).unwrap();
        for i in (0..4096).step_by(7) {
            let p = forest.predict(&StructureCode::from_index(i, 12)).unwrap();
            assert!(p >= lo && p <= hi);
        }
    }

    #[test]
    fn identical_trees_collapse_to_one() {
        let data = random_dataset(40, 10, 4, |c| c.count_ones() as f64);
        let config = memorizing();
        let tree = RegressionTree::fit(&data, (0..40).collect(), &config, &mut seeded(5, 0)).unwrap();
        let forest = RandomForest::from_trees(vec![tree.clone(); 7]).unwrap();
        for i in 0..1024 {
            let code = StructureCode::from_index(i, 10);
            assert_eq!(forest.predict(&code).unwrap(), tree.predict(&code).unwrap());
        }
    }

    #[test]
    fn tree_order_does_not_matter() {
        let data = random_dataset(40, 10, 6, |c| (c.to_index() % 7) as f64);
        let forest = RandomForest::train(&data, &ForestConfig { tree_count: 9, ..ForestConfig::default() }).unwrap();
        let mut trees = forest.trees().to_vec();
        trees.reverse();
        let reversed = RandomForest::from_trees(trees).unwrap();
        for i in 0..1024 {
            let code = StructureCode::from_index(i, 10);
            let (a, b) = (forest.predict(&code).unwrap(), reversed.predict(&code).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn training_is_deterministic_and_seed_sensitive() {
        let data = random_dataset(40, 10, 7, |c| (c.to_index() as f64).sqrt());
        let cfg = ForestConfig { tree_count: 5, ..ForestConfig::default() };
        assert_eq!(RandomForest::train(&data, &cfg).unwrap(), RandomForest::train(&data, &cfg).unwrap());
        let other = ForestConfig { rng_seed: 1, ..cfg };
        assert_ne!(RandomForest::train(&data, &cfg).unwrap(), RandomForest::train(&data, &other).unwrap());
    }

    #[test]
    fn depth_and_leaf_limits_are_honored() {
        let data = random_dataset(64, 10, 8, |c| c.to_index() as f64);
        let cfg = ForestConfig { tree_count: 1, bootstrap: false, max_depth: Some(3), ..ForestConfig::default() };
        let forest = RandomForest::train(&data, &cfg).unwrap();
        assert!(forest.trees()[0].depth() <= 3);
        let cfg = ForestConfig { tree_count: 1, bootstrap: false, min_samples_leaf: 10, ..ForestConfig::default() };
        let forest = RandomForest::train(&data, &cfg).unwrap();
        let leaves = forest.trees()[0].nodes().iter().filter(|n| matches!(n, Node::Leaf { .. })).count();
        assert!(leaves <= 6);
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = random_dataset(1, 4, 9, |_| 0.0);
        assert!(RandomForest::train(&data, &ForestConfig::default()).is_err());
        let data = random_dataset(4, 4, 9, |_| 0.0);
        assert!(RandomForest::train(&data, &ForestConfig { feature_subsample: 0.0, ..ForestConfig::default() }).is_err());
        let forest = RandomForest::train(&data, &ForestConfig::default()).unwrap();
        assert!(matches!(
            forest.predict(&StructureCode::zeros(6)),
            Err(SurrogateError::Shape { expected: 4, found: 6 })
        ));
    }
}
