//! Incremental Bayesian category learner.
//!
//! Each category keeps only an instance count `n_k` and an accumulator
//! `a_k = Σ x` over the instances it absorbed; the instances themselves are
//! discarded. Priors are `n_k / N` and per-component likelihoods are the
//! Laplace-smoothed average `(a_ik + λ) / (n_k + λ·d)`. Classification
//! maximizes `log P(C_k) + Σ x_i · log P(x_i | C_k)`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::representation::FeatureVector;

pub const DEFAULT_SMOOTHING: f64 = 0.01;
pub const KB_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryModel {
    pub label: String,
    /// Instances absorbed so far.
    pub n: u64,
    /// Component-wise sum of the absorbed instances.
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    pub log_scores: BTreeMap<String, f64>,
}

/// Argmax over scores; on ties the lexicographically smallest label wins.
pub fn argmax_label(scores: &BTreeMap<String, f64>) -> Option<&str> {
    let mut best: Option<(&str, f64)> = None;
    for (label, &s) in scores {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((label, s));
        }
    }
    best.map(|(l, _)| l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    categories: BTreeMap<String, CategoryModel>,
    total: u64,
    dim: Option<usize>,
    smoothing: f64,
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        KnowledgeBase::new(DEFAULT_SMOOTHING).expect("default smoothing is positive")
    }
}

#[derive(Serialize, Deserialize)]
struct KbDocument {
    version: u32,
    d: usize,
    lambda: f64,
    #[serde(rename = "N")]
    total: u64,
    categories: Vec<CategoryModel>,
}

impl KnowledgeBase {
    pub fn new(smoothing: f64) -> Result<Self> {
        if !(smoothing > 0.0 && smoothing.is_finite()) {
            return Err(Error::invalid(format!(
                "smoothing {smoothing} must be positive"
            )));
        }
        Ok(KnowledgeBase {
            categories: BTreeMap::new(),
            total: 0,
            dim: None,
            smoothing,
        })
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Total absorbed instances across categories (`N`).
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> impl Iterator<Item = &CategoryModel> {
        self.categories.values()
    }

    pub fn category(&self, label: &str) -> Option<&CategoryModel> {
        self.categories.get(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    fn check_dim(&self, instances: &[FeatureVector]) -> Result<usize> {
        let d = self.dim.unwrap_or_else(|| instances[0].dim());
        if let Some(bad) = instances.iter().find(|x| x.dim() != d) {
            return Err(Error::invalid(format!(
                "feature dimension {} does not match {d}",
                bad.dim()
            )));
        }
        Ok(d)
    }

    fn absorb(&mut self, label: &str, instances: &[FeatureVector], d: usize) {
        let model = self
            .categories
            .entry(label.to_string())
            .or_insert_with(|| CategoryModel {
                label: label.to_string(),
                n: 0,
                a: vec![0.0; d],
            });
        for x in instances {
            for (acc, &v) in model.a.iter_mut().zip(x.values()) {
                *acc += v;
            }
        }
        model.n += instances.len() as u64;
        self.total += instances.len() as u64;
        self.dim = Some(d);
    }

    /// Creates `label` if needed and absorbs `instances` into it.
    pub fn teach(&mut self, label: &str, instances: &[FeatureVector]) -> Result<()> {
        if label.is_empty() {
            return Err(Error::invalid("category label is empty"));
        }
        if instances.is_empty() {
            return Err(Error::invalid("teach needs at least one instance"));
        }
        let d = self.check_dim(instances)?;
        self.absorb(label, instances, d);
        Ok(())
    }

    /// Absorbs a misclassified instance into an existing category.
    pub fn correct(&mut self, label: &str, instance: &FeatureVector) -> Result<()> {
        if !self.categories.contains_key(label) {
            return Err(Error::UnknownCategory(label.to_string()));
        }
        let instances = std::slice::from_ref(instance);
        let d = self.check_dim(instances)?;
        self.absorb(label, instances, d);
        Ok(())
    }

    pub fn prior(&self, label: &str) -> Result<f64> {
        let model = self
            .categories
            .get(label)
            .ok_or_else(|| Error::UnknownCategory(label.to_string()))?;
        Ok(model.n as f64 / self.total as f64)
    }

    /// Smoothed `P(x_i | C)` for the zero-based component `i`.
    pub fn likelihood(&self, label: &str, i: usize) -> Result<f64> {
        let model = self
            .categories
            .get(label)
            .ok_or_else(|| Error::UnknownCategory(label.to_string()))?;
        let d = model.a.len();
        if i >= d {
            return Err(Error::invalid(format!("component {i} out of range 0..{d}")));
        }
        Ok(self.smoothed(model, i))
    }

    fn smoothed(&self, model: &CategoryModel, i: usize) -> f64 {
        let d = model.a.len() as f64;
        (model.a[i] + self.smoothing) / (model.n as f64 + self.smoothing * d)
    }

    pub fn log_score(&self, model: &CategoryModel, x: &FeatureVector) -> f64 {
        let prior = (model.n as f64 / self.total as f64).ln();
        let d = model.a.len() as f64;
        let denom = (model.n as f64 + self.smoothing * d).ln();
        prior
            + x.values()
                .iter()
                .zip(&model.a)
                .filter(|(&xi, _)| xi > 0.0)
                .map(|(&xi, &a)| xi * ((a + self.smoothing).ln() - denom))
                .sum::<f64>()
    }

    pub fn classify(&self, x: &FeatureVector) -> Result<Prediction> {
        if self.categories.is_empty() {
            return Err(Error::NoKnowledge);
        }
        if let Some(d) = self.dim {
            if x.dim() != d {
                return Err(Error::invalid(format!(
                    "query dimension {} does not match {d}",
                    x.dim()
                )));
            }
        }
        let log_scores: BTreeMap<String, f64> = self
            .categories
            .iter()
            .map(|(label, m)| (label.clone(), self.log_score(m, x)))
            .collect();
        let label = argmax_label(&log_scores).expect("nonempty").to_string();
        Ok(Prediction { label, log_scores })
    }

    pub fn to_json(&self) -> String {
        let doc = KbDocument {
            version: KB_VERSION,
            d: self.dim.unwrap_or(0),
            lambda: self.smoothing,
            total: self.total,
            categories: self.categories.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: KbDocument = serde_json::from_str(text)
            .map_err(|e| Error::Format(format!("knowledge base: {e}")))?;
        if doc.version != KB_VERSION {
            return Err(Error::Format(format!(
                "knowledge base version {} (expected {KB_VERSION})",
                doc.version
            )));
        }
        let mut kb = KnowledgeBase::new(doc.lambda).map_err(|e| Error::Format(e.to_string()))?;
        let mut sum = 0;
        for model in doc.categories {
            if model.a.len() != doc.d || model.a.iter().any(|v| !(*v >= 0.0)) || model.n == 0 {
                return Err(Error::Format(format!(
                    "category `{}` is malformed",
                    model.label
                )));
            }
            sum += model.n;
            if kb.categories.insert(model.label.clone(), model).is_some() {
                return Err(Error::Format("duplicate category label".into()));
            }
        }
        if sum != doc.total {
            return Err(Error::Format(format!(
                "N = {} but counts sum to {sum}",
                doc.total
            )));
        }
        kb.total = doc.total;
        kb.dim = (!kb.categories.is_empty()).then_some(doc.d);
        Ok(kb)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        KnowledgeBase::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// SHA-256 of the serialized document.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::new(v.to_vec()).unwrap()
    }

    fn random_features(n: usize, d: usize, seed: u64) -> Vec<FeatureVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                FeatureVector::normalized((0..d).map(|_| rng.random::<f64>() + 1e-3).collect())
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn teach_creates_and_accumulates() {
        let xs = random_features(5, 4, 1);
        let mut kb = KnowledgeBase::default();
        kb.teach("mug", &xs[..3]).unwrap();
        assert_eq!((kb.len(), kb.total()), (1, 3));
        assert_eq!(kb.category("mug").unwrap().n, 3);
        assert_eq!(kb.prior("mug").unwrap(), 1.0);

        kb.teach("mug", &xs[3..]).unwrap();
        let model = kb.category("mug").unwrap();
        assert_eq!(model.n, 5);
        for i in 0..4 {
            let sum: f64 = xs.iter().map(|x| x.values()[i]).sum();
            assert!((model.a[i] - sum).abs() < 1e-12);
        }
    }

    #[test]
    fn priors_follow_counts() {
        let xs = random_features(6, 3, 2);
        let mut kb = KnowledgeBase::default();
        kb.teach("mug", &xs[..3]).unwrap();
        kb.teach("fork", &xs[3..]).unwrap();
        assert_eq!(kb.prior("mug").unwrap(), 0.5);
        assert_eq!(kb.prior("fork").unwrap(), 0.5);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut kb = KnowledgeBase::default();
        kb.teach("a", &[fv(&[0.5, 0.5])]).unwrap();
        assert!(kb.teach("b", &[fv(&[1.0, 0.0, 0.0])]).is_err());
        assert!(kb.classify(&fv(&[1.0])).is_err());
    }

    #[test]
    fn correct_matches_teach() {
        let xs = random_features(4, 5, 3);
        let mut kb = KnowledgeBase::default();
        kb.teach("mug", &xs[..3]).unwrap();
        kb.correct("mug", &xs[3]).unwrap();
        assert_eq!(kb.category("mug").unwrap().n, 4);
        assert!(matches!(
            kb.correct("cup", &xs[0]),
            Err(Error::UnknownCategory(_))
        ));

        let mut batch = KnowledgeBase::default();
        batch.teach("mug", &xs).unwrap();
        assert_eq!(kb.to_json(), batch.to_json());
    }

    #[test]
    fn likelihood_examples() {
        let mut kb = KnowledgeBase::new(1.0).unwrap();
        kb.teach("a", &[fv(&[1.0, 0.0])]).unwrap();
        assert!((kb.likelihood("a", 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        // a_ik = 0.9, n_k = 3, λ = 0.01, d = 4 → 0.91 / 3.04
        let mut kb = KnowledgeBase::new(0.01).unwrap();
        kb.teach("a", &vec![fv(&[0.3, 0.7, 0.0, 0.0]); 3]).unwrap();
        let got = kb.likelihood("a", 0).unwrap();
        assert!((got - 0.91 / 3.04).abs() < 1e-12);
        assert!((got - 0.29934).abs() < 1e-5);

        // Vanishing smoothing recovers a_ik / n_k.
        let mut kb = KnowledgeBase::new(1e-12).unwrap();
        kb.teach("a", &[fv(&[0.2, 0.8]), fv(&[0.6, 0.4])]).unwrap();
        assert!((kb.likelihood("a", 0).unwrap() - 0.4).abs() < 1e-9);

        assert!(kb.likelihood("b", 0).is_err());
        assert!(kb.likelihood("a", 2).is_err());
    }

    #[test]
    fn classify_examples() {
        let mut kb = KnowledgeBase::default();
        assert!(matches!(
            kb.classify(&fv(&[1.0, 0.0])),
            Err(Error::NoKnowledge)
        ));
        kb.teach("only", &[fv(&[1.0, 0.0])]).unwrap();
        assert_eq!(kb.classify(&fv(&[0.0, 1.0])).unwrap().label, "only");

        let mut kb = KnowledgeBase::default();
        kb.teach("first", &[fv(&[1.0, 0.0])]).unwrap();
        kb.teach("second", &[fv(&[0.0, 1.0])]).unwrap();
        assert_eq!(kb.classify(&fv(&[1.0, 0.0])).unwrap().label, "first");
        assert_eq!(kb.classify(&fv(&[0.0, 1.0])).unwrap().label, "second");
    }

    #[test]
    fn classify_matches_hand_log_scores() {
        let mut kb = KnowledgeBase::new(0.01).unwrap();
        kb.teach("A", &vec![fv(&[0.8, 0.1, 0.1]); 2]).unwrap();
        kb.teach("B", &vec![fv(&[0.1, 0.1, 0.8]); 2]).unwrap();
        let q = fv(&[0.7, 0.2, 0.1]);
        let pred = kb.classify(&q).unwrap();
        assert_eq!(pred.label, "A");

        // A: a = (1.6, 0.2, 0.2), B: a = (0.2, 0.2, 1.6); n = 2, N = 4, denominator 2.03.
        let hand = |a: [f64; 3]| {
            (0.5f64).ln()
                + 0.7 * ((a[0] + 0.01) / 2.03f64).ln()
                + 0.2 * ((a[1] + 0.01) / 2.03f64).ln()
                + 0.1 * ((a[2] + 0.01) / 2.03f64).ln()
        };
        assert!((pred.log_scores["A"] - hand([1.6, 0.2, 0.2])).abs() < 1e-12);
        assert!((pred.log_scores["B"] - hand([0.2, 0.2, 1.6])).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_smallest_label() {
        let mut kb = KnowledgeBase::default();
        kb.teach("zeta", &[fv(&[0.5, 0.5])]).unwrap();
        kb.teach("alpha", &[fv(&[0.5, 0.5])]).unwrap();
        assert_eq!(kb.classify(&fv(&[0.5, 0.5])).unwrap().label, "alpha");
    }

    #[test]
    fn json_round_trip_and_errors() {
        let xs = random_features(9, 6, 4);
        let mut kb = KnowledgeBase::new(0.05).unwrap();
        kb.teach("a", &xs[..3]).unwrap();
        kb.teach("b", &xs[3..6]).unwrap();
        kb.teach("c", &xs[6..]).unwrap();
        let text = kb.to_json();
        let back = KnowledgeBase::from_json(&text).unwrap();
        assert_eq!(back, kb);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for q in random_features(100, 6, rng.random()) {
            assert_eq!(kb.classify(&q).unwrap(), back.classify(&q).unwrap());
        }

        assert!(matches!(
            KnowledgeBase::from_json(&text[..text.len() / 2]),
            Err(Error::Format(_))
        ));
        let bumped = text.replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(matches!(
            KnowledgeBase::from_json(&bumped),
            Err(Error::Format(_))
        ));
        let empty = KnowledgeBase::default();
        assert_eq!(KnowledgeBase::from_json(&empty.to_json()).unwrap(), empty);
    }

    #[derive(Debug, Clone)]
    enum Op {
        Teach(usize, Vec<usize>),
        Correct(usize, usize),
    }

    proptest! {
        #[test]
        fn accumulator_and_prior_invariants(
            teaches in prop::collection::vec((0usize..4, 1usize..4), 1..12),
            seed in 0u64..1000,
        ) {
            let labels = ["a", "b", "c", "d"];
            let mut kb = KnowledgeBase::default();
            let pool = random_features(64, 5, seed);
            let mut next = 0;
            for (l, count) in teaches {
                let xs: Vec<_> = (0..count).map(|_| { next += 1; pool[next % 64].clone() }).collect();
                let before = kb.category(labels[l]).map(|m| m.a.clone());
                kb.teach(labels[l], &xs).unwrap();
                let after = &kb.category(labels[l]).unwrap().a;
                if let Some(before) = before {
                    for i in 0..5 {
                        prop_assert!(after[i] > before[i]);
                    }
                }
            }
            let prior_sum: f64 = kb.labels().map(|l| kb.prior(l).unwrap()).sum();
            prop_assert!((prior_sum - 1.0).abs() < 1e-12);
            prop_assert_eq!(kb.total(), kb.categories().map(|m| m.n).sum::<u64>());
            for m in kb.categories() {
                prop_assert!((m.a.iter().sum::<f64>() - m.n as f64).abs() < 1e-6);
                for i in 0..5 {
                    prop_assert!(kb.likelihood(&m.label, i).unwrap() > 0.0);
                }
            }
            for q in random_features(5, 5, seed + 1) {
                let p = kb.classify(&q).unwrap();
                prop_assert!(p.log_scores.values().all(|s| s.is_finite()));
            }
        }

        #[test]
        fn argmax_ignores_common_offsets(
            scores in prop::collection::btree_map("[a-e]", -1000i32..1000, 1..5),
            c in -100_000i32..100_000,
        ) {
            // Integer-valued scores keep the offset exact, so ties survive it.
            let base: BTreeMap<String, f64> = scores.iter().map(|(k, &v)| (k.clone(), v as f64 / 8.0)).collect();
            let shifted: BTreeMap<String, f64> = base.iter().map(|(k, v)| (k.clone(), v + c as f64)).collect();
            prop_assert_eq!(argmax_label(&base), argmax_label(&shifted));
        }

        #[test]
        fn interleavings_equal_batch(order in Just((0..12).collect::<Vec<usize>>()).prop_shuffle(), seed in 0u64..100) {
            let xs = random_features(12, 4, seed);
            let labels = ["p", "q", "r"];
            // Teach the first instance of each label (in shuffled order), correct the rest.
            let mut ops = Vec::new();
            let mut seen = [false; 3];
            for &i in &order {
                if !seen[i % 3] { seen[i % 3] = true; ops.push(Op::Teach(i % 3, vec![i])); }
                else { ops.push(Op::Correct(i % 3, i)); }
            }
            let mut kb = KnowledgeBase::default();
            for op in ops {
                match op {
                    Op::Teach(l, idx) => kb.teach(labels[l], &idx.iter().map(|&i| xs[i].clone()).collect::<Vec<_>>()).unwrap(),
                    Op::Correct(l, i) => kb.correct(labels[l], &xs[i]).unwrap(),
                }
            }
            let mut batch = KnowledgeBase::default();
            for (l, label) in labels.iter().enumerate() {
                let mine: Vec<_> = (0..12).filter(|i| i % 3 == l).map(|i| xs[i].clone()).collect();
                batch.teach(label, &mine).unwrap();
            }
            prop_assert_eq!(kb.total(), batch.total());
            for (m, b) in kb.categories().zip(batch.categories()) {
                prop_assert_eq!(&m.label, &b.label);
                prop_assert_eq!(m.n, b.n);
                for (x, y) in m.a.iter().zip(&b.a) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }
        }
    }
}
