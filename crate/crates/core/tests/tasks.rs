use pairclass::classifier::Hyperparams;
use pairclass::features::{Dataset, FeatureVector};
use pairclass::tasks::{eval_labeled_pairs, LabeledPairSet};
use pairclass::vector::SparseVec;
use pairclass::WordPair;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLASSES: [&str; 3] = ["associated", "both", "similar"];

/// 32 pairs per class; each vector points mostly along its class axis.
fn informative() -> (Vec<(WordPair, String)>, Vec<SparseVec>) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pairs = Vec::new();
    let mut vectors = Vec::new();
    for (k, c) in CLASSES.iter().enumerate() {
        for i in 0..32 {
            pairs.push((WordPair::new(format!("x{k}n{i}"), format!("y{k}n{i}")), c.to_string()));
            let mut v: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..0.3)).collect();
            v[k] += 1.0;
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            vectors.push(SparseVec::from_dense(&v.iter().map(|x| x / norm).collect::<Vec<_>>()));
        }
    }
    (pairs, vectors)
}

fn accuracy(pairs: &[(WordPair, String)], vectors: &[SparseVec], seed: u64) -> (f64, f64) {
    let set = LabeledPairSet::new(pairs.to_vec()).unwrap();
    let mut data = Dataset::new(6, "test");
    for ((pair, label), v) in pairs.iter().zip(vectors) {
        let row = FeatureVector {
            pair: pair.clone(),
            vector: v.clone(),
        };
        data.push(row, Some(label.clone())).unwrap();
    }
    let s = eval_labeled_pairs(&set, &data, &Hyperparams::default(), 10, seed).unwrap().summary;
    (s.accuracy, s.baseline)
}

#[test]
fn shuffled_labels_fall_to_the_baseline() {
    let (pairs, vectors) = informative();
    let (real, baseline) = accuracy(&pairs, &vectors, 0);
    assert!(real >= 0.95, "informative accuracy {real}");

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut total = 0.0;
    for s in 0..20 {
        let mut labels: Vec<String> = pairs.iter().map(|(_, l)| l.clone()).collect();
        labels.shuffle(&mut rng);
        let shuffled: Vec<(WordPair, String)> = pairs.iter().map(|(p, _)| p.clone()).zip(labels).collect();
        let (acc, b) = accuracy(&shuffled, &vectors, s);
        assert_eq!(b, baseline);
        total += acc;
    }
    let mean = total / 20.0;
    assert!((mean - baseline).abs() <= 0.08, "shuffled mean {mean}, baseline {baseline}");
}
