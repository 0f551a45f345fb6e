use proptest::prelude::*;
use qga_photonics::rng::{seeded, stream};
use qga_photonics::surrogate::{
    evaluate_rmse, FmConfig, FmModel, ForestConfig, LabeledDataset, RandomForest, Surrogate, SurrogateModel,
};
use qga_photonics::StructureCode;
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn random_dataset(seed: u64, rows: usize, len: usize, mut label: impl FnMut(&StructureCode) -> f64) -> LabeledDataset {
    let mut rng = seeded(seed, stream::DATASET);
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

fn random_model(seed: u64, features: usize, rank: usize) -> FmModel {
    let mut rng = seeded(seed, stream::SURROGATE);
    let normal = Normal::new(0.0, 0.5).unwrap();
    let mut m = FmModel::zeros(features, rank);
    m.w0 = normal.sample(&mut rng);
    m.w.iter_mut().for_each(|w| *w = normal.sample(&mut rng));
    m.v.iter_mut().flatten().for_each(|v| *v = normal.sample(&mut rng));
    m
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

proptest! {
    #[test]
    fn fm_gradient_matches_central_differences(seed in any::<u64>(), l2 in 0.0f64..0.1) {
        let model = random_model(seed, 10, 3);
        let mut rng = seeded(seed, stream::STUDY);
        let x: Vec<f64> = (0..10).map(|_| f64::from(rng.random::<bool>() as u8)).collect();
        let y: f64 = rng.random_range(-2.0..2.0);
        let g = model.gradient(&x, y, l2);
        // The loss is quadratic in each single parameter, so central
        // differences are exact up to rounding at any step.
        let h = 1e-3;
        let probe = |edit: &dyn Fn(&mut FmModel, f64)| {
            let (mut plus, mut minus) = (model.clone(), model.clone());
            edit(&mut plus, h);
            edit(&mut minus, -h);
            (plus.loss(&x, y, l2) - minus.loss(&x, y, l2)) / (2.0 * h)
        };
        prop_assert!(relative_error(g.w0, probe(&|m, d| m.w0 += d)) < 1e-5);
        for i in 0..10 {
            prop_assert!(relative_error(g.w[i], probe(&|m, d| m.w[i] += d)) < 1e-5);
            for f in 0..3 {
                let n = probe(&|m, d| m.v[i][f] += d);
                prop_assert!(relative_error(g.v[i][f], n) < 1e-5, "{} vs {}", g.v[i][f], n);
            }
        }
    }

    #[test]
    fn forest_predictions_stay_in_label_range(seed in any::<u64>(), rows in 5usize..40) {
        let data = random_dataset(seed, rows, 10, |c| (c.to_index() % 17) as f64 * 0.1);
        let cfg = ForestConfig { tree_count: 8, rng_seed: seed, ..ForestConfig::default() };
        let forest = RandomForest::train(&data, &cfg).unwrap();
        let (lo, hi) = data.foms().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
        for i in 0..1024u64 {
            let p = forest.predict(&StructureCode::from_index(i, 10)).unwrap();
            prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }

    #[test]
    fn saved_models_predict_identically(seed in any::<u64>()) {
        let data = random_dataset(seed, 20, 8, |c| c.count_ones() as f64);
        let forest = SurrogateModel::RandomForest(
            RandomForest::train(&data, &ForestConfig { tree_count: 5, rng_seed: seed, ..ForestConfig::default() }).unwrap(),
        );
        let fm = SurrogateModel::FactorizationMachine(
            FmModel::train(&data, &FmConfig { epochs: 20, rng_seed: seed, ..FmConfig::default() }).unwrap(),
        );
        for model in [forest, fm] {
            let back = SurrogateModel::from_json(&model.to_json()).unwrap();
            for i in 0..256u64 {
                let c = StructureCode::from_index(i, 8);
                prop_assert_eq!(model.predict(&c).unwrap().to_bits(), back.predict(&c).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn dataset_csv_round_trips(seed in any::<u64>(), rows in 1usize..30) {
        let mut rng = seeded(seed, stream::STUDY);
        let data = random_dataset(seed, rows, 12, |_| rng.random::<f64>() * 3.0);
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = LabeledDataset::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.codes(), data.codes());
        prop_assert_eq!(back.foms(), data.foms());
    }
}

#[test]
fn latent_rank_adds_pairwise_capacity() {
    // Planted rank-2 interactions plus a linear part.
    let truth = random_model(5, 12, 2);
    let label = |c: &StructureCode| truth.predict_features(&c.as_features());
    let train = random_dataset(1, 600, 12, label);
    let test = random_dataset(2, 300, 12, label);
    let rmse = |rank| {
        let cfg = FmConfig { latent_rank: rank, epochs: 300, learning_rate: 0.01, l2_penalty: 1e-5, rng_seed: 3 };
        evaluate_rmse(&FmModel::train(&train, &cfg).unwrap(), &test).unwrap()
    };
    let (r1, r2, r4) = (rmse(1), rmse(2), rmse(4));
    assert!(r2 < 0.5 * r1, "rank 1 {r1}, rank 2 {r2}");
    assert!(r4 < 0.5 * r1, "rank 1 {r1}, rank 4 {r4}");
}

#[test]
fn forest_beats_mean_predictor_on_structured_labels() {
    let label = |c: &StructureCode| {
        let b = c.bits();
        f64::from(b[0] ^ b[3]) + 0.5 * f64::from(b[5] & b[7]) + 0.1 * c.count_ones() as f64
    };
    let train = random_dataset(7, 200, 12, label);
    let test = random_dataset(8, 300, 12, label);
    let forest = RandomForest::train(&train, &ForestConfig { rng_seed: 9, ..ForestConfig::default() }).unwrap();
    let mean = train.foms().iter().sum::<f64>() / train.len() as f64;
    let sd = (test.foms().iter().map(|y| (y - mean).powi(2)).sum::<f64>() / test.len() as f64).sqrt();
    let rmse = evaluate_rmse(&forest, &test).unwrap();
    assert!(rmse < 0.6 * sd, "{rmse} vs {sd}");
}
