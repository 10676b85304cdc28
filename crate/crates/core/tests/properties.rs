use proptest::prelude::*;
use qsann::data::{tokenize, Vocabulary, OOV_ID};
use qsann::model::{QsannConfig, QsannModel};
use qsann::qsal::{
    gpqsa_coefficients, layer_forward, residual_combine, LayerShape, ObservableSet, QsalLayerParams,
};
use qsann::sim::{NoiseKind, NoiseSpec, Simulator};
use qsann::train::Classifier;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_layer(seed: u64, n: usize, enc: usize, qkv: usize) -> QsalLayerParams {
    let shape = LayerShape::new(n, enc, qkv).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = shape.qkv_spec().param_count();
    let mut draw = || -> Vec<f64> { (0..len).map(|_| rng.random_range(0.0..6.3)).collect() };
    QsalLayerParams::new(shape, draw().into(), draw().into(), draw().into()).unwrap()
}

fn inputs_strategy(d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, d), 1..=5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gpqsa_rows_are_stochastic(
        pairs in prop::collection::vec((-1.0f64..=1.0, -1.0f64..=1.0), 1..=8),
    ) {
        let (zq, zk): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let a = gpqsa_coefficients(&zq, &zk).unwrap();
        for row in a.rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&x| x > 0.0 && x <= 1.0));
        }
        let means = a.column_means();
        prop_assert!((means.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn layer_is_permutation_equivariant(
        seed in any::<u64>(),
        inputs in inputs_strategy(6),
        rotate in 0usize..5,
    ) {
        let params = random_layer(seed, 2, 1, 1);
        let obs = ObservableSet::standard(2, 6).unwrap();
        let sim = Simulator::noiseless();
        let k = rotate % inputs.len();
        let mut permuted = inputs.clone();
        permuted.rotate_left(k);
        let (y, a) = layer_forward(&inputs, &params, &obs, &sim).unwrap();
        let (yp, ap) = layer_forward(&permuted, &params, &obs, &sim).unwrap();
        let s = inputs.len();
        for i in 0..s {
            let src = (i + k) % s;
            for (u, v) in yp[i].iter().zip(&y[src]) {
                prop_assert!((u - v).abs() < 1e-12);
            }
            for j in 0..s {
                prop_assert!((ap.get(i, j) - a.get(src, (j + k) % s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn outputs_stay_within_one_of_inputs(
        seed in any::<u64>(),
        inputs in inputs_strategy(8),
        noisy in any::<bool>(),
    ) {
        let params = random_layer(seed, 2, 2, 1);
        let obs = ObservableSet::standard(2, 8).unwrap();
        let sim = if noisy {
            Simulator::noisy(NoiseSpec::new(NoiseKind::AmplitudeDamping, 0.3).unwrap())
        } else {
            Simulator::noiseless()
        };
        let (y, _) = layer_forward(&inputs, &params, &obs, &sim).unwrap();
        for (ys, xs) in y.iter().zip(&inputs) {
            for (a, b) in ys.iter().zip(xs) {
                prop_assert!((a - b).abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn prediction_ignores_word_order(seed in any::<u64>(), tokens in prop::collection::vec(0usize..5, 1..=5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = QsannModel::init(QsannConfig::new(2, 1, 1, 2), 5, &mut rng).unwrap();
        let mut p: Vec<f64> = model.parameters();
        p.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
        let mut model = model;
        model.set_parameters(&p).unwrap();
        let mut reversed = tokens.clone();
        reversed.reverse();
        let a = model.predict(&tokens).unwrap();
        let b = model.predict(&reversed).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn vocabulary_round_trips_known_words(words in prop::collection::vec("[a-z]{1,6}", 1..12)) {
        let vocab = Vocabulary::from_tokens(words.iter().cloned());
        let ids = vocab.encode(&words);
        prop_assert!(ids.iter().all(|&i| i != OOV_ID));
        prop_assert_eq!(vocab.decode(&ids), words.clone());
        prop_assert_eq!(vocab.encode_text("UNSEEN-WORD-42"), vec![OOV_ID]);
        let rebuilt = Vocabulary::from_stored(vocab.tokens().to_vec()).unwrap();
        prop_assert_eq!(rebuilt.hash(), vocab.hash());
    }

    #[test]
    fn tokenizer_output_is_lowercase_and_nonempty(text in "[ A-Za-z.,!?]{0,40}") {
        for t in tokenize(&text) {
            prop_assert!(!t.is_empty());
            prop_assert_eq!(t.clone(), t.to_lowercase());
        }
    }
}

#[test]
fn zero_values_leave_inputs_unchanged() {
    let inputs = vec![vec![0.5, -1.0], vec![2.0, 0.25]];
    let a = gpqsa_coefficients(&[0.1, -0.4], &[0.3, 0.9]).unwrap();
    assert_eq!(
        residual_combine(&inputs, &a, &[vec![0.0; 2], vec![0.0; 2]]),
        inputs
    );
}

#[test]
fn equal_readouts_give_uniform_attention() {
    let a = gpqsa_coefficients(&[0.2, 0.2, 0.2], &[0.7, 0.7, 0.7]).unwrap();
    for row in a.rows() {
        for &x in row {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }
}
