mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qpem::arma::{predict_gradients, predict_hessians, simulate, ArmaModel};
use qpem::noise::NoiseSpec;
use qpem::PredictorModel;

use common::{fd_gradients, fd_hessians, random_arma, relative_error};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradients_match_finite_differences(seed in any::<u64>(), p in 0usize..=3, q in 0usize..=3) {
        prop_assume!(p + q > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_arma(&mut rng, p, q, 0.6, 0.1);
        let traj = simulate(&params, &NoiseSpec::Uniform { c: 1.0 }, 60, seed).unwrap();
        let g = predict_gradients(&params, &traj.y).unwrap();
        prop_assert!(relative_error(&g, &fd_gradients(&params, &traj.y, 1e-6), 1e-8) < 1e-5);
    }

    #[test]
    fn hessians_match_gradient_differences(seed in any::<u64>(), p in 0usize..=2, q in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_arma(&mut rng, p, q, 0.6, 0.1);
        let traj = simulate(&params, &NoiseSpec::Rademacher { c: 1.0 }, 60, seed).unwrap();
        let h = predict_hessians(&params, &traj.y).unwrap();
        for (a, b) in h.iter().zip(fd_hessians(&params, &traj.y, 1e-6)) {
            prop_assert!((a - &b).abs().max() < 1e-4);
            prop_assert_eq!(a.transpose(), a.clone());
        }
    }
}

#[test]
fn trait_and_free_functions_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = random_arma(&mut rng, 2, 2, 0.5, 0.1);
    let model = ArmaModel::new(2, 2);
    let traj = simulate(&params, &NoiseSpec::Uniform { c: 1.0 }, 80, 1).unwrap();
    let theta = params.theta();
    let (yhat, g) = model.predict_with_gradients(&theta, &traj.y).unwrap();
    assert_eq!(yhat, model.predict(&theta, &traj.y).unwrap());
    assert_eq!(g, predict_gradients(&params, &traj.y).unwrap());
    assert_eq!(model.hessians(&theta, &traj.y).unwrap(), predict_hessians(&params, &traj.y).unwrap());
}

#[test]
fn pure_ar_has_zero_hessians() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = random_arma(&mut rng, 3, 0, 0.5, 0.1);
    let traj = simulate(&params, &NoiseSpec::Uniform { c: 1.0 }, 40, 2).unwrap();
    for h in predict_hessians(&params, &traj.y).unwrap() {
        assert_eq!(h.abs().max(), 0.0);
    }
}
