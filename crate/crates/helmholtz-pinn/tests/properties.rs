//! Property tests for the crate-wide invariants.

use helmholtz_pinn::hpo::{decode, encode, expected_improvement, HyperParams, SearchSpace};
use helmholtz_pinn::net::{Activation, Architecture, MlpParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn activation_strategy() -> impl Strategy<Value = Activation> {
    prop_oneof![Just(Activation::Sin), Just(Activation::Sigmoid), Just(Activation::Tanh)]
}

fn dirichlet_lambda() -> impl Strategy<Value = HyperParams> {
    (1e-4f64..5e-2, 1usize..=10, 5usize..=500, activation_strategy()).prop_map(
        |(alpha, depth, width, act)| HyperParams {
            learning_rate: alpha,
            depth,
            width,
            activation: act,
            boundary_weight: None,
        },
    )
}

fn neumann_lambda() -> impl Strategy<Value = HyperParams> {
    (1e-5f64..5e-2, 1usize..=5, 5usize..=500, activation_strategy(), 1f64..1e7).prop_map(
        |(alpha, depth, width, act, w)| HyperParams {
            learning_rate: alpha,
            depth,
            width,
            activation: act,
            boundary_weight: Some(w),
        },
    )
}

proptest! {
    #[test]
    fn encode_decode_round_trips_dirichlet(lambda in dirichlet_lambda()) {
        let space = SearchSpace::dirichlet_default();
        let back = decode(&encode(&lambda, &space).unwrap(), &space).unwrap();
        prop_assert_eq!(back.depth, lambda.depth);
        prop_assert_eq!(back.width, lambda.width);
        prop_assert_eq!(back.activation, lambda.activation);
        let rel = (back.learning_rate - lambda.learning_rate).abs() / lambda.learning_rate;
        prop_assert!(rel <= 1e-12);
    }

    #[test]
    fn encode_decode_round_trips_neumann(lambda in neumann_lambda()) {
        let space = SearchSpace::neumann_default();
        let back = decode(&encode(&lambda, &space).unwrap(), &space).unwrap();
        prop_assert_eq!(back.depth, lambda.depth);
        prop_assert_eq!(back.width, lambda.width);
        prop_assert_eq!(back.activation, lambda.activation);
        let w = lambda.boundary_weight.unwrap();
        let rel = (back.boundary_weight.unwrap() - w).abs() / w;
        prop_assert!(rel <= 1e-12);
    }

    #[test]
    fn jet_value_equals_forward_bitwise(
        seed in 0u64..1000,
        d in 1usize..=3,
        depth in 1usize..=3,
        width in 1usize..=8,
        act in activation_strategy(),
        coords in proptest::collection::vec(0.0f64..1.0, 3),
    ) {
        let arch = Architecture::constant_width(d, depth, width, act).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = MlpParams::glorot_init(arch, &mut rng);
        let x = &coords[..d];
        let jet = params.forward_jet(x).unwrap();
        prop_assert_eq!(jet.value.to_bits(), params.forward(x).unwrap().to_bits());
    }

    #[test]
    fn expected_improvement_never_negative(
        mean in -100.0f64..100.0,
        std in 0.0f64..50.0,
        best in -100.0f64..100.0,
        xi in 0.0f64..1.0,
    ) {
        prop_assert!(expected_improvement(mean, std, best, xi) >= 0.0);
    }

    #[test]
    fn param_count_matches_flat_storage(
        d in 1usize..=3,
        depth in 1usize..=4,
        width in 1usize..=8,
    ) {
        let arch = Architecture::constant_width(d, depth, width, Activation::Tanh).unwrap();
        prop_assert_eq!(arch.param_count(), MlpParams::zeros(arch.clone()).values().len());
    }
}
