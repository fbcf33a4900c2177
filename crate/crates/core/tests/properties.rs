use partial_haagerup::cli::{generate_random_system, SystemDescription};
use partial_haagerup::crossed_product::{BaseRepresentation, CrossedProduct, RegularRepresentation};
use partial_haagerup::gns::GnsSpace;
use partial_haagerup::haagerup::{self, PdConvention};
use partial_haagerup::inductive_limit;
use partial_haagerup::linalg;
use partial_haagerup::random::{self, Budget, RandomSystem};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BUDGET: Budget = Budget {
    max_group_order: 6,
    max_fiber: 4,
};

fn system(seed: u64) -> (ChaCha8Rng, RandomSystem) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = random::random_system(&mut rng, BUDGET);
    (rng, sys)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn crossed_product_is_an_associative_star_algebra(seed in any::<u64>()) {
        let (mut rng, sys) = system(seed);
        let cp = CrossedProduct::new(sys.action);
        let x = random::random_crossed(&mut rng, &cp);
        let y = random::random_crossed(&mut rng, &cp);
        let z = random::random_crossed(&mut rng, &cp);
        let xy = cp.multiply(&x, &y);
        prop_assert!(cp.multiply(&xy, &z).max_abs_diff(&cp.multiply(&x, &cp.multiply(&y, &z))) < 1e-10);
        prop_assert!(cp.adjoint(&xy).max_abs_diff(&cp.multiply(&cp.adjoint(&y), &cp.adjoint(&x))) < 1e-10);
        prop_assert!(cp.ideal_violation(&xy) < 1e-12);
        prop_assert!(cp.multiply(&cp.unit(), &x).max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn coordinates_round_trip(seed in any::<u64>()) {
        let (mut rng, sys) = system(seed);
        let cp = CrossedProduct::new(sys.action);
        let x = random::random_crossed(&mut rng, &cp);
        let back = cp.from_coords(&cp.to_coords(&x)).unwrap();
        prop_assert_eq!(back.max_abs_diff(&x), 0.0);
    }

    #[test]
    fn regular_representation_is_covariant_and_a_star_homomorphism(seed in any::<u64>()) {
        let (mut rng, sys) = system(seed);
        let cp = CrossedProduct::new(sys.action);
        let rep = RegularRepresentation::build(&cp, BaseRepresentation::defining());
        prop_assert!(rep.check_covariance(1e-10).pass);
        let x = random::random_crossed(&mut rng, &cp);
        let y = random::random_crossed(&mut rng, &cp);
        let lhs = rep.integrated(&cp.multiply(&x, &y));
        prop_assert!(linalg::max_abs_diff(&lhs, &(rep.integrated(&x) * rep.integrated(&y))) < 1e-10);
        prop_assert!(linalg::max_abs_diff(&rep.integrated(&cp.adjoint(&x)), &rep.integrated(&x).adjoint()) < 1e-12);
    }

    #[test]
    fn reduced_norm_satisfies_the_c_star_identity(seed in any::<u64>()) {
        let (mut rng, sys) = system(seed);
        let cp = CrossedProduct::new(sys.action);
        let rep = RegularRepresentation::build(&cp, BaseRepresentation::defining());
        let x = random::random_crossed(&mut rng, &cp);
        let n = rep.reduced_norm(&x);
        let nn = rep.reduced_norm(&cp.multiply(&cp.adjoint(&x), &x));
        prop_assert!((nn - n * n).abs() <= 1e-10 * nn.max(1.0));
    }

    #[test]
    fn induced_trace_is_a_faithful_tracial_state(seed in any::<u64>()) {
        let (mut rng, sys) = system(seed);
        let cp = CrossedProduct::new(sys.action);
        let tt = cp.induced_trace(&sys.trace, 1e-9).unwrap();
        let x = random::random_crossed(&mut rng, &cp);
        let y = random::random_crossed(&mut rng, &cp);
        prop_assert!((tt.evaluate(&cp.multiply(&x, &y)) - tt.evaluate(&cp.multiply(&y, &x))).norm() < 1e-10);
        prop_assert!(tt.evaluate(&cp.multiply(&cp.adjoint(&x), &x)).re > 0.0);
        prop_assert!(GnsSpace::crossed(&cp, &tt).unwrap().min_gram_eigenvalue() > 1e-12);
    }

    #[test]
    fn generated_positive_definite_functions_pass(seed in any::<u64>()) {
        let (mut rng, sys) = system(seed);
        let eta = random::random_pd_eta(&mut rng, sys.action.group());
        prop_assert!(eta.is_positive_definite(sys.action.group(), 1e-9).pass);
        let (_, cert) = haagerup::h_from_eta(&sys.action, &eta, 1e-9);
        prop_assert!(cert.pass);
        let h = random::random_pd_h(&mut rng, &sys.action);
        let k = random::random_pd_h(&mut rng, &sys.action);
        prop_assert!(haagerup::is_pd_wrt_action(&sys.action, &h, PdConvention::Cutdown, 1e-9).pass);
        prop_assert!(haagerup::is_pd_wrt_action(&sys.action, &h.schur_product(&k), PdConvention::Cutdown, 1e-9).pass);
    }

    #[test]
    fn equivariant_ucp_and_pd_h_induce_ucp_maps(seed in any::<u64>()) {
        let (mut rng, sys) = system(seed);
        let cp = CrossedProduct::new(sys.action.clone());
        prop_assume!(cp.dim() <= 24);
        let a_space = GnsSpace::algebra(sys.action.shape(), &sys.trace).unwrap();
        let tt = cp.induced_trace(&sys.trace, 1e-9).unwrap();
        let cp_space = GnsSpace::crossed(&cp, &tt).unwrap();
        let phi = random::random_equivariant_ucp(&mut rng, &sys.action);
        prop_assert!(haagerup::equivariance_deviation(&sys.action, &phi) < 1e-9);
        let h = random::random_pd_h(&mut rng, &sys.action);
        let (big, _) = haagerup::induce_ucp_on_crossed(&cp, &a_space, &phi, &h, 1e-9).unwrap();
        prop_assert!(haagerup::certify_induced(&a_space, &cp_space, &phi, &big, 1e-9).pass);
        let eta = haagerup::eta_from_ucp(&cp, &tt, &big);
        prop_assert!(eta.is_positive_definite(cp.group(), 1e-9).pass);
    }

    #[test]
    fn finite_rank_approximation_meets_its_target(seed in any::<u64>(), eps in 0.0f64..1.0) {
        let (mut rng, sys) = system(seed);
        let space = GnsSpace::algebra(sys.action.shape(), &sys.trace).unwrap();
        let phi = random::random_tau_preserving_ucp(&mut rng, sys.action.shape(), &sys.trace);
        let approx = space.finite_rank_approximation(&phi, eps);
        prop_assert!(approx.achieved <= eps + 1e-12);
        prop_assert!(space.operator_norm(&phi.sub(&approx.map)) <= eps + 1e-9);
        if approx.rank > 0 {
            prop_assert!(approx.singular_values[approx.rank - 1] > eps - 1e-12);
        }
    }

    #[test]
    fn chain_isometries_compose(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chain = random::random_chain(&mut rng, 3, 8);
        let spaces = chain.gns_spaces().unwrap();
        let embs = chain.embeddings();
        let u0 = inductive_limit::gns_isometry(&embs[0], &spaces[0], &spaces[1]);
        let u1 = inductive_limit::gns_isometry(&embs[1], &spaces[1], &spaces[2]);
        let direct = inductive_limit::gns_isometry(&chain.composite(0, 2).unwrap(), &spaces[0], &spaces[2]);
        prop_assert!(inductive_limit::isometry_deviation(&u0) < 1e-10);
        prop_assert!(linalg::max_abs_diff(&direct, &(&u1 * &u0)) < 1e-10);
        let e = inductive_limit::certify_expectation(&embs[0], &spaces[0], &spaces[1], 1e-9);
        prop_assert!(e.pass);
    }

    #[test]
    fn generated_descriptions_round_trip_through_json(seed in any::<u64>()) {
        let d = generate_random_system(seed, BUDGET);
        let text = serde_json::to_string(&d).unwrap();
        let back: SystemDescription = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &d);
        let sys = back.materialize().unwrap();
        let action = sys.action.unwrap();
        prop_assert!(action.validate(1e-9).valid);
        prop_assert!(action.check_invariant_trace(&sys.trace, 1e-9).invariant);
    }
}
