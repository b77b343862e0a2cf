//! Property tests over randomly drawn valid scenarios.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use sscdl_core::array_model::steering_vector;
use sscdl_core::beamformers::{
    build_subspace, default_gamma, diagonal_loading, mvdr, optimal, sscdl, sscdl_in_subspace,
    LoadingFactor, SubspaceBasis, WeightVector,
};
use sscdl_core::experiments::{builtin_spec, derive_seed, point_context, trial_weights};
use sscdl_core::gamma_analysis::{exact_sscdl_sinr, exact_subspace, reciprocal_terms};
use sscdl_core::metrics::{
    optimal_sinr_bound, output_sinr, projection_ratio_dl, projection_ratio_sscdl,
};
use sscdl_core::numerics::{
    add_scaled_identity, hermitian_defect, max_abs_entry, orthonormal_complement,
    orthonormal_range, quadratic_form,
};
use sscdl_core::signal_sim::{sample_covariance, synthesize_snapshots, Scenario};
use sscdl_core::{CMatrix, CVector, Complex64};

fn scenario(seed: u64) -> Scenario {
    common::random_scenario(&mut common::rng(seed))
}

fn sample_r(sc: &Scenario) -> CMatrix {
    sample_covariance(&synthesize_snapshots(sc).unwrap()).unwrap()
}

fn rel_err(a: &CVector, b: &CVector) -> f64 {
    (a - b).norm() / b.norm()
}

fn random_vector(rng: &mut ChaCha12Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        Complex64::new(
            StandardNormal.sample(&mut *rng),
            StandardNormal.sample(&mut *rng),
        )
    })
}

/// Subspace dimension in `2..N` drawn from the scenario seed.
fn subspace_dim(sc: &Scenario, pick: usize) -> usize {
    2 + pick % (sc.n() - 2)
}

/// Every estimator's weight on the scenario's own sample covariance.
fn all_weights(sc: &Scenario, m: usize) -> Vec<WeightVector> {
    let r = sample_r(sc);
    let gamma = default_gamma(sc);
    let exact = exact_subspace(sc, m).unwrap();
    vec![
        mvdr(&r, sc.theta_0, &sc.geom).unwrap(),
        diagonal_loading(&r, sc.theta_0, gamma, &sc.geom).unwrap(),
        sscdl(&r, sc, m, gamma).unwrap().0,
        sscdl_in_subspace(&r, &exact, sc.theta_0, gamma, &sc.geom).unwrap(),
        optimal(sc).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_weight_has_unit_constraint_response(seed in any::<u64>(), pick in 0usize..16) {
        let sc = scenario(seed);
        for w in all_weights(&sc, subspace_dim(&sc, pick)) {
            let resp = w.response_at(&sc.geom, w.constraint_angle).norm();
            prop_assert!((resp - 1.0).abs() <= 1e-8, "{:?}: {resp}", w.estimator);
        }
    }

    #[test]
    fn sscdl_weight_lies_in_the_subspace(seed in any::<u64>(), pick in 0usize..16) {
        let sc = scenario(seed);
        let m = subspace_dim(&sc, pick);
        let r = sample_r(&sc);
        let (w, basis) = sscdl(&r, &sc, m, default_gamma(&sc)).unwrap();
        prop_assert!(basis.residual_norm(&w.w) <= 1e-8 * w.w.norm());
        let exact = exact_subspace(&sc, m).unwrap();
        let w = sscdl_in_subspace(&r, &exact, sc.theta_0, default_gamma(&sc), &sc.geom).unwrap();
        prop_assert!(exact.residual_norm(&w.w) <= 1e-8 * w.w.norm());
    }

    #[test]
    fn degenerate_dimensions_match_mvdr_and_dl(seed in any::<u64>()) {
        let sc = scenario(seed);
        let r = sample_r(&sc);
        let gamma = default_gamma(&sc);
        let mv = mvdr(&r, sc.theta_0, &sc.geom).unwrap();
        let dl = diagonal_loading(&r, sc.theta_0, gamma, &sc.geom).unwrap();
        let unloaded =
            diagonal_loading(&r, sc.theta_0, LoadingFactor::new(0.0).unwrap(), &sc.geom).unwrap();
        prop_assert!(rel_err(&sscdl(&r, &sc, sc.n(), gamma).unwrap().0.w, &dl.w) < 1e-6);
        prop_assert!(rel_err(&sscdl(&r, &sc, 1, gamma).unwrap().0.w, &mv.w) < 1e-6);
        prop_assert!(rel_err(&unloaded.w, &mv.w) < 1e-6);
    }

    #[test]
    fn mvdr_is_scale_invariant(seed in any::<u64>(), log_c in -3.0f64..3.0) {
        let sc = scenario(seed);
        let r = sample_r(&sc);
        let scaled = &r * Complex64::new(10f64.powf(log_c), 0.0);
        let a = mvdr(&r, sc.theta_0, &sc.geom).unwrap();
        let b = mvdr(&scaled, sc.theta_0, &sc.geom).unwrap();
        prop_assert!(rel_err(&b.w, &a.w) < 1e-10);
    }

    #[test]
    fn sscdl_minimizes_loaded_power_when_positive_definite(
        seed in any::<u64>(),
        pick in 0usize..16,
        frac in 0.0f64..1.0,
    ) {
        let sc = scenario(seed);
        let m = subspace_dim(&sc, pick);
        let r = sample_r(&sc);
        let gamma = frac * default_gamma(&sc).value().abs();
        let (w, basis) = sscdl(&r, &sc, m, LoadingFactor::new(gamma).unwrap()).unwrap();
        let loaded = add_scaled_identity(&r, gamma);
        let best = quadratic_form(&loaded, &w.w);
        let a0 = steering_vector(&sc.geom, sc.theta_0);
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5eed);
        for i in 0..1000 {
            let c = random_vector(&mut rng, m);
            // Half the candidates are small perturbations of the optimum.
            let v = if i % 2 == 0 {
                &basis.q_s * c
            } else {
                &w.w + &basis.q_s * c * Complex64::new(1e-3 * w.w.norm(), 0.0)
            };
            let v = &v / v.dotc(&a0).conj();
            prop_assert!((v.dotc(&a0) - Complex64::new(1.0, 0.0)).norm() < 1e-9);
            prop_assert!(quadratic_form(&loaded, &v) >= best * (1.0 - 1e-9));
        }
    }

    #[test]
    fn sinr_is_invariant_to_weight_scaling(
        seed in any::<u64>(),
        re in -10.0f64..10.0,
        im in -10.0f64..10.0,
    ) {
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 1e-3);
        let sc = scenario(seed);
        for w in all_weights(&sc, 2) {
            let s = output_sinr(&w, &sc).unwrap();
            let scaled = WeightVector { w: &w.w * c, ..w.clone() };
            let t = output_sinr(&scaled, &sc).unwrap();
            prop_assert!((t.linear - s.linear).abs() <= 1e-10 * s.linear);
            prop_assert!((s.db - 10.0 * s.linear.log10()).abs() <= 1e-9);
        }
    }

    #[test]
    fn no_method_exceeds_the_optimal_sinr(seed in any::<u64>(), pick in 0usize..16) {
        let sc = scenario(seed);
        let bound = optimal_sinr_bound(&sc).unwrap().linear;
        for w in all_weights(&sc, subspace_dim(&sc, pick)) {
            let s = output_sinr(&w, &sc).unwrap().linear;
            prop_assert!(s <= bound + 1e-9, "{:?}: {s} > {bound}", w.estimator);
        }
    }

    #[test]
    fn projection_ratios_ignore_the_factorization(
        seed in any::<u64>(),
        pick in 0usize..16,
        phase in 0.0f64..std::f64::consts::TAU,
    ) {
        let sc = scenario(seed);
        let m = subspace_dim(&sc, pick);
        let r = sample_r(&sc);
        let qr = build_subspace(&r, sc.theta_0, sc.theta_1, sc.theta_2, m, &sc.geom).unwrap();
        prop_assume!(qr.rank == m);
        // Same subspace under a random unitary change of basis.
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let u = CMatrix::from_fn(m, m, |_, _| random_vector(&mut rng, 1)[0]).qr().q();
        let q_s = &qr.q_s * u;
        let q_n = orthonormal_complement(&q_s, sc.n()).unwrap();
        let rotated_basis = SubspaceBasis { q_s, q_n, ..qr.clone() };
        // Independent factorization (SVD, phase-rotated columns). Its span
        // agrees with the QR one only to about cond(W_M)·ε.
        let mut q_s = orthonormal_range(&qr.w_m).unwrap().q;
        for (j, mut col) in q_s.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, phase * (j + 1) as f64);
        }
        let q_n = orthonormal_complement(&q_s, sc.n()).unwrap();
        let svd = SubspaceBasis { q_s, q_n, ..qr.clone() };
        let cond = qr.singular_values[0] / qr.singular_values[m - 1];
        let svd_tol = 1e-9 + 1e-13 * cond;
        let dl = diagonal_loading(&r, sc.theta_0, default_gamma(&sc), &sc.geom).unwrap();
        let rotated = WeightVector {
            w: &dl.w * Complex64::from_polar(1.0, phase),
            ..dl.clone()
        };
        for int in &sc.interferers {
            let a = projection_ratio_sscdl(&qr, int.angle, &sc.geom).unwrap().value;
            let b = projection_ratio_sscdl(&rotated_basis, int.angle, &sc.geom).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-3), "{a} vs {b}");
            let b = projection_ratio_sscdl(&svd, int.angle, &sc.geom).unwrap().value;
            prop_assert!((a - b).abs() <= svd_tol * a.max(1e-3), "{a} vs {b}, cond {cond:e}");

            let a = projection_ratio_dl(&dl, int.angle, &sc.geom).unwrap().value;
            let b = projection_ratio_dl(&rotated, int.angle, &sc.geom).unwrap().value;
            // Complement projection written without any factorization.
            let v = steering_vector(&sc.geom, int.angle);
            let along = &dl.w * (dl.w.dotc(&v) / Complex64::new(dl.w.norm_squared(), 0.0));
            let direct = along.norm() / (&v - &along).norm();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-3));
            prop_assert!((a - direct).abs() <= 1e-9 * a.max(1e-3));
        }
    }

    #[test]
    fn reciprocal_identity_holds(seed in any::<u64>(), pick in 0usize..16, frac in -3.0f64..1.0) {
        let sc = scenario(seed);
        let basis = exact_subspace(&sc, subspace_dim(&sc, pick)).unwrap();
        let gamma = frac * default_gamma(&sc).value().abs();
        let terms = reciprocal_terms(gamma, &sc, &basis);
        let sinr = exact_sscdl_sinr(gamma, &sc, &basis);
        prop_assume!(terms.is_ok() && sinr.is_ok());
        let (f, sinr) = (terms.unwrap().f, sinr.unwrap().linear);
        prop_assert!(f > 0.0);
        prop_assert!((sc.signal_power * f * sinr - 1.0).abs() <= 1e-6, "{}", sc.signal_power * f * sinr);
    }

    #[test]
    fn sample_covariance_is_hermitian_psd(seed in any::<u64>()) {
        let sc = scenario(seed);
        let r = sample_r(&sc);
        prop_assert!(hermitian_defect(&r) <= 1e-12 * max_abs_entry(&r));
        let trace = r.trace().re;
        let min_eig = r.symmetric_eigenvalues().min();
        prop_assert!(min_eig >= -1e-9 * trace);
    }

    #[test]
    fn snapshots_and_trials_are_deterministic(seed in any::<u64>(), trial in 0usize..1000) {
        let sc = scenario(seed);
        prop_assert_eq!(
            synthesize_snapshots(&sc).unwrap().samples,
            synthesize_snapshots(&sc).unwrap().samples
        );
        prop_assert_eq!(derive_seed(seed, 3, trial), derive_seed(seed, 3, trial));
        prop_assert_ne!(derive_seed(seed, 3, trial), derive_seed(seed, 3, trial + 1));
        let mut spec = builtin_spec("baseline").unwrap();
        spec.seed = seed;
        let ctx = point_context(&spec, 2).unwrap();
        let (a_sc, a) = trial_weights(&spec, &ctx, trial).unwrap();
        let (b_sc, b) = trial_weights(&spec, &ctx, trial).unwrap();
        prop_assert_eq!(a_sc.seed, b_sc.seed);
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.w, &y.w);
        }
    }
}
