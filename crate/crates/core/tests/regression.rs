//! Values frozen from an independent dense-linear-algebra computation of the
//! baseline scenario (SNR 10 dB) with exact covariances.

use sscdl_core::beamformers::{default_gamma, diagonal_loading, mvdr};
use sscdl_core::gamma_analysis::{approximation_terms, exact_sscdl_sinr, exact_subspace};
use sscdl_core::metrics::{optimal_sinr_bound, output_sinr};
use sscdl_core::signal_sim::{exact_covariance, Scenario};

const TOL_DB: f64 = 1e-6;

#[test]
fn baseline_exact_covariance_values() {
    let sc = Scenario::baseline();
    let r_y = exact_covariance(&sc);
    assert!((optimal_sinr_bound(&sc).unwrap().db - 19.792058975).abs() < TOL_DB);

    let mv = mvdr(&r_y, sc.theta_0, &sc.geom).unwrap();
    assert!((output_sinr(&mv, &sc).unwrap().db + 11.871675598).abs() < TOL_DB);

    let dl = diagonal_loading(&r_y, sc.theta_0, default_gamma(&sc), &sc.geom).unwrap();
    assert!((output_sinr(&dl, &sc).unwrap().db - 18.637575873).abs() < TOL_DB);

    let basis = exact_subspace(&sc, 5).unwrap();
    let ssc = exact_sscdl_sinr(default_gamma(&sc).value(), &sc, &basis).unwrap();
    assert!((ssc.db - 19.790561556).abs() < TOL_DB);

    let terms = approximation_terms(&sc, &basis);
    assert!((terms.a_n.norm_squared() - 9.532707173).abs() < 1e-6);
}
