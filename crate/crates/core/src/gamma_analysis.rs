//! Exact evaluation of SSC-DL output SINR as a function of the loading
//! factor, used to check the closed-form choice `γ̂ = −(σ_n² + P·N)`.
//!
//! Everything here runs on the exact covariances of a scenario. With the
//! exact `R_y`, `SINR(ŵ_M(γ)) = 1/(P·f(γ))` holds as an algebraic identity,
//! where `f(γ) = (a − αā)ᴴ W_M Z W_Mᴴ (a − αā)`. All quantities are
//! invariant under `W_M → W_M·T` for invertible `T`, so the orthonormal span
//! basis stands in for `W_M`.

use serde::{Deserialize, Serialize};

use crate::beamformers::{
    build_subspace, default_gamma, sscdl_in_subspace, LoadingFactor, SubspaceBasis,
};
use crate::metrics::{output_sinr, SinrValue};
use crate::numerics::{add_scaled_identity, symmetrize, CMatrix, CVector, Complex64, LuFactor};
use crate::signal_sim::{exact_covariance, interference_plus_noise_covariance, Scenario};
use crate::{Error, Result};

/// Subspace of a scenario built from its exact covariance.
pub fn exact_subspace(sc: &Scenario, m: usize) -> Result<SubspaceBasis> {
    build_subspace(
        &exact_covariance(sc),
        sc.theta_0,
        sc.theta_1,
        sc.theta_2,
        m,
        &sc.geom,
    )
}

/// Intermediate quantities of the SINR-reciprocal at one `γ`.
#[derive(Debug, Clone)]
pub struct ReciprocalTerms {
    pub gamma: f64,
    pub alpha: Complex64,
    /// `Z` expressed in the orthonormal span basis.
    pub z: CMatrix,
    pub f: f64,
}

fn reduced_lu(q: &CMatrix, r: &CMatrix, gamma: f64) -> Result<LuFactor> {
    let mut b = q.adjoint() * add_scaled_identity(r, gamma) * q;
    symmetrize(&mut b);
    LuFactor::new(&b).map_err(|e| match e {
        Error::SingularMatrix => Error::SingularReducedMatrix,
        other => other,
    })
}

/// `α`, `Z` and `f(γ)` computed exactly with `R_{I+n}`.
pub fn reciprocal_terms(
    gamma: f64,
    sc: &Scenario,
    basis: &SubspaceBasis,
) -> Result<ReciprocalTerms> {
    let q = &basis.q_s;
    let r_in = interference_plus_noise_covariance(sc);
    let lu = reduced_lu(q, &r_in, gamma)?;
    let p = sc.signal_power;
    let u = q.adjoint() * sc.steering_desired();
    let u_bar = q.adjoint() * sc.steering_assumed();
    let b_inv_u = lu.solve(&u)?;
    let b_inv_u_bar = lu.solve(&u_bar)?;
    let alpha = (Complex64::new(1.0, 0.0) + u.dotc(&b_inv_u) * p) / (u.dotc(&b_inv_u_bar) * p);
    let inner = q.adjoint() * &r_in * q;
    let b_inv_inner = lu.solve_columns(&inner)?;
    // Z = B⁻¹ (QᴴR_{I+n}Q) B⁻¹, with B Hermitian
    let z = lu.solve_columns(&b_inv_inner.adjoint())?.adjoint();
    let v = &u - &u_bar * alpha;
    let f = v.dotc(&(&z * &v)).re;
    Ok(ReciprocalTerms { gamma, alpha, z, f })
}

/// `f(γ)`, the reciprocal of `P·SINR(ŵ_M(γ))`.
pub fn exact_f(gamma: f64, sc: &Scenario, m: usize) -> Result<f64> {
    Ok(reciprocal_terms(gamma, sc, &exact_subspace(sc, m)?)?.f)
}

/// SINR of SSC-DL run on the exact `R_y` at loading `γ`.
pub fn exact_sscdl_sinr(gamma: f64, sc: &Scenario, basis: &SubspaceBasis) -> Result<SinrValue> {
    let w = sscdl_in_subspace(
        &exact_covariance(sc),
        basis,
        sc.theta_0,
        LoadingFactor::new(gamma)?,
        &sc.geom,
    )?;
    output_sinr(&w, sc)
}

/// Terms of the simplified reciprocal, built on projections onto `Q_s`.
#[derive(Debug, Clone)]
pub struct ApproximationTerms {
    /// `a_n = Q_sᴴa(θ_d)`.
    pub a_n: CVector,
    /// `ā_n = Q_sᴴa(θ_0)`.
    pub a_bar_n: CVector,
    pub alpha_0: Complex64,
    pub alpha_0_prime: Complex64,
    pub b: CVector,
    pub b_prime: CVector,
    /// `(‖b‖² − σ²·Re[bᴴb′]) / (σ²‖b′‖² − Re[bᴴb′])`.
    pub gamma_stationary: f64,
    /// `−(P‖a_n‖² + σ²)`.
    pub gamma_projected: f64,
    /// `‖Q_sᴴa(θ_Ij)‖ / ‖a(θ_Ij)‖` per interferer.
    pub interferer_leakage: Vec<f64>,
}

impl ApproximationTerms {
    /// Simplified reciprocal `σ²/(σ² + γ)²·‖b + γb′‖²`.
    pub fn approx_f(&self, gamma: f64, noise_var: f64) -> f64 {
        let v = &self.b + &self.b_prime * Complex64::new(gamma, 0.0);
        noise_var / (noise_var + gamma).powi(2) * v.norm_squared()
    }
}

pub fn approximation_terms(sc: &Scenario, basis: &SubspaceBasis) -> ApproximationTerms {
    let p = sc.signal_power;
    let s2 = sc.noise_var;
    let q_s = &basis.q_s;
    let a_n = q_s.adjoint() * sc.steering_desired();
    let a_bar_n = q_s.adjoint() * sc.steering_assumed();
    let cross = a_n.dotc(&a_bar_n) * p;
    let alpha_0 = Complex64::new(s2 + p * a_n.norm_squared(), 0.0) / cross;
    let alpha_0_prime = Complex64::new(1.0, 0.0) / cross;
    let b = &a_n - &a_bar_n * alpha_0;
    let b_prime = -(&a_bar_n * alpha_0_prime);
    let re_cross = b.dotc(&b_prime).re;
    let gamma_stationary =
        (b.norm_squared() - s2 * re_cross) / (s2 * b_prime.norm_squared() - re_cross);
    let interferer_leakage = sc
        .interferers
        .iter()
        .map(|int| {
            let a = crate::array_model::steering_vector(&sc.geom, int.angle);
            (q_s.adjoint() * &a).norm() / a.norm()
        })
        .collect();
    ApproximationTerms {
        gamma_projected: -(p * a_n.norm_squared() + s2),
        a_n,
        a_bar_n,
        alpha_0,
        alpha_0_prime,
        b,
        b_prime,
        gamma_stationary,
        interferer_leakage,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaSweep {
    pub gammas: Vec<f64>,
    /// `None` where the reduced matrix is singular.
    pub f_values: Vec<Option<f64>>,
    pub sinr_values: Vec<Option<SinrValue>>,
    /// Grid point with the largest SINR.
    pub argbest: f64,
    pub best_sinr: SinrValue,
    /// `−(σ_n² + P·N)`.
    pub gamma_hat: f64,
    pub sinr_at_gamma_hat: SinrValue,
    /// `SINR(argbest) − SINR(γ̂)` in dB.
    pub gap_db: f64,
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `[−3|γ̂|, |γ̂|]` with 400 points.
pub fn default_grid(sc: &Scenario) -> Vec<f64> {
    let g = default_gamma(sc).value().abs();
    linear_grid(-3.0 * g, g, 400)
}

/// Exact SINR and `f(γ)` over a grid of loading factors. Singular grid
/// points are kept as `None` and excluded from `argbest`.
pub fn sweep_gamma(sc: &Scenario, m: usize, grid: &[f64]) -> Result<GammaSweep> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("gamma grid is empty".into()));
    }
    let basis = exact_subspace(sc, m)?;
    let mut f_values = Vec::with_capacity(grid.len());
    let mut sinr_values = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, SinrValue)> = None;
    for &gamma in grid {
        let sinr = exact_sscdl_sinr(gamma, sc, &basis).ok();
        let f = reciprocal_terms(gamma, sc, &basis).ok().map(|t| t.f);
        if let Some(s) = sinr {
            if best.is_none_or(|(_, b)| s.linear > b.linear) {
                best = Some((gamma, s));
            }
        }
        f_values.push(f);
        sinr_values.push(sinr);
    }
    let (argbest, best_sinr) = best.ok_or(Error::SingularReducedMatrix)?;
    let gamma_hat = default_gamma(sc).value();
    let sinr_at_gamma_hat = exact_sscdl_sinr(gamma_hat, sc, &basis)?;
    Ok(GammaSweep {
        gammas: grid.to_vec(),
        f_values,
        sinr_values,
        argbest,
        best_sinr,
        gamma_hat,
        sinr_at_gamma_hat,
        gap_db: best_sinr.db - sinr_at_gamma_hat.db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_identity_at_random_gammas() {
        let sc = Scenario::baseline();
        let basis = exact_subspace(&sc, 5).unwrap();
        let mut s = 0x9e37_79b9_u64;
        for _ in 0..20 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            let gamma = ((s >> 11) as f64 / (1u64 << 53) as f64) * 600.0 - 400.0;
            let f = reciprocal_terms(gamma, &sc, &basis).unwrap().f;
            let sinr = exact_sscdl_sinr(gamma, &sc, &basis).unwrap().linear;
            assert!(f > 0.0);
            assert!(
                (sc.signal_power * f * sinr - 1.0).abs() < 1e-6,
                "γ = {gamma}"
            );
        }
    }

    #[test]
    fn rank_one_without_interference_is_flat_in_gamma() {
        let mut sc = Scenario::baseline();
        sc.interferers.clear();
        sc.theta_0 = sc.theta_d;
        let values: Vec<f64> = [-50.0, -5.0, 0.0, 3.0, 400.0]
            .iter()
            .map(|&g| exact_f(g, &sc, 1).unwrap())
            .collect();
        for v in &values {
            assert!((v - values[0]).abs() <= 1e-9 * values[0]);
        }
    }

    #[test]
    fn gamma_hat_nearly_minimizes_f_on_baseline() {
        let sc = Scenario::baseline();
        let f_hat = exact_f(-101.0, &sc, 5).unwrap();
        let basis = exact_subspace(&sc, 5).unwrap();
        let min = (-300..=100)
            .filter_map(|g| reciprocal_terms(g as f64, &sc, &basis).ok())
            .map(|t| t.f)
            .fold(f64::INFINITY, f64::min);
        assert!(f_hat >= min * (1.0 - 1e-12));
        assert!(f_hat / min < 1.001, "f(γ̂)/min f = {}", f_hat / min);
    }

    #[test]
    fn single_point_grid() {
        let sc = Scenario::baseline();
        let sweep = sweep_gamma(&sc, 5, &[-101.0]).unwrap();
        assert_eq!(sweep.argbest, -101.0);
        assert_eq!(sweep.gap_db, 0.0);
        assert!(sweep_gamma(&sc, 5, &[]).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid(&Scenario::baseline());
        assert_eq!(g.len(), 400);
        assert_eq!(g[0], -303.0);
        assert_eq!(g[399], 101.0);
    }

    #[test]
    fn stationary_point_reduces_to_projected_gamma() {
        for snr in [0.0, 10.0, 25.0] {
            let sc = Scenario::baseline().with_snr_db(snr);
            let terms = approximation_terms(&sc, &exact_subspace(&sc, 5).unwrap());
            let rel = (terms.gamma_stationary - terms.gamma_projected).abs()
                / terms.gamma_projected.abs();
            assert!(
                rel < 1e-9,
                "snr {snr}: {} vs {}",
                terms.gamma_stationary,
                terms.gamma_projected
            );
        }
    }

    #[test]
    fn baseline_approximation_premises() {
        let sc = Scenario::baseline();
        let terms = approximation_terms(&sc, &exact_subspace(&sc, 5).unwrap());
        // ‖a_n‖² close to N (frozen from a direct projection)
        assert!(
            (terms.a_n.norm_squared() - 9.5327).abs() < 1e-3,
            "{}",
            terms.a_n.norm_squared()
        );
        for leak in &terms.interferer_leakage {
            assert!(*leak <= 0.1);
        }
    }

    #[test]
    fn approximate_reciprocal_tracks_exact_near_gamma_hat() {
        let sc = Scenario::baseline();
        let basis = exact_subspace(&sc, 5).unwrap();
        let terms = approximation_terms(&sc, &basis);
        let exact = reciprocal_terms(-101.0, &sc, &basis).unwrap().f;
        let approx = terms.approx_f(-101.0, sc.noise_var);
        assert!((approx / exact - 1.0).abs() < 0.1, "{approx} vs {exact}");
    }
}
