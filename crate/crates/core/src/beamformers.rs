//! Weight-vector estimators: MVDR, diagonal loading, SSC-DL and the
//! clairvoyant optimum.
//!
//! Every estimator returns weights normalized so that `wᴴa = 1` (real,
//! positive) at the steering angle it was asked for.

use serde::{Deserialize, Serialize};

use crate::array_model::{steering_vector, subspace_angles, AngleDeg, ArrayGeometry};
use crate::numerics::{
    add_scaled_identity, column_basis, hermitian_solve, orthonormal_complement_or_empty,
    orthonormal_range, symmetrize, CMatrix, CVector, Complex64, LuFactor,
};
use crate::signal_sim::{exact_covariance, Scenario};
use crate::{Error, Result};

/// `|aᴴx|` below this fraction of `‖a‖·‖x‖` means the unit-response
/// constraint cannot be met.
const RESPONSE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimator {
    Mvdr,
    Dl,
    Sscdl,
    Optimal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub w: CVector,
    /// Angle at which `|wᴴa| = 1` is enforced.
    pub constraint_angle: AngleDeg,
    pub estimator: Estimator,
}

impl WeightVector {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// `wᴴa`.
    pub fn response(&self, a: &CVector) -> Complex64 {
        self.w.dotc(a)
    }

    pub fn response_at(&self, geom: &ArrayGeometry, theta: AngleDeg) -> Complex64 {
        self.response(&steering_vector(geom, theta))
    }
}

/// Diagonal loading factor `γ`; negative values are legitimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LoadingFactor(f64);

impl LoadingFactor {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() {
            Ok(Self(gamma))
        } else {
            Err(Error::InvalidScenario(format!(
                "loading factor must be finite, got {gamma}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// The SSC-DL constraint subspace `span(W_M)`.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    /// Grid angles `φ_m` behind each column of `w_m`.
    pub angles: Vec<AngleDeg>,
    /// Raw MVDR weights `[w_1 … w_M]`, `N × M`.
    pub w_m: CMatrix,
    /// Orthonormal basis `Q_s` of all `M` columns, `N × M` (Householder QR).
    /// `W_M` always has full column rank in exact arithmetic, so no
    /// columns are dropped even when it is badly conditioned.
    pub q_s: CMatrix,
    /// Orthonormal complement `Q_n`, `N × (N − M)`.
    pub q_n: CMatrix,
    /// Numerical rank of `W_M` at relative tolerance `RANK_TOL`; diagnostic.
    pub rank: usize,
    /// Singular values of `W_M`, descending.
    pub singular_values: Vec<f64>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.w_m.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.w_m.nrows()
    }

    /// `‖(I − Q_sQ_sᴴ)v‖`.
    pub fn residual_norm(&self, v: &CVector) -> f64 {
        (v - &self.q_s * (self.q_s.adjoint() * v)).norm()
    }
}

fn unit_response(x: CVector, a: &CVector) -> Option<CVector> {
    let denom = a.dotc(&x);
    let mag = denom.norm();
    if !mag.is_finite() || mag <= RESPONSE_TOL * a.norm() * x.norm() {
        return None;
    }
    // w = x / (aᴴx)ᴴ makes wᴴa = 1 exactly (up to rounding).
    Some(x / denom.conj())
}

fn distortionless(lu: &LuFactor, a: &CVector) -> Result<Option<CVector>> {
    Ok(unit_response(lu.solve(a)?, a))
}

/// `w = R⁻¹a / (aᴴR⁻¹a)` with `a = a(steer_angle)`.
pub fn mvdr(r: &CMatrix, steer_angle: AngleDeg, geom: &ArrayGeometry) -> Result<WeightVector> {
    let a = steering_vector(geom, steer_angle);
    let x = hermitian_solve(r, &a)?;
    let w = unit_response(x, &a).ok_or(Error::SingularMatrix)?;
    Ok(WeightVector {
        w,
        constraint_angle: steer_angle,
        estimator: Estimator::Mvdr,
    })
}

/// MVDR on `R + γI`.
pub fn diagonal_loading(
    r: &CMatrix,
    steer_angle: AngleDeg,
    gamma: LoadingFactor,
    geom: &ArrayGeometry,
) -> Result<WeightVector> {
    let loaded = add_scaled_identity(r, gamma.value());
    let a = steering_vector(geom, steer_angle);
    let x = hermitian_solve(&loaded, &a).map_err(|e| match e {
        Error::SingularMatrix => Error::SingularLoadedMatrix,
        other => other,
    })?;
    let w = unit_response(x, &a).ok_or(Error::SingularLoadedMatrix)?;
    Ok(WeightVector {
        w,
        constraint_angle: steer_angle,
        estimator: Estimator::Dl,
    })
}

/// MVDR weights at each grid angle, stacked into `W_M`, plus orthonormal
/// bases of their span and its complement. `M = 1` uses the estimated DoA
/// `theta0` as the only angle.
pub fn build_subspace(
    r: &CMatrix,
    theta0: AngleDeg,
    theta1: AngleDeg,
    theta2: AngleDeg,
    m: usize,
    geom: &ArrayGeometry,
) -> Result<SubspaceBasis> {
    let n = geom.num_sensors;
    if m > n {
        return Err(Error::DimensionTooLarge { m, n });
    }
    if r.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r.nrows(),
        });
    }
    let angles = subspace_angles(theta0, theta1, theta2, m)?;
    let lu = LuFactor::new(r)?;
    let mut w_m = CMatrix::zeros(n, m);
    for (j, &phi) in angles.iter().enumerate() {
        let a = steering_vector(geom, phi);
        let w = distortionless(&lu, &a)?.ok_or(Error::SingularMatrix)?;
        w_m.set_column(j, &w);
    }
    let q_s = column_basis(&w_m)?;
    let range = orthonormal_range(&w_m)?;
    let q_n = orthonormal_complement_or_empty(&q_s, n)?;
    Ok(SubspaceBasis {
        angles,
        w_m,
        q_s,
        q_n,
        rank: range.rank,
        singular_values: range.singular_values,
    })
}

/// Minimizes `wᴴ(R + γI)w` over `w ∈ span(W_M)` subject to `|wᴴa(θ0)| = 1`.
///
/// With `Q = Q_s`, `ŵ = Q·G⁻¹·Qᴴa / (aᴴQ·G⁻¹·Qᴴa)`
/// and `G = Qᴴ(R + γI)Q`; this is the same vector as the `W_M` form of the
/// closed-form solution but does not square the conditioning of `W_M`.
/// `R + γI` may be indefinite; only `G` has to be invertible.
pub fn sscdl_in_subspace(
    r: &CMatrix,
    basis: &SubspaceBasis,
    theta0: AngleDeg,
    gamma: LoadingFactor,
    geom: &ArrayGeometry,
) -> Result<WeightVector> {
    let n = geom.num_sensors;
    if r.nrows() != n || basis.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r.nrows(),
        });
    }
    let q = &basis.q_s;
    let loaded = add_scaled_identity(r, gamma.value());
    let mut g = q.adjoint() * &loaded * q;
    symmetrize(&mut g);
    let lu = LuFactor::new(&g).map_err(|e| match e {
        Error::SingularMatrix => Error::SingularReducedMatrix,
        other => other,
    })?;
    let a0 = steering_vector(geom, theta0);
    let z = lu.solve(&(q.adjoint() * &a0))?;
    let w = unit_response(q * z, &a0).ok_or(Error::SingularReducedMatrix)?;
    Ok(WeightVector {
        w,
        constraint_angle: theta0,
        estimator: Estimator::Sscdl,
    })
}

/// SSC-DL with one covariance `r` used for both the subspace and the
/// loaded solve.
pub fn sscdl(
    r: &CMatrix,
    sc: &Scenario,
    m: usize,
    gamma: LoadingFactor,
) -> Result<(WeightVector, SubspaceBasis)> {
    let basis = build_subspace(r, sc.theta_0, sc.theta_1, sc.theta_2, m, &sc.geom)?;
    let w = sscdl_in_subspace(r, &basis, sc.theta_0, gamma, &sc.geom)?;
    Ok((w, basis))
}

/// `γ = −(σ_n² + P·N)` from the scenario's true signal and noise powers.
pub fn default_gamma(sc: &Scenario) -> LoadingFactor {
    LoadingFactor(-(sc.noise_var + sc.signal_power * sc.n() as f64))
}

/// MVDR on the exact covariance, steered at the true DoA.
pub fn optimal(sc: &Scenario) -> Result<WeightVector> {
    let mut w = mvdr(&exact_covariance(sc), sc.theta_d, &sc.geom)?;
    w.estimator = Estimator::Optimal;
    Ok(w)
}
