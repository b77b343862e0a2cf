//! Output SINR, beampatterns and interference projection ratios.

use serde::{Deserialize, Serialize};

use crate::array_model::{steering_vector, AngleDeg, ArrayGeometry};
use crate::beamformers::{SubspaceBasis, WeightVector};
use crate::numerics::{
    hermitian_solve, orthonormal_complement, quadratic_form, CMatrix, CVector, Complex64,
};
use crate::signal_sim::{interference_plus_noise_covariance, Scenario};
use crate::{Error, Result};

/// Floor applied to beampattern magnitudes when reported in dB.
pub const DB_FLOOR: f64 = -120.0;

const DENOMINATOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrValue {
    pub linear: f64,
    pub db: f64,
}

impl SinrValue {
    pub fn from_linear(linear: f64) -> Self {
        Self {
            linear,
            db: 10.0 * linear.log10(),
        }
    }
}

fn check_weight(w: &WeightVector, sc: &Scenario) -> Result<()> {
    if w.dim() != sc.n() {
        return Err(Error::DimensionMismatch {
            expected: sc.n(),
            got: w.dim(),
        });
    }
    if w.w.norm() == 0.0 {
        return Err(Error::ZeroWeight);
    }
    Ok(())
}

/// `wᴴR_{I+n}w` evaluated as `σ_n²‖w‖² + Σ_j σ_j²|a(θ_j)ᴴw|²`. Each term
/// is non-negative, so the result keeps full relative accuracy even when
/// `w` nearly nulls a strong interferer; the dense quadratic form loses
/// about `cond(R_{I+n})·ε`.
pub fn interference_leakage(w: &CVector, sc: &Scenario) -> f64 {
    sc.interferers
        .iter()
        .fold(sc.noise_var * w.norm_squared(), |acc, int| {
            acc + int.power * steering_vector(&sc.geom, int.angle).dotc(w).norm_sqr()
        })
}

fn rayleigh_sinr(w: &CVector, sc: &Scenario) -> SinrValue {
    let signal = sc.signal_power * sc.steering_desired().dotc(w).norm_sqr();
    SinrValue::from_linear(signal / interference_leakage(w, sc))
}

/// `P·|wᴴa(θ_d)|² / (wᴴR_{I+n}w)` against the scenario's exact `R_{I+n}`.
pub fn output_sinr(w: &WeightVector, sc: &Scenario) -> Result<SinrValue> {
    check_weight(w, sc)?;
    Ok(rayleigh_sinr(&w.w, sc))
}

/// Output SINR against an arbitrary interference-plus-noise covariance.
pub fn output_sinr_with(w: &WeightVector, sc: &Scenario, r_in: &CMatrix) -> Result<SinrValue> {
    check_weight(w, sc)?;
    let signal = sc.signal_power * w.response(&sc.steering_desired()).norm_sqr();
    Ok(SinrValue::from_linear(signal / quadratic_form(r_in, &w.w)))
}

/// Upper bound on the output SINR over all weights, `P·aᴴR_{I+n}⁻¹a`.
///
/// Evaluated as the SINR of `x = R_{I+n}⁻¹a`, which equals the bound
/// exactly; the quotient is stationary at `x`, so solve error enters only
/// to second order.
pub fn optimal_sinr_bound(sc: &Scenario) -> Result<SinrValue> {
    let x = hermitian_solve(
        &interference_plus_noise_covariance(sc),
        &sc.steering_desired(),
    )?;
    Ok(rayleigh_sinr(&x, sc))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeampatternCurve {
    pub angles: Vec<AngleDeg>,
    /// `|wᴴa(θ)|` per angle.
    pub magnitudes: Vec<f64>,
}

impl BeampatternCurve {
    /// `20·log10|wᴴa(θ)|`, clamped at [`DB_FLOOR`].
    pub fn magnitudes_db(&self) -> Vec<f64> {
        self.magnitudes.iter().map(|&m| magnitude_db(m)).collect()
    }
}

pub fn magnitude_db(m: f64) -> f64 {
    if m > 0.0 {
        (20.0 * m.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

pub fn beampattern(
    w: &WeightVector,
    geom: &ArrayGeometry,
    angles: &[AngleDeg],
) -> Result<BeampatternCurve> {
    if angles.is_empty() {
        return Err(Error::BadDimension(
            "beampattern needs at least one angle".into(),
        ));
    }
    if angles.windows(2).any(|p| p[1].deg() <= p[0].deg()) {
        return Err(Error::BadDimension(
            "beampattern angles must be strictly increasing".into(),
        ));
    }
    let magnitudes = angles
        .iter()
        .map(|&t| w.response(&steering_vector(geom, t)).norm())
        .collect();
    Ok(BeampatternCurve {
        angles: angles.to_vec(),
        magnitudes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProjectionMethod {
    SscdlSubspace,
    DlWeight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRatio {
    pub value: f64,
    pub method: ProjectionMethod,
    /// Zero-based interferer index when computed for a scenario.
    pub interferer_index: Option<usize>,
}

/// `‖Q_sQ_sᴴa‖ / ‖Q_nQ_nᴴa‖`.
pub(crate) fn subspace_ratio(q_s: &CMatrix, q_n: &CMatrix, a: &CVector) -> Result<f64> {
    if q_n.ncols() == 0 {
        return Err(Error::DegenerateDenominator(0.0));
    }
    let inside = (q_s * (q_s.adjoint() * a)).norm();
    let outside = (q_n * (q_n.adjoint() * a)).norm();
    if outside < DENOMINATOR_TOL * a.norm() {
        return Err(Error::DegenerateDenominator(outside));
    }
    Ok(inside / outside)
}

/// How much of an interferer's steering vector falls inside the SSC-DL
/// constraint subspace relative to its complement.
pub fn projection_ratio_sscdl(
    basis: &SubspaceBasis,
    interferer_angle: AngleDeg,
    geom: &ArrayGeometry,
) -> Result<ProjectionRatio> {
    let a = steering_vector(geom, interferer_angle);
    Ok(ProjectionRatio {
        value: subspace_ratio(&basis.q_s, &basis.q_n, &a)?,
        method: ProjectionMethod::SscdlSubspace,
        interferer_index: None,
    })
}

/// Ratio of the interferer's projection on `w_DL` to its projection on the
/// orthogonal complement of `w_DL`.
pub fn projection_ratio_dl(
    w_dl: &WeightVector,
    interferer_angle: AngleDeg,
    geom: &ArrayGeometry,
) -> Result<ProjectionRatio> {
    let norm = w_dl.w.norm();
    if norm == 0.0 {
        return Err(Error::ZeroWeight);
    }
    let a = steering_vector(geom, interferer_angle);
    let unit = CMatrix::from_column_slice(
        w_dl.dim(),
        1,
        (&w_dl.w / Complex64::new(norm, 0.0)).as_slice(),
    );
    let q_l = orthonormal_complement(&unit, w_dl.dim())?;
    let along = &w_dl.w * (w_dl.w.dotc(&a) / Complex64::new(norm * norm, 0.0));
    let across = (&q_l * (q_l.adjoint() * &a)).norm();
    if across < DENOMINATOR_TOL * a.norm() {
        return Err(Error::DegenerateDenominator(across));
    }
    Ok(ProjectionRatio {
        value: along.norm() / across,
        method: ProjectionMethod::DlWeight,
        interferer_index: None,
    })
}

/// Both projection ratios for every interferer of a scenario, as
/// `(sscdl, dl)` pairs in interferer order.
pub fn scenario_projection_ratios(
    sc: &Scenario,
    basis: &SubspaceBasis,
    w_dl: &WeightVector,
) -> Result<Vec<(ProjectionRatio, ProjectionRatio)>> {
    sc.interferers
        .iter()
        .enumerate()
        .map(|(j, int)| {
            let mut s = projection_ratio_sscdl(basis, int.angle, &sc.geom)?;
            let mut d = projection_ratio_dl(w_dl, int.angle, &sc.geom)?;
            s.interferer_index = Some(j);
            d.interferer_index = Some(j);
            Ok((s, d))
        })
        .collect()
}
