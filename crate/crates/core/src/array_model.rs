//! Uniform linear array geometry and steering vectors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::{CVector, Complex64};
use crate::{Error, Result};

/// A ULA of `num_sensors` omni-directional elements spaced
/// `spacing_over_wavelength` wavelengths apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub num_sensors: usize,
    pub spacing_over_wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(num_sensors: usize, spacing_over_wavelength: f64) -> Result<Self> {
        let geom = Self {
            num_sensors,
            spacing_over_wavelength,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Half-wavelength spacing.
    pub fn half_wavelength(num_sensors: usize) -> Result<Self> {
        Self::new(num_sensors, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sensors < 2 {
            return Err(Error::InvalidGeometry(format!(
                "num_sensors = {} (need at least 2)",
                self.num_sensors
            )));
        }
        if !(self.spacing_over_wavelength > 0.0 && self.spacing_over_wavelength.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "spacing_over_wavelength = {} (must be positive)",
                self.spacing_over_wavelength
            )));
        }
        Ok(())
    }
}

/// An azimuth angle in degrees, broadside = 0°, restricted to (−90°, 90°).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngleDeg(f64);

impl AngleDeg {
    pub fn new(deg: f64) -> Result<Self> {
        if deg.is_finite() && deg > -90.0 && deg < 90.0 {
            Ok(Self(deg))
        } else {
            Err(Error::AngleOutOfRange(deg))
        }
    }

    pub fn from_sin(s: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::AngleOutOfRange(f64::NAN));
        }
        Self::new(s.asin().to_degrees())
    }

    pub fn deg(self) -> f64 {
        self.0
    }

    pub fn rad(self) -> f64 {
        self.0.to_radians()
    }

    pub fn sin(self) -> f64 {
        self.rad().sin()
    }
}

impl std::fmt::Display for AngleDeg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// `a(θ)[k] = exp(j·2π·k·(d/λ)·sin θ)`, `k = 0..N−1`.
pub fn steering_vector(geom: &ArrayGeometry, theta: AngleDeg) -> CVector {
    let phase_step = 2.0 * PI * geom.spacing_over_wavelength * theta.sin();
    CVector::from_iterator(
        geom.num_sensors,
        (0..geom.num_sensors).map(|k| Complex64::from_polar(1.0, k as f64 * phase_step)),
    )
}

/// Same as [`steering_vector`] from a raw degree value.
pub fn steering_vector_deg(geom: &ArrayGeometry, theta_deg: f64) -> Result<CVector> {
    Ok(steering_vector(geom, AngleDeg::new(theta_deg)?))
}

/// `M` angles uniformly spaced in sine between `theta1` and `theta2`
/// inclusive: `φ_m = asin(sin θ1 + m·(sin θ2 − sin θ1)/(M−1))`.
///
/// `M = 1` is rejected here because the formula divides by `M − 1`; the
/// SSC-DL driver handles it with [`subspace_angles`].
pub fn angle_grid(theta1: AngleDeg, theta2: AngleDeg, m: usize) -> Result<Vec<AngleDeg>> {
    if theta1.deg() >= theta2.deg() {
        return Err(Error::DegenerateRange {
            theta1: theta1.deg(),
            theta2: theta2.deg(),
        });
    }
    if m < 2 {
        return Err(Error::BadDimension(format!(
            "angle grid needs M >= 2, got {m}"
        )));
    }
    let (s1, s2) = (theta1.sin(), theta2.sin());
    let step = (s2 - s1) / (m - 1) as f64;
    let mut grid = Vec::with_capacity(m);
    grid.push(theta1);
    for i in 1..m - 1 {
        grid.push(AngleDeg::from_sin(s1 + i as f64 * step)?);
    }
    grid.push(theta2);
    Ok(grid)
}

/// The angles whose MVDR weights span the SSC-DL subspace. For `M = 1` this
/// is the estimated DoA alone, which makes SSC-DL coincide with MVDR.
pub fn subspace_angles(
    theta0: AngleDeg,
    theta1: AngleDeg,
    theta2: AngleDeg,
    m: usize,
) -> Result<Vec<AngleDeg>> {
    match m {
        0 => Err(Error::BadDimension(
            "subspace dimension M must be >= 1".into(),
        )),
        1 => Ok(vec![theta0]),
        _ => angle_grid(theta1, theta2, m),
    }
}
