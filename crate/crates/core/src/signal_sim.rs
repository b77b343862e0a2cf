//! Scenario description, snapshot synthesis and covariance matrices.
//!
//! Sources and noise are circular complex Gaussians. Snapshots are i.i.d.
//! and fully determined by `Scenario::seed`; the generator is ChaCha12.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::array_model::{steering_vector, AngleDeg, ArrayGeometry};
use crate::numerics::{add_outer, symmetrize, CMatrix, CVector, Complex64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interferer {
    pub angle: AngleDeg,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub geom: ArrayGeometry,
    /// True DoA of the desired signal.
    pub theta_d: AngleDeg,
    /// DoA assumed by the receiver.
    pub theta_0: AngleDeg,
    /// Lower bound of the DoA uncertainty interval.
    pub theta_1: AngleDeg,
    /// Upper bound of the DoA uncertainty interval.
    pub theta_2: AngleDeg,
    pub signal_power: f64,
    pub interferers: Vec<Interferer>,
    pub noise_var: f64,
    pub snapshots: usize,
    pub seed: u64,
}

impl Scenario {
    /// Ten-element half-wavelength ULA, desired source at 0° assumed at
    /// 2.5°, uncertainty interval [−1.5°, 6.5°], interferers at −20° (40 dB)
    /// and 30° (20 dB), unit noise, SNR 10 dB, 100 snapshots.
    pub fn baseline() -> Self {
        let deg = |x: f64| AngleDeg::new(x).expect("constant angle");
        Self {
            geom: ArrayGeometry {
                num_sensors: 10,
                spacing_over_wavelength: 0.5,
            },
            theta_d: deg(0.0),
            theta_0: deg(2.5),
            theta_1: deg(-1.5),
            theta_2: deg(6.5),
            signal_power: 10.0,
            interferers: vec![
                Interferer {
                    angle: deg(-20.0),
                    power: 1e4,
                },
                Interferer {
                    angle: deg(30.0),
                    power: 1e2,
                },
            ],
            noise_var: 1.0,
            snapshots: 100,
            seed: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.geom.num_sensors
    }

    /// Input SNR `P/σ_n²` in dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.signal_power / self.noise_var).log10()
    }

    /// Sets `P = σ_n²·10^(snr/10)`, keeping noise and interference fixed.
    pub fn set_snr_db(&mut self, snr_db: f64) {
        self.signal_power = self.noise_var * 10f64.powf(snr_db / 10.0);
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.set_snr_db(snr_db);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.geom.validate()?;
        let (t1, td, t2) = (self.theta_1.deg(), self.theta_d.deg(), self.theta_2.deg());
        if !(t1 < td && td < t2) {
            return Err(Error::InvalidScenario(format!(
                "theta_d = {td}° must lie strictly inside (theta_1, theta_2) = ({t1}°, {t2}°)"
            )));
        }
        for (j, int) in self.interferers.iter().enumerate() {
            let a = int.angle.deg();
            if (t1..=t2).contains(&a) {
                return Err(Error::InvalidScenario(format!(
                    "interferer {} at {a}° lies inside [theta_1, theta_2]",
                    j + 1
                )));
            }
            if !(int.power > 0.0 && int.power.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "interferer {} power = {} (must be positive)",
                    j + 1,
                    int.power
                )));
            }
        }
        if !(self.signal_power >= 0.0 && self.signal_power.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "signal_power = {} (must be non-negative)",
                self.signal_power
            )));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "noise_var = {} (must be non-negative)",
                self.noise_var
            )));
        }
        if self.snapshots == 0 {
            return Err(Error::InvalidScenario("snapshots must be >= 1".into()));
        }
        Ok(())
    }

    pub fn steering_desired(&self) -> CVector {
        steering_vector(&self.geom, self.theta_d)
    }

    pub fn steering_assumed(&self) -> CVector {
        steering_vector(&self.geom, self.theta_0)
    }
}

/// `K` received snapshots stored column-wise in an `N × K` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBatch {
    pub samples: CMatrix,
}

impl SnapshotBatch {
    pub fn from_columns(samples: CMatrix) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }

    pub fn dim(&self) -> usize {
        self.samples.nrows()
    }

    pub fn snapshot(&self, k: usize) -> CVector {
        self.samples.column(k).into_owned()
    }
}

fn complex_gaussian(rng: &mut ChaCha12Rng, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(scale * re, scale * im)
}

/// Draws `y(k) = x₀(k)a(θ_d) + Σ_j x_j(k)a(θ_Ij) + n(k)` for `k = 0..K−1`.
///
/// Per snapshot the draw order is `x₀`, then `x_1..x_J`, then the `N` noise
/// entries, so a given seed always yields the same batch.
pub fn synthesize_snapshots(sc: &Scenario) -> Result<SnapshotBatch> {
    sc.validate()?;
    let n = sc.n();
    let k = sc.snapshots;
    let a_d = sc.steering_desired();
    let a_int: Vec<CVector> = sc
        .interferers
        .iter()
        .map(|i| steering_vector(&sc.geom, i.angle))
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(sc.seed);
    let mut samples = CMatrix::zeros(n, k);
    let mut amps = vec![Complex64::new(0.0, 0.0); sc.interferers.len()];
    for col in 0..k {
        let x0 = complex_gaussian(&mut rng, sc.signal_power);
        for (amp, int) in amps.iter_mut().zip(&sc.interferers) {
            *amp = complex_gaussian(&mut rng, int.power);
        }
        for row in 0..n {
            let mut y = x0 * a_d[row];
            for (amp, a) in amps.iter().zip(&a_int) {
                y += amp * a[row];
            }
            y += complex_gaussian(&mut rng, sc.noise_var);
            samples[(row, col)] = y;
        }
    }
    Ok(SnapshotBatch { samples })
}

/// `R̂_y = (1/K) Σ_k y(k)y(k)ᴴ`, exactly Hermitian.
pub fn sample_covariance(batch: &SnapshotBatch) -> Result<CMatrix> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let y = &batch.samples;
    let mut r = y * y.adjoint() / Complex64::new(batch.len() as f64, 0.0);
    symmetrize(&mut r);
    Ok(r)
}

/// `R_I + σ_n²·I`.
pub fn interference_plus_noise_covariance(sc: &Scenario) -> CMatrix {
    let n = sc.n();
    let mut r = CMatrix::identity(n, n) * Complex64::new(sc.noise_var, 0.0);
    for int in &sc.interferers {
        add_outer(&mut r, &steering_vector(&sc.geom, int.angle), int.power);
    }
    r
}

/// `R_y = P·a(θ_d)a(θ_d)ᴴ + R_I + σ_n²·I`.
pub fn exact_covariance(sc: &Scenario) -> CMatrix {
    let mut r = interference_plus_noise_covariance(sc);
    add_outer(&mut r, &sc.steering_desired(), sc.signal_power);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{hermitian_defect, max_abs_entry};

    fn quiet(n: usize) -> Scenario {
        let mut sc = Scenario::baseline();
        sc.geom.num_sensors = n;
        sc.interferers.clear();
        sc
    }

    #[test]
    fn baseline_is_valid() {
        Scenario::baseline().validate().unwrap();
        assert!((Scenario::baseline().snr_db() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_scenarios() {
        let mut sc = Scenario::baseline();
        sc.theta_d = AngleDeg::new(7.0).unwrap();
        assert!(matches!(sc.validate(), Err(Error::InvalidScenario(_))));

        let mut sc = Scenario::baseline();
        sc.interferers[0].angle = AngleDeg::new(3.0).unwrap();
        assert!(matches!(sc.validate(), Err(Error::InvalidScenario(_))));

        let mut sc = Scenario::baseline();
        sc.snapshots = 0;
        assert!(sc.validate().is_err());

        let mut sc = Scenario::baseline();
        sc.noise_var = -1.0;
        assert!(sc.validate().is_err());
    }

    #[test]
    fn snr_setter_scales_signal_power_only() {
        let sc = Scenario::baseline().with_snr_db(20.0);
        assert!((sc.signal_power - 100.0).abs() < 1e-9);
        assert_eq!(sc.noise_var, 1.0);
        assert_eq!(sc.interferers[0].power, 1e4);
    }

    #[test]
    fn same_seed_same_batch() {
        let sc = Scenario::baseline();
        let a = synthesize_snapshots(&sc).unwrap();
        let b = synthesize_snapshots(&sc).unwrap();
        assert_eq!(a, b);
        let mut other = sc.clone();
        other.seed = 1;
        assert_ne!(a, synthesize_snapshots(&other).unwrap());
    }

    #[test]
    fn noiseless_single_source_is_rank_one() {
        let mut sc = quiet(6);
        sc.noise_var = 0.0;
        sc.snapshots = 20;
        let batch = synthesize_snapshots(&sc).unwrap();
        let a = sc.steering_desired();
        for k in 0..batch.len() {
            let y = batch.snapshot(k);
            let coeff = y[0] / a[0];
            assert!((&y - &a * coeff).norm() <= 1e-12 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn noise_only_covariance_approaches_identity() {
        let mut sc = quiet(8);
        sc.signal_power = 0.0;
        sc.snapshots = 10_000;
        let r = sample_covariance(&synthesize_snapshots(&sc).unwrap()).unwrap();
        let trace: f64 = (0..8).map(|i| r[(i, i)].re).sum();
        assert!(
            (trace / 8.0 - 1.0).abs() < 0.05,
            "trace/N = {}",
            trace / 8.0
        );
    }

    #[test]
    fn sample_covariance_small_cases() {
        let mut y = CMatrix::zeros(4, 1);
        y[(0, 0)] = Complex64::new(1.0, 0.0);
        let r = sample_covariance(&SnapshotBatch::from_columns(y)).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = Complex64::new(1.0, 0.0);
        assert_eq!(r, expected);

        let mut y = CMatrix::zeros(4, 2);
        y[(0, 0)] = Complex64::new(1.0, 0.0);
        y[(1, 1)] = Complex64::new(1.0, 0.0);
        let r = sample_covariance(&SnapshotBatch::from_columns(y)).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = Complex64::new(0.5, 0.0);
        expected[(1, 1)] = Complex64::new(0.5, 0.0);
        assert_eq!(r, expected);

        assert_eq!(
            sample_covariance(&SnapshotBatch::from_columns(CMatrix::zeros(4, 0))),
            Err(Error::EmptyBatch)
        );
    }

    #[test]
    fn sample_covariance_is_hermitian_psd() {
        let sc = Scenario::baseline();
        let r = sample_covariance(&synthesize_snapshots(&sc).unwrap()).unwrap();
        assert!(hermitian_defect(&r) <= 1e-12 * max_abs_entry(&r));
        let eig = r.clone().symmetric_eigen();
        let trace: f64 = (0..10).map(|i| r[(i, i)].re).sum();
        assert!(eig.eigenvalues.min() >= -1e-9 * trace);
    }

    #[test]
    fn exact_covariance_traces() {
        let mut sc = quiet(7);
        sc.signal_power = 0.0;
        let r = exact_covariance(&sc);
        assert!((r - CMatrix::identity(7, 7)).norm() < 1e-15);

        let sc = Scenario::baseline();
        let r = exact_covariance(&sc);
        let trace: f64 = (0..10).map(|i| r[(i, i)].re).sum();
        assert!((trace - 101_110.0).abs() < 1e-8);
    }

    #[test]
    fn interference_plus_noise_spectrum() {
        let sc = quiet(6);
        let r = interference_plus_noise_covariance(&sc);
        assert!((r - CMatrix::identity(6, 6)).norm() < 1e-15);

        let mut sc = quiet(6);
        sc.noise_var = 2.0;
        sc.interferers.push(Interferer {
            angle: AngleDeg::new(40.0).unwrap(),
            power: 3.0,
        });
        let mut eig: Vec<f64> = interference_plus_noise_covariance(&sc)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eig.sort_by(f64::total_cmp);
        for &e in &eig[..5] {
            assert!((e - 2.0).abs() < 1e-10);
        }
        assert!((eig[5] - (2.0 + 6.0 * 3.0)).abs() < 1e-10);
    }

    #[test]
    fn baseline_interference_dominant_eigenvalue() {
        let r = interference_plus_noise_covariance(&Scenario::baseline());
        let largest = r.symmetric_eigen().eigenvalues.max();
        let predicted = 1.0 + 10.0 * 1e4;
        assert!((largest - predicted).abs() / predicted < 1e-3, "{largest}");
    }
}
