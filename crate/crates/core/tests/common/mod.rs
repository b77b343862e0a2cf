use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sscdl_core::array_model::{AngleDeg, ArrayGeometry};
use sscdl_core::signal_sim::{Interferer, Scenario};

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn deg(x: f64) -> AngleDeg {
    AngleDeg::new(x).unwrap()
}

/// A valid scenario with 4 to 12 sensors, a pointing error of up to 3°,
/// an uncertainty interval around the assumed DoA and 1 to 3 interferers
/// at least 5° outside it.
pub fn random_scenario(rng: &mut ChaCha12Rng) -> Scenario {
    let n = rng.random_range(4..=12);
    let theta_d: f64 = rng.random_range(-50.0..50.0);
    let theta_0 = theta_d + rng.random_range(-3.0..3.0);
    let half = (theta_0 - theta_d).abs() + rng.random_range(1.0..4.0);
    let (t1, t2) = (theta_0 - half, theta_0 + half);
    let mut interferers = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let angle = loop {
            let a: f64 = rng.random_range(-80.0..80.0);
            if a < t1 - 5.0 || a > t2 + 5.0 {
                break a;
            }
        };
        interferers.push(Interferer {
            angle: deg(angle),
            power: 10f64.powf(rng.random_range(0.0..4.0)),
        });
    }
    Scenario {
        geom: ArrayGeometry::half_wavelength(n).unwrap(),
        theta_d: deg(theta_d),
        theta_0: deg(theta_0),
        theta_1: deg(t1),
        theta_2: deg(t2),
        signal_power: 10f64.powf(rng.random_range(-1.0..3.0)),
        interferers,
        noise_var: 1.0,
        snapshots: rng.random_range(2 * n..=5 * n),
        seed: rng.random(),
    }
}
