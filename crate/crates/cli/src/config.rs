//! Flat key-value experiment configuration.
//!
//! A config document names a builtin spec to start from (`base_spec`,
//! default `baseline`) and overrides any field. Keys mirror the
//! `ExperimentSpec` fields, with the scenario flattened into scalar keys.
//! TOML and JSON are both accepted; a run manifest is also a valid config.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sscdl_core::array_model::{AngleDeg, ArrayGeometry};
use sscdl_core::experiments::{
    builtin_spec, Averaging, ExperimentSpec, Method, SubspaceSource, SweepAxis, BUILTIN_NAMES,
};
use sscdl_core::signal_sim::Interferer;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_spec: Option<String>,
    pub name: Option<String>,
    pub axis: Option<SweepAxis>,
    pub values: Option<Vec<f64>>,
    pub methods: Option<Vec<Method>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub averaging: Option<Averaging>,
    pub subspace_source: Option<SubspaceSource>,
    pub projection_ratios: Option<bool>,
    pub subspace_dim: Option<usize>,
    pub num_sensors: Option<usize>,
    pub spacing_over_wavelength: Option<f64>,
    pub theta_d: Option<f64>,
    pub theta_0: Option<f64>,
    pub theta_1: Option<f64>,
    pub theta_2: Option<f64>,
    pub signal_power: Option<f64>,
    /// Alternative to `signal_power`: `P = noise_var·10^(snr_db/10)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub noise_var: Option<f64>,
    pub snapshots: Option<usize>,
    pub interferer_angles: Option<Vec<f64>>,
    pub interferer_powers: Option<Vec<f64>>,
    /// Loading factors for `gamma-sweep`; defaults to `[−3|γ̂|, |γ̂|]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_grid: Option<Vec<f64>>,
}

/// Loads a TOML or JSON config (chosen by extension). A JSON document with
/// a top-level `config` object is read as a run manifest.
pub fn load_config(path: &Path) -> Result<FlatConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        parse_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message().trim())))
    }
}

fn parse_json(text: &str) -> Result<FlatConfig, serde_json::Error> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("config") {
        Some(inner) => serde_json::from_value(inner.clone()),
        None => serde_json::from_value(value),
    }
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn angle(field: &str, v: f64) -> Result<AngleDeg, CliError> {
    AngleDeg::new(v).map_err(|_| field_err(field, format!("{v} is outside (-90, 90) degrees")))
}

/// Builtin spec by name, or a config error listing the valid names.
pub fn named_spec(name: &str) -> Result<ExperimentSpec, CliError> {
    builtin_spec(name).ok_or_else(|| {
        field_err(
            "spec",
            format!(
                "unknown spec {name:?}; expected one of {}",
                BUILTIN_NAMES.join(", ")
            ),
        )
    })
}

impl FlatConfig {
    /// Applies the overrides on top of `base_spec` and validates the result.
    pub fn resolve(&self) -> Result<ExperimentSpec, CliError> {
        let base_name = self.base_spec.as_deref().unwrap_or("baseline");
        let mut spec = builtin_spec(base_name).ok_or_else(|| {
            field_err(
                "base_spec",
                format!(
                    "unknown spec {base_name:?}; expected one of {}",
                    BUILTIN_NAMES.join(", ")
                ),
            )
        })?;
        macro_rules! set {
            ($field:ident => $target:expr) => {
                if let Some(v) = self.$field.clone() {
                    $target = v;
                }
            };
        }
        set!(name => spec.name);
        set!(axis => spec.axis);
        set!(values => spec.values);
        set!(methods => spec.methods);
        set!(trials => spec.trials);
        set!(seed => spec.seed);
        set!(averaging => spec.averaging);
        set!(subspace_source => spec.subspace_source);
        set!(projection_ratios => spec.projection_ratios);
        set!(subspace_dim => spec.subspace_dim);
        set!(noise_var => spec.base.noise_var);
        set!(snapshots => spec.base.snapshots);

        let sc = &mut spec.base;
        if self.num_sensors.is_some() || self.spacing_over_wavelength.is_some() {
            sc.geom = ArrayGeometry::new(
                self.num_sensors.unwrap_or(sc.geom.num_sensors),
                self.spacing_over_wavelength
                    .unwrap_or(sc.geom.spacing_over_wavelength),
            )
            .map_err(|e| field_err("num_sensors/spacing_over_wavelength", e))?;
        }
        for (field, value, target) in [
            ("theta_d", self.theta_d, &mut sc.theta_d),
            ("theta_0", self.theta_0, &mut sc.theta_0),
            ("theta_1", self.theta_1, &mut sc.theta_1),
            ("theta_2", self.theta_2, &mut sc.theta_2),
        ] {
            if let Some(v) = value {
                *target = angle(field, v)?;
            }
        }
        match (self.signal_power, self.snr_db) {
            (Some(_), Some(_)) => {
                return Err(field_err(
                    "snr_db",
                    "give either signal_power or snr_db, not both",
                ))
            }
            (Some(p), None) => sc.signal_power = p,
            (None, Some(snr)) => sc.set_snr_db(snr),
            (None, None) => {}
        }
        if self.interferer_angles.is_some() || self.interferer_powers.is_some() {
            let angles = self
                .interferer_angles
                .clone()
                .unwrap_or_else(|| sc.interferers.iter().map(|i| i.angle.deg()).collect());
            let powers = self
                .interferer_powers
                .clone()
                .unwrap_or_else(|| sc.interferers.iter().map(|i| i.power).collect());
            if angles.len() != powers.len() {
                return Err(field_err(
                    "interferer_powers",
                    format!("{} powers for {} angles", powers.len(), angles.len()),
                ));
            }
            sc.interferers = angles
                .iter()
                .zip(&powers)
                .map(|(&a, &p)| {
                    Ok(Interferer {
                        angle: angle("interferer_angles", a)?,
                        power: p,
                    })
                })
                .collect::<Result<_, CliError>>()?;
        }
        if let Some(grid) = &self.gamma_grid {
            if grid.is_empty() || grid.iter().any(|g| !g.is_finite()) {
                return Err(field_err(
                    "gamma_grid",
                    "must be a nonempty list of finite numbers",
                ));
            }
        }
        spec.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    /// Fully explicit config that resolves back to `spec`.
    pub fn from_spec(spec: &ExperimentSpec) -> Self {
        let sc = &spec.base;
        Self {
            base_spec: None,
            name: Some(spec.name.clone()),
            axis: Some(spec.axis),
            values: Some(spec.values.clone()),
            methods: Some(spec.methods.clone()),
            trials: Some(spec.trials),
            seed: Some(spec.seed),
            averaging: Some(spec.averaging),
            subspace_source: Some(spec.subspace_source),
            projection_ratios: Some(spec.projection_ratios),
            subspace_dim: Some(spec.subspace_dim),
            num_sensors: Some(sc.geom.num_sensors),
            spacing_over_wavelength: Some(sc.geom.spacing_over_wavelength),
            theta_d: Some(sc.theta_d.deg()),
            theta_0: Some(sc.theta_0.deg()),
            theta_1: Some(sc.theta_1.deg()),
            theta_2: Some(sc.theta_2.deg()),
            signal_power: Some(sc.signal_power),
            snr_db: None,
            noise_var: Some(sc.noise_var),
            snapshots: Some(sc.snapshots),
            interferer_angles: Some(sc.interferers.iter().map(|i| i.angle.deg()).collect()),
            interferer_powers: Some(sc.interferers.iter().map(|i| i.power).collect()),
            gamma_grid: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_baseline() {
        let spec = FlatConfig::default().resolve().unwrap();
        assert_eq!(spec, builtin_spec("baseline").unwrap());
    }

    #[test]
    fn explicit_config_round_trips_every_builtin() {
        for name in BUILTIN_NAMES {
            let spec = builtin_spec(name).unwrap();
            let flat = FlatConfig::from_spec(&spec);
            let text = serde_json::to_string(&flat).unwrap();
            let back: FlatConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back.resolve().unwrap(), spec, "{name}");
        }
    }

    #[test]
    fn toml_overrides() {
        let flat: FlatConfig = toml::from_str(
            r#"
            base_spec = "snapshots"
            name = "short"
            values = [20, 40]
            methods = ["dl", "sscdl"]
            trials = 10
            snr_db = 20
            interferer_angles = [-30, 40]
            "#,
        )
        .unwrap();
        let spec = flat.resolve().unwrap();
        assert_eq!(spec.axis, SweepAxis::Snapshots);
        assert_eq!(spec.values, vec![20.0, 40.0]);
        assert_eq!(spec.methods, vec![Method::Dl, Method::Sscdl]);
        assert!((spec.base.signal_power - 100.0).abs() < 1e-9);
        assert_eq!(spec.base.interferers[1].angle.deg(), 40.0);
        assert_eq!(spec.base.interferers[1].power, 1e2);
    }

    #[test]
    fn errors_name_the_field() {
        let e = toml::from_str::<FlatConfig>("tirals = 3").unwrap_err();
        assert!(e.message().contains("tirals"));
        let flat = FlatConfig {
            theta_0: Some(95.0),
            ..Default::default()
        };
        assert!(flat.resolve().unwrap_err().to_string().contains("theta_0"));
        let flat = FlatConfig {
            interferer_powers: Some(vec![1.0]),
            ..Default::default()
        };
        assert!(flat
            .resolve()
            .unwrap_err()
            .to_string()
            .contains("interferer_powers"));
        let flat = FlatConfig {
            base_spec: Some("nope".into()),
            ..Default::default()
        };
        assert!(flat
            .resolve()
            .unwrap_err()
            .to_string()
            .contains("base_spec"));
        let flat = FlatConfig {
            trials: Some(0),
            ..Default::default()
        };
        assert!(flat.resolve().unwrap_err().to_string().contains("trials"));
    }

    #[test]
    fn manifest_wrapper_is_accepted() {
        let flat = FlatConfig::from_spec(&builtin_spec("n14").unwrap());
        let doc = serde_json::json!({ "artifact_version": "x", "config": flat });
        assert_eq!(parse_json(&doc.to_string()).unwrap(), flat);
    }
}
