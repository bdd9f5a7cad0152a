//! Macroscopic body profiles and the catalog that stores them.
//!
//! Catalog documents are TOML with one `[[body]]` table per record. Every key
//! carries its unit (`mass_g`, `volume_cm3`, ...). Some fields can be derived
//! from others; see [`BodyRecord`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{PhysicalConstants, SECONDS_PER_DAY, SECONDS_PER_YEAR};
use crate::error::{require_non_negative, require_positive, Error, Result};

const BUILTIN_CATALOG: &str = include_str!("../data/catalog.toml");

/// Minimum value of `sigma_p0 * chi / hbar` for a catalogued body.
pub const MACROSCOPICITY_THRESHOLD: f64 = 1e10;

/// A fully resolved macroscopic body. All fields CGS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyProfile {
    pub name: String,
    pub mass_g: f64,
    pub volume_cm3: f64,
    /// Number of nucleons.
    pub particle_count: f64,
    pub temperature_k: f64,
    /// Environmental relaxation rate γ.
    pub relax_rate_per_s: f64,
    /// Initial momentum dispersion σ_p(0).
    pub sigma_p0_g_cm_per_s: f64,
    pub lyapunov_rate_per_s: f64,
    /// Surface transverse to the diffusing momentum component.
    pub cross_section_cm2: f64,
    /// Nonlinearity length χ.
    pub nonlinearity_scale_cm: f64,
}

/// One record as written in a catalog document, before defaults are applied.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyRecord {
    pub name: Option<String>,
    pub mass_g: Option<f64>,
    pub volume_cm3: Option<f64>,
    pub particle_count: Option<f64>,
    pub temperature_k: Option<f64>,
    pub relax_rate_per_s: Option<f64>,
    pub sigma_p0_g_cm_per_s: Option<f64>,
    pub orbital_speed_cm_per_s: Option<f64>,
    pub lyapunov_rate_per_s: Option<f64>,
    pub lyapunov_time_yr: Option<f64>,
    pub lyapunov_time_days: Option<f64>,
    pub cross_section_cm2: Option<f64>,
    pub nonlinearity_scale_cm: Option<f64>,
}

#[derive(Serialize)]
struct CatalogDoc<'a> {
    body: &'a [BodyProfile],
}

/// Initial momentum dispersion identified with the body's mean momentum.
pub fn default_sigma_p0(body: &BodyProfile, orbital_speed_cm_per_s: f64) -> Result<f64> {
    momentum_from_speed(body.mass_g, orbital_speed_cm_per_s)
}

fn momentum_from_speed(mass_g: f64, speed: f64) -> Result<f64> {
    if !(speed.is_finite() && speed > 0.0) {
        return Err(Error::domain(format!("orbital speed must be > 0, got {speed}")));
    }
    Ok(mass_g * speed)
}

/// Transverse cross-section of the sphere with volume `volume_cm3`.
pub fn equal_volume_disc(volume_cm3: f64) -> f64 {
    PI * (3.0 * volume_cm3 / (4.0 * PI)).powf(2.0 / 3.0)
}

impl BodyRecord {
    /// Apply defaults and validate.
    pub fn resolve(&self, consts: &PhysicalConstants) -> Result<BodyProfile> {
        fn need(v: Option<f64>, field: &str) -> Result<f64> {
            v.ok_or_else(|| Error::validation(field, "missing"))
        }
        let name = self
            .name
            .clone()
            .filter(|n| !n.trim().is_empty())
            .ok_or_else(|| Error::validation("name", "missing"))?;
        let mass_g = need(self.mass_g, "mass_g")?;
        require_positive("mass_g", mass_g)?;
        let volume_cm3 = need(self.volume_cm3, "volume_cm3")?;
        require_positive("volume_cm3", volume_cm3)?;

        let sigma_p0 = match (self.sigma_p0_g_cm_per_s, self.orbital_speed_cm_per_s) {
            (Some(s), None) => s,
            (None, Some(v)) => momentum_from_speed(mass_g, v)
                .map_err(|e| Error::validation("orbital_speed_cm_per_s", e.to_string()))?,
            (Some(_), Some(_)) => {
                return Err(Error::validation(
                    "sigma_p0_g_cm_per_s",
                    "give either sigma_p0_g_cm_per_s or orbital_speed_cm_per_s, not both",
                ))
            }
            (None, None) => return Err(Error::validation("sigma_p0_g_cm_per_s", "missing")),
        };

        let lyapunov = match (
            self.lyapunov_rate_per_s,
            self.lyapunov_time_yr,
            self.lyapunov_time_days,
        ) {
            (Some(r), None, None) => r,
            (None, Some(y), None) => {
                require_positive("lyapunov_time_yr", y)?;
                1.0 / (y * SECONDS_PER_YEAR)
            }
            (None, None, Some(d)) => {
                require_positive("lyapunov_time_days", d)?;
                1.0 / (d * SECONDS_PER_DAY)
            }
            (None, None, None) => return Err(Error::validation("lyapunov_rate_per_s", "missing")),
            _ => {
                return Err(Error::validation(
                    "lyapunov_rate_per_s",
                    "give exactly one of lyapunov_rate_per_s, lyapunov_time_yr, lyapunov_time_days",
                ))
            }
        };

        let body = BodyProfile {
            name,
            mass_g,
            volume_cm3,
            particle_count: self
                .particle_count
                .unwrap_or(mass_g / consts.proton_mass),
            temperature_k: need(self.temperature_k, "temperature_k")?,
            relax_rate_per_s: self.relax_rate_per_s.unwrap_or(0.0),
            sigma_p0_g_cm_per_s: sigma_p0,
            lyapunov_rate_per_s: lyapunov,
            cross_section_cm2: self
                .cross_section_cm2
                .unwrap_or_else(|| equal_volume_disc(volume_cm3)),
            nonlinearity_scale_cm: need(self.nonlinearity_scale_cm, "nonlinearity_scale_cm")?,
        };
        body.validate()?;
        Ok(body)
    }
}

impl BodyProfile {
    /// Check the type invariants that hold for any body.
    pub fn validate(&self) -> Result<()> {
        require_positive("mass_g", self.mass_g)?;
        require_positive("volume_cm3", self.volume_cm3)?;
        require_positive("particle_count", self.particle_count)?;
        require_non_negative("temperature_k", self.temperature_k)?;
        require_non_negative("relax_rate_per_s", self.relax_rate_per_s)?;
        require_positive("sigma_p0_g_cm_per_s", self.sigma_p0_g_cm_per_s)?;
        require_positive("lyapunov_rate_per_s", self.lyapunov_rate_per_s)?;
        require_positive("cross_section_cm2", self.cross_section_cm2)?;
        require_positive("nonlinearity_scale_cm", self.nonlinearity_scale_cm)?;
        Ok(())
    }

    /// The stricter checks applied to catalog entries: nucleon count
    /// consistent with the mass, and an action far above ħ.
    pub fn validate_catalog_entry(&self, consts: &PhysicalConstants) -> Result<()> {
        self.validate()?;
        let expected = self.mass_g / consts.proton_mass;
        let ratio = self.particle_count / expected;
        if !(0.5..=2.0).contains(&ratio) {
            return Err(Error::validation(
                "particle_count",
                format!(
                    "{:e} is not within a factor 2 of mass/proton_mass = {expected:e}",
                    self.particle_count
                ),
            ));
        }
        let action = self.macroscopic_action_ratio(consts);
        if action <= MACROSCOPICITY_THRESHOLD {
            return Err(Error::validation(
                "sigma_p0_g_cm_per_s",
                format!("sigma_p0 * chi / hbar = {action:e} is not macroscopic (> 1e10)"),
            ));
        }
        Ok(())
    }

    /// χ σ_p(0) / ħ.
    pub fn macroscopic_action_ratio(&self, consts: &PhysicalConstants) -> f64 {
        self.nonlinearity_scale_cm * self.sigma_p0_g_cm_per_s / consts.hbar
    }

    pub fn lyapunov_time_s(&self) -> f64 {
        1.0 / self.lyapunov_rate_per_s
    }
}

/// Parse a catalog document. Records are validated in order; errors carry the
/// zero-based record index.
pub fn load_catalog(source: &str, consts: &PhysicalConstants) -> Result<Vec<BodyProfile>> {
    let doc: toml::Table = toml::from_str(source).map_err(|e| Error::Parse {
        record: None,
        message: e.message().to_string(),
    })?;
    for key in doc.keys() {
        if key != "body" {
            return Err(Error::Parse {
                record: None,
                message: format!("unexpected top-level key `{key}`"),
            });
        }
    }
    let records = match doc.get("body") {
        None => return Ok(Vec::new()),
        Some(toml::Value::Array(items)) => items,
        Some(_) => {
            return Err(Error::Parse {
                record: None,
                message: "`body` must be an array of tables".into(),
            })
        }
    };
    let mut bodies: Vec<BodyProfile> = Vec::with_capacity(records.len());
    for (index, value) in records.iter().enumerate() {
        let record: BodyRecord = value.clone().try_into().map_err(|e: toml::de::Error| {
            Error::Parse {
                record: Some(index),
                message: e.message().to_string(),
            }
        })?;
        let body = record
            .resolve(consts)
            .and_then(|b| b.validate_catalog_entry(consts).map(|_| b))
            .map_err(|e| match e {
                Error::Validation { field, message } => Error::Validation {
                    field,
                    message: format!("record {index}: {message}"),
                },
                other => other,
            })?;
        if bodies.iter().any(|b| b.name == body.name) {
            return Err(Error::Parse {
                record: Some(index),
                message: format!("duplicate body name `{}`", body.name),
            });
        }
        bodies.push(body);
    }
    Ok(bodies)
}

/// Serialize resolved profiles back into a catalog document. Every derived
/// field is written explicitly so that reloading is exact.
pub fn to_toml(bodies: &[BodyProfile]) -> String {
    toml::to_string(&CatalogDoc { body: bodies }).expect("body profiles serialize to TOML")
}

/// The set of bodies available to the calculators.
#[derive(Debug, Clone)]
pub struct Catalog {
    bodies: Vec<BodyProfile>,
}

impl Catalog {
    pub fn builtin() -> Self {
        let bodies = load_catalog(BUILTIN_CATALOG, &PhysicalConstants::CGS)
            .expect("built-in catalog is valid");
        Catalog { bodies }
    }

    /// The built-in catalog with the entries of `source` layered on top;
    /// records with an existing name replace the built-in one.
    pub fn with_overrides(source: &str, consts: &PhysicalConstants) -> Result<Self> {
        let mut catalog = Self::builtin();
        for body in load_catalog(source, consts)? {
            match catalog.bodies.iter_mut().find(|b| b.name == body.name) {
                Some(slot) => *slot = body,
                None => catalog.bodies.push(body),
            }
        }
        Ok(catalog)
    }

    pub fn get(&self, name: &str) -> Result<&BodyProfile> {
        self.bodies
            .iter()
            .find(|b| b.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownBody(name.to_string()))
    }

    pub fn bodies(&self) -> &[BodyProfile] {
        &self.bodies
    }
}
