//! Scenario files: grid, initial state and evolution parameters in TOML.
//!
//! ```toml
//! units = "scaled"          # or "cgs" (ħ fixed to its CGS value)
//!
//! [grid]
//! nx = 256
//! np = 256
//! x_min = -7.0
//! x_max = 7.0
//! p_min = -7.0
//! p_max = 7.0
//!
//! [initial]
//! kind = "gaussian"         # or "cat"
//! x0 = 2.0
//! p0 = 0.0
//! sigma_x = 0.7071067811865476
//! sigma_p = 0.7071067811865476
//!
//! [evolution]
//! mass = 1.0
//! hbar = 1.0
//! dt = 0.002
//! t_end = 6.283185307179586
//! snapshot_stride = 500
//!
//! [evolution.potential]
//! coefficients = [0.0, 0.0, 0.5, 0.0, 0.0]
//! ```

use serde::{Deserialize, Serialize};

use super::engine::EvolutionSpec;
use super::field::{GaussianPacket, WignerField};
use super::grid::PhaseSpaceGrid;
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// CGS throughout, ħ = 1.0546e-27 erg·s.
    Cgs,
    /// Dimensionless; `mass` and `hbar` are free parameters.
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialCondition {
    Gaussian {
        x0: f64,
        p0: f64,
        sigma_x: f64,
        sigma_p: f64,
        #[serde(default)]
        cov_xp: f64,
    },
    /// Even cat state, branches at ±separation/2.
    Cat { separation: f64, sigma_x: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub units: Units,
    pub grid: PhaseSpaceGrid,
    pub initial: InitialCondition,
    pub evolution: EvolutionSpec,
}

impl Scenario {
    pub fn from_toml_str(source: &str) -> Result<Self> {
        if source.trim().is_empty() {
            return Err(Error::Parse {
                record: None,
                message: "scenario is empty".into(),
            });
        }
        // in CGS mode ħ may be omitted; scaled mode must state it
        let raw: toml::Table = toml::from_str(source).map_err(parse_error)?;
        let scaled = raw.get("units").and_then(|u| u.as_str()) == Some("scaled");
        if scaled {
            let evo = raw.get("evolution").and_then(|e| e.as_table());
            for key in ["hbar", "mass"] {
                if evo.is_none_or(|e| !e.contains_key(key)) {
                    return Err(Error::validation(
                        format!("evolution.{key}"),
                        "required in scaled units",
                    ));
                }
            }
        }
        let scenario: Scenario = toml::from_str(source).map_err(parse_error)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.evolution.validate()?;
        if self.units == Units::Cgs && self.evolution.hbar != PhysicalConstants::CGS.hbar {
            return Err(Error::validation(
                "evolution.hbar",
                "only scaled units may change hbar",
            ));
        }
        Ok(())
    }

    pub fn initial_field(&self) -> Result<WignerField> {
        let hbar = self.evolution.hbar;
        match self.initial {
            InitialCondition::Gaussian { x0, p0, sigma_x, sigma_p, cov_xp } => WignerField::gaussian(
                &self.grid,
                &GaussianPacket::new(x0, p0, sigma_x, sigma_p).with_covariance(cov_xp),
                hbar,
            ),
            InitialCondition::Cat { separation, sigma_x } => {
                WignerField::even_cat(&self.grid, separation, sigma_x, hbar)
            }
        }
    }

    /// The same scenario with ħ replaced (scaled units only).
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        if self.units != Units::Scaled {
            return Err(Error::validation("units", "hbar sweeps need scaled units"));
        }
        let mut s = self.clone();
        s.evolution.hbar = hbar;
        s.validate()?;
        Ok(s)
    }
}

fn parse_error(e: toml::de::Error) -> Error {
    Error::Parse {
        record: None,
        message: e.to_string(),
    }
}
