//! Physical constants in CGS units.
//!
//! Every quantity in this crate is expressed in the centimetre-gram-second
//! system: actions in erg·s, momenta in g·cm/s, momentum diffusion
//! coefficients in erg·g/s (equivalently g²·cm²/s³).

/// Seconds per Julian-ish year used for all year conversions.
pub const SECONDS_PER_YEAR: f64 = 3.156e7;

/// Seconds per day.
pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// The set of fundamental constants the formulas depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, erg·s.
    pub hbar: f64,
    /// Newtonian gravitational constant, cm³ g⁻¹ s⁻².
    pub g: f64,
    /// Boltzmann constant, erg/K.
    pub k_b: f64,
    /// Proton mass, g.
    pub proton_mass: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values.
    pub const CGS: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-27,
        g: 6.674_30e-8,
        k_b: 1.380_649e-16,
        proton_mass: 1.672_621_923_69e-24,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CGS
    }
}

pub fn seconds_to_years(t: f64) -> f64 {
    t / SECONDS_PER_YEAR
}

pub fn years_to_seconds(t: f64) -> f64 {
    t * SECONDS_PER_YEAR
}
