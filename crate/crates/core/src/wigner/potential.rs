use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// V(x) = Σ c_k x^k for k ≤ 4, optionally driven by −ε x cos(ω t).
///
/// The degree bound makes ∂⁵V vanish, so the Moyal series of the Wigner
/// equation stops after its first term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialPotential {
    pub coefficients: [f64; 5],
    #[serde(default)]
    pub drive_amplitude: f64,
    #[serde(default)]
    pub drive_frequency: f64,
}

impl PolynomialPotential {
    pub fn new(coefficients: [f64; 5]) -> Self {
        PolynomialPotential {
            coefficients,
            drive_amplitude: 0.0,
            drive_frequency: 0.0,
        }
    }

    pub fn free() -> Self {
        Self::new([0.0; 5])
    }

    /// V = k x² / 2.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        Self::new([0.0, 0.0, 0.5 * mass * omega * omega, 0.0, 0.0])
    }

    /// V = −a x² / 2 + b x⁴ / 4.
    pub fn double_well(a: f64, b: f64) -> Self {
        Self::new([0.0, 0.0, -0.5 * a, 0.0, 0.25 * b])
    }

    pub fn with_drive(mut self, amplitude: f64, frequency: f64) -> Self {
        self.drive_amplitude = amplitude;
        self.drive_frequency = frequency;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("coefficients", "must be finite"));
        }
        if !self.drive_amplitude.is_finite() || !self.drive_frequency.is_finite() {
            return Err(Error::validation("drive", "amplitude and frequency must be finite"));
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4])))
    }

    /// V′(x), excluding the drive.
    pub fn d1(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * 4.0 * c[4]))
    }

    pub fn d2(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        2.0 * c[2] + x * (6.0 * c[3] + x * 12.0 * c[4])
    }

    pub fn d3(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        6.0 * c[3] + 24.0 * c[4] * x
    }

    /// Force-gradient term of the drive at time `t`: ∂_x(−ε x cos ωt).
    pub fn drive_slope(&self, t: f64) -> f64 {
        if self.drive_amplitude == 0.0 {
            0.0
        } else {
            -self.drive_amplitude * (self.drive_frequency * t).cos()
        }
    }

    /// ∂V/∂x including the drive.
    pub fn force_gradient(&self, x: f64, t: f64) -> f64 {
        self.d1(x) + self.drive_slope(t)
    }

    /// True when V‴ vanishes identically.
    pub fn is_quadratic(&self) -> bool {
        self.coefficients[3] == 0.0 && self.coefficients[4] == 0.0
    }
}

/// The nonlinearity length χ = √|V′ / V‴|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearityScale {
    /// χ in cm; `f64::INFINITY` when V‴(x) = 0.
    pub chi: f64,
    /// Set when V′ and V‴ have opposite signs at x.
    pub opposite_signs: bool,
}

impl NonlinearityScale {
    pub fn is_infinite(&self) -> bool {
        self.chi.is_infinite()
    }
}

pub fn nonlinearity_scale(potential: &PolynomialPotential, x: f64) -> NonlinearityScale {
    let v1 = potential.d1(x);
    let v3 = potential.d3(x);
    if v3 == 0.0 {
        return NonlinearityScale {
            chi: f64::INFINITY,
            opposite_signs: false,
        };
    }
    NonlinearityScale {
        chi: (v1 / v3).abs().sqrt(),
        opposite_signs: v1 / v3 < 0.0,
    }
}
