//! Phase-space evolution of the Wigner function.
//!
//! ∂W/∂t = −(p/m) ∂ₓW + V′(x) ∂ₚW − (ħ²/24) V‴(x) ∂ₚ³W + 2γ ∂ₚ(pW) + D ∂ₚ²W
//!
//! All derivatives are taken spectrally on a periodic grid and time is
//! advanced with classic RK4. The cubic term is exact because potentials are
//! polynomials of degree at most four.

mod diagnostics;
mod engine;
mod field;
mod grid;
mod husimi;
mod potential;
mod scenario;
mod spectral;

pub use diagnostics::{compute_diagnostics, gibbs_entropy, negativity_volume, Diagnostics, NEGATIVE_TOLERANCE};
pub use engine::{
    classical_quantum_distance, evolve, evolve_with, fit_exponential_rate, linear_fit, stability_check, step,
    DistanceSeries, Evolution, EvolutionSpec, Integrator, ABSORBER_FRACTION, BREAKDOWN_THRESHOLD,
};
pub use field::{
    init_gaussian, GaussianPacket, InitialState, Moments, WignerField, MACROSCOPIC_ACTION_RATIO,
    SUPPORT_MARGIN_SIGMAS,
};
pub use grid::{PhaseSpaceGrid, MIN_POINTS};
pub use husimi::{gaussian_smooth, husimi};
pub use potential::{nonlinearity_scale, NonlinearityScale, PolynomialPotential};
pub use scenario::{InitialCondition, Scenario, Units};
