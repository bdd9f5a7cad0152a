//! Quantum-classical correspondence for chaotic macroscopic bodies.
//!
//! - [`catalog`]: body profiles (mass, volume, temperature, chaos inputs).
//! - [`collapse`]: momentum diffusion from the environment and from the
//!   GRW, GPR and GGR collapse models.
//! - [`timescales`]: breakdown time t_Q, coarse-graining time t_CG and the
//!   verdict comparing them.
//! - [`wigner`]: a 1-D Wigner-function integrator used to test the same ideas
//!   at desk scale.

pub mod catalog;
pub mod collapse;
pub mod constants;
pub mod error;
pub mod timescales;
pub mod wigner;

pub use catalog::{BodyProfile, Catalog};
pub use collapse::{diffusion_coefficient, CollapseModelParams, FluctuationModel, ModelKind};
pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use timescales::{classicality_verdict, ChaosProfile, TimescaleReport, Verdict};
