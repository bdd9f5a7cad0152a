use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest allowed number of points per axis.
pub const MIN_POINTS: usize = 32;

/// A periodic rectangular phase-space grid. Points are `x_min + i dx` for
/// `i < nx` (the right edge is the periodic image of the left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub nx: usize,
    pub np: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl PhaseSpaceGrid {
    pub fn new(nx: usize, np: usize, x_min: f64, x_max: f64, p_min: f64, p_max: f64) -> Result<Self> {
        let g = PhaseSpaceGrid { nx, np, x_min, x_max, p_min, p_max };
        g.validate()?;
        Ok(g)
    }

    /// Square grid centred on the origin.
    pub fn symmetric(n: usize, x_half: f64, p_half: f64) -> Result<Self> {
        Self::new(n, n, -x_half, x_half, -p_half, p_half)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, n) in [("nx", self.nx), ("np", self.np)] {
            if n < MIN_POINTS || !n.is_power_of_two() {
                return Err(Error::validation(
                    field,
                    format!("must be a power of two >= {MIN_POINTS}, got {n}"),
                ));
            }
        }
        for (field, lo, hi) in [("x", self.x_min, self.x_max), ("p", self.p_min, self.p_max)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::validation(
                    format!("{field}_min/{field}_max"),
                    format!("need finite {field}_min < {field}_max, got [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.np as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dp()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p(j)).collect()
    }

    /// Largest |p| on the grid.
    pub fn p_abs_max(&self) -> f64 {
        self.p_min.abs().max(self.p(self.np - 1).abs())
    }

    /// The same domain with `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.nx * factor, self.np * factor, self.x_min, self.x_max, self.p_min, self.p_max)
    }
}
