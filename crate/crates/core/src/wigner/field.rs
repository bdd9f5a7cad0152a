use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use super::grid::PhaseSpaceGrid;
use crate::error::{require_positive, Error, Result};

/// Packets whose phase-space area exceeds this many ħ are flagged macroscopic.
pub const MACROSCOPIC_ACTION_RATIO: f64 = 100.0;

/// Required distance, in standard deviations, between a packet centre and the
/// grid edge.
pub const SUPPORT_MARGIN_SIGMAS: f64 = 5.0;

/// Discretized quasiprobability W(x, p). `values[[i, j]]` sits at
/// `(grid.x(i), grid.p(j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    pub values: Array2<f64>,
    pub time: f64,
}

/// First and second moments of a phase-space density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_xp: f64,
}

impl Moments {
    /// Variance of `p - k x`, the spread along a direction contracting at
    /// rate λ when `k = m λ`.
    pub fn var_along(&self, k: f64) -> f64 {
        self.var_p - 2.0 * k * self.cov_xp + k * k * self.var_x
    }

    /// √det of the covariance matrix.
    pub fn phase_area(&self) -> f64 {
        (self.var_x * self.var_p - self.cov_xp * self.cov_xp).max(0.0).sqrt()
    }
}

/// A Gaussian phase-space packet, optionally correlated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub x0: f64,
    pub p0: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    #[serde(default)]
    pub cov_xp: f64,
}

impl GaussianPacket {
    pub fn new(x0: f64, p0: f64, sigma_x: f64, sigma_p: f64) -> Self {
        GaussianPacket { x0, p0, sigma_x, sigma_p, cov_xp: 0.0 }
    }

    pub fn with_covariance(mut self, cov_xp: f64) -> Self {
        self.cov_xp = cov_xp;
        self
    }

    /// Minimum-uncertainty coherent state of width `sigma_x`.
    pub fn coherent(x0: f64, p0: f64, sigma_x: f64, hbar: f64) -> Self {
        Self::new(x0, p0, sigma_x, hbar / (2.0 * sigma_x))
    }

    fn determinant(&self) -> f64 {
        self.sigma_x.powi(2) * self.sigma_p.powi(2) - self.cov_xp.powi(2)
    }

    /// √det of the covariance, the packet's phase-space area in units of ħ·(1/2).
    pub fn action(&self) -> f64 {
        self.determinant().max(0.0).sqrt()
    }

    pub fn is_macroscopic(&self, hbar: f64) -> bool {
        self.action() >= MACROSCOPIC_ACTION_RATIO * hbar
    }
}

/// A freshly built initial state.
#[derive(Debug, Clone)]
pub struct InitialState {
    pub field: WignerField,
    /// σ_x σ_p ≫ ħ.
    pub macroscopic: bool,
}

/// Uncorrelated Gaussian packet. Fails when σ_x σ_p < ħ/2 or when the
/// packet comes within five standard deviations of the grid edge.
pub fn init_gaussian(
    grid: &PhaseSpaceGrid,
    x0: f64,
    p0: f64,
    sigma_x: f64,
    sigma_p: f64,
    hbar: f64,
) -> Result<InitialState> {
    let packet = GaussianPacket::new(x0, p0, sigma_x, sigma_p);
    Ok(InitialState {
        field: WignerField::gaussian(grid, &packet, hbar)?,
        macroscopic: packet.is_macroscopic(hbar),
    })
}

impl WignerField {
    pub fn zeros(grid: &PhaseSpaceGrid) -> Self {
        WignerField {
            grid: *grid,
            values: Array2::zeros((grid.nx, grid.np)),
            time: 0.0,
        }
    }

    pub fn from_fn(grid: &PhaseSpaceGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let (xs, ps) = (grid.xs(), grid.ps());
        WignerField {
            grid: *grid,
            values: Array2::from_shape_fn((grid.nx, grid.np), |(i, j)| f(xs[i], ps[j])),
            time: 0.0,
        }
    }

    pub fn from_values(grid: &PhaseSpaceGrid, values: Array2<f64>, time: f64) -> Result<Self> {
        grid.validate()?;
        if values.dim() != (grid.nx, grid.np) {
            return Err(Error::validation(
                "values",
                format!("shape {:?} does not match grid {}x{}", values.dim(), grid.nx, grid.np),
            ));
        }
        Ok(WignerField { grid: *grid, values, time })
    }

    pub fn gaussian(grid: &PhaseSpaceGrid, packet: &GaussianPacket, hbar: f64) -> Result<Self> {
        grid.validate()?;
        require_positive("sigma_x", packet.sigma_x)?;
        require_positive("sigma_p", packet.sigma_p)?;
        require_positive("hbar", hbar)?;
        let det = packet.determinant();
        // relative slack so that exact minimum-uncertainty packets pass
        if det < 0.25 * hbar * hbar * (1.0 - 1e-12) {
            return Err(Error::validation(
                "sigma_x*sigma_p",
                format!(
                    "uncertainty relation violated: area {:e} < hbar/2 = {:e}",
                    det.max(0.0).sqrt(),
                    0.5 * hbar
                ),
            ));
        }
        let m = SUPPORT_MARGIN_SIGMAS;
        let x_ok = packet.x0 - m * packet.sigma_x >= grid.x_min && packet.x0 + m * packet.sigma_x <= grid.x_max;
        let p_ok = packet.p0 - m * packet.sigma_p >= grid.p_min && packet.p0 + m * packet.sigma_p <= grid.p_max;
        if !(x_ok && p_ok) {
            return Err(Error::validation(
                "packet",
                "packet support (5 sigma) extends beyond the grid",
            ));
        }

        let (vx, vp, c) = (packet.sigma_x.powi(2), packet.sigma_p.powi(2), packet.cov_xp);
        let norm = 1.0 / (2.0 * std::f64::consts::PI * det.sqrt());
        let mut field = Self::from_fn(grid, |x, p| {
            let (u, v) = (x - packet.x0, p - packet.p0);
            let q = (vp * u * u - 2.0 * c * u * v + vx * v * v) / det;
            norm * (-0.5 * q).exp()
        });
        field.renormalize();
        Ok(field)
    }

    /// Even superposition of two coherent states at x = ±d/2 with zero mean
    /// momentum (a "cat" state).
    pub fn even_cat(grid: &PhaseSpaceGrid, separation: f64, sigma_x: f64, hbar: f64) -> Result<Self> {
        require_positive("separation", separation)?;
        require_positive("sigma_x", sigma_x)?;
        require_positive("hbar", hbar)?;
        let (w_plus, w_minus, cross) = cat_components(grid, separation, sigma_x, hbar);
        let overlap = (-separation * separation / (8.0 * sigma_x * sigma_x)).exp();
        let n2 = 1.0 / (2.0 * (1.0 + overlap));
        let values = (&w_plus + &w_minus + &cross) * n2;
        Self::from_values(grid, values, 0.0)
    }

    /// The incoherent mixture of the two cat branches.
    pub fn cat_mixture(grid: &PhaseSpaceGrid, separation: f64, sigma_x: f64, hbar: f64) -> Result<Self> {
        require_positive("separation", separation)?;
        require_positive("sigma_x", sigma_x)?;
        require_positive("hbar", hbar)?;
        let (w_plus, w_minus, _) = cat_components(grid, separation, sigma_x, hbar);
        Self::from_values(grid, (&w_plus + &w_minus) * 0.5, 0.0)
    }

    pub fn integral(&self) -> f64 {
        self.values.sum() * self.grid.cell_area()
    }

    pub fn abs_integral(&self) -> f64 {
        self.values.iter().map(|w| w.abs()).sum::<f64>() * self.grid.cell_area()
    }

    /// ∬ W² dx dp. Bounded by 1/(2πħ) for physical states.
    pub fn purity_integral(&self) -> f64 {
        self.values.iter().map(|w| w * w).sum::<f64>() * self.grid.cell_area()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|w| w.is_finite())
    }

    /// Rescale so that ∬W = 1.
    pub fn renormalize(&mut self) {
        let s = self.integral();
        if s != 0.0 && s.is_finite() {
            self.values /= s;
        }
    }

    /// ∬ |W − other| dx dp over a common grid.
    pub fn l1_distance(&self, other: &WignerField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::validation("grid", "fields live on different grids"));
        }
        let mut acc = 0.0;
        Zip::from(&self.values).and(&other.values).for_each(|a, b| acc += (a - b).abs());
        Ok(acc * self.grid.cell_area())
    }

    pub fn moments(&self) -> Moments {
        let (xs, ps) = (self.grid.xs(), self.grid.ps());
        let mut s = [0.0f64; 6];
        for (i, row) in self.values.outer_iter().enumerate() {
            let x = xs[i];
            let (mut r0, mut rp, mut rpp) = (0.0, 0.0, 0.0);
            for (w, &p) in row.iter().zip(&ps) {
                r0 += w;
                rp += w * p;
                rpp += w * p * p;
            }
            s[0] += r0;
            s[1] += r0 * x;
            s[2] += rp;
            s[3] += r0 * x * x;
            s[4] += rpp;
            s[5] += rp * x;
        }
        let n = s[0];
        let (mx, mp) = (s[1] / n, s[2] / n);
        Moments {
            mean_x: mx,
            mean_p: mp,
            var_x: s[3] / n - mx * mx,
            var_p: s[4] / n - mp * mp,
            cov_xp: s[5] / n - mx * mp,
        }
    }
}

fn cat_components(
    grid: &PhaseSpaceGrid,
    d: f64,
    s: f64,
    hbar: f64,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let pre = 1.0 / (std::f64::consts::PI * hbar);
    let (xs, ps) = (grid.xs(), grid.ps());
    let envelope_p = |p: f64| (-2.0 * s * s * p * p / (hbar * hbar)).exp();
    let gx = |x: f64| (-x * x / (2.0 * s * s)).exp();
    let shape = (grid.nx, grid.np);
    let plus = Array2::from_shape_fn(shape, |(i, j)| pre * gx(xs[i] - 0.5 * d) * envelope_p(ps[j]));
    let minus = Array2::from_shape_fn(shape, |(i, j)| pre * gx(xs[i] + 0.5 * d) * envelope_p(ps[j]));
    let cross = Array2::from_shape_fn(shape, |(i, j)| {
        2.0 * pre * gx(xs[i]) * envelope_p(ps[j]) * (ps[j] * d / hbar).cos()
    });
    (plus, minus, cross)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::symmetric(128, 8.0, 8.0).unwrap()
    }

    #[test]
    fn minimum_uncertainty_purity() {
        let s = init_gaussian(&grid(), 0.5, -0.3, 0.8, 1.0 / 1.6, 1.0).unwrap();
        assert_relative_eq!(s.field.integral(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.field.purity_integral(), 1.0 / (2.0 * PI), max_relative = 1e-4);
        assert!(!s.macroscopic);
    }

    #[test]
    fn uncertainty_violation_is_rejected() {
        let err = init_gaussian(&grid(), 0.0, 0.0, 0.5, 0.5, 1.0).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn support_overflow_is_rejected() {
        assert!(init_gaussian(&grid(), 5.0, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn macroscopic_flag() {
        let hbar = 1e-3;
        let s = init_gaussian(&grid(), 0.0, 0.0, 1.0, 1e3 * hbar, hbar).unwrap();
        assert!(s.macroscopic);
    }

    #[test]
    fn correlated_moments() {
        let p = GaussianPacket::new(0.2, 0.1, 1.0, 0.9).with_covariance(0.4);
        let f = WignerField::gaussian(&grid(), &p, 1.0).unwrap();
        let m = f.moments();
        assert_relative_eq!(m.mean_x, 0.2, epsilon = 1e-10);
        assert_relative_eq!(m.var_x, 1.0, max_relative = 1e-8);
        assert_relative_eq!(m.var_p, 0.81, max_relative = 1e-8);
        assert_relative_eq!(m.cov_xp, 0.4, max_relative = 1e-8);
    }

    /// Direct Wigner transform of the cat wavefunction by quadrature.
    fn wigner_transform(psi: impl Fn(f64) -> f64, x: f64, p: f64, hbar: f64) -> f64 {
        let (n, half) = (4000, 12.0);
        let h = 2.0 * half / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let y = -half + k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            acc += w * psi(x + 0.5 * y) * psi(x - 0.5 * y) * (p * y / hbar).cos();
        }
        acc * h / (2.0 * PI * hbar)
    }

    #[test]
    fn cat_matches_direct_transform() {
        let (d, s, hbar): (f64, f64, f64) = (3.0, 0.6, 0.7);
        let overlap = (-d * d / (8.0 * s * s)).exp();
        let norm = 1.0 / ((2.0 * PI * s * s).sqrt() * 2.0 * (1.0 + overlap)).sqrt();
        let psi = |x: f64| {
            norm * ((-(x - d / 2.0).powi(2) / (4.0 * s * s)).exp()
                + (-(x + d / 2.0).powi(2) / (4.0 * s * s)).exp())
        };
        let g = grid();
        let cat = WignerField::even_cat(&g, d, s, hbar).unwrap();
        for &(i, j) in &[(64, 64), (64, 70), (80, 64), (50, 61), (90, 75)] {
            let oracle = wigner_transform(psi, g.x(i), g.p(j), hbar);
            assert_relative_eq!(cat.values[[i, j]], oracle, epsilon = 1e-9);
        }
        assert_relative_eq!(cat.integral(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(cat.purity_integral(), 1.0 / (2.0 * PI * hbar), max_relative = 1e-6);
    }

    #[test]
    fn l1_distance_needs_common_grid() {
        let a = WignerField::zeros(&grid());
        let b = WignerField::zeros(&PhaseSpaceGrid::symmetric(64, 8.0, 8.0).unwrap());
        assert!(a.l1_distance(&b).is_err());
        assert_eq!(a.l1_distance(&a).unwrap(), 0.0);
    }
}
