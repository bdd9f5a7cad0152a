use serde::{Deserialize, Serialize};

use super::field::WignerField;
use crate::error::{Error, Result};

/// Negative values smaller than this fraction of max|W| are treated as
/// discretization noise by the entropy.
pub const NEGATIVE_TOLERANCE: f64 = 1e-6;

/// Per-snapshot record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub time: f64,
    pub norm: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_xp: f64,
    /// l = ħ / Δp.
    pub coherence_length: f64,
    /// ∬ W² dx dp.
    pub purity: f64,
    /// 2πħ ∬ W², equal to 1 for a pure state.
    pub purity_ratio: f64,
    pub negativity: f64,
    pub min_value: f64,
    /// Fine-grained Gibbs entropy; absent when W has genuine negative parts.
    pub entropy: Option<f64>,
    /// Coarse-grained Gibbs entropy for the configured box.
    pub coarse_entropy: Option<f64>,
}

pub fn compute_diagnostics(field: &WignerField, hbar: f64, coarse_box: Option<[f64; 2]>) -> Diagnostics {
    let m = field.moments();
    let purity = field.purity_integral();
    Diagnostics {
        time: field.time,
        norm: field.integral(),
        mean_x: m.mean_x,
        mean_p: m.mean_p,
        var_x: m.var_x,
        var_p: m.var_p,
        cov_xp: m.cov_xp,
        coherence_length: hbar / m.var_p.max(0.0).sqrt(),
        purity,
        purity_ratio: 2.0 * std::f64::consts::PI * hbar * purity,
        negativity: negativity_volume(field),
        min_value: field.min_value(),
        entropy: gibbs_entropy(field, None).ok(),
        coarse_entropy: coarse_box.and_then(|[bx, bp]| gibbs_entropy(field, Some((bx, bp))).ok()),
    }
}

/// ∬ |W| dx dp − 1.
pub fn negativity_volume(field: &WignerField) -> f64 {
    field.abs_integral() - 1.0
}

/// Cells per box along one axis, when `box_width` tiles `n` cells of `h`.
fn cells_per_box(axis: &str, box_width: f64, h: f64, n: usize) -> Result<usize> {
    let ratio = box_width / h;
    let r = ratio.round();
    if !(r >= 1.0) || (ratio - r).abs() > 1e-6 * r || n % (r as usize) != 0 {
        return Err(Error::validation(
            format!("coarse_box.{axis}"),
            format!("box {box_width:e} is not a whole divisor of the grid ({n} cells of {h:e})"),
        ));
    }
    Ok(r as usize)
}

/// Gibbs entropy −∬ ρ ln ρ dx dp with the conventional minus sign, where ρ
/// is the density averaged over `coarse_box = (Δx, Δp)` if given.
///
/// The averaged density must be nonnegative up to [`NEGATIVE_TOLERANCE`];
/// smooth a Wigner function with [`husimi`](super::husimi::husimi) first.
pub fn gibbs_entropy(field: &WignerField, coarse_box: Option<(f64, f64)>) -> Result<f64> {
    let g = &field.grid;
    let (rx, rp) = match coarse_box {
        None => (1, 1),
        Some((bx, bp)) => (
            cells_per_box("dx", bx, g.dx(), g.nx)?,
            cells_per_box("dp", bp, g.dp(), g.np)?,
        ),
    };
    let mut boxes = Vec::with_capacity((g.nx / rx) * (g.np / rp));
    for bi in 0..g.nx / rx {
        for bj in 0..g.np / rp {
            let sum: f64 = (bi * rx..(bi + 1) * rx)
                .flat_map(|i| (bj * rp..(bj + 1) * rp).map(move |j| field.values[[i, j]]))
                .sum();
            boxes.push(sum / (rx * rp) as f64);
        }
    }
    let max = boxes.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = boxes.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -NEGATIVE_TOLERANCE * max {
        return Err(Error::domain(format!(
            "density has negative values (min {min:e}); apply husimi smoothing first"
        )));
    }
    let s: f64 = boxes.iter().filter(|&&rho| rho > 0.0).map(|rho| -rho * rho.ln()).sum();
    Ok(s * g.cell_area() * (rx * rp) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wigner::field::init_gaussian;
    use crate::wigner::grid::PhaseSpaceGrid;
    use approx::assert_relative_eq;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::symmetric(128, 8.0, 8.0).unwrap()
    }

    #[test]
    fn uniform_density_entropy() {
        let g = grid();
        let area = 4.0 * 4.0;
        let f = WignerField::from_fn(&g, |x, p| {
            if (-2.0..2.0).contains(&x) && (-2.0..2.0).contains(&p) {
                1.0 / area
            } else {
                0.0
            }
        });
        assert_relative_eq!(f.integral(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(gibbs_entropy(&f, None).unwrap(), area.ln(), epsilon = 1e-12);
    }

    #[test]
    fn one_cell_box_is_fine_grained() {
        let g = grid();
        let f = init_gaussian(&g, 0.3, 0.0, 1.0, 0.7, 1.0).unwrap().field;
        let fine = gibbs_entropy(&f, None).unwrap();
        let boxed = gibbs_entropy(&f, Some((g.dx(), g.dp()))).unwrap();
        assert_eq!(fine, boxed);
        // analytic Gaussian entropy 1 + ln(2π σx σp)
        assert_relative_eq!(fine, 1.0 + (2.0 * std::f64::consts::PI * 0.7).ln(), epsilon = 1e-8);
        let coarse = gibbs_entropy(&f, Some((4.0 * g.dx(), 4.0 * g.dp()))).unwrap();
        assert!(coarse >= fine);
    }

    #[test]
    fn box_must_tile_grid() {
        let g = grid();
        let f = init_gaussian(&g, 0.0, 0.0, 1.0, 1.0, 1.0).unwrap().field;
        assert!(gibbs_entropy(&f, Some((3.5 * g.dx(), g.dp()))).is_err());
        assert!(gibbs_entropy(&f, Some((3.0 * g.dx(), g.dp()))).is_err());
    }

    #[test]
    fn negative_density_is_a_domain_error() {
        let g = grid();
        let cat = WignerField::even_cat(&g, 4.0, 0.5, 1.0).unwrap();
        assert!(matches!(gibbs_entropy(&cat, None), Err(Error::Domain(_))));
    }

    #[test]
    fn gaussian_negativity_is_zero() {
        let f = init_gaussian(&grid(), 0.0, 0.0, 1.0, 0.5, 1.0).unwrap().field;
        assert!(negativity_volume(&f).abs() < 1e-6);
    }

    #[test]
    fn cat_negativity_grows_with_separation() {
        let g = PhaseSpaceGrid::symmetric(256, 12.0, 12.0).unwrap();
        let hbar = 1.0;
        let vals: Vec<f64> = [1.0, 2.0, 3.0, 4.0, 6.0]
            .iter()
            .map(|&d| negativity_volume(&WignerField::even_cat(&g, d, 0.5, hbar).unwrap()))
            .collect();
        assert!(vals[0] > 0.0);
        for w in vals.windows(2) {
            assert!(w[1] > w[0], "{vals:?}");
        }
    }
}
