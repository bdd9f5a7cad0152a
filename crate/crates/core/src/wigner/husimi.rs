use ndarray::Array2;
use rayon::prelude::*;
use realfft::RealFftPlanner;

use super::field::WignerField;
use super::spectral::AxisFft;
use crate::error::{require_positive, Result};

/// Husimi distribution: W convolved with the coherent-state Gaussian of
/// widths (σ_x, ħ/2σ_x). Done spectrally, so the convolution is periodic on
/// the grid.
pub fn husimi(state: &WignerField, sigma_x: f64, hbar: f64) -> Result<WignerField> {
    require_positive("sigma_x", sigma_x)?;
    require_positive("hbar", hbar)?;
    gaussian_smooth(state, sigma_x, hbar / (2.0 * sigma_x))
}

/// Convolve with a normalized Gaussian of standard deviations (σ_x, σ_p).
pub fn gaussian_smooth(state: &WignerField, sigma_x: f64, sigma_p: f64) -> Result<WignerField> {
    require_positive("sigma_x", sigma_x)?;
    require_positive("sigma_p", sigma_p)?;
    let g = state.grid;
    let mut planner = RealFftPlanner::new();
    let fp = AxisFft::new(&mut planner, g.np, g.dp());
    let fx = AxisFft::new(&mut planner, g.nx, g.dx());

    let smooth_rows = |fft: &AxisFft, data: &mut Array2<f64>, sigma: f64| {
        let gain: Vec<f64> = fft.k.iter().map(|k| (-0.5 * (k * sigma).powi(2)).exp()).collect();
        let n = fft.n;
        data.as_slice_mut()
            .expect("standard layout")
            .par_chunks_mut(n)
            .for_each_init(
                || fft.scratch(),
                |s, row| {
                    fft.forward(row, s);
                    s.spectrum.iter_mut().zip(&gain).for_each(|(c, g)| *c *= *g);
                    fft.inverse(s, row);
                },
            );
    };

    let mut values = state.values.clone();
    smooth_rows(&fp, &mut values, sigma_p);
    let mut t = values.t().as_standard_layout().into_owned();
    smooth_rows(&fx, &mut t, sigma_x);
    values.assign(&t.t());
    WignerField::from_values(&g, values, state.time)
}
