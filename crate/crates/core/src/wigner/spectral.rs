//! Real FFT helpers for applying Fourier multipliers along one grid axis.

use std::sync::Arc;

use realfft::num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

/// Forward/inverse real transforms of length `n` on a periodic axis with
/// spacing `h`, plus the angular wavenumber of every retained bin.
#[derive(Clone)]
pub(crate) struct AxisFft {
    pub n: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    /// k_j = 2π j / (n h), j = 0..=n/2.
    pub k: Vec<f64>,
}

/// Per-thread work buffers for [`AxisFft`].
pub(crate) struct AxisScratch {
    pub input: Vec<f64>,
    pub spectrum: Vec<Complex64>,
    fwd: Vec<Complex64>,
    inv: Vec<Complex64>,
}

impl AxisFft {
    pub fn new(planner: &mut RealFftPlanner<f64>, n: usize, h: f64) -> Self {
        let length = n as f64 * h;
        AxisFft {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            k: (0..=n / 2)
                .map(|j| 2.0 * std::f64::consts::PI * j as f64 / length)
                .collect(),
        }
    }

    pub fn scratch(&self) -> AxisScratch {
        AxisScratch {
            input: self.forward.make_input_vec(),
            spectrum: self.forward.make_output_vec(),
            fwd: self.forward.make_scratch_vec(),
            inv: self.inverse.make_scratch_vec(),
        }
    }

    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// `s.spectrum = FFT(data)`.
    pub fn forward(&self, data: &[f64], s: &mut AxisScratch) {
        s.input.copy_from_slice(data);
        self.forward
            .process_with_scratch(&mut s.input, &mut s.spectrum, &mut s.fwd)
            .expect("buffer sizes fixed at construction");
    }

    /// `out = IFFT(spec) / n`; consumes `spec`.
    pub fn inverse_into(&self, spec: &mut [Complex64], out: &mut [f64], s_inv: &mut Vec<Complex64>) {
        // a real signal has real DC and Nyquist bins
        spec[0].im = 0.0;
        spec[self.n / 2].im = 0.0;
        self.inverse
            .process_with_scratch(spec, out, s_inv)
            .expect("buffer sizes fixed at construction");
        let inv_n = 1.0 / self.n as f64;
        out.iter_mut().for_each(|v| *v *= inv_n);
    }

    /// `out = IFFT(s.spectrum) / n`.
    pub fn inverse(&self, s: &mut AxisScratch, out: &mut [f64]) {
        let AxisScratch { spectrum, inv, .. } = s;
        self.inverse_into(spectrum, out, inv);
    }
}
