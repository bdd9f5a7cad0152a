use ndarray::{Array2, Zip};
use rayon::prelude::*;
use realfft::num_complex::Complex64;
use realfft::RealFftPlanner;
use serde::{Deserialize, Serialize};

use super::diagnostics::{compute_diagnostics, Diagnostics};
use super::field::WignerField;
use super::grid::PhaseSpaceGrid;
use super::potential::PolynomialPotential;
use super::spectral::AxisFft;
use crate::constants::PhysicalConstants;
use crate::error::{require_non_negative, require_positive, Error, Result};

/// L¹ distance at which quantum and classical evolutions are said to part.
pub const BREAKDOWN_THRESHOLD: f64 = 0.1;

/// Fraction of each axis, at both ends, covered by the absorbing layer.
pub const ABSORBER_FRACTION: f64 = 0.1;

// RK4 stability radii along the imaginary and negative real axes.
const RK4_IMAG_RADIUS: f64 = 2.828_427_124_746_19;
const RK4_REAL_RADIUS: f64 = 2.785_293_563_405_282;

/// Everything the integrator needs besides the grid and the initial state.
///
/// `mass` and `hbar` default to one proton mass and the CGS ħ. Scaled-units
/// runs set both to order-one numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub potential: PolynomialPotential,
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub diffusion: f64,
    #[serde(default = "default_true")]
    pub moyal_enabled: bool,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    /// Box (Δx, Δp) for the coarse-grained entropy diagnostic.
    #[serde(default)]
    pub coarse_box: Option<[f64; 2]>,
}

fn default_mass() -> f64 {
    PhysicalConstants::CGS.proton_mass
}

fn default_hbar() -> f64 {
    PhysicalConstants::CGS.hbar
}

fn default_true() -> bool {
    true
}

fn default_stride() -> usize {
    1
}

impl EvolutionSpec {
    /// Scaled-units spec with m = ħ = 1 and no environment.
    pub fn scaled(potential: PolynomialPotential, dt: f64, t_end: f64) -> Self {
        EvolutionSpec {
            potential,
            mass: 1.0,
            hbar: 1.0,
            gamma: 0.0,
            diffusion: 0.0,
            moyal_enabled: true,
            dt,
            t_end,
            snapshot_stride: 1,
            coarse_box: None,
        }
    }

    /// The Moyal-off comparator of this spec.
    pub fn classical(&self) -> Self {
        EvolutionSpec {
            moyal_enabled: false,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        require_positive("mass", self.mass)?;
        require_positive("hbar", self.hbar)?;
        require_non_negative("gamma", self.gamma)?;
        require_non_negative("diffusion", self.diffusion)?;
        require_positive("dt", self.dt)?;
        require_non_negative("t_end", self.t_end)?;
        if self.snapshot_stride == 0 {
            return Err(Error::validation("snapshot_stride", "must be >= 1"));
        }
        if let Some([bx, bp]) = self.coarse_box {
            require_positive("coarse_box.dx", bx)?;
            require_positive("coarse_box.dp", bp)?;
        }
        Ok(())
    }

    /// Number of steps and the step actually taken so that the run ends at
    /// `t_end` exactly.
    pub fn schedule(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

fn max_over_grid(grid: &PhaseSpaceGrid, f: impl Fn(f64) -> f64) -> f64 {
    grid.xs().into_iter().map(|x| f(x).abs()).fold(0.0, f64::max)
}

/// Largest stable RK4 step for the spectral discretization.
///
/// Advective terms give purely imaginary eigenvalues bounded by the sum of
/// the per-term spectral radii; diffusion gives negative real ones. Each is
/// scaled by the RK4 stability radius along its axis.
pub fn stability_check(spec: &EvolutionSpec, grid: &PhaseSpaceGrid) -> f64 {
    let kx = std::f64::consts::PI / grid.dx();
    let kp = std::f64::consts::PI / grid.dp();
    let pot = &spec.potential;
    let mut imag = grid.p_abs_max() / spec.mass * kx
        + (max_over_grid(grid, |x| pot.d1(x)) + pot.drive_amplitude.abs()) * kp
        + 2.0 * spec.gamma * grid.p_abs_max() * kp;
    if spec.moyal_enabled {
        imag += spec.hbar * spec.hbar / 24.0 * max_over_grid(grid, |x| pot.d3(x)) * kp.powi(3);
    }
    let real = spec.diffusion * kp * kp;
    let rate = imag / RK4_IMAG_RADIUS + real / RK4_REAL_RADIUS;
    if rate == 0.0 {
        f64::INFINITY
    } else {
        1.0 / rate
    }
}

/// The discretized right-hand side of the Wigner equation.
struct Operator {
    grid: PhaseSpaceGrid,
    along_p: AxisFft,
    along_x: AxisFft,
    potential: PolynomialPotential,
    v1: Vec<f64>,
    moyal: Vec<f64>,
    x_speed: Vec<f64>,
    ps: Vec<f64>,
    gamma: f64,
    diffusion: f64,
}

impl Operator {
    fn new(grid: &PhaseSpaceGrid, spec: &EvolutionSpec) -> Self {
        let mut planner = RealFftPlanner::new();
        let xs = grid.xs();
        let ps = grid.ps();
        let c = spec.hbar * spec.hbar / 24.0;
        Operator {
            grid: *grid,
            along_p: AxisFft::new(&mut planner, grid.np, grid.dp()),
            along_x: AxisFft::new(&mut planner, grid.nx, grid.dx()),
            potential: spec.potential,
            v1: xs.iter().map(|&x| spec.potential.d1(x)).collect(),
            moyal: xs
                .iter()
                .map(|&x| if spec.moyal_enabled { c * spec.potential.d3(x) } else { 0.0 })
                .collect(),
            x_speed: ps.iter().map(|&p| -p / spec.mass).collect(),
            ps,
            gamma: spec.gamma,
            diffusion: spec.diffusion,
        }
    }

    /// out = L[w] at time t. `wt` and `dxt` are np×nx work arrays.
    fn apply(&self, w: &Array2<f64>, t: f64, out: &mut Array2<f64>, wt: &mut Array2<f64>, dxt: &mut Array2<f64>) {
        let np = self.grid.np;
        let nx = self.grid.nx;
        let drive = self.potential.drive_slope(t);

        // p-derivatives, one row of fixed x at a time
        let fp = &self.along_p;
        let w_rows = w.as_slice().expect("standard layout");
        let out_rows = out.as_slice_mut().expect("standard layout");
        out_rows
            .par_chunks_mut(np)
            .zip(w_rows.par_chunks(np))
            .enumerate()
            .for_each_init(
                || (fp.scratch(), vec![0.0; np]),
                |(s, aux), (i, (orow, wrow))| {
                    let force = self.v1[i] + drive;
                    let a = self.moyal[i];
                    fp.forward(wrow, s);
                    let nyq = fp.nyquist();
                    for (j, (c, &k)) in s.spectrum.iter_mut().zip(&fp.k).enumerate() {
                        let im = if j == nyq { 0.0 } else { k * (force + a * k * k) };
                        *c *= Complex64::new(-self.diffusion * k * k, im);
                    }
                    fp.inverse(s, orow);
                    if self.gamma > 0.0 {
                        for ((a, &wv), &p) in aux.iter_mut().zip(wrow).zip(&self.ps) {
                            *a = p * wv;
                        }
                        fp.forward(aux, s);
                        let g2 = 2.0 * self.gamma;
                        for (j, (c, &k)) in s.spectrum.iter_mut().zip(&fp.k).enumerate() {
                            let im = if j == nyq { 0.0 } else { g2 * k };
                            *c *= Complex64::new(0.0, im);
                        }
                        fp.inverse(s, aux);
                        orow.iter_mut().zip(aux.iter()).for_each(|(o, a)| *o += a);
                    }
                },
            );

        // x-derivatives on the transposed field, one column of fixed p at a time
        wt.assign(&w.t());
        let fx = &self.along_x;
        let wt_rows = wt.as_slice().expect("standard layout");
        let dxt_rows = dxt.as_slice_mut().expect("standard layout");
        dxt_rows
            .par_chunks_mut(nx)
            .zip(wt_rows.par_chunks(nx))
            .enumerate()
            .for_each_init(
                || fx.scratch(),
                |s, (j, (orow, wrow))| {
                    let v = self.x_speed[j];
                    fx.forward(wrow, s);
                    let nyq = fx.nyquist();
                    for (m, (c, &k)) in s.spectrum.iter_mut().zip(&fx.k).enumerate() {
                        let im = if m == nyq { 0.0 } else { v * k };
                        *c *= Complex64::new(0.0, im);
                    }
                    fx.inverse(s, orow);
                },
            );
        Zip::from(out).and(dxt.t()).for_each(|o, &d| *o += d);
    }
}

/// Smooth per-step damping factors for the absorbing layer.
fn absorber(grid: &PhaseSpaceGrid, spec: &EvolutionSpec, dt: f64) -> Array2<f64> {
    // rate profile σ_max sin²(π r / 2), r the depth into the layer in [0, 1],
    // with σ_max large enough to attenuate anything crossing the layer
    let profile = |n: usize, speed: f64, width: f64| -> Vec<f64> {
        let layer = ((n as f64) * ABSORBER_FRACTION).round().max(1.0);
        let sigma_max = 20.0 * speed / width;
        (0..n)
            .map(|i| {
                let depth = (layer - i as f64).max(layer - (n - 1 - i) as f64).max(0.0);
                let r = (depth / layer).min(1.0);
                sigma_max * (0.5 * std::f64::consts::PI * r).sin().powi(2)
            })
            .collect()
    };
    let pot = &spec.potential;
    let wx = ABSORBER_FRACTION * (grid.x_max - grid.x_min);
    let wp = ABSORBER_FRACTION * (grid.p_max - grid.p_min);
    let vx = grid.p_abs_max() / spec.mass;
    let vp = max_over_grid(grid, |x| pot.d1(x))
        + pot.drive_amplitude.abs()
        + 2.0 * spec.gamma * grid.p_abs_max()
        + spec.diffusion / wp;
    let sx = profile(grid.nx, vx, wx);
    let sp = profile(grid.np, vp, wp);
    Array2::from_shape_fn((grid.nx, grid.np), |(i, j)| (-dt * (sx[i] + sp[j])).exp())
}

/// Owns the transforms and work arrays for repeated steps on one grid.
pub struct Integrator {
    op: Operator,
    dt: f64,
    mask: Array2<f64>,
    stage: Array2<f64>,
    k: Array2<f64>,
    acc: Array2<f64>,
    wt: Array2<f64>,
    dxt: Array2<f64>,
}

impl Integrator {
    /// Fails if the spec is invalid or `spec.dt` exceeds the stability bound.
    pub fn new(grid: &PhaseSpaceGrid, spec: &EvolutionSpec) -> Result<Self> {
        Self::with_dt(grid, spec, spec.dt)
    }

    pub fn with_dt(grid: &PhaseSpaceGrid, spec: &EvolutionSpec, dt: f64) -> Result<Self> {
        let bound = stability_check(spec, grid);
        if dt > bound {
            return Err(Error::validation(
                "dt",
                format!("{dt:e} exceeds the stability bound {bound:e}"),
            ));
        }
        Self::new_unchecked(grid, spec, dt)
    }

    /// Like [`Integrator::with_dt`] but without the stability check; for
    /// probing the bound itself.
    pub fn new_unchecked(grid: &PhaseSpaceGrid, spec: &EvolutionSpec, dt: f64) -> Result<Self> {
        grid.validate()?;
        spec.validate()?;
        require_positive("dt", dt)?;
        let shape = (grid.nx, grid.np);
        let tshape = (grid.np, grid.nx);
        Ok(Integrator {
            op: Operator::new(grid, spec),
            dt,
            mask: absorber(grid, spec, dt),
            stage: Array2::zeros(shape),
            k: Array2::zeros(shape),
            acc: Array2::zeros(shape),
            wt: Array2::zeros(tshape),
            dxt: Array2::zeros(tshape),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Evaluate the right-hand side ∂W/∂t for `field`.
    pub fn time_derivative(&mut self, field: &WignerField) -> Array2<f64> {
        let mut out = Array2::zeros(field.values.dim());
        self.op.apply(&field.values, field.time, &mut out, &mut self.wt, &mut self.dxt);
        out
    }

    /// Advance by one RK4 step, then apply the absorbing layer. On a
    /// non-finite result the field is left untouched and returned inside the
    /// error.
    pub fn step(&mut self, field: &mut WignerField) -> Result<()> {
        if field.grid != self.op.grid {
            return Err(Error::validation("grid", "field grid differs from integrator grid"));
        }
        let (dt, t) = (self.dt, field.time);
        let w = &field.values;
        let Integrator { op, stage, k, acc, wt, dxt, .. } = self;

        op.apply(w, t, k, wt, dxt);
        acc.assign(k);
        Zip::from(&mut *stage).and(w).and(&*k).for_each(|s, &w, &k| *s = w + 0.5 * dt * k);

        op.apply(stage, t + 0.5 * dt, k, wt, dxt);
        Zip::from(&mut *acc).and(&*k).for_each(|a, &k| *a += 2.0 * k);
        Zip::from(&mut *stage).and(w).and(&*k).for_each(|s, &w, &k| *s = w + 0.5 * dt * k);

        op.apply(stage, t + 0.5 * dt, k, wt, dxt);
        Zip::from(&mut *acc).and(&*k).for_each(|a, &k| *a += 2.0 * k);
        Zip::from(&mut *stage).and(w).and(&*k).for_each(|s, &w, &k| *s = w + dt * k);

        op.apply(stage, t + dt, k, wt, dxt);
        Zip::from(&mut *stage)
            .and(w)
            .and(&*acc)
            .and(&*k)
            .and(&self.mask)
            .for_each(|s, &w, &a, &k, &m| *s = (w + dt / 6.0 * (a + k)) * m);

        if !self.stage.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical {
                time: t + dt,
                message: "non-finite value in Wigner field".into(),
                last_good: Some(Box::new(field.clone())),
            });
        }
        std::mem::swap(&mut field.values, &mut self.stage);
        field.time = t + dt;
        Ok(())
    }
}

/// One step of `spec.dt`.
pub fn step(state: &WignerField, spec: &EvolutionSpec) -> Result<WignerField> {
    let mut out = state.clone();
    Integrator::new(&state.grid, spec)?.step(&mut out)?;
    Ok(out)
}

/// Snapshots and their diagnostics from one run.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub snapshots: Vec<WignerField>,
    pub diagnostics: Vec<Diagnostics>,
    pub steps: usize,
    pub dt: f64,
}

/// Run `spec` from `state`, handing every snapshot to `sink` as it is made.
/// Snapshots are taken at t = 0, every `snapshot_stride` steps, and at the
/// final step. Returns the number of steps and the step size used.
pub fn evolve_with(
    state: &WignerField,
    spec: &EvolutionSpec,
    mut sink: impl FnMut(&WignerField, &Diagnostics) -> Result<()>,
) -> Result<(usize, f64)> {
    spec.validate()?;
    let (steps, dt) = spec.schedule();
    let mut field = state.clone();
    let diag = |f: &WignerField| compute_diagnostics(f, spec.hbar, spec.coarse_box);
    sink(&field, &diag(&field))?;
    if steps == 0 {
        return Ok((0, dt));
    }
    let mut integrator = Integrator::with_dt(&state.grid, spec, dt)?;
    for n in 1..=steps {
        integrator.step(&mut field)?;
        if n % spec.snapshot_stride == 0 || n == steps {
            sink(&field, &diag(&field))?;
        }
    }
    Ok((steps, dt))
}

pub fn evolve(state: &WignerField, spec: &EvolutionSpec) -> Result<Evolution> {
    let mut snapshots = Vec::new();
    let mut diagnostics = Vec::new();
    let (steps, dt) = evolve_with(state, spec, |f, d| {
        snapshots.push(f.clone());
        diagnostics.push(d.clone());
        Ok(())
    })?;
    Ok(Evolution { snapshots, diagnostics, steps, dt })
}

/// Quantum versus classical L¹ distance over a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSeries {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    /// First time the distance reaches [`BREAKDOWN_THRESHOLD`], linearly
    /// interpolated between steps.
    pub breakdown_time: Option<f64>,
}

/// Evolve `initial` with the Moyal term on and off in lockstep.
///
/// The distance is checked every step so the crossing time is resolved to
/// one step; it is recorded at the snapshot stride. With `stop_at_breakdown`
/// the run ends at the first crossing.
pub fn classical_quantum_distance(
    initial: &WignerField,
    spec: &EvolutionSpec,
    stop_at_breakdown: bool,
) -> Result<DistanceSeries> {
    spec.validate()?;
    let (steps, dt) = spec.schedule();
    let mut quantum = initial.clone();
    let mut classical = initial.clone();
    let mut series = DistanceSeries {
        times: vec![initial.time],
        distances: vec![0.0],
        breakdown_time: None,
    };
    if steps == 0 {
        return Ok(series);
    }
    let classical_spec = spec.classical();
    let mut q_int = Integrator::with_dt(&initial.grid, spec, dt)?;
    let mut c_int = Integrator::with_dt(&initial.grid, &classical_spec, dt)?;
    let mut previous = 0.0;
    for n in 1..=steps {
        q_int.step(&mut quantum)?;
        c_int.step(&mut classical)?;
        let d = quantum.l1_distance(&classical)?;
        let crossed = series.breakdown_time.is_none() && d >= BREAKDOWN_THRESHOLD;
        if crossed {
            let frac = (BREAKDOWN_THRESHOLD - previous) / (d - previous);
            series.breakdown_time = Some(quantum.time - dt + frac * dt);
        }
        if n % spec.snapshot_stride == 0 || n == steps || (crossed && stop_at_breakdown) {
            series.times.push(quantum.time);
            series.distances.push(d);
        }
        if crossed && stop_at_breakdown {
            break;
        }
        previous = d;
    }
    Ok(series)
}

/// Least-squares rate `r` in `y ≈ A e^{r t}`.
pub fn fit_exponential_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::domain("need at least two matching samples"));
    }
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::domain("exponential fit needs positive samples"));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(times, &logs)?.0)
}

/// Ordinary least squares `y ≈ slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::domain("need at least two matching samples"));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("abscissae are all equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
