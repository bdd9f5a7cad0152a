//! Decoherence kernels Γ(|q − q′|²) and the momentum diffusion coefficients
//! they induce on the centre of mass of a macroscopic body.
//!
//! A term −Γ(|q − q′|²) ρ in the density-matrix equation becomes
//! −Γ(−∇²_p) W in the Wigner picture. Keeping the quadratic part of Γ gives a
//! plain momentum diffusion D ∂²W/∂p² with D = ħ² Γ′(0). The closed-form
//! coefficients are:
//!
//! | model | D |
//! |-------|---|
//! | env   | 2 M γ k T |
//! | GRW   | N λ ħ² / (4 a²) |
//! | GPR   | γ_GPR ħ² N² S⊥ / (4 V² a √π) |
//! | GGR   | G ħ M² / (2 V) |
//!
//! Only the environmental channel carries friction; the collapse models are
//! frictionless.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::BodyProfile;
use crate::constants::PhysicalConstants;
use crate::error::{require_positive, Error, Result};

/// Fraction of V^(2/3) below which the quadratic GGR kernel is trusted.
pub const GGR_QUADRATIC_WINDOW: f64 = 1e-2;

/// Relative step of the origin-slope estimate, in units of a².
pub const CURVATURE_STEP_FACTOR: f64 = 1e-4;

/// The collapse-model constants of nature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseModelParams {
    /// GRW localization rate per nucleon, s⁻¹.
    pub lambda_grw: f64,
    /// Localization length, cm.
    pub a: f64,
    /// GPR noise intensity, cm⁻³ s⁻¹.
    pub gamma_gpr: f64,
}

impl Default for CollapseModelParams {
    fn default() -> Self {
        CollapseModelParams {
            lambda_grw: 1e-16,
            a: 1e-5,
            gamma_gpr: 1e-30,
        }
    }
}

impl CollapseModelParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("lambda_grw", self.lambda_grw)?;
        require_positive("a", self.a)?;
        require_positive("gamma_gpr", self.gamma_gpr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Env,
    Grw,
    Gpr,
    Ggr,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Env, ModelKind::Grw, ModelKind::Gpr, ModelKind::Ggr];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Env => "env",
            ModelKind::Grw => "grw",
            ModelKind::Gpr => "gpr",
            ModelKind::Ggr => "ggr",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "env" => Ok(ModelKind::Env),
            "grw" => Ok(ModelKind::Grw),
            "gpr" => Ok(ModelKind::Gpr),
            "ggr" => Ok(ModelKind::Ggr),
            other => Err(Error::validation(
                "model",
                format!("unknown model `{other}` (expected env, grw, gpr or ggr)"),
            )),
        }
    }
}

/// A source of momentum fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationModel {
    pub kind: ModelKind,
    pub params: CollapseModelParams,
    /// Bath temperature, K. Used by [`ModelKind::Env`] only.
    pub env_temperature: f64,
    /// Bath relaxation rate γ, s⁻¹. Used by [`ModelKind::Env`] only.
    pub env_rate: f64,
}

impl FluctuationModel {
    pub fn new(
        kind: ModelKind,
        params: CollapseModelParams,
        env_temperature: f64,
        env_rate: f64,
    ) -> Result<Self> {
        params.validate()?;
        if kind == ModelKind::Env {
            require_positive("temperature_k", env_temperature)?;
            require_positive("relax_rate_per_s", env_rate)?;
        }
        Ok(FluctuationModel {
            kind,
            params,
            env_temperature,
            env_rate,
        })
    }

    /// A model whose bath parameters are taken from the body profile.
    pub fn for_body(kind: ModelKind, params: CollapseModelParams, body: &BodyProfile) -> Result<Self> {
        Self::new(kind, params, body.temperature_k, body.relax_rate_per_s)
            .map_err(|e| e.context(&format!("{kind} model for `{}`", body.name)))
    }
}

/// Momentum diffusion coefficient D (erg·g/s) of `model` acting on `body`.
pub fn diffusion_coefficient(
    model: &FluctuationModel,
    body: &BodyProfile,
    consts: &PhysicalConstants,
) -> f64 {
    let hbar2 = consts.hbar * consts.hbar;
    let p = &model.params;
    match model.kind {
        ModelKind::Env => 2.0 * body.mass_g * model.env_rate * consts.k_b * model.env_temperature,
        ModelKind::Grw => body.particle_count * p.lambda_grw * hbar2 / (4.0 * p.a * p.a),
        ModelKind::Gpr => {
            let n = body.particle_count;
            p.gamma_gpr * hbar2 * n * n * body.cross_section_cm2
                / (4.0 * body.volume_cm3 * body.volume_cm3 * p.a * std::f64::consts::PI.sqrt())
        }
        ModelKind::Ggr => consts.g * consts.hbar * body.mass_g * body.mass_g / (2.0 * body.volume_cm3),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// The full kernel. Available for GRW and for the environmental channel,
    /// whose kernel is exactly quadratic.
    Exact,
    /// Γ(d²) ≈ (D / ħ²) d².
    SmallSeparationQuadratic,
}

/// Γ for one model acting on one body.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceKernel {
    pub model: FluctuationModel,
    pub body: BodyProfile,
    pub regime: Regime,
    pub consts: PhysicalConstants,
}

/// A rate from a kernel evaluated by its quadratic expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticRate {
    pub rate: f64,
    /// Set when d² is outside the window where the expansion is trusted.
    pub outside_quadratic_window: bool,
}

impl DecoherenceKernel {
    pub fn new(
        model: FluctuationModel,
        body: BodyProfile,
        regime: Regime,
        consts: PhysicalConstants,
    ) -> Result<Self> {
        body.validate()?;
        if regime == Regime::Exact && matches!(model.kind, ModelKind::Gpr | ModelKind::Ggr) {
            return Err(Error::domain(format!(
                "the exact {} kernel needs the body's density profile; only the \
                 small-separation regime is available",
                model.kind
            )));
        }
        Ok(DecoherenceKernel {
            model,
            body,
            regime,
            consts,
        })
    }

    /// D / ħ², the slope of the quadratic kernel.
    fn quadratic_slope(&self) -> f64 {
        diffusion_coefficient(&self.model, &self.body, &self.consts) / (self.consts.hbar * self.consts.hbar)
    }

    /// The kernel as an analytic function of d², defined for negative
    /// arguments too so that central differences at the origin make sense.
    fn eval_unchecked(&self, d2: f64) -> f64 {
        match (self.model.kind, self.regime) {
            (ModelKind::Grw, Regime::Exact) => {
                let p = &self.model.params;
                -self.body.particle_count * p.lambda_grw * (-d2 / (4.0 * p.a * p.a)).exp_m1()
            }
            _ => self.quadratic_slope() * d2,
        }
    }

    /// Γ(d²) in s⁻¹.
    pub fn gamma(&self, d2: f64) -> Result<f64> {
        check_d2(d2)?;
        Ok(self.eval_unchecked(d2))
    }

    /// Largest d² for which the quadratic GGR form is trusted.
    pub fn ggr_quadratic_window(&self) -> f64 {
        GGR_QUADRATIC_WINDOW * self.body.volume_cm3.powf(2.0 / 3.0)
    }

    /// ħ² times the slope of Γ at the origin, estimated by central differences
    /// with one Richardson extrapolation.
    pub fn central_slope(&self, h: f64) -> f64 {
        let s = |h: f64| (self.eval_unchecked(h) - self.eval_unchecked(-h)) / (2.0 * h);
        (4.0 * s(0.5 * h) - s(h)) / 3.0
    }

    /// Plain central difference, without extrapolation.
    pub fn central_slope_raw(&self, h: f64) -> f64 {
        (self.eval_unchecked(h) - self.eval_unchecked(-h)) / (2.0 * h)
    }
}

fn check_d2(d2: f64) -> Result<()> {
    if d2.is_nan() || d2 < 0.0 {
        return Err(Error::domain(format!("squared separation must be >= 0, got {d2}")));
    }
    Ok(())
}

fn require_kind(kernel: &DecoherenceKernel, kind: ModelKind) -> Result<()> {
    if kernel.model.kind != kind {
        return Err(Error::domain(format!(
            "kernel is {}, expected {kind}",
            kernel.model.kind
        )));
    }
    Ok(())
}

/// Γ_GRW(d²) = N λ (1 − exp(−d² / 4a²)).
pub fn gamma_grw(kernel: &DecoherenceKernel, d2: f64) -> Result<f64> {
    require_kind(kernel, ModelKind::Grw)?;
    kernel.gamma(d2)
}

/// Γ_GGR(d²) ≈ G M² d² / (2 V ħ).
pub fn gamma_ggr_quadratic(kernel: &DecoherenceKernel, d2: f64) -> Result<QuadraticRate> {
    require_kind(kernel, ModelKind::Ggr)?;
    check_d2(d2)?;
    let b = &kernel.body;
    let c = &kernel.consts;
    Ok(QuadraticRate {
        rate: c.g * b.mass_g * b.mass_g / (2.0 * b.volume_cm3 * c.hbar) * d2,
        outside_quadratic_window: d2 > kernel.ggr_quadratic_window(),
    })
}

/// exp(−Γ(d²) t): the factor multiplying ρ(q, q′) when Hamiltonian motion is
/// frozen.
pub fn coherence_decay_factor(kernel: &DecoherenceKernel, d: f64, t: f64) -> Result<f64> {
    if d.is_nan() || d < 0.0 || t.is_nan() || t < 0.0 {
        return Err(Error::domain(format!("need d, t >= 0, got d = {d}, t = {t}")));
    }
    let rate = kernel.gamma(d * d)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok((-rate * t).exp())
}

/// ħ² Γ′(0), the diffusion coefficient implied by the kernel's curvature.
pub fn kernel_curvature_check(kernel: &DecoherenceKernel) -> Result<f64> {
    let a = kernel.model.params.a;
    let slope = kernel.central_slope(a * a * CURVATURE_STEP_FACTOR);
    if !slope.is_finite() {
        return Err(Error::Numerical {
            time: 0.0,
            message: format!("non-finite kernel slope {slope}"),
            last_good: None,
        });
    }
    Ok(kernel.consts.hbar * kernel.consts.hbar * slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use approx::assert_relative_eq;

    const C: PhysicalConstants = PhysicalConstants::CGS;

    fn jupiter() -> BodyProfile {
        Catalog::builtin().get("jupiter").unwrap().clone()
    }

    fn nucleon() -> BodyProfile {
        BodyProfile {
            name: "nucleon".into(),
            mass_g: C.proton_mass,
            volume_cm3: 1e-39,
            particle_count: 1.0,
            temperature_k: 0.0,
            relax_rate_per_s: 0.0,
            sigma_p0_g_cm_per_s: 1.0,
            lyapunov_rate_per_s: 1.0,
            cross_section_cm2: 1e-26,
            nonlinearity_scale_cm: 1.0,
        }
    }

    fn kernel(kind: ModelKind, body: BodyProfile, regime: Regime) -> DecoherenceKernel {
        let model = FluctuationModel::new(kind, CollapseModelParams::default(), 100.0, 1e-26).unwrap();
        DecoherenceKernel::new(model, body, regime, C).unwrap()
    }

    #[test]
    fn grw_examples() {
        let k = kernel(ModelKind::Grw, nucleon(), Regime::Exact);
        assert_eq!(gamma_grw(&k, 0.0).unwrap(), 0.0);
        let a = 1e-5;
        // one decay length: lambda (1 - 1/e)
        let expected = 1e-16 * (1.0 - (-1.0f64).exp());
        assert_relative_eq!(gamma_grw(&k, 4.0 * a * a).unwrap(), expected, max_relative = 1e-12);
        assert!((expected / 6.32e-17 - 1.0).abs() < 1e-3);

        let kj = kernel(ModelKind::Grw, jupiter(), Regime::Exact);
        let sat = gamma_grw(&kj, 1e6).unwrap();
        assert_relative_eq!(sat, jupiter().particle_count * 1e-16, max_relative = 1e-12);
        assert!((sat / 1.1e38 - 1.0).abs() < 0.05);
        assert!(gamma_grw(&kj, -1.0).is_err());
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let k = kernel(ModelKind::Ggr, jupiter(), Regime::SmallSeparationQuadratic);
        assert!(gamma_grw(&k, 1.0).is_err());
    }

    #[test]
    fn ggr_examples() {
        let k = kernel(ModelKind::Ggr, jupiter(), Regime::SmallSeparationQuadratic);
        assert_eq!(gamma_ggr_quadratic(&k, 0.0).unwrap().rate, 0.0);
        let r = gamma_ggr_quadratic(&k, 1.0).unwrap();
        assert!((r.rate / 8e49 - 1.0).abs() < 0.05, "{:e}", r.rate);
        assert!(!r.outside_quadratic_window);
        assert!(gamma_ggr_quadratic(&k, 1e20).unwrap().outside_quadratic_window);

        let mut heavy = jupiter();
        heavy.mass_g *= 2.0;
        let k2 = kernel(ModelKind::Ggr, heavy, Regime::SmallSeparationQuadratic);
        assert_relative_eq!(
            gamma_ggr_quadratic(&k2, 3.0).unwrap().rate,
            4.0 * gamma_ggr_quadratic(&k, 3.0).unwrap().rate,
            max_relative = 1e-14
        );
    }

    #[test]
    fn exact_regime_unavailable_for_gpr_ggr() {
        for kind in [ModelKind::Gpr, ModelKind::Ggr] {
            let model = FluctuationModel::new(kind, CollapseModelParams::default(), 0.0, 0.0).unwrap();
            assert!(DecoherenceKernel::new(model, jupiter(), Regime::Exact, C).is_err());
        }
    }

    #[test]
    fn env_requires_bath() {
        assert!(FluctuationModel::new(ModelKind::Env, CollapseModelParams::default(), 0.0, 1.0).is_err());
        assert!(FluctuationModel::new(ModelKind::Env, CollapseModelParams::default(), 1.0, 0.0).is_err());
        // collapse kinds ignore the bath
        assert!(FluctuationModel::new(ModelKind::Grw, CollapseModelParams::default(), 0.0, 0.0).is_ok());
    }

    #[test]
    fn diffusion_examples() {
        let j = jupiter();
        let d = |kind| {
            let m = FluctuationModel::for_body(kind, CollapseModelParams::default(), &j)
                .or_else(|_| FluctuationModel::new(kind, CollapseModelParams::default(), 0.0, 0.0))
                .unwrap();
            diffusion_coefficient(&m, &j, &C)
        };
        let env = d(ModelKind::Env);
        assert!((env.log10() + 10.0).abs() < 1.0, "{env:e}");
        let ggr = d(ModelKind::Ggr);
        assert!((ggr.log10() + 4.0).abs() < 1.0, "{ggr:e}");

        let m = FluctuationModel::new(ModelKind::Grw, CollapseModelParams::default(), 0.0, 0.0).unwrap();
        let single = diffusion_coefficient(&m, &nucleon(), &C);
        assert_relative_eq!(single, 1e-16 * C.hbar * C.hbar / 4e-10, max_relative = 1e-14);
        assert!((single / 2.8e-61 - 1.0).abs() < 0.01, "{single:e}");
    }

    #[test]
    fn decay_factor_examples() {
        let k = kernel(ModelKind::Grw, nucleon(), Regime::Exact);
        assert_eq!(coherence_decay_factor(&k, 1e-3, 0.0).unwrap(), 1.0);
        assert_eq!(coherence_decay_factor(&k, 0.0, 1e30).unwrap(), 1.0);
        let f = coherence_decay_factor(&k, 2e-5, 1e16).unwrap();
        assert_relative_eq!(f, (-(1.0 - (-1.0f64).exp())).exp(), max_relative = 1e-12);
        assert!((f - 0.531).abs() < 1e-3);
        assert!(coherence_decay_factor(&k, -1.0, 1.0).is_err());
    }

    #[test]
    fn curvature_matches_closed_form() {
        let j = jupiter();
        for (kind, regime) in [
            (ModelKind::Grw, Regime::Exact),
            (ModelKind::Grw, Regime::SmallSeparationQuadratic),
            (ModelKind::Ggr, Regime::SmallSeparationQuadratic),
            (ModelKind::Gpr, Regime::SmallSeparationQuadratic),
            (ModelKind::Env, Regime::Exact),
        ] {
            let k = kernel(kind, j.clone(), regime);
            let d_eff = kernel_curvature_check(&k).unwrap();
            let d = diffusion_coefficient(&k.model, &j, &C);
            assert!((d_eff / d - 1.0).abs() < 0.01, "{kind:?}: {d_eff:e} vs {d:e}");
        }
        // GGR built to match exactly
        let k = kernel(ModelKind::Ggr, j.clone(), Regime::SmallSeparationQuadratic);
        assert_relative_eq!(
            kernel_curvature_check(&k).unwrap(),
            C.g * C.hbar * j.mass_g * j.mass_g / (2.0 * j.volume_cm3),
            max_relative = 1e-12
        );
    }

    #[test]
    fn central_slope_converges_at_second_order() {
        let k = kernel(ModelKind::Grw, nucleon(), Regime::Exact);
        let a: f64 = 1e-5;
        let exact = 1e-16 / (4.0 * a * a);
        // large steps so truncation dominates rounding
        let h = a * a;
        let e1 = (k.central_slope_raw(h) - exact).abs();
        let e2 = (k.central_slope_raw(h / 2.0) - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.1, "error ratio {ratio}");
        // extrapolated estimate is much better than either
        let r = (k.central_slope(h) - exact).abs();
        assert!(r < e2 / 10.0);
    }

    #[test]
    fn model_kind_parses() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.as_str().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("csl".parse::<ModelKind>().is_err());
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::catalog::Catalog;
    use proptest::prelude::*;

    fn kernels() -> Vec<DecoherenceKernel> {
        let mut out = Vec::new();
        for body in Catalog::builtin().bodies() {
            for kind in ModelKind::ALL {
                let model = FluctuationModel::new(kind, CollapseModelParams::default(), 100.0, 1e-20).unwrap();
                let regime = if kind == ModelKind::Grw { Regime::Exact } else { Regime::SmallSeparationQuadratic };
                out.push(DecoherenceKernel::new(model, body.clone(), regime, PhysicalConstants::CGS).unwrap());
            }
        }
        out
    }

    proptest! {
        #[test]
        fn gamma_vanishes_at_origin_and_is_monotone(e1 in -20.0f64..10.0, e2 in -20.0f64..10.0) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let (d_lo, d_hi) = (10f64.powf(lo), 10f64.powf(hi));
            for k in kernels() {
                prop_assert_eq!(k.gamma(0.0).unwrap(), 0.0);
                let g_lo = k.gamma(d_lo).unwrap();
                let g_hi = k.gamma(d_hi).unwrap();
                prop_assert!(g_lo >= 0.0);
                prop_assert!(g_hi >= g_lo, "{:?}: {} < {}", k.model.kind, g_hi, g_lo);
            }
        }

        #[test]
        fn decay_factor_is_a_semigroup(d in 0.0f64..1e-4, t1 in 0.0f64..1e16, t2 in 0.0f64..1e16) {
            let model = FluctuationModel::new(ModelKind::Grw, CollapseModelParams::default(), 0.0, 0.0).unwrap();
            let mut body = Catalog::builtin().get("lab-sphere").unwrap().clone();
            body.particle_count = 1.0;
            let k = DecoherenceKernel::new(model, body, Regime::Exact, PhysicalConstants::CGS).unwrap();
            let joint = coherence_decay_factor(&k, d, t1 + t2).unwrap();
            let split = coherence_decay_factor(&k, d, t1).unwrap() * coherence_decay_factor(&k, d, t2).unwrap();
            prop_assert!((joint - split).abs() <= 1e-12 * joint.max(1e-300) + 1e-300);
            prop_assert!((0.0..=1.0).contains(&joint));
        }
    }
}
