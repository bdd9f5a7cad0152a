//! Correspondence-breakdown and coarse-graining times.
//!
//! A chaotic system's classical phase-space density fragments until either
//! its structures reach the size of ħ (the breakdown time t_Q) or diffusion
//! halts the fragmentation (the coarse-graining time t_CG). Classical
//! behaviour is protected when t_CG < t_Q.
//!
//! Strong chaos (q = 1) gives logarithmic times; weak chaos (q < 1, Tsallis
//! power-law sensitivity) gives power laws. All logarithms are evaluated in
//! log space so that `ħ^N` never underflows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::BodyProfile;
use crate::collapse::{diffusion_coefficient, FluctuationModel, ModelKind};
use crate::constants::{PhysicalConstants, SECONDS_PER_YEAR};
use crate::error::{require_positive, Error, Result};

/// |1 − q| below which the strong-chaos (exponential) branch is used.
pub const STRONG_CHAOS_TOLERANCE: f64 = 1e-12;

/// Bracket for the standoff root, seconds.
pub const STANDOFF_BRACKET: (f64, f64) = (1e-30, 1e20);

/// Relative width at which the standoff bisection stops.
pub const STANDOFF_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Mixing parameters of a chaotic system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosProfile {
    /// Entropic index, 0 < q ≤ 1.
    pub q: f64,
    /// Generalized Lyapunov rate λ_q, s⁻¹.
    pub lambda_q: f64,
    /// Number of degrees of freedom.
    pub dims: u32,
    /// Initial unexplored phase-space volume M(0), (erg·s)^N.
    pub m0: f64,
}

impl ChaosProfile {
    pub fn new(q: f64, lambda_q: f64, dims: u32, m0: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::validation("q", format!("must satisfy 0 < q <= 1, got {q}")));
        }
        require_positive("lambda_q", lambda_q)?;
        require_positive("m0", m0)?;
        if dims == 0 {
            return Err(Error::validation("dims", "must be >= 1"));
        }
        Ok(ChaosProfile { q, lambda_q, dims, m0 })
    }

    /// One-dimensional strong chaos with M(0) = χ σ_p(0), the identification
    /// under which the general formulas reduce to the one-dimensional ones.
    pub fn strong_for_body(body: &BodyProfile) -> Self {
        ChaosProfile {
            q: 1.0,
            lambda_q: body.lyapunov_rate_per_s,
            dims: 1,
            m0: body.nonlinearity_scale_cm * body.sigma_p0_g_cm_per_s,
        }
    }

    pub fn is_strong(&self) -> bool {
        (1.0 - self.q).abs() < STRONG_CHAOS_TOLERANCE
    }
}

/// Time to grow a ratio `ln_ratio` under the q-exponential law:
/// ln(X)/λ for q = 1, (X^(1−q) − 1)/(λ(1−q)) otherwise.
fn q_logarithm_time(q: f64, lambda: f64, ln_ratio: f64) -> f64 {
    if (1.0 - q).abs() < STRONG_CHAOS_TOLERANCE {
        ln_ratio / lambda
    } else {
        let w = 1.0 - q;
        (w * ln_ratio).exp_m1() / (lambda * w)
    }
}

/// M(t): the phase-space volume not yet visited.
pub fn unexplored_area(chaos: &ChaosProfile, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    if chaos.is_strong() {
        return Ok(chaos.m0 * (-chaos.lambda_q * t).exp());
    }
    let w = 1.0 - chaos.q;
    // [1 + λ t w]^(-1/w) via log1p for accuracy near q = 1
    Ok(chaos.m0 * (-(chaos.lambda_q * t * w).ln_1p() / w).exp())
}

/// λ⁻¹ ln(χ σ_p(0) / ħ).
pub fn t_q_zurek(lambda: f64, chi: f64, sigma_p0: f64, hbar: f64) -> Result<f64> {
    require_positive("lambda", lambda)?;
    let ln_arg = chi.ln() + sigma_p0.ln() - hbar.ln();
    if !(ln_arg > 0.0) {
        return Err(Error::domain(format!(
            "chi * sigma_p0 / hbar = {:e} <= 1: the system is already at the quantum scale",
            ln_arg.exp()
        )));
    }
    Ok(ln_arg / lambda)
}

/// ln(M(0) / ħ^N).
pub fn t_q_log_argument(chaos: &ChaosProfile, hbar: f64) -> f64 {
    chaos.m0.ln() - f64::from(chaos.dims) * hbar.ln()
}

/// Solve M(t_Q) = ħ^N.
pub fn t_q_general(chaos: &ChaosProfile, hbar: f64) -> Result<f64> {
    let ln_ratio = t_q_log_argument(chaos, hbar);
    if !(ln_ratio > 0.0) {
        return Err(Error::domain(format!(
            "M(0) = {:e} does not exceed hbar^{}",
            chaos.m0, chaos.dims
        )));
    }
    Ok(q_logarithm_time(chaos.q, chaos.lambda_q, ln_ratio))
}

/// ln(σ_p(0) √λ / √(2D)).
pub fn t_cg_log_argument(lambda: f64, sigma_p0: f64, d: f64) -> f64 {
    sigma_p0.ln() + 0.5 * lambda.ln() - 0.5 * (2.0 * d).ln()
}

/// λ⁻¹ ln(σ_p(0) √λ / √(2D)).
pub fn t_cg_closed_form(lambda: f64, sigma_p0: f64, d: f64) -> Result<f64> {
    require_positive("lambda", lambda)?;
    require_positive("sigma_p0", sigma_p0)?;
    require_positive("diffusion", d)?;
    let ln_arg = t_cg_log_argument(lambda, sigma_p0, d);
    if !(ln_arg > 0.0) {
        return Err(Error::domain(format!(
            "sigma_p0 sqrt(lambda) / sqrt(2D) = {:e} <= 1: diffusion dominates from the start",
            ln_arg.exp()
        )));
    }
    Ok(ln_arg / lambda)
}

/// Root of σ_p(0) e^{−λt} = √(2Dt), found by bisection in ln t.
pub fn t_cg_standoff(lambda: f64, sigma_p0: f64, d: f64) -> Result<f64> {
    require_positive("lambda", lambda)?;
    require_positive("sigma_p0", sigma_p0)?;
    require_positive("diffusion", d)?;
    // g is strictly decreasing in t
    let g = |t: f64| sigma_p0.ln() - lambda * t - 0.5 * (2.0 * d * t).ln();
    let (mut lo, mut hi) = STANDOFF_BRACKET;
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(Error::domain(format!(
            "standoff has no sign change on [{lo:e}, {hi:e}] s"
        )));
    }
    while hi / lo - 1.0 > STANDOFF_RELATIVE_TOLERANCE {
        let mid = (lo * hi).sqrt();
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// ln(M(0) λ^N / (2√(D_x D_p))^N).
pub fn t_cg_general_log_argument(chaos: &ChaosProfile, d_x: f64, d_p: f64) -> f64 {
    let n = f64::from(chaos.dims);
    chaos.m0.ln() + n * chaos.lambda_q.ln() - n * (2.0 * (d_x * d_p).sqrt()).ln()
}

/// Solve M(t_CG) = (2 √(D_x D_p) t_CG)^N in its strong/weak-chaos closed forms.
pub fn t_cg_general(chaos: &ChaosProfile, d_x: f64, d_p: f64) -> Result<f64> {
    require_positive("d_x", d_x)?;
    require_positive("d_p", d_p)?;
    let ln_arg = t_cg_general_log_argument(chaos, d_x, d_p);
    if !(ln_arg > 0.0) {
        return Err(Error::domain(format!(
            "M(0) lambda^N / (2 sqrt(Dx Dp))^N = {:e} <= 1",
            ln_arg.exp()
        )));
    }
    Ok(q_logarithm_time(chaos.q, chaos.lambda_q, ln_arg))
}

/// Position diffusion that makes the general t_CG coincide with the
/// one-dimensional closed form when M(0) = χ σ_p(0): D_x = χ² λ / 2.
pub fn effective_position_diffusion(chi: f64, lambda: f64) -> f64 {
    0.5 * chi * chi * lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ClassicalitySafe,
    CorrespondenceBreakdown,
}

impl Verdict {
    pub fn from_times(t_q: f64, t_cg: f64) -> Self {
        if t_cg < t_q {
            Verdict::ClassicalitySafe
        } else {
            Verdict::CorrespondenceBreakdown
        }
    }

    pub fn banner(self) -> &'static str {
        match self {
            Verdict::ClassicalitySafe => "CLASSICALITY SAFE (t_CG < t_Q)",
            Verdict::CorrespondenceBreakdown => "CORRESPONDENCE BREAKDOWN",
        }
    }
}

/// Everything computed for one body under one fluctuation model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimescaleReport {
    pub body: String,
    pub model: ModelKind,
    pub t_q_s: f64,
    pub t_cg_s: f64,
    /// Momentum diffusion coefficient, erg·g/s.
    pub diffusion: f64,
    pub chaos: ChaosProfile,
    pub verdict: Verdict,
    pub intermediates: BTreeMap<String, f64>,
}

impl TimescaleReport {
    pub fn t_q_years(&self) -> f64 {
        self.t_q_s / SECONDS_PER_YEAR
    }

    pub fn t_cg_years(&self) -> f64 {
        self.t_cg_s / SECONDS_PER_YEAR
    }
}

/// Compute D for the model and assemble the report.
pub fn classicality_verdict(
    body: &BodyProfile,
    model: &FluctuationModel,
    chaos: &ChaosProfile,
    consts: &PhysicalConstants,
) -> Result<TimescaleReport> {
    let d = diffusion_coefficient(model, body, consts);
    verdict_for_diffusion(body, model.kind, d, chaos, consts)
}

/// The report for an explicitly given diffusion coefficient.
pub fn verdict_for_diffusion(
    body: &BodyProfile,
    kind: ModelKind,
    d: f64,
    chaos: &ChaosProfile,
    consts: &PhysicalConstants,
) -> Result<TimescaleReport> {
    let ctx = format!("{} / {kind}", body.name);
    let chi = body.nonlinearity_scale_cm;
    let sigma = body.sigma_p0_g_cm_per_s;
    let d_x = effective_position_diffusion(chi, chaos.lambda_q);

    let t_q = t_q_general(chaos, consts.hbar).map_err(|e| e.context(&format!("{ctx}: t_Q")))?;
    let t_cg = t_cg_general(chaos, d_x, d).map_err(|e| e.context(&format!("{ctx}: t_CG")))?;

    let mut im = BTreeMap::new();
    im.insert("t_q_log_argument".into(), t_q_log_argument(chaos, consts.hbar));
    im.insert("t_cg_log_argument".into(), t_cg_general_log_argument(chaos, d_x, d));
    im.insert("position_diffusion_cm2_per_s".into(), d_x);
    im.insert("sigma_p0_g_cm_per_s".into(), sigma);
    im.insert("nonlinearity_scale_cm".into(), chi);
    im.insert("hbar_erg_s".into(), consts.hbar);
    im.insert("t_q_yr".into(), t_q / SECONDS_PER_YEAR);
    im.insert("t_cg_yr".into(), t_cg / SECONDS_PER_YEAR);

    // one-dimensional reference values
    let lambda = body.lyapunov_rate_per_s;
    if let Ok(t) = t_q_zurek(lambda, chi, sigma, consts.hbar) {
        im.insert("t_q_zurek_s".into(), t);
    }
    if let Ok(t) = t_cg_closed_form(lambda, sigma, d) {
        im.insert("t_cg_closed_form_s".into(), t);
        if let Ok(ts) = t_cg_standoff(lambda, sigma, d) {
            im.insert("t_cg_standoff_s".into(), ts);
            im.insert("standoff_gap_lambda".into(), (ts - t).abs() * lambda);
            let residual = sigma * (-lambda * ts).exp() / (2.0 * d * ts).sqrt() - 1.0;
            im.insert("standoff_residual".into(), residual);
        }
    }

    Ok(TimescaleReport {
        body: body.name.clone(),
        model: kind,
        t_q_s: t_q,
        t_cg_s: t_cg,
        diffusion: d,
        chaos: *chaos,
        verdict: Verdict::from_times(t_q, t_cg),
        intermediates: im,
    })
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn unexplored_area_strictly_decreasing(
            q in 0.05f64..=1.0, lambda in 1e-3f64..1e3, t1 in 0.0f64..10.0, dt in 1e-3f64..10.0,
        ) {
            let c = ChaosProfile::new(q, lambda, 1, 1.0).unwrap();
            let a = unexplored_area(&c, t1 / lambda).unwrap();
            let b = unexplored_area(&c, (t1 + dt) / lambda).unwrap();
            prop_assert!(b < a);
        }

        #[test]
        fn general_forms_reduce_to_one_dimensional(
            lambda in (-20.0f64..2.0).prop_map(|e| 10f64.powf(e)),
            chi in (0.0f64..15.0).prop_map(|e| 10f64.powf(e)),
            sigma in (0.0f64..37.0).prop_map(|e| 10f64.powf(e)),
            d in (-30.0f64..-5.0).prop_map(|e| 10f64.powf(e)),
        ) {
            let hbar = PhysicalConstants::CGS.hbar;
            let chaos = ChaosProfile::new(1.0, lambda, 1, chi * sigma).unwrap();
            let tq = t_q_general(&chaos, hbar).unwrap();
            let tq1 = t_q_zurek(lambda, chi, sigma, hbar).unwrap();
            prop_assert!((tq / tq1 - 1.0).abs() < 1e-12);
            if let Ok(tcg1) = t_cg_closed_form(lambda, sigma, d) {
                let dx = effective_position_diffusion(chi, lambda);
                let tcg = t_cg_general(&chaos, dx, d).unwrap();
                prop_assert!((tcg - tcg1).abs() <= 1e-9 * tcg1.max(1.0 / lambda));
            }
        }

        #[test]
        fn t_cg_monotone_in_d_and_sigma(
            lambda in 1e-3f64..10.0, sigma in 1e3f64..1e9, d in 1e-6f64..1.0, f in 1.001f64..100.0,
        ) {
            let a = t_cg_closed_form(lambda, sigma, d).unwrap();
            let b = t_cg_closed_form(lambda, sigma, d * f).unwrap();
            prop_assert!(b < a);
            let c = t_cg_closed_form(lambda, sigma * f, d).unwrap();
            prop_assert!(c > a);
        }

        #[test]
        fn standoff_gap_bound(
            lambda in (-16.0f64..3.0).prop_map(|e| 10f64.powf(e)),
            sigma in (0.0f64..37.0).prop_map(|e| 10f64.powf(e)),
            d in (-20.0f64..5.0).prop_map(|e| 10f64.powf(e)),
        ) {
            if let Ok(closed) = t_cg_closed_form(lambda, sigma, d) {
                let root = t_cg_standoff(lambda, sigma, d).unwrap();
                let gap = (root - closed).abs() * lambda;
                prop_assert!(gap <= 0.5 * (lambda * root).ln() + 1.0, "gap {gap}");
            }
        }
    }
}
