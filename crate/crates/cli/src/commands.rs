use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use decoherence_core::catalog::BodyProfile;
use decoherence_core::collapse::{diffusion_coefficient, CollapseModelParams, FluctuationModel, ModelKind};
use decoherence_core::constants::{PhysicalConstants, SECONDS_PER_YEAR};
use decoherence_core::timescales::{classicality_verdict, ChaosProfile, TimescaleReport};
use decoherence_core::wigner::{
    classical_quantum_distance, evolve_with, linear_fit, DistanceSeries, Scenario, Units, WignerField,
    BREAKDOWN_THRESHOLD,
};
use decoherence_core::{Catalog, Error};

use crate::args::{CatalogAction, Cli, Command, CompareArgs, ModelOverrides, ScenarioArgs, Table2Args, TimescalesArgs};
use crate::manifest::{ensure_dir, fmt_f64, to_value, write_file, RunManifest};
use crate::CliError;

/// Order-of-magnitude targets for Jupiter, erg·g/s.
pub const JUPITER_TARGETS: [(ModelKind, f64); 4] = [
    (ModelKind::Env, 1e-10),
    (ModelKind::Grw, 1e-8),
    (ModelKind::Gpr, 1e-11),
    (ModelKind::Ggr, 1e-4),
];

/// Allowed |log₁₀(computed / target)|.
pub const TABLE2_TOLERANCE_DECADES: f64 = 1.0;

/// Allowed relative deviation of the fitted sweep slope from 1/λ.
pub const SWEEP_SLOPE_TOLERANCE: f64 = 0.2;

pub struct Context {
    pub consts: PhysicalConstants,
    pub catalog: Catalog,
    pub json: bool,
    pub out: Option<PathBuf>,
}

impl Context {
    pub fn new(catalog_path: Option<&Path>, json: bool, out: Option<PathBuf>) -> Result<Self, CliError> {
        let consts = PhysicalConstants::CGS;
        let catalog = match catalog_path {
            None => Catalog::builtin(),
            Some(p) => {
                let src = fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read catalog {}: {e}", p.display())))?;
                Catalog::with_overrides(&src, &consts)?
            }
        };
        Ok(Context { consts, catalog, json, out })
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let ctx = Context::new(cli.catalog.as_deref(), cli.json, cli.out.clone())?;
    match &cli.command {
        Command::Timescales(a) => cmd_timescales(&ctx, a, stdout),
        Command::Table2(a) => cmd_table2(&ctx, a, stdout),
        Command::Evolve(a) => cmd_evolve(&ctx, a, stdout),
        Command::Compare(a) => cmd_compare(&ctx, a, stdout),
        Command::Catalog { action: CatalogAction::List } => cmd_catalog_list(&ctx, stdout),
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Usage(format!("cannot write output: {e}"))
}

fn parse_model(name: &str) -> Result<ModelKind, CliError> {
    name.parse::<ModelKind>()
        .map_err(|_| CliError::Usage(format!("unknown model `{name}` (expected env, grw, gpr or ggr)")))
}

pub fn collapse_params(ov: &ModelOverrides) -> CollapseModelParams {
    let d = CollapseModelParams::default();
    CollapseModelParams {
        lambda_grw: ov.lambda_grw.unwrap_or(d.lambda_grw),
        a: ov.a.unwrap_or(d.a),
        gamma_gpr: ov.gamma_gpr.unwrap_or(d.gamma_gpr),
    }
}

/// The catalog body with bath overrides applied.
pub fn resolve_body(ctx: &Context, name: &str, ov: &ModelOverrides) -> Result<BodyProfile, CliError> {
    let mut body = ctx.catalog.get(name)?.clone();
    if let Some(g) = ov.gamma_env {
        body.relax_rate_per_s = g;
    }
    if let Some(t) = ov.temp {
        body.temperature_k = t;
    }
    body.validate()?;
    Ok(body)
}

fn chaos_profile(body: &BodyProfile, a: &TimescalesArgs) -> Result<ChaosProfile, CliError> {
    let base = ChaosProfile::strong_for_body(body);
    Ok(ChaosProfile::new(
        a.q.unwrap_or(base.q),
        a.lambda_q.unwrap_or(base.lambda_q),
        a.dims.unwrap_or(base.dims),
        a.m0.unwrap_or(base.m0),
    )?)
}

pub fn timescales(ctx: &Context, a: &TimescalesArgs) -> Result<TimescaleReport, CliError> {
    let kind = parse_model(&a.model)?;
    let body = resolve_body(ctx, &a.body, &a.overrides)?;
    let model = FluctuationModel::for_body(kind, collapse_params(&a.overrides), &body)?;
    let chaos = chaos_profile(&body, a)?;
    Ok(classicality_verdict(&body, &model, &chaos, &ctx.consts)?)
}

#[derive(Serialize)]
struct TimescalesOutput<'a> {
    #[serde(flatten)]
    report: &'a TimescaleReport,
    t_q_yr: f64,
    t_cg_yr: f64,
    verdict_line: &'static str,
    seconds_per_year: f64,
}

pub fn cmd_timescales(ctx: &Context, a: &TimescalesArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let report = timescales(ctx, a)?;
    let output = TimescalesOutput {
        report: &report,
        t_q_yr: report.t_q_years(),
        t_cg_yr: report.t_cg_years(),
        verdict_line: report.verdict.banner(),
        seconds_per_year: SECONDS_PER_YEAR,
    };
    if ctx.json {
        writeln!(stdout, "{}", serde_json::to_string_pretty(&output).expect("serializable")).map_err(io)?;
    } else {
        let mut lines = vec![
            format!("body = {}", report.body),
            format!("model = {}", report.model),
            format!("diffusion_erg_g_per_s = {:.6e}", report.diffusion),
            format!("t_q_s = {:.6e}", report.t_q_s),
            format!("t_q_yr = {:.6e}", output.t_q_yr),
            format!("t_cg_s = {:.6e}", report.t_cg_s),
            format!("t_cg_yr = {:.6e}", output.t_cg_yr),
        ];
        for (k, v) in report.intermediates.iter().filter(|(k, _)| !k.ends_with("_yr")) {
            lines.push(format!("{k} = {v:.6e}"));
        }
        lines.push(format!("verdict = {}", report.verdict.banner()));
        writeln!(stdout, "{}", lines.join("\n")).map_err(io)?;
    }
    if let Some(dir) = &ctx.out {
        ensure_dir(dir)?;
        let mut m = RunManifest::new("timescales", timescales_inputs(a, &report));
        let path = dir.join(format!("timescales_{}_{}.json", report.body, report.model));
        write_file(&path, serde_json::to_string_pretty(&output).expect("serializable").as_bytes())?;
        m.outputs.push(path.display().to_string());
        m.result("verdict", report.verdict);
        m.wall_time_s = start.elapsed().as_secs_f64();
        m.write(dir)?;
    }
    Ok(())
}

fn timescales_inputs(a: &TimescalesArgs, report: &TimescaleReport) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("body".into(), to_value(&report.body));
    m.insert("model".into(), to_value(report.model));
    m.insert("chaos".into(), to_value(report.chaos));
    m.insert("diffusion".into(), to_value(report.diffusion));
    m.insert("overrides".into(), overrides_value(&a.overrides));
    m
}

fn overrides_value(ov: &ModelOverrides) -> Value {
    serde_json::json!({
        "lambda_grw": ov.lambda_grw,
        "a": ov.a,
        "gamma_gpr": ov.gamma_gpr,
        "gamma_env": ov.gamma_env,
        "temp": ov.temp,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2Row {
    pub model: ModelKind,
    pub formula: &'static str,
    /// erg·g/s; absent when the model cannot be evaluated for the body.
    pub diffusion: Option<f64>,
    pub note: Option<String>,
    pub target: Option<f64>,
    pub log10_ratio: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2 {
    pub body: BodyProfile,
    pub params: CollapseModelParams,
    pub hbar: f64,
    pub gravitational_constant: f64,
    pub boltzmann_constant: f64,
    pub target_source: Option<&'static str>,
    pub tolerance_decades: f64,
    pub rows: Vec<Table2Row>,
}

impl Table2 {
    pub fn all_pass(&self) -> Option<bool> {
        self.rows.iter().map(|r| r.pass).collect::<Option<Vec<_>>>().map(|v| v.iter().all(|&p| p))
    }
}

fn formula(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Env => "2 M gamma k T",
        ModelKind::Grw => "N lambda hbar^2 / (4 a^2)",
        ModelKind::Gpr => "gamma hbar^2 N^2 S / (4 V^2 a sqrt(pi))",
        ModelKind::Ggr => "G hbar M^2 / (2 V)",
    }
}

pub fn table2(body: &BodyProfile, params: CollapseModelParams, consts: &PhysicalConstants) -> Result<Table2, CliError> {
    params.validate()?;
    let targets = body.name.eq_ignore_ascii_case("jupiter");
    let rows = ModelKind::ALL
        .iter()
        .map(|&kind| {
            let (diffusion, note) = match FluctuationModel::for_body(kind, params, body) {
                Ok(model) => (Some(diffusion_coefficient(&model, body, consts)), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let target = targets
                .then(|| JUPITER_TARGETS.iter().find(|(k, _)| *k == kind).map(|(_, t)| *t))
                .flatten();
            let log10_ratio = match (diffusion, target) {
                (Some(d), Some(t)) => Some((d / t).log10()),
                _ => None,
            };
            Table2Row {
                model: kind,
                formula: formula(kind),
                diffusion,
                note,
                target,
                log10_ratio,
                pass: target.map(|_| log10_ratio.is_some_and(|r| r.abs() <= TABLE2_TOLERANCE_DECADES)),
            }
        })
        .collect();
    Ok(Table2 {
        body: body.clone(),
        params,
        hbar: consts.hbar,
        gravitational_constant: consts.g,
        boltzmann_constant: consts.k_b,
        target_source: targets.then_some("published single-figure estimates for Jupiter"),
        tolerance_decades: TABLE2_TOLERANCE_DECADES,
        rows,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into())
}

pub fn cmd_table2(ctx: &Context, a: &Table2Args, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let body = resolve_body(ctx, &a.body, &a.overrides)?;
    let t = table2(&body, collapse_params(&a.overrides), &ctx.consts)?;
    if ctx.json {
        writeln!(stdout, "{}", serde_json::to_string_pretty(&t).expect("serializable")).map_err(io)?;
    } else {
        writeln!(stdout, "body = {}", t.body.name).map_err(io)?;
        writeln!(stdout, "{:<6} {:>12} {:>12} {:>10} {:>6}", "model", "D_erg_g_s", "target", "log10", "flag").map_err(io)?;
        for r in &t.rows {
            let flag = match r.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "-",
            };
            let ratio = r.log10_ratio.map(|x| format!("{x:+.2}")).unwrap_or_else(|| "-".into());
            writeln!(stdout, "{:<6} {:>12} {:>12} {:>10} {:>6}", r.model.as_str(), opt(r.diffusion), opt(r.target), ratio, flag)
                .map_err(io)?;
            if let Some(n) = &r.note {
                writeln!(stdout, "       note: {n}").map_err(io)?;
            }
        }
    }
    if let Some(dir) = &ctx.out {
        ensure_dir(dir)?;
        let path = dir.join("table2.csv");
        let mut csv = String::from("model,d_erg_g_per_s,target_erg_g_per_s,log10_ratio,pass\n");
        let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        for r in &t.rows {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                r.model,
                cell(r.diffusion),
                cell(r.target),
                cell(r.log10_ratio),
                r.pass.map(|p| p.to_string()).unwrap_or_default()
            ));
        }
        write_file(&path, csv.as_bytes())?;
        let mut inputs = BTreeMap::new();
        inputs.insert("body".into(), to_value(&t.body));
        inputs.insert("params".into(), to_value(t.params));
        let mut m = RunManifest::new("table2", inputs);
        m.outputs.push(path.display().to_string());
        m.result("all_pass", t.all_pass());
        m.wall_time_s = start.elapsed().as_secs_f64();
        m.write(dir)?;
    }
    Ok(())
}

pub fn cmd_catalog_list(ctx: &Context, stdout: &mut dyn Write) -> Result<(), CliError> {
    let bodies = ctx.catalog.bodies();
    if ctx.json {
        writeln!(stdout, "{}", serde_json::to_string_pretty(bodies).expect("serializable")).map_err(io)?;
        return Ok(());
    }
    writeln!(stdout, "{:<12} {:>12} {:>12} {:>12} {:>12} {:>12}", "name", "mass_g", "volume_cm3", "sigma_p0", "lyap_per_s", "chi_cm")
        .map_err(io)?;
    for b in bodies {
        writeln!(
            stdout,
            "{:<12} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            b.name, b.mass_g, b.volume_cm3, b.sigma_p0_g_cm_per_s, b.lyapunov_rate_per_s, b.nonlinearity_scale_cm
        )
        .map_err(io)?;
    }
    Ok(())
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let src = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read scenario {}: {e}", path.display())))?;
    Ok(Scenario::from_toml_str(&src)?)
}

fn csv_header(units: Units) -> &'static str {
    match units {
        Units::Cgs => "x_cm,p_g_cm_per_s,w_per_erg_s\n",
        Units::Scaled => "x,p,w\n",
    }
}

/// One snapshot as CSV text, row-major over (x, p).
pub fn snapshot_csv(field: &WignerField, units: Units) -> String {
    let (xs, ps) = (field.grid.xs(), field.grid.ps());
    let mut s = String::with_capacity(field.grid.nx * field.grid.np * 72);
    s.push_str(csv_header(units));
    for (i, row) in field.values.outer_iter().enumerate() {
        let x = fmt_f64(xs[i]);
        for (j, w) in row.iter().enumerate() {
            s.push_str(&x);
            s.push(',');
            s.push_str(&fmt_f64(ps[j]));
            s.push(',');
            s.push_str(&fmt_f64(*w));
            s.push('\n');
        }
    }
    s
}

fn scenario_inputs(s: &Scenario) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("scenario".into(), to_value(s));
    m
}

/// Save the last finite field of a failed run and turn the error into a
/// numerical-failure exit.
fn numerical_failure(err: Error, dir: Option<&Path>, units: Units) -> CliError {
    match err {
        Error::Numerical { time, message, last_good } => {
            let mut snapshot = None;
            if let (Some(dir), Some(field)) = (dir, last_good) {
                let path = dir.join("last_good.csv");
                if write_file(&path, snapshot_csv(&field, units).as_bytes()).is_ok() {
                    snapshot = Some(path);
                }
            }
            CliError::Numerical {
                message: format!("t = {time:e}: {message}"),
                snapshot,
            }
        }
        other => other.into(),
    }
}

/// L¹ distance between the final field and the initial one after a whole
/// number of periods of an undamped harmonic potential.
#[derive(Debug, Clone, Serialize)]
pub struct RevivalCheck {
    pub period: f64,
    pub periods: f64,
    pub l1_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const REVIVAL_TOLERANCE: f64 = 1e-4;

fn harmonic_period(s: &Scenario) -> Option<f64> {
    let e = &s.evolution;
    let c = e.potential.coefficients;
    let quadratic = c[3] == 0.0 && c[4] == 0.0 && c[2] > 0.0;
    if !quadratic || e.gamma != 0.0 || e.diffusion != 0.0 || e.potential.drive_amplitude != 0.0 {
        return None;
    }
    let omega = (2.0 * c[2] / e.mass).sqrt();
    let period = 2.0 * std::f64::consts::PI / omega;
    let n = e.t_end / period;
    (n >= 0.5 && (n - n.round()).abs() < 1e-9 * n.max(1.0)).then_some(period)
}

pub fn cmd_evolve(ctx: &Context, a: &ScenarioArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let dir = ctx
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("evolve needs --out <dir>".into()))?;
    let scenario = load_scenario(&a.scenario)?;
    let initial = scenario.initial_field()?;
    ensure_dir(&dir)?;

    let mut m = RunManifest::new("evolve", scenario_inputs(&scenario));
    let mut diagnostics = Vec::new();
    let mut last: Option<WignerField> = None;
    let mut write_err = None;
    let units = scenario.units;
    let result = evolve_with(&initial, &scenario.evolution, |field, diag| {
        let path = dir.join(format!("snapshot_{:05}.csv", diagnostics.len()));
        if let Err(e) = write_file(&path, snapshot_csv(field, units).as_bytes()) {
            write_err = Some(e);
            return Err(Error::Domain("snapshot write failed".into()));
        }
        m.outputs.push(path.display().to_string());
        diagnostics.push(diag.clone());
        last = Some(field.clone());
        Ok(())
    });
    if let Some(e) = write_err {
        return Err(e);
    }
    let (steps, dt) = result.map_err(|e| numerical_failure(e, Some(&dir), units))?;

    m.result("steps", steps);
    m.result("dt", dt);
    m.result("times", diagnostics.iter().map(|d| d.time).collect::<Vec<_>>());
    m.result("diagnostics", &diagnostics);
    if let (Some(period), Some(final_field)) = (harmonic_period(&scenario), &last) {
        let mut reference = initial.clone();
        reference.time = final_field.time;
        let err = final_field.l1_distance(&reference)?;
        m.result(
            "revival",
            RevivalCheck {
                period,
                periods: scenario.evolution.t_end / period,
                l1_error: err,
                tolerance: REVIVAL_TOLERANCE,
                pass: err <= REVIVAL_TOLERANCE,
            },
        );
    }
    m.wall_time_s = start.elapsed().as_secs_f64();
    let path = m.write(&dir)?;
    if ctx.json {
        writeln!(stdout, "{}", serde_json::to_string_pretty(&m).expect("serializable")).map_err(io)?;
    } else {
        writeln!(stdout, "steps = {steps}\ndt = {dt:.6e}\nsnapshots = {}\nmanifest = {}", diagnostics.len(), path.display())
            .map_err(io)?;
        if let Some(r) = m.results.get("revival") {
            writeln!(stdout, "revival_l1_error = {}\nrevival_pass = {}", r["l1_error"], r["pass"]).map_err(io)?;
        }
    }
    Ok(())
}

/// One run of an ħ sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRun {
    pub hbar: f64,
    pub breakdown_time: Option<f64>,
    pub final_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub runs: Vec<SweepRun>,
    /// Fitted d t_Q / d ln(1/ħ).
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Local instability rate √(−V″/m) at the initial centre, if V″ < 0 there.
    pub lambda: Option<f64>,
    pub expected_slope: Option<f64>,
    pub relative_error: Option<f64>,
    pub pass: Option<bool>,
}

/// Local instability rate at the packet centre.
pub fn local_lambda(s: &Scenario, initial: &WignerField) -> Option<f64> {
    let x0 = initial.moments().mean_x;
    let curvature = s.evolution.potential.d2(x0);
    (curvature < 0.0).then(|| (-curvature / s.evolution.mass).sqrt())
}

/// Compare runs at ħ, ħ/10, ..., ħ/10^(n−1), each stopped at its breakdown.
pub fn hbar_sweep(scenario: &Scenario, n: usize) -> Result<SweepResult, CliError> {
    if n < 2 {
        return Err(CliError::Usage("--hbar-sweep needs at least 2 runs".into()));
    }
    let base = scenario.evolution.hbar;
    let hbars: Vec<f64> = (0..n).map(|k| base * 10f64.powi(-(k as i32))).collect();
    let runs = hbars
        .par_iter()
        .map(|&h| -> Result<SweepRun, CliError> {
            let s = scenario.with_hbar(h)?;
            let initial = s.initial_field()?;
            let series = classical_quantum_distance(&initial, &s.evolution, true)?;
            Ok(SweepRun {
                hbar: h,
                breakdown_time: series.breakdown_time,
                final_distance: *series.distances.last().unwrap_or(&0.0),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let lambda = local_lambda(scenario, &scenario.initial_field()?);
    let crossed: Vec<(f64, f64)> = runs
        .iter()
        .filter_map(|r| r.breakdown_time.map(|t| ((1.0 / r.hbar).ln(), t)))
        .collect();
    let fit = if crossed.len() == runs.len() {
        let (xs, ys): (Vec<f64>, Vec<f64>) = crossed.into_iter().unzip();
        linear_fit(&xs, &ys).ok()
    } else {
        None
    };
    let expected = lambda.map(|l| 1.0 / l);
    let relative_error = match (fit, expected) {
        (Some((slope, _)), Some(e)) => Some((slope - e).abs() / e),
        _ => None,
    };
    Ok(SweepResult {
        runs,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        lambda,
        expected_slope: expected,
        relative_error,
        pass: relative_error.map(|r| r <= SWEEP_SLOPE_TOLERANCE),
    })
}

fn distance_csv(series: &DistanceSeries) -> String {
    let mut s = String::from("t,l1_distance\n");
    for (t, d) in series.times.iter().zip(&series.distances) {
        s.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*d)));
    }
    s
}

pub fn cmd_compare(ctx: &Context, a: &CompareArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let scenario = load_scenario(&a.scenario)?;
    if let Some(dir) = &ctx.out {
        ensure_dir(dir)?;
    }
    let mut inputs = scenario_inputs(&scenario);
    inputs.insert("hbar_sweep".into(), to_value(a.hbar_sweep));
    let mut m = RunManifest::new("compare", inputs);

    if let Some(n) = a.hbar_sweep {
        let sweep = hbar_sweep(&scenario, n)?;
        if let Some(dir) = &ctx.out {
            let path = dir.join("hbar_sweep.csv");
            let mut csv = String::from("hbar,ln_inv_hbar,breakdown_time,final_distance\n");
            for r in &sweep.runs {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f64(r.hbar),
                    fmt_f64((1.0 / r.hbar).ln()),
                    r.breakdown_time.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(r.final_distance)
                ));
            }
            write_file(&path, csv.as_bytes())?;
            m.outputs.push(path.display().to_string());
        }
        m.result("sweep", &sweep);
        if ctx.json {
            writeln!(stdout, "{}", serde_json::to_string_pretty(&sweep).expect("serializable")).map_err(io)?;
        } else {
            for r in &sweep.runs {
                writeln!(stdout, "hbar = {:.6e}  t_breakdown = {}", r.hbar, opt(r.breakdown_time)).map_err(io)?;
            }
            writeln!(stdout, "slope = {}\nexpected_slope = {}\nrelative_error = {}", opt(sweep.slope), opt(sweep.expected_slope), opt(sweep.relative_error))
                .map_err(io)?;
            let verdict = match sweep.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "UNDETERMINED",
            };
            writeln!(stdout, "slope_check = {verdict}").map_err(io)?;
        }
    } else {
        let initial = scenario.initial_field()?;
        let series = classical_quantum_distance(&initial, &scenario.evolution, false)
            .map_err(|e| numerical_failure(e, ctx.out.as_deref(), scenario.units))?;
        if let Some(dir) = &ctx.out {
            let path = dir.join("distance.csv");
            write_file(&path, distance_csv(&series).as_bytes())?;
            m.outputs.push(path.display().to_string());
        }
        m.result("threshold", BREAKDOWN_THRESHOLD);
        m.result("breakdown_time", series.breakdown_time);
        m.result("max_distance", series.distances.iter().copied().fold(0.0, f64::max));
        if ctx.json {
            writeln!(stdout, "{}", serde_json::to_string_pretty(&series).expect("serializable")).map_err(io)?;
        } else {
            writeln!(
                stdout,
                "snapshots = {}\nmax_l1_distance = {:.6e}\nbreakdown_time = {}",
                series.times.len(),
                series.distances.iter().copied().fold(0.0, f64::max),
                opt(series.breakdown_time)
            )
            .map_err(io)?;
        }
    }
    if let Some(dir) = &ctx.out {
        m.wall_time_s = start.elapsed().as_secs_f64();
        m.write(dir)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use decoherence_core::wigner::{init_gaussian, PhaseSpaceGrid};

    #[test]
    fn numerical_failure_saves_last_good_field() {
        let dir = tempfile::tempdir().unwrap();
        let g = PhaseSpaceGrid::symmetric(32, 6.0, 6.0).unwrap();
        let field = init_gaussian(&g, 0.0, 0.0, 1.0, 1.0, 1.0).unwrap().field;
        let err = Error::Numerical {
            time: 1.5,
            message: "non-finite value".into(),
            last_good: Some(Box::new(field)),
        };
        let cli_err = numerical_failure(err, Some(dir.path()), Units::Scaled);
        assert_eq!(cli_err.exit_code(), 4);
        match cli_err {
            CliError::Numerical { snapshot: Some(path), .. } => {
                let text = fs::read_to_string(path).unwrap();
                assert_eq!(text.lines().count(), 32 * 32 + 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn table2_targets_cover_every_model() {
        let body = Catalog::builtin().get("jupiter").unwrap().clone();
        let t = table2(&body, CollapseModelParams::default(), &PhysicalConstants::CGS).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert!(t.rows.iter().all(|r| r.target.is_some() && r.diffusion.is_some()));
    }

    #[test]
    fn harmonic_period_needs_whole_periods() {
        let src = r#"
units = "scaled"
[grid]
nx = 32
np = 32
x_min = -4.0
x_max = 4.0
p_min = -4.0
p_max = 4.0
[initial]
kind = "gaussian"
x0 = 0.0
p0 = 0.0
sigma_x = 1.0
sigma_p = 1.0
[evolution]
mass = 1.0
hbar = 1.0
dt = 0.01
t_end = 12.566370614359172
[evolution.potential]
coefficients = [0.0, 0.0, 0.5, 0.0, 0.0]
"#;
        let s = Scenario::from_toml_str(src).unwrap();
        assert!((harmonic_period(&s).unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        let mut half = s.clone();
        half.evolution.t_end = 9.0;
        assert!(harmonic_period(&half).is_none());
    }
}
