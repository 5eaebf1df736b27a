//! The six batch experiments.

use serde::Serialize;

use nsbox_core::certificates::{
    check_existence_condition, check_regularity_condition, estimate_c1, C1Estimate, C1Params,
    Certificate,
};
use nsbox_core::field::SpectralField;
use nsbox_core::grid::{exact_lp_points, lp_norm};
use nsbox_core::ops::{apply_a, apply_b, b_form, stokes_solve, trilinear_bound_check, BFormMethod};
use nsbox_core::solver::{EvolveParams, GalerkinSystem, TrajectoryRecord};
use nsbox_core::verify::{
    perturbation_experiment, steklov_check, ut_estimates, verify_decay, ContractionReport,
    DecayReport, UtReport,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{OutDir, ReportMeta};

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub config_bytes: &'a [u8],
    pub out: &'a OutDir,
}

fn build_system(config: &RunConfig) -> Result<GalerkinSystem, CliError> {
    let domain = config.domain()?;
    Ok(GalerkinSystem::new(&domain, config.cutoff, config.nu)?)
}

fn initial_field(
    config: &RunConfig,
    system: &GalerkinSystem,
    seed: u64,
) -> Result<SpectralField, CliError> {
    let domain = system.domain();
    let mut field = match config.initial.as_str() {
        "zero" => SpectralField::zero(domain, config.cutoff)?,
        "single_mode" => SpectralField::single_mode(domain, config.cutoff, config.amplitude)?,
        "taylor_green" => SpectralField::taylor_green(domain, config.cutoff, config.amplitude)?,
        "random" | "random_seeded" => {
            SpectralField::random_seeded(domain, config.cutoff, seed, config.amplitude)?
        }
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!(
                    "config field `initial`: not a preset and not a readable field file ({path}): {e}"
                ))
            })?;
            let stored = SpectralField::from_json_str(&text)?;
            if stored.domain() != domain {
                return Err(CliError::Usage(format!(
                    "stored field in {path} lives on a different domain"
                )));
            }
            stored
        }
    };
    if let Some(target) = config.target_vnorm {
        field.rescale_to_v_norm(target)?;
    }
    Ok(field)
}

fn evolve_params(config: &RunConfig, system: &GalerkinSystem) -> Result<EvolveParams, CliError> {
    Ok(EvolveParams {
        t_end: config.t_end,
        dt: config.dt.unwrap_or_else(|| system.default_dt()),
        scheme: config.scheme()?,
        sample_every: config.sample_every.max(1),
    })
}

#[derive(Serialize)]
struct SimulateReport {
    meta: ReportMeta,
    scheme: String,
    dt: f64,
    t_end: f64,
    samples: usize,
    initial_l2_sq: f64,
    final_l2_sq: f64,
    initial_v_sq: f64,
    final_v_sq: f64,
    max_energy_residual: f64,
}

fn run_trajectory(
    ctx: &Context,
    experiment: &str,
) -> Result<(GalerkinSystem, TrajectoryRecord, SpectralField, EvolveParams), CliError> {
    let system = build_system(ctx.config)?;
    let u0 = initial_field(ctx.config, &system, ctx.config.seed)?;
    let params = evolve_params(ctx.config, &system)?;
    let (rec, u_final) = system.evolve(&u0, &params)?;
    let meta = ReportMeta::new(experiment, ctx.config_bytes, ctx.config.seed, &system);
    let report = SimulateReport {
        meta,
        scheme: params.scheme.name().to_string(),
        dt: params.dt,
        t_end: params.t_end,
        samples: rec.len(),
        initial_l2_sq: rec.l2_sq[0],
        final_l2_sq: *rec.l2_sq.last().unwrap(),
        initial_v_sq: rec.v_sq[0],
        final_v_sq: *rec.v_sq.last().unwrap(),
        max_energy_residual: rec.max_energy_residual(),
    };
    ctx.out.write_trajectory("trajectory.csv", &rec)?;
    ctx.out.write_json("report.json", &report)?;
    Ok((system, rec, u_final, params))
}

pub fn simulate(ctx: &Context) -> Result<(), CliError> {
    run_trajectory(ctx, "simulate")?;
    Ok(())
}

#[derive(Serialize)]
struct DecayFile {
    meta: ReportMeta,
    report: DecayReport,
}

pub fn verify_decay_cmd(ctx: &Context) -> Result<(), CliError> {
    let (system, rec, _, _) = run_trajectory(ctx, "verify-decay")?;
    let report = verify_decay(&rec, &system, ctx.config.envelope_tol)?;
    // plot data: value and bound side by side for both norms
    let e0 = rec.l2_sq[0];
    let v0 = rec.v_sq[0];
    let rate = report.guaranteed_rate;
    let rate_v = report.guaranteed_rate_v;
    ctx.out.write_csv(
        "envelope.csv",
        "t,l2_sq,l2_bound,v_sq,v_bound",
        rec.times.iter().enumerate().map(|(i, &t)| {
            vec![
                t,
                rec.l2_sq[i],
                e0 * (-rate * t).exp(),
                rec.v_sq[i],
                v0 * (-rate_v * t).exp(),
            ]
        }),
    )?;
    let ok = report.envelope_ok && report.envelope_v_ok;
    let excess = report.max_envelope_excess.max(report.max_envelope_excess_v);
    let meta = ReportMeta::new("verify-decay", ctx.config_bytes, ctx.config.seed, &system);
    ctx.out.write_json("decay_report.json", &DecayFile { meta, report })?;
    if !ok {
        return Err(CliError::Numerical(format!(
            "decay envelope violated: multiplicative excess {excess:e} above tolerance {:e}",
            ctx.config.envelope_tol
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ContractionFile {
    meta: ReportMeta,
    report: ContractionReport,
    ut: UtReport,
}

pub fn perturbation(ctx: &Context) -> Result<(), CliError> {
    let system = build_system(ctx.config)?;
    let u1 = initial_field(ctx.config, &system, ctx.config.seed)?;
    let second_seed = ctx.config.second_seed.unwrap_or(ctx.config.seed + 1);
    let u2 = initial_field(ctx.config, &system, second_seed)?;
    let params = evolve_params(ctx.config, &system)?;
    let report = perturbation_experiment(&system, &u1, &u2, &params, ctx.config.contraction_tol)?;

    // time-derivative estimates along the first trajectory
    let (rec, _) = system.evolve(&u1, &params)?;
    let ut = ut_estimates(&rec, &system, &u1, ctx.config.ut_tol)?;

    ctx.out.write_csv(
        "difference.csv",
        "t,w",
        report
            .times
            .iter()
            .zip(&report.w)
            .map(|(&t, &w)| vec![t, w]),
    )?;
    let meta = ReportMeta::new("perturbation", ctx.config_bytes, ctx.config.seed, &system);
    let ok = report.nonincreasing;
    let inc = report.max_step_increase;
    ctx.out
        .write_json("contraction_report.json", &ContractionFile { meta, report, ut })?;
    if !ok {
        return Err(CliError::Numerical(format!(
            "separation increased by {inc:e} above tolerance {:e}",
            ctx.config.contraction_tol
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct CertificateFile {
    meta: ReportMeta,
    c1_used: f64,
    existence: Certificate,
    regularity: Certificate,
    gate: String,
}

pub fn certify(ctx: &Context) -> Result<(), CliError> {
    let system = build_system(ctx.config)?;
    let u0 = initial_field(ctx.config, &system, ctx.config.seed)?;
    let existence = check_existence_condition(ctx.config.nu, &u0, ctx.config.c1)?;
    let regularity = check_regularity_condition(ctx.config.nu, &u0);
    let gate = ctx.config.certificate.clone();
    let holds = match gate.as_str() {
        "existence" => existence.holds,
        "regularity" => regularity.holds,
        _ => existence.holds && regularity.holds,
    };
    let meta = ReportMeta::new("certify", ctx.config_bytes, ctx.config.seed, &system);
    let file = CertificateFile {
        meta,
        c1_used: ctx.config.c1,
        existence,
        regularity,
        gate: gate.clone(),
    };
    ctx.out.write_json("certificates.json", &file)?;
    if !holds {
        return Err(CliError::CertificateFailed(format!(
            "smallness condition `{gate}` does not hold (margin {:e})",
            match gate.as_str() {
                "regularity" => file.regularity.margin,
                _ => file.existence.margin,
            }
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct C1File {
    meta: ReportMeta,
    iterations: usize,
    restarts: usize,
    estimate: C1Estimate,
    /// The search produces a lower bound on the embedding constant; the
    /// true value is not claimed.
    lower_bound_only: bool,
}

pub fn estimate_c1_cmd(ctx: &Context) -> Result<(), CliError> {
    let system = build_system(ctx.config)?;
    let params = C1Params {
        iterations: ctx.config.c1_iterations,
        restarts: ctx.config.c1_restarts,
        seed: ctx.config.seed,
    };
    let estimate = estimate_c1(system.domain(), ctx.config.cutoff, &params)?;
    let meta = ReportMeta::new("estimate-c1", ctx.config_bytes, ctx.config.seed, &system);
    ctx.out.write_json(
        "c1_report.json",
        &C1File {
            meta,
            iterations: params.iterations,
            restarts: params.restarts,
            estimate,
            lower_bound_only: true,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct InequalitiesReport {
    meta: ReportMeta,
    trials: usize,
    max_skew_residual: f64,
    max_dual_path_delta: f64,
    max_trilinear_ratio: f64,
    trilinear_constant_applies: bool,
    max_parseval_error: f64,
    max_norm_chain_violation: f64,
    max_stokes_inverse_error: f64,
    max_stokes_shift_error: f64,
    steklov_equality_error: f64,
    steklov_mixture_ratio: f64,
    ut_triangle_margin_min: f64,
    violations: Vec<String>,
}

pub fn check_inequalities(ctx: &Context) -> Result<(), CliError> {
    let system = build_system(ctx.config)?;
    let domain = system.domain();
    let cutoff = ctx.config.cutoff;
    let trials = ctx.config.trials.max(1);
    let base = ctx.config.seed;
    let mut violations = Vec::new();

    let mut max_skew = 0.0f64;
    let mut max_delta = 0.0f64;
    let mut max_ratio = 0.0f64;
    for i in 0..trials {
        let s = base + 3 * i as u64;
        let u = SpectralField::random_seeded(domain, cutoff, s, 1.0)?;
        let v = SpectralField::random_seeded(domain, cutoff, s + 1, 1.0)?;
        let w = SpectralField::random_seeded(domain, cutoff, s + 2, 1.0)?;

        let skew = b_form(&u, &v, &v, BFormMethod::Convolution)?.abs();
        let scale = u.v_norm() * v.v_norm() * v.v_norm();
        max_skew = max_skew.max(skew / scale.max(1e-300));

        let bc = b_form(&u, &v, &w, BFormMethod::Convolution)?;
        let bq = b_form(&u, &v, &w, BFormMethod::Quadrature)?;
        max_delta = max_delta.max((bc - bq).abs() / bc.abs().max(1.0));

        let rep = trilinear_bound_check(&u, &v, &w)?;
        max_ratio = max_ratio.max(rep.ratio);
        if rep.violation {
            violations.push(format!(
                "trilinear bound violated on trial {i}: ratio {}",
                rep.ratio
            ));
        }
    }
    if max_skew > 1e-12 {
        violations.push(format!("skew symmetry residual {max_skew:e} above 1e-12"));
    }
    if max_delta > 1e-10 {
        violations.push(format!(
            "convolution and quadrature disagree by {max_delta:e} above 1e-10"
        ));
    }

    let mut max_parseval = 0.0f64;
    let mut max_chain = 0.0f64;
    let n2 = exact_lp_points(domain, cutoff, 2);
    for i in 0..trials.min(50) {
        let f = SpectralField::random_seeded(domain, cutoff, base + 1000 + i as u64, 0.8)?;
        let quad = lp_norm(&f, 2, n2)?;
        let spectral = f.l2_norm();
        max_parseval = max_parseval.max((quad - spectral).abs() / spectral.max(1e-300));
        let gap = f.lambda_min();
        max_chain = max_chain.max(gap * f.l2_sq() - f.v_sq());
        max_chain = max_chain.max(gap * f.l2_norm() - f.a_norm());
    }
    if max_parseval > 1e-10 {
        violations.push(format!("Parseval mismatch {max_parseval:e} above 1e-10"));
    }
    if max_chain > 1e-12 {
        violations.push(format!(
            "spectral-gap norm chain violated by {max_chain:e}"
        ));
    }

    let mut max_inv = 0.0f64;
    let mut max_shift = 0.0f64;
    for i in 0..trials.min(100) {
        let f = SpectralField::random_seeded(domain, cutoff, base + 2000 + i as u64, 1.0)?;
        let u = stokes_solve(&f, system.nu())?;
        let back = apply_a(&u, system.nu());
        max_inv = max_inv.max(back.l2_distance(&f) / f.l2_norm().max(1e-300));
        for m in 0..=1 {
            let lhs = u.h_sq(m + 2).sqrt();
            let rhs = f.h_sq(m).sqrt() / system.nu();
            max_shift = max_shift.max((lhs - rhs).abs() / rhs.max(1e-300));
        }
    }
    if max_inv > 1e-12 {
        violations.push(format!("Stokes inverse residual {max_inv:e} above 1e-12"));
    }
    if max_shift > 1e-12 {
        violations.push(format!(
            "Stokes regularity shift off by {max_shift:e} above 1e-12"
        ));
    }

    let length = domain.sides()[0];
    let eq = steklov_check(&[1.0], length)?;
    let eq_err = (eq - (std::f64::consts::PI / length).powi(2)).abs()
        / (std::f64::consts::PI / length).powi(2);
    let mix = steklov_check(&[1.0, 0.5, 0.25], length)?;
    if eq_err > 1e-12 {
        violations.push(format!("Steklov equality case off by {eq_err:e}"));
    }
    if mix < (std::f64::consts::PI / length).powi(2) {
        violations.push("Steklov lower bound violated on mixture".into());
    }

    let mut ut_margin = f64::INFINITY;
    for i in 0..trials.min(20) {
        let u0 = SpectralField::random_seeded(domain, cutoff, base + 3000 + i as u64, 1.0)?;
        let rhs0 = system.rhs(&u0)?;
        let bound = system.nu() * u0.a_norm() + apply_b(&u0).l2_norm() + 1e-12;
        ut_margin = ut_margin.min(bound - rhs0.l2_norm());
    }
    if ut_margin < 0.0 {
        violations.push(format!(
            "initial time-derivative triangle bound violated by {:e}",
            -ut_margin
        ));
    }

    let meta = ReportMeta::new(
        "check-inequalities",
        ctx.config_bytes,
        ctx.config.seed,
        &system,
    );
    let report = InequalitiesReport {
        meta,
        trials,
        max_skew_residual: max_skew,
        max_dual_path_delta: max_delta,
        max_trilinear_ratio: max_ratio,
        trilinear_constant_applies: domain.dim() == 4,
        max_parseval_error: max_parseval,
        max_norm_chain_violation: max_chain,
        max_stokes_inverse_error: max_inv,
        max_stokes_shift_error: max_shift,
        steklov_equality_error: eq_err,
        steklov_mixture_ratio: mix,
        ut_triangle_margin_min: ut_margin,
        violations: violations.clone(),
    };
    ctx.out.write_json("inequalities_report.json", &report)?;
    if !violations.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} inequality check(s) failed; see inequalities_report.json",
            violations.len()
        )));
    }
    Ok(())
}
