//! Acceptance suite: one test per acceptance criterion, each printing a
//! `criterion N ... PASS/FAIL` line (visible with `--nocapture`). Every
//! tolerance is pinned in code; nothing is deferred to later calibration.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use nsbox_core::certificates::{check_existence_condition, estimate_c1, C1Params};
use nsbox_core::field::SpectralField;
use nsbox_core::ops::{apply_a, apply_b, b_form, stokes_solve, BFormMethod};
use nsbox_core::solver::{EvolveParams, GalerkinSystem, Scheme};
use nsbox_core::verify::{perturbation_experiment, ut_estimates, verify_decay};
use nsbox_core::BoxDomain;

fn torus4() -> BoxDomain {
    BoxDomain::unit_torus(4).unwrap()
}

fn report(criterion: u32, name: &str, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => {
            println!("criterion {criterion} ({name}): PASS {detail}");
        }
        Err(why) => {
            println!("criterion {criterion} ({name}): FAIL {why}");
            panic!("criterion {criterion} ({name}) failed: {why}");
        }
    }
}

#[test]
fn criterion_01_exact_stokes_decay() {
    let started = Instant::now();
    let outcome = (|| {
        let sys = GalerkinSystem::new(&torus4(), 1, 0.1).map_err(|e| e.to_string())?;
        let u0 = SpectralField::single_mode(sys.domain(), 1, 1.0).map_err(|e| e.to_string())?;
        let params = EvolveParams {
            t_end: 1.0,
            dt: 1e-3,
            scheme: Scheme::Rk4,
            sample_every: 100,
        };
        let (rec, _) = sys.evolve(&u0, &params).map_err(|e| e.to_string())?;
        let got = rec.l2_sq.last().unwrap() / rec.l2_sq[0];
        let want = (-0.2f64).exp();
        let rel = (got - want).abs() / want;
        if rel > 1e-8 {
            return Err(format!("decay ratio {got} vs e^-0.2, relative error {rel:e}"));
        }
        let elapsed = started.elapsed().as_secs_f64();
        if elapsed >= 5.0 {
            return Err(format!("runtime {elapsed:.2}s exceeds 5s"));
        }
        Ok(format!("(relative error {rel:.2e}, {elapsed:.2}s)"))
    })();
    report(1, "exact Stokes decay", outcome);
}

#[test]
fn criterion_02_taylor_green_regression() {
    let outcome = (|| {
        let domain = BoxDomain::unit_torus(2).unwrap();
        let sys = GalerkinSystem::new(&domain, 4, 0.1).map_err(|e| e.to_string())?;
        let u0 = SpectralField::taylor_green(&domain, 4, 1.0).map_err(|e| e.to_string())?;

        // field-level comparison at the 10 sample times t = 0.1 .. 1.0
        let mut u = sys.project_initial(&u0).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for i in 1..=10 {
            let params = EvolveParams {
                t_end: 0.1,
                dt: 0.01,
                scheme: Scheme::Rk4,
                sample_every: 10,
            };
            let (_, next) = sys.evolve(&u, &params).map_err(|e| e.to_string())?;
            u = next;
            let t = 0.1 * i as f64;
            let exact = u0.scaled((-0.2 * t).exp());
            let rel = u.l2_distance(&exact) / exact.l2_norm();
            worst = worst.max(rel);
        }
        if worst > 1e-6 {
            return Err(format!("L2 mismatch {worst:e} above 1e-6"));
        }

        // fitted decay rate from a single recorded run
        let params = EvolveParams {
            t_end: 1.0,
            dt: 0.01,
            scheme: Scheme::Rk4,
            sample_every: 10,
        };
        let (rec, _) = sys.evolve(&u0, &params).map_err(|e| e.to_string())?;
        let decay = verify_decay(&rec, &sys, 1e-6).map_err(|e| e.to_string())?;
        let fitted = decay.fitted_rate.ok_or("no fitted rate")?;
        if (fitted - 0.4).abs() > 1e-4 {
            return Err(format!("fitted rate {fitted} outside 0.4 +- 1e-4"));
        }
        Ok(format!("(max L2 error {worst:.2e}, fitted rate {fitted:.6})"))
    })();
    report(2, "Taylor-Green regression", outcome);
}

#[test]
fn criterion_03_energy_residual_halving() {
    let outcome = (|| {
        let sys = GalerkinSystem::new(&torus4(), 2, 1.0).map_err(|e| e.to_string())?;
        let mut u0 =
            SpectralField::random_seeded(sys.domain(), 2, 77, 1.0).map_err(|e| e.to_string())?;
        u0.rescale_to_v_norm(0.3).map_err(|e| e.to_string())?;
        let run = |dt: f64| -> Result<f64, String> {
            let params = EvolveParams {
                t_end: 0.16,
                dt,
                scheme: Scheme::Rk4,
                sample_every: 1,
            };
            let (rec, _) = sys.evolve(&u0, &params).map_err(|e| e.to_string())?;
            Ok(rec.max_energy_residual())
        };
        let r1 = run(0.02)?;
        let r2 = run(0.01)?;
        let factor = r1 / r2;
        if !(12.8..=19.2).contains(&factor) {
            return Err(format!("halving factor {factor} outside 16 +- 20%"));
        }
        Ok(format!("(residual {r1:.2e} -> {r2:.2e}, factor {factor:.2})"))
    })();
    report(3, "discrete energy identity residual", outcome);
}

#[test]
fn criterion_04_trilinear_identities() {
    let started = Instant::now();
    let outcome = (|| {
        let domain = torus4();
        let mut max_skew = 0.0f64;
        let mut max_delta = 0.0f64;
        let mut max_ratio = 0.0f64;
        for i in 0..500u64 {
            let u = SpectralField::random_seeded(&domain, 2, 3 * i, 1.0)
                .map_err(|e| e.to_string())?;
            let v = SpectralField::random_seeded(&domain, 2, 3 * i + 1, 1.0)
                .map_err(|e| e.to_string())?;
            let w = SpectralField::random_seeded(&domain, 2, 3 * i + 2, 1.0)
                .map_err(|e| e.to_string())?;

            let skew = b_form(&u, &v, &v, BFormMethod::Convolution)
                .map_err(|e| e.to_string())?
                .abs();
            let skew_scale = u.v_norm() * v.v_norm() * v.v_norm();
            if skew > 1e-12 * skew_scale {
                return Err(format!("trial {i}: |b(u,v,v)| = {skew:e} above 1e-12 scale"));
            }
            max_skew = max_skew.max(skew / skew_scale);

            let bc = b_form(&u, &v, &w, BFormMethod::Convolution).map_err(|e| e.to_string())?;
            let bq = b_form(&u, &v, &w, BFormMethod::Quadrature).map_err(|e| e.to_string())?;
            let delta = (bc - bq).abs() / bc.abs().max(1.0);
            if delta > 1e-10 {
                return Err(format!("trial {i}: dual-path delta {delta:e} above 1e-10"));
            }
            max_delta = max_delta.max(delta);

            let ratio = bc.abs() / (9.0 * u.v_norm() * v.v_norm() * w.v_norm());
            if ratio > 1.0 {
                return Err(format!("trial {i}: trilinear ratio {ratio} above 1"));
            }
            max_ratio = max_ratio.max(ratio);
        }
        let elapsed = started.elapsed().as_secs_f64();
        if elapsed >= 120.0 {
            return Err(format!("runtime {elapsed:.1}s exceeds 2 min"));
        }
        Ok(format!(
            "(500 triples: max skew {max_skew:.2e}, max dual-path {max_delta:.2e}, max ratio {max_ratio:.2e}, {elapsed:.1}s)"
        ))
    })();
    report(4, "trilinear identities", outcome);
}

#[test]
fn criterion_05_decay_envelopes_on_certified_data() {
    let started = Instant::now();
    let outcome = (|| {
        let sys = GalerkinSystem::new(&torus4(), 2, 1.0).map_err(|e| e.to_string())?;
        let params = EvolveParams {
            t_end: 2.0,
            dt: sys.default_dt(),
            scheme: Scheme::Rk4,
            sample_every: 1,
        };
        let mut worst_excess = 0.0f64;
        for seed in 0..20u64 {
            let mut u0 = SpectralField::random_seeded(sys.domain(), 2, 100 + seed, 1.0)
                .map_err(|e| e.to_string())?;
            u0.rescale_to_v_norm(0.05).map_err(|e| e.to_string())?;
            let cert =
                check_existence_condition(sys.nu(), &u0, 3.0).map_err(|e| e.to_string())?;
            if !cert.holds || cert.margin < 0.1 * sys.nu() {
                return Err(format!(
                    "seed {seed}: certificate margin {} below 0.1 nu",
                    cert.margin
                ));
            }
            let (rec, _) = sys.evolve(&u0, &params).map_err(|e| e.to_string())?;
            let decay = verify_decay(&rec, &sys, 1e-6).map_err(|e| e.to_string())?;
            if !decay.envelope_ok || !decay.envelope_v_ok {
                return Err(format!(
                    "seed {seed}: envelope excess {:e} / {:e} above 1e-6",
                    decay.max_envelope_excess, decay.max_envelope_excess_v
                ));
            }
            worst_excess = worst_excess
                .max(decay.max_envelope_excess)
                .max(decay.max_envelope_excess_v);
        }
        let elapsed = started.elapsed().as_secs_f64();
        if elapsed >= 180.0 {
            return Err(format!("runtime {elapsed:.1}s exceeds 3 min"));
        }
        Ok(format!(
            "(20 certified runs, worst envelope excess {worst_excess:.2e}, {elapsed:.1}s)"
        ))
    })();
    report(5, "decay envelopes on certified data", outcome);
}

#[test]
fn criterion_06_uniqueness_contraction() {
    let outcome = (|| {
        let sys = GalerkinSystem::new(&torus4(), 2, 1.0).map_err(|e| e.to_string())?;
        let params = EvolveParams {
            t_end: 1.0,
            dt: sys.default_dt(),
            scheme: Scheme::Rk4,
            sample_every: 1,
        };
        let mut worst_increase = 0.0f64;
        for pair in 0..10u64 {
            let mut u1 = SpectralField::random_seeded(sys.domain(), 2, 200 + 2 * pair, 1.0)
                .map_err(|e| e.to_string())?;
            let mut u2 = SpectralField::random_seeded(sys.domain(), 2, 201 + 2 * pair, 1.0)
                .map_err(|e| e.to_string())?;
            u1.rescale_to_v_norm(0.05).map_err(|e| e.to_string())?;
            u2.rescale_to_v_norm(0.05).map_err(|e| e.to_string())?;
            let rep = perturbation_experiment(&sys, &u1, &u2, &params, 1e-10)
                .map_err(|e| e.to_string())?;
            if !rep.nonincreasing {
                return Err(format!(
                    "pair {pair}: separation increased by {:e}",
                    rep.max_step_increase
                ));
            }
            if !rep.hypothesis_held {
                return Err(format!("pair {pair}: smallness hypothesis lost along the flow"));
            }
            worst_increase = worst_increase.max(rep.max_step_increase);
        }
        // identical data stays identically zero
        let u = {
            let mut u = SpectralField::random_seeded(sys.domain(), 2, 999, 1.0)
                .map_err(|e| e.to_string())?;
            u.rescale_to_v_norm(0.05).map_err(|e| e.to_string())?;
            u
        };
        let rep =
            perturbation_experiment(&sys, &u, &u, &params, 1e-10).map_err(|e| e.to_string())?;
        if !rep.identical_data || rep.w.iter().any(|&x| x != 0.0) {
            return Err("identical initial data produced a nonzero difference".into());
        }
        Ok(format!(
            "(10 certified pairs, worst step increase {worst_increase:.1e}; identical pair exactly zero)"
        ))
    })();
    report(6, "uniqueness contraction", outcome);
}

#[test]
fn criterion_07_time_derivative_estimates() {
    let outcome = (|| {
        let sys = GalerkinSystem::new(&torus4(), 2, 1.0).map_err(|e| e.to_string())?;
        let params = EvolveParams {
            t_end: 2.0,
            dt: sys.default_dt(),
            scheme: Scheme::Rk4,
            sample_every: 1,
        };
        let mut worst = 0.0f64;
        for seed in 0..10u64 {
            let mut u0 = SpectralField::random_seeded(sys.domain(), 2, 300 + seed, 1.0)
                .map_err(|e| e.to_string())?;
            u0.rescale_to_v_norm(0.05).map_err(|e| e.to_string())?;
            let cert =
                check_existence_condition(sys.nu(), &u0, 3.0).map_err(|e| e.to_string())?;
            if !cert.holds {
                return Err(format!("seed {seed}: data not certified"));
            }
            let (rec, _) = sys.evolve(&u0, &params).map_err(|e| e.to_string())?;
            let rep = ut_estimates(&rec, &sys, &u0, 1e-6).map_err(|e| e.to_string())?;
            if !rep.integral_bound_ok {
                return Err(format!(
                    "seed {seed}: integral estimate excess {:e} above 1e-6",
                    rep.max_integral_excess
                ));
            }
            if !rep.initial_bound_ok {
                return Err(format!(
                    "seed {seed}: initial triangle bound violated by {:e}",
                    -rep.initial_bound_margin
                ));
            }
            worst = worst.max(rep.max_integral_excess);
            // explicit form of the initial bound, pinned at 1e-12
            let rhs0 = sys.rhs(&sys.project_initial(&u0).unwrap()).unwrap();
            let bound = sys.nu() * u0.a_norm() + apply_b(&u0).l2_norm() + 1e-12;
            if rhs0.l2_norm() > bound {
                return Err(format!("seed {seed}: |rhs(u0)| exceeds nu|Au0| + |Bu0| + 1e-12"));
            }
        }
        Ok(format!("(10 certified runs, worst integral excess {worst:.2e})"))
    })();
    report(7, "time-derivative estimates", outcome);
}

#[test]
fn criterion_08_stokes_regularity_shift() {
    let outcome = (|| {
        let domain = torus4();
        let nu = 0.7;
        let mut max_inv = 0.0f64;
        let mut max_shift = 0.0f64;
        for seed in 0..100u64 {
            let f = SpectralField::random_seeded(&domain, 3, 400 + seed, 1.0)
                .map_err(|e| e.to_string())?;
            let u = stokes_solve(&f, nu).map_err(|e| e.to_string())?;
            let residual = apply_a(&u, nu).l2_distance(&f) / f.l2_norm();
            if residual > 1e-12 {
                return Err(format!("seed {seed}: inverse residual {residual:e} above 1e-12"));
            }
            max_inv = max_inv.max(residual);
            for m in 0..=1 {
                let lhs = u.h_sq(m + 2).sqrt();
                let rhs = f.h_sq(m).sqrt() / nu;
                let err = (lhs - rhs).abs() / rhs;
                if err > 1e-12 {
                    return Err(format!(
                        "seed {seed}: norm shift (m = {m}) off by {err:e} above 1e-12"
                    ));
                }
                max_shift = max_shift.max(err);
            }
        }
        Ok(format!(
            "(100 forcings: max inverse residual {max_inv:.2e}, max shift error {max_shift:.2e})"
        ))
    })();
    report(8, "Stokes regularity shift", outcome);
}

#[test]
fn criterion_09_c1_estimator() {
    let outcome = (|| {
        let domain = BoxDomain::new(
            &[std::f64::consts::PI; 4],
            nsbox_core::Flavor::Freeslip,
        )
        .unwrap();
        let params = C1Params {
            iterations: 100,
            restarts: 6,
            seed: 42,
        };
        let est = estimate_c1(&domain, 3, &params).map_err(|e| e.to_string())?;
        if est.by_cutoff.len() != 3 {
            return Err("expected three cutoff levels".into());
        }
        for w in est.by_cutoff.windows(2) {
            if w[1].1 < w[0].1 {
                return Err(format!("not monotone: {:?}", est.by_cutoff));
            }
        }
        for &(c, v) in &est.by_cutoff {
            if v > 3.0 {
                return Err(format!("cutoff {c}: ratio {v} exceeds the proved constant 3"));
            }
        }
        let again = estimate_c1(&domain, 3, &params).map_err(|e| e.to_string())?;
        if again.value.to_bits() != est.value.to_bits() || again.by_cutoff != est.by_cutoff {
            return Err("estimator not deterministic for a fixed seed".into());
        }
        Ok(format!("(lower bounds {:?}, all <= 3, deterministic)", est.by_cutoff))
    })();
    report(9, "embedding constant estimator", outcome);
}

#[test]
fn criterion_10_byte_identical_reproducibility() {
    let outcome = (|| {
        let bin = env!("CARGO_BIN_EXE_nsbox");
        let dir = std::env::temp_dir().join(format!("nsbox-accept-10-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let config = dir.join("run.json");
        std::fs::write(
            &config,
            r#"{
  "sides": [6.283185307179586, 6.283185307179586, 6.283185307179586, 6.283185307179586],
  "flavor": "periodic",
  "cutoff": 2,
  "nu": 1.0,
  "initial": "random",
  "seed": 11,
  "target_vnorm": 0.05,
  "t_end": 1.0,
  "sample_every": 2
}
"#,
        )
        .map_err(|e| e.to_string())?;

        let mut compared = 0usize;
        for sub in ["simulate", "verify-decay", "certify"] {
            let out_a = dir.join(format!("{sub}-a"));
            let out_b = dir.join(format!("{sub}-b"));
            for out in [&out_a, &out_b] {
                let status = Command::new(bin)
                    .args([
                        sub,
                        "--config",
                        config.to_str().unwrap(),
                        "--out",
                        out.to_str().unwrap(),
                    ])
                    .output()
                    .map_err(|e| e.to_string())?;
                if !status.status.success() {
                    return Err(format!(
                        "{sub} failed: {}",
                        String::from_utf8_lossy(&status.stderr)
                    ));
                }
            }
            let mut names: Vec<PathBuf> = std::fs::read_dir(&out_a)
                .map_err(|e| e.to_string())?
                .map(|e| e.unwrap().path())
                .collect();
            names.sort();
            if names.is_empty() {
                return Err(format!("{sub} produced no artifacts"));
            }
            for path in names {
                let name = path.file_name().unwrap();
                let a = std::fs::read(&path).map_err(|e| e.to_string())?;
                let b = std::fs::read(out_b.join(name)).map_err(|e| e.to_string())?;
                if a != b {
                    return Err(format!(
                        "{sub}: {} differs between identical invocations",
                        name.to_string_lossy()
                    ));
                }
                compared += 1;
            }
        }
        Ok(format!("({compared} artifacts byte-identical across reruns)"))
    })();
    report(10, "byte-identical reproducibility", outcome);
}
