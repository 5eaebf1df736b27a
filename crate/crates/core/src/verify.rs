//! Verification of the a-priori estimates on computed trajectories:
//! Steklov/Poincare ratios, exponential decay envelopes, the uniqueness
//! contraction, and the time-derivative estimates.
//!
//! Decay is checked against two rates: `chi`, the Steklov sum of the
//! bounding box (the continuum rate), and `lambda_min`, the smallest
//! retained eigenvalue (the provable rate of the truncated system). The
//! envelope is asserted at `2 nu min(chi, lambda_min)` for the energy and
//! `nu min(chi, lambda_min)` for the V-seminorm; both values are reported.

use serde::Serialize;

use crate::domain::BoxDomain;
use crate::error::{CoreError, Result};
use crate::field::SpectralField;
use crate::solver::{EvolveParams, GalerkinSystem, TrajectoryRecord};

/// The Steklov sum `chi` of the domain. Same value as
/// [`BoxDomain::chi`]; kept as a free function alongside the other checks.
pub fn chi(domain: &BoxDomain) -> f64 {
    domain.chi()
}

/// Rayleigh ratio `|v_x|^2 / |v|^2` of a sine series
/// `v = sum_n c_n sin(n pi x / L)` on `(0, L)`.
///
/// Always at least `pi^2 / L^2`, with equality exactly on the first
/// eigenfunction.
pub fn steklov_check(profile: &[f64], length: f64) -> Result<f64> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(CoreError::InvalidDomain(format!(
            "profile interval length must be positive, got {length}"
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &c) in profile.iter().enumerate() {
        let n = (i + 1) as f64;
        let freq = n * std::f64::consts::PI / length;
        den += c * c;
        num += freq * freq * c * c;
    }
    if den == 0.0 {
        return Err(CoreError::ZeroProfile);
    }
    Ok(num / den)
}

/// Decay-envelope verdict for one trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub chi: f64,
    pub lambda_min: f64,
    /// `2 nu min(chi, lambda_min)`: the asserted energy decay rate.
    pub guaranteed_rate: f64,
    /// `nu min(chi, lambda_min)`: the asserted V-seminorm decay rate.
    pub guaranteed_rate_v: f64,
    /// Least-squares slope of `log l2_sq` over the tail window
    /// `t in [0.1 T, T]`; `None` for an identically zero trajectory.
    pub fitted_rate: Option<f64>,
    pub envelope_ok: bool,
    pub envelope_v_ok: bool,
    /// Largest ratio `l2_sq(t) / (l2_sq(0) exp(-rate t))` minus one.
    pub max_envelope_excess: f64,
    pub max_envelope_excess_v: f64,
    pub tolerance: f64,
    pub zero_trajectory: bool,
}

/// Check both decay envelopes and fit the observed energy rate.
pub fn verify_decay(
    traj: &TrajectoryRecord,
    system: &GalerkinSystem,
    tol: f64,
) -> Result<DecayReport> {
    if traj.len() < 2 {
        return Err(CoreError::InvalidDomain(
            "trajectory needs at least two samples".into(),
        ));
    }
    if traj.l2_sq.iter().any(|&e| !(e >= 0.0) || !e.is_finite()) {
        return Err(CoreError::NonFinite("trajectory energies".into()));
    }
    let chi_v = system.chi();
    let lambda_min = system.lambda_min();
    let rate = 2.0 * system.nu() * chi_v.min(lambda_min);
    let rate_v = system.nu() * chi_v.min(lambda_min);

    let e0 = traj.l2_sq[0];
    let v0 = traj.v_sq[0];
    let zero_trajectory = e0 == 0.0;

    let mut excess = 0.0f64;
    let mut excess_v = 0.0f64;
    if !zero_trajectory {
        for (i, &t) in traj.times.iter().enumerate() {
            let bound = e0 * (-rate * t).exp();
            excess = excess.max(traj.l2_sq[i] / bound - 1.0);
            let bound_v = v0 * (-rate_v * t).exp();
            if bound_v > 0.0 {
                excess_v = excess_v.max(traj.v_sq[i] / bound_v - 1.0);
            }
        }
    }

    let fitted_rate = if zero_trajectory {
        None
    } else {
        let t_end = *traj.times.last().unwrap();
        let window_start = 0.1 * t_end;
        let pts: Vec<(f64, f64)> = traj
            .times
            .iter()
            .zip(&traj.l2_sq)
            .filter(|&(&t, &e)| t >= window_start && e > 0.0)
            .map(|(&t, &e)| (t, e.ln()))
            .collect();
        fit_slope(&pts).map(|s| -s)
    };

    Ok(DecayReport {
        chi: chi_v,
        lambda_min,
        guaranteed_rate: rate,
        guaranteed_rate_v: rate_v,
        fitted_rate,
        envelope_ok: excess <= tol,
        envelope_v_ok: excess_v <= tol,
        max_envelope_excess: excess,
        max_envelope_excess_v: excess_v,
        tolerance: tol,
        zero_trajectory,
    })
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Result of evolving two initial states and tracking their separation.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub times: Vec<f64>,
    /// `|u1 - u2|^2` at samples.
    pub w: Vec<f64>,
    pub nonincreasing: bool,
    /// Largest per-step increase of `w` (0 when monotone).
    pub max_step_increase: f64,
    /// Whether `nu - 9 |u2|_V > 0` held at every sample.
    pub hypothesis_held: bool,
    /// Smallest observed margin `nu - 9 |u2|_V`.
    pub min_hypothesis_margin: f64,
    pub identical_data: bool,
    pub tolerance: f64,
}

/// Evolve `u1_0` and `u2_0` side by side and check that the squared
/// separation is nonincreasing. The smallness hypothesis on the second
/// trajectory is recorded, not asserted: a violated hypothesis voids the
/// guarantee rather than failing the experiment.
pub fn perturbation_experiment(
    system: &GalerkinSystem,
    u1_0: &SpectralField,
    u2_0: &SpectralField,
    params: &EvolveParams,
    tolerance: f64,
) -> Result<ContractionReport> {
    let mut u1 = system.project_initial(u1_0)?;
    let mut u2 = system.project_initial(u2_0)?;
    let identical_data = u1.l2_distance(&u2) == 0.0;

    let dt = params.dt;
    let ratio = params.t_end / dt;
    let n_steps = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    }
    .max(1);
    let sample_every = params.sample_every.max(1);

    let mut times = vec![0.0];
    let mut w = vec![u1.l2_distance(&u2).powi(2)];
    let mut margin = system.nu() - 9.0 * u2.v_norm();
    let mut min_margin = margin;

    for step_idx in 0..n_steps {
        let this_dt = if step_idx + 1 == n_steps {
            params.t_end - dt * step_idx as f64
        } else {
            dt
        };
        u1 = system.step(&u1, this_dt, params.scheme)?;
        u2 = system.step(&u2, this_dt, params.scheme)?;
        if !u1.is_finite() || !u2.is_finite() {
            return Err(CoreError::NonFinite(format!(
                "perturbation pair after step {step_idx}"
            )));
        }
        let is_last = step_idx + 1 == n_steps;
        if (step_idx + 1) % sample_every == 0 || is_last {
            let t = if is_last {
                params.t_end
            } else {
                dt * (step_idx + 1) as f64
            };
            times.push(t);
            w.push(u1.l2_distance(&u2).powi(2));
            margin = system.nu() - 9.0 * u2.v_norm();
            min_margin = min_margin.min(margin);
        }
    }

    let mut max_inc = 0.0f64;
    for pair in w.windows(2) {
        max_inc = max_inc.max(pair[1] - pair[0]);
    }
    Ok(ContractionReport {
        times,
        w,
        nonincreasing: max_inc <= tolerance,
        max_step_increase: max_inc,
        hypothesis_held: min_margin > 0.0,
        min_hypothesis_margin: min_margin,
        identical_data,
        tolerance,
    })
}

/// Verdict on the time-derivative estimates along a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct UtReport {
    /// `|u_t|^2(t) + int_0^t nu |u_t|_V^2` at each sample (trapezoid).
    pub lhs: Vec<f64>,
    /// `|u_t|^2(0)`.
    pub ut_sq_initial: f64,
    pub integral_bound_ok: bool,
    pub max_integral_excess: f64,
    /// `|rhs(u0)| <= nu a_norm(u0) + |B(u0)|` margin (nonnegative when the
    /// triangle bound holds).
    pub initial_bound_margin: f64,
    pub initial_bound_ok: bool,
    pub tolerance: f64,
}

/// Check `|u_t|^2(t) + int_0^t nu |u_t|_V^2 <= |u_t|^2(0) (1 + tol)` with
/// a trapezoid integral, plus the triangle bound on `|u_t|(0)`.
pub fn ut_estimates(
    traj: &TrajectoryRecord,
    system: &GalerkinSystem,
    u0: &SpectralField,
    tol: f64,
) -> Result<UtReport> {
    if traj.len() < 2 {
        return Err(CoreError::InvalidDomain(
            "trajectory needs at least two samples".into(),
        ));
    }
    let ut0 = traj.ut_sq[0];
    let mut lhs = Vec::with_capacity(traj.len());
    let mut integral = 0.0;
    let mut max_excess: f64 = 0.0;
    lhs.push(ut0);
    for i in 1..traj.len() {
        let dt = traj.times[i] - traj.times[i - 1];
        integral += 0.5 * dt * system.nu() * (traj.ut_v_sq[i] + traj.ut_v_sq[i - 1]);
        let v = traj.ut_sq[i] + integral;
        lhs.push(v);
        if ut0 > 0.0 {
            max_excess = max_excess.max(v / ut0 - 1.0);
        } else {
            max_excess = max_excess.max(v);
        }
    }

    let u0p = system.project_initial(u0)?;
    let rhs0 = system.rhs(&u0p)?;
    let bu0 = crate::ops::apply_b(&u0p);
    let bound = system.nu() * u0p.a_norm() + bu0.l2_norm();
    let margin = bound + 1e-12 - rhs0.l2_norm();

    Ok(UtReport {
        lhs,
        ut_sq_initial: ut0,
        integral_bound_ok: max_excess <= tol,
        max_integral_excess: max_excess,
        initial_bound_margin: margin,
        initial_bound_ok: margin >= 0.0,
        tolerance: tol,
    })
}
