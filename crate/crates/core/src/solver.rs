//! Time integration of the truncated system `u' = -A u - B(u)` with the
//! energy bookkeeping the verification layer consumes.
//!
//! Schemes: classical RK4 (explicit, linear stability `dt nu kappa_max <=
//! 2.785`), IMEX Euler (backward Euler on `A`, forward on `B`,
//! unconditionally stable in the linear part), and ETD2RK (exact linear
//! propagation, second order in the nonlinearity). Divergence-freeness is
//! preserved exactly by construction: `A` acts modewise along the
//! amplitude and `B` is Leray-projected.
//!
//! Per step the recorder evaluates the energy balance residual
//!
//! `r_n = (E_{n+1} - E_n)/dt + 2 nu * Simpson(|u|_V^2)`
//!
//! with the Simpson midpoint supplied by an auxiliary half step of the same
//! scheme. The exact flow satisfies `dE/dt = -2 nu |u|_V^2` identically
//! (the nonlinear term is energy-neutral), so `r_n` decays at the scheme's
//! own order: `dt^4` for RK4, `dt^2` for ETD2RK, `dt` for IMEX Euler. A
//! plain midpoint evaluation would cap the observable rate at `dt^2`, which
//! is why the quadrature is Simpson.

use std::io::Write;
use std::sync::Arc;

use crate::domain::BoxDomain;
use crate::error::{CoreError, Result};
use crate::field::SpectralField;
use crate::modes::{enumerate_modes, spectral_gap, ModeIndex};
use crate::ops::{apply_a, apply_b};

/// Real-axis stability limit of classical RK4.
pub const RK4_STABILITY_LIMIT: f64 = 2.785;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    ImexEuler,
    EtdRk2,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Rk4 => "rk4",
            Scheme::ImexEuler => "imex_euler",
            Scheme::EtdRk2 => "etd_rk2",
        }
    }

    /// Formal order of accuracy; the energy-residual halving factor is
    /// `2^order`.
    pub fn order(&self) -> u32 {
        match self {
            Scheme::Rk4 => 4,
            Scheme::ImexEuler => 1,
            Scheme::EtdRk2 => 2,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "imex_euler" => Ok(Scheme::ImexEuler),
            "etd_rk2" => Ok(Scheme::EtdRk2),
            other => Err(CoreError::InvalidDomain(format!(
                "unknown scheme '{other}' (rk4 | imex_euler | etd_rk2)"
            ))),
        }
    }
}

/// The truncated system: domain, cutoff, viscosity and mode list.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    domain: BoxDomain,
    cutoff: usize,
    nu: f64,
    modes: Arc<Vec<ModeIndex>>,
}

impl GalerkinSystem {
    pub fn new(domain: &BoxDomain, cutoff: usize, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(CoreError::InvalidViscosity(nu));
        }
        let modes = Arc::new(enumerate_modes(domain, cutoff)?);
        Ok(Self {
            domain: domain.clone(),
            cutoff,
            nu,
            modes,
        })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn kappa_max(&self) -> f64 {
        self.modes.iter().map(|m| m.kappa()).fold(0.0, f64::max)
    }

    pub fn lambda_min(&self) -> f64 {
        spectral_gap(&self.modes)
    }

    pub fn chi(&self) -> f64 {
        self.domain.chi()
    }

    pub fn zero_field(&self) -> SpectralField {
        SpectralField::zero_with_modes(&self.domain, self.cutoff, Arc::clone(&self.modes))
    }

    /// Largest stable `dt` for the scheme's linear part; unbounded for the
    /// implicit/exponential schemes.
    pub fn stability_bound(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::Rk4 => RK4_STABILITY_LIMIT / (self.nu * self.kappa_max()),
            Scheme::ImexEuler | Scheme::EtdRk2 => f64::INFINITY,
        }
    }

    /// Default step: a quarter of the RK4 linear stability bound. Used for
    /// every scheme as an accuracy-driven default.
    pub fn default_dt(&self) -> f64 {
        RK4_STABILITY_LIMIT / (self.nu * self.kappa_max()) / 4.0
    }

    fn check_dt(&self, dt: f64, scheme: Scheme) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CoreError::InvalidTimeStep(dt));
        }
        let bound = self.stability_bound(scheme);
        if dt > bound * (1.0 + 1e-12) {
            return Err(CoreError::UnstableTimeStep {
                dt,
                bound,
                limit: RK4_STABILITY_LIMIT,
                scheme: scheme.name(),
            });
        }
        Ok(())
    }

    /// Project initial data into the truncation: spectral restriction onto
    /// the retained modes plus Leray projection (these coincide with the
    /// orthogonal projection in this eigenbasis).
    pub fn project_initial(&self, u0: &SpectralField) -> Result<SpectralField> {
        if u0.domain() != &self.domain {
            return Err(CoreError::DomainMismatch(
                "initial data domain differs from the system domain".into(),
            ));
        }
        let mut u = if u0.cutoff() == self.cutoff {
            u0.clone()
        } else {
            u0.retruncate(self.cutoff)?
        };
        u.project();
        Ok(u)
    }

    /// Right-hand side `-A u - B(u)`.
    ///
    /// Pairing with `u` recovers the differential energy identity:
    /// `<rhs(u), u> = -nu |u|_V^2` exactly, since `<B(u), u> = 0`.
    pub fn rhs(&self, u: &SpectralField) -> Result<SpectralField> {
        if u.domain() != &self.domain || u.cutoff() != self.cutoff {
            return Err(CoreError::DomainMismatch(
                "field truncation differs from the system".into(),
            ));
        }
        let mut out = apply_b(u);
        out.scale(-1.0);
        out.add_scaled(-self.nu, &apply_a(u, 1.0));
        Ok(out)
    }

    /// One step of the chosen scheme.
    pub fn step(&self, u: &SpectralField, dt: f64, scheme: Scheme) -> Result<SpectralField> {
        self.check_dt(dt, scheme)?;
        self.step_unchecked(u, dt, scheme)
    }

    fn step_unchecked(&self, u: &SpectralField, dt: f64, scheme: Scheme) -> Result<SpectralField> {
        match scheme {
            Scheme::Rk4 => {
                let k1 = self.rhs(u)?;
                let mut stage = u.clone();
                stage.add_scaled(0.5 * dt, &k1);
                let k2 = self.rhs(&stage)?;
                stage = u.clone();
                stage.add_scaled(0.5 * dt, &k2);
                let k3 = self.rhs(&stage)?;
                stage = u.clone();
                stage.add_scaled(dt, &k3);
                let k4 = self.rhs(&stage)?;
                let mut out = u.clone();
                out.add_scaled(dt / 6.0, &k1);
                out.add_scaled(dt / 3.0, &k2);
                out.add_scaled(dt / 3.0, &k3);
                out.add_scaled(dt / 6.0, &k4);
                Ok(out)
            }
            Scheme::ImexEuler => {
                // (1 + dt nu kappa) u_{n+1} = u_n - dt B(u_n)
                let mut out = u.clone();
                out.add_scaled(-dt, &apply_b(u));
                out.mode_scale(|kappa| 1.0 / (1.0 + dt * self.nu * kappa));
                Ok(out)
            }
            Scheme::EtdRk2 => {
                // Cox-Matthews ETD2RK with the diagonal linear part
                let nu = self.nu;
                let n0 = {
                    let mut b = apply_b(u);
                    b.scale(-1.0);
                    b
                };
                let mut a = u.clone();
                a.mode_scale(|kappa| (-nu * kappa * dt).exp());
                let mut n0_prop = n0.clone();
                n0_prop.mode_scale(|kappa| dt * phi1(-nu * kappa * dt));
                a.add_scaled(1.0, &n0_prop);

                let na = {
                    let mut b = apply_b(&a);
                    b.scale(-1.0);
                    b
                };
                let mut corr = na.minus(&n0);
                corr.mode_scale(|kappa| dt * phi2(-nu * kappa * dt));
                let mut out = a;
                out.add_scaled(1.0, &corr);
                Ok(out)
            }
        }
    }
}

/// `(exp(z) - 1) / z`, series near zero.
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `(exp(z) - 1 - z) / z^2`, series near zero.
fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// Sampled norms and per-step energy residuals along a run.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub l2_sq: Vec<f64>,
    pub v_sq: Vec<f64>,
    pub a_sq: Vec<f64>,
    /// `|u_t|^2 = |rhs(u)|^2` at samples.
    pub ut_sq: Vec<f64>,
    /// `|u_t|_V^2` at samples; consumed by the time-derivative estimate
    /// check, not exported to CSV.
    pub ut_v_sq: Vec<f64>,
    /// Largest-magnitude per-step residual within each sampling window;
    /// zero for the initial sample.
    pub energy_residuals: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_energy_residual(&self) -> f64 {
        self.energy_residuals
            .iter()
            .fold(0.0f64, |a, r| a.max(r.abs()))
    }

    /// CSV export: header `t,l2_sq,v_sq,a_sq,ut_sq,energy_residual`, one
    /// row per sample, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,l2_sq,v_sq,a_sq,ut_sq,energy_residual")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i],
                self.l2_sq[i],
                self.v_sq[i],
                self.a_sq[i],
                self.ut_sq[i],
                self.energy_residuals[i],
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("vec write cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

/// Evolution parameters for [`GalerkinSystem::evolve`].
#[derive(Debug, Clone, Copy)]
pub struct EvolveParams {
    pub t_end: f64,
    pub dt: f64,
    pub scheme: Scheme,
    /// Record a sample every this many steps (the initial state and the
    /// final state are always recorded).
    pub sample_every: usize,
}

impl GalerkinSystem {
    /// Integrate from `u0` (projected into the truncation first) and record
    /// sampled norms plus per-step energy residuals.
    pub fn evolve(
        &self,
        u0: &SpectralField,
        params: &EvolveParams,
    ) -> Result<(TrajectoryRecord, SpectralField)> {
        if !(params.t_end > 0.0 && params.t_end.is_finite()) {
            return Err(CoreError::InvalidTimeStep(params.t_end));
        }
        self.check_dt(params.dt, params.scheme)?;
        let sample_every = params.sample_every.max(1);

        let mut u = self.project_initial(u0)?;
        let dt = params.dt;
        let ratio = params.t_end / dt;
        let n_steps = if (ratio - ratio.round()).abs() < 1e-9 {
            ratio.round() as usize
        } else {
            ratio.ceil() as usize
        }
        .max(1);

        let mut rec = TrajectoryRecord {
            times: Vec::new(),
            l2_sq: Vec::new(),
            v_sq: Vec::new(),
            a_sq: Vec::new(),
            ut_sq: Vec::new(),
            ut_v_sq: Vec::new(),
            energy_residuals: Vec::new(),
        };

        let sample = |rec: &mut TrajectoryRecord,
                          t: f64,
                          u: &SpectralField,
                          residual: f64|
         -> Result<()> {
            let ut = self.rhs(u)?;
            rec.times.push(t);
            rec.l2_sq.push(u.l2_sq());
            rec.v_sq.push(u.v_sq());
            rec.a_sq.push(u.a_sq());
            rec.ut_sq.push(ut.l2_sq());
            rec.ut_v_sq.push(ut.v_sq());
            rec.energy_residuals.push(residual);
            Ok(())
        };

        sample(&mut rec, 0.0, &u, 0.0)?;
        let mut window_residual = 0.0f64;

        for step_idx in 0..n_steps {
            let this_dt = if step_idx + 1 == n_steps {
                params.t_end - dt * step_idx as f64
            } else {
                dt
            };
            let e0 = u.l2_sq();
            let v0 = u.v_sq();
            let half = self.step_unchecked(&u, 0.5 * this_dt, params.scheme)?;
            let next = self.step_unchecked(&u, this_dt, params.scheme)?;
            if !next.is_finite() {
                return Err(CoreError::NonFinite(format!(
                    "state after step {step_idx} (t = {})",
                    dt * step_idx as f64
                )));
            }
            let e1 = next.l2_sq();
            let dissipation = (v0 + 4.0 * half.v_sq() + next.v_sq()) / 6.0;
            let r = (e1 - e0) / this_dt + 2.0 * self.nu * dissipation;
            if r.abs() > window_residual.abs() {
                window_residual = r;
            }
            u = next;

            let is_last = step_idx + 1 == n_steps;
            if (step_idx + 1) % sample_every == 0 || is_last {
                let t = if is_last {
                    params.t_end
                } else {
                    dt * (step_idx + 1) as f64
                };
                sample(&mut rec, t, &u, window_residual)?;
                window_residual = 0.0;
            }
        }
        Ok((rec, u))
    }
}
