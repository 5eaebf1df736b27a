//! Divergence-free spectral coefficient fields and their norms.
//!
//! A `SpectralField` stores one complex amplitude vector per retained mode.
//! On the torus the stored amplitude `a_k` is the coefficient of
//! `exp(i kappa_vec . x)` for the conjugate-pair representative, so the
//! physical field is `sum_k 2 Re(a_k exp(i kappa_vec . x))`. On the
//! free-slip box amplitudes are real (stored with zero imaginary part) and
//! component `i` of a mode multiplies
//! `sin(scale_i k_i x_i) * prod_{j != i} cos(scale_j k_j x_j)`.
//!
//! Norms are plain integrals over the box, no normalization:
//! `l2_norm^2 = int |u|^2`, `v_norm^2 = int |grad u|^2 = sum kappa |a|^2 vf`,
//! `a_norm^2 = sum kappa^2 |a|^2 vf`, with `vf` the per-mode volume factor
//! from [`ModeIndex::vol_factor`]. Keeping the exact integral convention
//! makes every verified inequality literal rather than normalization-
//! dependent.

use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{BoxDomain, Flavor};
use crate::error::{CoreError, Result};
use crate::modes::{enumerate_modes, spectral_gap, ModeIndex};
use crate::parallel;

pub type Complex64 = Complex<f64>;

/// Relative tolerance of the divergence-free invariant.
pub const DIV_FREE_TOL: f64 = 1e-12;

/// Remove the component of `a` parallel to the scaled wavevector.
///
/// This is the modewise Leray projection: idempotent, self-adjoint and
/// norm-nonincreasing. The zero wavevector is rejected (a constant mode
/// has no divergence-free content and never decays).
pub fn leray_project(kappa_vec: &[f64], a: &[Complex64]) -> Result<Vec<Complex64>> {
    let kappa: f64 = kappa_vec.iter().map(|k| k * k).sum();
    if kappa == 0.0 {
        return Err(CoreError::InvalidDomain(
            "leray projection of the zero mode".into(),
        ));
    }
    let dot: Complex64 = a
        .iter()
        .zip(kappa_vec)
        .map(|(ai, ki)| ai * *ki)
        .sum::<Complex64>()
        / kappa;
    Ok(a.iter()
        .zip(kappa_vec)
        .map(|(ai, ki)| ai - dot * *ki)
        .collect())
}

/// Coefficient field of a divergence-free velocity truncation.
#[derive(Debug, Clone)]
pub struct SpectralField {
    domain: BoxDomain,
    cutoff: usize,
    modes: Arc<Vec<ModeIndex>>,
    /// `modes.len() * dim` complex amplitudes, mode-major.
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zero(domain: &BoxDomain, cutoff: usize) -> Result<Self> {
        let modes = Arc::new(enumerate_modes(domain, cutoff)?);
        let n = modes.len() * domain.dim();
        Ok(Self {
            domain: domain.clone(),
            cutoff,
            modes,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub(crate) fn zero_with_modes(
        domain: &BoxDomain,
        cutoff: usize,
        modes: Arc<Vec<ModeIndex>>,
    ) -> Self {
        let n = modes.len() * domain.dim();
        Self {
            domain: domain.clone(),
            cutoff,
            modes,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub(crate) fn modes_arc(&self) -> Arc<Vec<ModeIndex>> {
        Arc::clone(&self.modes)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Smallest retained eigenvalue, the discrete spectral gap.
    pub fn lambda_min(&self) -> f64 {
        spectral_gap(&self.modes)
    }

    pub fn amplitude(&self, mode: usize) -> &[Complex64] {
        let d = self.dim();
        &self.coeffs[mode * d..(mode + 1) * d]
    }

    pub fn amplitude_mut(&mut self, mode: usize) -> &mut [Complex64] {
        let d = self.dim();
        &mut self.coeffs[mode * d..(mode + 1) * d]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn same_truncation(&self, other: &Self) -> bool {
        self.domain == other.domain && self.cutoff == other.cutoff
    }

    pub(crate) fn check_same_truncation(&self, other: &Self, what: &str) -> Result<()> {
        if self.same_truncation(other) {
            Ok(())
        } else {
            Err(CoreError::DomainMismatch(what.into()))
        }
    }

    // ---- linear algebra ----------------------------------------------

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: f64, other: &Self) {
        debug_assert!(self.same_truncation(other));
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    /// Multiply each mode amplitude by a real factor depending on kappa.
    /// Diagonal operators (Stokes semigroup, inverse Stokes) use this.
    pub fn mode_scale(&mut self, f: impl Fn(f64) -> f64) {
        let d = self.dim();
        for (m, mode) in self.modes.clone().iter().enumerate() {
            let s = f(mode.kappa());
            for c in &mut self.coeffs[m * d..(m + 1) * d] {
                *c *= s;
            }
        }
    }

    // ---- norms ---------------------------------------------------------

    fn weighted_sq(&self, weight: impl Fn(f64) -> f64 + Sync) -> f64 {
        let d = self.dim();
        parallel::sum_f64(self.modes.len(), |m| {
            let mode = &self.modes[m];
            let amp_sq: f64 = self.coeffs[m * d..(m + 1) * d]
                .iter()
                .map(|c| c.norm_sqr())
                .sum();
            weight(mode.kappa()) * mode.vol_factor(&self.domain) * amp_sq
        })
    }

    /// `int |u|^2` over the box.
    pub fn l2_sq(&self) -> f64 {
        self.weighted_sq(|_| 1.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_sq().sqrt()
    }

    /// `int |grad u|^2` (squared V-norm).
    pub fn v_sq(&self) -> f64 {
        self.weighted_sq(|k| k)
    }

    pub fn v_norm(&self) -> f64 {
        self.v_sq().sqrt()
    }

    /// `int |A u|^2` with `A` the (unit-viscosity) Stokes operator; an H2
    /// seminorm in this basis.
    pub fn a_sq(&self) -> f64 {
        self.weighted_sq(|k| k * k)
    }

    pub fn a_norm(&self) -> f64 {
        self.a_sq().sqrt()
    }

    /// Squared seminorm with weight `kappa^m` (`m = 0` is `l2_sq`,
    /// `m = 1` is `v_sq`, `m = 2` is `a_sq`).
    pub fn h_sq(&self, m: i32) -> f64 {
        self.weighted_sq(|k| k.powi(m))
    }

    /// L2 inner product `int u . v`.
    pub fn inner_l2(&self, other: &Self) -> f64 {
        debug_assert!(self.same_truncation(other));
        let d = self.dim();
        parallel::sum_f64(self.modes.len(), |m| {
            let mode = &self.modes[m];
            let dot: f64 = (0..d)
                .map(|c| {
                    let a = self.coeffs[m * d + c];
                    let b = other.coeffs[m * d + c];
                    a.re * b.re + a.im * b.im
                })
                .sum();
            mode.vol_factor(&self.domain) * dot
        })
    }

    /// V inner product `int grad u : grad v`.
    pub fn inner_v(&self, other: &Self) -> f64 {
        debug_assert!(self.same_truncation(other));
        let d = self.dim();
        parallel::sum_f64(self.modes.len(), |m| {
            let mode = &self.modes[m];
            let dot: f64 = (0..d)
                .map(|c| {
                    let a = self.coeffs[m * d + c];
                    let b = other.coeffs[m * d + c];
                    a.re * b.re + a.im * b.im
                })
                .sum();
            mode.kappa() * mode.vol_factor(&self.domain) * dot
        })
    }

    pub fn l2_distance(&self, other: &Self) -> f64 {
        self.minus(other).l2_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    // ---- divergence-free invariant -------------------------------------

    /// Largest relative residual `|kappa_vec . a| / (|kappa_vec| |a|)`.
    pub fn max_divergence_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for (m, mode) in self.modes.iter().enumerate() {
            let kv = mode.kappa_vec(&self.domain);
            let a = &self.coeffs[m * d..(m + 1) * d];
            let dot: Complex64 = a.iter().zip(&kv[..d]).map(|(ai, ki)| ai * *ki).sum();
            let norm_a: f64 = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let norm_k = mode.kappa().sqrt();
            if norm_a > 0.0 {
                worst = worst.max(dot.norm() / (norm_k * norm_a));
            }
        }
        worst
    }

    pub fn is_divergence_free(&self, tol: f64) -> bool {
        self.max_divergence_residual() <= tol
    }

    /// Leray-project every mode amplitude in place.
    pub fn project(&mut self) {
        let d = self.dim();
        for (m, mode) in self.modes.clone().iter().enumerate() {
            let kv = mode.kappa_vec(&self.domain);
            let projected = leray_project(&kv[..d], &self.coeffs[m * d..(m + 1) * d])
                .expect("retained modes have kappa > 0");
            self.coeffs[m * d..(m + 1) * d].copy_from_slice(&projected);
        }
    }

    // ---- presets --------------------------------------------------------

    /// Single lowest mode: the lexicographically first mode of minimal
    /// kappa, with a deterministic unit amplitude direction orthogonal to
    /// the wavevector, scaled by `amplitude`.
    pub fn single_mode(domain: &BoxDomain, cutoff: usize, amplitude: f64) -> Result<Self> {
        let mut field = Self::zero(domain, cutoff)?;
        let gap = field.lambda_min();
        let m = field
            .modes
            .iter()
            .position(|mode| mode.kappa() <= gap * (1.0 + 1e-12))
            .expect("nonempty mode list");
        let d = field.dim();
        let kv = field.modes[m].kappa_vec(domain);
        let mut dir = vec![Complex64::new(0.0, 0.0); d];
        for axis in 0..d {
            let mut e = vec![Complex64::new(0.0, 0.0); d];
            e[axis] = Complex64::new(1.0, 0.0);
            let p = leray_project(&kv[..d], &e)?;
            let n: f64 = p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-9 {
                for (t, pi) in dir.iter_mut().zip(&p) {
                    *t = pi / n * amplitude;
                }
                break;
            }
        }
        field.amplitude_mut(m).copy_from_slice(&dir);
        Ok(field)
    }

    /// The 2D Taylor-Green vortex
    /// `u = amplitude * (cos(a x1) sin(a x2), -sin(a x1) cos(a x2))`
    /// on a square torus with `a = 2 pi / L`. An exact Navier-Stokes
    /// solution: its self-advection is a pure gradient, so the truncated
    /// dynamics reduce to Stokes decay at rate `2 nu a^2` per amplitude.
    pub fn taylor_green(domain: &BoxDomain, cutoff: usize, amplitude: f64) -> Result<Self> {
        if domain.dim() != 2 || domain.flavor() != Flavor::Periodic {
            return Err(CoreError::InvalidDomain(
                "taylor_green preset needs a 2D periodic domain".into(),
            ));
        }
        let sides = domain.sides();
        if (sides[0] - sides[1]).abs() > 1e-12 * sides[0] {
            return Err(CoreError::InvalidDomain(
                "taylor_green preset needs a square torus".into(),
            ));
        }
        let mut field = Self::zero(domain, cutoff)?;
        // cos(ax)sin(ay) = [sin(a(x+y)) - sin(a(x-y))]/2 and
        // -sin(ax)cos(ay) = -[sin(a(x+y)) + sin(a(x-y))]/2, so the pair
        // representatives (1,1) and (1,-1) carry amplitudes
        // -i/4*(1,-1) and i/4*(1,1) per the 2 Re(a e^{i k.x}) convention.
        let q = amplitude / 4.0;
        let mut set = |target: [i32; 2], amp: [Complex64; 2]| {
            let m = field
                .modes
                .iter()
                .position(|mo| mo.indices() == target)
                .expect("cutoff >= 1 contains the Taylor-Green pair");
            field.amplitude_mut(m).copy_from_slice(&amp);
        };
        set(
            [1, 1],
            [Complex64::new(0.0, -q), Complex64::new(0.0, q)],
        );
        set(
            [1, -1],
            [Complex64::new(0.0, q), Complex64::new(0.0, q)],
        );
        Ok(field)
    }

    /// Seeded pseudo-random field: uniform amplitudes on modes with
    /// `kappa <= cutoff^2`, Leray-projected. Bit-reproducible for a given
    /// seed. The threshold is widened to the lowest retained shell when
    /// the spectral gap exceeds `cutoff^2` (short free-slip boxes), so the
    /// preset never comes back empty.
    pub fn random_seeded(
        domain: &BoxDomain,
        cutoff: usize,
        seed: u64,
        amplitude: f64,
    ) -> Result<Self> {
        let mut field = Self::zero(domain, cutoff)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = field.dim();
        let kappa_max = ((cutoff * cutoff) as f64).max(field.lambda_min());
        let complex_amps = domain.flavor() == Flavor::Periodic;
        let mut any = false;
        for m in 0..field.modes.len() {
            let mode = field.modes[m];
            if mode.kappa() > kappa_max * (1.0 + 1e-12) {
                continue;
            }
            any = true;
            let kv = mode.kappa_vec(domain);
            let mut a = vec![Complex64::new(0.0, 0.0); d];
            for (axis, item) in a.iter_mut().enumerate() {
                // free-slip components along a zero index are identically
                // zero shapes; keep their amplitudes zero
                if !complex_amps && mode.indices()[axis] == 0 {
                    continue;
                }
                let re: f64 = rng.random_range(-1.0..1.0);
                let im: f64 = if complex_amps {
                    rng.random_range(-1.0..1.0)
                } else {
                    0.0
                };
                *item = Complex64::new(re, im) * amplitude;
            }
            let p = leray_project(&kv[..d], &a)?;
            field.amplitude_mut(m).copy_from_slice(&p);
        }
        if !any {
            return Err(CoreError::EmptyTruncation(format!(
                "no modes with kappa <= cutoff^2 = {kappa_max}"
            )));
        }
        Ok(field)
    }

    /// Rescale so that `v_norm` hits `target` exactly (no-op directionally).
    pub fn rescale_to_v_norm(&mut self, target: f64) -> Result<()> {
        let v = self.v_norm();
        if v == 0.0 {
            return Err(CoreError::ZeroProfile);
        }
        self.scale(target / v);
        Ok(())
    }

    /// Truncate (or zero-pad) onto a possibly different cutoff of the same
    /// domain. Modes outside the target truncation are dropped.
    pub fn retruncate(&self, cutoff: usize) -> Result<Self> {
        let mut out = Self::zero(&self.domain, cutoff)?;
        let d = self.dim();
        for (m_out, mode_out) in out.modes.clone().iter().enumerate() {
            if let Some(m_in) = self
                .modes
                .iter()
                .position(|mo| mo.indices() == mode_out.indices())
            {
                let src: Vec<Complex64> = self.coeffs[m_in * d..(m_in + 1) * d].to_vec();
                out.coeffs[m_out * d..(m_out + 1) * d].copy_from_slice(&src);
            }
        }
        Ok(out)
    }

    // ---- serialization --------------------------------------------------

    pub fn to_json_string(&self) -> String {
        let d = self.dim();
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(m, mode)| ModeDoc {
                k: mode.indices().iter().map(|&v| v as i64).collect(),
                re: (0..d).map(|c| self.coeffs[m * d + c].re).collect(),
                im: (0..d).map(|c| self.coeffs[m * d + c].im).collect(),
            })
            .collect();
        let doc = FieldDoc {
            dim: d,
            sides: self.domain.sides().to_vec(),
            flavor: self.domain.flavor(),
            cutoff: self.cutoff,
            modes,
        };
        serde_json::to_string_pretty(&doc).expect("field serialization cannot fail")
    }

    /// Parse the structured text form, validating the divergence-free
    /// invariant of every stored mode.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: FieldDoc =
            serde_json::from_str(text).map_err(|e| CoreError::Deserialize(e.to_string()))?;
        if doc.sides.len() != doc.dim {
            return Err(CoreError::Deserialize(format!(
                "dim {} does not match sides length {}",
                doc.dim,
                doc.sides.len()
            )));
        }
        let domain = BoxDomain::new(&doc.sides, doc.flavor)?;
        let mut field = Self::zero(&domain, doc.cutoff)?;
        let d = doc.dim;
        let scale_of_field = doc
            .modes
            .iter()
            .flat_map(|m| m.re.iter().chain(m.im.iter()))
            .fold(0.0f64, |acc, &x| acc.max(x.abs()));
        for entry in &doc.modes {
            if entry.re.len() != d || entry.im.len() != d || entry.k.len() != d {
                return Err(CoreError::Deserialize(format!(
                    "mode entry {:?} has wrong arity for dim {d}",
                    entry.k
                )));
            }
            let m = field
                .modes
                .iter()
                .position(|mo| {
                    mo.indices()
                        .iter()
                        .zip(&entry.k)
                        .all(|(&a, &b)| a as i64 == b)
                })
                .ok_or_else(|| {
                    CoreError::Deserialize(format!(
                        "mode {:?} is not a retained {} mode at cutoff {}",
                        entry.k, doc.flavor, doc.cutoff
                    ))
                })?;
            for c in 0..d {
                let z = Complex64::new(entry.re[c], entry.im[c]);
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(CoreError::NonFinite("stored field coefficients".into()));
                }
                field.coeffs[m * d + c] = z;
            }
            // per-mode divergence check against the field scale
            let mode = field.modes[m];
            let kv = mode.kappa_vec(&domain);
            let a = field.amplitude(m);
            let dot: Complex64 = a.iter().zip(&kv[..d]).map(|(ai, ki)| ai * *ki).sum();
            let denom = mode.kappa().sqrt() * scale_of_field.max(f64::MIN_POSITIVE);
            let residual = dot.norm() / denom;
            if residual > DIV_FREE_TOL * 10.0 {
                return Err(CoreError::NotDivergenceFree {
                    mode: entry.k.clone(),
                    residual,
                });
            }
        }
        Ok(field)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldDoc {
    dim: usize,
    sides: Vec<f64>,
    flavor: Flavor,
    cutoff: usize,
    modes: Vec<ModeDoc>,
}

#[derive(Serialize, Deserialize)]
struct ModeDoc {
    k: Vec<i64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

pub use crate::modes::spectral_gap as lattice_spectral_gap;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn leray_gradient_direction_maps_to_zero() {
        let p = leray_project(&[1.0, 0.0], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(p.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn leray_identity_on_divergence_free() {
        let p = leray_project(&[1.0, 0.0], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((p[0].norm() - 0.0).abs() < 1e-15);
        assert!((p[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn leray_oblique_example() {
        // a - (k.a/|k|^2) k with k=(1,1), a=(1,0) gives (1/2, -1/2)
        let p = leray_project(&[1.0, 1.0], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((p[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((p[1] - c(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn leray_rejects_zero_mode() {
        assert!(leray_project(&[0.0, 0.0], &[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn random_field_is_divergence_free_and_finite() {
        let domain = BoxDomain::unit_torus(4).unwrap();
        let f = SpectralField::random_seeded(&domain, 2, 7, 1.0).unwrap();
        assert!(f.is_divergence_free(DIV_FREE_TOL));
        assert!(f.is_finite());
        assert!(f.l2_norm() > 0.0);
    }

    #[test]
    fn freeslip_random_field_has_real_amplitudes() {
        let domain =
            BoxDomain::new(&[std::f64::consts::PI; 3], Flavor::Freeslip).unwrap();
        let f = SpectralField::random_seeded(&domain, 2, 3, 1.0).unwrap();
        assert!(f.is_divergence_free(DIV_FREE_TOL));
        assert!(f.coeffs().iter().all(|z| z.im == 0.0));
        // components along zero indices stay zero
        for (m, mode) in f.modes().iter().enumerate() {
            for (axis, &ki) in mode.indices().iter().enumerate() {
                if ki == 0 {
                    assert_eq!(f.amplitude(m)[axis], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn norm_chain_discrete_poincare() {
        let domain = BoxDomain::unit_torus(3).unwrap();
        for seed in 0..5 {
            let f = SpectralField::random_seeded(&domain, 3, seed, 0.8).unwrap();
            let gap = f.lambda_min();
            assert!(gap * f.l2_sq() <= f.v_sq() * (1.0 + 1e-12));
            assert!(gap * f.l2_norm() <= f.a_norm() * (1.0 + 1e-12));
            assert!(f.v_sq() <= f.l2_norm() * f.a_norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn taylor_green_norms_match_hand_integrals() {
        let domain = BoxDomain::unit_torus(2).unwrap();
        let f = SpectralField::taylor_green(&domain, 2, 1.0).unwrap();
        // int |u|^2 = 2 pi^2, int |grad u|^2 = 4 pi^2 on the (2 pi)^2 torus
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert!((f.l2_sq() - 2.0 * pi2).abs() < 1e-12 * pi2);
        assert!((f.v_sq() - 4.0 * pi2).abs() < 1e-12 * pi2);
        assert!(f.is_divergence_free(DIV_FREE_TOL));
    }

    #[test]
    fn single_mode_kappa_one_on_unit_torus() {
        let domain = BoxDomain::unit_torus(4).unwrap();
        let f = SpectralField::single_mode(&domain, 1, 0.5).unwrap();
        let nonzero: Vec<usize> = (0..f.modes().len())
            .filter(|&m| f.amplitude(m).iter().any(|z| z.norm() > 0.0))
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert!((f.modes()[nonzero[0]].kappa() - 1.0).abs() < 1e-14);
        // l2_sq = vol_factor * amplitude^2
        let vf = f.modes()[nonzero[0]].vol_factor(&domain);
        assert!((f.l2_sq() - vf * 0.25).abs() < 1e-12 * vf);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let domain = BoxDomain::unit_torus(2).unwrap();
        let f = SpectralField::random_seeded(&domain, 2, 42, 1.3).unwrap();
        let text = f.to_json_string();
        let g = SpectralField::from_json_str(&text).unwrap();
        assert!(f.l2_distance(&g) < 1e-14 * f.l2_norm().max(1.0));

        // corrupt one mode so it is no longer divergence-free
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        let entry = &mut doc["modes"][2];
        entry["re"][0] = serde_json::json!(10.0);
        entry["re"][1] = serde_json::json!(10.0);
        entry["im"][0] = serde_json::json!(0.0);
        entry["im"][1] = serde_json::json!(0.0);
        let bad = serde_json::to_string(&doc).unwrap();
        match SpectralField::from_json_str(&bad) {
            Err(CoreError::NotDivergenceFree { .. }) => {}
            other => panic!("expected divergence validation failure, got {other:?}"),
        }
    }

    #[test]
    fn rescale_hits_target_v_norm() {
        let domain = BoxDomain::unit_torus(4).unwrap();
        let mut f = SpectralField::random_seeded(&domain, 2, 5, 1.0).unwrap();
        f.rescale_to_v_norm(0.05).unwrap();
        assert!((f.v_norm() - 0.05).abs() < 1e-14);
        let mut z = SpectralField::zero(&domain, 1).unwrap();
        assert!(z.rescale_to_v_norm(1.0).is_err());
    }
}
