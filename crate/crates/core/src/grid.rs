//! Physical-space synthesis and quadrature.
//!
//! Sampling uses the uniform tensor midpoint grid `x_j = (j + 1/2) L / n`.
//! The midpoint rectangle rule integrates `cos(2 pi m x / L)` exactly for
//! `0 < m < n` and `cos(pi m x / L)` exactly for `0 < m < 2n`, so every
//! quadrature below is spectrally exact once `n` resolves the integrand
//! bandwidth; [`exact_lp_points`] returns the minimal such `n`.

use num_complex::Complex;

use crate::domain::{BoxDomain, Flavor, MAX_DIM};
use crate::error::{CoreError, Result};
use crate::field::SpectralField;
use crate::lattice::{Lattice, LatticeAmps};
use crate::parallel;

pub type Complex64 = Complex<f64>;

/// Velocity samples on the uniform tensor midpoint grid.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    pub domain: BoxDomain,
    /// Points per axis.
    pub n: usize,
    /// Flattened `n^dim * dim` samples, grid-major (axis 0 slowest).
    pub samples: Vec<f64>,
}

impl PhysicalField {
    pub fn points(&self) -> usize {
        self.n.pow(self.domain.dim() as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.domain.volume() / self.points() as f64
    }

    /// Coordinates of flattened grid point `g`.
    pub fn coords(&self, g: usize) -> [f64; MAX_DIM] {
        let dim = self.domain.dim();
        let mut x = [0.0; MAX_DIM];
        let mut rest = g;
        for axis in (0..dim).rev() {
            let j = rest % self.n;
            rest /= self.n;
            x[axis] = (j as f64 + 0.5) * self.domain.sides()[axis] / self.n as f64;
        }
        x
    }
}

/// Minimal points per axis required by [`synthesize`]/[`analyze`].
pub fn min_grid_points(cutoff: usize) -> usize {
    2 * cutoff + 2
}

/// Minimal points per axis for which the midpoint rule integrates
/// `|u|^p` of a cutoff-`M` field exactly.
pub fn exact_lp_points(domain: &BoxDomain, cutoff: usize, p: u32) -> usize {
    let bandwidth = p as usize * cutoff;
    let n = match domain.flavor() {
        Flavor::Periodic => bandwidth + 1,
        Flavor::Freeslip => bandwidth / 2 + 1,
    };
    n.max(min_grid_points(cutoff))
}

pub(crate) fn check_grid(cutoff: usize, n: usize) -> Result<()> {
    let required = min_grid_points(cutoff);
    if n < required {
        Err(CoreError::GridTooCoarse {
            required,
            got: n,
            cutoff,
        })
    } else {
        Ok(())
    }
}

/// Per-axis tables of `exp(i scale_axis t x_j)` for `|t| <= cutoff`.
pub(crate) struct PhaseTables {
    tables: Vec<Vec<Complex64>>, // per axis: n * (2 cutoff + 1), conjugate half implied
    cutoff: usize,
    n: usize,
}

impl PhaseTables {
    pub fn new(domain: &BoxDomain, cutoff: usize, n: usize) -> Self {
        let dim = domain.dim();
        let mut tables = Vec::with_capacity(dim);
        for axis in 0..dim {
            let scale = domain.scale(axis);
            let h = domain.sides()[axis] / n as f64;
            let mut t = Vec::with_capacity(n * (cutoff + 1));
            for j in 0..n {
                let x = (j as f64 + 0.5) * h;
                for k in 0..=cutoff {
                    let th = scale * k as f64 * x;
                    t.push(Complex64::new(th.cos(), th.sin()));
                }
            }
            tables.push(t);
        }
        Self { tables, cutoff, n }
    }

    /// `exp(i scale k x_j)` on `axis`; negative `k` conjugates the table.
    #[inline]
    pub fn phase(&self, axis: usize, j: usize, k: i32) -> Complex64 {
        let v = self.tables[axis][j * (self.cutoff + 1) + k.unsigned_abs() as usize];
        if k < 0 {
            v.conj()
        } else {
            v
        }
    }

    /// Product phase `exp(i kappa_vec . x_g)` for lattice point `k`.
    #[inline]
    pub fn point_phase(&self, dim: usize, grid_idx: &[usize], k: &[i32]) -> Complex64 {
        let mut p = self.phase(0, grid_idx[0], k[0]);
        for axis in 1..dim {
            p *= self.phase(axis, grid_idx[axis], k[axis]);
        }
        p
    }

    pub fn decode(&self, mut g: usize, dim: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for axis in (0..dim).rev() {
            idx[axis] = g % self.n;
            g /= self.n;
        }
        idx
    }
}

/// Evaluate the field on the `n^dim` midpoint grid.
///
/// The real trigonometric sum is evaluated through the full-lattice
/// expansion, one pass per grid point, so both flavors share one kernel.
pub fn synthesize(field: &SpectralField, n: usize) -> Result<PhysicalField> {
    check_grid(field.cutoff(), n)?;
    let domain = field.domain().clone();
    let dim = domain.dim();
    let lat = Lattice::new(&domain, field.cutoff());
    let amps = LatticeAmps::expand(field, &lat);
    let tables = PhaseTables::new(&domain, field.cutoff(), n);
    let points = n.pow(dim as u32);

    let rows = parallel::map_collect(points, |g| {
        let idx = tables.decode(g, dim);
        let mut u = [0.0f64; MAX_DIM];
        for (p, k) in lat.points.iter().enumerate() {
            let ph = tables.point_phase(dim, &idx[..dim], &k[..dim]);
            for (c, item) in u.iter_mut().enumerate().take(dim) {
                let a = amps.amps[p * dim + c];
                *item += a.re * ph.re - a.im * ph.im;
            }
        }
        u
    });

    let mut samples = Vec::with_capacity(points * dim);
    for row in rows {
        samples.extend_from_slice(&row[..dim]);
    }
    Ok(PhysicalField { domain, n, samples })
}

/// Recover spectral coefficients from midpoint samples; exact (up to
/// roundoff) whenever the samples come from a truncation at the given
/// cutoff and the grid satisfies [`min_grid_points`].
pub fn analyze(phys: &PhysicalField, cutoff: usize) -> Result<SpectralField> {
    check_grid(cutoff, phys.n)?;
    let domain = &phys.domain;
    let dim = domain.dim();
    let mut field = SpectralField::zero(domain, cutoff)?;
    let tables = PhaseTables::new(domain, cutoff, phys.n);
    let points = phys.points();
    let cell = phys.cell_volume();

    let modes: Vec<_> = field.modes().to_vec();
    let rows = parallel::map_collect(modes.len(), |m| {
        let mode = &modes[m];
        let k = mode.indices();
        let mut acc = [Complex64::new(0.0, 0.0); MAX_DIM];
        match domain.flavor() {
            Flavor::Periodic => {
                // a_k = (1/vol) int u exp(-i kappa_vec . x)
                for g in 0..points {
                    let idx = tables.decode(g, dim);
                    let ph = tables.point_phase(dim, &idx[..dim], k).conj();
                    for (c, item) in acc.iter_mut().enumerate().take(dim) {
                        *item += phys.samples[g * dim + c] * ph;
                    }
                }
                let w = cell / domain.volume();
                for item in acc.iter_mut().take(dim) {
                    *item *= w;
                }
            }
            Flavor::Freeslip => {
                // A_i = int u_i shape_i / int shape_i^2
                for g in 0..points {
                    let idx = tables.decode(g, dim);
                    for c in 0..dim {
                        if k[c] == 0 {
                            continue;
                        }
                        let mut shape = 1.0f64;
                        for axis in 0..dim {
                            let ph = tables.phase(axis, idx[axis], k[axis]);
                            shape *= if axis == c { ph.im } else { ph.re };
                        }
                        acc[c] += phys.samples[g * dim + c] * shape;
                    }
                }
                let w = cell / mode.vol_factor(domain);
                for item in acc.iter_mut().take(dim) {
                    *item *= w;
                }
            }
        }
        acc
    });
    for (m, row) in rows.into_iter().enumerate() {
        field.amplitude_mut(m).copy_from_slice(&row[..dim]);
    }
    Ok(field)
}

/// Midpoint-rule integral of `|values|^p` over the box for a scalar sample
/// array (one value per grid point).
pub fn integrate_scalar_pow(domain: &BoxDomain, n: usize, values: &[f64], p: u32) -> f64 {
    let points = n.pow(domain.dim() as u32);
    assert_eq!(values.len(), points);
    let cell = domain.volume() / points as f64;
    cell * parallel::sum_f64(points, |g| values[g].abs().powi(p as i32))
}

/// Lp norm of the velocity magnitude `|u|` by tensor midpoint quadrature,
/// `p in {2, 4, 6, 12}`.
///
/// The pointwise magnitude is Euclidean over components, which dominates
/// the componentwise-sum convention, so inequality checks made with this
/// norm are conservative.
pub fn lp_norm(field: &SpectralField, p: u32, n: usize) -> Result<f64> {
    if !matches!(p, 2 | 4 | 6 | 12) {
        return Err(CoreError::UnsupportedExponent(p));
    }
    let phys = synthesize(field, n)?;
    let dim = field.dim();
    let points = phys.points();
    let cell = phys.cell_volume();
    let total = cell
        * parallel::sum_f64(points, |g| {
            let sq: f64 = (0..dim)
                .map(|c| phys.samples[g * dim + c] * phys.samples[g * dim + c])
                .sum();
            sq.powi(p as i32 / 2)
        });
    Ok(total.powf(1.0 / p as f64))
}
