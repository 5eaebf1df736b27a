//! Wavevector lattice of the spectral truncation.
//!
//! A `ModeIndex` is one retained basis mode. On the torus we store one
//! representative per conjugate pair `{k, -k}` (the representative has its
//! first nonzero component positive); the mirrored coefficient is implied
//! by reality of the velocity field. On the free-slip box indices are
//! componentwise nonnegative and a mode is retained only when at least two
//! components are nonzero, since the divergence-free amplitude space of a
//! single-axis mode is trivial.
//!
//! The zero mode is always excluded: mean-zero fields are the setting in
//! which the spectral-gap and decay bounds hold.

use crate::domain::{BoxDomain, Flavor, MAX_DIM};
use crate::error::{CoreError, Result};

/// Index vector of one retained mode, with its scaled wavevector data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeIndex {
    k: [i32; MAX_DIM],
    dim: usize,
    /// `sum_i (scale_i * k_i)^2`, the (positive) Stokes eigenvalue.
    kappa: f64,
}

impl ModeIndex {
    pub(crate) fn new(k: [i32; MAX_DIM], domain: &BoxDomain) -> Self {
        let dim = domain.dim();
        let mut kappa = 0.0;
        for i in 0..dim {
            let s = domain.scale(i) * k[i] as f64;
            kappa += s * s;
        }
        Self { k, dim, kappa }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Raw integer indices, `dim` entries.
    pub fn indices(&self) -> &[i32] {
        &self.k[..self.dim]
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Scaled wavevector `(scale_i * k_i)_i`; the mode is an eigenfunction
    /// of the negative Laplacian with eigenvalue `|kappa_vec|^2`.
    pub fn kappa_vec(&self, domain: &BoxDomain) -> [f64; MAX_DIM] {
        let mut v = [0.0; MAX_DIM];
        for i in 0..self.dim {
            v[i] = domain.scale(i) * self.k[i] as f64;
        }
        v
    }

    /// Number of nonzero index components.
    pub fn nonzero_components(&self) -> usize {
        self.indices().iter().filter(|&&k| k != 0).count()
    }

    /// Exact value of the integral of the squared mode shape over the box,
    /// per unit squared amplitude. Torus pairs contribute `2*vol` (both
    /// members of the conjugate pair), free-slip products contribute
    /// `vol / 2^m` with `m` nonzero factors.
    pub fn vol_factor(&self, domain: &BoxDomain) -> f64 {
        match domain.flavor() {
            Flavor::Periodic => 2.0 * domain.volume(),
            Flavor::Freeslip => domain.volume() / (1u64 << self.nonzero_components()) as f64,
        }
    }
}

/// True when `k` is the canonical representative of its torus conjugate
/// pair: the first nonzero component is positive.
pub(crate) fn is_conjugate_representative(k: &[i32]) -> bool {
    for &ki in k {
        if ki != 0 {
            return ki > 0;
        }
    }
    false // zero vector is not a mode
}

/// Enumerate all retained modes with componentwise index magnitude at most
/// `cutoff`, in lexicographic index order.
///
/// Torus: one representative per conjugate pair, zero mode excluded.
/// Free-slip box: nonnegative indices with at least two nonzero components.
pub fn enumerate_modes(domain: &BoxDomain, cutoff: usize) -> Result<Vec<ModeIndex>> {
    if cutoff < 1 {
        return Err(CoreError::InvalidCutoff(cutoff));
    }
    let dim = domain.dim();
    let m = cutoff as i32;
    let (lo, retain): (i32, fn(&[i32]) -> bool) = match domain.flavor() {
        Flavor::Periodic => (-m, |k| is_conjugate_representative(k)),
        Flavor::Freeslip => (0, |k| k.iter().filter(|&&ki| ki != 0).count() >= 2),
    };

    let mut out = Vec::new();
    let mut k = [lo; MAX_DIM];
    for i in dim..MAX_DIM {
        k[i] = 0;
    }
    loop {
        if retain(&k[..dim]) {
            out.push(ModeIndex::new(k, domain));
        }
        // odometer increment in lexicographic order
        let mut axis = dim;
        loop {
            if axis == 0 {
                if out.is_empty() {
                    return Err(CoreError::EmptyTruncation(format!(
                        "no {} modes within cutoff {cutoff}",
                        domain.flavor()
                    )));
                }
                return Ok(out);
            }
            axis -= 1;
            if k[axis] < m {
                k[axis] += 1;
                for item in k.iter_mut().take(dim).skip(axis + 1) {
                    *item = lo;
                }
                break;
            }
        }
    }
}

/// Smallest `kappa` among the given modes: the discrete spectral gap.
pub fn spectral_gap(modes: &[ModeIndex]) -> f64 {
    modes.iter().map(|m| m.kappa).fold(f64::INFINITY, f64::min)
}
