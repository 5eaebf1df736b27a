//! Full wavevector lattice with dense index lookup.
//!
//! Operators work on the punctured lattice `{k in [-M, M]^d, k != 0}` with
//! one complex amplitude vector per lattice point. A torus field expands by
//! conjugate mirroring. A free-slip field is expanded through its odd/even
//! extension to the doubled torus: component `i` of the mode `k >= 0` with
//! `m` nonzero indices contributes `-i s_i A_i / 2^m` at every sign
//! combination `s (.) k`. The extension has the same index box and the same
//! scaled wavevectors, so one convolution kernel serves both flavors, and
//! box integrals of even integrands are plain torus sums.

use std::sync::Arc;

use num_complex::Complex;

use crate::domain::{BoxDomain, Flavor, MAX_DIM};
use crate::field::SpectralField;

pub(crate) type Complex64 = Complex<f64>;

pub(crate) struct Lattice {
    pub dim: usize,
    pub cutoff: usize,
    /// All nonzero points of `[-M, M]^dim`, lexicographic order.
    pub points: Vec<[i32; MAX_DIM]>,
    /// Scaled wavevectors per point.
    pub kvecs: Vec<[f64; MAX_DIM]>,
    pub kappas: Vec<f64>,
    /// Dense map from mixed-radix slot to point index.
    slot_of: Vec<u32>,
    side: usize,
}

const NO_POINT: u32 = u32::MAX;

impl Lattice {
    pub fn new(domain: &BoxDomain, cutoff: usize) -> Arc<Self> {
        let dim = domain.dim();
        let m = cutoff as i32;
        let side = 2 * cutoff + 1;
        let total = side.pow(dim as u32);
        let mut points = Vec::with_capacity(total - 1);
        let mut kvecs = Vec::with_capacity(total - 1);
        let mut kappas = Vec::with_capacity(total - 1);
        let mut slot_of = vec![NO_POINT; total];

        let mut k = [-m; MAX_DIM];
        for item in k.iter_mut().take(MAX_DIM).skip(dim) {
            *item = 0;
        }
        'outer: loop {
            if k[..dim].iter().any(|&v| v != 0) {
                let mut kv = [0.0; MAX_DIM];
                let mut kappa = 0.0;
                for i in 0..dim {
                    kv[i] = domain.scale(i) * k[i] as f64;
                    kappa += kv[i] * kv[i];
                }
                let slot = Self::slot(&k[..dim], m, side);
                slot_of[slot] = points.len() as u32;
                points.push(k);
                kvecs.push(kv);
                kappas.push(kappa);
            }
            let mut axis = dim;
            loop {
                if axis == 0 {
                    break 'outer;
                }
                axis -= 1;
                if k[axis] < m {
                    k[axis] += 1;
                    for item in k.iter_mut().take(dim).skip(axis + 1) {
                        *item = -m;
                    }
                    break;
                }
            }
        }
        Arc::new(Self {
            dim,
            cutoff,
            points,
            kvecs,
            kappas,
            slot_of,
            side,
        })
    }

    fn slot(k: &[i32], m: i32, side: usize) -> usize {
        let mut s = 0usize;
        for &ki in k {
            s = s * side + (ki + m) as usize;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Index of point `k`, or `None` when outside the box or zero.
    #[inline]
    pub fn lookup(&self, k: &[i32]) -> Option<usize> {
        let m = self.cutoff as i32;
        for &ki in k {
            if ki < -m || ki > m {
                return None;
            }
        }
        let idx = self.slot_of[Self::slot(k, m, self.side)];
        if idx == NO_POINT {
            None
        } else {
            Some(idx as usize)
        }
    }
}

/// Field amplitudes expanded onto the full lattice, `len * dim` mode-major.
pub(crate) struct LatticeAmps {
    pub amps: Vec<Complex64>,
}

impl LatticeAmps {
    pub fn zero(lat: &Lattice) -> Self {
        Self {
            amps: vec![Complex64::new(0.0, 0.0); lat.len() * lat.dim],
        }
    }

    pub fn expand(field: &SpectralField, lat: &Lattice) -> Self {
        assert!(lat.cutoff >= field.cutoff(), "lattice narrower than field");
        let dim = field.dim();
        let mut out = Self::zero(lat);
        match field.domain().flavor() {
            Flavor::Periodic => {
                for (m, mode) in field.modes().iter().enumerate() {
                    let a = field.amplitude(m);
                    let k = mode.indices();
                    let mut neg = [0i32; MAX_DIM];
                    for (i, &ki) in k.iter().enumerate() {
                        neg[i] = -ki;
                    }
                    let p = lat.lookup(k).expect("field mode inside lattice");
                    let q = lat.lookup(&neg[..dim]).expect("mirror inside lattice");
                    for c in 0..dim {
                        out.amps[p * dim + c] = a[c];
                        out.amps[q * dim + c] = a[c].conj();
                    }
                }
            }
            Flavor::Freeslip => {
                let minus_i = Complex64::new(0.0, -1.0);
                for (m, mode) in field.modes().iter().enumerate() {
                    let a = field.amplitude(m);
                    let k = mode.indices();
                    let nz: Vec<usize> =
                        (0..dim).filter(|&i| k[i] != 0).collect();
                    let weight = 1.0 / (1u64 << nz.len()) as f64;
                    for signs in 0..(1u32 << nz.len()) {
                        let mut sk = [0i32; MAX_DIM];
                        let mut sgn = [1.0f64; MAX_DIM];
                        for (i, &ki) in k.iter().enumerate() {
                            sk[i] = ki;
                        }
                        for (bit, &axis) in nz.iter().enumerate() {
                            if signs & (1 << bit) != 0 {
                                sk[axis] = -k[axis];
                                sgn[axis] = -1.0;
                            }
                        }
                        let p = lat.lookup(&sk[..dim]).expect("sign orbit inside lattice");
                        for (c, item) in nz.iter().map(|&c| (c, a[c])) {
                            out.amps[p * dim + c] = minus_i * sgn[c] * item * weight;
                        }
                    }
                }
            }
        }
        out
    }

    /// Collapse lattice amplitudes back onto the stored representatives of
    /// `proto`'s truncation (conjugate pair representative on the torus,
    /// all-nonnegative index with the parity weight undone on the free-slip
    /// box). Free-slip amplitudes keep only their real part; the imaginary
    /// residue of a parity-respecting operation is floating-point noise.
    pub fn reduce_onto(&self, lat: &Lattice, proto: &SpectralField) -> SpectralField {
        let dim = proto.dim();
        let mut out = SpectralField::zero_with_modes(
            proto.domain(),
            proto.cutoff(),
            proto.modes_arc(),
        );
        match proto.domain().flavor() {
            Flavor::Periodic => {
                for (m, mode) in proto.modes().iter().enumerate() {
                    let p = lat.lookup(mode.indices()).expect("mode inside lattice");
                    let src: Vec<Complex64> =
                        self.amps[p * dim..p * dim + dim].to_vec();
                    out.amplitude_mut(m).copy_from_slice(&src);
                }
            }
            Flavor::Freeslip => {
                let i_unit = Complex64::new(0.0, 1.0);
                for (m, mode) in proto.modes().iter().enumerate() {
                    let p = lat.lookup(mode.indices()).expect("mode inside lattice");
                    let mult = (1u64 << mode.nonzero_components()) as f64;
                    let src: Vec<Complex64> = (0..dim)
                        .map(|c| {
                            let z = i_unit * self.amps[p * dim + c] * mult;
                            Complex64::new(z.re, 0.0)
                        })
                        .collect();
                    out.amplitude_mut(m).copy_from_slice(&src);
                }
            }
        }
        out
    }
}
