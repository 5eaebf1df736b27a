//! Box geometry.
//!
//! Everything lives on a rectangular box `0 < x_i < L_i` in dimension
//! 2, 3 or 4. The `flavor` decides the boundary behavior of the spectral
//! basis: fully periodic (torus) or free-slip (impermeable faces with zero
//! tangential stress). Both flavors carry exact trigonometric Stokes
//! eigenfunctions, which is why they are used as surrogates for a smooth
//! domain.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub const MAX_DIM: usize = 4;

/// Boundary flavor of the spectral basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// Fully periodic box (torus). Complex exponential modes.
    Periodic,
    /// Free-slip box: `u.n = 0` and zero tangential stress on each face.
    /// Mixed sine/cosine product modes with real amplitudes.
    Freeslip,
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Flavor::Periodic => write!(f, "periodic"),
            Flavor::Freeslip => write!(f, "freeslip"),
        }
    }
}

/// A rectangular box domain with side lengths `L_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    sides: Vec<f64>,
    flavor: Flavor,
}

impl BoxDomain {
    pub fn new(sides: &[f64], flavor: Flavor) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&sides.len()) {
            return Err(CoreError::InvalidDomain(format!(
                "dimension must be 2, 3 or 4, got {}",
                sides.len()
            )));
        }
        if let Some(bad) = sides.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(CoreError::InvalidDomain(format!(
                "side lengths must be positive and finite, got {bad}"
            )));
        }
        Ok(Self {
            sides: sides.to_vec(),
            flavor,
        })
    }

    /// Torus with all sides `2*pi`, the usual unit-wavenumber setting.
    pub fn unit_torus(dim: usize) -> Result<Self> {
        Self::new(&vec![2.0 * std::f64::consts::PI; dim], Flavor::Periodic)
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    /// Wavevector scale of axis `i`: `2*pi/L_i` on the torus, `pi/L_i` on
    /// the free-slip box (half-period sine/cosine indices).
    pub fn scale(&self, axis: usize) -> f64 {
        match self.flavor {
            Flavor::Periodic => 2.0 * std::f64::consts::PI / self.sides[axis],
            Flavor::Freeslip => std::f64::consts::PI / self.sides[axis],
        }
    }

    /// The Steklov sum `chi = sum_i pi^2 / L_i^2`, the continuum decay-rate
    /// scale associated with the bounding box.
    pub fn chi(&self) -> f64 {
        self.sides
            .iter()
            .map(|l| (std::f64::consts::PI / l).powi(2))
            .sum()
    }
}
