//! Domain types and the frequency normalization shared by every solver.
//!
//! Frequencies are carried as `nu = (omega0 / omega_p)^2`. Lengths are in units
//! of the cell period.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coated-rod period cell: core of radius `a`, plasmonic coating out to `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CellGeometry {
    pub a: f64,
    pub b: f64,
    pub theta_r: f64,
    pub theta_p: f64,
    pub theta_h: f64,
}

impl CellGeometry {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Geometry { a, b, reason: "radii must be finite" });
        }
        if a <= 0.0 {
            return Err(Error::Geometry { a, b, reason: "core radius must be positive" });
        }
        if a >= b {
            return Err(Error::Geometry { a, b, reason: "core radius must be smaller than coating radius" });
        }
        if b >= 0.5 {
            return Err(Error::Geometry { a, b, reason: "coated rod must fit inside the unit cell (b < 0.5)" });
        }
        let theta_r = PI * a * a;
        let theta_disk = PI * b * b;
        Ok(Self {
            a,
            b,
            theta_r,
            theta_p: theta_disk - theta_r,
            theta_h: 1.0 - theta_disk,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaterialSpec {
    /// Core permittivity normalized by the squared skin depth.
    pub eps_r: f64,
    /// `eps_r^(-1/2)`.
    pub rho: f64,
}

impl MaterialSpec {
    pub fn new(eps_r: f64) -> Result<Self> {
        if !(eps_r.is_finite() && eps_r > 1.0) {
            return Err(Error::Config(format!("material.eps_R must exceed 1, got {eps_r}")));
        }
        Ok(Self { eps_r, rho: 1.0 / eps_r.sqrt() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagationSpec {
    pub khat: [f64; 2],
    pub dk_grid: Vec<f64>,
    /// Set when the supplied direction had to be rescaled to unit length.
    pub khat_normalized: bool,
}

impl PropagationSpec {
    pub fn new(khat: [f64; 2], dk_grid: Vec<f64>) -> Result<Self> {
        let norm = khat[0].hypot(khat[1]);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Config(format!("propagation.khat {khat:?} has no direction")));
        }
        let khat_normalized = (norm - 1.0).abs() > 1e-12;
        let khat = if khat_normalized { [khat[0] / norm, khat[1] / norm] } else { khat };
        for &dk in &dk_grid {
            if !(dk.is_finite() && dk >= 0.0) {
                return Err(Error::Config(format!("propagation.dk_grid entry {dk} must be nonnegative")));
            }
            if dk * khat[0].abs() > 2.0 * PI || dk * khat[1].abs() > 2.0 * PI {
                return Err(Error::Config(format!(
                    "propagation.dk_grid entry {dk} leaves the first Brillouin zone"
                )));
            }
        }
        Ok(Self { khat, dk_grid, khat_normalized })
    }
}

/// Squared frequency ratio `nu = (omega0/omega_p)^2`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct NormalizedFrequency(f64);

impl NormalizedFrequency {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::Domain { what: "normalized frequency", value: nu });
        }
        Ok(Self(nu))
    }

    pub fn nu(self) -> f64 {
        self.0
    }

    /// Core wavenumber squared, `xi0 = nu / rho^2`.
    pub fn xi0(self, material: &MaterialSpec) -> f64 {
        self.0 / (material.rho * material.rho)
    }

    /// Inverse coating permittivity `1 / eps_P = nu / (nu - 1)`.
    pub fn inv_eps_p(self) -> f64 {
        self.0 / (self.0 - 1.0)
    }
}

/// How the inter-order coupling of the multipole matrix is normalized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingConvention {
    /// Dipole sum `S_2 = pi` included and coupling scaled by `b^(l+m)`.
    #[default]
    Scaled,
    /// Coupling exactly as the Rayleigh identity reads, without `S_2`.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Truncation {
    pub n_multipole: usize,
    pub n_dirichlet: usize,
    pub lattice_radius: usize,
    pub g_max: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { n_multipole: 20, n_dirichlet: 500, lattice_radius: 400, g_max: 12 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100 }
    }
}

/// A fully validated run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub geometry: CellGeometry,
    pub material: MaterialSpec,
    pub propagation: PropagationSpec,
    pub truncation: Truncation,
    pub solver: SolverSettings,
    pub nu_max: f64,
    pub coupling: CouplingConvention,
}
