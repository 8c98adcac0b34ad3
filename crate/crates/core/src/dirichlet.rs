//! Radially symmetric Dirichlet spectrum of the core disk.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, PoleKind, Result};
use crate::specfun::{bessel_j, bessel_zeros};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DirichletMode {
    pub index: usize,
    /// `j_{0,n}`.
    pub zero: f64,
    /// `(j_{0,n} / a)^2`.
    pub mu: f64,
    /// Squared mean of the normalized eigenfunction over the disk.
    pub mean_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletSpectrum {
    pub a: f64,
    pub modes: Vec<DirichletMode>,
    /// `pi a^2 - sum mean_sq`, the weight of the omitted modes.
    pub tail_mean_sq: f64,
}

pub fn dirichlet_spectrum(a: f64, count: usize) -> Result<DirichletSpectrum> {
    if !(a > 0.0 && a < 0.5) {
        return Err(Error::Domain { what: "core radius", value: a });
    }
    let zeros = bessel_zeros(0, count)?.zeros;
    let modes: Vec<DirichletMode> = zeros
        .iter()
        .enumerate()
        .map(|(i, &j)| DirichletMode {
            index: i + 1,
            zero: j,
            mu: (j / a).powi(2),
            mean_sq: 4.0 * PI * a * a / (j * j),
        })
        .collect();
    let captured: f64 = modes.iter().map(|m| m.mean_sq).sum();
    Ok(DirichletSpectrum { a, tail_mean_sq: PI * a * a - captured, modes })
}

impl DirichletSpectrum {
    /// Normalized eigenfunction `phi_n(r)`.
    pub fn eigenfunction(&self, mode: &DirichletMode, r: f64) -> Result<f64> {
        let a = self.a;
        Ok(bessel_j(0, mode.zero * r / a)? / (PI.sqrt() * a * bessel_j(1, mode.zero)?))
    }

    fn check_pole(&self, xi0: f64) -> Result<()> {
        for m in &self.modes {
            if (xi0 - m.mu).abs() <= 1e-10 * m.mu {
                return Err(Error::PoleProximity { nu: xi0, pole: m.mu, kind: PoleKind::Dirichlet });
            }
        }
        Ok(())
    }
}

/// Core profile `psi0(r)` solving `Laplace psi0 + xi0 psi0 = 0` with `psi0 = 1` on
/// the core boundary.
///
/// The modal series `sum mu_n <phi_n> phi_n / (mu_n - xi0)` is summed after
/// subtracting its `xi0 = 0` value, which is identically one. The remainder
/// converges like `n^-3` and satisfies the boundary value term by term.
pub fn psi0_profile(spectrum: &DirichletSpectrum, xi0: f64, r: f64) -> Result<f64> {
    if !(0.0..=spectrum.a).contains(&r) {
        return Err(Error::Domain { what: "psi0 radius (must lie in the core)", value: r });
    }
    spectrum.check_pole(xi0)?;
    let a = spectrum.a;
    let mut s = 1.0;
    for m in &spectrum.modes {
        let mean = 2.0 * PI.sqrt() * a / m.zero;
        s += mean * spectrum.eigenfunction(m, r)? * xi0 / (m.mu - xi0);
    }
    Ok(s)
}
