//! Effective permeability, inverse permittivity and the resulting band classes.

use serde::Serialize;

use crate::dirichlet::DirichletSpectrum;
use crate::electrostatics::ElectrostaticMode;
use crate::error::{Error, PoleKind, Result};
use crate::model::{CellGeometry, MaterialSpec};

/// Relative exclusion radius around every pole.
pub const POLE_EXCLUSION: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandClass {
    DoubleNegative,
    DoublePositive,
    SingleNegativeStop,
    PoleAdjacent,
}

impl BandClass {
    pub fn from_signs(mu: f64, inv_eps: f64) -> Self {
        match (mu > 0.0, inv_eps > 0.0) {
            (true, true) => BandClass::DoublePositive,
            (false, false) if mu < 0.0 && inv_eps < 0.0 => BandClass::DoubleNegative,
            _ => BandClass::SingleNegativeStop,
        }
    }

    pub fn is_propagating(self) -> bool {
        matches!(self, BandClass::DoubleNegative | BandClass::DoublePositive)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BandClass::DoubleNegative => "double_negative",
            BandClass::DoublePositive => "double_positive",
            BandClass::SingleNegativeStop => "single_negative_stop",
            BandClass::PoleAdjacent => "pole_adjacent",
        }
    }
}

impl std::fmt::Display for BandClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Resonance data that enters the inverse permittivity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoupledMode {
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl CoupledMode {
    pub fn pole(&self) -> f64 {
        self.lambda + 0.5
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveResponse {
    pub nu: f64,
    pub mu_eff: f64,
    pub inv_eps_kk: f64,
    pub n_eff_sq: f64,
    pub eps_p_inv: f64,
    pub band_class: BandClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyFlowReport {
    pub nu: f64,
    pub poynting_along_khat: f64,
    pub phase_speed_sign: f64,
    pub antiparallel: bool,
}

/// Everything needed to evaluate the constitutive functions of one cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectiveModel {
    pub geometry: CellGeometry,
    pub material: MaterialSpec,
    pub dirichlet: DirichletSpectrum,
    pub modes: Vec<CoupledMode>,
}

impl EffectiveModel {
    /// Keeps converged electrostatic modes with nonzero coupling.
    pub fn new(
        geometry: CellGeometry,
        material: MaterialSpec,
        dirichlet: DirichletSpectrum,
        electrostatic: &[ElectrostaticMode],
    ) -> Self {
        let modes = electrostatic
            .iter()
            .filter(|m| m.converged && m.couples())
            .map(|m| CoupledMode { lambda: m.lambda, alpha1: m.alpha1, alpha2: m.alpha2 })
            .collect();
        Self { geometry, material, dirichlet, modes }
    }

    pub fn rho_sq(&self) -> f64 {
        self.material.rho * self.material.rho
    }

    /// Poles of the permeability, in `nu`.
    pub fn mu_poles(&self) -> impl Iterator<Item = f64> + '_ {
        let r2 = self.rho_sq();
        self.dirichlet.modes.iter().map(move |m| m.mu * r2)
    }

    /// Poles of the inverse permittivity, in `nu`, including the coating singularity.
    pub fn eps_poles(&self) -> impl Iterator<Item = (f64, PoleKind)> + '_ {
        self.modes
            .iter()
            .map(|m| (m.pole(), PoleKind::Electrostatic))
            .chain(std::iter::once((1.0, PoleKind::Coating)))
    }

    fn near(nu: f64, pole: f64) -> bool {
        (nu - pole).abs() <= POLE_EXCLUSION * pole.abs()
    }

    pub fn mu_eff(&self, nu: f64) -> Result<f64> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::Domain { what: "mu_eff frequency", value: nu });
        }
        for pole in self.mu_poles() {
            if Self::near(nu, pole) {
                return Err(Error::PoleProximity { nu, pole, kind: PoleKind::Dirichlet });
            }
        }
        let g = &self.geometry;
        let xi0 = nu / self.rho_sq();
        let resonant: f64 = self
            .dirichlet
            .modes
            .iter()
            .map(|m| m.mu * m.mean_sq / (m.mu - xi0))
            .sum();
        Ok(g.theta_h + g.theta_p + resonant + self.dirichlet.tail_mean_sq)
    }

    pub fn inv_eps_kk(&self, nu: f64) -> Result<f64> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::Domain { what: "inverse permittivity frequency", value: nu });
        }
        for (pole, kind) in self.eps_poles() {
            if Self::near(nu, pole) {
                return Err(Error::PoleProximity { nu, pole, kind });
            }
        }
        let g = &self.geometry;
        let s = nu - 1.0;
        let resonant: f64 = self
            .modes
            .iter()
            .map(|m| {
                let num = s * s * m.alpha1 * m.alpha1 + 2.0 * s * m.alpha1 * m.alpha2 + m.alpha2 * m.alpha2;
                num / ((nu - m.pole()) * s)
            })
            .sum();
        Ok(g.theta_h + nu / s * g.theta_p - resonant)
    }

    pub fn classify(&self, nu: f64) -> Result<EffectiveResponse> {
        let mu_eff = self.mu_eff(nu)?;
        let inv_eps_kk = self.inv_eps_kk(nu)?;
        let n_eff_sq = if inv_eps_kk == 0.0 {
            f64::INFINITY * mu_eff.signum()
        } else {
            mu_eff / inv_eps_kk
        };
        Ok(EffectiveResponse {
            nu,
            mu_eff,
            inv_eps_kk,
            n_eff_sq,
            eps_p_inv: nu / (nu - 1.0),
            band_class: BandClass::from_signs(mu_eff, inv_eps_kk),
        })
    }

    /// `nu n_eff^2(nu)`, the right side of the leading-order dispersion relation.
    pub fn dispersion_rhs(&self, nu: f64) -> Result<f64> {
        let r = self.classify(nu)?;
        Ok(nu * r.n_eff_sq)
    }
}

/// Averaged energy flow along the propagation direction for unit amplitude.
pub fn energy_flow(response: &EffectiveResponse) -> Result<EnergyFlowReport> {
    if !(response.n_eff_sq > 0.0) || !response.band_class.is_propagating() {
        return Err(Error::NotPropagating(response.n_eff_sq));
    }
    let poynting = 0.5 * response.n_eff_sq.sqrt() * response.inv_eps_kk;
    Ok(EnergyFlowReport {
        nu: response.nu,
        poynting_along_khat: poynting,
        phase_speed_sign: 1.0,
        antiparallel: poynting < 0.0,
    })
}
