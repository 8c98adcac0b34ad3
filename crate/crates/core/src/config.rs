//! TOML configuration tree and its validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    CellGeometry, Config, CouplingConvention, MaterialSpec, PropagationSpec, SolverSettings,
    Truncation,
};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub geometry: RawGeometry,
    #[serde(default)]
    pub material: RawMaterial,
    #[serde(default)]
    pub propagation: RawPropagation,
    #[serde(default)]
    pub truncation: RawTruncation,
    #[serde(default)]
    pub solver: RawSolver,
    #[serde(default)]
    pub output: RawOutput,
    #[serde(default)]
    pub electrostatics: RawElectrostatics,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGeometry {
    pub a: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMaterial {
    #[serde(rename = "eps_R")]
    pub eps_r: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPropagation {
    pub khat: Option<[f64; 2]>,
    pub dk_grid: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTruncation {
    #[serde(rename = "N_multipole")]
    pub n_multipole: Option<usize>,
    #[serde(rename = "N_dirichlet")]
    pub n_dirichlet: Option<usize>,
    pub lattice_radius: Option<usize>,
    #[serde(rename = "G_max")]
    pub g_max: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSolver {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub nu_max: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawElectrostatics {
    pub coupling: Option<CouplingConvention>,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::MissingKey(key.to_string()))
}

/// Check every invariant and fill defaults for omitted truncation and solver keys.
pub fn validate_config(raw: &RawConfig) -> Result<Config> {
    let a = required(raw.geometry.a, "geometry.a")?;
    let b = required(raw.geometry.b, "geometry.b")?;
    let eps_r = required(raw.material.eps_r, "material.eps_R")?;
    let khat = required(raw.propagation.khat, "propagation.khat")?;
    let dk_grid = raw.propagation.dk_grid.clone().unwrap_or_default();

    let geometry = CellGeometry::new(a, b)?;
    let material = MaterialSpec::new(eps_r)?;
    let propagation = PropagationSpec::new(khat, dk_grid)?;

    let d = Truncation::default();
    let t = &raw.truncation;
    let truncation = Truncation {
        n_multipole: t.n_multipole.unwrap_or(d.n_multipole),
        n_dirichlet: t.n_dirichlet.unwrap_or(d.n_dirichlet),
        lattice_radius: t.lattice_radius.unwrap_or(d.lattice_radius),
        g_max: t.g_max.unwrap_or(d.g_max),
    };
    if truncation.n_multipole == 0 || truncation.n_dirichlet == 0 {
        return Err(Error::Config("truncation orders must be positive".into()));
    }
    if truncation.lattice_radius < 2 {
        return Err(Error::Config("truncation.lattice_radius must be at least 2".into()));
    }

    let ds = SolverSettings::default();
    let solver = SolverSettings {
        tol: raw.solver.tol.unwrap_or(ds.tol),
        max_iter: raw.solver.max_iter.unwrap_or(ds.max_iter),
    };
    if !(solver.tol.is_finite() && solver.tol > 0.0) || solver.max_iter == 0 {
        return Err(Error::Config("solver.tol must be positive and solver.max_iter nonzero".into()));
    }

    let nu_max = raw.output.nu_max.unwrap_or(1.2);
    if !(nu_max.is_finite() && nu_max > 0.0) {
        return Err(Error::Config(format!("output.nu_max must be positive, got {nu_max}")));
    }

    Ok(Config {
        geometry,
        material,
        propagation,
        truncation,
        solver,
        nu_max,
        coupling: raw.electrostatics.coupling.unwrap_or_default(),
    })
}

impl Config {
    /// Explicit key tree equivalent to this configuration, defaults spelled out.
    pub fn to_raw(&self) -> RawConfig {
        RawConfig {
            geometry: RawGeometry { a: Some(self.geometry.a), b: Some(self.geometry.b) },
            material: RawMaterial { eps_r: Some(self.material.eps_r) },
            propagation: RawPropagation {
                khat: Some(self.propagation.khat),
                dk_grid: Some(self.propagation.dk_grid.clone()),
            },
            truncation: RawTruncation {
                n_multipole: Some(self.truncation.n_multipole),
                n_dirichlet: Some(self.truncation.n_dirichlet),
                lattice_radius: Some(self.truncation.lattice_radius),
                g_max: Some(self.truncation.g_max),
            },
            solver: RawSolver { tol: Some(self.solver.tol), max_iter: Some(self.solver.max_iter) },
            output: RawOutput { nu_max: Some(self.nu_max) },
            electrostatics: RawElectrostatics { coupling: Some(self.coupling) },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        validate_config(&RawConfig::from_toml(text)?)
    }
}
