//! Coated-rod photonic crystal homogenization: multipole resonances, effective
//! media, leading-order dispersion and a plane-wave reference solver.

// `!(x > 0.0)` is deliberate throughout: NaN has to fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod config;
pub mod dirichlet;
pub mod dispersion;
pub mod effective;
pub mod electrostatics;
pub mod error;
pub mod lattice;
pub mod model;
pub mod specfun;

pub use config::{validate_config, RawConfig};
pub use error::{Error, PoleKind, Result};
pub use lattice::{lattice_sum, LatticeSumTable};
pub use model::{
    CellGeometry, Config, CouplingConvention, MaterialSpec, NormalizedFrequency, PropagationSpec,
    SolverSettings, Truncation,
};
pub use specfun::{bessel_j, bessel_zeros, BesselZeroTable};
pub use bloch::{BlochOperator, BlochRecord, BlochSolution};
pub use dirichlet::{DirichletMode, DirichletSpectrum};
pub use dispersion::{BandInterval, BandReport, DispersionPoint, Source};
pub use effective::{BandClass, EffectiveModel, EffectiveResponse, EnergyFlowReport};
pub use electrostatics::{ElectrostaticMode, RayleighMatrix};
