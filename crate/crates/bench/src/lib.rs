//! Shared fixtures for the solver benchmarks.

use rodband_core::{CellGeometry, MaterialSpec};

/// The thick-core reference cell.
pub fn thick_core() -> (CellGeometry, MaterialSpec) {
    (CellGeometry::new(0.2, 0.4).unwrap(), MaterialSpec::new(285.0).unwrap())
}

/// The thin-core reference cell.
pub fn thin_core() -> (CellGeometry, MaterialSpec) {
    (CellGeometry::new(0.15, 0.4).unwrap(), MaterialSpec::new(285.0).unwrap())
}
