//! Coupling families, spin configurations, boundary conditions and energies.

mod config;
mod coupling;
mod energy;

pub use config::{
    BoundaryCondition, SpinConfiguration, Volume, DEFAULT_CAP, MAX_PACKED_HALF_WIDTH,
};
pub use coupling::{
    CouplingFamily, CouplingTable, Extension, GrowthViolation, ReflectionViolation,
    SummabilityReport, ValidationReport,
};
pub(crate) use energy::energy_with_bonds;
pub use energy::{energy, energy_pm};
