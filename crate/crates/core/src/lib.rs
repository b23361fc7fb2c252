//! Exact statistics of a one-dimensional ±1 chain with site-dependent
//! nearest-neighbour couplings: partition functions under plus and
//! minus-left/plus-right boundaries, the law of the phase separation point,
//! and a heat-bath sampler to cross-check it.
//!
//! ```
//! use pspchain::{closed_form_partition, psp_distribution, CouplingFamily, Volume};
//!
//! let fam = CouplingFamily::Sullivan;
//! let z = closed_form_partition(&fam, 1.0, 3).unwrap();
//! let law = psp_distribution(&fam, 1.0, Volume::new(3)).unwrap();
//! assert!((law.log_partition - z.mixed.ln()).abs() < 1e-12);
//! ```

pub mod chain;
mod error;
mod kernel;
pub mod logspace;
pub mod partition;
pub mod psp;
pub mod sampler;
pub mod table;
pub mod verify;

pub use chain::{
    energy, energy_pm, BoundaryCondition, CouplingFamily, CouplingTable, Extension,
    SpinConfiguration, SummabilityReport, ValidationReport, Volume, DEFAULT_CAP,
};
pub use error::{Error, Result};
pub use partition::{
    brute_force_partition, closed_form_partition, crystal_partitions, crystal_table, ising_ratio,
    ising_ratio_log_excess, rarefied_left, rarefied_right, recursive_partition, CrystalPartitions,
    PartitionPair, PartitionValue, RarefiedPair,
};
pub use psp::{
    contour_probability, decomposition_check, interface_points, interface_stats, majority_class,
    necessary_conditions, psp, psp_distribution, psp_moments, tail_series, variance_envelope,
    InterfaceIndex, InterfaceStats, MajorityClass, Moments, PspDistribution,
};
pub use sampler::{estimate_psp_distribution, ChainState, EstimateReport, Schedule};
pub use table::{Cell, Table};
