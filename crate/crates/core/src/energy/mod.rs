//! Energy functionals, the Hamiltonian, the block energy balance and the
//! theoretical existence-time bounds.

mod bounds;
mod identity;
mod report;

pub use bounds::{existence_time_lower_bound, long_time_bounds, theory_f, theory_g, LongTimeBounds};
pub use identity::{block_energy, block_identity, BlockIdentity};
pub use report::{
    block_energies, block_energies_sq, energy_report, energy_report_with, forcing_norm, hamiltonian, total_energy,
    EnergyReport, EnergyWeights,
};
