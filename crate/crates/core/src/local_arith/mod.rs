//! Local arithmetic of cubic surfaces: point counts, singular reductions,
//! Hilbert symbols, local evaluation tables and real densities.

pub mod counting;
pub mod evaluation;
pub mod hilbert;
pub mod real;
pub mod singular;
pub mod surface;

pub use counting::{count_points_mod, euler_factor, p_adic_mass, tamagawa_density};
pub use evaluation::{brauer_allowed_fraction, local_evaluation_table, LocalMassTable, Measure, TritangentData};
pub use hilbert::{hilbert_symbol, Place};
pub use real::{leray_density_real, RealDensityOptions, RealDensityReport, RealRegion};
pub use singular::{bad_primes, singular_reduction_report, SingularReport};
pub use surface::SurfaceModel;
