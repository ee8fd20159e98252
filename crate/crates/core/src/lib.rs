//! Boolean-function nonlinearity toolkit.
//!
//! Truth tables of `n`-variable Boolean functions (`3 ≤ n ≤ 16`), their
//! Walsh-Hadamard spectra, and the machinery built on top:
//!
//! * [`table`] / [`walsh`] / [`fitness`] — representations, the fast and
//!   naive transforms, nonlinearity, the covering-radius upper bound, and
//!   the two fitness functions (plain nonlinearity, and nonlinearity
//!   refined by how few spectrum entries attain the maximum).
//! * [`ops`] — eight mutation operators with canonical neighborhoods and
//!   closed-form spectrum deltas where they exist, four crossovers, and a
//!   range-shuffling mixing mutation.
//! * [`analysis`] — landscape studies: operator consistency tables,
//!   nonlinearity transition statistics, per-operator reachability census,
//!   crossover outcome matrices, and nonlinearity distribution censuses.
//! * [`search`] — greedy local search (with and without backtracking to
//!   earlier accepted solutions) and a steady-state genetic algorithm,
//!   all budgeted in fitness evaluations and fully reproducible from a
//!   seed.
//!
//! Randomness everywhere flows through [`rng::RandomSource`], a seeded
//! stream-splittable generator, so every study and search run is
//! deterministic given `(seed, stream)` and independent of thread count.

pub mod analysis;
pub mod error;
pub mod fitness;
pub mod ops;
pub mod rng;
pub mod search;
pub mod table;
pub mod walsh;

pub use error::{Error, Result};
pub use fitness::{fitness1, fitness2, FitnessValue, Objective};
pub use ops::{
    apply_mutation, crossover, descriptors_for, format_operator_combo, mixing_mutation,
    mutation_delta, neighborhood, parse_operator_combo, CrossoverKind, MutationDescriptor,
    MutationKind, MutationOutcome, MutationPosition,
};
pub use rng::RandomSource;
pub use search::{
    derived_run_seed, experiment, experiment_csv, ga_run, ls_revert_run, ls_run, ls_run_from,
    random_function, BoxPlot, ConfigOutcome, GaConfig, GaMutationOp, LsConfig, RunRecord,
    SearchConfig, SummaryStats, TrajectoryPoint,
};
pub use table::TruthTable;
pub use walsh::{
    apply_spectrum_delta, butterfly, covering_radius_bound, inverse_walsh, nonlinearity,
    walsh_transform, walsh_transform_naive, CoveringRadiusBound, DeltaVector, WalshSpectrum,
};
