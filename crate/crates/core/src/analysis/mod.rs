//! Statistical verification: GNZ residuals, partition functions,
//! domination tests, block fields, crossing curves and threshold summaries.

mod blocks;
mod conditional;
mod curve;
mod domination;
mod events;
mod gnz;
mod partition;
mod report;
pub mod stats;
mod vacant;

pub use blocks::{
    bernoulli_field, block_field, block_implication_failures, crossing_axes, lattice_crossing, lattice_crossing_axis, Adjacency,
    BlockField, BlockSemantics, BlockSpec,
};
pub use conditional::{conditional_block_probability, nondecreasing_within, stress_ensemble, ConditionalBlockEstimate};
pub use curve::{
    percolation_curve, read_curve_csv, threshold_estimate, threshold_estimate_with, write_curve_csv, z_grid, CurveRow, CurveSampler,
    ThresholdEstimate, Z95,
};
pub use domination::{count_statistic, crossing_statistic, domination_test};
pub use events::{event_frequencies, EventFrequencies};
pub use gnz::{gnz_residual_crcm, gnz_residual_wr, standard_test_functions, GnzArgs, Marked, TestFunction};
pub use partition::estimate_partition_function;
pub use report::{Comparison, Decision, TestReport};
pub use stats::Summary;
pub use vacant::{components_meeting, vacant_cluster_count_bound};
