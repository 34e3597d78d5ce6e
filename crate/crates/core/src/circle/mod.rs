//! Fourier coefficients of a smooth function on the circle and their entire
//! extensions built from a two-chart partition of unity.
//!
//! For integer `m` the extension reproduces `B_m = ∫ e^{−imθ} S dθ`; off the
//! integers it depends on the partition, so only its restriction to ℤ is
//! canonical.

mod extension;
mod partition;
mod sample;

pub use extension::{
    entire_extension, entire_extension_many, integer_consistency_report, mean_value_defect,
    IntegerConsistencyReport, IntegerRow, INTEGER_TOL, MAX_IMAG,
};
pub use partition::{
    make_partition, PartitionPair, DEFAULT_WIDTH, I1, I2, MAX_WIDTH, MIN_WIDTH,
};
pub use sample::{fourier_coefficient, CircleSample, SampleSource};
