//! Behavioural model of the test chip memory blocks.
//!
//! A block holds one [`CellType`]; each cell carries its own sampled write,
//! hold and read thresholds. Voltages are integer millivolts.

mod array;
mod cell_type;
mod variation;

pub use array::{
    sample_array, ArrayGeometry, ArraySampler, CellParams, MemoryArray, ReadOutcome, SeuRateLaw,
    WriteOutcome,
};
pub use cell_type::{CellType, CellTypeName};
pub use variation::{TypeVariation, VariationModel};
