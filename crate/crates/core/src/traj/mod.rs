//! Trajectory ingestion: dataset CSV parsing, resampling, state windows.
//!
//! Tables from different dataset exports are normalized into one neutral
//! schema (SI units, fixed columns) through pluggable column maps, then
//! decimated to the run timestep and cut into fixed-length state windows of
//! ego features plus up to eight neighbor slots.

mod schema;
mod table;
mod window;

pub use schema::{acc_schema, citysim_schema, highd_schema, neutral_schema, ColumnSpec, SchemaMap};
pub use table::{parse_trajectory_csv, resample, write_neutral_csv, TrajRow, TrajectoryTable};
pub use window::{
    assign_neighbor_slots, build_state_windows, Direction, EgoStep, NeighborSlot, NeighborStep,
    NeighborTrack, SlotAgent, StateWindow, NEIGHBOR_SLOTS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajError {
    #[error("schema `{schema}` is missing required column `{column}`")]
    MissingColumn { schema: String, column: String },
    #[error("row {row}: column `{column}` is not numeric: `{value}`")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("recording timestep must be strictly positive, got {dt}")]
    BadTimestep { dt: f64 },
    #[error(
        "target timestep {target} is not an integer multiple of the recording timestep {recording}"
    )]
    NonIntegerRatio { target: f64, recording: f64 },
    #[error("unknown schema `{name}` (known: highd, citysim, acc, neutral)")]
    UnknownSchema { name: String },
    #[error("table has no rows")]
    EmptyTable,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
