//! Experiment-grid runner for the chain location solver: runs grids of
//! (n, p, π, decay) cells, writes the results CSV, renders the proportion and
//! run-time tables, and dumps facility locations for plotting.

pub mod grid;
pub mod locations;
pub mod tables;

pub use grid::{run_cell, run_grid, ExperimentGrid, GridCell, GridReport, InstanceSource, ResultRecord};
pub use locations::{cluster_coincidences, emit_locations, LocationRow};
pub use tables::{read_results_csv, render_tables, results_csv, write_results_csv};
