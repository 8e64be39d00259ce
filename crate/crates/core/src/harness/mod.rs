//! Experiment harness: synthetic data, end-to-end runs, parameter grids,
//! noise sweeps and transform spectra, all reported as CSV.

mod experiment;
mod pipeline;
mod search;
mod spectrum;
mod synthetic;

pub use experiment::{load_dataset, DataSource, Dataset, ExperimentSpec, NoiseKind, NoiseSchedule};
pub use pipeline::{
    format_results, mask_runtime, parse_results, run_on_dataset, run_pipeline, PipelineOutcome, ResultRow, Variant,
    RESULTS_COLUMNS, RESULTS_FILE, RESULTS_VERSION, TRACE_FILE,
};
pub use search::{default_grid, grid_search, noise_sweep, GridPoint, GridTable, SweepRow, GRID_FILE, SWEEP_FILE};
pub use spectrum::{concentration, format_spectrum, spectrum_dump, SpectrumDump};
pub use synthetic::{generate_synthetic, SyntheticParams};
