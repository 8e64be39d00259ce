//! The TBTLRR solver: dictionary construction and ADMM.

mod admm;
mod config;
mod dictionary;
mod trace;

pub use admm::{
    half_norm_sum, run_admm, solve, solve_with_transform, Block, Problem, SolverReport, SolverState,
};
pub use config::{DictMode, SolverConfig};
pub use dictionary::{
    build_dictionary, default_trpca_lambda, denoise_dictionary, trpca, Dictionary, TrpcaResult,
    SKINNY_RTOL,
};
pub use trace::{format_trace, write_trace, TRACE_VERSION};
