//! Littlewood-Paley blocks, Besov norms, paraproducts and inequality verifiers.

mod decomposition;
mod inequalities;

pub use decomposition::{
    besov_norm, decompose, decompose_with, lp_sobolev_norm, paraproduct_split, partial_sum,
    sharp_block_index, Cutoff, DyadicDecomposition, NormIndex,
};
pub use inequalities::{
    besov_21, estimate_constants, verify_inequality, write_reports_csv, Inequality,
    InequalityParams, InequalityReport,
};
