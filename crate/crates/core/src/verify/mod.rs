//! Exact small-instance oracles: Rademacher moments of `V̄`, second moments
//! of integrated Hermite polynomials, low-degree likelihood-ratio norms, and
//! a Monte Carlo check of the tensor PCA likelihood-ratio expansion.
//!
//! Everything except [`tpca_llr_hermite_check`] is exact enumeration plus the
//! closed form `E[H_i(a) H_j(b)] = ρ^i δ_{ij}` for standard Gaussians with
//! correlation `ρ`.

mod calibration;
mod integrated;
mod ldlr;
mod rademacher;
mod report;
mod tpca;

pub use calibration::{calibrate_constants, local_ratio_excess, mog_local_grid, ngca_ldlr_bounds, CalibratedConstants, SAFETY_FACTOR};
pub use integrated::{
    correlated_hermite, integrated_hermite_cross, integrated_hermite_norm, multi_integrated_hermite_cross,
    PriorFunction, MAX_DOUBLE_ENUM_DIM,
};
pub use ldlr::{ldlr_norm_exact, LdlrInstance, LdlrProblem};
pub use rademacher::{check_rademacher_bounds, rademacher_mean_moment, MAX_ENUM_DIM};
pub use report::{CheckRecord, CheckReport};
pub use tpca::{tpca_llr_hermite_check, LlrCoefficientCheck};
