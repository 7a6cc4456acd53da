//! Linear response of the average central state.
//!
//! Double integrals over f(τ−τ′) on \[0, t\]² are reduced to single integrals
//! in the difference variable s:
//!
//! * ∫₀ᵗ dτ ∫₀^τ dτ′ f(τ−τ′) = ∫₀ᵗ (t−s) f(s) ds
//! * ∫∫₀ᵗ f(τ−τ′) = ∫₀ᵗ (t−s) \[f(s) + f(−s)\] ds
//!
//! and integrated with the trapezoid rule.

mod kernel;
mod response;

pub use kernel::{
    CorrelationKernel, diagonal_map, kernel_operator, kernel_scalar, s_function,
    spectator_diagonal_map, spectator_s_function,
};
pub use response::{
    EnvironmentKernel, LinearResponseModel, LinearResponseReport, PurityRoute, QuadratureSpec,
    avg_aj, avg_ai, avg_density_lr, avg_purity_lr, purity_difference_lr, purity_of_avg_lr,
};
