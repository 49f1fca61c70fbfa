//! Ordered-product factorizations of exponentials in the operator algebra
//! spanned by `{I, x², x∂, ∂²}`, their action on grid wavefunctions, and a
//! truncated Fock-basis oracle to check them against.
//!
//! - [`algebra`]: coefficients `(δ, α, β, γ)` from closed forms or by
//!   integrating the coefficient ODEs.
//! - [`grid`] and [`factors`]: elementary actions on sampled wavefunctions
//!   and the factor sequences for displacement, squeeze and oscillator
//!   propagation.
//! - [`fock`] and [`expm`]: dense matrices in the number basis, exponentiated
//!   directly.
//! - [`analytic`]: closed-form reference states.
//! - [`io`] and [`cli`]: file formats and the command-line driver.

pub mod algebra;
pub mod analytic;
pub mod cli;
pub mod expm;
pub mod factors;
pub mod fock;
pub mod grid;
pub mod io;

pub use algebra::{FactorizationCoefficients, GeneratorCoefficients, SqueezeParameter};
pub use factors::{FactoredOperator, OperatorFactor};
pub use grid::{Grid, WaveFunction};
