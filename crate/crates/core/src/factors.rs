//! Factored operators as sequences of elementary grid actions.

use log::warn;
use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{self, AlgebraError, FactorizationCoefficients, SqueezeParameter, DEFAULT_CAUSTIC_EPS};
use crate::grid::{self, GridError, Phase, WaveFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("factor {index} ({factor:?}) failed: {source}")]
    InChain { index: usize, factor: OperatorFactor, source: GridError },
    #[error("coefficients are not realizable on the grid: {0}")]
    NotRealizable(String),
    #[error("time step {step} reaches |t| >= π/2; use at least {min_substeps} substeps")]
    StepTooLong { step: f64, min_substeps: usize },
    #[error("substep count must be at least 1")]
    NoSubsteps,
}

/// One elementary action on a grid wavefunction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorFactor {
    /// `ψ(x) → ψ(x + c)`
    Shift(f64),
    /// `ψ(x) → ψ(λ x)`
    Dilation(f64),
    /// `exp[c ∂²]` with `Re c >= 0`
    SpectralD2(Complex64),
    /// `exp[i a x²]`
    QuadraticPhase(f64),
    /// `exp[i p x]`
    LinearPhase(f64),
    Scalar(Complex64),
}

impl OperatorFactor {
    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction, GridError> {
        match *self {
            OperatorFactor::Shift(c) => grid::apply_shift(psi, c),
            OperatorFactor::Dilation(lambda) => grid::apply_dilation(psi, lambda),
            OperatorFactor::SpectralD2(c) => grid::apply_spectral_d2(psi, c),
            OperatorFactor::QuadraticPhase(a) => Ok(grid::apply_phase(psi, Phase::Quadratic(a))),
            OperatorFactor::LinearPhase(p) => Ok(grid::apply_phase(psi, Phase::Linear(p))),
            OperatorFactor::Scalar(s) => Ok(grid::apply_phase(psi, Phase::Scalar(s))),
        }
    }
}

/// Operators with a known factor sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactoredOperator {
    /// `D(α)` with `α = (x0 + i p0)/√2`.
    Displacement { x0: f64, p0: f64 },
    /// `S(z)`.
    Squeeze(SqueezeParameter),
    /// `T(t)` composed from `substeps` equal steps.
    TimeDisplacement { t: f64, substeps: usize },
}

/// Longest single time step used by [`substeps_for`].
pub const MAX_TIME_STEP: f64 = std::f64::consts::FRAC_PI_4;

/// Number of equal substeps keeping each step within [`MAX_TIME_STEP`].
pub fn substeps_for(t: f64) -> usize {
    ((t.abs() / MAX_TIME_STEP).ceil() as usize).max(1)
}

/// Factor sequence for the ordered product `exp[δ] exp[iαx²] exp[βx∂] exp[iγ∂²]`,
/// in application order. Identity factors are dropped except the scalar.
pub fn factors_from_coefficients(c: &FactorizationCoefficients) -> Result<Vec<OperatorFactor>, FactorError> {
    const REAL_TOL: f64 = 1e-14;
    if c.alpha.im.abs() > REAL_TOL || c.gamma.im.abs() > REAL_TOL {
        return Err(FactorError::NotRealizable(format!("alpha = {}, gamma = {} must be real", c.alpha, c.gamma)));
    }
    if c.beta.im.abs() > REAL_TOL {
        return Err(FactorError::NotRealizable(format!("beta = {} must be real", c.beta)));
    }
    let mut out = Vec::with_capacity(4);
    if c.gamma.re != 0.0 {
        out.push(OperatorFactor::SpectralD2(Complex64::new(0.0, c.gamma.re)));
    }
    if c.beta.re != 0.0 {
        out.push(OperatorFactor::Dilation(c.beta.re.exp()));
    }
    if c.alpha.re != 0.0 {
        out.push(OperatorFactor::QuadraticPhase(c.alpha.re));
    }
    out.push(OperatorFactor::Scalar(c.delta.exp()));
    Ok(out)
}

/// Elementary factors for `op`, first-applied first.
pub fn build_factor_sequence(op: &FactoredOperator) -> Result<Vec<OperatorFactor>, FactorError> {
    match *op {
        FactoredOperator::Displacement { x0, p0 } => {
            let mut out = Vec::with_capacity(3);
            if x0 != 0.0 {
                out.push(OperatorFactor::Shift(-x0));
            }
            if p0 != 0.0 {
                out.push(OperatorFactor::LinearPhase(p0));
            }
            out.push(OperatorFactor::Scalar(Complex64::from_polar(1.0, -x0 * p0 / 2.0)));
            Ok(out)
        }
        FactoredOperator::Squeeze(z) => factors_from_coefficients(&algebra::squeeze_factorization(&z, 1.0)?),
        FactoredOperator::TimeDisplacement { t, substeps } => {
            if substeps == 0 {
                return Err(FactorError::NoSubsteps);
            }
            let step = t / substeps as f64;
            let coeffs = algebra::time_displacement_factorization(step)?;
            if step.cos() <= DEFAULT_CAUSTIC_EPS {
                let min_substeps = (t.abs() / std::f64::consts::FRAC_PI_2).floor() as usize + 1;
                return Err(FactorError::StepTooLong { step, min_substeps });
            }
            let one = factors_from_coefficients(&coeffs)?;
            Ok(one.iter().copied().cycle().take(one.len() * substeps).collect())
        }
    }
}

/// Largest window enlargement [`apply_chain`] will use.
pub const MAX_PADDING: usize = 8;

/// Window enlargement needed by `factors`.
///
/// A spectral step followed by `Dilation(λ)` with `λ > 1` passes through a
/// state `λ` times wider than the one the dilation produces, so a result
/// that fits the grid can still wrap around it half-way through the chain.
pub fn chain_padding(factors: &[OperatorFactor]) -> usize {
    let mut spread_seen = false;
    let mut widest: f64 = 1.0;
    for factor in factors {
        match *factor {
            OperatorFactor::SpectralD2(_) => spread_seen = true,
            OperatorFactor::Dilation(lambda) if spread_seen => widest = widest.max(lambda),
            _ => {}
        }
    }
    let needed = (widest.ceil() as usize).next_power_of_two();
    if needed > MAX_PADDING {
        warn!("chain needs a {needed}x window; padding capped at {MAX_PADDING}x");
    }
    needed.min(MAX_PADDING)
}

/// Applies `factors` in order; index 0 acts first.
///
/// The work is done on a zero-padded window (see [`chain_padding`]) and
/// cropped back to the input grid afterwards.
pub fn apply_chain(psi: &WaveFunction, factors: &[OperatorFactor]) -> Result<WaveFunction, FactorError> {
    let padding = chain_padding(factors);
    if padding > 1 {
        let padded = psi.zero_padded(padding)?;
        return Ok(apply_chain_in_place(&padded, factors)?.cropped(padding)?);
    }
    apply_chain_in_place(psi, factors)
}

fn apply_chain_in_place(psi: &WaveFunction, factors: &[OperatorFactor]) -> Result<WaveFunction, FactorError> {
    let mut state = psi.clone();
    for (index, factor) in factors.iter().enumerate() {
        state = factor.apply(&state).map_err(|source| FactorError::InChain { index, factor: *factor, source })?;
    }
    Ok(state)
}

/// Convenience: build and apply the factors of `op`.
pub fn apply_operator(psi: &WaveFunction, op: &FactoredOperator) -> Result<WaveFunction, FactorError> {
    apply_chain(psi, &build_factor_sequence(op)?)
}
