//! Ordered-product coefficients for exponentials in span{I, x², x∂, ∂²}.
//!
//! An operator `exp[t (b1 I + b2 x² + b3 x∂ + b4 ∂²)]` is written as
//!
//! ```text
//! exp[δ I] exp[i α x²] exp[β x∂] exp[i γ ∂²]
//! ```
//!
//! The coefficients come either from closed forms (squeeze and harmonic
//! oscillator families) or from integrating the coupled first-order system
//! they satisfy, starting from zero at `t = 0`.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use thiserror::Error;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default `|cos t|` floor below which the oscillator factorization is
/// reported as singular.
pub const DEFAULT_CAUSTIC_EPS: f64 = 1e-9;

/// Default magnitude bound for integrated coefficients.
pub const DEFAULT_BLOWUP_BOUND: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("squeeze magnitude must be finite and non-negative, got {0}")]
    InvalidSqueeze(f64),
    #[error("squeeze scale {0} is not positive")]
    NonPositiveScale(f64),
    #[error("factorization is singular at t = {t} (|cos t| = {cos_abs:e}); split the evolution into shorter steps")]
    Caustic { t: f64, cos_abs: f64 },
    #[error("integration requires at least one step")]
    NoSteps,
    #[error("integration end time must be finite, got {0}")]
    NonFiniteTime(f64),
    #[error("coefficient magnitude {magnitude:e} exceeded bound {bound:e} at t = {t}")]
    BlowUp { t: f64, magnitude: f64, bound: f64 },
}

/// Squeeze parameter `z = r e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParameter {
    r: f64,
    phi: f64,
}

impl SqueezeParameter {
    pub fn new(r: f64, phi: f64) -> Result<Self, AlgebraError> {
        if !(r.is_finite() && r >= 0.0) || !phi.is_finite() {
            return Err(AlgebraError::InvalidSqueeze(r));
        }
        Ok(Self { r, phi })
    }

    pub fn identity() -> Self {
        Self { r: 0.0, phi: 0.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Real part of `z`.
    pub fn z1(&self) -> f64 {
        self.r * self.phi.cos()
    }

    /// Imaginary part of `z`.
    pub fn z2(&self) -> f64 {
        self.r * self.phi.sin()
    }

    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.phi)
    }
}

/// Weights of `I`, `x²`, `x∂`, `∂²` in the generator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneratorCoefficients {
    pub b1: Complex64,
    pub b2: Complex64,
    pub b3: Complex64,
    pub b4: Complex64,
}

impl GeneratorCoefficients {
    pub fn new(b1: Complex64, b2: Complex64, b3: Complex64, b4: Complex64) -> Self {
        Self { b1, b2, b3, b4 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `S(z) = exp[-z1 (x∂ + 1/2) + i z2 (x² + ∂²) / 2]`.
    pub fn squeeze(z: &SqueezeParameter) -> Self {
        let (z1, z2) = (z.z1(), z.z2());
        Self {
            b1: Complex64::new(-z1 / 2.0, 0.0),
            b2: Complex64::new(0.0, z2 / 2.0),
            b3: Complex64::new(-z1, 0.0),
            b4: Complex64::new(0.0, z2 / 2.0),
        }
    }

    /// `T(t) = exp[-i t (x² - ∂²) / 2]`, the oscillator with ħ = m = ω = 1.
    pub fn oscillator() -> Self {
        Self {
            b1: Complex64::new(0.0, 0.0),
            b2: Complex64::new(0.0, -0.5),
            b3: Complex64::new(0.0, 0.0),
            b4: Complex64::new(0.0, 0.5),
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.b1, self.b2, self.b3, self.b4].iter().all(|b| b.is_finite())
    }
}

/// Source of generator coefficients along the evolution parameter.
///
/// Constant generators implement this by ignoring `t`; any
/// `Fn(f64) -> GeneratorCoefficients` closure is a time-dependent generator.
pub trait Generator {
    fn at(&self, t: f64) -> GeneratorCoefficients;
}

impl Generator for GeneratorCoefficients {
    fn at(&self, _t: f64) -> GeneratorCoefficients {
        *self
    }
}

impl<F> Generator for F
where
    F: Fn(f64) -> GeneratorCoefficients,
{
    fn at(&self, t: f64) -> GeneratorCoefficients {
        self(t)
    }
}

/// The ordered-product parameters at evolution parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FactorizationCoefficients {
    pub delta: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub t: f64,
}

impl FactorizationCoefficients {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        [self.delta, self.alpha, self.beta, self.gamma]
    }

    /// Largest absolute difference over the four coefficients.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array().iter().zip(other.as_array().iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.as_array().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `exp(2δ - β)`, which equals one for unitary families.
    pub fn unitarity_residue(&self) -> Complex64 {
        (self.delta * 2.0 - self.beta).exp()
    }
}

/// Time derivatives of `(δ, α, β, γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoefficientRates {
    pub delta: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl Add<CoefficientRates> for FactorizationCoefficients {
    type Output = FactorizationCoefficients;

    fn add(self, d: CoefficientRates) -> Self::Output {
        FactorizationCoefficients {
            delta: self.delta + d.delta,
            alpha: self.alpha + d.alpha,
            beta: self.beta + d.beta,
            gamma: self.gamma + d.gamma,
            t: self.t,
        }
    }
}

impl Add for CoefficientRates {
    type Output = CoefficientRates;

    fn add(self, o: Self) -> Self {
        CoefficientRates {
            delta: self.delta + o.delta,
            alpha: self.alpha + o.alpha,
            beta: self.beta + o.beta,
            gamma: self.gamma + o.gamma,
        }
    }
}

impl Mul<f64> for CoefficientRates {
    type Output = CoefficientRates;

    fn mul(self, h: f64) -> Self {
        CoefficientRates { delta: self.delta * h, alpha: self.alpha * h, beta: self.beta * h, gamma: self.gamma * h }
    }
}

/// Squeeze scale `𝒮(t) = cosh rt + (z1/r) sinh rt`.
///
/// `z1/r` is taken as `cos φ`, so `r = 0` gives exactly 1.
pub fn squeeze_scale(z: &SqueezeParameter, t: f64) -> f64 {
    let rt = z.r * t;
    rt.cosh() + z.phi.cos() * rt.sinh()
}

/// `𝒮(1)` written as `e^r cos²(φ/2) + e^{-r} sin²(φ/2)`.
pub fn squeeze_scale_half_angle(z: &SqueezeParameter) -> f64 {
    let (s, c) = (z.phi / 2.0).sin_cos();
    z.r.exp() * c * c + (-z.r).exp() * s * s
}

/// Closed-form coefficients for `S(z)` at evolution parameter `t`
/// (the squeeze operator itself is `t = 1`).
pub fn squeeze_factorization(z: &SqueezeParameter, t: f64) -> Result<FactorizationCoefficients, AlgebraError> {
    let scale = squeeze_scale(z, t);
    if !(scale > 0.0) {
        return Err(AlgebraError::NonPositiveScale(scale));
    }
    // z2/(2r) sinh(rt) with z2/r = sin φ.
    let alpha = z.phi.sin() * (z.r * t).sinh() / (2.0 * scale);
    let beta = -scale.ln();
    Ok(FactorizationCoefficients {
        delta: Complex64::new(beta / 2.0, 0.0),
        alpha: Complex64::new(alpha, 0.0),
        beta: Complex64::new(beta, 0.0),
        gamma: Complex64::new(alpha, 0.0),
        t,
    })
}

/// Closed-form coefficients for the oscillator propagator `T(t)`.
///
/// Uses the principal branch of `ln cos t`, so `β` and `δ` pick up an
/// imaginary part once `cos t < 0`. Grid evolution should instead compose
/// steps with `|t/k| < π/2`.
pub fn time_displacement_factorization(t: f64) -> Result<FactorizationCoefficients, AlgebraError> {
    time_displacement_factorization_with(t, DEFAULT_CAUSTIC_EPS)
}

pub fn time_displacement_factorization_with(
    t: f64,
    caustic_eps: f64,
) -> Result<FactorizationCoefficients, AlgebraError> {
    let (sin, cos) = t.sin_cos();
    if cos.abs() < caustic_eps {
        return Err(AlgebraError::Caustic { t, cos_abs: cos.abs() });
    }
    let tan = sin / cos;
    let beta = -Complex64::new(cos, 0.0).ln();
    Ok(FactorizationCoefficients {
        delta: beta / 2.0,
        alpha: Complex64::new(-tan / 2.0, 0.0),
        beta,
        gamma: Complex64::new(tan / 2.0, 0.0),
        t,
    })
}

/// Right-hand side of the coefficient ODE system, solved for the rates:
///
/// ```text
/// α' = -i b2 + 2 b3 α + 4i b4 α²
/// β' = b3 + 4i b4 α
/// γ' = -i b4 e^{2β}
/// δ' = b1 + 2i b4 α
/// ```
pub fn wei_norman_rhs(c: &FactorizationCoefficients, b: &GeneratorCoefficients) -> CoefficientRates {
    let a = c.alpha;
    let b4a = I * b.b4 * a;
    CoefficientRates {
        alpha: -I * b.b2 + b.b3 * a * 2.0 + b4a * a * 4.0,
        beta: b.b3 + b4a * 4.0,
        gamma: -I * b.b4 * (c.beta * 2.0).exp(),
        delta: b.b1 + b4a * 2.0,
    }
}

/// Samples `(t, coefficients)` produced by the integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTrajectory {
    samples: Vec<FactorizationCoefficients>,
}

impl CoefficientTrajectory {
    pub fn samples(&self) -> &[FactorizationCoefficients] {
        &self.samples
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|c| c.t)
    }

    pub fn terminal(&self) -> &FactorizationCoefficients {
        self.samples.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub blowup_bound: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { blowup_bound: DEFAULT_BLOWUP_BOUND }
    }
}

/// Integrates the coefficient system from zero at `t = 0` to `t_end` with
/// fixed-step classical RK4.
pub fn integrate_wei_norman<G: Generator + ?Sized>(
    generator: &G,
    t_end: f64,
    steps: usize,
) -> Result<CoefficientTrajectory, AlgebraError> {
    integrate_wei_norman_with(generator, t_end, steps, IntegratorOptions::default())
}

pub fn integrate_wei_norman_with<G: Generator + ?Sized>(
    generator: &G,
    t_end: f64,
    steps: usize,
    opts: IntegratorOptions,
) -> Result<CoefficientTrajectory, AlgebraError> {
    if steps == 0 {
        return Err(AlgebraError::NoSteps);
    }
    if !t_end.is_finite() {
        return Err(AlgebraError::NonFiniteTime(t_end));
    }
    let h = t_end / steps as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut y = FactorizationCoefficients::zero();
    samples.push(y);

    for i in 0..steps {
        let t = i as f64 * h;
        let b_start = generator.at(t);
        let b_mid = generator.at(t + 0.5 * h);
        let b_end = generator.at(t + h);

        let k1 = wei_norman_rhs(&y, &b_start);
        let k2 = wei_norman_rhs(&(y + k1 * (0.5 * h)), &b_mid);
        let k3 = wei_norman_rhs(&(y + k2 * (0.5 * h)), &b_mid);
        let k4 = wei_norman_rhs(&(y + k3 * h), &b_end);

        y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        // Pin the last sample to t_end exactly.
        y.t = if i + 1 == steps { t_end } else { (i + 1) as f64 * h };

        let magnitude = y.max_abs();
        if !(magnitude <= opts.blowup_bound) {
            return Err(AlgebraError::BlowUp { t: y.t, magnitude, bound: opts.blowup_bound });
        }
        samples.push(y);
    }
    Ok(CoefficientTrajectory { samples })
}
