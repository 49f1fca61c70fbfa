//! Closed-form reference states in natural oscillator units.
//!
//! Each state is available as printed and, where the printed prefactor is
//! not unit-normalized, through [`normalized_samples`] / [`normalized_density`]
//! which renormalize by quadrature on a grid. Comparisons against grid or
//! Fock-basis evolution should use the renormalized forms.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::{squeeze_scale, SqueezeParameter};
use crate::grid::{Grid, WaveFunction};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Harmonic-oscillator ground state `π^{-1/4} exp(-x²/2)`.
pub fn psi0(x: f64) -> Complex64 {
    Complex64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0)
}

/// Displacement `(x0, p0)` and squeeze `z` for `D(α) S(z) ψ0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedStateSpec {
    pub x0: f64,
    pub p0: f64,
    pub z: SqueezeParameter,
}

impl SqueezedStateSpec {
    pub fn new(x0: f64, p0: f64, z: SqueezeParameter) -> Self {
        Self { x0, p0, z }
    }

    pub fn coherent(x0: f64, p0: f64) -> Self {
        Self { x0, p0, z: SqueezeParameter::identity() }
    }

    /// `κ = z2 sinh r / (2 r 𝒮)`, with `z2/r = sin φ`.
    pub fn kappa(&self) -> f64 {
        let scale = squeeze_scale(&self.z, 1.0);
        self.z.phi().sin() * self.z.r().sinh() / (2.0 * scale)
    }
}

/// `D(α) S(z) ψ0` in closed form.
pub fn psi_ss(x: f64, spec: &SqueezedStateSpec) -> Complex64 {
    let scale = squeeze_scale(&spec.z, 1.0);
    let kappa = spec.kappa();
    let chirp = Complex64::new(1.0, 2.0 * kappa);
    let width = (chirp * (2.0 * scale * scale)).inv() - I * kappa;
    let dx = x - spec.x0;
    let phase = Complex64::from_polar(1.0, -spec.x0 * spec.p0 / 2.0 + spec.p0 * x);
    PI.powf(-0.25) * phase / (chirp * scale).sqrt() * (-width * dx * dx).exp()
}

/// Real-squeeze state with width `s = e^r`:
/// `(√π s)^{-1/2} exp[-(x - x0)²/(2s²)] exp[i p0 x] exp[-i x0 p0 / 2]`.
///
/// The momentum phase follows the displacement operator convention
/// `D = exp[-i x0 p0/2] exp[i p0 x] exp[-x0 ∂]`.
pub fn psi_cs(x: f64, x0: f64, p0: f64, s: f64) -> Complex64 {
    let amp = (PI.sqrt() * s).powf(-0.5) * (-(x - x0).powi(2) / (2.0 * s * s)).exp();
    Complex64::from_polar(amp, p0 * x - x0 * p0 / 2.0)
}

/// `T(t)` applied to the coherent state centered at `(x0, p0)`.
pub fn coherent_evolved(x: f64, t: f64, x0: f64, p0: f64) -> Complex64 {
    let (sin, cos) = t.sin_cos();
    let center = x0 * cos + p0 * sin;
    let momentum = p0 * cos - x0 * sin;
    let amp = PI.powf(-0.25) * (-0.5 * (x - center).powi(2)).exp();
    Complex64::from_polar(amp, -t / 2.0 + x * momentum - 0.5 * center * momentum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn from_sign(sign: i32) -> Option<Self> {
        match sign {
            1 => Some(Parity::Even),
            -1 => Some(Parity::Odd),
            _ => None,
        }
    }
}

/// Even/odd superposition of real-squeezed states at `±x0`, width `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenOddSpec {
    pub x0: f64,
    pub s: f64,
    pub parity: Parity,
}

impl EvenOddSpec {
    pub fn new(x0: f64, s: f64, parity: Parity) -> Option<Self> {
        (s > 0.0 && s.is_finite() && x0.is_finite()).then_some(Self { x0, s, parity })
    }

    /// `d(t)² = s² cos²t + sin²t / s²`.
    pub fn d_squared(&self, t: f64) -> f64 {
        let (sin, cos) = t.sin_cos();
        self.s * self.s * cos * cos + sin * sin / (self.s * self.s)
    }

    /// Overlap `exp(-x0²/s²)` of the two components at `t = 0`.
    pub fn overlap(&self) -> f64 {
        (-self.x0 * self.x0 / (self.s * self.s)).exp()
    }

    /// The unit-norm state at `t = 0`.
    pub fn initial(&self, x: f64) -> Complex64 {
        let sign = self.parity.sign();
        let norm = (2.0 * (1.0 + sign * self.overlap())).sqrt();
        (psi_cs(x, self.x0, 0.0, self.s) + psi_cs(x, -self.x0, 0.0, self.s) * sign) / norm
    }

    /// The Gaussian pair without its x-independent normalization, in the
    /// form that stays finite at `cos t = 0`.
    ///
    /// Writing `E±` for the exponents of the two components, the `tan t`
    /// pieces combine into `sin t cos t [x²(1 - s⁴) + x0²] ∓ 2 x x0 sin t`,
    /// so no term diverges.
    fn pair(&self, x: f64, t: f64) -> Complex64 {
        let (sin, cos) = t.sin_cos();
        let s2 = self.s * self.s;
        let den = s2 * s2 * cos * cos + sin * sin;
        let common_im = sin * cos * (x * x * (1.0 - s2 * s2) + self.x0 * self.x0);
        let cross_im = 2.0 * x * self.x0 * sin;
        let shifted = self.x0 * cos;
        let exponent = |sgn: f64| {
            let re = -(x - sgn * shifted).powi(2) * s2 / (2.0 * den);
            let im = (common_im - sgn * cross_im) / (2.0 * den);
            Complex64::new(re, im).exp()
        };
        exponent(1.0) + exponent(-1.0) * self.parity.sign()
    }

    /// `sqrt((s² cos t - i sin t)/(s⁴ cos² t + sin² t))`, the x-independent
    /// factor shared by both normalizations.
    fn spread_factor(&self, t: f64) -> Complex64 {
        let (sin, cos) = t.sin_cos();
        let s2 = self.s * self.s;
        (Complex64::new(s2 * cos, -sin) / (s2 * s2 * cos * cos + sin * sin)).sqrt()
    }
}

/// `T(t) ψ_{s±}` with the normalization constant taken from the initial
/// state, `1 ± exp(-x0²/s²)`. This has unit norm for all `t` and is finite
/// at `cos t = 0`.
pub fn psi_spm(x: f64, t: f64, spec: &EvenOddSpec) -> Complex64 {
    let sign = spec.parity.sign();
    let norm = (spec.s / (2.0 * PI.sqrt() * (1.0 + sign * spec.overlap()))).sqrt();
    spec.spread_factor(t) * norm * spec.pair(x, t)
}

/// `T(t) ψ_{s±}` with the normalization printed alongside the closed form,
/// `1 ± exp(-x0² cos² t)`. Its norm varies with `t`, and for the odd state
/// it diverges at `cos t = 0`; see the normalization notes in the README.
pub fn psi_spm_as_printed(x: f64, t: f64, spec: &EvenOddSpec) -> Complex64 {
    let sign = spec.parity.sign();
    let cos = t.cos();
    let norm = spec.s / (2.0 * PI.sqrt() * (1.0 + sign * (-spec.x0 * spec.x0 * cos * cos).exp()));
    spec.spread_factor(t) * norm.sqrt() * spec.pair(x, t)
}

/// Probability density of the evolved even/odd state, as printed:
///
/// ```text
/// exp[-(x² + x0² cos²t)/d²] / (√π d [1 ± d e^{-x0²/s²}])
///     × { cosh(2 x x0 cos t / d²) ± cos(2 x x0 sin t / (d² s²)) }
/// ```
///
/// The raw integral is `(1 ± e^{-x0²/s²}) / (1 ± d e^{-x0²/s²})`
/// ([`rho_spm_raw_integral`]), not one.
pub fn rho_spm(x: f64, t: f64, spec: &EvenOddSpec) -> f64 {
    let sign = spec.parity.sign();
    let (sin, cos) = t.sin_cos();
    let d2 = spec.d_squared(t);
    let d = d2.sqrt();
    let c = spec.x0 * cos;
    // exp(-(x² + c²)/d²) cosh(2xc/d²) = [exp(-(x-c)²/d²) + exp(-(x+c)²/d²)] / 2
    let hyperbolic = 0.5 * ((-(x - c).powi(2) / d2).exp() + (-(x + c).powi(2) / d2).exp());
    let oscillating = (-(x * x + c * c) / d2).exp() * (2.0 * x * spec.x0 * sin / (d2 * spec.s * spec.s)).cos();
    (hyperbolic + sign * oscillating) / (PI.sqrt() * d * (1.0 + sign * d * spec.overlap()))
}

/// Closed-form integral over `x` of [`rho_spm`].
pub fn rho_spm_raw_integral(t: f64, spec: &EvenOddSpec) -> f64 {
    let sign = spec.parity.sign();
    let e = spec.overlap();
    (1.0 + sign * e) / (1.0 + sign * spec.d_squared(t).sqrt() * e)
}

/// Phase acquired by `sin(π n x)` under `exp[i t ∂²/2]`.
pub fn box_mode_phase(n: u32, t: f64) -> Complex64 {
    let k = PI * n as f64;
    Complex64::from_polar(1.0, -k * k * t / 2.0)
}

/// Rectangle-rule integral of `f` over `grid`.
pub fn quadrature(grid: &Grid, f: impl Fn(f64) -> f64) -> f64 {
    grid.points().map(f).sum::<f64>() * grid.dx()
}

/// Samples `f` on `grid` and scales to unit L2 norm.
pub fn normalized_samples(grid: Grid, f: impl Fn(f64) -> Complex64) -> WaveFunction {
    WaveFunction::from_fn(grid, f).normalized()
}

/// Samples a density on `grid` and scales it to unit integral.
pub fn normalized_density(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let values: Vec<f64> = grid.points().map(f).collect();
    let total = values.iter().sum::<f64>() * grid.dx();
    values.into_iter().map(|v| v / total).collect()
}
