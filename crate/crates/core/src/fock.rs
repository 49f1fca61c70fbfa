//! Operators as dense matrices on a truncated number-state basis.
//!
//! Every matrix here is built from the truncated ladder operators, so the
//! last rows and columns carry truncation error. Comparisons between two
//! constructions should look only at a low-`n` block, well away from the
//! basis edge.

use std::f64::consts::PI;

use ndarray::{s, Array1, Array2};
use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{FactorizationCoefficients, GeneratorCoefficients, SqueezeParameter};
use crate::expm::{self, ExpmError};
use crate::grid::{Grid, WaveFunction};

pub const MIN_DIM: usize = 8;
pub const DEFAULT_DIM: usize = 128;
/// Largest number of Hermite functions evaluated by [`fock_to_position`].
pub const MAX_HERMITE_ORDER: usize = 512;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("Fock dimension {0} is below the minimum of {MIN_DIM}")]
    DimensionTooSmall(usize),
    #[error("{0} coefficients exceed the supported Hermite order {MAX_HERMITE_ORDER}")]
    TooManyCoefficients(usize),
    #[error("Hermite function of order {order} is non-finite at x = {x}")]
    Unstable { order: usize, x: f64 },
    #[error("matrix dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Expm(#[from] ExpmError),
}

/// Truncated number-state basis `|0⟩ … |N-1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    dim: usize,
}

impl Default for FockBasis {
    fn default() -> Self {
        Self { dim: DEFAULT_DIM }
    }
}

impl FockBasis {
    pub fn new(dim: usize) -> Result<Self, FockError> {
        if dim < MIN_DIM {
            return Err(FockError::DimensionTooSmall(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// A labelled dense `N×N` operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub label: String,
    pub matrix: Array2<Complex64>,
}

impl OperatorMatrix {
    pub fn new(label: impl Into<String>, matrix: Array2<Complex64>) -> Self {
        Self { label: label.into(), matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Array2<Complex64> {
        self.matrix.t().mapv(|v| v.conj())
    }

    /// Largest entry of `|A - A†|` (Hermitian) or `|A + A†|` (anti-Hermitian)
    /// over the leading `block×block` entries.
    pub fn hermiticity_defect(&self, anti: bool, block: usize) -> f64 {
        let adj = self.adjoint();
        let sign = if anti { 1.0 } else { -1.0 };
        let k = block.min(self.dim());
        let m = &self.matrix.slice(s![..k, ..k]);
        let a = &adj.slice(s![..k, ..k]);
        m.iter().zip(a.iter()).map(|(x, y)| (x + y * sign).norm()).fold(0.0, f64::max)
    }

    pub fn exp(&self) -> Result<OperatorMatrix, FockError> {
        Ok(OperatorMatrix::new(format!("exp({})", self.label), matrix_exponential(&self.matrix)?))
    }

    pub fn apply(&self, v: &Array1<Complex64>) -> Array1<Complex64> {
        self.matrix.dot(v)
    }
}

/// Largest `|a_ij - b_ij|` over the leading `block×block` entries.
pub fn block_max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>, block: usize) -> Result<f64, FockError> {
    if a.dim() != b.dim() {
        return Err(FockError::DimensionMismatch(a.nrows(), b.nrows()));
    }
    let k = block.min(a.nrows());
    Ok(a.slice(s![..k, ..k]).iter().zip(b.slice(s![..k, ..k]).iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// Annihilation and creation matrices, `a[n-1, n] = √n`.
pub fn ladder_matrices(dim: usize) -> (Array2<Complex64>, Array2<Complex64>) {
    let mut a = Array2::<Complex64>::zeros((dim, dim));
    for n in 1..dim {
        a[[n - 1, n]] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.t().mapv(|v| v.conj());
    (a, a_dag)
}

/// Position `X = (a + a†)/√2` and derivative `D = (a - a†)/√2`.
pub fn xp_matrices(dim: usize) -> (Array2<Complex64>, Array2<Complex64>) {
    let (a, a_dag) = ladder_matrices(dim);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &a_dag).mapv(|v| v * r);
    let d = (&a - &a_dag).mapv(|v| v * r);
    (x, d)
}

/// `b1 I + b2 X² + b3 X D + b4 D²` from truncated `X` and `D`.
pub fn generator_matrix(b: &GeneratorCoefficients, basis: FockBasis) -> OperatorMatrix {
    let n = basis.dim();
    let (x, d) = xp_matrices(n);
    let m = Array2::<Complex64>::eye(n).mapv(|v| v * b.b1)
        + x.dot(&x).mapv(|v| v * b.b2)
        + x.dot(&d).mapv(|v| v * b.b3)
        + d.dot(&d).mapv(|v| v * b.b4);
    OperatorMatrix::new("generator", m)
}

/// `(z a†a† - z* a a)/2`, the squeeze generator in ladder form.
pub fn squeeze_ladder_generator(z: &SqueezeParameter, basis: FockBasis) -> OperatorMatrix {
    let (a, a_dag) = ladder_matrices(basis.dim());
    let zc = z.z();
    let m = a_dag.dot(&a_dag).mapv(|v| v * zc * 0.5) - a.dot(&a).mapv(|v| v * zc.conj() * 0.5);
    OperatorMatrix::new("squeeze generator", m)
}

/// `diag(exp(-i (n + 1/2) t))`, the exact oscillator propagator.
pub fn oscillator_propagator(t: f64, basis: FockBasis) -> OperatorMatrix {
    let diag: Array1<Complex64> = (0..basis.dim()).map(|n| Complex64::from_polar(1.0, -(n as f64 + 0.5) * t)).collect();
    OperatorMatrix::new(format!("T({t})"), Array2::from_diag(&diag))
}

pub fn matrix_exponential(m: &Array2<Complex64>) -> Result<Array2<Complex64>, FockError> {
    Ok(expm::expm(&m.view())?)
}

/// Ratio of the working dimension to the requested one in [`factored_matrix`].
pub const WORKING_DIM_FACTOR: usize = 4;

/// `e^δ exp(iαX²) exp(βXD) exp(iγD²)` restricted to the first `N` states.
///
/// Each factor is an exponential of an unbounded operator, and truncating it
/// to `N` states corrupts the low block of the product long before it
/// corrupts any single factor. The product is therefore formed in a basis
/// [`WORKING_DIM_FACTOR`] times larger and then cut down to `N×N`.
pub fn factored_matrix(c: &FactorizationCoefficients, basis: FockBasis) -> Result<OperatorMatrix, FockError> {
    factored_matrix_in(c, basis, basis.dim() * WORKING_DIM_FACTOR)
}

/// [`factored_matrix`] with an explicit working dimension (at least `N`).
/// `working_dim == N` exponentiates every factor in the truncated basis itself.
pub fn factored_matrix_in(
    c: &FactorizationCoefficients,
    basis: FockBasis,
    working_dim: usize,
) -> Result<OperatorMatrix, FockError> {
    let n = basis.dim();
    if working_dim < n {
        return Err(FockError::DimensionMismatch(n, working_dim));
    }
    let eig = PositionEigensystem::new(working_dim);
    // Only the first n rows of the leftmost factor and the first n columns
    // of the rightmost factor reach the returned block.
    let quad_rows = eig.exp_x_squared(I * c.alpha, n);
    let kin_cols = eig.exp_d_squared_columns(I * c.gamma, n);
    let dil = dilation_exponential(c.beta, working_dim)?;
    let m = quad_rows.dot(&dil.dot(&kin_cols)).mapv(|v| v * c.delta.exp());
    Ok(OperatorMatrix::new("factored", m))
}

/// `exp(β X D)` in the truncated basis. Real `β` takes a real-arithmetic path.
fn dilation_exponential(beta: Complex64, dim: usize) -> Result<Array2<Complex64>, FockError> {
    let mut x = Array2::<f64>::zeros((dim, dim));
    let mut d = Array2::<f64>::zeros((dim, dim));
    for k in 1..dim {
        let v = (k as f64 / 2.0).sqrt();
        x[[k - 1, k]] = v;
        x[[k, k - 1]] = v;
        d[[k - 1, k]] = v;
        d[[k, k - 1]] = -v;
    }
    let xd = x.dot(&d);
    if beta.im == 0.0 {
        let e = expm::expm(&xd.mapv(|v| v * beta.re).view())?;
        Ok(e.mapv(|v| Complex64::new(v, 0.0)))
    } else {
        Ok(expm::expm(&xd.mapv(|v| beta * v).view())?)
    }
}

/// `X = V diag(nodes) Vᵀ` for the truncated position matrix.
///
/// `X` is the Jacobi matrix of the Hermite polynomials, so its eigenvalues
/// are Gauss–Hermite nodes and eigenvector components are Hermite values
/// at those nodes. Functions of `X²` and `D² = -U X² U†` (with
/// `U = diag(iⁿ)`) are then diagonal and exact.
#[derive(Debug, Clone)]
struct PositionEigensystem {
    nodes: Vec<f64>,
    /// Column `k` is the unit eigenvector for `nodes[k]`.
    vectors: Array2<f64>,
}

impl PositionEigensystem {
    fn new(dim: usize) -> Self {
        let off = |k: usize| ((k + 1) as f64 / 2.0).sqrt();
        let bound = (2.0 * dim as f64).sqrt() + 1.0;
        let nodes: Vec<f64> = (0..dim).map(|k| bisect_eigenvalue(dim, k, bound, off)).collect();
        let mut vectors = Array2::<f64>::zeros((dim, dim));
        for (k, &x) in nodes.iter().enumerate() {
            let mut v = vec![0.0; dim];
            v[0] = 1.0;
            if dim > 1 {
                v[1] = x / off(0);
            }
            for j in 1..dim - 1 {
                v[j + 1] = (x * v[j] - off(j - 1) * v[j - 1]) / off(j);
                if v[j + 1].abs() > 1e150 {
                    v[..=j + 1].iter_mut().for_each(|e| *e *= 1e-150);
                }
            }
            let norm = v.iter().map(|e| e * e).sum::<f64>().sqrt();
            for (j, e) in v.iter().enumerate() {
                vectors[[j, k]] = e / norm;
            }
        }
        Self { nodes, vectors }
    }

    fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// First `rows` rows of `exp(c X²)`.
    fn exp_x_squared(&self, c: Complex64, rows: usize) -> Array2<Complex64> {
        let dim = self.dim();
        if c == Complex64::new(0.0, 0.0) {
            return Array2::eye(dim).slice(s![..rows, ..]).to_owned();
        }
        let scaled = Array2::from_shape_fn((rows, dim), |(j, k)| {
            self.vectors[[j, k]] * (c * self.nodes[k] * self.nodes[k]).exp()
        });
        scaled.dot(&self.vectors.t().mapv(|v| Complex64::new(v, 0.0)))
    }

    /// First `cols` columns of `exp(c D²) = U exp(-c X²) U†`.
    fn exp_d_squared_columns(&self, c: Complex64, cols: usize) -> Array2<Complex64> {
        // exp(-c X²) is symmetric, so its first columns are its first rows transposed.
        let rows = self.exp_x_squared(-c, cols);
        Array2::from_shape_fn((self.dim(), cols), |(j, k)| rows[[k, j]] * i_power(j as i64 - k as i64))
    }
}

fn i_power(p: i64) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// `k`-th smallest eigenvalue of the zero-diagonal symmetric tridiagonal
/// matrix with off-diagonal `off(j)` between rows `j` and `j+1`, by Sturm
/// bisection on `[-bound, bound]`.
fn bisect_eigenvalue(dim: usize, k: usize, bound: f64, off: impl Fn(usize) -> f64) -> f64 {
    // Number of eigenvalues below x.
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = -x;
        for j in 0..dim {
            if j > 0 {
                let b = off(j - 1);
                d = -x - b * b / d;
            }
            if d == 0.0 {
                d = -f64::EPSILON * (bound + x.abs());
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Normalized Hermite functions `φ_0 … φ_{count-1}` at `x`.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(PI.powf(-0.25) * (-x * x / 2.0).exp());
    if count > 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// `Σ c_n φ_n(x)` sampled on `grid`.
pub fn fock_to_position(coefficients: &[Complex64], grid: Grid) -> Result<WaveFunction, FockError> {
    if coefficients.len() > MAX_HERMITE_ORDER {
        return Err(FockError::TooManyCoefficients(coefficients.len()));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for x in grid.points() {
        let phis = hermite_functions(coefficients.len(), x);
        if let Some(order) = phis.iter().position(|p| !p.is_finite()) {
            return Err(FockError::Unstable { order, x });
        }
        samples.push(coefficients.iter().zip(&phis).map(|(c, p)| c * *p).sum());
    }
    Ok(WaveFunction::new(grid, samples).expect("one sample per grid point"))
}

/// Projects a grid state onto `φ_0 … φ_{dim-1}` by rectangle-rule quadrature.
pub fn position_to_fock(psi: &WaveFunction, dim: usize) -> Result<Array1<Complex64>, FockError> {
    if dim > MAX_HERMITE_ORDER {
        return Err(FockError::TooManyCoefficients(dim));
    }
    let dx = psi.grid().dx();
    let mut out = Array1::<Complex64>::zeros(dim);
    for (x, v) in psi.grid().points().zip(psi.samples()) {
        let phis = hermite_functions(dim, x);
        for (o, p) in out.iter_mut().zip(&phis) {
            *o += v * (*p * dx);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{squeeze_factorization, time_displacement_factorization};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn max_abs(m: &Array2<Complex64>) -> f64 {
        m.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn basis_minimum() {
        assert_eq!(FockBasis::new(4), Err(FockError::DimensionTooSmall(4)));
        assert_eq!(FockBasis::new(8).unwrap().dim(), 8);
    }

    #[test]
    fn ladder_two_level() {
        let (a, a_dag) = ladder_matrices(2);
        assert_eq!(a, ndarray::array![[c(0.0), c(1.0)], [c(0.0), c(0.0)]]);
        assert_eq!(a_dag, a.t().to_owned());
    }

    #[test]
    fn ladder_commutator_and_vacuum() {
        let n = 12;
        let (a, a_dag) = ladder_matrices(n);
        let comm = a.dot(&a_dag) - a_dag.dot(&a);
        let eye = Array2::<Complex64>::eye(n);
        // √n·√n rounds, so exact only to an ulp or two.
        assert!(block_max_abs_diff(&comm, &eye, n - 1).unwrap() < 1e-14);
        assert!((comm[[n - 1, n - 1]] - c(1.0)).norm() > 0.5);

        let mut vac = Array1::<Complex64>::zeros(n);
        vac[0] = c(1.0);
        assert!(a.dot(&vac).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn position_and_derivative() {
        let (x, _) = xp_matrices(2);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(x, ndarray::array![[c(0.0), c(r)], [c(r), c(0.0)]]);

        let n = 16;
        let (x, d2) = xp_matrices(n);
        let comm = x.dot(&d2) - d2.dot(&x);
        let minus_eye = Array2::<Complex64>::eye(n).mapv(|v| -v);
        assert!(block_max_abs_diff(&comm, &minus_eye, n - 1).unwrap() < 1e-12);
        let xm = OperatorMatrix::new("x", x);
        let dm = OperatorMatrix::new("d", d2);
        assert!(xm.hermiticity_defect(false, n) < 1e-14);
        assert!(dm.hermiticity_defect(true, n) < 1e-14);
    }

    #[test]
    fn generator_examples() {
        let basis = FockBasis::new(16).unwrap();
        assert_eq!(max_abs(&generator_matrix(&GeneratorCoefficients::zero(), basis).matrix), 0.0);

        let g = generator_matrix(&GeneratorCoefficients::oscillator(), basis);
        let diag: Array1<Complex64> = (0..16).map(|n| Complex64::new(0.0, -(n as f64 + 0.5))).collect();
        let expected = Array2::from_diag(&diag);
        assert!(block_max_abs_diff(&g.matrix, &expected, 14).unwrap() < 1e-13);

        let z = SqueezeParameter::new(0.7, 0.0).unwrap();
        let g = generator_matrix(&GeneratorCoefficients::squeeze(&z), basis);
        assert!(g.hermiticity_defect(true, 14) < 1e-12);
        let ladder = squeeze_ladder_generator(&z, basis);
        assert!(block_max_abs_diff(&g.matrix, &ladder.matrix, 14).unwrap() < 1e-13);
    }

    #[test]
    fn squeeze_generator_forms_agree_for_complex_z() {
        let basis = FockBasis::new(20).unwrap();
        let z = SqueezeParameter::new(0.9, 2.1).unwrap();
        let g = generator_matrix(&GeneratorCoefficients::squeeze(&z), basis);
        let ladder = squeeze_ladder_generator(&z, basis);
        assert!(block_max_abs_diff(&g.matrix, &ladder.matrix, 18).unwrap() < 1e-13);
    }

    #[test]
    fn factored_identity() {
        let basis = FockBasis::new(10).unwrap();
        let m = factored_matrix(&FactorizationCoefficients::zero(), basis).unwrap();
        assert_eq!(m.matrix, Array2::<Complex64>::eye(10));
    }

    #[test]
    fn factored_time_matches_diagonal() {
        let basis = FockBasis::new(64).unwrap();
        let coeffs = time_displacement_factorization(0.3).unwrap();
        let m = factored_matrix(&coeffs, basis).unwrap();
        let exact = oscillator_propagator(0.3, basis);
        assert!(block_max_abs_diff(&m.matrix, &exact.matrix, 32).unwrap() < 1e-8);
    }

    #[test]
    fn factored_squeeze_matches_direct_exponential() {
        let basis = FockBasis::new(128).unwrap();
        let z = SqueezeParameter::new(0.5, 1.0).unwrap();
        let m = factored_matrix(&squeeze_factorization(&z, 1.0).unwrap(), basis).unwrap();
        let direct = squeeze_ladder_generator(&z, basis).exp().unwrap();
        assert!(block_max_abs_diff(&m.matrix, &direct.matrix, 32).unwrap() < 1e-6);
    }

    fn pade_factors(c: &FactorizationCoefficients, dim: usize) -> Array2<Complex64> {
        let (x, d) = xp_matrices(dim);
        let quad = matrix_exponential(&x.dot(&x).mapv(|v| v * I * c.alpha)).unwrap();
        let dil = matrix_exponential(&x.dot(&d).mapv(|v| v * c.beta)).unwrap();
        let kin = matrix_exponential(&d.dot(&d).mapv(|v| v * I * c.gamma)).unwrap();
        quad.dot(&dil).dot(&kin).mapv(|v| v * c.delta.exp())
    }

    #[test]
    fn position_eigensystem_diagonalizes_x() {
        for dim in [8, 64, 600] {
            let eig = PositionEigensystem::new(dim);
            let v = &eig.vectors;
            let orth = v.t().dot(v) - Array2::<f64>::eye(dim);
            assert!(orth.iter().fold(0.0f64, |m, e| m.max(e.abs())) < 1e-12, "dim {dim}");
            let (x, _) = xp_matrices(dim);
            let x = x.mapv(|e| e.re);
            let lambda = Array2::from_diag(&Array1::from(eig.nodes.clone()));
            let resid = x.dot(v) - v.dot(&lambda);
            assert!(resid.iter().fold(0.0f64, |m, e| m.max(e.abs())) < 1e-11, "dim {dim}");
            assert!(eig.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn structured_factors_match_pade() {
        let dim = 40;
        let eig = PositionEigensystem::new(dim);
        let (x, d) = xp_matrices(dim);
        let z = Complex64::new(0.05, 0.3);
        let quad = matrix_exponential(&x.dot(&x).mapv(|v| v * z)).unwrap();
        let kin = matrix_exponential(&d.dot(&d).mapv(|v| v * z)).unwrap();
        assert!(max_abs(&(eig.exp_x_squared(z, dim) - &quad)) < 1e-11);
        assert!(max_abs(&(eig.exp_d_squared_columns(z, dim) - &kin)) < 1e-11);
    }

    #[test]
    fn working_dim_equal_to_basis_is_plain_product() {
        let basis = FockBasis::new(24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4 {
            let mut coeffs = FactorizationCoefficients::zero();
            coeffs.delta = Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-1.0..1.0));
            coeffs.alpha = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.0..0.2));
            coeffs.beta = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.2..0.2));
            coeffs.gamma = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.0..0.2));
            let m = factored_matrix_in(&coeffs, basis, 24).unwrap();
            assert!(max_abs(&(&m.matrix - &pade_factors(&coeffs, 24))) < 1e-11);
        }
    }

    #[test]
    fn working_basis_removes_truncation_error() {
        let basis = FockBasis::new(64).unwrap();
        let coeffs = time_displacement_factorization(1.0).unwrap();
        let exact = oscillator_propagator(1.0, basis);
        let literal = factored_matrix_in(&coeffs, basis, 64).unwrap();
        let enlarged = factored_matrix(&coeffs, basis).unwrap();
        assert!(block_max_abs_diff(&literal.matrix, &exact.matrix, 32).unwrap() > 1e-2);
        assert!(block_max_abs_diff(&enlarged.matrix, &exact.matrix, 32).unwrap() < 1e-8);
        assert!(factored_matrix_in(&coeffs, basis, 32).is_err());
    }

    #[test]
    fn hermite_low_orders() {
        let grid = Grid::default();
        let psi0 = fock_to_position(&[c(1.0)], grid).unwrap();
        let psi1 = fock_to_position(&[c(0.0), c(1.0)], grid).unwrap();
        for (j, x) in grid.points().enumerate() {
            let g = PI.powf(-0.25) * (-x * x / 2.0).exp();
            assert!((psi0.samples()[j] - c(g)).norm() < 1e-12);
            assert!((psi1.samples()[j] - c(2f64.sqrt() * x * g)).norm() < 1e-12);
        }
    }

    #[test]
    fn hermite_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coeffs: Vec<Complex64> =
            (0..16).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let psi = fock_to_position(&coeffs, Grid::default()).unwrap();
        let vec_norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!((psi.norm() - vec_norm).abs() < 1e-8);

        let back = position_to_fock(&psi, 16).unwrap();
        for (a, b) in back.iter().zip(&coeffs) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn hermite_high_order_is_finite() {
        let phis = hermite_functions(MAX_HERMITE_ORDER, 30.0);
        assert!(phis.iter().all(|p| p.is_finite()));
        assert!(fock_to_position(&vec![c(0.0); MAX_HERMITE_ORDER + 1], Grid::default()).is_err());
    }
}
