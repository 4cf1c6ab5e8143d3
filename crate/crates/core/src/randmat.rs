//! Complex-Gaussian sampling and covariance models.
//!
//! Every stochastic routine in the crate draws from [`Rng`], a seeded
//! ChaCha8 stream. Parallel Monte-Carlo work never shares a generator;
//! instead each chunk of samples gets its own sub-stream via
//! [`Rng::substream`], which is a pure function of the parent key and the
//! chunk index.

use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::linalg;

/// Relative tolerance of the Hermitian and PSD checks.
pub const PSD_TOLERANCE: f64 = 1e-10;

pub type ComplexVector = DVector<Complex64>;

/// Deterministic pseudorandom generator seeded by a 64-bit integer.
#[derive(Clone, Debug)]
pub struct Rng {
    key: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self { key: seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent child stream `index` of this generator.
    ///
    /// Depends only on the seed this generator was created from, not on how
    /// many values have been drawn from it.
    pub fn substream(&self, index: u64) -> Rng {
        Rng::seed_from_u64(splitmix64(self.key ^ splitmix64(index)))
    }

    /// Draws a fresh key from this stream and returns a generator seeded by
    /// it. Advances `self`.
    pub fn fork(&mut self) -> Rng {
        let key = self.inner.next_u64();
        Rng::seed_from_u64(key)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// One draw of CN(0, 1).
    pub fn complex_normal(&mut self) -> Complex64 {
        let re = self.standard_normal();
        let im = self.standard_normal();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

#[derive(Clone, Debug)]
enum Factor {
    /// Square roots of the diagonal.
    Diagonal(Vec<f64>),
    /// Lower triangular Cholesky factor.
    Lower(DMatrix<Complex64>),
    /// `V·√Λ` from an eigen-decomposition with clipped eigenvalues.
    Dense(DMatrix<Complex64>),
}

impl Factor {
    fn apply(&self, w: &ComplexVector) -> ComplexVector {
        match self {
            Factor::Diagonal(s) => DVector::from_iterator(w.len(), s.iter().zip(w.iter()).map(|(a, b)| b * *a)),
            Factor::Lower(l) => {
                let n = w.len();
                let mut out = DVector::from_element(n, Complex64::new(0.0, 0.0));
                for j in 0..n {
                    let wj = w[j];
                    let col = l.column(j);
                    for i in j..n {
                        out[i] += col[i] * wj;
                    }
                }
                out
            }
            Factor::Dense(l) => l * w,
        }
    }

    fn to_matrix(&self) -> DMatrix<Complex64> {
        match self {
            Factor::Diagonal(s) => {
                DMatrix::from_diagonal(&DVector::from_iterator(s.len(), s.iter().map(|&v| Complex64::new(v, 0.0))))
            }
            Factor::Lower(l) | Factor::Dense(l) => l.clone(),
        }
    }
}

/// Hermitian positive-semidefinite N×N complex matrix.
///
/// Storage is Hermitian bit-for-bit and the diagonal is real. The sampling
/// factor is computed on first use and cached.
#[derive(Clone, Debug)]
pub struct CovarianceMatrix {
    mat: DMatrix<Complex64>,
    diagonal: bool,
    factor: OnceLock<Factor>,
}

impl CovarianceMatrix {
    /// Validates `mat` and stores its exactly-Hermitian part.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidMatrix(format!(
                "expected a non-empty square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let scale = linalg::frobenius(&mat);
        let tol = PSD_TOLERANCE * scale.max(f64::MIN_POSITIVE);
        let asym = linalg::frobenius(&(&mat - mat.adjoint()));
        if asym > tol {
            return Err(Error::InvalidMatrix(format!("not Hermitian (‖M − Mᴴ‖ = {asym:e})")));
        }
        let mat = linalg::hermitian_part(&mat);
        let diagonal = linalg::is_diagonal(&mat);
        let eig: Vec<f64> = if diagonal {
            (0..mat.nrows()).map(|i| mat[(i, i)].re).collect()
        } else {
            linalg::eigenvalues(&mat).iter().copied().collect()
        };
        let norm = eig.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOLERANCE * norm {
            return Err(Error::InvalidMatrix(format!("indefinite (min eigenvalue {min:e}, norm {norm:e})")));
        }
        if (0..mat.nrows()).any(|i| mat[(i, i)].re < 0.0) {
            return Err(Error::InvalidMatrix("negative diagonal entry".into()));
        }
        Ok(Self { mat, diagonal, factor: OnceLock::new() })
    }

    /// For matrices that are PSD by construction; only enforces exact
    /// Hermitian storage.
    pub(crate) fn from_hermitian_unchecked(mat: DMatrix<Complex64>) -> Self {
        let mat = linalg::hermitian_part(&mat);
        let diagonal = linalg::is_diagonal(&mat);
        Self { mat, diagonal, factor: OnceLock::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, value: f64) -> Self {
        assert!(value >= 0.0, "scaled identity needs a nonnegative scale");
        Self::from_hermitian_unchecked(DMatrix::from_diagonal_element(n, n, Complex64::new(value, 0.0)))
    }

    pub fn zeros(n: usize) -> Self {
        Self::scaled_identity(n, 0.0)
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidMatrix("diagonal entries must be finite and nonnegative".into()));
        }
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        Ok(Self::from_hermitian_unchecked(DMatrix::from_diagonal(&d)))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// The diagonal part as its own covariance matrix.
    pub fn diag_matrix(&self) -> CovarianceMatrix {
        let d = self.diag();
        Self::from_diagonal(&d).expect("diagonal of a PSD matrix is nonnegative")
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.mat)
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.diagonal {
            self.diag()
        } else {
            linalg::eigenvalues(&self.mat).iter().copied().collect()
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().into_iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius(&self.mat)
    }

    pub fn scaled(&self, c: f64) -> CovarianceMatrix {
        assert!(c >= 0.0, "covariance scale must be nonnegative");
        Self::from_hermitian_unchecked(&self.mat * Complex64::new(c, 0.0))
    }

    fn factor(&self) -> &Factor {
        self.factor.get_or_init(|| compute_factor(&self.mat, self.diagonal))
    }
}

fn compute_factor(m: &DMatrix<Complex64>, diagonal: bool) -> Factor {
    if diagonal {
        return Factor::Diagonal((0..m.nrows()).map(|i| m[(i, i)].re.max(0.0).sqrt()).collect());
    }
    if let Some(chol) = Cholesky::new(m.clone()) {
        return Factor::Lower(chol.unpack());
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut l = eig.eigenvectors;
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        l.column_mut(j).scale_mut(s);
    }
    Factor::Dense(l)
}

/// Exponential correlation model: entry (i, j) = rho^|i−j|.
pub fn exponential_correlation(n: usize, rho: f64) -> Result<CovarianceMatrix> {
    if n == 0 {
        return domain("dimension must be positive");
    }
    if !(0.0..1.0).contains(&rho) {
        return domain(format!("correlation coefficient must lie in [0, 1), got {rho}"));
    }
    let mat = DMatrix::from_fn(n, n, |i, j| Complex64::new(rho.powi(i.abs_diff(j) as i32), 0.0));
    Ok(CovarianceMatrix::from_hermitian_unchecked(mat))
}

/// Factor `L` with `L·Lᴴ = m`, valid for rank-deficient `m`.
pub fn psd_factor(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    Ok(CovarianceMatrix::new(m.clone())?.factor().to_matrix())
}

/// One draw of CN(0, m).
pub fn sample_cn(m: &CovarianceMatrix, rng: &mut Rng) -> ComplexVector {
    let w = DVector::from_fn(m.dim(), |_, _| rng.complex_normal());
    m.factor().apply(&w)
}

/// One draw of the scalar CN(0, variance).
pub fn sample_scalar_cn(variance: f64, rng: &mut Rng) -> Result<Complex64> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return domain(format!("variance must be finite and nonnegative, got {variance}"));
    }
    Ok(rng.complex_normal() * variance.sqrt())
}
