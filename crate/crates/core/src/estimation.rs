//! Uplink pilot model with distortion noise and the distortion-aware LMMSE
//! channel estimator.
//!
//! The received pilot is `z = h·(d + η_t) + ν + η_r` where the transmit
//! distortion `η_t ~ CN(0, κ_t^UT·p)` and the receive distortion
//! `η_r ~ CN(0, κ_r^BS·p·diag(|h₁|², …, |h_N|²))` both scale with the
//! signal power. The estimator works with the system matrix
//!
//! ```text
//! M = p(1 + κ_t^UT)·R + p·κ_r^BS·R_diag + S      (= Cov(z))
//! A = d*·R·M⁻¹
//! C = R − p·R·M⁻¹·R
//! ```

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::linalg;
use crate::montecarlo::{run_chunks, Moments, MonteCarloEstimate};
use crate::randmat::{sample_cn, sample_scalar_cn, ComplexVector, CovarianceMatrix, Rng};

/// Impairment levels above this are unusual for real transceivers.
pub const TYPICAL_KAPPA_MAX: f64 = 0.03;

/// Distortion levels (squared EVM) of the four transceiver chains.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ImpairmentProfile {
    pub kappa_t_bs: f64,
    pub kappa_r_bs: f64,
    pub kappa_t_ut: f64,
    pub kappa_r_ut: f64,
}

impl ImpairmentProfile {
    pub fn new(kappa_t_bs: f64, kappa_r_bs: f64, kappa_t_ut: f64, kappa_r_ut: f64) -> Result<Self> {
        let imp = Self { kappa_t_bs, kappa_r_bs, kappa_t_ut, kappa_r_ut };
        if imp.values().iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return domain(format!("impairment levels must be finite and nonnegative: {imp:?}"));
        }
        for w in imp.warnings() {
            log::warn!("{w}");
        }
        Ok(imp)
    }

    pub fn ideal() -> Self {
        Self::default()
    }

    /// Same level `kappa_bs` for both base-station chains and `kappa_ut`
    /// for both terminal chains.
    pub fn symmetric(kappa_bs: f64, kappa_ut: f64) -> Result<Self> {
        Self::new(kappa_bs, kappa_bs, kappa_ut, kappa_ut)
    }

    pub fn uniform(kappa: f64) -> Result<Self> {
        Self::symmetric(kappa, kappa)
    }

    fn values(&self) -> [f64; 4] {
        [self.kappa_t_bs, self.kappa_r_bs, self.kappa_t_ut, self.kappa_r_ut]
    }

    /// Non-fatal notes for levels outside the typical range.
    pub fn warnings(&self) -> Vec<String> {
        let names = ["kappa_t_bs", "kappa_r_bs", "kappa_t_ut", "kappa_r_ut"];
        names
            .iter()
            .zip(self.values())
            .filter(|(_, k)| *k > TYPICAL_KAPPA_MAX)
            .map(|(name, k)| format!("{name} = {k} exceeds the typical range [0, {TYPICAL_KAPPA_MAX}]"))
            .collect()
    }
}

/// One uplink pilot scenario.
#[derive(Clone, Debug)]
pub struct UplinkConfig {
    r: CovarianceMatrix,
    s: CovarianceMatrix,
    p_ut: f64,
    d: Complex64,
    imp: ImpairmentProfile,
    /// M⁻¹·R, computed on first use.
    solved: OnceLock<std::result::Result<DMatrix<Complex64>, String>>,
}

impl UplinkConfig {
    /// Pilot `d = √p_ut`. `p_ut = 0` is allowed and means no information.
    pub fn new(r: CovarianceMatrix, s: CovarianceMatrix, p_ut: f64, imp: ImpairmentProfile) -> Result<Self> {
        if r.dim() != s.dim() {
            return Err(Error::DimensionMismatch { expected: r.dim(), got: s.dim() });
        }
        if !(p_ut.is_finite() && p_ut >= 0.0) {
            return domain(format!("pilot power must be finite and nonnegative, got {p_ut}"));
        }
        if s.is_diagonal() {
            if s.diag().iter().any(|&v| v <= 0.0) {
                return Err(Error::InvalidMatrix("noise covariance must be positive definite".into()));
            }
        } else if nalgebra::Cholesky::new(s.as_matrix().clone()).is_none() {
            return Err(Error::InvalidMatrix("noise covariance must be positive definite".into()));
        }
        Ok(Self { r, s, p_ut, d: Complex64::new(p_ut.sqrt(), 0.0), imp, solved: OnceLock::new() })
    }

    /// Replaces the pilot symbol; `|d|²` must equal the pilot power.
    pub fn with_pilot(mut self, d: Complex64) -> Result<Self> {
        let tol = 1e-12 * self.p_ut.max(f64::MIN_POSITIVE);
        if (d.norm_sqr() - self.p_ut).abs() > tol {
            return domain(format!("|d|² = {} does not match pilot power {}", d.norm_sqr(), self.p_ut));
        }
        self.d = d;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    pub fn r(&self) -> &CovarianceMatrix {
        &self.r
    }

    pub fn s(&self) -> &CovarianceMatrix {
        &self.s
    }

    pub fn p_ut(&self) -> f64 {
        self.p_ut
    }

    pub fn pilot(&self) -> Complex64 {
        self.d
    }

    pub fn impairments(&self) -> &ImpairmentProfile {
        &self.imp
    }

    /// Average uplink SNR `p·tr(R)/tr(S)`.
    pub fn snr(&self) -> f64 {
        self.p_ut * self.r.trace() / self.s.trace()
    }

    /// `p(1+κ_t^UT)R + p·κ_r^BS·R_diag + S`, the covariance of `z`.
    pub fn observation_covariance(&self) -> DMatrix<Complex64> {
        let p = self.p_ut;
        let mut m = self.r.as_matrix() * Complex64::new(p * (1.0 + self.imp.kappa_t_ut), 0.0);
        for i in 0..self.dim() {
            m[(i, i)] += Complex64::new(p * self.imp.kappa_r_bs * self.r.get(i, i).re, 0.0);
        }
        m + self.s.as_matrix()
    }

    fn solved(&self) -> Result<&DMatrix<Complex64>> {
        self.solved
            .get_or_init(|| {
                linalg::hpd_solve(&self.observation_covariance(), self.r.as_matrix()).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Singular(format!("LMMSE system matrix: {e}")))
    }
}

/// LMMSE estimate of one channel realization.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationResult {
    pub h_hat: ComplexVector,
}

/// The estimator matrix `A = d*·R·M⁻¹`.
pub fn lmmse_filter(cfg: &UplinkConfig) -> Result<DMatrix<Complex64>> {
    // R and M are Hermitian, so R·M⁻¹ = (M⁻¹·R)ᴴ.
    Ok(cfg.solved()?.adjoint() * cfg.d.conj())
}

/// Applies the LMMSE filter to an observation.
pub fn estimate(cfg: &UplinkConfig, z: &ComplexVector) -> Result<EstimationResult> {
    if z.len() != cfg.dim() {
        return Err(Error::DimensionMismatch { expected: cfg.dim(), got: z.len() });
    }
    Ok(EstimationResult { h_hat: lmmse_filter(cfg)? * z })
}

/// Error covariance `C = R − p·R·M⁻¹·R`.
pub fn error_covariance(cfg: &UplinkConfig) -> Result<CovarianceMatrix> {
    let x = cfg.solved()?;
    let r = cfg.r.as_matrix();
    let rx = if cfg.r.is_diagonal() && linalg::is_diagonal(x) {
        DMatrix::from_diagonal(&DVector::from_fn(cfg.dim(), |i, _| r[(i, i)] * x[(i, i)]))
    } else {
        r * x
    };
    Ok(CovarianceMatrix::from_hermitian_unchecked(r - rx * Complex64::new(cfg.p_ut, 0.0)))
}

/// Mean-square error per antenna, `tr(C)/N`.
pub fn mse_per_antenna(cfg: &UplinkConfig) -> Result<f64> {
    Ok(error_covariance(cfg)?.trace() / cfg.dim() as f64)
}

/// High pilot-power limit `R − R·((1+κ_t^UT)R + κ_r^BS·R_diag)⁻¹·R`.
pub fn error_floor(cfg: &UplinkConfig) -> Result<CovarianceMatrix> {
    let r = cfg.r.as_matrix();
    let mut bracket = r * Complex64::new(1.0 + cfg.imp.kappa_t_ut, 0.0);
    for i in 0..cfg.dim() {
        bracket[(i, i)] += Complex64::new(cfg.imp.kappa_r_bs * r[(i, i)].re, 0.0);
    }
    let x = linalg::hpd_solve_rcond(&bracket, r, 1e-12)
        .map_err(|e| Error::Singular(format!("error-floor bracket is not invertible: {e}")))?;
    Ok(CovarianceMatrix::from_hermitian_unchecked(r - r * x))
}

/// Per-antenna error floor for `R = λI`: `λ(1 − 1/(1 + κ_t^UT + κ_r^BS))`.
pub fn error_floor_iid(lambda: f64, kappa_t_ut: f64, kappa_r_bs: f64) -> f64 {
    lambda * (1.0 - 1.0 / (1.0 + (kappa_t_ut + kappa_r_bs)))
}

/// Draws one received pilot vector for channel `h`.
pub fn simulate_uplink(cfg: &UplinkConfig, h: &ComplexVector, rng: &mut Rng) -> Result<ComplexVector> {
    let n = cfg.dim();
    if h.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.len() });
    }
    let p = cfg.p_ut;
    let eta_t = sample_scalar_cn(cfg.imp.kappa_t_ut * p, rng)?;
    let nu = sample_cn(&cfg.s, rng);
    let gain = cfg.d + eta_t;
    let kr = cfg.imp.kappa_r_bs * p;
    Ok(DVector::from_fn(n, |i, _| {
        let eta_r = rng.complex_normal() * (kr * h[i].norm_sqr()).sqrt();
        h[i] * gain + nu[i] + eta_r
    }))
}

/// Monte-Carlo estimate of `E{‖ĥ − h‖²}/N` over the full pilot chain.
pub fn empirical_mse(cfg: &UplinkConfig, n_samples: usize, rng: &mut Rng) -> Result<MonteCarloEstimate> {
    if n_samples < 2 {
        return domain(format!("need at least two samples, got {n_samples}"));
    }
    let a = lmmse_filter(cfg)?;
    let a_diag = linalg::is_diagonal(&a).then(|| a.diagonal());
    let n = cfg.dim() as f64;
    let base = rng.fork();
    let chunks = run_chunks(n_samples, &base, |mut rng, count| -> Result<Moments<1>> {
        let mut m = Moments::default();
        for _ in 0..count {
            let h = sample_cn(&cfg.r, &mut rng);
            let z = simulate_uplink(cfg, &h, &mut rng)?;
            let h_hat = match &a_diag {
                Some(d) => z.component_mul(d),
                None => &a * &z,
            };
            m.push([(h_hat - &h).norm_squared() / n]);
        }
        Ok(m)
    });
    let mut total = Moments::<1>::default();
    for c in chunks {
        total.merge(&c?);
    }
    Ok(MonteCarloEstimate::from_moments(&total))
}
