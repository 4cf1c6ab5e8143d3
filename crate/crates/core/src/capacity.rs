//! Downlink model with distortion noise, the perfect-CSI upper bound and
//! the Monte-Carlo lower bound under approximate MRT.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::estimation::{error_covariance, lmmse_filter, simulate_uplink, ImpairmentProfile, UplinkConfig};
use crate::linalg;
use crate::montecarlo::{run_chunks, Moments};
use crate::randmat::{sample_cn, sample_scalar_cn, ComplexVector, CovarianceMatrix, Rng};
use crate::specfun::one_minus_x_ex_e1;

pub use crate::montecarlo::MonteCarloEstimate;

/// Below this κ_t^BS the upper bound uses its analytic κ → 0 limit.
pub const KAPPA_T_BS_ZERO: f64 = 1e-12;

/// Minimum sample count accepted by [`lower_bound_mc`].
pub const MIN_LOWER_BOUND_SAMPLES: usize = 1000;

/// Fraction of all-zero channel estimates tolerated before giving up.
const MAX_DEGENERATE_FRACTION: f64 = 1e-3;

/// Downlink signal power, terminal noise and hardware quality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DownlinkConfig {
    pub p_bs: f64,
    pub sigma2_ut: f64,
    pub imp: ImpairmentProfile,
}

impl DownlinkConfig {
    pub fn new(p_bs: f64, sigma2_ut: f64, imp: ImpairmentProfile) -> Result<Self> {
        if !(p_bs.is_finite() && p_bs > 0.0) {
            return domain(format!("downlink power must be positive, got {p_bs}"));
        }
        if !(sigma2_ut.is_finite() && sigma2_ut > 0.0) {
            return domain(format!("terminal noise variance must be positive, got {sigma2_ut}"));
        }
        Ok(Self { p_bs, sigma2_ut, imp })
    }

    fn inverse_snr(&self) -> f64 {
        self.sigma2_ut / self.p_bs
    }
}

/// A rate limit that may be infinite (ideal hardware).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Limit {
    Finite(f64),
    Unbounded,
}

impl Limit {
    /// The limit as a float, `f64::INFINITY` when unbounded.
    pub fn value(self) -> f64 {
        match self {
            Limit::Finite(v) => v,
            Limit::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Limit::Unbounded)
    }

    fn log2_one_plus_inverse(denominator: f64, numerator: f64) -> Limit {
        if denominator <= 0.0 {
            Limit::Unbounded
        } else {
            Limit::Finite((1.0 + numerator / denominator).log2())
        }
    }
}

fn check_unit_norm(w: &ComplexVector) -> Result<()> {
    let norm = w.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return domain(format!("beamformer must have unit norm, got {norm}"));
    }
    Ok(())
}

/// Draws one received downlink sample `y = hᵀ(w·s + η_t) + n + η_r`.
pub fn simulate_downlink(
    dl: &DownlinkConfig,
    h: &ComplexVector,
    w: &ComplexVector,
    s: Complex64,
    rng: &mut Rng,
) -> Result<Complex64> {
    if h.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: h.len(), got: w.len() });
    }
    check_unit_norm(w)?;
    let p = dl.p_bs;
    let gain = h.transpose() * w;
    let gain = gain[(0, 0)];
    let mut y = gain * s;
    for i in 0..h.len() {
        let eta_t = rng.complex_normal() * (dl.imp.kappa_t_bs * p * w[i].norm_sqr()).sqrt();
        y += h[i] * eta_t;
    }
    y += sample_scalar_cn(dl.sigma2_ut, rng)?;
    y += sample_scalar_cn(dl.imp.kappa_r_ut * p * gain.norm_sqr(), rng)?;
    Ok(y)
}

/// SINR of beamformer `w` on channel `h`:
/// `|hᵀw|² / (κ_t^BS·Σ|hᵢwᵢ|² + κ_r^UT·|hᵀw|² + σ²/p)`.
pub fn sinr(h: &ComplexVector, w: &ComplexVector, dl: &DownlinkConfig) -> f64 {
    let gain = h.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr();
    let spread: f64 = h.iter().zip(w.iter()).map(|(a, b)| (a * b).norm_sqr()).sum();
    gain / (dl.imp.kappa_t_bs * spread + dl.imp.kappa_r_ut * gain + dl.inverse_snr())
}

/// SINR-maximizing unit-norm beamformer `∝ (κ_t^BS·D_h + σ²/p·I)⁻¹·h*`.
pub fn optimal_beamformer(h: &ComplexVector, dl: &DownlinkConfig) -> Result<ComplexVector> {
    if h.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(Error::DegenerateChannel("beamforming towards an all-zero channel".into()));
    }
    let c = dl.inverse_snr();
    let w = DVector::from_iterator(h.len(), h.iter().map(|z| z.conj() / (dl.imp.kappa_t_bs * z.norm_sqr() + c)));
    let norm = w.norm();
    Ok(w / Complex64::new(norm, 0.0))
}

/// Maximum SINR over unit-norm beamformers with perfect CSI,
/// `hᵀ(κ_t^BS·D_h + κ_r^UT·h*hᵀ + σ²/p·I)⁻¹h*`, via Sherman–Morrison.
pub fn sinr_perfect_csi(h: &ComplexVector, dl: &DownlinkConfig) -> f64 {
    let c = dl.inverse_snr();
    let psi: f64 = h
        .iter()
        .map(|z| {
            let g = z.norm_sqr();
            g / (dl.imp.kappa_t_bs * g + c)
        })
        .sum();
    psi / (1.0 + dl.imp.kappa_r_ut * psi)
}

/// Closed-form upper bound `log₂(1 + G/(1 + κ_r^UT·G))` on the ergodic
/// capacity with Rayleigh fading of covariance `r`.
pub fn capacity_upper_bound(r: &CovarianceMatrix, dl: &DownlinkConfig) -> Result<f64> {
    capacity_upper_bound_diag(&r.diag(), dl)
}

/// [`capacity_upper_bound`] from the diagonal of R alone, which is all the
/// bound depends on.
pub fn capacity_upper_bound_diag(r_diag: &[f64], dl: &DownlinkConfig) -> Result<f64> {
    if r_diag.is_empty() {
        return domain("channel covariance must be non-empty");
    }
    if r_diag.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return domain("channel covariance must have a strictly positive diagonal");
    }
    let kt = dl.imp.kappa_t_bs;
    let g = if kt < KAPPA_T_BS_ZERO {
        r_diag.iter().sum::<f64>() / dl.inverse_snr()
    } else {
        let mut g = 0.0;
        for &rii in r_diag {
            g += one_minus_x_ex_e1(dl.inverse_snr() / (kt * rii))?;
        }
        g / kt
    };
    Ok((1.0 + g / (1.0 + dl.imp.kappa_r_ut * g)).log2())
}

/// Ideal-hardware Jensen bound `log₂(1 + p·tr(R)/σ²)`.
pub fn capacity_ideal_jensen(r: &CovarianceMatrix, dl: &DownlinkConfig) -> f64 {
    (1.0 + r.trace() / dl.inverse_snr()).log2()
}

/// Upper-bound ceiling as p^BS → ∞: `log₂(1 + N/(κ_t^BS + κ_r^UT·N))`.
pub fn upper_limit_high_power(n: usize, kappa_t_bs: f64, kappa_r_ut: f64) -> Limit {
    let n = n as f64;
    Limit::log2_one_plus_inverse(kappa_t_bs + kappa_r_ut * n, n)
}

/// Upper-bound ceiling as N → ∞: `log₂(1 + 1/κ_r^UT)`.
pub fn upper_limit_large_n(kappa_r_ut: f64) -> Limit {
    Limit::log2_one_plus_inverse(kappa_r_ut, 1.0)
}

/// Lower-bound limit when both powers shrink polynomially in N:
/// `log₂(1 + 1/(κ_r^UT + κ_t^UT + κ_r^UT·κ_t^UT))`.
pub fn lower_limit_scaled_power(kappa_t_ut: f64, kappa_r_ut: f64) -> Limit {
    Limit::log2_one_plus_inverse(kappa_r_ut + kappa_t_ut + kappa_r_ut * kappa_t_ut, 1.0)
}

struct LowerBoundChunk {
    moments: Moments<4>,
    degenerate: usize,
}

/// Monte-Carlo evaluation of the lower bound with beamformer
/// `v = ĥ*/‖ĥ‖` built from the LMMSE estimate.
///
/// The three expectations `E{hᵀv}`, `E{|hᵀv|²}` and `Σᵢ E{|hᵢ|²|vᵢ|²}` are
/// estimated from one joint sample stream; the standard error of the rate
/// follows from the delta method.
pub fn lower_bound_mc(
    ul: &UplinkConfig,
    dl: &DownlinkConfig,
    n_samples: usize,
    rng: &mut Rng,
) -> Result<MonteCarloEstimate> {
    if n_samples < MIN_LOWER_BOUND_SAMPLES {
        return domain(format!("lower bound needs at least {MIN_LOWER_BOUND_SAMPLES} samples, got {n_samples}"));
    }
    let a = lmmse_filter(ul)?;
    let a_diag = linalg::is_diagonal(&a).then(|| a.diagonal());
    let n = ul.dim();
    let max_degenerate = (n_samples as f64 * MAX_DEGENERATE_FRACTION).floor() as usize;
    let base = rng.fork();

    let chunks: Vec<Result<LowerBoundChunk>> = run_chunks(n_samples, &base, |mut rng, count| {
        let mut out = LowerBoundChunk { moments: Moments::default(), degenerate: 0 };
        let mut done = 0;
        while done < count {
            let h = sample_cn(ul.r(), &mut rng);
            let z = simulate_uplink(ul, &h, &mut rng)?;
            let h_hat = match &a_diag {
                Some(d) => z.component_mul(d),
                None => &a * &z,
            };
            let norm = h_hat.norm();
            if norm == 0.0 {
                out.degenerate += 1;
                if out.degenerate > max_degenerate {
                    break;
                }
                continue;
            }
            let mut gain = Complex64::new(0.0, 0.0);
            let mut spread = 0.0;
            for i in 0..n {
                let v = h_hat[i].conj() / norm;
                gain += h[i] * v;
                spread += h[i].norm_sqr() * v.norm_sqr();
            }
            out.moments.push([gain.re, gain.im, gain.norm_sqr(), spread]);
            done += 1;
        }
        Ok(out)
    });

    let mut moments = Moments::<4>::default();
    let mut degenerate = 0;
    for chunk in chunks {
        let chunk = chunk?;
        moments.merge(&chunk.moments);
        degenerate += chunk.degenerate;
    }
    if degenerate > max_degenerate || moments.count() < n_samples as u64 {
        return Err(Error::DegenerateChannel(format!("{degenerate} of {n_samples} channel estimates were zero")));
    }

    let [ar, ai, b, c] = moments.mean();
    let (kr, kt) = (dl.imp.kappa_r_ut, dl.imp.kappa_t_bs);
    let num = ar * ar + ai * ai;
    let den = (1.0 + kr) * b - num + kt * c + dl.inverse_snr();
    let sinr = num / den;

    let den2 = den * den;
    let grad =
        [2.0 * ar * (den + num) / den2, 2.0 * ai * (den + num) / den2, -num * (1.0 + kr) / den2, -num * kt / den2];
    let cov = moments.covariance();
    let mut var = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            var += grad[i] * cov[i][j] * grad[j];
        }
    }
    let sinr_se = (var.max(0.0) / moments.count() as f64).sqrt();
    Ok(MonteCarloEstimate {
        value: (1.0 + sinr).log2(),
        std_error: sinr_se / ((1.0 + sinr) * std::f64::consts::LN_2),
        n_samples: moments.count(),
    })
}

/// Large-N form of the MRT lower bound with the O(1/√N) terms dropped.
///
/// The two scalar expectations over the terminal transmit distortion
/// `η ~ CN(0, κ_t^UT·p^UT)` are estimated by 1-D Monte-Carlo. `Ψ` is taken
/// as `p^UT·κ_r^BS·R_diag + S`, the channel-averaged covariance of the
/// additive uplink terms.
pub fn lower_bound_asymptotic(
    ul: &UplinkConfig,
    dl: &DownlinkConfig,
    n_scalar_samples: usize,
    rng: &mut Rng,
) -> Result<Limit> {
    asymptotic_lower_bound(ul, dl, n_scalar_samples, rng, true)
}

/// As [`lower_bound_asymptotic`] but without the `σ²/(N·p^UT·p^BS)` noise
/// term, i.e. the N → ∞ value at fixed powers.
pub fn lower_bound_asymptotic_noiseless(
    ul: &UplinkConfig,
    dl: &DownlinkConfig,
    n_scalar_samples: usize,
    rng: &mut Rng,
) -> Result<Limit> {
    asymptotic_lower_bound(ul, dl, n_scalar_samples, rng, false)
}

/// The `σ²/(N·p^UT·p^BS)` term of the large-N lower bound.
pub fn asymptotic_noise_term(n: usize, p_ut: f64, dl: &DownlinkConfig) -> f64 {
    dl.sigma2_ut / (n as f64 * p_ut * dl.p_bs)
}

fn asymptotic_lower_bound(
    ul: &UplinkConfig,
    dl: &DownlinkConfig,
    n_scalar_samples: usize,
    rng: &mut Rng,
    include_noise: bool,
) -> Result<Limit> {
    if ul.p_ut() <= 0.0 {
        return domain("asymptotic lower bound needs a positive pilot power");
    }
    if n_scalar_samples == 0 {
        return domain("need at least one scalar sample");
    }
    let a = lmmse_filter(ul)?;
    let r = ul.r().as_matrix();
    let trace_est = ul.r().trace() - error_covariance(ul)?.trace();
    let mut psi = ul.s().as_matrix().clone();
    for i in 0..ul.dim() {
        psi[(i, i)] += Complex64::new(ul.p_ut() * ul.impairments().kappa_r_bs * r[(i, i)].re, 0.0);
    }
    let q_signal = linalg::sandwich_trace(&a, r);
    let q_noise = linalg::sandwich_trace(&a, &psi);

    let d = ul.pilot();
    let var = ul.impairments().kappa_t_ut * ul.p_ut();
    let mut stream = rng.fork();
    let mut first = Complex64::new(0.0, 0.0);
    let mut second = 0.0;
    for _ in 0..n_scalar_samples {
        let eta = sample_scalar_cn(var, &mut stream)?;
        let g = Complex64::new(1.0, 0.0) + eta / d;
        let denom = (d + eta).norm_sqr() * q_signal + q_noise;
        first += g * (trace_est / denom).sqrt();
        second += g.norm_sqr() * trace_est / denom;
    }
    let count = n_scalar_samples as f64;
    let num = (first / count).norm_sqr();
    let mut den = (1.0 + dl.imp.kappa_r_ut) * second / count - num;
    if include_noise {
        den += asymptotic_noise_term(ul.dim(), ul.p_ut(), dl);
    }
    if den <= 1e-12 * num {
        return Ok(Limit::Unbounded);
    }
    Ok(Limit::Finite((1.0 + num / den).log2()))
}
