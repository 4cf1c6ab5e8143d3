//! Energy efficiency under antenna-count dependent power scaling.

use crate::capacity::{lower_bound_mc, DownlinkConfig};
use crate::error::{domain, Result};
use crate::estimation::{ImpairmentProfile, UplinkConfig};
use crate::montecarlo::MonteCarloEstimate;
use crate::randmat::{exponential_correlation, CovarianceMatrix, Rng};
use crate::sweep::{SweepRow, SweepTable};

/// Samples per sweep point as a function of the antenna count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePolicy {
    pub small_n: usize,
    pub large_n: usize,
    /// Largest N that still gets `small_n` samples.
    pub threshold: usize,
}

impl Default for SamplePolicy {
    fn default() -> Self {
        Self { small_n: 10_000, large_n: 1_000, threshold: 256 }
    }
}

impl SamplePolicy {
    pub fn fixed(n: usize) -> Self {
        Self { small_n: n, large_n: n, threshold: usize::MAX }
    }

    pub fn for_n(&self, n: usize) -> usize {
        if n <= self.threshold {
            self.small_n
        } else {
            self.large_n
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyConfig {
    /// Downlink overhead multiplier α₁.
    pub alpha1: f64,
    /// Uplink overhead multiplier α₂.
    pub alpha2: f64,
    /// Downlink power at N = 1, watts.
    pub p_bs_base: f64,
    /// Pilot power at N = 1, watts.
    pub p_ut_base: f64,
    pub t_bs: f64,
    pub t_ut: f64,
    /// Channel uses per second.
    pub bandwidth_hz: f64,
    /// Circuit power per antenna, watts. Zero unless modelled explicitly.
    pub circuit_w_per_antenna: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            alpha1: 0.0,
            alpha2: 0.0,
            p_bs_base: 1.0,
            p_ut_base: 1.0,
            t_bs: 0.0,
            t_ut: 0.0,
            bandwidth_hz: 15e3,
            circuit_w_per_antenna: 0.0,
        }
    }
}

impl EnergyConfig {
    /// Reasons the exponents fall outside the range where the scaled-power
    /// rate limit is guaranteed (`t_bs ≥ 0`, `0 < t_ut < ½`, `t_bs + t_ut < 1`).
    pub fn admissibility_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.t_bs < 0.0 {
            out.push(format!("t_bs = {} is negative", self.t_bs));
        }
        if !(self.t_ut > 0.0 && self.t_ut < 0.5) {
            out.push(format!("t_ut = {} is outside (0, 1/2)", self.t_ut));
        }
        if self.t_bs + self.t_ut >= 1.0 {
            out.push(format!("t_bs + t_ut = {} is not below 1", self.t_bs + self.t_ut));
        }
        out
    }
}

/// `p_base / nᵗ`.
pub fn scaled_power(p_base: f64, n: usize, t: f64) -> f64 {
    p_base / (n as f64).powf(t)
}

/// Bits per Joule: `C·B / ((1+α₁)·p_bs + α₂·p_ut)`.
pub fn energy_efficiency(capacity_bits: f64, p_bs: f64, p_ut: f64, cfg: &EnergyConfig) -> Result<f64> {
    efficiency(capacity_bits, (1.0 + cfg.alpha1) * p_bs + cfg.alpha2 * p_ut, cfg)
}

/// As [`energy_efficiency`] plus `n·circuit_w_per_antenna` in the
/// denominator.
pub fn energy_efficiency_with_circuit(
    capacity_bits: f64,
    p_bs: f64,
    p_ut: f64,
    n: usize,
    cfg: &EnergyConfig,
) -> Result<f64> {
    let power = (1.0 + cfg.alpha1) * p_bs + cfg.alpha2 * p_ut + n as f64 * cfg.circuit_w_per_antenna;
    efficiency(capacity_bits, power, cfg)
}

fn efficiency(capacity_bits: f64, power: f64, cfg: &EnergyConfig) -> Result<f64> {
    if !(power > 0.0) {
        return domain(format!("total consumed power must be positive, got {power}"));
    }
    Ok(capacity_bits * cfg.bandwidth_hz / power)
}

/// Channel and noise model shared by every point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkTemplate {
    /// Exponential correlation coefficient of R (trace N).
    pub correlation: f64,
    /// Base-station noise: S = noise_ul·I.
    pub noise_ul: f64,
    pub sigma2_ut: f64,
    pub impairments: ImpairmentProfile,
}

impl LinkTemplate {
    pub fn channel(&self, n: usize) -> Result<CovarianceMatrix> {
        exponential_correlation(n, self.correlation)
    }

    pub fn uplink(&self, r: CovarianceMatrix, p_ut: f64, imp: ImpairmentProfile) -> Result<UplinkConfig> {
        let n = r.dim();
        UplinkConfig::new(r, CovarianceMatrix::scaled_identity(n, self.noise_ul), p_ut, imp)
    }

    pub fn downlink(&self, p_bs: f64, imp: ImpairmentProfile) -> Result<DownlinkConfig> {
        DownlinkConfig::new(p_bs, self.sigma2_ut, imp)
    }
}

pub const EXPERIMENT: &str = "energy-efficiency";

/// For every N in `n_grid`: scale both powers by `1/N^t`, evaluate the
/// lower bound for ideal and impaired hardware, and report the rate and the
/// energy efficiency.
///
/// Each point `k` (in grid order, ideal before impaired) draws from
/// sub-stream `k` of a key forked from `rng`.
pub fn ee_sweep(
    template: &LinkTemplate,
    ecfg: &EnergyConfig,
    n_grid: &[usize],
    samples: SamplePolicy,
    rng: &mut Rng,
) -> Result<SweepTable> {
    if n_grid.is_empty() {
        return domain("antenna grid is empty");
    }
    let note = {
        let w = ecfg.admissibility_warnings();
        for msg in &w {
            log::warn!("energy sweep: {msg}");
        }
        (!w.is_empty()).then(|| w.join("; "))
    };
    let snr_db = 10.0 * (ecfg.p_bs_base / template.sigma2_ut).log10();
    let base = rng.fork();
    let mut table = SweepTable::default();
    let mut point = 0u64;
    for &n in n_grid {
        if n == 0 {
            return domain("antenna counts must be positive");
        }
        let r = template.channel(n)?;
        let p_bs = scaled_power(ecfg.p_bs_base, n, ecfg.t_bs);
        let p_ut = scaled_power(ecfg.p_ut_base, n, ecfg.t_ut);
        for imp in [ImpairmentProfile::ideal(), template.impairments] {
            let ul = template.uplink(r.clone(), p_ut, imp)?;
            let dl = template.downlink(p_bs, imp)?;
            let mut point_rng = base.substream(point);
            point += 1;
            let rate = lower_bound_mc(&ul, &dl, samples.for_n(n), &mut point_rng)?;
            let ee = energy_efficiency_with_circuit(rate.value, p_bs, p_ut, n, ecfg)?;
            let ee_se = energy_efficiency_with_circuit(rate.std_error, p_bs, p_ut, n, ecfg)?;
            let row = |metric: &str, est: MonteCarloEstimate| {
                SweepRow::estimate(EXPERIMENT, metric, est)
                    .n(n)
                    .snr_db(snr_db)
                    .kappas(imp.kappa_t_bs, imp.kappa_t_ut)
                    .t(ecfg.t_bs)
                    .note(note.clone())
            };
            table.push(row("lower", rate));
            table.push(row("ee", MonteCarloEstimate { value: ee, std_error: ee_se, n_samples: rate.n_samples }));
        }
    }
    Ok(table)
}
