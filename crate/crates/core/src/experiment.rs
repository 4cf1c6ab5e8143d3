//! Configured experiment runners that produce the four figure tables.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;

use crate::capacity::{
    capacity_ideal_jensen, capacity_upper_bound, lower_bound_mc, upper_limit_large_n, DownlinkConfig,
    MIN_LOWER_BOUND_SAMPLES,
};
use crate::energy::{ee_sweep, EnergyConfig, LinkTemplate, SamplePolicy};
use crate::error::{Error, Result};
use crate::estimation::{empirical_mse, error_floor, mse_per_antenna, ImpairmentProfile, UplinkConfig};
use crate::randmat::{exponential_correlation, CovarianceMatrix, Rng};
use crate::sweep::{SweepRow, SweepTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Per-antenna estimation error against uplink SNR.
    EstimationError,
    /// Capacity bounds against N for equal impairments at both ends.
    CapacityVsN,
    /// Capacity bounds against N for several base-station impairment levels.
    CapacityVsKappa,
    /// Energy efficiency under power scaling `1/N^t`.
    EnergyEfficiency,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::EstimationError => "estimation-error",
            Self::CapacityVsN => "capacity-vs-n",
            Self::CapacityVsKappa => "capacity-vs-kappa",
            Self::EnergyEfficiency => "energy-efficiency",
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn powers_of_two(max_exp: u32) -> Vec<usize> {
    (0..=max_exp).map(|e| 1usize << e).collect()
}

const KAPPAS_FIG: [f64; 4] = [0.0, 0.0025, 0.01, 0.0225];
const KAPPA_UT_FIXED: f64 = 0.0025;

/// Fully resolved experiment parameters.
///
/// The meaning of `kappa` depends on the experiment: the common
/// `κ_t^UT = κ_r^BS` level for estimation-error, the common level at both
/// ends for capacity-vs-n, the base-station level for capacity-vs-kappa and
/// the common level of all four parameters for energy-efficiency.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// Overrides the per-N default sample counts when set.
    pub samples: Option<usize>,
    pub n_grid: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub kappa: Vec<f64>,
    pub t: Vec<f64>,
    /// Exponential correlation coefficient of R where the setup uses one.
    pub correlation: f64,
    pub circuit_w_per_antenna: f64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let base = Self {
            experiment,
            seed: 1,
            samples: None,
            n_grid: powers_of_two(10),
            snr_db: vec![20.0],
            kappa: KAPPAS_FIG[1..].to_vec(),
            t: vec![0.0],
            correlation: 0.0,
            circuit_w_per_antenna: 0.0,
            out: None,
        };
        match experiment {
            ExperimentKind::EstimationError => Self {
                n_grid: vec![10, 100],
                snr_db: (0..=12).map(|k| -10.0 + 5.0 * k as f64).collect(),
                kappa: KAPPAS_FIG.to_vec(),
                correlation: 0.7,
                ..base
            },
            ExperimentKind::CapacityVsN => base,
            ExperimentKind::CapacityVsKappa => Self { kappa: KAPPAS_FIG.to_vec(), ..base },
            ExperimentKind::EnergyEfficiency => {
                Self { kappa: vec![KAPPA_UT_FIXED], t: vec![0.0, 0.25, 0.5], correlation: 0.7, ..base }
            }
        }
    }

    pub fn sample_policy(&self) -> SamplePolicy {
        self.samples.map(SamplePolicy::fixed).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_grid.is_empty() || self.snr_db.is_empty() || self.kappa.is_empty() || self.t.is_empty() {
            return bad("grids must be non-empty".into());
        }
        if self.n_grid.contains(&0) {
            return bad("antenna counts must be positive".into());
        }
        if let Some(v) = self.snr_db.iter().find(|v| !v.is_finite()) {
            return bad(format!("SNR {v} dB is not finite"));
        }
        if let Some(v) = self.kappa.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return bad(format!("impairment level {v} must be finite and non-negative"));
        }
        if let Some(v) = self.t.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return bad(format!("scaling exponent {v} must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.correlation) {
            return bad(format!("correlation {} must lie in [0, 1)", self.correlation));
        }
        if !(self.circuit_w_per_antenna.is_finite() && self.circuit_w_per_antenna >= 0.0) {
            return bad(format!("circuit power {} must be finite and non-negative", self.circuit_w_per_antenna));
        }
        let min = match self.experiment {
            ExperimentKind::EstimationError => 2,
            _ => MIN_LOWER_BOUND_SAMPLES,
        };
        match self.samples {
            Some(s) if s < min => bad(format!("{} needs at least {min} samples, got {s}", self.experiment.name())),
            _ => Ok(()),
        }
    }
}

/// Optional keys of a TOML config file. Every key overrides the experiment
/// default.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub snr_db: Option<Vec<f64>>,
    pub kappa: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
    pub correlation: Option<f64>,
    pub circuit_w_per_antenna: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Reproduce the figures of the hardware-impairment MISO analysis as CSV.
#[derive(Clone, Debug, Default, Parser)]
#[command(name = "hwmiso", version, about)]
pub struct CliArgs {
    #[arg(long, value_enum)]
    pub experiment: Option<ExperimentKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte-Carlo samples per grid point (default 10⁴ for N ≤ 256, 10³ above).
    #[arg(long)]
    pub samples: Option<usize>,
    /// CSV output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub snr_db: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub kappa: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// TOML file with defaults for any of the above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; the results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl CliArgs {
    /// Resolves defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let kind = self
            .experiment
            .or(file.experiment)
            .ok_or_else(|| Error::Config("no experiment given (use --experiment or the config file)".into()))?;
        let mut cfg = ExperimentConfig::defaults(kind);
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.$field.clone().or(file.$field.clone()) {
                    cfg.$field = v;
                }
            };
        }
        set!(seed);
        set!(n_grid);
        set!(snr_db);
        set!(kappa);
        set!(t);
        cfg.samples = self.samples.or(file.samples);
        cfg.out = self.out.clone().or(file.out);
        if let Some(v) = file.correlation {
            cfg.correlation = v;
        }
        if let Some(v) = file.circuit_w_per_antenna {
            cfg.circuit_w_per_antenna = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Per-point random streams: point `k` of a run always uses sub-stream `k`.
struct PointStreams {
    base: Rng,
    next: u64,
}

impl PointStreams {
    fn new(seed: u64) -> Self {
        Self { base: Rng::seed_from_u64(seed), next: 0 }
    }

    fn next(&mut self) -> Rng {
        let r = self.base.substream(self.next);
        self.next += 1;
        r
    }
}

fn channel(n: usize, correlation: f64) -> Result<CovarianceMatrix> {
    if correlation == 0.0 {
        Ok(CovarianceMatrix::identity(n))
    } else {
        exponential_correlation(n, correlation)
    }
}

pub fn run_estimation_error(cfg: &ExperimentConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let name = ExperimentKind::EstimationError.name();
    let policy = cfg.sample_policy();
    let mut streams = PointStreams::new(cfg.seed);
    let mut table = SweepTable::default();
    for &n in &cfg.n_grid {
        let r = channel(n, cfg.correlation)?;
        let s = CovarianceMatrix::identity(n);
        for &kappa in &cfg.kappa {
            let imp = ImpairmentProfile::new(0.0, kappa, kappa, 0.0)?;
            let floor = error_floor(&UplinkConfig::new(r.clone(), s.clone(), 1.0, imp)?)?.trace() / n as f64;
            for &snr in &cfg.snr_db {
                log::info!("{name}: N = {n}, kappa = {kappa}, SNR = {snr} dB");
                let ul = UplinkConfig::new(r.clone(), s.clone(), db_to_linear(snr) * n as f64 / r.trace(), imp)?;
                let mut rng = streams.next();
                let row = |metric: &str, v: f64| SweepRow::new(name, metric, v).n(n).snr_db(snr).kappas(kappa, kappa);
                table.push(row("mse_analytic", mse_per_antenna(&ul)?));
                let emp = empirical_mse(&ul, policy.for_n(n), &mut rng)?;
                table.push(SweepRow { std_error: Some(emp.std_error), ..row("mse_empirical", emp.value) });
                table.push(row("error_floor", floor));
            }
        }
    }
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn capacity_point(
    table: &mut SweepTable,
    name: &str,
    n: usize,
    snr: f64,
    imp: ImpairmentProfile,
    samples: usize,
    rng: &mut Rng,
    with_ideal: bool,
) -> Result<()> {
    let p = db_to_linear(snr);
    let r = CovarianceMatrix::identity(n);
    let ul = UplinkConfig::new(r.clone(), CovarianceMatrix::identity(n), p, imp)?;
    let dl = DownlinkConfig::new(p, 1.0, imp)?;
    let row =
        |metric: &str, v: f64| SweepRow::new(name, metric, v).n(n).snr_db(snr).kappas(imp.kappa_t_bs, imp.kappa_t_ut);
    table.push(row("upper", capacity_upper_bound(&r, &dl)?));
    let lower = lower_bound_mc(&ul, &dl, samples, rng)?;
    table.push(SweepRow { std_error: Some(lower.std_error), ..row("lower", lower.value) });
    if with_ideal {
        table.push(row("ideal", capacity_ideal_jensen(&r, &dl)));
    }
    let ceiling = upper_limit_large_n(imp.kappa_r_ut);
    if !ceiling.is_unbounded() {
        table.push(row("ceiling_large_n", ceiling.value()));
    }
    Ok(())
}

pub fn run_capacity_vs_n(cfg: &ExperimentConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let name = ExperimentKind::CapacityVsN.name();
    let policy = cfg.sample_policy();
    let mut streams = PointStreams::new(cfg.seed);
    let mut table = SweepTable::default();
    for &snr in &cfg.snr_db {
        for &kappa in &cfg.kappa {
            let imp = ImpairmentProfile::uniform(kappa)?;
            for &n in &cfg.n_grid {
                log::info!("{name}: N = {n}, kappa = {kappa}, SNR = {snr} dB");
                capacity_point(&mut table, name, n, snr, imp, policy.for_n(n), &mut streams.next(), true)?;
            }
        }
    }
    Ok(table)
}

pub fn run_capacity_vs_kappa(cfg: &ExperimentConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let name = ExperimentKind::CapacityVsKappa.name();
    let policy = cfg.sample_policy();
    let mut streams = PointStreams::new(cfg.seed);
    let mut table = SweepTable::default();
    for &snr in &cfg.snr_db {
        for &kappa_bs in &cfg.kappa {
            let imp = ImpairmentProfile::symmetric(kappa_bs, KAPPA_UT_FIXED)?;
            for &n in &cfg.n_grid {
                log::info!("{name}: N = {n}, kappa_bs = {kappa_bs}, SNR = {snr} dB");
                capacity_point(&mut table, name, n, snr, imp, policy.for_n(n), &mut streams.next(), false)?;
            }
        }
    }
    Ok(table)
}

/// Powers are 1 W at N = 1 and the noise is set so that `snr_db` is the
/// average SNR at N = 1.
pub fn run_energy_efficiency(cfg: &ExperimentConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let policy = cfg.sample_policy();
    let mut streams = PointStreams::new(cfg.seed);
    let mut table = SweepTable::default();
    for &snr in &cfg.snr_db {
        let noise = 1.0 / db_to_linear(snr);
        for &kappa in &cfg.kappa {
            let template = LinkTemplate {
                correlation: cfg.correlation,
                noise_ul: noise,
                sigma2_ut: noise,
                impairments: ImpairmentProfile::uniform(kappa)?,
            };
            for &t in &cfg.t {
                log::info!("energy-efficiency: kappa = {kappa}, t = {t}, SNR = {snr} dB");
                let ecfg = EnergyConfig {
                    t_bs: t,
                    t_ut: t,
                    circuit_w_per_antenna: cfg.circuit_w_per_antenna,
                    ..EnergyConfig::default()
                };
                let sweep = ee_sweep(&template, &ecfg, &cfg.n_grid, policy, &mut streams.next())?;
                for row in &sweep.rows {
                    if let Some(note) = &row.note {
                        log::warn!("energy-efficiency: t = {t}: {note}");
                        break;
                    }
                }
                table.extend(sweep);
            }
        }
    }
    Ok(table)
}

pub fn run(cfg: &ExperimentConfig) -> Result<SweepTable> {
    match cfg.experiment {
        ExperimentKind::EstimationError => run_estimation_error(cfg),
        ExperimentKind::CapacityVsN => run_capacity_vs_n(cfg),
        ExperimentKind::CapacityVsKappa => run_capacity_vs_kappa(cfg),
        ExperimentKind::EnergyEfficiency => run_energy_efficiency(cfg),
    }
}

/// Runs `cfg` on a dedicated pool of `threads` workers (the global pool
/// when `None`).
pub fn run_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<SweepTable> {
    match threads {
        None => run(cfg),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {k} worker threads: {e}")))?
            .install(|| run(cfg)),
    }
}
