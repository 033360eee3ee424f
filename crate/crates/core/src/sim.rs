//! Simulation scenarios and the Monte Carlo experiments built on them.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use statrs::function::erf::erf;

use crate::bootstrap::{
    basic_ci, bmse_curve, bootstrap_roots, BootstrapConfig, BootstrapScheme, RootRate,
};
use crate::data::{CurrentStatusSample, Dataset, MixedCaseSubject, StatusRecord};
use crate::distribution::smle_at;
use crate::error::{Error, Result};
use crate::limit::{kappa_case2, kappa_cs, quantile_sorted};
use crate::npmle::{npmle_dataset, IcmOptions};
use crate::rng::{child_seed, stream, Purpose, StreamRng};

/// Law of the latent event time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventLaw {
    Exponential(f64),
    /// `|Z|` with `Z` standard normal.
    FoldedNormal,
}

impl EventLaw {
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            EventLaw::Exponential(rate) => -(-rate * t).exp_m1(),
            EventLaw::FoldedNormal => erf(t / std::f64::consts::SQRT_2),
        }
    }

    pub fn density(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            EventLaw::Exponential(rate) => rate * (-rate * t).exp(),
            EventLaw::FoldedNormal => (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * t * t).exp(),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            EventLaw::Exponential(rate) => Exp::new(rate).expect("validated rate").sample(rng),
            EventLaw::FoldedNormal => {
                let z: f64 = StandardNormal.sample(rng);
                z.abs()
            }
        }
    }
}

/// Examination-time design; all times are uniform on `(0, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Design {
    CurrentStatus {
        b: f64,
    },
    /// Two order statistics.
    Case2 {
        b: f64,
    },
    /// `K` uniform on `{1, ..., kmax}`, then `K` order statistics.
    Mixed {
        kmax: usize,
        b: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub law: EventLaw,
    pub design: Design,
}

fn uniform_times<R: Rng + ?Sized>(k: usize, b: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let mut times: Vec<f64> = (0..k).map(|_| b * (1.0 - rng.random::<f64>())).collect();
        times.sort_by(f64::total_cmp);
        if times.windows(2).all(|w| w[0] < w[1]) {
            return times;
        }
    }
}

fn category(times: &[f64], x: f64) -> usize {
    times.partition_point(|&t| t < x) + 1
}

impl Scenario {
    pub fn exponential_current_status() -> Self {
        Scenario {
            law: EventLaw::Exponential(1.0),
            design: Design::CurrentStatus { b: 2.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let EventLaw::Exponential(rate) = self.law {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::input(format!("rate {rate} must be positive")));
            }
        }
        let (b, kmax) = match self.design {
            Design::CurrentStatus { b } | Design::Case2 { b } => (b, 1),
            Design::Mixed { kmax, b } => (b, kmax),
        };
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::input(format!("design bound {b} must be positive")));
        }
        if kmax == 0 {
            return Err(Error::input("kmax must be at least 1"));
        }
        Ok(())
    }

    pub fn true_cdf(&self, t: f64) -> f64 {
        self.law.cdf(t)
    }

    /// Root scaling under this design.
    pub fn root_rate(&self) -> RootRate {
        match self.design {
            Design::Case2 { .. } => RootRate::CubeLog,
            _ => RootRate::Cube,
        }
    }

    /// Scale of the limit law at `t0`, when it is known.
    pub fn kappa(&self, t0: f64) -> Result<f64> {
        let f = self.law.density(t0);
        match self.design {
            Design::CurrentStatus { b } => {
                let g = if t0 > 0.0 && t0 <= b { 1.0 / b } else { 0.0 };
                kappa_cs(self.law.cdf(t0), f, g)
            }
            Design::Case2 { b } => {
                let h00 = if t0 > 0.0 && t0 <= b {
                    2.0 / (b * b)
                } else {
                    0.0
                };
                kappa_case2(f, h00)
            }
            Design::Mixed { .. } => Err(Error::input(
                "the limit law under the mixed case design is not known",
            )),
        }
    }

    fn subject<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, usize) {
        let x = self.law.sample(rng);
        let times = match self.design {
            Design::CurrentStatus { b } => uniform_times(1, b, rng),
            Design::Case2 { b } => uniform_times(2, b, rng),
            Design::Mixed { kmax, b } => {
                let k = rng.random_range(1..=kmax);
                uniform_times(k, b, rng)
            }
        };
        let c = category(&times, x);
        (times, c)
    }
}

/// `n` independent subjects; only their examination times and categories are kept.
pub fn sample_scenario<R: Rng + ?Sized>(
    scenario: &Scenario,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    scenario.validate()?;
    if n == 0 {
        return Err(Error::input("sample size must be positive"));
    }
    let draws: Vec<(Vec<f64>, usize)> = (0..n).map(|_| scenario.subject(rng)).collect();
    build_dataset(scenario, draws)
}

fn build_dataset(scenario: &Scenario, draws: Vec<(Vec<f64>, usize)>) -> Result<Dataset> {
    match scenario.design {
        Design::CurrentStatus { .. } => {
            let records = draws
                .into_iter()
                .map(|(t, c)| StatusRecord {
                    t: t[0],
                    delta: c == 1,
                })
                .collect();
            Ok(Dataset::CurrentStatus(CurrentStatusSample::new(records)?))
        }
        _ => Ok(Dataset::Panel(
            draws
                .into_iter()
                .map(|(t, c)| MixedCaseSubject::new(t, c))
                .collect::<Result<_>>()?,
        )),
    }
}

/// The bandwidth `n^{-1/5}`.
pub fn rate_bandwidth(n: usize) -> f64 {
    (n as f64).powf(-0.2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub t0: f64,
    pub level: f64,
    pub reps: usize,
    /// Bootstrap replicates per interval.
    pub replicates: usize,
    pub scheme: BootstrapScheme,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.scheme.validate()?;
        if self.n == 0 || self.reps == 0 || self.replicates == 0 {
            return Err(Error::input("n, reps and replicates must be positive"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::input(format!(
                "level {} must lie in (0, 1)",
                self.level
            )));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::input(format!("t0 = {} must be positive", self.t0)));
        }
        Ok(())
    }

    fn dataset(&self, rep: u64) -> Result<Dataset> {
        let mut rng = stream(self.seed, Purpose::Dataset, rep, 0);
        sample_scenario(&self.scenario, self.n, &mut rng)
    }

    fn bootstrap(&self, rep: u64) -> BootstrapConfig {
        BootstrapConfig::new(
            self.scheme,
            self.replicates,
            child_seed(self.seed, Purpose::Experiment, rep),
        )
        .with_rate(self.scenario.root_rate())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    /// Fraction of the successful replications whose interval contains the true value.
    pub coverage: f64,
    pub mean_length: f64,
    pub reps: usize,
    pub failures: usize,
}

/// Interval for every replication; `None` marks a failed replication.
pub fn coverage_intervals(cfg: &ExperimentConfig) -> Result<Vec<Option<(f64, f64)>>> {
    cfg.validate()?;
    (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| {
            let data = cfg.dataset(r)?;
            let interval = bootstrap_roots(&data, cfg.t0, &cfg.bootstrap(r))
                .and_then(|res| basic_ci(&res, cfg.level));
            match interval {
                Ok(ci) => Ok(Some(ci)),
                Err(e) if e.is_input_error() => Err(e),
                Err(_) => Ok(None),
            }
        })
        .collect()
}

pub fn coverage_experiment(cfg: &ExperimentConfig) -> Result<CoverageReport> {
    let intervals = coverage_intervals(cfg)?;
    let truth = cfg.scenario.true_cdf(cfg.t0);
    let ok: Vec<(f64, f64)> = intervals.iter().flatten().copied().collect();
    let failures = intervals.len() - ok.len();
    if ok.is_empty() {
        return Err(Error::TooManyFailures {
            failed: failures,
            total: intervals.len(),
            last: "every replication failed".into(),
        });
    }
    let covered = ok
        .iter()
        .filter(|(lo, hi)| *lo <= truth && truth <= *hi)
        .count();
    let mean_length = ok.iter().map(|(lo, hi)| hi - lo).sum::<f64>() / ok.len() as f64;
    Ok(CoverageReport {
        coverage: covered as f64 / ok.len() as f64,
        mean_length,
        reps: cfg.reps,
        failures,
    })
}

/// Raw draws for comparing the sampling law of the scaled estimator with its
/// bootstrap approximation. `cfg.reps` sets the number of fresh datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityData {
    /// `rate * (estimate(t0) - F(t0))` over fresh datasets.
    pub mc_roots: Vec<f64>,
    /// Bootstrap roots from the dataset of replication 0.
    pub boot_roots: Vec<f64>,
}

pub fn figure1_density_data(cfg: &ExperimentConfig) -> Result<DensityData> {
    cfg.validate()?;
    let truth = cfg.scenario.true_cdf(cfg.t0);
    let rate = cfg.scenario.root_rate().at(cfg.n);
    let mc_roots = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| {
            let fit = npmle_dataset(&cfg.dataset(r)?, IcmOptions::default())?;
            Ok(rate * (fit.eval(cfg.t0) - truth))
        })
        .collect::<Result<Vec<f64>>>()?;
    let boot = bootstrap_roots(&cfg.dataset(0)?, cfg.t0, &cfg.bootstrap(0))?;
    Ok(DensityData {
        mc_roots,
        boot_roots: boot.roots,
    })
}

/// Bootstrap 0.95 quantile along one growing data sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTrajectory {
    pub points: Vec<(usize, f64)>,
    /// `kappa * q_0.95` of the limit law.
    pub reference: f64,
}

impl QuantileTrajectory {
    /// `max - min` of the quantiles.
    pub fn range(&self) -> f64 {
        let (lo, hi) = self
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, q)| {
                (lo.min(q), hi.max(q))
            });
        hi - lo
    }
}

/// The datasets are nested: the sample of size `n_grid[i]` is a prefix of the next one.
/// `limit_q95` is the 0.95 quantile of the unscaled limit law.
pub fn figure2_quantile_trajectory(
    scenario: &Scenario,
    t0: f64,
    scheme_for: impl Fn(usize) -> BootstrapScheme + Sync,
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
    limit_q95: f64,
) -> Result<QuantileTrajectory> {
    scenario.validate()?;
    if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("sample sizes must be positive and increasing"));
    }
    let reference = scenario.kappa(t0)? * limit_q95;
    let n_max = *n_grid.last().expect("nonempty grid");
    let mut rng: StreamRng = stream(seed, Purpose::Dataset, 0, 0);
    let draws: Vec<(Vec<f64>, usize)> = (0..n_max).map(|_| scenario.subject(&mut rng)).collect();
    let points = n_grid
        .iter()
        .map(|&n| {
            let data = build_dataset(scenario, draws[..n].to_vec())?;
            let cfg = BootstrapConfig::new(
                scheme_for(n),
                replicates,
                child_seed(seed, Purpose::Experiment, n as u64),
            )
            .with_rate(scenario.root_rate());
            let mut roots = bootstrap_roots(&data, t0, &cfg)?.roots;
            roots.sort_by(f64::total_cmp);
            Ok((n, quantile_sorted(&roots, 0.95)?))
        })
        .collect::<Result<_>>()?;
    Ok(QuantileTrajectory { points, reference })
}

/// Monte Carlo mean squared error of the smoothed estimator at `t0` for every bandwidth,
/// over `reps` fresh datasets.
pub fn true_mse_curve(
    scenario: &Scenario,
    n: usize,
    t0: f64,
    h_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    scenario.validate()?;
    if h_grid.is_empty() || h_grid.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::input("bandwidths must be positive"));
    }
    if reps == 0 || n == 0 {
        return Err(Error::input("n and reps must be positive"));
    }
    let truth = scenario.true_cdf(t0);
    let errors = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, Purpose::Dataset, r, 0);
            let data = sample_scenario(scenario, n, &mut rng)?;
            let fit = npmle_dataset(&data, IcmOptions::default())?;
            Ok(h_grid
                .iter()
                .map(|&h| (smle_at(&fit, h, t0) - truth).powi(2))
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(h_grid
        .iter()
        .enumerate()
        .map(|(k, &h)| (h, errors.iter().map(|e| e[k]).sum::<f64>() / reps as f64))
        .collect())
}

/// BMSE curve computed on the simulated dataset of replication 0.
pub fn simulated_bmse_curve(
    scenario: &Scenario,
    n: usize,
    t0: f64,
    source: BootstrapScheme,
    h_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let mut rng = stream(seed, Purpose::Dataset, 0, 0);
    let data = sample_scenario(scenario, n, &mut rng)?;
    bmse_curve(&data, t0, source, h_grid, replicates, seed)
}
