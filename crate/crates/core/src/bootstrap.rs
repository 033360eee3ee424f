//! Model-based bootstrap: responses are redrawn from a fitted distribution
//! while every subject keeps its examination times.

use rand::Rng;
use rayon::prelude::*;

use crate::data::{canonicalize_subjects, CensoringInterval, Dataset, MixedCaseSubject};
use crate::distribution::{smle_at, Cdf, SmoothedDistribution, StepDistribution};
use crate::error::{Error, Result};
use crate::limit::quantile_sorted;
use crate::npmle::{npmle_dataset, npmle_interval_censored, IcmOptions, StatusDesign};
use crate::one_step::icm_one_step;
use crate::rng::{stream, Purpose, StreamRng};

/// Distribution the bootstrap responses are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BootstrapScheme {
    FromNpmle,
    /// Kernel-smoothed NPMLE with the given bandwidth.
    FromSmle(f64),
}

impl BootstrapScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BootstrapScheme::FromSmle(h) if !(h > 0.0 && h.is_finite()) => {
                Err(Error::input(format!("bandwidth {h} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn bandwidth(&self) -> Option<f64> {
        match *self {
            BootstrapScheme::FromNpmle => None,
            BootstrapScheme::FromSmle(h) => Some(h),
        }
    }
}

/// Estimator recomputed on every bootstrap sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootEstimator {
    /// Full NPMLE refit.
    #[default]
    Npmle,
    /// One ICM step started at the resampling source.
    OneStep,
}

/// Scaling applied to the roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootRate {
    /// `n^{1/3}`: current status and mixed case.
    #[default]
    Cube,
    /// `(n log n)^{1/3}`: case 2.
    CubeLog,
}

impl RootRate {
    pub fn at(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            RootRate::Cube => n.cbrt(),
            RootRate::CubeLog => (n * n.ln()).cbrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub scheme: BootstrapScheme,
    pub replicates: usize,
    pub seed: u64,
    pub estimator: RootEstimator,
    pub rate: RootRate,
    pub icm: IcmOptions,
}

impl BootstrapConfig {
    pub fn new(scheme: BootstrapScheme, replicates: usize, seed: u64) -> Self {
        BootstrapConfig {
            scheme,
            replicates,
            seed,
            estimator: RootEstimator::Npmle,
            rate: RootRate::Cube,
            icm: IcmOptions::default(),
        }
    }

    /// Sets the estimator; the one-step estimator also switches to the `(n log n)^{1/3}` rate.
    pub fn with_estimator(mut self, estimator: RootEstimator) -> Self {
        self.estimator = estimator;
        if estimator == RootEstimator::OneStep {
            self.rate = RootRate::CubeLog;
        }
        self
    }

    pub fn with_rate(mut self, rate: RootRate) -> Self {
        self.rate = rate;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    /// Scaled roots `rate * (estimate* - source(t0))` of the successful replicates, by replicate index.
    pub roots: Vec<f64>,
    /// Indices of replicates that failed twice.
    pub failed: Vec<usize>,
    pub t0: f64,
    /// NPMLE of the original data at `t0`.
    pub estimate: f64,
    /// Resampling source at `t0`.
    pub source_value: f64,
    /// Scaling rate: `n^{1/3}` or `(n log n)^{1/3}`.
    pub rate: f64,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
}

/// Resampling source: either the NPMLE itself or its smoothed version.
#[derive(Debug, Clone)]
pub enum Source {
    Step(StepDistribution),
    Smooth(SmoothedDistribution),
}

impl Source {
    pub fn from_npmle(npmle: StepDistribution, scheme: BootstrapScheme) -> Result<Self> {
        Ok(match scheme {
            BootstrapScheme::FromNpmle => Source::Step(npmle),
            BootstrapScheme::FromSmle(h) => Source::Smooth(SmoothedDistribution::new(npmle, h)?),
        })
    }
}

impl Cdf for Source {
    fn cdf(&self, t: f64) -> f64 {
        match self {
            Source::Step(d) => d.eval(t),
            Source::Smooth(d) => d.eval(t),
        }
    }
}

/// Multinomial cell probabilities `source(T_k) - source(T_{k-1})` for `k = 1..=K+1`,
/// with `source(T_0) = 0` and `source(T_{K+1}) = 1`; negative cells are zeroed and the rest renormalized.
pub fn cell_probabilities<D: Cdf + ?Sized>(times: &[f64], source: &D) -> Result<Vec<f64>> {
    let mut cells = Vec::with_capacity(times.len() + 1);
    let mut prev = 0.0;
    for &t in times {
        let v = source.cdf(t);
        cells.push(v - prev);
        prev = v;
    }
    cells.push(1.0 - prev);
    let mut total = 0.0;
    for c in &mut cells {
        if !(*c > 0.0) {
            *c = 0.0;
        }
        total += *c;
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateSource);
    }
    for c in &mut cells {
        *c /= total;
    }
    Ok(cells)
}

fn draw_category<R: Rng + ?Sized>(cells: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &p) in cells.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = k;
            if u < acc {
                return k + 1;
            }
        }
    }
    last_positive + 1
}

/// One multinomial draw of the category of a subject examined at `times`.
pub fn resample_subject<D: Cdf + ?Sized, R: Rng + ?Sized>(
    times: &[f64],
    source: &D,
    rng: &mut R,
) -> Result<usize> {
    let cells = cell_probabilities(times, source)?;
    Ok(draw_category(&cells, rng))
}

/// Data prepared once for repeated resampling.
enum Prepared {
    Status {
        design: StatusDesign,
        /// Probability of `delta = 1` for every record.
        probs: Vec<f64>,
    },
    Panel {
        subjects: Vec<MixedCaseSubject>,
        cells: Vec<Vec<f64>>,
    },
}

impl Prepared {
    fn new(data: &Dataset, source: &Source) -> Result<Self> {
        match data {
            Dataset::CurrentStatus(sample) => {
                let mut sample = sample.clone();
                sample.canonicalize();
                let times: Vec<f64> = sample.times().collect();
                let design = StatusDesign::new(&times)?;
                let probs = times
                    .iter()
                    .map(|&t| cell_probabilities(&[t], source).map(|c| c[0]))
                    .collect::<Result<_>>()?;
                Ok(Prepared::Status { design, probs })
            }
            _ => {
                let mut subjects = data.subjects()?;
                canonicalize_subjects(&mut subjects);
                let cells = subjects
                    .iter()
                    .map(|s| cell_probabilities(s.times(), source))
                    .collect::<Result<_>>()?;
                Ok(Prepared::Panel { subjects, cells })
            }
        }
    }

    fn len(&self) -> usize {
        match self {
            Prepared::Status { design, .. } => design.num_records(),
            Prepared::Panel { subjects, .. } => subjects.len(),
        }
    }

    fn resample_panel(&self, rng: &mut StreamRng) -> Vec<MixedCaseSubject> {
        match self {
            Prepared::Panel { subjects, cells } => subjects
                .iter()
                .zip(cells)
                .map(|(s, c)| s.with_category(draw_category(c, rng)))
                .collect(),
            Prepared::Status { .. } => unreachable!("status data use the counting path"),
        }
    }

    /// NPMLE of one bootstrap sample.
    fn refit(&self, rng: &mut StreamRng, icm: IcmOptions) -> Result<StepDistribution> {
        match self {
            Prepared::Status { design, probs } => {
                let mut successes = vec![0.0; design.times().len()];
                for (i, &p) in probs.iter().enumerate() {
                    let u: f64 = rng.random();
                    if u < p {
                        successes[design.slot(i)] += 1.0;
                    }
                }
                let values = design.fit_counts(&successes);
                StepDistribution::from_values(design.times(), &values)
            }
            Prepared::Panel { .. } => {
                let intervals: Vec<CensoringInterval> = self
                    .resample_panel(rng)
                    .iter()
                    .map(crate::data::reduce_to_interval)
                    .collect();
                Ok(npmle_interval_censored(&intervals, icm)?.distribution())
            }
        }
    }

    fn one_step(&self, rng: &mut StreamRng, source: &Source) -> Result<StepDistribution> {
        match self {
            Prepared::Panel { .. } => icm_one_step(&self.resample_panel(rng), source),
            Prepared::Status { design, probs } => {
                let subjects = probs
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| {
                        let u: f64 = rng.random();
                        let t = design.times()[design.slot(i)];
                        MixedCaseSubject::new(vec![t], if u < p { 1 } else { 2 })
                    })
                    .collect::<Result<Vec<_>>>()?;
                icm_one_step(&subjects, source)
            }
        }
    }
}

/// Runs `replicate` for every index with its own stream, retrying a failure once
/// on a derived stream. Aborts if more than 1% of the replicates fail.
fn run_replicates<T, F>(count: usize, seed: u64, replicate: F) -> Result<(Vec<T>, Vec<usize>)>
where
    T: Send,
    F: Fn(&mut StreamRng) -> Result<T> + Sync,
{
    let outcomes: Vec<Result<T>> = (0..count as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, Purpose::Bootstrap, b, 0);
            replicate(&mut rng).or_else(|_| {
                let mut retry = stream(seed, Purpose::BootstrapRetry, b, 0);
                replicate(&mut retry)
            })
        })
        .collect();
    let mut values = Vec::with_capacity(count);
    let mut failed = Vec::new();
    let mut last_error = None;
    for (b, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(v) => values.push(v),
            Err(e) => {
                failed.push(b);
                last_error = Some(e);
            }
        }
    }
    if failed.len() as f64 > 0.01 * count as f64 {
        return Err(Error::TooManyFailures {
            failed: failed.len(),
            total: count,
            last: last_error.map(|e| e.to_string()).unwrap_or_default(),
        });
    }
    Ok((values, failed))
}

fn check_t0(data: &Dataset, t0: f64) -> Result<()> {
    let (lo, hi) = data
        .time_span()
        .ok_or_else(|| Error::input("dataset has no finite examination times"))?;
    if !(t0 >= lo && t0 <= hi) {
        return Err(Error::input(format!(
            "t0 = {t0} lies outside the observation span [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Bootstrap roots at `t0` together with the quantities needed to invert them.
pub fn bootstrap_roots(data: &Dataset, t0: f64, cfg: &BootstrapConfig) -> Result<BootstrapResult> {
    if data.is_empty() {
        return Err(Error::input("empty dataset"));
    }
    if cfg.replicates == 0 {
        return Err(Error::input("need at least one bootstrap replicate"));
    }
    cfg.scheme.validate()?;
    check_t0(data, t0)?;
    let npmle = npmle_dataset(data, cfg.icm)?;
    let estimate = npmle.eval(t0);
    let source = Source::from_npmle(npmle, cfg.scheme)?;
    bootstrap_roots_from(data, t0, cfg, &source, estimate)
}

/// As [`bootstrap_roots`], with the original-data NPMLE and the source already computed.
pub fn bootstrap_roots_from(
    data: &Dataset,
    t0: f64,
    cfg: &BootstrapConfig,
    source: &Source,
    estimate: f64,
) -> Result<BootstrapResult> {
    let prepared = Prepared::new(data, source)?;
    let n = prepared.len();
    let source_value = source.cdf(t0);
    let rate = cfg.rate.at(n);
    let (roots, failed) = run_replicates(cfg.replicates, cfg.seed, |rng| {
        let fit = match cfg.estimator {
            RootEstimator::Npmle => prepared.refit(rng, cfg.icm)?,
            RootEstimator::OneStep => prepared.one_step(rng, source)?,
        };
        Ok(rate * (fit.eval(t0) - source_value))
    })?;
    Ok(BootstrapResult {
        roots,
        failed,
        t0,
        estimate,
        source_value,
        rate,
        n,
        replicates: cfg.replicates,
        seed: cfg.seed,
    })
}

/// Fewest roots [`basic_ci`] accepts.
pub const MIN_ROOTS: usize = 20;

/// Root-inversion interval `[est - q_{1-α/2}/rate, est - q_{α/2}/rate]`, clamped to `[0, 1]`.
pub fn basic_ci(result: &BootstrapResult, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::input(format!("level {level} must lie in (0, 1)")));
    }
    if result.roots.len() < MIN_ROOTS {
        return Err(Error::input(format!(
            "{} roots are too few for stable quantiles (need {MIN_ROOTS})",
            result.roots.len()
        )));
    }
    let mut sorted = result.roots.clone();
    sorted.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    let q_lo = quantile_sorted(&sorted, alpha / 2.0)?;
    let q_hi = quantile_sorted(&sorted, 1.0 - alpha / 2.0)?;
    let lo = (result.estimate - q_hi / result.rate).clamp(0.0, 1.0);
    let hi = (result.estimate - q_lo / result.rate).clamp(0.0, 1.0);
    Ok((lo, hi))
}

/// Bootstrap estimate of the mean squared error of the smoothed estimator at
/// `t0` for every bandwidth in `h_grid`. The same resampled datasets serve every bandwidth.
pub fn bmse_curve(
    data: &Dataset,
    t0: f64,
    source: BootstrapScheme,
    h_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if h_grid.is_empty() {
        return Err(Error::input("empty bandwidth grid"));
    }
    if let Some(h) = h_grid.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(Error::input(format!("bandwidth {h} must be positive")));
    }
    if replicates == 0 {
        return Err(Error::input("need at least one bootstrap replicate"));
    }
    source.validate()?;
    check_t0(data, t0)?;
    let icm = IcmOptions::default();
    let npmle = npmle_dataset(data, icm)?;
    let src = Source::from_npmle(npmle, source)?;
    let centre = src.cdf(t0);
    let prepared = Prepared::new(data, &src)?;
    let (errors, _) = run_replicates(replicates, seed, |rng| {
        let fit = prepared.refit(rng, icm)?;
        Ok(h_grid
            .iter()
            .map(|&h| (smle_at(&fit, h, t0) - centre).powi(2))
            .collect::<Vec<f64>>())
    })?;
    let count = errors.len() as f64;
    Ok(h_grid
        .iter()
        .enumerate()
        .map(|(k, &h)| (h, errors.iter().map(|e| e[k]).sum::<f64>() / count))
        .collect())
}

/// Bandwidth with the smallest estimated MSE; ties go to the smaller bandwidth.
pub fn select_bandwidth(curve: &[(f64, f64)]) -> Result<f64> {
    curve
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .map(|(h, _)| h)
        .ok_or_else(|| Error::input("empty MSE curve"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::CurrentStatusSample;

    fn result_with(roots: Vec<f64>, estimate: f64) -> BootstrapResult {
        BootstrapResult {
            replicates: roots.len(),
            roots,
            failed: vec![],
            t0: 1.0,
            estimate,
            source_value: estimate,
            rate: 10.0,
            n: 1000,
            seed: 0,
        }
    }

    #[test]
    fn resample_boundary_sources() {
        let mut rng = stream(1, Purpose::Bootstrap, 0, 0);
        let zero = |_: f64| 0.0;
        let one = |_: f64| 1.0;
        for _ in 0..100 {
            assert_eq!(resample_subject(&[1.0, 2.0], &zero, &mut rng).unwrap(), 3);
            assert_eq!(resample_subject(&[1.0, 2.0], &one, &mut rng).unwrap(), 1);
        }
        let nan = |_: f64| f64::NAN;
        assert!(matches!(
            resample_subject(&[1.0], &nan, &mut rng),
            Err(Error::DegenerateSource)
        ));
    }

    #[test]
    fn bernoulli_frequency() {
        let mut rng = stream(2, Purpose::Bootstrap, 0, 0);
        let src = |_: f64| 0.3;
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| resample_subject(&[1.0], &src, &mut rng).unwrap() == 1)
            .count();
        let freq = hits as f64 / draws as f64;
        assert!((freq - 0.3).abs() <= 0.005, "{freq}");
    }

    #[test]
    fn ci_of_degenerate_roots() {
        let r = result_with(vec![0.0; 50], 0.4);
        assert_eq!(basic_ci(&r, 0.9).unwrap(), (0.4, 0.4));
    }

    #[test]
    fn ci_symmetric_roots() {
        let roots: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 0 { 1.5 } else { -1.5 })
            .collect();
        let r = result_with(roots, 0.5);
        let (lo, hi) = basic_ci(&r, 0.9).unwrap();
        assert!(((0.5 - lo) - (hi - 0.5)).abs() < 1e-12);
        assert!(hi > lo);
    }

    #[test]
    fn ci_clamps_at_zero() {
        let roots: Vec<f64> = (0..100).map(|i| (i as f64 - 50.0) / 5.0).collect();
        let r = result_with(roots, 0.02);
        let (lo, hi) = basic_ci(&r, 0.9).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.02);
    }

    #[test]
    fn ci_needs_enough_roots() {
        let r = result_with(vec![0.0; 19], 0.5);
        assert!(basic_ci(&r, 0.9).is_err());
        let r = result_with(vec![0.0; 20], 0.5);
        assert!(basic_ci(&r, 1.0).is_err());
    }

    #[test]
    fn bandwidth_selection() {
        assert_eq!(
            select_bandwidth(&[(0.1, 2.0), (0.2, 1.0), (0.3, 3.0)]).unwrap(),
            0.2
        );
        assert_eq!(select_bandwidth(&[(0.1, 1.0), (0.2, 1.0)]).unwrap(), 0.1);
        assert_eq!(
            select_bandwidth(&[(0.3, 1.0), (0.2, 1.0), (0.1, 1.0)]).unwrap(),
            0.1
        );
        assert!(select_bandwidth(&[]).is_err());
    }

    #[test]
    fn all_zero_data_give_zero_roots() {
        let times: Vec<f64> = (1..=30).map(|i| i as f64 / 10.0).collect();
        let sample = CurrentStatusSample::from_pairs(&times, &[false; 30]).unwrap();
        let data = Dataset::CurrentStatus(sample);
        let cfg = BootstrapConfig::new(BootstrapScheme::FromNpmle, 25, 3);
        let r = bootstrap_roots(&data, 1.5, &cfg).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert!(r.roots.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn t0_outside_span_rejected() {
        let sample = CurrentStatusSample::from_pairs(&[1.0, 2.0], &[true, false]).unwrap();
        let data = Dataset::CurrentStatus(sample);
        let cfg = BootstrapConfig::new(BootstrapScheme::FromNpmle, 5, 3);
        assert!(bootstrap_roots(&data, 3.0, &cfg).is_err());
        let cfg = BootstrapConfig::new(BootstrapScheme::FromSmle(-1.0), 5, 3);
        assert!(bootstrap_roots(&data, 1.5, &cfg).is_err());
    }

    #[test]
    fn single_replicate_is_deterministic() {
        let sample =
            CurrentStatusSample::from_pairs(&[0.5, 1.0, 1.5, 2.0], &[false, true, false, true])
                .unwrap();
        let data = Dataset::CurrentStatus(sample);
        let cfg = BootstrapConfig::new(BootstrapScheme::FromSmle(0.5), 1, 99);
        let a = bootstrap_roots(&data, 1.2, &cfg).unwrap();
        let b = bootstrap_roots(&data, 1.2, &cfg).unwrap();
        assert_eq!(a.roots.len(), 1);
        assert_eq!(a.roots[0].to_bits(), b.roots[0].to_bits());
    }

    #[test]
    fn bmse_single_bandwidth_is_nonnegative() {
        let sample =
            CurrentStatusSample::from_pairs(&[0.5, 1.0, 1.5, 2.0], &[false, true, false, true])
                .unwrap();
        let data = Dataset::CurrentStatus(sample);
        let curve = bmse_curve(&data, 1.2, BootstrapScheme::FromNpmle, &[0.4], 10, 1).unwrap();
        assert_eq!(curve.len(), 1);
        assert!(curve[0].1 >= 0.0);
        assert!(bmse_curve(&data, 1.2, BootstrapScheme::FromNpmle, &[], 10, 1).is_err());
        assert!(bmse_curve(&data, 1.2, BootstrapScheme::FromNpmle, &[0.0], 10, 1).is_err());
    }
}
