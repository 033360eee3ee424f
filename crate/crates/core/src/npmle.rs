//! Nonparametric maximum likelihood estimators.
//!
//! Current status data are handled directly through the cumulative sum
//! diagram. General interval-censored data are first reduced to their
//! maximal intersections (Turnbull intervals) and then fitted with the
//! iterative convex minorant algorithm.

use nalgebra::{DMatrix, DVector};

use crate::data::{CensoringInterval, CurrentStatusSample, Dataset};
use crate::distribution::StepDistribution;
use crate::error::{Error, Result};
use crate::gcm::pava;

/// Sorted distinct examination times of a current status sample, with
/// multiplicities. Reused across bootstrap replicates, where only the
/// indicators change.
#[derive(Debug, Clone)]
pub struct StatusDesign {
    times: Vec<f64>,
    counts: Vec<f64>,
    /// Distinct-time index of every record, in record order.
    slot: Vec<usize>,
}

impl StatusDesign {
    pub fn new(times: &[f64]) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::input("current status sample is empty"));
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let mut distinct: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        let mut slot = vec![0; times.len()];
        for &i in &order {
            if distinct.last() != Some(&times[i]) {
                distinct.push(times[i]);
                counts.push(0.0);
            }
            *counts.last_mut().unwrap() += 1.0;
            slot[i] = distinct.len() - 1;
        }
        Ok(StatusDesign {
            times: distinct,
            counts,
            slot,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slot(&self, record: usize) -> usize {
        self.slot[record]
    }

    pub fn num_records(&self) -> usize {
        self.slot.len()
    }

    /// NPMLE values at the distinct times given the number of `delta = 1` records at each.
    pub fn fit_counts(&self, successes: &[f64]) -> Vec<f64> {
        let rates: Vec<f64> = successes
            .iter()
            .zip(&self.counts)
            .map(|(s, c)| s / c)
            .collect();
        let mut v = pava(&rates, &self.counts);
        for x in &mut v {
            *x = x.clamp(0.0, 1.0);
        }
        v
    }

    /// Value at `t0` of the step function taking `values[j]` from `times[j]` on.
    pub fn value_at(&self, values: &[f64], t0: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t0);
        if k == 0 {
            0.0
        } else {
            values[k - 1]
        }
    }
}

pub fn npmle_current_status(sample: &CurrentStatusSample) -> Result<StepDistribution> {
    let times: Vec<f64> = sample.times().collect();
    let design = StatusDesign::new(&times)?;
    let mut successes = vec![0.0; design.times.len()];
    for (i, r) in sample.records().iter().enumerate() {
        if r.delta {
            successes[design.slot[i]] += 1.0;
        }
    }
    let values = design.fit_counts(&successes);
    StepDistribution::from_values(&design.times, &values)
}

/// Current status log-likelihood `Σ Δ log F(T) + (1 - Δ) log(1 - F(T))`.
pub fn current_status_loglik(sample: &CurrentStatusSample, f: impl Fn(f64) -> f64) -> f64 {
    sample
        .records()
        .iter()
        .map(|r| {
            let p = f(r.t);
            if r.delta {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum()
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum EndKind {
    // Right endpoints sort before left endpoints at the same time.
    Right,
    Left,
}

/// Maximal intersections of the observation intervals, in increasing order.
pub fn turnbull_support(intervals: &[CensoringInterval]) -> Vec<CensoringInterval> {
    let mut ends: Vec<(f64, EndKind)> = Vec::with_capacity(2 * intervals.len());
    for iv in intervals {
        ends.push((iv.left(), EndKind::Left));
        ends.push((iv.right(), EndKind::Right));
    }
    ends.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ends.windows(2)
        .filter(|w| w[0].1 == EndKind::Left && w[1].1 == EndKind::Right)
        .map(|w| CensoringInterval::new(w[0].0, w[1].0).expect("left precedes right"))
        .collect()
}

/// Convergence settings for [`npmle_interval_censored`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcmOptions {
    /// Bound on the largest Fenchel violation.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IcmOptions {
    fn default() -> Self {
        IcmOptions {
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

/// Probabilities are floored at this value inside the likelihood.
pub const PROB_FLOOR: f64 = 1e-12;
/// Masses at or below this level count as zero when checking the Fenchel conditions.
pub const ZERO_MASS: f64 = 1e-12;
const MAX_HALVINGS: usize = 30;
/// Relative log-likelihood loss tolerated in a Newton step, which is rounding noise near the optimum.
const NEWTON_SLACK: f64 = 1e-12;

/// NPMLE for interval-censored data together with its convergence certificate.
#[derive(Debug, Clone)]
pub struct IntervalNpmle {
    pub support: Vec<CensoringInterval>,
    pub masses: Vec<f64>,
    pub iterations: usize,
    pub max_violation: f64,
    pub log_likelihood: f64,
    /// Number of ICM iterations that fell back to an EM step.
    pub em_steps: usize,
}

impl IntervalNpmle {
    /// Step function with each support mass placed at its interval's right
    /// endpoint; mass on an unbounded interval is left unassigned.
    pub fn distribution(&self) -> StepDistribution {
        let jumps = self
            .support
            .iter()
            .zip(&self.masses)
            .filter(|(iv, &p)| iv.right().is_finite() && p > 0.0)
            .map(|(iv, &p)| (iv.right(), p))
            .collect();
        StepDistribution::new(jumps).expect("support intervals are ordered and masses sum to one")
    }
}

/// Observation intervals expressed as index ranges over the support intervals,
/// with identical ranges merged.
struct Incidence {
    m: usize,
    /// `(first, last, multiplicity)`; an observation covers support intervals `first..=last`.
    ranges: Vec<(usize, usize, f64)>,
    n: f64,
}

impl Incidence {
    fn new(intervals: &[CensoringInterval], support: &[CensoringInterval]) -> Self {
        let mut raw: Vec<(usize, usize)> = intervals
            .iter()
            .map(|iv| {
                let first = support.partition_point(|s| s.left() < iv.left());
                let last = support.partition_point(|s| s.right() <= iv.right());
                assert!(
                    last > first,
                    "observation interval ({}, {}] contains no support interval",
                    iv.left(),
                    iv.right()
                );
                (first, last - 1)
            })
            .collect();
        raw.sort_unstable();
        let mut ranges: Vec<(usize, usize, f64)> = Vec::new();
        for (a, b) in raw {
            match ranges.last_mut() {
                Some(last) if last.0 == a && last.1 == b => last.2 += 1.0,
                _ => ranges.push((a, b, 1.0)),
            }
        }
        Incidence {
            m: support.len(),
            ranges,
            n: intervals.len() as f64,
        }
    }

    /// `cum` has length `m + 1` with `cum[0] = 0` and `cum[m] = 1`.
    fn prob(cum: &[f64], a: usize, b: usize) -> f64 {
        cum[b + 1] - cum[a]
    }

    fn loglik(&self, cum: &[f64]) -> f64 {
        let mut ll = 0.0;
        for &(a, b, c) in &self.ranges {
            let p = Self::prob(cum, a, b);
            if !(p > 0.0) {
                return f64::NEG_INFINITY;
            }
            ll += c * p.max(PROB_FLOOR).ln();
        }
        ll
    }

    /// Normalized directional derivatives `(1/n) Σ_{i ∋ j} 1/P_i - 1` towards each support interval.
    fn directional(&self, cum: &[f64]) -> Vec<f64> {
        let mut diff = vec![0.0; self.m + 1];
        for &(a, b, c) in &self.ranges {
            let p = Self::prob(cum, a, b).max(PROB_FLOOR);
            diff[a] += c / p;
            diff[b + 1] -= c / p;
        }
        let mut acc = 0.0;
        diff.iter()
            .take(self.m)
            .map(|d| {
                acc += d;
                acc / self.n - 1.0
            })
            .collect()
    }

    fn max_violation(&self, cum: &[f64], d: &[f64]) -> f64 {
        d.iter()
            .enumerate()
            .map(|(j, &dj)| {
                if cum[j + 1] - cum[j] > ZERO_MASS {
                    dj.abs()
                } else {
                    dj.max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// Gradient and negative Hessian diagonal of the log-likelihood in `cum[1..m]`.
    fn gradient(&self, cum: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut g = vec![0.0; self.m + 1];
        let mut w = vec![0.0; self.m + 1];
        for &(a, b, c) in &self.ranges {
            let p = Self::prob(cum, a, b).max(PROB_FLOOR);
            g[b + 1] += c / p;
            w[b + 1] += c / (p * p);
            g[a] -= c / p;
            w[a] += c / (p * p);
        }
        (g, w)
    }

    /// Newton step on the masses of the current support under the sum-to-one
    /// constraint, shortened so that no mass turns negative.
    /// The zero-mass point with the largest positive directional derivative joins the support.
    fn newton_step(&self, cum: &[f64], d: &[f64]) -> Option<Vec<f64>> {
        let mass: Vec<f64> = (0..self.m).map(|j| cum[j + 1] - cum[j]).collect();
        let entering = (0..self.m)
            .filter(|&j| mass[j] <= ZERO_MASS && d[j] > 0.0)
            .max_by(|&a, &b| d[a].total_cmp(&d[b]));
        let active: Vec<usize> = (0..self.m)
            .filter(|&j| mass[j] > ZERO_MASS || Some(j) == entering)
            .collect();
        let k = active.len();
        if k < 2 {
            return None;
        }
        let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
        let mut rhs = DVector::<f64>::zeros(k + 1);
        for &(a, b, c) in &self.ranges {
            let p = Self::prob(cum, a, b).max(PROB_FLOOR);
            let lo = active.partition_point(|&j| j < a);
            let hi = active.partition_point(|&j| j <= b);
            for u in lo..hi {
                rhs[u] -= c / p;
                for v in lo..hi {
                    kkt[(u, v)] -= c / (p * p);
                }
            }
        }
        for u in 0..k {
            kkt[(u, k)] = 1.0;
            kkt[(k, u)] = 1.0;
        }
        let delta = kkt.lu().solve(&rhs)?;
        let mut step: f64 = 1.0;
        for (u, &j) in active.iter().enumerate() {
            if delta[u] < 0.0 {
                step = step.min(mass[j].max(0.0) / -delta[u]);
            }
        }
        if !(step > 0.0) {
            return None;
        }
        let mut next_mass = vec![0.0; self.m];
        for (u, &j) in active.iter().enumerate() {
            next_mass[j] = (mass[j] + step * delta[u]).max(0.0);
        }
        let total: f64 = next_mass.iter().sum();
        let mut next = vec![0.0; self.m + 1];
        let mut acc = 0.0;
        for j in 0..self.m {
            acc += next_mass[j] / total;
            next[j + 1] = acc;
        }
        next[self.m] = 1.0;
        Some(next)
    }

    fn em_step(&self, cum: &[f64], d: &[f64]) -> Vec<f64> {
        let mut next = vec![0.0; self.m + 1];
        let mut acc = 0.0;
        for j in 0..self.m {
            acc += (cum[j + 1] - cum[j]).max(0.0) * (d[j] + 1.0);
            next[j + 1] = acc;
        }
        let total = next[self.m];
        for x in &mut next {
            *x /= total;
        }
        next[self.m] = 1.0;
        next
    }
}

pub fn npmle_interval_censored(
    intervals: &[CensoringInterval],
    options: IcmOptions,
) -> Result<IntervalNpmle> {
    if intervals.is_empty() {
        return Err(Error::input("no observation intervals"));
    }
    if !(options.tol > 0.0) {
        return Err(Error::input(format!(
            "tolerance {} must be positive",
            options.tol
        )));
    }
    let support = turnbull_support(intervals);
    let inc = Incidence::new(intervals, &support);
    let m = inc.m;
    let mut cum: Vec<f64> = (0..=m).map(|j| j as f64 / m as f64).collect();
    cum[m] = 1.0;
    let mut ll = inc.loglik(&cum);
    let mut em_steps = 0;

    for iter in 0..=options.max_iter {
        let d = inc.directional(&cum);
        let violation = inc.max_violation(&cum, &d);
        if violation <= options.tol || m == 1 {
            let masses = (0..m).map(|j| (cum[j + 1] - cum[j]).max(0.0)).collect();
            return Ok(IntervalNpmle {
                support,
                masses,
                iterations: iter,
                max_violation: if m == 1 { 0.0 } else { violation },
                log_likelihood: ll,
                em_steps,
            });
        }
        if iter == options.max_iter {
            return Err(Error::NonConvergence {
                iterations: iter,
                max_violation: violation,
                last_masses: (0..m).map(|j| cum[j + 1] - cum[j]).collect(),
            });
        }

        let (g, w) = inc.gradient(&cum);
        let target: Vec<f64> = (1..m).map(|j| cum[j] + g[j] / w[j]).collect();
        let projected = pava(&target, &w[1..m]);

        let mut accepted = false;
        let mut step = 1.0;
        let mut cand = cum.clone();
        for _ in 0..=MAX_HALVINGS {
            for j in 1..m {
                let p = projected[j - 1].clamp(0.0, 1.0);
                cand[j] = cum[j] + step * (p - cum[j]);
            }
            let cand_ll = inc.loglik(&cand);
            if cand_ll >= ll {
                cum.copy_from_slice(&cand);
                ll = cand_ll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            cum = inc.em_step(&cum, &d);
            ll = inc.loglik(&cum);
            em_steps += 1;
        }
        let d = inc.directional(&cum);
        if let Some(cand) = inc.newton_step(&cum, &d) {
            let cand_ll = inc.loglik(&cand);
            if cand_ll >= ll - NEWTON_SLACK * ll.abs().max(1.0) {
                cum = cand;
                ll = cand_ll;
            }
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// NPMLE of any supported dataset as a step function.
pub fn npmle_dataset(data: &Dataset, options: IcmOptions) -> Result<StepDistribution> {
    match data {
        Dataset::CurrentStatus(s) => npmle_current_status(s),
        other => Ok(npmle_interval_censored(&other.intervals()?, options)?.distribution()),
    }
}

/// Log-likelihood of interval-censored data under a distribution function evaluated at the endpoints.
pub fn interval_loglik(intervals: &[CensoringInterval], f: impl Fn(f64) -> f64) -> f64 {
    intervals
        .iter()
        .map(|iv| {
            let upper = if iv.right().is_finite() {
                f(iv.right())
            } else {
                1.0
            };
            (upper - f(iv.left())).max(0.0).ln()
        })
        .sum()
}
