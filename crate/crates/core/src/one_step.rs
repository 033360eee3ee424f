//! One iteration of the iterative convex minorant algorithm from a given
//! starting distribution.
//!
//! At the sorted distinct examination times `u_1 < ... < u_m` the step
//! accumulates the score process `W1` and the weight process `W2` (first and
//! second powers of the inverse cell probabilities under the starting
//! distribution `F0`), and returns the slopes of the greatest convex minorant
//! of `{(W2(u_j), ∫_0^{u_j} F0 dW2 + W1(u_j))}`, clamped to `[0, 1]`.

use crate::data::MixedCaseSubject;
use crate::distribution::{Cdf, StepDistribution};
use crate::error::{Error, Result};
use crate::gcm::pava;
use crate::npmle::PROB_FLOOR;

/// Increments of the two processes at every distinct examination time.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProcess {
    pub times: Vec<f64>,
    /// Increments of the score process `W1`.
    pub score: Vec<f64>,
    /// Increments of the weight process `W2`.
    pub weight: Vec<f64>,
    /// `F0` at each time.
    pub start: Vec<f64>,
}

impl WeightProcess {
    pub fn build<D: Cdf + ?Sized>(subjects: &[MixedCaseSubject], start: &D) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::input(
                "one-step estimator needs at least one subject",
            ));
        }
        let mut times: Vec<f64> = subjects
            .iter()
            .flat_map(|s| s.times().iter().copied())
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let start_vals: Vec<f64> = times.iter().map(|&t| start.cdf(t)).collect();
        let mut score = vec![0.0; times.len()];
        let mut weight = vec![0.0; times.len()];
        let index = |t: f64| times.partition_point(|&u| u < t);

        for s in subjects {
            let (lower, upper) = s.cell();
            let lo_idx = lower.map(index);
            let up_idx = upper.map(index);
            let f_lo = lo_idx.map_or(0.0, |i| start_vals[i]);
            let f_up = up_idx.map_or(1.0, |i| start_vals[i]);
            let p = f_up - f_lo;
            if !(p > 0.0) {
                return Err(Error::DegenerateDenominator {
                    lower: lower.unwrap_or(0.0),
                    upper: upper.unwrap_or(f64::INFINITY),
                });
            }
            let p = p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            if let Some(i) = up_idx {
                score[i] += 1.0 / p;
                weight[i] += 1.0 / (p * p);
            }
            if let Some(i) = lo_idx {
                score[i] -= 1.0 / p;
                weight[i] += 1.0 / (p * p);
            }
        }
        Ok(WeightProcess {
            times,
            score,
            weight,
            start: start_vals,
        })
    }

    /// Cumulative sum diagram points `(W2(u_j), V(u_j))` at the times with positive weight.
    pub fn diagram(&self) -> Vec<(f64, f64)> {
        let mut pts = vec![(0.0, 0.0)];
        let (mut x, mut y) = (0.0, 0.0);
        for j in 0..self.times.len() {
            if self.weight[j] > 0.0 {
                x += self.weight[j];
                y += self.start[j] * self.weight[j] + self.score[j];
                pts.push((x, y));
            }
        }
        pts
    }

    /// GCM slopes at the positive-weight times, clamped to `[0, 1]`.
    pub fn step(&self) -> (Vec<f64>, Vec<f64>) {
        let mut t = Vec::new();
        let mut values = Vec::new();
        let mut w = Vec::new();
        for j in 0..self.times.len() {
            if self.weight[j] > 0.0 {
                t.push(self.times[j]);
                values.push(self.start[j] + self.score[j] / self.weight[j]);
                w.push(self.weight[j]);
            }
        }
        let mut fitted = pava(&values, &w);
        for v in &mut fitted {
            *v = v.clamp(0.0, 1.0);
        }
        (t, fitted)
    }
}

pub fn icm_one_step<D: Cdf + ?Sized>(
    subjects: &[MixedCaseSubject],
    start: &D,
) -> Result<StepDistribution> {
    let process = WeightProcess::build(subjects, start)?;
    let (times, values) = process.step();
    StepDistribution::from_values(&times, &values)
}
