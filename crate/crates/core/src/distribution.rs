//! Distribution functions: NPMLE step functions and their kernel-smoothed versions.

use crate::error::{Error, Result};

/// Anything that can be evaluated as a distribution function.
pub trait Cdf: Sync {
    fn cdf(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> Cdf for F {
    fn cdf(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Right-continuous nondecreasing step function with positive jumps and total mass at most one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepDistribution {
    locations: Vec<f64>,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
}

const MASS_SLACK: f64 = 1e-9;

impl StepDistribution {
    pub fn new(jumps: Vec<(f64, f64)>) -> Result<Self> {
        let mut locations = Vec::with_capacity(jumps.len());
        let mut masses = Vec::with_capacity(jumps.len());
        let mut cumulative = Vec::with_capacity(jumps.len());
        let mut total = 0.0;
        for (s, p) in jumps {
            if !s.is_finite() {
                return Err(Error::input(format!("jump location {s} is not finite")));
            }
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::input(format!(
                    "jump mass {p} at {s} is not positive"
                )));
            }
            if locations.last().is_some_and(|&last| s <= last) {
                return Err(Error::input("jump locations must be strictly increasing"));
            }
            total += p;
            locations.push(s);
            masses.push(p);
            cumulative.push(total.min(1.0));
        }
        if total > 1.0 + MASS_SLACK {
            return Err(Error::input(format!("total mass {total} exceeds one")));
        }
        Ok(StepDistribution {
            locations,
            masses,
            cumulative,
        })
    }

    /// Step function taking `values[i]` on `[times[i], times[i+1])`; `times`
    /// strictly increasing, `values` nondecreasing in `[0, 1]`.
    pub fn from_values(times: &[f64], values: &[f64]) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::input("times and values differ in length"));
        }
        let mut jumps = Vec::new();
        let mut prev = 0.0;
        for (&t, &v) in times.iter().zip(values) {
            let v = v.clamp(0.0, 1.0);
            if v > prev {
                jumps.push((t, v - prev));
                prev = v;
            }
        }
        Self::new(jumps)
    }

    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.locations
            .iter()
            .copied()
            .zip(self.masses.iter().copied())
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `(s, F(s))` at every jump.
    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.locations
            .iter()
            .copied()
            .zip(self.cumulative.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn num_jumps(&self) -> usize {
        self.locations.len()
    }

    /// Sum of the masses at locations `<= t`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.locations.partition_point(|&s| s <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

impl Cdf for StepDistribution {
    fn cdf(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

/// The biweight kernel `K(t) = (15/16)(1 - t^2)^2` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SmoothKernel;

impl SmoothKernel {
    pub fn density(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            0.0
        } else {
            let a = 1.0 - u * u;
            15.0 / 16.0 * a * a
        }
    }

    pub fn cdf(&self, u: f64) -> f64 {
        kernel_cdf(u)
    }
}

/// Integral of the biweight kernel from -1 to `u`.
pub fn kernel_cdf(u: f64) -> f64 {
    if u <= -1.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let u2 = u * u;
        let v = 15.0 / 16.0 * (u - 2.0 * u * u2 / 3.0 + u * u2 * u2 / 5.0 + 8.0 / 15.0);
        v.clamp(0.0, 1.0)
    }
}

/// Kernel-smoothed NPMLE `t -> Σ p_j K̄((t - s_j)/h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedDistribution {
    base: StepDistribution,
    bandwidth: f64,
    kernel: SmoothKernel,
}

impl SmoothedDistribution {
    pub fn new(base: StepDistribution, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::input(format!(
                "bandwidth {bandwidth} must be positive"
            )));
        }
        Ok(SmoothedDistribution {
            base,
            bandwidth,
            kernel: SmoothKernel,
        })
    }

    pub fn base(&self) -> &StepDistribution {
        &self.base
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn eval(&self, t: f64) -> f64 {
        smle_at(&self.base, self.bandwidth, t)
    }

    /// Derivative of the smoothed estimator: `Σ p_j K_h(t - s_j)`.
    pub fn density(&self, t: f64) -> f64 {
        let h = self.bandwidth;
        let lo = self.base.locations.partition_point(|&s| s <= t - h);
        let hi = self.base.locations.partition_point(|&s| s < t + h);
        (lo..hi)
            .map(|j| {
                self.base.masses[j] * self.kernel.density((t - self.base.locations[j]) / h) / h
            })
            .sum()
    }
}

impl Cdf for SmoothedDistribution {
    fn cdf(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

/// Evaluates the smoothed estimator of `base` at `t` with bandwidth `h`.
///
/// Jumps at or below `t - h` contribute their full mass, jumps at or above
/// `t + h` nothing; only the jumps in between are run through the kernel.
pub fn smle_at(base: &StepDistribution, h: f64, t: f64) -> f64 {
    let full = base.eval(t - h);
    let lo = base.locations.partition_point(|&s| s <= t - h);
    let hi = base.locations.partition_point(|&s| s < t + h);
    let partial: f64 = (lo..hi)
        .map(|j| base.masses[j] * kernel_cdf((t - base.locations[j]) / h))
        .sum();
    (full + partial).clamp(0.0, 1.0)
}

pub fn smle_eval(dist: &SmoothedDistribution, t: f64) -> f64 {
    dist.eval(t)
}

/// Number of grid points on `[-1, 1]` used by [`check_local_linearity`].
pub const LINEARITY_GRID: usize = 201;

/// `sup_{|u| <= 1} n^{1/3} |F(t0 + n^{-1/3} u) - F(t0) - f0 n^{-1/3} u|` on a 201-point grid.
///
/// Small values mean `F` is locally linear with slope `f0` at the `n^{-1/3}` scale.
pub fn check_local_linearity<D: Cdf + ?Sized>(dist: &D, t0: f64, f0: f64, n: usize) -> Result<f64> {
    if !(f0 > 0.0) {
        return Err(Error::input(format!("density value {f0} must be positive")));
    }
    if n == 0 {
        return Err(Error::input("sample size must be positive"));
    }
    let scale = (n as f64).cbrt();
    let base = dist.cdf(t0);
    let mut worst: f64 = 0.0;
    for i in 0..LINEARITY_GRID {
        let u = -1.0 + 2.0 * i as f64 / (LINEARITY_GRID - 1) as f64;
        let step = u / scale;
        let dev = scale * (dist.cdf(t0 + step) - base - f0 * step).abs();
        worst = worst.max(dev);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_cdf_values() {
        assert_eq!(kernel_cdf(0.0), 0.5);
        assert_eq!(kernel_cdf(1.0), 1.0);
        assert_eq!(kernel_cdf(-1.0), 0.0);
        assert_eq!(kernel_cdf(7.0), 1.0);
        assert_eq!(kernel_cdf(-7.0), 0.0);
        assert!((kernel_cdf(0.5) - 0.896484375).abs() < 1e-15);
    }

    #[test]
    fn step_distribution_evaluation() {
        let d = StepDistribution::new(vec![(1.0, 0.25), (2.0, 0.5)]).unwrap();
        assert_eq!(d.eval(0.999), 0.0);
        assert_eq!(d.eval(1.0), 0.25);
        assert_eq!(d.eval(1.5), 0.25);
        assert_eq!(d.eval(2.0), 0.75);
        assert_eq!(d.eval(10.0), 0.75);
        assert_eq!(d.total_mass(), 0.75);
    }

    #[test]
    fn step_distribution_validation() {
        assert!(StepDistribution::new(vec![(1.0, 0.0)]).is_err());
        assert!(StepDistribution::new(vec![(1.0, 0.5), (1.0, 0.2)]).is_err());
        assert!(StepDistribution::new(vec![(1.0, 0.6), (2.0, 0.6)]).is_err());
        assert!(StepDistribution::new(vec![(f64::INFINITY, 0.5)]).is_err());
    }

    #[test]
    fn from_values_skips_flat_steps() {
        let d = StepDistribution::from_values(&[1.0, 2.0, 3.0], &[0.0, 0.5, 0.5]).unwrap();
        assert_eq!(d.num_jumps(), 1);
        assert_eq!(d.eval(2.5), 0.5);
    }

    #[test]
    fn smle_examples() {
        let unit = StepDistribution::new(vec![(1.0, 1.0)]).unwrap();
        let s = SmoothedDistribution::new(unit, 0.3).unwrap();
        assert_eq!(s.eval(1.0), 0.5);
        assert_eq!(s.eval(1.3), 1.0);
        assert_eq!(s.eval(5.0), 1.0);
        assert_eq!(s.eval(0.7), 0.0);

        let base = StepDistribution::new(vec![(1.0, 0.4), (2.0, 0.6)]).unwrap();
        let s = SmoothedDistribution::new(base, 0.5).unwrap();
        assert!((smle_eval(&s, 1.25) - 0.35859375).abs() < 1e-15);
    }

    #[test]
    fn bandwidth_must_be_positive() {
        assert!(SmoothedDistribution::new(StepDistribution::default(), 0.0).is_err());
        assert!(SmoothedDistribution::new(StepDistribution::default(), -1.0).is_err());
    }

    #[test]
    fn local_linearity_of_linear_function() {
        let lin = |t: f64| 0.3 + 0.2 * (t - 1.0);
        let v = check_local_linearity(&lin, 1.0, 0.2, 1000).unwrap();
        assert!(v < 1e-12);
    }

    #[test]
    fn local_linearity_of_jump() {
        let n = 1_000_000;
        let p = 0.01;
        let d = StepDistribution::new(vec![(0.5, 0.3), (1.0, p)]).unwrap();
        let v = check_local_linearity(&d, 1.0, 0.2, n).unwrap();
        assert!(v >= (n as f64).cbrt() * p - 1.0);
        assert!(check_local_linearity(&d, 1.0, 0.0, n).is_err());
    }
}
