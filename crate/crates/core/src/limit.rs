//! Limit-law constants and Monte Carlo draws from Chernoff's distribution,
//! the law of `argmin_h {Z(h) + h^2}` for a two-sided standard Brownian motion `Z`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// Cube-root scale of the current status NPMLE: `[4 F (1 - F) f / g]^{1/3}`.
pub fn kappa_cs(f_t0: f64, density_t0: f64, exam_density_t0: f64) -> Result<f64> {
    if !(f_t0 > 0.0 && f_t0 < 1.0) {
        return Err(Error::input(format!("F(t0) = {f_t0} must lie in (0, 1)")));
    }
    if !(density_t0 > 0.0) || !(exam_density_t0 > 0.0) {
        return Err(Error::input("densities must be positive"));
    }
    Ok((4.0 * f_t0 * (1.0 - f_t0) * density_t0 / exam_density_t0).cbrt())
}

/// Scale of the case 2 one-step estimator: `[(3/4) f^2 / h(t0, t0)]^{1/3}`.
pub fn kappa_case2(density_t0: f64, joint_exam_density: f64) -> Result<f64> {
    if !(density_t0 > 0.0) || !(joint_exam_density > 0.0) {
        return Err(Error::input("densities must be positive"));
    }
    Ok((0.75 * density_t0 * density_t0 / joint_exam_density).cbrt())
}

/// Grid and replication settings for [`simulate_chernoff`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffConfig {
    /// The grid spans `[-half_width, half_width]`.
    pub half_width: f64,
    pub dt: f64,
    pub replicates: usize,
    pub seed: u64,
}

/// Largest number of grid steps per side.
pub const MAX_STEPS: f64 = 1e7;

impl Default for ChernoffConfig {
    fn default() -> Self {
        ChernoffConfig {
            half_width: 4.0,
            dt: 1e-3,
            replicates: 100_000,
            seed: 0,
        }
    }
}

impl ChernoffConfig {
    fn steps(&self) -> Result<usize> {
        if !(self.half_width > 0.0 && self.dt > 0.0) {
            return Err(Error::input("half width and step must be positive"));
        }
        if self.replicates == 0 {
            return Err(Error::input("need at least one replicate"));
        }
        let steps = (self.half_width / self.dt).round();
        if steps > MAX_STEPS {
            return Err(Error::input(format!(
                "{steps} grid steps per side exceeds the limit of {MAX_STEPS}"
            )));
        }
        Ok((steps as usize).max(1))
    }
}

/// Draws of Chernoff's distribution on a discrete grid.
///
/// Each side of the two-sided Brownian motion is a cumulative sum of
/// independent `N(0, dt)` increments; the minimizing grid point is returned,
/// with ties going to the smaller `|h|` (and to the negative side at equal `|h|`).
pub fn simulate_chernoff(cfg: &ChernoffConfig) -> Result<Vec<f64>> {
    let steps = cfg.steps()?;
    let dt = cfg.half_width / steps as f64;
    let sd = dt.sqrt();
    Ok((0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(cfg.seed, Purpose::Chernoff, r, 0);
            let mut best = 0.0;
            let mut best_idx: i64 = 0;
            for side in [-1i64, 1] {
                let mut z = 0.0;
                for k in 1..=steps as i64 {
                    let inc: f64 = StandardNormal.sample(&mut rng);
                    z += sd * inc;
                    let h = k as f64 * dt;
                    let v = z + h * h;
                    if v < best || (v == best && k < best_idx.abs()) {
                        best = v;
                        best_idx = side * k;
                    }
                }
            }
            best_idx as f64 * dt
        })
        .collect())
}

/// Type-7 quantile: linear interpolation between order statistics.
pub fn empirical_quantile(samples: &[f64], p: f64) -> Result<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, p)
}

/// [`empirical_quantile`] on data already sorted ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::input("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("probability {p} outside [0, 1]")));
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Two-sample Kolmogorov-Smirnov distance `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
