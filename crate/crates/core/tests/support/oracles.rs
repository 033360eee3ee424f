//! Slow, independent reference implementations used by the test suites.

#![allow(dead_code)]

use icboot_core::CensoringInterval;

/// Left slopes of the greatest convex minorant, from the lower hull over all point pairs.
pub fn hull_slopes(points: &[(f64, f64)]) -> Vec<f64> {
    let minorant = |x: f64| {
        let mut best = f64::INFINITY;
        for &(xa, ya) in points {
            for &(xb, yb) in points {
                if xa <= x && x <= xb {
                    let v = if xb > xa {
                        ya + (yb - ya) * (x - xa) / (xb - xa)
                    } else {
                        ya
                    };
                    best = best.min(v);
                }
            }
        }
        best
    };
    points
        .windows(2)
        .map(|w| (minorant(w[1].0) - minorant(w[0].0)) / (w[1].0 - w[0].0))
        .collect()
}

/// Weighted isotonic regression by enumerating every partition into contiguous
/// level sets and keeping the best monotone candidate.
pub fn level_set_isotonic(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (n - 1)) {
        let mut fit = vec![0.0; n];
        let mut start = 0;
        for end in 1..=n {
            let cut = end == n || mask & (1 << (end - 1)) != 0;
            if cut {
                let w: f64 = weights[start..end].iter().sum();
                let s: f64 = (start..end).map(|i| values[i] * weights[i]).sum();
                for f in &mut fit[start..end] {
                    *f = s / w;
                }
                start = end;
            }
        }
        if fit.windows(2).any(|p| p[0] > p[1] + 1e-15) {
            continue;
        }
        let sse: f64 = (0..n)
            .map(|i| weights[i] * (values[i] - fit[i]).powi(2))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| sse < *b - 1e-15) {
            best = Some((sse, fit));
        }
    }
    best.expect("the all-pooled partition is always monotone").1
}

/// Current status log-likelihood with `F` given at the sorted distinct times.
pub fn cs_loglik(times: &[f64], deltas: &[bool], grid_times: &[f64], values: &[f64]) -> f64 {
    times
        .iter()
        .zip(deltas)
        .map(|(&t, &d)| {
            let k = grid_times
                .iter()
                .position(|&g| g == t)
                .expect("time on grid");
            let f = values[k];
            let p = if d { f } else { 1.0 - f };
            if p <= 0.0 {
                f64::NEG_INFINITY
            } else {
                p.ln()
            }
        })
        .sum()
}

/// Best current status log-likelihood over nondecreasing candidates with values on `{0, step, ..., 1}`.
pub fn grid_best_cs_loglik(times: &[f64], deltas: &[bool], step: f64) -> f64 {
    let mut distinct = times.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let levels = (1.0 / step).round() as usize;
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; distinct.len()];
    loop {
        let values: Vec<f64> = idx.iter().map(|&i| i as f64 / levels as f64).collect();
        best = best.max(cs_loglik(times, deltas, &distinct, &values));
        // Next nondecreasing index vector.
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return best;
            }
            pos -= 1;
            if idx[pos] < levels {
                idx[pos] += 1;
                let v = idx[pos];
                for x in &mut idx[pos + 1..] {
                    *x = v;
                }
                break;
            }
        }
    }
}

/// Maximal intersections by brute force over all (left endpoint, right endpoint) pairs.
pub fn brute_turnbull(intervals: &[CensoringInterval]) -> Vec<(f64, f64)> {
    let lefts: Vec<f64> = intervals.iter().map(|i| i.left()).collect();
    let rights: Vec<f64> = intervals.iter().map(|i| i.right()).collect();
    let mut out = Vec::new();
    for &l in &lefts {
        for &r in &rights {
            if l >= r {
                continue;
            }
            // No other endpoint strictly inside; a left endpoint counts as lying
            // just to the right of an equal right endpoint, so neither can split (l, r].
            let inside = lefts.iter().chain(&rights).any(|&x| x > l && x < r);
            if !inside {
                out.push((l, r));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.dedup();
    out
}

/// Self-consistency (EM) iteration on the maximal intersections. Every 2000
/// iterations, small masses whose directional derivative is clearly negative
/// are set to zero; plain EM only approaches such zeros at rate `1/iterations`.
/// Zeros with a positive derivative at convergence are restarted and never pruned again.
pub fn em_npmle(intervals: &[CensoringInterval], max_iter: usize) -> (Vec<(f64, f64)>, Vec<f64>) {
    let support = brute_turnbull(intervals);
    let m = support.len();
    let member: Vec<Vec<usize>> = intervals
        .iter()
        .map(|iv| {
            (0..m)
                .filter(|&j| support[j].0 >= iv.left() && support[j].1 <= iv.right())
                .collect()
        })
        .collect();
    let n = intervals.len() as f64;
    let mut p = vec![1.0 / m as f64; m];
    let mut revived = vec![false; m];
    for iter in 1..=max_iter {
        let mut next = vec![0.0; m];
        let mut deriv = vec![-1.0; m];
        for cells in &member {
            let total: f64 = cells.iter().map(|&j| p[j]).sum();
            for &j in cells {
                next[j] += p[j] / total / n;
                deriv[j] += 1.0 / total / n;
            }
        }
        if iter % 2000 == 0 {
            for j in 0..m {
                if !revived[j] && next[j] < 1e-3 && deriv[j] < -1e-4 {
                    next[j] = 0.0;
                }
            }
            let total: f64 = next.iter().sum();
            for x in &mut next {
                *x /= total;
            }
        }
        let change = p
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        p = next;
        if change < 1e-15 {
            // Zeros that the likelihood wants back; EM alone never revives them.
            let revive: Vec<usize> = (0..m).filter(|&j| p[j] == 0.0 && deriv[j] > 1e-9).collect();
            if revive.is_empty() {
                break;
            }
            for j in revive {
                p[j] = 1e-3;
                revived[j] = true;
            }
            let total: f64 = p.iter().sum();
            for x in &mut p {
                *x /= total;
            }
        }
    }
    (support, p)
}

/// Distribution function of masses placed at the right ends of the support intervals.
pub fn masses_cdf(support: &[(f64, f64)], masses: &[f64], t: f64) -> f64 {
    support
        .iter()
        .zip(masses)
        .filter(|((_, r), _)| r.is_finite() && *r <= t)
        .map(|(_, p)| p)
        .sum()
}
