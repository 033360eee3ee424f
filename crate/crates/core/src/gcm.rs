//! Greatest convex minorant slopes and weighted isotonic regression.
//!
//! Both operations reduce to the same stack-based pool-adjacent-violators
//! pass: the left derivative of the greatest convex minorant of a cumulative
//! sum diagram at its `i`-th vertex is the isotonic regression of the chord
//! slopes `dy/dx`, weighted by `dx`.

use crate::error::{Error, Result};

/// A cumulative sum diagram: the origin `(x0, y0)` followed by at least one
/// point, with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct CusumDiagram {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl CusumDiagram {
    /// Builds a diagram from explicit points; the first point is the origin.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::input(
                "cumulative sum diagram needs the origin and at least one point",
            ));
        }
        let mut x = Vec::with_capacity(points.len());
        let mut y = Vec::with_capacity(points.len());
        for (i, &(px, py)) in points.iter().enumerate() {
            if !px.is_finite() || !py.is_finite() {
                return Err(Error::input(format!("non-finite diagram point {i}")));
            }
            if let Some(&prev) = x.last() {
                if px <= prev {
                    return Err(Error::input(format!(
                        "diagram abscissae must be strictly increasing (point {i}: {px} after {prev})"
                    )));
                }
            }
            x.push(px);
            y.push(py);
        }
        Ok(CusumDiagram { x, y })
    }

    /// Builds the diagram `(Σ w, Σ w·v)` starting at the origin `(0, 0)`.
    pub fn from_weighted(values: &[f64], weights: &[f64]) -> Result<Self> {
        check_weighted(values, weights)?;
        let mut points = Vec::with_capacity(values.len() + 1);
        points.push((0.0, 0.0));
        let (mut cx, mut cy) = (0.0, 0.0);
        for (&v, &w) in values.iter().zip(weights) {
            cx += w;
            cy += w * v;
            points.push((cx, cy));
        }
        CusumDiagram::new(&points)
    }

    /// Number of non-origin points.
    pub fn len(&self) -> usize {
        self.x.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.y.iter().copied())
    }
}

/// Left derivatives of the greatest convex minorant at every non-origin point.
pub fn gcm_left_slopes(diagram: &CusumDiagram) -> Vec<f64> {
    let n = diagram.len();
    let mut slopes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 1..=n {
        let dx = diagram.x[i] - diagram.x[i - 1];
        slopes.push((diagram.y[i] - diagram.y[i - 1]) / dx);
        weights.push(dx);
    }
    pava(&slopes, &weights)
}

/// Weighted least-squares fit over nondecreasing sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl IsotonicFit {
    pub fn weighted_sum(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }
}

pub fn isotonic_weighted(values: &[f64], weights: &[f64]) -> Result<IsotonicFit> {
    check_weighted(values, weights)?;
    Ok(IsotonicFit {
        values: pava(values, weights),
        weights: weights.to_vec(),
    })
}

fn check_weighted(values: &[f64], weights: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::input("isotonic regression needs at least one value"));
    }
    if values.len() != weights.len() {
        return Err(Error::input(format!(
            "{} values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    if let Some(i) = weights.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::input(format!(
            "weight {i} is not positive and finite"
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::input(format!("value {i} is not finite")));
    }
    Ok(())
}

#[derive(Clone, Copy)]
struct Block {
    mean: f64,
    weight: f64,
    len: usize,
}

/// Linear-time PAVA. Inputs are assumed validated. Only strict violations are
/// pooled, so an already monotone input comes back bit for bit.
pub(crate) fn pava(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut stack: Vec<Block> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let mut cur = Block {
            mean: v,
            weight: w,
            len: 1,
        };
        while let Some(prev) = stack.last() {
            if prev.mean > cur.mean {
                let weight = prev.weight + cur.weight;
                cur.mean = (prev.mean * prev.weight + cur.mean * cur.weight) / weight;
                cur.weight = weight;
                cur.len += prev.len;
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(cur);
    }
    let mut out = Vec::with_capacity(values.len());
    for b in &stack {
        out.extend(std::iter::repeat_n(b.mean, b.len));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn collinear_points() {
        let d = CusumDiagram::new(&[(0., 0.), (1., 1.), (2., 2.), (3., 3.)]).unwrap();
        assert!(close(&gcm_left_slopes(&d), &[1., 1., 1.]));
    }

    #[test]
    fn hull_examples() {
        // Expected values come from the exhaustive hull oracle in tests/gcm_oracle.rs.
        let d = CusumDiagram::new(&[(0., 0.), (1., 1.), (2., 1.), (3., 2.)]).unwrap();
        assert!(close(&gcm_left_slopes(&d), &[0.5, 0.5, 1.]));
        let d = CusumDiagram::new(&[(0., 0.), (1., 0.), (2., 2.)]).unwrap();
        assert!(close(&gcm_left_slopes(&d), &[0., 2.]));
    }

    #[test]
    fn diagram_errors() {
        assert!(CusumDiagram::new(&[]).is_err());
        assert!(CusumDiagram::new(&[(0., 0.)]).is_err());
        assert!(CusumDiagram::new(&[(0., 0.), (1., 1.), (1., 2.)]).is_err());
        assert!(CusumDiagram::new(&[(0., 0.), (2., 1.), (1., 2.)]).is_err());
    }

    #[test]
    fn isotonic_examples() {
        let f = isotonic_weighted(&[0., 0., 1., 1.], &[1.; 4]).unwrap();
        assert!(close(&f.values, &[0., 0., 1., 1.]));
        let f = isotonic_weighted(&[1., 0., 1.], &[1.; 3]).unwrap();
        assert!(close(&f.values, &[0.5, 0.5, 1.]));
        let f = isotonic_weighted(&[1., 0.], &[1., 3.]).unwrap();
        assert!(close(&f.values, &[0.25, 0.25]));
    }

    #[test]
    fn isotonic_errors() {
        assert!(isotonic_weighted(&[], &[]).is_err());
        assert!(isotonic_weighted(&[1., 2.], &[1.]).is_err());
        assert!(isotonic_weighted(&[1., 2.], &[1., 0.]).is_err());
        assert!(isotonic_weighted(&[1., 2.], &[1., -1.]).is_err());
    }

    #[test]
    fn weighted_sum_preserved() {
        let v = [3.0, -1.0, 2.0, 0.5, 0.4, 7.0];
        let w = [0.5, 2.0, 1.0, 3.0, 0.1, 1.0];
        let f = isotonic_weighted(&v, &w).unwrap();
        let raw: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        assert!((f.weighted_sum() - raw).abs() <= 1e-10 * raw.abs().max(1.0));
    }
}
