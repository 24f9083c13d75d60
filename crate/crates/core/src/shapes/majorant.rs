use super::ShapeFunction;
use crate::error::{Error, Result};

/// Relative slack for slope and ratio comparisons.
const SLACK: f64 = 1e-10;

fn slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1) / (b.0 - a.0)
}

fn le_slack(a: f64, b: f64) -> bool {
    a <= b + SLACK * a.abs().max(b.abs()).max(1e-300)
}

/// Consecutive slopes are non-increasing.
pub fn is_concave(samples: &[(f64, f64)]) -> bool {
    samples
        .windows(3)
        .all(|w| le_slack(slope(w[1], w[2]), slope(w[0], w[1])))
}

/// Vanishes only at the origin, non-decreasing, with `y/t` non-increasing.
pub fn is_quasiconcave(samples: &[(f64, f64)]) -> bool {
    for &(t, y) in samples {
        if t == 0.0 && y != 0.0 {
            return false;
        }
        if t > 0.0 && !(y > 0.0) {
            return false;
        }
    }
    samples.windows(2).all(|w| {
        let ((t0, y0), (t1, y1)) = (w[0], w[1]);
        if !le_slack(y0, y1) {
            return false;
        }
        t0 == 0.0 || le_slack(y1 / t1, y0 / t0)
    })
}

/// Upper concave envelope of the samples, as piecewise-linear data.
pub fn least_concave_majorant(samples: &[(f64, f64)]) -> Result<ShapeFunction> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if samples[0] != (0.0, 0.0) {
        return Err(Error::InvalidShape("samples must start at (0, 0)".into()));
    }
    if samples.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::InvalidShape("sample abscissae must strictly increase".into()));
    }
    if samples.iter().any(|&(t, y)| !(t <= 1.0) || !(y >= 0.0) || !y.is_finite()) {
        return Err(Error::InvalidShape("samples must lie in [0, 1] × [0, ∞)".into()));
    }

    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    for &p in samples {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    if hull.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err(Error::NotMonotone);
    }
    ShapeFunction::piecewise(hull.into_iter().map(|(t, y)| [t, y]).collect())
}
