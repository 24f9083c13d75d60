//! Log-domain arithmetic and sampling grids.
//!
//! Quantities such as the witness measures drop far below the smallest
//! positive `f64`, so sums and differences are carried as logarithms.

/// `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(Σ exp(x_i))`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// `log(1 - exp(x))` for `x <= 0`.
///
/// Switches between `ln(-expm1(x))` and `ln_1p(-exp(x))` at `-ln 2`.
pub fn log1m_exp(x: f64) -> f64 {
    debug_assert!(x <= 0.0, "log1m_exp needs x <= 0, got {x}");
    if x == f64::NEG_INFINITY {
        0.0
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `n` log-spaced points from `t_min` to `t_max`, both endpoints included.
pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = log_grid_exponents(t_min.ln(), t_max.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect();
    // exact endpoints, not their exp-ln images
    if let Some(first) = grid.first_mut() {
        *first = t_min;
    }
    if n > 1 {
        grid[n - 1] = t_max;
    }
    grid
}

/// `n` equally spaced exponents from `lo` to `hi`, both endpoints included.
pub fn log_grid_exponents(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// `n` equally spaced points from `lo` to `hi`, both endpoints included.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    log_grid_exponents(lo, hi, n)
}
