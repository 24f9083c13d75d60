//! Grid checks of the two growth conditions the witness construction needs:
//! `φ(t)/t^c` non-decreasing on `(0, p]`, and `ψ(n²) ≤ C ψ(n)`.
//!
//! A pass is evidence on a finite grid, not a proof.

use serde::Serialize;

use super::ShapeFunction;
use crate::logspace::log_grid_exponents;

/// Points in the monotonicity grid.
pub const GRID_POINTS: usize = 1000;
/// The grid spans `[p e^{-GRID_DEPTH}, p]`.
pub const GRID_DEPTH: f64 = 50.0;

#[derive(Debug, Clone)]
pub struct AssumptionQuery {
    pub c_candidates: Vec<f64>,
    pub p_candidates: Vec<f64>,
    pub n_max: u64,
    /// Largest acceptable `ψ(n²)/ψ(n)`.
    pub square_bound: f64,
}

impl AssumptionQuery {
    pub fn new(c_candidates: Vec<f64>, p_candidates: Vec<f64>, n_max: u64) -> Self {
        AssumptionQuery {
            c_candidates,
            p_candidates,
            n_max,
            square_bound: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub c: f64,
    pub p: f64,
    /// `φ(t)/t^c` passed the monotonicity check on `(0, p]`.
    pub power_ratio_monotone: bool,
    #[serde(rename = "C")]
    pub square_constant: f64,
    pub square_growth_bounded: bool,
    /// `n` attaining the empirical square constant.
    pub square_argmax: u64,
    /// The grid used for the reported `(c, p)`.
    pub grid: Vec<f64>,
}

fn power_ratio_monotone(phi: &ShapeFunction, c: f64, p: f64) -> bool {
    if !(c > 0.0 && c < 1.0 && p > 0.0 && p <= 1.0) {
        return false;
    }
    let lp = p.ln();
    let mut prev = f64::NEG_INFINITY;
    for x in log_grid_exponents(lp - GRID_DEPTH, lp, GRID_POINTS) {
        let v = match phi.log_eval(x) {
            Ok(v) => v - c * x,
            Err(_) => return false,
        };
        if v < prev - 1e-12 * prev.abs().max(1.0) {
            return false;
        }
        prev = v;
    }
    true
}

/// Runs both checks; the reported `(c, p)` is the passing pair with the
/// largest `c`, then the largest `p`, or the first candidates if none pass.
pub fn check_assumptions(
    phi: &ShapeFunction,
    psi: &ShapeFunction,
    query: &AssumptionQuery,
) -> AssumptionReport {
    let mut best: Option<(f64, f64)> = None;
    for &c in &query.c_candidates {
        for &p in &query.p_candidates {
            if !power_ratio_monotone(phi, c, p) {
                continue;
            }
            let better = match best {
                None => true,
                Some((bc, bp)) => c > bc || (c == bc && p > bp),
            };
            if better {
                best = Some((c, p));
            }
        }
    }
    let passed = best.is_some();
    let (c, p) = best.unwrap_or((
        query.c_candidates.first().copied().unwrap_or(f64::NAN),
        query.p_candidates.first().copied().unwrap_or(f64::NAN),
    ));

    let mut square_constant = 1.0_f64;
    let mut square_argmax = 1;
    for n in 1..=query.n_max.max(1) {
        let nf = n as f64;
        let ratio = match (psi.eval(nf * nf), psi.eval(nf)) {
            (Ok(a), Ok(b)) if b > 0.0 => a / b,
            _ => f64::INFINITY,
        };
        if ratio > square_constant {
            square_constant = ratio;
            square_argmax = n;
        }
    }

    let grid = if p.is_finite() && p > 0.0 {
        log_grid_exponents(p.ln() - GRID_DEPTH, p.ln(), GRID_POINTS)
            .into_iter()
            .map(f64::exp)
            .collect()
    } else {
        Vec::new()
    };

    AssumptionReport {
        c,
        p,
        power_ratio_monotone: passed,
        square_constant,
        square_growth_bounded: square_constant <= query.square_bound,
        square_argmax,
        grid,
    }
}
