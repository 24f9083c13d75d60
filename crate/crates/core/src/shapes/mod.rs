//! Concave shape functions playing the roles of `φ` on `[0, 1]` and `ψ` on
//! `[0, ∞)`, with log-domain evaluation and the ratio `γ(t) = φ(t)/t`.

mod assumptions;
mod majorant;

pub use assumptions::{check_assumptions, AssumptionQuery, AssumptionReport};
pub use majorant::{is_concave, is_quasiconcave, least_concave_majorant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute stopping width for the bisection in `log t`.
pub const GAMMA_INV_TOL: f64 = 1e-12;

/// The analytic families plus piecewise-linear data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `t^α (1 + log(1/t))^β`, frozen at its maximum above `min{1, e^{1-β/α}}`.
    AlphaBeta { alpha: f64, beta: f64 },
    /// `(1 + log t)^γ` on `[1, ∞)`, `t` on `[0, 1)`.
    PsiGamma { gamma: f64 },
    /// `t log(e/t)`.
    QaPhi,
    /// `1 + log t` on `[1, ∞)`, `t` on `[0, 1)`.
    QaPsi,
    Identity,
    /// `1` on `(0, ∞)`, `0` at the origin.
    ConstantOne,
    /// Linear interpolation through `(t, y)` points starting at `(0, 0)`.
    Piecewise { points: Vec<[f64; 2]> },
}

/// Where a shape may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    /// `[0, 1]`: φ-type.
    Unit,
    /// `[0, ∞)`: ψ-type (also fine as φ).
    HalfLine,
    /// `[0, t_max]` for piecewise data.
    Bounded(f64),
}

/// A validated concave, non-decreasing shape vanishing only at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct ShapeFunction {
    family: Family,
}

impl TryFrom<Family> for ShapeFunction {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        ShapeFunction::new(family)
    }
}

impl From<ShapeFunction> for Family {
    fn from(shape: ShapeFunction) -> Self {
        shape.family
    }
}

impl ShapeFunction {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::AlphaBeta { alpha, beta } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidShape(format!("alpha {alpha} not in (0, 1]")));
                }
                if !(0.0..=1.0).contains(beta) {
                    return Err(Error::InvalidShape(format!("beta {beta} not in [0, 1]")));
                }
            }
            Family::PsiGamma { gamma } => {
                if !(0.0..=1.0).contains(gamma) {
                    return Err(Error::InvalidShape(format!("gamma {gamma} not in [0, 1]")));
                }
            }
            Family::Piecewise { points } => validate_points(points)?,
            Family::QaPhi | Family::QaPsi | Family::Identity | Family::ConstantOne => {}
        }
        Ok(ShapeFunction { family })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidShape(e.to_string()))
    }

    pub fn alpha_beta(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::AlphaBeta { alpha, beta })
    }

    pub fn psi_gamma(gamma: f64) -> Result<Self> {
        Self::new(Family::PsiGamma { gamma })
    }

    pub fn qa_phi() -> Self {
        ShapeFunction {
            family: Family::QaPhi,
        }
    }

    pub fn qa_psi() -> Self {
        ShapeFunction {
            family: Family::QaPsi,
        }
    }

    pub fn identity() -> Self {
        ShapeFunction {
            family: Family::Identity,
        }
    }

    pub fn constant_one() -> Self {
        ShapeFunction {
            family: Family::ConstantOne,
        }
    }

    pub fn piecewise(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(Family::Piecewise { points })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain_kind(&self) -> DomainKind {
        match &self.family {
            Family::AlphaBeta { .. } | Family::QaPhi => DomainKind::Unit,
            Family::PsiGamma { .. } | Family::QaPsi | Family::Identity | Family::ConstantOne => {
                DomainKind::HalfLine
            }
            Family::Piecewise { points } => DomainKind::Bounded(points.last().unwrap()[0]),
        }
    }

    /// Whether the shape can serve as `φ` (defined on all of `[0, 1]`).
    pub fn covers_unit_interval(&self) -> bool {
        match self.domain_kind() {
            DomainKind::Unit | DomainKind::HalfLine => true,
            DomainKind::Bounded(t_max) => t_max >= 1.0,
        }
    }

    /// Whether the shape can serve as `ψ` (defined on all of `[0, ∞)`).
    pub fn covers_half_line(&self) -> bool {
        self.domain_kind() == DomainKind::HalfLine
    }

    /// `φ(0₊)`: non-zero only for the constant family.
    pub fn at_zero_plus(&self) -> f64 {
        match self.family {
            Family::ConstantOne => 1.0,
            _ => 0.0,
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let ok = t >= 0.0
            && match self.domain_kind() {
                DomainKind::Unit => t <= 1.0,
                DomainKind::HalfLine => t.is_finite(),
                DomainKind::Bounded(t_max) => t <= t_max,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(self.name(), t))
        }
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::AlphaBeta { .. } => "alpha_beta",
            Family::PsiGamma { .. } => "psi_gamma",
            Family::QaPhi => "qa_phi",
            Family::QaPsi => "qa_psi",
            Family::Identity => "identity",
            Family::ConstantOne => "constant_one",
            Family::Piecewise { .. } => "piecewise",
        }
    }

    /// Value at `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.family {
            Family::AlphaBeta { alpha, beta } => {
                let (knee, plateau) = alpha_beta_knee(*alpha, *beta);
                if t <= knee {
                    t.powf(*alpha) * (1.0 - t.ln()).powf(*beta)
                } else {
                    plateau
                }
            }
            Family::PsiGamma { gamma } => {
                if t < 1.0 {
                    t
                } else {
                    (1.0 + t.ln()).powf(*gamma)
                }
            }
            Family::QaPhi => t * (1.0 - t.ln()),
            Family::QaPsi => {
                if t < 1.0 {
                    t
                } else {
                    1.0 + t.ln()
                }
            }
            Family::Identity => t,
            Family::ConstantOne => 1.0,
            Family::Piecewise { points } => interpolate(points, t),
        })
    }

    /// `log φ(e^x)`, accurate far below the `f64` underflow threshold.
    pub fn log_eval(&self, log_t: f64) -> Result<f64> {
        if log_t.is_nan() {
            return Err(Error::domain(self.name(), log_t));
        }
        if let DomainKind::Unit = self.domain_kind() {
            if log_t > 0.0 {
                return Err(Error::domain(self.name(), log_t.exp()));
            }
        }
        if log_t == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(match &self.family {
            Family::AlphaBeta { alpha, beta } => {
                let (knee, plateau) = alpha_beta_knee(*alpha, *beta);
                if log_t <= knee.ln() {
                    alpha * log_t + beta * (-log_t).ln_1p()
                } else {
                    plateau.ln()
                }
            }
            Family::PsiGamma { gamma } => {
                if log_t < 0.0 {
                    log_t
                } else if *gamma == 0.0 {
                    0.0
                } else {
                    gamma * log_t.ln_1p()
                }
            }
            Family::QaPhi => log_t + (-log_t).ln_1p(),
            Family::QaPsi => {
                if log_t < 0.0 {
                    log_t
                } else {
                    log_t.ln_1p()
                }
            }
            Family::Identity => log_t,
            Family::ConstantOne => 0.0,
            Family::Piecewise { points } => {
                let smallest = points[1][0];
                if log_t < smallest.ln() {
                    return Err(Error::UnsupportedFamily(format!(
                        "piecewise data start at t = {smallest}, log t = {log_t} requested"
                    )));
                }
                self.eval(log_t.exp())?.ln()
            }
        })
    }

    /// `γ(t) = φ(t)/t` for `t ∈ (0, 1]`.
    pub fn gamma(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::domain("gamma", t));
        }
        Ok(self.eval(t)? / t)
    }

    /// `log γ(e^x)`, computed without forming `log φ - log t`.
    pub fn log_gamma(&self, log_t: f64) -> Result<f64> {
        if !(log_t <= 0.0) {
            return Err(Error::domain("gamma", log_t.exp()));
        }
        if log_t == f64::NEG_INFINITY {
            return match self.family {
                Family::Identity | Family::PsiGamma { .. } | Family::QaPsi => Ok(0.0),
                Family::Piecewise { .. } => {
                    Err(Error::UnsupportedFamily("piecewise at t = 0".into()))
                }
                _ => Ok(f64::INFINITY),
            };
        }
        Ok(match &self.family {
            Family::AlphaBeta { alpha, beta } => {
                let (knee, plateau) = alpha_beta_knee(*alpha, *beta);
                if log_t <= knee.ln() {
                    (alpha - 1.0) * log_t + beta * (-log_t).ln_1p()
                } else {
                    plateau.ln() - log_t
                }
            }
            Family::PsiGamma { .. } | Family::QaPsi | Family::Identity => {
                if log_t < 0.0 {
                    0.0
                } else {
                    self.log_eval(log_t)?
                }
            }
            Family::QaPhi => (-log_t).ln_1p(),
            Family::ConstantOne => -log_t,
            Family::Piecewise { .. } => self.log_eval(log_t)? - log_t,
        })
    }

    /// Solves `γ(t) = y` for `t ∈ (0, 1]`.
    pub fn gamma_inv(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::domain("gamma_inv", y));
        }
        Ok(self.gamma_inv_log(y.ln(), 0.0)?.exp())
    }

    /// Solves `log γ(e^x) = log_y` for `x ≤ log_t_hi` by bracket expansion
    /// and bisection in `x`, checking that `γ` strictly decreases along the
    /// way. Returns `x`.
    pub fn gamma_inv_log(&self, log_y: f64, log_t_hi: f64) -> Result<f64> {
        let lg = |x: f64| self.log_gamma(x);
        let g_hi = lg(log_t_hi)?;
        if g_hi > log_y {
            return Err(Error::NotInvertible(format!(
                "log γ = {g_hi} at the bracket top already exceeds {log_y}"
            )));
        }
        if g_hi == log_y {
            return Ok(log_t_hi);
        }

        // steps below the spacing of f64 near `log_t_hi` would stall
        let mut step = (log_t_hi.abs() * 1e-3).max(1.0);
        let mut prev = g_hi;
        let mut hi = log_t_hi;
        let mut lo = log_t_hi - step;
        loop {
            let g = lg(lo)?;
            if !(g > prev) {
                return Err(Error::NotInvertible(format!(
                    "{} ratio φ(t)/t is not strictly decreasing near log t = {lo}",
                    self.name()
                )));
            }
            if g >= log_y {
                break;
            }
            prev = g;
            hi = lo;
            step *= 2.0;
            if step > f64::MAX / 4.0 {
                return Err(Error::Underflow);
            }
            lo = log_t_hi - step;
        }

        let (mut g_lo, mut g_hi) = (lg(lo)?, lg(hi)?);
        for _ in 0..4096 {
            if hi - lo <= GAMMA_INV_TOL {
                break;
            }
            let mid = lo + (hi - lo) / 2.0;
            if mid <= lo || mid >= hi {
                break;
            }
            let g = lg(mid)?;
            if !(g <= g_lo && g >= g_hi) {
                return Err(Error::NotInvertible(format!(
                    "ratio φ(t)/t not monotone at log t = {mid}"
                )));
            }
            if g > log_y {
                lo = mid;
                g_lo = g;
            } else {
                hi = mid;
                g_hi = g;
            }
        }
        Ok(if (g_lo - log_y).abs() <= (g_hi - log_y).abs() {
            lo
        } else {
            hi
        })
    }

    /// `(t, φ(t))` on the given points.
    pub fn samples(&self, ts: &[f64]) -> Result<Vec<(f64, f64)>> {
        ts.iter().map(|&t| Ok((t, self.eval(t)?))).collect()
    }
}

/// Knee `min{1, e^{1-β/α}}` and the plateau value `e^{α-β}(β/α)^β`.
fn alpha_beta_knee(alpha: f64, beta: f64) -> (f64, f64) {
    let knee_log = 1.0 - beta / alpha;
    if knee_log >= 0.0 {
        (1.0, 1.0)
    } else {
        (knee_log.exp(), (alpha - beta).exp() * (beta / alpha).powf(beta))
    }
}

fn interpolate(points: &[[f64; 2]], t: f64) -> f64 {
    let i = points.partition_point(|p| p[0] <= t);
    if i >= points.len() {
        return points[points.len() - 1][1];
    }
    let [t0, y0] = points[i - 1];
    let [t1, y1] = points[i];
    y0 + (y1 - y0) * (t - t0) / (t1 - t0)
}

fn validate_points(points: &[[f64; 2]]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::InvalidShape("piecewise data need at least two points".into()));
    }
    if points[0] != [0.0, 0.0] {
        return Err(Error::InvalidShape("piecewise data must start at (0, 0)".into()));
    }
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidShape("non-finite piecewise data".into()));
    }
    if points.windows(2).any(|w| !(w[0][0] < w[1][0])) {
        return Err(Error::InvalidShape("abscissae must strictly increase".into()));
    }
    if points[1..].iter().any(|p| !(p[1] > 0.0)) {
        return Err(Error::InvalidShape("values must be positive away from 0".into()));
    }
    if points.windows(2).any(|w| w[1][1] < w[0][1]) {
        return Err(Error::InvalidShape("values must be non-decreasing".into()));
    }
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    if !is_concave(&pairs) {
        return Err(Error::InvalidShape("piecewise data are not concave".into()));
    }
    Ok(())
}
