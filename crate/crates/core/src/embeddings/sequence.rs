use serde::{Deserialize, Serialize};

use super::loglog_argument;
use crate::error::{Error, Result};
use crate::shapes::ShapeFunction;

/// Default number of terms examined by [`phi_s`].
pub const DEFAULT_N_MAX: usize = 10_000;
/// The decay conditions ask the tail to fall below this fraction of the head.
pub const DECAY_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceKind {
    /// `s(x) = 1/x`.
    Reciprocal,
    /// `s(x) = γ⁻¹(e^{x-1})`.
    GammaExp,
    /// Linear interpolation through `(x, s)` points.
    Samples { points: Vec<[f64; 2]> },
}

fn one() -> f64 {
    1.0
}

/// A map `s: [domain_start, ∞) → (0, 1]` and the sequence `s_n = s(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    #[serde(flatten)]
    pub kind: SequenceKind,
    #[serde(default = "one")]
    pub domain_start: f64,
}

impl SequenceSpec {
    pub fn reciprocal() -> Self {
        SequenceSpec {
            kind: SequenceKind::Reciprocal,
            domain_start: 1.0,
        }
    }

    pub fn gamma_exp() -> Self {
        SequenceSpec {
            kind: SequenceKind::GammaExp,
            domain_start: 1.0,
        }
    }

    pub fn samples(points: Vec<[f64; 2]>) -> Result<Self> {
        let spec = SequenceSpec {
            domain_start: points.first().map_or(1.0, |p| p[0]),
            kind: SequenceKind::Samples { points },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SequenceSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidShape(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.domain_start >= 1.0 && self.domain_start.is_finite()) {
            return Err(Error::domain("sequence domain start", self.domain_start));
        }
        if let SequenceKind::Samples { points } = &self.kind {
            if points.is_empty() {
                return Err(Error::EmptyInput);
            }
            if points.windows(2).any(|w| !(w[0][0] < w[1][0])) {
                return Err(Error::InvalidShape("sample abscissae must strictly increase".into()));
            }
            if points.iter().any(|p| !(p[1] > 0.0 && p[1] <= 1.0)) {
                return Err(Error::InvalidShape("sequence values must lie in (0, 1]".into()));
            }
            if points[0][0] > self.domain_start {
                return Err(Error::InvalidShape("samples start after the domain start".into()));
            }
        }
        Ok(())
    }

    /// Whether `s` is decreasing by construction or by its data.
    pub fn is_decreasing(&self) -> bool {
        match &self.kind {
            SequenceKind::Reciprocal | SequenceKind::GammaExp => true,
            SequenceKind::Samples { points } => points.windows(2).all(|w| w[1][1] < w[0][1]),
        }
    }

    /// Last admissible argument (`∞` for the analytic kinds).
    pub fn domain_end(&self) -> f64 {
        match &self.kind {
            SequenceKind::Samples { points } => points[points.len() - 1][0],
            _ => f64::INFINITY,
        }
    }

    /// `log s(x)`.
    pub fn log_value(&self, phi: &ShapeFunction, x: f64) -> Result<f64> {
        if !(x >= self.domain_start && x <= self.domain_end()) {
            return Err(Error::domain("sequence", x));
        }
        match &self.kind {
            SequenceKind::Reciprocal => Ok(-x.ln()),
            SequenceKind::GammaExp => phi.gamma_inv_log(x - 1.0, 0.0),
            SequenceKind::Samples { points } => {
                let i = points.partition_point(|p| p[0] <= x);
                if i >= points.len() {
                    return Ok(points[points.len() - 1][1].ln());
                }
                let [x0, y0] = points[i - 1];
                let [x1, y1] = points[i];
                Ok((y0 + (y1 - y0) * (x - x0) / (x1 - x0)).ln())
            }
        }
    }

    pub fn value(&self, phi: &ShapeFunction, x: f64) -> Result<f64> {
        Ok(self.log_value(phi, x)?.exp())
    }

    /// `s⁻¹(t)` for `t` in the range of `s`.
    pub fn inverse(&self, phi: &ShapeFunction, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::domain("inverse sequence", t));
        }
        let x = match &self.kind {
            SequenceKind::Reciprocal => 1.0 / t,
            // `1 + log γ(t)`, shared with τ so the two agree bit for bit
            SequenceKind::GammaExp => loglog_argument(phi, t.ln())?,
            SequenceKind::Samples { points } => return self.samples_inverse(points, t),
        };
        if x < self.domain_start {
            return Err(Error::domain("inverse sequence", t));
        }
        if let SequenceKind::GammaExp = self.kind {
            if phi.log_gamma(t.ln())? < 0.0 {
                return Err(Error::domain("inverse sequence (γ < 1)", t));
            }
        }
        Ok(x)
    }

    fn samples_inverse(&self, points: &[[f64; 2]], t: f64) -> Result<f64> {
        if !self.is_decreasing() {
            return Err(Error::NotInvertible("sample sequence is not decreasing".into()));
        }
        let s = |x: f64| self.log_value(&ShapeFunction::identity(), x).map(f64::exp);
        let (mut lo, mut hi) = (self.domain_start, points[points.len() - 1][0]);
        let (s_lo, s_hi) = (s(lo)?, s(hi)?);
        if t > s_lo || t < s_hi {
            return Err(Error::domain("inverse sequence", t));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if s(mid)? > t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Value of the infimum together with where it was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiSValue {
    pub value: f64,
    pub argmin: usize,
    /// `true` if `n_max` ran out before the terms started increasing.
    pub truncated: bool,
}

/// `inf_n max{s_n, t} γ(s_n) ψ(n)` over `n = ⌈domain_start⌉, …`, at most
/// `n_max` terms. For decreasing `s`, terms past the first `n` with
/// `s_n ≤ t` can only grow, so the scan stops there.
pub fn phi_s(
    phi: &ShapeFunction,
    psi: &ShapeFunction,
    seq: &SequenceSpec,
    t: f64,
    n_max: usize,
) -> Result<PhiSValue> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain("phi_s", t));
    }
    let start = seq.domain_start.ceil() as usize;
    if t == 0.0 {
        return Ok(PhiSValue {
            value: 0.0,
            argmin: start,
            truncated: false,
        });
    }
    let log_t = t.ln();
    let stop_early = seq.is_decreasing();
    let mut best = f64::INFINITY;
    let mut argmin = start;
    let mut truncated = true;
    for n in start..start + n_max {
        let nf = n as f64;
        if nf > seq.domain_end() {
            break;
        }
        let log_s = match seq.log_value(phi, nf) {
            Ok(v) => v,
            Err(Error::Underflow) => break,
            Err(e) => return Err(e),
        };
        let term = log_s.max(log_t) + phi.log_gamma(log_s)? + psi.eval(nf)?.ln();
        if term < best {
            best = term;
            argmin = n;
        }
        if stop_early && log_s <= log_t {
            truncated = false;
            break;
        }
    }
    Ok(PhiSValue {
        value: best.exp(),
        argmin,
        truncated,
    })
}

/// `φ(t) ψ(s⁻¹(t))`, zero at the origin.
pub fn alpha_s(phi: &ShapeFunction, psi: &ShapeFunction, seq: &SequenceSpec, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let x = seq.inverse(phi, t)?;
    Ok(phi.eval(t)? * psi.eval(x)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeqConditionReport {
    pub decreasing: ConditionCheck,
    /// `s(x) → 0`.
    pub vanishes: ConditionCheck,
    /// `φ(s(x)) ψ(x) → 0`.
    pub product_vanishes: ConditionCheck,
    /// `(φ∘s)ψ` non-increasing from `x0` on.
    pub eventually_monotone: ConditionCheck,
    pub x0: Option<f64>,
    /// `γ(s(n+1)) ≤ C γ(s(n))`.
    pub ratio_bounded: ConditionCheck,
    #[serde(rename = "C")]
    pub ratio_constant: f64,
    pub all_passed: bool,
}

/// Grid evaluation of the four conditions under which `φ_s ≍ α_s`.
pub fn check_seq_conditions(
    phi: &ShapeFunction,
    psi: &ShapeFunction,
    seq: &SequenceSpec,
    x_grid: &[f64],
) -> Result<SeqConditionReport> {
    if x_grid.len() < 4 {
        return Err(Error::EmptyInput);
    }
    let log_s: Vec<f64> = x_grid
        .iter()
        .map(|&x| seq.log_value(phi, x))
        .collect::<Result<_>>()?;
    let log_h: Vec<f64> = x_grid
        .iter()
        .zip(&log_s)
        .map(|(&x, &ls)| Ok(phi.log_eval(ls)? + psi.eval(x)?.ln()))
        .collect::<Result<_>>()?;

    let decreasing = log_s.windows(2).all(|w| w[1] < w[0]);
    let decreasing = ConditionCheck {
        passed: decreasing,
        detail: if decreasing {
            "s strictly decreasing on the grid".into()
        } else {
            "s increases somewhere on the grid".into()
        },
    };

    let head = log_s[0];
    let tail = log_s[log_s.len() - 1];
    let vanishes = ConditionCheck {
        passed: tail - head <= DECAY_FRACTION.ln(),
        detail: format!("s(x_last)/s(x_first) = {:e}", (tail - head).exp()),
    };

    let h_max = log_h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h_tail = log_h[log_h.len() - 1];
    let quarter = 3 * log_h.len() / 4;
    let tail_monotone = log_h[quarter..].windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs());
    let product_vanishes = ConditionCheck {
        passed: h_tail - h_max <= DECAY_FRACTION.ln() && tail_monotone,
        detail: format!(
            "tail/max of φ(s)ψ = {:e}, last quarter non-increasing: {tail_monotone}",
            (h_tail - h_max).exp()
        ),
    };

    // smallest grid index from which log_h never increases
    let mut first = log_h.len() - 1;
    while first > 0 && log_h[first] <= log_h[first - 1] + 1e-12 * log_h[first - 1].abs() {
        first -= 1;
    }
    let x0 = (first <= quarter).then(|| x_grid[first]);
    let eventually_monotone = ConditionCheck {
        passed: x0.is_some(),
        detail: format!("non-increasing from x = {}", x_grid[first]),
    };

    let n_lo = x_grid[0].ceil() as usize;
    let n_hi = x_grid[x_grid.len() - 1].floor() as usize;
    let mut ratio_constant = f64::NEG_INFINITY;
    for n in n_lo..n_hi {
        let a = phi.log_gamma(seq.log_value(phi, n as f64)?)?;
        let b = phi.log_gamma(seq.log_value(phi, (n + 1) as f64)?)?;
        ratio_constant = ratio_constant.max(b - a);
    }
    let ratio_constant = ratio_constant.exp();
    let ratio_bounded = ConditionCheck {
        passed: ratio_constant.is_finite() && n_hi > n_lo,
        detail: format!("max γ(s(n+1))/γ(s(n)) over n in [{n_lo}, {n_hi}) = {ratio_constant}"),
    };

    let all_passed = decreasing.passed
        && vanishes.passed
        && product_vanishes.passed
        && eventually_monotone.passed
        && ratio_bounded.passed;
    Ok(SeqConditionReport {
        decreasing,
        vanishes,
        product_vanishes,
        eventually_monotone,
        x0,
        ratio_bounded,
        ratio_constant,
        all_passed,
    })
}
