//! The embedding calculus: `τ(t) = φ(t) ψ(loḡ γ(t))`, the sequence-driven
//! shapes `φ_s` and `α_s`, and grid-based equivalence reports.
//!
//! `loḡ x = 1 + log⁺ x` throughout.

mod sequence;

pub use sequence::{
    alpha_s, check_seq_conditions, phi_s, ConditionCheck, PhiSValue, SeqConditionReport,
    SequenceKind, SequenceSpec, DECAY_FRACTION, DEFAULT_N_MAX,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::log_grid_exponents;
use crate::shapes::{least_concave_majorant, ShapeFunction};
use crate::witness::WitnessFunction;

/// `loḡ γ(e^x) = 1 + max(0, log γ(e^x))`.
pub(crate) fn loglog_argument(phi: &ShapeFunction, log_t: f64) -> Result<f64> {
    Ok(1.0 + phi.log_gamma(log_t)?.max(0.0))
}

/// `ψ(loḡ γ(t))`, the factor by which `τ` exceeds `φ`.
pub fn tau_factor(phi: &ShapeFunction, psi: &ShapeFunction, log_t: f64) -> Result<f64> {
    psi.eval(loglog_argument(phi, log_t)?)
}

pub fn tau(phi: &ShapeFunction, psi: &ShapeFunction, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain("tau", t));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(phi.eval(t)? * tau_factor(phi, psi, t.ln())?)
}

/// `log τ(e^x)`.
pub fn log_tau(phi: &ShapeFunction, psi: &ShapeFunction, log_t: f64) -> Result<f64> {
    if !(log_t <= 0.0) {
        return Err(Error::domain("tau", log_t.exp()));
    }
    Ok(phi.log_eval(log_t)? + tau_factor(phi, psi, log_t)?.ln())
}

/// Largest grid point `t₀` such that `τ` is non-decreasing on the grid up
/// to `t₀`. The grid must be increasing.
pub fn tau_monotone_limit(phi: &ShapeFunction, psi: &ShapeFunction, grid: &[f64]) -> Result<Option<f64>> {
    let mut last = None;
    let mut prev = f64::NEG_INFINITY;
    for &t in grid {
        let v = tau(phi, psi, t)?;
        if v < prev {
            break;
        }
        prev = v;
        last = Some(t);
    }
    Ok(last)
}

/// Largest grid point `δ ≤ t₀` below which `γ ≥ 1` on the whole grid.
pub fn gamma_exp_threshold(phi: &ShapeFunction, psi: &ShapeFunction, grid: &[f64]) -> Result<Option<f64>> {
    let t0 = tau_monotone_limit(phi, psi, grid)?;
    let mut delta = None;
    for &t in grid {
        if t0.is_some_and(|t0| t > t0) || phi.log_gamma(t.ln())? < 0.0 {
            break;
        }
        delta = Some(t);
    }
    Ok(delta)
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub t_at_min: f64,
    pub t_at_max: f64,
    /// `ratio_max / ratio_min`.
    pub spread: f64,
    pub threshold: f64,
    pub equivalent: bool,
    pub grid: Vec<f64>,
}

/// Ratio statistics of `log_a - log_b` over `points` log-spaced exponents
/// in `[log_t_min, log_t_max]`; both callbacks take and return logarithms.
pub fn equivalence_log(
    log_a: impl Fn(f64) -> Result<f64>,
    log_b: impl Fn(f64) -> Result<f64>,
    log_t_min: f64,
    log_t_max: f64,
    points: usize,
    threshold: f64,
) -> Result<EquivalenceReport> {
    if points == 0 {
        return Err(Error::EmptyInput);
    }
    let exponents = log_grid_exponents(log_t_min, log_t_max, points);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut t_lo, mut t_hi) = (f64::NAN, f64::NAN);
    for &x in &exponents {
        let (a, b) = (log_a(x)?, log_b(x)?);
        for v in [a, b] {
            if !v.is_finite() {
                return Err(Error::NonPositiveValue {
                    t: x.exp(),
                    value: v.exp(),
                });
            }
        }
        let r = a - b;
        if r < lo {
            lo = r;
            t_lo = x.exp();
        }
        if r > hi {
            hi = r;
            t_hi = x.exp();
        }
    }
    let spread = (hi - lo).exp();
    Ok(EquivalenceReport {
        ratio_min: lo.exp(),
        ratio_max: hi.exp(),
        t_at_min: t_lo,
        t_at_max: t_hi,
        spread,
        threshold,
        equivalent: spread <= threshold,
        grid: exponents.into_iter().map(f64::exp).collect(),
    })
}

/// [`equivalence_log`] for functions evaluated at `t` directly.
pub fn equivalence(
    fn_a: impl Fn(f64) -> Result<f64>,
    fn_b: impl Fn(f64) -> Result<f64>,
    t_min: f64,
    t_max: f64,
    points: usize,
    threshold: f64,
) -> Result<EquivalenceReport> {
    let positive_log = |f: &dyn Fn(f64) -> Result<f64>, x: f64| {
        let t = x.exp();
        let v = f(t)?;
        if v > 0.0 {
            Ok(v.ln())
        } else {
            Err(Error::NonPositiveValue { t, value: v })
        }
    };
    equivalence_log(
        |x| positive_log(&fn_a, x),
        |x| positive_log(&fn_b, x),
        t_min.ln(),
        t_max.ln(),
        points,
        threshold,
    )
}

/// `t^α (loḡ 1/t)^β (loḡ loḡ 1/t)^γ`, with a third iterated logarithm in
/// the last factor when `α = 1`.
pub fn tau_asymptote(alpha: f64, beta: f64, gamma: f64, t: f64) -> f64 {
    let bar = |x: f64| 1.0 + x.ln().max(0.0);
    let l1 = bar(1.0 / t);
    let inner = if alpha == 1.0 { bar(bar(l1)) } else { bar(l1) };
    t.powf(alpha) * l1.powf(beta) * inner.powf(gamma)
}

/// Concave majorant of `f` sampled at `0` and on `points` log-spaced
/// points of `[t_min, 1]`.
pub fn sampled_majorant(
    f: impl Fn(f64) -> Result<f64>,
    t_min: f64,
    points: usize,
) -> Result<ShapeFunction> {
    let mut samples = vec![(0.0, 0.0)];
    for x in log_grid_exponents(t_min.ln(), 0.0, points) {
        let t = x.exp();
        samples.push((t, f(t)?));
    }
    least_concave_majorant(&samples)
}

/// A functional expression of `t ∈ (0, 1]` built from `φ`, `ψ` and the
/// constructions of this module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "curve", rename_all = "snake_case")]
pub enum Curve {
    Phi,
    Tau,
    /// `φ ψ(loḡ γ)^θ`.
    TauPower { theta: f64 },
    PhiS {
        seq: SequenceSpec,
        #[serde(default = "default_n_max")]
        n_max: usize,
    },
    AlphaS { seq: SequenceSpec },
    Shape { shape: ShapeFunction },
    Asymptote { alpha: f64, beta: f64, gamma: f64 },
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

impl Curve {
    pub fn eval(&self, phi: &ShapeFunction, psi: &ShapeFunction, t: f64) -> Result<f64> {
        match self {
            Curve::Phi => phi.eval(t),
            Curve::Tau => tau(phi, psi, t),
            Curve::TauPower { theta } => Ok(phi.eval(t)? * tau_factor(phi, psi, t.ln())?.powf(*theta)),
            Curve::PhiS { seq, n_max } => Ok(phi_s(phi, psi, seq, t, *n_max)?.value),
            Curve::AlphaS { seq } => alpha_s(phi, psi, seq, t),
            Curve::Shape { shape } => shape.eval(t),
            Curve::Asymptote { alpha, beta, gamma } => Ok(tau_asymptote(*alpha, *beta, *gamma, t)),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidShape(e.to_string()))
    }
}

/// Candidate fundamental functions `φ_X` for the witness test; each is
/// evaluated through `log φ_X - log φ` so that deep witness points stay
/// finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CandidateShape {
    /// `φ_X = φ`.
    Same,
    /// `φ_X = φ ψ(loḡ γ)^θ`; `θ = 1` is `τ`.
    TauPower { theta: f64 },
    /// `φ_X = φ γ^{-θ} = t^θ φ^{1-θ}`.
    GammaPower { theta: f64 },
    Shape { shape: ShapeFunction },
}

impl CandidateShape {
    /// `log(φ_X(e^x)/φ(e^x))`.
    pub fn log_ratio(&self, phi: &ShapeFunction, psi: &ShapeFunction, log_t: f64) -> Result<f64> {
        match self {
            CandidateShape::Same => Ok(0.0),
            CandidateShape::TauPower { theta } => Ok(theta * tau_factor(phi, psi, log_t)?.ln()),
            CandidateShape::GammaPower { theta } => Ok(-theta * phi.log_gamma(log_t)?),
            CandidateShape::Shape { shape } => Ok(shape.log_eval(log_t)? - phi.log_eval(log_t)?),
        }
    }
}

/// `sup_j φ_X(μ_j)/φ(μ_j)` over the witness measures.
pub fn omega_n(candidate: &CandidateShape, witness: &WitnessFunction) -> Result<f64> {
    let (phi, psi) = (&witness.spec.phi, &witness.spec.psi);
    let mut best = f64::NEG_INFINITY;
    for &lm in &witness.log_mu {
        best = best.max(candidate.log_ratio(phi, psi, lm)?);
    }
    Ok(best.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qa() -> (ShapeFunction, ShapeFunction) {
        (ShapeFunction::qa_phi(), ShapeFunction::qa_psi())
    }

    #[test]
    fn tau_hand_values() {
        let (phi, psi) = qa();
        assert_eq!(tau(&phi, &psi, 1.0).unwrap(), 1.0);
        assert_eq!(tau(&phi, &psi, 0.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        let t = (1.0 - e).exp();
        let expect = (2.0 - e).exp() * (1.0 + 2f64.ln());
        assert!((tau(&phi, &psi, t).unwrap() - expect).abs() < 1e-14);
        assert!((expect - 0.8256).abs() < 1e-4);
        assert!(tau(&phi, &psi, 1.5).is_err());
    }

    #[test]
    fn tau_over_phi_is_the_factor() {
        let (phi, psi) = qa();
        for &t in &[1e-300, 1e-12, 0.01, 0.5] {
            let f = tau_factor(&phi, &psi, f64::ln(t)).unwrap();
            assert_eq!(tau(&phi, &psi, t).unwrap(), phi.eval(t).unwrap() * f);
            let lg = phi.gamma(t).unwrap().ln().max(0.0);
            assert!((f - psi.eval(1.0 + lg).unwrap()).abs() < 1e-14 * f);
        }
    }

    #[test]
    fn log_tau_deep() {
        let (phi, psi) = qa();
        let v = log_tau(&phi, &psi, -1e9).unwrap();
        let lg = (1e9f64 + 1.0).ln();
        let expect = -1e9 + lg + (1.0 + (1.0 + lg).ln()).ln();
        assert!((v - expect).abs() < 1e-6);
    }

    #[test]
    fn equivalence_of_identical_functions() {
        let (phi, psi) = qa();
        let r = equivalence(
            |t| tau(&phi, &psi, t),
            |t| tau(&phi, &psi, t),
            1e-12,
            1.0,
            50,
            1.5,
        )
        .unwrap();
        assert_eq!((r.ratio_min, r.ratio_max), (1.0, 1.0));
        assert!(r.equivalent);
    }

    #[test]
    fn equivalence_rejects_non_positive() {
        let r = equivalence(|_| Ok(0.0), Ok, 1e-3, 1.0, 10, 2.0);
        assert!(matches!(r, Err(Error::NonPositiveValue { .. })));
    }

    #[test]
    fn phi_s_at_one_with_flat_index_weights() {
        let phi = ShapeFunction::qa_phi();
        let flat = ShapeFunction::constant_one();
        let v = phi_s(&phi, &flat, &SequenceSpec::reciprocal(), 1.0, 100).unwrap();
        assert_eq!((v.value, v.argmin, v.truncated), (1.0, 1, false));
        let zero = phi_s(&phi, &flat, &SequenceSpec::reciprocal(), 0.0, 100).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn phi_s_truncation_is_exact() {
        let (phi, psi) = qa();
        for &t in &[1e-6, 1e-4, 0.01, 0.3] {
            let a = phi_s(&phi, &psi, &SequenceSpec::reciprocal(), t, 2_000_000).unwrap();
            let b = phi_s(&phi, &psi, &SequenceSpec::reciprocal(), t, 4_000_000).unwrap();
            assert!(!a.truncated);
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn alpha_s_special_cases() {
        let (phi, psi) = qa();
        let flat = ShapeFunction::constant_one();
        let rec = SequenceSpec::reciprocal();
        for &t in &[1e-8, 0.01, 0.7] {
            assert_eq!(alpha_s(&phi, &flat, &rec, t).unwrap(), phi.eval(t).unwrap());
            let expect = phi.eval(t).unwrap() * (1.0 + (1.0 / t).ln());
            assert!((alpha_s(&phi, &psi, &rec, t).unwrap() - expect).abs() < 1e-14 * expect);
            let ge = alpha_s(&phi, &psi, &SequenceSpec::gamma_exp(), t).unwrap();
            assert_eq!(ge, tau(&phi, &psi, t).unwrap());
        }
    }

    #[test]
    fn gamma_exp_sequence_values() {
        let phi = ShapeFunction::qa_phi();
        let seq = SequenceSpec::gamma_exp();
        assert_eq!(seq.value(&phi, 1.0).unwrap(), 1.0);
        // γ(s) = 1 - log s = e^{x-1}
        let ls = seq.log_value(&phi, 3.0).unwrap();
        assert!((ls - (1.0 - 2f64.exp())).abs() < 1e-11);
    }

    #[test]
    fn seq_conditions_reciprocal_flat() {
        let phi = ShapeFunction::qa_phi();
        let flat = ShapeFunction::constant_one();
        let grid: Vec<f64> = crate::logspace::log_grid(1.0, 1e4, 400);
        let r = check_seq_conditions(&phi, &flat, &SequenceSpec::reciprocal(), &grid).unwrap();
        assert!(r.all_passed, "{r:?}");
        assert!(r.ratio_constant <= 2.0);
    }

    #[test]
    fn seq_conditions_gamma_exp_constant_e() {
        let (phi, psi) = qa();
        let grid = crate::logspace::linear_grid(1.0, 6.0, 200);
        let r = check_seq_conditions(&phi, &psi, &SequenceSpec::gamma_exp(), &grid).unwrap();
        assert!(r.all_passed, "{r:?}");
        assert!((r.ratio_constant - std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn increasing_samples_fail() {
        let phi = ShapeFunction::qa_phi();
        let seq = SequenceSpec::samples(vec![[1.0, 0.1], [2.0, 0.2], [3.0, 0.4], [4.0, 0.8]]).unwrap();
        let grid = crate::logspace::linear_grid(1.0, 4.0, 20);
        let r = check_seq_conditions(&phi, &ShapeFunction::qa_psi(), &seq, &grid).unwrap();
        assert!(!r.decreasing.passed);
        assert!(!r.all_passed);
    }

    #[test]
    fn samples_inverse_by_bisection() {
        let phi = ShapeFunction::qa_phi();
        let seq = SequenceSpec::samples(vec![[1.0, 1.0], [2.0, 0.5], [4.0, 0.25]]).unwrap();
        let x = seq.inverse(&phi, 0.375).unwrap();
        assert!((x - 3.0).abs() < 1e-12);
        assert!(seq.inverse(&phi, 0.1).is_err());
    }

    #[test]
    fn asymptote_forms() {
        let t = 1e-6_f64;
        let l = 1.0 + (1.0 / t).ln();
        assert!((tau_asymptote(0.5, 1.0, 1.0, t) - t.sqrt() * l * (1.0 + l.ln())).abs() < 1e-15);
        let triple = 1.0 + (1.0 + l.ln()).ln();
        assert!((tau_asymptote(1.0, 1.0, 1.0, t) - t * l * triple).abs() < 1e-18);
    }

    #[test]
    fn curve_json() {
        let c = Curve::from_json(r#"{"curve":"phi_s","seq":{"kind":"reciprocal"}}"#).unwrap();
        assert_eq!(
            c,
            Curve::PhiS {
                seq: SequenceSpec::reciprocal(),
                n_max: DEFAULT_N_MAX
            }
        );
        let (phi, psi) = qa();
        assert!(c.eval(&phi, &psi, 0.5).unwrap() > 0.0);
    }
}
