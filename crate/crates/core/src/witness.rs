//! The extremal simple function `f = Σ_{j=1}^{2N} a_j χ_{A_j}` with
//! `λ(A_j) = μ_j`, `a_j = 1/(2N φ(μ_j))` and
//! `γ(μ_{j+1}) = M γ(μ_j)`, `M = (N³ ψ(N)/ψ(1))^{1/c}`.
//!
//! With `qa_phi` and `N = 8`, `log μ_16 ≈ -10^96`, so everything is kept as
//! logarithms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{log1m_exp, log_grid_exponents, log_sum_exp};
use crate::qanorm::strategy::{DecompositionStrategy, Exhaustive, LayerCosts, LocalSearch, Singleton};
use crate::shapes::ShapeFunction;
use crate::stepfn::StepFunction;

/// Grid used to pick `μ₁` automatically.
const AUTO_MU1_POINTS: usize = 400;
const AUTO_MU1_DEPTH: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub phi: ShapeFunction,
    pub psi: ShapeFunction,
    #[serde(rename = "N")]
    pub n: usize,
    pub c: f64,
    pub p: f64,
    /// `None` selects `μ₁` automatically.
    #[serde(default)]
    pub mu1: Option<f64>,
}

impl WitnessSpec {
    pub fn new(phi: ShapeFunction, psi: ShapeFunction, n: usize, c: f64, p: f64) -> Self {
        WitnessSpec {
            phi,
            psi,
            n,
            c,
            p,
            mu1: None,
        }
    }

    pub fn with_mu1(mut self, mu1: f64) -> Self {
        self.mu1 = Some(mu1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::IllegalSpec(msg));
        if self.n < 2 {
            return bad(format!("N = {} must be at least 2", self.n));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad(format!("c = {} not in (0, 1)", self.c));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad(format!("p = {} not in (0, 1]", self.p));
        }
        if let Some(mu1) = self.mu1 {
            if !(mu1 > 0.0 && mu1 <= self.p / 2.0) {
                return bad(format!("mu1 = {mu1} not in (0, p/2]"));
            }
        }
        if !self.phi.covers_unit_interval() {
            return bad(format!("{} does not cover [0, 1]", self.phi.name()));
        }
        let nf = self.n as f64;
        if nf.powi(3) * self.psi.eval(nf)? < 2.0 * self.psi.eval(1.0)? {
            return bad("N³ψ(N) < 2ψ(1)".into());
        }
        Ok(())
    }

    /// `log M = (1/c) log(N³ ψ(N)/ψ(1))`.
    pub fn log_growth(&self) -> Result<f64> {
        let nf = self.n as f64;
        Ok((3.0 * nf.ln() + self.psi.eval(nf)?.ln() - self.psi.eval(1.0)?.ln()) / self.c)
    }
}

/// `(2^c - 1)/8 · ψ(N)`.
pub fn lower_bound_value(spec: &WitnessSpec) -> Result<f64> {
    Ok((2f64.powf(spec.c) - 1.0) / 8.0 * spec.psi.eval(spec.n as f64)?)
}

/// Largest log-grid point of `(0, p/2]` below which `γ` strictly decreases
/// at every grid point, as `log μ₁`.
fn auto_log_mu1(phi: &ShapeFunction, p: f64) -> Result<f64> {
    let top = (p / 2.0).ln();
    let xs = log_grid_exponents(top - AUTO_MU1_DEPTH, top, AUTO_MU1_POINTS);
    let lg: Vec<f64> = xs.iter().map(|&x| phi.log_gamma(x)).collect::<Result<_>>()?;
    let mut k = 0;
    while k + 1 < xs.len() && lg[k + 1] < lg[k] {
        k += 1;
    }
    if k < 2 {
        return Err(Error::NotInvertible(format!(
            "{}: ratio φ(t)/t is not strictly decreasing near 0",
            phi.name()
        )));
    }
    Ok(xs[k])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessFunction {
    pub spec: WitnessSpec,
    /// `log μ_j`, decreasing.
    pub log_mu: Vec<f64>,
    /// `log a_j`, increasing.
    pub log_a: Vec<f64>,
    /// `log M`.
    pub log_growth: f64,
}

pub fn build_witness(spec: &WitnessSpec) -> Result<WitnessFunction> {
    spec.validate()?;
    let phi = &spec.phi;
    let log_growth = spec.log_growth()?;
    let mut log_mu = Vec::with_capacity(2 * spec.n);
    let first = match spec.mu1 {
        Some(m) => m.ln(),
        None => auto_log_mu1(phi, spec.p)?,
    };
    log_mu.push(first);
    let mut target = phi.log_gamma(first)?;
    for _ in 1..2 * spec.n {
        target += log_growth;
        let prev = *log_mu.last().unwrap();
        log_mu.push(phi.gamma_inv_log(target, prev)?);
    }
    let log_2n = (2.0 * spec.n as f64).ln();
    let log_a = log_mu
        .iter()
        .map(|&lm| Ok(-log_2n - phi.log_eval(lm)?))
        .collect::<Result<_>>()?;
    Ok(WitnessFunction {
        spec: spec.clone(),
        log_mu,
        log_a,
        log_growth,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessCheck {
    pub halving: bool,
    /// Largest `|log γ(μ_{j+1}) - log M - log γ(μ_j)|`.
    pub max_recurrence_residual: f64,
    /// Largest `|log a_j - (-log 2N - log φ(μ_j))|`.
    pub max_normalization_residual: f64,
    pub a_increasing: bool,
}

impl WitnessCheck {
    pub fn passed(&self, residual_tol: f64) -> bool {
        self.halving
            && self.a_increasing
            && self.max_recurrence_residual <= residual_tol
            && self.max_normalization_residual == 0.0
    }
}

impl WitnessFunction {
    pub fn len(&self) -> usize {
        self.log_mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_mu.is_empty()
    }

    pub fn verify(&self) -> Result<WitnessCheck> {
        let phi = &self.spec.phi;
        let halving = self
            .log_mu
            .windows(2)
            .all(|w| w[1] <= w[0] - std::f64::consts::LN_2);
        let mut rec = 0.0_f64;
        for w in self.log_mu.windows(2) {
            let r = phi.log_gamma(w[1])? - self.log_growth - phi.log_gamma(w[0])?;
            rec = rec.max(r.abs());
        }
        let log_2n = (2.0 * self.spec.n as f64).ln();
        let mut norm = 0.0_f64;
        for (&la, &lm) in self.log_a.iter().zip(&self.log_mu) {
            norm = norm.max((la - (-log_2n - phi.log_eval(lm)?)).abs());
        }
        Ok(WitnessCheck {
            halving,
            max_recurrence_residual: rec,
            max_normalization_residual: norm,
            a_increasing: self.log_a.windows(2).all(|w| w[0] < w[1]),
        })
    }

    /// `log(S_j/μ_j)` with `S_j = Σ_{l ≥ j} μ_l`.
    fn log_tail_excess(&self) -> Vec<f64> {
        let k = self.len();
        (0..k)
            .map(|j| {
                let rest: Vec<f64> = (j + 1..k).map(|l| self.log_mu[l] - self.log_mu[j]).collect();
                log_sum_exp(&rest).exp().ln_1p()
            })
            .collect()
    }

    /// `f` packed onto consecutive intervals from 0, when every `μ_j`
    /// survives as an `f64` and the partial sums stay distinct.
    pub fn to_step_function(&self) -> Result<StepFunction> {
        let mut breakpoints = vec![0.0];
        let mut values = Vec::with_capacity(self.len() + 1);
        let mut acc = 0.0;
        for (&lm, &la) in self.log_mu.iter().zip(&self.log_a) {
            let mu = lm.exp();
            if !(mu > 0.0) || acc + mu <= acc {
                return Err(Error::Underflow);
            }
            acc += mu;
            breakpoints.push(acc);
            values.push(la.exp());
        }
        if acc < 1.0 {
            breakpoints.push(1.0);
            values.push(0.0);
        }
        StepFunction::new(breakpoints, values)
    }
}

/// `‖f‖_{Λφ} = Σ_j a_j (φ(S_j) - φ(S_{j+1}))` in log-sum-exp form.
pub fn witness_lorentz_norm(w: &WitnessFunction) -> Result<f64> {
    Ok(log_witness_lorentz_norm(w)?.exp())
}

fn log_witness_lorentz_norm(w: &WitnessFunction) -> Result<f64> {
    let phi = &w.spec.phi;
    let k = w.len();
    let excess = w.log_tail_excess();
    let log_s: Vec<f64> = (0..k).map(|j| w.log_mu[j] + excess[j]).collect();
    let log_2n = (2.0 * w.spec.n as f64).ln();
    let mut terms = Vec::with_capacity(k);
    for j in 0..k {
        // log a_j + log φ(S_j) = -log 2N + log(S_j/μ_j) + log γ(S_j) - log γ(μ_j)
        let head = -log_2n + excess[j] + phi.log_gamma(log_s[j])? - phi.log_gamma(w.log_mu[j])?;
        let drop = if j + 1 < k {
            let ds = (w.log_mu[j + 1] - w.log_mu[j]) + (excess[j + 1] - excess[j]);
            let dg = phi.log_gamma(log_s[j + 1])? - phi.log_gamma(log_s[j])?;
            log1m_exp((ds + dg).min(0.0))
        } else {
            0.0
        };
        terms.push(head + drop);
    }
    Ok(log_sum_exp(&terms))
}

/// Log-domain layer costs of the witness. Layer `k` (in decreasing height)
/// is `A_{2N-k}` and everything above it.
struct WitnessLayers<'a> {
    phi: &'a ShapeFunction,
    /// `log a_j`, `log S_j`, `log(b_j S_j)` in increasing `j`.
    log_a: Vec<f64>,
    log_s: Vec<f64>,
    log_bs: Vec<f64>,
    log_psi: Vec<f64>,
}

impl<'a> WitnessLayers<'a> {
    fn new(w: &'a WitnessFunction) -> Result<Self> {
        let phi = &w.spec.phi;
        let k = w.len();
        let excess = w.log_tail_excess();
        let log_2n = (2.0 * w.spec.n as f64).ln();
        let mut log_bs = Vec::with_capacity(k);
        for (j, &tail) in excess.iter().enumerate() {
            let below = if j == 0 {
                0.0
            } else {
                log1m_exp(w.log_a[j - 1] - w.log_a[j])
            };
            // a_j S_j = (1 + S_{j+1}/μ_j) / (2N γ(μ_j))
            log_bs.push(-log_2n - phi.log_gamma(w.log_mu[j])? + below + tail);
        }
        let log_psi = (1..=k)
            .map(|n| Ok(w.spec.psi.eval(n as f64)?.ln()))
            .collect::<Result<_>>()?;
        Ok(WitnessLayers {
            phi,
            log_a: w.log_a.clone(),
            log_s: (0..k).map(|j| w.log_mu[j] + excess[j]).collect(),
            log_bs,
            log_psi,
        })
    }

    fn j_of(&self, layer: usize) -> usize {
        self.log_a.len() - 1 - layer
    }
}

impl LayerCosts for WitnessLayers<'_> {
    fn layer_count(&self) -> usize {
        self.log_a.len()
    }

    /// `log(‖g‖_∞ φ(‖g‖₁/‖g‖_∞))` written as `log ‖g‖₁ + log γ(ratio)`,
    /// which avoids cancelling `log a_j` against `log φ(μ_j)`.
    fn group_weight(&self, first: usize, last: usize) -> f64 {
        let (hi, lo) = (self.j_of(first), self.j_of(last));
        let lg = |x: f64| self.phi.log_gamma(x).expect("log ratio ≤ 0");
        if first == last {
            return self.log_bs[hi] + lg(self.log_s[hi]);
        }
        let log_height = if lo == 0 {
            self.log_a[hi]
        } else {
            self.log_a[hi] + log1m_exp(self.log_a[lo - 1] - self.log_a[hi])
        };
        let log_mass = log_sum_exp(&self.log_bs[lo..=hi]);
        let log_ratio = log_mass - log_height;
        if log_ratio >= 0.0 {
            log_height + self.phi.log_eval(0.0).expect("φ(1) defined")
        } else {
            log_mass + lg(log_ratio)
        }
    }

    fn total(&self, sorted_weights: &[f64]) -> f64 {
        let terms: Vec<f64> = sorted_weights
            .iter()
            .zip(&self.log_psi)
            .map(|(w, p)| w + p)
            .collect();
        log_sum_exp(&terms)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessUpper {
    pub value: f64,
    pub log_value: f64,
    pub strategy: String,
    /// Layer blocks in index order; layer 0 is the tallest.
    pub layer_blocks: Vec<(usize, usize)>,
}

/// Best layer-grouping upper bound on the quasi-norm of the witness.
pub fn witness_qa_upper(w: &WitnessFunction) -> Result<WitnessUpper> {
    let costs = WitnessLayers::new(w)?;
    let strategy: &dyn DecompositionStrategy = if w.len() <= Exhaustive::default().max_layers() {
        &Exhaustive::default()
    } else {
        &LocalSearch
    };
    let found = strategy.search(&costs)?;
    let single = Singleton.search(&costs)?;
    let (best, name) = if single.total < found.total {
        (single, "singleton")
    } else {
        (found, strategy.name())
    };
    Ok(WitnessUpper {
        value: best.total.exp(),
        log_value: best.total,
        strategy: name.to_string(),
        layer_blocks: best.assigned_blocks(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qa_spec(n: usize) -> WitnessSpec {
        WitnessSpec::new(ShapeFunction::qa_phi(), ShapeFunction::qa_psi(), n, 0.5, 1.0)
    }

    fn sqrt_spec() -> WitnessSpec {
        WitnessSpec::new(
            ShapeFunction::alpha_beta(0.5, 0.0).unwrap(),
            ShapeFunction::constant_one(),
            2,
            0.5,
            1.0,
        )
        .with_mu1(0.5)
    }

    #[test]
    fn closed_form_chain() {
        let w = build_witness(&sqrt_spec()).unwrap();
        // γ(t) = t^{-1/2}, M = 8² so μ_{j+1} = μ_j / 4096
        let step = 4096f64.ln();
        for (j, &lm) in w.log_mu.iter().enumerate() {
            let expect = 0.5f64.ln() - step * j as f64;
            assert!((lm - expect).abs() < 1e-11, "j={j}");
        }
        assert!((w.log_mu[1].exp() - 1.0 / 8192.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_exact() {
        for w in [build_witness(&sqrt_spec()).unwrap(), build_witness(&qa_spec(4)).unwrap()] {
            let check = w.verify().unwrap();
            assert_eq!(check.max_normalization_residual, 0.0);
            assert!(check.passed(1e-8), "{check:?}");
        }
    }

    #[test]
    fn deep_qa_witness() {
        let w = build_witness(&qa_spec(8)).unwrap();
        assert_eq!(w.len(), 16);
        assert!(w.log_mu[15] < -1e90);
        let check = w.verify().unwrap();
        assert!(check.passed(1e-8), "{check:?} {:?}", w.log_mu);
        assert!(w.to_step_function().is_err());
    }

    #[test]
    fn auto_mu1_for_qa() {
        let w = build_witness(&qa_spec(2)).unwrap();
        assert_eq!(w.log_mu[0], 0.5f64.ln());
    }

    #[test]
    fn illegal_specs() {
        let mut s = qa_spec(1);
        assert!(matches!(build_witness(&s), Err(Error::IllegalSpec(_))));
        s.n = 2;
        s.c = 1.0;
        assert!(matches!(build_witness(&s), Err(Error::IllegalSpec(_))));
        assert!(matches!(
            build_witness(&qa_spec(2).with_mu1(0.75)),
            Err(Error::IllegalSpec(_))
        ));
        let id = WitnessSpec::new(ShapeFunction::identity(), ShapeFunction::qa_psi(), 2, 0.5, 1.0)
            .with_mu1(0.5);
        assert!(matches!(build_witness(&id), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn lower_bound_arithmetic() {
        let v = lower_bound_value(&sqrt_spec()).unwrap();
        assert!((v - (2f64.sqrt() - 1.0) / 8.0).abs() < 1e-16);
        assert!((v - 0.05178).abs() < 1e-5);
    }

    #[test]
    fn lorentz_norm_bounds() {
        for n in 2..=8 {
            let w = build_witness(&qa_spec(n)).unwrap();
            let v = witness_lorentz_norm(&w).unwrap();
            assert!(v <= 1.0 + 1e-9 && v >= 1.0 / (2.0 * n as f64), "N={n} v={v}");
        }
    }

    #[test]
    fn lorentz_norm_matches_materialized_function() {
        let w = build_witness(&sqrt_spec()).unwrap();
        let f = w.to_step_function().unwrap();
        let direct = crate::lorentz::lorentz_norm(&f, &w.spec.phi).unwrap().value;
        assert!((witness_lorentz_norm(&w).unwrap() - direct).abs() < 1e-13);
    }

    #[test]
    fn upper_matches_materialized_search() {
        let w = build_witness(&sqrt_spec()).unwrap();
        let f = w.to_step_function().unwrap();
        let b = crate::qanorm::qa_bounds(&f, &w.spec.phi, &w.spec.psi).unwrap();
        let u = witness_qa_upper(&w).unwrap();
        assert!((u.value - b.upper).abs() <= 1e-12 * b.upper);
    }

    #[test]
    fn upper_dominates_lower_bound() {
        for n in 2..=8 {
            let w = build_witness(&qa_spec(n)).unwrap();
            let u = witness_qa_upper(&w).unwrap().value;
            assert!(u >= lower_bound_value(&w.spec).unwrap());
            assert!(u >= witness_lorentz_norm(&w).unwrap() * (1.0 - 1e-12));
        }
    }
}
