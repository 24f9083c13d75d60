//! Two-sided bounds for the quasi-norm
//! `‖f‖ = inf Σ_n ψ(n) ‖f_n‖_∞ φ(‖f_n‖₁/‖f_n‖_∞)` over `|f| ≤ Σ f_n`.
//!
//! Lower bounds come from the Lorentz and `L¹` embeddings. Upper bounds come
//! from decompositions built out of consecutive layers of `|f|`.

pub mod strategy;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lorentz::{lorentz_norm_of_profile, profile_fact_bound, require_unit_domain};
use crate::shapes::ShapeFunction;
use crate::stepfn::{NestedForm, StepFunction};
pub use strategy::{
    DecompositionStrategy, Exhaustive, Grouping, LayerCosts, Layers, LocalSearch, Singleton,
    StrategyRegistry, EXHAUSTIVE_LIMIT,
};

/// Relative slack allowed when comparing bounds that agree up to rounding.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// `ψ(n) ‖g‖_∞ φ(‖g‖₁/‖g‖_∞)`, zero for `g ≡ 0`.
pub fn piece_cost(g: &StepFunction, n: usize, phi: &ShapeFunction, psi: &ShapeFunction) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("index n", 0.0));
    }
    if !g.is_nonnegative() {
        return Err(Error::NegativePiece);
    }
    require_unit_domain(phi)?;
    let profile = g.layer_profile();
    if profile.is_empty() {
        return Ok(0.0);
    }
    Ok(psi.eval(n as f64)? * profile_fact_bound(&profile, phi)?)
}

/// Layer groups of a nested form priced with plain `f64` arithmetic.
pub struct LinearLayerCosts<'a> {
    profile: &'a NestedForm,
    phi: &'a ShapeFunction,
    psi_at: Vec<f64>,
}

impl<'a> LinearLayerCosts<'a> {
    pub fn new(profile: &'a NestedForm, phi: &'a ShapeFunction, psi: &ShapeFunction) -> Result<Self> {
        require_unit_domain(phi)?;
        let psi_at = (1..=profile.len())
            .map(|n| psi.eval(n as f64))
            .collect::<Result<_>>()?;
        // fail early on measures outside the domain of φ
        for &m in &profile.measures {
            phi.eval(m)?;
        }
        Ok(LinearLayerCosts {
            profile,
            phi,
            psi_at,
        })
    }
}

impl LayerCosts for LinearLayerCosts<'_> {
    fn layer_count(&self) -> usize {
        self.profile.len()
    }

    fn group_weight(&self, first: usize, last: usize) -> f64 {
        let height = self.profile.group_height(first, last);
        let ratio = if first == last {
            self.profile.measures[first]
        } else {
            (self.profile.group_mass(first, last) / height).min(1.0)
        };
        height * self.phi.eval(ratio).expect("ratio lies in [0, 1]")
    }

    fn total(&self, sorted_weights: &[f64]) -> f64 {
        sorted_weights
            .iter()
            .zip(&self.psi_at)
            .fold(0.0, |acc, (&w, &p)| acc + p * w)
    }
}

/// A dominating decomposition `|f| ≤ Σ_n f_n`, pieces listed by index `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub pieces: Vec<StepFunction>,
    pub cost: f64,
    /// Layer range `(first, last)` behind each piece.
    pub layer_blocks: Vec<(usize, usize)>,
}

impl Decomposition {
    pub fn empty() -> Self {
        Decomposition {
            pieces: Vec::new(),
            cost: 0.0,
            layer_blocks: Vec::new(),
        }
    }

    /// Pieces of `f` for the given layer blocks (in index order), realized on
    /// the original breakpoints of `f`.
    pub fn from_blocks(f: &StepFunction, profile: &NestedForm, blocks: &[(usize, usize)], cost: f64) -> Self {
        let level_of: Vec<Option<usize>> = f
            .values()
            .iter()
            .map(|v| {
                let v = v.abs();
                if v == 0.0 {
                    None
                } else {
                    // smallest listed height ≥ v (pieces too short to register
                    // as a level are lifted to the one above)
                    Some(profile.heights.partition_point(|&h| h >= v).max(1) - 1)
                }
            })
            .collect();
        let pieces = blocks
            .iter()
            .map(|&(first, last)| {
                let below = profile.heights.get(last + 1).copied().unwrap_or(0.0);
                let values = level_of
                    .iter()
                    .map(|l| match *l {
                        Some(l) if l <= last => profile.heights[l.max(first)] - below,
                        _ => 0.0,
                    })
                    .collect();
                StepFunction::new(f.breakpoints().to_vec(), values)
                    .expect("same breakpoints as f")
                    .canonical()
            })
            .collect();
        Decomposition {
            pieces,
            cost,
            layer_blocks: blocks.to_vec(),
        }
    }

    /// `Σ_n piece_cost(f_n, n)` recomputed from the pieces themselves.
    pub fn recompute_cost(&self, phi: &ShapeFunction, psi: &ShapeFunction) -> Result<f64> {
        let mut total = 0.0;
        for (i, g) in self.pieces.iter().enumerate() {
            total += piece_cost(g, i + 1, phi, psi)?;
        }
        Ok(total)
    }

    pub fn sum(&self) -> StepFunction {
        self.pieces
            .iter()
            .fold(StepFunction::zero(), |acc, g| acc.add(g))
    }

    /// `|f| ≤ Σ f_n` up to `slack` relative to `‖f‖_∞`.
    pub fn dominates(&self, f: &StepFunction, slack: f64) -> bool {
        f.abs().dominated_by(&self.sum(), slack * f.linf_norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerSource {
    Lorentz,
    L1,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_source: LowerSource,
    pub strategy: String,
    pub upper_witness: Decomposition,
}

impl NormBounds {
    /// `upper/lower`, `1` when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.lower == 0.0 {
            if self.upper == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.upper / self.lower
        }
    }
}

/// `max(ψ(1)‖f‖_{Λφ}, φ(1)ψ(1)‖f‖₁)` and which term attained it.
pub fn qa_lower_with_source(
    f: &StepFunction,
    phi: &ShapeFunction,
    psi: &ShapeFunction,
) -> Result<(f64, LowerSource)> {
    lower_of_profile(&f.layer_profile(), phi, psi)
}

pub fn qa_lower(f: &StepFunction, phi: &ShapeFunction, psi: &ShapeFunction) -> Result<f64> {
    Ok(qa_lower_with_source(f, phi, psi)?.0)
}

fn lower_of_profile(
    profile: &NestedForm,
    phi: &ShapeFunction,
    psi: &ShapeFunction,
) -> Result<(f64, LowerSource)> {
    let psi1 = psi.eval(1.0)?;
    let lorentz = psi1 * lorentz_norm_of_profile(profile, phi)?.value;
    let l1 = phi.eval(1.0)? * psi1 * profile.integral();
    Ok(if l1 > lorentz {
        (l1, LowerSource::L1)
    } else {
        (lorentz, LowerSource::Lorentz)
    })
}

/// Bounds using `strategy`, with the one-piece decomposition always among
/// the candidates.
pub fn qa_upper(
    f: &StepFunction,
    phi: &ShapeFunction,
    psi: &ShapeFunction,
    strategy: &dyn DecompositionStrategy,
) -> Result<NormBounds> {
    let profile = f.layer_profile();
    let (mut lower, lower_source) = lower_of_profile(&profile, phi, psi)?;
    if profile.is_empty() {
        return Ok(NormBounds {
            lower,
            upper: 0.0,
            lower_source,
            strategy: strategy.name().to_string(),
            upper_witness: Decomposition::empty(),
        });
    }
    let costs = LinearLayerCosts::new(&profile, phi, psi)?;
    let found = strategy.search(&costs)?;
    let single = Singleton.search(&costs)?;
    let best = if single.total < found.total {
        single
    } else {
        found
    };
    let upper = best.total;
    if lower > upper && lower - upper <= ROUNDING_SLACK * upper {
        lower = upper;
    }
    Ok(NormBounds {
        lower,
        upper,
        lower_source,
        strategy: strategy.name().to_string(),
        upper_witness: Decomposition::from_blocks(f, &profile, &best.assigned_blocks(), upper),
    })
}

/// Exhaustive search when the layer count allows it, local search otherwise.
pub fn qa_bounds(f: &StepFunction, phi: &ShapeFunction, psi: &ShapeFunction) -> Result<NormBounds> {
    if f.layer_profile().len() <= EXHAUSTIVE_LIMIT {
        qa_upper(f, phi, psi, &Exhaustive::default())
    } else {
        qa_upper(f, phi, psi, &LocalSearch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qa() -> (ShapeFunction, ShapeFunction) {
        (ShapeFunction::qa_phi(), ShapeFunction::qa_psi())
    }

    fn three_layer() -> StepFunction {
        StepFunction::new(vec![0.0, 0.1, 0.4, 0.8, 1.0], vec![1.0, 5.0, 2.5, 0.0]).unwrap()
    }

    #[test]
    fn piece_cost_examples() {
        let (phi, psi) = qa();
        let g = StepFunction::indicator(0.0, 0.3, 1.0).unwrap();
        assert_eq!(piece_cost(&g, 1, &phi, &psi).unwrap(), phi.eval(0.3).unwrap());
        assert_eq!(piece_cost(&StepFunction::zero(), 3, &phi, &psi).unwrap(), 0.0);
        let c = StepFunction::constant(2.5);
        assert_eq!(piece_cost(&c, 4, &phi, &psi).unwrap(), psi.eval(4.0).unwrap() * 2.5);
        let neg = StepFunction::constant(-1.0);
        assert_eq!(piece_cost(&neg, 1, &phi, &psi), Err(Error::NegativePiece));
    }

    #[test]
    fn lower_examples() {
        let (phi, psi) = qa();
        assert_eq!(qa_lower(&StepFunction::zero(), &phi, &psi).unwrap(), 0.0);
        let g = StepFunction::indicator(0.0, 0.3, 1.0).unwrap();
        assert_eq!(qa_lower(&g, &phi, &psi).unwrap(), phi.eval(0.3).unwrap());
        let f = three_layer();
        let id = ShapeFunction::identity();
        let v = qa_lower(&f, &id, &psi).unwrap();
        assert!((v - f.l1_norm()).abs() < 1e-15);
    }

    #[test]
    fn indicator_bounds_coincide() {
        let (phi, psi) = qa();
        let g = StepFunction::indicator(0.0, 0.3, 1.0).unwrap();
        let b = qa_bounds(&g, &phi, &psi).unwrap();
        assert_eq!(b.lower, b.upper);
        assert_eq!(b.upper, phi.eval(0.3).unwrap());
    }

    #[test]
    fn zero_bounds() {
        let (phi, psi) = qa();
        let b = qa_bounds(&StepFunction::zero(), &phi, &psi).unwrap();
        assert_eq!((b.lower, b.upper, b.ratio()), (0.0, 0.0, 1.0));
        assert!(b.upper_witness.pieces.is_empty());
    }

    #[test]
    fn strategy_chain_and_witness() {
        let (phi, psi) = qa();
        let f = three_layer();
        let up = |s: &dyn DecompositionStrategy| qa_upper(&f, &phi, &psi, s).unwrap();
        let single = up(&Singleton);
        let layers = up(&Layers);
        let local = up(&LocalSearch);
        let exhaustive = up(&Exhaustive::default());
        assert!(exhaustive.upper <= local.upper);
        assert!(local.upper <= layers.upper);
        assert!(layers.upper <= single.upper);
        assert!(exhaustive.lower <= exhaustive.upper);
        for b in [&single, &layers, &local, &exhaustive] {
            let w = &b.upper_witness;
            assert!(w.dominates(&f, 1e-12));
            assert!(w.pieces.iter().all(|p| p.is_nonnegative() && !p.is_zero()));
            let recomputed = w.recompute_cost(&phi, &psi).unwrap();
            assert!((recomputed - w.cost).abs() <= 1e-12 * w.cost);
        }
    }

    #[test]
    fn singleton_is_fact_bound() {
        let (phi, psi) = qa();
        let f = three_layer();
        let b = qa_upper(&f, &phi, &psi, &Singleton).unwrap();
        assert_eq!(b.upper, crate::lorentz::fact_bound(&f, &phi).unwrap());
    }

    #[test]
    fn exhaustive_over_limit() {
        let (phi, psi) = qa();
        let f = three_layer();
        assert_eq!(
            qa_upper(&f, &phi, &psi, &Exhaustive::new(2)),
            Err(Error::TooManyLayers { layers: 3, max: 2 })
        );
    }
}
