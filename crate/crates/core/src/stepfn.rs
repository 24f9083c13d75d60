//! Step functions on `[0, 1]` and their rearrangement algebra.
//!
//! A [`StepFunction`] takes the value `values[i]` on the half-open piece
//! `[breakpoints[i], breakpoints[i + 1])`; the last piece is closed at 1.
//!
//! Every rearrangement-invariant quantity (distribution function, `L¹` and
//! `L∞` norms, the nested form) is derived from one canonical layer profile
//! of `|f|`. For a non-increasing `|f|` the layer measures are read straight
//! off the breakpoints; otherwise they are cumulative sums of piece lengths
//! in decreasing-value order, which is also how [`StepFunction::rearrange`]
//! places its breakpoints. Hence `f` and `f*` produce bit-identical profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finitely-valued function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepFunction", into = "RawStepFunction")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawStepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStepFunction> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStepFunction) -> Result<Self> {
        StepFunction::new(raw.breakpoints, raw.values)
    }
}

impl From<StepFunction> for RawStepFunction {
    fn from(f: StepFunction) -> Self {
        RawStepFunction {
            breakpoints: f.breakpoints,
            values: f.values,
        }
    }
}

/// Simple function `Σ b_k χ_{B_k}` with nested `B_1 ⊂ … ⊂ B_K`.
///
/// `heights[k]` is the value `a_k` of the `k`-th distinct level of `|f|`
/// (strictly decreasing), `levels[k] = a_k - a_{k+1}` with `a_{K+1} = 0`,
/// and `measures[k] = λ{|f| ≥ a_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedForm {
    pub levels: Vec<f64>,
    pub measures: Vec<f64>,
    pub heights: Vec<f64>,
}

impl NestedForm {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `Σ_k b_k χ_{[0, m_k)}`, i.e. the decreasing rearrangement.
    pub fn to_step_function(&self) -> StepFunction {
        let mut breakpoints = Vec::with_capacity(self.len() + 2);
        let mut values = Vec::with_capacity(self.len() + 1);
        breakpoints.push(0.0);
        for (&h, &m) in self.heights.iter().zip(&self.measures) {
            values.push(h);
            breakpoints.push(m);
        }
        if breakpoints.last().is_some_and(|&m| m < 1.0) {
            values.push(0.0);
            breakpoints.push(1.0);
        }
        StepFunction::from_sorted_pieces(breakpoints, values)
    }

    /// `Σ_k b_k`, telescoped as `a_1`.
    pub fn sup(&self) -> f64 {
        self.heights.first().copied().unwrap_or(0.0)
    }

    /// `∫ |f| = Σ_k b_k m_k`, accumulated in layer order.
    pub fn integral(&self) -> f64 {
        self.levels
            .iter()
            .zip(&self.measures)
            .fold(0.0, |acc, (&b, &m)| acc + b * m)
    }

    /// Height `a_k - a_{j+1}` of the piece made from layers `k..=j`.
    pub fn group_height(&self, first: usize, last: usize) -> f64 {
        let below = self.heights.get(last + 1).copied().unwrap_or(0.0);
        self.heights[first] - below
    }

    /// `Σ_{k=first}^{last} b_k m_k` in increasing `k`.
    pub fn group_mass(&self, first: usize, last: usize) -> f64 {
        (first..=last).fold(0.0, |acc, k| acc + self.levels[k] * self.measures[k])
    }

    fn from_heights(heights: Vec<f64>, measures: Vec<f64>) -> Self {
        let levels = heights
            .iter()
            .enumerate()
            .map(|(k, &h)| h - heights.get(k + 1).copied().unwrap_or(0.0))
            .collect();
        NestedForm {
            levels,
            measures,
            heights,
        }
    }
}

impl StepFunction {
    /// Validates and stores the function as given (equal neighbours allowed).
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidStepFunction("no pieces".into()));
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidStepFunction(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidStepFunction(format!(
                "breakpoints not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidStepFunction(format!("non-finite value {v}")));
        }
        Ok(StepFunction {
            breakpoints,
            values,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidStepFunction(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("step functions serialize")
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        StepFunction {
            breakpoints: vec![0.0, 1.0],
            values: vec![c],
        }
    }

    /// `height · χ_{[a, b)}` for `0 ≤ a < b ≤ 1`.
    pub fn indicator(a: f64, b: f64, height: f64) -> Result<Self> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::InvalidStepFunction(format!(
                "indicator interval [{a}, {b}) not inside [0, 1]"
            )));
        }
        let mut breakpoints = vec![0.0];
        let mut values = Vec::new();
        if a > 0.0 {
            breakpoints.push(a);
            values.push(0.0);
        }
        breakpoints.push(b);
        values.push(height);
        if b < 1.0 {
            breakpoints.push(1.0);
            values.push(0.0);
        }
        Ok(StepFunction {
            breakpoints,
            values,
        })
    }

    /// Builds from already sorted breakpoints, dropping empty pieces and
    /// merging equal neighbours.
    fn from_sorted_pieces(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        let mut bp = vec![0.0];
        let mut vals: Vec<f64> = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            let right = breakpoints[i + 1];
            if right <= *bp.last().unwrap() {
                continue;
            }
            if vals.last() == Some(&v) {
                *bp.last_mut().unwrap() = right;
            } else {
                vals.push(v);
                bp.push(right);
            }
        }
        if vals.is_empty() {
            return Self::zero();
        }
        *bp.last_mut().unwrap() = 1.0;
        StepFunction {
            breakpoints: bp,
            values: vals,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    /// `(left, right, value)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    /// Value at `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain("step function", x));
        }
        // index of the last breakpoint <= x, capped at the last piece
        let i = self.breakpoints.partition_point(|&t| t <= x);
        Ok(self.values[(i.max(1) - 1).min(self.values.len() - 1)])
    }

    /// Merges equal neighbours.
    pub fn canonical(&self) -> StepFunction {
        Self::from_sorted_pieces(self.breakpoints.clone(), self.values.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn abs(&self) -> StepFunction {
        self.map(f64::abs)
    }

    pub fn scale(&self, a: f64) -> StepFunction {
        self.map(|v| a * v)
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> StepFunction {
        let values = self.values.iter().map(|&v| op(v)).collect();
        Self::from_sorted_pieces(self.breakpoints.clone(), values)
    }

    pub fn add(&self, other: &StepFunction) -> StepFunction {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise combination on the merged breakpoint grid.
    pub fn zip_with(&self, other: &StepFunction, op: impl Fn(f64, f64) -> f64) -> StepFunction {
        let mut breakpoints = vec![0.0];
        let mut values = Vec::with_capacity(self.values.len() + other.values.len());
        let (mut i, mut j) = (0, 0);
        while i < self.values.len() && j < other.values.len() {
            values.push(op(self.values[i], other.values[j]));
            let (ri, rj) = (self.breakpoints[i + 1], other.breakpoints[j + 1]);
            breakpoints.push(ri.min(rj));
            if ri <= rj {
                i += 1;
            }
            if rj <= ri {
                j += 1;
            }
        }
        Self::from_sorted_pieces(breakpoints, values)
    }

    /// `true` if `self ≤ other + slack·max(|other|, 1)` everywhere.
    pub fn dominated_by(&self, other: &StepFunction, slack: f64) -> bool {
        let gap = self.zip_with(other, |a, b| {
            if a <= b + slack * b.abs().max(1.0) {
                0.0
            } else {
                1.0
            }
        });
        gap.is_zero()
    }

    /// Canonical layer profile of `|f|`; empty for `f ≡ 0`.
    pub fn layer_profile(&self) -> NestedForm {
        let magnitudes: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        let non_increasing = magnitudes.windows(2).all(|w| w[0] >= w[1]);
        let mut heights: Vec<f64> = Vec::new();
        let mut measures: Vec<f64> = Vec::new();
        if non_increasing {
            for (i, &v) in magnitudes.iter().enumerate() {
                if v == 0.0 {
                    break;
                }
                let right = self.breakpoints[i + 1];
                if heights.last() == Some(&v) {
                    *measures.last_mut().unwrap() = right;
                } else {
                    heights.push(v);
                    measures.push(right);
                }
            }
        } else {
            let mut order: Vec<usize> = (0..magnitudes.len())
                .filter(|&i| magnitudes[i] > 0.0)
                .collect();
            order.sort_by(|&a, &b| magnitudes[b].total_cmp(&magnitudes[a]));
            let covers_all = order.len() == magnitudes.len();
            let mut acc = 0.0;
            for &i in &order {
                let v = magnitudes[i];
                let next = acc + (self.breakpoints[i + 1] - self.breakpoints[i]);
                acc = next;
                if heights.last() == Some(&v) {
                    *measures.last_mut().unwrap() = next;
                } else if measures.last().is_some_and(|&m| next <= m) {
                    // piece shorter than the rounding of the running sum
                    continue;
                } else {
                    heights.push(v);
                    measures.push(next);
                }
            }
            if covers_all {
                if let Some(m) = measures.last_mut() {
                    *m = 1.0;
                }
            }
            for m in measures.iter_mut() {
                *m = m.min(1.0);
            }
        }
        NestedForm::from_heights(heights, measures)
    }

    /// `λ{x : |f(x)| > s}`.
    pub fn distribution(&self, s: f64) -> f64 {
        let profile = self.layer_profile();
        let above = profile.heights.partition_point(|&h| h > s);
        if above == 0 {
            0.0
        } else {
            profile.measures[above - 1]
        }
    }

    /// Decreasing rearrangement `f*` of `|f|`, in canonical form.
    pub fn rearrange(&self) -> StepFunction {
        self.layer_profile().to_step_function()
    }

    /// Nested form of a non-negative, non-zero function.
    pub fn nested_form(&self) -> Result<NestedForm> {
        if !self.is_nonnegative() {
            return Err(Error::NegativeValue);
        }
        let profile = self.layer_profile();
        if profile.is_empty() {
            return Err(Error::ZeroFunction);
        }
        Ok(profile)
    }

    pub fn l1_norm(&self) -> f64 {
        self.layer_profile().integral()
    }

    pub fn linf_norm(&self) -> f64 {
        self.layer_profile().sup()
    }
}
