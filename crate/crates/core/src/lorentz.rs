//! Lorentz norms `‖f‖_{Λφ} = ∫ f* dφ` of step functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shapes::ShapeFunction;
use crate::stepfn::{NestedForm, StepFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzNorm {
    pub value: f64,
    /// `‖f‖_∞ φ(0₊)`.
    pub jump_part: f64,
    pub integral_part: f64,
}

pub(crate) fn require_unit_domain(phi: &ShapeFunction) -> Result<()> {
    if phi.covers_unit_interval() {
        Ok(())
    } else {
        Err(Error::InvalidShape(format!(
            "{} does not cover [0, 1] and cannot act on measures",
            phi.name()
        )))
    }
}

/// `Σ_k b_k φ(m_k)`, split into the jump at the origin and the rest.
pub fn lorentz_norm_of_profile(profile: &NestedForm, phi: &ShapeFunction) -> Result<LorentzNorm> {
    require_unit_domain(phi)?;
    let at_zero = phi.at_zero_plus();
    let mut integral_part = 0.0;
    for (&b, &m) in profile.levels.iter().zip(&profile.measures) {
        integral_part += b * (phi.eval(m)? - at_zero);
    }
    let jump_part = profile.sup() * at_zero;
    Ok(LorentzNorm {
        value: jump_part + integral_part,
        jump_part,
        integral_part,
    })
}

/// Norm of `|f|`; zero for `f ≡ 0`.
pub fn lorentz_norm(f: &StepFunction, phi: &ShapeFunction) -> Result<LorentzNorm> {
    lorentz_norm_of_profile(&f.layer_profile(), phi)
}

/// `φ(t)`, the norm of `χ_{[0, t)}`.
pub fn fundamental(phi: &ShapeFunction, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain("fundamental function", t));
    }
    phi.eval(t)
}

/// `‖f‖_∞ φ(‖f‖₁/‖f‖_∞)` from the layer profile. A single layer uses its
/// measure directly rather than the quotient.
pub(crate) fn profile_fact_bound(profile: &NestedForm, phi: &ShapeFunction) -> Result<f64> {
    if profile.is_empty() {
        return Err(Error::ZeroFunction);
    }
    let linf = profile.sup();
    let ratio = if profile.len() == 1 {
        profile.measures[0]
    } else {
        (profile.integral() / linf).min(1.0)
    };
    Ok(linf * phi.eval(ratio)?)
}

/// Upper bound `‖f‖_∞ φ(‖f‖₁/‖f‖_∞)` for the Lorentz norm.
pub fn fact_bound(f: &StepFunction, phi: &ShapeFunction) -> Result<f64> {
    require_unit_domain(phi)?;
    profile_fact_bound(&f.layer_profile(), phi)
}
