use proptest::prelude::*;

use qaspace::qanorm::{qa_upper, LocalSearch};
use qaspace::shapes::{is_concave, least_concave_majorant};
use qaspace::{fact_bound, lorentz_norm, qa_bounds, qa_lower, ShapeFunction, StepFunction};

const SLACK: f64 = 1e-10;

fn le(a: f64, b: f64) -> bool {
    a <= b + SLACK * a.abs().max(b.abs()).max(1.0)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SLACK * a.abs().max(b.abs()).max(1.0)
}

fn step_from(pieces: Vec<(f64, f64)>) -> StepFunction {
    let total: f64 = pieces.iter().map(|p| p.0).sum();
    let mut breakpoints = vec![0.0];
    let mut acc = 0.0;
    for (len, _) in &pieces[..pieces.len() - 1] {
        acc += len / total;
        breakpoints.push(acc);
    }
    breakpoints.push(1.0);
    let values = pieces.iter().map(|p| p.1).collect();
    StepFunction::new(breakpoints, values).unwrap()
}

fn step() -> impl Strategy<Value = StepFunction> {
    prop::collection::vec((0.01f64..1.0, prop_oneof![Just(0.0), -5.0f64..5.0]), 1..12).prop_map(step_from)
}

fn nonneg_step() -> impl Strategy<Value = StepFunction> {
    step().prop_map(|f| f.abs())
}

fn phi_shape() -> impl Strategy<Value = ShapeFunction> {
    prop_oneof![
        Just(ShapeFunction::qa_phi()),
        Just(ShapeFunction::identity()),
        (0.1f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| ShapeFunction::alpha_beta(a, b).unwrap()),
    ]
}

fn psi_shape() -> impl Strategy<Value = ShapeFunction> {
    prop_oneof![
        Just(ShapeFunction::qa_psi()),
        Just(ShapeFunction::constant_one()),
        (0.0f64..=1.0).prop_map(|g| ShapeFunction::psi_gamma(g).unwrap()),
    ]
}

proptest! {
    #[test]
    fn rearrangement_is_decreasing_and_equimeasurable(f in step(), s in 0.0f64..5.0) {
        let star = f.rearrange();
        prop_assert!(star.values().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(star.is_nonnegative());
        prop_assert!(close(star.l1_norm(), f.abs().l1_norm()));
        prop_assert_eq!(star.distribution(s), f.distribution(s));
        prop_assert_eq!(star.rearrange(), star);
    }

    #[test]
    fn json_round_trip(f in step()) {
        prop_assert_eq!(StepFunction::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn nested_form_reconstructs_the_rearrangement(f in nonneg_step()) {
        let profile = f.layer_profile();
        prop_assert_eq!(profile.to_step_function(), f.rearrange());
        prop_assert!(close(profile.integral(), f.l1_norm()));
        prop_assert_eq!(profile.sup(), f.linf_norm());
    }

    #[test]
    fn shapes_are_monotone_and_midpoint_concave(phi in phi_shape(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let (fl, fh) = (phi.eval(lo).unwrap(), phi.eval(hi).unwrap());
        prop_assert!(le(fl, fh));
        let mid = phi.eval(0.5 * (lo + hi)).unwrap();
        prop_assert!(le(0.5 * (fl + fh), mid));
    }

    #[test]
    fn shapes_are_subadditive(phi in phi_shape(), a in 0.0f64..=0.5, b in 0.0f64..=0.5) {
        let sum = phi.eval(a + b).unwrap();
        prop_assert!(le(sum, phi.eval(a).unwrap() + phi.eval(b).unwrap()));
    }

    #[test]
    fn index_weights_are_monotone(psi in psi_shape(), a in 0.0f64..50.0, d in 0.0f64..50.0) {
        prop_assert!(le(psi.eval(a).unwrap(), psi.eval(a + d).unwrap()));
    }

    #[test]
    fn gamma_round_trip(x in -40.0f64..0.0) {
        let phi = ShapeFunction::qa_phi();
        let t = x.exp();
        let back = phi.gamma_inv(phi.gamma(t).unwrap()).unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * t);
    }

    #[test]
    fn majorant_dominates_and_is_concave(ys in prop::collection::vec(0.0f64..3.0, 2..20)) {
        let n = ys.len();
        // non-decreasing samples from the origin, so the hull is a valid shape
        let mut acc = -ys[0];
        let samples: Vec<(f64, f64)> = ys
            .iter()
            .enumerate()
            .map(|(i, y)| {
                acc += y;
                (i as f64 / (n - 1) as f64, acc)
            })
            .collect();
        let hull = least_concave_majorant(&samples).unwrap();
        let on_hull: Vec<(f64, f64)> = samples.iter().map(|&(t, _)| (t, hull.eval(t).unwrap())).collect();
        for (&(_, y), &(_, h)) in samples.iter().zip(&on_hull) {
            prop_assert!(le(y, h));
        }
        prop_assert!(is_concave(&on_hull));
    }

    #[test]
    fn lorentz_triangle_inequality(f in step(), g in step(), phi in phi_shape()) {
        let lhs = lorentz_norm(&f.add(&g), &phi).unwrap().value;
        let rhs = lorentz_norm(&f, &phi).unwrap().value + lorentz_norm(&g, &phi).unwrap().value;
        prop_assert!(le(lhs, rhs));
    }

    #[test]
    fn lorentz_lattice_property(f in step(), u in 0.0f64..=1.0, phi in phi_shape()) {
        let below = f.abs().scale(u);
        prop_assert!(le(lorentz_norm(&below, &phi).unwrap().value, lorentz_norm(&f, &phi).unwrap().value));
    }

    #[test]
    fn lorentz_scaling(f in step(), a in -10.0f64..10.0, phi in phi_shape()) {
        let scaled = lorentz_norm(&f.scale(a), &phi).unwrap().value;
        prop_assert!(close(scaled, a.abs() * lorentz_norm(&f, &phi).unwrap().value));
    }

    #[test]
    fn fact_bound_dominates_lorentz(f in step(), phi in phi_shape()) {
        prop_assume!(!f.is_zero());
        prop_assert!(le(lorentz_norm(&f, &phi).unwrap().value, fact_bound(&f, &phi).unwrap()));
    }

    #[test]
    fn bounds_sandwich(f in step(), phi in phi_shape(), psi in psi_shape()) {
        let b = qa_bounds(&f, &phi, &psi).unwrap();
        let c = phi.eval(1.0).unwrap() * psi.eval(1.0).unwrap();
        prop_assert!(le(c * f.l1_norm(), b.lower));
        prop_assert!(b.lower <= b.upper);
        prop_assert!(le(b.upper, c * f.linf_norm()));
    }

    #[test]
    fn upper_witness_is_a_decomposition(f in step(), phi in phi_shape(), psi in psi_shape()) {
        let b = qa_upper(&f, &phi, &psi, &LocalSearch).unwrap();
        prop_assert!(b.upper_witness.dominates(&f, 1e-12));
        prop_assert!(b.upper_witness.pieces.iter().all(StepFunction::is_nonnegative));
        let recomputed = b.upper_witness.recompute_cost(&phi, &psi).unwrap();
        prop_assert!(le(recomputed, b.upper * (1.0 + 1e-9)));
    }

    #[test]
    fn bounds_are_homogeneous(f in step(), a in 0.1f64..10.0) {
        let (phi, psi) = (ShapeFunction::qa_phi(), ShapeFunction::qa_psi());
        let b = qa_bounds(&f, &phi, &psi).unwrap();
        let s = qa_bounds(&f.scale(a), &phi, &psi).unwrap();
        prop_assert!(close(s.lower, a * b.lower));
        prop_assert!(close(s.upper, a * b.upper));
    }

    #[test]
    fn quasi_triangle(f in step(), g in step()) {
        let (phi, psi) = (ShapeFunction::qa_phi(), ShapeFunction::qa_psi());
        let lhs = qa_lower(&f.add(&g), &phi, &psi).unwrap();
        let rhs = qa_bounds(&f, &phi, &psi).unwrap().upper + qa_bounds(&g, &phi, &psi).unwrap().upper;
        prop_assert!(lhs <= 4.0 * rhs);
    }

    #[test]
    fn rearrangement_invariance(f in step(), phi in phi_shape(), psi in psi_shape()) {
        let star = f.rearrange();
        prop_assert_eq!(lorentz_norm(&f, &phi).unwrap(), lorentz_norm(&star, &phi).unwrap());
        let (a, b) = (qa_bounds(&f, &phi, &psi).unwrap(), qa_bounds(&star, &phi, &psi).unwrap());
        prop_assert_eq!(a.lower.to_bits(), b.lower.to_bits());
        prop_assert_eq!(a.upper.to_bits(), b.upper.to_bits());
    }
}
