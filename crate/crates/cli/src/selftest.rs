//! Seeded sweep over the invariant families of the toolkit.

use serde::Serialize;

use qaspace::qanorm::{
    DecompositionStrategy, Exhaustive, LinearLayerCosts, LocalSearch, EXHAUSTIVE_LIMIT,
};
use qaspace::testkit::{rng, StepGen};
use qaspace::witness::{build_witness, lower_bound_value, witness_qa_upper, WitnessSpec};
use qaspace::{fact_bound, lorentz_norm, qa_bounds, qa_lower, ShapeFunction, StepFunction};

use crate::CliError;

const SLACK: f64 = 1e-12;

#[derive(Debug, Serialize)]
pub struct Family {
    pub name: &'static str,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub seed: u64,
    pub families: Vec<Family>,
    pub all_passed: bool,
}

fn le(a: f64, b: f64) -> bool {
    a <= b + SLACK * a.abs().max(b.abs())
}

fn fact_or_zero(f: &StepFunction, phi: &ShapeFunction) -> qaspace::Result<f64> {
    if f.is_zero() {
        Ok(0.0)
    } else {
        fact_bound(f, phi)
    }
}

type Check = Box<dyn FnMut(usize) -> qaspace::Result<Option<String>>>;

fn family(name: &'static str, cases: usize, mut check: Check) -> Result<Family, CliError> {
    let mut fam = Family {
        name,
        cases,
        passed: 0,
        failed: 0,
        first_failure: None,
    };
    for i in 0..cases {
        match check(i)? {
            None => fam.passed += 1,
            Some(why) => {
                fam.failed += 1;
                fam.first_failure.get_or_insert(format!("case {i}: {why}"));
            }
        }
    }
    Ok(fam)
}

pub fn run(seed: u64, cases: usize) -> Result<Report, CliError> {
    let (phi, psi) = (ShapeFunction::qa_phi(), ShapeFunction::qa_psi());
    let gen = StepGen::default();
    let mut families = Vec::new();

    // each family draws from its own stream so adding one leaves the rest unchanged
    let stream = |k: u64| rng(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(k));

    {
        let (phi, psi, gen, mut r) = (phi.clone(), psi.clone(), gen.clone(), stream(1));
        let c = phi.eval(1.0)? * psi.eval(1.0)?;
        families.push(family("embedding_sandwich", cases, Box::new(move |_| {
            let f = gen.sample(&mut r);
            let b = qa_bounds(&f, &phi, &psi)?;
            let ok = le(c * f.l1_norm(), b.lower) && b.lower <= b.upper && le(b.upper, c * f.linf_norm());
            Ok((!ok).then(|| format!("lower {} upper {}", b.lower, b.upper)))
        }))?);
    }
    {
        let (phi, psi, gen, mut r) = (phi.clone(), psi.clone(), gen.clone(), stream(2));
        families.push(family("rearrangement_invariance", cases, Box::new(move |_| {
            let f = gen.sample(&mut r);
            let star = f.rearrange();
            let (a, b) = (qa_bounds(&f, &phi, &psi)?, qa_bounds(&star, &phi, &psi)?);
            let same = a.lower.to_bits() == b.lower.to_bits()
                && a.upper.to_bits() == b.upper.to_bits()
                && lorentz_norm(&f, &phi)? == lorentz_norm(&star, &phi)?;
            Ok((!same).then(|| "f and f* differ".to_string()))
        }))?);
    }
    {
        let (phi, psi, gen, mut r) = (phi.clone(), psi.clone(), gen.clone(), stream(3));
        families.push(family("homogeneity", cases, Box::new(move |i| {
            let f = gen.sample(&mut r);
            let a = 0.25 + i as f64 * 0.37;
            let (b, s) = (qa_bounds(&f, &phi, &psi)?, qa_bounds(&f.scale(-a), &phi, &psi)?);
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
            let ok = close(s.lower, a * b.lower) && close(s.upper, a * b.upper);
            Ok((!ok).then(|| format!("scale {a}: {} vs {}", s.upper, a * b.upper)))
        }))?);
    }
    {
        let (phi, psi, gen, mut r) = (phi.clone(), psi.clone(), gen.clone(), stream(4));
        families.push(family("quasi_triangle", cases, Box::new(move |_| {
            let (f, g) = (gen.sample(&mut r), gen.sample(&mut r));
            let lhs = qa_lower(&f.add(&g), &phi, &psi)?;
            let rhs = 4.0 * (qa_bounds(&f, &phi, &psi)?.upper + qa_bounds(&g, &phi, &psi)?.upper);
            Ok((lhs > rhs).then(|| format!("{lhs} > {rhs}")))
        }))?);
    }
    {
        let (phi, gen, mut r) = (phi.clone(), gen.clone(), stream(5));
        families.push(family("fact_bound", cases, Box::new(move |_| {
            let f = gen.sample(&mut r);
            let (norm, bound) = (lorentz_norm(&f, &phi)?.value, fact_or_zero(&f, &phi)?);
            Ok((!le(norm, bound)).then(|| format!("norm {norm} > bound {bound}")))
        }))?);
    }
    {
        let (phi, gen, mut r) = (phi.clone(), gen.clone(), stream(6));
        families.push(family("fact_bound_monotone", cases, Box::new(move |_| {
            let h = gen.sample(&mut r);
            let g = gen.sample_below(&h, &mut r);
            let (small, big) = (fact_or_zero(&g, &phi)?, fact_or_zero(&h, &phi)?);
            Ok((!le(small, big)).then(|| format!("{small} > {big}")))
        }))?);
    }
    {
        let (phi, gen, mut r) = (phi.clone(), gen.clone(), stream(7));
        families.push(family("lorentz_triangle", cases, Box::new(move |_| {
            let (f, g) = (gen.sample(&mut r), gen.sample(&mut r));
            let lhs = lorentz_norm(&f.add(&g), &phi)?.value;
            let rhs = lorentz_norm(&f, &phi)?.value + lorentz_norm(&g, &phi)?.value;
            Ok((!le(lhs, rhs)).then(|| format!("{lhs} > {rhs}")))
        }))?);
    }
    {
        let (phi, psi, mut r) = (phi.clone(), psi.clone(), stream(8));
        let gen = StepGen::default().nonnegative().with_max_pieces(EXHAUSTIVE_LIMIT);
        families.push(family("local_vs_exhaustive", cases, Box::new(move |_| {
            let f = gen.sample(&mut r);
            let profile = f.layer_profile();
            if profile.is_empty() {
                return Ok(None);
            }
            let costs = LinearLayerCosts::new(&profile, &phi, &psi)?;
            let best = Exhaustive::default().search(&costs)?.total;
            let local = LocalSearch.search(&costs)?.total;
            Ok((local < best).then(|| format!("local {local} < exhaustive {best}")))
        }))?);
    }
    {
        let (phi, psi, gen, mut r) = (phi.clone(), psi.clone(), gen.clone(), stream(9));
        families.push(family("decomposition_dominates", cases, Box::new(move |_| {
            let f = gen.sample(&mut r);
            let b = qa_bounds(&f, &phi, &psi)?;
            Ok((!b.upper_witness.dominates(&f, SLACK)).then(|| "pieces do not cover |f|".to_string()))
        }))?);
    }
    {
        let (gen, mut r) = (gen.clone(), stream(10));
        families.push(family("json_round_trip", cases, Box::new(move |_| {
            let f = gen.sample(&mut r);
            let back = StepFunction::from_json(&f.to_json())?;
            Ok((back != f).then(|| "re-parsed function differs".to_string()))
        }))?);
    }
    {
        let (phi, psi) = (phi.clone(), psi.clone());
        families.push(family("witness", 7, Box::new(move |i| {
            let n = i + 2;
            let spec = WitnessSpec::new(phi.clone(), psi.clone(), n, 0.5, 1.0);
            let w = build_witness(&spec)?;
            let check = w.verify()?;
            let upper = witness_qa_upper(&w)?.value;
            let bound = lower_bound_value(&spec)?;
            let ok = check.passed(1e-8) && upper >= bound;
            Ok((!ok).then(|| format!("N = {n}: upper {upper}, bound {bound}, {check:?}")))
        }))?);
    }

    let all_passed = families.iter().all(|f| f.failed == 0);
    Ok(Report {
        seed,
        families,
        all_passed,
    })
}
