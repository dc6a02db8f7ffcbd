use serde_json::{json, Value};

use deformkit::alignment::bottleneck_match_values;
use deformkit::jets::{jet_align_roots, JetPoly};
use deformkit::metrics::{counterexample_report, hausdorff, witness_distance};
use deformkit::uniroots::{cluster_multiplicities, find_roots, UniPoly, DEFAULT_TOL};
use deformkit::varieties::{
    containment_check, delta_bound, lemma_check, system_residual, SampleCloud,
};
use deformkit::{alignment, Complex, Point, PolySystem, Result, SparsePoly};

use crate::CliError;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn poly(nvars: usize, terms: &[(&[u32], f64)]) -> Result<SparsePoly> {
    SparsePoly::from_terms(nvars, terms.iter().map(|(e, a)| (e.to_vec(), c(*a, 0.0))))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

type Case = (&'static str, bool);

fn roots() -> Result<Vec<Case>> {
    let r = find_roots(&UniPoly::from_real(&[-1.0, 0.0, 1.0])?, DEFAULT_TOL)?;
    let vals: Vec<Complex> = r.expanded();
    let double = find_roots(&UniPoly::from_real(&[1.0, -2.0, 1.0])?, DEFAULT_TOL)?;
    let merged = cluster_multiplicities(&double, 1e-6)?;
    Ok(vec![
        (
            "t^2 - 1 has roots -1, 1",
            vals.len() == 2
                && (vals[0] - c(-1.0, 0.0)).norm() < 1e-12
                && (vals[1] - c(1.0, 0.0)).norm() < 1e-12,
        ),
        (
            "(t - 1)^2 clusters to one root of multiplicity 2",
            merged.roots.len() == 1 && merged.roots[0].multiplicity == 2,
        ),
        (
            "constants are rejected",
            UniPoly::from_real(&[3.0]).is_err(),
        ),
    ])
}

fn align() -> Result<Vec<Case>> {
    let m = bottleneck_match_values(&[c(1.0, 0.0), c(2.0, 0.0)], &[c(2.1, 0.0), c(0.9, 0.0)])?;
    let same = bottleneck_match_values(&[c(0.0, 1.0)], &[c(0.0, 1.0)])?;
    Ok(vec![
        (
            "{1, 2} vs {2.1, 0.9} crosses the pairing",
            m.perm == vec![1, 0],
        ),
        ("bottleneck is 0.1", close(m.bottleneck, 0.1, 1e-12)),
        ("identical sets have bottleneck 0", same.bottleneck == 0.0),
        (
            "different sizes are rejected",
            bottleneck_match_values(&[c(0.0, 0.0)], &[]).is_err(),
        ),
    ])
}

fn modulus() -> Result<Vec<Case>> {
    let f = UniPoly::from_real(&[-1.0, 0.0, 1.0])?;
    let d = alignment::empirical_modulus(&f, 0.1, 4, 7)?;
    Ok(vec![
        ("t^2 - 1 at eps 0.1 has a positive modulus", d > 0.0),
        (
            "zero trials are rejected",
            alignment::empirical_modulus(&f, 0.1, 0, 7).is_err(),
        ),
    ])
}

fn jet_lift() -> Result<Vec<Case>> {
    let f = poly(1, &[(&[2], 1.0), (&[0], -1.0)])?;
    let g = JetPoly::deformation(&f, &SparsePoly::constant(1, c(-1.0, 0.0)), 1, 4)?;
    let al = jet_align_roots(&UniPoly::from_sparse(&f)?, &g, 4)?;
    let plus = al.pairs.iter().find(|p| p.root.value().re > 0.0);
    Ok(vec![
        ("both roots of t^2 - 1 lift", al.pairs.len() == 2),
        (
            "sqrt(1 + ε) starts 1 + ε/2",
            plus.is_some_and(|p| {
                (p.lift.coeff(0) - c(1.0, 0.0)).norm() < 1e-12
                    && (p.lift.coeff(1) - c(0.5, 0.0)).norm() < 1e-12
            }),
        ),
    ])
}

fn lemma() -> Result<Vec<Case>> {
    let f = poly(2, &[(&[1, 1], 1.0), (&[0, 0], -1.0)])?;
    let g = poly(2, &[(&[1, 1], 1.04), (&[0, 0], -0.96)])?;
    let r = lemma_check(&f, &g, 1.0, 0.1, 11)?;
    Ok(vec![
        (
            "eps 0.3, T 1, d 2, |I| 3 gives bound 0.1",
            close(delta_bound(0.3, 1.0, 2, 3)?, 0.1, 1e-15),
        ),
        (
            "eps 1, T 2, d 3, |I| 4 gives bound 1/32",
            delta_bound(1.0, 2.0, 3, 4)? == 0.03125,
        ),
        (
            "hyperbola perturbation stays below 0.1",
            r.pass && r.sup_deviation <= 0.08 + 1e-12,
        ),
    ])
}

fn contain() -> Result<Vec<Case>> {
    let f = poly(2, &[(&[1, 0], 1.0), (&[0, 1], -1.0)])?;
    let g = poly(2, &[(&[1, 0], 1.0), (&[0, 1], -1.0), (&[0, 0], 0.03)])?;
    let r = containment_check(&f, &g, 1.0, 0.1, 11, 1e-8)?;
    let shifted = poly(2, &[(&[1, 0], 1.0), (&[0, 1], -1.0), (&[0, 0], 0.5)])?;
    Ok(vec![
        (
            "diagonal shifted by 0.03 has no violations",
            r.pass && r.violation_count == 0,
        ),
        ("max residual is 0.03", close(r.max_residual, 0.03, 1e-12)),
        (
            "too large a shift is rejected",
            containment_check(&f, &shifted, 1.0, 0.1, 11, 1e-8).is_err(),
        ),
    ])
}

fn variety() -> Result<Vec<Case>> {
    let sys = PolySystem::new(vec![
        poly(2, &[(&[0, 1], 1.0), (&[1, 0], -1.0)])?,
        poly(2, &[(&[1, 0], 1.0), (&[0, 1], 1.0)])?,
    ])?;
    Ok(vec![
        (
            "origin lies on V(t2 - t1, t1 + t2)",
            system_residual(&sys, &Point::real(&[0.0, 0.0]))? == 0.0,
        ),
        (
            "(1, 1) has residual 2",
            system_residual(&sys, &Point::real(&[1.0, 1.0]))? == 2.0,
        ),
    ])
}

fn cloud(points: &[&[f64]]) -> Result<SampleCloud> {
    SampleCloud::new(points.iter().map(|p| Point::real(p)).collect(), "selftest")
}

fn hausdorff_cases() -> Result<Vec<Case>> {
    let w = cloud(&[&[0.0], &[10.0]])?;
    let z = cloud(&[&[0.0]])?;
    Ok(vec![
        ("{0, 10} vs {0} is 10", hausdorff(&w, &z)? == 10.0),
        ("distance to itself is 0", hausdorff(&w, &w)? == 0.0),
        (
            "singletons (0,0), (1,2) are 2 apart",
            hausdorff(&cloud(&[&[0.0, 0.0]])?, &cloud(&[&[1.0, 2.0]])?)? == 2.0,
        ),
    ])
}

fn counterexample() -> Result<Vec<Case>> {
    let r = counterexample_report(0.1, 0.5, 12.0, 41)?;
    Ok(vec![
        ("threshold 2ε/δ' is 10", r.threshold == 10.0),
        (
            "witness at |w| = 10 is 0.5 away",
            witness_distance(0.1, c(10.0, 0.0)) == 0.5,
        ),
        (
            "lines meet at the origin",
            witness_distance(0.3, c(0.0, 0.0)) == 0.0,
        ),
        (
            "T = 10 has no witness",
            counterexample_report(0.1, 0.5, 10.0, 11)?.status == "no witness in window",
        ),
    ])
}

pub fn run(subcommand: &str) -> Result<Value, CliError> {
    let cases = match subcommand {
        "roots" => roots(),
        "align" => align(),
        "modulus" => modulus(),
        "jet-lift" => jet_lift(),
        "lemma" => lemma(),
        "contain" => contain(),
        "variety" => variety(),
        "hausdorff" => hausdorff_cases(),
        "counterexample" => counterexample(),
        other => return Err(CliError::Input(format!("no selftest for {other}"))),
    }?;
    let pass = cases.iter().all(|(_, ok)| *ok);
    let cases: Vec<Value> = cases
        .into_iter()
        .map(|(name, ok)| json!({"name": name, "pass": ok}))
        .collect();
    Ok(json!({"cases": cases, "pass": pass}))
}
