//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Polynomials cross the boundary as JSON arrays of `[re, im]` pairs,
//! constant term first. Every export returns a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use deformkit::alignment::{bottleneck_match, deform_unipoly};
use deformkit::jets::{jet_align_roots, JetPoly};
use deformkit::metrics::counterexample_report;
use deformkit::uniroots::{find_roots, UniPoly, DEFAULT_TOL};
use deformkit::{Complex, SparsePoly};

fn parse_coeffs(text: &str) -> Result<Vec<Complex>, String> {
    let pairs: Vec<[f64; 2]> =
        serde_json::from_str(text).map_err(|e| format!("coefficients: {e}"))?;
    Ok(pairs
        .iter()
        .map(|[re, im]| Complex::new(*re, *im))
        .collect())
}

fn to_pairs(values: &[Complex]) -> Value {
    values.iter().map(|z| json!([z.re, z.im])).collect()
}

/// Roots of `f` and of one random `delta`-deformation, with their bottleneck
/// matching.
pub fn align(coeffs: &str, delta: f64, seed: u32) -> Result<String, String> {
    let f = UniPoly::new(parse_coeffs(coeffs)?).map_err(|e| e.to_string())?;
    let g = deform_unipoly(&f, delta, u64::from(seed), 0).map_err(|e| e.to_string())?;
    let rf = find_roots(&f, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let rg = find_roots(&g, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let m = bottleneck_match(&rf, &rg).map_err(|e| e.to_string())?;
    Ok(json!({
        "g": to_pairs(g.coeffs()),
        "roots_f": to_pairs(&rf.expanded()),
        "roots_g": to_pairs(&rg.expanded()),
        "perm": m.perm,
        "bottleneck": m.bottleneck,
    })
    .to_string())
}

/// Report for the line pair `t2 = t1`, `t2 = (1 + delta') t1` inside `H(T)`.
pub fn counterexample(delta_prime: f64, eps: f64, t: f64, grid: u32) -> Result<String, String> {
    let r = counterexample_report(delta_prime, eps, t, grid as usize).map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

/// Jet roots of `f + ε q` above the simple roots of `f`.
pub fn lift(f: &str, q: &str, order: i32) -> Result<String, String> {
    let f = SparsePoly::univariate(&parse_coeffs(f)?).map_err(|e| e.to_string())?;
    let q = SparsePoly::univariate(&parse_coeffs(q)?).map_err(|e| e.to_string())?;
    let g = JetPoly::deformation(&f, &q, 1, order).map_err(|e| e.to_string())?;
    let uni = UniPoly::from_sparse(&f).map_err(|e| e.to_string())?;
    let al = jet_align_roots(&uni, &g, order).map_err(|e| e.to_string())?;
    let pairs: Vec<Value> = al
        .pairs
        .iter()
        .map(|p| {
            let coeffs: Vec<Complex> = (0..=order).map(|k| p.lift.coeff(k)).collect();
            json!({
                "root": [p.root.re, p.root.im],
                "series": to_pairs(&coeffs),
                "residual": p.residual,
            })
        })
        .collect();
    let skipped: Vec<Value> = al
        .skipped
        .iter()
        .map(|r| json!({"root": [r.re, r.im], "multiplicity": r.multiplicity}))
        .collect();
    Ok(json!({"order": order, "pairs": pairs, "skipped": skipped}).to_string())
}

#[wasm_bindgen(js_name = alignRoots)]
pub fn align_roots_js(coeffs: &str, delta: f64, seed: u32) -> Result<String, JsValue> {
    align(coeffs, delta, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = lineCounterexample)]
pub fn counterexample_js(delta_prime: f64, eps: f64, t: f64, grid: u32) -> Result<String, JsValue> {
    counterexample(delta_prime, eps, t, grid).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = henselLift)]
pub fn lift_js(f: &str, q: &str, order: i32) -> Result<String, JsValue> {
    lift(f, q, order).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn align_quadratic() {
        let out: Value =
            serde_json::from_str(&align("[[-1,0],[0,0],[1,0]]", 1e-3, 3).unwrap()).unwrap();
        assert_eq!(out["roots_f"].as_array().unwrap().len(), 2);
        assert!(out["bottleneck"].as_f64().unwrap() < 1e-2);
        assert!(align("[[1,0]]", 1e-3, 3).is_err());
        assert!(align("not json", 1e-3, 3).is_err());
    }

    #[test]
    fn counterexample_threshold() {
        let out: Value =
            serde_json::from_str(&counterexample(0.1, 0.5, 12.0, 41).unwrap()).unwrap();
        assert_eq!(out["threshold"], 10.0);
        assert_eq!(out["status"], "witness");
        assert!(counterexample(-1.0, 0.5, 12.0, 41).is_err());
    }

    #[test]
    fn lift_square_root() {
        let out: Value =
            serde_json::from_str(&lift("[[-1,0],[0,0],[1,0]]", "[[-1,0]]", 4).unwrap()).unwrap();
        let pairs = out["pairs"].as_array().unwrap();
        assert_eq!(pairs.len(), 2);
        let plus = pairs
            .iter()
            .find(|p| p["root"][0].as_f64().unwrap() > 0.0)
            .unwrap();
        let half = plus["series"][1][0].as_f64().unwrap();
        assert!((half - 0.5).abs() < 1e-12);
    }
}
