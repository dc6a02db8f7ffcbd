//! Truncated Laurent series in a formal infinitesimal `ε`.
//!
//! A [`Jet`] `c_m ε^m + ... + c_K ε^K` stands in for a nonstandard complex
//! number: `m >= 0` is finite, `m >= 1` is infinitesimal and `m < 0` is
//! infinite. The standard part of a finite jet is its `ε^0` coefficient, and
//! that map is a ring homomorphism from finite jets onto the complex numbers.
//!
//! [`hensel_lift_root`] turns a simple root of a standard polynomial into a
//! jet root of any infinitesimal deformation of it, one power of `ε` at a
//! time.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{coeff_sup_distance, Complex, ComplexJson, MultiIndex, SparsePoly};
use crate::uniroots::{
    cluster_multiplicities, find_roots, Root, UniPoly, DEFAULT_CLUSTER_RADIUS, DEFAULT_TOL,
};

pub const DEFAULT_ORDER: i32 = 8;
pub const MAX_ORDER: i32 = 32;
/// Absolute tolerance on standard parts used by `≈`.
pub const APPROX_TOL: f64 = 1e-12;
/// `|f'(ζ)|` below this counts as a multiple root.
pub const SIMPLE_ROOT_THRESHOLD: f64 = 1e-6;
/// Largest allowed `|f(ζ)| / scale` for a lifting seed.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;

fn check_order(order: i32) -> Result<()> {
    if (1..=MAX_ORDER).contains(&order) {
        Ok(())
    } else {
        Err(Error::InvalidOrder(order))
    }
}

/// `sum_{k=min_exp}^{order} coeffs[k - min_exp] ε^k`, with no leading or
/// trailing zero coefficients stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JetJson", into = "JetJson")]
pub struct Jet {
    min_exp: i32,
    order: i32,
    coeffs: Vec<Complex>,
}

/// Standard part of a jet: a complex number, or the marker for an infinite
/// jet, which has none.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StandardPart {
    Finite(Complex),
    Infinite,
}

impl StandardPart {
    pub fn finite(self) -> Option<Complex> {
        match self {
            StandardPart::Finite(c) => Some(c),
            StandardPart::Infinite => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Jet {
    /// Coefficients for exponents `min_exp, min_exp + 1, ...`; anything past
    /// `order` is dropped.
    pub fn new(min_exp: i32, order: i32, coeffs: Vec<Complex>) -> Result<Jet> {
        check_order(order)?;
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        Ok(Jet::raw(min_exp, order, coeffs))
    }

    fn raw(min_exp: i32, order: i32, coeffs: Vec<Complex>) -> Jet {
        let mut jet = Jet {
            min_exp,
            order,
            coeffs,
        };
        jet.normalize();
        jet
    }

    fn normalize(&mut self) {
        let keep = (self.order - self.min_exp + 1).max(0) as usize;
        self.coeffs.truncate(keep);
        while self.coeffs.last() == Some(&Complex::default()) {
            self.coeffs.pop();
        }
        let lead = self
            .coeffs
            .iter()
            .take_while(|c| **c == Complex::default())
            .count();
        self.coeffs.drain(..lead);
        self.min_exp += lead as i32;
        if self.coeffs.is_empty() {
            self.min_exp = self.order + 1;
        }
    }

    pub fn zero(order: i32) -> Jet {
        Jet::raw(order + 1, order, Vec::new())
    }

    pub fn constant(c: Complex, order: i32) -> Jet {
        Jet::raw(0, order, vec![c])
    }

    /// `c ε^exp`.
    pub fn monomial(c: Complex, exp: i32, order: i32) -> Jet {
        Jet::raw(exp, order, vec![c])
    }

    /// The infinitesimal `ε` itself.
    pub fn epsilon(order: i32) -> Jet {
        Jet::monomial(Complex::new(1.0, 0.0), 1, order)
    }

    /// Power series `c_0 + c_1 ε + ...`.
    pub fn from_series(coeffs: &[Complex], order: i32) -> Result<Jet> {
        Jet::new(0, order, coeffs.to_vec())
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    /// Exponent of the lowest nonzero term; `order + 1` for the zero jet.
    pub fn min_exp(&self) -> i32 {
        self.min_exp
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    /// Coefficient of `ε^k` (zero outside the stored range).
    pub fn coeff(&self, k: i32) -> Complex {
        let i = k - self.min_exp;
        if i < 0 {
            return Complex::default();
        }
        self.coeffs.get(i as usize).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// No negative powers of `ε`.
    pub fn is_finite(&self) -> bool {
        self.min_exp >= 0
    }

    pub fn is_infinitesimal(&self) -> bool {
        self.min_exp >= 1
    }

    pub fn standard_part(&self) -> StandardPart {
        if self.min_exp < 0 {
            StandardPart::Infinite
        } else {
            StandardPart::Finite(self.coeff(0))
        }
    }

    /// The same jet cut at a lower order; never raises the order.
    pub fn truncate(&self, order: i32) -> Jet {
        let order = order.min(self.order);
        Jet::raw(self.min_exp, order, self.coeffs.clone())
    }

    pub fn scale(&self, s: Complex) -> Jet {
        Jet::raw(
            self.min_exp,
            self.order,
            self.coeffs.iter().map(|&c| c * s).collect(),
        )
    }

    fn add_jet(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let lo = self.min_exp.min(other.min_exp);
        if lo > order {
            return Jet::zero(order);
        }
        let coeffs = (lo..=order)
            .map(|k| self.coeff(k) + other.coeff(k))
            .collect();
        Jet::raw(lo, order, coeffs)
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        if self.is_zero() || other.is_zero() {
            return Jet::zero(order);
        }
        let lo = self.min_exp + other.min_exp;
        if lo > order {
            return Jet::zero(order);
        }
        let mut coeffs = vec![Complex::default(); (order - lo + 1) as usize];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                let k = i + j;
                if k < coeffs.len() {
                    coeffs[k] += a * b;
                }
            }
        }
        Jet::raw(lo, order, coeffs)
    }

    /// Laurent division; dividing by an infinitesimal yields negative
    /// exponents. Coefficients of either operand beyond its stored order are
    /// taken as zero.
    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        if other.is_zero() {
            return Err(Error::ZeroDivision);
        }
        let order = self.order.min(other.order);
        if self.is_zero() {
            return Ok(Jet::zero(order));
        }
        let lo = self.min_exp - other.min_exp;
        if lo > order {
            return Ok(Jet::zero(order));
        }
        let len = (order - lo + 1) as usize;
        let unit = &other.coeffs;
        let mut q: Vec<Complex> = Vec::with_capacity(len);
        for j in 0..len {
            let mut acc = self.coeff(self.min_exp + j as i32);
            for i in 1..=j.min(unit.len() - 1) {
                acc -= unit[i] * q[j - i];
            }
            q.push(acc / unit[0]);
        }
        Ok(Jet::raw(lo, order, q))
    }

    pub fn powu(&self, k: u32) -> Jet {
        let mut acc = Jet::constant(Complex::new(1.0, 0.0), self.order);
        for _ in 0..k {
            acc = acc.mul_jet(self);
        }
        acc
    }
}

/// `a op b` for the four field operations.
pub fn jet_arith(a: &Jet, b: &Jet, op: JetOp) -> Result<Jet> {
    Ok(match op {
        JetOp::Add => a + b,
        JetOp::Sub => a - b,
        JetOp::Mul => a * b,
        JetOp::Div => a.checked_div(b)?,
    })
}

/// Standard part; [`StandardPart::Infinite`] when the jet has negative
/// exponents.
pub fn standard_part(a: &Jet) -> StandardPart {
    a.standard_part()
}

/// `a ≈ b`: the standard part of `a - b` vanishes. Only defined for finite
/// jets.
pub fn approx(a: &Jet, b: &Jet) -> Result<bool> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InfiniteJet);
    }
    Ok((a - b).coeff(0).norm() <= APPROX_TOL)
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.add_jet(rhs)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.add_jet(&-rhs)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0 + O(ε^{})", self.order + 1);
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == Complex::default() {
                continue;
            }
            let k = self.min_exp + i as i32;
            if i > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})ε")?,
                _ => write!(f, "({c})ε^{k}")?,
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetJson {
    min_exp: i32,
    order: i32,
    coeffs: Vec<ComplexJson>,
}

impl TryFrom<JetJson> for Jet {
    type Error = Error;
    fn try_from(j: JetJson) -> Result<Jet> {
        Jet::new(
            j.min_exp,
            j.order,
            j.coeffs.into_iter().map(Complex::from).collect(),
        )
    }
}

impl From<Jet> for JetJson {
    fn from(j: Jet) -> Self {
        JetJson {
            min_exp: j.min_exp,
            order: j.order,
            coeffs: j.coeffs.into_iter().map(ComplexJson::from).collect(),
        }
    }
}

/// Polynomial with jet coefficients; every coefficient is truncated to the
/// polynomial's order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JetPolyJson", into = "JetPolyJson")]
pub struct JetPoly {
    nvars: usize,
    order: i32,
    terms: BTreeMap<MultiIndex, Jet>,
}

impl JetPoly {
    /// Mixed coefficient orders truncate to the smallest one.
    pub fn from_terms<I, E>(nvars: usize, order: i32, terms: I) -> Result<JetPoly>
    where
        I: IntoIterator<Item = (E, Jet)>,
        E: Into<MultiIndex>,
    {
        check_order(order)?;
        if nvars == 0 {
            return Err(Error::InvalidParameter {
                name: "nvars",
                requirement: "at least 1",
                value: 0.0,
            });
        }
        let mut map = BTreeMap::new();
        let mut order = order;
        for (e, jet) in terms {
            let e = e.into();
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: e.len(),
                });
            }
            if map.contains_key(&e) {
                return Err(Error::DuplicateExponent(e.exps().to_vec()));
            }
            order = order.min(jet.order());
            map.insert(e, jet);
        }
        Ok(JetPoly::assemble(nvars, order, map))
    }

    fn assemble(nvars: usize, order: i32, terms: BTreeMap<MultiIndex, Jet>) -> JetPoly {
        let terms = terms
            .into_iter()
            .map(|(e, j)| (e, j.truncate(order)))
            .filter(|(_, j)| !j.is_zero())
            .collect();
        JetPoly {
            nvars,
            order,
            terms,
        }
    }

    /// Every coefficient as a constant jet.
    pub fn from_sparse(p: &SparsePoly, order: i32) -> Result<JetPoly> {
        check_order(order)?;
        Ok(JetPoly::assemble(
            p.nvars(),
            order,
            p.terms()
                .map(|(e, &c)| (e.clone(), Jet::constant(c, order)))
                .collect(),
        ))
    }

    /// `p + ε^exp q`, the standard way to build an infinitesimal deformation.
    pub fn deformation(p: &SparsePoly, q: &SparsePoly, exp: i32, order: i32) -> Result<JetPoly> {
        if exp < 1 {
            return Err(Error::InvalidParameter {
                name: "exp",
                requirement: "at least 1",
                value: exp as f64,
            });
        }
        let base = JetPoly::from_sparse(p, order)?;
        let shift = JetPoly::assemble(
            q.nvars(),
            order,
            q.terms()
                .map(|(e, &c)| (e.clone(), Jet::monomial(c, exp, order)))
                .collect(),
        );
        base.try_add(&shift)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Jet)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &MultiIndex) -> Jet {
        self.terms
            .get(e)
            .cloned()
            .unwrap_or_else(|| Jet::zero(self.order))
    }

    pub fn truncate(&self, order: i32) -> JetPoly {
        JetPoly::assemble(self.nvars, order.min(self.order), self.terms.clone())
    }

    fn check_same_space(&self, other: &JetPoly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &JetPoly) -> Result<JetPoly> {
        self.check_same_space(other)?;
        let order = self.order.min(other.order);
        let mut terms = self.terms.clone();
        for (e, j) in &other.terms {
            let sum = match terms.get(e) {
                Some(a) => a + j,
                None => j.clone(),
            };
            terms.insert(e.clone(), sum);
        }
        Ok(JetPoly::assemble(self.nvars, order, terms))
    }

    pub fn try_mul(&self, other: &JetPoly) -> Result<JetPoly> {
        self.check_same_space(other)?;
        let order = self.order.min(other.order);
        let mut terms: BTreeMap<MultiIndex, Jet> = BTreeMap::new();
        for (ea, a) in &self.terms {
            for (eb, b) in &other.terms {
                let e = ea.product(eb);
                let prod = a * b;
                let sum = match terms.get(&e) {
                    Some(acc) => acc + &prod,
                    None => prod,
                };
                terms.insert(e, sum);
            }
        }
        Ok(JetPoly::assemble(self.nvars, order, terms))
    }

    /// `g(w)` at a point with jet coordinates.
    pub fn eval(&self, w: &[Jet]) -> Result<Jet> {
        if w.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: w.len(),
            });
        }
        let order = w.iter().map(Jet::order).fold(self.order, i32::min);
        let mut acc = Jet::zero(order);
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (&ej, wj) in e.exps().iter().zip(w) {
                if ej > 0 {
                    m = &m * &wj.powu(ej);
                }
            }
            acc = &acc + &m;
        }
        Ok(acc)
    }

    /// Coefficientwise standard part `°g`.
    pub fn st_poly(&self) -> Result<SparsePoly> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, j) in &self.terms {
            match j.standard_part() {
                StandardPart::Finite(c) => terms.push((e.clone(), c)),
                StandardPart::Infinite => return Err(Error::InfiniteJet),
            }
        }
        SparsePoly::from_terms(self.nvars, terms)
    }

    /// Dense jet coefficients `b_0, ..., b_n` of a univariate polynomial.
    pub fn uni_coeffs(&self) -> Result<Vec<Jet>> {
        if self.nvars != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.nvars,
            });
        }
        let deg = self.terms.keys().map(|e| e.exps()[0]).max().unwrap_or(0) as usize;
        let mut out = vec![Jet::zero(self.order); deg + 1];
        for (e, j) in &self.terms {
            out[e.exps()[0] as usize] = j.clone();
        }
        Ok(out)
    }

    /// Univariate jet polynomial in `t_axis` with every other coordinate
    /// fixed to the jets in `w` (`w[axis]` is ignored).
    pub fn fiber(&self, axis: usize, w: &[Jet]) -> Result<JetPoly> {
        if w.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: w.len(),
            });
        }
        let order = w.iter().map(Jet::order).fold(self.order, i32::min);
        let mut terms: BTreeMap<MultiIndex, Jet> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (j, (&ej, wj)) in e.exps().iter().zip(w).enumerate() {
                if j != axis && ej > 0 {
                    m = &m * &wj.powu(ej);
                }
            }
            let key = MultiIndex::new(vec![e.exps()[axis]]);
            let sum = match terms.get(&key) {
                Some(acc) => acc + &m,
                None => m,
            };
            terms.insert(key, sum);
        }
        Ok(JetPoly::assemble(1, order, terms))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("jet polynomial serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `g ≈ h` for jet polynomials: equal standard parts coefficientwise.
pub fn poly_approx(g: &JetPoly, h: &JetPoly) -> Result<bool> {
    Ok(coeff_sup_distance(&g.st_poly()?, &h.st_poly()?)? <= APPROX_TOL)
}

/// Coefficientwise standard part of a jet polynomial.
pub fn st_poly(g: &JetPoly) -> Result<SparsePoly> {
    g.st_poly()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetTermJson {
    exps: Vec<u32>,
    jet: Jet,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetPolyJson {
    nvars: usize,
    order: i32,
    terms: Vec<JetTermJson>,
}

impl TryFrom<JetPolyJson> for JetPoly {
    type Error = Error;
    fn try_from(j: JetPolyJson) -> Result<JetPoly> {
        JetPoly::from_terms(
            j.nvars,
            j.order,
            j.terms.into_iter().map(|t| (t.exps, t.jet)),
        )
    }
}

impl From<JetPoly> for JetPolyJson {
    fn from(p: JetPoly) -> Self {
        JetPolyJson {
            nvars: p.nvars,
            order: p.order,
            terms: p
                .terms
                .into_iter()
                .map(|(e, jet)| JetTermJson {
                    exps: e.exps().to_vec(),
                    jet,
                })
                .collect(),
        }
    }
}

fn horner_jets(coeffs: &[Jet], w: &Jet) -> Jet {
    let order = coeffs.iter().map(Jet::order).fold(w.order(), i32::min);
    coeffs
        .iter()
        .rev()
        .fold(Jet::zero(order), |acc, c| &(&acc * w) + c)
}

/// Largest `|coefficient|` of `g(ω)` through `ε^K`.
pub fn lift_residual(g: &JetPoly, omega: &Jet) -> Result<f64> {
    let r = horner_jets(&g.uni_coeffs()?, omega);
    Ok((r.min_exp().min(0)..=r.order())
        .map(|k| r.coeff(k).norm())
        .fold(0.0, f64::max))
}

/// Jet root `ω = ζ + c_1 ε + ... + c_K ε^K` of `g` above the simple root `ζ`
/// of `f = °g`. Each `c_k` cancels the `ε^k` coefficient of `g(ω)` using
/// `f'(ζ)` as the unit. The result's order is `min(order, g.order())`.
pub fn hensel_lift_root(f: &UniPoly, zeta: Complex, g: &JetPoly, order: i32) -> Result<Jet> {
    check_order(order)?;
    let g = g.truncate(order);
    let order = g.order();
    let distance = coeff_sup_distance(&g.st_poly()?, &f.to_sparse())?;
    if distance > APPROX_TOL {
        return Err(Error::StandardPartMismatch { distance });
    }
    let derivative = f.eval_derivative(zeta);
    if derivative.norm() < SIMPLE_ROOT_THRESHOLD {
        return Err(Error::MultipleRoot {
            root: zeta,
            derivative: derivative.norm(),
        });
    }
    let residual = f.relative_residual(zeta);
    if residual > ROOT_RESIDUAL_TOL {
        return Err(Error::InvalidParameter {
            name: "zeta",
            requirement: "a root of f",
            value: residual,
        });
    }

    let coeffs = g.uni_coeffs()?;
    let mut omega = Jet::constant(zeta, order);
    for k in 1..=order {
        let r = horner_jets(&coeffs, &omega);
        let ck = -r.coeff(k) / derivative;
        omega = &omega + &Jet::monomial(ck, k, order);
    }
    Ok(omega)
}

/// A standard root paired with its jet lift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedRoot {
    pub root: Root,
    pub lift: Jet,
    /// Largest coefficient of `g(lift)` through the truncation order.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetAlignment {
    pub order: i32,
    pub pairs: Vec<LiftedRoot>,
    /// Roots that could not be lifted (multiplicity above one).
    pub skipped: Vec<Root>,
}

/// Pairs every simple root `ζ` of `f` with a jet root `ω` of `g` satisfying
/// `°ω = ζ`. Multiple roots are reported with their multiplicities.
pub fn jet_align_roots(f: &UniPoly, g: &JetPoly, order: i32) -> Result<JetAlignment> {
    check_order(order)?;
    let roots = cluster_multiplicities(&find_roots(f, DEFAULT_TOL)?, DEFAULT_CLUSTER_RADIUS)?;
    let g = g.truncate(order);
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for root in roots.roots {
        if root.multiplicity > 1 {
            skipped.push(root);
            continue;
        }
        match hensel_lift_root(f, root.value(), &g, order) {
            Ok(lift) => {
                let residual = lift_residual(&g, &lift)?;
                pairs.push(LiftedRoot {
                    root,
                    lift,
                    residual,
                });
            }
            Err(Error::MultipleRoot { .. }) => skipped.push(root),
            Err(e) => return Err(e),
        }
    }
    Ok(JetAlignment {
        order: g.order(),
        pairs,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn series(cs: &[f64]) -> Jet {
        Jet::from_series(
            &cs.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>(),
            DEFAULT_ORDER,
        )
        .unwrap()
    }

    fn uni_jet_poly(coeffs: Vec<Jet>) -> JetPoly {
        JetPoly::from_terms(
            1,
            DEFAULT_ORDER,
            coeffs
                .into_iter()
                .enumerate()
                .map(|(i, j)| (vec![i as u32], j)),
        )
        .unwrap()
    }

    /// Generalized binomial coefficient `(1/2 choose k)`.
    fn half_binomial(k: usize) -> f64 {
        (0..k).fold(1.0, |acc, j| acc * (0.5 - j as f64) / (j as f64 + 1.0))
    }

    #[test]
    fn arithmetic_examples() {
        let p = jet_arith(&series(&[2.0, 1.0]), &series(&[3.0, -1.0]), JetOp::Mul).unwrap();
        assert_eq!(p, series(&[6.0, 1.0, -1.0]));

        let inv = jet_arith(&series(&[1.0]), &Jet::epsilon(DEFAULT_ORDER), JetOp::Div).unwrap();
        assert_eq!(inv.min_exp(), -1);
        assert_eq!(inv, Jet::monomial(c(1.0, 0.0), -1, DEFAULT_ORDER));

        let a = series(&[1.5, -2.0, 0.25]);
        assert_eq!(
            jet_arith(&a, &Jet::zero(DEFAULT_ORDER), JetOp::Add).unwrap(),
            a
        );
        assert_eq!(
            jet_arith(&a, &a, JetOp::Sub).unwrap(),
            Jet::zero(DEFAULT_ORDER)
        );
        assert!(matches!(
            jet_arith(&a, &Jet::zero(DEFAULT_ORDER), JetOp::Div),
            Err(Error::ZeroDivision)
        ));
    }

    #[test]
    fn truncation_and_mixed_orders() {
        let long = Jet::from_series(&[c(1.0, 0.0); 10], 8).unwrap();
        assert_eq!(long.coeffs().len(), 9);
        let short = Jet::epsilon(3);
        let prod = &long * &short;
        assert_eq!(prod.order(), 3);
        assert_eq!(prod.coeff(3), c(1.0, 0.0));
        assert_eq!(prod.coeff(4), c(0.0, 0.0));
        assert!(Jet::new(0, 0, vec![]).is_err());
        assert!(Jet::new(0, 33, vec![]).is_err());
    }

    #[test]
    fn division_by_unit_series() {
        // 1 / (1 - ε) = 1 + ε + ε^2 + ...
        let q = series(&[1.0]).checked_div(&series(&[1.0, -1.0])).unwrap();
        assert_eq!(q, series(&[1.0; 9]));
        // (ε + ε^2) / ε^2 = ε^-1 + 1
        let a = Jet::new(1, 8, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let b = Jet::monomial(c(1.0, 0.0), 2, 8);
        let q = a.checked_div(&b).unwrap();
        assert_eq!(q.min_exp(), -1);
        assert_eq!(q.coeff(-1), c(1.0, 0.0));
        assert_eq!(q.coeff(0), c(1.0, 0.0));
    }

    #[test]
    fn standard_part_examples() {
        assert_eq!(
            series(&[3.0, 5.0, -1.0]).standard_part(),
            StandardPart::Finite(c(3.0, 0.0))
        );
        assert_eq!(
            Jet::epsilon(8).standard_part(),
            StandardPart::Finite(c(0.0, 0.0))
        );
        let inv = series(&[1.0]).checked_div(&Jet::epsilon(8)).unwrap();
        assert_eq!(standard_part(&inv), StandardPart::Infinite);
        assert!(Jet::epsilon(8).is_infinitesimal());
        assert!(!inv.is_finite());
    }

    #[test]
    fn approx_examples() {
        let one_eps = series(&[1.0, 1.0]);
        let one_eps2 = series(&[1.0, 0.0, 3.0]);
        assert!(approx(&one_eps, &one_eps2).unwrap());
        assert!(!approx(&series(&[1.0]), &series(&[2.0])).unwrap());
        assert!(approx(&Jet::epsilon(8), &Jet::epsilon(8).powu(2)).unwrap());
        let inf = Jet::monomial(c(1.0, 0.0), -1, 8);
        assert!(matches!(approx(&inf, &one_eps), Err(Error::InfiniteJet)));
    }

    #[test]
    fn st_poly_examples() {
        let g = uni_jet_poly(vec![
            series(&[-2.0, 0.0, 0.0, 1.0]),
            Jet::zero(8),
            series(&[1.0, 1.0]),
        ]);
        assert_eq!(
            st_poly(&g).unwrap(),
            SparsePoly::univariate(&[c(-2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap()
        );

        let f = SparsePoly::from_terms(
            2,
            vec![(vec![1, 1], c(1.0, 0.0)), (vec![0, 0], c(-1.0, 0.0))],
        )
        .unwrap();
        assert_eq!(JetPoly::from_sparse(&f, 8).unwrap().st_poly().unwrap(), f);

        let eps_t = uni_jet_poly(vec![Jet::zero(8), Jet::epsilon(8)]);
        assert!(eps_t.st_poly().unwrap().is_zero());

        let bad = uni_jet_poly(vec![Jet::monomial(c(1.0, 0.0), -2, 8)]);
        assert!(matches!(bad.st_poly(), Err(Error::InfiniteJet)));
    }

    #[test]
    fn hyperbola_point_at_infinity() {
        // (ε, 1/ε) is a zero of t1 t2 - 1 with one infinite coordinate
        let g = JetPoly::from_sparse(
            &SparsePoly::from_terms(
                2,
                vec![(vec![1, 1], c(1.0, 0.0)), (vec![0, 0], c(-1.0, 0.0))],
            )
            .unwrap(),
            8,
        )
        .unwrap();
        let e = Jet::epsilon(8);
        let inv = series(&[1.0]).checked_div(&e).unwrap();
        let value = g.eval(&[e.clone(), inv.clone()]).unwrap();
        assert!(value.is_zero());
        assert_eq!(standard_part(&inv), StandardPart::Infinite);
    }

    fn sqrt_problem() -> (UniPoly, JetPoly) {
        let f = UniPoly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let g = uni_jet_poly(vec![series(&[-1.0, -1.0]), Jet::zero(8), series(&[1.0])]);
        (f, g)
    }

    #[test]
    fn hensel_lift_matches_binomial_series() {
        let (f, g) = sqrt_problem();
        let omega = hensel_lift_root(&f, c(1.0, 0.0), &g, 8).unwrap();
        for k in 0..=8 {
            let want = half_binomial(k as usize);
            assert!((omega.coeff(k) - c(want, 0.0)).norm() <= 1e-10, "k = {k}");
        }
        assert!(lift_residual(&g, &omega).unwrap() <= 1e-9);
        assert_eq!(omega.standard_part(), StandardPart::Finite(c(1.0, 0.0)));
    }

    #[test]
    fn hensel_linear_and_multiple_root() {
        let a = c(0.3, -1.2);
        let f = UniPoly::new(vec![-a, c(1.0, 0.0)]).unwrap();
        let g = uni_jet_poly(vec![
            -Jet::from_series(&[a, c(1.0, 0.0)], 8).unwrap(),
            series(&[1.0]),
        ]);
        let omega = hensel_lift_root(&f, a, &g, 8).unwrap();
        assert_eq!(omega, Jet::from_series(&[a, c(1.0, 0.0)], 8).unwrap());

        let double = UniPoly::from_real(&[1.0, -2.0, 1.0]).unwrap();
        let gd = JetPoly::from_sparse(&double.to_sparse(), 8).unwrap();
        assert!(matches!(
            hensel_lift_root(&double, c(1.0, 0.0), &gd, 8),
            Err(Error::MultipleRoot { .. })
        ));
    }

    #[test]
    fn hensel_rejects_wrong_standard_part() {
        let (f, _) = sqrt_problem();
        let other = uni_jet_poly(vec![series(&[-2.0]), Jet::zero(8), series(&[1.0])]);
        assert!(matches!(
            hensel_lift_root(&f, c(1.0, 0.0), &other, 8),
            Err(Error::StandardPartMismatch { .. })
        ));
    }

    #[test]
    fn jet_alignment_examples() {
        let (f, g) = sqrt_problem();
        let al = jet_align_roots(&f, &g, 8).unwrap();
        assert!(al.skipped.is_empty());
        assert_eq!(al.pairs.len(), 2);
        let neg = al.pairs.iter().find(|p| p.root.re < 0.0).unwrap();
        let pos = al.pairs.iter().find(|p| p.root.re > 0.0).unwrap();
        for k in 0..=8 {
            assert!((neg.lift.coeff(k) + pos.lift.coeff(k)).norm() <= 1e-10);
        }
        assert!(al.pairs.iter().all(|p| p.residual <= 1e-9));

        let t = UniPoly::from_real(&[0.0, 1.0]).unwrap();
        let g = uni_jet_poly(vec![-Jet::epsilon(8), series(&[1.0])]);
        let al = jet_align_roots(&t, &g, 8).unwrap();
        assert_eq!(al.pairs.len(), 1);
        assert_eq!(al.pairs[0].lift, Jet::epsilon(8));

        // (t - 1)^2 (t + 2) = t^3 - 3t + 2
        let f = UniPoly::from_real(&[2.0, -3.0, 0.0, 1.0]).unwrap();
        let g = JetPoly::deformation(&f.to_sparse(), &SparsePoly::constant(1, c(1.0, 0.0)), 1, 8)
            .unwrap();
        let al = jet_align_roots(&f, &g, 8).unwrap();
        assert_eq!(al.pairs.len(), 1);
        assert!((al.pairs[0].root.value() - c(-2.0, 0.0)).norm() < 1e-12);
        assert_eq!(al.skipped.len(), 1);
        assert_eq!(al.skipped[0].multiplicity, 2);
        assert!((al.skipped[0].value() - c(1.0, 0.0)).norm() < 1e-6);
        // f'(-2) = 9, so the first-order shift is -1/9
        assert!((al.pairs[0].lift.coeff(1) - c(-1.0 / 9.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn json_formats() {
        let j = Jet::new(-1, 4, vec![c(1.0, 0.5), c(0.0, 0.0), c(-2.0, 0.0)]).unwrap();
        let s = serde_json::to_string(&j).unwrap();
        assert_eq!(
            s,
            r#"{"min_exp":-1,"order":4,"coeffs":[{"re":1.0,"im":0.5},{"re":0.0,"im":0.0},{"re":-2.0,"im":0.0}]}"#
        );
        assert_eq!(serde_json::from_str::<Jet>(&s).unwrap(), j);
        let (_, g) = sqrt_problem();
        assert_eq!(JetPoly::from_json(&g.to_json()).unwrap(), g);
    }

    fn arb_complex() -> impl Strategy<Value = Complex> {
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c(a, b))
    }

    fn arb_finite_jet() -> impl Strategy<Value = Jet> {
        (0i32..3, prop::collection::vec(arb_complex(), 0..9))
            .prop_map(|(m, cs)| Jet::new(m, DEFAULT_ORDER, cs).unwrap())
    }

    fn arb_jet_poly() -> impl Strategy<Value = JetPoly> {
        prop::collection::btree_map(prop::collection::vec(0u32..3, 2), arb_finite_jet(), 0..5)
            .prop_map(|m| JetPoly::from_terms(2, DEFAULT_ORDER, m).unwrap())
    }

    fn st(j: &Jet) -> Complex {
        j.standard_part().finite().unwrap()
    }

    fn poly_close(a: &SparsePoly, b: &SparsePoly) -> bool {
        coeff_sup_distance(a, b).unwrap() <= 1e-12
    }

    proptest! {
        #[test]
        fn standard_part_is_a_ring_homomorphism(a in arb_finite_jet(), b in arb_finite_jet()) {
            prop_assert!((st(&(&a + &b)) - (st(&a) + st(&b))).norm() <= 1e-12);
            prop_assert!((st(&(&a * &b)) - st(&a) * st(&b)).norm() <= 1e-12);
        }

        #[test]
        fn st_poly_is_a_ring_homomorphism(g in arb_jet_poly(), h in arb_jet_poly()) {
            let (sg, sh) = (g.st_poly().unwrap(), h.st_poly().unwrap());
            let sum = g.try_add(&h).unwrap().st_poly().unwrap();
            prop_assert!(poly_close(&sum, &sg.try_add_with(&sh, 0.0).unwrap()));
            let prod = g.try_mul(&h).unwrap().st_poly().unwrap();
            prop_assert!(poly_close(&prod, &sg.try_mul_with(&sh, 0.0).unwrap()));
        }

        #[test]
        fn approx_iff_equal_standard_parts(g in arb_jet_poly(), h in arb_jet_poly()) {
            let coefficientwise = g
                .terms()
                .map(|(e, _)| e)
                .chain(h.terms().map(|(e, _)| e))
                .all(|e| approx(&g.coeff(e), &h.coeff(e)).unwrap());
            prop_assert_eq!(poly_approx(&g, &h).unwrap(), coefficientwise);
        }

        #[test]
        fn deformations_are_compatible(
            g1 in arb_jet_poly(),
            g2 in arb_jet_poly(),
            d1 in arb_jet_poly(),
            d2 in arb_jet_poly(),
        ) {
            // h_i = g_i + ε d_i is an infinitesimal deformation of g_i
            let eps = JetPoly::from_terms(2, DEFAULT_ORDER, vec![(vec![0, 0], Jet::epsilon(DEFAULT_ORDER))]).unwrap();
            let h1 = g1.try_add(&eps.try_mul(&d1).unwrap()).unwrap();
            let h2 = g2.try_add(&eps.try_mul(&d2).unwrap()).unwrap();
            prop_assert!(poly_approx(&g1, &h1).unwrap());
            prop_assert!(poly_approx(&g1.try_add(&g2).unwrap(), &h1.try_add(&h2).unwrap()).unwrap());
            prop_assert!(poly_approx(&g1.try_mul(&g2).unwrap(), &h1.try_mul(&h2).unwrap()).unwrap());
        }

        #[test]
        fn division_inverts_multiplication(a in arb_finite_jet(), b0 in arb_complex(), rest in prop::collection::vec(arb_complex(), 0..8)) {
            prop_assume!(b0.norm() > 0.5);
            let mut bc = vec![b0];
            bc.extend(rest);
            let b = Jet::from_series(&bc, DEFAULT_ORDER).unwrap();
            let q = a.checked_div(&b).unwrap();
            let back = &q * &b;
            for k in 0..=DEFAULT_ORDER {
                prop_assert!((back.coeff(k) - a.coeff(k)).norm() <= 1e-9 * (1.0 + a.coeff(k).norm()));
            }
        }

        #[test]
        fn lifting_is_consistent_under_truncation(
            roots in prop::collection::vec(arb_complex(), 1..5),
            shift in prop::collection::vec(arb_complex(), 1..6),
            low in 1i32..8,
        ) {
            let f = UniPoly::from_roots(c(1.0, 0.0), &roots).unwrap();
            let zeta = roots[0];
            prop_assume!(f.eval_derivative(zeta).norm() >= 0.1);
            let q = SparsePoly::univariate(&shift).unwrap();
            let g = JetPoly::deformation(&f.to_sparse(), &q, 1, 8).unwrap();
            let zeta = {
                // polish against rounding in the expanded coefficients
                let mut z = zeta;
                for _ in 0..3 { z -= f.eval(z) / f.eval_derivative(z); }
                z
            };
            let full = hensel_lift_root(&f, zeta, &g, 8).unwrap();
            let short = hensel_lift_root(&f, zeta, &g, low).unwrap();
            prop_assert!(lift_residual(&g, &full).unwrap() <= 1e-9 * (1.0 + full.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)).powi(4));
            let cut = full.truncate(low);
            for k in 0..=low {
                prop_assert!((cut.coeff(k) - short.coeff(k)).norm() <= 1e-10 * (1.0 + full.coeff(k).norm()));
            }
        }
    }
}
