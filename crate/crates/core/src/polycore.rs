//! Sparse multivariate complex polynomials.
//!
//! A [`SparsePoly`] stores its support as a sorted map from exponent tuples to
//! nonzero coefficients. Iteration, evaluation and serialization all follow the
//! lexicographic order of the exponent tuples, so floating-point sums are
//! reproducible from run to run.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Magnitude below which coefficients produced by arithmetic are dropped.
pub const DEFAULT_PRUNE: f64 = 1e-14;

/// Exponent tuple `(i_1, ..., i_n)` of a monomial `t_1^i_1 ... t_n^i_n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        MultiIndex(exps)
    }

    pub fn zeros(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    /// The exponent of the single variable `t_var`.
    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[var] = 1;
        MultiIndex(exps)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|I| = i_1 + ... + i_n`.
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Exponent tuple of the product of two monomials.
    pub fn product(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `z^I`, with `z^0 = 1` for every coordinate including zero.
    pub fn monomial(&self, z: &[Complex]) -> Complex {
        self.0
            .iter()
            .zip(z)
            .fold(Complex::new(1.0, 0.0), |acc, (&e, &zi)| acc * zi.powu(e))
    }

    /// This index with variable `var` removed.
    pub(crate) fn without(&self, var: usize) -> MultiIndex {
        let mut exps = self.0.clone();
        exps.remove(var);
        MultiIndex(exps)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(exps: Vec<u32>) -> Self {
        MultiIndex(exps)
    }
}

/// A point of complex n-space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<ComplexJson>", into = "Vec<ComplexJson>")]
pub struct Point(Vec<Complex>);

impl Point {
    pub fn new(coords: Vec<Complex>) -> Self {
        Point(coords)
    }

    pub fn real(coords: &[f64]) -> Self {
        Point(coords.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn coords(&self) -> &[Complex] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `||z||_inf = max |z_i|`.
    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl From<Vec<Complex>> for Point {
    fn from(coords: Vec<Complex>) -> Self {
        Point(coords)
    }
}

/// `f(t) = sum_{I in support} a_I t^I` over complex coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct SparsePoly {
    nvars: usize,
    terms: BTreeMap<MultiIndex, Complex>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars > 0, "a polynomial needs at least one variable");
        SparsePoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex) -> Self {
        let mut p = SparsePoly::zero(nvars);
        if c != Complex::new(0.0, 0.0) {
            p.terms.insert(MultiIndex::zeros(nvars), c);
        }
        p
    }

    /// The coordinate function `t_var` (zero-based).
    pub fn var(nvars: usize, var: usize) -> Self {
        assert!(var < nvars);
        let mut p = SparsePoly::zero(nvars);
        p.terms
            .insert(MultiIndex::unit(nvars, var), Complex::new(1.0, 0.0));
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs.
    ///
    /// Exact zero coefficients are dropped. Duplicate exponent tuples,
    /// tuples of the wrong length and non-finite coefficients are rejected.
    pub fn from_terms<I, E>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (E, Complex)>,
        E: Into<MultiIndex>,
    {
        if nvars == 0 {
            return Err(Error::InvalidParameter {
                name: "nvars",
                requirement: "at least 1",
                value: 0.0,
            });
        }
        let mut map = BTreeMap::new();
        for (exps, c) in terms {
            let exps = exps.into();
            if exps.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: exps.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            if map.contains_key(&exps) {
                return Err(Error::DuplicateExponent(exps.0));
            }
            map.insert(exps, c);
        }
        map.retain(|_, c| *c != Complex::new(0.0, 0.0));
        Ok(SparsePoly { nvars, terms: map })
    }

    /// Univariate polynomial from dense coefficients `c_0, c_1, ...`.
    pub fn univariate(coeffs: &[Complex]) -> Result<Self> {
        SparsePoly::from_terms(
            1,
            coeffs.iter().enumerate().map(|(i, &c)| (vec![i as u32], c)),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &MultiIndex> {
        self.terms.keys()
    }

    pub fn coeff(&self, exps: &MultiIndex) -> Complex {
        self.terms.get(exps).copied().unwrap_or_default()
    }

    /// Largest coefficient magnitude.
    pub fn coeff_norm_inf(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Maximum total degree over the support, 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(MultiIndex::total_degree)
            .max()
            .unwrap_or(0)
    }

    /// Degree in the single variable `t_var`.
    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e.0[var]).max().unwrap_or(0)
    }

    fn check_point(&self, z: &[Complex]) -> Result<()> {
        if z.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: z.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, z: &Point) -> Result<Complex> {
        self.eval_slice(z.coords())
    }

    pub fn eval_slice(&self, z: &[Complex]) -> Result<Complex> {
        self.check_point(z)?;
        Ok(self
            .terms
            .iter()
            .fold(Complex::default(), |acc, (e, &a)| acc + a * e.monomial(z)))
    }

    /// `(d, |support|)` where `d` is the maximum total degree.
    pub fn degree_and_support(&self) -> Result<(u32, usize)> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok((self.total_degree(), self.support_size()))
    }

    fn check_same_space(&self, other: &SparsePoly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.try_add_with(other, DEFAULT_PRUNE)
    }

    pub fn try_add_with(&self, other: &SparsePoly, prune: f64) -> Result<SparsePoly> {
        self.check_same_space(other)?;
        let mut terms = self.terms.clone();
        for (e, &c) in &other.terms {
            *terms.entry(e.clone()).or_default() += c;
        }
        Ok(SparsePoly {
            nvars: self.nvars,
            terms,
        }
        .pruned(prune))
    }

    pub fn try_sub(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.try_add(&other.scale(Complex::new(-1.0, 0.0)))
    }

    pub fn try_mul(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.try_mul_with(other, DEFAULT_PRUNE)
    }

    pub fn try_mul_with(&self, other: &SparsePoly, prune: f64) -> Result<SparsePoly> {
        self.check_same_space(other)?;
        let mut terms: BTreeMap<MultiIndex, Complex> = BTreeMap::new();
        for (ea, &a) in &self.terms {
            for (eb, &b) in &other.terms {
                *terms.entry(ea.product(eb)).or_default() += a * b;
            }
        }
        Ok(SparsePoly {
            nvars: self.nvars,
            terms,
        }
        .pruned(prune))
    }

    pub fn scale(&self, s: Complex) -> SparsePoly {
        SparsePoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| (e.clone(), c * s))
                .filter(|(_, c)| *c != Complex::default())
                .collect(),
        }
    }

    /// Drops every coefficient with magnitude below `threshold`.
    pub fn pruned(mut self, threshold: f64) -> SparsePoly {
        self.terms
            .retain(|_, c| c.norm() >= threshold && *c != Complex::default());
        self
    }

    /// Substitutes `t_var = value`, removing that variable.
    pub fn substitute(&self, var: usize, value: Complex) -> SparsePoly {
        assert!(self.nvars >= 2 && var < self.nvars);
        let mut terms: BTreeMap<MultiIndex, Complex> = BTreeMap::new();
        for (e, &c) in &self.terms {
            *terms.entry(e.without(var)).or_default() += c * value.powu(e.0[var]);
        }
        terms.retain(|_, c| *c != Complex::default());
        SparsePoly {
            nvars: self.nvars - 1,
            terms,
        }
    }

    /// Dense coefficients (constant first) of the univariate polynomial in
    /// `t_axis` obtained by fixing every other coordinate to `z`.
    /// The entry `z[axis]` is ignored.
    pub fn fiber_coeffs(&self, axis: usize, z: &[Complex]) -> Result<Vec<Complex>> {
        self.check_point(z)?;
        let deg = self.degree_in(axis) as usize;
        let mut coeffs = vec![Complex::default(); deg + 1];
        for (e, &c) in &self.terms {
            let mut m = c;
            for (j, (&ej, &zj)) in e.0.iter().zip(z).enumerate() {
                if j != axis {
                    m *= zj.powu(ej);
                }
            }
            coeffs[e.0[axis] as usize] += m;
        }
        Ok(coeffs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (j, &ej) in e.0.iter().enumerate() {
                match ej {
                    0 => {}
                    1 => write!(f, "*t{}", j + 1)?,
                    _ => write!(f, "*t{}^{}", j + 1, ej)?,
                }
            }
        }
        Ok(())
    }
}

/// Finite family of polynomials on a common ambient space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemJson", into = "SystemJson")]
pub struct PolySystem {
    polys: Vec<SparsePoly>,
}

impl PolySystem {
    pub fn new(polys: Vec<SparsePoly>) -> Result<Self> {
        let first = polys.first().ok_or(Error::Empty("polynomial system"))?;
        let n = first.nvars();
        if let Some(bad) = polys.iter().find(|p| p.nvars() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.nvars(),
            });
        }
        Ok(PolySystem { polys })
    }

    pub fn polys(&self) -> &[SparsePoly] {
        &self.polys
    }

    pub fn nvars(&self) -> usize {
        self.polys[0].nvars()
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }
}

/// `max_I |b_I - a_I|` over the union of both supports, absent terms read as 0.
pub fn coeff_sup_distance(p: &SparsePoly, q: &SparsePoly) -> Result<f64> {
    Ok(max_coeff_deviation(p, q)?.map_or(0.0, |(_, d)| d))
}

/// The exponent tuple where `p` and `q` differ most, with that distance.
/// `None` when both polynomials are zero.
pub fn max_coeff_deviation(p: &SparsePoly, q: &SparsePoly) -> Result<Option<(MultiIndex, f64)>> {
    p.check_same_space(q)?;
    let mut best: Option<(MultiIndex, f64)> = None;
    for e in union_support(p, q) {
        let d = (q.coeff(e) - p.coeff(e)).norm();
        if best.as_ref().is_none_or(|(_, b)| d > *b) {
            best = Some((e.clone(), d));
        }
    }
    Ok(best)
}

/// Sorted union of the supports of `p` and `q`.
pub fn union_support<'a>(p: &'a SparsePoly, q: &'a SparsePoly) -> Vec<&'a MultiIndex> {
    let mut all: Vec<&MultiIndex> = p.terms.keys().chain(q.terms.keys()).collect();
    all.sort();
    all.dedup();
    all
}

/// Whether every coefficient of `q` lies strictly within `delta` of `p`'s.
pub fn is_delta_deformation(p: &SparsePoly, q: &SparsePoly, delta: f64) -> Result<bool> {
    Error::positive("delta", delta)?;
    Ok(coeff_sup_distance(p, q)? < delta)
}

/// Uniform sample from the closed unit disc.
pub fn unit_disc_sample<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    let r: f64 = rng.gen::<f64>().sqrt();
    let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    Complex::from_polar(r, theta)
}

/// Strict `delta`-deformation of `p` on the same support.
///
/// Each coefficient moves by a uniform sample from the disc of radius
/// `delta * (1 - 1e-9)`. The result depends only on `(p, delta, seed)`.
pub fn random_deformation(p: &SparsePoly, delta: f64, seed: u64) -> Result<SparsePoly> {
    Error::positive("delta", delta)?;
    let radius = delta * (1.0 - 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = p
        .terms
        .iter()
        .map(|(e, &a)| (e.clone(), a + unit_disc_sample(&mut rng) * radius))
        .filter(|(_, b)| *b != Complex::default())
        .collect();
    Ok(SparsePoly {
        nvars: p.nvars,
        terms,
    })
}

/// `{"re": .., "im": ..}` as used in every JSON format.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex> for ComplexJson {
    fn from(c: Complex) -> Self {
        ComplexJson { re: c.re, im: c.im }
    }
}

impl From<ComplexJson> for Complex {
    fn from(c: ComplexJson) -> Self {
        Complex::new(c.re, c.im)
    }
}

impl From<Vec<ComplexJson>> for Point {
    fn from(v: Vec<ComplexJson>) -> Self {
        Point(v.into_iter().map(Complex::from).collect())
    }
}

impl From<Point> for Vec<ComplexJson> {
    fn from(p: Point) -> Self {
        p.0.into_iter().map(ComplexJson::from).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    exps: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyJson {
    nvars: usize,
    terms: Vec<TermJson>,
}

impl TryFrom<PolyJson> for SparsePoly {
    type Error = Error;

    fn try_from(j: PolyJson) -> Result<Self> {
        SparsePoly::from_terms(
            j.nvars,
            j.terms
                .into_iter()
                .map(|t| (t.exps, Complex::new(t.re, t.im))),
        )
    }
}

impl From<SparsePoly> for PolyJson {
    fn from(p: SparsePoly) -> Self {
        PolyJson {
            nvars: p.nvars,
            terms: p
                .terms
                .into_iter()
                .map(|(e, c)| TermJson {
                    exps: e.0,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemJson {
    polys: Vec<SparsePoly>,
}

impl TryFrom<SystemJson> for PolySystem {
    type Error = Error;

    fn try_from(j: SystemJson) -> Result<Self> {
        PolySystem::new(j.polys)
    }
}

impl From<PolySystem> for SystemJson {
    fn from(s: PolySystem) -> Self {
        SystemJson { polys: s.polys }
    }
}
