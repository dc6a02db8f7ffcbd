//! All roots of a univariate complex polynomial.
//!
//! Roots come from Aberth-Ehrlich simultaneous iteration started on a rotated
//! circle of Cauchy-bound radius, followed by a guarded Newton polish. A root
//! is accepted once its residual is at the rounding level of Horner's rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{Complex, SparsePoly};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_CLUSTER_RADIUS: f64 = 1e-6;
pub const MAX_SWEEPS: usize = 200;
pub const MAX_DEGREE: usize = 64;

// Offset of the starting circle, in radians (1 / golden ratio).
const START_ROTATION: f64 = 0.618_033_988_749_894_9;
const NEWTON_POLISH_STEPS: usize = 3;

/// `a_0 + a_1 t + ... + a_n t^n` with `a_n != 0` and `n >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SparsePoly", into = "SparsePoly")]
pub struct UniPoly {
    coeffs: Vec<Complex>,
}

impl UniPoly {
    /// Trailing exact zeros are trimmed before the degree is checked.
    pub fn new(mut coeffs: Vec<Complex>) -> Result<Self> {
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        while coeffs.last() == Some(&Complex::default()) {
            coeffs.pop();
        }
        match coeffs.len() {
            0 => Err(Error::ZeroPolynomial),
            1 => Err(Error::ConstantPolynomial),
            n if n - 1 > MAX_DEGREE => Err(Error::InvalidParameter {
                name: "degree",
                requirement: "at most 64",
                value: (n - 1) as f64,
            }),
            _ => Ok(UniPoly { coeffs }),
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        UniPoly::new(coeffs.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    /// `lead * prod (t - r)`.
    pub fn from_roots(lead: Complex, roots: &[Complex]) -> Result<Self> {
        let mut coeffs = vec![lead];
        for &r in roots {
            let mut next = vec![Complex::default(); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        UniPoly::new(coeffs)
    }

    pub fn from_sparse(p: &SparsePoly) -> Result<Self> {
        if p.nvars() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: p.nvars(),
            });
        }
        let deg = p.degree_in(0) as usize;
        let mut coeffs = vec![Complex::default(); deg + 1];
        for (e, &c) in p.terms() {
            coeffs[e.exps()[0] as usize] = c;
        }
        UniPoly::new(coeffs)
    }

    pub fn to_sparse(&self) -> SparsePoly {
        SparsePoly::univariate(&self.coeffs).expect("valid univariate coefficients")
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex {
        self.coeffs[self.degree()]
    }

    pub fn eval(&self, z: Complex) -> Complex {
        horner(&self.coeffs, z).value
    }

    pub fn eval_derivative(&self, z: Complex) -> Complex {
        horner(&self.coeffs, z).derivative
    }

    /// `max(1, max_i |a_i|)`, the scale used for relative residuals.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max)
    }

    /// `|p(z)| / scale`.
    pub fn relative_residual(&self, z: Complex) -> f64 {
        self.eval(z).norm() / self.scale()
    }
}

impl TryFrom<SparsePoly> for UniPoly {
    type Error = Error;

    fn try_from(p: SparsePoly) -> Result<Self> {
        UniPoly::from_sparse(&p)
    }
}

impl From<UniPoly> for SparsePoly {
    fn from(p: UniPoly) -> Self {
        p.to_sparse()
    }
}

struct Horner {
    value: Complex,
    derivative: Complex,
    /// `sum |a_i| |z|^i`
    magnitude: f64,
}

fn horner(coeffs: &[Complex], z: Complex) -> Horner {
    let r = z.norm();
    let mut value = Complex::default();
    let mut derivative = Complex::default();
    let mut magnitude = 0.0;
    for &c in coeffs.iter().rev() {
        derivative = derivative * z + value;
        value = value * z + c;
        magnitude = magnitude * r + c.norm();
    }
    Horner {
        value,
        derivative,
        magnitude,
    }
}

/// One root value with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

impl Root {
    pub fn new(value: Complex, multiplicity: usize) -> Self {
        Root {
            re: value.re,
            im: value.im,
            multiplicity,
        }
    }

    pub fn value(&self) -> Complex {
        Complex::new(self.re, self.im)
    }
}

/// Roots of a polynomial listed with multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootMultiset {
    pub roots: Vec<Root>,
    /// `max |p(root)| / max(1, |coeffs|_inf)` over the listed values,
    /// 0 when the multiset was not produced from a polynomial.
    pub residual_bound: f64,
    #[serde(skip)]
    source: Option<UniPoly>,
}

impl RootMultiset {
    /// Each value with multiplicity 1, not tied to a polynomial.
    pub fn from_values(values: &[Complex]) -> Self {
        RootMultiset {
            roots: values.iter().map(|&v| Root::new(v, 1)).collect(),
            residual_bound: 0.0,
            source: None,
        }
    }

    pub fn source(&self) -> Option<&UniPoly> {
        self.source.as_ref()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Values repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<Complex> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value(), r.multiplicity))
            .collect()
    }

    fn recompute_residual(&mut self) {
        if let Some(p) = &self.source {
            self.residual_bound = self
                .roots
                .iter()
                .map(|r| p.relative_residual(r.value()))
                .fold(0.0, f64::max);
        }
    }
}

/// All `n` roots of `p`, each listed with multiplicity 1, sorted by real
/// then imaginary part.
pub fn find_roots(p: &UniPoly, tol: f64) -> Result<RootMultiset> {
    Error::positive("tol", tol)?;
    let coeffs = p.coeffs();
    let zeros = coeffs
        .iter()
        .take_while(|c| **c == Complex::default())
        .count();
    let reduced = &coeffs[zeros..];

    let mut values = vec![Complex::default(); zeros];
    if reduced.len() > 1 {
        let mut found = aberth(reduced)?;
        for z in &mut found {
            *z = newton_polish(reduced, *z);
        }
        values.extend(found);
    }
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let scale = p.scale();
    let mut residual = 0.0f64;
    let mut condition = 1.0f64;
    for &z in &values {
        let h = horner(coeffs, z);
        residual = residual.max(h.value.norm() / scale);
        condition = condition.max(h.magnitude / scale);
    }
    if residual > tol.max(1e3 * f64::EPSILON * condition) {
        return Err(Error::NonConvergence {
            iterations: MAX_SWEEPS,
            residual,
            best: values,
        });
    }

    Ok(RootMultiset {
        roots: values.iter().map(|&v| Root::new(v, 1)).collect(),
        residual_bound: residual,
        source: Some(p.clone()),
    })
}

fn aberth(coeffs: &[Complex]) -> Result<Vec<Complex>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    if n == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }
    let cauchy = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + START_ROTATION;
            Complex::from_polar(cauchy, angle)
        })
        .collect();
    let mut done = vec![false; n];
    let rounding = 2.0 * n as f64 * f64::EPSILON;

    for _ in 0..MAX_SWEEPS {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let h = horner(coeffs, z[k]);
            if h.value.norm() <= rounding * h.magnitude {
                done[k] = true;
                continue;
            }
            let repulsion: Complex = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let denom = h.derivative - h.value * repulsion;
            let step = if denom == Complex::default() {
                // escape a stationary point
                Complex::new(1e-8, 1e-8) * (1.0 + z[k].norm())
            } else {
                h.value / denom
            };
            z[k] -= step;
            if !(z[k].re.is_finite() && z[k].im.is_finite()) {
                return Err(Error::NonConvergence {
                    iterations: MAX_SWEEPS,
                    residual: f64::INFINITY,
                    best: z,
                });
            }
            if step.norm() <= f64::EPSILON * z[k].norm() {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }

    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let residual = z
        .iter()
        .map(|&zk| horner(coeffs, zk).value.norm() / scale)
        .fold(0.0, f64::max);
    Err(Error::NonConvergence {
        iterations: MAX_SWEEPS,
        residual,
        best: z,
    })
}

fn newton_polish(coeffs: &[Complex], mut z: Complex) -> Complex {
    let mut h = horner(coeffs, z);
    for _ in 0..NEWTON_POLISH_STEPS {
        if h.value == Complex::default() || h.derivative == Complex::default() {
            break;
        }
        let candidate = z - h.value / h.derivative;
        let hc = horner(coeffs, candidate);
        if hc.value.norm() >= h.value.norm() {
            break;
        }
        z = candidate;
        h = hc;
    }
    z
}

/// Merges roots within `radius` of each other (single linkage) into one
/// root at the multiplicity-weighted centroid.
pub fn cluster_multiplicities(r: &RootMultiset, radius: f64) -> Result<RootMultiset> {
    Error::positive("radius", radius)?;
    let n = r.roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (r.roots[i].value() - r.roots[j].value()).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    // clusters keyed by their smallest member, in order of first appearance
    let mut order: Vec<usize> = Vec::new();
    let mut sums: Vec<(Complex, usize)> = vec![(Complex::default(), 0); n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if sums[root].1 == 0 {
            order.push(root);
        }
        let m = r.roots[i].multiplicity;
        sums[root].0 += r.roots[i].value() * m as f64;
        sums[root].1 += m;
    }

    let mut out = RootMultiset {
        roots: order
            .into_iter()
            .map(|k| {
                let (sum, m) = sums[k];
                Root::new(sum / m as f64, m)
            })
            .collect(),
        residual_bound: r.residual_bound,
        source: r.source.clone(),
    };
    out.recompute_residual();
    Ok(out)
}
