//! Hypersurfaces, affine varieties and their deformations.
//!
//! Complex grids are Cartesian products of uniform real grids on the real and
//! imaginary parts of each coordinate, `resolution` points per real axis on
//! `[-T, T]`, keeping only coordinates with `|z| <= T`. Every loop walks grid
//! points in index order, so reports do not depend on evaluation order.

use std::io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{
    hensel_lift_root, jet_align_roots, lift_residual, Jet, JetPoly, APPROX_TOL,
    SIMPLE_ROOT_THRESHOLD,
};
use crate::polycore::{
    coeff_sup_distance, max_coeff_deviation, union_support, unit_disc_sample, Complex, Point,
    PolySystem, SparsePoly,
};
use crate::uniroots::{find_roots, UniPoly, DEFAULT_TOL};

/// Default absolute tolerance on `|f(z)|` for sampled zero-set points.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;
/// Fibers whose leading coefficient falls below this are skipped.
pub const DEGENERATE_LEAD: f64 = 1e-12;

/// `H(T) = { z in C^n : ||z||_inf <= T }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypercube {
    pub half_width: f64,
    pub dim: usize,
}

impl Hypercube {
    pub fn new(half_width: f64, dim: usize) -> Result<Self> {
        Error::positive("T", half_width)?;
        Ok(Hypercube { half_width, dim })
    }

    pub fn contains(&self, z: &Point) -> bool {
        z.dim() == self.dim && z.sup_norm() <= self.half_width
    }

    /// Grid values of one complex coordinate inside the disc `|z| <= T`.
    pub fn coordinate_grid(&self, resolution: usize) -> Vec<Complex> {
        disc_grid(self.half_width, resolution)
    }
}

/// `resolution` evenly spaced values on `[-t, t]` (just `0` when
/// `resolution == 1`).
pub fn axis_grid(t: f64, resolution: usize) -> Vec<f64> {
    if resolution <= 1 {
        return vec![0.0];
    }
    let step = 2.0 * t / (resolution - 1) as f64;
    (0..resolution)
        .map(|i| {
            if i == resolution - 1 {
                t
            } else {
                -t + step * i as f64
            }
        })
        .collect()
}

/// Complex grid points with `|z| <= t`, real part major.
pub fn disc_grid(t: f64, resolution: usize) -> Vec<Complex> {
    let axis = axis_grid(t, resolution);
    let mut out = Vec::with_capacity(axis.len() * axis.len());
    for &re in &axis {
        for &im in &axis {
            let z = Complex::new(re, im);
            if z.norm() <= t {
                out.push(z);
            }
        }
    }
    out
}

fn check_resolution(grid: usize) -> Result<()> {
    if grid == 0 {
        return Err(Error::InvalidParameter {
            name: "grid",
            requirement: "at least 1",
            value: 0.0,
        });
    }
    Ok(())
}

/// Finite set of points standing in for a zero set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleCloud {
    pub label: String,
    points: Vec<Point>,
}

impl SampleCloud {
    pub fn new(points: Vec<Point>, label: impl Into<String>) -> Result<Self> {
        if let Some(first) = points.first() {
            let n = first.dim();
            if let Some(bad) = points.iter().find(|p| p.dim() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: bad.dim(),
                });
            }
        }
        Ok(SampleCloud {
            label: label.into(),
            points,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ambient dimension, `None` for an empty cloud.
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(Point::dim)
    }

    /// CSV with header `re_1,im_1,...,re_n,im_n`, one point per row.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.dim().unwrap_or(0);
        let header: Vec<String> = (1..=n)
            .flat_map(|j| [format!("re_{j}"), format!("im_{j}")])
            .collect();
        w.write_record(&header)?;
        for p in &self.points {
            w.write_record(
                p.coords()
                    .iter()
                    .flat_map(|c| [c.re.to_string(), c.im.to_string()]),
            )?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: io::Read>(input: R, label: impl Into<String>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let width = r.headers()?.len();
        if width == 0 || width % 2 != 0 {
            return Err(Error::Parse(format!(
                "expected re_j,im_j column pairs, found {width} columns"
            )));
        }
        let mut points = Vec::new();
        for record in r.records() {
            let record = record?;
            let values: Vec<f64> = record
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            points.push(Point::new(
                values.chunks(2).map(|c| Complex::new(c[0], c[1])).collect(),
            ));
        }
        SampleCloud::new(points, label)
    }
}

/// `w ∈ V_eps(g)`, i.e. `|g(w)| < eps`.
pub fn v_eps_member(g: &SparsePoly, w: &Point, eps: f64) -> Result<bool> {
    Error::positive("eps", eps)?;
    Ok(g.eval(w)?.norm() < eps)
}

/// Exclusive upper bound `eps / (T^d |I|)` on the coefficient perturbation
/// that keeps `|g - f| < eps` on `H(T)`.
pub fn delta_bound(eps: f64, t: f64, d: u32, support_size: usize) -> Result<f64> {
    Error::positive("eps", eps)?;
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "T",
            requirement: "at least 1",
            value: t,
        });
    }
    if support_size == 0 {
        return Err(Error::InvalidParameter {
            name: "support_size",
            requirement: "at least 1",
            value: 0.0,
        });
    }
    Ok(eps / (t.powi(d as i32) * support_size as f64))
}

/// Degree and size of the common support of `f` and `g`, and the matching
/// perturbation bound. Fails unless `g` is a strict deformation of `f` within
/// that bound.
fn deformation_hypothesis(
    f: &SparsePoly,
    g: &SparsePoly,
    t: f64,
    eps: f64,
) -> Result<(u32, usize, f64, f64)> {
    f.degree_and_support()?;
    let support = union_support(f, g);
    let d = support.iter().map(|e| e.total_degree()).max().unwrap_or(0);
    let size = support.len();
    let bound = delta_bound(eps, t, d, size)?;
    let (exps, distance) = max_coeff_deviation(f, g)?.expect("f is nonzero");
    if distance >= bound {
        return Err(Error::NotADeformation {
            exps: exps.exps().to_vec(),
            distance,
            delta: bound,
        });
    }
    Ok((d, size, bound, distance))
}

/// Maximum of `|p(z)|` over the grid `coords^n`, with the maximizing point.
/// Variables are fixed one at a time so the innermost loop is a univariate
/// Horner evaluation.
fn grid_sup_abs(p: &SparsePoly, coords: &[Complex]) -> (f64, Vec<Complex>) {
    if p.nvars() == 1 {
        let deg = p.degree_in(0) as usize;
        let mut dense = vec![Complex::default(); deg + 1];
        for (e, &c) in p.terms() {
            dense[e.exps()[0] as usize] = c;
        }
        let mut best = (-1.0, Complex::default());
        for &z in coords {
            let v = dense
                .iter()
                .rev()
                .fold(Complex::default(), |acc, &c| acc * z + c)
                .norm();
            if v > best.0 {
                best = (v, z);
            }
        }
        return (best.0.max(0.0), vec![best.1]);
    }
    let mut best = (-1.0, Vec::new());
    for &z in coords {
        let (v, mut arg) = grid_sup_abs(&p.substitute(0, z), coords);
        if v > best.0 {
            arg.insert(0, z);
            best = (v, arg);
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub eps: f64,
    pub half_width: f64,
    pub grid: usize,
    /// Maximum total degree over the common support.
    pub degree: u32,
    pub support_size: usize,
    pub delta_bound: f64,
    pub coeff_distance: f64,
    pub grid_points: usize,
    pub sup_deviation: f64,
    pub argmax: Point,
    pub pass: bool,
}

/// Largest `|g(z) - f(z)|` over the grid of `H(T)`; passes when it stays
/// below `eps`.
pub fn lemma_check(
    f: &SparsePoly,
    g: &SparsePoly,
    t: f64,
    eps: f64,
    grid: usize,
) -> Result<LemmaReport> {
    check_resolution(grid)?;
    let (degree, support_size, bound, distance) = deformation_hypothesis(f, g, t, eps)?;
    let diff = g.try_add_with(&f.scale(Complex::new(-1.0, 0.0)), 0.0)?;
    let coords = disc_grid(t, grid);
    let n = f.nvars();
    let (sup, argmax) = if diff.is_zero() {
        (0.0, vec![Complex::default(); n])
    } else {
        grid_sup_abs(&diff, &coords)
    };
    Ok(LemmaReport {
        eps,
        half_width: t,
        grid,
        degree,
        support_size,
        delta_bound: bound,
        coeff_distance: distance,
        grid_points: coords.len().pow(n as u32),
        sup_deviation: sup,
        argmax: Point::new(argmax),
        pass: sup < eps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypersurfaceSample {
    pub cloud: SampleCloud,
    /// Zero-based index of the variable solved for.
    pub axis: usize,
    pub fibers: usize,
    pub degenerate_fibers: usize,
    pub failed_fibers: usize,
    /// Roots inside `H(T)` dropped for exceeding the residual tolerance.
    pub rejected_roots: usize,
    pub max_residual: f64,
}

/// Points of `V(f) ∩ H(T)`: for each grid point of the other coordinates,
/// the roots in `t_axis` with modulus at most `T`.
pub fn sample_hypersurface(
    f: &SparsePoly,
    t: f64,
    axis: usize,
    grid: usize,
    tol: f64,
) -> Result<HypersurfaceSample> {
    Error::positive("T", t)?;
    Error::positive("tol", tol)?;
    check_resolution(grid)?;
    let (d, support) = f.degree_and_support()?;
    let n = f.nvars();
    if axis >= n {
        return Err(Error::InvalidParameter {
            name: "axis",
            requirement: "a variable index",
            value: axis as f64,
        });
    }
    let axis_degree = f.degree_in(axis) as usize;
    if axis_degree == 0 {
        return Err(Error::ConstantInAxis { axis });
    }
    let scale = 1.0 + f.coeff_norm_inf() * support as f64 * t.powi(d as i32);
    let accept = tol * scale;
    let radius = t * (1.0 + 4.0 * f64::EPSILON);

    let coords = disc_grid(t, grid);
    let others = n - 1;
    let fibers = coords.len().pow(others as u32);
    let mut sample = HypersurfaceSample {
        cloud: SampleCloud::new(Vec::new(), format!("V(f) ∩ H({t})"))?,
        axis,
        fibers,
        degenerate_fibers: 0,
        failed_fibers: 0,
        rejected_roots: 0,
        max_residual: 0.0,
    };
    let mut points = Vec::new();
    let mut index = vec![0usize; others];
    let mut z = vec![Complex::default(); n];
    for _ in 0..fibers {
        for (k, &i) in index.iter().enumerate() {
            let j = if k < axis { k } else { k + 1 };
            z[j] = coords[i];
        }
        let fiber = f.fiber_coeffs(axis, &z)?;
        if fiber[axis_degree].norm() < DEGENERATE_LEAD {
            sample.degenerate_fibers += 1;
        } else {
            match UniPoly::new(fiber).and_then(|p| find_roots(&p, DEFAULT_TOL)) {
                Ok(roots) => {
                    for r in roots.expanded() {
                        if r.norm() > radius {
                            continue;
                        }
                        z[axis] = r;
                        let residual = f.eval_slice(&z)?.norm();
                        if residual <= accept {
                            sample.max_residual = sample.max_residual.max(residual);
                            points.push(Point::new(z.clone()));
                        } else {
                            sample.rejected_roots += 1;
                        }
                    }
                }
                Err(e) if e.is_numeric() => sample.failed_fibers += 1,
                Err(e) => return Err(e),
            }
        }
        // odometer over the other coordinates, last one fastest
        for slot in index.iter_mut().rev() {
            *slot += 1;
            if *slot < coords.len() {
                break;
            }
            *slot = 0;
        }
    }
    sample.cloud = SampleCloud::new(points, sample.cloud.label.clone())?;
    Ok(sample)
}

/// Variable of highest degree in `f` (first one on ties).
pub fn default_axis(f: &SparsePoly) -> usize {
    (0..f.nvars())
        .rev()
        .max_by_key(|&j| f.degree_in(j))
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: Point,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub eps: f64,
    pub half_width: f64,
    pub grid: usize,
    pub tol: f64,
    pub axis: usize,
    pub degree: u32,
    pub support_size: usize,
    pub delta_bound: f64,
    pub coeff_distance: f64,
    pub samples: usize,
    pub degenerate_fibers: usize,
    pub failed_fibers: usize,
    pub rejected_roots: usize,
    /// Samples with `|g(z)| < eps`.
    pub members: usize,
    /// Samples with `eps <= |g(z)| < eps + |f(z)|`: outside `V_eps(g)` only
    /// by the sampling residual.
    pub unresolved: usize,
    /// Samples with `|g(z)| >= eps + |f(z)|`.
    pub violations: Vec<Violation>,
    pub violation_count: usize,
    /// `max |g(z)|` over the samples.
    pub max_residual: f64,
    pub pass: bool,
}

/// Samples `V(f) ∩ H(T)` and tests every point for membership in
/// `V_eps(g)`.
///
/// A sampled `z` only satisfies `|f(z)| <= tol * scale`, and at such a point
/// the perturbation bound gives `|g(z)| < eps + |f(z)|`. Points beyond that
/// are violations; points between `eps` and that margin are `unresolved`.
pub fn containment_check(
    f: &SparsePoly,
    g: &SparsePoly,
    t: f64,
    eps: f64,
    grid: usize,
    tol: f64,
) -> Result<ContainmentReport> {
    let (degree, support_size, bound, distance) = deformation_hypothesis(f, g, t, eps)?;
    let axis = default_axis(f);
    let sample = sample_hypersurface(f, t, axis, grid, tol)?;
    let mut report = ContainmentReport {
        eps,
        half_width: t,
        grid,
        tol,
        axis,
        degree,
        support_size,
        delta_bound: bound,
        coeff_distance: distance,
        samples: sample.cloud.len(),
        degenerate_fibers: sample.degenerate_fibers,
        failed_fibers: sample.failed_fibers,
        rejected_roots: sample.rejected_roots,
        members: 0,
        unresolved: 0,
        violations: Vec::new(),
        violation_count: 0,
        max_residual: 0.0,
        pass: true,
    };
    for z in sample.cloud.points() {
        let gz = g.eval(z)?.norm();
        let fz = f.eval(z)?.norm();
        report.max_residual = report.max_residual.max(gz);
        if gz < eps {
            report.members += 1;
        } else if gz < eps + fz {
            report.unresolved += 1;
        } else {
            report.violations.push(Violation {
                point: z.clone(),
                residual: gz,
            });
        }
    }
    report.violation_count = report.violations.len();
    report.pass = report.violation_count == 0;
    Ok(report)
}

/// `max_λ |f_λ(z)|`.
pub fn system_residual(system: &PolySystem, z: &Point) -> Result<f64> {
    system
        .polys()
        .iter()
        .try_fold(0.0f64, |acc, p| Ok(acc.max(p.eval(z)?.norm())))
}

/// Finite, infinite, or a mix of finite and infinite coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    Finite,
    Infinite,
    Mixed,
}

pub fn classify_point(w: &[Jet]) -> PointClass {
    let finite = w.iter().filter(|j| j.is_finite()).count();
    if finite == w.len() {
        PointClass::Finite
    } else if finite == 0 {
        PointClass::Infinite
    } else {
        PointClass::Mixed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetCheckParams {
    pub order: i32,
    pub tol: f64,
    pub seed: u64,
    /// Random infinitesimal perturbations per sample point.
    pub perturbations: usize,
}

impl Default for JetCheckParams {
    fn default() -> Self {
        JetCheckParams {
            order: crate::jets::DEFAULT_ORDER,
            tol: DEFAULT_MEMBERSHIP_TOL,
            seed: 0,
            perturbations: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnivariateCrossCheck {
    pub lifted: usize,
    pub skipped: usize,
    /// Largest `|f(°ω)|` over the lifted roots.
    pub max_standard_residual: f64,
    pub max_lift_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetCheckReport {
    pub order: i32,
    pub tol: f64,
    pub samples: usize,
    /// Samples with `system_residual > tol`, left out of both checks.
    pub off_variety: usize,
    pub forward_checked: usize,
    pub forward_passed: usize,
    /// Largest `|°g_λ(z)|` over forward checks.
    pub max_forward_residual: f64,
    pub backward_checked: usize,
    pub backward_passed: usize,
    /// Backward witnesses whose last coordinate was Hensel-lifted to an
    /// exact jet zero of `g`.
    pub lifted_witnesses: usize,
    /// Largest `system_residual(F, °w)` over backward witnesses.
    pub max_backward_residual: f64,
    /// Largest coefficient of `g(w)` through the truncation order over
    /// lifted witnesses.
    pub max_lift_residual: f64,
    pub non_finite_witnesses: usize,
    pub univariate: Option<UnivariateCrossCheck>,
    pub pass: bool,
}

fn random_infinitesimal_shift(z: Complex, order: i32, rng: &mut ChaCha8Rng) -> Jet {
    let mut coeffs = vec![z];
    coeffs.extend((1..=order).map(|_| unit_disc_sample(rng)));
    Jet::from_series(&coeffs, order).expect("finite coefficients")
}

/// Checks both inclusions between `*V_0(G)` and `V(F)` on witnesses.
///
/// Forward: a standard point of `V(F)` read as constant jets has
/// `°g_λ(z) = f_λ(z) ≈ 0`. Backward: sample points are shifted by random
/// infinitesimal jets; for a single hypersurface the solved coordinate is then
/// Hensel-lifted so the witness is a jet zero of `g`. The standard part of
/// every witness must land back in the tolerance set of `V(F)`.
pub fn variety_jet_check(
    system: &PolySystem,
    jets: &[JetPoly],
    samples: &SampleCloud,
    params: &JetCheckParams,
) -> Result<JetCheckReport> {
    Error::positive("tol", params.tol)?;
    if jets.len() != system.len() {
        return Err(Error::SizeMismatch {
            left: system.len(),
            right: jets.len(),
        });
    }
    let n = system.nvars();
    for (f, g) in system.polys().iter().zip(jets) {
        if g.nvars() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.nvars(),
            });
        }
        let distance = coeff_sup_distance(&g.st_poly()?, f)?;
        if distance > APPROX_TOL {
            return Err(Error::StandardPartMismatch { distance });
        }
    }
    if let Some(dim) = samples.dim() {
        if dim != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: dim,
            });
        }
    }
    let order = params.order;
    let jets: Vec<JetPoly> = jets.iter().map(|g| g.truncate(order)).collect();
    let lift_axis = (system.len() == 1).then(|| default_axis(&system.polys()[0]));
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut report = JetCheckReport {
        order,
        tol: params.tol,
        samples: samples.len(),
        off_variety: 0,
        forward_checked: 0,
        forward_passed: 0,
        max_forward_residual: 0.0,
        backward_checked: 0,
        backward_passed: 0,
        lifted_witnesses: 0,
        max_backward_residual: 0.0,
        max_lift_residual: 0.0,
        non_finite_witnesses: 0,
        univariate: None,
        pass: false,
    };

    for z in samples.points() {
        if system_residual(system, z)? > params.tol {
            report.off_variety += 1;
            continue;
        }

        let w: Vec<Jet> = z
            .coords()
            .iter()
            .map(|&c| Jet::constant(c, order))
            .collect();
        let mut forward = 0.0f64;
        let mut finite = true;
        for g in &jets {
            let v = g.eval(&w)?;
            match v.standard_part().finite() {
                Some(s) => forward = forward.max(s.norm()),
                None => finite = false,
            }
        }
        report.forward_checked += 1;
        report.max_forward_residual = report.max_forward_residual.max(forward);
        if finite && forward <= params.tol {
            report.forward_passed += 1;
        }

        for _ in 0..params.perturbations {
            let mut w: Vec<Jet> = z
                .coords()
                .iter()
                .map(|&c| random_infinitesimal_shift(c, order, &mut rng))
                .collect();
            if let Some(axis) = lift_axis {
                w[axis] = Jet::constant(z.coords()[axis], order);
                let fiber = jets[0].fiber(axis, &w)?;
                let standard = fiber.st_poly()?;
                let zeta = z.coords()[axis];
                let lifted = UniPoly::from_sparse(&standard)
                    .ok()
                    .filter(|f| f.eval_derivative(zeta).norm() >= SIMPLE_ROOT_THRESHOLD)
                    .map(|f| hensel_lift_root(&f, zeta, &fiber, order));
                match lifted {
                    Some(Ok(omega)) => {
                        let residual = lift_residual(&fiber, &omega)?;
                        report.max_lift_residual = report.max_lift_residual.max(residual);
                        report.lifted_witnesses += 1;
                        w[axis] = omega;
                    }
                    Some(Err(Error::MultipleRoot { .. })) | None => {
                        w[axis] = random_infinitesimal_shift(zeta, order, &mut rng);
                    }
                    Some(Err(e)) => return Err(e),
                }
            }
            report.backward_checked += 1;
            if classify_point(&w) != PointClass::Finite {
                report.non_finite_witnesses += 1;
                continue;
            }
            let mut in_v0 = true;
            for g in &jets {
                let s = g.eval(&w)?.standard_part().finite();
                in_v0 &= s.is_some_and(|s| s.norm() <= params.tol);
            }
            let standard = Point::new(w.iter().map(|j| j.coeff(0)).collect());
            let back = system_residual(system, &standard)?;
            report.max_backward_residual = report.max_backward_residual.max(back);
            if in_v0 && back <= params.tol {
                report.backward_passed += 1;
            }
        }
    }

    if n == 1 && system.len() == 1 {
        if let Ok(f) = UniPoly::from_sparse(&system.polys()[0]) {
            let al = jet_align_roots(&f, &jets[0], order)?;
            let max_standard = al
                .pairs
                .iter()
                .map(|p| {
                    p.lift
                        .standard_part()
                        .finite()
                        .map_or(f64::INFINITY, |s| f.eval(s).norm())
                })
                .fold(0.0, f64::max);
            let max_lift = al.pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
            report.univariate = Some(UnivariateCrossCheck {
                lifted: al.pairs.len(),
                skipped: al.skipped.len(),
                max_standard_residual: max_standard,
                max_lift_residual: max_lift,
                pass: max_standard <= params.tol,
            });
        }
    }

    report.pass = report.forward_checked > 0
        && report.forward_passed == report.forward_checked
        && report.backward_passed == report.backward_checked
        && report.univariate.as_ref().is_none_or(|u| u.pass);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::random_deformation;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn poly(nvars: usize, terms: &[(&[u32], f64)]) -> SparsePoly {
        SparsePoly::from_terms(nvars, terms.iter().map(|(e, a)| (e.to_vec(), c(*a, 0.0)))).unwrap()
    }

    fn hyperbola() -> SparsePoly {
        poly(2, &[(&[1, 1], 1.0), (&[0, 0], -1.0)])
    }

    fn diagonal() -> SparsePoly {
        poly(2, &[(&[0, 1], 1.0), (&[1, 0], -1.0)])
    }

    #[test]
    fn grids() {
        assert_eq!(axis_grid(1.0, 3), vec![-1.0, 0.0, 1.0]);
        assert_eq!(axis_grid(2.0, 1), vec![0.0]);
        let disc = disc_grid(1.0, 3);
        // the four corners fall outside the unit disc
        assert_eq!(disc.len(), 5);
        assert!(disc.iter().all(|z| z.norm() <= 1.0));
    }

    #[test]
    fn v_eps_examples() {
        assert!(v_eps_member(&hyperbola(), &Point::real(&[1.0, 1.0]), 1e-300).unwrap());
        assert!(!v_eps_member(&hyperbola(), &Point::real(&[0.0, 0.0]), 0.5).unwrap());
        let g = poly(2, &[(&[0, 1], 1.0), (&[1, 0], -1.001)]);
        assert!(v_eps_member(&g, &Point::real(&[1.0, 1.0]), 0.01).unwrap());
        assert!(v_eps_member(&g, &Point::real(&[1.0]), 0.01).is_err());
    }

    #[test]
    fn delta_bound_examples() {
        assert!((delta_bound(0.3, 1.0, 2, 3).unwrap() - 0.1).abs() < 1e-16);
        assert_eq!(delta_bound(1.0, 2.0, 3, 4).unwrap(), 0.03125);
        assert_eq!(delta_bound(0.5, 1.0, 0, 1).unwrap(), 0.5);
        assert!(delta_bound(0.5, 0.9, 1, 1).is_err());
        assert!(delta_bound(0.0, 1.0, 1, 1).is_err());
    }

    #[test]
    fn lemma_examples() {
        let f = hyperbola();
        let g = poly(2, &[(&[1, 1], 1.04), (&[0, 0], -0.96)]);
        let r = lemma_check(&f, &g, 1.0, 0.1, 21).unwrap();
        assert_eq!((r.degree, r.support_size), (2, 2));
        assert!(r.sup_deviation <= 0.08 + 1e-15, "{}", r.sup_deviation);
        assert!(r.pass);
        // attained at z1 z2 = 1 on the grid, e.g. (1, 1)
        assert!((r.sup_deviation - 0.08).abs() < 1e-12);

        let r = lemma_check(&f, &f, 1.0, 0.1, 21).unwrap();
        assert_eq!(r.sup_deviation, 0.0);
        assert!(r.pass);

        let sq = poly(1, &[(&[2], 1.0)]);
        let shifted = poly(1, &[(&[2], 1.0), (&[0], 0.2)]);
        match lemma_check(&sq, &shifted, 1.0, 0.1, 21) {
            Err(Error::NotADeformation { exps, .. }) => assert_eq!(exps, vec![0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lemma_grid_sup_matches_brute_force() {
        let f = poly(
            3,
            &[(&[1, 1, 0], 0.5), (&[0, 0, 2], -1.0), (&[1, 0, 1], 0.25)],
        );
        let g = random_deformation(&f, 0.01, 3).unwrap();
        let r = lemma_check(&f, &g, 1.0, 1.0, 7).unwrap();
        let diff = g.try_sub(&f).unwrap();
        let coords = disc_grid(1.0, 7);
        let mut sup = 0.0f64;
        for &a in &coords {
            for &b in &coords {
                for &cc in &coords {
                    sup = sup.max(diff.eval_slice(&[a, b, cc]).unwrap().norm());
                }
            }
        }
        assert!((r.sup_deviation - sup).abs() <= 1e-14);
        assert_eq!(r.grid_points, coords.len().pow(3));
    }

    #[test]
    fn sample_examples() {
        let s = sample_hypersurface(&diagonal(), 1.0, 1, 11, DEFAULT_MEMBERSHIP_TOL).unwrap();
        assert!(!s.cloud.is_empty());
        for p in s.cloud.points() {
            let z = p.coords();
            assert!((z[0] - z[1]).norm() < 1e-15);
            assert!(z[0].norm() <= 1.0);
        }
        assert_eq!(s.cloud.len(), disc_grid(1.0, 11).len());

        let s = sample_hypersurface(&hyperbola(), 1.0, 1, 11, DEFAULT_MEMBERSHIP_TOL).unwrap();
        assert_eq!(s.degenerate_fibers, 1);
        // |z1| = 1 on the grid: ±1, ±i and (±0.6, ±0.8), (±0.8, ±0.6)
        assert_eq!(s.cloud.len(), 12);
        for p in s.cloud.points() {
            let z = p.coords();
            assert!((z[0].norm() - 1.0).abs() < 1e-15);
            assert!((z[0] * z[1] - 1.0).norm() < 1e-14);
        }

        let s =
            sample_hypersurface(&poly(1, &[(&[2], 1.0), (&[0], -1.0)]), 2.0, 0, 5, 1e-8).unwrap();
        let mut xs: Vec<f64> = s.cloud.points().iter().map(|p| p.coords()[0].re).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![-1.0, 1.0]);

        assert!(matches!(
            sample_hypersurface(&poly(2, &[(&[1, 0], 1.0)]), 1.0, 1, 5, 1e-8),
            Err(Error::ConstantInAxis { axis: 1 })
        ));
    }

    #[test]
    fn containment_examples() {
        let f = poly(2, &[(&[1, 0], 1.0), (&[0, 1], -1.0)]);
        let g = poly(2, &[(&[1, 0], 1.0), (&[0, 1], -1.0), (&[0, 0], 0.03)]);
        let r = containment_check(&f, &g, 1.0, 0.1, 11, DEFAULT_MEMBERSHIP_TOL).unwrap();
        assert!((r.delta_bound - 0.1 / 3.0).abs() < 1e-16);
        assert_eq!(r.violation_count, 0);
        assert!((r.max_residual - 0.03).abs() < 1e-15);
        assert!(r.pass);

        let r = containment_check(&f, &f, 1.0, 0.1, 11, DEFAULT_MEMBERSHIP_TOL).unwrap();
        assert_eq!(r.violation_count, 0);
        assert!(r.max_residual < 1e-15);

        let f = poly(1, &[(&[2], 1.0), (&[0], -1.0)]);
        let g = poly(1, &[(&[2], 1.0), (&[0], -1.0 + 1e-3)]);
        let r = containment_check(&f, &g, 1.0, 0.01, 5, DEFAULT_MEMBERSHIP_TOL).unwrap();
        assert_eq!(r.samples, 2);
        assert_eq!(r.violation_count, 0);
        assert!((r.max_residual - 1e-3).abs() < 1e-15);

        let far = poly(1, &[(&[2], 1.0), (&[0], -0.5)]);
        assert!(containment_check(&f, &far, 1.0, 0.01, 5, 1e-8).is_err());
    }

    #[test]
    fn system_residual_examples() {
        let sys =
            PolySystem::new(vec![diagonal(), poly(2, &[(&[1, 0], 1.0), (&[0, 1], 1.0)])]).unwrap();
        assert_eq!(
            system_residual(&sys, &Point::real(&[0.0, 0.0])).unwrap(),
            0.0
        );
        assert_eq!(
            system_residual(&sys, &Point::real(&[1.0, 1.0])).unwrap(),
            2.0
        );
        let single = PolySystem::new(vec![hyperbola()]).unwrap();
        let z = Point::real(&[2.0, 3.0]);
        assert_eq!(
            system_residual(&single, &z).unwrap(),
            hyperbola().eval(&z).unwrap().norm()
        );
    }

    #[test]
    fn jet_check_on_the_diagonal() {
        let f = poly(2, &[(&[1, 0], 1.0), (&[0, 1], -1.0)]);
        let g = JetPoly::deformation(&f, &SparsePoly::constant(2, c(1.0, 0.0)), 2, 8).unwrap();
        let sys = PolySystem::new(vec![f.clone()]).unwrap();
        let samples = sample_hypersurface(&f, 1.0, 1, 7, DEFAULT_MEMBERSHIP_TOL)
            .unwrap()
            .cloud;
        let r = variety_jet_check(&sys, &[g], &samples, &JetCheckParams::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.forward_checked, samples.len());
        assert_eq!(r.lifted_witnesses, r.backward_checked);
        assert!(r.max_lift_residual <= 1e-9);

        let trivial = JetPoly::from_sparse(&f, 8).unwrap();
        let r = variety_jet_check(&sys, &[trivial], &samples, &JetCheckParams::default()).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn jet_check_univariate_cross_check() {
        let f = poly(1, &[(&[2], 1.0), (&[0], -1.0)]);
        let g = JetPoly::deformation(&f, &SparsePoly::constant(1, c(-1.0, 0.0)), 1, 8).unwrap();
        let sys = PolySystem::new(vec![f.clone()]).unwrap();
        let samples = sample_hypersurface(&f, 2.0, 0, 5, 1e-8).unwrap().cloud;
        let r = variety_jet_check(&sys, &[g], &samples, &JetCheckParams::default()).unwrap();
        assert!(r.pass);
        let u = r.univariate.unwrap();
        assert_eq!((u.lifted, u.skipped), (2, 0));
        assert!(u.max_lift_residual <= 1e-9);
    }

    #[test]
    fn jet_check_on_a_system() {
        // V(t1 - t2, t1 + t2) = {0}; perturbed witnesses keep standard part 0
        let f1 = diagonal();
        let f2 = poly(2, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]);
        let sys = PolySystem::new(vec![f1.clone(), f2.clone()]).unwrap();
        let g1 = JetPoly::deformation(&f1, &SparsePoly::var(2, 0), 1, 6).unwrap();
        let g2 = JetPoly::from_sparse(&f2, 6).unwrap();
        let samples = SampleCloud::new(
            vec![Point::real(&[0.0, 0.0]), Point::real(&[1.0, 0.0])],
            "s",
        )
        .unwrap();
        let params = JetCheckParams {
            order: 6,
            ..JetCheckParams::default()
        };
        let r = variety_jet_check(&sys, &[g1, g2], &samples, &params).unwrap();
        assert_eq!(r.off_variety, 1);
        assert!(r.pass);

        let wrong = JetPoly::from_sparse(&f1, 6).unwrap();
        assert!(matches!(
            variety_jet_check(&sys, &[wrong.clone(), wrong], &samples, &params),
            Err(Error::StandardPartMismatch { .. })
        ));
    }

    #[test]
    fn mixed_points_are_flagged() {
        let e = Jet::epsilon(8);
        let inv = Jet::constant(c(1.0, 0.0), 8).checked_div(&e).unwrap();
        assert_eq!(classify_point(&[e.clone(), inv.clone()]), PointClass::Mixed);
        assert_eq!(classify_point(&[e.clone(), e]), PointClass::Finite);
        assert_eq!(classify_point(&[inv]), PointClass::Infinite);
    }

    #[test]
    fn csv_round_trip() {
        let cloud = SampleCloud::new(
            vec![
                Point::new(vec![c(0.1, -2.0), c(3.0, 1e-17)]),
                Point::real(&[1.0, 2.0]),
            ],
            "x",
        )
        .unwrap();
        let text = cloud.to_csv_string();
        assert!(text.starts_with("re_1,im_1,re_2,im_2\n"));
        let back = SampleCloud::read_csv(text.as_bytes(), "x").unwrap();
        assert_eq!(back, cloud);
    }

    proptest! {
        #[test]
        fn v_eps_is_monotone(
            re in -2.0f64..2.0, im in -2.0f64..2.0, e1 in 1e-6f64..2.0, extra in 1e-9f64..1.0,
        ) {
            let w = Point::new(vec![c(re, im), c(im, re)]);
            if v_eps_member(&hyperbola(), &w, e1).unwrap() {
                prop_assert!(v_eps_member(&hyperbola(), &w, e1 + extra).unwrap());
            }
        }

        #[test]
        fn delta_bound_is_monotone(
            eps in 1e-3f64..10.0, t in 1.0f64..4.0, d in 0u32..5, size in 1usize..8,
        ) {
            let base = delta_bound(eps, t, d, size).unwrap();
            prop_assert!(delta_bound(eps * 1.5, t, d, size).unwrap() > base);
            prop_assert!(delta_bound(eps, t, d, size + 1).unwrap() < base);
            prop_assert!(delta_bound(eps, t * 1.5, d + 1, size).unwrap() < base);
            prop_assert!(delta_bound(eps, t + 0.5, d, size).unwrap() <= base);
            prop_assert!(delta_bound(eps, t, d + 1, size).unwrap() <= base);
        }
    }
}
