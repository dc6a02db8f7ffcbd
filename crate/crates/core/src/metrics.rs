//! Sup-norm distances between points and point clouds, and the line pair
//! whose zero sets drift apart linearly although their coefficients stay
//! close.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{coeff_sup_distance, Complex, Point, SparsePoly};
use crate::varieties::{
    containment_check, lemma_check, sample_hypersurface, SampleCloud, DEFAULT_MEMBERSHIP_TOL,
};

/// Grid resolution used by the counterexample when none is given.
pub const DEFAULT_COUNTEREXAMPLE_GRID: usize = 241;
/// Window and grid of the bounded-region check in the counterexample.
pub const BOUNDED_HALF_WIDTH: f64 = 1.0;
pub const BOUNDED_GRID: usize = 21;
const WITNESS_MODULI: usize = 8;
const WITNESS_ANGLES: usize = 4;

/// `||w - z||_inf`.
pub fn sup_norm_dist(w: &Point, z: &Point) -> Result<f64> {
    if w.dim() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: z.dim(),
        });
    }
    Ok(w.coords()
        .iter()
        .zip(z.coords())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// `min_{z in Z} ||w - z||_inf`.
pub fn point_set_distance(w: &Point, z: &SampleCloud) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::Empty("point cloud"));
    }
    z.points()
        .iter()
        .try_fold(f64::INFINITY, |acc, p| Ok(acc.min(sup_norm_dist(w, p)?)))
}

fn directed(w: &SampleCloud, z: &SampleCloud) -> Result<f64> {
    w.points()
        .iter()
        .try_fold(0.0f64, |acc, p| Ok(acc.max(point_set_distance(p, z)?)))
}

/// Hausdorff distance of two nonempty finite clouds.
pub fn hausdorff(w: &SampleCloud, z: &SampleCloud) -> Result<f64> {
    if w.is_empty() || z.is_empty() {
        return Err(Error::Empty("point cloud"));
    }
    Ok(directed(w, z)?.max(directed(z, w)?))
}

/// `d_H(W, Z) < eps`.
pub fn is_eps_set_deformation(w: &SampleCloud, z: &SampleCloud, eps: f64) -> Result<bool> {
    Error::positive("eps", eps)?;
    Ok(hausdorff(w, z)? < eps)
}

/// `f = t2 - t1`, zero set the diagonal.
pub fn diagonal_line() -> SparsePoly {
    SparsePoly::from_terms(
        2,
        [
            (vec![0, 1], Complex::new(1.0, 0.0)),
            (vec![1, 0], Complex::new(-1.0, 0.0)),
        ],
    )
    .expect("valid terms")
}

/// `g = t2 - (1 + delta') t1`.
pub fn tilted_line(delta_prime: f64) -> SparsePoly {
    SparsePoly::from_terms(
        2,
        [
            (vec![0, 1], Complex::new(1.0, 0.0)),
            (vec![1, 0], Complex::new(-(1.0 + delta_prime), 0.0)),
        ],
    )
    .expect("valid terms")
}

/// Distance from `(w, (1 + delta') w)` to the diagonal, attained at the
/// midpoint of the two coordinates.
pub fn witness_distance(delta_prime: f64, w: Complex) -> f64 {
    delta_prime * w.norm() / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub modulus: f64,
    pub angle: f64,
    pub point: Point,
    /// Exact distance to the diagonal.
    pub analytic_distance: f64,
    /// Distance to the sampled diagonal inside `H(T)`.
    pub measured_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedCheck {
    pub half_width: f64,
    pub grid: usize,
    pub lemma_sup_deviation: f64,
    pub lemma_pass: bool,
    pub containment_violations: usize,
    pub containment_max_residual: f64,
    pub containment_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub delta_prime: f64,
    pub eps: f64,
    pub half_width: f64,
    pub grid: usize,
    pub coeff_distance: f64,
    /// `2 eps / delta'`: witnesses at least this large sit `eps` away.
    pub threshold: f64,
    /// `"witness"` or `"no witness in window"`.
    pub status: String,
    pub witnesses: Vec<Witness>,
    pub max_analytic_distance: f64,
    pub max_measured_distance: f64,
    pub diagonal_samples: usize,
    pub hausdorff_grid: usize,
    pub hausdorff: f64,
    /// `d_H >= eps` on the sampled window.
    pub hausdorff_fails: bool,
    /// Lemma and containment on the unit window, when `delta'` is inside
    /// the perturbation bound there.
    pub bounded: Option<BoundedCheck>,
}

/// Compares `V(t2 - t1)` and `V(t2 - (1 + delta') t1)` inside `H(T)`.
///
/// Witnesses `(w, (1 + delta') w)` take moduli from `2 eps / delta'` up to
/// `T / (1 + delta')` along four directions. The Hausdorff distance uses a
/// quarter-resolution grid to keep the pairwise loop small.
pub fn counterexample_report(
    delta_prime: f64,
    eps: f64,
    t: f64,
    grid: usize,
) -> Result<CounterexampleReport> {
    Error::positive("delta_prime", delta_prime)?;
    Error::positive("eps", eps)?;
    Error::positive("T", t)?;
    let f = diagonal_line();
    let g = tilted_line(delta_prime);
    let threshold = 2.0 * eps / delta_prime;
    let r_max = t / (1.0 + delta_prime);

    let diagonal = sample_hypersurface(&f, t, 1, grid, DEFAULT_MEMBERSHIP_TOL)?.cloud;
    let mut witnesses = Vec::new();
    if threshold <= r_max {
        let moduli: Vec<f64> = if threshold == r_max {
            vec![threshold]
        } else {
            let step = (r_max - threshold) / (WITNESS_MODULI - 1) as f64;
            (0..WITNESS_MODULI)
                .map(|i| {
                    if i == WITNESS_MODULI - 1 {
                        r_max
                    } else {
                        threshold + step * i as f64
                    }
                })
                .collect()
        };
        for &r in &moduli {
            for k in 0..WITNESS_ANGLES {
                let angle = k as f64 * std::f64::consts::FRAC_PI_2;
                let w = match k {
                    0 => Complex::new(r, 0.0),
                    1 => Complex::new(0.0, r),
                    2 => Complex::new(-r, 0.0),
                    _ => Complex::new(0.0, -r),
                };
                let point = Point::new(vec![w, w * (1.0 + delta_prime)]);
                let measured_distance = point_set_distance(&point, &diagonal)?;
                witnesses.push(Witness {
                    modulus: r,
                    angle,
                    point,
                    analytic_distance: witness_distance(delta_prime, w),
                    measured_distance,
                });
            }
        }
    }

    let hausdorff_grid = (grid.max(1) - 1) / 4 + 1;
    let coarse_f = sample_hypersurface(&f, t, 1, hausdorff_grid, DEFAULT_MEMBERSHIP_TOL)?.cloud;
    let coarse_g = sample_hypersurface(&g, t, 0, hausdorff_grid, DEFAULT_MEMBERSHIP_TOL)?.cloud;
    let d_h = hausdorff(&coarse_f, &coarse_g)?;

    let bounded = match lemma_check(&f, &g, BOUNDED_HALF_WIDTH, eps, BOUNDED_GRID) {
        Ok(lemma) => {
            let contain = containment_check(
                &f,
                &g,
                BOUNDED_HALF_WIDTH,
                eps,
                BOUNDED_GRID,
                DEFAULT_MEMBERSHIP_TOL,
            )?;
            Some(BoundedCheck {
                half_width: BOUNDED_HALF_WIDTH,
                grid: BOUNDED_GRID,
                lemma_sup_deviation: lemma.sup_deviation,
                lemma_pass: lemma.pass,
                containment_violations: contain.violation_count,
                containment_max_residual: contain.max_residual,
                containment_pass: contain.pass,
            })
        }
        Err(Error::NotADeformation { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(CounterexampleReport {
        delta_prime,
        eps,
        half_width: t,
        grid,
        coeff_distance: coeff_sup_distance(&f, &g)?,
        threshold,
        status: if witnesses.is_empty() {
            "no witness in window".to_string()
        } else {
            "witness".to_string()
        },
        max_analytic_distance: witnesses
            .iter()
            .map(|w| w.analytic_distance)
            .fold(0.0, f64::max),
        max_measured_distance: witnesses
            .iter()
            .map(|w| w.measured_distance)
            .fold(0.0, f64::max),
        witnesses,
        diagonal_samples: diagonal.len(),
        hausdorff_grid,
        hausdorff: d_h,
        hausdorff_fails: d_h >= eps,
        bounded,
    })
}
