//! Optimal eps-alignment of root multisets.
//!
//! Two multisets of equal size are eps-aligned when some bijection moves no
//! root by `eps` or more. The best bijection minimizes the largest matched
//! distance (a bottleneck assignment). It is found by binary search over the
//! sorted pairwise distances, testing each threshold with an augmenting-path
//! perfect matching.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{unit_disc_sample, Complex};
use crate::uniroots::{find_roots, RootMultiset, UniPoly, DEFAULT_TOL};

/// Smallest delta tried by [`empirical_modulus`].
pub const MODULUS_FLOOR: f64 = 1e-12;
/// Bisection stops once `hi / lo` drops below this ratio.
const MODULUS_RATIO: f64 = 1.001;

/// `perm[i] = j` pairs the i-th value of the first multiset with the j-th of
/// the second.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub perm: Vec<usize>,
    pub bottleneck: f64,
}

/// Bottleneck-optimal bijection between the expanded multisets.
pub fn bottleneck_match(a: &RootMultiset, b: &RootMultiset) -> Result<Matching> {
    bottleneck_match_values(&a.expanded(), &b.expanded())
}

pub fn bottleneck_match_values(a: &[Complex], b: &[Complex]) -> Result<Matching> {
    let n = a.len();
    if n != b.len() {
        return Err(Error::SizeMismatch {
            left: n,
            right: b.len(),
        });
    }
    if n == 0 {
        return Ok(Matching {
            perm: Vec::new(),
            bottleneck: 0.0,
        });
    }
    let dist: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    let mut levels: Vec<f64> = dist.iter().flatten().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    // the largest level always admits a perfect matching
    let (mut lo, mut hi) = (0, levels.len() - 1);
    let mut best = perfect_matching(&dist, levels[hi]).expect("complete graph");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match perfect_matching(&dist, levels[mid]) {
            Some(perm) => {
                best = perm;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    if best
        .iter()
        .enumerate()
        .any(|(i, &j)| dist[i][j] > levels[lo])
    {
        best = perfect_matching(&dist, levels[lo]).expect("feasible level");
    }
    let bottleneck = best
        .iter()
        .enumerate()
        .map(|(i, &j)| dist[i][j])
        .fold(0.0, f64::max);
    Ok(Matching {
        perm: best,
        bottleneck,
    })
}

/// Kuhn's augmenting paths on the graph of edges with `dist <= threshold`.
fn perfect_matching(dist: &[Vec<f64>], threshold: f64) -> Option<Vec<usize>> {
    let n = dist.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];

    fn augment(
        i: usize,
        dist: &[Vec<f64>],
        threshold: f64,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..dist.len() {
            if dist[i][j] <= threshold && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, dist, threshold, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }

    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, dist, threshold, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut perm = vec![0; n];
    for (j, i) in owner.into_iter().enumerate() {
        perm[i.expect("perfect")] = j;
    }
    Some(perm)
}

/// Whether the optimal bottleneck is strictly below `eps`.
pub fn is_eps_aligned(a: &RootMultiset, b: &RootMultiset, eps: f64) -> Result<bool> {
    Error::positive("eps", eps)?;
    Ok(bottleneck_match(a, b)?.bottleneck < eps)
}

/// A strict `delta`-deformation of every coefficient `a_0..a_n` of `f`,
/// zero coefficients included. The leading coefficient moves by less than
/// `|a_n|` so the degree is kept. Randomness depends on `(seed, trial)` only.
pub fn deform_unipoly(f: &UniPoly, delta: f64, seed: u64, trial: u64) -> Result<UniPoly> {
    Error::positive("delta", delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let n = f.degree();
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let cap = if i == n { delta.min(a.norm()) } else { delta };
            a + unit_disc_sample(&mut rng) * (cap * (1.0 - 1e-9))
        })
        .collect();
    UniPoly::new(coeffs)
}

/// One delta tested during the modulus search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub delta: f64,
    pub aligned: bool,
    /// Largest bottleneck among the trials run at this delta.
    pub worst_bottleneck: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub eps: f64,
    pub trials: usize,
    pub seed: u64,
    /// Largest tested delta at which every trial was eps-aligned.
    pub delta: f64,
    pub probes: Vec<Probe>,
}

/// Largest tested `delta` in `[1e-12, eps]` for which `trials` random
/// delta-deformations of `f` all stay eps-aligned with `f`, by log-scale
/// bisection.
pub fn empirical_modulus(f: &UniPoly, eps: f64, trials: usize, seed: u64) -> Result<f64> {
    Ok(empirical_modulus_report(f, eps, trials, seed)?.delta)
}

pub fn empirical_modulus_report(
    f: &UniPoly,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<ModulusReport> {
    Error::positive("eps", eps)?;
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            requirement: "at least 1",
            value: 0.0,
        });
    }
    let reference = find_roots(f, DEFAULT_TOL)?.expanded();
    let mut probes = Vec::new();
    let mut probe = |delta: f64| -> Result<bool> {
        let mut worst = 0.0f64;
        let mut aligned = true;
        for trial in 0..trials {
            let found = deform_unipoly(f, delta, seed, trial as u64)
                .and_then(|g| find_roots(&g, DEFAULT_TOL))
                .map_err(|e| Error::Trial {
                    trial,
                    delta,
                    source: Box::new(e),
                })?;
            let b = bottleneck_match_values(&reference, &found.expanded())?.bottleneck;
            worst = worst.max(b);
            if b >= eps {
                aligned = false;
                break;
            }
        }
        probes.push(Probe {
            delta,
            aligned,
            worst_bottleneck: worst,
        });
        Ok(aligned)
    };

    let delta = if probe(eps)? {
        eps
    } else if !probe(MODULUS_FLOOR)? {
        return Err(Error::NoAlignedDelta {
            floor: MODULUS_FLOOR,
        });
    } else {
        let (mut lo, mut hi) = (MODULUS_FLOOR, eps);
        while hi / lo > MODULUS_RATIO {
            let mid = (lo * hi).sqrt();
            if probe(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(ModulusReport {
        eps,
        trials,
        seed,
        delta,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::random_deformation;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn ms(v: &[Complex]) -> RootMultiset {
        RootMultiset::from_values(v)
    }

    /// Minimum over all n! bijections of the maximum matched distance.
    fn brute_force_bottleneck(a: &[Complex], b: &[Complex]) -> f64 {
        fn rec(
            a: &[Complex],
            b: &[Complex],
            used: &mut Vec<bool>,
            i: usize,
            cur: f64,
            best: &mut f64,
        ) {
            if i == a.len() {
                *best = best.min(cur);
                return;
            }
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    rec(a, b, used, i + 1, cur.max((a[i] - b[j]).norm()), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
        if a.is_empty() {
            0.0
        } else {
            best
        }
    }

    #[test]
    fn matching_examples() {
        let m = bottleneck_match(
            &ms(&[c(0.0, 0.0), c(1.0, 0.0)]),
            &ms(&[c(0.1, 0.0), c(1.05, 0.0)]),
        )
        .unwrap();
        assert_eq!(m.perm, vec![0, 1]);
        assert_eq!(m.bottleneck, 0.1);
        assert_eq!(
            m.bottleneck,
            brute_force_bottleneck(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.1, 0.0), c(1.05, 0.0)])
        );

        let a = ms(&[c(2.0, 1.0), c(-3.0, 0.5), c(0.0, 0.0)]);
        assert_eq!(bottleneck_match(&a, &a).unwrap().bottleneck, 0.0);

        let m = bottleneck_match(
            &ms(&[c(1.0, 0.0), c(-1.0, 0.0)]),
            &ms(&[c(0.0, 1.0), c(0.0, -1.0)]),
        )
        .unwrap();
        assert!((m.bottleneck - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn matching_expands_multiplicities() {
        let mut a = ms(&[c(1.0, 0.0)]);
        a.roots[0].multiplicity = 2;
        let b = ms(&[c(1.0, 0.01), c(1.0, -0.02)]);
        let m = bottleneck_match(&a, &b).unwrap();
        assert_eq!(m.perm.len(), 2);
        assert!((m.bottleneck - 0.02).abs() < 1e-15);
        assert!(bottleneck_match(&ms(&[c(1.0, 0.0)]), &b).is_err());
    }

    #[test]
    fn alignment_is_strict() {
        let a = ms(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let b = ms(&[c(0.1, 0.0), c(1.05, 0.0)]);
        assert!(is_eps_aligned(&a, &b, 0.2).unwrap());
        assert!(!is_eps_aligned(&a, &b, 0.1).unwrap());
        assert!(is_eps_aligned(&a, &a, 1e-300).unwrap());
        assert!(is_eps_aligned(&a, &b, 0.0).is_err());
    }

    #[test]
    fn deformation_keeps_degree_and_is_strict() {
        let f = UniPoly::from_real(&[-1.0, 0.0, 1e-3]).unwrap();
        for trial in 0..50 {
            let g = deform_unipoly(&f, 0.5, 7, trial).unwrap();
            assert_eq!(g.degree(), 2);
            let d = crate::polycore::coeff_sup_distance(&f.to_sparse(), &g.to_sparse()).unwrap();
            assert!(d < 0.5);
        }
        assert_eq!(
            deform_unipoly(&f, 0.1, 3, 4).unwrap(),
            deform_unipoly(&f, 0.1, 3, 4).unwrap()
        );
    }

    /// Largest delta on a decade grid with 10 points per decade at which every
    /// trial aligns, using brute-force alignment.
    fn grid_oracle(f: &UniPoly, eps: f64, trials: usize, seed: u64) -> f64 {
        let reference = find_roots(f, DEFAULT_TOL).unwrap().expanded();
        let mut best = 0.0;
        for k in 0..=100 {
            let delta = eps * 10f64.powf(-(k as f64) / 10.0);
            let ok = (0..trials).all(|t| {
                let g = deform_unipoly(f, delta, seed, t as u64).unwrap();
                let roots = find_roots(&g, DEFAULT_TOL).unwrap().expanded();
                brute_force_bottleneck(&reference, &roots) < eps
            });
            if ok {
                best = delta;
                break;
            }
        }
        best
    }

    #[test]
    fn modulus_of_simple_roots() {
        let f = UniPoly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let delta = empirical_modulus(&f, 0.01, 16, 1).unwrap();
        assert!((1e-4..=1e-2).contains(&delta), "delta = {delta}");
        let oracle = grid_oracle(&f, 0.01, 16, 1);
        assert!(
            delta >= oracle * 0.99 && delta <= oracle * 10f64.powf(0.1) * 1.01,
            "{delta} vs {oracle}"
        );
        assert_eq!(delta, empirical_modulus(&f, 0.01, 16, 1).unwrap());
    }

    #[test]
    fn modulus_of_double_root() {
        let f = UniPoly::from_real(&[1.0, -2.0, 1.0]).unwrap();
        let delta = empirical_modulus(&f, 0.01, 16, 1).unwrap();
        assert!(delta <= 1e-4, "delta = {delta}");
        let oracle = grid_oracle(&f, 0.01, 16, 1);
        assert!(
            delta >= oracle * 0.99 && delta <= oracle * 10f64.powf(0.1) * 1.01,
            "{delta} vs {oracle}"
        );
    }

    #[test]
    fn modulus_rejects_zero_trials() {
        let f = UniPoly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        assert!(empirical_modulus(&f, 0.01, 0, 1).is_err());
        assert!(empirical_modulus(&f, -0.01, 3, 1).is_err());
    }

    #[test]
    fn continuity_witness_for_simple_roots() {
        let f =
            UniPoly::from_roots(c(1.0, 0.0), &[c(0.5, 0.5), c(-1.0, 0.0), c(0.0, -2.0)]).unwrap();
        let reference = find_roots(&f, DEFAULT_TOL).unwrap();
        let sparse = f.to_sparse();
        let mut previous = f64::INFINITY;
        for k in 3..=8 {
            let g = random_deformation(&sparse, 10f64.powi(-k), 11).unwrap();
            let roots = find_roots(&UniPoly::from_sparse(&g).unwrap(), DEFAULT_TOL).unwrap();
            let b = bottleneck_match(&reference, &roots).unwrap().bottleneck;
            assert!(b <= 2.0 * previous, "k = {k}: {b} after {previous}");
            previous = b;
        }
        assert!(previous < 1e-4);
    }

    fn arb_points(n: usize) -> impl Strategy<Value = Vec<Complex>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
            .prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<Complex>, Vec<Complex>)> {
        (1usize..=6).prop_flat_map(|n| (arb_points(n), arb_points(n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matches_brute_force((a, b) in arb_pair()) {
            let m = bottleneck_match_values(&a, &b).unwrap();
            prop_assert_eq!(m.bottleneck, brute_force_bottleneck(&a, &b));
            let mut seen = m.perm.clone();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..a.len()).collect::<Vec<_>>());
        }

        #[test]
        fn bottleneck_is_symmetric((a, b) in arb_pair()) {
            prop_assert_eq!(
                bottleneck_match_values(&a, &b).unwrap().bottleneck,
                bottleneck_match_values(&b, &a).unwrap().bottleneck
            );
        }

        #[test]
        fn alignment_is_monotone_in_eps((a, b) in arb_pair(), e1 in 1e-3f64..2.0, extra in 0.0f64..1.0) {
            let (a, b) = (ms(&a), ms(&b));
            if is_eps_aligned(&a, &b, e1).unwrap() {
                prop_assert!(is_eps_aligned(&a, &b, e1 + extra + 1e-12).unwrap());
            }
        }
    }
}
