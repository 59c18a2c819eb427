//! Annulus slices, dilation sets, sphere determination and the size of the
//! radii set.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::circumsphere::{radius_unchecked, MAX_DIM};
use crate::error::{Error, Result};
use crate::fit::ScalingFit;
use crate::measures::{box_dimension_of, DiscreteMeasure, PointSource};
use crate::numeric::{dist, KahanSum};
use crate::rng::{batch_rng, batches};

/// Atoms with `||x - a| - r| < δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusSlice {
    pub center: Vec<f64>,
    pub radius: f64,
    pub thickness: f64,
    /// Indices into the source measure.
    pub retained: Vec<usize>,
    pub total_mass: f64,
}

fn check_center(measure: &DiscreteMeasure, a: &[f64]) -> Result<()> {
    if a.len() != measure.dim() {
        return Err(Error::input(format!(
            "center has {} coordinates, measure lives in R^{}",
            a.len(),
            measure.dim()
        )));
    }
    if a.iter().any(|c| !c.is_finite()) {
        return Err(Error::input("non-finite center"));
    }
    Ok(())
}

fn check_thickness(measure: &DiscreteMeasure, delta: f64) -> Result<()> {
    if !(delta >= measure.resolution()) || !delta.is_finite() {
        return Err(Error::input(format!(
            "annulus thickness {delta} is below the measure resolution {}",
            measure.resolution()
        )));
    }
    Ok(())
}

/// Hard-truncated restriction of `measure` to the annulus about `a`.
pub fn annulus_mass(
    measure: &DiscreteMeasure,
    a: &[f64],
    r: f64,
    delta: f64,
) -> Result<AnnulusSlice> {
    check_center(measure, a)?;
    check_thickness(measure, delta)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::input(format!("radius {r} must be positive")));
    }
    let mut retained = Vec::new();
    let mut mass = KahanSum::new();
    for (i, (x, m)) in measure.iter().enumerate() {
        if (dist(x, a) - r).abs() < delta {
            retained.push(i);
            mass.add(m);
        }
    }
    Ok(AnnulusSlice {
        center: a.to_vec(),
        radius: r,
        thickness: delta,
        retained,
        total_mass: mass.value(),
    })
}

/// Radii at which the annulus about `a` carries mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationSet {
    pub center: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub masses: Vec<f64>,
    /// Maximal runs of member radii, each grid point standing for the cell
    /// between the midpoints to its neighbours.
    pub intervals: Vec<(f64, f64)>,
    pub lebesgue_estimate: f64,
}

/// Evaluates the annulus mass over `r_grid`; radii whose slice has positive
/// mass at least `threshold` are members.
pub fn dilation_set(
    measure: &DiscreteMeasure,
    a: &[f64],
    delta: f64,
    threshold: f64,
    r_grid: &[f64],
) -> Result<DilationSet> {
    check_center(measure, a)?;
    check_thickness(measure, delta)?;
    if !(threshold >= 0.0) {
        return Err(Error::input(format!(
            "threshold {threshold} must be nonnegative"
        )));
    }
    if r_grid.is_empty() || r_grid.iter().any(|r| !r.is_finite()) {
        return Err(Error::input("radius grid must be nonempty and finite"));
    }
    for w in r_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::input("radius grid must be strictly increasing"));
        }
        if w[1] - w[0] > delta * (1.0 + 1e-12) {
            return Err(Error::input(format!(
                "radius grid spacing {} exceeds the annulus thickness {delta}",
                w[1] - w[0]
            )));
        }
    }

    let mut by_dist: Vec<(f64, f64)> = measure.iter().map(|(x, m)| (dist(x, a), m)).collect();
    by_dist.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut prefix = Vec::with_capacity(by_dist.len() + 1);
    let mut acc = KahanSum::new();
    prefix.push(0.0);
    for &(_, m) in &by_dist {
        acc.add(m);
        prefix.push(acc.value());
    }
    let slices: Vec<(usize, f64)> = r_grid
        .par_iter()
        .map(|&r| {
            let lo = by_dist.partition_point(|p| p.0 <= r - delta);
            let hi = by_dist.partition_point(|p| p.0 < r + delta);
            if hi > lo {
                (hi - lo, (prefix[hi] - prefix[lo]).max(0.0))
            } else {
                (0, 0.0)
            }
        })
        .collect();
    let masses: Vec<f64> = slices.iter().map(|s| s.1).collect();
    let member: Vec<bool> = slices
        .iter()
        .map(|&(n, m)| n > 0 && m >= threshold)
        .collect();

    let n = r_grid.len();
    let left = |i: usize| {
        if i == 0 {
            r_grid[0]
        } else {
            0.5 * (r_grid[i - 1] + r_grid[i])
        }
    };
    let right = |i: usize| {
        if i + 1 == n {
            r_grid[n - 1]
        } else {
            0.5 * (r_grid[i] + r_grid[i + 1])
        }
    };
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < n {
        if !member[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && member[i + 1] {
            i += 1;
        }
        intervals.push((left(start), right(i)));
        i += 1;
    }
    let lebesgue_estimate = intervals.iter().map(|(a, b)| b - a).sum();
    Ok(DilationSet {
        center: a.to_vec(),
        r_grid: r_grid.to_vec(),
        masses,
        intervals,
        lebesgue_estimate,
    })
}

/// Every point other than `a` lies on some sphere about `a`, so the only
/// invalid centers are those sitting on an atom (within half the resolution).
pub fn center_validity(measure: &DiscreteMeasure, a: &[f64]) -> bool {
    let tol = measure.resolution() / 2.0;
    measure
        .iter()
        .all(|(x, _)| x.len() != a.len() || dist(x, a) > tol)
}

/// Box-counting slope of the atoms retained by an annulus slice.
///
/// Scales must be at least `δ` (and the cell size): below the thickness the
/// count resolves the annulus itself and sees the full dimension of the set.
pub fn intersection_dimension(
    measure: &DiscreteMeasure,
    a: &[f64],
    r: f64,
    delta: f64,
    scales: &[f64],
) -> Result<ScalingFit> {
    let slice = annulus_mass(measure, a, r, delta)?;
    if slice.retained.is_empty() {
        return Err(Error::input(format!(
            "annulus of radius {r} retains no atoms"
        )));
    }
    let pts: Vec<&[f64]> = slice.retained.iter().map(|&i| measure.point(i)).collect();
    let side = measure.cell_sides().iter().fold(delta, |m, &s| m.max(s));
    let finest = scales.iter().copied().fold(f64::INFINITY, f64::min);
    if finest.is_finite()
        && finest >= side * (1.0 - 1e-9)
        && crate::measures::occupied_boxes(pts.iter().copied(), measure.dim(), finest) < 3
    {
        return Err(Error::Fit(
            "slice occupies fewer than 3 boxes at the finest scale".into(),
        ));
    }
    box_dimension_of(pts, measure.dim(), side, scales)
}

/// Number of occupied boxes of side `scale` in an annulus slice.
pub fn slice_boxes(measure: &DiscreteMeasure, slice: &AnnulusSlice, scale: f64) -> usize {
    crate::measures::occupied_boxes(
        slice.retained.iter().map(|&i| measure.point(i)),
        measure.dim(),
        scale,
    )
}

/// Outcome of fitting one sphere through a point set.
#[derive(Debug, Clone, PartialEq)]
pub enum SphereFit {
    Sphere {
        center: Vec<f64>,
        radius: f64,
        /// Largest `||x - c| - r|`.
        residual: f64,
    },
    /// The points do not pin down a unique sphere (they lie in a hyperplane).
    Ambiguous,
    /// No sphere passes through all points within the tolerance.
    Inconsistent { residual: f64 },
}

/// Relative singular-value cutoff for the linearized sphere system.
const RANK_TOL: f64 = 1e-9;

/// Least-squares solution of `|x|^2 = 2 x·c + k` with `k = r^2 - |c|^2`.
pub fn unique_sphere_fit(points: &[&[f64]], tol: f64) -> Result<SphereFit> {
    let d = points.first().map_or(0, |p| p.len());
    if d == 0 || points.len() < d + 1 {
        return Err(Error::input(format!(
            "sphere fitting in R^{d} needs at least {} points, got {}",
            d + 1,
            points.len()
        )));
    }
    if points
        .iter()
        .any(|p| p.len() != d || p.iter().any(|c| !c.is_finite()))
    {
        return Err(Error::input(
            "points must be finite and share one dimension",
        ));
    }
    let n = points.len();
    let mean: Vec<f64> = (0..d)
        .map(|k| points.iter().map(|p| p[k]).sum::<f64>() / n as f64)
        .collect();
    let scale = points.iter().map(|p| dist(p, &mean)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(SphereFit::Ambiguous);
    }
    let mut a = DMatrix::<f64>::zeros(n, d + 1);
    let mut b = DVector::<f64>::zeros(n);
    for (i, p) in points.iter().enumerate() {
        let mut sq = 0.0;
        for k in 0..d {
            let u = (p[k] - mean[k]) / scale;
            a[(i, k)] = 2.0 * u;
            sq += u * u;
        }
        a[(i, d)] = 1.0;
        b[i] = sq;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * smax)
        .count();
    if rank < d + 1 {
        return Ok(SphereFit::Ambiguous);
    }
    let sol = svd
        .solve(&b, RANK_TOL * smax)
        .map_err(|e| Error::input(e.to_string()))?;
    let c_rel: Vec<f64> = (0..d).map(|k| sol[k]).collect();
    let r2 = sol[d] + c_rel.iter().map(|c| c * c).sum::<f64>();
    if !(r2 > 0.0) {
        return Ok(SphereFit::Inconsistent {
            residual: f64::INFINITY,
        });
    }
    let center: Vec<f64> = (0..d).map(|k| mean[k] + scale * c_rel[k]).collect();
    let radius = scale * r2.sqrt();
    let residual = points
        .iter()
        .map(|p| (dist(p, &center) - radius).abs())
        .fold(0.0, f64::max);
    Ok(if residual > tol {
        SphereFit::Inconsistent { residual }
    } else {
        SphereFit::Sphere {
            center,
            radius,
            residual,
        }
    })
}

/// Default cap on tuples for [`radii_set_measure`].
pub const DEFAULT_RADII_BUDGET: u128 = 1 << 24;

/// Covered length of `∪ (R - ε, R + ε)` over collected radii.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveredLength {
    pub epsilon: f64,
    pub covered_length: f64,
    /// Nondegenerate radii contributing.
    pub radii: usize,
    pub exhaustive: bool,
}

/// Covering estimates of `R(E × ... × E)` per ε.
///
/// Unordered tuples of distinct atoms are enumerated when their number is
/// within `budget`; otherwise `budget` tuples are sampled.
pub fn radii_set_measure(
    measure: &DiscreteMeasure,
    epsilon_grid: &[f64],
    budget: u128,
    seed: u64,
) -> Result<Vec<CoveredLength>> {
    radii_set_measure_with(measure, epsilon_grid, budget, seed, None)
}

/// As [`radii_set_measure`], ignoring radii above `max_radius`.
pub fn radii_set_measure_with(
    measure: &DiscreteMeasure,
    epsilon_grid: &[f64],
    budget: u128,
    seed: u64,
    max_radius: Option<f64>,
) -> Result<Vec<CoveredLength>> {
    if epsilon_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::input("every ε must be positive"));
    }
    let (mut radii, exhaustive) = collect_radii(measure, budget, seed)?;
    if let Some(cap) = max_radius {
        radii.retain(|&r| r <= cap);
    }
    radii.sort_by(f64::total_cmp);
    Ok(epsilon_grid
        .iter()
        .map(|&eps| CoveredLength {
            epsilon: eps,
            covered_length: union_length(&radii, eps),
            radii: radii.len(),
            exhaustive,
        })
        .collect())
}

/// Length of `∪ (r - ε, r + ε)` for sorted `radii`.
pub fn union_length(sorted: &[f64], eps: f64) -> f64 {
    let mut total = KahanSum::new();
    let mut cur: Option<(f64, f64)> = None;
    for &r in sorted {
        let (lo, hi) = (r - eps, r + eps);
        cur = match cur {
            Some((a, b)) if lo <= b => Some((a, b.max(hi))),
            Some((a, b)) => {
                total.add(b - a);
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((a, b)) = cur {
        total.add(b - a);
    }
    total.value()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn collect_radii(measure: &DiscreteMeasure, budget: u128, seed: u64) -> Result<(Vec<f64>, bool)> {
    let d = measure.dim();
    if d == 0 || d > MAX_DIM {
        return Err(Error::input(format!("unsupported dimension {d}")));
    }
    let n = measure.len();
    let k = d + 1;
    if binomial(n as u128, k as u128) <= budget {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut out = Vec::new();
                let mut idx = [0usize; MAX_DIM + 1];
                idx[0] = i;
                combos(measure, d, &mut idx, 1, &mut out);
                out
            })
            .collect();
        return Ok((rows.concat(), true));
    }
    let samples =
        usize::try_from(budget).map_err(|_| Error::input("sample budget does not fit in usize"))?;
    let sampler = measure.sampler(false);
    let rows: Vec<Vec<f64>> = batches(samples)
        .into_par_iter()
        .map(|(b, len)| {
            let mut rng = batch_rng(seed, b);
            let mut pts = [[0.0; MAX_DIM]; MAX_DIM + 1];
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                for p in pts.iter_mut().take(k) {
                    sampler.sample_into(&mut rng, &mut p[..d]);
                }
                let refs: [&[f64]; MAX_DIM + 1] = std::array::from_fn(|j| &pts[j][..d]);
                let r = radius_unchecked(&refs[..k], d);
                if r > 0.0 {
                    out.push(r);
                }
            }
            out
        })
        .collect();
    Ok((rows.concat(), false))
}

fn combos(
    mu: &DiscreteMeasure,
    d: usize,
    idx: &mut [usize; MAX_DIM + 1],
    level: usize,
    out: &mut Vec<f64>,
) {
    if level == d + 1 {
        let pts: [&[f64]; MAX_DIM + 1] = std::array::from_fn(|j| mu.point(idx[j.min(d)]));
        let r = radius_unchecked(&pts[..=d], d);
        if r > 0.0 {
            out.push(r);
        }
        return;
    }
    for j in idx[level - 1] + 1..mu.len() {
        idx[level] = j;
        combos(mu, d, idx, level + 1, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_examples() {
        let mu = DiscreteMeasure::dirac(&[1.0, 0.0]);
        for delta in [1e-6, 0.1, 2.0] {
            assert_eq!(
                annulus_mass(&mu, &[0.0, 0.0], 1.0, delta)
                    .unwrap()
                    .total_mass,
                1.0
            );
        }
        assert_eq!(
            annulus_mass(&mu, &[0.0, 0.0], 3.0, 0.5).unwrap().total_mass,
            0.0
        );
        let circle = DiscreteMeasure::uniform_circle(64);
        assert!(annulus_mass(&circle, &[0.0, 0.0], 1.0, 1e-4).is_err());
    }

    #[test]
    fn dilation_set_of_circle() {
        let circle = DiscreteMeasure::uniform_circle(256);
        let delta = 0.05;
        let grid: Vec<f64> = (0..=3000).map(|k| k as f64 * 0.001).collect();
        let g = dilation_set(&circle, &[0.0, 0.0], delta, 0.0, &grid).unwrap();
        assert_eq!(g.intervals.len(), 1);
        let (lo, hi) = g.intervals[0];
        assert!(
            (lo - 0.95).abs() < 2e-3 && (hi - 1.05).abs() < 2e-3,
            "{lo} {hi}"
        );
        assert!((g.lebesgue_estimate - 2.0 * delta).abs() < 2e-3);
    }

    #[test]
    fn dilation_set_of_two_atoms() {
        let mu = DiscreteMeasure::uniform_on(2, &[1.0, 0.0, 0.0, 2.0], 1e-3).unwrap();
        let grid: Vec<f64> = (0..=3000).map(|k| k as f64 * 0.001).collect();
        let g = dilation_set(&mu, &[0.0, 0.0], 0.1, 0.0, &grid).unwrap();
        assert_eq!(g.intervals.len(), 2);
        assert!(
            (g.lebesgue_estimate - 0.4).abs() < 5e-3,
            "{:?}",
            g.intervals
        );
        let coarse = [0.0, 1.0, 2.0];
        assert!(dilation_set(&mu, &[0.0, 0.0], 0.1, 0.0, &coarse).is_err());
    }

    #[test]
    fn center_validity_examples() {
        let mu = DiscreteMeasure::uniform_on(2, &[0.0, 0.0, 1.0, 0.0], 0.01).unwrap();
        assert!(center_validity(&mu, &[0.5, 0.5]));
        assert!(!center_validity(&mu, &[1.0, 0.0]));
        assert!(!center_validity(&mu, &[1.0, 0.004]));
    }

    #[test]
    fn circle_slice_is_one_dimensional() {
        let circle = DiscreteMeasure::uniform_circle(8192);
        let scales: Vec<f64> = (2..8).map(|k| 0.5f64.powi(k)).collect();
        let fit = intersection_dimension(&circle, &[0.0, 0.0], 1.0, 0.005, &scales).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.1, "{}", fit.slope);
    }

    #[test]
    fn single_atom_slice_cannot_be_fitted() {
        let mu = DiscreteMeasure::uniform_on(2, &[1.0, 0.0, 5.0, 5.0], 1e-3).unwrap();
        let scales = [0.5, 0.25, 0.125];
        assert!(intersection_dimension(&mu, &[0.0, 0.0], 1.0, 0.01, &scales).is_err());
        assert!(intersection_dimension(&mu, &[0.0, 0.0], 3.0, 0.01, &scales).is_err());
    }

    #[test]
    fn sphere_fit_examples() {
        let pts: [&[f64]; 5] = [
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[-1.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0],
        ];
        match unique_sphere_fit(&pts, 1e-9).unwrap() {
            SphereFit::Sphere { center, radius, .. } => {
                assert!(center.iter().all(|c| c.abs() < 1e-12));
                assert!((radius - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let equator: [&[f64]; 5] = [
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[-1.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0],
            &[h, h, 0.0],
        ];
        assert_eq!(
            unique_sphere_fit(&equator, 1e-9).unwrap(),
            SphereFit::Ambiguous
        );
        let off: [&[f64]; 4] = [&[0.0, 0.0], &[2.0, 0.0], &[1.0, 1.0], &[5.0, 5.0]];
        assert!(matches!(
            unique_sphere_fit(&off, 1e-6).unwrap(),
            SphereFit::Inconsistent { .. }
        ));
        assert!(unique_sphere_fit(&off[..2], 1e-6).is_err());
    }

    #[test]
    fn radii_set_examples() {
        let tri = DiscreteMeasure::uniform_on(2, &[0.0, 0.0, 2.0, 0.0, 1.0, 1.0], 1e-3).unwrap();
        let out = radii_set_measure(&tri, &[0.1, 0.01], DEFAULT_RADII_BUDGET, 0).unwrap();
        for c in &out {
            assert!((c.covered_length - 2.0 * c.epsilon).abs() < 1e-15);
            assert!(c.exhaustive);
        }
        let line: Vec<f64> = (0..40)
            .flat_map(|k| [k as f64 * 0.1, 0.3 * k as f64 * 0.1])
            .collect();
        let on_line = DiscreteMeasure::uniform_on(2, &line, 1e-3).unwrap();
        for budget in [DEFAULT_RADII_BUDGET, 5000] {
            let out = radii_set_measure(&on_line, &[0.1, 0.01], budget, 3).unwrap();
            assert!(out.iter().all(|c| c.covered_length == 0.0));
        }
    }

    #[test]
    fn union_length_merges_overlaps() {
        assert_eq!(union_length(&[], 0.1), 0.0);
        assert!((union_length(&[1.0, 1.1, 3.0], 0.1) - 0.5).abs() < 1e-15);
    }
}
