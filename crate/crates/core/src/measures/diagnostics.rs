use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{FitPoint, ScalingFit};
use crate::measures::discrete::PointSource;
use crate::measures::DiscreteMeasure;
use crate::rng::{batch_rng, batches};

/// Points drawn by [`sample`].
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub dim: usize,
    /// Row-major coordinates.
    pub points: Vec<f64>,
    /// True when draws were spread uniformly inside their generation cells.
    pub jittered: bool,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

/// Draws `count` i.i.d. points; identical output for identical `seed`
/// regardless of the rayon pool size.
pub fn sample(measure: &DiscreteMeasure, count: usize, seed: u64, jitter: bool) -> Samples {
    let sampler = measure.sampler(jitter);
    Samples {
        dim: measure.dim(),
        points: draw(&sampler, count, seed),
        jittered: jitter,
    }
}

/// Batched draws from any [`PointSource`].
pub fn draw<S: PointSource>(source: &S, count: usize, seed: u64) -> Vec<f64> {
    let d = source.dim();
    let chunks: Vec<Vec<f64>> = batches(count)
        .into_par_iter()
        .map(|(idx, len)| {
            let mut rng = batch_rng(seed, idx);
            let mut buf = vec![0.0; len * d];
            for p in buf.chunks_exact_mut(d) {
                source.sample_into(&mut rng, p);
            }
            buf
        })
        .collect();
    chunks.concat()
}

/// Largest observed `μ(B(x, r)) / r^s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrostmanReport {
    pub ratio: f64,
    /// Radius where the maximum was attained.
    pub radius: f64,
    pub center: usize,
}

/// Radii probed per center, log-spaced from the resolution to the diameter.
const FROSTMAN_RADII: usize = 24;

/// Samples centers from the measure and scans closed balls with radii
/// log-spaced in `[resolution, diameter]`. The plan depends only on the
/// measure, `trials` and `seed`, never on `s`.
pub fn frostman_ratio(
    measure: &DiscreteMeasure,
    s: f64,
    trials: usize,
    seed: u64,
) -> Result<FrostmanReport> {
    if !(s > 0.0 && s <= measure.dim() as f64) {
        return Err(Error::Domain(format!(
            "Frostman exponent {s} outside (0, {}]",
            measure.dim()
        )));
    }
    let h = measure.resolution();
    let diam = measure.diameter().max(h);
    let radii: Vec<f64> = (0..FROSTMAN_RADII)
        .map(|k| h * (diam / h).powf(k as f64 / (FROSTMAN_RADII - 1) as f64))
        .collect();
    let centers = draw_indices(measure, trials, seed);
    let best = centers
        .par_iter()
        .map(|&c| {
            let x = measure.point(c);
            let mut dm: Vec<(f64, f64)> = measure
                .iter()
                .map(|(p, m)| (crate::numeric::dist(p, x), m))
                .collect();
            dm.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut prefix = Vec::with_capacity(dm.len());
            let mut acc = crate::numeric::KahanSum::new();
            for &(_, m) in &dm {
                acc.add(m);
                prefix.push(acc.value());
            }
            let mut best = FrostmanReport {
                ratio: 0.0,
                radius: radii[0],
                center: c,
            };
            for &r in &radii {
                let k = dm.partition_point(|e| e.0 <= r);
                let mass = if k == 0 { 0.0 } else { prefix[k - 1] };
                let ratio = mass / r.powf(s);
                if ratio > best.ratio {
                    best = FrostmanReport {
                        ratio,
                        radius: r,
                        center: c,
                    };
                }
            }
            best
        })
        .reduce_with(|a, b| {
            if b.ratio > a.ratio || (b.ratio == a.ratio && b.center < a.center) {
                b
            } else {
                a
            }
        });
    best.ok_or_else(|| Error::input("frostman_ratio needs at least one trial"))
}

fn draw_indices(measure: &DiscreteMeasure, trials: usize, seed: u64) -> Vec<usize> {
    use rand::distributions::{Distribution, WeightedIndex};
    let w = WeightedIndex::new(measure.masses()).expect("positive masses");
    let mut rng = batch_rng(seed, 0);
    (0..trials).map(|_| w.sample(&mut rng)).collect()
}

/// Occupied boxes of side `scale` on the grid anchored at the origin.
pub fn occupied_boxes<'a, I>(points: I, dim: usize, scale: f64) -> usize
where
    I: Iterator<Item = &'a [f64]>,
{
    let mut keys: Vec<i64> = Vec::new();
    for p in points {
        for c in p {
            keys.push((c / scale).floor() as i64);
        }
    }
    let n = keys.len() / dim.max(1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| keys[a * dim..(a + 1) * dim].cmp(&keys[b * dim..(b + 1) * dim]));
    let mut count = 0;
    let mut prev: Option<&[i64]> = None;
    for &i in &idx {
        let k = &keys[i * dim..(i + 1) * dim];
        if prev != Some(k) {
            count += 1;
            prev = Some(k);
        }
    }
    count
}

/// Box-counting slope of `log N(scale)` against `log(1/scale)`.
///
/// Scales must be at least the largest cell side: below that the count
/// saturates at the atom count.
pub fn box_dimension(measure: &DiscreteMeasure, scales: &[f64]) -> Result<ScalingFit> {
    let side = measure.cell_sides().iter().fold(0.0_f64, |a, &b| a.max(b));
    box_dimension_of(
        measure.coords().chunks_exact(measure.dim()).collect(),
        measure.dim(),
        side,
        scales,
    )
}

pub(crate) fn box_dimension_of(
    points: Vec<&[f64]>,
    dim: usize,
    min_scale: f64,
    scales: &[f64],
) -> Result<ScalingFit> {
    if scales.len() < 3 {
        return Err(Error::input(format!(
            "box counting needs at least 3 scales, got {}",
            scales.len()
        )));
    }
    for &s in scales {
        if !(s > 0.0) || s < min_scale * (1.0 - 1e-9) {
            return Err(Error::input(format!(
                "scale {s} below the measure's cell size {min_scale}"
            )));
        }
    }
    let fit_points: Vec<FitPoint> = scales
        .par_iter()
        .map(|&s| FitPoint {
            x: 1.0 / s,
            value: occupied_boxes(points.iter().copied(), dim, s) as f64,
            stderr: 0.0,
        })
        .collect();
    ScalingFit::from_points(fit_points, 3)
}
