//! Incidence statistics `(ν × ... × ν){|R - t| < ε}` and their ε-scaling.

use rayon::prelude::*;

use crate::circumsphere::{radius_unchecked, MAX_DIM};
use crate::error::{Error, Result};
use crate::fit::{FitPoint, ScalingFit};
use crate::measures::{DiscreteMeasure, PointSource};
use crate::numeric::KahanSum;
use crate::rng::{batch_rng, batches};

pub use crate::fit::fit_scaling_exponent;
pub use crate::sharpness::adversarial_conditional_profile;

/// Default cap on evaluated tuples.
pub const DEFAULT_TUPLE_BUDGET: u128 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    MonteCarlo,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::MonteCarlo => "monte-carlo",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "monte-carlo" | "mc" => Ok(Mode::MonteCarlo),
            other => Err(Error::input(format!("unknown incidence mode `{other}`"))),
        }
    }
}

/// A radius window `|R - t| < ε` and how to evaluate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidenceQuery {
    pub t: f64,
    pub epsilon: f64,
    pub mode: Mode,
    /// Tuple cap for exhaustive mode; sample count for Monte Carlo.
    pub budget: u128,
    pub seed: u64,
}

impl IncidenceQuery {
    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::input(format!(
                "target radius {} must be positive",
                self.t
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::input(format!(
                "tolerance {} must be positive",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidenceEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub tuples_evaluated: u128,
}

#[inline]
fn in_window(r: f64, t: f64, eps: f64) -> bool {
    (r - t).abs() < eps
}

/// Estimates the product-measure mass of tuples with `|R - t| < ε`.
///
/// Exhaustive mode enumerates ordered tuples with repetition; tuples that
/// repeat a point are degenerate (`R = 0`) and count only when `t < ε`.
pub fn incidence_statistic(
    measure: &DiscreteMeasure,
    query: &IncidenceQuery,
) -> Result<IncidenceEstimate> {
    query.validate()?;
    let windows = [(query.t, query.epsilon)];
    let out = match query.mode {
        Mode::Exhaustive => exhaustive_windows(measure, &windows, query.budget)?,
        Mode::MonteCarlo => {
            let n = usize::try_from(query.budget)
                .map_err(|_| Error::input("sample budget does not fit in usize"))?;
            monte_carlo_windows(&measure.sampler(false), &windows, n, query.seed)?
        }
    };
    Ok(out[0])
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::input(format!("unsupported dimension {d}")));
    }
    Ok(())
}

/// Exact weighted mass for many windows at once, one pass over all tuples.
pub fn exhaustive_windows(
    measure: &DiscreteMeasure,
    windows: &[(f64, f64)],
    budget: u128,
) -> Result<Vec<IncidenceEstimate>> {
    let d = measure.dim();
    check_dim(d)?;
    let n = measure.len() as u128;
    let tuples = n.checked_pow(d as u32 + 1).unwrap_or(u128::MAX);
    if tuples > budget {
        return Err(Error::resource(
            "exhaustive tuple enumeration",
            tuples,
            budget,
        ));
    }
    let per_first: Vec<Vec<KahanSum>> = (0..measure.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![KahanSum::new(); windows.len()];
            let mut idx = [0usize; MAX_DIM + 1];
            idx[0] = i;
            enumerate_rest(measure, d, &mut idx, 1, measure.mass(i), windows, &mut acc);
            acc
        })
        .collect();
    let mut total = vec![KahanSum::new(); windows.len()];
    for acc in &per_first {
        for (t, a) in total.iter_mut().zip(acc) {
            t.merge(a);
        }
    }
    Ok(total
        .into_iter()
        .map(|s| IncidenceEstimate {
            estimate: s.value().clamp(0.0, 1.0),
            stderr: 0.0,
            tuples_evaluated: tuples,
        })
        .collect())
}

fn enumerate_rest(
    mu: &DiscreteMeasure,
    d: usize,
    idx: &mut [usize; MAX_DIM + 1],
    level: usize,
    weight: f64,
    windows: &[(f64, f64)],
    acc: &mut [KahanSum],
) {
    if level == d + 1 {
        let pts: [&[f64]; MAX_DIM + 1] = std::array::from_fn(|k| mu.point(idx[k.min(d)]));
        let r = radius_unchecked(&pts[..=d], d);
        for (a, &(t, eps)) in acc.iter_mut().zip(windows) {
            if in_window(r, t, eps) {
                a.add(weight);
            }
        }
        return;
    }
    for j in 0..mu.len() {
        idx[level] = j;
        enumerate_rest(mu, d, idx, level + 1, weight * mu.mass(j), windows, acc);
    }
}

/// Monte Carlo estimates for many windows sharing one set of sampled tuples.
///
/// Hit counts are integers, so the result is independent of how batches are
/// scheduled across threads.
pub fn monte_carlo_windows<S: PointSource>(
    source: &S,
    windows: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> Result<Vec<IncidenceEstimate>> {
    let d = source.dim();
    check_dim(d)?;
    if samples == 0 {
        return Err(Error::input("Monte Carlo needs at least one sample"));
    }
    let hits: Vec<Vec<u64>> = batches(samples)
        .into_par_iter()
        .map(|(b, len)| {
            let mut rng = batch_rng(seed, b);
            let mut pts = [[0.0; MAX_DIM]; MAX_DIM + 1];
            let mut h = vec![0u64; windows.len()];
            for _ in 0..len {
                for p in pts.iter_mut().take(d + 1) {
                    source.sample_into(&mut rng, &mut p[..d]);
                }
                let refs: [&[f64]; MAX_DIM + 1] = std::array::from_fn(|k| &pts[k][..d]);
                let r = radius_unchecked(&refs[..=d], d);
                for (c, &(t, eps)) in h.iter_mut().zip(windows) {
                    if in_window(r, t, eps) {
                        *c += 1;
                    }
                }
            }
            h
        })
        .collect();
    let n = samples as f64;
    Ok((0..windows.len())
        .map(|w| {
            let k: u64 = hits.iter().map(|h| h[w]).sum();
            let p = k as f64 / n;
            IncidenceEstimate {
                estimate: p,
                stderr: (p * (1.0 - p) / n).sqrt(),
                tuples_evaluated: samples as u128,
            }
        })
        .collect())
}

/// Scaling fit of estimates against ε; every point keeps its stderr.
pub fn fit_profile(eps: &[f64], estimates: &[IncidenceEstimate]) -> Result<ScalingFit> {
    let pts = eps
        .iter()
        .zip(estimates)
        .map(|(&e, est)| FitPoint {
            x: e,
            value: est.estimate,
            stderr: est.stderr,
        })
        .collect();
    ScalingFit::from_points(pts, 3)
}

/// Mass of atoms `z` with `|R(x, y, z) - t| < ε`, for fixed `x ≠ y` in the plane.
pub fn conditional_incidence(
    measure_z: &DiscreteMeasure,
    x: &[f64],
    y: &[f64],
    t: f64,
    epsilon: f64,
) -> Result<f64> {
    if measure_z.dim() != 2 || x.len() != 2 || y.len() != 2 {
        return Err(Error::input(
            "conditional incidence is defined in the plane",
        ));
    }
    if x == y {
        return Err(Error::input("conditioning points must differ"));
    }
    if x.iter().chain(y).any(|c| !c.is_finite()) {
        return Err(Error::input("non-finite conditioning point"));
    }
    let mut acc = KahanSum::new();
    for (z, m) in measure_z.iter() {
        if in_window(radius_unchecked(&[x, y, z], 2), t, epsilon) {
            acc.add(m);
        }
    }
    Ok(acc.value())
}
