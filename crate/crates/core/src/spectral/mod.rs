//! Fourier transforms of discrete measures and sphere surface measures,
//! the factorized transform of the unit-radius configuration measure, and
//! Riesz energies.
//!
//! Transforms use the convention `μ̂(ξ) = ∫ e^{-2πi x·ξ} dμ(x)`.

mod energy;
mod quadrature;

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::fit::{FitPoint, ScalingFit};
use crate::measures::DiscreteMeasure;
use crate::numeric::KahanSum;

pub use energy::{energy_integral, energy_integral_with, DiagonalPolicy, EnergyReport};
pub use quadrature::gauss_legendre;

/// A transform value at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySample {
    pub xi: Vec<f64>,
    pub value: Complex64,
}

impl FrequencySample {
    pub fn xi_norm(&self) -> f64 {
        self.xi.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// `e^{-2πi p}` with `p` reduced modulo 1 first.
#[inline]
fn phase(p: f64) -> Complex64 {
    let r = p - p.round();
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, -s)
}

fn check_frequency(xi: &[f64], dim: usize) -> Result<()> {
    if xi.len() != dim {
        return Err(Error::input(format!(
            "frequency has {} components, expected {dim}",
            xi.len()
        )));
    }
    if xi.iter().any(|c| !c.is_finite()) {
        return Err(Error::input("non-finite frequency"));
    }
    Ok(())
}

/// `Σ_j m_j e^{-2πi x_j·ξ}` with compensated sums for both parts.
pub fn measure_ft(measure: &DiscreteMeasure, xi: &[f64]) -> Result<Complex64> {
    check_frequency(xi, measure.dim())?;
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for (x, m) in measure.iter() {
        let p: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        let e = phase(p);
        re.add(m * e.re);
        im.add(m * e.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// Node counts used by [`sphere_ft`] when none are given: enough to resolve
/// the oscillation at `|ξ|` with a wide margin.
pub fn default_quad_points(d: usize, xi_norm: f64) -> (usize, usize) {
    let k = TAU * xi_norm;
    match d {
        2 => ((1.3 * k + 64.0).ceil().max(4096.0) as usize, 1),
        _ => (
            (0.6 * k + 32.0).ceil().max(256.0) as usize,
            (1.3 * k + 64.0).ceil().max(512.0) as usize,
        ),
    }
}

/// Transform of the rotation-invariant probability measure on `S^{d-1}`.
///
/// `d = 2` uses the trapezoid rule in the angle; `d = 3` uses Gauss–Legendre
/// in `cos θ` times the trapezoid rule in `φ`. `quad_points` overrides the
/// node count (for `d = 3` it sets the `cos θ` count, with twice as many in `φ`).
pub fn sphere_ft(d: usize, xi: &[f64], quad_points: Option<usize>) -> Result<Complex64> {
    if d != 2 && d != 3 {
        return Err(Error::input(format!(
            "sphere transforms support d = 2, 3, got {d}"
        )));
    }
    check_frequency(xi, d)?;
    if quad_points == Some(0) {
        return Err(Error::input("quadrature needs at least one node"));
    }
    let norm = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
    let (n_a, n_b) = match quad_points {
        Some(n) => (n, 2 * n),
        None => default_quad_points(d, norm),
    };
    if d == 2 {
        let step = TAU / n_a as f64;
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for j in 0..n_a {
            let (s, c) = (j as f64 * step).sin_cos();
            let e = phase(xi[0] * c + xi[1] * s);
            re.add(e.re);
            im.add(e.im);
        }
        let n = n_a as f64;
        return Ok(Complex64::new(re.value() / n, im.value() / n));
    }
    let (us, ws) = gauss_legendre(n_a);
    let step = TAU / n_b as f64;
    let rows: Vec<Complex64> = us
        .par_iter()
        .zip(&ws)
        .map(|(&u, &w)| {
            let sin_t = (1.0 - u * u).max(0.0).sqrt();
            let mut re = KahanSum::new();
            let mut im = KahanSum::new();
            for j in 0..n_b {
                let (s, c) = (j as f64 * step).sin_cos();
                let e = phase(sin_t * (xi[0] * c + xi[1] * s) + u * xi[2]);
                re.add(e.re);
                im.add(e.im);
            }
            Complex64::new(re.value(), im.value()) * (w / (2.0 * n_b as f64))
        })
        .collect();
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for r in rows {
        re.add(r.re);
        im.add(r.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// Closed form of the `S^2` transform, `sin(2π|ξ|) / (2π|ξ|)`.
pub fn sphere_ft_closed_form_3d(xi_norm: f64) -> f64 {
    let k = TAU * xi_norm;
    if k == 0.0 {
        1.0
    } else {
        k.sin() / k
    }
}

/// Frequency directions `(ζ_0, ..., ζ_d)` along which the configuration
/// measure transform factorizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `(ξ, -ξ, 0, ..., 0)`.
    Opposite,
    /// `(ξ, 0, ..., 0)`.
    First,
    /// `(0, ξ, 0, ..., 0)`.
    Second,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Opposite => "opposite",
            Direction::First => "first",
            Direction::Second => "second",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "opposite" => Ok(Direction::Opposite),
            "first" => Ok(Direction::First),
            "second" => Ok(Direction::Second),
            other => Err(Error::input(format!("unsupported direction `{other}`"))),
        }
    }
}

/// Transform of the radius-1 configuration measure parameterized by
/// `(σ_0 + σ_1, ..., σ_0 + σ_d)` with each `σ_i` uniform on the sphere.
///
/// Along [`Direction::Opposite`] the phase is `ξ·(σ_1 - σ_2)`, giving
/// `|σ̂(ξ)|^2`; along the single-slot directions it is `ξ·(σ_0 + σ_i)`,
/// giving `σ̂(ξ)^2`.
pub fn mu1_directional_ft(d: usize, xi: &[f64], direction: Direction) -> Result<Complex64> {
    let s = sphere_ft(d, xi, None)?;
    Ok(match direction {
        Direction::Opposite => Complex64::new(s.norm_sqr(), 0.0),
        Direction::First | Direction::Second => s * s,
    })
}

/// Envelope fit of `(|ξ|, magnitude)` samples.
///
/// Samples are binned by octave from the smallest `|ξ|` (the top sample
/// joins the last full octave). Each bin contributes its largest interior
/// local maximum, or its largest sample when it has none; these form the
/// envelope, which is fitted on log-log axes. Use [`ScalingFit::decay_exponent`] for `-slope`.
pub fn decay_envelope_fit(samples: &[(f64, f64)]) -> Result<ScalingFit> {
    if samples.len() < 8 {
        return Err(Error::Fit(format!(
            "envelope fit needs at least 8 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|&(x, m)| !(x > 0.0) || !m.is_finite() || !x.is_finite())
    {
        return Err(Error::input(
            "samples need positive finite |ξ| and finite magnitudes",
        ));
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let octaves = (hi / lo).log2().floor() as usize;
    if octaves < 2 {
        return Err(Error::Fit(format!(
            "samples span {:.3} octaves, need at least 2",
            (hi / lo).log2()
        )));
    }
    let mut sorted: Vec<(f64, f64)> = samples.iter().map(|&(x, m)| (x, m.abs())).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let is_peak = |i: usize| {
        i > 0 && i + 1 < n && sorted[i].1 >= sorted[i - 1].1 && sorted[i].1 >= sorted[i + 1].1
    };
    let mut best: Vec<Option<(f64, f64)>> = vec![None; octaves];
    let mut best_peak: Vec<Option<(f64, f64)>> = vec![None; octaves];
    for (i, &(x, m)) in sorted.iter().enumerate() {
        let b = ((x / lo).log2().floor() as usize).min(octaves - 1);
        let slot = if is_peak(i) {
            &mut best_peak[b]
        } else {
            &mut best[b]
        };
        if slot.is_none_or(|(_, v)| m > v) {
            *slot = Some((x, m));
        }
    }
    let points = best_peak
        .into_iter()
        .zip(best)
        .filter_map(|(p, b)| p.or(b))
        .map(|(x, value)| FitPoint {
            x,
            value,
            stderr: 0.0,
        })
        .collect();
    ScalingFit::from_points(points, 2)
}

/// Log-spaced `|ξ|` values, `per_octave` per doubling, from `lo` to `hi` inclusive.
pub fn log_frequencies(lo: f64, hi: f64, per_octave: usize) -> Vec<f64> {
    let n = ((hi / lo).log2() * per_octave as f64).round() as usize;
    (0..=n)
        .map(|k| lo * (hi / lo).powf(k as f64 / n.max(1) as f64))
        .collect()
}
