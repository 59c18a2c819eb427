//! Circumradius of `d + 1` points in `R^d`.
//!
//! The main route solves the linear system for the center; an independent
//! Cayley–Menger route works from pairwise squared distances only. Both
//! return 0 when the points are affinely dependent, which is also the only
//! way a sphere through `d + 1` points can fail to be unique.

use crate::error::{Error, Result};
use crate::numeric::{determinant_in_place, dist2, solve_in_place, Solve};

/// Relative pivot threshold below which the center system is rank deficient.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

/// Normalized Cayley–Menger determinant threshold (distances scaled to max 1).
const CM_TOL: f64 = 1e-12;

/// `d + 1` points with their circumsphere.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigTuple {
    pub dim: usize,
    /// Row-major, `(dim + 1) * dim` values.
    pub points: Vec<f64>,
    pub center: Option<Vec<f64>>,
    pub radius: f64,
    pub degenerate: bool,
}

impl ConfigTuple {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

fn check_tuple(points: &[&[f64]]) -> Result<usize> {
    let n = points.len();
    if n < 2 {
        return Err(Error::input("need d + 1 >= 2 points"));
    }
    let d = n - 1;
    if d > MAX_DIM {
        return Err(Error::input(format!("dimension {d} exceeds {MAX_DIM}")));
    }
    for p in points {
        if p.len() != d {
            return Err(Error::input(format!(
                "{n} points must live in R^{d}, got a point with {} coordinates",
                p.len()
            )));
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("non-finite coordinate"));
        }
    }
    Ok(d)
}

/// Solves for the center relative to the last point. Returns the squared
/// radius and writes the relative center into `rel`, or `None` when degenerate.
#[inline]
fn solve_relative<P: AsRef<[f64]>>(
    points: &[P],
    d: usize,
    rel: &mut [f64; MAX_DIM],
) -> Option<f64> {
    let base = points[d].as_ref();
    let mut a = [0.0; MAX_DIM * MAX_DIM];
    let mut u0 = [0.0; MAX_DIM];
    for i in 0..d {
        let p = points[i].as_ref();
        let mut sq = 0.0;
        for k in 0..d {
            let u = p[k] - base[k];
            a[i * d + k] = 2.0 * u;
            sq += u * u;
            if i == 0 {
                u0[k] = u;
            }
        }
        rel[i] = sq;
    }
    match solve_in_place(&mut a[..d * d], &mut rel[..d], d, DEGENERACY_TOL) {
        Solve::RankDeficient => None,
        Solve::Solved => {
            let r2 = (0..d).map(|k| (u0[k] - rel[k]).powi(2)).sum::<f64>();
            Some(r2)
        }
    }
}

/// Full circumsphere data for `d + 1` points in `R^d`.
pub fn circumsphere(points: &[&[f64]]) -> Result<ConfigTuple> {
    let d = check_tuple(points)?;
    let mut rel = [0.0; MAX_DIM];
    let flat: Vec<f64> = points.iter().flat_map(|p| p.iter().copied()).collect();
    Ok(match solve_relative(points, d, &mut rel) {
        Some(r2) => {
            let base = points[d];
            ConfigTuple {
                dim: d,
                points: flat,
                center: Some((0..d).map(|k| rel[k] + base[k]).collect()),
                radius: r2.sqrt(),
                degenerate: false,
            }
        }
        None => ConfigTuple {
            dim: d,
            points: flat,
            center: None,
            radius: 0.0,
            degenerate: true,
        },
    })
}

/// Circumradius without allocating; 0 for degenerate tuples.
pub fn circumradius(points: &[&[f64]]) -> Result<f64> {
    let d = check_tuple(points)?;
    Ok(radius_unchecked(points, d))
}

/// Hot-path radius. Callers guarantee `points.len() == d + 1`, each of length
/// `d <= MAX_DIM`, all finite.
#[inline]
pub(crate) fn radius_unchecked<P: AsRef<[f64]>>(points: &[P], d: usize) -> f64 {
    let mut rel = [0.0; MAX_DIM];
    solve_relative(points, d, &mut rel).map_or(0.0, f64::sqrt)
}

/// Translation-reduced radius `R_0(u^1, ..., u^d)`, where `u^i = x^{d+1} - x^i`:
/// the circumradius of `{-u^1, ..., -u^d, 0}`.
pub fn radius_r0(differences: &[&[f64]]) -> Result<f64> {
    let d = differences.len();
    if d == 0 {
        return Err(Error::input("need at least one difference vector"));
    }
    let mut pts: Vec<Vec<f64>> = differences
        .iter()
        .map(|u| u.iter().map(|c| -c).collect())
        .collect();
    pts.push(vec![0.0; d]);
    let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
    circumradius(&refs)
}

/// Circumradius from the Cayley–Menger determinants:
/// `R^2 = -det(D) / (2 det(CM))`, with `D` the squared-distance matrix and
/// `CM` its bordered form. Returns 0 when the simplex volume vanishes.
pub fn cayley_menger_radius(points: &[&[f64]]) -> Result<f64> {
    let d = check_tuple(points)?;
    let n = d + 1;
    let mut dist = vec![0.0; n * n];
    let mut scale = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            let s = dist2(points[i], points[j]);
            dist[i * n + j] = s;
            dist[j * n + i] = s;
            scale = scale.max(s);
        }
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    for v in dist.iter_mut() {
        *v /= scale;
    }
    let m = n + 1;
    let mut cm = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            cm[i * m + j] = match (i, j) {
                (0, 0) => 0.0,
                (0, _) | (_, 0) => 1.0,
                _ => dist[(i - 1) * n + (j - 1)],
            };
        }
    }
    let det_cm = determinant_in_place(&mut cm, m);
    if det_cm.abs() <= CM_TOL {
        return Ok(0.0);
    }
    let det_d = determinant_in_place(&mut dist, n);
    let r2 = -det_d / (2.0 * det_cm);
    Ok(if r2 > 0.0 { (r2 * scale).sqrt() } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_triangle_in_plane() {
        let t = circumsphere(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 1.0]]).unwrap();
        assert!(!t.degenerate);
        let c = t.center.unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15 && c[1].abs() < 1e-15);
        assert!((t.radius - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collinear_is_degenerate() {
        let t = circumsphere(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]]).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.radius, 0.0);
        assert!(t.center.is_none());
        assert_eq!(
            cayley_menger_radius(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]]).unwrap(),
            0.0
        );
    }

    #[test]
    fn repeated_point_is_degenerate() {
        let p: &[f64] = &[0.3, 0.7];
        assert_eq!(circumradius(&[p, p, &[1.0, 0.0]]).unwrap(), 0.0);
        assert_eq!(cayley_menger_radius(&[p, p, &[1.0, 0.0]]).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_tetrahedron() {
        let t = circumsphere(&[
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[-1.0, 0.0, 0.0],
        ])
        .unwrap();
        let c = t.center.unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-15));
        assert!((t.radius - 1.0).abs() < 1e-15);
    }

    #[test]
    fn r0_matches_translated_example() {
        let r = radius_r0(&[&[-2.0, 0.0], &[-1.0, -1.0]]).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        assert_eq!(radius_r0(&[&[0.5, 0.1], &[0.5, 0.1]]).unwrap(), 0.0);
    }

    #[test]
    fn equilateral_cayley_menger() {
        let h = 3f64.sqrt() / 2.0;
        let r = cayley_menger_radius(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]).unwrap();
        assert!((r - 0.5773502692).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(circumsphere(&[&[0.0, f64::NAN], &[1.0, 0.0], &[0.0, 1.0]]).is_err());
        assert!(circumsphere(&[&[0.0, 0.0], &[1.0, 0.0]]).is_err());
        assert!(cayley_menger_radius(&[&[0.0], &[1.0, 2.0]]).is_err());
    }
}
