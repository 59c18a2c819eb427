//! Strip constructions where the exponent-1 incidence law fails.
//!
//! The set is `X × [lo, hi]` with `X` a one-dimensional measure (typically
//! `∪_k (C_α + k)`) and a uniform vertical factor. For fixed `x`, `y` the
//! window `{z : |R(x, y, z) - t| < ε}` is a thin band around the two circles
//! of radius `t` through `x` and `y`. Near a vertical tangent of one of
//! these circles the band contains a `√ε × ε` box; when the tangent line sits
//! on a lattice line `x = n` carrying a Cantor endpoint, that box holds
//! `~ ε^{1/2} · ε^α` of mass.
//!
//! Along each vertical line `z = (z_x, s)` the window is a finite union of
//! intervals in `s` whose endpoints are roots of quadratics, so band masses
//! are computed column by column without materializing the vertical factor.

use rayon::prelude::*;

use crate::circumsphere::radius_unchecked;
use crate::error::{Error, Result};
use crate::fit::{FitPoint, ScalingFit};
use crate::measures::{DiscreteMeasure, SetSpec};
use crate::numeric::KahanSum;
use crate::rng::batch_rng;

/// Cap on atoms of the horizontal marginal.
const MARGINAL_BUDGET: u128 = 1 << 24;

/// Product of a one-dimensional measure and a uniform grid on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct StripMeasure {
    marginal: DiscreteMeasure,
    lo: f64,
    hi: f64,
    cells: u64,
    depth: u32,
}

/// Which circle of the pencil through `x`, `y` a band point belongs to: the
/// sign of the signed distance `h` from the chord midpoint to the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Restriction applied to the `z` variable of a band mass.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BandFilter {
    /// Closed range of `z_x`.
    pub x_range: Option<(f64, f64)>,
    pub side: Option<Side>,
}

/// Chord geometry of a conditioning pair.
#[derive(Debug, Clone, Copy)]
struct Pencil {
    mid: [f64; 2],
    normal: [f64; 2],
    half_chord2: f64,
}

impl Pencil {
    fn new(x: [f64; 2], y: [f64; 2]) -> Self {
        let v = [y[0] - x[0], y[1] - x[1]];
        let len = v[0].hypot(v[1]);
        Pencil {
            mid: [(x[0] + y[0]) / 2.0, (x[1] + y[1]) / 2.0],
            normal: [-v[1] / len, v[0] / len],
            half_chord2: len * len / 4.0,
        }
    }

    /// Sign of the pencil parameter `h(z) = q / 2l` at `z`.
    #[inline]
    fn side_of(&self, z: [f64; 2]) -> Option<Side> {
        let w = [z[0] - self.mid[0], z[1] - self.mid[1]];
        let q = w[0] * w[0] + w[1] * w[1] - self.half_chord2;
        let l = self.normal[0] * w[0] + self.normal[1] * w[1];
        let h = q * l;
        if h > 0.0 {
            Some(Side::Plus)
        } else if h < 0.0 {
            Some(Side::Minus)
        } else {
            None
        }
    }
}

impl StripMeasure {
    /// Accepts `Product([X, Interval])` with one-dimensional `X`.
    pub fn from_spec(spec: &SetSpec, depth: u32) -> Result<Self> {
        spec.validate()?;
        let (horizontal, lo, hi) = match spec {
            SetSpec::Product(fs) if fs.len() == 2 && fs[0].dim() == 1 => match fs[1] {
                SetSpec::Interval { lo, hi } => (&fs[0], lo, hi),
                _ => return Err(strip_shape_error()),
            },
            _ => return Err(strip_shape_error()),
        };
        let mut marginal = horizontal.realize(depth, MARGINAL_BUDGET)?;
        if marginal.coords().windows(2).any(|w| w[0] > w[1]) {
            let mut order: Vec<usize> = (0..marginal.len()).collect();
            order.sort_by(|&i, &j| marginal.coords()[i].total_cmp(&marginal.coords()[j]));
            let coords = order.iter().map(|&i| marginal.coords()[i]).collect();
            let masses = order.iter().map(|&i| marginal.mass(i)).collect();
            marginal = DiscreteMeasure::new(1, coords, masses, marginal.resolution())?;
        }
        let total = spec.atom_count(depth);
        let cells = (total / marginal.len() as u128) as u64;
        Ok(StripMeasure {
            marginal,
            lo,
            hi,
            cells,
            depth,
        })
    }

    pub fn marginal(&self) -> &DiscreteMeasure {
        &self.marginal
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn vertical_cells(&self) -> u64 {
        self.cells
    }

    fn cell(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    #[inline]
    fn center(&self, j: u64) -> f64 {
        self.lo + (j as f64 + 0.5) * self.cell()
    }

    /// Grid indices with centers strictly inside `(a, b)`, as a half-open range.
    fn index_range(&self, a: f64, b: f64) -> (u64, u64) {
        let cell = self.cell();
        let first = ((a - self.lo) / cell - 0.5).floor() + 1.0;
        let last = ((b - self.lo) / cell - 0.5).ceil() - 1.0;
        let first = first.max(0.0);
        let last = last.min(self.cells as f64 - 1.0);
        if last < first {
            (0, 0)
        } else {
            (first as u64, last as u64 + 1)
        }
    }

    /// Mass of `{z : |R(x, y, z) - t| < ε}` under this measure, subject to `filter`.
    pub fn band_mass(
        &self,
        x: [f64; 2],
        y: [f64; 2],
        t: f64,
        epsilon: f64,
        filter: BandFilter,
    ) -> Result<f64> {
        if x == y {
            return Err(Error::input("conditioning points must differ"));
        }
        let pencil = Pencil::new(x, y);
        let xs = self.marginal.coords();
        let (i0, i1) = match filter.x_range {
            Some((a, b)) => (
                xs.partition_point(|&v| v < a),
                xs.partition_point(|&v| v <= b),
            ),
            None => (0, xs.len()),
        };
        let mut acc = KahanSum::new();
        for (i, &zx) in xs.iter().enumerate().take(i1).skip(i0) {
            let m = self.marginal.mass(i);
            let count = self.column_count(&pencil, x, y, zx, t, epsilon, filter.side);
            if count > 0 {
                acc.add(m * count as f64 / self.cells as f64);
            }
        }
        Ok(acc.value())
    }

    /// Grid atoms on the vertical line `z_x` inside the band.
    #[allow(clippy::too_many_arguments)]
    fn column_count(
        &self,
        pencil: &Pencil,
        x: [f64; 2],
        y: [f64; 2],
        zx: f64,
        t: f64,
        eps: f64,
        side: Option<Side>,
    ) -> u64 {
        let hc2 = pencil.half_chord2;
        if (t + eps) * (t + eps) <= hc2 {
            return 0;
        }
        let inside = |s: f64| -> bool {
            let z = [zx, s];
            if let Some(sd) = side {
                if pencil.side_of(z) != Some(sd) {
                    return false;
                }
            }
            let r = radius_unchecked(&[&x[..], &y[..], &z[..]], 2);
            (r - t).abs() < eps
        };

        let mut hs = [((t + eps) * (t + eps) - hc2).sqrt(), f64::NAN];
        let n_h = if t - eps > 0.0 && (t - eps) * (t - eps) > hc2 {
            hs[1] = ((t - eps) * (t - eps) - hc2).sqrt();
            2
        } else {
            1
        };
        let wx = zx - pencil.mid[0];
        let [nx, ny] = pencil.normal;
        let mut roots = [0.0f64; 10];
        roots[0] = self.lo;
        roots[1] = self.hi;
        let mut n_roots = 2;
        for &h in &hs[..n_h] {
            for sg in [1.0, -1.0] {
                // u^2 - 2 sg h ny u + (wx^2 - hc2 - 2 sg h nx wx) = 0, u = s - mid_y
                let b = -2.0 * sg * h * ny;
                let c = wx * wx - hc2 - 2.0 * sg * h * nx * wx;
                let disc = b * b - 4.0 * c;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    // Stable pair of roots.
                    let qv = -0.5 * (b + b.signum() * sq);
                    let (r1, r2) = if qv != 0.0 { (qv, c / qv) } else { (0.0, 0.0) };
                    for r in [r1, r2] {
                        let s = r + pencil.mid[1];
                        if s > self.lo && s < self.hi {
                            roots[n_roots] = s;
                            n_roots += 1;
                        }
                    }
                }
            }
        }
        let roots = &mut roots[..n_roots];
        roots.sort_by(f64::total_cmp);

        // Atoms within one cell of a root are decided individually; their
        // index ranges are merged into disjoint sorted runs.
        let mut special = [(0u64, 0u64); 10];
        let mut n_special = 0;
        for &r in roots.iter() {
            let (a, b) = self.index_range(r - self.cell(), r + self.cell());
            if b <= a {
                continue;
            }
            if n_special > 0 && a <= special[n_special - 1].1 {
                let last = &mut special[n_special - 1];
                last.1 = last.1.max(b);
            } else {
                special[n_special] = (a, b);
                n_special += 1;
            }
        }
        let special = &special[..n_special];

        let mut count = 0u64;
        for w in roots.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a || !inside(0.5 * (a + b)) {
                continue;
            }
            let (i0, i1) = self.index_range(a, b);
            if i1 > i0 {
                let covered: u64 = special
                    .iter()
                    .map(|&(s0, s1)| s1.min(i1).saturating_sub(s0.max(i0)))
                    .sum();
                count += (i1 - i0) - covered;
            }
        }
        for &(s0, s1) in special {
            for j in s0..s1 {
                if inside(self.center(j)) {
                    count += 1;
                }
            }
        }
        count
    }
}

fn strip_shape_error() -> Error {
    Error::input(
        "strip constructions need a spec of the form product(X, interval) with one-dimensional X",
    )
}

/// Band mass near the best-aligned vertical tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentCap {
    pub mass: f64,
    /// Lattice line nearest the tangent point.
    pub line: i64,
    /// Horizontal coordinate of the tangent point.
    pub tangent_x: f64,
    pub side: Side,
}

/// For each of the (up to) four vertical tangents of the radius-`t` circles
/// through `x` and `y`, takes the band of that circle inside the two lattice
/// columns `[n - 1, n + 1]` adjacent to the lattice line `n` nearest the
/// tangent, and returns the heaviest.
pub fn tangent_cap_mass(
    strip: &StripMeasure,
    x: [f64; 2],
    y: [f64; 2],
    t: f64,
    epsilon: f64,
) -> Result<Option<TangentCap>> {
    if x == y {
        return Err(Error::input("conditioning points must differ"));
    }
    let pencil = Pencil::new(x, y);
    if t * t <= pencil.half_chord2 {
        return Ok(None);
    }
    let h = (t * t - pencil.half_chord2).sqrt();
    let mut best: Option<TangentCap> = None;
    for side in [Side::Plus, Side::Minus] {
        let cx = pencil.mid[0] + side.sign() * h * pencil.normal[0];
        for tangent_x in [cx - t, cx + t] {
            let line = tangent_x.round() as i64;
            let filter = BandFilter {
                x_range: Some((line as f64 - 1.0, line as f64 + 1.0)),
                side: Some(side),
            };
            let mass = strip.band_mass(x, y, t, epsilon, filter)?;
            if best.is_none_or(|b| mass > b.mass) {
                best = Some(TangentCap {
                    mass,
                    line,
                    tangent_x,
                    side,
                });
            }
        }
    }
    Ok(best)
}

/// Search plan for conditioning pairs `x ∈ S_0`, `y ∈ S_a`, where
/// `S_a = [0, 1] × [a, a + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSearch {
    /// Random placements of `x` and of `y` within its strip.
    pub pairs: usize,
    pub a_min: f64,
    pub a_max: f64,
    /// Coarse grid size over `[a_min, a_max]`; `None` picks a spacing of `ε / 4`.
    pub coarse_steps: Option<usize>,
    /// Rounds of tenfold local refinement around the coarse optimum.
    pub refine_rounds: usize,
}

impl Default for PairSearch {
    fn default() -> Self {
        PairSearch {
            pairs: 2,
            a_min: 8.0,
            a_max: 12.0,
            coarse_steps: None,
            refine_rounds: 3,
        }
    }
}

/// One ε of an adversarial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    pub epsilon: f64,
    /// Max over searched pairs of the tangent-cap band mass.
    pub localized: f64,
    /// Full conditional band mass at the maximizing pair.
    pub band: f64,
    pub a: f64,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub line: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessProfile {
    pub depth: u32,
    pub points: Vec<ProfilePoint>,
    /// Fit of the localized (tangent-cap) masses against ε.
    pub fit: ScalingFit,
    /// Fit of the full conditional band masses against ε.
    pub band_fit: ScalingFit,
}

/// The strip construction with every Cantor column replaced by `[0, 1]`:
/// `(∪_{|k| <= half_width} ([0, 1] + k)) × [-half_width, half_width]`.
pub fn uniform_strip(half_width: i64) -> SetSpec {
    SetSpec::Product(vec![
        SetSpec::TranslateUnion {
            inner: Box::new(SetSpec::Interval { lo: 0.0, hi: 1.0 }),
            k_min: -half_width,
            k_max: half_width,
        },
        SetSpec::Interval {
            lo: -(half_width as f64),
            hi: half_width as f64,
        },
    ])
}

/// Smallest depth whose cells are no wider than `target`.
pub fn depth_for_resolution(spec: &SetSpec, target: f64) -> u32 {
    (0..64)
        .find(|&n| spec.cell_sides(n).iter().all(|&s| s <= target))
        .unwrap_or(64)
}

/// For each ε, searches conditioning pairs for the heaviest tangent cap and
/// fits the log-log slope over the grid.
///
/// `depth = None` picks the shallowest depth with cells no wider than
/// `ε_min / 4`.
pub fn adversarial_conditional_profile(
    spec: &SetSpec,
    t: f64,
    epsilon_grid: &[f64],
    search: &PairSearch,
    depth: Option<u32>,
    seed: u64,
) -> Result<SharpnessProfile> {
    if epsilon_grid.is_empty() || search.pairs == 0 || !(search.a_max >= search.a_min) {
        return Err(Error::input("empty pair search or ε grid"));
    }
    if epsilon_grid.iter().any(|&e| !(e > 0.0 && e < t)) {
        return Err(Error::input("every ε must lie in (0, t)"));
    }
    let eps_min = epsilon_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let depth = depth.unwrap_or_else(|| depth_for_resolution(spec, eps_min / 4.0));
    let strip = StripMeasure::from_spec(spec, depth)?;

    let placements: Vec<([f64; 2], [f64; 2])> = (0..search.pairs)
        .map(|i| pair_placement(&strip, seed, i as u64))
        .collect();

    let mut points = Vec::with_capacity(epsilon_grid.len());
    for &eps in epsilon_grid {
        let mut best: Option<(f64, f64, usize, TangentCap)> = None;
        for (pi, &(x, y_off)) in placements.iter().enumerate() {
            if let Some((a, cap)) = search_a(&strip, x, y_off, t, eps, search)? {
                if best.as_ref().is_none_or(|b| cap.mass > b.3.mass) {
                    best = Some((a, cap.mass, pi, cap));
                }
            }
        }
        let (a, mass, pi, cap) =
            best.ok_or_else(|| Error::input("no searched pair admits a circle of radius t"))?;
        let (x, y_off) = placements[pi];
        let y = [y_off[0], a + y_off[1]];
        let band = strip.band_mass(x, y, t, eps, BandFilter::default())?;
        points.push(ProfilePoint {
            epsilon: eps,
            localized: mass,
            band,
            a,
            x,
            y,
            line: cap.line,
        });
    }
    let to_fit = |f: fn(&ProfilePoint) -> f64| {
        ScalingFit::lenient(
            points
                .iter()
                .map(|p| FitPoint {
                    x: p.epsilon,
                    value: f(p),
                    stderr: 0.0,
                })
                .collect(),
        )
    };
    let fit = to_fit(|p| p.localized);
    let band_fit = to_fit(|p| p.band);
    Ok(SharpnessProfile {
        depth,
        points,
        fit,
        band_fit,
    })
}

/// `x` at a marginal atom in `[0, 1]` at random height in `[0, 1]`; `y`'s
/// horizontal atom and its offset inside `[a, a + 1]`.
fn pair_placement(strip: &StripMeasure, seed: u64, index: u64) -> ([f64; 2], [f64; 2]) {
    use rand::Rng;
    let mut rng = batch_rng(seed, index);
    let column: Vec<f64> = strip
        .marginal()
        .coords()
        .iter()
        .copied()
        .filter(|c| (0.0..=1.0).contains(c))
        .collect();
    let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
        if column.is_empty() {
            rng.gen::<f64>()
        } else {
            column[rng.gen_range(0..column.len())]
        }
    };
    let x = [pick(&mut rng), rng.gen::<f64>()];
    let y = [pick(&mut rng), rng.gen::<f64>()];
    (x, y)
}

fn search_a(
    strip: &StripMeasure,
    x: [f64; 2],
    y_off: [f64; 2],
    t: f64,
    eps: f64,
    search: &PairSearch,
) -> Result<Option<(f64, TangentCap)>> {
    let eval = |a: f64| -> Result<Option<TangentCap>> {
        let y = [y_off[0], a + y_off[1]];
        if y == x {
            return Ok(None);
        }
        tangent_cap_mass(strip, x, y, t, eps)
    };
    let span = search.a_max - search.a_min;
    let steps = search
        .coarse_steps
        .unwrap_or_else(|| (span / (eps / 4.0)).ceil() as usize)
        .max(1);
    let step = if steps > 1 {
        span / (steps - 1) as f64
    } else {
        0.0
    };
    let grid: Vec<f64> = (0..steps).map(|k| search.a_min + k as f64 * step).collect();
    let evals: Vec<Option<TangentCap>> =
        grid.par_iter().map(|&a| eval(a)).collect::<Result<_>>()?;
    let mut best: Option<(f64, TangentCap)> = None;
    for (&a, cap) in grid.iter().zip(evals) {
        if let Some(cap) = cap {
            if best.as_ref().is_none_or(|b| cap.mass > b.1.mass) {
                best = Some((a, cap));
            }
        }
    }
    let Some((mut a_best, mut cap_best)) = best else {
        return Ok(None);
    };
    let mut width = step;
    for _ in 0..search.refine_rounds {
        if width == 0.0 {
            break;
        }
        let fine: Vec<f64> = (-10..=10)
            .map(|k| (a_best + k as f64 * width / 10.0).clamp(search.a_min, search.a_max))
            .collect();
        let evals: Vec<Option<TangentCap>> =
            fine.par_iter().map(|&a| eval(a)).collect::<Result<_>>()?;
        for (&a, cap) in fine.iter().zip(evals) {
            if let Some(cap) = cap {
                if cap.mass > cap_best.mass {
                    a_best = a;
                    cap_best = cap;
                }
            }
        }
        width /= 10.0;
    }
    Ok(Some((a_best, cap_best)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::conditional_incidence;
    use crate::measures::{CantorSpec, DEFAULT_ATOM_BUDGET};

    fn small_spec() -> SetSpec {
        SetSpec::counterexample(CantorSpec::with_dimension(1.0 / 3.0).unwrap(), 3)
    }

    #[test]
    fn band_mass_matches_brute_force() {
        let spec = small_spec();
        let depth = 2;
        let strip = StripMeasure::from_spec(&spec, depth).unwrap();
        let full = spec.realize(depth, DEFAULT_ATOM_BUDGET).unwrap();
        let cases = [
            ([0.3, 0.2], [0.6, 2.5], 1.7, 0.05),
            ([0.1, 0.9], [0.9, 1.9], 2.5, 0.2),
            ([-1.2, -2.0], [0.4, 2.2], 3.0, 0.01),
            ([0.5, 0.5], [0.5, 1.5], 0.9, 0.3),
        ];
        for (x, y, t, eps) in cases {
            let fast = strip
                .band_mass(x, y, t, eps, BandFilter::default())
                .unwrap();
            let slow = conditional_incidence(&full, &x, &y, t, eps).unwrap();
            assert!((fast - slow).abs() < 1e-12, "{x:?} {y:?}: {fast} vs {slow}");
        }
    }

    #[test]
    fn filters_partition_the_band() {
        let strip = StripMeasure::from_spec(&small_spec(), 2).unwrap();
        let (x, y, t, eps) = ([0.3, 0.2], [0.6, 2.5], 1.7, 0.05);
        let all = strip
            .band_mass(x, y, t, eps, BandFilter::default())
            .unwrap();
        let plus = strip
            .band_mass(
                x,
                y,
                t,
                eps,
                BandFilter {
                    side: Some(Side::Plus),
                    ..Default::default()
                },
            )
            .unwrap();
        let minus = strip
            .band_mass(
                x,
                y,
                t,
                eps,
                BandFilter {
                    side: Some(Side::Minus),
                    ..Default::default()
                },
            )
            .unwrap();
        assert!((plus + minus - all).abs() < 1e-12);
        let left = strip
            .band_mass(
                x,
                y,
                t,
                eps,
                BandFilter {
                    x_range: Some((-10.0, 0.5)),
                    side: None,
                },
            )
            .unwrap();
        let right = strip
            .band_mass(
                x,
                y,
                t,
                eps,
                BandFilter {
                    x_range: Some((0.5, 10.0)),
                    side: None,
                },
            )
            .unwrap();
        assert!((left + right - all).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_strip_specs() {
        let c = CantorSpec::middle_thirds();
        assert!(StripMeasure::from_spec(&SetSpec::cantor_product(c.clone(), c), 2).is_err());
    }

    #[test]
    fn single_point_profile_has_undefined_slope() {
        let search = PairSearch {
            pairs: 1,
            a_min: 9.0,
            a_max: 9.0,
            coarse_steps: Some(1),
            refine_rounds: 0,
        };
        let prof = adversarial_conditional_profile(
            &SetSpec::counterexample(CantorSpec::with_dimension(1.0 / 3.0).unwrap(), 20),
            10.0,
            &[0.01],
            &search,
            Some(3),
            1,
        )
        .unwrap();
        assert_eq!(prof.points.len(), 1);
        assert!(!prof.fit.slope_defined);
    }

    #[test]
    fn empty_search_is_an_input_error() {
        let search = PairSearch {
            pairs: 0,
            ..PairSearch::default()
        };
        let err = adversarial_conditional_profile(&small_spec(), 2.0, &[0.1], &search, Some(1), 0);
        assert!(matches!(err, Err(Error::Input(_))));
        let err = adversarial_conditional_profile(
            &small_spec(),
            2.0,
            &[],
            &PairSearch::default(),
            Some(1),
            0,
        );
        assert!(matches!(err, Err(Error::Input(_))));
    }
}
