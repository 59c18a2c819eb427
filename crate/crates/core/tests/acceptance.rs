use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use fractal_radii::circumsphere::{cayley_menger_radius, circumradius};
use fractal_radii::experiment::{run_with_threads, Experiment, ExperimentConfig};
use fractal_radii::incidence::{fit_profile, monte_carlo_windows};
use fractal_radii::intersection::{
    annulus_mass, center_validity, dilation_set, intersection_dimension, radii_set_measure,
    slice_boxes,
};
use fractal_radii::kv::linear_grid;
use fractal_radii::measures::build_cantor;
use fractal_radii::rng::batch_rng;
use fractal_radii::sharpness::{adversarial_conditional_profile, uniform_strip, PairSearch};
use fractal_radii::spectral::{
    decay_envelope_fit, energy_integral, energy_integral_with, mu1_directional_ft, sphere_ft,
    sphere_ft_closed_form_3d, DiagonalPolicy, Direction,
};
use fractal_radii::{CantorSpec, DiscreteMeasure, SetSpec};

type Criterion = fn() -> fractal_radii::Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: u32, started: Instant, out: fractal_radii::Result<Outcome>) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match out {
        Ok(o) => {
            let tag = if o.pass { "PASS" } else { "FAIL" };
            println!("criterion {n} [{tag}] ({secs:.1}s) {}", o.detail);
            o.pass
        }
        Err(e) => {
            println!("criterion {n} [FAIL] ({secs:.1}s) error: {e}");
            false
        }
    }
}

// Double-double arithmetic for the Cayley-Menger oracle.

#[derive(Clone, Copy, Debug)]
struct Dd(f64, f64);

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd(s, (a - (s - bb)) + (b - bb))
}

fn quick(s: f64, e: f64) -> Dd {
    let h = s + e;
    Dd(h, e - (h - s))
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd(x, 0.0)
    }
    fn add(self, o: Dd) -> Dd {
        let Dd(s, e) = two_sum(self.0, o.0);
        quick(s, e + self.1 + o.1)
    }
    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }
    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }
    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p);
        quick(p, e + self.0 * o.1 + self.1 * o.0)
    }
    fn div(self, o: Dd) -> Dd {
        let q1 = self.0 / o.0;
        let r = self.sub(o.mul(Dd::from(q1)));
        let q2 = r.0 / o.0;
        let r = r.sub(o.mul(Dd::from(q2)));
        let q3 = r.0 / o.0;
        quick(q1, q2).add(Dd::from(q3))
    }
}

fn det_dd(mut a: Vec<Vec<Dd>>) -> Dd {
    let n = a.len();
    let mut det = Dd::from(1.0);
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].0.abs().total_cmp(&a[j][c].0.abs()))
            .unwrap();
        if a[p][c].0 == 0.0 {
            return Dd::from(0.0);
        }
        if p != c {
            a.swap(p, c);
            det = det.neg();
        }
        det = det.mul(a[c][c]);
        for r in c + 1..n {
            let f = a[r][c].div(a[c][c]);
            let pivot_row = a[c].clone();
            for (v, p) in a[r].iter_mut().zip(&pivot_row).skip(c) {
                *v = v.sub(f.mul(*p));
            }
        }
    }
    det
}

/// Circumradius from Cayley-Menger determinants in double-double precision.
fn cm_oracle(pts: &[Vec<f64>]) -> f64 {
    let m = pts.len();
    let mut dmat = vec![vec![Dd::from(0.0); m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = Dd::from(0.0);
            for (a, b) in pts[i].iter().zip(&pts[j]) {
                let diff = two_sum(*a, -*b);
                acc = acc.add(diff.mul(diff));
            }
            dmat[i][j] = acc;
        }
    }
    let mut cm = vec![vec![Dd::from(1.0); m + 1]; m + 1];
    cm[0][0] = Dd::from(0.0);
    for i in 0..m {
        for j in 0..m {
            cm[i + 1][j + 1] = dmat[i][j];
        }
    }
    let r2 = det_dd(dmat).div(det_dd(cm).mul(Dd::from(-2.0)));
    (r2.0 + r2.1).sqrt()
}

fn random_tuple<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<f64>> {
    (0..=d)
        .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

fn refs(p: &[Vec<f64>]) -> Vec<&[f64]> {
    p.iter().map(|v| v.as_slice()).collect()
}

fn degenerate_tuples<R: Rng>(rng: &mut R, d: usize, count: usize) -> Vec<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for i in 0..count {
        let base: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // Collinear tuples, points spanning a hyperplane, and repeated points.
        let dirs = match i % 3 {
            0 => 1,
            _ => d - 1,
        };
        let vs: Vec<Vec<f64>> = (0..dirs)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut t: Vec<Vec<f64>> = (0..=d)
            .map(|_| {
                let mut p = base.clone();
                for v in &vs {
                    let c: f64 = rng.gen_range(-1.0..1.0);
                    for k in 0..d {
                        p[k] += c * v[k];
                    }
                }
                p
            })
            .collect();
        if i % 3 == 2 {
            t = random_tuple(rng, d);
            let j = rng.gen_range(1..=d);
            t[j] = t[0].clone();
        }
        out.push(t);
    }
    out
}

fn criterion_1() -> fractal_radii::Result<Outcome> {
    let started = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for d in 2..=4 {
        let mut rng = batch_rng(0xC1, d as u64);
        let mut worst = 0.0f64;
        let mut bad = 0;
        for _ in 0..100_000 {
            let t = random_tuple(&mut rng, d);
            let r = circumradius(&refs(&t))?;
            let o = cm_oracle(&t);
            let rel = (r - o).abs() / o;
            worst = worst.max(rel);
            if !(rel <= 1e-9) {
                bad += 1;
            }
        }
        let degen = degenerate_tuples(&mut rng, d, 3000);
        let nonzero = degen
            .iter()
            .filter(|t| {
                circumradius(&refs(t)).map_or(true, |r| r != 0.0)
                    || cayley_menger_radius(&refs(t)).map_or(true, |r| r != 0.0)
            })
            .count();
        pass &= bad == 0 && nonzero == 0;
        details.push(format!(
            "d={d}: max rel err {worst:.1e}, {bad} above 1e-9, {nonzero}/3000 degenerate nonzero"
        ));
    }
    let secs = started.elapsed().as_secs_f64();
    pass &= secs < 10.0;
    Ok(Outcome {
        pass,
        detail: details.join("; "),
    })
}

fn dyadic(lo_exp: i32, hi_exp: i32) -> Vec<f64> {
    (lo_exp..=hi_exp).map(|k| 2f64.powi(-k)).collect()
}

fn criterion_2() -> fractal_radii::Result<Outcome> {
    let c = CantorSpec::with_dimension(0.8)?;
    let spec = SetSpec::cantor_product(c.clone(), c);
    let sampler = spec.sampler(12, false)?;
    let eps = dyadic(4, 12);
    let ts = [0.5, 1.0, 2.0];
    let windows: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| eps.iter().map(move |&e| (t, e)))
        .collect();
    let est = monte_carlo_windows(&sampler, &windows, 1 << 22, 0xC2)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, t) in ts.iter().enumerate() {
        let fit = fit_profile(&eps, &est[i * eps.len()..(i + 1) * eps.len()])?;
        pass &= fit.slope >= 0.9 && fit.r_squared >= 0.95;
        parts.push(format!(
            "t={t}: slope {:.3} r2 {:.4}",
            fit.slope, fit.r_squared
        ));
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn criterion_3() -> fractal_radii::Result<Outcome> {
    let eps = dyadic(4, 12);
    let spec = SetSpec::counterexample(CantorSpec::with_dimension(1.0 / 3.0)?, 20);
    let search = PairSearch::default();
    let p = adversarial_conditional_profile(&spec, 10.0, &eps, &search, None, 0xC3)?;
    let coarse = dyadic(4, 8);
    let one = PairSearch {
        pairs: 1,
        ..PairSearch::default()
    };
    let u = adversarial_conditional_profile(&uniform_strip(20), 10.0, &coarse, &one, None, 0xC3)?;
    let s = p.fit.slope;
    let pass = (s - 5.0 / 6.0).abs() <= 0.15 && s <= 0.9;
    Ok(Outcome {
        pass,
        detail: format!(
            "localized slope {s:.3} (target 0.833, r2 {:.4}, depth {}); full band slope {:.3}; uniform strip slope {:.3} (eps down to 2^-8)",
            p.fit.r_squared,
            p.depth,
            p.band_fit.slope,
            u.fit.slope
        ),
    })
}

fn envelope_exponent(samples: &[(f64, f64)]) -> fractal_radii::Result<f64> {
    Ok(decay_envelope_fit(samples)?.decay_exponent())
}

fn criterion_4() -> fractal_radii::Result<Outcome> {
    let circle_xi = linear_grid(4.0, 256.0, 0.05)?;
    let circle: Vec<(f64, f64)> = circle_xi
        .iter()
        .map(|&x| Ok((x, sphere_ft(2, &[x, 0.0], None)?.norm())))
        .collect::<fractal_radii::Result<_>>()?;
    let e2 = envelope_exponent(&circle)?;

    let xi3 = linear_grid(4.0, 64.0, 0.05)?;
    let mut max_dev = 0.0f64;
    let mut sph3 = Vec::new();
    for &x in &xi3 {
        let v = sphere_ft(3, &[0.0, 0.0, x], None)?;
        max_dev = max_dev.max((v.re - sphere_ft_closed_form_3d(x)).abs());
        sph3.push((x, v.norm()));
    }
    let e3 = envelope_exponent(&sph3)?;

    let mut mu = Vec::new();
    let mut mu_ok = true;
    for d in [2usize, 3] {
        let xi = linear_grid(4.0, 64.0, 0.05)?;
        let samples: Vec<(f64, f64)> = xi
            .iter()
            .map(|&x| {
                let mut v = vec![0.0; d];
                v[0] = x;
                Ok((x, mu1_directional_ft(d, &v, Direction::Opposite)?.norm()))
            })
            .collect::<fractal_radii::Result<_>>()?;
        let e = envelope_exponent(&samples)?;
        mu_ok &= (e - (d as f64 - 1.0)).abs() <= 0.15;
        mu.push(format!("mu1 d={d} exponent {e:.3}"));
    }
    let pass = (e2 - 0.5).abs() <= 0.05 && (e3 - 1.0).abs() <= 0.05 && max_dev < 1e-8 && mu_ok;
    Ok(Outcome {
        pass,
        detail: format!(
            "circle exponent {e2:.3}; sphere d=3 exponent {e3:.3} (max deviation from closed form {max_dev:.1e}); {}",
            mu.join("; ")
        ),
    })
}

/// Off-diagonal Riesz energy of the middle-thirds measure by the two-halves
/// recursion: the self-interaction of each half is the previous generation
/// rescaled, plus a directly summed cross term.
fn energy_recursion_oracle(s: f64, depth: u32) -> Vec<f64> {
    let q = 3f64.powf(s) / 2.0;
    let mut centers = vec![0.5];
    let mut out = vec![0.0];
    for n in 1..=depth {
        let left: Vec<f64> = centers.iter().map(|c| c / 3.0).collect();
        let m = 0.5f64.powi(n as i32);
        let mut cross = 0.0;
        for &x in &left {
            for &y in &left {
                cross += m * m * (y + 2.0 / 3.0 - x).powf(-s);
            }
        }
        let prev = *out.last().unwrap();
        out.push(q * prev + 2.0 * cross);
        centers = left
            .iter()
            .copied()
            .chain(left.iter().map(|x| x + 2.0 / 3.0))
            .collect();
    }
    out
}

fn criterion_5() -> fractal_radii::Result<Outcome> {
    let spec = CantorSpec::middle_thirds();
    let depths = [8u32, 10, 12];
    let mut ss = Vec::new();
    let mut off = Vec::new();
    for &n in &depths {
        let m = build_cantor(&spec, n);
        ss.push(energy_integral_with(&m, 0.5, DiagonalPolicy::self_similar_for(&spec, n))?.value);
        off.push(energy_integral(&m, 0.5)?.value);
    }
    let spread = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(0.0, f64::max);
        (hi - lo) / lo
    };
    let plateau = spread(&ss);

    let s = 0.8;
    let q = 3f64.powf(s) / 2.0;
    let oracle = energy_recursion_oracle(s, 12);
    let mut worst_oracle = 0.0f64;
    let mut ratios = Vec::new();
    let mut prev = None;
    for n in [8u32, 9, 10, 11, 12] {
        let v = energy_integral(&build_cantor(&spec, n), s)?.value;
        worst_oracle = worst_oracle.max((v / oracle[n as usize] - 1.0).abs());
        if let Some(p) = prev {
            ratios.push(v / p);
        }
        prev = Some(v);
    }
    let ratio_dev = ratios
        .iter()
        .map(|r| (r / q - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = plateau <= 0.05 && worst_oracle <= 0.10 && ratio_dev <= 0.10;
    Ok(Outcome {
        pass,
        detail: format!(
            "s=0.5 self-similar {:.4}/{:.4}/{:.4} spread {:.2}% (off-diagonal spread {:.1}%); \
             s=0.8 worst deviation from recursion {:.1e}, growth ratios {} vs {q:.4} (max dev {:.1}%)",
            ss[0],
            ss[1],
            ss[2],
            100.0 * plateau,
            100.0 * spread(&off),
            worst_oracle,
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join("/"),
            100.0 * ratio_dev
        ),
    })
}

fn criterion_6() -> fractal_radii::Result<Outcome> {
    let c = CantorSpec::with_dimension(0.9)?;
    let m = SetSpec::cantor_product(c.clone(), c).realize(10, 1 << 23)?;
    let h = m.resolution();
    let deltas = [0.02, 0.01, 0.005];
    let scales = dyadic(5, 9);
    let mut rng = batch_rng(0xC6, 0);
    let mut pass = true;
    let mut lines = Vec::new();
    let mut slopes = Vec::new();
    let mut found = 0;
    while found < 10 {
        let a = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        if !center_validity(&m, &a) {
            continue;
        }
        found += 1;
        let mut est = Vec::new();
        let mut heaviest = (0.0, 0.0);
        for &delta in &deltas {
            let grid = linear_grid(0.0, 1.5, delta / 4.0)?;
            let g = dilation_set(&m, &a, delta, 0.0, &grid)?;
            est.push(g.lebesgue_estimate);
            if delta == deltas[deltas.len() - 1] {
                for (&r, &w) in g.r_grid.iter().zip(&g.masses) {
                    if w > heaviest.1 {
                        heaviest = (r, w);
                    }
                }
            }
        }
        let ratios: Vec<f64> = est.windows(2).map(|w| w[1] / w[0]).collect();
        let stable = est.iter().all(|&e| e > 0.0) && ratios.iter().all(|r| (0.7..=1.3).contains(r));
        pass &= stable;
        let r = heaviest.0;
        let slice = annulus_mass(&m, &a, r, h)?;
        let boxes = slice_boxes(&m, &slice, scales[scales.len() - 1]);
        let dim_text = if boxes >= 50 {
            let fit = intersection_dimension(&m, &a, r, h, &scales)?;
            pass &= (fit.slope - 0.8).abs() <= 0.2;
            slopes.push(fit.slope);
            format!("slope {:.3} ({boxes} boxes)", fit.slope)
        } else {
            format!("{boxes} boxes, not fitted")
        };
        lines.push(format!(
            "a=({:.3},{:.3}) L={:.3} ratios {} r={r:.3} {dim_text}",
            a[0],
            a[1],
            est[0],
            ratios
                .iter()
                .map(|x| format!("{x:.3}"))
                .collect::<Vec<_>>()
                .join("/")
        ));
    }
    pass &= !slopes.is_empty();
    for l in &lines {
        println!("    {l}");
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len().max(1) as f64;
    Ok(Outcome {
        pass,
        detail: format!(
            "10 centers, {} slices fitted, mean intersection slope {mean:.3} (range {:.3}..{:.3})",
            slopes.len(),
            slopes.iter().copied().fold(f64::INFINITY, f64::min),
            slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        ),
    })
}

fn embedded(
    base: &DiscreteMeasure,
    map: impl Fn(&[f64]) -> Vec<f64>,
    dim: usize,
) -> fractal_radii::Result<DiscreteMeasure> {
    let coords: Vec<f64> = base.iter().flat_map(|(p, _)| map(p)).collect();
    DiscreteMeasure::new(dim, coords, base.masses().to_vec(), base.resolution())
}

fn criterion_7() -> fractal_radii::Result<Outcome> {
    let c = CantorSpec::with_dimension(0.8)?;
    let line = build_cantor(&c, 6);
    let square = SetSpec::cantor_product(c.clone(), c).realize(3, 1 << 20)?;
    let cases = [
        ("horizontal line", embedded(&line, |p| vec![p[0], 0.0], 2)?),
        (
            "tilted line",
            embedded(&line, |p| vec![p[0], 0.3 * p[0] + 0.2], 2)?,
        ),
        (
            "plane z=0",
            embedded(&square, |p| vec![p[0], p[1], 0.0], 3)?,
        ),
        (
            "tilted plane",
            embedded(
                &square,
                |p| vec![p[0], p[1], 0.5 * p[0] - 0.25 * p[1] + 1.0],
                3,
            )?,
        ),
    ];
    let eps = dyadic(2, 12);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, m) in &cases {
        for (budget, label) in [(1u128 << 24, "exhaustive"), (20_000, "sampled")] {
            let out = radii_set_measure(m, &eps, budget, 0xC7)?;
            let worst = out.iter().map(|c| c.covered_length).fold(0.0, f64::max);
            let radii: usize = out.iter().map(|c| c.radii).max().unwrap_or(0);
            let ok = worst == 0.0 && radii == 0 && out[0].exhaustive == (label == "exhaustive");
            pass &= ok;
            parts.push(format!("{name} {label}: {worst}"));
        }
    }
    Ok(Outcome {
        pass,
        detail: format!("covered length per case: {}", parts.join(", ")),
    })
}

const SMALL_CONFIGS: [(&str, &str); 9] = [
    ("radius", "experiment = radius\ndim = 2\npoints = 0,0, 2,0, 0,2\n"),
    (
        "incidence",
        "experiment = incidence\nspec.kind = product\nspec.0.kind = cantor_dim\nspec.0.dim = 0.8\n\
         spec.1.kind = cantor_dim\nspec.1.dim = 0.8\ndepth = 8\nt = 1\nepsilon = 2^-3:2^-8:0.5\n\
         mode = monte-carlo\nsamples = 200000\n",
    ),
    (
        "incidence",
        "experiment = incidence\nspec.kind = product\nspec.0.kind = cantor_dim\nspec.0.dim = 0.8\n\
         spec.1.kind = cantor_dim\nspec.1.dim = 0.8\ndepth = 2\nt = 0.5\nepsilon = 0.25, 0.125, 0.0625\n",
    ),
    (
        "sharpness",
        "experiment = sharpness\nt = 10\nepsilon = 2^-4:2^-6:0.5\npairs = 1\ncoarse_steps = 200\n\
         refine_rounds = 1\n",
    ),
    ("fourier", "experiment = fourier\ntarget = sphere\nd = 3\nxi = 1:16:+0.5\n"),
    (
        "energy",
        "experiment = energy\nspec.kind = cantor\nspec.ratio = 0.3333333333333333\ndepths = 4, 6\ns = 0.5\n",
    ),
    (
        "intersect",
        "experiment = intersect\nspec.kind = product\nspec.0.kind = cantor_dim\nspec.0.dim = 0.9\n\
         spec.1.kind = cantor_dim\nspec.1.dim = 0.9\ndepth = 6\ndelta = 0.05\nr = 0:1.5:+0.02\ncenters = 3\n\
         scales = 2^-1:2^-4:0.5\n",
    ),
    (
        "radii-set",
        "experiment = radii-set\nspec.kind = product\nspec.0.kind = cantor_dim\nspec.0.dim = 0.8\n\
         spec.1.kind = cantor_dim\nspec.1.dim = 0.8\ndepth = 4\nepsilon = 2^-2:2^-8:0.5\nbudget = 100000\n",
    ),
    (
        "dimension",
        "experiment = dimension\nspec.kind = product\nspec.0.kind = cantor_dim\nspec.0.dim = 0.8\n\
         spec.1.kind = cantor_dim\nspec.1.dim = 0.8\ndepth = 8\nscales = 2^-1:2^-6:0.5\nfrostman_s = 1.5\n\
         frostman_trials = 16\n",
    ),
];

fn bodies(files: &[std::path::PathBuf]) -> fractal_radii::Result<Vec<String>> {
    files
        .iter()
        .map(|f| {
            Ok(fs::read_to_string(f)?
                .lines()
                .filter(|l| !l.starts_with('#'))
                .collect::<Vec<_>>()
                .join("\n"))
        })
        .collect()
}

fn run_in(
    dir: &Path,
    name: &str,
    text: &str,
    threads: usize,
) -> fractal_radii::Result<Vec<String>> {
    let cfg = ExperimentConfig::parse(text, Some(Experiment::parse(name)?))?
        .with_seed(7)
        .with_output(dir.join(format!("{name}-{threads}.csv")));
    let out = run_with_threads(&cfg, Some(threads))?;
    bodies(&out.files)
}

fn criterion_8() -> fractal_radii::Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let mut pass = true;
    let mut seen = Vec::new();
    let mut mismatched = Vec::new();
    for (name, text) in SMALL_CONFIGS {
        let one = run_in(dir.path(), name, text, 1)?;
        let eight = run_in(dir.path(), name, text, 8)?;
        if one != eight || one.iter().any(|b| b.is_empty()) {
            pass = false;
            mismatched.push(name);
        }
        if !seen.contains(&name) {
            seen.push(name);
        }
    }
    pass &= seen.len() == Experiment::ALL.len();
    Ok(Outcome {
        pass,
        detail: format!(
            "{} experiments, {} configs at 1 and 8 threads; mismatches: {}",
            seen.len(),
            SMALL_CONFIGS.len(),
            if mismatched.is_empty() {
                "none".to_string()
            } else {
                mismatched.join(", ")
            }
        ),
    })
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    // Under `cargo test -- --list` style invocations there is nothing to enumerate.
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let wanted = |n: u32| {
        let picks: Vec<u32> = args.iter().skip(1).filter_map(|a| a.parse().ok()).collect();
        picks.is_empty() || picks.contains(&n)
    };
    let criteria: [(u32, Criterion); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        if !wanted(n) {
            continue;
        }
        let t = Instant::now();
        if !report(n, t, f()) {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
