use std::io::{BufRead, Write};
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::csvio::fmt_real;
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Tolerance on the total mass of a probability measure.
pub const MASS_TOL: f64 = 1e-12;

/// Finitely supported probability measure in `R^d`.
///
/// Coordinates are stored row-major (`len * dim` values). Every atom stands
/// for a generation cell: an axis-aligned box with sides `cell_sides`, whose
/// diagonal is the measure's `resolution`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    coords: Vec<f64>,
    masses: Vec<f64>,
    cell_sides: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validating constructor. Masses must be positive and sum to one, atoms
    /// must be distinct and finite.
    pub fn new(dim: usize, coords: Vec<f64>, masses: Vec<f64>, resolution: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        if coords.len() != masses.len() * dim {
            return Err(Error::input(format!(
                "{} coordinates do not form {} points in R^{dim}",
                coords.len(),
                masses.len()
            )));
        }
        if masses.is_empty() {
            return Err(Error::input("measure has no atoms"));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::input(format!(
                "resolution {resolution} must be positive"
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("non-finite atom coordinate"));
        }
        if masses.iter().any(|&m| !(m > 0.0 && m <= 1.0)) {
            return Err(Error::input("atom masses must lie in (0, 1]"));
        }
        let total = compensated_sum(&masses);
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::input(format!("masses sum to {total}, not 1")));
        }
        let side = resolution / (dim as f64).sqrt();
        let mu = DiscreteMeasure {
            dim,
            coords,
            masses,
            cell_sides: vec![side; dim],
        };
        if let Some((i, j)) = mu.duplicate_atoms() {
            return Err(Error::input(format!("atoms {i} and {j} coincide")));
        }
        Ok(mu)
    }

    /// Trusted constructor for the built-in generators.
    pub(crate) fn from_parts(
        dim: usize,
        coords: Vec<f64>,
        masses: Vec<f64>,
        cell_sides: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(coords.len(), masses.len() * dim);
        debug_assert_eq!(cell_sides.len(), dim);
        DiscreteMeasure {
            dim,
            coords,
            masses,
            cell_sides,
        }
    }

    /// A single unit atom.
    pub fn dirac(point: &[f64]) -> Self {
        Self::from_parts(
            point.len(),
            point.to_vec(),
            vec![1.0],
            vec![1e-12; point.len()],
        )
    }

    /// Equal-mass atoms at the given points (assumed distinct).
    pub fn uniform_on(dim: usize, points: &[f64], resolution: f64) -> Result<Self> {
        let n = points.len() / dim.max(1);
        Self::new(dim, points.to_vec(), vec![1.0 / n as f64; n], resolution)
    }

    /// `n` equally spaced atoms on the unit circle in `R^2`.
    pub fn uniform_circle(n: usize) -> Self {
        let step = std::f64::consts::TAU / n as f64;
        let mut coords = Vec::with_capacity(2 * n);
        for j in 0..n {
            let th = (j as f64 + 0.5) * step;
            coords.push(th.cos());
            coords.push(th.sin());
        }
        let chord = 2.0 * (step / 2.0).sin();
        Self::from_parts(
            2,
            coords,
            vec![1.0 / n as f64; n],
            vec![chord / 2f64.sqrt(); 2],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn cell_sides(&self) -> &[f64] {
        &self.cell_sides
    }

    /// Diameter of the generation cells.
    pub fn resolution(&self) -> f64 {
        self.cell_sides.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(&self.masses)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coords
            .chunks_exact(self.dim)
            .zip(self.masses.iter().copied())
    }

    /// Lower and upper corners of the bounding box of the atoms.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.coords.chunks_exact(self.dim) {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Diagonal of the bounding box; an upper bound on the support diameter
    /// within a factor `sqrt(d)`.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub fn translated(&self, v: &[f64]) -> Self {
        assert_eq!(v.len(), self.dim);
        let mut coords = self.coords.clone();
        for p in coords.chunks_exact_mut(self.dim) {
            for (c, dv) in p.iter_mut().zip(v) {
                *c += dv;
            }
        }
        Self::from_parts(
            self.dim,
            coords,
            self.masses.clone(),
            self.cell_sides.clone(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let coords = self.coords.iter().map(|c| c * factor).collect();
        let sides = self.cell_sides.iter().map(|s| s * factor.abs()).collect();
        Self::from_parts(self.dim, coords, self.masses.clone(), sides)
    }

    fn duplicate_atoms(&self) -> Option<(usize, usize)> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_unstable_by(|&a, &b| {
            self.point(a)
                .iter()
                .zip(self.point(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        idx.windows(2)
            .find(|w| self.point(w[0]) == self.point(w[1]))
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }

    /// Sampler over atoms, optionally spreading each draw uniformly in its cell.
    pub fn sampler(&self, jitter: bool) -> AtomSampler<'_> {
        AtomSampler {
            measure: self,
            index: WeightedIndex::new(&self.masses).expect("masses validated positive"),
            jitter,
        }
    }

    /// Writes the measure file: `# d=<d> resolution=<h>` then `x_1,...,x_d,mass`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# d={} resolution={}",
            self.dim,
            fmt_real(self.resolution())
        )?;
        let mut line = String::new();
        for (p, m) in self.iter() {
            line.clear();
            for c in p {
                line.push_str(&fmt_real(*c));
                line.push(',');
            }
            line.push_str(&fmt_real(m));
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::input("empty measure file"))??;
        let (dim, resolution) = parse_header(&header)?;
        let mut coords = Vec::new();
        let mut masses = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != dim + 1 {
                return Err(Error::input(format!(
                    "measure row {} has {} fields, expected {}",
                    lineno + 2,
                    fields.len(),
                    dim + 1
                )));
            }
            for f in &fields[..dim] {
                coords.push(parse_f64(f)?);
            }
            masses.push(parse_f64(fields[dim])?);
        }
        Self::new(dim, coords, masses, resolution)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::input(format!("not a number: {s:?}")))
}

fn parse_header(line: &str) -> Result<(usize, f64)> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::input("measure file must start with '# d=... resolution=...'"))?;
    let mut dim = None;
    let mut res = None;
    for tok in body.split_whitespace() {
        if let Some(v) = tok.strip_prefix("d=") {
            dim = Some(
                v.parse::<usize>()
                    .map_err(|_| Error::input(format!("bad d: {v}")))?,
            );
        } else if let Some(v) = tok.strip_prefix("resolution=") {
            res = Some(parse_f64(v)?);
        }
    }
    match (dim, res) {
        (Some(d), Some(r)) => Ok((d, r)),
        _ => Err(Error::input(format!("incomplete measure header: {line:?}"))),
    }
}

/// Draws i.i.d. points from a [`DiscreteMeasure`].
pub struct AtomSampler<'a> {
    measure: &'a DiscreteMeasure,
    index: WeightedIndex<f64>,
    jitter: bool,
}

impl<'a> AtomSampler<'a> {
    pub fn jittered(&self) -> bool {
        self.jitter
    }
}

/// Anything that can produce i.i.d. points in `R^d`.
pub trait PointSource: Sync {
    fn dim(&self) -> usize;
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]);
}

impl PointSource for AtomSampler<'_> {
    fn dim(&self) -> usize {
        self.measure.dim
    }

    #[inline]
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let i = self.index.sample(rng);
        out.copy_from_slice(self.measure.point(i));
        if self.jitter {
            for (c, s) in out.iter_mut().zip(&self.measure.cell_sides) {
                *c += s * (rng.gen::<f64>() - 0.5);
            }
        }
    }
}
