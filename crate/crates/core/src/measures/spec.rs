use rand::Rng;

use crate::error::{Error, Result};
use crate::kv::KvMap;
use crate::measures::discrete::PointSource;
use crate::measures::{CantorSpec, DiscreteMeasure};

/// Default cap on materialized atoms.
pub const DEFAULT_ATOM_BUDGET: u128 = 1 << 23;

/// Generative description of a set and its natural measure.
#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec {
    Cantor(CantorSpec),
    /// `[lo, hi]` with uniform measure. Cells nest with the branching of the
    /// Cantor leaves elsewhere in the spec (see [`SetSpec::interval_branching`]).
    Interval {
        lo: f64,
        hi: f64,
    },
    /// Tensor product; dimensions add, masses multiply.
    Product(Vec<SetSpec>),
    /// `∪_{k_min <= k <= k_max} (inner + k e_1)` with mass split evenly.
    TranslateUnion {
        inner: Box<SetSpec>,
        k_min: i64,
        k_max: i64,
    },
    Scale {
        inner: Box<SetSpec>,
        factor: f64,
    },
}

impl SetSpec {
    /// `(∪_{|k| <= half_width} (C + k)) × [-half_width, half_width]`.
    pub fn counterexample(column: CantorSpec, half_width: i64) -> Self {
        SetSpec::Product(vec![
            SetSpec::TranslateUnion {
                inner: Box::new(SetSpec::Cantor(column)),
                k_min: -half_width,
                k_max: half_width,
            },
            SetSpec::Interval {
                lo: -(half_width as f64),
                hi: half_width as f64,
            },
        ])
    }

    pub fn cantor_product(a: CantorSpec, b: CantorSpec) -> Self {
        SetSpec::Product(vec![SetSpec::Cantor(a), SetSpec::Cantor(b)])
    }

    pub fn dim(&self) -> usize {
        match self {
            SetSpec::Cantor(_) | SetSpec::Interval { .. } => 1,
            SetSpec::Product(fs) => fs.iter().map(SetSpec::dim).sum(),
            SetSpec::TranslateUnion { inner, .. } | SetSpec::Scale { inner, .. } => inner.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SetSpec::Cantor(_) => Ok(()),
            SetSpec::Interval { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && hi > lo {
                    Ok(())
                } else {
                    Err(Error::Construction(format!("bad interval [{lo}, {hi}]")))
                }
            }
            SetSpec::Product(fs) => {
                if fs.is_empty() {
                    return Err(Error::Construction("empty product".into()));
                }
                fs.iter().try_for_each(SetSpec::validate)
            }
            SetSpec::TranslateUnion {
                inner,
                k_min,
                k_max,
            } => {
                if k_max < k_min {
                    return Err(Error::Construction(format!(
                        "empty translate range {k_min}..={k_max}"
                    )));
                }
                inner.validate()
            }
            SetSpec::Scale { inner, factor } => {
                if !(factor.is_finite() && *factor > 0.0) {
                    return Err(Error::Construction(format!(
                        "scale factor {factor} must be positive"
                    )));
                }
                inner.validate()
            }
        }
    }

    fn min_cantor_ratio(&self) -> Option<f64> {
        match self {
            SetSpec::Cantor(c) if c.pieces() > 1 => Some(c.ratio()),
            SetSpec::Cantor(_) | SetSpec::Interval { .. } => None,
            SetSpec::Product(fs) => fs
                .iter()
                .filter_map(SetSpec::min_cantor_ratio)
                .reduce(f64::min),
            SetSpec::TranslateUnion { inner, .. } | SetSpec::Scale { inner, .. } => {
                inner.min_cantor_ratio()
            }
        }
    }

    /// Subdivision factor per generation for interval leaves: `1/ρ` of the
    /// finest Cantor leaf when that is an integer, otherwise 2. This keeps
    /// interval cells nested across depths and, for integer `1/ρ`, the same
    /// size as the Cantor cells.
    pub fn interval_branching(&self) -> u64 {
        match self.min_cantor_ratio() {
            Some(r) => {
                let inv = 1.0 / r;
                let k = inv.round();
                if k >= 2.0 && (inv - k).abs() < 1e-9 {
                    k as u64
                } else {
                    2
                }
            }
            None => 2,
        }
    }

    fn count_with(&self, depth: u32, b: u64) -> u128 {
        match self {
            SetSpec::Cantor(c) => c.cell_count(depth),
            SetSpec::Interval { lo, hi } => {
                interval_base_cells(*lo, *hi) as u128 * (b as u128).saturating_pow(depth)
            }
            SetSpec::Product(fs) => fs
                .iter()
                .map(|f| f.count_with(depth, b))
                .fold(1u128, |a, c| a.saturating_mul(c)),
            SetSpec::TranslateUnion {
                inner,
                k_min,
                k_max,
            } => inner
                .count_with(depth, b)
                .saturating_mul((k_max - k_min + 1) as u128),
            SetSpec::Scale { inner, .. } => inner.count_with(depth, b),
        }
    }

    /// Atoms in the depth-`depth` realization.
    pub fn atom_count(&self, depth: u32) -> u128 {
        self.count_with(depth, self.interval_branching())
    }

    /// Per-axis side lengths of the generation cells.
    pub fn cell_sides(&self, depth: u32) -> Vec<f64> {
        self.sides_with(depth, self.interval_branching())
    }

    fn sides_with(&self, depth: u32, b: u64) -> Vec<f64> {
        match self {
            SetSpec::Cantor(c) => vec![c.ratio().powi(depth as i32)],
            SetSpec::Interval { lo, hi } => {
                let n = interval_base_cells(*lo, *hi) as f64 * (b as f64).powi(depth as i32);
                vec![(hi - lo) / n]
            }
            SetSpec::Product(fs) => fs.iter().flat_map(|f| f.sides_with(depth, b)).collect(),
            SetSpec::TranslateUnion { inner, .. } => inner.sides_with(depth, b),
            SetSpec::Scale { inner, factor } => inner
                .sides_with(depth, b)
                .into_iter()
                .map(|s| s * factor)
                .collect(),
        }
    }

    /// Cell diameter at `depth`.
    pub fn resolution(&self, depth: u32) -> f64 {
        self.cell_sides(depth)
            .iter()
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt()
    }

    /// Materializes the depth-`depth` measure, refusing beyond `budget` atoms.
    pub fn realize(&self, depth: u32, budget: u128) -> Result<DiscreteMeasure> {
        self.validate()?;
        let needed = self.atom_count(depth);
        if needed > budget {
            return Err(Error::resource(
                format!("realizing spec at depth {depth}"),
                needed,
                budget,
            ));
        }
        let b = self.interval_branching();
        let (coords, masses) = self.realize_with(depth, b);
        Ok(DiscreteMeasure::from_parts(
            self.dim(),
            coords,
            masses,
            self.sides_with(depth, b),
        ))
    }

    fn realize_with(&self, depth: u32, b: u64) -> (Vec<f64>, Vec<f64>) {
        match self {
            SetSpec::Cantor(c) => {
                let mu = crate::measures::build_cantor(c, depth);
                (mu.coords().to_vec(), mu.masses().to_vec())
            }
            SetSpec::Interval { lo, hi } => {
                let n = interval_base_cells(*lo, *hi) * b.pow(depth);
                let h = (hi - lo) / n as f64;
                let coords = (0..n).map(|j| lo + (j as f64 + 0.5) * h).collect();
                (coords, vec![1.0 / n as f64; n as usize])
            }
            SetSpec::Product(fs) => {
                let mut coords = vec![];
                let mut masses = vec![1.0];
                let mut dim = 0;
                for f in fs {
                    let fd = f.dim();
                    let (fc, fm) = f.realize_with(depth, b);
                    let mut nc = Vec::with_capacity(masses.len() * fm.len() * (dim + fd));
                    let mut nm = Vec::with_capacity(masses.len() * fm.len());
                    for (i, &m) in masses.iter().enumerate() {
                        let head = &coords[i * dim..(i + 1) * dim];
                        for (j, &w) in fm.iter().enumerate() {
                            nc.extend_from_slice(head);
                            nc.extend_from_slice(&fc[j * fd..(j + 1) * fd]);
                            nm.push(m * w);
                        }
                    }
                    coords = nc;
                    masses = nm;
                    dim += fd;
                }
                (coords, masses)
            }
            SetSpec::TranslateUnion {
                inner,
                k_min,
                k_max,
            } => {
                let d = inner.dim();
                let (ic, im) = inner.realize_with(depth, b);
                let count = (k_max - k_min + 1) as f64;
                let mut coords = Vec::with_capacity(ic.len() * count as usize);
                let mut masses = Vec::with_capacity(im.len() * count as usize);
                for k in *k_min..=*k_max {
                    for (p, &m) in ic.chunks_exact(d).zip(&im) {
                        coords.push(p[0] + k as f64);
                        coords.extend_from_slice(&p[1..]);
                        masses.push(m / count);
                    }
                }
                (coords, masses)
            }
            SetSpec::Scale { inner, factor } => {
                let (c, m) = inner.realize_with(depth, b);
                (c.into_iter().map(|x| x * factor).collect(), m)
            }
        }
    }

    /// Draws depth-`depth` atoms directly from the spec without materializing it.
    pub fn sampler(&self, depth: u32, jitter: bool) -> Result<SpecSampler> {
        self.validate()?;
        let b = self.interval_branching();
        Ok(SpecSampler {
            root: Node::compile(self, depth, b),
            dim: self.dim(),
            jitter,
        })
    }

    /// Parses a spec from keys under `prefix` (e.g. `"spec."`).
    pub fn from_kv(kv: &KvMap, prefix: &str) -> Result<Self> {
        let key = |k: &str| format!("{prefix}{k}");
        let kind = kv.require(&key("kind"))?;
        let spec =
            match kind {
                "cantor" => {
                    let pieces: usize = kv.int(&key("pieces"))?.unwrap_or(2);
                    let ratio = kv.require_f64(&key("ratio"))?;
                    let c = match kv.list_f64(&key("offsets"))? {
                        Some(offsets) => CantorSpec::new(pieces, ratio, offsets)?,
                        None => CantorSpec::evenly_spaced(pieces, ratio)?,
                    };
                    SetSpec::Cantor(c)
                }
                "cantor_dim" => {
                    SetSpec::Cantor(CantorSpec::with_dimension(kv.require_f64(&key("dim"))?)?)
                }
                "interval" => SetSpec::Interval {
                    lo: kv.require_f64(&key("lo"))?,
                    hi: kv.require_f64(&key("hi"))?,
                },
                "product" => {
                    let mut fs = vec![];
                    while kv.contains(&format!("{prefix}{}.kind", fs.len())) {
                        fs.push(SetSpec::from_kv(kv, &format!("{prefix}{}.", fs.len()))?);
                    }
                    SetSpec::Product(fs)
                }
                "union" => SetSpec::TranslateUnion {
                    k_min: kv.require(&key("k_min"))?.parse().map_err(|_| {
                        Error::Config(format!("`{}` must be an integer", key("k_min")))
                    })?,
                    k_max: kv.require(&key("k_max"))?.parse().map_err(|_| {
                        Error::Config(format!("`{}` must be an integer", key("k_max")))
                    })?,
                    inner: Box::new(SetSpec::from_kv(kv, &key("inner."))?),
                },
                "scale" => SetSpec::Scale {
                    factor: kv.require_f64(&key("factor"))?,
                    inner: Box::new(SetSpec::from_kv(kv, &key("inner."))?),
                },
                "counterexample" => {
                    let column = if kv.contains(&key("column.kind")) {
                        match SetSpec::from_kv(kv, &key("column."))? {
                            SetSpec::Cantor(c) => c,
                            _ => {
                                return Err(Error::Config(format!(
                                    "`{}` must be a Cantor set",
                                    key("column.kind")
                                )))
                            }
                        }
                    } else {
                        CantorSpec::with_dimension(kv.require_f64(&key("alpha"))?)?
                    };
                    let k: i64 = kv.int(&key("half_width"))?.unwrap_or(20);
                    SetSpec::counterexample(column, k)
                }
                other => return Err(Error::Config(format!("unknown spec kind `{other}`"))),
            };
        spec.validate()?;
        Ok(spec)
    }

    /// Inverse of [`SetSpec::from_kv`] (always writes the expanded form).
    pub fn to_kv(&self, prefix: &str, out: &mut Vec<(String, String)>) {
        let key = |k: &str| format!("{prefix}{k}");
        match self {
            SetSpec::Cantor(c) => {
                out.push((key("kind"), "cantor".into()));
                out.push((key("pieces"), c.pieces().to_string()));
                out.push((key("ratio"), format!("{:?}", c.ratio())));
                let offs: Vec<String> = c.offsets().iter().map(|o| format!("{o:?}")).collect();
                out.push((key("offsets"), offs.join(", ")));
            }
            SetSpec::Interval { lo, hi } => {
                out.push((key("kind"), "interval".into()));
                out.push((key("lo"), format!("{lo:?}")));
                out.push((key("hi"), format!("{hi:?}")));
            }
            SetSpec::Product(fs) => {
                out.push((key("kind"), "product".into()));
                for (i, f) in fs.iter().enumerate() {
                    f.to_kv(&format!("{prefix}{i}."), out);
                }
            }
            SetSpec::TranslateUnion {
                inner,
                k_min,
                k_max,
            } => {
                out.push((key("kind"), "union".into()));
                out.push((key("k_min"), k_min.to_string()));
                out.push((key("k_max"), k_max.to_string()));
                inner.to_kv(&key("inner."), out);
            }
            SetSpec::Scale { inner, factor } => {
                out.push((key("kind"), "scale".into()));
                out.push((key("factor"), format!("{factor:?}")));
                inner.to_kv(&key("inner."), out);
            }
        }
    }

    /// Spec file text (`key = value` lines, no prefix).
    pub fn to_text(&self) -> String {
        let mut pairs = vec![];
        self.to_kv("", &mut pairs);
        pairs
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

fn interval_base_cells(lo: f64, hi: f64) -> u64 {
    ((hi - lo) - 1e-9).ceil().max(1.0) as u64
}

/// Spec compiled for fast repeated sampling.
#[derive(Debug, Clone)]
enum Node {
    Cantor {
        offsets: Vec<f64>,
        scales: Vec<f64>,
        cell: f64,
    },
    Interval {
        lo: f64,
        cell: f64,
        cells: u64,
    },
    Product(Vec<(Node, usize)>),
    Union {
        inner: Box<Node>,
        k_min: i64,
        count: u64,
    },
    Scale {
        inner: Box<Node>,
        factor: f64,
    },
}

impl Node {
    fn compile(spec: &SetSpec, depth: u32, b: u64) -> Node {
        match spec {
            SetSpec::Cantor(c) => Node::Cantor {
                offsets: c.offsets().to_vec(),
                scales: (0..depth).map(|k| c.ratio().powi(k as i32)).collect(),
                cell: c.ratio().powi(depth as i32),
            },
            SetSpec::Interval { lo, hi } => {
                let cells = interval_base_cells(*lo, *hi) * b.pow(depth);
                Node::Interval {
                    lo: *lo,
                    cell: (hi - lo) / cells as f64,
                    cells,
                }
            }
            SetSpec::Product(fs) => Node::Product(
                fs.iter()
                    .map(|f| (Node::compile(f, depth, b), f.dim()))
                    .collect(),
            ),
            SetSpec::TranslateUnion {
                inner,
                k_min,
                k_max,
            } => Node::Union {
                inner: Box::new(Node::compile(inner, depth, b)),
                k_min: *k_min,
                count: (k_max - k_min + 1) as u64,
            },
            SetSpec::Scale { inner, factor } => Node::Scale {
                inner: Box::new(Node::compile(inner, depth, b)),
                factor: *factor,
            },
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64], jitter: bool) {
        match self {
            Node::Cantor {
                offsets,
                scales,
                cell,
            } => {
                let m = offsets.len();
                let mut left = 0.0;
                for s in scales {
                    left += offsets[rng.gen_range(0..m)] * s;
                }
                let u = if jitter { rng.gen::<f64>() } else { 0.5 };
                out[0] = left + u * cell;
            }
            Node::Interval { lo, cell, cells } => {
                let j = rng.gen_range(0..*cells);
                let u = if jitter { rng.gen::<f64>() } else { 0.5 };
                out[0] = lo + (j as f64 + u) * cell;
            }
            Node::Product(fs) => {
                let mut off = 0;
                for (f, d) in fs {
                    f.sample(rng, &mut out[off..off + d], jitter);
                    off += d;
                }
            }
            Node::Union {
                inner,
                k_min,
                count,
            } => {
                inner.sample(rng, out, jitter);
                out[0] += (k_min + rng.gen_range(0..*count) as i64) as f64;
            }
            Node::Scale { inner, factor } => {
                inner.sample(rng, out, jitter);
                for c in out.iter_mut() {
                    *c *= factor;
                }
            }
        }
    }
}

/// i.i.d. draws from a spec's depth-`n` measure.
#[derive(Debug, Clone)]
pub struct SpecSampler {
    root: Node,
    dim: usize,
    jitter: bool,
}

impl SpecSampler {
    pub fn jittered(&self) -> bool {
        self.jitter
    }
}

impl PointSource for SpecSampler {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.root.sample(rng, out, self.jitter);
    }
}
