//! Config-driven experiments with deterministic seeding and CSV output.
//!
//! A config is a flat `key = value` file (see [`crate::kv`]). Three keys are
//! shared by every experiment: `experiment`, `seed` and `output`. Measures
//! come either from `spec.*` keys with a `depth`, or from `measure_file`.
//! Every other key must be used by the named experiment; leftovers are
//! reported as errors before any work starts.
//!
//! Each run writes a main CSV plus companions (`<stem>.fit.csv`,
//! `<stem>.intervals.csv`, `<stem>.summary.csv`) depending on the
//! experiment. Files open with `#` comment lines naming the tool, version,
//! config hash, seed and wall-clock; the body below is identical for
//! identical configs regardless of thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::circumsphere::{circumsphere, MAX_DIM};
use crate::csvio::{fmt_real, row};
use crate::error::{Error, Result};
use crate::fit::{FitPoint, ScalingFit};
use crate::incidence::{exhaustive_windows, monte_carlo_windows, Mode, DEFAULT_TUPLE_BUDGET};
use crate::intersection::{
    annulus_mass, center_validity, dilation_set, intersection_dimension, radii_set_measure_with,
    slice_boxes, DEFAULT_RADII_BUDGET,
};
use crate::kv::{parse_list, KvMap};
use crate::measures::{
    box_dimension, frostman_ratio, DiscreteMeasure, SetSpec, DEFAULT_ATOM_BUDGET,
};
use crate::rng::batch_rng;
use crate::sharpness::{adversarial_conditional_profile, uniform_strip, PairSearch};
use crate::spectral::{
    decay_envelope_fit, energy_integral_with, measure_ft, mu1_directional_ft, sphere_ft,
    DiagonalPolicy, Direction,
};

/// Environment variable that relocates relative output paths.
pub const OUT_DIR_ENV: &str = "FRACTAL_RADII_OUT_DIR";

pub const TOOL: &str = "fractal-radii";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Radius,
    Incidence,
    Sharpness,
    Fourier,
    Energy,
    Intersect,
    RadiiSet,
    Dimension,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Radius,
        Experiment::Incidence,
        Experiment::Sharpness,
        Experiment::Fourier,
        Experiment::Energy,
        Experiment::Intersect,
        Experiment::RadiiSet,
        Experiment::Dimension,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Radius => "radius",
            Experiment::Incidence => "incidence",
            Experiment::Sharpness => "sharpness",
            Experiment::Fourier => "fourier",
            Experiment::Energy => "energy",
            Experiment::Intersect => "intersect",
            Experiment::RadiiSet => "radii-set",
            Experiment::Dimension => "dimension",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// A parsed experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: KvMap,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    /// Directory that relative input paths are resolved against.
    pub base_dir: PathBuf,
    text: String,
}

impl ExperimentConfig {
    /// Parses config text. `experiment` overrides or must agree with the
    /// config's own `experiment` key; one of the two is required.
    pub fn parse(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        let params = KvMap::parse(text)?;
        let named = params
            .get("experiment")
            .map(Experiment::parse)
            .transpose()?;
        let experiment = match (experiment, named) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!(
                    "config names experiment `{}` but `{}` was requested",
                    b.name(),
                    a.name()
                )))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Config("no experiment named".into())),
        };
        let seed = params.int_or("seed", 0u64)?;
        let output_path = params.get("output").map(PathBuf::from);
        Ok(ExperimentConfig {
            experiment,
            params,
            seed,
            output_path,
            base_dir: PathBuf::from("."),
            text: text.to_string(),
        })
    }

    pub fn load(path: &Path, experiment: Option<Experiment>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text, experiment)?;
        if let Some(dir) = path.parent() {
            cfg.base_dir = dir.to_path_buf();
        }
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_output(mut self, path: impl Into<PathBuf>) -> Self {
        self.output_path = Some(path.into());
        self
    }

    /// FNV-1a hash of the config text.
    pub fn hash(&self) -> u64 {
        self.text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }

    /// Main output path after applying the output-directory override.
    pub fn resolved_output(&self) -> PathBuf {
        let p = self
            .output_path
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.experiment.name())));
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if p.is_relative() => Path::new(&dir).join(p),
            _ => p,
        }
    }

    fn input_path(&self, p: &str) -> PathBuf {
        let p = PathBuf::from(p);
        if p.is_relative() {
            self.base_dir.join(p)
        } else {
            p
        }
    }
}

/// Files written by [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    /// One-line human summary.
    pub summary: String,
}

/// Runs the experiment on a dedicated pool of `threads` workers (all cores
/// when `None`). Thread count never changes results.
pub fn run_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<RunOutput> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::input("thread count must be positive"));
        }
        b = b.num_threads(n);
    }
    let pool = b
        .build()
        .map_err(|e| Error::input(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run(config))
}

/// Plans, checks for unused keys, executes and writes output files.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let plan = Plan::build(config)?;
    config.params.ensure_consumed()?;
    let tables = plan.execute(config.seed)?;
    let elapsed = started.elapsed().as_secs_f64();
    let main = config.resolved_output();
    if let Some(dir) = main.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut files = Vec::new();
    let mut summary = String::new();
    for t in &tables {
        let path = companion(&main, t.suffix);
        fs::write(&path, t.render(config, elapsed))?;
        files.push(path);
        if summary.is_empty() {
            summary = t.summary.clone();
        }
    }
    Ok(RunOutput { files, summary })
}

fn companion(main: &Path, suffix: &str) -> PathBuf {
    if suffix.is_empty() {
        return main.to_path_buf();
    }
    let stem = main
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    main.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Dry-run report.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub experiment: Option<String>,
    pub dim: Option<usize>,
    pub atoms: Option<u128>,
    pub tuples: Option<u128>,
    pub budget: Option<u128>,
    /// `none`, `input` or `resource`.
    pub would_fail: &'static str,
    pub message: String,
}

impl ValidationReport {
    pub fn to_text(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", opt(self.experiment.clone()));
        let _ = writeln!(s, "dim: {}", opt(self.dim.map(|v| v.to_string())));
        let _ = writeln!(s, "atoms: {}", opt(self.atoms.map(|v| v.to_string())));
        let _ = writeln!(s, "tuples: {}", opt(self.tuples.map(|v| v.to_string())));
        let _ = writeln!(s, "budget: {}", opt(self.budget.map(|v| v.to_string())));
        let _ = writeln!(s, "would_fail: {}", self.would_fail);
        if !self.message.is_empty() {
            let _ = writeln!(s, "message: {}", self.message);
        }
        s
    }

    fn failed(experiment: Option<String>, e: &Error) -> Self {
        ValidationReport {
            experiment,
            dim: None,
            atoms: None,
            tuples: None,
            budget: None,
            would_fail: if e.exit_code() == 2 {
                "resource"
            } else {
                "input"
            },
            message: e.to_string(),
        }
    }
}

/// Validates config text without running anything.
pub fn validate_text(text: &str, experiment: Option<Experiment>) -> ValidationReport {
    match ExperimentConfig::parse(text, experiment) {
        Ok(cfg) => validate(&cfg),
        Err(e) => ValidationReport::failed(experiment.map(|e| e.name().to_string()), &e),
    }
}

/// Reports sizes and the expected cost of the dominant computation.
pub fn validate(config: &ExperimentConfig) -> ValidationReport {
    let name = Some(config.experiment.name().to_string());
    let plan = match Plan::build(config).and_then(|p| {
        config.params.ensure_consumed()?;
        Ok(p)
    }) {
        Ok(p) => p,
        Err(e) => return ValidationReport::failed(name, &e),
    };
    match plan.cost() {
        Ok(c) => {
            let over_atoms = matches!((c.atoms, c.atom_budget), (Some(a), Some(b)) if a > b);
            let over_tuples =
                c.hard_budget && matches!((c.tuples, c.budget), (Some(t), Some(b)) if t > b);
            let (would_fail, message) = if over_atoms {
                (
                    "resource",
                    format!(
                        "atoms exceed the atom budget {}",
                        c.atom_budget.unwrap_or(0)
                    ),
                )
            } else if over_tuples {
                ("resource", "tuple count exceeds the budget".to_string())
            } else {
                ("none", String::new())
            };
            ValidationReport {
                experiment: name,
                dim: c.dim,
                atoms: c.atoms,
                tuples: c.tuples,
                budget: c.budget,
                would_fail,
                message,
            }
        }
        Err(e) => ValidationReport::failed(name, &e),
    }
}

struct Cost {
    dim: Option<usize>,
    atoms: Option<u128>,
    atom_budget: Option<u128>,
    tuples: Option<u128>,
    budget: Option<u128>,
    /// Exceeding `budget` is an error (rather than a switch to sampling).
    hard_budget: bool,
}

/// One output file.
struct Table {
    suffix: &'static str,
    notes: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    summary: String,
}

impl Table {
    fn new(suffix: &'static str, columns: &[&'static str]) -> Self {
        Table {
            suffix,
            notes: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: String::new(),
        }
    }

    fn render(&self, config: &ExperimentConfig, elapsed: f64) -> String {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut s = String::new();
        let _ = writeln!(s, "# tool={TOOL} version={}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# experiment={}", config.experiment.name());
        let _ = writeln!(s, "# config_hash={:016x}", config.hash());
        let _ = writeln!(s, "# seed={}", config.seed);
        let _ = writeln!(s, "# timestamp_unix={now} wall_clock_s={elapsed:.3}");
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&row(r));
            s.push('\n');
        }
        s
    }
}

fn fit_row(fit: &ScalingFit) -> Vec<String> {
    vec![
        fmt_real(fit.slope),
        fmt_real(fit.intercept),
        fmt_real(fit.r_squared),
        fit.n_used.to_string(),
    ]
}

const FIT_COLUMNS: [&str; 4] = ["slope", "intercept", "r_squared", "n_points"];

/// Where a measure comes from.
#[derive(Debug, Clone)]
enum Source {
    Spec {
        spec: SetSpec,
        depth: u32,
        budget: u128,
    },
    File(PathBuf),
}

impl Source {
    fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let kv = &cfg.params;
        let budget = kv.int_or("atom_budget", DEFAULT_ATOM_BUDGET)?;
        match (kv.get("measure_file"), kv.has_prefix("spec.")) {
            (Some(_), true) => Err(Error::Config(
                "give either `measure_file` or `spec.*` keys, not both".into(),
            )),
            (Some(f), false) => Ok(Source::File(cfg.input_path(f))),
            (None, true) => Ok(Source::Spec {
                spec: SetSpec::from_kv(kv, "spec.")?,
                depth: kv
                    .int("depth")?
                    .ok_or_else(|| Error::Config("missing key `depth`".into()))?,
                budget,
            }),
            (None, false) => Err(Error::Config(
                "no measure: give `spec.*` keys with `depth`, or `measure_file`".into(),
            )),
        }
    }

    fn realize(&self) -> Result<DiscreteMeasure> {
        match self {
            Source::Spec {
                spec,
                depth,
                budget,
            } => spec.realize(*depth, *budget),
            Source::File(p) => DiscreteMeasure::load(p),
        }
    }

    fn depth(&self) -> Option<u32> {
        match self {
            Source::Spec { depth, .. } => Some(*depth),
            Source::File(_) => None,
        }
    }

    fn shape(&self) -> Result<(usize, u128, Option<u128>)> {
        match self {
            Source::Spec {
                spec,
                depth,
                budget,
            } => Ok((spec.dim(), spec.atom_count(*depth), Some(*budget))),
            Source::File(p) => {
                let m = DiscreteMeasure::load(p)?;
                Ok((m.dim(), m.len() as u128, None))
            }
        }
    }

    fn depth_field(&self) -> String {
        self.depth().map(|d| d.to_string()).unwrap_or_default()
    }
}

fn require_grid(kv: &KvMap, key: &str) -> Result<Vec<f64>> {
    let g = kv
        .grid(key)?
        .ok_or_else(|| Error::Config(format!("missing key `{key}`")))?;
    if g.is_empty() {
        return Err(Error::Config(format!("`{key}` is empty")));
    }
    Ok(g)
}

fn pow_u128(n: u128, e: u32) -> u128 {
    n.checked_pow(e).unwrap_or(u128::MAX)
}

enum Plan {
    Radius {
        dim: usize,
        tuples: Vec<Vec<f64>>,
    },
    Incidence {
        source: Source,
        t: f64,
        eps: Vec<f64>,
        mode: Mode,
        budget: u128,
        samples: usize,
        jitter: bool,
    },
    Sharpness {
        spec: SetSpec,
        t: f64,
        eps: Vec<f64>,
        search: PairSearch,
        depth: Option<u32>,
    },
    Fourier {
        target: FourierTarget,
        xi: Vec<f64>,
        axis: Option<Vec<f64>>,
        quad_points: Option<usize>,
        fit: bool,
    },
    Energy {
        spec: Option<SetSpec>,
        file: Option<PathBuf>,
        depths: Vec<u32>,
        s: Vec<f64>,
        self_similar: bool,
        budget: u128,
    },
    Intersect {
        source: Source,
        delta: f64,
        threshold: f64,
        r_grid: Vec<f64>,
        centers: CenterPlan,
        scales: Option<Vec<f64>>,
        dimension_delta: Option<f64>,
    },
    RadiiSet {
        source: Source,
        eps: Vec<f64>,
        budget: u128,
        max_radius: Option<f64>,
    },
    Dimension {
        source: Source,
        scales: Vec<f64>,
        frostman: Option<(f64, usize)>,
    },
}

enum FourierTarget {
    Sphere(usize),
    Mu1(usize, Direction),
    Measure(Source),
}

enum CenterPlan {
    Fixed(Vec<f64>),
    Random {
        count: usize,
        lo: Option<Vec<f64>>,
        hi: Option<Vec<f64>>,
    },
}

impl Plan {
    fn build(cfg: &ExperimentConfig) -> Result<Plan> {
        let kv = &cfg.params;
        Ok(match cfg.experiment {
            Experiment::Radius => {
                let dim: usize = kv
                    .int("dim")?
                    .ok_or_else(|| Error::Config("missing key `dim`".into()))?;
                if dim == 0 || dim > MAX_DIM {
                    return Err(Error::Config(format!("`dim` must be in 1..={MAX_DIM}")));
                }
                let width = dim * (dim + 1);
                let mut rows: Vec<Vec<f64>> = Vec::new();
                if let Some(p) = kv.get("input") {
                    let text = fs::read_to_string(cfg.input_path(p))?;
                    for (n, line) in text.lines().enumerate() {
                        let line = line.trim();
                        if line.is_empty() || line.starts_with('#') {
                            continue;
                        }
                        let vals = parse_list(line)
                            .map_err(|e| Error::input(format!("tuple file line {}: {e}", n + 1)))?;
                        rows.push(vals);
                    }
                }
                if let Some(v) = kv.list_f64("points")? {
                    rows.push(v);
                }
                if rows.is_empty() {
                    return Err(Error::Config(
                        "give `points` or an `input` tuple file".into(),
                    ));
                }
                for (i, r) in rows.iter().enumerate() {
                    if r.len() != width {
                        return Err(Error::input(format!(
                            "tuple {i} has {} coordinates, expected {width}",
                            r.len()
                        )));
                    }
                }
                Plan::Radius { dim, tuples: rows }
            }
            Experiment::Incidence => {
                let mode = Mode::parse(kv.get("mode").unwrap_or("exhaustive"))?;
                Plan::Incidence {
                    source: Source::from_config(cfg)?,
                    t: kv.require_f64("t")?,
                    eps: require_grid(kv, "epsilon")?,
                    mode,
                    budget: kv.int_or("budget", DEFAULT_TUPLE_BUDGET)?,
                    samples: kv.int_or("samples", 1usize << 20)?,
                    jitter: kv.bool_or("jitter", false)?,
                }
            }
            Experiment::Sharpness => {
                let uniform = kv.bool_or("uniform", false)?;
                let spec = if kv.has_prefix("spec.") {
                    if uniform {
                        return Err(Error::Config(
                            "`uniform` cannot be combined with `spec.*`".into(),
                        ));
                    }
                    SetSpec::from_kv(kv, "spec.")?
                } else {
                    let k: i64 = kv.int_or("half_width", 20)?;
                    if uniform {
                        uniform_strip(k)
                    } else {
                        let alpha = kv.f64_or("alpha", 1.0 / 3.0)?;
                        SetSpec::counterexample(crate::CantorSpec::with_dimension(alpha)?, k)
                    }
                };
                let d = PairSearch::default();
                let search = PairSearch {
                    pairs: kv.int_or("pairs", d.pairs)?,
                    a_min: kv.f64_or("a_min", d.a_min)?,
                    a_max: kv.f64_or("a_max", d.a_max)?,
                    coarse_steps: kv.int("coarse_steps")?,
                    refine_rounds: kv.int_or("refine_rounds", d.refine_rounds)?,
                };
                let eps = match kv.grid("epsilon")? {
                    Some(g) => g,
                    None => crate::kv::parse_grid("2^-4:2^-12:0.5")?,
                };
                Plan::Sharpness {
                    spec,
                    t: kv.f64_or("t", 10.0)?,
                    eps,
                    search,
                    depth: kv.int("depth")?,
                }
            }
            Experiment::Fourier => {
                let target = match kv.get("target").unwrap_or("sphere") {
                    "sphere" => FourierTarget::Sphere(kv.int_or("d", 2)?),
                    "mu1" => FourierTarget::Mu1(
                        kv.int_or("d", 2)?,
                        Direction::parse(kv.get("direction").unwrap_or("opposite"))?,
                    ),
                    "measure" => FourierTarget::Measure(Source::from_config(cfg)?),
                    other => {
                        return Err(Error::Config(format!("unknown fourier target `{other}`")))
                    }
                };
                if let FourierTarget::Sphere(d) | FourierTarget::Mu1(d, _) = target {
                    if d != 2 && d != 3 {
                        return Err(Error::Config(format!("`d` must be 2 or 3, got {d}")));
                    }
                }
                Plan::Fourier {
                    target,
                    xi: require_grid(kv, "xi")?,
                    axis: kv.list_f64("axis")?,
                    quad_points: kv.int("quad_points")?,
                    fit: kv.bool_or("fit", true)?,
                }
            }
            Experiment::Energy => {
                let (spec, file) = match kv.get("measure_file") {
                    Some(f) => (None, Some(cfg.input_path(f))),
                    None => (Some(SetSpec::from_kv(kv, "spec.")?), None),
                };
                let mut depths: Vec<u32> = match kv.list_f64("depths")? {
                    Some(v) => v.into_iter().map(|d| d as u32).collect(),
                    None => kv.int::<u32>("depth")?.into_iter().collect(),
                };
                if spec.is_some() && depths.is_empty() {
                    return Err(Error::Config("missing key `depth` or `depths`".into()));
                }
                if spec.is_none() {
                    if !depths.is_empty() {
                        return Err(Error::Config(
                            "depths apply only to `spec.*` measures".into(),
                        ));
                    }
                    depths.push(0);
                }
                let self_similar = match kv.get("diagonal").unwrap_or("off-diagonal") {
                    "off-diagonal" => false,
                    "self-similar" => true,
                    other => {
                        return Err(Error::Config(format!("unknown diagonal policy `{other}`")))
                    }
                };
                if self_similar && !matches!(spec, Some(SetSpec::Cantor(_))) {
                    return Err(Error::Config(
                        "the self-similar diagonal needs a `cantor` spec".into(),
                    ));
                }
                let s = kv
                    .list_f64("s")?
                    .ok_or_else(|| Error::Config("missing key `s`".into()))?;
                Plan::Energy {
                    spec,
                    file,
                    depths,
                    s,
                    self_similar,
                    budget: kv.int_or("atom_budget", DEFAULT_ATOM_BUDGET)?,
                }
            }
            Experiment::Intersect => {
                let centers = match kv.list_f64("center")? {
                    Some(c) => CenterPlan::Fixed(c),
                    None => CenterPlan::Random {
                        count: kv.int_or("centers", 10)?,
                        lo: kv.list_f64("center_lo")?,
                        hi: kv.list_f64("center_hi")?,
                    },
                };
                Plan::Intersect {
                    source: Source::from_config(cfg)?,
                    delta: kv.require_f64("delta")?,
                    threshold: kv.f64_or("threshold", 0.0)?,
                    r_grid: require_grid(kv, "r")?,
                    centers,
                    scales: kv.grid("scales")?,
                    dimension_delta: kv.f64("dimension_delta")?,
                }
            }
            Experiment::RadiiSet => Plan::RadiiSet {
                source: Source::from_config(cfg)?,
                eps: require_grid(kv, "epsilon")?,
                budget: kv.int_or("budget", DEFAULT_RADII_BUDGET)?,
                max_radius: kv.f64("max_radius")?,
            },
            Experiment::Dimension => {
                let frostman = match kv.f64("frostman_s")? {
                    Some(s) => Some((s, kv.int_or("frostman_trials", 64usize)?)),
                    None => None,
                };
                Plan::Dimension {
                    source: Source::from_config(cfg)?,
                    scales: require_grid(kv, "scales")?,
                    frostman,
                }
            }
        })
    }

    fn cost(&self) -> Result<Cost> {
        let from_source = |src: &Source, tuple_exp: Option<u32>| -> Result<Cost> {
            let (dim, atoms, atom_budget) = src.shape()?;
            Ok(Cost {
                dim: Some(dim),
                atoms: Some(atoms),
                atom_budget,
                tuples: tuple_exp.map(|e| pow_u128(atoms, e)),
                budget: None,
                hard_budget: false,
            })
        };
        Ok(match self {
            Plan::Radius { dim, tuples } => Cost {
                dim: Some(*dim),
                atoms: None,
                atom_budget: None,
                tuples: Some(tuples.len() as u128),
                budget: None,
                hard_budget: false,
            },
            Plan::Incidence {
                source,
                mode,
                budget,
                samples,
                ..
            } => {
                let mut c = from_source(source, None)?;
                let d = c.dim.unwrap_or(0) as u32;
                match mode {
                    Mode::Exhaustive => {
                        c.tuples = c.atoms.map(|a| pow_u128(a, d + 1));
                        c.budget = Some(*budget);
                        c.hard_budget = true;
                    }
                    Mode::MonteCarlo => {
                        c.tuples = Some(*samples as u128);
                        // Sampling from a spec never realizes it.
                        if matches!(source, Source::Spec { .. }) {
                            c.atom_budget = None;
                        }
                    }
                }
                c
            }
            Plan::Sharpness {
                spec, eps, depth, ..
            } => {
                let eps_min = eps.iter().copied().fold(f64::INFINITY, f64::min);
                let depth = depth
                    .unwrap_or_else(|| crate::sharpness::depth_for_resolution(spec, eps_min / 4.0));
                Cost {
                    dim: Some(spec.dim()),
                    atoms: Some(spec.atom_count(depth)),
                    atom_budget: None,
                    tuples: None,
                    budget: None,
                    hard_budget: false,
                }
            }
            Plan::Fourier { target, xi, .. } => match target {
                FourierTarget::Measure(src) => {
                    let mut c = from_source(src, None)?;
                    c.tuples = c.atoms.map(|a| a * xi.len() as u128);
                    c
                }
                FourierTarget::Sphere(d) | FourierTarget::Mu1(d, _) => Cost {
                    dim: Some(*d),
                    atoms: None,
                    atom_budget: None,
                    tuples: None,
                    budget: None,
                    hard_budget: false,
                },
            },
            Plan::Energy {
                spec,
                file,
                depths,
                budget,
                ..
            } => {
                let (dim, atoms) = match (spec, file) {
                    (Some(s), _) => (
                        s.dim(),
                        depths.iter().map(|&d| s.atom_count(d)).max().unwrap_or(0),
                    ),
                    (None, Some(f)) => {
                        let m = DiscreteMeasure::load(f)?;
                        (m.dim(), m.len() as u128)
                    }
                    (None, None) => (0, 0),
                };
                Cost {
                    dim: Some(dim),
                    atoms: Some(atoms),
                    atom_budget: spec.as_ref().map(|_| *budget),
                    tuples: Some(pow_u128(atoms, 2)),
                    budget: None,
                    hard_budget: false,
                }
            }
            Plan::Intersect { source, .. } => from_source(source, None)?,
            Plan::RadiiSet { source, budget, .. } => {
                let mut c = from_source(source, None)?;
                let d = c.dim.unwrap_or(0) as u32;
                c.tuples = c.atoms.map(|a| pow_u128(a, d + 1));
                c.budget = Some(*budget);
                c
            }
            Plan::Dimension { source, .. } => from_source(source, None)?,
        })
    }

    fn execute(self, seed: u64) -> Result<Vec<Table>> {
        match self {
            Plan::Radius { dim, tuples } => {
                let mut t = Table::new("", &["tuple", "radius", "degenerate"]);
                for (i, vals) in tuples.iter().enumerate() {
                    let pts: Vec<&[f64]> = vals.chunks_exact(dim).collect();
                    let c = circumsphere(&pts)?;
                    t.rows.push(vec![
                        i.to_string(),
                        fmt_real(c.radius),
                        c.degenerate.to_string(),
                    ]);
                }
                t.summary = format!("{} tuples", tuples.len());
                Ok(vec![t])
            }
            Plan::Incidence {
                source,
                t,
                eps,
                mode,
                budget,
                samples,
                jitter,
            } => {
                if !(t > 0.0) || eps.iter().any(|e| !(*e > 0.0)) {
                    return Err(Error::input("t and every ε must be positive"));
                }
                let windows: Vec<(f64, f64)> = eps.iter().map(|&e| (t, e)).collect();
                let est = match (mode, &source) {
                    (Mode::Exhaustive, _) => {
                        exhaustive_windows(&source.realize()?, &windows, budget)?
                    }
                    (Mode::MonteCarlo, Source::Spec { spec, depth, .. }) => monte_carlo_windows(
                        &spec.sampler(*depth, jitter)?,
                        &windows,
                        samples,
                        seed,
                    )?,
                    (Mode::MonteCarlo, Source::File(_)) => {
                        let m = source.realize()?;
                        monte_carlo_windows(&m.sampler(jitter), &windows, samples, seed)?
                    }
                };
                let mut main = Table::new(
                    "",
                    &[
                        "epsilon",
                        "estimate",
                        "stderr",
                        "mode",
                        "depth",
                        "tuples_evaluated",
                    ],
                );
                main.notes.push(format!("t={}", fmt_real(t)));
                for (e, r) in eps.iter().zip(&est) {
                    main.rows.push(vec![
                        fmt_real(*e),
                        fmt_real(r.estimate),
                        fmt_real(r.stderr),
                        mode.label().to_string(),
                        source.depth_field(),
                        r.tuples_evaluated.to_string(),
                    ]);
                }
                let fit = ScalingFit::lenient(
                    eps.iter()
                        .zip(&est)
                        .map(|(&x, r)| FitPoint {
                            x,
                            value: r.estimate,
                            stderr: r.stderr,
                        })
                        .collect(),
                );
                main.summary = format!("slope {:.4} (r^2 {:.4})", fit.slope, fit.r_squared);
                let mut f = Table::new("fit", &FIT_COLUMNS);
                f.rows.push(fit_row(&fit));
                Ok(vec![main, f])
            }
            Plan::Sharpness {
                spec,
                t,
                eps,
                search,
                depth,
            } => {
                let prof = adversarial_conditional_profile(&spec, t, &eps, &search, depth, seed)?;
                let mut main = Table::new(
                    "",
                    &[
                        "epsilon",
                        "localized",
                        "band",
                        "a",
                        "x_0",
                        "x_1",
                        "y_0",
                        "y_1",
                        "line",
                    ],
                );
                main.notes
                    .push(format!("t={} depth={}", fmt_real(t), prof.depth));
                for p in &prof.points {
                    main.rows.push(vec![
                        fmt_real(p.epsilon),
                        fmt_real(p.localized),
                        fmt_real(p.band),
                        fmt_real(p.a),
                        fmt_real(p.x[0]),
                        fmt_real(p.x[1]),
                        fmt_real(p.y[0]),
                        fmt_real(p.y[1]),
                        p.line.to_string(),
                    ]);
                }
                main.summary = format!(
                    "localized slope {:.4}, full band slope {:.4}",
                    prof.fit.slope, prof.band_fit.slope
                );
                let mut f = Table::new(
                    "fit",
                    &["slope", "intercept", "r_squared", "n_points", "statistic"],
                );
                for (fit, label) in [(&prof.fit, "localized"), (&prof.band_fit, "band")] {
                    let mut r = fit_row(fit);
                    r.push(label.to_string());
                    f.rows.push(r);
                }
                Ok(vec![main, f])
            }
            Plan::Fourier {
                target,
                xi,
                axis,
                quad_points,
                fit,
            } => {
                let measure = match &target {
                    FourierTarget::Measure(src) => Some(src.realize()?),
                    _ => None,
                };
                let dim = match (&target, &measure) {
                    (FourierTarget::Sphere(d) | FourierTarget::Mu1(d, _), _) => *d,
                    (_, Some(m)) => m.dim(),
                    _ => unreachable!(),
                };
                let axis = match axis {
                    Some(a) => {
                        let n = a.iter().map(|c| c * c).sum::<f64>().sqrt();
                        if a.len() != dim || !(n > 0.0) {
                            return Err(Error::input(format!(
                                "`axis` must be a nonzero vector in R^{dim}"
                            )));
                        }
                        a.iter().map(|c| c / n).collect()
                    }
                    None => {
                        let mut e = vec![0.0; dim];
                        e[0] = 1.0;
                        e
                    }
                };
                let values: Vec<num_complex::Complex64> = xi
                    .par_iter()
                    .map(|&r| {
                        let v: Vec<f64> = axis.iter().map(|c| c * r).collect();
                        match (&target, &measure) {
                            (FourierTarget::Sphere(d), _) => sphere_ft(*d, &v, quad_points),
                            (FourierTarget::Mu1(d, dir), _) => mu1_directional_ft(*d, &v, *dir),
                            (_, Some(m)) => measure_ft(m, &v),
                            _ => unreachable!(),
                        }
                    })
                    .collect::<Result<_>>()?;
                let mut main = Table::new("", &["xi_norm", "re", "im", "abs"]);
                match &target {
                    FourierTarget::Sphere(d) => main.notes.push(format!("target=sphere d={d}")),
                    FourierTarget::Mu1(d, dir) => main
                        .notes
                        .push(format!("target=mu1 d={d} direction={}", dir.label())),
                    FourierTarget::Measure(_) => main.notes.push("target=measure".into()),
                }
                for (&r, v) in xi.iter().zip(&values) {
                    main.rows.push(vec![
                        fmt_real(r.abs()),
                        fmt_real(v.re),
                        fmt_real(v.im),
                        fmt_real(v.norm()),
                    ]);
                }
                let mut out = vec![];
                if fit {
                    let samples: Vec<(f64, f64)> = xi
                        .iter()
                        .zip(&values)
                        .map(|(&r, v)| (r.abs(), v.norm()))
                        .collect();
                    let env = decay_envelope_fit(&samples)?;
                    main.summary = format!("decay exponent {:.4}", env.decay_exponent());
                    let mut f = Table::new("fit", &FIT_COLUMNS);
                    f.notes.push("decay_exponent = -slope".into());
                    f.rows.push(fit_row(&env));
                    out.push(main);
                    out.push(f);
                } else {
                    main.summary = format!("{} frequencies", xi.len());
                    out.push(main);
                }
                Ok(out)
            }
            Plan::Energy {
                spec,
                file,
                depths,
                s,
                self_similar,
                budget,
            } => {
                let mut main = Table::new("", &["s", "depth", "energy"]);
                main.notes.push(format!(
                    "diagonal_policy={}",
                    if self_similar {
                        "self-similar"
                    } else {
                        "off-diagonal"
                    }
                ));
                for &depth in &depths {
                    let (m, policy) = match (&spec, &file) {
                        (Some(sp), _) => {
                            let policy = match (self_similar, sp) {
                                (true, SetSpec::Cantor(c)) => {
                                    DiagonalPolicy::self_similar_for(c, depth)
                                }
                                _ => DiagonalPolicy::OffDiagonal,
                            };
                            (sp.realize(depth, budget)?, policy)
                        }
                        (None, Some(f)) => (DiscreteMeasure::load(f)?, DiagonalPolicy::OffDiagonal),
                        (None, None) => unreachable!(),
                    };
                    for &sv in &s {
                        let e = energy_integral_with(&m, sv, policy)?;
                        main.rows.push(vec![
                            fmt_real(sv),
                            if spec.is_some() {
                                depth.to_string()
                            } else {
                                String::new()
                            },
                            fmt_real(e.value),
                        ]);
                    }
                }
                main.summary = format!("{} energies", main.rows.len());
                Ok(vec![main])
            }
            Plan::Intersect {
                source,
                delta,
                threshold,
                r_grid,
                centers,
                scales,
                dimension_delta,
            } => {
                let m = source.realize()?;
                let dim_delta = dimension_delta.unwrap_or(delta);
                let d = m.dim();
                let centers = pick_centers(&m, centers, seed)?;
                let mut main = Table::new("", &["center", "r", "mass"]);
                let mut iv = Table::new("intervals", &["center", "interval_lo", "interval_hi"]);
                let mut sm_cols = vec!["center"];
                const COORD: [&str; MAX_DIM] =
                    ["a_0", "a_1", "a_2", "a_3", "a_4", "a_5", "a_6", "a_7"];
                sm_cols.extend(&COORD[..d]);
                sm_cols.extend([
                    "valid",
                    "lebesgue_estimate",
                    "dimension_r",
                    "slice_mass",
                    "slice_boxes",
                    "dimension_slope",
                    "dimension_r_squared",
                ]);
                let mut sm = Table::new("summary", &sm_cols);
                let mut positive = 0;
                for (ci, a) in centers.iter().enumerate() {
                    let g = dilation_set(&m, a, delta, threshold, &r_grid)?;
                    for (r, mass) in g.r_grid.iter().zip(&g.masses) {
                        main.rows
                            .push(vec![ci.to_string(), fmt_real(*r), fmt_real(*mass)]);
                    }
                    for (lo, hi) in &g.intervals {
                        iv.rows
                            .push(vec![ci.to_string(), fmt_real(*lo), fmt_real(*hi)]);
                    }
                    if g.lebesgue_estimate > 0.0 {
                        positive += 1;
                    }
                    let mut rowv = vec![ci.to_string()];
                    rowv.extend(a.iter().map(|c| fmt_real(*c)));
                    rowv.push(center_validity(&m, a).to_string());
                    rowv.push(fmt_real(g.lebesgue_estimate));
                    // Dimension at the heaviest slice.
                    let best = g.masses.iter().enumerate().fold(
                        None::<(usize, f64)>,
                        |b, (i, &v)| match b {
                            Some((_, bv)) if bv >= v => b,
                            _ => Some((i, v)),
                        },
                    );
                    match (&scales, best) {
                        (Some(sc), Some((i, mass))) if mass > 0.0 => {
                            let r = g.r_grid[i];
                            let slice = annulus_mass(&m, a, r, dim_delta)?;
                            let finest = sc.iter().copied().fold(f64::INFINITY, f64::min);
                            let boxes = slice_boxes(&m, &slice, finest);
                            let (slope, r2) = match intersection_dimension(&m, a, r, dim_delta, sc)
                            {
                                Ok(f) => (f.slope, f.r_squared),
                                Err(Error::Fit(_)) => (f64::NAN, f64::NAN),
                                Err(e) => return Err(e),
                            };
                            rowv.extend([
                                fmt_real(r),
                                fmt_real(slice.total_mass),
                                boxes.to_string(),
                                fmt_real(slope),
                                fmt_real(r2),
                            ]);
                        }
                        _ => rowv.extend(std::iter::repeat_n(String::new(), 5)),
                    }
                    sm.rows.push(rowv);
                }
                main.summary = format!(
                    "{positive} of {} centers with positive dilation-set estimate",
                    centers.len()
                );
                Ok(vec![main, iv, sm])
            }
            Plan::RadiiSet {
                source,
                eps,
                budget,
                max_radius,
            } => {
                let m = source.realize()?;
                let out = radii_set_measure_with(&m, &eps, budget, seed, max_radius)?;
                let mut main = Table::new("", &["epsilon", "covered_length"]);
                if let Some(first) = out.first() {
                    main.notes.push(format!(
                        "radii={} exhaustive={}",
                        first.radii, first.exhaustive
                    ));
                }
                if let Some(r) = max_radius {
                    main.notes.push(format!("max_radius={}", fmt_real(r)));
                }
                for c in &out {
                    main.rows
                        .push(vec![fmt_real(c.epsilon), fmt_real(c.covered_length)]);
                }
                main.summary = format!("{} ε values", out.len());
                Ok(vec![main])
            }
            Plan::Dimension {
                source,
                scales,
                frostman,
            } => {
                let m = source.realize()?;
                let fit = box_dimension(&m, &scales)?;
                let mut main = Table::new("", &["scale", "boxes"]);
                for p in &fit.points {
                    main.rows.push(vec![fmt_real(1.0 / p.x), fmt_real(p.value)]);
                }
                if let Some((s, trials)) = frostman {
                    let rep = frostman_ratio(&m, s, trials, seed)?;
                    main.notes.push(format!(
                        "frostman s={} ratio={} radius={}",
                        fmt_real(s),
                        fmt_real(rep.ratio),
                        fmt_real(rep.radius)
                    ));
                }
                main.summary = format!("box dimension {:.4}", fit.slope);
                let mut f = Table::new("fit", &FIT_COLUMNS);
                f.rows.push(fit_row(&fit));
                Ok(vec![main, f])
            }
        }
    }
}

/// Explicit center, or `count` uniform draws from a box (default: the
/// bounding box of the measure) skipping centers that sit on an atom.
fn pick_centers(m: &DiscreteMeasure, plan: CenterPlan, seed: u64) -> Result<Vec<Vec<f64>>> {
    use rand::Rng;
    match plan {
        CenterPlan::Fixed(c) => Ok(vec![c]),
        CenterPlan::Random { count, lo, hi } => {
            let (blo, bhi) = m.bounding_box();
            let lo = lo.unwrap_or(blo);
            let hi = hi.unwrap_or(bhi);
            if lo.len() != m.dim() || hi.len() != m.dim() {
                return Err(Error::input("center box must match the measure dimension"));
            }
            let mut rng = batch_rng(seed, u64::MAX);
            let mut out = Vec::with_capacity(count);
            let mut attempts = 0;
            while out.len() < count {
                attempts += 1;
                if attempts > 1000 * (count + 1) {
                    return Err(Error::input("could not draw valid centers from the box"));
                }
                let c: Vec<f64> = lo
                    .iter()
                    .zip(&hi)
                    .map(|(&a, &b)| a + (b - a) * rng.gen::<f64>())
                    .collect();
                if center_validity(m, &c) {
                    out.push(c);
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::parse(e.name()).unwrap(), e);
        }
        assert!(Experiment::parse("bogus").is_err());
    }

    #[test]
    fn experiment_key_must_agree() {
        assert!(
            ExperimentConfig::parse("experiment = energy\n", Some(Experiment::Radius)).is_err()
        );
        assert!(ExperimentConfig::parse("seed = 3\n", None).is_err());
        let c = ExperimentConfig::parse("seed = 3\n", Some(Experiment::Radius)).unwrap();
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn validate_counts_tuples() {
        let text = "experiment = incidence\nspec.kind = product\nspec.0.kind = cantor_dim\nspec.0.dim = 0.8\n\
                    spec.1.kind = cantor_dim\nspec.1.dim = 0.8\ndepth = 3\nt = 1\nepsilon = 0.1\n";
        let r = validate_text(text, None);
        assert_eq!(r.atoms, Some(64));
        assert_eq!(r.tuples, Some(64u128.pow(3)));
        assert_eq!(r.would_fail, "none");
        let r = validate_text(&format!("{text}budget = 1000\n"), None);
        assert_eq!(r.would_fail, "resource");
        let r = validate_text(&format!("{text}colour = blue\n"), None);
        assert_eq!(r.would_fail, "input");
        assert!(r.message.contains("colour"));
    }

    #[test]
    fn companion_names() {
        assert_eq!(
            companion(Path::new("out/a.csv"), "fit"),
            PathBuf::from("out/a.fit.csv")
        );
        assert_eq!(companion(Path::new("a.csv"), ""), PathBuf::from("a.csv"));
    }
}
