//! Initial potentials: a small catalog of closed-form profiles, tabulated profiles, tail
//! descriptors and a plain-text file format.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::interp::MonotoneCubic;
use crate::numeric::quad;
use crate::soliton;

/// What the potential looks like beyond a tail cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailKind {
    Zero,
    ConstantStep { level: f64 },
    /// The closed-form profile itself continues to hold; it decays exponentially.
    ExactFormula { formula: String },
    SampledRough { seed: u64, amplitude: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailDescriptor {
    #[serde(flatten)]
    pub kind: TailKind,
    /// Position beyond which the tail description holds exactly.
    pub cutoff: f64,
}

/// Decay weight `w(x) = exp(gamma * x^(1/delta))` declared for the right half-line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayWeight {
    pub gamma: f64,
    pub delta: f64,
}

/// Uniform sample grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self { x_min: -40.0, x_max: 40.0, dx: 0.01 }
    }
}

impl SampleGrid {
    pub fn len(&self) -> usize {
        ((self.x_max - self.x_min) / self.dx).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + self.dx * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Catalog entries, tagged by name. Missing parameters take the documented defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum Catalog {
    Zero,
    OneSoliton {
        #[serde(default = "one")]
        kappa: f64,
        #[serde(default = "two")]
        c: f64,
    },
    NSoliton {
        #[serde(default = "default_kappas")]
        kappa: Vec<f64>,
        #[serde(default = "default_norming")]
        c: Vec<f64>,
    },
    Box {
        #[serde(default = "one")]
        depth: f64,
        #[serde(default = "one")]
        width: f64,
    },
    PureStep {
        #[serde(default = "one")]
        h: f64,
    },
    Sech2 {
        #[serde(default = "two")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
    },
    RoughLeft {
        #[serde(default)]
        seed: u64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn default_kappas() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_norming() -> Vec<f64> {
    vec![6.0, 12.0]
}

pub const CATALOG_TAGS: [&str; 7] =
    ["zero", "one_soliton", "n_soliton", "box", "pure_step", "sech2", "rough_left"];

impl Catalog {
    pub fn tag(&self) -> &'static str {
        match self {
            Catalog::Zero => "zero",
            Catalog::OneSoliton { .. } => "one_soliton",
            Catalog::NSoliton { .. } => "n_soliton",
            Catalog::Box { .. } => "box",
            Catalog::PureStep { .. } => "pure_step",
            Catalog::Sech2 { .. } => "sech2",
            Catalog::RoughLeft { .. } => "rough_left",
        }
    }

    /// Parses a TOML table with a `tag` key plus parameters.
    pub fn from_toml(value: &toml::Value) -> Result<Self> {
        let tag = value
            .get("tag")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::param("tag", "missing potential tag"))?;
        if !CATALOG_TAGS.contains(&tag) {
            return Err(Error::UnknownTag(tag.to_string()));
        }
        value.clone().try_into().map_err(|e: toml::de::Error| Error::param(tag, e.message()))
    }

    /// Parses the compact form `tag(p1, p2, ...)`, e.g. `box(1, 1)` or `n_soliton(1:2, 2:12)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (tag, args) = match spec.find('(') {
            Some(i) if spec.ends_with(')') => (&spec[..i], &spec[i + 1..spec.len() - 1]),
            Some(_) => return Err(Error::Parse(format!("unbalanced parentheses in `{spec}`"))),
            None => (spec, ""),
        };
        let tag = tag.trim();
        if !CATALOG_TAGS.contains(&tag) {
            return Err(Error::UnknownTag(tag.to_string()));
        }
        let items: Vec<&str> = args.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        let num = |i: usize, default: f64| -> Result<f64> {
            match items.get(i) {
                None => Ok(default),
                Some(s) => s.parse().map_err(|_| Error::param(tag, format!("not a number: `{s}`"))),
            }
        };
        Ok(match tag {
            "zero" => Catalog::Zero,
            "one_soliton" => Catalog::OneSoliton { kappa: num(0, 1.0)?, c: num(1, 2.0)? },
            "n_soliton" => {
                if items.is_empty() {
                    Catalog::NSoliton { kappa: default_kappas(), c: default_norming() }
                } else {
                    let mut kappa = Vec::new();
                    let mut c = Vec::new();
                    for item in &items {
                        let (a, b) = item
                            .split_once(':')
                            .ok_or_else(|| Error::param(tag, format!("expected kappa:c, got `{item}`")))?;
                        kappa.push(a.trim().parse().map_err(|_| Error::param(tag, format!("bad kappa `{a}`")))?);
                        c.push(b.trim().parse().map_err(|_| Error::param(tag, format!("bad c `{b}`")))?);
                    }
                    Catalog::NSoliton { kappa, c }
                }
            }
            "box" => Catalog::Box { depth: num(0, 1.0)?, width: num(1, 1.0)? },
            "pure_step" => Catalog::PureStep { h: num(0, 1.0)? },
            "sech2" => Catalog::Sech2 { amplitude: num(0, 2.0)?, width: num(1, 1.0)? },
            "rough_left" => Catalog::RoughLeft {
                seed: match items.first() {
                    None => 0,
                    Some(s) => s.parse().map_err(|_| Error::param(tag, format!("bad seed `{s}`")))?,
                },
                amplitude: num(1, 1.0)?,
            },
            _ => unreachable!(),
        })
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {v}")))
            }
        };
        match self {
            Catalog::Zero => Ok(()),
            Catalog::OneSoliton { kappa, c } => {
                positive("kappa", *kappa)?;
                positive("c", *c)
            }
            Catalog::NSoliton { kappa, c } => {
                if kappa.is_empty() || kappa.len() != c.len() {
                    return Err(Error::param("kappa", "need matching, non-empty kappa and c lists"));
                }
                for (&k, &cc) in kappa.iter().zip(c) {
                    positive("kappa", k)?;
                    positive("c", cc)?;
                }
                let mut sorted = kappa.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[1] - w[0] < 1e-12) {
                    return Err(Error::param("kappa", "eigenvalues must be distinct"));
                }
                Ok(())
            }
            Catalog::Box { depth, width } => {
                positive("width", *width)?;
                if depth.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("depth", "must be finite"))
                }
            }
            Catalog::PureStep { h } => positive("h", *h),
            Catalog::Sech2 { amplitude, width } => {
                positive("width", *width)?;
                if amplitude.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("amplitude", "must be finite"))
                }
            }
            Catalog::RoughLeft { amplitude, .. } => positive("amplitude", *amplitude),
        }
    }
}

/// Number of rough cells whose values are precomputed; cells further left are drawn on demand.
const ROUGH_CACHE: usize = 4096;

#[derive(Clone, Debug)]
enum Profile {
    Zero,
    Solitons(Arc<soliton::MultiSoliton>),
    Box { depth: f64, width: f64 },
    Step { level: f64 },
    Sech2 { amplitude: f64, width: f64 },
    Rough { seed: u64, amplitude: f64, cells: Arc<Vec<f64>> },
    Tabulated(MonotoneCubic),
}

/// Value of rough cell `n`, i.e. on `[-(n + 1), -n)`; uniform in `[-amplitude, 0]`.
pub fn rough_cell(seed: u64, amplitude: f64, n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * n as u128);
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    -amplitude * u
}

/// A potential on the line with declared tails.
#[derive(Clone, Debug)]
pub struct Potential {
    source: Option<Catalog>,
    profile: Profile,
    pub left: TailDescriptor,
    pub right: TailDescriptor,
    pub decay: DecayWeight,
    pub grid: SampleGrid,
    truncation: Option<f64>,
}

impl Potential {
    /// Builds a catalog potential on the default sample grid.
    pub fn from_catalog(entry: &Catalog) -> Result<Self> {
        entry.validate()?;
        let exact = |formula: &str, cutoff: f64| TailDescriptor {
            kind: TailKind::ExactFormula { formula: formula.to_string() },
            cutoff,
        };
        let zero = |cutoff: f64| TailDescriptor { kind: TailKind::Zero, cutoff };
        let compact = DecayWeight { gamma: 1.0, delta: 0.5 };
        let (profile, left, right, decay) = match entry {
            Catalog::Zero => (Profile::Zero, zero(0.0), zero(0.0), compact),
            Catalog::OneSoliton { kappa, c } => {
                let x0 = (c / (2.0 * kappa)).ln() / (2.0 * kappa);
                let f = "-2 kappa^2 sech^2(kappa (x - x0))";
                (
                    Profile::Solitons(Arc::new(soliton::MultiSoliton::new(&[*kappa], &[*c]))),
                    exact(f, x0),
                    exact(f, x0),
                    DecayWeight { gamma: *kappa, delta: 1.0 },
                )
            }
            Catalog::NSoliton { kappa, c } => {
                let f = "-2 d^2/dx^2 ln tau(x)";
                let kmin = kappa.iter().copied().fold(f64::INFINITY, f64::min);
                (
                    Profile::Solitons(Arc::new(soliton::MultiSoliton::new(kappa, c))),
                    exact(f, 0.0),
                    exact(f, 0.0),
                    DecayWeight { gamma: kmin, delta: 1.0 },
                )
            }
            Catalog::Box { depth, width } => (
                Profile::Box { depth: *depth, width: *width },
                zero(0.0),
                zero(*width),
                compact,
            ),
            Catalog::PureStep { h } => (
                Profile::Step { level: -h * h },
                TailDescriptor { kind: TailKind::ConstantStep { level: -h * h }, cutoff: 0.0 },
                zero(0.0),
                compact,
            ),
            Catalog::Sech2 { amplitude, width } => {
                let f = "-A sech^2(x / w)";
                (
                    Profile::Sech2 { amplitude: *amplitude, width: *width },
                    exact(f, 0.0),
                    exact(f, 0.0),
                    DecayWeight { gamma: 1.0 / width, delta: 1.0 },
                )
            }
            Catalog::RoughLeft { seed, amplitude } => {
                let cells = (0..ROUGH_CACHE).map(|n| rough_cell(*seed, *amplitude, n)).collect();
                (
                    Profile::Rough { seed: *seed, amplitude: *amplitude, cells: Arc::new(cells) },
                    TailDescriptor {
                        kind: TailKind::SampledRough { seed: *seed, amplitude: *amplitude },
                        cutoff: 0.0,
                    },
                    zero(0.0),
                    compact,
                )
            }
        };
        Ok(Self {
            source: Some(entry.clone()),
            profile,
            left,
            right,
            decay,
            grid: SampleGrid::default(),
            truncation: None,
        })
    }

    /// Builds a potential from samples, interpolated by a monotone cubic. Outside the samples the
    /// given tails apply; only `Zero` and `ConstantStep` tails are accepted here.
    pub fn tabulated(
        x: Vec<f64>,
        q: Vec<f64>,
        left: TailDescriptor,
        right: TailDescriptor,
        decay: DecayWeight,
    ) -> Result<Self> {
        if x.len() < 2 || x.len() != q.len() {
            return Err(Error::param("samples", "need at least two (x, q) pairs"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("samples", "x must be strictly increasing"));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("samples", "non-finite q value"));
        }
        for tail in [&left, &right] {
            if !matches!(tail.kind, TailKind::Zero | TailKind::ConstantStep { .. }) {
                return Err(Error::param("tail", "tabulated potentials need zero or constant tails"));
            }
        }
        if let TailKind::ConstantStep { .. } = right.kind {
            return Err(Error::param("right_tail", "the right tail must decay"));
        }
        let n = x.len();
        let grid = SampleGrid {
            x_min: x[0],
            x_max: x[n - 1],
            dx: (x[n - 1] - x[0]) / (n - 1) as f64,
        };
        Ok(Self {
            source: None,
            profile: Profile::Tabulated(MonotoneCubic::new(x, q)),
            left,
            right,
            decay,
            grid,
            truncation: None,
        })
    }

    pub fn source(&self) -> Option<&Catalog> {
        self.source.as_ref()
    }

    pub fn tag(&self) -> &str {
        match &self.source {
            Some(c) => c.tag(),
            None => "tabulated",
        }
    }

    pub fn truncation(&self) -> Option<f64> {
        self.truncation
    }

    /// Short-range truncation: `q` restricted to `[b, inf)`, zero to the left of `b`.
    pub fn truncate_left(&self, b: f64) -> Self {
        let b = self.truncation.map_or(b, |t| t.max(b));
        let mut out = self.clone();
        out.truncation = Some(b);
        out.left = TailDescriptor { kind: TailKind::Zero, cutoff: b };
        out
    }

    /// Evaluates `q(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        if let Some(b) = self.truncation {
            if x < b {
                return 0.0;
            }
        }
        match &self.profile {
            Profile::Zero => 0.0,
            Profile::Solitons(s) => s.q(x, 0.0),
            Profile::Box { depth, width } => {
                if (0.0..*width).contains(&x) {
                    -depth
                } else {
                    0.0
                }
            }
            Profile::Step { level } => {
                if x < 0.0 {
                    *level
                } else {
                    0.0
                }
            }
            Profile::Sech2 { amplitude, width } => -amplitude / (x / width).cosh().powi(2),
            Profile::Rough { seed, amplitude, cells } => {
                if x >= 0.0 {
                    0.0
                } else {
                    let n = (-x).floor() as usize;
                    let n = if -(n as f64) == x { n.saturating_sub(1) } else { n };
                    cells.get(n).copied().unwrap_or_else(|| rough_cell(*seed, *amplitude, n))
                }
            }
            Profile::Tabulated(interp) => {
                let xs = interp.xs();
                if x < xs[0] {
                    tail_value(&self.left.kind)
                } else if x > xs[xs.len() - 1] {
                    tail_value(&self.right.kind)
                } else {
                    interp.eval(x)
                }
            }
        }
    }

    /// Samples on the potential's grid.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        if let (Profile::Tabulated(i), None) = (&self.profile, self.truncation) {
            return i.xs().iter().copied().zip(i.ys().iter().copied()).collect();
        }
        self.grid.points().map(|x| (x, self.eval(x))).collect()
    }

    /// Points in `(lo, hi)` where `q` jumps.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match &self.profile {
            Profile::Box { width, .. } => out.extend([0.0, *width]),
            Profile::Step { .. } => out.push(0.0),
            Profile::Rough { .. } => {
                let start = lo.max(-1.0e6).ceil() as i64;
                let end = hi.min(0.0).floor() as i64;
                out.extend((start..=end).map(|i| i as f64));
            }
            _ => {}
        }
        if let Some(b) = self.truncation {
            out.push(b);
        }
        out.retain(|&p| p > lo && p < hi);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Limit of `q` at `-inf` if it exists (`None` for the rough tail).
    pub fn left_floor(&self) -> Option<f64> {
        match &self.left.kind {
            TailKind::Zero | TailKind::ExactFormula { .. } => Some(0.0),
            TailKind::ConstantStep { level } => Some(*level),
            TailKind::SampledRough { .. } => None,
        }
    }

    /// Both tails vanish at infinity.
    pub fn is_short_range(&self) -> bool {
        self.left_floor() == Some(0.0)
    }

    /// Effective support: outside `[lo, hi]` the potential equals its tail constant up to a
    /// relative `1e-16`. The left end is `-inf` for a rough tail.
    pub fn support(&self) -> (f64, f64) {
        let scale = self.sup_abs().max(1e-300);
        let thresh = 1e-16 * scale;
        let hi = match &self.right.kind {
            TailKind::ExactFormula { .. } => {
                let mut x = self.right.cutoff.max(0.0) + 1.0;
                let mut last = x;
                while x < 1.0e4 {
                    if self.eval(x).abs() > thresh {
                        last = x;
                    } else if x - last > 4.0 {
                        break;
                    }
                    x += 0.25;
                }
                last + 0.25
            }
            _ => match &self.profile {
                Profile::Tabulated(i) => i.xs()[i.xs().len() - 1].max(self.right.cutoff),
                _ => self.right.cutoff,
            },
        };
        let lo = match &self.left.kind {
            TailKind::ExactFormula { .. } => {
                let mut x = self.left.cutoff.min(0.0) - 1.0;
                let mut last = x;
                while x > -1.0e4 {
                    if self.eval(x).abs() > thresh {
                        last = x;
                    } else if last - x > 4.0 {
                        break;
                    }
                    x -= 0.25;
                }
                last - 0.25
            }
            TailKind::SampledRough { .. } => f64::NEG_INFINITY,
            _ => match &self.profile {
                Profile::Tabulated(i) => i.xs()[0].min(self.left.cutoff),
                _ => self.left.cutoff,
            },
        };
        (lo.min(hi), hi)
    }

    /// `sup |q|` over the sample grid (and the left floor).
    pub fn sup_abs(&self) -> f64 {
        let grid_max = self.grid.points().map(|x| self.eval(x).abs()).fold(0.0, f64::max);
        grid_max.max(self.left_floor().unwrap_or(0.0).abs())
    }

    /// `inf q` over the sample grid, together with the left floor.
    pub fn inf(&self) -> f64 {
        let grid_min = self.grid.points().map(|x| self.eval(x)).fold(f64::INFINITY, f64::min);
        match &self.profile {
            Profile::Rough { amplitude, .. } if self.truncation.is_none() => grid_min.min(-amplitude),
            _ => grid_min.min(self.left_floor().unwrap_or(0.0)),
        }
    }

    /// `int_a^inf (x - a) |q(x)| dx`.
    pub fn right_moment(&self, a: f64) -> f64 {
        let (_, hi) = self.support();
        if a >= hi {
            return 0.0;
        }
        let mut breaks = vec![a];
        breaks.extend(self.breakpoints(a, hi));
        breaks.push(hi);
        let mut panels = vec![a];
        for w in breaks.windows(2) {
            let n = ((w[1] - w[0]) / 0.5).ceil().max(1.0) as usize;
            for i in 1..=n {
                panels.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
            }
        }
        quad::composite(&panels, 8, |x| (x - a) * self.eval(x).abs())
    }

    /// Smallest sample-grid point `a` with `int_a^inf (x - a)|q| < 1/2`.
    pub fn natural_split_point(&self) -> f64 {
        let n = self.grid.len();
        if self.right_moment(self.grid.point(0)) < 0.5 {
            return self.grid.point(0);
        }
        let (mut lo, mut hi) = (0usize, n - 1);
        if self.right_moment(self.grid.point(hi)) >= 0.5 {
            return self.grid.point(hi);
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.right_moment(self.grid.point(mid)) < 0.5 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.grid.point(hi)
    }

    /// Writes the potential file: a TOML header with the source, tails and grid, followed by the
    /// samples as an embedded `x,q` table.
    pub fn to_file_string(&self) -> String {
        let mut out = String::from("format = \"kdvist-potential/1\"\n");
        writeln!(out, "tag = \"{}\"", self.tag()).unwrap();
        if let Some(b) = self.truncation {
            writeln!(out, "truncation = {}", fmt_f64(b)).unwrap();
        }
        let mut doc = toml::Table::new();
        if let Some(src) = &self.source {
            doc.insert("source".into(), toml::Value::try_from(src).expect("catalog serializes"));
        }
        doc.insert("left_tail".into(), toml::Value::try_from(&self.left).expect("tail serializes"));
        doc.insert("right_tail".into(), toml::Value::try_from(&self.right).expect("tail serializes"));
        doc.insert("decay".into(), toml::Value::try_from(self.decay).expect("decay serializes"));
        doc.insert("grid".into(), toml::Value::try_from(self.grid).expect("grid serializes"));
        out.push_str(&toml::to_string(&doc).expect("header serializes"));
        out.push_str("\n[samples]\ntable = \"\"\"\nx,q\n");
        for (x, q) in self.samples() {
            writeln!(out, "{},{}", fmt_f64(x), fmt_f64(q)).unwrap();
        }
        out.push_str("\"\"\"\n");
        out
    }

    pub fn from_file_string(text: &str) -> Result<Self> {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let get = |key: &str| doc.get(key).ok_or_else(|| Error::Parse(format!("missing `{key}`")));
        let fmt = get("format")?.as_str().unwrap_or_default();
        if fmt != "kdvist-potential/1" {
            return Err(Error::Parse(format!("unsupported potential format `{fmt}`")));
        }
        let de = |key: &str| -> Result<toml::Value> { get(key).cloned() };
        let left: TailDescriptor =
            de("left_tail")?.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let right: TailDescriptor =
            de("right_tail")?.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let decay: DecayWeight =
            de("decay")?.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let grid: SampleGrid =
            de("grid")?.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let truncation = doc.get("truncation").and_then(|v| v.as_float());
        let mut pot = if let Some(src) = doc.get("source") {
            let entry = Catalog::from_toml(src)?;
            let mut p = Potential::from_catalog(&entry)?;
            p.grid = grid;
            p
        } else {
            let table = get("samples")?
                .get("table")
                .and_then(|v| v.as_str())
                .ok_or_else(|| Error::Parse("`samples.table` must be a string".into()))?;
            let (x, q) = parse_samples(table)?;
            let mut p = Potential::tabulated(x, q, left.clone(), right.clone(), decay)?;
            p.grid = grid;
            p
        };
        if let Some(b) = truncation {
            pot = pot.truncate_left(b);
        }
        pot.left = left;
        pot.right = right;
        pot.decay = decay;
        Ok(pot)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_file_string(&std::fs::read_to_string(path)?)
    }
}

fn tail_value(kind: &TailKind) -> f64 {
    match kind {
        TailKind::ConstantStep { level } => *level,
        _ => 0.0,
    }
}

fn parse_samples(table: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut x = Vec::new();
    let mut q = Vec::new();
    for (i, line) in table.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
        if i == 0 && line.starts_with('x') {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad sample line `{line}`")))?;
        x.push(a.trim().parse().map_err(|_| Error::Parse(format!("bad x in `{line}`")))?);
        q.push(b.trim().parse().map_err(|_| Error::Parse(format!("bad q in `{line}`")))?);
    }
    Ok((x, q))
}

/// Shortest decimal representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
