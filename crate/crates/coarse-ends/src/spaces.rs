//! Generators for the built-in example spaces, file ingestion, and report
//! output.
//!
//! Every example ships in two forms where that makes sense: a finite
//! truncated instance for the scale-ladder pipelines, and a parametric
//! descriptor plus certificates for the symbolic engine. Books realize the
//! wedge metric directly as weighted graphs (cross-page distance is the sum
//! of the positions), with no ambient embedding.

use std::io::{BufRead, Write};
use std::path::Path;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{FiniteCoarseInstance, MetricKind};
use crate::symbolic::schema::{EscapeCoord, SchemaSegment};
use crate::symbolic::{
    ChainSchema, GapCertificate, ParametricSpace, Piece, Poly, Poly2, SpaceMetric, SymbolicPoint,
};

/// A named generator with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case")]
pub enum SpaceRecipe {
    /// Integer points of [-n, n], based at 0.
    Line { n: u64 },
    /// Integer lattice points of [-n, n]^2, based at the origin.
    Grid2d { n: u64 },
    /// Two unit-spaced vertical arms at x = ±1 over a three-point base at
    /// height 1, based at (0, 1).
    Vase { height: u64 },
    /// Two diagonal arms x = ±y sampled at unit arc spacing over the same
    /// base, based at (0, 1).
    FlaredVase { height: u64 },
    /// The square numbers up to the truncation radius, based at 0.
    Squares { rho_max: f64 },
    /// Wedge of `pages` unit-spaced rays glued at 0 (the wedge metric:
    /// cross-page distance is the sum of positions).
    Book { pages: u32, height: u64 },
    /// Wedge of the sub-rays with spacing i on page i.
    DiscreteBook { pages: u32, height: u64 },
}

/// Representatives and certificates shipped with a parametric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSet {
    pub representatives: Vec<NamedPoint>,
    #[serde(default)]
    pub schemas: Vec<ChainSchema>,
    #[serde(default)]
    pub gaps: Vec<GapCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPoint {
    pub name: String,
    #[serde(flatten)]
    pub point: SymbolicPoint,
}

impl CertificateSet {
    pub fn representative_pairs(&self) -> Vec<(String, SymbolicPoint)> {
        self.representatives
            .iter()
            .map(|np| (np.name.clone(), np.point.clone()))
            .collect()
    }
}

impl SpaceRecipe {
    /// CLI-facing constructor from a recipe name plus the relevant
    /// parameters.
    pub fn from_name(
        name: &str,
        n: Option<u64>,
        height: Option<u64>,
        pages: Option<u32>,
        rho_max: Option<f64>,
    ) -> Result<Self> {
        let recipe = match name {
            "line" => SpaceRecipe::Line { n: n.unwrap_or(100) },
            "grid2d" => SpaceRecipe::Grid2d { n: n.unwrap_or(50) },
            "vase" => SpaceRecipe::Vase { height: height.unwrap_or(100) },
            "flared_vase" => SpaceRecipe::FlaredVase { height: height.unwrap_or(100) },
            "squares" => SpaceRecipe::Squares { rho_max: rho_max.unwrap_or(1e4) },
            "book" => SpaceRecipe::Book {
                pages: pages.unwrap_or(5),
                height: height.unwrap_or(100),
            },
            "discrete_book" => SpaceRecipe::DiscreteBook {
                pages: pages.unwrap_or(5),
                height: height.unwrap_or(100),
            },
            other => {
                return Err(Error::InvalidRecipe(format!(
                    "unknown recipe `{}` (expected line, grid2d, vase, flared_vase, squares, book, discrete_book)",
                    other
                )))
            }
        };
        Ok(recipe)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpaceRecipe::Line { .. } => "line",
            SpaceRecipe::Grid2d { .. } => "grid2d",
            SpaceRecipe::Vase { .. } => "vase",
            SpaceRecipe::FlaredVase { .. } => "flared_vase",
            SpaceRecipe::Squares { .. } => "squares",
            SpaceRecipe::Book { .. } => "book",
            SpaceRecipe::DiscreteBook { .. } => "discrete_book",
        }
    }

    /// Deterministic finite instance.
    pub fn generate(&self) -> Result<FiniteCoarseInstance> {
        self.generate_inner(None)
    }

    /// Cloud recipes admit a seeded coordinate jitter for robustness tests;
    /// the basepoint stays put and the window widens to keep every point.
    pub fn generate_jittered(&self, jitter: f64, seed: u64) -> Result<FiniteCoarseInstance> {
        if !(jitter >= 0.0) || !jitter.is_finite() {
            return Err(Error::InvalidRecipe(format!("invalid jitter {}", jitter)));
        }
        self.generate_inner(Some((jitter, seed)))
    }

    fn generate_inner(&self, jitter: Option<(f64, u64)>) -> Result<FiniteCoarseInstance> {
        match *self {
            SpaceRecipe::Line { n } => {
                if n == 0 {
                    return Err(Error::InvalidRecipe("line needs n >= 1".into()));
                }
                let points = (-(n as i64)..=n as i64)
                    .map(|x| (x.to_string(), vec![x as f64]))
                    .collect();
                cloud(points, "0", n as f64, jitter)
            }
            SpaceRecipe::Grid2d { n } => {
                if n == 0 {
                    return Err(Error::InvalidRecipe("grid2d needs n >= 1".into()));
                }
                let mut points = Vec::new();
                for x in -(n as i64)..=n as i64 {
                    for y in -(n as i64)..=n as i64 {
                        points.push((format!("{},{}", x, y), vec![x as f64, y as f64]));
                    }
                }
                let rho = (2.0 * (n as f64) * (n as f64)).sqrt();
                cloud(points, "0,0", rho, jitter)
            }
            SpaceRecipe::Vase { height } => {
                if height < 2 {
                    return Err(Error::InvalidRecipe("vase needs height >= 2".into()));
                }
                let mut points = Vec::new();
                for y in 1..=height {
                    points.push((format!("L{}", y), vec![-1.0, y as f64]));
                    points.push((format!("R{}", y), vec![1.0, y as f64]));
                }
                points.push(("B-1".to_string(), vec![-1.0, 1.0]));
                points.push(("B0".to_string(), vec![0.0, 1.0]));
                points.push(("B1".to_string(), vec![1.0, 1.0]));
                let h = height as f64;
                let rho = (1.0 + (h - 1.0) * (h - 1.0)).sqrt();
                cloud(points, "B0", rho, jitter)
            }
            SpaceRecipe::FlaredVase { height } => {
                if height < 2 {
                    return Err(Error::InvalidRecipe("flared_vase needs height >= 2".into()));
                }
                let sqrt2 = std::f64::consts::SQRT_2;
                let steps = ((height as f64 - 1.0) * sqrt2).floor() as u64;
                let mut points = Vec::new();
                let mut rho: f64 = 0.0;
                for k in 0..=steps {
                    let y = 1.0 + k as f64 / sqrt2;
                    points.push((format!("L{}", k), vec![-y, y]));
                    points.push((format!("R{}", k), vec![y, y]));
                    rho = rho.max((y * y + (y - 1.0) * (y - 1.0)).sqrt());
                }
                points.push(("B-1".to_string(), vec![-1.0, 1.0]));
                points.push(("B0".to_string(), vec![0.0, 1.0]));
                points.push(("B1".to_string(), vec![1.0, 1.0]));
                cloud(points, "B0", rho, jitter)
            }
            SpaceRecipe::Squares { rho_max } => {
                if !(rho_max >= 1.0) {
                    return Err(Error::InvalidRecipe("squares needs rho_max >= 1".into()));
                }
                let mut points = Vec::new();
                let mut n = 0u64;
                while (n * n) as f64 <= rho_max {
                    points.push(((n * n).to_string(), vec![(n * n) as f64]));
                    n += 1;
                }
                cloud(points, "0", rho_max, jitter)
            }
            SpaceRecipe::Book { pages, height } => {
                if jitter.is_some() {
                    return Err(Error::InvalidRecipe(
                        "jitter applies to cloud recipes only".into(),
                    ));
                }
                book_graph(pages, height, |_page| 1)
            }
            SpaceRecipe::DiscreteBook { pages, height } => {
                if jitter.is_some() {
                    return Err(Error::InvalidRecipe(
                        "jitter applies to cloud recipes only".into(),
                    ));
                }
                book_graph(pages, height, |page| page as u64)
            }
        }
    }

    /// The parametric descriptor, for recipes whose unbounded space has a
    /// polynomial description.
    pub fn parametric(&self) -> Option<ParametricSpace> {
        match self {
            SpaceRecipe::Line { .. } => Some(line_parametric()),
            SpaceRecipe::Grid2d { .. } => Some(grid_parametric()),
            SpaceRecipe::Vase { .. } => Some(vase_parametric()),
            SpaceRecipe::FlaredVase { .. } => Some(flared_vase_parametric()),
            _ => None,
        }
    }

    /// The shipped representatives and certificates for the parametric
    /// descriptor.
    pub fn certificates(&self) -> Option<CertificateSet> {
        match self {
            SpaceRecipe::Line { .. } => Some(line_certificates()),
            SpaceRecipe::Grid2d { .. } => Some(grid_certificates()),
            SpaceRecipe::Vase { .. } => Some(vase_certificates()),
            SpaceRecipe::FlaredVase { .. } => Some(flared_vase_certificates()),
            _ => None,
        }
    }
}

fn cloud(
    mut points: Vec<(String, Vec<f64>)>,
    basepoint: &str,
    rho_max: f64,
    jitter: Option<(f64, u64)>,
) -> Result<FiniteCoarseInstance> {
    let mut rho = rho_max;
    if let Some((amount, seed)) = jitter {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = points[0].1.len();
        for (id, coords) in points.iter_mut() {
            if id == basepoint {
                continue;
            }
            for c in coords.iter_mut() {
                *c += rng.gen_range(-amount..=amount);
            }
        }
        rho += 2.0 * amount * (dim as f64).sqrt();
    }
    FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, basepoint, rho)
}

fn book_graph(
    pages: u32,
    height: u64,
    spacing: impl Fn(u32) -> u64,
) -> Result<FiniteCoarseInstance> {
    if pages == 0 || height == 0 {
        return Err(Error::InvalidRecipe("books need pages >= 1 and height >= 1".into()));
    }
    let mut vertices = vec!["0".to_string()];
    let mut edges = Vec::new();
    for page in 1..=pages {
        let step = spacing(page);
        if step == 0 || step > height {
            continue;
        }
        let mut prev = "0".to_string();
        let mut pos = step;
        while pos <= height {
            let id = format!("p{}:{}", page, pos);
            vertices.push(id.clone());
            edges.push((prev.clone(), id.clone(), step as f64));
            prev = id;
            pos += step;
        }
    }
    FiniteCoarseInstance::from_graph(vertices, edges, "0", height as f64)
}

// ---- parametric descriptors and shipped certificates ----

fn t() -> Poly {
    Poly::var()
}

fn base_segment_pieces() -> Piece {
    Piece::Segment {
        name: "base".into(),
        coords: vec![Poly::var(), Poly::from_int(1)],
        from: -BigRational::one(),
        to: BigRational::one(),
    }
}

pub fn line_parametric() -> ParametricSpace {
    ParametricSpace {
        name: "line".into(),
        dim: 1,
        metric: SpaceMetric::Euclidean,
        basepoint: SymbolicPoint::constant(&[0]),
        pieces: vec![
            Piece::Ray { name: "right".into(), coords: vec![t()], from: BigRational::zero() },
            Piece::Ray { name: "left".into(), coords: vec![-&t()], from: BigRational::zero() },
        ],
    }
}

pub fn grid_parametric() -> ParametricSpace {
    ParametricSpace {
        name: "grid2d".into(),
        dim: 2,
        metric: SpaceMetric::Sup,
        basepoint: SymbolicPoint::constant(&[0, 0]),
        pieces: vec![Piece::Lattice { name: "lattice".into(), dim: 2 }],
    }
}

pub fn vase_parametric() -> ParametricSpace {
    ParametricSpace {
        name: "vase".into(),
        dim: 2,
        metric: SpaceMetric::Euclidean,
        basepoint: SymbolicPoint::new(
            vec![Poly::from_int(0), Poly::from_int(1)],
            BigRational::zero(),
        ),
        pieces: vec![
            Piece::Ray {
                name: "left_arm".into(),
                coords: vec![Poly::from_int(-1), Poly::from_ints(&[1, 1])],
                from: BigRational::zero(),
            },
            Piece::Ray {
                name: "right_arm".into(),
                coords: vec![Poly::from_int(1), Poly::from_ints(&[1, 1])],
                from: BigRational::zero(),
            },
            base_segment_pieces(),
        ],
    }
}

pub fn flared_vase_parametric() -> ParametricSpace {
    ParametricSpace {
        name: "flared_vase".into(),
        dim: 2,
        metric: SpaceMetric::Euclidean,
        basepoint: SymbolicPoint::new(
            vec![Poly::from_int(0), Poly::from_int(1)],
            BigRational::zero(),
        ),
        pieces: vec![
            Piece::Ray {
                name: "left_arm".into(),
                coords: vec![Poly::from_ints(&[-1, -1]), Poly::from_ints(&[1, 1])],
                from: BigRational::zero(),
            },
            Piece::Ray {
                name: "right_arm".into(),
                coords: vec![Poly::from_ints(&[1, 1]), Poly::from_ints(&[1, 1])],
                from: BigRational::zero(),
            },
            base_segment_pieces(),
        ],
    }
}

fn named(name: &str, coords: Vec<Poly>) -> NamedPoint {
    NamedPoint {
        name: name.to_string(),
        point: SymbolicPoint::new(coords, BigRational::one()),
    }
}

pub fn line_certificates() -> CertificateSet {
    CertificateSet {
        representatives: vec![
            named("plus_infinity", vec![t()]),
            named("minus_infinity", vec![-&t()]),
        ],
        schemas: Vec::new(),
        gaps: vec![GapCertificate {
            name: "line_opposite_rays".into(),
            scale: BigRational::one(),
            threshold: Poly::var(),
            side_a: vec!["right".into()],
            side_b: vec!["left".into()],
            sampling_fallback: false,
        }],
    }
}

/// The rectangle route (t,0) -> (t,t) -> (-t,t) -> (-t,0): unit axis steps
/// on the lattice staying at sup-distance >= t from the origin.
pub fn grid_rectangle_schema() -> ChainSchema {
    let k = Poly2::var_k;
    ChainSchema {
        name: "plane_rectangle".into(),
        scale: BigRational::one(),
        t0: BigRational::one(),
        escape_bound: t(),
        from: vec![t(), Poly::zero()],
        to: vec![-&t(), Poly::zero()],
        segments: vec![
            SchemaSegment {
                point: vec![Poly2::from_t(t()), k()],
                steps: t(),
                escape_coord: Some(EscapeCoord { coord: 0, negative: false }),
            },
            SchemaSegment {
                point: vec![&Poly2::from_t(t()) - &k(), Poly2::from_t(t())],
                steps: Poly::from_ints(&[0, 2]),
                escape_coord: Some(EscapeCoord { coord: 1, negative: false }),
            },
            SchemaSegment {
                point: vec![Poly2::from_t(-&t()), &Poly2::from_t(t()) - &k()],
                steps: t(),
                escape_coord: Some(EscapeCoord { coord: 0, negative: true }),
            },
        ],
    }
}

pub fn grid_certificates() -> CertificateSet {
    CertificateSet {
        representatives: vec![
            named("east", vec![t(), Poly::zero()]),
            named("west", vec![-&t(), Poly::zero()]),
        ],
        schemas: vec![grid_rectangle_schema()],
        gaps: Vec::new(),
    }
}

/// The single cross step (-1, t) -> (1, t) at scale 2 on the vase.
pub fn vase_cross_schema() -> ChainSchema {
    ChainSchema {
        name: "vase_cross".into(),
        scale: BigRational::from_integer(2.into()),
        t0: BigRational::one(),
        escape_bound: Poly::from_ints(&[-1, 1]),
        from: vec![Poly::from_int(-1), t()],
        to: vec![Poly::from_int(1), t()],
        segments: vec![SchemaSegment {
            point: vec![
                Poly2::new(vec![Poly::from_int(-1), Poly::from_int(2)]),
                Poly2::from_t(t()),
            ],
            steps: Poly::from_int(1),
            escape_coord: None,
        }],
    }
}

pub fn vase_certificates() -> CertificateSet {
    CertificateSet {
        representatives: vec![
            named("up_left", vec![Poly::from_int(-1), t()]),
            named("up_right", vec![Poly::from_int(1), t()]),
        ],
        schemas: vec![vase_cross_schema()],
        gaps: Vec::new(),
    }
}

pub fn flared_vase_certificates() -> CertificateSet {
    CertificateSet {
        representatives: vec![
            named("up_left", vec![-&t(), t()]),
            named("up_right", vec![t(), t()]),
        ],
        schemas: Vec::new(),
        gaps: vec![GapCertificate {
            name: "flared_arms_diverge".into(),
            scale: BigRational::from_integer(3.into()),
            threshold: Poly::var(),
            side_a: vec!["left_arm".into()],
            side_b: vec!["right_arm".into()],
            sampling_fallback: false,
        }],
    }
}

// ---- file ingestion ----

/// Point-cloud CSV with header `id,x1,...,xd`.
pub fn load_cloud_csv(
    path: &Path,
    metric: MetricKind,
    basepoint: &str,
    rho_max: f64,
) -> Result<FiniteCoarseInstance> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2; // header is line 1
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let mut fields = record.iter();
        let id = fields
            .next()
            .ok_or_else(|| Error::Parse { line, message: "empty row".into() })?
            .to_string();
        let coords = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad coordinate `{}`", f),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if coords.is_empty() {
            return Err(Error::Parse { line, message: "row has no coordinates".into() });
        }
        points.push((id, coords));
    }
    FiniteCoarseInstance::from_cloud(points, metric, basepoint, rho_max)
}

/// Whitespace-separated graph file: single-token lines declare vertices,
/// `u v w` lines declare undirected weighted edges; `#` starts a comment.
pub fn load_graph_edges(
    path: &Path,
    basepoint: &str,
    rho_max: f64,
) -> Result<FiniteCoarseInstance> {
    let file = std::fs::File::open(path)?;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.len() {
            1 => vertices.push(tokens[0].to_string()),
            3 => {
                let w = tokens[2].parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad edge weight `{}`", tokens[2]),
                })?;
                edges.push((tokens[0].to_string(), tokens[1].to_string(), w));
            }
            n => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 1 or 3 tokens, found {}", n),
                })
            }
        }
    }
    FiniteCoarseInstance::from_graph(vertices, edges, basepoint, rho_max)
}

pub fn load_parametric_space(path: &Path) -> Result<ParametricSpace> {
    let text = std::fs::read_to_string(path)?;
    let space: ParametricSpace = serde_json::from_str(&text)?;
    space.validate()?;
    Ok(space)
}

pub fn load_certificates(path: &Path) -> Result<CertificateSet> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes a report as pretty JSON; existing files are kept unless
/// `overwrite` is set.
pub fn save_report<T: Serialize>(report: &T, path: &Path, overwrite: bool) -> Result<()> {
    if path.exists() && !overwrite {
        return Err(Error::WouldOverwrite(path.display().to_string()));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut file = std::fs::File::create(path)?;
    let text = serde_json::to_string_pretty(report)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}
