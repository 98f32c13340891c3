//! Run directories: manifest, stored histograms, results, scores and images.
//!
//! ```text
//! <run>/manifest.json    what was run, on which backend, with which seed
//! <run>/histograms/      one measurement per job id (resume + replay)
//! <run>/results.json     benchmark-specific estimates
//! <run>/scores.json      per-part and overall scores
//! <run>/images/          PGM + PNG rasters, SVG line plots
//! ```

use crate::analysis::{self, NoiseFit, ScorePoint, ScoreWithError};
use crate::backend::{write_atomic, Backend, BackendDescriptor, Executor, HistogramStore};
use crate::bell::{self, BellRun, PairSelection};
use crate::error::{Error, Result};
use crate::gates::C64;
use crate::linedraw::{self, Curve, LineRun};
use crate::matinv::{self, ColumnHistograms, Instance};
use crate::platonic::{self, PlatonicRun};
use crate::render::{self, GrayImage, Polyline};
use crate::riemann::{self, GridScores, Kind, LevelRun, PixelGrid};
use crate::sim::{stream_rng, Measurement};
use crate::topology::Topology;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::Ordering;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub level: u32,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub name: String,
    pub points: Vec<[f64; 2]>,
}

impl CurveSpec {
    pub fn of(curve: &Curve) -> Self {
        Self { name: curve.name.clone(), points: curve.to_json().points }
    }

    pub fn curve(&self) -> Result<Curve> {
        Curve::new(self.name.clone(), self.points.iter().map(|p| C64::new(p[0], p[1])).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeSpec {
    pub size: usize,
    pub shots: u64,
}

/// A fully resolved benchmark request (no implicit defaults left).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "benchmark", rename_all = "lowercase")]
pub enum Benchmark {
    Bell { topology: Topology, pairs: PairSelection, shots: u64 },
    Sm { levels: Vec<LevelSpec>, resolution: usize },
    Mandelbrot { levels: Vec<LevelSpec>, resolution: usize },
    Line { curves: Vec<CurveSpec>, batches: usize, shots: u64 },
    Matinv { sizes: Vec<SizeSpec> },
    Platonic { depths: Vec<usize>, strength: f64, shots: u64 },
}

impl Benchmark {
    pub fn id(&self) -> &'static str {
        match self {
            Benchmark::Bell { .. } => "bell",
            Benchmark::Sm { .. } => "sm",
            Benchmark::Mandelbrot { .. } => "mandelbrot",
            Benchmark::Line { .. } => "line",
            Benchmark::Matinv { .. } => "matinv",
            Benchmark::Platonic { .. } => "platonic",
        }
    }

    /// Grid benchmark with shots per level from the defaults when omitted.
    pub fn grid(kind: Kind, levels: &[u32], resolution: usize, shots: Option<u64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidConfig("no levels requested".into()));
        }
        let levels = levels
            .iter()
            .map(|&level| {
                if level == 0 {
                    return Err(Error::InvalidConfig("levels start at 1".into()));
                }
                Ok(LevelSpec { level, shots: shots.unwrap_or_else(|| riemann::default_shots(level)) })
            })
            .collect::<Result<_>>()?;
        Ok(match kind {
            Kind::Microscope => Benchmark::Sm { levels, resolution },
            Kind::Mandelbrot => Benchmark::Mandelbrot { levels, resolution },
        })
    }

    /// Rejects requests that cannot run, before anything touches a run
    /// directory.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        match self {
            Benchmark::Bell { topology, shots, .. } => {
                topology.validate()?;
                if *shots == 0 {
                    return bad("bell needs at least one shot".into());
                }
            }
            Benchmark::Sm { levels, resolution } | Benchmark::Mandelbrot { levels, resolution } => {
                if levels.is_empty() || *resolution == 0 {
                    return bad("grid runs need levels and a positive resolution".into());
                }
                if let Some(l) = levels.iter().find(|l| l.level == 0 || l.shots == 0) {
                    return bad(format!("level {} with {} shots", l.level, l.shots));
                }
            }
            Benchmark::Line { curves, batches, shots } => {
                if curves.is_empty() || *batches == 0 || *shots == 0 {
                    return bad("line drawing needs curves, batches and shots".into());
                }
                for c in curves {
                    c.curve()?;
                }
            }
            Benchmark::Matinv { sizes } => {
                if sizes.is_empty() {
                    return bad("no matrix sizes requested".into());
                }
                if let Some(s) = sizes.iter().find(|s| !matinv::SIZES.contains(&s.size) || s.shots == 0) {
                    return bad(format!("matrix size {} with {} shots (sizes are {:?})", s.size, s.shots, matinv::SIZES));
                }
            }
            Benchmark::Platonic { depths, strength, shots } => {
                if depths.is_empty() || depths.contains(&0) || *shots == 0 {
                    return bad("platonic runs need depths of at least 1 and shots".into());
                }
                platonic::WeakMeasSpec::new(*strength)?;
            }
        }
        Ok(())
    }

    pub fn matinv(sizes: &[usize], shots: Option<u64>) -> Self {
        let sizes = sizes
            .iter()
            .map(|&size| SizeSpec { size, shots: shots.unwrap_or_else(|| matinv::default_shots(size)) })
            .collect();
        Benchmark::Matinv { sizes }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotsAccounting {
    pub circuits: u64,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub benchmark: Benchmark,
    pub backend: BackendDescriptor,
    pub seed: u64,
    pub timestamp: String,
    pub version: String,
    #[serde(default)]
    pub accounting: Option<ShotsAccounting>,
}

impl RunManifest {
    /// `timestamp` follows `SOURCE_DATE_EPOCH` when set so that repeated
    /// runs can produce identical trees.
    pub fn new(benchmark: Benchmark, backend: &Backend, seed: u64) -> Self {
        let time = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.parse::<i64>().ok())
            .and_then(|s| chrono::DateTime::from_timestamp(s, 0))
            .unwrap_or_else(chrono::Utc::now);
        Self {
            benchmark,
            backend: backend.descriptor(),
            seed,
            timestamp: time.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            version: VERSION.into(),
            accounting: None,
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path)
            .map_err(|_| Error::MissingData(format!("{} not found", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn same_request(&self, other: &Self) -> bool {
        self.benchmark == other.benchmark && self.backend == other.backend && self.seed == other.seed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub run: LevelRun,
    pub oracle_ps: PixelGrid,
    pub oracle_1: PixelGrid,
    pub scores: GridScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatinvResult {
    pub instance: Instance,
    pub histograms: ColumnHistograms,
    pub ideal: Vec<Vec<f64>>,
    pub score: ScoreWithError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "benchmark", rename_all = "lowercase")]
pub enum RunResults {
    Bell { topology: Topology, run: BellRun },
    Sm { levels: Vec<GridResult> },
    Mandelbrot { levels: Vec<GridResult> },
    Line { runs: Vec<LineRun> },
    Matinv { instances: Vec<MatinvResult> },
    Platonic { runs: Vec<PlatonicRun> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresFile {
    pub benchmark: String,
    pub parts: BTreeMap<String, ScoreWithError>,
    /// Present when every part entering the overall score was run.
    pub overall: Option<ScoreWithError>,
}

fn grid_result(kind: Kind, spec: LevelSpec, resolution: usize, exec: &Executor) -> Result<GridResult> {
    let run = riemann::run_grid(kind, spec.level, resolution, spec.shots, exec)?;
    let (oracle_ps, oracle_1) = riemann::oracle_grids(kind, spec.level, resolution);
    let scores = riemann::score_grids(&run, &oracle_ps, &oracle_1)?;
    Ok(GridResult { run, oracle_ps, oracle_1, scores })
}

/// Runs `bench` through `exec`.
pub fn execute(bench: &Benchmark, exec: &Executor) -> Result<RunResults> {
    Ok(match bench {
        Benchmark::Bell { topology, pairs, shots } => {
            RunResults::Bell { topology: topology.clone(), run: bell::run_bell(topology, *pairs, *shots, exec)? }
        }
        Benchmark::Sm { levels, resolution } => RunResults::Sm {
            levels: levels.iter().map(|l| grid_result(Kind::Microscope, *l, *resolution, exec)).collect::<Result<_>>()?,
        },
        Benchmark::Mandelbrot { levels, resolution } => RunResults::Mandelbrot {
            levels: levels.iter().map(|l| grid_result(Kind::Mandelbrot, *l, *resolution, exec)).collect::<Result<_>>()?,
        },
        Benchmark::Line { curves, batches, shots } => RunResults::Line {
            runs: curves
                .iter()
                .map(|c| linedraw::run_linedraw(&c.curve()?, *batches, *shots, exec))
                .collect::<Result<_>>()?,
        },
        Benchmark::Matinv { sizes } => RunResults::Matinv {
            instances: sizes
                .iter()
                .map(|s| {
                    let instance = matinv::default_instance(s.size)?;
                    let histograms = matinv::run_columns(&instance, s.shots, exec)?;
                    let ideal = instance.ideal_columns()?;
                    let score = matinv::matinv_score(&histograms, &ideal)?;
                    Ok(MatinvResult { instance, histograms, ideal, score })
                })
                .collect::<Result<_>>()?,
        },
        Benchmark::Platonic { depths, strength, shots } => RunResults::Platonic {
            runs: depths
                .iter()
                .map(|&d| platonic::run_platonic(d, *strength, *shots, exec))
                .collect::<Result<_>>()?,
        },
    })
}

pub fn scores_of(results: &RunResults) -> ScoresFile {
    let mut parts = BTreeMap::new();
    let (benchmark, overall) = match results {
        RunResults::Bell { run, .. } => {
            parts.insert("cbell".to_string(), run.score);
            ("bell", Some(run.score))
        }
        RunResults::Sm { levels } | RunResults::Mandelbrot { levels } => {
            for g in levels {
                parts.insert(format!("level{}_ps", g.run.level), g.scores.score_ps);
                parts.insert(format!("level{}_1", g.run.level), g.scores.score_1);
            }
            let find = |n: u32| levels.iter().find(|g| g.run.level == n).map(|g| g.scores);
            let overall = match (find(1), find(2)) {
                (Some(a), Some(b)) => Some(riemann::overall_score(&a, &b)),
                _ => None,
            };
            (if matches!(results, RunResults::Sm { .. }) { "sm" } else { "mandelbrot" }, overall)
        }
        RunResults::Line { runs } => {
            for r in runs {
                parts.insert(r.curve.clone(), r.score);
            }
            let overall = match (parts.get("kite"), parts.get("heart8")) {
                (Some(a), Some(b)) => Some(linedraw::overall_score(a, b)),
                _ => None,
            };
            ("line", overall)
        }
        RunResults::Matinv { instances } => {
            for m in instances {
                parts.insert(format!("size{}", m.instance.size()), m.score);
            }
            let get = |s: usize| parts.get(&format!("size{s}")).copied();
            let overall = match (get(2), get(4), get(8)) {
                (Some(a), Some(b), Some(c)) => Some(matinv::overall_score(&[a, b, c])),
                _ => None,
            };
            ("matinv", overall)
        }
        RunResults::Platonic { runs } => {
            for r in runs {
                parts.insert(format!("depth{}", r.depth), r.score);
            }
            let get = |d: usize| parts.get(&format!("depth{d}")).copied();
            let overall = match (get(1), get(2), get(3)) {
                (Some(a), Some(b), Some(c)) => Some(platonic::overall_score(&[a, b, c])),
                _ => None,
            };
            ("platonic", overall)
        }
    };
    ScoresFile { benchmark: benchmark.into(), parts, overall }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|_| Error::MissingData(format!("{} not found", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Runs (or resumes) `manifest` in `dir`. An existing run directory is only
/// reused for the identical request; stored histograms are not recomputed.
pub fn run(manifest: RunManifest, backend: Backend, dir: &Path) -> Result<ScoresFile> {
    manifest.benchmark.validate()?;
    fs::create_dir_all(dir)?;
    let manifest = match RunManifest::load(dir) {
        Ok(old) if old.same_request(&manifest) => RunManifest { accounting: None, ..old },
        Ok(_) => {
            return Err(Error::InvalidConfig(format!(
                "{} holds a different run; choose another output directory",
                dir.display()
            )))
        }
        Err(_) => manifest,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    let exec = Executor::new(backend, manifest.seed).with_store(HistogramStore::new(dir.join("histograms"))?);
    let results = execute(&manifest.benchmark, &exec)?;
    let accounting = ShotsAccounting {
        circuits: exec.usage.circuits.load(Ordering::Relaxed),
        shots: exec.usage.shots.load(Ordering::Relaxed),
    };
    write_json(&dir.join("manifest.json"), &RunManifest { accounting: Some(accounting), ..manifest })?;
    finish(dir, &results)
}

fn finish(dir: &Path, results: &RunResults) -> Result<ScoresFile> {
    write_json(&dir.join("results.json"), results)?;
    let scores = scores_of(results);
    write_json(&dir.join("scores.json"), &scores)?;
    render_results(results, &dir.join("images"))?;
    Ok(scores)
}

/// Recomputes results and scores from the stored histograms only.
pub fn rescore(dir: &Path) -> Result<ScoresFile> {
    let manifest = RunManifest::load(dir)?;
    let exec = Executor::replay(HistogramStore::new(dir.join("histograms"))?);
    let results = execute(&manifest.benchmark, &exec)?;
    finish(dir, &results)
}

/// Re-renders the images of a completed run.
pub fn render_dir(dir: &Path) -> Result<()> {
    let results: RunResults = read_json(&dir.join("results.json"))?;
    render_results(&results, &dir.join("images"))
}

pub fn load_scores(dir: &Path) -> Result<ScoresFile> {
    read_json(&dir.join("scores.json"))
}

fn grid_image(g: &PixelGrid) -> Result<GrayImage> {
    GrayImage::new(g.resolution, g.resolution, g.values.clone())
}

/// Pixels per matrix entry (or grid pixel) in rendered rasters.
const RASTER_SIDE: usize = 256;

pub fn render_results(results: &RunResults, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    match results {
        RunResults::Bell { topology, run } => {
            let m = bell::heatmap(topology.n, &run.results);
            let rows: Vec<Vec<f64>> =
                m.iter().map(|r| r.iter().map(|v| v.map_or(f64::NAN, |c| c / 1.5)).collect()).collect();
            GrayImage::from_rows(&rows)?.save(dir, "bell_heatmap", (RASTER_SIDE / topology.n.max(1)).max(1))?;
        }
        RunResults::Sm { levels } | RunResults::Mandelbrot { levels } => {
            for g in levels {
                let stem = format!("{}_l{}", g.run.kind.id(), g.run.level);
                let scale = (RASTER_SIDE / g.run.grid_ps.resolution).max(1);
                grid_image(&g.run.grid_ps)?.save(dir, &format!("{stem}_ps"), scale)?;
                grid_image(&g.run.grid_1)?.save(dir, &format!("{stem}_1"), scale)?;
                grid_image(&g.oracle_ps)?.save(dir, &format!("{stem}_ps_oracle"), scale)?;
                grid_image(&g.oracle_1)?.save(dir, &format!("{stem}_1_oracle"), scale)?;
            }
        }
        RunResults::Line { runs } => {
            for r in runs {
                let mut lines = vec![Polyline { points: r.target.clone(), closed: true, stroke: "gray", width: 2.0 }];
                for b in &r.batches {
                    lines.push(Polyline { points: b.aligned.clone(), closed: true, stroke: "black", width: 0.5 });
                }
                let extent = lines
                    .iter()
                    .flat_map(|l| l.points.iter())
                    .map(|p| p[0].abs().max(p[1].abs()))
                    .fold(0.0, f64::max)
                    * 1.15;
                let svg = render::svg(&lines, &[], extent.max(1e-9), 400);
                write_atomic(&dir.join(format!("line_{}.svg", r.curve)), svg.as_bytes())?;
            }
        }
        RunResults::Matinv { instances } => {
            for m in instances {
                let size = m.instance.size();
                let img = GrayImage::from_rows(&matinv::render_histogram(&m.histograms, m.instance.ideal_max_prob))?;
                img.save(dir, &format!("matinv_{size}"), (RASTER_SIDE / size).max(1))?;
            }
        }
        RunResults::Platonic { runs } => {
            for r in runs {
                let mut lines: Vec<Polyline> = platonic::expected_segments(r.depth, r.strength)
                    .into_iter()
                    .map(|s| Polyline { points: s.to_vec(), closed: false, stroke: "lightgray", width: 1.0 })
                    .collect();
                let mut dots = Vec::with_capacity(r.points.len());
                for p in &r.points {
                    let parent = p.expected[p.expected.len() - 2];
                    lines.push(Polyline {
                        points: vec![[parent[1], parent[2]], p.measured],
                        closed: false,
                        stroke: "black",
                        width: 0.7,
                    });
                    dots.push((p.measured, "black"));
                }
                let svg = render::svg(&lines, &dots, 1.05, 400);
                write_atomic(&dir.join(format!("platonic_d{}.svg", r.depth)), svg.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Score-versus-shots points and the `n_s/√N + n_d` fit for one part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub benchmark: String,
    pub part: String,
    pub points: Vec<ScorePoint>,
    pub fit: NoiseFit,
}

type Scorer = Box<dyn Fn(&[Measurement]) -> Result<f64>>;

/// Bins the stored shots of every part of a sampled run, re-scores each bin
/// size and fits the statistical/device decomposition.
pub fn fit_noise_dir(dir: &Path, max_bins: usize) -> Result<Vec<NoiseReport>> {
    let manifest = RunManifest::load(dir)?;
    let exec = Executor::replay(HistogramStore::new(dir.join("histograms"))?);
    let mut parts: Vec<(String, Vec<Measurement>, Scorer)> = Vec::new();
    match &manifest.benchmark {
        Benchmark::Sm { levels, resolution } | Benchmark::Mandelbrot { levels, resolution } => {
            let kind = if manifest.benchmark.id() == "sm" { Kind::Microscope } else { Kind::Mandelbrot };
            for l in levels {
                let ms = exec.run(&riemann::grid_jobs(kind, l.level, *resolution, l.shots)?)?;
                let (ops, o1) = riemann::oracle_grids(kind, l.level, *resolution);
                let (level, res) = (l.level, *resolution);
                let scorer: Scorer = Box::new(move |ms: &[Measurement]| {
                    let shots = ms.first().map_or(0, Measurement::shots);
                    let run = riemann::level_run_from(kind, level, res, shots, ms)?;
                    let s = riemann::score_grids(&run, &ops, &o1)?;
                    Ok(0.5 * (s.score_ps.value + s.score_1.value))
                });
                parts.push((format!("level{}", l.level), ms, scorer));
            }
        }
        Benchmark::Matinv { sizes } => {
            for s in sizes {
                let inst = matinv::default_instance(s.size)?;
                let ms = exec.run(&matinv::column_jobs(&inst, s.shots)?)?;
                let ideal = inst.ideal_columns()?;
                let scorer: Scorer = Box::new(move |ms: &[Measurement]| {
                    let shots = ms.first().map_or(0, Measurement::shots);
                    Ok(matinv::matinv_score(&matinv::columns_from(&inst, shots, ms)?, &ideal)?.value)
                });
                parts.push((format!("size{}", s.size), ms, scorer));
            }
        }
        Benchmark::Platonic { depths, strength, shots } => {
            for &d in depths {
                let ms = exec.run(&platonic::platonic_jobs(d, *strength, *shots)?)?;
                let s = *strength;
                let scorer: Scorer = Box::new(move |ms: &[Measurement]| {
                    let shots = ms.first().map_or(0, Measurement::shots);
                    Ok(platonic::platonic_from(d, s, shots, ms)?.score.value)
                });
                parts.push((format!("depth{d}"), ms, scorer));
            }
        }
        other => {
            return Err(Error::InvalidConfig(format!("noise fit is not available for {}", other.id())));
        }
    }
    let mut out = Vec::with_capacity(parts.len());
    for (part, ms, scorer) in parts {
        let mut rng = stream_rng(manifest.seed, &format!("fit-noise-{part}"));
        let points = analysis::resample_scores(&ms, max_bins, &mut rng, |b| scorer(b))?;
        let fit = analysis::fit_noise(&points)?;
        out.push(NoiseReport { benchmark: manifest.benchmark.id().into(), part, points, fit });
    }
    Ok(out)
}

/// Writes `noise_fit.json` and one score-versus-shots plot per part.
pub fn write_noise_reports(dir: &Path, reports: &[NoiseReport]) -> Result<()> {
    write_json(&dir.join("noise_fit.json"), &reports)?;
    let images = dir.join("images");
    fs::create_dir_all(&images)?;
    for r in reports {
        let pts: Vec<[f64; 2]> = r.points.iter().map(|p| [p.shots.log2(), p.score]).collect();
        let (lo, hi) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p[0]), b.max(p[0])));
        let curve: Vec<[f64; 2]> = (0..=50)
            .map(|k| {
                let x = lo + (hi - lo) * f64::from(k) / 50.0;
                [x, r.fit.n_s / x.exp2().sqrt() + r.fit.n_d]
            })
            .collect();
        let svg = render::xy_plot(&pts, &curve, 400);
        write_atomic(&images.join(format!("noise_{}_{}.svg", r.benchmark, r.part)), svg.as_bytes())?;
    }
    Ok(())
}

/// Collects the overall score of every run below `device_dir`.
pub fn device_report(device_dir: &Path, qv: Option<f64>) -> Result<analysis::DeviceReport> {
    let mut scores = BTreeMap::new();
    let mut entries: Vec<_> = fs::read_dir(device_dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let path = e.path();
        if !path.join("scores.json").is_file() {
            continue;
        }
        let s = load_scores(&path)?;
        if let Some(o) = s.overall {
            scores.insert(s.benchmark, o);
        }
    }
    if scores.is_empty() {
        return Err(Error::MissingData(format!("no scored runs below {}", device_dir.display())));
    }
    let name = device_dir.file_name().and_then(|s| s.to_str()).unwrap_or("device");
    analysis::DeviceReport::new(name, scores, qv)
}

/// `report.json` plus a bar chart of the normalized error scores.
pub fn write_device_report(device_dir: &Path, report: &analysis::DeviceReport) -> Result<()> {
    write_json(&device_dir.join("report.json"), report)?;
    let mut bars: Vec<(String, f64)> = report.normalized.iter().map(|(k, v)| (k.clone(), *v)).collect();
    if let Some(m) = report.mean_score {
        bars.push(("mean score".into(), m));
    }
    write_atomic(&device_dir.join("mean_scores.svg"), render::bar_chart(&bars, 600, 300).as_bytes())
}
