//! Orchestration behind the CLI subcommands: configuration, the
//! worked example site sets, diagram/capacity/sample runs and their
//! file outputs.

use crate::bloch::{self, SampleScheme};
use crate::channel::{self, ChannelError, QubitChannel};
use crate::plot;
use crate::section::{self, SectionError, SectionSite};
use crate::voronoi::{
    self, CellAssignment, ComparisonReport, DistanceKind, Geometry, SebConfig, VoronoiError,
};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown distance kind '{0}' (expected divergence | euclidean | geodesic | hilbert-schmidt)")]
    UnknownKind(String),
    #[error("unknown example {0} (expected 1, 2 or 3)")]
    UnknownExample(u32),
    #[error("JSON parse error in {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Voronoi(#[from] VoronoiError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

fn default_d() -> usize {
    5
}
fn default_kinds() -> Vec<String> {
    vec!["divergence".into(), "euclidean".into()]
}
fn default_shrink() -> f64 {
    0.9999
}
fn default_n() -> usize {
    4000
}
fn default_resolution() -> usize {
    96
}
fn default_boundary_tol() -> f64 {
    1e-7
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Run configuration; JSON file fields are overridden by CLI flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default)]
    pub example: Option<u32>,
    /// Explicit sites as (eta_1, eta_d, eta_{d+1}) triples on the pure
    /// ellipsoid (Bloch vectors when d = 2).
    #[serde(default)]
    pub sites: Option<Vec<[f64; 3]>>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<String>,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_boundary_tol")]
    pub boundary_tol: f64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.d < 2 {
            return Err(RunError::Config(format!("d must be >= 2, got {}", self.d)));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(RunError::Config(format!(
                "shrink radius must lie in (0, 1), got {}",
                self.shrink
            )));
        }
        if self.n < 1 {
            return Err(RunError::Config("sample count must be >= 1".into()));
        }
        for k in &self.kinds {
            parse_kind(k, self.shrink)?;
        }
        Ok(())
    }

    /// Hash of the scientific configuration; the output location does
    /// not affect the produced bytes, so it is excluded.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            out: default_out(),
            ..self.clone()
        };
        plot::config_hash(
            serde_json::to_string(&canonical)
                .expect("config serializes")
                .as_bytes(),
        )
    }

    pub fn geometry(&self) -> Geometry {
        if self.d == 2 {
            Geometry::Qubit
        } else {
            Geometry::Section { dim: self.d }
        }
    }
}

pub fn parse_kind(name: &str, shrink: f64) -> Result<DistanceKind, RunError> {
    match name {
        "divergence" => Ok(DistanceKind::DivergenceLimit { shrink }),
        "euclidean" => Ok(DistanceKind::CoordinateEuclidean),
        "geodesic" => Ok(DistanceKind::Geodesic),
        "hilbert-schmidt" => Ok(DistanceKind::HilbertSchmidt),
        other => Err(RunError::UnknownKind(other.to_string())),
    }
}

/// Example 1: two sites at the ends of the long axis of the ellipsoid.
pub fn example1_sites(d: usize) -> Vec<SectionSite> {
    let df = d as f64;
    vec![
        SectionSite { dim: d, eta1: df - 1.0, etad: 0.0, etad1: 0.0 },
        SectionSite { dim: d, eta1: -1.0, etad: 0.0, etad1: 0.0 },
    ]
}

/// Example 2 realized as a pure mirrored pair: the printed site
/// coordinates are not on the pure ellipsoid, so the configuration is
/// taken as two pure sites mirrored in the last coordinate, which
/// reproduces the stated boundary plane xi_{d+1} = 0.
pub fn example2_sites(d: usize) -> Vec<SectionSite> {
    let s = 1.0 / 2.0_f64.sqrt();
    let a = section::sphere_to_ellipsoid(d, &Vector3::new(0.0, s, s));
    let b = section::sphere_to_ellipsoid(d, &Vector3::new(0.0, s, -s));
    vec![
        SectionSite { dim: d, eta1: a.xi1, etad: a.xid, etad1: a.xid1 },
        SectionSite { dim: d, eta1: b.xi1, etad: b.xid, etad1: b.xid1 },
    ]
}

/// Example 3: the eight pure sites (all sign combinations).
pub fn example3_sites(d: usize) -> Vec<SectionSite> {
    let df = d as f64;
    let half = (df - 2.0) / 2.0;
    let s3 = 3.0_f64.sqrt();
    let mut sites = Vec::new();
    for sy in [1.0, -1.0] {
        for sz in [1.0, -1.0] {
            sites.push(SectionSite {
                dim: d,
                eta1: half + df / (2.0 * s3),
                etad: sy / s3,
                etad1: sz / s3,
            });
        }
    }
    for sy in [1.0, -1.0] {
        sites.push(SectionSite {
            dim: d,
            eta1: half - df / (2.0 * s3),
            etad: sy * (2.0_f64 / 3.0).sqrt(),
            etad1: 0.0,
        });
    }
    for sz in [1.0, -1.0] {
        sites.push(SectionSite {
            dim: d,
            eta1: half - df / (2.0 * s3),
            etad: 0.0,
            etad1: sz * (2.0_f64 / 3.0).sqrt(),
        });
    }
    sites
}

/// Resolve the configured sites to unit vectors on the sphere image.
pub fn resolve_sites(cfg: &RunConfig) -> Result<Vec<Vector3<f64>>, RunError> {
    if let Some(example) = cfg.example {
        if cfg.d < 3 {
            return Err(RunError::Config(
                "section examples require d >= 3".into(),
            ));
        }
        let sites = match example {
            1 => example1_sites(cfg.d),
            2 => example2_sites(cfg.d),
            3 => example3_sites(cfg.d),
            other => return Err(RunError::UnknownExample(other)),
        };
        return Ok(sites.iter().map(section::site_to_sphere).collect());
    }
    if let Some(raw) = &cfg.sites {
        let vecs = if cfg.d == 2 {
            raw.iter()
                .map(|s| Vector3::new(s[0], s[1], s[2]))
                .collect::<Vec<_>>()
        } else {
            raw.iter()
                .map(|s| {
                    section::site_to_sphere(&SectionSite {
                        dim: cfg.d,
                        eta1: s[0],
                        etad: s[1],
                        etad1: s[2],
                    })
                })
                .collect()
        };
        return Ok(vecs);
    }
    Err(RunError::Config(
        "either an example id or explicit sites are required".into(),
    ))
}

#[derive(Debug, Serialize)]
pub struct DiagramOutput {
    pub files: Vec<PathBuf>,
    pub comparisons: Vec<ComparisonSummary>,
}

#[derive(Debug, Serialize)]
pub struct ComparisonSummary {
    pub kinds: (String, String),
    pub identical: bool,
    pub report: ComparisonReport,
}

/// Run diagrams for every configured kind, write assignment CSVs,
/// boundary polylines, SVG renderings and pairwise comparison reports.
pub fn cmd_diagram(cfg: &RunConfig) -> Result<DiagramOutput, RunError> {
    cfg.validate()?;
    let hash = cfg.hash();
    std::fs::create_dir_all(&cfg.out)?;
    let geom = cfg.geometry();
    let sites = resolve_sites(cfg)?;
    let points: Vec<Vector3<f64>> = bloch::sample_sphere(cfg.n, SampleScheme::Fibonacci, cfg.seed)
        .iter()
        .map(|b| Vector3::new(b.x, b.y, b.z))
        .collect();
    let mut files = Vec::new();
    let mut assignments: Vec<(String, CellAssignment)> = Vec::new();
    for kind_name in &cfg.kinds {
        let kind = parse_kind(kind_name, cfg.shrink)?;
        let asg = voronoi::assign_cells(&points, &sites, geom, kind, cfg.boundary_tol)?;
        let csv_path = cfg.out.join(format!("assignment_{kind_name}.csv"));
        plot::write_csv(
            &csv_path,
            &hash,
            &["x", "y", "z", "site", "margin", "boundary"],
            points.iter().zip(&asg.entries).map(|(p, e)| {
                vec![
                    plot::fmt_f64(p.x),
                    plot::fmt_f64(p.y),
                    plot::fmt_f64(p.z),
                    e.site.to_string(),
                    plot::fmt_f64(e.margin),
                    (e.boundary as u8).to_string(),
                ]
            }),
        )?;
        files.push(csv_path);
        let ext = voronoi::extract_boundary(&sites, geom, kind, cfg.resolution)?;
        let bnd_path = cfg.out.join(format!("boundary_{kind_name}.csv"));
        plot::write_csv(
            &bnd_path,
            &hash,
            &["polyline", "order", "x", "y", "z", "xi1", "xid", "xid1"],
            ext.polylines.iter().enumerate().flat_map(|(li, line)| {
                let d = cfg.d;
                line.iter().enumerate().map(move |(oi, v)| {
                    let p = section::sphere_to_ellipsoid(d.max(3), v);
                    vec![
                        li.to_string(),
                        oi.to_string(),
                        plot::fmt_f64(v.x),
                        plot::fmt_f64(v.y),
                        plot::fmt_f64(v.z),
                        plot::fmt_f64(p.xi1),
                        plot::fmt_f64(p.xid),
                        plot::fmt_f64(p.xid1),
                    ]
                })
            }),
        )?;
        files.push(bnd_path);
        let svg_path = cfg.out.join(format!("diagram_{kind_name}.svg"));
        let colored: Vec<(Vector3<f64>, usize)> = points
            .iter()
            .zip(&asg.entries)
            .map(|(p, e)| (*p, e.site))
            .collect();
        plot::render_sphere_svg(
            &svg_path,
            &hash,
            &format!("d={} {}", cfg.d, kind_name),
            &colored,
            &sites,
            &ext.polylines,
        )?;
        files.push(svg_path);
        assignments.push((kind_name.clone(), asg));
    }
    let mut comparisons = Vec::new();
    for i in 0..assignments.len() {
        for j in (i + 1)..assignments.len() {
            let report = voronoi::compare_diagrams(&assignments[i].1, &assignments[j].1)?;
            let summary = ComparisonSummary {
                kinds: (assignments[i].0.clone(), assignments[j].0.clone()),
                identical: report.disagree == 0,
                report,
            };
            let path = cfg.out.join(format!(
                "comparison_{}_{}.json",
                assignments[i].0, assignments[j].0
            ));
            std::fs::write(
                &path,
                serde_json::to_string_pretty(&serde_json::json!({
                    "config_hash": hash,
                    "comparison": &summary,
                }))?,
            )?;
            files.push(path);
            comparisons.push(summary);
        }
    }
    Ok(DiagramOutput { files, comparisons })
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Parse {
            path: "<inline>".into(),
            source: e,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CapacityReport {
    pub config_hash: String,
    pub channel: QubitChannel,
    pub scheme: String,
    pub seed: u64,
    pub estimate: channel::CapacityEstimate,
}

/// Load a channel JSON ({"m": [9 reals row-major], "b": [3 reals]}),
/// estimate its Holevo capacity, and write the report.
pub fn cmd_capacity(channel_path: &Path, cfg: &RunConfig) -> Result<CapacityReport, RunError> {
    cfg.validate()?;
    let text = std::fs::read_to_string(channel_path)?;
    let ch: QubitChannel = serde_json::from_str(&text).map_err(|e| RunError::Parse {
        path: channel_path.display().to_string(),
        source: e,
    })?;
    let est = channel::holevo_capacity_estimate(
        &ch,
        cfg.n.max(2),
        SampleScheme::Fibonacci,
        cfg.seed,
        &SebConfig::default(),
    )?;
    let report = CapacityReport {
        config_hash: cfg.hash(),
        channel: ch,
        scheme: "fibonacci".into(),
        seed: cfg.seed,
        estimate: est,
    };
    std::fs::create_dir_all(&cfg.out)?;
    std::fs::write(
        cfg.out.join("capacity.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}

/// Write the sampled sphere points as CSV.
pub fn cmd_sample(cfg: &RunConfig, scheme: SampleScheme) -> Result<PathBuf, RunError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)?;
    let pts = bloch::sample_sphere(cfg.n, scheme, cfg.seed);
    let path = cfg.out.join("samples.csv");
    plot::write_csv(
        &path,
        &cfg.hash(),
        &["x", "y", "z"],
        pts.iter()
            .map(|p| vec![plot::fmt_f64(p.x), plot::fmt_f64(p.y), plot::fmt_f64(p.z)]),
    )?;
    Ok(path)
}
