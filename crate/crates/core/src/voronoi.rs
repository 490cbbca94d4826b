//! Voronoi machinery over sampled pure-state point clouds: nearest-cell
//! assignment under pluggable distances, diagram comparison, numeric
//! boundary extraction, and the smallest enclosing ball under the
//! divergence (whose radius is the Holevo capacity).
//!
//! Pure states are addressed by unit vectors on the sphere: Bloch
//! vectors for the qubit, and images of the ellipsoid-to-sphere
//! transform for the d-level hyperplane section. The geometry context turns those unit
//! vectors back into density matrices and coordinate vectors.

use crate::bloch::{self, BlochVector};
use crate::qdm::{self, DensityMatrix, QdmError, Tolerances};
use crate::section;
use nalgebra::Vector3;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VoronoiError {
    #[error("no sites given")]
    EmptySites,
    #[error("site {index} is not a pure state: |v| = {norm}")]
    ImpureSite { index: usize, norm: f64 },
    #[error("shrink radius {r} must lie in (0, 1)")]
    InvalidShrink { r: f64 },
    #[error("point sets differ in size: {a} vs {b}")]
    PointSetMismatch { a: usize, b: usize },
    #[error("smallest enclosing ball supports d = 2 only, got d = {d}")]
    UnsupportedDimension { d: usize },
    #[error("no points given")]
    EmptyPoints,
    #[error("grid too coarse: error bound {bound:.3e} exceeds requested tolerance {tolerance:.3e}")]
    GridTooCoarse { bound: f64, tolerance: f64 },
    #[error(transparent)]
    Qdm(#[from] QdmError),
    #[error(transparent)]
    Section(#[from] section::SectionError),
}

/// Which state space the unit sphere addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// The one-qubit Bloch sphere.
    Qubit,
    /// The pure ellipsoid of the d-level hyperplane section, mapped to
    /// the unit sphere by the affine transform.
    Section { dim: usize },
}

impl Geometry {
    /// The state addressed by unit vector `u` scaled to radius `r`.
    pub fn density(&self, u: &Vector3<f64>, r: f64) -> DensityMatrix {
        match self {
            Geometry::Qubit => {
                let v = BlochVector::new(u.x * r, u.y * r, u.z * r);
                bloch::bloch_to_density(&v, &Tolerances::default())
                    .expect("unit direction scaled into the ball")
            }
            Geometry::Section { dim } => {
                let scaled = u * r;
                section::section_density(&section::sphere_to_ellipsoid(*dim, &scaled))
            }
        }
    }

    /// Full coordinate vector of the pure state at `u`.
    pub fn coordinates(&self, u: &Vector3<f64>) -> Vec<f64> {
        match self {
            Geometry::Qubit => vec![u.z, u.x, u.y],
            Geometry::Section { dim } => {
                section::sphere_to_ellipsoid(*dim, u).to_generalized().xi
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceKind {
    /// Limit diagram of the divergence with sites in the first
    /// argument; evaluation points are shrunk to radius `shrink`.
    DivergenceLimit { shrink: f64 },
    /// Squared Euclidean distance in the full coordinate vector.
    CoordinateEuclidean,
    /// Great-circle arc length on the unit sphere image.
    Geodesic,
    /// Squared Frobenius distance between the density matrices.
    HilbertSchmidt,
}

impl DistanceKind {
    pub fn label(&self) -> &'static str {
        match self {
            DistanceKind::DivergenceLimit { .. } => "divergence",
            DistanceKind::CoordinateEuclidean => "euclidean",
            DistanceKind::Geodesic => "geodesic",
            DistanceKind::HilbertSchmidt => "hilbert-schmidt",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CellEntry {
    pub site: usize,
    /// Distance gap to the runner-up site.
    pub margin: f64,
    /// Margin below the boundary tolerance; excluded from comparison
    /// verdicts.
    pub boundary: bool,
}

#[derive(Debug, Clone)]
pub struct CellAssignment {
    pub entries: Vec<CellEntry>,
    pub n_sites: usize,
}

/// Distances from one evaluation point to every site, for one kind.
pub struct DistanceEvaluator<'a> {
    geom: Geometry,
    kind: DistanceKind,
    sites: &'a [Vector3<f64>],
    tol: Tolerances,
    site_density: Vec<DensityMatrix>,
    site_entropy: Vec<f64>,
    site_coords: Vec<Vec<f64>>,
}

impl<'a> DistanceEvaluator<'a> {
    pub fn new(
        sites: &'a [Vector3<f64>],
        geom: Geometry,
        kind: DistanceKind,
    ) -> Result<Self, VoronoiError> {
        if sites.is_empty() {
            return Err(VoronoiError::EmptySites);
        }
        let tol = Tolerances::default();
        for (index, s) in sites.iter().enumerate() {
            let norm = s.norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(VoronoiError::ImpureSite { index, norm });
            }
        }
        if let DistanceKind::DivergenceLimit { shrink } = kind {
            if !(shrink > 0.0 && shrink < 1.0) {
                return Err(VoronoiError::InvalidShrink { r: shrink });
            }
        }
        let mut site_density = Vec::new();
        let mut site_entropy = Vec::new();
        let mut site_coords = Vec::new();
        match kind {
            DistanceKind::DivergenceLimit { .. } | DistanceKind::HilbertSchmidt => {
                for s in sites {
                    let rho = geom.density(s, 1.0);
                    site_entropy.push(qdm::entropy_term(&rho, &tol)?);
                    site_density.push(rho);
                }
            }
            DistanceKind::CoordinateEuclidean => {
                for s in sites {
                    site_coords.push(geom.coordinates(s));
                }
            }
            DistanceKind::Geodesic => {}
        }
        Ok(DistanceEvaluator {
            geom,
            kind,
            sites,
            tol,
            site_density,
            site_entropy,
            site_coords,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Distance from the pure point at `u` to every site.
    pub fn distances(&self, u: &Vector3<f64>) -> Result<Vec<f64>, VoronoiError> {
        match self.kind {
            DistanceKind::DivergenceLimit { shrink } => {
                let rho = self.geom.density(u, shrink);
                let log_rho = qdm::support_log(&rho, &self.tol)?;
                Ok(self
                    .site_density
                    .iter()
                    .zip(&self.site_entropy)
                    .map(|(sigma, s)| s - qdm::cross_term(sigma, &log_rho))
                    .collect())
            }
            DistanceKind::CoordinateEuclidean => {
                let pc = self.geom.coordinates(u);
                self.site_coords
                    .iter()
                    .map(|sc| qdm::coordinate_distance_sq(sc, &pc).map_err(Into::into))
                    .collect()
            }
            DistanceKind::Geodesic => Ok(self
                .sites
                .iter()
                .map(|s| u.dot(s).clamp(-1.0, 1.0).acos())
                .collect()),
            DistanceKind::HilbertSchmidt => {
                let rho = self.geom.density(u, 1.0);
                Ok(self
                    .site_density
                    .iter()
                    .map(|sigma| {
                        (sigma.matrix() - rho.matrix())
                            .iter()
                            .map(|z| z.norm_sqr())
                            .sum()
                    })
                    .collect())
            }
        }
    }
}

/// Best and runner-up site, ties broken by lowest index.
fn best_two(dist: &[f64]) -> (usize, f64, f64) {
    let mut best = 0;
    for (i, &d) in dist.iter().enumerate() {
        if d < dist[best] {
            best = i;
        }
    }
    let mut second = f64::INFINITY;
    for (i, &d) in dist.iter().enumerate() {
        if i != best && d < second {
            second = d;
        }
    }
    (best, dist[best], second)
}

/// Assign every point to its nearest site under `kind`.
pub fn assign_cells(
    points: &[Vector3<f64>],
    sites: &[Vector3<f64>],
    geom: Geometry,
    kind: DistanceKind,
    boundary_tol: f64,
) -> Result<CellAssignment, VoronoiError> {
    let eval = DistanceEvaluator::new(sites, geom, kind)?;
    let mut entries = Vec::with_capacity(points.len());
    for u in points {
        let dist = eval.distances(u)?;
        let (site, best, second) = best_two(&dist);
        let margin = if second.is_finite() { second - best } else { f64::INFINITY };
        entries.push(CellEntry {
            site,
            margin,
            boundary: margin < boundary_tol,
        });
    }
    Ok(CellAssignment {
        entries,
        n_sites: sites.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub total: usize,
    pub agree: usize,
    pub disagree: usize,
    pub boundary_flagged: usize,
    /// Indices of non-boundary points where the assignments differ.
    pub witnesses: Vec<usize>,
}

/// Compare two assignments over the same point set. Boundary-flagged
/// points (in either diagram) are excluded from the verdict.
pub fn compare_diagrams(
    a: &CellAssignment,
    b: &CellAssignment,
) -> Result<ComparisonReport, VoronoiError> {
    if a.entries.len() != b.entries.len() {
        return Err(VoronoiError::PointSetMismatch {
            a: a.entries.len(),
            b: b.entries.len(),
        });
    }
    let mut agree = 0;
    let mut disagree = 0;
    let mut boundary_flagged = 0;
    let mut witnesses = Vec::new();
    for (i, (ea, eb)) in a.entries.iter().zip(&b.entries).enumerate() {
        if ea.boundary || eb.boundary {
            boundary_flagged += 1;
        } else if ea.site == eb.site {
            agree += 1;
        } else {
            disagree += 1;
            witnesses.push(i);
        }
    }
    Ok(ComparisonReport {
        total: a.entries.len(),
        agree,
        disagree,
        boundary_flagged,
        witnesses,
    })
}

#[derive(Debug, Clone)]
pub struct BoundaryExtraction {
    /// Ordered polylines of unit vectors where the top-two margin
    /// changes sign.
    pub polylines: Vec<Vec<Vector3<f64>>>,
    /// Grid-spacing bound on the deviation from the true zero set.
    pub max_deviation: f64,
}

fn slerp(a: &Vector3<f64>, b: &Vector3<f64>, t: f64) -> Vector3<f64> {
    let v = a + t * (b - a);
    let n = v.norm();
    if n > 1e-12 { v / n } else { *a }
}

/// Numeric zero-contour of the nearest-site margin on the sphere.
///
/// Labels a latitude-longitude grid, bisects label-changing edges, and
/// chains the crossing segments into polylines.
pub fn extract_boundary(
    sites: &[Vector3<f64>],
    geom: Geometry,
    kind: DistanceKind,
    resolution: usize,
) -> Result<BoundaryExtraction, VoronoiError> {
    let eval = DistanceEvaluator::new(sites, geom, kind)?;
    let rows = resolution + 1;
    let cols = 2 * resolution;
    let node = |i: usize, j: usize| -> Vector3<f64> {
        let theta = std::f64::consts::PI * i as f64 / resolution as f64;
        let phi = 2.0 * std::f64::consts::PI * j as f64 / cols as f64;
        Vector3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        )
    };
    let mut labels = vec![0usize; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let dist = eval.distances(&node(i, j))?;
            labels[i * cols + j] = best_two(&dist).0;
        }
    }
    // Crossing point on an edge whose endpoints carry different labels.
    let cross = |a: &Vector3<f64>, b: &Vector3<f64>, la: usize, lb: usize| -> Result<Vector3<f64>, VoronoiError> {
        let f = |u: &Vector3<f64>| -> Result<f64, VoronoiError> {
            let d = eval.distances(u)?;
            Ok(d[la] - d[lb])
        };
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let flo = f(a)?;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let fm = f(&slerp(a, b, mid))?;
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(slerp(a, b, 0.5 * (lo + hi)))
    };
    let mut segments: Vec<(Vector3<f64>, Vector3<f64>)> = Vec::new();
    for i in 0..resolution {
        for j in 0..cols {
            let jn = (j + 1) % cols;
            let corner = [(i, j), (i, jn), (i + 1, jn), (i + 1, j)];
            let lab: Vec<usize> = corner.iter().map(|&(a, b)| labels[a * cols + b]).collect();
            let mut crossings = Vec::new();
            for e in 0..4 {
                let (c0, c1) = (corner[e], corner[(e + 1) % 4]);
                let (l0, l1) = (lab[e], lab[(e + 1) % 4]);
                if l0 != l1 {
                    let p0 = node(c0.0, c0.1);
                    let p1 = node(c1.0, c1.1);
                    crossings.push(cross(&p0, &p1, l0, l1)?);
                }
            }
            if crossings.len() == 2 {
                segments.push((crossings[0], crossings[1]));
            } else if crossings.len() > 2 {
                // Junction cell: connect consecutive crossings so the
                // chains stay closed; exact junction layout is below
                // grid resolution anyway.
                for w in crossings.windows(2) {
                    segments.push((w[0], w[1]));
                }
            }
        }
    }
    // Greedy chaining of segments into polylines.
    let join_tol = 4.0 * std::f64::consts::PI / resolution as f64;
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut line = vec![segments[start].0, segments[start].1];
        loop {
            let mut extended = false;
            for (k, seg) in segments.iter().enumerate() {
                if used[k] {
                    continue;
                }
                let tail = *line.last().unwrap();
                let head = line[0];
                if (seg.0 - tail).norm() < join_tol {
                    line.push(seg.1);
                } else if (seg.1 - tail).norm() < join_tol {
                    line.push(seg.0);
                } else if (seg.0 - head).norm() < join_tol {
                    line.insert(0, seg.1);
                } else if (seg.1 - head).norm() < join_tol {
                    line.insert(0, seg.0);
                } else {
                    continue;
                }
                used[k] = true;
                extended = true;
                break;
            }
            if !extended {
                break;
            }
        }
        polylines.push(line);
    }
    Ok(BoundaryExtraction {
        polylines,
        max_deviation: std::f64::consts::PI / resolution as f64,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SebConfig {
    /// Farthest-point averaging steps before local refinement.
    pub max_farthest_steps: usize,
    /// Coordinate-descent stops once the step drops below this.
    pub min_refine_step: f64,
    /// Hard cap on objective evaluations during refinement.
    pub max_refine_evals: usize,
}

impl Default for SebConfig {
    fn default() -> Self {
        SebConfig {
            max_farthest_steps: 200,
            min_refine_step: 1e-7,
            max_refine_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SebResult {
    pub center: DensityMatrix,
    pub center_bloch: BlochVector,
    /// max_i D(sigma_i || center), in nats.
    pub radius: f64,
    /// Points attaining the radius within the reported gap.
    pub support: Vec<usize>,
    pub iterations: usize,
    /// Upper bound minus best certified lower bound on the radius.
    pub gap: f64,
    pub converged: bool,
}

// Max eigenvalue clamp keeping the center strictly full rank.
const CENTER_MAX_NORM: f64 = 1.0 - 2e-9;

struct SebObjective {
    blochs: Vec<BlochVector>,
    densities: Vec<DensityMatrix>,
    entropies: Vec<f64>,
    tol: Tolerances,
    evals: std::cell::Cell<usize>,
}

impl SebObjective {
    fn new(points: &[DensityMatrix]) -> Result<Self, VoronoiError> {
        if points.is_empty() {
            return Err(VoronoiError::EmptyPoints);
        }
        let tol = Tolerances::default();
        let mut blochs = Vec::new();
        let mut entropies = Vec::new();
        for p in points {
            if p.dim() != 2 {
                return Err(VoronoiError::UnsupportedDimension { d: p.dim() });
            }
            blochs.push(bloch::density_to_bloch(p));
            entropies.push(qdm::entropy_term(p, &tol)?);
        }
        Ok(SebObjective {
            blochs,
            densities: points.to_vec(),
            entropies,
            tol,
            evals: std::cell::Cell::new(0),
        })
    }

    /// (max_i D(p_i || rho(c)), argmax), via the matrix route.
    fn eval(&self, c: &BlochVector) -> Result<(f64, usize), VoronoiError> {
        self.evals.set(self.evals.get() + 1);
        let rho = bloch::bloch_to_density(c, &self.tol)
            .expect("center clamped inside the ball");
        let log_rho = qdm::matrix_log(&rho, &self.tol)?;
        let mut max = f64::NEG_INFINITY;
        let mut arg = 0;
        for (i, (sigma, s)) in self.densities.iter().zip(&self.entropies).enumerate() {
            let d = s - qdm::cross_term(sigma, &log_rho);
            if d > max {
                max = d;
                arg = i;
            }
        }
        Ok((max, arg))
    }

    fn all(&self, c: &BlochVector) -> Result<Vec<f64>, VoronoiError> {
        let rho = bloch::bloch_to_density(c, &self.tol).expect("center inside ball");
        let log_rho = qdm::matrix_log(&rho, &self.tol)?;
        Ok(self
            .densities
            .iter()
            .zip(&self.entropies)
            .map(|(sigma, s)| s - qdm::cross_term(sigma, &log_rho))
            .collect())
    }
}

fn clamp_center(c: BlochVector) -> BlochVector {
    let n = c.norm();
    if n > CENTER_MAX_NORM {
        c.scale(CENTER_MAX_NORM / n)
    } else {
        c
    }
}

/// Minimax center of a qubit point set under the divergence
/// D(point || center): farthest-point averaging followed by
/// coordinate-descent refinement. The center stays strictly full rank.
pub fn smallest_enclosing_ball(
    points: &[DensityMatrix],
    cfg: &SebConfig,
) -> Result<SebResult, VoronoiError> {
    let obj = SebObjective::new(points)?;
    let n = obj.blochs.len() as f64;
    let mut c = clamp_center(BlochVector::new(
        obj.blochs.iter().map(|b| b.x).sum::<f64>() / n,
        obj.blochs.iter().map(|b| b.y).sum::<f64>() / n,
        obj.blochs.iter().map(|b| b.z).sum::<f64>() / n,
    ));
    let mut iterations = 0;
    for t in 1..=cfg.max_farthest_steps {
        let (_, far) = obj.eval(&c)?;
        let b = obj.blochs[far];
        let step = 1.0 / (t as f64 + 1.0);
        c = clamp_center(BlochVector::new(
            c.x + step * (b.x - c.x),
            c.y + step * (b.y - c.y),
            c.z + step * (b.z - c.z),
        ));
        iterations += 1;
    }
    // Coordinate-descent refinement.
    let (mut f_best, _) = obj.eval(&c)?;
    let mut h = 0.05;
    let mut converged = false;
    while obj.evals.get() < cfg.max_refine_evals {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut cand = c;
                match axis {
                    0 => cand.x += sign * h,
                    1 => cand.y += sign * h,
                    _ => cand.z += sign * h,
                }
                cand = clamp_center(cand);
                let (f, _) = obj.eval(&cand)?;
                if f < f_best - 1e-15 {
                    f_best = f;
                    c = cand;
                    improved = true;
                }
            }
        }
        iterations += 1;
        if !improved {
            h *= 0.5;
            if h < cfg.min_refine_step {
                converged = true;
                break;
            }
        }
    }
    // Certify by random-direction probing at a fixed small step.
    let probe_step = 1e-4;
    let mut best_probe = f_best;
    for dx in -1i32..=1 {
        for dy in -1i32..=1 {
            for dz in -1i32..=1 {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                let v = BlochVector::new(dx as f64, dy as f64, dz as f64);
                let s = probe_step / v.norm();
                let cand = clamp_center(BlochVector::new(
                    c.x + s * v.x,
                    c.y + s * v.y,
                    c.z + s * v.z,
                ));
                let (f, _) = obj.eval(&cand)?;
                best_probe = best_probe.min(f);
            }
        }
    }
    let gap = (f_best - best_probe).max(0.0) + h.max(cfg.min_refine_step);
    let dists = obj.all(&c)?;
    let support_tol = (10.0 * gap).max(1e-9);
    let support: Vec<usize> = dists
        .iter()
        .enumerate()
        .filter(|(_, &d)| d >= f_best - support_tol)
        .map(|(i, _)| i)
        .collect();
    Ok(SebResult {
        center: bloch::bloch_to_density(&c, &Tolerances::default())
            .expect("center inside ball"),
        center_bloch: c,
        radius: f_best,
        support,
        iterations,
        gap,
        converged,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct BruteForceConfig {
    /// Fine grid spacing over the Bloch ball.
    pub spacing: f64,
    /// Reject with GridTooCoarse if the spacing-derived error bound
    /// exceeds this.
    pub tolerance: f64,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        BruteForceConfig {
            spacing: 0.01,
            tolerance: 0.05,
        }
    }
}

/// Independent grid oracle for the qubit minimax center.
///
/// Uses the analytic Bloch-coordinate form of the divergence (a route
/// disjoint from the eigensolver path the iterative solver takes):
/// D(a || c) = S(a) - alpha(c) - gamma(c) (a . c/|c|) with
/// alpha = ln(lambda+ lambda-)/2 and gamma = ln(lambda+/lambda-)/2 for
/// lambda+- = (1 +- |c|)/2.
pub fn brute_force_center(
    points: &[DensityMatrix],
    cfg: &BruteForceConfig,
) -> Result<SebResult, VoronoiError> {
    if points.is_empty() {
        return Err(VoronoiError::EmptyPoints);
    }
    let tol = Tolerances::default();
    let mut blochs = Vec::new();
    let mut entropies = Vec::new();
    for p in points {
        if p.dim() != 2 {
            return Err(VoronoiError::UnsupportedDimension { d: p.dim() });
        }
        let b = bloch::density_to_bloch(p);
        let r = b.norm().min(1.0);
        let (lp, lm) = ((1.0 + r) / 2.0, (1.0 - r) / 2.0);
        let mut s = lp * lp.ln();
        if lm > tol.rank {
            s += lm * lm.ln();
        }
        blochs.push(b);
        entropies.push(s);
    }
    let objective = |c: &BlochVector| -> f64 {
        let r = c.norm();
        let (alpha, gamma) = if r < 1e-12 {
            (-(2.0_f64.ln()), 0.0)
        } else {
            let (lp, lm) = ((1.0 + r) / 2.0, (1.0 - r) / 2.0);
            (0.5 * (lp * lm).ln(), 0.5 * (lp / lm).ln())
        };
        let mut max = f64::NEG_INFINITY;
        for (b, s) in blochs.iter().zip(&entropies) {
            let dir = if r < 1e-12 { 0.0 } else { b.dot(c) / r };
            max = max.max(s - alpha - gamma * dir);
        }
        max
    };
    let interior = 0.999;
    let scan = |center: BlochVector, half: f64, h: f64| -> (BlochVector, f64) {
        let steps = (2.0 * half / h).round() as i64;
        let mut best = (center, f64::INFINITY);
        for ix in 0..=steps {
            for iy in 0..=steps {
                for iz in 0..=steps {
                    let c = BlochVector::new(
                        center.x - half + ix as f64 * h,
                        center.y - half + iy as f64 * h,
                        center.z - half + iz as f64 * h,
                    );
                    if c.norm() > interior {
                        continue;
                    }
                    let f = objective(&c);
                    if f < best.1 {
                        best = (c, f);
                    }
                }
            }
        }
        best
    };
    let coarse = cfg.spacing.max(0.04);
    let (mut best_c, mut best_f) = scan(BlochVector::new(0.0, 0.0, 0.0), 1.0, coarse);
    if cfg.spacing < coarse {
        let (c, f) = scan(best_c, 2.5 * coarse, cfg.spacing);
        if f < best_f {
            best_c = c;
            best_f = f;
        }
    }
    // Spacing-derived error bound from the local slope.
    let h = cfg.spacing;
    let mut slope = 0.0_f64;
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let mut c = best_c;
            match axis {
                0 => c.x += sign * h,
                1 => c.y += sign * h,
                _ => c.z += sign * h,
            }
            if c.norm() <= interior {
                slope = slope.max((objective(&c) - best_f).abs() / h);
            }
        }
    }
    let bound = slope * h * 3.0_f64.sqrt() / 2.0 + 1e-12;
    if bound > cfg.tolerance {
        return Err(VoronoiError::GridTooCoarse {
            bound,
            tolerance: cfg.tolerance,
        });
    }
    // Support set under the analytic distances.
    let r = best_c.norm();
    let (alpha, gamma) = if r < 1e-12 {
        (-(2.0_f64.ln()), 0.0)
    } else {
        let (lp, lm) = ((1.0 + r) / 2.0, (1.0 - r) / 2.0);
        (0.5 * (lp * lm).ln(), 0.5 * (lp / lm).ln())
    };
    let support: Vec<usize> = blochs
        .iter()
        .zip(&entropies)
        .enumerate()
        .filter(|(_, (b, s))| {
            let dir = if r < 1e-12 { 0.0 } else { b.dot(&best_c) / r };
            *s - alpha - gamma * dir >= best_f - bound - 1e-9
        })
        .map(|(i, _)| i)
        .collect();
    Ok(SebResult {
        center: bloch::bloch_to_density(&best_c, &tol).expect("grid restricted to interior"),
        center_bloch: best_c,
        radius: best_f,
        support,
        iterations: 1,
        gap: bound,
        converged: true,
    })
}
