//! Closed-form geometry on the hyperplane section of the d-level state
//! space where every coordinate beyond xi_{d+1} vanishes: the section
//! matrix, its 2x2 eigenstructure, rank-1 classification, the
//! pure-state ellipsoid, Tr sigma log rho, both Voronoi boundary
//! residuals, and the affine transform taking the ellipsoid to the
//! unit sphere.
//!
//! Requires d >= 3; the qubit has no nontrivial section of this form.

use crate::bloch::{GeneralizedBloch, xi_to_density};
use crate::qdm::{C64, DensityMatrix, Tolerances};
use nalgebra::{Matrix2, Vector3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SectionError {
    #[error("section geometry requires d >= 3, got {d}")]
    DimensionTooSmall { d: usize },
    #[error("r = {r:.3e} is numerically zero; eigenvectors are not unique")]
    DegenerateR { r: f64 },
    #[error("rho is pure (r >= 1); lambda_2 vanishes and the closed form is undefined")]
    PureRho,
    #[error("the two sites coincide")]
    IdenticalSites,
    #[error("vector is not unit: |v| = {norm}")]
    NotUnit { norm: f64 },
    #[error("operation requires a constrained section point")]
    UnconstrainedPoint,
}

/// A point on the hyperplane section, carrying the three free
/// coordinates (xi_1, xi_d, xi_{d+1}).
///
/// With `constrained` set, the remaining diagonal coordinates follow
/// the shrunken-ellipsoid slice: xi_2 = d - 2 - xi_1 and
/// xi_3 = ... = xi_{d-1} = -1. Unconstrained points leave them zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPoint {
    pub dim: usize,
    pub xi1: f64,
    pub xid: f64,
    pub xid1: f64,
    pub constrained: bool,
}

impl SectionPoint {
    pub fn new(dim: usize, xi1: f64, xid: f64, xid1: f64, constrained: bool) -> Result<Self, SectionError> {
        if dim < 3 {
            return Err(SectionError::DimensionTooSmall { d: dim });
        }
        Ok(SectionPoint { dim, xi1, xid, xid1, constrained })
    }

    /// xi_2 as implied by the slice (or zero when unconstrained).
    pub fn xi2(&self) -> f64 {
        if self.constrained {
            self.dim as f64 - 2.0 - self.xi1
        } else {
            0.0
        }
    }

    /// The full coordinate vector this point embeds to.
    pub fn to_generalized(&self) -> GeneralizedBloch {
        let d = self.dim;
        let mut g = GeneralizedBloch::zeros(d);
        g.set_coord(1, self.xi1);
        g.set_coord(2, self.xi2());
        if self.constrained {
            for k in 3..d {
                g.set_coord(k, -1.0);
            }
        }
        g.set_coord(d, self.xid);
        g.set_coord(d + 1, self.xid1);
        g
    }
}

/// A Voronoi site on the section, always on the constrained slice
/// (eta_2 = d - 2 - eta_1 implied).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionSite {
    pub dim: usize,
    pub eta1: f64,
    pub etad: f64,
    pub etad1: f64,
}

impl SectionSite {
    pub fn new(dim: usize, eta1: f64, etad: f64, etad1: f64) -> Result<Self, SectionError> {
        if dim < 3 {
            return Err(SectionError::DimensionTooSmall { d: dim });
        }
        Ok(SectionSite { dim, eta1, etad, etad1 })
    }

    pub fn to_point(&self) -> SectionPoint {
        SectionPoint {
            dim: self.dim,
            xi1: self.eta1,
            xid: self.etad,
            xid1: self.etad1,
            constrained: true,
        }
    }

    fn coords(&self) -> (f64, f64, f64) {
        (self.eta1, self.etad, self.etad1)
    }
}

/// Closed-form eigenstructure of the section matrix's top 2x2 block.
#[derive(Debug, Clone)]
pub struct SectionEigen {
    pub lambda1: f64,
    pub lambda2: f64,
    pub r: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    /// Unitary diagonalizing the 2x2 block; identity when degenerate.
    pub x: Matrix2<C64>,
    /// r is numerically zero, so `x` is an arbitrary choice.
    pub degenerate: bool,
}

/// The three rank-1 patterns on the section, plus the complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankOneClass {
    /// Only the last diagonal entry survives.
    Case1,
    /// Only the k-th diagonal entry (3 <= k <= d-1) survives;
    /// xi_k = d - 3 with every other diagonal coordinate at -1.
    Case2 { k: usize },
    /// The split eigenvalue pair has exactly one nonzero member; the
    /// locus is the pure-state ellipsoid.
    Case3,
    NotRankOne,
}

/// The density matrix induced by a section point. PSD is not checked;
/// off-slice points may leave the state space.
pub fn section_density(p: &SectionPoint) -> DensityMatrix {
    DensityMatrix::new_unchecked(xi_to_density(&p.to_generalized()))
}

/// Closed-form r, lambda_1, lambda_2, R_plus/R_minus and the
/// diagonalizing unitary of the section matrix's 2x2 block.
pub fn section_eigen(p: &SectionPoint, tol: &Tolerances) -> SectionEigen {
    let d = p.dim as f64;
    let (xi1, xi2) = (p.xi1, p.xi2());
    let off_sq = p.xid * p.xid + p.xid1 * p.xid1;
    let r = ((xi1 - xi2) * (xi1 - xi2) / (d * d) + off_sq).sqrt();
    let mean = (xi1 + xi2 + 2.0) / (2.0 * d);
    let lambda1 = mean + r / 2.0;
    let lambda2 = mean - r / 2.0;
    let gap = (xi2 - xi1) / (2.0 * d);
    let r_plus = off_sq / 4.0 + (gap + r / 2.0) * (gap + r / 2.0);
    let r_minus = off_sq / 4.0 + (gap - r / 2.0) * (gap - r / 2.0);
    if r <= tol.rank {
        return SectionEigen {
            lambda1,
            lambda2,
            r,
            r_plus,
            r_minus,
            x: Matrix2::identity(),
            degenerate: true,
        };
    }
    let x = if off_sq.sqrt() <= tol.rank {
        // Diagonal block: the columns collapse to basis vectors, larger
        // eigenvalue first.
        if xi1 >= xi2 {
            Matrix2::identity()
        } else {
            Matrix2::new(
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            )
        }
    } else {
        let off = C64::new(p.xid / 2.0, -p.xid1 / 2.0);
        let sp = r_plus.sqrt();
        let sm = r_minus.sqrt();
        Matrix2::new(
            off / C64::new(sp, 0.0),
            off / C64::new(sm, 0.0),
            C64::new((gap + r / 2.0) / sp, 0.0),
            C64::new((gap - r / 2.0) / sm, 0.0),
        )
    };
    SectionEigen {
        lambda1,
        lambda2,
        r,
        r_plus,
        r_minus,
        x,
        degenerate: false,
    }
}

/// Classify a section-form coordinate vector against the three rank-1
/// patterns. `pattern_tol` bounds the coordinate matching.
pub fn rank_one_classify(g: &GeneralizedBloch, pattern_tol: f64) -> RankOneClass {
    let d = g.dim;
    if d < 3 {
        return RankOneClass::NotRankOne;
    }
    let near = |a: f64, b: f64| (a - b).abs() <= pattern_tol;
    // Must be on the section: every coordinate past xi_{d+1} is zero.
    for k in (d + 2)..d * d {
        if g.coord(k).abs() > pattern_tol {
            return RankOneClass::NotRankOne;
        }
    }
    let off_zero = g.coord(d).abs() <= pattern_tol && g.coord(d + 1).abs() <= pattern_tol;

    if off_zero && (1..d).all(|k| near(g.coord(k), -1.0)) {
        return RankOneClass::Case1;
    }
    if d >= 4 && off_zero && near(g.coord(1), -1.0) && near(g.coord(2), -1.0) {
        let mut k_found = None;
        let mut ok = true;
        for k in 3..d {
            if near(g.coord(k), d as f64 - 3.0) && k_found.is_none() {
                k_found = Some(k);
            } else if !near(g.coord(k), -1.0) {
                ok = false;
            }
        }
        if ok {
            if let Some(k) = k_found {
                return RankOneClass::Case2 { k };
            }
        }
    }
    // Case 3: the constrained slice with the split pair collapsing.
    if near(g.coord(1) + g.coord(2), d as f64 - 2.0)
        && (3..d).all(|k| near(g.coord(k), -1.0))
    {
        let site = SectionSite {
            dim: d,
            eta1: g.coord(1),
            etad: g.coord(d),
            etad1: g.coord(d + 1),
        };
        if pure_ellipsoid_residual(&site).abs() <= pattern_tol {
            return RankOneClass::Case3;
        }
    }
    RankOneClass::NotRankOne
}

/// Residual of the pure-state ellipsoid:
/// (d - 2 - 2 eta_1)^2 / d^2 + eta_d^2 + eta_{d+1}^2 - 1.
/// Zero exactly on the Case-3 locus (r = 1, lambda_2 = 0).
pub fn pure_ellipsoid_residual(s: &SectionSite) -> f64 {
    let d = s.dim as f64;
    let a = d - 2.0 - 2.0 * s.eta1;
    a * a / (d * d) + s.etad * s.etad + s.etad1 * s.etad1 - 1.0
}

/// Closed form for Tr sigma log rho on the constrained slice, valid
/// for 0 < r < 1.
pub fn trace_sigma_log_rho(
    s: &SectionSite,
    p: &SectionPoint,
    tol: &Tolerances,
) -> Result<f64, SectionError> {
    if !p.constrained {
        return Err(SectionError::UnconstrainedPoint);
    }
    let d = p.dim as f64;
    let eig = section_eigen(p, tol);
    if eig.degenerate {
        return Err(SectionError::DegenerateR { r: eig.r });
    }
    if eig.lambda2 <= tol.rank {
        return Err(SectionError::PureRho);
    }
    let half = (d - 2.0) / 2.0;
    let bracket = (s.etad * p.xid + s.etad1 * p.xid1) / (2.0 * eig.r)
        + 2.0 * (s.eta1 - half) * (p.xi1 - half) / (d * d * eig.r);
    Ok(bracket * (eig.lambda1 / eig.lambda2).ln() + 0.5 * (eig.lambda1 * eig.lambda2).ln())
}

/// Boundary residual of the divergence Voronoi bisector in the pure
/// limit r -> 1; zero on the bisector of sites a, b.
pub fn divergence_boundary_residual(
    a: &SectionSite,
    b: &SectionSite,
    p: &SectionPoint,
) -> Result<f64, SectionError> {
    if sites_identical(a, b) {
        return Err(SectionError::IdenticalSites);
    }
    let d = p.dim as f64;
    let half = (d - 2.0) / 2.0;
    Ok((a.etad - b.etad) * p.xid
        + (a.etad1 - b.etad1) * p.xid1
        + 4.0 * (a.eta1 - b.eta1) * (p.xi1 - half) / (d * d))
}

/// Boundary residual of the coordinate-Euclidean bisector restricted
/// to the section.
pub fn euclidean_boundary_residual(
    a: &SectionSite,
    b: &SectionSite,
    p: &SectionPoint,
) -> Result<f64, SectionError> {
    if sites_identical(a, b) {
        return Err(SectionError::IdenticalSites);
    }
    Ok(-4.0 * (a.eta1 - b.eta1) * p.xi1
        - 2.0 * (a.etad - b.etad) * p.xid
        - 2.0 * (a.etad1 - b.etad1) * p.xid1
        + 2.0 * (a.eta1 * a.eta1 - b.eta1 * b.eta1)
        + (a.etad * a.etad - b.etad * b.etad)
        + (a.etad1 * a.etad1 - b.etad1 * b.etad1))
}

fn sites_identical(a: &SectionSite, b: &SectionSite) -> bool {
    let (a1, ad, ad1) = a.coords();
    let (b1, bd, bd1) = b.coords();
    (a1 - b1).abs() <= 1e-14 && (ad - bd).abs() <= 1e-14 && (ad1 - bd1).abs() <= 1e-14
}

/// The affine transform taking the pure ellipsoid to the unit sphere:
/// x = (xi_1 - (d-2)/2) / (d/2), y = xi_d, z = xi_{d+1}.
pub fn ellipsoid_to_sphere(dim: usize, xi1: f64, xid: f64, xid1: f64) -> Vector3<f64> {
    let d = dim as f64;
    Vector3::new((xi1 - (d - 2.0) / 2.0) / (d / 2.0), xid, xid1)
}

/// Inverse of `ellipsoid_to_sphere`; `constrained` is set on the
/// result since the transform lives on the constrained slice.
pub fn sphere_to_ellipsoid(dim: usize, v: &Vector3<f64>) -> SectionPoint {
    let d = dim as f64;
    SectionPoint {
        dim,
        xi1: (d - 2.0) / 2.0 + (d / 2.0) * v.x,
        xid: v.y,
        xid1: v.z,
        constrained: true,
    }
}

pub fn site_to_sphere(s: &SectionSite) -> Vector3<f64> {
    ellipsoid_to_sphere(s.dim, s.eta1, s.etad, s.etad1)
}

pub fn point_to_sphere(p: &SectionPoint) -> Vector3<f64> {
    ellipsoid_to_sphere(p.dim, p.xi1, p.xid, p.xid1)
}

/// Great-circle bisector residual q . (a - b) for unit vectors.
pub fn geodesic_bisector_residual(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    q: &Vector3<f64>,
) -> Result<f64, SectionError> {
    for v in [a, b, q] {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(SectionError::NotUnit { norm: n });
        }
    }
    if (a - b).norm() <= 1e-14 {
        return Err(SectionError::IdenticalSites);
    }
    Ok(q.dot(&(a - b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch;
    use crate::qdm;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Random pure site: a unit sphere vector pulled back to the
    /// ellipsoid.
    fn random_site(d: usize, rng: &mut ChaCha8Rng) -> SectionSite {
        let v = random_unit(rng);
        let p = sphere_to_ellipsoid(d, &v);
        SectionSite { dim: d, eta1: p.xi1, etad: p.xid, etad1: p.xid1 }
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
        loop {
            let v = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-3 {
                return v / n;
            }
        }
    }

    #[test]
    fn section_density_zero_point_is_maximally_mixed() {
        let p = SectionPoint::new(4, 0.0, 0.0, 0.0, false).unwrap();
        let rho = section_density(&p);
        for i in 0..4 {
            assert_abs_diff_eq!(rho.matrix()[(i, i)].re, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn section_density_constrained_d3() {
        let p = SectionPoint::new(3, 1.0, 0.0, 0.0, true).unwrap();
        let rho = section_density(&p);
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix()[(1, 1)].re, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix()[(2, 2)].re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn section_density_agrees_with_xi_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for d in 3..=6 {
            for constrained in [false, true] {
                let p = SectionPoint {
                    dim: d,
                    xi1: rng.random_range(-1.0..2.0),
                    xid: rng.random_range(-1.0..1.0),
                    xid1: rng.random_range(-1.0..1.0),
                    constrained,
                };
                let a = section_density(&p);
                let b = bloch::xi_to_density(&p.to_generalized());
                assert!((a.matrix() - b).map(|z| z.norm()).max() == 0.0);
            }
        }
    }

    #[test]
    fn case1_point_is_last_basis_state() {
        // Case 1 lives off the constrained slice; embed directly.
        for d in 3..=6 {
            let mut g = GeneralizedBloch::zeros(d);
            for k in 1..d {
                g.set_coord(k, -1.0);
            }
            let m = bloch::xi_to_density(&g);
            for i in 0..d {
                let want = if i == d - 1 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(m[(i, i)].re, want, epsilon = 1e-15);
            }
            let rho = DensityMatrix::new_unchecked(m);
            assert!(bloch::is_pure(&rho, 1e-9));
        }
    }

    #[test]
    fn eigen_degenerate_flag() {
        let p = SectionPoint::new(3, 0.4, 0.0, 0.0, false).unwrap();
        // Unconstrained: xi2 = 0 != xi1, not degenerate.
        assert!(!section_eigen(&p, &tol()).degenerate);
        let q = SectionPoint { dim: 3, xi1: 0.0, xid: 0.0, xid1: 0.0, constrained: false };
        let e = section_eigen(&q, &tol());
        assert!(e.degenerate);
        assert_abs_diff_eq!(e.lambda1, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.lambda2, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn eigen_diagonal_case_d3() {
        let p = SectionPoint { dim: 3, xi1: 1.0, xid: 0.0, xid1: 0.0, constrained: false };
        let e = section_eigen(&p, &tol());
        assert_abs_diff_eq!(e.r, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.lambda1, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.lambda2, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn eigen_pure_case_d3() {
        let p = SectionPoint {
            dim: 3,
            xi1: 1.0,
            xid: (8.0_f64 / 9.0).sqrt(),
            xid1: 0.0,
            constrained: true,
        };
        let e = section_eigen(&p, &tol());
        assert_abs_diff_eq!(e.r, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.lambda1, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.lambda2, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn eigen_matches_generic_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for d in 3..=6 {
            for _ in 0..100 {
                let p = SectionPoint {
                    dim: d,
                    xi1: rng.random_range(-1.0..(d as f64 - 1.0)),
                    xid: rng.random_range(-1.0..1.0),
                    xid1: rng.random_range(-1.0..1.0),
                    constrained: rng.random_bool(0.5),
                };
                let e = section_eigen(&p, &tol());
                let generic = qdm::hermitian_eig_raw(section_density(&p).matrix()).unwrap();
                // The closed-form pair plus the untouched diagonal
                // entries must reproduce the full spectrum.
                let g = p.to_generalized();
                let mut expect: Vec<f64> = vec![e.lambda1, e.lambda2];
                for k in 3..d {
                    expect.push((g.coord(k) + 1.0) / d as f64);
                }
                let diag_sum: f64 = (1..d).map(|k| g.coord(k)).sum();
                expect.push((1.0 - diag_sum) / d as f64);
                expect.sort_by(|a, b| b.partial_cmp(a).unwrap());
                for (i, want) in expect.iter().enumerate() {
                    assert_abs_diff_eq!(generic.eigenvalues[i], *want, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn r_plus_minus_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for d in 3..=6 {
            for _ in 0..100 {
                let p = SectionPoint {
                    dim: d,
                    xi1: rng.random_range(-1.0..(d as f64 - 1.0)),
                    xid: rng.random_range(-1.0..1.0),
                    xid1: rng.random_range(-1.0..1.0),
                    constrained: rng.random_bool(0.5),
                };
                let e = section_eigen(&p, &tol());
                let gap = (p.xi2() - p.xi1) / (2.0 * d as f64);
                assert_abs_diff_eq!(e.r_plus, e.r * (gap + e.r / 2.0), epsilon = 1e-10);
                assert_abs_diff_eq!(e.r_minus, -e.r * (gap - e.r / 2.0), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn classify_case1() {
        for d in 3..=6 {
            let mut g = GeneralizedBloch::zeros(d);
            for k in 1..d {
                g.set_coord(k, -1.0);
            }
            assert_eq!(rank_one_classify(&g, 1e-9), RankOneClass::Case1);
        }
    }

    #[test]
    fn classify_case2_d5() {
        let mut g = GeneralizedBloch::zeros(5);
        g.set_coord(1, -1.0);
        g.set_coord(2, -1.0);
        g.set_coord(3, 2.0);
        g.set_coord(4, -1.0);
        assert_eq!(rank_one_classify(&g, 1e-9), RankOneClass::Case2 { k: 3 });
    }

    #[test]
    fn classify_mixed_as_not_rank_one() {
        for d in 3..=5 {
            let g = GeneralizedBloch::zeros(d);
            assert_eq!(rank_one_classify(&g, 1e-9), RankOneClass::NotRankOne);
        }
    }

    #[test]
    fn classify_case3_from_sphere_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for d in 3..=8 {
            for _ in 0..20 {
                let v = random_unit(&mut rng);
                let p = sphere_to_ellipsoid(d, &v);
                assert_eq!(
                    rank_one_classify(&p.to_generalized(), 1e-9),
                    RankOneClass::Case3
                );
                let rho = section_density(&p);
                assert!(bloch::is_pure(&rho, 1e-9));
            }
        }
    }

    #[test]
    fn ellipsoid_residual_examples() {
        for d in 3..=6 {
            let df = d as f64;
            let s = SectionSite::new(d, df - 1.0, 0.0, 0.0).unwrap();
            assert_abs_diff_eq!(pure_ellipsoid_residual(&s), 0.0, epsilon = 1e-12);
            let t = SectionSite::new(
                d,
                (df - 2.0) / 2.0 + df / (2.0 * 3.0_f64.sqrt()),
                1.0 / 3.0_f64.sqrt(),
                1.0 / 3.0_f64.sqrt(),
            )
            .unwrap();
            assert_abs_diff_eq!(pure_ellipsoid_residual(&t), 0.0, epsilon = 1e-12);
        }
        let origin = SectionSite::new(4, 0.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(pure_ellipsoid_residual(&origin), -0.75, epsilon = 1e-15);
    }

    #[test]
    fn trace_log_closed_form_vs_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for d in 3..=6 {
            for _ in 0..50 {
                let s = random_site(d, &mut rng);
                let r = rng.random_range(0.1..0.95);
                let u = random_unit(&mut rng) * r;
                let p = sphere_to_ellipsoid(d, &u);
                let closed = trace_sigma_log_rho(&s, &p, &tol()).unwrap();
                let sigma = section_density(&s.to_point());
                let rho = section_density(&p);
                let l = qdm::support_log(&rho, &tol()).unwrap();
                let direct = qdm::cross_term(&sigma, &l);
                assert_abs_diff_eq!(closed, direct, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn trace_log_degenerate_and_pure_errors() {
        let d = 3;
        let p = SectionPoint { dim: d, xi1: 0.5, xid: 0.0, xid1: 0.0, constrained: true };
        // Constrained with xi1 = (d-2)/2 and no off-diagonal: r = 0.
        assert!(matches!(
            trace_sigma_log_rho(&SectionSite::new(d, 1.0, 0.0, 0.0).unwrap(), &p, &tol()),
            Err(SectionError::DegenerateR { .. })
        ));
        let pure = sphere_to_ellipsoid(d, &Vector3::new(1.0, 0.0, 0.0));
        assert!(matches!(
            trace_sigma_log_rho(&SectionSite::new(d, 1.0, 0.0, 0.0).unwrap(), &pure, &tol()),
            Err(SectionError::PureRho)
        ));
        let unconstrained = SectionPoint { dim: d, xi1: 0.3, xid: 0.1, xid1: 0.0, constrained: false };
        assert!(matches!(
            trace_sigma_log_rho(&SectionSite::new(d, 1.0, 0.0, 0.0).unwrap(), &unconstrained, &tol()),
            Err(SectionError::UnconstrainedPoint)
        ));
    }

    #[test]
    fn example1_divergence_boundary() {
        for d in 3..=5 {
            let df = d as f64;
            let a = SectionSite::new(d, df - 1.0, 0.0, 0.0).unwrap();
            let b = SectionSite::new(d, -1.0, 0.0, 0.0).unwrap();
            // Residual vanishes exactly at xi_1 = (d-2)/2 and only there.
            let on = SectionPoint { dim: d, xi1: (df - 2.0) / 2.0, xid: 0.3, xid1: 0.1, constrained: true };
            assert_abs_diff_eq!(
                divergence_boundary_residual(&a, &b, &on).unwrap(),
                0.0,
                epsilon = 1e-14
            );
            let off = SectionPoint { dim: d, xi1: (df - 2.0) / 2.0 + 0.2, xid: 0.3, xid1: 0.1, constrained: true };
            let res = divergence_boundary_residual(&a, &b, &off).unwrap();
            assert_abs_diff_eq!(res, 4.0 * df * 0.2 / (df * df), epsilon = 1e-14);
        }
    }

    #[test]
    fn example1_euclidean_boundary_root() {
        // Expansion of the boundary form puts the root at
        // xi_1 = (d-2)/2 for every d, coinciding with the divergence
        // boundary (and equal to 1 exactly when d = 4).
        for d in 3..=5 {
            let df = d as f64;
            let a = SectionSite::new(d, df - 1.0, 0.0, 0.0).unwrap();
            let b = SectionSite::new(d, -1.0, 0.0, 0.0).unwrap();
            let at = |xi1: f64| {
                euclidean_boundary_residual(
                    &a,
                    &b,
                    &SectionPoint { dim: d, xi1, xid: 0.2, xid1: 0.0, constrained: true },
                )
                .unwrap()
            };
            assert_abs_diff_eq!(at((df - 2.0) / 2.0), 0.0, epsilon = 1e-12);
            // Linear in xi_1 with slope -4d.
            assert_abs_diff_eq!(at(1.0), -4.0 * df * (1.0 - (df - 2.0) / 2.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn identical_sites_rejected() {
        let a = SectionSite::new(4, 1.0, 0.2, 0.0).unwrap();
        let p = SectionPoint { dim: 4, xi1: 0.0, xid: 0.0, xid1: 0.0, constrained: true };
        assert!(matches!(
            divergence_boundary_residual(&a, &a, &p),
            Err(SectionError::IdenticalSites)
        ));
        assert!(matches!(
            euclidean_boundary_residual(&a, &a, &p),
            Err(SectionError::IdenticalSites)
        ));
    }

    #[test]
    fn sphere_transform_examples() {
        for d in 3..=6 {
            let df = d as f64;
            let v = ellipsoid_to_sphere(d, df - 1.0, 0.0, 0.0);
            assert_abs_diff_eq!(v.x, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-14);
            let c = ellipsoid_to_sphere(d, (df - 2.0) / 2.0, 0.0, 0.0);
            assert_abs_diff_eq!(c.norm(), 0.0, epsilon = 1e-14);
            let s3 = 3.0_f64.sqrt();
            let e3 = ellipsoid_to_sphere(d, (df - 2.0) / 2.0 + df / (2.0 * s3), 1.0 / s3, 1.0 / s3);
            assert_abs_diff_eq!(e3.x, 1.0 / s3, epsilon = 1e-14);
            assert_abs_diff_eq!(e3.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn sphere_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for d in 3..=6 {
            for _ in 0..20 {
                let v = random_unit(&mut rng);
                let p = sphere_to_ellipsoid(d, &v);
                let back = point_to_sphere(&p);
                assert!((v - back).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn geodesic_residual_basics() {
        let a = Vector3::new(0.0, 0.0, 1.0);
        let b = Vector3::new(0.0, 0.0, -1.0);
        let eq = Vector3::new(1.0, 0.0, 0.0);
        assert_abs_diff_eq!(geodesic_bisector_residual(&a, &b, &eq).unwrap(), 0.0, epsilon = 1e-15);
        let c = Vector3::new(1.0, 0.0, 0.0);
        let res = geodesic_bisector_residual(&a, &c, &a).unwrap();
        assert_abs_diff_eq!(res, 1.0 - a.dot(&c), epsilon = 1e-15);
        assert!(res > 0.0);
        assert!(matches!(
            geodesic_bisector_residual(&a, &a, &eq),
            Err(SectionError::IdenticalSites)
        ));
        assert!(matches!(
            geodesic_bisector_residual(&Vector3::new(0.0, 0.0, 2.0), &b, &eq),
            Err(SectionError::NotUnit { .. })
        ));
    }

    #[test]
    fn theorem2_residuals_match_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for d in [3, 5] {
            for _ in 0..200 {
                let a = random_site(d, &mut rng);
                let b = random_site(d, &mut rng);
                if (site_to_sphere(&a) - site_to_sphere(&b)).norm() <= 1e-12 {
                    continue;
                }
                let q = random_unit(&mut rng);
                let p = sphere_to_ellipsoid(d, &q);
                let lhs = divergence_boundary_residual(&a, &b, &p).unwrap();
                let rhs = geodesic_bisector_residual(
                    &site_to_sphere(&a),
                    &site_to_sphere(&b),
                    &q,
                )
                .unwrap();
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn full_coordinate_distance_between_example1_sites() {
        // Embedded sites differ in xi_1 and xi_2 by +-d, so the full
        // coordinate distance squared is 2 d^2.
        for d in 3..=5 {
            let df = d as f64;
            let a = SectionSite::new(d, df - 1.0, 0.0, 0.0).unwrap().to_point().to_generalized();
            let b = SectionSite::new(d, -1.0, 0.0, 0.0).unwrap().to_point().to_generalized();
            let dist = qdm::coordinate_distance_sq(&a.xi, &b.xi).unwrap();
            assert_abs_diff_eq!(dist, 2.0 * df * df, epsilon = 1e-12);
        }
    }
}
