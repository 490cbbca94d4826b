//! Coordinate parameterizations of quantum states: the one-qubit Bloch
//! ball and its d-level generalization, purity tests, and pure-state
//! sampling on the sphere.
//!
//! Coordinate layout for the d-level vector xi (1-based, length d^2-1):
//! xi_1 .. xi_{d-1} fill the first d-1 diagonal entries as
//! (xi_k + 1)/d, with the last diagonal entry (1 - sum xi_k)/d implied.
//! Off-diagonal entries (i, j), i < j, take consecutive (real,
//! imaginary) pairs assigned row-major starting at xi_d, so entry
//! (1, 2) holds (xi_d - i xi_{d+1})/2 and entry (d-1, d) holds
//! (xi_{d^2-2} - i xi_{d^2-1})/2. This is the single place the
//! convention is defined; `section` reuses it.

use crate::qdm::{C64, CMat, DensityMatrix, QdmError, Tolerances};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlochError {
    #[error("point outside the Bloch ball: |v| = {norm}")]
    OutsideBall { norm: f64 },
    #[error("shrink radius {r} outside [0, 1]")]
    RadiusOutOfRange { r: f64 },
    #[error("input vector is not a unit vector: |v| = {norm}")]
    NotUnit { norm: f64 },
    #[error(transparent)]
    Qdm(#[from] QdmError),
}

/// One-qubit Bloch coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scale(&self, s: f64) -> BlochVector {
        BlochVector::new(s * self.x, s * self.y, s * self.z)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Generalized coordinates xi of a d-level Hermitian unit-trace matrix.
/// PSD is not implied by the parameterization and must be checked
/// numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedBloch {
    pub dim: usize,
    /// xi_1 .. xi_{d^2-1}, stored 0-based.
    pub xi: Vec<f64>,
}

impl GeneralizedBloch {
    pub fn zeros(dim: usize) -> Self {
        GeneralizedBloch {
            dim,
            xi: vec![0.0; dim * dim - 1],
        }
    }

    /// 1-based accessor matching the layout described in the module doc.
    pub fn coord(&self, k: usize) -> f64 {
        self.xi[k - 1]
    }

    pub fn set_coord(&mut self, k: usize, v: f64) {
        self.xi[k - 1] = v;
    }

    /// 1-based index of the real slot for off-diagonal entry (i, j)
    /// with 1 <= i < j <= d; the imaginary slot follows it.
    pub fn pair_index(dim: usize, i: usize, j: usize) -> usize {
        debug_assert!(1 <= i && i < j && j <= dim);
        // Pairs before row i: sum_{r<i} (d - r); pairs before (i, j)
        // within row i: j - i - 1. Each pair takes two slots after the
        // d-1 diagonal coordinates.
        let before_rows: usize = (1..i).map(|r| dim - r).sum();
        let within = j - i - 1;
        dim + 2 * (before_rows + within)
    }
}

/// The 2x2 state of a Bloch vector inside the closed unit ball.
pub fn bloch_to_density(v: &BlochVector, tol: &Tolerances) -> Result<DensityMatrix, BlochError> {
    let n = v.norm();
    if n * n > 1.0 + tol.psd {
        return Err(BlochError::OutsideBall { norm: n });
    }
    let mut m = CMat::zeros(2, 2);
    m[(0, 0)] = C64::new((1.0 + v.z) / 2.0, 0.0);
    m[(1, 1)] = C64::new((1.0 - v.z) / 2.0, 0.0);
    m[(0, 1)] = C64::new(v.x / 2.0, -v.y / 2.0);
    m[(1, 0)] = C64::new(v.x / 2.0, v.y / 2.0);
    Ok(DensityMatrix::new_unchecked(m))
}

/// Bloch coordinates of a 2x2 state.
pub fn density_to_bloch(rho: &DensityMatrix) -> BlochVector {
    let m = rho.matrix();
    BlochVector::new(
        2.0 * m[(0, 1)].re,
        -2.0 * m[(0, 1)].im,
        m[(0, 0)].re - m[(1, 1)].re,
    )
}

/// The Hermitian unit-trace matrix induced by generalized coordinates.
pub fn xi_to_density(g: &GeneralizedBloch) -> CMat {
    let d = g.dim;
    let df = d as f64;
    let mut m = CMat::zeros(d, d);
    let mut diag_sum = 0.0;
    for k in 1..d {
        let v = g.coord(k);
        diag_sum += v;
        m[(k - 1, k - 1)] = C64::new((v + 1.0) / df, 0.0);
    }
    m[(d - 1, d - 1)] = C64::new((1.0 - diag_sum) / df, 0.0);
    for i in 1..d {
        for j in (i + 1)..=d {
            let a = GeneralizedBloch::pair_index(d, i, j);
            let re = g.coord(a) / 2.0;
            let im = g.coord(a + 1) / 2.0;
            m[(i - 1, j - 1)] = C64::new(re, -im);
            m[(j - 1, i - 1)] = C64::new(re, im);
        }
    }
    m
}

/// Inverse of `xi_to_density` for Hermitian unit-trace matrices.
pub fn density_to_xi(m: &CMat, tol: &Tolerances) -> Result<GeneralizedBloch, QdmError> {
    let d = m.nrows();
    if d != m.ncols() {
        return Err(QdmError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let tr: C64 = (0..d).map(|i| m[(i, i)]).sum();
    let violation = (tr - C64::new(1.0, 0.0)).norm();
    if violation > tol.trace {
        return Err(QdmError::TraceNotOne { violation });
    }
    let df = d as f64;
    let mut g = GeneralizedBloch::zeros(d);
    for k in 1..d {
        g.set_coord(k, df * m[(k - 1, k - 1)].re - 1.0);
    }
    for i in 1..d {
        for j in (i + 1)..=d {
            let a = GeneralizedBloch::pair_index(d, i, j);
            g.set_coord(a, 2.0 * m[(i - 1, j - 1)].re);
            g.set_coord(a + 1, -2.0 * m[(i - 1, j - 1)].im);
        }
    }
    Ok(g)
}

/// Rank-1 test via purity: Tr rho^2 >= 1 - 2 tol.
pub fn is_pure(rho: &DensityMatrix, tol: f64) -> bool {
    rho.purity() >= 1.0 - 2.0 * tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleScheme {
    /// Deterministic near-uniform lattice; reproducible given n.
    Fibonacci,
    /// Seeded uniform sampling on the sphere surface.
    UniformRandom,
}

/// n near-uniform unit vectors on the sphere surface.
pub fn sample_sphere(n: usize, scheme: SampleScheme, seed: u64) -> Vec<BlochVector> {
    assert!(n >= 1, "need at least one sample");
    match scheme {
        SampleScheme::Fibonacci => {
            let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
            (0..n)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let theta = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
                    BlochVector::new(r * theta.cos(), r * theta.sin(), z)
                })
                .collect()
        }
        SampleScheme::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let z: f64 = rng.random_range(-1.0..1.0);
                    let phi: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                    let r = (1.0 - z * z).sqrt();
                    BlochVector::new(r * phi.cos(), r * phi.sin(), z)
                })
                .collect()
        }
    }
}

/// Scale a pure point to radius r, so states stay full rank for r < 1
/// and the divergence limit r -> 1 can be taken.
pub fn shrink_to_radius(v: &BlochVector, r: f64) -> Result<BlochVector, BlochError> {
    if !(0.0..=1.0).contains(&r) {
        return Err(BlochError::RadiusOutOfRange { r });
    }
    let n = v.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(BlochError::NotUnit { norm: n });
    }
    Ok(v.scale(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdm;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn bloch_origin_is_maximally_mixed() {
        let rho = bloch_to_density(&BlochVector::new(0.0, 0.0, 0.0), &tol()).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix()[(1, 1)].re, 0.5, epsilon = 1e-15);
        assert_eq!(rho.matrix()[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn bloch_poles_and_equator() {
        let up = bloch_to_density(&BlochVector::new(0.0, 0.0, 1.0), &tol()).unwrap();
        assert_abs_diff_eq!(up.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(up.matrix()[(1, 1)].re, 0.0, epsilon = 1e-15);
        let plus = bloch_to_density(&BlochVector::new(1.0, 0.0, 0.0), &tol()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(plus.matrix()[(i, j)].re, 0.5, epsilon = 1e-15);
                assert_abs_diff_eq!(plus.matrix()[(i, j)].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn bloch_rejects_outside_ball() {
        assert!(matches!(
            bloch_to_density(&BlochVector::new(1.1, 0.0, 0.0), &tol()),
            Err(BlochError::OutsideBall { .. })
        ));
    }

    #[test]
    fn xi_zero_is_maximally_mixed() {
        for d in 2..=5 {
            let m = xi_to_density(&GeneralizedBloch::zeros(d));
            for i in 0..d {
                assert_abs_diff_eq!(m[(i, i)].re, 1.0 / d as f64, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn xi_matches_one_qubit_parameterization() {
        // At d = 2 the layout reads xi = (z, x, y).
        let (x, y, z) = (0.3, -0.4, 0.5);
        let mut g = GeneralizedBloch::zeros(2);
        g.set_coord(1, z);
        g.set_coord(2, x);
        g.set_coord(3, y);
        let a = xi_to_density(&g);
        let b = bloch_to_density(&BlochVector::new(x, y, z), &tol()).unwrap();
        let err = (&a - b.matrix()).map(|v| v.norm()).max();
        assert!(err <= 1e-15);
    }

    #[test]
    fn xi_case1_point_is_last_basis_state() {
        let mut g = GeneralizedBloch::zeros(3);
        g.set_coord(1, -1.0);
        g.set_coord(2, -1.0);
        let m = xi_to_density(&g);
        assert_abs_diff_eq!(m[(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(2, 2)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn density_to_xi_round_trip() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in 2..=5 {
            for _ in 0..25 {
                let mut g = GeneralizedBloch::zeros(d);
                for k in 1..d * d {
                    g.set_coord(k, rng.random_range(-1.0..1.0));
                }
                let back = density_to_xi(&xi_to_density(&g), &tol()).unwrap();
                for k in 1..d * d {
                    assert_abs_diff_eq!(back.coord(k), g.coord(k), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn density_to_xi_basis_state_d3() {
        let m = qdm::CMat::from_fn(3, 3, |i, j| {
            if i == 0 && j == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let g = density_to_xi(&m, &tol()).unwrap();
        assert_abs_diff_eq!(g.coord(1), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.coord(2), -1.0, epsilon = 1e-14);
        for k in 3..9 {
            assert_abs_diff_eq!(g.coord(k), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn xi_affinity() {
        let mut a = GeneralizedBloch::zeros(3);
        let mut b = GeneralizedBloch::zeros(3);
        for k in 1..9 {
            a.set_coord(k, 0.1 * k as f64);
            b.set_coord(k, -0.05 * k as f64 + 0.2);
        }
        let mid = GeneralizedBloch {
            dim: 3,
            xi: a.xi.iter().zip(&b.xi).map(|(x, y)| (x + y) / 2.0).collect(),
        };
        let lhs = xi_to_density(&mid);
        let rhs = (xi_to_density(&a) + xi_to_density(&b)).map(|z| z * 0.5);
        assert!((lhs - rhs).map(|z| z.norm()).max() <= 1e-15);
    }

    #[test]
    fn purity_classification() {
        let pure = DensityMatrix::validate(
            &qdm::CMat::from_fn(3, 3, |i, j| {
                if i == 0 && j == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
            &tol(),
        )
        .unwrap();
        assert!(is_pure(&pure, 1e-9));
        for d in 2..=4 {
            let mixed = DensityMatrix::new_unchecked(
                qdm::CMat::identity(d, d).map(|z| z / C64::new(d as f64, 0.0)),
            );
            assert!(!is_pure(&mixed, 1e-9));
        }
        let surface = bloch_to_density(
            &BlochVector::new(0.6, 0.8 * 0.6, 0.8 * 0.8),
            &tol(),
        )
        .unwrap();
        assert!(is_pure(&surface, 1e-9));
    }

    #[test]
    fn fibonacci_samples_are_unit_and_reproducible() {
        let pts = sample_sphere(1, SampleScheme::Fibonacci, 0);
        assert_abs_diff_eq!(pts[0].norm(), 1.0, epsilon = 1e-12);
        let a = sample_sphere(100, SampleScheme::Fibonacci, 0);
        let b = sample_sphere(100, SampleScheme::Fibonacci, 42);
        assert_eq!(a, b);
        for p in &a {
            assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_random_mean_is_small() {
        let pts = sample_sphere(1000, SampleScheme::UniformRandom, 5);
        let mut mean = [0.0; 3];
        for p in &pts {
            mean[0] += p.x;
            mean[1] += p.y;
            mean[2] += p.z;
        }
        let n = pts.len() as f64;
        let norm = (mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]).sqrt() / n;
        assert!(norm < 0.1, "mean norm {norm}");
    }

    #[test]
    fn fibonacci_lattice_spacing_quality() {
        let n = 2562;
        let pts = sample_sphere(n, SampleScheme::Fibonacci, 0);
        // Brute-force min pairwise angle vs the uniform expectation
        // sqrt(4 pi / n) for the per-point cap area.
        let mut min_angle = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let c = pts[i].dot(&pts[j]).clamp(-1.0, 1.0);
                min_angle = min_angle.min(c.acos());
            }
        }
        let expected = (4.0 * std::f64::consts::PI / n as f64).sqrt();
        assert!(
            min_angle > 0.5 * expected,
            "min angle {min_angle:.4} vs expected spacing {expected:.4}"
        );
    }

    #[test]
    fn shrink_edges() {
        let v = BlochVector::new(0.0, 0.0, 1.0);
        let origin = shrink_to_radius(&v, 0.0).unwrap();
        assert_eq!(origin.norm(), 0.0);
        assert_eq!(shrink_to_radius(&v, 1.0).unwrap(), v);
        assert!(shrink_to_radius(&v, 1.5).is_err());
        let shrunk = shrink_to_radius(&v, 0.999).unwrap();
        let rho = bloch_to_density(&shrunk, &tol()).unwrap();
        let e = qdm::hermitian_eig(&rho).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 0.9995, epsilon = 1e-12);
        assert_abs_diff_eq!(e.eigenvalues[1], 0.0005, epsilon = 1e-12);
    }
}
