//! Subspaces of ℝ^d: orthonormal bases, orthogonal projection, and the
//! distance on the Grassmannian given by the Hausdorff distance between
//! closed unit balls.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tol;

/// A linear subspace of ℝ^d stored as an explicit orthonormal basis.
///
/// `k = 0` (empty basis) is the zero subspace. Bases are re-orthonormalized
/// at construction; all operations afterwards treat them as exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
}

/// Which computation produced a Grassmannian distance value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistancePath {
    /// Principal angles of the two bases (both subspaces of equal dimension).
    PrincipalAngles,
    /// Net sampling of both unit spheres with analytic point-to-ball
    /// distances (unequal dimensions).
    NetSampling,
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. Vectors whose
/// residual is shorter than `drop_tol` are discarded.
pub fn orthonormalize(dim: usize, vectors: &[Vec<f64>], drop_tol: f64) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = linalg::dot(&w, b);
                linalg::axpy(&mut w, -c, b);
            }
        }
        let n = linalg::norm(&w);
        if n > drop_tol {
            basis.push(linalg::scale(1.0 / n, &w));
        }
    }
    Ok(basis)
}

impl Subspace {
    /// Subspace spanned by `vectors` (need not be orthonormal or independent).
    pub fn span(ambient_dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidField("ambient dimension must be positive".into()));
        }
        let basis = orthonormalize(ambient_dim, vectors, tol::GRAM_SCHMIDT_DROP)?;
        Ok(Self { ambient_dim, basis })
    }

    /// The zero subspace of ℝ^d.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    /// The full space ℝ^d.
    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| linalg::basis_vector(ambient_dim, i))
            .collect();
        Self { ambient_dim, basis }
    }

    /// The line spanned by `direction`.
    pub fn line(direction: &[f64]) -> Result<Self> {
        Self::span(direction.len(), &[direction.to_vec()])
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension k of the subspace.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Orthogonal projection of `v` onto the subspace: Σ_i (v·b_i) b_i.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.ambient_dim];
        for b in &self.basis {
            let c = linalg::dot(v, b);
            linalg::axpy(&mut out, c, b);
        }
        Ok(out)
    }

    /// Orthonormal basis of V + W.
    pub fn span_union(&self, other: &Subspace) -> Result<Subspace> {
        if other.ambient_dim != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: other.ambient_dim,
            });
        }
        let mut vectors = self.basis.clone();
        vectors.extend(other.basis.iter().cloned());
        let basis = orthonormalize(self.ambient_dim, &vectors, tol::GRAM_SCHMIDT_DROP)?;
        Ok(Subspace {
            ambient_dim: self.ambient_dim,
            basis,
        })
    }

    /// Deterministic net on the unit sphere of the subspace, with roughly
    /// `steps` lattice points per basis coefficient.
    pub fn sphere_net(&self, steps: usize) -> Vec<Vec<f64>> {
        let k = self.dim();
        if k == 0 {
            return Vec::new();
        }
        if k == 1 {
            let b = &self.basis[0];
            return vec![b.clone(), linalg::scale(-1.0, b)];
        }
        let mut out = Vec::new();
        let mut coeffs = vec![0usize; k];
        // odd lattice size, so the coefficients include exactly -1, 0, 1 and
        // the net hits the coordinate directions of the basis
        let m = steps.max(3) | 1;
        loop {
            let c: Vec<f64> = coeffs
                .iter()
                .map(|&i| -1.0 + 2.0 * i as f64 / (m - 1) as f64)
                .collect();
            let n = linalg::norm(&c);
            if n > 0.3 {
                let mut v = vec![0.0; self.ambient_dim];
                for (ci, b) in c.iter().zip(&self.basis) {
                    linalg::axpy(&mut v, ci / n, b);
                }
                out.push(v);
            }
            // odometer over the coefficient lattice
            let mut idx = 0;
            loop {
                coeffs[idx] += 1;
                if coeffs[idx] < m {
                    break;
                }
                coeffs[idx] = 0;
                idx += 1;
                if idx == k {
                    return out;
                }
            }
        }
    }
}

/// Euclidean distance from a point to the closed unit ball of a subspace.
///
/// The nearest ball point is the orthogonal projection, radially clamped to
/// the unit sphere when it falls outside.
pub fn distance_to_unit_ball(subspace: &Subspace, x: &[f64]) -> Result<f64> {
    let p = subspace.project(x)?;
    let np = linalg::norm(&p);
    let tangential = linalg::dist(x, &p);
    if np <= 1.0 {
        Ok(tangential)
    } else {
        let radial = np - 1.0;
        Ok((tangential * tangential + radial * radial).sqrt())
    }
}

/// Hausdorff distance between the closed unit balls of two subspaces,
/// together with the computation path that produced it.
pub fn grassmann_distance_with_path(v: &Subspace, w: &Subspace) -> Result<(f64, DistancePath)> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: v.ambient_dim(),
            got: w.ambient_dim(),
        });
    }
    let (kv, kw) = (v.dim(), w.dim());
    if kv == 0 && kw == 0 {
        return Ok((0.0, DistancePath::PrincipalAngles));
    }
    if kv == 0 || kw == 0 {
        // The zero ball is {0}; the farthest point of the other ball from
        // the origin is at distance 1.
        return Ok((1.0, DistancePath::PrincipalAngles));
    }
    if kv == kw {
        // sin of the largest principal angle: cos θ_i are the singular
        // values of B_v^T B_w.
        let m = basis_gram(v, w);
        let svd = m.svd(false, false);
        let sigma_min = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
            .clamp(0.0, 1.0);
        Ok(((1.0 - sigma_min * sigma_min).sqrt(), DistancePath::PrincipalAngles))
    } else {
        let steps = 40;
        let mut sup = 0.0f64;
        for x in v.sphere_net(steps) {
            sup = sup.max(distance_to_unit_ball(w, &x)?);
        }
        for y in w.sphere_net(steps) {
            sup = sup.max(distance_to_unit_ball(v, &y)?);
        }
        Ok((sup, DistancePath::NetSampling))
    }
}

/// Hausdorff distance between the closed unit balls of two subspaces.
pub fn grassmann_distance(v: &Subspace, w: &Subspace) -> Result<f64> {
    grassmann_distance_with_path(v, w).map(|(d, _)| d)
}

fn basis_gram(v: &Subspace, w: &Subspace) -> DMatrix<f64> {
    let (kv, kw) = (v.dim(), w.dim());
    DMatrix::from_fn(kv, kw, |i, j| linalg::dot(&v.basis()[i], &w.basis()[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    fn line2(x: f64, y: f64) -> Subspace {
        Subspace::line(&[x, y]).unwrap()
    }

    #[test]
    fn project_coordinate_line() {
        let v = line2(1.0, 0.0);
        assert_eq!(v.project(&[3.0, 4.0]).unwrap(), vec![3.0, 0.0]);
    }

    #[test]
    fn project_zero_subspace() {
        let v = Subspace::zero(2);
        assert_eq!(v.project(&[3.0, 4.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn project_diagonal_line() {
        let v = line2(1.0, 1.0);
        let p = v.project(&[1.0, 0.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn projection_residual_is_orthogonal_to_basis() {
        let v = Subspace::span(3, &[vec![1.0, 2.0, 0.5], vec![0.0, 1.0, -1.0]]).unwrap();
        let x = [0.3, -1.2, 2.5];
        let p = v.project(&x).unwrap();
        let r = crate::linalg::sub(&x, &p);
        for b in v.basis() {
            assert!(crate::linalg::dot(&r, b).abs() < tol::ORTHONORMALITY);
        }
    }

    #[test]
    fn project_dimension_mismatch_rejected() {
        let v = line2(1.0, 0.0);
        assert!(v.project(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn distance_identical_lines_is_zero() {
        let v = line2(1.0, 0.0);
        let (d, path) = grassmann_distance_with_path(&v, &v).unwrap();
        assert_eq!(path, DistancePath::PrincipalAngles);
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn distance_orthogonal_lines_is_one() {
        let v = line2(1.0, 0.0);
        let w = line2(0.0, 1.0);
        let d = grassmann_distance(&v, &w).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        assert!((grassmann_distance(&w, &v).unwrap() - d).abs() < 1e-15);
    }

    /// Independent oracle: discrete Hausdorff distance between fine nets on
    /// both unit balls (resolution ~1e-3 along the line; analytic nearest
    /// points are avoided on the oracle side by brute-force min over nets).
    fn net_hausdorff_oracle(v: &Subspace, w: &Subspace) -> f64 {
        let ball_net = |s: &Subspace| -> Vec<Vec<f64>> {
            let mut pts = vec![vec![0.0; s.ambient_dim()]];
            for dir in s.sphere_net(120) {
                let mut r = 1e-3;
                while r <= 1.0 {
                    pts.push(crate::linalg::scale(r, &dir));
                    r += 1e-3 * 40.0; // radial stride; sup is attained at r = 1
                }
                pts.push(dir.clone());
            }
            pts
        };
        let a = ball_net(v);
        let b = ball_net(w);
        let one_sided = |from: &[Vec<f64>], to: &[Vec<f64>]| {
            from.iter()
                .map(|x| {
                    to.iter()
                        .map(|y| crate::linalg::dist(x, y))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0f64, f64::max)
        };
        one_sided(&a, &b).max(one_sided(&b, &a))
    }

    #[test]
    fn distance_line_vs_plane_matches_net_oracle() {
        let v = line2(1.0, 0.0);
        let w = Subspace::full(2);
        let (d, path) = grassmann_distance_with_path(&v, &w).unwrap();
        assert_eq!(path, DistancePath::NetSampling);
        let oracle = net_hausdorff_oracle(&v, &w);
        assert!((d - oracle).abs() < 0.05, "d = {d}, oracle = {oracle}");
        assert!((d - 1.0).abs() < 1e-9);
    }

    #[test]
    fn span_union_idempotent_orthogonal_and_rank() {
        let e1 = line2(1.0, 0.0);
        let e2 = line2(0.0, 1.0);
        let diag = line2(1.0, 1.0);
        assert_eq!(e1.span_union(&e1).unwrap().dim(), 1);
        assert_eq!(e1.span_union(&e2).unwrap().dim(), 2);
        assert_eq!(e1.span_union(&diag).unwrap().dim(), 2);
    }

    #[test]
    fn basis_is_orthonormal_after_construction() {
        let s = Subspace::span(
            3,
            &[vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 1e-14], vec![0.0, 3.0, 4.0]],
        )
        .unwrap();
        assert_eq!(s.dim(), 2); // near-duplicate dropped
        for (i, b) in s.basis().iter().enumerate() {
            assert!((norm(b) - 1.0).abs() < tol::ORTHONORMALITY);
            for c in &s.basis()[i + 1..] {
                assert!(crate::linalg::dot(b, c).abs() < tol::ORTHONORMALITY);
            }
        }
    }
}
