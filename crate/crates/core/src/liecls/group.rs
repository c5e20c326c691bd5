//! `SE(2)` and `SE(3)` acting on their own embedded coordinates.

use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geomcore::{spaces, Space};

use super::algebra::LieAlgebra;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Group {
    SE2,
    SE3,
}

/// Rotation by `angle` about the unit vector `axis`.
pub fn rotation(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let k = axis.normalize();
    let kx = k.cross_matrix();
    Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
}

/// `(a, R)` from the `R^12` coordinates.
pub fn se3_parts(g: &[f64]) -> (Vector3<f64>, Matrix3<f64>) {
    (Vector3::new(g[0], g[1], g[2]), Matrix3::from_fn(|i, j| g[3 + 3 * i + j]))
}

pub fn se3_coords(a: &Vector3<f64>, r: &Matrix3<f64>) -> Vec<f64> {
    let mut out = vec![a[0], a[1], a[2]];
    for i in 0..3 {
        for j in 0..3 {
            out.push(r[(i, j)]);
        }
    }
    out
}

impl Group {
    pub fn space(self) -> Arc<Space> {
        Arc::new(match self {
            Group::SE2 => spaces::se2("SE2"),
            Group::SE3 => spaces::se3("SE3"),
        })
    }

    pub fn algebra(self) -> LieAlgebra {
        match self {
            Group::SE2 => LieAlgebra::se2(),
            Group::SE3 => LieAlgebra::se3(),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Group::SE2 => 3,
            Group::SE3 => 6,
        }
    }

    pub fn identity(self) -> Vec<f64> {
        match self {
            Group::SE2 => vec![0.0, 0.0, 1.0, 0.0],
            Group::SE3 => se3_coords(&Vector3::zeros(), &Matrix3::identity()),
        }
    }

    pub fn mul(self, g: &[f64], h: &[f64]) -> Vec<f64> {
        match self {
            Group::SE2 => {
                let (c, s) = (g[2], g[3]);
                vec![
                    g[0] + c * h[0] - s * h[1],
                    g[1] + s * h[0] + c * h[1],
                    c * h[2] - s * h[3],
                    s * h[2] + c * h[3],
                ]
            }
            Group::SE3 => {
                let ((a, r), (b, q)) = (se3_parts(g), se3_parts(h));
                se3_coords(&(a + r * b), &(r * q))
            }
        }
    }

    pub fn inv(self, g: &[f64]) -> Vec<f64> {
        match self {
            Group::SE2 => {
                let (c, s) = (g[2], g[3]);
                vec![-(c * g[0] + s * g[1]), s * g[0] - c * g[1], c, -s]
            }
            Group::SE3 => {
                let (a, r) = se3_parts(g);
                let rt = r.transpose();
                se3_coords(&(-(rt * a)), &rt)
            }
        }
    }

    /// Random element, translation in `[-2, 2]` per axis.
    pub fn random<R: Rng>(self, rng: &mut R) -> Vec<f64> {
        match self {
            Group::SE2 => {
                let th: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), th.cos(), th.sin()]
            }
            Group::SE3 => {
                let a = Vector3::from_fn(|_, _| rng.gen_range(-2.0..2.0));
                let q = nalgebra::Quaternion::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                let r = nalgebra::UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner();
                se3_coords(&a, &r)
            }
        }
    }

    /// Columns: the embedded tangent vectors at `e` of the algebra basis.
    pub fn tangent_at_identity(self) -> DMatrix<f64> {
        match self {
            Group::SE2 => DMatrix::from_row_slice(4, 3, &[0., 1., 0., 0., 0., 1., 0., 0., 0., 1., 0., 0.]),
            Group::SE3 => {
                let mut t = DMatrix::zeros(12, 6);
                for i in 0..3 {
                    let w = Vector3::from_fn(|k, _| if k == i { 1.0 } else { 0.0 }).cross_matrix();
                    for r in 0..3 {
                        for c in 0..3 {
                            t[(3 + 3 * r + c, i)] = w[(r, c)];
                        }
                    }
                    t[(i, 3 + i)] = 1.0;
                }
                t
            }
        }
    }

    pub fn distance(self, g: &[f64], h: &[f64]) -> f64 {
        g.iter().zip(h).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::derive_seed;
    use rand::SeedableRng;

    #[test]
    fn group_axioms_on_samples() {
        for g in [Group::SE2, Group::SE3] {
            let sp = g.space();
            for t in 0..50 {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(7, t));
                let (x, y, z) = (g.random(&mut rng), g.random(&mut rng), g.random(&mut rng));
                assert!(sp.contains(&x, 1e-12));
                let lhs = g.mul(&g.mul(&x, &y), &z);
                let rhs = g.mul(&x, &g.mul(&y, &z));
                assert!(g.distance(&lhs, &rhs) < 1e-12);
                assert!(g.distance(&g.mul(&x, &g.inv(&x)), &g.identity()) < 1e-12);
                assert!(g.distance(&g.mul(&g.identity(), &x), &x) < 1e-15);
                assert!(sp.contains(&g.mul(&x, &y), 1e-12));
            }
        }
    }

    #[test]
    fn tangent_at_identity_spans_the_tangent_space() {
        for g in [Group::SE2, Group::SE3] {
            let t = g.tangent_at_identity();
            let j = g.space().residual_jacobian(&g.identity()).unwrap();
            assert!((&j * &t).norm() < 1e-14);
            assert_eq!(crate::geomcore::linalg::rank(&t), g.dim());
        }
    }

    #[test]
    fn rotation_is_orthogonal_and_fixes_axis() {
        let u = Vector3::new(1.0, 2.0, -0.5).normalize();
        let r = rotation(&u, 0.8);
        assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-14);
        assert!((r * u - u).norm() < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
    }
}
