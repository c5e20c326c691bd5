use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::Rng;

use super::expr::{eval_all, jacobian, Expr};
use super::linalg::rank_info;
use super::solve::{self, Solution, SolverConfig};
use super::GeomError;

/// A manifold presented as the zero set of residuals in `R^ambient`.
///
/// `dim` is the declared dimension. It equals `ambient - rank` of the
/// residual Jacobian at feasible points whenever the residual system is
/// regular; [`Space::verify_dim`] checks that on samples. Residual systems
/// may be redundant (fiber products typically are), so `dim` is not
/// necessarily `ambient - residuals.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct Space {
    name: String,
    coords: Vec<String>,
    residuals: Vec<Expr>,
    dim: usize,
    /// Coordinate blocks holding a row-major 3x3 matrix that must have
    /// positive determinant.
    rotation_blocks: Vec<[usize; 9]>,
}

impl Space {
    pub fn new(
        name: impl Into<String>,
        coords: Vec<String>,
        residuals: Vec<Expr>,
        dim: usize,
    ) -> Result<Space, GeomError> {
        let n = coords.len();
        if dim > n {
            return Err(GeomError::BadSpace(format!("dim {} exceeds ambient {}", dim, n)));
        }
        let unique: BTreeSet<&String> = coords.iter().collect();
        if unique.len() != n {
            return Err(GeomError::BadSpace("duplicate coordinate name".into()));
        }
        for r in &residuals {
            if let Some(v) = r.max_var() {
                if v >= n {
                    return Err(GeomError::BadSpace(format!("residual uses coordinate {} of {}", v, n)));
                }
            }
        }
        Ok(Space { name: name.into(), coords, residuals, dim, rotation_blocks: Vec::new() })
    }

    /// Space with no residuals: `R^n` with the given coordinate names.
    pub fn free(name: impl Into<String>, coords: &[&str]) -> Space {
        let coords: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let dim = coords.len();
        Space::new(name, coords, vec![], dim).expect("free space with distinct names")
    }

    pub fn with_rotation_blocks(mut self, blocks: Vec<[usize; 9]>) -> Result<Space, GeomError> {
        for b in &blocks {
            if b.iter().any(|&i| i >= self.coords.len()) {
                return Err(GeomError::BadSpace("rotation block out of range".into()));
            }
        }
        self.rotation_blocks = blocks;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn coords(&self) -> &[String] {
        &self.coords
    }
    pub fn residuals(&self) -> &[Expr] {
        &self.residuals
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }
    pub fn rotation_blocks(&self) -> &[[usize; 9]] {
        &self.rotation_blocks
    }

    /// Same embedded manifold, ignoring the space and coordinate names.
    pub fn same_manifold(&self, other: &Space) -> bool {
        self.coords.len() == other.coords.len()
            && self.dim == other.dim
            && self.residuals == other.residuals
            && self.rotation_blocks == other.rotation_blocks
    }

    pub fn renamed(&self, name: impl Into<String>) -> Space {
        Space { name: name.into(), ..self.clone() }
    }

    /// Prefix every coordinate name that is not yet qualified (has no `.`).
    pub fn qualified(&self, prefix: &str) -> Space {
        let coords = self
            .coords
            .iter()
            .map(|c| if c.contains('.') { c.clone() } else { format!("{}.{}", prefix, c) })
            .collect();
        Space { coords, ..self.clone() }
    }

    pub fn with_coords(&self, coords: Vec<String>) -> Result<Space, GeomError> {
        if coords.len() != self.coords.len() {
            return Err(GeomError::BadSpace("coordinate count changed".into()));
        }
        let s = Space::new(self.name.clone(), coords, self.residuals.clone(), self.dim)?;
        s.with_rotation_blocks(self.rotation_blocks.clone())
    }

    /// Subspace cut out by extra residuals, with a declared dimension.
    pub fn with_extra_residuals(
        &self,
        name: impl Into<String>,
        extra: Vec<Expr>,
        dim: usize,
    ) -> Result<Space, GeomError> {
        let mut residuals = self.residuals.clone();
        residuals.extend(extra);
        let s = Space::new(name, self.coords.clone(), residuals, dim)?;
        s.with_rotation_blocks(self.rotation_blocks.clone())
    }

    pub fn residual_values(&self, x: &[f64]) -> Result<Vec<f64>, GeomError> {
        self.check_arity(x)?;
        Ok(eval_all(&self.residuals, x)?)
    }

    pub fn residual_norm(&self, x: &[f64]) -> Result<f64, GeomError> {
        Ok(self.residual_values(x)?.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    pub fn residual_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, GeomError> {
        self.check_arity(x)?;
        Ok(jacobian(&self.residuals, x)?)
    }

    fn check_arity(&self, x: &[f64]) -> Result<(), GeomError> {
        if x.len() != self.coords.len() {
            return Err(GeomError::Arity { expected: self.coords.len(), got: x.len() });
        }
        Ok(())
    }

    pub fn orientation_ok(&self, x: &[f64]) -> bool {
        self.rotation_blocks.iter().all(|b| {
            let m = nalgebra::Matrix3::from_fn(|i, j| x[b[3 * i + j]]);
            m.determinant() > 0.0
        })
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.coords.len()
            && self.residual_norm(x).map(|r| r < tol).unwrap_or(false)
            && self.orientation_ok(x)
    }

    /// Orthonormal basis (columns) of the kernel of the residual Jacobian.
    pub fn tangent_basis(&self, x: &[f64]) -> Result<DMatrix<f64>, GeomError> {
        let n = self.ambient_dim();
        if self.residuals.is_empty() {
            return Ok(DMatrix::identity(n, n));
        }
        Ok(rank_info(&self.residual_jacobian(x)?).null_space)
    }

    /// `ambient - numerical rank` of the residual Jacobian at `x`.
    pub fn local_dim(&self, x: &[f64]) -> Result<usize, GeomError> {
        if self.residuals.is_empty() {
            return Ok(self.ambient_dim());
        }
        Ok(self.ambient_dim() - rank_info(&self.residual_jacobian(x)?).rank)
    }

    /// Uniform box initialisation; rotation blocks start at a random
    /// rotation so orientation is preserved by the descent.
    pub fn random_ambient<R: Rng>(&self, rng: &mut R, scale: f64) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.ambient_dim()).map(|_| rng.gen_range(-scale..scale)).collect();
        for b in &self.rotation_blocks {
            let q = nalgebra::UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ));
            let m = q.to_rotation_matrix();
            for i in 0..3 {
                for j in 0..3 {
                    x[b[3 * i + j]] = m[(i, j)];
                }
            }
        }
        x
    }

    pub fn sample_with<R: Rng>(&self, rng: &mut R, cfg: &SolverConfig) -> Result<Solution, GeomError> {
        solve::solve(self, rng, cfg, None)
    }

    pub fn sample_point(&self, seed: u64) -> Result<Vec<f64>, GeomError> {
        let mut rng = solve::rng(seed);
        Ok(self.sample_with(&mut rng, &SolverConfig::default())?.point)
    }

    pub fn sample_points(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>, GeomError> {
        let mut rng = solve::rng(seed);
        let cfg = SolverConfig::default();
        (0..n).map(|_| Ok(self.sample_with(&mut rng, &cfg)?.point)).collect()
    }

    /// Check the declared dimension against the residual rank on samples.
    pub fn verify_dim(&self, n: usize, seed: u64) -> Result<(), GeomError> {
        for x in self.sample_points(n, seed)? {
            let found = self.local_dim(&x)?;
            if found != self.dim {
                return Err(GeomError::DimensionMismatch { expected: self.dim, found, point: x });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::spaces;

    #[test]
    fn circle_dim_is_verified() {
        let s = spaces::circle("S1");
        s.verify_dim(10, 1).unwrap();
        let x = s.sample_point(3).unwrap();
        assert!((x[0] * x[0] + x[1] * x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn wrong_declared_dim_is_caught() {
        let s = spaces::circle("S1");
        let bad = Space::new("bad", s.coords().to_vec(), s.residuals().to_vec(), 0).unwrap();
        assert!(matches!(bad.verify_dim(3, 0), Err(GeomError::DimensionMismatch { found: 1, .. })));
    }

    #[test]
    fn qualification_skips_qualified_names() {
        let s = Space::free("A", &["x", "b.y"]).qualified("a");
        assert_eq!(s.coords(), &["a.x".to_string(), "b.y".to_string()]);
    }

    #[test]
    fn se3_samples_are_proper_rotations() {
        let s = spaces::se3("SE3");
        for x in s.sample_points(5, 9).unwrap() {
            assert!(s.orientation_ok(&x));
            assert_eq!(s.local_dim(&x).unwrap(), 6);
        }
    }
}
