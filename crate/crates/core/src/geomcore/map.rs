use std::sync::Arc;

use nalgebra::DMatrix;

use super::expr::{eval_all, jacobian, Expr};
use super::space::Space;
use super::GeomError;

/// Image residual allowed when checking that a map lands in its target.
pub const WELL_TYPED_TOL: f64 = 1e-7;

/// A smooth map given by one expression per target ambient coordinate,
/// written over the source ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothMap {
    source: Arc<Space>,
    target: Arc<Space>,
    components: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(source: Arc<Space>, target: Arc<Space>, components: Vec<Expr>) -> Result<SmoothMap, GeomError> {
        if components.len() != target.ambient_dim() {
            return Err(GeomError::Arity { expected: target.ambient_dim(), got: components.len() });
        }
        let n = source.ambient_dim();
        if components.iter().filter_map(|c| c.max_var()).any(|v| v >= n) {
            return Err(GeomError::BadSpace("map component uses a coordinate outside its source".into()));
        }
        Ok(SmoothMap { source, target, components })
    }

    pub fn identity(space: Arc<Space>) -> SmoothMap {
        let components = (0..space.ambient_dim()).map(Expr::var).collect();
        SmoothMap { source: space.clone(), target: space, components }
    }

    /// Coordinate restriction onto `indices`, landing in `target`.
    pub fn coordinate_projection(
        source: Arc<Space>,
        target: Arc<Space>,
        indices: &[usize],
    ) -> Result<SmoothMap, GeomError> {
        SmoothMap::new(source, target, indices.iter().map(|&i| Expr::var(i)).collect())
    }

    /// The unique map to the one-point space.
    pub fn to_point(source: Arc<Space>) -> SmoothMap {
        SmoothMap { source, target: Arc::new(super::spaces::point()), components: vec![] }
    }

    pub fn source(&self) -> &Arc<Space> {
        &self.source
    }
    pub fn target(&self) -> &Arc<Space> {
        &self.target
    }
    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, GeomError> {
        if x.len() != self.source.ambient_dim() {
            return Err(GeomError::Arity { expected: self.source.ambient_dim(), got: x.len() });
        }
        Ok(eval_all(&self.components, x)?)
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, GeomError> {
        Ok(jacobian(&self.components, x)?)
    }

    /// `g . self`. Composition is substitution at the expression level.
    pub fn then(&self, g: &SmoothMap) -> Result<SmoothMap, GeomError> {
        if !self.target.same_manifold(&g.source) {
            return Err(GeomError::TargetMismatch);
        }
        let components = g.components.iter().map(|e| e.substitute(&self.components)).collect();
        Ok(SmoothMap { source: self.source.clone(), target: g.target.clone(), components })
    }

    /// Precompose with a map from another source (`self . f`).
    pub fn after(&self, f: &SmoothMap) -> Result<SmoothMap, GeomError> {
        f.then(self)
    }

    /// Same expressions, reinterpreted on a different but identically
    /// presented source.
    pub fn with_source(&self, source: Arc<Space>) -> Result<SmoothMap, GeomError> {
        if !source.same_manifold(&self.source) {
            return Err(GeomError::TargetMismatch);
        }
        Ok(SmoothMap { source, ..self.clone() })
    }

    pub fn with_target(&self, target: Arc<Space>) -> Result<SmoothMap, GeomError> {
        if !target.same_manifold(&self.target) {
            return Err(GeomError::TargetMismatch);
        }
        Ok(SmoothMap { target, ..self.clone() })
    }

    /// Check that images of sampled source points satisfy the target
    /// residuals.
    pub fn check_well_typed(&self, n: usize, seed: u64) -> Result<(), GeomError> {
        for x in self.source.sample_points(n, seed)? {
            self.check_image(&x)?;
        }
        Ok(())
    }

    pub fn check_image(&self, x: &[f64]) -> Result<(), GeomError> {
        let y = self.eval(x)?;
        let r = self.target.residual_norm(&y)?;
        if r > WELL_TYPED_TOL {
            return Err(GeomError::IllTyped { point: x.to_vec(), residual: r });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::spaces;

    #[test]
    fn composition_substitutes() {
        let r2 = Arc::new(spaces::r2("R2"));
        let swap = SmoothMap::new(r2.clone(), r2.clone(), vec![Expr::var(1), Expr::var(0)]).unwrap();
        let shift = SmoothMap::new(r2.clone(), r2.clone(), vec![Expr::var(0) + Expr::c(1.0), Expr::var(1)]).unwrap();
        let h = swap.then(&shift).unwrap();
        assert_eq!(h.eval(&[2.0, 5.0]).unwrap(), vec![6.0, 2.0]);
        let id = SmoothMap::identity(r2);
        assert_eq!(id.then(&swap).unwrap(), swap);
        assert_eq!(swap.then(&id).unwrap(), swap);
    }

    #[test]
    fn mismatched_composition_is_rejected() {
        let r2 = Arc::new(spaces::r2("R2"));
        let s1 = Arc::new(spaces::circle("S1"));
        let f = SmoothMap::identity(r2);
        let g = SmoothMap::identity(s1);
        assert_eq!(f.then(&g), Err(GeomError::TargetMismatch));
    }

    #[test]
    fn ill_typed_map_is_caught() {
        let r2 = Arc::new(spaces::r2("R2"));
        let s1 = Arc::new(spaces::circle("S1"));
        let f = SmoothMap::new(r2, s1, vec![Expr::var(0), Expr::var(1)]).unwrap();
        assert!(matches!(f.check_well_typed(4, 0), Err(GeomError::IllTyped { .. })));
    }
}
