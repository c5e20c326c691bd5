//! Structure constants and bracket-closed subspaces.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geomcore::derive_seed;
use crate::geomcore::linalg::{damped_step, orthonormal_columns, rank};

use super::LieError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraName {
    Se2,
    So3,
    Se3,
}

/// Lie algebra on a fixed basis, `[e_i, e_j] = sum_k c[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LieAlgebra {
    pub name: AlgebraName,
    pub dim: usize,
    pub basis_names: Vec<&'static str>,
    pub table: Vec<Vec<Vec<f64>>>,
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

impl LieAlgebra {
    fn empty(name: AlgebraName, basis_names: Vec<&'static str>) -> LieAlgebra {
        let n = basis_names.len();
        LieAlgebra { name, dim: n, basis_names, table: vec![vec![vec![0.0; n]; n]; n] }
    }

    fn set(&mut self, i: usize, j: usize, k: usize, c: f64) {
        self.table[i][j][k] = c;
        self.table[j][i][k] = -c;
    }

    /// Basis `A` (rotation), `X`, `Y` (translations):
    /// `[A, X] = Y`, `[A, Y] = -X`, `[X, Y] = 0`.
    pub fn se2() -> LieAlgebra {
        let mut g = LieAlgebra::empty(AlgebraName::Se2, vec!["A", "X", "Y"]);
        g.set(0, 1, 2, 1.0);
        g.set(0, 2, 1, -1.0);
        g
    }

    /// Basis `L1, L2, L3` of infinitesimal rotations about the axes.
    pub fn so3() -> LieAlgebra {
        let mut g = LieAlgebra::empty(AlgebraName::So3, vec!["L1", "L2", "L3"]);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if i < j {
                        g.set(i, j, k, levi_civita(i, j, k));
                    }
                }
            }
        }
        g
    }

    /// Basis `L1, L2, L3, P1, P2, P3`: rotations then translations, with
    /// `[L_i, P_j] = eps_ijk P_k` and commuting translations.
    pub fn se3() -> LieAlgebra {
        let mut g = LieAlgebra::empty(AlgebraName::Se3, vec!["L1", "L2", "L3", "P1", "P2", "P3"]);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let e = levi_civita(i, j, k);
                    if i < j {
                        g.set(i, j, k, e);
                    }
                    g.set(i, 3 + j, 3 + k, e);
                }
            }
        }
        g
    }

    pub fn bracket(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>, LieError> {
        for w in [u, v] {
            if w.len() != self.dim {
                return Err(LieError::DimMismatch { expected: self.dim, got: w.len() });
            }
        }
        let mut out = vec![0.0; self.dim];
        for (i, ui) in u.iter().enumerate().filter(|(_, x)| **x != 0.0) {
            for (j, vj) in v.iter().enumerate().filter(|(_, x)| **x != 0.0) {
                for (k, o) in out.iter_mut().enumerate() {
                    *o += ui * vj * self.table[i][j][k];
                }
            }
        }
        Ok(out)
    }

    pub fn unit(&self, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dim];
        e[i] = 1.0;
        e
    }

    fn basis_bracket(&self, i: usize, j: usize) -> Vec<f64> {
        self.table[i][j].clone()
    }

    /// Largest `|[e_i, e_j] + [e_j, e_i]|` entry.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    worst = worst.max((self.table[i][j][k] + self.table[j][i][k]).abs());
                }
            }
        }
        worst
    }

    /// Largest entry of the Jacobiator over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let b = |u: &[f64], v: &[f64]| self.bracket(u, v).expect("basis vectors");
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    let (x, y, z) = (self.unit(i), self.unit(j), self.unit(k));
                    let t1 = b(&x, &self.basis_bracket(j, k));
                    let t2 = b(&y, &self.basis_bracket(k, i));
                    let t3 = b(&z, &self.basis_bracket(i, j));
                    for m in 0..self.dim {
                        worst = worst.max((t1[m] + t2[m] + t3[m]).abs());
                    }
                }
            }
        }
        worst
    }
}

fn as_matrix(dim: usize, basis: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(dim, basis.len(), |r, c| basis[c][r])
}

/// Largest distance from the span of `q` (orthonormal columns) of a
/// bracket of two of its columns.
fn closure_residual(g: &LieAlgebra, q: &DMatrix<f64>) -> f64 {
    closure_vector(g, q).iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn closure_vector(g: &LieAlgebra, q: &DMatrix<f64>) -> Vec<f64> {
    let k = q.ncols();
    let proj = q * q.transpose();
    let mut out = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let u: Vec<f64> = q.column(a).iter().copied().collect();
            let v: Vec<f64> = q.column(b).iter().copied().collect();
            let w = DVector::from_vec(g.bracket(&u, &v).expect("columns of the right length"));
            let off = &w - &proj * &w;
            out.extend(off.iter().copied());
        }
    }
    out
}

/// Is the span of `basis` closed under the bracket, to `tol`?
pub fn is_subalgebra(g: &LieAlgebra, basis: &[Vec<f64>], tol: f64) -> Result<bool, LieError> {
    if basis.iter().any(|b| b.len() != g.dim) {
        return Err(LieError::DimMismatch { expected: g.dim, got: basis.iter().map(|b| b.len()).find(|&l| l != g.dim).unwrap_or(0) });
    }
    if basis.is_empty() {
        return Ok(true);
    }
    let m = as_matrix(g.dim, basis);
    if rank(&m) < basis.len() {
        return Err(LieError::DegenerateBasis);
    }
    Ok(closure_residual(g, &orthonormal_columns(&m)) <= tol)
}

/// A bracket-closed subspace, by orthonormal basis and projector.
#[derive(Clone, Debug, Serialize)]
pub struct Subalgebra {
    pub basis: Vec<Vec<f64>>,
    #[serde(skip)]
    projector: DMatrix<f64>,
}

impl Subalgebra {
    fn new(q: &DMatrix<f64>) -> Subalgebra {
        let basis = (0..q.ncols()).map(|c| q.column(c).iter().copied().collect()).collect();
        Subalgebra { basis, projector: q * q.transpose() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Same span as the span of `other` (orthonormal or not).
    pub fn same_span(&self, other: &[Vec<f64>]) -> bool {
        let n = self.projector.nrows();
        let q = orthonormal_columns(&as_matrix(n, other));
        q.ncols() == self.dim() && (&self.projector - &q * q.transpose()).norm() < 1e-6
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubalgebraSearch {
    pub algebra: AlgebraName,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub found: Vec<Subalgebra>,
}

/// Look for `k`-dimensional subalgebras: every coordinate `k`-plane, then
/// `trials` random `k`-planes, each pushed towards bracket closure by
/// damped Gauss-Newton on its basis. A plane counts only if it passes
/// [`is_subalgebra`] at `1e-10`; results are deduplicated by span.
/// An empty result is evidence, not proof.
pub fn search_subalgebras(g: &LieAlgebra, k: usize, trials: usize, seed: u64) -> SubalgebraSearch {
    let n = g.dim;
    let mut found: Vec<Subalgebra> = Vec::new();
    let consider = |q: DMatrix<f64>, found: &mut Vec<Subalgebra>| {
        let basis: Vec<Vec<f64>> = (0..q.ncols()).map(|c| q.column(c).iter().copied().collect()).collect();
        if is_subalgebra(g, &basis, 1e-10).unwrap_or(false) && !found.iter().any(|s| s.same_span(&basis)) {
            found.push(Subalgebra::new(&q));
        }
    };
    if k == 0 || k >= n {
        return SubalgebraSearch { algebra: g.name, k, trials, seed, found };
    }
    for subset in subsets(n, k) {
        let basis: Vec<Vec<f64>> = subset.iter().map(|&i| g.unit(i)).collect();
        consider(orthonormal_columns(&as_matrix(n, &basis)), &mut found);
    }
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
        let m0 = DMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
        if let Some(q) = refine_to_closure(g, m0) {
            consider(q, &mut found);
        }
    }
    SubalgebraSearch { algebra: g.name, k, trials, seed, found }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for rest in subsets(n, k - 1) {
            if rest.first().is_none_or(|&r| r > first) {
                let mut s = vec![first];
                s.extend(rest);
                out.push(s);
            }
        }
    }
    out
}

/// Gram-Schmidt; `None` if a column is (nearly) in the span of the
/// previous ones.
fn gram_schmidt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut q = m.clone();
    for c in 0..q.ncols() {
        for p in 0..c {
            let d = q.column(p).dot(&q.column(c));
            let col = q.column(p).clone_owned();
            q.column_mut(c).axpy(-d, &col, 1.0);
        }
        let n = q.column(c).norm();
        if n < 1e-8 {
            return None;
        }
        q.column_mut(c).unscale_mut(n);
    }
    Some(q)
}

/// Residual of a basis matrix: closure defects of its orthonormalisation
/// plus the gauge `M^T M - I`.
fn refine_residual(g: &LieAlgebra, m: &DMatrix<f64>) -> Option<DVector<f64>> {
    let k = m.ncols();
    let q = gram_schmidt(m)?;
    let mut r = closure_vector(g, &q);
    let gram = m.transpose() * m;
    for a in 0..k {
        for b in a..k {
            r.push(gram[(a, b)] - if a == b { 1.0 } else { 0.0 });
        }
    }
    Some(DVector::from_vec(r))
}

fn refine_to_closure(g: &LieAlgebra, mut m: DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (n, k) = (m.nrows(), m.ncols());
    let h = 1e-7;
    let mut lambda = 1e-3;
    let mut r = refine_residual(g, &m)?;
    let mut stalled = 0;
    // The defect can vanish to second order at a subalgebra, so iterate
    // until the basis stops moving rather than until the defect is small.
    for _ in 0..120 {
        if closure_residual(g, &gram_schmidt(&m)?) < 1e-24 {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), n * k);
        for p in 0..n * k {
            let mut mp = m.clone();
            mp[(p % n, p / n)] += h;
            let mut mm = m.clone();
            mm[(p % n, p / n)] -= h;
            let (rp, rm) = (refine_residual(g, &mp)?, refine_residual(g, &mm)?);
            jac.set_column(p, &((rp - rm) / (2.0 * h)));
        }
        let step = damped_step(&jac, &r, lambda);
        if step.norm() < 1e-14 {
            break;
        }
        let cand = &m + DMatrix::from_column_slice(n, k, step.as_slice());
        match refine_residual(g, &cand) {
            Some(rc) if rc.norm() < r.norm() => {
                // A local minimum with a nonzero defect is not a subalgebra.
                stalled = if rc.norm() > 0.999 * r.norm() { stalled + 1 } else { 0 };
                m = cand;
                r = rc;
                lambda = (lambda * 0.3).max(1e-12);
                if stalled >= 5 {
                    break;
                }
            }
            _ => {
                lambda *= 10.0;
                if lambda > 1e6 || r.norm() < 1e-14 {
                    break;
                }
            }
        }
    }
    let q = gram_schmidt(&m)?;
    (closure_residual(g, &q) < 1e-10).then_some(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tables_are_lie_algebras() {
        for g in [LieAlgebra::se2(), LieAlgebra::so3(), LieAlgebra::se3()] {
            assert!(g.antisymmetry_residual() < 1e-12);
            assert!(g.jacobi_residual() < 1e-12, "{:?}", g.name);
        }
    }

    #[test]
    fn se2_relations() {
        let g = LieAlgebra::se2();
        let (a, x, y) = (g.unit(0), g.unit(1), g.unit(2));
        assert_eq!(g.bracket(&a, &x).unwrap(), y);
        assert_eq!(g.bracket(&a, &y).unwrap(), vec![0.0, -1.0, 0.0]);
        assert_eq!(g.bracket(&x, &y).unwrap(), vec![0.0; 3]);
        let (al, be) = (0.7, -1.3);
        let v = vec![0.0, al, be];
        assert_eq!(g.bracket(&a, &v).unwrap(), vec![0.0, -be, al]);
        assert!(matches!(g.bracket(&a, &[1.0]), Err(LieError::DimMismatch { .. })));
    }

    #[test]
    fn subalgebra_membership() {
        let g = LieAlgebra::se2();
        assert!(is_subalgebra(&g, &[g.unit(1), g.unit(2)], 1e-12).unwrap());
        assert!(!is_subalgebra(&g, &[g.unit(0), g.unit(1)], 1e-12).unwrap());
        assert!(is_subalgebra(&g, &[g.unit(0), g.unit(1), g.unit(2)], 1e-12).unwrap());
        assert!(matches!(is_subalgebra(&g, &[g.unit(1), g.unit(1)], 1e-12), Err(LieError::DegenerateBasis)));
    }

    #[test]
    fn se2_two_dim_search_finds_only_translations() {
        let g = LieAlgebra::se2();
        let s = search_subalgebras(&g, 2, 300, 4);
        assert_eq!(s.found.len(), 1, "{:?}", s.found.iter().map(|f| &f.basis).collect::<Vec<_>>());
        assert!(s.found[0].same_span(&[g.unit(1), g.unit(2)]));
    }

    #[test]
    fn se2_lines_include_rotation_and_translations() {
        let g = LieAlgebra::se2();
        let s = search_subalgebras(&g, 1, 5, 0);
        for i in 0..3 {
            assert!(s.found.iter().any(|f| f.same_span(&[g.unit(i)])));
        }
        for f in &s.found {
            assert!(is_subalgebra(&g, &f.basis, 1e-10).unwrap());
        }
    }

    #[test]
    fn so3_has_no_planes() {
        assert!(search_subalgebras(&LieAlgebra::so3(), 2, 300, 1).found.is_empty());
    }

    #[test]
    fn se3_cylinder_directions_commute() {
        let g = LieAlgebra::se3();
        let s = search_subalgebras(&g, 2, 0, 0);
        // Coordinate planes: rotation and translation about one axis, or
        // two translations.
        assert!(s.found.iter().any(|f| f.same_span(&[g.unit(2), g.unit(5)])));
        assert!(s.found.iter().any(|f| f.same_span(&[g.unit(3), g.unit(4)])));
        assert!(!s.found.iter().any(|f| f.same_span(&[g.unit(0), g.unit(1)])));
    }

    proptest! {
        #[test]
        fn bracket_is_bilinear_and_antisymmetric(
            u in proptest::collection::vec(-3.0f64..3.0, 6),
            v in proptest::collection::vec(-3.0f64..3.0, 6),
            w in proptest::collection::vec(-3.0f64..3.0, 6),
            a in -2.0f64..2.0,
        ) {
            let g = LieAlgebra::se3();
            let uv = g.bracket(&u, &v).unwrap();
            let vu = g.bracket(&v, &u).unwrap();
            for k in 0..6 {
                prop_assert!((uv[k] + vu[k]).abs() < 1e-12);
            }
            let lin: Vec<f64> = u.iter().zip(&w).map(|(x, y)| a * x + y).collect();
            let lhs = g.bracket(&lin, &v).unwrap();
            let uw = g.bracket(&w, &v).unwrap();
            for k in 0..6 {
                prop_assert!((lhs[k] - (a * uv[k] + uw[k])).abs() < 1e-9);
            }
            prop_assert!(g.bracket(&u, &u).unwrap().iter().all(|x| x.abs() < 1e-12));
        }
    }
}
