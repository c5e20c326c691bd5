//! Relative-motion sets and whether they come from a pair of equivariant
//! projections.

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geomcore::derive_seed;
use crate::geomcore::linalg::rank;

use super::algebra::{is_subalgebra, search_subalgebras, LieAlgebra};
use super::group::{rotation, se3_coords, se3_parts, Group};
use super::LieError;

/// Trials used by [`realizable_as_pair`] when a subalgebra search decides.
pub const REALIZE_TRIALS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MotionSet {
    /// Connected subgroup generated by these algebra directions.
    Subgroup { basis: Vec<Vec<f64>> },
    /// `{ (t u_s, R_{u_h}(theta)) }`: slide along `u_s`, turn about `u_h`.
    /// In `SE(2)` the hinge axis is the plane normal.
    SlidingHinge { u_h: [f64; 3], u_s: [f64; 3] },
    /// `{ R_{u1}(alpha) R_{u2}(beta) }` for orthogonal `u1`, `u2`.
    Torus2 { u1: [f64; 3], u2: [f64; 3] },
    /// `{ (t v, R_v(theta)) }`.
    Cylindrical { axis: [f64; 3] },
}

fn vec3(u: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(u[0], u[1], u[2])
}

fn unit(name: &str, u: &[f64; 3]) -> Result<Vector3<f64>, LieError> {
    let v = vec3(u);
    let n = v.norm();
    if !n.is_finite() || n < 1e-12 {
        return Err(LieError::BadMotionSet(format!("{} must be nonzero", name)));
    }
    Ok(v / n)
}

/// An `SE(2)` element read as a planar `SE(3)` element.
fn lift(group: Group, g: &[f64]) -> (Vector3<f64>, Matrix3<f64>) {
    match group {
        Group::SE3 => se3_parts(g),
        Group::SE2 => {
            let (c, s) = (g[2], g[3]);
            (Vector3::new(g[0], g[1], 0.0), Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
        }
    }
}

fn lower(group: Group, a: &Vector3<f64>, r: &Matrix3<f64>) -> Vec<f64> {
    match group {
        Group::SE3 => se3_coords(a, r),
        Group::SE2 => vec![a[0], a[1], r[(0, 0)], r[(1, 0)]],
    }
}

impl MotionSet {
    fn check_fits(&self, group: Group) -> Result<(), LieError> {
        match (self, group) {
            (MotionSet::Subgroup { basis }, g) => {
                if basis.iter().any(|b| b.len() != g.dim()) {
                    return Err(LieError::DimMismatch { expected: g.dim(), got: basis.iter().map(|b| b.len()).find(|&l| l != g.dim()).unwrap_or(0) });
                }
            }
            (MotionSet::SlidingHinge { u_h, u_s }, g) => {
                let (h, s) = (unit("u_h", u_h)?, unit("u_s", u_s)?);
                if g == Group::SE2 && ((h - Vector3::z()).norm() > 1e-12 || s[2].abs() > 1e-12) {
                    return Err(LieError::BadMotionSet("planar sliding hinge needs u_h = e3 and u_s in the plane".into()));
                }
            }
            (MotionSet::Torus2 { u1, u2 }, Group::SE3) => {
                if unit("u1", u1)?.dot(&unit("u2", u2)?).abs() > 1e-12 {
                    return Err(LieError::BadMotionSet("torus axes must be orthogonal".into()));
                }
            }
            (MotionSet::Cylindrical { axis }, Group::SE3) => {
                unit("axis", axis)?;
            }
            (m, g) => return Err(LieError::BadMotionSet(format!("{:?} does not live in {:?}", m, g))),
        }
        Ok(())
    }

    /// Membership of a group element, to `tol`. `None` for
    /// [`MotionSet::Subgroup`], which is given infinitesimally.
    pub fn contains(&self, group: Group, g: &[f64], tol: f64) -> Option<bool> {
        let (a, r) = lift(group, g);
        Some(match self {
            MotionSet::Subgroup { .. } => return None,
            MotionSet::SlidingHinge { u_h, u_s } => {
                let (h, s) = (vec3(u_h).normalize(), vec3(u_s).normalize());
                (r * h - h).norm() <= tol && a.cross(&s).norm() <= tol
            }
            MotionSet::Torus2 { u1, u2 } => {
                let (p, q) = (vec3(u1).normalize(), vec3(u2).normalize());
                a.norm() <= tol && p.dot(&(r * q)).abs() <= tol
            }
            MotionSet::Cylindrical { axis } => {
                let v = vec3(axis).normalize();
                (r * v - v).norm() <= tol && a.cross(&v).norm() <= tol
            }
        })
    }

    /// Element with parameters `(t, theta)` (for the torus, two angles).
    pub fn element(&self, group: Group, t: f64, theta: f64) -> Option<Vec<f64>> {
        let (a, r) = match self {
            MotionSet::Subgroup { .. } => return None,
            MotionSet::SlidingHinge { u_h, u_s } => (vec3(u_s).normalize() * t, rotation(&vec3(u_h), theta)),
            MotionSet::Torus2 { u1, u2 } => (Vector3::zeros(), rotation(&vec3(u1), t) * rotation(&vec3(u2), theta)),
            MotionSet::Cylindrical { axis } => (vec3(axis).normalize() * t, rotation(&vec3(axis), theta)),
        };
        Some(lower(group, &a, &r))
    }

    pub fn dim(&self) -> usize {
        match self {
            MotionSet::Subgroup { basis } => basis.len(),
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SubgroupVerdict {
    /// No counterexample among `samples` products and inverses, or closure
    /// of the generating directions.
    Subgroup { samples: usize },
    /// `a * b` leaves the set although `a` and `b` are in it.
    NotSubgroup { a: Vec<f64>, b: Vec<f64>, product: Vec<f64> },
    /// `a` is in the set and its inverse is not.
    NotInverseClosed { a: Vec<f64>, inverse: Vec<f64> },
    /// The generating directions are not bracket-closed.
    NotClosedAlgebra,
}

impl SubgroupVerdict {
    pub fn is_subgroup(&self) -> bool {
        matches!(self, SubgroupVerdict::Subgroup { .. })
    }
}

const MEMBER_TOL: f64 = 1e-9;

pub fn motion_set_subgroup_check(group: Group, set: &MotionSet, n_samples: usize, seed: u64) -> Result<SubgroupVerdict, LieError> {
    set.check_fits(group)?;
    let witness = |a: Vec<f64>, b: Vec<f64>| {
        let product = group.mul(&a, &b);
        (set.contains(group, &product, MEMBER_TOL) == Some(false)).then_some(SubgroupVerdict::NotSubgroup { a, b, product })
    };
    match set {
        MotionSet::Subgroup { basis } => {
            let g = group.algebra();
            return Ok(if is_subalgebra(&g, basis, 1e-10)? {
                SubgroupVerdict::Subgroup { samples: 0 }
            } else {
                SubgroupVerdict::NotClosedAlgebra
            });
        }
        MotionSet::SlidingHinge { u_h, u_s } => {
            // Turn a quarter about the hinge, then slide: the slide ends up
            // off the slide axis unless the two axes agree.
            if vec3(u_h).normalize().cross(&vec3(u_s).normalize()).norm() > 1e-9 {
                let a = set.element(group, 1.0, std::f64::consts::FRAC_PI_2).unwrap();
                let b = set.element(group, 1.0, 0.0).unwrap();
                if let Some(w) = witness(a, b) {
                    return Ok(w);
                }
            }
        }
        MotionSet::Torus2 { .. } => {
            let a = set.element(group, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
            let b = set.element(group, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
            if let Some(w) = witness(a, b) {
                return Ok(w);
            }
        }
        MotionSet::Cylindrical { .. } => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 17));
    use rand::Rng;
    let draw = |rng: &mut ChaCha8Rng| set.element(group, rng.gen_range(-2.0..2.0), rng.gen_range(-3.1..3.1)).unwrap();
    for _ in 0..n_samples {
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        if set.contains(group, &group.inv(&a), MEMBER_TOL) == Some(false) {
            return Ok(SubgroupVerdict::NotInverseClosed { inverse: group.inv(&a), a });
        }
        if let Some(w) = witness(a, b) {
            return Ok(w);
        }
    }
    Ok(SubgroupVerdict::Subgroup { samples: n_samples })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranslationSpan {
    pub rank: usize,
    pub orthogonal_to_hinge: bool,
}

/// Translations reached by conjugating a slide along `u_s` with turns about
/// `u_h`: the group generated by a sliding hinge contains all of them.
pub fn closure_translation_span(u_h: [f64; 3], u_s: [f64; 3], n_angles: usize) -> Result<TranslationSpan, LieError> {
    let (h, s) = (unit("u_h", &u_h)?, unit("u_s", &u_s)?);
    let n = n_angles.max(3);
    let mut m = DMatrix::zeros(3, n);
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        m.set_column(k, &(rotation(&h, th) * s));
    }
    let orthogonal_to_hinge = (0..n).all(|k| m.column(k).dot(&h).abs() < 1e-12);
    Ok(TranslationSpan { rank: rank(&m), orthogonal_to_hinge })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum Realizability {
    Yes { h_dim: usize, subalgebra: Vec<Vec<f64>> },
    No { obstruction: String },
}

impl Realizability {
    pub fn is_yes(&self) -> bool {
        matches!(self, Realizability::Yes { .. })
    }
}

fn no(s: &str) -> Realizability {
    Realizability::No { obstruction: s.to_string() }
}

/// Is `set` the relative-motion set `H` of some pair of equivariant
/// projections, i.e. a closed subgroup with a matching subalgebra?
pub fn realizable_as_pair(group: Group, set: &MotionSet, seed: u64) -> Result<Realizability, LieError> {
    set.check_fits(group)?;
    match set {
        MotionSet::Torus2 { .. } => {
            // A compact subgroup of SE(3) fixes a point, so it conjugates
            // into SO(3).
            if search_subalgebras(&LieAlgebra::so3(), 2, REALIZE_TRIALS, seed).found.is_empty() {
                return Ok(no("no 2-dim subalgebra of so(3)"));
            }
        }
        MotionSet::SlidingHinge { u_h, u_s } if group == Group::SE2 || vec3(u_h).normalize().cross(&vec3(u_s).normalize()).norm() > 1e-9 => {
            if group == Group::SE2 {
                let found = search_subalgebras(&LieAlgebra::se2(), 2, REALIZE_TRIALS, seed).found;
                if found.iter().all(|s| s.basis.iter().all(|b| b[0].abs() < 1e-9)) {
                    return Ok(no("only 2-dim subalgebra of se(2) is translations"));
                }
            }
            if !motion_set_subgroup_check(group, set, 50, seed)?.is_subgroup() {
                return Ok(no("sliding-hinge set not closed under multiplication"));
            }
        }
        _ => {}
    }
    if !motion_set_subgroup_check(group, set, 50, seed)?.is_subgroup() {
        return Ok(no("motion set not closed under multiplication"));
    }
    let g = group.algebra();
    let basis = match (set, group) {
        (MotionSet::Subgroup { basis }, _) => basis.clone(),
        (MotionSet::Cylindrical { axis }, _) | (MotionSet::SlidingHinge { u_s: axis, .. }, Group::SE3) => {
            let v = vec3(axis).normalize();
            vec![vec![v[0], v[1], v[2], 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, v[0], v[1], v[2]]]
        }
        _ => return Ok(no("no subalgebra matches the motion set")),
    };
    if !is_subalgebra(&g, &basis, 1e-10)? {
        return Ok(no("directions not closed under the bracket"));
    }
    Ok(Realizability::Yes { h_dim: basis.len(), subalgebra: basis })
}

#[cfg(test)]
mod tests {
    use super::*;

    const E1: [f64; 3] = [1.0, 0.0, 0.0];
    const E2: [f64; 3] = [0.0, 1.0, 0.0];
    const E3: [f64; 3] = [0.0, 0.0, 1.0];

    #[test]
    fn sliding_hinge_witness() {
        let set = MotionSet::SlidingHinge { u_h: E3, u_s: E1 };
        match motion_set_subgroup_check(Group::SE3, &set, 10, 0).unwrap() {
            SubgroupVerdict::NotSubgroup { a, b, product } => {
                assert_eq!(set.contains(Group::SE3, &a, 1e-12), Some(true));
                assert_eq!(set.contains(Group::SE3, &b, 1e-12), Some(true));
                // (e1, R(pi/2)) (e1, I) = (e1 + e2, R(pi/2)).
                assert!((product[0] - 1.0).abs() < 1e-12 && (product[1] - 1.0).abs() < 1e-12);
            }
            v => panic!("{:?}", v),
        }
        let planar = motion_set_subgroup_check(Group::SE2, &set, 10, 0).unwrap();
        assert!(matches!(planar, SubgroupVerdict::NotSubgroup { .. }));
    }

    #[test]
    fn closure_forces_a_plane() {
        let s = closure_translation_span(E3, E1, 12).unwrap();
        assert_eq!(s, TranslationSpan { rank: 2, orthogonal_to_hinge: true });
        assert_eq!(closure_translation_span(E3, [1.0, 0.0, 1.0], 12).unwrap().rank, 3);
    }

    #[test]
    fn subgroups_pass() {
        let cyl = MotionSet::Cylindrical { axis: [0.0, 0.6, 0.8] };
        assert!(motion_set_subgroup_check(Group::SE3, &cyl, 200, 3).unwrap().is_subgroup());
        let trivial = MotionSet::Subgroup { basis: vec![] };
        assert!(motion_set_subgroup_check(Group::SE2, &trivial, 0, 0).unwrap().is_subgroup());
        let bad = MotionSet::Subgroup { basis: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]] };
        assert_eq!(motion_set_subgroup_check(Group::SE2, &bad, 0, 0).unwrap(), SubgroupVerdict::NotClosedAlgebra);
    }

    #[test]
    fn torus_is_not_closed() {
        let t = MotionSet::Torus2 { u1: E3, u2: E1 };
        assert!(matches!(motion_set_subgroup_check(Group::SE3, &t, 10, 0).unwrap(), SubgroupVerdict::NotSubgroup { .. }));
        assert!(motion_set_subgroup_check(Group::SE3, &MotionSet::Torus2 { u1: E3, u2: [1.0, 0.0, 1.0] }, 1, 0).is_err());
    }

    #[test]
    fn realizability_table() {
        let ans = |g, s: MotionSet| realizable_as_pair(g, &s, 0).unwrap();
        assert_eq!(ans(Group::SE3, MotionSet::Torus2 { u1: E3, u2: E1 }), no("no 2-dim subalgebra of so(3)"));
        assert_eq!(ans(Group::SE2, MotionSet::SlidingHinge { u_h: E3, u_s: E1 }), no("only 2-dim subalgebra of se(2) is translations"));
        assert_eq!(ans(Group::SE3, MotionSet::SlidingHinge { u_h: E3, u_s: E2 }), no("sliding-hinge set not closed under multiplication"));
        match ans(Group::SE3, MotionSet::Cylindrical { axis: E3 }) {
            Realizability::Yes { h_dim, .. } => assert_eq!(h_dim, 2),
            r => panic!("{:?}", r),
        }
        assert!(realizable_as_pair(Group::SE2, &MotionSet::Cylindrical { axis: E3 }, 0).is_err());
    }
}
