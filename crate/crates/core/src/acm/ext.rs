//! External constraint sets.
//!
//! For a set of actors `S`: `C_S` is the union of their constraint sets,
//! `C_perp(S)` the union over actors not in `S`, and `ext(S)` the
//! intersection of the two. The star constraint is returned only when
//! `include_star` is set.

use std::collections::BTreeSet;

use super::shape::{ActorId, ActorIndexCategory, ConstraintId};
use super::AcmError;

fn strip(mut s: BTreeSet<ConstraintId>, include_star: bool) -> BTreeSet<ConstraintId> {
    if !include_star {
        s.remove(&ConstraintId::star());
    }
    s
}

pub fn constraints_of_set(shape: &ActorIndexCategory, actors: &BTreeSet<ActorId>) -> BTreeSet<ConstraintId> {
    shape
        .membership()
        .iter()
        .filter(|(a, _)| actors.contains(*a))
        .flat_map(|(_, cs)| cs.iter().cloned())
        .collect()
}

pub fn complement_constraints(shape: &ActorIndexCategory, actors: &BTreeSet<ActorId>) -> BTreeSet<ConstraintId> {
    shape
        .membership()
        .iter()
        .filter(|(a, _)| !actors.contains(*a))
        .flat_map(|(_, cs)| cs.iter().cloned())
        .collect()
}

pub fn ext_of_set(
    shape: &ActorIndexCategory,
    actors: &BTreeSet<ActorId>,
    include_star: bool,
) -> Result<BTreeSet<ConstraintId>, AcmError> {
    for a in actors {
        shape.constraints_of(a)?;
    }
    let inside = constraints_of_set(shape, actors);
    let outside = complement_constraints(shape, actors);
    Ok(strip(inside.intersection(&outside).cloned().collect(), include_star))
}

/// `ext(i)`: constraints of `i` that some other actor also carries.
pub fn ext_set(shape: &ActorIndexCategory, i: &ActorId, include_star: bool) -> Result<BTreeSet<ConstraintId>, AcmError> {
    ext_of_set(shape, &BTreeSet::from([i.clone()]), include_star)
}

/// Constraints carried by at least two actors.
pub fn shared_constraints(shape: &ActorIndexCategory, include_star: bool) -> BTreeSet<ConstraintId> {
    let set = shape
        .constraints()
        .iter()
        .filter(|c| shape.actors_with(c).len() >= 2)
        .cloned()
        .collect();
    strip(set, include_star)
}

/// `C_i` intersect `C_j`.
pub fn common(shape: &ActorIndexCategory, i: &ActorId, j: &ActorId, include_star: bool) -> Result<BTreeSet<ConstraintId>, AcmError> {
    let ci = shape.constraints_of(i)?;
    let cj = shape.constraints_of(j)?;
    Ok(strip(ci.intersection(cj).cloned().collect(), include_star))
}

/// Result of checking the two identities relating `ext(i)`, `ext(j)` and the
/// welded actor `ij`:
/// `ext(i) & ext(j) = C_i & C_j` and
/// `ext(i) | ext(j) = (C_i & C_j) | ext(ij)` in the welded shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtIdentityCheck {
    pub intersection_holds: bool,
    pub union_holds: bool,
}

pub fn check_ext_identities(shape: &ActorIndexCategory, i: &ActorId, j: &ActorId) -> Result<ExtIdentityCheck, AcmError> {
    let ei = ext_set(shape, i, true)?;
    let ej = ext_set(shape, j, true)?;
    let cij = common(shape, i, j, true)?;
    let inter: BTreeSet<_> = ei.intersection(&ej).cloned().collect();
    let (welded, id) = shape.weld(i, j)?;
    let eij = ext_set(&welded, &id, true)?;
    let lhs: BTreeSet<_> = ei.union(&ej).cloned().collect();
    let rhs: BTreeSet<_> = cij.union(&eij).cloned().collect();
    Ok(ExtIdentityCheck { intersection_holds: inter == cij, union_holds: lhs == rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::solve::rng;
    use proptest::prelude::*;

    fn ids(v: &[&str]) -> BTreeSet<ConstraintId> {
        v.iter().map(|s| ConstraintId::new(*s)).collect()
    }

    #[test]
    fn single_actor_has_no_external_constraints() {
        let s = ActorIndexCategory::new([(ActorId::new("a"), vec![ConstraintId::new("c")])]).unwrap();
        assert!(ext_set(&s, &"a".into(), true).unwrap().is_empty());
    }

    #[test]
    fn middle_of_two_revolutes() {
        let s = ActorIndexCategory::new([
            (ActorId::new("a1"), vec![ConstraintId::new("c12")]),
            (ActorId::new("a2"), vec![ConstraintId::new("c12"), ConstraintId::new("c23")]),
            (ActorId::new("a3"), vec![ConstraintId::new("c23")]),
        ])
        .unwrap();
        assert_eq!(ext_set(&s, &"a2".into(), false).unwrap(), ids(&["c12", "c23"]));
        assert_eq!(ext_set(&s, &"a1".into(), true).unwrap(), ids(&["*", "c12"]));
        let all: BTreeSet<ActorId> = s.actors().cloned().collect();
        assert!(ext_of_set(&s, &all, true).unwrap().is_empty());
        assert_eq!(shared_constraints(&s, false), ids(&["c12", "c23"]));
    }

    proptest! {
        #[test]
        fn identities_hold(seed in 0u64..5000, n in 2usize..6, m in 0usize..6) {
            let mut r = rng(seed);
            let s = ActorIndexCategory::random(&mut r, n, m, 0.4);
            let actors = s.actor_list();
            for (a, b) in s.interactions() {
                let chk = check_ext_identities(&s, &a, &b).unwrap();
                prop_assert!(chk.intersection_holds && chk.union_holds);
            }
            prop_assert!(actors.len() == n);
        }
    }
}
