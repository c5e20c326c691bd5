//! Inclusions of shapes, sub-diagrams, their intersections and gluing two
//! diagrams along a common part.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::geomcore::submersion::check_surjective_submersion;
use crate::geomcore::{derive_seed, SmoothMap, Space};

use super::diagram::AcmDiagram;
use super::ext::common;
use super::shape::{ActorId, ActorIndexCategory, ConstraintId, Index};
use super::AcmError;

/// Injective order-preserving map of shapes sending star to star.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inclusion {
    pub source: ActorIndexCategory,
    pub target: ActorIndexCategory,
    pub actors: BTreeMap<ActorId, ActorId>,
    pub constraints: BTreeMap<ConstraintId, ConstraintId>,
}

impl Inclusion {
    pub fn new(
        source: ActorIndexCategory,
        target: ActorIndexCategory,
        actors: BTreeMap<ActorId, ActorId>,
        mut constraints: BTreeMap<ConstraintId, ConstraintId>,
    ) -> Result<Inclusion, AcmError> {
        let bad = |m: &str| Err(AcmError::BadInclusion(m.to_string()));
        constraints.entry(ConstraintId::star()).or_insert_with(ConstraintId::star);
        if constraints.get(&ConstraintId::star()) != Some(&ConstraintId::star()) {
            return bad("star must map to star");
        }
        let a_keys: BTreeSet<&ActorId> = actors.keys().collect();
        if a_keys != source.actors().collect::<BTreeSet<_>>() {
            return bad("actor map must cover the source actors");
        }
        let c_keys: BTreeSet<&ConstraintId> = constraints.keys().collect();
        if c_keys != source.constraints().iter().collect::<BTreeSet<_>>() {
            return bad("constraint map must cover the source constraints");
        }
        if actors.values().collect::<BTreeSet<_>>().len() != actors.len()
            || constraints.values().collect::<BTreeSet<_>>().len() != constraints.len()
        {
            return bad("not injective");
        }
        for (a, cs) in source.membership() {
            let ta = &actors[a];
            let tcs = target.constraints_of(ta).map_err(|_| AcmError::BadInclusion(format!("{} has no image", a)))?;
            for c in cs {
                if !tcs.contains(&constraints[c]) {
                    return bad(&format!("membership {} in C_{} not preserved", c, a));
                }
            }
        }
        for c in constraints.values() {
            if !target.constraints().contains(c) {
                return bad("constraint image missing from target");
            }
        }
        Ok(Inclusion { source, target, actors, constraints })
    }

    /// Inclusion of a sub-shape with the same ids.
    pub fn of_subshape(source: &ActorIndexCategory, target: &ActorIndexCategory) -> Result<Inclusion, AcmError> {
        let actors = source.actors().map(|a| (a.clone(), a.clone())).collect();
        let constraints = source.constraints().iter().map(|c| (c.clone(), c.clone())).collect();
        Inclusion::new(source.clone(), target.clone(), actors, constraints)
    }

    pub fn map_index(&self, x: &Index) -> Index {
        match x {
            Index::Constraint(c) => Index::Constraint(self.constraints[c].clone()),
            Index::Actor(a) => Index::Actor(self.actors[a].clone()),
            Index::Interaction(a, b) => Index::interaction(&self.actors[a], &self.actors[b]),
        }
    }

    pub fn compose(&self, after: &Inclusion) -> Result<Inclusion, AcmError> {
        if self.target != after.source {
            return Err(AcmError::BadInclusion("composition of non-matching inclusions".into()));
        }
        let actors = self.actors.iter().map(|(k, v)| (k.clone(), after.actors[v].clone())).collect();
        let constraints = self.constraints.iter().map(|(k, v)| (k.clone(), after.constraints[v].clone())).collect();
        Inclusion::new(self.source.clone(), after.target.clone(), actors, constraints)
    }
}

/// A diagram together with its inclusion into an ambient diagram.
#[derive(Clone, Debug)]
pub struct SubDiagram {
    pub diagram: AcmDiagram,
    pub inclusion: Inclusion,
}

impl SubDiagram {
    pub fn restrict(parent: &AcmDiagram, actors: &[ActorId], constraints: &[ConstraintId]) -> Result<SubDiagram, AcmError> {
        let diagram = parent.restrict(actors, constraints)?;
        let inclusion = Inclusion::of_subshape(diagram.shape(), parent.shape())?;
        Ok(SubDiagram { diagram, inclusion })
    }
}

/// Identification of indices of two diagrams: pairs (index in the first,
/// index in the second).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Glue {
    pub actors: Vec<(ActorId, ActorId)>,
    pub constraints: Vec<(ConstraintId, ConstraintId)>,
}

impl Glue {
    pub fn along_constraints(pairs: &[(&str, &str)]) -> Glue {
        Glue {
            actors: vec![],
            constraints: pairs.iter().map(|(a, b)| (ConstraintId::new(*a), ConstraintId::new(*b))).collect(),
        }
    }
}

/// Common part of two sub-diagrams of one ambient diagram, in ambient ids.
#[derive(Clone, Debug, Serialize)]
pub struct Intersection {
    pub actors: BTreeSet<ActorId>,
    pub constraints: BTreeSet<ConstraintId>,
    pub membership: BTreeMap<ActorId, BTreeSet<ConstraintId>>,
    /// Every constraint of the intersection lies below one of its actors,
    /// so the intersection is itself a diagram of the same kind.
    pub is_diagram: bool,
    /// The same indices expressed as an identification of the two parts.
    pub glue: Glue,
}

pub fn intersect(s1: &SubDiagram, s2: &SubDiagram) -> Result<Intersection, AcmError> {
    if s1.inclusion.target != s2.inclusion.target {
        return Err(AcmError::BadInclusion("sub-diagrams of different diagrams".into()));
    }
    let inv_a = |i: &Inclusion| -> BTreeMap<ActorId, ActorId> { i.actors.iter().map(|(k, v)| (v.clone(), k.clone())).collect() };
    let inv_c = |i: &Inclusion| -> BTreeMap<ConstraintId, ConstraintId> {
        i.constraints.iter().map(|(k, v)| (v.clone(), k.clone())).collect()
    };
    let (a1, a2) = (inv_a(&s1.inclusion), inv_a(&s2.inclusion));
    let (c1, c2) = (inv_c(&s1.inclusion), inv_c(&s2.inclusion));
    let actors: BTreeSet<ActorId> = a1.keys().filter(|a| a2.contains_key(*a)).cloned().collect();
    let constraints: BTreeSet<ConstraintId> = c1.keys().filter(|c| c2.contains_key(*c)).cloned().collect();
    let mut membership = BTreeMap::new();
    for a in &actors {
        let m1 = s1.inclusion.source.constraints_of(&a1[a])?;
        let m2 = s2.inclusion.source.constraints_of(&a2[a])?;
        let set: BTreeSet<ConstraintId> = constraints
            .iter()
            .filter(|c| m1.contains(&c1[*c]) && m2.contains(&c2[*c]))
            .cloned()
            .collect();
        membership.insert(a.clone(), set);
    }
    let is_diagram = constraints.iter().all(|c| membership.values().any(|cs| cs.contains(c)));
    let glue = Glue {
        actors: actors.iter().map(|a| (a1[a].clone(), a2[a].clone())).collect(),
        constraints: constraints.iter().filter(|c| !c.is_star()).map(|c| (c1[c].clone(), c2[c].clone())).collect(),
    };
    Ok(Intersection { actors, constraints, membership, is_diagram, glue })
}

/// Glue two diagrams along `glue`. Indices of `d1` keep their ids; indices
/// of `d2` that are not glued keep theirs unless that clashes, in which case
/// a `'` is appended. All interactions of the result are rebuilt and the
/// pairwise submersion condition is checked on samples.
pub fn union_over(d1: &AcmDiagram, d2: &AcmDiagram, glue: &Glue, n_samples: usize, seed: u64) -> Result<AcmDiagram, AcmError> {
    let a_glue: BTreeMap<&ActorId, &ActorId> = glue.actors.iter().map(|(x, y)| (y, x)).collect();
    let c_glue: BTreeMap<&ConstraintId, &ConstraintId> = glue.constraints.iter().map(|(x, y)| (y, x)).collect();

    let mut constraint_spaces: BTreeMap<ConstraintId, Arc<Space>> = d1.constraint_spaces().clone();
    let mut c_rename: BTreeMap<ConstraintId, ConstraintId> = BTreeMap::new();
    for (c, s) in d2.constraint_spaces() {
        let new = match c_glue.get(c) {
            Some(&target) => {
                let existing = d1.constraint_space(target)?;
                if !existing.same_manifold(s) {
                    return Err(AcmError::IncompatibleOverlap(format!("constraint {} vs {}", target, c)));
                }
                target.clone()
            }
            None => {
                let mut id = c.clone();
                while constraint_spaces.contains_key(&id) || c_glue.values().any(|v| **v == id) {
                    id = ConstraintId(format!("{}'", id.0));
                }
                constraint_spaces.insert(id.clone(), Arc::clone(s));
                id
            }
        };
        c_rename.insert(c.clone(), new);
    }

    let mut actor_spaces: BTreeMap<ActorId, Arc<Space>> = d1.actor_spaces().clone();
    let mut a_rename: BTreeMap<ActorId, ActorId> = BTreeMap::new();
    for (a, s) in d2.actor_spaces() {
        let new = match a_glue.get(a) {
            Some(&target) => {
                if !d1.actor_space(target)?.same_manifold(s) {
                    return Err(AcmError::IncompatibleOverlap(format!("actor {} vs {}", target, a)));
                }
                target.clone()
            }
            None => {
                let mut id = a.clone();
                while actor_spaces.contains_key(&id) {
                    id = ActorId(format!("{}'", id.0));
                }
                actor_spaces.insert(id.clone(), Arc::new(s.renamed(id.as_str())));
                id
            }
        };
        a_rename.insert(a.clone(), new);
    }

    let mut maps: BTreeMap<(ActorId, ConstraintId), SmoothMap> = d1.maps().clone();
    for ((a, c), m) in d2.maps() {
        let key = (a_rename[a].clone(), c_rename[c].clone());
        let src = Arc::clone(&actor_spaces[&key.0]);
        let tgt = Arc::clone(&constraint_spaces[&key.1]);
        let m = m.with_source(src)?.with_target(tgt)?;
        if let Some(existing) = maps.get(&key) {
            if existing.components() != m.components() {
                return Err(AcmError::IncompatibleOverlap(format!("map {} -> {}", key.0, key.1)));
            }
        }
        maps.insert(key, m);
    }

    let out = AcmDiagram::from_parts(actor_spaces, constraint_spaces, maps)?;
    for (k, (a, b)) in out.shape().interactions().into_iter().enumerate() {
        if common(out.shape(), &a, &b, false)?.is_empty() {
            continue;
        }
        for (x, y, t) in [(&a, &b, 0u64), (&b, &a, 1u64)] {
            let m = out.pair_morphism(x, y)?;
            let v = check_surjective_submersion(&m, n_samples, derive_seed(seed, 2 * k as u64 + t))?;
            if !v.is_verified() {
                return Err(AcmError::PairwiseSubmersionFailure { left: a.0.clone(), right: b.0.clone() });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acm::DiagramBuilder;
    use crate::geomcore::{spaces, Expr};

    fn single(actor: &str, c: &str) -> AcmDiagram {
        DiagramBuilder::new()
            .actor(actor, spaces::se2("SE2"))
            .constraint(c, spaces::r2("R2"))
            .map(actor, c, vec![Expr::var(0), Expr::var(1)])
            .build()
            .unwrap()
    }

    #[test]
    fn gluing_two_single_actors_along_a_constraint() {
        let u = union_over(&single("a", "c"), &single("b", "c"), &Glue::along_constraints(&[("c", "c")]), 6, 0).unwrap();
        assert_eq!(u.shape().n_actors(), 2);
        let fp = u.interaction(&"a".into(), &"b".into()).unwrap();
        assert_eq!(fp.space.dim(), 4);
    }

    #[test]
    fn clashing_ids_are_renamed() {
        let u = union_over(&single("a", "c"), &single("a", "c"), &Glue::default(), 4, 0).unwrap();
        let ids: Vec<String> = u.actors().iter().map(|a| a.0.clone()).collect();
        assert_eq!(ids, vec!["a", "a'"]);
        assert!(u.constraint_spaces().contains_key(&ConstraintId::new("c'")));
    }

    #[test]
    fn incompatible_overlap() {
        let other = DiagramBuilder::new()
            .actor("b", spaces::r2("R2"))
            .constraint("c", spaces::circle("S1"))
            .map("b", "c", vec![Expr::var(0).cos(), Expr::var(0).sin()])
            .build()
            .unwrap();
        let e = union_over(&single("a", "c"), &other, &Glue::along_constraints(&[("c", "c")]), 4, 0);
        assert!(matches!(e, Err(AcmError::IncompatibleOverlap(_))));
    }

    #[test]
    fn inclusion_must_preserve_membership() {
        let d = single("a", "c");
        let bare = ActorIndexCategory::new([(ActorId::new("a"), Vec::<ConstraintId>::new())]).unwrap();
        assert!(Inclusion::of_subshape(&bare, d.shape()).is_ok());
        assert!(Inclusion::of_subshape(d.shape(), &bare).is_err());
    }
}
