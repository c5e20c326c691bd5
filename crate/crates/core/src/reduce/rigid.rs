//! Rigid inclusions: composites of simple inclusions between shapes, and
//! the category they form.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::acm::{AcmDiagram, ActorId, ActorIndexCategory, ConstraintId, Inclusion, SubDiagram};
use crate::geomcore::derive_seed;

use super::limit::decomposes_external;
use super::weld::ReductionChain;
use super::ReduceError;

/// Bijective relabelling of actors and non-star constraints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Renaming {
    pub actors: BTreeMap<ActorId, ActorId>,
    pub constraints: BTreeMap<ConstraintId, ConstraintId>,
}

impl Renaming {
    pub fn identity(shape: &ActorIndexCategory) -> Renaming {
        Renaming {
            actors: shape.actors().map(|a| (a.clone(), a.clone())).collect(),
            constraints: shape.constraints().iter().filter(|c| !c.is_star()).map(|c| (c.clone(), c.clone())).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.actors.iter().all(|(k, v)| k == v) && self.constraints.iter().all(|(k, v)| k == v)
    }

    fn actor(&self, a: &ActorId) -> ActorId {
        self.actors.get(a).cloned().unwrap_or_else(|| a.clone())
    }

    fn constraint(&self, c: &ConstraintId) -> ConstraintId {
        self.constraints.get(c).cloned().unwrap_or_else(|| c.clone())
    }

    /// `other` after `self`.
    pub fn then(&self, other: &Renaming) -> Renaming {
        Renaming {
            actors: self.actors.iter().map(|(k, v)| (k.clone(), other.actor(v))).collect(),
            constraints: self.constraints.iter().map(|(k, v)| (k.clone(), other.constraint(v))).collect(),
        }
    }

    fn apply(&self, shape: &ActorIndexCategory) -> Result<ActorIndexCategory, String> {
        let keys: BTreeSet<&ActorId> = self.actors.keys().collect();
        if keys != shape.actors().collect::<BTreeSet<_>>() {
            return Err("renaming must cover exactly the actors".into());
        }
        let ckeys: BTreeSet<&ConstraintId> = self.constraints.keys().collect();
        if ckeys != shape.constraints().iter().filter(|c| !c.is_star()).collect::<BTreeSet<_>>() {
            return Err("renaming must cover exactly the constraints".into());
        }
        let distinct = |n: usize, m: usize| n == m;
        if !distinct(self.actors.values().collect::<BTreeSet<_>>().len(), self.actors.len())
            || !distinct(self.constraints.values().collect::<BTreeSet<_>>().len(), self.constraints.len())
            || self.constraints.values().any(|c| c.is_star())
        {
            return Err("renaming is not a bijection".into());
        }
        let members: Vec<(ActorId, Vec<ConstraintId>)> = shape
            .membership()
            .iter()
            .map(|(a, cs)| (self.actor(a), cs.iter().filter(|c| !c.is_star()).map(|c| self.constraint(c)).collect()))
            .collect();
        ActorIndexCategory::new(members).map_err(|e| e.to_string())
    }
}

/// One simple inclusion. Exactly one clause holds for each step: a shape
/// isomorphism, one more membership of a constraint in an existing actor,
/// or one more actor carrying only the star.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SimpleStep {
    Iso(Renaming),
    AddConstraint { actor: ActorId, constraint: ConstraintId },
    AddActorTrivial { actor: ActorId },
}

impl SimpleStep {
    pub fn apply(&self, shape: &ActorIndexCategory) -> Result<ActorIndexCategory, String> {
        match self {
            SimpleStep::Iso(r) => r.apply(shape),
            SimpleStep::AddConstraint { actor, constraint } => {
                let cs = shape.constraints_of(actor).map_err(|e| e.to_string())?;
                if constraint.is_star() || cs.contains(constraint) {
                    return Err(format!("{} already constrains {}", constraint, actor));
                }
                let mut members = shape.membership().clone();
                members.get_mut(actor).expect("checked").insert(constraint.clone());
                ActorIndexCategory::new(members).map_err(|e| e.to_string())
            }
            SimpleStep::AddActorTrivial { actor } => {
                if shape.has_actor(actor) {
                    return Err(format!("actor {} already present", actor));
                }
                let mut members = shape.membership().clone();
                members.insert(actor.clone(), BTreeSet::new());
                ActorIndexCategory::new(members).map_err(|e| e.to_string())
            }
        }
    }

    fn track(&self, actors: &mut BTreeMap<ActorId, ActorId>, constraints: &mut BTreeMap<ConstraintId, ConstraintId>) {
        if let SimpleStep::Iso(r) = self {
            for v in actors.values_mut() {
                *v = r.actor(v);
            }
            for v in constraints.values_mut() {
                if !v.is_star() {
                    *v = r.constraint(v);
                }
            }
        }
    }
}

/// Composite of simple inclusions from `source` to `target`, kept in
/// normal form: adjacent isomorphisms fused, identity isomorphisms dropped,
/// and a single identity isomorphism when nothing else remains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidInclusion {
    source: ActorIndexCategory,
    target: ActorIndexCategory,
    steps: Vec<SimpleStep>,
}

impl RigidInclusion {
    pub fn new(source: ActorIndexCategory, steps: Vec<SimpleStep>) -> Result<RigidInclusion, ReduceError> {
        let mut shape = source.clone();
        for (k, s) in steps.iter().enumerate() {
            shape = s.apply(&shape).map_err(|reason| ReduceError::InvalidStep { step: k, reason })?;
        }
        Ok(RigidInclusion { steps: normalize(&source, steps), source, target: shape })
    }

    /// Like [`RigidInclusion::new`], also requiring the steps to end at
    /// `target`.
    pub fn between(source: ActorIndexCategory, target: &ActorIndexCategory, steps: Vec<SimpleStep>) -> Result<RigidInclusion, ReduceError> {
        let r = RigidInclusion::new(source, steps)?;
        if &r.target != target {
            return Err(ReduceError::WrongTarget);
        }
        Ok(r)
    }

    pub fn identity(shape: &ActorIndexCategory) -> RigidInclusion {
        RigidInclusion {
            source: shape.clone(),
            target: shape.clone(),
            steps: vec![SimpleStep::Iso(Renaming::identity(shape))],
        }
    }

    pub fn source(&self) -> &ActorIndexCategory {
        &self.source
    }

    pub fn target(&self) -> &ActorIndexCategory {
        &self.target
    }

    pub fn steps(&self) -> &[SimpleStep] {
        &self.steps
    }

    /// The underlying inclusion of shapes.
    pub fn functor(&self) -> Inclusion {
        let mut actors: BTreeMap<ActorId, ActorId> = self.source.actors().map(|a| (a.clone(), a.clone())).collect();
        let mut constraints: BTreeMap<ConstraintId, ConstraintId> =
            self.source.constraints().iter().map(|c| (c.clone(), c.clone())).collect();
        for s in &self.steps {
            s.track(&mut actors, &mut constraints);
        }
        Inclusion::new(self.source.clone(), self.target.clone(), actors, constraints).expect("steps preserve the order")
    }
}

fn normalize(source: &ActorIndexCategory, steps: Vec<SimpleStep>) -> Vec<SimpleStep> {
    let mut out: Vec<SimpleStep> = Vec::new();
    for s in steps {
        match (out.last_mut(), s) {
            (Some(SimpleStep::Iso(prev)), SimpleStep::Iso(next)) => *prev = prev.then(&next),
            (_, s) => out.push(s),
        }
    }
    out.retain(|s| !matches!(s, SimpleStep::Iso(r) if r.is_identity()));
    if out.is_empty() {
        out.push(SimpleStep::Iso(Renaming::identity(source)));
    }
    out
}

/// `g` after `f`.
pub fn compose_rigid(g: &RigidInclusion, f: &RigidInclusion) -> Result<RigidInclusion, ReduceError> {
    if f.target != g.source {
        return Err(ReduceError::SourceTargetMismatch);
    }
    let steps = f.steps.iter().chain(&g.steps).cloned().collect();
    Ok(RigidInclusion { source: f.source.clone(), target: g.target.clone(), steps: normalize(&f.source, steps) })
}

/// Factor the inclusion of `sub` into simple steps: relabel into the
/// target's ids, add the missing actors with trivial constraints (in id
/// order), then add the missing memberships one at a time (in actor then
/// constraint order). Requires the target to decompose external
/// constraints; every intermediate diagram is validated.
pub fn include_subsystem(sub: &SubDiagram, target: &AcmDiagram, n_samples: usize, seed: u64) -> Result<RigidInclusion, ReduceError> {
    let inc = &sub.inclusion;
    if &inc.target != target.shape() {
        return Err(ReduceError::SourceTargetMismatch);
    }
    if !decomposes_external(target, n_samples, seed)?.holds {
        return Err(ReduceError::TargetNotDecomposing);
    }
    let mut steps = vec![SimpleStep::Iso(Renaming {
        actors: inc.actors.clone(),
        constraints: inc.constraints.iter().filter(|(k, _)| !k.is_star()).map(|(k, v)| (k.clone(), v.clone())).collect(),
    })];
    let present: BTreeSet<&ActorId> = inc.actors.values().collect();
    for a in target.shape().actors().filter(|a| !present.contains(a)) {
        steps.push(SimpleStep::AddActorTrivial { actor: a.clone() });
    }
    let image: BTreeMap<&ActorId, &ActorId> = inc.actors.iter().map(|(k, v)| (v, k)).collect();
    for (a, cs) in target.shape().membership() {
        let have: BTreeSet<ConstraintId> = match image.get(a) {
            Some(src) => inc.source.constraints_of(src)?.iter().map(|c| inc.constraints[c].clone()).collect(),
            None => BTreeSet::new(),
        };
        for c in cs.iter().filter(|c| !c.is_star() && !have.contains(*c)) {
            steps.push(SimpleStep::AddConstraint { actor: a.clone(), constraint: c.clone() });
        }
    }

    let mut shape = inc.source.clone();
    for (k, s) in steps.iter().enumerate() {
        shape = s.apply(&shape).map_err(|reason| ReduceError::InvalidStep { step: k, reason })?;
        let inter = target.restrict_to(&shape)?;
        let report = inter.validate(n_samples, derive_seed(seed, 100 + k as u64));
        if !report.is_valid() {
            let reason = report.checks.iter().flat_map(|c| c.failures.iter().cloned()).collect::<Vec<_>>().join("; ");
            return Err(ReduceError::IntermediateInvalid { step: k, reason });
        }
    }
    RigidInclusion::between(inc.source.clone(), target.shape(), steps)
}

/// Reduce `d` by welding in id order until it decomposes external
/// constraints; return the chain and the rigid inclusion of the least
/// actor of that reduction into it.
pub fn reduction_witness(d: &AcmDiagram, n_samples: usize, seed: u64) -> Result<(ReductionChain, RigidInclusion), ReduceError> {
    let mut chain = ReductionChain::new(d.clone(), n_samples, seed);
    while !decomposes_external(chain.current(), n_samples, derive_seed(seed, chain.steps.len() as u64))?.holds {
        if chain.is_complete() {
            return Err(ReduceError::TargetNotDecomposing);
        }
        let actors = chain.current().actors();
        chain.push_weld(&actors[0], &actors[1])?;
    }
    let reduced = chain.current().clone();
    let a = reduced.actors().into_iter().next().ok_or(ReduceError::EmptyDiagram)?;
    let sub = SubDiagram::restrict(&reduced, &[a], &[])?;
    let inc = include_subsystem(&sub, &reduced, n_samples, seed)?;
    Ok((chain, inc))
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoWitness {
    pub shapes_match: bool,
    pub spaces_match: bool,
    /// Largest disagreement of corresponding constraint maps on samples.
    pub max_map_error: f64,
}

impl IsoWitness {
    pub fn holds(&self, tol: f64) -> bool {
        self.shapes_match && self.spaces_match && self.max_map_error < tol
    }
}

/// Check that `renaming` identifies `d1` with `d2`: the shapes correspond,
/// corresponding spaces are the same manifold (so the identity is the
/// isomorphism at every index) and corresponding constraint maps agree on
/// sampled points.
pub fn iso_witness(d1: &AcmDiagram, d2: &AcmDiagram, renaming: &Renaming, n_samples: usize, seed: u64) -> Result<IsoWitness, ReduceError> {
    let shapes_match = renaming.apply(d1.shape()).map(|s| &s == d2.shape()).unwrap_or(false);
    if !shapes_match {
        return Ok(IsoWitness { shapes_match, spaces_match: false, max_map_error: f64::INFINITY });
    }
    let mut spaces_match = true;
    for a in d1.actors() {
        spaces_match &= d1.actor_space(&a)?.same_manifold(d2.actor_space(&renaming.actor(&a))?);
    }
    for c in d1.shape().constraints() {
        spaces_match &= d1.constraint_space(c)?.same_manifold(&*d2.constraint_space(&renaming.constraint(c))?);
    }
    let mut worst: f64 = 0.0;
    for (k, ((a, c), f)) in d1.maps().iter().enumerate() {
        let g = d2.constraint_map(&renaming.actor(a), &renaming.constraint(c))?;
        for x in f.source().sample_points(n_samples, derive_seed(seed, k as u64))? {
            for (u, v) in f.eval(&x)?.iter().zip(g.eval(&x)?) {
                worst = worst.max((u - v).abs());
            }
        }
    }
    Ok(IsoWitness { shapes_match, spaces_match, max_map_error: worst })
}
