use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::geomcore::product::{fiber_product, product_map, FiberProduct};
use crate::geomcore::solve::derive_seed;
use crate::geomcore::submersion::{check_surjective_submersion, SubmersionVerdict};
use crate::geomcore::{Expr, SmoothMap, Space};

use super::ext::{common, ext_set};
use super::shape::{ActorId, ActorIndexCategory, ConstraintId};
use super::AcmError;

/// Where an original actor's coordinates sit inside a (possibly welded)
/// actor's ambient coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub original: ActorId,
    pub start: usize,
    pub len: usize,
}

/// A functor from an actor index category into embedded manifolds: a space
/// per actor and constraint, and a constraint map per membership `c in C_i`.
/// The star constraint is the one-point space and its maps are implicit.
#[derive(Clone, Debug)]
pub struct AcmDiagram {
    shape: ActorIndexCategory,
    actor_spaces: BTreeMap<ActorId, Arc<Space>>,
    constraint_spaces: BTreeMap<ConstraintId, Arc<Space>>,
    maps: BTreeMap<(ActorId, ConstraintId), SmoothMap>,
    blocks: BTreeMap<ActorId, Vec<Block>>,
}

#[derive(Default)]
pub struct DiagramBuilder {
    actors: Vec<(ActorId, Space)>,
    constraints: Vec<(ConstraintId, Space)>,
    maps: Vec<(ActorId, ConstraintId, Vec<Expr>)>,
}

impl DiagramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn actor(mut self, id: &str, space: Space) -> Self {
        self.actors.push((ActorId::new(id), space));
        self
    }

    pub fn constraint(mut self, id: &str, space: Space) -> Self {
        self.constraints.push((ConstraintId::new(id), space));
        self
    }

    /// Constraint map from `actor` to `constraint`, one expression per
    /// target coordinate over the actor's coordinates.
    pub fn map(mut self, actor: &str, constraint: &str, components: Vec<Expr>) -> Self {
        self.maps.push((ActorId::new(actor), ConstraintId::new(constraint), components));
        self
    }

    pub fn build(self) -> Result<AcmDiagram, AcmError> {
        let mut actor_spaces = BTreeMap::new();
        for (id, s) in self.actors {
            if actor_spaces.insert(id.clone(), Arc::new(s.renamed(id.as_str()))).is_some() {
                return Err(AcmError::DuplicateId(id.0));
            }
        }
        let mut constraint_spaces = BTreeMap::new();
        for (id, s) in self.constraints {
            if id.is_star() {
                return Err(AcmError::ReservedId(id.0));
            }
            if constraint_spaces.insert(id.clone(), Arc::new(s)).is_some() {
                return Err(AcmError::DuplicateId(id.0));
            }
        }
        let mut maps = BTreeMap::new();
        for (a, c, comps) in self.maps {
            let src = actor_spaces.get(&a).ok_or_else(|| AcmError::UnknownActor(a.0.clone()))?;
            let tgt = constraint_spaces.get(&c).ok_or_else(|| AcmError::UnknownConstraint(c.0.clone()))?;
            let m = SmoothMap::new(Arc::clone(src), Arc::clone(tgt), comps)
                .map_err(|e| AcmError::BadMap { actor: a.0.clone(), constraint: c.0.clone(), reason: e.to_string() })?;
            if maps.insert((a.clone(), c.clone()), m).is_some() {
                return Err(AcmError::DuplicateId(format!("{}->{}", a, c)));
            }
        }
        AcmDiagram::from_parts(actor_spaces, constraint_spaces, maps)
    }
}

impl AcmDiagram {
    pub fn from_parts(
        actor_spaces: BTreeMap<ActorId, Arc<Space>>,
        constraint_spaces: BTreeMap<ConstraintId, Arc<Space>>,
        maps: BTreeMap<(ActorId, ConstraintId), SmoothMap>,
    ) -> Result<AcmDiagram, AcmError> {
        let blocks = actor_spaces
            .iter()
            .map(|(a, s)| (a.clone(), vec![Block { original: a.clone(), start: 0, len: s.ambient_dim() }]))
            .collect();
        AcmDiagram::assemble(actor_spaces, constraint_spaces, maps, blocks)
    }

    pub(crate) fn assemble(
        actor_spaces: BTreeMap<ActorId, Arc<Space>>,
        constraint_spaces: BTreeMap<ConstraintId, Arc<Space>>,
        maps: BTreeMap<(ActorId, ConstraintId), SmoothMap>,
        blocks: BTreeMap<ActorId, Vec<Block>>,
    ) -> Result<AcmDiagram, AcmError> {
        let mut members: BTreeMap<ActorId, Vec<ConstraintId>> =
            actor_spaces.keys().map(|a| (a.clone(), Vec::new())).collect();
        for ((a, c), m) in &maps {
            let src = actor_spaces.get(a).ok_or_else(|| AcmError::UnknownActor(a.0.clone()))?;
            let tgt = constraint_spaces.get(c).ok_or_else(|| AcmError::UnknownConstraint(c.0.clone()))?;
            if !m.source().same_manifold(src) || !m.target().same_manifold(tgt) {
                return Err(AcmError::BadMap {
                    actor: a.0.clone(),
                    constraint: c.0.clone(),
                    reason: "source or target does not match the declared spaces".into(),
                });
            }
            members.get_mut(a).expect("checked").push(c.clone());
        }
        let shape = ActorIndexCategory::new(members)?;
        for c in constraint_spaces.keys() {
            if !shape.constraints().contains(c) {
                return Err(AcmError::UnusedConstraint(c.0.clone()));
            }
        }
        Ok(AcmDiagram { shape, actor_spaces, constraint_spaces, maps, blocks })
    }

    pub fn shape(&self) -> &ActorIndexCategory {
        &self.shape
    }

    pub fn actors(&self) -> Vec<ActorId> {
        self.shape.actor_list()
    }

    pub fn actor_space(&self, a: &ActorId) -> Result<&Arc<Space>, AcmError> {
        self.actor_spaces.get(a).ok_or_else(|| AcmError::UnknownActor(a.0.clone()))
    }

    /// Space of a constraint; the star gives the one-point space.
    pub fn constraint_space(&self, c: &ConstraintId) -> Result<Arc<Space>, AcmError> {
        if c.is_star() {
            return Ok(Arc::new(crate::geomcore::spaces::point()));
        }
        self.constraint_spaces.get(c).cloned().ok_or_else(|| AcmError::UnknownConstraint(c.0.clone()))
    }

    pub fn constraint_spaces(&self) -> &BTreeMap<ConstraintId, Arc<Space>> {
        &self.constraint_spaces
    }

    pub fn actor_spaces(&self) -> &BTreeMap<ActorId, Arc<Space>> {
        &self.actor_spaces
    }

    pub fn maps(&self) -> &BTreeMap<(ActorId, ConstraintId), SmoothMap> {
        &self.maps
    }

    pub fn blocks(&self, a: &ActorId) -> &[Block] {
        self.blocks.get(a).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn all_blocks(&self) -> &BTreeMap<ActorId, Vec<Block>> {
        &self.blocks
    }

    /// `f_{i,c}`; for the star, the map to the point.
    pub fn constraint_map(&self, a: &ActorId, c: &ConstraintId) -> Result<SmoothMap, AcmError> {
        let src = self.actor_space(a)?;
        if c.is_star() {
            return Ok(SmoothMap::to_point(Arc::clone(src)));
        }
        self.maps
            .get(&(a.clone(), c.clone()))
            .cloned()
            .ok_or_else(|| AcmError::NotAMember { actor: a.0.clone(), constraint: c.0.clone() })
    }

    /// Product of `f_{i,c}` over `set` (star entries contribute nothing).
    pub fn product_morphism(&self, a: &ActorId, set: &BTreeSet<ConstraintId>) -> Result<SmoothMap, AcmError> {
        let src = Arc::clone(self.actor_space(a)?);
        let maps: Vec<SmoothMap> = set
            .iter()
            .filter(|c| !c.is_star())
            .map(|c| self.constraint_map(a, c))
            .collect::<Result<_, _>>()?;
        Ok(product_map(src, &maps)?)
    }

    /// Map of `a` into the product of the constraints it shares with `b`.
    pub fn pair_morphism(&self, a: &ActorId, b: &ActorId) -> Result<SmoothMap, AcmError> {
        let shared = common(&self.shape, a, b, false)?;
        self.product_morphism(a, &shared)
    }

    /// The interaction of `a` and `b`: fiber product of their shared
    /// constraint maps, coordinates of the smaller id first, each qualified
    /// by its actor id.
    pub fn interaction(&self, a: &ActorId, b: &ActorId) -> Result<FiberProduct, AcmError> {
        if a == b {
            return Err(AcmError::SelfWeld(a.0.clone()));
        }
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        let fx = self.pair_morphism(x, y)?;
        let fy = self.pair_morphism(y, x)?;
        let qx = Arc::new(self.actor_space(x)?.qualified(x.as_str()));
        let qy = Arc::new(self.actor_space(y)?.qualified(y.as_str()));
        let fx = fx.with_source(qx)?;
        let fy = fy.with_source(qy)?;
        Ok(fiber_product(&format!("{}|{}", x, y), &fx, &fy)?)
    }

    pub fn ext(&self, a: &ActorId, include_star: bool) -> Result<BTreeSet<ConstraintId>, AcmError> {
        ext_set(&self.shape, a, include_star)
    }

    /// Sub-diagram on a sub-shape whose ids and memberships are all present
    /// here.
    pub fn restrict_to(&self, sub: &ActorIndexCategory) -> Result<AcmDiagram, AcmError> {
        let mut actor_spaces = BTreeMap::new();
        let mut maps = BTreeMap::new();
        let mut blocks = BTreeMap::new();
        for (a, cs) in sub.membership() {
            let full = self.shape.constraints_of(a)?;
            actor_spaces.insert(a.clone(), Arc::clone(self.actor_space(a)?));
            blocks.insert(a.clone(), self.blocks(a).to_vec());
            for c in cs {
                if !full.contains(c) {
                    return Err(AcmError::NotAMember { actor: a.0.clone(), constraint: c.0.clone() });
                }
                if !c.is_star() {
                    maps.insert((a.clone(), c.clone()), self.constraint_map(a, c)?);
                }
            }
        }
        let constraint_spaces = sub
            .constraints()
            .iter()
            .filter(|c| !c.is_star())
            .map(|c| Ok((c.clone(), self.constraint_space(c)?)))
            .collect::<Result<_, AcmError>>()?;
        AcmDiagram::assemble(actor_spaces, constraint_spaces, maps, blocks)
    }

    /// Sub-diagram on `actors`, keeping only the listed constraints.
    pub fn restrict(&self, actors: &[ActorId], constraints: &[ConstraintId]) -> Result<AcmDiagram, AcmError> {
        let keep: BTreeSet<&ConstraintId> = constraints.iter().collect();
        let mut members = Vec::new();
        for a in actors {
            let cs: Vec<ConstraintId> =
                self.shape.constraints_of(a)?.iter().filter(|c| keep.contains(c)).cloned().collect();
            members.push((a.clone(), cs));
        }
        let sub = ActorIndexCategory::new(members)?;
        for c in constraints {
            if !sub.constraints().contains(c) {
                return Err(AcmError::UnusedConstraint(c.0.clone()));
            }
        }
        self.restrict_to(&sub)
    }

    pub fn validate(&self, n_samples: usize, seed: u64) -> AxiomReport {
        validate(self, n_samples, seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// Every actor and constraint has a space of the declared dimension.
    Spaces,
    /// Every membership has a constraint map landing in its target.
    ConstraintMaps,
    /// Star is the point and nothing else is zero-dimensional.
    TerminalStar,
    /// Shared-constraint maps of every pair are surjective submersions.
    PairwiseSubmersion,
    /// Every interaction is the fiber product of its pair.
    InteractionLimits,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    /// Passing relied on sampling rather than a structural argument.
    pub sampled: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairVerdict {
    pub actors: (ActorId, ActorId),
    pub shared: Vec<ConstraintId>,
    /// `None` when the check itself could not run (e.g. empty source).
    pub left: Option<SubmersionVerdict>,
    pub right: Option<SubmersionVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
    pub pairs: Vec<PairVerdict>,
}

impl AxiomReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks.iter().find(|c| c.axiom == axiom).expect("all axioms reported")
    }
}

fn check(axiom: Axiom, sampled: bool, failures: Vec<String>) -> AxiomCheck {
    AxiomCheck { axiom, passed: failures.is_empty(), sampled, failures }
}

fn validate(d: &AcmDiagram, n: usize, seed: u64) -> AxiomReport {
    let mut checks = Vec::new();

    let mut fails = Vec::new();
    for (a, s) in &d.actor_spaces {
        if let Err(e) = s.verify_dim(n.min(4), derive_seed(seed, 1)) {
            fails.push(format!("actor {}: {}", a, e));
        }
    }
    for (c, s) in &d.constraint_spaces {
        if let Err(e) = s.verify_dim(n.min(4), derive_seed(seed, 2)) {
            fails.push(format!("constraint {}: {}", c, e));
        }
    }
    checks.push(check(Axiom::Spaces, true, fails));

    let mut fails = Vec::new();
    for ((a, c), m) in &d.maps {
        if let Err(e) = m.check_well_typed(n, derive_seed(seed, 3)) {
            fails.push(format!("{} -> {}: {}", a, c, e));
        }
    }
    checks.push(check(Axiom::ConstraintMaps, true, fails));

    let mut fails = Vec::new();
    for (a, s) in &d.actor_spaces {
        if s.dim() == 0 {
            fails.push(format!("actor {} is zero-dimensional", a));
        }
    }
    for (c, s) in &d.constraint_spaces {
        if s.dim() == 0 {
            fails.push(format!("constraint {} is zero-dimensional", c));
        }
    }
    let mut interactions = Vec::new();
    for (a, b) in d.shape.interactions() {
        match d.interaction(&a, &b) {
            Ok(fp) => {
                if fp.space.dim() == 0 {
                    fails.push(format!("interaction {}|{} is zero-dimensional", a, b));
                }
                interactions.push((a, b, Ok(fp)));
            }
            Err(e) => interactions.push((a, b, Err(e))),
        }
    }
    checks.push(check(Axiom::TerminalStar, false, fails));

    let mut fails = Vec::new();
    let mut pairs = Vec::new();
    for (k, (a, b)) in d.shape.interactions().into_iter().enumerate() {
        let shared: Vec<ConstraintId> = common(&d.shape, &a, &b, false).expect("actors of shape").into_iter().collect();
        let verdict = |x: &ActorId, y: &ActorId, tag: u64| -> Result<SubmersionVerdict, String> {
            let s = derive_seed(seed, 100 + 2 * k as u64 + tag);
            let m = d.pair_morphism(x, y).map_err(|e| e.to_string())?;
            check_surjective_submersion(&m, n, s).map_err(|e| e.to_string())
        };
        let mut outcome = |x: &ActorId, y: &ActorId, tag: u64| match verdict(x, y, tag) {
            Ok(v) => {
                if !v.is_verified() {
                    fails.push(format!("{} into constraints shared with {}: {:?}", x, y, v));
                }
                Some(v)
            }
            Err(e) => {
                fails.push(format!("{} into constraints shared with {}: {}", x, y, e));
                None
            }
        };
        let left = outcome(&a, &b, 0);
        let right = outcome(&b, &a, 1);
        pairs.push(PairVerdict { actors: (a, b), shared, left, right });
    }
    checks.push(check(Axiom::PairwiseSubmersion, true, fails));

    let mut fails = Vec::new();
    for (k, (a, b, fp)) in interactions.into_iter().enumerate() {
        match fp {
            Err(e) => fails.push(format!("{}|{}: {}", a, b, e)),
            Ok(fp) => {
                if let Err(e) = fp.space.verify_dim(n.min(4), derive_seed(seed, 500 + k as u64)) {
                    fails.push(format!("{}|{}: {}", a, b, e));
                }
            }
        }
    }
    checks.push(check(Axiom::InteractionLimits, true, fails));

    AxiomReport { checks, pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::spaces;

    fn v(i: usize) -> Expr {
        Expr::var(i)
    }

    fn revolute() -> AcmDiagram {
        DiagramBuilder::new()
            .actor("a", spaces::se2("SE2"))
            .actor("b", spaces::se2("SE2"))
            .constraint("c", spaces::r2("R2"))
            .map("a", "c", vec![v(0) - v(2), v(1) - v(3)])
            .map("b", "c", vec![v(0), v(1)])
            .build()
            .unwrap()
    }

    #[test]
    fn revolute_validates_and_interaction_has_dim_four() {
        let d = revolute();
        let r = d.validate(6, 0);
        assert!(r.is_valid(), "{:?}", r);
        let fp = d.interaction(&"a".into(), &"b".into()).unwrap();
        assert_eq!(fp.space.dim(), 4);
        assert_eq!(fp.space.coords()[0], "a.x");
        assert_eq!(fp.space.coords()[4], "b.x");
    }

    #[test]
    fn point_actor_breaks_terminal_axiom() {
        let d = DiagramBuilder::new()
            .actor("a", spaces::point())
            .actor("b", spaces::r2("R2"))
            .build()
            .unwrap();
        let r = d.validate(3, 0);
        assert!(!r.check(Axiom::TerminalStar).passed);
    }

    #[test]
    fn unused_constraint_is_rejected() {
        let e = DiagramBuilder::new()
            .actor("a", spaces::r2("R2"))
            .constraint("c", spaces::r2("R2"))
            .build();
        assert!(matches!(e, Err(AcmError::UnusedConstraint(_))));
    }

    #[test]
    fn non_submersive_pair_fails_validation() {
        // Both circles pinned to the same point of R^2 through S1 -> R^2.
        let d = DiagramBuilder::new()
            .actor("a", spaces::circle("S1"))
            .actor("b", spaces::circle("S1"))
            .constraint("c", spaces::r2("R2"))
            .map("a", "c", vec![v(0), v(1)])
            .map("b", "c", vec![v(0), v(1)])
            .build()
            .unwrap();
        let r = d.validate(4, 0);
        assert!(!r.check(Axiom::PairwiseSubmersion).passed);
        assert!(matches!(r.pairs[0].left, Some(SubmersionVerdict::DimensionObstructed { .. })));
    }

    #[test]
    fn restriction_keeps_memberships() {
        let d = revolute();
        let sub = d.restrict(&["a".into()], &["c".into()]).unwrap();
        assert_eq!(sub.shape().n_actors(), 1);
        assert!(sub.ext(&"a".into(), true).unwrap().is_empty());
        assert!(matches!(d.restrict(&["a".into()], &["q".into()]), Err(AcmError::UnusedConstraint(_))));
    }
}
