//! Configuration spaces: limits of diagrams, built by welding or gluing,
//! and the diagnostics reported when no route applies.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::acm::{intersect, AcmDiagram, ActorId, ConstraintId, Index, SubDiagram};
use crate::geomcore::localdim::{local_dimension_estimate, LocalDimHistogram};
use crate::geomcore::product::{fiber_product, product, product_map};
use crate::geomcore::submersion::{check_surjective_submersion, fiber_space, SubmersionVerdict};
use crate::geomcore::{derive_seed, solve, Expr, SmoothMap, SolverConfig, Space};

use super::weld::{reduce_acyclic, verdict_summary, ChainTranscript, ReductionChain};
use super::ReduceError;

#[derive(Clone, Debug, Serialize)]
pub struct ActorDecomposition {
    pub actor: ActorId,
    pub constraints: Vec<ConstraintId>,
    pub verdict: SubmersionVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub holds: bool,
    pub actors: Vec<ActorDecomposition>,
}

/// Every actor maps onto the product of its external constraints by a
/// surjective submersion.
pub fn decomposes_external(d: &AcmDiagram, n_samples: usize, seed: u64) -> Result<DecompositionReport, ReduceError> {
    let mut actors = Vec::new();
    for (k, a) in d.actors().iter().enumerate() {
        let ext = d.ext(a, false)?;
        let m = d.product_morphism(a, &ext)?;
        let verdict = check_surjective_submersion(&m, n_samples, derive_seed(seed, k as u64))?;
        actors.push(ActorDecomposition { actor: a.clone(), constraints: ext.into_iter().collect(), verdict });
    }
    Ok(DecompositionReport { holds: actors.iter().all(|a| a.verdict.is_verified()), actors })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintDecomposition {
    pub actor: ActorId,
    pub dims_match: bool,
    pub verdict: SubmersionVerdict,
    pub injective_on_samples: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntoConstraintsReport {
    pub holds: bool,
    pub actors: Vec<ConstraintDecomposition>,
}

/// Every actor is identified with the product of all its constraints:
/// equal dimension, a sampled surjective submersion, and fibers that are
/// single points on samples.
pub fn decomposes_into_constraints(d: &AcmDiagram, n_samples: usize, seed: u64) -> Result<IntoConstraintsReport, ReduceError> {
    let mut actors = Vec::new();
    for (k, a) in d.actors().iter().enumerate() {
        let cs: BTreeSet<ConstraintId> = d.shape().constraints_of(a)?.clone();
        let m = d.product_morphism(a, &cs)?;
        let dims_match = m.source().dim() == m.target().dim();
        let s = derive_seed(seed, k as u64);
        let verdict = check_surjective_submersion(&m, n_samples, s)?;
        let injective_on_samples = dims_match && verdict.is_verified() && fibers_are_points(&m, n_samples.min(6), s)?;
        actors.push(ConstraintDecomposition { actor: a.clone(), dims_match, verdict, injective_on_samples });
    }
    let holds = actors.iter().all(|a| a.dims_match && a.verdict.is_verified() && a.injective_on_samples);
    Ok(IntoConstraintsReport { holds, actors })
}

fn fibers_are_points(m: &SmoothMap, n: usize, seed: u64) -> Result<bool, ReduceError> {
    let cfg = SolverConfig::default();
    let mut rng = solve::rng(derive_seed(seed, 77));
    for x in m.source().sample_points(n, seed)? {
        let fib = fiber_space(m, &m.eval(&x)?)?;
        for _ in 0..3 {
            if let Ok(sol) = fib.sample_with(&mut rng, &cfg) {
                let d: f64 = sol.point.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                if d > 1e-6 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// How a configuration space was obtained.
#[derive(Clone, Debug)]
pub enum Provenance {
    Welding(ReductionChain),
    /// Glued from two declared parts of a diagram decomposing into
    /// constraints.
    Union { left: Vec<ActorId>, right: Vec<ActorId>, overlap_actors: Vec<ActorId>, overlap_constraints: Vec<ConstraintId> },
    /// The raw equalizer, accepted because its local dimension is constant
    /// on samples. Not produced by [`f_limit`].
    RawEqualizer(LocalDimHistogram),
}

/// Apex with a leg to every index of the original diagram.
#[derive(Clone, Debug)]
pub struct ConfigurationSpace {
    pub apex: Arc<Space>,
    pub legs: BTreeMap<Index, SmoothMap>,
    pub provenance: Provenance,
    pub diagram: AcmDiagram,
}

impl ConfigurationSpace {
    pub fn dim(&self) -> usize {
        self.apex.dim()
    }

    pub fn actor_leg(&self, a: &ActorId) -> Option<&SmoothMap> {
        self.legs.get(&Index::Actor(a.clone()))
    }

    pub fn constraint_leg(&self, c: &ConstraintId) -> Option<&SmoothMap> {
        self.legs.get(&Index::Constraint(c.clone()))
    }

    pub fn transcript(&self) -> Option<ChainTranscript> {
        match &self.provenance {
            Provenance::Welding(c) => Some(c.transcript()),
            _ => None,
        }
    }

    /// Largest disagreement `|f_{i,c}(leg_i(p)) - leg_c(p)|` over sampled
    /// apex points and all memberships.
    pub fn cone_error(&self, n: usize, seed: u64) -> Result<f64, ReduceError> {
        let mut worst: f64 = 0.0;
        for p in self.apex.sample_points(n, seed)? {
            for ((a, c), f) in self.diagram.maps() {
                let xa = self.legs[&Index::Actor(a.clone())].eval(&p)?;
                let via = f.eval(&xa)?;
                let direct = self.legs[&Index::Constraint(c.clone())].eval(&p)?;
                for (u, v) in via.iter().zip(&direct) {
                    worst = worst.max((u - v).abs());
                }
            }
        }
        Ok(worst)
    }

    /// Build from apex and actor legs, deriving constraint and interaction
    /// legs through the least actor carrying each constraint.
    pub fn from_actor_legs(
        diagram: &AcmDiagram,
        apex: Arc<Space>,
        actor_legs: BTreeMap<ActorId, SmoothMap>,
        provenance: Provenance,
    ) -> Result<ConfigurationSpace, ReduceError> {
        let mut legs = BTreeMap::new();
        for c in diagram.shape().constraints() {
            let leg = if c.is_star() {
                SmoothMap::to_point(Arc::clone(&apex))
            } else {
                let owner = &diagram.shape().actors_with(c)[0];
                actor_legs[owner].then(&diagram.constraint_map(owner, c)?)?
            };
            legs.insert(Index::Constraint(c.clone()), leg);
        }
        for (a, b) in diagram.shape().interactions() {
            let fp = diagram.interaction(&a, &b)?;
            let comps: Vec<Expr> =
                actor_legs[&a].components().iter().chain(actor_legs[&b].components()).cloned().collect();
            legs.insert(Index::Interaction(a, b), SmoothMap::new(Arc::clone(&apex), fp.space, comps)?);
        }
        for (a, l) in actor_legs {
            legs.insert(Index::Actor(a), l);
        }
        Ok(ConfigurationSpace { apex, legs, provenance, diagram: diagram.clone() })
    }

    pub fn from_chain(chain: ReductionChain) -> Result<ConfigurationSpace, ReduceError> {
        let terminal = chain.current();
        let t = terminal.actors().into_iter().next().ok_or(ReduceError::EmptyDiagram)?;
        let apex = Arc::clone(terminal.actor_space(&t)?);
        let mut actor_legs = BTreeMap::new();
        for b in terminal.blocks(&t) {
            let target = Arc::clone(chain.initial.actor_space(&b.original)?);
            let idx: Vec<usize> = (b.start..b.start + b.len).collect();
            actor_legs.insert(b.original.clone(), SmoothMap::coordinate_projection(Arc::clone(&apex), target, &idx)?);
        }
        let initial = chain.initial.clone();
        ConfigurationSpace::from_actor_legs(&initial, apex, actor_legs, Provenance::Welding(chain))
    }

    /// Accept the raw equalizer as configuration space when its local
    /// dimension estimate is constant.
    pub fn from_raw_equalizer(d: &AcmDiagram, n_seeds: usize, seed: u64) -> Result<ConfigurationSpace, ReduceError> {
        let (raw, blocks) = raw_equalizer(d)?;
        let hist = local_dimension_estimate(&raw, n_seeds, seed)?;
        let dim = hist.constant().ok_or(ReduceError::NonConstantLocalDim(hist.clone()))?;
        let apex = Arc::new(Space::new(raw.name(), raw.coords().to_vec(), raw.residuals().to_vec(), dim)?);
        let legs = block_legs(d, &apex, &blocks)?;
        ConfigurationSpace::from_actor_legs(d, apex, legs, Provenance::RawEqualizer(hist))
    }
}

fn block_legs(
    d: &AcmDiagram,
    apex: &Arc<Space>,
    blocks: &BTreeMap<ActorId, (usize, usize)>,
) -> Result<BTreeMap<ActorId, SmoothMap>, ReduceError> {
    let mut legs = BTreeMap::new();
    for (a, &(start, len)) in blocks {
        let idx: Vec<usize> = (start..start + len).collect();
        legs.insert(a.clone(), SmoothMap::coordinate_projection(Arc::clone(apex), Arc::clone(d.actor_space(a)?), &idx)?);
    }
    Ok(legs)
}

/// Product of all actor spaces cut out by agreement of every shared
/// constraint. Declared dimension is the naive count
/// `sum dim A_i - sum_c (m_c - 1) dim c`, clamped at zero.
pub fn raw_equalizer(d: &AcmDiagram) -> Result<(Space, BTreeMap<ActorId, (usize, usize)>), ReduceError> {
    let actors = d.actors();
    let factors: Vec<Arc<Space>> =
        actors.iter().map(|a| Ok(Arc::new(d.actor_space(a)?.qualified(a.as_str())))).collect::<Result<_, ReduceError>>()?;
    let prod = product("equalizer", &factors);
    let mut blocks = BTreeMap::new();
    let mut offset = 0;
    for (a, f) in actors.iter().zip(&factors) {
        blocks.insert(a.clone(), (offset, f.ambient_dim()));
        offset += f.ambient_dim();
    }
    let mut residuals: Vec<Expr> = prod.residuals().to_vec();
    let mut dim = prod.dim() as i64;
    for c in d.shape().constraints().iter().filter(|c| !c.is_star()) {
        let owners = d.shape().actors_with(c);
        let first = &owners[0];
        let f0 = d.constraint_map(first, c)?;
        for other in &owners[1..] {
            let fk = d.constraint_map(other, c)?;
            for (u, v) in f0.components().iter().zip(fk.components()) {
                residuals.push(u.shift(blocks[first].0) - v.shift(blocks[other].0));
            }
            dim -= d.constraint_space(c)?.dim() as i64;
        }
    }
    let space = Space::new("equalizer", prod.coords().to_vec(), residuals, dim.max(0) as usize)?
        .with_rotation_blocks(prod.rotation_blocks().to_vec())?;
    Ok((space, blocks))
}

/// Two parts of a diagram, each given by its actors and constraints.
#[derive(Clone, Debug, Serialize)]
pub struct UnionDecl {
    pub left_actors: Vec<ActorId>,
    pub left_constraints: Vec<ConstraintId>,
    pub right_actors: Vec<ActorId>,
    pub right_constraints: Vec<ConstraintId>,
}

#[derive(Clone, Debug, Serialize)]
pub enum Strategy {
    /// Diagram decomposes external constraints: weld in id order.
    ExternalDecomposition,
    /// Acyclic skeleton: leaf-peeling reduction.
    AcyclicSkeleton,
    /// Diagram decomposes into constraints: glue the two declared parts.
    DeclaredUnion(UnionDecl),
}

#[derive(Clone, Debug)]
pub struct LimitOptions {
    pub strategies: Vec<Strategy>,
    pub n_samples: usize,
    pub seed: u64,
    /// Random starts for the raw-equalizer diagnostic on failure.
    pub diagnostic_seeds: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            strategies: vec![Strategy::ExternalDecomposition, Strategy::AcyclicSkeleton],
            n_samples: 10,
            seed: 0,
            diagnostic_seeds: 80,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StrategyAttempt {
    pub strategy: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub attempts: Vec<StrategyAttempt>,
    /// Local dimension estimates of the raw equalizer.
    pub diagnostics: Option<LocalDimHistogram>,
}

fn strategy_name(s: &Strategy) -> &'static str {
    match s {
        Strategy::ExternalDecomposition => "external_decomposition",
        Strategy::AcyclicSkeleton => "acyclic_skeleton",
        Strategy::DeclaredUnion(_) => "declared_union",
    }
}

/// Try each strategy in order; the first that applies gives the limit.
pub fn f_limit(d: &AcmDiagram, opts: &LimitOptions) -> Result<ConfigurationSpace, ObstructionReport> {
    let mut attempts = Vec::new();
    for (k, s) in opts.strategies.iter().enumerate() {
        let seed = derive_seed(opts.seed, k as u64);
        let r = match s {
            Strategy::ExternalDecomposition => via_external(d, opts.n_samples, seed),
            Strategy::AcyclicSkeleton => reduce_acyclic(d, opts.n_samples, seed).and_then(ConfigurationSpace::from_chain),
            Strategy::DeclaredUnion(decl) => via_union(d, decl, opts.n_samples, seed),
        };
        match r {
            Ok(cs) => return Ok(cs),
            Err(e) => attempts.push(StrategyAttempt { strategy: strategy_name(s).into(), reason: e.to_string() }),
        }
    }
    let diagnostics = raw_equalizer(d)
        .ok()
        .and_then(|(raw, _)| local_dimension_estimate(&raw, opts.diagnostic_seeds, derive_seed(opts.seed, 999)).ok());
    Err(ObstructionReport { attempts, diagnostics })
}

fn via_external(d: &AcmDiagram, n: usize, seed: u64) -> Result<ConfigurationSpace, ReduceError> {
    let rep = decomposes_external(d, n, seed)?;
    if let Some(bad) = rep.actors.iter().find(|a| !a.verdict.is_verified()) {
        return Err(ReduceError::NotDecomposing(format!("{}: {}", bad.actor, verdict_summary(&bad.verdict))));
    }
    ConfigurationSpace::from_chain(ReductionChain::weld_in_order(d, n, seed)?)
}

fn via_union(d: &AcmDiagram, decl: &UnionDecl, n: usize, seed: u64) -> Result<ConfigurationSpace, ReduceError> {
    let rep = decomposes_into_constraints(d, n, seed)?;
    if let Some(bad) = rep.actors.iter().find(|a| !(a.dims_match && a.verdict.is_verified() && a.injective_on_samples)) {
        return Err(ReduceError::NotDecomposing(format!("{} is not the product of its constraints", bad.actor)));
    }
    let s1 = SubDiagram::restrict(d, &decl.left_actors, &decl.left_constraints)?;
    let s2 = SubDiagram::restrict(d, &decl.right_actors, &decl.right_constraints)?;
    for a in d.actors() {
        let full = d.shape().constraints_of(&a)?;
        let mut got = BTreeSet::new();
        for s in [&s1, &s2] {
            if let Ok(cs) = s.diagram.shape().constraints_of(&a) {
                got.extend(cs.iter().cloned());
            }
        }
        if &got != full {
            return Err(ReduceError::NotDecomposing(format!("declared parts do not cover the constraints of {}", a)));
        }
    }
    let inter = intersect(&s1, &s2)?;

    let (x1, b1) = raw_equalizer(&s1.diagram)?;
    let (x2, b2) = raw_equalizer(&s2.diagram)?;
    let (x1, x2) = (Arc::new(x1), Arc::new(x2));
    let legs1 = block_legs(&s1.diagram, &x1, &b1)?;
    let legs2 = block_legs(&s2.diagram, &x2, &b2)?;

    // Maps of both parts into the realisation of the overlap: shared actor
    // coordinates, then the constraints that no shared actor carries.
    let overlap_actors: Vec<ActorId> = inter.actors.iter().cloned().collect();
    let loose: Vec<ConstraintId> = inter
        .constraints
        .iter()
        .filter(|c| !c.is_star() && !inter.membership.values().any(|cs| cs.contains(*c)))
        .cloned()
        .collect();
    let overlap_map = |part: &SubDiagram, legs: &BTreeMap<ActorId, SmoothMap>, src: &Arc<Space>| -> Result<SmoothMap, ReduceError> {
        let mut maps: Vec<SmoothMap> = overlap_actors.iter().map(|a| legs[a].clone()).collect();
        for c in &loose {
            let owner = &part.diagram.shape().actors_with(c)[0];
            maps.push(legs[owner].then(&part.diagram.constraint_map(owner, c)?)?);
        }
        Ok(product_map(Arc::clone(src), &maps)?)
    };
    let g1 = overlap_map(&s1, &legs1, &x1)?;
    let g2 = overlap_map(&s2, &legs2, &x2)?;
    let fp = fiber_product("union", &g1, &g2)?;
    let apex = fp.space;
    let shift = x1.ambient_dim();

    let mut actor_legs = BTreeMap::new();
    for (a, &(start, len)) in &b1 {
        let idx: Vec<usize> = (start..start + len).collect();
        actor_legs.insert(a.clone(), SmoothMap::coordinate_projection(Arc::clone(&apex), Arc::clone(d.actor_space(a)?), &idx)?);
    }
    for (a, &(start, len)) in &b2 {
        if actor_legs.contains_key(a) {
            continue;
        }
        let idx: Vec<usize> = (shift + start..shift + start + len).collect();
        actor_legs.insert(a.clone(), SmoothMap::coordinate_projection(Arc::clone(&apex), Arc::clone(d.actor_space(a)?), &idx)?);
    }
    let provenance = Provenance::Union {
        left: decl.left_actors.clone(),
        right: decl.right_actors.clone(),
        overlap_actors,
        overlap_constraints: inter.constraints.iter().filter(|c| !c.is_star()).cloned().collect(),
    };
    ConfigurationSpace::from_actor_legs(d, apex, actor_legs, provenance)
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub dims: (usize, usize),
    pub samples: usize,
    /// Largest leg disagreement over all indices and samples.
    pub max_leg_error: f64,
}

impl InvarianceReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.dims.0 == self.dims.1 && self.max_leg_error < tol
    }
}

/// Compare two weld orders: same apex dimension and, for sampled points of
/// the first apex, a point of the second with the same actor images, at
/// which every leg agrees.
pub fn weld_order_invariance_check(
    d: &AcmDiagram,
    order1: &[(ActorId, ActorId)],
    order2: &[(ActorId, ActorId)],
    n_points: usize,
    n_samples: usize,
    seed: u64,
) -> Result<InvarianceReport, ReduceError> {
    let x1 = ConfigurationSpace::from_chain(ReductionChain::weld_along(d, order1, n_samples, seed)?)?;
    let x2 = ConfigurationSpace::from_chain(ReductionChain::weld_along(d, order2, n_samples, seed)?)?;
    compare_configuration_spaces(&x1, &x2, n_points, derive_seed(seed, 3))
}

pub fn compare_configuration_spaces(
    x1: &ConfigurationSpace,
    x2: &ConfigurationSpace,
    n_points: usize,
    seed: u64,
) -> Result<InvarianceReport, ReduceError> {
    let dims = (x1.dim(), x2.dim());
    let mut worst: f64 = 0.0;
    let cfg = SolverConfig::default();
    let mut rng = solve::rng(derive_seed(seed, 1));
    for p in x1.apex.sample_points(n_points, seed)? {
        let mut extra = Vec::new();
        for a in x1.diagram.actors() {
            let target = x1.actor_leg(&a).ok_or(ReduceError::EmptyDiagram)?.eval(&p)?;
            let leg2 = x2.actor_leg(&a).ok_or(ReduceError::EmptyDiagram)?;
            extra.extend(leg2.components().iter().zip(&target).map(|(e, &t)| e.clone() - Expr::c(t)));
        }
        let corr = x2.apex.with_extra_residuals("correspondence", extra, 0)?;
        let q = corr.sample_with(&mut rng, &cfg)?.point;
        for (idx, l1) in &x1.legs {
            let l2 = x2.legs.get(idx).ok_or(ReduceError::EmptyDiagram)?;
            for (u, v) in l1.eval(&p)?.iter().zip(l2.eval(&q)?) {
                worst = worst.max((u - v).abs());
            }
        }
    }
    Ok(InvarianceReport { dims, samples: n_points, max_leg_error: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkcat::build;
    use crate::reduce::weld::admissible_orders;

    fn opts(strategies: Vec<Strategy>) -> LimitOptions {
        LimitOptions { strategies, n_samples: 8, seed: 0, diagnostic_seeds: 60 }
    }

    #[test]
    fn decomposition_checks() {
        let bar = build("rigid_bar", &[]).unwrap().diagram;
        assert!(decomposes_external(&bar, 8, 0).unwrap().holds);
        let lr = build("linked_revolutes", &[]).unwrap().diagram;
        let rep = decomposes_external(&lr, 8, 0).unwrap();
        assert!(!rep.holds);
        let a2 = rep.actors.iter().find(|a| a.actor == ActorId::new("A2")).unwrap();
        assert_eq!(a2.verdict, SubmersionVerdict::DimensionObstructed { source_dim: 3, target_dim: 4 });

        let pu = build("product_union", &[]).unwrap().diagram;
        assert!(decomposes_into_constraints(&pu, 8, 0).unwrap().holds);
        // Each bar actor is identified with the bar constraint itself.
        assert!(decomposes_into_constraints(&bar, 8, 0).unwrap().holds);
        assert!(!decomposes_into_constraints(&lr, 8, 0).unwrap().holds);
    }

    #[test]
    fn cone_law_holds_on_limits() {
        for name in ["rigid_bar", "revolute", "linked_revolutes", "sliding_hinge", "bar_path"] {
            let d = build(name, &[]).unwrap().diagram;
            let cs = f_limit(&d, &LimitOptions::default()).unwrap();
            assert!(cs.cone_error(20, 1).unwrap() < 1e-9, "{}", name);
            // Every index of the original shape has a leg.
            assert_eq!(cs.legs.len(), d.shape().objects().len(), "{}", name);
        }
    }

    #[test]
    fn sliding_hinge_limit_has_dim_five() {
        let d = build("sliding_hinge", &[]).unwrap().diagram;
        let cs = f_limit(&d, &LimitOptions::default()).unwrap();
        assert_eq!(cs.dim(), 5);
        assert!(matches!(cs.provenance, Provenance::Welding(_)));
    }

    #[test]
    fn union_route_gives_product_of_constraints() {
        let b = build("product_union", &[]).unwrap();
        let cs = f_limit(&b.diagram, &opts(vec![Strategy::DeclaredUnion(b.union.clone().unwrap())])).unwrap();
        assert!(matches!(cs.provenance, Provenance::Union { .. }));
        let total: usize = ["P", "Q"].iter().map(|c| b.diagram.constraint_space(&(*c).into()).unwrap().dim()).sum();
        assert_eq!(cs.dim(), total);
        cs.apex.verify_dim(5, 2).unwrap();
        assert!(cs.cone_error(20, 3).unwrap() < 1e-9);
    }

    #[test]
    fn union_route_refuses_the_nonexample() {
        let b = build("nonexample", &[]).unwrap();
        let err = f_limit(&b.diagram, &opts(vec![Strategy::DeclaredUnion(b.union.clone().unwrap())])).unwrap_err();
        assert!(err.attempts[0].reason.contains("not the product"), "{:?}", err.attempts);
    }

    #[test]
    fn raw_equalizer_naive_dimension() {
        let d = build("three_bar", &[]).unwrap().diagram;
        let (raw, blocks) = raw_equalizer(&d).unwrap();
        assert_eq!((raw.ambient_dim(), raw.dim(), blocks.len()), (12, 3, 3));
        let d = build("nonexample", &[]).unwrap().diagram;
        assert_eq!(raw_equalizer(&d).unwrap().0.dim(), 0);
    }

    #[test]
    fn weld_orders_agree() {
        for name in ["rigid_bar", "linked_revolutes", "star_tree", "sliding_hinge"] {
            let d = build(name, &[]).unwrap().diagram;
            let orders = admissible_orders(&d, 6, 0);
            assert!(!orders.is_empty());
            for o in &orders[1..] {
                let r = weld_order_invariance_check(&d, &orders[0], o, 6, 6, 0).unwrap();
                assert!(r.holds(1e-9), "{} {:?}: {:?}", name, o, r);
            }
        }
    }

    #[test]
    fn linked_revolutes_two_explicit_orders() {
        let d = build("linked_revolutes", &[]).unwrap().diagram;
        let o1 = vec![("A1".into(), "A2".into()), ("A1A2".into(), "A3".into())];
        let o2 = vec![("A2".into(), "A3".into()), ("A1".into(), "A2A3".into())];
        let r = weld_order_invariance_check(&d, &o1, &o2, 10, 6, 2).unwrap();
        assert_eq!(r.dims, (5, 5));
        assert!(r.max_leg_error < 1e-9);
    }
}
