use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::acm::ext::common;
use crate::acm::{AcmDiagram, ActorId, Block, Skeleton};
use crate::geomcore::submersion::{check_surjective_submersion, SubmersionVerdict};
use crate::geomcore::{derive_seed, SmoothMap};

use super::ReduceError;

/// One weld: the diagram before and after merging `pair` into `new_actor`.
#[derive(Clone, Debug)]
pub struct WeldStep {
    pub pair: (ActorId, ActorId),
    pub new_actor: ActorId,
    pub before: AcmDiagram,
    pub after: AcmDiagram,
}

/// Replace `i` and `j` by one actor whose space is their interaction.
///
/// The welded actor keeps every constraint of `i` and `j`; its constraint
/// maps go through the projection to whichever of the two carries the
/// constraint (`i` first, in id order). Interactions with the remaining
/// actors are rebuilt and their shared-constraint maps checked on samples;
/// the first actor for which that check fails is reported.
pub fn weld(d: &AcmDiagram, i: &ActorId, j: &ActorId, n_samples: usize, seed: u64) -> Result<WeldStep, ReduceError> {
    let (x, y) = if i < j { (i, j) } else { (j, i) };
    let fp = d.interaction(x, y)?;
    let (shape, id) = d.shape().weld(x, y)?;
    let space = Arc::new(fp.space.renamed(id.as_str()));
    let left = fp.left.with_source(Arc::clone(&space))?;
    let right = fp.right.with_source(Arc::clone(&space))?;

    let mut actor_spaces = d.actor_spaces().clone();
    actor_spaces.remove(x);
    actor_spaces.remove(y);
    actor_spaces.insert(id.clone(), Arc::clone(&space));

    let mut maps: BTreeMap<_, SmoothMap> =
        d.maps().iter().filter(|((a, _), _)| a != x && a != y).map(|(k, v)| (k.clone(), v.clone())).collect();
    for c in shape.constraints_of(&id)?.iter().filter(|c| !c.is_star()) {
        let (owner, proj) = if d.shape().constraints_of(x)?.contains(c) { (x, &left) } else { (y, &right) };
        let f = d.constraint_map(owner, c)?;
        maps.insert((id.clone(), c.clone()), proj.then(&f)?);
    }

    let mut blocks = d.all_blocks().clone();
    let bx = blocks.remove(x).unwrap_or_default();
    let by = blocks.remove(y).unwrap_or_default();
    let shift = d.actor_space(x)?.ambient_dim();
    let mut merged = bx;
    merged.extend(by.into_iter().map(|b| Block { start: b.start + shift, ..b }));
    blocks.insert(id.clone(), merged);

    let after = AcmDiagram::assemble(actor_spaces, d.constraint_spaces().clone(), maps, blocks)?;
    for (k, other) in after.actors().iter().filter(|a| **a != id).enumerate() {
        if common(after.shape(), &id, other, false)?.is_empty() {
            continue;
        }
        for (t, (a, b)) in [(&id, other), (other, &id)].into_iter().enumerate() {
            let m = after.pair_morphism(a, b)?;
            let v = check_surjective_submersion(&m, n_samples, derive_seed(seed, 2 * k as u64 + t as u64))?;
            if !v.is_verified() {
                return Err(ReduceError::WeldObstruction { witness: other.clone(), verdict: Box::new(v) });
            }
        }
    }
    Ok(WeldStep { pair: (x.clone(), y.clone()), new_actor: id, before: d.clone(), after })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptStep {
    pub pair: (ActorId, ActorId),
    pub new_actor: ActorId,
    pub apex_ambient: usize,
    pub apex_dim: usize,
}

/// Replayable record of a reduction chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTranscript {
    pub seed: u64,
    pub n_samples: usize,
    pub steps: Vec<TranscriptStep>,
}

#[derive(Clone, Debug)]
pub struct ReductionChain {
    pub initial: AcmDiagram,
    pub steps: Vec<WeldStep>,
    pub seed: u64,
    pub n_samples: usize,
}

impl ReductionChain {
    pub fn new(initial: AcmDiagram, n_samples: usize, seed: u64) -> ReductionChain {
        ReductionChain { initial, steps: vec![], seed, n_samples }
    }

    pub fn current(&self) -> &AcmDiagram {
        self.steps.last().map(|s| &s.after).unwrap_or(&self.initial)
    }

    pub fn push_weld(&mut self, i: &ActorId, j: &ActorId) -> Result<&WeldStep, ReduceError> {
        let tag = self.steps.len() as u64;
        let step = weld(self.current(), i, j, self.n_samples, derive_seed(self.seed, tag))?;
        self.steps.push(step);
        Ok(self.steps.last().expect("just pushed"))
    }

    pub fn is_complete(&self) -> bool {
        self.current().shape().n_actors() <= 1
    }

    pub fn transcript(&self) -> ChainTranscript {
        let steps = self
            .steps
            .iter()
            .map(|s| {
                let sp = s.after.actor_space(&s.new_actor).expect("welded actor");
                TranscriptStep {
                    pair: s.pair.clone(),
                    new_actor: s.new_actor.clone(),
                    apex_ambient: sp.ambient_dim(),
                    apex_dim: sp.dim(),
                }
            })
            .collect();
        ChainTranscript { seed: self.seed, n_samples: self.n_samples, steps }
    }

    /// Re-run the welds of `t` and check every step reproduces the record.
    pub fn replay(initial: &AcmDiagram, t: &ChainTranscript) -> Result<ReductionChain, ReduceError> {
        let mut chain = ReductionChain::new(initial.clone(), t.n_samples, t.seed);
        for (k, rec) in t.steps.iter().enumerate() {
            let step = chain.push_weld(&rec.pair.0, &rec.pair.1)?;
            let sp = step.after.actor_space(&step.new_actor)?;
            if step.new_actor != rec.new_actor || sp.ambient_dim() != rec.apex_ambient || sp.dim() != rec.apex_dim {
                return Err(ReduceError::ReplayMismatch { step: k });
            }
        }
        Ok(chain)
    }

    /// Weld the first two actors until one remains.
    pub fn weld_in_order(initial: &AcmDiagram, n_samples: usize, seed: u64) -> Result<ReductionChain, ReduceError> {
        let mut chain = ReductionChain::new(initial.clone(), n_samples, seed);
        while !chain.is_complete() {
            let actors = chain.current().actors();
            chain.push_weld(&actors[0], &actors[1])?;
        }
        Ok(chain)
    }

    /// Weld along a given order of pairs (ids as they exist at each step).
    pub fn weld_along(initial: &AcmDiagram, order: &[(ActorId, ActorId)], n_samples: usize, seed: u64) -> Result<ReductionChain, ReduceError> {
        let mut chain = ReductionChain::new(initial.clone(), n_samples, seed);
        for (a, b) in order {
            chain.push_weld(a, b)?;
        }
        Ok(chain)
    }
}

/// Reduce a diagram with acyclic skeleton: repeatedly weld the least leaf
/// into its neighbour, then merge the remaining components in id order.
pub fn reduce_acyclic(d: &AcmDiagram, n_samples: usize, seed: u64) -> Result<ReductionChain, ReduceError> {
    if !Skeleton::of(d.shape()).is_acyclic() {
        return Err(ReduceError::NotAcyclic);
    }
    let mut chain = ReductionChain::new(d.clone(), n_samples, seed);
    while !chain.is_complete() {
        let sk = Skeleton::of(chain.current().shape());
        let leaf = sk.vertices.iter().find(|v| sk.degree(v) == 1).cloned();
        let (a, b) = match leaf {
            Some(l) => {
                let n = sk.neighbours(&l).remove(0);
                (l, n)
            }
            None => (sk.vertices[0].clone(), sk.vertices[1].clone()),
        };
        chain.push_weld(&a, &b)?;
    }
    Ok(chain)
}

/// Every complete weld order, failing welds pruned.
pub fn admissible_orders(d: &AcmDiagram, n_samples: usize, seed: u64) -> Vec<Vec<(ActorId, ActorId)>> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    explore(d, n_samples, seed, &mut prefix, &mut out);
    out
}

fn explore(
    d: &AcmDiagram,
    n: usize,
    seed: u64,
    prefix: &mut Vec<(ActorId, ActorId)>,
    out: &mut Vec<Vec<(ActorId, ActorId)>>,
) {
    if d.shape().n_actors() <= 1 {
        out.push(prefix.clone());
        return;
    }
    let tag = prefix.len() as u64;
    for (a, b) in d.shape().interactions() {
        if let Ok(step) = weld(d, &a, &b, n, derive_seed(seed, tag)) {
            prefix.push((a, b));
            explore(&step.after, n, seed, prefix, out);
            prefix.pop();
        }
    }
}

pub fn verdict_summary(v: &SubmersionVerdict) -> String {
    match v {
        SubmersionVerdict::DimensionObstructed { source_dim, target_dim } => {
            format!("dimension obstructed ({} < {})", source_dim, target_dim)
        }
        SubmersionVerdict::RankDeficientWitness { rank, required, .. } => format!("rank {} < {}", rank, required),
        SubmersionVerdict::CoverageGap { .. } => "no preimage found for a sampled target".into(),
        SubmersionVerdict::SampledVerified { n_samples } => format!("verified on {} samples", n_samples),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acm::ext::ext_set;
    use crate::linkcat::build;

    #[test]
    fn rigid_bar_welds_to_one_free_actor() {
        let d = build("rigid_bar", &[]).unwrap().diagram;
        let s = weld(&d, &"A".into(), &"B".into(), 8, 0).unwrap();
        assert_eq!(s.new_actor, ActorId::new("AB"));
        assert_eq!(s.after.shape().n_actors(), 1);
        assert_eq!(s.after.actor_space(&s.new_actor).unwrap().dim(), 3);
        assert!(ext_set(s.after.shape(), &s.new_actor, false).unwrap().is_empty());
    }

    #[test]
    fn linked_revolutes_weld_keeps_external_hinge() {
        let d = build("linked_revolutes", &[]).unwrap().diagram;
        let s = weld(&d, &"A1".into(), &"A2".into(), 8, 0).unwrap();
        let id = ActorId::new("A1A2");
        assert_eq!(s.after.actor_space(&id).unwrap().dim(), 4);
        let ext: Vec<_> = ext_set(s.after.shape(), &id, false).unwrap().into_iter().collect();
        assert_eq!(ext, vec!["C23".into()]);
        assert_eq!(s.after.constraint_space(&"C23".into()).unwrap().dim(), 2);
    }

    #[test]
    fn acyclic_reductions() {
        let lr = reduce_acyclic(&build("linked_revolutes", &[]).unwrap().diagram, 8, 0).unwrap();
        assert_eq!(lr.steps.len(), 2);
        let t = lr.current();
        assert_eq!(t.actor_space(&t.actors()[0]).unwrap().dim(), 5);

        let single = build("rigid_bar", &[]).unwrap().diagram.restrict(&["A".into()], &["C".into()]).unwrap();
        assert!(reduce_acyclic(&single, 8, 0).unwrap().steps.is_empty());

        let path = reduce_acyclic(&build("bar_path", &[]).unwrap().diagram, 8, 0).unwrap();
        let t = path.current();
        assert_eq!(t.actor_space(&t.actors()[0]).unwrap().dim(), 3);

        let tri = build("three_bar", &[]).unwrap().diagram;
        assert!(matches!(reduce_acyclic(&tri, 8, 0), Err(ReduceError::NotAcyclic)));
    }

    #[test]
    fn transcript_replays_and_detects_tampering() {
        let d = build("sliding_hinge", &[]).unwrap().diagram;
        let chain = reduce_acyclic(&d, 8, 5).unwrap();
        let t = chain.transcript();
        let json = serde_json::to_string(&t).unwrap();
        let back: ChainTranscript = serde_json::from_str(&json).unwrap();
        let again = ReductionChain::replay(&d, &back).unwrap();
        assert_eq!(again.transcript(), t);
        let a = chain.current().actor_space(&chain.current().actors()[0]).unwrap();
        let b = again.current().actor_space(&again.current().actors()[0]).unwrap();
        assert_eq!(a, b);

        let mut bad = t.clone();
        bad.steps[0].apex_dim += 1;
        assert!(matches!(ReductionChain::replay(&d, &bad), Err(ReduceError::ReplayMismatch { step: 0 })));
    }

    #[test]
    fn welding_the_ends_of_a_path_first_is_pruned() {
        let d = build("linked_revolutes", &[]).unwrap().diagram;
        let orders = admissible_orders(&d, 6, 0);
        // Welding the two ends first leaves A2 mapping onto both hinges at
        // once, which cannot be a submersion; that branch is pruned.
        assert_eq!(orders.len(), 2);
        assert!(orders.iter().all(|o| o[0] != ("A1".into(), "A3".into())));
        assert!(orders.iter().all(|o| o.len() == 2));
    }
}
