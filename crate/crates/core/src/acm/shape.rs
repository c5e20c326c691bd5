use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AcmError;

/// Id of the distinguished constraint shared by every actor.
pub const STAR: &str = "*";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActorId(pub String);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstraintId(pub String);

impl ActorId {
    pub fn new(s: impl Into<String>) -> ActorId {
        ActorId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl ConstraintId {
    pub fn new(s: impl Into<String>) -> ConstraintId {
        ConstraintId(s.into())
    }
    pub fn star() -> ConstraintId {
        ConstraintId(STAR.to_string())
    }
    pub fn is_star(&self) -> bool {
        self.0 == STAR
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ActorId {
    fn from(s: &str) -> Self {
        ActorId::new(s)
    }
}

impl From<&str> for ConstraintId {
    fn from(s: &str) -> Self {
        ConstraintId::new(s)
    }
}

/// An object of the actor index category.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Index {
    Constraint(ConstraintId),
    Actor(ActorId),
    /// Unordered pair, stored sorted.
    Interaction(ActorId, ActorId),
}

impl Index {
    pub fn interaction(a: &ActorId, b: &ActorId) -> Index {
        if a <= b {
            Index::Interaction(a.clone(), b.clone())
        } else {
            Index::Interaction(b.clone(), a.clone())
        }
    }
}

/// Finite poset of constraints, actors and pairwise interactions, generated
/// by `c <= i` for `c` in `C_i` and `i <= {i, j}`. Every `C_i` contains the
/// star constraint, and every constraint belongs to some `C_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActorIndexCategory {
    members: BTreeMap<ActorId, BTreeSet<ConstraintId>>,
    constraints: BTreeSet<ConstraintId>,
}

impl ActorIndexCategory {
    pub fn new<I, C>(members: I) -> Result<ActorIndexCategory, AcmError>
    where
        I: IntoIterator<Item = (ActorId, C)>,
        C: IntoIterator<Item = ConstraintId>,
    {
        let mut out = BTreeMap::new();
        let mut constraints = BTreeSet::from([ConstraintId::star()]);
        for (a, cs) in members {
            if a.as_str() == STAR || a.as_str().is_empty() {
                return Err(AcmError::ReservedId(a.0));
            }
            let mut set: BTreeSet<ConstraintId> = cs.into_iter().collect();
            set.insert(ConstraintId::star());
            constraints.extend(set.iter().cloned());
            if out.insert(a.clone(), set).is_some() {
                return Err(AcmError::DuplicateId(a.0));
            }
        }
        Ok(ActorIndexCategory { members: out, constraints })
    }

    pub fn actors(&self) -> impl Iterator<Item = &ActorId> {
        self.members.keys()
    }

    pub fn actor_list(&self) -> Vec<ActorId> {
        self.members.keys().cloned().collect()
    }

    pub fn n_actors(&self) -> usize {
        self.members.len()
    }

    pub fn has_actor(&self, a: &ActorId) -> bool {
        self.members.contains_key(a)
    }

    /// All constraint ids, star included.
    pub fn constraints(&self) -> &BTreeSet<ConstraintId> {
        &self.constraints
    }

    pub fn membership(&self) -> &BTreeMap<ActorId, BTreeSet<ConstraintId>> {
        &self.members
    }

    /// `C_i`, star included.
    pub fn constraints_of(&self, a: &ActorId) -> Result<&BTreeSet<ConstraintId>, AcmError> {
        self.members.get(a).ok_or_else(|| AcmError::UnknownActor(a.0.clone()))
    }

    pub fn actors_with(&self, c: &ConstraintId) -> Vec<ActorId> {
        self.members.iter().filter(|(_, cs)| cs.contains(c)).map(|(a, _)| a.clone()).collect()
    }

    /// Unordered pairs of distinct actors, sorted.
    pub fn interactions(&self) -> Vec<(ActorId, ActorId)> {
        let actors = self.actor_list();
        let mut out = Vec::new();
        for (k, a) in actors.iter().enumerate() {
            for b in &actors[k + 1..] {
                out.push((a.clone(), b.clone()));
            }
        }
        out
    }

    pub fn objects(&self) -> Vec<Index> {
        let mut out: Vec<Index> = self.constraints.iter().cloned().map(Index::Constraint).collect();
        out.extend(self.members.keys().cloned().map(Index::Actor));
        out.extend(self.interactions().into_iter().map(|(a, b)| Index::Interaction(a, b)));
        out
    }

    /// The order relation, including the transitive consequences.
    pub fn leq(&self, x: &Index, y: &Index) -> bool {
        if x == y {
            return true;
        }
        let has = |a: &ActorId, c: &ConstraintId| self.members.get(a).is_some_and(|s| s.contains(c));
        match (x, y) {
            (Index::Constraint(c), Index::Actor(a)) => has(a, c),
            (Index::Constraint(c), Index::Interaction(a, b)) => has(a, c) || has(b, c),
            (Index::Actor(i), Index::Interaction(a, b)) => i == a || i == b,
            _ => false,
        }
    }

    /// Canonical id of the actor obtained by welding `a` and `b`.
    pub fn welded_id(&self, a: &ActorId, b: &ActorId) -> ActorId {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        let mut id = format!("{}{}", x.0, y.0);
        while self.members.contains_key(&ActorId(id.clone())) {
            id.push('\'');
        }
        ActorId(id)
    }

    /// The welded shape: `a` and `b` replaced by one actor carrying
    /// `C_a` union `C_b`.
    pub fn weld(&self, a: &ActorId, b: &ActorId) -> Result<(ActorIndexCategory, ActorId), AcmError> {
        if a == b {
            return Err(AcmError::SelfWeld(a.0.clone()));
        }
        let ca = self.constraints_of(a)?;
        let cb = self.constraints_of(b)?;
        let id = self.welded_id(a, b);
        let mut members = self.members.clone();
        members.remove(a);
        members.remove(b);
        members.insert(id.clone(), ca.union(cb).cloned().collect());
        Ok((ActorIndexCategory { members, constraints: self.constraints.clone() }, id))
    }

    /// Random shape for property checks: `n_actors` actors drawing from
    /// `n_constraints` constraints, each membership with probability `p`.
    pub fn random<R: Rng>(rng: &mut R, n_actors: usize, n_constraints: usize, p: f64) -> ActorIndexCategory {
        let members = (0..n_actors).map(|i| {
            let cs: Vec<ConstraintId> = (0..n_constraints)
                .filter(|_| rng.gen_bool(p))
                .map(|k| ConstraintId(format!("c{}", k)))
                .collect();
            (ActorId(format!("a{}", i)), cs)
        });
        let members: Vec<_> = members.collect();
        ActorIndexCategory::new(members).expect("generated ids are distinct")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_revolutes() -> ActorIndexCategory {
        ActorIndexCategory::new([
            (ActorId::new("a1"), vec![ConstraintId::new("c12")]),
            (ActorId::new("a2"), vec![ConstraintId::new("c12"), ConstraintId::new("c23")]),
            (ActorId::new("a3"), vec![ConstraintId::new("c23")]),
        ])
        .unwrap()
    }

    #[test]
    fn order_is_a_partial_order() {
        let s = two_revolutes();
        let obj = s.objects();
        assert_eq!(obj.len(), 3 + 3 + 3);
        for x in &obj {
            assert!(s.leq(x, x));
            for y in &obj {
                if x != y && s.leq(x, y) {
                    assert!(!s.leq(y, x), "antisymmetry {:?} {:?}", x, y);
                }
                for z in &obj {
                    if s.leq(x, y) && s.leq(y, z) {
                        assert!(s.leq(x, z), "transitivity");
                    }
                }
            }
        }
    }

    #[test]
    fn star_below_everything_but_constraints() {
        let s = two_revolutes();
        let star = Index::Constraint(ConstraintId::star());
        for o in s.objects() {
            if !matches!(o, Index::Constraint(_)) {
                assert!(s.leq(&star, &o));
            }
        }
    }

    #[test]
    fn weld_unions_constraints() {
        let s = two_revolutes();
        let (w, id) = s.weld(&"a2".into(), &"a1".into()).unwrap();
        assert_eq!(id.as_str(), "a1a2");
        assert_eq!(w.n_actors(), 2);
        let c = w.constraints_of(&id).unwrap();
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn reserved_and_duplicate_ids() {
        assert!(matches!(
            ActorIndexCategory::new([(ActorId::new("*"), Vec::<ConstraintId>::new())]),
            Err(AcmError::ReservedId(_))
        ));
        assert!(matches!(
            ActorIndexCategory::new([
                (ActorId::new("a"), Vec::<ConstraintId>::new()),
                (ActorId::new("a"), Vec::new())
            ]),
            Err(AcmError::DuplicateId(_))
        ));
    }
}
