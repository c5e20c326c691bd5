use std::collections::BTreeMap;

use serde::Serialize;

use super::ext::common;
use super::shape::{ActorId, ActorIndexCategory};

/// Actor graph: an edge joins two actors that share a constraint other
/// than the star.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Skeleton {
    pub vertices: Vec<ActorId>,
    pub edges: Vec<(ActorId, ActorId)>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }
    /// False when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

impl Skeleton {
    pub fn of(shape: &ActorIndexCategory) -> Skeleton {
        let vertices = shape.actor_list();
        let edges = shape
            .interactions()
            .into_iter()
            .filter(|(a, b)| !common(shape, a, b, false).expect("actors of shape").is_empty())
            .collect();
        Skeleton { vertices, edges }
    }

    fn index(&self) -> BTreeMap<&ActorId, usize> {
        self.vertices.iter().enumerate().map(|(k, v)| (v, k)).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        let idx = self.index();
        let mut uf = UnionFind::new(self.vertices.len());
        self.edges.iter().all(|(a, b)| uf.union(idx[a], idx[b]))
    }

    /// Connected components, each sorted, ordered by their least vertex.
    pub fn components(&self) -> Vec<Vec<ActorId>> {
        let idx = self.index();
        let mut uf = UnionFind::new(self.vertices.len());
        for (a, b) in &self.edges {
            uf.union(idx[a], idx[b]);
        }
        let mut groups: BTreeMap<usize, Vec<ActorId>> = BTreeMap::new();
        for (k, v) in self.vertices.iter().enumerate() {
            groups.entry(uf.find(k)).or_default().push(v.clone());
        }
        groups.into_values().collect()
    }

    pub fn degree(&self, v: &ActorId) -> usize {
        self.edges.iter().filter(|(a, b)| a == v || b == v).count()
    }

    pub fn neighbours(&self, v: &ActorId) -> Vec<ActorId> {
        self.edges
            .iter()
            .filter_map(|(a, b)| {
                if a == v {
                    Some(b.clone())
                } else if b == v {
                    Some(a.clone())
                } else {
                    None
                }
            })
            .collect()
    }

    /// Graph with the edge `a`-`b` contracted into `merged`.
    pub fn contract(&self, a: &ActorId, b: &ActorId, merged: &ActorId) -> Skeleton {
        let rename = |v: &ActorId| if v == a || v == b { merged.clone() } else { v.clone() };
        let mut vertices: Vec<ActorId> = self.vertices.iter().filter(|v| *v != a && *v != b).cloned().collect();
        vertices.push(merged.clone());
        vertices.sort();
        let mut edges: Vec<(ActorId, ActorId)> = self
            .edges
            .iter()
            .map(|(x, y)| (rename(x), rename(y)))
            .filter(|(x, y)| x != y)
            .map(|(x, y)| if x <= y { (x, y) } else { (y, x) })
            .collect();
        edges.sort();
        edges.dedup();
        Skeleton { vertices, edges }
    }
}
