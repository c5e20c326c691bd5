//! JSON manifests: a diagram with its spaces and maps as expression
//! strings, plus optional daemons and motion sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acm::{AcmError, ActorId, ConstraintId, DiagramBuilder};
use crate::geomcore::{parse_expr, spaces, Expr, GeomError, ParseError, Space};
use crate::liecls::{Group, MotionSet};
use crate::linkcat::{Daemon, LinkError, LinkageBuild};
use crate::reduce::{ConfigurationSpace, UnionDecl};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("malformed manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {source}")]
    Expr { context: String, source: ParseError },
    #[error("invalid manifest: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Acm(#[from] AcmError),
    #[error(transparent)]
    Link(#[from] LinkError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// Dimension of the motion group acting on the actors; inferred from
    /// the actor spaces if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_dim: Option<usize>,
    pub spaces: Vec<SpaceDecl>,
    pub actors: Vec<ActorDecl>,
    pub constraints: Vec<ConstraintDecl>,
    pub morphisms: Vec<MorphismDecl>,
    /// Two parts for the gluing route of the limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub union: Option<UnionEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub daemons: Vec<DaemonDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub motion_sets: Vec<MotionSetEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDecl {
    pub name: String,
    pub coords: Vec<String>,
    #[serde(default)]
    pub residuals: Vec<String>,
    pub dim: usize,
    /// Nine coordinate names each, a row-major matrix with `det > 0`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rotation_blocks: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorDecl {
    pub id: String,
    pub space: String,
    pub constraints: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDecl {
    pub id: String,
    pub space: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDecl {
    pub actor: String,
    pub constraint: String,
    pub components: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnionEntry {
    pub left_actors: Vec<String>,
    pub left_constraints: Vec<String>,
    pub right_actors: Vec<String>,
    pub right_constraints: Vec<String>,
}

/// A path in the product of the constraints `lambda`, expressions in `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaemonDecl {
    pub name: String,
    pub lambda: Vec<String>,
    pub path: Vec<String>,
    pub interval: [f64; 2],
    #[serde(default)]
    pub smoothness: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionSetEntry {
    Subgroup { group: Group, basis: Vec<Vec<f64>> },
    SlidingHinge { group: Group, u_h: [f64; 3], u_s: [f64; 3] },
    Torus2 { group: Group, u1: [f64; 3], u2: [f64; 3] },
    Cylindrical { group: Group, axis: [f64; 3] },
}

impl MotionSetEntry {
    pub fn split(&self) -> (Group, MotionSet) {
        match self.clone() {
            MotionSetEntry::Subgroup { group, basis } => (group, MotionSet::Subgroup { basis }),
            MotionSetEntry::SlidingHinge { group, u_h, u_s } => (group, MotionSet::SlidingHinge { u_h, u_s }),
            MotionSetEntry::Torus2 { group, u1, u2 } => (group, MotionSet::Torus2 { u1, u2 }),
            MotionSetEntry::Cylindrical { group, axis } => (group, MotionSet::Cylindrical { axis }),
        }
    }

    pub fn join(group: Group, set: MotionSet) -> MotionSetEntry {
        match set {
            MotionSet::Subgroup { basis } => MotionSetEntry::Subgroup { group, basis },
            MotionSet::SlidingHinge { u_h, u_s } => MotionSetEntry::SlidingHinge { group, u_h, u_s },
            MotionSet::Torus2 { u1, u2 } => MotionSetEntry::Torus2 { group, u1, u2 },
            MotionSet::Cylindrical { axis } => MotionSetEntry::Cylindrical { group, axis },
        }
    }
}

/// Parse expressions over `names`; other identifiers may name `params`,
/// which enter as constants. Coordinates shadow parameters.
fn exprs(src: &[String], names: &[String], params: &BTreeMap<String, f64>, context: &str) -> Result<Vec<Expr>, ManifestError> {
    let mut all = names.to_vec();
    let mut with: Vec<Expr> = (0..names.len()).map(Expr::var).collect();
    for (k, v) in params.iter().filter(|(k, _)| !names.contains(k)) {
        all.push(k.clone());
        with.push(Expr::c(*v));
    }
    src.iter()
        .enumerate()
        .map(|(k, s)| {
            parse_expr(s, &all)
                .map(|e| e.substitute(&with))
                .map_err(|e| ManifestError::Expr { context: format!("{} component {}", context, k), source: e })
        })
        .collect()
}

fn print(es: &[Expr], names: &[String]) -> Vec<String> {
    es.iter().map(|e| e.display(names).to_string()).collect()
}

/// Standard spaces get their usual names in exported manifests.
fn canonical_name(s: &Space) -> String {
    let known = [
        spaces::se2("SE2"),
        spaces::se3("SE3"),
        spaces::r2("R2"),
        spaces::circle("S1"),
        spaces::line_heading("RxS1"),
        spaces::oriented_lines("Lines"),
    ];
    match known.iter().find(|k| k.same_manifold(s) && k.coords() == s.coords()) {
        Some(k) => k.name().to_string(),
        None => s.name().to_string(),
    }
}

/// Relative-motion sets of the two-actor joints in the catalog.
fn catalog_motion_sets(b: &LinkageBuild) -> Vec<MotionSetEntry> {
    let e = |i: usize| {
        let mut v = vec![0.0; 3];
        v[i] = 1.0;
        v
    };
    match b.name.as_str() {
        "rigid_bar" => vec![MotionSetEntry::Subgroup { group: Group::SE2, basis: vec![] }],
        "revolute" => vec![MotionSetEntry::Subgroup { group: Group::SE2, basis: vec![e(0)] }],
        "slider" => vec![MotionSetEntry::Subgroup { group: Group::SE2, basis: vec![e(1)] }],
        "sliding_hinge" => vec![MotionSetEntry::SlidingHinge { group: Group::SE2, u_h: [0.0, 0.0, 1.0], u_s: [1.0, 0.0, 0.0] }],
        "cylindrical" => {
            let p = |k: &str| b.params.get(k).copied().unwrap_or(0.0);
            vec![MotionSetEntry::Cylindrical { group: Group::SE3, axis: [p("u1"), p("u2"), p("u3")] }]
        }
        _ => vec![],
    }
}

fn catalog_daemons(b: &LinkageBuild) -> Vec<DaemonDecl> {
    match b.name.as_str() {
        "pendulum" => vec![DaemonDecl {
            name: "pin".into(),
            lambda: vec!["Z".into()],
            path: vec!["0".into(), "0".into()],
            interval: [0.0, 1.0],
            smoothness: 0,
        }],
        _ => vec![],
    }
}

impl Manifest {
    pub fn from_json(src: &str) -> Result<Manifest, ManifestError> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifests serialize")
    }

    /// Manifest of a built linkage, with its catalog daemons and motion
    /// sets.
    pub fn from_build(b: &LinkageBuild) -> Manifest {
        let d = &b.diagram;
        let mut decls: Vec<(SpaceDecl, Space)> = Vec::new();
        let mut name_of = |s: &Space| -> String {
            if let Some((decl, _)) = decls.iter().find(|(_, t)| t.same_manifold(s) && t.coords() == s.coords()) {
                return decl.name.clone();
            }
            let mut name = canonical_name(s);
            while decls.iter().any(|(dcl, _)| dcl.name == name) {
                name.push('\'');
            }
            let coords = s.coords().to_vec();
            let rotation_blocks = s.rotation_blocks().iter().map(|blk| blk.iter().map(|&i| coords[i].clone()).collect()).collect();
            let decl = SpaceDecl { name: name.clone(), residuals: print(s.residuals(), &coords), coords, dim: s.dim(), rotation_blocks };
            decls.push((decl, s.clone()));
            name
        };
        let constraints: Vec<ConstraintDecl> =
            d.constraint_spaces().iter().map(|(c, s)| ConstraintDecl { id: c.0.clone(), space: name_of(s) }).collect();
        let actors: Vec<ActorDecl> = d
            .actor_spaces()
            .iter()
            .map(|(a, s)| ActorDecl {
                id: a.0.clone(),
                space: name_of(s),
                constraints: d.shape().constraints_of(a).expect("actor of the diagram").iter().filter(|c| !c.is_star()).map(|c| c.0.clone()).collect(),
            })
            .collect();
        let morphisms = d
            .maps()
            .iter()
            .map(|((a, c), m)| MorphismDecl { actor: a.0.clone(), constraint: c.0.clone(), components: print(m.components(), m.source().coords()) })
            .collect();
        let union = b.union.as_ref().map(|u| {
            let s = |v: &[ActorId]| v.iter().map(|x| x.0.clone()).collect();
            let t = |v: &[ConstraintId]| v.iter().map(|x| x.0.clone()).collect();
            UnionEntry {
                left_actors: s(&u.left_actors),
                left_constraints: t(&u.left_constraints),
                right_actors: s(&u.right_actors),
                right_constraints: t(&u.right_constraints),
            }
        });
        Manifest {
            name: Some(b.name.clone()),
            params: b.params.clone(),
            group_dim: Some(b.group_dim),
            spaces: decls.into_iter().map(|(s, _)| s).collect(),
            actors,
            constraints,
            morphisms,
            union,
            daemons: catalog_daemons(b),
            motion_sets: catalog_motion_sets(b),
        }
    }

    fn space(&self, name: &str) -> Result<Space, ManifestError> {
        let decl = self.spaces.iter().find(|s| s.name == name).ok_or_else(|| ManifestError::Invalid(format!("unknown space {:?}", name)))?;
        let residuals = exprs(&decl.residuals, &decl.coords, &self.params, &format!("space {} residual", name))?;
        let mut blocks = Vec::new();
        for blk in &decl.rotation_blocks {
            if blk.len() != 9 {
                return Err(ManifestError::Invalid(format!("space {}: rotation block needs 9 coordinates", name)));
            }
            let mut idx = [0usize; 9];
            for (k, c) in blk.iter().enumerate() {
                idx[k] = decl.coords.iter().position(|x| x == c).ok_or_else(|| ManifestError::Invalid(format!("space {}: unknown coordinate {:?}", name, c)))?;
            }
            blocks.push(idx);
        }
        Ok(Space::new(name, decl.coords.clone(), residuals, decl.dim)?.with_rotation_blocks(blocks)?)
    }

    /// The linkage described by the manifest.
    pub fn to_build(&self) -> Result<LinkageBuild, ManifestError> {
        let mut names = BTreeSet::new();
        for s in &self.spaces {
            if !names.insert(&s.name) {
                return Err(ManifestError::Invalid(format!("duplicate space {:?}", s.name)));
            }
        }
        let mut builder = DiagramBuilder::new();
        let mut actor_spaces = BTreeMap::new();
        for a in &self.actors {
            let s = self.space(&a.space)?;
            actor_spaces.insert(a.id.clone(), s.coords().to_vec());
            builder = builder.actor(&a.id, s);
        }
        for c in &self.constraints {
            builder = builder.constraint(&c.id, self.space(&c.space)?);
        }
        let mut declared: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for m in &self.morphisms {
            let coords = actor_spaces.get(&m.actor).ok_or_else(|| ManifestError::Invalid(format!("morphism from unknown actor {:?}", m.actor)))?;
            let comps = exprs(&m.components, coords, &self.params, &format!("morphism {} -> {}", m.actor, m.constraint))?;
            builder = builder.map(&m.actor, &m.constraint, comps);
            declared.entry(m.actor.as_str()).or_default().insert(m.constraint.as_str());
        }
        for a in &self.actors {
            let listed: BTreeSet<&str> = a.constraints.iter().map(|s| s.as_str()).collect();
            if listed != declared.remove(a.id.as_str()).unwrap_or_default() {
                return Err(ManifestError::Invalid(format!("actor {}: constraint list does not match its morphisms", a.id)));
            }
        }
        let diagram = builder.build()?;
        let group_dim = match self.group_dim {
            Some(n) => Some(n),
            None => [Group::SE2, Group::SE3].into_iter().find(|g| diagram.actor_spaces().values().all(|s| s.same_manifold(&g.space()))).map(Group::dim),
        };
        let union = self.union.as_ref().map(|u| {
            let a = |v: &[String]| v.iter().map(ActorId::new).collect();
            let c = |v: &[String]| v.iter().map(ConstraintId::new).collect();
            UnionDecl {
                left_actors: a(&u.left_actors),
                left_constraints: c(&u.left_constraints),
                right_actors: a(&u.right_actors),
                right_constraints: c(&u.right_constraints),
            }
        });
        for d in &self.daemons {
            self.daemon_path(d)?;
        }
        for m in &self.motion_sets {
            let (g, set) = m.split();
            crate::liecls::motion_set_subgroup_check(g, &set, 0, 0).map_err(|e| ManifestError::Invalid(format!("motion set: {}", e)))?;
        }
        Ok(LinkageBuild {
            name: self.name.clone().unwrap_or_else(|| "manifest".into()),
            diagram,
            params: self.params.clone(),
            expected_dim: None,
            group_dim: group_dim.unwrap_or(0),
            union,
        })
    }

    fn daemon_path(&self, d: &DaemonDecl) -> Result<Vec<Expr>, ManifestError> {
        exprs(&d.path, &["t".to_string()], &self.params, &format!("daemon {} path", d.name))
    }

    /// Daemon `name` (or the only one) over the configuration space `system`.
    pub fn daemon(&self, name: Option<&str>, system: ConfigurationSpace) -> Result<Daemon, ManifestError> {
        let d = match name {
            Some(n) => self.daemons.iter().find(|d| d.name == n),
            None if self.daemons.len() == 1 => self.daemons.first(),
            None => None,
        }
        .ok_or_else(|| ManifestError::Invalid(format!("no daemon {:?} (have {})", name, self.daemons.len())))?;
        let lambda = d.lambda.iter().map(ConstraintId::new).collect();
        let mut daemon = Daemon::new(system, lambda, self.daemon_path(d)?, (d.interval[0], d.interval[1]))?;
        daemon.smoothness = d.smoothness;
        Ok(daemon)
    }
}
