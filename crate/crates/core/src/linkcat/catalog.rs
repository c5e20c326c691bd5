//! Builders for the standard planar and spatial linkages.
//!
//! Planar actors live in `SE(2)` as `(x, y, c, s)`: world position `p` and
//! heading `theta = (c, s)`, with `theta_perp = (-s, c)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::acm::{AcmDiagram, ActorId, ConstraintId, DiagramBuilder};
use crate::geomcore::{spaces, Expr, SmoothMap, Space};
use crate::reduce::UnionDecl;

use super::LinkError;

fn v(i: usize) -> Expr {
    Expr::var(i)
}

/// Position of a planar actor.
fn pos() -> Vec<Expr> {
    vec![v(0), v(1)]
}

/// `p + k * theta`.
fn pos_along(k: f64) -> Vec<Expr> {
    vec![v(0) + k * v(2), v(1) + k * v(3)]
}

/// `(p . theta_perp) theta_perp`, the component of `p` across the heading.
fn across_heading() -> Vec<Expr> {
    let y = Expr::neg(v(3)) * v(0) + v(2) * v(1);
    vec![Expr::neg(y.clone() * v(3)), y * v(2)]
}

#[derive(Clone, Debug)]
pub struct LinkageBuild {
    pub name: String,
    pub diagram: AcmDiagram,
    pub params: BTreeMap<String, f64>,
    /// Dimension of the configuration space, when known.
    pub expected_dim: Option<usize>,
    /// `dim SE(n)` of the ambient motion group.
    pub group_dim: usize,
    /// Two parts for the gluing route, for diagrams built as such a union.
    pub union: Option<UnionDecl>,
}

impl LinkageBuild {
    fn new(name: &str, diagram: AcmDiagram, params: &[(&str, f64)], expected_dim: Option<usize>, group_dim: usize) -> Self {
        LinkageBuild {
            name: name.into(),
            diagram,
            params: params.iter().map(|(k, x)| (k.to_string(), *x)).collect(),
            expected_dim,
            group_dim,
            union: None,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<f64, LinkError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(LinkError::BadParam(format!("{} must be positive, got {}", name, x)))
    }
}

/// Two actors whose headings are opposite and whose positions differ by
/// `L` along the heading of `A`.
pub fn rigid_bar(l: f64) -> Result<LinkageBuild, LinkError> {
    let l = positive("L", l)?;
    let mut pa = pos_along(l);
    pa.extend([v(2), v(3)]);
    let pb = vec![-v(0), -v(1), -v(2), -v(3)];
    let d = DiagramBuilder::new()
        .actor("A", spaces::se2("SE2"))
        .actor("B", spaces::se2("SE2"))
        .constraint("C", spaces::se2("SE2"))
        .map("A", "C", pa)
        .map("B", "C", pb)
        .build()?;
    Ok(LinkageBuild::new("rigid_bar", d, &[("L", l)], Some(3), 3))
}

/// Hinge: the point at distance `L` behind `A` along its heading is the
/// position of `B`.
pub fn revolute(l: f64) -> Result<LinkageBuild, LinkError> {
    let l = positive("L", l)?;
    let d = DiagramBuilder::new()
        .actor("A", spaces::se2("SE2"))
        .actor("B", spaces::se2("SE2"))
        .constraint("C", spaces::r2("R2"))
        .map("A", "C", pos_along(-l))
        .map("B", "C", pos())
        .build()?;
    Ok(LinkageBuild::new("revolute", d, &[("L", l)], Some(4), 3))
}

/// Opposite headings, free relative motion along the common heading line.
pub fn slider() -> Result<LinkageBuild, LinkError> {
    let mut pa = across_heading();
    pa.extend([v(2), v(3)]);
    let mut pb = across_heading();
    pb.extend([-v(2), -v(3)]);
    let d = DiagramBuilder::new()
        .actor("A", spaces::se2("SE2"))
        .actor("B", spaces::se2("SE2"))
        .constraint("C", spaces::line_heading("RxS1"))
        .map("A", "C", pa)
        .map("B", "C", pb)
        .build()?;
    Ok(LinkageBuild::new("slider", d, &[], Some(4), 3))
}

/// Chain `A1 - A2 - A3` of two hinges with bar lengths `L1`, `L2`.
pub fn linked_revolutes(l1: f64, l2: f64) -> Result<LinkageBuild, LinkError> {
    let (l1, l2) = (positive("L1", l1)?, positive("L2", l2)?);
    let d = DiagramBuilder::new()
        .actor("A1", spaces::se2("SE2"))
        .actor("A2", spaces::se2("SE2"))
        .actor("A3", spaces::se2("SE2"))
        .constraint("C12", spaces::r2("R2"))
        .constraint("C23", spaces::r2("R2"))
        .map("A1", "C12", pos_along(-l1))
        .map("A2", "C12", pos())
        .map("A2", "C23", pos_along(-l2))
        .map("A3", "C23", pos())
        .build()?;
    Ok(LinkageBuild::new("linked_revolutes", d, &[("L1", l1), ("L2", l2)], Some(5), 3))
}

/// Slider `A1 - A2` with a hinge from `A2` to a third actor `A3`.
pub fn sliding_hinge() -> Result<LinkageBuild, LinkError> {
    let mut p1 = across_heading();
    p1.extend([v(2), v(3)]);
    let mut p2 = across_heading();
    p2.extend([-v(2), -v(3)]);
    let d = DiagramBuilder::new()
        .actor("A1", spaces::se2("SE2"))
        .actor("A2", spaces::se2("SE2"))
        .actor("A3", spaces::se2("SE2"))
        .constraint("S", spaces::line_heading("RxS1"))
        .constraint("H", spaces::r2("R2"))
        .map("A1", "S", p1)
        .map("A2", "S", p2)
        .map("A2", "H", pos())
        .map("A3", "H", pos())
        .build()?;
    Ok(LinkageBuild::new("sliding_hinge", d, &[], Some(5), 3))
}

/// The axis map `SE(3) -> X`, `(a, R) -> (a - (a.v) v, v)` with `v = R u`.
pub fn axis_map(u: [f64; 3]) -> Vec<Expr> {
    let r = |i: usize, j: usize| v(3 + 3 * i + j);
    let vv: Vec<Expr> = (0..3).map(|i| Expr::sum((0..3).map(|j| u[j] * r(i, j)))).collect();
    let av = Expr::sum((0..3).map(|i| v(i) * vv[i].clone()));
    let mut out: Vec<Expr> = (0..3).map(|i| v(i) - av.clone() * vv[i].clone()).collect();
    out.extend(vv);
    out
}

/// Two spatial actors sharing the oriented axis line `(a, R) -> line
/// through a along R u`.
pub fn cylindrical(u: [f64; 3]) -> Result<LinkageBuild, LinkError> {
    let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
        return Err(LinkError::BadParam(format!("axis must be a unit vector, |u| = {}", n)));
    }
    let d = DiagramBuilder::new()
        .actor("A1", spaces::se3("SE3"))
        .actor("A2", spaces::se3("SE3"))
        .constraint("X", spaces::oriented_lines("X"))
        .map("A1", "X", axis_map(u))
        .map("A2", "X", axis_map(u))
        .build()?;
    Ok(LinkageBuild::new("cylindrical", d, &[("u1", u[0]), ("u2", u[1]), ("u3", u[2])], Some(8), 6))
}

/// Closed loop of three hinges. Assembly requires
/// `L1 theta1 + L2 theta2 + L3 theta3 = 0`.
pub fn three_bar(l1: f64, l2: f64, l3: f64) -> Result<LinkageBuild, LinkError> {
    let (l1, l2, l3) = (positive("L1", l1)?, positive("L2", l2)?, positive("L3", l3)?);
    let d = DiagramBuilder::new()
        .actor("A1", spaces::se2("SE2"))
        .actor("A2", spaces::se2("SE2"))
        .actor("A3", spaces::se2("SE2"))
        .constraint("C12", spaces::r2("R2"))
        .constraint("C23", spaces::r2("R2"))
        .constraint("C13", spaces::r2("R2"))
        .map("A1", "C12", pos_along(-l1))
        .map("A2", "C12", pos())
        .map("A2", "C23", pos_along(-l2))
        .map("A3", "C23", pos())
        .map("A1", "C13", pos())
        .map("A3", "C13", pos_along(-l3))
        .build()?;
    let feasible = matches!(super::three_bar_feasible(l1, l2, l3)?, super::Feasibility::Feasible);
    Ok(LinkageBuild::new("three_bar", d, &[("L1", l1), ("L2", l2), ("L3", l3)], feasible.then_some(3), 3))
}

/// Add a planar position constraint carried only by `actor`, the handle
/// a daemon uses to pin that actor's position.
pub fn with_position_anchor(mut b: LinkageBuild, actor: &str, constraint: &str) -> Result<LinkageBuild, LinkError> {
    let d = &b.diagram;
    let a = ActorId::new(actor);
    let src = Arc::clone(d.actor_space(&a)?);
    if b.group_dim != 3 || src.ambient_dim() != 4 {
        return Err(LinkError::BadParam(format!("{} is not a planar actor", actor)));
    }
    let target = Arc::new(spaces::r2("R2"));
    let mut constraints = d.constraint_spaces().clone();
    if constraints.insert(ConstraintId::new(constraint), Arc::clone(&target)).is_some() {
        return Err(LinkError::BadParam(format!("constraint {} already present", constraint)));
    }
    let mut maps = d.maps().clone();
    maps.insert((a, ConstraintId::new(constraint)), SmoothMap::new(src, target, pos())?);
    b.diagram = AcmDiagram::from_parts(d.actor_spaces().clone(), constraints, maps)?;
    Ok(b)
}

/// Rigid bar whose actor `A` also carries its position as the constraint
/// `Z`.
pub fn pendulum(l: f64) -> Result<LinkageBuild, LinkError> {
    let mut b = with_position_anchor(rigid_bar(l)?, "A", "Z")?;
    b.name = "pendulum".into();
    Ok(b)
}

/// `h2(x, y)`: sum of the bump products over the four quadrants, zero
/// exactly on the coordinate axes.
pub fn quadrant_bump(x: Expr, y: Expr) -> Expr {
    let h = |e: Expr| e.bump();
    h(x.clone()) * h(y.clone())
        + h(-x.clone()) * h(y.clone())
        + h(x.clone()) * h(-y.clone())
        + h(-x) * h(-y)
}

/// Three planar points `A1, A2, A3`, constraints `C4, C5, C6`, identity
/// maps except `f36(x, y) = (x + h2, y + h2)`. Its equalizer is the union
/// of the two coordinate axes.
pub fn nonexample() -> Result<LinkageBuild, LinkError> {
    let id = || vec![v(0), v(1)];
    let h = quadrant_bump(v(0), v(1));
    let d = DiagramBuilder::new()
        .actor("A1", spaces::r2("R2"))
        .actor("A2", spaces::r2("R2"))
        .actor("A3", spaces::r2("R2"))
        .constraint("C4", spaces::r2("R2"))
        .constraint("C5", spaces::r2("R2"))
        .constraint("C6", spaces::r2("R2"))
        .map("A1", "C4", id())
        .map("A1", "C5", id())
        .map("A2", "C4", id())
        .map("A2", "C6", id())
        .map("A3", "C5", id())
        .map("A3", "C6", vec![v(0) + h.clone(), v(1) + h])
        .build()?;
    let mut b = LinkageBuild::new("nonexample", d, &[], None, 2);
    b.union = Some(UnionDecl {
        left_actors: ids(&["A2", "A3"]),
        left_constraints: cids(&["C4", "C5", "C6"]),
        right_actors: ids(&["A1"]),
        right_constraints: cids(&["C4", "C5"]),
    });
    Ok(b)
}

/// Actors that are exactly the products of their constraints: `A1 = P`,
/// `A2 = P x Q`, `A3 = Q`, declared as the union of `{A1, A2}` and
/// `{A2, A3}`.
pub fn product_union() -> Result<LinkageBuild, LinkError> {
    let pq = Space::free("R4", &["p1", "p2", "q1", "q2"]);
    let d = DiagramBuilder::new()
        .actor("A1", spaces::r2("R2"))
        .actor("A2", pq)
        .actor("A3", spaces::r2("R2"))
        .constraint("P", spaces::r2("R2"))
        .constraint("Q", spaces::r2("R2"))
        .map("A1", "P", pos())
        .map("A2", "P", vec![v(0), v(1)])
        .map("A2", "Q", vec![v(2), v(3)])
        .map("A3", "Q", pos())
        .build()?;
    let mut b = LinkageBuild::new("product_union", d, &[], Some(4), 2);
    b.union = Some(UnionDecl {
        left_actors: ids(&["A1", "A2"]),
        left_constraints: cids(&["P"]),
        right_actors: ids(&["A2", "A3"]),
        right_constraints: cids(&["Q"]),
    });
    Ok(b)
}

/// Four actors joined in a path by three rigid bars of length `L`.
pub fn bar_path(l: f64) -> Result<LinkageBuild, LinkError> {
    let l = positive("L", l)?;
    let mut b = DiagramBuilder::new();
    for k in 1..=4 {
        b = b.actor(&format!("A{}", k), spaces::se2("SE2"));
    }
    for k in 1..=3 {
        let c = format!("C{}{}", k, k + 1);
        let mut front = pos_along(l);
        front.extend([v(2), v(3)]);
        b = b
            .constraint(&c, spaces::se2("SE2"))
            .map(&format!("A{}", k), &c, front)
            .map(&format!("A{}", k + 1), &c, vec![-v(0), -v(1), -v(2), -v(3)]);
    }
    Ok(LinkageBuild::new("bar_path", b.build()?, &[("L", l)], Some(3), 3))
}

/// Hub `H` with two leaves `E1`, `E2`, each hinged to a different point
/// of the hub.
pub fn star_tree(l: f64) -> Result<LinkageBuild, LinkError> {
    let l = positive("L", l)?;
    let d = DiagramBuilder::new()
        .actor("H", spaces::se2("SE2"))
        .actor("E1", spaces::se2("SE2"))
        .actor("E2", spaces::se2("SE2"))
        .constraint("J1", spaces::r2("R2"))
        .constraint("J2", spaces::r2("R2"))
        .map("H", "J1", pos_along(l))
        .map("E1", "J1", pos())
        .map("H", "J2", pos_along(-l))
        .map("E2", "J2", pos())
        .build()?;
    Ok(LinkageBuild::new("star_tree", d, &[("L", l)], Some(5), 3))
}

fn ids(v: &[&str]) -> Vec<ActorId> {
    v.iter().map(|s| ActorId::new(*s)).collect()
}

fn cids(v: &[&str]) -> Vec<ConstraintId> {
    v.iter().map(|s| ConstraintId::new(*s)).collect()
}

pub const CATALOG: &[&str] = &[
    "rigid_bar",
    "revolute",
    "slider",
    "linked_revolutes",
    "sliding_hinge",
    "cylindrical",
    "three_bar",
    "pendulum",
    "nonexample",
    "product_union",
    "bar_path",
    "star_tree",
];

/// Build a catalog entry; `lengths` overrides the default bar lengths in
/// order (`three_bar` defaults to `3 4 5`, the others to `1`).
pub fn build(name: &str, lengths: &[f64]) -> Result<LinkageBuild, LinkError> {
    let l = |k: usize, default: f64| lengths.get(k).copied().unwrap_or(default);
    match name {
        "rigid_bar" => rigid_bar(l(0, 1.0)),
        "revolute" => revolute(l(0, 1.0)),
        "slider" => slider(),
        "linked_revolutes" => linked_revolutes(l(0, 1.0), l(1, 1.0)),
        "sliding_hinge" => sliding_hinge(),
        "cylindrical" => {
            let u = if lengths.len() == 3 { [lengths[0], lengths[1], lengths[2]] } else { [0.0, 0.0, 1.0] };
            cylindrical(u)
        }
        "three_bar" => three_bar(l(0, 3.0), l(1, 4.0), l(2, 5.0)),
        "pendulum" => pendulum(l(0, 1.0)),
        "nonexample" => nonexample(),
        "product_union" => product_union(),
        "bar_path" => bar_path(l(0, 1.0)),
        "star_tree" => star_tree(l(0, 1.0)),
        other => Err(LinkError::UnknownLinkage(other.into())),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub actors: usize,
    pub constraints: usize,
    pub expected_dim: Option<usize>,
}

pub fn listing() -> Vec<CatalogEntry> {
    CATALOG
        .iter()
        .map(|n| {
            let b = build(n, &[]).expect("catalog defaults are valid");
            CatalogEntry {
                name: n,
                actors: b.diagram.shape().n_actors(),
                constraints: b.diagram.shape().constraints().len() - 1,
                expected_dim: b.expected_dim,
            }
        })
        .collect()
}
