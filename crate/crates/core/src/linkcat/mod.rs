//! Catalog of linkages, mobility counts and daemon slices.

pub mod catalog;
pub mod daemon;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::acm::{shared_constraints, AcmDiagram, AcmError};
use crate::geomcore::{derive_seed, spaces, Expr, GeomError, Space};
use crate::reduce::{f_limit, ConfigurationSpace, LimitOptions, ObstructionReport, ReduceError, Strategy};

pub use catalog::{build, listing, LinkageBuild, CATALOG};
pub use daemon::{daemon_slice, Daemon, DaemonSlice};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("unknown linkage {0:?}")]
    UnknownLinkage(String),
    #[error("triangle test says {verdict:?} but the closure solve {}", if *.solved { "succeeded" } else { "failed" })]
    CrossCheck { verdict: Feasibility, solved: bool },
    #[error("no point of the slice found")]
    EmptySlice,
    #[error("daemon projection is not a surjective submersion: {0}")]
    SubmersionViolated(String),
    #[error("time {t} outside the daemon interval [{lo}, {hi}]")]
    OutOfInterval { t: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Acm(#[from] AcmError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Feasibility {
    Feasible,
    /// Collinear closure: the loop assembles only flat.
    FeasibleDegenerate,
    Infeasible,
}

/// Can a closed loop with these bar lengths be assembled? Decided by the
/// triangle inequalities and confirmed by solving the closure equation
/// `L1 t1 + L2 t2 + L3 t3 = 0` on three unit circles.
pub fn three_bar_feasible(l1: f64, l2: f64, l3: f64) -> Result<Feasibility, LinkError> {
    for (n, x) in [("L1", l1), ("L2", l2), ("L3", l3)] {
        if !(x.is_finite() && x > 0.0) {
            return Err(LinkError::BadParam(format!("{} must be positive, got {}", n, x)));
        }
    }
    let mut l = [l1, l2, l3];
    l.sort_by(f64::total_cmp);
    let slack = l[0] + l[1] - l[2];
    let eps = 1e-12 * l[2];
    let verdict = if slack > eps {
        Feasibility::Feasible
    } else if slack >= -eps {
        Feasibility::FeasibleDegenerate
    } else {
        Feasibility::Infeasible
    };
    let solved = closure_space(l1, l2, l3).sample_point(derive_seed(0, 33)).is_ok();
    if solved != (verdict != Feasibility::Infeasible) {
        return Err(LinkError::CrossCheck { verdict, solved });
    }
    Ok(verdict)
}

fn closure_space(l1: f64, l2: f64, l3: f64) -> Space {
    let circles: Vec<Arc<Space>> = (0..3).map(|k| Arc::new(spaces::circle(&format!("S{}", k + 1)).qualified(&format!("t{}", k + 1)))).collect();
    let p = crate::geomcore::product("T3", &circles);
    let v = Expr::var;
    let closure = vec![l1 * v(0) + l2 * v(2) + l3 * v(4), l1 * v(1) + l2 * v(3) + l3 * v(5)];
    p.with_extra_residuals("closure", closure, 1).expect("closure on the torus")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MobilityReport {
    pub total_dim: usize,
    pub internal_dof: i64,
    pub locked: bool,
    pub overconstrained: bool,
}

/// `sum dim A < dim SE(n) + sum dim c` over constraints shared by at least
/// two actors.
pub fn overconstrained(d: &AcmDiagram, group_dim: usize) -> Result<bool, LinkError> {
    let actors: usize = d.actors().iter().map(|a| d.actor_space(a).map(|s| s.dim())).sum::<Result<_, _>>()?;
    let shared: usize = shared_constraints(d.shape(), false)
        .iter()
        .filter(|c| !c.is_star())
        .map(|c| d.constraint_space(c).map(|s| s.dim()))
        .sum::<Result<_, _>>()?;
    Ok(actors < group_dim + shared)
}

pub fn mobility(system: &ConfigurationSpace, group_dim: usize) -> Result<MobilityReport, LinkError> {
    let total_dim = system.dim();
    let internal_dof = total_dim as i64 - group_dim as i64;
    Ok(MobilityReport {
        total_dim,
        internal_dof,
        locked: internal_dof == 0,
        overconstrained: overconstrained(&system.diagram, group_dim)?,
    })
}

/// Strategies tried for a catalog entry: the generic ones, then the
/// declared union if the entry carries one.
pub fn limit_options(b: &LinkageBuild, n_samples: usize, seed: u64) -> LimitOptions {
    let mut strategies = vec![Strategy::ExternalDecomposition, Strategy::AcyclicSkeleton];
    if let Some(u) = &b.union {
        strategies.push(Strategy::DeclaredUnion(u.clone()));
    }
    LimitOptions { strategies, n_samples, seed, ..Default::default() }
}

/// Configuration space of a catalog entry: its limit if a strategy
/// applies, otherwise the raw equalizer when the diagnostic shows a
/// constant local dimension.
pub fn configuration_space(b: &LinkageBuild, n_samples: usize, seed: u64) -> Result<ConfigurationSpace, ObstructionReport> {
    let opts = limit_options(b, n_samples, seed);
    match f_limit(&b.diagram, &opts) {
        Ok(cs) => Ok(cs),
        Err(report) => match report.diagnostics.as_ref().and_then(|h| h.constant()) {
            Some(_) => ConfigurationSpace::from_raw_equalizer(&b.diagram, opts.diagnostic_seeds, derive_seed(seed, 999))
                .map_err(|_| report),
            None => Err(report),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::local_dimension_estimate;

    #[test]
    fn catalog_validates() {
        for name in CATALOG {
            let b = build(name, &[]).unwrap();
            let rep = b.diagram.validate(8, 1);
            assert!(rep.is_valid(), "{}: {:?}", name, rep.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        }
    }

    #[test]
    fn catalog_dimensions() {
        for name in CATALOG {
            let b = build(name, &[]).unwrap();
            if let Some(expected) = b.expected_dim {
                let cs = configuration_space(&b, 8, 2).unwrap_or_else(|r| panic!("{}: {:?}", name, r));
                assert_eq!(cs.dim(), expected, "{}", name);
                cs.apex.verify_dim(5, 3).unwrap();
            }
        }
    }

    #[test]
    fn three_bar_cases() {
        assert_eq!(three_bar_feasible(3.0, 4.0, 5.0).unwrap(), Feasibility::Feasible);
        assert_eq!(three_bar_feasible(1.0, 1.0, 5.0).unwrap(), Feasibility::Infeasible);
        assert_eq!(three_bar_feasible(1.0, 1.0, 2.0).unwrap(), Feasibility::FeasibleDegenerate);
        assert!(matches!(three_bar_feasible(0.0, 1.0, 1.0), Err(LinkError::BadParam(_))));
    }

    #[test]
    fn three_bar_has_no_welding_route_but_constant_equalizer() {
        let b = build("three_bar", &[]).unwrap();
        let report = f_limit(&b.diagram, &limit_options(&b, 8, 0)).unwrap_err();
        assert_eq!(report.attempts.len(), 2);
        assert_eq!(report.diagnostics.unwrap().constant(), Some(3));
        let cs = configuration_space(&b, 8, 0).unwrap();
        let m = mobility(&cs, 3).unwrap();
        assert_eq!((m.total_dim, m.internal_dof, m.locked), (3, 0, true));
        // Closure holds on every sampled configuration.
        for p in cs.apex.sample_points(20, 4).unwrap() {
            let th = |a: &str| cs.actor_leg(&a.into()).unwrap().eval(&p).unwrap();
            let (t1, t2, t3) = (th("A1"), th("A2"), th("A3"));
            for k in 0..2 {
                assert!((3.0 * t1[2 + k] + 4.0 * t2[2 + k] + 5.0 * t3[2 + k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mobility_counts() {
        let b = build("revolute", &[]).unwrap();
        let m = mobility(&configuration_space(&b, 8, 0).unwrap(), 3).unwrap();
        assert_eq!((m.total_dim, m.internal_dof, m.locked, m.overconstrained), (4, 1, false, false));
    }

    #[test]
    fn two_shared_planar_points_overconstrain() {
        let v = Expr::var;
        let d = crate::acm::DiagramBuilder::new()
            .actor("A", spaces::se2("SE2"))
            .actor("B", spaces::se2("SE2"))
            .constraint("P", spaces::r2("R2"))
            .constraint("Q", spaces::r2("R2"))
            .map("A", "P", vec![v(0), v(1)])
            .map("B", "P", vec![v(0), v(1)])
            .map("A", "Q", vec![v(0) + v(2), v(1) + v(3)])
            .map("B", "Q", vec![v(0) - v(2), v(1) - v(3)])
            .build()
            .unwrap();
        assert!(overconstrained(&d, 3).unwrap());
    }

    #[test]
    fn nonexample_is_obstructed_with_mixed_dimensions() {
        let b = build("nonexample", &[]).unwrap();
        let err = configuration_space(&b, 8, 0).unwrap_err();
        assert_eq!(err.attempts.len(), 3);
        let h = err.diagnostics.unwrap();
        assert!(h.distinct() >= 2, "{:?}", h);
    }

    #[test]
    fn catalog_apexes_have_constant_local_dimension() {
        for name in CATALOG {
            let b = build(name, &[]).unwrap();
            if let Ok(cs) = configuration_space(&b, 8, 0) {
                let h = local_dimension_estimate(&cs.apex, 30, 9).unwrap();
                assert_eq!(h.constant(), Some(cs.dim()), "{}: {:?}", name, h);
            }
        }
    }
}
