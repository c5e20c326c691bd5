//! Prescribed paths in products of constraints and the slices of a
//! configuration space they cut out.

use serde::Serialize;

use crate::acm::ConstraintId;
use crate::geomcore::{check_surjective_submersion, derive_seed, product_map, Expr, GeomError, Space};
use crate::reduce::ConfigurationSpace;

use super::LinkError;

/// A path `t -> N_t` in the product of the constraints `lambda`, one
/// expression in `t` (variable 0) per coordinate.
#[derive(Clone, Debug)]
pub struct Daemon {
    pub system: ConfigurationSpace,
    pub lambda: Vec<ConstraintId>,
    pub path: Vec<Expr>,
    pub interval: (f64, f64),
    /// Declared smoothness class; not checked beyond differentiability of
    /// the expressions.
    pub smoothness: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct DaemonSlice {
    pub t: f64,
    pub target: Vec<f64>,
    #[serde(skip)]
    pub space: Space,
    pub dim: usize,
    pub samples: Vec<Vec<f64>>,
}

impl Daemon {
    pub fn new(system: ConfigurationSpace, lambda: Vec<ConstraintId>, path: Vec<Expr>, interval: (f64, f64)) -> Result<Daemon, LinkError> {
        if lambda.is_empty() {
            return Err(LinkError::BadParam("daemon needs at least one constraint".into()));
        }
        let mut width = 0;
        for c in &lambda {
            if c.is_star() || !system.diagram.shape().constraints().contains(c) {
                return Err(LinkError::BadParam(format!("{} is not a constraint of the system", c)));
            }
            width += system.diagram.constraint_space(c)?.ambient_dim();
        }
        if path.len() != width {
            return Err(LinkError::BadParam(format!("path has {} components, constraints need {}", path.len(), width)));
        }
        if path.iter().any(|e| e.max_var().is_some_and(|v| v > 0)) {
            return Err(LinkError::BadParam("path may only use t".into()));
        }
        if !(interval.0 <= interval.1) {
            return Err(LinkError::BadParam("empty interval".into()));
        }
        Ok(Daemon { system, lambda, path, interval, smoothness: 0 })
    }
}

/// `M_t = { x : pi(x) = N_t }` with `pi` the product of the constraint legs
/// in `lambda`; checks that `pi` is a surjective submersion on samples and
/// returns `n_samples` points of the slice.
pub fn daemon_slice(d: &Daemon, t: f64, n_samples: usize, seed: u64) -> Result<DaemonSlice, LinkError> {
    let (lo, hi) = d.interval;
    if !(lo <= t && t <= hi) {
        return Err(LinkError::OutOfInterval { t, lo, hi });
    }
    let apex = &d.system.apex;
    let legs: Vec<_> = d
        .lambda
        .iter()
        .map(|c| d.system.constraint_leg(c).cloned().ok_or_else(|| LinkError::BadParam(format!("no leg to {}", c))))
        .collect::<Result<_, _>>()?;
    let pi = product_map(apex.clone(), &legs)?;
    let verdict = check_surjective_submersion(&pi, n_samples.max(4), derive_seed(seed, 1))?;
    if !verdict.is_verified() {
        return Err(LinkError::SubmersionViolated(format!("{:?}", verdict)));
    }
    let target: Vec<f64> = d.path.iter().map(|e| e.eval(&[t])).collect::<Result<_, _>>().map_err(GeomError::from)?;
    let extra: Vec<Expr> = pi.components().iter().zip(&target).map(|(e, &y)| e.clone() - Expr::c(y)).collect();
    let dim = apex.dim().checked_sub(pi.target().dim()).ok_or_else(|| LinkError::BadParam("slice of negative dimension".into()))?;
    let space = apex.with_extra_residuals(format!("M_{}", t), extra, dim)?;
    let samples = space.sample_points(n_samples, derive_seed(seed, 2)).map_err(|_| LinkError::EmptySlice)?;
    Ok(DaemonSlice { t, target, dim: space.dim(), space, samples })
}
