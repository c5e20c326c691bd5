use std::collections::BTreeMap;

use serde::Serialize;

use super::solve::{self, SolverConfig};
use super::space::Space;
use super::GeomError;

/// Multiset of `ambient - rank` values over converged solves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalDimHistogram {
    pub attempted: usize,
    pub converged: usize,
    /// estimate -> count
    pub estimates: BTreeMap<usize, usize>,
}

impl LocalDimHistogram {
    pub fn distinct(&self) -> usize {
        self.estimates.len()
    }

    /// The single estimate, if all converged solves agree.
    pub fn constant(&self) -> Option<usize> {
        match self.estimates.len() {
            1 => self.estimates.keys().next().copied(),
            _ => None,
        }
    }
}

/// Solve from `n_seeds` random starts (no restarts) and record the residual
/// rank deficiency at every converged point.
pub fn local_dimension_estimate(space: &Space, n_seeds: usize, seed: u64) -> Result<LocalDimHistogram, GeomError> {
    let cfg = SolverConfig { max_restarts: 0, ..Default::default() };
    let mut rng = solve::rng(seed);
    let mut estimates = BTreeMap::new();
    let mut converged = 0;
    for _ in 0..n_seeds {
        if let Ok(sol) = solve::solve(space, &mut rng, &cfg, None) {
            converged += 1;
            *estimates.entry(space.local_dim(&sol.point)?).or_insert(0) += 1;
        }
    }
    Ok(LocalDimHistogram { attempted: n_seeds, converged, estimates })
}
