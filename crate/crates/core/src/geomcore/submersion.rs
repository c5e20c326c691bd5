//! Sampled surjective-submersion checks.
//!
//! A refutation (`DimensionObstructed`, `RankDeficientWitness`) is a
//! certificate. `SampledVerified` only says no counterexample turned up.

use serde::Serialize;

use super::linalg::rank;
use super::map::SmoothMap;
use super::solve::{self, derive_seed, SolverConfig};
use super::space::Space;
use super::GeomError;

pub const DEFAULT_SAMPLES: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SubmersionVerdict {
    DimensionObstructed { source_dim: usize, target_dim: usize },
    RankDeficientWitness { point: Vec<f64>, rank: usize, required: usize },
    /// No preimage was found for this target point.
    CoverageGap { target: Vec<f64> },
    SampledVerified { n_samples: usize },
}

impl SubmersionVerdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, SubmersionVerdict::SampledVerified { .. })
    }
}

/// Rank of `df` restricted to the tangent space of the source at `x`.
pub fn tangent_rank(f: &SmoothMap, x: &[f64]) -> Result<usize, GeomError> {
    let t = f.source().tangent_basis(x)?;
    if t.ncols() == 0 || f.target().ambient_dim() == 0 {
        return Ok(0);
    }
    Ok(rank(&(f.jacobian(x)? * t)))
}

/// Space of points `x` of the source with `f(x) = y`.
pub fn fiber_space(f: &SmoothMap, y: &[f64]) -> Result<Space, GeomError> {
    let extra = f
        .components()
        .iter()
        .zip(y)
        .map(|(c, &yi)| c.clone() - super::expr::Expr::c(yi))
        .collect();
    let dim = f.source().dim().saturating_sub(f.target().dim());
    f.source().with_extra_residuals(format!("{}-fiber", f.source().name()), extra, dim)
}

pub fn check_surjective_submersion(f: &SmoothMap, n_samples: usize, seed: u64) -> Result<SubmersionVerdict, GeomError> {
    let (ds, dt) = (f.source().dim(), f.target().dim());
    if ds < dt {
        return Ok(SubmersionVerdict::DimensionObstructed { source_dim: ds, target_dim: dt });
    }
    let cfg = SolverConfig::default();
    let mut rng = solve::rng(seed);
    for _ in 0..n_samples {
        let x = f.source().sample_with(&mut rng, &cfg)?.point;
        f.check_image(&x)?;
        let r = tangent_rank(f, &x)?;
        if r < dt {
            return Ok(SubmersionVerdict::RankDeficientWitness { point: x, rank: r, required: dt });
        }
    }
    if dt > 0 {
        let mut trng = solve::rng(derive_seed(seed, 0x5u64));
        for _ in 0..n_samples {
            let y = f.target().sample_with(&mut trng, &cfg)?.point;
            let fib = fiber_space(f, &y)?;
            if fib.sample_with(&mut trng, &cfg).is_err() {
                return Ok(SubmersionVerdict::CoverageGap { target: y });
            }
        }
    }
    Ok(SubmersionVerdict::SampledVerified { n_samples })
}
