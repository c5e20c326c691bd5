use std::collections::BTreeSet;
use std::sync::Arc;

use super::expr::Expr;
use super::map::SmoothMap;
use super::space::Space;
use super::spaces;
use super::submersion::{check_surjective_submersion, SubmersionVerdict};
use super::GeomError;

/// Concatenate spaces. The empty product is the one-point space.
pub fn product(name: &str, factors: &[Arc<Space>]) -> Space {
    if factors.is_empty() {
        return spaces::point();
    }
    let mut coords = Vec::new();
    let mut residuals = Vec::new();
    let mut blocks = Vec::new();
    let mut dim = 0;
    let mut offset = 0;
    for f in factors {
        coords.extend(f.coords().iter().cloned());
        residuals.extend(f.residuals().iter().map(|r| r.shift(offset)));
        blocks.extend(f.rotation_blocks().iter().map(|b| b.map(|i| i + offset)));
        dim += f.dim();
        offset += f.ambient_dim();
    }
    let coords = dedupe(coords);
    Space::new(name, coords, residuals, dim)
        .and_then(|s| s.with_rotation_blocks(blocks))
        .expect("product of valid spaces")
}

/// Make coordinate names unique by suffixing repeats with `#k`.
fn dedupe(coords: Vec<String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    coords
        .into_iter()
        .map(|c| {
            let mut name = c.clone();
            let mut k = 1;
            while !seen.insert(name.clone()) {
                name = format!("{}#{}", c, k);
                k += 1;
            }
            name
        })
        .collect()
}

/// `x -> (f_1(x), ..., f_k(x))` for maps sharing a source.
pub fn product_map(source: Arc<Space>, maps: &[SmoothMap]) -> Result<SmoothMap, GeomError> {
    for m in maps {
        if !m.source().same_manifold(&source) {
            return Err(GeomError::TargetMismatch);
        }
    }
    let targets: Vec<Arc<Space>> = maps.iter().map(|m| m.target().clone()).collect();
    let name = targets.iter().map(|t| t.name().to_string()).collect::<Vec<_>>().join("x");
    let target = Arc::new(product(&name, &targets));
    let components = maps.iter().flat_map(|m| m.components().iter().cloned()).collect();
    SmoothMap::new(source, target, components)
}

#[derive(Clone, Debug)]
pub struct FiberProduct {
    pub space: Arc<Space>,
    pub left: SmoothMap,
    pub right: SmoothMap,
    /// Set when the submersion precondition is only known from samples.
    pub warning: Option<String>,
}

/// `A x_C B = {(a, b) : f(a) = g(b)}` with coordinates of `A` then `B`.
/// The declared dimension is `dim A + dim B - dim C`.
pub fn fiber_product(name: &str, f: &SmoothMap, g: &SmoothMap) -> Result<FiberProduct, GeomError> {
    if !f.target().same_manifold(g.target()) {
        return Err(GeomError::TargetMismatch);
    }
    let (a, b, c) = (f.source(), g.source(), f.target());
    let na = a.ambient_dim();
    let dim = (a.dim() + b.dim())
        .checked_sub(c.dim())
        .ok_or_else(|| GeomError::BadSpace("fiber product of negative dimension".into()))?;
    let mut coords: Vec<String> = a.coords().to_vec();
    coords.extend(b.coords().iter().cloned());
    let mut residuals: Vec<Expr> = a.residuals().to_vec();
    residuals.extend(b.residuals().iter().map(|r| r.shift(na)));
    for (fc, gc) in f.components().iter().zip(g.components()) {
        residuals.push(fc.clone() - gc.shift(na));
    }
    let mut blocks: Vec<[usize; 9]> = a.rotation_blocks().to_vec();
    blocks.extend(b.rotation_blocks().iter().map(|bl| bl.map(|i| i + na)));
    let space = Arc::new(Space::new(name, dedupe(coords), residuals, dim)?.with_rotation_blocks(blocks)?);
    let left_idx: Vec<usize> = (0..na).collect();
    let right_idx: Vec<usize> = (na..na + b.ambient_dim()).collect();
    let left = SmoothMap::coordinate_projection(space.clone(), a.clone(), &left_idx)?;
    let right = SmoothMap::coordinate_projection(space.clone(), b.clone(), &right_idx)?;
    Ok(FiberProduct { space, left, right, warning: None })
}

/// Fiber product with the submersion precondition checked on samples.
pub fn fiber_product_checked(
    name: &str,
    f: &SmoothMap,
    g: &SmoothMap,
    n_samples: usize,
    seed: u64,
) -> Result<FiberProduct, GeomError> {
    let mut fp = fiber_product(name, f, g)?;
    let vf = check_surjective_submersion(f, n_samples, seed)?;
    let vg = check_surjective_submersion(g, n_samples, super::solve::derive_seed(seed, 1))?;
    fp.warning = Some(match (&vf, &vg) {
        (SubmersionVerdict::SampledVerified { .. }, SubmersionVerdict::SampledVerified { .. }) => {
            format!("UnverifiedSubmersion: precondition sampled at {} points", n_samples)
        }
        _ => format!("UnverifiedSubmersion: precondition refuted ({:?}, {:?})", vf, vg),
    });
    Ok(fp)
}
