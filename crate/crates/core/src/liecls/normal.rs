//! Normal form `G x H` of the fiber product of two equivariant projections
//! `p1, p2 : G -> M`.

use serde::Serialize;

use crate::geomcore::linalg::{rank_info, orthonormal_columns};
use crate::geomcore::submersion::fiber_space;
use crate::geomcore::{derive_seed, solve, SmoothMap};

use super::algebra::is_subalgebra;
use super::group::Group;
use super::LieError;

/// Tolerance of the sampled equivariance check.
pub const EQUIVARIANCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct PairNormalForm {
    pub group: Group,
    /// Orthonormal basis, in algebra coordinates, of the stabilizer algebra
    /// of `p2(e)`.
    pub h_basis: Vec<Vec<f64>>,
    pub h_dim: usize,
    pub h_closed: bool,
    /// An element with `p2(g0) = p1(e)`.
    pub g0: Vec<f64>,
    pub equivariance_residual: f64,
    /// Worst round-trip error of `phi` and `phi_inv` on sampled points.
    pub roundtrip_error: f64,
    pub samples: usize,
    #[serde(skip)]
    p2: Option<SmoothMap>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn fiber_point(f: &SmoothMap, y: &[f64], seed: u64) -> Option<Vec<f64>> {
    fiber_space(f, y).ok()?.sample_point(seed).ok()
}

impl PairNormalForm {
    pub fn dim(&self) -> usize {
        self.group.dim() + self.h_dim
    }

    /// `(g1, g2) -> (g2, g2^-1 g1 g0)`.
    pub fn phi(&self, g1: &[f64], g2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let g = self.group;
        (g2.to_vec(), g.mul(&g.mul(&g.inv(g2), g1), &self.g0))
    }

    /// `(g, h) -> (g h g0^-1, g)`.
    pub fn phi_inv(&self, g: &[f64], h: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let gr = self.group;
        (gr.mul(&gr.mul(g, h), &gr.inv(&self.g0)), g.to_vec())
    }

    /// Distance of `h` from the stabilizer of `p2(e)`, measured in `M`.
    pub fn stabilizer_defect(&self, h: &[f64]) -> Result<f64, LieError> {
        let p2 = self.p2.as_ref().expect("built by pair_normal_form");
        Ok(dist(&p2.eval(h)?, &p2.eval(&self.group.identity())?))
    }
}

/// Left action on `M` induced by `p2`: `k . m = p2(k s)` for any `s` over `m`.
fn act(group: Group, p2: &SmoothMap, k: &[f64], m: &[f64], seed: u64) -> Result<Vec<f64>, LieError> {
    let s = fiber_point(p2, m, seed).ok_or(LieError::NotTransitive)?;
    Ok(p2.eval(&group.mul(k, &s))?)
}

/// Checks that `p1` and `p2` are equivariant for the action induced by
/// `p2` and that this action is transitive, then builds the stabilizer `H`
/// of `p2(e)` and the diffeomorphism `phi : P -> G x H`, checking it
/// round-trips on `n_samples` points.
pub fn pair_normal_form(group: Group, p1: &SmoothMap, p2: &SmoothMap, n_samples: usize, seed: u64) -> Result<PairNormalForm, LieError> {
    let gs = group.space();
    for (name, p) in [("p1", p1), ("p2", p2)] {
        if !p.source().same_manifold(&gs) {
            return Err(LieError::BadMap(format!("{} is not defined on {:?}", name, group)));
        }
    }
    if !p1.target().same_manifold(p2.target()) {
        return Err(LieError::BadMap("p1 and p2 have different targets".into()));
    }
    let e = group.identity();
    let mut rng = solve::rng(derive_seed(seed, 1));

    // Equivariance, and independence of the induced action from the
    // choice of lift.
    let mut residual: f64 = 0.0;
    for i in 0..n_samples.max(1) as u64 {
        let (g, k) = (group.random(&mut rng), group.random(&mut rng));
        let m2 = p2.eval(&g)?;
        residual = residual.max(dist(&p2.eval(&group.mul(&k, &g))?, &act(group, p2, &k, &m2, derive_seed(seed, 100 + i))?));
        let m1 = p1.eval(&g)?;
        residual = residual.max(dist(&p1.eval(&group.mul(&k, &g))?, &act(group, p2, &k, &m1, derive_seed(seed, 200 + i))?));
    }
    if residual > EQUIVARIANCE_TOL {
        return Err(LieError::NotEquivariant { residual });
    }

    // Stabilizer algebra: kernel of dp2 at e on the algebra.
    let t = group.tangent_at_identity();
    let info = rank_info(&(p2.jacobian(&e)? * &t));
    if info.rank != p2.target().dim() {
        // The orbit of p2(e) is open only if dp2(e) is onto.
        return Err(LieError::NotTransitive);
    }
    let q = orthonormal_columns(&info.null_space);
    let h_basis: Vec<Vec<f64>> = (0..q.ncols()).map(|c| q.column(c).iter().copied().collect()).collect();
    let h_closed = is_subalgebra(&group.algebra(), &h_basis, 1e-9)?;

    let g0 = fiber_point(p2, &p1.eval(&e)?, derive_seed(seed, 2)).ok_or(LieError::NotTransitive)?;

    let mut nf = PairNormalForm {
        group,
        h_dim: h_basis.len(),
        h_basis,
        h_closed,
        g0,
        equivariance_residual: residual,
        roundtrip_error: 0.0,
        samples: n_samples,
        p2: Some(p2.clone()),
    };

    let mut worst: f64 = 0.0;
    let stab = fiber_space(p2, &p2.eval(&e)?)?;
    for i in 0..n_samples as u64 {
        // A point of P over a random g2.
        let g2 = group.random(&mut rng);
        let g1 = fiber_point(p1, &p2.eval(&g2)?, derive_seed(seed, 300 + i)).ok_or(LieError::NotTransitive)?;
        let (g, h) = nf.phi(&g1, &g2);
        worst = worst.max(nf.stabilizer_defect(&h)?);
        let (b1, b2) = nf.phi_inv(&g, &h);
        worst = worst.max(dist(&b1, &g1)).max(dist(&b2, &g2));
        // And a point of G x H.
        let h = stab.sample_point(derive_seed(seed, 400 + i))?;
        let g = group.random(&mut rng);
        let (q1, q2) = nf.phi_inv(&g, &h);
        worst = worst.max(dist(&p1.eval(&q1)?, &p2.eval(&q2)?));
        let (c, d) = nf.phi(&q1, &q2);
        worst = worst.max(dist(&c, &g)).max(dist(&d, &h));
    }
    nf.roundtrip_error = worst;
    Ok(nf)
}
