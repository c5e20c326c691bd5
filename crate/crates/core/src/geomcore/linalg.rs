use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff for numerical rank.
pub const RANK_RTOL: f64 = 1e-8;

pub struct RankInfo {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Orthonormal basis of the right null space, one column per vector.
    pub null_space: DMatrix<f64>,
}

/// Numerical rank with cutoff `RANK_RTOL * sigma_max`, plus the null space.
pub fn rank_info(m: &DMatrix<f64>) -> RankInfo {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return RankInfo { rank: 0, singular_values: vec![], null_space: DMatrix::zeros(0, 0) };
    }
    // Pad to at least square so V carries a full basis of R^cols.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let cut = RANK_RTOL * smax;
    let rank = if smax == 0.0 { 0 } else { sv.iter().filter(|&&s| s > cut).count() };
    let v_t = svd.v_t.expect("v_t requested");
    let nullity = cols - rank;
    let mut null_space = DMatrix::zeros(cols, nullity);
    for k in 0..nullity {
        let row = v_t.row(rank + k);
        for j in 0..cols {
            null_space[(j, k)] = row[j];
        }
    }
    RankInfo { rank, singular_values: sv.into_iter().take(rows.min(cols)).collect(), null_space }
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_RTOL * smax).count()
}

/// Damped least-squares step `-(J^T J + lambda I)^{-1} J^T r` computed through
/// the SVD so that redundant or underdetermined systems give the
/// minimum-norm correction.
pub fn damped_step(j: &DMatrix<f64>, r: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let n = j.ncols();
    if j.nrows() == 0 || n == 0 {
        return DVector::zeros(n);
    }
    let svd = j.clone().svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let v_t = svd.v_t.as_ref().unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut step = DVector::zeros(n);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= 1e-14 * smax || s == 0.0 {
            continue;
        }
        let coef = s / (s * s + lambda) * u.column(k).dot(r);
        step -= v_t.row(k).transpose() * coef;
    }
    step
}

/// Least-squares distance from `v` to the column span of `basis`.
pub fn span_residual(basis: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    if basis.ncols() == 0 {
        return v.norm();
    }
    let q = orthonormal_columns(basis);
    let proj = &q * (q.transpose() * v);
    (v - proj).norm()
}

/// Orthonormal basis of the column span (numerical rank columns).
pub fn orthonormal_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| smax > 0.0 && svd.singular_values[k] > RANK_RTOL * smax)
        .collect();
    let mut out = DMatrix::zeros(m.nrows(), keep.len());
    for (c, &k) in keep.iter().enumerate() {
        out.set_column(c, &u.column(k));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
        let info = rank_info(&m);
        assert_eq!(info.rank, 1);
        assert_eq!(info.null_space.ncols(), 3);
        assert!((&m * &info.null_space).norm() < 1e-14);
    }

    #[test]
    fn tiny_singular_values_are_dropped() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-10]);
        assert_eq!(rank(&m), 1);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-7]);
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn damped_step_solves_consistent_system() {
        let j = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let r = DVector::from_vec(vec![2.0]);
        let s = damped_step(&j, &r, 0.0);
        assert!((s[0] + 1.0).abs() < 1e-14 && (s[1] + 1.0).abs() < 1e-14);
    }
}
