//! Dense linear least squares on constraint rows.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::solver::rows::ConstraintRow;

/// Relative singular-value cutoff for the rank decision.
const RANK_TOL: f64 = 1e-10;

/// Solves `min ||A theta - b||` by SVD (never normal equations).
///
/// `names` labels the columns for error reporting. Rank deficiency is an
/// error naming the dominant component of the unidentifiable direction.
// Negated comparison keeps a NaN singular value failing closed.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn lsq_solve(rows: &[ConstraintRow], names: &[&str]) -> Result<Vec<f64>> {
    let n = rows.len();
    let p = names.len();
    if n < p {
        return Err(Error::TooFewMatches { needed: p, got: n });
    }
    let mut a = DMatrix::<f64>::zeros(n, p);
    let mut b = DVector::<f64>::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        if row.coeffs.len() != p {
            return Err(Error::Config(format!(
                "row {} has {} coefficients, expected {}",
                i,
                row.coeffs.len(),
                p
            )));
        }
        for (j, &c) in row.coeffs.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite("constraint coefficients"));
            }
            a[(i, j)] = c;
        }
        if !row.rhs.is_finite() {
            return Err(Error::NonFinite("constraint rhs"));
        }
        b[i] = row.rhs;
    }

    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.max();
    if !(sigma_max > 0.0) {
        return Err(Error::DegenerateGeometry("all-zero design matrix".into()));
    }
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > sigma_max * RANK_TOL)
        .count();
    if rank < p {
        // Null direction: right singular vector of the smallest singular value.
        let v_t = svd.v_t.as_ref().expect("v_t requested");
        let (min_idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let null_dir = v_t.row(min_idx);
        let (worst, _) = null_dir
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap();
        let components: Vec<String> = names
            .iter()
            .zip(null_dir.iter())
            .map(|(n, v)| format!("{n}={v:+.3}"))
            .collect();
        return Err(Error::DegenerateGeometry(format!(
            "rank {rank} < {p}; unidentifiable direction dominated by {} [{}]",
            names[worst],
            components.join(", ")
        )));
    }

    let theta = svd
        .solve(&b, sigma_max * RANK_TOL)
        .map_err(|e| Error::DegenerateGeometry(e.to_string()))?;
    Ok(theta.iter().copied().collect())
}
