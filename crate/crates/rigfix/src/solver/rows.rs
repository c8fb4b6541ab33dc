//! Constraint rows relating a match's vertical disparity to the rig
//! parameters.
//!
//! The full row constrains `dy` by six parameters
//! `(dw_x, dw_y, dw_z, w_y1, w_z1, d_f)`:
//!
//! ```text
//! [1 + y0*y1,  -x0*y1,  -x0,  -dx*y1,  -dx,  y0] . theta = dy
//! ```
//!
//! The measured horizontal disparity `dx` stands in for the true inverse
//! depth, which only holds near the correct relative orientation; the
//! reduced row drops the two `dx` columns and is solved first.

use crate::correspond::Match;

/// One linear constraint: selected coefficient columns, the `dy` right-hand
/// side, and the index of the source match.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub source: usize,
}

/// Coefficients of the full six-parameter row for one match.
pub fn full_coefficients(m: &Match) -> [f64; 6] {
    [
        1.0 + m.n0.y * m.n1.y,
        -m.n0.x * m.n1.y,
        -m.n0.x,
        -m.dx * m.n1.y,
        -m.dx,
        m.n0.y,
    ]
}

/// Full six-parameter constraint row.
pub fn row_full(m: &Match, source: usize) -> ConstraintRow {
    ConstraintRow {
        coeffs: full_coefficients(m).to_vec(),
        rhs: m.dy,
        source,
    }
}

/// Reduced four-parameter row `(dw_x, dw_y, dw_z, d_f)`: the full row with
/// the disparity-dependent columns removed.
pub fn row_reduced(m: &Match, source: usize) -> ConstraintRow {
    let c = full_coefficients(m);
    ConstraintRow {
        coeffs: vec![c[0], c[1], c[2], c[5]],
        rhs: m.dy,
        source,
    }
}

/// Diagnostic only: the companion horizontal constraint
/// `[-y0*x1, 1 + x0*x1, -y0, dx*x1, 0, -x1] . theta = 0`. Its information
/// is absorbed by using `dx` as the depth estimate, so it never enters a
/// solve; the residual is reported to flag model violations.
pub fn row_x_diagnostic(m: &Match) -> [f64; 6] {
    [
        -m.n0.y * m.n1.x,
        1.0 + m.n0.x * m.n1.x,
        -m.n0.y,
        m.dx * m.n1.x,
        0.0,
        -m.n1.x,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{Intrinsics, NormalizedPoint, PixelPoint};
    use approx::assert_relative_eq;

    fn match_with(n0: NormalizedPoint, n1: NormalizedPoint) -> Match {
        Match {
            left: PixelPoint::new(0.0, 0.0),
            right: PixelPoint::new(0.0, 0.0),
            n0,
            n1,
            dx: n1.x - n0.x,
            dy: n1.y - n0.y,
            zssd_cost: 0.0,
        }
    }

    #[allow(dead_code)]
    fn k() -> Intrinsics {
        Intrinsics {
            f: 500.0,
            cx: 320.0,
            cy: 240.0,
        }
    }

    #[test]
    fn principal_point_row() {
        let m = match_with(NormalizedPoint::new(0.0, 0.0), NormalizedPoint::new(0.0, 0.0));
        let r = row_full(&m, 0);
        assert_eq!(r.coeffs, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn pure_horizontal_disparity_row() {
        // x0 = y0 = y1 = 0, dx = 0.1.
        let m = match_with(NormalizedPoint::new(0.0, 0.0), NormalizedPoint::new(0.1, 0.0));
        let r = row_full(&m, 0);
        assert_eq!(r.coeffs, vec![1.0, 0.0, 0.0, 0.0, -0.1, 0.0]);
    }

    #[test]
    fn symmetric_vertical_row() {
        // y0 = y1 = t, x0 = 0, dx = 0: [1 + t^2, 0, 0, 0, 0, t].
        let t = 0.3;
        let m = match_with(NormalizedPoint::new(0.0, t), NormalizedPoint::new(0.0, t));
        let r = row_full(&m, 0);
        assert_relative_eq!(r.coeffs[0], 1.0 + t * t, epsilon = 1e-15);
        assert_eq!(&r.coeffs[1..5], &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.coeffs[5], t);
    }

    #[test]
    fn reduced_row_example() {
        // x0 = 0.3, y0 = 0.1, y1 = 0.2 -> [1.02, -0.06, -0.3, 0.1].
        let m = match_with(
            NormalizedPoint::new(0.3, 0.1),
            NormalizedPoint::new(0.3, 0.2),
        );
        let r = row_reduced(&m, 0);
        assert_relative_eq!(r.coeffs[0], 1.02, epsilon = 1e-15);
        assert_relative_eq!(r.coeffs[1], -0.06, epsilon = 1e-15);
        assert_relative_eq!(r.coeffs[2], -0.3, epsilon = 1e-15);
        assert_relative_eq!(r.coeffs[3], 0.1, epsilon = 1e-15);
        assert_eq!(r.rhs, m.dy);

        // Principal-point reduced row: dw_x = dy directly.
        let m = match_with(NormalizedPoint::new(0.0, 0.0), NormalizedPoint::new(0.0, 0.01));
        let r = row_reduced(&m, 0);
        assert_eq!(r.coeffs, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.rhs, 0.01);
    }

    #[test]
    fn reduced_equals_full_without_disparity_columns() {
        let m = match_with(
            NormalizedPoint::new(-0.21, 0.17),
            NormalizedPoint::new(-0.15, 0.19),
        );
        let full = row_full(&m, 3);
        let red = row_reduced(&m, 3);
        assert_eq!(red.coeffs[0], full.coeffs[0]);
        assert_eq!(red.coeffs[1], full.coeffs[1]);
        assert_eq!(red.coeffs[2], full.coeffs[2]);
        assert_eq!(red.coeffs[3], full.coeffs[5]);
        assert_eq!(red.rhs, full.rhs);
        assert_eq!(red.source, 3);
    }

    #[test]
    fn x_diagnostic_row_shape() {
        let m = match_with(
            NormalizedPoint::new(0.1, 0.2),
            NormalizedPoint::new(0.15, 0.22),
        );
        let r = row_x_diagnostic(&m);
        assert_relative_eq!(r[0], -0.2 * 0.15, epsilon = 1e-15);
        assert_relative_eq!(r[1], 1.0 + 0.1 * 0.15, epsilon = 1e-15);
        assert_eq!(r[4], 0.0);
        assert_relative_eq!(r[5], -0.15, epsilon = 1e-15);
    }
}
