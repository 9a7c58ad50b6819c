//! Newton-polygon zero counting for truncated power series over K_v.
//!
//! The lower convex hull of the points (i, v(b_i)) controls the valuations
//! of the zeros of sum b_i z^i: a hull segment of slope -w accounts for
//! (horizontal length) zeros of valuation w. Counting segments of slope
//! <= -min_val therefore bounds the zeros with v(z) >= min_val; leading zero
//! coefficients contribute zeros at the origin. A bound of 0 means the
//! dominant term wins everywhere on the ball and the truncated series cannot
//! vanish there.

use crate::error::{Error, Result};
use crate::places::LocalElem;

/// Upper bound on the zeros z with v(z) >= min_val of the truncated series
/// sum b_i z^i.
///
/// Coefficients that are zero to their working precision are treated as
/// zero; the bound speaks about the truncated series as known.
pub fn isolated_zero_bound(coeffs: &[LocalElem], min_val: i64) -> Result<u64> {
    let points: Vec<(usize, i64)> = coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, b)| b.valuation().map(|v| (i, v)))
        .collect();
    if points.is_empty() {
        return Err(Error::ZeroSeries);
    }
    // Zeros at the origin: every index below the first known-nonzero one.
    let origin_zeros = points[0].0 as u64;

    let hull = lower_hull(&points);
    let mut count = 0u64;
    for w in hull.windows(2) {
        let (i1, v1) = w[0];
        let (i2, v2) = w[1];
        // slope <= -min_val  <=>  v2 - v1 <= -min_val (i2 - i1)
        let run = (i2 - i1) as i128;
        if (v2 as i128 - v1 as i128) <= -(min_val as i128) * run {
            count += run as u64;
        }
    }
    Ok(origin_zeros + count)
}

/// Lower convex hull of points with strictly increasing x coordinates.
fn lower_hull(points: &[(usize, i64)]) -> Vec<(usize, i64)> {
    let mut hull: Vec<(usize, i64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // b above or on segment a..p: drop b
            let lhs = (b.1 as i128 - a.1 as i128) * (p.0 as i128 - a.0 as i128);
            let rhs = (p.1 as i128 - a.1 as i128) * (b.0 as i128 - a.0 as i128);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}
