//! Scan-and-bisect root finding.
//!
//! Roots are bracketed by sign changes between consecutive samples on a
//! grid, then refined by bisection. A zero that touches the axis without
//! changing sign (a tangential zero) is invisible to this scheme.

use std::convert::Infallible;

/// Where a sign change was found on a scan grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bracket {
    /// The function changes sign between `grid[i]` and `grid[i + 1]`.
    Interval(usize),
    /// A grid sample is exactly zero and its nonzero neighbours disagree
    /// in sign.
    Exact(usize),
}

/// Stopping rule for [`bisect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionStop {
    /// Stop once the bracket is narrower than this.
    pub width: f64,
    /// If set, also require `|g| <= residual` at the returned point.
    /// Bisection still stops when the bracket can no longer be halved
    /// in floating point.
    pub residual: Option<f64>,
}

/// Finds the sign changes in `values` sampled at consecutive grid nodes.
pub fn sign_changes(values: &[f64]) -> Vec<Bracket> {
    let mut out = Vec::new();
    let mut last_nonzero: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if let Some(j) = last_nonzero {
            if values[j].signum() != v.signum() {
                if i == j + 1 {
                    out.push(Bracket::Interval(j));
                } else {
                    out.push(Bracket::Exact(j + (i - j) / 2));
                }
            }
        }
        last_nonzero = Some(i);
    }
    out
}

/// Bisects `[lo, hi]`, where `g_lo` and `g_hi` have opposite signs.
///
/// Returns the bracket end (or midpoint) with the smallest `|g|`.
pub fn bisect<E, G>(
    mut g: G,
    mut lo: f64,
    mut hi: f64,
    mut g_lo: f64,
    mut g_hi: f64,
    stop: BisectionStop,
) -> Result<f64, E>
where
    G: FnMut(f64) -> Result<f64, E>,
{
    debug_assert!(g_lo.signum() != g_hi.signum());
    let best = |lo: f64, hi: f64, g_lo: f64, g_hi: f64| {
        if g_lo.abs() <= g_hi.abs() {
            lo
        } else {
            hi
        }
    };
    loop {
        let residual_ok = stop
            .residual
            .is_none_or(|r| g_lo.abs().min(g_hi.abs()) <= r);
        if hi - lo <= stop.width && residual_ok {
            return Ok(best(lo, hi, g_lo, g_hi));
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(best(lo, hi, g_lo, g_hi));
        }
        let g_mid = g(mid)?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
}

/// Evenly spaced grid of `points` nodes covering `[a, b]` inclusive.
pub fn uniform_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "a scan grid needs at least two points");
    let step = (b - a) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                b
            } else {
                a + step * i as f64
            }
        })
        .collect()
}

/// Every sign-changing zero of `g` on `grid`, refined to `stop`, in
/// increasing order.
pub fn try_find_zeros_on_grid<E, G>(
    mut g: G,
    grid: &[f64],
    stop: BisectionStop,
) -> Result<Vec<f64>, E>
where
    G: FnMut(f64) -> Result<f64, E>,
{
    let values = grid.iter().map(|&t| g(t)).collect::<Result<Vec<_>, E>>()?;
    sign_changes(&values)
        .into_iter()
        .map(|bracket| match bracket {
            Bracket::Exact(i) => Ok(grid[i]),
            Bracket::Interval(i) => {
                bisect(&mut g, grid[i], grid[i + 1], values[i], values[i + 1], stop)
            }
        })
        .collect()
}

/// All sign-changing zeros of `g` on `[a, b]`.
///
/// The interval is scanned at `scan_points` evenly spaced nodes and every
/// bracket is bisected to a width below `1e-12 * (b - a)`. Zeros closer
/// together than the scan spacing, or tangential zeros, may be missed.
///
/// # Panics
///
/// If `a >= b` or `scan_points < 2`.
pub fn find_zeros<G>(mut g: G, a: f64, b: f64, scan_points: usize) -> Vec<f64>
where
    G: FnMut(f64) -> f64,
{
    assert!(a < b, "find_zeros needs a < b (got {a}, {b})");
    let grid = uniform_grid(a, b, scan_points);
    let stop = BisectionStop {
        width: 1e-12 * (b - a),
        residual: None,
    };
    match try_find_zeros_on_grid(|t| Ok::<_, Infallible>(g(t)), &grid, stop) {
        Ok(z) => z,
        Err(never) => match never {},
    }
}
