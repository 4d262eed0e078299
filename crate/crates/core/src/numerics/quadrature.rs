//! Globally adaptive Simpson quadrature.
//!
//! Each panel carries a coarse three-point Simpson estimate and a fine
//! estimate from its two halves. Their difference gives the Richardson
//! error estimate `|fine - coarse| / 15`, and the extrapolated value
//! `fine + (fine - coarse) / 15` is what gets summed. The panel with the
//! largest error estimate is split until the summed estimate drops below
//! `max(abs_tol, rel_tol * |integral|)`.
//!
//! Panels are split in a fixed order (largest error first, ties broken by
//! position) and summed left to right, so results are bit-reproducible for
//! a given integrand and [`QuadratureSpec`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Number of equal panels the integration range is cut into before any
/// adaptive refinement. Guards against aliasing when the first few samples
/// happen to land on zeros of an oscillatory integrand.
const INITIAL_PANELS: usize = 16;

/// Tolerances and work limit for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2_000_000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidQuadrature(format!(
                "absolute tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidQuadrature(format!(
                "relative tolerance must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions < 2 {
            return Err(Error::InvalidQuadrature(format!(
                "max subdivisions must be at least 2, got {}",
                self.max_subdivisions
            )));
        }
        Ok(())
    }

    fn target(&self, estimate: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * estimate.abs())
    }
}

/// A panel `[a, b]` with samples at `a, a+h/4, a+h/2, a+3h/4, b`.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    f: [f64; 5],
    coarse: f64,
    fine: f64,
}

impl Panel {
    fn new(a: f64, b: f64, f: [f64; 5]) -> Self {
        let h = b - a;
        let coarse = h * (f[0] + 4.0 * f[2] + f[4]) / 6.0;
        let fine = h * (f[0] + 4.0 * f[1] + 2.0 * f[2] + 4.0 * f[3] + f[4]) / 12.0;
        Self {
            a,
            b,
            f,
            coarse,
            fine,
        }
    }

    fn estimate(&self) -> f64 {
        self.fine + (self.fine - self.coarse) / 15.0
    }

    fn error(&self) -> f64 {
        (self.fine - self.coarse).abs() / 15.0
    }

    fn midpoint(&self) -> f64 {
        self.a + 0.5 * (self.b - self.a)
    }

    /// True when the quarter points of either half would collapse onto
    /// existing nodes in floating point.
    fn is_unsplittable(&self) -> bool {
        let m = self.midpoint();
        let q1 = self.a + 0.25 * (self.b - self.a);
        let q3 = m + 0.25 * (self.b - self.a);
        let e1 = self.a + 0.125 * (self.b - self.a);
        let e4 = q3 + 0.125 * (self.b - self.a);
        !(self.a < e1 && e1 < q1 && q1 < m && m < q3 && q3 < e4 && e4 < self.b)
    }

    fn split<F: FnMut(f64) -> f64>(&self, f: &mut F) -> (Panel, Panel) {
        let m = self.midpoint();
        let h = self.b - self.a;
        let l1 = self.a + 0.125 * h;
        let l3 = self.a + 0.375 * h;
        let r1 = m + 0.125 * h;
        let r3 = m + 0.375 * h;
        let left = Panel::new(self.a, m, [self.f[0], f(l1), self.f[1], f(l3), self.f[2]]);
        let right = Panel::new(m, self.b, [self.f[2], f(r1), self.f[3], f(r3), self.f[4]]);
        (left, right)
    }
}

struct Ranked(Panel);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error()
            .total_cmp(&other.0.error())
            .then_with(|| other.0.a.total_cmp(&self.0.a))
    }
}

/// Integrates `f` over `[a, b]`.
///
/// Requires `a <= b`; returns `0.0` for an empty interval.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_piecewise(f, &[a, b], spec)
}

/// Integrates `f` over `[points[0], points[last]]`, never letting a panel
/// straddle one of the interior `points`.
///
/// Useful when the integrand has kinks at known locations, such as the
/// sample times of an interpolated trajectory.
pub fn integrate_piecewise<F>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    let (Some(&a), Some(&b)) = (points.first(), points.last()) else {
        return Ok(0.0);
    };
    if points.windows(2).any(|w| w[0].is_nan() || w[0] > w[1]) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidQuadrature(format!(
            "integration limits must be finite and non-decreasing, got {points:?}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    let pieces: Vec<(f64, f64)> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    let per_piece = INITIAL_PANELS.div_ceil(pieces.len()).max(1);
    for &(lo, hi) in &pieces {
        let width = (hi - lo) / per_piece as f64;
        let mut f_left = f(lo);
        for k in 0..per_piece {
            let pa = lo + width * k as f64;
            let pb = if k + 1 == per_piece {
                hi
            } else {
                lo + width * (k + 1) as f64
            };
            let h = pb - pa;
            let f_right = f(pb);
            let samples = [
                f_left,
                f(pa + 0.25 * h),
                f(pa + 0.5 * h),
                f(pa + 0.75 * h),
                f_right,
            ];
            heap.push(Ranked(Panel::new(pa, pb, samples)));
            f_left = f_right;
        }
    }

    let mut subdivisions = heap.len();
    let (mut total, mut total_err) = heap.iter().fold((0.0, 0.0), |(s, e), p| {
        (s + p.0.estimate(), e + p.0.error())
    });

    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::QuadratureFailure {
                a,
                b,
                subdivisions,
                error_estimate: total_err,
            });
        }
        if total_err <= spec.target(total) {
            // Running sums drift; confirm against an exact resummation.
            let (s, e) = resum(&heap, &frozen);
            total = s;
            total_err = e;
            if total_err <= spec.target(total) {
                break;
            }
        }
        let Some(Ranked(worst)) = heap.pop() else {
            return Err(Error::QuadratureFailure {
                a,
                b,
                subdivisions,
                error_estimate: total_err,
            });
        };
        if worst.is_unsplittable() {
            frozen.push(worst);
            continue;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::QuadratureFailure {
                a,
                b,
                subdivisions,
                error_estimate: total_err,
            });
        }
        let (left, right) = worst.split(&mut f);
        total += left.estimate() + right.estimate() - worst.estimate();
        total_err += left.error() + right.error() - worst.error();
        heap.push(Ranked(left));
        heap.push(Ranked(right));
        subdivisions += 1;
    }

    let mut panels: Vec<Panel> = heap.into_iter().map(|r| r.0).chain(frozen).collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(panels.iter().map(Panel::estimate).sum())
}

fn resum(heap: &BinaryHeap<Ranked>, frozen: &[Panel]) -> (f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().map(|r| &r.0).chain(frozen.iter()).collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels
        .iter()
        .fold((0.0, 0.0), |(s, e), p| (s + p.estimate(), e + p.error()))
}

/// Running integral `t -> ∫_origin^t f` that remembers every value it has
/// produced, so later queries only integrate from the nearest known point
/// below them.
///
/// One instance per worker; it is not meant to be shared across threads.
pub struct CumulativeIntegral<F> {
    integrand: F,
    spec: QuadratureSpec,
    knots: Vec<(f64, f64)>,
}

impl<F: FnMut(f64) -> f64> CumulativeIntegral<F> {
    pub fn new(integrand: F, origin: f64, spec: QuadratureSpec) -> Self {
        Self {
            integrand,
            spec,
            knots: vec![(origin, 0.0)],
        }
    }

    pub fn origin(&self) -> f64 {
        self.knots[0].0
    }

    /// Cached `(t, value)` pairs in increasing `t`.
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn value_at(&mut self, t: f64) -> Result<f64> {
        if t.is_nan() || t < self.origin() {
            return Err(Error::InvalidQuadrature(format!(
                "cumulative integral queried at {t}, before its origin {}",
                self.origin()
            )));
        }
        let idx = self.knots.partition_point(|k| k.0 <= t) - 1;
        let (t0, v0) = self.knots[idx];
        if t0 == t {
            return Ok(v0);
        }
        let value = v0 + integrate(&mut self.integrand, t0, t, &self.spec)?;
        self.knots.insert(idx + 1, (t, value));
        Ok(value)
    }
}
