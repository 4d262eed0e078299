//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the library.

#![allow(dead_code)]

/// Composite Simpson rule with a fixed, even number of steps.
pub fn simpson_fixed<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, steps: usize) -> f64 {
    let steps = steps + steps % 2;
    let h = (b - a) / steps as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..steps {
        let x = a + h * i as f64;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Integrand of the single-term echo phase, written out from the geometry of
/// two bodies rotating at `omega` while approaching at `speed`.
pub fn echo_integrand(
    separation: f64,
    speed: f64,
    omega: f64,
    state_separation: f64,
    order: i32,
    coefficient: f64,
) -> impl Fn(f64) -> f64 {
    move |t| {
        let z = separation - speed * t;
        let same = (z * z + (state_separation * (omega * t / 2.0).sin()).powi(2)).sqrt();
        let cross = (z * z + (state_separation * (omega * t / 2.0).cos()).powi(2)).sqrt();
        2.0 * coefficient * (same.powi(-order) - cross.powi(-order))
    }
}

/// Sign-change zeros of `t -> ∫_0^t f` on `(0, end]`.
///
/// The running integral is sampled on `points` uniform nodes (each cell
/// integrated with `substeps` Simpson steps) and every sign change is
/// bisected to `width`.
pub fn dense_scan_zeros<F: Fn(f64) -> f64>(
    f: F,
    end: f64,
    points: usize,
    substeps: usize,
    width: f64,
) -> Vec<f64> {
    let h = end / points as f64;
    let mut nodes = Vec::with_capacity(points + 1);
    let mut acc = 0.0;
    nodes.push((0.0, 0.0));
    for i in 0..points {
        let a = h * i as f64;
        let b = if i + 1 == points {
            end
        } else {
            h * (i + 1) as f64
        };
        acc += simpson_fixed(&f, a, b, substeps);
        nodes.push((b, acc));
    }
    let mut zeros = Vec::new();
    for w in nodes.windows(2).skip(1) {
        let ((mut lo, v_lo), (mut hi, v_hi)) = (w[0], w[1]);
        if v_hi == 0.0 {
            zeros.push(hi);
            continue;
        }
        if v_lo == 0.0 || v_lo.signum() == v_hi.signum() {
            continue;
        }
        let (cell, base) = (w[0].0, v_lo);
        let value = |t: f64| base + simpson_fixed(&f, cell, t, substeps);
        while hi - lo > width {
            let mid = 0.5 * (lo + hi);
            let v = value(mid);
            if v == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if v.signum() == v_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        zeros.push(0.5 * (lo + hi));
    }
    zeros
}

/// `1 + 1/1.02 - 2/1.01`, the constraint residual of the collinear
/// configuration `x = 1, dx = 0.01` under `f(d) = 1/d`, to 20 digits.
pub const COLLINEAR_RESIDUAL: f64 = 1.9413706076490002e-4;
