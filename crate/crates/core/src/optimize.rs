//! One-dimensional maximization: a coarse scan to locate the best bracket,
//! then golden-section refinement inside it.

use serde::Serialize;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Assumes `f` is unimodal on the bracket. Stops once the bracket is
/// narrower than `tol` or after `max_iter` reductions.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Maximum
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    let mut iterations = 0;
    while (b - a) > tol && iterations < max_iter {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
        iterations += 1;
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    Maximum {
        x,
        value,
        iterations,
        evaluations,
    }
}

/// Maximizes `f` over a sorted grid, then refines around the best grid point.
///
/// Ties on the grid resolve to the smallest abscissa. The refined point is
/// only accepted when it strictly improves on the grid maximum, so the
/// result never falls below any scanned value.
pub fn scan_then_refine<F>(f: F, grid: &[f64], tol: f64) -> Maximum
where
    F: Fn(f64) -> f64,
{
    assert!(!grid.is_empty(), "scan grid must not be empty");
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let mut result = Maximum {
        x: grid[best],
        value: values[best],
        iterations: 0,
        evaluations: grid.len(),
    };
    if grid.len() < 2 || !values[best].is_finite() {
        return result;
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let refined = golden_section_max(&f, lo, hi, tol, 200);
    result.evaluations += refined.evaluations;
    result.iterations = refined.iterations;
    if refined.value > result.value {
        result.x = refined.x;
        result.value = refined.value;
    }
    result
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
///
/// The `i`-th point is `lo + (hi - lo) * (i / (points - 1))`; a grid of
/// `2 points - 1` reproduces every point of the `points` grid bit for bit.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * (i as f64 / last)
                    }
                })
                .collect()
        }
    }
}

/// `points` logarithmically spaced values from `lo` to `hi` inclusive (`lo > 0`).
pub fn logspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<f64> = linspace(a, b, points).into_iter().map(f64::exp).collect();
    if let Some(first) = out.first_mut() {
        *first = lo;
    }
    if let Some(last) = out.last_mut() {
        *last = hi;
    }
    out
}

/// Bisection for the boundary between a feasible point `inside` and an
/// infeasible point `outside`. Returns the last feasible abscissa.
pub fn bisect_boundary<P>(feasible: P, mut inside: f64, mut outside: f64, tol: f64) -> (f64, usize)
where
    P: Fn(f64) -> bool,
{
    let mut iterations = 0;
    while (outside - inside).abs() > tol && iterations < 200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if feasible(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
        iterations += 1;
    }
    (inside, iterations)
}
