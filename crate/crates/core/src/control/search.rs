// Copyright 2026 The qtopc Authors
// SPDX-License-Identifier: Apache-2.0

//! One-dimensional minimisation over the final time.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Best point seen by a line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LineMin {
    pub x: f64,
    pub f: f64,
    pub evals: usize,
}

/// Golden-section search on `[a, b]` until the bracket is shorter than `tol`.
pub(crate) fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> LineMin {
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 <= f2 {
        LineMin {
            x: x1,
            f: f1,
            evals,
        }
    } else {
        LineMin {
            x: x2,
            f: f2,
            evals,
        }
    }
}

/// Coarse scan of `points + 1` equally spaced values on `[lo, hi]`, then a
/// golden-section refinement inside the bracket around the best grid point.
pub(crate) fn scan_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
) -> LineMin {
    let points = points.max(2);
    let h = (hi - lo) / points as f64;
    let grid: Vec<f64> = (0..=points).map(|i| lo + h * i as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = (0..=points)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap();
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(points)];
    let refined = golden_section(&mut f, a, b, tol);
    let evals = points + 1 + refined.evals;
    if refined.f < vals[best] {
        LineMin { evals, ..refined }
    } else {
        LineMin {
            x: grid[best],
            f: vals[best],
            evals,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let r = golden_section(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-6);
        assert!((r.x - 0.3).abs() < 1e-6);
    }

    #[test]
    fn scan_escapes_local_minimum() {
        // Global minimum near 4.7, local one near 1.6.
        let f = |x: f64| x.sin() + 0.01 * x;
        let r = scan_then_golden(f, 0.0, 6.0, 12, 1e-4);
        assert!((r.x - 4.71).abs() < 0.05);
    }
}
