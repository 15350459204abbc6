//! One-dimensional searches and a simplex minimizer shared by the exponent
//! routines.

use crate::scalar::Real;

/// Bracket width at which golden-section searches stop.
pub const GOLDEN_TOL: f64 = 1e-10;
/// Parameter tolerance for bisection.
pub const BISECT_XTOL: f64 = 1e-10;
/// Residual tolerance for bisection.
pub const BISECT_FTOL: f64 = 1e-12;

/// Maximizes a unimodal `f` on `[lo, hi]`. Returns `(argmax, max)`.
///
/// The endpoints are compared against the interior optimum at the end so a
/// monotone objective reports its boundary value exactly.
pub fn golden_section_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let (mut best_x, mut best_f) = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best_f {
            best_x = x;
            best_f = fx;
        }
    }
    (best_x, best_f)
}

/// Root of a strictly decreasing `g` with `g(lo) > target > g(hi)`.
///
/// Stops once the bracket is narrower than `xtol` (relative to `|x|` when
/// `|x| > 1`) or the residual is below `ftol`.
pub fn bisect_decreasing<T: Real, F: FnMut(T) -> T>(mut g: F, target: T, lo: T, hi: T, xtol: T, ftol: T) -> T {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..400 {
        let m = a + (b - a) / T::lit(2.0);
        let r = g(m) - target;
        if r.abs() <= ftol {
            return m;
        }
        if r > T::zero() {
            a = m;
        } else {
            b = m;
        }
        if (b - a) <= xtol * m.abs().max(T::one()) {
            break;
        }
    }
    a + (b - a) / T::lit(2.0)
}

/// Outcome of [`minimize_on_simplex`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMin<T> {
    pub point: Vec<T>,
    pub value: T,
    /// The pairwise ascent met its tolerance before the sweep cap.
    pub converged: bool,
}

const MAX_SWEEPS: usize = 400;
const GRID_PER_AXIS: usize = 33;
const GRID_POINT_CAP: usize = 250_000;

/// Minimizes a convex `f` over the probability simplex of dimension `k`.
///
/// Pairwise coordinate descent (shift mass between two coordinates, exact
/// line search) from the uniform point, until a full sweep improves by less
/// than `tol`. If that does not converge, a 33-points-per-axis grid with
/// local refinement is tried as well and the better point wins.
pub fn minimize_on_simplex<T: Real, F: Fn(&[T]) -> T>(f: F, k: usize, tol: T) -> SimplexMin<T> {
    assert!(k >= 1);
    let mut q = vec![T::one() / T::lit(k as f64); k];
    let mut value = f(&q);
    if k == 1 {
        return SimplexMin { point: q, value, converged: true };
    }

    let line_tol = T::tol(1e-13);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let before = value;
        for i in 0..k {
            for j in (i + 1)..k {
                let (qi, qj) = (q[i], q[j]);
                let total = qi + qj;
                if total <= T::zero() {
                    continue;
                }
                // q_i = s, q_j = total - s
                let mut trial = q.clone();
                let (s, neg) = golden_section_max(
                    |s: T| {
                        trial[i] = s;
                        trial[j] = total - s;
                        -f(&trial)
                    },
                    T::zero(),
                    total,
                    line_tol * total.max(T::min_positive_value()),
                );
                if -neg < value {
                    q[i] = s;
                    q[j] = total - s;
                    value = -neg;
                }
            }
        }
        if before - value <= tol * value.abs().max(T::one()) {
            converged = true;
            break;
        }
    }

    if !converged {
        if let Some(grid) = grid_refine(&f, k) {
            if grid.value < value {
                return SimplexMin { point: grid.point, value: grid.value, converged: false };
            }
        }
    }
    SimplexMin { point: q, value, converged }
}

fn grid_refine<T: Real, F: Fn(&[T]) -> T>(f: &F, k: usize) -> Option<SimplexMin<T>> {
    let steps = GRID_PER_AXIS - 1;
    if binomial(steps + k - 1, k - 1) > GRID_POINT_CAP {
        return None;
    }
    let mut best: Option<(Vec<T>, T)> = None;
    let mut counts = vec![0usize; k];
    compositions(steps, 0, &mut counts, &mut |c| {
        let p: Vec<T> = c.iter().map(|&n| T::lit(n as f64 / steps as f64)).collect();
        let v = f(&p);
        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
            best = Some((p, v));
        }
    });
    let (mut p, mut v) = best?;

    // Pattern search: move `h` of mass between every ordered pair, halve `h`
    // when nothing improves.
    let mut h = T::one() / T::lit(steps as f64);
    while h > T::tol(1e-13) {
        let mut improved = false;
        for i in 0..k {
            for j in 0..k {
                if i == j || p[j] < h {
                    continue;
                }
                let mut t = p.clone();
                t[i] = t[i] + h;
                t[j] = t[j] - h;
                let tv = f(&t);
                if tv < v {
                    p = t;
                    v = tv;
                    improved = true;
                }
            }
        }
        if !improved {
            h = h / T::lit(2.0);
        }
    }
    Some(SimplexMin { point: p, value: v, converged: false })
}

fn compositions(left: usize, idx: usize, counts: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if idx + 1 == counts.len() {
        counts[idx] = left;
        visit(counts);
        return;
    }
    for n in 0..=left {
        counts[idx] = n;
        compositions(left - n, idx + 1, counts, visit);
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_interior_and_edge_maxima() {
        let (x, fx) = golden_section_max(|x: f64| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8 && fx.abs() < 1e-15);
        let (x, _) = golden_section_max(|x: f64| x, 0.0, 2.0, 1e-10);
        assert_eq!(x, 2.0);
    }

    #[test]
    fn bisection_on_decreasing_map() {
        let x = bisect_decreasing(|x: f64| 1.0 / x, 4.0, 1e-6, 100.0, 1e-12, 1e-15);
        assert!((x - 0.25).abs() < 1e-11);
    }

    #[test]
    fn simplex_minimizer_hits_known_optimum() {
        let target = [0.2, 0.5, 0.3];
        let f = |q: &[f64]| q.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let m = minimize_on_simplex(f, 3, 1e-14);
        for (a, b) in m.point.iter().zip(target) {
            assert!((a - b).abs() < 1e-6, "{:?}", m.point);
        }
    }

    #[test]
    fn grid_fallback_agrees_with_ascent() {
        let f = |q: &[f64]| (q[0] - 0.7).powi(2) + (q[1] - 0.1).powi(2) + (q[2] - 0.2).powi(2);
        let g = grid_refine(&f, 3).unwrap();
        assert!((g.point[0] - 0.7).abs() < 1e-9);
        assert_eq!(binomial(34, 2), 561);
    }
}
