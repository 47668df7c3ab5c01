//! Bracketed scalar root finding.
//!
//! Every root this crate needs lives on an interval where the function
//! is monotone (pieces of Ψ delimited by the zeros of h, the quadratic
//! h′, the scalar Neimark-Sacker condition), so a safeguarded
//! bisection/secant hybrid is enough: secant steps when they stay
//! inside the bracket, bisection otherwise.

/// Refine a root of `f` on `[lo, hi]`, which must bracket a sign change.
/// Converges to |hi - lo| <= xtol or |f| <= ftol.
pub fn bracketed_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64, ftol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa * fb < 0.0, "root not bracketed: f({a})={fa}, f({b})={fb}");
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        // secant proposal, clipped to the open bracket
        let mut x = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        let margin = 0.01 * (b - a).abs();
        if !(x > a.min(b) + margin && x < a.max(b) - margin) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 || fx.abs() <= ftol {
            return x;
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Scan `[lo, hi]` with `n` uniform cells and return one refined root per
/// sign change. Tangencies (touching zeros) produce no sign change and
/// are handled by callers that know where they can occur.
pub fn scan_roots<F: Fn(f64) -> f64 + Copy>(
    f: F,
    lo: f64,
    hi: f64,
    n: usize,
    xtol: f64,
    ftol: f64,
) -> Vec<f64> {
    let mut roots = Vec::new();
    if !(hi > lo) || n < 2 {
        return roots;
    }
    let step = (hi - lo) / n as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + step * i as f64 };
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            roots.push(bracketed_root(f, x0, x1, xtol, ftol));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= xtol);
    roots
}
