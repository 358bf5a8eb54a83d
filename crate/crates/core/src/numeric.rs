//! Adaptive quadrature used by the tail-moment and Karamata checkers.

/// Relative tolerance used for every tail integral in the crate.
pub const INTEGRAL_RTOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 50;

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// The recursion stops on a segment once the Richardson error estimate is
/// below `rtol` times the magnitude of the whole-interval Simpson estimate
/// (falling back to an absolute floor of `rtol * 1e-300`).
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rtol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);

    // Seed the recursion on a handful of panels so that integrands with
    // structure far from the midpoint are not missed by the first estimate.
    const PANELS: usize = 8;
    let h = (b - a) / PANELS as f64;
    let mut coarse = 0.0;
    let mut panels = Vec::with_capacity(PANELS);
    for i in 0..PANELS {
        let lo = a + h * i as f64;
        let hi = if i + 1 == PANELS { b } else { lo + h };
        let flo = f(lo);
        let fhi = f(hi);
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let s = simpson(lo, hi, flo, fmid, fhi);
        coarse += s;
        panels.push((lo, hi, flo, fmid, fhi, s));
    }
    let scale = coarse.abs().max(whole.abs());
    let tol = (rtol * scale).max(rtol * 1e-300);
    panels
        .into_iter()
        .map(|(lo, hi, flo, fmid, fhi, s)| {
            recurse(&f, lo, hi, flo, fmid, fhi, s, tol / PANELS as f64, MAX_DEPTH)
        })
        .sum()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || m <= a || m >= b {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates `f` over `[a, b]` (with `0 < a < b`) through the substitution
/// `t = exp(s)`, which keeps power-law integrands well conditioned over many
/// decades.
pub fn integrate_log_scale<F>(f: F, a: f64, b: f64, rtol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    debug_assert!(a > 0.0 && b >= a);
    adaptive_simpson(
        |s| {
            let t = s.exp();
            t * f(t)
        },
        a.ln(),
        b.ln(),
        rtol,
    )
}

/// Outcome of integrating a function over `[x, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailIntegral {
    Converged(f64),
    /// The last block still contributed this fraction of the running total.
    Diverged { last_fraction: f64 },
}

/// Integrates `f` over `[x, ∞)` in blocks of one decade on the log scale,
/// stopping once a block adds less than `rtol` relative to the running sum.
pub fn integrate_to_infinity<F>(f: F, x: f64, rtol: f64, max_decades: u32) -> TailIntegral
where
    F: Fn(f64) -> f64,
{
    debug_assert!(x > 0.0);
    let mut total = 0.0;
    let mut lo = x;
    let mut last_fraction = f64::INFINITY;
    for _ in 0..max_decades {
        let hi = lo * 10.0;
        let block = integrate_log_scale(&f, lo, hi, rtol);
        total += block;
        last_fraction = if total == 0.0 { 0.0 } else { (block / total).abs() };
        if last_fraction < rtol * 1e-2 {
            return TailIntegral::Converged(total);
        }
        if !hi.is_finite() {
            break;
        }
        lo = hi;
    }
    TailIntegral::Diverged { last_fraction }
}
