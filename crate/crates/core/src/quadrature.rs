//! Adaptive Gauss–Legendre quadrature on intervals.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Number of nodes in the base rule.
pub const ORDER: usize = 16;

/// Nodes on `[-1, 1]` and their weights, found as roots of the Legendre
/// polynomial by Newton iteration from Chebyshev-like initial guesses.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            derivative = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        if dp != 0.0 {
            derivative = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn rule16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(ORDER))
}

/// One application of the 16-point rule on `[a, b]`.
pub fn gauss16<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<f64, E> {
    let (nodes, weights) = rule16();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x)?;
    }
    Ok(sum * half)
}

/// Failure modes of [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureError<E> {
    /// The integrand itself failed at some abscissa.
    Integrand(E),
    /// Bisection hit the depth limit on this subinterval.
    NotConverged { a: f64, b: f64 },
}

/// Pieces narrower than this fraction of the full interval are accepted once their
/// two estimates agree to within a thousandth of the overall tolerance. This lets the
/// recursion terminate at integrable square-root kinks, where the local error shrinks
/// like `width^1.5` and would never meet a share proportional to `width`.
const MIN_RELATIVE_WIDTH: f64 = 1e-9;

/// Integrates `f` over `[a, b]` by recursive bisection until each piece's
/// two-half estimate agrees with its whole estimate to within its share of `tol`.
pub fn integrate<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64, QuadratureError<E>> {
    if a == b {
        return Ok(0.0);
    }
    let whole = gauss16(&mut f, a, b).map_err(QuadratureError::Integrand)?;
    let floor = Floor { width: MIN_RELATIVE_WIDTH * (b - a).abs(), tol: 1e-3 * tol };
    refine(&mut f, a, b, whole, tol, max_depth, floor)
}

#[derive(Clone, Copy)]
struct Floor {
    width: f64,
    tol: f64,
}

fn refine<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    floor: Floor,
) -> Result<f64, QuadratureError<E>> {
    let mid = 0.5 * (a + b);
    let left = gauss16(f, a, mid).map_err(QuadratureError::Integrand)?;
    let right = gauss16(f, mid, b).map_err(QuadratureError::Integrand)?;
    let split = left + right;
    let err = (split - whole).abs();
    if err <= tol || ((b - a).abs() <= floor.width && err <= floor.tol) {
        return Ok(split);
    }
    if depth == 0 {
        return Err(QuadratureError::NotConverged { a, b });
    }
    Ok(refine(f, a, mid, left, 0.5 * tol, depth - 1, floor)?
        + refine(f, mid, b, right, 0.5 * tol, depth - 1, floor)?)
}
