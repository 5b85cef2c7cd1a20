//! The one-parameter tetrahedron family `r = (1, x, x, x)` with all inversive
//! distances equal to 2. Constant R-curvature on this family is equivalent to
//! `f(x) = 0`; `x = 1` is a root and a second root lies in `(2, 4 + sqrt 18)`,
//! giving two constant-curvature metrics that are not scalings of each other.

use std::f64::consts::PI;

use thiserror::Error;

use crate::curvature::{curvature, CurvatureError};
use crate::surface::{tetrahedron, Geometry, WeightedTriangulation};

/// Inversive distance on every edge of the family.
pub const WEIGHT: f64 = 2.0;

/// Right end of the admissible interval, `4 + sqrt 18`.
pub fn upper_limit() -> f64 {
    4.0 + 18f64.sqrt()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TetraError {
    #[error("x = {x} is outside the admissible interval (0, 4 + sqrt 18)")]
    Domain { x: f64 },
    #[error("f has the same sign at both ends of [{a}, {b}]")]
    Bracket { a: f64, b: f64 },
    #[error("need at least two samples")]
    Samples,
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

/// Member `(1, x, x, x)` of the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetraFamily {
    pub x: f64,
}

impl TetraFamily {
    pub fn new(x: f64) -> Result<Self, TetraError> {
        if x > 0.0 && x < upper_limit() {
            Ok(TetraFamily { x })
        } else {
            Err(TetraError::Domain { x })
        }
    }

    pub fn radii(&self) -> [f64; 4] {
        [1.0, self.x, self.x, self.x]
    }

    /// Length of the three edges at vertex 0.
    pub fn spoke_length(&self) -> f64 {
        let x = self.x;
        (x * x + 4.0 * x + 1.0).sqrt()
    }

    /// Length of the three edges of the opposite face.
    pub fn rim_length(&self) -> f64 {
        6f64.sqrt() * self.x
    }
}

/// The tetrahedron with every inversive distance equal to 2.
pub fn family_surface() -> WeightedTriangulation {
    tetrahedron(Geometry::Euclidean, WEIGHT)
}

/// `f(x) = arcsin((sqrt6 x / 2) / sqrt(x^2 + 4x + 1)) - pi/3 + 2 pi / (3 (3x^2 + 1))`.
pub fn f_of_x(x: f64) -> Result<f64, TetraError> {
    let m = TetraFamily::new(x)?;
    let ratio = (0.5 * m.rim_length() / m.spoke_length()).min(1.0);
    Ok(ratio.asin() - PI / 3.0 + 2.0 * PI / (3.0 * (3.0 * x * x + 1.0)))
}

/// Limit of `f` at the right end of the interval.
pub fn f_upper_limit() -> f64 {
    let u = upper_limit();
    PI / 6.0 + 2.0 * PI / (9.0 * u * u + 3.0)
}

/// R-curvature of `(1, x, x, x)` from the generic surface pipeline.
pub fn tetra_curvature(x: f64) -> Result<[f64; 4], TetraError> {
    let m = TetraFamily::new(x)?;
    let r = curvature(&family_surface(), &m.radii(), 2.0, false)?.r;
    Ok([r[0], r[1], r[2], r[3]])
}

/// Largest gap between curvature components.
pub fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    hi - lo
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondRoot {
    pub x0: f64,
    pub f_x0: f64,
    /// Common R-curvature of `(1, x0, x0, x0)`.
    pub curvature: f64,
    /// Spread of the four curvature components at `x0`.
    pub curvature_spread: f64,
    pub iterations: usize,
}

/// Bisection for `f` on `[a, b]` until `|f| < 1e-12` and the bracket is narrower than `1e-12`.
pub fn bisect(a: f64, b: f64) -> Result<(f64, usize), TetraError> {
    let (mut lo, mut hi) = (a, b);
    let (f_lo, f_hi) = (f_of_x(lo)?, f_of_x(hi)?);
    if f_lo.signum() == f_hi.signum() {
        return Err(TetraError::Bracket { a, b });
    }
    let rising = f_lo < 0.0;
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let fm = f_of_x(mid)?;
        iterations += 1;
        if (fm.abs() < 1e-12 && hi - lo < 1e-12) || mid == lo || mid == hi {
            return Ok((mid, iterations));
        }
        if (fm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// The root of `f` in `(2, 4 + sqrt 18)`.
pub fn find_second_root() -> Result<SecondRoot, TetraError> {
    let (x0, iterations) = bisect(2.0, upper_limit() - 1e-9)?;
    let r = tetra_curvature(x0)?;
    Ok(SecondRoot {
        x0,
        f_x0: f_of_x(x0)?,
        curvature: r.iter().sum::<f64>() / 4.0,
        curvature_spread: spread(&r),
        iterations,
    })
}

/// `samples` equally spaced points `(x, f(x))` on `[a, b]`.
pub fn emit_f_curve(a: f64, b: f64, samples: usize) -> Result<Vec<(f64, f64)>, TetraError> {
    if samples < 2 {
        return Err(TetraError::Samples);
    }
    if !(a < b) {
        return Err(TetraError::Domain { x: a });
    }
    (0..samples)
        .map(|i| {
            let x = if i + 1 == samples { b } else { a + (b - a) * i as f64 / (samples - 1) as f64 };
            Ok((x, f_of_x(x)?))
        })
        .collect()
}

/// Default plotting range and resolution.
pub const DEFAULT_CURVE: (f64, f64, usize) = (0.5, 8.0, 751);

/// CSV with header `x,f_x` and seventeen significant digits.
pub fn f_curve_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("x,f_x\n");
    for (x, y) in points {
        out.push_str(&format!("{x:.16e},{y:.16e}\n"));
    }
    out
}
