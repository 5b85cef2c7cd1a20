//! Per-face metric geometry: edge lengths from radii, inner and extended
//! angles, hyperbolic areas and admissibility.
//!
//! Lengths of a face are always passed as a triple indexed by corner: entry
//! `m` is the length of the edge *opposite* corner `m`.

use std::f64::consts::{LN_2, PI};

use thiserror::Error;

use crate::surface::{Geometry, WeightedTriangulation};

/// Inputs to `acos`/`acosh` may overshoot their domain by at most this much
/// before being treated as an error instead of being clamped.
pub const DOMAIN_CLAMP: f64 = 1e-12;

/// Radii above this use the logarithmic form of the hyperbolic length.
const LARGE_RADIUS: f64 = 350.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("radius {value} at vertex {vertex} is not a positive finite number")]
    NonPositiveRadius { vertex: usize, value: f64 },
    #[error("expected {expected} radii, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hyperbolic length undefined: arccosh argument {argument} < 1")]
    Domain { argument: f64 },
    #[error("face lengths {lengths:?} violate the triangle inequality")]
    Inadmissible { lengths: [f64; 3] },
    #[error("face lengths {lengths:?} degenerate at more than one corner")]
    Ambiguous { lengths: [f64; 3] },
}

/// Radii of a circle packing together with the geometry they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingMetric {
    radii: Vec<f64>,
    geometry: Geometry,
}

impl PackingMetric {
    pub fn new(radii: Vec<f64>, geometry: Geometry) -> Result<Self, GeomError> {
        check_radii(&radii, radii.len())?;
        Ok(Self { radii, geometry })
    }

    /// Metric with coordinates `u_i = ln s_i^2`. Hyperbolic coordinates must be negative.
    pub fn from_u(u: &[f64], geometry: Geometry) -> Result<Self, GeomError> {
        let radii = u.iter().map(|&ui| radius_from_u(ui, geometry)).collect();
        Self::new(radii, geometry)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn into_radii(self) -> Vec<f64> {
        self.radii
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn s(&self) -> Vec<f64> {
        self.radii.iter().map(|&r| s_of(r, self.geometry)).collect()
    }

    pub fn g(&self) -> Vec<f64> {
        self.radii.iter().map(|&r| s_of(r, self.geometry).powi(2)).collect()
    }

    pub fn u(&self) -> Vec<f64> {
        self.radii.iter().map(|&r| u_of(r, self.geometry)).collect()
    }
}

/// `s = r` (Euclidean) or `tanh(r/2)` (hyperbolic).
pub fn s_of(r: f64, geometry: Geometry) -> f64 {
    match geometry {
        Geometry::Euclidean => r,
        Geometry::Hyperbolic => (0.5 * r).tanh(),
    }
}

/// `u = ln s^2`.
pub fn u_of(r: f64, geometry: Geometry) -> f64 {
    match geometry {
        Geometry::Euclidean => 2.0 * r.ln(),
        // ln tanh^2(r/2) = 2 ln((1 - e^-r)/(1 + e^-r))
        Geometry::Hyperbolic => {
            let x = (-r).exp();
            let numerator = if r < 1.0 { (-(-r).exp_m1()).ln() } else { (-x).ln_1p() };
            2.0 * (numerator - x.ln_1p())
        }
    }
}

/// Inverse of [`u_of`]. Returns NaN for hyperbolic `u >= 0`.
pub fn radius_from_u(u: f64, geometry: Geometry) -> f64 {
    let s = (0.5 * u).exp();
    match geometry {
        Geometry::Euclidean => s,
        // 2 atanh(s) = ln(1 + s) - ln(1 - s), with 1 - s taken from expm1
        Geometry::Hyperbolic if u < 0.0 => s.ln_1p() - (-(0.5 * u).exp_m1()).ln(),
        Geometry::Hyperbolic => f64::NAN,
    }
}

/// `dr/du` at radius `r`: `r/2` (Euclidean) or `sinh(r)/2` (hyperbolic).
pub fn dr_du(r: f64, geometry: Geometry) -> f64 {
    match geometry {
        Geometry::Euclidean => 0.5 * r,
        Geometry::Hyperbolic => 0.5 * r.sinh(),
    }
}

pub(crate) fn check_radii(radii: &[f64], expected: usize) -> Result<(), GeomError> {
    if radii.len() != expected {
        return Err(GeomError::DimensionMismatch { expected, got: radii.len() });
    }
    match radii.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        Some(vertex) => Err(GeomError::NonPositiveRadius { vertex, value: radii[vertex] }),
        None => Ok(()),
    }
}

/// Length of the edge between circles of radii `ri`, `rj` at inversive distance `weight`.
pub fn edge_length(ri: f64, rj: f64, weight: f64, geometry: Geometry) -> Result<f64, GeomError> {
    match geometry {
        Geometry::Euclidean => {
            let sq = ri * ri + rj * rj + 2.0 * ri * rj * weight;
            if sq <= 0.0 {
                return Err(GeomError::Domain { argument: sq });
            }
            Ok(sq.sqrt())
        }
        Geometry::Hyperbolic if ri.max(rj) > LARGE_RADIUS => {
            // acosh(x) = ln(2x) + O(x^-2) with
            // 2x = e^{ri+rj} ((1+a)(1+b) + I(1-a)(1-b)) / 2, a = e^{-2ri}, b = e^{-2rj}
            let a = (-2.0 * ri).exp();
            let b = (-2.0 * rj).exp();
            let inner = 0.5 * ((1.0 + a) * (1.0 + b) + weight * (1.0 - a) * (1.0 - b));
            if inner <= 0.0 {
                return Err(GeomError::Domain { argument: inner });
            }
            Ok(ri + rj + inner.ln())
        }
        Geometry::Hyperbolic => {
            // cosh l - 1 = 2 sinh^2((ri-rj)/2) + (1+I) sinh ri sinh rj
            let y = 2.0 * (0.5 * (ri - rj)).sinh().powi(2) + (1.0 + weight) * ri.sinh() * rj.sinh();
            if y < -DOMAIN_CLAMP {
                return Err(GeomError::Domain { argument: 1.0 + y });
            }
            let y = y.max(0.0);
            Ok((y + (y * (y + 2.0)).sqrt()).ln_1p())
        }
    }
}

/// Lengths of face `f`, indexed by the corner each edge is opposite to.
pub fn face_lengths(
    surface: &WeightedTriangulation,
    radii: &[f64],
    f: usize,
) -> Result<[f64; 3], GeomError> {
    let [a, b, c] = surface.faces()[f];
    let w = surface.face_edges(f).map(|e| surface.weights()[e]);
    let geometry = surface.geometry();
    Ok([
        edge_length(radii[b], radii[c], w[0], geometry)?,
        edge_length(radii[a], radii[c], w[1], geometry)?,
        edge_length(radii[a], radii[b], w[2], geometry)?,
    ])
}

/// Strict triangle inequalities. Equality counts as inadmissible.
pub fn face_admissible(lengths: [f64; 3]) -> bool {
    let [a, b, c] = lengths;
    a < b + c && b < a + c && c < a + b
}

/// Smallest triangle-inequality slack divided by the perimeter. Positive iff admissible.
pub fn face_slack(lengths: [f64; 3]) -> f64 {
    let [a, b, c] = lengths;
    let p = a + b + c;
    (b + c - a).min(a + c - b).min(a + b - c) / p
}

/// `ln sinh(x)` for `x > 0`, without overflow.
fn ln_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp_m1()).ln() - LN_2
}

/// Inner angles of an admissible face.
///
/// Uses the half-angle tangent forms of the Euclidean and hyperbolic laws of
/// cosines, which stay accurate for thin triangles and large hyperbolic lengths.
pub fn inner_angles(lengths: [f64; 3], geometry: Geometry) -> Result<[f64; 3], GeomError> {
    if !face_admissible(lengths) {
        return Err(GeomError::Inadmissible { lengths });
    }
    let [a, b, c] = lengths;
    let s = 0.5 * (a + b + c);
    // half-perimeter differences computed without cancellation through s
    let d = [0.5 * (b + c - a), 0.5 * (a + c - b), 0.5 * (a + b - c)];
    let log = |x: f64| match geometry {
        Geometry::Euclidean => x.ln(),
        Geometry::Hyperbolic => ln_sinh(x),
    };
    let ls = log(s);
    let ld = d.map(log);
    let angle = |m: usize, n: usize, p: usize| {
        // tan^2(theta_m / 2) = f(s - a_n) f(s - a_p) / (f(s) f(s - a_m))
        2.0 * (0.5 * (ld[n] + ld[p] - ls - ld[m])).exp().atan()
    };
    Ok([angle(0, 1, 2), angle(1, 0, 2), angle(2, 0, 1)])
}

/// Inner angles extended by constants past the triangle inequality:
/// the corner opposite a dominating edge gets `pi`, the other two get `0`.
pub fn extended_angles(lengths: [f64; 3], geometry: Geometry) -> Result<[f64; 3], GeomError> {
    if face_admissible(lengths) {
        return inner_angles(lengths, geometry);
    }
    let [a, b, c] = lengths;
    let dominated = [a >= b + c, b >= a + c, c >= a + b];
    match dominated {
        [true, false, false] => Ok([PI, 0.0, 0.0]),
        [false, true, false] => Ok([0.0, PI, 0.0]),
        [false, false, true] => Ok([0.0, 0.0, PI]),
        _ => Err(GeomError::Ambiguous { lengths }),
    }
}

/// Angle deficit `pi - (sum of angles)` of a hyperbolic triangle.
pub fn hyperbolic_triangle_area(angles: [f64; 3]) -> f64 {
    PI - angles.iter().sum::<f64>()
}

/// `d theta_m / d a_n` for an admissible face, where `a_n` is the edge opposite corner `n`.
pub fn angle_length_derivatives(
    lengths: [f64; 3],
    angles: [f64; 3],
    geometry: Geometry,
) -> [[f64; 3]; 3] {
    let f = |x: f64| match geometry {
        Geometry::Euclidean => x,
        Geometry::Hyperbolic => x.sinh(),
    };
    let fl = lengths.map(f);
    let mut out = [[0.0; 3]; 3];
    for m in 0..3 {
        let (n, p) = ((m + 1) % 3, (m + 2) % 3);
        let diag = fl[m] / (fl[n] * fl[p] * angles[m].sin());
        out[m][m] = diag;
        out[m][n] = -diag * angles[p].cos();
        out[m][p] = -diag * angles[n].cos();
    }
    out
}

/// `(d l / d u_i, d l / d u_j)` for the edge of length `length` between radii `ri`, `rj`,
/// with `u = ln s^2`.
pub fn length_u_derivatives(
    ri: f64,
    rj: f64,
    weight: f64,
    length: f64,
    geometry: Geometry,
) -> (f64, f64) {
    match geometry {
        Geometry::Euclidean => (
            0.5 * ri * (ri + weight * rj) / length,
            0.5 * rj * (rj + weight * ri) / length,
        ),
        Geometry::Hyperbolic => {
            let (shi, chi, shj, chj) = (ri.sinh(), ri.cosh(), rj.sinh(), rj.cosh());
            let shl = length.sinh();
            (
                0.5 * shi * (shi * chj + weight * chi * shj) / shl,
                0.5 * shj * (shj * chi + weight * chj * shi) / shl,
            )
        }
    }
}

/// Per-corner angles of every face, with the degenerate faces marked.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerAngles {
    pub angles: Vec<[f64; 3]>,
    /// `true` where the face violated a triangle inequality and constant angles were used.
    pub degenerate: Vec<bool>,
}

impl CornerAngles {
    pub fn compute(
        surface: &WeightedTriangulation,
        radii: &[f64],
        extended: bool,
    ) -> Result<Self, GeomError> {
        check_radii(radii, surface.vertex_count())?;
        let n = surface.faces().len();
        let mut angles = Vec::with_capacity(n);
        let mut degenerate = Vec::with_capacity(n);
        for f in 0..n {
            let l = face_lengths(surface, radii, f)?;
            let ok = face_admissible(l);
            angles.push(if extended {
                extended_angles(l, surface.geometry())?
            } else {
                inner_angles(l, surface.geometry())?
            });
            degenerate.push(!ok);
        }
        Ok(Self { angles, degenerate })
    }

    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }
}

/// Result of checking every face of a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Admissibility {
    pub violating_faces: Vec<usize>,
    /// Smallest relative slack over all faces.
    pub min_slack: f64,
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        self.violating_faces.is_empty()
    }
}

pub fn admissible(surface: &WeightedTriangulation, radii: &[f64]) -> Result<Admissibility, GeomError> {
    check_radii(radii, surface.vertex_count())?;
    let mut violating_faces = Vec::new();
    let mut min_slack = f64::INFINITY;
    for f in 0..surface.faces().len() {
        let l = face_lengths(surface, radii, f)?;
        min_slack = min_slack.min(face_slack(l));
        if !face_admissible(l) {
            violating_faces.push(f);
        }
    }
    Ok(Admissibility { violating_faces, min_slack })
}

/// Radius beyond which a hyperbolic face is admissible at the edge opposite
/// the vertex, whatever the other two radii: `cosh^2 r > 1 + I_jk`.
pub fn triangle_inequality_threshold(opposite_weight: f64) -> f64 {
    (1.0 + opposite_weight.max(0.0)).sqrt().acosh()
}
