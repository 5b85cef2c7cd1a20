//! The Ricci potential: a function of `u = ln s^2` whose gradient is
//! `K_i - Rbar_i s_i^alpha`, together with its Hessian, a convexity report and a
//! damped Newton solver for prescribed-curvature problems.
//!
//! The potential is evaluated by integrating its gradient 1-form along straight
//! segments, so `F(u0) = 0` at the chosen base point.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::curvature::{
    classical_curvature, curvature_jacobian, sorted_eigen, symmetrized, CurvatureError,
};
use crate::geom::{admissible, radius_from_u, s_of, u_of, GeomError, PackingMetric};
use crate::quadrature::{integrate, QuadratureError};
use crate::surface::{Geometry, WeightedTriangulation};

/// Absolute tolerance of the adaptive line integral over a whole segment.
pub const QUADRATURE_TOL: f64 = 1e-10;
const QUADRATURE_DEPTH: u32 = 50;
/// Number of equally spaced admissibility probes along a genuine segment.
const SEGMENT_PROBES: usize = 64;

/// Newton stops once the sup norm of the gradient falls below this.
pub const NEWTON_TOL: f64 = 1e-11;
pub const NEWTON_MAX_ITER: usize = 200;
const LINE_SEARCH_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("hyperbolic u-coordinate of vertex {vertex} is {value}, must be negative")]
    OutsideDomain { vertex: usize, value: f64 },
    #[error("segment leaves the admissible space near t = {t} (face {face})")]
    SegmentInadmissible { t: f64, face: usize },
    #[error("starting metric is not admissible (faces {faces:?})")]
    Inadmissible { faces: Vec<usize> },
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Newton system is singular at iteration {iteration}")]
    Singular { iteration: usize },
    #[error("line search failed at iteration {iteration} (gradient sup norm {grad_norm:e})")]
    LineSearch { iteration: usize, grad_norm: f64 },
    #[error("no convergence after {iterations} iterations (gradient sup norm {grad_norm:e})")]
    NotConverged { iterations: usize, grad_norm: f64 },
}

impl From<GeomError> for PotentialError {
    fn from(e: GeomError) -> Self {
        PotentialError::Curvature(e.into())
    }
}

/// Target curvature of the potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// The Euclidean average `2 pi chi / sum s_i^alpha`, re-evaluated at every point
    /// (`2 pi chi / N` for `alpha = 0`).
    Average,
    /// Fixed per-vertex values.
    Prescribed(Vec<f64>),
}

impl Target {
    pub fn uniform(n: usize, value: f64) -> Self {
        Target::Prescribed(vec![value; n])
    }

    /// Per-vertex target values at the point with `s_i^alpha = s_alpha[i]`.
    pub fn values(&self, surface: &WeightedTriangulation, s_alpha: &[f64], alpha: f64) -> Result<Vec<f64>, PotentialError> {
        let n = surface.vertex_count();
        match self {
            Target::Prescribed(v) if v.len() != n => {
                Err(PotentialError::DimensionMismatch { expected: n, got: v.len() })
            }
            Target::Prescribed(v) => Ok(v.clone()),
            Target::Average if surface.geometry() != Geometry::Euclidean => {
                Err(PotentialError::Unsupported("an average target needs Euclidean geometry"))
            }
            Target::Average => {
                let total = 2.0 * PI * surface.euler_characteristic() as f64;
                let avg = if alpha == 0.0 { total / n as f64 } else { total / s_alpha.iter().sum::<f64>() };
                Ok(vec![avg; n])
            }
        }
    }

    /// Whether `alpha * Rbar_i <= 0` holds at every vertex (for the average target,
    /// whether `alpha * chi <= 0`).
    pub fn sign_condition(&self, surface: &WeightedTriangulation, alpha: f64) -> bool {
        match self {
            Target::Prescribed(v) => v.iter().all(|&x| alpha * x <= 0.0),
            Target::Average => alpha * surface.euler_characteristic() as f64 <= 0.0,
        }
    }
}

/// A line integral of the potential's 1-form from `u0` to `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialQuery {
    pub u0: Vec<f64>,
    pub u: Vec<f64>,
    pub target: Target,
    pub alpha: f64,
}

/// Radii for a vector of u-coordinates; errors if a hyperbolic coordinate is not negative.
pub fn radii_from_u(u: &[f64], geometry: Geometry) -> Result<Vec<f64>, PotentialError> {
    u.iter()
        .enumerate()
        .map(|(vertex, &value)| {
            let r = radius_from_u(value, geometry);
            if r.is_finite() && r > 0.0 {
                Ok(r)
            } else {
                Err(PotentialError::OutsideDomain { vertex, value })
            }
        })
        .collect()
}

fn s_pow(radii: &[f64], alpha: f64, geometry: Geometry) -> Vec<f64> {
    radii.iter().map(|&r| s_of(r, geometry).powf(alpha)).collect()
}

/// `K_i - Rbar_i s_i^alpha` at `u` (with extended angles when `extended`).
pub fn potential_gradient(
    surface: &WeightedTriangulation,
    u: &[f64],
    target: &Target,
    alpha: f64,
    extended: bool,
) -> Result<Vec<f64>, PotentialError> {
    check_len(surface, u.len())?;
    let radii = radii_from_u(u, surface.geometry())?;
    gradient_at_radii(surface, &radii, target, alpha, extended)
}

fn gradient_at_radii(
    surface: &WeightedTriangulation,
    radii: &[f64],
    target: &Target,
    alpha: f64,
    extended: bool,
) -> Result<Vec<f64>, PotentialError> {
    let k = classical_curvature(surface, radii, extended)?;
    let sa = s_pow(radii, alpha, surface.geometry());
    let rbar = target.values(surface, &sa, alpha)?;
    Ok((0..k.len()).map(|i| k[i] - rbar[i] * sa[i]).collect())
}

fn check_len(surface: &WeightedTriangulation, got: usize) -> Result<(), PotentialError> {
    let expected = surface.vertex_count();
    if got == expected {
        Ok(())
    } else {
        Err(PotentialError::DimensionMismatch { expected, got })
    }
}

fn check_segment(surface: &WeightedTriangulation, a: &[f64], b: &[f64]) -> Result<(), PotentialError> {
    for step in 0..=SEGMENT_PROBES {
        let t = step as f64 / SEGMENT_PROBES as f64;
        let u: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
        let radii = radii_from_u(&u, surface.geometry())?;
        let adm = admissible(surface, &radii)?;
        if let Some(&face) = adm.violating_faces.first() {
            return Err(PotentialError::SegmentInadmissible { t, face });
        }
    }
    Ok(())
}

fn segment_integral(
    surface: &WeightedTriangulation,
    a: &[f64],
    b: &[f64],
    target: &Target,
    alpha: f64,
    extended: bool,
) -> Result<f64, PotentialError> {
    if !extended {
        check_segment(surface, a, b)?;
    }
    let direction: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let integrand = |t: f64| -> Result<f64, PotentialError> {
        let u: Vec<f64> = a.iter().zip(&direction).map(|(x, d)| x + t * d).collect();
        let g = potential_gradient(surface, &u, target, alpha, extended)?;
        Ok(g.iter().zip(&direction).map(|(g, d)| g * d).sum())
    };
    integrate(integrand, 0.0, 1.0, QUADRATURE_TOL, QUADRATURE_DEPTH).map_err(|e| match e {
        QuadratureError::Integrand(e) => e,
        QuadratureError::NotConverged { a, b } => PotentialError::Quadrature { a, b },
    })
}

/// Potential at `q.u` relative to `q.u0`, integrated along the straight segment.
/// The genuine potential requires the whole segment to be admissible.
pub fn potential_value(
    surface: &WeightedTriangulation,
    q: &PotentialQuery,
    extended: bool,
) -> Result<f64, PotentialError> {
    potential_along_path(surface, &[q.u0.clone(), q.u.clone()], &q.target, q.alpha, extended)
}

/// Potential at the last point of a polyline relative to its first point.
pub fn potential_along_path(
    surface: &WeightedTriangulation,
    points: &[Vec<f64>],
    target: &Target,
    alpha: f64,
    extended: bool,
) -> Result<f64, PotentialError> {
    let Some(first) = points.first() else {
        return Ok(0.0);
    };
    check_len(surface, first.len())?;
    let base = radii_from_u(first, surface.geometry())?;
    let adm = admissible(surface, &base)?;
    if !adm.is_admissible() {
        return Err(PotentialError::Inadmissible { faces: adm.violating_faces });
    }
    let mut total = 0.0;
    for pair in points.windows(2) {
        check_len(surface, pair[1].len())?;
        total += segment_integral(surface, &pair[0], &pair[1], target, alpha, extended)?;
    }
    Ok(total)
}

/// Hessian of the genuine potential in u-coordinates: `L - diag(Rbar_i (alpha/2) s_i^alpha)`,
/// plus the rank-one term coming from the average target's own dependence on `u`.
pub fn potential_hessian(
    surface: &WeightedTriangulation,
    radii: &[f64],
    target: &Target,
    alpha: f64,
) -> Result<DMatrix<f64>, PotentialError> {
    let mut h = curvature_jacobian(surface, radii)?.matrix;
    let sa = s_pow(radii, alpha, surface.geometry());
    let rbar = target.values(surface, &sa, alpha)?;
    let half = 0.5 * alpha;
    for i in 0..radii.len() {
        h[(i, i)] -= rbar[i] * half * sa[i];
    }
    if matches!(target, Target::Average) && alpha != 0.0 {
        let sum: f64 = sa.iter().sum();
        let coeff = rbar[0] * half / sum;
        for i in 0..radii.len() {
            for j in 0..radii.len() {
                h[(i, j)] += coeff * sa[i] * sa[j];
            }
        }
    }
    Ok(h)
}

/// Whether the Hessian has the translation kernel of the Euclidean scale-free case.
fn needs_gauge(surface: &WeightedTriangulation, target: &Target, alpha: f64) -> bool {
    surface.geometry() == Geometry::Euclidean
        && match target {
            Target::Average => true,
            Target::Prescribed(v) => v.iter().all(|&x| alpha * x == 0.0),
        }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
    NegativeSemidefinite,
}

#[derive(Debug, Clone)]
pub struct ConvexityReport {
    /// Hessian eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub class: Definiteness,
    /// `|<v_min, 1>| / sqrt(N)` for the eigenvector of the smallest eigenvalue;
    /// present for Euclidean surfaces.
    pub kernel_alignment: Option<f64>,
    /// Whether `alpha * Rbar <= 0` holds.
    pub sign_condition: bool,
}

impl ConvexityReport {
    /// Eigenvalues whose magnitude is below `tol`.
    pub fn near_zero_count(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|v| v.abs() < tol).count()
    }
}

pub fn convexity_report(
    surface: &WeightedTriangulation,
    radii: &[f64],
    target: &Target,
    alpha: f64,
) -> Result<ConvexityReport, PotentialError> {
    let h = potential_hessian(surface, radii, target, alpha)?;
    let scale = h.amax().max(1.0);
    let (eigenvalues, vectors) = sorted_eigen(symmetrized(&h));
    let zero = 1e-9 * scale;
    let (lo, hi) = (eigenvalues[0], eigenvalues[eigenvalues.len() - 1]);
    let class = if lo > zero {
        Definiteness::PositiveDefinite
    } else if lo >= -zero {
        Definiteness::PositiveSemidefinite
    } else if hi <= zero {
        Definiteness::NegativeSemidefinite
    } else {
        Definiteness::Indefinite
    };
    let kernel_alignment = (surface.geometry() == Geometry::Euclidean).then(|| {
        let n = radii.len() as f64;
        vectors.column(0).sum().abs() / n.sqrt()
    });
    Ok(ConvexityReport { eigenvalues, class, kernel_alignment, sign_condition: target.sign_condition(surface, alpha) })
}

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub metric: PackingMetric,
    pub u: Vec<f64>,
    pub iterations: usize,
    /// Sup norm of the final gradient.
    pub grad_norm: f64,
    /// Set when `alpha * Rbar <= 0` fails, so global uniqueness is not guaranteed.
    pub sign_warning: bool,
    /// Whether `sum u_i` was held fixed to remove the scaling kernel.
    pub gauged: bool,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Damped Newton iteration for `grad F = 0`, i.e. `R_alpha = Rbar`, starting from an
/// admissible `r_init`. Every accepted iterate is admissible.
pub fn newton_solve(
    surface: &WeightedTriangulation,
    r_init: &[f64],
    target: &Target,
    alpha: f64,
) -> Result<NewtonReport, PotentialError> {
    let geometry = surface.geometry();
    let adm = admissible(surface, r_init)?;
    if !adm.is_admissible() {
        return Err(PotentialError::Inadmissible { faces: adm.violating_faces });
    }
    let gauged = needs_gauge(surface, target, alpha);
    let mut radii = r_init.to_vec();
    let mut u: Vec<f64> = radii.iter().map(|&r| u_of(r, geometry)).collect();
    let mut grad = gradient_at_radii(surface, &radii, target, alpha, false)?;

    for iteration in 0..NEWTON_MAX_ITER {
        let grad_norm = sup_norm(&grad);
        if grad_norm < NEWTON_TOL {
            return Ok(NewtonReport {
                metric: PackingMetric::new(radii, geometry)?,
                u,
                iterations: iteration,
                grad_norm,
                sign_warning: !target.sign_condition(surface, alpha),
                gauged,
            });
        }
        let h = symmetrized(&potential_hessian(surface, &radii, target, alpha)?);
        let delta = newton_direction(h, &grad, gauged).ok_or(PotentialError::Singular { iteration })?;

        let merit = sum_sq(&grad);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..LINE_SEARCH_HALVINGS {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            if let Some(found) = try_point(surface, &trial, target, alpha) {
                if sum_sq(&found.1) <= (1.0 - 1e-4 * lambda) * merit {
                    accepted = Some((trial, found));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((trial, (trial_radii, trial_grad))) = accepted else {
            return Err(PotentialError::LineSearch { iteration, grad_norm });
        };
        u = trial;
        radii = trial_radii;
        grad = trial_grad;
    }
    Err(PotentialError::NotConverged { iterations: NEWTON_MAX_ITER, grad_norm: sup_norm(&grad) })
}

/// Radii and gradient at `u` if it lies in the admissible space.
fn try_point(
    surface: &WeightedTriangulation,
    u: &[f64],
    target: &Target,
    alpha: f64,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let radii = radii_from_u(u, surface.geometry()).ok()?;
    if !admissible(surface, &radii).ok()?.is_admissible() {
        return None;
    }
    let g = gradient_at_radii(surface, &radii, target, alpha, false).ok()?;
    g.iter().all(|x| x.is_finite()).then_some((radii, g))
}

/// Solves `H d = -g`, or the bordered system with `sum d = 0` when `gauged`.
fn newton_direction(h: DMatrix<f64>, grad: &[f64], gauged: bool) -> Option<Vec<f64>> {
    let n = grad.len();
    let rhs = -DVector::from_column_slice(grad);
    let solution = if gauged {
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&h);
        for i in 0..n {
            m[(i, n)] = 1.0;
            m[(n, i)] = 1.0;
        }
        let mut b = DVector::zeros(n + 1);
        b.rows_mut(0, n).copy_from(&rhs);
        m.lu().solve(&b)?.rows(0, n).into_owned()
    } else {
        h.lu().solve(&rhs)?
    };
    solution.iter().all(|x| x.is_finite()).then(|| solution.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature;
    use crate::surface::{csaszar_torus, genus_two, tetrahedron};

    const E: Geometry = Geometry::Euclidean;
    const H: Geometry = Geometry::Hyperbolic;

    fn u_vec(r: &[f64], g: Geometry) -> Vec<f64> {
        r.iter().map(|&x| u_of(x, g)).collect()
    }

    #[test]
    fn empty_path_is_zero() {
        let c = csaszar_torus(E, 1.0);
        let u0 = u_vec(&[1.0; 7], E);
        let q = PotentialQuery { u0: u0.clone(), u: u0, target: Target::Average, alpha: 2.0 };
        assert_eq!(potential_value(&c, &q, false).unwrap(), 0.0);
        assert_eq!(potential_value(&c, &q, true).unwrap(), 0.0);
    }

    #[test]
    fn gradient_examples() {
        let t = tetrahedron(E, 2.0);
        let g = potential_gradient(&t, &[0.0; 4], &Target::uniform(4, PI), 2.0, false).unwrap();
        assert!(sup_norm(&g) < 1e-14);
        let g = potential_gradient(&t, &[0.0; 4], &Target::Average, 2.0, false).unwrap();
        assert!(sup_norm(&g) < 1e-14);

        // alpha = 0 gives K - Rbar directly
        let r = [0.9, 1.1, 1.0, 1.2];
        let k = classical_curvature(&t, &r, false).unwrap();
        let g = potential_gradient(&t, &u_vec(&r, E), &Target::uniform(4, 0.5), 0.0, false).unwrap();
        for i in 0..4 {
            assert!((g[i] - (k[i] - 0.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn hyperbolic_domain_is_enforced() {
        let c = csaszar_torus(H, 1.0);
        let mut u = u_vec(&[1.0; 7], H);
        u[3] = 0.1;
        assert!(matches!(
            potential_gradient(&c, &u, &Target::uniform(7, 0.0), 2.0, false),
            Err(PotentialError::OutsideDomain { vertex: 3, .. })
        ));
        assert!(matches!(
            potential_gradient(&c, &u_vec(&[1.0; 7], H), &Target::Average, 2.0, false),
            Err(PotentialError::Unsupported(_))
        ));
    }

    #[test]
    fn gradient_matches_finite_differences_of_value() {
        let cases = [
            (csaszar_torus(E, 1.0), vec![1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95], Target::Average, 2.0),
            (csaszar_torus(H, 1.0), vec![1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95], Target::uniform(7, -0.3), 2.0),
            (tetrahedron(E, 2.0), vec![1.0, 1.1, 0.9, 1.05], Target::Prescribed(vec![1.0, 2.0, 3.0, -1.0]), 1.5),
        ];
        for (s, r, target, alpha) in cases {
            let g = s.geometry();
            let u0 = u_vec(&[1.0; 7][..r.len()], g);
            let u = u_vec(&r, g);
            let grad = potential_gradient(&s, &u, &target, alpha, false).unwrap();
            let h = 1e-5;
            for i in 0..u.len() {
                let mut up = u.clone();
                let mut um = u.clone();
                up[i] += h;
                um[i] -= h;
                let q = |x: Vec<f64>| PotentialQuery { u0: u0.clone(), u: x, target: target.clone(), alpha };
                let fp = potential_value(&s, &q(up), false).unwrap();
                let fm = potential_value(&s, &q(um), false).unwrap();
                assert!(((fp - fm) / (2.0 * h) - grad[i]).abs() < 1e-6, "{g} {i}");
            }
        }
    }

    #[test]
    fn extended_average_potential_is_translation_invariant() {
        let c = csaszar_torus(E, 2.0);
        let u0 = u_vec(&[1.0; 7], E);
        let mut r = vec![1.0; 7];
        r[0] = 0.05;
        let u = u_vec(&r, E);
        assert!(!admissible(&c, &r).unwrap().is_admissible());
        let q = |x: Vec<f64>| PotentialQuery { u0: u0.clone(), u: x, target: Target::Average, alpha: 2.0 };
        let base = potential_value(&c, &q(u.clone()), true).unwrap();
        for t in [-1.0, 0.5, 2.0] {
            let shifted: Vec<f64> = u.iter().map(|x| x + t).collect();
            let v = potential_value(&c, &q(shifted), true).unwrap();
            assert!((v - base).abs() < 1e-8, "{t}: {v} vs {base}");
        }
        // the genuine potential refuses a segment that leaves the admissible space
        assert!(matches!(potential_value(&c, &q(u), false), Err(PotentialError::SegmentInadmissible { .. })));
    }

    #[test]
    fn convexity_classes() {
        let c = csaszar_torus(E, 1.0);
        let r = [1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95];
        let rep = convexity_report(&c, &r, &Target::uniform(7, 0.0), 2.0).unwrap();
        assert_eq!(rep.class, Definiteness::PositiveSemidefinite);
        assert_eq!(rep.near_zero_count(1e-9), 1);
        assert!((rep.kernel_alignment.unwrap() - 1.0).abs() < 1e-9);

        let neg = Target::Prescribed(vec![-0.1, -0.2, 0.0, -0.3, -0.1, 0.0, -0.05]);
        let rep = convexity_report(&c, &r, &neg, 2.0).unwrap();
        assert_eq!(rep.class, Definiteness::PositiveDefinite);

        let rep = convexity_report(&c.with_geometry(H), &r, &neg, 2.0).unwrap();
        assert_eq!(rep.class, Definiteness::PositiveDefinite);
        assert!(rep.kernel_alignment.is_none());

        let t = tetrahedron(E, 2.0);
        let rep = convexity_report(&t, &[1.0; 4], &Target::uniform(4, PI), 2.0).unwrap();
        assert!(!rep.sign_condition);
        assert!(rep.eigenvalues[0] < -1.0);
        assert!(!matches!(rep.class, Definiteness::PositiveDefinite | Definiteness::PositiveSemidefinite));
    }

    #[test]
    fn average_hessian_matches_finite_differences() {
        let g = genus_two(E, 1.0);
        let r: Vec<f64> = (0..11).map(|i| 1.0 + 0.03 * i as f64).collect();
        let u = u_vec(&r, E);
        let h = potential_hessian(&g, &r, &Target::Average, 1.5).unwrap();
        let eps = 1e-6;
        for j in 0..11 {
            let mut up = u.clone();
            let mut um = u.clone();
            up[j] += eps;
            um[j] -= eps;
            let gp = potential_gradient(&g, &up, &Target::Average, 1.5, false).unwrap();
            let gm = potential_gradient(&g, &um, &Target::Average, 1.5, false).unwrap();
            for i in 0..11 {
                assert!(((gp[i] - gm[i]) / (2.0 * eps) - h[(i, j)]).abs() < 1e-6, "{i} {j}");
            }
        }
    }

    #[test]
    fn newton_flat_torus() {
        let c = csaszar_torus(E, 1.0);
        let r0 = [1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95];
        let rep = newton_solve(&c, &r0, &Target::uniform(7, 0.0), 2.0).unwrap();
        assert!(rep.gauged && !rep.sign_warning);
        assert!(rep.grad_norm < NEWTON_TOL);
        let r = rep.metric.radii();
        let spread = r.iter().fold(0.0f64, |m, x| m.max((x / r[0] - 1.0).abs()));
        assert!(spread < 1e-9);
        // the gauge keeps sum(u) fixed
        let s0: f64 = u_vec(&r0, E).iter().sum();
        assert!((rep.u.iter().sum::<f64>() - s0).abs() < 1e-10);
    }

    #[test]
    fn newton_tetrahedron_recovers_unit_radii() {
        let t = tetrahedron(E, 2.0);
        let rep = newton_solve(&t, &[1.05, 0.97, 1.02, 0.99], &Target::uniform(4, PI), 2.0).unwrap();
        assert!(rep.sign_warning && !rep.gauged);
        for &r in rep.metric.radii() {
            assert!((r - 1.0).abs() < 1e-10, "{r}");
        }
    }

    #[test]
    fn newton_recovers_prescribed_curvature_on_genus_two() {
        let g = genus_two(E, 1.0);
        let rhat: Vec<f64> = (0..11).map(|i| 1.0 + 0.1 * ((3 * i) % 4) as f64).collect();
        let rbar = curvature(&g, &rhat, 2.0, false).unwrap().r;
        let start: Vec<f64> = rhat.iter().enumerate().map(|(i, r)| r * (1.0 + 0.02 * ((i % 3) as f64 - 1.0))).collect();
        let rep = newton_solve(&g, &start, &Target::Prescribed(rbar), 2.0).unwrap();
        for (a, b) in rep.metric.radii().iter().zip(&rhat) {
            assert!((a - b).abs() < 1e-9);
        }

        // strictly negative constant target: strictly convex, unique solution
        let rep = newton_solve(&g, &[1.0; 11], &Target::uniform(11, -0.5), 2.0).unwrap();
        let sum: f64 = rep.metric.radii().iter().map(|r| r * r).sum();
        // Gauss-Bonnet: sum K = 2 pi chi = Rbar * sum r^2
        assert!((sum - 2.0 * PI * 2.0 / 0.5).abs() < 1e-8);
    }

    #[test]
    fn newton_rejects_inadmissible_start() {
        let t = tetrahedron(E, 2.0);
        assert!(matches!(
            newton_solve(&t, &[1.0, 9.0, 9.0, 9.0], &Target::uniform(4, PI), 2.0),
            Err(PotentialError::Inadmissible { .. })
        ));
    }
}
