//! Vertex curvatures, Gauss–Bonnet residuals, the curvature Jacobian and the
//! discrete Laplacian it induces.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::geom::{
    self, angle_length_derivatives, check_radii, face_lengths, face_slack, hyperbolic_triangle_area,
    inner_angles, length_u_derivatives, s_of, CornerAngles, GeomError,
};
use crate::surface::{Geometry, WeightedTriangulation};

/// Jacobian assembly refuses faces whose relative triangle slack is below this.
pub const JACOBIAN_MIN_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("face {face} is too close to degenerate (relative slack {slack:e})")]
    Conditioning { face: usize, slack: f64 },
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Per-vertex curvatures of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    /// Angle deficit `2 pi - sum of corner angles`.
    pub k: Vec<f64>,
    /// `K / s^2`.
    pub r: Vec<f64>,
    /// `K / s^alpha`.
    pub r_alpha: Vec<f64>,
    pub alpha: f64,
    /// Whether constant-extended angles were used.
    pub extended: bool,
}

fn deficits(surface: &WeightedTriangulation, angles: &CornerAngles) -> Vec<f64> {
    let mut k = vec![2.0 * PI; surface.vertex_count()];
    for (face, ang) in surface.faces().iter().zip(&angles.angles) {
        for corner in 0..3 {
            k[face[corner]] -= ang[corner];
        }
    }
    k
}

/// Angle deficits `K_i`, or `K~_i` with `use_extension`.
pub fn classical_curvature(
    surface: &WeightedTriangulation,
    radii: &[f64],
    use_extension: bool,
) -> Result<Vec<f64>, CurvatureError> {
    let angles = CornerAngles::compute(surface, radii, use_extension)?;
    Ok(deficits(surface, &angles))
}

/// `K_i / s_i^alpha` for every vertex.
pub fn alpha_curvature(
    surface: &WeightedTriangulation,
    radii: &[f64],
    alpha: f64,
    use_extension: bool,
) -> Result<Vec<f64>, CurvatureError> {
    let k = classical_curvature(surface, radii, use_extension)?;
    Ok(divide_by_s_pow(&k, radii, alpha, surface.geometry()))
}

pub(crate) fn divide_by_s_pow(k: &[f64], radii: &[f64], alpha: f64, geometry: Geometry) -> Vec<f64> {
    if alpha == 0.0 {
        return k.to_vec();
    }
    k.iter().zip(radii).map(|(&k, &r)| k / s_of(r, geometry).powf(alpha)).collect()
}

pub fn curvature(
    surface: &WeightedTriangulation,
    radii: &[f64],
    alpha: f64,
    use_extension: bool,
) -> Result<CurvatureField, CurvatureError> {
    let k = classical_curvature(surface, radii, use_extension)?;
    let geometry = surface.geometry();
    Ok(CurvatureField {
        r: divide_by_s_pow(&k, radii, 2.0, geometry),
        r_alpha: divide_by_s_pow(&k, radii, alpha, geometry),
        k,
        alpha,
        extended: use_extension,
    })
}

/// Average alpha-curvature `2 pi chi / sum r_i^alpha`, or `2 pi chi / N` for `alpha = 0`.
/// Only defined for Euclidean surfaces.
pub fn average_curvature(
    surface: &WeightedTriangulation,
    radii: &[f64],
    alpha: f64,
) -> Result<f64, CurvatureError> {
    if surface.geometry() != Geometry::Euclidean {
        return Err(CurvatureError::Unsupported("average curvature is only defined in Euclidean geometry"));
    }
    check_radii(radii, surface.vertex_count())?;
    Ok(average_from_radii(surface.euler_characteristic(), radii, alpha))
}

pub(crate) fn average_from_radii(chi: i64, radii: &[f64], alpha: f64) -> f64 {
    let total = 2.0 * PI * chi as f64;
    if alpha == 0.0 {
        total / radii.len() as f64
    } else {
        total / radii.iter().map(|r| r.powf(alpha)).sum::<f64>()
    }
}

/// Gauss–Bonnet residual: `sum K - 2 pi chi` (Euclidean) or
/// `sum K - 2 pi chi - Area` (hyperbolic). Degenerate faces are only accepted
/// with `use_extension`, in which case they carry zero area.
pub fn gauss_bonnet_residual(
    surface: &WeightedTriangulation,
    radii: &[f64],
    use_extension: bool,
) -> Result<f64, CurvatureError> {
    let angles = CornerAngles::compute(surface, radii, use_extension)?;
    let k = deficits(surface, &angles);
    let sum: f64 = k.iter().sum();
    let expected = 2.0 * PI * surface.euler_characteristic() as f64;
    Ok(match surface.geometry() {
        Geometry::Euclidean => sum - expected,
        Geometry::Hyperbolic => {
            let area: f64 = angles.angles.iter().map(|&a| hyperbolic_triangle_area(a)).sum();
            sum - expected - area
        }
    })
}

/// Total hyperbolic area of the faces (degenerate faces count zero).
pub fn total_area(surface: &WeightedTriangulation, radii: &[f64]) -> Result<f64, CurvatureError> {
    let angles = CornerAngles::compute(surface, radii, true)?;
    Ok(angles.angles.iter().map(|&a| hyperbolic_triangle_area(a)).sum())
}

/// `L_ij = dK_i / du_j` with `u = ln s^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureJacobian {
    pub matrix: DMatrix<f64>,
    pub geometry: Geometry,
}

impl CurvatureJacobian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest absolute asymmetry `|L_ij - L_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigen(symmetrized(&self.matrix)).0
    }

    /// Jacobian with respect to `ln s` instead of `ln s^2` (twice this one).
    pub fn in_convention(&self, convention: UConvention) -> DMatrix<f64> {
        match convention {
            UConvention::LogS2 => self.matrix.clone(),
            UConvention::LogS => &self.matrix * 2.0,
        }
    }
}

/// Logarithmic coordinate a Jacobian or Laplacian is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UConvention {
    /// `u = ln s^2`; the normalized R-flow uses this.
    #[default]
    LogS2,
    /// `u = ln s` (`ln r` in Euclidean geometry); the alpha-flows use this.
    LogS,
}

pub(crate) fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues ascending, with eigenvectors as matching columns.
pub(crate) fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

/// Analytic `dK/du` by chaining angle-length and length-radius derivatives face by face.
pub fn curvature_jacobian(
    surface: &WeightedTriangulation,
    radii: &[f64],
) -> Result<CurvatureJacobian, CurvatureError> {
    check_radii(radii, surface.vertex_count())?;
    let geometry = surface.geometry();
    let n = surface.vertex_count();
    let mut matrix = DMatrix::zeros(n, n);
    for (fi, face) in surface.faces().iter().enumerate() {
        let lengths = face_lengths(surface, radii, fi)?;
        let slack = face_slack(lengths);
        if !(slack > JACOBIAN_MIN_SLACK) {
            return Err(CurvatureError::Conditioning { face: fi, slack });
        }
        let angles = inner_angles(lengths, geometry)?;
        let dtheta_dl = angle_length_derivatives(lengths, angles, geometry);
        let weights = surface.face_edges(fi).map(|e| surface.weights()[e]);

        // dl_m/du at the two endpoints of the edge opposite corner m
        let mut dl_du = [[0.0; 3]; 3];
        for m in 0..3 {
            let (p, q) = ((m + 1) % 3, (m + 2) % 3);
            let (dp, dq) =
                length_u_derivatives(radii[face[p]], radii[face[q]], weights[m], lengths[m], geometry);
            dl_du[m][p] = dp;
            dl_du[m][q] = dq;
        }
        for m in 0..3 {
            for w in 0..3 {
                let dtheta: f64 = (0..3).map(|e| dtheta_dl[m][e] * dl_du[e][w]).sum();
                matrix[(face[m], face[w])] -= dtheta;
            }
        }
    }
    Ok(CurvatureJacobian { matrix, geometry })
}

/// `(Delta_alpha f)_i = s_i^-alpha sum_j (-L'_ij) f_j`, with `L'` the Jacobian in `convention`.
pub fn laplacian_apply(
    surface: &WeightedTriangulation,
    radii: &[f64],
    f: &[f64],
    alpha: f64,
    convention: UConvention,
) -> Result<Vec<f64>, CurvatureError> {
    let jac = curvature_jacobian(surface, radii)?;
    laplacian_apply_with(&jac, radii, f, alpha, convention)
}

/// [`laplacian_apply`] reusing an assembled Jacobian.
pub fn laplacian_apply_with(
    jacobian: &CurvatureJacobian,
    radii: &[f64],
    f: &[f64],
    alpha: f64,
    convention: UConvention,
) -> Result<Vec<f64>, CurvatureError> {
    if jacobian.geometry != Geometry::Euclidean {
        return Err(CurvatureError::Unsupported("the discrete Laplacian is defined for Euclidean metrics"));
    }
    let n = jacobian.dim();
    if f.len() != n || radii.len() != n {
        return Err(CurvatureError::DimensionMismatch { expected: n, got: f.len().min(radii.len()) });
    }
    let l = jacobian.in_convention(convention);
    let lf = -(l * DVector::from_column_slice(f));
    Ok(lf.iter().zip(radii).map(|(v, r)| v / r.powf(alpha)).collect())
}

/// Eigen-decomposition of `-Delta`, via the symmetric conjugate `S^-1/2 L S^-1/2`
/// with `S = diag(s_i^2)`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors of the symmetric conjugate, one column per eigenvalue.
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    /// Smallest eigenvalue strictly above `zero_tol`.
    pub fn first_positive(&self, zero_tol: f64) -> Option<f64> {
        self.eigenvalues.iter().copied().find(|&v| v > zero_tol)
    }
}

pub fn laplacian_spectrum(
    surface: &WeightedTriangulation,
    radii: &[f64],
) -> Result<Spectrum, CurvatureError> {
    if surface.geometry() != Geometry::Euclidean {
        return Err(CurvatureError::Unsupported("the discrete Laplacian is defined for Euclidean metrics"));
    }
    let jac = curvature_jacobian(surface, radii)?;
    let inv_sqrt = DVector::from_iterator(radii.len(), radii.iter().map(|&r| 1.0 / geom::s_of(r, Geometry::Euclidean)));
    let n = radii.len();
    let conj = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * jac.matrix[(i, j)] * inv_sqrt[j]);
    let (eigenvalues, eigenvectors) = sorted_eigen(symmetrized(&conj));
    Ok(Spectrum { eigenvalues, eigenvectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{radius_from_u, u_of};
    use crate::surface::{csaszar_torus, genus_two, tetrahedron};
    use proptest::prelude::*;

    const E: Geometry = Geometry::Euclidean;
    const H: Geometry = Geometry::Hyperbolic;

    /// Central differences of K in u; independent of the analytic assembly.
    fn fd_jacobian(surface: &WeightedTriangulation, radii: &[f64], h: f64) -> DMatrix<f64> {
        let geometry = surface.geometry();
        let u: Vec<f64> = radii.iter().map(|&r| u_of(r, geometry)).collect();
        let n = u.len();
        let k_at = |u: &[f64]| {
            let r: Vec<f64> = u.iter().map(|&x| radius_from_u(x, geometry)).collect();
            classical_curvature(surface, &r, false).unwrap()
        };
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut up = u.clone();
            let mut um = u.clone();
            up[j] += h;
            um[j] -= h;
            let (kp, km) = (k_at(&up), k_at(&um));
            for i in 0..n {
                out[(i, j)] = (kp[i] - km[i]) / (2.0 * h);
            }
        }
        out
    }

    #[test]
    fn tetrahedron_unit_radii_has_k_pi() {
        let t = tetrahedron(E, 2.0);
        let field = curvature(&t, &[1.0; 4], 2.0, false).unwrap();
        for i in 0..4 {
            assert!((field.k[i] - PI).abs() < 1e-14);
            assert!((field.r[i] - PI).abs() < 1e-14);
        }
        assert!((average_curvature(&t, &[1.0; 4], 2.0).unwrap() - PI).abs() < 1e-15);
        assert!((average_curvature(&t, &[1.0; 4], 0.0).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn torus_unit_radii_is_flat() {
        let c = csaszar_torus(E, 1.0);
        let k = classical_curvature(&c, &[1.0; 7], false).unwrap();
        assert!(k.iter().all(|v| v.abs() < 1e-14));
        assert_eq!(average_curvature(&c, &[0.3, 1.0, 2.0, 1.0, 1.0, 1.0, 5.0], 1.5).unwrap(), 0.0);
    }

    #[test]
    fn tetrahedron_family_closed_forms() {
        let t = tetrahedron(E, 2.0);
        for x in [0.5, 1.0, 2.0, 4.0, 7.5] {
            let field = curvature(&t, &[1.0, x, x, x], 2.0, false).unwrap();
            let asin = ((6f64.sqrt() * x / 2.0) / (x * x + 4.0 * x + 1.0).sqrt()).asin();
            let r0 = 2.0 * PI - 6.0 * asin;
            let rj = (2.0 * PI / 3.0 + 2.0 * asin) / (x * x);
            assert!((field.r[0] - r0).abs() < 1e-13, "{x}");
            for j in 1..4 {
                assert!((field.r[j] - rj).abs() < 1e-13, "{x}");
            }
        }
    }

    #[test]
    fn alpha_zero_and_two() {
        let t = tetrahedron(E, 2.0);
        let r = [0.9, 1.2, 1.1, 1.0];
        let f0 = curvature(&t, &r, 0.0, false).unwrap();
        let f2 = curvature(&t, &r, 2.0, false).unwrap();
        assert_eq!(f0.r_alpha, f0.k);
        assert_eq!(f2.r_alpha, f2.r);
    }

    #[test]
    fn hyperbolic_average_is_unsupported() {
        let t = tetrahedron(H, 2.0);
        assert!(matches!(average_curvature(&t, &[1.0; 4], 2.0), Err(CurvatureError::Unsupported(_))));
    }

    #[test]
    fn inadmissible_without_extension_is_an_error() {
        let t = tetrahedron(E, 2.0);
        let r = [1.0, 9.0, 9.0, 9.0];
        assert!(classical_curvature(&t, &r, false).is_err());
        let k = classical_curvature(&t, &r, true).unwrap();
        // vertex 0 carries pi in each of its three degenerate faces
        assert!((k[0] - (2.0 * PI - 3.0 * PI)).abs() < 1e-14);
        assert!(gauss_bonnet_residual(&t, &r, true).unwrap().abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cases = [
            (tetrahedron(E, 2.0), vec![1.0, 1.3, 0.8, 1.1]),
            (csaszar_torus(E, 1.0), vec![1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95]),
            (csaszar_torus(H, 1.0), vec![1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95]),
            (tetrahedron(H, 0.5), vec![0.4, 0.6, 0.5, 0.7]),
        ];
        for (s, r) in cases {
            let jac = curvature_jacobian(&s, &r).unwrap();
            let fd = fd_jacobian(&s, &r, 1e-6);
            let diff = (&jac.matrix - fd).amax();
            assert!(diff < 1e-5, "{:?}: {diff}", s.geometry());
            assert!(jac.asymmetry() < 1e-8 * jac.matrix.amax().max(1.0));
        }
    }

    #[test]
    fn jacobian_structure() {
        let c = csaszar_torus(E, 1.0);
        let r = [1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95];
        let jac = curvature_jacobian(&c, &r).unwrap();
        let row_sums = &jac.matrix * DVector::from_element(7, 1.0);
        assert!(row_sums.amax() < 1e-8);
        let eig = jac.eigenvalues();
        assert!(eig[0].abs() < 1e-9 && eig[1] > 1e-9);

        let h = curvature_jacobian(&c.with_geometry(H), &r).unwrap();
        assert!(h.eigenvalues()[0] > 0.0);
    }

    #[test]
    fn jacobian_refuses_near_degenerate_faces() {
        let t = tetrahedron(E, 2.0);
        let x = 4.0 + 18f64.sqrt() - 1e-13;
        assert!(matches!(
            curvature_jacobian(&t, &[1.0, x, x, x]),
            Err(CurvatureError::Conditioning { .. })
        ));
    }

    #[test]
    fn laplacian_kernel_linearity_and_neighbor_form() {
        let g = genus_two(E, 1.0);
        let r: Vec<f64> = (0..11).map(|i| 1.0 + 0.05 * ((i * 7) % 5) as f64).collect();
        let ones = vec![1.0; 11];
        for conv in [UConvention::LogS2, UConvention::LogS] {
            let z = laplacian_apply(&g, &r, &ones, 2.0, conv).unwrap();
            assert!(z.iter().all(|v| v.abs() < 1e-9));
        }
        let f: Vec<f64> = (0..11).map(|i| (i as f64).sin()).collect();
        let gv: Vec<f64> = (0..11).map(|i| (i as f64 * 0.3).cos()).collect();
        let sum: Vec<f64> = f.iter().zip(&gv).map(|(a, b)| a + b).collect();
        let lf = laplacian_apply(&g, &r, &f, 2.0, UConvention::LogS2).unwrap();
        let lg = laplacian_apply(&g, &r, &gv, 2.0, UConvention::LogS2).unwrap();
        let ls = laplacian_apply(&g, &r, &sum, 2.0, UConvention::LogS2).unwrap();
        for i in 0..11 {
            assert!((ls[i] - lf[i] - lg[i]).abs() < 1e-12);
        }

        // full-sum form equals the neighbor-difference form
        let jac = curvature_jacobian(&g, &r).unwrap();
        for i in 0..11 {
            let neighbor: f64 = (0..11)
                .filter(|&j| j != i && g.edge_index(i, j).is_some())
                .map(|j| -jac.matrix[(i, j)] * (f[j] - f[i]))
                .sum::<f64>()
                / (r[i] * r[i]);
            assert!((neighbor - lf[i]).abs() < 1e-9, "{i}");
        }
        // non-neighbors never couple
        for i in 0..11 {
            for j in 0..11 {
                if i != j && g.edge_index(i, j).is_none() {
                    assert_eq!(jac.matrix[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn laplacian_on_symmetric_tetrahedron_matches_finite_differences() {
        let t = tetrahedron(E, 2.0);
        let r = [1.0; 4];
        let lap = laplacian_apply(&t, &r, &[1.0, 0.0, 0.0, 0.0], 2.0, UConvention::LogS2).unwrap();
        // -dK_i/du_0 by central differences
        let h = 1e-6;
        let k = |u0: f64| {
            let mut rr = r;
            rr[0] = (0.5 * u0).exp();
            classical_curvature(&t, &rr, false).unwrap()
        };
        let (kp, km) = (k(h), k(-h));
        for i in 0..4 {
            let fd = -(kp[i] - km[i]) / (2.0 * h);
            assert!((lap[i] - fd).abs() < 1e-7, "{i}: {} {fd}", lap[i]);
        }
        assert!((lap[1] - lap[2]).abs() < 1e-14 && (lap[2] - lap[3]).abs() < 1e-14);
    }

    #[test]
    fn spectrum_structure() {
        let c = csaszar_torus(E, 1.0);
        let r = [1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95];
        let spec = laplacian_spectrum(&c, &r).unwrap();
        assert_eq!(spec.eigenvalues.len(), 7);
        assert!(spec.eigenvalues[0].abs() < 1e-8);
        assert!(spec.eigenvalues[1] > 1e-6);
        // kernel direction is r itself
        let v = spec.eigenvectors.column(0);
        let rn = DVector::from_column_slice(&r).normalize();
        assert!((v.dot(&rn).abs() - 1.0).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scaling_laws(
            r in proptest::collection::vec(0.3f64..3.0, 7),
            lambda in 0.1f64..10.0,
            alpha in -2.0f64..4.0,
        ) {
            let c = csaszar_torus(E, 1.0);
            let scaled: Vec<f64> = r.iter().map(|v| v * lambda).collect();
            let a = curvature(&c, &r, alpha, false).unwrap();
            let b = curvature(&c, &scaled, alpha, false).unwrap();
            let sqrt_scaled: Vec<f64> = r.iter().map(|v| v * lambda.sqrt()).collect();
            let d = curvature(&c, &sqrt_scaled, alpha, false).unwrap();
            for i in 0..7 {
                prop_assert!((a.k[i] - b.k[i]).abs() < 1e-10);
                let expected = lambda.powf(-alpha) * a.r_alpha[i];
                prop_assert!((b.r_alpha[i] - expected).abs() < 1e-9 * expected.abs().max(1.0));
                prop_assert!((d.r[i] - a.r[i] / lambda).abs() < 1e-9 * a.r[i].abs().max(1.0));
            }
        }

        #[test]
        fn gauss_bonnet_holds(
            r in proptest::collection::vec(0.05f64..4.0, 7),
            hyper in any::<bool>(),
        ) {
            let geometry = if hyper { H } else { E };
            let c = csaszar_torus(geometry, 1.0);
            let res = gauss_bonnet_residual(&c, &r, false).unwrap();
            prop_assert!(res.abs() < 1e-9, "{}", res);
            let ext = curvature(&c, &r, 2.0, true).unwrap();
            let gen = curvature(&c, &r, 2.0, false).unwrap();
            prop_assert_eq!(ext.k, gen.k);
        }
    }
}
