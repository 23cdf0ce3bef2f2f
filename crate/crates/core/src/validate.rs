//! Checks that do not go through the scheme: a finite-difference p-Laplace
//! residual for candidate exact solutions, error norms, and radius
//! refinement studies.

use serde::Serialize;

use crate::dpp::{solve, GridFunction};
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::mesh::Mesh;

pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Normalized p-Laplacian `(p - 2) Δ∞u + Δu` by central differences, where
/// `Δ∞u = <D²u ∇u, ∇u> / |∇u|²`. Zero exactly where `Δ_p u = 0` and
/// `∇u ≠ 0`.
pub fn p_laplace_residual(field: &ScalarField, point: [f64; 2], p: f64, fd_step: f64) -> Result<f64> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidArgument(format!("fd_step must be positive, got {fd_step}")));
    }
    let [x, y] = point;
    let s = fd_step;
    let u = |dx: f64, dy: f64| field.eval(x + dx, y + dy);
    let c = u(0.0, 0.0)?;
    let (e, w, n, so) = (u(s, 0.0)?, u(-s, 0.0)?, u(0.0, s)?, u(0.0, -s)?);
    let (ne, nw, se, sw) = (u(s, s)?, u(-s, s)?, u(s, -s)?, u(-s, -s)?);

    let ux = (e - w) / (2.0 * s);
    let uy = (n - so) / (2.0 * s);
    let uxx = (e - 2.0 * c + w) / (s * s);
    let uyy = (n - 2.0 * c + so) / (s * s);
    let uxy = (ne - nw - se + sw) / (4.0 * s * s);

    let grad2 = ux * ux + uy * uy;
    if grad2.sqrt() < 1e3 * s * s {
        return Err(Error::DegenerateGradient {
            grad: grad2.sqrt(),
            x,
            y,
        });
    }
    let inf_lap = (uxx * ux * ux + 2.0 * uxy * ux * uy + uyy * uy * uy) / grad2;
    Ok((p - 2.0) * inf_lap + uxx + uyy)
}

/// `max` over interior nodes of `|u - exact|`.
pub fn known_solution_error(u: &GridFunction, exact: &ScalarField, mesh: &Mesh) -> Result<f64> {
    if u.len() != mesh.len() {
        return Err(Error::ShapeMismatch {
            expected: mesh.len(),
            got: u.len(),
        });
    }
    let mut err = 0.0f64;
    for &i in mesh.interior_nodes() {
        let [x, y] = mesh.node(i);
        err = err.max((u[i] - exact.eval(x, y)?).abs());
    }
    Ok(err)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementReport {
    /// Radii in mesh units, in the order solved.
    pub radii: Vec<usize>,
    /// Probe node indices (shared by every radius).
    pub probes: Vec<usize>,
    /// Per-radius solution values on the probe set.
    pub solutions: Vec<Vec<f64>>,
    /// Sup-norm difference between consecutive radii on the probe set.
    pub successive_diffs: Vec<f64>,
    pub iterations: Vec<usize>,
}

/// Solves `spec` at each radius on the same lattice and compares
/// consecutive solutions on the interior nodes of `Ω`. Because the spacing
/// is shared, the lattice is the same for every radius and no interpolation
/// is needed.
pub fn refinement_study(
    spec: &crate::fields::ProblemSpec,
    h: f64,
    a: f64,
    collar: f64,
    radii: &[usize],
    tol: f64,
    max_iter: usize,
) -> Result<RefinementReport> {
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
    }
    let mut probes = Vec::new();
    let mut solutions = Vec::new();
    let mut iterations = Vec::new();
    for &m in radii {
        let mesh = Mesh::with_radius_units(h, a, collar, m)?;
        if probes.is_empty() {
            probes = mesh.interior_nodes().to_vec();
        }
        let (u, report) = solve(&mesh, spec, tol, max_iter)?;
        solutions.push(probes.iter().map(|&i| u[i]).collect::<Vec<_>>());
        iterations.push(report.iterations);
    }
    let successive_diffs = solutions
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(RefinementReport {
        radii: radii.to_vec(),
        probes,
        solutions,
        successive_diffs,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin_dataset, fundamental_solution, ProblemSpec};

    #[test]
    fn linear_fields_are_p_harmonic() {
        let g = ScalarField::parse("2*x - y").unwrap();
        let s = 1e-4;
        for p in [2.0, 3.5, 10.0, 100.0] {
            assert!(p_laplace_residual(&g, [0.0, 0.0], p, s).unwrap().abs() < 1e-8);
            // elsewhere only rounding in the samples remains, of order eps |u| / s²
            for pt in [[0.3, -0.7], [-0.9, 0.4]] {
                let bound = 8.0 * f64::EPSILON * 3.0 / (s * s) * (p - 1.0);
                assert!(p_laplace_residual(&g, pt, p, s).unwrap().abs() < bound);
            }
        }
    }

    #[test]
    fn harmonic_quadratic() {
        let g = ScalarField::parse("x^2 - y^2 - y").unwrap();
        assert!(p_laplace_residual(&g, [0.3, 0.2], 2.0, 1e-4).unwrap().abs() <= 1e-6);
        // not p-harmonic for p > 2: Δ∞ is non-zero here
        assert!(p_laplace_residual(&g, [0.3, 0.2], 10.0, 1e-4).unwrap().abs() > 1.0);
    }

    #[test]
    fn fundamental_profile() {
        let g = fundamental_solution(10.0);
        assert!(p_laplace_residual(&g, [0.0, 0.0], 10.0, 1e-4).unwrap().abs() <= 1e-4);
        assert!(p_laplace_residual(&g, [0.0, 0.0], 3.0, 1e-4).unwrap().abs() > 1e-2);
    }

    #[test]
    fn degenerate_gradient() {
        let g = ScalarField::parse("x^2 + y^2").unwrap();
        assert!(matches!(
            p_laplace_residual(&g, [0.0, 0.0], 4.0, 1e-4),
            Err(Error::DegenerateGradient { .. })
        ));
    }

    #[test]
    fn error_of_exact_is_zero() {
        let mesh = Mesh::with_radius_units(0.1, 1.0, 0.2, 1).unwrap();
        let exact = ScalarField::parse("exp(x)*sin(y)").unwrap();
        let u = GridFunction::from_fn(&mesh, |_, [x, y]| exact.value(x, y));
        assert_eq!(known_solution_error(&u, &exact, &mesh).unwrap(), 0.0);
        assert!(known_solution_error(&GridFunction::new(vec![]), &exact, &mesh).is_err());
    }

    #[test]
    fn refinement_edge_cases() {
        let c = ScalarField::constant;
        let spec = ProblemSpec::new(2.0, c(-1e6), c(1e6), c(0.7));
        let r = refinement_study(&spec, 0.05, 1.0, 0.2, &[3, 2, 1], 1e-6, 1_000_000).unwrap();
        assert_eq!(r.successive_diffs.len(), 2);
        assert!(r.successive_diffs.iter().all(|&d| d <= 2e-6));
        let r = refinement_study(&spec, 0.05, 1.0, 0.2, &[2], 1e-6, 1_000_000).unwrap();
        assert!(r.successive_diffs.is_empty());
        assert!(refinement_study(&spec, 0.05, 1.0, 0.2, &[1, 2], 1e-6, 10).is_err());
        let spec = builtin_dataset("try1_p2").unwrap();
        assert!(refinement_study(&spec, 0.05, 1.0, 0.2, &[3, 2], 1e-6, 2).is_err());
    }
}
