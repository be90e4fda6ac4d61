//! Densities of the semicircular and tetilla laws, the tetilla Cauchy
//! transform, and Stieltjes inversion.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::quadrature::integrate_with_sqrt_edges;
use crate::error::{Error, Result};

/// Below this |t| the tetilla density uses its Taylor expansion at 0.
const SMALL_T: f64 = 1e-6;

/// Residual bound for the Cauchy cubic, relative to `1 + |z|³`.
pub const CUBIC_RESIDUAL_TOL: f64 = 1e-10;

/// Imaginary parts within this of zero are ambiguous for root selection.
const ROOT_SIGN_TOL: f64 = 1e-8;

/// `p_t(u) = √(4t − u²) / (2πt)` on `|u| ≤ 2√t`.
pub fn semicircular_density(u: f64, t: f64) -> f64 {
    assert!(t > 0.0, "semicircular parameter must be positive");
    let rad = 4.0 * t - u * u;
    if rad <= 0.0 {
        0.0
    } else {
        rad.sqrt() / (2.0 * PI * t)
    }
}

/// Right endpoint `√(11 + 5√5) / 2` of the tetilla support.
pub fn tetilla_support_edge() -> f64 {
    (11.0 + 5.0 * 5f64.sqrt()).sqrt() / 2.0
}

/// Closed-form tetilla density
/// `h(t) = [∛(1+36t²+3√D) − ∛(1+36t²−3√D)] / (2√3 π |t|)`,
/// `D = 6t² + 132t⁴ − 24t⁶`, zero outside the support.
///
/// `(1+36t²)² − 9D = (1+6t²)³ > 0`, so both cube-root arguments are positive
/// and real arithmetic suffices; `D` is clamped at the support edge where
/// rounding can push it below zero.
pub fn tetilla_density(t: f64) -> f64 {
    let a = t.abs();
    let edge = tetilla_support_edge();
    if a >= edge || !a.is_finite() {
        return 0.0;
    }
    if a < SMALL_T {
        // h(t) = (√2/π)(1 − 3t² + 55t⁴/2 + …)
        return 2f64.sqrt() / PI * (1.0 - 3.0 * a * a);
    }
    let t2 = a * a;
    let d = (6.0 * t2 + 132.0 * t2 * t2 - 24.0 * t2 * t2 * t2).max(0.0);
    let base = 1.0 + 36.0 * t2;
    let root = 3.0 * d.sqrt();
    let h = ((base + root).cbrt() - (base - root).cbrt()) / (2.0 * 3f64.sqrt() * PI * a);
    h.max(0.0)
}

/// `∫ tᵏ h(t) dt` by adaptive quadrature over the closed support.
pub fn tetilla_moment_numeric(k: u32, abs_tol: f64) -> Result<f64> {
    integrate_with_sqrt_edges(|t| t.powi(k as i32) * tetilla_density(t), tetilla_support_edge(), abs_tol)
}

/// Residual of `z y³ + y² − 2 z y + 2`.
pub fn cauchy_cubic(z: Complex64, y: Complex64) -> Complex64 {
    z * y * y * y + y * y - 2.0 * z * y + 2.0
}

fn cubic_derivative(z: Complex64, y: Complex64) -> Complex64 {
    3.0 * z * y * y + 2.0 * y - 2.0 * z
}

/// The three roots of `z y³ + y² − 2zy + 2 = 0` by Cardano's formulae,
/// each polished by a few Newton steps on the original cubic.
///
/// With `y = x − 1/(3z)` the cubic becomes `x³ + p x + q = 0` where
/// `p = −(2 + 1/(3z²))` and `q = 2(1 + 36z²)/(27z³)`. Taking
/// `u = ((q + √Δ)/2)^{1/3}` and `v = −p/(3u)` fixes the branch pairing, and
/// the roots are `−(ωᵏu + ω⁻ᵏv) − 1/(3z)` for the cube roots of unity ω.
pub fn cardano_roots(z: Complex64) -> [Complex64; 3] {
    let p = -(2.0 + 1.0 / (3.0 * z * z));
    let q = 2.0 * (1.0 + 36.0 * z * z) / (27.0 * z * z * z);
    let delta = q * q + 4.0 / 27.0 * p * p * p;
    let sq = delta.sqrt();
    // pick the sign of √Δ that keeps u away from zero
    let w = if (q + sq).norm() >= (q - sq).norm() { (q + sq) / 2.0 } else { (q - sq) / 2.0 };
    let u = w.cbrt();
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let shift = 1.0 / (3.0 * z);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    for (k, root) in roots.iter_mut().enumerate() {
        let wk = omega.powu(k as u32);
        let uk = wk * u;
        let vk = if uk.norm() > 0.0 { -p / (3.0 * uk) } else { Complex64::new(0.0, 0.0) };
        *root = -(uk + vk) - shift;
    }
    for root in roots.iter_mut() {
        for _ in 0..4 {
            let d = cubic_derivative(z, *root);
            if d.norm() == 0.0 {
                break;
            }
            let step = cauchy_cubic(z, *root) / d;
            *root -= step;
            if step.norm() <= 1e-17 * root.norm().max(1.0) {
                break;
            }
        }
    }
    roots
}

/// Cauchy transform `G(z)` of the tetilla law for `Im z > 0`: the unique
/// root of the cubic lying in the lower half-plane.
///
/// For non-real `z` no root of the cubic is real (a real root would force
/// `z = −(y²+2)/(y³−2y)` real), so exactly one root stays in `ℂ₋` on all of
/// `ℂ₊`; the selection only fails numerically when the separation drops
/// below `1e-8`.
pub fn cauchy_transform_tetilla(z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput(format!("Cauchy transform needs Im z > 0, got {z}")));
    }
    let roots = cardano_roots(z);
    let mut sorted = roots;
    sorted.sort_by(|a, b| a.im.total_cmp(&b.im));
    let selected = sorted[0];
    let diag = || {
        format!(
            "roots {:.3e}{:+.3e}i, {:.3e}{:+.3e}i, {:.3e}{:+.3e}i",
            roots[0].re, roots[0].im, roots[1].re, roots[1].im, roots[2].re, roots[2].im
        )
    };
    if !(selected.im < 0.0) || sorted[1].im < -ROOT_SIGN_TOL {
        return Err(Error::RootSelection {
            z: z.to_string(),
            detail: format!("expected exactly one root with negative imaginary part; {}", diag()),
        });
    }
    let residual = cauchy_cubic(z, selected).norm();
    if residual > CUBIC_RESIDUAL_TOL * (1.0 + z.norm().powi(3)) {
        return Err(Error::RootSelection {
            z: z.to_string(),
            detail: format!("cubic residual {residual:e} too large; {}", diag()),
        });
    }
    Ok(selected)
}

/// Stieltjes inversion at finite `eps`: `−Im G(t + i·eps) / π`.
pub fn density_from_cauchy(t: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1e-2]")));
    }
    let g = cauchy_transform_tetilla(Complex64::new(t, eps))?;
    Ok(-g.im / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semicircle_values() {
        assert!((semicircular_density(0.0, 1.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(semicircular_density(2.0, 1.0), 0.0);
        assert_eq!(semicircular_density(3.0, 1.0), 0.0);
    }

    #[test]
    fn tetilla_density_basics() {
        assert_eq!(tetilla_density(3.0), 0.0);
        assert!((tetilla_density(0.0) - 2f64.sqrt() / PI).abs() < 1e-12);
        for &t in &[0.1, 0.7, 1.3, 2.2] {
            assert_eq!(tetilla_density(t), tetilla_density(-t));
        }
        // series branch and closed form agree across the switch point
        let below = tetilla_density(0.999e-6);
        let above = tetilla_density(1.001e-6);
        assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn far_field_cauchy() {
        let g = cauchy_transform_tetilla(Complex64::new(0.0, 10.0)).unwrap();
        // G(z) = 1/z + m_2/z³ + …  = −0.1i + 0.001i + …
        assert!((g - Complex64::new(0.0, -0.1)).norm() < 2e-3);
        assert!(g.im < 0.0);
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(cauchy_transform_tetilla(Complex64::new(0.0, -1.0)).is_err());
        assert!(cauchy_transform_tetilla(Complex64::new(1.0, 0.0)).is_err());
        assert!(density_from_cauchy(0.0, 0.1).is_err());
        assert!(density_from_cauchy(0.0, 0.0).is_err());
    }

    #[test]
    fn outside_support_stieltjes_is_tiny() {
        assert!(density_from_cauchy(5.0, 1e-6).unwrap().abs() <= 1e-4);
    }
}
