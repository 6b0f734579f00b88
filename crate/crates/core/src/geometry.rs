//! Analytic kernels: SLE exponents, the two-regime kernel `P_y`, cylinder
//! geometry, annulus moduli, and distortion-bound helpers.
//!
//! Everything here is a pure function of its arguments; the simulation and
//! bound layers build on top of these closed forms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("kappa must lie in (0, 8), got {0}")]
    KappaOutOfRange(f64),
    #[error("argument must be positive and finite, got {0}")]
    NonpositiveArgument(f64),
    #[error("y must be nonnegative, got {0}")]
    NegativeHeight(f64),
    #[error("cylinder point must have positive imaginary part, got {0}")]
    NonpositiveImaginary(f64),
    #[error("annulus radii must satisfy 0 < r_inner <= r_outer, got {r_inner} and {r_outer}")]
    BadAnnulus { r_inner: f64, r_outer: f64 },
    #[error("Teichmuller bound requires R >= 1, got {0}")]
    TeichmullerArg(f64),
    #[error("distortion radii require 0 < r < R/7 and 0 < R <= M, got r={r}, R={big_r}, M={m}")]
    DistortionArgs { r: f64, big_r: f64, m: f64 },
}

/// Parameter bundle for SLE_kappa, kappa in (0, 8).
///
/// `d = 1 + kappa/8` is the fractal dimension of the trace and
/// `alpha = 8/kappa - 1` the boundary exponent. Both are strictly positive on
/// the admissible range, with `1 < d < 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SleParams {
    kappa: f64,
    d: f64,
    alpha: f64,
}

impl SleParams {
    pub fn new(kappa: f64) -> Result<Self, GeometryError> {
        if !(kappa > 0.0 && kappa < 8.0) {
            return Err(GeometryError::KappaOutOfRange(kappa));
        }
        Ok(SleParams {
            kappa,
            d: 1.0 + kappa / 8.0,
            alpha: 8.0 / kappa - 1.0,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Fractal dimension of the trace.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Boundary exponent.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Interior exponent `2 - d`.
    pub fn interior_exponent(&self) -> f64 {
        2.0 - self.d
    }

    /// log P_y(x), the log-domain form used by the bound kernels so that
    /// products of many small factors never underflow.
    ///
    /// `P_y(x) = y^(alpha-(2-d)) x^(2-d)` for `x <= y`, and `x^alpha` for
    /// `x >= y`; the two branches agree at `x = y`. At `y = 0` only the
    /// second branch is reachable and `P_0(x) = x^alpha`.
    pub fn ln_py(&self, y: f64, x: f64) -> Result<f64, GeometryError> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(GeometryError::NonpositiveArgument(x));
        }
        if y < 0.0 || !y.is_finite() {
            return Err(GeometryError::NegativeHeight(y));
        }
        let two_minus_d = 2.0 - self.d;
        if y > 0.0 && x <= y {
            Ok((self.alpha - two_minus_d) * y.ln() + two_minus_d * x.ln())
        } else {
            Ok(self.alpha * x.ln())
        }
    }

    /// The kernel `P_y(x)` itself.
    pub fn py(&self, y: f64, x: f64) -> Result<f64, GeometryError> {
        Ok(self.ln_py(y, x)?.exp())
    }

    /// `P_y(x_num) / P_y(x_den)`, evaluated in log domain.
    ///
    /// For `x_num < x_den` the ratio is sandwiched between
    /// `(x_num/x_den)^alpha` and `(x_num/x_den)^(d-2)`.
    pub fn py_ratio(&self, y: f64, x_num: f64, x_den: f64) -> Result<f64, GeometryError> {
        Ok((self.ln_py(y, x_num)? - self.ln_py(y, x_den)?).exp())
    }
}

/// Returns the derived exponents for a given kappa.
pub fn exponents(kappa: f64) -> Result<SleParams, GeometryError> {
    SleParams::new(kappa)
}

/// A point of the cylinder H* = upper half-plane modulo horizontal period pi,
/// stored by its canonical representative with `re` in `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderPoint {
    re: f64,
    im: f64,
}

impl CylinderPoint {
    /// Reduces `re` modulo pi to the canonical representative; `im` must be
    /// nonnegative (closed upper half-plane).
    pub fn new(re: f64, im: f64) -> Result<Self, GeometryError> {
        if im < 0.0 || !im.is_finite() || !re.is_finite() {
            return Err(GeometryError::NegativeHeight(im));
        }
        let mut canon = re.rem_euclid(PI);
        // rem_euclid can return exactly PI when re is a tiny negative number.
        if canon >= PI {
            canon -= PI;
        }
        Ok(CylinderPoint { re: canon, im })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }
}

/// Distance on the cylinder: min over integer k of |(a - b) + k*pi|.
pub fn cylinder_dist(a: CylinderPoint, b: CylinderPoint) -> f64 {
    let dx = (a.re - b.re).rem_euclid(PI);
    let horiz = dx.min(PI - dx);
    let vert = a.im - b.im;
    horiz.hypot(vert)
}

/// Conformal radius of a cylinder point seen from the cylinder itself:
/// sinh(2 Im z). Requires a strictly interior point.
pub fn crad_cylinder(z: CylinderPoint) -> Result<f64, GeometryError> {
    if z.im <= 0.0 {
        return Err(GeometryError::NonpositiveImaginary(z.im));
    }
    Ok((2.0 * z.im).sinh())
}

/// A round annulus `r_inner <= |z - center| <= r_outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub center: num_complex::Complex64,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Annulus {
    pub fn new(
        center: num_complex::Complex64,
        r_inner: f64,
        r_outer: f64,
    ) -> Result<Self, GeometryError> {
        if !(r_inner > 0.0) || r_outer < r_inner || !r_outer.is_finite() {
            return Err(GeometryError::BadAnnulus { r_inner, r_outer });
        }
        Ok(Annulus {
            center,
            r_inner,
            r_outer,
        })
    }
}

/// Modulus of a full round annulus: ln(r_outer/r_inner) / (2 pi).
pub fn annulus_modulus(ann: &Annulus) -> f64 {
    (ann.r_outer / ann.r_inner).ln() / (2.0 * PI)
}

/// Modulus of a boundary-anchored half-annulus: ln(r_outer/r_inner) / pi.
///
/// The reflection about the boundary doubles the full-annulus value.
pub fn half_annulus_modulus(ann: &Annulus) -> f64 {
    (ann.r_outer / ann.r_inner).ln() / PI
}

/// Closed-form upper bound for the Teichmuller modulus:
/// Lambda(R) <= ln(16 (R + 1)) / (2 pi), valid for R >= 1.
pub fn teichmuller_bound(big_r: f64) -> Result<f64, GeometryError> {
    if !(big_r >= 1.0) {
        return Err(GeometryError::TeichmullerArg(big_r));
    }
    Ok((16.0 * (big_r + 1.0)).ln() / (2.0 * PI))
}

/// Distorted radii under a conformal map with `|phi'(z_0)| = deriv_mag` on a
/// ball of in-radius `M`:
///
/// `r~ = r deriv / (1 - r/M)^2` and `R~ = R deriv / (1 + R/M)^2`.
///
/// Requires `0 < r < R/7` and `R <= M`; the output then satisfies
/// `r/R < r~/R~ < 7 r/R < 1`.
pub fn distortion_radii(
    r: f64,
    big_r: f64,
    m: f64,
    deriv_mag: f64,
) -> Result<(f64, f64), GeometryError> {
    if !(r > 0.0 && r < big_r / 7.0 && big_r <= m && m > 0.0) || !(deriv_mag > 0.0) {
        return Err(GeometryError::DistortionArgs { r, big_r, m });
    }
    let r_tilde = r * deriv_mag / (1.0 - r / m).powi(2);
    let big_r_tilde = big_r * deriv_mag / (1.0 + big_r / m).powi(2);
    Ok((r_tilde, big_r_tilde))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn exponents_table() {
        let p = exponents(4.0).unwrap();
        assert_eq!(p.d(), 1.5);
        assert_eq!(p.alpha(), 1.0);
        let p = exponents(2.0).unwrap();
        assert_eq!(p.d(), 1.25);
        assert_eq!(p.alpha(), 3.0);
        let p = exponents(6.0).unwrap();
        assert_eq!(p.d(), 1.75);
        assert_relative_eq!(p.alpha(), 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn exponents_rejects_out_of_range() {
        assert!(exponents(0.0).is_err());
        assert!(exponents(8.0).is_err());
        assert!(exponents(-1.0).is_err());
        assert!(exponents(f64::NAN).is_err());
    }

    #[test]
    fn py_branch_continuity() {
        let p = exponents(4.0).unwrap();
        // x = y: both branches give y^alpha.
        assert_relative_eq!(p.py(0.5, 0.5).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn py_interior_branch() {
        // kappa=2: d=1.25, alpha=3. P_1(0.5) = 1^2.25 * 0.5^0.75.
        let p = exponents(2.0).unwrap();
        assert_relative_eq!(p.py(1.0, 0.5).unwrap(), 0.594603557501361, max_relative = 1e-12);
    }

    #[test]
    fn py_boundary_branch() {
        let p = exponents(4.0).unwrap();
        // x >= y branch, alpha = 1.
        assert_relative_eq!(p.py(0.1, 0.5).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn py_rejects_nonpositive_x() {
        let p = exponents(4.0).unwrap();
        assert!(p.py(0.5, 0.0).is_err());
        assert!(p.py(0.5, -1.0).is_err());
    }

    #[test]
    fn py_ratio_examples() {
        let p = exponents(4.0).unwrap();
        assert_relative_eq!(
            p.py_ratio(0.5, 0.1, 0.5).unwrap(),
            0.447213595499958,
            max_relative = 1e-12
        );
        assert_relative_eq!(p.py_ratio(0.5, 0.3, 0.3).unwrap(), 1.0, max_relative = 1e-14);
        // y = 0 forces the pure power branch.
        let p = exponents(2.0).unwrap();
        assert_relative_eq!(p.py_ratio(0.0, 0.25, 0.5).unwrap(), 0.125, max_relative = 1e-13);
    }

    #[test]
    fn cylinder_dist_examples() {
        let a = CylinderPoint::new(0.0, 0.0).unwrap();
        let b = CylinderPoint::new(PI, 0.0).unwrap();
        assert_eq!(b.re(), 0.0); // pi reduces to 0
        assert_relative_eq!(cylinder_dist(a, b), 0.0);

        let a = CylinderPoint::new(0.3, 0.0).unwrap();
        let b = CylinderPoint::new(PI - 0.2, 0.0).unwrap();
        assert_relative_eq!(cylinder_dist(a, b), 0.5, max_relative = 1e-13);

        let a = CylinderPoint::new(0.3, 1.0).unwrap();
        let b = CylinderPoint::new(0.3, 2.5).unwrap();
        assert_relative_eq!(cylinder_dist(a, b), 1.5, max_relative = 1e-14);
    }

    #[test]
    fn crad_values() {
        let z = CylinderPoint::new(0.0, 0.5).unwrap();
        assert_relative_eq!(crad_cylinder(z).unwrap(), 1.1752011936438014, max_relative = 1e-14);
        let z = CylinderPoint::new(0.0, 1.0).unwrap();
        assert_relative_eq!(crad_cylinder(z).unwrap(), 3.626860407847019, max_relative = 1e-14);
        let boundary = CylinderPoint::new(0.0, 0.0).unwrap();
        assert!(crad_cylinder(boundary).is_err());
    }

    #[test]
    fn crad_small_argument_asymptote() {
        for &im in &[1e-3, 1e-6, 1e-9] {
            let z = CylinderPoint::new(0.2, im).unwrap();
            let ratio = crad_cylinder(z).unwrap() / (2.0 * im);
            assert!(ratio >= 1.0 && ratio < 1.0 + 1e-5);
        }
    }

    #[test]
    fn annulus_modulus_values() {
        let c = Complex64::new(0.0, 0.0);
        let ann = Annulus::new(c, 1.0, 1.0).unwrap();
        assert_eq!(annulus_modulus(&ann), 0.0);
        let ann = Annulus::new(c, 1.0, (2.0 * PI).exp()).unwrap();
        assert_relative_eq!(annulus_modulus(&ann), 1.0, max_relative = 1e-14);
        let ann = Annulus::new(c, 0.25, 4.0).unwrap();
        assert_relative_eq!(annulus_modulus(&ann), 0.4412712003053032, max_relative = 1e-13);
        assert_relative_eq!(
            half_annulus_modulus(&ann),
            2.0 * annulus_modulus(&ann),
            max_relative = 1e-14
        );
        assert!(Annulus::new(c, 0.0, 1.0).is_err());
        assert!(Annulus::new(c, 2.0, 1.0).is_err());
    }

    #[test]
    fn teichmuller_values() {
        assert_relative_eq!(teichmuller_bound(1.0).unwrap(), 0.5515890003816290, max_relative = 1e-12);
        assert_relative_eq!(teichmuller_bound(15.0).unwrap(), 0.8825424006106065, max_relative = 1e-12);
        let r = 16f64.exp() / 16.0 - 1.0;
        assert_relative_eq!(teichmuller_bound(r).unwrap(), 16.0 / (2.0 * PI), max_relative = 1e-12);
        assert!(teichmuller_bound(0.5).is_err());
    }

    #[test]
    fn distortion_values() {
        let (rt, big_rt) = distortion_radii(0.01, 0.1, 1.0, 1.0).unwrap();
        assert_relative_eq!(rt, 0.010203040506070808, max_relative = 1e-12);
        assert_relative_eq!(big_rt, 0.08264462809917354, max_relative = 1e-12);
        // Linearity in the derivative magnitude.
        let (rt2, big_rt2) = distortion_radii(0.01, 0.1, 1.0, 2.0).unwrap();
        assert_relative_eq!(rt2, 2.0 * rt, max_relative = 1e-14);
        assert_relative_eq!(big_rt2, 2.0 * big_rt, max_relative = 1e-14);
        assert!(distortion_radii(0.02, 0.1, 1.0, 1.0).is_err()); // r >= R/7
        assert!(distortion_radii(0.01, 2.0, 1.0, 1.0).is_err()); // R > M
    }

    proptest! {
        // Lemma 2.1 sandwich and monotonicity suite.
        #[test]
        fn py_ratio_sandwich(
            y in 0.0f64..2.0,
            x1 in 1e-6f64..1.0,
            scale in 1.0001f64..100.0,
            kappa in 0.1f64..7.9,
        ) {
            let p = exponents(kappa).unwrap();
            let x2 = x1 * scale;
            let ratio = p.py_ratio(y, x1, x2).unwrap();
            let lo = (x1 / x2).powf(p.alpha());
            let hi = (x1 / x2).powf(p.d() - 2.0);
            prop_assert!(ratio >= lo * (1.0 - 1e-12));
            prop_assert!(ratio <= hi * (1.0 + 1e-12));
        }

        #[test]
        fn py_ratio_monotone_in_y(
            y1 in 0.0f64..2.0,
            dy in 0.0f64..2.0,
            x1 in 1e-6f64..1.0,
            scale in 1.0001f64..100.0,
            kappa in 0.1f64..7.9,
        ) {
            let p = exponents(kappa).unwrap();
            let y2 = y1 + dy;
            let x2 = x1 * scale;
            let r1 = p.py_ratio(y1, x1, x2).unwrap();
            let r2 = p.py_ratio(y2, x1, x2).unwrap();
            prop_assert!(r1 <= r2 * (1.0 + 1e-12));
        }

        #[test]
        fn py_cross_y_sandwich(
            y1 in 1e-6f64..2.0,
            scale in 1.0f64..100.0,
            x in 1e-6f64..2.0,
            kappa in 0.1f64..7.9,
        ) {
            let p = exponents(kappa).unwrap();
            let y2 = y1 * scale;
            let ratio = p.py(y1, x).unwrap() / p.py(y2, x).unwrap();
            let lo = (y1 / y2).powf(p.alpha() - (2.0 - p.d()));
            prop_assert!(ratio >= lo * (1.0 - 1e-12));
            prop_assert!(ratio <= 1.0 + 1e-12);
        }

        #[test]
        fn py_nondecreasing_in_x(
            y in 0.0f64..2.0,
            x1 in 1e-6f64..1.0,
            scale in 1.0f64..100.0,
            kappa in 0.1f64..7.9,
        ) {
            let p = exponents(kappa).unwrap();
            let x2 = x1 * scale;
            prop_assert!(p.py(y, x1).unwrap() <= p.py(y, x2).unwrap() * (1.0 + 1e-12));
        }

        #[test]
        fn cylinder_metric_properties(
            a_re in -10.0f64..10.0, a_im in 0.0f64..5.0,
            b_re in -10.0f64..10.0, b_im in 0.0f64..5.0,
            c_re in -10.0f64..10.0, c_im in 0.0f64..5.0,
        ) {
            let a = CylinderPoint::new(a_re, a_im).unwrap();
            let b = CylinderPoint::new(b_re, b_im).unwrap();
            let c = CylinderPoint::new(c_re, c_im).unwrap();
            let dab = cylinder_dist(a, b);
            let dba = cylinder_dist(b, a);
            let dac = cylinder_dist(a, c);
            let dcb = cylinder_dist(c, b);
            prop_assert!(dab >= 0.0);
            prop_assert!((dab - dba).abs() < 1e-12);
            prop_assert!(dab <= dac + dcb + 1e-12);
        }

        #[test]
        fn distortion_sandwich(
            r_frac in 1e-4f64..0.142,
            big_r in 1e-3f64..10.0,
            m_scale in 1.0f64..100.0,
            deriv in 1e-3f64..1e3,
        ) {
            let r = r_frac * big_r;
            prop_assume!(r < big_r / 7.0);
            let m = big_r * m_scale;
            let (rt, big_rt) = distortion_radii(r, big_r, m, deriv).unwrap();
            let lhs = r / big_r;
            let mid = rt / big_rt;
            prop_assert!(lhs < mid);
            prop_assert!(mid < 7.0 * lhs);
            prop_assert!(7.0 * lhs < 1.0);
        }
    }
}
