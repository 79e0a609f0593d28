//! Scalar functions of a real energy: the kernels sin(k t)/k and cos(k t),
//! the dispersion function xi, the Floquet multipliers and the
//! single-impurity coupling curve f.
//!
//! Everything is expressed through E = k^2 so that the positive branch
//! (k real), the negative branch (k = i kappa) and the removable point E = 0
//! share one code path without complex arithmetic.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{ChainParams, EnergyPoint};

/// Above this value of kappa*pi, cosh and sinh agree to machine precision
/// and xi is evaluated in factored form.
const LARGE_KAPPA_PI: f64 = 20.0;
/// Below this |E| the derivative of `s_kernel` is taken from its Taylor series.
const SERIES_RADIUS: f64 = 1e-2;

/// sin(k t)/k for E = k^2, continued to sinh(kappa t)/kappa for E < 0 and to t at E = 0.
pub fn sinc_kernel(energy: f64, t: f64) -> f64 {
    if energy > 0.0 {
        let k = energy.sqrt();
        (k * t).sin() / k
    } else if energy < 0.0 {
        let kappa = (-energy).sqrt();
        (kappa * t).sinh() / kappa
    } else {
        t
    }
}

/// cos(k t) for E = k^2, continued to cosh(kappa t) for E < 0.
pub fn cos_kernel(energy: f64, t: f64) -> f64 {
    if energy >= 0.0 {
        (energy.sqrt() * t).cos()
    } else {
        ((-energy).sqrt() * t).cosh()
    }
}

/// sin(k pi)/k, an entire function of E.
pub fn s_kernel(energy: f64) -> f64 {
    sinc_kernel(energy, PI)
}

/// cos(k pi), an entire function of E.
pub fn c_kernel(energy: f64) -> f64 {
    cos_kernel(energy, PI)
}

/// k cot(k pi) = c_kernel / s_kernel. Infinite at E = n^2.
pub fn cot_kernel(energy: f64) -> f64 {
    if energy > 0.0 {
        let k = energy.sqrt();
        let s = (k * PI).sin();
        if s == 0.0 {
            return f64::INFINITY;
        }
        k * (k * PI).cos() / s
    } else if energy < 0.0 {
        let kappa = (-energy).sqrt();
        kappa / (kappa * PI).tanh()
    } else {
        1.0 / PI
    }
}

/// d c_kernel / dE.
pub fn dc_kernel(energy: f64) -> f64 {
    -0.5 * PI * s_kernel(energy)
}

/// d s_kernel / dE.
pub fn ds_kernel(energy: f64) -> f64 {
    if energy.abs() < SERIES_RADIUS {
        // s(E) = sum_j (-1)^j pi^(2j+1) E^j / (2j+1)!
        let mut sum = 0.0;
        let mut coeff = PI; // (-1)^j pi^(2j+1)/(2j+1)! at j = 0
        let mut power = 1.0; // E^(j-1)
        for j in 1..14 {
            let jf = j as f64;
            coeff *= -PI * PI / ((2.0 * jf) * (2.0 * jf + 1.0));
            sum += jf * coeff * power;
            power *= energy;
        }
        sum
    } else {
        (PI * c_kernel(energy) - s_kernel(energy)) / (2.0 * energy)
    }
}

/// Numerator of xi: cos(k pi) + (coupling/4k) sin(k pi).
///
/// Deep in the negative half-line this is evaluated as
/// cosh(kappa pi) (1 + coupling tanh(kappa pi)/(4 kappa)) so that a large
/// negative coupling never produces inf - inf.
pub fn xi_numerator(energy: f64, coupling: f64) -> f64 {
    if energy < 0.0 {
        let kappa = (-energy).sqrt();
        if kappa * PI > LARGE_KAPPA_PI {
            let factor = 1.0 + coupling * (kappa * PI).tanh() / (4.0 * kappa);
            if factor == 0.0 {
                return 0.0;
            }
            return (kappa * PI).cosh() * factor;
        }
    }
    c_kernel(energy) + 0.25 * coupling * s_kernel(energy)
}

/// xi evaluated with an explicit cos(A pi); the caller guarantees it is nonzero.
pub(crate) fn xi_raw(energy: f64, coupling: f64, cos_flux: f64) -> f64 {
    xi_numerator(energy, coupling) / cos_flux
}

/// d xi / dE with an explicit cos(A pi).
pub(crate) fn dxi_raw(energy: f64, coupling: f64, cos_flux: f64) -> f64 {
    (dc_kernel(energy) + 0.25 * coupling * ds_kernel(energy)) / cos_flux
}

/// The dispersion function xi(E) = (cos k pi + (coupling/4k) sin k pi) / cos A pi.
pub fn xi(energy: f64, coupling: f64, params: &ChainParams) -> Result<f64> {
    params.require_defined_xi()?;
    Ok(xi_raw(energy, coupling, params.cos_flux()))
}

/// d xi / dE.
pub fn xi_derivative(energy: f64, coupling: f64, params: &ChainParams) -> Result<f64> {
    params.require_defined_xi()?;
    Ok(dxi_raw(energy, coupling, params.cos_flux()))
}

fn outside_band(energy: f64, xi: f64) -> Result<()> {
    if xi.abs() < 1.0 {
        Err(Error::InsideBand {
            energy,
            xi_abs: xi.abs(),
        })
    } else {
        Ok(())
    }
}

/// Roots of lambda^2 - 2 xi lambda + 1 = 0 as (xi + root, xi - root).
///
/// The root of larger modulus is formed without cancellation and the other
/// one as its reciprocal. Valid for |xi| >= 1.
pub fn lambda_pair_from_xi(xi: f64) -> (f64, f64) {
    let big = xi + xi.signum() * radical(xi);
    let small = 1.0 / big;
    if xi > 0.0 {
        (big, small)
    } else {
        (small, big)
    }
}

/// The Floquet multiplier of modulus at most one; it has the sign of xi.
pub fn lambda_small_from_xi(xi: f64) -> f64 {
    xi.signum() / (xi.abs() + radical(xi))
}

/// sqrt(xi^2 - 1) without overflow for huge |xi|.
fn radical(xi: f64) -> f64 {
    let a = xi.abs();
    let inv = 1.0 / a;
    a * ((1.0 - inv) * (1.0 + inv)).max(0.0).sqrt()
}

pub fn lambda_pair(energy: f64, coupling: f64, params: &ChainParams) -> Result<(f64, f64)> {
    let x = xi(energy, coupling, params)?;
    outside_band(energy, x)?;
    Ok(lambda_pair_from_xi(x))
}

pub fn lambda_small(energy: f64, coupling: f64, params: &ChainParams) -> Result<f64> {
    let x = xi(energy, coupling, params)?;
    outside_band(energy, x)?;
    Ok(lambda_small_from_xi(x))
}

/// f with an explicit coupling and cos(A pi); no domain checks.
pub(crate) fn f_raw(energy: f64, coupling: f64, cos_flux: f64) -> f64 {
    let x = xi_raw(energy, coupling, cos_flux);
    let inv = 1.0 / x.abs();
    let root = ((1.0 - inv) * (1.0 + inv)).max(0.0).sqrt();
    -(4.0 * cot_kernel(energy) + coupling) * root
}

pub(crate) fn check_flat(energy: f64) -> Result<()> {
    match EnergyPoint::new(energy).flat_band_index() {
        Some(k) => Err(Error::FlatBandPole { energy, k }),
        None => Ok(()),
    }
}

/// The single-impurity coupling curve
/// f(E) = -sgn(xi) (4 cos A pi / s_kernel(E)) sqrt(xi^2 - 1).
///
/// A point E in a gap is an eigenvalue of the chain with one extra
/// coupling gamma exactly when f(E) = gamma.
pub fn f_single(energy: f64, params: &ChainParams) -> Result<f64> {
    let x = xi(energy, params.alpha(), params)?;
    check_flat(energy)?;
    outside_band(energy, x)?;
    Ok(f_raw(energy, params.alpha(), params.cos_flux()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn complex_pair(energy: f64) -> (f64, f64) {
        let k = Complex64::new(energy, 0.0).sqrt();
        let s = if k.norm() == 0.0 { Complex64::new(PI, 0.0) } else { (k * PI).sin() / k };
        ((k * PI).cos().re, s.re)
    }

    #[test]
    fn kernel_values() {
        assert_eq!(s_kernel(0.0), PI);
        assert!(s_kernel(1.0).abs() < 1e-15);
        assert!((s_kernel(-1.0) - 11.548739357257748).abs() < 1e-12);
        assert_eq!(c_kernel(0.0), 1.0);
        assert_eq!(c_kernel(1.0), -1.0);
        assert!((c_kernel(-1.0) - 11.591953275521519).abs() < 1e-12);
        assert!((cot_kernel(0.0) - 1.0 / PI).abs() < 1e-15);
        assert!(cot_kernel(1e-14).is_finite());
    }

    #[test]
    fn kernels_match_complex_definition() {
        for i in 0..10_000 {
            let e = -25.0 + 50.0 * (i as f64 + 0.5) / 10_000.0;
            let (c, s) = complex_pair(e);
            assert!((c - c_kernel(e)).abs() <= 1e-12 * c.abs().max(1.0), "c at {e}");
            assert!((s - s_kernel(e)).abs() <= 1e-12 * s.abs().max(1.0), "s at {e}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &e in &[-7.3, -0.5, -1e-3, 0.0, 2e-3, 0.7, 3.9, 16.2] {
            let h = 1e-6;
            let ds = (s_kernel(e + h) - s_kernel(e - h)) / (2.0 * h);
            let dc = (c_kernel(e + h) - c_kernel(e - h)) / (2.0 * h);
            assert!((ds - ds_kernel(e)).abs() < 1e-6 * ds.abs().max(1.0), "ds at {e}");
            assert!((dc - dc_kernel(e)).abs() < 1e-6 * dc.abs().max(1.0), "dc at {e}");
        }
        assert!((ds_kernel(0.0) + PI.powi(3) / 6.0).abs() < 1e-14);
        let a = ds_kernel(SERIES_RADIUS - 1e-13);
        let b = ds_kernel(SERIES_RADIUS + 1e-13);
        assert!((a - b).abs() < 1e-11, "{a} {b}");
    }

    #[test]
    fn xi_examples() {
        let p0 = ChainParams::new(0.0, 0.0).unwrap();
        assert!(xi(0.25, 0.0, &p0).unwrap().abs() < 1e-15);
        assert_eq!(xi(0.0, 0.0, &p0).unwrap(), 1.0);
        let p = ChainParams::from_cos_flux(0.7, -4.0).unwrap();
        let v = xi(-1.0, -4.0, &p).unwrap();
        assert!((v - (-PI).exp() / 0.7).abs() < 1e-12);
        assert!((v - 0.061_73).abs() < 1e-4);
        let half = ChainParams::new(0.5, 1.0).unwrap();
        assert!(matches!(xi(1.0, 1.0, &half), Err(Error::HalfIntegerFlux { .. })));
    }

    #[test]
    fn xi_at_zero_energy() {
        let p = ChainParams::from_cos_flux(0.7, -1.0).unwrap();
        let v = xi(0.0, -1.0, &p).unwrap();
        assert!((v - (1.0 - PI / 4.0) / 0.7).abs() < 1e-15);
    }

    #[test]
    fn xi_deep_negative_is_finite() {
        let p = ChainParams::from_cos_flux(0.7, -1e6).unwrap();
        for &e in &[-1e3, -1e4, -1e5] {
            let v = xi(e, -1e6, &p).unwrap();
            assert!(!v.is_nan());
        }
        let q = ChainParams::from_cos_flux(0.7, 3.0).unwrap();
        assert_eq!(xi(-1e6, 3.0, &q).unwrap(), f64::INFINITY);
    }

    #[test]
    fn lambda_examples() {
        let (l1, l2) = lambda_pair_from_xi(1.25);
        assert!((l1 - 2.0).abs() < 1e-15 && (l2 - 0.5).abs() < 1e-15);
        assert_eq!(lambda_pair_from_xi(1.0), (1.0, 1.0));
        assert_eq!(lambda_pair_from_xi(-1.0), (-1.0, -1.0));
        assert!((lambda_small_from_xi(1.25) - 0.5).abs() < 1e-15);
        assert!((lambda_small_from_xi(-1.25) + 0.5).abs() < 1e-15);
        let (a, b) = lambda_pair_from_xi(-1.25);
        assert!((a + 0.5).abs() < 1e-15 && (b + 2.0).abs() < 1e-15);
        let tiny = lambda_small_from_xi(1e200);
        assert!(tiny > 0.0 && tiny < 1e-199);
    }

    #[test]
    fn lambda_inside_band_is_error() {
        let p = ChainParams::from_cos_flux(0.7, 0.0).unwrap();
        assert!(matches!(lambda_small(0.5, 0.0, &p), Err(Error::InsideBand { .. })));
        assert!(matches!(lambda_pair(0.5, 0.0, &p), Err(Error::InsideBand { .. })));
    }

    #[test]
    fn f_single_forms_agree() {
        let p = ChainParams::from_cos_flux(0.6, 1.0).unwrap();
        for &e in &[-3.0, -0.2, 0.0, 0.95, 1.02, 3.9, 4.3] {
            let x = xi(e, 1.0, &p).unwrap();
            if x.abs() <= 1.0 {
                continue;
            }
            let direct = -x.signum() * 4.0 * 0.6 / s_kernel(e) * (x * x - 1.0).sqrt();
            let f = f_single(e, &p).unwrap();
            assert!((f - direct).abs() < 1e-10 * direct.abs().max(1.0), "{e}: {f} vs {direct}");
        }
    }

    #[test]
    fn f_single_errors() {
        let p = ChainParams::from_cos_flux(0.6, 1.0).unwrap();
        assert!(matches!(f_single(4.0, &p), Err(Error::FlatBandPole { k: 2, .. })));
        let band = ChainParams::from_cos_flux(0.6, 0.0).unwrap();
        assert!(matches!(f_single(0.3, &band), Err(Error::InsideBand { .. })));
    }

    proptest! {
        #[test]
        fn lambda_product_is_one(x in prop_oneof![1.0f64..1e4, -1e4f64..-1.0]) {
            let (a, b) = lambda_pair_from_xi(x);
            prop_assert!((a * b - 1.0).abs() < 1e-12);
            let s = lambda_small_from_xi(x);
            prop_assert!(s.abs() <= 1.0 && s.signum() == x.signum());
        }

        #[test]
        fn xi_flux_periodicity(e in -30.0f64..30.0, alpha in -5.0f64..5.0, a in -3.0f64..3.0) {
            prop_assume!((a * PI).cos().abs() > 1e-3);
            let p = ChainParams::new(a, alpha).unwrap();
            let p2 = ChainParams::new(a + 2.0, alpha).unwrap();
            let p1 = ChainParams::new(a + 1.0, alpha).unwrap();
            let x = xi(e, alpha, &p).unwrap();
            prop_assert!((x - xi(e, alpha, &p2).unwrap()).abs() <= 1e-9 * x.abs().max(1.0));
            prop_assert!((x.abs() - xi(e, alpha, &p1).unwrap().abs()).abs() <= 1e-9 * x.abs().max(1.0));
        }

        #[test]
        fn scalar_functions_never_nan(e in -1e6f64..1e4, alpha in -1e3f64..1e3) {
            let p = ChainParams::from_cos_flux(0.3, alpha).unwrap();
            let x = xi(e, alpha, &p).unwrap();
            prop_assert!(!x.is_nan());
            if let Ok(f) = f_single(e, &p) {
                prop_assert!(!f.is_nan());
            }
            if let Ok(l) = lambda_small(e, alpha, &p) {
                prop_assert!(!l.is_nan());
            }
        }
    }
}
