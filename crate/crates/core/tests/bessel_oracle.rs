//! Bessel functions against the integral representation and their zeros
//! against sign changes and interlacing.

use std::f64::consts::PI;

use rodband_core::specfun::{bessel_j, bessel_zeros, gauss_legendre};

/// `(1/pi) int_0^pi cos(n t - x sin t) dt`, composite Gauss-Legendre.
fn integral_rep(n: usize, x: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(64);
    let panels = 32;
    let h = PI / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = p as f64 * h;
        for (xi, wi) in nodes.iter().zip(&weights) {
            let t = lo + 0.5 * h * (xi + 1.0);
            s += 0.5 * h * wi * (n as f64 * t - x * t.sin()).cos();
        }
    }
    s / PI
}

#[test]
fn matches_integral_representation() {
    for n in [0, 1, 2, 5, 10, 20] {
        for x in [1e-3, 0.5, 1.9, 2.1, 7.3, 15.0, 42.0, 99.5] {
            let j = bessel_j(n, x).unwrap();
            let r = integral_rep(n, x);
            assert!((j - r).abs() < 1e-12, "J{n}({x}) = {j} vs {r}");
        }
    }
}

#[test]
fn derivative_of_j0_is_minus_j1() {
    let h = 1e-5;
    for x in [0.3, 2.0, 2.4048, 9.0, 31.0] {
        let d = (bessel_j(0, x + h).unwrap() - bessel_j(0, x - h).unwrap()) / (2.0 * h);
        assert!((d + bessel_j(1, x).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn zeros_are_sign_changes_and_interlace() {
    let z0 = bessel_zeros(0, 60).unwrap().zeros;
    let z1 = bessel_zeros(1, 60).unwrap().zeros;
    for &z in &z0 {
        assert!(bessel_j(0, z).unwrap().abs() < 1e-13);
        assert!(bessel_j(0, z - 1e-7).unwrap() * bessel_j(0, z + 1e-7).unwrap() < 0.0);
    }
    // j_{0,k} < j_{1,k} < j_{0,k+1}
    for k in 0..59 {
        assert!(z0[k] < z1[k] && z1[k] < z0[k + 1]);
    }
    assert!((z0[0] - 2.404825557695773).abs() < 1e-13);
}

#[test]
fn invalid_argument_is_rejected() {
    assert!(bessel_j(0, -1.0).is_err());
    assert!(bessel_j(0, f64::NAN).is_err());
}
