//! Brute-force quadratures shared by the oracle tests and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::PI;

use rodband_core::electrostatics::ElectrostaticMode;
use rodband_core::specfun::{binomial, gauss_legendre};
use rodband_core::{CellGeometry, LatticeSumTable};

/// Gradient of the exterior expansion `sum (c_l r^l + d_l r^-l) cos(l theta)`.
pub fn grad(c: &[f64], d: &[f64], x: f64, y: f64) -> [f64; 2] {
    let r = x.hypot(y);
    let t = y.atan2(x);
    let (mut ur, mut ut) = (0.0, 0.0);
    for i in 0..c.len() {
        let l = (i + 1) as i32;
        let lf = l as f64;
        let radial = c[i] * r.powi(l) + d[i] * r.powi(-l);
        ur += lf * (c[i] * r.powi(l - 1) - d[i] * r.powi(-l - 1)) * (lf * t).cos();
        ut -= lf * radial * (lf * t).sin();
    }
    let (ct, st) = (t.cos(), t.sin());
    [ct * ur - st * ut / r, st * ur + ct * ut / r]
}

pub fn gl(n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (hi - lo);
    x.iter().zip(&w).map(|(xi, wi)| (lo + h * (xi + 1.0), h * wi)).collect()
}

/// `int_P grad u` on a polar grid.
pub fn coating_integral(m: &ElectrostaticMode, g: &CellGeometry) -> [f64; 2] {
    let mut s = [0.0; 2];
    for (r, wr) in gl(48, g.a, g.b) {
        for (t, wt) in gl(128, 0.0, 2.0 * PI) {
            let v = grad(&m.a_coef, &m.b_coef, r * t.cos(), r * t.sin());
            s[0] += wr * wt * r * v[0];
            s[1] += wr * wt * r * v[1];
        }
    }
    s
}

/// `int_H grad u`: rows in y, two x segments per row where the row cuts the disk.
/// The band |y| < b uses y = b sin(t) to absorb the square-root end behaviour.
pub fn host_integral(m: &ElectrostaticMode, g: &CellGeometry) -> [f64; 2] {
    let b = g.b;
    let mut s = [0.0; 2];
    let row = |y: f64, wy: f64, s: &mut [f64; 2]| {
        let cut = (b * b - y * y).max(0.0).sqrt();
        for (lo, hi) in [(-0.5, -cut), (cut, 0.5)] {
            for (x, wx) in gl(64, lo, hi) {
                let v = grad(&m.c_coef, &m.d_coef, x, y);
                s[0] += wy * wx * v[0];
                s[1] += wy * wx * v[1];
            }
        }
    };
    for (y, w) in gl(64, -0.5, -b).into_iter().chain(gl(64, b, 0.5)) {
        row(y, w, &mut s);
    }
    for (t, w) in gl(96, -0.5 * PI, 0.5 * PI) {
        row(b * t.sin(), w * b * t.cos(), &mut s);
    }
    s
}

pub fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1e-300)
}

pub fn xorshift(seed: u64) -> impl FnMut() -> u64 {
    let mut state = seed;
    move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    }
}

/// Regular part of the periodic field radiated by multipoles `d` on every
/// lattice site, using the periodic dipole sum.
pub fn periodic_regular(d: &[f64], sums: &LatticeSumTable) -> Vec<f64> {
    let n = d.len();
    (1..=n)
        .map(|l| {
            (1..=n)
                .map(|m| {
                    let s = if l + m == 2 { PI } else { sums.get(l + m) };
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binomial(m + l - 1, l) * s * d[m - 1]
                })
                .sum()
        })
        .collect()
}

/// A host-only mode carrying the given expansion coefficients.
pub fn host_field(c: Vec<f64>, d: Vec<f64>) -> ElectrostaticMode {
    ElectrostaticMode {
        lambda: 0.0,
        b_coef: vec![],
        a_coef: vec![],
        c_coef: c,
        d_coef: d,
        energy_norm: 1.0,
        alpha1: 0.0,
        alpha2: 0.0,
        residual: 0.0,
        converged: true,
        admissible: true,
    }
}

/// Fourier coefficient of a centred disk by polar quadrature.
pub fn disk_quadrature(c: f64, g: [i32; 2]) -> f64 {
    let mut q = 0.0;
    for (r, wr) in gl(96, 0.0, c) {
        for (t, wt) in gl(192, 0.0, 2.0 * PI) {
            let phase = 2.0 * PI * (g[0] as f64 * r * t.cos() + g[1] as f64 * r * t.sin());
            q += wr * wt * r * phase.cos();
        }
    }
    q
}
