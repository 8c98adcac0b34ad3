//! Square-lattice sums `S_n = sum' cos(n phi_j) / R_j^n`.
//!
//! Points are summed over the full square `|x|, |y| <= M`. The region outside
//! the square `[-M-1/2, M+1/2]^2` is replaced by its continuum integral, which
//! leaves an error of order `M^-(n+2)` because the summand is harmonic. Two
//! radii are then combined by Richardson extrapolation.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::gauss_legendre;

pub const DEFAULT_RADIUS: usize = 400;

/// The dipole sum in the periodic (Rayleigh) summation order.
pub const DIPOLE_SUM: f64 = PI;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeSumTable {
    pub max_order: usize,
    pub radius: usize,
    /// `values[n]` for `0 <= n <= max_order`; entries below 4 and with `4 !| n` are zero.
    pub values: Vec<f64>,
    /// Difference between the two radii used in the extrapolation.
    pub error_estimate: Vec<f64>,
    /// `S_2` in the periodic summation order; only the scaled coupling uses it.
    pub dipole: f64,
}

impl LatticeSumTable {
    pub fn new(max_order: usize, radius: usize) -> Result<Self> {
        if radius < 2 {
            return Err(Error::Config(format!("lattice radius {radius} too small")));
        }
        let fine = corrected_sums(max_order, radius);
        let coarse = corrected_sums(max_order, radius / 2);
        let mut values = vec![0.0; max_order + 1];
        let mut error_estimate = vec![0.0; max_order + 1];
        for n in (4..=max_order).step_by(4) {
            let diff = fine[n] - coarse[n];
            let ratio = (radius as f64 + 0.5) / ((radius / 2) as f64 + 0.5);
            values[n] = fine[n] + diff / (ratio.powi(n as i32 + 2) - 1.0);
            error_estimate[n] = diff.abs();
        }
        Ok(Self { max_order, radius, values, error_estimate, dipole: DIPOLE_SUM })
    }

    /// All sums zero: isolated rods with no lattice interaction.
    pub fn dilute(max_order: usize) -> Self {
        Self {
            max_order,
            radius: 0,
            values: vec![0.0; max_order + 1],
            error_estimate: vec![0.0; max_order + 1],
            dipole: 0.0,
        }
    }

    pub fn get(&self, n: usize) -> f64 {
        self.values.get(n).copied().unwrap_or_else(|| {
            panic!("lattice sum S_{n} requested beyond table order {}", self.max_order)
        })
    }
}

/// `S_n` for `n >= 3` at the default radius.
pub fn lattice_sum(n: usize) -> Result<f64> {
    match n {
        0 | 1 => Err(Error::Domain { what: "lattice_sum order", value: n as f64 }),
        2 => Err(Error::ConditionallyConvergent(2)),
        n if n % 4 != 0 => Ok(0.0),
        n => Ok(LatticeSumTable::new(n, DEFAULT_RADIUS)?.get(n)),
    }
}

/// Plain sum over the square `|x|, |y| <= half_width`, no symmetry shortcut and
/// no tail correction.
pub fn direct_sum(n: usize, half_width: usize) -> f64 {
    let m = half_width as i64;
    let mut s = 0.0;
    for i in -m..=m {
        for j in -m..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let (x, y) = (i as f64, j as f64);
            let r2 = x * x + y * y;
            let (mut re, mut im) = (x / r2, -y / r2);
            let (wr, wi) = (re, im);
            for _ in 1..n {
                let t = re * wr - im * wi;
                im = re * wi + im * wr;
                re = t;
            }
            s += re;
        }
    }
    s
}

/// Octant-symmetric sums over the square plus the continuum tail, for every
/// `4 | n <= max_order`.
fn corrected_sums(max_order: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    if max_order < 4 {
        return out;
    }
    for i in 1..=m {
        for j in 0..=i {
            let weight = if j == 0 || j == i { 4.0 } else { 8.0 };
            let (x, y) = (i as f64, j as f64);
            let r2 = x * x + y * y;
            let (wr, wi) = (x / r2, -y / r2);
            let (w2r, w2i) = (wr * wr - wi * wi, 2.0 * wr * wi);
            let (w4r, w4i) = (w2r * w2r - w2i * w2i, 2.0 * w2r * w2i);
            let (mut pr, mut pi) = (w4r, w4i);
            let mut n = 4;
            while n <= max_order {
                out[n] += weight * pr;
                let t = pr * w4r - pi * w4i;
                pi = pr * w4i + pi * w4r;
                pr = t;
                n += 4;
            }
        }
    }
    let l = m as f64 + 0.5;
    let (nodes, weights) = gauss_legendre(128);
    for n in (4..=max_order).step_by(4) {
        let quarter = PI / 4.0;
        let integral: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| {
                let phi = quarter * t;
                w * (n as f64 * phi).cos() * phi.cos().powi(n as i32 - 2)
            })
            .sum::<f64>()
            * quarter;
        out[n] += 4.0 / (n as f64 - 2.0) * l.powi(2 - n as i32) * integral;
    }
    out
}
