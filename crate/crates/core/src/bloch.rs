//! Plane-wave solver for the frequency-dependent Bloch problem
//! `-div(a(y, nu)^-1 grad u) = nu u`, used as a reference for the leading-order
//! branches.
//!
//! The inverse permittivity depends on `nu` through the coating, so each
//! solution is a fixed point of `nu -> eigenvalue of K(nu)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{DispersionPoint, Source};
use crate::error::{Error, PoleKind, Result};
use crate::model::{CellGeometry, MaterialSpec};
use crate::specfun::bessel_j;

/// Fourier coefficient of the indicator of a disk of radius `c` centred in the
/// cell, at integer reciprocal vector `g`.
pub fn disk_transform(c: f64, g: [i32; 2]) -> Result<f64> {
    let q = ((g[0] * g[0] + g[1] * g[1]) as f64).sqrt();
    if q == 0.0 {
        return Ok(PI * c * c);
    }
    Ok(c * bessel_j(1, 2.0 * PI * q * c)? / q)
}

/// `(a^-1)^(g)` at frequency `nu`.
pub fn inv_permittivity_fourier(g: [i32; 2], nu: f64, geom: &CellGeometry, mat: &MaterialSpec) -> Result<f64> {
    if (nu - 1.0).abs() < 1e-6 {
        return Err(Error::PoleProximity { nu, pole: 1.0, kind: PoleKind::Coating });
    }
    let z = nu / (nu - 1.0);
    let core = disk_transform(geom.a, g)?;
    let coating = disk_transform(geom.b, g)? - core;
    let delta = if g == [0, 0] { 1.0 } else { 0.0 };
    Ok(delta + (z - 1.0) * coating + (mat.rho * mat.rho - 1.0) * core)
}

/// Plane-wave discretization at fixed Bloch vector.
#[derive(Clone, Debug)]
pub struct BlochOperator {
    pub beta: [f64; 2],
    pub g_max: usize,
    /// Basis wave vectors. With `mirror` set only `g_y >= 0` is stored and each
    /// entry stands for the even combination of `g` and its reflection.
    pub basis: Vec<[i32; 2]>,
    pub mirror: bool,
    geom: CellGeometry,
    mat: MaterialSpec,
    /// Disk transforms of the core and the outer coating radius keyed by `|g|^2`.
    chi: HashMap<i32, (f64, f64)>,
}

impl BlochOperator {
    pub fn new(beta: [f64; 2], g_max: usize, geom: &CellGeometry, mat: &MaterialSpec, mirror: bool) -> Result<Self> {
        if mirror && beta[1] != 0.0 {
            return Err(Error::Config("mirror reduction needs a Bloch vector along the x axis".into()));
        }
        let gm = g_max as i32;
        let basis: Vec<[i32; 2]> = (-gm..=gm)
            .flat_map(|gx| (-gm..=gm).map(move |gy| [gx, gy]))
            .filter(|g| !mirror || g[1] >= 0)
            .collect();
        let mut chi = HashMap::new();
        for dx in 0..=2 * gm {
            for dy in 0..=dx {
                let n2 = dx * dx + dy * dy;
                if let std::collections::hash_map::Entry::Vacant(e) = chi.entry(n2) {
                    e.insert((disk_transform(geom.a, [dx, dy])?, disk_transform(geom.b, [dx, dy])?));
                }
            }
        }
        Ok(Self { beta, g_max, basis, mirror, geom: *geom, mat: *mat, chi })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn coefficient(&self, d: [i32; 2], z: f64) -> f64 {
        let (core, outer) = self.chi[&(d[0] * d[0] + d[1] * d[1])];
        let delta = if d == [0, 0] { 1.0 } else { 0.0 };
        delta + (z - 1.0) * (outer - core) + (self.mat.rho * self.mat.rho - 1.0) * core
    }

    fn full_entry(&self, g: [i32; 2], h: [i32; 2], z: f64) -> f64 {
        let kg = [self.beta[0] + 2.0 * PI * g[0] as f64, self.beta[1] + 2.0 * PI * g[1] as f64];
        let kh = [self.beta[0] + 2.0 * PI * h[0] as f64, self.beta[1] + 2.0 * PI * h[1] as f64];
        (kg[0] * kh[0] + kg[1] * kh[1]) * self.coefficient([g[0] - h[0], g[1] - h[1]], z)
    }

    /// `K(nu)`, real symmetric.
    pub fn assemble(&self, nu: f64) -> Result<DMatrix<f64>> {
        if (nu - 1.0).abs() < 1e-6 {
            return Err(Error::PoleProximity { nu, pole: 1.0, kind: PoleKind::Coating });
        }
        let z = nu / (nu - 1.0);
        let n = self.dim();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let (g, h) = (self.basis[i], self.basis[j]);
                let v = if self.mirror {
                    let w = |g: [i32; 2]| if g[1] == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
                    w(g) * w(h) * (self.full_entry(g, h, z) + self.full_entry(g, [h[0], -h[1]], z))
                } else {
                    self.full_entry(g, h, z)
                };
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// Coefficients, in this basis, of the long-wave cell profile: the core
    /// solution `J0(k r)` continued by the constant `J0(k a)` outside the core,
    /// with `k^2 = nu / rho^2`.
    pub fn cell_profile(&self, nu: f64) -> Result<Vec<f64>> {
        let a = self.geom.a;
        let k = nu.max(0.0).sqrt() / self.mat.rho;
        let j0a = bessel_j(0, k * a)?;
        let j1a = bessel_j(1, k * a)?;
        self.basis
            .iter()
            .map(|g| {
                let q = 2.0 * PI * ((g[0] * g[0] + g[1] * g[1]) as f64).sqrt();
                let (j0q, j1q) = (bessel_j(0, q * a)?, bessel_j(1, q * a)?);
                // int_0^a r J0(kr) J0(qr) dr and int_0^a r J0(qr) dr.
                let lommel = if (k * k - q * q).abs() <= 1e-9 * (k * k).max(1.0) {
                    0.5 * a * a * (j0a * j0a + j1a * j1a)
                } else {
                    a * (k * j1a * j0q - q * j0a * j1q) / (k * k - q * q)
                };
                let flat = if q == 0.0 { 0.5 * a * a } else { a * j1q / q };
                let mut v = 2.0 * PI * (lommel - j0a * flat);
                if *g == [0, 0] {
                    v += j0a;
                }
                if self.mirror && g[1] > 0 {
                    v *= std::f64::consts::SQRT_2;
                }
                Ok(v)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlochSolution {
    pub beta: [f64; 2],
    pub nu: f64,
    #[serde(skip)]
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Squared overlap of the selected eigenvector with the cell profile.
    pub overlap: f64,
}

struct Selected {
    nu: f64,
    vector: Vec<f64>,
    overlap: f64,
}

/// Squared overlap with the cell profile above which an eigenvector counts as a
/// bulk (homogenizable) mode rather than a coating-localized one.
pub const BULK_OVERLAP: f64 = 0.5;

/// Relative windows around the current iterate, searched in turn for a bulk mode.
const WINDOWS: [f64; 8] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0];

/// The eigenpair of `K(nu)` followed by the iteration: the best-overlapping bulk
/// mode in the narrowest window that contains one, else the best overlap overall.
fn select(op: &BlochOperator, nu: f64) -> Result<Selected> {
    let k = op.assemble(nu)?;
    let eig = SymmetricEigen::try_new(k, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigensolver(format!("plane-wave eigensolve failed at nu = {nu}")))?;
    let profile = op.cell_profile(nu)?;
    let pnorm = profile.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scores: Vec<f64> = (0..eig.eigenvalues.len())
        .map(|col| {
            let v = eig.eigenvectors.column(col);
            let dot: f64 = v.iter().zip(&profile).map(|(a, b)| a * b).sum();
            (dot / pnorm).powi(2)
        })
        .collect();
    let best_in = |window: f64| -> Option<usize> {
        (0..scores.len())
            .filter(|&i| scores[i] >= BULK_OVERLAP && (eig.eigenvalues[i] - nu).abs() <= window)
            .max_by(|&i, &j| scores[i].total_cmp(&scores[j]))
    };
    let idx = WINDOWS
        .iter()
        .find_map(|w| best_in(w * nu.abs() + 1e-12))
        .or_else(|| (0..scores.len()).max_by(|&i, &j| scores[i].total_cmp(&scores[j])))
        .ok_or_else(|| Error::Eigensolver("empty plane-wave basis".into()))?;
    Ok(Selected {
        nu: eig.eigenvalues[idx],
        vector: eig.eigenvectors.column(idx).iter().copied().collect(),
        overlap: scores[idx],
    })
}

/// Fixed-point iteration `nu <- eig(K(nu))`. With `accelerate` set, a secant
/// step on `eig(K(nu)) - nu` replaces the plain update whenever it stays within
/// twice the plain step.
fn iterate(
    op: &BlochOperator,
    seed: f64,
    tol: f64,
    max_iter: usize,
    damping: f64,
    accelerate: bool,
    history: &mut Vec<f64>,
) -> Result<Option<BlochSolution>> {
    let mut nu = seed;
    let mut prev: Option<(f64, f64)> = None;
    for it in 1..=max_iter {
        let s = select(op, nu)?;
        let g = s.nu - nu;
        if g.abs() < tol {
            return Ok(Some(BlochSolution {
                beta: op.beta,
                nu: s.nu.max(0.0),
                coefficients: s.vector,
                iterations: it,
                residual: g.abs(),
                overlap: s.overlap,
            }));
        }
        let mut next = nu + damping * g;
        if accelerate {
            if let Some((p_nu, p_g)) = prev {
                if p_g != g {
                    let sec = nu - g * (nu - p_nu) / (g - p_g);
                    if sec.is_finite() && sec >= 0.0 && (sec - nu).abs() <= 2.0 * g.abs() {
                        next = sec;
                    }
                }
            }
        }
        history.push(next);
        if !next.is_finite() || (next - 1.0).abs() < 1e-6 {
            return Ok(None);
        }
        prev = Some((nu, g));
        nu = next;
    }
    Ok(None)
}

/// Fixed-point solve seeded from a leading-order root. Secant-accelerated
/// iteration first, then a damped plain retry, then a bracketed secant on `nu -> eig(K(nu)) - nu`,
/// which is decreasing because `dK/dnu` is negative semidefinite.
pub fn solve_nonlinear_eigen(op: &BlochOperator, seed: f64, tol: f64, max_iter: usize) -> Result<BlochSolution> {
    let mut history = Vec::new();
    if let Some(s) = iterate(op, seed, tol, max_iter, 1.0, true, &mut history)? {
        return Ok(s);
    }
    if let Some(s) = iterate(op, seed, tol, max_iter, 0.5, false, &mut history)? {
        return Ok(s);
    }
    if let Some(s) = bracketed(op, seed, tol, max_iter, &mut history)? {
        return Ok(s);
    }
    Err(Error::NonConvergence { history })
}

fn bracketed(op: &BlochOperator, seed: f64, tol: f64, max_iter: usize, history: &mut Vec<f64>) -> Result<Option<BlochSolution>> {
    let g = |nu: f64| -> Result<(f64, Selected)> {
        let s = select(op, nu)?;
        Ok((s.nu - nu, s))
    };
    let (g0, _) = g(seed)?;
    // Expand geometrically in the direction of the root.
    let dir = g0.signum();
    let mut step = 0.02 * seed.abs().max(1e-3);
    let (mut lo, mut g_lo, mut hi, mut g_hi) = (seed, g0, seed, g0);
    let mut found = false;
    for _ in 0..30 {
        let x = hi + dir * step;
        if x < 0.0 || (x - 1.0).abs() < 1e-6 || (seed < 1.0) != (x < 1.0) {
            break;
        }
        let (gx, _) = g(x)?;
        history.push(x);
        if gx.signum() != dir {
            lo = hi;
            g_lo = g_hi;
            hi = x;
            g_hi = gx;
            found = true;
            break;
        }
        hi = x;
        g_hi = gx;
        step *= 2.0;
    }
    if !found {
        return Ok(None);
    }
    // Illinois false position on the bracket [lo, hi] (unordered).
    let mut side = 0i32;
    for it in 1..=max_iter {
        let x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        let (gx, s) = g(x)?;
        history.push(x);
        if gx.abs() < tol || (hi - lo).abs() < tol {
            return Ok(Some(BlochSolution {
                beta: op.beta,
                nu: s.nu.max(0.0),
                coefficients: s.vector,
                iterations: it,
                residual: gx.abs(),
                overlap: s.overlap,
            }));
        }
        if gx.signum() == g_hi.signum() {
            hi = x;
            g_hi = gx;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            g_lo = gx;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        }
    }
    Ok(None)
}

/// Outcome of one seeded plane-wave solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlochRecord {
    pub seed: DispersionPoint,
    pub solution: Option<BlochSolution>,
    /// Iterate history length when the solve failed.
    pub attempts: usize,
}

impl BlochRecord {
    pub fn point(&self) -> Option<DispersionPoint> {
        self.solution.as_ref().map(|s| DispersionPoint {
            nu: s.nu,
            omega_ratio: s.nu.sqrt(),
            source: Source::Pwe,
            flagged: false,
            ..self.seed
        })
    }
}

/// One plane-wave solve per leading-order seed, in parallel. Seeds that fail to
/// converge are kept as gaps.
pub fn dispersion_points(
    seeds: &[DispersionPoint],
    khat: [f64; 2],
    geom: &CellGeometry,
    mat: &MaterialSpec,
    g_max: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<BlochRecord>> {
    seeds
        .par_iter()
        .map(|seed| {
            let beta = [seed.dk * khat[0], seed.dk * khat[1]];
            let op = BlochOperator::new(beta, g_max, geom, mat, beta[1] == 0.0)?;
            match solve_nonlinear_eigen(&op, seed.nu, tol, max_iter) {
                Ok(s) => Ok(BlochRecord { seed: *seed, solution: Some(s), attempts: 0 }),
                Err(Error::NonConvergence { history }) => {
                    Ok(BlochRecord { seed: *seed, solution: None, attempts: history.len() })
                }
                Err(Error::PoleProximity { .. }) => Ok(BlochRecord { seed: *seed, solution: None, attempts: 0 }),
                Err(e) => Err(e),
            }
        })
        .collect()
}
