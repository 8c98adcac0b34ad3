//! Multipole (Rayleigh) eigenproblem for the generalized electrostatic
//! resonances of the coated-rod lattice.
//!
//! Potentials are expanded in `cos(l theta)` only. In the coating
//! `u = sum (A_l r^l + B_l r^-l) cos(l theta)`, in the host
//! `u = sum (C_l r^l + D_l r^-l) cos(l theta)`. The jump `[.]` at `r = b` is
//! taken as inside minus outside.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticeSumTable;
use crate::model::{CellGeometry, CouplingConvention};
use crate::specfun::binomial;

/// Relative change between orders `N` and `N + CONVERGENCE_STEP` below which an
/// eigenvalue counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;
pub const CONVERGENCE_STEP: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct RayleighMatrix {
    pub order: usize,
    pub convention: CouplingConvention,
    pub entries: DMatrix<f64>,
    /// `ln w_l`; the similarity `W A W^-1` is symmetric.
    pub log_weights: Vec<f64>,
}

impl RayleighMatrix {
    pub fn balance_weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    /// `W A W^-1` before symmetrization.
    pub fn balanced(&self) -> DMatrix<f64> {
        let n = self.order;
        DMatrix::from_fn(n, n, |i, j| {
            let v = self.entries[(i, j)];
            if v == 0.0 {
                0.0
            } else {
                v * (self.log_weights[i] - self.log_weights[j]).exp()
            }
        })
    }

    /// Largest `|S_lm - S_ml|` relative to the largest entry of the balanced matrix.
    pub fn asymmetry(&self) -> f64 {
        let s = self.balanced();
        let scale = s.amax();
        if scale == 0.0 {
            return 0.0;
        }
        (&s - s.transpose()).amax() / scale
    }

    /// Index sets that the sparsity pattern couples together.
    fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.order;
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            label[start] = id;
            let mut k = 0;
            while k < members.len() {
                let i = members[k];
                for j in 0..n {
                    if label[j] == usize::MAX
                        && (self.entries[(i, j)] != 0.0 || self.entries[(j, i)] != 0.0)
                    {
                        label[j] = id;
                        members.push(j);
                    }
                }
                k += 1;
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

/// Matrix of the truncated Rayleigh system in the unknowns `B_1 .. B_N`.
pub fn assemble_matrix(
    geom: &CellGeometry,
    sums: &LatticeSumTable,
    order: usize,
    convention: CouplingConvention,
) -> Result<RayleighMatrix> {
    if order == 0 {
        return Err(Error::Config("multipole order must be at least 1".into()));
    }
    if sums.max_order < 2 * order {
        return Err(Error::Config(format!(
            "lattice sums cover order {} but the matrix needs {}",
            sums.max_order,
            2 * order
        )));
    }
    let (a, b) = (geom.a, geom.b);
    let ratio = (b / a).powi(2 * order as i32);
    if !(ratio <= 1e300) {
        return Err(Error::Overflow { order, ratio });
    }

    let ab2 = (a / b).powi(2);
    let ba2 = (b / a).powi(2);
    let lattice = |n: usize| -> f64 {
        if n == 2 {
            match convention {
                CouplingConvention::Scaled => sums.dipole,
                CouplingConvention::Literal => 0.0,
            }
        } else {
            sums.get(n)
        }
    };

    let mut entries = DMatrix::zeros(order, order);
    for l in 1..=order {
        // D_l = a^-2l (1 + (a/b)^2l), kept factored to avoid overflow.
        let d_scaled = 1.0 + ab2.powi(l as i32);
        let a2l = a.powi(2 * l as i32);
        for m in 1..=order {
            let s = lattice(l + m);
            let mut v = 0.0;
            if s != 0.0 {
                let e_m = ba2.powi(m as i32) - 1.0;
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                v = -e_m * binomial(m + l - 1, l) * sign * s * a2l / (2.0 * d_scaled);
                if l != m && convention == CouplingConvention::Scaled {
                    v *= b.powi((l + m) as i32);
                }
            }
            if l == m {
                v += 1.0 / (1.0 + ba2.powi(l as i32));
            }
            entries[(l - 1, m - 1)] = v;
        }
    }

    let log_weights = (1..=order)
        .map(|l| {
            let lf = l as f64;
            let ln_d = -2.0 * lf * a.ln() + (ab2.powi(l as i32)).ln_1p();
            let ln_e = (ba2.powi(l as i32) - 1.0).ln();
            0.5 * (lf.ln() + ln_d + ln_e)
        })
        .collect();

    Ok(RayleighMatrix { order, convention, entries, log_weights })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElectrostaticMode {
    pub lambda: f64,
    /// `B_l`, `l = 1..N`, as returned by the eigensolver (not energy normalized).
    pub b_coef: Vec<f64>,
    pub a_coef: Vec<f64>,
    pub c_coef: Vec<f64>,
    pub d_coef: Vec<f64>,
    /// `int |grad u|^2` over the cell minus the core, before normalization.
    pub energy_norm: f64,
    /// Coupling coefficients of the energy-normalized mode.
    pub alpha1: f64,
    pub alpha2: f64,
    /// `||A B - lambda B|| / ||B||`.
    pub residual: f64,
    /// Stable between orders `N` and `N + 5`.
    pub converged: bool,
    /// Positive energy norm; non-admissible modes carry zero coupling.
    pub admissible: bool,
}

impl ElectrostaticMode {
    /// Whether the mode contributes a pole to the inverse permittivity.
    pub fn couples(&self) -> bool {
        self.admissible && (self.alpha1 != 0.0 || self.alpha2 != 0.0)
    }

    /// Coefficients rescaled so that the energy norm is one.
    pub fn normalized(&self) -> Self {
        let s = 1.0 / self.energy_norm.sqrt();
        let scale = |v: &[f64]| v.iter().map(|x| x * s).collect::<Vec<_>>();
        Self {
            b_coef: scale(&self.b_coef),
            a_coef: scale(&self.a_coef),
            c_coef: scale(&self.c_coef),
            d_coef: scale(&self.d_coef),
            energy_norm: 1.0,
            ..self.clone()
        }
    }
}

/// `A_l`, `C_l`, `D_l` from `B_l` via the interface conditions.
pub fn closure_coefficients(
    lambda: f64,
    b_coef: &[f64],
    geom: &CellGeometry,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let den = 1.0 - 2.0 * lambda;
    if den.abs() < 1e-12 {
        return Err(Error::SingularClosure(lambda));
    }
    let (a, b) = (geom.a, geom.b);
    let mut ac = Vec::with_capacity(b_coef.len());
    let mut cc = Vec::with_capacity(b_coef.len());
    let mut dc = Vec::with_capacity(b_coef.len());
    for (i, &bl) in b_coef.iter().enumerate() {
        let l = (i + 1) as i32;
        let a_m2l = a.powi(-2 * l);
        let b_m2l = b.powi(-2 * l);
        ac.push(a_m2l * bl);
        cc.push((b_m2l - 2.0 * lambda * a_m2l) * bl / den);
        dc.push(((b / a).powi(2 * l) - 2.0 * lambda) * bl / den);
    }
    Ok((ac, cc, dc))
}

/// Energy norm and the coupling coefficients of the normalized mode for a
/// propagation direction `khat`.
pub fn energy_norm_and_alphas(
    lambda: f64,
    a_coef: &[f64],
    b_coef: &[f64],
    c_coef: &[f64],
    d_coef: &[f64],
    geom: &CellGeometry,
    khat: [f64; 2],
) -> Result<(f64, f64, f64)> {
    let (a, b) = (geom.a, geom.b);
    let mut energy = 0.0;
    for i in 0..b_coef.len() {
        let l = (i + 1) as i32;
        let lf = PI * l as f64;
        let (al, bl, cl, dl) = (a_coef[i], b_coef[i], c_coef[i], d_coef[i]);
        let outer = al * al * b.powi(2 * l) - bl * bl * b.powi(-2 * l);
        let inner = al * al * a.powi(2 * l) - bl * bl * a.powi(-2 * l);
        let host = cl * cl * b.powi(2 * l) - dl * dl * b.powi(-2 * l);
        energy += lf * (outer - inner) - lf * host;
    }
    if !(energy > 0.0) {
        return Err(Error::NonPositiveEnergy { lambda, energy });
    }
    let s = 1.0 / energy.sqrt();
    let (alpha1, alpha2) = match (a_coef.first(), c_coef.first(), d_coef.first()) {
        (Some(&a1), Some(&c1), Some(&d1)) => (
            -khat[0] * PI * (c1 * b * b + d1) * s,
            khat[0] * PI * a1 * (b * b - a * a) * s,
        ),
        _ => (0.0, 0.0),
    };
    Ok((energy, alpha1, alpha2))
}

/// All `N` eigenpairs, sorted by descending `|lambda|`. The `converged` flag is
/// left unset; see [`resonances`].
pub fn solve_spectrum(
    mat: &RayleighMatrix,
    geom: &CellGeometry,
    khat: [f64; 2],
) -> Result<Vec<ElectrostaticMode>> {
    let n = mat.order;
    let balanced = mat.balanced();
    let mut modes = Vec::with_capacity(n);
    for block in mat.blocks() {
        let k = block.len();
        let sub = DMatrix::from_fn(k, k, |i, j| {
            0.5 * (balanced[(block[i], block[j])] + balanced[(block[j], block[i])])
        });
        let eig = SymmetricEigen::try_new(sub.clone(), f64::EPSILON, 10_000).ok_or_else(|| {
            Error::Eigensolver(format!(
                "symmetric QR did not converge on a {k}x{k} block (balanced norm {:e})",
                sub.norm()
            ))
        })?;
        for (col, &lambda) in eig.eigenvalues.iter().enumerate() {
            let y = eig.eigenvectors.column(col);
            let pivot = y.iamax();
            let sign = if y[pivot] < 0.0 { -1.0 } else { 1.0 };
            let mut b_coef = vec![0.0; n];
            for (i, &l) in block.iter().enumerate() {
                b_coef[l] = sign * y[i] * (-mat.log_weights[l]).exp();
            }
            modes.push(build_mode(mat, geom, khat, lambda, b_coef)?);
        }
    }
    modes.sort_by(|x, y| y.lambda.abs().total_cmp(&x.lambda.abs()));
    Ok(modes)
}

fn build_mode(
    mat: &RayleighMatrix,
    geom: &CellGeometry,
    khat: [f64; 2],
    lambda: f64,
    b_coef: Vec<f64>,
) -> Result<ElectrostaticMode> {
    let bv = nalgebra::DVector::from_column_slice(&b_coef);
    let residual = (&mat.entries * &bv - lambda * &bv).norm() / bv.norm();
    let (a_coef, c_coef, d_coef) = closure_coefficients(lambda, &b_coef, geom)?;
    let (energy_norm, alpha1, alpha2, admissible) =
        match energy_norm_and_alphas(lambda, &a_coef, &b_coef, &c_coef, &d_coef, geom, khat) {
            Ok((e, a1, a2)) => (e, a1, a2, true),
            Err(Error::NonPositiveEnergy { energy, .. }) => (energy, 0.0, 0.0, false),
            Err(e) => return Err(e),
        };
    Ok(ElectrostaticMode {
        lambda,
        b_coef,
        a_coef,
        c_coef,
        d_coef,
        energy_norm,
        alpha1,
        alpha2,
        residual,
        converged: false,
        admissible,
    })
}

/// Solve at order `N` and flag eigenvalues that persist at `N + 5`.
pub fn resonances(
    geom: &CellGeometry,
    sums: &LatticeSumTable,
    order: usize,
    khat: [f64; 2],
    convention: CouplingConvention,
) -> Result<Vec<ElectrostaticMode>> {
    let mut modes = solve_spectrum(&assemble_matrix(geom, sums, order, convention)?, geom, khat)?;
    let check = eigenvalues(geom, sums, order + CONVERGENCE_STEP, convention)?;
    for m in &mut modes {
        m.converged = check
            .iter()
            .any(|&l| (l - m.lambda).abs() <= CONVERGENCE_TOL * m.lambda.abs());
    }
    Ok(modes)
}

/// Eigenvalues only, sorted by descending magnitude.
pub fn eigenvalues(
    geom: &CellGeometry,
    sums: &LatticeSumTable,
    order: usize,
    convention: CouplingConvention,
) -> Result<Vec<f64>> {
    let mat = assemble_matrix(geom, sums, order, convention)?;
    let balanced = mat.balanced();
    let sym = 0.5 * (&balanced + balanced.transpose());
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigensolver(format!("order {order} spectrum did not converge")))?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
    Ok(v)
}

/// Potential value with a flag for points beyond the local expansion's reach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Potential {
    pub value: f64,
    pub extrapolated: bool,
}

/// `u(r, theta)` outside the core.
pub fn evaluate_potential(mode: &ElectrostaticMode, geom: &CellGeometry, r: f64, theta: f64) -> Result<Potential> {
    if !(r > geom.a) {
        return Err(Error::Domain { what: "potential radius (must exceed core radius)", value: r });
    }
    let (inner, outer) = if r <= geom.b {
        (&mode.a_coef, &mode.b_coef)
    } else {
        (&mode.c_coef, &mode.d_coef)
    };
    let mut value = 0.0;
    for i in 0..inner.len() {
        let l = (i + 1) as i32;
        value += (inner[i] * r.powi(l) + outer[i] * r.powi(-l)) * (l as f64 * theta).cos();
    }
    Ok(Potential { value, extrapolated: r > 1.0 - geom.b })
}

/// `d u / d r` from the closed-form coefficients, on the coating or host side.
pub fn radial_derivative(mode: &ElectrostaticMode, r: f64, theta: f64, host_side: bool) -> f64 {
    let (inner, outer) = if host_side {
        (&mode.c_coef, &mode.d_coef)
    } else {
        (&mode.a_coef, &mode.b_coef)
    };
    let mut v = 0.0;
    for i in 0..inner.len() {
        let l = (i + 1) as i32;
        let lf = l as f64;
        v += lf * (inner[i] * r.powi(l - 1) - outer[i] * r.powi(-l - 1)) * (lf * theta).cos();
    }
    v
}

/// Surface charge on `r = b`: the jump of the normal field, inside minus outside.
pub fn surface_charge(mode: &ElectrostaticMode, geom: &CellGeometry, theta: f64) -> Result<f64> {
    let den = 1.0 - 2.0 * mode.lambda;
    if den.abs() < 1e-12 {
        return Err(Error::SingularClosure(mode.lambda));
    }
    let (a, b) = (geom.a, geom.b);
    let mut q = 0.0;
    for (i, &bl) in mode.b_coef.iter().enumerate() {
        let l = (i + 1) as i32;
        let coeff = (b.powi(l - 1) * a.powi(-2 * l) - b.powi(-l - 1)) / den;
        q += coeff * l as f64 * bl * (l as f64 * theta).cos();
    }
    Ok(2.0 * q)
}
