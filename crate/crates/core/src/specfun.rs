//! Bessel functions of the first kind, their zeros, and a few numerical helpers.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

const X_MAX: f64 = 1e4;
const SERIES_LIMIT: f64 = 2.0;
const RESCALE: f64 = 1e250;

fn check_arg(x: f64) -> Result<()> {
    if !(x.is_finite() && (0.0..=X_MAX).contains(&x)) {
        return Err(Error::Domain { what: "bessel_j", value: x });
    }
    Ok(())
}

fn series(n: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= h / k as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let h2 = h * h;
    let mut sum = term;
    for k in 1.. {
        term *= -h2 / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `J_0 .. J_nmax` at `x > 0` by downward recurrence, normalized with
/// `J_0 + 2 sum J_2k = 1`.
fn miller(nmax: usize, x: f64) -> Vec<f64> {
    let top = nmax.max(x.ceil() as usize);
    let mut m = top + 20 + (12.0 * (top as f64).sqrt()) as usize;
    m += m % 2;
    let mut out = vec![0.0; nmax + 1];
    let mut jp = 0.0;
    let mut j = 1.0;
    let mut sum = 0.0;
    let tx = 2.0 / x;
    for k in (1..=m).rev() {
        let jm = k as f64 * tx * j - jp;
        jp = j;
        j = jm;
        if j.abs() > RESCALE {
            j /= RESCALE;
            jp /= RESCALE;
            sum /= RESCALE;
            for v in out.iter_mut() {
                *v /= RESCALE;
            }
        }
        let order = k - 1;
        if order <= nmax {
            out[order] = j;
        }
        if order > 0 && order % 2 == 0 {
            sum += 2.0 * j;
        }
    }
    sum += j;
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

/// `J_n(x)` for `0 <= x <= 1e4`.
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    check_arg(x)?;
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if x <= SERIES_LIMIT {
        return Ok(series(n, x));
    }
    Ok(miller(n, x)[n])
}

/// `J_0(x) .. J_nmax(x)` in one recurrence pass.
pub fn bessel_j_orders(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    if x == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    if x <= SERIES_LIMIT {
        return Ok((0..=nmax).map(|n| series(n, x)).collect());
    }
    Ok(miller(nmax, x))
}

/// Value and derivative of `J_n` at `x`.
fn j_and_deriv(n: usize, x: f64) -> Result<(f64, f64)> {
    let v = bessel_j_orders(n + 1, x)?;
    let d = if n == 0 { -v[1] } else { 0.5 * (v[n - 1] - v[n + 1]) };
    Ok((v[n], d))
}

/// McMahon's large-root expansion for the `k`-th zero of `J_n`.
pub fn mcmahon(n: usize, k: usize) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let beta = (k as f64 + 0.5 * n as f64 - 0.25) * PI;
    let e = 8.0 * beta;
    beta - (mu - 1.0) / e
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BesselZeroTable {
    pub order: usize,
    pub zeros: Vec<f64>,
}

/// First `count` positive zeros of `J_n`, each bracketed then refined by
/// safeguarded Newton steps started from the McMahon estimate.
pub fn bessel_zeros(n: usize, count: usize) -> Result<BesselZeroTable> {
    const STEP: f64 = 0.3;
    let mut zeros = Vec::with_capacity(count);
    let mut lo = if n == 0 { 1e-3 } else { n as f64 };
    let mut f_lo = bessel_j(n, lo)?;
    for k in 1..=count {
        let mut hi = lo + STEP;
        let mut f_hi = bessel_j(n, hi)?;
        while f_lo * f_hi > 0.0 {
            lo = hi;
            f_lo = f_hi;
            hi += STEP;
            f_hi = bessel_j(n, hi)?;
        }
        let guess = mcmahon(n, k);
        let root = refine(n, lo, hi, f_lo, if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) })?;
        zeros.push(root);
        lo = root + 1e-6 * root.max(1.0);
        f_lo = bessel_j(n, lo)?;
    }
    Ok(BesselZeroTable { order: n, zeros })
}

fn refine(n: usize, mut lo: f64, mut hi: f64, f_lo: f64, start: f64) -> Result<f64> {
    let s_lo = f_lo.signum();
    let mut x = start;
    for _ in 0..100 {
        let (f, d) = j_and_deriv(n, x)?;
        if f == 0.0 {
            return Ok(x);
        }
        if f.signum() == s_lo {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - f / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x || hi - lo <= 4.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut s = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + s.ln()
}

/// Binomial coefficient as a float; exact product for small arguments.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 60 {
        let mut r = 1.0;
        for i in 0..k {
            r = r * (n - i) as f64 / (i + 1) as f64;
        }
        return r.round();
    }
    (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)).exp()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
