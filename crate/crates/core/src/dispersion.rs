//! Band edges and branches of the leading-order relation `dk^2 = nu n_eff^2(nu)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::effective::{BandClass, EffectiveModel, POLE_EXCLUSION};
use crate::error::{Error, Result};

/// Sample points per interval used to detect sign changes.
pub const SAMPLES: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Origin,
    Cutoff,
    MuPole,
    EpsPole,
    Coating,
    MuZero,
    EpsZero,
}

impl CriticalKind {
    fn is_pole(self) -> bool {
        matches!(self, CriticalKind::MuPole | CriticalKind::EpsPole | CriticalKind::Coating)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub nu: f64,
    pub kind: CriticalKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandInterval {
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub class: BandClass,
    #[serde(skip)]
    pub lo_kind: CriticalKind,
    #[serde(skip)]
    pub hi_kind: CriticalKind,
}

impl BandInterval {
    pub fn width(&self) -> f64 {
        self.nu_hi - self.nu_lo
    }

    pub fn contains(&self, nu: f64) -> bool {
        nu >= self.nu_lo && nu <= self.nu_hi
    }

    /// The part of the interval outside the pole exclusion neighbourhoods.
    pub fn usable(&self) -> Option<(f64, f64)> {
        let lo = margin(self.nu_lo, self.lo_kind, 1.0);
        let hi = margin(self.nu_hi, self.hi_kind, -1.0);
        (lo < hi).then_some((lo, hi))
    }
}

fn margin(nu: f64, kind: CriticalKind, dir: f64) -> f64 {
    let rel = if kind.is_pole() { 2.0 * POLE_EXCLUSION } else { 1e-12 };
    nu + dir * rel * nu.abs()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandReport {
    pub intervals: Vec<BandInterval>,
    pub critical: Vec<CriticalPoint>,
}

impl BandReport {
    pub fn total_width(&self, class: BandClass) -> f64 {
        self.intervals.iter().filter(|i| i.class == class).map(|i| i.width()).fold(0.0, |s, w| s + w)
    }

    pub fn class_at(&self, nu: f64) -> Option<BandClass> {
        self.intervals.iter().find(|i| i.contains(nu)).map(|i| i.class)
    }
}

/// Cosine-clustered samples on `[lo, hi]`, endpoints included.
fn samples(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| {
        let t = 0.5 * (1.0 - (PI * k as f64 / (n - 1) as f64).cos());
        if k == n - 1 { hi } else { lo + (hi - lo) * t }
    })
}

/// Bisection to near machine precision on a bracket with a sign change.
fn bisect<F: Fn(f64) -> Result<f64>>(f: &F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (mut f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo * f_hi > 0.0 {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sign changes of `f` on `[lo, hi]`, each refined by bisection.
fn zeros<F: Fn(f64) -> Result<f64>>(f: &F, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for x in samples(lo, hi, SAMPLES) {
        let v = f(x)?;
        if v == 0.0 {
            out.push(x);
            prev = None;
            continue;
        }
        if let Some((px, pv)) = prev {
            if (pv < 0.0) != (v < 0.0) {
                out.push(bisect(f, px, x)?);
            }
        }
        prev = Some((x, v));
    }
    Ok(out)
}

/// Poles and sign changes of both constitutive functions on `(0, nu_max)`, with
/// every interval between consecutive critical points classified.
pub fn band_edges(model: &EffectiveModel, nu_max: f64) -> Result<BandReport> {
    let mut poles: Vec<CriticalPoint> = model
        .mu_poles()
        .map(|nu| CriticalPoint { nu, kind: CriticalKind::MuPole })
        .chain(model.eps_poles().map(|(nu, kind)| CriticalPoint {
            nu,
            kind: if kind == crate::error::PoleKind::Coating {
                CriticalKind::Coating
            } else {
                CriticalKind::EpsPole
            },
        }))
        .filter(|p| p.nu > 0.0 && p.nu < nu_max)
        .collect();
    poles.sort_by(|x, y| x.nu.total_cmp(&y.nu));

    let mut bounds = vec![CriticalPoint { nu: 0.0, kind: CriticalKind::Origin }];
    bounds.extend(poles);
    bounds.push(CriticalPoint { nu: nu_max, kind: CriticalKind::Cutoff });

    let mut critical = Vec::new();
    for w in bounds.windows(2) {
        critical.push(w[0]);
        let lo = margin(w[0].nu, w[0].kind, 1.0);
        let hi = margin(w[1].nu, w[1].kind, -1.0);
        if lo >= hi {
            continue;
        }
        let mut inner: Vec<CriticalPoint> = zeros(&|nu| model.mu_eff(nu), lo, hi)?
            .into_iter()
            .map(|nu| CriticalPoint { nu, kind: CriticalKind::MuZero })
            .chain(
                zeros(&|nu| model.inv_eps_kk(nu), lo, hi)?
                    .into_iter()
                    .map(|nu| CriticalPoint { nu, kind: CriticalKind::EpsZero }),
            )
            .collect();
        inner.sort_by(|x, y| x.nu.total_cmp(&y.nu));
        critical.extend(inner);
    }
    critical.push(*bounds.last().unwrap());

    let mut intervals = Vec::with_capacity(critical.len());
    for w in critical.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut iv = BandInterval {
            nu_lo: lo.nu,
            nu_hi: hi.nu,
            class: BandClass::PoleAdjacent,
            lo_kind: lo.kind,
            hi_kind: hi.kind,
        };
        if let Some((a, b)) = iv.usable() {
            iv.class = model.classify(0.5 * (a + b))?.band_class;
        }
        intervals.push(iv);
    }
    Ok(BandReport { intervals, critical })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    LeadingOrder,
    Pwe,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::LeadingOrder => "leading_order",
            Source::Pwe => "pwe",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub dk: f64,
    pub nu: f64,
    pub omega_ratio: f64,
    pub branch_id: usize,
    pub band_class: BandClass,
    pub source: Source,
    /// Interval of the band report the root lies in.
    pub interval: usize,
    /// Residual above `1e-10` or root pinned at an interval boundary.
    pub flagged: bool,
}

/// Roots of `dk^2 - nu n_eff^2(nu)` on every propagating interval. Branch ids are
/// provisional (interval index); see [`trace_branches`].
pub fn solve_leading_order(model: &EffectiveModel, report: &BandReport, dk: f64) -> Result<Vec<DispersionPoint>> {
    let target = dk * dk;
    let g = |nu: f64| -> Result<f64> { Ok(target - model.dispersion_rhs(nu)?) };
    let mut out = Vec::new();
    for (idx, iv) in report.intervals.iter().enumerate() {
        if !iv.class.is_propagating() {
            continue;
        }
        let Some((lo, hi)) = iv.usable() else { continue };
        let lo = if iv.lo_kind == CriticalKind::Origin { 0.0 } else { lo };
        for nu in zeros(&g, lo, hi)? {
            let residual = g(nu)?.abs();
            let pinned = (nu == lo && iv.lo_kind != CriticalKind::Origin) || nu == hi;
            out.push(DispersionPoint {
                dk,
                nu,
                omega_ratio: nu.sqrt(),
                branch_id: idx,
                band_class: iv.class,
                source: Source::LeadingOrder,
                interval: idx,
                flagged: residual > 1e-10 || pinned,
            });
        }
    }
    Ok(out)
}

/// Leading-order points over a wavenumber grid with branch ids that respect
/// continuity: a jump larger than ten times the secant prediction starts a new
/// branch.
pub fn trace_branches(model: &EffectiveModel, report: &BandReport, dk_grid: &[f64]) -> Result<Vec<DispersionPoint>> {
    let per_dk: Vec<Vec<DispersionPoint>> = dk_grid
        .par_iter()
        .map(|&dk| solve_leading_order(model, report, dk))
        .collect::<Result<_>>()?;

    // Group by (interval, rank within interval).
    let mut groups: BTreeMap<(usize, usize), Vec<DispersionPoint>> = BTreeMap::new();
    for pts in per_dk {
        let mut rank: BTreeMap<usize, usize> = BTreeMap::new();
        for p in pts {
            let r = rank.entry(p.interval).or_insert(0);
            groups.entry((p.interval, *r)).or_default().push(p);
            *r += 1;
        }
    }

    let mut next_id = 0;
    let mut out = Vec::new();
    for (_, mut pts) in groups {
        pts.sort_by(|x, y| x.dk.total_cmp(&y.dk));
        let mut id = next_id;
        next_id += 1;
        for k in 0..pts.len() {
            if k >= 2 {
                let (p0, p1, p2) = (pts[k - 2], pts[k - 1], pts[k]);
                let slope = if p1.dk != p0.dk { (p1.nu - p0.nu) / (p1.dk - p0.dk) } else { 0.0 };
                let predicted = (slope * (p2.dk - p1.dk)).abs();
                if (p2.nu - p1.nu).abs() > 10.0 * predicted + 1e-9 {
                    id = next_id;
                    next_id += 1;
                }
            }
            pts[k].branch_id = id;
        }
        out.extend(pts);
    }
    out.sort_by(|x, y| x.dk.total_cmp(&y.dk).then(x.nu.total_cmp(&y.nu)));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub modes_kept: usize,
    pub modes_total: usize,
    pub max_shift: f64,
    pub unmatched: usize,
}

/// Shift of the leading-order roots when the smaller-|lambda| half of the
/// coupled resonances is dropped.
pub fn mode_sensitivity(model: &EffectiveModel, dk_grid: &[f64], nu_max: f64) -> Result<SensitivityReport> {
    let full_report = band_edges(model, nu_max)?;
    let full = trace_branches(model, &full_report, dk_grid)?;

    let mut reduced = model.clone();
    reduced.modes.sort_by(|x, y| y.lambda.abs().total_cmp(&x.lambda.abs()));
    reduced.modes.truncate(model.modes.len().div_ceil(2));
    let red_report = band_edges(&reduced, nu_max)?;
    let red = trace_branches(&reduced, &red_report, dk_grid)?;

    let mut max_shift: f64 = 0.0;
    let mut unmatched = 0;
    for p in &full {
        let best = red
            .iter()
            .filter(|q| q.dk == p.dk && q.band_class == p.band_class)
            .map(|q| (q.nu - p.nu).abs())
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            max_shift = max_shift.max(best);
        } else {
            unmatched += 1;
        }
    }
    Ok(SensitivityReport {
        modes_kept: reduced.modes.len(),
        modes_total: model.modes.len(),
        max_shift,
        unmatched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::DirichletSpectrum;
    use crate::model::{CellGeometry, MaterialSpec};

    fn empty() -> EffectiveModel {
        EffectiveModel {
            geometry: CellGeometry::new(0.2, 0.4).unwrap(),
            material: MaterialSpec::new(285.0).unwrap(),
            dirichlet: DirichletSpectrum { a: 0.2, modes: Vec::new(), tail_mean_sq: 0.0 },
            modes: Vec::new(),
        }
    }

    #[test]
    fn bisection_reports_bad_bracket() {
        let f = |x: f64| Ok(x * x + 1.0);
        assert!(matches!(bisect(&f, -1.0, 1.0), Err(Error::Bracket { .. })));
        let g = |x: f64| Ok(x - 0.3);
        assert!((bisect(&g, 0.0, 1.0).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn bare_mixture_has_one_band_below_coating_pole() {
        // Without resonances the coating term still flips the permittivity sign.
        let m = empty();
        let r = band_edges(&m, 0.95).unwrap();
        let first = r.intervals[0];
        assert_eq!(first.class, BandClass::DoublePositive);
        assert!(first.nu_lo == 0.0);
    }

    #[test]
    fn no_coating_gives_single_positive_band() {
        let mut m = empty();
        m.geometry.theta_h += m.geometry.theta_p;
        m.geometry.theta_p = 0.0;
        let r = band_edges(&m, 1.2).unwrap();
        assert_eq!(r.intervals[0].class, BandClass::DoublePositive);
        assert_eq!(r.intervals[0].nu_hi, 1.0);
    }

    #[test]
    fn zero_wavenumber_root_at_origin() {
        let mut m = empty();
        m.geometry.theta_h += m.geometry.theta_p;
        m.geometry.theta_p = 0.0;
        let r = band_edges(&m, 0.9).unwrap();
        let pts = solve_leading_order(&m, &r, 0.0).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].nu, 0.0);
    }

    #[test]
    fn homogeneous_medium_is_light_line() {
        let mut m = empty();
        m.geometry.theta_h = 1.0;
        m.geometry.theta_p = 0.0;
        let r = band_edges(&m, 0.9).unwrap();
        let pts = trace_branches(&m, &r, &[0.1, 0.2, 0.3]).unwrap();
        for p in &pts {
            assert!((p.nu - p.dk * p.dk).abs() < 1e-12);
            assert_eq!(p.branch_id, 0);
        }
    }
}
