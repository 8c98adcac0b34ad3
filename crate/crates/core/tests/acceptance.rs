//! One PASS/FAIL line per acceptance criterion. A FAIL is reported, not
//! asserted: some criteria are known to fail and are analysed elsewhere.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::*;
use rodband_core::bloch::{disk_transform, dispersion_points};
use rodband_core::dirichlet::dirichlet_spectrum;
use rodband_core::dispersion::{band_edges, trace_branches, BandReport, CriticalKind};
use rodband_core::effective::{energy_flow, BandClass, EffectiveModel};
use rodband_core::electrostatics::{eigenvalues, resonances, ElectrostaticMode};
use rodband_core::lattice::direct_sum;
use rodband_core::specfun::bessel_zeros;
use rodband_core::{CellGeometry, CouplingConvention, LatticeSumTable, MaterialSpec};

const EPS_R: f64 = 285.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sig_match(x: f64, y: f64, digits: i32) -> bool {
    (x - y).abs() <= 0.5 * 10f64.powi(1 - digits) * y.abs()
}

struct Cell {
    geom: CellGeometry,
    modes: Vec<ElectrostaticMode>,
    model: EffectiveModel,
    report: BandReport,
}

fn cell(a: f64, sums: &LatticeSumTable) -> Cell {
    let geom = CellGeometry::new(a, 0.4).unwrap();
    let modes = resonances(&geom, sums, 20, [1.0, 0.0], CouplingConvention::Scaled).unwrap();
    let model = EffectiveModel::new(geom, MaterialSpec::new(EPS_R).unwrap(), dirichlet_spectrum(a, 500).unwrap(), &modes);
    let report = band_edges(&model, 1.2).unwrap();
    Cell { geom, modes, model, report }
}

fn table_regression() -> Outcome {
    let t0 = Instant::now();
    let sums = LatticeSumTable::new(50, 400).unwrap();
    let g = CellGeometry::new(0.2, 0.4).unwrap();
    let modes = resonances(&g, &sums, 20, [1.0, 0.0], CouplingConvention::Scaled).unwrap();
    let elapsed = t0.elapsed();
    let expected = [
        3.5080e-1, 1.5379e-2, 9.7557e-4, 6.1031e-5, 3.8147e-6, 2.3842e-7, 1.4901e-8, -2.0285e-3, -5.5339e-3,
        -1.5014e-2, -4.4538e-2, -4.7947e-2,
    ];
    let mut missing = Vec::new();
    for e in expected {
        let hit = modes.iter().any(|m| m.converged && sig_match(m.lambda, e, 4));
        if !hit {
            missing.push(e);
        }
    }
    let ok = missing.is_empty() && elapsed < Duration::from_secs(10);
    outcome(ok, format!("{} of 12 matched, missing {missing:?}, {:.2?}", 12 - missing.len(), elapsed))
}

fn truncation_stability(sums: &LatticeSumTable) -> Outcome {
    // Each order-15 eigenvalue above 1e-4 must persist at order 20. Modes that
    // first appear at the higher order have nothing to compare against.
    let g = CellGeometry::new(0.2, 0.4).unwrap();
    let n20 = eigenvalues(&g, sums, 20, CouplingConvention::Scaled).unwrap();
    let n15 = eigenvalues(&g, sums, 15, CouplingConvention::Scaled).unwrap();
    let big: Vec<f64> = n15.iter().copied().filter(|l| l.abs() > 1e-4).collect();
    let mut worst: f64 = 0.0;
    let mut ok = !big.is_empty();
    for &l in &big {
        let near = n20.iter().copied().min_by(|x, y| (x - l).abs().total_cmp(&(y - l).abs())).unwrap();
        worst = worst.max((near - l).abs() / l.abs());
        ok &= sig_match(near, l, 5);
    }
    let new_modes = n20.iter().filter(|l| l.abs() > 1e-4).count() - big.len();
    outcome(
        ok,
        format!("{} eigenvalues above 1e-4, worst relative change {worst:.1e}, {new_modes} new at order 20", big.len()),
    )
}

/// Square partial sums at several radii, extrapolated in the radius.
fn brute_force(n: usize) -> f64 {
    let m = [100usize, 200, 400];
    let s: Vec<f64> = m.iter().map(|&h| direct_sum(n, h)).collect();
    // Tail ~ M^(2-n): one Richardson step on the two largest.
    let r = 2f64.powi(n as i32 - 2);
    (r * s[2] - s[1]) / (r - 1.0)
}

fn lattice_sums(sums: &LatticeSumTable) -> Outcome {
    let (s4, s8) = (sums.get(4), sums.get(8));
    let (b4, b8) = (brute_force(4), brute_force(8));
    let mut worst_null: f64 = 0.0;
    for n in (3..=40).filter(|n| n % 4 != 0) {
        worst_null = worst_null.max(direct_sum(n, 400).abs());
    }
    let ok = (s4 - 3.15121).abs() < 1e-3
        && (s8 - 4.25577).abs() < 1e-3
        && (s4 - b4).abs() < 1e-3
        && (s8 - b8).abs() < 1e-3
        && worst_null < 1e-9;
    outcome(ok, format!("S4 {s4:.6} (brute {b4:.6}), S8 {s8:.6} (brute {b8:.6}), max null {worst_null:.1e}"))
}

fn constitutive(cells: &[Cell]) -> Outcome {
    let z = bessel_zeros(0, 500).unwrap().zeros;
    let head: f64 = z.iter().map(|j| 1.0 / (j * j)).sum();
    let x: f64 = 500.75;
    let tail = (1.0 / x + 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x.powi(3))) / (PI * PI);
    let sum_rule = (head + tail - 0.25).abs();
    let mut ok = sum_rule < 1e-6;
    let mut detail = format!("sum rule error {sum_rule:.1e}");
    for c in cells {
        let mu0 = c.model.mu_eff(0.0).unwrap();
        let bessel: f64 = c.modes.iter().filter(|m| m.converged).map(|m| (m.alpha1 + m.alpha2).powi(2)).sum();
        let bound = c.geom.theta_h + c.geom.theta_p;
        ok &= (mu0 - 1.0).abs() < 1e-8 && bessel <= bound;
        detail += &format!("; a={}: mu(0)-1 {:.1e}, coupling {bessel:.4} <= {bound:.4}", c.geom.a, mu0 - 1.0);
    }
    outcome(ok, detail)
}

fn pole_placement(c: &Cell) -> Outcome {
    let j01 = bessel_zeros(0, 1).unwrap().zeros[0];
    let mu_pole = (j01 / c.geom.a).powi(2) / EPS_R;
    let lambda1 = c.modes.iter().find(|m| m.converged && m.couples()).unwrap().lambda;
    let eps_pole = lambda1 + 0.5;
    let nearest = |kind: CriticalKind, target: f64| {
        c.report
            .critical
            .iter()
            .filter(|p| p.kind == kind)
            .map(|p| (p.nu - target).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let (dm, de) = (nearest(CriticalKind::MuPole, mu_pole), nearest(CriticalKind::EpsPole, eps_pole));
    outcome(
        dm < 1e-6 && de < 1e-6 && (mu_pole - 0.50730).abs() < 1e-5 && (eps_pole - 0.85080).abs() < 1e-5,
        format!("mu pole {mu_pole:.6} (off {dm:.1e}), eps pole {eps_pole:.6} (off {de:.1e})"),
    )
}

fn pwe_agreement(cells: &[Cell]) -> Outcome {
    let grid: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
    let t0 = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for c in cells {
        let seeds = trace_branches(&c.model, &c.report, &grid).unwrap();
        let recs = dispersion_points(&seeds, [1.0, 0.0], &c.geom, &c.model.material, 12, 1e-10, 100).unwrap();
        let mut worst: f64 = 0.0;
        let mut converged = 0;
        let mut acoustic = [f64::NAN; 2];
        for r in &recs {
            let Some(s) = &r.solution else { continue };
            converged += 1;
            let dev = (s.nu - r.seed.nu).abs() / r.seed.nu;
            worst = worst.max(dev);
            if r.seed.interval == 0 && r.seed.branch_id == 0 {
                if (r.seed.dk - 0.1).abs() < 1e-12 {
                    acoustic[0] = dev;
                } else if (r.seed.dk - 0.5).abs() < 1e-12 {
                    acoustic[1] = dev;
                }
            }
        }
        let trend = acoustic[0] < acoustic[1];
        ok &= worst <= 0.10 && trend;
        detail += &format!(
            "a={}: {converged}/{} converged, max dev {worst:.3}, acoustic dev {:.3} at 0.1 vs {:.3} at 0.5; ",
            c.geom.a,
            recs.len(),
            acoustic[0],
            acoustic[1]
        );
    }
    let elapsed = t0.elapsed();
    ok &= elapsed < Duration::from_secs(600);
    outcome(ok, format!("{detail}{elapsed:.1?}"))
}

fn backward_waves(cells: &[Cell]) -> Outcome {
    let mut ok = true;
    let mut checked = [0usize; 2];
    for c in cells {
        for iv in c.report.intervals.iter().filter(|iv| iv.class.is_propagating()) {
            let Some((lo, hi)) = iv.usable() else { continue };
            for k in 1..50 {
                let nu = lo + (hi - lo) * k as f64 / 50.0;
                let flow = energy_flow(&c.model.classify(nu).unwrap()).unwrap();
                let dng = iv.class == BandClass::DoubleNegative;
                ok &= flow.antiparallel == dng;
                checked[dng as usize] += 1;
            }
        }
    }
    outcome(ok, format!("{} double-positive and {} double-negative samples", checked[0], checked[1]))
}

fn geometry_trend(cells: &[Cell]) -> Outcome {
    let thick = cells[0].report.total_width(BandClass::DoubleNegative);
    let thin = cells[1].report.total_width(BandClass::DoubleNegative);
    outcome(thin > thick, format!("double-negative width a=0.15: {thin:.6}, a=0.2: {thick:.6}"))
}

fn oracles(sums: &LatticeSumTable) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (a, b) in [(0.2, 0.4), (0.15, 0.4), (0.25, 0.35), (0.1, 0.3)] {
        let g = CellGeometry::new(a, b).unwrap();
        let khat = [0.3f64.cos(), 0.3f64.sin()];
        let modes = resonances(&g, sums, 20, khat, CouplingConvention::Scaled).unwrap();
        for m in modes.iter().filter(|m| m.couples() && m.alpha2.abs() > 1e-10) {
            let p = coating_integral(&m.normalized(), &g);
            worst = worst.max(rel(khat[0] * p[0] + khat[1] * p[1], m.alpha2));
            count += 1;
        }
    }
    let big = LatticeSumTable::new(240, 400).unwrap();
    let mut next = xorshift(0x2545f4914f6cdd1d);
    let mut unit = move || (next() % 2_000_001) as f64 / 1_000_000.0 - 1.0;
    for case in 0..20 {
        let b = if case % 2 == 0 { 0.4 } else { 0.3 };
        let g = CellGeometry::new(0.5 * b, b).unwrap();
        let mut d = vec![0.0; 110];
        for l in (1..=5).step_by(2) {
            d[l - 1] = unit() * b.powi(l as i32) / l as f64;
        }
        let c = periodic_regular(&d, &big);
        let h = host_integral(&host_field(c.clone(), d.clone()), &g);
        worst = worst.max(rel(h[0], -PI * (c[0] * b * b + d[0])));
        count += 1;
    }
    let mut next = xorshift(0x9e3779b97f4a7c15);
    for _ in 0..20 {
        let g = [(next() % 13) as i32 - 6, (next() % 13) as i32 - 6];
        let c = 0.05 + 0.45 * (next() % 1000) as f64 / 1000.0;
        let closed = disk_transform(c, g).unwrap();
        worst = worst.max((closed - disk_quadrature(c, g)).abs() / closed.abs().max(1e-6));
        count += 1;
    }
    outcome(count >= 60 && worst < 1e-4, format!("{count} comparisons, worst relative {worst:.1e}"))
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let sums = LatticeSumTable::new(50, 400).unwrap();
    let cells = [cell(0.2, &sums), cell(0.15, &sums)];
    let results = [
        ("table regression", table_regression()),
        ("truncation stability", truncation_stability(&sums)),
        ("lattice sums", lattice_sums(&sums)),
        ("constitutive sanity", constitutive(&cells)),
        ("pole placement", pole_placement(&cells[0])),
        ("plane-wave agreement", pwe_agreement(&cells)),
        ("backward waves", backward_waves(&cells)),
        ("geometry trend", geometry_trend(&cells)),
        ("quadrature oracles", oracles(&sums)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("{} {}: {name} ({})", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += !o.pass as usize;
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
}
