use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use rodband_core::bloch::dispersion_points;
use rodband_core::dirichlet::dirichlet_spectrum;
use rodband_core::dispersion::{band_edges, trace_branches};
use rodband_core::electrostatics::resonances;
use rodband_core::{
    validate_config, BandClass, BandReport, BlochRecord, Config, DispersionPoint, EffectiveModel,
    ElectrostaticMode, Error, LatticeSumTable, RawConfig,
};

mod format;

use format::{num, Table};

#[derive(Parser)]
#[command(name = "rodband", version, about = "Coated-rod crystal resonances, effective media and band structure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Square-lattice sums S_n.
    LatticeSums(Common),
    /// Electrostatic resonances and their coupling coefficients.
    Resonances(Common),
    /// Dirichlet spectrum of the core.
    Dirichlet(Common),
    /// Effective permeability and inverse permittivity on a frequency grid.
    Effective(Common),
    /// Leading-order dispersion branches.
    Dispersion(Common),
    /// Plane-wave reference solutions seeded from the leading-order branches.
    Bloch(Common),
    /// Leading-order and plane-wave points side by side.
    Compare(Common),
    /// Band intervals and their classes.
    Bands(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, env = "RODBAND_THREADS")]
    threads: Option<usize>,
    /// Take the configuration from an earlier run manifest.
    #[arg(long)]
    seed_from: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::LatticeSums(_) => "lattice-sums",
            Command::Resonances(_) => "resonances",
            Command::Dirichlet(_) => "dirichlet",
            Command::Effective(_) => "effective",
            Command::Dispersion(_) => "dispersion",
            Command::Bloch(_) => "bloch",
            Command::Compare(_) => "compare",
            Command::Bands(_) => "bands",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::LatticeSums(c)
            | Command::Resonances(c)
            | Command::Dirichlet(c)
            | Command::Effective(c)
            | Command::Dispersion(c)
            | Command::Bloch(c)
            | Command::Compare(c)
            | Command::Bands(c) => c,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    config: RawConfig,
    truncation: BTreeMap<String, usize>,
    runs: BTreeMap<String, RunEntry>,
}

#[derive(Serialize, Deserialize)]
struct RunEntry {
    timestamp: String,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct BandEntry {
    nu_lo: f64,
    nu_hi: f64,
    class: BandClass,
}

const MANIFEST: &str = "manifest.json";

fn load_config(common: &Common) -> Result<Config> {
    let raw = match (&common.seed_from, &common.config) {
        (Some(m), _) => {
            let text = fs::read_to_string(m).map_err(|e| Error::Config(format!("{}: {e}", m.display())))?;
            let manifest: Manifest = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("manifest {}: {e}", m.display())))?;
            manifest.config
        }
        (None, Some(c)) => {
            let text = fs::read_to_string(c).map_err(|e| Error::Config(format!("{}: {e}", c.display())))?;
            RawConfig::from_toml(&text)?
        }
        (None, None) => return Err(Error::Config("either --config or --seed-from is required".into()).into()),
    };
    Ok(validate_config(&raw)?)
}

fn threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

struct Pipeline {
    cfg: Config,
    sums: Option<LatticeSumTable>,
}

impl Pipeline {
    fn sums(&mut self) -> Result<&LatticeSumTable> {
        if self.sums.is_none() {
            let t = &self.cfg.truncation;
            // resonances() checks convergence at N + 5.
            self.sums = Some(LatticeSumTable::new(2 * (t.n_multipole + 5), t.lattice_radius)?);
        }
        Ok(self.sums.as_ref().unwrap())
    }

    fn modes(&mut self, khat: [f64; 2]) -> Result<Vec<ElectrostaticMode>> {
        let (g, n, conv) = (self.cfg.geometry, self.cfg.truncation.n_multipole, self.cfg.coupling);
        Ok(resonances(&g, self.sums()?, n, khat, conv)?)
    }

    /// The square lattice makes the inverse permittivity isotropic: the sine
    /// partners of each mode carry the `khat_y` share, so the coupling is taken
    /// along x whatever the propagation direction.
    fn model(&mut self) -> Result<EffectiveModel> {
        let modes = self.modes([1.0, 0.0])?;
        let c = &self.cfg;
        let dir = dirichlet_spectrum(c.geometry.a, c.truncation.n_dirichlet)?;
        Ok(EffectiveModel::new(c.geometry, c.material, dir, &modes))
    }

    fn bands(&mut self) -> Result<(EffectiveModel, BandReport)> {
        let m = self.model()?;
        let r = band_edges(&m, self.cfg.nu_max)?;
        Ok((m, r))
    }

    fn leading(&mut self) -> Result<Vec<DispersionPoint>> {
        let (m, r) = self.bands()?;
        Ok(trace_branches(&m, &r, &self.cfg.propagation.dk_grid)?)
    }

    fn pwe(&mut self) -> Result<(Vec<DispersionPoint>, Vec<BlochRecord>)> {
        let seeds = self.leading()?;
        let c = &self.cfg;
        let recs = dispersion_points(
            &seeds,
            c.propagation.khat,
            &c.geometry,
            &c.material,
            c.truncation.g_max,
            c.solver.tol,
            c.solver.max_iter,
        )?;
        Ok((seeds, recs))
    }
}

/// Frequency samples for the `effective` table, uniform in `omega_ratio`.
const EFFECTIVE_SAMPLES: usize = 1200;

fn run(cmd: &Command) -> Result<Vec<PathBuf>> {
    let common = cmd.common();
    let cfg = load_config(common)?;
    threads(common.threads)?;
    let out = common.out.as_path();
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut p = Pipeline { cfg: cfg.clone(), sums: None };
    let mut written = Vec::new();
    let mut save = |name: &str, body: String| -> Result<()> {
        let path = out.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(())
    };

    match cmd {
        Command::LatticeSums(_) => {
            let n_max = 2 * cfg.truncation.n_multipole;
            let sums = p.sums()?;
            let mut t = Table::new(&["n", "S_n"]);
            for n in 3..=n_max {
                t.row(vec![n.to_string(), num(sums.get(n))]);
            }
            save("lattice_sums.csv", t.finish())?;
        }
        Command::Resonances(_) => {
            let modes = p.modes(cfg.propagation.khat)?;
            let mut t = Table::new(&["rank", "lambda", "converged", "alpha1", "alpha2"]);
            for (i, m) in modes.iter().enumerate() {
                t.row(vec![(i + 1).to_string(), num(m.lambda), m.converged.to_string(), num(m.alpha1), num(m.alpha2)]);
            }
            save("resonances.csv", t.finish())?;
        }
        Command::Dirichlet(_) => {
            let s = dirichlet_spectrum(cfg.geometry.a, cfg.truncation.n_dirichlet)?;
            let mut t = Table::new(&["n", "j0n", "mu_n", "mean_sq"]);
            for m in &s.modes {
                t.row(vec![m.index.to_string(), num(m.zero), num(m.mu), num(m.mean_sq)]);
            }
            save("dirichlet.csv", t.finish())?;
        }
        Command::Effective(_) => {
            let m = p.model()?;
            let mut t = Table::new(&["omega_ratio", "nu", "mu_eff", "inv_eps_kk", "n_eff_sq", "band_class"]);
            let w_max = cfg.nu_max.sqrt();
            for k in 0..=EFFECTIVE_SAMPLES {
                let w = w_max * k as f64 / EFFECTIVE_SAMPLES as f64;
                let nu = w * w;
                match m.classify(nu) {
                    Ok(r) => t.row(vec![
                        num(w),
                        num(nu),
                        num(r.mu_eff),
                        num(r.inv_eps_kk),
                        num(r.n_eff_sq),
                        r.band_class.to_string(),
                    ]),
                    Err(Error::PoleProximity { .. }) => {
                        let nan = num(f64::NAN);
                        t.row(vec![num(w), num(nu), nan.clone(), nan.clone(), nan, BandClass::PoleAdjacent.to_string()])
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            save("effective.csv", t.finish())?;
        }
        Command::Dispersion(_) => {
            let pts = p.leading()?;
            let mut t = Table::new(&["dk", "omega_ratio", "branch_id", "band_class", "source"]);
            for q in &pts {
                t.row(vec![
                    num(q.dk),
                    num(q.omega_ratio),
                    q.branch_id.to_string(),
                    q.band_class.to_string(),
                    q.source.as_str().into(),
                ]);
            }
            save("dispersion.csv", t.finish())?;
        }
        Command::Bloch(_) => {
            let (_, recs) = p.pwe()?;
            let mut t = Table::new(&["dk", "omega_ratio", "branch_id", "iterations", "residual", "converged"]);
            for r in &recs {
                let (w, it, res) = match &r.solution {
                    Some(s) => (s.nu.sqrt(), s.iterations, s.residual),
                    None => (f64::NAN, r.attempts, f64::NAN),
                };
                t.row(vec![
                    num(r.seed.dk),
                    num(w),
                    r.seed.branch_id.to_string(),
                    it.to_string(),
                    num(res),
                    r.solution.is_some().to_string(),
                ]);
            }
            save("bloch.csv", t.finish())?;
        }
        Command::Compare(_) => {
            let (_, recs) = p.pwe()?;
            let mut t = Table::new(&[
                "dk",
                "branch_id",
                "band_class",
                "omega_ratio_leading",
                "omega_ratio_pwe",
                "nu_leading",
                "nu_pwe",
                "rel_dev_omega",
                "rel_dev_nu",
                "converged",
            ]);
            let mut worst: f64 = 0.0;
            for r in &recs {
                let s = &r.seed;
                let (w, nu) = r.solution.as_ref().map_or((f64::NAN, f64::NAN), |x| (x.nu.sqrt(), x.nu));
                let dev_w = (w - s.omega_ratio).abs() / s.omega_ratio;
                let dev_nu = (nu - s.nu).abs() / s.nu;
                if r.solution.is_some() {
                    worst = worst.max(dev_nu);
                }
                t.row(vec![
                    num(s.dk),
                    s.branch_id.to_string(),
                    s.band_class.to_string(),
                    num(s.omega_ratio),
                    num(w),
                    num(s.nu),
                    num(nu),
                    num(dev_w),
                    num(dev_nu),
                    r.solution.is_some().to_string(),
                ]);
            }
            save("compare.csv", t.finish())?;
            eprintln!("max relative deviation in nu over converged points: {}", num(worst));
        }
        Command::Bands(_) => {
            let (_, r) = p.bands()?;
            let mut t = Table::new(&["nu_lo", "nu_hi", "class"]);
            for iv in &r.intervals {
                t.row(vec![num(iv.nu_lo), num(iv.nu_hi), iv.class.to_string()]);
            }
            save("bands.csv", t.finish())?;
            let json: Vec<BandEntry> =
                r.intervals.iter().map(|iv| BandEntry { nu_lo: iv.nu_lo, nu_hi: iv.nu_hi, class: iv.class }).collect();
            save("bands.json", serde_json::to_string_pretty(&json)? + "\n")?;
        }
    }

    write_manifest(out, &cfg, cmd.name(), &written)?;
    Ok(written)
}

fn write_manifest(out: &Path, cfg: &Config, command: &str, written: &[PathBuf]) -> Result<()> {
    let path = out.join(MANIFEST);
    let raw = cfg.to_raw();
    let t = &cfg.truncation;
    let truncation = BTreeMap::from([
        ("N_multipole".to_string(), t.n_multipole),
        ("N_dirichlet".to_string(), t.n_dirichlet),
        ("lattice_radius".to_string(), t.lattice_radius),
        ("G_max".to_string(), t.g_max),
    ]);
    // Keep earlier runs only if they came from the same configuration.
    let mut runs = fs::read_to_string(&path)
        .ok()
        .and_then(|s| serde_json::from_str::<Manifest>(&s).ok())
        .filter(|m| m.config == raw)
        .map(|m| m.runs)
        .unwrap_or_default();
    let timestamp = time::OffsetDateTime::now_utc().format(&time::format_description::well_known::Rfc3339)?;
    runs.insert(
        command.to_string(),
        RunEntry { timestamp, outputs: written.iter().map(|p| p.display().to_string()).collect() },
    );
    let manifest = Manifest {
        tool: "rodband".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: raw,
        truncation,
        runs,
    };
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// 0 ok, 1 configuration, 2 numerical failure, 3 geometry.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Geometry { .. }) => 3,
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
