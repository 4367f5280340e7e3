//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::basis::{build_basis, FockBasis, TorusGrid};
use crate::error::{Error, Result};
use crate::gibbs::{solve_spectrum_with_tolerance, GibbsEnsemble, DEFAULT_EIGEN_TOLERANCE};
use crate::inversion::{invert_density, InversionOptions};
use crate::io::{
    ensure_dir, read_config, read_target_density, write_density_csv, write_density_fourier, write_json,
    write_potential, ConfigFile, InversionRecord,
};
use crate::operators::{assemble_hamiltonian, InteractionSpec, PotentialField};
use crate::verify::{check_manifest, run_suite, suite_passed, CheckReport, CheckStatus, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "torus-vrep", version, about = "Finite-temperature density inversion on the 1D torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gibbs ensemble and density of a given potential.
    Forward(CommonArgs),
    /// Potential whose Gibbs density is the target density.
    Invert(CommonArgs),
    /// Forward runs over lists of β and K.
    Sweep(CommonArgs),
    /// Run the check suite.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Inverse temperature(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Particle number N.
    #[arg(long)]
    pub particles: Option<usize>,
    /// Momentum cutoff K (orbitals p = -K..=K).
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Grid points M for density output.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol_rho: Option<f64>,
    #[arg(long)]
    pub tol_grad: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Target density (CSV `x,rho` or Fourier JSON) for `invert`.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Configuration after merging file and flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cutoff: Option<usize>,
    pub particles: Option<usize>,
    pub betas: Vec<f64>,
    pub potential: PotentialField,
    pub potential_id: String,
    pub interaction: InteractionSpec,
    pub target_density: Option<PathBuf>,
    pub grid_points: Option<usize>,
    pub tol_rho: f64,
    pub tol_grad: f64,
    pub tol_eig: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub potential_cutoff: Option<usize>,
    pub memory: Option<usize>,
    pub sweep_cutoffs: Vec<usize>,
    pub suite: SuiteConfig,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let tol = file.tolerances.clone().unwrap_or_default();
        let defaults = InversionOptions::default();
        let betas = if !args.beta.is_empty() {
            args.beta.clone()
        } else {
            file.beta.as_ref().map(|b| b.values()).unwrap_or_else(|| vec![1.0])
        };
        let (potential, potential_id) = match &file.potential {
            Some(p) if !p.is_empty() => (
                p.to_potential()?,
                p.id.clone().unwrap_or_else(|| {
                    p.file
                        .as_ref()
                        .map(|f| f.display().to_string())
                        .unwrap_or_else(|| "inline".into())
                }),
            ),
            _ => (PotentialField::zero(), "zero".into()),
        };
        let interaction = match &file.interaction {
            Some(i) => i.to_interaction()?,
            None => InteractionSpec::none(),
        };
        let seed = args.seed.or(file.seed).unwrap_or(0);
        let mut suite = file.suite.clone().unwrap_or_default();
        if let Some(s) = args.seed.or(file.seed) {
            suite.seed = s;
        }
        let cfg = RunConfig {
            cutoff: args.cutoff.or(file.cutoff),
            particles: args.particles.or(file.particles),
            betas,
            potential,
            potential_id,
            interaction,
            target_density: args.target.clone().or(file.target_density.clone()),
            grid_points: args.grid.or(file.grid_points),
            tol_rho: args.tol_rho.or(tol.rho).unwrap_or(defaults.tol_rho),
            tol_grad: args.tol_grad.or(tol.grad).unwrap_or(defaults.tol_grad),
            tol_eig: tol.eig.unwrap_or(DEFAULT_EIGEN_TOLERANCE),
            max_iter: args.max_iter.or(file.max_iter).unwrap_or(defaults.max_iter),
            seed,
            output_dir: args
                .out
                .clone()
                .or(file.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from(".")),
            potential_cutoff: file.inversion.as_ref().and_then(|i| i.potential_cutoff),
            memory: file.inversion.as_ref().and_then(|i| i.memory),
            sweep_cutoffs: file.sweep.map(|s| s.cutoffs).unwrap_or_default(),
            suite,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(Error::Config("at least one beta is required".into()));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidBeta(*b));
        }
        for (name, t) in [("tol_rho", self.tol_rho), ("tol_grad", self.tol_grad), ("tol_eig", self.tol_eig)] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {t}")));
            }
        }
        if let (Some(m), Some(k)) = (self.grid_points, self.cutoff) {
            if m < 8 * k {
                return Err(Error::Config(format!("grid must have at least 8K = {} points, got {m}", 8 * k)));
            }
        }
        if let Some(p) = &self.target_density {
            if !p.exists() {
                return Err(Error::Config(format!("target density file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    fn require(&self, value: Option<usize>, name: &str) -> Result<usize> {
        value.ok_or_else(|| Error::Config(format!("{name} is required (set it in the config or pass --{name})")))
    }

    fn basis_for(&self, cutoff: usize) -> Result<FockBasis> {
        let n = self.require(self.particles, "particles")?;
        build_basis(cutoff, n)
    }

    fn grid_for(&self, basis: &FockBasis) -> Result<TorusGrid> {
        match self.grid_points {
            Some(m) => TorusGrid::new(m),
            None => Ok(TorusGrid::for_basis(basis)),
        }
    }

    fn ensemble(&self, basis: &FockBasis, beta: f64, grid: TorusGrid) -> Result<GibbsEnsemble> {
        let h = assemble_hamiltonian(basis, &self.potential, &self.interaction)?;
        let spec = solve_spectrum_with_tolerance(&h, self.tol_eig)?;
        GibbsEnsemble::from_spectrum(basis, spec, beta, grid)
    }
}

/// Exit code for an error: input problems are usage errors, everything
/// else is a computational failure.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::EigensolverFailure { .. } | Error::Degenerate(_) => EXIT_FAILURE,
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub beta: f64,
    pub log_z: f64,
    pub omega: f64,
    pub entropy: f64,
    pub internal_energy: f64,
    pub kinetic_energy: f64,
    pub min_density: f64,
    pub density_file: String,
    pub fourier_file: String,
}

#[derive(Debug, Clone, Serialize)]
struct ForwardSummary {
    cutoff: usize,
    particles: usize,
    dimension: usize,
    potential_id: String,
    interaction: String,
    records: Vec<EnsembleSummary>,
}

fn summarize(ens: &GibbsEnsemble, density_file: String, fourier_file: String) -> EnsembleSummary {
    EnsembleSummary {
        beta: ens.beta,
        log_z: ens.log_z,
        omega: ens.omega,
        entropy: ens.entropy,
        internal_energy: ens.internal_energy,
        kinetic_energy: ens.kinetic_energy,
        min_density: ens.density.min_value(),
        density_file,
        fourier_file,
    }
}

fn output_names(betas: &[f64], index: usize) -> (String, String) {
    if betas.len() == 1 {
        ("density.csv".into(), "density_fourier.json".into())
    } else {
        (format!("density_{index}.csv"), format!("density_fourier_{index}.json"))
    }
}

pub fn cmd_forward(cfg: &RunConfig) -> Result<i32> {
    let k = cfg.require(cfg.cutoff, "cutoff")?;
    let basis = cfg.basis_for(k)?;
    let grid = cfg.grid_for(&basis)?;
    ensure_dir(&cfg.output_dir)?;
    let mut records = Vec::new();
    for (i, &beta) in cfg.betas.iter().enumerate() {
        let ens = cfg.ensemble(&basis, beta, grid)?;
        let (dens, four) = output_names(&cfg.betas, i);
        write_density_csv(&cfg.output_dir.join(&dens), &ens.density)?;
        write_density_fourier(&cfg.output_dir.join(&four), &ens.density)?;
        records.push(summarize(&ens, dens, four));
    }
    let summary = ForwardSummary {
        cutoff: k,
        particles: basis.particle_count(),
        dimension: basis.dimension(),
        potential_id: cfg.potential_id.clone(),
        interaction: cfg.interaction.label().to_string(),
        records,
    };
    write_json(&cfg.output_dir.join("summary.json"), &summary)?;
    Ok(EXIT_OK)
}

pub fn cmd_invert(cfg: &RunConfig) -> Result<i32> {
    let k = cfg.require(cfg.cutoff, "cutoff")?;
    let basis = cfg.basis_for(k)?;
    let grid = cfg.grid_for(&basis)?;
    let [beta] = cfg.betas[..] else {
        return Err(Error::Config(format!("invert takes a single beta, got {}", cfg.betas.len())));
    };
    let path = cfg
        .target_density
        .as_ref()
        .ok_or_else(|| Error::Config("invert needs a target density (target_density or --target)".into()))?;
    let target = read_target_density(path, basis.particle_count(), 2 * k, grid)?;
    if !target.is_strictly_positive() {
        return Err(Error::NotStrictlyPositive {
            minimum: target.min_value(),
        });
    }
    let opts = InversionOptions {
        tol_rho: cfg.tol_rho,
        tol_grad: cfg.tol_grad,
        max_iter: cfg.max_iter,
        potential_cutoff: cfg.potential_cutoff,
        memory: cfg.memory.unwrap_or(InversionOptions::default().memory),
        initial: None,
    };
    let result = invert_density(&target, beta, &basis, &cfg.interaction, &opts)?;
    ensure_dir(&cfg.output_dir)?;
    write_json(
        &cfg.output_dir.join("inversion.json"),
        &InversionRecord::new(&result, beta, k, basis.particle_count()),
    )?;
    write_potential(&cfg.output_dir.join("potential.toml"), &result.potential)?;
    write_density_csv(&cfg.output_dir.join("density_reproduced.csv"), &result.density)?;
    if result.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "inversion did not converge after {} iterations: density residual {:e}, gradient norm {:e}",
            result.iterations, result.density_residual, result.gradient_norm
        );
        Ok(EXIT_FAILURE)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub cutoff: usize,
    pub beta: f64,
    pub dimension: usize,
    pub log_z: f64,
    pub omega: f64,
    pub entropy: f64,
    pub internal_energy: f64,
    pub kinetic_energy: f64,
    pub min_density: f64,
    pub rho1_re: f64,
    pub rho1_im: f64,
}

/// Change of `Ω` and `|ρ̂_1|` from the previous cutoff at the same β.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub beta: f64,
    pub cutoff: usize,
    pub omega: f64,
    pub delta_omega: Option<f64>,
    pub rho1_abs: f64,
    pub delta_rho1: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct SweepReport {
    particles: usize,
    potential_id: String,
    interaction: String,
    rows: Vec<SweepRow>,
    k_convergence: Vec<ConvergenceRow>,
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<i32> {
    let cutoffs = if cfg.sweep_cutoffs.is_empty() {
        vec![cfg.require(cfg.cutoff, "cutoff")?]
    } else {
        cfg.sweep_cutoffs.clone()
    };
    let mut rows = Vec::new();
    for &k in &cutoffs {
        let basis = cfg.basis_for(k)?;
        let grid = TorusGrid::for_basis(&basis);
        for &beta in &cfg.betas {
            let ens = cfg.ensemble(&basis, beta, grid)?;
            let rho1 = ens.density.coefficient(1);
            rows.push(SweepRow {
                cutoff: k,
                beta,
                dimension: basis.dimension(),
                log_z: ens.log_z,
                omega: ens.omega,
                entropy: ens.entropy,
                internal_energy: ens.internal_energy,
                kinetic_energy: ens.kinetic_energy,
                min_density: ens.density.min_value(),
                rho1_re: rho1.re,
                rho1_im: rho1.im,
            });
        }
    }
    let mut k_convergence = Vec::new();
    for &beta in &cfg.betas {
        let mut at_beta: Vec<&SweepRow> = rows.iter().filter(|r| r.beta == beta).collect();
        at_beta.sort_by_key(|r| r.cutoff);
        let mut prev: Option<&SweepRow> = None;
        for r in at_beta {
            let abs1 = r.rho1_re.hypot(r.rho1_im);
            k_convergence.push(ConvergenceRow {
                beta,
                cutoff: r.cutoff,
                omega: r.omega,
                delta_omega: prev.map(|p| r.omega - p.omega),
                rho1_abs: abs1,
                delta_rho1: prev.map(|p| abs1 - p.rho1_re.hypot(p.rho1_im)),
            });
            prev = Some(r);
        }
    }
    ensure_dir(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::Config(format!("{}: {e}", csv_path.display())))?;
    for r in &rows {
        w.serialize(r).map_err(|e| Error::Config(format!("{}: {e}", csv_path.display())))?;
    }
    w.flush().map_err(|e| Error::Config(format!("{}: {e}", csv_path.display())))?;
    let report = SweepReport {
        particles: cfg.require(cfg.particles, "particles")?,
        potential_id: cfg.potential_id.clone(),
        interaction: cfg.interaction.label().to_string(),
        rows,
        k_convergence,
    };
    write_json(&cfg.output_dir.join("sweep.json"), &report)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
struct ManifestEntry {
    check_name: &'static str,
    statement: &'static str,
}

#[derive(Debug, Clone, Serialize)]
struct VerifyReport {
    all_passed: bool,
    failed: Vec<String>,
    manifest: Vec<ManifestEntry>,
    reports: Vec<CheckReport>,
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let reports = run_suite(&cfg.suite);
    let passed = suite_passed(&reports);
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| r.status == CheckStatus::Fail)
        .map(|r| r.check_name.clone())
        .collect();
    ensure_dir(&cfg.output_dir)?;
    let report = VerifyReport {
        all_passed: passed,
        failed: failed.clone(),
        manifest: check_manifest()
            .into_iter()
            .map(|(check_name, statement)| ManifestEntry { check_name, statement })
            .collect(),
        reports,
    };
    write_json(&cfg.output_dir.join("report.json"), &report)?;
    if passed {
        Ok(EXIT_OK)
    } else {
        let mut names = failed;
        names.dedup();
        eprintln!("failed checks: {}", names.join(", "));
        Ok(EXIT_FAILURE)
    }
}

pub fn run(cli: Cli) -> i32 {
    let (args, f): (&CommonArgs, fn(&RunConfig) -> Result<i32>) = match &cli.command {
        Command::Forward(a) => (a, cmd_forward),
        Command::Invert(a) => (a, cmd_invert),
        Command::Sweep(a) => (a, cmd_sweep),
        Command::Verify(a) => (a, cmd_verify),
    };
    let outcome = RunConfig::resolve(args).and_then(|cfg| f(&cfg));
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
