//! Configuration files and data files.
//!
//! * run configuration: TOML
//! * grid densities: CSV with header `x,rho`, values in shortest round-trip
//!   decimal form
//! * Fourier densities: JSON `{"particle_count", "cutoff", "coefficients": [[k, re, im], ...]}`
//! * potentials: TOML `f = [[k, re, im], ...]`, `g = [[k, re, im], ...]`
//! * records: JSON

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::TorusGrid;
use crate::density::DensityProfile;
use crate::error::{Error, Result};
use crate::inversion::InversionResult;
use crate::operators::{potential_from_parts, InteractionSpec, PotentialField};
use crate::verify::SuiteConfig;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    One(f64),
    Many(Vec<f64>),
}

impl BetaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            BetaSpec::One(b) => vec![*b],
            BetaSpec::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesFile {
    pub rho: Option<f64>,
    pub grad: Option<f64>,
    pub eig: Option<f64>,
}

/// `[potential]` table: inline `f`/`g` triples `[k, re, im]` or a file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    #[serde(default)]
    pub f: Vec<(usize, f64, f64)>,
    #[serde(default)]
    pub g: Vec<(usize, f64, f64)>,
    pub file: Option<PathBuf>,
    pub id: Option<String>,
}

/// `[interaction]` table: a preset (`none`, `cosine`, `contact`) with
/// strength and cutoff, explicit `w = [[k, w_k], ...]`, or a file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionFile {
    pub preset: Option<String>,
    pub strength: Option<f64>,
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub w: Vec<(usize, f64)>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionFile {
    pub potential_cutoff: Option<usize>,
    pub memory: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(default)]
    pub cutoffs: Vec<usize>,
}

/// Raw contents of a configuration file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub cutoff: Option<usize>,
    pub particles: Option<usize>,
    pub beta: Option<BetaSpec>,
    pub grid_points: Option<usize>,
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub target_density: Option<PathBuf>,
    pub tolerances: Option<TolerancesFile>,
    pub potential: Option<PotentialFile>,
    pub interaction: Option<InteractionFile>,
    pub inversion: Option<InversionFile>,
    pub sweep: Option<SweepFile>,
    pub suite: Option<SuiteConfig>,
}

/// Reads a configuration file and makes its relative paths absolute with
/// respect to the file's directory.
pub fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg: ConfigFile = toml::from_str(&text).map_err(|e| Error::parse(path, e.message()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    if let Some(p) = cfg.output_dir.as_mut() {
        resolve(p);
    }
    if let Some(p) = cfg.target_density.as_mut() {
        resolve(p);
    }
    if let Some(p) = cfg.potential.as_mut().and_then(|p| p.file.as_mut()) {
        resolve(p);
    }
    if let Some(p) = cfg.interaction.as_mut().and_then(|p| p.file.as_mut()) {
        resolve(p);
    }
    Ok(cfg)
}

fn triples_to_coeffs(triples: &[(usize, f64, f64)], what: &str) -> Result<Vec<Complex64>> {
    let n = triples.iter().map(|t| t.0).max().unwrap_or(0);
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    for &(k, re, im) in triples {
        if k == 0 && (re != 0.0 || im != 0.0) {
            return Err(Error::Config(format!(
                "{what}: the k = 0 mode is a constant shift and is fixed to zero"
            )));
        }
        out[k] += Complex64::new(re, im);
    }
    Ok(out)
}

impl PotentialFile {
    pub fn is_empty(&self) -> bool {
        self.f.is_empty() && self.g.is_empty() && self.file.is_none()
    }

    pub fn to_potential(&self) -> Result<PotentialField> {
        if let Some(path) = &self.file {
            if !self.f.is_empty() || !self.g.is_empty() {
                return Err(Error::Config(
                    "potential: give either inline coefficients or a file, not both".into(),
                ));
            }
            return read_potential(path);
        }
        let f = triples_to_coeffs(&self.f, "potential f")?;
        let g = triples_to_coeffs(&self.g, "potential g")?;
        if self.g.is_empty() {
            return PotentialField::from_coefficients(f.into_iter().skip(1).collect());
        }
        potential_from_parts(&f, &g)
    }
}

pub fn read_potential(path: &Path) -> Result<PotentialField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: PotentialFile = toml::from_str(&text).map_err(|e| Error::parse(path, e.message()))?;
    if file.file.is_some() {
        return Err(Error::parse(path, "a potential file cannot reference another file"));
    }
    file.to_potential().map_err(|e| Error::parse(path, e))
}

pub fn potential_to_toml(v: &PotentialField) -> String {
    let mut s = String::from("# v(x) = sum_k v_k exp(i 2 pi k x), v_{-k} = conj(v_k), v_0 = 0\nf = [\n");
    for (i, c) in v.coefficients().iter().enumerate() {
        s.push_str(&format!("    [{}, {:?}, {:?}],\n", i + 1, c.re, c.im));
    }
    s.push_str("]\n");
    s
}

pub fn write_potential(path: &Path, v: &PotentialField) -> Result<()> {
    fs::write(path, potential_to_toml(v)).map_err(|e| Error::io(path, e))
}

impl InteractionFile {
    pub fn to_interaction(&self) -> Result<InteractionSpec> {
        if let Some(path) = &self.file {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let inner: InteractionFile = toml::from_str(&text).map_err(|e| Error::parse(path, e.message()))?;
            if inner.file.is_some() {
                return Err(Error::parse(path, "an interaction file cannot reference another file"));
            }
            return inner.to_interaction().map_err(|e| Error::parse(path, e));
        }
        if !self.w.is_empty() {
            if self.preset.is_some() {
                return Err(Error::Config("interaction: give either a preset or explicit w, not both".into()));
            }
            let n = self.w.iter().map(|t| t.0).max().unwrap_or(0);
            let mut coeffs = vec![0.0; n + 1];
            for &(k, x) in &self.w {
                coeffs[k] += x;
            }
            return InteractionSpec::from_coefficients(coeffs);
        }
        let strength = self.strength.unwrap_or(0.0);
        match self.preset.as_deref().unwrap_or("none") {
            "none" => Ok(InteractionSpec::none()),
            "cosine" => InteractionSpec::cosine(strength),
            "contact" => {
                let cutoff = self
                    .cutoff
                    .ok_or_else(|| Error::Config("interaction preset 'contact' needs a cutoff".into()))?;
                InteractionSpec::contact(strength, cutoff)
            }
            other => Err(Error::Config(format!(
                "unknown interaction preset '{other}' (expected none, cosine or contact)"
            ))),
        }
    }
}

/// Writes `x,rho` rows for the density's grid.
pub fn write_density_csv(path: &Path, density: &DensityProfile) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
    w.write_record(["x", "rho"]).map_err(|e| Error::parse(path, e))?;
    let grid = density.grid();
    for (x, rho) in grid.points().zip(density.grid_values()) {
        w.write_record([x.to_string(), rho.to_string()])
            .map_err(|e| Error::parse(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads `x,rho` samples on the uniform grid `x_m = m/M` and projects them
/// onto modes `0..=max_mode` with the trapezoidal rule.
pub fn read_density_csv(path: &Path, particles: usize, max_mode: usize) -> Result<DensityProfile> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    let headers = r.headers().map_err(|e| Error::parse(path, e))?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "rho" {
        return Err(Error::parse(path, "expected header 'x,rho'"));
    }
    let mut xs = Vec::new();
    let mut samples = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(path, format!("row {}: {e}", line + 2)))
        };
        xs.push(parse(&rec[0])?);
        samples.push(parse(&rec[1])?);
    }
    let m = samples.len();
    let grid = TorusGrid::new(m).map_err(|_| Error::parse(path, "no density samples"))?;
    for (i, x) in xs.iter().enumerate() {
        if (x - grid.point(i)).abs() > 1e-12 {
            return Err(Error::parse(
                path,
                format!("x values must be the uniform grid m/{m}; row {} has x = {x}", i + 2),
            ));
        }
    }
    // checked on the raw samples: projection can lift an exact zero to roundoff
    if let Some(&minimum) = samples.iter().min_by(|a, b| a.total_cmp(b)) {
        if minimum.is_nan() || minimum <= 0.0 {
            return Err(Error::NotStrictlyPositive { minimum });
        }
    }
    DensityProfile::from_grid_samples(particles, &samples, max_mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierDensityRecord {
    pub particle_count: usize,
    pub cutoff: usize,
    /// `[k, Re ρ̂_k, Im ρ̂_k]` for `k = 0..=cutoff`.
    pub coefficients: Vec<(usize, f64, f64)>,
}

pub fn density_to_fourier_record(density: &DensityProfile) -> FourierDensityRecord {
    FourierDensityRecord {
        particle_count: density.particle_count(),
        cutoff: density.cutoff(),
        coefficients: density
            .fourier()
            .iter()
            .enumerate()
            .map(|(k, c)| (k, c.re, c.im))
            .collect(),
    }
}

pub fn write_density_fourier(path: &Path, density: &DensityProfile) -> Result<()> {
    write_json(path, &density_to_fourier_record(density))
}

pub fn read_density_fourier(path: &Path, grid: TorusGrid) -> Result<DensityProfile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rec: FourierDensityRecord = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    let n = rec.coefficients.iter().map(|t| t.0).max().unwrap_or(0);
    let mut fourier = vec![Complex64::new(0.0, 0.0); n + 1];
    for &(k, re, im) in &rec.coefficients {
        fourier[k] = Complex64::new(re, im);
    }
    DensityProfile::new(rec.particle_count, fourier, grid).map_err(|e| Error::parse(path, e))
}

/// Reads a target density, choosing the format from the extension
/// (`.json` Fourier coefficients, anything else CSV samples).
pub fn read_target_density(path: &Path, particles: usize, max_mode: usize, grid: TorusGrid) -> Result<DensityProfile> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "target density file not found"),
        ));
    }
    let d = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => read_density_fourier(path, grid)?,
        _ => read_density_csv(path, particles, max_mode)?.with_grid(grid),
    };
    if d.particle_count() != particles {
        return Err(Error::parse(
            path,
            format!("density is for {} particles, configuration has {particles}", d.particle_count()),
        ));
    }
    Ok(d)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub iteration: usize,
    pub value: f64,
    pub density_residual: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionRecord {
    pub beta: f64,
    pub cutoff: usize,
    pub particles: usize,
    pub potential_cutoff: usize,
    pub converged: bool,
    pub iterations: usize,
    pub f_value: f64,
    pub density_residual: f64,
    pub gradient_norm: f64,
    /// `[k, Re v̂_k, Im v̂_k]`.
    pub potential: Vec<(usize, f64, f64)>,
    pub history: Vec<IterationRow>,
}

impl InversionRecord {
    pub fn new(result: &InversionResult, beta: f64, cutoff: usize, particles: usize) -> Self {
        InversionRecord {
            beta,
            cutoff,
            particles,
            potential_cutoff: result.potential.cutoff(),
            converged: result.converged,
            iterations: result.iterations,
            f_value: result.f_value,
            density_residual: result.density_residual,
            gradient_norm: result.gradient_norm,
            potential: result
                .potential
                .coefficients()
                .iter()
                .enumerate()
                .map(|(i, c)| (i + 1, c.re, c.im))
                .collect(),
            history: result
                .history
                .iter()
                .map(|h| IterationRow {
                    iteration: h.iteration,
                    value: h.value,
                    density_residual: h.density_residual,
                    gradient_norm: h.gradient_norm,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let grid = TorusGrid::new(32).unwrap();
        let d = DensityProfile::new(
            2,
            vec![Complex64::new(2.0, 0.0), Complex64::new(0.3, -0.1), Complex64::new(0.05, 0.02)],
            grid,
        )
        .unwrap();
        write_density_csv(&path, &d).unwrap();
        let mut r = csv::Reader::from_path(&path).unwrap();
        let back: Vec<f64> = r.records().map(|x| x.unwrap()[1].parse().unwrap()).collect();
        assert_eq!(back, d.grid_values());
        let projected = read_density_csv(&path, 2, 4).unwrap();
        assert!(projected.l2_distance(&d) < 1e-14);
    }

    #[test]
    fn fourier_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let grid = TorusGrid::new(16).unwrap();
        let d = DensityProfile::new(1, vec![Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.1)], grid).unwrap();
        write_density_fourier(&path, &d).unwrap();
        assert_eq!(read_density_fourier(&path, grid).unwrap(), d);
    }

    #[test]
    fn potential_toml_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.toml");
        let v = PotentialField::from_coefficients(vec![Complex64::new(0.1, -0.7), Complex64::new(1e-17, 3.0)]).unwrap();
        write_potential(&path, &v).unwrap();
        assert_eq!(read_potential(&path).unwrap().coefficients(), v.coefficients());
    }

    #[test]
    fn inline_potential_parts() {
        let p = PotentialFile {
            f: vec![(1, 0.5, 0.0)],
            g: vec![(1, 1.0, 0.0)],
            ..Default::default()
        };
        let v = p.to_potential().unwrap();
        assert!((v.coefficient(1) - Complex64::new(0.5, 2.0 * std::f64::consts::PI)).norm() < 1e-15);
        let bad = PotentialFile {
            f: vec![(0, 1.0, 0.0)],
            ..Default::default()
        };
        assert!(bad.to_potential().is_err());
    }

    #[test]
    fn config_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "cutoff = 2\nparticles = 1\nbeta = [0.5, 1.0]\ntarget_density = \"rho.csv\"\n[interaction]\npreset = \"cosine\"\nstrength = 0.3\n",
        )
        .unwrap();
        let cfg = read_config(&path).unwrap();
        assert_eq!(cfg.target_density.unwrap(), dir.path().join("rho.csv"));
        assert_eq!(cfg.beta.unwrap().values(), vec![0.5, 1.0]);
        assert_eq!(cfg.interaction.unwrap().to_interaction().unwrap().coefficient(1), 0.3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "cutof = 2\n").unwrap();
        assert!(matches!(read_config(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn unknown_preset_is_rejected() {
        let f = InteractionFile {
            preset: Some("yukawa".into()),
            ..Default::default()
        };
        assert!(matches!(f.to_interaction(), Err(Error::Config(_))));
    }
}
