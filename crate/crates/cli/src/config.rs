//! Run configuration: one human-editable TOML file describing the
//! structure, measurement geometry, parameter space, classifier and
//! refiner settings, noise model, and seeds. Every field has a default
//! except the structure and parameter space.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use scatfit_core::forward::structure::{IncidenceConfig, StructureModel};
use scatfit_core::lm::LmConfig;
use scatfit_core::materials::MaterialLibrary;
use scatfit_core::pipeline::{ParamSpec, ParameterSpace};
use scatfit_core::signature::ErrorSpec;
use scatfit_core::svm::kernel::{KernelKind, KernelSpec};
use scatfit_core::svm::smo::TrainConfig;
use scatfit_core::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub structure: StructureSection,
    #[serde(default)]
    pub incidence: IncidenceSection,
    pub space: Vec<ParamSection>,
    #[serde(default)]
    pub svm: SvmSection,
    #[serde(default)]
    pub lm: LmSection,
    #[serde(default)]
    pub errors: ErrorSection,
    #[serde(default)]
    pub seeds: SeedSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub bench: BenchSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSection {
    /// Path to the structure TOML, relative to the config file's directory.
    pub file: PathBuf,
    /// Directory of dispersion tables, relative to the config file's directory.
    pub materials_dir: PathBuf,
    /// Override of the structure's staircase slice count.
    pub slice_count: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncidenceSection {
    pub angle_deg: f64,
    pub azimuth_deg: f64,
    pub grid_start_nm: f64,
    pub grid_stop_nm: f64,
    pub grid_step_nm: f64,
    pub truncation_order: usize,
    /// When set, refinement fits on this many equally spaced grid points
    /// instead of the full grid.
    pub fit_points: Option<usize>,
}

impl Default for IncidenceSection {
    fn default() -> Self {
        Self {
            angle_deg: 65.0,
            azimuth_deg: 0.0,
            grid_start_nm: 200.0,
            grid_stop_nm: 800.0,
            grid_step_nm: 10.0,
            truncation_order: 8,
            fit_points: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSection {
    pub name: String,
    pub range: (f64, f64),
    pub subranges: usize,
    pub samples_per_subrange: usize,
    pub samples_full_range: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmSection {
    /// "polynomial" | "rbf" | "rbf-squared" | "sigmoid"
    pub kernel: String,
    pub controlling_factor: f64,
    pub k_points: usize,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            kernel: "rbf".into(),
            controlling_factor: 1.0,
            k_points: 7,
            c: t.c,
            tol: t.tol,
            max_iter: t.max_iter,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmSection {
    pub max_iterations: usize,
    pub cost_tolerance: f64,
    pub step_tolerance: f64,
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    pub fd_step: f64,
}

impl Default for LmSection {
    fn default() -> Self {
        let c = LmConfig::default();
        Self {
            max_iterations: c.max_iterations,
            cost_tolerance: c.cost_tolerance,
            step_tolerance: c.step_tolerance,
            initial_damping: c.initial_damping,
            damping_up: c.damping_up,
            damping_down: c.damping_down,
            fd_step: c.fd_step,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorSection {
    pub random_magnitude: f64,
    pub offset_magnitude: f64,
    pub seed: u64,
}

impl Default for ErrorSection {
    fn default() -> Self {
        Self {
            random_magnitude: 0.0,
            offset_magnitude: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedSection {
    pub train: u64,
    pub bench: u64,
    pub sweep: u64,
}

impl Default for SeedSection {
    fn default() -> Self {
        Self {
            train: 41,
            bench: 101,
            sweep: 211,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub n_cases: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self { n_cases: 50 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Held-out test signatures per sweep cell.
    pub n_test: usize,
    /// Training-size study: swept parameter's per-sub-range sample counts.
    pub size_steps: Vec<usize>,
    /// Noise study: offset magnitudes.
    pub offset_magnitudes: Vec<f64>,
    /// Kernel study: controlling factors per kernel family.
    pub polynomial_degrees: Vec<u32>,
    pub rbf_sigmas: Vec<f64>,
    pub sigmoid_betas: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            n_test: 100,
            size_steps: vec![2, 4, 8],
            offset_magnitudes: vec![0.0, 0.02, 0.04, 0.06, 0.08, 0.10],
            polynomial_degrees: vec![1, 3, 5],
            rbf_sigmas: vec![0.5, 1.0, 2.0],
            sigmoid_betas: vec![0.01, 1.0, 100.0],
        }
    }
}

/// Fully materialized configuration: every referenced file loaded, every
/// section converted to its engine type.
pub struct Loaded {
    pub config_path: PathBuf,
    pub config_bytes: Vec<u8>,
    pub library: MaterialLibrary,
    pub structure: StructureModel,
    pub incidence: IncidenceConfig,
    pub space: ParameterSpace,
    pub kernel: KernelSpec,
    pub svm_cfg: TrainConfig,
    pub k_points: usize,
    pub lm_cfg: LmConfig,
    pub errors: ErrorSpec,
    pub seeds: SeedSection,
    pub out_dir: PathBuf,
    pub bench: BenchSection,
    pub sweep: SweepSection,
    pub fit_points: Option<usize>,
}

pub fn parse_kernel_name(kind: &str, factor: f64) -> Result<KernelSpec> {
    let spec = match kind {
        "polynomial" => KernelSpec::polynomial(factor as u32),
        "rbf" => KernelSpec::rbf(factor),
        "rbf-squared" => KernelSpec {
            kind: KernelKind::Rbf,
            controlling_factor: factor,
            rbf_squared: true,
        },
        "sigmoid" => KernelSpec::sigmoid(factor),
        other => {
            return Err(Error::Validation(format!(
                "unknown kernel '{other}' (expected polynomial, rbf, rbf-squared, or sigmoid)"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Loaded> {
        let path = path.as_ref();
        let origin = path.display().to_string();
        let bytes =
            std::fs::read(path).map_err(|e| Error::Validation(format!("{origin}: {e}")))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|e| Error::Validation(format!("{origin}: not UTF-8: {e}")))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Validation(format!("{origin}: {e}")))?;
        cfg.materialize(path, bytes)
    }

    fn materialize(&self, path: &Path, config_bytes: Vec<u8>) -> Result<Loaded> {
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let structure_path = base.join(&self.structure.file);
        let materials_dir = base.join(&self.structure.materials_dir);
        for p in [&structure_path, &materials_dir] {
            if !p.exists() {
                return Err(Error::Validation(format!(
                    "referenced path does not exist: {}",
                    p.display()
                )));
            }
        }

        let library = MaterialLibrary::load_dir(&materials_dir)?;
        let mut structure = StructureModel::load(&structure_path)?;
        if let Some(n) = self.structure.slice_count {
            structure.slice_count = n;
        }
        // Fail before any simulation if a dispersion table is missing.
        let mut needed: Vec<&str> = vec![&structure.ambient, &structure.substrate];
        for layer in &structure.layers {
            needed.push(&layer.line_material);
            if let Some(g) = &layer.groove_material {
                needed.push(g);
            }
        }
        for name in needed {
            library.get(name)?;
        }

        let inc = &self.incidence;
        let grid =
            IncidenceConfig::regular_grid(inc.grid_start_nm, inc.grid_stop_nm, inc.grid_step_nm)?;
        let incidence =
            IncidenceConfig::new(inc.angle_deg, inc.azimuth_deg, grid, inc.truncation_order)?;

        let space = ParameterSpace::new(
            self.space
                .iter()
                .map(|p| ParamSpec {
                    name: p.name.clone(),
                    rough_range: p.range,
                    n_subranges: p.subranges,
                    samples_per_subrange: p.samples_per_subrange,
                    samples_full_range: p.samples_full_range,
                })
                .collect(),
        )?;

        let kernel = parse_kernel_name(&self.svm.kernel, self.svm.controlling_factor)?;
        let svm_cfg = TrainConfig {
            c: self.svm.c,
            tol: self.svm.tol,
            max_iter: self.svm.max_iter,
        };
        svm_cfg.validate()?;

        let lm_cfg = LmConfig {
            max_iterations: self.lm.max_iterations,
            cost_tolerance: self.lm.cost_tolerance,
            step_tolerance: self.lm.step_tolerance,
            initial_damping: self.lm.initial_damping,
            damping_up: self.lm.damping_up,
            damping_down: self.lm.damping_down,
            fd_step: self.lm.fd_step,
        };
        lm_cfg.validate()?;

        let errors = ErrorSpec {
            random_magnitude: self.errors.random_magnitude,
            offset_magnitude: self.errors.offset_magnitude,
            seed: self.errors.seed,
        };
        errors.validate()?;

        Ok(Loaded {
            config_path: path.to_path_buf(),
            config_bytes,
            library,
            structure,
            incidence,
            space,
            kernel,
            svm_cfg,
            k_points: self.svm.k_points,
            lm_cfg,
            errors,
            seeds: self.seeds.clone(),
            out_dir: base.join(&self.output.dir),
            bench: self.bench.clone(),
            sweep: self.sweep.clone(),
            fit_points: self.incidence.fit_points,
        })
    }
}

impl Loaded {
    /// The grid the refiner fits on: the full grid, or `fit_points`
    /// equally spaced points of it.
    pub fn fit_incidence(&self) -> Result<IncidenceConfig> {
        match self.fit_points {
            None => Ok(self.incidence.clone()),
            Some(k) => {
                let pts = scatfit_core::pipeline::classifier_wavelengths(
                    &self.incidence.wavelength_grid,
                    k,
                )?;
                IncidenceConfig::new(
                    self.incidence.angle_deg,
                    self.incidence.azimuth_deg,
                    pts,
                    self.incidence.truncation_order,
                )
            }
        }
    }

    /// Fit bounds: every parameter's rough range.
    pub fn bounds(&self) -> BTreeMap<String, (f64, f64)> {
        self.space
            .params
            .iter()
            .map(|p| (p.name.clone(), p.rough_range))
            .collect()
    }
}
