//! Structure geometry: layered 1D-periodic stacks with named parameter
//! bindings, loaded from human-editable TOML files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// A geometric slot value: either a fixed length in nm or a reference to a
/// named profile parameter supplied at instantiation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Binding {
    Fixed(f64),
    Param(String),
}

impl Binding {
    fn resolve(&self, params: &BTreeMap<String, f64>) -> Result<f64> {
        match self {
            Binding::Fixed(v) => Ok(*v),
            Binding::Param(name) => params.get(name).copied().ok_or_else(|| {
                Error::Validation(format!("missing value for bound parameter '{name}'"))
            }),
        }
    }

    fn param_name(&self) -> Option<&str> {
        match self {
            Binding::Fixed(_) => None,
            Binding::Param(name) => Some(name),
        }
    }
}

/// Lateral cross-section of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LayerGeometry {
    /// Unpatterned film of the line material.
    UniformFilm,
    /// Rectangular line/space profile.
    LamellarGrating { line_width: Binding },
    /// Symmetric trapezoid, discretized into lamellar slices for the solver.
    TrapezoidGrating {
        top_width: Binding,
        bottom_width: Binding,
    },
}

/// One layer of the stack (top -> bottom ordering inside [`StructureModel`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    #[serde(flatten)]
    pub geometry: LayerGeometry,
    pub thickness: Binding,
    pub line_material: String,
    /// Material filling the grooves; irrelevant for uniform films.
    #[serde(default)]
    pub groove_material: Option<String>,
}

/// A 1D-periodic layered structure with named parameter bindings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureModel {
    pub pitch_nm: f64,
    pub ambient: String,
    pub substrate: String,
    /// Number of staircase slices used per trapezoid layer.
    #[serde(default = "default_slice_count")]
    pub slice_count: usize,
    pub layers: Vec<LayerSpec>,
}

fn default_slice_count() -> usize {
    16
}

impl StructureModel {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        let model: StructureModel = toml::from_str(text)
            .map_err(|e| Error::parse(origin, 0, format!("structure file: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Bound parameter names in order of first appearance.
    pub fn bound_parameters(&self) -> Vec<String> {
        let mut names = Vec::new();
        let mut push = |b: &Binding| {
            if let Some(n) = b.param_name() {
                if !names.iter().any(|x| x == n) {
                    names.push(n.to_string());
                }
            }
        };
        for layer in &self.layers {
            match &layer.geometry {
                LayerGeometry::UniformFilm => {}
                LayerGeometry::LamellarGrating { line_width } => push(line_width),
                LayerGeometry::TrapezoidGrating {
                    top_width,
                    bottom_width,
                } => {
                    push(top_width);
                    push(bottom_width);
                }
            }
            push(&layer.thickness);
        }
        names
    }

    /// Static validation: positive pitch, sane slice count, each parameter
    /// name bound to exactly one geometric slot.
    pub fn validate(&self) -> Result<()> {
        if !(self.pitch_nm > 0.0) {
            return Err(Error::Validation(format!(
                "pitch must be > 0, got {}",
                self.pitch_nm
            )));
        }
        if self.slice_count < 1 {
            return Err(Error::Validation("slice_count must be >= 1".into()));
        }
        let mut seen: Vec<String> = Vec::new();
        let mut check = |b: &Binding| -> Result<()> {
            if let Some(n) = b.param_name() {
                if seen.iter().any(|s| s == n) {
                    return Err(Error::Validation(format!(
                        "parameter '{n}' is bound to more than one geometric slot"
                    )));
                }
                seen.push(n.to_string());
            }
            Ok(())
        };
        for layer in &self.layers {
            match &layer.geometry {
                LayerGeometry::UniformFilm => {}
                LayerGeometry::LamellarGrating { line_width } => check(line_width)?,
                LayerGeometry::TrapezoidGrating {
                    top_width,
                    bottom_width,
                } => {
                    check(top_width)?;
                    check(bottom_width)?;
                }
            }
            check(&layer.thickness)?;
            if matches!(
                layer.geometry,
                LayerGeometry::LamellarGrating { .. } | LayerGeometry::TrapezoidGrating { .. }
            ) && layer.groove_material.is_none()
            {
                return Err(Error::Validation(
                    "patterned layers must name a groove_material".into(),
                ));
            }
        }
        Ok(())
    }

    /// Resolves every binding against `params` and validates the resulting
    /// geometry. Layers whose resolved thickness is zero vanish from the
    /// concrete stack; all retained dimensions must be positive and CDs must
    /// not exceed the pitch.
    pub fn instantiate(&self, params: &BTreeMap<String, f64>) -> Result<ConcreteStructure> {
        self.validate()?;
        let mut layers = Vec::with_capacity(self.layers.len());
        for (idx, layer) in self.layers.iter().enumerate() {
            let thickness = layer.thickness.resolve(params)?;
            if !thickness.is_finite() || thickness < 0.0 {
                return Err(Error::Validation(format!(
                    "layer {idx}: thickness {thickness} nm must be >= 0"
                )));
            }
            let cd = |b: &Binding, what: &str| -> Result<f64> {
                let v = b.resolve(params)?;
                if !v.is_finite() || v <= 0.0 || v > self.pitch_nm {
                    return Err(Error::Validation(format!(
                        "layer {idx}: {what} {v} nm must lie in (0, pitch = {} nm]",
                        self.pitch_nm
                    )));
                }
                Ok(v)
            };
            let shape = match &layer.geometry {
                LayerGeometry::UniformFilm => ConcreteShape::Film,
                LayerGeometry::LamellarGrating { line_width } => ConcreteShape::Lamellar {
                    line_width: cd(line_width, "line width")?,
                },
                LayerGeometry::TrapezoidGrating {
                    top_width,
                    bottom_width,
                } => ConcreteShape::Trapezoid {
                    top_width: cd(top_width, "top width")?,
                    bottom_width: cd(bottom_width, "bottom width")?,
                },
            };
            if thickness == 0.0 {
                continue;
            }
            layers.push(ConcreteLayer {
                thickness_nm: thickness,
                line_material: layer.line_material.clone(),
                groove_material: layer
                    .groove_material
                    .clone()
                    .unwrap_or_else(|| layer.line_material.clone()),
                shape,
            });
        }
        Ok(ConcreteStructure {
            pitch_nm: self.pitch_nm,
            ambient: self.ambient.clone(),
            substrate: self.substrate.clone(),
            slice_count: self.slice_count,
            layers,
        })
    }

    /// Content hash used to detect incompatible artifacts (e.g. a classifier
    /// bundle trained for a different structure).
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("structure serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Lateral cross-section with concrete dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum ConcreteShape {
    Film,
    Lamellar { line_width: f64 },
    Trapezoid { top_width: f64, bottom_width: f64 },
}

/// One layer with all bindings resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteLayer {
    pub thickness_nm: f64,
    pub line_material: String,
    pub groove_material: String,
    pub shape: ConcreteShape,
}

/// A structure with all bindings resolved, ready for discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteStructure {
    pub pitch_nm: f64,
    pub ambient: String,
    pub substrate: String,
    pub slice_count: usize,
    pub layers: Vec<ConcreteLayer>,
}

/// A layer that the solver can handle directly: a film or a lamellar slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatLayer {
    pub thickness_nm: f64,
    pub line_material: String,
    pub groove_material: String,
    /// `None` for a uniform film, `Some(width)` for a lamellar profile.
    pub line_width: Option<f64>,
}

/// Staircase-discretizes one trapezoid layer into `n_slices` lamellar slices
/// of equal thickness; slice j (counted from the top) takes the trapezoid
/// width evaluated at its mid-height.
pub fn slice_trapezoid(layer: &ConcreteLayer, n_slices: usize) -> Result<Vec<FlatLayer>> {
    if n_slices < 1 {
        return Err(Error::Validation("n_slices must be >= 1".into()));
    }
    let ConcreteShape::Trapezoid {
        top_width,
        bottom_width,
    } = layer.shape
    else {
        return Err(Error::Validation(
            "slice_trapezoid requires a trapezoid layer".into(),
        ));
    };
    let dt = layer.thickness_nm / n_slices as f64;
    Ok((0..n_slices)
        .map(|j| {
            let t_mid = (j as f64 + 0.5) / n_slices as f64;
            FlatLayer {
                thickness_nm: dt,
                line_material: layer.line_material.clone(),
                groove_material: layer.groove_material.clone(),
                line_width: Some(top_width + (bottom_width - top_width) * t_mid),
            }
        })
        .collect())
}

impl ConcreteStructure {
    /// Expands every trapezoid into lamellar slices; films and lamellar
    /// layers pass through unchanged.
    pub fn staircased(&self) -> Result<Vec<FlatLayer>> {
        let mut flat = Vec::new();
        for layer in &self.layers {
            match layer.shape {
                ConcreteShape::Film => flat.push(FlatLayer {
                    thickness_nm: layer.thickness_nm,
                    line_material: layer.line_material.clone(),
                    groove_material: layer.groove_material.clone(),
                    line_width: None,
                }),
                ConcreteShape::Lamellar { line_width } => flat.push(FlatLayer {
                    thickness_nm: layer.thickness_nm,
                    line_material: layer.line_material.clone(),
                    groove_material: layer.groove_material.clone(),
                    line_width: Some(line_width),
                }),
                ConcreteShape::Trapezoid { .. } => {
                    flat.extend(slice_trapezoid(layer, self.slice_count)?);
                }
            }
        }
        Ok(flat)
    }
}

/// Plane-wave illumination and solver truncation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceConfig {
    pub angle_deg: f64,
    pub azimuth_deg: f64,
    pub wavelength_grid: Vec<f64>,
    /// Retained Fourier orders are -N..=N.
    pub truncation_order: usize,
}

impl IncidenceConfig {
    pub fn new(
        angle_deg: f64,
        azimuth_deg: f64,
        wavelength_grid: Vec<f64>,
        truncation_order: usize,
    ) -> Result<Self> {
        let cfg = Self {
            angle_deg,
            azimuth_deg,
            wavelength_grid,
            truncation_order,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..90.0).contains(&self.angle_deg) {
            return Err(Error::Validation(format!(
                "angle of incidence {} deg must lie in [0, 90)",
                self.angle_deg
            )));
        }
        if self.azimuth_deg != 0.0 {
            return Err(Error::Validation(
                "only planar mounting (azimuth = 0) is supported".into(),
            ));
        }
        if self.wavelength_grid.is_empty() {
            return Err(Error::Validation("empty wavelength grid".into()));
        }
        if self.wavelength_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(
                "wavelength grid must be strictly increasing".into(),
            ));
        }
        if self.wavelength_grid.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::Validation("wavelengths must be positive".into()));
        }
        Ok(())
    }

    /// Evenly spaced grid `start..=stop` with `step` (inclusive endpoints).
    pub fn regular_grid(start_nm: f64, stop_nm: f64, step_nm: f64) -> Result<Vec<f64>> {
        if !(step_nm > 0.0) || stop_nm < start_nm {
            return Err(Error::Validation(format!(
                "bad grid spec {start_nm}..{stop_nm} step {step_nm}"
            )));
        }
        let count = ((stop_nm - start_nm) / step_nm).round() as usize + 1;
        Ok((0..count).map(|i| start_nm + i as f64 * step_nm).collect())
    }
}
