//! Tabulated complex refractive indices n + ik with linear interpolation.
//!
//! Tables are ingested from plain-text files (`# comment` lines, then
//! `wavelength_nm n k` rows) and are immutable afterwards, so they can be
//! shared freely across worker threads. Interpolation outside the tabulated
//! range is a hard error, never a silent clamp: extrapolated optical
//! constants corrupt fits near the range edges in ways that are very hard to
//! diagnose downstream.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use crate::{Error, Result};

/// One material's dispersion samples, strictly increasing in wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    material_name: String,
    /// `(wavelength_nm, n, k)` rows.
    samples: Vec<(f64, f64, f64)>,
}

impl DispersionTable {
    /// Builds a table from raw samples, enforcing the type invariants:
    /// at least two rows, strictly increasing wavelengths, finite values,
    /// n > 0 and k >= 0 (passive media).
    pub fn new(material_name: impl Into<String>, samples: Vec<(f64, f64, f64)>) -> Result<Self> {
        let material_name = material_name.into();
        if samples.len() < 2 {
            return Err(Error::Validation(format!(
                "dispersion table '{material_name}' needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        for (i, &(w, n, k)) in samples.iter().enumerate() {
            if !(w.is_finite() && n.is_finite() && k.is_finite()) {
                return Err(Error::Validation(format!(
                    "dispersion table '{material_name}' row {i}: non-finite value"
                )));
            }
            if w <= 0.0 {
                return Err(Error::Validation(format!(
                    "dispersion table '{material_name}' row {i}: wavelength {w} nm must be > 0"
                )));
            }
            if n <= 0.0 {
                return Err(Error::Validation(format!(
                    "dispersion table '{material_name}' row {i}: n = {n} must be > 0"
                )));
            }
            if k < 0.0 {
                return Err(Error::Validation(format!(
                    "dispersion table '{material_name}' row {i}: k = {k} must be >= 0"
                )));
            }
            if i > 0 && w <= samples[i - 1].0 {
                return Err(Error::Validation(format!(
                    "dispersion table '{material_name}' row {i}: wavelengths must be strictly \
                     increasing ({} nm after {} nm)",
                    w,
                    samples[i - 1].0
                )));
            }
        }
        Ok(Self {
            material_name,
            samples,
        })
    }

    /// Parses the text format: `#` comments and blank lines are skipped,
    /// every other line is `wavelength_nm n k`.
    pub fn from_text(material_name: impl Into<String>, text: &str, origin: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    origin,
                    idx + 1,
                    format!("expected 3 fields `wavelength_nm n k`, got {}", fields.len()),
                ));
            }
            let mut vals = [0.0f64; 3];
            for (slot, field) in vals.iter_mut().zip(&fields) {
                *slot = field.parse::<f64>().map_err(|e| {
                    Error::parse(origin, idx + 1, format!("bad number '{field}': {e}"))
                })?;
            }
            samples.push((vals[0], vals[1], vals[2]));
        }
        Self::new(material_name, samples)
    }

    /// Loads a table from a file; the material name is the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Validation(format!("bad dispersion path {}", path.display())))?
            .to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_text(name, &text, &path.display().to_string())
    }

    pub fn material_name(&self) -> &str {
        &self.material_name
    }

    pub fn samples(&self) -> &[(f64, f64, f64)] {
        &self.samples
    }

    /// Tabulated wavelength range `[min_nm, max_nm]`.
    pub fn wavelength_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Complex refractive index n + ik at `lambda_nm`, by linear
    /// interpolation of n and k independently between bracketing samples.
    /// Wavelengths outside the tabulated range are an error.
    pub fn refractive_index(&self, lambda_nm: f64) -> Result<Complex64> {
        let (lo, hi) = self.wavelength_range();
        if !lambda_nm.is_finite() || lambda_nm < lo || lambda_nm > hi {
            return Err(Error::WavelengthOutOfRange {
                material: self.material_name.clone(),
                lambda_nm,
                min_nm: lo,
                max_nm: hi,
            });
        }
        // partition_point returns the first index with wavelength >= lambda.
        let idx = self.samples.partition_point(|&(w, _, _)| w < lambda_nm);
        let (w1, n1, k1) = self.samples[idx.min(self.samples.len() - 1)];
        if w1 == lambda_nm {
            return Ok(Complex64::new(n1, k1));
        }
        let (w0, n0, k0) = self.samples[idx - 1];
        let t = (lambda_nm - w0) / (w1 - w0);
        Ok(Complex64::new(n0 + t * (n1 - n0), k0 + t * (k1 - k0)))
    }

    /// Relative complex permittivity ε = (n + ik)² at `lambda_nm`.
    pub fn permittivity(&self, lambda_nm: f64) -> Result<Complex64> {
        let nk = self.refractive_index(lambda_nm)?;
        Ok(nk * nk)
    }
}

/// A named collection of dispersion tables, loaded once and shared.
#[derive(Debug, Clone, Default)]
pub struct MaterialLibrary {
    tables: BTreeMap<String, DispersionTable>,
}

impl MaterialLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads every `*.nk` file in `dir` as one material named by file stem.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let entries =
            std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let mut lib = Self::new();
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "nk"))
            .collect();
        paths.sort();
        for path in paths {
            lib.insert(DispersionTable::load(&path)?)?;
        }
        if lib.tables.is_empty() {
            return Err(Error::Validation(format!(
                "no *.nk dispersion files found in {}",
                dir.display()
            )));
        }
        Ok(lib)
    }

    pub fn insert(&mut self, table: DispersionTable) -> Result<()> {
        let name = table.material_name().to_string();
        if self.tables.contains_key(&name) {
            return Err(Error::Validation(format!("duplicate material '{name}'")));
        }
        self.tables.insert(name, table);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&DispersionTable> {
        self.tables.get(name).ok_or_else(|| {
            Error::Validation(format!(
                "unknown material '{name}' (available: {})",
                self.tables.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn refractive_index(&self, name: &str, lambda_nm: f64) -> Result<Complex64> {
        self.get(name)?.refractive_index(lambda_nm)
    }

    pub fn permittivity(&self, name: &str, lambda_nm: f64) -> Result<Complex64> {
        self.get(name)?.permittivity(lambda_nm)
    }

    pub fn material_names(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(|s| s.as_str())
    }
}
