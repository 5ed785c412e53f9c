//! Conversion of TE/TM reflection coefficients to normalized Mueller
//! matrices, and the `Signature` spectrum type with its text format.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::{Error, Result};

/// Converts a pair of complex reflection coefficients into the normalized
/// 4×4 Mueller matrix of a non-depolarizing, planar-mount sample.
///
/// With the ellipsometric ratio tanΨ·e^{iΔ} = r_tm / r_te, the result is the
/// block-diagonal matrix [[1, -N, 0, 0], [-N, 1, 0, 0], [0, 0, C, S],
/// [0, 0, -S, C]] where N = cos2Ψ, C = sin2Ψ cosΔ, S = sin2Ψ sinΔ. The
/// N, C, S entries are computed directly from the amplitudes (never through
/// the ratio), so a vanishing r_te is harmless; only r_te = r_tm = 0 is
/// rejected. N² + C² + S² = 1 holds identically.
pub fn jones_to_mueller(r_tm: Complex64, r_te: Complex64) -> Result<[[f64; 4]; 4]> {
    let te2 = r_te.norm_sqr();
    let tm2 = r_tm.norm_sqr();
    let d = te2 + tm2;
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Numerical(format!(
            "cannot normalize Mueller matrix: |r_te|^2 + |r_tm|^2 = {d}"
        )));
    }
    let n = (te2 - tm2) / d;
    let cross = r_tm * r_te.conj();
    let c = 2.0 * cross.re / d;
    let s = 2.0 * cross.im / d;
    Ok([
        [1.0, -n, 0.0, 0.0],
        [-n, 1.0, 0.0, 0.0],
        [0.0, 0.0, c, s],
        [0.0, 0.0, -s, c],
    ])
}

/// Row-major order of the 15 stored Mueller elements (m11 is omitted
/// because signatures are normalized to m11 = 1).
pub const ELEMENT_ORDER: [(usize, usize); 15] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 0),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 0),
    (2, 1),
    (2, 2),
    (2, 3),
    (3, 0),
    (3, 1),
    (3, 2),
    (3, 3),
];

const HEADER: &str =
    "lambda_nm m12 m13 m14 m21 m22 m23 m24 m31 m32 m33 m34 m41 m42 m43 m44";

/// A Mueller-matrix spectrum: one normalized 4×4 matrix per wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    /// Strictly increasing wavelengths in nm.
    pub wavelength_grid: Vec<f64>,
    /// One matrix per wavelength, normalized so m11 = 1.
    pub mueller: Vec<[[f64; 4]; 4]>,
}

impl Signature {
    /// Builds a signature after structural checks only: measured data may
    /// carry noise that pushes elements past the physical |m| ≤ 1 bound,
    /// which [`Signature::validate`] would reject.
    pub fn new(wavelength_grid: Vec<f64>, mueller: Vec<[[f64; 4]; 4]>) -> Result<Self> {
        let sig = Self {
            wavelength_grid,
            mueller,
        };
        sig.validate_structure()?;
        Ok(sig)
    }

    pub fn len(&self) -> usize {
        self.wavelength_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelength_grid.is_empty()
    }

    /// The 15 stored elements at wavelength index `idx`, in [`ELEMENT_ORDER`].
    pub fn elements_at(&self, idx: usize) -> [f64; 15] {
        let m = &self.mueller[idx];
        let mut out = [0.0; 15];
        for (slot, &(i, j)) in out.iter_mut().zip(ELEMENT_ORDER.iter()) {
            *slot = m[i][j];
        }
        out
    }

    /// Restriction to the given wavelength points, which must each appear
    /// exactly (bit-for-bit) in this signature's grid — used to fit on a
    /// reduced grid without re-interpolating measured data.
    pub fn restricted_to(&self, wavelengths: &[f64]) -> Result<Self> {
        let mut grid = Vec::with_capacity(wavelengths.len());
        let mut mueller = Vec::with_capacity(wavelengths.len());
        for &w in wavelengths {
            let idx = self
                .wavelength_grid
                .iter()
                .position(|&g| g == w)
                .ok_or_else(|| {
                    Error::Incompatible(format!("signature grid is missing {w} nm"))
                })?;
            grid.push(w);
            mueller.push(self.mueller[idx]);
        }
        let out = Self {
            wavelength_grid: grid,
            mueller,
        };
        out.validate_structure()?;
        Ok(out)
    }

    /// Structural checks plus the physical bound |m_ij| ≤ 1 + ε. Simulated
    /// signatures must satisfy this; noisy measured ones need only
    /// [`Signature::validate_structure`].
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        for (idx, m) in self.mueller.iter().enumerate() {
            for row in m {
                for &x in row {
                    if x.abs() > 1.0 + 1e-9 {
                        return Err(Error::Validation(format!(
                            "Mueller element {x} out of range at wavelength index {idx}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Structural checks: matching lengths, a strictly increasing positive
    /// grid, m11 = 1 exactly, and all elements finite.
    pub fn validate_structure(&self) -> Result<()> {
        if self.wavelength_grid.is_empty() {
            return Err(Error::Validation("empty signature".into()));
        }
        if self.wavelength_grid.len() != self.mueller.len() {
            return Err(Error::Validation(format!(
                "signature has {} wavelengths but {} matrices",
                self.wavelength_grid.len(),
                self.mueller.len()
            )));
        }
        if self
            .wavelength_grid
            .iter()
            .any(|w| !w.is_finite() || *w <= 0.0)
        {
            return Err(Error::Validation(
                "signature wavelengths must be positive and finite".into(),
            ));
        }
        if self.wavelength_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(
                "signature wavelengths must be strictly increasing".into(),
            ));
        }
        for (idx, m) in self.mueller.iter().enumerate() {
            if m[0][0] != 1.0 {
                return Err(Error::Validation(format!(
                    "m11 = {} at wavelength index {idx}; signatures must be normalized",
                    m[0][0]
                )));
            }
            for row in m {
                for &x in row {
                    if !x.is_finite() {
                        return Err(Error::Validation(format!(
                            "non-finite Mueller element at wavelength index {idx}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes to the text format: a header row, then one row per
    /// wavelength with the wavelength and the 15 normalized elements,
    /// written with shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 + self.len() * 200);
        out.push_str(HEADER);
        out.push('\n');
        for (idx, lambda) in self.wavelength_grid.iter().enumerate() {
            let _ = write!(out, "{lambda}");
            for x in self.elements_at(idx) {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format produced by [`Signature::to_text`]. Lines
    /// starting with `#` and blank lines are ignored; the first data line
    /// must be the header row.
    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut wavelengths = Vec::new();
        let mut mueller = Vec::new();
        let mut seen_header = false;
        for (line_idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !seen_header {
                let fields: Vec<&str> = line.split_whitespace().collect();
                let expected: Vec<&str> = HEADER.split_whitespace().collect();
                if fields != expected {
                    return Err(Error::parse(
                        origin,
                        line_idx + 1,
                        format!("expected header '{HEADER}'"),
                    ));
                }
                seen_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 16 {
                return Err(Error::parse(
                    origin,
                    line_idx + 1,
                    format!("expected 16 fields, found {}", fields.len()),
                ));
            }
            let mut values = [0.0f64; 16];
            for (slot, field) in values.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| {
                    Error::parse(origin, line_idx + 1, format!("bad number '{field}'"))
                })?;
            }
            wavelengths.push(values[0]);
            let mut m = [[0.0; 4]; 4];
            m[0][0] = 1.0;
            for (&(i, j), &x) in ELEMENT_ORDER.iter().zip(&values[1..]) {
                m[i][j] = x;
            }
            mueller.push(m);
        }
        if !seen_header {
            return Err(Error::parse(origin, 1, "missing header row".to_string()));
        }
        Self::new(wavelengths, mueller)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_text(&text, &path.display().to_string())
    }
}
