//! Feature extraction and measurement-error synthesis for Mueller
//! signatures: wavelength subsampling into flat feature vectors, the
//! signature RMS scale, and seeded random + offset error injection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::forward::mueller::{Signature, ELEMENT_ORDER};
use crate::{Error, Result};

/// A flattened SVM input: 15 normalized Mueller elements per picked
/// wavelength, wavelength-major, elements in [`ELEMENT_ORDER`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let fv = Self { values };
        fv.validate()?;
        Ok(fv)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.values.len() % 15 != 0 {
            return Err(Error::Validation(format!(
                "feature vector length {} is not a positive multiple of 15",
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "feature vector contains non-finite values".into(),
            ));
        }
        Ok(())
    }

    /// Number of wavelengths this vector was built from.
    pub fn wavelength_count(&self) -> usize {
        self.values.len() / 15
    }
}

/// Indices of `k` equally spaced picks from `len` grid points, endpoints
/// always included, nearest grid point when the spacing is not exact.
pub fn subsample_indices(len: usize, k: usize) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Validation(format!(
            "subsample needs k >= 2 wavelengths, got {k}"
        )));
    }
    if k > len {
        return Err(Error::Validation(format!(
            "cannot pick {k} wavelengths from a {len}-point grid"
        )));
    }
    Ok((0..k)
        .map(|j| (((len - 1) * j) as f64 / (k - 1) as f64).round() as usize)
        .collect())
}

/// Flattens `k` equally spaced wavelengths of `sig` into a feature vector.
pub fn subsample(sig: &Signature, k: usize) -> Result<FeatureVector> {
    sig.validate_structure()?;
    let indices = subsample_indices(sig.len(), k)?;
    let mut values = Vec::with_capacity(15 * k);
    for idx in indices {
        values.extend_from_slice(&sig.elements_at(idx));
    }
    FeatureVector::new(values)
}

/// The wavelengths a `subsample(sig, k)` call would pick.
pub fn subsample_wavelengths(sig: &Signature, k: usize) -> Result<Vec<f64>> {
    Ok(subsample_indices(sig.len(), k)?
        .into_iter()
        .map(|i| sig.wavelength_grid[i])
        .collect())
}

/// Root-mean-square of the 15 stored Mueller elements over all wavelengths.
/// This is the scale `s` that error magnitudes multiply.
pub fn signature_rms(sig: &Signature) -> Result<f64> {
    if sig.is_empty() {
        return Err(Error::Validation("signature_rms of empty signature".into()));
    }
    let mut sum = 0.0;
    for idx in 0..sig.len() {
        for x in sig.elements_at(idx) {
            sum += x * x;
        }
    }
    Ok((sum / (15 * sig.len()) as f64).sqrt())
}

/// Measurement-error model: dimensionless magnitudes relative to the
/// signature RMS, and the seed that makes a draw reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpec {
    /// Std of the i.i.d. per-element, per-wavelength Gaussian noise,
    /// as a fraction of the signature RMS.
    pub random_magnitude: f64,
    /// Std of the per-element constant offset (one draw per Mueller
    /// element, shared across wavelengths), as a fraction of the RMS.
    pub offset_magnitude: f64,
    pub seed: u64,
}

impl ErrorSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("random_magnitude", self.random_magnitude),
            ("offset_magnitude", self.offset_magnitude),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!(
                    "{name} = {v} must lie in [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Adds synthetic measurement errors to a signature: first one offset draw
/// per Mueller element (constant across wavelengths), then independent
/// random draws per element per wavelength, wavelength-major. m11 stays 1.
///
/// The noise scale is `magnitude × signature_rms(sig)`. Both magnitudes
/// zero returns the input unchanged. Output elements may slightly exceed
/// the physical |m| ≤ 1 bound, as real measurements do, so the result is
/// not re-validated against it.
pub fn inject_errors(sig: &Signature, spec: &ErrorSpec) -> Result<Signature> {
    sig.validate_structure()?;
    spec.validate()?;
    if spec.random_magnitude == 0.0 && spec.offset_magnitude == 0.0 {
        return Ok(sig.clone());
    }
    let s = signature_rms(sig)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let offset_dist = Normal::new(0.0, spec.offset_magnitude * s)
        .map_err(|e| Error::Validation(format!("offset distribution: {e}")))?;
    let random_dist = Normal::new(0.0, spec.random_magnitude * s)
        .map_err(|e| Error::Validation(format!("random distribution: {e}")))?;

    let offsets: Vec<f64> = (0..15).map(|_| offset_dist.sample(&mut rng)).collect();

    let mut mueller = sig.mueller.clone();
    for m in &mut mueller {
        for (slot, &(i, j)) in offsets.iter().zip(ELEMENT_ORDER.iter()) {
            m[i][j] += slot + random_dist.sample(&mut rng);
        }
    }
    Ok(Signature {
        wavelength_grid: sig.wavelength_grid.clone(),
        mueller,
    })
}
