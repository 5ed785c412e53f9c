//! Electromagnetic forward model: structure geometry, rigorous coupled-wave
//! analysis, a thin-film transfer-matrix oracle, and Mueller-matrix
//! signature synthesis.
//!
//! The public entry point for spectrum generation is
//! [`simulate_signature`]: it resolves named profile parameters, staircases
//! trapezoids, solves the grating problem per wavelength for both
//! polarizations, and packs the result into a [`Signature`].

pub mod film;
pub mod mueller;
pub mod rcwa;
pub mod structure;

pub use film::film_reflection;
pub use mueller::{jones_to_mueller, Signature, ELEMENT_ORDER};
pub use rcwa::{rcwa_orders, rcwa_reflection, RcwaOrders};
pub use structure::{
    slice_trapezoid, Binding, ConcreteLayer, ConcreteShape, ConcreteStructure, FlatLayer,
    IncidenceConfig, LayerGeometry, LayerSpec, StructureModel,
};

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::materials::MaterialLibrary;
use crate::Result;

/// Linear polarization relative to the grating lines in planar mounting:
/// TE has the electric field along the lines, TM the magnetic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Te,
    Tm,
}

/// Square root on the physical branch for passive media with e^{-iωt} time
/// dependence: decaying waves get Im ≥ 0, propagating waves Re ≥ 0.
///
/// This is the principal branch with one guard: a negative-zero imaginary
/// part is normalized to +0 first, so exactly-real negative arguments
/// (lossless evanescent orders) land on +i|·| instead of the conjugate.
/// Tiny rounding-level negative imaginary parts are deliberately left
/// alone — flipping the sign there would reverse the propagation direction
/// of a nearly-real propagating mode, a far worse error than the
/// immeasurably slow growth they imply.
pub(crate) fn wave_sqrt(z: Complex64) -> Complex64 {
    Complex64::new(z.re, z.im + 0.0).sqrt()
}

/// Simulates the Mueller-matrix signature of `structure` instantiated with
/// `params`, over the wavelength grid in `incidence`.
///
/// Wavelengths are independent and evaluated in parallel; the result is
/// deterministic for fixed inputs regardless of scheduling.
pub fn simulate_signature(
    lib: &MaterialLibrary,
    model: &StructureModel,
    params: &BTreeMap<String, f64>,
    incidence: &IncidenceConfig,
) -> Result<Signature> {
    let concrete = model.instantiate(params)?;
    simulate_concrete(lib, &concrete, incidence)
}

/// [`simulate_signature`] for an already-instantiated structure.
pub fn simulate_concrete(
    lib: &MaterialLibrary,
    structure: &ConcreteStructure,
    incidence: &IncidenceConfig,
) -> Result<Signature> {
    incidence.validate()?;
    let mueller = incidence
        .wavelength_grid
        .par_iter()
        .map(|&lambda| {
            let r_te = rcwa_reflection(lib, structure, incidence, lambda, Polarization::Te)?;
            let r_tm = rcwa_reflection(lib, structure, incidence, lambda, Polarization::Tm)?;
            jones_to_mueller(r_tm, r_te)
        })
        .collect::<Result<Vec<_>>>()?;
    Signature::new(incidence.wavelength_grid.clone(), mueller)
}
