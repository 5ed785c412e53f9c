//! Coherent thin-film reflection by the Abelès 2x2 characteristic-matrix
//! method. Serves as an independent oracle for the coupled-wave solver in
//! the unpatterned limit; the two implementations share no propagation code.

use num_complex::Complex64;

use super::{wave_sqrt, Polarization};
use crate::materials::MaterialLibrary;
use crate::{Error, Result};

/// Tangential-field admittance of a medium for the given polarization,
/// in units of k0: TE uses gamma, TM uses gamma / eps (Hy formulation, so
/// the returned reflection coefficient follows the ellipsometric r_p
/// convention: r_p = r_s at grazing, r_p = +(n2-n1)/(n2+n1) at normal
/// incidence for the bare interface).
fn admittance(eps: Complex64, kx: Complex64, pol: Polarization) -> (Complex64, Complex64) {
    let gamma = wave_sqrt(eps - kx * kx);
    let y = match pol {
        Polarization::Te => gamma,
        Polarization::Tm => gamma / eps,
    };
    (gamma, y)
}

/// Complex reflection coefficient of a stack of uniform films between
/// `ambient` and `substrate` at `angle_deg` incidence.
///
/// `layers` are `(material, thickness_nm)` pairs ordered top -> bottom.
/// The per-layer matrices are rescaled by exp(i*delta) (a pure overall
/// factor that cancels in the reflection ratio), so evanescent or strongly
/// absorbing layers never overflow.
pub fn film_reflection(
    lib: &MaterialLibrary,
    layers: &[(String, f64)],
    ambient: &str,
    substrate: &str,
    angle_deg: f64,
    lambda_nm: f64,
    pol: Polarization,
) -> Result<Complex64> {
    if !(0.0..90.0).contains(&angle_deg) {
        return Err(Error::Validation(format!(
            "angle of incidence {angle_deg} deg must lie in [0, 90)"
        )));
    }
    let k0 = 2.0 * std::f64::consts::PI / lambda_nm;
    let n_a = lib.refractive_index(ambient, lambda_nm)?;
    let eps_a = n_a * n_a;
    let eps_s = lib.permittivity(substrate, lambda_nm)?;
    let kx = n_a * angle_deg.to_radians().sin();

    let (_, y_a) = admittance(eps_a, kx, pol);
    let (_, y_s) = admittance(eps_s, kx, pol);

    // Characteristic matrix product, each factor rescaled to keep |phi| <= 1.
    let one = Complex64::new(1.0, 0.0);
    let (mut m11, mut m12, mut m21, mut m22) =
        (one, Complex64::default(), Complex64::default(), one);
    for (material, thickness_nm) in layers {
        if !(*thickness_nm >= 0.0) {
            return Err(Error::Validation(format!(
                "film thickness {thickness_nm} nm must be >= 0"
            )));
        }
        let eps = lib.permittivity(material, lambda_nm)?;
        let (gamma, y) = admittance(eps, kx, pol);
        let phi = (Complex64::i() * gamma * k0 * *thickness_nm).exp();
        let phi2 = phi * phi;
        // Characteristic matrix [[cos d, -i sin d / y], [-i y sin d, cos d]]
        // rescaled by 2 e^{i d}: the thick-layer limit (phi -> 0) must
        // reduce to the single ambient/film interface, which fixes the sign
        // of the off-diagonal entries for this time convention.
        let a11 = one + phi2;
        let a12 = (one - phi2) / y;
        let a21 = y * (one - phi2);
        let (n11, n12) = (m11 * a11 + m12 * a21, m11 * a12 + m12 * a11);
        let (n21, n22) = (m21 * a11 + m22 * a21, m21 * a12 + m22 * a11);
        m11 = n11;
        m12 = n12;
        m21 = n21;
        m22 = n22;
    }

    let b = m11 + m12 * y_s;
    let c = m21 + m22 * y_s;
    let denom = y_a * b + c;
    if denom.norm() == 0.0 {
        return Err(Error::Numerical("degenerate film stack".into()));
    }
    Ok((y_a * b - c) / denom)
}
