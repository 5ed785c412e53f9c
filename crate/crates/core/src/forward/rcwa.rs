//! Rigorous coupled-wave analysis for 1D-periodic stacks in planar mounting
//! (incidence plane perpendicular to the grating lines, azimuth 0, so TE and
//! TM decouple).
//!
//! Per layer the field is expanded over Fourier orders -N..=N. Patterned
//! layers lead to a dense eigenproblem built from the Toeplitz matrix of the
//! permittivity coefficients; TM additionally uses the Toeplitz matrix of
//! the inverse permittivity with the inverse factorization rule, which
//! restores fast convergence for discontinuous profiles. Layers are joined
//! by a scattering-matrix recursion that only ever exponentiates decaying
//! phases, so thick or strongly evanescent layers cannot overflow.
//!
//! Conventions: time dependence e^{-i omega t}, plane waves e^{+i k r},
//! passive media have k >= 0 in n + ik. TM amplitudes are the magnetic-field
//! Fourier coefficients, which makes the returned specular coefficient follow
//! the ellipsometric r_p convention (single interface: r_p = (n2 cos t1 -
//! n1 cos t2) / (n2 cos t1 + n1 cos t2)).

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse};
use num_complex::Complex64;

use super::structure::{ConcreteStructure, FlatLayer, IncidenceConfig};
use super::{wave_sqrt, Polarization};
use crate::materials::MaterialLibrary;
use crate::{Error, Result};

type C = Complex64;
type CMat = Array2<C>;
type CVec = Array1<C>;

/// Zero-order reflection coefficient for one wavelength and polarization.
pub fn rcwa_reflection(
    lib: &MaterialLibrary,
    structure: &ConcreteStructure,
    incidence: &IncidenceConfig,
    lambda_nm: f64,
    pol: Polarization,
) -> Result<Complex64> {
    let orders = rcwa_orders(lib, structure, incidence, lambda_nm, pol)?;
    Ok(orders.specular_reflection())
}

/// Full order-resolved solution at one wavelength and polarization.
#[derive(Debug, Clone)]
pub struct RcwaOrders {
    /// Diffraction order indices, -N..=N.
    pub orders: Vec<i32>,
    /// Complex reflected amplitudes per order (ambient side).
    pub r: Vec<Complex64>,
    /// Complex transmitted amplitudes per order (substrate side).
    pub t: Vec<Complex64>,
    /// Reflected diffraction efficiencies (zero for evanescent orders).
    pub de_reflected: Vec<f64>,
    /// Transmitted diffraction efficiencies (zero for evanescent orders).
    pub de_transmitted: Vec<f64>,
}

impl RcwaOrders {
    pub fn specular_reflection(&self) -> Complex64 {
        self.r[self.orders.len() / 2]
    }

    /// Total reflected + transmitted efficiency; equals 1 for lossless
    /// structures (energy conservation).
    pub fn total_efficiency(&self) -> f64 {
        self.de_reflected.iter().sum::<f64>() + self.de_transmitted.iter().sum::<f64>()
    }
}

/// Per-wavelength material resolution of one flat layer.
enum ResolvedSlice {
    Homogeneous { eps: C, thickness_nm: f64 },
    Lamellar {
        eps_line: C,
        eps_groove: C,
        fill: f64,
        thickness_nm: f64,
    },
}

fn resolve_slices(
    lib: &MaterialLibrary,
    flat: &[FlatLayer],
    pitch_nm: f64,
    lambda_nm: f64,
) -> Result<Vec<ResolvedSlice>> {
    flat.iter()
        .map(|layer| {
            let eps_line = lib.permittivity(&layer.line_material, lambda_nm)?;
            Ok(match layer.line_width {
                None => ResolvedSlice::Homogeneous {
                    eps: eps_line,
                    thickness_nm: layer.thickness_nm,
                },
                Some(width) => ResolvedSlice::Lamellar {
                    eps_line,
                    eps_groove: lib.permittivity(&layer.groove_material, lambda_nm)?,
                    fill: width / pitch_nm,
                    thickness_nm: layer.thickness_nm,
                },
            })
        })
        .collect()
}

/// Fourier coefficients c_h (h = -max_h..=max_h) of a centered lamellar
/// profile taking `v_line` on a fraction `fill` of the period and
/// `v_groove` elsewhere.
fn lamellar_coefficients(v_line: C, v_groove: C, fill: f64, max_h: usize) -> Vec<C> {
    let contrast = v_line - v_groove;
    (-(max_h as i64)..=max_h as i64)
        .map(|h| {
            if h == 0 {
                v_groove + contrast * fill
            } else {
                let ph = std::f64::consts::PI * h as f64;
                contrast * (ph * fill).sin() / ph
            }
        })
        .collect()
}

/// Toeplitz matrix T[m][n] = c_{m-n} from coefficients indexed -max_h..=max_h.
fn toeplitz(coeffs: &[C], size: usize) -> CMat {
    let max_h = (coeffs.len() - 1) / 2;
    Array2::from_shape_fn((size, size), |(m, n)| {
        coeffs[(m as i64 - n as i64 + max_h as i64) as usize]
    })
}

/// Modal basis of one layer: field eigenvectors W, tangential-field matrix V,
/// modal propagation constants gamma (units of k0), and the phase factors
/// across the layer thickness.
struct Modes {
    w: CMat,
    v: CMat,
    /// exp(i gamma k0 d) per mode; d = 0 for the half-infinite media.
    phase: CVec,
}

fn homogeneous_modes(eps: C, kx: &[f64], pol: Polarization, k0d: f64) -> Modes {
    let m = kx.len();
    let gamma: CVec = kx
        .iter()
        .map(|&kx_m| wave_sqrt(eps - C::new(kx_m * kx_m, 0.0)))
        .collect();
    let mut v = Array2::zeros((m, m));
    for i in 0..m {
        v[[i, i]] = match pol {
            Polarization::Te => gamma[i],
            Polarization::Tm => gamma[i] / eps,
        };
    }
    let phase = gamma.mapv(|g| (C::i() * g * k0d).exp());
    Modes {
        w: Array2::eye(m),
        v,
        phase,
    }
}

fn lamellar_modes(
    eps_line: C,
    eps_groove: C,
    fill: f64,
    kx: &[f64],
    pol: Polarization,
    k0d: f64,
) -> Result<Modes> {
    let m = kx.len();
    let max_h = m - 1;
    let e_coeffs = lamellar_coefficients(eps_line, eps_groove, fill, max_h);
    let e = toeplitz(&e_coeffs, m);

    let mat = match pol {
        Polarization::Te => {
            // d^2 S / dz'^2 = -(E - Kx^2) S
            let mut mat = e;
            for i in 0..m {
                mat[[i, i]] -= C::new(kx[i] * kx[i], 0.0);
            }
            mat
        }
        Polarization::Tm => {
            // d^2 U / dz'^2 = -A^{-1} (I - Kx E^{-1} Kx) U with A the
            // Toeplitz matrix of the *inverse* permittivity (inverse rule).
            let a_coeffs =
                lamellar_coefficients(eps_line.inv(), eps_groove.inv(), fill, max_h);
            let a = toeplitz(&a_coeffs, m);
            let e_inv = e
                .inv()
                .map_err(|e| Error::Numerical(format!("permittivity Toeplitz inversion: {e}")))?;
            let mut p = Array2::zeros((m, m));
            for i in 0..m {
                for j in 0..m {
                    p[[i, j]] = -C::new(kx[i], 0.0) * e_inv[[i, j]] * C::new(kx[j], 0.0);
                }
                p[[i, i]] += 1.0;
            }
            let a_inv = a.inv().map_err(|e| {
                Error::Numerical(format!("inverse-permittivity Toeplitz inversion: {e}"))
            })?;
            let mat = a_inv.dot(&p);
            // V needs the Toeplitz A itself; stash it by recomputing below.
            return finish_tm_modes(mat, a, k0d);
        }
    };

    let (vals, w) = mat
        .eig()
        .map_err(|e| Error::Numerical(format!("layer eigenproblem: {e}")))?;
    let gamma = vals.mapv(wave_sqrt);
    // V = W diag(gamma)
    let mut v = w.clone();
    for (j, g) in gamma.iter().enumerate() {
        v.column_mut(j).mapv_inplace(|x| x * *g);
    }
    let phase = gamma.mapv(|g| (C::i() * g * k0d).exp());
    Ok(Modes { w, v, phase })
}

fn finish_tm_modes(mat: CMat, a_toeplitz: CMat, k0d: f64) -> Result<Modes> {
    let (vals, w) = mat
        .eig()
        .map_err(|e| Error::Numerical(format!("layer eigenproblem: {e}")))?;
    let gamma = vals.mapv(wave_sqrt);
    // Tangential E is proportional to A dU/dz', so V = A W diag(gamma).
    let mut v = a_toeplitz.dot(&w);
    for (j, g) in gamma.iter().enumerate() {
        v.column_mut(j).mapv_inplace(|x| x * *g);
    }
    let phase = gamma.mapv(|g| (C::i() * g * k0d).exp());
    Ok(Modes { w, v, phase })
}

/// Scattering matrix blocks: [c_below+; c_above-] = S [c_above+; c_below-].
struct SMatrix {
    pp: CMat,
    pm: CMat,
    mp: CMat,
    mm: CMat,
}

impl SMatrix {
    fn identity(m: usize) -> Self {
        Self {
            pp: Array2::eye(m),
            pm: Array2::zeros((m, m)),
            mp: Array2::zeros((m, m)),
            mm: Array2::eye(m),
        }
    }
}

/// Interface scattering matrix between the modal bases p (above) and q
/// (below), from continuity of the tangential fields.
fn interface(p: &Modes, q: &Modes) -> Result<SMatrix> {
    let w_inv = p
        .w
        .inv()
        .map_err(|e| Error::Numerical(format!("mode matrix inversion: {e}")))?;
    let v_inv = p
        .v
        .inv()
        .map_err(|e| Error::Numerical(format!("admittance matrix inversion: {e}")))?;
    let f = w_inv.dot(&q.w);
    let g = v_inv.dot(&q.v);
    let sum = &f + &g;
    let dif = &f - &g;
    let sum_inv = sum
        .inv()
        .map_err(|e| Error::Numerical(format!("interface matrix inversion: {e}")))?;
    let pp = sum_inv.mapv(|x| x * 2.0);
    let pm = -sum_inv.dot(&dif);
    let mp = dif.dot(&sum_inv);
    let mm = (&sum - &dif.dot(&sum_inv).dot(&dif)).mapv(|x| x * 0.5);
    Ok(SMatrix { pp, pm, mp, mm })
}

/// Redheffer star product: stack `b` below `a`.
fn star(a: &SMatrix, b: &SMatrix) -> Result<SMatrix> {
    let m = a.pp.nrows();
    let mut i_apb = Array2::eye(m);
    i_apb = i_apb - a.pm.dot(&b.mp);
    let x = i_apb
        .inv()
        .map_err(|e| Error::Numerical(format!("star-product inversion: {e}")))?;
    let x_app = x.dot(&a.pp);
    let x_apm = x.dot(&a.pm);
    let pp = b.pp.dot(&x_app);
    let pm = &b.pm + &b.pp.dot(&x_apm).dot(&b.mm);
    let mp = &a.mp + &a.mm.dot(&b.mp).dot(&x_app);
    let mm_inner = Array2::eye(m) + b.mp.dot(&x_apm);
    let mm = a.mm.dot(&mm_inner).dot(&b.mm);
    Ok(SMatrix { pp, pm, mp, mm })
}

/// Folds the propagation phases of the layer just entered into `s`,
/// moving its amplitude reference from the layer top to the layer bottom.
/// Equivalent to star(s, diag-phase matrix) but without an inversion.
fn fold_phase(s: &mut SMatrix, phase: &CVec) {
    let m = phase.len();
    for i in 0..m {
        for j in 0..m {
            s.pp[[i, j]] *= phase[i];
            s.pm[[i, j]] *= phase[i] * phase[j];
            s.mm[[i, j]] *= phase[j];
        }
    }
}

/// Solves the full stack at one wavelength and polarization, returning
/// order-resolved amplitudes and efficiencies.
pub fn rcwa_orders(
    lib: &MaterialLibrary,
    structure: &ConcreteStructure,
    incidence: &IncidenceConfig,
    lambda_nm: f64,
    pol: Polarization,
) -> Result<RcwaOrders> {
    incidence.validate()?;
    let n = incidence.truncation_order;
    let m = 2 * n + 1;
    let k0 = 2.0 * std::f64::consts::PI / lambda_nm;

    let n_a = lib.refractive_index(&structure.ambient, lambda_nm)?;
    if n_a.im.abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "ambient material '{}' must be lossless (k = {})",
            structure.ambient, n_a.im
        )));
    }
    let eps_a = n_a * n_a;
    let eps_s = lib.permittivity(&structure.substrate, lambda_nm)?;

    // In-plane wavevector per order, in units of k0.
    let sin_theta = incidence.angle_deg.to_radians().sin();
    let kx: Vec<f64> = (-(n as i64)..=n as i64)
        .map(|order| n_a.re * sin_theta - order as f64 * lambda_nm / structure.pitch_nm)
        .collect();

    let flat = structure.staircased()?;
    let slices = resolve_slices(lib, &flat, structure.pitch_nm, lambda_nm)?;

    let ambient = homogeneous_modes(eps_a, &kx, pol, 0.0);
    let substrate = homogeneous_modes(eps_s, &kx, pol, 0.0);

    let mut s = SMatrix::identity(m);
    let mut prev = ambient;
    for slice in &slices {
        let cur = match *slice {
            ResolvedSlice::Homogeneous { eps, thickness_nm } => {
                homogeneous_modes(eps, &kx, pol, k0 * thickness_nm)
            }
            ResolvedSlice::Lamellar {
                eps_line,
                eps_groove,
                fill,
                thickness_nm,
            } => lamellar_modes(eps_line, eps_groove, fill, &kx, pol, k0 * thickness_nm)?,
        };
        s = star(&s, &interface(&prev, &cur)?)?;
        fold_phase(&mut s, &cur.phase);
        prev = cur;
    }
    s = star(&s, &interface(&prev, &substrate)?)?;

    // Unit incident amplitude in order 0.
    let center = n;
    let r: Vec<C> = (0..m).map(|i| s.mp[[i, center]]).collect();
    let t: Vec<C> = (0..m).map(|i| s.pp[[i, center]]).collect();
    if r.iter().chain(&t).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Numerical(format!(
            "non-finite amplitudes at lambda = {lambda_nm} nm"
        )));
    }

    // Diffraction efficiencies from longitudinal power flux, normalized to
    // the incident order-0 flux in the ambient.
    let gamma_of = |eps: C, kx_m: f64| wave_sqrt(eps - C::new(kx_m * kx_m, 0.0));
    let flux = |eps: C, g: C| match pol {
        Polarization::Te => (g).re,
        Polarization::Tm => (g / eps).re,
    };
    let inc_flux = flux(eps_a, gamma_of(eps_a, kx[center]));
    let mut de_r = Vec::with_capacity(m);
    let mut de_t = Vec::with_capacity(m);
    for i in 0..m {
        de_r.push(r[i].norm_sqr() * flux(eps_a, gamma_of(eps_a, kx[i])) / inc_flux);
        de_t.push(t[i].norm_sqr() * flux(eps_s, gamma_of(eps_s, kx[i])) / inc_flux);
    }

    Ok(RcwaOrders {
        orders: (-(n as i32)..=n as i32).collect(),
        r,
        t,
        de_reflected: de_r,
        de_transmitted: de_t,
    })
}
