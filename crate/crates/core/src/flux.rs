//! Cut-off singular functions `s± = χ(r) r^{−1/2 ± iη} Φ` and the energy
//! flux identities they satisfy.
//!
//! The key identity: `Im ∫_Ω div(ε∇s̄⁺) s⁺ dx = η ∫_{𝕊²} ε|Φ|²`, whatever the
//! cut-off. Only imaginary parts carry accuracy claims; real parts depend on
//! `χ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::CutoffProfile;
use crate::quadrature::GaussLegendre;
use crate::singularity::SingularExponent;

/// Which member of the conjugate pair to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `s⁺`, radial exponent `−1/2 + iη_out`.
    Plus,
    /// `s⁻`, radial exponent conjugated.
    Minus,
}

/// Point in spherical coordinates about the tip: radius, azimuth, latitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularFieldSample {
    pub point: SphericalPoint,
    pub value: C64,
    /// Components along `(e_r, e_θ, e_φ)`.
    pub gradient: [C64; 3],
}

fn radial_exponent(exponent: &SingularExponent, branch: Branch) -> C64 {
    let a = exponent.lambda();
    match branch {
        Branch::Plus => a,
        Branch::Minus => a.conj(),
    }
}

/// Value and gradient of `s±` at a point.
pub fn eval_singular_function(
    exponent: &SingularExponent,
    cutoff: &CutoffProfile,
    point: SphericalPoint,
    branch: Branch,
) -> Result<SingularFieldSample> {
    let SphericalPoint { r, theta, phi } = point;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
    }
    let f = exponent.eval_phi(theta, phi)?;
    let zero = C64::new(0.0, 0.0);
    let chi = cutoff.eval(r);
    if chi.chi == 0.0 && chi.chi_prime == 0.0 {
        return Ok(SingularFieldSample {
            point,
            value: zero,
            gradient: [zero; 3],
        });
    }
    let a = radial_exponent(exponent, branch);
    let ra = (a * r.ln()).exp();
    let radial = chi.chi * ra;
    let d_radial = chi.chi_prime * ra + chi.chi * a * ra / r;
    let cos_phi = phi.cos();
    let g_theta = if cos_phi > 0.0 {
        radial * f.d_theta / (r * cos_phi)
    } else {
        zero
    };
    Ok(SingularFieldSample {
        point,
        value: radial * f.value,
        gradient: [d_radial * f.value, g_theta, radial * f.d_phi / r],
    })
}

/// `∫_{𝕊²} ε |Φ|²` by the discretization's angular quadrature.
fn angular_energy(exponent: &SingularExponent) -> Result<f64> {
    let mut total = 0.0;
    for node in exponent.discretization.angular_quadrature() {
        let v = exponent.eval_phi(node.theta, node.phi)?.value;
        total += node.weight * exponent.material.real_eps(node.region) * v * v;
    }
    Ok(total)
}

/// Flux `∫_{∂B(0,τ)} ε conj(∂_r s⁺) s⁺ ds` through a small sphere inside the plateau.
/// Analytically `−(1/2 + iη)·D`, independent of `τ`.
pub fn surface_flux(exponent: &SingularExponent, cutoff: &CutoffProfile, tau: f64) -> Result<C64> {
    if !(tau > 0.0 && tau <= cutoff.r_one()) {
        return Err(Error::TauOutsidePlateau {
            tau,
            r_one: cutoff.r_one(),
        });
    }
    let mut total = C64::new(0.0, 0.0);
    for node in exponent.discretization.angular_quadrature() {
        let point = SphericalPoint {
            r: tau,
            theta: node.theta,
            phi: node.phi,
        };
        let s = eval_singular_function(exponent, cutoff, point, Branch::Plus)?;
        let eps = exponent.material.real_eps(node.region);
        total += s.gradient[0].conj() * s.value * (eps * node.weight * tau * tau);
    }
    Ok(total)
}

fn radial_factor(abar: C64, cutoff: &CutoffProfile, rule: &GaussLegendre, panels: usize) -> C64 {
    let integrand = |r: f64, part: fn(C64) -> f64| {
        let c = cutoff.eval(r);
        let v = abar * (2.0 * c.chi_prime * c.chi) + r * c.chi * c.chi_double_prime + 2.0 * c.chi * c.chi_prime;
        part(v)
    };
    let (a, b) = (cutoff.r_one(), cutoff.rho());
    let re = rule.integrate_composite(a, b, panels, |r| integrand(r, |z| z.re));
    let im = rule.integrate_composite(a, b, panels, |r| integrand(r, |z| z.im));
    C64::new(re, im)
}

/// `∫_Ω div(ε∇s̄⁺) s⁺ dx` over the ball of radius `rho`.
///
/// The integrand vanishes outside `r_one < r < rho` since `r^{λ}Φ` solves the
/// homogeneous equation in the cone; what remains separates into `D` times
/// `∫ [2ā χ′χ + r χχ″ + 2χχ′] dr` with `ā = −1/2 − iη`.
pub fn volume_flux_integral(exponent: &SingularExponent, cutoff: &CutoffProfile) -> Result<C64> {
    let d = angular_energy(exponent)?;
    let abar = exponent.lambda().conj();
    let panels = 32;
    let coarse = radial_factor(abar, cutoff, &GaussLegendre::new(12), panels);
    let fine = radial_factor(abar, cutoff, &GaussLegendre::new(20), panels);
    let difference = (fine - coarse).norm();
    if difference > 1e-12 * (1.0 + fine.norm()) {
        return Err(Error::QuadratureNotConverged { difference });
    }
    Ok(fine * d)
}

/// `∫_Ω div(ε∇s⁺) s̄⁺ dx`, the denominator of the singular coefficient.
pub fn coefficient_denominator(exponent: &SingularExponent, cutoff: &CutoffProfile, tol_d: f64) -> Result<C64> {
    if !(exponent.d.abs() >= tol_d) {
        return Err(Error::EndpointDegeneracy { d: exponent.d });
    }
    Ok(volume_flux_integral(exponent, cutoff)?.conj())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxReport {
    pub tau: f64,
    pub surface_flux: [f64; 2],
    pub volume_integral: [f64; 2],
    pub denominator: [f64; 2],
    /// `η_out · D`.
    pub eta_d: f64,
    /// `|Im(volume_integral) − η_out·D|`.
    pub residual_identity: f64,
}

/// All flux quantities at one `τ`.
pub fn flux_report(exponent: &SingularExponent, cutoff: &CutoffProfile, tau: f64, tol_d: f64) -> Result<FluxReport> {
    let surface = surface_flux(exponent, cutoff, tau)?;
    let volume = volume_flux_integral(exponent, cutoff)?;
    let denominator = coefficient_denominator(exponent, cutoff, tol_d)?;
    let eta_d = exponent.eta_out() * exponent.d;
    Ok(FluxReport {
        tau,
        surface_flux: [surface.re, surface.im],
        volume_integral: [volume.re, volume.im],
        denominator: [denominator.re, denominator.im],
        eta_d,
        residual_identity: (volume.im - eta_d).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_axisym, build_latitude_mesh, ElementOrder};
    use crate::model::{make_cap_geometry, make_material, AzimuthalMode, CutoffFamily};
    use crate::singularity::{analyze_pencil, Tolerances};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn exponent() -> SingularExponent {
        let g = make_cap_geometry(2.0 * PI / 3.0).unwrap();
        let mesh = Arc::new(build_latitude_mesh(&g, 48).unwrap());
        let mat = make_material(1.0, -1.9, 0.0).unwrap();
        let p = assemble_axisym(mesh, &mat, AzimuthalMode(0), ElementOrder::P2).unwrap();
        analyze_pencil(&p, &mat, &Tolerances::default()).unwrap().pairs.remove(0)
    }

    #[test]
    fn plateau_and_support() {
        let e = exponent();
        let c = CutoffProfile::default();
        let r = c.r_one() / 2.0;
        let p = SphericalPoint { r, theta: 0.3, phi: 0.2 };
        let s = eval_singular_function(&e, &c, p, Branch::Plus).unwrap();
        let phi = e.eval_phi(0.3, 0.2).unwrap().value;
        assert!((s.value.norm() - r.powf(-0.5) * phi.abs()).abs() < 1e-12);
        let far = SphericalPoint { r: 2.0 * c.rho(), ..p };
        let s = eval_singular_function(&e, &c, far, Branch::Plus).unwrap();
        assert_eq!(s.value, C64::new(0.0, 0.0));
        assert!(s.gradient.iter().all(|g| g.norm() == 0.0));
    }

    #[test]
    fn surface_flux_is_tau_independent() {
        let e = exponent();
        let c = CutoffProfile::default();
        let f1 = surface_flux(&e, &c, 0.1).unwrap();
        let f2 = surface_flux(&e, &c, 0.45).unwrap();
        assert!((f1 - f2).norm() <= 1e-10 * f1.norm());
        let expect = C64::new(-0.5, -e.eta_out()) * e.d;
        assert!((f1 - expect).norm() <= 1e-10 * expect.norm());
        assert!(matches!(surface_flux(&e, &c, 0.6), Err(Error::TauOutsidePlateau { .. })));
    }

    #[test]
    fn volume_identity_is_cutoff_independent() {
        let e = exponent();
        let eta_d = e.eta_out() * e.d;
        for c in [
            CutoffProfile::default(),
            CutoffProfile::new(0.2, 0.7, CutoffFamily::SmoothBump).unwrap(),
        ] {
            let v = volume_flux_integral(&e, &c).unwrap();
            assert!((v.im - eta_d).abs() <= 1e-9 * eta_d.abs());
            let den = coefficient_denominator(&e, &c, 1e-8).unwrap();
            assert_eq!(den, v.conj());
        }
    }

    #[test]
    fn ingoing_branch_conjugates() {
        let e = exponent();
        let c = CutoffProfile::default();
        let p = SphericalPoint { r: 0.7, theta: 1.0, phi: -0.4 };
        let plus = eval_singular_function(&e, &c, p, Branch::Plus).unwrap();
        let minus = eval_singular_function(&e, &c, p, Branch::Minus).unwrap();
        assert!((plus.value.conj() - minus.value).norm() < 1e-14);
    }
}
