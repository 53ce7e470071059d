//! Reference checks: the ε ≡ 1 spectrum `ℓ(ℓ+1)` and agreement between the
//! axisymmetric and full-sphere discretizations.

use std::sync::Arc;

use rayon::prelude::*;

use crate::discretization::{
    assemble_axisym, assemble_sphere, azimuthal_number, build_latitude_mesh, build_sphere_mesh, ElementOrder,
};
use crate::eigensolver::{eigenpair, pencil_eigenvalues};
use crate::error::Result;
use crate::linalg::C64;
use crate::model::{AzimuthalMode, Material, TipGeometry};

/// Lowest `count` eigenvalues of the `m = 0` latitude pencil with ε ≡ 1.
pub fn axisym_harmonics(
    geometry: &TipGeometry,
    n_elements: usize,
    order: ElementOrder,
    count: usize,
) -> Result<Vec<f64>> {
    let mesh = Arc::new(build_latitude_mesh(geometry, n_elements)?);
    let p = assemble_axisym(mesh, &Material::unit(), AzimuthalMode(0), order)?;
    Ok(pencil_eigenvalues(&p.a, &p.b)?.into_iter().take(count).map(|z| z.re).collect())
}

/// Lowest `count` eigenvalues of the sphere pencil with ε ≡ 1.
pub fn sphere_harmonics(geometry: &TipGeometry, refinement: u32, count: usize) -> Result<Vec<f64>> {
    let mesh = Arc::new(build_sphere_mesh(geometry, refinement)?);
    let p = assemble_sphere(mesh, &Material::unit())?;
    Ok(pencil_eigenvalues(&p.a, &p.b)?.into_iter().take(count).map(|z| z.re).collect())
}

/// Observed order `log₂(e_h / e_{h/2})` from errors at two successive refinements.
pub fn observed_order(coarse_error: f64, fine_error: f64) -> f64 {
    (coarse_error / fine_error).log2()
}

/// Settings for [`oracle_comparison`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub n_elements: usize,
    pub order: ElementOrder,
    pub refinement: u32,
    pub max_mode: u32,
    /// Only eigenvalues with `|μ|` below this bound are compared.
    pub mu_bound: f64,
    /// Matching tolerance, relative to `max(1, |μ|)`.
    pub tolerance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            n_elements: 256,
            order: ElementOrder::P2,
            refinement: 4,
            max_mode: 2,
            mu_bound: 30.0,
            tolerance: 5e-2,
        }
    }
}

/// An eigenvalue and its scaled distance to the other spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMatch {
    /// Azimuthal mode: exact for axisymmetric eigenvalues, estimated for sphere ones.
    pub mode: f64,
    pub mu: C64,
    /// `min |μ − μ'| / max(1, |μ|)` over the other spectrum.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Axisymmetric eigenvalues against the full sphere spectrum.
    pub forward: Vec<OracleMatch>,
    /// Sphere eigenvalues identified as `m ≤ max_mode` against the axisymmetric spectra.
    pub reverse: Vec<OracleMatch>,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn worst_forward(&self) -> f64 {
        self.forward.iter().map(|m| m.distance).fold(0.0, f64::max)
    }

    pub fn worst_reverse(&self) -> f64 {
        self.reverse.iter().map(|m| m.distance).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.worst_forward() <= self.tolerance && self.worst_reverse() <= self.tolerance
    }
}

fn nearest(mu: C64, spectrum: &[C64]) -> f64 {
    let d = spectrum.iter().map(|s| (s - mu).norm()).fold(f64::INFINITY, f64::min);
    d / mu.norm().max(1.0)
}

/// Compares the per-mode latitude spectra of a circular cap with the
/// full-sphere spectrum of the same cap.
pub fn oracle_comparison(geometry: &TipGeometry, material: &Material, settings: OracleSettings) -> Result<OracleReport> {
    let mesh = Arc::new(build_latitude_mesh(geometry, settings.n_elements)?);
    let axisym: Vec<Vec<C64>> = (0..=settings.max_mode)
        .into_par_iter()
        .map(|m| {
            let p = assemble_axisym(mesh.clone(), material, AzimuthalMode(m), settings.order)?;
            pencil_eigenvalues(&p.a, &p.b)
        })
        .collect::<Result<_>>()?;
    let sphere_mesh = Arc::new(build_sphere_mesh(geometry, settings.refinement)?);
    let sp = assemble_sphere(sphere_mesh.clone(), material)?;
    let sphere = pencil_eigenvalues(&sp.a, &sp.b)?;

    let forward = axisym
        .iter()
        .enumerate()
        .flat_map(|(m, mus)| {
            mus.iter()
                .filter(|z| z.norm() < settings.mu_bound)
                .map(move |&mu| (m, mu))
        })
        .map(|(m, mu)| OracleMatch {
            mode: m as f64,
            mu,
            distance: nearest(mu, &sphere),
        })
        .collect();

    let all_axisym: Vec<C64> = axisym.concat();
    let candidates: Vec<C64> = sphere.iter().copied().filter(|z| z.norm() < settings.mu_bound).collect();
    let estimated: Vec<(C64, f64)> = candidates
        .par_iter()
        .map(|&mu| {
            let v = eigenpair(&sp.a, &sp.b, mu, 1e-8)?;
            Ok((mu, azimuthal_number(&sphere_mesh, &v.vector)))
        })
        .collect::<Result<_>>()?;
    let reverse = estimated
        .into_iter()
        .filter(|&(_, m)| m < settings.max_mode as f64 + 0.5)
        .map(|(mu, m)| OracleMatch {
            mode: m,
            mu,
            distance: nearest(mu, &all_axisym),
        })
        .collect();
    Ok(OracleReport {
        forward,
        reverse,
        tolerance: settings.tolerance,
    })
}
