//! Physical and geometric configuration of the conical tip.
//!
//! Angles follow the latitude convention: a direction on the unit sphere is
//! `(cos θ cos φ, sin θ cos φ, sin φ)` with `θ ∈ [-π, π]` and `φ ∈ [-π/2, π/2]`.
//! The circular cap of angle `α` is bounded by the latitude circle
//! `φ = -π/2 + α`; the negative material occupies the directions above that
//! circle.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::SphereMesh;
use crate::error::{Error, Result};

/// Material label of a subregion of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Negative permittivity `eps_minus`.
    Minus,
    /// Positive permittivity `eps_plus`.
    Plus,
}

/// The spherical trace of the cone.
#[derive(Debug, Clone)]
pub enum TipGeometry {
    CircularCap { alpha: f64 },
    GeneralRegion { mesh: Arc<SphereMesh> },
}

impl TipGeometry {
    pub fn circular_cap(alpha: f64) -> Result<Self> {
        make_cap_geometry(alpha)
    }

    /// Wraps a labeled sphere mesh; both material labels must be present.
    pub fn general(mesh: Arc<SphereMesh>) -> Result<Self> {
        let has = |r: Region| mesh.labels().contains(&r);
        if !has(Region::Minus) || !has(Region::Plus) {
            return Err(Error::MeshFileInvalid {
                line: 0,
                reason: "mesh must carry both region labels".into(),
            });
        }
        Ok(TipGeometry::GeneralRegion { mesh })
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            TipGeometry::CircularCap { alpha } => Some(*alpha),
            TipGeometry::GeneralRegion { .. } => None,
        }
    }

    /// Latitude of the cap boundary, `-π/2 + α`.
    pub fn phi_interface(&self) -> Option<f64> {
        self.alpha().map(|a| -FRAC_PI_2 + a)
    }

    /// Material region of the direction with latitude `phi` (circular caps only).
    pub fn region_at_latitude(&self, phi: f64) -> Option<Region> {
        self.phi_interface()
            .map(|pi| if phi > pi { Region::Minus } else { Region::Plus })
    }
}

pub fn make_cap_geometry(alpha: f64) -> Result<TipGeometry> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    Ok(TipGeometry::CircularCap { alpha })
}

/// Where the dissipation `iδ` enters the permittivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dissipation {
    /// Only the negative material is lossy.
    #[default]
    NegativeRegion,
    /// `ε + iδ` on the whole sphere.
    Everywhere,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    eps_plus: f64,
    eps_minus: f64,
    delta: f64,
    dissipation: Dissipation,
}

impl Material {
    pub fn new(eps_plus: f64, eps_minus: f64, delta: f64) -> Result<Self> {
        make_material(eps_plus, eps_minus, delta)
    }

    /// Skips the sign checks. Used for validation runs with a positive
    /// contrast or a constant weight.
    pub fn validation_override(eps_plus: f64, eps_minus: f64, delta: f64) -> Self {
        Material {
            eps_plus,
            eps_minus,
            delta,
            dissipation: Dissipation::default(),
        }
    }

    /// Unit permittivity everywhere.
    pub fn unit() -> Self {
        Self::validation_override(1.0, 1.0, 0.0)
    }

    pub fn with_dissipation(mut self, dissipation: Dissipation) -> Self {
        self.dissipation = dissipation;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::NegativeDissipation { delta });
        }
        self.delta = delta;
        Ok(self)
    }

    /// Multiplies both permittivities by `t`.
    pub fn scaled(mut self, t: f64) -> Self {
        self.eps_plus *= t;
        self.eps_minus *= t;
        self
    }

    pub fn eps_plus(&self) -> f64 {
        self.eps_plus
    }

    pub fn eps_minus(&self) -> f64 {
        self.eps_minus
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dissipation(&self) -> Dissipation {
        self.dissipation
    }

    pub fn kappa(&self) -> f64 {
        self.eps_minus / self.eps_plus
    }

    pub fn real_eps(&self, region: Region) -> f64 {
        match region {
            Region::Minus => self.eps_minus,
            Region::Plus => self.eps_plus,
        }
    }

    /// `∂ε/∂δ` in the given region.
    pub fn dissipation_weight(&self, region: Region) -> f64 {
        match (self.dissipation, region) {
            (Dissipation::Everywhere, _) => 1.0,
            (Dissipation::NegativeRegion, Region::Minus) => 1.0,
            (Dissipation::NegativeRegion, Region::Plus) => 0.0,
        }
    }

    /// Complex permittivity `ε + iδ·w` of a region.
    pub fn eps(&self, region: Region) -> Complex64 {
        Complex64::new(
            self.real_eps(region),
            self.delta * self.dissipation_weight(region),
        )
    }
}

pub fn make_material(eps_plus: f64, eps_minus: f64, delta: f64) -> Result<Material> {
    if !(eps_plus > 0.0) || !(eps_minus < 0.0) {
        return Err(Error::SignViolation { eps_plus, eps_minus });
    }
    if !(delta >= 0.0) {
        return Err(Error::NegativeDissipation { delta });
    }
    Ok(Material {
        eps_plus,
        eps_minus,
        delta,
        dissipation: Dissipation::default(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffFamily {
    /// Quintic smoothstep on `[r_one, rho]`.
    #[default]
    PolynomialC2,
    /// `exp(-1/t)`-based transition, C-infinity.
    SmoothBump,
}

/// Radial cutoff `χ`: one on `[0, r_one]`, zero on `[rho, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    r_one: f64,
    rho: f64,
    family: CutoffFamily,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffValue {
    pub chi: f64,
    pub chi_prime: f64,
    pub chi_double_prime: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        CutoffProfile {
            r_one: 0.5,
            rho: 1.0,
            family: CutoffFamily::PolynomialC2,
        }
    }
}

impl CutoffProfile {
    pub fn new(r_one: f64, rho: f64, family: CutoffFamily) -> Result<Self> {
        if !(r_one > 0.0 && rho > r_one && rho.is_finite()) {
            return Err(Error::InvalidCutoff(format!(
                "need 0 < r_one < rho, got r_one = {r_one}, rho = {rho}"
            )));
        }
        Ok(CutoffProfile { r_one, rho, family })
    }

    pub fn r_one(&self) -> f64 {
        self.r_one
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn family(&self) -> CutoffFamily {
        self.family
    }

    pub fn eval(&self, r: f64) -> CutoffValue {
        eval_cutoff(self, r)
    }
}

/// `χ`, `χ'` and `χ''` at radius `r ≥ 0`.
pub fn eval_cutoff(profile: &CutoffProfile, r: f64) -> CutoffValue {
    if r <= profile.r_one {
        return CutoffValue {
            chi: 1.0,
            chi_prime: 0.0,
            chi_double_prime: 0.0,
        };
    }
    if r >= profile.rho {
        return CutoffValue {
            chi: 0.0,
            chi_prime: 0.0,
            chi_double_prime: 0.0,
        };
    }
    let width = profile.rho - profile.r_one;
    let t = (r - profile.r_one) / width;
    // s(t) rises from 0 to 1; χ = 1 - s.
    let (s, ds, d2s) = match profile.family {
        CutoffFamily::PolynomialC2 => {
            let t2 = t * t;
            let t3 = t2 * t;
            (
                t3 * (10.0 - 15.0 * t + 6.0 * t2),
                30.0 * t2 * (1.0 - t) * (1.0 - t),
                60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
            )
        }
        CutoffFamily::SmoothBump => smooth_step(t),
    };
    CutoffValue {
        chi: 1.0 - s,
        chi_prime: -ds / width,
        chi_double_prime: -d2s / (width * width),
    }
}

/// `f(t) / (f(t) + f(1-t))` with `f(t) = exp(-1/t)`, and its first two derivatives.
fn smooth_step(t: f64) -> (f64, f64, f64) {
    let bump = |x: f64| -> (f64, f64, f64) {
        if x <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let f = (-1.0 / x).exp();
        let x2 = x * x;
        (f, f / x2, f * (1.0 - 2.0 * x) / (x2 * x2))
    };
    let (f, f1, f2) = bump(t);
    let (g, mg1, g2) = bump(1.0 - t);
    // g(t) = f(1 - t): g' = -f'(1 - t), g'' = f''(1 - t)
    let g1 = -mg1;
    let sum = f + g;
    let num1 = f1 * g - f * g1;
    let s = f / sum;
    let ds = num1 / (sum * sum);
    let d2s = ((f2 * g - f * g2) * sum - 2.0 * num1 * (f1 + g1)) / (sum * sum * sum);
    (s, ds, d2s)
}

/// Azimuthal Fourier index of an axisymmetric mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AzimuthalMode(pub u32);

impl AzimuthalMode {
    pub fn m(self) -> u32 {
        self.0
    }

    /// `∫_{-π}^{π} cos²(mθ) dθ`: the angular factor of real mode-`m` functions.
    pub fn angular_measure(self) -> f64 {
        if self.0 == 0 {
            2.0 * PI
        } else {
            PI
        }
    }
}

impl fmt::Display for AzimuthalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use approx::assert_relative_eq;

    #[test]
    fn cap_geometry_interface() {
        let g = make_cap_geometry(2.0 * PI / 3.0).unwrap();
        assert_relative_eq!(g.phi_interface().unwrap(), PI / 6.0, epsilon = 1e-15);
        let flat = make_cap_geometry(PI / 2.0).unwrap();
        assert_eq!(flat.phi_interface().unwrap(), 0.0);
        assert!(matches!(
            make_cap_geometry(0.0),
            Err(Error::AlphaOutOfRange { .. })
        ));
        assert!(make_cap_geometry(PI).is_err());
        assert!(make_cap_geometry(f64::NAN).is_err());
    }

    #[test]
    fn material_contrast() {
        assert_eq!(make_material(1.0, -1.9, 0.0).unwrap().kappa(), -1.9);
        assert_eq!(make_material(2.0, -3.8, 0.0).unwrap().kappa(), -1.9);
        assert!(matches!(
            make_material(1.0, 0.5, 0.0),
            Err(Error::SignViolation { .. })
        ));
        assert!(matches!(
            make_material(-1.0, -0.5, 0.0),
            Err(Error::SignViolation { .. })
        ));
        assert!(matches!(
            make_material(1.0, -1.0, -0.1),
            Err(Error::NegativeDissipation { .. })
        ));
    }

    #[test]
    fn complex_permittivity_by_support() {
        let m = make_material(1.0, -1.9, 0.1).unwrap();
        assert_eq!(m.eps(Region::Minus), Complex64::new(-1.9, 0.1));
        assert_eq!(m.eps(Region::Plus), Complex64::new(1.0, 0.0));
        let m = m.with_dissipation(Dissipation::Everywhere);
        assert_eq!(m.eps(Region::Plus), Complex64::new(1.0, 0.1));
    }

    #[test]
    fn cutoff_plateau_and_support() {
        for family in [CutoffFamily::PolynomialC2, CutoffFamily::SmoothBump] {
            let p = CutoffProfile::new(0.5, 1.0, family).unwrap();
            let v = p.eval(0.0);
            assert_eq!((v.chi, v.chi_prime, v.chi_double_prime), (1.0, 0.0, 0.0));
            let v = p.eval(2.0);
            assert_eq!((v.chi, v.chi_prime, v.chi_double_prime), (0.0, 0.0, 0.0));
            for k in 0..=100 {
                let chi = p.eval(0.5 + 0.005 * k as f64).chi;
                assert!((0.0..=1.0).contains(&chi));
            }
        }
        assert!(CutoffProfile::new(1.0, 0.5, CutoffFamily::PolynomialC2).is_err());
    }

    #[test]
    fn cutoff_derivatives_match_finite_differences() {
        let h = 1e-6;
        for family in [CutoffFamily::PolynomialC2, CutoffFamily::SmoothBump] {
            let p = CutoffProfile::new(0.3, 0.9, family).unwrap();
            for k in 1..20 {
                let r = 0.3 + 0.6 * k as f64 / 20.0;
                let v = p.eval(r);
                let fd1 = (p.eval(r + h).chi - p.eval(r - h).chi) / (2.0 * h);
                let fd2 = (p.eval(r + h).chi_prime - p.eval(r - h).chi_prime) / (2.0 * h);
                assert_relative_eq!(v.chi_prime, fd1, epsilon = 1e-6, max_relative = 1e-6);
                assert_relative_eq!(v.chi_double_prime, fd2, epsilon = 1e-5, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn integral_of_chi_chi_prime_is_minus_half() {
        // Exact antiderivative χ²/2 gives -1/2 between the plateau and the support edge.
        for family in [CutoffFamily::PolynomialC2, CutoffFamily::SmoothBump] {
            let p = CutoffProfile::new(0.5, 1.0, family).unwrap();
            let rule = GaussLegendre::new(16);
            let panels = if family == CutoffFamily::SmoothBump { 64 } else { 1 };
            let integral = rule.integrate_composite(0.5, 1.0, panels, |r| {
                let v = p.eval(r);
                v.chi * v.chi_prime
            });
            assert_relative_eq!(integral, -0.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn cutoff_is_c2_across_breakpoints() {
        let p = CutoffProfile::default();
        for &x in &[p.r_one(), p.rho()] {
            for h in [1e-3, 1e-4] {
                let left = p.eval(x - h).chi_double_prime;
                let right = p.eval(x + h).chi_double_prime;
                assert!((left - right).abs() < 1000.0 * h, "jump {} at {}", left - right, x);
            }
        }
    }

    #[test]
    fn angular_measure() {
        assert_relative_eq!(AzimuthalMode(0).angular_measure(), 2.0 * PI);
        assert_relative_eq!(AzimuthalMode(3).angular_measure(), PI);
    }
}
