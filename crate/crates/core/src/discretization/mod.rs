//! Meshes of the unit sphere and assembly of the ε-weighted pencil
//! `∫ ε ∇Φ·∇Ψ = μ ∫ ε Φ Ψ`.
//!
//! Two discretizations are provided: a 1D latitude mesh for a single
//! azimuthal mode `Φ = f(φ) cos(mθ)` of a circular cap, and P1 elements on a
//! labeled triangulated sphere.

mod latitude;
mod sphere;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use latitude::{build_latitude_mesh, LatitudeMesh};
pub use sphere::{azimuthal_number, build_sphere_mesh, latitude as latitude_of, unit_vector, SphereMesh, Vec3};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64};
use crate::model::{AzimuthalMode, Material, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ElementOrder {
    P1,
    #[default]
    P2,
}

/// Which function space the pencil unknowns live in.
#[derive(Debug, Clone, PartialEq)]
pub enum Discretization {
    Axisym {
        mesh: Arc<LatitudeMesh>,
        order: ElementOrder,
        mode: AzimuthalMode,
    },
    Sphere {
        mesh: Arc<SphereMesh>,
    },
}

/// Point value of a discrete field and its angular derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue {
    pub value: f64,
    pub d_theta: f64,
    pub d_phi: f64,
}

impl Discretization {
    pub fn dim(&self) -> usize {
        match self {
            Discretization::Axisym { mesh, order, mode } => {
                latitude::dof_count(*order, mesh.n_elements(), *mode)
            }
            Discretization::Sphere { mesh } => mesh.vertices().len(),
        }
    }

    /// Azimuthal mode of the axisymmetric path, `None` for the full sphere.
    pub fn mode(&self) -> Option<AzimuthalMode> {
        match self {
            Discretization::Axisym { mode, .. } => Some(*mode),
            Discretization::Sphere { .. } => None,
        }
    }

    /// Factor turning 1D integrals into sphere integrals (`∫cos²(mθ)dθ`), 1 for the sphere.
    pub fn angular_measure(&self) -> f64 {
        self.mode().map_or(1.0, AzimuthalMode::angular_measure)
    }

    /// Stiffness and mass matrices with an arbitrary per-region weight.
    /// Axisymmetric matrices are per unit angular measure.
    pub fn assemble_weighted(&self, weight: impl Fn(Region) -> C64) -> Result<(Matrix<C64>, Matrix<C64>)> {
        match self {
            Discretization::Axisym { mesh, order, mode } => latitude::assemble_forms(mesh, *order, *mode, weight),
            Discretization::Sphere { mesh } => sphere::assemble_forms(mesh, weight),
        }
    }

    /// Evaluates the field with unknowns `coeffs` at azimuth `theta`, latitude `phi`.
    pub fn eval(&self, coeffs: &[f64], theta: f64, phi: f64) -> Result<FieldValue> {
        let outside = || Error::PointOutsideChart { theta, phi };
        if !theta.is_finite() || !(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2).contains(&phi) {
            return Err(outside());
        }
        if coeffs.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                self.dim(),
                coeffs.len()
            )));
        }
        match self {
            Discretization::Axisym { mesh, order, mode } => {
                let (f, df) = latitude::eval_profile(mesh, *order, *mode, coeffs, phi).ok_or_else(outside)?;
                let m = mode.m() as f64;
                let (s, c) = (m * theta).sin_cos();
                Ok(FieldValue {
                    value: f * c,
                    d_theta: -m * f * s,
                    d_phi: df * c,
                })
            }
            Discretization::Sphere { mesh } => {
                let p = unit_vector(theta, phi);
                let (value, g) = sphere::eval_p1(mesh, coeffs, p).ok_or_else(outside)?;
                let e_theta = [-phi.cos() * theta.sin(), phi.cos() * theta.cos(), 0.0];
                let e_phi = [-phi.sin() * theta.cos(), -phi.sin() * theta.sin(), phi.cos()];
                let d = |v: [f64; 3]| g[0] * v[0] + g[1] * v[1] + g[2] * v[2];
                Ok(FieldValue {
                    value,
                    d_theta: d(e_theta),
                    d_phi: d(e_phi),
                })
            }
        }
    }
}

/// Point of an angular quadrature on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularNode {
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
    pub region: Region,
}

impl Discretization {
    /// Quadrature over the sphere that integrates products of two discrete
    /// fields exactly as the assembled mass matrix does.
    ///
    /// Axisymmetric: the element Gauss rule in latitude times a trapezoid
    /// rule with `4m + 4` points in azimuth. Sphere: edge midpoints of each
    /// flat triangle.
    pub fn angular_quadrature(&self) -> Vec<AngularNode> {
        match self {
            Discretization::Axisym { mesh, mode, .. } => {
                let gauss = crate::quadrature::GaussLegendre::new(4);
                let n_theta = 4 * mode.m() as usize + 4;
                let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
                let mut out = Vec::with_capacity(mesh.n_elements() * 4 * n_theta);
                for (e, w) in mesh.nodes().windows(2).enumerate() {
                    let region = mesh.element_region()[e];
                    for (phi, gw) in gauss.on_interval(w[0], w[1]) {
                        for k in 0..n_theta {
                            out.push(AngularNode {
                                theta: dtheta * k as f64,
                                phi,
                                weight: gw * phi.cos() * dtheta,
                                region,
                            });
                        }
                    }
                }
                out
            }
            Discretization::Sphere { mesh } => {
                let mut out = Vec::with_capacity(3 * mesh.triangles().len());
                for (t, tri) in mesh.triangles().iter().enumerate() {
                    let area = mesh.signed_area(t);
                    let region = mesh.labels()[t];
                    for k in 0..3 {
                        let (p, q) = (mesh.vertices()[tri[k]], mesh.vertices()[tri[(k + 1) % 3]]);
                        let m = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
                        let r = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                        out.push(AngularNode {
                            theta: m[1].atan2(m[0]),
                            phi: (m[2] / r).clamp(-1.0, 1.0).asin(),
                            weight: area / 3.0,
                            region,
                        });
                    }
                }
                out
            }
        }
    }
}

/// The pencil `A x = μ B x` together with its function space.
#[derive(Debug, Clone)]
pub struct WeightedPencil {
    pub a: Matrix<C64>,
    pub b: Matrix<C64>,
    pub discretization: Discretization,
}

impl WeightedPencil {
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// True when both matrices have vanishing imaginary parts (δ = 0).
    pub fn is_real(&self) -> bool {
        self.a.is_real() && self.b.is_real()
    }

    /// Lower/upper bandwidth shared by `A` and `B`.
    pub fn bandwidth(&self) -> (usize, usize) {
        let (al, au) = self.a.bandwidth();
        let (bl, bu) = self.b.bandwidth();
        (al.max(bl), au.max(bu))
    }
}

/// Assembles the pencil of one azimuthal mode on a latitude mesh.
pub fn assemble_axisym(
    mesh: Arc<LatitudeMesh>,
    material: &Material,
    mode: AzimuthalMode,
    order: ElementOrder,
) -> Result<WeightedPencil> {
    let discretization = Discretization::Axisym { mesh, order, mode };
    let (a, b) = discretization.assemble_weighted(|r| material.eps(r))?;
    Ok(WeightedPencil { a, b, discretization })
}

/// Assembles the full-sphere P1 pencil.
pub fn assemble_sphere(mesh: Arc<SphereMesh>, material: &Material) -> Result<WeightedPencil> {
    let discretization = Discretization::Sphere { mesh };
    let (a, b) = discretization.assemble_weighted(|r| material.eps(r))?;
    Ok(WeightedPencil { a, b, discretization })
}
