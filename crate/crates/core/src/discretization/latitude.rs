use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64};
use crate::model::{AzimuthalMode, Region, TipGeometry};
use crate::quadrature::GaussLegendre;

use super::ElementOrder;

/// Partition of `[-π/2, π/2]` with the cap boundary as a node.
#[derive(Debug, Clone, PartialEq)]
pub struct LatitudeMesh {
    nodes: Vec<f64>,
    interface_index: usize,
    element_region: Vec<Region>,
}

impl LatitudeMesh {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interface_index(&self) -> usize {
        self.interface_index
    }

    pub fn phi_interface(&self) -> f64 {
        self.nodes[self.interface_index]
    }

    pub fn element_region(&self) -> &[Region] {
        &self.element_region
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Element index containing `phi` (right-closed except at the south pole).
    pub fn locate(&self, phi: f64) -> Option<usize> {
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&phi) {
            return None;
        }
        let k = self.nodes.partition_point(|&x| x < phi);
        Some(k.saturating_sub(1).min(self.n_elements() - 1))
    }
}

/// Quasi-uniform latitude mesh with exactly `n_elements` elements, split
/// proportionally on either side of the interface.
pub fn build_latitude_mesh(geometry: &TipGeometry, n_elements: usize) -> Result<LatitudeMesh> {
    let phi_i = match geometry {
        TipGeometry::CircularCap { .. } => geometry.phi_interface().expect("cap has an interface"),
        TipGeometry::GeneralRegion { .. } => return Err(Error::GeometryKindMismatch),
    };
    if n_elements < 4 {
        return Err(Error::InvalidInput(format!(
            "n_elements must be at least 4, got {n_elements}"
        )));
    }
    let frac = (phi_i + FRAC_PI_2) / std::f64::consts::PI;
    let below = ((n_elements as f64 * frac).round() as usize).clamp(1, n_elements - 1);
    let above = n_elements - below;
    let mut nodes = Vec::with_capacity(n_elements + 1);
    let h1 = (phi_i + FRAC_PI_2) / below as f64;
    for k in 0..below {
        nodes.push(-FRAC_PI_2 + h1 * k as f64);
    }
    nodes.push(phi_i);
    let h2 = (FRAC_PI_2 - phi_i) / above as f64;
    for k in 1..above {
        nodes.push(phi_i + h2 * k as f64);
    }
    nodes.push(FRAC_PI_2);
    let element_region = nodes
        .windows(2)
        .map(|w| {
            geometry
                .region_at_latitude(0.5 * (w[0] + w[1]))
                .expect("cap geometry")
        })
        .collect();
    Ok(LatitudeMesh {
        nodes,
        interface_index: below,
        element_region,
    })
}

/// Values and ξ-derivatives of the reference shape functions at `xi ∈ [-1, 1]`.
pub(crate) fn shape(order: ElementOrder, xi: f64) -> ([f64; 3], [f64; 3]) {
    match order {
        ElementOrder::P1 => (
            [0.5 * (1.0 - xi), 0.5 * (1.0 + xi), 0.0],
            [-0.5, 0.5, 0.0],
        ),
        ElementOrder::P2 => (
            [0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)],
            [xi - 0.5, -2.0 * xi, xi + 0.5],
        ),
    }
}

/// Global node indices of element `e` in local order.
pub(crate) fn element_dofs(order: ElementOrder, e: usize) -> ([usize; 3], usize) {
    match order {
        ElementOrder::P1 => ([e, e + 1, 0], 2),
        ElementOrder::P2 => ([2 * e, 2 * e + 1, 2 * e + 2], 3),
    }
}

pub(crate) fn node_count(order: ElementOrder, n_elements: usize) -> usize {
    match order {
        ElementOrder::P1 => n_elements + 1,
        ElementOrder::P2 => 2 * n_elements + 1,
    }
}

/// Number of unknowns for a mode (pole values are removed when `m ≥ 1`).
pub(crate) fn dof_count(order: ElementOrder, n_elements: usize, mode: AzimuthalMode) -> usize {
    let n = node_count(order, n_elements);
    if mode.m() == 0 {
        n
    } else {
        n - 2
    }
}

/// Maps a global node to its unknown index, or `None` for a clamped pole.
#[inline]
pub(crate) fn node_to_dof(node: usize, n_nodes: usize, mode: AzimuthalMode) -> Option<usize> {
    if mode.m() == 0 {
        Some(node)
    } else if node == 0 || node + 1 == n_nodes {
        None
    } else {
        Some(node - 1)
    }
}

/// Stiffness and mass forms with a per-region weight:
/// `∫ w [f′g′ cos φ + m² f g / cos φ] dφ` and `∫ w f g cos φ dφ`.
pub(crate) fn assemble_forms(
    mesh: &LatitudeMesh,
    order: ElementOrder,
    mode: AzimuthalMode,
    weight: impl Fn(Region) -> C64,
) -> Result<(Matrix<C64>, Matrix<C64>)> {
    let ne = mesh.n_elements();
    let n_nodes = node_count(order, ne);
    let n = dof_count(order, ne, mode);
    let mut a = Matrix::<C64>::zeros(n, n);
    let mut b = Matrix::<C64>::zeros(n, n);
    let gauss = GaussLegendre::new(4);
    let m2 = (mode.m() as f64).powi(2);
    for e in 0..ne {
        let (lo, hi) = (mesh.nodes[e], mesh.nodes[e + 1]);
        let jac = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let w = weight(mesh.element_region[e]);
        let (dofs, nloc) = element_dofs(order, e);
        let mut ka = [[0.0; 3]; 3];
        let mut kb = [[0.0; 3]; 3];
        for (&xi, &gw) in gauss.nodes().iter().zip(gauss.weights()) {
            let phi = mid + jac * xi;
            let c = phi.cos();
            if c <= 0.0 {
                return Err(Error::PoleQuadratureFailure { phi });
            }
            let (nv, dn) = shape(order, xi);
            let dx = gw * jac;
            for i in 0..nloc {
                let di = dn[i] / jac;
                for j in 0..nloc {
                    let dj = dn[j] / jac;
                    ka[i][j] += dx * (di * dj * c + m2 * nv[i] * nv[j] / c);
                    kb[i][j] += dx * nv[i] * nv[j] * c;
                }
            }
        }
        for i in 0..nloc {
            let Some(gi) = node_to_dof(dofs[i], n_nodes, mode) else { continue };
            for j in 0..nloc {
                let Some(gj) = node_to_dof(dofs[j], n_nodes, mode) else { continue };
                a.add_assign_at(gi, gj, w * ka[i][j]);
                b.add_assign_at(gi, gj, w * kb[i][j]);
            }
        }
    }
    Ok((a, b))
}

/// Evaluates `f(φ)` and `f′(φ)` from the unknown vector.
pub(crate) fn eval_profile(
    mesh: &LatitudeMesh,
    order: ElementOrder,
    mode: AzimuthalMode,
    coeffs: &[f64],
    phi: f64,
) -> Option<(f64, f64)> {
    let e = mesh.locate(phi)?;
    let (lo, hi) = (mesh.nodes[e], mesh.nodes[e + 1]);
    let jac = 0.5 * (hi - lo);
    let xi = ((phi - 0.5 * (hi + lo)) / jac).clamp(-1.0, 1.0);
    let (nv, dn) = shape(order, xi);
    let (dofs, nloc) = element_dofs(order, e);
    let n_nodes = node_count(order, mesh.n_elements());
    let mut f = 0.0;
    let mut df = 0.0;
    for k in 0..nloc {
        if let Some(g) = node_to_dof(dofs[k], n_nodes, mode) {
            f += nv[k] * coeffs[g];
            df += dn[k] / jac * coeffs[g];
        }
    }
    Some((f, df))
}
