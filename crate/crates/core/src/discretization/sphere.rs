use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64};
use crate::model::{Region, TipGeometry};

pub type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: Vec3) -> Vec3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Latitude of a unit vector (`z` is the polar axis).
pub fn latitude(p: Vec3) -> f64 {
    p[2].clamp(-1.0, 1.0).asin()
}

/// Unit vector at azimuth `theta` and latitude `phi`.
pub fn unit_vector(theta: f64, phi: f64) -> Vec3 {
    [phi.cos() * theta.cos(), phi.cos() * theta.sin(), phi.sin()]
}

/// Labeled triangulation of the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    labels: Vec<Region>,
}

impl SphereMesh {
    /// Validates and builds a mesh. Vertices are renormalized onto the sphere.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, labels: Vec<Region>) -> Result<Self> {
        if triangles.len() != labels.len() {
            return Err(Error::InvalidInput("one label per triangle required".into()));
        }
        let n = vertices.len();
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidInput(format!("triangle {t:?} references a missing vertex")));
        }
        let vertices = vertices.into_iter().map(normalize).collect();
        Ok(SphereMesh {
            vertices,
            triangles,
            labels,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Region label of each triangle.
    pub fn labels(&self) -> &[Region] {
        &self.labels
    }

    fn edges(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                map.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        map
    }

    /// Edges separating differently labeled triangles, sorted.
    pub fn interface_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .edges()
            .into_iter()
            .filter(|(_, ts)| ts.len() == 2 && self.labels[ts[0]] != self.labels[ts[1]])
            .map(|(e, _)| e)
            .collect();
        out.sort_unstable();
        out
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }

    /// Flat area of triangle `t`, signed by orientation against the outward normal.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let n = cross(sub(b, a), sub(c, a));
        let centroid = [a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]];
        0.5 * dot(n, n).sqrt() * dot(n, centroid).signum()
    }

    /// Total flat area per region.
    pub fn region_areas(&self) -> (f64, f64) {
        let mut minus = 0.0;
        let mut plus = 0.0;
        for t in 0..self.triangles.len() {
            let a = self.signed_area(t).abs();
            match self.labels[t] {
                Region::Minus => minus += a,
                Region::Plus => plus += a,
            }
        }
        (minus, plus)
    }

    /// Triangle hit by the ray through `p` and barycentric coordinates of the hit.
    pub fn locate(&self, p: Vec3) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|i| self.vertices[i]);
            let n = cross(sub(b, a), sub(c, a));
            let denom = dot(n, p);
            if denom <= 0.0 {
                continue;
            }
            let s = dot(n, a) / denom;
            let q = [p[0] * s, p[1] * s, p[2] * s];
            let nn = dot(n, n);
            let l0 = dot(cross(sub(b, q), sub(c, q)), n) / nn;
            let l1 = dot(cross(sub(c, q), sub(a, q)), n) / nn;
            let l2 = 1.0 - l0 - l1;
            let worst = l0.min(l1).min(l2);
            if best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((t, [l0, l1, l2], worst));
            }
            if worst >= 0.0 {
                break;
            }
        }
        best.filter(|b| b.2 > -1e-9).map(|(t, l, _)| (t, l))
    }

    /// Midpoint subdivision with projection; children inherit labels.
    pub fn refine(&self) -> SphereMesh {
        let mut vertices = self.vertices.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vs: &mut Vec<Vec3>| -> usize {
            *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (vs[a], vs[b]);
                vs.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                vs.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut labels = Vec::with_capacity(4 * self.triangles.len());
        for (tri, &label) in self.triangles.iter().zip(&self.labels) {
            let [a, b, c] = *tri;
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            for child in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
                triangles.push(child);
                labels.push(label);
            }
        }
        SphereMesh {
            vertices,
            triangles,
            labels,
        }
    }

    /// Renumbers vertices by latitude (then azimuth), which keeps the
    /// assembled matrices banded.
    fn sort_by_latitude(&mut self) {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        let key = |p: Vec3| (p[2], p[1].atan2(p[0]));
        order.sort_by(|&i, &j| {
            let (a, b) = (key(self.vertices[i]), key(self.vertices[j]));
            a.partial_cmp(&b).expect("finite coordinates")
        });
        let mut new_index = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        self.vertices = order.iter().map(|&i| self.vertices[i]).collect();
        for tri in &mut self.triangles {
            *tri = tri.map(|i| new_index[i]);
        }
    }

    /// ASCII mesh format: `SPHEREMESH 1`, then `v x y z` and `t i j k L` lines
    /// (`L = 0` for the negative region).
    pub fn to_text(&self) -> String {
        let mut s = String::from("SPHEREMESH 1\n");
        for v in &self.vertices {
            let _ = writeln!(s, "v {:.17e} {:.17e} {:.17e}", v[0], v[1], v[2]);
        }
        for (t, l) in self.triangles.iter().zip(&self.labels) {
            let code = match l {
                Region::Minus => 0,
                Region::Plus => 1,
            };
            let _ = writeln!(s, "t {} {} {} {}", t[0], t[1], t[2], code);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, reason: &str| Error::MeshFileInvalid {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        match lines.next() {
            Some((_, l)) if l.split_whitespace().collect::<Vec<_>>() == ["SPHEREMESH", "1"] => {}
            Some((i, _)) => return Err(bad(i + 1, "expected header `SPHEREMESH 1`")),
            None => return Err(bad(1, "empty mesh file")),
        }
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in lines {
            let ln = i + 1;
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.first().copied() {
                Some("v") if parts.len() == 4 => {
                    let mut p = [0.0; 3];
                    for k in 0..3 {
                        p[k] = parts[k + 1].parse().map_err(|_| bad(ln, "bad vertex coordinate"))?;
                    }
                    let norm = dot(p, p).sqrt();
                    if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
                        return Err(bad(ln, "vertex is not on the unit sphere"));
                    }
                    vertices.push(p);
                }
                Some("t") if parts.len() == 5 => {
                    let mut t = [0usize; 3];
                    for k in 0..3 {
                        t[k] = parts[k + 1].parse().map_err(|_| bad(ln, "bad vertex index"))?;
                    }
                    let label = match parts[4] {
                        "0" => Region::Minus,
                        "1" => Region::Plus,
                        _ => return Err(bad(ln, "label must be 0 or 1")),
                    };
                    triangles.push(t);
                    labels.push(label);
                }
                _ => return Err(bad(ln, "expected `v x y z` or `t i j k L`")),
            }
        }
        let n = vertices.len();
        if let Some(pos) = triangles.iter().position(|t| t.iter().any(|&i| i >= n)) {
            return Err(bad(0, &format!("triangle {pos} references a missing vertex")));
        }
        if triangles.is_empty() {
            return Err(bad(0, "no triangles"));
        }
        SphereMesh::new(vertices, triangles, labels)
    }
}

fn octahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let v = vec![
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let t = vec![
        [0, 1, 4],
        [1, 2, 4],
        [2, 3, 4],
        [3, 0, 4],
        [1, 0, 5],
        [2, 1, 5],
        [3, 2, 5],
        [0, 3, 5],
    ];
    (v, t)
}

/// Snaps vertices onto the latitude circle `phi_i` until no edge crosses it.
fn snap_to_interface(vertices: &mut [Vec3], triangles: &[[usize; 3]], phi_i: f64) {
    let z_i = phi_i.sin();
    let side = |p: Vec3| {
        let d = p[2] - z_i;
        if d.abs() <= 1e-14 {
            0
        } else if d > 0.0 {
            1
        } else {
            -1
        }
    };
    loop {
        let mut snap = Vec::new();
        for tri in triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if side(vertices[a]) * side(vertices[b]) < 0 {
                    let da = (latitude(vertices[a]) - phi_i).abs();
                    let db = (latitude(vertices[b]) - phi_i).abs();
                    snap.push(if da <= db { a } else { b });
                }
            }
        }
        if snap.is_empty() {
            return;
        }
        for i in snap {
            let p = vertices[i];
            let theta = p[1].atan2(p[0]);
            vertices[i] = unit_vector(theta, phi_i);
            vertices[i][2] = z_i;
        }
    }
}

/// Builds a labeled sphere mesh: octahedral subdivision snapped to the cap
/// boundary for a circular cap, or uniform refinement of a given mesh.
pub fn build_sphere_mesh(geometry: &TipGeometry, refinement: u32) -> Result<SphereMesh> {
    match geometry {
        TipGeometry::GeneralRegion { mesh } => {
            let mut m = (**mesh).clone();
            for _ in 0..refinement {
                m = m.refine();
            }
            check_triangles(&m)?;
            Ok(m)
        }
        TipGeometry::CircularCap { .. } => {
            let phi_i = geometry.phi_interface().expect("cap has an interface");
            let (v, t) = octahedron();
            let mut m = SphereMesh {
                labels: vec![Region::Plus; t.len()],
                vertices: v,
                triangles: t,
            };
            for _ in 0..refinement {
                m = m.refine();
            }
            snap_to_interface(&mut m.vertices, &m.triangles, phi_i);
            let z_i = phi_i.sin();
            m.labels = m
                .triangles
                .iter()
                .map(|tri| {
                    let zs = tri.map(|i| m.vertices[i][2] - z_i);
                    let above = zs.iter().any(|&d| d > 1e-14);
                    let below = zs.iter().any(|&d| d < -1e-14);
                    let up = if above != below {
                        above
                    } else {
                        let c = tri.iter().fold([0.0; 3], |acc, &i| {
                            let p = m.vertices[i];
                            [acc[0] + p[0], acc[1] + p[1], acc[2] + p[2]]
                        });
                        latitude(normalize(c)) > phi_i
                    };
                    if up {
                        Region::Minus
                    } else {
                        Region::Plus
                    }
                })
                .collect();
            m.sort_by_latitude();
            check_triangles(&m)?;
            Ok(m)
        }
    }
}

fn check_triangles(mesh: &SphereMesh) -> Result<()> {
    for t in 0..mesh.triangles.len() {
        let area = mesh.signed_area(t);
        if area < 1e-14 {
            return Err(Error::DegenerateTriangle { index: t, area });
        }
    }
    Ok(())
}

/// P1 stiffness and consistent mass with a per-triangle weight.
pub(crate) fn assemble_forms(
    mesh: &SphereMesh,
    weight: impl Fn(Region) -> C64,
) -> Result<(Matrix<C64>, Matrix<C64>)> {
    check_triangles(mesh)?;
    let n = mesh.vertices.len();
    let mut a = Matrix::<C64>::zeros(n, n);
    let mut b = Matrix::<C64>::zeros(n, n);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.vertices[i]);
        let area = mesh.signed_area(t);
        let w = weight(mesh.labels[t]);
        // Edge opposite vertex k; ∇φ_k · ∇φ_l = e_k · e_l / (4 A²).
        let e = [sub(p[2], p[1]), sub(p[0], p[2]), sub(p[1], p[0])];
        for k in 0..3 {
            for l in 0..3 {
                let kij = dot(e[k], e[l]) / (4.0 * area);
                let mij = area / 12.0 * if k == l { 2.0 } else { 1.0 };
                a.add_assign_at(tri[k], tri[l], w * kij);
                b.add_assign_at(tri[k], tri[l], w * mij);
            }
        }
    }
    Ok((a, b))
}

/// Value and tangential gradient (3D vector in the triangle plane) of a P1 field.
pub(crate) fn eval_p1(mesh: &SphereMesh, coeffs: &[f64], p: Vec3) -> Option<(f64, Vec3)> {
    let (t, l) = mesh.locate(p)?;
    let tri = mesh.triangles[t];
    let v = tri.map(|i| mesh.vertices[i]);
    let value = (0..3).map(|k| l[k] * coeffs[tri[k]]).sum();
    let n = cross(sub(v[1], v[0]), sub(v[2], v[0]));
    let nn = dot(n, n);
    let e = [sub(v[2], v[1]), sub(v[0], v[2]), sub(v[1], v[0])];
    let mut grad = [0.0; 3];
    for k in 0..3 {
        // ∇φ_k = n × e_k / |n|².
        let g = cross(n, e[k]);
        for d in 0..3 {
            grad[d] += coeffs[tri[k]] * g[d] / nn;
        }
    }
    Some((value, grad))
}

/// Azimuthal number of a P1 field: `sqrt(∫|∂_θ u|² / ∫|u|²)`, which is
/// exactly `m` for `u = f(φ) e^{imθ}`.
pub fn azimuthal_number(mesh: &SphereMesh, coeffs: &[C64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let v = tri.map(|i| mesh.vertices[i]);
        let u = tri.map(|i| coeffs[i]);
        let area = mesh.signed_area(t).abs();
        let n = cross(sub(v[1], v[0]), sub(v[2], v[0]));
        let nn = dot(n, n);
        let e = [sub(v[2], v[1]), sub(v[0], v[2]), sub(v[1], v[0])];
        let c = [
            (v[0][0] + v[1][0] + v[2][0]) / 3.0,
            (v[0][1] + v[1][1] + v[2][1]) / 3.0,
            0.0,
        ];
        let t_theta = [-c[1], c[0], 0.0];
        let mut d = C64::new(0.0, 0.0);
        for k in 0..3 {
            d += u[k] * (dot(cross(n, e[k]), t_theta) / nn);
        }
        num += area * d.norm_sqr();
        for k in 0..3 {
            for l in 0..3 {
                let w = if k == l { 2.0 } else { 1.0 };
                den += area / 12.0 * w * (u[k].conj() * u[l]).re;
            }
        }
    }
    (num / den).sqrt()
}
