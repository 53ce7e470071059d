//! Black-hole exponents `λ = −1/2 ± iη`: detection, outgoing selection,
//! Kondratiev window, first-order dissipation slope, δ-sweeps and contrast
//! scans.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{
    assemble_axisym, build_latitude_mesh, Discretization, ElementOrder, FieldValue, WeightedPencil,
};
use crate::eigensolver::{eigenpair, mu_to_lambda, pencil_eigenvalues, EigenSolution};
use crate::error::{Error, Result};
use crate::linalg::{dot_t, Matrix, C64};
use crate::model::{make_cap_geometry, AzimuthalMode, Material};

/// Solver tolerances shared by the pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Bound on `|Im μ|` for a pair to count as lying on the critical line.
    pub critical: f64,
    /// Relative `|D|` threshold below which the outgoing choice is degenerate.
    pub degeneracy: f64,
    /// Residual bound for eigenpairs.
    pub eigen: f64,
    /// Relative separation below which two continuation candidates are ambiguous.
    pub tracking: f64,
    /// Final κ-bracket width when bisecting interval endpoints.
    pub bisection: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            critical: 1e-6,
            degeneracy: 1e-8,
            eigen: 1e-10,
            tracking: 1e-8,
            bisection: 1e-3,
        }
    }
}

/// Non-fatal conditions collected during a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "code", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Warning {
    /// More than one distinct `|η|` was found.
    Multiplicity { etas: Vec<f64> },
    /// `|D|` vanishes for the detected pair.
    EndpointDegeneracy { kappa: f64, d: f64 },
    /// `β₀ − √δ ≤ 0`, so the exponent window is empty.
    WindowEmpty { delta: f64 },
}

impl Warning {
    pub fn code(&self) -> &'static str {
        match self {
            Warning::Multiplicity { .. } => "MULTIPLICITY",
            Warning::EndpointDegeneracy { .. } => "ENDPOINT_DEGENERACY",
            Warning::WindowEmpty { .. } => "WINDOW_EMPTY",
        }
    }
}

/// Sign of `η` that makes the singular function outgoing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Plus,
    Minus,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Plus => 1.0,
            Orientation::Minus => -1.0,
        }
    }
}

/// A black-hole pair with its real eigenfunction.
#[derive(Debug, Clone)]
pub struct SingularExponent {
    /// `|η| > 0`.
    pub eta: f64,
    /// `−η² − 1/4`.
    pub mu: f64,
    /// Real eigenfunction coefficients with `∫|Φ|² = 1`.
    pub phi: Vec<f64>,
    /// `∫ ε|Φ|²`.
    pub d: f64,
    pub orientation: Orientation,
    pub beta0: f64,
    pub beta_max: f64,
    pub discretization: Discretization,
    /// Material of the lossless pencil the pair came from.
    pub material: Material,
}

impl SingularExponent {
    /// Signed `η` of the outgoing function, so that `eta_out · D > 0` once selected.
    pub fn eta_out(&self) -> f64 {
        self.orientation.sign() * self.eta
    }

    /// Exponent `−1/2 + i·eta_out` of `s⁺`.
    pub fn lambda(&self) -> C64 {
        C64::new(-0.5, self.eta_out())
    }

    pub fn mode(&self) -> Option<AzimuthalMode> {
        self.discretization.mode()
    }

    /// `Φ(θ, φ)` and its angular derivatives.
    pub fn eval_phi(&self, theta: f64, phi: f64) -> Result<FieldValue> {
        self.discretization.eval(&self.phi, theta, phi)
    }

    /// Same exponent with `Φ ↦ −Φ`.
    pub fn negated(&self) -> Self {
        let mut s = self.clone();
        s.phi.iter_mut().for_each(|v| *v = -*v);
        s
    }

    fn set_window(&mut self, beta0: f64) {
        self.beta0 = beta0;
        self.beta_max = beta0.min(0.5);
    }
}

/// Result of [`find_black_hole_pairs`].
#[derive(Debug, Clone)]
pub struct PairSearch {
    pub pairs: Vec<SingularExponent>,
    /// Set when more than one distinct `|η|` exists.
    pub multiplicity_warning: bool,
}

/// Turns a complex eigenvector of a real pencil into a real field with
/// `∫|Φ|² = 1`.
fn real_normalized(disc: &Discretization, unit_mass: &Matrix<C64>, x: &[C64]) -> Vec<f64> {
    let pivot = x
        .iter()
        .copied()
        .fold(C64::new(0.0, 0.0), |acc, v| if v.norm() > acc.norm() { v } else { acc });
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
    let mut phi: Vec<f64> = x.iter().map(|&v| (v * phase).re).collect();
    let xc: Vec<C64> = phi.iter().map(|&v| C64::new(v, 0.0)).collect();
    let norm2 = disc.angular_measure() * dot_t(&xc, &unit_mass.matvec(&xc)).re;
    let s = 1.0 / norm2.sqrt();
    phi.iter_mut().for_each(|v| *v *= s);
    phi
}

/// Extracts every pair `μ < −1/4` with `|Im μ| ≤ tol` from a lossless spectrum.
///
/// `solutions` must carry eigenvectors of `pencil`. The orientation is left
/// at `Plus`; use [`select_outgoing`] to fix it. Pairs come sorted by increasing `η`.
pub fn find_black_hole_pairs(
    pencil: &WeightedPencil,
    material: &Material,
    solutions: &[EigenSolution],
    tol: f64,
) -> Result<PairSearch> {
    let disc = &pencil.discretization;
    let mut pairs = Vec::new();
    let mut unit_mass = None;
    for s in solutions {
        if s.mu.im.abs() > tol || s.mu.re >= -0.25 - tol {
            continue;
        }
        let mass = match &unit_mass {
            Some(m) => m,
            None => {
                let (_, m) = disc.assemble_weighted(|_| C64::new(1.0, 0.0))?;
                unit_mass.insert(m)
            }
        };
        let phi = real_normalized(disc, mass, &s.vector);
        let xc: Vec<C64> = phi.iter().map(|&v| C64::new(v, 0.0)).collect();
        let d = disc.angular_measure() * dot_t(&xc, &pencil.b.matvec(&xc)).re;
        let mu = s.mu.re;
        pairs.push(SingularExponent {
            eta: (-mu - 0.25).sqrt(),
            mu,
            phi,
            d,
            orientation: Orientation::Plus,
            beta0: f64::NAN,
            beta_max: f64::NAN,
            discretization: disc.clone(),
            material: *material,
        });
    }
    pairs.sort_by(|p, q| p.eta.total_cmp(&q.eta));
    let distinct = pairs
        .windows(2)
        .filter(|w| (w[0].eta - w[1].eta).abs() > 1e-6 * w[0].eta)
        .count()
        + usize::from(!pairs.is_empty());
    Ok(PairSearch {
        multiplicity_warning: distinct > 1,
        pairs,
    })
}

/// Fixes the sign of `η` so that `η·D > 0`.
pub fn select_outgoing(candidate: &SingularExponent, tol_d: f64) -> Result<SingularExponent> {
    if !(candidate.d.abs() >= tol_d) {
        return Err(Error::EndpointDegeneracy { d: candidate.d });
    }
    let mut out = candidate.clone();
    out.orientation = if candidate.d > 0.0 { Orientation::Plus } else { Orientation::Minus };
    Ok(out)
}

/// Kondratiev window from a lossless spectrum: `β₀` is the smallest
/// `|Re λ + 1/2|` over exponents off the critical line, `β_max = min(1/2, β₀)`.
pub fn compute_beta0(mus: &[C64], tol: f64) -> Result<(f64, f64)> {
    let beta0 = mus
        .iter()
        .map(|&mu| mu_to_lambda(mu).1.re + 0.5)
        .map(f64::abs)
        .filter(|&g| g > tol)
        .fold(f64::INFINITY, f64::min);
    if !beta0.is_finite() {
        return Err(Error::NoSpectralGap);
    }
    Ok((beta0, beta0.min(0.5)))
}

/// First-order drift `λ′` of the outgoing exponent under `ε ↦ ε + iδ w`,
/// where `w` is the dissipation weight of the material.
pub fn perturbation_slope(exponent: &SingularExponent, tol_d: f64) -> Result<C64> {
    if !(exponent.d.abs() >= tol_d) {
        return Err(Error::EndpointDegeneracy { d: exponent.d });
    }
    if exponent.eta_out() * exponent.d <= 0.0 {
        return Err(Error::InvalidInput("exponent is not outgoing (η·D ≤ 0)".into()));
    }
    let material = &exponent.material;
    let (k, m) = exponent
        .discretization
        .assemble_weighted(|r| C64::new(material.dissipation_weight(r), 0.0))?;
    let x: Vec<C64> = exponent.phi.iter().map(|&v| C64::new(v, 0.0)).collect();
    let c = exponent.discretization.angular_measure();
    let stiff = dot_t(&x, &k.matvec(&x)) * c;
    let mass = dot_t(&x, &m.matvec(&x)) * c;
    let eta = exponent.eta;
    Ok((stiff + mass * (eta * eta + 0.25)) / (2.0 * exponent.eta_out() * exponent.d))
}

/// Everything known about one lossless pencil.
#[derive(Debug, Clone)]
pub struct ModeAnalysis {
    pub discretization: Discretization,
    /// Spectrum in canonical order.
    pub mus: Vec<C64>,
    /// Selected outgoing pairs with `β₀` filled in, smallest `η` first.
    /// Pairs with `η` of the order of the inverse mesh size are
    /// discretization artifacts, so the first pair is the best resolved.
    pub pairs: Vec<SingularExponent>,
    pub warnings: Vec<Warning>,
}

/// Solves a lossless pencil and extracts its outgoing black-hole pairs.
///
/// Only the candidate eigenvectors are computed. A pair with `|D|` below the
/// degeneracy threshold is dropped and reported as a warning.
pub fn analyze_pencil(pencil: &WeightedPencil, material: &Material, tol: &Tolerances) -> Result<ModeAnalysis> {
    let mus = pencil_eigenvalues(&pencil.a, &pencil.b)?;
    let mut solutions = Vec::new();
    for &mu in &mus {
        if mu.im.abs() <= tol.critical && mu.re < -0.25 - tol.critical {
            solutions.push(eigenpair(&pencil.a, &pencil.b, C64::new(mu.re, 0.0), tol.eigen)?);
        }
    }
    let search = find_black_hole_pairs(pencil, material, &solutions, tol.critical)?;
    let mut warnings = Vec::new();
    if search.multiplicity_warning {
        warnings.push(Warning::Multiplicity {
            etas: search.pairs.iter().map(|p| p.eta).collect(),
        });
    }
    let mut pairs = Vec::new();
    if !search.pairs.is_empty() {
        let (beta0, _) = compute_beta0(&mus, tol.critical)?;
        for cand in &search.pairs {
            match select_outgoing(cand, tol.degeneracy) {
                Ok(mut p) => {
                    p.set_window(beta0);
                    pairs.push(p);
                }
                Err(Error::EndpointDegeneracy { d }) => warnings.push(Warning::EndpointDegeneracy {
                    kappa: material.kappa(),
                    d,
                }),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(ModeAnalysis {
        discretization: pencil.discretization.clone(),
        mus,
        pairs,
        warnings,
    })
}

/// One row of a limiting-absorption sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSweepRow {
    pub delta: f64,
    pub lambda_delta: [f64; 2],
    /// `η^δ` with `λ^δ = −1/2 + iη^δ`, as `[re, im]`.
    pub eta_delta: [f64; 2],
    pub in_window: bool,
    pub tracking_distance: f64,
}

impl DeltaSweepRow {
    pub fn lambda(&self) -> C64 {
        C64::new(self.lambda_delta[0], self.lambda_delta[1])
    }
}

#[derive(Debug, Clone)]
pub struct DeltaSweep {
    pub rows: Vec<DeltaSweepRow>,
    pub warnings: Vec<Warning>,
}

/// Follows the outgoing exponent of `anchor` as dissipation `δ` increases.
///
/// Spectra for the different `δ` are independent and computed in parallel;
/// continuation then picks, for each `δ` in order, the exponent with
/// `Re λ > −1/2` nearest to the previous one.
pub fn sweep_delta(anchor: &SingularExponent, deltas: &[f64], tol: &Tolerances) -> Result<DeltaSweep> {
    if deltas.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidInput("delta list must be sorted ascending".into()));
    }
    if let Some(&d) = deltas.iter().find(|d| !(**d >= 0.0)) {
        return Err(Error::NegativeDissipation { delta: d });
    }
    let disc = &anchor.discretization;
    let spectra: Vec<Option<Vec<C64>>> = deltas
        .par_iter()
        .map(|&delta| {
            if delta == 0.0 {
                return Ok(None);
            }
            let material = anchor.material.with_delta(delta)?;
            let (a, b) = disc.assemble_weighted(|r| material.eps(r))?;
            pencil_eigenvalues(&a, &b).map(Some)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(deltas.len());
    let mut warnings = Vec::new();
    let mut prev = anchor.lambda();
    for (&delta, spectrum) in deltas.iter().zip(spectra) {
        let (lambda, distance) = match spectrum {
            None => (anchor.lambda(), 0.0),
            Some(mus) => {
                let mut candidates: Vec<(C64, f64)> = mus
                    .into_iter()
                    .flat_map(|mu| {
                        let (lm, lp) = mu_to_lambda(mu);
                        [lm, lp]
                    })
                    .filter(|l| l.re > -0.5)
                    .map(|l| (l, (l - prev).norm()))
                    .collect();
                candidates.sort_by(|p, q| p.1.total_cmp(&q.1));
                let best = candidates.first().copied();
                let second = candidates.get(1).map_or(f64::INFINITY, |c| c.1);
                let (l, d) = best.ok_or_else(|| {
                    Error::NoConvergence(format!("no exponent with Re λ > -1/2 at delta = {delta}"))
                })?;
                if second - d <= tol.tracking * (1.0 + l.norm()) {
                    return Err(Error::TrackingAmbiguity {
                        delta,
                        separation: second - d,
                    });
                }
                (l, d)
            }
        };
        let margin = anchor.beta0 - delta.sqrt();
        if margin <= 0.0 {
            warnings.push(Warning::WindowEmpty { delta });
        }
        let shifted = lambda.re + 0.5;
        let in_window = shifted > 0.0 && shifted < margin;
        let eta = (lambda + 0.5) * C64::new(0.0, -1.0);
        rows.push(DeltaSweepRow {
            delta,
            lambda_delta: [lambda.re, lambda.im],
            eta_delta: [eta.re, eta.im],
            in_window,
            tracking_distance: distance,
        });
        prev = lambda;
    }
    Ok(DeltaSweep { rows, warnings })
}

/// Axisymmetric discretization settings used by the contrast scanner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisymSettings {
    pub n_elements: usize,
    pub order: ElementOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastRow {
    pub kappa: f64,
    pub mode: u32,
    pub eta: Option<f64>,
    pub d: Option<f64>,
}

/// A bracket `[lo, hi]` in κ across which a pair appears or disappears.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalEndpoint {
    pub mode: u32,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    /// κ on the side of the bracket where the pair exists.
    pub kappa_inside: f64,
    pub eta_inside: f64,
    pub d_inside: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastScanResult {
    pub alpha: f64,
    pub rows: Vec<ContrastRow>,
    pub endpoints: Vec<IntervalEndpoint>,
    #[serde(skip)]
    pub warnings: Vec<Warning>,
}

fn cap_pencil(alpha: f64, kappa: f64, mode: AzimuthalMode, settings: AxisymSettings) -> Result<(WeightedPencil, Material)> {
    let geometry = make_cap_geometry(alpha)?;
    let mesh = Arc::new(build_latitude_mesh(&geometry, settings.n_elements)?);
    let material = if kappa < 0.0 {
        Material::new(1.0, kappa, 0.0)?
    } else {
        Material::validation_override(1.0, kappa, 0.0)
    };
    let pencil = assemble_axisym(mesh, &material, mode, settings.order)?;
    Ok((pencil, material))
}

fn has_pair(mus: &[C64], tol: f64) -> bool {
    mus.iter().any(|mu| mu.im.abs() <= tol && mu.re < -0.25 - tol)
}

/// Presence, `η` and `D` of the leading pair at one `(κ, m)`.
fn probe(alpha: f64, kappa: f64, mode: AzimuthalMode, settings: AxisymSettings, tol: &Tolerances) -> Result<(ContrastRow, Vec<Warning>)> {
    let (pencil, material) = cap_pencil(alpha, kappa, mode, settings)?;
    let analysis = analyze_pencil(&pencil, &material, tol)?;
    let lead = analysis.pairs.first();
    let degenerate = analysis
        .warnings
        .iter()
        .any(|w| matches!(w, Warning::EndpointDegeneracy { .. }));
    let row = ContrastRow {
        kappa,
        mode: mode.m(),
        eta: lead.map(|p| p.eta).or(if degenerate { Some(0.0) } else { None }),
        d: lead.map(|p| p.d),
    };
    Ok((row, analysis.warnings))
}

/// Scans a κ grid for black-hole pairs per azimuthal mode and brackets the
/// ends of each critical interval by bisection.
pub fn scan_contrast(
    alpha: f64,
    kappa_grid: &[f64],
    modes: &[AzimuthalMode],
    settings: AxisymSettings,
    tol: &Tolerances,
) -> Result<ContrastScanResult> {
    if kappa_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("kappa grid must be strictly increasing".into()));
    }
    make_cap_geometry(alpha)?;
    let tasks: Vec<(AzimuthalMode, f64)> = modes
        .iter()
        .flat_map(|&m| kappa_grid.iter().map(move |&k| (m, k)))
        .collect();
    let probed: Vec<(ContrastRow, Vec<Warning>)> = tasks
        .par_iter()
        .map(|&(m, k)| probe(alpha, k, m, settings, tol))
        .collect::<Result<_>>()?;
    let mut warnings: Vec<Warning> = probed.iter().flat_map(|(_, w)| w.clone()).collect();
    let rows: Vec<ContrastRow> = probed.into_iter().map(|(r, _)| r).collect();

    let mut brackets = Vec::new();
    for (mi, &m) in modes.iter().enumerate() {
        let slice = &rows[mi * kappa_grid.len()..(mi + 1) * kappa_grid.len()];
        for w in slice.windows(2) {
            if w[0].eta.is_some() != w[1].eta.is_some() {
                brackets.push((m, w[0].kappa, w[1].kappa, w[0].eta.is_some()));
            }
        }
    }
    let endpoints: Vec<(IntervalEndpoint, Vec<Warning>)> = brackets
        .par_iter()
        .map(|&(m, lo, hi, lo_has)| -> Result<(IntervalEndpoint, Vec<Warning>)> {
            let (mut lo, mut hi) = (lo, hi);
            while hi - lo > tol.bisection {
                let mid = 0.5 * (lo + hi);
                let (pencil, _) = cap_pencil(alpha, mid, m, settings)?;
                let present = has_pair(&pencil_eigenvalues(&pencil.a, &pencil.b)?, tol.critical);
                if present == lo_has {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let inside = if lo_has { lo } else { hi };
            let (row, warnings) = probe(alpha, inside, m, settings, tol)?;
            Ok((
                IntervalEndpoint {
                    mode: m.m(),
                    kappa_lo: lo,
                    kappa_hi: hi,
                    kappa_inside: inside,
                    eta_inside: row.eta.unwrap_or(f64::NAN),
                    d_inside: row.d.unwrap_or(f64::NAN),
                },
                warnings,
            ))
        })
        .collect::<Result<_>>()?;
    let endpoints = endpoints
        .into_iter()
        .map(|(e, w)| {
            warnings.extend(w);
            e
        })
        .collect();
    Ok(ContrastScanResult {
        alpha,
        rows,
        endpoints,
        warnings,
    })
}
