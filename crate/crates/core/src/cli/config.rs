use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::discretization::ElementOrder;
use crate::error::{Error, Result};
use crate::model::{CutoffFamily, CutoffProfile, Dissipation, Material};
use crate::singularity::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Exponents,
    SweepDelta,
    ScanContrast,
    FluxCheck,
    Validate,
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Command::Exponents,
            Command::SweepDelta,
            Command::ScanContrast,
            Command::FluxCheck,
            Command::Validate,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| Error::ConfigValidation(format!("unknown command {s:?}")))
    }
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Exponents => "exponents",
            Command::SweepDelta => "sweep-delta",
            Command::ScanContrast => "scan-contrast",
            Command::FluxCheck => "flux-check",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// One latitude problem per azimuthal mode (circular caps only).
    #[default]
    Axisym,
    /// P1 elements on the triangulated sphere.
    Sphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub alpha_degrees: Option<f64>,
    /// Labeled mesh file for a general region, relative to the config file.
    pub mesh_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub eps_plus: f64,
    pub eps_minus: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub dissipation: Dissipation,
    /// Allows a positive `eps_minus` (and positive contrasts in scans) for
    /// null-result checks.
    #[serde(default)]
    pub validation_override: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffSection {
    pub r_one: f64,
    pub rho: f64,
    pub family: CutoffFamily,
}

impl Default for CutoffSection {
    fn default() -> Self {
        let p = CutoffProfile::default();
        CutoffSection {
            r_one: p.r_one(),
            rho: p.rho(),
            family: p.family(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub n_elements: usize,
    pub refinement: u32,
    pub element_order: ElementOrder,
    pub m_max: u32,
    pub method: Method,
    pub tolerances: Tolerances,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            n_elements: 256,
            refinement: 4,
            element_order: ElementOrder::P2,
            m_max: 3,
            method: Method::Axisym,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub deltas: Vec<f64>,
    pub kappas: Vec<f64>,
    /// Radii for `flux-check`; defaults to `r_one / 2`.
    pub taus: Vec<f64>,
    /// Azimuthal mode followed by `sweep-delta` and `flux-check`.
    pub mode: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Format,
    /// Optional SVG scatter of the tracked exponents (`sweep-delta`).
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    geometry: Option<GeometrySection>,
    material: Option<MaterialSection>,
    #[serde(default)]
    cutoff: CutoffSection,
    #[serde(default)]
    numerics: NumericsSection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    output: OutputSection,
}

/// A validated run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub geometry: GeometrySection,
    pub material: MaterialSection,
    pub cutoff: CutoffSection,
    pub numerics: NumericsSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
    /// Directory that relative paths in the config resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigValidation(msg.into())
}

/// Parses and validates a TOML run description. `command`, when given,
/// overrides the `command` key of the document.
pub fn parse_config(text: &str, command: Option<Command>) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let command = command.or(raw.command).unwrap_or(Command::Exponents);
    let geometry = raw.geometry.ok_or_else(|| invalid("missing [geometry] section"))?;
    match (&geometry.alpha_degrees, &geometry.mesh_file) {
        (Some(a), None) => {
            if !(*a > 0.0 && *a < 180.0) {
                return Err(invalid(format!("alpha_degrees must lie in (0, 180), got {a}")));
            }
        }
        (None, Some(_)) => {
            if command != Command::Exponents && command != Command::FluxCheck {
                return Err(invalid(format!(
                    "{} needs a circular cap (alpha_degrees)",
                    command.name()
                )));
            }
            if raw.numerics.method != Method::Sphere {
                return Err(invalid("mesh_file requires numerics.method = \"sphere\""));
            }
        }
        _ => return Err(invalid("[geometry] needs exactly one of alpha_degrees or mesh_file")),
    }
    let material = raw.material.ok_or_else(|| invalid("missing [material] section"))?;
    if !material.validation_override {
        Material::new(material.eps_plus, material.eps_minus, material.delta)?;
    } else if !(material.eps_plus > 0.0) {
        return Err(invalid("eps_plus must be positive"));
    }
    if !(material.delta >= 0.0) {
        return Err(Error::NegativeDissipation { delta: material.delta });
    }
    if material.delta != 0.0 && command != Command::SweepDelta {
        return Err(invalid(format!(
            "{} works on the lossless pencil; set delta = 0",
            command.name()
        )));
    }
    CutoffProfile::new(raw.cutoff.r_one, raw.cutoff.rho, raw.cutoff.family)?;
    let n = &raw.numerics;
    if n.n_elements < 4 {
        return Err(invalid(format!("n_elements must be at least 4, got {}", n.n_elements)));
    }
    if n.refinement > 6 {
        return Err(invalid(format!("refinement {} is beyond the dense solver's reach", n.refinement)));
    }
    let t = &n.tolerances;
    for (name, v) in [
        ("critical", t.critical),
        ("degeneracy", t.degeneracy),
        ("eigen", t.eigen),
        ("tracking", t.tracking),
        ("bisection", t.bisection),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("tolerance {name} must be positive, got {v}")));
        }
    }
    let mut sweep = raw.sweep;
    if command == Command::SweepDelta && sweep.deltas.is_empty() {
        sweep.deltas = vec![material.delta];
    }
    match command {
        Command::SweepDelta => {
            if let Some(&d) = sweep.deltas.iter().find(|d| !(**d >= 0.0)) {
                return Err(invalid(format!("deltas must be nonnegative, got {d}")));
            }
            if sweep.deltas.windows(2).any(|w| !(w[0] <= w[1])) {
                return Err(invalid("deltas must be sorted ascending"));
            }
        }
        Command::ScanContrast => {
            if sweep.kappas.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(invalid("kappas must be strictly increasing"));
            }
            if !material.validation_override && sweep.kappas.iter().any(|k| !(*k < 0.0)) {
                return Err(invalid("kappas must be negative"));
            }
        }
        Command::FluxCheck => {
            if let Some(&t) = sweep.taus.iter().find(|t| !(**t > 0.0 && **t <= raw.cutoff.r_one)) {
                return Err(invalid(format!("tau {t} is outside (0, r_one]")));
            }
        }
        Command::Exponents | Command::Validate => {}
    }
    if matches!(command, Command::SweepDelta | Command::FluxCheck) && n.method == Method::Axisym && sweep.mode > n.m_max {
        return Err(invalid(format!("sweep mode {} exceeds m_max {}", sweep.mode, n.m_max)));
    }
    Ok(RunConfig {
        command,
        geometry,
        material,
        cutoff: raw.cutoff,
        numerics: raw.numerics,
        sweep,
        output: raw.output,
        base_dir: PathBuf::new(),
    })
}

/// Reads and parses a config file; relative paths inside resolve against its directory.
pub fn load_config(path: &Path, command: Option<Command>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut config = parse_config(&text, command)?;
    config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(config)
}

impl RunConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn material_model(&self) -> Result<Material> {
        let m = &self.material;
        let base = if m.validation_override {
            Material::validation_override(m.eps_plus, m.eps_minus, m.delta)
        } else {
            Material::new(m.eps_plus, m.eps_minus, m.delta)?
        };
        Ok(base.with_dissipation(m.dissipation))
    }

    pub fn cutoff_profile(&self) -> Result<CutoffProfile> {
        CutoffProfile::new(self.cutoff.r_one, self.cutoff.rho, self.cutoff.family)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[geometry]\nalpha_degrees = 120\n[material]\neps_plus = 1\neps_minus = -1.9\n";

    #[test]
    fn defaults_are_filled() {
        let c = parse_config(MINIMAL, None).unwrap();
        assert_eq!(c.command, Command::Exponents);
        assert_eq!(c.numerics.n_elements, 256);
        assert_eq!(c.numerics.refinement, 4);
        assert_eq!(c.numerics.m_max, 3);
        assert_eq!(c.numerics.tolerances, Tolerances::default());
        assert_eq!(c.material_model().unwrap().kappa(), -1.9);
    }

    #[test]
    fn missing_material_is_a_validation_error() {
        let err = parse_config("[geometry]\nalpha_degrees = 120\n", None).unwrap_err();
        assert!(matches!(err, Error::ConfigValidation(_)));
    }

    #[test]
    fn unsorted_deltas_are_rejected() {
        let text = format!("{MINIMAL}[sweep]\ndeltas = [0.1, 0.0]\n");
        let err = parse_config(&text, Some(Command::SweepDelta)).unwrap_err();
        assert!(matches!(err, Error::ConfigValidation(_)));
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let text = "[geometry]\nalpha_degrees = 120\n[material]\neps_plus = = 1\n";
        match parse_config(text, None).unwrap_err() {
            Error::ConfigParse { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e:?}"),
        }
        let text = format!("{MINIMAL}[numerics]\nn_elemnts = 12\n");
        match parse_config(&text, None).unwrap_err() {
            Error::ConfigParse { line, message } => {
                assert_eq!(line, 7);
                assert!(message.contains("n_elemnts"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn command_line_overrides_document() {
        let text = format!("command = \"validate\"\n{MINIMAL}");
        assert_eq!(parse_config(&text, None).unwrap().command, Command::Validate);
        assert_eq!(
            parse_config(&text, Some(Command::Exponents)).unwrap().command,
            Command::Exponents
        );
    }
}
