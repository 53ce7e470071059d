//! Config-driven runs and their tabular output.

mod config;
mod table;
pub mod validation;

use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Value};

pub use config::{
    load_config, parse_config, Command, CutoffSection, Format, GeometrySection, MaterialSection, Method,
    NumericsSection, OutputSection, RunConfig, SweepSection,
};
pub use table::{format_float, parse_csv, scatter_svg, write_table, Cell, ParsedCsv, SweepTable};

use crate::discretization::{
    assemble_axisym, assemble_sphere, build_latitude_mesh, build_sphere_mesh, ElementOrder, SphereMesh,
    WeightedPencil,
};
use crate::error::{Error, Result};
use crate::flux::flux_report;
use crate::model::{make_cap_geometry, AzimuthalMode, Material, TipGeometry};
use crate::singularity::{analyze_pencil, perturbation_slope, scan_contrast, sweep_delta, AxisymSettings, Warning};
use validation::{axisym_harmonics, observed_order, oracle_comparison, sphere_harmonics, OracleSettings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_WARNING: i32 = 2;

/// Column schema of each command.
pub fn columns(command: Command) -> &'static [&'static str] {
    match command {
        Command::Exponents => &["mode_m", "eta", "D", "beta0", "beta_max", "lambda_prime"],
        Command::SweepDelta => &[
            "delta",
            "re_lambda",
            "im_lambda",
            "re_eta",
            "im_eta",
            "in_window",
            "tracking_distance",
        ],
        Command::ScanContrast => &["kappa", "mode_m", "eta_or_empty", "D"],
        Command::FluxCheck => &[
            "tau",
            "re_surface",
            "im_surface",
            "re_volume",
            "im_volume",
            "eta_D",
            "residual_identity",
        ],
        Command::Validate => &["check", "computed", "expected", "rel_error", "passed"],
    }
}

/// Table and exit status of a finished run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: SweepTable,
    pub exit_code: i32,
    pub warnings: Vec<Warning>,
    /// Set when the run aborted; the table then carries only the header.
    pub error: Option<Error>,
}

struct Outcome {
    warnings: Vec<Warning>,
    failed_checks: usize,
}

/// Runs the pipeline selected by `config.command`.
///
/// Errors do not escape: they are recorded in the table header with their
/// machine-readable code, and the exit code becomes 1.
pub fn run_command(config: &RunConfig) -> RunOutput {
    let mut table = SweepTable::new(config.command.name(), columns(config.command));
    table.push_header("config", serde_json::to_value(config).unwrap_or(Value::Null));
    match execute(config, &mut table) {
        Ok(outcome) => {
            if !outcome.warnings.is_empty() {
                let w = serde_json::to_value(&outcome.warnings).unwrap_or(Value::Null);
                table.push_header("warnings", w);
            }
            let degenerate = outcome
                .warnings
                .iter()
                .any(|w| matches!(w, Warning::EndpointDegeneracy { .. } | Warning::WindowEmpty { .. }));
            let exit_code = if outcome.failed_checks > 0 {
                EXIT_ERROR
            } else if degenerate {
                EXIT_WARNING
            } else {
                EXIT_OK
            };
            RunOutput {
                table,
                exit_code,
                warnings: outcome.warnings,
                error: None,
            }
        }
        Err(e) => {
            log::error!("{} failed: {e}", config.command.name());
            table.rows.clear();
            table.push_header("error", json!({ "code": e.code(), "message": e.to_string() }));
            RunOutput {
                table,
                exit_code: EXIT_ERROR,
                warnings: Vec::new(),
                error: Some(e),
            }
        }
    }
}

/// Writes the table (and the optional SVG) where the config asks.
pub fn emit(config: &RunConfig, output: &RunOutput, out: Option<&Path>, format: Format) -> Result<()> {
    let path = out.map(Path::to_path_buf).or_else(|| config.output.path.as_ref().map(|p| config.resolve(p)));
    write_table(&output.table, format, path.as_deref())?;
    if let (Some(svg), Command::SweepDelta) = (&config.output.svg, config.command) {
        let points: Vec<(f64, f64)> = (0..output.table.rows.len())
            .filter_map(|i| {
                let re = output.table.get(i, "re_lambda")?.as_f64()?;
                let im = output.table.get(i, "im_lambda")?.as_f64()?;
                Some((re, im))
            })
            .collect();
        let path = config.resolve(svg);
        std::fs::write(&path, scatter_svg(&points, "Re lambda", "Im lambda"))
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn geometry(config: &RunConfig) -> Result<TipGeometry> {
    match (&config.geometry.alpha_degrees, &config.geometry.mesh_file) {
        (Some(a), _) => make_cap_geometry(a.to_radians()),
        (None, Some(file)) => {
            let path = config.resolve(file);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            TipGeometry::general(Arc::new(SphereMesh::parse(&text)?))
        }
        (None, None) => Err(Error::ConfigValidation("no geometry given".into())),
    }
}

/// One pencil per requested mode (axisymmetric) or a single sphere pencil.
fn pencils(config: &RunConfig, material: &Material, modes: &[u32], table: &mut SweepTable) -> Result<Vec<WeightedPencil>> {
    let geometry = geometry(config)?;
    let n = &config.numerics;
    let out = match n.method {
        config::Method::Axisym => {
            let mesh = Arc::new(build_latitude_mesh(&geometry, n.n_elements)?);
            modes
                .iter()
                .map(|&m| assemble_axisym(mesh.clone(), material, AzimuthalMode(m), n.element_order))
                .collect::<Result<Vec<_>>>()?
        }
        config::Method::Sphere => {
            let mesh = Arc::new(build_sphere_mesh(&geometry, n.refinement)?);
            vec![assemble_sphere(mesh, material)?]
        }
    };
    table.push_header("dofs", json!(out.iter().map(WeightedPencil::dim).collect::<Vec<_>>()));
    Ok(out)
}

fn execute(config: &RunConfig, table: &mut SweepTable) -> Result<Outcome> {
    let tol = config.numerics.tolerances;
    let mut warnings = Vec::new();
    let mut failed_checks = 0;
    match config.command {
        Command::Exponents => {
            let material = config.material_model()?;
            let modes: Vec<u32> = (0..=config.numerics.m_max).collect();
            for pencil in pencils(config, &material, &modes, table)? {
                let analysis = analyze_pencil(&pencil, &material, &tol)?;
                warnings.extend(analysis.warnings);
                for pair in &analysis.pairs {
                    let slope = perturbation_slope(pair, tol.degeneracy)?;
                    table.push_row(vec![
                        pair.mode().map_or(Cell::Empty, |m| Cell::Int(m.m() as i64)),
                        Cell::Float(pair.eta_out()),
                        Cell::Float(pair.d),
                        Cell::Float(pair.beta0),
                        Cell::Float(pair.beta_max),
                        Cell::Float(slope.re),
                    ]);
                }
            }
        }
        Command::SweepDelta => {
            let material = config.material_model()?.with_delta(0.0)?;
            let pencil = pencils(config, &material, &[config.sweep.mode], table)?.remove(0);
            let analysis = analyze_pencil(&pencil, &material, &tol)?;
            warnings.extend(analysis.warnings);
            let anchor = analysis.pairs.first().ok_or(Error::NoBlackHolePair)?;
            table.push_header("anchor_eta", json!(anchor.eta_out()));
            table.push_header("beta0", json!(anchor.beta0));
            let sweep = sweep_delta(anchor, &config.sweep.deltas, &tol)?;
            warnings.extend(sweep.warnings);
            for row in &sweep.rows {
                table.push_row(vec![
                    Cell::Float(row.delta),
                    Cell::Float(row.lambda_delta[0]),
                    Cell::Float(row.lambda_delta[1]),
                    Cell::Float(row.eta_delta[0]),
                    Cell::Float(row.eta_delta[1]),
                    Cell::Bool(row.in_window),
                    Cell::Float(row.tracking_distance),
                ]);
            }
        }
        Command::ScanContrast => {
            let alpha = geometry(config)?
                .alpha()
                .ok_or(Error::GeometryKindMismatch)?;
            let modes: Vec<AzimuthalMode> = (0..=config.numerics.m_max).map(AzimuthalMode).collect();
            let settings = AxisymSettings {
                n_elements: config.numerics.n_elements,
                order: config.numerics.element_order,
            };
            let scan = scan_contrast(alpha, &config.sweep.kappas, &modes, settings, &tol)?;
            warnings.extend(scan.warnings.iter().cloned());
            table.push_header("endpoints", serde_json::to_value(&scan.endpoints).unwrap_or(Value::Null));
            for row in &scan.rows {
                table.push_row(vec![
                    Cell::Float(row.kappa),
                    Cell::Int(row.mode as i64),
                    row.eta.map_or(Cell::Empty, Cell::Float),
                    row.d.map_or(Cell::Empty, Cell::Float),
                ]);
            }
        }
        Command::FluxCheck => {
            let material = config.material_model()?;
            let cutoff = config.cutoff_profile()?;
            let pencil = pencils(config, &material, &[config.sweep.mode], table)?.remove(0);
            let analysis = analyze_pencil(&pencil, &material, &tol)?;
            warnings.extend(analysis.warnings);
            let exponent = analysis.pairs.first().ok_or(Error::NoBlackHolePair)?;
            let taus = if config.sweep.taus.is_empty() {
                vec![cutoff.r_one() / 2.0]
            } else {
                config.sweep.taus.clone()
            };
            for tau in taus {
                let r = flux_report(exponent, &cutoff, tau, tol.degeneracy)?;
                table.push_row(vec![
                    Cell::Float(r.tau),
                    Cell::Float(r.surface_flux[0]),
                    Cell::Float(r.surface_flux[1]),
                    Cell::Float(r.volume_integral[0]),
                    Cell::Float(r.volume_integral[1]),
                    Cell::Float(r.eta_d),
                    Cell::Float(r.residual_identity),
                ]);
            }
        }
        Command::Validate => {
            failed_checks = validate(config, table)?;
        }
    }
    Ok(Outcome {
        warnings,
        failed_checks,
    })
}

/// Relative error, or absolute error against a zero reference.
fn rel_error(computed: f64, expected: f64) -> f64 {
    let e = (computed - expected).abs();
    if expected == 0.0 {
        e
    } else {
        e / expected.abs()
    }
}

fn check_row(table: &mut SweepTable, name: String, computed: f64, expected: f64, err: f64, passed: bool) -> usize {
    table.push_row(vec![
        Cell::Text(name),
        Cell::Float(computed),
        Cell::Float(expected),
        Cell::Float(err),
        Cell::Bool(passed),
    ]);
    usize::from(!passed)
}

/// Runs the harmonic and oracle checks; returns the number of failed checks.
fn validate(config: &RunConfig, table: &mut SweepTable) -> Result<usize> {
    const EXACT: [f64; 4] = [0.0, 2.0, 6.0, 12.0];
    const SPHERE_EXACT: [f64; 9] = [0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0];
    const VALUE_TOL: f64 = 2e-2;
    const MIN_ORDER: f64 = 1.8;
    let n = &config.numerics;
    let geometry = geometry(config)?;
    let mut failed = 0;

    // Axisymmetric P1 path at N and 2N elements.
    let n0 = n.n_elements;
    let coarse = axisym_harmonics(&geometry, n0, ElementOrder::P1, EXACT.len())?;
    let fine = axisym_harmonics(&geometry, 2 * n0, ElementOrder::P1, EXACT.len())?;
    for (l, &exact) in EXACT.iter().enumerate() {
        for (mus, nn) in [(&coarse, n0), (&fine, 2 * n0)] {
            let err = rel_error(mus[l], exact);
            let ok = if exact == 0.0 { err <= 1e-8 } else { err <= VALUE_TOL };
            failed += check_row(table, format!("axisym_p1_n{nn}_mu{l}"), mus[l], exact, err, ok);
        }
        if exact != 0.0 {
            let order = observed_order((coarse[l] - exact).abs(), (fine[l] - exact).abs());
            failed += check_row(
                table,
                format!("axisym_p1_order_mu{l}"),
                order,
                2.0,
                rel_error(order, 2.0),
                order >= MIN_ORDER,
            );
        }
    }

    // Full-sphere P1 at the configured refinement and one level below.
    let level = n.refinement;
    let fine = sphere_harmonics(&geometry, level, SPHERE_EXACT.len())?;
    let coarse = if level > 0 {
        Some(sphere_harmonics(&geometry, level - 1, SPHERE_EXACT.len())?)
    } else {
        None
    };
    for (i, &exact) in SPHERE_EXACT.iter().enumerate() {
        let err = rel_error(fine[i], exact);
        let ok = if exact == 0.0 { err <= 1e-8 } else { err <= VALUE_TOL };
        failed += check_row(table, format!("sphere_r{level}_mu{i}"), fine[i], exact, err, ok);
    }
    if let Some(coarse) = coarse {
        for (i, &exact) in SPHERE_EXACT.iter().enumerate().filter(|(_, e)| **e != 0.0) {
            if i != 1 && i != 4 {
                continue;
            }
            let order = observed_order((coarse[i] - exact).abs(), (fine[i] - exact).abs());
            failed += check_row(
                table,
                format!("sphere_order_mu{i}"),
                order,
                2.0,
                rel_error(order, 2.0),
                order >= MIN_ORDER,
            );
        }
    }

    // Axisymmetric and sphere spectra of the configured material.
    if geometry.alpha().is_some() {
        let material = config.material_model()?;
        let settings = OracleSettings {
            n_elements: n.n_elements,
            order: n.element_order,
            refinement: level,
            max_mode: n.m_max.min(2),
            ..OracleSettings::default()
        };
        let report = oracle_comparison(&geometry, &material, settings)?;
        let (fw, rv) = (report.worst_forward(), report.worst_reverse());
        failed += check_row(table, "oracle_axisym_in_sphere".into(), fw, 0.0, fw, fw <= report.tolerance);
        failed += check_row(table, "oracle_sphere_in_axisym".into(), rv, 0.0, rv, rv <= report.tolerance);
    }
    Ok(failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str, command: Command) -> RunConfig {
        let text = format!(
            "[geometry]\nalpha_degrees = 120\n[material]\neps_plus = 1\neps_minus = -1.9\n[numerics]\nn_elements = 48\nm_max = 1\n{extra}"
        );
        parse_config(&text, Some(command)).unwrap()
    }

    #[test]
    fn exponents_reports_the_bench_pair() {
        let out = run_command(&config("", Command::Exponents));
        assert_eq!(out.exit_code, EXIT_OK);
        assert_eq!(out.table.rows.len(), 1);
        let eta = out.table.get(0, "eta").unwrap().as_f64().unwrap();
        let d = out.table.get(0, "D").unwrap().as_f64().unwrap();
        assert!((eta.abs() - 0.965).abs() < 5e-3);
        assert!(eta * d > 0.0);
        assert_eq!(out.table.get(0, "mode_m"), Some(&Cell::Int(0)));
    }

    #[test]
    fn errors_land_in_the_header() {
        let text = "[geometry]\nalpha_degrees = 90\n[material]\neps_plus = 1\neps_minus = -0.5\n[numerics]\nn_elements = 32\n";
        let cfg = parse_config(text, Some(Command::FluxCheck)).unwrap();
        let out = run_command(&cfg);
        assert_eq!(out.exit_code, EXIT_ERROR);
        assert!(out.table.rows.is_empty());
        assert_eq!(out.table.header_value("error").unwrap()["code"], json!("NO_BLACK_HOLE_PAIR"));
        assert!(out.table.to_csv().contains("NO_BLACK_HOLE_PAIR"));
    }

    #[test]
    fn empty_scan_is_header_only() {
        let out = run_command(&config("[sweep]\nkappas = []\n", Command::ScanContrast));
        assert_eq!(out.exit_code, EXIT_OK);
        assert!(out.table.rows.is_empty());
    }

    #[test]
    fn window_empty_gives_exit_two() {
        let out = run_command(&config("[sweep]\ndeltas = [0.0, 4.0]\n", Command::SweepDelta));
        assert_eq!(out.exit_code, EXIT_WARNING, "{:?}", out.error);
        assert_eq!(out.table.rows.len(), 2);
    }
}
