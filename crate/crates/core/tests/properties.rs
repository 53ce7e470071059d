use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use conetrap::cli::{format_float, parse_config, Command};
use conetrap::discretization::{assemble_axisym, build_latitude_mesh, ElementOrder};
use conetrap::eigensolver::{canonical_order, mu_to_lambda, pencil_eigenvalues};
use conetrap::linalg::{Matrix, C64};
use conetrap::model::{make_cap_geometry, make_material, AzimuthalMode, CutoffFamily, CutoffProfile};
use conetrap::Error;

proptest! {
    #[test]
    fn floats_round_trip_at_twelve_digits(x in -1e200f64..1e200) {
        let back: f64 = format_float(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-12 * x.abs());
    }

    #[test]
    fn exponent_pairs_are_symmetric(re in -50.0f64..50.0, im in -50.0f64..50.0) {
        let mu = C64::new(re, im);
        let (lm, lp) = mu_to_lambda(mu);
        prop_assert!((lm + lp + 1.0).norm() <= 1e-12);
        prop_assert!((lp * (lp + 1.0) - mu).norm() <= 1e-10 * (1.0 + mu.norm()));
        prop_assert!(lp.re >= -0.5 - 1e-15);
    }

    #[test]
    fn cutoff_is_a_plateau_then_zero(r_one in 0.05f64..1.0, width in 0.05f64..2.0, t in 0.0f64..1.0, bump in any::<bool>()) {
        let family = if bump { CutoffFamily::SmoothBump } else { CutoffFamily::PolynomialC2 };
        let c = CutoffProfile::new(r_one, r_one + width, family).unwrap();
        prop_assert_eq!(c.eval(t * r_one).chi, 1.0);
        prop_assert_eq!(c.eval(r_one + width * (1.0 + t)).chi, 0.0);
        let mid = c.eval(r_one + t * width).chi;
        prop_assert!((0.0..=1.0).contains(&mid));
    }

    #[test]
    fn latitude_mesh_snaps_the_interface(alpha in 0.05f64..(PI - 0.05), n in 4usize..300) {
        let g = make_cap_geometry(alpha).unwrap();
        let mesh = build_latitude_mesh(&g, n).unwrap();
        let nodes = mesh.nodes();
        prop_assert!((mesh.n_elements() as i64 - n as i64).abs() <= 1);
        prop_assert_eq!(nodes[0], -FRAC_PI_2);
        prop_assert_eq!(*nodes.last().unwrap(), FRAC_PI_2);
        prop_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(nodes[mesh.interface_index()], -FRAC_PI_2 + alpha);
    }

    #[test]
    fn unsorted_delta_lists_are_rejected(mut deltas in prop::collection::vec(0.0f64..1.0, 2..6)) {
        deltas.sort_by(f64::total_cmp);
        deltas.dedup();
        prop_assume!(deltas.len() >= 2);
        let list = |d: &[f64]| d.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let base = "[geometry]\nalpha_degrees = 120\n[material]\neps_plus = 1\neps_minus = -1.9\n";
        let sorted = format!("{base}[sweep]\ndeltas = [{}]\n", list(&deltas));
        prop_assert!(parse_config(&sorted, Some(Command::SweepDelta)).is_ok());
        deltas.reverse();
        let reversed = format!("{base}[sweep]\ndeltas = [{}]\n", list(&deltas));
        let rejected = matches!(parse_config(&reversed, Some(Command::SweepDelta)), Err(Error::ConfigValidation(_)));
        prop_assert!(rejected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_pencil_spectra_are_conjugation_closed(entries in prop::collection::vec(-1.0f64..1.0, 64), signs in prop::collection::vec(any::<bool>(), 8)) {
        let n = 8;
        let a = Matrix::from_fn(n, n, |i, j| C64::new(entries[i.min(j) * n + i.max(j)], 0.0));
        let b = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(if signs[i] { 1.5 } else { -1.5 }, 0.0)
            } else {
                C64::new(0.1 * entries[(i + j) % 64], 0.0)
            }
        });
        let mus = pencil_eigenvalues(&a, &b).unwrap();
        prop_assert_eq!(mus.len(), n);
        prop_assert!(mus.windows(2).all(|w| canonical_order(&w[0], &w[1]).is_le()));
        for mu in &mus {
            let partner = mus.iter().map(|z| (z - mu.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(partner <= 1e-8 * (1.0 + mu.norm()));
        }
    }

    #[test]
    fn spectrum_is_invariant_under_scaling_eps(alpha in 0.5f64..2.6, kappa in -3.0f64..-0.3, t in 0.1f64..10.0, m in 0u32..3) {
        let g = make_cap_geometry(alpha).unwrap();
        let mesh = Arc::new(build_latitude_mesh(&g, 16).unwrap());
        let mat = make_material(1.0, kappa, 0.0).unwrap();
        let p = assemble_axisym(mesh.clone(), &mat, AzimuthalMode(m), ElementOrder::P2).unwrap();
        let q = assemble_axisym(mesh, &mat.scaled(t), AzimuthalMode(m), ElementOrder::P2).unwrap();
        let a = pencil_eigenvalues(&p.a, &p.b).unwrap();
        let b = pencil_eigenvalues(&q.a, &q.b).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x.re, y.re, epsilon = 1e-7, max_relative = 1e-7);
            prop_assert!((x.im - y.im).abs() <= 1e-7 * (1.0 + x.norm()));
        }
    }
}
