mod common;

use common::*;
use dstek::radial::{self, LayeredMedium};
use dstek::scattering;
use dstek::specfun::{sph_bessel, BesselKind, SphericalBessel};
use dstek::Complex64;
use proptest::prelude::*;

#[test]
fn rayleigh_oracle_matches_degree_zero() {
    let z = c(1.7, 0.4);
    let exact = -Complex64::i() * (Complex64::i() * z).exp() / z;
    assert!((h1_rayleigh(0, z) - exact).norm() < 1e-15);
    // h_1 = -(z + i) e^{iz} / z^2
    let exact1 = -(z + Complex64::i()) * (Complex64::i() * z).exp() / (z * z);
    assert!((h1_rayleigh(1, z) - exact1).norm() < 1e-14);
}

#[test]
fn series_oracle_matches_degree_zero() {
    for z in [c(0.3, 0.0), c(2.0, -1.0), c(5.5, 0.5)] {
        assert!((j_series(0, z) - z.sin() / z).norm() < 1e-14);
    }
}

#[test]
fn library_j_matches_series() {
    for l in 0..=20 {
        for z in [
            c(0.05, 0.0),
            c(0.9, 0.2),
            c(3.0, 0.0),
            c(4.5, -1.5),
            c(7.0, 0.5),
        ] {
            let lib = sph_bessel(BesselKind::J, l, z).unwrap();
            let oracle = j_series(l, z);
            assert!(
                rel_err(lib, oracle) < 1e-11,
                "l={l} z={z}: {lib} vs {oracle}"
            );
        }
    }
}

#[test]
fn library_h_matches_rayleigh() {
    for l in 0..=25 {
        for z in [
            c(0.4, 0.0),
            c(1.0, 0.3),
            c(6.0, 0.0),
            c(12.0, 2.0),
            c(30.0, 0.0),
        ] {
            let lib = sph_bessel(BesselKind::H1, l, z).unwrap();
            let oracle = h1_rayleigh(l, z);
            assert!(
                rel_err(lib, oracle) < 1e-11,
                "l={l} z={z}: {lib} vs {oracle}"
            );
        }
    }
}

#[test]
fn traces_match_ode_integration() {
    let med = LayeredMedium::new(
        vec![0.3, 0.7, 1.0],
        vec![c(4.0, 0.5), c(2.0, 0.0), c(1.5, 0.1)],
    )
    .unwrap();
    for l in [1, 4, 9] {
        for tm in [false, true] {
            let trace = if tm {
                radial::tm_radial_trace(&med, 1.7, l)
            } else {
                radial::te_radial_trace(&med, 1.7, l)
            }
            .unwrap();
            let (f, d) = radial_trace_ode(&med, 1.7, l, tm);
            let scale = f.norm().max(d.norm());
            assert!(
                (trace.value_at_r - f).norm() < 1e-8 * scale,
                "l={l} tm={tm}"
            );
            assert!(
                (trace.riccati_at_r - d).norm() < 1e-8 * scale,
                "l={l} tm={tm}"
            );
        }
    }
}

#[test]
fn coated_vacuum_shell_matches_textbook_mie() {
    // sphere of index 2 and radius 1/2 inside a vacuum shell
    let med = LayeredMedium::new(vec![0.5, 1.0], vec![c(4.0, 0.0), c(1.0, 0.0)]).unwrap();
    for l in 1..=8 {
        let (te, tm) = scattering::mie_coefficients(&med, 1.0, l).unwrap();
        let (a, b) = textbook_mie(l, c(2.0, 0.0), 0.5);
        assert!(rel_err(te, -b) < 1e-10, "l={l}: {te} vs {}", -b);
        assert!(rel_err(tm, -a) < 1e-10, "l={l}: {tm} vs {}", -a);
    }
}

#[test]
fn absorbing_sphere_matches_textbook_mie() {
    let eps = c(2.25, 0.8);
    let med = LayeredMedium::homogeneous(eps, 1.0).unwrap();
    for l in 1..=6 {
        let (te, tm) = scattering::mie_coefficients(&med, 1.3, l).unwrap();
        let (a, b) = textbook_mie(l, eps.sqrt(), 1.3);
        assert!(rel_err(te, -b) < 1e-10, "l={l}");
        assert!(rel_err(tm, -a) < 1e-10, "l={l}");
    }
}

#[test]
fn resonance_flag_brackets_bisected_root() {
    let j1 = |x: f64| x.sin() / (x * x) - x.cos() / x;
    let root = bisect(j1, 4.0, 5.0);
    assert!((root - 4.493_409_457_909_064).abs() < 1e-12);
    let vac = LayeredMedium::vacuum(1.0);
    assert!(!radial::check_assumption(&vac, root, 1).unwrap().all_clear());
    assert!(radial::check_assumption(&vac, root + 1e-3, 1)
        .unwrap()
        .all_clear());
}

proptest! {
    #[test]
    fn scaled_wronskian_is_small(l in 0usize..=40, re in 0.05f64..50.0, im in -5.0f64..5.0) {
        let pair = SphericalBessel::default().pair(l, c(re, im)).unwrap();
        prop_assert!(pair.scaled_wronskian_residual() <= 1e-10);
    }

    #[test]
    fn three_term_recurrence(l in 1usize..=30, re in 0.5f64..30.0, im in -2.0f64..2.0) {
        let z = c(re, im);
        for kind in [BesselKind::J, BesselKind::Y] {
            let lo = sph_bessel(kind, l - 1, z).unwrap();
            let mid = sph_bessel(kind, l, z).unwrap();
            let hi = sph_bessel(kind, l + 1, z).unwrap();
            let lhs = lo + hi;
            let rhs = (2 * l + 1) as f64 / z * mid;
            let scale = lo.norm().max(hi.norm()).max(rhs.norm());
            prop_assert!((lhs - rhs).norm() <= 1e-11 * scale, "{kind:?} l={l} z={z}");
        }
    }
}
