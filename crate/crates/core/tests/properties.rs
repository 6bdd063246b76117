//! Property-based invariants across modules.

use minsurf::foliation::build_leaf;
use minsurf::metric::scalar_curvature;
use minsurf::output::plotdata;
use minsurf::plateau::{solve_plateau, ShootingProblem};
use minsurf::profile::CatenoidProfile;
use minsurf::{AmbientMetric, CheckReport};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn report_passes_iff_within_tolerance(value in -1e3f64..1e3, tol in 0f64..1e3) {
        prop_assert_eq!(CheckReport::new("x.y", "anchor", value, tol).passed, value <= tol);
    }

    #[test]
    fn schwarzschild_is_scalar_flat(n in 4usize..=6, rho in 1.05f64..500.0, a in 0f64..3.14, b in 0f64..6.28) {
        let mut x = vec![0.0; n];
        x[0] = rho * a.sin() * b.cos();
        x[1] = rho * a.sin() * b.sin();
        x[n - 1] = rho * a.cos();
        let r = scalar_curvature(&AmbientMetric::schwarzschild(n, 2.0), &x).unwrap();
        prop_assert!(r.abs() < 1e-8, "R = {}", r);
    }

    #[test]
    fn catenoid_conserves_flux(n in 4usize..=6, a in 0.1f64..3.0, s in 1.01f64..50.0) {
        let c = CatenoidProfile::new(a, 2.0 * c_neck(a, n), 0.0, n).unwrap();
        let t = s * c.neck();
        let p = c.slope(t);
        let q = t.powi(n as i32 - 2) * p / (1.0 + p * p).sqrt();
        prop_assert!((q + a).abs() < 1e-10 * a.max(1.0), "Q = {} for a = {}", q, a);
    }

    #[test]
    fn flat_plateau_is_the_plane(n in 3usize..=6, r in 3f64..300.0, z in -10f64..10.0) {
        let prof = solve_plateau(&ShootingProblem::new(AmbientMetric::flat(n), r, z)).unwrap();
        prop_assert!(prof.samples.iter().all(|s| (s.f - z).abs() < 1e-10 && s.p.abs() < 1e-10));
    }

    #[test]
    fn schwarzschild_profiles_stay_above_boundary(r in 20f64..200.0, z in 0.2f64..5.0) {
        let prof = solve_plateau(&ShootingProblem::new(AmbientMetric::schwarzschild(4, 2.0), r, z)).unwrap();
        prop_assert!(prof.samples.iter().all(|s| s.f >= z - 1e-8 && s.p <= 1e-10));
    }
}

fn c_neck(a: f64, n: usize) -> f64 {
    a.powf(1.0 / (n as f64 - 2.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn plotdata_blocks_follow_z(mut zs in proptest::collection::vec(0.1f64..10.0, 1..5)) {
        zs.dedup();
        let flat = AmbientMetric::flat(4);
        let leaves: Vec<_> = zs.iter().map(|&z| build_leaf(&flat, z, &[50.0, 100.0], 10.0, 1e-6).unwrap()).collect();
        let text = plotdata(&leaves, Some(1.0));
        let blocks: Vec<&str> = text.split("\n\n\n").collect();
        prop_assert_eq!(blocks.len(), leaves.len() + 1);
        let heads: Vec<f64> = blocks[..leaves.len()]
            .iter()
            .map(|b| b.lines().next().unwrap().trim_start_matches("# leaf z=").parse().unwrap())
            .collect();
        prop_assert!(heads.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(plotdata(&leaves, Some(1.0)), text);
    }
}
