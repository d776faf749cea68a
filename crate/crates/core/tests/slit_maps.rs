use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use loewner_core::maps::{b_of_k, k_of_theta, sqrt_branch, tip_coefficient, MobiusMap, TiltedSlitParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// θ(k) = (π/2) k / √(k² + 16), inverted by bisection
fn theta_bisect(target: f64) -> f64 {
    let theta = |k: f64| FRAC_PI_2 * k / (k * k + 16.0).sqrt();
    let (mut lo, mut hi) = (0.0, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theta(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn k_of_theta_against_bisection() {
    assert_eq!(k_of_theta(0.0).unwrap(), 0.0);
    assert!((k_of_theta(0.1).unwrap() - theta_bisect(0.1)).abs() < 1e-10);
    assert!((k_of_theta(FRAC_PI_4).unwrap() - 4.0 / 3f64.sqrt()).abs() < 1e-12);
    assert!(k_of_theta(1.0).is_err());
}

#[test]
fn b_at_quarter_turn_has_argument_pi_over_4() {
    let b = b_of_k(4.0 / 3f64.sqrt()).unwrap();
    assert!((b.arg() - FRAC_PI_4).abs() < 1e-12);
    assert!((b_of_k(0.0).unwrap() - c(0.0, 2.0)).norm() < 1e-12);
}

#[test]
fn sqrt_branch_examples() {
    assert!((sqrt_branch(c(-1.0, 0.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
    assert!((sqrt_branch(c(-4.0, 0.0)).unwrap() - c(0.0, 2.0)).norm() < 1e-15);
    let r = sqrt_branch(c(0.0, 1.0)).unwrap();
    assert!((r - Complex64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
}

#[test]
fn vertical_tip_and_identity() {
    let p = TiltedSlitParams::from_theta(0.0, 0.25, 0.3).unwrap();
    assert!((p.tip() - c(0.3, 1.0)).norm() < 1e-12);
    let z = c(3.0, 4.0);
    let id = TiltedSlitParams::from_theta(0.4, 0.0, 1.0).unwrap();
    assert_eq!(id.forward(z).unwrap(), z);
    assert_eq!(id.inverse(z).unwrap(), z);
}

#[test]
fn hydrodynamic_expansion_at_infinity() {
    let p = TiltedSlitParams::from_theta(0.3, 0.5, 0.0).unwrap();
    for r in [1e3, 1e4] {
        for a in [0.3, 1.2, 2.5] {
            let z = Complex64::from_polar(r, a);
            let g = p.inverse(z).unwrap();
            let err = (g - z - 2.0 * p.dt / z).norm();
            // next term is O(|z|^{-2})
            assert!(err * r * r < 10.0, "{err} at |z| = {r}");
        }
    }
}

proptest! {
    #[test]
    fn slit_round_trip(theta in -1.2f64..1.2, dt in 1e-4f64..2.0, base in -3.0f64..3.0, x in -5.0f64..5.0, y in 0.01f64..5.0) {
        let p = TiltedSlitParams::from_theta(theta, dt, base).unwrap();
        let z = c(x, y);
        let back = p.inverse(p.forward(z).unwrap()).unwrap();
        prop_assert!((back - z).norm() < 1e-8 * (1.0 + z.norm()));
    }

    #[test]
    fn tip_maps_to_driving_value(k in -10.0f64..10.0, dt in 1e-4f64..2.0, base in -3.0f64..3.0) {
        let p = TiltedSlitParams::from_slope(k, dt, base).unwrap();
        let w = p.inverse(p.tip()).unwrap();
        prop_assert!((w - c(base + k * dt.sqrt(), 0.0)).norm() < 1e-7 * (1.0 + dt.sqrt()));
    }

    #[test]
    fn tip_modulus_at_least_two(k in 0.0f64..50.0) {
        prop_assert!(tip_coefficient(k).norm() >= 2.0 - 1e-12);
        prop_assert!(b_of_k(k).unwrap().im > 0.0);
    }

    #[test]
    fn forward_stays_in_half_plane(theta in -1.2f64..1.2, x in -5.0f64..5.0, y in 0.0f64..5.0) {
        let p = TiltedSlitParams::from_theta(theta, 1.0, 0.0).unwrap();
        prop_assert!(p.forward(c(x, y)).unwrap().im >= -1e-12);
    }

    #[test]
    fn mobius_inverse_and_composition(a in -2.0f64..2.0, b in -2.0f64..2.0, d in 0.5f64..2.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let m = MobiusMap::new(c(d, 0.0), c(a, b), c(0.3, -0.2), c(1.0, 0.0));
        prop_assume!(m.is_ok());
        let m = m.unwrap();
        let z = c(x, y);
        let w = m.apply(z);
        prop_assume!(w.norm() < 1e6);
        prop_assert!((m.inverse().apply(w) - z).norm() < 1e-8 * (1.0 + z.norm()));
        let n = MobiusMap::affine(c(0.0, 2.0), c(1.0, 1.0)).unwrap();
        prop_assert!((n.compose(&m).apply(z) - n.apply(w)).norm() < 1e-8 * (1.0 + w.norm()));
    }
}

#[test]
fn tilted_rays_lean_consistently() {
    for theta in [-PI / 3.0, -0.2, 0.2, PI / 3.0] {
        let p = TiltedSlitParams::from_theta(theta, 1.0, 0.0).unwrap();
        let tip = p.tip();
        assert!((tip.arg() - (FRAC_PI_2 - theta)).abs() < 1e-12);
        assert_eq!(p.k.signum(), theta.signum());
    }
}
