//! Randomized suite for the isotropic-plane ↔ isometry correspondence.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bidisk_core::sommer::*;

fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    loop {
        let g = random_gaussian(rng, n, n);
        if let Some(_) = g.clone().try_inverse() {
            let svd = g.clone().svd(false, false);
            let min = svd.singular_values.iter().cloned().fold(f64::MAX, f64::min);
            if min > 1e-3 {
                return g;
            }
        }
    }
}

#[test]
fn thousand_planes_signature_2_2() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let form = SigForm::new(2, 2);
    for i in 0..1000 {
        let plane = random_isotropic_plane(&mut rng, &form);
        assert!(
            is_isotropic(&plane, &form, ISOTROPY_TOL).unwrap(),
            "plane {i} not isotropic"
        );
        let u = plane_to_unitary(&plane, &form).unwrap();
        assert!(u.isometry_defect() <= 1e-10, "plane {i} defect {}", u.isometry_defect());
        // basis-change invariance
        let g = random_invertible(&mut rng, 2);
        let changed = plane.change_basis(&g).unwrap();
        let u2 = plane_to_unitary(&changed, &form).unwrap();
        assert!(
            max_abs(&(u2.a.clone() - u.a.clone())) <= 1e-9,
            "plane {i} basis-change drift"
        );
        // round trip plane → U → plane by span distance
        let back = unitary_to_plane(&u).unwrap();
        assert!(span_distance(&plane, &back) <= 1e-9, "plane {i} round trip");
    }
}

#[test]
fn hundred_planes_signature_2_3() {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let form = SigForm::new(2, 3);
    for i in 0..100 {
        let plane = random_isotropic_plane(&mut rng, &form);
        assert!(is_isotropic(&plane, &form, ISOTROPY_TOL).unwrap());
        let u = plane_to_unitary(&plane, &form).unwrap();
        assert!(u.isometry_defect() <= 1e-10, "plane {i} defect");
        let g = random_invertible(&mut rng, 2);
        let changed = plane.change_basis(&g).unwrap();
        let u2 = plane_to_unitary(&changed, &form).unwrap();
        assert!(max_abs(&(u2.a - u.a.clone())) <= 1e-9);
        let back = unitary_to_plane(&u).unwrap();
        assert!(span_distance(&plane, &back) <= 1e-9);
    }
}

#[test]
fn unitary_round_trip_both_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let form = SigForm::new(2, 2);
    for _ in 0..1000 {
        let u = random_unitary(&mut rng, 2);
        let plane = unitary_to_plane(&UnitaryLike { a: u.clone() }).unwrap();
        let rec = plane_to_unitary(&plane, &form).unwrap();
        assert!(max_abs(&(rec.a - u)) <= 1e-10);
    }
}

/// For a smooth path U(t) of unitaries, U(t)*·(U(t+h) − U(t)) is
/// skew-hermitian up to O(h²); the observed convergence order between
/// h = 1e−3 and h = 1e−4 must be at least 1.9.
#[test]
fn finite_difference_maurer_cartan_skewness() {
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    for _ in 0..10 {
        let u0 = random_unitary(&mut rng, 2);
        // skew-hermitian generator X
        let g = random_gaussian(&mut rng, 2, 2);
        let x = (&g - g.adjoint()) * C64::new(0.5, 0.0);
        let u_at = |t: f64| -> DMatrix<C64> { &u0 * matrix_exp(&(&x * C64::new(t, 0.0))) };
        let defect = |h: f64| -> f64 {
            let t = 0.3;
            let s = u_at(t).adjoint() * (u_at(t + h) - u_at(t));
            max_abs(&(s.clone() + s.adjoint()))
        };
        let d3 = defect(1e-3);
        let d4 = defect(1e-4);
        assert!(d3 > 0.0 && d4 > 0.0);
        let order = (d3 / d4).log10();
        assert!(order >= 1.9, "observed order {order} < 1.9 (d3={d3:e}, d4={d4:e})");
    }
}
